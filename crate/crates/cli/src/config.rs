//! Experiment configuration: TOML (with JSON fallback) plus CLI overrides.

use std::path::{Path, PathBuf};

use serde::Deserialize;

/// Inclusive numeric grid written as `start:end:step`.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("grid '{spec}' is not start:end:step"));
    }
    let start: f64 = parts[0].parse().map_err(|e| format!("grid start: {e}"))?;
    let end: f64 = parts[1].parse().map_err(|e| format!("grid end: {e}"))?;
    let step: f64 = parts[2].parse().map_err(|e| format!("grid step: {e}"))?;
    if !(step > 0.0) || end < start {
        return Err(format!("grid '{spec}' must have positive step and end >= start"));
    }
    let count = ((end - start) / step).round() as usize + 1;
    Ok((0..count).map(|i| start + i as f64 * step).collect())
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub initializer: InitializerSection,
    #[serde(default)]
    pub timer: TimerSection,
    #[serde(default)]
    pub cutoff_profile: CutoffProfileSection,
    #[serde(default)]
    pub sharp_threshold: SharpThresholdSection,
    #[serde(default)]
    pub concat_error: ConcatErrorSection,
    #[serde(default)]
    pub trunc_normal: TruncNormalSection,
    #[serde(default)]
    pub imperfect_init: ImperfectInitSection,
    #[serde(default)]
    pub transfer: TransferSection,
    #[serde(default)]
    pub oracle_suite: OracleSuiteSection,
}

impl FileConfig {
    /// Reads TOML first, then JSON as the fallback syntax.
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        match toml::from_str::<FileConfig>(&text) {
            Ok(cfg) => Ok(cfg),
            Err(toml_err) => serde_json::from_str::<FileConfig>(&text)
                .map_err(|json_err| {
                    format!(
                        "config {} is neither valid TOML ({toml_err}) nor JSON ({json_err})",
                        path.display()
                    )
                }),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitializerSection {
    pub aux_counts: Vec<usize>,
    pub omega: f64,
    pub gamma: f64,
    pub delta: f64,
    pub c: f64,
    pub t_grid: String,
    pub k_max: usize,
}

impl Default for InitializerSection {
    fn default() -> Self {
        Self {
            aux_counts: vec![10, 100, 1000],
            omega: 1.0,
            gamma: 1.0,
            delta: 0.5,
            c: 0.5,
            t_grid: "0:24:0.5".into(),
            k_max: 12,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimerSection {
    pub n: usize,
    pub gamma: f64,
    pub x_grid: String,
}

impl Default for TimerSection {
    fn default() -> Self {
        Self { n: 256, gamma: 1.0, x_grid: "-3:3:0.25".into() }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CutoffProfileSection {
    pub n_list: Vec<usize>,
    pub gamma: f64,
    pub x_grid: String,
}

impl Default for CutoffProfileSection {
    fn default() -> Self {
        Self { n_list: vec![64, 256, 1024], gamma: 1.0, x_grid: "-3:3:0.05".into() }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SharpThresholdSection {
    pub n_list: Vec<usize>,
    pub gamma: f64,
    pub c_grid: String,
}

impl Default for SharpThresholdSection {
    fn default() -> Self {
        Self { n_list: vec![64, 256, 1024, 4096], gamma: 1.0, c_grid: "0.5:2.0:0.1".into() }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConcatErrorSection {
    pub l_max: usize,
    pub n_list: Vec<usize>,
    pub gamma: f64,
    pub schedule_steps: usize,
    pub schedule_n: usize,
}

impl Default for ConcatErrorSection {
    fn default() -> Self {
        Self {
            l_max: 20,
            n_list: vec![100, 400, 1600],
            gamma: 1.0,
            schedule_steps: 10,
            schedule_n: 10_000,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TruncNormalSection {
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    pub n_list: Vec<usize>,
    pub omega: f64,
    /// Preparation rate; if absent each combination picks
    /// `ln xi = 2 alpha / beta + 1` so the final-display bound applies.
    pub gamma: Option<f64>,
}

impl Default for TruncNormalSection {
    fn default() -> Self {
        Self {
            alphas: vec![0.25, 0.5, 0.75],
            betas: vec![0.1, 0.5],
            n_list: vec![50, 100, 200],
            omega: 1.0,
            gamma: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ImperfectInitSection {
    pub n: usize,
    pub t: f64,
    pub gamma: f64,
    pub epsilons: Vec<f64>,
}

impl Default for ImperfectInitSection {
    fn default() -> Self {
        Self { n: 8, t: 8.0, gamma: 1.0, epsilons: vec![1e-3, 1e-4] }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TransferSection {
    pub n: usize,
    pub seeds: usize,
    pub omega: f64,
    pub eq_tol: f64,
    /// Optional fixed input as Bloch angles `theta,phi`; random inputs
    /// from the seed otherwise.
    pub input: Option<String>,
}

impl Default for TransferSection {
    fn default() -> Self {
        Self { n: 3, seeds: 20, omega: 1.0, eq_tol: 1e-9, input: None }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleSuiteSection {
    pub max_qubits: usize,
}

impl Default for OracleSuiteSection {
    fn default() -> Self {
        Self { max_qubits: 5 }
    }
}
