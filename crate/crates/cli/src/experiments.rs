//! Experiment implementations: deterministic CSV/JSON artifacts per run.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use dqip_core::classical::{
    admissible_worst_input, evolve_classical, excited_population, initializer_generator,
    overlap_formula, theorem1_certificate,
};
use dqip_core::cutoff::{
    concatenation_error, cutoff_profile, fit_poly_degree, imperfect_init_shift, sharp_threshold,
    total_mistrigger, truncated_normal_overlap,
};
use dqip_core::gadgets::InitializerConfig;
use dqip_core::transfer::{bloch_state, run_transfer_3qubit, run_transfer_nqubit, RunOptions};
use dqip_core::verify::acceptance::CriterionOutcome;
use dqip_core::verify::oracle_suite::run_oracle_suite;

use crate::config::{parse_grid, FileConfig};

pub type ExpResult = Result<Vec<PathBuf>, String>;

fn write_artifact(out_dir: &Path, name: &str, contents: &str) -> Result<PathBuf, String> {
    std::fs::create_dir_all(out_dir)
        .map_err(|e| format!("cannot create {}: {e}", out_dir.display()))?;
    let path = out_dir.join(name);
    std::fs::write(&path, contents).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    Ok(path)
}

fn core_err(e: dqip_core::Error) -> String {
    e.to_string()
}

pub fn run_initializer(cfg: &FileConfig, out_dir: &Path) -> ExpResult {
    let sec = &cfg.initializer;
    let t_grid = parse_grid(&sec.t_grid)?;
    let mut pop_csv = String::from("m,t,excited_population,bound,mu\n");
    for &m in &sec.aux_counts {
        let icfg =
            InitializerConfig { aux_qubits: m, damping_rate: sec.omega, preparation_rate: sec.gamma };
        let gen = initializer_generator(m, sec.omega, sec.gamma).map_err(core_err)?;
        let p0 = admissible_worst_input(m, sec.delta, sec.c).map_err(core_err)?;
        let rows: Vec<String> = t_grid
            .par_iter()
            .map(|&t| {
                let p = evolve_classical(&gen, &p0, t).map_err(core_err)?;
                let pop = excited_population(&p, m);
                let cert = theorem1_certificate(&icfg, sec.delta, sec.c, t).map_err(core_err)?;
                Ok(format!("{},{},{},{},{}\n", m, t, pop, cert.bound, cert.mu))
            })
            .collect::<Result<_, String>>()?;
        for r in rows {
            pop_csv.push_str(&r);
        }
    }
    let pop_path = write_artifact(out_dir, "initializer_population.csv", &pop_csv)?;

    let t_end = *t_grid.last().unwrap_or(&10.0);
    let mut ov_csv = String::from("k,t,overlap\n");
    for k in 0..=sec.k_max {
        let v = overlap_formula(k, t_end, sec.omega, sec.gamma).map_err(core_err)?;
        let _ = writeln!(ov_csv, "{},{},{}", k, t_end, v);
    }
    let ov_path = write_artifact(out_dir, "initializer_overlap.csv", &ov_csv)?;
    Ok(vec![pop_path, ov_path])
}

pub fn run_timer(cfg: &FileConfig, out_dir: &Path) -> ExpResult {
    let sec = &cfg.timer;
    let grid = parse_grid(&sec.x_grid)?;
    let profile = cutoff_profile(sec.n, sec.gamma, &grid).map_err(core_err)?;
    let mut csv = String::from("x,t,deviation,tail,remainder\n");
    for s in &profile.samples {
        let _ = writeln!(csv, "{},{},{},{},{}", s.x, s.time, s.deviation, s.tail, s.remainder);
    }
    Ok(vec![write_artifact(out_dir, "timer_profile.csv", &csv)?])
}

pub fn run_cutoff_profile(cfg: &FileConfig, out_dir: &Path) -> ExpResult {
    let sec = &cfg.cutoff_profile;
    let grid = parse_grid(&sec.x_grid)?;
    let profiles: Vec<_> = sec
        .n_list
        .par_iter()
        .map(|&n| cutoff_profile(n, sec.gamma, &grid).map_err(core_err))
        .collect::<Result<_, String>>()?;
    let mut csv = String::from("n,x,t,deviation,tail,remainder\n");
    let mut summary = String::from("n,sup_remainder,fitted_constant\n");
    for p in &profiles {
        for s in &p.samples {
            let _ = writeln!(
                csv,
                "{},{},{},{},{},{}",
                p.timer_qubits, s.x, s.time, s.deviation, s.tail, s.remainder
            );
        }
        let _ = writeln!(summary, "{},{},{}", p.timer_qubits, p.sup_remainder, p.fitted_constant);
    }
    Ok(vec![
        write_artifact(out_dir, "cutoff_profile.csv", &csv)?,
        write_artifact(out_dir, "cutoff_profile_summary.csv", &summary)?,
    ])
}

pub fn run_sharp_threshold(cfg: &FileConfig, out_dir: &Path) -> ExpResult {
    let sec = &cfg.sharp_threshold;
    let c_grid = parse_grid(&sec.c_grid)?;
    let mut csv = String::from("n,c,occupation\n");
    for &n in &sec.n_list {
        let rows: Vec<String> = c_grid
            .par_iter()
            .map(|&c| {
                let v = sharp_threshold(c, n, sec.gamma).map_err(core_err)?;
                Ok(format!("{},{},{}\n", n, c, v))
            })
            .collect::<Result<_, String>>()?;
        for r in rows {
            csv.push_str(&r);
        }
    }
    Ok(vec![write_artifact(out_dir, "sharp_threshold.csv", &csv)?])
}

#[derive(Serialize)]
struct ConcatSummary {
    fitted_poly_degree: Option<u32>,
    schedule_steps: usize,
    schedule_timer_qubits: usize,
    total_mistrigger: f64,
}

pub fn run_concat_error(cfg: &FileConfig, out_dir: &Path) -> ExpResult {
    let sec = &cfg.concat_error;
    let mut csv = String::from("l,n,early,late,alpha,beta\n");
    let mut cases = Vec::new();
    for l in 1..=sec.l_max {
        for &n in &sec.n_list {
            let c = concatenation_error(l, n, sec.gamma).map_err(core_err)?;
            let _ = writeln!(csv, "{},{},{},{},{},{}", l, n, c.early, c.late, c.alpha, c.beta);
            cases.push(c);
        }
    }
    let summary = ConcatSummary {
        fitted_poly_degree: fit_poly_degree(&cases, 2),
        schedule_steps: sec.schedule_steps,
        schedule_timer_qubits: sec.schedule_n,
        total_mistrigger: total_mistrigger(sec.schedule_steps, sec.schedule_n, sec.gamma)
            .map_err(core_err)?,
    };
    let json = serde_json::to_string_pretty(&summary).map_err(|e| e.to_string())?;
    Ok(vec![
        write_artifact(out_dir, "concat_error.csv", &csv)?,
        write_artifact(out_dir, "concat_error_summary.json", &json)?,
    ])
}

pub fn run_trunc_normal(cfg: &FileConfig, out_dir: &Path) -> ExpResult {
    let sec = &cfg.trunc_normal;
    let mut csv = String::from("alpha,beta,n,ln_xi,numeric,mills_bound,early_bound,z2,mills_regime\n");
    for &alpha in &sec.alphas {
        for &beta in &sec.betas {
            let gamma_cp = match sec.gamma {
                Some(g) => g,
                None => sec.omega * ((2.0 * alpha / beta + 1.0f64).exp() - 1.0),
            };
            let ln_xi = (1.0 + gamma_cp / sec.omega).ln();
            for &n in &sec.n_list {
                let o = truncated_normal_overlap(n, alpha, beta, sec.omega, gamma_cp)
                    .map_err(core_err)?;
                let _ = writeln!(
                    csv,
                    "{},{},{},{},{},{},{},{},{}",
                    alpha,
                    beta,
                    n,
                    ln_xi,
                    o.numeric,
                    o.mills_bound,
                    o.early_bound,
                    o.z2,
                    o.mills_regime()
                );
            }
        }
    }
    Ok(vec![write_artifact(out_dir, "trunc_normal.csv", &csv)?])
}

pub fn run_imperfect_init(cfg: &FileConfig, out_dir: &Path) -> ExpResult {
    let sec = &cfg.imperfect_init;
    let mut csv =
        String::from("n,eps,t,ideal,exact,shift,naive_first_order,derivative,residual\n");
    for &eps in &sec.epsilons {
        let s = imperfect_init_shift(sec.n, eps, sec.t, sec.gamma).map_err(core_err)?;
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{}",
            sec.n,
            eps,
            sec.t,
            s.ideal_occupation,
            s.exact_occupation,
            s.shift,
            s.naive_first_order,
            s.derivative,
            s.residual
        );
    }
    Ok(vec![write_artifact(out_dir, "imperfect_init.csv", &csv)?])
}

#[derive(Serialize)]
struct TransferReport {
    n: usize,
    seeds: usize,
    omega: f64,
    eq_tol: f64,
    fidelities: Vec<f64>,
    min_fidelity: f64,
    mean_fidelity: f64,
    stage_names: Vec<String>,
    mean_stage_times: Vec<f64>,
}

pub fn run_transfer(cfg: &FileConfig, out_dir: &Path, seed: u64) -> ExpResult {
    let sec = &cfg.transfer;
    let opts = RunOptions { eq_tol: sec.eq_tol, ..RunOptions::default() };
    let inputs: Vec<(f64, f64)> = match &sec.input {
        Some(spec) => {
            let parts: Vec<&str> = spec.split(',').collect();
            if parts.len() != 2 {
                return Err(format!("input '{spec}' is not theta,phi"));
            }
            let theta: f64 = parts[0].parse().map_err(|e| format!("theta: {e}"))?;
            let phi: f64 = parts[1].parse().map_err(|e| format!("phi: {e}"))?;
            vec![(theta, phi)]
        }
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..sec.seeds.max(1))
                .map(|_| {
                    (
                        rng.gen::<f64>() * std::f64::consts::PI,
                        rng.gen::<f64>() * std::f64::consts::TAU,
                    )
                })
                .collect()
        }
    };
    let runs: Vec<_> = inputs
        .par_iter()
        .map(|&(theta, phi)| {
            let input = bloch_state(theta, phi);
            let run = if sec.n == 3 {
                run_transfer_3qubit(&input, sec.omega, &opts)
            } else {
                run_transfer_nqubit(sec.n, &input, sec.omega, &opts)
            }
            .map_err(core_err)?;
            Ok((run.fidelity, run.stage_names, run.stage_times))
        })
        .collect::<Result<_, String>>()?;

    let fidelities: Vec<f64> = runs.iter().map(|r| r.0).collect();
    let min_fidelity = fidelities.iter().copied().fold(f64::INFINITY, f64::min);
    let mean_fidelity = fidelities.iter().sum::<f64>() / fidelities.len() as f64;
    let stage_names = runs[0].1.clone();
    let mut mean_stage_times = vec![0.0; stage_names.len()];
    for r in &runs {
        for (acc, &t) in mean_stage_times.iter_mut().zip(&r.2) {
            *acc += t / runs.len() as f64;
        }
    }
    let report = TransferReport {
        n: sec.n,
        seeds: inputs.len(),
        omega: sec.omega,
        eq_tol: sec.eq_tol,
        fidelities,
        min_fidelity,
        mean_fidelity,
        stage_names,
        mean_stage_times,
    };
    let json = serde_json::to_string_pretty(&report).map_err(|e| e.to_string())?;
    Ok(vec![write_artifact(out_dir, "transfer_report.json", &json)?])
}

pub fn run_oracles(cfg: &FileConfig, out_dir: &Path) -> Result<(Vec<PathBuf>, bool), String> {
    let outcomes = run_oracle_suite(cfg.oracle_suite.max_qubits).map_err(core_err)?;
    print_outcomes(&outcomes);
    let all_pass = outcomes.iter().all(|o| o.passed);
    let json = serde_json::to_string_pretty(&outcomes).map_err(|e| e.to_string())?;
    Ok((vec![write_artifact(out_dir, "oracle_suite.json", &json)?], all_pass))
}

pub fn print_outcomes(outcomes: &[CriterionOutcome]) {
    for o in outcomes {
        println!("{}", o.line());
    }
}
