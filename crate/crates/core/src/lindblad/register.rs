use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An ordered collection of uniquely labeled qubit sites.
///
/// Site `i` maps to bit `n - 1 - i` of a computational-basis index, so an
/// index reads left to right as the ket string `|q0 q1 ... q_{n-1}>`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct QubitRegister {
    labels: Vec<String>,
}

impl QubitRegister {
    pub fn new<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::InvalidConfig("register needs at least one site".into()));
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::InvalidConfig(format!("duplicate site label '{l}'")));
            }
        }
        if labels.len() > 24 {
            return Err(Error::RegisterTooLarge(format!(
                "{} sites exceeds the dense representation limit",
                labels.len()
            )));
        }
        Ok(Self { labels })
    }

    /// Register with labels `prefix1 ... prefixN`.
    pub fn numbered(prefix: &str, count: usize) -> Result<Self> {
        Self::new((1..=count).map(|i| format!("{prefix}{i}")))
    }

    pub fn n_sites(&self) -> usize {
        self.labels.len()
    }

    pub fn dimension(&self) -> usize {
        1 << self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn site_index(&self, label: &str) -> Result<usize> {
        self.index_of(label)
            .ok_or_else(|| Error::RegisterMismatch(format!("no site labeled '{label}'")))
    }

    pub fn contains(&self, label: &str) -> bool {
        self.index_of(label).is_some()
    }

    /// Bit position (within a basis index) carrying site `site`.
    pub fn bit_of_site(&self, site: usize) -> usize {
        self.labels.len() - 1 - site
    }

    /// Value of site `site` in basis index `idx`.
    pub fn site_value(&self, idx: usize, site: usize) -> usize {
        (idx >> self.bit_of_site(site)) & 1
    }

    /// Basis index of the product state described by `bits` (one char per
    /// site, '0' or '1', in site order).
    pub fn basis_index(&self, bits: &str) -> Result<usize> {
        if bits.len() != self.labels.len() {
            return Err(Error::DimensionMismatch(format!(
                "bit string '{bits}' does not match {} sites",
                self.labels.len()
            )));
        }
        let mut idx = 0usize;
        for c in bits.chars() {
            idx <<= 1;
            match c {
                '0' => {}
                '1' => idx |= 1,
                _ => return Err(Error::InvalidConfig(format!("bad bit char '{c}'"))),
            }
        }
        Ok(idx)
    }

    /// Concatenation with disjoint label sets.
    pub fn concat(&self, other: &QubitRegister) -> Result<Self> {
        Self::new(self.labels.iter().chain(other.labels.iter()).cloned())
    }
}

impl TryFrom<Vec<String>> for QubitRegister {
    type Error = Error;
    fn try_from(labels: Vec<String>) -> Result<Self> {
        Self::new(labels)
    }
}

impl From<QubitRegister> for Vec<String> {
    fn from(r: QubitRegister) -> Self {
        r.labels
    }
}

/// Spread the bits of `sub` (one per position, most significant first) onto
/// the given bit positions of a larger index.
pub(crate) fn spread_bits(sub: usize, positions: &[usize]) -> usize {
    let mut out = 0usize;
    for (a, &pos) in positions.iter().enumerate() {
        let bit = (sub >> (positions.len() - 1 - a)) & 1;
        out |= bit << pos;
    }
    out
}
