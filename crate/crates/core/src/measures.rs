//! Entropies and configuration counting in a fixed single-particle basis.
//!
//! All entropies are in bits, computed from trace-normalized matrices.

use std::fmt;

use crate::error::{Error, Result};
use crate::fock::FockState;
use crate::linalg::hermitian_eigen;
use crate::rdm::{mode_rdm, n_particle_rdm, DensityMatrix};

/// Amplitudes above this modulus count as a configuration.
pub const CONFIGURATION_THRESHOLD: f64 = 1e-10;
/// Negative eigenvalues down to `-EIGENVALUE_CLAMP` are treated as zero.
pub const EIGENVALUE_CLAMP: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EntropyKind {
    /// From the spectrum of the normalized matrix.
    VonNeumann,
    /// From the diagonal of the normalized matrix in the current basis.
    Occupation,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EntropyReport {
    pub value_bits: f64,
    /// Probabilities the entropy was computed from, sorted descending. For
    /// [`EntropyKind::Occupation`] these are the normalized diagonal entries.
    pub eigenvalues: Vec<f64>,
    pub partition: String,
    pub kind: EntropyKind,
}

impl EntropyReport {
    fn from_distribution(mut probs: Vec<f64>, partition: String, kind: EntropyKind) -> Self {
        probs.sort_by(|a, b| b.total_cmp(a));
        EntropyReport { value_bits: shannon_bits(&probs), eigenvalues: probs, partition, kind }
    }

    /// `-sum p log2 p` over the stored probabilities.
    pub fn recompute(&self) -> f64 {
        shannon_bits(&self.eigenvalues)
    }
}

impl fmt::Display for EntropyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} bits", self.partition, self.value_bits)
    }
}

/// `-sum p log2 p` with `0 log 0 = 0`.
pub fn shannon_bits(probs: &[f64]) -> f64 {
    let s: f64 = probs.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.log2()).sum();
    // -0.0 and rounding dust below zero
    s.max(0.0)
}

fn trace_of(rho: &DensityMatrix) -> Result<f64> {
    let trace = rho.trace().re;
    // also rejects NaN
    if trace.is_nan() || trace <= 0.0 {
        return Err(Error::ZeroState);
    }
    Ok(trace)
}

/// Von Neumann entropy of `rho / Tr rho`.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<EntropyReport> {
    let trace = trace_of(rho)?;
    let eig = hermitian_eigen(&rho.entries);
    let mut probs = Vec::with_capacity(eig.values.len());
    for v in eig.values {
        let p = v / trace;
        if p < -EIGENVALUE_CLAMP {
            return Err(Error::NotPSD { eigenvalue: p });
        }
        probs.push(p.max(0.0));
    }
    Ok(EntropyReport::from_distribution(probs, String::new(), EntropyKind::VonNeumann))
}

/// Shannon entropy of the diagonal of `rho / Tr rho`: the entropy of the
/// matrix after discarding coherences between basis labels. It depends on
/// the single-particle basis and agrees with [`von_neumann_entropy`] exactly
/// when `rho` is diagonal.
pub fn occupation_entropy(rho: &DensityMatrix) -> Result<EntropyReport> {
    let trace = trace_of(rho)?;
    let mut probs = Vec::with_capacity(rho.dim());
    for k in 0..rho.dim() {
        let p = rho.entries[(k, k)].re / trace;
        if p < -EIGENVALUE_CLAMP {
            return Err(Error::NotPSD { eigenvalue: p });
        }
        probs.push(p.max(0.0));
    }
    Ok(EntropyReport::from_distribution(probs, String::new(), EntropyKind::Occupation))
}

/// One-particle partial entropy: the occupation entropy of `rho^(1)` in the
/// state's current single-particle basis.
pub fn partial_entropy(state: &FockState) -> Result<EntropyReport> {
    let rho = n_particle_rdm(state, 1)?;
    let mut report = occupation_entropy(&rho)?;
    report.partition = "one-particle".into();
    Ok(report)
}

/// True iff exactly one occupation amplitude is above
/// [`CONFIGURATION_THRESHOLD`]: a single Slater determinant or permanent in
/// the current basis.
pub fn is_single_configuration(state: &FockState) -> bool {
    state.configuration_count(CONFIGURATION_THRESHOLD) == 1
}

pub fn describe_partition(partition: &[usize]) -> String {
    let modes: Vec<String> = partition.iter().map(|m| m.to_string()).collect();
    format!("modes {}", modes.join(","))
}

/// Entanglement between the occupation numbers of `partition` and those of
/// the remaining modes.
pub fn mode_entanglement_entropy(state: &FockState, partition: &[usize]) -> Result<EntropyReport> {
    let rho = mode_rdm(state, partition)?;
    let mut report = von_neumann_entropy(&rho)?;
    report.partition = describe_partition(partition);
    Ok(report)
}
