//! Reduced density matrices.
//!
//! `rho^(n)` is reported in the orthonormal basis of normalized
//! (anti)symmetrized `n`-particle states, labelled by sorted index tuples
//! (strictly increasing for fermions, non-decreasing for bosons). In that
//! basis its trace is `N!/(N-n)!` and its eigenvalues are those of the full
//! product-space operator. Element `(k', k)` is built from
//! `<psi| a_k^dag ... a_k' |psi>`.
//!
//! Mode reduced density matrices are labelled by occupation patterns of the
//! chosen modes, grouped by the number of particles inside the partition.

use std::collections::{BTreeMap, HashMap};

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::first_quant::{tensor_len, to_product_tensor, ProductTensor};
use crate::fock::{enumerate_basis, inner_product, FockState, Ladder, OccupationVector, Statistics};
use crate::linalg::{factorial, hermiticity_violation, permutations, CMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LabelKind {
    /// Sorted single-particle index tuples.
    ModeTuple,
    /// Occupation numbers of the partition modes, in partition order.
    OccupationPattern,
    /// Spin indices of the selected orbits.
    SpinPattern,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    pub labels: Vec<Vec<usize>>,
    pub label_kind: LabelKind,
    pub entries: CMatrix,
    /// Declared trace: `N!/(N-n)!` for `rho^(n)`, `1` for mode RDMs.
    pub trace_convention: f64,
}

impl DensityMatrix {
    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn trace(&self) -> C64 {
        self.entries.trace()
    }

    pub fn hermiticity_violation(&self) -> f64 {
        hermiticity_violation(&self.entries)
    }

    pub fn index_of(&self, label: &[usize]) -> Option<usize> {
        self.labels.iter().position(|l| l.as_slice() == label)
    }

    pub fn get(&self, row: &[usize], col: &[usize]) -> Option<C64> {
        Some(self.entries[(self.index_of(row)?, self.index_of(col)?)])
    }

    pub fn max_off_diagonal(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    worst = worst.max(self.entries[(i, j)].norm());
                }
            }
        }
        worst
    }
}

fn check_order(state: &FockState, n: usize) -> Result<()> {
    if n == 0 || n > state.particles() as usize {
        return Err(Error::BadOrder { n, particles: state.particles() });
    }
    Ok(())
}

/// Sorted index tuples of length `n` over `modes`, lexicographic.
fn tuple_labels(statistics: Statistics, modes: usize, n: usize) -> Vec<Vec<usize>> {
    fn rec(
        statistics: Statistics,
        modes: usize,
        n: usize,
        start: usize,
        prefix: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        for k in start..modes {
            prefix.push(k);
            let next = match statistics {
                Statistics::Fermionic => k + 1,
                Statistics::Bosonic => k,
            };
            rec(statistics, modes, n, next, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(statistics, modes, n, 0, &mut Vec::with_capacity(n), &mut out);
    out
}

fn multiplicity_factor(modes: usize, label: &[usize]) -> f64 {
    OccupationVector::from_indices(modes, label).factorial_product()
}

/// `rho^(n)` from operator strings: the column vector
/// `a_{k_1} ... a_{k_n} |psi>` is formed once per label and every element is
/// an inner product of two of them.
pub fn n_particle_rdm(state: &FockState, n: usize) -> Result<DensityMatrix> {
    check_order(state, n)?;
    let labels = tuple_labels(state.statistics(), state.modes(), n);
    let reduced: Vec<FockState> = labels
        .iter()
        .map(|label| {
            let ops: Vec<Ladder> = label.iter().map(|&k| Ladder::annihilate(k)).collect();
            state.apply(&ops.into())
        })
        .collect::<Result<_>>()?;
    let weights: Vec<f64> = labels.iter().map(|l| multiplicity_factor(state.modes(), l).sqrt()).collect();
    let n_fact = factorial(n as u32);
    let dim = labels.len();
    let mut entries = CMatrix::zeros(dim, dim);
    for row in 0..dim {
        for col in 0..dim {
            let overlap = inner_product(&reduced[col], &reduced[row])?;
            entries[(row, col)] = overlap * (n_fact / (weights[row] * weights[col]));
        }
    }
    Ok(DensityMatrix {
        labels,
        label_kind: LabelKind::ModeTuple,
        entries,
        trace_convention: falling_factorial(state.particles(), n),
    })
}

/// `N (N-1) ... (N-n+1)`
pub fn falling_factorial(particles: u32, n: usize) -> f64 {
    (0..n as u32).map(|i| (particles - i) as f64).product()
}

/// `rho^(n)` from the first-quantized tensor: the product-basis element is
/// `1/(N-n)! sum_{k_{n+1}..k_N} <k' r|^(±) rho |k r>^(±)` with
/// `|x>^(±) = (1/sqrt(N!)) sum_P (±1)^P |P x>`, then projected onto the
/// same normalized `n`-particle basis used by [`n_particle_rdm`].
pub fn n_particle_rdm_via_symmetrized_sum(state: &FockState, n: usize) -> Result<DensityMatrix> {
    check_order(state, n)?;
    let tensor = to_product_tensor(state)?;
    let big_n = state.particles() as usize;
    let modes = state.modes();
    let overlaps = symmetrized_overlaps(&tensor)?;
    let rest_len = tensor_len(modes, (big_n - n) as u32)?;
    let prefactor = 1.0 / factorial((big_n - n) as u32);

    let labels = tuple_labels(state.statistics(), modes, n);
    // product-basis expansion of each normalized n-particle label state
    let label_vectors: Vec<Vec<(usize, C64)>> = labels
        .iter()
        .map(|label| {
            let occ = OccupationVector::from_indices(modes, label);
            let basis = FockState::basis(state.statistics(), occ)?;
            let t = to_product_tensor(&basis)?;
            Ok(t.entries().iter().enumerate().filter(|(_, z)| z.norm() > 0.0).map(|(i, &z)| (i, z)).collect())
        })
        .collect::<Result<_>>()?;

    let product_element = |a: usize, b: usize| -> C64 {
        let mut acc = C64::default();
        for r in 0..rest_len {
            acc += overlaps[a * rest_len + r] * overlaps[b * rest_len + r].conj();
        }
        acc * prefactor
    };

    let dim = labels.len();
    let mut entries = CMatrix::zeros(dim, dim);
    for row in 0..dim {
        for col in 0..dim {
            let mut acc = C64::default();
            for &(a, va) in &label_vectors[row] {
                for &(b, vb) in &label_vectors[col] {
                    acc += va.conj() * vb * product_element(a, b);
                }
            }
            entries[(row, col)] = acc;
        }
    }
    Ok(DensityMatrix {
        labels,
        label_kind: LabelKind::ModeTuple,
        entries,
        trace_convention: falling_factorial(state.particles(), n),
    })
}

/// `<x^(±)|psi>` for every product index `x`, by explicit permutation sums.
fn symmetrized_overlaps(tensor: &ProductTensor) -> Result<Vec<C64>> {
    let n = tensor.particles() as usize;
    let perms = permutations(n);
    let norm = 1.0 / factorial(tensor.particles()).sqrt();
    let modes = tensor.modes();
    let mut out = Vec::with_capacity(tensor.entries().len());
    for (tuple, _) in tensor.iter() {
        let mut acc = C64::default();
        for (perm, parity) in &perms {
            let permuted: Vec<usize> = perm.iter().map(|&p| tuple[p]).collect();
            let sign = match tensor.statistics() {
                Statistics::Fermionic => *parity as f64,
                Statistics::Bosonic => 1.0,
            };
            let flat = permuted.iter().fold(0, |acc, &k| acc * modes + k);
            acc += tensor.entries()[flat] * sign;
        }
        out.push(acc * norm);
    }
    Ok(out)
}

pub(crate) fn validate_partition(modes: usize, partition: &[usize]) -> Result<()> {
    if partition.is_empty() {
        return Err(Error::BadPartition("partition is empty".into()));
    }
    let mut seen = vec![false; modes];
    for &m in partition {
        if m >= modes {
            return Err(Error::BadPartition(format!("mode {m} out of range for {modes} modes")));
        }
        if seen[m] {
            return Err(Error::BadPartition(format!("mode {m} listed twice")));
        }
        seen[m] = true;
    }
    if partition.len() == modes {
        return Err(Error::BadPartition("partition must leave at least one mode out".into()));
    }
    Ok(())
}

/// Modes in `0..modes` not listed in `partition`, ascending.
pub fn complement(modes: usize, partition: &[usize]) -> Vec<usize> {
    (0..modes).filter(|m| !partition.contains(m)).collect()
}

/// Occupation patterns that can appear on `size` partition modes, ordered
/// by partition particle number and then lexicographically.
fn pattern_labels(statistics: Statistics, size: usize, rest: usize, particles: u32) -> Vec<Vec<usize>> {
    let capacity = |m: usize| match statistics {
        Statistics::Fermionic => m as u32,
        Statistics::Bosonic => particles,
    };
    let low = particles.saturating_sub(capacity(rest));
    let high = particles.min(capacity(size));
    (low..=high)
        .flat_map(|s| enumerate_basis(statistics, size, s))
        .map(|o| o.as_slice().iter().map(|&n| n as usize).collect())
        .collect()
}

/// Reduced density matrix of the occupation numbers of `partition`.
///
/// Modes are first reordered (with fermionic signs) so the partition comes
/// first in the listed order, then
/// `rho(n'; n) = sum_rest conj(f(n', rest)) f(n, rest)`.
pub fn mode_rdm(state: &FockState, partition: &[usize]) -> Result<DensityMatrix> {
    validate_partition(state.modes(), partition)?;
    let rest = complement(state.modes(), partition);
    let order: Vec<usize> = partition.iter().chain(&rest).copied().collect();
    let permuted = state.permute_modes(&order)?;
    let size = partition.len();

    let labels = pattern_labels(state.statistics(), size, rest.len(), state.particles());
    let index: HashMap<Vec<usize>, usize> = labels.iter().cloned().enumerate().map(|(i, l)| (l, i)).collect();

    let mut by_rest: BTreeMap<&[u32], Vec<(usize, C64)>> = BTreeMap::new();
    for (occ, &f) in permuted.iter() {
        let (inside, outside) = occ.as_slice().split_at(size);
        let key: Vec<usize> = inside.iter().map(|&n| n as usize).collect();
        let row = index[&key];
        by_rest.entry(outside).or_default().push((row, f));
    }

    let dim = labels.len();
    let mut entries = CMatrix::zeros(dim, dim);
    for group in by_rest.values() {
        for &(i, fi) in group {
            for &(j, fj) in group {
                entries[(i, j)] += fi.conj() * fj;
            }
        }
    }
    Ok(DensityMatrix { labels, label_kind: LabelKind::OccupationPattern, entries, trace_convention: 1.0 })
}

/// Matrix elements `<i'_1 .. i'_n| O |i_1 .. i_n>` keyed by `(i', i)`.
pub type OperatorTable = BTreeMap<(Vec<usize>, Vec<usize>), C64>;

pub const HERMITIAN_TOLERANCE: f64 = 1e-10;

/// `sum O(i'; i) <psi| a_{i'_1}^dag .. a_{i'_n}^dag a_{i_n} .. a_{i_1} |psi>`.
pub fn expectation_n_body(state: &FockState, n: usize, elements: &OperatorTable) -> Result<C64> {
    if n == 0 {
        return Err(Error::BadOrder { n, particles: state.particles() });
    }
    let mut violation = 0.0_f64;
    for ((primed, plain), &value) in elements {
        if primed.len() != n || plain.len() != n {
            return Err(Error::IncompatibleStates(format!(
                "operator entry ({primed:?}; {plain:?}) does not have {n} indices per side"
            )));
        }
        if let Some(&mode) = primed.iter().chain(plain).find(|&&m| m >= state.modes()) {
            return Err(Error::ModeOutOfRange { mode, modes: state.modes() });
        }
        let mirror = elements.get(&(plain.clone(), primed.clone())).copied().unwrap_or_default();
        violation = violation.max((value - mirror.conj()).norm());
    }
    if violation > HERMITIAN_TOLERANCE {
        return Err(Error::NotHermitian { violation });
    }
    let mut total = C64::default();
    for ((primed, plain), &value) in elements {
        let ops: Vec<Ladder> = primed
            .iter()
            .map(|&k| Ladder::create(k))
            .chain(plain.iter().rev().map(|&k| Ladder::annihilate(k)))
            .collect();
        let moved = state.apply(&ops.into())?;
        total += value * inner_product(state, &moved)?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use Statistics::*;

    fn occ(v: &[u32]) -> OccupationVector {
        OccupationVector::new(v.to_vec())
    }

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    /// `(1/sqrt m) a_0^dag (a_1^dag + ... + a_m^dag) |0>` on `m + 1` modes.
    pub(crate) fn m_family(m: usize) -> FockState {
        let terms = (1..=m).map(|j| (OccupationVector::from_indices(m + 1, &[0, j]), c(1.0)));
        FockState::new(Fermionic, m + 1, terms, true).unwrap()
    }

    #[test]
    fn boson_pair_one_body() {
        let s = FockState::basis(Bosonic, occ(&[1, 1, 0, 0])).unwrap();
        for rho in [n_particle_rdm(&s, 1).unwrap(), n_particle_rdm_via_symmetrized_sum(&s, 1).unwrap()] {
            assert!((rho.get(&[0], &[0]).unwrap() - c(1.0)).norm() < 1e-12);
            assert!((rho.get(&[1], &[1]).unwrap() - c(1.0)).norm() < 1e-12);
            assert!(rho.get(&[0], &[1]).unwrap().norm() < 1e-12);
            assert!((rho.trace() - c(2.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn full_reduction_is_rank_one() {
        let s = FockState::new(
            Fermionic,
            4,
            [(occ(&[1, 1, 0, 0]), c(0.6)), (occ(&[0, 1, 0, 1]), C64::new(0.0, 0.8))],
            false,
        )
        .unwrap();
        let rho = n_particle_rdm(&s, 2).unwrap();
        assert!((rho.trace() - c(2.0)).norm() < 1e-12);
        let eig = crate::linalg::hermitian_eigen(&rho.entries);
        assert!((eig.values[0] - 2.0).abs() < 1e-12);
        assert!(eig.values[1..].iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn m_family_spectrum() {
        let s = m_family(2);
        let rho = n_particle_rdm(&s, 1).unwrap();
        // a single determinant of modes 0 and (1+2)/sqrt2: spectrum {1, 1, 0},
        // while the diagonal in this basis is {1, 1/2, 1/2}
        let eig = crate::linalg::hermitian_eigen(&rho.entries);
        for (v, e) in eig.values.iter().zip([1.0, 1.0, 0.0]) {
            assert!((v - e).abs() < 1e-12, "{:?}", eig.values);
        }
        for (k, e) in [1.0, 0.5, 0.5].into_iter().enumerate() {
            assert!((rho.entries[(k, k)] - c(e)).norm() < 1e-12);
        }
        assert!((rho.entries[(1, 2)] - c(0.5)).norm() < 1e-12);
    }

    #[test]
    fn order_out_of_range() {
        let s = FockState::basis(Fermionic, occ(&[1, 1, 0])).unwrap();
        assert!(matches!(n_particle_rdm(&s, 0), Err(Error::BadOrder { .. })));
        assert!(matches!(n_particle_rdm(&s, 3), Err(Error::BadOrder { .. })));
        assert!(matches!(n_particle_rdm_via_symmetrized_sum(&s, 3), Err(Error::BadOrder { .. })));
    }

    #[test]
    fn mode_rdm_examples() {
        let s = FockState::basis(Bosonic, occ(&[3, 0, 0])).unwrap();
        let rho = mode_rdm(&s, &[0]).unwrap();
        assert!((rho.trace() - c(1.0)).norm() < 1e-15);
        let nonzero = rho.entries.iter().filter(|z| z.norm() > 1e-15).count();
        assert_eq!(nonzero, 1);

        let singlet =
            FockState::new(Fermionic, 4, [(occ(&[1, 0, 0, 1]), c(1.0)), (occ(&[0, 1, 1, 0]), c(-1.0))], true).unwrap();
        let rho = mode_rdm(&singlet, &[0, 1]).unwrap();
        assert!((rho.get(&[1, 0], &[1, 0]).unwrap() - c(0.5)).norm() < 1e-15);
        assert!((rho.get(&[0, 1], &[0, 1]).unwrap() - c(0.5)).norm() < 1e-15);
        assert!(rho.get(&[1, 0], &[0, 1]).unwrap().norm() < 1e-15);
    }

    #[test]
    fn bad_partitions() {
        let s = FockState::basis(Fermionic, occ(&[1, 1, 0])).unwrap();
        for p in [vec![], vec![0, 0], vec![3], vec![0, 1, 2]] {
            assert!(matches!(mode_rdm(&s, &p), Err(Error::BadPartition(_))), "{p:?}");
        }
    }

    #[test]
    fn number_and_identity_operators() {
        let s = FockState::new(Bosonic, 3, [(occ(&[2, 1, 0]), c(0.6)), (occ(&[0, 1, 2]), C64::new(0.0, 0.8))], false)
            .unwrap();
        let mut number = OperatorTable::new();
        number.insert((vec![0], vec![0]), c(1.0));
        let n0 = expectation_n_body(&s, 1, &number).unwrap();
        assert!((n0 - c(0.36 * 2.0)).norm() < 1e-12);

        let mut identity = OperatorTable::new();
        for k in 0..3 {
            identity.insert((vec![k], vec![k]), c(1.0));
        }
        assert!((expectation_n_body(&s, 1, &identity).unwrap() - c(3.0)).norm() < 1e-12);

        let mut bad = OperatorTable::new();
        bad.insert((vec![0], vec![1]), c(1.0));
        assert!(matches!(expectation_n_body(&s, 1, &bad), Err(Error::NotHermitian { .. })));
    }
}
