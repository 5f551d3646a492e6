//! First-quantized (product-basis) representation and the conversions
//! between product-basis coefficients `q`, (anti)symmetrized-basis
//! coefficients `g` and `h`, and occupation amplitudes `f`.
//!
//! Conventions, for a sorted index multiset `k` with occupations `n_a`:
//!
//! * `|k>^(±) = sum over all N! permutations P of (±1)^P |P k>` (unnormalized)
//! * `|k>^(s) = |k>^(±) / sqrt(N! prod n_a!)` (unit norm, equal to the
//!   occupation basis state)
//! * `h(k) = f(n)`, `g(k) = h(k) / sqrt(N! prod n_a!)`
//! * `q(P k) = (±1)^P sqrt(prod n_a! / N!) f(n)`

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::{FockState, OccupationVector, Statistics, PRUNE_TOLERANCE};
use crate::linalg::{factorial, permutation_parity, permutations};

/// Upper bound on `M^N` for dense product tensors.
pub const MAX_TENSOR_ENTRIES: usize = 1_000_000;
/// Tolerance of the (anti)symmetry check.
pub const SYMMETRY_TOLERANCE: f64 = 1e-10;

pub(crate) fn tensor_len(modes: usize, particles: u32) -> Result<usize> {
    let entries = (modes as u128).checked_pow(particles).unwrap_or(u128::MAX);
    if entries > MAX_TENSOR_ENTRIES as u128 {
        return Err(Error::CapacityExceeded { entries, limit: MAX_TENSOR_ENTRIES });
    }
    Ok(entries as usize)
}

/// Flat row-major offset of an index tuple (first index most significant).
fn flat_index(modes: usize, tuple: &[usize]) -> usize {
    tuple.iter().fold(0, |acc, &k| acc * modes + k)
}

fn unflatten(modes: usize, particles: usize, mut flat: usize) -> Vec<usize> {
    let mut tuple = vec![0; particles];
    for slot in tuple.iter_mut().rev() {
        *slot = flat % modes;
        flat /= modes;
    }
    tuple
}

/// A dense rank-`N` tensor with no symmetry requirement.
#[derive(Clone, Debug, PartialEq)]
pub struct RawTensor {
    pub modes: usize,
    pub particles: u32,
    pub entries: Vec<C64>,
}

impl RawTensor {
    pub fn zeros(modes: usize, particles: u32) -> Result<Self> {
        let len = tensor_len(modes, particles)?;
        Ok(RawTensor { modes, particles, entries: vec![C64::default(); len] })
    }

    /// Tensor product of single-particle vectors, `v_1 ⊗ ... ⊗ v_N`.
    pub fn product(factors: &[Vec<C64>]) -> Result<Self> {
        let modes = factors.first().map_or(1, |v| v.len());
        if factors.iter().any(|v| v.len() != modes) {
            return Err(Error::IncompatibleStates("factors differ in dimension".into()));
        }
        let mut t = RawTensor::zeros(modes, factors.len() as u32)?;
        for (flat, entry) in t.entries.iter_mut().enumerate() {
            let tuple = unflatten(modes, factors.len(), flat);
            *entry = tuple.iter().zip(factors).map(|(&k, v)| v[k]).product();
        }
        Ok(t)
    }

    pub fn get(&self, tuple: &[usize]) -> C64 {
        self.entries[flat_index(self.modes, tuple)]
    }
}

/// Product-basis coefficients `q(k_1, ..., k_N)` of an (anti)symmetric state.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductTensor {
    statistics: Statistics,
    modes: usize,
    particles: u32,
    entries: Vec<C64>,
}

impl ProductTensor {
    /// Wraps dense entries, rejecting tensors that break (anti)symmetry by
    /// more than [`SYMMETRY_TOLERANCE`].
    pub fn new(statistics: Statistics, modes: usize, particles: u32, entries: Vec<C64>) -> Result<Self> {
        let len = tensor_len(modes, particles)?;
        if entries.len() != len {
            return Err(Error::IncompatibleStates(format!("tensor has {} entries, expected {len}", entries.len())));
        }
        let tensor = ProductTensor { statistics, modes, particles, entries };
        let violation = tensor.symmetry_violation();
        if violation > SYMMETRY_TOLERANCE {
            return Err(Error::NotSymmetric { violation });
        }
        Ok(tensor)
    }

    pub fn statistics(&self) -> Statistics {
        self.statistics
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn particles(&self) -> u32 {
        self.particles
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn get(&self, tuple: &[usize]) -> C64 {
        self.entries[flat_index(self.modes, tuple)]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Largest `|q(..k_i, k_{i+1}..) ∓ q(..k_{i+1}, k_i..)|` over adjacent
    /// transpositions, which generate the full permutation group.
    pub fn symmetry_violation(&self) -> f64 {
        let n = self.particles as usize;
        let sign = self.statistics.exchange_sign();
        let mut worst = 0.0_f64;
        for (flat, &value) in self.entries.iter().enumerate() {
            let tuple = unflatten(self.modes, n, flat);
            for i in 0..n.saturating_sub(1) {
                let mut swapped = tuple.clone();
                swapped.swap(i, i + 1);
                let other = self.entries[flat_index(self.modes, &swapped)];
                worst = worst.max((value - other * sign).norm());
            }
        }
        worst
    }

    /// Iterates `(index tuple, q)` over all entries.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<usize>, C64)> + '_ {
        let n = self.particles as usize;
        self.entries.iter().enumerate().map(move |(flat, &q)| (unflatten(self.modes, n, flat), q))
    }
}

/// Projects a raw tensor onto the symmetric (bosons) or antisymmetric
/// (fermions) subspace: `(1/N!) sum_P (±1)^P P(raw)`.
pub fn symmetrize(raw: &RawTensor, statistics: Statistics) -> Result<ProductTensor> {
    let n = raw.particles as usize;
    let len = tensor_len(raw.modes, raw.particles)?;
    if raw.entries.len() != len {
        return Err(Error::IncompatibleStates("raw tensor has the wrong number of entries".into()));
    }
    let perms = permutations(n);
    let weight = 1.0 / factorial(raw.particles);
    let mut entries = vec![C64::default(); len];
    for (flat, entry) in entries.iter_mut().enumerate() {
        let tuple = unflatten(raw.modes, n, flat);
        let mut acc = C64::default();
        for (perm, parity) in &perms {
            let permuted: Vec<usize> = perm.iter().map(|&p| tuple[p]).collect();
            let sign = match statistics {
                Statistics::Fermionic => *parity as f64,
                Statistics::Bosonic => 1.0,
            };
            acc += raw.get(&permuted) * sign;
        }
        *entry = acc * weight;
    }
    Ok(ProductTensor { statistics, modes: raw.modes, particles: raw.particles, entries })
}

/// Expands an occupation-number state into product-basis coefficients.
pub fn to_product_tensor(state: &FockState) -> Result<ProductTensor> {
    let n = state.particles();
    let modes = state.modes();
    let len = tensor_len(modes, n)?;
    let mut entries = vec![C64::default(); len];
    let perms = permutations(n as usize);
    let total = factorial(n);
    for (occ, &f) in state.iter() {
        let sorted = occ.sorted_indices();
        let value = f * (occ.factorial_product() / total).sqrt();
        for (perm, _) in &perms {
            let tuple: Vec<usize> = perm.iter().map(|&p| sorted[p]).collect();
            let sign = match state.statistics() {
                Statistics::Fermionic => permutation_parity(&tuple) as f64,
                Statistics::Bosonic => 1.0,
            };
            entries[flat_index(modes, &tuple)] = value * sign;
        }
    }
    Ok(ProductTensor { statistics: state.statistics(), modes, particles: n, entries })
}

/// Inverse of [`to_product_tensor`]: `f(n) = sqrt(N!/prod n_a!) q(sorted k)`.
pub fn from_product_tensor(tensor: &ProductTensor) -> Result<FockState> {
    let violation = tensor.symmetry_violation();
    if violation > SYMMETRY_TOLERANCE {
        return Err(Error::NotSymmetric { violation });
    }
    if tensor.norm_sqr().sqrt() <= PRUNE_TOLERANCE {
        return Err(Error::ZeroState);
    }
    let total = factorial(tensor.particles);
    let mut amplitudes = BTreeMap::new();
    for (tuple, q) in tensor.iter() {
        if tuple.windows(2).any(|w| w[0] > w[1]) {
            continue;
        }
        if tensor.statistics == Statistics::Fermionic && tuple.windows(2).any(|w| w[0] == w[1]) {
            continue;
        }
        let occ = OccupationVector::from_indices(tensor.modes, &tuple);
        let f = q * (total / occ.factorial_product()).sqrt();
        amplitudes.insert(occ, f);
    }
    Ok(FockState::from_parts(tensor.statistics, tensor.modes, tensor.particles, amplitudes))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoefficientFlavor {
    /// `g`: coefficients of the unnormalized basis `|k>^(±)`.
    Unnormalized,
    /// `h`: coefficients of the normalized basis `|k>^(s)`.
    Normalized,
}

/// Coefficients keyed by sorted index multisets.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetrizedCoefficients {
    pub flavor: CoefficientFlavor,
    pub entries: BTreeMap<Vec<usize>, C64>,
}

impl SymmetrizedCoefficients {
    pub fn get(&self, key: &[usize]) -> C64 {
        self.entries.get(key).copied().unwrap_or_default()
    }
}

pub fn extract_coefficients(state: &FockState, flavor: CoefficientFlavor) -> SymmetrizedCoefficients {
    let total = factorial(state.particles());
    let entries = state
        .iter()
        .map(|(occ, &f)| {
            let value = match flavor {
                CoefficientFlavor::Normalized => f,
                CoefficientFlavor::Unnormalized => f / (total * occ.factorial_product()).sqrt(),
            };
            (occ.sorted_indices(), value)
        })
        .collect();
    SymmetrizedCoefficients { flavor, entries }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;
    use Statistics::*;

    fn occ(v: &[u32]) -> OccupationVector {
        OccupationVector::new(v.to_vec())
    }

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn basis_vec(m: usize, k: usize) -> Vec<C64> {
        let mut v = vec![C64::default(); m];
        v[k] = c(1.0);
        v
    }

    #[test]
    fn symmetrize_examples() {
        let raw = RawTensor::product(&[basis_vec(2, 0), basis_vec(2, 1)]).unwrap();
        let t = symmetrize(&raw, Fermionic).unwrap();
        assert_eq!(t.get(&[0, 1]), c(0.5));
        assert_eq!(t.get(&[1, 0]), c(-0.5));

        let raw = RawTensor::product(&[basis_vec(2, 0), basis_vec(2, 0)]).unwrap();
        let t = symmetrize(&raw, Bosonic).unwrap();
        assert_eq!(t.entries(), raw.entries.as_slice());
        let t = symmetrize(&raw, Fermionic).unwrap();
        assert!(t.entries().iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn to_product_tensor_examples() {
        let s = FockState::basis(Fermionic, occ(&[1, 1])).unwrap();
        let t = to_product_tensor(&s).unwrap();
        assert!((t.get(&[0, 1]) - FRAC_1_SQRT_2).norm() < 1e-15);
        assert!((t.get(&[1, 0]) + FRAC_1_SQRT_2).norm() < 1e-15);

        let s = FockState::basis(Bosonic, occ(&[2, 0])).unwrap();
        let t = to_product_tensor(&s).unwrap();
        assert_eq!(t.get(&[0, 0]), c(1.0));
        assert_eq!(t.norm_sqr(), 1.0);

        let s = FockState::basis(Bosonic, occ(&[1, 1])).unwrap();
        let t = to_product_tensor(&s).unwrap();
        assert!((t.get(&[0, 1]) - FRAC_1_SQRT_2).norm() < 1e-15);
        assert!((t.get(&[1, 0]) - FRAC_1_SQRT_2).norm() < 1e-15);
    }

    #[test]
    fn from_product_tensor_examples() {
        for (stats, o) in [(Fermionic, [1, 1]), (Bosonic, [2, 0]), (Bosonic, [1, 1])] {
            let s = FockState::basis(stats, occ(&o)).unwrap();
            let back = from_product_tensor(&to_product_tensor(&s).unwrap()).unwrap();
            assert_eq!(back.configuration_count(1e-12), 1);
            assert!((back.amplitude(&occ(&o)) - c(1.0)).norm() < 1e-15);
        }

        let err = ProductTensor::new(Fermionic, 2, 2, vec![c(0.0), c(1.0), c(0.0), c(0.0)]).unwrap_err();
        assert!(matches!(err, Error::NotSymmetric { .. }));

        let zero = ProductTensor::new(Bosonic, 2, 2, vec![c(0.0); 4]).unwrap();
        assert_eq!(from_product_tensor(&zero).unwrap_err(), Error::ZeroState);
    }

    #[test]
    fn capacity_is_enforced() {
        let s = FockState::basis(Bosonic, OccupationVector::from_indices(40, &[0, 1, 2, 3])).unwrap();
        assert!(matches!(to_product_tensor(&s), Err(Error::CapacityExceeded { .. })));
        assert!(tensor_len(10, 6).is_ok());
        assert!(tensor_len(11, 6).is_err());
    }

    /// Independent route to `g`: build `|k>^(±)` explicitly as a sum over all
    /// `N!` permutations in the product basis and project.
    fn g_by_expansion(state: &FockState, key: &[usize]) -> C64 {
        let q = to_product_tensor(state).unwrap();
        let n = key.len();
        let mut basis = RawTensor::zeros(state.modes(), n as u32).unwrap();
        for (perm, parity) in permutations(n) {
            let tuple: Vec<usize> = perm.iter().map(|&p| key[p]).collect();
            let sign = match state.statistics() {
                Fermionic => parity as f64,
                Bosonic => 1.0,
            };
            basis.entries[flat_index(state.modes(), &tuple)] += c(sign);
        }
        let overlap: C64 = basis.entries.iter().zip(q.entries()).map(|(b, q)| b.conj() * q).sum();
        let norm: f64 = basis.entries.iter().map(|b| b.norm_sqr()).sum();
        overlap / norm
    }

    #[test]
    fn coefficient_flavors() {
        let s = FockState::basis(Fermionic, occ(&[1, 1])).unwrap();
        let h = extract_coefficients(&s, CoefficientFlavor::Normalized);
        assert_eq!(h.get(&[0, 1]), c(1.0));
        let g = extract_coefficients(&s, CoefficientFlavor::Unnormalized);
        assert!((g.get(&[0, 1]) - FRAC_1_SQRT_2).norm() < 1e-15);
        assert!((g.get(&[0, 1]) - g_by_expansion(&s, &[0, 1])).norm() < 1e-15);

        // double occupancy: the expansion oracle gives 1/2
        let s = FockState::basis(Bosonic, occ(&[2, 0])).unwrap();
        let g = extract_coefficients(&s, CoefficientFlavor::Unnormalized);
        let expected = g_by_expansion(&s, &[0, 0]);
        assert!((expected - c(0.5)).norm() < 1e-15);
        assert!((g.get(&[0, 0]) - expected).norm() < 1e-15);

        let s = FockState::new(
            Bosonic,
            3,
            [(occ(&[2, 1, 0]), C64::new(0.3, 0.4)), (occ(&[0, 0, 3]), C64::new(-0.5, 0.1))],
            true,
        )
        .unwrap();
        let g = extract_coefficients(&s, CoefficientFlavor::Unnormalized);
        for key in [vec![0, 0, 1], vec![2, 2, 2]] {
            assert!((g.get(&key) - g_by_expansion(&s, &key)).norm() < 1e-14);
        }
    }
}
