//! Occupation-number representation of fixed-particle-number states.
//!
//! A basis state `|n_0, ..., n_{M-1}>` is
//! `(a_0^dag)^{n_0} ... (a_{M-1}^dag)^{n_{M-1}} |0>`, with each bosonic
//! `n`-fold factor divided by `sqrt(n!)` so that basis states are unit
//! norm. The operator acting on mode `M-1` is applied first. Every fermionic
//! sign in the crate follows from this ordering: acting on mode `j` picks up
//! `(-1)^(number of occupied modes below j)`.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Amplitudes below this modulus are dropped after arithmetic.
pub const PRUNE_TOLERANCE: f64 = 1e-14;
/// Tolerance on `|<psi|psi> - 1|` for a state to count as normalized.
pub const NORM_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Statistics {
    Fermionic,
    Bosonic,
}

impl Statistics {
    /// `+1` for bosons, `-1` for fermions: the sign picked up under a
    /// transposition of two particles.
    pub fn exchange_sign(self) -> f64 {
        match self {
            Statistics::Fermionic => -1.0,
            Statistics::Bosonic => 1.0,
        }
    }

    /// Largest occupation a single mode may hold with `particles` particles.
    pub fn max_occupation(self, particles: u32) -> u32 {
        match self {
            Statistics::Fermionic => particles.min(1),
            Statistics::Bosonic => particles,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Statistics::Fermionic => "fermionic",
            Statistics::Bosonic => "bosonic",
        }
    }
}

impl fmt::Display for Statistics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Occupation numbers of every mode, ordered by mode index.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OccupationVector(Vec<u32>);

impl OccupationVector {
    pub fn new(occ: Vec<u32>) -> Self {
        OccupationVector(occ)
    }

    pub fn vacuum(modes: usize) -> Self {
        OccupationVector(vec![0; modes])
    }

    /// Builds the occupation vector of a multiset of mode indices.
    pub fn from_indices(modes: usize, indices: &[usize]) -> Self {
        let mut occ = vec![0; modes];
        for &k in indices {
            occ[k] += 1;
        }
        OccupationVector(occ)
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn modes(&self) -> usize {
        self.0.len()
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn get(&self, mode: usize) -> u32 {
        self.0[mode]
    }

    /// The occupied modes as a sorted multiset, e.g. `(2,0,1)` -> `[0,0,2]`.
    pub fn sorted_indices(&self) -> Vec<usize> {
        self.0.iter().enumerate().flat_map(|(k, &n)| std::iter::repeat_n(k, n as usize)).collect()
    }

    /// `prod_k n_k!`
    pub fn factorial_product(&self) -> f64 {
        self.0.iter().map(|&n| crate::linalg::factorial(n)).product()
    }

    fn occupied_below(&self, mode: usize) -> u32 {
        self.0[..mode].iter().sum()
    }
}

impl fmt::Display for OccupationVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|")?;
        for (k, n) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{n}")?;
        }
        write!(f, ">")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Action {
    Create,
    Annihilate,
}

/// One ladder operator acting on one mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Ladder {
    pub action: Action,
    pub mode: usize,
}

impl Ladder {
    pub fn create(mode: usize) -> Self {
        Ladder { action: Action::Create, mode }
    }

    pub fn annihilate(mode: usize) -> Self {
        Ladder { action: Action::Annihilate, mode }
    }

    pub fn adjoint(self) -> Self {
        let action = match self.action {
            Action::Create => Action::Annihilate,
            Action::Annihilate => Action::Create,
        };
        Ladder { action, mode: self.mode }
    }

    /// Acts on a single basis vector in place, returning the scalar factor,
    /// or `None` when the result vanishes.
    fn act(self, statistics: Statistics, occ: &mut OccupationVector) -> Option<f64> {
        let n = occ.0[self.mode];
        let magnitude = match (statistics, self.action) {
            (Statistics::Fermionic, Action::Create) if n >= 1 => return None,
            (_, Action::Annihilate) if n == 0 => return None,
            (Statistics::Fermionic, _) => 1.0,
            (Statistics::Bosonic, Action::Create) => ((n + 1) as f64).sqrt(),
            (Statistics::Bosonic, Action::Annihilate) => (n as f64).sqrt(),
        };
        let sign = match statistics {
            Statistics::Fermionic if occ.occupied_below(self.mode) % 2 == 1 => -1.0,
            _ => 1.0,
        };
        match self.action {
            Action::Create => occ.0[self.mode] += 1,
            Action::Annihilate => occ.0[self.mode] -= 1,
        }
        Some(sign * magnitude)
    }
}

/// A product of ladder operators written left to right; the rightmost
/// factor acts first.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OperatorString {
    factors: Vec<Ladder>,
}

impl OperatorString {
    pub fn new(factors: Vec<Ladder>) -> Self {
        OperatorString { factors }
    }

    pub fn factors(&self) -> &[Ladder] {
        &self.factors
    }

    /// Hermitian conjugate: reversed order, every factor adjointed.
    pub fn adjoint(&self) -> Self {
        OperatorString { factors: self.factors.iter().rev().map(|l| l.adjoint()).collect() }
    }

    /// Change in particle number produced by the string.
    pub fn particle_shift(&self) -> i64 {
        self.factors
            .iter()
            .map(|l| match l.action {
                Action::Create => 1,
                Action::Annihilate => -1,
            })
            .sum()
    }
}

impl From<Vec<Ladder>> for OperatorString {
    fn from(factors: Vec<Ladder>) -> Self {
        OperatorString::new(factors)
    }
}

/// A pure state of fixed particle number, stored sparsely over occupation
/// vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct FockState {
    statistics: Statistics,
    modes: usize,
    particles: u32,
    amplitudes: BTreeMap<OccupationVector, C64>,
}

impl FockState {
    /// Validates and assembles a state from `(occupation, amplitude)` terms.
    ///
    /// Duplicate occupation vectors are merged by summing. Errors carry the
    /// zero-based index of the offending term.
    pub fn new<I>(statistics: Statistics, modes: usize, terms: I, normalize: bool) -> Result<Self>
    where
        I: IntoIterator<Item = (OccupationVector, C64)>,
    {
        if modes == 0 {
            return Err(Error::IncompatibleStates("a state needs at least one mode".into()));
        }
        let mut particles = None;
        let mut amplitudes: BTreeMap<OccupationVector, C64> = BTreeMap::new();
        for (term, (occ, amp)) in terms.into_iter().enumerate() {
            if occ.modes() != modes {
                return Err(Error::ModeCountMismatch { term, expected: modes, found: occ.modes() });
            }
            if statistics == Statistics::Fermionic {
                if let Some((mode, &count)) = occ.0.iter().enumerate().find(|(_, &n)| n > 1) {
                    return Err(Error::PauliViolation { term, mode, count });
                }
            }
            let total = occ.total();
            match particles {
                None => particles = Some(total),
                Some(expected) if expected != total => {
                    return Err(Error::MixedParticleNumber { term, expected, found: total });
                }
                _ => {}
            }
            *amplitudes.entry(occ).or_default() += amp;
        }
        let particles = particles.ok_or(Error::ZeroState)?;
        let mut state = FockState { statistics, modes, particles, amplitudes };
        state.prune();
        if normalize {
            let norm = state.norm_sqr().sqrt();
            if norm <= PRUNE_TOLERANCE {
                return Err(Error::ZeroState);
            }
            state = state.scaled(C64::from(1.0 / norm));
        }
        Ok(state)
    }

    /// The unit-amplitude basis state for `occ`.
    pub fn basis(statistics: Statistics, occ: OccupationVector) -> Result<Self> {
        let modes = occ.modes();
        FockState::new(statistics, modes, [(occ, C64::new(1.0, 0.0))], false)
    }

    pub fn vacuum(statistics: Statistics, modes: usize) -> Self {
        let mut amplitudes = BTreeMap::new();
        amplitudes.insert(OccupationVector::vacuum(modes), C64::new(1.0, 0.0));
        FockState { statistics, modes, particles: 0, amplitudes }
    }

    /// The zero vector of the given shape.
    pub fn zero(statistics: Statistics, modes: usize, particles: u32) -> Self {
        FockState { statistics, modes, particles, amplitudes: BTreeMap::new() }
    }

    /// Assembles a state from amplitudes already known to be valid.
    pub(crate) fn from_parts(
        statistics: Statistics,
        modes: usize,
        particles: u32,
        amplitudes: BTreeMap<OccupationVector, C64>,
    ) -> Self {
        let mut state = FockState { statistics, modes, particles, amplitudes };
        state.prune();
        state
    }

    fn prune(&mut self) {
        self.amplitudes.retain(|_, a| a.norm() >= PRUNE_TOLERANCE);
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

    pub fn amplitude(&self, occ: &OccupationVector) -> C64 {
        self.amplitudes.get(occ).copied().unwrap_or_default()
    }

    /// Nonzero amplitudes in lexicographic order of occupation vectors.
    pub fn iter(&self) -> impl Iterator<Item = (&OccupationVector, &C64)> {
        self.amplitudes.iter()
    }

    pub fn amplitudes(&self) -> &BTreeMap<OccupationVector, C64> {
        &self.amplitudes
    }

    pub fn is_zero(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= NORM_TOLERANCE
    }

    pub fn scaled(&self, factor: C64) -> Self {
        let amplitudes = self.amplitudes.iter().map(|(k, &a)| (k.clone(), a * factor)).collect();
        FockState::from_parts(self.statistics, self.modes, self.particles, amplitudes)
    }

    /// Number of occupation vectors whose amplitude modulus exceeds
    /// `threshold`.
    pub fn configuration_count(&self, threshold: f64) -> usize {
        self.amplitudes.values().filter(|a| a.norm() > threshold).count()
    }

    /// Applies an operator string exactly; the result is generally
    /// unnormalized and may be the zero state.
    pub fn apply(&self, ops: &OperatorString) -> Result<FockState> {
        for l in ops.factors() {
            if l.mode >= self.modes {
                return Err(Error::ModeOutOfRange { mode: l.mode, modes: self.modes });
            }
        }
        let shifted = self.particles as i64 + ops.particle_shift();
        let particles = shifted.max(0) as u32;
        let mut out: BTreeMap<OccupationVector, C64> = BTreeMap::new();
        if shifted >= 0 {
            'terms: for (occ, &amp) in &self.amplitudes {
                let mut occ = occ.clone();
                let mut factor = 1.0;
                for l in ops.factors().iter().rev() {
                    match l.act(self.statistics, &mut occ) {
                        Some(f) => factor *= f,
                        None => continue 'terms,
                    }
                }
                *out.entry(occ).or_default() += amp * factor;
            }
        }
        Ok(FockState::from_parts(self.statistics, self.modes, particles, out))
    }

    /// `self + other` for states of identical shape.
    pub fn add(&self, other: &FockState) -> Result<FockState> {
        check_compatible(self, other)?;
        let mut amplitudes = self.amplitudes.clone();
        for (occ, &a) in &other.amplitudes {
            *amplitudes.entry(occ.clone()).or_default() += a;
        }
        Ok(FockState::from_parts(self.statistics, self.modes, self.particles, amplitudes))
    }

    /// Relabels modes so that new mode `p` is old mode `order[p]`.
    ///
    /// For fermions every amplitude picks up the parity of reordering its
    /// creation operators into the new ascending order, so the physical
    /// state is unchanged.
    pub fn permute_modes(&self, order: &[usize]) -> Result<FockState> {
        let mut seen = vec![false; self.modes];
        if order.len() != self.modes {
            return Err(Error::BadPartition(format!(
                "mode order has {} entries for {} modes",
                order.len(),
                self.modes
            )));
        }
        for &m in order {
            if m >= self.modes || seen[m] {
                return Err(Error::BadPartition(format!("mode order {order:?} is not a permutation")));
            }
            seen[m] = true;
        }
        let mut position = vec![0; self.modes];
        for (p, &m) in order.iter().enumerate() {
            position[m] = p;
        }
        let mut out = BTreeMap::new();
        for (occ, &amp) in &self.amplitudes {
            let relabeled = OccupationVector(order.iter().map(|&m| occ.0[m]).collect());
            let sign = match self.statistics {
                Statistics::Fermionic => {
                    let seq: Vec<usize> = (0..self.modes).filter(|&m| occ.0[m] == 1).map(|m| position[m]).collect();
                    crate::linalg::permutation_parity(&seq) as f64
                }
                Statistics::Bosonic => 1.0,
            };
            out.insert(relabeled, amp * sign);
        }
        Ok(FockState::from_parts(self.statistics, self.modes, self.particles, out))
    }
}

pub(crate) fn check_compatible(a: &FockState, b: &FockState) -> Result<()> {
    if a.statistics != b.statistics {
        return Err(Error::IncompatibleStates(format!("statistics differ ({} vs {})", a.statistics, b.statistics)));
    }
    if a.modes != b.modes {
        return Err(Error::IncompatibleStates(format!("mode counts differ ({} vs {})", a.modes, b.modes)));
    }
    if a.particles != b.particles {
        return Err(Error::IncompatibleStates(format!("particle numbers differ ({} vs {})", a.particles, b.particles)));
    }
    Ok(())
}

/// `<a|b>`, conjugate-linear in `a`.
pub fn inner_product(a: &FockState, b: &FockState) -> Result<C64> {
    check_compatible(a, b)?;
    Ok(a.amplitudes.iter().filter_map(|(occ, x)| b.amplitudes.get(occ).map(|y| x.conj() * y)).sum())
}

/// All occupation vectors of `particles` particles in `modes` modes, in
/// ascending lexicographic order. Empty when fermions cannot fit.
pub fn enumerate_basis(statistics: Statistics, modes: usize, particles: u32) -> Vec<OccupationVector> {
    fn fill(cap: u32, remaining: u32, prefix: &mut Vec<u32>, left: usize, out: &mut Vec<OccupationVector>) {
        if left == 0 {
            if remaining == 0 {
                out.push(OccupationVector(prefix.clone()));
            }
            return;
        }
        if remaining as u64 > cap as u64 * left as u64 {
            return;
        }
        for n in 0..=cap.min(remaining) {
            prefix.push(n);
            fill(cap, remaining - n, prefix, left - 1, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if modes == 0 {
        return out;
    }
    let cap = match statistics {
        Statistics::Fermionic => 1,
        Statistics::Bosonic => particles,
    };
    fill(cap, particles, &mut Vec::with_capacity(modes), modes, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::binomial;
    use Statistics::*;

    fn occ(v: &[u32]) -> OccupationVector {
        OccupationVector::new(v.to_vec())
    }

    fn one() -> C64 {
        C64::new(1.0, 0.0)
    }

    #[test]
    fn construction_examples() {
        let s = FockState::new(Fermionic, 2, [(occ(&[1, 1]), one())], false).unwrap();
        assert_eq!(s.particles(), 2);

        let err = FockState::new(Fermionic, 2, [(occ(&[2, 0]), one())], false).unwrap_err();
        assert!(matches!(err, Error::PauliViolation { term: 0, mode: 0, count: 2 }));

        let s = FockState::new(Bosonic, 2, [(occ(&[2, 0]), one()), (occ(&[0, 2]), one())], true).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((s.amplitude(&occ(&[2, 0])) - h).norm() < 1e-15);
        assert!((s.amplitude(&occ(&[0, 2])) - h).norm() < 1e-15);
    }

    #[test]
    fn construction_errors() {
        let err =
            FockState::new(Bosonic, 2, [(occ(&[1, 0]), one()), (occ(&[0, 1]), one()), (occ(&[1, 1]), one())], false)
                .unwrap_err();
        assert_eq!(err, Error::MixedParticleNumber { term: 2, expected: 1, found: 2 });

        let err = FockState::new(Bosonic, 2, [(occ(&[1, 0]), one()), (occ(&[1, 0]), -one())], true).unwrap_err();
        assert_eq!(err, Error::ZeroState);

        let err = FockState::new(Bosonic, 3, [(occ(&[1, 0]), one())], false).unwrap_err();
        assert!(matches!(err, Error::ModeCountMismatch { .. }));
    }

    #[test]
    fn duplicates_merge() {
        let s = FockState::new(Bosonic, 2, [(occ(&[1, 0]), one()), (occ(&[1, 0]), one())], false).unwrap();
        assert_eq!(s.amplitude(&occ(&[1, 0])), C64::new(2.0, 0.0));
        assert_eq!(s.configuration_count(1e-10), 1);
    }

    #[test]
    fn operator_string_ordering() {
        let vac = FockState::vacuum(Fermionic, 2);
        // a_0^dag a_1^dag |0> is the canonical |1,1>
        let canonical = vac.apply(&vec![Ladder::create(0), Ladder::create(1)].into()).unwrap();
        assert_eq!(canonical.amplitude(&occ(&[1, 1])), one());
        let swapped = vac.apply(&vec![Ladder::create(1), Ladder::create(0)].into()).unwrap();
        assert_eq!(swapped.amplitude(&occ(&[1, 1])), -one());

        let vac = FockState::vacuum(Bosonic, 1);
        let two = vac.apply(&vec![Ladder::create(0), Ladder::create(0)].into()).unwrap();
        assert!((two.amplitude(&occ(&[2])) - 2f64.sqrt()).norm() < 1e-15);
    }

    #[test]
    fn annihilate_empty_is_zero() {
        let s = FockState::basis(Fermionic, occ(&[0, 1])).unwrap();
        let r = s.apply(&vec![Ladder::annihilate(0)].into()).unwrap();
        assert!(r.is_zero());
        let r = s.apply(&vec![Ladder::annihilate(0), Ladder::annihilate(1)].into()).unwrap();
        assert!(r.is_zero());
        assert!(s.apply(&vec![Ladder::create(5)].into()).is_err());
    }

    #[test]
    fn inner_products() {
        let a = FockState::basis(Fermionic, occ(&[1, 1])).unwrap();
        assert_eq!(inner_product(&a, &a).unwrap(), one());
        let b = FockState::basis(Bosonic, occ(&[1, 1])).unwrap();
        let c = FockState::basis(Bosonic, occ(&[0, 2])).unwrap();
        assert_eq!(inner_product(&b, &c).unwrap(), C64::new(0.0, 0.0));
        let d = FockState::new(Bosonic, 2, [(occ(&[2, 0]), one()), (occ(&[0, 2]), one())], true).unwrap();
        assert!((inner_product(&d, &d).unwrap() - one()).norm() < 1e-15);
        assert!(inner_product(&a, &b).is_err());
    }

    #[test]
    fn basis_enumeration() {
        assert_eq!(enumerate_basis(Fermionic, 4, 2).len(), 6);
        assert_eq!(enumerate_basis(Bosonic, 2, 2), vec![occ(&[0, 2]), occ(&[1, 1]), occ(&[2, 0])]);
        assert!(enumerate_basis(Fermionic, 2, 3).is_empty());
        for m in 1..=8usize {
            for n in 0..=4u32 {
                assert_eq!(enumerate_basis(Fermionic, m, n).len() as u64, binomial(m as u64, n as u64));
                assert_eq!(enumerate_basis(Bosonic, m, n).len() as u64, binomial((m as u64) + n as u64 - 1, n as u64));
            }
        }
    }

    #[test]
    fn permute_modes_is_physical_relabeling() {
        // a_0^dag a_2^dag |0>, relabel new order (2,1,0): becomes a'_2^dag a'_0^dag = -|1,0,1>'
        let s = FockState::basis(Fermionic, occ(&[1, 0, 1])).unwrap();
        let p = s.permute_modes(&[2, 1, 0]).unwrap();
        assert_eq!(p.amplitude(&occ(&[1, 0, 1])), -one());
        let p = s.permute_modes(&[0, 2, 1]).unwrap();
        assert_eq!(p.amplitude(&occ(&[1, 1, 0])), one());
        assert!(s.permute_modes(&[0, 0, 1]).is_err());
    }
}
