//! Half filling and the orbit/spin relabeling.
//!
//! Modes are grouped by orbit; each group lists the spin states of one
//! orbit. When every orbit holds exactly one particle, each occupation
//! vector is relabeled by the spin index occupied in every orbit, giving a
//! register of distinguishable spins. Fermionic amplitudes are first
//! brought to the mode order that lists each orbit's modes contiguously, in
//! orbit order, so the register inherits a well-defined sign.

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::{FockState, OccupationVector, Statistics};
use crate::linalg::CMatrix;
use crate::measures::{von_neumann_entropy, EntropyReport, CONFIGURATION_THRESHOLD};
use crate::rdm::{DensityMatrix, LabelKind};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrbitGrouping {
    orbits: Vec<Vec<usize>>,
}

impl OrbitGrouping {
    pub fn new(orbits: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = std::collections::BTreeSet::new();
        for (o, group) in orbits.iter().enumerate() {
            if group.is_empty() {
                return Err(Error::BadGrouping(format!("orbit {o} has no modes")));
            }
            for &m in group {
                if !seen.insert(m) {
                    return Err(Error::BadGrouping(format!("mode {m} appears in more than one place")));
                }
            }
        }
        Ok(OrbitGrouping { orbits })
    }

    /// Parses `"0,1;2,3"`: semicolon-separated groups of comma-separated modes.
    pub fn parse(text: &str) -> Result<Self> {
        let orbits = text
            .split(';')
            .map(|group| {
                group
                    .split(',')
                    .map(|m| {
                        m.trim()
                            .parse::<usize>()
                            .map_err(|_| Error::BadGrouping(format!("bad mode index {m:?} in {text:?}")))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        OrbitGrouping::new(orbits)
    }

    pub fn orbits(&self) -> &[Vec<usize>] {
        &self.orbits
    }

    pub fn len(&self) -> usize {
        self.orbits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orbits.is_empty()
    }

    fn max_mode(&self) -> Option<usize> {
        self.orbits.iter().flatten().copied().max()
    }

    /// Orbit modes in orbit order, then ungrouped modes ascending.
    fn canonical_order(&self, modes: usize) -> Vec<usize> {
        let mut order: Vec<usize> = self.orbits.iter().flatten().copied().collect();
        let ungrouped: Vec<usize> = (0..modes).filter(|m| !order.contains(m)).collect();
        order.extend(ungrouped);
        order
    }

    /// Union of the modes of the listed orbits.
    pub fn modes_of(&self, orbits: &[usize]) -> Vec<usize> {
        orbits.iter().flat_map(|&o| self.orbits[o].iter().copied()).collect()
    }
}

/// Amplitudes over per-orbit spin assignments `(S_1, ..., S_L)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinRegister {
    pub orbit_labels: Vec<usize>,
    /// Number of spin states of each orbit.
    pub spin_dims: Vec<usize>,
    pub amplitudes: BTreeMap<Vec<usize>, C64>,
}

impl SpinRegister {
    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn amplitude(&self, spins: &[usize]) -> C64 {
        self.amplitudes.get(spins).copied().unwrap_or_default()
    }

    /// Entanglement between the spins of `orbits` (positions in
    /// `orbit_labels`) and the rest of the register.
    pub fn bipartite_entropy(&self, orbits: &[usize]) -> Result<EntropyReport> {
        let l = self.orbit_labels.len();
        if orbits.is_empty() || orbits.len() >= l {
            return Err(Error::BadPartition("orbit subset must be nonempty and proper".into()));
        }
        let mut inside = vec![false; l];
        for &o in orbits {
            if o >= l || inside[o] {
                return Err(Error::BadPartition(format!("bad orbit subset {orbits:?}")));
            }
            inside[o] = true;
        }
        let rest: Vec<usize> = (0..l).filter(|&o| !inside[o]).collect();

        let mut labels: Vec<Vec<usize>> = vec![Vec::new()];
        for &o in orbits {
            labels = labels
                .into_iter()
                .flat_map(|prefix| {
                    (0..self.spin_dims[o]).map(move |s| {
                        let mut next = prefix.clone();
                        next.push(s);
                        next
                    })
                })
                .collect();
        }
        let index: BTreeMap<&[usize], usize> = labels.iter().enumerate().map(|(i, lab)| (lab.as_slice(), i)).collect();

        let mut by_rest: BTreeMap<Vec<usize>, Vec<(usize, C64)>> = BTreeMap::new();
        for (spins, &a) in &self.amplitudes {
            let key: Vec<usize> = orbits.iter().map(|&o| spins[o]).collect();
            let outside: Vec<usize> = rest.iter().map(|&o| spins[o]).collect();
            by_rest.entry(outside).or_default().push((index[key.as_slice()], a));
        }
        let dim = labels.len();
        let mut entries = CMatrix::zeros(dim, dim);
        for group in by_rest.values() {
            for &(i, ai) in group {
                for &(j, aj) in group {
                    entries[(i, j)] += ai.conj() * aj;
                }
            }
        }
        let rho = DensityMatrix { labels, label_kind: LabelKind::SpinPattern, entries, trace_convention: 1.0 };
        let mut report = von_neumann_entropy(&rho)?;
        let names: Vec<String> = orbits.iter().map(|o| self.orbit_labels[*o].to_string()).collect();
        report.partition = format!("orbits {}", names.join(","));
        Ok(report)
    }
}

/// True iff every configuration above threshold puts exactly one particle
/// in each orbit and none elsewhere.
pub fn check_half_filling(state: &FockState, grouping: &OrbitGrouping) -> bool {
    if grouping.max_mode().is_some_and(|m| m >= state.modes()) {
        return false;
    }
    if state.particles() as usize != grouping.len() {
        return false;
    }
    state
        .iter()
        .filter(|(_, a)| a.norm() > CONFIGURATION_THRESHOLD)
        .all(|(occ, _)| grouping.orbits().iter().all(|group| group.iter().map(|&m| occ.get(m)).sum::<u32>() == 1))
}

pub fn to_spin_register(state: &FockState, grouping: &OrbitGrouping) -> Result<SpinRegister> {
    if grouping.max_mode().is_some_and(|m| m >= state.modes()) {
        return Err(Error::BadGrouping(format!("grouping exceeds {} modes", state.modes())));
    }
    if !check_half_filling(state, grouping) {
        return Err(Error::NotHalfFilled);
    }
    let order = grouping.canonical_order(state.modes());
    let ordered = state.permute_modes(&order)?;
    let mut amplitudes = BTreeMap::new();
    for (occ, &a) in ordered.iter() {
        if a.norm() <= CONFIGURATION_THRESHOLD {
            continue;
        }
        let mut offset = 0;
        let mut spins = Vec::with_capacity(grouping.len());
        for group in grouping.orbits() {
            let slot = (0..group.len()).find(|&s| occ.get(offset + s) == 1).expect("half filling checked");
            spins.push(slot);
            offset += group.len();
        }
        amplitudes.insert(spins, a);
    }
    Ok(SpinRegister {
        orbit_labels: (0..grouping.len()).collect(),
        spin_dims: grouping.orbits().iter().map(Vec::len).collect(),
        amplitudes,
    })
}

/// Inverse of [`to_spin_register`].
pub fn from_spin_register(
    register: &SpinRegister,
    grouping: &OrbitGrouping,
    statistics: Statistics,
    modes: usize,
) -> Result<FockState> {
    if grouping.max_mode().is_some_and(|m| m >= modes) {
        return Err(Error::BadGrouping(format!("grouping exceeds {modes} modes")));
    }
    let order = grouping.canonical_order(modes);
    let mut terms = Vec::with_capacity(register.amplitudes.len());
    for (spins, &a) in &register.amplitudes {
        let mut occ = vec![0u32; modes];
        let mut offset = 0;
        for (group, &s) in grouping.orbits().iter().zip(spins) {
            if s >= group.len() {
                return Err(Error::BadGrouping(format!("spin index {s} out of range")));
            }
            occ[offset + s] = 1;
            offset += group.len();
        }
        terms.push((OccupationVector::new(occ), a));
    }
    let ordered = FockState::new(statistics, modes, terms, false)?;
    let mut position = vec![0; modes];
    for (p, &m) in order.iter().enumerate() {
        position[m] = p;
    }
    ordered.permute_modes(&position)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DoubleDotState {
    Singlet,
    Triplet0,
    ProductUpDown,
    DoubleOccupiedDot1,
}

/// Two electrons on modes ordered `(1 up, 1 down, 2 up, 2 down)`.
pub fn build_double_dot_state(kind: DoubleDotState) -> FockState {
    let up1_down2 = OccupationVector::new(vec![1, 0, 0, 1]);
    let down1_up2 = OccupationVector::new(vec![0, 1, 1, 0]);
    let one = C64::new(1.0, 0.0);
    let terms = match kind {
        DoubleDotState::Singlet => vec![(up1_down2, one), (down1_up2, -one)],
        DoubleDotState::Triplet0 => vec![(up1_down2, one), (down1_up2, one)],
        DoubleDotState::ProductUpDown => vec![(up1_down2, one)],
        DoubleDotState::DoubleOccupiedDot1 => vec![(OccupationVector::new(vec![1, 1, 0, 0]), one)],
    };
    FockState::new(Statistics::Fermionic, 4, terms, true).expect("fixed double-dot states are valid")
}

/// `{0,1}` and `{2,3}`: the two dots.
pub fn double_dot_grouping() -> OrbitGrouping {
    OrbitGrouping::new(vec![vec![0, 1], vec![2, 3]]).expect("static grouping")
}
