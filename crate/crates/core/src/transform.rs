//! Single-particle basis changes acting on every particle at once.
//!
//! Convention: old creation operators expand in the new ones as
//! `a_i^dag = sum_j U[i][j] b_j^dag`. Row `i` of `U` is therefore the
//! new-basis expansion of old mode `i`, two changes compose as the matrix
//! product `U_1 U_2`, and a completely filled fermionic state picks up
//! `det U`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::{enumerate_basis, FockState, Ladder, OccupationVector, Statistics};
use crate::linalg::{determinant, permanent, CMatrix};

pub const UNITARITY_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct SingleParticleUnitary {
    matrix: CMatrix,
}

impl SingleParticleUnitary {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::IncompatibleStates(format!(
                "unitary must be square and nonempty, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let deviation = unitarity_deviation(&matrix);
        if deviation > UNITARITY_TOLERANCE {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(SingleParticleUnitary { matrix })
    }

    /// Row-major construction, as read from unitary files.
    pub fn from_row_major(modes: usize, entries: &[C64]) -> Result<Self> {
        if entries.len() != modes * modes {
            return Err(Error::IncompatibleStates(format!(
                "{} entries given for a {modes}x{modes} unitary",
                entries.len()
            )));
        }
        SingleParticleUnitary::new(CMatrix::from_row_slice(modes, modes, entries))
    }

    pub fn identity(modes: usize) -> Self {
        SingleParticleUnitary { matrix: CMatrix::identity(modes, modes) }
    }

    pub fn dimension(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn adjoint(&self) -> Self {
        SingleParticleUnitary { matrix: self.matrix.adjoint() }
    }

    /// `self` followed by `next`: applying the result equals applying `self`
    /// and then `next`.
    pub fn compose(&self, next: &SingleParticleUnitary) -> Result<Self> {
        if self.dimension() != next.dimension() {
            return Err(Error::IncompatibleStates(format!(
                "cannot compose {}-mode and {}-mode unitaries",
                self.dimension(),
                next.dimension()
            )));
        }
        Ok(SingleParticleUnitary { matrix: &self.matrix * &next.matrix })
    }

    pub fn unitarity_deviation(&self) -> f64 {
        unitarity_deviation(&self.matrix)
    }
}

fn unitarity_deviation(m: &CMatrix) -> f64 {
    let product = m.adjoint() * m;
    let identity = CMatrix::identity(m.nrows(), m.ncols());
    crate::linalg::max_abs(&(product - identity))
}

/// Discrete Fourier transform on `modes` sites:
/// `U[r][k] = exp(2 pi i r k / M) / sqrt(M)`.
pub fn dft_unitary(modes: usize) -> SingleParticleUnitary {
    let scale = 1.0 / (modes as f64).sqrt();
    let matrix = CMatrix::from_fn(modes, modes, |r, k| {
        let phase = 2.0 * PI * ((r * k) % modes) as f64 / modes as f64;
        C64::from_polar(scale, phase)
    });
    SingleParticleUnitary { matrix }
}

fn check_dimension(state: &FockState, u: &SingleParticleUnitary) -> Result<()> {
    if u.dimension() != state.modes() {
        return Err(Error::IncompatibleStates(format!(
            "{}-mode unitary applied to a {}-mode state",
            u.dimension(),
            state.modes()
        )));
    }
    Ok(())
}

/// `sum_j coeffs[j] b_j^dag |state>`.
fn create_combination(state: &FockState, coeffs: &[C64]) -> Result<FockState> {
    let mut acc = FockState::zero(state.statistics(), state.modes(), state.particles() + 1);
    for (j, &c) in coeffs.iter().enumerate() {
        if c.norm() == 0.0 {
            continue;
        }
        let term = state.apply(&vec![Ladder::create(j)].into())?.scaled(c);
        acc = acc.add(&term)?;
    }
    Ok(acc)
}

/// Re-expresses `state` in the new single-particle basis by expanding every
/// creation operator of every configuration.
pub fn apply_single_particle_unitary(state: &FockState, u: &SingleParticleUnitary) -> Result<FockState> {
    check_dimension(state, u)?;
    let m = u.matrix();
    let mut result = FockState::zero(state.statistics(), state.modes(), state.particles());
    for (occ, &f) in state.iter() {
        let indices = occ.sorted_indices();
        let mut partial = FockState::vacuum(state.statistics(), state.modes());
        // rightmost creation operator acts first
        for &i in indices.iter().rev() {
            let row: Vec<C64> = m.row(i).iter().copied().collect();
            partial = create_combination(&partial, &row)?;
        }
        let scale = f / occ.factorial_product().sqrt();
        result = result.add(&partial.scaled(scale))?;
    }
    Ok(result)
}

/// Same map as [`apply_single_particle_unitary`], computed from minors of
/// `U`: determinants for fermions, permanents divided by
/// `sqrt(prod n! prod m!)` for bosons.
pub fn apply_single_particle_unitary_via_minors(state: &FockState, u: &SingleParticleUnitary) -> Result<FockState> {
    check_dimension(state, u)?;
    let m = u.matrix();
    let targets = enumerate_basis(state.statistics(), state.modes(), state.particles());
    let target_indices: Vec<Vec<usize>> = targets.iter().map(|t| t.sorted_indices()).collect();
    let mut amplitudes: BTreeMap<OccupationVector, C64> = BTreeMap::new();
    for (occ, &f) in state.iter() {
        let rows = occ.sorted_indices();
        for (target, cols) in targets.iter().zip(&target_indices) {
            let minor = CMatrix::from_fn(rows.len(), cols.len(), |a, b| m[(rows[a], cols[b])]);
            let weight = match state.statistics() {
                Statistics::Fermionic => determinant(&minor),
                Statistics::Bosonic => {
                    permanent(&minor) / (occ.factorial_product() * target.factorial_product()).sqrt()
                }
            };
            *amplitudes.entry(target.clone()).or_default() += f * weight;
        }
    }
    Ok(FockState::from_parts(state.statistics(), state.modes(), state.particles(), amplitudes))
}
