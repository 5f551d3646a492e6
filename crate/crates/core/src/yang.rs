//! Canonical forms of two-particle states.
//!
//! A two-particle state is written `|psi> = sum_ij w[i][j] a_i^dag a_j^dag |0>`
//! with `w` antisymmetric (fermions) or symmetric (bosons). Under a basis
//! change `a_i^dag = sum_j U[i][j] b_j^dag` the matrix transforms by
//! congruence, `w -> U^T w U`. The canonical forms are
//!
//! * fermions (Yang): `U^T w U = diag([[0, c_1], [-c_1, 0]], ..., 0)`
//! * bosons (Takagi): `U^T w U = diag(d_1, d_2, ...)`
//!
//! with real `c_r, d_r >= 0` sorted descending.
//!
//! Both are built from eigenvectors `x` of the Hermitian matrix `w^dag w`
//! together with the antilinear partner map `x -> conj(w x) / |w x|`, which
//! squares to `-1` for antisymmetric `w` (so vectors pair up into blocks) and
//! to `+1` for symmetric `w` (so every eigenspace has a basis of fixed
//! points `w u = d conj(u)`).

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::{FockState, OccupationVector, Statistics};
use crate::linalg::{canonicalize_phase, hermitian_eigen, max_abs, CMatrix, CVector};
use crate::rdm::{n_particle_rdm, DensityMatrix};
use crate::transform::{apply_single_particle_unitary, SingleParticleUnitary};

/// Canonical values at or below this are treated as zero.
pub const VALUE_THRESHOLD: f64 = 1e-10;
const SYMMETRY_TOLERANCE: f64 = 1e-10;
/// Relative eigenvalue gap below which eigenvectors of `w^dag w` are
/// treated as one degenerate subspace.
const CLUSTER_TOLERANCE: f64 = 1e-8;
/// Canonical values closer than this (relative) count as ties.
const TIE_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientMatrix {
    statistics: Statistics,
    entries: CMatrix,
}

impl CoefficientMatrix {
    pub fn new(statistics: Statistics, entries: CMatrix) -> Result<Self> {
        if !entries.is_square() || entries.nrows() == 0 {
            return Err(Error::IncompatibleStates("coefficient matrix must be square".into()));
        }
        let violation = symmetry_violation(statistics, &entries);
        if violation > SYMMETRY_TOLERANCE {
            return Err(match statistics {
                Statistics::Fermionic => Error::NotAntisymmetric { violation },
                Statistics::Bosonic => Error::NotSymmetric { violation },
            });
        }
        Ok(CoefficientMatrix { statistics, entries })
    }

    pub fn statistics(&self) -> Statistics {
        self.statistics
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn modes(&self) -> usize {
        self.entries.nrows()
    }

    /// The state `sum_ij w[i][j] a_i^dag a_j^dag |0>`, not renormalized.
    pub fn to_state(&self) -> Result<FockState> {
        let m = self.modes();
        let w = &self.entries;
        let mut terms = Vec::new();
        for i in 0..m {
            for j in i..m {
                let amp = match self.statistics {
                    Statistics::Fermionic if i == j => continue,
                    Statistics::Fermionic => w[(i, j)] - w[(j, i)],
                    Statistics::Bosonic if i == j => w[(i, i)] * 2f64.sqrt(),
                    Statistics::Bosonic => w[(i, j)] + w[(j, i)],
                };
                terms.push((OccupationVector::from_indices(m, &[i, j]), amp));
            }
        }
        FockState::new(self.statistics, m, terms, false)
    }
}

fn symmetry_violation(statistics: Statistics, w: &CMatrix) -> f64 {
    let sign = statistics.exchange_sign();
    let mut worst = 0.0_f64;
    for i in 0..w.nrows() {
        for j in 0..w.ncols() {
            worst = worst.max((w[(i, j)] - w[(j, i)] * sign).norm());
        }
    }
    worst
}

/// The (anti)symmetric `w` of a two-particle state.
pub fn coefficient_matrix(state: &FockState) -> Result<CoefficientMatrix> {
    if state.particles() != 2 {
        return Err(Error::NotTwoParticle { particles: state.particles() });
    }
    let m = state.modes();
    let mut w = CMatrix::zeros(m, m);
    for (occ, &f) in state.iter() {
        let idx = occ.sorted_indices();
        let (i, j) = (idx[0], idx[1]);
        match state.statistics() {
            Statistics::Fermionic => {
                w[(i, j)] = f * 0.5;
                w[(j, i)] = -f * 0.5;
            }
            Statistics::Bosonic if i == j => w[(i, i)] = f / 2f64.sqrt(),
            Statistics::Bosonic => {
                w[(i, j)] = f * 0.5;
                w[(j, i)] = f * 0.5;
            }
        }
    }
    Ok(CoefficientMatrix { statistics: state.statistics(), entries: w })
}

/// A single-particle basis change that brings `w` to canonical form.
#[derive(Clone, Debug, PartialEq)]
pub struct YangForm {
    pub statistics: Statistics,
    pub basis_change: SingleParticleUnitary,
    /// Pair values `c_r` (fermions, `floor(M/2)` of them) or Takagi values
    /// `d_r` (bosons, `M` of them), descending.
    pub values: Vec<f64>,
    /// Number of values above [`VALUE_THRESHOLD`].
    pub rank: usize,
}

impl YangForm {
    pub fn modes(&self) -> usize {
        self.basis_change.dimension()
    }

    pub fn canonical_matrix(&self) -> CMatrix {
        let m = self.modes();
        let mut out = CMatrix::zeros(m, m);
        for (r, &v) in self.values.iter().enumerate() {
            match self.statistics {
                Statistics::Fermionic => {
                    out[(2 * r, 2 * r + 1)] = C64::from(v);
                    out[(2 * r + 1, 2 * r)] = C64::from(-v);
                }
                Statistics::Bosonic => out[(r, r)] = C64::from(v),
            }
        }
        out
    }

    /// Amplitudes of the canonical configurations in the new basis:
    /// `2 c_r` on `b_{2r}^dag b_{2r+1}^dag |0>`, `sqrt(2) d_r` on `|2_r>`.
    pub fn block_weights(&self) -> Vec<f64> {
        let factor = match self.statistics {
            Statistics::Fermionic => 2.0,
            Statistics::Bosonic => 2f64.sqrt(),
        };
        self.values.iter().map(|v| v * factor).collect()
    }

    /// `max |U^T w U - canonical|`.
    pub fn reconstruction_residual(&self, w: &CoefficientMatrix) -> f64 {
        let u = self.basis_change.matrix();
        let transformed = u.transpose() * w.entries() * u;
        max_abs(&(transformed - self.canonical_matrix()))
    }
}

struct Block {
    columns: Vec<CVector>,
    value: f64,
}

impl Block {
    fn first_mode(&self) -> usize {
        self.columns
            .iter()
            .filter_map(|col| col.iter().position(|z| z.norm() > VALUE_THRESHOLD))
            .min()
            .unwrap_or(usize::MAX)
    }
}

fn orthogonalize(v: &mut CVector, against: &[CVector]) {
    // two passes of classical Gram-Schmidt
    for _ in 0..2 {
        for u in against {
            let proj = u.dotc(v);
            *v -= u * proj;
        }
    }
}

fn normalized(mut v: CVector) -> Option<CVector> {
    let norm = v.norm();
    if norm <= 1e-300 {
        return None;
    }
    v /= C64::from(norm);
    Some(v)
}

/// Makes the first significant component have positive real part (or
/// positive imaginary part when the real part vanishes).
fn canonicalize_sign(v: &mut CVector) {
    if let Some(z) = v.iter().find(|z| z.norm() > VALUE_THRESHOLD).copied() {
        let flip = if z.re.abs() > VALUE_THRESHOLD { z.re < 0.0 } else { z.im < 0.0 };
        if flip {
            *v = -v.clone();
        }
    }
}

pub fn yang_decompose(matrix: &CoefficientMatrix) -> Result<YangForm> {
    let violation = symmetry_violation(matrix.statistics, &matrix.entries);
    if violation > SYMMETRY_TOLERANCE {
        return Err(match matrix.statistics {
            Statistics::Fermionic => Error::NotAntisymmetric { violation },
            Statistics::Bosonic => Error::NotSymmetric { violation },
        });
    }
    let a = matrix.entries();
    let n = a.nrows();
    let eig = hermitian_eigen(&(a.adjoint() * a));
    let scale = eig.values.first().copied().unwrap_or(0.0).max(f64::MIN_POSITIVE);

    let mut chosen: Vec<CVector> = Vec::with_capacity(n);
    let mut blocks: Vec<Block> = Vec::new();
    let mut start = 0;
    'clusters: while start < n {
        let mut end = start + 1;
        while end < n && eig.values[end - 1] - eig.values[end] <= CLUSTER_TOLERANCE * scale {
            end += 1;
        }
        let cluster: Vec<CVector> = (start..end).map(|k| eig.vectors.column(k).into_owned()).collect();
        start = end;
        loop {
            // the cluster vector least covered by what is already chosen
            let best = cluster
                .iter()
                .map(|v| {
                    let mut r = v.clone();
                    orthogonalize(&mut r, &chosen);
                    r
                })
                .max_by(|x, y| x.norm().total_cmp(&y.norm()));
            let Some(residual) = best.filter(|r| r.norm() > 1e-3) else { break };
            let mut x = normalized(residual).expect("residual norm checked above");
            let ax = a * &x;
            let c = ax.norm();
            if c <= VALUE_THRESHOLD {
                break 'clusters;
            }
            match matrix.statistics {
                Statistics::Fermionic => {
                    canonicalize_phase(&mut x, VALUE_THRESHOLD);
                    let ax = a * &x;
                    let mut z = -ax.conjugate() / C64::from(ax.norm());
                    let mut basis = chosen.clone();
                    basis.push(x.clone());
                    orthogonalize(&mut z, &basis);
                    let z =
                        normalized(z).ok_or_else(|| Error::DecompositionFailed("partner vector vanished".into()))?;
                    let value = (x.transpose() * a * &z)[(0, 0)].re;
                    chosen.push(x.clone());
                    chosen.push(z.clone());
                    blocks.push(Block { columns: vec![x, z], value });
                }
                Statistics::Bosonic => {
                    let partner = ax.conjugate() / C64::from(c);
                    let plus = &x + &partner;
                    let minus = (&x - &partner) * C64::new(0.0, 1.0);
                    let mut u = if plus.norm() >= minus.norm() { plus } else { minus };
                    orthogonalize(&mut u, &chosen);
                    let mut u = normalized(u)
                        .ok_or_else(|| Error::DecompositionFailed("fixed point vector vanished".into()))?;
                    canonicalize_sign(&mut u);
                    let value = (u.transpose() * a * &u)[(0, 0)].re;
                    chosen.push(u.clone());
                    blocks.push(Block { columns: vec![u], value });
                }
            }
        }
    }

    // descending values; ties ordered by smallest participating mode
    blocks.sort_by(|p, q| q.value.total_cmp(&p.value));
    let mut i = 0;
    while i < blocks.len() {
        let mut j = i + 1;
        while j < blocks.len() && blocks[j - 1].value - blocks[j].value <= TIE_TOLERANCE * blocks[i].value.max(1.0) {
            j += 1;
        }
        blocks[i..j].sort_by_key(|b| b.first_mode());
        i = j;
    }

    let mut columns: Vec<CVector> = blocks.iter().flat_map(|b| b.columns.iter().cloned()).collect();
    let mut values: Vec<f64> = blocks.iter().map(|b| b.value).collect();
    let rank = values.len();

    // orthonormal completion of the null space from standard basis vectors
    while columns.len() < n {
        let best = (0..n)
            .map(|k| {
                let mut e = CVector::zeros(n);
                e[k] = C64::new(1.0, 0.0);
                orthogonalize(&mut e, &columns);
                e
            })
            .max_by(|x, y| x.norm().total_cmp(&y.norm()))
            .expect("n > 0");
        let mut v =
            normalized(best).ok_or_else(|| Error::DecompositionFailed("null space completion failed".into()))?;
        canonicalize_phase(&mut v, VALUE_THRESHOLD);
        columns.push(v);
    }
    let padded = match matrix.statistics {
        Statistics::Fermionic => n / 2,
        Statistics::Bosonic => n,
    };
    values.resize(padded, 0.0);

    let u = CMatrix::from_columns(&columns);
    let basis_change = SingleParticleUnitary::new(u)
        .map_err(|e| Error::DecompositionFailed(format!("basis change not unitary: {e}")))?;
    Ok(YangForm { statistics: matrix.statistics, basis_change, values, rank })
}

/// `rho^(1)` of a two-particle state after moving to its canonical basis.
pub fn rho1_in_yang_basis(state: &FockState) -> Result<DensityMatrix> {
    let form = yang_decompose(&coefficient_matrix(state)?)?;
    let moved = apply_single_particle_unitary(state, &form.basis_change)?;
    n_particle_rdm(&moved, 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::inner_product;
    use Statistics::*;

    fn occ(v: &[u32]) -> OccupationVector {
        OccupationVector::new(v.to_vec())
    }

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    /// Oracle for `w`: expand `sum w_ij a_i^dag a_j^dag |0>` with operator
    /// strings and compare with the state.
    fn expand(w: &CoefficientMatrix) -> FockState {
        let m = w.modes();
        let mut acc = FockState::zero(w.statistics(), m, 2);
        let vac = FockState::vacuum(w.statistics(), m);
        for i in 0..m {
            for j in 0..m {
                let ops = vec![crate::fock::Ladder::create(i), crate::fock::Ladder::create(j)];
                let term = vac.apply(&ops.into()).unwrap().scaled(w.entries()[(i, j)]);
                acc = acc.add(&term).unwrap();
            }
        }
        acc
    }

    #[test]
    fn coefficient_matrix_examples() {
        let s = FockState::basis(Fermionic, occ(&[1, 1, 0, 0])).unwrap();
        let w = coefficient_matrix(&s).unwrap();
        assert_eq!(w.entries()[(0, 1)], c(0.5));
        assert_eq!(w.entries()[(1, 0)], c(-0.5));
        assert!((inner_product(&expand(&w), &s).unwrap() - c(1.0)).norm() < 1e-15);

        let s = FockState::basis(Bosonic, occ(&[2, 0])).unwrap();
        let w = coefficient_matrix(&s).unwrap();
        assert!((w.entries()[(0, 0)] - c(std::f64::consts::FRAC_1_SQRT_2)).norm() < 1e-15);
        assert!((inner_product(&expand(&w), &s).unwrap() - c(1.0)).norm() < 1e-15);

        let s = FockState::basis(Bosonic, occ(&[1, 1])).unwrap();
        let w = coefficient_matrix(&s).unwrap();
        assert_eq!(w.entries()[(0, 1)], c(0.5));
        assert_eq!(w.entries()[(1, 0)], c(0.5));
        assert!((inner_product(&expand(&w), &s).unwrap() - c(1.0)).norm() < 1e-15);

        let three = FockState::basis(Fermionic, occ(&[1, 1, 1])).unwrap();
        assert!(matches!(coefficient_matrix(&three), Err(Error::NotTwoParticle { particles: 3 })));
    }

    #[test]
    fn single_determinant_has_rank_one() {
        let s = FockState::basis(Fermionic, occ(&[0, 1, 0, 1])).unwrap();
        let w = coefficient_matrix(&s).unwrap();
        let form = yang_decompose(&w).unwrap();
        assert_eq!(form.rank, 1);
        assert_eq!(form.values.len(), 2);
        assert!((form.values[0] - 0.5).abs() < 1e-14);
        assert!(form.reconstruction_residual(&w) < 1e-12);
    }

    #[test]
    fn two_equal_pairs() {
        let s =
            FockState::new(Fermionic, 4, [(occ(&[1, 1, 0, 0]), c(1.0)), (occ(&[0, 0, 1, 1]), c(1.0))], true).unwrap();
        let w = coefficient_matrix(&s).unwrap();
        let form = yang_decompose(&w).unwrap();
        assert_eq!(form.rank, 2);
        assert!((form.values[0] - form.values[1]).abs() < 1e-14);
        // w_01 already holds the canonical value
        assert!((form.values[0] - w.entries()[(0, 1)].re).abs() < 1e-14);
        assert!(form.reconstruction_residual(&w) < 1e-12);
        // tie broken by the smallest participating mode: block on modes 0,1 first
        let u = form.basis_change.matrix();
        assert!(u[(0, 0)].norm() > 0.5 || u[(1, 0)].norm() > 0.5);
    }

    #[test]
    fn rejects_wrong_symmetry() {
        let w = CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]);
        assert!(matches!(CoefficientMatrix::new(Fermionic, w.clone()), Err(Error::NotAntisymmetric { .. })));
        let w = CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(-1.0), c(0.0)]);
        assert!(matches!(CoefficientMatrix::new(Bosonic, w), Err(Error::NotSymmetric { .. })));
    }

    #[test]
    fn takagi_of_permanent_pair() {
        // a_0^dag a_1^dag |0> = (b_+^2 - b_-^2)/2 in the rotated basis
        let s = FockState::basis(Bosonic, occ(&[1, 1, 0])).unwrap();
        let w = coefficient_matrix(&s).unwrap();
        let form = yang_decompose(&w).unwrap();
        assert_eq!(form.rank, 2);
        assert!((form.values[0] - 0.5).abs() < 1e-14 && (form.values[1] - 0.5).abs() < 1e-14);
        assert!(form.reconstruction_residual(&w) < 1e-12);
        let rho = rho1_in_yang_basis(&s).unwrap();
        assert!(rho.max_off_diagonal() < 1e-12);
    }
}
