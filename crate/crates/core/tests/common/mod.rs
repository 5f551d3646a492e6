#![allow(dead_code)]

use fockent::fock::{enumerate_basis, FockState, OccupationVector, Statistics};
use fockent::linalg::CMatrix;
use fockent::transform::SingleParticleUnitary;
use num_complex::Complex64 as C64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn random_complex(rng: &mut StdRng) -> C64 {
    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// Normalized random state. About a third of the basis is dropped so
/// sparse states are covered too; at least one configuration survives.
pub fn random_state(rng: &mut StdRng, statistics: Statistics, modes: usize, particles: u32) -> FockState {
    let basis = enumerate_basis(statistics, modes, particles);
    assert!(!basis.is_empty(), "no room for {particles} particles in {modes} modes");
    let keep = rng.gen_range(0..basis.len());
    let mut terms: Vec<(OccupationVector, C64)> = Vec::new();
    for (k, occ) in basis.into_iter().enumerate() {
        if k == keep || rng.gen_bool(0.67) {
            terms.push((occ, random_complex(rng)));
        }
    }
    FockState::new(statistics, modes, terms, true).unwrap()
}

/// Random shape with `modes <= max_modes` and `particles <= max_particles`
/// that fits the statistics.
pub fn random_shape(rng: &mut StdRng, statistics: Statistics, max_modes: usize, max_particles: u32) -> (usize, u32) {
    let modes = rng.gen_range(1..=max_modes);
    let cap = match statistics {
        Statistics::Fermionic => max_particles.min(modes as u32),
        Statistics::Bosonic => max_particles,
    };
    (modes, rng.gen_range(1..=cap.max(1)))
}

/// Haar-ish random unitary from the QR factor of a random complex matrix.
pub fn random_unitary(rng: &mut StdRng, modes: usize) -> SingleParticleUnitary {
    let m = CMatrix::from_fn(modes, modes, |_, _| random_complex(rng));
    SingleParticleUnitary::new(m.qr().q()).unwrap()
}

pub fn max_amplitude_difference(a: &FockState, b: &FockState) -> f64 {
    a.iter()
        .map(|(o, x)| (x - b.amplitude(o)).norm())
        .chain(b.iter().map(|(o, y)| (a.amplitude(o) - y).norm()))
        .fold(0.0, f64::max)
}

pub fn max_entry_difference(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Random half-filled state: one particle in each of `orbits` groups of
/// `spins` consecutive modes.
pub fn random_half_filled(rng: &mut StdRng, statistics: Statistics, orbits: usize, spins: usize) -> FockState {
    let modes = orbits * spins;
    let mut terms = Vec::new();
    let total = spins.pow(orbits as u32);
    for code in 0..total {
        if terms.is_empty() && code + 1 == total || rng.gen_bool(0.75) {
            let mut occ = vec![0u32; modes];
            let mut rest = code;
            for o in 0..orbits {
                occ[o * spins + rest % spins] = 1;
                rest /= spins;
            }
            terms.push((OccupationVector::new(occ), random_complex(rng)));
        }
    }
    FockState::new(statistics, modes, terms, true).unwrap()
}

/// Nonempty proper subsets of `0..n` as index lists.
pub fn proper_subsets(n: usize) -> Vec<Vec<usize>> {
    (1u32..(1 << n) - 1).map(|mask| (0..n).filter(|i| mask & (1 << i) != 0).collect()).collect()
}

pub fn data(name: &str) -> String {
    format!("{}/tests/data/{name}", env!("CARGO_MANIFEST_DIR"))
}

/// Runs the CLI in-process, asserting success, and returns the report.
pub fn run_ok(args: &[&str]) -> String {
    let argv = std::iter::once("fockent").chain(args.iter().copied());
    let out = fockent::cli::run_command(argv);
    assert_eq!(out.code, 0, "{args:?} failed: {}", out.stderr);
    out.stdout
}

/// Values after `key` on every report line that starts with it.
pub fn report_values<'a>(report: &'a str, key: &str) -> Vec<Vec<&'a str>> {
    report
        .lines()
        .filter_map(|l| {
            let mut words = l.split(' ');
            (words.next() == Some(key)).then(|| words.collect())
        })
        .collect()
}

/// The single value of a one-value report key.
pub fn report_value<'a>(report: &'a str, key: &str) -> &'a str {
    let values = report_values(report, key);
    assert_eq!(values.len(), 1, "key {key} in\n{report}");
    values[0][0]
}
