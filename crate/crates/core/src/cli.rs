//! State files, command dispatch and text reports for the `fockent` binary.
//!
//! Reports are `key value...` lines in a fixed order. Numbers carry 12
//! significant digits; magnitudes below [`NOISE_FLOOR`] print as `0` so the
//! same input gives the same bytes on every platform.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Parser, Subcommand};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::error::Error;
use crate::first_quant::{from_product_tensor, tensor_len, ProductTensor};
use crate::fock::{FockState, OccupationVector, Statistics};
use crate::measures::{
    describe_partition, mode_entanglement_entropy, occupation_entropy, partial_entropy, von_neumann_entropy,
    CONFIGURATION_THRESHOLD,
};
use crate::rdm::{mode_rdm, n_particle_rdm, DensityMatrix, LabelKind};
use crate::spinmap::{to_spin_register, OrbitGrouping};
use crate::transform::{apply_single_particle_unitary, dft_unitary, SingleParticleUnitary};
use crate::yang::{coefficient_matrix, rho1_in_yang_basis, yang_decompose};

pub const NOISE_FLOOR: f64 = 1e-13;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },

    #[error("{path}:{line}:{column}: {message}")]
    Parse { path: String, line: usize, column: usize, message: String },

    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Library(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Library(e) if e.is_numerical() => 2,
            _ => 1,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum StatisticsTag {
    Fermionic,
    Bosonic,
}

impl From<StatisticsTag> for Statistics {
    fn from(tag: StatisticsTag) -> Self {
        match tag {
            StatisticsTag::Fermionic => Statistics::Fermionic,
            StatisticsTag::Bosonic => Statistics::Bosonic,
        }
    }
}

impl From<Statistics> for StatisticsTag {
    fn from(s: Statistics) -> Self {
        match s {
            Statistics::Fermionic => StatisticsTag::Fermionic,
            Statistics::Bosonic => StatisticsTag::Bosonic,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    Occupation,
    FirstQuantized,
}

/// On-disk state. Each term is `[indices, re, im]`: an occupation vector
/// for `occupation`, a particle mode tuple for `first_quantized`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateFile {
    statistics: StatisticsTag,
    modes: usize,
    representation: Representation,
    terms: Vec<(Vec<u32>, f64, f64)>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct UnitaryFile {
    modes: usize,
    /// Row-major `[re, im]` pairs.
    entries: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ParsedState {
    Occupation(FockState),
    FirstQuantized(ProductTensor),
}

impl ParsedState {
    pub fn into_fock_state(self) -> crate::error::Result<FockState> {
        match self {
            ParsedState::Occupation(s) => Ok(s),
            ParsedState::FirstQuantized(t) => normalized(from_product_tensor(&t)?),
        }
    }
}

/// Rescales only when the norm is off by more than the normalization
/// tolerance, so emitted files read back verbatim.
fn normalized(state: FockState) -> crate::error::Result<FockState> {
    if state.is_normalized() {
        return Ok(state);
    }
    let norm = state.norm_sqr().sqrt();
    if norm == 0.0 {
        return Err(Error::ZeroState);
    }
    Ok(state.scaled(C64::from(1.0 / norm)))
}

fn parse_json<T: for<'de> Deserialize<'de>>(text: &str, origin: &str) -> CliResult<T> {
    serde_json::from_str(text).map_err(|e| CliError::Parse {
        path: origin.to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

/// Parses state-file text. `origin` names the source in error messages.
/// Occupation states come back normalized.
pub fn parse_state_text(text: &str, origin: &str) -> CliResult<ParsedState> {
    let file: StateFile = parse_json(text, origin)?;
    let statistics = Statistics::from(file.statistics);
    match file.representation {
        Representation::Occupation => {
            let terms = file.terms.into_iter().map(|(occ, re, im)| (OccupationVector::new(occ), C64::new(re, im)));
            let state = FockState::new(statistics, file.modes, terms, false)?;
            Ok(ParsedState::Occupation(normalized(state)?))
        }
        Representation::FirstQuantized => {
            let particles = match file.terms.first() {
                Some((tuple, _, _)) => tuple.len(),
                None => return Err(Error::ZeroState.into()),
            };
            let len = tensor_len(file.modes, particles as u32)?;
            let mut entries = vec![C64::new(0.0, 0.0); len];
            for (term, (tuple, re, im)) in file.terms.iter().enumerate() {
                if tuple.len() != particles {
                    return Err(Error::MixedParticleNumber {
                        term,
                        expected: particles as u32,
                        found: tuple.len() as u32,
                    }
                    .into());
                }
                let mut flat = 0usize;
                for &k in tuple {
                    let k = k as usize;
                    if k >= file.modes {
                        return Err(Error::ModeOutOfRange { mode: k, modes: file.modes }.into());
                    }
                    flat = flat * file.modes + k;
                }
                entries[flat] += C64::new(*re, *im);
            }
            let tensor = ProductTensor::new(statistics, file.modes, particles as u32, entries)?;
            Ok(ParsedState::FirstQuantized(tensor))
        }
    }
}

fn read_file(path: &Path) -> CliResult<Vec<u8>> {
    fs::read(path).map_err(|e| CliError::Io { path: path.display().to_string(), message: e.to_string() })
}

fn as_text(bytes: &[u8], path: &Path) -> CliResult<String> {
    String::from_utf8(bytes.to_vec())
        .map_err(|e| CliError::Io { path: path.display().to_string(), message: e.to_string() })
}

pub fn parse_state_file(path: &Path) -> CliResult<ParsedState> {
    let bytes = read_file(path)?;
    parse_state_text(&as_text(&bytes, path)?, &path.display().to_string())
}

pub fn parse_unitary_text(text: &str, origin: &str) -> CliResult<SingleParticleUnitary> {
    let file: UnitaryFile = parse_json(text, origin)?;
    let entries: Vec<C64> = file.entries.iter().map(|&(re, im)| C64::new(re, im)).collect();
    Ok(SingleParticleUnitary::from_row_major(file.modes, &entries)?)
}

/// Occupation-representation state file, one term per line. Amplitudes are
/// written as shortest round-trip decimals, so parsing returns them exactly.
pub fn emit_state(state: &FockState) -> String {
    let stats = serde_json::to_string(&StatisticsTag::from(state.statistics())).expect("tag serializes");
    let mut out = String::new();
    out.push_str("{\n");
    let _ = writeln!(out, "  \"statistics\": {stats},");
    let _ = writeln!(out, "  \"modes\": {},", state.modes());
    out.push_str("  \"representation\": \"occupation\",\n");
    out.push_str("  \"terms\": [");
    let terms: Vec<String> = state
        .iter()
        .map(|(occ, a)| {
            let term = (occ.as_slice(), a.re, a.im);
            format!("\n    {}", serde_json::to_string(&term).expect("finite amplitudes serialize"))
        })
        .collect();
    out.push_str(&terms.join(","));
    out.push_str(if terms.is_empty() { "]\n" } else { "\n  ]\n" });
    out.push_str("}\n");
    out
}

/// 12 significant digits, fixed notation for moderate exponents.
pub fn format_number(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x.abs() < NOISE_FLOOR {
        return "0".into();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        format!("{:.*}", (11 - exp) as usize, x)
    } else {
        format!("{mantissa}e{exp}")
    }
}

fn format_complex(z: C64) -> String {
    format!("{} {}", format_number(z.re), format_number(z.im))
}

fn join_indices(v: &[usize]) -> String {
    v.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",")
}

fn parse_indices(text: &str) -> CliResult<Vec<usize>> {
    text.split(',')
        .map(|m| m.trim().parse::<usize>().map_err(|_| CliError::Usage(format!("bad mode list {text:?}"))))
        .collect()
}

fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Default)]
struct Report {
    text: String,
}

impl Report {
    fn line(&mut self, key: &str, value: impl AsRef<str>) {
        let _ = writeln!(self.text, "{key} {}", value.as_ref());
    }

    fn number(&mut self, key: &str, x: f64) {
        self.line(key, format_number(x));
    }
}

#[derive(Parser, Debug)]
#[command(name = "fockent", version, about = "Entanglement of identical particles in the occupation basis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Configuration count, one-particle partial entropy and mode entropies.
    Analyze {
        #[arg(long)]
        state: PathBuf,
        /// Comma-separated modes; repeat for several partitions.
        #[arg(long)]
        partition: Vec<String>,
    },
    /// Apply a single-particle basis change and write the new state.
    Transform {
        #[arg(long)]
        state: PathBuf,
        #[arg(long, conflicts_with = "dft", required_unless_present = "dft")]
        unitary: Option<PathBuf>,
        /// Built-in discrete Fourier transform on all modes.
        #[arg(long)]
        dft: bool,
        /// Apply the adjoint instead.
        #[arg(long)]
        inverse: bool,
        /// Output state file; the state goes to stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// n-particle or mode reduced density matrix.
    #[command(group(ArgGroup::new("kind").required(true).args(["n", "partition"])))]
    Rdm {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        partition: Option<String>,
    },
    /// Canonical form of a two-particle state.
    Yang {
        #[arg(long)]
        state: PathBuf,
    },
    /// Spin register of a half-filled state.
    Spinmap {
        #[arg(long)]
        state: PathBuf,
        /// Semicolon-separated orbit groups, e.g. "0,1;2,3".
        #[arg(long)]
        orbits: String,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Runs one command line (`argv[0]` is the program name).
pub fn run_command<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    Outcome { code: 0, stdout: text, stderr: String::new() }
                }
                _ => Outcome { code: 1, stdout: String::new(), stderr: text },
            };
        }
    };
    match dispatch(cli.command) {
        Ok(stdout) => Outcome { code: 0, stdout, stderr: String::new() },
        Err(e) => Outcome { code: e.exit_code(), stdout: String::new(), stderr: format!("error: {e}\n") },
    }
}

struct Loaded {
    state: FockState,
    digest: String,
}

fn load_state(path: &Path) -> CliResult<Loaded> {
    let bytes = read_file(path)?;
    let parsed = parse_state_text(&as_text(&bytes, path)?, &path.display().to_string())?;
    Ok(Loaded { state: parsed.into_fock_state()?, digest: hex_digest(&bytes) })
}

fn header(report: &mut Report, loaded: &Loaded) {
    report.line("version", format!("fockent {}", env!("CARGO_PKG_VERSION")));
    report.line("input_sha256", &loaded.digest);
    report.line("statistics", loaded.state.statistics().name());
    report.line("modes", loaded.state.modes().to_string());
    report.line("particles", loaded.state.particles().to_string());
}

fn dispatch(command: Command) -> CliResult<String> {
    match command {
        Command::Analyze { state, partition } => analyze(&state, &partition),
        Command::Transform { state, unitary, dft: _, inverse, out } => {
            transform(&state, unitary.as_deref(), inverse, out.as_deref())
        }
        Command::Rdm { state, n, partition } => rdm(&state, n, partition.as_deref()),
        Command::Yang { state } => yang(&state),
        Command::Spinmap { state, orbits } => spinmap(&state, &orbits),
    }
}

fn analyze(path: &Path, partitions: &[String]) -> CliResult<String> {
    let loaded = load_state(path)?;
    let state = &loaded.state;
    let mut report = Report::default();
    header(&mut report, &loaded);
    report.line("configuration_count", state.configuration_count(CONFIGURATION_THRESHOLD).to_string());
    if state.particles() > 0 {
        let partial = partial_entropy(state)?;
        report.number("partial_entropy_bits", partial.value_bits);
        let rho1 = n_particle_rdm(state, 1)?;
        report.number("one_particle_von_neumann_bits", von_neumann_entropy(&rho1)?.value_bits);
    }
    for text in partitions {
        let modes = parse_indices(text)?;
        let r = mode_entanglement_entropy(state, &modes)?;
        report.line("mode_entropy_bits", format!("{} {}", join_indices(&modes), format_number(r.value_bits)));
    }
    Ok(report.text)
}

fn transform(path: &Path, unitary: Option<&Path>, inverse: bool, out: Option<&Path>) -> CliResult<String> {
    let loaded = load_state(path)?;
    let (mut u, source) = match unitary {
        Some(p) => {
            let bytes = read_file(p)?;
            let u = parse_unitary_text(&as_text(&bytes, p)?, &p.display().to_string())?;
            (u, format!("file {}", hex_digest(&bytes)))
        }
        None => (dft_unitary(loaded.state.modes()), "dft".to_string()),
    };
    if inverse {
        u = u.adjoint();
    }
    let transformed = apply_single_particle_unitary(&loaded.state, &u)?;
    let emitted = emit_state(&transformed);
    let Some(out) = out else {
        return Ok(emitted);
    };
    fs::write(out, &emitted).map_err(|e| CliError::Io { path: out.display().to_string(), message: e.to_string() })?;
    let mut report = Report::default();
    header(&mut report, &loaded);
    report.line("unitary", source);
    report.line("inverse", inverse.to_string());
    report.line("configuration_count_before", loaded.state.configuration_count(CONFIGURATION_THRESHOLD).to_string());
    report.line("configuration_count_after", transformed.configuration_count(CONFIGURATION_THRESHOLD).to_string());
    report.line("output", out.display().to_string());
    report.line("output_sha256", hex_digest(emitted.as_bytes()));
    Ok(report.text)
}

fn label_text(rho: &DensityMatrix, k: usize) -> String {
    let label = &rho.labels[k];
    match rho.label_kind {
        LabelKind::ModeTuple => format!("({})", join_indices(label)),
        LabelKind::OccupationPattern | LabelKind::SpinPattern => format!("|{}>", join_indices(label)),
    }
}

fn matrix_table(report: &mut Report, key: &str, rho: &DensityMatrix) {
    report.line("dimension", rho.dim().to_string());
    report.line("trace", format_complex(rho.trace()));
    for i in 0..rho.dim() {
        for j in 0..rho.dim() {
            report.line(
                key,
                format!("{} {} {}", label_text(rho, i), label_text(rho, j), format_complex(rho.entries[(i, j)])),
            );
        }
    }
}

fn rdm(path: &Path, n: Option<usize>, partition: Option<&str>) -> CliResult<String> {
    let loaded = load_state(path)?;
    let mut report = Report::default();
    header(&mut report, &loaded);
    let rho = match (n, partition) {
        (Some(n), _) => {
            report.line("rdm", format!("particles {n}"));
            n_particle_rdm(&loaded.state, n)?
        }
        (None, Some(text)) => {
            let modes = parse_indices(text)?;
            report.line("rdm", describe_partition(&modes));
            mode_rdm(&loaded.state, &modes)?
        }
        (None, None) => return Err(CliError::Usage("rdm needs --n or --partition".into())),
    };
    report.number("von_neumann_bits", von_neumann_entropy(&rho)?.value_bits);
    report.number("diagonal_entropy_bits", occupation_entropy(&rho)?.value_bits);
    matrix_table(&mut report, "entry", &rho);
    Ok(report.text)
}

fn yang(path: &Path) -> CliResult<String> {
    let loaded = load_state(path)?;
    let w = coefficient_matrix(&loaded.state)?;
    let form = yang_decompose(&w)?;
    let mut report = Report::default();
    header(&mut report, &loaded);
    report.line("yang_rank", form.rank.to_string());
    for (r, (v, weight)) in form.values.iter().zip(form.block_weights()).enumerate() {
        report.line("yang_value", format!("{r} {} {}", format_number(*v), format_number(weight)));
    }
    report.number("reconstruction_residual", form.reconstruction_residual(&w));
    let rho = rho1_in_yang_basis(&loaded.state)?;
    report.number("rho1_max_off_diagonal", rho.max_off_diagonal());
    for k in 0..rho.dim() {
        report.line("rho1_diagonal", format!("{k} {}", format_number(rho.entries[(k, k)].re)));
    }
    let u = form.basis_change.matrix();
    for i in 0..u.nrows() {
        for j in 0..u.ncols() {
            report.line("basis", format!("{i} {j} {}", format_complex(u[(i, j)])));
        }
    }
    Ok(report.text)
}

fn spinmap(path: &Path, orbits: &str) -> CliResult<String> {
    let loaded = load_state(path)?;
    let grouping = OrbitGrouping::parse(orbits)?;
    let register = to_spin_register(&loaded.state, &grouping)?;
    let mut report = Report::default();
    header(&mut report, &loaded);
    report.line("orbits", orbits);
    for (spins, a) in &register.amplitudes {
        report.line("register", format!("{} {}", join_indices(spins), format_complex(*a)));
    }
    let l = grouping.len();
    // subsets containing the last orbit are complements of ones listed
    for mask in 1u32..(1 << (l - 1)) {
        let subset: Vec<usize> = (0..l).filter(|o| mask & (1 << o) != 0).collect();
        let spin = register.bipartite_entropy(&subset)?;
        let mode = mode_entanglement_entropy(&loaded.state, &grouping.modes_of(&subset))?;
        report.line(
            "entropy_bits",
            format!(
                "orbits {} spin {} mode {}",
                join_indices(&subset),
                format_number(spin.value_bits),
                format_number(mode.value_bits)
            ),
        );
    }
    Ok(report.text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format() {
        assert_eq!(format_number(1.0), "1.00000000000");
        assert_eq!(format_number(-0.5), "-0.500000000000");
        assert_eq!(format_number(1e-17), "0");
        assert_eq!(format_number(-0.0), "0");
        assert_eq!(format_number(1.5e-7), "1.50000000000e-7");
        assert_eq!(format_number(123.0), "123.000000000");
        assert_eq!(format_number(2f64.log2() + 0.5 * 3f64.log2()), "1.79248125036");
    }

    #[test]
    fn parse_examples() {
        let s = parse_state_text(
            r#"{"statistics":"fermionic","modes":2,"representation":"occupation","terms":[[[1,1],1,0]]}"#,
            "t",
        )
        .unwrap()
        .into_fock_state()
        .unwrap();
        assert_eq!(s.particles(), 2);

        let mixed = r#"{"statistics":"bosonic","modes":2,"representation":"occupation",
            "terms":[[[1,0],1,0],[[0,1],1,0],[[1,1],1,0]]}"#;
        match parse_state_text(mixed, "t") {
            Err(CliError::Library(Error::MixedParticleNumber { term: 2, .. })) => {}
            other => panic!("{other:?}"),
        }

        let asym = r#"{"statistics":"bosonic","modes":2,"representation":"first_quantized",
            "terms":[[[0,1],1,0]]}"#;
        match parse_state_text(asym, "t") {
            Err(CliError::Library(Error::NotSymmetric { .. })) => {}
            other => panic!("{other:?}"),
        }

        match parse_state_text("{\n  \"statistics\": \"fermionic\",\n  \"modes\": x\n}", "t") {
            Err(CliError::Parse { line: 3, column, .. }) => assert!(column > 0),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse_state_text(r#"{"statistics":"anyonic","modes":1,"representation":"occupation","terms":[]}"#, "t"),
            Err(CliError::Parse { .. })
        ));
    }

    #[test]
    fn first_quantized_pair() {
        let h = 0.5;
        let text = format!(
            r#"{{"statistics":"fermionic","modes":2,"representation":"first_quantized",
                "terms":[[[0,1],{h},0],[[1,0],{},0]]}}"#,
            -h
        );
        let s = parse_state_text(&text, "t").unwrap().into_fock_state().unwrap();
        assert_eq!(s.configuration_count(1e-12), 1);
        assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn emit_round_trip() {
        let s = FockState::new(
            Statistics::Bosonic,
            3,
            [
                (OccupationVector::new(vec![2, 0, 0]), C64::new(0.1, 1.0 / 3.0)),
                (OccupationVector::new(vec![0, 1, 1]), C64::new(-0.7, 2f64.sqrt() / 7.0)),
            ],
            true,
        )
        .unwrap();
        let text = emit_state(&s);
        let back = parse_state_text(&text, "t").unwrap().into_fock_state().unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn usage_errors() {
        let out = run_command(["fockent", "frobnicate"]);
        assert_eq!(out.code, 1);
        assert!(!out.stderr.is_empty());
        assert_eq!(run_command(["fockent"]).code, 1);
        assert_eq!(run_command(["fockent", "--help"]).code, 0);
        let missing = run_command(["fockent", "analyze", "--state", "/nonexistent/state.json"]);
        assert_eq!(missing.code, 1);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::from(Error::NotPSD { eigenvalue: -1.0 }).exit_code(), 2);
        assert_eq!(CliError::from(Error::ZeroState).exit_code(), 1);
    }
}
