//! Argument handling and dispatch for the `lueq` binary, kept in a library so
//! tests can drive it without spawning processes.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use lueq::bloch::{bloch_to_string, expand, BlochTensor};
use lueq::canonical::{canonical_to_string, canonicalize, CanonicalPoint};
use lueq::equivalence::{decide_with, oracle_search, DecideOptions, Verdict};
use lueq::format;
use lueq::invariants::{
    invariant1, invariants_to_string, read_invariants, record, InvariantSet3, Tolerance,
    TwoQubitSet, ONE_QUBIT_NOTE,
};
use lueq::orbit_dim::{invariant_count_formula, invariant_count_numeric, orbit_dimension};
use lueq::reconstruct::reconstruct_canonical;
use lueq::states::{random_state, read_state, state_to_string, DensityMatrix, SystemShape};
use lueq::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_DISTINCT: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;
pub const EXIT_PARSE: i32 = 3;
pub const EXIT_VALIDATION: i32 = 4;
pub const EXIT_NUMERICAL: i32 = 5;

/// What a command produced: text for people, optional JSON for machines, and an exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct CommandResult {
    pub report: String,
    pub payload: Option<String>,
    pub exit_code: i32,
    /// `--json` was given, so the payload goes to stdout and the report to stderr.
    pub json: bool,
}

#[derive(Parser, Debug)]
#[command(name = "lueq", version, about = "Local-unitary equivalence of multi-qubit states")]
struct Cli {
    /// Write the machine-readable payload to stdout (report goes to stderr).
    #[arg(long, global = true)]
    json: bool,
    /// Relative tolerance for invariant comparison.
    #[arg(long, global = true, value_name = "X")]
    tol: Option<f64>,
    /// Seed for random states and oracle restarts.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Expand a state in the Pauli product basis.
    Expand { state: PathBuf },
    /// Evaluate the polynomial invariant family of a 1-, 2- or 3-qubit state.
    Invariants {
        state: PathBuf,
        #[arg(long, value_enum, default_value_t = SetArg::Full)]
        set: SetArg,
    },
    /// Move a 2- or 3-qubit state to its canonical point.
    Canonical { state: PathBuf },
    /// Rebuild the 3-qubit canonical point from an invariant file.
    Reconstruct { invariants: PathBuf },
    /// Decide whether two states are related by a local unitary.
    Equiv {
        state1: PathBuf,
        state2: PathBuf,
        /// Also run the numerical search for a connecting local unitary.
        #[arg(long)]
        oracle: bool,
        #[arg(long, default_value_t = 20)]
        restarts: usize,
    },
    /// Orbit dimension and singular spectrum of the tangent frame.
    OrbitDim {
        #[arg(long, conflicts_with = "random", required_unless_present = "random")]
        state: Option<PathBuf>,
        #[command(flatten)]
        random: RandomArgs,
    },
    /// Number of independent local-unitary invariants for a shape.
    Count {
        #[arg(long, value_parser = parse_dims)]
        dims: SystemShape,
    },
    /// Write a seeded random state.
    Random {
        #[arg(long, value_parser = parse_dims)]
        dims: SystemShape,
        #[arg(long)]
        rank: Option<usize>,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
    },
}

#[derive(Args, Debug)]
struct RandomArgs {
    /// Sample the state instead of reading it.
    #[arg(long, requires = "dims")]
    random: bool,
    #[arg(long, value_parser = parse_dims)]
    dims: Option<SystemShape>,
    #[arg(long)]
    rank: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SetArg {
    Minimal,
    Full,
}

fn parse_dims(s: &str) -> std::result::Result<SystemShape, String> {
    let dims = s
        .split(',')
        .map(|p| p.trim().parse::<usize>().map_err(|e| format!("`{p}`: {e}")))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    SystemShape::new(dims).map_err(|e| e.to_string())
}

/// Failure carrying its exit code and one-line diagnostic.
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if e.is_parse() {
            EXIT_PARSE
        } else if e.is_validation() {
            EXIT_VALIDATION
        } else {
            EXIT_NUMERICAL
        };
        Failure { code, message: e.to_string() }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_PARSE, message: message.into() }
}

struct Output {
    report: String,
    payload: Value,
    exit_code: i32,
}

impl Output {
    fn ok(report: String, payload: Value) -> Self {
        Self { report, payload, exit_code: EXIT_OK }
    }
}

/// Parse `argv` (including the program name) and run the command.
pub fn run<I, T>(argv: I) -> CommandResult
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_PARSE,
            };
            return CommandResult {
                report: e.render().to_string(),
                payload: None,
                exit_code: code,
                json: false,
            };
        }
    };
    let json = cli.json;
    match dispatch(&cli) {
        Ok(out) => match format::to_json(&out.payload) {
            Ok(payload) => CommandResult {
                report: out.report,
                payload: Some(payload),
                exit_code: out.exit_code,
                json,
            },
            Err(e) => failure(e.into(), json),
        },
        Err(f) => failure(f, json),
    }
}

fn failure(f: Failure, json: bool) -> CommandResult {
    let line = f.message.replace('\n', " ");
    CommandResult { report: format!("error: {line}\n"), payload: None, exit_code: f.code, json }
}

fn dispatch(cli: &Cli) -> std::result::Result<Output, Failure> {
    match &cli.command {
        Command::Expand { state } => cmd_expand(&read_state(state)?),
        Command::Invariants { state, set } => {
            let set = match set {
                SetArg::Minimal => TwoQubitSet::Minimal,
                SetArg::Full => TwoQubitSet::Full,
            };
            cmd_invariants(&read_state(state)?, set)
        }
        Command::Canonical { state } => cmd_canonical(&read_state(state)?),
        Command::Reconstruct { invariants } => cmd_reconstruct(invariants),
        Command::Equiv { state1, state2, oracle, restarts } => {
            let restarts = oracle.then_some(*restarts);
            cmd_equiv(&read_state(state1)?, &read_state(state2)?, cli, restarts)
        }
        Command::OrbitDim { state, random } => {
            let rho = match state {
                Some(path) => read_state(path)?,
                None => sample(random.dims.as_ref(), random.rank, cli.seed)?,
            };
            cmd_orbit_dim(&rho)
        }
        Command::Count { dims } => cmd_count(dims),
        Command::Random { dims, rank, output } => {
            let rho = sample(Some(dims), *rank, cli.seed)?;
            let seed = cli.seed.expect("checked by sample");
            let label = format!("random dims={dims} seed={seed} rank={}", rank.unwrap_or(dims.total_dim()));
            std::fs::write(output, state_to_string(&rho, Some(&label))?).map_err(Error::from)?;
            Ok(Output::ok(
                format!("wrote {} state to {}\n", dims, output.display()),
                json!({ "path": output.display().to_string(), "dims": dims.dims() }),
            ))
        }
    }
}

fn sample(
    dims: Option<&SystemShape>,
    rank: Option<usize>,
    seed: Option<u64>,
) -> std::result::Result<DensityMatrix, Failure> {
    let dims = dims.ok_or_else(|| usage("--dims is required for random states"))?;
    let seed = seed.ok_or_else(|| usage("--seed is required for random states"))?;
    Ok(random_state(dims, rank.unwrap_or(dims.total_dim()), seed)?)
}

/// Counts can exceed `u64` for many sites; those are emitted as strings.
fn count_value(v: u128) -> Value {
    u64::try_from(v).map(Value::from).unwrap_or_else(|_| Value::String(v.to_string()))
}

fn parse_json(text: &str) -> Value {
    serde_json::from_str(text).expect("library output is valid JSON")
}

fn vec3(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:+.10e}")).collect();
    format!("({})", parts.join(", "))
}

fn describe_tensor(t: &BlochTensor) -> String {
    let mut s = String::new();
    let names = ["alpha", "beta", "gamma"];
    let vecs = [&t.alpha, &t.beta, &t.gamma];
    for site in 0..t.n() {
        s += &format!("{:<8}{}\n", names[site], vec3(vecs[site].as_slice()));
    }
    let pairs = [("pair_12", &t.pair_12), ("pair_13", &t.pair_13), ("pair_23", &t.pair_23)];
    let count = match t.n() {
        1 => 0,
        2 => 1,
        _ => 3,
    };
    for (name, m) in &pairs[..count] {
        for r in 0..3 {
            let row: Vec<f64> = (0..3).map(|c| m[(r, c)]).collect();
            let label = if r == 0 { *name } else { "" };
            s += &format!("{label:<8}{}\n", vec3(&row));
        }
    }
    if t.n() == 3 {
        s += &format!("triple  27 entries, norm {:.10e}\n", t.triple.as_slice().iter().map(|x| x * x).sum::<f64>().sqrt());
    }
    s
}

fn cmd_expand(rho: &DensityMatrix) -> std::result::Result<Output, Failure> {
    let t = expand(rho)?;
    let report = format!("Bloch tensor of a {}-qubit state\n{}", t.n(), describe_tensor(&t));
    Ok(Output::ok(report, parse_json(&bloch_to_string(&t)?)))
}

fn cmd_invariants(rho: &DensityMatrix, set: TwoQubitSet) -> std::result::Result<Output, Failure> {
    let t = expand(rho)?;
    let rec = record(&t, set)?;
    let mut report = String::new();
    for (name, v) in rec.names.iter().zip(&rec.values) {
        report += &format!("{name:<10}{v:+.16e}\n");
    }
    let mut payload = parse_json(&invariants_to_string(&rec)?);
    if t.n() == 1 {
        let one = invariant1(&t)?;
        report += &format!(
            "tr(rho^2) {:.16e}\n1/2 + 2I  {:.16e}\nresidual  {:+.3e}\nnote: {ONE_QUBIT_NOTE}\n",
            one.purity,
            0.5 + 2.0 * one.invariant,
            one.identity_residual
        );
        payload["purity"] = json!(one.purity);
        payload["identity_residual"] = json!(one.identity_residual);
        payload["note"] = json!(ONE_QUBIT_NOTE);
    }
    Ok(Output::ok(report, payload))
}

fn describe_point(p: &CanonicalPoint) -> String {
    let mut s = describe_tensor(&p.tensor);
    s += &format!("generic: {}\n", p.report.generic);
    for f in p.report.failures() {
        s += &format!("  {f}\n");
    }
    s
}

fn cmd_canonical(rho: &DensityMatrix) -> std::result::Result<Output, Failure> {
    let p = canonicalize(&expand(rho)?)?;
    Ok(Output::ok(describe_point(&p), parse_json(&canonical_to_string(&p)?)))
}

fn cmd_reconstruct(path: &std::path::Path) -> std::result::Result<Output, Failure> {
    let rec = read_invariants(path)?;
    if rec.n != 3 {
        return Err(Error::UnsupportedShape(format!(
            "reconstruction needs the 3-qubit family, file has n = {}",
            rec.n
        ))
        .into());
    }
    let p = reconstruct_canonical(&InvariantSet3::from_vec(&rec.values)?)?;
    Ok(Output::ok(describe_point(&p), parse_json(&canonical_to_string(&p)?)))
}

fn cmd_equiv(
    a: &DensityMatrix,
    b: &DensityMatrix,
    cli: &Cli,
    restarts: Option<usize>,
) -> std::result::Result<Output, Failure> {
    let mut opts = DecideOptions::default();
    if let Some(rel) = cli.tol {
        if !(rel > 0.0) {
            return Err(usage(format!("--tol must be positive, got {rel}")));
        }
        opts.tol = Tolerance { rel, ..Tolerance::default() };
    }
    let v = decide_with(a, b, &opts)?;
    let mut report = format!("{}\n", v.verdict);
    if let Some(w) = &v.witness {
        report += &format!("witness: {}\n", w.describe());
    }
    for (i, r) in v.genericity.iter().enumerate() {
        report += &format!("state {}: generic = {}\n", i + 1, r.generic);
        for f in r.failures() {
            report += &format!("  {f}\n");
        }
    }
    let mut payload = serde_json::to_value(&v).map_err(|e| usage(e.to_string()))?;
    if let Some(restarts) = restarts {
        let o = oracle_search(a, b, restarts, cli.seed.unwrap_or(0))?;
        report += &format!("oracle residual {:.6e} (start {} of {})\n", o.residual, o.restart, o.residuals.len());
        payload["oracle"] = json!({ "residual": o.residual, "restart": o.restart, "starts": o.residuals.len() });
    }
    let exit_code = match v.verdict {
        Verdict::Equivalent => EXIT_OK,
        Verdict::Distinct => EXIT_DISTINCT,
        Verdict::Inconclusive => EXIT_INCONCLUSIVE,
    };
    Ok(Output { report, payload, exit_code })
}

fn cmd_orbit_dim(rho: &DensityMatrix) -> std::result::Result<Output, Failure> {
    let od = orbit_dimension(rho);
    let formula = invariant_count_formula(rho.shape());
    let numeric = invariant_count_numeric(rho);
    let spectrum: Vec<String> = od.singular_values.iter().map(|s| format!("{s:.6e}")).collect();
    let report = format!(
        "orbit dimension {}\nsingular values {}\ncutoff {:.3e}\ninvariant count {} (formula {})\n",
        od.dimension,
        spectrum.join(" "),
        od.cutoff,
        numeric,
        formula.value
    );
    let payload = json!({
        "dims": rho.shape().dims(),
        "dimension": od.dimension,
        "singular_values": od.singular_values,
        "cutoff": od.cutoff,
        "invariant_count": numeric,
        "formula": count_value(formula.value),
    });
    Ok(Output::ok(report, payload))
}

fn cmd_count(dims: &SystemShape) -> std::result::Result<Output, Failure> {
    let c = invariant_count_formula(dims);
    let mut report = format!("{}\n", c.value);
    if !c.formula_applies {
        report += "single site: count is the d - 1 free eigenvalues\n";
    }
    Ok(Output::ok(
        report,
        json!({ "dims": dims.dims(), "value": count_value(c.value), "formula_applies": c.formula_applies }),
    ))
}
