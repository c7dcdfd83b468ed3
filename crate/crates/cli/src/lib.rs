//! Command-line front end for the `setdiv` library.

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value as Json};
use setdiv::aep::regularized_estimate;
use setdiv::divergences::{self, Ball};
use setdiv::measured;
use setdiv::setdiv as sd;
use setdiv::sets::{family_from_json, validate_assumptions, SetFamily, StateSet};
use setdiv::stein;
use setdiv::tolerances;
use setdiv::{Error, Hermitian, Value};
use std::ffi::OsString;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_PRECONDITION: i32 = 2;
pub const EXIT_NONCONVERGENCE: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "setdiv", version, about = "Quantum divergences between sets of states")]
pub struct Cli {
    /// Seed for every sampled step.
    #[arg(long, default_value_t = 0, global = true)]
    pub seed: u64,
    /// Override a named tolerance; repeatable.
    #[arg(long = "tol", value_name = "NAME=VALUE", global = true)]
    pub tol: Vec<String>,
    /// Write the document here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Emit results that rest on non-certified steps instead of failing.
    #[arg(long, global = true)]
    pub allow_heuristic: bool,
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,
    /// Largest accepted Hilbert-space dimension of an input.
    #[arg(long, default_value_t = 4096, global = true)]
    pub dim_cap: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DivKind {
    Umegaki,
    Petz,
    Sandwiched,
    Dmin,
    Dmax,
    Measured,
    MeasuredAlpha,
    Hypo,
    SmoothedDmax,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BallKind {
    Purified,
    Trace,
    TraceNormalized,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SetKind {
    Measured,
    MeasuredAlpha,
    Umegaki,
    Petz,
    Sandwiched,
    Dmin,
    Dmax,
    Hypo,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum NamedFamily {
    Incoherent,
    Conditional,
    Rains,
    Mana,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Divergence between two operators.
    Div {
        #[arg(long, value_enum)]
        kind: DivKind,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long, value_enum, default_value_t = BallKind::Purified)]
        ball: BallKind,
        rho: PathBuf,
        sigma: PathBuf,
    },
    /// Divergence between two sets (or the n-th members of two families).
    Setdiv {
        #[arg(long, value_enum)]
        kind: SetKind,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long, default_value_t = 1)]
        copies: usize,
        a: PathBuf,
        b: PathBuf,
    },
    /// Finite-m sandwich table on the regularized relative entropy.
    Aep {
        #[arg(long, default_value_t = 2)]
        m_max: usize,
        a: PathBuf,
        b: PathBuf,
    },
    /// Per-n hypothesis-testing exponents with their floors and ceilings.
    Stein {
        #[arg(long)]
        epsilon: f64,
        #[arg(long, default_value_t = 3)]
        n_max: usize,
        a: PathBuf,
        b: PathBuf,
    },
    /// Interval on the conversion rate from A to B.
    Rate {
        #[arg(long, default_value_t = 2)]
        m_max: usize,
        a: PathBuf,
        b: PathBuf,
        /// Free family on A's system.
        free_a: PathBuf,
        /// Free family on B's system; defaults to the one on A's.
        free_b: Option<PathBuf>,
    },
    /// Sampled checks of the structural properties of a family.
    Validate {
        #[arg(long, value_enum, conflicts_with = "file")]
        family: Option<NamedFamily>,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, default_value_t = 1)]
        m: usize,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value_t = 8)]
        samples: usize,
        #[arg(long)]
        file: Option<PathBuf>,
    },
    /// Builds the test-and-prepare conversion map and audits it.
    Protocol {
        #[arg(long)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.0)]
        delta: f64,
        #[arg(short, long, default_value_t = 1)]
        n: usize,
        #[arg(short, long, default_value_t = 1)]
        m: usize,
        #[arg(long, default_value_t = 8)]
        budget: usize,
        a: PathBuf,
        free: PathBuf,
        b: PathBuf,
    },
    /// Prints the tolerance table in effect.
    Tolerances,
}

/// What a run produced: exit code, document for stdout or --out, message
/// for stderr.
#[derive(Debug, Default)]
pub struct Outcome {
    pub code: i32,
    pub document: Option<String>,
    pub diagnostic: Option<String>,
    /// --out, when given.
    pub out: Option<PathBuf>,
}

#[derive(Debug)]
enum Failure {
    Lib(Error, Option<String>),
    Heuristic(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e, None)
    }
}

type Res<T> = std::result::Result<T, Failure>;

fn in_file(path: &Path) -> impl Fn(Error) -> Failure + '_ {
    move |e| Failure::Lib(e, Some(path.display().to_string()))
}

fn read(path: &Path) -> Res<String> {
    std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

struct Ctx {
    dim_cap: usize,
    allow_heuristic: bool,
    seed: u64,
}

impl Ctx {
    fn cap(&self, dim: usize, path: &Path) -> Res<()> {
        if dim > self.dim_cap {
            return Err(Failure::Lib(Error::ResourceLimit(format!("dimension {dim} exceeds --dim-cap {}", self.dim_cap)), Some(path.display().to_string())));
        }
        Ok(())
    }

    fn operator(&self, path: &Path) -> Res<Hermitian> {
        let h = setdiv::hermitian::operator_from_json(&read(path)?).map_err(in_file(path))?;
        self.cap(h.dim(), path)?;
        Ok(h)
    }

    fn family(&self, path: &Path) -> Res<SetFamily> {
        let f = family_from_json(&read(path)?).map_err(in_file(path))?;
        self.cap(f.base().dim(), path)?;
        Ok(f)
    }

    fn set(&self, path: &Path, copies: usize) -> Res<StateSet> {
        let s = self.family(path)?.at(copies).map_err(in_file(path))?;
        self.cap(s.dim(), path)?;
        Ok(s)
    }

    fn gate(&self, heuristic: bool, what: &str) -> Res<()> {
        if heuristic && !self.allow_heuristic {
            return Err(Failure::Heuristic(format!("{what} did not certify its result; rerun with --allow-heuristic to see it")));
        }
        Ok(())
    }
}

fn need(v: Option<f64>, name: &'static str) -> Res<f64> {
    v.ok_or_else(|| Failure::Lib(Error::Config(format!("--{name} is required for this kind")), None))
}

fn to_json<T: Serialize>(x: &T) -> String {
    serde_json::to_string_pretty(x).expect("serializable")
}

fn csv_doc(header: &[&str], rows: Vec<Vec<String>>) -> Res<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| Failure::Io(e.to_string());
    w.write_record(header).map_err(err)?;
    for r in rows {
        w.write_record(&r).map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("ascii"))
}

fn no_csv(format: Format, cmd: &str) -> Res<()> {
    if format == Format::Csv {
        return Err(Failure::Lib(Error::Config(format!("`{cmd}` has no tabular form; use --format json")), None));
    }
    Ok(())
}

fn div(ctx: &Ctx, format: Format, kind: DivKind, alpha: Option<f64>, epsilon: Option<f64>, ball: BallKind, rho: &Path, sigma: &Path) -> Res<String> {
    let (r, s) = (ctx.operator(rho)?, ctx.operator(sigma)?);
    let value = match kind {
        DivKind::Umegaki => divergences::umegaki(&r, &s)?.value,
        DivKind::Petz => divergences::petz(need(alpha, "alpha")?, &r, &s)?.value,
        DivKind::Sandwiched => divergences::sandwiched(need(alpha, "alpha")?, &r, &s)?.value,
        DivKind::Dmin => divergences::dmin(&r, &s)?.value,
        DivKind::Dmax => divergences::dmax(&r, &s)?.value,
        DivKind::Measured => {
            let m = measured::dm(&r, &s)?;
            ctx.gate(!m.converged, "the measured relative entropy solver")?;
            m.value
        }
        DivKind::MeasuredAlpha => {
            let m = measured::dm_alpha(need(alpha, "alpha")?, &r, &s)?;
            ctx.gate(!m.converged, "the measured Renyi solver")?;
            m.value
        }
        DivKind::Hypo => divergences::beta_and_dhypo(need(epsilon, "epsilon")?, &r, &s)?.dh,
        DivKind::SmoothedDmax => {
            let b = match ball {
                BallKind::Purified => Ball::Purified,
                BallKind::Trace => Ball::Trace,
                BallKind::TraceNormalized => Ball::TraceNormalized,
            };
            divergences::dmax_smoothed(need(epsilon, "epsilon")?, &r, &s, b)?.value
        }
    };
    match format {
        Format::Json => Ok(serde_json::to_string(&value).expect("serializable") + "\n"),
        Format::Csv => csv_doc(&["value"], vec![vec![value.to_string()]]),
    }
}

fn setdiv_cmd(ctx: &Ctx, kind: SetKind, alpha: Option<f64>, epsilon: Option<f64>, copies: usize, a: &Path, b: &Path) -> Res<String> {
    let (sa, sb) = (ctx.set(a, copies)?, ctx.set(b, copies)?);
    let r = match kind {
        SetKind::Measured => sd::dm_sets(&sa, &sb)?,
        SetKind::MeasuredAlpha => sd::dm_alpha_sets(need(alpha, "alpha")?, &sa, &sb)?,
        SetKind::Umegaki => sd::d_sets(&sa, &sb)?,
        SetKind::Petz => sd::petz_sets(need(alpha, "alpha")?, &sa, &sb)?,
        SetKind::Sandwiched => sd::sandwiched_sets(need(alpha, "alpha")?, &sa, &sb)?,
        SetKind::Dmin => sd::dmin_sets(&sa, &sb)?,
        SetKind::Dmax => sd::dmax_sets(&sa, &sb)?,
        SetKind::Hypo => {
            let h = sd::dhypo_sets(need(epsilon, "epsilon")?, &sa, &sb)?;
            ctx.gate(h.result.heuristic, "the composite test")?;
            return Ok(to_json(&json!({
                "result": h.result,
                "beta": h.beta,
                "type1": h.test.type1,
                "type2": h.test.type2,
            })));
        }
    };
    ctx.gate(r.heuristic, "the set solver")?;
    Ok(to_json(&r))
}

fn fmt_value(v: Value) -> String {
    match v {
        Value::Finite(x) if x == f64::NEG_INFINITY => "-inf".into(),
        v => v.to_string(),
    }
}

fn aep_cmd(ctx: &Ctx, format: Format, m_max: usize, a: &Path, b: &Path) -> Res<String> {
    let (fa, fb) = (ctx.family(a)?, ctx.family(b)?);
    let est = regularized_estimate(&fa, &fb, m_max)?;
    ctx.gate(est.heuristic, "the sandwich table")?;
    match format {
        Format::Json => Ok(to_json(&est)),
        Format::Csv => csv_doc(
            &["m", "lower", "upper", "gap_guarantee", "heuristic"],
            est.rows.iter().map(|r| vec![r.m.to_string(), fmt_value(r.lower), fmt_value(r.upper), r.gap_guarantee.to_string(), r.heuristic.to_string()]).collect(),
        ),
    }
}

fn stein_cmd(ctx: &Ctx, format: Format, epsilon: f64, n_max: usize, a: &Path, b: &Path) -> Res<String> {
    let (fa, fb) = (ctx.family(a)?, ctx.family(b)?);
    let t = stein::stein_table(&fa, &fb, epsilon, n_max)?;
    ctx.gate(t.rows.iter().any(|r| r.heuristic), "the Stein table")?;
    match format {
        Format::Json => Ok(to_json(&t)),
        Format::Csv => Ok(t.to_csv()?),
    }
}

fn rate_cmd(ctx: &Ctx, m_max: usize, a: &Path, b: &Path, free_a: &Path, free_b: Option<&Path>) -> Res<String> {
    let (fa, fb, pa) = (ctx.family(a)?, ctx.family(b)?, ctx.family(free_a)?);
    let pb = match free_b {
        Some(p) => ctx.family(p)?,
        None => pa.clone(),
    };
    let r = stein::rate_bounds(&fa, &fb, &pa, &pb, m_max)?;
    ctx.gate(r.heuristic, "the rate bounds")?;
    Ok(to_json(&r))
}

fn named_family(name: NamedFamily, d: usize) -> setdiv::Result<SetFamily> {
    let set = match name {
        NamedFamily::Incoherent => StateSet::incoherent(vec![d])?,
        NamedFamily::Conditional => StateSet::conditional(d, d)?,
        NamedFamily::Rains => StateSet::rains(d, d)?,
        NamedFamily::Mana => StateSet::mana(d, 1)?,
    };
    Ok(SetFamily::Iid(set))
}

fn validate_cmd(ctx: &Ctx, family: Option<NamedFamily>, d: usize, m: usize, k: usize, samples: usize, file: Option<&Path>) -> Res<String> {
    let fam = match (family, file) {
        (_, Some(p)) => ctx.family(p)?,
        (Some(name), None) => named_family(name, d)?,
        (None, None) => return Err(Failure::Lib(Error::Config("give --family or --file".into()), None)),
    };
    Ok(to_json(&validate_assumptions(&fam, m, k, samples, ctx.seed)?))
}

#[allow(clippy::too_many_arguments)]
fn protocol_cmd(ctx: &Ctx, epsilon: f64, delta: f64, n: usize, m: usize, budget: usize, a: &Path, free: &Path, b: &Path) -> Res<String> {
    let (fa, ff, fb) = (ctx.family(a)?, ctx.family(free)?, ctx.family(b)?);
    let p = stein::build_rng_protocol(&fa, &ff, &fb, n, m, epsilon, delta)?;
    let audit = stein::protocol_audit(&p, &fa, &fb, &ff, budget, ctx.seed)?;
    ctx.gate(audit.heuristic, "the protocol audit")?;
    Ok(to_json(&json!({
        "n": p.n,
        "m": p.m,
        "epsilon": p.epsilon,
        "delta": p.delta,
        "beta": p.beta,
        "test_type1": p.test.type1,
        "test_type2": p.test.type2,
        "target_dmax": p.target_dmax,
        "audit": audit,
    })))
}

fn tolerances_cmd(format: Format) -> Res<String> {
    let rows: Vec<_> = tolerances::TABLE.iter().map(|e| (e.name, e.tol.get(), e.default, e.meaning)).collect();
    match format {
        Format::Json => Ok(to_json(&rows.iter().map(|(n, v, d, m)| json!({"name": n, "value": v, "default": d, "meaning": m})).collect::<Vec<Json>>())),
        Format::Csv => csv_doc(&["name", "value", "default", "meaning"], rows.iter().map(|(n, v, d, m)| vec![n.to_string(), v.to_string(), d.to_string(), m.to_string()]).collect()),
    }
}

fn dispatch(cli: &Cli) -> Res<String> {
    let ctx = Ctx { dim_cap: cli.dim_cap, allow_heuristic: cli.allow_heuristic, seed: cli.seed };
    let f = cli.format;
    match &cli.command {
        Command::Div { kind, alpha, epsilon, ball, rho, sigma } => div(&ctx, f, *kind, *alpha, *epsilon, *ball, rho, sigma),
        Command::Setdiv { kind, alpha, epsilon, copies, a, b } => {
            no_csv(f, "setdiv")?;
            setdiv_cmd(&ctx, *kind, *alpha, *epsilon, *copies, a, b)
        }
        Command::Aep { m_max, a, b } => aep_cmd(&ctx, f, *m_max, a, b),
        Command::Stein { epsilon, n_max, a, b } => stein_cmd(&ctx, f, *epsilon, *n_max, a, b),
        Command::Rate { m_max, a, b, free_a, free_b } => {
            no_csv(f, "rate")?;
            rate_cmd(&ctx, *m_max, a, b, free_a, free_b.as_deref())
        }
        Command::Validate { family, d, m, k, samples, file } => {
            no_csv(f, "validate")?;
            validate_cmd(&ctx, *family, *d, *m, *k, *samples, file.as_deref())
        }
        Command::Protocol { epsilon, delta, n, m, budget, a, free, b } => {
            no_csv(f, "protocol")?;
            protocol_cmd(&ctx, *epsilon, *delta, *n, *m, *budget, a, free, b)
        }
        Command::Tolerances => tolerances_cmd(f),
    }
}

fn error_document(e: &Error, file: Option<&str>) -> String {
    let mut doc = json!({"error": e.to_string()});
    if let Error::Parse { pointer, message } = e {
        doc["pointer"] = json!(pointer);
        doc["message"] = json!(message);
    }
    if let Some(f) = file {
        doc["file"] = json!(f);
    }
    doc.to_string()
}

/// Parses `argv` (program name first) and runs the command.
pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PRECONDITION } else { EXIT_OK };
            let text = e.render().to_string();
            return if code == EXIT_OK {
                Outcome { code, document: Some(text), diagnostic: None, out: None }
            } else {
                Outcome { code, document: None, diagnostic: Some(text), out: None }
            };
        }
    };
    let mut overrides = Vec::with_capacity(cli.tol.len());
    for t in &cli.tol {
        match tolerances::parse_override(t) {
            Ok(o) => overrides.push(o),
            Err(e) => return Outcome { code: EXIT_PRECONDITION, document: None, diagnostic: Some(error_document(&e, None)), out: None },
        }
    }
    if !overrides.is_empty() {
        if let Err(e) = tolerances::install(&overrides) {
            return Outcome { code: EXIT_PRECONDITION, document: None, diagnostic: Some(error_document(&e, None)), out: None };
        }
    }
    match dispatch(&cli) {
        Ok(doc) => Outcome { code: EXIT_OK, document: Some(doc), diagnostic: None, out: cli.out.clone() },
        Err(Failure::Lib(e, file)) => {
            let code = if matches!(e, Error::NonConvergence { .. }) { EXIT_NONCONVERGENCE } else { EXIT_PRECONDITION };
            Outcome { code, document: None, diagnostic: Some(error_document(&e, file.as_deref())), out: None }
        }
        Err(Failure::Heuristic(msg)) => Outcome { code: EXIT_NONCONVERGENCE, document: None, diagnostic: Some(json!({"error": msg}).to_string()), out: None },
        Err(Failure::Io(msg)) => Outcome { code: EXIT_IO, document: None, diagnostic: Some(json!({"error": msg}).to_string()), out: None },
    }
}

/// Parses arguments without running anything.
pub fn parse_args<I, T>(argv: I) -> Result<Cli, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    Cli::try_parse_from(argv)
}

/// Where the document goes.
pub fn emit(out: Option<&Path>, doc: &str) -> std::io::Result<()> {
    match out {
        Some(p) => std::fs::write(p, doc),
        None => {
            use std::io::Write;
            let mut s = std::io::stdout().lock();
            s.write_all(doc.as_bytes())?;
            if !doc.ends_with('\n') {
                s.write_all(b"\n")?;
            }
            Ok(())
        }
    }
}
