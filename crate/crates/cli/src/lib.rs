//! Command-line front end for `orbitbound`.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use num_rational::BigRational;

use orbitbound::arith::parse_rational;
use orbitbound::fields::FieldCache;
use orbitbound::instance::{load_instance, parse_list, Instance};
use orbitbound::invariants::{BoundConstants, EvalConfig};
use orbitbound::report::{self, Report};
use orbitbound::{Error, ErrorClass, Result};

mod oracle;

pub use oracle::{oracle_checks, OracleCheck};

#[derive(Parser, Debug)]
#[command(name = "orbitbound", version, about = "Galois-orbit bound invariants for special subvarieties")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Boundedness threshold for `classify`.
    #[arg(long, global = true, value_parser = parse_threshold)]
    threshold: Option<BigRational>,

    /// Override bound constants, e.g. `b=1,cN=1/2,c0=3,N=2`.
    #[arg(long, global = true)]
    constants: Option<String>,

    /// Extra p-adic precision allowed beyond the deepest level before giving up.
    #[arg(long, global = true)]
    precision_max: Option<u32>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,

    /// Discriminant and class-number cache file, created if missing.
    #[arg(long, global = true)]
    cache: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Test invariant with all intermediate data.
    Tau { instance: PathBuf },
    /// Lower and upper Galois-orbit bounds.
    Bounds { instance: PathBuf },
    /// Defect prime sets and stabilizer indices.
    Defects { instance: PathBuf },
    /// Classify a list of instances by boundedness of τ.
    Classify { list: PathBuf },
    /// Deepen the first listed instance's level until every listed w stabilizes it.
    Intersect { list: PathBuf },
    /// Brute-force cross-checks of the arithmetic routines.
    Oracle,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Json,
}

fn parse_threshold(s: &str) -> std::result::Result<BigRational, String> {
    parse_rational(s).ok_or_else(|| format!("not a rational number: {s}"))
}

pub fn parse_constants(spec: &str, base: &BoundConstants) -> Result<BoundConstants> {
    let (mut b, mut c_n, mut c0, mut n) = (base.b.clone(), base.c_n.clone(), base.c0.clone(), base.n);
    for part in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (key, value) =
            part.split_once('=').ok_or_else(|| Error::Invalid(format!("expected key=value, got '{part}'")))?;
        let bad = || Error::Invalid(format!("bad value for {key}: '{value}'"));
        match key.trim() {
            "b" => b = parse_rational(value.trim()).ok_or_else(bad)?,
            "cN" => c_n = parse_rational(value.trim()).ok_or_else(bad)?,
            "c0" => c0 = parse_rational(value.trim()).ok_or_else(bad)?,
            "N" => n = value.trim().parse().map_err(|_| bad())?,
            other => return Err(Error::Invalid(format!("unknown constant '{other}'"))),
        }
    }
    BoundConstants::new(b, c_n, c0, n)
}

pub fn exit_code(e: &Error) -> i32 {
    match e.class() {
        ErrorClass::Validation => 2,
        ErrorClass::Precision => 3,
        ErrorClass::Unsupported => 4,
    }
}

fn load_list(path: &Path) -> Result<Vec<PathBuf>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))?;
    Ok(parse_list(&text, path.parent().unwrap_or(Path::new("."))))
}

struct Session {
    cfg: EvalConfig,
    constants: Option<String>,
}

impl Session {
    fn load(&self, path: &Path) -> Result<Instance> {
        let mut inst = load_instance(path)?;
        if let Some(spec) = &self.constants {
            inst.constants = parse_constants(spec, &inst.constants)?;
        }
        Ok(inst)
    }

    fn config_for(&self, inst: &Instance) -> EvalConfig {
        let mut cfg = self.cfg.clone();
        cfg.constants = inst.constants.clone();
        cfg
    }

    fn load_all(&self, list: &Path) -> Result<Vec<Instance>> {
        load_list(list)?.iter().map(|p| self.load(p)).collect()
    }
}

fn execute(cli: &Cli, out: &mut dyn Write) -> Result<i32> {
    let cache = match &cli.cache {
        Some(path) => Some(Arc::new(FieldCache::load(path)?)),
        None => None,
    };
    let mut cfg = EvalConfig { cache: cache.clone(), ..EvalConfig::default() };
    if let Some(m) = cli.precision_max {
        cfg.policy.extra_max = m;
    }
    let session = Session { cfg, constants: cli.constants.clone() };
    let report: Report = match &cli.command {
        Command::Tau { instance } => {
            let inst = session.load(instance)?;
            report::tau_report(&inst, &session.config_for(&inst))?
        }
        Command::Bounds { instance } => {
            let inst = session.load(instance)?;
            report::bounds_report(&inst, &session.config_for(&inst))?
        }
        Command::Defects { instance } => {
            let inst = session.load(instance)?;
            report::defects_report(&inst, &session.config_for(&inst))?
        }
        Command::Classify { list } => {
            let threshold =
                cli.threshold.clone().ok_or_else(|| Error::Invalid("classify requires --threshold".into()))?;
            let items = session.load_all(list)?;
            let cfg = items.first().map_or_else(|| session.cfg.clone(), |i| session.config_for(i));
            report::classify_report(&items, &threshold, &cfg)?
        }
        Command::Intersect { list } => {
            let items = session.load_all(list)?;
            report::intersect_report(&items, &session.cfg)?
        }
        Command::Oracle => {
            let checks = oracle_checks();
            let ok = checks.iter().all(|c| c.pass);
            let text = match cli.format {
                Format::Table => oracle::render_table(&checks),
                Format::Json => serde_json::to_string_pretty(&checks).expect("serializable") + "\n",
            };
            write_out(out, &text)?;
            return Ok(if ok { 0 } else { 1 });
        }
    };
    let text = match cli.format {
        Format::Table => report.to_table(),
        Format::Json => report.to_json(),
    };
    write_out(out, &text)?;
    if let (Some(path), Some(cache)) = (&cli.cache, &cache) {
        cache.save(path)?;
    }
    Ok(0)
}

fn write_out(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes()).map_err(|e| Error::Invalid(format!("writing output: {e}")))
}

/// Parse `argv` (including the program name), run, and return the exit code.
pub fn run<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            let _ = if code == 0 { out.write_all(rendered.as_bytes()) } else { err.write_all(rendered.as_bytes()) };
            return code;
        }
    };
    match execute(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}
