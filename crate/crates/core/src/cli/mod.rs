//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 for usage and configuration errors, 2 when
//! the numerics fail (for example no stable steady state anywhere on the grid).

pub mod config;
pub mod plot;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::Error;
use crate::spectrum::nms_map;
use crate::sweep::{nms_table, run_sweep, Cell, ResultTable, SweepKind, SweepOptions};

pub use config::{parse_document, Command, Format, RunConfig};
pub use plot::emit_plot;

#[derive(Parser, Debug)]
#[command(name = "ioncav", version, about = "Steady states, fluctuation spectra and entanglement of a trapped ion in an optical cavity")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Photon-number roots and their stability along the grid
    Bistability(Common),
    /// Displacement spectrum map over detuning and frequency
    Spectrum(Common),
    /// Logarithmic negativity along the grid
    Entanglement(Common),
    /// Routh-Hurwitz and eigenvalue stability along the grid
    Stability(Common),
    /// Any stage over an arbitrary one- or two-axis grid
    Sweep {
        /// Stage to evaluate: bistability, spectrum, entanglement or stability
        #[arg(long)]
        kind: Option<String>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// Flat `key = value` config file
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output table (stdout when omitted)
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, value_parser = ["csv", "json"])]
    format: Option<String>,
    /// Also write an SVG plot next to the output table
    #[arg(long)]
    plot: bool,
    #[arg(long, value_parser = ["smallest-stable", "largest-stable"])]
    branch: Option<String>,
    /// Worker threads (0 = one per core, 1 = serial)
    #[arg(long, value_name = "N")]
    jobs: Option<usize>,
    /// Print the resolved configuration and exit
    #[arg(long)]
    dump_config: bool,
    /// Override a config key
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Numerical(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Numerical(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Numerical(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParams(_)
            | Error::SingularDetuning
            | Error::InvalidScale(_)
            | Error::UnknownAxis(_)
            | Error::InvalidGrid(_) => Failure::Usage(e.to_string()),
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

/// Run the tool on `args` (including the program name) and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("ioncav: {}", f.message());
            f.code()
        }
    }
}

fn execute(cli: Cli) -> Result<(), Failure> {
    let (command, kind, common) = match cli.command {
        Cmd::Bistability(c) => (Command::Bistability, None, c),
        Cmd::Spectrum(c) => (Command::Spectrum, None, c),
        Cmd::Entanglement(c) => (Command::Entanglement, None, c),
        Cmd::Stability(c) => (Command::Stability, None, c),
        Cmd::Sweep { kind, common } => (Command::Sweep, kind, common),
    };
    let doc = merged_document(&common, kind)?;
    let cfg = RunConfig::from_document(command, &doc).map_err(Failure::Usage)?;
    if common.dump_config {
        print!("{}", cfg.to_document());
        return Ok(());
    }
    let table = compute(&cfg)?;
    let text = match cfg.format {
        Format::Csv => table.to_csv()?,
        Format::Json => table.to_json()?,
    };
    match &cfg.out {
        Some(path) => {
            write_atomic(path, &text)?;
            eprintln!("ioncav: wrote {} ({} rows)", path.display(), table.rows.len());
            if cfg.plot {
                let svg_path = path.with_extension("svg");
                write_atomic(&svg_path, &emit_plot(&table)?)?;
                eprintln!("ioncav: wrote {}", svg_path.display());
            }
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(|e| Failure::Usage(format!("cannot write output: {e}")))?;
        }
    }
    check_outcome(&cfg, &table)
}

fn merged_document(common: &Common, kind: Option<String>) -> Result<BTreeMap<String, String>, Failure> {
    let mut doc = match &common.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", p.display())))?;
            parse_document(&text).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?
        }
        None => BTreeMap::new(),
    };
    for s in &common.set {
        let pair = parse_document(s).map_err(|e| Failure::Usage(format!("--set {s}: {e}")))?;
        if pair.is_empty() {
            return Err(Failure::Usage(format!("--set {s}: expected KEY=VALUE")));
        }
        doc.extend(pair);
    }
    let mut put = |k: &str, v: Option<String>| {
        if let Some(v) = v {
            doc.insert(k.to_string(), v);
        }
    };
    put("kind", kind);
    put("out", common.out.as_ref().map(|p| p.display().to_string()));
    put("format", common.format.clone());
    put("branch", common.branch.clone());
    put("jobs", common.jobs.map(|j| j.to_string()));
    if common.plot {
        put("plot", Some("true".into()));
    }
    Ok(doc)
}

fn compute(cfg: &RunConfig) -> Result<ResultTable, Failure> {
    let eff = cfg.params.effective()?.checked()?;
    let opts = SweepOptions { offset: cfg.offset, policy: cfg.branch, jobs: cfg.jobs };
    let kind = match cfg.command {
        Command::Bistability => SweepKind::Bistability,
        Command::Entanglement => SweepKind::Entanglement,
        Command::Stability => SweepKind::Stability,
        Command::Sweep => cfg.kind.ok_or_else(|| Failure::Usage("the sweep command needs --kind".into()))?,
        Command::Spectrum => {
            let names: Vec<&str> = cfg.grid.axes.iter().map(|a| a.name.as_str()).collect();
            if names != ["Delta", "omega"] {
                return Err(Failure::Usage("the spectrum command needs axis1 = Delta and axis2 = omega".into()));
            }
            let map = nms_map(&eff, &cfg.grid.axes[0].values(), &cfg.grid.axes[1].values(), cfg.offset, cfg.branch, cfg.jobs)?;
            return Ok(nms_table(&map, &eff, &cfg.grid, &opts));
        }
    };
    Ok(run_sweep(&eff, &cfg.grid, kind, &opts)?)
}

fn check_outcome(cfg: &RunConfig, table: &ResultTable) -> Result<(), Failure> {
    if table.rows.iter().all(|r| r.error.is_some()) {
        let first = table.rows.first().and_then(|r| r.error.clone()).unwrap_or_default();
        return Err(Failure::Numerical(format!("every grid point failed; first error: {first}")));
    }
    let needs_stable = match cfg.command {
        Command::Spectrum | Command::Entanglement => true,
        Command::Sweep => matches!(cfg.kind, Some(SweepKind::Spectrum | SweepKind::Entanglement)),
        _ => false,
    };
    let any_stable = match table.column("stable") {
        Some(j) => table.rows.iter().any(|r| r.cells[j] == Cell::Bool(true)),
        None => table.rows.iter().any(|r| r.error.is_none() && r.cells.iter().skip(1).any(|c| c.as_f64().is_some())),
    };
    if needs_stable && !any_stable {
        return Err(Failure::Numerical("no stable steady state anywhere on the grid".into()));
    }
    Ok(())
}

/// Write through a temporary file in the target directory, then rename.
fn write_atomic(path: &Path, text: &str) -> Result<(), Failure> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let fail = |e: std::io::Error| Failure::Usage(format!("cannot write {}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(fail)?;
    tmp.write_all(text.as_bytes()).map_err(fail)?;
    tmp.persist(path).map_err(|e| fail(e.error))?;
    Ok(())
}
