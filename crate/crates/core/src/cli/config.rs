//! Flat `key = value` run configuration.
//!
//! ```text
//! # comment
//! omega_m = 10
//! axis1 = Delta
//! axis1_start = -100
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use crate::params::{ParamSet, EFFECTIVE_KEYS, RAW_KEYS, SHARED_KEYS};
use crate::steady_state::{BranchPolicy, DriveOffset};
use crate::sweep::{Axis, GridSpec, SweepKind};

const RUN_KEYS: [&str; 8] = ["command", "kind", "out", "format", "plot", "branch", "drive_offset", "jobs"];
const AXIS_SUFFIXES: [&str; 4] = ["", "_start", "_stop", "_count"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Bistability,
    Spectrum,
    Entanglement,
    Stability,
    Sweep,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Bistability => "bistability",
            Command::Spectrum => "spectrum",
            Command::Entanglement => "entanglement",
            Command::Stability => "stability",
            Command::Sweep => "sweep",
        }
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "bistability" => Ok(Command::Bistability),
            "spectrum" => Ok(Command::Spectrum),
            "entanglement" => Ok(Command::Entanglement),
            "stability" => Ok(Command::Stability),
            "sweep" => Ok(Command::Sweep),
            _ => Err(format!("unknown command `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn as_str(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(format!("unknown format `{s}` (expected csv or json)")),
        }
    }
}

/// Everything one invocation needs, after defaults are filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub params: ParamSet,
    pub grid: GridSpec,
    /// Stage evaluated by the `sweep` command.
    pub kind: Option<SweepKind>,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub plot: bool,
    pub branch: BranchPolicy,
    pub offset: DriveOffset,
    pub jobs: usize,
}

fn is_known_key(k: &str) -> bool {
    if RAW_KEYS.contains(&k) || EFFECTIVE_KEYS.contains(&k) || SHARED_KEYS.contains(&k) || RUN_KEYS.contains(&k) {
        return true;
    }
    ["axis1", "axis2"].iter().any(|a| AXIS_SUFFIXES.iter().any(|s| k == format!("{a}{s}")))
}

/// Parse a config document into its key/value pairs.
pub fn parse_document(text: &str) -> Result<BTreeMap<String, String>, String> {
    let mut map = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| format!("line {}: expected `key = value`", n + 1))?;
        let (k, v) = (k.trim(), v.trim());
        if !is_known_key(k) {
            return Err(format!("line {}: unknown key `{k}`", n + 1));
        }
        if v.is_empty() {
            return Err(format!("line {}: key `{k}` has no value", n + 1));
        }
        if map.insert(k.to_string(), v.to_string()).is_some() {
            return Err(format!("line {}: key `{k}` given twice", n + 1));
        }
    }
    Ok(map)
}

fn parse_num<T: FromStr>(key: &str, v: &str) -> Result<T, String> {
    v.parse().map_err(|_| format!("key `{key}`: cannot parse `{v}`"))
}

fn parse_bool(key: &str, v: &str) -> Result<bool, String> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(format!("key `{key}`: expected true or false, got `{v}`")),
    }
}

impl RunConfig {
    /// Build from a document whose keys have already been merged with CLI
    /// overrides. `command` is the subcommand given on the command line.
    pub fn from_document(command: Command, doc: &BTreeMap<String, String>) -> Result<Self, String> {
        for k in doc.keys() {
            if !is_known_key(k) {
                return Err(format!("unknown key `{k}`"));
            }
        }
        if let Some(c) = doc.get("command") {
            let c: Command = c.parse()?;
            if c != command {
                return Err(format!("config is for command `{}`, not `{}`", c.as_str(), command.as_str()));
            }
        }
        let mut pairs = BTreeMap::new();
        for (k, v) in doc {
            if RAW_KEYS.contains(&k.as_str()) || EFFECTIVE_KEYS.contains(&k.as_str()) || SHARED_KEYS.contains(&k.as_str()) {
                pairs.insert(k.clone(), parse_num::<f64>(k, v)?);
            }
        }
        let params = ParamSet::from_pairs(&pairs).map_err(|e| e.to_string())?;

        let kind = match doc.get("kind") {
            Some(k) if command == Command::Sweep => Some(k.parse::<SweepKind>().map_err(|e| e.to_string())?),
            Some(_) => return Err(format!("key `kind` only applies to the sweep command, not `{}`", command.as_str())),
            None if command == Command::Sweep => return Err("the sweep command needs `kind` (--kind)".into()),
            None => None,
        };
        let format = match doc.get("format") {
            Some(f) => f.parse()?,
            None => match doc.get("out") {
                Some(o) if o.ends_with(".json") => Format::Json,
                _ => Format::Csv,
            },
        };
        let plot = doc.get("plot").map(|v| parse_bool("plot", v)).transpose()?.unwrap_or(false);
        let branch = doc.get("branch").map(|v| v.parse::<BranchPolicy>().map_err(|e| e.to_string())).transpose()?.unwrap_or_default();
        let offset = doc.get("drive_offset").map(|v| v.parse::<DriveOffset>().map_err(|e| e.to_string())).transpose()?.unwrap_or_default();
        let jobs = doc.get("jobs").map(|v| parse_num::<usize>("jobs", v)).transpose()?.unwrap_or(0);
        let out = doc.get("out").map(PathBuf::from);
        if plot && out.is_none() {
            return Err("--plot needs --out (the plot is written next to the table)".into());
        }

        let omega_m = match &params {
            ParamSet::Raw(r) => r.omega_m,
            ParamSet::Effective(e) => e.omega_m,
        };
        let grid = Self::grid(command, kind, doc, omega_m)?;
        grid.validate().map_err(|e| e.to_string())?;
        Ok(Self { command, params, grid, kind, out, format, plot, branch, offset, jobs })
    }

    fn grid(command: Command, kind: Option<SweepKind>, doc: &BTreeMap<String, String>, omega_m: f64) -> Result<GridSpec, String> {
        let spectral = command == Command::Spectrum || kind == Some(SweepKind::Spectrum);
        let defaults = [
            Axis::new("Delta", -100.0, 300.0, 401),
            Axis::new("omega", 0.0, 2.0 * omega_m, 401),
        ];
        let mut axes = Vec::new();
        for (i, key) in ["axis1", "axis2"].iter().enumerate() {
            let given = AXIS_SUFFIXES.iter().any(|s| doc.contains_key(&format!("{key}{s}")));
            let default = if i == 0 || spectral { Some(&defaults[i]) } else { None };
            let base = match (given, default) {
                (false, None) => continue,
                (false, Some(d)) => {
                    axes.push(d.clone());
                    continue;
                }
                (true, d) => d.cloned(),
            };
            let get = |s: &str| doc.get(&format!("{key}{s}"));
            let name = match (get(""), &base) {
                (Some(n), _) => n.clone(),
                (None, Some(b)) => b.name.clone(),
                (None, None) => return Err(format!("`{key}` is required when other {key} keys are given")),
            };
            let pick = |s: &str, dflt: Option<f64>| -> Result<f64, String> {
                match get(s) {
                    Some(v) => parse_num(&format!("{key}{s}"), v),
                    None => dflt.ok_or_else(|| format!("`{key}{s}` is required")),
                }
            };
            let same = base.as_ref().filter(|b| b.name == name);
            let start = pick("_start", same.map(|b| b.start))?;
            let stop = pick("_stop", same.map(|b| b.stop))?;
            let count = match get("_count") {
                Some(v) => parse_num(&format!("{key}_count"), v)?,
                None => same.map(|b| b.count).ok_or_else(|| format!("`{key}_count` is required"))?,
            };
            axes.push(Axis::new(&name, start, stop, count));
        }
        Ok(GridSpec { axes })
    }

    /// Serialize so that [`RunConfig::from_document`] reproduces `self`.
    pub fn to_document(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "command = {}", self.command.as_str());
        if let Some(k) = self.kind {
            let _ = writeln!(s, "kind = {}", k.as_str());
        }
        for (k, v) in self.params.to_pairs() {
            let _ = writeln!(s, "{k} = {v}");
        }
        for (i, a) in self.grid.axes.iter().enumerate() {
            let _ = writeln!(s, "axis{n} = {}\naxis{n}_start = {}\naxis{n}_stop = {}\naxis{n}_count = {}", a.name, a.start, a.stop, a.count, n = i + 1);
        }
        if let Some(o) = &self.out {
            let _ = writeln!(s, "out = {}", o.display());
        }
        let _ = writeln!(s, "format = {}", self.format.as_str());
        let _ = writeln!(s, "plot = {}", self.plot);
        let _ = writeln!(s, "branch = {}", self.branch.as_str());
        let _ = writeln!(s, "drive_offset = {}", self.offset.as_str());
        let _ = writeln!(s, "jobs = {}", self.jobs);
        s
    }
}
