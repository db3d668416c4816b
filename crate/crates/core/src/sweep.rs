//! Parameter grids over the pipeline stages and the tables they produce.
//!
//! Rate-valued columns are reported in units of the cavity linewidth and
//! carry an `_over_gamma` suffix. `S_b` is reported as `gamma * S_b`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde_json::{Map, Value};

use crate::entanglement::{log_negativity, steady_covariance};
use crate::error::{Error, Result};
use crate::langevin::{drift_for, max_real_eigenvalue, routh_hurwitz_stable};
use crate::parallel::map_ordered;
use crate::params::{EffectiveParams, ParamSet};
use crate::spectrum::{displacement_spectrum, NmsMap};
use crate::steady_state::{steady_branches, BranchPolicy, DriveOffset};

/// Names accepted as sweep axes.
pub const AXIS_KEYS: [&str; 10] =
    ["Delta", "g_o", "eta_pump_re", "eta_pump_im", "omega_m", "gamma", "Gamma", "n_a", "n_b", "omega"];

/// One evenly spaced axis, endpoints included.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub name: String,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Axis {
    pub fn new(name: &str, start: f64, stop: f64, count: usize) -> Self {
        Self { name: name.to_string(), start, stop, count }
    }

    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let n = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| if i + 1 == self.count { self.stop } else { self.start + (self.stop - self.start) * i as f64 / n })
            .collect()
    }

    fn check(&self) -> Result<()> {
        if !AXIS_KEYS.contains(&self.name.as_str()) {
            return Err(Error::UnknownAxis(self.name.clone()));
        }
        if !self.start.is_finite() || !self.stop.is_finite() || self.start > self.stop {
            return Err(Error::InvalidGrid(format!("axis `{}` needs finite start <= stop", self.name)));
        }
        if self.count == 0 {
            return Err(Error::InvalidGrid(format!("axis `{}` needs count >= 1", self.name)));
        }
        Ok(())
    }
}

/// One or two axes; points are enumerated row-major with the first axis outer.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub axes: Vec<Axis>,
}

impl GridSpec {
    pub fn one(axis: Axis) -> Self {
        Self { axes: vec![axis] }
    }

    pub fn two(outer: Axis, inner: Axis) -> Self {
        Self { axes: vec![outer, inner] }
    }

    pub fn validate(&self) -> Result<()> {
        if self.axes.is_empty() || self.axes.len() > 2 {
            return Err(Error::InvalidGrid(format!("expected 1 or 2 axes, got {}", self.axes.len())));
        }
        for a in &self.axes {
            a.check()?;
        }
        if self.axes.len() == 2 && self.axes[0].name == self.axes[1].name {
            return Err(Error::InvalidGrid(format!("axis `{}` given twice", self.axes[0].name)));
        }
        Ok(())
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.count).collect()
    }

    /// Every grid point as a list of axis values, in canonical order.
    pub fn points(&self) -> Vec<Vec<f64>> {
        let vals: Vec<Vec<f64>> = self.axes.iter().map(Axis::values).collect();
        match vals.as_slice() {
            [a] => a.iter().map(|&x| vec![x]).collect(),
            [a, b] => a.iter().flat_map(|&x| b.iter().map(move |&y| vec![x, y])).collect(),
            _ => Vec::new(),
        }
    }

    pub fn has_axis(&self, name: &str) -> bool {
        self.axes.iter().any(|a| a.name == name)
    }
}

/// Pipeline stage evaluated at each grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepKind {
    Bistability,
    Spectrum,
    Entanglement,
    Stability,
}

impl SweepKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepKind::Bistability => "bistability",
            SweepKind::Spectrum => "spectrum",
            SweepKind::Entanglement => "entanglement",
            SweepKind::Stability => "stability",
        }
    }

    /// Columns produced after the axis columns.
    pub fn value_columns(self) -> &'static [&'static str] {
        match self {
            SweepKind::Bistability => &["x_root1", "x_root2", "x_root3", "stable1", "stable2", "stable3"],
            SweepKind::Spectrum => &["Delta_tilde_over_gamma", "g2_over_gamma", "S_b"],
            SweepKind::Entanglement => &["Delta_tilde_over_gamma", "g2_over_gamma", "stable", "E_N"],
            SweepKind::Stability => {
                &["Delta_tilde_over_gamma", "g2_over_gamma", "x", "rh_stable", "eig_stable", "max_re_eig_over_gamma"]
            }
        }
    }
}

impl fmt::Display for SweepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SweepKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bistability" => Ok(SweepKind::Bistability),
            "spectrum" => Ok(SweepKind::Spectrum),
            "entanglement" => Ok(SweepKind::Entanglement),
            "stability" => Ok(SweepKind::Stability),
            _ => Err(Error::InvalidGrid(format!("unknown sweep kind `{s}`"))),
        }
    }
}

/// Settings shared by every point of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    pub offset: DriveOffset,
    pub policy: BranchPolicy,
    /// Worker count; `0` picks one per core, `1` runs serially.
    pub jobs: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self { offset: DriveOffset::default(), policy: BranchPolicy::default(), jobs: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Num(f64),
    Bool(bool),
    /// Absent value, e.g. a missing root.
    Empty,
    /// Value unavailable because the point has no stable steady state.
    Na,
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(x) => Some(*x),
            _ => None,
        }
    }

    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => format_number(*x),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
            Cell::Na => "NA".into(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) => serde_json::Number::from_f64(*x).map_or(Value::Null, Value::Number),
            Cell::Bool(b) => Value::Bool(*b),
            Cell::Empty | Cell::Na => Value::Null,
        }
    }
}

/// Numbers in text output: 17 significant digits.
pub fn format_number(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub cells: Vec<Cell>,
    /// Set when the point could not be evaluated; value cells are then empty.
    pub error: Option<String>,
}

/// Result of a sweep, in canonical grid order.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub kind: String,
    pub columns: Vec<String>,
    /// Number of points along each axis; the leading `shape.len()` columns
    /// hold axis values unless the table is a wide map.
    pub shape: Vec<usize>,
    pub rows: Vec<Row>,
    /// `# key = value` header lines.
    pub provenance: Vec<(String, String)>,
}

impl ResultTable {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Numeric values of a column, `None` where the cell is not a number.
    pub fn numbers(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let j = self.column(name)?;
        Some(self.rows.iter().map(|r| r.cells[j].as_f64()).collect())
    }

    pub fn error_count(&self) -> usize {
        self.rows.iter().filter(|r| r.error.is_some()).count()
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut out = String::new();
        for (k, v) in &self.provenance {
            out.push_str(&format!("# {k} = {v}\n"));
        }
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        let io = |e: csv::Error| Error::InvalidGrid(e.to_string());
        w.write_record(&self.columns).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.cells.iter().map(Cell::csv)).map_err(io)?;
        }
        let body = w.into_inner().map_err(|e| Error::InvalidGrid(e.to_string()))?;
        out.push_str(&String::from_utf8_lossy(&body));
        for (i, row) in self.rows.iter().enumerate() {
            if let Some(e) = &row.error {
                out.push_str(&format!("# error row {} = {}\n", i + 1, e.replace('\n', " ")));
            }
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Result<String> {
        let provenance: Map<String, Value> =
            self.provenance.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect();
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let mut obj: Map<String, Value> =
                    self.columns.iter().zip(&r.cells).map(|(c, v)| (c.clone(), v.json())).collect();
                if let Some(e) = &r.error {
                    obj.insert("error".into(), Value::String(e.clone()));
                }
                Value::Object(obj)
            })
            .collect();
        let mut doc = Map::new();
        doc.insert("provenance".into(), Value::Object(provenance));
        doc.insert("rows".into(), Value::Array(rows));
        let mut s = serde_json::to_string_pretty(&Value::Object(doc)).map_err(|e| Error::InvalidGrid(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }
}

/// Column name for an axis: rates are divided by `gamma`.
pub fn axis_column(name: &str) -> String {
    match name {
        "n_a" | "n_b" | "gamma" => name.to_string(),
        _ => format!("{name}_over_gamma"),
    }
}

fn axis_value_in_table(name: &str, value: f64, gamma: f64) -> f64 {
    match name {
        "n_a" | "n_b" | "gamma" => value,
        _ => value / gamma,
    }
}

/// `eff` with the named parameter replaced by `value`.
pub fn with_axis(eff: &EffectiveParams, name: &str, value: f64) -> Result<EffectiveParams> {
    let mut e = *eff;
    match name {
        "Delta" => e.delta = value,
        "g_o" => e.g0 = value,
        "eta_pump_re" => e.pump.re = value,
        "eta_pump_im" => e.pump.im = value,
        "omega_m" => e.omega_m = value,
        "gamma" => e.gamma = value,
        "Gamma" => e.gamma_m = value,
        "n_a" => e.n_a = value,
        "n_b" => e.n_b = value,
        "omega" => {}
        _ => return Err(Error::UnknownAxis(name.to_string())),
    }
    Ok(e)
}

/// Header lines describing a run. Contains no timestamps so repeated runs
/// produce identical files.
pub fn provenance(kind: &str, eff: &EffectiveParams, grid: &GridSpec, opts: &SweepOptions) -> Vec<(String, String)> {
    let mut p = vec![
        ("tool".to_string(), format!("ioncav {}", env!("CARGO_PKG_VERSION"))),
        ("kind".to_string(), kind.to_string()),
    ];
    let pairs: BTreeMap<String, f64> = ParamSet::Effective(*eff).to_pairs();
    for (k, v) in pairs {
        p.push((k, v.to_string()));
    }
    for (i, a) in grid.axes.iter().enumerate() {
        p.push((format!("axis{}", i + 1), format!("{} {} {} {}", a.name, a.start, a.stop, a.count)));
    }
    p.push(("drive_offset".into(), opts.offset.as_str().into()));
    p.push(("branch".into(), opts.policy.as_str().into()));
    p
}

/// Evaluate `kind` at every point of `grid`. Failures at individual points
/// become error rows; only an invalid grid aborts the sweep.
pub fn run_sweep(eff: &EffectiveParams, grid: &GridSpec, kind: SweepKind, opts: &SweepOptions) -> Result<ResultTable> {
    grid.validate()?;
    let omega_axis = grid.axes.iter().position(|a| a.name == "omega");
    if kind == SweepKind::Spectrum && omega_axis.is_none() {
        return Err(Error::InvalidGrid("a spectrum sweep needs an `omega` axis".into()));
    }
    if kind != SweepKind::Spectrum && omega_axis.is_some() {
        return Err(Error::InvalidGrid(format!("axis `omega` only applies to spectrum sweeps, not {kind}")));
    }
    let names: Vec<&str> = grid.axes.iter().map(|a| a.name.as_str()).collect();
    let points = grid.points();
    let width = kind.value_columns().len();
    let rows = map_ordered(&points, opts.jobs, |pt| {
        let mut e = *eff;
        let mut omega = 0.0;
        let mut setup = Ok(());
        for (name, &v) in names.iter().zip(pt) {
            if *name == "omega" {
                omega = v;
            }
            match with_axis(&e, name, v) {
                Ok(next) => e = next,
                Err(err) => setup = Err(err),
            }
        }
        let mut cells: Vec<Cell> =
            names.iter().zip(pt).map(|(n, &v)| Cell::Num(axis_value_in_table(n, v, e.gamma))).collect();
        let values = setup.and_then(|_| e.checked()).and_then(|e| evaluate(&e, kind, omega, opts));
        match values {
            Ok(v) => {
                cells.extend(v);
                Row { cells, error: None }
            }
            Err(err) => {
                cells.extend(std::iter::repeat_n(Cell::Empty, width));
                Row { cells, error: Some(err.to_string()) }
            }
        }
    });
    let mut columns: Vec<String> = names.iter().map(|n| axis_column(n)).collect();
    columns.extend(kind.value_columns().iter().map(|c| c.to_string()));
    Ok(ResultTable {
        kind: kind.as_str().to_string(),
        columns,
        shape: grid.shape(),
        rows,
        provenance: provenance(kind.as_str(), eff, grid, opts),
    })
}

fn evaluate(e: &EffectiveParams, kind: SweepKind, omega: f64, opts: &SweepOptions) -> Result<Vec<Cell>> {
    let branches = steady_branches(e, opts.offset)?;
    let g = e.gamma;
    match kind {
        SweepKind::Bistability => {
            let mut cells = vec![Cell::Empty; 6];
            for (i, b) in branches.iter().take(3).enumerate() {
                cells[i] = Cell::Num(b.x);
                cells[3 + i] = Cell::Bool(b.stable);
            }
            Ok(cells)
        }
        SweepKind::Spectrum => {
            let b = opts.policy.select(&branches).ok_or(Error::NoSteadyState(f64::NAN))?;
            let s = displacement_spectrum(omega, e, b.operating_point())?;
            Ok(vec![Cell::Num(b.delta_tilde / g), Cell::Num(b.g2 / g), Cell::Num(s * g)])
        }
        SweepKind::Entanglement => {
            let b = opts.policy.select(&branches).or(branches.first()).ok_or(Error::NoSteadyState(f64::NAN))?;
            let en = if b.stable {
                Cell::Num(log_negativity(&steady_covariance(e, b.operating_point())?)?)
            } else {
                Cell::Na
            };
            Ok(vec![Cell::Num(b.delta_tilde / g), Cell::Num(b.g2 / g), Cell::Bool(b.stable), en])
        }
        SweepKind::Stability => {
            let b = opts.policy.select(&branches).or(branches.first()).ok_or(Error::NoSteadyState(f64::NAN))?;
            let op = b.operating_point();
            let rh = match routh_hurwitz_stable(op.delta_tilde, e.omega_m, e.gamma, op.g2) {
                Ok(v) => Cell::Bool(v),
                Err(_) => Cell::Empty,
            };
            let re = max_real_eigenvalue(&drift_for(e, op))?;
            Ok(vec![
                Cell::Num(op.delta_tilde / g),
                Cell::Num(op.g2 / g),
                Cell::Num(b.x),
                rh,
                Cell::Bool(re < 0.0),
                Cell::Num(re / g),
            ])
        }
    }
}

/// Wide form of a spectrum map: first column `Delta/gamma`, one column per
/// `omega/gamma`, `NA` where no stable steady state exists.
pub fn nms_table(map: &NmsMap, eff: &EffectiveParams, grid: &GridSpec, opts: &SweepOptions) -> ResultTable {
    let g = eff.gamma;
    let mut columns = vec![axis_column("Delta")];
    columns.extend(map.omega.iter().map(|w| format_number(w / g)));
    let rows = map
        .delta
        .iter()
        .zip(&map.values)
        .zip(&map.points)
        .map(|((d, vals), p)| {
            let mut cells = vec![Cell::Num(d / g)];
            match p {
                Some(_) => cells.extend(vals.iter().map(|v| Cell::Num(v * g))),
                None => cells.extend(std::iter::repeat_n(Cell::Na, vals.len())),
            }
            Row { cells, error: None }
        })
        .collect();
    ResultTable {
        kind: "nms_map".into(),
        columns,
        shape: vec![map.delta.len()],
        rows,
        provenance: provenance("nms_map", eff, grid, opts),
    }
}
