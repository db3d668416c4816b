//! Standalone SVG rendering of result tables: a line plot for one axis, a
//! heatmap for two. Output depends only on the table, so regenerating a plot
//! gives the same bytes.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::sweep::{Cell, ResultTable};

const W: f64 = 720.0;
const H: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 110.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 60.0;
const MAX_CELLS: usize = 400;
const COLORS: [&str; 3] = ["#1f77b4", "#d62728", "#2ca02c"];
const VIRIDIS: [(f64, f64, f64); 5] =
    [(68.0, 1.0, 84.0), (59.0, 82.0, 139.0), (33.0, 145.0, 140.0), (94.0, 201.0, 98.0), (253.0, 231.0, 37.0)];

enum PlotData {
    Lines { x_label: String, y_label: String, x: Vec<f64>, series: Vec<(String, Vec<f64>)> },
    Heatmap { x_label: String, y_label: String, z_label: String, x: Vec<f64>, y: Vec<f64>, z: Vec<Vec<f64>> },
}

/// Render `table` as an SVG document.
pub fn emit_plot(table: &ResultTable) -> Result<String> {
    if table.rows.is_empty() {
        return Err(Error::EmptyTable);
    }
    Ok(match extract(table)? {
        PlotData::Lines { x_label, y_label, x, series } => line_plot(&x_label, &y_label, &x, &series),
        PlotData::Heatmap { x_label, y_label, z_label, x, y, z } => heatmap(&x_label, &y_label, &z_label, &x, &y, &z),
    })
}

fn num(c: &Cell) -> f64 {
    c.as_f64().unwrap_or(f64::NAN)
}

fn log10_or_nan(v: f64) -> f64 {
    if v > 0.0 {
        v.log10()
    } else {
        f64::NAN
    }
}

/// Quantity shown on the value axis for each sweep kind.
fn value_of(table: &ResultTable, row: usize) -> Result<f64> {
    let cells = &table.rows[row].cells;
    let col = |name: &str| table.column(name).ok_or(Error::EmptyTable);
    Ok(match table.kind.as_str() {
        "bistability" => {
            let first = col("x_root1")?;
            (first..first + 3).filter(|&j| cells[j].as_f64().is_some()).count() as f64
        }
        "entanglement" => num(&cells[col("E_N")?]),
        "stability" => num(&cells[col("max_re_eig_over_gamma")?]),
        "spectrum" => log10_or_nan(num(&cells[col("S_b")?])),
        _ => f64::NAN,
    })
}

fn value_label(kind: &str) -> &'static str {
    match kind {
        "bistability" => "number of steady states",
        "entanglement" => "E_N",
        "stability" => "max Re λ / γ",
        _ => "log10(γ S_b)",
    }
}

fn extract(table: &ResultTable) -> Result<PlotData> {
    if table.kind == "nms_map" {
        let x: Vec<f64> = table.columns[1..].iter().map(|c| c.parse().unwrap_or(f64::NAN)).collect();
        let y: Vec<f64> = table.rows.iter().map(|r| num(&r.cells[0])).collect();
        let z = table.rows.iter().map(|r| r.cells[1..].iter().map(|c| log10_or_nan(num(c))).collect()).collect();
        return Ok(PlotData::Heatmap {
            x_label: pretty(&table.columns[0].replace("Delta", "omega")),
            y_label: pretty(&table.columns[0]),
            z_label: "log10(γ S_b)".into(),
            x,
            y,
            z,
        });
    }
    match table.shape.as_slice() {
        [_] => {
            let x: Vec<f64> = table.rows.iter().map(|r| num(&r.cells[0])).collect();
            let series = if table.kind == "bistability" {
                let first = table.column("x_root1").ok_or(Error::EmptyTable)?;
                (0..3)
                    .map(|k| (format!("root {}", k + 1), table.rows.iter().map(|r| num(&r.cells[first + k])).collect()))
                    .collect()
            } else {
                let ys = (0..table.rows.len()).map(|i| value_of(table, i)).collect::<Result<Vec<_>>>()?;
                vec![(value_label(&table.kind).to_string(), ys)]
            };
            let y_label = if table.kind == "bistability" { "photon number".into() } else { value_label(&table.kind).into() };
            Ok(PlotData::Lines { x_label: pretty(&table.columns[0]), y_label, x, series })
        }
        [ny, nx] => {
            let y: Vec<f64> = (0..*ny).map(|i| num(&table.rows[i * nx].cells[0])).collect();
            let x: Vec<f64> = (0..*nx).map(|j| num(&table.rows[j].cells[1])).collect();
            let z = (0..*ny)
                .map(|i| (0..*nx).map(|j| value_of(table, i * nx + j)).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()?;
            Ok(PlotData::Heatmap {
                x_label: pretty(&table.columns[1]),
                y_label: pretty(&table.columns[0]),
                z_label: value_label(&table.kind).into(),
                x,
                y,
                z,
            })
        }
        _ => Err(Error::EmptyTable),
    }
}

/// Axis label for a column name, e.g. `Delta_over_gamma` becomes `Δ/γ`.
fn pretty(col: &str) -> String {
    let (base, over) = match col.strip_suffix("_over_gamma") {
        Some(b) => (b, true),
        None => (col, false),
    };
    let sym = match base {
        "Delta" => "Δ",
        "omega" => "ω",
        "omega_m" => "ω_m",
        "g_o" => "g_o",
        "Gamma" => "Γ",
        "gamma" => "γ",
        "eta_pump_re" => "Re η",
        "eta_pump_im" => "Im η",
        other => other,
    };
    if over {
        format!("{sym}/γ")
    } else {
        sym.to_string()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn tick(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if v.abs() >= 1e4 || v.abs() < 1e-2 {
        return format!("{v:.2e}");
    }
    let s = format!("{v:.3}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn range(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = vals.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if lo == hi {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (W - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        H - BOTTOM - (y - self.y.0) / (self.y.1 - self.y.0) * (H - TOP - BOTTOM)
    }
}

fn header(s: &mut String) {
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
}

fn axes(s: &mut String, f: &Frame, x_label: &str, y_label: &str) {
    let (x0, x1, y0, y1) = (LEFT, W - RIGHT, TOP, H - BOTTOM);
    let _ = writeln!(s, r#"<rect x="{x0}" y="{y0}" width="{}" height="{}" fill="none" stroke="black"/>"#, x1 - x0, y1 - y0);
    for k in 0..=4 {
        let t = k as f64 / 4.0;
        let xv = f.x.0 + t * (f.x.1 - f.x.0);
        let yv = f.y.0 + t * (f.y.1 - f.y.0);
        let (px, py) = (f.px(xv), f.py(yv));
        let _ = writeln!(s, r#"<line x1="{px:.2}" y1="{y1}" x2="{px:.2}" y2="{:.2}" stroke="black"/>"#, y1 + 5.0);
        let _ = writeln!(s, r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, y1 + 18.0, tick(xv));
        let _ = writeln!(s, r#"<line x1="{:.2}" y1="{py:.2}" x2="{x0}" y2="{py:.2}" stroke="black"/>"#, x0 - 5.0);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, x0 - 8.0, py + 4.0, tick(yv));
    }
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="14">{}</text>"#, (x0 + x1) / 2.0, H - 15.0, escape(x_label));
    let _ = writeln!(
        s,
        r#"<text x="18" y="{:.2}" text-anchor="middle" font-size="14" transform="rotate(-90 18 {:.2})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(y_label)
    );
}

fn line_plot(x_label: &str, y_label: &str, x: &[f64], series: &[(String, Vec<f64>)]) -> String {
    let f = Frame { x: range(x.iter().copied()), y: range(series.iter().flat_map(|(_, v)| v.iter().copied())) };
    let mut s = String::new();
    header(&mut s);
    axes(&mut s, &f, x_label, y_label);
    for (k, (name, ys)) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let mut d = String::new();
        let mut pen_down = false;
        for (&xv, &yv) in x.iter().zip(ys) {
            if xv.is_finite() && yv.is_finite() {
                let _ = write!(d, "{}{:.2},{:.2} ", if pen_down { "L" } else { "M" }, f.px(xv), f.py(yv));
                pen_down = true;
            } else {
                pen_down = false;
            }
        }
        if !d.is_empty() {
            let _ = writeln!(s, r#"<path d="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, d.trim_end());
        }
        if series.len() > 1 {
            let ly = TOP + 15.0 + 16.0 * k as f64;
            let lx = W - RIGHT + 10.0;
            let _ = writeln!(s, r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#, lx + 18.0);
            let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, lx + 22.0, ly + 4.0, escape(name));
        }
    }
    s.push_str("</svg>\n");
    s
}

fn color(t: f64) -> String {
    if !t.is_finite() {
        return "#cccccc".into();
    }
    let t = t.clamp(0.0, 1.0) * (VIRIDIS.len() - 1) as f64;
    let i = (t.floor() as usize).min(VIRIDIS.len() - 2);
    let u = t - i as f64;
    let (a, b) = (VIRIDIS[i], VIRIDIS[i + 1]);
    let mix = |p: f64, q: f64| (p + u * (q - p)).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

fn edges(v: &[f64]) -> Vec<f64> {
    if v.len() == 1 {
        return vec![v[0] - 0.5, v[0] + 0.5];
    }
    let mut e = Vec::with_capacity(v.len() + 1);
    e.push(v[0] - 0.5 * (v[1] - v[0]));
    for w in v.windows(2) {
        e.push(0.5 * (w[0] + w[1]));
    }
    let n = v.len();
    e.push(v[n - 1] + 0.5 * (v[n - 1] - v[n - 2]));
    e
}

/// Every `ceil((n - 1) / MAX_CELLS)`-th index, so large maps stay a manageable size.
fn stride(n: usize) -> Vec<usize> {
    let step = n.saturating_sub(1).div_ceil(MAX_CELLS).max(1);
    (0..n).step_by(step).collect()
}

fn heatmap(x_label: &str, y_label: &str, z_label: &str, x: &[f64], y: &[f64], z: &[Vec<f64>]) -> String {
    let (ix, iy) = (stride(x.len()), stride(y.len()));
    let x: Vec<f64> = ix.iter().map(|&j| x[j]).collect();
    let y: Vec<f64> = iy.iter().map(|&i| y[i]).collect();
    let z: Vec<Vec<f64>> = iy.iter().map(|&i| ix.iter().map(|&j| z[i][j]).collect()).collect();
    let (xe, ye) = (edges(&x), edges(&y));
    let f = Frame { x: (xe[0], xe[xe.len() - 1]), y: (ye[0], ye[ye.len() - 1]) };
    let (zlo, zhi) = range(z.iter().flatten().copied());
    let mut s = String::new();
    header(&mut s);
    let _ = writeln!(s, r#"<g shape-rendering="crispEdges">"#);
    for (i, row) in z.iter().enumerate() {
        let (top, bottom) = (f.py(ye[i + 1]), f.py(ye[i]));
        for (j, &v) in row.iter().enumerate() {
            let (left, right) = (f.px(xe[j]), f.px(xe[j + 1]));
            let _ = writeln!(
                s,
                r#"<rect x="{left:.2}" y="{top:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
                right - left,
                bottom - top,
                color((v - zlo) / (zhi - zlo))
            );
        }
    }
    s.push_str("</g>\n");
    axes(&mut s, &f, x_label, y_label);
    let bx = W - RIGHT + 20.0;
    let steps = 32;
    let span = H - TOP - BOTTOM;
    for k in 0..steps {
        let t = (k as f64 + 0.5) / steps as f64;
        let y = H - BOTTOM - (k + 1) as f64 * span / steps as f64;
        let _ = writeln!(s, r#"<rect x="{bx}" y="{y:.2}" width="16" height="{:.2}" fill="{}"/>"#, span / steps as f64 + 0.5, color(t));
    }
    let _ = writeln!(s, r#"<text x="{}" y="{:.2}">{}</text>"#, bx + 20.0, TOP + 10.0, tick(zhi));
    let _ = writeln!(s, r#"<text x="{}" y="{:.2}">{}</text>"#, bx + 20.0, H - BOTTOM, tick(zlo));
    let _ = writeln!(s, r#"<text x="{bx}" y="{:.2}">{}</text>"#, TOP - 10.0, escape(z_label));
    s.push_str("</svg>\n");
    s
}
