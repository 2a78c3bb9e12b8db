//! Standalone SVG line plots of trajectory columns.

use std::fmt::Write;
use std::path::Path;

use crate::error::{CliError, Result};
use crate::output::{read_trajectory, Table};

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 420.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 150.0;
const MARGIN_Y: f64 = 40.0;
const COLOURS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum PlotKind {
    Populations,
    Fidelity,
    Deviation,
    Pulses,
}

impl PlotKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Populations => "populations",
            Self::Fidelity => "fidelity",
            Self::Deviation => "deviation",
            Self::Pulses => "pulses",
        }
    }
}

/// Series to draw for `kind`. Three-level pulse plots split the envelope
/// into pump `omega sin(theta)` and Stokes `omega cos(theta)`.
fn series(table: &Table, kind: PlotKind) -> Vec<(String, Vec<f64>)> {
    let named = |name: &str| table.column(name).map(|c| (name.to_string(), c.to_vec()));
    match kind {
        PlotKind::Populations => table
            .headers
            .iter()
            .filter(|h| h.starts_with("pop_"))
            .filter_map(|h| named(h))
            .collect(),
        PlotKind::Fidelity => named("fidelity").into_iter().collect(),
        PlotKind::Deviation => named("deviation").into_iter().collect(),
        PlotKind::Pulses => {
            let (Some(w), Some(th)) = (table.column("omega_rad_per_us"), table.column("theta_rad")) else {
                return Vec::new();
            };
            if table.column("pop_a").is_some() {
                vec![
                    ("omega_p".into(), w.iter().zip(th).map(|(w, t)| w * t.sin()).collect()),
                    ("omega_s".into(), w.iter().zip(th).map(|(w, t)| w * t.cos()).collect()),
                ]
            } else {
                vec![("omega_rad_per_us".into(), w.to_vec())]
            }
        }
    }
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

pub fn render(table: &Table, kind: PlotKind) -> Option<String> {
    let x = table.column("t_wall_us")?;
    let lines = series(table, kind);
    if lines.is_empty() || x.is_empty() {
        return None;
    }
    let (x0, x1) = bounds(x.iter().copied());
    let (y0, y1) = bounds(lines.iter().flat_map(|(_, v)| v.iter().copied()));
    let plot_w = WIDTH - MARGIN_L - MARGIN_R;
    let plot_h = HEIGHT - 2.0 * MARGIN_Y;
    let px = |v: f64| MARGIN_L + (v - x0) / (x1 - x0) * plot_w;
    let py = |v: f64| HEIGHT - MARGIN_Y - (v - y0) / (y1 - y0) * plot_h;

    let mut svg = String::new();
    let _ = writeln!(svg, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(svg, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#, MARGIN_L + plot_w / 2.0, kind.name());
    let (bx, by) = (MARGIN_L, HEIGHT - MARGIN_Y);
    let _ = writeln!(svg, r#"<g stroke="black"><line x1="{bx}" y1="{by}" x2="{}" y2="{by}"/><line x1="{bx}" y1="{by}" x2="{bx}" y2="{MARGIN_Y}"/></g>"#, bx + plot_w);
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        let _ = writeln!(svg, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{:.3}</text>"#, px(xv), by + 16.0, xv);
        let _ = writeln!(svg, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{:.3}</text>"#, bx - 6.0, py(yv) + 4.0, yv);
    }
    let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="middle">t_wall_us</text>"#, MARGIN_L + plot_w / 2.0, HEIGHT - 6.0);
    for (i, (label, values)) in lines.iter().enumerate() {
        let colour = COLOURS[i % COLOURS.len()];
        let points: Vec<String> = x.iter().zip(values).map(|(a, b)| format!("{:.2},{:.2}", px(*a), py(*b))).collect();
        let _ = writeln!(svg, r#"<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{}"/>"#, points.join(" "));
        let ly = MARGIN_Y + 18.0 * i as f64;
        let lx = WIDTH - MARGIN_R + 15.0;
        let _ = writeln!(svg, r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{colour}" stroke-width="2"/>"#, lx + 20.0);
        let _ = writeln!(svg, r#"<text x="{}" y="{}">{label}</text>"#, lx + 26.0, ly + 4.0);
    }
    svg.push_str("</svg>\n");
    Some(svg)
}

/// Renders `run_dir/trajectory.csv` into `out_dir/<kind>.svg`. Nothing is
/// written when the trajectory is empty or lacks the needed columns.
pub fn plot(run_dir: &Path, out_dir: &Path, kind: PlotKind) -> Result<std::path::PathBuf> {
    let csv = run_dir.join("trajectory.csv");
    let table = read_trajectory(&csv)?;
    let svg = render(&table, kind)
        .ok_or_else(|| CliError::Trajectory { path: csv.clone(), reason: format!("no columns for a {} plot", kind.name()) })?;
    std::fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    let path = out_dir.join(format!("{}.svg", kind.name()));
    std::fs::write(&path, svg).map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}
