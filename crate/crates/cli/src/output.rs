//! Run artifacts: `trajectory.csv`, `summary.json`, `report.json`.

use std::path::Path;

use adiashort::engine::RunResult;
use adiashort::protocols::Experiment;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::error::{CliError, Result};

/// 12 significant digits, scientific, locale-independent.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.11e}")
}

pub fn trajectory_header(labels: &[String]) -> Vec<String> {
    let mut h = vec!["t_wall_us".to_string(), "t_path_us".to_string()];
    for l in labels {
        h.push(format!("re_{l}"));
        h.push(format!("im_{l}"));
    }
    h.extend(labels.iter().map(|l| format!("pop_{l}")));
    h.extend(["fidelity", "deviation", "omega_rad_per_us", "theta_rad", "phi_rad"].map(String::from));
    h
}

pub fn write_trajectory(path: &Path, run: &RunResult) -> Result<()> {
    let io = |e: csv::Error| CliError::io(path, e.into());
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(trajectory_header(&run.trajectory.basis_labels)).map_err(io)?;
    for s in &run.trajectory.samples {
        let mut row = vec![fmt_num(s.t_wall), fmt_num(s.t_path)];
        for a in &s.state {
            row.push(fmt_num(a.re));
            row.push(fmt_num(a.im));
        }
        row.extend(s.populations.iter().map(|p| fmt_num(*p)));
        row.extend([s.fidelity, s.deviation, s.omega, s.theta, s.phi].map(fmt_num));
        w.write_record(&row).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Column-major numeric table read back from a trajectory file.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.headers.iter().position(|h| h == name).map(|i| self.columns[i].as_slice())
    }
}

pub fn read_trajectory(path: &Path) -> Result<Table> {
    let bad = |reason: String| CliError::Trajectory { path: path.to_path_buf(), reason };
    let mut r = csv::Reader::from_path(path).map_err(|e| bad(e.to_string()))?;
    let headers: Vec<String> = r.headers().map_err(|e| bad(e.to_string()))?.iter().map(String::from).collect();
    if headers.first().map(String::as_str) != Some("t_wall_us") {
        return Err(bad("first column must be t_wall_us".into()));
    }
    let mut columns = vec![Vec::new(); headers.len()];
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        for (c, field) in rec.iter().enumerate() {
            let v = field.trim().parse::<f64>().map_err(|_| bad(format!("row {}: `{field}` is not a number", i + 1)))?;
            columns[c].push(v);
        }
    }
    if columns[0].is_empty() {
        return Err(bad("no samples".into()));
    }
    Ok(Table { headers, columns })
}

pub fn summary_json(run: &RunResult) -> Value {
    let s = &run.summary;
    let pops: Map<String, Value> = s.basis_labels.iter().cloned().zip(s.final_populations.iter().map(|p| json!(p))).collect();
    json!({
        "label": s.label,
        "final_fidelity": s.final_fidelity,
        "final_deviation": s.final_deviation,
        "final_populations": pops,
        "max_e_population": s.max_e_population,
        "tau_total": s.tau_total,
    })
}

pub fn report_json(exp: &Experiment, run: &RunResult) -> Value {
    json!({
        "label": exp.label,
        "grid_step_us": exp.grid_step,
        "factorization_residual": run.factorization_residual,
        "unitarity_max": run.unitarity_max,
        "pulse_phase_jumps": run.pulse_phase_jumps,
        "conditions": run.condition_report,
    })
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("plain data serializes");
    std::fs::write(path, text + "\n").map_err(|e| CliError::io(path, e))
}

pub fn write_run(dir: &Path, exp: &Experiment, run: &RunResult) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    write_trajectory(&dir.join("trajectory.csv"), run)?;
    write_json(&dir.join("summary.json"), &summary_json(run))?;
    write_json(&dir.join("report.json"), &report_json(exp, run))
}

#[cfg(test)]
mod tests {
    use super::*;
    use adiashort::engine::run_experiment;
    use adiashort::protocols::preset;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-11 * a.abs().max(b.abs()) || (a - b).abs() < 1e-300
    }

    #[test]
    fn csv_round_trip() {
        let exp = preset("three-level-K2").unwrap();
        let run = run_experiment(&exp).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trajectory.csv");
        write_trajectory(&path, &run).unwrap();
        let table = read_trajectory(&path).unwrap();
        assert_eq!(table.columns[0].len(), run.trajectory.samples.len());
        let t = table.column("t_wall_us").unwrap();
        let pop_a = table.column("pop_a").unwrap();
        let im_e = table.column("im_e").unwrap();
        for (i, s) in run.trajectory.samples.iter().enumerate() {
            assert!(close(t[i], s.t_wall));
            assert!(close(pop_a[i], s.populations[2]));
            assert!(close(im_e[i], s.state[1].im));
        }
    }

    #[test]
    fn summary_keys_populations_by_label() {
        let run = run_experiment(&preset("three-level-K1").unwrap()).unwrap();
        let v = summary_json(&run);
        assert!(v["final_populations"]["a"].as_f64().unwrap() > 0.9995);
    }
}
