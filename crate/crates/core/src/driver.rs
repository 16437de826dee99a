//! Experiment drivers behind the CLI: run a pipeline, write CSV and JSON
//! artifacts, and produce a report for both successful and failed runs.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::actuators::{eec_criterion, is_strategic};
use crate::config::{Problem, ProblemConfig};
use crate::error::{Error, Result};
use crate::penalty::{energy, epsilon_sweep, project_to_null_space, ResidualScheme};
use crate::rhum::{assemble_discrete_gramian, assemble_gramian, final_free_state, solve_rhum, verify_transfer};
use crate::spectral::{ControlSignal, TimeGrid, Trajectory};

/// Number of random null-space perturbations tried by `synthesize`.
pub const OPTIMALITY_SAMPLES: usize = 20;

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Artifacts {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub control: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<String>,
    pub report: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnosis {
    pub kind: String,
    pub message: String,
    pub exit_code: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dead_modes: Option<Vec<usize>>,
}

impl From<&Error> for Diagnosis {
    fn from(e: &Error) -> Self {
        Diagnosis {
            kind: e.kind().to_string(),
            message: e.to_string(),
            exit_code: e.exit_code(),
            dead_modes: e.dead_modes().map(|d| d.to_vec()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimalityCheck {
    pub seed: u64,
    pub perturbations: usize,
    /// `min_v J(u* + v) − J(u*)` over the sampled feasible perturbations.
    pub min_energy_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepEntry {
    pub eps: f64,
    pub j_eps: f64,
    pub rel_control_err: f64,
    pub residual_norm: f64,
    pub euler_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSummary {
    pub rhum_energy: f64,
    pub monotone: bool,
    /// `max_k residual_k / √ε_k`.
    pub fitted_c: f64,
    pub rows: Vec<SweepEntry>,
}

/// Machine-readable outcome of one CLI run. Field order is the JSON key order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub command: String,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strategic: Option<bool>,
    pub dead_modes: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eec: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gramian_condition: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gramian_residual: Option<f64>,
    /// Smallest eigenvalue of the continuous Gramian (only for `α > 1/2`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub continuous_min_eigenvalue: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub control_energy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distance_to_g: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub relative_distance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sign_flipped: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub optimality: Option<OptimalityCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSummary>,
    pub warnings: Vec<String>,
    pub artifacts: Artifacts,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<Diagnosis>,
}

impl RunReport {
    fn new(command: &str, out: &Path) -> Self {
        RunReport {
            command: command.to_string(),
            status: "ok".into(),
            strategic: None,
            dead_modes: Vec::new(),
            eec: None,
            gramian_condition: None,
            gramian_residual: None,
            continuous_min_eigenvalue: None,
            control_energy: None,
            distance_to_g: None,
            relative_distance: None,
            sign_flipped: None,
            optimality: None,
            sweep: None,
            warnings: Vec::new(),
            artifacts: Artifacts {
                report: path_string(&out.join("report.json")),
                ..Artifacts::default()
            },
            error: None,
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.error.as_ref().map_or(0, |d| d.exit_code)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report is serializable");
        s.push('\n');
        s
    }
}

fn path_string(p: &Path) -> String {
    p.display().to_string()
}

fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// CSV with header `t,u`.
pub fn control_csv(u: &ControlSignal) -> String {
    let mut s = String::from("t,u\n");
    for (t, v) in u.grid().nodes().iter().zip(u.values()) {
        let _ = writeln!(s, "{},{}", fmt_float(*t), fmt_float(*v));
    }
    s
}

/// CSV with header `t,coeff_1,…,coeff_N`.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let n = traj.final_state().n_modes();
    let mut s = String::from("t");
    for i in 1..=n {
        let _ = write!(s, ",coeff_{i}");
    }
    s.push('\n');
    for (t, state) in traj.grid().nodes().iter().zip(traj.states()) {
        s.push_str(&fmt_float(*t));
        for c in state.coeffs() {
            s.push(',');
            s.push_str(&fmt_float(*c));
        }
        s.push('\n');
    }
    s
}

/// Reads a `t,u` CSV and checks it against `grid`.
pub fn parse_control_csv(text: &str, grid: TimeGrid) -> Result<ControlSignal> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| Error::Parse("control CSV is empty".into()))?;
    if header.split(',').map(str::trim).collect::<Vec<_>>() != ["t", "u"] {
        return Err(Error::Parse(format!("control CSV header must be `t,u`, got `{header}`")));
    }
    let nodes = grid.nodes();
    let mut values = Vec::with_capacity(nodes.len());
    for (row, line) in lines.enumerate() {
        let mut cells = line.split(',').map(str::trim);
        let parse = |c: Option<&str>| -> Result<f64> {
            c.ok_or_else(|| Error::Parse(format!("row {}: missing column", row + 1)))?
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("row {}: {e}", row + 1)))
        };
        let t = parse(cells.next())?;
        let u = parse(cells.next())?;
        if cells.next().is_some() {
            return Err(Error::Parse(format!("row {}: too many columns", row + 1)));
        }
        let expected = nodes.get(row).copied().unwrap_or(f64::NAN);
        if !((t - expected).abs() <= 1e-9 * grid.horizon()) {
            return Err(Error::validation(
                "control",
                format!("row {} has t = {t}, grid node is {expected}", row + 1),
            ));
        }
        values.push(u);
    }
    ControlSignal::new(grid, values).map_err(|e| Error::validation("control", e.to_string()))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn prepare_out(out: &Path) -> Result<()> {
    fs::create_dir_all(out).map_err(|e| Error::Io(format!("{}: {e}", out.display())))
}

/// Finalizes `report` with `outcome`, writes `report.json` and returns it.
fn finish(mut report: RunReport, outcome: Result<()>, out: &Path) -> RunReport {
    if let Err(e) = outcome {
        report.status = "error".into();
        if let Some(d) = e.dead_modes() {
            report.dead_modes = d.to_vec();
        }
        report.error = Some(Diagnosis::from(&e));
    }
    let path = out.join("report.json");
    let written = prepare_out(out).and_then(|_| write_file(&path, &report.to_json()));
    if let Err(e) = written {
        // The report itself could not be written; keep the first failure if any.
        report.status = "error".into();
        if report.error.is_none() {
            report.error = Some(Diagnosis::from(&e));
        }
    }
    report
}

fn build(config: &ProblemConfig) -> Result<Problem> {
    config.build()
}

fn optimality_check(problem: &Problem, u: &ControlSignal, seed: u64) -> Result<OptimalityCheck> {
    let disc = assemble_discrete_gramian(problem.alpha, &problem.actuator, &problem.target, &problem.grid)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = energy(u);
    let scale = u.values().iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut min_gap = f64::INFINITY;
    for _ in 0..OPTIMALITY_SAMPLES {
        let raw: Vec<f64> = (0..problem.grid.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let v = project_to_null_space(&disc, &raw, problem.tolerances.gramian_rank)?;
        let vn = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let factor = if vn > 0.0 && scale > 0.0 { 0.1 * scale / vn } else { 0.0 };
        let moved: Vec<f64> = u.values().iter().zip(&v).map(|(a, b)| a + factor * b).collect();
        let gap = energy(&ControlSignal::new(problem.grid, moved)?) - base;
        min_gap = min_gap.min(gap);
    }
    Ok(OptimalityCheck {
        seed,
        perturbations: OPTIMALITY_SAMPLES,
        min_energy_gap: min_gap,
    })
}

/// `synthesize`: RHUM control, verified transfer, CSV artifacts.
pub fn run_synthesis(config: &ProblemConfig, out: &Path, seed: u64) -> RunReport {
    let mut report = RunReport::new("synthesize", out);
    let outcome = (|| -> Result<()> {
        let problem = build(config)?;
        prepare_out(out)?;
        let st = is_strategic(&problem.actuator, &problem.target, problem.tolerances.gramian_rank);
        report.strategic = Some(st.strategic);
        report.dead_modes = st.dead_modes.clone();
        let sol = solve_rhum(&problem)?;
        report.eec = Some(true);
        report.gramian_condition = Some(sol.condition);
        report.gramian_residual = Some(sol.residual);
        report.sign_flipped = Some(sol.sign_flipped);
        report.warnings.extend(sol.warnings.iter().cloned());
        report.control_energy = Some(energy(&sol.u_star));
        let transfer = verify_transfer(&problem, &sol.u_star)?;
        report.distance_to_g = Some(transfer.distance_to_g);
        let y0n = problem.y0.norm();
        report.relative_distance = Some(if y0n > 0.0 { transfer.distance_to_g / y0n } else { transfer.distance_to_g });

        let control_path = out.join("control.csv");
        let traj_path = out.join("trajectory.csv");
        write_file(&control_path, &control_csv(&sol.u_star))?;
        write_file(&traj_path, &trajectory_csv(&transfer.trajectory))?;
        report.artifacts.control = Some(path_string(&control_path));
        report.artifacts.trajectory = Some(path_string(&traj_path));
        report.optimality = Some(optimality_check(&problem, &sol.u_star, seed)?);

        if transfer.distance_to_g > problem.tolerances.verify_distance {
            return Err(Error::TransferMissed {
                distance: transfer.distance_to_g,
                tolerance: problem.tolerances.verify_distance,
            });
        }
        Ok(())
    })();
    finish(report, outcome, out)
}

/// `verify`: replay a control (or `u ≡ 0`) and report the distance to `G`.
pub fn run_verify(config: &ProblemConfig, control: Option<&Path>, out: &Path) -> RunReport {
    let mut report = RunReport::new("verify", out);
    let outcome = (|| -> Result<()> {
        let problem = build(config)?;
        prepare_out(out)?;
        let u = match control {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
                parse_control_csv(&text, problem.grid)?
            }
            None => ControlSignal::zeros(problem.grid),
        };
        report.control_energy = Some(energy(&u));
        let transfer = verify_transfer(&problem, &u)?;
        report.distance_to_g = Some(transfer.distance_to_g);
        let y0n = problem.y0.norm();
        report.relative_distance = Some(if y0n > 0.0 { transfer.distance_to_g / y0n } else { transfer.distance_to_g });
        let traj_path = out.join("trajectory.csv");
        write_file(&traj_path, &trajectory_csv(&transfer.trajectory))?;
        report.artifacts.trajectory = Some(path_string(&traj_path));
        Ok(())
    })();
    finish(report, outcome, out)
}

/// `sweep`: penalized solutions for each `ε`, compared with RHUM.
pub fn run_epsilon_sweep(config: &ProblemConfig, eps: &[f64], out: &Path) -> RunReport {
    let mut report = RunReport::new("sweep", out);
    let outcome = (|| -> Result<()> {
        let problem = build(config)?;
        prepare_out(out)?;
        let sweep = epsilon_sweep(&problem, eps, ResidualScheme::default())?;
        let mut csv = String::from("eps,J_eps,rel_control_err\n");
        for r in &sweep.rows {
            let _ = writeln!(csv, "{},{},{}", fmt_float(r.eps), fmt_float(r.j_eps), fmt_float(r.rel_control_err));
        }
        let path = out.join("sweep.csv");
        write_file(&path, &csv)?;
        report.artifacts.sweep = Some(path_string(&path));
        let monotone = sweep.rows.windows(2).all(|w| w[1].j_eps >= w[0].j_eps - 1e-10);
        let fitted_c = sweep
            .rows
            .iter()
            .map(|r| r.residual_norm / r.eps.sqrt())
            .fold(0.0, f64::max);
        report.control_energy = Some(sweep.rhum_energy);
        report.sweep = Some(SweepSummary {
            rhum_energy: sweep.rhum_energy,
            monotone,
            fitted_c,
            rows: sweep
                .rows
                .iter()
                .map(|r| SweepEntry {
                    eps: r.eps,
                    j_eps: r.j_eps,
                    rel_control_err: r.rel_control_err,
                    residual_norm: r.residual_norm,
                    euler_residual: r.euler_residual,
                })
                .collect(),
        });
        if !monotone {
            report.warnings.push("J_eps is not monotone in eps".into());
        }
        Ok(())
    })();
    finish(report, outcome, out)
}

/// `analyze`: strategic-actuator and reachability report only.
pub fn run_analyze(config: &ProblemConfig, out: &Path) -> RunReport {
    let mut report = RunReport::new("analyze", out);
    let outcome = (|| -> Result<()> {
        let problem = build(config)?;
        let tol = problem.tolerances.gramian_rank;
        let st = is_strategic(&problem.actuator, &problem.target, tol);
        report.strategic = Some(st.strategic);
        report.dead_modes = st.dead_modes;
        let disc = assemble_discrete_gramian(problem.alpha, &problem.actuator, &problem.target, &problem.grid)?;
        let free = final_free_state(&problem)?;
        let rhs: DVector<f64> = -problem.target.polar_coords(free.coeffs());
        report.eec = Some(eec_criterion(&disc.gramian.matrix, &rhs, 1e-8));
        report.gramian_condition = Some(disc.gramian.condition_number());
        report.distance_to_g = Some(problem.target.distance(free.coeffs()));
        if problem.alpha > 0.5 && problem.target.codim() > 0 {
            let cont = assemble_gramian(
                &problem.actuator,
                &problem.target,
                problem.alpha,
                problem.grid.horizon(),
                48,
                problem.tolerances.quadrature,
            )?;
            report.continuous_min_eigenvalue = Some(cont.min_eigenvalue());
        }
        Ok(())
    })();
    finish(report, outcome, out)
}

/// Parses `--eps` values such as `1e-1,1e-3`.
pub fn parse_eps_list(text: &str) -> Result<Vec<f64>> {
    if text.trim().is_empty() {
        return Err(Error::validation("eps", "at least one value is required"));
    }
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::validation("eps", format!("`{}`: {e}", s.trim())))
        })
        .collect()
}

/// Report for a run that failed before any pipeline step, e.g. an
/// unreadable config. Still writes `report.json` when `out` is usable.
pub fn failure_report(command: &str, out: &Path, err: Error) -> RunReport {
    finish(RunReport::new(command, out), Err(err), out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eps_parsing() {
        assert_eq!(parse_eps_list("1e-1, 1e-3").unwrap(), vec![0.1, 0.001]);
        assert!(parse_eps_list("").is_err());
        assert!(parse_eps_list("1e-1,x").is_err());
    }

    #[test]
    fn control_csv_round_trip() {
        let g = TimeGrid::new(2.0, 4).unwrap();
        let u = ControlSignal::from_fn(g, |t| t.sin() / 3.0).unwrap();
        let back = parse_control_csv(&control_csv(&u), g).unwrap();
        assert_eq!(back, u);
        let other = TimeGrid::new(2.0, 5).unwrap();
        assert!(parse_control_csv(&control_csv(&u), other).is_err());
        assert!(matches!(parse_control_csv("x,y\n", g), Err(Error::Parse(_))));
    }

    #[test]
    fn floats_have_seventeen_digits() {
        assert_eq!(fmt_float(1.0 / 3.0), "3.3333333333333331e-1");
    }
}
