//! Penalized minimum-energy problem.
//!
//! Unknowns are the control samples `u` and the modal trajectories `z_i` at
//! nodes `1..=n`. The functional is
//!
//! ```text
//! J_ε(u, z) = ½ uᵀ W u + (h / 2ε) Σ_i ‖r_i(u, z_i)‖²,    P z(T) = 0,
//! ```
//!
//! with `W` the trapezoid mass matrix and `r_i` the per-mode Caputo residual
//! `D^α z_i − λ_i z_i − b_i u` at the nodes. Writing `v_i = r_i` as the
//! unknown instead of `z_i` turns the problem into an equality-constrained
//! least-norm problem whose Schur complement is the RHUM Gramian plus an
//! `ε`-dependent diagonal-in-modes term, so the minimizer is obtained from one
//! `codim × codim` solve.

use nalgebra::{DMatrix, DVector};

use crate::actuators::is_strategic;
use crate::config::Problem;
use crate::error::{Error, Result};
use crate::quadrature;
use crate::rhum::{self, solve_rhum};
use crate::spectral::{eigenvalue, r_multiplier, ConvolutionWeights, ControlSignal};
use crate::special::gamma_fn;

/// `½ ∫_0^T u² dt` by the trapezoid rule.
pub fn energy(u: &ControlSignal) -> f64 {
    let sq: Vec<f64> = u.values().iter().map(|v| v * v).collect();
    0.5 * quadrature::trapezoid(&sq, u.grid().step())
}

/// Discretization of the Caputo operator inside the residual.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ResidualScheme {
    /// The exact discrete inverse of the simulator's convolution: `D^α − λ`
    /// is replaced by the inverse of the mild-solution weight matrix, so the
    /// penalized problem and the simulator share one discretization and
    /// `ε → 0` recovers the RHUM control exactly.
    #[default]
    Resolvent,
    /// The L1 product-quadrature Caputo derivative with `u` sampled at the
    /// residual's node. Consistent, but it converges to a slightly different
    /// discrete dynamics than the simulator.
    L1,
}

/// One mode's residual operator `r = M z − g − b S u`.
enum ModeOperator {
    Resolvent {
        /// `w[k][j]`, `0 ≤ j ≤ k ≤ n`: the convolution weights.
        weights: Vec<Vec<f64>>,
        free: Vec<f64>,
    },
    L1 {
        /// Lower-triangular `M` on nodes `1..=n`, row-major.
        m: Vec<Vec<f64>>,
        g: Vec<f64>,
    },
}

/// Solves `L x = r` for lower-triangular `L` given by `entry(k, j)`, `j ≤ k`.
fn forward_sub<F: Fn(usize, usize) -> f64>(n: usize, entry: F, r: &[f64]) -> Vec<f64> {
    let mut x = vec![0.0; n];
    for k in 0..n {
        let mut s = r[k];
        for j in 0..k {
            s -= entry(k, j) * x[j];
        }
        x[k] = s / entry(k, k);
    }
    x
}

/// Solves `Lᵀ x = r` for lower-triangular `L`.
fn backward_sub_transposed<F: Fn(usize, usize) -> f64>(n: usize, entry: F, r: &[f64]) -> Vec<f64> {
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let mut s = r[k];
        for j in k + 1..n {
            s -= entry(j, k) * x[j];
        }
        x[k] = s / entry(k, k);
    }
    x
}

impl ModeOperator {
    fn new(scheme: ResidualScheme, problem: &Problem, mode: usize) -> Result<Self> {
        let grid = problem.grid;
        let n = grid.n_steps();
        let alpha = problem.alpha;
        let lambda = eigenvalue(mode + 1);
        let z0 = problem.y0.coeffs()[mode];
        match scheme {
            ResidualScheme::Resolvent => {
                let w = ConvolutionWeights::new(alpha, lambda, &grid)?;
                let weights = (0..=n).map(|k| (0..=k).map(|j| w.weight(k, j)).collect()).collect();
                let free = (0..=n)
                    .map(|k| {
                        if z0 == 0.0 {
                            Ok(0.0)
                        } else {
                            Ok(z0 * r_multiplier(alpha, grid.node(k), mode + 1)?)
                        }
                    })
                    .collect::<Result<Vec<f64>>>()?;
                Ok(ModeOperator::Resolvent { weights, free })
            }
            ResidualScheme::L1 => {
                let c = grid.step().powf(-alpha) / gamma_fn(2.0 - alpha)?;
                let e = 1.0 - alpha;
                let bw: Vec<f64> = (0..=n)
                    .map(|m| (m as f64 + 1.0).powf(e) - (m as f64).powf(e))
                    .collect();
                // Row k (node k+1): c[b_0 z_{k+1} + Σ_{j<k+1} (b_{k+1−j} − b_{k−j}) z_j − b_k z_0].
                let m = (0..n)
                    .map(|k| {
                        (0..=k)
                            .map(|j| {
                                if j == k {
                                    c * bw[0] - lambda
                                } else {
                                    c * (bw[k - j] - bw[k - j - 1])
                                }
                            })
                            .collect()
                    })
                    .collect();
                let g = (0..n).map(|k| c * bw[k] * z0).collect();
                Ok(ModeOperator::L1 { m, g })
            }
        }
    }

    /// Sensitivity of `z(T)` to `u` (without the influence factor), length
    /// `n + 1`.
    fn final_control_row(&self, m_vec: &[f64]) -> Vec<f64> {
        match self {
            ModeOperator::Resolvent { weights, .. } => weights.last().expect("n ≥ 2").clone(),
            ModeOperator::L1 { .. } => {
                let mut row = vec![0.0];
                row.extend_from_slice(m_vec);
                row
            }
        }
    }

    /// `m = M^{−T} e_n`: sensitivity of `z(T)` to the residual.
    fn final_residual_row(&self) -> Vec<f64> {
        match self {
            ModeOperator::Resolvent { weights, .. } => weights.last().expect("n ≥ 2")[1..].to_vec(),
            ModeOperator::L1 { m, .. } => {
                let n = m.len();
                let mut e = vec![0.0; n];
                e[n - 1] = 1.0;
                backward_sub_transposed(n, |k, j| m[k][j], &e)
            }
        }
    }

    /// `z(T)` with zero control and zero residual.
    fn final_free(&self, m_vec: &[f64]) -> f64 {
        match self {
            ModeOperator::Resolvent { free, .. } => *free.last().expect("n ≥ 2"),
            ModeOperator::L1 { g, .. } => g.iter().zip(m_vec).map(|(a, b)| a * b).sum(),
        }
    }

    /// Trajectory at nodes `0..=n` for given control and residual.
    fn trajectory(&self, z0: f64, b: f64, u: &[f64], v: &[f64]) -> Vec<f64> {
        match self {
            ModeOperator::Resolvent { weights, free } => {
                let mut z = free.clone();
                for (k, zk) in z.iter_mut().enumerate().skip(1) {
                    let w = &weights[k];
                    let forced: f64 = (0..=k).map(|j| w[j] * u[j]).sum();
                    let pert: f64 = (1..=k).map(|j| w[j] * v[j - 1]).sum();
                    *zk += b * forced + pert;
                }
                z
            }
            ModeOperator::L1 { m, g } => {
                let n = m.len();
                let rhs: Vec<f64> = (0..n).map(|k| g[k] + b * u[k + 1] + v[k]).collect();
                let mut z = vec![z0];
                z.extend(forward_sub(n, |k, j| m[k][j], &rhs));
                z
            }
        }
    }

    /// `r = M z − g − b S u` evaluated from a trajectory.
    fn residual(&self, b: f64, u: &[f64], z: &[f64]) -> Vec<f64> {
        match self {
            ModeOperator::Resolvent { weights, free } => {
                let n = weights.len() - 1;
                let d: Vec<f64> = (1..=n)
                    .map(|k| {
                        let forced: f64 = (0..=k).map(|j| weights[k][j] * u[j]).sum();
                        z[k] - free[k] - b * forced
                    })
                    .collect();
                forward_sub(n, |k, j| weights[k + 1][j + 1], &d)
            }
            ModeOperator::L1 { m, g } => (0..m.len())
                .map(|k| {
                    let mz: f64 = (0..=k).map(|j| m[k][j] * z[j + 1]).sum();
                    mz - g[k] - b * u[k + 1]
                })
                .collect(),
        }
    }

    /// `Sᵀ x` for a residual-space vector `x`: the control-space image.
    fn control_adjoint(&self, x: &[f64]) -> Vec<f64> {
        match self {
            ModeOperator::Resolvent { weights, .. } => {
                // S u = Wsq⁻¹ w_0 u_0 + u_{1..n}.
                let n = weights.len() - 1;
                let y = backward_sub_transposed(n, |k, j| weights[k + 1][j + 1], x);
                let mut out = vec![0.0; n + 1];
                out[0] = (1..=n).map(|k| weights[k][0] * y[k - 1]).sum();
                out[1..].copy_from_slice(x);
                out
            }
            ModeOperator::L1 { .. } => {
                let mut out = vec![0.0];
                out.extend_from_slice(x);
                out
            }
        }
    }
}

/// A penalized problem at fixed `ε`.
pub struct PenalizedProblem<'a> {
    pub problem: &'a Problem,
    pub epsilon: f64,
    pub scheme: ResidualScheme,
}

#[derive(Debug, Clone)]
pub struct PenalizedSolution {
    pub u_eps: ControlSignal,
    /// Modal trajectories, `z[i][k]` for mode `i + 1` at node `k`.
    pub z_eps: Vec<Vec<f64>>,
    pub j_eps: f64,
    /// `(h Σ_i ‖r_i‖²)^{1/2}`.
    pub residual_norm: f64,
    /// `‖P z(T)‖`.
    pub terminal_distance: f64,
    /// Relative violation of the Euler equation `W u = −h Σ_i b_i Sᵀ p_i`
    /// with `p_i = −r_i/ε`, recomputed from `(u, z)`.
    pub euler_residual: f64,
}

impl PenalizedProblem<'_> {
    pub fn new(problem: &Problem, epsilon: f64) -> Result<PenalizedProblem<'_>> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::validation("eps", format!("must be positive, got {epsilon}")));
        }
        Ok(PenalizedProblem {
            problem,
            epsilon,
            scheme: ResidualScheme::default(),
        })
    }

    pub fn with_scheme(mut self, scheme: ResidualScheme) -> Self {
        self.scheme = scheme;
        self
    }

    /// Per-mode residuals of a candidate `(u, z)`.
    pub fn residuals(&self, u: &ControlSignal, z: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        let b = self.problem.actuator.influence();
        (0..self.problem.n_modes())
            .map(|i| {
                let op = ModeOperator::new(self.scheme, self.problem, i)?;
                Ok(op.residual(b[i], u.values(), &z[i]))
            })
            .collect()
    }
}

pub fn solve_penalized(pp: &PenalizedProblem) -> Result<PenalizedSolution> {
    let problem = pp.problem;
    let report = is_strategic(&problem.actuator, &problem.target, problem.tolerances.gramian_rank);
    if !report.strategic {
        return Err(Error::Infeasible {
            dead_modes: report.dead_modes,
        });
    }
    let grid = problem.grid;
    let n = grid.n_steps();
    let h = grid.step();
    let n_modes = problem.n_modes();
    let b = problem.actuator.influence();
    let vp = problem.target.polar_basis();
    let codim = vp.ncols();
    let mass = quadrature::trapezoid_weights(grid.len(), h);

    let ops = (0..n_modes)
        .map(|i| ModeOperator::new(pp.scheme, problem, i))
        .collect::<Result<Vec<_>>>()?;
    let m_rows: Vec<Vec<f64>> = ops.iter().map(|op| op.final_residual_row()).collect();

    let mut a = DMatrix::<f64>::zeros(codim, grid.len());
    let mut c = DVector::<f64>::zeros(codim);
    let mut reg = DMatrix::<f64>::zeros(codim, codim);
    for i in 0..n_modes {
        let row = vp.row(i);
        if row.iter().all(|&x| x == 0.0) {
            continue;
        }
        let ctrl = ops[i].final_control_row(&m_rows[i]);
        let free = ops[i].final_free(&m_rows[i]);
        let m2: f64 = m_rows[i].iter().map(|x| x * x).sum();
        for p in 0..codim {
            c[p] += row[p] * free;
            if b[i] != 0.0 {
                for j in 0..grid.len() {
                    a[(p, j)] += row[p] * b[i] * ctrl[j];
                }
            }
            for q in 0..codim {
                reg[(p, q)] += m2 * row[p] * row[q];
            }
        }
    }
    let mut schur = DMatrix::<f64>::zeros(codim, codim);
    for p in 0..codim {
        for q in 0..codim {
            let s: f64 = (0..grid.len()).map(|j| a[(p, j)] * a[(q, j)] / mass[j]).sum();
            schur[(p, q)] = s + pp.epsilon / h * reg[(p, q)];
        }
    }
    let rhs = -&c;
    let mu = if codim == 0 || rhs.norm() == 0.0 {
        DVector::zeros(codim)
    } else {
        rhum::solve_spd(&schur, &rhs, problem.tolerances.gramian_rank).ok_or(Error::Infeasible {
            dead_modes: Vec::new(),
        })?
    };
    let at_mu = a.transpose() * &mu;
    let u: Vec<f64> = at_mu.iter().zip(&mass).map(|(x, w)| x / w).collect();
    let mut z = Vec::with_capacity(n_modes);
    let mut v_all = Vec::with_capacity(n_modes);
    for i in 0..n_modes {
        let s = (0..codim).map(|p| vp[(i, p)] * mu[p]).sum::<f64>() * pp.epsilon / h;
        let v: Vec<f64> = m_rows[i].iter().map(|m| m * s).collect();
        z.push(ops[i].trajectory(problem.y0.coeffs()[i], b[i], &u, &v));
        v_all.push(v);
    }
    let u_eps = ControlSignal::new(grid, u)?;
    let penalty: f64 = v_all.iter().flatten().map(|x| x * x).sum::<f64>() * h;
    let j_eps = energy(&u_eps) + penalty / (2.0 * pp.epsilon);

    // Post-hoc checks from the trajectory itself.
    let final_state: Vec<f64> = z.iter().map(|zi| zi[n]).collect();
    let terminal_distance = problem.target.distance(&final_state);
    let mut residual_sq = 0.0;
    let mut rhs_euler = vec![0.0; grid.len()];
    for i in 0..n_modes {
        let r = ops[i].residual(b[i], u_eps.values(), &z[i]);
        residual_sq += h * r.iter().map(|x| x * x).sum::<f64>();
        if b[i] != 0.0 {
            let st = ops[i].control_adjoint(&r);
            for (acc, x) in rhs_euler.iter_mut().zip(st) {
                *acc += h / pp.epsilon * b[i] * x;
            }
        }
    }
    let wu: Vec<f64> = u_eps.values().iter().zip(&mass).map(|(x, w)| x * w).collect();
    let wu_norm = wu.iter().map(|x| x * x).sum::<f64>().sqrt();
    let diff = wu
        .iter()
        .zip(&rhs_euler)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt();
    let euler_residual = if wu_norm == 0.0 { diff } else { diff / wu_norm };
    Ok(PenalizedSolution {
        u_eps,
        z_eps: z,
        j_eps,
        residual_norm: residual_sq.sqrt(),
        terminal_distance,
        euler_residual,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub eps: f64,
    pub j_eps: f64,
    /// `‖u_ε − u*‖/‖u*‖` in the trapezoid `L²` norm (absolute when `u* = 0`).
    pub rel_control_err: f64,
    pub residual_norm: f64,
    pub euler_residual: f64,
}

#[derive(Debug, Clone)]
pub struct Sweep {
    pub rows: Vec<SweepRow>,
    pub rhum_energy: f64,
    pub u_rhum: ControlSignal,
}

fn l2_norm(v: &[f64], h: f64) -> f64 {
    let sq: Vec<f64> = v.iter().map(|x| x * x).collect();
    quadrature::trapezoid(&sq, h).sqrt()
}

/// Solves the penalized problem for each `ε` (strictly decreasing) and
/// compares with the RHUM control.
pub fn epsilon_sweep(problem: &Problem, eps_list: &[f64], scheme: ResidualScheme) -> Result<Sweep> {
    if eps_list.is_empty() {
        return Err(Error::validation("eps", "at least one value is required"));
    }
    if eps_list.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
        return Err(Error::validation("eps", "values must be positive"));
    }
    if eps_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::validation("eps", "values must be strictly decreasing"));
    }
    let rhum = solve_rhum(problem).map_err(|e| match e {
        Error::NonStrategic { dead_modes } | Error::SingularGramian { dead_modes } => {
            Error::Infeasible { dead_modes }
        }
        other => other,
    })?;
    let h = problem.grid.step();
    let u_ref = rhum.u_star.values();
    let ref_norm = l2_norm(u_ref, h);
    let mut rows = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let pp = PenalizedProblem::new(problem, eps)?.with_scheme(scheme);
        let sol = solve_penalized(&pp)?;
        let diff: Vec<f64> = sol.u_eps.values().iter().zip(u_ref).map(|(a, b)| a - b).collect();
        let err = l2_norm(&diff, h);
        rows.push(SweepRow {
            eps,
            j_eps: sol.j_eps,
            rel_control_err: if ref_norm == 0.0 { err } else { err / ref_norm },
            residual_norm: sol.residual_norm,
            euler_residual: sol.euler_residual,
        });
    }
    Ok(Sweep {
        rows,
        rhum_energy: energy(&rhum.u_star),
        u_rhum: rhum.u_star,
    })
}

/// `W`-orthogonal projection of `v` onto `{v : A v = 0}`, the directions
/// along which a feasible control can move without leaving `P y(T) = 0`.
pub fn project_to_null_space(
    disc: &rhum::DiscreteGramian,
    v: &[f64],
    rank_tol: f64,
) -> Result<Vec<f64>> {
    let vv = DVector::from_column_slice(v);
    let av = &disc.constraint * &vv;
    if disc.gramian.dim() == 0 || av.norm() == 0.0 {
        return Ok(v.to_vec());
    }
    let y = rhum::solve_spd(&disc.gramian.matrix, &av, rank_tol).ok_or(Error::SingularGramian {
        dead_modes: Vec::new(),
    })?;
    let corr = disc.control_from_polar(&y);
    Ok(v.iter().zip(corr).map(|(a, b)| a - b).collect())
}
