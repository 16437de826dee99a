//! Modal representation of the Dirichlet problem on `[0, 1]`.
//!
//! Mode `i ≥ 1` has eigenfunction `w_i(x) = √2 sin(iπx)` and eigenvalue
//! `λ_i = −i²π²`. The solution operators act diagonally:
//! `R_α(t)` multiplies mode `i` by `E_{α,1}(λ_i t^α)` and `K_α(t)` by
//! `E_{α,α}(λ_i t^α)`.
//!
//! The mild solution's convolution is integrated exactly against the
//! piecewise-linear interpolant of the control, using the primitives
//!
//! ```text
//! ∫_0^τ σ^{α−1} E_{α,α}(λσ^α) dσ = τ^α E_{α,α+1}(λτ^α)
//! ∫_0^τ σ^α     E_{α,α}(λσ^α) dσ = τ^{α+1} [E_{α,α+1} − E_{α,α+2}](λτ^α)
//! ```

use std::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};
use crate::fractional::SampledSignal;
use crate::special::mittag_leffler;

/// `λ_i = −i²π²` for the 1-based mode index `i`.
pub fn eigenvalue(i: usize) -> f64 {
    let k = i as f64 * PI;
    -k * k
}

/// `w_i(x) = √2 sin(iπx)`.
pub fn eigenfunction(i: usize, x: f64) -> f64 {
    SQRT_2 * (i as f64 * PI * x).sin()
}

/// State coordinates against `w_1, …, w_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    coeffs: Vec<f64>,
}

impl SpectralField {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::validation("coeffs", "at least one mode is required"));
        }
        if let Some(k) = coeffs.iter().position(|c| !c.is_finite()) {
            return Err(Error::validation("coeffs", format!("coefficient {} is not finite", k + 1)));
        }
        Ok(SpectralField { coeffs })
    }

    pub fn zeros(n_modes: usize) -> Self {
        SpectralField {
            coeffs: vec![0.0; n_modes.max(1)],
        }
    }

    /// The eigenfunction `w_i` (1-based) as a field.
    pub fn unit(n_modes: usize, i: usize) -> Self {
        let mut f = SpectralField::zeros(n_modes);
        f.coeffs[i - 1] = 1.0;
        f
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn n_modes(&self) -> usize {
        self.coeffs.len()
    }

    /// `L²(0,1)` norm; by Parseval, the Euclidean norm of the coefficients.
    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// Point value `Σ c_i w_i(x)`.
    pub fn evaluate(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c * eigenfunction(k + 1, x))
            .sum()
    }

    fn scaled_by<F: Fn(usize) -> Result<f64>>(&self, m: F) -> Result<SpectralField> {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| Ok(c * m(k + 1)?))
            .collect::<Result<Vec<_>>>()?;
        Ok(SpectralField { coeffs })
    }
}

/// Uniform nodes `t_k = kT/n_steps`, `k = 0..=n_steps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    horizon: f64,
    n_steps: usize,
}

impl TimeGrid {
    pub fn new(horizon: f64, n_steps: usize) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::validation("T", format!("horizon must be positive, got {horizon}")));
        }
        if n_steps < 2 {
            return Err(Error::validation("n_steps", format!("need at least 2 steps, got {n_steps}")));
        }
        Ok(TimeGrid { horizon, n_steps })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn len(&self) -> usize {
        self.n_steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn step(&self) -> f64 {
        self.horizon / self.n_steps as f64
    }

    pub fn node(&self, k: usize) -> f64 {
        if k == self.n_steps {
            self.horizon
        } else {
            k as f64 * self.horizon / self.n_steps as f64
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.n_steps).map(|k| self.node(k)).collect()
    }
}

/// Scalar control sampled on a [`TimeGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct ControlSignal {
    grid: TimeGrid,
    values: Vec<f64>,
}

impl ControlSignal {
    pub fn new(grid: TimeGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidSignal(format!(
                "control has {} samples, grid has {}",
                values.len(),
                grid.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidSignal(format!("control sample {k} is not finite")));
        }
        Ok(ControlSignal { grid, values })
    }

    pub fn zeros(grid: TimeGrid) -> Self {
        ControlSignal {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn from_fn<F: FnMut(f64) -> f64>(grid: TimeGrid, mut f: F) -> Result<Self> {
        ControlSignal::new(grid, grid.nodes().into_iter().map(&mut f).collect())
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn to_signal(&self) -> Result<SampledSignal> {
        SampledSignal::new(self.values.clone(), 0.0, self.grid.horizon())
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("alpha must lie in (0,1], got {alpha}")))
    }
}

/// `E_{α,1}(λ_i t^α)`.
pub fn r_multiplier(alpha: f64, t: f64, i: usize) -> Result<f64> {
    check_alpha(alpha)?;
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("time must be non-negative, got {t}")));
    }
    mittag_leffler(alpha, 1.0, eigenvalue(i) * t.powf(alpha))
}

/// `E_{α,α}(λ_i t^α)`.
pub fn k_multiplier(alpha: f64, t: f64, i: usize) -> Result<f64> {
    check_alpha(alpha)?;
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("K is evaluated at positive times only, got {t}")));
    }
    mittag_leffler(alpha, alpha, eigenvalue(i) * t.powf(alpha))
}

/// `R_α(t) z`.
pub fn apply_r(alpha: f64, t: f64, state: &SpectralField) -> Result<SpectralField> {
    state.scaled_by(|i| r_multiplier(alpha, t, i))
}

/// `K_α(t) z`.
pub fn apply_k(alpha: f64, t: f64, state: &SpectralField) -> Result<SpectralField> {
    state.scaled_by(|i| k_multiplier(alpha, t, i))
}

/// Product-quadrature weights of the convolution
/// `∫_0^{t_k} (t_k−s)^{α−1} E_{α,α}(λ(t_k−s)^α) u(s) ds` for one mode.
///
/// With `d = k − j`, the weight of `u_j` is `left[d]` (for `j < k`) plus
/// `right[d+1]` (for `j ≥ 1`); `left[0] = right[0] = 0`.
#[derive(Debug, Clone)]
pub struct ConvolutionWeights {
    left: Vec<f64>,
    right: Vec<f64>,
}

impl ConvolutionWeights {
    pub fn new(alpha: f64, lambda: f64, grid: &TimeGrid) -> Result<Self> {
        check_alpha(alpha)?;
        let n = grid.n_steps();
        let h = grid.step();
        let mut f0 = vec![0.0; n + 1];
        let mut f1 = vec![0.0; n + 1];
        for m in 1..=n {
            let tau = m as f64 * h;
            let ta = tau.powf(alpha);
            let z = lambda * ta;
            let e1 = mittag_leffler(alpha, alpha + 1.0, z)?;
            let e2 = mittag_leffler(alpha, alpha + 2.0, z)?;
            f0[m] = ta * e1;
            f1[m] = ta * tau * (e1 - e2);
        }
        let mut left = vec![0.0; n + 1];
        let mut right = vec![0.0; n + 1];
        for m in 1..=n {
            let a = f0[m] - f0[m - 1];
            // ∫ over σ ∈ [(m−1)h, mh] of (mh − σ)·kernel.
            let b = m as f64 * h * a - (f1[m] - f1[m - 1]);
            left[m] = a - b / h;
            right[m] = b / h;
        }
        if left.iter().chain(&right).any(|w| !w.is_finite()) {
            return Err(Error::Quadrature(format!(
                "non-finite convolution weight for lambda = {lambda}"
            )));
        }
        Ok(ConvolutionWeights { left, right })
    }

    /// Weight of sample `j` in the integral up to node `k`.
    pub fn weight(&self, k: usize, j: usize) -> f64 {
        let d = k - j;
        let mut w = 0.0;
        if j < k {
            w += self.left[d];
        }
        if j >= 1 && d + 1 < self.right.len() {
            w += self.right[d + 1];
        }
        w
    }

    /// `∫_0^{t_k}` against the samples `u_0..=u_k`.
    pub fn apply(&self, k: usize, u: &[f64]) -> f64 {
        (0..=k).map(|j| self.weight(k, j) * u[j]).sum()
    }
}

/// Snapshots of the state at every grid node.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    grid: TimeGrid,
    states: Vec<SpectralField>,
}

impl Trajectory {
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn states(&self) -> &[SpectralField] {
        &self.states
    }

    pub fn final_state(&self) -> &SpectralField {
        self.states.last().expect("trajectory has at least three nodes")
    }
}

/// Mild solution `y(t_k) = R_α(t_k) y0 + ∫_0^{t_k} (t_k−s)^{α−1} K_α(t_k−s) B u(s) ds`
/// for a scalar control entering mode `i` through `influence[i−1]`.
pub fn mild_solution(
    alpha: f64,
    y0: &SpectralField,
    influence: &[f64],
    u: &ControlSignal,
) -> Result<Trajectory> {
    check_alpha(alpha)?;
    let n_modes = y0.n_modes();
    if influence.len() != n_modes {
        return Err(Error::validation(
            "actuator",
            format!("{} influence coefficients for {n_modes} modes", influence.len()),
        ));
    }
    let grid = *u.grid();
    let nodes = grid.nodes();
    let mut columns = vec![vec![0.0; grid.len()]; n_modes];
    let active = u.values().iter().any(|&v| v != 0.0);
    for (m, col) in columns.iter_mut().enumerate() {
        let i = m + 1;
        let c0 = y0.coeffs()[m];
        let b = influence[m];
        let weights = if active && b != 0.0 {
            Some(ConvolutionWeights::new(alpha, eigenvalue(i), &grid)?)
        } else {
            None
        };
        for (k, &t) in nodes.iter().enumerate() {
            let free = if c0 == 0.0 { 0.0 } else { c0 * r_multiplier(alpha, t, i)? };
            let forced = match &weights {
                Some(w) => b * w.apply(k, u.values()),
                None => 0.0,
            };
            let v = free + forced;
            if !v.is_finite() {
                return Err(Error::Quadrature(format!(
                    "mode {i} is not finite at t = {t}"
                )));
            }
            col[k] = v;
        }
    }
    let states = (0..grid.len())
        .map(|k| SpectralField {
            coeffs: columns.iter().map(|c| c[k]).collect(),
        })
        .collect();
    Ok(Trajectory { grid, states })
}
