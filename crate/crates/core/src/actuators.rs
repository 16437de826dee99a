//! Actuators, target subspaces and the strategic-actuator test.
//!
//! An actuator enters the modal system through its influence coefficients
//! `b_i = ⟨B, w_i⟩`. A target `G ⊂ ℝ^N` is stored with an orthonormal basis,
//! an orthonormal basis of its orthogonal complement (which, for a subspace,
//! is the polar set `G°`), and the projector `P` onto that complement, so that
//! `‖P y‖` is the distance from `y` to `G`.

use std::f64::consts::{PI, SQRT_2};

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::special::sin_pi;

/// Default relative threshold below which an influence coefficient counts as
/// zero.
pub const DEFAULT_STRATEGIC_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum ActuatorKind {
    /// Zone `[a, b]`; `profile` holds `⟨f, w_i⟩_{L²(a,b)}` when `f ≢ 1`.
    Zone {
        a: f64,
        b: f64,
        profile: Option<Vec<f64>>,
    },
    /// Dirac mass at `b`.
    Pointwise { b: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Actuator {
    kind: ActuatorKind,
    influence: Vec<f64>,
}

impl Actuator {
    pub fn kind(&self) -> &ActuatorKind {
        &self.kind
    }

    /// `b_i`, `i = 1..=N`, stored 0-based.
    pub fn influence(&self) -> &[f64] {
        &self.influence
    }

    pub fn n_modes(&self) -> usize {
        self.influence.len()
    }

    /// Same support, profile multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Actuator {
        let influence: Vec<f64> = self.influence.iter().map(|b| c * b).collect();
        let kind = match &self.kind {
            ActuatorKind::Zone { a, b, .. } => ActuatorKind::Zone {
                a: *a,
                b: *b,
                profile: Some(influence.clone()),
            },
            ActuatorKind::Pointwise { .. } => {
                // A scaled Dirac mass has no point-location description.
                ActuatorKind::Zone {
                    a: 0.0,
                    b: 1.0,
                    profile: Some(influence.clone()),
                }
            }
        };
        Actuator { kind, influence }
    }
}

/// `sin(πx)` that is exactly zero when `x` is an integer up to a few ulps, so
/// that symmetry-induced dead modes come out as exact zeros.
fn snapped_sin_pi(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= 4.0 * f64::EPSILON * x.abs().max(1.0) {
        0.0
    } else {
        sin_pi(x)
    }
}

/// `(√2/(iπ))(cos iπa − cos iπb)`, computed as
/// `−(2√2/(iπ)) sin(iπ(a+b)/2) sin(iπ(a−b)/2)`.
pub fn zone_coefficient(a: f64, b: f64, i: usize) -> f64 {
    let fi = i as f64;
    let s1 = snapped_sin_pi(fi * (a + b) / 2.0);
    let s2 = snapped_sin_pi(fi * (a - b) / 2.0);
    -2.0 * SQRT_2 / (fi * PI) * s1 * s2
}

/// `w_i(b) = √2 sin(iπb)`.
pub fn pointwise_coefficient(b: f64, i: usize) -> f64 {
    SQRT_2 * snapped_sin_pi(i as f64 * b)
}

pub fn make_zone(a: f64, b: f64, profile: Option<&[f64]>, n_modes: usize) -> Result<Actuator> {
    if !(a.is_finite() && b.is_finite()) || a < 0.0 || b > 1.0 || a >= b {
        return Err(Error::Interval(format!(
            "zone needs 0 <= a < b <= 1, got a = {a}, b = {b}"
        )));
    }
    if n_modes == 0 {
        return Err(Error::validation("n_modes", "at least one mode is required"));
    }
    let influence = match profile {
        None => (1..=n_modes).map(|i| zone_coefficient(a, b, i)).collect(),
        Some(p) => {
            if p.len() != n_modes {
                return Err(Error::validation(
                    "actuator.profile",
                    format!("{} coefficients for {n_modes} modes", p.len()),
                ));
            }
            if p.iter().any(|c| !c.is_finite()) {
                return Err(Error::validation("actuator.profile", "coefficients must be finite"));
            }
            p.to_vec()
        }
    };
    Ok(Actuator {
        kind: ActuatorKind::Zone {
            a,
            b,
            profile: profile.map(|p| p.to_vec()),
        },
        influence,
    })
}

pub fn make_pointwise(b: f64, n_modes: usize) -> Result<Actuator> {
    if !(b > 0.0 && b < 1.0) {
        return Err(Error::Location(format!(
            "pointwise actuator must sit strictly inside (0,1), got {b}"
        )));
    }
    if n_modes == 0 {
        return Err(Error::validation("n_modes", "at least one mode is required"));
    }
    Ok(Actuator {
        kind: ActuatorKind::Pointwise { b },
        influence: (1..=n_modes).map(|i| pointwise_coefficient(b, i)).collect(),
    })
}

/// How `G` is described.
#[derive(Debug, Clone, PartialEq)]
pub enum TargetSpec {
    /// `G = span{w_i : i ∈ indices}` (1-based).
    Modes(Vec<usize>),
    /// `G` spanned by the given coordinate vectors.
    Basis(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TargetSubspace {
    basis: DMatrix<f64>,
    polar: DMatrix<f64>,
    projector: DMatrix<f64>,
}

const RANK_TOL: f64 = 1e-10;

pub fn make_target(spec: &TargetSpec, n_modes: usize) -> Result<TargetSubspace> {
    if n_modes == 0 {
        return Err(Error::validation("n_modes", "at least one mode is required"));
    }
    match spec {
        TargetSpec::Modes(indices) => {
            let mut seen = vec![false; n_modes];
            for &i in indices {
                if i == 0 || i > n_modes {
                    return Err(Error::validation(
                        "target.indices",
                        format!("mode {i} outside 1..={n_modes}"),
                    ));
                }
                if seen[i - 1] {
                    return Err(Error::Rank(format!("mode {i} listed twice")));
                }
                seen[i - 1] = true;
            }
            let inside: Vec<usize> = (0..n_modes).filter(|&k| seen[k]).collect();
            let outside: Vec<usize> = (0..n_modes).filter(|&k| !seen[k]).collect();
            let unit_columns = |idx: &[usize]| {
                let mut m = DMatrix::zeros(n_modes, idx.len());
                for (c, &k) in idx.iter().enumerate() {
                    m[(k, c)] = 1.0;
                }
                m
            };
            let basis = unit_columns(&inside);
            let polar = unit_columns(&outside);
            let mut projector = DMatrix::zeros(n_modes, n_modes);
            for &k in &outside {
                projector[(k, k)] = 1.0;
            }
            Ok(TargetSubspace {
                basis,
                polar,
                projector,
            })
        }
        TargetSpec::Basis(vectors) => {
            for (j, v) in vectors.iter().enumerate() {
                if v.len() != n_modes {
                    return Err(Error::validation(
                        "target.vectors",
                        format!("vector {j} has {} entries, expected {n_modes}", v.len()),
                    ));
                }
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(Error::validation("target.vectors", format!("vector {j} is not finite")));
                }
            }
            let m = vectors.len();
            if m > n_modes {
                return Err(Error::Rank(format!("{m} vectors in dimension {n_modes}")));
            }
            let basis = if m == 0 {
                DMatrix::zeros(n_modes, 0)
            } else {
                let a = DMatrix::from_fn(n_modes, m, |r, c| vectors[c][r]);
                let svd = a.svd(true, false);
                let smax = svd.singular_values.max();
                let smin = svd.singular_values.min();
                if !(smin > RANK_TOL * smax) {
                    return Err(Error::Rank(format!(
                        "singular values span [{smin:.3e}, {smax:.3e}]"
                    )));
                }
                svd.u.expect("requested U")
            };
            let complement = DMatrix::identity(n_modes, n_modes) - &basis * basis.transpose();
            let eig = SymmetricEigen::new(complement);
            let keep: Vec<usize> = (0..n_modes).filter(|&k| eig.eigenvalues[k] > 0.5).collect();
            let mut polar = DMatrix::zeros(n_modes, keep.len());
            for (c, &k) in keep.iter().enumerate() {
                polar.set_column(c, &eig.eigenvectors.column(k));
            }
            let projector = &polar * polar.transpose();
            Ok(TargetSubspace {
                basis,
                polar,
                projector,
            })
        }
    }
}

impl TargetSubspace {
    pub fn n_modes(&self) -> usize {
        self.projector.nrows()
    }

    /// Dimension of `G`.
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// Dimension of `G°`.
    pub fn codim(&self) -> usize {
        self.polar.ncols()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn polar_basis(&self) -> &DMatrix<f64> {
        &self.polar
    }

    pub fn projector(&self) -> &DMatrix<f64> {
        &self.projector
    }

    /// `P v`.
    pub fn project(&self, v: &[f64]) -> Vec<f64> {
        (&self.projector * DVector::from_column_slice(v)).as_slice().to_vec()
    }

    /// `‖P v‖`.
    pub fn distance(&self, v: &[f64]) -> f64 {
        self.polar_coords(v).norm()
    }

    /// Coordinates of `v` against the polar basis, `V_pᵀ v`.
    pub fn polar_coords(&self, v: &[f64]) -> DVector<f64> {
        self.polar.transpose() * DVector::from_column_slice(v)
    }

    /// `V_p c`, back to mode coordinates.
    pub fn from_polar(&self, c: &DVector<f64>) -> Vec<f64> {
        (&self.polar * c).as_slice().to_vec()
    }

    /// 1-based modes on which some polar-basis vector has a nonzero entry.
    pub fn polar_modes(&self) -> Vec<usize> {
        (0..self.n_modes())
            .filter(|&r| self.polar.row(r).iter().any(|x| x.abs() > 1e-12))
            .map(|r| r + 1)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrategicReport {
    pub strategic: bool,
    /// 1-based polar modes the actuator does not see.
    pub dead_modes: Vec<usize>,
}

/// Strategic iff `|b_i| > tol·max_j |b_j|` on every mode touched by `G°`.
pub fn is_strategic(actuator: &Actuator, target: &TargetSubspace, tol: f64) -> StrategicReport {
    let b = actuator.influence();
    let scale = b.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let dead_modes: Vec<usize> = target
        .polar_modes()
        .into_iter()
        .filter(|&i| i > b.len() || !(b[i - 1].abs() > tol * scale))
        .collect();
    StrategicReport {
        strategic: dead_modes.is_empty(),
        dead_modes,
    }
}

/// Whether `rhs` lies in the range of the symmetric positive semidefinite
/// `gramian`, judged by the least-squares residual relative to `‖rhs‖`.
pub fn eec_criterion(gramian: &DMatrix<f64>, rhs: &DVector<f64>, tol: f64) -> bool {
    let norm = rhs.norm();
    if norm == 0.0 {
        return true;
    }
    let svd = gramian.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let cutoff = RANK_TOL * smax.max(f64::MIN_POSITIVE);
    let x = match svd.solve(rhs, cutoff) {
        Ok(x) => x,
        Err(_) => return false,
    };
    (gramian * x - rhs).norm() <= tol * norm
}
