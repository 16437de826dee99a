//! One-sided stable density `ψ_α` (Laplace transform `e^{−λ^α}`) and the
//! derived kernel `φ_α(θ) = (1/α) θ^{−1−1/α} ψ_α(θ^{−1/α})`.

use std::f64::consts::PI;

use super::gamma::{gamma_fn, ln_gamma};
use crate::error::{Error, Result};
use crate::quadrature;

const MAX_TERMS: usize = 500;
const REL_TERM_TOL: f64 = 1e-16;
/// Largest tolerated ratio between the biggest series term and the sum.
const CANCELLATION_LIMIT: f64 = 1e6;

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("alpha must lie strictly in (0,1), got {alpha}")))
    }
}

fn check_theta(theta: f64) -> Result<()> {
    if theta > 0.0 && theta.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("theta must be positive and finite, got {theta}")))
    }
}

/// Sums `(1/π) Σ_{n≥1} (−1)^{n−1} x^n c_n sin(nπα)` where `ln c_n` is given.
fn alternating_series<F>(alpha: f64, ln_x: f64, ln_coeff: F, what: &str) -> Result<f64>
where
    F: Fn(usize) -> f64,
{
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    let mut largest = 0.0f64;
    let mut prev_bound = f64::INFINITY;
    let mut growing = false;
    for n in 1..=MAX_TERMS {
        let bound = (n as f64 * ln_x + ln_coeff(n)).exp() / PI;
        let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
        let term = sign * bound * (n as f64 * PI * alpha).sin();
        largest = largest.max(term.abs());
        let t = sum + term;
        if sum.abs() >= term.abs() {
            comp += (sum - t) + term;
        } else {
            comp += (term - t) + sum;
        }
        sum = t;
        let total = sum + comp;
        // Past the peak the magnitudes decrease faster than geometrically, so
        // the tail is bounded by a small multiple of the current bound.
        let decreasing = bound < prev_bound;
        growing = !decreasing;
        if decreasing && n > 2 && bound <= REL_TERM_TOL * total.abs() {
            if largest > CANCELLATION_LIMIT * total.abs() || total <= 0.0 {
                return Err(Error::LossOfPrecision(format!(
                    "{what}: alternating series cancels by a factor {:.1e}",
                    largest / total.abs()
                )));
            }
            return Ok(total);
        }
        prev_bound = bound;
    }
    let total = sum + comp;
    if growing || !total.is_finite() || largest > CANCELLATION_LIMIT * total.abs() {
        return Err(Error::LossOfPrecision(format!(
            "{what}: terms still reach {largest:.1e} after {MAX_TERMS} terms"
        )));
    }
    Err(Error::NonConvergence(format!(
        "{what}: series needs more than {MAX_TERMS} terms"
    )))
}

/// `ψ_α(θ)` from its defining series
/// `(1/π) Σ (−1)^{n−1} θ^{−αn−1} Γ(nα+1)/n! sin(nπα)`.
///
/// Terms are added until their magnitude falls below `1e−16·|sum|`, at most
/// 500 of them. Small `θ` makes the series alternate violently; that case is
/// reported as [`Error::LossOfPrecision`] rather than returned inaccurately.
pub fn psi_alpha(alpha: f64, theta: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_theta(theta)?;
    let ln_x = -alpha * theta.ln();
    let sum = alternating_series(
        alpha,
        ln_x,
        |n| {
            let n = n as f64;
            ln_gamma(n * alpha + 1.0).unwrap_or(f64::NAN) - ln_gamma(n + 1.0).unwrap_or(f64::NAN)
        },
        "psi_alpha",
    )?;
    Ok(sum / theta)
}

/// Mass of `ψ_α` on `[θ, ∞)`, from the term-wise integrated series.
pub fn stable_tail_mass(alpha: f64, theta: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_theta(theta)?;
    let ln_x = -alpha * theta.ln();
    alternating_series(
        alpha,
        ln_x,
        |n| {
            let n = n as f64;
            ln_gamma(n * alpha).unwrap_or(f64::NAN) - ln_gamma(n + 1.0).unwrap_or(f64::NAN)
        },
        "stable_tail_mass",
    )
}

/// `ψ_α(θ)` from the integral representation
/// `α/(1−α) · θ^{−1/(1−α)} · (1/π) ∫_0^π A(φ) exp(−θ^{−α/(1−α)} A(φ)) dφ` with
/// `A(φ) = [sin(αφ)^α sin((1−α)φ)^{1−α} / sin φ]^{1/(1−α)}`.
///
/// Accurate where the series is not (small `θ`).
pub fn stable_density_integral(alpha: f64, theta: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_theta(theta)?;
    let beta = 1.0 - alpha;
    let c = theta.powf(-alpha / beta);
    let a_fn = |phi: f64| -> f64 {
        let num = (alpha * phi).sin().powf(alpha) * (beta * phi).sin().powf(beta);
        (num / phi.sin()).powf(1.0 / beta)
    };
    // The integrand peaks where c·A(φ) is O(1); scale it out to keep the
    // quadrature tolerance meaningful when the density is tiny.
    let a0 = alpha.powf(alpha / beta) * beta;
    let shift = c * a0;
    let prefactor = ((alpha / (beta * PI)).ln() - theta.ln() / beta - shift).exp();
    if prefactor == 0.0 {
        // The integral is O(1) after the shift, so the density underflows.
        return Ok(0.0);
    }
    let integrand = |phi: f64| -> f64 {
        let a = a_fn(phi);
        if !a.is_finite() {
            return 0.0;
        }
        a * (-(c * a - shift)).exp()
    };
    let est = quadrature::integrate(integrand, 0.0, PI, 0.0, 1e-13)?;
    Ok(prefactor * est.value)
}

/// `ψ_α(θ)` on the whole half line: the series where it is well
/// conditioned, the integral representation elsewhere.
pub fn stable_density(alpha: f64, theta: f64) -> Result<f64> {
    match psi_alpha(alpha, theta) {
        Ok(v) => Ok(v),
        Err(Error::LossOfPrecision(_)) | Err(Error::NonConvergence(_)) => {
            stable_density_integral(alpha, theta)
        }
        Err(e) => Err(e),
    }
}

/// `φ_α(θ) = (1/α) θ^{−1−1/α} ψ_α(θ^{−1/α})`.
pub fn phi_alpha(alpha: f64, theta: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_theta(theta)?;
    let x = theta.powf(-1.0 / alpha);
    if x == 0.0 || !x.is_finite() {
        return Ok(0.0);
    }
    Ok(stable_density(alpha, x)? * theta.powf(-1.0 - 1.0 / alpha) / alpha)
}

/// `∫_0^∞ θ^ν φ_α(θ) dθ = Γ(1+ν)/Γ(1+αν)`.
pub fn phi_alpha_moment(alpha: f64, nu: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(nu >= 0.0) || !nu.is_finite() {
        return Err(Error::Domain(format!("moment order must be >= 0, got {nu}")));
    }
    Ok(gamma_fn(1.0 + nu)? / gamma_fn(1.0 + alpha * nu)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn levy(theta: f64) -> f64 {
        (2.0 * PI.sqrt()).recip() * theta.powf(-1.5) * (-0.25 / theta).exp()
    }

    #[test]
    fn half_order_matches_levy_smirnov() {
        for theta in [0.5, 1.0, 2.0, 10.0] {
            assert_relative_eq!(psi_alpha(0.5, theta).unwrap(), levy(theta), max_relative = 1e-12);
            assert_relative_eq!(
                stable_density_integral(0.5, theta).unwrap(),
                levy(theta),
                max_relative = 1e-11
            );
        }
    }

    #[test]
    fn small_theta_is_flagged_then_recovered() {
        let r = psi_alpha(0.75, 0.05);
        assert!(matches!(r, Err(Error::LossOfPrecision(_))), "{r:?}");
        let v = stable_density(0.5, 0.02).unwrap();
        assert_relative_eq!(v, levy(0.02), max_relative = 1e-10);
    }

    #[test]
    fn series_and_integral_agree() {
        for alpha in [0.25, 0.4, 0.6, 0.75] {
            for theta in [0.8, 1.5, 4.0] {
                let s = psi_alpha(alpha, theta).unwrap();
                let i = stable_density_integral(alpha, theta).unwrap();
                assert_relative_eq!(s, i, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn domain_errors() {
        for a in [0.0, 1.0, -0.2, 1.5] {
            assert!(matches!(psi_alpha(a, 1.0), Err(Error::Domain(_))));
        }
        assert!(matches!(psi_alpha(0.5, 0.0), Err(Error::Domain(_))));
        assert_eq!(stable_density(0.75, 1e-60).unwrap(), 0.0);
        assert!(matches!(phi_alpha_moment(0.5, -1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn moment_values() {
        assert_eq!(phi_alpha_moment(0.3, 0.0).unwrap(), 1.0);
        assert_relative_eq!(
            phi_alpha_moment(0.4, 1.0).unwrap(),
            1.0 / gamma_fn(1.4).unwrap(),
            max_relative = 1e-15
        );
    }
}
