//! Gamma function via a 15-term Lanczos approximation (g = 607/128), with
//! exact products for small positive integers and reflection below 1/2.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 607.0 / 128.0;
const LANCZOS: [f64; 15] = [
    0.999_999_999_999_997_091_82,
    57.156_235_665_862_923_517,
    -59.597_960_355_475_491_248,
    14.136_097_974_741_747_174,
    -0.491_913_816_097_620_199_78,
    0.339_946_499_848_118_886_99e-4,
    0.465_236_289_270_485_756_65e-4,
    -0.983_744_753_048_795_646_77e-4,
    0.158_088_703_224_912_488_84e-3,
    -0.210_264_441_724_104_883_19e-3,
    0.217_439_618_115_212_643_20e-3,
    -0.164_318_106_536_763_890_22e-3,
    0.844_182_239_838_527_432_93e-4,
    -0.261_908_384_015_814_086_70e-4,
    0.368_991_826_595_316_227_04e-5,
];
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_741_78;

fn is_pole(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

fn lanczos_sum(x: f64) -> f64 {
    // Argument is the shifted value x − 1.
    let mut a = LANCZOS[0];
    for (k, c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + k as f64);
    }
    a
}

/// Γ(x) for x ≥ 1/2.
fn gamma_positive(x: f64) -> f64 {
    if x == x.floor() && x <= 171.0 {
        return (2..x as u32).fold(1.0, |acc, k| acc * k as f64);
    }
    let y = x - 1.0;
    let t = y + LANCZOS_G + 0.5;
    let a = lanczos_sum(y);
    // Split the power so that t^{y+1/2} does not overflow before e^{−t} applies.
    let half = t.powf(0.5 * (y + 0.5));
    (2.0 * PI).sqrt() * half * ((-t).exp() * half) * a
}

/// `sin(πx)` with exact zeros at the integers.
pub fn sin_pi(x: f64) -> f64 {
    let r = x - 2.0 * (0.5 * x).round();
    if r == 0.0 || r.abs() == 1.0 {
        return 0.0;
    }
    (PI * r).sin()
}

/// Euler's gamma function.
///
/// Fails at the poles `0, −1, −2, …` and for non-finite input.
pub fn gamma_fn(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("gamma of non-finite value {x}")));
    }
    if is_pole(x) {
        return Err(Error::Pole(x));
    }
    if x >= 0.5 {
        Ok(gamma_positive(x))
    } else {
        Ok(PI / (sin_pi(x) * gamma_positive(1.0 - x)))
    }
}

/// `1/Γ(x)`, extended by zero at the poles.
pub fn rgamma(x: f64) -> f64 {
    if is_pole(x) {
        return 0.0;
    }
    if x >= 0.5 {
        if x > 171.0 {
            return (-ln_gamma_positive(x)).exp();
        }
        1.0 / gamma_positive(x)
    } else {
        let g = gamma_positive(1.0 - x);
        if g.is_infinite() {
            // 1/Γ(x) = sin(πx) Γ(1−x)/π overflows; only reachable for x < −170.
            return f64::INFINITY.copysign(sin_pi(x));
        }
        sin_pi(x) * g / PI
    }
}

fn ln_gamma_positive(x: f64) -> f64 {
    let y = x - 1.0;
    let t = y + LANCZOS_G + 0.5;
    LN_SQRT_2PI + (y + 0.5) * t.ln() - t + lanczos_sum(y).ln()
}

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("ln_gamma needs x > 0, got {x}")));
    }
    if x < 0.5 {
        // Γ(x) = Γ(x+1)/x keeps the Lanczos argument in range.
        return Ok(ln_gamma_positive(x + 1.0) - x.ln());
    }
    Ok(ln_gamma_positive(x))
}
