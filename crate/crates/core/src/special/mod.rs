//! Special functions behind the sub-diffusion solution operators.

mod gamma;
mod mittag_leffler;
mod stable;

pub use gamma::{gamma_fn, ln_gamma, rgamma, sin_pi};
pub use mittag_leffler::{mittag_leffler, mittag_leffler_series};
pub use stable::{
    phi_alpha, phi_alpha_moment, psi_alpha, stable_density, stable_density_integral,
    stable_tail_mass,
};
