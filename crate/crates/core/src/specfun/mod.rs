//! Special functions and quadrature primitives.

mod beta;
mod debye;
mod gamma;
mod normal;
mod quadrature;

pub use beta::{inv_reg_inc_beta, ln_beta, reg_inc_beta};
pub use debye::debye_like_integral;
pub use gamma::{inv_reg_lower_inc_gamma, log_gamma, reg_lower_inc_gamma, reg_upper_inc_gamma};
pub use normal::{std_normal_cdf, std_normal_ln_pdf, std_normal_pdf, std_normal_quantile};
pub use quadrature::{
    integrate, integrate_half_line, integrate_unit_interval, integrate_with_breaks, QuadratureConfig,
};
pub(crate) use quadrature::{integrate_fallible, integrate_half_line_fallible};

pub(crate) use beta::inc_beta;
pub(crate) use gamma::{digamma, inverse_lower_regularized, ln_gamma, ln_std_gamma_density, lower_regularized};
pub(crate) use normal::normal_quantile;
