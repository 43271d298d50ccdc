//! Special functions and exact sphere, ball and cap measures in log space.

mod beta;
mod gamma;
mod logvalue;
mod sphere;

pub use beta::{ln_beta_inc_reg, ln_beta_inc_reg_xy};
pub use gamma::{gamma_ratio_bounds_hold, log_gamma};
pub use logvalue::{ln_one_minus_exp, log_sum_exp, LogValue, LOG_SUM_CUTOFF, LOG_TOL};
pub use sphere::{
    cap_area_bounds, cap_area_exact, ln_cap_fraction, log_ball_volume, log_sphere_area, CapSpec,
};

pub(crate) use sphere::{ball_volume_ln, cap_bound_logs, sine_from_cos, sphere_area_ln};
