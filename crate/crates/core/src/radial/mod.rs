//! Radial measures `dμ = f(|y|) dλ^d` and the log-measures of balls under them.

mod density;
mod measure;

pub use density::{parse_kv, Family, Profile, RadialDensity, Segment, FAMILY_NAMES};
pub use measure::{
    growth_h, intersect_origin_ball, log_ball_at_origin, log_ball_offcenter,
    shell_ball_intersection, GrowthProfile,
};
