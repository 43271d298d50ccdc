use serde::{Deserialize, Serialize};

use super::{besicovitch_upper, Certificate};
use crate::error::Result;

/// One line of a `(d, p, params)` sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub d: u64,
    pub p: f64,
    pub family: String,
    pub params: String,
    pub construction: String,
    pub log_lower: f64,
    pub rate_per_dim: f64,
    pub upper_log: f64,
    pub log_floor: Option<f64>,
}

impl ScanRow {
    pub fn from_certificate(cert: &Certificate, log_floor: Option<f64>) -> Result<Self> {
        let d = cert.dim();
        Ok(ScanRow {
            d,
            p: cert.p,
            family: cert.density.family().name().to_string(),
            params: cert.density.params_string(),
            construction: cert.construction.name().to_string(),
            log_lower: cert.log_lower_bound,
            rate_per_dim: cert.rate_per_dim(),
            upper_log: besicovitch_upper(d, cert.p)?,
            log_floor,
        })
    }

    pub fn below_upper(&self) -> bool {
        self.log_lower <= self.upper_log
    }
}
