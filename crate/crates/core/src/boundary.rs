use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// How samples outside `[0, N)` are resolved by the stencils.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryPolicy {
    /// Repeat the first sample to the left and the last sample to the right.
    #[default]
    ConstantExtension,
    /// Wrap indices modulo `N`.
    Periodic,
}

impl BoundaryPolicy {
    /// Value of `v` at a possibly out-of-range index.
    #[inline]
    pub fn sample(self, v: &[f64], idx: isize) -> f64 {
        let n = v.len() as isize;
        match self {
            BoundaryPolicy::ConstantExtension => v[idx.clamp(0, n - 1) as usize],
            BoundaryPolicy::Periodic => v[idx.rem_euclid(n) as usize],
        }
    }
}

impl fmt::Display for BoundaryPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryPolicy::ConstantExtension => f.write_str("constant"),
            BoundaryPolicy::Periodic => f.write_str("periodic"),
        }
    }
}

impl FromStr for BoundaryPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "constant" | "constant-extension" => Ok(BoundaryPolicy::ConstantExtension),
            "periodic" => Ok(BoundaryPolicy::Periodic),
            other => Err(Error::InvalidArgument(format!(
                "unknown boundary policy `{other}` (expected constant|periodic)"
            ))),
        }
    }
}
