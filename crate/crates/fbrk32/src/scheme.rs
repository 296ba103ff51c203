//! Time-stepping scheme identifiers and the forward-backward weight triple.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// The three forward-backward averaging weights blending new and old
/// thickness data inside the momentum stages.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FBWeights {
    pub beta1: f64,
    pub beta2: f64,
    pub beta3: f64,
}

impl FBWeights {
    pub fn new(beta1: f64, beta2: f64, beta3: f64) -> Self {
        Self {
            beta1,
            beta2,
            beta3,
        }
    }

    /// The weight choice that reduces the thickness path to plain RK3 and
    /// makes the momentum path approximate it.
    pub fn rk3_reduction() -> Self {
        Self::new(0.0, 2.0 / 3.0, 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.beta1.is_finite() && self.beta2.is_finite() && self.beta3.is_finite()
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.beta1, self.beta2, self.beta3]
    }
}

impl fmt::Display for FBWeights {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.beta1, self.beta2, self.beta3)
    }
}

/// A time integrator selectable by the solver and the experiment harness.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum SchemeSpec {
    /// Three-stage second-order scheme with forward-backward thickness
    /// averaging in the momentum stages.
    Fbrk32(FBWeights),
    /// Three-stage Runge-Kutta (1/3, 1/2, 1 stage fractions).
    Rk3,
    /// Three-stage third-order strong-stability-preserving Runge-Kutta.
    Ssprk3,
    /// Classical four-stage fourth-order Runge-Kutta.
    Rk4,
}

impl SchemeSpec {
    pub fn n_stages(&self) -> u32 {
        match self {
            SchemeSpec::Fbrk32(_) | SchemeSpec::Rk3 | SchemeSpec::Ssprk3 => 3,
            SchemeSpec::Rk4 => 4,
        }
    }
}

impl fmt::Display for SchemeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SchemeSpec::Fbrk32(w) => {
                write!(f, "fbrk32:{},{},{}", w.beta1, w.beta2, w.beta3)
            }
            SchemeSpec::Rk3 => write!(f, "rk3"),
            SchemeSpec::Ssprk3 => write!(f, "ssprk3"),
            SchemeSpec::Rk4 => write!(f, "rk4"),
        }
    }
}

/// Error produced when a scheme string does not parse.
#[derive(Debug, thiserror::Error, PartialEq)]
#[error("invalid scheme '{0}': expected ssprk3 | rk3 | rk4 | fbrk32:<b1>,<b2>,<b3>")]
pub struct ParseSchemeError(pub String);

impl FromStr for SchemeSpec {
    type Err = ParseSchemeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rk3" => return Ok(SchemeSpec::Rk3),
            "ssprk3" => return Ok(SchemeSpec::Ssprk3),
            "rk4" => return Ok(SchemeSpec::Rk4),
            _ => {}
        }
        if let Some(rest) = s.strip_prefix("fbrk32:") {
            let parts: Vec<&str> = rest.split(',').collect();
            if parts.len() == 3 {
                let mut vals = [0.0f64; 3];
                for (v, p) in vals.iter_mut().zip(&parts) {
                    *v = p
                        .trim()
                        .parse::<f64>()
                        .map_err(|_| ParseSchemeError(s.to_string()))?;
                }
                let w = FBWeights::new(vals[0], vals[1], vals[2]);
                if !w.is_finite() {
                    return Err(ParseSchemeError(s.to_string()));
                }
                return Ok(SchemeSpec::Fbrk32(w));
            }
        }
        Err(ParseSchemeError(s.to_string()))
    }
}
