//! Model parameters and the few closed-form constants everything else leans on.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Ambient dimension. Curves in the plane or surfaces in space; nothing else.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Dim {
    Two,
    Three,
}

impl Dim {
    pub fn n(self) -> usize {
        match self {
            Dim::Two => 2,
            Dim::Three => 3,
        }
    }

    pub fn from_n(n: usize) -> Result<Self> {
        match n {
            2 => Ok(Dim::Two),
            3 => Ok(Dim::Three),
            _ => Err(Error::InvalidParams(format!("dimension must be 2 or 3, got {n}"))),
        }
    }

    /// Surface measure of the unit sphere {|x| = 1} in R^N.
    /// This is the `omega_{N-1}` printed in every output header.
    pub fn sphere_measure(self) -> f64 {
        match self {
            Dim::Two => 2.0 * PI,
            Dim::Three => 4.0 * PI,
        }
    }

    /// Measure of the equatorial sphere one dimension down (`omega_{N-2}`).
    pub fn equator_measure(self) -> f64 {
        match self {
            Dim::Two => 2.0,
            Dim::Three => 2.0 * PI,
        }
    }

    /// `m_N = ∫_{S^{N-1}} (ω·e)^+ dω` — half the cosine moment of the sphere.
    pub fn half_cosine_moment(self) -> f64 {
        match self {
            Dim::Two => 2.0,
            Dim::Three => PI,
        }
    }
}

/// Dimension, fractional order and the kernel normalization.
///
/// The normalization `c_n` is not fixed by the theory ("some positive
/// dimensional constant"); we use 1 everywhere and every sign or vanishing
/// statement is independent of it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub dim: Dim,
    pub s: f64,
    pub c_n: f64,
}

impl Params {
    pub fn new(dim: Dim, s: f64) -> Result<Self> {
        Self::with_normalization(dim, s, 1.0)
    }

    pub fn with_normalization(dim: Dim, s: f64, c_n: f64) -> Result<Self> {
        let p = Params { dim, s, c_n };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.s > 0.0 && self.s < 1.0) {
            return Err(Error::InvalidParams(format!("s must lie in (0,1), got {}", self.s)));
        }
        if !(self.c_n > 0.0 && self.c_n.is_finite()) {
            return Err(Error::InvalidParams(format!("c_N must be positive, got {}", self.c_n)));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.dim.n()
    }

    /// Kernel exponent `N + s`.
    pub fn kernel_exponent(&self) -> f64 {
        self.n() as f64 + self.s
    }

    /// Provenance lines for CSV/JSON headers.
    pub fn header_lines(&self) -> Vec<String> {
        vec![
            format!("N={}", self.n()),
            format!("s={}", self.s),
            format!("c_N={}", self.c_n),
            format!("omega_(N-1)={}", self.dim.sphere_measure()),
        ]
    }
}
