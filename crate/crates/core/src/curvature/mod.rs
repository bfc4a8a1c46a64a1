//! Fractional mean curvature H_{M,s}(z).
//!
//! Three independent routes:
//! * [`fmc_estimate`] — Monte Carlo over the side partition (any dimension);
//! * [`fmc_flux`] — exact boundary-flux evaluation for planar polylines;
//! * [`fmc_graph`] — deterministic quadrature of the graph (F-integral) form.

mod flux;
mod graph;
mod mc;

pub use flux::{fmc_flux, FluxOptions};
pub use graph::{f_closed, f_eval, fmc_consistency, fmc_graph, Consistency, FnGraph, GraphFunction, GraphOptions, MeshGraph};
pub use mc::{fmc_estimate, fmc_estimate_with_frame, near_field_ratio};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::geometry::Hypersurface;
use crate::params::Params;

/// A value with a statistical error and a deterministic truncation bound.
/// The reported interval is `value ± (3·std_error + trunc_bound)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
    pub trunc_bound: f64,
    pub n_eval: u64,
    pub seed: u64,
}

impl Estimate {
    pub fn exact(value: f64, trunc_bound: f64, n_eval: u64) -> Self {
        Estimate { value, std_error: 0.0, trunc_bound, n_eval, seed: 0 }
    }

    pub fn half_width(&self) -> f64 {
        3.0 * self.std_error + self.trunc_bound
    }

    pub fn lo(&self) -> f64 {
        self.value - self.half_width()
    }

    pub fn hi(&self) -> f64 {
        self.value + self.half_width()
    }

    pub fn contains(&self, x: f64) -> bool {
        (self.value - x).abs() <= self.half_width()
    }

    /// Sign resolved: zero lies outside the interval.
    pub fn is_significant(&self) -> bool {
        !self.contains(0.0)
    }

    pub fn overlaps(&self, o: &Estimate) -> bool {
        self.lo() <= o.hi() && o.lo() <= self.hi()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain struct serializes")
    }
}

/// Sampling and truncation controls for the Monte Carlo estimators.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Radius of the excised ball around the base point.
    pub r_near: f64,
    /// Outer radius. When it exceeds the reach of M from z the far field is
    /// exact (labels are constant along rays out there).
    pub r_far: f64,
    pub n_samples: usize,
    pub seed: u64,
    /// Hölder exponent assumed by the near-field bound.
    pub alpha_reg: f64,
    pub exec: Execution,
}

pub const DEFAULT_N_SAMPLES: usize = 1_000_000;
pub const R_NEAR_REL: f64 = 1e-3;
pub const R_FAR_REL: f64 = 1e3;

impl QuadratureSpec {
    /// Defaults scaled to the surface: r_near = 1e-3·diam, R_far = 1e3·diam.
    pub fn for_surface(m: &Hypersurface, n_samples: usize, seed: u64) -> Self {
        Self::for_diameter(m.diam(), n_samples, seed)
    }

    pub fn for_diameter(diam: f64, n_samples: usize, seed: u64) -> Self {
        QuadratureSpec {
            r_near: R_NEAR_REL * diam,
            r_far: R_FAR_REL * diam,
            n_samples,
            seed,
            alpha_reg: 1.0,
            exec: Execution::default(),
        }
    }

    pub fn with_exec(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    pub fn validate(&self, params: &Params) -> Result<()> {
        if !(self.r_near > 0.0 && self.r_near < self.r_far) {
            return Err(Error::InvalidParams(format!("need 0 < r_near < R_far, got {} / {}", self.r_near, self.r_far)));
        }
        if !(self.alpha_reg > params.s && self.alpha_reg <= 1.0) {
            return Err(Error::InvalidParams(format!("alpha_reg must lie in (s, 1], got {}", self.alpha_reg)));
        }
        if self.n_samples == 0 {
            return Err(Error::InvalidParams("n_samples must be positive".into()));
        }
        Ok(())
    }

    pub fn header_lines(&self) -> Vec<String> {
        vec![
            format!("r_near={}", self.r_near),
            format!("R_far={}", self.r_far),
            format!("n_samples={}", self.n_samples),
            format!("seed={}", self.seed),
            format!("alpha_reg={}", self.alpha_reg),
        ]
    }
}
