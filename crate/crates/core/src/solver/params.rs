use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Proximal weight of the block updates. Fixed at 1.
pub const PROX_WEIGHT: f64 = 1.0;

/// Model and solver hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperParams {
    /// Graph-regularization weight.
    pub mu: f64,
    /// Weight of the coupling term `‖X − U1⋯V‖²`.
    pub theta: f64,
    /// Gradient stepsize of the X update, strictly inside (0, 2).
    pub alpha: f64,
    /// Neighbour count used to sparsify similarities.
    pub p: usize,
    /// Latent sizes `(k1, k2)` or `(k1, k2, k3)`.
    pub dims: Vec<usize>,
    /// Number of iterations.
    pub iters: usize,
}

/// Cross-validation setting a preset was tuned for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// CV1: random cells hidden.
    Entries,
    /// CV2: whole virus columns hidden.
    Viruses,
    /// CV3: whole drug rows hidden.
    Drugs,
}

impl HyperParams {
    pub fn sigma(&self) -> f64 {
        PROX_WEIGHT
    }

    /// Tuned values per scheme for the 2- and 3-layer models.
    pub fn preset(scheme: Scheme, layers: usize) -> Result<Self> {
        let (theta, p, alpha, mu, dims): (f64, usize, f64, f64, &[usize]) = match (scheme, layers) {
            (Scheme::Entries, 2) => (1.0, 2, 0.05, 100.0, &[17, 15]),
            (Scheme::Viruses, 2) => (10.0, 2, 0.01, 50.0, &[20, 15]),
            (Scheme::Drugs, 2) => (2.0, 5, 0.1, 10.0, &[17, 10]),
            (Scheme::Entries, 3) => (1.0, 5, 1.0, 5.0, &[23, 10, 7]),
            (Scheme::Viruses, 3) => (1.0, 5, 1.0, 0.01, &[20, 15, 10]),
            (Scheme::Drugs, 3) => (2.0, 5, 1.5, 5.0, &[23, 10, 7]),
            _ => return Err(Error::param(format!("no preset for {layers} layers"))),
        };
        Ok(Self {
            mu,
            theta,
            alpha,
            p,
            dims: dims.to_vec(),
            iters: 10,
        })
    }

    pub fn layers(&self) -> usize {
        self.dims.len()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 2.0) {
            return Err(Error::param(format!(
                "alpha = {} outside (0, 2)",
                self.alpha
            )));
        }
        if !(self.theta > 0.0) || !self.theta.is_finite() {
            return Err(Error::param(format!("theta = {} must be > 0", self.theta)));
        }
        if !(self.mu >= 0.0) || !self.mu.is_finite() {
            return Err(Error::param(format!("mu = {} must be >= 0", self.mu)));
        }
        if self.dims.len() < 2 || self.dims.iter().any(|&d| d == 0) {
            return Err(Error::param(format!(
                "dims {:?}: need at least two positive latent sizes",
                self.dims
            )));
        }
        if self.iters == 0 {
            return Err(Error::param("iters must be >= 1"));
        }
        if self.p == 0 {
            return Err(Error::param("p must be >= 1"));
        }
        Ok(())
    }
}
