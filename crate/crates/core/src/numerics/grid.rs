use serde::Serialize;

use crate::{Error, Result};

/// Radial sample nodes: linear on `[0, 1]`, uniform in `ln s` beyond.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogGrid {
    nodes: Vec<f64>,
    tau_form: bool,
}

impl LogGrid {
    pub const DEFAULT_LINEAR: usize = 512;
    pub const DEFAULT_PER_DECADE: usize = 256;
    const MIN_NODES: usize = 64;

    /// Validates an explicit node list.
    pub fn from_nodes(nodes: Vec<f64>, tau_form: bool) -> Result<Self> {
        if nodes.len() < Self::MIN_NODES {
            return Err(Error::InvalidInput(format!(
                "grid needs at least {} nodes, got {}",
                Self::MIN_NODES,
                nodes.len()
            )));
        }
        if nodes[0] != 0.0 {
            return Err(Error::InvalidInput("grid must start at 0".into()));
        }
        if !nodes.last().unwrap().is_finite() {
            return Err(Error::InvalidInput("last grid node must be finite".into()));
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput("grid nodes must be strictly increasing".into()));
        }
        Ok(LogGrid { nodes, tau_form })
    }

    /// Default layout up to `s_max`.
    pub fn standard(s_max: f64) -> Result<Self> {
        Self::with_density(s_max, Self::DEFAULT_LINEAR, Self::DEFAULT_PER_DECADE)
    }

    /// `n_linear` nodes on `[0, min(1, s_max)]`, then `per_decade` nodes per decade.
    pub fn with_density(s_max: f64, n_linear: usize, per_decade: usize) -> Result<Self> {
        if !(s_max > 0.0 && s_max.is_finite()) {
            return Err(Error::InvalidInput(format!("s_max must be positive and finite, got {s_max}")));
        }
        if n_linear < 2 || per_decade < 1 {
            return Err(Error::InvalidInput("grid densities too small".into()));
        }
        let inner = s_max.min(1.0);
        let mut nodes: Vec<f64> =
            (0..n_linear).map(|i| inner * i as f64 / (n_linear - 1) as f64).collect();
        let mut tau_form = false;
        if s_max > 1.0 {
            tau_form = true;
            let decades = s_max.log10();
            let n = ((decades * per_decade as f64).ceil() as usize).max(1);
            let step = s_max.ln() / n as f64;
            for j in 1..n {
                nodes.push((step * j as f64).exp());
            }
            nodes.push(s_max);
        }
        Self::from_nodes(nodes, tau_form)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn last(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    pub fn tau_form(&self) -> bool {
        self.tau_form
    }

    /// Index `j` with `nodes[j] <= s <= nodes[j+1]`, clamped to the grid.
    pub fn locate(&self, s: f64) -> usize {
        let n = self.nodes.len();
        let j = self.nodes.partition_point(|&x| x <= s);
        j.saturating_sub(1).min(n - 2)
    }

    /// Same grid with each interval split into `factor` equal pieces.
    pub fn refined(&self, factor: usize) -> Self {
        let factor = factor.max(1);
        let mut nodes = Vec::with_capacity((self.nodes.len() - 1) * factor + 1);
        for w in self.nodes.windows(2) {
            for k in 0..factor {
                nodes.push(w[0] + (w[1] - w[0]) * k as f64 / factor as f64);
            }
        }
        nodes.push(self.last());
        LogGrid { nodes, tau_form: self.tau_form }
    }
}
