//! Functions tabulated on an ordered node set over [0, 1].

use crate::error::{Error, Result};

/// Values on strictly increasing nodes (endpoints included) with local
/// polynomial interpolation of a declared degree between nodes. Evaluation at
/// a node returns the stored value exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    nodes: Vec<f64>,
    values: Vec<f64>,
    degree: usize,
}

impl GridFunction {
    pub fn new(nodes: Vec<f64>, values: Vec<f64>, degree: usize) -> Result<Self> {
        if degree == 0 {
            return Err(Error::ZeroDegree);
        }
        if nodes.len() != values.len() {
            return Err(Error::GridLengthMismatch {
                nodes: nodes.len(),
                values: values.len(),
            });
        }
        if nodes.len() < 2 || nodes[0] != 0.0 || *nodes.last().unwrap() != 1.0 {
            return Err(Error::InvalidGrid);
        }
        if nodes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidGrid);
        }
        Ok(Self {
            nodes,
            values,
            degree,
        })
    }

    /// Tabulate `f` on the given nodes.
    pub fn from_fn<F: FnMut(f64) -> f64>(nodes: Vec<f64>, mut f: F, degree: usize) -> Result<Self> {
        let values = nodes.iter().map(|&t| f(t)).collect();
        Self::new(nodes, values, degree)
    }

    /// The zero function on the given nodes.
    pub fn zero(nodes: Vec<f64>, degree: usize) -> Result<Self> {
        let values = vec![0.0; nodes.len()];
        Self::new(nodes, values, degree)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Replace the values, keeping nodes and degree.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(self.nodes.clone(), values, self.degree)
    }

    pub fn max_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().fold(f64::INFINITY, |m, &v| m.min(v))
    }

    /// Interpolation stencil for evaluating at `t`: the first node index of a
    /// `degree + 1`-wide window and the window's Lagrange weights.
    pub fn stencil(&self, t: f64) -> (usize, Vec<f64>) {
        stencil(&self.nodes, self.degree, t)
    }

    /// Evaluate at `t` in [0, 1] (clamped outside).
    pub fn eval(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, 1.0);
        // exact hit keeps nodal values bit-exact
        if let Ok(i) = self.nodes.binary_search_by(|n| n.partial_cmp(&t).unwrap()) {
            return self.values[i];
        }
        let (start, weights) = self.stencil(t);
        weights
            .iter()
            .enumerate()
            .map(|(k, w)| w * self.values[start + k])
            .sum()
    }

    pub fn sup_distance(&self, other: &GridFunction) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// Shared stencil construction so operator plans interpolate exactly the way
/// [`GridFunction::eval`] does.
pub fn stencil(nodes: &[f64], degree: usize, t: f64) -> (usize, Vec<f64>) {
    let n = nodes.len();
    let width = (degree + 1).min(n);
    // interval containing t
    let interval = match nodes.binary_search_by(|x| x.partial_cmp(&t).unwrap()) {
        Ok(i) => i.min(n - 2),
        Err(i) => i.saturating_sub(1).min(n - 2),
    };
    let start = interval.saturating_sub((width - 1) / 2).min(n - width);
    let window = &nodes[start..start + width];
    let mut weights = vec![0.0; width];
    for (j, wj) in weights.iter_mut().enumerate() {
        let mut w = 1.0;
        for (k, xk) in window.iter().enumerate() {
            if k != j {
                w *= (t - xk) / (window[j] - xk);
            }
        }
        *wj = w;
    }
    (start, weights)
}

/// Clustered nodes on [0, 1] (cosine-spaced, endpoints included), merged with
/// `extra` points and deduplicated.
pub fn clustered_nodes(n: usize, extra: &[f64]) -> Vec<f64> {
    let n = n.max(2);
    let mut nodes: Vec<f64> = (0..n)
        .map(|i| 0.5 * (1.0 - (std::f64::consts::PI * i as f64 / (n - 1) as f64).cos()))
        .collect();
    nodes[0] = 0.0;
    nodes[n - 1] = 1.0;
    for &p in extra {
        if (0.0..=1.0).contains(&p) {
            nodes.push(p);
        }
    }
    nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());
    nodes.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    // dedup_by removes the later element; re-pin the endpoints
    nodes[0] = 0.0;
    let last = nodes.len() - 1;
    nodes[last] = 1.0;
    nodes
}
