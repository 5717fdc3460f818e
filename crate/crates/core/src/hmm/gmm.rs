use super::{HmmTopology, PhoneSet};
use crate::prelude::*;
use crate::{Error, Result};

pub const VARIANCE_FLOOR: f64 = 1e-4;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Diagonal-covariance Gaussian mixture with cached normalizers.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagGmm {
    dim: usize,
    weights: Vec<f64>,
    means: Vec<f64>,
    variances: Vec<f64>,
    inv_var: Vec<f64>,
    log_norm: Vec<f64>,
}

impl DiagGmm {
    /// `means` and `variances` are row-major `components x dim`. Weights are
    /// renormalized; variances are floored.
    pub fn new(dim: usize, weights: Vec<f64>, means: Vec<f64>, mut variances: Vec<f64>) -> Result<Self> {
        let m = weights.len();
        if m == 0 || dim == 0 {
            return Err(Error::InvalidParameter("mixture needs at least one component and dimension".into()));
        }
        if means.len() != m * dim || variances.len() != m * dim {
            return Err(Error::DimensionMismatch {
                expected: m * dim,
                got: means.len().min(variances.len()),
            });
        }
        if weights.iter().chain(&means).chain(&variances).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite mixture parameter".into()));
        }
        let total: f64 = weights.iter().sum();
        if weights.iter().any(|&w| w < 0.0) || total <= 0.0 {
            return Err(Error::InvalidParameter("mixture weights must be non-negative with positive sum".into()));
        }
        let weights: Vec<f64> = weights.iter().map(|w| w / total).collect();
        for v in variances.iter_mut() {
            *v = v.max(VARIANCE_FLOOR);
        }
        let inv_var = variances.iter().map(|v| 1.0 / v).collect();
        let log_norm = (0..m)
            .map(|c| {
                let log_det: f64 = variances[c * dim..(c + 1) * dim].iter().map(|v| v.ln()).sum();
                weights[c].ln() - 0.5 * (dim as f64 * LN_2PI + log_det)
            })
            .collect();
        Ok(Self {
            dim,
            weights,
            means,
            variances,
            inv_var,
            log_norm,
        })
    }

    pub fn single(mean: Vec<f64>, variance: Vec<f64>) -> Result<Self> {
        Self::new(mean.len(), vec![1.0], mean, variance)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_components(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn mean(&self, c: usize) -> &[f64] {
        &self.means[c * self.dim..(c + 1) * self.dim]
    }

    pub fn variance(&self, c: usize) -> &[f64] {
        &self.variances[c * self.dim..(c + 1) * self.dim]
    }

    /// `log w_c + log N(x; mu_c, diag(var_c))`.
    pub fn component_log_likelihood(&self, c: usize, x: &[f32]) -> f64 {
        let mu = self.mean(c);
        let iv = &self.inv_var[c * self.dim..(c + 1) * self.dim];
        let mut q = 0.0;
        for ((&xi, &m), &i) in x.iter().zip(mu).zip(iv) {
            let d = xi as f64 - m;
            q += d * d * i;
        }
        self.log_norm[c] - 0.5 * q
    }

    /// Best component and its joint log-likelihood.
    pub fn best_component(&self, x: &[f32]) -> (usize, f64) {
        let mut best = (0, f64::NEG_INFINITY);
        for c in 0..self.num_components() {
            let ll = self.component_log_likelihood(c, x);
            if ll > best.1 {
                best = (c, ll);
            }
        }
        best
    }

    /// Max-over-components emission score used by Viterbi training.
    pub fn max_log_likelihood(&self, x: &[f32]) -> f64 {
        self.best_component(x).1
    }

    pub fn heaviest_component(&self) -> usize {
        crate::linalg::argmax(&self.weights)
    }
}

/// Monophone GMM-HMM: one mixture per HMM state, state id = `phone * 3 + position`.
#[derive(Debug, Clone, PartialEq)]
pub struct GmmAcousticModel {
    phones: PhoneSet,
    topology: HmmTopology,
    states: Vec<DiagGmm>,
}

impl GmmAcousticModel {
    pub fn new(phones: PhoneSet, topology: HmmTopology, states: Vec<DiagGmm>) -> Result<Self> {
        if states.len() != phones.num_states() || topology.num_states() != phones.num_states() {
            return Err(Error::DimensionMismatch {
                expected: phones.num_states(),
                got: states.len(),
            });
        }
        let dim = states[0].dim();
        if let Some(bad) = states.iter().find(|g| g.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: bad.dim(),
            });
        }
        Ok(Self { phones, topology, states })
    }

    pub fn phones(&self) -> &PhoneSet {
        &self.phones
    }

    pub fn topology(&self) -> &HmmTopology {
        &self.topology
    }

    pub fn states(&self) -> &[DiagGmm] {
        &self.states
    }

    pub fn state(&self, s: usize) -> &DiagGmm {
        &self.states[s]
    }

    pub fn dim(&self) -> usize {
        self.states[0].dim()
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn max_components(&self) -> usize {
        self.states.iter().map(DiagGmm::num_components).max().unwrap_or(0)
    }

    pub(crate) fn parts_mut(&mut self) -> (&mut HmmTopology, &mut Vec<DiagGmm>) {
        (&mut self.topology, &mut self.states)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_normal_density() {
        let g = DiagGmm::single(vec![0.0], vec![1.0]).unwrap();
        let want = -0.5 * LN_2PI;
        assert!((g.max_log_likelihood(&[0.0]) - want).abs() < 1e-12);
        assert!((g.max_log_likelihood(&[2.0]) - (want - 2.0)).abs() < 1e-12);
    }

    #[test]
    fn weights_renormalized_and_variance_floored() {
        let g = DiagGmm::new(2, vec![2.0, 6.0], vec![0.0; 4], vec![1e-9, 1.0, 2.0, 3.0]).unwrap();
        assert_eq!(g.weights(), &[0.25, 0.75]);
        assert_eq!(g.variance(0)[0], VARIANCE_FLOOR);
        assert_eq!(g.heaviest_component(), 1);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(DiagGmm::new(2, vec![1.0], vec![0.0; 3], vec![1.0; 2]).is_err());
        assert!(DiagGmm::new(1, vec![], vec![], vec![]).is_err());
        assert!(DiagGmm::new(1, vec![-1.0, 2.0], vec![0.0; 2], vec![1.0; 2]).is_err());
    }
}
