//! Online PG-vector estimation for certainty-equivalence adaptation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelOrders;
use crate::scalar::Scalar;

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

fn check_finite<T: Scalar>(v: &[T], what: &'static str) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

/// Recursive least squares with unit forgetting factor.
#[derive(Clone, Debug, PartialEq)]
pub struct RlsState<T: Scalar> {
    theta: Vec<T>,
    /// Row-major `n × n` covariance.
    p: Vec<T>,
}

impl<T: Scalar> RlsState<T> {
    /// `P(0) = p0·I`.
    pub fn new(theta0: Vec<T>, p0: T) -> Result<Self> {
        if !(p0 > T::zero()) || !p0.is_finite() {
            return Err(Error::InvalidEstimator(format!(
                "P(0) scale must be positive, got {p0}"
            )));
        }
        check_finite(&theta0, "initial estimate")?;
        let n = theta0.len();
        let mut p = vec![T::zero(); n * n];
        for i in 0..n {
            p[i * n + i] = p0;
        }
        Ok(Self { theta: theta0, p })
    }

    pub fn estimate(&self) -> &[T] {
        &self.theta
    }

    pub fn covariance(&self) -> &[T] {
        &self.p
    }

    pub fn dim(&self) -> usize {
        self.theta.len()
    }

    /// Folds in one observation `Δy(k) = ΔH(k−1)ᵀθ + noise` and returns the a
    /// priori residual.
    pub fn update(&mut self, regressor: &[T], dy: T) -> Result<T> {
        let n = self.dim();
        if regressor.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: regressor.len(),
            });
        }
        check_finite(regressor, "regressor")?;
        check_finite(&[dy], "measurement")?;

        let residual = dy - dot(regressor, &self.theta);
        let ph: Vec<T> = (0..n)
            .map(|i| dot(&self.p[i * n..(i + 1) * n], regressor))
            .collect();
        let denom = T::one() + dot(regressor, &ph);
        let gain: Vec<T> = ph.iter().map(|&v| v / denom).collect();

        for (t, &g) in self.theta.iter_mut().zip(&gain) {
            *t += g * residual;
        }
        for (row, &g) in self.p.chunks_mut(n).zip(&gain) {
            for (pij, &hj) in row.iter_mut().zip(&ph) {
                *pij -= g * hj;
            }
        }

        let scale = self.p.iter().fold(T::one(), |m, v| m.max(v.abs()));
        let mut asym = T::zero();
        for i in 0..n {
            for j in (i + 1)..n {
                let (a, b) = (self.p[i * n + j], self.p[j * n + i]);
                asym = asym.max((a - b).abs());
                let avg = (a + b) / T::lit(2.0);
                self.p[i * n + j] = avg;
                self.p[j * n + i] = avg;
            }
        }
        check_finite(&self.theta, "RLS estimate")?;
        check_finite(&self.p, "RLS covariance")?;
        if asym > T::lit(1e-6) * scale {
            return Err(Error::CovarianceCorrupted(asym.as_f64()));
        }
        Ok(residual)
    }
}

/// Normalized projection estimator with the standard MFAC reset rule.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectionState<T: Scalar> {
    phi_hat: Vec<T>,
    phi_hat_init: Vec<T>,
    eta: T,
    mu: T,
    eps_reset: T,
    gain_index: usize,
}

impl<T: Scalar> ProjectionState<T> {
    /// `gain_index` is the position of the leading input gain `φ_{L_y+1}`,
    /// whose sign is guarded by the reset rule.
    pub fn new(init: Vec<T>, eta: T, mu: T, eps_reset: T, gain_index: usize) -> Result<Self> {
        if !(eta > T::zero() && eta <= T::lit(2.0)) {
            return Err(Error::InvalidEstimator(format!(
                "eta must lie in (0, 2], got {eta}"
            )));
        }
        if !(mu > T::zero()) {
            return Err(Error::InvalidEstimator(format!(
                "mu must be positive, got {mu}"
            )));
        }
        if !(eps_reset > T::zero()) {
            return Err(Error::InvalidEstimator("eps_reset must be positive".into()));
        }
        if gain_index >= init.len() {
            return Err(Error::DimensionMismatch {
                expected: gain_index + 1,
                got: init.len(),
            });
        }
        check_finite(&init, "initial estimate")?;
        Ok(Self {
            phi_hat: init.clone(),
            phi_hat_init: init,
            eta,
            mu,
            eps_reset,
            gain_index,
        })
    }

    pub fn estimate(&self) -> &[T] {
        &self.phi_hat
    }

    pub fn initial(&self) -> &[T] {
        &self.phi_hat_init
    }

    /// Returns the a priori residual. The estimate is reset to its initial
    /// value when it collapses, when the regressor is too small to carry
    /// information, or when the leading input gain changes sign.
    pub fn update(&mut self, regressor: &[T], dy: T) -> Result<T> {
        let n = self.phi_hat.len();
        if regressor.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: regressor.len(),
            });
        }
        check_finite(regressor, "regressor")?;
        check_finite(&[dy], "measurement")?;

        let residual = dy - dot(regressor, &self.phi_hat);
        let norm2 = dot(regressor, regressor);
        let step = self.eta * residual / (self.mu + norm2);
        for (p, &h) in self.phi_hat.iter_mut().zip(regressor) {
            *p += step * h;
        }
        check_finite(&self.phi_hat, "projection estimate")?;

        let norm_phi = dot(&self.phi_hat, &self.phi_hat).sqrt();
        let g = self.gain_index;
        let sign_flip = self.phi_hat[g].signum() != self.phi_hat_init[g].signum();
        if norm_phi <= self.eps_reset || norm2.sqrt() <= self.eps_reset || sign_flip {
            self.phi_hat.clone_from(&self.phi_hat_init);
        }
        Ok(residual)
    }
}

/// The estimator driving a closed-loop run. `Frozen` keeps a fixed PG vector,
/// which turns the runner into a non-adaptive simulation.
#[derive(Clone, Debug, PartialEq)]
pub enum Estimator<T: Scalar> {
    Rls(RlsState<T>),
    Projection(ProjectionState<T>),
    Frozen(Vec<T>),
}

impl<T: Scalar> Estimator<T> {
    pub fn estimate(&self) -> &[T] {
        match self {
            Estimator::Rls(s) => s.estimate(),
            Estimator::Projection(s) => s.estimate(),
            Estimator::Frozen(v) => v,
        }
    }

    pub fn update(&mut self, regressor: &[T], dy: T) -> Result<T> {
        match self {
            Estimator::Rls(s) => s.update(regressor, dy),
            Estimator::Projection(s) => s.update(regressor, dy),
            Estimator::Frozen(v) => {
                if regressor.len() != v.len() {
                    return Err(Error::DimensionMismatch {
                        expected: v.len(),
                        got: regressor.len(),
                    });
                }
                Ok(dy - dot(regressor, v))
            }
        }
    }
}

/// Serializable estimator settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(
    tag = "kind",
    rename_all = "snake_case",
    deny_unknown_fields,
    bound = ""
)]
pub enum EstimatorConfig<T: Scalar> {
    Rls {
        init: Vec<T>,
        p0: T,
    },
    Projection {
        init: Vec<T>,
        eta: T,
        mu: T,
        #[serde(default = "default_eps_reset")]
        eps_reset: T,
    },
    /// Fixed PG vector; `None` means the true PG of the configured plant.
    Frozen {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        theta: Option<Vec<T>>,
    },
}

fn default_eps_reset<T: Scalar>() -> T {
    T::lit(1e-5)
}

impl<T: Scalar> EstimatorConfig<T> {
    /// Builds the initial state. `truth` supplies the PG for a `Frozen`
    /// estimator without an explicit vector.
    pub fn build(&self, orders: &ModelOrders, truth: Option<&[T]>) -> Result<Estimator<T>> {
        let dim = orders.dim();
        let check = |v: &[T]| {
            if v.len() == dim {
                Ok(())
            } else {
                Err(Error::DimensionMismatch {
                    expected: dim,
                    got: v.len(),
                })
            }
        };
        match self {
            EstimatorConfig::Rls { init, p0 } => {
                check(init)?;
                Ok(Estimator::Rls(RlsState::new(init.clone(), *p0)?))
            }
            EstimatorConfig::Projection {
                init,
                eta,
                mu,
                eps_reset,
            } => {
                check(init)?;
                Ok(Estimator::Projection(ProjectionState::new(
                    init.clone(),
                    *eta,
                    *mu,
                    *eps_reset,
                    orders.input_gain_index(),
                )?))
            }
            EstimatorConfig::Frozen { theta } => {
                let v = match (theta, truth) {
                    (Some(v), _) => v.clone(),
                    (None, Some(t)) => t.to_vec(),
                    (None, None) => {
                        return Err(Error::InvalidEstimator(
                            "frozen estimator needs a PG vector or a convertible plant".into(),
                        ))
                    }
                };
                check(&v)?;
                check_finite(&v, "frozen PG vector")?;
                Ok(Estimator::Frozen(v))
            }
        }
    }
}
