//! Generalized extreme value distribution: density, CDF, quantiles, and
//! maximum-likelihood fitting.
//!
//! Parameterization: location `mu`, scale `sigma > 0`, shape `xi`. With
//! `z = (x - mu) / sigma` and `t = (1 + xi z)^(-1/xi)` the CDF is
//! `exp(-t)` and the density `(t^(xi+1) / sigma) exp(-t)`. Shapes within
//! `1e-8` of zero are evaluated on the Gumbel branch `t = exp(-z)`.
//! Outside the support (`1 + xi z <= 0`) the density is zero, the CDF 0
//! below a Fréchet lower endpoint and 1 above a Weibull upper endpoint.
//!
//! Fitting runs Nelder–Mead on `(mu, ln sigma, xi)` from Gumbel moment
//! estimates, with the shape constrained to `(-1, 10)` where the MLE
//! problem is well-posed.

use crate::error::{Error, Result};
use crate::optim::nelder_mead;

/// Euler–Mascheroni constant, for the Gumbel moment estimator.
const EULER_GAMMA: f64 = 0.5772156649015329;

/// Shapes closer to zero than this are treated as exactly Gumbel.
const XI_GUMBEL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Gev {
    pub mu: f64,
    pub sigma: f64,
    pub xi: f64,
}

impl Gev {
    pub fn new(mu: f64, sigma: f64, xi: f64) -> Result<Self> {
        if !mu.is_finite() || !xi.is_finite() {
            return Err(Error::NonFinite("GEV location/shape must be finite".into()));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "GEV scale must be positive and finite, got {sigma}"
            )));
        }
        Ok(Gev { mu, sigma, xi })
    }

    fn z(&self, x: f64) -> f64 {
        (x - self.mu) / self.sigma
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let z = self.z(x);
        if self.xi.abs() < XI_GUMBEL {
            return (-(-z).exp()).exp();
        }
        let w = self.xi * z;
        if 1.0 + w <= 0.0 {
            // Past a finite endpoint: no mass below a Fréchet lower bound,
            // all mass below a Weibull upper bound.
            return if self.xi > 0.0 { 0.0 } else { 1.0 };
        }
        let t = (-w.ln_1p() / self.xi).exp();
        (-t).exp()
    }

    /// Natural log of the density; negative infinity outside the support.
    pub fn ln_pdf(&self, x: f64) -> f64 {
        let z = self.z(x);
        if self.xi.abs() < XI_GUMBEL {
            return -self.sigma.ln() - z - (-z).exp();
        }
        let w = self.xi * z;
        if 1.0 + w <= 0.0 {
            return f64::NEG_INFINITY;
        }
        let u = w.ln_1p();
        let t = (-u / self.xi).exp();
        -self.sigma.ln() - (1.0 + 1.0 / self.xi) * u - t
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.ln_pdf(x).exp()
    }

    /// Inverse CDF for `p` strictly between 0 and 1.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "quantile level must lie strictly between 0 and 1, got {p}"
            )));
        }
        let g = -p.ln(); // -ln p > 0
        Ok(if self.xi.abs() < XI_GUMBEL {
            self.mu - self.sigma * g.ln()
        } else {
            self.mu + self.sigma * (g.powf(-self.xi) - 1.0) / self.xi
        })
    }
}

/// Sum of [`Gev::ln_pdf`] over the samples.
pub fn log_likelihood(params: &Gev, samples: &[f64]) -> f64 {
    samples.iter().map(|&x| params.ln_pdf(x)).sum()
}

/// Gumbel-branch moment estimates used to seed the optimizer.
pub(crate) fn moment_init(samples: &[f64]) -> Gev {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|&x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let sigma = (6.0 * var).sqrt() / std::f64::consts::PI;
    Gev {
        mu: mean - EULER_GAMMA * sigma,
        sigma,
        xi: 0.0,
    }
}

#[derive(Debug, Clone)]
pub struct GevFit {
    pub params: Gev,
    pub log_likelihood: f64,
    /// Whether the optimizer met its tolerance within the iteration cap.
    pub converged: bool,
}

/// Fits GEV parameters to `samples` by maximum likelihood.
///
/// Needs at least 5 distinct-enough samples; a zero-variance input has no
/// meaningful fit and is rejected as degenerate rather than returned as a
/// spike.
pub fn fit_mle(samples: &[f64]) -> Result<GevFit> {
    if samples.len() < 5 {
        return Err(Error::DegenerateSample(format!(
            "need at least 5 samples to fit, got {}",
            samples.len()
        )));
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("samples contain NaN or infinity".into()));
    }
    let init = moment_init(samples);
    if init.sigma <= 0.0 {
        return Err(Error::DegenerateSample("samples have zero variance".into()));
    }

    let objective = |p: &[f64]| -> f64 {
        let (mu, sigma, xi) = (p[0], p[1].exp(), p[2]);
        if !sigma.is_finite() || sigma <= 0.0 || xi <= -1.0 || xi >= 10.0 {
            return f64::INFINITY;
        }
        let g = Gev { mu, sigma, xi };
        -log_likelihood(&g, samples)
    };
    let res = nelder_mead(objective, &[init.mu, init.sigma.ln(), 0.0], 500, 1e-10);
    let params = Gev::new(res.x[0], res.x[1].exp(), res.x[2])?;
    Ok(GevFit {
        params,
        log_likelihood: -res.fx,
        converged: res.converged,
    })
}
