//! Middleton Class-A impulsive noise: density evaluation and sampling.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

use crate::error::{Error, Result};

/// Omitted Poisson mass allowed when truncating the mixture density.
pub const PDF_TAIL_MASS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseParams {
    /// Impulse index `A`.
    pub impulse_index: f64,
    /// Gaussian-to-impulsive power ratio `Gamma`.
    pub gamma: f64,
    /// Total noise power `sigma_g^2 + sigma_i^2`.
    pub sigma2: f64,
}

impl NoiseParams {
    pub fn new(impulse_index: f64, gamma: f64, sigma2: f64) -> Result<Self> {
        let p = NoiseParams {
            impulse_index,
            gamma,
            sigma2,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("impulse_index", self.impulse_index),
            ("gamma", self.gamma),
            ("sigma2", self.sigma2),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::param(name, format!("must be finite and > 0, got {v}")));
            }
        }
        Ok(())
    }

    /// Background (Gaussian) power `sigma_g^2`.
    pub fn gaussian_power(&self) -> f64 {
        self.sigma2 * self.gamma / (1.0 + self.gamma)
    }

    /// Impulsive power `sigma_i^2`.
    pub fn impulsive_power(&self) -> f64 {
        self.sigma2 / (1.0 + self.gamma)
    }

    /// Same `A` and `Gamma` with a different total power.
    pub fn with_power(&self, sigma2: f64) -> Self {
        NoiseParams { sigma2, ..*self }
    }

    /// Variance of the Gaussian component conditioned on `m` active impulses.
    pub fn sigma_m2(&self, m: u32) -> f64 {
        self.sigma2 * (m as f64 / self.impulse_index + self.gamma) / (1.0 + self.gamma)
    }

    /// Smallest `M` such that the Poisson(`A`) mass above `M` is below
    /// [`PDF_TAIL_MASS`].
    pub fn default_truncation(&self) -> u32 {
        let a = self.impulse_index;
        let mut m = 0u32;
        loop {
            if poisson_tail(a, m) < PDF_TAIL_MASS {
                return m.max(1);
            }
            m += 1;
        }
    }

    /// Mixture density `sum_{m=0}^{truncation} P(m) N(n; 0, sigma_m^2)`.
    pub fn pdf(&self, n: f64, truncation: u32) -> Result<f64> {
        if !n.is_finite() {
            return Err(Error::NonFinite("noise amplitude"));
        }
        if truncation < 1 {
            return Err(Error::param("truncation", "must be >= 1"));
        }
        let a = self.impulse_index;
        let mut weight = (-a).exp();
        let mut acc = 0.0;
        for m in 0..=truncation {
            if m > 0 {
                weight *= a / m as f64;
            }
            let var = self.sigma_m2(m);
            acc += weight / (2.0 * PI * var).sqrt() * (-n * n / (2.0 * var)).exp();
        }
        Ok(acc)
    }

    pub fn sample(&self, count: usize, seed: u64) -> NoiseFrame {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut frame = NoiseFrame {
            samples: vec![Complex64::new(0.0, 0.0); count],
            impulse_counts: vec![0; count],
        };
        self.fill(&mut rng, &mut frame.samples, Some(&mut frame.impulse_counts));
        frame
    }

    /// Fills `out` with complex Class-A samples `x_g + sqrt(K) w`, one Poisson
    /// draw `K` per sample.
    pub fn fill<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        out: &mut [Complex64],
        mut counts: Option<&mut [u32]>,
    ) {
        let g_std = (self.gaussian_power() / 2.0).sqrt();
        let w_std = (self.impulsive_power() / self.impulse_index / 2.0).sqrt();
        let poisson = Poisson::new(self.impulse_index).expect("impulse index validated");
        for (idx, slot) in out.iter_mut().enumerate() {
            let k: f64 = poisson.sample(rng);
            let gr: f64 = rng.sample(StandardNormal);
            let gi: f64 = rng.sample(StandardNormal);
            let mut z = Complex64::new(gr * g_std, gi * g_std);
            if k > 0.0 {
                let wr: f64 = rng.sample(StandardNormal);
                let wi: f64 = rng.sample(StandardNormal);
                z += Complex64::new(wr, wi) * (w_std * k.sqrt());
            }
            *slot = z;
            if let Some(c) = counts.as_deref_mut() {
                c[idx] = k as u32;
            }
        }
    }
}

/// `P(K > m)` for `K ~ Poisson(a)`, summed from the tail to avoid cancellation.
fn poisson_tail(a: f64, m: u32) -> f64 {
    let mut term = (-a).exp();
    for j in 1..=m {
        term *= a / j as f64;
    }
    let mut tail = 0.0;
    let mut j = m + 1;
    loop {
        term *= a / j as f64;
        tail += term;
        if term < tail * 1e-17 || term == 0.0 {
            break;
        }
        j += 1;
    }
    tail
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseFrame {
    pub samples: Vec<Complex64>,
    pub impulse_counts: Vec<u32>,
}

pub fn sigma_m2(params: &NoiseParams, m: u32) -> f64 {
    params.sigma_m2(m)
}

pub fn class_a_pdf(params: &NoiseParams, n: f64, truncation: u32) -> Result<f64> {
    params.pdf(n, truncation)
}

pub fn sample_noise(params: &NoiseParams, count: usize, seed: u64) -> NoiseFrame {
    params.sample(count, seed)
}
