//! Monte Carlo estimates over disorder: quenched free energy, contact
//! fraction and the interpolation gap `R_{N,delta}(beta)`.

use rayon::prelude::*;

use crate::disorder::DisorderBatch;
use crate::error::{PinError, Result};
use crate::homogeneous::{finite_volume_free_energy, pinned_log_partition};
use crate::numeric::mean_and_std_error;
use crate::renewal::RenewalLaw;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimateKind {
    Quenched,
    InterpolationGap,
    ContactFraction,
}

impl EstimateKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EstimateKind::Quenched => "quenched",
            EstimateKind::InterpolationGap => "interpolation_gap",
            EstimateKind::ContactFraction => "contact_fraction",
        }
    }
}

/// Sample mean of a per-environment quantity with its standard error.
#[derive(Debug, Clone, PartialEq)]
pub struct FreeEnergyEstimate {
    pub kind: EstimateKind,
    pub mean: f64,
    pub std_error: f64,
    pub n: usize,
    pub num_samples: usize,
    pub beta: f64,
    pub h: f64,
    /// Per-sample values in sample order.
    pub values: Vec<f64>,
    pub diagnostics: Vec<String>,
}

impl FreeEnergyEstimate {
    fn from_values(kind: EstimateKind, n: usize, beta: f64, h: f64, values: Vec<f64>) -> Self {
        let (mean, std_error) = mean_and_std_error(&values);
        Self { kind, mean, std_error, n, num_samples: values.len(), beta, h, values, diagnostics: Vec::new() }
    }

    /// Sample variance of the per-sample values.
    pub fn sample_variance(&self) -> f64 {
        self.std_error * self.std_error * self.num_samples as f64
    }
}

/// `log Z` of the pinned model with per-site weight `e^{beta omega_n + h}`, `N = omega.len()`.
pub fn log_partition(law: &RenewalLaw, beta: f64, h: f64, omega: &[f64]) -> Result<f64> {
    let n = omega.len();
    let lz = pinned_log_partition(law, n, |m| beta * omega[m - 1] + h)?;
    let v = lz[n];
    if v == f64::NEG_INFINITY {
        return Err(PinError::Boundary { n });
    }
    Ok(v)
}

fn check_batch(batch: &DisorderBatch, n: usize) -> Result<()> {
    if batch.num_samples == 0 {
        return Err(PinError::Parameter("empty disorder batch".into()));
    }
    if batch.n < n {
        return Err(PinError::Parameter(format!("disorder batch has length {} < N = {n}", batch.n)));
    }
    if n == 0 {
        return Err(PinError::Parameter("horizon N must be at least 1".into()));
    }
    Ok(())
}

/// Evaluates `f(omega_1..omega_N)` for every sample, in parallel, in sample order.
pub fn per_sample<T, F>(batch: &DisorderBatch, n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&[f64]) -> Result<T> + Sync,
{
    (0..batch.num_samples)
        .into_par_iter()
        .map_init(Vec::new, |buf, s| {
            batch.fill(s, buf, n);
            f(buf)
        })
        .collect()
}

/// `(1/N) log Z_{N,omega}(beta, h)` averaged over the batch.
pub fn quenched_free_energy(law: &RenewalLaw, beta: f64, h: f64, n: usize, batch: &DisorderBatch) -> Result<FreeEnergyEstimate> {
    check_batch(batch, n)?;
    let values = if beta == 0.0 {
        let f = finite_volume_free_energy(law, h, n)?;
        vec![f; batch.num_samples]
    } else {
        per_sample(batch, n, |omega| Ok(log_partition(law, beta, h, omega)? / n as f64))?
    };
    Ok(FreeEnergyEstimate::from_values(EstimateKind::Quenched, n, beta, h, values))
}

/// Largest step without a diagnostic.
pub const CONTACT_DH_WARN: f64 = 0.1;

/// Centered difference of the quenched free energy in `h`, differenced per
/// sample on common disorder. A second pass at `dh / 2` is recorded as a
/// Richardson diagnostic.
pub fn contact_fraction(
    law: &RenewalLaw,
    beta: f64,
    h: f64,
    n: usize,
    batch: &DisorderBatch,
    dh: f64,
) -> Result<FreeEnergyEstimate> {
    check_batch(batch, n)?;
    if !(dh > 0.0 && dh.is_finite()) {
        return Err(PinError::Parameter(format!("finite-difference step must be positive, got {dh}")));
    }
    let pairs = per_sample(batch, n, |omega| {
        let diff = |step: f64| -> Result<f64> {
            let up = log_partition(law, beta, h + step, omega)?;
            let down = log_partition(law, beta, h - step, omega)?;
            Ok((up - down) / (2.0 * step * n as f64))
        };
        Ok((diff(dh)?, diff(0.5 * dh)?))
    })?;
    let (values, halves): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    let mut est = FreeEnergyEstimate::from_values(EstimateKind::ContactFraction, n, beta, h, values);
    let (half_mean, _) = mean_and_std_error(&halves);
    let richardson = (4.0 * half_mean - est.mean) / 3.0;
    est.diagnostics.push(format!(
        "richardson: value at dh/2 = {half_mean:.17e}, extrapolated = {richardson:.17e}"
    ));
    if dh > CONTACT_DH_WARN {
        est.diagnostics.push(format!("warning: dh = {dh} exceeds {CONTACT_DH_WARN}; truncation error may dominate"));
    }
    Ok(est)
}

/// `R_{N,delta}(beta) = F_N(beta, delta - beta^2/2) - F_N(0, delta)`, per sample.
pub fn interpolation_gap(law: &RenewalLaw, beta: f64, delta: f64, n: usize, batch: &DisorderBatch) -> Result<FreeEnergyEstimate> {
    check_batch(batch, n)?;
    if !(delta > 0.0) {
        return Err(PinError::Domain(format!("the interpolation gap needs delta > 0, got {delta}")));
    }
    let h = delta - 0.5 * beta * beta;
    let values = if beta == 0.0 {
        vec![0.0; batch.num_samples]
    } else {
        let hom = finite_volume_free_energy(law, delta, n)?;
        per_sample(batch, n, |omega| Ok(log_partition(law, beta, h, omega)? / n as f64 - hom))?
    };
    Ok(FreeEnergyEstimate::from_values(EstimateKind::InterpolationGap, n, beta, h, values))
}
