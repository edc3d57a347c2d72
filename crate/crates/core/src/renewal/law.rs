use crate::error::{PinError, Result};
use crate::numeric::{integrate_half_line, CompensatedSum};

use super::slowly_varying::SlowlyVarying;

/// Tail exponent and modulation: `K(n) ~ scale * L(n) / n^(1 + alpha)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularVariation {
    pub alpha: f64,
    pub l: SlowlyVarying,
    pub scale: f64,
}

impl RegularVariation {
    /// The modulation seen by the normalised law, `scale * L(n)`.
    pub fn effective_l(&self, n: f64) -> f64 {
        self.scale * self.l.eval(n)
    }
}

/// How a power law is cut at `n_max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Truncation {
    /// Masses beyond `n_max` are dropped and the rest rescaled to total one.
    #[default]
    Renormalize,
    /// Masses up to `n_max` are those of the infinite law; the remainder is
    /// kept as `tail_mass` and modelled analytically where sums need it.
    ExactTail,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SrwVariant {
    /// Returns of the simple random walk on Z, counted in pairs of steps.
    D1Recurrent,
    /// Returns of the simple random walk on Z^3, counted in pairs of steps.
    D3Transient,
}

/// Inter-arrival law `K(1..=n_max)` of a renewal process started at 0.
#[derive(Debug, Clone, PartialEq)]
pub struct RenewalLaw {
    label: String,
    // kernel[0] = 0, kernel[n] = K(n)
    kernel: Vec<f64>,
    tail_mass: f64,
    total_mass: f64,
    truncation_bias: f64,
    regular: Option<RegularVariation>,
    // model sum_{n > n_max} L(n) n^{-1-alpha}, the denominator of tail transforms
    tail_norm: f64,
    // cdf[n] = K(1) + ... + K(n)
    cdf: Vec<f64>,
}

/// Tolerance for calling a law recurrent.
pub const RECURRENT_TOL: f64 = 1e-12;

impl RenewalLaw {
    /// Law with explicit masses `K(1), K(2), ...` and mass `tail_mass` beyond them.
    pub fn from_masses(masses: &[f64], tail_mass: f64) -> Result<Self> {
        if masses.is_empty() {
            return Err(PinError::Parameter("a renewal law needs at least one mass".into()));
        }
        if let Some((i, v)) = masses.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
            return Err(PinError::Parameter(format!("K({}) = {v} is not a finite nonnegative mass", i + 1)));
        }
        if !(tail_mass.is_finite() && tail_mass >= 0.0) {
            return Err(PinError::Parameter(format!("tail mass {tail_mass} must be finite and nonnegative")));
        }
        let mut kernel = Vec::with_capacity(masses.len() + 1);
        kernel.push(0.0);
        kernel.extend_from_slice(masses);
        Ok(Self::assemble("custom".into(), kernel, tail_mass, 0.0, None, 0.0))
    }

    fn assemble(
        label: String,
        kernel: Vec<f64>,
        tail_mass: f64,
        truncation_bias: f64,
        regular: Option<RegularVariation>,
        tail_norm: f64,
    ) -> Self {
        let mut cdf = Vec::with_capacity(kernel.len());
        let mut acc = CompensatedSum::new();
        for &k in &kernel {
            acc.add(k);
            cdf.push(acc.value());
        }
        acc.add(tail_mass);
        let total_mass = acc.value();
        Self { label, kernel, tail_mass, total_mass, truncation_bias, regular, tail_norm, cdf }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn n_max(&self) -> usize {
        self.kernel.len() - 1
    }

    /// `K(n)`; zero outside `1..=n_max`.
    #[inline]
    pub fn mass(&self, n: usize) -> f64 {
        self.kernel.get(n).copied().unwrap_or(0.0)
    }

    /// `K(1..=n_max)`.
    pub fn masses(&self) -> &[f64] {
        &self.kernel[1..]
    }

    /// `K` indexed by lag, with a zero at lag 0.
    pub fn kernel(&self) -> &[f64] {
        &self.kernel
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    /// Mass the infinite law puts beyond `n_max`, before any renormalisation.
    pub fn truncation_bias(&self) -> f64 {
        self.truncation_bias
    }

    pub fn regular_variation(&self) -> Option<&RegularVariation> {
        self.regular.as_ref()
    }

    pub fn alpha(&self) -> Option<f64> {
        self.regular.map(|r| r.alpha)
    }

    pub fn is_recurrent(&self) -> bool {
        (self.total_mass - 1.0).abs() <= RECURRENT_TOL
    }

    /// `K(1) + ... + K(n)`.
    pub fn cumulative(&self, n: usize) -> f64 {
        self.cdf[n.min(self.n_max())]
    }

    pub(crate) fn cdf(&self) -> &[f64] {
        &self.cdf
    }

    /// Smallest `n` with `K(n) > 0`.
    pub fn min_support(&self) -> Option<usize> {
        self.kernel.iter().position(|&k| k > 0.0)
    }

    /// `sum_{n > n_max} n^p e^{-f n} K(n)` under the tail model.
    ///
    /// Without a model the tail is an atom at infinity: it contributes
    /// `tail_mass` at `f = 0, p = 0` and nothing once `f > 0`.
    pub fn tail_transform(&self, f: f64, p: i32) -> f64 {
        if self.tail_mass == 0.0 {
            return 0.0;
        }
        match self.regular {
            Some(rv) if self.tail_norm > 0.0 => {
                let s = model_tail_sum(rv.alpha, &rv.l, self.n_max(), f, p);
                self.tail_mass * s / self.tail_norm
            }
            _ => {
                if f > 0.0 {
                    0.0
                } else if p == 0 {
                    self.tail_mass
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    /// `sum_{n > n_max} (1 - e^{-f n}) K(n)` under the tail model; the whole
    /// tail for `f > 0` when there is no model.
    pub fn tail_defect(&self, f: f64) -> f64 {
        if self.tail_mass == 0.0 || f <= 0.0 {
            return 0.0;
        }
        match self.regular {
            Some(rv) if self.tail_norm > 0.0 => {
                // the plain difference loses at most three digits above this share
                let cheap = self.tail_norm - model_tail_sum(rv.alpha, &rv.l, self.n_max(), f, 0);
                let d = if cheap >= DEFECT_DIRECT_SHARE * self.tail_norm {
                    cheap
                } else {
                    model_tail_defect(rv.alpha, &rv.l, self.n_max(), f)
                };
                self.tail_mass * d / self.tail_norm
            }
            _ => self.tail_mass,
        }
    }

    /// Divides every mass by `factor`; used by the recurrent reduction.
    fn rescaled(&self, factor: f64) -> Self {
        let kernel: Vec<f64> = self.kernel.iter().map(|k| k / factor).collect();
        let regular = self.regular.map(|mut r| {
            r.scale /= factor;
            r
        });
        Self::assemble(
            self.label.clone(),
            kernel,
            self.tail_mass / factor,
            self.truncation_bias,
            regular,
            self.tail_norm,
        )
    }

    /// Multiplies every mass by `factor`, making the law defective when `factor < 1`.
    pub fn thinned(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor <= 1.0) {
            return Err(PinError::Parameter(format!("thinning factor {factor} must lie in (0, 1]")));
        }
        Ok(self.rescaled(1.0 / factor))
    }
}

const DEFECT_DIRECT_SHARE: f64 = 1e-3;

/// `sum_{n > m} n^p e^{-f n} L(n) n^{-1-alpha}`.
///
/// The first terms are added exactly; the rest is an Euler-Maclaurin
/// remainder whose integral is taken in `t = ln(x / a)`.
pub fn model_tail_sum(alpha: f64, l: &SlowlyVarying, m: usize, f: f64, p: i32) -> f64 {
    let expo = p as f64 - 1.0 - alpha;
    if f <= 0.0 && expo >= -1.0 {
        return f64::INFINITY;
    }
    model_tail(alpha, l, m, f, p, |x| (-f * x).exp())
}

/// `sum_{n > m} (1 - e^{-f n}) L(n) n^{-1-alpha}`, accurate when `f m` is tiny.
pub fn model_tail_defect(alpha: f64, l: &SlowlyVarying, m: usize, f: f64) -> f64 {
    if f <= 0.0 {
        return 0.0;
    }
    model_tail(alpha, l, m, f, 0, |x| -(-f * x).exp_m1())
}

fn model_tail<W: Fn(f64) -> f64>(alpha: f64, l: &SlowlyVarying, m: usize, f: f64, p: i32, weight: W) -> f64 {
    let expo = p as f64 - 1.0 - alpha;
    let g = |x: f64| (expo * x.ln()).exp() * weight(x) * l.eval(x);
    let explicit_to = m.max(1000);
    let mut acc = CompensatedSum::new();
    for n in (m + 1)..=explicit_to {
        acc.add(g(n as f64));
    }
    let a = (explicit_to + 1) as f64;
    if f * a > 745.0 {
        // the weight is constant beyond here: 0 for the transform, 1 for the defect
        if weight(a) > 0.5 {
            acc.add(model_tail_sum(alpha, l, explicit_to, 0.0, p));
        }
        return acc.value();
    }
    let la = a.ln();
    let integral = integrate_half_line(
        |t| {
            let x = a * t.exp();
            ((expo + 1.0) * (la + t)).exp() * weight(x) * l.eval(x)
        },
        0.25,
        0.0,
        1e-17,
        40_000,
    );
    let h = 1e-3 * a;
    let dg = (g(a + h) - g(a - h)) / (2.0 * h);
    acc.add(integral);
    acc.add(0.5 * g(a));
    acc.add(-dg / 12.0);
    acc.value()
}

fn check_power_args(alpha: f64, l: &SlowlyVarying, n_max: usize) -> Result<()> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(PinError::Parameter(format!("alpha must be finite and positive, got {alpha}")));
    }
    if n_max < 2 {
        return Err(PinError::Parameter(format!("n_max must be at least 2, got {n_max}")));
    }
    l.validate()
}

/// `K(n)` proportional to `L(n) / n^(1 + alpha)` on `1..=n_max`, renormalised.
pub fn build_power_law(alpha: f64, l: SlowlyVarying, n_max: usize) -> Result<RenewalLaw> {
    build_power_law_with(alpha, l, n_max, Truncation::Renormalize)
}

pub fn build_power_law_with(alpha: f64, l: SlowlyVarying, n_max: usize, truncation: Truncation) -> Result<RenewalLaw> {
    check_power_args(alpha, &l, n_max)?;
    let mut kernel = Vec::with_capacity(n_max + 1);
    kernel.push(0.0);
    let mut head = CompensatedSum::new();
    for n in 1..=n_max {
        let x = n as f64;
        let k = l.eval(x) * (-(1.0 + alpha) * x.ln()).exp();
        head.add(k);
        kernel.push(k);
    }
    let head = head.value();
    let tail = model_tail_sum(alpha, &l, n_max, 0.0, 0);
    let bias = tail / (head + tail);
    let label = format!("power(alpha={alpha}, n_max={n_max})");
    let (norm, tail_mass) = match truncation {
        Truncation::Renormalize => (head, 0.0),
        Truncation::ExactTail => (head + tail, tail / (head + tail)),
    };
    kernel.iter_mut().for_each(|k| *k /= norm);
    let rv = RegularVariation { alpha, l, scale: 1.0 / norm };
    Ok(RenewalLaw::assemble(label, kernel, tail_mass, bias, Some(rv), tail))
}

/// `binom(2n, n) / 4^n` for `n = 0..=n_max`.
fn central_binomial_probabilities(n_max: usize) -> Vec<f64> {
    let mut p = Vec::with_capacity(n_max + 1);
    p.push(1.0);
    for n in 1..=n_max {
        let prev = p[n - 1];
        p.push(prev * (2 * n - 1) as f64 / (2 * n) as f64);
    }
    p
}

/// Return-time laws of simple random walks.
pub fn build_srw_returns(variant: SrwVariant, n_max: usize) -> Result<RenewalLaw> {
    if n_max < 2 {
        return Err(PinError::Parameter(format!("n_max must be at least 2, got {n_max}")));
    }
    match variant {
        SrwVariant::D1Recurrent => {
            let p1 = central_binomial_probabilities(n_max);
            let mut kernel = vec![0.0; n_max + 1];
            for n in 1..=n_max {
                kernel[n] = p1[n] / (2 * n - 1) as f64;
            }
            // P(first return after time 2n) = P(S_2n = 0)
            let tail_mass = p1[n_max];
            let l = SlowlyVarying::Constant(0.5 / std::f64::consts::PI.sqrt());
            let rv = RegularVariation { alpha: 0.5, l, scale: 1.0 };
            let tail_norm = model_tail_sum(0.5, &l, n_max, 0.0, 0);
            Ok(RenewalLaw::assemble(format!("srw1d(n_max={n_max})"), kernel, tail_mass, tail_mass, Some(rv), tail_norm))
        }
        SrwVariant::D3Transient => {
            let u = srw3_return_probabilities(n_max);
            let kernel = renewal_inversion(&u)?;
            // K(n) ~ c n^{-3/2}; c is read off the last masses
            let tail_from = (n_max * 3 / 4).max(1);
            let c = (tail_from..=n_max).map(|n| kernel[n] * (n as f64).powf(1.5)).sum::<f64>()
                / (n_max - tail_from + 1) as f64;
            let tail_norm = model_tail_sum(0.5, &SlowlyVarying::unit(), n_max, 0.0, 0);
            let tail_mass = c * tail_norm;
            let rv = RegularVariation { alpha: 0.5, l: SlowlyVarying::unit(), scale: c };
            Ok(RenewalLaw::assemble(format!("srw3d(n_max={n_max})"), kernel, tail_mass, tail_mass, Some(rv), tail_norm))
        }
    }
}

/// `P(S_2n = 0)` for the simple random walk on Z^3, `n = 0..=n_max`.
///
/// Splits the `2n` steps into `t` planar and `2n - t` vertical ones; the planar
/// walk returns with probability `(binom(t, t/2) / 2^t)^2`.
fn srw3_return_probabilities(n_max: usize) -> Vec<f64> {
    use statrs::function::gamma::ln_gamma;
    let steps = 2 * n_max;
    let ln_fact: Vec<f64> = (0..=steps).map(|k| ln_gamma(k as f64 + 1.0)).collect();
    // ln of binom(m, m/2) / 2^m for even m
    let ln_p1: Vec<f64> = (0..=n_max).map(|h| ln_fact[2 * h] - 2.0 * ln_fact[h] - (2 * h) as f64 * std::f64::consts::LN_2).collect();
    let (ln_two_thirds, ln_third) = ((2.0f64 / 3.0).ln(), (1.0f64 / 3.0).ln());
    let mut u = vec![0.0; n_max + 1];
    u[0] = 1.0;
    for n in 1..=n_max {
        let m = 2 * n;
        let mut acc = CompensatedSum::new();
        for half in 0..=n {
            let t = 2 * half;
            let ln_term = ln_fact[m] - ln_fact[t] - ln_fact[m - t]
                + t as f64 * ln_two_thirds
                + (m - t) as f64 * ln_third
                + 2.0 * ln_p1[half]
                + ln_p1[n - half];
            acc.add(ln_term.exp());
        }
        u[n] = acc.value();
    }
    u
}

/// Inter-arrival law whose renewal mass function is `u`.
pub(crate) fn renewal_inversion(u: &[f64]) -> Result<Vec<f64>> {
    use crate::convolution::{online_convolution, Method};
    online_convolution(0.0, u, u.len(), Method::Auto, |n, s| {
        let k = u[n] - s;
        clamp_negative(n, k)
    })
}

/// Rounding guard for inversions: tiny negatives become zero, others are errors.
pub(crate) fn clamp_negative(n: usize, value: f64) -> Result<f64> {
    if value >= 0.0 {
        Ok(value)
    } else if value > -1e-14 {
        Ok(0.0)
    } else {
        Err(PinError::NegativeMass { n, value })
    }
}

/// Normalised copy of a law and the shift `log(total_mass)` relating
/// `F(beta, h) = F~(beta, h + shift)`.
pub fn recurrent_reduction(law: &RenewalLaw) -> Result<(RenewalLaw, f64)> {
    let total = law.total_mass();
    if !(total > 0.0) {
        return Err(PinError::DegenerateLaw);
    }
    if law.is_recurrent() {
        return Ok((law.clone(), 0.0));
    }
    if total > 1.0 + RECURRENT_TOL {
        return Err(PinError::Parameter(format!("total mass {total} exceeds one")));
    }
    Ok((law.rescaled(total), total.ln()))
}
