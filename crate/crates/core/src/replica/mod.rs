//! Two-replica diagnostics: intersection counts of independent renewals,
//! overlap moments and the coupled moment `psi_{N,delta}(0, lambda, beta)`.

mod psi;

pub use psi::{
    check_integrating_inequality, estimate_psi0, pair_transfer_psi0, IntegratingCheck, Psi0Estimate, HEAVY_TAIL_LIMIT,
    PAIR_DP_LIMIT,
};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::convolution::{online_convolution, truncated_convolution, Method};
use crate::error::{PinError, Result};
use crate::numeric::{compensated_sum, CompensatedSum};
use crate::renewal::{first_intersection_law, sample_renewal_into, RenewalLaw};

/// Largest horizon for exact intersection statistics.
pub const EXACT_COUNT_LIMIT: usize = 10_000;
/// Fewest pairs accepted by the simulated count distribution.
pub const MIN_SIMULATED_PAIRS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CountSource {
    ExactViaQ,
    Simulated,
}

/// Law of `|tau1 ∩ tau2 ∩ [1, N]|` for two independent free renewals.
#[derive(Debug, Clone, PartialEq)]
pub struct IntersectionCountDistribution {
    pub n: usize,
    /// `pmf[k]`; for the exact source the last entry is `P(count >= k_max)`.
    pub pmf: Vec<f64>,
    /// `tail[k] = P(count >= k)`.
    pub tail: Vec<f64>,
    pub source: CountSource,
    pub samples: Option<usize>,
}

/// Counts of a pair of renewals inside `[1, n]`, both given as increasing lists.
pub fn count_common(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut c) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                if a[i] > 0 {
                    c += 1;
                }
                i += 1;
                j += 1;
            }
        }
    }
    c
}

fn check_exact_budget(n: usize) -> Result<()> {
    if n == 0 {
        return Err(PinError::Parameter("horizon N must be at least 1".into()));
    }
    if n > EXACT_COUNT_LIMIT {
        return Err(PinError::Size { what: "exact intersection statistics", size: n, limit: EXACT_COUNT_LIMIT });
    }
    Ok(())
}

/// `P(count >= k) = sum_{n<=N} Q^{*k}(n)`, the intersection renewal being a
/// renewal with inter-arrival law `Q`.
pub fn intersection_count_exact(law: &RenewalLaw, n: usize, k_max: usize) -> Result<IntersectionCountDistribution> {
    check_exact_budget(n)?;
    if k_max == 0 {
        return Err(PinError::Parameter("k_max must be at least 1".into()));
    }
    let q = first_intersection_law(law, n)?;
    let mut tail = Vec::with_capacity(k_max + 1);
    tail.push(1.0);
    let mut power = q.clone();
    for k in 1..=k_max {
        if k > 1 {
            power = truncated_convolution(&power, &q, n + 1);
        }
        let p = compensated_sum(power[1..].iter().map(|&x| x.max(0.0))).min(1.0);
        tail.push(p);
    }
    let mut pmf: Vec<f64> = (0..k_max).map(|k| (tail[k] - tail[k + 1]).max(0.0)).collect();
    pmf.push(tail[k_max]);
    Ok(IntersectionCountDistribution { n, pmf, tail, source: CountSource::ExactViaQ, samples: None })
}

fn pair_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Intersection counts of `samples` independent pairs of free renewals.
pub fn simulate_counts(law: &RenewalLaw, n: usize, samples: usize, seed: u64) -> Vec<usize> {
    (0..samples)
        .into_par_iter()
        .map_init(
            || (Vec::new(), Vec::new()),
            |(a, b), i| {
                let mut rng = pair_rng(seed, i);
                sample_renewal_into(law, n, &mut rng, a);
                sample_renewal_into(law, n, &mut rng, b);
                count_common(a, b)
            },
        )
        .collect()
}

/// Empirical count distribution from independent pairs; a pure function of `seed`.
pub fn intersection_count_simulated(law: &RenewalLaw, n: usize, samples: usize, seed: u64) -> Result<IntersectionCountDistribution> {
    if samples < MIN_SIMULATED_PAIRS {
        return Err(PinError::Parameter(format!("need at least {MIN_SIMULATED_PAIRS} pairs, got {samples}")));
    }
    if n == 0 {
        return Err(PinError::Parameter("horizon N must be at least 1".into()));
    }
    let counts = simulate_counts(law, n, samples, seed);
    let top = counts.iter().copied().max().unwrap_or(0);
    let mut hist = vec![0usize; top + 1];
    for c in counts {
        hist[c] += 1;
    }
    let m = samples as f64;
    let pmf: Vec<f64> = hist.iter().map(|&h| h as f64 / m).collect();
    let mut tail = vec![0.0; top + 1];
    let mut acc = 0usize;
    for k in (0..=top).rev() {
        acc += hist[k];
        tail[k] = acc as f64 / m;
    }
    Ok(IntersectionCountDistribution { n, pmf, tail, source: CountSource::Simulated, samples: Some(samples) })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OverlapMode {
    Exact,
    Simulated { samples: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapMoment {
    pub value: f64,
    /// Simulated mode only.
    pub std_error: Option<f64>,
    /// Bound on what the computation left out; zero for the exact mode.
    pub remainder_bound: f64,
    /// Largest single-sample share of the total weight (simulated mode).
    pub max_weight_share: Option<f64>,
}

/// `E[exp(c |tau1 ∩ tau2 ∩ [1, N]|)]` under the free pair law.
///
/// The exact mode sums `G(m) T(N - m)` over the last intersection `m`, where
/// `G(n) = e^c sum_k Q(k) G(n - k)` and `T(j) = 1 - sum_{k<=j} Q(k)`, so no
/// count truncation is involved.
pub fn overlap_moment(law: &RenewalLaw, c: f64, n: usize, mode: OverlapMode) -> Result<OverlapMoment> {
    if !c.is_finite() {
        return Err(PinError::Parameter(format!("coupling c must be finite, got {c}")));
    }
    match mode {
        OverlapMode::Exact => {
            check_exact_budget(n)?;
            if c == 0.0 {
                return Ok(OverlapMoment { value: 1.0, std_error: None, remainder_bound: 0.0, max_weight_share: None });
            }
            let q = first_intersection_law(law, n)?;
            let ec = c.exp();
            let g = online_convolution(1.0, &q, n + 1, Method::Auto, |_, s| Ok(ec * s))?;
            let mut t = Vec::with_capacity(n + 1);
            let mut acc = CompensatedSum::new();
            for &qk in q.iter().take(n + 1) {
                acc.add(qk);
                t.push((1.0 - acc.value()).max(0.0));
            }
            let value = compensated_sum((0..=n).map(|m| g[m] * t[n - m]));
            Ok(OverlapMoment { value, std_error: None, remainder_bound: 0.0, max_weight_share: None })
        }
        OverlapMode::Simulated { samples, seed } => {
            if samples == 0 {
                return Err(PinError::Parameter("simulated overlap moment needs samples".into()));
            }
            let counts = simulate_counts(law, n, samples, seed);
            let top = counts.iter().copied().max().unwrap_or(0) as f64;
            // weights shifted by the largest count
            let w: Vec<f64> = counts.iter().map(|&k| (c * (k as f64 - top)).exp()).collect();
            let total = compensated_sum(w.iter().copied());
            let (mean, se) = crate::numeric::mean_and_std_error(&w);
            let scale = (c * top).exp();
            let share = w.iter().cloned().fold(0.0, f64::max) / total;
            Ok(OverlapMoment {
                value: mean * scale,
                std_error: Some(se * scale),
                remainder_bound: 0.0,
                max_weight_share: Some(share),
            })
        }
    }
}
