use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::disorder::DisorderBatch;
use crate::error::{PinError, Result};
use crate::homogeneous::{finite_volume_free_energy, PolymerSampler};
use crate::numeric::{compensated_sum, mean_and_std_error};
use crate::quenched::interpolation_gap;
use crate::renewal::RenewalLaw;

use super::count_common;

/// A sample whose weight share exceeds this makes the estimate unreliable.
pub const HEAVY_TAIL_LIMIT: f64 = 0.5;
/// Largest horizon of the exact pair-transfer computation.
pub const PAIR_DP_LIMIT: usize = 300;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Psi0Estimate {
    pub value: f64,
    pub std_error: f64,
    /// Largest single-pair share of the total weight.
    pub max_weight_share: f64,
    pub samples: usize,
}

/// Overlaps `|tau1 ∩ tau2 ∩ [1, N]|` of independent pairs of pinned polymers.
fn pinned_overlaps(sampler: &PolymerSampler<'_>, samples: usize, seed: u64) -> Vec<usize> {
    (0..samples)
        .into_par_iter()
        .map_init(
            || (Vec::new(), Vec::new()),
            |(a, b), i| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(i as u64);
                sampler.sample_into(&mut rng, a);
                sampler.sample_into(&mut rng, b);
                count_common(a, b)
            },
        )
        .collect()
}

/// `psi_{N,delta}(0, lambda, beta) = (1/2N) log <exp(lambda beta^2 overlap)>_{N,delta}^{⊗2}`
/// from independent pinned pairs, with a delta-method standard error.
pub fn estimate_psi0(
    law: &RenewalLaw,
    delta: f64,
    lambda_beta_sq: f64,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<Psi0Estimate> {
    if !(delta > 0.0) {
        return Err(PinError::Domain(format!("psi needs delta > 0, got {delta}")));
    }
    if samples == 0 {
        return Err(PinError::Parameter("psi estimate needs at least one pair".into()));
    }
    if !lambda_beta_sq.is_finite() {
        return Err(PinError::Parameter(format!("lambda beta^2 must be finite, got {lambda_beta_sq}")));
    }
    if lambda_beta_sq == 0.0 {
        PolymerSampler::new(law, delta, n)?;
        return Ok(Psi0Estimate { value: 0.0, std_error: 0.0, max_weight_share: 1.0 / samples as f64, samples });
    }
    let sampler = PolymerSampler::new(law, delta, n)?;
    let overlaps = pinned_overlaps(&sampler, samples, seed);
    let c = lambda_beta_sq;
    let top = overlaps.iter().copied().max().unwrap_or(0) as f64;
    let shift = if c > 0.0 { top } else { overlaps.iter().copied().min().unwrap_or(0) as f64 };
    let w: Vec<f64> = overlaps.iter().map(|&k| (c * (k as f64 - shift)).exp()).collect();
    let total = compensated_sum(w.iter().copied());
    let share = w.iter().cloned().fold(0.0, f64::max) / total;
    if share > HEAVY_TAIL_LIMIT {
        return Err(PinError::Unreliable { share });
    }
    let (mean, se) = mean_and_std_error(&w);
    let two_n = 2.0 * n as f64;
    let value = (c * shift + mean.ln()) / two_n;
    let std_error = se / mean / two_n;
    Ok(Psi0Estimate { value, std_error, max_weight_share: share, samples })
}

/// Exact `psi_{N,delta}(0, lambda, beta)` for `c = lambda beta^2` by a
/// transfer over the pair of last renewal positions.
///
/// The replica that is behind always jumps (replica one on ties); landing on
/// the other one's position multiplies by `e^c`. Jumps carry `K(j) e^{delta - theta j}`
/// with `theta = F_N(0, delta)` to keep the weights of order one.
pub fn pair_transfer_psi0(law: &RenewalLaw, delta: f64, c: f64, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(PinError::Parameter("horizon N must be at least 1".into()));
    }
    if n > PAIR_DP_LIMIT {
        return Err(PinError::Size { what: "exact pair transfer", size: n, limit: PAIR_DP_LIMIT });
    }
    let theta = finite_volume_free_energy(law, delta, n)?;
    let jump: Vec<f64> = (0..=n).map(|j| law.mass(j) * (delta - theta * j as f64).exp()).collect();
    let coupled = pair_partition(&jump, c, n);
    let free = pair_partition(&jump, 0.0, n);
    Ok((coupled.ln() - free.ln()) / (2.0 * n as f64))
}

/// Total weight of pinned pairs, `w[a][b]` indexed by (behind, ahead) positions.
fn pair_partition(jump: &[f64], c: f64, n: usize) -> f64 {
    let ec = c.exp();
    let width = n + 1;
    let mut w = vec![0.0f64; width * width];
    w[0] = 1.0;
    for a in 0..=n {
        // the tie state (a, a) feeds states (a, b > a), so it goes first
        let tie = w[a * width + a];
        if tie != 0.0 && a < n {
            for b in a + 1..=n {
                w[a * width + b] += tie * jump[b - a];
            }
        }
        for b in a + 1..=n {
            let cur = w[a * width + b];
            if cur == 0.0 {
                continue;
            }
            for a2 in a + 1..=n {
                let step = cur * jump[a2 - a];
                if step == 0.0 {
                    continue;
                }
                match a2.cmp(&b) {
                    std::cmp::Ordering::Less => w[a2 * width + b] += step,
                    std::cmp::Ordering::Equal => w[b * width + b] += step * ec,
                    std::cmp::Ordering::Greater => w[b * width + a2] += step,
                }
            }
        }
    }
    w[n * width + n]
}

/// Both sides of `0 <= -R <= (e - 1) psi(0, 2, beta)` with their errors.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegratingCheck {
    pub beta: f64,
    pub delta: f64,
    pub n: usize,
    pub minus_r: f64,
    pub minus_r_se: f64,
    pub psi: f64,
    pub psi_se: f64,
    /// `(e - 1) psi`.
    pub rhs: f64,
    /// `sqrt(se_R^2 + ((e - 1) se_psi)^2)`.
    pub combined_se: f64,
    /// `-R + 3 se_R`, nonnegative when the lower side holds.
    pub lower_margin: f64,
    /// `rhs + 3 combined_se + R`, nonnegative when the upper side holds.
    pub upper_margin: f64,
    pub max_weight_share: f64,
    pub passed: bool,
}

/// The interpolation inequality at `lambda = 2`, on `batch` for the gap and
/// `samples` pinned pairs for `psi`.
pub fn check_integrating_inequality(
    law: &RenewalLaw,
    beta: f64,
    delta: f64,
    n: usize,
    batch: &DisorderBatch,
    samples: usize,
    seed: u64,
) -> Result<IntegratingCheck> {
    let gap = interpolation_gap(law, beta, delta, n, batch)?;
    let psi = estimate_psi0(law, delta, 2.0 * beta * beta, n, samples, seed)?;
    let e1 = std::f64::consts::E - 1.0;
    let minus_r = -gap.mean;
    let rhs = e1 * psi.value;
    let combined_se = (gap.std_error.powi(2) + (e1 * psi.std_error).powi(2)).sqrt();
    let lower_margin = minus_r + 3.0 * gap.std_error;
    let upper_margin = rhs + 3.0 * combined_se - minus_r;
    Ok(IntegratingCheck {
        beta,
        delta,
        n,
        minus_r,
        minus_r_se: gap.std_error,
        psi: psi.value,
        psi_se: psi.std_error,
        rhs,
        combined_se,
        lower_margin,
        upper_margin,
        max_weight_share: psi.max_weight_share,
        passed: lower_margin >= 0.0 && upper_margin >= 0.0 && psi.max_weight_share <= HEAVY_TAIL_LIMIT,
    })
}
