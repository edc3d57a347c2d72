use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{PinError, Result};
use crate::numeric::dot;
use crate::renewal::RenewalLaw;

const RESCALE_HIGH: f64 = 1e150;
const RESCALE_LOW: f64 = 1e-150;
const FLUSH: f64 = 1e-280;

/// `log Z(0..=N)` of the pinned recursion `Z(n) = e^{beta omega_n + h} sum_k K(k) Z(n - k)`.
///
/// Unreachable sites carry `-inf`.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionTrace {
    pub log_z: Vec<f64>,
    pub beta: f64,
    pub h: f64,
}

impl PartitionTrace {
    pub fn horizon(&self) -> usize {
        self.log_z.len() - 1
    }

    /// `(1/N) log Z(N)`, or a boundary error when `N` is unreachable.
    pub fn free_energy(&self) -> Result<f64> {
        let n = self.horizon();
        let lz = self.log_z[n];
        if lz == f64::NEG_INFINITY {
            return Err(PinError::Boundary { n });
        }
        Ok(lz / n as f64)
    }
}

/// Runs the pinned recursion with per-site log-weights `log_weight(n)`, `n = 1..=N`.
///
/// Values are kept as `z(n) e^{S}` with one global scale `S`; the live window
/// is rescaled whenever the newest entry leaves `[1e-150, 1e150]`.
pub fn pinned_log_partition<W>(law: &RenewalLaw, n: usize, mut log_weight: W) -> Result<Vec<f64>>
where
    W: FnMut(usize) -> f64,
{
    if n == 0 {
        return Err(PinError::Parameter("horizon N must be at least 1".into()));
    }
    let kernel = law.kernel();
    let kmax = law.n_max().min(n);
    let rev: Vec<f64> = (0..kmax).map(|i| kernel[kmax - i]).collect();
    let mut z = vec![0.0; n + 1];
    let mut log_z = vec![f64::NEG_INFINITY; n + 1];
    z[0] = 1.0;
    log_z[0] = 0.0;
    let mut scale = 0.0f64;
    for m in 1..=n {
        let w = m.min(kmax);
        let s = dot(&z[m - w..m], &rev[kmax - w..]);
        let lw = log_weight(m);
        let zm = s * lw.exp();
        if !zm.is_finite() {
            return Err(PinError::Numerical(format!("partition function overflow at site {m} (log-weight {lw})")));
        }
        z[m] = zm;
        if zm > 0.0 {
            log_z[m] = zm.ln() + scale;
            if !(RESCALE_LOW..=RESCALE_HIGH).contains(&zm) {
                let inv = 1.0 / zm;
                let lo = (m + 1).saturating_sub(kmax);
                for v in &mut z[lo..=m] {
                    *v *= inv;
                    if *v < FLUSH {
                        *v = 0.0;
                    }
                }
                z[m] = 1.0;
                scale += zm.ln();
            }
        }
    }
    Ok(log_z)
}

/// Trace for constant weight `h` (and `beta` = 0).
pub fn homogeneous_trace(law: &RenewalLaw, h: f64, n: usize) -> Result<PartitionTrace> {
    let log_z = pinned_log_partition(law, n, |_| h)?;
    Ok(PartitionTrace { log_z, beta: 0.0, h })
}

/// `F_N(0, delta) = (1/N) log Z(N)` with the pinned boundary.
pub fn finite_volume_free_energy(law: &RenewalLaw, delta: f64, n: usize) -> Result<f64> {
    homogeneous_trace(law, delta, n)?.free_energy()
}

/// Exact sampler of the pinned homogeneous polymer by backward decomposition.
#[derive(Debug, Clone)]
pub struct PolymerSampler<'a> {
    law: &'a RenewalLaw,
    delta: f64,
    trace: PartitionTrace,
    ln_kernel: Vec<f64>,
}

impl<'a> PolymerSampler<'a> {
    pub fn new(law: &'a RenewalLaw, delta: f64, n: usize) -> Result<Self> {
        let trace = homogeneous_trace(law, delta, n)?;
        trace.free_energy()?;
        let ln_kernel = law.kernel().iter().map(|k| k.ln()).collect();
        Ok(Self { law, delta, trace, ln_kernel })
    }

    pub fn horizon(&self) -> usize {
        self.trace.horizon()
    }

    pub fn trace(&self) -> &PartitionTrace {
        &self.trace
    }

    /// `P(n in tau)` under the pinned measure, `Z(n) Z(N - n) / Z(N)`.
    pub fn contact_probability(&self, n: usize) -> f64 {
        let lz = &self.trace.log_z;
        let big = self.horizon();
        (lz[n] + lz[big - n] - lz[big]).exp()
    }

    /// Renewal points of one polymer, increasing, with 0 and N included.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut Vec<usize>) {
        let lz = &self.trace.log_z;
        let kmax = self.law.n_max();
        out.clear();
        let mut m = self.horizon();
        out.push(m);
        while m > 0 {
            let u: f64 = rng.random();
            let base = self.delta - lz[m];
            let lo = m.saturating_sub(kmax);
            let mut acc = 0.0;
            let mut pick = None;
            for j in (lo..m).rev() {
                let lk = self.ln_kernel[m - j];
                if lk == f64::NEG_INFINITY || lz[j] == f64::NEG_INFINITY {
                    continue;
                }
                acc += (lz[j] + lk + base).exp();
                pick = Some(j);
                if u < acc {
                    break;
                }
            }
            // reachable m always has a predecessor
            m = pick.expect("pinned site without predecessor");
            out.push(m);
        }
        out.reverse();
    }
}

/// One sample of the pinned homogeneous polymer; a pure function of `seed`.
pub fn sample_polymer(law: &RenewalLaw, delta: f64, n: usize, seed: u64) -> Result<Vec<usize>> {
    let sampler = PolymerSampler::new(law, delta, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    sampler.sample_into(&mut rng, &mut out);
    Ok(out)
}
