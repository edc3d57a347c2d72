//! The non-disordered model: limit free energy from the implicit identity
//! `sum_n e^{-F n} K(n) = e^{-delta}`, its derivatives, finite volumes and
//! exact polymer sampling.

mod partition;

pub use partition::{
    finite_volume_free_energy, homogeneous_trace, pinned_log_partition, sample_polymer, PartitionTrace, PolymerSampler,
};

use crate::error::{PinError, Result};
use crate::numeric::{decreasing_root_from, CompensatedSum};
use crate::renewal::RenewalLaw;

/// `F(0, delta)` with derivatives and solver diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct HomogeneousSolution {
    pub delta: f64,
    pub f: f64,
    pub df: f64,
    pub d2f: f64,
    pub residual: f64,
    pub truncation_note: String,
}

/// `M_j = sum_n n^j e^{-f n} K(n)` for `j = 0, 1, 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaplaceMoments {
    pub m0: f64,
    pub m1: f64,
    pub m2: f64,
    /// `sum_n (1 - e^{-f n}) K(n)`, the total mass minus `M_0` without cancellation.
    pub defect: f64,
    /// Last index summed explicitly.
    pub cutoff: usize,
    /// Whether the modelled tail beyond `n_max` was added.
    pub used_tail: bool,
}

const SERIES_REL_TOL: f64 = 1e-18;
const EXP_BLOCK: usize = 64;

/// Laplace moments of the law at `f >= 0`, tail included.
///
/// Terms are taken in blocks of 64 with exact factors `e^{-f n}`; summation
/// stops once `e^{-f n} (1 + n + n^2)` times the mass still ahead falls below
/// `1e-18` of the partial sum.
pub fn laplace_moments(law: &RenewalLaw, f: f64) -> LaplaceMoments {
    let n_max = law.n_max();
    let kernel = law.kernel();
    let total_head = law.cumulative(n_max);
    let mut pow = [0.0f64; EXP_BLOCK];
    // 1 - e^{-f j}
    let mut gap = [0.0f64; EXP_BLOCK];
    for j in 0..EXP_BLOCK {
        pow[j] = (-f * j as f64).exp();
        gap[j] = -(-f * j as f64).exp_m1();
    }
    let (mut m0, mut m1, mut m2) = (CompensatedSum::new(), CompensatedSum::new(), CompensatedSum::new());
    let mut defect = CompensatedSum::new();
    let mut cutoff = n_max;
    let mut start = 1;
    while start <= n_max {
        let end = (start + EXP_BLOCK - 1).min(n_max);
        let w0 = (-f * start as f64).exp();
        // 1 - e^{-f (start + j)} = g0 + w0 (1 - e^{-f j}), both terms nonnegative
        let g0 = -(-f * start as f64).exp_m1();
        let ks = &kernel[start..=end];
        let len = ks.len();
        let mut acc = [[0.0f64; 4]; 5];
        let mut x = [start as f64, start as f64 + 1.0, start as f64 + 2.0, start as f64 + 3.0];
        let body = len - len % 4;
        for j in (0..body).step_by(4) {
            for lane in 0..4 {
                let c = ks[j + lane];
                let u = pow[j + lane] * c;
                acc[0][lane] += u;
                acc[1][lane] += u * x[lane];
                acc[2][lane] += u * x[lane] * x[lane];
                acc[3][lane] += c;
                acc[4][lane] += c * gap[j + lane];
                x[lane] += 4.0;
            }
        }
        for j in body..len {
            let c = ks[j];
            let xj = (start + j) as f64;
            let u = pow[j] * c;
            acc[0][0] += u;
            acc[1][0] += u * xj;
            acc[2][0] += u * xj * xj;
            acc[3][0] += c;
            acc[4][0] += c * gap[j];
        }
        let sum = |a: &[f64; 4]| (a[0] + a[1]) + (a[2] + a[3]);
        m0.add(w0 * sum(&acc[0]));
        m1.add(w0 * sum(&acc[1]));
        m2.add(w0 * sum(&acc[2]));
        defect.add(g0 * sum(&acc[3]) + w0 * sum(&acc[4]));
        if f > 0.0 && end < n_max {
            let x = end as f64;
            let ahead = (total_head - law.cumulative(end)).max(0.0) + law.tail_mass();
            let w = (-f * x).exp();
            if f * x > 1.0 && w * ahead * (1.0 + x + x * x) < SERIES_REL_TOL * m0.value() {
                defect.add(ahead);
                cutoff = end;
                break;
            }
        }
        start = end + 1;
    }
    let used_tail = cutoff == n_max && law.tail_mass() > 0.0;
    if used_tail {
        m0.add(law.tail_transform(f, 0));
        m1.add(law.tail_transform(f, 1));
        m2.add(law.tail_transform(f, 2));
        defect.add(law.tail_defect(f));
    }
    LaplaceMoments { m0: m0.value(), m1: m1.value(), m2: m2.value(), defect: defect.value(), cutoff, used_tail }
}

fn require_recurrent(law: &RenewalLaw) -> Result<()> {
    if law.is_recurrent() {
        Ok(())
    } else {
        Err(PinError::Domain(format!(
            "total mass {} differs from one; apply recurrent_reduction and shift the pinning strength",
            law.total_mass()
        )))
    }
}

/// Solves `sum_n e^{-F n} K(n) = e^{-delta}` for `F >= 0`.
///
/// The identity is solved as `sum_n (1 - e^{-F n}) K(n) = 1 - e^{-delta} - (1 - total mass)`,
/// which keeps its relative accuracy as `delta` goes to zero.
pub fn free_energy(law: &RenewalLaw, delta: f64) -> Result<HomogeneousSolution> {
    free_energy_near(law, delta, 0.0)
}

/// As [`free_energy`], with Newton started from `hint`; the root is the same.
pub fn free_energy_near(law: &RenewalLaw, delta: f64, hint: f64) -> Result<HomogeneousSolution> {
    require_recurrent(law)?;
    if !delta.is_finite() {
        return Err(PinError::Parameter(format!("pinning strength must be finite, got {delta}")));
    }
    if delta <= 0.0 {
        return Ok(HomogeneousSolution {
            delta,
            f: 0.0,
            df: 0.0,
            d2f: 0.0,
            residual: 0.0,
            truncation_note: "delocalized: F = 0 for delta <= 0".into(),
        });
    }
    let target = -(-delta).exp_m1() + (law.total_mass() - 1.0);
    let phi = |f: f64| target - laplace_moments(law, f).defect;
    let mut hi = if hint > 0.0 && hint < delta + 1.0 && phi(hint) < 0.0 { hint } else { delta + 1.0 };
    while phi(hi) >= 0.0 {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(PinError::Numerical(format!("no sign change bracketing F for delta = {delta}")));
        }
    }
    let f = decreasing_root_from(
        |f| {
            let m = laplace_moments(law, f);
            (target - m.defect, -m.m1)
        },
        0.0,
        hi,
        hint,
    );
    let m = laplace_moments(law, f);
    let e = (-delta).exp();
    let df = e / m.m1;
    let d2f = (m.m2 * df * df - e) / m.m1;
    let truncation_note = if m.used_tail {
        format!("explicit terms to n = {}, modelled tail beyond", m.cutoff)
    } else {
        format!("explicit terms to n = {}, remainder below 1e-18 relative", m.cutoff)
    };
    Ok(HomogeneousSolution { delta, f, df, d2f, residual: target - m.defect, truncation_note })
}

/// `(dF/d delta, d^2F/d delta^2)` by implicit differentiation of the identity.
pub fn free_energy_derivatives(law: &RenewalLaw, delta: f64) -> Result<(f64, f64)> {
    if !(delta > 0.0) {
        return Err(PinError::Domain(format!("derivatives are defined for delta > 0, got {delta}")));
    }
    let s = free_energy(law, delta)?;
    Ok((s.df, s.d2f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::renewal::{build_power_law, build_power_law_with, build_srw_returns, SlowlyVarying, SrwVariant, Truncation};
    use proptest::prelude::*;

    fn two_point() -> RenewalLaw {
        RenewalLaw::from_masses(&[0.5, 0.5], 0.0).unwrap()
    }

    #[test]
    fn quadratic_closed_form() {
        let s = free_energy(&two_point(), 2f64.ln()).unwrap();
        let exact = -((5f64.sqrt() - 1.0) / 2.0).ln();
        assert!((s.f - exact).abs() < 1e-12, "{} vs {exact}", s.f);
        assert!(s.residual.abs() <= 1e-12);
        assert!((exact - 0.481_211_825_059_603_4).abs() < 1e-15);
    }

    #[test]
    fn zero_and_negative_delta() {
        let law = build_power_law(0.3, SlowlyVarying::unit(), 1000).unwrap();
        assert_eq!(free_energy(&law, 0.0).unwrap().f, 0.0);
        assert_eq!(free_energy(&law, -1.0).unwrap().f, 0.0);
        assert!(matches!(free_energy_derivatives(&law, 0.0), Err(PinError::Domain(_))));
    }

    #[test]
    fn transient_law_needs_reduction() {
        let law = build_srw_returns(SrwVariant::D3Transient, 100).unwrap();
        assert!(matches!(free_energy(&law, 0.5), Err(PinError::Domain(_))));
    }

    #[test]
    fn unit_steps_derivatives() {
        let law = RenewalLaw::from_masses(&[1.0], 0.0).unwrap();
        let s = free_energy(&law, 0.7).unwrap();
        assert!((s.f - 0.7).abs() < 1e-14);
        assert!((s.df - 1.0).abs() < 1e-13);
        assert!(s.d2f.abs() < 1e-12);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let law = two_point();
        let d = 2f64.ln();
        let h = 1e-5;
        let (df, d2f) = free_energy_derivatives(&law, d).unwrap();
        let fp = free_energy(&law, d + h).unwrap().f;
        let fm = free_energy(&law, d - h).unwrap().f;
        let f0 = free_energy(&law, d).unwrap().f;
        assert!(((fp - fm) / (2.0 * h) / df - 1.0).abs() < 1e-6);
        let fd2 = (fp - 2.0 * f0 + fm) / (h * h);
        assert!((fd2 - d2f).abs() < 1e-3 * d2f.abs().max(1.0));
    }

    #[test]
    fn exact_tail_derivatives_match_finite_differences() {
        let law = build_power_law_with(0.3, SlowlyVarying::unit(), 65_536, Truncation::ExactTail).unwrap();
        let d = 0.2;
        let h = 1e-4;
        let (df, _) = free_energy_derivatives(&law, d).unwrap();
        let fd = (free_energy(&law, d + h).unwrap().f - free_energy(&law, d - h).unwrap().f) / (2.0 * h);
        assert!((fd / df - 1.0).abs() < 1e-5, "{fd} vs {df}");
    }

    #[test]
    fn critical_behaviour_alpha_half() {
        let law = build_power_law_with(0.5, SlowlyVarying::unit(), 1 << 20, Truncation::ExactTail).unwrap();
        let f: Vec<f64> = [1e-1, 1e-2, 1e-3].iter().map(|&d| free_energy(&law, d).unwrap().f).collect();
        let slope = (f[2].ln() - f[1].ln()) / (1e-3f64.ln() - 1e-2f64.ln());
        assert!((slope - 2.0).abs() < 0.2, "{slope}");
    }

    #[test]
    fn derivative_scaling_alpha_point_three() {
        // dF ~ delta^{(1-alpha)/alpha} up to slowly varying factors
        let law = build_power_law_with(0.3, SlowlyVarying::unit(), 1 << 16, Truncation::ExactTail).unwrap();
        let r: Vec<f64> = [1e-2, 1e-3, 1e-4]
            .iter()
            .map(|&d: &f64| free_energy_derivatives(&law, d).unwrap().0 * d.powf(-(0.7 / 0.3)))
            .collect();
        assert!((r[0] / r[1] - 1.0).abs() < 0.05 && (r[1] / r[2] - 1.0).abs() < 0.05, "{r:?}");
    }

    #[test]
    fn defect_is_total_minus_first_moment() {
        let law = build_power_law_with(0.7, SlowlyVarying::unit(), 4096, Truncation::ExactTail).unwrap();
        for f in [1e-4, 1e-2, 0.3, 2.0] {
            let m = laplace_moments(&law, f);
            assert!((m.defect - (law.total_mass() - m.m0)).abs() < 1e-15, "f={f}");
        }
        assert_eq!(laplace_moments(&law, 0.0).defect, 0.0);
    }

    #[test]
    fn tiny_delta_keeps_relative_accuracy() {
        // a one-part-in-a-million step in delta must move F by dF times the step
        let law = build_power_law_with(0.7, SlowlyVarying::unit(), 1 << 16, Truncation::ExactTail).unwrap();
        for delta in [1e-8, 1e-10, 1e-12] {
            let a = free_energy(&law, delta).unwrap();
            let b = free_energy(&law, delta * (1.0 + 1e-6)).unwrap();
            let predicted = a.df * delta * 1e-6;
            assert!(((b.f - a.f) / predicted - 1.0).abs() < 1e-3, "delta={delta}");
        }
    }

    #[test]
    fn finite_volume_approaches_limit() {
        let law = build_power_law_with(0.3, SlowlyVarying::unit(), 1 << 14, Truncation::ExactTail).unwrap();
        let f = free_energy(&law, 0.2).unwrap().f;
        let mut prev = f64::NEG_INFINITY;
        for k in [10, 12, 14] {
            let n = 1usize << k;
            let fnv = finite_volume_free_energy(&law, 0.2, n).unwrap();
            assert!(fnv > prev && fnv < f);
            prev = fnv;
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn solver_identity_and_shape(alpha in 0.2f64..1.5, d1 in 0.01f64..2.0, gap in 0.01f64..1.0) {
            let law = build_power_law(alpha, SlowlyVarying::unit(), 3000).unwrap();
            let a = free_energy(&law, d1).unwrap();
            let b = free_energy(&law, d1 + gap).unwrap();
            let c = free_energy(&law, d1 + 2.0 * gap).unwrap();
            prop_assert!(a.residual.abs() <= 1e-12);
            prop_assert!(a.df > 0.0);
            prop_assert!(a.f <= b.f && b.f <= c.f);
            prop_assert!(b.f <= 0.5 * (a.f + c.f) + 1e-12);
        }
    }
}
