use crate::convolution::{online_convolution, Method};
use crate::error::{PinError, Result};
use crate::numeric::compensated_sum;

use super::law::{clamp_negative, RenewalLaw};
use super::slowly_varying::ell_sum;

/// Renewal mass function `u(n) = P(n in tau)` for `n = 0..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct MassFunction {
    pub u: Vec<f64>,
    pub law_label: String,
}

impl MassFunction {
    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn horizon(&self) -> usize {
        self.u.len() - 1
    }
}

/// `u(n) = sum_{k=1}^{min(n, n_max)} K(k) u(n - k)`, `u(0) = 1`.
pub fn mass_function(law: &RenewalLaw, n: usize) -> Result<MassFunction> {
    mass_function_with(law, n, Method::Auto)
}

pub fn mass_function_with(law: &RenewalLaw, n: usize, method: Method) -> Result<MassFunction> {
    if n == 0 {
        return Err(PinError::Parameter("horizon N must be at least 1".into()));
    }
    let u = online_convolution(1.0, law.kernel(), n + 1, method, |_, s| Ok(s))?;
    Ok(MassFunction { u, law_label: law.label().to_string() })
}

/// `C_alpha = alpha sin(pi alpha) / pi`.
pub fn doney_constant(alpha: f64) -> f64 {
    alpha * (std::f64::consts::PI * alpha).sin() / std::f64::consts::PI
}

/// `u(n) L(n) n^{1 - alpha} / C_alpha` with `L` the modulation of the
/// normalised law; tends to one for `0 < alpha < 1`.
pub fn doney_ratio(law: &RenewalLaw, mass: &MassFunction, n: usize) -> Result<f64> {
    let rv = law
        .regular_variation()
        .ok_or_else(|| PinError::Domain("the law carries no regular-variation data".into()))?;
    if !(rv.alpha > 0.0 && rv.alpha < 1.0) {
        return Err(PinError::Domain(format!("mass-function asymptotics need 0 < alpha < 1, got {}", rv.alpha)));
    }
    let u = *mass
        .u
        .get(n)
        .ok_or(PinError::Size { what: "index beyond the computed mass function", size: n, limit: mass.horizon() })?;
    let x = n as f64;
    Ok(u * rv.effective_l(x) * x.powf(1.0 - rv.alpha) / doney_constant(rv.alpha))
}

/// First-intersection law of two independent copies, `Q(0..=N)` with `Q(0) = 0`:
/// `Q(n) = v(n) - sum_{k=1}^{n-1} Q(k) v(n - k)`, `v = u^2`.
pub fn first_intersection_law(law: &RenewalLaw, n: usize) -> Result<Vec<f64>> {
    let mass = mass_function(law, n)?;
    first_intersection_from_mass(&mass)
}

pub fn first_intersection_from_mass(mass: &MassFunction) -> Result<Vec<f64>> {
    let v: Vec<f64> = mass.u.iter().map(|x| x * x).collect();
    online_convolution(0.0, &v, v.len(), Method::Auto, |n, s| clamp_negative(n, v[n] - s))
}

/// `P(first intersection > N) = 1 - sum_{n<=N} Q(n)`.
pub fn intersection_tail(law: &RenewalLaw, n: usize) -> Result<f64> {
    let q = first_intersection_law(law, n)?;
    Ok(tail_from_q(&q, n))
}

/// `1 - sum_{k<=n} Q(k)` from a precomputed `Q`.
pub fn tail_from_q(q: &[f64], n: usize) -> f64 {
    1.0 - compensated_sum(q[1..=n.min(q.len() - 1)].iter().copied())
}

/// `ell(N) = sum_{n<=N} 1 / (n L(n)^2)` for a law with `alpha = 1/2`,
/// `L` being the modulation the law was specified with.
pub fn marginal_ell(law: &RenewalLaw, n: usize) -> Result<f64> {
    let rv = law
        .regular_variation()
        .ok_or_else(|| PinError::Domain("the law carries no regular-variation data".into()))?;
    if (rv.alpha - 0.5).abs() > 1e-12 {
        return Err(PinError::Domain(format!("ell(N) is defined for alpha = 1/2, got {}", rv.alpha)));
    }
    Ok(ell_sum(&rv.l, n as f64))
}

#[cfg(test)]
mod tests {
    use super::super::law::*;
    use super::super::slowly_varying::SlowlyVarying;
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn srw1d_mass_function_is_central_binomial() {
        let law = build_srw_returns(SrwVariant::D1Recurrent, 200).unwrap();
        let m = mass_function(&law, 200).unwrap();
        assert_eq!(m.u[0], 1.0);
        assert!((m.u[1] - 0.5).abs() < 1e-16);
        assert!((m.u[2] - 0.375).abs() < 1e-16);
        assert!((m.u[3] - 0.3125).abs() < 1e-16);
        let mut p = 1.0;
        for n in 1..=200 {
            p *= (2 * n - 1) as f64 / (2 * n) as f64;
            assert!((m.u[n] - p).abs() < 1e-14, "n={n}");
        }
    }

    #[test]
    fn rejects_zero_horizon() {
        let law = build_power_law(0.5, SlowlyVarying::unit(), 10).unwrap();
        assert!(mass_function(&law, 0).is_err());
    }

    #[test]
    fn doney_half_at_one_million() {
        let law = build_power_law_with(0.5, SlowlyVarying::unit(), 1_000_000, Truncation::ExactTail).unwrap();
        let m = mass_function(&law, 1_000_000).unwrap();
        let r = doney_ratio(&law, &m, 1_000_000).unwrap();
        assert!((r - 1.0).abs() < 0.02, "{r}");
        assert!((doney_constant(0.5) - 1.0 / (2.0 * std::f64::consts::PI)).abs() < 1e-16);
    }

    #[test]
    fn srw1d_intersection_start() {
        let law = build_srw_returns(SrwVariant::D1Recurrent, 50).unwrap();
        let q = first_intersection_law(&law, 50).unwrap();
        assert!((q[1] - 0.25).abs() < 1e-16);
        assert!((q[2] - 5.0 / 64.0).abs() < 1e-16);
        let t = intersection_tail(&law, 2).unwrap();
        assert!((t - (1.0 - 21.0 / 64.0)).abs() < 1e-15);
    }

    #[test]
    fn intersection_tail_constant_past_support() {
        let law = RenewalLaw::from_masses(&[0.0, 0.0, 1.0], 0.0).unwrap();
        let t1 = intersection_tail(&law, 10).unwrap();
        let t2 = intersection_tail(&law, 40).unwrap();
        assert_eq!(t1, 0.0);
        assert_eq!(t2, 0.0);
        let q = first_intersection_law(&law, 12).unwrap();
        assert_eq!(q[3], 1.0);
        assert!(q.iter().enumerate().all(|(n, &x)| n == 3 || x == 0.0));
    }

    #[test]
    fn transient_intersection_sum_stays_below_one() {
        let law = build_power_law_with(0.3, SlowlyVarying::unit(), 100_000, Truncation::ExactTail).unwrap();
        let q = first_intersection_law(&law, 100_000).unwrap();
        let s: Vec<f64> = [1000, 10_000, 100_000].iter().map(|&n| 1.0 - tail_from_q(&q, n)).collect();
        assert!(s[0] < s[1] && s[1] < s[2] && s[2] < 0.5);
        assert!(s[2] - s[1] < s[1] - s[0]);
    }

    #[test]
    fn intersection_tail_rates() {
        // 1/2 < alpha < 1: tail * N^{2 alpha - 1} / L(N)^2 roughly constant
        let law = build_power_law_with(0.7, SlowlyVarying::unit(), 100_000, Truncation::ExactTail).unwrap();
        let q = first_intersection_law(&law, 100_000).unwrap();
        let r: Vec<f64> = [1000usize, 10_000, 100_000]
            .iter()
            .map(|&n| tail_from_q(&q, n) * (n as f64).powf(0.4))
            .collect();
        let (lo, hi) = (r.iter().cloned().fold(f64::INFINITY, f64::min), r.iter().cloned().fold(0.0, f64::max));
        assert!(hi / lo < 1.5, "{r:?}");

        // alpha = 1/2: tail * ell(N) roughly constant
        let law = build_power_law_with(0.5, SlowlyVarying::unit(), 100_000, Truncation::ExactTail).unwrap();
        let q = first_intersection_law(&law, 100_000).unwrap();
        let r: Vec<f64> = [1000usize, 10_000, 100_000]
            .iter()
            .map(|&n| tail_from_q(&q, n) * marginal_ell(&law, n).unwrap())
            .collect();
        let (lo, hi) = (r.iter().cloned().fold(f64::INFINITY, f64::min), r.iter().cloned().fold(0.0, f64::max));
        assert!(hi / lo < 1.5, "{r:?}");
    }

    #[test]
    fn marginal_ell_cases() {
        let law = build_power_law(0.5, SlowlyVarying::unit(), 10).unwrap();
        assert_eq!(marginal_ell(&law, 1).unwrap(), 1.0);
        let r = marginal_ell(&law, 1_000_000).unwrap() / (1e6f64).ln();
        assert!((r - 1.0).abs() < 0.05, "{r}");
        let other = build_power_law(0.3, SlowlyVarying::unit(), 10).unwrap();
        assert!(matches!(marginal_ell(&other, 10), Err(PinError::Domain(_))));
    }

    #[test]
    fn marginal_ell_log_power() {
        // L(n) = log(n)^{(1 - gamma)/2} with gamma = 1/2 gives ell ~ 2 (log N)^{1/2}
        let g = 0.5;
        let l = SlowlyVarying::LogPower { gamma: (1.0 - g) / 2.0, offset: 2.0 };
        let law = build_power_law(0.5, l, 10).unwrap();
        let r: Vec<f64> = [1e4, 1e6, 1e9, 1e15]
            .iter()
            .map(|&x: &f64| crate::renewal::slowly_varying::ell_sum(&l, x) / x.ln().powf(g))
            .collect();
        assert!(r.iter().all(|&v| v > 0.5 && v < 4.0), "{r:?}");
        assert!(marginal_ell(&law, 1000).unwrap() > 0.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn mass_function_satisfies_recursion(alpha in 0.05f64..1.5, n_max in 2usize..400, horizon in 1usize..600) {
            let law = build_power_law(alpha, SlowlyVarying::unit(), n_max).unwrap();
            let m = mass_function(&law, horizon).unwrap();
            prop_assert_eq!(m.u[0], 1.0);
            for n in 1..=horizon {
                let s: f64 = (1..=n.min(n_max)).map(|k| law.mass(k) * m.u[n - k]).sum();
                prop_assert!((m.u[n] - s).abs() <= 1e-12 * s.abs().max(1e-300));
                prop_assert!(m.u[n] >= 0.0 && m.u[n] <= 1.0 + 1e-12);
            }
        }

        #[test]
        fn q_reproduces_v(alpha in 0.1f64..0.95, horizon in 1usize..500) {
            let law = build_power_law_with(alpha, SlowlyVarying::unit(), 1000, Truncation::ExactTail).unwrap();
            let m = mass_function(&law, horizon).unwrap();
            let q = first_intersection_from_mass(&m).unwrap();
            let total: f64 = q.iter().sum();
            prop_assert!(total <= 1.0 + 1e-12);
            for n in 1..=horizon {
                let v = m.u[n] * m.u[n];
                let back = q[n] + (1..n).map(|k| q[k] * m.u[n - k] * m.u[n - k]).sum::<f64>();
                prop_assert!(q[n] >= 0.0);
                prop_assert!((back - v).abs() <= 1e-10);
            }
        }
    }
}
