use crate::error::{PinError, Result};
use crate::numeric::{gauss_legendre, CompensatedSum};

/// Slowly varying modulation `L` of a power-law tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SlowlyVarying {
    /// `L(x) = c`.
    Constant(f64),
    /// `L(x) = ln(x + offset)^gamma`; `offset >= 2` keeps the logarithm positive.
    LogPower { gamma: f64, offset: f64 },
}

impl SlowlyVarying {
    pub fn unit() -> Self {
        SlowlyVarying::Constant(1.0)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            SlowlyVarying::Constant(c) if !(c.is_finite() && c > 0.0) => {
                Err(PinError::Parameter(format!("constant slowly varying function needs c > 0, got {c}")))
            }
            SlowlyVarying::LogPower { gamma, offset } if !gamma.is_finite() || !(offset >= 2.0) || !offset.is_finite() => Err(
                PinError::Parameter(format!("log-power slowly varying function needs finite gamma and offset >= 2, got gamma={gamma}, offset={offset}")),
            ),
            _ => Ok(()),
        }
    }

    /// `L(x)` for real `x >= 1`.
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            SlowlyVarying::Constant(c) => c,
            SlowlyVarying::LogPower { gamma, offset } => (x + offset).ln().powf(gamma),
        }
    }

    /// Whether `sum_n 1 / (n L(n)^2)` diverges.
    pub fn ell_diverges(&self) -> bool {
        match *self {
            SlowlyVarying::Constant(_) => true,
            SlowlyVarying::LogPower { gamma, .. } => 2.0 * gamma <= 1.0,
        }
    }
}

const ELL_DIRECT: f64 = 4_000_000.0;

/// `sum_{n=1}^{floor(x)} 1 / (n L(n)^2)` for real `x >= 1`.
///
/// Summed term by term up to a few million; beyond that the remainder is the
/// integral in `s = ln x` plus the endpoint corrections of Euler-Maclaurin.
pub fn ell_sum(l: &SlowlyVarying, x: f64) -> f64 {
    if !(x >= 1.0) {
        return 0.0;
    }
    let term = |n: f64| 1.0 / (n * l.eval(n).powi(2));
    let direct_to = x.min(ELL_DIRECT).floor() as usize;
    let mut acc = CompensatedSum::new();
    for n in 1..=direct_to {
        acc.add(term(n as f64));
    }
    let top = x.floor();
    if top <= ELL_DIRECT {
        return acc.value();
    }
    // sum_{a < n <= b} g(n) = int_a^b g + (g(b) - g(a)) / 2 - (g'(b) - g'(a)) / 12
    let a = ELL_DIRECT;
    let b = top;
    let (sa, sb) = (a.ln(), b.ln());
    let panels = ((sb - sa) / 0.5).ceil().max(1.0) as usize;
    let width = (sb - sa) / panels as f64;
    for i in 0..panels {
        let lo = sa + i as f64 * width;
        acc.add(gauss_legendre(|s| 1.0 / l.eval(s.exp()).powi(2), lo, lo + width));
    }
    let dg = |y: f64| {
        let h = 1e-3 * y;
        (term(y + h) - term(y - h)) / (2.0 * h)
    };
    acc.add(0.5 * (term(b) - term(a)));
    acc.add(-(dg(b) - dg(a)) / 12.0);
    acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slowly_varying_ratio_tends_to_one() {
        for l in [SlowlyVarying::Constant(2.0), SlowlyVarying::LogPower { gamma: -0.75, offset: 2.0 }] {
            let n = 1e12;
            assert!((l.eval(3.0 * n) / l.eval(n) - 1.0).abs() < 0.05);
            assert!(l.eval(1.0) > 0.0);
        }
    }

    #[test]
    fn validation_rejects_bad_specs() {
        assert!(SlowlyVarying::Constant(0.0).validate().is_err());
        assert!(SlowlyVarying::LogPower { gamma: 1.0, offset: 1.0 }.validate().is_err());
        assert!(SlowlyVarying::LogPower { gamma: 1.0, offset: 2.0 }.validate().is_ok());
    }

    #[test]
    fn ell_sum_harmonic_asymptotics() {
        let l = SlowlyVarying::unit();
        let euler_gamma = 0.577_215_664_901_532_9;
        for x in [1e3, 1e6, 1e7, 1e12] {
            let h = ell_sum(&l, x);
            let n = x.floor();
            let asym = n.ln() + euler_gamma + 1.0 / (2.0 * n) - 1.0 / (12.0 * n * n);
            assert!((h - asym).abs() < 1e-9, "x={x}: {h} vs {asym}");
        }
    }
}
