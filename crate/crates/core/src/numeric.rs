//! Small numerical kernels shared by the renewal, homogeneous and Monte Carlo code.

/// Neumaier-compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut acc = CompensatedSum::new();
    for v in values {
        acc.add(v);
    }
    acc.value()
}

/// `log(exp(a) + exp(b))` without overflow.
#[inline]
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    if a > b {
        a + (b - a).exp().ln_1p()
    } else {
        b + (a - b).exp().ln_1p()
    }
}

/// Max-shifted `log(sum(exp(x)))`; `-inf` for an empty slice.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    let s = compensated_sum(xs.iter().map(|&x| (x - m).exp()));
    m + s.ln()
}

/// Sample mean and standard error (unbiased sample deviation over `sqrt(n)`).
pub fn mean_and_std_error(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let first = values[0];
    if values.iter().all(|&v| v == first) {
        return (first, 0.0);
    }
    let mean = compensated_sum(values.iter().copied()) / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let ss = compensated_sum(values.iter().map(|&v| (v - mean) * (v - mean)));
    let sd = (ss / (n - 1) as f64).sqrt();
    (mean, sd / (n as f64).sqrt())
}

/// Dot product with eight independent accumulators so that the loop vectorizes.
///
/// The summation order is fixed, so results are bit-identical regardless of
/// which instruction set the dispatcher picks.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    #[cfg(target_arch = "x86_64")]
    {
        if std::arch::is_x86_feature_detected!("avx2") {
            // SAFETY: the feature was detected at runtime.
            return unsafe { dot_avx2(a, b) };
        }
    }
    dot_portable(a, b)
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx2")]
unsafe fn dot_avx2(a: &[f64], b: &[f64]) -> f64 {
    dot_portable(a, b)
}

#[inline(always)]
fn dot_portable(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0f64; 8];
    let chunks = n / 8;
    for c in 0..chunks {
        let x = &a[c * 8..c * 8 + 8];
        let y = &b[c * 8..c * 8 + 8];
        for i in 0..8 {
            acc[i] += x[i] * y[i];
        }
    }
    let mut tail = 0.0;
    for i in chunks * 8..n {
        tail += a[i] * b[i];
    }
    ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7])) + tail
}

const GAUSS_LEGENDRE_16: [(f64, f64); 8] = [
    (9.501_250_983_763_745e-2, 1.894_506_104_550_685_9e-1),
    (2.816_035_507_792_589e-1, 1.826_034_150_449_236e-1),
    (4.580_167_776_572_274e-1, 1.691_565_193_950_026_2e-1),
    (6.178_762_444_026_438e-1, 1.495_959_888_165_767_6e-1),
    (7.554_044_083_550_03e-1, 1.246_289_712_555_340_3e-1),
    (8.656_312_023_878_318e-1, 9.515_851_168_249_259e-2),
    (9.445_750_230_732_326e-1, 6.225_352_393_864_771e-2),
    (9.894_009_349_916_499e-1, 2.715_245_941_175_403_7e-2),
];

/// 16-point Gauss-Legendre rule on `[a, b]`.
pub fn gauss_legendre<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = CompensatedSum::new();
    for &(x, w) in GAUSS_LEGENDRE_16.iter() {
        acc.add(w * f(mid - half * x));
        acc.add(w * f(mid + half * x));
    }
    half * acc.value()
}

/// Integral of a nonnegative integrand over `[0, inf)` by composite Gauss-Legendre
/// panels, stopped once a panel past `settle` contributes less than `rel_tol`
/// of the running total.
pub fn integrate_half_line<F: FnMut(f64) -> f64>(
    mut f: F,
    panel: f64,
    settle: f64,
    rel_tol: f64,
    max_panels: usize,
) -> f64 {
    let mut total = CompensatedSum::new();
    let mut quiet = 0;
    for i in 0..max_panels {
        let a = i as f64 * panel;
        let piece = gauss_legendre(&mut f, a, a + panel);
        total.add(piece);
        if a >= settle && piece.abs() <= rel_tol * total.value().abs() {
            quiet += 1;
            if quiet >= 4 {
                break;
            }
        } else {
            quiet = 0;
        }
    }
    total.value()
}

/// Root of a strictly decreasing function bracketed by `f(lo) > 0 > f(hi)`.
///
/// `eval` returns the value and the derivative. Newton steps are taken when
/// they stay inside the bracket, bisection otherwise.
pub fn decreasing_root<E>(eval: E, lo: f64, hi: f64) -> f64
where
    E: FnMut(f64) -> (f64, f64),
{
    decreasing_root_from(eval, lo, hi, lo)
}

/// As [`decreasing_root`], with the first Newton step taken from `start`.
pub fn decreasing_root_from<E>(mut eval: E, mut lo: f64, mut hi: f64, start: f64) -> f64
where
    E: FnMut(f64) -> (f64, f64),
{
    let mut x = if start >= lo && start <= hi { start } else { lo };
    let mut best = (f64::INFINITY, lo);
    for _ in 0..400 {
        let (fx, dfx) = eval(x);
        if fx.abs() < best.0 {
            best = (fx.abs(), x);
        }
        if fx == 0.0 {
            return x;
        }
        if fx > 0.0 {
            lo = lo.max(x);
        } else {
            hi = hi.min(x);
        }
        let newton = x - fx / dfx;
        let next = if dfx < 0.0 && newton.is_finite() && newton > lo && newton < hi {
            newton
        } else if lo > 0.0 && hi / lo > 16.0 {
            (lo * hi).sqrt()
        } else {
            0.5 * (lo + hi)
        };
        if (next - x).abs() <= 2.0 * f64::EPSILON * x.abs().max(f64::MIN_POSITIVE)
            || hi - lo <= 2.0 * f64::EPSILON * hi.abs()
        {
            let (fn_, _) = eval(next);
            return if fn_.abs() <= best.0 { next } else { best.1 };
        }
        x = next;
    }
    best.1
}

/// Golden-section search for a minimum of `f` on `[a, b]`.
pub fn golden_section_min<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..300 {
        if (b - a).abs() <= tol * (1.0 + c.abs()) {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut values = vec![1.0];
        values.extend(std::iter::repeat_n(1e-16, 10_000));
        let s = compensated_sum(values.iter().copied());
        assert!((s - (1.0 + 1e-12)).abs() < 1e-18);
    }

    #[test]
    fn log_sum_exp_large_arguments() {
        // log(exp(1234) + exp(1232)) = 1232 + log(exp(2) + 1)
        let v = log_sum_exp(&[1234.0, 1232.0]);
        assert!((v - 1_234.126_928_011_043).abs() < 1e-12);
        assert_eq!(log_add_exp(f64::NEG_INFINITY, 3.0), 3.0);
    }

    #[test]
    fn dot_matches_naive() {
        let a: Vec<f64> = (0..37).map(|i| (i as f64).sin()).collect();
        let b: Vec<f64> = (0..37).map(|i| (i as f64 * 0.3).cos()).collect();
        let naive: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
        assert!((dot(&a, &b) - naive).abs() < 1e-13);
    }

    #[test]
    fn gauss_legendre_polynomial_exact() {
        let v = gauss_legendre(|x| x.powi(7) - 3.0 * x * x, 0.0, 2.0);
        assert!((v - (32.0 - 8.0)).abs() < 1e-12);
    }

    #[test]
    fn half_line_exponential() {
        let v = integrate_half_line(|t| (-0.3 * t).exp(), 0.5, 1.0, 1e-18, 100_000);
        assert!((v - 1.0 / 0.3).abs() < 1e-12);
    }

    #[test]
    fn decreasing_root_quadratic() {
        // 2 - x^2 on [0, 3]
        let r = decreasing_root(|x| (2.0 - x * x, -2.0 * x), 0.0, 3.0);
        assert!((r - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn golden_section_parabola() {
        let (x, fx) = golden_section_min(|x| (x - 0.3) * (x - 0.3) + 1.0, 0.0, 2.0, 1e-12);
        assert!((x - 0.3).abs() < 1e-6);
        assert!((fx - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mean_and_std_error_constant_sample() {
        let (m, se) = mean_and_std_error(&[0.25; 7]);
        assert_eq!(m, 0.25);
        assert_eq!(se, 0.0);
        let (m, se) = mean_and_std_error(&[1.0, 2.0, 3.0, 4.0]);
        assert!((m - 2.5).abs() < 1e-15);
        assert!((se - (5.0f64 / 3.0).sqrt() / 2.0).abs() < 1e-15);
    }
}
