//! Online ("relaxed") convolution for renewal-type recursions
//! `x(n) = finish(n, sum_{j<n} x(j) kernel(n - j))`.
//!
//! Small problems run the direct quadratic loop. Large ones use the
//! divide-and-conquer scheme: once the left half of a block is final, its
//! contribution to the right half is added with one FFT product, which gives
//! `O(n log^2 n)` overall.

use std::collections::HashMap;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::Result;
use crate::numeric::dot;

/// Forward and inverse plans of one transform length.
type PlanPair = (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>);

/// Work (`len * support`) below which the direct loop is used.
pub const DIRECT_WORK_LIMIT: usize = 1 << 25;
const BASE_BLOCK: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Auto,
    Direct,
    Relaxed,
}

/// Runs the recursion for `n = 1..len` with `x(0) = x0`.
///
/// `kernel[k]` is the weight at lag `k`; `kernel[0]` is ignored and lags past
/// the end of the slice are zero.
pub fn online_convolution<F>(x0: f64, kernel: &[f64], len: usize, method: Method, finish: F) -> Result<Vec<f64>>
where
    F: FnMut(usize, f64) -> Result<f64>,
{
    let support = kernel.len().saturating_sub(1).min(len);
    let method = match method {
        Method::Auto => {
            if len.saturating_mul(support) <= DIRECT_WORK_LIMIT || len <= 4 * BASE_BLOCK {
                Method::Direct
            } else {
                Method::Relaxed
            }
        }
        m => m,
    };
    match method {
        Method::Relaxed => Relaxed::new(x0, kernel, len, finish).run(),
        _ => direct(x0, kernel, len, finish),
    }
}

fn direct<F>(x0: f64, kernel: &[f64], len: usize, mut finish: F) -> Result<Vec<f64>>
where
    F: FnMut(usize, f64) -> Result<f64>,
{
    let mut x = vec![0.0; len];
    if len == 0 {
        return Ok(x);
    }
    x[0] = x0;
    // reversed kernel so that each step is a contiguous dot product
    let kmax = kernel.len().saturating_sub(1).min(len);
    let rev: Vec<f64> = (0..kmax).map(|i| kernel[kmax - i]).collect();
    for n in 1..len {
        let m = n.min(kmax);
        let acc = if m == 0 { 0.0 } else { dot(&x[n - m..n], &rev[kmax - m..]) };
        x[n] = finish(n, acc)?;
    }
    Ok(x)
}

struct Relaxed<'a, F> {
    kernel: &'a [f64],
    x: Vec<f64>,
    acc: Vec<f64>,
    finish: F,
    planner: FftPlanner<f64>,
    kernel_cache: HashMap<(usize, usize), Arc<Vec<Complex64>>>,
    plans: HashMap<usize, PlanPair>,
}

impl<'a, F> Relaxed<'a, F>
where
    F: FnMut(usize, f64) -> Result<f64>,
{
    fn new(x0: f64, kernel: &'a [f64], len: usize, finish: F) -> Self {
        let mut x = vec![0.0; len];
        if len > 0 {
            x[0] = x0;
        }
        Self {
            kernel,
            x,
            acc: vec![0.0; len],
            finish,
            planner: FftPlanner::new(),
            kernel_cache: HashMap::new(),
            plans: HashMap::new(),
        }
    }

    fn run(mut self) -> Result<Vec<f64>> {
        let len = self.x.len();
        if len > 0 {
            self.solve(0, len)?;
        }
        Ok(self.x)
    }

    #[inline]
    fn k(&self, lag: usize) -> f64 {
        self.kernel.get(lag).copied().unwrap_or(0.0)
    }

    fn solve(&mut self, l: usize, r: usize) -> Result<()> {
        if r - l <= BASE_BLOCK {
            for n in l.max(1)..r {
                let mut s = self.acc[n];
                for j in l..n {
                    s += self.x[j] * self.k(n - j);
                }
                self.x[n] = (self.finish)(n, s)?;
            }
            return Ok(());
        }
        let mid = l + (r - l) / 2;
        self.solve(l, mid)?;
        self.spread(l, mid, r);
        self.solve(mid, r)
    }

    /// Adds the contribution of `x[l..mid]` to `acc[mid..r]`.
    fn spread(&mut self, l: usize, mid: usize, r: usize) {
        let src = mid - l;
        let klen = r - l; // lags 0..r-l
        if self.kernel.len() <= 1 || mid - l == 0 {
            return;
        }
        // lags needed are at least 1 (x at mid-1 to acc at mid)
        let size = (src + klen - 1).next_power_of_two();
        let kf = self.kernel_spectrum(size, klen);
        let (fwd, inv) = self.plan(size);
        let mut buf: Vec<Complex64> = Vec::with_capacity(size);
        buf.extend(self.x[l..mid].iter().map(|&v| Complex64::new(v, 0.0)));
        buf.resize(size, Complex64::new(0.0, 0.0));
        fwd.process(&mut buf);
        for (b, k) in buf.iter_mut().zip(kf.iter()) {
            *b *= *k;
        }
        inv.process(&mut buf);
        let scale = 1.0 / size as f64;
        for n in mid..r {
            self.acc[n] += buf[n - l].re * scale;
        }
    }

    fn kernel_spectrum(&mut self, size: usize, klen: usize) -> Arc<Vec<Complex64>> {
        if let Some(k) = self.kernel_cache.get(&(size, klen)) {
            return Arc::clone(k);
        }
        let (fwd, _) = self.plan(size);
        let mut buf = vec![Complex64::new(0.0, 0.0); size];
        for (lag, slot) in buf.iter_mut().enumerate().take(klen).skip(1) {
            slot.re = self.k(lag);
        }
        fwd.process(&mut buf);
        let arc = Arc::new(buf);
        self.kernel_cache.insert((size, klen), Arc::clone(&arc));
        arc
    }

    fn plan(&mut self, size: usize) -> (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>) {
        if let Some(p) = self.plans.get(&size) {
            return (Arc::clone(&p.0), Arc::clone(&p.1));
        }
        let fwd = self.planner.plan_fft_forward(size);
        let inv = self.planner.plan_fft_inverse(size);
        self.plans.insert(size, (Arc::clone(&fwd), Arc::clone(&inv)));
        (fwd, inv)
    }
}


/// First `len` coefficients of the linear convolution `a * b`.
pub fn truncated_convolution(a: &[f64], b: &[f64], len: usize) -> Vec<f64> {
    let la = a.len().min(len);
    let lb = b.len().min(len);
    let mut out = vec![0.0; len];
    if la == 0 || lb == 0 {
        return out;
    }
    if la.saturating_mul(lb) <= 1 << 16 {
        for (i, &x) in a[..la].iter().enumerate() {
            if x == 0.0 {
                continue;
            }
            for (j, &y) in b[..lb.min(len - i)].iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        return out;
    }
    let size = (la + lb - 1).next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(size);
    let inv = planner.plan_fft_inverse(size);
    let load = |v: &[f64]| {
        let mut buf: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        buf.resize(size, Complex64::new(0.0, 0.0));
        buf
    };
    let mut fa = load(&a[..la]);
    let mut fb = load(&b[..lb]);
    fwd.process(&mut fa);
    fwd.process(&mut fb);
    for (x, y) in fa.iter_mut().zip(fb.iter()) {
        *x *= *y;
    }
    inv.process(&mut fa);
    let scale = 1.0 / size as f64;
    for (o, v) in out.iter_mut().zip(fa.iter()) {
        *o = v.re * scale;
    }
    out
}
