//! The acceptance battery: exact oracles, inequality chains with statistical
//! bands and asymptotic-ratio checks, each reduced to `lhs <= rhs` rows.

use crate::bounds::{
    annealed_critical_point, bound_report, finite_size_ratio, rs_upper_bound, small_beta_expansion, ReportSettings,
};
use crate::disorder::DisorderBatch;
use crate::error::Result;
use crate::homogeneous::{finite_volume_free_energy, free_energy, homogeneous_trace};
use crate::quenched::quenched_free_energy;
use crate::renewal::{
    build_power_law_with, build_srw_returns, doney_ratio, first_intersection_from_mass, intersection_tail,
    mass_function, tail_from_q, RenewalLaw, SlowlyVarying, SrwVariant, Truncation,
};
use crate::replica::{
    check_integrating_inequality, estimate_psi0, intersection_count_exact, intersection_count_simulated,
    pair_transfer_psi0,
};

/// Kernel support of the laws used for Monte Carlo and homogeneous checks.
pub const DESK_N_MAX: usize = 1 << 16;
/// Horizon of the renewal-function and intersection checks.
pub const LONG_HORIZON: usize = 1_000_000;
pub const DESK_N: usize = 1 << 14;
pub const DESK_SAMPLES: usize = 200;
pub const SIGMAS: f64 = 3.0;

pub const CSV_HEADER: &str = "criterion,check,lhs,rhs,margin,status";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    /// `lhs <= rhs`.
    Le,
    /// `lhs < rhs`.
    Lt,
}

/// One inequality of a criterion with both sides recorded.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub relation: Relation,
}

impl Check {
    pub fn le(name: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Self { name: name.into(), lhs, rhs, relation: Relation::Le }
    }

    pub fn lt(name: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Self { name: name.into(), lhs, rhs, relation: Relation::Lt }
    }

    pub fn margin(&self) -> f64 {
        self.rhs - self.lhs
    }

    /// NaN on either side fails.
    pub fn passed(&self) -> bool {
        match self.relation {
            Relation::Le => self.lhs <= self.rhs,
            Relation::Lt => self.lhs < self.rhs,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionResult {
    pub id: u8,
    pub title: &'static str,
    pub checks: Vec<Check>,
}

impl CriterionResult {
    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(Check::passed)
    }

    /// The failing check with the most negative margin, else the tightest one.
    pub fn worst(&self) -> Option<&Check> {
        let failing = self.checks.iter().filter(|c| !c.passed()).min_by(|a, b| a.margin().total_cmp(&b.margin()));
        failing.or_else(|| self.checks.iter().min_by(|a, b| a.margin().total_cmp(&b.margin())))
    }

    /// `criterion  N PASS|FAIL title (k/m checks; worst: ...)`.
    pub fn summary_line(&self) -> String {
        let ok = self.checks.iter().filter(|c| c.passed()).count();
        let worst = self
            .worst()
            .map(|c| format!("; worst: {} lhs={:.6e} rhs={:.6e}", c.name, c.lhs, c.rhs))
            .unwrap_or_default();
        format!(
            "criterion {:>2} {} {} ({ok}/{} checks{worst})",
            self.id,
            if self.passed() { "PASS" } else { "FAIL" },
            self.title,
            self.checks.len()
        )
    }
}

/// Seventeen significant digits, enough for an exact `f64` round trip.
pub fn format_value(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

/// CSV rows (without header) of a set of criteria.
pub fn csv_body(results: &[CriterionResult]) -> String {
    let mut out = String::new();
    for r in results {
        for c in &r.checks {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.id,
                c.name,
                format_value(c.lhs),
                format_value(c.rhs),
                format_value(c.margin()),
                if c.passed() { "pass" } else { "fail" }
            ));
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AcceptanceSettings {
    pub master_seed: u64,
}

impl Default for AcceptanceSettings {
    fn default() -> Self {
        Self { master_seed: 20_240_601 }
    }
}

impl AcceptanceSettings {
    /// Independent seed per use site.
    fn seed(&self, tag: u64) -> u64 {
        self.master_seed.rotate_left(17) ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15)
    }
}

fn desk_law(alpha: f64) -> Result<RenewalLaw> {
    build_power_law_with(alpha, SlowlyVarying::unit(), DESK_N_MAX, Truncation::ExactTail)
}

fn long_law(alpha: f64) -> Result<RenewalLaw> {
    build_power_law_with(alpha, SlowlyVarying::unit(), LONG_HORIZON, Truncation::ExactTail)
}

pub fn homogeneous_exactness() -> Result<CriterionResult> {
    let law = RenewalLaw::from_masses(&[0.5, 0.5], 0.0)?;
    let s = free_energy(&law, std::f64::consts::LN_2)?;
    let exact = -((5f64.sqrt() - 1.0) / 2.0).ln();
    Ok(CriterionResult {
        id: 1,
        title: "homogeneous exactness",
        checks: vec![
            Check::le("abs_error", (s.f - exact).abs(), 1e-12),
            Check::le("residual", s.residual.abs(), 1e-12),
        ],
    })
}

pub fn doney_asymptotics() -> Result<CriterionResult> {
    let mut checks = Vec::new();
    for alpha in [0.3, 0.5, 0.7] {
        let law = long_law(alpha)?;
        let mass = mass_function(&law, LONG_HORIZON)?;
        let dev: Vec<f64> = [10_000, 100_000, LONG_HORIZON]
            .iter()
            .map(|&n| doney_ratio(&law, &mass, n).map(|r| (r - 1.0).abs()))
            .collect::<Result<_>>()?;
        let ratio = doney_ratio(&law, &mass, LONG_HORIZON)?;
        checks.push(Check::le(format!("alpha={alpha} ratio_1e6>=0.98"), 0.98, ratio));
        checks.push(Check::le(format!("alpha={alpha} ratio_1e6<=1.02"), ratio, 1.02));
        checks.push(Check::lt(format!("alpha={alpha} |r-1| 1e5<1e4"), dev[1], dev[0]));
        checks.push(Check::lt(format!("alpha={alpha} |r-1| 1e6<1e5"), dev[2], dev[1]));
    }
    Ok(CriterionResult { id: 2, title: "renewal function asymptotics", checks })
}

pub fn jensen_chain(settings: &AcceptanceSettings) -> Result<CriterionResult> {
    let law = desk_law(0.3)?;
    let batch = DisorderBatch::new(settings.seed(3), DESK_N, DESK_SAMPLES)?;
    let mut checks = Vec::new();
    for beta in [0.1, 0.3, 0.5] {
        for h in [0.0, 0.1, 0.2] {
            let q = quenched_free_energy(&law, beta, h, DESK_N, &batch)?;
            let annealed = finite_volume_free_energy(&law, h + 0.5 * beta * beta, DESK_N)?;
            checks.push(Check::le(format!("beta={beta} h={h}"), q.mean, annealed + SIGMAS * q.std_error));
        }
    }
    Ok(CriterionResult { id: 3, title: "jensen chain", checks })
}

/// Criterion 6 with the fitted constant `C` returned alongside.
pub fn finite_size_law() -> Result<(CriterionResult, f64)> {
    let law = desk_law(0.3)?;
    let delta = 0.2;
    let f = free_energy(&law, delta)?.f;
    // one trace serves every horizon
    let trace = homogeneous_trace(&law, delta, 1 << 16)?;
    let ratios: Vec<f64> = (10..=16)
        .map(|k| {
            let n = 1usize << k;
            finite_size_ratio(f, trace.log_z[n] / n as f64, n)
        })
        .collect();
    let hi = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut checks: Vec<Check> =
        ratios.iter().enumerate().map(|(i, &r)| Check::lt(format!("ratio N=2^{} positive", i + 10), 0.0, r)).collect();
    checks.push(Check::le("band max/min", hi / lo, 3.0));
    Ok((CriterionResult { id: 6, title: "finite-size law", checks }, hi))
}

pub fn sandwich(settings: &AcceptanceSettings, c_hat: f64) -> Result<CriterionResult> {
    let law = desk_law(0.3)?;
    let (beta, delta) = (0.1, 0.2);
    let batch = DisorderBatch::new(settings.seed(4), DESK_N, DESK_SAMPLES)?;
    let report_settings = ReportSettings { finite_size_c: Some(c_hat), sigmas: SIGMAS, ..Default::default() };
    let r = bound_report(&law, beta, delta, DESK_N, &batch, &report_settings)?;
    let f = r.annealed_limit();
    let x = DESK_N as f64;
    let lower = 0.9 * f - c_hat * x.ln() / x;
    let mut checks = vec![
        Check::le("lower 0.9F-C logN/N", lower, r.quenched.mean),
        Check::le("upper F+3sigma", r.quenched.mean, f + SIGMAS * r.quenched.std_error),
    ];
    checks.extend(r.verdicts.iter().filter(|v| v.status != crate::bounds::VerdictStatus::NotApplicable).map(|v| {
        Check::le(format!("report {}", v.name), v.lhs, v.rhs)
    }));
    Ok(CriterionResult { id: 4, title: "free energy sandwich", checks })
}

pub fn rs_bound_checks(settings: &AcceptanceSettings) -> Result<CriterionResult> {
    let mut checks = Vec::new();
    for (ia, alpha) in [0.3, 0.7].into_iter().enumerate() {
        let law = desk_law(alpha)?;
        let batch = DisorderBatch::new(settings.seed(50 + ia as u64), DESK_N, DESK_SAMPLES)?;
        for beta in [0.2, 0.5] {
            for delta in [0.1, 0.3] {
                let rs = rs_upper_bound(&law, beta, delta)?;
                let tag = format!("alpha={alpha} beta={beta} delta={delta}");
                checks.push(Check::lt(format!("{tag} rs+1e-6<F"), rs.value + 1e-6, rs.f0));
                let h = annealed_critical_point(&law, beta) + delta;
                let q = quenched_free_energy(&law, beta, h, DESK_N, &batch)?;
                checks.push(Check::le(format!("{tag} quenched<=rs+3sigma"), q.mean, rs.value + SIGMAS * q.std_error));
            }
        }
    }
    let law = desk_law(0.3)?;
    for delta in [0.1, 0.3] {
        let gaps: Vec<f64> = [0.05, 0.1, 0.2]
            .iter()
            .map(|&b| Ok((rs_upper_bound(&law, b, delta)?.value - small_beta_expansion(&law, b, delta)?) / b.powi(4)))
            .collect::<Result<_>>()?;
        let hi = gaps.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = gaps.iter().cloned().fold(f64::INFINITY, f64::min);
        checks.push(Check::lt(format!("alpha=0.3 delta={delta} gap/beta^4 positive"), 0.0, lo));
        checks.push(Check::lt(format!("alpha=0.3 delta={delta} gap/beta^4 spread"), (hi - lo) / lo, 0.5));
    }
    Ok(CriterionResult { id: 5, title: "replica-symmetric bound", checks })
}

pub fn intersection_dichotomy() -> Result<CriterionResult> {
    let mut checks = Vec::new();
    let sums = |alpha: f64| -> Result<Vec<f64>> {
        let law = long_law(alpha)?;
        let q = first_intersection_from_mass(&mass_function(&law, LONG_HORIZON)?)?;
        Ok([1_000, 10_000, 100_000, LONG_HORIZON].iter().map(|&n| 1.0 - tail_from_q(&q, n)).collect())
    };
    let s = sums(0.3)?;
    checks.push(Check::lt("alpha=0.3 sum_Q(1e6)<0.995", s[3], 0.995));
    for (i, label) in ["1e3-1e4", "1e4-1e5", "1e5-1e6"].iter().enumerate() {
        checks.push(Check::lt(format!("alpha=0.3 increment {label}"), (s[i + 1] - s[i]).abs(), 1e-4));
    }
    let s = sums(0.7)?;
    checks.push(Check::lt("alpha=0.7 0.99<sum_Q(1e6)", 0.99, s[3]));
    Ok(CriterionResult { id: 7, title: "intersection dichotomy", checks })
}

pub fn geometric_tail(settings: &AcceptanceSettings) -> Result<CriterionResult> {
    let law = desk_law(0.7)?;
    let n = 1000;
    let k_max = 10;
    let exact = intersection_count_exact(&law, n, k_max)?;
    let first = 1.0 - intersection_tail(&law, n)?;
    let samples = 20_000;
    let sim = intersection_count_simulated(&law, n, samples, settings.seed(8))?;
    let mut checks = Vec::new();
    for k in 1..=k_max {
        let geo = first.powi(k as i32);
        checks.push(Check::le(format!("k={k} |exact-geometric|"), (exact.tail[k] - geo).abs(), 1e-9));
    }
    for k in 1..=k_max {
        let p = exact.tail[k];
        let se = (p * (1.0 - p) / samples as f64).sqrt();
        checks.push(Check::le(format!("k={k} |simulated-exact|"), (sim.tail[k] - p).abs(), SIGMAS * se));
    }
    Ok(CriterionResult { id: 8, title: "geometric intersection tail", checks })
}

pub fn interpolation_inequality(settings: &AcceptanceSettings) -> Result<CriterionResult> {
    let n = 1 << 10;
    let pairs = 500;
    let cases = [("alpha=0.3", desk_law(0.3)?), ("srw_d1", build_srw_returns(SrwVariant::D1Recurrent, DESK_N_MAX)?)];
    let mut checks = Vec::new();
    for (i, (tag, law)) in cases.iter().enumerate() {
        let batch = DisorderBatch::new(settings.seed(90 + i as u64), n, DESK_SAMPLES)?;
        let c = check_integrating_inequality(law, 0.1, 0.2, n, &batch, pairs, settings.seed(95 + i as u64))?;
        checks.push(Check::le(format!("{tag} -3sigma<=-R"), -SIGMAS * c.minus_r_se, c.minus_r));
        checks.push(Check::le(format!("{tag} -R<=(e-1)psi+3sigma"), c.minus_r, c.rhs + SIGMAS * c.combined_se));
        checks.push(Check::lt(format!("{tag} weight share"), c.max_weight_share, 0.5));
    }
    Ok(CriterionResult { id: 9, title: "interpolation inequality", checks })
}

pub fn psi_oracle(settings: &AcceptanceSettings) -> Result<CriterionResult> {
    let law = desk_law(0.5)?;
    let (delta, n, samples) = (0.3, 200, 20_000);
    let mut checks = Vec::new();
    for (i, c) in [0.01, 0.05].into_iter().enumerate() {
        let exact = pair_transfer_psi0(&law, delta, c, n)?;
        let est = estimate_psi0(&law, delta, c, n, samples, settings.seed(100 + i as u64))?;
        checks.push(Check::le(format!("lambda_beta2={c} |mc-dp|"), (est.value - exact).abs(), SIGMAS * est.std_error));
    }
    Ok(CriterionResult { id: 10, title: "psi oracle", checks })
}

pub fn superadditivity(settings: &AcceptanceSettings) -> Result<CriterionResult> {
    let law = desk_law(0.3)?;
    let delta = 0.2;
    let top = 1usize << 14;
    let trace = homogeneous_trace(&law, delta, top)?;
    let mut checks = Vec::new();
    for k in 8..=13 {
        let n = 1usize << k;
        // log Z_{2N} >= 2 log Z_N for the pinned partition function
        checks.push(Check::le(format!("homogeneous N=2^{k}"), 2.0 * trace.log_z[n], trace.log_z[2 * n]));
    }
    let beta = 0.1;
    let h = annealed_critical_point(&law, beta) + delta;
    let batch = DisorderBatch::new(settings.seed(11), top, DESK_SAMPLES)?;
    let est: Vec<_> = (8..=14)
        .map(|k| quenched_free_energy(&law, beta, h, 1 << k, &batch))
        .collect::<Result<_>>()?;
    for w in est.windows(2) {
        let se = (w[0].std_error.powi(2) + w[1].std_error.powi(2)).sqrt();
        checks.push(Check::le(format!("quenched N={}", w[0].n), w[0].mean - SIGMAS * se, w[1].mean));
    }
    Ok(CriterionResult { id: 11, title: "superadditivity", checks })
}

pub fn critical_exponent() -> Result<CriterionResult> {
    let law = desk_law(0.5)?;
    let deltas = [1e-1, 1e-2, 1e-3];
    let logs: Vec<f64> = deltas.iter().map(|&d| free_energy(&law, d).map(|s| s.f.ln())).collect::<Result<_>>()?;
    let mut checks = Vec::new();
    for i in 0..2 {
        let slope = (logs[i] - logs[i + 1]) / (deltas[i].ln() - deltas[i + 1].ln());
        let tag = format!("slope {:e}-{:e}", deltas[i], deltas[i + 1]);
        checks.push(Check::le(format!("{tag} |s-2|/2"), (slope - 2.0).abs() / 2.0, 0.1));
    }
    Ok(CriterionResult { id: 12, title: "critical exponent", checks })
}

/// Criteria 1 to 12 in order.
pub fn run_criteria(settings: &AcceptanceSettings) -> Result<Vec<CriterionResult>> {
    let (c6, c_hat) = finite_size_law()?;
    Ok(vec![
        homogeneous_exactness()?,
        doney_asymptotics()?,
        jensen_chain(settings)?,
        sandwich(settings, c_hat)?,
        rs_bound_checks(settings)?,
        c6,
        intersection_dichotomy()?,
        geometric_tail(settings)?,
        interpolation_inequality(settings)?,
        psi_oracle(settings)?,
        superadditivity(settings)?,
        critical_exponent()?,
    ])
}

/// Criterion 13 from two runs of criteria 1 to 12.
pub fn determinism(first: &[CriterionResult], second: &[CriterionResult]) -> CriterionResult {
    let (a, b) = (csv_body(first), csv_body(second));
    let differing = a.lines().zip(b.lines()).filter(|(x, y)| x != y).count() + a.lines().count().abs_diff(b.lines().count());
    CriterionResult {
        id: 13,
        title: "determinism",
        checks: vec![Check::le("differing csv rows", differing as f64, 0.0)],
    }
}

/// All criteria; the rerun uses a thread pool of a different size.
pub fn run_all(settings: &AcceptanceSettings) -> Result<Vec<CriterionResult>> {
    let mut first = run_criteria(settings)?;
    let threads = if rayon::current_num_threads() == 2 { 3 } else { 2 };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| crate::PinError::Numerical(format!("thread pool: {e}")))?;
    let second = pool.install(|| run_criteria(settings))?;
    let d = determinism(&first, &second);
    first.push(d);
    Ok(first)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn check_relations() {
        assert!(Check::le("a", 1.0, 1.0).passed());
        assert!(!Check::lt("a", 1.0, 1.0).passed());
        assert!(!Check::le("a", f64::NAN, 1.0).passed());
        let r = CriterionResult { id: 1, title: "t", checks: vec![Check::le("x", 2.0, 1.0), Check::le("y", 0.0, 5.0)] };
        assert!(!r.passed());
        assert_eq!(r.worst().unwrap().name, "x");
        assert!(r.summary_line().starts_with("criterion  1 FAIL t (1/2 checks"));
    }

    #[test]
    fn values_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02e23, f64::MIN_POSITIVE] {
            assert_eq!(format_value(x).parse::<f64>().unwrap(), x);
        }
        let r = CriterionResult { id: 2, title: "t", checks: vec![Check::le("x", 0.5, 1.0)] };
        assert_eq!(csv_body(&[r]), "2,x,5.0000000000000000e-1,1.0000000000000000e0,5.0000000000000000e-1,pass\n");
    }

    #[test]
    fn determinism_counts_differences() {
        let a = vec![CriterionResult { id: 1, title: "t", checks: vec![Check::le("x", 0.5, 1.0)] }];
        let mut b = a.clone();
        assert!(determinism(&a, &b).passed());
        b[0].checks[0].lhs = 0.5000000000000001;
        assert!(!determinism(&a, &b).passed());
    }

    #[test]
    fn exactness_criterion_passes() {
        assert!(homogeneous_exactness().unwrap().passed());
        assert!(critical_exponent().unwrap().passed());
    }
}
