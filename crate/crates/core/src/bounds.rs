//! Deterministic bounds: annealed critical point, the replica-symmetric
//! variational bound, the small-beta expansion, theorem-region gates, and
//! ordering verdicts against Monte Carlo estimates.

use crate::disorder::DisorderBatch;
use crate::error::{PinError, Result};
use crate::homogeneous::{finite_volume_free_energy, free_energy, free_energy_near, HomogeneousSolution};
use crate::numeric::golden_section_min;
use crate::quenched::{quenched_free_energy, FreeEnergyEstimate};
use crate::renewal::{ell_sum, RenewalLaw, SlowlyVarying};

/// `h_c^a(beta) = -log(total_mass) - beta^2 / 2`.
pub fn annealed_critical_point(law: &RenewalLaw, beta: f64) -> f64 {
    -law.total_mass().ln() - 0.5 * beta * beta
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RsBound {
    pub value: f64,
    pub q_star: f64,
    /// `F(0, delta)`, the value at `q = 0`.
    pub f0: f64,
}

/// Grid size for the replica-symmetric minimisation.
pub const RS_GRID: usize = 1000;

/// `g(q) = beta^2 q^2 / 2 + F(0, delta - beta^2 q)`.
pub fn rs_objective(law: &RenewalLaw, beta: f64, delta: f64, q: f64) -> Result<f64> {
    let b2 = beta * beta;
    Ok(0.5 * b2 * q * q + free_energy(law, delta - b2 * q)?.f)
}

/// `inf_{0 <= q <= delta/beta^2} g(q)` by a dense grid and golden-section
/// refinement between the neighbours of the best grid point.
pub fn rs_upper_bound(law: &RenewalLaw, beta: f64, delta: f64) -> Result<RsBound> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(PinError::Parameter(format!("the replica-symmetric bound needs beta > 0, got {beta}")));
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(PinError::Parameter(format!("the replica-symmetric bound needs delta > 0, got {delta}")));
    }
    let q_max = delta / (beta * beta);
    let b2 = beta * beta;
    let hint = std::cell::Cell::new(0.0);
    let g = |q: f64| -> Result<f64> {
        let f = free_energy_near(law, delta - b2 * q, hint.get())?.f;
        hint.set(f);
        Ok(0.5 * b2 * q * q + f)
    };
    let mut values = Vec::with_capacity(RS_GRID + 1);
    for i in 0..=RS_GRID {
        values.push(g(q_max * i as f64 / RS_GRID as f64)?);
    }
    let f0 = values[0];
    let (best, &gbest) = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("grid is nonempty");
    let lo = q_max * best.saturating_sub(1) as f64 / RS_GRID as f64;
    let hi = q_max * (best + 1).min(RS_GRID) as f64 / RS_GRID as f64;
    let _ = g(q_max * best as f64 / RS_GRID as f64)?;
    let mut failure = None;
    let (q_ref, g_ref) = golden_section_min(
        |q| match g(q) {
            Ok(v) => v,
            Err(e) => {
                failure = Some(e);
                f64::INFINITY
            }
        },
        lo,
        hi,
        1e-12,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let (value, q_star) = if g_ref < gbest { (g_ref, q_ref) } else { (gbest, q_max * best as f64 / RS_GRID as f64) };
    if !(value < f0) {
        return Err(PinError::Numerical(format!(
            "replica-symmetric bound {value} is not below F(0, delta) = {f0} (beta = {beta}, delta = {delta})"
        )));
    }
    Ok(RsBound { value, q_star, f0 })
}

/// `F(0, delta) - (beta^2 / 2) (dF/d delta)^2`, for laws with `alpha < 1/2`.
pub fn small_beta_expansion(law: &RenewalLaw, beta: f64, delta: f64) -> Result<f64> {
    let alpha = law
        .alpha()
        .ok_or_else(|| PinError::Domain("the law carries no tail exponent".into()))?;
    if alpha >= 0.5 {
        return Err(PinError::Domain(format!("the small-beta expansion needs alpha < 1/2, got {alpha}")));
    }
    if !(beta > 0.0 && delta > 0.0) {
        return Err(PinError::Parameter(format!("need beta > 0 and delta > 0, got beta={beta}, delta={delta}")));
    }
    let s = free_energy(law, delta)?;
    Ok(s.f - 0.5 * beta * beta * s.df * s.df)
}

/// User-facing constants of the region gates; the defaults are placeholders.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionConstants {
    pub a1: f64,
    pub a2: f64,
    pub epsilon: f64,
}

impl Default for RegionConstants {
    fn default() -> Self {
        Self { a1: 1.0, a2: 1.0, epsilon: 0.1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `1/2 < alpha < 1`.
    Relevant,
    /// `alpha = 1/2` with a divergent `ell`.
    Marginal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionVerdict {
    pub regime: Regime,
    pub holds: bool,
    /// Relevant: `delta`. Marginal: `1 / beta^2`.
    pub lhs: f64,
    /// Relevant: `a1 beta^{2a/(2a-1)} Lhat(1/delta)^{-a/(2a-1)}`. Marginal: `a2 ell(a2 |log F| / F)`.
    pub rhs: f64,
    /// Smallest `delta` meeting the condition, when the implicit equation was solved.
    pub threshold: Option<f64>,
}

/// `Lhat(1/delta) = [Ltilde(1/delta) / |log F|]^{2 alpha - 1} L(|log F| / F)^2`
/// with `Ltilde(1/delta) = F / delta^{1/alpha}` and `F = F(0, delta)`.
fn l_hat(law: &RenewalLaw, l: &SlowlyVarying, alpha: f64, delta: f64) -> Result<f64> {
    let f = free_energy(law, delta)?.f;
    if !(f > 0.0 && f < 1.0) {
        return Err(PinError::Domain(format!("region gate needs 0 < F(0, delta) < 1, got {f}")));
    }
    let log_f = f.ln().abs();
    let l_tilde = f / delta.powf(1.0 / alpha);
    Ok((l_tilde / log_f).powf(2.0 * alpha - 1.0) * l.eval(log_f / f).powi(2))
}

fn relevant_rhs(law: &RenewalLaw, l: &SlowlyVarying, alpha: f64, beta: f64, delta: f64, a1: f64) -> Result<f64> {
    let p = alpha / (2.0 * alpha - 1.0);
    Ok(a1 * beta.powf(2.0 * p) * l_hat(law, l, alpha, delta)?.powf(-p))
}

fn marginal_rhs(law: &RenewalLaw, l: &SlowlyVarying, delta: f64, a2: f64) -> Result<f64> {
    let f = free_energy(law, delta)?.f;
    if !(f > 0.0 && f < 1.0) {
        return Err(PinError::Domain(format!("region gate needs 0 < F(0, delta) < 1, got {f}")));
    }
    Ok(a2 * ell_sum(l, a2 * f.ln().abs() / f))
}

const DELTA_FLOOR: f64 = 1e-280;

/// Region conditions under which the quenched/annealed sandwich is proven.
///
/// `L` is the modulation the law was specified with.
pub fn theorem_region(alpha: f64, beta: f64, delta: f64, law: &RenewalLaw, constants: &RegionConstants) -> Result<RegionVerdict> {
    let rv = law
        .regular_variation()
        .ok_or_else(|| PinError::Domain("region gates need a regularly varying law".into()))?;
    if (rv.alpha - alpha).abs() > 1e-12 {
        return Err(PinError::Parameter(format!("alpha = {alpha} disagrees with the law's exponent {}", rv.alpha)));
    }
    if !(beta > 0.0 && delta > 0.0) {
        return Err(PinError::Parameter(format!("need beta > 0 and delta > 0, got beta={beta}, delta={delta}")));
    }
    let l = rv.l;
    if (alpha - 0.5).abs() <= 1e-12 {
        if !l.ell_diverges() {
            return Err(PinError::Domain("alpha = 1/2 with a convergent ell: no region condition applies".into()));
        }
        let lhs = 1.0 / (beta * beta);
        let rhs = marginal_rhs(law, &l, delta, constants.a2)?;
        let threshold = marginal_threshold(law, &l, lhs, constants.a2, delta)?;
        return Ok(RegionVerdict { regime: Regime::Marginal, holds: lhs >= rhs, lhs, rhs, threshold });
    }
    if !(alpha > 0.5 && alpha < 1.0) {
        return Err(PinError::Domain(format!("region gates cover 1/2 <= alpha < 1, got {alpha}")));
    }
    let rhs = relevant_rhs(law, &l, alpha, beta, delta, constants.a1)?;
    let threshold = relevant_threshold(law, &l, alpha, beta, constants.a1, delta);
    Ok(RegionVerdict { regime: Regime::Relevant, holds: delta >= rhs, lhs: delta, rhs, threshold })
}

/// Fixed point of `delta = a1 beta^{2a/(2a-1)} Lhat(1/delta)^{-a/(2a-1)}`, iterated in `log delta`.
fn relevant_threshold(law: &RenewalLaw, l: &SlowlyVarying, alpha: f64, beta: f64, a1: f64, start: f64) -> Option<f64> {
    let mut x = start.ln();
    for _ in 0..200 {
        let next = relevant_rhs(law, l, alpha, beta, x.exp(), a1).ok()?.ln();
        if !next.is_finite() || next < DELTA_FLOOR.ln() {
            return None;
        }
        if (next - x).abs() <= 1e-12 * x.abs().max(1.0) {
            return Some(next.exp());
        }
        x = next;
    }
    None
}

/// Smallest `delta` with `1/beta^2 >= a2 ell(a2 |log F| / F)`, by bisection in `log delta`.
fn marginal_threshold(law: &RenewalLaw, l: &SlowlyVarying, lhs: f64, a2: f64, upper: f64) -> Result<Option<f64>> {
    let holds = |d: f64| -> Result<bool> { Ok(lhs >= marginal_rhs(law, l, d, a2)?) };
    // the right side decreases in delta
    let mut hi = upper.ln();
    let mut grow = 0;
    while !holds(hi.exp())? {
        hi += 1.0;
        grow += 1;
        if grow > 200 || free_energy(law, hi.exp())?.f >= 1.0 {
            return Ok(None);
        }
    }
    let mut lo = hi - 1.0;
    loop {
        if lo < DELTA_FLOOR.ln() {
            return Ok(None);
        }
        let f = free_energy(law, lo.exp())?.f;
        if !(f > 1e-300) {
            return Ok(None);
        }
        if !holds(lo.exp())? {
            break;
        }
        hi = lo;
        lo -= (hi.abs()).max(1.0);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if holds(mid.exp())? {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-12 * hi.abs().max(1.0) {
            break;
        }
    }
    Ok(Some(hi.exp()))
}

/// `(F(0, delta) - F_N(0, delta)) N / log N`, the finite-size constant at one `N`.
pub fn finite_size_ratio(f_limit: f64, f_n: f64, n: usize) -> f64 {
    let x = n as f64;
    (f_limit - f_n) * x / x.ln()
}

/// Largest finite-size ratio over `ns`; the slack constant of the sandwich check.
pub fn fit_finite_size_constant(law: &RenewalLaw, delta: f64, ns: &[usize]) -> Result<f64> {
    let f = free_energy(law, delta)?.f;
    let mut c: f64 = 0.0;
    for &n in ns {
        c = c.max(finite_size_ratio(f, finite_volume_free_energy(law, delta, n)?, n));
    }
    Ok(c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerdictStatus {
    Pass,
    Fail,
    NotApplicable,
}

impl VerdictStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            VerdictStatus::Pass => "pass",
            VerdictStatus::Fail => "fail",
            VerdictStatus::NotApplicable => "not_applicable",
        }
    }
}

/// One inequality `lhs <= rhs` with its margin `rhs - lhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub status: VerdictStatus,
}

impl Verdict {
    pub fn le(name: &'static str, lhs: f64, rhs: f64) -> Self {
        let status = if lhs <= rhs { VerdictStatus::Pass } else { VerdictStatus::Fail };
        Self { name, lhs, rhs, margin: rhs - lhs, status }
    }

    pub fn not_applicable(name: &'static str, lhs: f64, rhs: f64) -> Self {
        Self { name, lhs, rhs, margin: rhs - lhs, status: VerdictStatus::NotApplicable }
    }
}

/// Settings of [`bound_report`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportSettings {
    pub region: RegionConstants,
    /// Constant `C` of the slack `C log N / N`; fitted from the law when absent.
    pub finite_size_c: Option<f64>,
    /// Width of the statistical bands in standard errors.
    pub sigmas: f64,
}

impl Default for ReportSettings {
    fn default() -> Self {
        Self { region: RegionConstants::default(), finite_size_c: None, sigmas: 3.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub alpha: Option<f64>,
    pub beta: f64,
    pub delta: f64,
    pub n: usize,
    /// At `h = h_c^a(beta) + delta`.
    pub quenched: FreeEnergyEstimate,
    pub homogeneous: HomogeneousSolution,
    /// `F_N(0, delta)`, the finite-volume annealed value.
    pub annealed_finite: f64,
    pub rs_bound: f64,
    pub rs_q_star: f64,
    pub expansion: Option<f64>,
    pub lower_sandwich: f64,
    pub finite_size_slack: f64,
    pub region: Option<RegionVerdict>,
    pub verdicts: Vec<Verdict>,
}

impl BoundReport {
    pub fn annealed_limit(&self) -> f64 {
        self.homogeneous.f
    }

    /// Whether every applicable verdict passed.
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.status != VerdictStatus::Fail)
    }
}

fn region_for(law: &RenewalLaw, beta: f64, delta: f64, constants: &RegionConstants) -> Result<(bool, Option<RegionVerdict>)> {
    let Some(alpha) = law.alpha() else {
        return Ok((false, None));
    };
    if beta == 0.0 {
        return Ok((true, None));
    }
    if alpha < 0.5 {
        return Ok((true, None));
    }
    match theorem_region(alpha, beta, delta, law, constants) {
        Ok(v) => Ok((v.holds, Some(v))),
        Err(PinError::Domain(_)) => Ok((false, None)),
        Err(e) => Err(e),
    }
}

/// Quenched estimate, annealed values, replica-symmetric bound and the
/// ordering verdicts at one `(beta, delta, N)`.
pub fn bound_report(
    law: &RenewalLaw,
    beta: f64,
    delta: f64,
    n: usize,
    batch: &DisorderBatch,
    settings: &ReportSettings,
) -> Result<BoundReport> {
    if !(delta > 0.0) {
        return Err(PinError::Parameter(format!("bound reports need delta > 0, got {delta}")));
    }
    let homogeneous = free_energy(law, delta)?;
    let h = annealed_critical_point(law, beta) + delta;
    let quenched = quenched_free_energy(law, beta, h, n, batch)?;
    let annealed_finite = finite_volume_free_energy(law, delta, n)?;
    let (rs_bound, rs_q_star) = if beta > 0.0 {
        let rs = rs_upper_bound(law, beta, delta)?;
        (rs.value, rs.q_star)
    } else {
        (homogeneous.f, 0.0)
    };
    let expansion = match law.alpha() {
        Some(a) if a < 0.5 && beta > 0.0 => Some(small_beta_expansion(law, beta, delta)?),
        _ => None,
    };
    let c = match settings.finite_size_c {
        Some(c) => c,
        None => {
            let ns: Vec<usize> = (10..=16).map(|k| 1usize << k).filter(|&m| m <= law.n_max().max(n)).collect();
            fit_finite_size_constant(law, delta, &ns)?
        }
    };
    let x = n as f64;
    let finite_size_slack = c * x.ln() / x;
    let lower_sandwich = (1.0 - settings.region.epsilon) * homogeneous.f;
    let (applicable, region) = region_for(law, beta, delta, &settings.region)?;

    let band = settings.sigmas * quenched.std_error;
    let q = quenched.mean;
    let mut verdicts = vec![
        Verdict::le("jensen", q, annealed_finite + band),
        Verdict::le("annealed_limit", q, homogeneous.f + band),
    ];
    if beta > 0.0 {
        verdicts.push(Verdict::le("rs_upper", q, rs_bound + band));
        let strict = Verdict::le("rs_strict", rs_bound, homogeneous.f);
        verdicts.push(if rs_bound < homogeneous.f { strict } else { Verdict { status: VerdictStatus::Fail, ..strict } });
    } else {
        verdicts.push(Verdict::not_applicable("rs_upper", q, rs_bound + band));
        verdicts.push(Verdict::not_applicable("rs_strict", rs_bound, homogeneous.f));
    }
    let lower = lower_sandwich - finite_size_slack;
    verdicts.push(if applicable {
        Verdict::le("lower_sandwich", lower, q + band)
    } else {
        Verdict::not_applicable("lower_sandwich", lower, q + band)
    });

    Ok(BoundReport {
        alpha: law.alpha(),
        beta,
        delta,
        n,
        quenched,
        homogeneous,
        annealed_finite,
        rs_bound,
        rs_q_star,
        expansion,
        lower_sandwich,
        finite_size_slack,
        region,
        verdicts,
    })
}
