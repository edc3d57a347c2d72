//! Named experiment suites. Each returns a fixed header, rows in grid order,
//! and whether every check in the rows passed.

use pinlab_core::acceptance::{csv_body, format_value, run_all, AcceptanceSettings, CSV_HEADER};
use pinlab_core::bounds::{annealed_critical_point, bound_report, ReportSettings};
use pinlab_core::disorder::DisorderBatch;
use pinlab_core::homogeneous::{finite_volume_free_energy, free_energy};
use pinlab_core::quenched::quenched_free_energy;
use pinlab_core::renewal::{doney_ratio, first_intersection_from_mass, mass_function, tail_from_q, RenewalLaw};
use pinlab_core::replica::check_integrating_inequality;
use pinlab_core::Result;
use rayon::prelude::*;

use crate::config::ExperimentConfig;

/// Verdict columns of `bounds_grid`, in order.
pub const VERDICT_NAMES: [&str; 5] = ["jensen", "annealed_limit", "rs_upper", "rs_strict", "lower_sandwich"];

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOutput {
    pub header: String,
    /// CSV body, one line per grid point.
    pub body: String,
    pub rows: usize,
    pub passed: bool,
}

fn num(x: f64) -> String {
    format_value(x)
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn status(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "fail"
    }
}

/// Grid points `(beta, delta, h, n)` in row-major order of the config lists.
fn points(config: &ExperimentConfig, law: &RenewalLaw) -> Vec<(f64, f64, f64, usize)> {
    let mut out = Vec::new();
    for &beta in &config.grid.beta {
        let hc = annealed_critical_point(law, beta);
        let pairs: Vec<(f64, f64)> = match (&config.grid.delta, &config.grid.h) {
            (_, Some(h)) => h.iter().map(|&h| (h - hc, h)).collect(),
            (Some(d), None) => d.iter().map(|&d| (d, hc + d)).collect(),
            (None, None) => Vec::new(),
        };
        for (delta, h) in pairs {
            for &n in &config.grid.n {
                out.push((beta, delta, h, n));
            }
        }
    }
    out
}

fn assemble(header: &str, rows: Vec<(String, bool)>) -> SuiteOutput {
    let passed = rows.iter().all(|r| r.1);
    let n = rows.len();
    let body: String = rows.into_iter().map(|(line, _)| line + "\n").collect();
    SuiteOutput { header: header.to_string(), body, rows: n, passed }
}

pub fn run_suite(config: &ExperimentConfig) -> Result<SuiteOutput> {
    if config.suite == "acceptance" {
        return acceptance(config);
    }
    let law = config.law.build()?;
    match config.suite.as_str() {
        "asymptotics" => asymptotics(config, &law),
        "homogeneous" => homogeneous(config, &law),
        "quenched_grid" => quenched_grid(config, &law),
        "bounds_grid" => bounds_grid(config, &law),
        "replica_checks" => replica_checks(config, &law),
        other => Err(pinlab_core::PinError::Parameter(format!("unknown suite {other:?}"))),
    }
}

pub const ASYMPTOTICS_HEADER: &str = "n,mass,doney_ratio,first_intersection_sum,intersection_tail";

fn asymptotics(config: &ExperimentConfig, law: &RenewalLaw) -> Result<SuiteOutput> {
    let top = config.grid.n.iter().copied().max().unwrap_or(1);
    let mass = mass_function(law, top)?;
    let q = first_intersection_from_mass(&mass)?;
    let mut rows = Vec::new();
    for &n in &config.grid.n {
        let ratio = if law.alpha().is_some() { Some(doney_ratio(law, &mass, n)?) } else { None };
        let tail = tail_from_q(&q, n);
        rows.push((format!("{n},{},{},{},{}", num(mass.u[n]), opt(ratio), num(1.0 - tail), num(tail)), true));
    }
    Ok(assemble(ASYMPTOTICS_HEADER, rows))
}

pub const HOMOGENEOUS_HEADER: &str = "delta,n,f,df,d2f,residual,f_n,finite_size_gap";

fn homogeneous(config: &ExperimentConfig, law: &RenewalLaw) -> Result<SuiteOutput> {
    let deltas: Vec<f64> = match (&config.grid.delta, &config.grid.h) {
        (Some(d), _) => d.clone(),
        // without disorder h and delta differ by the log of the total mass
        (None, Some(h)) => h.iter().map(|&h| h + law.total_mass().ln()).collect(),
        (None, None) => Vec::new(),
    };
    let grid: Vec<(f64, usize)> = deltas.iter().flat_map(|&d| config.grid.n.iter().map(move |&n| (d, n))).collect();
    let rows = grid
        .par_iter()
        .map(|&(delta, n)| {
            let s = free_energy(law, delta)?;
            let f_n = finite_volume_free_energy(law, delta, n)?;
            Ok((
                format!(
                    "{},{n},{},{},{},{},{},{}",
                    num(delta),
                    num(s.f),
                    num(s.df),
                    num(s.d2f),
                    num(s.residual),
                    num(f_n),
                    num(s.f - f_n)
                ),
                true,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble(HOMOGENEOUS_HEADER, rows))
}

pub const QUENCHED_HEADER: &str =
    "beta,h,delta,n,num_samples,mean,std_error,annealed_finite,jensen_rhs,jensen_margin,status";

fn quenched_grid(config: &ExperimentConfig, law: &RenewalLaw) -> Result<SuiteOutput> {
    let sig = config.tolerances.sigmas;
    let rows = points(config, law)
        .par_iter()
        .map(|&(beta, delta, h, n)| {
            let batch = DisorderBatch::new(config.batch.master_seed, n, config.batch.num_samples)?;
            let q = quenched_free_energy(law, beta, h, n, &batch)?;
            let annealed = finite_volume_free_energy(law, h + 0.5 * beta * beta, n)?;
            let rhs = annealed + sig * q.std_error;
            let ok = q.mean <= rhs;
            Ok((
                format!(
                    "{},{},{},{n},{},{},{},{},{},{},{}",
                    num(beta),
                    num(h),
                    num(delta),
                    q.num_samples,
                    num(q.mean),
                    num(q.std_error),
                    num(annealed),
                    num(rhs),
                    num(rhs - q.mean),
                    status(ok)
                ),
                ok,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble(QUENCHED_HEADER, rows))
}

pub fn bounds_header() -> String {
    let mut h = String::from(
        "beta,delta,n,num_samples,quenched_mean,quenched_std_error,annealed_finite,annealed_limit,rs_bound,rs_q_star,\
         expansion,lower_sandwich,finite_size_slack,region_regime,region_holds,region_lhs,region_rhs,region_threshold",
    );
    for v in VERDICT_NAMES {
        h.push_str(&format!(",{v}_lhs,{v}_rhs,{v}_margin,{v}_status"));
    }
    h.push_str(",status");
    h
}

fn bounds_grid(config: &ExperimentConfig, law: &RenewalLaw) -> Result<SuiteOutput> {
    let settings =
        ReportSettings { region: config.region.to_core(), finite_size_c: None, sigmas: config.tolerances.sigmas };
    let rows = points(config, law)
        .par_iter()
        .map(|&(beta, delta, _, n)| {
            let batch = DisorderBatch::new(config.batch.master_seed, n, config.batch.num_samples)?;
            let r = bound_report(law, beta, delta, n, &batch, &settings)?;
            let region = r.region.as_ref();
            let mut line = format!(
                "{},{},{n},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                num(beta),
                num(delta),
                r.quenched.num_samples,
                num(r.quenched.mean),
                num(r.quenched.std_error),
                num(r.annealed_finite),
                num(r.annealed_limit()),
                num(r.rs_bound),
                num(r.rs_q_star),
                opt(r.expansion),
                num(r.lower_sandwich),
                num(r.finite_size_slack),
                region.map(|v| format!("{:?}", v.regime).to_lowercase()).unwrap_or_default(),
                region.map(|v| v.holds.to_string()).unwrap_or_default(),
                opt(region.map(|v| v.lhs)),
                opt(region.map(|v| v.rhs)),
                opt(region.and_then(|v| v.threshold)),
            );
            for name in VERDICT_NAMES {
                match r.verdicts.iter().find(|v| v.name == name) {
                    Some(v) => line.push_str(&format!(
                        ",{},{},{},{}",
                        num(v.lhs),
                        num(v.rhs),
                        num(v.margin),
                        v.status.as_str()
                    )),
                    None => line.push_str(",,,,"),
                }
            }
            let ok = r.passed();
            line.push_str(&format!(",{}", status(ok)));
            Ok((line, ok))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble(&bounds_header(), rows))
}

/// Keeps the pair streams apart from the disorder streams.
const PAIR_SEED_SALT: u64 = 0x9E37_79B9_7F4A_7C15;

pub const REPLICA_HEADER: &str = "beta,delta,n,num_samples,pair_samples,minus_r,minus_r_se,psi,psi_se,rhs,combined_se,\
lower_margin,upper_margin,max_weight_share,status";

fn replica_checks(config: &ExperimentConfig, law: &RenewalLaw) -> Result<SuiteOutput> {
    let rows = points(config, law)
        .par_iter()
        .map(|&(beta, delta, _, n)| {
            let batch = DisorderBatch::new(config.batch.master_seed, n, config.batch.num_samples)?;
            let pair_seed = config.batch.master_seed ^ PAIR_SEED_SALT;
            let c = check_integrating_inequality(law, beta, delta, n, &batch, config.batch.pair_samples, pair_seed)?;
            Ok((
                format!(
                    "{},{},{n},{},{},{},{},{},{},{},{},{},{},{},{}",
                    num(beta),
                    num(delta),
                    config.batch.num_samples,
                    config.batch.pair_samples,
                    num(c.minus_r),
                    num(c.minus_r_se),
                    num(c.psi),
                    num(c.psi_se),
                    num(c.rhs),
                    num(c.combined_se),
                    num(c.lower_margin),
                    num(c.upper_margin),
                    num(c.max_weight_share),
                    status(c.passed)
                ),
                c.passed,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble(REPLICA_HEADER, rows))
}

fn acceptance(config: &ExperimentConfig) -> Result<SuiteOutput> {
    let results = run_all(&AcceptanceSettings { master_seed: config.batch.master_seed })?;
    for r in &results {
        eprintln!("{}", r.summary_line());
    }
    let rows = results.iter().map(|r| r.checks.len()).sum();
    Ok(SuiteOutput {
        header: CSV_HEADER.to_string(),
        body: csv_body(&results),
        rows,
        passed: results.iter().all(|r| r.passed()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    #[test]
    fn homogeneous_two_point_row() {
        let c = parse_config(
            "suite = \"homogeneous\"\n[law]\nkind = \"masses\"\nmasses = [0.5, 0.5]\n[grid]\ndelta = [0.6931471805599453]\nn = [64]\n",
        )
        .unwrap();
        let out = run_suite(&c).unwrap();
        assert_eq!(out.rows, 1);
        let f: f64 = out.body.split(',').nth(2).unwrap().parse().unwrap();
        assert!((f - 0.4812118250596034).abs() < 1e-12);
        assert_eq!(out.header.split(',').count(), out.body.trim_end().split(',').count());
    }

    #[test]
    fn h_grid_maps_to_delta() {
        let c = parse_config("suite = \"quenched_grid\"\n[law]\nalpha = 0.3\nn_max = 256\n[grid]\nbeta = [0.2]\nh = [0.1]\nn = [64]\n[batch]\nnum_samples = 4\n")
            .unwrap();
        let law = c.law.build().unwrap();
        let p = points(&c, &law);
        assert_eq!(p.len(), 1);
        assert!((p[0].1 - (0.1 - annealed_critical_point(&law, 0.2))).abs() < 1e-15);
    }

    #[test]
    fn column_counts_match_headers() {
        for (suite, header) in [
            ("asymptotics", ASYMPTOTICS_HEADER.to_string()),
            ("quenched_grid", QUENCHED_HEADER.to_string()),
            ("bounds_grid", bounds_header()),
            ("replica_checks", REPLICA_HEADER.to_string()),
        ] {
            let c = parse_config(&format!(
                "suite = \"{suite}\"\n[law]\nalpha = 0.3\nn_max = 512\n[grid]\nbeta = [0.1]\ndelta = [0.2]\nn = [64, 128]\n[batch]\nnum_samples = 8\npair_samples = 50\n"
            ))
            .unwrap();
            let out = run_suite(&c).unwrap();
            assert_eq!(out.rows, 2, "{suite}");
            for line in out.body.lines() {
                assert_eq!(line.split(',').count(), header.split(',').count(), "{suite}: {line}");
            }
        }
    }
}
