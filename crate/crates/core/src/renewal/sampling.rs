use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::law::RenewalLaw;

/// Draws one inter-arrival time; `None` when the renewal never returns.
///
/// Jumps past `n_max` follow the pure power tail `P(J > m | J > n_max) = (m / n_max)^{-alpha}`,
/// which ignores the slowly varying factor.
pub fn draw_jump<R: Rng + ?Sized>(law: &RenewalLaw, rng: &mut R) -> Option<usize> {
    let u: f64 = rng.random();
    let cdf = law.cdf();
    let head = cdf[law.n_max()];
    if u < head {
        let j = cdf.partition_point(|&c| c <= u);
        return Some(j.min(law.n_max()));
    }
    if u >= head + law.tail_mass() {
        return None;
    }
    let alpha = law.alpha()?;
    let v: f64 = 1.0 - rng.random::<f64>();
    let m = (law.n_max() as f64) * v.powf(-1.0 / alpha);
    if m >= usize::MAX as f64 / 2.0 {
        return None;
    }
    Some((m.ceil() as usize).max(law.n_max() + 1))
}

/// Renewal points in `[0, n]` using an explicit generator, appended to `out`.
pub fn sample_renewal_into<R: Rng + ?Sized>(law: &RenewalLaw, n: usize, rng: &mut R, out: &mut Vec<usize>) {
    out.clear();
    out.push(0);
    let mut pos = 0usize;
    while let Some(j) = draw_jump(law, rng) {
        pos = match pos.checked_add(j) {
            Some(p) if p <= n => p,
            _ => break,
        };
        out.push(pos);
    }
}

/// `tau ∩ [0, n]` under the free renewal law; a pure function of `seed`.
pub fn sample_renewal(law: &RenewalLaw, n: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    sample_renewal_into(law, n, &mut rng, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::super::law::*;
    use super::super::mass::mass_function;
    use super::super::slowly_varying::SlowlyVarying;
    use super::*;

    #[test]
    fn unit_steps_fill_everything() {
        let law = RenewalLaw::from_masses(&[1.0], 0.0).unwrap();
        assert_eq!(sample_renewal(&law, 7, 3), (0..=7).collect::<Vec<_>>());
    }

    #[test]
    fn deterministic_given_seed() {
        let law = build_power_law(0.4, SlowlyVarying::unit(), 1000).unwrap();
        assert_eq!(sample_renewal(&law, 5000, 11), sample_renewal(&law, 5000, 11));
        assert_ne!(sample_renewal(&law, 5000, 11), sample_renewal(&law, 5000, 12));
    }

    #[test]
    fn empirical_mass_function_matches() {
        let law = build_power_law(0.5, SlowlyVarying::unit(), 100).unwrap();
        let m = mass_function(&law, 10).unwrap();
        let samples = 100_000;
        let mut hits = [0usize; 11];
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut buf = Vec::new();
        for _ in 0..samples {
            sample_renewal_into(&law, 10, &mut rng, &mut buf);
            for &p in &buf {
                hits[p] += 1;
            }
        }
        for n in [1usize, 5, 10] {
            let p = hits[n] as f64 / samples as f64;
            let se = (m.u[n] * (1.0 - m.u[n]) / samples as f64).sqrt();
            assert!((p - m.u[n]).abs() <= 3.0 * se, "n={n}: {p} vs {}", m.u[n]);
        }
    }

    #[test]
    fn transient_law_stops() {
        let law = build_srw_returns(SrwVariant::D3Transient, 100).unwrap();
        let s = sample_renewal(&law, 1_000_000, 5);
        assert!(s.len() < 100);
    }
}
