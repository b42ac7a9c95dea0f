//! Exact samplers and quantile functions used by the review model.
//!
//! Samplers draw from an [`RngStream`] and are deterministic given the
//! parameters and the stream state. None of them falls back to a normal
//! approximation.

use rand::Rng;
use rand_distr::{Binomial, Distribution, Hypergeometric, Poisson};
use statrs::function::erf::erfc_inv;
use statrs::function::gamma::{gamma_lr, gamma_ur, ln_gamma};

use crate::error::{invalid_param, Result};
use crate::rng::RngStream;

/// Exact Poisson variate. A zero rate returns 0 without consuming draws.
pub fn sample_poisson(rate: f64, rng: &mut RngStream) -> Result<u64> {
    if !rate.is_finite() || rate < 0.0 {
        return Err(invalid_param(format!(
            "poisson rate must be finite and >= 0, got {rate}"
        )));
    }
    if rate == 0.0 {
        return Ok(0);
    }
    let dist = Poisson::new(rate).map_err(|e| invalid_param(e.to_string()))?;
    let x: f64 = dist.sample(rng);
    Ok(x as u64)
}

/// Exact Binomial(n, p) variate.
pub fn sample_binomial(n: u64, p: f64, rng: &mut RngStream) -> Result<u64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid_param(format!(
            "binomial probability must lie in [0, 1], got {p}"
        )));
    }
    if n == 0 || p == 0.0 {
        return Ok(0);
    }
    if p == 1.0 {
        return Ok(n);
    }
    let dist = Binomial::new(n, p).map_err(|e| invalid_param(e.to_string()))?;
    Ok(dist.sample(rng))
}

/// Univariate hypergeometric: successes among `draws` taken without
/// replacement from `total` items of which `marked` are successes.
fn sample_hypergeometric(total: u64, marked: u64, draws: u64, rng: &mut RngStream) -> Result<u64> {
    debug_assert!(marked <= total && draws <= total);
    if draws == 0 || marked == 0 {
        return Ok(0);
    }
    if marked == total {
        return Ok(draws);
    }
    if draws == total {
        return Ok(marked);
    }
    let dist =
        Hypergeometric::new(total, marked, draws).map_err(|e| invalid_param(e.to_string()))?;
    Ok(dist.sample(rng))
}

/// Multivariate hypergeometric split: how many of each class end up in a
/// sample of `n_draw` items taken without replacement from a pool holding
/// `class_counts[k]` items of class `k`.
///
/// Sampled by sequential conditioning: class `k` is drawn against the pool of
/// classes `k..`, with the remaining sample size.
pub fn sample_mv_hypergeometric(
    class_counts: &[u64],
    n_draw: u64,
    rng: &mut RngStream,
) -> Result<Vec<u64>> {
    let mut out = vec![0; class_counts.len()];
    fill_mv_hypergeometric(class_counts, n_draw, rng, &mut out)?;
    Ok(out)
}

pub(crate) fn fill_mv_hypergeometric(
    class_counts: &[u64],
    n_draw: u64,
    rng: &mut RngStream,
    out: &mut [u64],
) -> Result<()> {
    let total: u64 = class_counts.iter().sum();
    if n_draw > total {
        return Err(invalid_param(format!(
            "cannot draw {n_draw} items from a pool of {total}"
        )));
    }
    let mut pool = total;
    let mut remaining = n_draw;
    let last = class_counts.len().saturating_sub(1);
    for (k, &count) in class_counts.iter().enumerate() {
        let y = if k == last {
            remaining
        } else {
            sample_hypergeometric(pool, count, remaining, rng)?
        };
        out[k] = y;
        pool -= count;
        remaining -= y;
    }
    debug_assert_eq!(remaining, 0);
    Ok(())
}

/// Exponential variate with the given mean.
pub fn sample_exponential(mean: f64, rng: &mut RngStream) -> Result<f64> {
    if !(mean.is_finite() && mean > 0.0) {
        return Err(invalid_param(format!(
            "exponential mean must be positive, got {mean}"
        )));
    }
    let exp = rand_distr::Exp1;
    let e: f64 = rng.sample(exp);
    Ok(e * mean)
}

/// Uniform variate on `[lo, hi)`.
pub fn sample_uniform(lo: f64, hi: f64, rng: &mut RngStream) -> Result<f64> {
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(invalid_param(format!("bad uniform bounds [{lo}, {hi})")));
    }
    Ok(lo + (hi - lo) * rng.uniform())
}

fn gamma_shape_scale(mean: f64, variance: f64) -> Result<(f64, f64)> {
    if !(mean.is_finite() && mean > 0.0) {
        return Err(invalid_param(format!(
            "gamma mean must be positive and finite, got {mean}"
        )));
    }
    if !(variance.is_finite() && variance > 0.0) {
        return Err(invalid_param(format!(
            "gamma variance must be positive and finite, got {variance}"
        )));
    }
    Ok((mean * mean / variance, variance / mean))
}

/// CDF of the Gamma distribution with the given mean and variance
/// (shape = mean²/variance, scale = variance/mean).
pub fn gamma_cdf(x: f64, mean: f64, variance: f64) -> Result<f64> {
    let (shape, scale) = gamma_shape_scale(mean, variance)?;
    Ok(lower_regularized(shape, x / scale))
}

/// `P(a, x)` extended to `x = 0` and `x = ∞`.
fn lower_regularized(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x == f64::INFINITY {
        1.0
    } else {
        gamma_lr(a, x)
    }
}

/// `Q(a, x)` extended to `x = 0` and `x = ∞`.
fn upper_regularized(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else if x == f64::INFINITY {
        0.0
    } else {
        gamma_ur(a, x)
    }
}

/// Quantile of the Gamma distribution with the given mean and variance
/// (shape = mean²/variance, scale = variance/mean).
pub fn gamma_quantile(p: f64, mean: f64, variance: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(invalid_param(format!(
            "probability must lie in (0, 1), got {p}"
        )));
    }
    let (shape, scale) = gamma_shape_scale(mean, variance)?;
    Ok(inverse_regularized_gamma(shape, p) * scale)
}

/// Solves `P(a, x) = p` for `x` (unit scale).
///
/// Halley iteration on `y = ln x`, which keeps small shapes (quantiles near
/// the bottom of the f64 range) well conditioned, inside a bracket that
/// falls back to bisection. The starting point comes from the
/// Wilson-Hilferty approximation for `a > 1` and the small-x expansion
/// otherwise. For `p > 0.5` the residual is taken on the upper tail to
/// avoid cancellation.
fn inverse_regularized_gamma(a: f64, p: f64) -> f64 {
    let upper_tail = p > 0.5;
    let q = 1.0 - p;
    let residual = |x: f64| -> f64 {
        if upper_tail {
            q - upper_regularized(a, x)
        } else {
            lower_regularized(a, x) - p
        }
    };
    let ln_gamma_a = ln_gamma(a);

    let mut y = if a > 1.0 {
        let pp = if p < 0.5 { p } else { q };
        let t = (-2.0 * pp.ln()).sqrt();
        let mut z = (2.30753 + t * 0.27061) / (1.0 + t * (0.99229 + t * 0.04481)) - t;
        if p < 0.5 {
            z = -z;
        }
        let c = 1.0 - 1.0 / (9.0 * a) - z / (3.0 * a.sqrt());
        (a * c * c * c).max(1e-3).ln()
    } else {
        let t = 1.0 - a * (0.253 + a * 0.12);
        if p < t {
            (p.ln() - t.ln()) / a
        } else {
            (1.0 - (1.0 - (p - t) / (1.0 - t)).ln()).ln()
        }
    };
    if !y.is_finite() {
        y = a.ln();
    }

    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for _ in 0..300 {
        let x = y.exp();
        let err = residual(x);
        if err == 0.0 {
            return x;
        }
        if err < 0.0 {
            lo = y;
        } else {
            hi = y;
        }
        // dP/dy = x f(x); d²P/dy² = x f(x) (a - x).
        let slope = (a * y - x - ln_gamma_a).exp();
        let mut next = if slope > 0.0 && slope.is_finite() {
            let u = err / slope;
            let halley = 1.0 - 0.5 * (u * (a - x)).min(1.0);
            y - u / halley
        } else {
            f64::NAN
        };
        if !(next > lo && next < hi) {
            next = match (lo.is_finite(), hi.is_finite()) {
                (true, true) => 0.5 * (lo + hi),
                (true, false) => lo + 1.0_f64.max(lo.abs()),
                (false, true) => hi - 1.0_f64.max(hi.abs()),
                (false, false) => unreachable!("one side is set every iteration"),
            };
        }
        if (next - y).abs() <= 1e-15 * (1.0 + y.abs()) || hi - lo <= 1e-15 * (1.0 + y.abs()) {
            return next.exp();
        }
        y = next;
    }
    y.exp()
}

/// Standard normal inverse CDF.
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(invalid_param(format!(
            "probability must lie in (0, 1), got {p}"
        )));
    }
    Ok(-std::f64::consts::SQRT_2 * erfc_inv(2.0 * p))
}

/// Order-statistic quantile with linear interpolation between the order
/// statistics at 1-based position `1 + p(n - 1)`.
pub fn empirical_quantile(values: &[f64], p: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(invalid_param("empirical quantile of an empty sample"));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid_param(format!(
            "probability must lie in [0, 1], got {p}"
        )));
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(invalid_param(
            "empirical quantile of a sample containing NaN",
        ));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(quantile_sorted(&sorted, p))
}

/// Same convention as [`empirical_quantile`] on an already sorted, non-empty
/// slice.
pub(crate) fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    let h = p * (n - 1) as f64;
    let lo = h.floor() as usize;
    if lo + 1 >= n {
        return sorted[n - 1];
    }
    let frac = h - lo as f64;
    sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;

    fn mean_var(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
        (m, v)
    }

    #[test]
    fn poisson_zero_rate() {
        let mut rng = RngStream::new(1);
        for _ in 0..100 {
            assert_eq!(sample_poisson(0.0, &mut rng).unwrap(), 0);
        }
    }

    #[test]
    fn poisson_rejects_bad_rates() {
        let mut rng = RngStream::new(1);
        assert!(sample_poisson(-1.0, &mut rng).is_err());
        assert!(sample_poisson(f64::NAN, &mut rng).is_err());
        assert!(sample_poisson(f64::INFINITY, &mut rng).is_err());
    }

    #[test]
    fn poisson_mean_at_rate_58() {
        let n = 1_000_000;
        let mut rng = RngStream::new(58);
        let xs: Vec<f64> = (0..n)
            .map(|_| sample_poisson(58.0, &mut rng).unwrap() as f64)
            .collect();
        let (m, _) = mean_var(&xs);
        assert!(
            (m - 58.0).abs() < 3.0 * (58.0 / n as f64).sqrt(),
            "mean {m}"
        );
    }

    #[test]
    fn poisson_equidispersion_at_rate_11() {
        let n = 1_000_000;
        let mut rng = RngStream::new(11);
        let xs: Vec<f64> = (0..n)
            .map(|_| sample_poisson(11.0, &mut rng).unwrap() as f64)
            .collect();
        let (m, v) = mean_var(&xs);
        let ratio = v / m;
        assert!((0.99..=1.01).contains(&ratio), "var/mean {ratio}");
    }

    #[test]
    fn binomial_degenerate_cases() {
        let mut rng = RngStream::new(2);
        for _ in 0..100 {
            assert_eq!(sample_binomial(7, 1.0, &mut rng).unwrap(), 7);
            assert_eq!(sample_binomial(0, 0.3, &mut rng).unwrap(), 0);
            assert_eq!(sample_binomial(9, 0.0, &mut rng).unwrap(), 0);
        }
        assert!(sample_binomial(3, 1.5, &mut rng).is_err());
        assert!(sample_binomial(3, -0.1, &mut rng).is_err());
        assert!(sample_binomial(3, f64::NAN, &mut rng).is_err());
    }

    #[test]
    fn binomial_mean() {
        let n = 1_000_000;
        let mut rng = RngStream::new(3);
        let xs: Vec<f64> = (0..n)
            .map(|_| sample_binomial(100, 0.25, &mut rng).unwrap() as f64)
            .collect();
        let (m, _) = mean_var(&xs);
        assert!(
            (m - 25.0).abs() < 3.0 * (18.75 / n as f64).sqrt(),
            "mean {m}"
        );
    }

    #[test]
    fn mv_hypergeometric_degenerate_cases() {
        let mut rng = RngStream::new(4);
        for _ in 0..100 {
            assert_eq!(
                sample_mv_hypergeometric(&[3, 2], 5, &mut rng).unwrap(),
                vec![3, 2]
            );
            assert_eq!(
                sample_mv_hypergeometric(&[4, 9], 0, &mut rng).unwrap(),
                vec![0, 0]
            );
        }
        assert!(sample_mv_hypergeometric(&[1, 1], 3, &mut rng).is_err());
        assert_eq!(
            sample_mv_hypergeometric(&[], 0, &mut rng).unwrap(),
            Vec::<u64>::new()
        );
    }

    #[test]
    fn mv_hypergeometric_first_component_mean() {
        // E[y_0] = n K / N = 5 * 6 / 10; var = n K/N (1-K/N) (N-n)/(N-1).
        let n = 1_000_000;
        let var = 5.0 * 0.6 * 0.4 * 5.0 / 9.0;
        let mut rng = RngStream::new(5);
        let mut sum = 0.0;
        for _ in 0..n {
            let y = sample_mv_hypergeometric(&[6, 4], 5, &mut rng).unwrap();
            assert_eq!(y.iter().sum::<u64>(), 5);
            assert!(y[0] <= 6 && y[1] <= 4);
            sum += y[0] as f64;
        }
        let m = sum / n as f64;
        assert!((m - 3.0).abs() < 3.0 * (var / n as f64).sqrt(), "mean {m}");
    }

    #[test]
    fn mv_hypergeometric_matches_exact_pmf() {
        // Four classes, enumerate the exact joint pmf and compare frequencies.
        fn choose(n: u64, k: u64) -> f64 {
            if k > n {
                return 0.0;
            }
            (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
        }
        let counts = [3u64, 0, 5, 2];
        let draw = 4u64;
        let total: u64 = counts.iter().sum();
        let trials = 400_000;
        let mut rng = RngStream::new(6);
        let mut freq = std::collections::BTreeMap::<Vec<u64>, u64>::new();
        for _ in 0..trials {
            let y = sample_mv_hypergeometric(&counts, draw, &mut rng).unwrap();
            for (yk, ck) in y.iter().zip(&counts) {
                assert!(yk <= ck);
            }
            *freq.entry(y).or_default() += 1;
        }
        let mut tv = 0.0;
        let mut mass = 0.0;
        for a in 0..=3 {
            for c in 0..=5 {
                for d in 0..=2 {
                    if a + c + d != draw {
                        continue;
                    }
                    let p = choose(3, a) * choose(5, c) * choose(2, d) / choose(total, draw);
                    mass += p;
                    let obs = *freq.get(&vec![a, 0, c, d]).unwrap_or(&0) as f64 / trials as f64;
                    tv += (p - obs).abs();
                }
            }
        }
        assert!((mass - 1.0).abs() < 1e-12);
        assert!(tv / 2.0 < 0.005, "tv {}", tv / 2.0);
    }

    #[test]
    fn samplers_are_deterministic() {
        let run = || {
            let mut rng = RngStream::with_path(77, vec![1, 2]);
            let mut out = Vec::new();
            for i in 0..50 {
                out.push(sample_poisson(i as f64 * 1.7, &mut rng).unwrap());
                out.push(sample_binomial(i * 3, 0.37, &mut rng).unwrap());
                out.extend(sample_mv_hypergeometric(&[i, 2 * i, 5], i, &mut rng).unwrap());
            }
            out
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn gamma_quantile_exponential_case() {
        let q = gamma_quantile(0.95, 1.0, 1.0).unwrap();
        assert!((q - 2.995732273553991).abs() < 1e-12, "{q}");
    }

    #[test]
    fn gamma_median_below_mean() {
        let q = gamma_quantile(0.5, 3.0, 3.0).unwrap();
        assert!(q > 2.0 && q < 3.0);
        assert!((q - 2.6740603137235603).abs() / 2.674 < 1e-10);
    }

    #[test]
    fn gamma_quantile_matches_high_precision_inversion() {
        // (p, mean, variance, quantile) from a 50-digit incomplete-gamma inversion.
        let cases = [
            (0.05, 11.0, 11.0, 6.1690072893953222),
            (0.95, 12.0, 12.0, 18.207514250903657),
            (0.05, 0.3, 0.02, 0.11083709476889383),
            (0.95, 0.3, 0.02, 0.56396592015401499),
            (0.5, 2.5, 10.0, 1.3534733714558491),
            (0.001, 1.0, 4.0, 2.6998791572461499e-12),
            (0.999, 1.0, 4.0, 17.505777031546749),
            (0.025, 58.3, 210.7, 33.410362586383505),
            (0.975, 60.1, 250.2, 94.83934957421763),
            (0.1, 5.0, 0.5, 4.1179067906178573),
            (0.9, 100.0, 3.0, 102.22603702513665),
            (0.3, 0.1, 0.2, 4.0757943774653263e-11),
            (0.05, 0.5, 1.0, 8.4371508405259821e-6),
            (0.2, 7.0, 49.0, 1.5620048591994683),
            (0.999999, 3.0, 1.0, 10.319037786042635),
        ];
        for (p, m, v, want) in cases {
            let got = gamma_quantile(p, m, v).unwrap();
            let rel = ((got - want) / want).abs();
            assert!(
                rel <= 1e-10,
                "p={p} mean={m} var={v}: got {got}, want {want}, rel {rel}"
            );
        }
    }

    #[test]
    fn gamma_quantile_cdf_round_trip() {
        for &m in &[0.2, 1.0, 3.7, 25.0, 400.0] {
            for &v in &[0.05, 1.0, 9.0, 200.0] {
                for i in 1..20 {
                    let p = i as f64 / 20.0;
                    let x = gamma_quantile(p, m, v).unwrap();
                    if x < 1e-300 {
                        // Shape 2e-4: the quantile lies below the f64 range.
                        assert!(gamma_cdf(1e-300, m, v).unwrap() >= p, "m={m} v={v} p={p}");
                        continue;
                    }
                    let back = gamma_cdf(x, m, v).unwrap();
                    assert!((back - p).abs() < 1e-8, "m={m} v={v} p={p}: {back}");
                }
            }
        }
    }

    #[test]
    fn gamma_quantile_is_monotone() {
        let mut prev = 0.0;
        for i in 1..200 {
            let q = gamma_quantile(i as f64 / 200.0, 4.2, 7.3).unwrap();
            assert!(q > prev);
            prev = q;
        }
    }

    #[test]
    fn gamma_quantile_rejects_bad_parameters() {
        assert!(gamma_quantile(0.5, 0.0, 1.0).is_err());
        assert!(gamma_quantile(0.5, 1.0, 0.0).is_err());
        assert!(gamma_quantile(0.5, -1.0, 1.0).is_err());
        assert!(gamma_quantile(0.0, 1.0, 1.0).is_err());
        assert!(gamma_quantile(1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn normal_quantile_values() {
        assert_eq!(normal_quantile(0.5).unwrap(), 0.0);
        let cases = [
            (0.95, 1.6448536269514727),
            (0.975, 1.9599639845400542),
            (0.995, 2.5758293035489008),
            (0.999999, 4.7534243088228989),
            (1e-10, -6.3613409024040562),
            (0.3, -0.52440051270804078),
        ];
        for (p, want) in cases {
            let got = normal_quantile(p).unwrap();
            assert!((got - want).abs() < 1e-9, "p={p}: {got} vs {want}");
        }
    }

    #[test]
    fn normal_quantile_antisymmetry() {
        for i in 1..1000 {
            let p = i as f64 / 1000.0;
            let a = normal_quantile(p).unwrap();
            let b = normal_quantile(1.0 - p).unwrap();
            assert!((a + b).abs() < 1e-9, "p={p}");
        }
    }

    #[test]
    fn normal_quantile_rejects_closed_endpoints() {
        assert!(normal_quantile(0.0).is_err());
        assert!(normal_quantile(1.0).is_err());
        assert!(normal_quantile(f64::NAN).is_err());
    }

    #[test]
    fn empirical_quantile_examples() {
        for p in [0.0, 0.3, 1.0] {
            assert_eq!(empirical_quantile(&[5.0], p).unwrap(), 5.0);
        }
        assert_eq!(
            empirical_quantile(&[1.0, 2.0, 3.0, 4.0, 5.0], 0.5).unwrap(),
            3.0
        );
        assert_eq!(empirical_quantile(&[1.0, 3.0], 0.25).unwrap(), 1.5);
        assert_eq!(empirical_quantile(&[4.0, 1.0, 3.0], 0.0).unwrap(), 1.0);
        assert_eq!(empirical_quantile(&[4.0, 1.0, 3.0], 1.0).unwrap(), 4.0);
        assert!(empirical_quantile(&[], 0.5).is_err());
        assert!(empirical_quantile(&[1.0], 1.5).is_err());
    }

    #[test]
    fn exponential_and_uniform() {
        let mut rng = RngStream::new(8);
        let n = 200_000;
        let mut s = 0.0;
        for _ in 0..n {
            let u = sample_uniform(1.0, 4.0, &mut rng).unwrap();
            assert!((1.0..4.0).contains(&u));
            s += sample_exponential(u, &mut rng).unwrap();
        }
        // E = E[U(1,4)] = 2.5; var = E[mu^2] + var(mu) = 7 + 0.75.
        let m = s / n as f64;
        assert!((m - 2.5).abs() < 3.0 * (7.75 / n as f64).sqrt(), "{m}");
        assert!(sample_exponential(0.0, &mut rng).is_err());
    }
}
