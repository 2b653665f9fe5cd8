//! Monte Carlo estimates of the cumulants of `X_n` in the sparse regime
//! `p = c̄/n`, normalized by `n c̄^{k+1}`.
//!
//! Each replicate samples one graph (streaming its edges into a degree
//! array) and records `X = Σ deg²`. Cumulants are estimated by k-statistics,
//! computed exactly from integer power sums, with jackknife standard errors.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;

use crate::arith::to_f64;
use crate::error::{invalid, Result};
use crate::graphs::{replicate_rng, sample_degrees, x_from_degrees};
use crate::weights::sparse_coefficient;

/// Minimum replicates for any estimate of order `k ≥ 2`.
pub const MIN_REPLICATES: usize = 30;

/// Highest cumulant order with a k-statistic.
pub const MAX_K: usize = 4;

#[derive(Clone, Debug, PartialEq)]
pub struct McEstimate {
    pub n: usize,
    pub cbar: f64,
    pub k: usize,
    pub replicates: usize,
    pub estimate: f64,
    pub std_error: f64,
    /// `estimate / (n c̄^{k+1})`; NaN when `c̄ = 0`.
    pub normalized: f64,
    /// `2^{k-1} d_k`.
    pub target: f64,
    pub seed: u64,
}

impl McEstimate {
    pub fn normalized_std_error(&self) -> f64 {
        self.std_error / self.scale()
    }

    fn scale(&self) -> f64 {
        self.n as f64 * self.cbar.powi(self.k as i32 + 1)
    }

    /// `|normalized - value|` in units of the normalized standard error.
    pub fn z_score(&self, value: f64) -> f64 {
        (self.normalized - value).abs() / self.normalized_std_error()
    }
}

/// `X` for `replicates` independent `G(n, p)` samples, replicate `r` drawn
/// from stream `r` of `seed`. The order of the result never depends on the
/// thread count.
pub fn sample_x_values(n: usize, p: f64, replicates: usize, seed: u64) -> Vec<u64> {
    (0..replicates as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = replicate_rng(seed, r);
            x_from_degrees(&sample_degrees(n, p, &mut rng))
        })
        .collect()
}

/// Power sums `S_0..S_4`.
fn power_sums(xs: &[u64]) -> [BigInt; 5] {
    let mut s: [BigInt; 5] = Default::default();
    for &x in xs {
        let x = BigInt::from(x);
        let mut xp = BigInt::from(1);
        for sj in s.iter_mut() {
            *sj += &xp;
            xp *= &x;
        }
    }
    s
}

/// The unbiased k-statistic `k_k` from power sums (`s[0]` is the sample size).
fn k_stat_from_sums(s: &[BigInt; 5], k: usize) -> BigRational {
    let n = &s[0];
    let (s1, s2, s3, s4) = (&s[1], &s[2], &s[3], &s[4]);
    let one = BigInt::from(1);
    let (num, den): (BigInt, BigInt) = match k {
        1 => (s1.clone(), n.clone()),
        2 => (n * s2 - s1 * s1, n * (n - &one)),
        3 => (
            n * n * s3 - 3 * n * s2 * s1 + 2 * s1 * s1 * s1,
            n * (n - 1) * (n - 2),
        ),
        4 => (
            (n * n * n + n * n) * s4 - 4 * (n * n + n) * s3 * s1 - 3 * (n * n - n) * s2 * s2 + 12 * n * s2 * s1 * s1
                - 6 * s1 * s1 * s1 * s1,
            n * (n - 1) * (n - 2) * (n - 3),
        ),
        _ => unreachable!("k-statistics are implemented through order 4"),
    };
    BigRational::new(num, den)
}

/// Exact k-statistics `k_1..k_{k_max}` of the sample.
pub fn k_statistics(xs: &[u64], k_max: usize) -> Result<Vec<BigRational>> {
    if !(1..=MAX_K).contains(&k_max) {
        return invalid(format!("k-statistics are available for orders 1..={MAX_K}"));
    }
    if xs.len() <= k_max {
        return invalid(format!("order {k_max} needs more than {k_max} samples"));
    }
    let s = power_sums(xs);
    Ok((1..=k_max).map(|k| k_stat_from_sums(&s, k)).collect())
}

/// Delete-one jackknife standard error of `k_k`, from exact leave-one-out values.
pub fn jackknife_std_error(xs: &[u64], k: usize) -> Result<f64> {
    if !(1..=MAX_K).contains(&k) || xs.len() <= k + 1 {
        return invalid(format!("jackknife of order {k} needs more than {} samples", k + 1));
    }
    let full = power_sums(xs);
    let loo: Vec<BigRational> = xs
        .iter()
        .map(|&x| {
            let x = BigInt::from(x);
            let mut s = full.clone();
            let mut xp = BigInt::from(1);
            for sj in s.iter_mut() {
                *sj -= &xp;
                xp *= &x;
            }
            k_stat_from_sums(&s, k)
        })
        .collect();
    let r = BigInt::from(xs.len());
    let mean = loo.iter().fold(BigRational::zero(), |a, v| a + v) / &r;
    let ss = loo.iter().fold(BigRational::zero(), |a, v| {
        let d = v - &mean;
        a + &d * &d
    });
    let var = ss * BigRational::new(r.clone() - 1, r);
    Ok(to_f64(&var).sqrt())
}

/// `E X_n = n(n-1)p + n(n-1)(n-2)p²`.
pub fn exact_mean(n: usize, p: f64) -> f64 {
    let n = n as f64;
    n * (n - 1.0) * p + n * (n - 1.0) * (n - 2.0) * p * p
}

fn validate(n: usize, cbar: f64, k_max: usize, replicates: usize) -> Result<()> {
    if n < 2 {
        return invalid("n must be at least 2");
    }
    if !(cbar >= 0.0 && cbar < n as f64) {
        return invalid(format!("need 0 <= cbar < n (cbar = {cbar}, n = {n})"));
    }
    if !(1..=MAX_K).contains(&k_max) {
        return invalid(format!("k_max must be in 1..={MAX_K}"));
    }
    if k_max >= 2 && replicates < MIN_REPLICATES {
        return invalid(format!("cumulants of order >= 2 need at least {MIN_REPLICATES} replicates (got {replicates})"));
    }
    if replicates < k_max + 2 {
        return invalid(format!("order {k_max} needs at least {} replicates", k_max + 2));
    }
    Ok(())
}

/// k-statistic estimates of `Cum_1..Cum_{k_max}` of `X_n` at `p = c̄/n`.
pub fn estimate_cumulants(n: usize, cbar: f64, k_max: usize, replicates: usize, seed: u64) -> Result<Vec<McEstimate>> {
    validate(n, cbar, k_max, replicates)?;
    let xs = sample_x_values(n, cbar / n as f64, replicates, seed);
    let stats = k_statistics(&xs, k_max)?;
    (1..=k_max)
        .map(|k| {
            let estimate = to_f64(&stats[k - 1]);
            let std_error = jackknife_std_error(&xs, k)?;
            let scale = n as f64 * cbar.powi(k as i32 + 1);
            let normalized = if cbar == 0.0 { f64::NAN } else { estimate / scale };
            let target = sparse_coefficient(k)?.to_f64().unwrap_or(f64::NAN);
            Ok(McEstimate {
                n,
                cbar,
                k,
                replicates,
                estimate,
                std_error,
                normalized,
                target,
                seed,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct TableCell {
    pub n: usize,
    pub cbar: f64,
    /// The estimate, or the reason this cell could not be computed.
    pub result: std::result::Result<McEstimate, String>,
}

/// Distances `|normalized - target|` along one axis of the grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Trend {
    /// `"n"` (fixed c̄, increasing n) or `"cbar"` (fixed n, increasing c̄).
    pub along: &'static str,
    pub fixed: f64,
    pub distances: Vec<f64>,
    pub monotone_toward_target: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceTable {
    pub k: usize,
    pub replicates: usize,
    pub seed: u64,
    pub cells: Vec<TableCell>,
    pub trends: Vec<Trend>,
}

fn trend(along: &'static str, fixed: f64, cells: &[&TableCell]) -> Option<Trend> {
    let distances: Vec<f64> = cells
        .iter()
        .filter_map(|c| c.result.as_ref().ok())
        .map(|e| (e.normalized - e.target).abs())
        .collect();
    (distances.len() >= 2).then(|| Trend {
        along,
        fixed,
        monotone_toward_target: distances.windows(2).all(|w| w[1] <= w[0]),
        distances,
    })
}

/// Normalized estimates of `Cum_k` over the grid `n_list × cbar_list`, all
/// cells seeded with `seed`. Cell failures are recorded, not raised.
pub fn convergence_table(k: usize, n_list: &[usize], cbar_list: &[f64], replicates: usize, seed: u64) -> Result<ConvergenceTable> {
    if n_list.is_empty() || cbar_list.is_empty() {
        return invalid("n and cbar lists must be non-empty");
    }
    if !(1..=MAX_K).contains(&k) {
        return invalid(format!("k must be in 1..={MAX_K}"));
    }
    let mut ns = n_list.to_vec();
    ns.sort_unstable();
    let mut cbars = cbar_list.to_vec();
    cbars.sort_by(f64::total_cmp);
    let mut cells = Vec::new();
    for &n in &ns {
        for &cbar in &cbars {
            let result = estimate_cumulants(n, cbar, k, replicates, seed)
                .map(|mut v| v.pop().expect("k estimates"))
                .map_err(|e| e.to_string());
            cells.push(TableCell { n, cbar, result });
        }
    }
    let mut trends = Vec::new();
    for &cbar in &cbars {
        let column: Vec<&TableCell> = cells.iter().filter(|c| c.cbar == cbar).collect();
        trends.extend(trend("n", cbar, &column));
    }
    for &n in &ns {
        let row: Vec<&TableCell> = cells.iter().filter(|c| c.n == n).collect();
        trends.extend(trend("cbar", n as f64, &row));
    }
    Ok(ConvergenceTable {
        k,
        replicates,
        seed,
        cells,
        trends,
    })
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn scaling_slope(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 2 {
        return invalid("a slope needs at least two points");
    }
    if points.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0)) {
        return invalid("log-log regression needs positive values");
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let m = logs.len() as f64;
    let (mx, my) = logs.iter().fold((0.0, 0.0), |(a, b), &(x, y)| (a + x / m, b + y / m));
    let (sxy, sxx) = logs
        .iter()
        .fold((0.0, 0.0), |(a, b), &(x, y)| (a + (x - mx) * (y - my), b + (x - mx) * (x - mx)));
    if sxx == 0.0 {
        return invalid("all x values coincide");
    }
    Ok(sxy / sxx)
}

/// Whether the estimate is consistent with `value` at `z` standard errors.
pub fn within(e: &McEstimate, value: f64, z: f64) -> bool {
    (e.normalized - value).abs() <= z * e.normalized_std_error()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::ratio;

    /// Central moments by brute force, then cumulants from them.
    fn naive_cumulants(xs: &[u64]) -> [f64; 4] {
        let n = xs.len() as f64;
        let mean = xs.iter().map(|&x| x as f64).sum::<f64>() / n;
        let mu = |j: i32| xs.iter().map(|&x| (x as f64 - mean).powi(j)).sum::<f64>() / n;
        [mean, mu(2), mu(3), mu(4) - 3.0 * mu(2) * mu(2)]
    }

    #[test]
    fn first_k_statistic_is_the_mean() {
        let xs = [3, 8, 1, 4, 4];
        assert_eq!(k_statistics(&xs, 1).unwrap()[0], ratio(20, 5));
    }

    #[test]
    fn unbiasedness_on_a_small_population() {
        // averaging k_2 over all samples of size 3 drawn with replacement from
        // {0, 1, 5} recovers the population variance exactly
        let pop = [0u64, 1, 5];
        let mut acc = BigRational::zero();
        for a in pop {
            for b in pop {
                for c in pop {
                    acc += &k_statistics(&[a, b, c], 2).unwrap()[1];
                }
            }
        }
        let var = ratio(14, 3);
        assert_eq!(acc / BigInt::from(27), var);
    }

    #[test]
    fn large_sample_agrees_with_naive_cumulants() {
        let xs: Vec<u64> = (0..4000u64).map(|i| (i * 7919 % 1013) + (i % 17) * (i % 17)).collect();
        let k = k_statistics(&xs, 4).unwrap();
        let naive = naive_cumulants(&xs);
        for j in 0..4 {
            let kj = to_f64(&k[j]);
            assert!((kj - naive[j]).abs() <= 2e-3 * naive[j].abs().max(1.0), "order {}", j + 1);
        }
    }

    #[test]
    fn zero_density() {
        let est = estimate_cumulants(1000, 0.0, 2, 30, 5).unwrap();
        for e in &est {
            assert_eq!(e.estimate, 0.0);
            assert_eq!(e.std_error, 0.0);
            assert!(e.normalized.is_nan());
        }
    }

    #[test]
    fn validation() {
        assert!(estimate_cumulants(100, 100.0, 1, 50, 1).is_err());
        assert!(estimate_cumulants(100, 10.0, 2, 29, 1).is_err());
        assert!(estimate_cumulants(100, 10.0, 5, 50, 1).is_err());
        assert!(convergence_table(2, &[], &[10.0], 30, 1).is_err());
        let t = convergence_table(2, &[50, 100], &[10.0, 200.0], 30, 1).unwrap();
        assert!(t.cells.iter().any(|c| c.result.is_err()));
    }

    #[test]
    fn mean_matches_exact_formula() {
        let (n, cbar) = (2000, 20.0);
        let e = &estimate_cumulants(n, cbar, 1, 400, 11).unwrap()[0];
        let mean = exact_mean(n, cbar / n as f64);
        assert!((e.estimate - mean).abs() < 3.0 * e.std_error, "{} vs {}", e.estimate, mean);
    }

    #[test]
    fn reproducible() {
        let a = estimate_cumulants(3000, 15.0, 3, 40, 9).unwrap();
        let b = estimate_cumulants(3000, 15.0, 3, 40, 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn slope_of_a_power_law() {
        let pts: Vec<(f64, f64)> = [2.0, 5.0, 11.0].iter().map(|&x: &f64| (x, 4.0 * x.powi(3))).collect();
        assert!((scaling_slope(&pts).unwrap() - 3.0).abs() < 1e-12);
        assert!(scaling_slope(&pts[..1]).is_err());
    }

    #[test]
    fn jackknife_of_the_mean_is_the_standard_error() {
        let xs = [2u64, 4, 4, 5, 9, 12];
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<u64>() as f64 / n;
        let s2 = xs.iter().map(|&x| (x as f64 - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let se = jackknife_std_error(&xs, 1).unwrap();
        assert!((se - (s2 / n).sqrt()).abs() < 1e-12);
    }
}
