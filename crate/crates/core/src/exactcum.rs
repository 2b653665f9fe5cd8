//! Exact moments, cumulants and partition functions by enumerating every
//! graph on `n ≤ 7` (optionally 8) vertices.
//!
//! Everything downstream of the `(|E|, X)` histogram is exact: the law of
//! `X` under `G(n, p)` is `Σ count · p^m (1-p)^{M-m}` with `M = n(n-1)/2`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::arith::{binomial, format_rational, ln_rational, set_partitions, to_f64, IntPoly};
use crate::error::{invalid, Error, Result};
use crate::Budgets;

/// Multiplicity of each `(edge count, X)` pair over all graphs on `n` vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphHistogram {
    n: usize,
    counts: BTreeMap<(usize, u64), u64>,
}

fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Masks are split into this many contiguous chunks for parallel counting.
const CHUNKS: u64 = 64;

impl GraphHistogram {
    /// Enumerates all `2^{n(n-1)/2}` edge subsets.
    pub fn build(n: usize, budgets: &Budgets) -> Result<Self> {
        if n > budgets.max_histogram_n {
            return Err(Error::Budget {
                what: "histogram vertex count n",
                requested: n,
                limit: budgets.max_histogram_n,
                flag: "max-n",
            });
        }
        if n > 11 {
            return invalid("graph enumeration beyond n = 11 does not fit a 64-bit mask");
        }
        let m_pairs = pair_count(n);
        // incident[v]: mask of the pairs containing v, in Graph::pairs order
        let mut incident = vec![0u64; n];
        let mut t = 0;
        for i in 0..n {
            for j in i + 1..n {
                incident[i] |= 1 << t;
                incident[j] |= 1 << t;
                t += 1;
            }
        }
        let x_max = n * n.saturating_sub(1) * n.saturating_sub(1);
        let width = x_max + 1;
        let total = 1u64 << m_pairs;
        let chunk = total.div_ceil(CHUNKS);
        let partials: Vec<Vec<u64>> = (0..CHUNKS)
            .into_par_iter()
            .map(|c| {
                let mut dense = vec![0u64; (m_pairs + 1) * width];
                let (lo, hi) = (c * chunk, ((c + 1) * chunk).min(total));
                for mask in lo..hi {
                    let x: u32 = incident
                        .iter()
                        .map(|&inc| {
                            let d = (mask & inc).count_ones();
                            d * d
                        })
                        .sum();
                    dense[mask.count_ones() as usize * width + x as usize] += 1;
                }
                dense
            })
            .collect();
        let mut counts = BTreeMap::new();
        for m in 0..=m_pairs {
            for x in 0..width {
                let c: u64 = partials.iter().map(|d| d[m * width + x]).sum();
                if c > 0 {
                    counts.insert((m, x as u64), c);
                }
            }
        }
        Ok(GraphHistogram { n, counts })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `M = n(n-1)/2`.
    pub fn pair_count(&self) -> usize {
        pair_count(self.n)
    }

    pub fn counts(&self) -> &BTreeMap<(usize, u64), u64> {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    /// Checks the total, the per-edge-count binomial rows, and parity of `X`.
    pub fn validate(&self) -> Result<()> {
        let m_pairs = self.pair_count();
        let fail = |m: String| Err(Error::Consistency(format!("histogram n={}: {m}", self.n)));
        if BigInt::from(self.total()) != BigInt::one() << m_pairs {
            return fail(format!("total {} is not 2^{m_pairs}", self.total()));
        }
        let mut rows = vec![0u64; m_pairs + 1];
        for (&(m, x), &c) in &self.counts {
            if m > m_pairs {
                return fail(format!("edge count {m} exceeds {m_pairs}"));
            }
            if x % 2 != 0 {
                return fail(format!("odd X value {x}"));
            }
            rows[m] += c;
        }
        for (m, &r) in rows.iter().enumerate() {
            if BigInt::from(r) != binomial(m_pairs as i64, m as i64)? {
                return fail(format!("{r} graphs with {m} edges, expected C({m_pairs},{m})"));
            }
        }
        Ok(())
    }

    /// Cache text: header `"n M total"`, then one `"m x count"` line per bin.
    pub fn to_cache_string(&self) -> String {
        let mut s = format!("{} {} {}\n", self.n, self.pair_count(), self.total());
        for (&(m, x), &c) in &self.counts {
            let _ = writeln!(s, "{m} {x} {c}");
        }
        s
    }

    /// Parses and validates a cache file.
    pub fn from_cache_string(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let parse3 = |line: &str| -> Result<(u64, u64, u64)> {
            let v: Vec<u64> = line
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad cache line {line:?}"))))
                .collect::<Result<_>>()?;
            match v[..] {
                [a, b, c] => Ok((a, b, c)),
                _ => Err(Error::Parse(format!("expected three integers, got {line:?}"))),
            }
        };
        let (n, m_pairs, total) = parse3(lines.next().ok_or_else(|| Error::Parse("empty cache".into()))?)?;
        let n = n as usize;
        if m_pairs as usize != pair_count(n) {
            return Err(Error::Parse(format!("header M = {m_pairs} does not match n = {n}")));
        }
        let mut counts = BTreeMap::new();
        for line in lines {
            let (m, x, c) = parse3(line)?;
            if counts.insert((m as usize, x), c).is_some() {
                return Err(Error::Parse(format!("duplicate bin ({m}, {x})")));
            }
        }
        let h = GraphHistogram { n, counts };
        if h.total() != total {
            return Err(Error::Parse(format!("header total {total} but bins sum to {}", h.total())));
        }
        h.validate()?;
        Ok(h)
    }
}

fn check_probability(p: &BigRational) -> Result<()> {
    if p.is_negative() || p > &BigRational::one() {
        return invalid(format!("p = {} is not a probability", format_rational(p)));
    }
    Ok(())
}

/// `p^m (1-p)^{M-m}` for `m = 0..=M`.
fn edge_weights(m_pairs: usize, p: &BigRational) -> Vec<BigRational> {
    let q = BigRational::one() - p;
    (0..=m_pairs)
        .map(|m| num_traits::pow(p.clone(), m) * num_traits::pow(q.clone(), m_pairs - m))
        .collect()
}

/// `E[X^k]` at edge probability `p`.
pub fn exact_moment(h: &GraphHistogram, k: u32, p: &BigRational) -> Result<BigRational> {
    Ok(exact_moments(h, k, p)?.pop().expect("k+1 moments"))
}

/// `[E X^0, E X^1, ..., E X^{k_max}]`.
pub fn exact_moments(h: &GraphHistogram, k_max: u32, p: &BigRational) -> Result<Vec<BigRational>> {
    check_probability(p)?;
    let w = edge_weights(h.pair_count(), p);
    let mut out = vec![BigRational::zero(); k_max as usize + 1];
    for (&(m, x), &c) in h.counts() {
        let base = &w[m] * BigInt::from(c);
        let mut xp = BigInt::one();
        for o in out.iter_mut() {
            *o += &base * &xp;
            xp *= x;
        }
    }
    Ok(out)
}

/// `E[X^k]` as an integer polynomial in `p`.
pub fn moment_polynomial(h: &GraphHistogram, k: u32) -> IntPoly {
    let m_pairs = h.pair_count();
    let q = IntPoly::one_minus_p();
    let mut by_m: Vec<BigInt> = vec![BigInt::zero(); m_pairs + 1];
    for (&(m, x), &c) in h.counts() {
        by_m[m] += BigInt::from(c) * num_traits::pow(BigInt::from(x), k as usize);
    }
    by_m.iter().enumerate().fold(IntPoly::zero(), |acc, (m, s)| {
        if s.is_zero() {
            acc
        } else {
            &acc + &(&IntPoly::monomial(s.clone(), m) * &q.pow(m_pairs - m))
        }
    })
}

/// Cumulants `κ_1..κ_k` from moments `m_1..m_k` (slice index `j` holds
/// `m_{j+1}`) by summing over set partitions:
/// `κ_k = Σ_π (-1)^{σ-1} (σ-1)! Π_{B ∈ π} m_{|B|}`.
pub fn moments_to_cumulants<T: crate::arith::ExactRing>(moments: &[T], budgets: &Budgets) -> Result<Vec<T>> {
    let mut out = Vec::with_capacity(moments.len());
    for k in 1..=moments.len() {
        // partitions grouped by shape; each shape's product is computed once
        let mut shapes: BTreeMap<Vec<usize>, i64> = BTreeMap::new();
        for pi in set_partitions(k, budgets.max_partition_k)? {
            *shapes.entry(pi.shape()).or_default() += 1;
        }
        let mut acc = T::zero();
        for (shape, count) in shapes {
            let sigma = shape.len() as i64;
            let sign_fact: i64 = (1..sigma).product::<i64>() * if sigma % 2 == 1 { 1 } else { -1 };
            let prod = shape.iter().skip(1).fold(moments[shape[0] - 1].clone(), |a, &b| a.mul(&moments[b - 1]));
            acc = acc.add(&prod.mul_int(sign_fact * count));
        }
        out.push(acc);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CumulantTable {
    pub n: usize,
    pub p: BigRational,
    pub k_max: usize,
    /// `m_1..m_{k_max}`.
    pub moments: Vec<BigRational>,
    /// `κ_1..κ_{k_max}`.
    pub cumulants: Vec<BigRational>,
}

pub fn cumulant_table(h: &GraphHistogram, p: &BigRational, k_max: usize, budgets: &Budgets) -> Result<CumulantTable> {
    if k_max == 0 {
        return invalid("k_max must be at least 1");
    }
    let mut moments = exact_moments(h, k_max as u32, p)?;
    moments.remove(0);
    let cumulants = moments_to_cumulants(&moments, budgets)?;
    Ok(CumulantTable {
        n: h.n(),
        p: p.clone(),
        k_max,
        moments,
        cumulants,
    })
}

/// `Cum_1..Cum_{k_max}` of `X_n` as integer polynomials in `p`.
pub fn cumulant_polynomials(h: &GraphHistogram, k_max: usize, budgets: &Budgets) -> Result<Vec<IntPoly>> {
    let moments: Vec<IntPoly> = (1..=k_max as u32).map(|k| moment_polynomial(h, k)).collect();
    moments_to_cumulants(&moments, budgets)
}

/// `log(1 + e^x)` without overflow.
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn logsumexp(v: &[f64]) -> f64 {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + v.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

#[derive(Clone, Debug, PartialEq)]
pub struct PartitionFunction {
    pub n: usize,
    pub beta: f64,
    pub g: f64,
    /// `ln Z_n(β, g)`, direct sum over graphs.
    pub ln_z: f64,
    /// `Z` itself (may overflow to infinity; `ln_z` is always finite).
    pub z: f64,
    /// `Ẑ = Z_n(β, g) / Z_n(β, 0)` from the direct sum.
    pub z_hat: f64,
    /// `((1 + e^{-2β'}) / (1 + e^{-2β}))^{M}`.
    pub prefactor: f64,
    /// `E_{β'} e^{g X}`.
    pub expectation: f64,
    /// `|prefactor · expectation - Ẑ| / Ẑ`.
    pub identity_rel_error: f64,
}

/// Tolerance of the `Ẑ = prefactor · E_{β'} e^{gX}` self-check.
pub const DECOMPOSITION_TOLERANCE: f64 = 1e-12;

/// Evaluates `Z = Σ exp(-β Tr Δ + g Tr Δ²)` by two independent routes.
///
/// The direct route is exact rational arithmetic in `t = e^{-2β}` and
/// `s = e^g` (each rounded once to f64): `Z = Σ count · t^m s^{x + 2m}` and
/// `Z(β, 0) = (1 + t)^M`, so `Ẑ(β, 0) = 1` exactly. The decomposition
/// route works in f64 log-space at `β' = β - g`.
pub fn partition_function(h: &GraphHistogram, beta: f64, g: f64) -> Result<PartitionFunction> {
    if !beta.is_finite() || !g.is_finite() {
        return invalid("beta and g must be finite");
    }
    let m_pairs = h.pair_count();
    let exact = |v: f64| BigRational::from_float(v).ok_or_else(|| Error::InvalidInput(format!("{v} is not representable")));
    let t = exact((-2.0 * beta).exp())?;
    let s = exact(g.exp())?;
    if t.is_zero() || s.is_zero() {
        return invalid("exp(-2β) or exp(g) underflows; choose smaller |β|, |g|");
    }
    let mut z = BigRational::zero();
    for (&(m, x), &c) in h.counts() {
        z += num_traits::pow(t.clone(), m) * num_traits::pow(s.clone(), x as usize + 2 * m) * BigInt::from(c);
    }
    let z0 = num_traits::pow(BigRational::one() + &t, m_pairs);
    let z_hat_exact = &z / &z0;
    let z_hat = to_f64(&z_hat_exact);
    let ln_z = ln_rational(&z);

    let beta_p = beta - g;
    let ln_prefactor = m_pairs as f64 * (softplus(-2.0 * beta_p) - softplus(-2.0 * beta));
    // ln p and ln(1-p) from β' directly, stable at both tails
    let ln_p = -softplus(2.0 * beta_p);
    let ln_q = -softplus(-2.0 * beta_p);
    let terms: Vec<f64> = h
        .counts()
        .iter()
        .map(|(&(m, x), &c)| (c as f64).ln() + m as f64 * ln_p + (m_pairs - m) as f64 * ln_q + g * x as f64)
        .collect();
    let ln_expectation = logsumexp(&terms);
    let decomposed = (ln_prefactor + ln_expectation).exp();
    Ok(PartitionFunction {
        n: h.n(),
        beta,
        g,
        ln_z,
        z: ln_z.exp(),
        z_hat,
        prefactor: ln_prefactor.exp(),
        expectation: ln_expectation.exp(),
        identity_rel_error: ((decomposed - z_hat) / z_hat).abs(),
    })
}

impl PartitionFunction {
    /// Consistency error when the two routes disagree beyond `tol`.
    pub fn verify(&self, tol: f64) -> Result<()> {
        if self.identity_rel_error.is_nan() || self.identity_rel_error > tol {
            return Err(Error::Consistency(format!(
                "n={}, β={}, g={}: decomposition differs from direct sum by {:.3e} relative",
                self.n, self.beta, self.g, self.identity_rel_error
            )));
        }
        Ok(())
    }
}

/// `ln E_p e^{g X}` in f64 log-space.
pub fn log_mgf(h: &GraphHistogram, p: f64, g: f64) -> f64 {
    let m_pairs = h.pair_count();
    let terms: Vec<f64> = h
        .counts()
        .iter()
        .filter_map(|(&(m, x), &c)| {
            let w = match (m, m_pairs - m) {
                (0, 0) => 0.0,
                (0, r) => r as f64 * (-p).ln_1p(),
                (m, 0) => m as f64 * p.ln(),
                (m, r) => m as f64 * p.ln() + r as f64 * (-p).ln_1p(),
            };
            w.is_finite().then(|| (c as f64).ln() + w + g * x as f64)
        })
        .collect();
    logsumexp(&terms)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Extrapolation {
    pub k: usize,
    pub p: BigRational,
    pub ns: Vec<usize>,
    /// `Cum_k(X_n) / n^{k+2}` for each `n`.
    pub ratios: Vec<f64>,
    /// First-order Richardson values `(n_i f_i - n_{i-1} f_{i-1}) / (n_i - n_{i-1})`.
    pub richardson: Vec<f64>,
    /// Last Richardson value.
    pub estimate: f64,
    /// `|R_last - R_prev|`.
    pub residual: f64,
    /// Whether the Richardson values move monotonically.
    pub monotone: bool,
}

/// Trend of `Cum_k(X_n) / n^{k+2}` over the given histograms (increasing
/// `n`), with first-order `1/n` elimination.
pub fn extrapolate_histograms(k: usize, p: &BigRational, hists: &[GraphHistogram], budgets: &Budgets) -> Result<Extrapolation> {
    if hists.len() < 3 {
        return invalid("extrapolation needs at least three values of n");
    }
    if !(1..=4).contains(&k) {
        return invalid("extrapolation is supported for 1 <= k <= 4");
    }
    let ns: Vec<usize> = hists.iter().map(GraphHistogram::n).collect();
    if ns.windows(2).any(|w| w[0] >= w[1]) || ns[0] == 0 {
        return invalid("n values must be positive and strictly increasing");
    }
    let mut ratios = Vec::with_capacity(ns.len());
    for h in hists {
        let cum = cumulant_table(h, p, k, budgets)?.cumulants.pop().expect("k cumulants");
        let scale = num_traits::pow(BigInt::from(h.n()), k + 2);
        ratios.push(to_f64(&(cum / BigRational::from_integer(scale))));
    }
    let richardson: Vec<f64> = (1..ns.len())
        .map(|i| {
            let (a, b) = (ns[i - 1] as f64, ns[i] as f64);
            (b * ratios[i] - a * ratios[i - 1]) / (b - a)
        })
        .collect();
    let estimate = *richardson.last().expect("at least two");
    let residual = (estimate - richardson[richardson.len() - 2]).abs();
    let monotone = richardson.windows(2).all(|w| w[1] >= w[0]) || richardson.windows(2).all(|w| w[1] <= w[0]);
    Ok(Extrapolation {
        k,
        p: p.clone(),
        ns,
        ratios,
        richardson,
        estimate,
        residual,
        monotone,
    })
}

/// Builds histograms for `n_list` and extrapolates.
pub fn coefficient_extrapolate(k: usize, p: &BigRational, n_list: &[usize], budgets: &Budgets) -> Result<Extrapolation> {
    if n_list.len() < 3 {
        return invalid("extrapolation needs at least three values of n");
    }
    let hists = n_list
        .iter()
        .map(|&n| GraphHistogram::build(n, budgets))
        .collect::<Result<Vec<_>>>()?;
    extrapolate_histograms(k, p, &hists, budgets)
}

/// Exact `lim Cum_k(X_n)/n^{k+2}` as a polynomial in `p`.
///
/// `Cum_k(X_n)` is a polynomial in `n` of degree `k + 2` (a sum over
/// `k + 2`-or-fewer distinct labels), vanishing at `n = 0`. Its leading
/// coefficient is the `(k+2)`-th divided difference over `n = 0..=k+2`;
/// any further histograms must give vanishing higher differences.
pub fn exact_leading_coefficient(k: usize, hists: &[GraphHistogram], budgets: &Budgets) -> Result<IntPoly> {
    if k == 0 {
        return invalid("k must be at least 1");
    }
    let mut points: Vec<(usize, Vec<BigRational>)> = vec![(0, Vec::new())];
    for h in hists {
        if h.n() == 0 {
            continue;
        }
        let c = cumulant_polynomials(h, k, budgets)?.pop().expect("k cumulants");
        points.push((h.n(), c.coefficients().iter().cloned().map(BigRational::from_integer).collect()));
    }
    points.sort_by_key(|(n, _)| *n);
    if points.len() < k + 3 || points.iter().enumerate().any(|(i, (n, _))| *n != i) {
        return invalid(format!("need histograms for every n = 1..={} (have {} points)", k + 2, points.len()));
    }
    let width = points.iter().map(|(_, c)| c.len()).max().unwrap_or(0);
    // forward differences on consecutive integers: Δ^j f(0) / j! is the divided difference
    let mut diffs: Vec<Vec<BigRational>> = points
        .iter()
        .map(|(_, c)| {
            let mut c = c.clone();
            c.resize(width, BigRational::zero());
            c
        })
        .collect();
    let mut orders = Vec::new();
    while !diffs.is_empty() {
        orders.push(diffs[0].clone());
        diffs = diffs
            .windows(2)
            .map(|w| w[1].iter().zip(&w[0]).map(|(a, b)| a - b).collect())
            .collect();
    }
    for (j, d) in orders.iter().enumerate().skip(k + 3) {
        if d.iter().any(|c| !c.is_zero()) {
            return Err(Error::Consistency(format!("Cum_{k}(X_n) is not of degree {} in n (difference {j} ≠ 0)", k + 2)));
        }
    }
    let fact = crate::arith::factorial(k as u64 + 2);
    let coeffs = orders[k + 2]
        .iter()
        .map(|c| {
            let v = c / BigRational::from_integer(fact.clone());
            if v.is_integer() {
                Ok(v.to_integer())
            } else {
                Err(Error::Consistency(format!("non-integral leading coefficient {}", format_rational(&v))))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(IntPoly::new(coeffs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{int, ratio};

    fn b() -> Budgets {
        Budgets::default()
    }

    fn hist(n: usize) -> GraphHistogram {
        GraphHistogram::build(n, &b()).unwrap()
    }

    #[test]
    fn small_histograms() {
        let h3: Vec<_> = hist(3).counts().iter().map(|(&k, &v)| (k, v)).collect();
        assert_eq!(h3, vec![((0, 0), 1), ((1, 2), 3), ((2, 6), 3), ((3, 12), 1)]);
        let h2: Vec<_> = hist(2).counts().iter().map(|(&k, &v)| (k, v)).collect();
        assert_eq!(h2, vec![((0, 0), 1), ((1, 2), 1)]);
        let h5 = hist(5);
        assert_eq!(h5.total(), 1024);
        h5.validate().unwrap();
        assert!(matches!(GraphHistogram::build(8, &b()), Err(Error::Budget { flag: "max-n", .. })));
    }

    #[test]
    fn hand_moments() {
        let h = hist(3);
        let half = ratio(1, 2);
        assert_eq!(exact_moment(&h, 0, &half).unwrap(), int(1));
        assert_eq!(exact_moment(&h, 1, &half).unwrap(), ratio(9, 2));
        assert_eq!(exact_moment(&h, 2, &half).unwrap(), int(33));
        let t = cumulant_table(&h, &half, 2, &b()).unwrap();
        assert_eq!(t.cumulants, vec![ratio(9, 2), ratio(51, 4)]);
    }

    #[test]
    fn cumulants_of_constant_vanish() {
        let c = int(5);
        let moments: Vec<_> = (1..=6).map(|k| num_traits::pow(c.clone(), k)).collect();
        let cum = moments_to_cumulants(&moments, &b()).unwrap();
        assert_eq!(cum[0], c);
        assert!(cum[1..].iter().all(Zero::is_zero));
    }

    #[test]
    fn cache_round_trip() {
        let h = hist(4);
        let text = h.to_cache_string();
        assert!(text.starts_with("4 6 64\n"));
        assert_eq!(GraphHistogram::from_cache_string(&text).unwrap(), h);
        let corrupted = text.replacen("\n0 0 1\n", "\n0 0 2\n", 1);
        assert!(GraphHistogram::from_cache_string(&corrupted).is_err());
    }

    #[test]
    fn partition_function_examples() {
        let h = hist(3);
        let pf = partition_function(&h, 0.0, 0.0).unwrap();
        assert!((pf.z - 8.0).abs() < 1e-12);
        assert_eq!(pf.z_hat, 1.0);
        let pf = partition_function(&hist(4), 1.0, 0.1).unwrap();
        pf.verify(DECOMPOSITION_TOLERANCE).unwrap();
    }

    #[test]
    fn extrapolation_needs_three_points() {
        assert!(coefficient_extrapolate(1, &ratio(1, 2), &[4, 5], &b()).is_err());
        let zero = coefficient_extrapolate(1, &int(0), &[3, 4, 5], &b()).unwrap();
        assert!(zero.ratios.iter().all(|&r| r == 0.0));
    }
}
