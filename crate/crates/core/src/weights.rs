//! Semi-invariant weights of two-valent diagrams and the cumulant
//! coefficients they add up to.
//!
//! For a diagram `δ` on `k` vertices and a partition `π` of its vertices, the
//! mixed moment that `π` contributes factorizes over independent edge
//! variables: each grey off-spread gives a factor `p`, and a color group
//! gives `p` once for every block of `π` it touches (a Bernoulli variable
//! satisfies `E a^m = p` for all `m ≥ 1`). So
//!
//! `w(δ; p) = Σ_π (-1)^{σ-1} (σ-1)! p^{e(δ, π)}`, `e = grey + Σ_groups t_g`,
//!
//! and `C_k(p) = 2^{k-1} Σ_δ w(δ; p)` is the limit of `Cum_k(X_n) / n^{k+2}`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::arith::{factorial, set_partitions, IntPoly, PowerSeries, SetPartition};
use crate::counting::d_closed;
use crate::diagrams::{enumerate_diagrams, Diagram};
use crate::error::{invalid, Error, Result};
use crate::Budgets;

/// A polynomial in `p` attached to cumulant order `k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightPolynomial {
    pub k: usize,
    pub poly: IntPoly,
}

impl WeightPolynomial {
    /// Nonzero coefficients keyed by exponent.
    pub fn coeffs(&self) -> BTreeMap<usize, BigInt> {
        self.poly.terms().map(|(e, c)| (e, c.clone())).collect()
    }

    pub fn eval(&self, p: &BigRational) -> BigRational {
        self.poly.eval(p)
    }

    /// `{"k": 2, "coeffs": {"3": 8, "4": -8}}`; coefficients outside the
    /// `i64` range are written as decimal strings.
    pub fn to_json(&self) -> Value {
        let mut coeffs = Map::new();
        for (e, c) in self.poly.terms() {
            let v = match c.to_i64() {
                Some(i) => json!(i),
                None => json!(c.to_string()),
            };
            coeffs.insert(e.to_string(), v);
        }
        json!({ "k": self.k, "coeffs": coeffs })
    }
}

fn require_two_valent(d: &Diagram) -> Result<()> {
    if d.q() != 2 {
        return invalid(format!("weights are defined for q = 2 diagrams only (got q = {})", d.q()));
    }
    Ok(())
}

/// Per-group vertex bitmasks plus grey count: everything the exponent needs.
struct Skeleton {
    grey: usize,
    masks: Vec<u64>,
}

impl Skeleton {
    fn new(d: &Diagram) -> Self {
        Skeleton {
            grey: d.grey_count(),
            masks: d.group_vertex_masks(),
        }
    }

    /// `block_of[v]` is the block index of vertex `v`.
    fn exponent(&self, block_of: &[usize]) -> usize {
        let touched: usize = self
            .masks
            .iter()
            .map(|&m| {
                let mut blocks = 0u64;
                let mut rest = m;
                while rest != 0 {
                    blocks |= 1 << block_of[rest.trailing_zeros() as usize];
                    rest &= rest - 1;
                }
                blocks.count_ones() as usize
            })
            .sum();
        self.grey + touched
    }
}

/// `e(δ, π) = #grey + Σ_groups (blocks of π touched by the group)`.
pub fn partition_weight_exponent(d: &Diagram, pi: &SetPartition) -> Result<usize> {
    require_two_valent(d)?;
    if pi.ground_size() != d.k() {
        return invalid(format!(
            "partition of {} elements does not match a diagram on {} vertices",
            pi.ground_size(),
            d.k()
        ));
    }
    Ok(Skeleton::new(d).exponent(pi.labels()))
}

/// `(-1)^{σ-1} (σ-1)!` for `σ = 1..=k`.
fn mobius_signs(k: usize) -> Vec<i64> {
    (1..=k)
        .map(|s| {
            let f = factorial(s as u64 - 1).to_i64().expect("k is budgeted");
            if s % 2 == 1 {
                f
            } else {
                -f
            }
        })
        .collect()
}

fn check_weight_budget(k: usize, budgets: &Budgets) -> Result<()> {
    if k == 0 {
        return invalid("k must be at least 1");
    }
    if k > budgets.max_weight_k {
        return Err(Error::Budget {
            what: "weight order k",
            requested: k,
            limit: budgets.max_weight_k,
            flag: "max-k",
        });
    }
    Ok(())
}

/// Adds the weight of one diagram into `acc[e]` (exact for the budgeted `k`).
fn accumulate(sk: &Skeleton, partitions: &[SetPartition], signs: &[i64], acc: &mut [i64]) {
    for pi in partitions {
        acc[sk.exponent(pi.labels())] += signs[pi.block_count() - 1];
    }
}

fn poly_from_counts(counts: &[i64]) -> IntPoly {
    IntPoly::new(counts.iter().map(|&c| BigInt::from(c)).collect())
}

pub fn diagram_weight(d: &Diagram, budgets: &Budgets) -> Result<WeightPolynomial> {
    require_two_valent(d)?;
    d.validate()?;
    let k = d.k();
    check_weight_budget(k, budgets)?;
    let partitions = set_partitions(k, budgets.max_partition_k)?;
    let mut acc = vec![0i64; 2 * k + 1];
    accumulate(&Skeleton::new(d), &partitions, &mobius_signs(k), &mut acc);
    Ok(WeightPolynomial {
        k,
        poly: poly_from_counts(&acc),
    })
}

/// `C_k(p) = 2^{k-1} Σ_δ w(δ; p)` over all two-valent diagrams on `k` vertices.
pub fn cumulant_coefficient(k: usize, budgets: &Budgets) -> Result<WeightPolynomial> {
    check_weight_budget(k, budgets)?;
    let diagrams = enumerate_diagrams(k, 2, budgets)?;
    let partitions = set_partitions(k, budgets.max_partition_k)?;
    let signs = mobius_signs(k);
    let width = 2 * k + 1;
    let acc = diagrams
        .par_iter()
        .fold(
            || vec![0i64; width],
            |mut acc, d| {
                accumulate(&Skeleton::new(d), &partitions, &signs, &mut acc);
                acc
            },
        )
        .reduce(
            || vec![0i64; width],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    let poly = poly_from_counts(&acc).scale(&(BigInt::one() << (k - 1)));
    Ok(WeightPolynomial { k, poly })
}

/// `2^{k-1} d_k`, with `d_1 = 1`.
pub fn sparse_coefficient(k: usize) -> Result<BigInt> {
    match k {
        0 => invalid("k must be at least 1"),
        1 => Ok(BigInt::one()),
        _ => Ok(d_closed(k)? << (k - 1)),
    }
}

/// The partition-first regrouping of `C_k`: for each block-size shape `λ`
/// (decreasing), `W(λ; p) = 2^{k-1} Σ_δ Σ_{π of shape λ} (-1)^{σ-1}(σ-1)! p^{e(δ,π)}`.
/// The shapes sum to [`cumulant_coefficient`].
pub fn partition_shape_report(k: usize, budgets: &Budgets) -> Result<Vec<(Vec<usize>, IntPoly)>> {
    check_weight_budget(k, budgets)?;
    let diagrams = enumerate_diagrams(k, 2, budgets)?;
    let partitions = set_partitions(k, budgets.max_partition_k)?;
    let signs = mobius_signs(k);
    let skeletons: Vec<Skeleton> = diagrams.iter().map(Skeleton::new).collect();
    let mut by_shape: BTreeMap<Vec<usize>, Vec<i64>> = BTreeMap::new();
    for pi in &partitions {
        let acc = by_shape.entry(pi.shape()).or_insert_with(|| vec![0; 2 * k + 1]);
        let sign = signs[pi.block_count() - 1];
        for sk in &skeletons {
            acc[sk.exponent(pi.labels())] += sign;
        }
    }
    let scale = BigInt::one() << (k - 1);
    Ok(by_shape
        .into_iter()
        .rev()
        .map(|(shape, acc)| (shape, poly_from_counts(&acc).scale(&scale)))
        .collect())
}

/// `D(τ) = Σ_{k≥1} 2^{k-1} d_k τ^k / k!` through `τ^order`.
pub fn free_energy_series(order: usize) -> Result<PowerSeries> {
    if order == 0 {
        return invalid("order must be at least 1");
    }
    let mut coeffs = vec![BigRational::zero()];
    for k in 1..=order {
        coeffs.push(BigRational::new(sparse_coefficient(k)?, factorial(k as u64)));
    }
    Ok(PowerSeries::new(coeffs, order))
}

/// Relative size of the truncation tail tolerated by [`free_energy_sparse`].
pub const FREE_ENERGY_TOLERANCE: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq)]
pub struct FreeEnergyEstimate {
    pub g: f64,
    pub order: usize,
    /// `τ = g e^{2g}`.
    pub tau: f64,
    /// `(e^{2g}/2) Σ_{k≤order} D_k τ^k`.
    pub value: f64,
    /// Retained terms `(e^{2g}/2) D_k τ^k`, `k = 1..=order`.
    pub terms: Vec<f64>,
    /// `|term_order / term_{order-1}|` (0 when undefined).
    pub last_ratio: f64,
    /// Bound on the neglected tail: the term ratios increase towards
    /// `4e|τ|`, so the tail is at most `|term_order| ρ / (1 - ρ)` with `ρ = 4e|τ|`.
    pub residual: f64,
    /// Index (1-based) of the largest retained term.
    pub dominant_term: usize,
}

/// Guarded truncation of `(e^{2g}/2) D(g e^{2g})`. Refuses (convergence
/// error) when `4e|τ| ≥ 1`, where the series diverges, or when the tail
/// bound exceeds [`FREE_ENERGY_TOLERANCE`] of the value.
pub fn free_energy_sparse(g: f64, order: usize) -> Result<FreeEnergyEstimate> {
    if !g.is_finite() {
        return invalid("g must be finite");
    }
    let series = free_energy_series(order)?;
    let scale = (2.0 * g).exp() / 2.0;
    let tau = g * (2.0 * g).exp();
    let terms: Vec<f64> = (1..=order)
        .map(|k| scale * crate::arith::to_f64(series.coeff(k)) * tau.powi(k as i32))
        .collect();
    let value: f64 = terms.iter().sum();
    let last = terms[order - 1];
    let last_ratio = if order >= 2 && terms[order - 2] != 0.0 {
        (last / terms[order - 2]).abs()
    } else {
        0.0
    };
    let rho = 4.0 * std::f64::consts::E * tau.abs();
    let dominant_term = terms
        .iter()
        .enumerate()
        .fold((0, 0.0f64), |best, (i, t)| if t.abs() > best.1 { (i, t.abs()) } else { best })
        .0
        + 1;
    if rho >= 1.0 {
        return Err(Error::Convergence(format!(
            "g = {g}: |τ| = {:.6} is outside the radius of convergence 1/(4e) ≈ 0.0920",
            tau.abs()
        )));
    }
    let residual = last.abs() * rho / (1.0 - rho);
    if residual > FREE_ENERGY_TOLERANCE * value.abs() {
        return Err(Error::Convergence(format!(
            "g = {g}, order {order}: tail bound {residual:.3e} exceeds {FREE_ENERGY_TOLERANCE} of the value {value:.6e}; raise the order or lower |g|"
        )));
    }
    Ok(FreeEnergyEstimate {
        g,
        order,
        tau,
        value,
        terms,
        last_ratio,
        residual,
        dominant_term,
    })
}
