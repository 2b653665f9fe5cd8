use lapsum_core::arith::{binomial, int, ratio, BigRational};
use lapsum_core::exactcum::{
    cumulant_table, exact_moments, log_mgf, moments_to_cumulants, partition_function, GraphHistogram,
    DECOMPOSITION_TOLERANCE,
};
use lapsum_core::Budgets;
use proptest::prelude::*;

fn hist(n: usize) -> GraphHistogram {
    GraphHistogram::build(n, &Budgets::default()).unwrap()
}

/// Cumulants by the recursion κ_n = m_n - Σ_{j<n} C(n-1, j-1) κ_j m_{n-j}.
fn recursive_cumulants(m: &[BigRational]) -> Vec<BigRational> {
    let mut k: Vec<BigRational> = Vec::new();
    for n in 1..=m.len() {
        let mut v = m[n - 1].clone();
        for j in 1..n {
            let c = BigRational::from_integer(binomial(n as i64 - 1, j as i64 - 1).unwrap());
            v -= c * &k[j - 1] * &m[n - j - 1];
        }
        k.push(v);
    }
    k
}

proptest! {
    #[test]
    fn partition_transform_matches_recursion(raw in proptest::collection::vec((-50i64..50, 1i64..9), 1..8)) {
        let m: Vec<BigRational> = raw.into_iter().map(|(a, b)| ratio(a, b)).collect();
        prop_assert_eq!(moments_to_cumulants(&m, &Budgets::default()).unwrap(), recursive_cumulants(&m));
    }

    #[test]
    fn variance_is_nonnegative(n in 2usize..6, num in 0i64..=20) {
        let t = cumulant_table(&hist(n), &ratio(num, 20), 2, &Budgets::default()).unwrap();
        prop_assert!(t.cumulants[1] >= int(0));
        prop_assert_eq!(&t.cumulants[0], &t.moments[0]);
    }
}

#[test]
fn histograms_are_consistent() {
    for n in 1..=7 {
        hist(n).validate().unwrap();
    }
}

#[test]
fn normalization_is_exact() {
    for n in 2..=6 {
        let h = hist(n);
        for beta in [0.0, 0.2, 0.5, 1.0, 2.0, -0.3] {
            assert_eq!(partition_function(&h, beta, 0.0).unwrap().z_hat, 1.0, "n={n}, β={beta}");
        }
    }
}

#[test]
fn decomposition_identity_grid() {
    for n in 3..=6 {
        let h = hist(n);
        for beta in [0.2, 0.5, 1.0, 2.0] {
            for g in [-0.2, 0.0, 0.1] {
                let pf = partition_function(&h, beta, g).unwrap();
                assert!(pf.identity_rel_error <= DECOMPOSITION_TOLERANCE, "n={n} β={beta} g={g}: {}", pf.identity_rel_error);
            }
        }
    }
}

/// Central differences of the centered log-MGF at g = 0 (orders 1..3,
/// eighth-order accurate stencils) against the exact cumulants.
#[test]
fn finite_differences_of_the_log_mgf() {
    let step = 2e-3;
    for n in 3..=5 {
        let h = hist(n);
        for p in [ratio(3, 10), ratio(1, 2)] {
            let pf = lapsum_core::arith::to_f64(&p);
            let exact = cumulant_table(&h, &p, 3, &Budgets::default()).unwrap().cumulants;
            let mean = lapsum_core::arith::to_f64(&exact[0]);
            let f = |j: i32| {
                let g = j as f64 * step;
                log_mgf(&h, pf, g) - g * mean
            };
            let d1 = (4.0 / 5.0 * (f(1) - f(-1)) - 1.0 / 5.0 * (f(2) - f(-2)) + 4.0 / 105.0 * (f(3) - f(-3))
                - 1.0 / 280.0 * (f(4) - f(-4)))
                / step
                + mean;
            let d2 = (-205.0 / 72.0 * f(0) + 8.0 / 5.0 * (f(1) + f(-1)) - 1.0 / 5.0 * (f(2) + f(-2))
                + 8.0 / 315.0 * (f(3) + f(-3))
                - 1.0 / 560.0 * (f(4) + f(-4)))
                / (step * step);
            let d3 = (-61.0 / 30.0 * (f(1) - f(-1)) + 169.0 / 120.0 * (f(2) - f(-2)) - 3.0 / 10.0 * (f(3) - f(-3))
                + 7.0 / 240.0 * (f(4) - f(-4)))
                / (step * step * step);
            for (k, d) in [d1, d2, d3].into_iter().enumerate() {
                let e = lapsum_core::arith::to_f64(&exact[k]);
                assert!((d - e).abs() <= 1e-6 * e.abs(), "n={n} p={p} k={}: {d} vs {e}", k + 1);
            }
        }
    }
}

#[test]
fn moments_at_the_endpoints() {
    let h = hist(4);
    let at0 = exact_moments(&h, 3, &int(0)).unwrap();
    assert_eq!(at0, vec![int(1), int(0), int(0), int(0)]);
    let at1 = exact_moments(&h, 2, &int(1)).unwrap();
    // complete graph on 4 vertices: all degrees 3
    assert_eq!(at1, vec![int(1), int(36), int(1296)]);
    assert!(exact_moments(&h, 1, &ratio(3, 2)).is_err());
}
