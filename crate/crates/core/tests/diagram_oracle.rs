//! Brute-force diagram enumeration against the counting sequences.

use lapsum_core::arith::{int, BigRational};
use lapsum_core::counting::{d_sequence, q3_d_recurrence, q_d_sequence};
use lapsum_core::diagrams::{count_diagrams, enumerate_diagrams};
use lapsum_core::Budgets;

#[test]
fn two_valent_counts_match_recurrence() {
    let b = Budgets::default();
    let d = d_sequence(6).unwrap();
    for k in 1..=6 {
        let n = count_diagrams(k, 2, &b).unwrap();
        assert_eq!(&int(n as i64), d.get(k).unwrap(), "k = {k}");
    }
}

#[test]
fn three_valent_counts_match_both_routes() {
    let b = Budgets::default();
    let conv = q_d_sequence(3, 4).unwrap();
    let rec = q3_d_recurrence(4).unwrap();
    for k in 1..=4 {
        let n = BigRational::from_integer(count_diagrams(k, 3, &b).unwrap().into());
        assert_eq!(&n, conv.get(k).unwrap(), "k = {k}");
        assert_eq!(&n, rec.get(k).unwrap(), "k = {k}");
    }
    assert_eq!(count_diagrams(3, 3, &b).unwrap(), 189);
}

#[test]
fn four_valent_counts_match_convolution() {
    let b = Budgets::default();
    let conv = q_d_sequence(4, 3).unwrap();
    for k in 1..=3 {
        let n = count_diagrams(k, 4, &b).unwrap();
        assert_eq!(&int(n as i64), conv.get(k).unwrap(), "k = {k}");
    }
}

#[test]
fn enumeration_and_count_agree() {
    let b = Budgets::default();
    for (k, q) in [(4, 2), (5, 2), (3, 3), (2, 5)] {
        assert_eq!(enumerate_diagrams(k, q, &b).unwrap().len() as u64, count_diagrams(k, q, &b).unwrap());
    }
}
