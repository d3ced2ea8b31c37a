use std::f64::consts::PI;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use proptest::prelude::*;
use toral_nodal_core::curve::{make_arclength, CurveSpec};
use toral_nodal_core::exceptions::{continued_fraction_approximants, legendre_eval, legendre_recurrence_exact};
use toral_nodal_core::lattice::{enumerate_circle, is_sum_of_two_squares};
use toral_nodal_core::nodal::{audit_partition, build_partition, count_sign_changes_in};
use toral_nodal_core::oscillatory::integrate_oscillatory;

fn brute_points(n: u64) -> Vec<(i64, i64)> {
    let r = (n as f64).sqrt() as i64 + 1;
    let mut v = Vec::new();
    for x in -r..=r {
        for y in -r..=r {
            if (x * x + y * y) as u64 == n {
                v.push((x, y));
            }
        }
    }
    v.sort();
    v
}

/// `r_2(n) = 4 Σ_{d | n, d odd} (-1)^{(d-1)/2}`.
fn r2(n: u64) -> usize {
    let s: i64 = (1..=n).filter(|&d| n.is_multiple_of(d) && d % 2 == 1).map(|d| if d % 4 == 1 { 1 } else { -1 }).sum();
    (4 * s) as usize
}

#[test]
fn circles_match_brute_force_and_divisor_formula() {
    for n in 1..=2000u64 {
        let c = enumerate_circle(n).unwrap();
        let mut got: Vec<(i64, i64)> = c.points().iter().map(|p| (p.x, p.y)).collect();
        got.sort();
        assert_eq!(got, brute_points(n), "n = {n}");
        assert_eq!(c.count(), r2(n), "n = {n}");
        assert_eq!(is_sum_of_two_squares(n), !got.is_empty());
    }
}

/// `J_0(k) = Σ (-1)^m (k/2)^{2m} / (m!)^2`.
fn bessel_j0(k: f64) -> f64 {
    let (mut term, mut sum) = (1.0f64, 1.0f64);
    for m in 1..80 {
        term *= -(k / 2.0) * (k / 2.0) / (m as f64 * m as f64);
        sum += term;
    }
    sum
}

#[test]
fn full_period_phase_gives_bessel() {
    for k in [1.0, 4.5, 10.0] {
        let i = integrate_oscillatory(f64::sin, |_| 1.0, 0.0, 2.0 * PI, k, 1e-12).unwrap();
        assert!((i.value.re - 2.0 * PI * bessel_j0(k)).abs() < 1e-8, "k = {k}");
        assert!(i.value.im.abs() < 1e-8);
    }
}

#[test]
fn arc_lengths() {
    let c = make_arclength(CurveSpec::circle_arc(2.5, 0.1, 0.5)).unwrap();
    assert!((c.length() - 1.0).abs() < 1e-10);
    let e = make_arclength(CurveSpec::EllipseArc { center: [0.0, 0.0], a: 1.0, b: 1.0, start: 0.0, end: 1.2 }).unwrap();
    assert!((e.length() - 1.2).abs() < 1e-10);
}

#[test]
fn sqrt_two_expansion() {
    let cf = continued_fraction_approximants(2f64.sqrt(), 10).unwrap();
    let pq: Vec<(i64, i64)> = cf.approximants.iter().map(|a| (a.p, a.q)).collect();
    assert_eq!(&pq[..6], &[(1, 1), (3, 2), (7, 5), (17, 12), (41, 29), (99, 70)]);
    for a in &cf.approximants {
        assert!(a.error < 1.0 / (a.q * a.q) as f64);
        // Pell: p^2 - 2 q^2 = ±1.
        assert_eq!((a.p * a.p - 2 * a.q * a.q).abs(), 1);
    }
}

#[test]
fn partition_sums_to_one() {
    for (len, lambda, c1) in [(1.0, 50.0, 2.0), (1.7, 300.0, 8.0), (0.4, 1000.0, 1.0)] {
        let p = build_partition(len, lambda, c1).unwrap();
        let a = audit_partition(&p, 4000);
        assert!(a.sum_error < 1e-10);
        assert!(a.max_overlap <= 2);
    }
}

proptest! {
    #[test]
    fn legendre_float_matches_exact(l in 0u32..60, num in -64i64..=64) {
        let x = BigRational::new(BigInt::from(num), BigInt::from(64));
        let exact = legendre_recurrence_exact(l, &x).to_f64().unwrap();
        let got = legendre_eval(l, num as f64 / 64.0).unwrap();
        prop_assert!((got - exact).abs() <= 1e-12 * exact.abs().max(1.0));
    }

    #[test]
    fn cosine_sign_changes(freq in 1.0f64..200.0, phase in 0.0f64..(2.0 * PI)) {
        // cos(freq t + phase) on [0, 1] vanishes where freq t + phase = π/2 + mπ.
        let first = ((phase - PI / 2.0) / PI).floor() as i64 + 1;
        let last = ((freq + phase - PI / 2.0) / PI).ceil() as i64 - 1;
        let expected = (last - first + 1).max(0) as usize;
        let r = count_sign_changes_in(|t| (freq * t + phase).cos(), 0.0, 1.0, freq, 1e-12).unwrap();
        prop_assert_eq!(r.count, expected);
        prop_assert!(r.stable);
    }
}
