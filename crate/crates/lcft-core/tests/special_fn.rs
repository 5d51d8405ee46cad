use std::f64::consts::{PI, SQRT_2};

use lcft_core::special_fn::{dedekind_eta, l_ratio, theta1, theta1_product, UpsilonEvaluator};
use lcft_core::Complex64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

// Reference values from a 30-digit quadrature of the defining integral.
#[test]
fn upsilon_matches_high_precision_integral() {
    let cases = [
        (1.0, c(0.4, 0.0), c(0.329_003_955_717_981_27, 0.0)),
        (
            1.0,
            c(0.8, 0.3),
            c(0.835_720_190_546_515_06, 0.304_929_383_849_989_89),
        ),
        (SQRT_2, c(0.7, 0.0), c(0.817_603_200_710_002_53, 0.0)),
        (
            1.3,
            c(1.0, 2.5),
            c(20.641_176_184_541_508, 0.630_675_891_897_972_39),
        ),
    ];
    for (g, z, want) in cases {
        let got = UpsilonEvaluator::new(g).unwrap().upsilon(z).unwrap();
        assert!(
            (got - want).norm() / want.norm() < 1e-12,
            "γ={g} z={z}: {got} vs {want}"
        );
    }
}

#[test]
fn upsilon_shift_relation_example() {
    let ev = UpsilonEvaluator::new(1.0).unwrap();
    let z = c(0.4, 0.0);
    let ratio = ev.upsilon(z + 0.5).unwrap() / ev.upsilon(z).unwrap();
    let want = l_ratio(z * 0.5).unwrap() * (0.5f64).powf(1.0 - 0.4);
    assert!((ratio - want).norm() / want.norm() < 1e-10);
}

#[test]
fn upsilon_zeros_and_derivative() {
    let ev = UpsilonEvaluator::new(1.2).unwrap();
    assert!(ev.upsilon(c(0.0, 0.0)).unwrap().norm() < 1e-300);
    assert!(ev.upsilon(c(-0.6, 0.0)).unwrap().norm() < 1e-10);
    let v = ev.upsilon_prime_zero().unwrap().re;
    for g in [1.2, SQRT_2, 0.8] {
        let ev = UpsilonEvaluator::new(g).unwrap();
        let v2 = ev.upsilon_prime_zero_checked().unwrap().re;
        let fd = ev.upsilon_prime_zero_fd(0.02).unwrap();
        assert!((v2 - fd).abs() / v2 < 1e-8, "γ={g}: {v2} {fd}");
    }
    assert!(v > 0.0);
}

#[test]
fn eta_theta_grid() {
    let taus = [
        c(0.0, 1.0),
        c(0.3, 0.8),
        c(-0.4, 1.5),
        c(0.5, 0.6),
        c(1.2, 2.0),
    ];
    let zs = [c(0.1, 0.0), c(0.37, 0.2)];
    for tau in taus {
        let e = dedekind_eta(tau).unwrap();
        let r = dedekind_eta(tau + 1.0).unwrap() / e;
        assert!((r - c(0.0, PI / 12.0).exp()).norm() < 1e-10);
        let r = dedekind_eta(-1.0 / tau).unwrap() / e;
        assert!((r - (tau / c(0.0, 1.0)).sqrt()).norm() < 1e-10);
        for z in zs {
            let a = theta1(z, tau).unwrap();
            let b = theta1_product(z, tau).unwrap();
            assert!((a - b).norm() / a.norm() < 1e-10, "{z} {tau}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn upsilon_conjugation_symmetry(x in 0.05f64..2.0, y in -3.0f64..3.0, g in 0.6f64..1.9) {
        let ev = UpsilonEvaluator::new(g).unwrap();
        let a = ev.upsilon(c(x, y)).unwrap();
        let b = ev.upsilon(c(x, -y)).unwrap();
        prop_assert!((a - b.conj()).norm() <= 1e-11 * a.norm().max(1e-300));
        let r = ev.upsilon(c(x, 0.0)).unwrap();
        prop_assert!(r.im.abs() <= 1e-14 * r.norm().max(1e-300));
    }

    #[test]
    fn upsilon_second_shift_relation(x in 0.1f64..1.5, y in -1.0f64..1.0, g in 0.8f64..1.8) {
        let ev = UpsilonEvaluator::new(g).unwrap();
        let z = c(x, y);
        let lhs = ev.upsilon(z + 2.0 / g).unwrap();
        let m = l_ratio(2.0 * z / g).unwrap() * ((4.0 * z / g - 1.0) * (g / 2.0).ln()).exp();
        let rhs = m * ev.upsilon(z).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-8 * lhs.norm().max(1e-12));
    }

    #[test]
    fn upsilon_reflection(x in 0.0f64..3.0, y in -2.0f64..2.0, g in 0.7f64..1.9) {
        let ev = UpsilonEvaluator::new(g).unwrap();
        let z = c(x, y);
        let a = ev.upsilon(z).unwrap();
        let b = ev.upsilon(ev.q() - z).unwrap();
        prop_assert!((a - b).norm() <= 1e-9 * a.norm().max(1e-12));
    }
}
