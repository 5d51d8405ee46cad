use lcft_core::dozz::{dozz_constant, Dozz};
use lcft_core::graph::AdmissibleGraph;
use lcft_core::{CftParams, Complex64, LcftError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm()
}

// Reference values from 30-digit quadrature of the Υ integral with shifts.
#[test]
fn matches_high_precision_oracle() {
    let p1 = CftParams::new(1.0, 1.0).unwrap();
    let v = dozz_constant([c(0.3, 0.0), c(0.5, 0.0), c(0.9, 0.0)], &p1).unwrap();
    assert!(rel(v, c(-24_904.551_948_889_489, 0.0)) < 1e-10, "{v}");
    let p2 = CftParams::new(2f64.sqrt(), 1.0).unwrap();
    let q = p2.q();
    let v = dozz_constant([c(q, 0.5), c(1.0, 0.0), c(q, -0.5)], &p2).unwrap();
    assert!(rel(v, c(0.465_419_755_999_100_38, 0.0)) < 1e-10, "{v}");
    assert!(v.im.abs() / v.norm() < 1e-10);
    let v = dozz_constant([c(1.1, 0.0), c(1.3, 0.0), c(1.6, 0.0)], &p2).unwrap();
    assert!(rel(v, c(-18.113_113_758_540_186, 0.0)) < 1e-10, "{v}");
}

#[test]
fn permutation_symmetry_and_mu_scaling() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let gamma = 2f64.sqrt();
    let d1 = Dozz::new(CftParams::new(gamma, 1.0).unwrap()).unwrap();
    let mu = 2.7;
    let dmu = Dozz::new(CftParams::new(gamma, mu).unwrap()).unwrap();
    for _ in 0..20 {
        let a = [
            c(rng.random_range(0.1..2.0), 0.0),
            c(rng.random_range(0.1..2.0), rng.random_range(-1.0..1.0)),
            c(rng.random_range(0.1..2.0), 0.0),
        ];
        let base = d1.constant(a).unwrap();
        for perm in [[1, 0, 2], [2, 1, 0], [0, 2, 1], [1, 2, 0]] {
            let v = d1.constant([a[perm[0]], a[perm[1]], a[perm[2]]]).unwrap();
            assert!(rel(v, base) < 1e-12);
        }
        let scaled = dmu.constant(a).unwrap();
        let want = base * (d1.mu_exponent(a) * mu.ln()).exp();
        assert!(rel(scaled, want) < 1e-12);
    }
}

#[test]
fn torus_density_is_real_and_positive() {
    let params = CftParams::new(2f64.sqrt(), 1.0).unwrap();
    let d = Dozz::new(params).unwrap();
    for alpha in [0.3, 1.2, 2.0] {
        for k in 1..=60 {
            let p = 0.2 * k as f64;
            let r = d.rho_torus_one_point(alpha, p).unwrap();
            assert!(r.re > 0.0, "α={alpha} p={p}: {r}");
            assert!(r.im.abs() <= 1e-10 * r.norm());
        }
    }
}

#[test]
fn densities_follow_printed_products() {
    let params = CftParams::new(1.2, 1.0).unwrap();
    let d = Dozz::new(params).unwrap();
    let q = params.q();
    let alphas = [0.9, 1.1, 1.3, 0.7];
    let p2 = 0.8;
    let want = d.constant([c(0.9, 0.0), c(1.1, 0.0), c(q, -p2)]).unwrap()
        * d.constant([c(0.7, 0.0), c(1.3, 0.0), c(q, p2)]).unwrap();
    assert!(rel(d.rho_sphere_chain(&alphas, &[p2]).unwrap(), want) < 1e-14);

    let ps = [0.4, 1.1, 1.9];
    let g = AdmissibleGraph::genus_two([c(0.1, 0.0); 3]);
    let want = d
        .constant([c(q, -ps[0]), c(q, -ps[1]), c(q, ps[1])])
        .unwrap()
        * d.constant([c(q, ps[0]), c(q, ps[2]), c(q, -ps[2])])
            .unwrap();
    assert!(rel(d.rho_graph(&g, &ps, &[1.0, 1.0]).unwrap(), want) < 1e-14);

    let t = AdmissibleGraph::torus_one_point(1.0, c(0.1, 0.0));
    let a = d.rho_graph(&t, &[0.6], &[1.0]).unwrap();
    assert!(rel(a, d.rho_torus_one_point(1.0, 0.6).unwrap()) < 1e-14);
    let one = d.rho_torus_chain(&[1.0], &[0.6]).unwrap();
    assert!(rel(one, d.rho_torus_one_point(1.0, 0.6).unwrap()) < 1e-14);
}

#[test]
fn near_pole_arguments_are_rejected() {
    let d = Dozz::new(CftParams::new(1.0, 1.0).unwrap()).unwrap();
    let q = d.params.q();
    // ᾱ/2 − Q = −γ/2 + 1e-8.
    let s = 2.0 * (q - 0.5 + 1e-8);
    let a = [c(s / 3.0, 0.0), c(s / 3.0, 0.0), c(s / 3.0, 0.0)];
    assert!(matches!(d.constant(a), Err(LcftError::NearPole { .. })));
}
