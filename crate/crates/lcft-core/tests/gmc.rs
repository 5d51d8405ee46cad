use lcft_core::gmc::{
    c_integral, det_prime_closed, gmc_mass, singular_cell_integral, torus_det_prefactor,
    zeta_prime_zero, GffSampler, McConfig, ShiftKernel, TorusGeometry, TorusGreen, TorusOracle,
};
use lcft_core::special_fn::{dedekind_eta, theta1};
use lcft_core::{CftParams, Complex64, LcftError};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn params(mu: f64) -> CftParams {
    CftParams::new(2f64.sqrt(), mu).unwrap()
}

#[test]
fn green_matches_theta_form() {
    let tau = c(0.3, 1.2);
    let g = TorusGreen::new(tau).unwrap();
    assert!(
        (g.c0 - g.c0_quadrature).abs() < 1e-5,
        "{} {}",
        g.c0,
        g.c0_quadrature
    );
    for z in [c(0.7, 0.2), c(-2.0, 3.1), c(1.5, -4.0), c(0.01, 0.02)] {
        let th = theta1(z / (2.0 * PI), tau).unwrap();
        let want = -th.norm().ln() + z.im * z.im / (4.0 * PI * tau.im) + g.c0;
        assert!((g.eval(z).unwrap() - want).abs() < 1e-11, "{z}");
        assert!((g.eval(z).unwrap() - g.eval(-z).unwrap()).abs() < 1e-12);
        // Periodic under both lattice translations.
        let shifted = z + 2.0 * PI + 2.0 * PI * tau;
        assert!((g.eval(z).unwrap() - g.eval(shifted).unwrap()).abs() < 1e-10);
    }
    assert!(matches!(
        g.eval(c(2.0 * PI, 0.0)),
        Err(LcftError::SingularPoint(_))
    ));
}

#[test]
fn regular_part_and_w() {
    let tau = c(0.0, 1.0);
    let g = TorusGreen::new(tau).unwrap();
    let w = g.w_closed();
    assert!((w + 2.0 * dedekind_eta(tau).unwrap().norm().ln()).abs() < 1e-6);
    assert!((g.regular_part(c(0.0, 0.0)) - w).abs() < 1e-12);
    let z = c(0.3, -0.2);
    assert!((g.regular_part(z) - g.eval(z).unwrap() - z.norm().ln()).abs() < 1e-12);
    let fit = g.w_fit(2.0 * PI / 128.0).unwrap();
    assert!((fit - w).abs() < 1e-6, "{fit} {w}");
}

#[test]
fn green_is_harmonic_off_the_origin_with_zero_mean() {
    let tau = c(0.2, 0.9);
    let g = TorusGreen::new(tau).unwrap();
    let v = 4.0 * PI * PI * tau.im;
    let h = 1e-3;
    for z in [c(1.0, 1.5), c(-2.5, 0.7)] {
        let lap = (g.eval(z + h).unwrap()
            + g.eval(z - h).unwrap()
            + g.eval(z + c(0.0, h)).unwrap()
            + g.eval(z - c(0.0, h)).unwrap()
            - 4.0 * g.eval(z).unwrap())
            / (h * h);
        // −ΔG = 2π(δ − 1/v) away from the origin.
        assert!((lap - 2.0 * PI / v).abs() < 1e-4, "{lap}");
    }
    // Midpoint error on the log singularity shrinks roughly fourfold per doubling.
    let coarse = TorusGreen::with_quadrature(tau, 128).unwrap();
    let e_coarse = (coarse.c0_quadrature - g.c0).abs();
    let e_fine = (g.c0_quadrature - g.c0).abs();
    assert!(
        e_fine < e_coarse / 3.0 && e_fine < 1e-5,
        "{e_coarse} {e_fine}"
    );
}

#[test]
fn determinant_closed_form() {
    for tau in [c(0.0, 1.0), c(0.3, 1.2), c(-0.45, 0.95)] {
        let closed = det_prime_closed(tau).unwrap();
        let zeta = (-zeta_prime_zero(tau, 1.0, 24).unwrap()).exp();
        assert!(
            (closed / zeta - 1.0).abs() < 1e-10,
            "{tau}: {closed} {zeta}"
        );
        let p = torus_det_prefactor(tau).unwrap();
        let eta = dedekind_eta(tau).unwrap().norm();
        assert!((p - 1.0 / (tau.im.sqrt() * eta * eta)).abs() < 1e-12 * p);
    }
    // Scaling the metric by λ² multiplies det′ by λ^{−2ζ(0)} = λ².
    let tau = c(0.1, 1.1);
    let lam: f64 = 1.7;
    let a = zeta_prime_zero(tau, 1.0, 24).unwrap();
    let b = zeta_prime_zero(tau, lam, 40).unwrap();
    assert!(
        ((a - b).exp() / lam.powi(2) - 1.0).abs() < 1e-9,
        "{}",
        (a - b).exp()
    );
    let shifted = det_prime_closed(tau + 1.0).unwrap();
    assert!((shifted - det_prime_closed(tau).unwrap()).abs() < 1e-12);
}

#[test]
fn field_statistics() {
    let geom = TorusGeometry::new(c(0.25, 1.1), 16).unwrap();
    let sampler = GffSampler::new(geom);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 16;
    let pairs = 5_000;
    let probes = [(0, 0), (3, 0), (0, 5), (7, 9)];
    let mut sums = vec![0.0; probes.len()];
    let mut prods = vec![Vec::with_capacity(2 * pairs); probes.len()];
    let mut masses = Vec::new();
    for _ in 0..pairs {
        let (x, y) = sampler.sample_pair(&mut rng);
        for f in [x, y] {
            assert!(f.spatial_mean().abs() < 1e-12);
            for (k, &(i, j)) in probes.iter().enumerate() {
                sums[k] += f.at(i, j);
                prods[k].push(f.at(0, 0) * f.at(i, j));
            }
            masses.push(gmc_mass(&f, &geom, 2f64.sqrt()));
        }
    }
    let m = (2 * pairs) as f64;
    let var = geom.truncated_variance();
    for (k, &(i, j)) in probes.iter().enumerate() {
        assert!((sums[k] / m).abs() < 4.0 * (var / m).sqrt());
        let mean = prods[k].iter().sum::<f64>() / m;
        let sd = (prods[k].iter().map(|p| (p - mean).powi(2)).sum::<f64>() / (m - 1.0)).sqrt();
        let want = geom.truncated_green(i as f64 / n as f64, j as f64 / n as f64);
        assert!(
            (mean - want).abs() < 4.0 * sd / m.sqrt(),
            "{i},{j}: {mean} {want}"
        );
    }
    let v = geom.area();
    let mm = masses.iter().sum::<f64>() / m;
    let sd = (masses.iter().map(|x| (x - mm).powi(2)).sum::<f64>() / (m - 1.0)).sqrt();
    assert!((mm - v).abs() < 4.0 * sd / m.sqrt(), "{mm} {v}");
    assert!(masses.iter().all(|&x| x > 0.0));
}

#[test]
fn mass_tends_to_area_as_gamma_vanishes() {
    let geom = TorusGeometry::new(c(0.0, 1.0), 32).unwrap();
    let sampler = GffSampler::new(geom);
    let (f, _) = sampler.sample_pair(&mut ChaCha8Rng::seed_from_u64(4));
    let v = geom.area();
    let small = gmc_mass(&f, &geom, 1e-4);
    assert!((small / v - 1.0).abs() < 1e-7);
}

#[test]
fn c_integral_identity() {
    for g in [0.5, 1.0, 2f64.sqrt()] {
        assert!((c_integral(g, g, 1.0).unwrap() - 1.0 / g).abs() < 1e-14);
    }
    assert!(c_integral(0.0, 1.0, 1.0).is_err());
}

#[test]
fn singular_cell_quadrature_matches_fine_midpoint() {
    let tau = c(0.1, 1.0);
    let g = TorusGreen::new(tau).unwrap();
    let geom = TorusGeometry::new(tau, 32).unwrap();
    let s = 0.8;
    let polar = singular_cell_integral(&g, &geom, s).unwrap();
    // Midpoint sums on sub-grids; their error is ∝ h^{2−s}, so one Richardson step removes it.
    let midpoint = |sub: usize| {
        let h = 1.0 / (32 * sub) as f64;
        let mut acc = 0.0;
        for a in 0..sub {
            for b in 0..sub {
                let (u, w) = (
                    (a as f64 + 0.5) * h - 0.5 / 32.0,
                    (b as f64 + 0.5) * h - 0.5 / 32.0,
                );
                acc += (s * g.eval(geom.point_st(u, w)).unwrap()).exp();
            }
        }
        acc * geom.cell_area() / (sub * sub) as f64
    };
    let (m1, m2) = (midpoint(64), midpoint(128));
    let r = 2f64.powf(2.0 - s);
    let mid = (r * m2 - m1) / (r - 1.0);
    assert!(
        (polar - mid).abs() < 2e-4 * polar,
        "{polar} {mid} ({m1}, {m2})"
    );
    assert!(matches!(
        singular_cell_integral(&g, &geom, 2.0),
        Err(LcftError::Guard(_))
    ));
}

#[test]
fn estimator_scaling_and_reproducibility() {
    let tau = c(0.0, 1.0);
    let oracle = TorusOracle::new(tau, 16).unwrap();
    let cfg = McConfig {
        seed: 9,
        samples: 800,
        batches: 20,
        grid: 16,
        shift: ShiftKernel::Exact,
    };
    let a = oracle.one_point(&[0.8, 1.2], &params(1.0), &cfg).unwrap();
    let mu: f64 = 3.0;
    let b = oracle.one_point(&[0.8, 1.2], &params(mu), &cfg).unwrap();
    for (x, y) in a.iter().zip(&b) {
        let want = mu.powf(-x.alpha / 2f64.sqrt()) * x.mean;
        assert!((y.mean - want).abs() < 1e-12 * want);
        assert!(x.mean > 0.0 && !x.unreliable);
    }
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| oracle.one_point(&[1.2], &params(1.0), &cfg).unwrap()[0].mean)
    };
    assert_eq!(run(1).to_bits(), run(4).to_bits());
    let single = oracle.one_point(&[1.2], &params(1.0), &cfg).unwrap();
    assert_eq!(single[0].mean.to_bits(), a[1].mean.to_bits());
    assert_eq!(a[0].batch_csv().lines().count(), 21);
}

#[test]
fn direct_and_reduced_estimators_agree() {
    let tau = c(0.0, 1.0);
    let oracle = TorusOracle::new(tau, 16).unwrap();
    let cfg = McConfig {
        seed: 21,
        samples: 20_000,
        batches: 20,
        grid: 16,
        shift: ShiftKernel::Truncated,
    };
    let p = params(1.0);
    for alpha in [0.6, 1.0] {
        let red = oracle.one_point(&[alpha], &p, &cfg).unwrap().remove(0);
        let dir = oracle.direct(alpha, &p, &cfg).unwrap();
        let err = (red.stderr.powi(2) + dir.stderr.powi(2)).sqrt();
        assert!(
            (red.mean - dir.mean).abs() < 4.0 * err,
            "α={alpha}: {} ± {} vs {} ± {}",
            red.mean,
            red.stderr,
            dir.mean,
            dir.stderr
        );
    }
}

#[test]
fn estimator_guards() {
    let oracle = TorusOracle::new(c(0.0, 1.0), 8).unwrap();
    let p = params(1.0);
    let cfg = McConfig {
        samples: 100,
        batches: 10,
        grid: 8,
        ..Default::default()
    };
    assert!(matches!(
        oracle.one_point(&[1.0], &p, &cfg),
        Err(LcftError::Guard(_))
    ));
    let cfg = McConfig {
        samples: 100,
        batches: 20,
        grid: 8,
        ..Default::default()
    };
    assert!(matches!(
        oracle.one_point(&[2.5], &p, &cfg),
        Err(LcftError::Validation(_))
    ));
    // α = 1.5 gives αγ > 2 at γ = √2.
    assert!(matches!(
        oracle.one_point(&[1.5], &p, &cfg),
        Err(LcftError::Guard(_))
    ));
    let cfg = McConfig {
        samples: 100,
        batches: 20,
        grid: 16,
        ..Default::default()
    };
    assert!(matches!(
        oracle.one_point(&[1.0], &p, &cfg),
        Err(LcftError::DimensionMismatch(_))
    ));
    assert!(TorusGeometry::new(c(0.0, 1.0), 7).is_err());
}
