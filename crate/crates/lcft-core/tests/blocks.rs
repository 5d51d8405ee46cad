use lcft_core::blocks::{
    annulus_tensor, chain_block, disk_tensor, graph_block, graph_series_value, graph_tensors,
    pant_tensor, three_point_descendant, torus_one_point_block, BlockOptions, ChainKind,
    DescendantCorrelator, GramInverses, InsertionPoints, TensorCache,
};
use lcft_core::graph::{AdmissibleGraph, Edge, SlotUse, Vertex};
use lcft_core::virasoro::YoungDiagram;
use lcft_core::{CftParams, Complex64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn yd(p: &[u32]) -> YoungDiagram {
    YoungDiagram::from_parts(p).unwrap()
}

fn zhat() -> [Complex64; 3] {
    [c(-0.5, 0.0), c(0.5, 0.0), c(0.0, 3f64.sqrt() / 2.0)]
}

fn h(d: [Complex64; 3], z: [Complex64; 3]) -> Complex64 {
    let [d1, d2, d3] = d;
    (z[0] - z[1]).powc(d3 - d1 - d2)
        * (z[0] - z[2]).powc(d2 - d1 - d3)
        * (z[1] - z[2]).powc(d1 - d2 - d3)
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

fn sqrt2() -> CftParams {
    CftParams::new(2f64.sqrt(), 1.0).unwrap()
}

#[test]
fn all_empty_entries_are_one() {
    let d = [c(0.4, 0.0), c(1.1, 0.3), c(2.0, 0.0)];
    let e = YoungDiagram::empty();
    assert_eq!(three_point_descendant(d, 28.0, [&e, &e, &e]), c(1.0, 0.0));
    assert_eq!(
        pant_tensor(d, 28.0, 2).get(&[&e, &e, &e]),
        Some(c(1.0, 0.0))
    );
    assert_eq!(
        annulus_tensor(d[0], d[1], d[2], 28.0, 2).get(&[&e, &e]),
        Some(c(1.0, 0.0))
    );
    assert_eq!(
        disk_tensor(d[0], d[1], d[2], 2).get(&[&e]),
        Some(c(1.0, 0.0))
    );
}

#[test]
fn level_one_slot_one_matches_differentiated_h() {
    let d = [c(0.37, 0.0), c(1.21, 0.0), c(0.83, 0.0)];
    let z = zhat();
    let step = 1e-5;
    let mut deriv = c(0.0, 0.0);
    for i in [1usize, 2] {
        let mut zp = z;
        let mut zm = z;
        zp[i] += step;
        zm[i] -= step;
        deriv += (h(d, zp) - h(d, zm)) / (2.0 * step);
    }
    let want = -deriv / h(d, z);
    let e = YoungDiagram::empty();
    let got = three_point_descendant(d, 28.0, [&yd(&[1]), &e, &e]);
    assert!(rel(got, want) < 1e-8, "{got} vs {want}");
}

#[test]
fn level_two_slot_one_matches_differentiated_h() {
    // (L_{−2}V₁) = Σ_{i=2,3} [Δ_i/(z_i−z₁)² − ∂_i/(z_i−z₁)].
    let d = [c(0.7, 0.0), c(0.45, 0.0), c(1.6, 0.0)];
    let z = zhat();
    let step = 1e-5;
    let mut want = c(0.0, 0.0);
    for i in [1usize, 2] {
        let mut zp = z;
        let mut zm = z;
        zp[i] += step;
        zm[i] -= step;
        let di = (h(d, zp) - h(d, zm)) / (2.0 * step);
        let u = z[i] - z[0];
        want += d[i] / (u * u) * h(d, z) - di / u;
    }
    want /= h(d, z);
    let e = YoungDiagram::empty();
    let got = three_point_descendant(d, 25.5, [&yd(&[2]), &e, &e]);
    assert!(rel(got, want) < 1e-8, "{got} vs {want}");
}

#[test]
fn reduction_paths_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let z = zhat();
    let e = YoungDiagram::empty();
    for _ in 0..10 {
        let d = [
            c(rng.random_range(0.1..3.0), 0.0),
            c(rng.random_range(0.1..3.0), rng.random_range(-0.5..0.5)),
            c(rng.random_range(0.1..3.0), 0.0),
        ];
        let cc = rng.random_range(25.5..40.0);
        let perm = |p: [usize; 3]| [d[p[0]], d[p[1]], d[p[2]]];
        let at = |p: [usize; 3]| InsertionPoints::Finite([z[p[0]], z[p[1]], z[p[2]]]);
        let nu = yd(&[2]);
        // Descendant on slot 3, then moved to slot 2, then to slot 1.
        let a = DescendantCorrelator::new(d, cc).value(&e, &e, &nu, &at([0, 1, 2]));
        let b = DescendantCorrelator::new(perm([0, 2, 1]), cc).value(&e, &nu, &e, &at([0, 2, 1]));
        let r = DescendantCorrelator::new(perm([2, 0, 1]), cc).value(&nu, &e, &e, &at([2, 0, 1]));
        assert!(rel(a, b) < 1e-10, "{a} {b}");
        assert!(rel(a, r) < 1e-10, "{a} {r}");
        // Descendants everywhere, cyclically relabelled.
        let (x, y, w) = (yd(&[1]), yd(&[2]), yd(&[1, 1]));
        let a = DescendantCorrelator::new(d, cc).value(&x, &y, &w, &at([0, 1, 2]));
        let b = DescendantCorrelator::new(perm([2, 0, 1]), cc).value(&w, &x, &y, &at([2, 0, 1]));
        assert!(rel(a, b) < 1e-10, "{a} {b}");
    }
}

#[test]
fn torus_level_one_oracle() {
    let params = sqrt2();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let opts = BlockOptions {
        truncation: 1,
        ..Default::default()
    };
    for _ in 0..10 {
        let a = rng.random_range(0.05..params.q());
        let p = rng.random_range(0.05..4.0);
        let s = torus_one_point_block(a, p, &params, &opts).unwrap();
        let da = a / 2.0 * (params.q() - a / 2.0);
        let dh = params.spectral_weight(p);
        let want = da * (da - 1.0) / (2.0 * dh) + 1.0;
        assert!(rel(s.coefficient(&[1]), c(want, 0.0)) < 1e-10);
    }
}

#[test]
fn disk_vector_matches_three_point_at_infinity() {
    let (dout, dv, din) = (c(1.7, 0.0), c(0.6, 0.0), c(1.2, 0.0));
    let at = InsertionPoints::FirstAtInfinity(c(1.0, 0.0), c(0.0, 0.0));
    let mut corr = DescendantCorrelator::new([dout, dv, din], 28.0);
    let disk = disk_tensor(din, dv, dout, 3);
    let ann = annulus_tensor(dout, dv, din, 28.0, 3);
    let e = YoungDiagram::empty();
    for nu in &disk.basis.diagrams {
        let t = corr.value(&e, &e, nu, &at);
        let w = disk.get(&[nu]).unwrap();
        assert!(
            rel(t, w) < 1e-12 || (t - w).norm() < 1e-12,
            "{nu:?}: {t} {w}"
        );
        assert!((ann.get(&[&e, nu]).unwrap() - w).norm() <= 1e-12 * (1.0 + w.norm()));
    }
}

#[test]
fn self_loop_graph_is_torus_block() {
    let params = sqrt2();
    let opts = BlockOptions::default();
    let g = AdmissibleGraph::torus_one_point(1.2, c(0.3, 0.1));
    for p in [0.3, 0.7, 2.5] {
        let a = graph_block(&g, &[p], &params, &opts).unwrap();
        let b = torus_one_point_block(1.2, p, &params, &opts).unwrap();
        for n in 0..=opts.truncation {
            assert!(rel(a.coefficient(&[n]), b.coefficient(&[n])) < 1e-12);
        }
        assert_eq!(a.abs_exponents, b.abs_exponents);
    }
}

fn link(edge: usize, end: usize) -> SlotUse {
    SlotUse::Link { edge, end }
}

fn marked(alpha: f64) -> SlotUse {
    SlotUse::Marked { alpha }
}

#[test]
fn torus_chain_graph_agrees_with_chain_block() {
    let params = sqrt2();
    let opts = BlockOptions {
        truncation: 3,
        ..Default::default()
    };
    let q = c(0.2, 0.0);
    let g = AdmissibleGraph {
        vertices: vec![
            Vertex {
                id: 1,
                slots: [link(0, 0), link(1, 1), marked(0.9)],
            },
            Vertex {
                id: 2,
                slots: [link(1, 0), link(0, 1), marked(1.3)],
            },
        ],
        edges: vec![
            Edge {
                from: (0, 0),
                to: (1, 1),
                q,
            },
            Edge {
                from: (1, 0),
                to: (0, 1),
                q,
            },
        ],
    };
    let ps = [0.6, 1.4];
    let a = graph_block(&g, &ps, &params, &opts).unwrap();
    let b = chain_block(&ChainKind::Torus, &[0.9, 1.3], &ps, &params, &opts).unwrap();
    for (n, w) in &b.coefficients {
        assert!(rel(a.coefficient(n), *w) < 1e-12, "{n:?}");
    }
    let one = chain_block(&ChainKind::Torus, &[0.9], &[0.6], &params, &opts).unwrap();
    let t = torus_one_point_block(0.9, 0.6, &params, &opts).unwrap();
    assert_eq!(one.coefficients, t.coefficients);
}

#[test]
fn sphere_chain_graph_agrees_with_chain_block() {
    let params = sqrt2();
    let opts = BlockOptions {
        truncation: 3,
        ..Default::default()
    };
    let q = c(0.2, 0.0);
    let alphas = [0.9, 1.1, 1.3, 0.7, 1.0];
    let four = AdmissibleGraph {
        vertices: vec![
            Vertex {
                id: 1,
                slots: [link(0, 0), marked(alphas[1]), marked(alphas[0])],
            },
            Vertex {
                id: 2,
                slots: [link(0, 1), marked(alphas[2]), marked(alphas[3])],
            },
        ],
        edges: vec![Edge {
            from: (0, 0),
            to: (1, 0),
            q,
        }],
    };
    let z4 = vec![c(0.0, 0.0), c(0.5, 0.0), c(2.0, 0.5), c(0.0, 0.0)];
    let a = graph_block(&four, &[0.8], &params, &opts).unwrap();
    let b = chain_block(
        &ChainKind::Sphere { z: z4 },
        &alphas[..4],
        &[0.8],
        &params,
        &opts,
    )
    .unwrap();
    for (n, w) in &b.coefficients {
        assert!(rel(a.coefficient(n), *w) < 1e-12, "{n:?}");
    }
    let five = AdmissibleGraph {
        vertices: vec![
            Vertex {
                id: 1,
                slots: [link(0, 0), marked(alphas[1]), marked(alphas[0])],
            },
            Vertex {
                id: 2,
                slots: [link(0, 1), link(1, 0), marked(alphas[2])],
            },
            Vertex {
                id: 3,
                slots: [link(1, 1), marked(alphas[3]), marked(alphas[4])],
            },
        ],
        edges: vec![
            Edge {
                from: (0, 0),
                to: (1, 0),
                q,
            },
            Edge {
                from: (1, 1),
                to: (2, 0),
                q,
            },
        ],
    };
    let z5 = vec![
        c(0.0, 0.0),
        c(0.4, 0.0),
        c(1.0, 1.0),
        c(3.0, 0.0),
        c(0.0, 0.0),
    ];
    let a = graph_block(&five, &[0.8, 1.7], &params, &opts).unwrap();
    let b = chain_block(
        &ChainKind::Sphere { z: z5 },
        &alphas,
        &[0.8, 1.7],
        &params,
        &opts,
    )
    .unwrap();
    for (n, w) in &b.coefficients {
        assert!(rel(a.coefficient(n), *w) < 1e-12, "{n:?}");
    }
}

#[test]
fn sphere_prefactor_as_printed() {
    let params = sqrt2();
    let alphas = [0.9, 1.1, 1.3, 0.7];
    let z = vec![c(0.0, 0.0), c(0.5, 0.0), c(2.0, 0.5), c(0.0, 0.0)];
    let s = chain_block(
        &ChainKind::Sphere { z: z.clone() },
        &alphas,
        &[0.8],
        &params,
        &BlockOptions::default(),
    )
    .unwrap();
    let dw = |a: f64| a / 2.0 * (params.q() - a / 2.0);
    let (r2, r3) = (z[1].norm(), z[2].norm());
    let want = r2.powf(-dw(alphas[1]))
        * r3.powf(dw(alphas[2]))
        * r2.powf(-dw(alphas[0]))
        * r3.powf(dw(alphas[3]));
    assert!((s.constant - want).abs() < 1e-14 * want);
    assert_eq!(s.abs_exponents, vec![params.spectral_weight(0.8)]);
    assert_eq!(s.coefficient(&[0]), c(1.0, 0.0));
}

#[test]
fn genus_two_series_is_holomorphic_and_normalized() {
    let params = sqrt2();
    let opts = BlockOptions {
        truncation: 3,
        ..Default::default()
    };
    let q = [c(0.3, 0.1), c(0.2, -0.15), c(0.25, 0.05)];
    let g = AdmissibleGraph::genus_two(q);
    let ps = [0.5, 0.9, 1.3];
    let s = graph_block(&g, &ps, &params, &opts).unwrap();
    assert_eq!(s.coefficient(&[0, 0, 0]), c(1.0, 0.0));
    let f = |q1: Complex64| s.series(&[q1, q[1], q[2]]).unwrap();
    let hstep = 1e-5;
    let dx = (f(q[0] + hstep) - f(q[0] - hstep)) / (2.0 * hstep);
    let dy = (f(q[0] + c(0.0, hstep)) - f(q[0] - c(0.0, hstep))) / (2.0 * hstep);
    // ∂_x f + i ∂_y f = 0 for holomorphic f.
    assert!((dx + c(0.0, 1.0) * dy).norm() < 1e-6);
    // Direct contraction with dressed legs reproduces the coefficient sum.
    let cache = TensorCache::new();
    let tensors = graph_tensors(&g, &ps, &params, opts.truncation, &cache);
    let inv: Vec<GramInverses> = ps
        .iter()
        .map(|&p| {
            GramInverses::new(
                c(params.spectral_weight(p), 0.0),
                params.central_charge(),
                3,
                1e10,
            )
            .unwrap()
        })
        .collect();
    let refs: Vec<&GramInverses> = inv.iter().collect();
    let direct = graph_series_value(&g, &tensors, &refs, &q).unwrap();
    assert!(rel(direct, s.series(&q).unwrap()) < 1e-12);
}

#[test]
fn blocks_are_deterministic_and_mu_free() {
    let a = CftParams::new(1.1, 1.0).unwrap();
    let b = CftParams::new(1.1, 3.7).unwrap();
    let opts = BlockOptions {
        truncation: 4,
        ..Default::default()
    };
    let s1 = torus_one_point_block(0.8, 1.1, &a, &opts).unwrap();
    let s2 = torus_one_point_block(0.8, 1.1, &a, &opts).unwrap();
    let s3 = torus_one_point_block(0.8, 1.1, &b, &opts).unwrap();
    assert_eq!(s1.coefficients, s2.coefficients);
    assert_eq!(s1.coefficients, s3.coefficients);
}

#[test]
fn torus_partial_sum_increments_shrink() {
    let params = sqrt2();
    let opts = BlockOptions {
        truncation: 8,
        ..Default::default()
    };
    let s = torus_one_point_block(1.2, 0.7, &params, &opts).unwrap();
    let shells = s.shell_contributions(&[c(0.3, 0.0)]).unwrap();
    for w in shells.windows(2) {
        assert!(w[1].norm() < w[0].norm(), "{:?}", shells);
    }
}

#[test]
fn csv_dump_lists_every_degree() {
    let s = torus_one_point_block(
        1.0,
        1.0,
        &sqrt2(),
        &BlockOptions {
            truncation: 2,
            ..Default::default()
        },
    )
    .unwrap();
    let csv = s.to_csv();
    assert_eq!(csv.lines().count(), 4);
    assert!(csv.starts_with("multi_degree,re,im\n0,1e0,0e0"));
}
