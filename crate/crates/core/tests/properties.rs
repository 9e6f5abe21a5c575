use lipcap_core::content::{dyadic_content, gauge_content, optimal_cover, Gauge};
use lipcap_core::geom::{rasterize, DyadicSquare, ObstacleKind, ParametricDomain, RasterMode, RasterSet, Scene, Shape};
use lipcap_core::measures::{frostman, growth_check, Atom, DiscreteMeasure, SamplingSpec};
use lipcap_core::smoothfn::{nk_seminorm, GridFunction};
use lipcap_core::transforms::{
    cauchy_eval_pairing, cauchy_transform, compose_dilation, ts_norm_estimate, vitushkin_localize, CutoffKernel,
    PoissonGridSpec, CHI_TOLERANCE,
};
use lipcap_core::wiener::{classify_parametric, SeriesSpec, Verdict};
use lipcap_core::Point;
use proptest::collection::vec;
use proptest::prelude::*;

fn raster(depth: u32) -> impl Strategy<Value = RasterSet> {
    let n = 1u32 << depth;
    vec((0..n, 0..n), 1..40).prop_map(move |cells| RasterSet::from_leaves(DyadicSquare::UNIT, depth, cells))
}

fn beta() -> impl Strategy<Value = f64> {
    0.05f64..0.95
}

fn measure() -> impl Strategy<Value = DiscreteMeasure> {
    vec((0.0f64..1.0, 0.0f64..1.0, 0.01f64..1.0), 1..12).prop_map(|atoms| {
        DiscreteMeasure::new(atoms.into_iter().map(|(x, y, w)| Atom::new(Point::new(x, y), w)).collect()).unwrap()
    })
}

/// Slit parameters with `a_n = a0 q^n`, `r_n = c0 p^n`, `p <= q`, disjoint.
fn slit_domain() -> impl Strategy<Value = ParametricDomain> {
    (0.2f64..0.6, 0.3f64..0.7, 0.05f64..1.0, 0.05f64..1.0).prop_filter_map("overlapping obstacles", |(a0, q, fc, fp)| {
        let p = q * fp;
        let c0 = a0 * fc * 0.5;
        ParametricDomain::slit(a0, q, c0, p).ok()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn content_is_monotone_and_subadditive(a in raster(4), b in raster(4), beta in beta()) {
        let ca = dyadic_content(&a, beta).unwrap().value;
        let cb = dyadic_content(&b, beta).unwrap().value;
        let cu = dyadic_content(&a.union(&b), beta).unwrap().value;
        prop_assert!(cu >= ca.max(cb) * (1.0 - 1e-12));
        prop_assert!(cu <= (ca + cb) * (1.0 + 1e-12));
        prop_assert!(cu <= 1.0 + 1e-12);
    }

    #[test]
    fn content_halves_under_dyadic_shrinking(a in raster(4), beta in beta(), qx in 0u32..2, qy in 0u32..2) {
        let c = dyadic_content(&a, beta).unwrap().value;
        let half = dyadic_content(&a.half_scale(qx, qy), beta).unwrap().value;
        prop_assert!((half - 2f64.powf(-beta) * c).abs() <= 1e-12 * c);
    }

    #[test]
    fn optimal_cover_attains_the_content(a in raster(5), beta in beta()) {
        let c = dyadic_content(&a, beta).unwrap().value;
        let cover = optimal_cover(&a, beta).unwrap();
        let cost: f64 = cover.iter().map(|s| s.side().powf(beta)).sum();
        prop_assert!((cost - c).abs() <= 1e-12 * c.max(1.0));
        for leaf in a.leaf_squares() {
            prop_assert!(cover.iter().any(|s| s.contains_square(&leaf)));
        }
    }

    #[test]
    fn power_gauge_matches_dyadic_content(a in raster(4), beta in beta()) {
        let g = gauge_content(&a, &Gauge::PowerLaw(beta)).unwrap().value;
        prop_assert_eq!(g, dyadic_content(&a, beta).unwrap().value);
    }

    #[test]
    fn inner_raster_lies_in_outer(cx in 0.3f64..0.7, cy in 0.3f64..0.7, r in 0.05f64..0.3) {
        let scene = Scene::default().with_shape(Shape::disc(Point::new(cx, cy), r));
        let outer = rasterize(&scene, 6, 14, RasterMode::Outer).unwrap();
        let inner = rasterize(&scene, 6, 14, RasterMode::Inner).unwrap();
        prop_assert!(inner.is_subset(&outer));
    }

    #[test]
    fn frostman_grows_like_r_beta(a in raster(5), beta in beta()) {
        let mu = frostman(&a, beta).unwrap();
        let sampling = SamplingSpec::standard(&mu, DyadicSquare::UNIT.rect(), a.leaf_side(), 8);
        let report = growth_check(&mu, beta, &sampling).unwrap();
        prop_assert!(report.max_ratio <= 1.0 + 1e-9, "ratio {}", report.max_ratio);
        let content = dyadic_content(&a, beta).unwrap().value;
        prop_assert!(mu.total() >= content / 8.0 * (1.0 - 1e-12));
    }

    #[test]
    fn dilation_rescales_the_norm(mu in measure(), r in 0.25f64..4.0, s in -1.9f64..-0.1) {
        let grid = PoissonGridSpec { z_count: 12, t_count: 12, ..PoissonGridSpec::default_for(&mu) };
        let base = ts_norm_estimate(&mu, s, &grid).unwrap().value;
        let dilated = compose_dilation(&mu, r).unwrap();
        let scaled = ts_norm_estimate(&dilated, s, &grid.scaled(1.0 / r)).unwrap().value;
        prop_assert!((scaled - r.powf(s) * base).abs() <= 1e-9 * scaled);
    }

    #[test]
    fn pairing_equals_cauchy_transform(mu in measure(), bx in -1.0f64..2.0, by in -1.0f64..2.0) {
        let b = Point::new(bx, by);
        prop_assume!(mu.nearest(b).is_none_or(|(_, d)| d > 1e-3));
        let chi = CutoffKernel::for_measure(&mu, b).unwrap();
        let paired = cauchy_eval_pairing(&mu, b, &chi, CHI_TOLERANCE).unwrap();
        let direct = cauchy_transform(&mu, b, 0.0).unwrap();
        prop_assert!((paired - direct).norm() <= 1e-12 * direct.norm().max(1.0));
    }

    #[test]
    fn localization_is_additive(
        nodes in vec((0u32..9, 0u32..9, 1u32..64), 1..12),
        a in vec(0i32..8, 81),
        b in vec(0i32..8, 81),
    ) {
        // Atoms on nodes with dyadic weights and values: every product is exact.
        let mu = DiscreteMeasure::new(
            nodes.iter().map(|&(i, j, w)| Atom::new(Point::new(i as f64 / 8.0, j as f64 / 8.0), w as f64 / 64.0)).collect(),
        ).unwrap();
        let grid = |v: &[i32]| {
            GridFunction::new(Point::new(0.0, 0.0), 0.125, 9, 9, v.iter().map(|&x| x as f64 / 8.0).collect()).unwrap()
        };
        let (pa, pb) = (grid(&a), grid(&b));
        let la = vitushkin_localize(&mu, &pa).unwrap();
        let lb = vitushkin_localize(&mu, &pb).unwrap();
        let lab = vitushkin_localize(&mu, &pa.sum(&pb).unwrap()).unwrap();
        for ((x, y), z) in la.atoms().iter().zip(lb.atoms()).zip(lab.atoms()) {
            prop_assert_eq!(x.point, z.point);
            prop_assert_eq!(x.weight + y.weight, z.weight);
        }
    }

    #[test]
    fn seminorm_homogeneity(kappa in -4.0f64..4.0) {
        let phi = GridFunction::sample_centered(Point::new(0.0, 0.0), 1.0, 1.0 / 96.0, |z| {
            let r2 = z.norm_sqr();
            if r2 < 0.81 { (-1.0 / (0.81 - r2)).exp() } else { 0.0 }
        }).unwrap();
        let base = nk_seminorm(&phi, 2).unwrap().value;
        let scaled = nk_seminorm(&phi.scaled(kappa), 2).unwrap().value;
        prop_assert!((scaled - kappa.abs() * base).abs() <= 1e-12 * base);
    }

    #[test]
    fn parametric_verdicts_are_monotone_in_s(d in slit_domain(), k in 0u32..3) {
        let verdicts: Vec<Verdict> = (1..20)
            .map(|i| classify_parametric(&d, &SeriesSpec::new(-1.0 + 0.05 * i as f64, k).unwrap(), 0).unwrap().verdict)
            .collect();
        if let Some(first) = verdicts.iter().position(|v| *v == Verdict::Converges) {
            prop_assert!(verdicts[first..].iter().all(|v| *v == Verdict::Converges));
        }
        let rr = d.with_kind(ObstacleKind::RoadRunner);
        for (i, v) in verdicts.iter().enumerate() {
            let s = -1.0 + 0.05 * (i + 1) as f64;
            prop_assert_eq!(classify_parametric(&rr, &SeriesSpec::new(s, k).unwrap(), 0).unwrap().verdict, *v);
        }
    }

    #[test]
    fn closed_form_terms_are_positive_with_monotone_sums(d in slit_domain(), s in -0.95f64..-0.05, k in 0u32..3) {
        let r = classify_parametric(&d, &SeriesSpec::new(s, k).unwrap(), 24).unwrap();
        prop_assert!(r.terms.iter().all(|t| t.value > 0.0));
        prop_assert!(r.partial_sums.windows(2).all(|w| w[1] >= w[0]));
    }
}
