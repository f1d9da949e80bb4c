use approx::assert_relative_eq;
use dsgrav_core::algebra::{build_generators, compose_potential, AlgebraMode};
use dsgrav_core::field::{
    abelian_limit_check, continuity_residual, field_equation_residual, field_strength, gauge_transform,
    grid_field_residual, harmonic_refinement, matrix_route, solve_spherical, Background, Coordinates, FieldOptions,
    GaugeParams, GridPotential, GridSource, GridSpec, NoSource, SmoothGauge, SmoothPotential, SmoothSource,
    SourceField,
};
use dsgrav_core::lattice::continuum_action;
use dsgrav_core::potential::{connection_matrix, ComponentConnection, FnPotential, Minkowski, PotentialField};
use dsgrav_core::tensor::{eta_matrix, Mat4, Point4, Tensor3, ETA};
use dsgrav_core::Error;
use proptest::prelude::*;

const POINTS: [Point4; 3] = [[0.1, 0.2, -0.3, 0.4], [1.0, -0.5, 0.7, 0.2], [-0.8, 0.9, 0.1, -1.1]];

fn max_diff3(a: &Tensor3, b: &Tensor3) -> f64 {
    (*a - *b).max_abs()
}

#[test]
fn flat_space_is_vacuum() {
    let x = [0.3, 1.0, -2.0, 0.5];
    let fs = field_strength(&Minkowski, &x, Background::VacuumSubtracted).unwrap();
    assert_eq!(fs.e.max_abs(), 0.0);
    assert_eq!(fs.f.max_abs(), 0.0);
    let r = field_equation_residual(&Minkowski, &NoSource, &x, &FieldOptions::default()).unwrap();
    assert_eq!(r.max_abs(), 0.0);
    let c = continuity_residual(&Minkowski, &NoSource, &x, &FieldOptions::default()).unwrap();
    assert_eq!(c.max_abs(), 0.0);
}

#[test]
fn literal_background_keeps_flat_commutator() {
    let fs = field_strength(&Minkowski, &[0.0; 4], Background::Literal).unwrap();
    assert_eq!(fs.e.max_abs(), 0.0);
    assert_eq!(fs.f[(0, 1, 0, 1)], -1.0);
    assert_eq!(fs.f[(1, 2, 1, 2)], 1.0);
}

#[test]
fn constant_metric_gives_commutator_field_strength() {
    let mut g = eta_matrix();
    g[(0, 1)] = 0.3;
    g[(1, 0)] = 0.3;
    g[(2, 2)] = 1.4;
    let p = FnPotential {
        g: move |_: &Point4| g,
        h: |_: &Point4| Tensor3::zero(),
    };
    let fs = field_strength(&p, &[0.0; 4], Background::Literal).unwrap();
    assert!(fs.e.max_abs() < 1e-12);
    let mut nonzero = 0.0_f64;
    for m in 0..4 {
        for n in 0..4 {
            for a in 0..4 {
                for b in 0..4 {
                    let expect = g[(m, a)] * g[(n, b)] - g[(m, b)] * g[(n, a)];
                    assert!((fs.f[(m, n, a, b)] - expect).abs() < 1e-12);
                    nonzero = nonzero.max(expect.abs());
                }
            }
        }
    }
    assert!(nonzero > 1.0);
}

#[test]
fn component_strengths_match_matrix_route() {
    let p = SmoothPotential::new(0.4);
    for bg in [Background::Literal, Background::VacuumSubtracted] {
        for x in &POINTS {
            let c = field_strength(&p, x, bg).unwrap();
            let m = matrix_route::strengths(&p, x, bg).unwrap();
            assert!(max_diff3(&c.e, &m.e) < 1e-12, "E mismatch {}", max_diff3(&c.e, &m.e));
            assert!((c.f - m.f).max_abs() < 1e-12, "F mismatch {}", (c.f - m.f).max_abs());
        }
    }
}

#[test]
fn component_field_equations_match_matrix_route() {
    let p = SmoothPotential::new(0.4);
    let src = SmoothSource::new(0.2);
    for bg in [Background::Literal, Background::VacuumSubtracted] {
        let opts = FieldOptions {
            background: bg,
            ..FieldOptions::default()
        };
        for x in &POINTS {
            let c = field_equation_residual(&p, &src, x, &opts).unwrap();
            let m = matrix_route::field_residual(&p, &src, x, &opts).unwrap();
            let scale = 1.0 + c.max_abs();
            assert!(
                (c.rank2 - m.rank2).amax() < 1e-9 * scale,
                "rank2 {}",
                (c.rank2 - m.rank2).amax()
            );
            assert!(
                max_diff3(&c.rank3, &m.rank3) < 1e-9 * scale,
                "rank3 {}",
                max_diff3(&c.rank3, &m.rank3)
            );
        }
    }
}

#[test]
fn component_continuity_matches_matrix_route() {
    let p = SmoothPotential::new(0.4);
    let src = SmoothSource::new(0.3);
    let opts = FieldOptions::default();
    for x in &POINTS {
        let c = continuity_residual(&p, &src, x, &opts).unwrap();
        let m = matrix_route::continuity(&p, &src, x, &opts).unwrap();
        let d1 = c
            .rank1
            .iter()
            .zip(m.rank1)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(d1 < 1e-10, "rank1 {d1}");
        assert!(
            (c.rank2 - m.rank2).amax() < 1e-10,
            "rank2 {}",
            (c.rank2 - m.rank2).amax()
        );
    }
}

#[test]
fn electric_part_equals_curl_of_metric_without_torsion() {
    let p = SmoothPotential::without_torsion(0.3);
    let fd = FnPotential {
        g: |x: &Point4| p.g(x),
        h: |_: &Point4| Tensor3::zero(),
    };
    let x = POINTS[1];
    let exact = field_strength(&p, &x, Background::VacuumSubtracted).unwrap();
    let numeric = field_strength(&fd, &x, Background::VacuumSubtracted).unwrap();
    for m in 0..4 {
        for n in 0..4 {
            for l in 0..4 {
                let curl = p.dg(&x, m)[(n, l)] - p.dg(&x, n)[(m, l)];
                assert!((exact.e[(m, n, l)] - curl).abs() < 1e-14);
            }
        }
    }
    assert!(max_diff3(&exact.e, &numeric.e) < 1e-9);
}

#[test]
fn nonlinear_part_of_residual_scales_quadratically() {
    let x = POINTS[0];
    let opts = FieldOptions::default();
    let res = |lam: f64| field_equation_residual(&SmoothPotential::new(lam), &NoSource, &x, &opts).unwrap();
    let d = 1e-5;
    let (rp, rm) = (res(d), res(-d));
    let lin2 = (rp.rank2 - rm.rank2) / (2.0 * d);
    let lin3 = (rp.rank3 - rm.rank3) * (1.0 / (2.0 * d));
    let remainder = |lam: f64| {
        let r = res(lam);
        (r.rank2 - lin2 * lam).amax().max((r.rank3 - lin3 * lam).max_abs())
    };
    let ratio = remainder(0.02) / remainder(0.01);
    assert!((ratio - 4.0).abs() < 0.2, "ratio {ratio}");
}

#[test]
fn gauge_transform_identity_and_constant_translation() {
    struct Zero;
    impl GaugeParams for Zero {
        fn xi(&self, _: &Point4) -> [f64; 4] {
            [0.0; 4]
        }
        fn chi(&self, _: &Point4) -> Mat4 {
            Mat4::zeros()
        }
    }
    struct ConstXi;
    impl GaugeParams for ConstXi {
        fn xi(&self, _: &Point4) -> [f64; 4] {
            [0.3, -0.2, 0.5, 0.1]
        }
        fn chi(&self, _: &Point4) -> Mat4 {
            Mat4::zeros()
        }
    }
    let p = SmoothPotential::new(0.3);
    let x = POINTS[2];
    let t = gauge_transform(&p, Zero, 1.0);
    assert_eq!(t.g(&x), p.g(&x));
    assert_eq!(t.h(&x), p.h(&x));
    let flat = gauge_transform(Minkowski, ConstXi, 1.0);
    assert!((flat.g(&x) - eta_matrix()).amax() < 1e-12);
}

#[test]
fn gauge_variation_matches_matrix_commutator() {
    let gs = build_generators(AlgebraMode::DeSitter);
    let p = SmoothPotential::new(0.4);
    let q = SmoothGauge::new(0.5, 1);
    let t = gauge_transform(&p, &q, 1.0);
    for x in &POINTS {
        let (dg, dh) = t.variation(x);
        let delta = compose_potential(&gs, &q.xi(x), &(q.chi(x) * -0.5)).unwrap().matrix;
        for m in 0..4 {
            let d_delta = compose_potential(&gs, &q.dxi(x, m), &(q.dchi(x, m) * -0.5))
                .unwrap()
                .matrix;
            let a = connection_matrix(&gs, &p.g(x), &p.h(x), m);
            let expect = d_delta + a * delta - delta * a;
            let got = connection_matrix(&gs, &dg, &dh, m);
            assert!((got - expect).amax() < 1e-12, "{}", (got - expect).amax());
        }
    }
}

#[test]
fn field_strength_transforms_covariantly() {
    let gs = build_generators(AlgebraMode::DeSitter);
    let p = SmoothPotential::new(0.3);
    let q = SmoothGauge::new(0.4, 2);
    let x = POINTS[1];
    let f0 = matrix_route::curvature(&p, &x, Background::Literal);
    let delta = compose_potential(&gs, &q.xi(&x), &(q.chi(&x) * -0.5)).unwrap().matrix;
    let err = |lam: f64| {
        let f1 = matrix_route::curvature(&gauge_transform(&p, &q, lam), &x, Background::Literal);
        let mut worst = 0.0_f64;
        for m in 0..4 {
            for n in 0..4 {
                let pred = f0[m][n] + (f0[m][n] * delta - delta * f0[m][n]) * lam;
                worst = worst.max((f1[m][n] - pred).amax());
            }
        }
        worst
    };
    let ratio = err(0.02) / err(0.01);
    assert!((ratio - 4.0).abs() < 0.3, "ratio {ratio}");
}

#[test]
fn yang_mills_action_changes_at_second_order() {
    let p = SmoothPotential::new(0.3);
    let q = SmoothGauge::new(0.5, 3);
    let lo = [0.0; 4];
    let hi = [0.6; 4];
    let action = |lam: f64| {
        continuum_action(
            &ComponentConnection::new(gauge_transform(&p, &q, lam), AlgebraMode::DeSitter),
            lo,
            hi,
            5,
        )
        .unwrap()
    };
    let s0 = action(0.0);
    let d: Vec<f64> = [0.04, 0.02, 0.01].iter().map(|&l| (action(l) - s0).abs()).collect();
    assert!((d[0] / d[1] - 4.0).abs() < 0.4, "ratios {:?}", d);
    assert!((d[1] / d[2] - 4.0).abs() < 0.4, "ratios {:?}", d);
}

#[test]
fn spherical_values_and_errors() {
    let s = solve_spherical(1.0, 0.5, Coordinates::Spherical).unwrap();
    let g = s.g(&[0.0, 4.0, 1.0, 0.0]);
    assert_relative_eq!(g[(0, 0)], -0.5, epsilon = 1e-15);
    assert_relative_eq!(g[(1, 1)], 1.5, epsilon = 1e-15);
    assert_relative_eq!(g[(2, 2)], 16.0, epsilon = 1e-15);
    let far = s.g(&[0.0, 1e12, 1.0, 0.0]);
    assert!((far[(0, 0)] + 1.0).abs() < 1e-11 && (far[(1, 1)] - 1.0).abs() < 1e-11);
    let flat = solve_spherical(0.0, 0.5, Coordinates::Spherical).unwrap();
    let th = 0.7_f64;
    let gf = flat.g(&[0.0, 3.0, th, 0.0]);
    assert_eq!(
        gf,
        Mat4::from_diagonal(&nalgebra::Vector4::new(-1.0, 1.0, 9.0, (3.0 * th.sin()).powi(2)))
    );
    assert!(matches!(
        solve_spherical(-1.0, 0.5, Coordinates::Spherical),
        Err(Error::InvalidInput(_))
    ));
    assert!(matches!(
        solve_spherical(1.0, 0.0, Coordinates::Spherical),
        Err(Error::InvalidInput(_))
    ));
    assert!(s.validate_point(&[0.0, 0.4, 1.0, 0.0], 0.0).is_err());
}

#[test]
fn spherical_analytic_derivatives_match_differences() {
    for coords in [Coordinates::Spherical, Coordinates::Cartesian] {
        let s = solve_spherical(1.3, 0.5, coords).unwrap();
        let fd = FnPotential {
            g: |x: &Point4| s.g(x),
            h: |_: &Point4| Tensor3::zero(),
        };
        let x = [0.2, 3.0, 1.1, 2.0];
        for mu in 0..4 {
            assert!((s.dg(&x, mu) - fd.dg(&x, mu)).amax() < 1e-9, "{coords:?} {mu}");
        }
    }
}

#[test]
fn harmonic_residuals_converge_at_stencil_order() {
    let s = solve_spherical(1.0, 0.5, Coordinates::Spherical).unwrap();
    let pt = [1.0, 2.0, 2.0];
    let (_, o00, orr) = harmonic_refinement(&s, pt, &[0.2, 0.1, 0.05, 0.025], 2).unwrap();
    assert!(o00 >= 1.9 && orr >= 1.9, "{o00} {orr}");
    let (_, o00, orr) = harmonic_refinement(&s, pt, &[0.2, 0.1, 0.05, 0.025], 4).unwrap();
    assert!(o00 >= 3.8 && orr >= 3.8, "{o00} {orr}");
}

#[test]
fn abelian_limit_flat_and_weak_field() {
    let opts = FieldOptions::default();
    let x = [0.0, 3.0, 4.0, 12.0];
    assert_eq!(abelian_limit_check(&Minkowski, &NoSource, &x, &opts).unwrap(), 0.0);
    // Weak field: the commutator term -eta eta G F is linear in h, equal to
    // -(2 h_{nu l} + eta_{nu l} tr h) for G = eta + h, with tr h = 0 here.
    let r = 13.0;
    let mass = 0.5e-6 * r;
    let s = solve_spherical(mass, 0.5, Coordinates::Cartesian).unwrap();
    let h = s.g(&x) - eta_matrix();
    let tr: f64 = (0..4).map(|a| ETA[a] * h[(a, a)]).sum();
    assert!(tr.abs() < 1e-14);
    let expect = (h * 2.0).amax();
    let got = abelian_limit_check(&s, &NoSource, &x, &opts).unwrap();
    assert!((got - expect).abs() < 1e-3 * expect, "{got} vs {expect}");
    let strong = solve_spherical(0.25 * r, 0.5, Coordinates::Cartesian).unwrap();
    assert!(abelian_limit_check(&strong, &NoSource, &x, &opts).unwrap() > 0.1);
    assert!(matches!(
        abelian_limit_check(&SmoothPotential::new(0.1), &NoSource, &x, &opts),
        Err(Error::Precondition(_))
    ));
}

fn grid_spec(n: usize, h: f64) -> GridSpec {
    GridSpec {
        origin: [-0.5, -0.5, -0.5, -0.5],
        spacing: [h; 4],
        dims: [n; 4],
    }
}

#[test]
fn grid_derivatives_are_fourth_order() {
    let p = SmoothPotential::new(0.3);
    let err = |n: usize| {
        let h = 1.0 / (n - 1) as f64;
        let grid = GridPotential::sample(grid_spec(n, h), &p).unwrap();
        let idx = [(n - 1) / 2; 4];
        let x = grid.spec.point(idx);
        (0..4)
            .map(|m| (grid.dg(&x, m) - p.dg(&x, m)).amax())
            .fold(0.0, f64::max)
    };
    let order = (err(9) / err(17)).log2();
    assert!(order > 3.7, "order {order}");
}

#[test]
fn grid_rejects_coarse_and_mismatched_inputs() {
    let p = SmoothPotential::new(0.3);
    assert!(matches!(
        GridPotential::sample(grid_spec(3, 0.5), &p),
        Err(Error::GridTooCoarse(_))
    ));
    let pot = GridPotential::sample(grid_spec(11, 0.1), &p).unwrap();
    let other = GridSource::sample(grid_spec(12, 0.1), &SmoothSource::new(0.1)).unwrap();
    assert!(grid_field_residual(&pot, &other, Background::VacuumSubtracted).is_err());
    let x = pot.spec.point([1, 5, 5, 5]);
    let opts = FieldOptions {
        stencil: dsgrav_core::stencil::Stencil::new(0.1, 4),
        ..FieldOptions::default()
    };
    assert!(matches!(
        field_equation_residual(&pot, &NoSource, &x, &opts),
        Err(Error::GridTooCoarse(_))
    ));
    let off = [0.013, 0.0, 0.0, 0.0];
    assert!(field_strength(&pot, &off, Background::Literal).is_err());
}

#[test]
fn grid_residual_converges_to_analytic_residual() {
    let p = SmoothPotential::new(0.2);
    let src = SmoothSource::new(0.1);
    let err = |n: usize| {
        let h = 1.0 / (n - 1) as f64;
        let spec = grid_spec(n, h);
        let gp = GridPotential::sample(spec, &p).unwrap();
        let gsrc = GridSource::sample(spec, &src).unwrap();
        let rows = grid_field_residual(&gp, &gsrc, Background::VacuumSubtracted).unwrap();
        let centre = [(n - 1) / 2; 4];
        let (_, r) = rows.iter().find(|(i, _)| *i == centre).unwrap();
        let exact = field_equation_residual(&p, &src, &spec.point(centre), &FieldOptions::default()).unwrap();
        (r.rank2 - exact.rank2).amax().max(max_diff3(&r.rank3, &exact.rank3))
    };
    let (e1, e2) = (err(9), err(17));
    assert!(e2 < e1 / 8.0, "{e1} {e2}");
}

#[test]
fn continuity_of_constant_source_in_flat_space() {
    struct Constant;
    impl SourceField for Constant {
        fn t(&self, _: &Point4) -> Mat4 {
            Mat4::from_fn(|a, b| 0.1 * (a + b) as f64)
        }
    }
    let c = continuity_residual(&Minkowski, &Constant, &[0.0, 1.0, 2.0, 3.0], &FieldOptions::default()).unwrap();
    assert!(c.rank1.iter().all(|v| v.abs() < 1e-12));
    // Flat G couples T into the spin current equation through G^mu_a T_{mu b} - (a<->b) = 0 for symmetric T.
    assert!(c.rank2.amax() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn strengths_are_antisymmetric(t in -2.0..2.0f64, x in -2.0..2.0f64, y in -2.0..2.0f64, z in -2.0..2.0f64, amp in 0.0..1.0f64) {
        let fs = field_strength(&SmoothPotential::new(amp), &[t, x, y, z], Background::Literal).unwrap();
        prop_assert!(fs.antisymmetry_residual() < 1e-12);
    }
}
