use dsgrav_core::algebra::*;
use dsgrav_core::tensor::Mat4;
use proptest::prelude::*;

fn element(gens: &GeneratorSet, c: &[f64]) -> AlgebraElement {
    let m = gens
        .basis()
        .iter()
        .zip(c)
        .fold(Mat5::zeros(), |acc, (b, k)| acc + b * *k);
    AlgebraElement::new(gens.mode, m)
}

fn mode_strategy() -> impl Strategy<Value = AlgebraMode> {
    prop_oneof![
        Just(AlgebraMode::DeSitter),
        Just(AlgebraMode::EuclideanSo5),
        Just(AlgebraMode::Poincare)
    ]
}

#[test]
fn structure_relations_hold_in_every_mode() {
    for mode in AlgebraMode::ALL {
        let report = verify_algebra(&build_generators(mode));
        assert!(report.passed, "{report:?}");
        assert!(report.jacobi_residual <= 1e-12);
    }
}

#[test]
fn poincare_vv_residual_is_exactly_zero() {
    let report = verify_algebra(&build_generators(AlgebraMode::Poincare));
    assert_eq!(report.vv_residual, 0.0);
}

#[test]
fn momentum_commutator_closes_on_rotation_with_shared_sign() {
    // [V_1, V_2] in de Sitter mode, computed by hand: V_1 V_2 - V_2 V_1 = -M_12.
    let g = build_generators(AlgebraMode::DeSitter);
    let mut expected = Mat5::zeros();
    expected[(1, 2)] = -1.0;
    expected[(2, 1)] = 1.0;
    let c = g.v[1] * g.v[2] - g.v[2] * g.v[1];
    assert_eq!(c, expected);
    assert_eq!(c, g.m[1][2] * g.sigma);
}

#[test]
fn flat_background_row_composes_to_lowered_momentum() {
    let g = build_generators(AlgebraMode::DeSitter);
    let eta = [-1.0, 1.0, 1.0, 1.0];
    for mu in 0..4 {
        let mut row = [0.0; 4];
        row[mu] = eta[mu];
        let x = compose_potential(&g, &row, &Mat4::zeros()).unwrap();
        assert_eq!(x.matrix, g.v[mu]);
    }
}

#[test]
fn exp_of_zero_is_identity() {
    for mode in AlgebraMode::ALL {
        let u = exp_map(&AlgebraElement::zero(mode), 1e-14).unwrap();
        assert_eq!(u.matrix, Mat5::identity());
    }
}

#[test]
fn poincare_translation_exponentiates_exactly() {
    let g = build_generators(AlgebraMode::Poincare);
    let x = element(&g, &[0.3, -1.2, 2.0, 0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    let u = exp_map(&x, 1e-14).unwrap();
    assert_eq!(u.matrix, Mat5::identity() + x.matrix);
}

#[test]
fn non_span_matrix_is_rejected() {
    let g = build_generators(AlgebraMode::DeSitter);
    let mut m = Mat5::zeros();
    m[(0, 0)] = 1.0;
    let err = decompose_potential(&g, &AlgebraElement::new(AlgebraMode::DeSitter, m));
    assert!(matches!(err, Err(dsgrav_core::Error::NotInSpan { .. })));
}

#[test]
fn non_finite_input_is_rejected() {
    let g = build_generators(AlgebraMode::EuclideanSo5);
    let mut m = g.v[0];
    m[(0, 4)] = f64::NAN;
    let x = AlgebraElement::new(g.mode, m);
    assert!(exp_map(&x, 1e-12).is_err());
    assert!(commutator(&x, &x).is_err());
}

proptest! {
    #[test]
    fn compose_decompose_round_trip(mode in mode_strategy(),
                                    g in prop::array::uniform4(-3.0f64..3.0),
                                    h in prop::array::uniform6(-3.0f64..3.0)) {
        let gens = build_generators(mode);
        let mut hm = Mat4::zeros();
        for (k, &(a, b)) in PAIRS.iter().enumerate() {
            hm[(a, b)] = h[k];
            hm[(b, a)] = -h[k];
        }
        let x = compose_potential(&gens, &g, &hm).unwrap();
        let (g2, h2) = decompose_potential(&gens, &x).unwrap();
        for i in 0..4 {
            prop_assert!((g[i] - g2[i]).abs() <= 1e-12 * (1.0 + g[i].abs()));
        }
        prop_assert!((hm - h2).amax() <= 1e-12 * (1.0 + hm.amax()));
    }

    #[test]
    fn exp_preserves_form_and_matches_reference(mode in mode_strategy(),
                                                c in prop::collection::vec(-2.0f64..2.0, 10)) {
        let gens = build_generators(mode);
        let x = element(&gens, &c);
        let u = exp_map(&x, 1e-14).unwrap();
        prop_assert!(u.form_residual() <= 1e-10, "form residual {}", u.form_residual());
        let reference = x.matrix.exp();
        let scale = 1.0 + reference.amax();
        prop_assert!((u.matrix - reference).amax() <= 1e-11 * scale);
    }

    #[test]
    fn jacobi_and_antisymmetry_for_random_elements(mode in mode_strategy(),
                                                   a in prop::collection::vec(-1.0f64..1.0, 10),
                                                   b in prop::collection::vec(-1.0f64..1.0, 10),
                                                   c in prop::collection::vec(-1.0f64..1.0, 10)) {
        let gens = build_generators(mode);
        let (x, y, z) = (element(&gens, &a), element(&gens, &b), element(&gens, &c));
        let br = |p: &AlgebraElement, q: &AlgebraElement| commutator(p, q).unwrap();
        let j = br(&x, &br(&y, &z)).matrix + br(&y, &br(&z, &x)).matrix + br(&z, &br(&x, &y)).matrix;
        prop_assert!(j.amax() <= 1e-12);
        prop_assert!((br(&x, &y).matrix + br(&y, &x).matrix).amax() == 0.0);
        // the commutator stays in the algebra
        prop_assert!(decompose_potential(&gens, &br(&x, &y)).is_ok());
    }

    #[test]
    fn group_inverse_is_exact_inverse(mode in mode_strategy(),
                                      c in prop::collection::vec(-1.5f64..1.5, 10)) {
        let gens = build_generators(mode);
        let u = exp_map(&element(&gens, &c), 1e-14).unwrap();
        let p = u.matrix * u.inverse().matrix;
        prop_assert!((p - Mat5::identity()).amax() <= 1e-11 * (1.0 + u.matrix.amax().powi(2)));
    }
}
