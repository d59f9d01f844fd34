use darboux2l::closed_forms::Case1Params;
use darboux2l::darboux::{alpha_beta_from_p, p_vector, p_vector_by_definition, transform_spinor};
use darboux2l::hypergeom::hyp2f1;
use darboux2l::{Complex64, Spinor2};
use proptest::prelude::*;

fn complex() -> impl Strategy<Value = Complex64> {
    (-10.0..10.0f64, -10.0..10.0f64).prop_map(|(re, im)| Complex64::new(re, im))
}

fn spinor() -> impl Strategy<Value = Spinor2> {
    (complex(), complex()).prop_map(|(a, b)| Spinor2::new(a, b))
}

proptest! {
    #[test]
    fn p_vector_is_isotropic(psi in spinor()) {
        prop_assume!(psi.norm() > 1e-6);
        prop_assert!(p_vector(&psi).isotropy_residual() <= 1e-12);
    }

    #[test]
    fn p_vector_matches_its_definition(psi in spinor()) {
        let (a, b) = (p_vector(&psi), p_vector_by_definition(&psi));
        let scale = a.norm().max(1.0);
        for k in 0..3 {
            prop_assert!((a.0[k] - b.0[k]).norm() <= 1e-13 * scale);
        }
    }

    #[test]
    fn pair_ignores_global_phase(c0 in -1.0..1.0f64, gamma in -1.0..1.0f64, theta in 0.0..6.3f64, t in -2.0..2.0f64) {
        let p = Case1Params::new(1.5, c0, gamma).unwrap();
        let seed = p.chain().seed.solution(Complex64::new(0.0, -1.5), t, &p.chain().steps).unwrap();
        let rotated = seed * Complex64::from_polar(2.0, theta);
        let (a, b) = alpha_beta_from_p(&p_vector(&seed), 1.5).unwrap();
        let (ar, br) = alpha_beta_from_p(&p_vector(&rotated), 1.5).unwrap();
        prop_assert!((a - ar).abs() <= 1e-12 && (b - br).abs() <= 1e-12);
    }

    #[test]
    fn transform_is_linear(alpha in -3.0..3.0f64, beta in -3.0..3.0f64, eps in complex(), x in spinor(), y in spinor(), k in complex()) {
        let lhs = transform_spinor(alpha, beta, eps, &(x + y * k));
        let rhs = transform_spinor(alpha, beta, eps, &x) + transform_spinor(alpha, beta, eps, &y) * k;
        prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + lhs.norm()));
    }

    #[test]
    fn first_family_keeps_its_radius(r0 in 0.2..3.0f64, c0 in -2.0..2.0f64, gamma in -1.0..1.0f64, t in -4.0..4.0f64) {
        prop_assume!((r0.abs() - c0.abs()).abs() > 1e-3);
        let p = Case1Params::new(r0, c0, gamma).unwrap();
        if let Ok((a, b)) = p.alpha_beta(t) {
            prop_assert!((a * a + b * b - r0 * r0).abs() <= 1e-10 * r0 * r0);
        }
    }

    #[test]
    fn hypergeometric_is_symmetric_in_numerator_parameters(a in complex(), b in complex(), c in 0.5..4.0f64, z in 0.0..0.9f64) {
        let a = a * 0.2;
        let b = b * 0.2;
        let c = Complex64::new(c, 0.0);
        let f = hyp2f1(a, b, c, z).unwrap();
        let g = hyp2f1(b, a, c, z).unwrap();
        prop_assert!((f - g).norm() <= 1e-14 * f.norm().max(1.0));
    }
}
