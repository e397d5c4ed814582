//! Property-based invariants for the indefinite linear algebra and the
//! quadric geometry.

use proptest::prelude::*;

use harmfield::fields::{j_twist, random_tangent_poly_field, VectorField};
use harmfield::pseudolin::{
    inner, is_isometry, orthonormalize, random_isometry, random_skew, skew_norm, AmbientVector,
    Signature, SkewMatrix,
};
use harmfield::quadric::{tangent_project, PointSampler, Quadric};
use harmfield::rng::SplitMix64;

fn small_coord() -> impl Strategy<Value = f64> {
    (-100i32..=100i32).prop_map(|x| f64::from(x) / 25.0)
}

fn vec3() -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(small_coord(), 3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn inner_is_symmetric_and_bilinear(
        a in vec3(),
        b in vec3(),
        c in vec3(),
        s in 0.0f64..2.0,
        minus in 0usize..4,
    ) {
        let sig = Signature::new(3 - minus.min(3), minus.min(3));
        let (a, b, c) = (AmbientVector(a), AmbientVector(b), AmbientVector(c));
        let ab = inner(&a, &b, &sig).unwrap();
        let ba = inner(&b, &a, &sig).unwrap();
        prop_assert!((ab - ba).abs() < 1e-12);
        let lhs = inner(&a.scale(s).add(&c), &b, &sig).unwrap();
        let rhs = s * ab + inner(&c, &b, &sig).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-9);
    }

    #[test]
    fn skew_maps_are_skew_adjoint_and_cube_closed(seed in 0u64..5000) {
        let sig = Signature::new(2, 2);
        let mut rng = SplitMix64::new(seed);
        let a = random_skew(&sig, 1.0, &mut rng);
        let x = AmbientVector((0..4).map(|_| rng.next_symmetric()).collect());
        let y = AmbientVector((0..4).map(|_| rng.next_symmetric()).collect());
        let lhs = inner(&a.apply(&x), &y, &sig).unwrap();
        let rhs = -inner(&x, &a.apply(&y), &sig).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-10);
        // Odd powers stay skew.
        let cubed = a.cube();
        prop_assert!(harmfield::pseudolin::is_skew(cubed.entries(), &sig, 1e-10));
    }

    #[test]
    fn skew_norm_is_conjugation_invariant(seed in 0u64..5000) {
        let sig = Signature::new(1, 2);
        let mut rng = SplitMix64::new(seed);
        let a = random_skew(&sig, 1.0, &mut rng);
        let p = random_isometry(&sig, &mut rng);
        let conj = p.inverse().unwrap().mul(a.entries()).mul(&p);
        let conj = SkewMatrix::new(conj, sig.clone(), 1e-8).unwrap();
        prop_assert!((skew_norm(&conj) - skew_norm(&a)).abs() < 1e-8);
    }

    #[test]
    fn orthonormalize_satisfies_frame_invariants(seed in 0u64..5000) {
        let sig = Signature::new(2, 2);
        let mut rng = SplitMix64::new(seed);
        // Random perturbation of the standard basis stays well-conditioned.
        let basis: Vec<AmbientVector> = (0..4)
            .map(|i| {
                let mut v: Vec<f64> = (0..4).map(|_| 0.2 * rng.next_symmetric()).collect();
                v[i] += 1.0;
                AmbientVector(v)
            })
            .collect();
        let frame = orthonormalize(&basis, &sig).unwrap();
        prop_assert_eq!(frame.len(), 4);
        prop_assert!(frame.residual(&sig).unwrap() < 1e-10);
        // The signature's indicator multiset is preserved.
        let minus = frame.indicators.iter().filter(|&&i| i == -1).count();
        prop_assert_eq!(minus, 2);
    }

    #[test]
    fn tangent_projection_is_idempotent_and_self_adjoint(seed in 0u64..5000) {
        let q = Quadric::hyperbolic(3, 1);
        let s = q.ambient_signature();
        let mut sampler = PointSampler::new(q, seed);
        let x = sampler.next_point();
        let mut rng = SplitMix64::new(seed ^ 0xF00D);
        let w = AmbientVector((0..4).map(|_| rng.next_symmetric()).collect());
        let v = AmbientVector((0..4).map(|_| rng.next_symmetric()).collect());
        let pw = tangent_project(&x, &w).unwrap();
        let ppw = tangent_project(&x, &pw).unwrap();
        prop_assert!(ppw.sub(&pw).max_abs() < 1e-12);
        // <Pw, v> = <w, Pv>.
        let lhs = inner(&pw, &v, &s).unwrap();
        let rhs = inner(&w, &tangent_project(&x, &v).unwrap(), &s).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-10);
        // The projection output is tangent.
        prop_assert!(inner(&pw, x.coords(), &s).unwrap().abs() < 1e-12);
    }

    #[test]
    fn membership_is_isometry_invariant(seed in 0u64..5000) {
        let q = Quadric::sphere(2, 1);
        let s = q.ambient_signature();
        let mut rng = SplitMix64::new(seed);
        let p = random_isometry(&s, &mut rng);
        prop_assert!(is_isometry(&p, &s, &s, 1e-10));
        let mut sampler = PointSampler::new(q.clone(), seed);
        let x = sampler.next_point();
        let image = p.mul_vec(x.coords());
        prop_assert!(q.contains(&image, 1e-9));
    }

    #[test]
    fn twist_is_involutive_on_random_polynomial_fields(seed in 0u64..300) {
        let q = Quadric::hyperbolic(2, 1);
        let field = VectorField::Polynomial(random_tangent_poly_field(&q, seed));
        let twice = j_twist(&j_twist(&field).unwrap()).unwrap();
        let mut sampler = PointSampler::new(q, seed ^ 0xBEEF);
        for _ in 0..5 {
            let x = sampler.next_point();
            prop_assert!(twice.eval(&x).sub(&field.eval(&x)).max_abs() < 1e-8);
        }
    }
}
