//! Property tests over random points, parameters and amplitudes.

use proptest::prelude::*;

use cryamabe::bubbles::{bubble, calibrate_c1, BubbleConstant, BubbleParams};
use cryamabe::cayley::{cayley, cayley_inv};
use cryamabe::deform::{glued_deformation, rossi_deformation, GluingSpec};
use cryamabe::heis::{dilate, group_inv, group_mul, koranyi_distance, koranyi_norm, HPoint};
use cryamabe::jets::frame_jet;
use cryamabe::jets::fields::Polynomial;
use cryamabe::webster::{deformation_jet, structure_residuals, sublaplacian_closed, sublaplacian_defining};
use rand::SeedableRng;
use std::sync::OnceLock;

fn c1() -> &'static BubbleConstant {
    static C: OnceLock<BubbleConstant> = OnceLock::new();
    C.get_or_init(|| calibrate_c1().unwrap())
}

fn point() -> impl Strategy<Value = HPoint> {
    (-2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64).prop_map(|(x, y, t)| HPoint::new(x, y, t))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn group_laws(a in point(), b in point(), c in point()) {
        let l = group_mul(&group_mul(&a, &b), &c);
        let r = group_mul(&a, &group_mul(&b, &c));
        prop_assert!(l.max_abs_diff(&r) < 1e-12);
        prop_assert!(group_mul(&a, &group_inv(&a)).max_abs_diff(&HPoint::IDENTITY) < 1e-12);
    }

    #[test]
    fn dilations_and_gauge(a in point(), b in point(), l in 0.1..10.0f64) {
        let d = |p: &HPoint| dilate(l, p).unwrap();
        prop_assert!(d(&group_mul(&a, &b)).max_abs_diff(&group_mul(&d(&a), &d(&b))) < 1e-10 * l * l);
        prop_assert!((koranyi_norm(&d(&a)) - l * koranyi_norm(&a)).abs() < 1e-12 * l * (1.0 + koranyi_norm(&a)));
        prop_assert!((koranyi_distance(&group_mul(&b, &a), &group_mul(&b, &HPoint::IDENTITY)) - koranyi_norm(&a)).abs() < 1e-10);
    }

    #[test]
    fn bubble_family_covariance(x in point(), p in point(), l in 0.3..4.0f64) {
        // U_{x,λ}(x·δ_{1/λ}q) = λ U(q).
        let params = BubbleParams::new(x, l).unwrap();
        let q = dilate(1.0 / l, &p).unwrap();
        let at = group_mul(&x, &q);
        let lhs = bubble(c1(), &params, &at).unwrap();
        let rhs = l * bubble(c1(), &BubbleParams::standard(), &p).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-10 * rhs.abs().max(1e-3));
    }

    #[test]
    fn cayley_roundtrip(p in point()) {
        let back = cayley(&cayley_inv(&p)).unwrap();
        prop_assert!(back.max_abs_diff(&p) < 1e-10);
    }

    #[test]
    fn sublaplacian_paths_agree(p in point(), s in -0.5..0.5f64, seed in 0u64..1000) {
        let d = rossi_deformation(s).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let u = Polynomial::random(&mut rng, true);
        let fj = deformation_jet(&d, &p).unwrap();
        let uj = frame_jet(&u, &p).unwrap();
        let a = sublaplacian_defining(&fj, &uj);
        let b = sublaplacian_closed(&fj, &uj);
        prop_assert!((a - b).norm() < 1e-8 * (1.0 + a.norm()));
    }

    #[test]
    fn glued_structure_equations(p in point(), cx in -0.5..0.5f64, r in 0.1..0.6f64, s in -0.2..0.2f64) {
        let d = glued_deformation(&GluingSpec::single(HPoint::new(cx, 0.0, 0.0), r, s)).unwrap();
        prop_assert!(structure_residuals(&d, &p).unwrap().max() < 1e-8);
        prop_assert!(d.value(&p).norm() <= s.abs() + 1e-15);
    }
}
