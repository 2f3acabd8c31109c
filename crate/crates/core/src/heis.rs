//! Heisenberg group H¹ = C × R with the law
//! (z, t)·(w, s) = (z + w, t + s + 2 Im(z w̄)).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of H¹. Serializes as the array `[x, y, t]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct HPoint {
    pub x: f64,
    pub y: f64,
    pub t: f64,
}

impl From<[f64; 3]> for HPoint {
    fn from([x, y, t]: [f64; 3]) -> Self {
        Self { x, y, t }
    }
}

impl From<HPoint> for [f64; 3] {
    fn from(p: HPoint) -> Self {
        [p.x, p.y, p.t]
    }
}

impl HPoint {
    pub const IDENTITY: HPoint = HPoint { x: 0.0, y: 0.0, t: 0.0 };

    pub const fn new(x: f64, y: f64, t: f64) -> Self {
        Self { x, y, t }
    }

    pub fn from_complex(z: Complex64, t: f64) -> Self {
        Self { x: z.re, y: z.im, t }
    }

    /// The complex coordinate z = x + iy.
    pub fn z(&self) -> Complex64 {
        Complex64::new(self.x, self.y)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.t.is_finite()
    }

    pub fn max_abs_diff(&self, other: &HPoint) -> f64 {
        (self.x - other.x)
            .abs()
            .max((self.y - other.y).abs())
            .max((self.t - other.t).abs())
    }
}

pub fn group_mul(p: &HPoint, q: &HPoint) -> HPoint {
    // Im(z_p · conj(z_q)) = y_p x_q - x_p y_q
    let im = p.y * q.x - p.x * q.y;
    HPoint {
        x: p.x + q.x,
        y: p.y + q.y,
        t: p.t + q.t + 2.0 * im,
    }
}

pub fn group_inv(p: &HPoint) -> HPoint {
    HPoint {
        x: -p.x,
        y: -p.y,
        t: -p.t,
    }
}

/// Heisenberg dilation δ_λ(z, t) = (λz, λ²t).
pub fn dilate(lambda: f64, p: &HPoint) -> Result<HPoint> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::Domain(format!(
            "dilation factor must be positive and finite, got {lambda}"
        )));
    }
    Ok(dilate_unchecked(lambda, p))
}

pub(crate) fn dilate_unchecked(lambda: f64, p: &HPoint) -> HPoint {
    HPoint {
        x: lambda * p.x,
        y: lambda * p.y,
        t: lambda * lambda * p.t,
    }
}

/// L_x(y) = x⁻¹ y.
pub fn left_translate(x: &HPoint, y: &HPoint) -> HPoint {
    group_mul(&group_inv(x), y)
}

/// Korányi gauge (|z|⁴ + t²)^{1/4}.
pub fn koranyi_norm(p: &HPoint) -> f64 {
    let r2 = p.x * p.x + p.y * p.y;
    (r2 * r2 + p.t * p.t).sqrt().sqrt()
}

/// Korányi distance from `center` to `p`, i.e. |center⁻¹ p|.
pub fn koranyi_distance(center: &HPoint, p: &HPoint) -> f64 {
    koranyi_norm(&left_translate(center, p))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KoranyiBall {
    pub center: HPoint,
    pub radius: f64,
}

impl KoranyiBall {
    pub fn new(center: HPoint, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::Domain(format!("ball radius must be positive, got {radius}")));
        }
        Ok(Self { center, radius })
    }

    pub fn contains(&self, p: &HPoint) -> bool {
        koranyi_distance(&self.center, p) < self.radius
    }

    /// Balls are disjoint when the gauge distance of the centers exceeds the sum
    /// of the radii. The Korányi gauge satisfies the triangle inequality, so this
    /// is sufficient.
    pub fn disjoint_from(&self, other: &KoranyiBall) -> bool {
        koranyi_distance(&self.center, &other.center) >= self.radius + other.radius
    }

    /// Image of the ball under p ↦ δ_λ(x⁻¹ p).
    pub fn normalized(&self, x: &HPoint, lambda: f64) -> KoranyiBall {
        KoranyiBall {
            center: dilate_unchecked(lambda, &left_translate(x, &self.center)),
            radius: lambda * self.radius,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(p: &HPoint, q: &HPoint) -> bool {
        p.max_abs_diff(q) < 1e-12 * (1.0 + p.x.abs().max(p.y.abs()).max(p.t.abs()))
    }

    #[test]
    fn group_law_examples() {
        let p = group_mul(&HPoint::new(0.0, 1.0, 0.0), &HPoint::new(1.0, 0.0, 0.0));
        assert_eq!(p, HPoint::new(1.0, 1.0, 2.0));
        let q = HPoint::new(0.3, -1.2, 4.0);
        assert_eq!(group_mul(&q, &HPoint::IDENTITY), q);
        assert!(close(&group_mul(&q, &group_inv(&q)), &HPoint::IDENTITY));
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(group_inv(&HPoint::new(1.0, 1.0, 2.0)), HPoint::new(-1.0, -1.0, -2.0));
        assert_eq!(group_inv(&HPoint::IDENTITY), HPoint::IDENTITY);
    }

    #[test]
    fn dilation_examples() {
        let p = dilate(2.0, &HPoint::new(1.0, 0.0, 1.0)).unwrap();
        assert_eq!(p, HPoint::new(2.0, 0.0, 4.0));
        assert!(dilate(0.0, &p).is_err());
        assert!(dilate(-1.0, &p).is_err());
        assert_eq!(dilate(1.0, &p).unwrap(), p);
    }

    #[test]
    fn koranyi_examples() {
        assert!((koranyi_norm(&HPoint::new(1.0, 0.0, 1.0)) - 2f64.powf(0.25)).abs() < 1e-15);
        assert_eq!(koranyi_norm(&HPoint::IDENTITY), 0.0);
    }

    #[test]
    fn serializes_as_triple() {
        let p = HPoint::new(1.0, -2.0, 0.5);
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, "[1.0,-2.0,0.5]");
        let back: HPoint = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn ball_disjointness() {
        let a = KoranyiBall::new(HPoint::new(1.0, 0.0, 0.0), 0.2).unwrap();
        let b = KoranyiBall::new(HPoint::new(0.5, 0.0, 0.0), 0.2).unwrap();
        let c = KoranyiBall::new(HPoint::new(0.9, 0.0, 0.0), 0.2).unwrap();
        assert!(a.disjoint_from(&b));
        assert!(!a.disjoint_from(&c));
        assert!(KoranyiBall::new(HPoint::IDENTITY, 0.0).is_err());
    }

    fn pt() -> impl Strategy<Value = HPoint> {
        (-5.0..5.0f64, -5.0..5.0f64, -5.0..5.0f64).prop_map(|(x, y, t)| HPoint::new(x, y, t))
    }

    proptest! {
        #[test]
        fn associativity(p in pt(), q in pt(), r in pt()) {
            let a = group_mul(&group_mul(&p, &q), &r);
            let b = group_mul(&p, &group_mul(&q, &r));
            prop_assert!(a.max_abs_diff(&b) < 1e-12 * 100.0);
        }

        #[test]
        fn dilations_are_automorphisms(p in pt(), q in pt(), l in 0.1..4.0f64) {
            let a = dilate(l, &group_mul(&p, &q)).unwrap();
            let b = group_mul(&dilate(l, &p).unwrap(), &dilate(l, &q).unwrap());
            prop_assert!(a.max_abs_diff(&b) < 1e-12 * 1000.0);
        }

        #[test]
        fn dilation_semigroup(p in pt(), l in 0.1..4.0f64, m in 0.1..4.0f64) {
            let a = dilate(l, &dilate(m, &p).unwrap()).unwrap();
            let b = dilate(l * m, &p).unwrap();
            prop_assert!(a.max_abs_diff(&b) < 1e-12 * 1000.0);
        }

        #[test]
        fn koranyi_homogeneous_and_symmetric(p in pt(), l in 0.1..4.0f64) {
            let n = koranyi_norm(&p);
            prop_assert!((koranyi_norm(&dilate(l, &p).unwrap()) - l * n).abs() < 1e-12 * (1.0 + l * n));
            prop_assert!((koranyi_norm(&group_inv(&p)) - n).abs() < 1e-15 * (1.0 + n));
        }

        #[test]
        fn left_translation_cancels(x in pt(), y in pt()) {
            prop_assert!(close(&left_translate(&x, &group_mul(&x, &y)), &y)
                || left_translate(&x, &group_mul(&x, &y)).max_abs_diff(&y) < 1e-12 * 100.0);
            prop_assert!(close(&left_translate(&x, &x), &HPoint::IDENTITY));
            prop_assert_eq!(left_translate(&HPoint::IDENTITY, &y), y);
        }
    }
}
