//! Cayley transform between S³ ⊂ C² and H¹ and the push-forward of the
//! sphere's CR vector field W = w̄₂ ∂_{w₁} − w̄₁ ∂_{w₂}.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heis::HPoint;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpherePoint {
    pub w1: Complex64,
    pub w2: Complex64,
}

impl SpherePoint {
    pub fn new(w1: Complex64, w2: Complex64) -> Result<Self> {
        let n = w1.norm_sqr() + w2.norm_sqr();
        if (n - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!("|w1|^2 + |w2|^2 = {n}, not on the unit sphere")));
        }
        Ok(Self { w1, w2 })
    }
}

fn cayley_raw(w1: Complex64, w2: Complex64) -> Result<HPoint> {
    let d = 1.0 + w2;
    if d.norm() < 1e-12 {
        return Err(Error::Domain("Cayley transform evaluated at the pole w2 = -1".into()));
    }
    let z = w1 / d;
    let t = (I * (1.0 - w2) / d).re;
    Ok(HPoint::from_complex(z, t))
}

/// F(w₁, w₂) = (w₁/(1+w₂), Re(i(1−w₂)/(1+w₂))).
pub fn cayley(w: &SpherePoint) -> Result<HPoint> {
    cayley_raw(w.w1, w.w2)
}

/// F⁻¹(z, t) = (2iz/(t + i(1+|z|²)), (−t + i(1−|z|²))/(t + i(1+|z|²))).
pub fn cayley_inv(p: &HPoint) -> SpherePoint {
    let z = p.z();
    let m = z.norm_sqr();
    let d = Complex64::new(p.t, 1.0 + m);
    SpherePoint {
        w1: 2.0 * I * z / d,
        w2: Complex64::new(-p.t, 1.0 - m) / d,
    }
}

/// Coefficients of a complex tangent vector v_x∂_x + v_y∂_y + v_t∂_t in the
/// frame (Z, Z̄, T) at p.
pub fn frame_coefficients(v: [Complex64; 3], p: &HPoint) -> [Complex64; 3] {
    let z = p.z();
    let a = v[0] + I * v[1];
    let b = v[0] - I * v[1];
    let g = v[2] - a * I * z.conj() + b * I * z;
    [a, b, g]
}

/// dF applied to a real vector of R⁴ = C² (Richardson-extrapolated central differences).
fn directional(w: &SpherePoint, dir: [f64; 4], h: f64) -> Result<[f64; 3]> {
    let eval = |s: f64| -> Result<[f64; 3]> {
        let w1 = w.w1 + Complex64::new(s * dir[0], s * dir[1]);
        let w2 = w.w2 + Complex64::new(s * dir[2], s * dir[3]);
        let p = cayley_raw(w1, w2)?;
        Ok([p.x, p.y, p.t])
    };
    let cd = |h: f64| -> Result<[f64; 3]> {
        let (a, b) = (eval(h)?, eval(-h)?);
        Ok([0, 1, 2].map(|k| (a[k] - b[k]) / (2.0 * h)))
    };
    let (d1, d2) = (cd(h)?, cd(0.5 * h)?);
    let out = [0, 1, 2].map(|k| (4.0 * d2[k] - d1[k]) / 3.0);
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("finite differences of F failed near the pole".into()));
    }
    Ok(out)
}

/// Real and imaginary parts of c·∂_w as real vectors (∂_a, ∂_b) with w = a + ib.
fn holo_parts(c: Complex64) -> ([f64; 2], [f64; 2]) {
    (
        [0.5 * c.re, 0.5 * c.im],
        [0.5 * c.im, -0.5 * c.re],
    )
}

/// dF of the complex vector c₁∂_{w₁} + c₂∂_{w₂} at w, in (∂_x, ∂_y, ∂_t) components.
pub fn pushforward(w: &SpherePoint, c1: Complex64, c2: Complex64, h: f64) -> Result<[Complex64; 3]> {
    let (r1, i1) = holo_parts(c1);
    let (r2, i2) = holo_parts(c2);
    let re = directional(w, [r1[0], r1[1], r2[0], r2[1]], h)?;
    let im = directional(w, [i1[0], i1[1], i2[0], i2[1]], h)?;
    Ok([0, 1, 2].map(|k| Complex64::new(re[k], im[k])))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PushforwardCheck {
    /// Measured (Z, Z̄, T) coefficients of dF(W).
    pub measured: [Complex64; 3],
    /// The closed-form Z coefficient (i/2)(t + i(1+|z|²))³ / (t² + (1+|z|²)²).
    pub predicted: Complex64,
}

impl PushforwardCheck {
    pub fn z_error(&self) -> f64 {
        (self.measured[0] - self.predicted).norm()
    }

    pub fn spurious(&self) -> f64 {
        self.measured[1].norm().max(self.measured[2].norm())
    }
}

pub const FD_STEP: f64 = 1e-5;

pub fn predicted_coefficient(p: &HPoint) -> Complex64 {
    let g = Complex64::new(p.t, 1.0 + p.z().norm_sqr());
    0.5 * I * g * g * g / g.norm_sqr()
}

pub fn pushforward_w_check(p: &HPoint) -> Result<PushforwardCheck> {
    let w = cayley_inv(p);
    let v = pushforward(&w, w.w2.conj(), -w.w1.conj(), FD_STEP)?;
    Ok(PushforwardCheck { measured: frame_coefficients(v, p), predicted: predicted_coefficient(p) })
}

/// Ratio (Z̄ coefficient)/(Z coefficient) of dF(W + sW̄) at p, with the T part.
pub fn rossi_direction(p: &HPoint, s: f64) -> Result<(Complex64, Complex64)> {
    let w = cayley_inv(p);
    let a = pushforward(&w, w.w2.conj(), -w.w1.conj(), FD_STEP)?;
    // W̄ = w₂ ∂_{w̄₁} − w₁ ∂_{w̄₂}; since F is real, dF(W̄) = conj(dF(W)).
    let b = a.map(|c| c.conj());
    let v = [0, 1, 2].map(|k| a[k] + s * b[k]);
    let c = frame_coefficients(v, p);
    Ok((c[1] / c[0], c[2] / c[0]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bubbles::probe_cloud;
    use crate::deform::rossi_phi;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn cayley_examples() {
        let p = cayley(&SpherePoint::new(c(0.0, 0.0), c(1.0, 0.0)).unwrap()).unwrap();
        assert_eq!(p, HPoint::IDENTITY);
        let p = cayley(&SpherePoint::new(c(1.0, 0.0), c(0.0, 0.0)).unwrap()).unwrap();
        assert!(p.max_abs_diff(&HPoint::new(1.0, 0.0, 0.0)) < 1e-15);
        assert!(cayley(&SpherePoint::new(c(0.0, 0.0), c(-1.0, 0.0)).unwrap()).is_err());
        assert!(SpherePoint::new(c(1.0, 0.0), c(1.0, 0.0)).is_err());
    }

    #[test]
    fn inverse_examples() {
        let w = cayley_inv(&HPoint::IDENTITY);
        assert!((w.w1).norm() < 1e-15 && (w.w2 - 1.0).norm() < 1e-15);
        for p in probe_cloud(1000, 11, 5.0) {
            let w = cayley_inv(&p);
            assert!((w.w1.norm_sqr() + w.w2.norm_sqr() - 1.0).abs() < 1e-12);
            let back = cayley(&w).unwrap();
            assert!(back.max_abs_diff(&p) < 1e-10 * (1.0 + p.t.abs() + p.x.abs() + p.y.abs()));
        }
    }

    #[test]
    fn frame_decomposition_roundtrip() {
        let p = HPoint::new(0.3, -0.7, 0.2);
        let z = p.z();
        // Z itself has components (1/2, −i/2, i z̄).
        let v = [c(0.5, 0.0), c(0.0, -0.5), I * z.conj()];
        let k = frame_coefficients(v, &p);
        assert!((k[0] - 1.0).norm() < 1e-15 && k[1].norm() < 1e-15 && k[2].norm() < 1e-15);
    }

    #[test]
    fn pushforward_at_origin() {
        let r = pushforward_w_check(&HPoint::IDENTITY).unwrap();
        assert!((r.predicted - 0.5).norm() < 1e-15);
        assert!(r.z_error() < 1e-7);
        assert!(r.spurious() < 1e-7);
    }

    #[test]
    fn pushforward_on_cloud() {
        for p in probe_cloud(100, 12, 2.0) {
            let r = pushforward_w_check(&p).unwrap();
            assert!(r.spurious() < 1e-7, "{p:?}: {}", r.spurious());
            assert!(r.z_error() < 1e-7 * (1.0 + r.predicted.norm()), "{p:?}: {}", r.z_error());
            let g2 = p.t * p.t + (1.0 + p.z().norm_sqr()).powi(2);
            assert!((r.predicted.norm() - 0.5 * g2.sqrt()).abs() < 1e-12 * g2);
        }
    }

    #[test]
    fn rossi_direction_is_minus_s_phi() {
        // The measured Z̄/Z ratio of dF(W + sW̄) is −sφ; the rotation z ↦ iz
        // conjugates it into +sφ, so both signs describe the same family.
        for p in probe_cloud(100, 13, 2.0) {
            let s = 0.3;
            let (ratio, tpart) = rossi_direction(&p, s).unwrap();
            assert!((ratio + s * rossi_phi(&p)).norm() < 1e-7, "{p:?}");
            assert!(tpart.norm() < 1e-7);
        }
    }
}
