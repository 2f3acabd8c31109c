//! Exact calculus in the left-invariant frame
//! Z = ∂_z + i z̄ ∂_t, Z̄ = ∂_z̄ − i z ∂_t, T = ∂_t.

pub mod fields;
pub mod taylor;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use fields::{field_fn, Field, ScalarField, Vars};
pub use taylor::Taylor2;

use crate::error::{Error, Result};
use crate::heis::HPoint;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Wirtinger partials of a coordinate jet.
#[derive(Debug, Clone, Copy)]
struct Wirtinger {
    z: Complex64,
    zb: Complex64,
    t: Complex64,
    zz: Complex64,
    zzb: Complex64,
    zbzb: Complex64,
    zt: Complex64,
    zbt: Complex64,
    tt: Complex64,
}

impl Wirtinger {
    fn of(u: &Taylor2) -> Self {
        let (ux, uy, ut) = (u.g[0], u.g[1], u.g[2]);
        let (xx, xy, xt, yy, yt, tt) = (u.h[0], u.h[1], u.h[2], u.h[3], u.h[4], u.h[5]);
        Self {
            z: 0.5 * (ux - I * uy),
            zb: 0.5 * (ux + I * uy),
            t: ut,
            zz: 0.25 * (xx - 2.0 * I * xy - yy),
            zzb: 0.25 * (xx + yy),
            zbzb: 0.25 * (xx + 2.0 * I * xy - yy),
            zt: 0.5 * (xt - I * yt),
            zbt: 0.5 * (xt + I * yt),
            tt,
        }
    }
}

/// Value and frame derivatives up to order two at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Jet2 {
    pub value: Complex64,
    pub z: Complex64,
    pub zb: Complex64,
    pub t: Complex64,
    /// Z Z u
    pub zz: Complex64,
    /// Z̄ Z̄ u
    pub zbzb: Complex64,
    /// Z(Z̄u)
    pub zzb: Complex64,
    /// Z̄(Zu)
    pub zbz: Complex64,
}

impl Jet2 {
    pub fn from_taylor(u: &Taylor2, p: &HPoint) -> Self {
        let w = Wirtinger::of(u);
        let z = p.z();
        let zc = z.conj();
        let m = z.norm_sqr();
        Self {
            value: u.v,
            z: w.z + I * zc * w.t,
            zb: w.zb - I * z * w.t,
            t: w.t,
            zz: w.zz + 2.0 * I * zc * w.zt - zc * zc * w.tt,
            zbzb: w.zbzb - 2.0 * I * z * w.zbt - z * z * w.tt,
            zzb: w.zzb - I * w.t - I * z * w.zt + I * zc * w.zbt + m * w.tt,
            zbz: w.zzb + I * w.t + I * zc * w.zbt - I * z * w.zt + m * w.tt,
        }
    }

    /// Jet of the conjugate field ū.
    pub fn conj_field(&self) -> Self {
        Self {
            value: self.value.conj(),
            z: self.zb.conj(),
            zb: self.z.conj(),
            t: self.t.conj(),
            zz: self.zbzb.conj(),
            zbzb: self.zz.conj(),
            zzb: self.zbz.conj(),
            zbz: self.zzb.conj(),
        }
    }

    /// Δ_{J₀}u = ½(ZZ̄ + Z̄Z)u.
    pub fn flat_sublaplacian(&self) -> Complex64 {
        0.5 * (self.zzb + self.zbz)
    }

    /// (ZZ̄ − Z̄Z)u + 2i Tu, which vanishes identically.
    pub fn commutator_defect(&self) -> Complex64 {
        self.zzb - self.zbz + 2.0 * I * self.t
    }

    /// Ξu = z Zu + z̄ Z̄u + 2t Tu.
    pub fn xi(&self, p: &HPoint) -> Complex64 {
        let z = p.z();
        z * self.z + z.conj() * self.zb + 2.0 * p.t * self.t
    }

    /// Horizontal real derivatives (Xu, Yu) with X = Z + Z̄, Y = i(Z − Z̄).
    pub fn xy(&self) -> (Complex64, Complex64) {
        (self.z + self.zb, I * (self.z - self.zb))
    }

    pub fn is_finite(&self) -> bool {
        [self.value, self.z, self.zb, self.t, self.zz, self.zbzb, self.zzb, self.zbz]
            .iter()
            .all(|c| c.is_finite())
    }
}

/// First-order right-invariant derivative Z^R u = ∂_z u − i z̄ ∂_t u.
pub fn right_z(u: &Taylor2, p: &HPoint) -> Complex64 {
    let w = Wirtinger::of(u);
    w.z - I * p.z().conj() * w.t
}

pub fn frame_jet(u: &dyn ScalarField, p: &HPoint) -> Result<Jet2> {
    let tay = u.taylor(p);
    if !tay.is_finite() {
        return Err(Error::NonFinite { at: *p });
    }
    Ok(Jet2::from_taylor(&tay, p))
}

pub fn xi_apply(u: &dyn ScalarField, p: &HPoint) -> Result<Complex64> {
    Ok(frame_jet(u, p)?.xi(p))
}

/// Central differences with one Richardson level, assembled into a frame jet.
pub fn fd_fallback_jet<F>(u: F, p: &HPoint, h: f64) -> Result<Jet2>
where
    F: Fn(&HPoint) -> Complex64,
{
    let scale = 1.0 + p.x.abs().max(p.y.abs()).max(p.t.abs());
    if !(h.is_finite() && h > 1e-10 * scale) {
        return Err(Error::Domain(format!("finite-difference step {h} underflows at {p:?}")));
    }
    let tay = fd_taylor(&u, p, h);
    if !tay.is_finite() {
        return Err(Error::NonFinite { at: *p });
    }
    Ok(Jet2::from_taylor(&tay, p))
}

/// Numerical coordinate jet (value, gradient, Hessian) by Richardson-extrapolated
/// central differences.
pub fn fd_taylor<F>(u: &F, p: &HPoint, h: f64) -> Taylor2
where
    F: Fn(&HPoint) -> Complex64,
{
    let at = |d: [f64; 3]| u(&HPoint::new(p.x + d[0], p.y + d[1], p.t + d[2]));
    let unit = |i: usize, s: f64| {
        let mut d = [0.0; 3];
        d[i] = s;
        d
    };
    let u0 = u(p);
    let stencil = |h: f64| {
        let mut g = [Complex64::new(0.0, 0.0); 3];
        let mut hs = [Complex64::new(0.0, 0.0); 6];
        for i in 0..3 {
            let up = at(unit(i, h));
            let um = at(unit(i, -h));
            g[i] = (up - um) / (2.0 * h);
            hs[taylor::hidx(i, i)] = (up - 2.0 * u0 + um) / (h * h);
            for j in (i + 1)..3 {
                let mut pp = unit(i, h);
                pp[j] = h;
                let mut pm = unit(i, h);
                pm[j] = -h;
                let mut mp = unit(i, -h);
                mp[j] = h;
                let mut mm = unit(i, -h);
                mm[j] = -h;
                hs[taylor::hidx(i, j)] = (at(pp) - at(pm) - at(mp) + at(mm)) / (4.0 * h * h);
            }
        }
        (g, hs)
    };
    let (g1, h1) = stencil(h);
    let (g2, h2) = stencil(0.5 * h);
    let mut out = Taylor2::constant(u0);
    for k in 0..3 {
        out.g[k] = (4.0 * g2[k] - g1[k]) / 3.0;
    }
    for k in 0..6 {
        out.h[k] = (4.0 * h2[k] - h1[k]) / 3.0;
    }
    out
}

/// sup|f| + sup|Zf| + sup|Z̄f| + sup|Z²f| + sup|Z̄²f| + sup|ZZ̄f| + sup|Z̄Zf| over probes.
pub fn gamma2_norm_estimate(f: &dyn ScalarField, probes: &[HPoint]) -> Result<f64> {
    if probes.is_empty() {
        return Err(Error::Domain("empty probe set".into()));
    }
    let mut sups = [0.0f64; 7];
    for p in probes {
        let j = frame_jet(f, p)?;
        let vals = [j.value, j.z, j.zb, j.zz, j.zbzb, j.zzb, j.zbz];
        for (s, v) in sups.iter_mut().zip(vals) {
            *s = s.max(v.norm());
        }
    }
    Ok(sups.iter().sum())
}

#[cfg(test)]
mod tests {
    use super::fields::*;
    use super::*;
    use crate::heis::dilate;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn jet_of_t() {
        let p = HPoint::new(0.4, -1.3, 2.0);
        let j = frame_jet(&*coord_t(), &p).unwrap();
        let z = p.z();
        assert!((j.z - I * z.conj()).norm() < 1e-15);
        assert!((j.zb + I * z).norm() < 1e-15);
        assert_eq!(j.t, c(1.0, 0.0));
        assert!((j.zzb - c(0.0, -1.0)).norm() < 1e-15);
        assert!((j.zbz - c(0.0, 1.0)).norm() < 1e-15);
        assert!(j.flat_sublaplacian().norm() < 1e-15);
    }

    #[test]
    fn jet_of_modulus_sq() {
        let p = HPoint::new(0.4, -1.3, 2.0);
        let j = frame_jet(&*modulus_sq(), &p).unwrap();
        assert!((j.z - p.z().conj()).norm() < 1e-15);
        assert!((j.zb - p.z()).norm() < 1e-15);
        assert!((j.zzb - 1.0).norm() < 1e-15);
        assert!((j.zbz - 1.0).norm() < 1e-15);
        assert!((j.flat_sublaplacian() - 1.0).norm() < 1e-15);
    }

    #[test]
    fn xi_examples() {
        let p = HPoint::new(0.4, -1.3, 2.0);
        assert!((xi_apply(&*coord_t(), &p).unwrap() - 2.0 * p.t).norm() < 1e-14);
        assert_eq!(xi_apply(&*constant(c(1.0, 0.0)), &p).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn xi_generates_dilations() {
        // The dilation flow s ↦ u(δ_{e^s} p) differentiated at s = 0.
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let poly: Field = std::sync::Arc::new(Polynomial::random(&mut rng, true));
        let p = HPoint::new(0.3, 0.8, -0.6);
        let h: f64 = 1e-4;
        let fwd = poly.value(&dilate(h.exp(), &p).unwrap());
        let bwd = poly.value(&dilate((-h).exp(), &p).unwrap());
        let fd = (fwd - bwd) / (2.0 * h);
        let xi = xi_apply(&*poly, &p).unwrap();
        assert!((fd - xi).norm() < 1e-6 * (1.0 + xi.norm()));
        // homogeneous of degree 2
        let q = modulus_sq();
        let xq = xi_apply(&*q, &p).unwrap();
        assert!((xq - 2.0 * q.value(&p)).norm() < 1e-14);
    }

    #[test]
    fn xi_literal_reading_is_not_real() {
        // z Zu + z̄ Zu (the unconjugated reading) fails to be real on u = |z|².
        let p = HPoint::new(0.3, 0.8, -0.6);
        let j = frame_jet(&*modulus_sq(), &p).unwrap();
        let literal = p.z() * j.z + p.z().conj() * j.z + 2.0 * p.t * j.t;
        assert!(literal.im.abs() > 1e-3);
        assert!(j.xi(&p).im.abs() < 1e-15);
    }

    #[test]
    fn fd_matches_exact() {
        let p = HPoint::new(0.7, -0.2, 0.9);
        let u = modulus_sq();
        let e = frame_jet(&*u, &p).unwrap();
        let f = fd_fallback_jet(|q| u.value(q), &p, 1e-3).unwrap();
        for (a, b) in [(e.z, f.z), (e.zb, f.zb), (e.zz, f.zz), (e.zzb, f.zzb), (e.zbz, f.zbz)] {
            assert!((a - b).norm() < 1e-8);
        }
        assert!(fd_fallback_jet(|q| u.value(q), &p, 0.0).is_err());
    }

    #[test]
    fn gamma2_examples() {
        let k = constant(c(0.3, 0.4));
        let probes = [HPoint::IDENTITY, HPoint::new(1.0, 2.0, 3.0)];
        assert!((gamma2_norm_estimate(&*k, &probes).unwrap() - 0.5).abs() < 1e-15);
        assert!(gamma2_norm_estimate(&*k, &[]).is_err());
        let u = modulus_sq();
        let a = gamma2_norm_estimate(&*u, &probes[..1]).unwrap();
        let b = gamma2_norm_estimate(&*u, &probes).unwrap();
        assert!(b >= a);
    }

    fn pt() -> impl Strategy<Value = HPoint> {
        (-2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64).prop_map(|(x, y, t)| HPoint::new(x, y, t))
    }

    proptest! {
        #[test]
        fn commutator_identity(seed in 0u64..1000, p in pt()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let u = Polynomial::random(&mut rng, false);
            let j = frame_jet(&u, &p).unwrap();
            let scale = 1.0 + j.zzb.norm() + j.zbz.norm() + j.t.norm();
            prop_assert!(j.commutator_defect().norm() < 1e-10 * scale);
        }

        #[test]
        fn real_field_symmetries(seed in 0u64..1000, p in pt()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let u = Polynomial::random(&mut rng, true);
            let j = frame_jet(&u, &p).unwrap();
            prop_assert_eq!(j.zb, j.z.conj());
            prop_assert_eq!(j.zbzb, j.zz.conj());
            prop_assert!((j.zbz - j.zzb.conj()).norm() <= 1e-12 * (1.0 + j.zzb.norm()));
        }

        #[test]
        fn left_invariance(seed in 0u64..1000, x in pt(), p in pt()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let u: Field = std::sync::Arc::new(Polynomial::random(&mut rng, false));
            let ut = translated(u.clone(), x);
            let a = frame_jet(&*ut, &p).unwrap();
            let b = frame_jet(&*u, &crate::heis::left_translate(&x, &p)).unwrap();
            let tol = 1e-10 * (1.0 + b.z.norm() + b.zz.norm() + b.zzb.norm());
            prop_assert!((a.z - b.z).norm() < tol);
            prop_assert!((a.zb - b.zb).norm() < tol);
            prop_assert!((a.zz - b.zz).norm() < tol);
            prop_assert!((a.zzb - b.zzb).norm() < tol);
            prop_assert!((a.zbz - b.zbz).norm() < tol);
            prop_assert!((a.t - b.t).norm() < tol);
        }

        #[test]
        fn dilation_covariance(seed in 0u64..1000, p in pt(), l in 0.2..3.0f64) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let u: Field = std::sync::Arc::new(Polynomial::random(&mut rng, false));
            let ud = dilated(u.clone(), l);
            let a = frame_jet(&*ud, &p).unwrap();
            let b = frame_jet(&*u, &dilate(l, &p).unwrap()).unwrap();
            let tol = 1e-10 * (1.0 + b.z.norm() + b.zz.norm()) * (1.0 + l * l);
            prop_assert!((a.z - l * b.z).norm() < tol);
            prop_assert!((a.zz - l * l * b.zz).norm() < tol);
            prop_assert!((a.t - l * l * b.t).norm() < tol);
        }

        #[test]
        fn right_field_on_t(p in pt()) {
            let tay = coord_t().taylor(&p);
            prop_assert!((right_z(&tay, &p) + I * p.z().conj()).norm() < 1e-14);
        }
    }
}
