//! Pseudohermitian quantities of the structure Z̃ = Z + f Z̄ with contact form
//! θ = dt + 2x dy − 2y dx: Levi form, Tanaka–Webster connection, torsion,
//! Webster curvature, sublaplacian and conformal sublaplacian.
//!
//! Everything is pointwise in the frame jets of f and u.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::deform::Deformation;
use crate::error::{Error, Result};
use crate::heis::HPoint;
use crate::jets::fields::{field_fn, Field};
use crate::jets::{fd_fallback_jet, frame_jet, Jet2, ScalarField};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Frame jets of f and f̄ at one point.
#[derive(Debug, Clone, Copy)]
pub struct FJet {
    pub f: Jet2,
    pub fb: Jet2,
}

impl FJet {
    pub fn new(f: Jet2) -> Self {
        Self { f, fb: f.conj_field() }
    }

    pub fn modulus_sq(&self) -> f64 {
        self.f.value.norm_sqr()
    }

    /// 1 − |f|².
    pub fn q(&self) -> f64 {
        1.0 - self.modulus_sq()
    }

    /// Z|f|², Z̄|f|², T|f|².
    fn d_mod(&self) -> (Complex64, Complex64, Complex64) {
        let (f, fb) = (&self.f, &self.fb);
        (
            f.z * fb.value + f.value * fb.z,
            f.zb * fb.value + f.value * fb.zb,
            f.t * fb.value + f.value * fb.t,
        )
    }

    /// N = Zf̄ + f̄²Zf + Z̄(|f|²), so that ω₁¹(Z̄̃) = −N/(1−|f|²).
    fn n(&self) -> Complex64 {
        let fbv = self.fb.value;
        self.fb.z + fbv * fbv * self.f.z + self.d_mod().1
    }

    /// Z N and Z̄ N.
    fn dn(&self) -> (Complex64, Complex64) {
        let (f, fb) = (&self.f, &self.fb);
        let (fv, fbv) = (f.value, fb.value);
        let zn = fb.zz + 2.0 * fbv * fb.z * f.z + fbv * fbv * f.zz + f.z * fb.zb + fv * fb.zzb + fb.z * f.zb + fbv * f.zzb;
        let zbn = fb.zbz + 2.0 * fbv * fb.zb * f.z + fbv * fbv * f.zbz + f.zb * fb.zb + fv * fb.zbzb + fb.zb * f.zb + fbv * f.zbzb;
        (zn, zbn)
    }

    /// (|f|, |∇_H f|, |∇²_H f|) with Euclidean norms over the frame components.
    pub fn remainder_inputs(&self) -> (f64, f64, f64) {
        let f = &self.f;
        let g1 = (f.z.norm_sqr() + f.zb.norm_sqr()).sqrt();
        let g2 = (f.zz.norm_sqr() + f.zbzb.norm_sqr() + f.zzb.norm_sqr() + f.zbz.norm_sqr()).sqrt();
        (f.value.norm(), g1, g2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConnectionData {
    pub omega_theta: Complex64,
    pub omega_1: Complex64,
    pub omega_1bar: Complex64,
    pub torsion: Complex64,
    pub levi: f64,
}

fn levi_checked(fj: &FJet, p: &HPoint) -> Result<f64> {
    let m = fj.f.value.norm();
    if !(m < 1.0) {
        return Err(Error::DegenerateLevi { modulus: m, at: *p });
    }
    Ok(2.0 * fj.q())
}

pub fn connection_from_jet(fj: &FJet) -> ConnectionData {
    let q = fj.q();
    let fbv = fj.fb.value;
    ConnectionData {
        omega_theta: -fbv * fj.f.t / q,
        omega_1: fj.f.zb,
        omega_1bar: -fj.n() / q,
        torsion: -fj.fb.t / q,
        levi: 2.0 * q,
    }
}

pub fn deformation_jet(d: &Deformation, p: &HPoint) -> Result<FJet> {
    let fj = FJet::new(d.jet(p)?);
    levi_checked(&fj, p)?;
    Ok(fj)
}

pub fn connection_form(d: &Deformation, p: &HPoint) -> Result<ConnectionData> {
    Ok(connection_from_jet(&deformation_jet(d, p)?))
}

/// Coefficients of dθ¹ on (θ¹∧θ^{1̄}, θ∧θ¹, θ∧θ^{1̄}), assembled from exact jets
/// of the coframe coefficients a = 1/(1−|f|²), b = −f̄/(1−|f|²) in θ¹ = a θ¹₀ + b θ^{1̄}₀.
pub fn dtheta1_coefficients(f: &Field, p: &HPoint) -> Result<[Complex64; 3]> {
    let fa = f.clone();
    let a = field_fn(false, move |v| {
        let x = fa.eval(v);
        (1.0 - x * x.conj()).recip()
    });
    let fb = f.clone();
    let b = field_fn(false, move |v| {
        let x = fb.eval(v);
        -x.conj() / (1.0 - x * x.conj())
    });
    let ja = frame_jet(&*a, p)?;
    let jb = frame_jet(&*b, p)?;
    let fv = f.value(p);
    let q = 1.0 - fv.norm_sqr();
    Ok([
        (jb.z - ja.zb) * q,
        ja.t + fv * jb.t,
        fv.conj() * ja.t + jb.t,
    ])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StructureResiduals {
    /// dθ¹ − θ¹∧ω₁¹ − A θ∧θ^{1̄} on θ¹∧θ^{1̄}, θ∧θ¹, θ∧θ^{1̄}.
    pub first: [f64; 3],
    /// ω₁¹ + ω_{1̄}^{1̄} − dh/h on θ, θ¹, θ^{1̄}.
    pub second: [f64; 3],
}

impl StructureResiduals {
    pub fn max(&self) -> f64 {
        self.first.iter().chain(&self.second).fold(0.0, |m, v| m.max(*v))
    }
}

pub fn structure_residuals(d: &Deformation, p: &HPoint) -> Result<StructureResiduals> {
    let fj = deformation_jet(d, p)?;
    let c = connection_from_jet(&fj);
    let dt = dtheta1_coefficients(&d.f, p)?;
    let first = [
        (dt[0] - c.omega_1bar).norm(),
        (dt[1] + c.omega_theta).norm(),
        (dt[2] - c.torsion).norm(),
    ];
    // dh/h from exact jets of h = 2(1 − |f|²), with dh = Th θ + Z̃h θ¹ + Z̄̃h θ^{1̄}.
    let ff = d.f.clone();
    let h = field_fn(true, move |v| {
        let x = ff.eval(v);
        (1.0 - x * x.conj()).re() * 2.0
    });
    let jh = frame_jet(&*h, p)?;
    let hv = jh.value.re;
    let fv = fj.f.value;
    let dh = [jh.t / hv, (jh.z + fv * jh.zb) / hv, (jh.zb + fv.conj() * jh.z) / hv];
    let sum = [
        c.omega_theta + c.omega_theta.conj(),
        c.omega_1 + c.omega_1bar.conj(),
        c.omega_1bar + c.omega_1.conj(),
    ];
    let second = [0, 1, 2].map(|k| (sum[k] - dh[k]).norm());
    Ok(StructureResiduals { first, second })
}

/// Webster curvature from dω₁¹ mod θ = R θ¹∧θ^{1̄} with dθ = i h θ¹∧θ^{1̄}.
pub fn curvature_defining(fj: &FJet) -> Complex64 {
    let c = connection_from_jet(fj);
    let q = fj.q();
    let (f, fb) = (&fj.f, &fj.fb);
    let (zp, zbp, _) = fj.d_mod();
    let n = fj.n();
    let (zn, zbn) = fj.dn();
    // ω₁ = Z̄f; (Z̄ + f̄Z)ω₁
    let d_omega1 = f.zbzb + fb.value * f.zzb;
    // ω_{1̄} = −N/q; Z(1/q) = Z|f|²/q²
    let z_w = -zn / q - n * zp / (q * q);
    let zb_w = -zbn / q - n * zbp / (q * q);
    let d_omega1bar = z_w + f.value * zb_w;
    I * c.levi * c.omega_theta - d_omega1 + c.omega_1 * c.omega_1bar + d_omega1bar
        - c.omega_1bar * c.omega_1bar.conj()
}

/// The final simplified curvature display of the source, term by term.
pub fn curvature_display_literal(fj: &FJet) -> Complex64 {
    let (f, fb) = (&fj.f, &fj.fb);
    let (fv, fbv) = (f.value, fb.value);
    let p = fj.modulus_sq();
    let q = fj.q();
    let q2 = q * q;
    let zf = f.z;
    let zbf = f.zb;
    let zfb = fb.z;
    let zbfb = fb.zb;
    let abs_zf2 = zf.norm_sqr();
    let abs_zbf2 = zbf.norm_sqr();
    let (zp, _, _) = fj.d_mod();
    let n = fj.n();
    let mut r = -(f.zbzb + fb.zz + fbv * fbv * f.zz + fv * fv * fb.zbzb) / q;
    r -= (fbv * f.zzb + fbv * f.zbz + fv * fb.zzb + fv * fb.zbz) / q;
    r -= (abs_zf2 + abs_zbf2) / q;
    r -= abs_zbf2 / q;
    r -= fbv * fbv * zf * zbf / q2 + fbv * zbf * zbf / q2 + (3.0 - p) * fv * zbf * zbfb / q2;
    r -= fv * zfb * zfb / q2 + (3.0 - p) * fbv * zf * zfb / q2 + fbv * fbv * fbv * zf * zf / q2;
    r -= zp.norm_sqr() / q2;
    r -= fv * fv * zfb * zbfb / q2 + (2.0 * p - p * p) * abs_zf2 / q2 + fv * fv * fv * zbfb * zbfb / q2;
    r -= n.norm_sqr() / q2;
    r
}

/// The display with the term it drops, −|f|²|Z̄f|²/(1−|f|²)², restored.
pub fn curvature_display_reconciled(fj: &FJet) -> Complex64 {
    let q = fj.q();
    curvature_display_literal(fj) - fj.modulus_sq() * fj.f.zb.norm_sqr() / (q * q)
}

/// (1−|f|²)² R as a polynomial in the jets of f and f̄, expanded symbolically
/// from the defining path. Used as an independent oracle.
pub fn curvature_polynomial(fj: &FJet) -> Complex64 {
    let (f, fb) = (&fj.f, &fj.fb);
    let (ff, fbb) = (f.value, fb.value);
    let (a, b, c, d) = (f.z, f.zb, fb.z, fb.zb);
    let (a2, ba, ab, b2) = (f.zz, f.zbz, f.zzb, f.zbzb);
    let (ca2, cab, cba, cb2) = (a2.conj(), ab.conj(), ba.conj(), b2.conj());
    let p3 = |x: Complex64| x * x * x;
    let p2 = |x: Complex64| x * x;
    let poly = a2 * ff * p3(fbb) - a2 * p2(fbb) + ab * ff * p2(fbb) - ab * fbb + b2 * ff * fbb - b2
        + ba * ff * p2(fbb) - ba * fbb
        + p3(ff) * fbb * ca2 - 2.0 * p3(ff) * p2(d) + p2(ff) * fbb * cab + p2(ff) * fbb * cba
        - 4.0 * p2(ff) * c * d - p2(ff) * ca2
        - 3.0 * ff * fbb * a * d - ff * fbb * b * c + ff * fbb * cb2 - 4.0 * ff * b * d
        - 2.0 * ff * p2(c) - ff * cab - ff * cba
        - 2.0 * p3(fbb) * p2(a) - 4.0 * p2(fbb) * a * b - 4.0 * fbb * a * c - 2.0 * fbb * p2(b)
        - a * d - 3.0 * b * c - cb2;
    let q = fj.q();
    poly / (q * q)
}

/// −(Z̄²f + Z²f̄ + f̄ZZ̄f + f̄Z̄Zf + fZZ̄f̄ + fZ̄Zf̄ + |Zf|² + 3|Z̄f|²).
pub fn curvature_leading(fj: &FJet) -> Complex64 {
    let (f, fb) = (&fj.f, &fj.fb);
    -(f.zbzb + fb.zz + fb.value * f.zzb + fb.value * f.zbz + f.value * fb.zzb + f.value * fb.zbz
        + f.z.norm_sqr()
        + 3.0 * f.zb.norm_sqr())
}

/// The leading bracket read literally: Z f̄ where the corrected reading has Z²f̄.
pub fn curvature_leading_literal(fj: &FJet) -> Complex64 {
    let (f, fb) = (&fj.f, &fj.fb);
    -(f.zbzb + fb.z + fb.value * f.zzb + fb.value * f.zbz + f.value * fb.zzb + f.value * fb.zbz
        + f.z.norm_sqr()
        + 3.0 * f.zb.norm_sqr())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureValue {
    pub r_exact: f64,
    pub r_leading: f64,
    /// |Im| of the exact curvature before taking the real part.
    pub imag_residue: f64,
    pub remainder_bound_inputs: (f64, f64, f64),
}

impl CurvatureValue {
    /// |f|²|∇²f| + |f||∇f|².
    pub fn remainder_scale(&self) -> f64 {
        let (m, g1, g2) = self.remainder_bound_inputs;
        m * m * g2 + m * g1 * g1
    }
}

pub fn curvature_from_jet(fj: &FJet) -> CurvatureValue {
    let r = curvature_defining(fj);
    CurvatureValue {
        r_exact: r.re,
        r_leading: curvature_leading(fj).re,
        imag_residue: r.im.abs(),
        remainder_bound_inputs: fj.remainder_inputs(),
    }
}

pub fn webster_curvature(d: &Deformation, p: &HPoint) -> Result<CurvatureValue> {
    Ok(curvature_from_jet(&deformation_jet(d, p)?))
}

/// Δ_{J̃}u = h^{11̄}(Z̃Z̄̃u + Z̄̃Z̃u − ω₁¹(Z̄̃)Z̃u − ω_{1̄}^{1̄}(Z̃)Z̄̃u).
pub fn sublaplacian_defining(fj: &FJet, u: &Jet2) -> Complex64 {
    let c = connection_from_jet(fj);
    let (f, fb) = (&fj.f, &fj.fb);
    let (fv, fbv) = (f.value, fb.value);
    let zzb_t = u.zzb + fb.z * u.z + fbv * u.zz + fv * (u.zbzb + fb.zb * u.z + fbv * u.zbz);
    let zbz_t = u.zbz + f.zb * u.zb + fv * u.zbzb + fbv * (u.zz + f.z * u.zb + fv * u.zzb);
    let zt = u.z + fv * u.zb;
    let zbt = u.zb + fbv * u.z;
    (zzb_t + zbz_t - c.omega_1bar * zt - c.omega_1bar.conj() * zbt) / c.levi
}

/// Closed form consistent with the defining formula.
pub fn sublaplacian_closed(fj: &FJet, u: &Jet2) -> Complex64 {
    let (f, fb) = (&fj.f, &fj.fb);
    let (fv, fbv) = (f.value, fb.value);
    let p = fj.modulus_sq();
    let q = fj.q();
    let d0 = u.flat_sublaplacian();
    let a = ((1.0 + p) * d0 + fv * u.zbzb + fbv * u.zz) / q;
    let b = ((fb.z + fv * fb.zb) * u.z + (f.zb + fbv * f.z) * u.zb) / (2.0 * q);
    let cz = fb.z + 2.0 * fbv * fbv * f.z + 2.0 * fbv * f.zb + fv * fb.zb + fv * p * fb.zb + p * fb.z;
    let czb = f.zb + 2.0 * fv * fv * fb.zb + 2.0 * fv * fb.z + fbv * f.z + fbv * p * f.z + p * f.zb;
    a + b + (cz * u.z + czb * u.zb) / (2.0 * q * q)
}

/// The source's final sublaplacian display, term by term.
pub fn sublaplacian_display_literal(fj: &FJet, u: &Jet2) -> Complex64 {
    let (f, fb) = (&fj.f, &fj.fb);
    let (fv, fbv) = (f.value, fb.value);
    let p = fj.modulus_sq();
    let q = fj.q();
    let d0 = u.flat_sublaplacian();
    let a = ((1.0 + p) * d0 + fv * u.zbzb + fbv * u.zz + fb.z * u.z + f.zb * u.zb) / q;
    let cz = fb.z + 2.0 * fbv * fbv * f.z + 2.0 * fbv * f.zb + fv * fb.zb + fv * p * fb.zb + p * fb.z;
    let czb = f.zb + 2.0 * fv * fv * fb.zb + 2.0 * fv * fb.z + fbv * f.z + fbv * p * f.z + p * f.zb;
    a + (cz * u.z + czb * u.zb) / (2.0 * q * q)
}

/// c₂(fZ̄²u + f̄Z²u) + c₁(Zf̄ Zu + Z̄f Z̄u).
pub fn sublaplacian_leading(fj: &FJet, u: &Jet2, c2: f64, c1: f64) -> Complex64 {
    let (f, fb) = (&fj.f, &fj.fb);
    c2 * (f.value * u.zbzb + fb.value * u.zz) + c1 * (fb.z * u.z + f.zb * u.zb)
}

/// Symmetric 2×2 coefficient matrix M with Δ_{J̃}u = X(M∇_H u)_X + Y(M∇_H u)_Y
/// in the real frame X = ∂_x + 2y∂_t, Y = ∂_y − 2x∂_t.
pub fn horizontal_metric(f: Complex64) -> [f64; 3] {
    let q = 1.0 - f.norm_sqr();
    let k = 0.25 / q;
    [k * (1.0 + f).norm_sqr(), -2.0 * k * f.im, k * (1.0 - f).norm_sqr()]
}

pub fn sublaplacian(d: &Deformation, u: &dyn ScalarField, p: &HPoint) -> Result<Complex64> {
    let fj = deformation_jet(d, p)?;
    Ok(sublaplacian_defining(&fj, &frame_jet(u, p)?))
}

/// The closed-form entry point; must agree with [`sublaplacian`].
pub fn sublaplacian_fast(d: &Deformation, u: &dyn ScalarField, p: &HPoint) -> Result<Complex64> {
    let fj = deformation_jet(d, p)?;
    Ok(sublaplacian_closed(&fj, &frame_jet(u, p)?))
}

/// L_J u = −4 Re Δ_J u + R u from jets.
pub fn conformal_from_jets(fj: &FJet, u: &Jet2) -> f64 {
    -4.0 * sublaplacian_defining(fj, u).re + curvature_defining(fj).re * u.value.re
}

pub fn conformal_sublaplacian(d: &Deformation, u: &dyn ScalarField, p: &HPoint) -> Result<f64> {
    let fj = deformation_jet(d, p)?;
    Ok(conformal_from_jets(&fj, &frame_jet(u, p)?))
}

/// L_J u with every derivative taken by finite differences.
pub fn conformal_sublaplacian_fd(d: &Deformation, u: &dyn ScalarField, p: &HPoint, h: f64) -> Result<f64> {
    let fj = FJet::new(fd_fallback_jet(|q| d.value(q), p, h)?);
    levi_checked(&fj, p)?;
    let uj = fd_fallback_jet(|q| u.value(q), p, h)?;
    Ok(conformal_from_jets(&fj, &uj))
}
