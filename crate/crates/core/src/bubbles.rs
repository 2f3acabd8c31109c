//! The bubble family U_{x,λ} = λ U∘δ_λ∘L_x with U = c₁ (t² + (1+|z|²)²)^{-1/2}.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heis::{dilate_unchecked, left_translate, HPoint};
use crate::jets::fields::{field_fn, vars_dilate, vars_left_translate, vars_z, Field, Vars};
use crate::jets::{frame_jet, Jet2, Taylor2};

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BubbleParams {
    pub center: HPoint,
    pub lambda: f64,
}

impl BubbleParams {
    pub fn new(center: HPoint, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) || !center.is_finite() {
            return Err(Error::Domain(format!("invalid bubble parameters ({center:?}, {lambda})")));
        }
        Ok(Self { center, lambda })
    }

    pub fn standard() -> Self {
        Self { center: HPoint::IDENTITY, lambda: 1.0 }
    }

    /// q = δ_λ(L_x p), the normalized coordinate of p.
    pub fn normalize(&self, p: &HPoint) -> HPoint {
        dilate_unchecked(self.lambda, &left_translate(&self.center, p))
    }

    pub fn normalize_vars(&self, p: &Vars) -> Vars {
        vars_dilate(self.lambda, &vars_left_translate(&self.center, p))
    }
}

/// The calibrated constant c₁ together with its calibration evidence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BubbleConstant {
    pub c1: f64,
    /// max |L_{J₀}U − 2U³| / U³ over the calibration probes.
    pub residual_report: f64,
    /// (max ρ − min ρ) / mean ρ for ρ = L_{J₀}w / (2w³).
    pub ratio_spread: f64,
    pub probes: Vec<HPoint>,
}

impl BubbleConstant {
    fn checked(&self) -> Result<f64> {
        if self.c1 > 0.0 && self.c1.is_finite() && self.residual_report < 1e-8 {
            Ok(self.c1)
        } else {
            Err(Error::Calibration(format!(
                "bubble constant not calibrated (c1 = {}, residual = {})",
                self.c1, self.residual_report
            )))
        }
    }
}

/// w = (t² + (1+|z|²)²)^{-1/2} on coordinate jets.
fn w_jet(p: &Vars) -> Taylor2 {
    let a = 1.0 + p[0] * p[0] + p[1] * p[1];
    (p[2] * p[2] + a * a).powf(-0.5)
}

pub fn w_field() -> Field {
    field_fn(true, w_jet)
}

/// g = t + i(1 + |z|²), so that U = c₁|g|⁻¹.
fn g_jet(p: &Vars) -> Taylor2 {
    let a = 1.0 + p[0] * p[0] + p[1] * p[1];
    p[2] + a * I
}

/// Probe cloud used for calibration and residual checks.
pub fn probe_cloud(n: usize, seed: u64, half_width: f64) -> Vec<HPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![HPoint::IDENTITY];
    while out.len() < n {
        out.push(HPoint::new(
            rng.gen_range(-half_width..half_width),
            rng.gen_range(-half_width..half_width),
            rng.gen_range(-half_width..half_width),
        ));
    }
    out
}

fn flat_conformal(j: &Jet2) -> f64 {
    -4.0 * j.flat_sublaplacian().re
}

pub fn calibrate_c1() -> Result<BubbleConstant> {
    calibrate_c1_on(probe_cloud(24, 0x00c1, 3.0))
}

pub fn calibrate_c1_on(probes: Vec<HPoint>) -> Result<BubbleConstant> {
    if probes.len() < 20 {
        return Err(Error::Calibration(format!("need at least 20 probes, got {}", probes.len())));
    }
    let w = w_field();
    let mut ratios = Vec::with_capacity(probes.len());
    for p in &probes {
        let j = frame_jet(&*w, p)?;
        let wv = j.value.re;
        ratios.push(flat_conformal(&j) / (2.0 * wv * wv * wv));
    }
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let (lo, hi) = ratios
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &r| (a.min(r), b.max(r)));
    let spread = (hi - lo) / mean.abs();
    if !(mean > 0.0) || !(spread < 1e-9) {
        return Err(Error::Calibration(format!(
            "L w / (2 w^3) is not a positive constant: range [{lo}, {hi}]"
        )));
    }
    let c1 = mean.sqrt();
    let mut residual: f64 = 0.0;
    for p in &probes {
        let j = frame_jet(&*w, p)?;
        let u = c1 * j.value.re;
        let lu = c1 * flat_conformal(&j);
        residual = residual.max((lu - 2.0 * u * u * u).abs() / (u * u * u));
    }
    let out = BubbleConstant { c1, residual_report: residual, ratio_spread: spread, probes };
    out.checked()?;
    Ok(out)
}

pub fn standard_bubble(c: &BubbleConstant, p: &HPoint) -> Result<f64> {
    let c1 = c.checked()?;
    let a = 1.0 + p.x * p.x + p.y * p.y;
    Ok(c1 / (p.t * p.t + a * a).sqrt())
}

pub fn standard_bubble_jet(c: &BubbleConstant, p: &HPoint) -> Result<Jet2> {
    bubble_jet(c, &BubbleParams::standard(), p)
}

pub fn bubble(c: &BubbleConstant, params: &BubbleParams, p: &HPoint) -> Result<f64> {
    Ok(params.lambda * standard_bubble(c, &params.normalize(p))?)
}

pub fn bubble_jet(c: &BubbleConstant, params: &BubbleParams, p: &HPoint) -> Result<Jet2> {
    frame_jet(&*bubble_field(c, params)?, p)
}

/// U_{x,λ} as a real closed-form field.
pub fn bubble_field(c: &BubbleConstant, params: &BubbleParams) -> Result<Field> {
    let c1 = c.checked()?;
    let pr = *params;
    Ok(field_fn(true, move |p| w_jet(&pr.normalize_vars(p)) * (c1 * pr.lambda)))
}

/// Generators of the tangent space of the bubble manifold at U_{x,λ}.
///
/// With q = δ_λ L_x p these are λ²(Z^R U)(q) (complex, split into real and
/// imaginary parts), λ³(TU)(q) and λ((1+Ξ)U)(q): the derivatives of the
/// family in its center and scale, up to fixed factors.
pub struct TangentFields {
    pub zr: Field,
    pub t: Field,
    pub dilation: Field,
}

impl TangentFields {
    /// Re Z^R U, Im Z^R U, TU, (1+Ξ)U (transported).
    pub fn real_basis(&self) -> [Field; 4] {
        [
            crate::jets::fields::real_part(self.zr.clone()),
            crate::jets::fields::imag_part(self.zr.clone()),
            self.t.clone(),
            self.dilation.clone(),
        ]
    }
}

pub fn tangent_fields(c: &BubbleConstant, params: &BubbleParams) -> Result<TangentFields> {
    let c1 = c.checked()?;
    let pr = *params;
    let l = pr.lambda;
    let zr = field_fn(false, move |p| {
        let q = pr.normalize_vars(p);
        let g = g_jet(&q);
        let m = g.abs2().powf(-1.5);
        vars_z(&q).conj() * g * m * (I * c1 * l * l)
    });
    let t = field_fn(true, move |p| {
        let q = pr.normalize_vars(p);
        let m = g_jet(&q).abs2().powf(-1.5);
        q[2] * m * (-c1 * l * l * l)
    });
    let dilation = field_fn(true, move |p| {
        let q = pr.normalize_vars(p);
        let r = q[0] * q[0] + q[1] * q[1];
        let m = g_jet(&q).abs2().powf(-1.5);
        (1.0 - r * r - q[2] * q[2]) * m * (c1 * l)
    });
    Ok(TangentFields { zr, t, dilation })
}

/// The fields Z U_{x,λ}, Z̄ U_{x,λ}, T U_{x,λ}, Ξ U_{x,λ} read literally in the
/// left-invariant frame, with Ξ built from the coordinates of the evaluation point.
pub struct LiteralTangentFields {
    pub z: Field,
    pub zb: Field,
    pub t: Field,
    pub xi: Field,
}

pub fn tangent_fields_literal(c: &BubbleConstant, params: &BubbleParams) -> Result<LiteralTangentFields> {
    let c1 = c.checked()?;
    let pr = *params;
    let l = pr.lambda;
    // (ZU)(q) = −i c₁ z̄ ḡ |g|⁻³
    let zu = move |p: &Vars| {
        let q = pr.normalize_vars(p);
        let g = g_jet(&q);
        let m = g.abs2().powf(-1.5);
        vars_z(&q).conj() * g.conj() * m * (-I * c1 * l * l)
    };
    let tu = move |p: &Vars| {
        let q = pr.normalize_vars(p);
        let m = g_jet(&q).abs2().powf(-1.5);
        q[2] * m * (-c1 * l * l * l)
    };
    let z = field_fn(false, zu);
    let zb = field_fn(false, move |p| zu(p).conj());
    let t = field_fn(true, tu);
    let xi = field_fn(true, move |p| {
        let zf = zu(p);
        let zp = vars_z(p);
        (zp * zf).re() * 2.0 + p[2] * tu(p) * 2.0
    });
    Ok(LiteralTangentFields { z, zb, t, xi })
}
