//! The functional 𝒥_J(u) = ∫ u L_J u − ∫ u⁴ on closed-form fields, the
//! calibrated context shared by all reduction steps, and the Gram matrix of
//! the bubble manifold's tangent space.

use nalgebra::{Matrix4, SymmetricEigen, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bubbles::{calibrate_c1, tangent_fields, BubbleConstant, BubbleParams};
use crate::deform::Deformation;
use crate::error::{Error, Result};
use crate::heis::{koranyi_distance, HPoint};
use crate::jets::fields::{field_fn, scaled, sum, vars_z, Field};
use crate::jets::{frame_jet, ScalarField, Taylor2};
use crate::quad::{calibrate_kappa, check_kappa, KappaCalibration, QuadratureRule, RuleSpec};
use crate::webster::{conformal_from_jets, deformation_jet};

/// Calibrated constants and the base quadrature rule (centered at the identity).
#[derive(Debug, Clone)]
pub struct Lab {
    pub constant: BubbleConstant,
    pub kappa: KappaCalibration,
    pub rule_spec: RuleSpec,
    pub rule: QuadratureRule,
}

pub const KAPPA_TOL: f64 = 1e-3;

impl Lab {
    pub fn calibrate(rule_spec: &RuleSpec) -> Result<Self> {
        let constant = calibrate_c1()?;
        let kappa = calibrate_kappa(&constant, rule_spec, KAPPA_TOL)?;
        let rule = QuadratureRule::from_spec(rule_spec, kappa.kappa)?;
        Ok(Self { constant, kappa, rule_spec: rule_spec.clone(), rule })
    }

    /// Calibration with κ forced; fails unless the forced value reproduces 4π².
    pub fn with_kappa(rule_spec: &RuleSpec, kappa: f64) -> Result<Self> {
        let constant = calibrate_c1()?;
        let rel = check_kappa(&constant, rule_spec, kappa, KAPPA_TOL)?;
        let base = QuadratureRule::from_spec(rule_spec, 1.0)?
            .integrate(|p| Ok(crate::bubbles::standard_bubble(&constant, p)?.powi(4)))?
            .value;
        let cal = KappaCalibration { kappa, base_integral: base, integral: kappa * base, rel_error: rel, candidates: vec![] };
        let rule = QuadratureRule::from_spec(rule_spec, kappa)?;
        Ok(Self { constant, kappa: cal, rule_spec: rule_spec.clone(), rule })
    }

    pub fn refined(&self) -> Result<Self> {
        let spec = self.rule_spec.refined();
        let rule = QuadratureRule::from_spec(&spec, self.kappa.kappa)?;
        Ok(Self { rule_spec: spec, rule, ..self.clone() })
    }

    pub fn standard_bubble(&self) -> Field {
        crate::bubbles::bubble_field(&self.constant, &BubbleParams::standard()).expect("calibrated constant")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctionalValue {
    pub value: f64,
    /// ∫ u L_{J₀} u − u⁴.
    pub flat_part: f64,
    /// ∫ u (L_J − L_{J₀}) u.
    pub deformation_part: f64,
}

/// u(L_J − L_{J₀})u at p.
fn deformation_density(d: &Deformation, u: &dyn ScalarField, p: &HPoint) -> Result<f64> {
    let fj = deformation_jet(d, p)?;
    let uj = frame_jet(u, p)?;
    let l0 = -4.0 * uj.flat_sublaplacian().re;
    Ok(uj.value.re * (conformal_from_jets(&fj, &uj) - l0))
}

/// Quadrature rules covering the support of `d`, one per ball, with radial
/// breaks at the seams and at the distance of the concentration point `focus`.
pub fn support_rules(lab: &Lab, d: &Deformation, focus: &BubbleParams) -> Result<Vec<QuadratureRule>> {
    let Some(balls) = &d.support else { return Ok(vec![]) };
    let mut out = Vec::with_capacity(balls.len());
    for (k, ball) in balls.iter().enumerate() {
        let outer = ball.radius;
        let d0 = koranyi_distance(&ball.center, &focus.center);
        let width = 1.0 / focus.lambda;
        let mut breaks: Vec<f64> = d.seams.get(k).cloned().unwrap_or_default();
        for b in [d0 - width, d0, d0 + width] {
            if b > 0.0 && b < outer {
                breaks.push(b);
            }
        }
        let mult = if d0 < outer { (d0 / width).ceil().clamp(1.0, 6.0) as usize } else { 1 };
        let spec = RuleSpec { scale: outer / 4.0, angles: lab.rule_spec.angles * mult, ..lab.rule_spec.clone() };
        out.push(QuadratureRule::ball(&spec, lab.kappa.kappa, &ball.center, &breaks, outer)?);
    }
    Ok(out)
}

/// 𝒥_J(u) for a closed-form real u concentrated near `focus`.
pub fn functional_value(lab: &Lab, d: &Deformation, u: &dyn ScalarField, focus: &BubbleParams) -> Result<FunctionalValue> {
    let main = lab.rule.adapted(focus);
    let flat_part = main
        .integrate(|p| {
            let j = frame_jet(u, p)?;
            let v = j.value.re;
            Ok(v * (-4.0 * j.flat_sublaplacian().re) - v.powi(4))
        })?
        .value;
    let deformation_part = if d.is_flat() {
        0.0
    } else if d.support.is_none() {
        main.integrate(|p| deformation_density(d, u, p))?.value
    } else {
        let mut acc = 0.0;
        for rule in support_rules(lab, d, focus)? {
            acc += rule.integrate(|p| deformation_density(d, u, p))?.value;
        }
        acc
    };
    Ok(FunctionalValue { value: flat_part + deformation_part, flat_part, deformation_part })
}

pub type Gram = [[f64; 4]; 4];

pub const GRAM_CONDITION_MAX: f64 = 1e8;

/// Spectral condition number of a symmetric 4×4 matrix; errors when not positive definite or above the limit.
pub fn check_gram(g: &Gram) -> Result<f64> {
    let m = Matrix4::from_fn(|i, j| g[i][j]);
    let e = SymmetricEigen::new(m).eigenvalues;
    let (lo, hi) = (e.min(), e.max());
    let cond = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if !(cond <= GRAM_CONDITION_MAX) {
        return Err(Error::SingularGram { condition: cond });
    }
    Ok(cond)
}

pub fn solve4(g: &Gram, rhs: [f64; 4]) -> Result<[f64; 4]> {
    check_gram(g)?;
    let m = Matrix4::from_fn(|i, j| g[i][j]);
    let x = m
        .cholesky()
        .ok_or(Error::SingularGram { condition: f64::INFINITY })?
        .solve(&Vector4::from(rhs));
    Ok([x[0], x[1], x[2], x[3]])
}

/// X-inner products of the four real tangent fields at (x, λ).
pub fn gram_matrix(lab: &Lab, params: &BubbleParams) -> Result<Gram> {
    let basis = tangent_fields(&lab.constant, params)?.real_basis();
    let rule = lab.rule.adapted(params);
    let mut g = [[0.0; 4]; 4];
    let cols = rule.integrate_many(10, |p| {
        let z: Vec<Complex64> = basis.iter().map(|f| frame_jet(&**f, p).map(|j| j.z)).collect::<Result<_>>()?;
        let mut out = Vec::with_capacity(10);
        for i in 0..4 {
            for j in i..4 {
                out.push((z[i] * z[j].conj()).re);
            }
        }
        Ok(out)
    })?;
    let mut k = 0;
    for i in 0..4 {
        for j in i..4 {
            g[i][j] = cols[k];
            g[j][i] = cols[k];
            k += 1;
        }
    }
    check_gram(&g)?;
    Ok(g)
}

/// The exact solution of the constant structure f ≡ c: U∘Ψ_c with
/// Ψ_c(z, t) = (α(z − c̄z̄), t), α = (1 − |c|²)^{-1/2}.
pub fn constant_structure_bubble(lab: &Lab, c: Complex64) -> Result<Field> {
    if !(c.norm() < 1.0) {
        return Err(Error::DegenerateLevi { modulus: c.norm(), at: HPoint::IDENTITY });
    }
    let c1 = lab.constant.c1;
    let alpha = 1.0 / (1.0 - c.norm_sqr()).sqrt();
    let cb = c.conj();
    Ok(field_fn(true, move |p| {
        let z = vars_z(p);
        let w = (z - z.conj() * cb) * alpha;
        let a = Taylor2::real(1.0) + w.abs2();
        (p[2] * p[2] + a * a).powf(-0.5) * c1
    }))
}

/// W₀ = B − Σ aᵢeᵢ with B the constant-structure bubble for c and a chosen so
/// that W₀ − U is X-orthogonal to the tangent fields at the standard bubble.
pub struct WarmStart {
    pub field: Field,
    pub coefficients: [f64; 4],
    pub c: Complex64,
}

pub fn warm_start(lab: &Lab, c: Complex64, gram: &Gram) -> Result<WarmStart> {
    let u = lab.standard_bubble();
    if c == Complex64::new(0.0, 0.0) {
        return Ok(WarmStart { field: u, coefficients: [0.0; 4], c });
    }
    let b = constant_structure_bubble(lab, c)?;
    let basis = tangent_fields(&lab.constant, &BubbleParams::standard())?.real_basis();
    let rhs = lab.rule.integrate_many(4, |p| {
        let dz = frame_jet(&*b, p)?.z - frame_jet(&*u, p)?.z;
        basis.iter().map(|f| Ok((dz * frame_jet(&**f, p)?.z.conj()).re)).collect()
    })?;
    let a = solve4(gram, [rhs[0], rhs[1], rhs[2], rhs[3]])?;
    let mut field = b;
    for (k, f) in basis.iter().enumerate() {
        if a[k] != 0.0 {
            field = sum(field, scaled(f.clone(), -a[k]));
        }
    }
    Ok(WarmStart { field, coefficients: a, c })
}
