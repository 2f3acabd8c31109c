//! Closed-form scalar fields evaluated on coordinate jets.

use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;

use super::taylor::Taylor2;
use crate::heis::HPoint;

pub type Vars = [Taylor2; 3];

pub fn vars_at(p: &HPoint) -> Vars {
    [Taylor2::var(p.x, 0), Taylor2::var(p.y, 1), Taylor2::var(p.t, 2)]
}

/// x · p with x a fixed group element.
pub fn vars_mul_left(x: &HPoint, p: &Vars) -> Vars {
    let [px, py, pt] = *p;
    [
        px + x.x,
        py + x.y,
        pt + x.t + (px * (2.0 * x.y) - py * (2.0 * x.x)),
    ]
}

/// L_x(p) = x⁻¹ p.
pub fn vars_left_translate(x: &HPoint, p: &Vars) -> Vars {
    vars_mul_left(&crate::heis::group_inv(x), p)
}

pub fn vars_dilate(lambda: f64, p: &Vars) -> Vars {
    [p[0] * lambda, p[1] * lambda, p[2] * (lambda * lambda)]
}

/// z = x + iy as a jet.
pub fn vars_z(p: &Vars) -> Taylor2 {
    p[0] + p[1] * Complex64::i()
}

/// A complex field with exact second-order partials in (x, y, t).
///
/// Fields receive the coordinates as jets, so composing a field with a
/// smooth change of variables is just evaluating it on transformed jets.
pub trait ScalarField: Send + Sync {
    fn eval(&self, p: &Vars) -> Taylor2;

    fn is_real_valued(&self) -> bool {
        false
    }

    fn taylor(&self, p: &HPoint) -> Taylor2 {
        self.eval(&vars_at(p))
    }

    fn value(&self, p: &HPoint) -> Complex64 {
        self.taylor(p).v
    }
}

pub type Field = Arc<dyn ScalarField>;

impl<T: ScalarField + ?Sized> ScalarField for Arc<T> {
    fn eval(&self, p: &Vars) -> Taylor2 {
        (**self).eval(p)
    }
    fn is_real_valued(&self) -> bool {
        (**self).is_real_valued()
    }
    fn value(&self, p: &HPoint) -> Complex64 {
        (**self).value(p)
    }
}

pub struct FnField<F> {
    f: F,
    real: bool,
}

impl<F> ScalarField for FnField<F>
where
    F: Fn(&Vars) -> Taylor2 + Send + Sync,
{
    fn eval(&self, p: &Vars) -> Taylor2 {
        (self.f)(p)
    }
    fn is_real_valued(&self) -> bool {
        self.real
    }
}

pub fn field_fn<F>(real: bool, f: F) -> Field
where
    F: Fn(&Vars) -> Taylor2 + Send + Sync + 'static,
{
    Arc::new(FnField { f, real })
}

pub fn constant(c: Complex64) -> Field {
    field_fn(c.im == 0.0, move |_| Taylor2::constant(c))
}

pub fn zero() -> Field {
    constant(Complex64::new(0.0, 0.0))
}

pub fn coord_x() -> Field {
    field_fn(true, |p| p[0])
}

pub fn coord_y() -> Field {
    field_fn(true, |p| p[1])
}

pub fn coord_t() -> Field {
    field_fn(true, |p| p[2])
}

/// |z|².
pub fn modulus_sq() -> Field {
    field_fn(true, |p| p[0] * p[0] + p[1] * p[1])
}

/// u ∘ L_x.
pub fn translated(u: Field, x: HPoint) -> Field {
    let real = u.is_real_valued();
    field_fn(real, move |p| u.eval(&vars_left_translate(&x, p)))
}

/// u ∘ δ_λ.
pub fn dilated(u: Field, lambda: f64) -> Field {
    let real = u.is_real_valued();
    field_fn(real, move |p| u.eval(&vars_dilate(lambda, p)))
}

pub fn scaled(u: Field, c: f64) -> Field {
    let real = u.is_real_valued();
    field_fn(real, move |p| u.eval(p) * c)
}

pub fn sum(u: Field, v: Field) -> Field {
    let real = u.is_real_valued() && v.is_real_valued();
    field_fn(real, move |p| u.eval(p) + v.eval(p))
}

pub fn real_part(u: Field) -> Field {
    field_fn(true, move |p| u.eval(p).re())
}

pub fn imag_part(u: Field) -> Field {
    field_fn(true, move |p| u.eval(p).im())
}

/// Σ c_k x^a y^b t^c over monomials of total degree ≤ 4.
#[derive(Debug, Clone)]
pub struct Polynomial {
    pub terms: Vec<(Complex64, [u32; 3])>,
    pub real: bool,
}

impl Polynomial {
    pub fn random<R: Rng>(rng: &mut R, real: bool) -> Self {
        let mut terms = Vec::new();
        for a in 0..=4u32 {
            for b in 0..=(4 - a) {
                for c in 0..=(4 - a - b) {
                    let re = rng.gen_range(-1.0..1.0);
                    let im = if real { 0.0 } else { rng.gen_range(-1.0..1.0) };
                    terms.push((Complex64::new(re, im), [a, b, c]));
                }
            }
        }
        Self { terms, real }
    }
}

impl ScalarField for Polynomial {
    fn eval(&self, p: &Vars) -> Taylor2 {
        let mut out = Taylor2::default();
        for (c, [a, b, d]) in &self.terms {
            let m = p[0].powi(*a as i32) * p[1].powi(*b as i32) * p[2].powi(*d as i32);
            out += m * *c;
        }
        out
    }
    fn is_real_valued(&self) -> bool {
        self.real
    }
}

/// P(x, y, t)·exp(−(x² + y² + t²)/σ²): smooth with negligible tails, used
/// wherever compact support is wanted in an integration-by-parts check.
pub struct GaussianPacket {
    pub poly: Polynomial,
    pub center: HPoint,
    pub width: f64,
}

impl ScalarField for GaussianPacket {
    fn eval(&self, p: &Vars) -> Taylor2 {
        let q = vars_left_translate(&self.center, p);
        let r2 = (q[0] * q[0] + q[1] * q[1] + q[2] * q[2]) / (self.width * self.width);
        self.poly.eval(&q) * (-r2).exp()
    }
    fn is_real_valued(&self) -> bool {
        self.poly.real
    }
}
