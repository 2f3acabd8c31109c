//! Quadrature on H¹ for the contact volume θ∧dθ = κ dx dy dt.
//!
//! Two node families are provided. The tensor rule compactifies each axis by
//! ξ ↦ σξ/(1−ξ²) with Gauss–Legendre panels. The polar rule uses Korányi-polar
//! coordinates about a center, |z|² = ρ²cosψ, t = ρ²sinψ, in which
//! dx dy dt = ρ³ dρ dψ dθ; it is the default for bubble-type integrands and
//! accepts radial breakpoints so that cutoff seams fall on panel edges.

use gauss_quad::GaussLegendre;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bubbles::{bubble_field, standard_bubble, BubbleConstant, BubbleParams};
use crate::error::{Error, Result};
use crate::heis::{dilate_unchecked, group_mul, HPoint};
use crate::jets::{frame_jet, ScalarField};

use std::f64::consts::{FRAC_PI_2, PI, TAU};

/// The volume densities admitted by calibration.
pub const KAPPA_CANDIDATES: [f64; 3] = [1.0, 2.0, 4.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RuleKind {
    Polar,
    Tensor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleSpec {
    #[serde(default = "default_kind")]
    pub kind: RuleKind,
    /// Gauss–Legendre nodes per panel.
    #[serde(default = "default_order")]
    pub order: usize,
    /// Panels per axis (tensor) or per radial segment (polar).
    #[serde(default = "default_panels")]
    pub panels: usize,
    /// Angular trapezoid points (polar only).
    #[serde(default = "default_angles")]
    pub angles: usize,
    /// Length scale σ of the compactifying maps.
    #[serde(default = "default_scale")]
    pub scale: f64,
}

fn default_kind() -> RuleKind {
    RuleKind::Polar
}
fn default_order() -> usize {
    8
}
fn default_panels() -> usize {
    4
}
fn default_angles() -> usize {
    16
}
fn default_scale() -> f64 {
    1.0
}

impl Default for RuleSpec {
    fn default() -> Self {
        Self {
            kind: default_kind(),
            order: default_order(),
            panels: default_panels(),
            angles: default_angles(),
            scale: default_scale(),
        }
    }
}

impl RuleSpec {
    pub fn validate(&self) -> Result<()> {
        if self.order == 0 || self.panels == 0 || self.angles < 4 {
            return Err(Error::Config(format!(
                "quadrature needs order ≥ 1, panels ≥ 1, angles ≥ 4 (got {}, {}, {})",
                self.order, self.panels, self.angles
            )));
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(Error::Config(format!("quadrature scale must be positive, got {}", self.scale)));
        }
        Ok(())
    }

    /// The same rule with twice the nodes along every direction.
    pub fn refined(&self) -> Self {
        Self { panels: 2 * self.panels, angles: 2 * self.angles, ..self.clone() }
    }
}

fn gl(order: usize) -> Result<Vec<(f64, f64)>> {
    GaussLegendre::new(order)
        .map(|r| r.as_node_weight_pairs().to_vec())
        .map_err(|e| Error::Config(format!("Gauss–Legendre rule of order {order}: {e}")))
}

/// Nodes and weights of `panels` equal panels on (a, b).
fn panel_rule(a: f64, b: f64, panels: usize, order: usize) -> Result<Vec<(f64, f64)>> {
    let base = gl(order)?;
    let h = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(panels * order);
    for k in 0..panels {
        let lo = a + k as f64 * h;
        for &(x, w) in &base {
            out.push((lo + 0.5 * h * (x + 1.0), 0.5 * h * w));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub nodes: Vec<HPoint>,
    /// Weights including the density κ.
    pub weights: Vec<f64>,
    /// Marks nodes in the outermost (tail) panels, for tail diagnostics.
    pub tail: Vec<bool>,
    pub kappa: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegralReport {
    pub value: f64,
    /// Contribution of the tail panels.
    pub tail: f64,
    pub nodes: usize,
}

/// Deterministic pairwise summation.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 16 {
        return v.iter().sum();
    }
    let (a, b) = v.split_at(v.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        pairwise_sum(&self.weights)
    }

    /// Compactified tensor rule on R³, with σ_t = σ² for the t axis.
    pub fn tensor(spec: &RuleSpec, kappa: f64) -> Result<Self> {
        spec.validate()?;
        let axis = |sigma: f64| -> Result<Vec<(f64, f64, bool)>> {
            let r = panel_rule(-1.0, 1.0, spec.panels, spec.order)?;
            let edge = 1.0 - 2.0 / spec.panels as f64;
            Ok(r.into_iter()
                .map(|(x, w)| {
                    let d = 1.0 - x * x;
                    (sigma * x / d, w * sigma * (1.0 + x * x) / (d * d), x.abs() > edge)
                })
                .collect())
        };
        let ax = axis(spec.scale)?;
        let at = axis(spec.scale * spec.scale)?;
        let n = ax.len() * ax.len() * at.len();
        let (mut nodes, mut weights, mut tail) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
        for &(x, wx, ex) in &ax {
            for &(y, wy, ey) in &ax {
                for &(t, wt, et) in &at {
                    nodes.push(HPoint::new(x, y, t));
                    weights.push(kappa * wx * wy * wt);
                    tail.push(ex || ey || et);
                }
            }
        }
        Ok(Self { nodes, weights, tail, kappa })
    }

    /// Korányi-polar rule about `center`. Radial segments are [0, b₁], …,
    /// [b_m, ∞) with b the union of `breaks` and the scale-derived defaults.
    pub fn polar(spec: &RuleSpec, kappa: f64, center: &HPoint, breaks: &[f64]) -> Result<Self> {
        Self::polar_impl(spec, kappa, center, breaks, None)
    }

    /// The polar rule restricted to the Korányi ball of radius `outer` about `center`.
    pub fn ball(spec: &RuleSpec, kappa: f64, center: &HPoint, breaks: &[f64], outer: f64) -> Result<Self> {
        if !(outer > 0.0 && outer.is_finite()) {
            return Err(Error::Config(format!("ball rule radius must be positive, got {outer}")));
        }
        Self::polar_impl(spec, kappa, center, breaks, Some(outer))
    }

    fn polar_impl(spec: &RuleSpec, kappa: f64, center: &HPoint, breaks: &[f64], outer: Option<f64>) -> Result<Self> {
        spec.validate()?;
        let s = spec.scale;
        let mut b: Vec<f64> = vec![0.5 * s, s, 2.0 * s, 4.0 * s];
        for &x in breaks {
            if !(x > 0.0 && x.is_finite()) {
                return Err(Error::Config(format!("radial breakpoint must be positive, got {x}")));
            }
            b.push(x);
        }
        if let Some(o) = outer {
            b.retain(|x| *x < o * (1.0 - 1e-12));
            b.push(o);
        }
        b.sort_by(f64::total_cmp);
        b.dedup_by(|a, c| (*a - *c).abs() <= 1e-12 * c.abs());
        let mut radial: Vec<(f64, f64, bool)> = Vec::new();
        let mut lo = 0.0;
        for &hi in &b {
            for (r, w) in panel_rule(lo, hi, spec.panels.div_ceil(2), spec.order)? {
                radial.push((r, w, false));
            }
            lo = hi;
        }
        // tail [lo, ∞): ρ = lo/(1−u), u ∈ (0, 1)
        let tail_panels = if outer.is_some() { 0 } else { spec.panels };
        for (u, w) in panel_rule(0.0, 1.0, tail_panels.max(1), spec.order)?.into_iter().filter(|_| tail_panels > 0) {
            let d = 1.0 - u;
            radial.push((lo / d, w * lo / (d * d), true));
        }
        // ψ = (π/2) sin(πw/2) clusters nodes at the axis r = 0 where ψ → ±π/2.
        let psi: Vec<(f64, f64)> = panel_rule(-1.0, 1.0, spec.panels, spec.order)?
            .into_iter()
            .map(|(w, ww)| (FRAC_PI_2 * (0.5 * PI * w).sin(), ww * FRAC_PI_2 * 0.5 * PI * (0.5 * PI * w).cos()))
            .collect();
        let na = spec.angles;
        let n = radial.len() * psi.len() * na;
        let (mut nodes, mut weights, mut tail) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
        for &(rho, wr, is_tail) in &radial {
            for &(ps, wp) in &psi {
                let r = rho * ps.cos().max(0.0).sqrt();
                let t = rho * rho * ps.sin();
                for k in 0..na {
                    let th = TAU * (k as f64 + 0.5) / na as f64;
                    let q = HPoint::new(r * th.cos(), r * th.sin(), t);
                    nodes.push(group_mul(center, &q));
                    weights.push(kappa * wr * wp * (TAU / na as f64) * rho * rho * rho);
                    tail.push(is_tail);
                }
            }
        }
        Ok(Self { nodes, weights, tail, kappa })
    }

    /// The rule selected by `spec.kind`, centered at the identity.
    pub fn from_spec(spec: &RuleSpec, kappa: f64) -> Result<Self> {
        match spec.kind {
            RuleKind::Polar => Self::polar(spec, kappa, &HPoint::IDENTITY, &[]),
            RuleKind::Tensor => Self::tensor(spec, kappa),
        }
    }

    /// Transport to the bubble frame of (x, λ): nodes p ↦ x·δ_{1/λ}(p), weights × λ⁻⁴.
    pub fn adapted(&self, params: &BubbleParams) -> Self {
        let l = params.lambda;
        let jac = l.powi(-4);
        Self {
            nodes: self.nodes.iter().map(|p| group_mul(&params.center, &dilate_unchecked(1.0 / l, p))).collect(),
            weights: self.weights.iter().map(|w| w * jac).collect(),
            tail: self.tail.clone(),
            kappa: self.kappa,
        }
    }

    /// ∑ wᵢ u(pᵢ); evaluation is parallel, summation is pairwise and ordered.
    pub fn integrate<F>(&self, u: F) -> Result<IntegralReport>
    where
        F: Fn(&HPoint) -> Result<f64> + Sync,
    {
        let vals: Vec<f64> = self
            .nodes
            .par_iter()
            .zip(&self.weights)
            .enumerate()
            .map(|(i, (p, w))| {
                let v = u(p)?;
                if !v.is_finite() {
                    return Err(Error::Quadrature { index: i, at: *p, value: v });
                }
                Ok(v * w)
            })
            .collect::<Result<_>>()?;
        let tail: Vec<f64> = vals.iter().zip(&self.tail).filter(|(_, t)| **t).map(|(v, _)| *v).collect();
        Ok(IntegralReport { value: pairwise_sum(&vals), tail: pairwise_sum(&tail), nodes: vals.len() })
    }

    /// Integrates `n` quantities in one pass over the nodes.
    pub fn integrate_many<F>(&self, n: usize, u: F) -> Result<Vec<f64>>
    where
        F: Fn(&HPoint) -> Result<Vec<f64>> + Sync,
    {
        let vals: Vec<Vec<f64>> = self
            .nodes
            .par_iter()
            .zip(&self.weights)
            .enumerate()
            .map(|(i, (p, w))| {
                let v = u(p)?;
                if let Some(bad) = v.iter().find(|x| !x.is_finite()) {
                    return Err(Error::Quadrature { index: i, at: *p, value: *bad });
                }
                Ok(v.into_iter().map(|x| x * w).collect())
            })
            .collect::<Result<_>>()?;
        Ok((0..n).map(|k| pairwise_sum(&vals.iter().map(|v| v[k]).collect::<Vec<_>>())).collect())
    }

    pub fn integrate_field(&self, u: &dyn ScalarField) -> Result<IntegralReport> {
        self.integrate(|p| Ok(u.value(p).re))
    }

    /// ⟨u, v⟩_X = ∫ Re(Zu · conj(Zv)).
    pub fn x_inner(&self, u: &dyn ScalarField, v: &dyn ScalarField) -> Result<f64> {
        Ok(self
            .integrate(|p| {
                let a = frame_jet(u, p)?;
                let b = frame_jet(v, p)?;
                Ok((a.z * b.z.conj()).re)
            })?
            .value)
    }

    /// (∫|u|^p)^{1/p}.
    pub fn lp_norm(&self, u: &dyn ScalarField, p: f64) -> Result<f64> {
        if !(p >= 1.0) {
            return Err(Error::Domain(format!("Lp norm needs p ≥ 1, got {p}")));
        }
        Ok(self.integrate(|q| Ok(u.value(q).norm().powf(p)))?.value.powf(1.0 / p))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KappaCalibration {
    pub kappa: f64,
    /// ∫U⁴ dx dy dt (unit density).
    pub base_integral: f64,
    /// κ·∫U⁴ dx dy dt.
    pub integral: f64,
    pub rel_error: f64,
    /// Relative errors of every candidate, in the order of [`KAPPA_CANDIDATES`].
    pub candidates: Vec<(f64, f64)>,
}

pub const FOUR_PI_SQ: f64 = 4.0 * PI * PI;

/// Chooses κ ∈ {1, 2, 4} so that κ∫U⁴ dx dy dt = 4π² within `tol` relative.
pub fn calibrate_kappa(c: &BubbleConstant, spec: &RuleSpec, tol: f64) -> Result<KappaCalibration> {
    let rule = QuadratureRule::from_spec(spec, 1.0)?;
    let base = rule.integrate(|p| Ok(standard_bubble(c, p)?.powi(4)))?.value;
    let candidates: Vec<(f64, f64)> =
        KAPPA_CANDIDATES.iter().map(|&k| (k, (k * base - FOUR_PI_SQ).abs() / FOUR_PI_SQ)).collect();
    let (kappa, rel_error) = candidates.iter().cloned().fold((f64::NAN, f64::INFINITY), |b, c| if c.1 < b.1 { c } else { b });
    if !(rel_error < tol) {
        return Err(Error::Calibration(format!(
            "no volume density in {KAPPA_CANDIDATES:?} reproduces 4π² within {tol} (best κ = {kappa}, rel. error {rel_error:.3e})"
        )));
    }
    Ok(KappaCalibration { kappa, base_integral: base, integral: kappa * base, rel_error, candidates })
}

/// Checks a forced κ against the 4π² normalization.
pub fn check_kappa(c: &BubbleConstant, spec: &RuleSpec, kappa: f64, tol: f64) -> Result<f64> {
    let rule = QuadratureRule::from_spec(spec, kappa)?;
    let v = rule.integrate(|p| Ok(standard_bubble(c, p)?.powi(4)))?.value;
    let rel = (v - FOUR_PI_SQ).abs() / FOUR_PI_SQ;
    if rel < tol {
        Ok(rel)
    } else {
        Err(Error::Calibration(format!("κ = {kappa} gives ∫U⁴ = {v:.6} (rel. error {rel:.3e} vs 4π²)")))
    }
}

/// ∫U_{x,λ}⁴ with the rule adapted to (x, λ).
pub fn bubble_l4_power(c: &BubbleConstant, rule: &QuadratureRule, params: &BubbleParams) -> Result<f64> {
    let u = bubble_field(c, params)?;
    Ok(rule.adapted(params).integrate(|p| Ok(u.value(p).re.powi(4)))?.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bubbles::{calibrate_c1, probe_cloud, tangent_fields};
    use crate::jets::fields::{field_fn, zero};
    use crate::jets::Taylor2;
    use proptest::prelude::*;

    fn setup() -> (BubbleConstant, QuadratureRule) {
        let c = calibrate_c1().unwrap();
        let k = calibrate_kappa(&c, &RuleSpec::default(), 1e-3).unwrap();
        (c, QuadratureRule::from_spec(&RuleSpec::default(), k.kappa).unwrap())
    }

    #[test]
    fn kappa_is_four() {
        let c = calibrate_c1().unwrap();
        let k = calibrate_kappa(&c, &RuleSpec::default(), 1e-3).unwrap();
        assert_eq!(k.kappa, 4.0);
        assert!(k.rel_error < 1e-3);
        assert!(check_kappa(&c, &RuleSpec::default(), 2.0, 1e-3).is_err());
    }

    #[test]
    fn bubble_l4_reproduces_four_pi_squared() {
        let (c, rule) = setup();
        let v = rule.integrate(|p| Ok(standard_bubble(&c, p)?.powi(4))).unwrap();
        assert!((v.value - FOUR_PI_SQ).abs() < 1e-3 * FOUR_PI_SQ, "{}", v.value);
        let fine = QuadratureRule::from_spec(&RuleSpec::default().refined(), 4.0).unwrap();
        let w = fine.integrate(|p| Ok(standard_bubble(&c, p)?.powi(4))).unwrap().value;
        assert!((w - FOUR_PI_SQ).abs() < 5e-4 * FOUR_PI_SQ);
        assert!((w - v.value).abs() < 5e-4 * w);
    }

    #[test]
    fn tensor_rule_agrees() {
        let c = calibrate_c1().unwrap();
        let spec = RuleSpec { kind: RuleKind::Tensor, panels: 6, ..RuleSpec::default() };
        let rule = QuadratureRule::from_spec(&spec, 4.0).unwrap();
        let v = rule.integrate(|p| Ok(standard_bubble(&c, p)?.powi(4))).unwrap().value;
        assert!((v - FOUR_PI_SQ).abs() < 1e-2 * FOUR_PI_SQ, "{v}");
        assert!(rule.weights.iter().all(|w| *w > 0.0));
    }

    #[test]
    fn gaussian_moments() {
        // ∫ e^{−|z|²−t²} dx dy dt = π^{3/2}
        let rule = QuadratureRule::from_spec(&RuleSpec::default(), 1.0).unwrap();
        let v = rule.integrate(|p| Ok((-(p.x * p.x + p.y * p.y) - p.t * p.t).exp())).unwrap().value;
        assert!((v - PI.powf(1.5)).abs() < 1e-5 * PI.powf(1.5), "{v}");
        let z = rule.integrate(|_| Ok(0.0)).unwrap();
        assert_eq!(z.value, 0.0);
        assert!(rule.lp_norm(&*zero(), 2.0).unwrap() == 0.0);
    }

    #[test]
    fn nonfinite_is_reported() {
        let rule = QuadratureRule::from_spec(&RuleSpec::default(), 1.0).unwrap();
        let e = rule.integrate(|p| Ok(if p.t > 1.0 { f64::NAN } else { 0.0 })).unwrap_err();
        assert!(matches!(e, Error::Quadrature { .. }));
    }

    #[test]
    fn invariance_over_bubble_family() {
        let (c, rule) = setup();
        for (i, p) in probe_cloud(5, 31, 2.0).into_iter().enumerate() {
            let params = BubbleParams::new(p, 0.5 + 0.4 * i as f64).unwrap();
            let v = bubble_l4_power(&c, &rule, &params).unwrap();
            assert!((v - FOUR_PI_SQ).abs() < 2e-3 * FOUR_PI_SQ);
        }
    }

    #[test]
    fn translated_rule_on_untranslated_integrand() {
        // The polar rule about a point other than the bubble center still integrates U⁴.
        let c = calibrate_c1().unwrap();
        let spec = RuleSpec { angles: 32, ..RuleSpec::default() };
        let rule = QuadratureRule::polar(&spec, 4.0, &HPoint::new(0.3, 0.0, 0.2), &[0.7]).unwrap();
        let v = rule.integrate(|p| Ok(standard_bubble(&c, p)?.powi(4))).unwrap().value;
        assert!((v - FOUR_PI_SQ).abs() < 1e-3 * FOUR_PI_SQ, "{v}");
    }

    #[test]
    fn x_inner_integration_by_parts() {
        // Compactly supported smooth pair: ⟨u, v⟩_X = −∫ u Δ₀ v.
        let bump = |c: [f64; 3], k: f64| {
            field_fn(true, move |p| {
                let r = (p[0] - c[0]) * (p[0] - c[0]) + (p[1] - c[1]) * (p[1] - c[1]) + (p[2] - c[2]) * (p[2] - c[2]);
                (r * (-k)).exp()
            })
        };
        let u = bump([0.1, 0.0, 0.2], 1.0);
        let v = bump([-0.2, 0.3, 0.0], 2.0);
        let rule = QuadratureRule::from_spec(&RuleSpec { order: 12, ..RuleSpec::default() }, 4.0).unwrap();
        let a = rule.x_inner(&*u, &*v).unwrap();
        let b = rule
            .integrate(|p| Ok((u.value(p) * frame_jet(&*v, p)?.flat_sublaplacian()).re))
            .unwrap()
            .value;
        assert!((a + b).abs() < 1e-5 * a.abs(), "{a} {b}");
        assert!(rule.x_inner(&*u, &*u).unwrap() > 0.0);
    }

    #[test]
    fn t_parity_of_tangent_pairing() {
        let (c, rule) = setup();
        let u = bubble_field(&c, &BubbleParams::standard()).unwrap();
        let tf = tangent_fields(&c, &BubbleParams::standard()).unwrap();
        let v = rule.x_inner(&*u, &*tf.t).unwrap();
        assert!(v.abs() < 1e-10);
    }

    #[test]
    fn sobolev_ratio_is_finite() {
        let (c, rule) = setup();
        let u = bubble_field(&c, &BubbleParams::standard()).unwrap();
        let l4 = rule.lp_norm(&*u, 4.0).unwrap();
        let x = rule.x_inner(&*u, &*u).unwrap().sqrt();
        assert!((l4.powi(4) - FOUR_PI_SQ).abs() < 1e-3 * FOUR_PI_SQ);
        // ‖U‖_X² = ∫U(−Δ₀U) = ¼∫U L U = ½∫U⁴.
        assert!((x * x - 0.5 * FOUR_PI_SQ).abs() < 2e-3 * FOUR_PI_SQ, "{x}");
    }

    #[test]
    fn ball_rule_volume() {
        // |B_ρ| = ∫₀^ρ r³dr · ∫dψ · 2π = ρ⁴ π²/2 in dx dy dt.
        let rule = QuadratureRule::ball(&RuleSpec::default(), 1.0, &HPoint::new(1.0, 2.0, 0.5), &[0.3], 1.5).unwrap();
        let v = rule.total_weight();
        assert!((v - 1.5f64.powi(4) * PI * PI / 2.0).abs() < 1e-12 * v, "{v}");
        assert!(rule.nodes.iter().all(|p| crate::heis::koranyi_distance(&HPoint::new(1.0, 2.0, 0.5), p) < 1.5));
    }

    #[test]
    fn bad_specs_rejected() {
        assert!(QuadratureRule::from_spec(&RuleSpec { order: 0, ..RuleSpec::default() }, 1.0).is_err());
        assert!(QuadratureRule::from_spec(&RuleSpec { scale: -1.0, ..RuleSpec::default() }, 1.0).is_err());
        assert!(QuadratureRule::polar(&RuleSpec::default(), 1.0, &HPoint::IDENTITY, &[f64::NAN]).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]
        #[test]
        fn refinement_is_monotone_in_positivity(a in 0.5f64..2.0) {
            let rule = QuadratureRule::from_spec(&RuleSpec::default(), 1.0).unwrap();
            prop_assert!(rule.weights.iter().all(|w| *w > 0.0));
            let f = field_fn(true, move |p| {
                let r = p[0] * p[0] + p[1] * p[1];
                (Taylor2::real(1.0) + r * r * a + p[2] * p[2]).recip()
            });
            let v = rule.integrate_field(&*f).unwrap().value;
            prop_assert!(v > 0.0);
        }

        #[test]
        fn x_inner_symmetric(l in 0.5f64..2.0, x in -1.0f64..1.0) {
            let c = calibrate_c1().unwrap();
            let rule = QuadratureRule::from_spec(&RuleSpec::default(), 4.0).unwrap();
            let params = BubbleParams::new(HPoint::new(x, 0.0, 0.0), l).unwrap();
            let tf = tangent_fields(&c, &params).unwrap().real_basis();
            let r = rule.adapted(&params);
            let a = r.x_inner(&*tf[0], &*tf[3]).unwrap();
            let b = r.x_inner(&*tf[3], &*tf[0]).unwrap();
            prop_assert!((a - b).abs() < 1e-12 * (1.0 + a.abs()));
        }
    }
}
