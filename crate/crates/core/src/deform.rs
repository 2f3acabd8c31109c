//! Deformations Z̃ = Z + f Z̄ of the flat CR structure.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heis::{group_mul, koranyi_distance, HPoint, KoranyiBall};
use crate::jets::fields::{field_fn, vars_dilate, vars_left_translate, vars_mul_left, Field, Vars};
use crate::jets::{frame_jet, gamma2_norm_estimate, Jet2, ScalarField, Taylor2};

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Clone)]
pub struct Deformation {
    pub f: Field,
    /// Balls outside of which f vanishes; `None` when f has unbounded support.
    pub support: Option<Vec<KoranyiBall>>,
    pub sup_bound: f64,
    /// Per support ball, the gauge radii about its center where f loses smoothness.
    pub seams: Vec<Vec<f64>>,
    flat: bool,
}

impl std::fmt::Debug for Deformation {
    fn fmt(&self, fm: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        fm.debug_struct("Deformation")
            .field("support", &self.support)
            .field("sup_bound", &self.sup_bound)
            .field("flat", &self.flat)
            .finish()
    }
}

impl Deformation {
    pub fn zero() -> Self {
        Self {
            f: crate::jets::fields::zero(),
            support: Some(Vec::new()),
            sup_bound: 0.0,
            seams: Vec::new(),
            flat: true,
        }
    }

    pub fn constant(c: Complex64) -> Result<Self> {
        check_amplitude(c.norm())?;
        Ok(Self {
            f: crate::jets::fields::constant(c),
            support: None,
            sup_bound: c.norm(),
            seams: Vec::new(),
            flat: c == Complex64::new(0.0, 0.0),
        })
    }

    /// f ≡ 0 identically.
    /// An arbitrary deformation with no support information; `sup_bound` is the
    /// caller's bound on |f|.
    pub fn from_field(f: Field, sup_bound: f64) -> Self {
        Self { f, support: None, sup_bound, seams: Vec::new(), flat: false }
    }

    pub fn is_flat(&self) -> bool {
        self.flat
    }

    pub fn jet(&self, p: &HPoint) -> Result<Jet2> {
        frame_jet(&*self.f, p)
    }

    pub fn value(&self, p: &HPoint) -> Complex64 {
        self.f.value(p)
    }

    /// f∘τ with τ(p) = x·δ_{1/λ}(p): the structure seen from the frame in which
    /// U_{x,λ} becomes the standard bubble.
    pub fn normalized(&self, x: &HPoint, lambda: f64) -> Self {
        let f = self.f.clone();
        let x0 = *x;
        let inv = 1.0 / lambda;
        Self {
            f: field_fn(false, move |p: &Vars| f.eval(&vars_mul_left(&x0, &vars_dilate(inv, p)))),
            support: self
                .support
                .as_ref()
                .map(|bs| bs.iter().map(|b| b.normalized(x, lambda)).collect()),
            sup_bound: self.sup_bound,
            seams: self.seams.iter().map(|r| r.iter().map(|v| v * lambda).collect()).collect(),
            flat: self.flat,
        }
    }

    /// Whether p lies outside every declared support ball (always false for
    /// unbounded support).
    pub fn outside_support(&self, p: &HPoint) -> bool {
        match &self.support {
            None => false,
            Some(bs) => bs.iter().all(|b| !b.contains(p)),
        }
    }
}

fn check_amplitude(s: f64) -> Result<()> {
    if !(s.abs() < 1.0) {
        return Err(Error::Domain(format!(
            "deformation amplitude {s} violates |f| < 1 (not a CR structure)"
        )));
    }
    Ok(())
}

/// φ = ((t − i(1+|z|²)) / (t + i(1+|z|²)))³ on coordinate jets.
pub fn rossi_phi_jet(p: &Vars) -> Taylor2 {
    let a = 1.0 + p[0] * p[0] + p[1] * p[1];
    let g = p[2] + a * I;
    (g.conj() / g).powi(3)
}

pub fn rossi_phi(p: &HPoint) -> Complex64 {
    let g = Complex64::new(p.t, 1.0 + p.x * p.x + p.y * p.y);
    (g.conj() / g).powi(3)
}

pub fn rossi_phi_field() -> Field {
    field_fn(false, rossi_phi_jet)
}

pub fn rossi_deformation(s: f64) -> Result<Deformation> {
    check_amplitude(s)?;
    if s == 0.0 {
        return Ok(Deformation::zero());
    }
    Ok(Deformation {
        f: field_fn(false, move |p| rossi_phi_jet(p) * s),
        support: None,
        seams: Vec::new(),
        sup_bound: s.abs(),
        flat: false,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GluingSpec {
    pub centers: Vec<HPoint>,
    pub inner_radii: Vec<f64>,
    pub amplitudes: Vec<f64>,
    #[serde(default = "default_annulus")]
    pub annulus_factor: f64,
    #[serde(default = "default_profile")]
    pub profile: String,
}

fn default_annulus() -> f64 {
    2.0
}

fn default_profile() -> String {
    "quintic".into()
}

impl GluingSpec {
    pub fn single(center: HPoint, r: f64, s: f64) -> Self {
        Self {
            centers: vec![center],
            inner_radii: vec![r],
            amplitudes: vec![s],
            annulus_factor: default_annulus(),
            profile: default_profile(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.centers.len();
        if self.inner_radii.len() != n || self.amplitudes.len() != n {
            return Err(Error::Config(format!(
                "gluing spec has {} centers, {} radii, {} amplitudes",
                n,
                self.inner_radii.len(),
                self.amplitudes.len()
            )));
        }
        if self.profile != "quintic" {
            return Err(Error::Config(format!("unknown cutoff profile '{}'", self.profile)));
        }
        if !(self.annulus_factor > 1.0 && self.annulus_factor.is_finite()) {
            return Err(Error::Config(format!(
                "annulus factor must exceed 1 for a C² cutoff, got {}",
                self.annulus_factor
            )));
        }
        for (k, (&r, &s)) in self.inner_radii.iter().zip(&self.amplitudes).enumerate() {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::Config(format!("radius {k} must be positive, got {r}")));
            }
            check_amplitude(s)?;
        }
        let balls = self.outer_balls()?;
        for i in 0..n {
            for j in (i + 1)..n {
                if !balls[i].disjoint_from(&balls[j]) {
                    return Err(Error::Config(format!("balls {i} and {j} overlap")));
                }
            }
        }
        Ok(())
    }

    pub fn outer_balls(&self) -> Result<Vec<KoranyiBall>> {
        self.centers
            .iter()
            .zip(&self.inner_radii)
            .map(|(c, r)| KoranyiBall::new(*c, self.annulus_factor * r))
            .collect()
    }
}

/// S(u) = 6u⁵ − 15u⁴ + 10u³ and its first two derivatives.
fn smoothstep(u: f64) -> (f64, f64, f64) {
    if u <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    if u >= 1.0 {
        return (1.0, 0.0, 0.0);
    }
    let s = u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
    let s1 = 30.0 * u * u * (u - 1.0) * (u - 1.0);
    let s2 = 60.0 * u * (2.0 * u - 1.0) * (u - 1.0);
    (s, s1, s2)
}

/// χ(ρ/r) as a scalar function of its radius argument: 1 on [0, 1], 0 on [A, ∞).
pub fn cutoff_profile(rho_over_r: f64, a: f64) -> f64 {
    1.0 - smoothstep((rho_over_r - 1.0) / (a - 1.0)).0
}

/// Cutoff jet as a function of σ = |z|⁴ + t² of the translated point, which
/// avoids the non-smooth gauge itself at the ball center.
fn cutoff_jet(sigma: &Taylor2, r: f64, a: f64) -> Taylor2 {
    let s = sigma.v.re;
    if s <= r.powi(4) {
        return Taylor2::real(1.0);
    }
    if s >= (a * r).powi(4) {
        return Taylor2::real(0.0);
    }
    let rho = s.powf(0.25);
    let d1 = 0.25 * rho / s;
    let d2 = -0.1875 * rho / (s * s);
    let k = 1.0 / (r * (a - 1.0));
    let u = (rho / r - 1.0) / (a - 1.0);
    let (sv, s1, s2) = smoothstep(u);
    let u1 = d1 * k;
    let u2 = d2 * k;
    let f0 = 1.0 - sv;
    let f1 = -s1 * u1;
    let f2 = -(s2 * u1 * u1 + s1 * u2);
    sigma.chain(f0.into(), f1.into(), f2.into())
}

fn gauge_sigma(q: &Vars) -> Taylor2 {
    let m = q[0] * q[0] + q[1] * q[1];
    m * m + q[2] * q[2]
}

pub fn glued_deformation(spec: &GluingSpec) -> Result<Deformation> {
    spec.validate()?;
    let balls = spec.outer_balls()?;
    let items: Arc<Vec<(HPoint, f64, f64)>> = Arc::new(
        spec.centers
            .iter()
            .zip(&spec.inner_radii)
            .zip(&spec.amplitudes)
            .filter(|(_, &s)| s != 0.0)
            .map(|((c, &r), &s)| (*c, r, s))
            .collect(),
    );
    if items.is_empty() {
        return Ok(Deformation::zero());
    }
    let a = spec.annulus_factor;
    let sup_bound = spec.amplitudes.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    let f = field_fn(false, move |p: &Vars| {
        let mut out = Taylor2::default();
        let mut phi: Option<Taylor2> = None;
        for (c, r, s) in items.iter() {
            let q = vars_left_translate(c, p);
            let sigma = gauge_sigma(&q);
            if sigma.v.re >= (a * r).powi(4) {
                continue;
            }
            let ph = *phi.get_or_insert_with(|| rossi_phi_jet(p));
            out += cutoff_jet(&sigma, *r, a) * ph * *s;
        }
        out
    });
    let seams = spec.inner_radii.iter().map(|r| vec![*r, a * r]).collect();
    Ok(Deformation { f, support: Some(balls), sup_bound, seams, flat: false })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeformationReport {
    pub sup_f: f64,
    pub gamma2: f64,
    pub support_ok: bool,
    pub alpha: f64,
    pub pass: bool,
}

pub fn validate_deformation(d: &Deformation, probes: &[HPoint], alpha: f64) -> Result<DeformationReport> {
    let mut sup_f: f64 = 0.0;
    let mut support_ok = true;
    for p in probes {
        let v = d.value(p).norm();
        sup_f = sup_f.max(v);
        if d.outside_support(p) && v != 0.0 {
            support_ok = false;
        }
    }
    let gamma2 = gamma2_norm_estimate(&*d.f, probes)?;
    let pass = sup_f < 1.0 && sup_f <= d.sup_bound + 1e-12 && support_ok && gamma2 <= alpha;
    Ok(DeformationReport { sup_f, gamma2, support_ok, alpha, pass })
}

/// Probe points filling a Korányi ball: gauge radii spread over [0, radius).
pub fn ball_probes(ball: &KoranyiBall, n: usize, seed: u64) -> Vec<HPoint> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let rho = ball.radius * rng.gen_range(0.0..1.0f64);
            let psi = rng.gen_range(-std::f64::consts::FRAC_PI_2..std::f64::consts::FRAC_PI_2);
            let th = rng.gen_range(0.0..std::f64::consts::TAU);
            let r = rho * psi.cos().max(0.0).sqrt();
            let q = HPoint::new(r * th.cos(), r * th.sin(), rho * rho * psi.sin());
            group_mul(&ball.center, &q)
        })
        .collect()
}

/// Korányi distance from the nearest support ball center, scaled by its radius.
pub fn relative_gauge_radius(ball: &KoranyiBall, p: &HPoint) -> f64 {
    koranyi_distance(&ball.center, p) / ball.radius
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bubbles::probe_cloud;
    use crate::heis::dilate_unchecked;
    use crate::jets::fd_fallback_jet;

    #[test]
    fn rossi_phi_examples() {
        assert!((rossi_phi(&HPoint::IDENTITY) - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
        for p in probe_cloud(1000, 3, 10.0) {
            assert!((rossi_phi(&p).norm() - 1.0).abs() < 1e-14);
        }
        assert!((rossi_phi(&HPoint::new(0.0, 0.0, 1e8)) - 1.0).norm() < 1e-7);
        let jet = rossi_phi_field().value(&HPoint::new(0.3, -0.5, 0.7));
        assert!((jet - rossi_phi(&HPoint::new(0.3, -0.5, 0.7))).norm() < 1e-15);
    }

    #[test]
    fn rossi_deformation_examples() {
        assert!(rossi_deformation(0.0).unwrap().is_flat());
        let d = rossi_deformation(0.1).unwrap();
        let probes = probe_cloud(200, 4, 3.0);
        let sup = probes.iter().map(|p| d.value(p).norm()).fold(0.0, f64::max);
        assert!((sup - 0.1).abs() < 1e-14);
        assert!(rossi_deformation(1.0).is_err());
        assert!(rossi_deformation(-1.5).is_err());
    }

    #[test]
    fn glued_examples() {
        let c = HPoint::new(1.0, 0.0, 0.0);
        let d = glued_deformation(&GluingSpec::single(c, 0.1, 0.05)).unwrap();
        assert!((d.value(&c) - 0.05 * rossi_phi(&c)).norm() < 1e-15);
        assert_eq!(d.value(&HPoint::new(2.0, 0.0, 0.0)), Complex64::new(0.0, 0.0));
        let ball = KoranyiBall::new(c, 0.2).unwrap();
        for p in ball_probes(&ball, 500, 5) {
            assert!(d.value(&p).norm() <= 0.05 + 1e-15);
        }
    }

    #[test]
    fn glued_spec_errors() {
        let mut spec = GluingSpec::single(HPoint::IDENTITY, 0.1, 0.05);
        spec.centers.push(HPoint::new(0.3, 0.0, 0.0));
        spec.inner_radii.push(0.1);
        spec.amplitudes.push(0.05);
        assert!(glued_deformation(&spec).is_err());
        let bad = GluingSpec::single(HPoint::IDENTITY, 0.1, 1.0);
        assert!(glued_deformation(&bad).is_err());
        let mut bad = GluingSpec::single(HPoint::IDENTITY, 0.1, 0.1);
        bad.profile = "gaussian".into();
        assert!(glued_deformation(&bad).is_err());
        bad.profile = "quintic".into();
        bad.annulus_factor = 1.0;
        assert!(glued_deformation(&bad).is_err());
    }

    #[test]
    fn cutoff_profile_shape() {
        assert_eq!(cutoff_profile(0.5, 2.0), 1.0);
        assert_eq!(cutoff_profile(2.5, 2.0), 0.0);
        let mut last = 1.0;
        for k in 0..=100 {
            let v = cutoff_profile(1.0 + k as f64 / 100.0, 2.0);
            assert!(v <= last);
            last = v;
        }
    }

    #[test]
    fn glued_jets_continuous_across_seams() {
        let c = HPoint::new(0.5, -0.2, 0.3);
        let r = 0.3;
        let d = glued_deformation(&GluingSpec::single(c, r, 0.08)).unwrap();
        for rr in [r, 2.0 * r] {
            for dir in [HPoint::new(1.0, 0.0, 0.0), HPoint::new(0.0, 0.0, 1.0), HPoint::new(0.6, 0.3, 0.5)] {
                let n = crate::heis::koranyi_norm(&dir);
                let at = |rho: f64| group_mul(&c, &dilate_unchecked(rho / n, &dir));
                let a = d.jet(&at(rr * (1.0 - 1e-9))).unwrap();
                let b = d.jet(&at(rr * (1.0 + 1e-9))).unwrap();
                for (u, v) in [(a.value, b.value), (a.z, b.z), (a.zz, b.zz), (a.zzb, b.zzb), (a.zbzb, b.zbzb)] {
                    assert!((u - v).norm() < 1e-6, "seam {rr}: {u} vs {v}");
                }
                // The FD oracle straddling the seam agrees with the exact jet.
                let p = at(rr);
                let e = d.jet(&p).unwrap();
                // The third derivative jumps at a seam, so the stencil error is O(h).
                let f = fd_fallback_jet(|q| d.value(q), &p, 1e-5).unwrap();
                assert!((e.z - f.z).norm() < 1e-6, "{} vs {}", e.z, f.z);
                assert!((e.zzb - f.zzb).norm() < 1e-3, "{} vs {}", e.zzb, f.zzb);
                // Away from the seams the exact jet matches the stencil to high order.
                let m = at(1.5 * r);
                let e = d.jet(&m).unwrap();
                let f = fd_fallback_jet(|q| d.value(q), &m, 1e-3).unwrap();
                assert!((e.zzb - f.zzb).norm() < 1e-6, "{} vs {}", e.zzb, f.zzb);
                assert!((e.zz - f.zz).norm() < 1e-6, "{} vs {}", e.zz, f.zz);
            }
        }
    }

    #[test]
    fn validate_examples() {
        let probes = probe_cloud(100, 6, 2.0);
        let r = validate_deformation(&Deformation::zero(), &probes, 1.0).unwrap();
        assert_eq!(r.gamma2, 0.0);
        assert!(r.pass);
        let r = validate_deformation(&rossi_deformation(0.1).unwrap(), &probes, 10.0).unwrap();
        assert!(r.pass && r.gamma2 >= 0.1);
        let spec = GluingSpec::single(HPoint::IDENTITY, 0.1, 0.1);
        let d = glued_deformation(&spec).unwrap();
        let mut probes = ball_probes(&KoranyiBall::new(HPoint::IDENTITY, 0.25).unwrap(), 300, 7);
        probes.push(HPoint::new(3.0, 0.0, 0.0));
        let r = validate_deformation(&d, &probes, 1e6).unwrap();
        assert!(r.support_ok);
    }

    #[test]
    fn normalized_deformation_is_pullback() {
        let d = rossi_deformation(0.07).unwrap();
        let x = HPoint::new(0.4, 0.2, -0.3);
        let l = 2.5;
        let n = d.normalized(&x, l);
        let q = HPoint::new(0.3, -0.1, 0.8);
        let p = group_mul(&x, &dilate_unchecked(1.0 / l, &q));
        assert!((n.value(&q) - d.value(&p)).norm() < 1e-15);
        assert!((dilate_unchecked(l, &crate::heis::left_translate(&x, &p)).max_abs_diff(&q)) < 1e-14);
    }
}
