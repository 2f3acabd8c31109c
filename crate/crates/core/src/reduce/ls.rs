//! The Lyapunov–Schmidt step: for fixed (x, λ), find v ⊥ T_{U}ℳ with
//! π∇𝒥_J(U_{x,λ} + v) = 0.
//!
//! Everything is computed in the normalized frame where U_{x,λ} is the
//! standard bubble (𝒥_J is invariant under the CR-conformal change of frame).
//! There U + v = W₀ + w: W₀ is a closed-form warm start, w a finite element
//! remainder with zero Dirichlet data that is X-orthogonal to the tangent fields.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::functional::{functional_value, solve4, support_rules, warm_start, Gram, Lab};
use super::grid::{GpCoef, Grid, GridField, GridSpec, PointBasis, StencilMatrix};
use super::krylov::{cg, dot, minres};
use crate::bubbles::{tangent_fields, BubbleParams};
use crate::deform::Deformation;
use crate::error::{Error, Result};
use crate::heis::HPoint;
use crate::jets::fields::{scaled, sum, Field};
use crate::jets::{frame_jet, ScalarField};
use crate::webster::{conformal_from_jets, curvature_defining, deformation_jet, horizontal_metric};

const INNER_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LsOptions {
    /// Stop when ‖π∇𝒥‖_X < tol·‖U‖_X.
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_outer")]
    pub max_outer: usize,
    /// Start from the exact solution of the frozen constant structure.
    #[serde(default = "default_true")]
    pub warm_start: bool,
    /// Relative tolerance of the linearized (MINRES) solve.
    #[serde(default = "default_newton_tol")]
    pub newton_tol: f64,
}

fn default_tol() -> f64 {
    1e-9
}
fn default_max_outer() -> usize {
    20
}
fn default_true() -> bool {
    true
}
fn default_newton_tol() -> f64 {
    1e-8
}

impl Default for LsOptions {
    fn default() -> Self {
        Self { tol: default_tol(), max_outer: default_max_outer(), warm_start: true, newton_tol: default_newton_tol() }
    }
}

/// Per-grid data shared by all cells: X-stiffness, tangent loads and their
/// Riesz representatives.
pub struct LsContext {
    pub lab: Lab,
    pub grid: Arc<Grid>,
    pub stiffness: StencilMatrix,
    kdiag: Vec<f64>,
    /// Gram matrix of the tangent fields at the standard bubble.
    pub gram: Gram,
    pub basis: [Field; 4],
    /// bᵢ·w = ⟨eᵢ, w⟩_X for interior w.
    pub loads: [Vec<f64>; 4],
    riesz: [Vec<f64>; 4],
    pub gram_h: Gram,
    pub u_norm: f64,
}

fn xy_real(u: &dyn ScalarField, p: &HPoint) -> Result<(f64, f64, f64)> {
    let j = frame_jet(u, p)?;
    let (x, y) = j.xy();
    Ok((j.value.re, x.re, y.re))
}

impl LsContext {
    pub fn new(lab: Lab, spec: &GridSpec) -> Result<Self> {
        let grid = Grid::new(spec, lab.kappa.kappa)?;
        let stiffness = grid.x_stiffness();
        let kdiag = stiffness.diag();
        let params = BubbleParams::standard();
        let gram = super::functional::gram_matrix(&lab, &params)?;
        let basis = tangent_fields(&lab.constant, &params)?.real_basis();
        let mut loads: [Vec<f64>; 4] = Default::default();
        let mut riesz: [Vec<f64>; 4] = Default::default();
        for (i, e) in basis.iter().enumerate() {
            let s: Vec<[f64; 3]> = grid
                .gauss
                .par_iter()
                .map(|g| xy_real(&**e, &g.p).map(|(_, x, y)| [0.0, 0.25 * x, 0.25 * y]))
                .collect::<Result<_>>()?;
            loads[i] = grid.load(&s);
            let mut r = vec![0.0; grid.dof()];
            cg(|a, b| stiffness.apply(a, b), &kdiag, &loads[i], &mut r, INNER_TOL, 20 * grid.dof())?;
            riesz[i] = r;
        }
        let mut gram_h = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                gram_h[i][j] = 0.5 * (dot(&loads[i], &riesz[j]) + dot(&loads[j], &riesz[i]));
            }
        }
        super::functional::check_gram(&gram_h)?;
        let u_norm = (0.5 * lab.kappa.integral).sqrt();
        Ok(Self { lab, grid, stiffness, kdiag, gram, basis, loads, riesz, gram_h, u_norm })
    }

    fn tangent_pairing(&self, v: &[f64]) -> [f64; 4] {
        std::array::from_fn(|i| dot(&self.loads[i], v))
    }

    /// v − Σ cᵢ rᵢ with ⟨·, eᵢ⟩_X = 0 afterwards.
    fn project_interior(&self, v: &mut [f64]) -> Result<[f64; 4]> {
        let c = solve4(&self.gram_h, self.tangent_pairing(v))?;
        for i in 0..4 {
            for (a, r) in v.iter_mut().zip(&self.riesz[i]) {
                *a -= c[i] * r;
            }
        }
        Ok(c)
    }

    /// X-representative g = K⁻¹r of a load vector, with ‖g‖_X and ‖πg‖_X.
    fn represent(&self, r: &[f64]) -> Result<(Vec<f64>, f64, f64)> {
        let mut g = vec![0.0; r.len()];
        cg(|a, b| self.stiffness.apply(a, b), &self.kdiag, r, &mut g, INNER_TOL, 20 * r.len())?;
        let full = dot(&g, r).max(0.0).sqrt();
        // K πg = r − Σ cᵢbᵢ, so ‖πg‖² is formed from small vectors only.
        let mut pg = g.clone();
        let c = self.project_interior(&mut pg)?;
        let mut kpg = r.to_vec();
        for i in 0..4 {
            for (a, b) in kpg.iter_mut().zip(&self.loads[i]) {
                *a -= c[i] * b;
            }
        }
        Ok((g, full, dot(&pg, &kpg).max(0.0).sqrt()))
    }

    /// Gram matrix at (x, λ) from the standard one: D G D with D = diag(λ, λ, λ², 1).
    pub fn gram_at(&self, params: &BubbleParams) -> Gram {
        let l = params.lambda;
        let d = [l, l, l * l, 1.0];
        std::array::from_fn(|i| std::array::from_fn(|j| d[i] * d[j] * self.gram[i][j]))
    }
}

/// Pointwise data of one cell at a Gauss point.
#[derive(Debug, Clone, Copy)]
struct GpData {
    w0: f64,
    lw0: f64,
    r: f64,
    m: [f64; 3],
    /// ¼X(W₀ − U), ¼Y(W₀ − U).
    dx: f64,
    dy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LsStep {
    pub residual: f64,
    pub factor: f64,
    pub krylov_iterations: usize,
    pub step_length: f64,
}

#[derive(Debug, Clone)]
pub struct ReducedState {
    pub params: BubbleParams,
    /// v = W₀ − U + w at the grid nodes, in the normalized frame.
    pub v: GridField,
    /// ‖π∇𝒥(U + v)‖_X.
    pub residual_norm: f64,
    pub iterations: usize,
    /// Tangent Gram matrix at (x, λ).
    pub gram: Gram,
    /// 𝒥_J(U_{x,λ} + v).
    pub value: f64,
    /// 𝒥_J(W₀).
    pub base_value: f64,
    pub v_norm: f64,
    /// max |⟨v, eᵢ⟩_X| / (‖v‖_X ‖eᵢ‖_X).
    pub orthogonality: f64,
    /// Unprojected ‖∇𝒥(U + v)‖_X.
    pub full_gradient: f64,
    /// ⟨∇𝒥(U + v), eᵢ⟩_X.
    pub tangent_gradient: [f64; 4],
    /// Coefficients of the tangent part of ∇𝒥(U + v) in the basis eᵢ.
    pub tangent_coefficients: [f64; 4],
    /// Frozen structure value f(x) used for the warm start.
    pub frozen: Complex64,
    pub warm_coefficients: [f64; 4],
    pub steps: Vec<LsStep>,
    /// max of U_{x,λ} + v over the grid nodes, in the original frame.
    pub peak: f64,
}

/// Deformation terms at a node of a support-ball rule: (L_J − L_{J₀})W₀,
/// M − M₀ and R. The grid's Gauss points then carry only flat terms.
#[derive(Debug, Clone, Copy)]
struct ExtraData {
    w0: f64,
    dlw0: f64,
    r: f64,
    dm: [f64; 3],
}

struct Cell<'a> {
    ctx: &'a LsContext,
    gp: Vec<GpData>,
    pts: Vec<PointBasis>,
    extra: Vec<ExtraData>,
}

impl Cell<'_> {
    fn gradient(&self, w: &[f64]) -> Vec<f64> {
        let wi = self.ctx.grid.interpolate_interior(w);
        let s: Vec<[f64; 3]> = self
            .gp
            .iter()
            .zip(&wi)
            .map(|(d, w)| {
                let u = d.w0 + w[0];
                [
                    2.0 * d.lw0 + 2.0 * d.r * w[0] - 4.0 * u * u * u,
                    8.0 * (d.m[0] * w[1] + d.m[1] * w[2]),
                    8.0 * (d.m[1] * w[1] + d.m[2] * w[2]),
                ]
            })
            .collect();
        let mut r = self.ctx.grid.load(&s);
        if !self.pts.is_empty() {
            let wp = self.ctx.grid.interpolate_points(w, &self.pts);
            let s: Vec<[f64; 3]> = self
                .extra
                .iter()
                .zip(&wp)
                .map(|(d, w)| {
                    [
                        2.0 * d.dlw0 + 2.0 * d.r * w[0],
                        8.0 * (d.dm[0] * w[1] + d.dm[1] * w[2]),
                        8.0 * (d.dm[1] * w[1] + d.dm[2] * w[2]),
                    ]
                })
                .collect();
            self.ctx.grid.load_points(&mut r, &self.pts, &s);
        }
        r
    }

    fn hessian(&self, w: &[f64]) -> StencilMatrix {
        let wi = self.ctx.grid.interpolate_interior(w);
        let coef: Vec<GpCoef> = self
            .gp
            .iter()
            .zip(&wi)
            .map(|(d, w)| {
                let u = d.w0 + w[0];
                GpCoef { mxx: 8.0 * d.m[0], mxy: 8.0 * d.m[1], myy: 8.0 * d.m[2], c0: 2.0 * d.r - 12.0 * u * u }
            })
            .collect();
        let mut h = self.ctx.grid.assemble(&coef);
        let extra: Vec<GpCoef> = self
            .extra
            .iter()
            .map(|d| GpCoef { mxx: 8.0 * d.dm[0], mxy: 8.0 * d.dm[1], myy: 8.0 * d.dm[2], c0: 2.0 * d.r })
            .collect();
        self.ctx.grid.assemble_points(&mut h, &self.pts, &extra);
        h
    }

    /// 𝒥_h(W₀ + w) − 𝒥(W₀).
    fn increment(&self, w: &[f64]) -> f64 {
        let wi = self.ctx.grid.interpolate_interior(w);
        let g: Vec<f64> = self
            .gp
            .iter()
            .zip(&wi)
            .map(|(d, w)| {
                let u = d.w0 + w[0];
                let mw = [d.m[0] * w[1] + d.m[1] * w[2], d.m[1] * w[1] + d.m[2] * w[2]];
                2.0 * w[0] * d.lw0 + 4.0 * (w[1] * mw[0] + w[2] * mw[1]) + d.r * w[0] * w[0]
                    - (u.powi(4) - d.w0.powi(4))
            })
            .collect();
        let wp = self.ctx.grid.interpolate_points(w, &self.pts);
        let e: Vec<f64> = self
            .extra
            .iter()
            .zip(&self.pts)
            .zip(&wp)
            .map(|((d, pb), w)| {
                let mw = [d.dm[0] * w[1] + d.dm[1] * w[2], d.dm[1] * w[1] + d.dm[2] * w[2]];
                pb.weight * (2.0 * w[0] * d.dlw0 + 4.0 * (w[1] * mw[0] + w[2] * mw[1]) + d.r * w[0] * w[0])
            })
            .collect();
        self.ctx.grid.integrate(&g) + crate::quad::pairwise_sum(&e)
    }

    /// Grid-quadrature value of 𝒥(W₀).
    fn base_value(&self) -> f64 {
        let g: Vec<f64> = self.gp.iter().map(|q| q.w0 * q.lw0 - q.w0.powi(4)).collect();
        let e: Vec<f64> = self.extra.iter().zip(&self.pts).map(|(d, pb)| pb.weight * d.w0 * d.dlw0).collect();
        self.ctx.grid.integrate(&g) + crate::quad::pairwise_sum(&e)
    }

    /// ⟨W₀ − U, w⟩_X.
    fn cross(&self, w: &[f64]) -> f64 {
        let s: Vec<[f64; 3]> = self.gp.iter().map(|d| [0.0, d.dx, d.dy]).collect();
        dot(&self.ctx.grid.load(&s), w)
    }

    /// Newton direction from the bordered system [H B; Bᵀ 0].
    fn newton(&self, w: &[f64], r: &[f64], tol: f64) -> Result<(Vec<f64>, usize)> {
        let h = self.hessian(w);
        let n = r.len();
        let hd: Vec<f64> = h.diag().iter().map(|d| d.abs().max(1e-300)).collect();
        let loads = &self.ctx.loads;
        let mut diag = hd.clone();
        for b in loads {
            diag.push(b.iter().zip(&hd).map(|(b, d)| b * b / d).sum::<f64>().max(1e-300));
        }
        let apply = |x: &[f64], y: &mut [f64]| {
            let (xw, xm) = x.split_at(n);
            let (yw, ym) = y.split_at_mut(n);
            h.apply(xw, yw);
            for (i, b) in loads.iter().enumerate() {
                for (a, bb) in yw.iter_mut().zip(b) {
                    *a += bb * xm[i];
                }
                ym[i] = dot(b, xw);
            }
        };
        let mut rhs: Vec<f64> = r.iter().map(|v| -v).collect();
        rhs.extend([0.0; 4]);
        let mut x = vec![0.0; n + 4];
        let rep = minres(apply, &diag, &rhs, &mut x, tol, 20 * (n + 4))?;
        x.truncate(n);
        self.ctx.project_interior(&mut x)?;
        Ok((x, rep.iterations))
    }
}

fn build_cell<'a>(ctx: &'a LsContext, d: &Deformation, w0: &Field, u: &Field) -> Result<Cell<'a>> {
    // With declared support the deformation terms go to the ball rules, which
    // resolve supports far smaller than a grid cell.
    let split = d.support.is_some() && !d.is_flat();
    let flat = Deformation::zero();
    let dg = if split { &flat } else { d };
    let gp = ctx
        .grid
        .gauss
        .par_iter()
        .map(|g| {
            let fj = deformation_jet(dg, &g.p)?;
            let j0 = frame_jet(&**w0, &g.p)?;
            let (_, ux, uy) = xy_real(&**u, &g.p)?;
            let (x0, y0) = j0.xy();
            Ok(GpData {
                w0: j0.value.re,
                lw0: conformal_from_jets(&fj, &j0),
                r: curvature_defining(&fj).re,
                m: horizontal_metric(fj.f.value),
                dx: 0.25 * (x0.re - ux),
                dy: 0.25 * (y0.re - uy),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut pts = vec![];
    let mut extra = vec![];
    if split {
        let m0 = horizontal_metric(Complex64::new(0.0, 0.0));
        for rule in support_rules(&ctx.lab, d, &BubbleParams::standard())? {
            let data = rule
                .nodes
                .par_iter()
                .zip(&rule.weights)
                .filter_map(|(p, w)| ctx.grid.locate(p, *w).map(|pb| (p, pb)))
                .map(|(p, pb)| {
                    let fj = deformation_jet(d, p)?;
                    let j0 = frame_jet(&**w0, p)?;
                    let m = horizontal_metric(fj.f.value);
                    let flat = -4.0 * j0.flat_sublaplacian().re;
                    let ed = ExtraData {
                        w0: j0.value.re,
                        dlw0: conformal_from_jets(&fj, &j0) - flat,
                        r: curvature_defining(&fj).re,
                        dm: [m[0] - m0[0], m[1] - m0[1], m[2] - m0[2]],
                    };
                    Ok((pb, ed))
                })
                .collect::<Result<Vec<_>>>()?;
            for (pb, ed) in data {
                pts.push(pb);
                extra.push(ed);
            }
        }
    }
    Ok(Cell { ctx, gp, pts, extra })
}

/// Solves the auxiliary equation at (x, λ).
pub fn ls_solve(ctx: &LsContext, params: &BubbleParams, d: &Deformation, opts: &LsOptions) -> Result<ReducedState> {
    if !(opts.tol > 0.0) || opts.max_outer == 0 {
        return Err(Error::Config(format!("invalid LS options {opts:?}")));
    }
    let lab = &ctx.lab;
    let std = BubbleParams::standard();
    let dn = d.normalized(&params.center, params.lambda);
    let u = lab.standard_bubble();
    let frozen = dn.value(&HPoint::IDENTITY);
    let plain = super::functional::WarmStart { field: u.clone(), coefficients: [0.0; 4], c: Complex64::new(0.0, 0.0) };
    let mut candidates = vec![plain];
    if opts.warm_start && !dn.is_flat() && frozen != Complex64::new(0.0, 0.0) {
        candidates.push(warm_start(lab, frozen, &ctx.gram)?);
    }
    // The frozen-structure start only helps where f is nearly constant at the
    // bubble scale; keep whichever start has the smaller projected residual.
    let mut best: Option<(super::functional::WarmStart, Cell, Vec<f64>, f64)> = None;
    for ws in candidates {
        let cell = build_cell(ctx, &dn, &ws.field, &u)?;
        let r = cell.gradient(&vec![0.0; ctx.grid.dof()]);
        let (_, _, res) = ctx.represent(&r)?;
        if best.as_ref().is_none_or(|b| res < b.3) {
            best = Some((ws, cell, r, res));
        }
    }
    let (ws, cell, mut r, mut res) = best.expect("at least one candidate");
    let base = functional_value(lab, &dn, &*ws.field, &std)?.value;
    let diff = sum(ws.field.clone(), scaled(u.clone(), -1.0));
    let (base_norm2, base_pair) = if ws.c == Complex64::new(0.0, 0.0) {
        (0.0, [0.0; 4])
    } else {
        let nrm = lab.rule.x_inner(&*diff, &*diff)?;
        let mut pair = [0.0; 4];
        for (i, e) in ctx.basis.iter().enumerate() {
            pair[i] = lab.rule.x_inner(&*diff, &**e)?;
        }
        (nrm, pair)
    };
    let scale = ctx.u_norm;
    let mut w = vec![0.0; ctx.grid.dof()];
    let mut steps = vec![];
    let mut bad = 0usize;
    let mut factors = vec![];
    let mut newton_tol = opts.newton_tol;
    let mut iterations = 0;
    while res >= opts.tol * scale {
        if iterations >= opts.max_outer {
            return Err(Error::NoConvergence {
                solver: "lyapunov-schmidt",
                iterations,
                residual: res / scale,
                history: steps.iter().map(|s: &LsStep| s.residual).collect(),
            });
        }
        iterations += 1;
        let (dw, kit) = cell.newton(&w, &r, newton_tol)?;
        let mut accepted = None;
        let mut alpha = 1.0;
        for _ in 0..5 {
            let trial: Vec<f64> = w.iter().zip(&dw).map(|(a, b)| a + alpha * b).collect();
            let rt = cell.gradient(&trial);
            let (_, _, rest) = ctx.represent(&rt)?;
            if rest < res {
                accepted = Some((trial, rt, rest));
                break;
            }
            alpha *= 0.5;
        }
        match accepted {
            Some((trial, rt, rest)) => {
                let factor = rest / res;
                steps.push(LsStep { residual: rest, factor, krylov_iterations: kit, step_length: alpha });
                w = trial;
                r = rt;
                res = rest;
                bad = if factor >= 1.0 { bad + 1 } else { 0 };
            }
            None => {
                factors.push(1.0);
                bad += 1;
                newton_tol *= 1e-2;
            }
        }
        if bad >= 3 {
            factors.extend(steps.iter().rev().take(3).map(|s| s.factor));
            return Err(Error::Divergence { factors });
        }
    }
    ctx.project_interior(&mut w)?;
    let r = cell.gradient(&w);
    let (g, full, proj) = ctx.represent(&r)?;
    let tangent_gradient = ctx.tangent_pairing(&g);
    let tangent_coefficients = solve4(&ctx.gram_h, tangent_gradient)?;
    let value = base + cell.increment(&w);
    let v_norm2 = base_norm2 + 2.0 * cell.cross(&w) + ctx.stiffness.quad_form(&w, &w);
    let v_norm = v_norm2.max(0.0).sqrt();
    let pair = ctx.tangent_pairing(&w);
    let orthogonality = if v_norm == 0.0 {
        0.0
    } else {
        (0..4).map(|i| (base_pair[i] + pair[i]).abs() / (v_norm * ctx.gram[i][i].sqrt())).fold(0.0, f64::max)
    };
    let wf = ctx.grid.from_interior(&w);
    let mut v = ctx.grid.nodal(|p| diff.value(p).re);
    for (a, b) in v.values.iter_mut().zip(&wf.values) {
        *a += b;
    }
    let peak = params.lambda
        * ctx
            .grid
            .nodal(|p| u.value(p).re)
            .values
            .iter()
            .zip(&v.values)
            .map(|(a, b)| a + b)
            .fold(f64::NEG_INFINITY, f64::max);
    Ok(ReducedState {
        params: *params,
        v,
        residual_norm: proj,
        iterations,
        gram: ctx.gram_at(params),
        value,
        base_value: base,
        v_norm,
        orthogonality,
        full_gradient: full,
        tangent_gradient,
        tangent_coefficients,
        frozen,
        warm_coefficients: ws.coefficients,
        steps,
        peak,
    })
}

/// (x, λ) ↦ 𝒥_J(U_{x,λ} + v_{x,λ}).
pub fn reduced_functional(ctx: &LsContext, params: &BubbleParams, d: &Deformation, opts: &LsOptions) -> Result<f64> {
    Ok(ls_solve(ctx, params, d, opts)?.value)
}

fn grid_coefficients(d: &Deformation, grid: &Grid) -> Result<Vec<(f64, [f64; 3])>> {
    grid.gauss
        .par_iter()
        .map(|g| {
            let fj = deformation_jet(d, &g.p)?;
            Ok((curvature_defining(&fj).re, horizontal_metric(fj.f.value)))
        })
        .collect()
}

/// 𝒥_J of a grid field: Σ_q w_q (4∇u·M∇u + R u² − u⁴) over the box.
pub fn grid_functional(d: &Deformation, u: &GridField) -> Result<f64> {
    let grid = &u.grid;
    let c = grid_coefficients(d, grid)?;
    let ui = grid.interpolate(u);
    let g: Vec<f64> = c
        .iter()
        .zip(&ui)
        .map(|((r, m), u)| {
            4.0 * (m[0] * u[1] * u[1] + 2.0 * m[1] * u[1] * u[2] + m[2] * u[2] * u[2]) + r * u[0] * u[0] - u[0].powi(4)
        })
        .collect();
    Ok(grid.integrate(&g))
}

/// The X-gradient of [`grid_functional`] with respect to interior values:
/// ⟨g, w⟩_X = d𝒥(u)[w], i.e. g = −2Δ_{J₀}⁻¹(L_J u − 2u³) weakly.
///
/// Q1 interpolation of a bubble leaves an O(h) dual residual, so this is only
/// useful for consistency checks; [`functional_gradient`] is the accurate path.
pub fn grid_functional_gradient(d: &Deformation, u: &GridField) -> Result<GridField> {
    let grid = &u.grid;
    let c = grid_coefficients(d, grid)?;
    let ui = grid.interpolate(u);
    let s: Vec<[f64; 3]> = c
        .iter()
        .zip(&ui)
        .map(|((r, m), u)| {
            [
                2.0 * r * u[0] - 4.0 * u[0].powi(3),
                8.0 * (m[0] * u[1] + m[1] * u[2]),
                8.0 * (m[1] * u[1] + m[2] * u[2]),
            ]
        })
        .collect();
    let rhs = grid.load(&s);
    let k = grid.x_stiffness();
    let mut g = vec![0.0; rhs.len()];
    cg(|a, b| k.apply(a, b), &k.diag(), &rhs, &mut g, INNER_TOL, 20 * rhs.len())?;
    Ok(grid.from_interior(&g))
}

/// u = base + w with `base` in closed form and w a grid field with zero
/// boundary values.
pub struct HybridField {
    pub base: Field,
    pub w: GridField,
}

impl HybridField {
    fn cell<'a>(&self, ctx: &'a LsContext, d: &Deformation) -> Result<(Cell<'a>, Vec<f64>)> {
        if !Arc::ptr_eq(&self.w.grid, &ctx.grid) {
            return Err(Error::Domain("hybrid field lives on a different grid".into()));
        }
        let u = ctx.lab.standard_bubble();
        Ok((build_cell(ctx, d, &self.base, &u)?, ctx.grid.interior(&self.w)))
    }
}

/// 𝒥_J(base + w) with every term integrated by the grid's Gauss rule.
pub fn hybrid_functional(ctx: &LsContext, d: &Deformation, u: &HybridField) -> Result<f64> {
    let (cell, w) = u.cell(ctx, d)?;
    Ok(cell.base_value() + cell.increment(&w))
}

/// X-gradient of 𝒥_J at base + w with respect to the grid part:
/// ⟨g, h⟩_X = d𝒥(u)[h], i.e. g = −2Δ_{J₀}⁻¹(L_J u − 2u³) weakly, with the
/// closed-form part entering through exact jets.
pub fn functional_gradient(ctx: &LsContext, d: &Deformation, u: &HybridField) -> Result<GridField> {
    let (cell, w) = u.cell(ctx, d)?;
    let (g, _, _) = ctx.represent(&cell.gradient(&w))?;
    Ok(ctx.grid.from_interior(&g))
}

/// ⟨u, v⟩_X = ∫ ¼(XuXv + YuYv) for grid fields.
pub fn grid_x_inner(u: &GridField, v: &GridField) -> f64 {
    let grid = &u.grid;
    let a = grid.interpolate(u);
    let b = grid.interpolate(v);
    let g: Vec<f64> = a.iter().zip(&b).map(|(a, b)| 0.25 * (a[1] * b[1] + a[2] * b[2])).collect();
    grid.integrate(&g)
}

/// u minus its X-orthogonal projection onto the nodal interpolants of the
/// four tangent fields at (x, λ).
pub fn project_e(lab: &Lab, u: &GridField, params: &BubbleParams) -> Result<GridField> {
    let grid = &u.grid;
    let basis = tangent_fields(&lab.constant, params)?.real_basis();
    let e: Vec<GridField> = basis.iter().map(|f| grid.nodal(|p| f.value(p).re)).collect();
    let mut g = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in i..4 {
            g[i][j] = grid_x_inner(&e[i], &e[j]);
            g[j][i] = g[i][j];
        }
    }
    let rhs: [f64; 4] = std::array::from_fn(|i| grid_x_inner(u, &e[i]));
    let c = solve4(&g, rhs)?;
    let mut out = u.clone();
    for i in 0..4 {
        for (a, b) in out.values.iter_mut().zip(&e[i].values) {
            *a -= c[i] * b;
        }
    }
    Ok(out)
}
