//! Q1 finite elements on a tensor grid over the box [−L, L]² × [−L², L²], with
//! weak forms written in the horizontal frame X = ∂_x + 2y∂_t, Y = ∂_y − 2x∂_t.
//! Unknowns live on interior nodes; boundary values are Dirichlet data.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::krylov::{cg, KrylovReport};
use crate::error::{Error, Result};
use crate::heis::HPoint;
use crate::quad::pairwise_sum;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// Elements per axis (even, so that the origin is a node).
    #[serde(default = "default_n")]
    pub n: usize,
    /// Horizontal half-width L; the t half-width is L².
    #[serde(default = "default_half_width")]
    pub half_width: f64,
    /// Node clustering length c in x = c·tan(ξ·atan(L/c)); 0 means uniform.
    #[serde(default = "default_stretch")]
    pub stretch: f64,
}

fn default_n() -> usize {
    16
}
fn default_half_width() -> f64 {
    6.0
}
fn default_stretch() -> f64 {
    2.0
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { n: default_n(), half_width: default_half_width(), stretch: default_stretch() }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n < 4 || self.n % 2 != 0 {
            return Err(Error::Config(format!("grid n must be even and ≥ 4, got {}", self.n)));
        }
        if !(self.half_width > 0.0 && self.half_width.is_finite()) || !(self.stretch >= 0.0) {
            return Err(Error::Config(format!(
                "grid half-width must be positive and stretch non-negative (got {}, {})",
                self.half_width, self.stretch
            )));
        }
        Ok(())
    }

    pub fn refined(&self) -> Self {
        Self { n: 2 * self.n, ..self.clone() }
    }

    fn axis(&self, half: f64, c: f64) -> Vec<f64> {
        (0..=self.n)
            .map(|i| {
                let xi = -1.0 + 2.0 * i as f64 / self.n as f64;
                if c == 0.0 {
                    half * xi
                } else {
                    c * (xi * (half / c).atan()).tan()
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct GaussPoint {
    pub p: HPoint,
    /// Quadrature weight including κ.
    pub w: f64,
}

/// (φ, ∂φ/∂ξx, ∂φ/∂ξy, ∂φ/∂ξt) of the 8 local basis functions at the 8 Gauss points.
fn local_basis() -> [[[f64; 4]; 8]; 8] {
    let g = [0.5 - 0.5 / 3f64.sqrt(), 0.5 + 0.5 / 3f64.sqrt()];
    let mut out = [[[0.0; 4]; 8]; 8];
    for q in 0..8 {
        let xi = [g[q >> 2], g[(q >> 1) & 1], g[q & 1]];
        for a in 0..8 {
            let bits = [a >> 2, (a >> 1) & 1, a & 1];
            let f = |d: usize| if bits[d] == 1 { xi[d] } else { 1.0 - xi[d] };
            let df = |d: usize| if bits[d] == 1 { 1.0 } else { -1.0 };
            out[q][a] = [f(0) * f(1) * f(2), df(0) * f(1) * f(2), f(0) * df(1) * f(2), f(0) * f(1) * df(2)];
        }
    }
    out
}

pub struct Grid {
    pub spec: GridSpec,
    pub kappa: f64,
    pub axes: [Vec<f64>; 3],
    pub gauss: Vec<GaussPoint>,
    basis: [[[f64; 4]; 8]; 8],
}

impl std::fmt::Debug for Grid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Grid").field("spec", &self.spec).field("kappa", &self.kappa).finish()
    }
}

/// Horizontal derivatives of one basis function at a Gauss point: (φ, Xφ, Yφ).
pub type BasisEval = [f64; 3];

impl Grid {
    pub fn new(spec: &GridSpec, kappa: f64) -> Result<Arc<Self>> {
        spec.validate()?;
        let l = spec.half_width;
        let c = spec.stretch;
        let axes = [spec.axis(l, c), spec.axis(l, c), spec.axis(l * l, c * c)];
        let basis = local_basis();
        let n = spec.n;
        let mut gauss = Vec::with_capacity(n * n * n * 8);
        let g = [0.5 - 0.5 / 3f64.sqrt(), 0.5 + 0.5 / 3f64.sqrt()];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let (x0, hx) = (axes[0][i], axes[0][i + 1] - axes[0][i]);
                    let (y0, hy) = (axes[1][j], axes[1][j + 1] - axes[1][j]);
                    let (t0, ht) = (axes[2][k], axes[2][k + 1] - axes[2][k]);
                    for q in 0..8 {
                        let p = HPoint::new(x0 + hx * g[q >> 2], y0 + hy * g[(q >> 1) & 1], t0 + ht * g[q & 1]);
                        gauss.push(GaussPoint { p, w: kappa * hx * hy * ht / 8.0 });
                    }
                }
            }
        }
        Ok(Arc::new(Self { spec: spec.clone(), kappa, axes, gauss, basis }))
    }

    pub fn n(&self) -> usize {
        self.spec.n
    }

    /// Number of nodes including the boundary.
    pub fn node_count(&self) -> usize {
        (self.n() + 1).pow(3)
    }

    /// Number of interior unknowns.
    pub fn dof(&self) -> usize {
        (self.n() - 1).pow(3)
    }

    pub fn node(&self, i: usize, j: usize, k: usize) -> HPoint {
        HPoint::new(self.axes[0][i], self.axes[1][j], self.axes[2][k])
    }

    fn node_id(&self, i: usize, j: usize, k: usize) -> usize {
        let m = self.n() + 1;
        (i * m + j) * m + k
    }

    /// Interior unknown index of node (i, j, k), if interior.
    fn dof_id(&self, i: usize, j: usize, k: usize) -> Option<usize> {
        let n = self.n();
        if i == 0 || j == 0 || k == 0 || i == n || j == n || k == n {
            return None;
        }
        let m = n - 1;
        Some(((i - 1) * m + (j - 1)) * m + (k - 1))
    }

    fn element(&self, e: usize) -> (usize, usize, usize) {
        let n = self.n();
        (e / (n * n), (e / n) % n, e % n)
    }

    fn element_nodes(&self, e: usize) -> [(usize, usize, usize); 8] {
        let (i, j, k) = self.element(e);
        std::array::from_fn(|a| (i + (a >> 2), j + ((a >> 1) & 1), k + (a & 1)))
    }

    /// (φ, Xφ, Yφ) of the 8 local basis functions at Gauss point q of element e.
    fn eval_basis(&self, e: usize, q: usize) -> [BasisEval; 8] {
        let (i, j, k) = self.element(e);
        let hx = self.axes[0][i + 1] - self.axes[0][i];
        let hy = self.axes[1][j + 1] - self.axes[1][j];
        let ht = self.axes[2][k + 1] - self.axes[2][k];
        let p = self.gauss[e * 8 + q].p;
        std::array::from_fn(|a| {
            let b = self.basis[q][a];
            let (dx, dy, dt) = (b[1] / hx, b[2] / hy, b[3] / ht);
            [b[0], dx + 2.0 * p.y * dt, dy - 2.0 * p.x * dt]
        })
    }

    pub fn elements(&self) -> usize {
        self.n().pow(3)
    }

    pub fn nodal<F: Fn(&HPoint) -> f64 + Sync>(self: &Arc<Self>, f: F) -> GridField {
        let m = self.n() + 1;
        let values = (0..self.node_count())
            .into_par_iter()
            .map(|id| {
                let (i, j, k) = (id / (m * m), (id / m) % m, id % m);
                f(&self.node(i, j, k))
            })
            .collect();
        GridField { grid: self.clone(), values }
    }

    pub fn zero_field(self: &Arc<Self>) -> GridField {
        GridField { grid: self.clone(), values: vec![0.0; self.node_count()] }
    }

    /// Embeds an interior vector into a nodal field with zero boundary values.
    pub fn from_interior(self: &Arc<Self>, v: &[f64]) -> GridField {
        let mut f = self.zero_field();
        let n = self.n();
        for i in 1..n {
            for j in 1..n {
                for k in 1..n {
                    f.values[self.node_id(i, j, k)] = v[self.dof_id(i, j, k).unwrap()];
                }
            }
        }
        f
    }

    pub fn interior(&self, f: &GridField) -> Vec<f64> {
        let n = self.n();
        let mut v = vec![0.0; self.dof()];
        for i in 1..n {
            for j in 1..n {
                for k in 1..n {
                    v[self.dof_id(i, j, k).unwrap()] = f.values[self.node_id(i, j, k)];
                }
            }
        }
        v
    }

    /// (u, Xu, Yu) at every Gauss point of a nodal field.
    pub fn interpolate(&self, f: &GridField) -> Vec<[f64; 3]> {
        (0..self.elements())
            .into_par_iter()
            .flat_map_iter(|e| {
                let nodes = self.element_nodes(e);
                let vals: [f64; 8] = std::array::from_fn(|a| {
                    let (i, j, k) = nodes[a];
                    f.values[self.node_id(i, j, k)]
                });
                (0..8).map(move |q| {
                    let b = self.eval_basis(e, q);
                    let mut out = [0.0; 3];
                    for a in 0..8 {
                        for c in 0..3 {
                            out[c] += vals[a] * b[a][c];
                        }
                    }
                    out
                })
            })
            .collect()
    }

    /// Interpolation of an interior vector (zero boundary values).
    pub fn interpolate_interior(self: &Arc<Self>, v: &[f64]) -> Vec<[f64; 3]> {
        self.interpolate(&self.from_interior(v))
    }

    /// r_a = Σ_q w_q (s₀ φ_a + s_X Xφ_a + s_Y Yφ_a) over interior nodes a.
    pub fn load(&self, s: &[[f64; 3]]) -> Vec<f64> {
        let mut r = vec![0.0; self.dof()];
        for e in 0..self.elements() {
            let nodes = self.element_nodes(e);
            let mut loc = [0.0; 8];
            for q in 0..8 {
                let b = self.eval_basis(e, q);
                let sq = s[e * 8 + q];
                let w = self.gauss[e * 8 + q].w;
                for a in 0..8 {
                    loc[a] += w * (sq[0] * b[a][0] + sq[1] * b[a][1] + sq[2] * b[a][2]);
                }
            }
            for a in 0..8 {
                let (i, j, k) = nodes[a];
                if let Some(d) = self.dof_id(i, j, k) {
                    r[d] += loc[a];
                }
            }
        }
        r
    }

    /// Σ_q w_q g_q with ordered pairwise summation.
    pub fn integrate(&self, g: &[f64]) -> f64 {
        let v: Vec<f64> = g.iter().zip(&self.gauss).map(|(g, q)| g * q.w).collect();
        pairwise_sum(&v)
    }

    /// Assembles Σ_q w_q (mxx XφXψ + mxy(XφYψ + YφXψ) + myy YφYψ + c₀ φψ).
    pub fn assemble(&self, coef: &[GpCoef]) -> StencilMatrix {
        let m = self.n() - 1;
        let mut out = StencilMatrix { m, coef: vec![[0.0; 27]; self.dof()] };
        for e in 0..self.elements() {
            let mut loc = [[0.0; 8]; 8];
            for q in 0..8 {
                accumulate_local(&mut loc, &self.eval_basis(e, q), coef[e * 8 + q], self.gauss[e * 8 + q].w);
            }
            self.scatter(&mut out, e, &loc);
        }
        out
    }

    /// Adds the same bilinear form sampled at arbitrary located points.
    pub fn assemble_points(&self, out: &mut StencilMatrix, pts: &[PointBasis], coef: &[GpCoef]) {
        for (pb, c) in pts.iter().zip(coef) {
            let mut loc = [[0.0; 8]; 8];
            accumulate_local(&mut loc, &pb.basis, *c, pb.weight);
            self.scatter(out, pb.element, &loc);
        }
    }

    fn scatter(&self, out: &mut StencilMatrix, e: usize, loc: &[[f64; 8]; 8]) {
        let nodes = self.element_nodes(e);
        for a in 0..8 {
            let (ia, ja, ka) = nodes[a];
            let Some(da) = self.dof_id(ia, ja, ka) else { continue };
            for bb in 0..8 {
                let (ib, jb, kb) = nodes[bb];
                if self.dof_id(ib, jb, kb).is_none() {
                    continue;
                }
                let off = (ib + 1 - ia) * 9 + (jb + 1 - ja) * 3 + (kb + 1 - ka);
                out.coef[da][off] += loc[a][bb];
            }
        }
    }

    /// Element containing p and the basis there, or `None` outside the box.
    pub fn locate(&self, p: &HPoint, weight: f64) -> Option<PointBasis> {
        let find = |ax: &[f64], v: f64| -> Option<(usize, f64)> {
            let n = ax.len() - 1;
            if !(v >= ax[0] && v <= ax[n]) {
                return None;
            }
            let i = ax.partition_point(|a| *a <= v).clamp(1, n) - 1;
            Some((i, (v - ax[i]) / (ax[i + 1] - ax[i])))
        };
        let (i, xi) = find(&self.axes[0], p.x)?;
        let (j, yj) = find(&self.axes[1], p.y)?;
        let (k, tk) = find(&self.axes[2], p.t)?;
        let h = [self.axes[0][i + 1] - self.axes[0][i], self.axes[1][j + 1] - self.axes[1][j], self.axes[2][k + 1] - self.axes[2][k]];
        let xi = [xi, yj, tk];
        let n = self.n();
        let basis = std::array::from_fn(|a| {
            let bits = [a >> 2, (a >> 1) & 1, a & 1];
            let f = |d: usize| if bits[d] == 1 { xi[d] } else { 1.0 - xi[d] };
            let df = |d: usize| if bits[d] == 1 { 1.0 / h[d] } else { -1.0 / h[d] };
            let (dx, dy, dt) = (df(0) * f(1) * f(2), f(0) * df(1) * f(2), f(0) * f(1) * df(2));
            [f(0) * f(1) * f(2), dx + 2.0 * p.y * dt, dy - 2.0 * p.x * dt]
        });
        Some(PointBasis { element: (i * n + j) * n + k, basis, weight })
    }

    /// (u, Xu, Yu) of an interior vector at located points.
    pub fn interpolate_points(&self, v: &[f64], pts: &[PointBasis]) -> Vec<[f64; 3]> {
        pts.iter()
            .map(|pb| {
                let nodes = self.element_nodes(pb.element);
                let mut out = [0.0; 3];
                for a in 0..8 {
                    let (i, j, k) = nodes[a];
                    if let Some(d) = self.dof_id(i, j, k) {
                        for c in 0..3 {
                            out[c] += v[d] * pb.basis[a][c];
                        }
                    }
                }
                out
            })
            .collect()
    }

    /// Adds Σ_p w_p (s₀ φ_a + s_X Xφ_a + s_Y Yφ_a) at located points into r.
    pub fn load_points(&self, r: &mut [f64], pts: &[PointBasis], s: &[[f64; 3]]) {
        for (pb, sq) in pts.iter().zip(s) {
            let nodes = self.element_nodes(pb.element);
            for a in 0..8 {
                let (i, j, k) = nodes[a];
                if let Some(d) = self.dof_id(i, j, k) {
                    let b = pb.basis[a];
                    r[d] += pb.weight * (sq[0] * b[0] + sq[1] * b[1] + sq[2] * b[2]);
                }
            }
        }
    }

    /// Stiffness of ⟨u, v⟩_X = ∫ ¼(XuXv + YuYv).
    pub fn x_stiffness(&self) -> StencilMatrix {
        self.assemble(&vec![GpCoef { mxx: 0.25, mxy: 0.0, myy: 0.25, c0: 0.0 }; self.gauss.len()])
    }
}

/// Q1 basis data at a point off the Gauss lattice.
#[derive(Debug, Clone, Copy)]
pub struct PointBasis {
    pub element: usize,
    pub basis: [BasisEval; 8],
    pub weight: f64,
}

fn accumulate_local(loc: &mut [[f64; 8]; 8], b: &[BasisEval; 8], c: GpCoef, w: f64) {
    for a in 0..8 {
        let fa = [c.mxx * b[a][1] + c.mxy * b[a][2], c.mxy * b[a][1] + c.myy * b[a][2]];
        for bb in 0..8 {
            loc[a][bb] += w * (fa[0] * b[bb][1] + fa[1] * b[bb][2] + c.c0 * b[a][0] * b[bb][0]);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GpCoef {
    pub mxx: f64,
    pub mxy: f64,
    pub myy: f64,
    pub c0: f64,
}

/// Symmetric 27-point operator on the interior nodes of a Q1 grid.
#[derive(Debug, Clone)]
pub struct StencilMatrix {
    m: usize,
    pub coef: Vec<[f64; 27]>,
}

impl StencilMatrix {
    pub fn dim(&self) -> usize {
        self.coef.len()
    }

    pub fn diag(&self) -> Vec<f64> {
        self.coef.iter().map(|c| c[13]).collect()
    }

    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let m = self.m as isize;
        y.par_iter_mut().enumerate().for_each(|(id, yi)| {
            let i = (id as isize) / (m * m);
            let j = (id as isize / m) % m;
            let k = id as isize % m;
            let c = &self.coef[id];
            let mut s = 0.0;
            for di in -1..=1isize {
                let ii = i + di;
                if ii < 0 || ii >= m {
                    continue;
                }
                for dj in -1..=1isize {
                    let jj = j + dj;
                    if jj < 0 || jj >= m {
                        continue;
                    }
                    for dk in -1..=1isize {
                        let kk = k + dk;
                        if kk < 0 || kk >= m {
                            continue;
                        }
                        let off = ((di + 1) * 9 + (dj + 1) * 3 + (dk + 1)) as usize;
                        s += c[off] * x[((ii * m + jj) * m + kk) as usize];
                    }
                }
            }
            *yi = s;
        });
    }

    pub fn quad_form(&self, x: &[f64], z: &[f64]) -> f64 {
        let mut y = vec![0.0; x.len()];
        self.apply(z, &mut y);
        super::krylov::dot(x, &y)
    }

    /// max |A_ij − A_ji| over stored entries.
    pub fn asymmetry(&self) -> f64 {
        let m = self.m as isize;
        let mut worst: f64 = 0.0;
        for id in 0..self.coef.len() {
            let (i, j, k) = ((id as isize) / (m * m), (id as isize / m) % m, id as isize % m);
            for off in 0..27isize {
                let (di, dj, dk) = (off / 9 - 1, (off / 3) % 3 - 1, off % 3 - 1);
                let (ii, jj, kk) = (i + di, j + dj, k + dk);
                if ii < 0 || jj < 0 || kk < 0 || ii >= m || jj >= m || kk >= m {
                    continue;
                }
                let other = ((ii * m + jj) * m + kk) as usize;
                let back = (26 - off) as usize;
                worst = worst.max((self.coef[id][off as usize] - self.coef[other][back]).abs());
            }
        }
        worst
    }
}

/// A real field sampled at the nodes of a grid.
#[derive(Debug, Clone)]
pub struct GridField {
    pub grid: Arc<Grid>,
    pub values: Vec<f64>,
}

impl GridField {
    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

pub const POISSON_TOL: f64 = 1e-8;

/// Solves Δ_{J₀}u = rhs weakly, with u = bc on the boundary nodes.
pub fn solve_poisson(rhs: &GridField, bc: &GridField) -> Result<(GridField, KrylovReport)> {
    let grid = rhs.grid.clone();
    if !rhs.is_finite() || !bc.is_finite() {
        return Err(Error::Domain("non-finite Poisson data".into()));
    }
    let mut ub = bc.clone();
    let n = grid.n();
    for i in 1..n {
        for j in 1..n {
            for k in 1..n {
                ub.values[grid.node_id(i, j, k)] = 0.0;
            }
        }
    }
    let fr = grid.interpolate(rhs);
    let fb = grid.interpolate(&ub);
    let s: Vec<[f64; 3]> = fr.iter().zip(&fb).map(|(r, b)| [-r[0], -0.25 * b[1], -0.25 * b[2]]).collect();
    let b = grid.load(&s);
    let k = grid.x_stiffness();
    let mut x = vec![0.0; b.len()];
    let rep = cg(|u, y| k.apply(u, y), &k.diag(), &b, &mut x, POISSON_TOL, 20 * b.len().max(100))?;
    let mut u = grid.from_interior(&x);
    for (v, b) in u.values.iter_mut().zip(&ub.values) {
        *v += b;
    }
    Ok((u, rep))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jets::fields::field_fn;
    use crate::jets::{frame_jet, ScalarField, Taylor2};

    fn grid(n: usize, stretch: f64) -> Arc<Grid> {
        Grid::new(&GridSpec { n, half_width: 2.0, stretch }, 1.0).unwrap()
    }

    #[test]
    fn constant_is_harmonic() {
        let g = grid(8, 1.0);
        let rhs = g.zero_field();
        let bc = g.nodal(|_| 3.5);
        let (u, _) = solve_poisson(&rhs, &bc).unwrap();
        let err = u.values.iter().fold(0.0f64, |m, v| m.max((v - 3.5).abs()));
        assert!(err < 1e-6, "{err}");
    }

    #[test]
    fn stiffness_is_symmetric_and_positive() {
        let g = grid(8, 1.0);
        let k = g.x_stiffness();
        assert!(k.asymmetry() < 1e-12);
        let v: Vec<f64> = (0..g.dof()).map(|i| ((i * 7919) % 13) as f64 - 6.0).collect();
        assert!(k.quad_form(&v, &v) > 0.0);
        let w: Vec<f64> = (0..g.dof()).map(|i| ((i * 31) % 5) as f64).collect();
        assert!((k.quad_form(&v, &w) - k.quad_form(&w, &v)).abs() < 1e-8 * k.quad_form(&v, &v));
    }

    fn bump(scale: f64) -> crate::jets::fields::Field {
        field_fn(true, move |p| {
            let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2] * 0.25) * (1.0 / (scale * scale));
            let s = Taylor2::real(1.0) - r;
            if s.v.re <= 0.0 {
                Taylor2::real(0.0)
            } else {
                s.powi(4)
            }
        })
    }

    fn mms_error(n: usize) -> f64 {
        let g = Grid::new(&GridSpec { n, half_width: 1.5, stretch: 0.0 }, 1.0).unwrap();
        let u = bump(1.2);
        let rhs = g.nodal(|p| frame_jet(&*u, p).unwrap().flat_sublaplacian().re);
        let (sol, _) = solve_poisson(&rhs, &g.zero_field()).unwrap();
        let exact = g.nodal(|p| u.value(p).re);
        sol.values.iter().zip(&exact.values).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    #[test]
    fn manufactured_solution_second_order() {
        let e: Vec<f64> = [8, 16, 32].iter().map(|&n| mms_error(n)).collect();
        let p1 = (e[0] / e[1]).log2();
        let p2 = (e[1] / e[2]).log2();
        assert!(p2 > 1.8, "orders {p1} {p2}, errors {e:?}");
    }

    #[test]
    fn located_points_reproduce_gauss_basis() {
        let g = grid(6, 1.0);
        for (idx, gp) in g.gauss.iter().enumerate().step_by(37) {
            let pb = g.locate(&gp.p, gp.w).unwrap();
            assert_eq!(pb.element, idx / 8);
            let b = g.eval_basis(idx / 8, idx % 8);
            for a in 0..8 {
                for c in 0..3 {
                    assert!((pb.basis[a][c] - b[a][c]).abs() < 1e-12);
                }
            }
        }
        assert!(g.locate(&HPoint::new(2.5, 0.0, 0.0), 1.0).is_none());
    }

    #[test]
    fn load_matches_stiffness() {
        // load(¼Xu, ¼Yu) is K u for u with zero boundary values.
        let g = grid(6, 0.7);
        let v: Vec<f64> = (0..g.dof()).map(|i| (i as f64 * 0.37).sin()).collect();
        let k = g.x_stiffness();
        let mut kv = vec![0.0; v.len()];
        k.apply(&v, &mut kv);
        let s: Vec<[f64; 3]> = g.interpolate_interior(&v).iter().map(|d| [0.0, 0.25 * d[1], 0.25 * d[2]]).collect();
        let l = g.load(&s);
        assert!(kv.iter().zip(&l).all(|(a, b)| (a - b).abs() < 1e-12));
    }

    #[test]
    fn bad_spec_rejected() {
        assert!(Grid::new(&GridSpec { n: 7, ..GridSpec::default() }, 1.0).is_err());
        assert!(Grid::new(&GridSpec { half_width: 0.0, ..GridSpec::default() }, 1.0).is_err());
    }
}
