//! The reduced functional over a window Ω = {|x_k⁻¹x| < R, α/R < λ < β/r}
//! and the interior-versus-boundary verdict.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ls::{ls_solve, LsContext, LsOptions};
use crate::bubbles::BubbleParams;
use crate::deform::Deformation;
use crate::error::{Error, Result};
use crate::heis::{dilate_unchecked, group_mul, koranyi_norm, HPoint};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanWindow {
    pub center: HPoint,
    /// Outer radius R of the center region.
    pub big_r: f64,
    /// Inner radius r of the deformed ball.
    pub small_r: f64,
    pub alpha: f64,
    pub beta: f64,
    #[serde(default = "default_nx")]
    pub n_x: usize,
    #[serde(default = "default_nt")]
    pub n_t: usize,
    #[serde(default = "default_nl")]
    pub n_lambda: usize,
}

fn default_nx() -> usize {
    9
}
fn default_nt() -> usize {
    5
}
fn default_nl() -> usize {
    7
}

/// Margins must exceed this multiple of the noise estimate.
pub const NOISE_FACTOR: f64 = 3.0;
pub const MIN_VALID_FRACTION: f64 = 0.95;

impl ScanWindow {
    pub fn validate(&self) -> Result<()> {
        let pos = [self.big_r, self.small_r, self.alpha, self.beta].iter().all(|v| *v > 0.0 && v.is_finite());
        if !pos || !self.center.is_finite() {
            return Err(Error::Config(format!("window radii and α, β must be positive: {self:?}")));
        }
        if !(self.lambda_min() < self.lambda_max()) {
            return Err(Error::Config(format!(
                "empty window: α/R = {} is not below β/r = {}",
                self.lambda_min(),
                self.lambda_max()
            )));
        }
        if self.n_x < 3 || self.n_t < 3 || self.n_lambda < 3 {
            return Err(Error::Config("window resolution must be at least 3 per axis".into()));
        }
        Ok(())
    }

    pub fn lambda_min(&self) -> f64 {
        self.alpha / self.big_r
    }

    pub fn lambda_max(&self) -> f64 {
        self.beta / self.small_r
    }

    pub fn shape(&self) -> [usize; 4] {
        [self.n_x, self.n_x, self.n_t, self.n_lambda]
    }

    /// Parameters at fractional grid indices. The cube [−1, 1]³ is mapped
    /// onto the gauge ball of radius R so that its max-norm spheres become
    /// gauge spheres.
    pub fn params_at(&self, idx: [f64; 4]) -> BubbleParams {
        let s = self.shape();
        let u: [f64; 3] = std::array::from_fn(|a| -1.0 + 2.0 * idx[a] / (s[a] - 1) as f64);
        let m = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let q = HPoint::new(u[0], u[1], u[2]);
        let rho = koranyi_norm(&q);
        let local = if rho == 0.0 { HPoint::IDENTITY } else { dilate_unchecked(self.big_r * m / rho, &q) };
        let f = idx[3] / (s[3] - 1) as f64;
        let lambda = (self.lambda_min().ln() * (1.0 - f) + self.lambda_max().ln() * f).exp();
        BubbleParams { center: group_mul(&self.center, &local), lambda }
    }

    pub fn is_boundary(&self, idx: [usize; 4]) -> bool {
        idx.iter().zip(self.shape()).any(|(i, n)| *i == 0 || *i == n - 1)
    }

    pub fn cells(&self) -> Vec<[usize; 4]> {
        let s = self.shape();
        let mut out = Vec::with_capacity(s.iter().product());
        for i in 0..s[0] {
            for j in 0..s[1] {
                for k in 0..s[2] {
                    for l in 0..s[3] {
                        out.push([i, j, k, l]);
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanCell {
    pub x: f64,
    pub y: f64,
    pub t: f64,
    pub lambda: f64,
    pub value: f64,
    pub residual: f64,
    pub iterations: usize,
    pub cell_status: String,
    #[serde(skip)]
    pub index: [usize; 4],
    #[serde(skip)]
    pub boundary: bool,
    #[serde(skip)]
    pub peak: f64,
}

impl ScanCell {
    fn valid(&self) -> bool {
        self.cell_status == "ok"
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictStatus {
    /// Interior max exceeds boundary max by more than the noise margin.
    InteriorMax,
    BoundaryMax,
    Inconclusive,
    /// Flat structure: the landscape is constant and nothing is asserted.
    Vacuous,
    /// Fewer than 95% of the cells are valid.
    Insufficient,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalPointCheck {
    pub params: BubbleParams,
    pub value: f64,
    /// Unprojected ‖∇𝒥(U + v)‖_X at the polished maximizer.
    pub full_gradient: f64,
    /// Change of the tangent gradient under refinement, in the X norm.
    pub noise_floor: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub status: VerdictStatus,
    pub valid_fraction: f64,
    pub interior_max: f64,
    pub interior_argmax: Option<BubbleParams>,
    pub boundary_max: f64,
    pub boundary_argmax: Option<BubbleParams>,
    pub margin: f64,
    /// Largest change of the two maxima under refinement.
    pub noise: f64,
    pub critical_point: Option<CriticalPointCheck>,
    /// max of U_{x,λ} + v over the scanned cells (blow-up proxy).
    pub peak: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanReport {
    pub window: ScanWindow,
    pub cells: Vec<ScanCell>,
    pub verdict: Verdict,
}

fn solve_cell(ctx: &LsContext, w: &ScanWindow, d: &Deformation, opts: &LsOptions, idx: [usize; 4]) -> ScanCell {
    let p = w.params_at(idx.map(|i| i as f64));
    let base = ScanCell {
        x: p.center.x,
        y: p.center.y,
        t: p.center.t,
        lambda: p.lambda,
        value: f64::NAN,
        residual: f64::NAN,
        iterations: 0,
        cell_status: String::new(),
        index: idx,
        boundary: w.is_boundary(idx),
        peak: f64::NAN,
    };
    match ls_solve(ctx, &p, d, opts) {
        Ok(st) => ScanCell {
            value: st.value,
            residual: st.residual_norm,
            iterations: st.iterations,
            cell_status: "ok".into(),
            peak: st.peak,
            ..base
        },
        Err(e) => ScanCell { cell_status: error_tag(&e).into(), ..base },
    }
}

fn error_tag(e: &Error) -> &'static str {
    match e {
        Error::Divergence { .. } => "diverged",
        Error::NoConvergence { .. } => "no_convergence",
        Error::DegenerateLevi { .. } => "degenerate_levi",
        Error::SingularGram { .. } => "singular_gram",
        Error::Quadrature { .. } | Error::NonFinite { .. } => "non_finite",
        _ => "failed",
    }
}

fn argmax<'a>(cells: impl Iterator<Item = &'a ScanCell>) -> Option<&'a ScanCell> {
    cells.filter(|c| c.valid()).fold(None, |best: Option<&ScanCell>, c| match best {
        Some(b) if b.value >= c.value => Some(b),
        _ => Some(c),
    })
}

/// Vertex of the parabola through the argmax and its axis neighbours, in index units.
fn polish(w: &ScanWindow, cells: &[ScanCell], at: [usize; 4]) -> [f64; 4] {
    let s = w.shape();
    let lookup = |idx: [usize; 4]| {
        let flat = ((idx[0] * s[1] + idx[1]) * s[2] + idx[2]) * s[3] + idx[3];
        cells.get(flat).filter(|c| c.valid() && c.index == idx).map(|c| c.value)
    };
    let mut out = at.map(|i| i as f64);
    for a in 0..4 {
        if at[a] == 0 || at[a] + 1 >= s[a] {
            continue;
        }
        let (mut lo, mut hi) = (at, at);
        lo[a] -= 1;
        hi[a] += 1;
        if let (Some(fm), Some(f0), Some(fp)) = (lookup(lo), lookup(at), lookup(hi)) {
            let curv = fm - 2.0 * f0 + fp;
            if curv < 0.0 {
                out[a] += (0.5 * (fm - fp) / curv).clamp(-0.5, 0.5);
            }
        }
    }
    out
}

fn gram_norm(g: &[[f64; 4]; 4], c: &[f64; 4]) -> f64 {
    let mut s = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            s += c[i] * g[i][j] * c[j];
        }
    }
    s.max(0.0).sqrt()
}

/// Scans the window with `ctx` and estimates noise by re-solving the two
/// maximizers (and the polished interior maximizer) with `fine`.
pub fn scan_window(
    ctx: &LsContext,
    fine: &LsContext,
    w: &ScanWindow,
    d: &Deformation,
    opts: &LsOptions,
) -> Result<ScanReport> {
    w.validate()?;
    let cells: Vec<ScanCell> = w.cells().into_par_iter().map(|idx| solve_cell(ctx, w, d, opts, idx)).collect();
    let valid = cells.iter().filter(|c| c.valid()).count();
    let valid_fraction = valid as f64 / cells.len() as f64;
    let int = argmax(cells.iter().filter(|c| !c.boundary));
    let bnd = argmax(cells.iter().filter(|c| c.boundary));
    let peak = cells.iter().filter(|c| c.valid()).map(|c| c.peak).fold(f64::NEG_INFINITY, f64::max);
    let mut verdict = Verdict {
        status: VerdictStatus::Insufficient,
        valid_fraction,
        interior_max: int.map_or(f64::NAN, |c| c.value),
        interior_argmax: int.map(|c| w.params_at(c.index.map(|i| i as f64))),
        boundary_max: bnd.map_or(f64::NAN, |c| c.value),
        boundary_argmax: bnd.map(|c| w.params_at(c.index.map(|i| i as f64))),
        margin: f64::NAN,
        noise: f64::NAN,
        critical_point: None,
        peak,
    };
    let (Some(int), Some(bnd)) = (int, bnd) else {
        return Ok(ScanReport { window: w.clone(), cells, verdict });
    };
    verdict.margin = int.value - bnd.value;
    if d.is_flat() {
        verdict.status = VerdictStatus::Vacuous;
        verdict.noise = 0.0;
        return Ok(ScanReport { window: w.clone(), cells, verdict });
    }
    let refine = |c: &ScanCell| -> Result<f64> {
        let p = w.params_at(c.index.map(|i| i as f64));
        Ok((ls_solve(fine, &p, d, opts)?.value - c.value).abs())
    };
    // A failed refinement leaves the noise unknown, which can only be inconclusive.
    verdict.noise = match (refine(int), refine(bnd)) {
        (Ok(a), Ok(b)) => a.max(b),
        _ => f64::INFINITY,
    };
    let polished = w.params_at(polish(w, &cells, int.index));
    if let (Ok(coarse), Ok(refined)) = (ls_solve(ctx, &polished, d, opts), ls_solve(fine, &polished, d, opts)) {
        let delta: [f64; 4] =
            std::array::from_fn(|i| coarse.tangent_coefficients[i] - refined.tangent_coefficients[i]);
        let noise_floor = gram_norm(&ctx.gram, &delta);
        verdict.critical_point = Some(CriticalPointCheck {
            params: polished,
            value: coarse.value,
            full_gradient: coarse.full_gradient,
            noise_floor,
            passed: coarse.full_gradient < NOISE_FACTOR * noise_floor,
        });
    }
    verdict.status = if valid_fraction < MIN_VALID_FRACTION {
        VerdictStatus::Insufficient
    } else if verdict.margin > NOISE_FACTOR * verdict.noise {
        VerdictStatus::InteriorMax
    } else if verdict.margin < -NOISE_FACTOR * verdict.noise {
        VerdictStatus::BoundaryMax
    } else {
        VerdictStatus::Inconclusive
    };
    Ok(ScanReport { window: w.clone(), cells, verdict })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heis::koranyi_distance;

    fn window() -> ScanWindow {
        ScanWindow {
            center: HPoint::new(0.5, -0.2, 0.3),
            big_r: 1.0,
            small_r: 0.1,
            alpha: 2.0,
            beta: 1.0,
            n_x: 5,
            n_t: 3,
            n_lambda: 4,
        }
    }

    #[test]
    fn validation() {
        assert!(window().validate().is_ok());
        assert!(ScanWindow { alpha: 20.0, ..window() }.validate().is_err());
        assert!(ScanWindow { n_t: 2, ..window() }.validate().is_err());
        assert!(ScanWindow { big_r: -1.0, ..window() }.validate().is_err());
    }

    #[test]
    fn geometry() {
        let w = window();
        let cells = w.cells();
        assert_eq!(cells.len(), 5 * 5 * 3 * 4);
        let interior = cells.iter().filter(|c| !w.is_boundary(**c)).count();
        assert_eq!(interior, 3 * 3 * 1 * 2);
        for c in cells {
            let p = w.params_at(c.map(|i| i as f64));
            let dist = koranyi_distance(&w.center, &p.center);
            let m = [c[0] as f64 / 2.0 - 1.0, c[1] as f64 / 2.0 - 1.0, c[2] as f64 - 1.0]
                .iter()
                .fold(0.0f64, |m, v| m.max(v.abs()));
            assert!((dist - w.big_r * m).abs() < 1e-12);
            assert!(p.lambda >= w.lambda_min() * (1.0 - 1e-12) && p.lambda <= w.lambda_max() * (1.0 + 1e-12));
        }
        let p0 = w.params_at([2.0, 2.0, 1.0, 0.0]);
        assert_eq!(p0.center, w.center);
        assert!((p0.lambda - 2.0).abs() < 1e-12);
    }

    #[test]
    fn parabolic_polish_finds_vertex() {
        let w = window();
        let target = [2.3, 1.8, 1.1, 1.6];
        let cells: Vec<ScanCell> = w
            .cells()
            .into_iter()
            .map(|idx| ScanCell {
                x: 0.0,
                y: 0.0,
                t: 0.0,
                lambda: 0.0,
                value: -(0..4).map(|a| (idx[a] as f64 - target[a]).powi(2)).sum::<f64>(),
                residual: 0.0,
                iterations: 0,
                cell_status: "ok".into(),
                index: idx,
                boundary: w.is_boundary(idx),
                peak: 0.0,
            })
            .collect();
        let at = polish(&w, &cells, [2, 2, 1, 2]);
        for a in 0..4 {
            assert!((at[a] - target[a]).abs() < 1e-12, "{at:?}");
        }
    }
}
