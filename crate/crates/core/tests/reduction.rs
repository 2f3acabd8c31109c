//! End-to-end reduction on a coarse grid: LS solve, reduced functional and
//! a small window scan.

use cryamabe::bubbles::BubbleParams;
use cryamabe::deform::{glued_deformation, Deformation, GluingSpec};
use cryamabe::heis::HPoint;
use cryamabe::quad::{RuleSpec, FOUR_PI_SQ};
use cryamabe::reduce::functional::Lab;
use cryamabe::reduce::grid::GridSpec;
use cryamabe::reduce::ls::{ls_solve, reduced_functional, LsContext, LsOptions};
use cryamabe::reduce::scan::{scan_window, ScanWindow, VerdictStatus};
use cryamabe::Error;

fn ctx(n: usize) -> LsContext {
    LsContext::new(Lab::calibrate(&RuleSpec::default()).unwrap(), &GridSpec { n, ..GridSpec::default() }).unwrap()
}

#[test]
fn glued_solve_is_consistent() {
    let ctx = ctx(12);
    let d = glued_deformation(&GluingSpec::single(HPoint::IDENTITY, 0.1, 0.05)).unwrap();
    let p = BubbleParams::new(HPoint::new(0.05, 0.0, 0.0), 8.0).unwrap();
    let opts = LsOptions::default();
    let st = ls_solve(&ctx, &p, &d, &opts).unwrap();
    assert!(st.residual_norm < opts.tol * ctx.u_norm * 10.0, "{}", st.residual_norm);
    assert!(st.orthogonality < 1e-6);
    assert!(st.steps.windows(2).all(|w| w[1].residual < w[0].residual));
    assert!(st.value > FOUR_PI_SQ);
    let v = reduced_functional(&ctx, &p, &d, &opts).unwrap();
    assert_eq!(v.to_bits(), st.value.to_bits());
}

#[test]
fn invalid_options_and_amplitudes() {
    assert!(matches!(Deformation::constant(num_complex::Complex64::new(1.0, 0.0)), Err(Error::Domain(_))));
    let bad: Result<LsOptions, _> = serde_json::from_str(r#"{"tol": 1e-9, "bogus": 1}"#);
    assert!(bad.is_err());
}

#[test]
fn flat_window_is_vacuous() {
    let ctx = ctx(8);
    let w = ScanWindow {
        center: HPoint::IDENTITY,
        big_r: 1.0,
        small_r: 0.1,
        alpha: 1.0,
        beta: 1.0,
        n_x: 3,
        n_t: 3,
        n_lambda: 3,
    };
    let rep = scan_window(&ctx, &ctx, &w, &Deformation::zero(), &LsOptions::default()).unwrap();
    assert_eq!(rep.verdict.status, VerdictStatus::Vacuous);
    assert_eq!(rep.cells.len(), 81);
    for c in &rep.cells {
        assert_eq!(c.cell_status, "ok");
        assert!((c.value - FOUR_PI_SQ).abs() < 1e-3 * FOUR_PI_SQ);
    }
}
