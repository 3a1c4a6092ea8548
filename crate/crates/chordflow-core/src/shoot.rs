//! Boundary-value solvers on the flow (center and chord shooting) and the
//! Cayley forms of the linearized map.
//!
//! The central action of a time-`t` trajectory is
//! `S_c(y) = arc_chord_area - E t`, taken as a function of the chord center
//! `y`; it generates the chord through `ξ = -J ∂S_c/∂y`.  The matrix `B`
//! entering the Cayley form `M = (1 - JB)(1 + JB)^{-1}` is therefore *half*
//! the Hessian of `S_c` (the generating relation carries a factor two in
//! this area normalization); `central_generating_hessian` returns `B`
//! directly so the Cayley helpers can be applied verbatim.

use crate::error::{CausticKind, CoreError, Result};
use crate::geometry::{midpoint, wedge, Mat2, PhasePoint};
use crate::model::HamiltonianModel;
use crate::ode::{arc_chord_area, flow, TrajectorySegment};

/// Determinant threshold below which a Cayley factor is declared singular.
pub const CAUSTIC_DET_TOL: f64 = 1e-8;
const MAX_NEWTON_ITERS: usize = 50;

/// Find the trajectory of duration `t` whose chord is centered on `y`,
/// by damped Newton iteration on the initial condition.
pub fn center_shoot(
    model: HamiltonianModel,
    y: PhasePoint,
    t: f64,
    guess: PhasePoint,
    tol: f64,
) -> Result<TrajectorySegment> {
    if tol <= 0.0 {
        return Err(CoreError::Precondition("tol must be positive".into()));
    }
    if t == 0.0 {
        return Ok(TrajectorySegment::stationary(y, 0.0, model.energy(y)));
    }

    let ode_tol = (tol * 1e-2).min(1e-10);
    let mut x0 = guess;
    let mut seg = flow(model, x0, t, ode_tol)?;
    let mut res = seg.chord_center() - y;

    for _ in 0..MAX_NEWTON_ITERS {
        if res.norm() <= tol {
            return Ok(seg);
        }
        let m = seg.final_monodromy();
        // Jacobian of the midpoint map: (1 + M)/2
        let jac = Mat2::IDENTITY.add(m).scale(0.5);
        if jac.det().abs() < CAUSTIC_DET_TOL {
            return Err(CoreError::Caustic {
                kind: CausticKind::Central,
                indicator: jac.det(),
            });
        }
        let jinv = jac.inverse().expect("checked determinant");
        let mut step = jinv.mul_point(res) * -1.0;

        // halve the step while the residual grows
        let mut accepted = None;
        for _ in 0..20 {
            let cand = x0 + step;
            let seg_c = flow(model, cand, t, ode_tol)?;
            let res_c = seg_c.chord_center() - y;
            if res_c.norm() < res.norm() {
                accepted = Some((cand, seg_c, res_c));
                break;
            }
            step = step * 0.5;
        }
        match accepted {
            Some((cand, seg_c, res_c)) => {
                x0 = cand;
                seg = seg_c;
                res = res_c;
            }
            None => break,
        }
    }

    if res.norm() <= tol {
        Ok(seg)
    } else {
        Err(CoreError::RootFindFailure {
            iterations: MAX_NEWTON_ITERS,
            residual: res.norm(),
        })
    }
}

/// Find the trajectory of duration `t` whose chord vector `x(t) - x(0)` is
/// `xi`, by Newton iteration on the initial condition.
pub fn chord_shoot(
    model: HamiltonianModel,
    xi: PhasePoint,
    t: f64,
    guess: PhasePoint,
    tol: f64,
) -> Result<TrajectorySegment> {
    if tol <= 0.0 {
        return Err(CoreError::Precondition("tol must be positive".into()));
    }
    let ode_tol = (tol * 1e-2).min(1e-10);
    let mut x0 = guess;
    let mut seg = flow(model, x0, t, ode_tol)?;
    let mut res = (seg.end() - seg.start()) - xi;

    for _ in 0..MAX_NEWTON_ITERS {
        if res.norm() <= tol {
            return Ok(seg);
        }
        let m = seg.final_monodromy();
        let jac = m.sub(Mat2::IDENTITY);
        if jac.det().abs() < CAUSTIC_DET_TOL {
            return Err(CoreError::Caustic {
                kind: CausticKind::Chord,
                indicator: jac.det(),
            });
        }
        let jinv = jac.inverse().expect("checked determinant");
        let mut step = jinv.mul_point(res) * -1.0;
        let mut accepted = None;
        for _ in 0..20 {
            let cand = x0 + step;
            let seg_c = flow(model, cand, t, ode_tol)?;
            let res_c = (seg_c.end() - seg_c.start()) - xi;
            if res_c.norm() < res.norm() {
                accepted = Some((cand, seg_c, res_c));
                break;
            }
            step = step * 0.5;
        }
        match accepted {
            Some((cand, seg_c, res_c)) => {
                x0 = cand;
                seg = seg_c;
                res = res_c;
            }
            None => break,
        }
    }

    if res.norm() <= tol {
        Ok(seg)
    } else {
        Err(CoreError::RootFindFailure {
            iterations: MAX_NEWTON_ITERS,
            residual: res.norm(),
        })
    }
}

/// Central action `S_c = arc_chord_area - E t` of a segment.
pub fn central_action(seg: &TrajectorySegment) -> f64 {
    arc_chord_area(seg) - seg.energy * (seg.t1 - seg.t0)
}

/// Chord action: Legendre transform of the central action,
/// `S̃(ξ) = ξ ∧ y - S_c(y)` evaluated on the trajectory with chord `ξ`.
pub fn chord_action(seg: &TrajectorySegment) -> f64 {
    let xi = seg.end() - seg.start();
    let y = midpoint(seg.start(), seg.end());
    wedge(xi, y) - central_action(seg)
}

/// `M = (1 - J B)(1 + J B)^{-1}` for the center generating matrix `B`.
pub fn cayley_from_central(hess: Mat2) -> Result<Mat2> {
    let jb = Mat2::J.mul_mat(hess);
    let plus = Mat2::IDENTITY.add(jb);
    if plus.det().abs() < CAUSTIC_DET_TOL {
        return Err(CoreError::Caustic {
            kind: CausticKind::Central,
            indicator: plus.det(),
        });
    }
    let inv = plus.inverse().expect("checked determinant");
    Ok(Mat2::IDENTITY.sub(jb).mul_mat(inv))
}

/// `M = -(1 + J B̃)(1 - J B̃)^{-1}` for the chord generating matrix `B̃`.
pub fn cayley_from_chord(hess: Mat2) -> Result<Mat2> {
    let jb = Mat2::J.mul_mat(hess);
    let minus = Mat2::IDENTITY.sub(jb);
    if minus.det().abs() < CAUSTIC_DET_TOL {
        return Err(CoreError::Caustic {
            kind: CausticKind::Chord,
            indicator: minus.det(),
        });
    }
    let inv = minus.inverse().expect("checked determinant");
    Ok(Mat2::IDENTITY.add(jb).mul_mat(inv).scale(-1.0))
}

/// Center generating matrix `B(y)`: half the Hessian of the central action,
/// by central finite differences over `center_shoot`.
pub fn central_generating_hessian(
    model: HamiltonianModel,
    y: PhasePoint,
    t: f64,
    guess: PhasePoint,
    step: f64,
) -> Result<Mat2> {
    let tol = 1e-12;
    let s_at = |yy: PhasePoint| -> Result<f64> {
        let seg = center_shoot(model, yy, t, guess, tol)?;
        Ok(central_action(&seg))
    };
    let h = step;
    let ep = PhasePoint::new(h, 0.0);
    let eq = PhasePoint::new(0.0, h);
    let s0 = s_at(y)?;
    let spp = s_at(y + ep)?;
    let smm = s_at(y - ep)?;
    let sqq = s_at(y + eq)?;
    let sq2 = s_at(y - eq)?;
    let d_pp = (spp - 2.0 * s0 + smm) / (h * h);
    let d_qq = (sqq - 2.0 * s0 + sq2) / (h * h);
    let spq = (s_at(y + ep + eq)? - s_at(y + ep - eq)? - s_at(y - ep + eq)? + s_at(y - ep - eq)?)
        / (4.0 * h * h);
    Ok(Mat2::new(d_pp, spq, spq, d_qq).scale(0.5))
}

/// Chord generating matrix `B̃(ξ)`: twice the Hessian of the chord action,
/// by central finite differences over `chord_shoot`.
pub fn chord_generating_hessian(
    model: HamiltonianModel,
    xi: PhasePoint,
    t: f64,
    guess: PhasePoint,
    step: f64,
) -> Result<Mat2> {
    let tol = 1e-12;
    let s_at = |xx: PhasePoint| -> Result<f64> {
        let seg = chord_shoot(model, xx, t, guess, tol)?;
        Ok(chord_action(&seg))
    };
    let h = step;
    let ep = PhasePoint::new(h, 0.0);
    let eq = PhasePoint::new(0.0, h);
    let s0 = s_at(xi)?;
    let d_pp = (s_at(xi + ep)? - 2.0 * s0 + s_at(xi - ep)?) / (h * h);
    let d_qq = (s_at(xi + eq)? - 2.0 * s0 + s_at(xi - eq)?) / (h * h);
    let spq = (s_at(xi + ep + eq)? - s_at(xi + ep - eq)? - s_at(xi - ep + eq)?
        + s_at(xi - ep - eq)?)
        / (4.0 * h * h);
    Ok(Mat2::new(d_pp, spq, spq, d_qq).scale(2.0))
}
