//! Trajectory integration with the variational system attached.
//!
//! A single Dormand-Prince 5(4) integrator advances the joint state
//! `(x, M, a)` where `x` solves `xdot = J ∇H`, the monodromy `M` solves
//! `Mdot = J Hess(H) M` from `M(t0) = 1`, and `a` accumulates the swept
//! symplectic area `(1/2) ∫ (p qdot - q pdot) dt`.  Carrying the area as a
//! quadrature state puts it under the same local error control as the
//! trajectory itself.

use crate::error::{CoreError, Result};
use crate::geometry::{midpoint, wedge, Mat2, PhasePoint};
use crate::model::HamiltonianModel;

/// A time-sampled trajectory with monodromy matrices and action data.
#[derive(Debug, Clone)]
pub struct TrajectorySegment {
    pub t0: f64,
    pub t1: f64,
    /// Accepted integration steps `(t, x(t))`, endpoints included.
    pub samples: Vec<(f64, PhasePoint)>,
    /// Monodromy `M(t)` at each sample; `M(t0) = 1`.
    pub monodromy: Vec<Mat2>,
    /// Energy `H(x(t0))` (conserved along the segment).
    pub energy: f64,
    /// `(1/2) ∫ (p dq - q dp)` along the arc from `x(t0)` to `x(t1)`.
    pub swept_area: f64,
}

impl TrajectorySegment {
    /// A zero-duration segment sitting at `x`.
    pub fn stationary(x: PhasePoint, t0: f64, energy: f64) -> Self {
        Self {
            t0,
            t1: t0,
            samples: vec![(t0, x)],
            monodromy: vec![Mat2::IDENTITY],
            energy,
            swept_area: 0.0,
        }
    }

    pub fn start(&self) -> PhasePoint {
        self.samples.first().expect("segment has samples").1
    }

    pub fn end(&self) -> PhasePoint {
        self.samples.last().expect("segment has samples").1
    }

    /// Monodromy at the final time.
    pub fn final_monodromy(&self) -> Mat2 {
        *self.monodromy.last().expect("segment has samples")
    }

    /// Midpoint of the chord joining the segment endpoints.
    pub fn chord_center(&self) -> PhasePoint {
        midpoint(self.start(), self.end())
    }

    pub fn is_degenerate(&self) -> bool {
        self.samples.len() < 2
    }
}

const STATE_DIM: usize = 7;
type State = [f64; STATE_DIM];

fn pack(x: PhasePoint, m: Mat2, area: f64) -> State {
    [x.p, x.q, m.a, m.b, m.c, m.d, area]
}

fn unpack_x(y: &State) -> PhasePoint {
    PhasePoint::new(y[0], y[1])
}

fn unpack_m(y: &State) -> Mat2 {
    Mat2::new(y[2], y[3], y[4], y[5])
}

fn rhs(model: HamiltonianModel, y: &State) -> State {
    let x = unpack_x(y);
    let v = model.velocity(x);
    let h = model.hess(x);
    // J Hess = [[-h.c, -h.d], [h.a, h.b]]
    let jh = Mat2::new(-h.c, -h.d, h.a, h.b);
    let m = unpack_m(y);
    let md = jh.mul_mat(m);
    let adot = 0.5 * (x.p * v.q - x.q * v.p);
    [v.p, v.q, md.a, md.b, md.c, md.d, adot]
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrate `xdot = J ∇H` together with the variational equation from `x0`
/// over `[0, t]` (t may be negative) with local error per step below `tol`.
pub fn flow(
    model: HamiltonianModel,
    x0: PhasePoint,
    t: f64,
    tol: f64,
) -> Result<TrajectorySegment> {
    if tol <= 0.0 {
        return Err(CoreError::Precondition("tol must be positive".into()));
    }
    if !x0.is_finite() {
        return Err(CoreError::Domain("non-finite initial point".into()));
    }
    let energy = model.energy(x0);
    if t == 0.0 {
        return Ok(TrajectorySegment::stationary(x0, 0.0, energy));
    }

    let dir = t.signum();
    let t_end = t;
    let mut tc = 0.0_f64;
    let mut y = pack(x0, Mat2::IDENTITY, 0.0);
    let mut samples = vec![(0.0, x0)];
    let mut monodromy = vec![Mat2::IDENTITY];

    // initial step guess from the velocity scale
    let v0 = model.velocity(x0).norm().max(1e-3);
    let mut h = dir * (0.01 / v0).min(t.abs()).max(1e-8);
    let h_min = t.abs() * 1e-14 + 1e-300;

    let mut k = [[0.0_f64; STATE_DIM]; 7];
    let max_steps = 1_000_000usize;

    for _ in 0..max_steps {
        if (t_end - tc) * dir <= 0.0 {
            break;
        }
        if (tc + h - t_end) * dir > 0.0 {
            h = t_end - tc;
        }

        k[0] = rhs(model, &y);
        for s in 1..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                let a = if s < 6 { A[s - 1][j] } else { B5[j] };
                if a != 0.0 {
                    for d in 0..STATE_DIM {
                        ys[d] += h * a * kj[d];
                    }
                }
            }
            let _ = C;
            k[s] = rhs(model, &ys);
        }

        let mut y5 = y;
        let mut err = 0.0_f64;
        for d in 0..STATE_DIM {
            let mut dy5 = 0.0;
            let mut dy4 = 0.0;
            for s in 0..7 {
                dy5 += B5[s] * k[s][d];
                dy4 += B4[s] * k[s][d];
            }
            y5[d] += h * dy5;
            let scale = tol + tol * y[d].abs().max(y5[d].abs());
            let e = h * (dy5 - dy4) / scale;
            err += e * e;
        }
        err = (err / STATE_DIM as f64).sqrt();

        if err <= 1.0 {
            tc += h;
            y = y5;
            samples.push((tc, unpack_x(&y)));
            monodromy.push(unpack_m(&y));
        }

        let factor = if err > 0.0 {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        } else {
            5.0
        };
        h *= factor;
        if h.abs() < h_min {
            return Err(CoreError::IntegrationFailure { t_reached: tc });
        }
    }

    if (t_end - tc) * dir > 0.0 {
        return Err(CoreError::IntegrationFailure { t_reached: tc });
    }

    Ok(TrajectorySegment {
        t0: 0.0,
        t1: t,
        samples,
        monodromy,
        energy,
        swept_area: y[6],
    })
}

/// Symplectic area enclosed by the trajectory arc followed by the straight
/// chord from its endpoint back to its start.
pub fn arc_chord_area(seg: &TrajectorySegment) -> f64 {
    if seg.is_degenerate() {
        return 0.0;
    }
    seg.swept_area + 0.5 * wedge(seg.end(), seg.start())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn harmonic_quarter_turn() {
        let seg = flow(
            HamiltonianModel::Harmonic,
            PhasePoint::new(0.0, 1.0),
            std::f64::consts::FRAC_PI_2,
            1e-12,
        )
        .unwrap();
        let end = seg.end();
        assert_relative_eq!(end.p, -1.0, epsilon = 1e-10);
        assert_relative_eq!(end.q, 0.0, epsilon = 1e-10);
        let m = seg.final_monodromy();
        let rot = Mat2::rotation(std::f64::consts::FRAC_PI_2);
        assert!(m.sub(rot).max_abs() < 1e-9);
    }

    #[test]
    fn quartic_angle_advance() {
        // theta_t = r0^2 t: r0 = 2, t = 0.25 -> angle 1.0
        let seg = flow(HamiltonianModel::Quartic, PhasePoint::new(2.0, 0.0), 0.25, 1e-12).unwrap();
        let end = seg.end();
        assert_relative_eq!(end.radius(), 2.0, epsilon = 1e-9);
        assert_relative_eq!(end.angle(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn energy_conservation_and_reversibility() {
        let tol = 1e-10;
        for m in HamiltonianModel::all() {
            let x0 = PhasePoint::new(0.4, 1.1);
            let seg = flow(m, x0, 10.0, tol).unwrap();
            for &(_, x) in &seg.samples {
                assert!((m.energy(x) - seg.energy).abs() <= 10.0 * tol * (1.0 + seg.energy.abs()));
            }
            let back = flow(m, seg.end(), -10.0, tol).unwrap();
            assert!((back.end() - x0).norm() <= 1e-7, "{}", m.name());
        }
    }

    #[test]
    fn monodromy_is_symplectic() {
        for m in HamiltonianModel::all() {
            let seg = flow(m, PhasePoint::new(0.9, -0.3), 2.5, 1e-11).unwrap();
            for mono in &seg.monodromy {
                assert!(mono.symplectic_defect() < 1e-8);
                assert!((mono.det() - 1.0).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn velocity_field_transported_by_monodromy() {
        for m in HamiltonianModel::all() {
            let x0 = PhasePoint::new(0.7, 0.8);
            let seg = flow(m, x0, 1.7, 1e-11).unwrap();
            let v0 = m.velocity(x0);
            let vt = m.velocity(seg.end());
            let mv = seg.final_monodromy().mul_point(v0);
            assert!((vt - mv).norm() < 1e-6, "{}", m.name());
        }
    }

    #[test]
    fn arc_chord_area_circle_sector() {
        // harmonic, radius R, duration theta: R^2 (theta - sin theta)/2
        let r = 1.3;
        let theta = 1.1;
        let seg = flow(HamiltonianModel::Harmonic, PhasePoint::new(0.0, r), theta, 1e-12).unwrap();
        let expect = r * r * (theta - theta.sin()) / 2.0;
        assert_relative_eq!(arc_chord_area(&seg), expect, epsilon = 1e-9);
    }

    #[test]
    fn arc_chord_area_quartic_tip_action() {
        // S_{+t} = r^2 [r^2 t - 2 sin(r^2 t)]/4 = arc_chord - E t
        let r = 1.2;
        let t = 0.8;
        let seg = flow(HamiltonianModel::Quartic, PhasePoint::from_polar(r, 0.4), t, 1e-12).unwrap();
        let phi = r * r * t;
        let expect_arc = r * r * (phi - phi.sin()) / 2.0;
        assert_relative_eq!(arc_chord_area(&seg), expect_arc, epsilon = 1e-9);
        let s_plus = r * r * (r * r * t - 2.0 * (r * r * t).sin()) / 4.0;
        assert_relative_eq!(
            arc_chord_area(&seg) - seg.energy * t,
            s_plus,
            epsilon = 1e-9
        );
    }

    #[test]
    fn zero_duration_segment() {
        let seg = flow(HamiltonianModel::Quartic, PhasePoint::new(1.0, 0.0), 0.0, 1e-10).unwrap();
        assert!(seg.is_degenerate());
        assert_eq!(arc_chord_area(&seg), 0.0);
    }

    #[test]
    fn backward_time_supported() {
        let seg = flow(HamiltonianModel::Harmonic, PhasePoint::new(0.0, 1.0), -1.0, 1e-11).unwrap();
        assert_relative_eq!(seg.end().angle(), std::f64::consts::FRAC_PI_2 - 1.0, epsilon = 1e-9);
        // backward arc + chord has the opposite orientation
        assert!(arc_chord_area(&seg) < 0.0);
    }
}
