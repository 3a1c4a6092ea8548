//! Closed forms for the quartic Hamiltonian `H = (q² + p²)²/4`: the flow,
//! evolved-chord center, phase difference, tip central actions, and the
//! cubic scaling probe.  These are the analytic oracles the numeric
//! transport pipeline is held against.

use crate::error::{CoreError, Result};
use crate::geometry::{midpoint, PhasePoint};
use crate::leaf::{chord_area, find_chords, make_circle_leaf, Chord, Leaf};
use crate::model::HamiltonianModel;

/// A chord specification in the polar form of the quartic benchmark:
/// tips `x0^- = (r_minus, alpha)`, `x0^+ = (r_plus, -beta)`.
#[derive(Debug, Clone, Copy)]
pub struct QuarticChordSpec {
    pub r_minus: f64,
    pub r_plus: f64,
    pub alpha: f64,
    pub beta: f64,
    pub t: f64,
}

impl QuarticChordSpec {
    pub fn new(r_minus: f64, r_plus: f64, alpha: f64, beta: f64, t: f64) -> Result<Self> {
        if r_minus <= 0.0 || r_plus <= 0.0 {
            return Err(CoreError::Domain("tip radii must be positive".into()));
        }
        Ok(Self {
            r_minus,
            r_plus,
            alpha,
            beta,
            t,
        })
    }

    pub fn tip_minus(&self) -> PhasePoint {
        PhasePoint::from_polar(self.r_minus, self.alpha)
    }

    pub fn tip_plus(&self) -> PhasePoint {
        PhasePoint::from_polar(self.r_plus, -self.beta)
    }

    pub fn center(&self) -> PhasePoint {
        midpoint(self.tip_minus(), self.tip_plus())
    }

    /// Chord of this spec (leaf parameters are not meaningful here).
    pub fn chord(&self) -> Chord {
        let tm = self.tip_minus();
        let tp = self.tip_plus();
        Chord {
            center: midpoint(tm, tp),
            tip_minus: tm,
            tip_plus: tp,
            xi: tp - tm,
            params: (0.0, 0.0),
        }
    }

    /// Angle swept between the tips, `(r_+² - r_-²) t - (alpha + beta)`,
    /// measured from the evolved minus tip to the evolved plus tip.
    fn tip_angle_gap(&self) -> f64 {
        (self.r_plus * self.r_plus - self.r_minus * self.r_minus) * self.t
            - (self.alpha + self.beta)
    }
}

/// Quartic flow in polar form: `(r, θ) -> (r, θ + r² t)`.
pub fn quartic_flow(r0: f64, theta0: f64, t: f64) -> (f64, f64) {
    (r0, theta0 + r0 * r0 * t)
}

fn wrap_angle(th: f64) -> f64 {
    let tau = 2.0 * std::f64::consts::PI;
    let mut a = th.rem_euclid(tau);
    if a > std::f64::consts::PI {
        a -= tau;
    }
    a
}

/// Closed-form center of the evolved chord, `(r_tilde, theta_tilde)` with
/// the angle reduced to `(-π, π]`.
pub fn quartic_new_center(spec: &QuarticChordSpec) -> Result<(f64, f64)> {
    let gap = spec.tip_angle_gap();
    let r2 = (spec.r_minus * spec.r_minus + spec.r_plus * spec.r_plus) / 4.0
        + spec.r_minus * spec.r_plus * gap.cos() / 2.0;
    if r2 <= 1e-24 {
        return Err(CoreError::DegenerateCenter { p: 0.0, q: 0.0 });
    }
    // alpha' from both components of the midpoint in the frame of the
    // evolved minus tip (the cosine relation alone leaves a sign branch)
    let alpha_prime = (spec.r_plus * gap.sin()).atan2(spec.r_minus + spec.r_plus * gap.cos());
    let theta = spec.r_minus * spec.r_minus * spec.t + spec.alpha + alpha_prime;
    Ok((r2.sqrt(), wrap_angle(theta)))
}

/// Closed-form phase difference `S_{ψ_t}(x̃_t) - S_{ψ_0}(x_0)`:
///
/// `δS = t (r_+⁴ - r_-⁴)/4 - r_+ r_- sin(ζ/2) cos(ζ/2 - (α+β))`,
/// with `ζ = (r_+² - r_-²) t`.
///
/// The sign of the oscillatory term is fixed by direct quadrature of the
/// leaf-arc areas under the exact quartic flow; it is the unique choice
/// consistent with the wedge convention, the flow orientation, and the tip
/// central actions used everywhere else in this crate.
pub fn quartic_delta_s(spec: &QuarticChordSpec) -> f64 {
    let zeta = (spec.r_plus * spec.r_plus - spec.r_minus * spec.r_minus) * spec.t;
    let secular = spec.t * (spec.r_plus.powi(4) - spec.r_minus.powi(4)) / 4.0;
    let osc = spec.r_plus
        * spec.r_minus
        * (zeta / 2.0).sin()
        * (zeta / 2.0 - (spec.alpha + spec.beta)).cos();
    secular - osc
}

/// Closed-form tip central action and center norm:
/// `S_{±t} = ± r²[r² t - 2 sin(r² t)]/4`, `|y_±|² = r² cos²(r² t / 2)`.
pub fn quartic_central_action(r: f64, t: f64, sign: i8) -> (f64, f64) {
    let phi = r * r * t;
    let s = (sign as f64) * r * r * (phi - 2.0 * phi.sin()) / 4.0;
    let c = (phi / 2.0).cos();
    (s, r * r * c * c)
}

/// One row of the closed-form-vs-numeric benchmark.
#[derive(Debug, Clone, Copy)]
pub struct BenchRow {
    pub spec: QuarticChordSpec,
    pub ds_closed: f64,
    pub ds_numeric: f64,
    pub abs_err: f64,
    /// Distance between the numeric evolved midpoint and the closed form.
    pub center_err: f64,
}

/// Run the closed-form-vs-numeric suite over the given specs.
pub fn run_bench(specs: &[QuarticChordSpec], ode_tol: f64) -> Result<Vec<BenchRow>> {
    use crate::engines::{phase_transport, tips_flow};
    let mut rows = Vec::with_capacity(specs.len());
    for spec in specs {
        let cfg = tips_flow(HamiltonianModel::Quartic, &spec.chord(), spec.t, ode_tol)?;
        let ds_numeric = phase_transport(&cfg, 0.0);
        let ds_closed = quartic_delta_s(spec);
        let (r_tilde, th_tilde) = quartic_new_center(spec)?;
        let closed_center = PhasePoint::from_polar(r_tilde, th_tilde);
        rows.push(BenchRow {
            spec: *spec,
            ds_closed,
            ds_numeric,
            abs_err: (ds_numeric - ds_closed).abs(),
            center_err: (cfg.x_tilde - closed_center).norm(),
        });
    }
    Ok(rows)
}

/// Result of the cubic-scaling fit.
#[derive(Debug, Clone)]
pub struct ScalingFit {
    pub exponent: f64,
    /// `(r_+ - r_-, |discrepancy|)` per probed spec.
    pub points: Vec<(f64, f64)>,
}

/// Fit the log-log slope of the Liouville-vs-semiclassical phase
/// discrepancy `S_{ψ_t}(x_t) - S_{ψ_0}(x_0)` against the chord asymmetry
/// `r_+ - r_-`.
///
/// Each spec is hosted on its own circle leaf through the two tips (one
/// closed curve cannot carry tips of every asymmetry), the leaf is evolved
/// by the quartic flow, and both areas are measured by quadrature.
pub fn scaling_probe(specs: &[QuarticChordSpec], ode_tol: f64) -> Result<ScalingFit> {
    if specs.len() < 3 {
        return Err(CoreError::Fit(format!(
            "need at least 3 specs for a slope fit, got {}",
            specs.len()
        )));
    }
    let mut points = Vec::with_capacity(specs.len());
    for spec in specs {
        let d = probe_discrepancy(spec, ode_tol)?;
        points.push(((spec.r_plus - spec.r_minus).abs(), d.abs()));
    }
    // least-squares slope in log-log coordinates
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if logs.len() < 3 {
        return Err(CoreError::Fit("degenerate probe values".into()));
    }
    let n = logs.len() as f64;
    let sx: f64 = logs.iter().map(|(x, _)| x).sum();
    let sy: f64 = logs.iter().map(|(_, y)| y).sum();
    let sxx: f64 = logs.iter().map(|(x, _)| x * x).sum();
    let sxy: f64 = logs.iter().map(|(x, y)| x * y).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-12 {
        return Err(CoreError::Fit("collinear abscissae".into()));
    }
    Ok(ScalingFit {
        exponent: (n * sxy - sx * sy) / denom,
        points,
    })
}

/// `S_{ψ_t}(x_t) - S_{ψ_0}(x_0)` for one spec via leaf evolution.
fn probe_discrepancy(spec: &QuarticChordSpec, ode_tol: f64) -> Result<f64> {
    use crate::engines::leaf_evolution_engine;

    let tm = spec.tip_minus();
    let tp = spec.tip_plus();
    let x0 = midpoint(tm, tp);
    let xi = tp - tm;
    // circle through both tips: center on the perpendicular bisector,
    // offset by a fraction of the chord so x0 stays a regular chord center
    let offset = 0.75 * xi.norm();
    let n_hat = xi.rotate_j() * (1.0 / xi.norm());
    let center = x0 + n_hat * offset;
    let radius = (0.25 * xi.norm_sq() + offset * offset).sqrt();
    let leaf0 = make_circle_leaf(center, radius, 384)?;

    let s0 = chord_area(&leaf0, &nearest_chord(&leaf0, x0, 1e-9)?)?;
    let leaf_t = leaf_evolution_engine(&leaf0, HamiltonianModel::Quartic, spec.t, ode_tol)?;
    let r0 = x0.norm();
    let x_t = PhasePoint::from_polar(r0, x0.angle() + r0 * r0 * spec.t);
    let s_t = chord_area(&leaf_t, &nearest_chord(&leaf_t, x_t, 1e-9)?)?;
    Ok(s_t - s0)
}

fn nearest_chord(leaf: &Leaf, x: PhasePoint, tol: f64) -> Result<Chord> {
    let chords = find_chords(leaf, x, tol)?;
    chords
        .into_iter()
        .filter(|c| !c.is_zero_length())
        .min_by(|a, b| {
            a.xi.norm()
                .partial_cmp(&b.xi.norm())
                .expect("finite chord lengths")
        })
        .ok_or_else(|| CoreError::Domain(format!("no chord centered on ({}, {})", x.p, x.q)))
}
