//! The three propagation schemes and the stationary-phase certificate.
//!
//! * Liouville transport: evaluate the initial function at the backward
//!   image of the argument.
//! * Tips-of-the-chord transport: flow the two tips of the chord centered
//!   on the argument, evaluate the propagated function at the new midpoint,
//!   carrying the phase through the matched-quadrilateral identity and the
//!   amplitude through monodromy-transported tip velocities.
//! * Leaf evolution: flow the whole leaf and rebuild the semiclassical
//!   function from the evolved curve.
//!
//! Sign bookkeeping for the phase identity (fixed jointly by harmonic
//! invariance and the quartic closed form): the backward tip segment enters
//! with the orientation of traversal from the evolved minus tip back to the
//! initial one, so its arc-chord area appears negated; the energy term is
//! `-(E_+ - E_-) t`.

use crate::error::{CausticKind, CoreError, Result};
use crate::geometry::{midpoint, quadrilateral_area, wedge, Mat2, PhasePoint};
use crate::leaf::{caustic_indicator, chord_area, find_chords, Chord, Leaf};
use crate::model::HamiltonianModel;
use crate::ode::{arc_chord_area, flow, TrajectorySegment};
use crate::shoot::{center_shoot, central_action, CAUSTIC_DET_TOL};
use crate::wigner::{branch_amplitude, WignerBranch};

/// The perfectly matching scenario for one chord and one time step.
#[derive(Debug, Clone)]
pub struct MatchedConfiguration {
    /// Initial chord center.
    pub x0: PhasePoint,
    /// Evolved chord center, midpoint of the flowed tips.
    pub x_tilde: PhasePoint,
    /// Midpoint of the backward tip-trajectory chord.
    pub x_prime: PhasePoint,
    /// Midpoint of the forward tip-trajectory chord.
    pub x_triple_prime: PhasePoint,
    /// Forward trajectories of the minus and plus tips.
    pub seg_minus: TrajectorySegment,
    pub seg_plus: TrajectorySegment,
    /// Quadrilateral area over `(x_tilde, x', x0, x''')`.
    pub delta4: f64,
    /// Tip energies `(E_+, E_-)`.
    pub energies: (f64, f64),
    pub t: f64,
}

/// One transported branch of the Wigner function.
#[derive(Debug, Clone)]
pub struct PropagatedBranch {
    pub branch0: WignerBranch,
    /// Evolved chord (tip parameters keep their initial leaf labels).
    pub chord_t: Chord,
    pub action_t: f64,
    /// `None` when the transport ran into a Wigner caustic.
    pub amplitude_t: Option<f64>,
    /// Cayley-factor degeneracies encountered along the tip trajectories.
    pub caustic_central: bool,
    pub caustic_chord: bool,
}

impl PropagatedBranch {
    /// `A_t cos(S_t/ħ - offset)` where the offset is inherited from the
    /// initial branch.
    pub fn value(&self, hbar: f64) -> Option<f64> {
        self.amplitude_t
            .map(|a| a * (self.action_t / hbar - self.branch0.maslov_offset).cos())
    }
}

/// Classical Liouville transport: the propagated function at `x` is the
/// initial function at the backward image `(x)_{-t}`.
pub fn liouville_value<W>(
    w0: W,
    model: HamiltonianModel,
    t: f64,
    x: PhasePoint,
    ode_tol: f64,
) -> Result<Option<f64>>
where
    W: Fn(PhasePoint) -> Result<Option<f64>>,
{
    let seg = flow(model, x, -t, ode_tol)?;
    w0(seg.end())
}

/// Flow both tips of `chord0` for time `t` and assemble the matched
/// configuration.
pub fn tips_flow(
    model: HamiltonianModel,
    chord0: &Chord,
    t: f64,
    ode_tol: f64,
) -> Result<MatchedConfiguration> {
    let seg_minus = flow(model, chord0.tip_minus, t, ode_tol)?;
    let seg_plus = flow(model, chord0.tip_plus, t, ode_tol)?;
    let x_tilde = midpoint(seg_minus.end(), seg_plus.end());
    let x_prime = midpoint(seg_minus.start(), seg_minus.end());
    let x_triple_prime = midpoint(seg_plus.start(), seg_plus.end());
    // the four midpoints form a parallelogram identically
    let delta4 = quadrilateral_area(x_tilde, x_prime, chord0.center, x_triple_prime, 1e-9)?;
    Ok(MatchedConfiguration {
        x0: chord0.center,
        x_tilde,
        x_prime,
        x_triple_prime,
        delta4,
        energies: (seg_plus.energy, seg_minus.energy),
        seg_minus,
        seg_plus,
        t,
    })
}

/// Transport the branch phase through the matched configuration:
///
/// `S_t = S_0 - arc(minus tip) + arc(plus tip) + Δ₄ - (E_+ - E_-) t`.
pub fn phase_transport(cfg: &MatchedConfiguration, s0: f64) -> f64 {
    s0 - arc_chord_area(&cfg.seg_minus) + arc_chord_area(&cfg.seg_plus) + cfg.delta4
        - (cfg.energies.0 - cfg.energies.1) * cfg.t
}

/// Cayley-factor degeneracies along a tip trajectory: sign changes or
/// near-zeros of `det(1 + M)` (central) and `det(1 - M)` (chord); the
/// trivial chord zero at the start of the segment is skipped.
fn cayley_flags(seg: &TrajectorySegment) -> (bool, bool) {
    let mut central = false;
    let mut chord = false;
    let mut prev_c: Option<f64> = None;
    let mut prev_k: Option<f64> = None;
    for (i, m) in seg.monodromy.iter().enumerate() {
        let dc = Mat2::IDENTITY.add(*m).det();
        if dc.abs() < CAUSTIC_DET_TOL {
            central = true;
        }
        if let Some(p) = prev_c {
            if p * dc < 0.0 {
                central = true;
            }
        }
        prev_c = Some(dc);

        if i > 0 {
            let dk = Mat2::IDENTITY.sub(*m).det();
            if dk.abs() < CAUSTIC_DET_TOL {
                chord = true;
            }
            if let Some(p) = prev_k {
                if p * dk < 0.0 {
                    chord = true;
                }
            }
            prev_k = Some(dk);
        }
    }
    (central, chord)
}

/// Transport the branch amplitude by the tip monodromies:
/// `A_t = A_0 sqrt(|v_+(0) ∧ v_-(0)| / |v_+(t) ∧ v_-(t)|)` with
/// `v_±(t) = M_± v_±(0)`.
pub fn amplitude_transport(
    cfg: &MatchedConfiguration,
    leaf0: &Leaf,
    chord0: &Chord,
    a0: f64,
) -> Result<(f64, bool, bool)> {
    let v_minus0 = leaf0.velocity(chord0.params.0);
    let v_plus0 = leaf0.velocity(chord0.params.1);
    let w0 = wedge(v_plus0, v_minus0);
    let v_minus_t = cfg.seg_minus.final_monodromy().mul_point(v_minus0);
    let v_plus_t = cfg.seg_plus.final_monodromy().mul_point(v_plus0);
    let wt = wedge(v_plus_t, v_minus_t);
    let scale = v_plus_t.norm() * v_minus_t.norm();
    if scale == 0.0 || (wt / scale).abs() < crate::leaf::WIGNER_CAUSTIC_TOL {
        return Err(CoreError::Caustic {
            kind: CausticKind::Wigner,
            indicator: if scale == 0.0 { 0.0 } else { wt / scale },
        });
    }
    let (c_minus, k_minus) = cayley_flags(&cfg.seg_minus);
    let (c_plus, k_plus) = cayley_flags(&cfg.seg_plus);
    Ok((
        a0 * (w0.abs() / wt.abs()).sqrt(),
        c_minus || c_plus,
        k_minus || k_plus,
    ))
}

/// Propagate every branch of the Wigner function rooted at `x0`.
pub fn propagate_point(
    leaf0: &Leaf,
    hbar: f64,
    x0: PhasePoint,
    model: HamiltonianModel,
    t: f64,
    ode_tol: f64,
) -> Result<Vec<PropagatedBranch>> {
    let chord_tol = 1e-9 * (1.0 + x0.norm());
    let chords = find_chords(leaf0, x0, chord_tol)?;
    let n = chords.len();
    let mut out = Vec::with_capacity(n);
    for chord in &chords {
        let s0 = chord_area(leaf0, chord)?;
        let mut caustic = caustic_indicator(leaf0, chord);
        caustic.chord_count = Some(n);
        let a0 = if caustic.is_on_caustic {
            None
        } else {
            Some(branch_amplitude(leaf0, chord, hbar)?)
        };
        let branch0 = WignerBranch {
            chord: *chord,
            action: s0,
            amplitude: a0,
            maslov_offset: std::f64::consts::FRAC_PI_4,
            caustic,
        };

        let cfg = tips_flow(model, chord, t, ode_tol)?;
        let action_t = phase_transport(&cfg, s0);
        let (amplitude_t, c_central, c_chord) = match a0 {
            Some(a0) => match amplitude_transport(&cfg, leaf0, chord, a0) {
                Ok((a, c, k)) => (Some(a), c, k),
                Err(CoreError::Caustic { .. }) => {
                    let (c_minus, k_minus) = cayley_flags(&cfg.seg_minus);
                    let (c_plus, k_plus) = cayley_flags(&cfg.seg_plus);
                    (None, c_minus || c_plus, k_minus || k_plus)
                }
                Err(e) => return Err(e),
            },
            None => (None, false, false),
        };

        let tip_minus_t = cfg.seg_minus.end();
        let tip_plus_t = cfg.seg_plus.end();
        out.push(PropagatedBranch {
            branch0,
            chord_t: Chord {
                center: cfg.x_tilde,
                tip_minus: tip_minus_t,
                tip_plus: tip_plus_t,
                xi: tip_plus_t - tip_minus_t,
                params: chord.params,
            },
            action_t,
            amplitude_t,
            caustic_central: c_central,
            caustic_chord: c_chord,
        });
    }
    Ok(out)
}

/// Flow every leaf sample for time `t`, refining where the evolved curve
/// turns sharply, and transport the velocity metadata by the monodromies.
pub fn leaf_evolution_engine(
    leaf0: &Leaf,
    model: HamiltonianModel,
    t: f64,
    ode_tol: f64,
) -> Result<Leaf> {
    // lagrangian labels: the evolved curve keeps the initial parameters
    let mut knots: Vec<f64> = leaf0.knots().to_vec();
    let max_points = 8 * knots.len();
    let max_turn = 0.35; // radians between consecutive evolved segments

    let flow_label = |s: f64| -> Result<(PhasePoint, Mat2)> {
        let seg = flow(model, leaf0.point(s), t, ode_tol)?;
        Ok((seg.end(), seg.final_monodromy()))
    };

    let mut evolved: Vec<(PhasePoint, Mat2)> = Vec::with_capacity(knots.len());
    for &s in &knots {
        evolved.push(flow_label(s)?);
    }

    for _round in 0..5 {
        if knots.len() >= max_points {
            break;
        }
        let n = knots.len();
        let mut insert: Vec<(usize, f64)> = Vec::new();
        for i in 0..n {
            let a = evolved[i].0;
            let b = evolved[(i + 1) % n].0;
            let c = evolved[(i + 2) % n].0;
            let u = b - a;
            let v = c - b;
            let (nu, nv) = (u.norm(), v.norm());
            if nu == 0.0 || nv == 0.0 {
                continue;
            }
            let cross = wedge(u, v) / (nu * nv);
            let dot = u.dot(v) / (nu * nv);
            if cross.atan2(dot).abs() > max_turn {
                // refine both segments adjacent to the sharp corner
                let s0 = knots[i];
                let mut s1 = knots[(i + 1) % n];
                if s1 <= s0 {
                    s1 += 1.0;
                }
                insert.push(((i + 1) % n, (0.5 * (s0 + s1)).rem_euclid(1.0)));
            }
        }
        if insert.is_empty() {
            break;
        }
        for (_, s) in insert {
            if knots.len() >= max_points {
                break;
            }
            // keep knots sorted and distinct
            let pos = knots.partition_point(|&k| k < s);
            let near = |a: f64, b: f64| (a - b).abs() < 1e-9;
            if pos < knots.len() && near(knots[pos], s) {
                continue;
            }
            if pos > 0 && near(knots[pos - 1], s) {
                continue;
            }
            knots.insert(pos, s);
            evolved.insert(pos, flow_label(s)?);
        }
    }

    let samples: Vec<PhasePoint> = evolved.iter().map(|(x, _)| *x).collect();
    let mut leaf_t = Leaf::from_samples(knots.clone(), samples)?;
    if leaf0.has_velocities() {
        let vel: Vec<PhasePoint> = knots
            .iter()
            .zip(evolved.iter())
            .map(|(&s, (_, m))| m.mul_point(leaf0.velocity(s)))
            .collect();
        leaf_t = leaf_t.with_velocities(vel)?;
    }
    if let Some(om) = leaf0.omega {
        leaf_t = leaf_t.with_omega(om);
    }
    leaf_t.quantum_number = leaf0.quantum_number;
    Ok(leaf_t)
}

/// Max-norm finite-difference gradient of the stationary phase
/// `Φ⁺(x'', μ) = S̄_{γ-t}(x') + S_ψ(x'') + S̄_{γt}(x''') + Δ₄` over the
/// parallelogram-respecting coordinates `x' = (x̃ + x'')/2 - μ`,
/// `x''' = (x̃ + x'')/2 + μ`, evaluated `offset_mu` away from the match.
pub fn stationary_residual_offset(
    cfg: &MatchedConfiguration,
    leaf0: &Leaf,
    model: HamiltonianModel,
    offset_mu: PhasePoint,
) -> Result<f64> {
    if cfg.t == 0.0 {
        return Ok(0.0);
    }
    let x = cfg.x_tilde;
    let shoot_tol = 1e-12;
    let guess_minus = cfg.seg_minus.end(); // start of the backward trajectory
    let guess_plus = cfg.seg_plus.start();
    let base_chord_params = nearest_chord_params(leaf0, cfg.x0)?;

    let phi = |x2: PhasePoint, mu: PhasePoint| -> Result<f64> {
        let mid = midpoint(x, x2);
        let x1 = mid - mu;
        let x3 = mid + mu;
        let seg_b = center_shoot(model, x1, -cfg.t, guess_minus, shoot_tol)?;
        let seg_f = center_shoot(model, x3, cfg.t, guess_plus, shoot_tol)?;
        let s_leaf = chord_area(
            leaf0,
            &chord_near(leaf0, x2, base_chord_params, 1e-11)?,
        )?;
        let d4 = 2.0 * (wedge(x, x1) + wedge(x2, x3));
        Ok(central_action(&seg_b) + s_leaf + central_action(&seg_f) + d4)
    };

    let x2_star = cfg.x0;
    let mu_star = (cfg.x_triple_prime - cfg.x_prime) * 0.5 + offset_mu;
    let h = 1e-4 * (1.0 + x2_star.norm().max(mu_star.norm()));
    let ep = PhasePoint::new(h, 0.0);
    let eq = PhasePoint::new(0.0, h);

    let gradients = [
        (phi(x2_star + ep, mu_star)? - phi(x2_star - ep, mu_star)?) / (2.0 * h),
        (phi(x2_star + eq, mu_star)? - phi(x2_star - eq, mu_star)?) / (2.0 * h),
        (phi(x2_star, mu_star + ep)? - phi(x2_star, mu_star - ep)?) / (2.0 * h),
        (phi(x2_star, mu_star + eq)? - phi(x2_star, mu_star - eq)?) / (2.0 * h),
    ];
    Ok(gradients.iter().fold(0.0_f64, |m, g| m.max(g.abs())))
}

/// Stationary-phase residual at the matched configuration itself.
pub fn stationary_residual(
    cfg: &MatchedConfiguration,
    leaf0: &Leaf,
    model: HamiltonianModel,
) -> Result<f64> {
    stationary_residual_offset(cfg, leaf0, model, PhasePoint::ZERO)
}

fn nearest_chord_params(leaf: &Leaf, x: PhasePoint) -> Result<(f64, f64)> {
    let chords = find_chords(leaf, x, 1e-9 * (1.0 + x.norm()))?;
    chords
        .into_iter()
        .filter(|c| !c.is_zero_length())
        .min_by(|a, b| {
            let da = (a.center - x).norm();
            let db = (b.center - x).norm();
            da.partial_cmp(&db).expect("finite")
        })
        .map(|c| c.params)
        .ok_or_else(|| CoreError::Domain("no chord at the configuration center".into()))
}

/// Track the chord with tip parameters near `params` whose midpoint is `x`
/// (Newton continuation; keeps the branch continuous under perturbation).
pub fn chord_near(leaf: &Leaf, x: PhasePoint, params: (f64, f64), tol: f64) -> Result<Chord> {
    let (mut sa, mut sb) = params;
    let mut res = midpoint(leaf.point(sa), leaf.point(sb)) - x;
    for _ in 0..60 {
        if res.norm() <= tol {
            let d = (sb - sa).rem_euclid(1.0);
            let (sm, sp) = if d <= 0.5 { (sa, sb) } else { (sb, sa) };
            let tip_minus = leaf.point(sm);
            let tip_plus = leaf.point(sp);
            return Ok(Chord {
                center: midpoint(tip_minus, tip_plus),
                tip_minus,
                tip_plus,
                xi: tip_plus - tip_minus,
                params: (sm, sp),
            });
        }
        let da = leaf.derivative(sa) * 0.5;
        let db = leaf.derivative(sb) * 0.5;
        let det = da.p * db.q - da.q * db.p;
        if det.abs() < 1e-14 {
            return Err(CoreError::Caustic {
                kind: CausticKind::Wigner,
                indicator: det,
            });
        }
        let dsa = (-res.p * db.q + res.q * db.p) / det;
        let dsb = (-da.p * res.q + da.q * res.p) / det;
        let mut lam = 1.0;
        let mut accepted = false;
        for _ in 0..15 {
            let na = sa + lam * dsa;
            let nb = sb + lam * dsb;
            let nr = midpoint(leaf.point(na), leaf.point(nb)) - x;
            if nr.norm() < res.norm() {
                sa = na.rem_euclid(1.0);
                sb = nb.rem_euclid(1.0);
                res = nr;
                accepted = true;
                break;
            }
            lam *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    Err(CoreError::RootFindFailure {
        iterations: 60,
        residual: res.norm(),
    })
}
