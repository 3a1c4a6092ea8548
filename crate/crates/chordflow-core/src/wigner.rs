//! Semiclassical Wigner function of a leaf state: per-chord branches,
//! amplitudes, oriented half-branches, and their superposition.

use crate::error::{CausticKind, CoreError, Result};
use crate::geometry::PhasePoint;
use crate::leaf::{caustic_indicator, chord_area, find_chords, CausticReport, Chord, Leaf};

/// A complex number; only the little arithmetic the half-branches need.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Complex {
    pub re: f64,
    pub im: f64,
}

impl Complex {
    pub fn new(re: f64, im: f64) -> Self {
        Self { re, im }
    }

    pub fn from_polar(r: f64, phi: f64) -> Self {
        Self::new(r * phi.cos(), r * phi.sin())
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re, -self.im)
    }

    pub fn add(&self, o: Complex) -> Self {
        Self::new(self.re + o.re, self.im + o.im)
    }

    pub fn norm(&self) -> f64 {
        self.re.hypot(self.im)
    }
}

/// Phase-offset convention for the branch superposition.
#[derive(Debug, Clone, Copy)]
pub struct MaslovConvention {
    /// Offset subtracted from every branch phase (π/4 in this construction).
    pub base_offset: f64,
    /// Extra integer multiples of π/2 carried by the middle branch of a
    /// three-chord region; calibrated against the quantum oracle.
    pub middle_extra_halfpi: i32,
}

impl Default for MaslovConvention {
    fn default() -> Self {
        Self {
            base_offset: std::f64::consts::FRAC_PI_4,
            middle_extra_halfpi: 1,
        }
    }
}

/// One chord's contribution to the semiclassical Wigner function.
#[derive(Debug, Clone)]
pub struct WignerBranch {
    pub chord: Chord,
    /// Arc-chord symplectic area `S` in `[0, leaf area)`.
    pub action: f64,
    /// `A` from the velocity skew product; `None` when the branch sits on a
    /// caustic and the closed-form amplitude blows up.
    pub amplitude: Option<f64>,
    /// Total phase offset subtracted in `cos(S/ħ - offset)`.
    pub maslov_offset: f64,
    pub caustic: CausticReport,
}

impl WignerBranch {
    pub fn phase(&self, hbar: f64) -> f64 {
        self.action / hbar - self.maslov_offset
    }
}

/// The superposed evaluation at one phase-space point.
#[derive(Debug, Clone)]
pub struct WignerEvaluation {
    /// `Σ_j A_j cos(S_j/ħ - offset_j)`; `None` when any branch is flagged
    /// on-caustic.
    pub value: Option<f64>,
    pub branches: Vec<WignerBranch>,
}

/// Amplitude of a single off-caustic chord branch,
/// `A = (2ω/π) (2πħ |v_+ ∧ v_-|)^{-1/2}`.
pub fn branch_amplitude(leaf: &Leaf, chord: &Chord, hbar: f64) -> Result<f64> {
    if hbar <= 0.0 {
        return Err(CoreError::Precondition("hbar must be positive".into()));
    }
    let omega = leaf
        .omega
        .ok_or_else(|| CoreError::Domain("leaf carries no generating frequency omega".into()))?;
    let rep = caustic_indicator(leaf, chord);
    if rep.is_on_caustic {
        return Err(CoreError::Caustic {
            kind: CausticKind::Wigner,
            indicator: rep.normalized,
        });
    }
    Ok(amplitude_from_indicator(omega, rep.indicator, hbar))
}

/// `A` given the raw velocity skew product.
pub fn amplitude_from_indicator(omega: f64, indicator: f64, hbar: f64) -> f64 {
    (2.0 * omega / std::f64::consts::PI)
        * (2.0 * std::f64::consts::PI * hbar * indicator.abs()).powf(-0.5)
}

/// Evaluate the semiclassical Wigner function of `leaf` at `x`.
pub fn evaluate(leaf: &Leaf, hbar: f64, x: PhasePoint) -> Result<WignerEvaluation> {
    evaluate_with(
        leaf,
        hbar,
        x,
        1e-9 * (1.0 + x.norm()),
        &MaslovConvention::default(),
    )
}

/// As [`evaluate`], with explicit chord tolerance and offset convention.
pub fn evaluate_with(
    leaf: &Leaf,
    hbar: f64,
    x: PhasePoint,
    chord_tol: f64,
    conv: &MaslovConvention,
) -> Result<WignerEvaluation> {
    if hbar <= 0.0 {
        return Err(CoreError::Precondition("hbar must be positive".into()));
    }
    let chords = find_chords(leaf, x, chord_tol)?;
    evaluate_from_chords(leaf, hbar, &chords, conv)
}

/// Assemble the branch superposition from chords already found (for batch
/// evaluation through a chord index).
pub fn evaluate_from_chords(
    leaf: &Leaf,
    hbar: f64,
    chords: &[Chord],
    conv: &MaslovConvention,
) -> Result<WignerEvaluation> {
    if chords.is_empty() {
        return Ok(WignerEvaluation {
            value: Some(0.0),
            branches: Vec::new(),
        });
    }

    let n = chords.len();
    let mut branches = Vec::with_capacity(n);
    for chord in chords {
        let action = chord_area(leaf, chord)?;
        let mut caustic = caustic_indicator(leaf, chord);
        caustic.chord_count = Some(n);
        let amplitude = if caustic.is_on_caustic {
            None
        } else {
            Some(branch_amplitude(leaf, chord, hbar)?)
        };
        branches.push(WignerBranch {
            chord: *chord,
            action,
            amplitude,
            maslov_offset: conv.base_offset,
            caustic,
        });
    }

    // middle branch of a three-chord region carries an extra offset
    if branches.len() == 3 {
        let mut order: Vec<usize> = (0..3).collect();
        order.sort_by(|&a, &b| {
            branches[a]
                .action
                .partial_cmp(&branches[b].action)
                .expect("finite actions")
        });
        branches[order[1]].maslov_offset +=
            conv.middle_extra_halfpi as f64 * std::f64::consts::FRAC_PI_2;
    }

    let value = if branches.iter().any(|b| b.amplitude.is_none()) {
        None
    } else {
        Some(
            branches
                .iter()
                .map(|b| b.amplitude.expect("checked") * b.phase(hbar).cos())
                .sum(),
        )
    };
    Ok(WignerEvaluation { value, branches })
}

/// Oriented half-branch values `W± = Σ_j A_j exp{±i(S_j/ħ - offset_j)}`;
/// `(W+ + W-)/2` reproduces the evaluation value.
pub fn split_half_branches(eval: &WignerEvaluation, hbar: f64) -> Result<(Complex, Complex)> {
    let mut plus = Complex::default();
    for b in &eval.branches {
        let a = b.amplitude.ok_or_else(|| {
            CoreError::Precondition("cannot split an on-caustic evaluation".into())
        })?;
        plus = plus.add(Complex::from_polar(a, b.phase(hbar)));
    }
    Ok((plus, plus.conj()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::leaf::make_circle_leaf;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn fock_leaf(n: u32, hbar: f64) -> Leaf {
        let r = ((2.0 * n as f64 + 1.0) * hbar).sqrt();
        make_circle_leaf(PhasePoint::ZERO, r, 256)
            .unwrap()
            .with_quantum_number(n, hbar)
            .unwrap()
    }

    /// Exact Fock-state Wigner function, `W_n(r) = (-1)^n/(πħ) L_n(2r²/ħ) e^{-r²/ħ}`.
    fn exact_fock_wigner(n: u32, hbar: f64, r: f64) -> f64 {
        let x = 2.0 * r * r / hbar;
        let mut lm = 1.0;
        let mut l = 1.0 - x;
        if n == 0 {
            l = lm;
        }
        for k in 1..n {
            let lk = ((2.0 * k as f64 + 1.0 - x) * l - k as f64 * lm) / (k as f64 + 1.0);
            lm = l;
            l = lk;
        }
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        sign / (PI * hbar) * l * (-r * r / hbar).exp()
    }

    #[test]
    fn amplitude_harmonic_circle() {
        let hbar = 1.0;
        let leaf = fock_leaf(20, hbar);
        let r = leaf.samples()[0].norm();
        let d = 0.5 * r;
        let chords = find_chords(&leaf, PhasePoint::new(0.0, d), 1e-10).unwrap();
        let a = branch_amplitude(&leaf, &chords[0], hbar).unwrap();
        // |v+ ^ v-| = 2 c d with c = sqrt(r^2 - d^2)
        let c = (r * r - d * d).sqrt();
        let expect = (2.0 / PI) * (2.0 * PI * hbar * 2.0 * c * d).powf(-0.5);
        assert_relative_eq!(a, expect, max_relative = 1e-6);
    }

    #[test]
    fn amplitude_scales_inverse_sqrt_hbar() {
        let leaf = fock_leaf(20, 1.0);
        let x = PhasePoint::new(0.0, 3.0);
        let c = find_chords(&leaf, x, 1e-10).unwrap()[0];
        let a1 = branch_amplitude(&leaf, &c, 1.0).unwrap();
        let a2 = branch_amplitude(&leaf, &c, 2.0).unwrap();
        assert_relative_eq!(a1 / a2, 2.0_f64.sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn amplitude_errors_on_caustic() {
        let leaf = fock_leaf(5, 1.0);
        // diametral chord: anti-parallel tip velocities
        let r = leaf.samples()[0].norm();
        let diam = Chord {
            center: PhasePoint::ZERO,
            tip_minus: PhasePoint::new(r, 0.0),
            tip_plus: PhasePoint::new(-r, 0.0),
            xi: PhasePoint::new(-2.0 * r, 0.0),
            params: (0.0, 0.5),
        };
        assert!(matches!(
            branch_amplitude(&leaf, &diam, 1.0),
            Err(CoreError::Caustic { .. })
        ));
    }

    #[test]
    fn evaluate_matches_exact_fock_wigner() {
        // relative L2 error over the mid annulus below 15%
        let n = 20u32;
        let hbar = 1.0;
        let leaf = fock_leaf(n, hbar);
        let r_leaf = ((2.0 * n as f64 + 1.0) * hbar).sqrt();
        let mut num = 0.0;
        let mut den = 0.0;
        let samples = 160;
        for i in 0..samples {
            let r = (0.3 + 0.5 * i as f64 / (samples - 1) as f64) * r_leaf;
            let x = PhasePoint::from_polar(r, 0.37);
            let w = evaluate(&leaf, hbar, x).unwrap().value.unwrap();
            let we = exact_fock_wigner(n, hbar, r);
            num += (w - we) * (w - we);
            den += we * we;
        }
        let rel = (num / den).sqrt();
        assert!(rel < 0.15, "relative L2 error {rel}");
    }

    #[test]
    fn evaluate_outside_leaf_is_zero() {
        let leaf = fock_leaf(5, 1.0);
        let eval = evaluate(&leaf, 1.0, PhasePoint::new(9.0, 9.0)).unwrap();
        assert_eq!(eval.value, Some(0.0));
        assert!(eval.branches.is_empty());
    }

    #[test]
    fn evaluate_near_leaf_small_action() {
        let leaf = fock_leaf(20, 1.0);
        let r_leaf = leaf.samples()[0].norm();
        let x = PhasePoint::from_polar(r_leaf - 1e-3, 1.1);
        let eval = evaluate(&leaf, 1.0, x).unwrap();
        let b = eval
            .branches
            .iter()
            .find(|b| b.amplitude.is_some())
            .expect("off-caustic branch near leaf");
        assert!(b.action < 1e-2 * leaf.enclosed_area());
        let a = b.amplitude.unwrap();
        assert_relative_eq!(
            eval.value.unwrap(),
            a * (b.action / 1.0 - PI / 4.0).cos(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn zero_crossings_interleave_with_oracle() {
        // sign pattern of the semiclassical field along a radius matches the
        // exact Laguerre oscillation in the annulus
        let n = 20u32;
        let hbar = 1.0;
        let leaf = fock_leaf(n, hbar);
        let r_leaf = ((2.0 * n as f64 + 1.0) * hbar).sqrt();
        let mut prev_semi = 0.0;
        let mut prev_exact = 0.0;
        for i in 0..400 {
            let r = (0.35 + 0.4 * i as f64 / 399.0) * r_leaf;
            let semi = evaluate(&leaf, hbar, PhasePoint::new(r, 0.0))
                .unwrap()
                .value
                .unwrap();
            let exact = exact_fock_wigner(n, hbar, r);
            if i > 0 {
                assert_eq!(
                    semi * prev_semi < 0.0,
                    exact * prev_exact < 0.0,
                    "crossing mismatch near r = {r}"
                );
            }
            prev_semi = semi;
            prev_exact = exact;
        }
    }

    #[test]
    fn hbar_scaling_doubles_crossings() {
        let n = 20u32;
        let hbar = 1.0;
        let leaf = fock_leaf(n, hbar);
        let r_leaf = ((2.0 * n as f64 + 1.0) * hbar).sqrt();
        let count = |h: f64| {
            let mut c = 0;
            let mut prev = 0.0;
            for i in 0..1200 {
                let r = (0.35 + 0.4 * i as f64 / 1199.0) * r_leaf;
                let v = evaluate(&leaf, h, PhasePoint::new(0.0, r))
                    .unwrap()
                    .value
                    .unwrap();
                if i > 0 && v * prev < 0.0 {
                    c += 1;
                }
                prev = v;
            }
            c
        };
        let c1 = count(hbar);
        let c2 = count(hbar / 2.0);
        assert!(
            (c2 as i64 - 2 * c1 as i64).abs() <= 1,
            "crossings {c1} -> {c2}"
        );
    }

    #[test]
    fn half_branches_reconstruct_value() {
        let leaf = fock_leaf(20, 1.0);
        let mut checked = 0;
        for i in 0..100 {
            let r = 2.0 + 3.0 * (i as f64 / 99.0);
            let x = PhasePoint::from_polar(r, 0.1 + 0.06 * i as f64);
            let eval = evaluate(&leaf, 1.0, x).unwrap();
            if let Some(v) = eval.value {
                if eval.branches.is_empty() {
                    continue;
                }
                let (wp, wm) = split_half_branches(&eval, 1.0).unwrap();
                assert_relative_eq!(0.5 * (wp.re + wm.re), v, max_relative = 1e-12);
                assert_eq!(wm, wp.conj());
                checked += 1;
            }
        }
        assert!(checked > 50);
    }

    #[test]
    fn half_branch_zero_action_phase() {
        // S = 0: W± = A e^{∓iπ/4}
        let b = WignerBranch {
            chord: Chord {
                center: PhasePoint::ZERO,
                tip_minus: PhasePoint::ZERO,
                tip_plus: PhasePoint::ZERO,
                xi: PhasePoint::ZERO,
                params: (0.0, 0.0),
            },
            action: 0.0,
            amplitude: Some(2.0),
            maslov_offset: PI / 4.0,
            caustic: CausticReport {
                indicator: 1.0,
                normalized: 1.0,
                is_on_caustic: false,
                chord_count: Some(1),
            },
        };
        let eval = WignerEvaluation {
            value: Some(2.0 * (PI / 4.0).cos()),
            branches: vec![b],
        };
        let (wp, _) = split_half_branches(&eval, 1.0).unwrap();
        assert_relative_eq!(wp.re, 2.0 * (PI / 4.0).cos(), max_relative = 1e-14);
        assert_relative_eq!(wp.im, -2.0 * (PI / 4.0).sin(), max_relative = 1e-14);
    }

    #[test]
    fn amplitude_requires_omega() {
        let knots: Vec<f64> = (0..64).map(|i| i as f64 / 64.0).collect();
        let pts: Vec<PhasePoint> = knots
            .iter()
            .map(|s| PhasePoint::from_polar(1.0, 2.0 * PI * s))
            .collect();
        let leaf = Leaf::from_samples(knots, pts).unwrap();
        let chords = find_chords(&leaf, PhasePoint::new(0.0, 0.6), 1e-9).unwrap();
        assert!(branch_amplitude(&leaf, &chords[0], 1.0).is_err());
    }
}
