//! Grid wavefunctions, the oscillator eigenbasis, and exact Fock-space
//! propagation for the built-in Hamiltonians.

use num_complex::Complex64;

use crate::error::{CoreError, Result};
use crate::geometry::PhasePoint;

/// A complex wavefunction sampled on a uniform position grid.
#[derive(Debug, Clone)]
pub struct GridWavefunction {
    pub q_min: f64,
    pub q_max: f64,
    pub n: usize,
    pub values: Vec<Complex64>,
    pub hbar: f64,
}

impl GridWavefunction {
    pub fn new(q_min: f64, q_max: f64, n: usize, hbar: f64, values: Vec<Complex64>) -> Result<Self> {
        if n < 8 || values.len() != n {
            return Err(CoreError::Domain("grid needs at least 8 matching samples".into()));
        }
        if q_max <= q_min || hbar <= 0.0 {
            return Err(CoreError::Domain("invalid grid extent or hbar".into()));
        }
        Ok(Self {
            q_min,
            q_max,
            n,
            values,
            hbar,
        })
    }

    pub fn dq(&self) -> f64 {
        (self.q_max - self.q_min) / (self.n - 1) as f64
    }

    pub fn q_at(&self, i: usize) -> f64 {
        self.q_min + i as f64 * self.dq()
    }

    pub fn norm_sq_integral(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.dq()
    }

    pub fn normalize(&mut self) {
        let n = self.norm_sq_integral().sqrt();
        if n > 0.0 {
            for v in &mut self.values {
                *v /= n;
            }
        }
    }

    /// Cubic (Catmull-Rom) interpolation of the sampled wavefunction;
    /// zero outside the grid.
    pub fn eval(&self, q: f64) -> Complex64 {
        let dq = self.dq();
        let u = (q - self.q_min) / dq;
        if u < 0.0 || u > (self.n - 1) as f64 {
            return Complex64::new(0.0, 0.0);
        }
        let i1 = (u.floor() as usize).min(self.n - 2);
        let f = u - i1 as f64;
        let i0 = i1.saturating_sub(1);
        let i2 = i1 + 1;
        let i3 = (i1 + 2).min(self.n - 1);
        let (y0, y1, y2, y3) = (
            self.values[i0],
            self.values[i1],
            self.values[i2],
            self.values[i3],
        );
        let f2 = f * f;
        let f3 = f2 * f;
        0.5 * ((2.0 * f2 - f3 - f) * y0
            + (3.0 * f3 - 5.0 * f2 + 2.0) * y1
            + (4.0 * f2 - 3.0 * f3 + f) * y2
            + (f3 - f2) * y3)
    }
}

/// Normalized oscillator eigenfunctions `φ_0..φ_nmax` at `q`, by the stable
/// three-term recurrence.
pub fn hermite_functions(n_max: usize, q: f64, hbar: f64) -> Vec<f64> {
    let xi = q / hbar.sqrt();
    let mut out = Vec::with_capacity(n_max + 1);
    let phi0 = (std::f64::consts::PI * hbar).powf(-0.25) * (-0.5 * xi * xi).exp();
    out.push(phi0);
    if n_max == 0 {
        return out;
    }
    out.push(std::f64::consts::SQRT_2 * xi * phi0);
    for k in 2..=n_max {
        let kf = k as f64;
        let next = (2.0 / kf).sqrt() * xi * out[k - 1] - ((kf - 1.0) / kf).sqrt() * out[k - 2];
        out.push(next);
    }
    out
}

/// Fock-basis expansion of a state of the oscillator `(p̂² + q̂²)/2`.
#[derive(Debug, Clone)]
pub struct FockCoefficients {
    pub coeffs: Vec<Complex64>,
    pub hbar: f64,
}

impl FockCoefficients {
    pub fn n_max(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Exact quartic evolution: `c_n(t) = c_n exp(-i ħ (n + 1/2)² t)` for
    /// `Ĥ = ((p̂² + q̂²)/2)²`.
    pub fn evolve_quartic(&self, t: f64) -> FockCoefficients {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(n, c)| {
                let e = self.hbar * (n as f64 + 0.5).powi(2);
                c * Complex64::from_polar(1.0, -e * t)
            })
            .collect();
        FockCoefficients {
            coeffs,
            hbar: self.hbar,
        }
    }

    /// Exact harmonic evolution: `c_n(t) = c_n exp(-i (n + 1/2) t)`.
    pub fn evolve_harmonic(&self, t: f64) -> FockCoefficients {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(n, c)| c * Complex64::from_polar(1.0, -(n as f64 + 0.5) * t))
            .collect();
        FockCoefficients {
            coeffs,
            hbar: self.hbar,
        }
    }
}

/// Project a grid wavefunction onto the oscillator eigenbasis; the
/// truncation tail `|c_nmax|²` must stay below 1e-10.
pub fn fock_project(psi: &GridWavefunction, n_max: usize) -> Result<FockCoefficients> {
    let dq = psi.dq();
    let mut coeffs = vec![Complex64::new(0.0, 0.0); n_max + 1];
    for i in 0..psi.n {
        let q = psi.q_at(i);
        let phis = hermite_functions(n_max, q, psi.hbar);
        let v = psi.values[i] * dq;
        for (k, phi) in phis.iter().enumerate() {
            coeffs[k] += v * *phi;
        }
    }
    let tail = coeffs[n_max].norm_sqr();
    if tail >= 1e-10 {
        return Err(CoreError::Truncation {
            tail,
            limit: 1e-10,
        });
    }
    Ok(FockCoefficients {
        coeffs,
        hbar: psi.hbar,
    })
}

/// Synthesize a grid wavefunction from Fock coefficients.
pub fn fock_synthesize(
    c: &FockCoefficients,
    q_min: f64,
    q_max: f64,
    n: usize,
) -> Result<GridWavefunction> {
    let mut values = vec![Complex64::new(0.0, 0.0); n];
    let dq = (q_max - q_min) / (n - 1) as f64;
    for (i, v) in values.iter_mut().enumerate() {
        let q = q_min + i as f64 * dq;
        let phis = hermite_functions(c.n_max(), q, c.hbar);
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, phi) in phis.iter().enumerate() {
            acc += c.coeffs[k] * *phi;
        }
        *v = acc;
    }
    GridWavefunction::new(q_min, q_max, n, c.hbar, values)
}

/// Oscillator eigenstate `|k⟩` on a grid.
pub fn oscillator_eigenstate(
    k: usize,
    q_min: f64,
    q_max: f64,
    n: usize,
    hbar: f64,
) -> Result<GridWavefunction> {
    let mut values = vec![Complex64::new(0.0, 0.0); n];
    let dq = (q_max - q_min) / (n - 1) as f64;
    for (i, v) in values.iter_mut().enumerate() {
        let q = q_min + i as f64 * dq;
        *v = Complex64::new(hermite_functions(k, q, hbar)[k], 0.0);
    }
    GridWavefunction::new(q_min, q_max, n, hbar, values)
}

/// Phase-space displaced eigenstate: `D(center)|k⟩`, with
/// `(Dψ)(q) = exp{i p_c (q - q_c/2)/ħ} ψ(q - q_c)`.
pub fn displaced_fock(
    k: usize,
    center: PhasePoint,
    q_min: f64,
    q_max: f64,
    n: usize,
    hbar: f64,
) -> Result<GridWavefunction> {
    let mut values = vec![Complex64::new(0.0, 0.0); n];
    let dq = (q_max - q_min) / (n - 1) as f64;
    for (i, v) in values.iter_mut().enumerate() {
        let q = q_min + i as f64 * dq;
        let base = hermite_functions(k, q - center.q, hbar)[k];
        let phase = center.p * (q - 0.5 * center.q) / hbar;
        *v = Complex64::from_polar(base, phase);
    }
    GridWavefunction::new(q_min, q_max, n, hbar, values)
}

/// Exact shear evolution `exp(-i p̂² t / 2ħ)` by discrete Fourier transform.
pub fn shear_evolve(psi: &GridWavefunction, t: f64) -> GridWavefunction {
    let n = psi.n;
    let dq = psi.dq();
    let hbar = psi.hbar;
    let dp = 2.0 * std::f64::consts::PI * hbar / (n as f64 * dq);
    let p_at = |k: usize| (k as f64 - n as f64 / 2.0) * dp;

    // forward transform
    let mut hat = vec![Complex64::new(0.0, 0.0); n];
    for (k, h) in hat.iter_mut().enumerate() {
        let p = p_at(k);
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, v) in psi.values.iter().enumerate() {
            acc += v * Complex64::from_polar(1.0, -p * psi.q_at(j) / hbar);
        }
        *h = acc * Complex64::from_polar(1.0, -p * p * t / (2.0 * hbar));
    }
    // inverse transform (dp dq / 2πħ = 1/n restores the samples)
    let scale = dp * dq / (2.0 * std::f64::consts::PI * hbar);
    let values: Vec<Complex64> = (0..n)
        .map(|j| {
            let q = psi.q_at(j);
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, h) in hat.iter().enumerate() {
                acc += h * Complex64::from_polar(1.0, p_at(k) * q / hbar);
            }
            acc * scale
        })
        .collect();
    GridWavefunction {
        q_min: psi.q_min,
        q_max: psi.q_max,
        n,
        values,
        hbar,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn grid() -> (f64, f64, usize, f64) {
        (-10.0, 10.0, 1024, 1.0)
    }

    #[test]
    fn eigenstates_are_orthonormal() {
        let (a, b, n, h) = grid();
        let dq = (b - a) / (n - 1) as f64;
        for k in [0usize, 1, 5, 20] {
            let mut psi = oscillator_eigenstate(k, a, b, n, h).unwrap();
            psi.normalize();
            assert_relative_eq!(psi.norm_sq_integral(), 1.0, epsilon = 1e-10);
            let other = oscillator_eigenstate(k + 1, a, b, n, h).unwrap();
            let ip: Complex64 = psi
                .values
                .iter()
                .zip(&other.values)
                .map(|(u, v)| u.conj() * v)
                .sum::<Complex64>()
                * dq;
            assert!(ip.norm() < 1e-10);
        }
    }

    #[test]
    fn fock_project_ground_state() {
        let (a, b, n, h) = grid();
        let psi = oscillator_eigenstate(0, a, b, n, h).unwrap();
        let c = fock_project(&psi, 30).unwrap();
        assert_relative_eq!(c.coeffs[0].re, 1.0, epsilon = 1e-10);
        for k in 1..=30 {
            assert!(c.coeffs[k].norm() < 1e-10);
        }
    }

    #[test]
    fn displaced_ground_state_is_poissonian() {
        let (a, b, n, h) = grid();
        let center = PhasePoint::new(0.9, -0.6);
        let psi = displaced_fock(0, center, a, b, n, h).unwrap();
        let c = fock_project(&psi, 40).unwrap();
        let alpha_sq = center.norm_sq() / (2.0 * h);
        let mut factorial = 1.0;
        for k in 0..8 {
            if k > 0 {
                factorial *= k as f64;
            }
            let expect = (-alpha_sq).exp() * alpha_sq.powi(k as i32) / factorial;
            assert_relative_eq!(c.coeffs[k].norm_sqr(), expect, max_relative = 1e-6);
        }
    }

    #[test]
    fn project_synthesize_round_trip() {
        let (a, b, n, h) = grid();
        let psi = displaced_fock(3, PhasePoint::new(0.5, 1.1), a, b, n, h).unwrap();
        let c = fock_project(&psi, 60).unwrap();
        let back = fock_synthesize(&c, a, b, n).unwrap();
        let dq = psi.dq();
        let l2: f64 = psi
            .values
            .iter()
            .zip(&back.values)
            .map(|(u, v)| (u - v).norm_sqr())
            .sum::<f64>()
            * dq;
        assert!(l2.sqrt() < 1e-8, "round-trip L2 {}", l2.sqrt());
    }

    #[test]
    fn truncation_tail_detected() {
        let (a, b, n, h) = grid();
        let psi = displaced_fock(0, PhasePoint::new(3.0, 0.0), a, b, n, h).unwrap();
        assert!(matches!(
            fock_project(&psi, 6),
            Err(CoreError::Truncation { .. })
        ));
    }

    #[test]
    fn quartic_evolution_is_unitary_and_diagonal() {
        let (a, b, n, h) = grid();
        let psi = displaced_fock(2, PhasePoint::new(0.7, 0.4), a, b, n, h).unwrap();
        let c = fock_project(&psi, 60).unwrap();
        let ct = c.evolve_quartic(0.9);
        assert_relative_eq!(ct.norm_sq(), c.norm_sq(), epsilon = 1e-12);
        // eigenstate: global phase only
        let e = fock_project(&oscillator_eigenstate(4, a, b, n, h).unwrap(), 30).unwrap();
        let et = e.evolve_quartic(1.3);
        for k in 0..=30 {
            assert_relative_eq!(et.coeffs[k].norm(), e.coeffs[k].norm(), epsilon = 1e-12);
        }
    }

    #[test]
    fn two_level_relative_phase() {
        // c0 = c1 = 1/sqrt(2), hbar = 1: relative phase e^{-2 i t}
        let h = 1.0;
        let c = FockCoefficients {
            coeffs: vec![
                Complex64::new(1.0 / 2.0_f64.sqrt(), 0.0),
                Complex64::new(1.0 / 2.0_f64.sqrt(), 0.0),
            ],
            hbar: h,
        };
        let t = 0.37;
        let ct = c.evolve_quartic(t);
        let rel = ct.coeffs[1] / ct.coeffs[0];
        let expect = Complex64::from_polar(1.0, -2.0 * h * t);
        assert!((rel - expect).norm() < 1e-12);
    }

    #[test]
    fn shear_round_trip_and_unitarity() {
        let (a, b, n, h) = grid();
        let psi = displaced_fock(1, PhasePoint::new(0.4, 0.3), a, b, n, h).unwrap();
        let fwd = shear_evolve(&psi, 0.45);
        assert_relative_eq!(fwd.norm_sq_integral(), 1.0, epsilon = 1e-8);
        let back = shear_evolve(&fwd, -0.45);
        let dq = psi.dq();
        let l2: f64 = psi
            .values
            .iter()
            .zip(&back.values)
            .map(|(u, v)| (u - v).norm_sqr())
            .sum::<f64>()
            * dq;
        assert!(l2.sqrt() < 1e-9);
    }

    #[test]
    fn cubic_eval_matches_samples() {
        let (a, b, n, h) = grid();
        let psi = oscillator_eigenstate(6, a, b, n, h).unwrap();
        let q = psi.q_at(100);
        assert!((psi.eval(q) - psi.values[100]).norm() < 1e-12);
        // off-lattice accuracy
        let qq = q + 0.4 * psi.dq();
        let exact = hermite_functions(6, qq, h)[6];
        assert!((psi.eval(qq).re - exact).abs() < 1e-6);
    }
}
