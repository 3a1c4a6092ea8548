//! Built-in Hamiltonian models.

use crate::error::{CoreError, Result};
use crate::geometry::{Mat2, PhasePoint};

/// One-degree-of-freedom Hamiltonians with analytic gradient and Hessian.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HamiltonianModel {
    /// `H = (p² + q²)/2`
    Harmonic,
    /// `H = (q² + p²)²/4`
    Quartic,
    /// `H = p²/2`
    Shear,
}

impl HamiltonianModel {
    pub fn name(&self) -> &'static str {
        match self {
            HamiltonianModel::Harmonic => "harmonic",
            HamiltonianModel::Quartic => "quartic",
            HamiltonianModel::Shear => "shear",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "harmonic" => Ok(HamiltonianModel::Harmonic),
            "quartic" => Ok(HamiltonianModel::Quartic),
            "shear" => Ok(HamiltonianModel::Shear),
            other => Err(CoreError::Parse(format!("unknown model '{other}'"))),
        }
    }

    pub fn energy(&self, x: PhasePoint) -> f64 {
        match self {
            HamiltonianModel::Harmonic => 0.5 * x.norm_sq(),
            HamiltonianModel::Quartic => {
                let r2 = x.norm_sq();
                0.25 * r2 * r2
            }
            HamiltonianModel::Shear => 0.5 * x.p * x.p,
        }
    }

    /// `(∂H/∂p, ∂H/∂q)` packed as a phase point.
    pub fn grad(&self, x: PhasePoint) -> PhasePoint {
        match self {
            HamiltonianModel::Harmonic => x,
            HamiltonianModel::Quartic => x * x.norm_sq(),
            HamiltonianModel::Shear => PhasePoint::new(x.p, 0.0),
        }
    }

    /// Hessian of `H` in `(p, q)` coordinates.
    pub fn hess(&self, x: PhasePoint) -> Mat2 {
        match self {
            HamiltonianModel::Harmonic => Mat2::IDENTITY,
            HamiltonianModel::Quartic => {
                let r2 = x.norm_sq();
                Mat2::new(
                    r2 + 2.0 * x.p * x.p,
                    2.0 * x.p * x.q,
                    2.0 * x.p * x.q,
                    r2 + 2.0 * x.q * x.q,
                )
            }
            HamiltonianModel::Shear => Mat2::new(1.0, 0.0, 0.0, 0.0),
        }
    }

    /// Hamiltonian vector field `J ∇H = (-∂H/∂q, ∂H/∂p)`.
    pub fn velocity(&self, x: PhasePoint) -> PhasePoint {
        let g = self.grad(x);
        PhasePoint::new(-g.q, g.p)
    }

    pub fn all() -> [HamiltonianModel; 3] {
        [
            HamiltonianModel::Harmonic,
            HamiltonianModel::Quartic,
            HamiltonianModel::Shear,
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_grad(m: HamiltonianModel, x: PhasePoint, h: f64) -> PhasePoint {
        PhasePoint::new(
            (m.energy(PhasePoint::new(x.p + h, x.q)) - m.energy(PhasePoint::new(x.p - h, x.q)))
                / (2.0 * h),
            (m.energy(PhasePoint::new(x.p, x.q + h)) - m.energy(PhasePoint::new(x.p, x.q - h)))
                / (2.0 * h),
        )
    }

    fn fd_hess(m: HamiltonianModel, x: PhasePoint, h: f64) -> Mat2 {
        let gp = fd_grad(m, PhasePoint::new(x.p + h, x.q), h);
        let gm = fd_grad(m, PhasePoint::new(x.p - h, x.q), h);
        let gq = fd_grad(m, PhasePoint::new(x.p, x.q + h), h);
        let gq2 = fd_grad(m, PhasePoint::new(x.p, x.q - h), h);
        Mat2::new(
            (gp.p - gm.p) / (2.0 * h),
            (gq.p - gq2.p) / (2.0 * h),
            (gp.q - gm.q) / (2.0 * h),
            (gq.q - gq2.q) / (2.0 * h),
        )
    }

    #[test]
    fn grad_and_hess_match_finite_differences() {
        let h = 1e-5;
        for m in HamiltonianModel::all() {
            for i in -2..3 {
                for j in -2..3 {
                    let x = PhasePoint::new(0.7 * i as f64, 0.6 * j as f64);
                    let g = m.grad(x);
                    let gf = fd_grad(m, x, h);
                    let scale = 1.0 + g.norm();
                    assert!((g - gf).norm() / scale < 1e-6, "{} grad at {:?}", m.name(), x);
                    let hh = m.hess(x);
                    let hf = fd_hess(m, x, h);
                    let dh = hh.sub(hf).max_abs() / (1.0 + hh.max_abs());
                    assert!(dh < 1e-5, "{} hess at {:?}: {}", m.name(), x, dh);
                }
            }
        }
    }

    #[test]
    fn model_names_round_trip() {
        for m in HamiltonianModel::all() {
            assert_eq!(HamiltonianModel::from_name(m.name()).unwrap(), m);
        }
        assert!(HamiltonianModel::from_name("kepler").is_err());
    }
}
