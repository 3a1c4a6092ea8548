//! Numeric Moyal product on small compatible grids and the Poisson-bracket
//! evolution check.
//!
//! The product kernel is `exp(-2i(x∧x' + x'∧x'' + x''∧x)/ħ)` with the
//! normalization `(πħ)^{-2}`; the sign is pinned by the canonical check
//! `q ⋆ p = qp + iħ/2` and the normalization by `1 ⋆ B = B`.  On a
//! cell-centered square grid with `dp dq = πħ/n` the lattice phases are
//! exactly orthogonal and `1 ⋆ B = B` holds to rounding.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{CoreError, Result};
use crate::geometry::PhasePoint;
use crate::model::HamiltonianModel;
use crate::oracle::grid::{fock_synthesize, FockCoefficients};
use crate::oracle::wigner_grid::WignerGrid;

/// Default per-side cap for the O(n⁶) double quadrature.
pub const MOYAL_SIDE_CAP: usize = 32;

/// Square cell-centered grid `[-half, half]²` compatible with the discrete
/// Moyal phases: `ħ = 4 half² / (π n)`.
#[derive(Debug, Clone, Copy)]
pub struct MoyalGrid {
    pub n: usize,
    pub half: f64,
    pub hbar: f64,
}

impl MoyalGrid {
    pub fn compatible(n: usize, half: f64) -> Self {
        let hbar = 4.0 * half * half / (std::f64::consts::PI * n as f64);
        Self { n, half, hbar }
    }

    pub fn step(&self) -> f64 {
        2.0 * self.half / self.n as f64
    }

    pub fn coord(&self, i: usize) -> f64 {
        -self.half + (i as f64 + 0.5) * self.step()
    }

    pub fn point(&self, idx: usize) -> PhasePoint {
        PhasePoint::new(self.coord(idx / self.n), self.coord(idx % self.n))
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn sample(&self, f: impl Fn(PhasePoint) -> f64) -> Vec<f64> {
        (0..self.len()).map(|i| f(self.point(i))).collect()
    }
}

/// Double-quadrature Moyal product `[AB](x)` of two real fields.
pub fn moyal_product_numeric(
    grid: &MoyalGrid,
    a: &[f64],
    b: &[f64],
    side_cap: usize,
) -> Result<Vec<Complex64>> {
    if grid.n > side_cap {
        return Err(CoreError::CostGuard {
            n: grid.n,
            cap: side_cap,
        });
    }
    let npts = grid.len();
    if a.len() != npts || b.len() != npts {
        return Err(CoreError::Domain("field shape does not match grid".into()));
    }

    // pairwise phase table U[α][β] = exp(-2i x_α ∧ x_β / ħ)
    let pts: Vec<PhasePoint> = (0..npts).map(|i| grid.point(i)).collect();
    let u: Vec<Complex64> = (0..npts * npts)
        .into_par_iter()
        .map(|k| {
            let (alpha, beta) = (k / npts, k % npts);
            let w = crate::geometry::wedge(pts[alpha], pts[beta]);
            Complex64::from_polar(1.0, -2.0 * w / grid.hbar)
        })
        .collect();

    let w2 = grid.step().powi(4);
    let pref = w2 / (std::f64::consts::PI * grid.hbar).powi(2);
    let out: Vec<Complex64> = (0..npts)
        .into_par_iter()
        .map(|alpha| {
            let mut acc = Complex64::new(0.0, 0.0);
            for beta in 0..npts {
                if a[beta] == 0.0 {
                    continue;
                }
                // inner = Σ_γ U[β][γ] U[γ][α] b_γ
                let mut inner = Complex64::new(0.0, 0.0);
                let row_b = beta * npts;
                for gamma in 0..npts {
                    if b[gamma] == 0.0 {
                        continue;
                    }
                    inner += u[row_b + gamma] * u[gamma * npts + alpha] * b[gamma];
                }
                acc += a[beta] * u[alpha * npts + beta] * inner;
            }
            acc * pref
        })
        .collect();
    Ok(out)
}

/// Poisson bracket `{H, W} = ∂_q H ∂_p W - ∂_p H ∂_q W` by central
/// differences (zero on the border).
pub fn poisson_bracket(model: HamiltonianModel, w: &WignerGrid) -> Vec<f64> {
    let (np, nq) = (w.p_axis.len(), w.q_axis.len());
    let dp = w.p_axis[1] - w.p_axis[0];
    let dq = w.q_axis[1] - w.q_axis[0];
    let mut out = vec![0.0; np * nq];
    for ip in 1..np - 1 {
        for iq in 1..nq - 1 {
            let x = PhasePoint::new(w.p_axis[ip], w.q_axis[iq]);
            let g = model.grad(x);
            let dw_dp = (w.value(ip + 1, iq) - w.value(ip - 1, iq)) / (2.0 * dp);
            let dw_dq = (w.value(ip, iq + 1) - w.value(ip, iq - 1)) / (2.0 * dq);
            out[ip * nq + iq] = g.q * dw_dp - g.p * dw_dq;
        }
    }
    out
}

/// Relative L2 discrepancy between the exact quantum time derivative of the
/// Wigner function (finite difference of the oracle-evolved mixture) and the
/// classical Poisson bracket, over the interior of the grid.  Momentum rows
/// are restricted to `|p| <= p_cap`.
pub fn poisson_evolution_check(
    model: HamiltonianModel,
    states: &[(f64, FockCoefficients)],
    q_min: f64,
    q_max: f64,
    n: usize,
    dt: f64,
    p_cap: f64,
) -> Result<f64> {
    let evolve = |c: &FockCoefficients, t: f64| -> Result<FockCoefficients> {
        match model {
            HamiltonianModel::Harmonic => Ok(c.evolve_harmonic(t)),
            HamiltonianModel::Quartic => Ok(c.evolve_quartic(t)),
            HamiltonianModel::Shear => Err(CoreError::Domain(
                "shear evolution is not diagonal in the oscillator basis".into(),
            )),
        }
    };
    let grid_at = |t: f64| -> Result<WignerGrid> {
        let mut synth = Vec::with_capacity(states.len());
        for (wgt, c) in states {
            synth.push((*wgt, fock_synthesize(&evolve(c, t)?, q_min, q_max, n)?));
        }
        let refs: Vec<(f64, &crate::oracle::grid::GridWavefunction)> =
            synth.iter().map(|(w, s)| (*w, s)).collect();
        crate::oracle::wigner_grid::wigner_transform_windowed(&refs, p_cap)
    };

    let w_minus = grid_at(-dt)?;
    let w_zero = grid_at(0.0)?;
    let w_plus = grid_at(dt)?;

    let pb = poisson_bracket(model, &w_zero);
    let (np, nq) = (w_zero.p_axis.len(), w_zero.q_axis.len());
    let (bp, bq) = (np / 8, nq / 8);
    let mut num = 0.0;
    let mut den = 0.0;
    for ip in bp..np - bp {
        for iq in bq..nq - bq {
            let dwdt = (w_plus.value(ip, iq) - w_minus.value(ip, iq)) / (2.0 * dt);
            let d = dwdt - pb[ip * nq + iq];
            num += d * d;
            den += pb[ip * nq + iq] * pb[ip * nq + iq];
        }
    }
    if den == 0.0 {
        return Err(CoreError::Domain("Poisson bracket vanishes on the window".into()));
    }
    Ok((num / den).sqrt())
}
