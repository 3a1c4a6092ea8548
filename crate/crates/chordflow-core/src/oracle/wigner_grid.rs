//! Discrete Wigner transform, per-point Wigner evaluation, and exact
//! classical advection of grid fields for the quadratic oracle checks.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{CoreError, Result};
use crate::geometry::PhasePoint;
use crate::model::HamiltonianModel;
use crate::oracle::grid::GridWavefunction;

/// Real Wigner field on a rectangular `(p, q)` raster (row-major in `p`).
#[derive(Debug, Clone)]
pub struct WignerGrid {
    pub p_axis: Vec<f64>,
    pub q_axis: Vec<f64>,
    pub values: Vec<f64>,
    pub hbar: f64,
    /// Max deviation of `∫ W dp` from `|ψ(q)|²`; large values signal an
    /// under-resolved (aliasing) grid.
    pub marginal_defect: f64,
}

impl WignerGrid {
    pub fn value(&self, ip: usize, iq: usize) -> f64 {
        self.values[ip * self.q_axis.len() + iq]
    }

    /// Total integral `∬ W dp dq`.
    pub fn total(&self) -> f64 {
        let dp = self.p_axis[1] - self.p_axis[0];
        let dq = self.q_axis[1] - self.q_axis[0];
        self.values.iter().sum::<f64>() * dp * dq
    }

    /// Position marginal `∫ W dp` per q node.
    pub fn q_marginal(&self) -> Vec<f64> {
        let dp = self.p_axis[1] - self.p_axis[0];
        let nq = self.q_axis.len();
        (0..nq)
            .map(|iq| (0..self.p_axis.len()).map(|ip| self.value(ip, iq)).sum::<f64>() * dp)
            .collect()
    }

    /// Momentum marginal `∫ W dq` per p node.
    pub fn p_marginal(&self) -> Vec<f64> {
        let dq = self.q_axis[1] - self.q_axis[0];
        (0..self.p_axis.len())
            .map(|ip| {
                (0..self.q_axis.len())
                    .map(|iq| self.value(ip, iq))
                    .sum::<f64>()
                    * dq
            })
            .collect()
    }

    /// Bicubic interpolation; zero outside the raster.
    pub fn value_at(&self, x: PhasePoint) -> f64 {
        let (np, nq) = (self.p_axis.len(), self.q_axis.len());
        let dp = self.p_axis[1] - self.p_axis[0];
        let dq = self.q_axis[1] - self.q_axis[0];
        let up = (x.p - self.p_axis[0]) / dp;
        let uq = (x.q - self.q_axis[0]) / dq;
        if up < 0.0 || uq < 0.0 || up > (np - 1) as f64 || uq > (nq - 1) as f64 {
            return 0.0;
        }
        let catmull = |y: [f64; 4], f: f64| -> f64 {
            let f2 = f * f;
            let f3 = f2 * f;
            0.5 * ((2.0 * f2 - f3 - f) * y[0]
                + (3.0 * f3 - 5.0 * f2 + 2.0) * y[1]
                + (4.0 * f2 - 3.0 * f3 + f) * y[2]
                + (f3 - f2) * y[3])
        };
        let ip = (up.floor() as usize).min(np - 2);
        let iq = (uq.floor() as usize).min(nq - 2);
        let (fp, fq) = (up - ip as f64, uq - iq as f64);
        let idx = |i: isize, bound: usize| -> usize {
            i.clamp(0, bound as isize - 1) as usize
        };
        let mut rows = [0.0; 4];
        for (r, row) in rows.iter_mut().enumerate() {
            let i = idx(ip as isize + r as isize - 1, np);
            let mut cols = [0.0; 4];
            for (c, col) in cols.iter_mut().enumerate() {
                let j = idx(iq as isize + c as isize - 1, nq);
                *col = self.value(i, j);
            }
            *row = catmull(cols, fq);
        }
        catmull(rows, fp)
    }
}

/// Discrete Wigner transform of one or more weighted grid wavefunctions
/// (the mixture is linear in the density operator).
///
/// The momentum axis uses the discrete-orthogonality spacing
/// `dp = πħ/(n dq)`, which makes the position marginal exact up to edge
/// truncation.
pub fn wigner_transform_mixture(states: &[(f64, &GridWavefunction)]) -> Result<WignerGrid> {
    wigner_transform_windowed(states, f64::INFINITY)
}

/// As [`wigner_transform_mixture`], computing only momentum rows with
/// `|p| <= p_cap`.  The position-marginal defect is meaningful only for the
/// full window.
pub fn wigner_transform_windowed(
    states: &[(f64, &GridWavefunction)],
    p_cap: f64,
) -> Result<WignerGrid> {
    let (_, first) = states
        .first()
        .ok_or_else(|| CoreError::Domain("empty mixture".into()))?;
    let n = first.n;
    let hbar = first.hbar;
    let dq = first.dq();
    for (_, s) in states {
        if s.n != n || (s.dq() - dq).abs() > 1e-12 || s.hbar != hbar {
            return Err(CoreError::Domain("mixture grids do not match".into()));
        }
    }

    let dp = std::f64::consts::PI * hbar / (n as f64 * dq);
    let ks: Vec<usize> = (0..n)
        .filter(|&k| ((k as f64 - n as f64 / 2.0) * dp).abs() <= p_cap)
        .collect();
    if ks.is_empty() {
        return Err(CoreError::Domain("momentum window excludes every row".into()));
    }
    let p_axis: Vec<f64> = ks.iter().map(|&k| (k as f64 - n as f64 / 2.0) * dp).collect();
    let q_axis: Vec<f64> = (0..n).map(|i| first.q_at(i)).collect();

    // weighted tip-pair correlations c_m(q_i) = Σ_s w_s ψ*(q_i + y) ψ(q_i - y)
    let correlations: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mmax = i.min(n - 1 - i);
            let mut c = vec![Complex64::new(0.0, 0.0); mmax + 1];
            for (w, s) in states {
                for (m, cm) in c.iter_mut().enumerate() {
                    *cm += *w * s.values[i + m].conj() * s.values[i - m];
                }
            }
            c
        })
        .collect();

    // phase table e^{i 2π l / (2n)}? phases are 2π m (k - n/2) / n
    let unit: Vec<Complex64> = (0..n)
        .map(|l| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * l as f64 / n as f64))
        .collect();

    let pref = dq / (std::f64::consts::PI * hbar);
    let full_window = ks.len() == n;
    let values: Vec<f64> = ks
        .par_iter()
        .flat_map_iter(|&k| {
            let unit = &unit;
            let correlations = &correlations;
            (0..n).map(move |i| {
                let c = &correlations[i];
                let shift = k as i64 - (n / 2) as i64;
                let mut acc = c[0].re * 0.5;
                for (m, cm) in c.iter().enumerate().skip(1) {
                    let l = ((m as i64 * shift).rem_euclid(n as i64)) as usize;
                    let ph = unit[l];
                    acc += cm.re * ph.re - cm.im * ph.im;
                }
                2.0 * pref * acc
            })
        })
        .collect();

    let mut grid = WignerGrid {
        p_axis,
        q_axis,
        values,
        hbar,
        marginal_defect: f64::NAN,
    };
    if full_window {
        // marginal check against the mixture density
        let marg = grid.q_marginal();
        let mut defect: f64 = 0.0;
        for i in 0..n {
            let dens: f64 = states
                .iter()
                .map(|(w, s)| *w * s.values[i].norm_sqr())
                .sum();
            defect = defect.max((marg[i] - dens).abs());
        }
        grid.marginal_defect = defect;
    }
    Ok(grid)
}

/// Discrete Wigner transform of a single pure state.
pub fn wigner_transform(psi: &GridWavefunction) -> Result<WignerGrid> {
    wigner_transform_mixture(&[(1.0, psi)])
}

/// Wigner value at one arbitrary phase-space point by direct quadrature
/// over the correlation integral, `W = (πħ)^{-1} ∫ ψ*(q+y) ψ(q-y) e^{2ipy/ħ} dy`.
pub fn wigner_at(psi: &GridWavefunction, x: PhasePoint) -> f64 {
    let dq = psi.dq();
    let half = 0.5 * (psi.q_max - psi.q_min);
    let steps = (half / dq).floor() as usize;
    let mut acc = 0.5 * (psi.eval(x.q).conj() * psi.eval(x.q)).re;
    for m in 1..=steps {
        let y = m as f64 * dq;
        let c = psi.eval(x.q + y).conj() * psi.eval(x.q - y);
        let ph = Complex64::from_polar(1.0, 2.0 * x.p * y / psi.hbar);
        acc += (c * ph).re;
    }
    2.0 * acc * dq / (std::f64::consts::PI * psi.hbar)
}

/// Wigner values at many points (parallel).
pub fn wigner_at_many(psi: &GridWavefunction, points: &[PhasePoint]) -> Vec<f64> {
    points.par_iter().map(|x| wigner_at(psi, *x)).collect()
}

/// Exact backward classical map of the built-in models (closed forms).
pub fn exact_backward(model: HamiltonianModel, x: PhasePoint, t: f64) -> PhasePoint {
    match model {
        HamiltonianModel::Harmonic => {
            PhasePoint::from_polar(x.radius(), x.angle() - t)
        }
        HamiltonianModel::Quartic => {
            let r = x.radius();
            PhasePoint::from_polar(r, x.angle() - r * r * t)
        }
        HamiltonianModel::Shear => PhasePoint::new(x.p, x.q - x.p * t),
    }
}
