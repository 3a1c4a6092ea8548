//! Python bindings: leaves, chord geometry, the semiclassical Wigner field,
//! the transport engines, and the quartic closed forms.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use chordflow_core as core;
use core::{HamiltonianModel, PhasePoint, QuarticChordSpec};

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn model_from(name: &str) -> PyResult<HamiltonianModel> {
    HamiltonianModel::from_name(name).map_err(err)
}

/// A closed leaf curve in phase space.
#[pyclass]
struct Leaf {
    inner: core::Leaf,
}

#[pymethods]
impl Leaf {
    /// Signed enclosed area (1/2) oint (p dq - q dp).
    fn enclosed_area(&self) -> f64 {
        self.inner.enclosed_area()
    }

    fn n_samples(&self) -> usize {
        self.inner.n_samples()
    }

    /// Curve point at parameter s in [0, 1).
    fn point(&self, s: f64) -> (f64, f64) {
        let x = self.inner.point(s);
        (x.p, x.q)
    }

    /// All chords centered on (p, q): list of
    /// (tip_minus, tip_plus, action, s_minus, s_plus).
    fn chords_at(&self, p: f64, q: f64, tol: f64) -> PyResult<Vec<((f64, f64), (f64, f64), f64, f64, f64)>> {
        let x = PhasePoint::try_new(p, q).map_err(err)?;
        let chords = core::find_chords(&self.inner, x, tol).map_err(err)?;
        let mut out = Vec::with_capacity(chords.len());
        for c in &chords {
            let action = core::chord_area(&self.inner, c).map_err(err)?;
            out.push((
                (c.tip_minus.p, c.tip_minus.q),
                (c.tip_plus.p, c.tip_plus.q),
                action,
                c.params.0,
                c.params.1,
            ));
        }
        Ok(out)
    }

    /// Semiclassical Wigner value at (p, q); None on a caustic.
    fn wigner(&self, hbar: f64, p: f64, q: f64) -> PyResult<Option<f64>> {
        let x = PhasePoint::try_new(p, q).map_err(err)?;
        Ok(core::evaluate(&self.inner, hbar, x).map_err(err)?.value)
    }

    /// Evolve the leaf under a built-in model for time t.
    fn evolve(&self, model: &str, t: f64, ode_tol: f64) -> PyResult<Leaf> {
        let m = model_from(model)?;
        Ok(Leaf {
            inner: core::leaf_evolution_engine(&self.inner, m, t, ode_tol).map_err(err)?,
        })
    }

    /// Export as CSV rows "s,p,q".
    fn to_csv(&self) -> String {
        core::leaf_to_csv(&self.inner)
    }
}

/// Circle leaf of radius r around (center_p, center_q), carrying the
/// generating harmonic velocities.
#[pyfunction]
fn make_circle_leaf(center_p: f64, center_q: f64, r: f64, n_samples: usize) -> PyResult<Leaf> {
    Ok(Leaf {
        inner: core::make_circle_leaf(PhasePoint::new(center_p, center_q), r, n_samples)
            .map_err(err)?,
    })
}

/// Skew product p_x q_y - q_x p_y.
#[pyfunction]
fn wedge(xp: f64, xq: f64, yp: f64, yq: f64) -> f64 {
    core::wedge(PhasePoint::new(xp, xq), PhasePoint::new(yp, yq))
}

/// Endpoint of the Hamiltonian flow from (p, q) after time t.
#[pyfunction]
fn flow_endpoint(model: &str, p: f64, q: f64, t: f64, tol: f64) -> PyResult<(f64, f64)> {
    let m = model_from(model)?;
    let seg = core::flow(m, PhasePoint::new(p, q), t, tol).map_err(err)?;
    let x = seg.end();
    Ok((x.p, x.q))
}

/// Tips-of-the-chord transport of every branch rooted at (p0, q0):
/// list of (p_tilde, q_tilde, S0, S_t, A0, A_t) per branch.
#[pyfunction]
#[allow(clippy::too_many_arguments)]
fn propagate_point(
    leaf: &Leaf,
    hbar: f64,
    p0: f64,
    q0: f64,
    model: &str,
    t: f64,
    ode_tol: f64,
) -> PyResult<Vec<(f64, f64, f64, f64, Option<f64>, Option<f64>)>> {
    let m = model_from(model)?;
    let branches = core::propagate_point(&leaf.inner, hbar, PhasePoint::new(p0, q0), m, t, ode_tol)
        .map_err(err)?;
    Ok(branches
        .iter()
        .map(|b| {
            (
                b.chord_t.center.p,
                b.chord_t.center.q,
                b.branch0.action,
                b.action_t,
                b.branch0.amplitude,
                b.amplitude_t,
            )
        })
        .collect())
}

/// Closed-form quartic flow (r, theta) -> (r, theta + r^2 t).
#[pyfunction]
fn quartic_flow(r0: f64, theta0: f64, t: f64) -> (f64, f64) {
    core::quartic_flow(r0, theta0, t)
}

/// Closed-form quartic phase difference for tips (r-, alpha), (r+, -beta).
#[pyfunction]
fn quartic_delta_s(r_minus: f64, r_plus: f64, alpha: f64, beta: f64, t: f64) -> PyResult<f64> {
    let spec = QuarticChordSpec::new(r_minus, r_plus, alpha, beta, t).map_err(err)?;
    Ok(core::quartic_delta_s(&spec))
}

/// Closed-form evolved-chord center (r_tilde, theta_tilde).
#[pyfunction]
fn quartic_new_center(
    r_minus: f64,
    r_plus: f64,
    alpha: f64,
    beta: f64,
    t: f64,
) -> PyResult<(f64, f64)> {
    let spec = QuarticChordSpec::new(r_minus, r_plus, alpha, beta, t).map_err(err)?;
    core::quartic_new_center(&spec).map_err(err)
}

#[pymodule]
fn chordflow_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Leaf>()?;
    m.add_function(wrap_pyfunction!(make_circle_leaf, m)?)?;
    m.add_function(wrap_pyfunction!(wedge, m)?)?;
    m.add_function(wrap_pyfunction!(flow_endpoint, m)?)?;
    m.add_function(wrap_pyfunction!(propagate_point, m)?)?;
    m.add_function(wrap_pyfunction!(quartic_flow, m)?)?;
    m.add_function(wrap_pyfunction!(quartic_delta_s, m)?)?;
    m.add_function(wrap_pyfunction!(quartic_new_center, m)?)?;
    Ok(())
}
