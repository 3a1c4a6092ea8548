//! Phase-space primitives: points, the symplectic form, 2x2 matrices.
//!
//! Conventions (fixed once, validated end to end by the quartic benchmark):
//! a phase point is `x = (p, q)`, the wedge is `x ∧ y = p_x q_y - q_x p_y`,
//! and Hamilton's equations read `xdot = J ∇H` with `J = [[0, -1], [1, 0]]`
//! acting on `(p, q)`.  With these choices the harmonic flow turns `(0, 1)`
//! into `(-1, 0)` after a quarter period and positively oriented loops have
//! positive area `(1/2) ∮ (p dq - q dp)`.

use crate::error::{CoreError, Result};

/// A point `(p, q)` of the phase plane.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PhasePoint {
    pub p: f64,
    pub q: f64,
}

impl PhasePoint {
    pub const ZERO: PhasePoint = PhasePoint { p: 0.0, q: 0.0 };

    pub fn new(p: f64, q: f64) -> Self {
        Self { p, q }
    }

    /// Construct after checking both components are finite.
    pub fn try_new(p: f64, q: f64) -> Result<Self> {
        if p.is_finite() && q.is_finite() {
            Ok(Self { p, q })
        } else {
            Err(CoreError::Domain(format!(
                "non-finite phase point ({p}, {q})"
            )))
        }
    }

    /// Polar construction: `p = r cos θ`, `q = r sin θ`.
    pub fn from_polar(r: f64, theta: f64) -> Self {
        Self {
            p: r * theta.cos(),
            q: r * theta.sin(),
        }
    }

    pub fn radius(&self) -> f64 {
        self.p.hypot(self.q)
    }

    pub fn angle(&self) -> f64 {
        self.q.atan2(self.p)
    }

    pub fn norm_sq(&self) -> f64 {
        self.p * self.p + self.q * self.q
    }

    pub fn norm(&self) -> f64 {
        self.radius()
    }

    pub fn dot(&self, other: PhasePoint) -> f64 {
        self.p * other.p + self.q * other.q
    }

    pub fn is_finite(&self) -> bool {
        self.p.is_finite() && self.q.is_finite()
    }

    /// Image under the standard symplectic matrix: `J (p, q) = (-q, p)`.
    pub fn rotate_j(&self) -> PhasePoint {
        PhasePoint::new(-self.q, self.p)
    }
}

impl std::ops::Add for PhasePoint {
    type Output = PhasePoint;
    fn add(self, rhs: PhasePoint) -> PhasePoint {
        PhasePoint::new(self.p + rhs.p, self.q + rhs.q)
    }
}

impl std::ops::Sub for PhasePoint {
    type Output = PhasePoint;
    fn sub(self, rhs: PhasePoint) -> PhasePoint {
        PhasePoint::new(self.p - rhs.p, self.q - rhs.q)
    }
}

impl std::ops::Mul<f64> for PhasePoint {
    type Output = PhasePoint;
    fn mul(self, s: f64) -> PhasePoint {
        PhasePoint::new(self.p * s, self.q * s)
    }
}

impl std::ops::Neg for PhasePoint {
    type Output = PhasePoint;
    fn neg(self) -> PhasePoint {
        PhasePoint::new(-self.p, -self.q)
    }
}

/// Skew product `x ∧ y = p_x q_y - q_x p_y`.
///
/// Bilinear and antisymmetric; `(1,0) ∧ (0,1) = +1` fixes the orientation.
pub fn wedge(x: PhasePoint, y: PhasePoint) -> f64 {
    x.p * y.q - x.q * y.p
}

/// Midpoint of two phase points.
pub fn midpoint(a: PhasePoint, b: PhasePoint) -> PhasePoint {
    PhasePoint::new(0.5 * (a.p + b.p), 0.5 * (a.q + b.q))
}

/// Symplectic area of the quadrilateral whose side midpoints are
/// `(x, x', x'', x''')`: `Δ₄ = 2(x ∧ x' + x'' ∧ x''')`.
///
/// The four midpoints must form a parallelogram, `x - x' + x'' - x''' = 0`;
/// the residual is checked against `tol`.
pub fn quadrilateral_area(
    x: PhasePoint,
    x1: PhasePoint,
    x2: PhasePoint,
    x3: PhasePoint,
    tol: f64,
) -> Result<f64> {
    let residual = (x - x1 + x2 - x3).norm();
    if residual > tol {
        return Err(CoreError::Precondition(format!(
            "midpoints do not satisfy the parallelogram constraint: residual {residual:.3e} > {tol:.3e}"
        )));
    }
    Ok(2.0 * (wedge(x, x1) + wedge(x2, x3)))
}

/// A 2x2 real matrix in row-major order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2 {
        a: 1.0,
        b: 0.0,
        c: 0.0,
        d: 1.0,
    };

    /// The standard symplectic matrix on `(p, q)`.
    pub const J: Mat2 = Mat2 {
        a: 0.0,
        b: -1.0,
        c: 1.0,
        d: 0.0,
    };

    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self { a, b, c, d }
    }

    /// Rotation by `theta` in the `(p, q)` plane, i.e. `exp(theta J)`.
    pub fn rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Mat2::new(c, -s, s, c)
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn transpose(&self) -> Mat2 {
        Mat2::new(self.a, self.c, self.b, self.d)
    }

    pub fn inverse(&self) -> Option<Mat2> {
        let det = self.det();
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        Some(Mat2::new(
            self.d / det,
            -self.b / det,
            -self.c / det,
            self.a / det,
        ))
    }

    pub fn mul_mat(&self, o: Mat2) -> Mat2 {
        Mat2::new(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }

    pub fn mul_point(&self, x: PhasePoint) -> PhasePoint {
        PhasePoint::new(self.a * x.p + self.b * x.q, self.c * x.p + self.d * x.q)
    }

    pub fn add(&self, o: Mat2) -> Mat2 {
        Mat2::new(self.a + o.a, self.b + o.b, self.c + o.c, self.d + o.d)
    }

    pub fn sub(&self, o: Mat2) -> Mat2 {
        Mat2::new(self.a - o.a, self.b - o.b, self.c - o.c, self.d - o.d)
    }

    pub fn scale(&self, s: f64) -> Mat2 {
        Mat2::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }

    /// Deviation from the symplectic condition, `max |MᵀJM - J|`.
    pub fn symplectic_defect(&self) -> f64 {
        let mtjm = self.transpose().mul_mat(Mat2::J.mul_mat(*self));
        let r = mtjm.sub(Mat2::J);
        r.a.abs().max(r.b.abs()).max(r.c.abs()).max(r.d.abs())
    }

    pub fn max_abs(&self) -> f64 {
        self.a.abs().max(self.b.abs()).max(self.c.abs()).max(self.d.abs())
    }
}

/// The symplectic form used throughout, kept as an explicit object so the
/// convention is testable rather than folklore.
#[derive(Debug, Clone, Copy)]
pub struct SymplecticForm {
    /// `J` such that `xdot = J ∇H` and `x ∧ y = (Jx) · y`.
    pub j: Mat2,
}

impl Default for SymplecticForm {
    fn default() -> Self {
        Self { j: Mat2::J }
    }
}

impl SymplecticForm {
    pub fn wedge(&self, x: PhasePoint, y: PhasePoint) -> f64 {
        self.j.mul_point(x).dot(y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn wedge_convention_basis_pair() {
        assert_eq!(wedge(PhasePoint::new(1.0, 0.0), PhasePoint::new(0.0, 1.0)), 1.0);
    }

    #[test]
    fn wedge_vanishes_on_diagonal() {
        let x = PhasePoint::new(0.3, -1.7);
        assert_eq!(wedge(x, x), 0.0);
    }

    #[test]
    fn wedge_matches_form_object() {
        let form = SymplecticForm::default();
        let x = PhasePoint::new(0.2, 1.4);
        let y = PhasePoint::new(-0.9, 0.5);
        assert_relative_eq!(form.wedge(x, y), wedge(x, y), max_relative = 1e-15);
    }

    #[test]
    fn j_squares_to_minus_identity() {
        let jj = Mat2::J.mul_mat(Mat2::J);
        assert_eq!(jj, Mat2::IDENTITY.scale(-1.0));
    }

    #[test]
    fn quadrilateral_unit_square() {
        // midpoints of a unit parallelogram traversal; area is twice the
        // parallelogram area
        let d4 = quadrilateral_area(
            PhasePoint::new(0.0, 0.0),
            PhasePoint::new(1.0, 0.0),
            PhasePoint::new(1.0, 1.0),
            PhasePoint::new(0.0, 1.0),
            1e-12,
        )
        .unwrap();
        assert_relative_eq!(d4, 2.0, max_relative = 1e-15);
    }

    #[test]
    fn quadrilateral_coincident_points() {
        let x = PhasePoint::new(0.4, -0.2);
        assert_eq!(quadrilateral_area(x, x, x, x, 1e-12).unwrap(), 0.0);
    }

    #[test]
    fn quadrilateral_rejects_constraint_violation() {
        let err = quadrilateral_area(
            PhasePoint::new(0.0, 0.0),
            PhasePoint::new(1.0, 0.0),
            PhasePoint::new(1.0, 1.0),
            PhasePoint::new(0.5, 1.0),
            1e-9,
        );
        assert!(matches!(err, Err(CoreError::Precondition(_))));
    }

    #[test]
    fn non_finite_point_rejected() {
        assert!(PhasePoint::try_new(f64::NAN, 0.0).is_err());
        assert!(PhasePoint::try_new(0.0, f64::INFINITY).is_err());
    }

    proptest! {
        #[test]
        fn wedge_is_antisymmetric_and_bilinear(
            xp in -10.0..10.0f64, xq in -10.0..10.0f64,
            yp in -10.0..10.0f64, yq in -10.0..10.0f64,
            s in -5.0..5.0f64,
        ) {
            let x = PhasePoint::new(xp, xq);
            let y = PhasePoint::new(yp, yq);
            prop_assert!((wedge(x, y) + wedge(y, x)).abs() < 1e-12);
            prop_assert!((wedge(x * s, y) - s * wedge(x, y)).abs() < 1e-9);
        }

        #[test]
        fn rotation_is_symplectic(theta in -7.0..7.0f64) {
            prop_assert!(Mat2::rotation(theta).symplectic_defect() < 1e-14);
        }
    }
}
