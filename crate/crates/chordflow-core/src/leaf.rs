//! Closed Lagrangian leaves: periodic interpolation, chord finding for a
//! given center, arc/chord symplectic areas, and Wigner-caustic detection.

use crate::error::{CoreError, Result};
use crate::geometry::{midpoint, wedge, PhasePoint};

/// Normalized-indicator threshold for the Wigner caustic.
pub const WIGNER_CAUSTIC_TOL: f64 = 1e-8;

/// Parameter separation below which two tips count as coalesced.
const COALESCED_TOL: f64 = 1e-7;

/// Gauss-Legendre 4-point nodes and weights on [0, 1].
const GL4: [(f64, f64); 4] = [
    (0.069431844202973714, 0.17392742256872692),
    (0.33000947820757187, 0.32607257743127305),
    (0.66999052179242813, 0.32607257743127305),
    (0.93056815579702623, 0.17392742256872692),
];

fn wrap01(s: f64) -> f64 {
    let r = s.rem_euclid(1.0);
    if r == 1.0 {
        0.0
    } else {
        r
    }
}

/// Periodic piecewise-cubic Hermite curve through samples at given knots.
#[derive(Debug, Clone)]
pub struct PeriodicSpline {
    knots: Vec<f64>,
    values: Vec<PhasePoint>,
    tangents: Vec<PhasePoint>,
}

impl PeriodicSpline {
    /// Build from strictly increasing knots in [0, 1) and matching values.
    pub fn new(knots: Vec<f64>, values: Vec<PhasePoint>) -> Result<Self> {
        let n = knots.len();
        if n < 4 || values.len() != n {
            return Err(CoreError::Domain(
                "need at least 4 knot/value pairs".into(),
            ));
        }
        for w in knots.windows(2) {
            if w[1] <= w[0] {
                return Err(CoreError::Domain("knots must be strictly increasing".into()));
            }
        }
        if knots[0] < 0.0 || *knots.last().unwrap() >= 1.0 {
            return Err(CoreError::Domain("knots must lie in [0, 1)".into()));
        }
        for v in &values {
            if !v.is_finite() {
                return Err(CoreError::Domain("non-finite sample".into()));
            }
        }
        // tangent at i: derivative of the parabola through the three
        // neighboring samples (periodic wrap)
        let mut tangents = Vec::with_capacity(n);
        for i in 0..n {
            let im = (i + n - 1) % n;
            let ip = (i + 1) % n;
            let mut hm = knots[i] - knots[im];
            if hm <= 0.0 {
                hm += 1.0;
            }
            let mut hp = knots[ip] - knots[i];
            if hp <= 0.0 {
                hp += 1.0;
            }
            let xm = values[im];
            let x0 = values[i];
            let xp = values[ip];
            let m = xm * (-hp / (hm * (hm + hp)))
                + x0 * ((hp - hm) / (hm * hp))
                + xp * (hm / (hp * (hm + hp)));
            tangents.push(m);
        }
        Ok(Self {
            knots,
            values,
            tangents,
        })
    }

    pub fn len(&self) -> usize {
        self.knots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.knots.is_empty()
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[PhasePoint] {
        &self.values
    }

    /// Segment index and local coordinates for parameter `s` (wrapped).
    fn locate(&self, s: f64) -> (usize, f64, f64) {
        let s = wrap01(s);
        let n = self.knots.len();
        // binary search for the last knot <= s
        let i = match self
            .knots
            .binary_search_by(|k| k.partial_cmp(&s).unwrap())
        {
            Ok(i) => i,
            Err(0) => n - 1, // s < first knot: wrapping segment
            Err(i) => i - 1,
        };
        let s0 = self.knots[i];
        let ip = (i + 1) % n;
        let mut h = self.knots[ip] - s0;
        if h <= 0.0 {
            h += 1.0;
        }
        let mut ds = s - s0;
        if ds < 0.0 {
            ds += 1.0;
        }
        (i, ds / h, h)
    }

    pub fn point(&self, s: f64) -> PhasePoint {
        let (i, u, h) = self.locate(s);
        let ip = (i + 1) % self.knots.len();
        let (x0, x1) = (self.values[i], self.values[ip]);
        let (m0, m1) = (self.tangents[i], self.tangents[ip]);
        let u2 = u * u;
        let u3 = u2 * u;
        x0 * (2.0 * u3 - 3.0 * u2 + 1.0)
            + m0 * ((u3 - 2.0 * u2 + u) * h)
            + x1 * (-2.0 * u3 + 3.0 * u2)
            + m1 * ((u3 - u2) * h)
    }

    /// Derivative `dx/ds`.
    pub fn derivative(&self, s: f64) -> PhasePoint {
        let (i, u, h) = self.locate(s);
        let ip = (i + 1) % self.knots.len();
        let (x0, x1) = (self.values[i], self.values[ip]);
        let (m0, m1) = (self.tangents[i], self.tangents[ip]);
        let u2 = u * u;
        (x0 * (6.0 * u2 - 6.0 * u) + x1 * (6.0 * u - 6.0 * u2)) * (1.0 / h)
            + m0 * (3.0 * u2 - 4.0 * u + 1.0)
            + m1 * (3.0 * u2 - 2.0 * u)
    }

    /// `(1/2) ∫ (p q' - q p') ds` from `a` to `b` along increasing parameter
    /// (b may exceed a by up to one full period; the path wraps).
    pub fn area_integral(&self, a: f64, b: f64) -> f64 {
        debug_assert!(b >= a && b - a <= 1.0 + 1e-12);
        if b - a <= 0.0 {
            return 0.0;
        }
        // integrate segment by segment with a Gauss rule that is exact for
        // the quintic integrand of a cubic Hermite piece
        let mut total = 0.0;
        let mut s = a;
        let eps = 1e-15;
        while s < b - eps {
            let (i, u, h) = self.locate(s);
            // end of this segment in the lifted coordinate
            let seg_end_lift = s + (1.0 - u) * h;
            let e = seg_end_lift.min(b);
            let du = (e - s) / h;
            let u0 = u;
            for (node, w) in GL4 {
                let uu = u0 + du * node;
                let ss = self.knots[i] + uu * h; // may exceed 1; locate wraps
                let x = self.point(ss);
                let d = self.derivative(ss);
                total += 0.5 * (x.p * d.q - x.q * d.p) * w * du * h;
            }
            s = e;
        }
        total
    }

    /// Signed area enclosed by the full closed curve.
    pub fn enclosed_area(&self) -> f64 {
        self.area_integral(0.0, 1.0)
    }
}

/// A chord of a leaf: two tips and their midpoint.
#[derive(Debug, Clone, Copy)]
pub struct Chord {
    pub center: PhasePoint,
    pub tip_minus: PhasePoint,
    pub tip_plus: PhasePoint,
    /// Chord vector `tip_plus - tip_minus`.
    pub xi: PhasePoint,
    /// Leaf parameters `(s_minus, s_plus)` of the tips.
    pub params: (f64, f64),
}

impl Chord {
    fn from_params(leaf: &Leaf, s_minus: f64, s_plus: f64) -> Chord {
        let tip_minus = leaf.point(s_minus);
        let tip_plus = leaf.point(s_plus);
        Chord {
            center: midpoint(tip_minus, tip_plus),
            tip_minus,
            tip_plus,
            xi: tip_plus - tip_minus,
            params: (s_minus, s_plus),
        }
    }

    pub fn is_zero_length(&self) -> bool {
        let (a, b) = self.params;
        torus_dist(a, b) < COALESCED_TOL
    }
}

/// Wigner-caustic diagnostics for a chord.
#[derive(Debug, Clone, Copy)]
pub struct CausticReport {
    /// Skew product of the tip velocities, `v_plus ∧ v_minus`.
    pub indicator: f64,
    /// Indicator divided by `|v_plus||v_minus|`.
    pub normalized: f64,
    pub is_on_caustic: bool,
    /// Number of chords at this center, when known.
    pub chord_count: Option<usize>,
}

/// Closed oriented leaf with interpolation and transport metadata.
#[derive(Debug, Clone)]
pub struct Leaf {
    curve: PeriodicSpline,
    velocities: Option<PeriodicSpline>,
    orientation: f64,
    enclosed_area: f64,
    /// Frequency of the generating classical motion along the leaf.
    pub omega: Option<f64>,
    pub quantum_number: Option<u32>,
}

fn torus_dist(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

impl Leaf {
    /// Build a leaf from parameter/sample pairs (knots strictly increasing
    /// in [0, 1), curve closes periodically).
    pub fn from_samples(knots: Vec<f64>, samples: Vec<PhasePoint>) -> Result<Leaf> {
        let curve = PeriodicSpline::new(knots, samples)?;
        let area = curve.enclosed_area();
        if area == 0.0 || !area.is_finite() {
            return Err(CoreError::Domain("leaf encloses no area".into()));
        }
        Ok(Leaf {
            curve,
            velocities: None,
            orientation: area.signum(),
            enclosed_area: area,
            omega: None,
            quantum_number: None,
        })
    }

    /// Attach per-sample phase-space velocities of the generating motion.
    pub fn with_velocities(mut self, vel: Vec<PhasePoint>) -> Result<Leaf> {
        let spline = PeriodicSpline::new(self.curve.knots().to_vec(), vel)?;
        self.velocities = Some(spline);
        Ok(self)
    }

    pub fn with_omega(mut self, omega: f64) -> Leaf {
        self.omega = Some(omega);
        self
    }

    /// Record a Bohr-Sommerfeld quantum number; the signed area must equal
    /// `2 π ħ (n + 1/2)` to 1e-6 relative.
    pub fn with_quantum_number(mut self, n: u32, hbar: f64) -> Result<Leaf> {
        let want = 2.0 * std::f64::consts::PI * hbar * (n as f64 + 0.5);
        let have = self.enclosed_area.abs();
        if ((have - want) / want).abs() > 1e-6 {
            return Err(CoreError::Domain(format!(
                "leaf area {have} is not 2*pi*hbar*(n+1/2) = {want} for n = {n}"
            )));
        }
        self.quantum_number = Some(n);
        Ok(self)
    }

    /// Same curve traversed the other way (signed area negated).
    pub fn reversed(&self) -> Leaf {
        let n = self.curve.len();
        let knots = self.curve.knots().to_vec();
        let mut samples: Vec<PhasePoint> = self.curve.values().to_vec();
        samples.reverse();
        samples.rotate_right(1); // keep sample 0 at parameter 0
        let mut leaf = Leaf::from_samples(knots, samples).expect("reversal preserves validity");
        if let Some(v) = &self.velocities {
            let mut vel: Vec<PhasePoint> = v.values().to_vec();
            vel.reverse();
            vel.rotate_right(1);
            leaf = leaf.with_velocities(vel).expect("same knots");
        }
        leaf.omega = self.omega;
        leaf.quantum_number = self.quantum_number;
        let _ = n;
        leaf
    }

    pub fn point(&self, s: f64) -> PhasePoint {
        self.curve.point(s)
    }

    pub fn derivative(&self, s: f64) -> PhasePoint {
        self.curve.derivative(s)
    }

    /// Phase-space velocity of the generating motion at parameter `s`;
    /// falls back to the unit-speed tangent when no metadata is attached.
    pub fn velocity(&self, s: f64) -> PhasePoint {
        match &self.velocities {
            Some(v) => v.point(s),
            None => {
                let d = self.curve.derivative(s);
                let n = d.norm();
                if n == 0.0 {
                    d
                } else {
                    d * (1.0 / n)
                }
            }
        }
    }

    pub fn has_velocities(&self) -> bool {
        self.velocities.is_some()
    }

    pub fn velocity_samples(&self) -> Option<&[PhasePoint]> {
        self.velocities.as_ref().map(|v| v.values())
    }

    pub fn orientation(&self) -> f64 {
        self.orientation
    }

    /// Signed enclosed area `(1/2) ∮ (p dq - q dp)`.
    pub fn enclosed_area(&self) -> f64 {
        self.enclosed_area
    }

    pub fn n_samples(&self) -> usize {
        self.curve.len()
    }

    pub fn knots(&self) -> &[f64] {
        self.curve.knots()
    }

    pub fn samples(&self) -> &[PhasePoint] {
        self.curve.values()
    }

    /// Nearest point of the leaf to `x`: `(s, distance)` by scan + Newton.
    pub fn nearest(&self, x: PhasePoint) -> (f64, f64) {
        let n_scan = (4 * self.curve.len()).max(256);
        let mut best_s = 0.0;
        let mut best_d = f64::INFINITY;
        for i in 0..n_scan {
            let s = i as f64 / n_scan as f64;
            let d = (self.point(s) - x).norm_sq();
            if d < best_d {
                best_d = d;
                best_s = s;
            }
        }
        // Newton on d/ds |x(s) - x|^2 = 2 (x(s)-x).x'(s)
        let mut s = best_s;
        for _ in 0..30 {
            let r = self.point(s) - x;
            let d1 = self.derivative(s);
            let h = 1e-6;
            let d2 = (self.derivative(s + h) - self.derivative(s - h)) * (0.5 / h);
            let g = r.dot(d1);
            let gg = d1.dot(d1) + r.dot(d2);
            if gg.abs() < 1e-14 {
                break;
            }
            let step = g / gg;
            s = wrap01(s - step);
            if step.abs() < 1e-14 {
                break;
            }
        }
        let d = (self.point(s) - x).norm();
        let d0 = best_d.sqrt();
        if d <= d0 {
            (s, d)
        } else {
            (best_s, d0)
        }
    }
}

/// Circle leaf of radius `r` around `center`, oriented with the harmonic
/// flow, carrying the generating harmonic velocities and `omega = 1`.
pub fn make_circle_leaf(center: PhasePoint, r: f64, n_samples: usize) -> Result<Leaf> {
    if r <= 0.0 {
        return Err(CoreError::Domain(format!("radius must be positive, got {r}")));
    }
    if n_samples < 16 {
        return Err(CoreError::Domain(format!(
            "need at least 16 samples, got {n_samples}"
        )));
    }
    let mut knots = Vec::with_capacity(n_samples);
    let mut pts = Vec::with_capacity(n_samples);
    let mut vel = Vec::with_capacity(n_samples);
    for i in 0..n_samples {
        let s = i as f64 / n_samples as f64;
        let th = 2.0 * std::f64::consts::PI * s;
        let x = center + PhasePoint::from_polar(r, th);
        knots.push(s);
        pts.push(x);
        // displaced harmonic motion: v = J (x - center)
        vel.push((x - center).rotate_j());
    }
    Ok(Leaf::from_samples(knots, pts)?
        .with_velocities(vel)?
        .with_omega(1.0))
}

/// All chords of `leaf` centered on `x` within `tol`.
///
/// Coarse scan over tip-parameter pairs followed by 2-D Newton refinement;
/// swapped duplicates are merged and tips are ordered so that the
/// orientation arc from `tip_minus` to `tip_plus` spans the shorter
/// parameter interval.
pub fn find_chords(leaf: &Leaf, x: PhasePoint, tol: f64) -> Result<Vec<Chord>> {
    if tol <= 0.0 {
        return Err(CoreError::Precondition("tol must be positive".into()));
    }
    if !x.is_finite() {
        return Err(CoreError::Domain("non-finite center".into()));
    }

    let n_scan = (2 * leaf.n_samples()).clamp(192, 1024);
    let pts: Vec<PhasePoint> = (0..n_scan)
        .map(|i| leaf.point(i as f64 / n_scan as f64))
        .collect();
    // capture radius: a few times the largest scan gap
    let mut max_gap: f64 = 0.0;
    for i in 0..n_scan {
        let g = (pts[(i + 1) % n_scan] - pts[i]).norm();
        if g > max_gap {
            max_gap = g;
        }
    }
    let r_cap = 2.5 * max_gap;

    let mut candidates: Vec<(f64, f64)> = Vec::new();
    for i in 0..n_scan {
        for j in (i + 1)..n_scan {
            let m = midpoint(pts[i], pts[j]);
            if (m - x).norm() < r_cap {
                candidates.push((i as f64 / n_scan as f64, j as f64 / n_scan as f64));
            }
        }
    }

    collect_chords(leaf, x, tol, &candidates)
}

/// Newton-refine candidate tip pairs, merge duplicates, snap near-leaf
/// plateau roots, and order the tips.
fn collect_chords(
    leaf: &Leaf,
    x: PhasePoint,
    tol: f64,
    candidates: &[(f64, f64)],
) -> Result<Vec<Chord>> {
    let mut roots: Vec<(f64, f64)> = Vec::new();
    let mut push_root = |a: f64, b: f64| {
        let (a, b) = (wrap01(a), wrap01(b));
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        for &(ra, rb) in roots.iter() {
            if (torus_dist(lo, ra) < 1e-6 && torus_dist(hi, rb) < 1e-6)
                || (torus_dist(lo, rb) < 1e-6 && torus_dist(hi, ra) < 1e-6)
            {
                return;
            }
        }
        roots.push((lo, hi));
    };

    for &(s0a, s0b) in candidates {
        if let Some((sa, sb)) = refine_chord(leaf, x, s0a, s0b, tol) {
            let sep = torus_dist(sa, sb);
            if sep < COALESCED_TOL {
                continue; // coalesced root; handled by the on-leaf check below
            }
            if sep < 0.05 {
                // short chords within the tolerance basin of an on-leaf
                // point collapse to the zero-length chord
                let delta = (sb - sa).rem_euclid(1.0);
                let sbar = if delta <= 0.5 {
                    wrap01(sa + 0.5 * delta)
                } else {
                    wrap01(sb + 0.5 * (1.0 - delta))
                };
                if (leaf.point(sbar) - x).norm() <= tol {
                    continue;
                }
            }
            push_root(sa, sb);
        }
    }

    // on-leaf zero-length chord
    let (s_near, d_near) = leaf.nearest(x);
    if d_near <= tol {
        push_root(s_near, s_near);
    }

    if roots.len() > 8 {
        return Err(CoreError::DegenerateCenter { p: x.p, q: x.q });
    }

    let mut chords: Vec<Chord> = roots
        .into_iter()
        .map(|(a, b)| {
            let (a, b) = polish_root(leaf, x, a, b);
            // tip ordering: tip_plus follows tip_minus across the shorter
            // parameter arc
            let d_ab = (b - a).rem_euclid(1.0);
            let (sm, sp) = if d_ab <= 0.5 { (a, b) } else { (b, a) };
            Chord::from_params(leaf, sm, sp)
        })
        .collect();
    chords.sort_by(|c1, c2| c1.params.0.partial_cmp(&c2.params.0).unwrap());
    Ok(chords)
}

/// Sharpen an accepted chord root to machine precision with a few plain
/// Newton steps (keeps the best iterate; never discards the root).
fn polish_root(leaf: &Leaf, x: PhasePoint, mut sa: f64, mut sb: f64) -> (f64, f64) {
    if torus_dist(sa, sb) < COALESCED_TOL {
        return (sa, sb);
    }
    let mut best = (sa, sb);
    let mut best_res = (midpoint(leaf.point(sa), leaf.point(sb)) - x).norm();
    for _ in 0..4 {
        let res = midpoint(leaf.point(sa), leaf.point(sb)) - x;
        let da = leaf.derivative(sa) * 0.5;
        let db = leaf.derivative(sb) * 0.5;
        let det = da.p * db.q - da.q * db.p;
        if det.abs() < 1e-12 {
            break;
        }
        sa = wrap01(sa + (-res.p * db.q + res.q * db.p) / det);
        sb = wrap01(sb + (-da.p * res.q + da.q * res.p) / det);
        let r = (midpoint(leaf.point(sa), leaf.point(sb)) - x).norm();
        if r < best_res {
            best_res = r;
            best = (sa, sb);
        }
        if r < 1e-14 {
            break;
        }
    }
    best
}

/// Spatial index over tip-pair midpoints, amortizing the coarse scan when
/// many centers are queried on the same leaf.
pub struct ChordIndex {
    cell: f64,
    origin: PhasePoint,
    nx: i64,
    ny: i64,
    bins: std::collections::HashMap<(i64, i64), Vec<(f64, f64)>>,
}

impl ChordIndex {
    pub fn build(leaf: &Leaf) -> ChordIndex {
        let n_scan = (2 * leaf.n_samples()).clamp(192, 2048);
        let pts: Vec<PhasePoint> = (0..n_scan)
            .map(|i| leaf.point(i as f64 / n_scan as f64))
            .collect();
        let mut max_gap: f64 = 0.0;
        let mut lo = PhasePoint::new(f64::INFINITY, f64::INFINITY);
        let mut hi = PhasePoint::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for i in 0..n_scan {
            let g = (pts[(i + 1) % n_scan] - pts[i]).norm();
            max_gap = max_gap.max(g);
            lo = PhasePoint::new(lo.p.min(pts[i].p), lo.q.min(pts[i].q));
            hi = PhasePoint::new(hi.p.max(pts[i].p), hi.q.max(pts[i].q));
        }
        let cell = (1.5 * max_gap).max(1e-12);
        let nx = (((hi.p - lo.p) / cell).ceil() as i64 + 2).max(1);
        let ny = (((hi.q - lo.q) / cell).ceil() as i64 + 2).max(1);
        let mut bins: std::collections::HashMap<(i64, i64), Vec<(f64, f64)>> =
            std::collections::HashMap::new();
        for i in 0..n_scan {
            for j in (i + 1)..n_scan {
                let m = midpoint(pts[i], pts[j]);
                let cx = ((m.p - lo.p) / cell).floor() as i64;
                let cy = ((m.q - lo.q) / cell).floor() as i64;
                bins.entry((cx, cy))
                    .or_default()
                    .push((i as f64 / n_scan as f64, j as f64 / n_scan as f64));
            }
        }
        ChordIndex {
            cell,
            origin: lo,
            nx,
            ny,
            bins,
        }
    }

    /// Chords of `leaf` centered on `x`, seeded from the indexed bins.
    pub fn chords_at(&self, leaf: &Leaf, x: PhasePoint, tol: f64) -> Result<Vec<Chord>> {
        if tol <= 0.0 {
            return Err(CoreError::Precondition("tol must be positive".into()));
        }
        let cx = ((x.p - self.origin.p) / self.cell).floor() as i64;
        let cy = ((x.q - self.origin.q) / self.cell).floor() as i64;
        if cx < -1 || cy < -1 || cx > self.nx || cy > self.ny {
            return Ok(Vec::new());
        }
        let mut candidates: Vec<(f64, f64)> = Vec::new();
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(v) = self.bins.get(&(cx + dx, cy + dy)) {
                    candidates.extend_from_slice(v);
                }
            }
        }
        candidates.sort_by(|a, b| a.partial_cmp(b).expect("finite parameters"));
        collect_chords(leaf, x, tol, &candidates)
    }
}

/// Newton refinement of a midpoint root in tip-parameter space.
fn refine_chord(leaf: &Leaf, x: PhasePoint, s0a: f64, s0b: f64, tol: f64) -> Option<(f64, f64)> {
    let mut sa = s0a;
    let mut sb = s0b;
    let mut res = midpoint(leaf.point(sa), leaf.point(sb)) - x;
    for _ in 0..40 {
        if res.norm() <= tol {
            return Some((sa, sb));
        }
        let da = leaf.derivative(sa) * 0.5;
        let db = leaf.derivative(sb) * 0.5;
        let det = da.p * db.q - da.q * db.p;
        if det.abs() < 1e-12 {
            return None; // parallel tangents: chord-search Jacobian singular
        }
        // solve [da | db] (dsa, dsb)^T = -res
        let dsa = (-res.p * db.q + res.q * db.p) / det;
        let dsb = (-da.p * res.q + da.q * res.p) / det;
        let mut lam = 1.0;
        let mut accepted = false;
        for _ in 0..12 {
            let na = sa + lam * dsa;
            let nb = sb + lam * dsb;
            let nr = midpoint(leaf.point(na), leaf.point(nb)) - x;
            if nr.norm() < res.norm() {
                sa = wrap01(na);
                sb = wrap01(nb);
                res = nr;
                accepted = true;
                break;
            }
            lam *= 0.5;
        }
        if !accepted {
            return None;
        }
    }
    if res.norm() <= tol {
        Some((sa, sb))
    } else {
        None
    }
}

/// Symplectic area between the leaf arc from `tip_minus` to `tip_plus`
/// (along the leaf orientation) and the straight chord back, reduced to
/// `[0, |enclosed_area|)`.
pub fn chord_area(leaf: &Leaf, chord: &Chord) -> Result<f64> {
    let (sm, sp) = chord.params;
    let scale = 1.0 + chord.center.norm();
    if (leaf.point(sm) - chord.tip_minus).norm() > 1e-6 * scale
        || (leaf.point(sp) - chord.tip_plus).norm() > 1e-6 * scale
    {
        return Err(CoreError::Domain("chord tips do not lie on the leaf".into()));
    }
    if chord.is_zero_length() {
        return Ok(0.0);
    }
    let mut hi = sp;
    if hi <= sm {
        hi += 1.0;
    }
    let arc = leaf.curve.area_integral(sm, hi);
    let raw = arc + 0.5 * wedge(chord.tip_plus, chord.tip_minus);
    let a = leaf.enclosed_area.abs();
    Ok(raw.rem_euclid(a))
}

/// Velocity skew product at the chord tips and the on-caustic flag.
pub fn caustic_indicator(leaf: &Leaf, chord: &Chord) -> CausticReport {
    let vm = leaf.velocity(chord.params.0);
    let vp = leaf.velocity(chord.params.1);
    let ind = wedge(vp, vm);
    let norm = vp.norm() * vm.norm();
    let normalized = if norm > 0.0 { ind / norm } else { 0.0 };
    CausticReport {
        indicator: ind,
        normalized,
        is_on_caustic: normalized.abs() < WIGNER_CAUSTIC_TOL,
        chord_count: None,
    }
}

/// Trace the Wigner caustic: midpoints of tip pairs with parallel or
/// anti-parallel tangents, found by scanning tangent-alignment sign changes
/// and refining each by bisection.
pub fn wigner_caustic_trace(leaf: &Leaf, n_scan: usize) -> Result<Vec<PhasePoint>> {
    if n_scan < 64 {
        return Err(CoreError::Precondition(format!(
            "n_scan must be at least 64, got {n_scan}"
        )));
    }
    let tangent = |s: f64| {
        let d = leaf.derivative(s);
        let n = d.norm();
        if n == 0.0 {
            d
        } else {
            d * (1.0 / n)
        }
    };
    let tans: Vec<PhasePoint> = (0..n_scan)
        .map(|i| tangent(i as f64 / n_scan as f64))
        .collect();

    let mut locus = Vec::new();
    for i in 0..n_scan {
        let s_minus = i as f64 / n_scan as f64;
        let t_minus = tans[i];
        // scan s_plus strictly between s_minus and s_minus + 1, skipping the
        // immediate neighborhood where alignment is trivial
        let skip = 2;
        for k in skip..(n_scan - skip) {
            let j0 = (i + k) % n_scan;
            let j1 = (i + k + 1) % n_scan;
            let g0 = wedge(t_minus, tans[j0]);
            let g1 = wedge(t_minus, tans[j1]);
            if g0 == 0.0 {
                continue;
            }
            if g0 * g1 < 0.0 {
                // bisection in the lifted coordinate
                let mut lo = s_minus + (k as f64) / n_scan as f64;
                let mut hi = s_minus + (k as f64 + 1.0) / n_scan as f64;
                let mut glo = g0;
                for _ in 0..50 {
                    let mid = 0.5 * (lo + hi);
                    let gm = wedge(t_minus, tangent(mid));
                    if glo * gm <= 0.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                        glo = gm;
                    }
                }
                let s_plus = wrap01(0.5 * (lo + hi));
                // count each unordered pair once
                if s_plus > s_minus {
                    locus.push(midpoint(leaf.point(s_minus), leaf.point(s_plus)));
                }
            }
        }
    }
    Ok(locus)
}

/// Serialize a leaf as CSV rows `s,p,q` at 17 significant digits.
pub fn leaf_to_csv(leaf: &Leaf) -> String {
    let mut out = String::from("s,p,q\n");
    for (s, x) in leaf.knots().iter().zip(leaf.samples()) {
        out.push_str(&format!("{:.16e},{:.16e},{:.16e}\n", s, x.p, x.q));
    }
    out
}

/// Parse a leaf from CSV rows `s,p,q` with a header line.
pub fn leaf_from_csv(text: &str) -> Result<Leaf> {
    let mut knots = Vec::new();
    let mut pts = Vec::new();
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == "s,p,q" => {}
        _ => return Err(CoreError::Parse("expected header 's,p,q'".into())),
    }
    for (ln, line) in lines.enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut it = line.split(',');
        let parse = |tok: Option<&str>| -> Result<f64> {
            tok.ok_or_else(|| CoreError::Parse(format!("row {}: missing field", ln + 2)))?
                .trim()
                .parse::<f64>()
                .map_err(|e| CoreError::Parse(format!("row {}: {e}", ln + 2)))
        };
        let s = parse(it.next())?;
        let p = parse(it.next())?;
        let q = parse(it.next())?;
        knots.push(s);
        pts.push(PhasePoint::try_new(p, q)?);
    }
    Leaf::from_samples(knots, pts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn unit_circle() -> Leaf {
        make_circle_leaf(PhasePoint::ZERO, 1.0, 256).unwrap()
    }

    #[test]
    fn circle_area_and_orientation() {
        let leaf = unit_circle();
        assert_relative_eq!(leaf.enclosed_area(), PI, max_relative = 1e-8);
        assert_eq!(leaf.orientation(), 1.0);
        let rev = leaf.reversed();
        assert_relative_eq!(rev.enclosed_area(), -PI, max_relative = 1e-8);
    }

    #[test]
    fn circle_bohr_sommerfeld() {
        let hbar = 0.05;
        let n = 20u32;
        let r = ((2.0 * n as f64 + 1.0) * hbar).sqrt();
        let leaf = make_circle_leaf(PhasePoint::ZERO, r, 256)
            .unwrap()
            .with_quantum_number(n, hbar)
            .unwrap();
        assert_eq!(leaf.quantum_number, Some(20));
    }

    #[test]
    fn rejects_bad_circle_parameters() {
        assert!(make_circle_leaf(PhasePoint::ZERO, -1.0, 64).is_err());
        assert!(make_circle_leaf(PhasePoint::ZERO, 1.0, 8).is_err());
    }

    #[test]
    fn area_converges_under_refinement() {
        let a1 = make_circle_leaf(PhasePoint::ZERO, 1.0, 128)
            .unwrap()
            .enclosed_area();
        let a2 = make_circle_leaf(PhasePoint::ZERO, 1.0, 256)
            .unwrap()
            .enclosed_area();
        assert!(((a2 - a1) / a2).abs() < 1e-6);
    }

    #[test]
    fn single_chord_of_circle() {
        let leaf = unit_circle();
        let x = PhasePoint::new(0.0, 0.6);
        let chords = find_chords(&leaf, x, 1e-10).unwrap();
        assert_eq!(chords.len(), 1);
        let c = &chords[0];
        assert!((c.center - x).norm() < 1e-10);
        // tips at (+-0.8, 0.6); tip ordering: minus tip at smaller parameter
        assert_relative_eq!(c.tip_minus.p, 0.8, epsilon = 1e-8);
        assert_relative_eq!(c.tip_minus.q, 0.6, epsilon = 1e-8);
        assert_relative_eq!(c.tip_plus.p, -0.8, epsilon = 1e-8);
        assert_relative_eq!(c.tip_plus.q, 0.6, epsilon = 1e-8);
    }

    #[test]
    fn on_leaf_center_gives_zero_chord() {
        let leaf = unit_circle();
        let x = leaf.point(0.3);
        let chords = find_chords(&leaf, x, 1e-7).unwrap();
        assert!(chords.iter().any(|c| c.is_zero_length()));
    }

    #[test]
    fn far_outside_gives_no_chords() {
        let leaf = unit_circle();
        let chords = find_chords(&leaf, PhasePoint::new(3.0, 3.0), 1e-9).unwrap();
        assert!(chords.is_empty());
    }

    #[test]
    fn circle_center_is_degenerate() {
        let leaf = unit_circle();
        let err = find_chords(&leaf, PhasePoint::ZERO, 1e-9);
        assert!(matches!(err, Err(CoreError::DegenerateCenter { .. })));
    }

    #[test]
    fn chord_area_circular_segment() {
        let leaf = unit_circle();
        let x = PhasePoint::new(0.0, 0.6);
        let chords = find_chords(&leaf, x, 1e-11).unwrap();
        let s = chord_area(&leaf, &chords[0]).unwrap();
        let expect = 0.6_f64.acos() - 0.6 * 0.8;
        assert_relative_eq!(s, expect, epsilon = 1e-8);
    }

    #[test]
    fn complementary_arc_gives_area_complement() {
        let leaf = unit_circle();
        let x = PhasePoint::new(0.0, 0.6);
        let c = find_chords(&leaf, x, 1e-11).unwrap()[0];
        let s = chord_area(&leaf, &c).unwrap();
        let swapped = Chord {
            center: c.center,
            tip_minus: c.tip_plus,
            tip_plus: c.tip_minus,
            xi: -c.xi,
            params: (c.params.1, c.params.0),
        };
        let s2 = chord_area(&leaf, &swapped).unwrap();
        assert_relative_eq!(s + s2, leaf.enclosed_area(), epsilon = 1e-8);
    }

    #[test]
    fn zero_chord_has_zero_area() {
        let leaf = unit_circle();
        let x = leaf.point(0.125);
        let chords = find_chords(&leaf, x, 1e-7).unwrap();
        let z = chords.iter().find(|c| c.is_zero_length()).unwrap();
        assert_eq!(chord_area(&leaf, z).unwrap(), 0.0);
    }

    #[test]
    fn caustic_indicator_off_and_on() {
        let leaf = unit_circle();
        let c = find_chords(&leaf, PhasePoint::new(0.0, 0.6), 1e-11).unwrap()[0];
        let rep = caustic_indicator(&leaf, &c);
        assert!(!rep.is_on_caustic);
        // velocities at tips (+-0.8, 0.6): v = J x; indicator = 2*0.8*0.6
        assert_relative_eq!(rep.indicator.abs(), 0.96, epsilon = 1e-7);

        // diametrically opposite tips: anti-parallel velocities
        let diam = Chord::from_params(&leaf, 0.0, 0.5);
        let rep2 = caustic_indicator(&leaf, &diam);
        assert!(rep2.is_on_caustic);
    }

    #[test]
    fn circle_caustic_trace_degenerates_to_center() {
        let center = PhasePoint::new(0.4, -0.7);
        let leaf = make_circle_leaf(center, 0.8, 128).unwrap();
        let locus = wigner_caustic_trace(&leaf, 128).unwrap();
        assert!(!locus.is_empty());
        for m in &locus {
            assert!((*m - center).norm() < 1e-6);
        }
    }

    #[test]
    fn chord_index_agrees_with_direct_scan() {
        let leaf = make_circle_leaf(PhasePoint::new(0.7, -0.2), 0.9, 256).unwrap();
        let index = ChordIndex::build(&leaf);
        for i in 1..25 {
            let x = PhasePoint::new(0.7, -0.2)
                + PhasePoint::from_polar(0.07 * i as f64, 1.7 * i as f64);
            let direct = find_chords(&leaf, x, 1e-10).unwrap();
            let indexed = index.chords_at(&leaf, x, 1e-10).unwrap();
            assert_eq!(direct.len(), indexed.len(), "count mismatch at {x:?}");
            for (a, b) in direct.iter().zip(&indexed) {
                assert!((a.tip_minus - b.tip_minus).norm() < 1e-8);
                assert!((a.tip_plus - b.tip_plus).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn csv_round_trip() {
        let leaf = unit_circle();
        let text = leaf_to_csv(&leaf);
        let back = leaf_from_csv(&text).unwrap();
        assert_relative_eq!(back.enclosed_area(), leaf.enclosed_area(), epsilon = 1e-12);
        assert_eq!(back.n_samples(), leaf.n_samples());
    }

    #[test]
    fn csv_rejects_bad_header() {
        assert!(leaf_from_csv("x,y,z\n0,0,0\n").is_err());
    }
}
