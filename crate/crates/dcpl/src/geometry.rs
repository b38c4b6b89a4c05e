//! The scalar formula core: the angle function `theta` in logarithmic
//! side-ratio coordinates, its partial derivatives (cotangent weights),
//! log-length quantities `lambda`, rescaled edge lengths and triangle
//! feasibility, and cyclic angle sums over vertex stars.
//!
//! Conventions. A triangle with side lengths `(a, b, c)` and `a` normalized to
//! 1 is encoded by the pair `x = -2 ln b`, `y = -2 ln c` (so `b = e^{-x/2}`,
//! `c = e^{-y/2}`); `theta(x, y)` is the angle opposite side `a`. The function
//! is symmetric in `x` and `y`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::Subcomplex;

/// Counterclockwise lattice-coordinate offsets of the six neighbors of an
/// interior vertex, starting with the first generating translation.
pub const NEIGHBOR_OFFSETS: [(i32, i32); 6] =
    [(1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1)];

/// Radicands below this bound are treated as infeasible rather than clamped:
/// the solver must never silently cross the feasibility boundary.
const RADICAND_FLOOR: f64 = 1e-15;

/// A pair of logarithmic side-ratio arguments for [`theta`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogLengthPair {
    pub x: f64,
    pub y: f64,
}

impl LogLengthPair {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// True iff `(1, e^{-x/2}, e^{-y/2})` satisfy the strict triangle
    /// inequalities with a safety margin against degeneracy.
    pub fn feasible(&self) -> bool {
        theta_feasible(self.x, self.y)
    }
}

/// Euclidean side lengths of a triangle; `a` is the side opposite the angle
/// returned by [`theta`] when the triangle is encoded as ratios to `a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangleLengths {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl TriangleLengths {
    pub fn new(a: f64, b: f64, c: f64) -> Self {
        Self { a, b, c }
    }

    pub fn feasible(&self) -> bool {
        self.a > 0.0
            && self.b > 0.0
            && self.c > 0.0
            && triangle_inequalities_hold([self.a, self.b, self.c])
    }

    /// Log-ratio encoding of this triangle with respect to side `a`.
    pub fn log_pair(&self) -> LogLengthPair {
        LogLengthPair::new(2.0 * (self.a / self.b).ln(), 2.0 * (self.a / self.c).ln())
    }

    /// The three interior angles `(opposite a, opposite b, opposite c)`.
    pub fn angles(&self) -> Result<[f64; 3]> {
        let at_a = theta(2.0 * (self.a / self.b).ln(), 2.0 * (self.a / self.c).ln())?;
        let at_b = theta(2.0 * (self.b / self.c).ln(), 2.0 * (self.b / self.a).ln())?;
        let at_c = theta(2.0 * (self.c / self.a).ln(), 2.0 * (self.c / self.b).ln())?;
        Ok([at_a, at_b, at_c])
    }
}

/// True iff the arguments encode a non-degenerate triangle.
pub fn theta_feasible(x: f64, y: f64) -> bool {
    let b = (-x / 2.0).exp();
    let c = (-y / 2.0).exp();
    let num = 1.0 - (b - c) * (b - c);
    let den = (b + c) * (b + c) - 1.0;
    num > 0.0 && den > 0.0 && num / den >= RADICAND_FLOOR
}

/// The angle opposite the unit side in a triangle with side ratios
/// `(1, e^{-x/2}, e^{-y/2})`:
///
/// `theta(x, y) = 2 atan sqrt((1 - (e^{-x/2} - e^{-y/2})^2) /
///                            ((e^{-x/2} + e^{-y/2})^2 - 1))`.
///
/// The arctangent form is accurate near 0 and pi; the law-of-cosines form is
/// used as an independent oracle in tests only.
pub fn theta(x: f64, y: f64) -> Result<f64> {
    let b = (-x / 2.0).exp();
    let c = (-y / 2.0).exp();
    let num = 1.0 - (b - c) * (b - c);
    let den = (b + c) * (b + c) - 1.0;
    if !(num > 0.0 && den > 0.0) {
        return Err(Error::InfeasibleTriangle(format!(
            "side ratios b={b:.6e} c={c:.6e} violate the strict triangle inequalities"
        )));
    }
    let radicand = num / den;
    if radicand < RADICAND_FLOOR {
        return Err(Error::InfeasibleTriangle(format!(
            "near-degenerate triangle: radicand {radicand:.3e} below floor {RADICAND_FLOOR:.0e}"
        )));
    }
    Ok(2.0 * radicand.sqrt().atan())
}

/// Partial derivatives of [`theta`]. With sides `(1, b, c) = (1, e^{-x/2},
/// e^{-y/2})`:
///
/// * `d theta / dx = 1/2 cot(angle opposite c)`,
/// * `d theta / dy = 1/2 cot(angle opposite b)`.
///
/// The cross pairing (the `x` derivative carries the cotangent of the angle
/// facing the `y`-side) is fixed by central finite differences of `theta`, and
/// makes the assembled second-derivative matrix the classical
/// cotangent-weight Laplacian.
pub fn theta_partials(x: f64, y: f64) -> Result<(f64, f64)> {
    let b = (-x / 2.0).exp();
    let c = (-y / 2.0).exp();
    let num = 1.0 - (b - c) * (b - c);
    let den = (b + c) * (b + c) - 1.0;
    if !(num > 0.0 && den > 0.0) || num / den < RADICAND_FLOOR {
        return Err(Error::InfeasibleTriangle(format!(
            "side ratios b={b:.6e} c={c:.6e} not strictly feasible"
        )));
    }
    // Heron: 16 K^2 = ((b+c)^2 - 1)(1 - (b-c)^2) with a = 1.
    let area4 = (num * den).sqrt();
    let cot_opp_c = (1.0 + b * b - c * c) / area4;
    let cot_opp_b = (1.0 + c * c - b * b) / area4;
    Ok((0.5 * cot_opp_c, 0.5 * cot_opp_b))
}

/// `lambda(v_a, v_b, v_c) = 2 log(|v_b - v_c| / |v_a - v_b|)`: twice the log
/// ratio of the side opposite `v_a` to the side `[v_a, v_b]`.
pub fn lambda_of(va: Complex64, vb: Complex64, vc: Complex64) -> Result<f64> {
    let opp = (vb - vc).norm();
    let spoke = (va - vb).norm();
    if opp == 0.0 || spoke == 0.0 {
        return Err(Error::DegenerateEdge);
    }
    Ok(2.0 * (opp / spoke).ln())
}

/// New edge lengths under vertex scale factors: each edge `[v, w]` of length
/// `l` becomes `l * e^{(u(v)+u(w))/2}`. Input and output edge order is
/// `[l01, l12, l20]` for vertex scale factors `[u0, u1, u2]`.
pub fn rescaled_lengths(lengths: [f64; 3], u: [f64; 3]) -> [f64; 3] {
    [
        lengths[0] * ((u[0] + u[1]) / 2.0).exp(),
        lengths[1] * ((u[1] + u[2]) / 2.0).exp(),
        lengths[2] * ((u[2] + u[0]) / 2.0).exp(),
    ]
}

/// True iff all three strict triangle inequalities hold.
pub fn triangle_inequalities_hold(l: [f64; 3]) -> bool {
    l[0] < l[1] + l[2] && l[1] < l[2] + l[0] && l[2] < l[0] + l[1]
}

/// The cyclic angle sum at an interior vertex `v0` under scale factors `u`
/// (one value per vertex of the subcomplex):
///
/// `sum_j theta(lambda(v0, v_j, v_{j+1}) + u_{j+1} - u_0,
///              lambda(v0, v_{j+1}, v_j) + u_j     - u_0)`
///
/// over the six triangles of the star in counterclockwise order. A flat or
/// constant-`u` star sums to exactly `2 pi`.
pub fn angle_sum_at(sub: &Subcomplex, u: &[f64], v0: usize) -> Result<f64> {
    if u.len() != sub.vertices.len() {
        return Err(Error::InvalidInput(format!(
            "scale field has {} values for {} vertices",
            u.len(),
            sub.vertices.len()
        )));
    }
    if !sub.is_interior(v0) {
        return Err(Error::InvalidInput(format!(
            "vertex {v0} is not interior; angle sums are defined at interior vertices"
        )));
    }
    let (m, n) = sub.coord_of(v0);
    let p0 = sub.vertices[v0].position;
    let u0 = u[v0];
    let mut ring = [0usize; 6];
    for (k, (dm, dn)) in NEIGHBOR_OFFSETS.iter().enumerate() {
        ring[k] = sub.vertex_at(m + dm, n + dn).ok_or_else(|| {
            Error::InvalidInput(format!("interior vertex {v0} is missing neighbor {k}"))
        })?;
    }
    let mut sum = 0.0;
    for j in 0..6 {
        let vj = ring[j];
        let vj1 = ring[(j + 1) % 6];
        let pj = sub.vertices[vj].position;
        let pj1 = sub.vertices[vj1].position;
        let x = lambda_of(p0, pj, pj1)? + u[vj1] - u0;
        let y = lambda_of(p0, pj1, pj)? + u[vj] - u0;
        sum += theta(x, y)?;
    }
    Ok(sum)
}

/// The monotone star sum: for a star with center `v0`, ring vertices
/// `v_1..v_6` in cyclic order and per-spoke shifts `eta`, evaluates
///
/// `sum_k theta(lambda_{0,k} + eta_k, lambda_{0,k+1} + eta_{k+1})`
///
/// with `lambda_{0,k} = 2 log(|v_{k+1} - v_k| / |v_0 - v_k|)`. For strictly
/// acute stars this sum is monotone in the shifts: componentwise nonnegative
/// `eta` can only increase it, nonpositive `eta` can only decrease it.
pub fn star_sum_perturbed(center: Complex64, ring: &[Complex64; 6], eta: &[f64; 6]) -> Result<f64> {
    let mut lam = [0.0; 6];
    for k in 0..6 {
        lam[k] = lambda_of(center, ring[k], ring[(k + 1) % 6])?;
    }
    let mut sum = 0.0;
    for k in 0..6 {
        sum += theta(lam[k] + eta[k], lam[(k + 1) % 6] + eta[(k + 1) % 6])?;
    }
    Ok(sum)
}
