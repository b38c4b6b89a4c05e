//! Dirichlet solver for vertex scale factors.
//!
//! Given boundary values, find interior scale factors `u` such that every
//! interior vertex's rescaled angle sum equals 2 pi. The critical-point
//! system `G(u) = 0`, with `G_i = 2 pi - angle_sum_at(v_i)`, is the gradient
//! of a locally strictly convex functional, so it is solved by damped Newton
//! iteration: the Jacobian of `G` is a cotangent-weighted Laplacian over the
//! interior vertices, symmetric and positive semidefinite while the rescaled
//! triangles stay acute.

use std::ops::Deref;

use crate::error::{Error, Result};
use crate::geometry::{angle_sum_at, lambda_of, rescaled_lengths, theta_partials, triangle_inequalities_hold, NEIGHBOR_OFFSETS};
use crate::lattice::Subcomplex;

/// Per-vertex log scale factors, aligned with `Subcomplex` vertex indexing.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleField {
    pub values: Vec<f64>,
}

impl ScaleField {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn constant(len: usize, value: f64) -> Self {
        Self { values: vec![value; len] }
    }

    pub fn zeros(len: usize) -> Self {
        Self::constant(len, 0.0)
    }
}

impl Deref for ScaleField {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.values
    }
}

impl From<Vec<f64>> for ScaleField {
    fn from(values: Vec<f64>) -> Self {
        Self { values }
    }
}

/// Knobs for the damped Newton iteration.
#[derive(Debug, Clone)]
pub struct SolverOptions {
    /// Stop when the gradient max-norm (angle defect in radians) drops below
    /// this.
    pub gradient_tolerance: f64,
    /// Maximum number of gradient evaluations at accepted iterates.
    pub max_iterations: usize,
    /// Backtracking factor in (0, 1).
    pub line_search_shrink: f64,
    /// Full-length starting field; its boundary entries are overwritten by
    /// the prescribed boundary values. Defaults to the harmonic extension.
    pub initial_guess: Option<ScaleField>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            gradient_tolerance: 1e-10,
            max_iterations: 50,
            line_search_shrink: 0.5,
            initial_guess: None,
        }
    }
}

/// Outcome of a Dirichlet solve.
#[derive(Debug, Clone)]
pub struct SolveResult {
    pub u: ScaleField,
    /// Gradient evaluations at accepted iterates (1 when the initial field
    /// already satisfies the tolerance).
    pub iterations: usize,
    pub final_gradient_norm: f64,
    pub converged: bool,
}

/// Sparse symmetric matrix over interior vertices, stored by rows of
/// `(column, value)` pairs in column order.
#[derive(Debug, Clone)]
pub struct SparseMatrix {
    pub n: usize,
    pub rows: Vec<Vec<(usize, f64)>>,
}

impl SparseMatrix {
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for (i, row) in self.rows.iter().enumerate() {
            let mut s = 0.0;
            for &(j, v) in row {
                s += v * x[j];
            }
            y[i] = s;
        }
        y
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n];
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                if j == i {
                    d[i] = v;
                }
            }
        }
        d
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut m = vec![vec![0.0; self.n]; self.n];
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                m[i][j] = v;
            }
        }
        m
    }
}

/// True iff every triangle's rescaled edge lengths satisfy the strict
/// triangle inequalities.
pub fn feasibility(sub: &Subcomplex, u: &[f64]) -> bool {
    for t in &sub.triangles {
        let p = [sub.vertices[t[0]].position, sub.vertices[t[1]].position, sub.vertices[t[2]].position];
        let lengths = [
            (p[0] - p[1]).norm(),
            (p[1] - p[2]).norm(),
            (p[2] - p[0]).norm(),
        ];
        let rescaled = rescaled_lengths(lengths, [u[t[0]], u[t[1]], u[t[2]]]);
        if !triangle_inequalities_hold(rescaled) {
            return false;
        }
    }
    true
}

/// Angle defects `2 pi - angle_sum_at(v_i)` at the interior vertices, in
/// `interior_vertices` order.
pub fn gradient(sub: &Subcomplex, u: &[f64]) -> Result<Vec<f64>> {
    let mut g = Vec::with_capacity(sub.interior_vertices.len());
    for &v in &sub.interior_vertices {
        let sum = angle_sum_at(sub, u, v).map_err(|e| {
            Error::InfeasibleScaleField(format!("angle sum at vertex {v}: {e}"))
        })?;
        g.push(2.0 * std::f64::consts::PI - sum);
    }
    Ok(g)
}

/// Jacobian of [`gradient`] with respect to the interior scale factors: a
/// cotangent-weighted Laplacian. Entry `(i, j)` is minus the cotangent
/// weight of edge `(v_i, v_j)`; the diagonal carries the full weight sum,
/// including edges to boundary vertices.
pub fn hessian(sub: &Subcomplex, u: &[f64]) -> Result<SparseMatrix> {
    let n = sub.interior_vertices.len();
    // Map vertex index -> interior position.
    let mut interior_pos = vec![usize::MAX; sub.vertices.len()];
    for (k, &v) in sub.interior_vertices.iter().enumerate() {
        interior_pos[v] = k;
    }

    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::with_capacity(7); n];
    for (i, &v0) in sub.interior_vertices.iter().enumerate() {
        let (m, n0) = sub.coord_of(v0);
        let p0 = sub.vertices[v0].position;
        let u0 = u[v0];
        let mut diag = 0.0;
        // Off-diagonal accumulator per ring slot.
        let mut off = [0.0f64; 6];
        for j in 0..6 {
            let (dm1, dn1) = NEIGHBOR_OFFSETS[j];
            let (dm2, dn2) = NEIGHBOR_OFFSETS[(j + 1) % 6];
            let vj = sub
                .vertex_at(m + dm1, n0 + dn1)
                .ok_or_else(|| Error::TopologyFailure(format!("missing neighbor of interior vertex {v0}")))?;
            let vj1 = sub
                .vertex_at(m + dm2, n0 + dn2)
                .ok_or_else(|| Error::TopologyFailure(format!("missing neighbor of interior vertex {v0}")))?;
            let pj = sub.vertices[vj].position;
            let pj1 = sub.vertices[vj1].position;
            let x = lambda_of(p0, pj, pj1)? + u[vj1] - u0;
            let y = lambda_of(p0, pj1, pj)? + u[vj] - u0;
            let (tx, ty) = theta_partials(x, y).map_err(|e| {
                Error::InfeasibleScaleField(format!("triangle at vertex {v0}: {e}"))
            })?;
            // The angle at v0 depends on u[vj1] through x and on u[vj]
            // through y; its u0-derivative is -(tx + ty).
            diag += tx + ty;
            off[(j + 1) % 6] -= tx;
            off[j] -= ty;
        }
        let mut row = Vec::with_capacity(7);
        for j in 0..6 {
            let (dm, dn) = NEIGHBOR_OFFSETS[j];
            let vj = sub.vertex_at(m + dm, n0 + dn).unwrap();
            let k = interior_pos[vj];
            if k != usize::MAX {
                row.push((k, off[j]));
            }
        }
        row.push((i, diag));
        row.sort_by_key(|&(j, _)| j);
        rows[i] = row;
    }
    Ok(SparseMatrix { n, rows })
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |acc, &x| acc.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Jacobi-preconditioned conjugate gradients for `A x = b`, stopping at
/// `||r||_2 <= rel_tol * ||b||_2`.
fn pcg(a: &SparseMatrix, b: &[f64], rel_tol: f64, max_iter: usize) -> Vec<f64> {
    let n = a.n;
    let mut x = vec![0.0; n];
    let bnorm = dot(b, b).sqrt();
    if bnorm == 0.0 {
        return x;
    }
    let diag = a.diagonal();
    let precond = |r: &[f64]| -> Vec<f64> {
        r.iter()
            .zip(&diag)
            .map(|(&ri, &di)| if di > 0.0 { ri / di } else { ri })
            .collect()
    };
    let mut r = b.to_vec();
    let mut z = precond(&r);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    for _ in 0..max_iter {
        if dot(&r, &r).sqrt() <= rel_tol * bnorm {
            break;
        }
        let ap = a.apply(&p);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            break;
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        z = precond(&r);
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    x
}

/// Extend boundary values to the interior harmonically under the
/// combinatorial graph Laplacian. Cheap, feasible for small boundary
/// oscillation, and the default Newton starting point.
pub fn harmonic_extension(sub: &Subcomplex, boundary_values: &[f64]) -> Result<Vec<f64>> {
    if boundary_values.len() != sub.boundary_vertices.len() {
        return Err(Error::InvalidInput(format!(
            "expected {} boundary values, got {}",
            sub.boundary_vertices.len(),
            boundary_values.len()
        )));
    }
    let mut u = vec![0.0; sub.vertices.len()];
    for (k, &v) in sub.boundary_vertices.iter().enumerate() {
        u[v] = boundary_values[k];
    }
    let n = sub.interior_vertices.len();
    if n == 0 {
        return Ok(u);
    }
    let mut interior_pos = vec![usize::MAX; sub.vertices.len()];
    for (k, &v) in sub.interior_vertices.iter().enumerate() {
        interior_pos[v] = k;
    }
    // Degree-6 combinatorial Laplacian restricted to the interior; boundary
    // neighbors move to the right-hand side.
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::with_capacity(7); n];
    let mut rhs = vec![0.0; n];
    for (i, &v0) in sub.interior_vertices.iter().enumerate() {
        let (m, n0) = sub.coord_of(v0);
        let mut row = vec![(i, 6.0)];
        for (dm, dn) in NEIGHBOR_OFFSETS {
            let w = sub.vertex_at(m + dm, n0 + dn).ok_or_else(|| {
                Error::TopologyFailure(format!("missing neighbor of interior vertex {v0}"))
            })?;
            let k = interior_pos[w];
            if k != usize::MAX {
                row.push((k, -1.0));
            } else {
                rhs[i] += u[w];
            }
        }
        row.sort_by_key(|&(j, _)| j);
        rows[i] = row;
    }
    let a = SparseMatrix { n, rows };
    let x = pcg(&a, &rhs, 1e-14, 100 * n + 100);
    for (k, &v) in sub.interior_vertices.iter().enumerate() {
        u[v] = x[k];
    }
    Ok(u)
}

/// Solve the Dirichlet problem: find `u` with the prescribed boundary values
/// whose interior angle sums all equal 2 pi (within `gradient_tolerance`).
pub fn solve_dirichlet(
    sub: &Subcomplex,
    boundary_values: &[f64],
    opts: &SolverOptions,
) -> Result<SolveResult> {
    if !sub.spec.strictly_acute() {
        return Err(Error::NotAcute(format!(
            "lattice angles ({:.6}, {:.6}, {:.6}) must all be below pi/2",
            sub.spec.alpha, sub.spec.beta, sub.spec.gamma
        )));
    }
    if boundary_values.len() != sub.boundary_vertices.len() {
        return Err(Error::InvalidInput(format!(
            "expected {} boundary values, got {}",
            sub.boundary_vertices.len(),
            boundary_values.len()
        )));
    }
    if boundary_values.iter().any(|b| !b.is_finite()) {
        return Err(Error::InvalidInput("boundary values must be finite".into()));
    }
    if !(opts.gradient_tolerance > 0.0) {
        return Err(Error::InvalidInput("gradient_tolerance must be positive".into()));
    }
    if !(opts.line_search_shrink > 0.0 && opts.line_search_shrink < 1.0) {
        return Err(Error::InvalidInput("line_search_shrink must lie in (0, 1)".into()));
    }

    let mut u = match &opts.initial_guess {
        Some(g) => {
            if g.len() != sub.vertices.len() {
                return Err(Error::InvalidInput(format!(
                    "initial guess has {} entries, expected {}",
                    g.len(),
                    sub.vertices.len()
                )));
            }
            g.values.clone()
        }
        None => harmonic_extension(sub, boundary_values)?,
    };
    for (k, &v) in sub.boundary_vertices.iter().enumerate() {
        u[v] = boundary_values[k];
    }

    if !feasibility(sub, &u) {
        // A constant field is always feasible; retry from the boundary mean.
        let mean = boundary_values.iter().sum::<f64>() / boundary_values.len().max(1) as f64;
        for &v in &sub.interior_vertices {
            u[v] = mean;
        }
        if !feasibility(sub, &u) {
            return Err(Error::InfeasibleScaleField(
                "no feasible starting field: boundary values rescale some triangle past degeneracy".into(),
            ));
        }
    }

    if sub.interior_vertices.is_empty() {
        return Ok(SolveResult {
            u: ScaleField::new(u),
            iterations: 0,
            final_gradient_norm: 0.0,
            converged: true,
        });
    }

    let mut g = gradient(sub, &u)?;
    let mut gnorm = max_abs(&g);
    let mut iterations = 1usize;

    while gnorm > opts.gradient_tolerance {
        if iterations >= opts.max_iterations {
            return Err(Error::MaxIterations { iterations, gradient_norm: gnorm });
        }
        let h = hessian(sub, &u)?;
        let rhs: Vec<f64> = g.iter().map(|&x| -x).collect();
        let d = pcg(&h, &rhs, 1e-2, 20 * h.n + 100);

        // Backtracking: accept the first feasible step that strictly
        // decreases the gradient max-norm.
        let mut t = 1.0;
        let accepted = loop {
            let mut trial = u.clone();
            for (k, &v) in sub.interior_vertices.iter().enumerate() {
                trial[v] += t * d[k];
            }
            if feasibility(sub, &trial) {
                if let Ok(trial_g) = gradient(sub, &trial) {
                    let trial_norm = max_abs(&trial_g);
                    if trial_norm < gnorm {
                        break (trial, trial_g, trial_norm);
                    }
                }
            }
            t *= opts.line_search_shrink;
            if t < 1e-12 {
                return Err(Error::LineSearchFailure { iteration: iterations, gradient_norm: gnorm });
            }
        };
        u = accepted.0;
        g = accepted.1;
        gnorm = accepted.2;
        iterations += 1;
    }

    Ok(SolveResult {
        u: ScaleField::new(u),
        iterations,
        final_gradient_norm: gnorm,
        converged: true,
    })
}
