//! Executable barrier arguments: sub- and super-solutions trapping the
//! discrete scale factors.
//!
//! The barrier fields `w± = log |f'| + q±` with
//! `q± = ±epsilon^2 (M± - C± |v|^2)` at interior vertices and `q± = 0` on the
//! boundary bracket the Dirichlet solution: with `u = w+` every interior
//! angle sum stays below 2 pi, with `u = w-` above, and on the faces of the
//! product set `[w-, w+]` the angle-defect gradient points inward. All three
//! statements are checked numerically here and reported with margins.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::analytic::{predicted_constant, ConformalMap};
use crate::error::{Error, Result};
use crate::geometry::{angle_sum_at, NEIGHBOR_OFFSETS};
use crate::lattice::{LatticeSpec, Subcomplex};
use crate::solver::ScaleField;

/// The constants of the quadratic barrier profiles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierConstants {
    pub c_plus: f64,
    pub c_minus: f64,
    pub m_plus: f64,
    pub m_minus: f64,
}

/// The product set `[w-, w+]` that traps the solution, with the data used
/// to build it.
#[derive(Debug, Clone)]
pub struct TrapSet {
    /// `w-`, equal to `log |f'|` on boundary vertices.
    pub lower: ScaleField,
    /// `w+`, equal to `log |f'|` on boundary vertices.
    pub upper: ScaleField,
    pub constants: BarrierConstants,
    pub epsilon: f64,
}

/// Choose barrier constants from the map: `C±` so that `4 s C±` dominates
/// twice the largest predicted fourth-order defect coefficient over the
/// interior vertices (`s = sin a sin b sin c`), floored at 1, and
/// `M± = 1.5 C± max |v|^2` so the quadratic profile stays positive on the
/// whole patch.
pub fn barrier_constants(
    map: &ConformalMap,
    sub: &Subcomplex,
    spec: &LatticeSpec,
) -> Result<BarrierConstants> {
    let s = spec.alpha.sin() * spec.beta.sin() * spec.gamma.sin();
    let mut sup = 0.0f64;
    for &v in &sub.interior_vertices {
        let c = predicted_constant(map, sub.vertices[v].position, spec)?;
        sup = sup.max(c.value.abs());
    }
    let c = (2.0 * sup / (4.0 * s)).max(1.0);
    let max_r2 = sub
        .vertices
        .iter()
        .map(|v| v.position.norm_sqr())
        .fold(0.0f64, f64::max);
    let m = 1.5 * c * max_r2;
    Ok(BarrierConstants { c_plus: c, c_minus: c, m_plus: m, m_minus: m })
}

/// Evaluate the barrier fields at scale `epsilon`.
pub fn barrier_fields(
    map: &ConformalMap,
    sub: &Subcomplex,
    constants: &BarrierConstants,
    epsilon: f64,
) -> Result<TrapSet> {
    let e2 = epsilon * epsilon;
    let mut lower = Vec::with_capacity(sub.vertices.len());
    let mut upper = Vec::with_capacity(sub.vertices.len());
    for (i, vert) in sub.vertices.iter().enumerate() {
        let base = map.log_abs_fprime(vert.position)?;
        if sub.is_interior(i) {
            let r2 = vert.position.norm_sqr();
            upper.push(base + e2 * (constants.m_plus - constants.c_plus * r2));
            lower.push(base - e2 * (constants.m_minus - constants.c_minus * r2));
        } else {
            upper.push(base);
            lower.push(base);
        }
    }
    Ok(TrapSet {
        lower: ScaleField::new(lower),
        upper: ScaleField::new(upper),
        constants: *constants,
        epsilon,
    })
}

/// Outcome of the barrier angle-sum inequalities, with measured and
/// predicted margins per interior vertex (in `interior_vertices` order).
#[derive(Debug, Clone)]
pub struct BarrierReport {
    pub epsilon: f64,
    /// `2 pi - angle_sum(w+)`; positive means the inequality holds.
    pub upper_margins: Vec<f64>,
    /// `angle_sum(w-) - 2 pi`; positive means the inequality holds.
    pub lower_margins: Vec<f64>,
    /// Leading-order predictions: `(4 s C± ∓ C_v0) epsilon^4` deep in the
    /// interior, plus `cot(phi_e) epsilon^2 (M± - C± |w|^2)` for every
    /// neighbor `w` on the boundary (`phi_e` the lattice angle opposite the
    /// edge).
    pub predicted_upper_margins: Vec<f64>,
    pub predicted_lower_margins: Vec<f64>,
    /// Whether the vertex has at least one boundary neighbor.
    pub boundary_adjacent: Vec<bool>,
    /// Interior positions where either inequality fails.
    pub violations: Vec<usize>,
    pub pass: bool,
}

/// Lattice angle opposite an edge in the given ring direction.
fn opposite_angle(spec: &LatticeSpec, offset: (i32, i32)) -> f64 {
    match offset {
        (1, 0) | (-1, 0) => spec.beta,
        (0, 1) | (0, -1) => spec.gamma,
        _ => spec.alpha,
    }
}

/// Check the barrier inequalities at every interior vertex.
pub fn barrier_inequality_check(
    map: &ConformalMap,
    sub: &Subcomplex,
    trap: &TrapSet,
) -> Result<BarrierReport> {
    let spec = &sub.spec;
    let eps = trap.epsilon;
    let e2 = eps * eps;
    let e4 = e2 * e2;
    let s = spec.alpha.sin() * spec.beta.sin() * spec.gamma.sin();
    let tau = 2.0 * std::f64::consts::PI;

    let n = sub.interior_vertices.len();
    let mut upper_margins = Vec::with_capacity(n);
    let mut lower_margins = Vec::with_capacity(n);
    let mut predicted_upper = Vec::with_capacity(n);
    let mut predicted_lower = Vec::with_capacity(n);
    let mut boundary_adjacent = Vec::with_capacity(n);
    let mut violations = Vec::new();

    for (k, &v0) in sub.interior_vertices.iter().enumerate() {
        let um = tau - angle_sum_at(sub, &trap.upper, v0)?;
        let lm = angle_sum_at(sub, &trap.lower, v0)? - tau;
        if um <= 0.0 || lm <= 0.0 {
            violations.push(k);
        }

        let c_v0 = predicted_constant(map, sub.vertices[v0].position, spec)?.value;
        let mut pred_u = (4.0 * s * trap.constants.c_plus - c_v0) * e4;
        let mut pred_l = (4.0 * s * trap.constants.c_minus + c_v0) * e4;
        let (m, nn) = sub.coord_of(v0);
        let mut adjacent = false;
        for (dm, dn) in NEIGHBOR_OFFSETS {
            let w = sub.vertex_at(m + dm, nn + dn).ok_or_else(|| {
                Error::TopologyFailure(format!("missing neighbor of interior vertex {v0}"))
            })?;
            if !sub.is_interior(w) {
                adjacent = true;
                let cot = 1.0 / opposite_angle(spec, (dm, dn)).tan();
                let r2 = sub.vertices[w].position.norm_sqr();
                pred_u += cot * e2 * (trap.constants.m_plus - trap.constants.c_plus * r2);
                pred_l += cot * e2 * (trap.constants.m_minus - trap.constants.c_minus * r2);
            }
        }
        upper_margins.push(um);
        lower_margins.push(lm);
        predicted_upper.push(pred_u);
        predicted_lower.push(pred_l);
        boundary_adjacent.push(adjacent);
    }

    let pass = violations.is_empty();
    Ok(BarrierReport {
        epsilon: eps,
        upper_margins,
        lower_margins,
        predicted_upper_margins: predicted_upper,
        predicted_lower_margins: predicted_lower,
        boundary_adjacent,
        violations,
        pass,
    })
}

/// Outcome of the inward-gradient sampling on the faces of the trap set.
#[derive(Debug, Clone)]
pub struct InwardGradientReport {
    pub samples: usize,
    /// `(interior position, pinned-to-upper?)` for every sign failure.
    pub failures: Vec<(usize, bool)>,
    /// Whether the trap width satisfies `epsilon^2 (M+ + M-) <= epsilon`,
    /// the coupling assumed by the inward-gradient argument.
    pub width_ok: bool,
    pub pass: bool,
}

/// Sample random faces of the trap set and verify the angle-defect gradient
/// points into the set: with `u_i` pinned to `w+_i` the defect at `v_i` must
/// be positive, pinned to `w-_i` negative. Alternates the pinned side;
/// deterministic for a fixed seed.
pub fn inward_gradient_check(
    map: &ConformalMap,
    sub: &Subcomplex,
    trap: &TrapSet,
    sample_count: usize,
    seed: u64,
) -> Result<InwardGradientReport> {
    let _ = map;
    let interior = &sub.interior_vertices;
    if interior.is_empty() {
        return Err(Error::InvalidInput("trap check needs interior vertices".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tau = 2.0 * std::f64::consts::PI;
    let mut failures = Vec::new();
    let mut u = vec![0.0; sub.vertices.len()];
    for sample in 0..sample_count {
        for v in 0..sub.vertices.len() {
            let (lo, hi) = (trap.lower[v], trap.upper[v]);
            u[v] = if hi > lo { lo + rng.gen::<f64>() * (hi - lo) } else { lo };
        }
        let k = rng.gen_range(0..interior.len());
        let v0 = interior[k];
        let pin_upper = sample % 2 == 0;
        u[v0] = if pin_upper { trap.upper[v0] } else { trap.lower[v0] };
        let defect = tau - angle_sum_at(sub, &u, v0)?;
        let inward = if pin_upper { defect > 0.0 } else { defect < 0.0 };
        if !inward {
            failures.push((k, pin_upper));
        }
    }
    let width_ok =
        trap.epsilon * trap.epsilon * (trap.constants.m_plus + trap.constants.m_minus)
            <= trap.epsilon;
    let pass = failures.is_empty();
    Ok(InwardGradientReport { samples: sample_count, failures, width_ok, pass })
}

/// Convenience wrapper: constants, fields and both checks at the
/// subcomplex's own scale.
pub fn build_trap(map: &ConformalMap, sub: &Subcomplex) -> Result<TrapSet> {
    let constants = barrier_constants(map, sub, &sub.spec)?;
    barrier_fields(map, sub, &constants, sub.spec.epsilon)
}
