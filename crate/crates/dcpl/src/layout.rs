//! Realize the discrete conformal PL-map in the plane.
//!
//! Given scale factors `u`, every edge receives the rescaled length
//! `l([v,w]) = |v - w| e^{(u(v)+u(w))/2}`. Because interior angle sums are
//! (numerically) 2 pi, the rescaled triangles fit together around interior
//! vertices: the layout places image vertices one triangle at a time by
//! breadth-first traversal from a normalized seed edge, freezing each vertex
//! at its first placement and reporting the residual closure error as
//! `holonomy_defect`.

use std::collections::{BTreeMap, VecDeque};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::Subcomplex;
use crate::solver::feasibility;

/// Seed data fixing the similarity degrees of freedom: the image of the
/// origin vertex and the direction in which the seed edge leaves it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normalization {
    pub image_of_origin: Complex64,
    pub seed_direction: f64,
}

impl Normalization {
    pub fn new(image_of_origin: Complex64, seed_direction: f64) -> Self {
        Self { image_of_origin, seed_direction }
    }

    /// The normalization that reproduces the source positions when `u = 0`.
    pub fn identity(sub: &Subcomplex) -> Self {
        let [a, b] = sub.edges[sub.seed_edge];
        let o = sub.origin_vertex;
        let w = if a == o { b } else { a };
        let dir = sub.vertices[w].position - sub.vertices[o].position;
        Self {
            image_of_origin: sub.vertices[o].position,
            seed_direction: dir.arg(),
        }
    }
}

/// The laid-out piecewise-linear map.
#[derive(Debug, Clone)]
pub struct PLMap {
    /// Image of each vertex, aligned with `Subcomplex` vertex indexing.
    pub image_positions: Vec<Complex64>,
    /// Per-triangle Wirtinger coefficients `(a, b)` of the affine map
    /// `z -> F(v0) + a (z - v0) + b conj(z - v0)`.
    pub triangle_maps: Vec<(Complex64, Complex64)>,
    /// Per-edge rotation angles, unwrapped to be continuous along a
    /// breadth-first spanning tree from the seed edge (real-valued, not
    /// reduced mod 2 pi).
    pub edge_rotations: Vec<f64>,
    /// Maximum closure error: re-derived vertex placements around closed
    /// fans and edge-length deviations from the rescaled lengths.
    pub holonomy_defect: f64,
    /// Lattice cell `(n, m, up)` -> triangle index, for point location.
    cell_triangles: BTreeMap<(i32, i32, u8), usize>,
}

/// Rescaled length of the edge between vertices `v` and `w`.
fn rescaled_edge_length(sub: &Subcomplex, u: &[f64], v: usize, w: usize) -> f64 {
    let base = (sub.vertices[v].position - sub.vertices[w].position).norm();
    base * (0.5 * (u[v] + u[w])).exp()
}

/// Third vertex of a counterclockwise triangle, given the images of the
/// first two and the target distances to each.
fn place_third(fa: Complex64, fb: Complex64, la: f64, lb: f64) -> Result<Complex64> {
    let ab = fb - fa;
    let d = ab.norm();
    if d <= f64::MIN_POSITIVE {
        return Err(Error::InfeasibleScaleField("coincident image vertices in layout".into()));
    }
    let x = (d * d + la * la - lb * lb) / (2.0 * d);
    let h = (la * la - x * x).max(0.0).sqrt();
    Ok(fa + Complex64::new(x, h) * (ab / d))
}

/// Lattice cell key `(n, m, up)` of a triangle, recovered from its vertex
/// coordinates (two vertices on the lower row for "up", one for "down").
fn cell_of_triangle(sub: &Subcomplex, tri: [usize; 3]) -> (i32, i32, u8) {
    let coords = tri.map(|v| sub.coord_of(v));
    let n_min = coords.iter().map(|&(_, n)| n).min().unwrap();
    let lower: Vec<i32> =
        coords.iter().filter(|&&(_, n)| n == n_min).map(|&(m, _)| m).collect();
    if lower.len() == 2 {
        (n_min, *lower.iter().min().unwrap(), 0)
    } else {
        (n_min, lower[0] - 1, 1)
    }
}

/// Lay out the PL map: breadth-first placement over triangle adjacency from
/// the seed edge, then per-triangle derivatives and per-edge rotations.
pub fn layout(sub: &Subcomplex, u: &[f64], norm: &Normalization) -> Result<PLMap> {
    if u.len() != sub.vertices.len() {
        return Err(Error::InvalidInput(format!(
            "scale field has {} entries, expected {}",
            u.len(),
            sub.vertices.len()
        )));
    }
    if !feasibility(sub, u) {
        return Err(Error::InfeasibleScaleField(
            "rescaled lengths violate a triangle inequality".into(),
        ));
    }

    let nv = sub.vertices.len();
    let mut images: Vec<Option<Complex64>> = vec![None; nv];

    // Seed edge, oriented away from the origin vertex.
    let [ea, eb] = sub.edges[sub.seed_edge];
    let o = sub.origin_vertex;
    if ea != o && eb != o {
        return Err(Error::TopologyFailure("seed edge does not touch the origin vertex".into()));
    }
    let w = if ea == o { eb } else { ea };
    images[o] = Some(norm.image_of_origin);
    images[w] = Some(
        norm.image_of_origin
            + Complex64::from_polar(rescaled_edge_length(sub, u, o, w), norm.seed_direction),
    );

    let mut vertex_defect: f64 = 0.0;
    let mut visited = vec![false; sub.triangles.len()];
    let mut queue = VecDeque::new();
    for t in sub.triangles_of_edge(sub.seed_edge).into_iter().flatten() {
        if !visited[t] {
            visited[t] = true;
            queue.push_back(t);
        }
    }
    if queue.is_empty() {
        return Err(Error::TopologyFailure("seed edge has no incident triangle".into()));
    }

    while let Some(t) = queue.pop_front() {
        let tri = sub.triangles[t];
        let placed: Vec<bool> = tri.iter().map(|&v| images[v].is_some()).collect();
        let count = placed.iter().filter(|&&p| p).count();
        match count {
            2 => {
                let r = placed.iter().position(|&p| !p).unwrap();
                let (vr, vp, vq) = (tri[r], tri[(r + 1) % 3], tri[(r + 2) % 3]);
                // (vp, vq, vr) is a cyclic rotation of the stored
                // counterclockwise triple, so the new vertex goes on the
                // left of the placed pair.
                let fr = place_third(
                    images[vp].unwrap(),
                    images[vq].unwrap(),
                    rescaled_edge_length(sub, u, vp, vr),
                    rescaled_edge_length(sub, u, vq, vr),
                )?;
                images[vr] = Some(fr);
            }
            3 => {
                // Closed fan: re-derive each vertex from the other two and
                // record the deviation from the frozen placement.
                for r in 0..3 {
                    let (vr, vp, vq) = (tri[r], tri[(r + 1) % 3], tri[(r + 2) % 3]);
                    let fr = place_third(
                        images[vp].unwrap(),
                        images[vq].unwrap(),
                        rescaled_edge_length(sub, u, vp, vr),
                        rescaled_edge_length(sub, u, vq, vr),
                    )?;
                    vertex_defect = vertex_defect.max((fr - images[vr].unwrap()).norm());
                }
            }
            _ => {
                return Err(Error::TopologyFailure(
                    "triangle reached with fewer than two placed vertices".into(),
                ))
            }
        }
        for k in 0..3 {
            if let Some(e) = sub.edge_between(tri[k], tri[(k + 1) % 3]) {
                for t2 in sub.triangles_of_edge(e).into_iter().flatten() {
                    if !visited[t2] {
                        visited[t2] = true;
                        queue.push_back(t2);
                    }
                }
            }
        }
    }
    if visited.iter().any(|&v| !v) {
        return Err(Error::TopologyFailure("triangle traversal did not cover the complex".into()));
    }
    let image_positions: Vec<Complex64> = images
        .into_iter()
        .map(|i| i.ok_or_else(|| Error::TopologyFailure("unplaced vertex after traversal".into())))
        .collect::<Result<_>>()?;

    // Orientation check on every image triangle.
    for (t, tri) in sub.triangles.iter().enumerate() {
        let [f0, f1, f2] = tri.map(|v| image_positions[v]);
        if ((f1 - f0).conj() * (f2 - f0)).im <= 0.0 {
            return Err(Error::OrientationFlip(t));
        }
    }

    // Edge-length closure defect.
    let mut edge_defect: f64 = 0.0;
    for e in &sub.edges {
        let target = rescaled_edge_length(sub, u, e[0], e[1]);
        let got = (image_positions[e[0]] - image_positions[e[1]]).norm();
        edge_defect = edge_defect.max((got - target).abs());
    }

    // Wirtinger coefficients per triangle.
    let mut triangle_maps = Vec::with_capacity(sub.triangles.len());
    for tri in &sub.triangles {
        triangle_maps.push(wirtinger(sub, &image_positions, *tri)?);
    }

    // Raw edge rotations, then unwrap along breadth-first adjacency (edges
    // adjacent when they share a triangle).
    let ne = sub.edges.len();
    let mut raw = vec![0.0; ne];
    for (i, e) in sub.edges.iter().enumerate() {
        let src = sub.vertices[e[1]].position - sub.vertices[e[0]].position;
        let img = image_positions[e[1]] - image_positions[e[0]];
        raw[i] = (img / src).arg();
    }
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); ne];
    for tri in &sub.triangles {
        let es: Vec<usize> = (0..3)
            .filter_map(|k| sub.edge_between(tri[k], tri[(k + 1) % 3]))
            .collect();
        for i in 0..es.len() {
            for j in 0..es.len() {
                if i != j {
                    adjacency[es[i]].push(es[j]);
                }
            }
        }
    }
    let tau = 2.0 * std::f64::consts::PI;
    let mut edge_rotations = vec![f64::NAN; ne];
    let mut seen = vec![false; ne];
    let mut eq = VecDeque::new();
    edge_rotations[sub.seed_edge] = raw[sub.seed_edge];
    seen[sub.seed_edge] = true;
    eq.push_back(sub.seed_edge);
    while let Some(e) = eq.pop_front() {
        for &e2 in &adjacency[e] {
            if !seen[e2] {
                seen[e2] = true;
                let k = ((edge_rotations[e] - raw[e2]) / tau).round();
                edge_rotations[e2] = raw[e2] + tau * k;
                eq.push_back(e2);
            }
        }
    }
    if seen.iter().any(|&s| !s) {
        return Err(Error::TopologyFailure("edge rotation unwrap did not cover all edges".into()));
    }

    let mut cell_triangles = BTreeMap::new();
    for (t, tri) in sub.triangles.iter().enumerate() {
        cell_triangles.insert(cell_of_triangle(sub, *tri), t);
    }

    Ok(PLMap {
        image_positions,
        triangle_maps,
        edge_rotations,
        holonomy_defect: vertex_defect.max(edge_defect),
        cell_triangles,
    })
}

fn wirtinger(
    sub: &Subcomplex,
    image_positions: &[Complex64],
    tri: [usize; 3],
) -> Result<(Complex64, Complex64)> {
    let [z0, z1, z2] = tri.map(|v| sub.vertices[v].position);
    let [f0, f1, f2] = tri.map(|v| image_positions[v]);
    let (d1, d2) = (z1 - z0, z2 - z0);
    let (w1, w2) = (f1 - f0, f2 - f0);
    // Solve w = a d + b conj(d) on both edge vectors; the denominator is
    // the usual 2i-times-signed-area expression.
    let det = d1 * d2.conj() - d2 * d1.conj();
    if det.norm() <= f64::MIN_POSITIVE {
        return Err(Error::DegenerateTriangle);
    }
    let a = (w1 * d2.conj() - w2 * d1.conj()) / det;
    let b = (w1 * d2 - w2 * d1) / det.conj();
    Ok((a, b))
}

/// Unwrapped rotation angle of an edge (by index into `sub.edges`).
pub fn edge_rotation(plmap: &PLMap, _sub: &Subcomplex, edge: usize) -> f64 {
    plmap.edge_rotations[edge]
}

/// Wirtinger coefficients `(a, b)` of the affine map on one triangle,
/// recomputed from source and image positions.
pub fn triangle_derivatives(
    plmap: &PLMap,
    sub: &Subcomplex,
    triangle: usize,
) -> Result<(Complex64, Complex64)> {
    wirtinger(sub, &plmap.image_positions, sub.triangles[triangle])
}

/// Evaluate the PL map at a point of the source support by barycentric
/// interpolation in the containing triangle. Points that coincide with a
/// vertex return that vertex's image exactly.
pub fn evaluate(plmap: &PLMap, sub: &Subcomplex, point: Complex64) -> Result<Complex64> {
    let spec = &sub.spec;
    let t1 = spec.t1();
    let t2 = spec.t2();
    let det = t1.re * t2.im - t2.re * t1.im;
    let q = point - spec.origin_offset;
    let mf = (q.re * t2.im - t2.re * q.im) / det;
    let nf = (t1.re * q.im - q.re * t1.im) / det;
    if !(mf.is_finite() && nf.is_finite()) {
        return Err(Error::OutsideSupport);
    }
    let (m0, n0) = (mf.floor() as i32, nf.floor() as i32);

    // Scan the 3x3 block of cells around the point: tolerance at cell
    // boundaries and patch boundaries makes the single predicted cell
    // insufficient.
    for dn in -1..=1 {
        for dm in -1..=1 {
            for up in 0..=1u8 {
                let Some(&t) = plmap.cell_triangles.get(&(n0 + dn, m0 + dm, up)) else {
                    continue;
                };
                let tri = sub.triangles[t];
                for &v in &tri {
                    if sub.vertices[v].position == point {
                        return Ok(plmap.image_positions[v]);
                    }
                }
                let [z0, z1, z2] = tri.map(|v| sub.vertices[v].position);
                let (d1, d2, w) = (z1 - z0, z2 - z0, point - z0);
                let cross = |a: Complex64, b: Complex64| a.re * b.im - a.im * b.re;
                let denom = cross(d1, d2);
                let s = cross(w, d2) / denom;
                let t_par = cross(d1, w) / denom;
                if s >= -1e-12 && t_par >= -1e-12 && s + t_par <= 1.0 + 1e-12 {
                    let [f0, f1, f2] = tri.map(|v| plmap.image_positions[v]);
                    return Ok(f0 + (f1 - f0) * s + (f2 - f0) * t_par);
                }
            }
        }
    }
    Err(Error::OutsideSupport)
}

/// Maximum placement/closure discrepancy recorded during layout.
pub fn holonomy_diagnostic(plmap: &PLMap) -> f64 {
    plmap.holonomy_defect
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_lattice_patch, LatticeSpec, Region};
    use crate::solver::ScaleField;
    use std::f64::consts::{FRAC_PI_4, PI};

    fn patch(epsilon: f64, radius: f64) -> Subcomplex {
        build_lattice_patch(
            &LatticeSpec::equilateral(epsilon),
            &Region::disc(Complex64::new(0.0, 0.0), radius),
        )
        .unwrap()
    }

    #[test]
    fn identity_scale_field_reproduces_source() {
        let sub = patch(0.1, 0.8);
        let u = ScaleField::zeros(sub.vertices.len());
        let map = layout(&sub, &u, &Normalization::identity(&sub)).unwrap();
        for (v, vert) in sub.vertices.iter().enumerate() {
            assert!((map.image_positions[v] - vert.position).norm() < 1e-12);
        }
        for e in 0..sub.edges.len() {
            assert!(edge_rotation(&map, &sub, e).abs() < 1e-12);
        }
        for t in 0..sub.triangles.len() {
            let (a, b) = map.triangle_maps[t];
            assert!((a - Complex64::new(1.0, 0.0)).norm() < 1e-12);
            assert!(b.norm() < 1e-12);
        }
        assert!(map.holonomy_defect < 1e-13);
    }

    #[test]
    fn similarity_map_is_reproduced_exactly() {
        // f(z) = (1+i) z scales by sqrt 2 and rotates by pi/4.
        let sub = patch(0.1, 0.8);
        let c = Complex64::new(1.0, 1.0);
        let u = ScaleField::constant(sub.vertices.len(), 0.5 * 2f64.ln());
        let base = Normalization::identity(&sub);
        let norm = Normalization::new(
            c * sub.vertices[sub.origin_vertex].position,
            base.seed_direction + FRAC_PI_4,
        );
        let map = layout(&sub, &u, &norm).unwrap();
        for (v, vert) in sub.vertices.iter().enumerate() {
            assert!((map.image_positions[v] - c * vert.position).norm() < 1e-10);
        }
        for e in 0..sub.edges.len() {
            assert!((edge_rotation(&map, &sub, e) - FRAC_PI_4).abs() < 1e-10);
        }
        for t in 0..sub.triangles.len() {
            let (a, b) = triangle_derivatives(&map, &sub, t).unwrap();
            assert!((a - c).norm() < 1e-10);
            assert!(b.norm() < 1e-12);
        }
    }

    #[test]
    fn affine_reproduction_invariant() {
        let sub = patch(0.2, 0.8);
        let mut u = vec![0.0; sub.vertices.len()];
        for (i, v) in sub.vertices.iter().enumerate() {
            u[i] = 0.2 * v.position.re;
        }
        let map = layout(&sub, &u, &Normalization::identity(&sub)).unwrap();
        let diam = sub.diameter();
        for (t, tri) in sub.triangles.iter().enumerate() {
            let (a, b) = map.triangle_maps[t];
            let z0 = sub.vertices[tri[0]].position;
            let f0 = map.image_positions[tri[0]];
            for &v in tri {
                let z = sub.vertices[v].position;
                let predicted = f0 + a * (z - z0) + b * (z - z0).conj();
                assert!((predicted - map.image_positions[v]).norm() <= 1e-12 * diam.max(1.0));
            }
            // Orientation preserved.
            assert!(a.norm() > b.norm());
        }
    }

    #[test]
    fn holonomy_zero_for_flat_and_positive_for_broken_closure() {
        let sub = patch(0.2, 0.8);
        let flat = layout(
            &sub,
            &vec![0.0; sub.vertices.len()],
            &Normalization::identity(&sub),
        )
        .unwrap();
        assert!(holonomy_diagnostic(&flat) < 1e-13);

        let mut u = vec![0.0; sub.vertices.len()];
        u[sub.origin_vertex] = 1e-3;
        let broken = layout(&sub, &u, &Normalization::identity(&sub)).unwrap();
        assert!(holonomy_diagnostic(&broken) > 1e-6);
    }

    #[test]
    fn evaluate_linearity_and_support() {
        let sub = patch(0.2, 0.8);
        let mut u = vec![0.0; sub.vertices.len()];
        for (i, v) in sub.vertices.iter().enumerate() {
            u[i] = 0.1 * v.position.im;
        }
        let map = layout(&sub, &u, &Normalization::identity(&sub)).unwrap();

        // Vertex points map to their images exactly.
        let o = sub.origin_vertex;
        let at_origin = evaluate(&map, &sub, sub.vertices[o].position).unwrap();
        assert_eq!(at_origin, map.image_positions[o]);
        assert!((at_origin - map.image_positions[o]).norm() == 0.0);

        // Edge midpoints map to image-edge midpoints.
        let e = sub.edges[sub.seed_edge];
        let mid = (sub.vertices[e[0]].position + sub.vertices[e[1]].position) / 2.0;
        let img = evaluate(&map, &sub, mid).unwrap();
        let expected = (map.image_positions[e[0]] + map.image_positions[e[1]]) / 2.0;
        assert!((img - expected).norm() < 1e-12);

        // Triangle centroids map to the mean of the image vertices.
        let tri = sub.triangles[0];
        let centroid = tri.iter().map(|&v| sub.vertices[v].position).sum::<Complex64>() / 3.0;
        let img = evaluate(&map, &sub, centroid).unwrap();
        let expected = tri.iter().map(|&v| map.image_positions[v]).sum::<Complex64>() / 3.0;
        assert!((img - expected).norm() < 1e-12);

        // Far outside the support.
        assert!(matches!(
            evaluate(&map, &sub, Complex64::new(5.0, 5.0)),
            Err(Error::OutsideSupport)
        ));
    }

    #[test]
    fn similarity_equivariance_of_normalization() {
        let sub = patch(0.2, 0.8);
        let mut u = vec![0.0; sub.vertices.len()];
        for (i, v) in sub.vertices.iter().enumerate() {
            u[i] = 0.1 * (v.position.re + 0.3 * v.position.im);
        }
        let base = Normalization::identity(&sub);
        let a = layout(&sub, &u, &base).unwrap();
        let shift = Complex64::new(0.3, -0.2);
        let phi = 0.7;
        let moved = Normalization::new(base.image_of_origin + shift, base.seed_direction + phi);
        let b = layout(&sub, &u, &moved).unwrap();
        let rot = Complex64::from_polar(1.0, phi);
        for v in 0..sub.vertices.len() {
            let expected = (a.image_positions[v] - base.image_of_origin) * rot
                + base.image_of_origin
                + shift;
            assert!((b.image_positions[v] - expected).norm() < 1e-12);
        }
    }

    #[test]
    fn infeasible_field_is_rejected() {
        let spec = LatticeSpec::new(80f64.to_radians(), 60f64.to_radians(), 40f64.to_radians(), 0.2)
            .unwrap();
        let sub = build_lattice_patch(&spec, &Region::disc(Complex64::new(0.0, 0.0), 0.8)).unwrap();
        let mut u = vec![0.0; sub.vertices.len()];
        u[sub.origin_vertex] = 50.0;
        assert!(matches!(
            layout(&sub, &u, &Normalization::identity(&sub)),
            Err(Error::InfeasibleScaleField(_))
        ));
    }

    #[test]
    fn edge_rotation_unwrap_is_continuous() {
        let sub = patch(0.1, 0.8);
        let mut u = vec![0.0; sub.vertices.len()];
        for (i, v) in sub.vertices.iter().enumerate() {
            u[i] = v.position.re; // boundary data of exp
        }
        let map = layout(&sub, &u, &Normalization::identity(&sub)).unwrap();
        // Adjacent edges (sharing a triangle) have rotations within pi.
        for tri in &sub.triangles {
            let es: Vec<usize> = (0..3)
                .filter_map(|k| sub.edge_between(tri[k], tri[(k + 1) % 3]))
                .collect();
            for i in 0..es.len() {
                for j in i + 1..es.len() {
                    let d = (map.edge_rotations[es[i]] - map.edge_rotations[es[j]]).abs();
                    assert!(d < PI, "adjacent rotations differ by {d}");
                }
            }
        }
    }
}
