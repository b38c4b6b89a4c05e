//! Triangular lattices of congruent triangles, and subcomplexes with disc
//! topology cut out of a compact region.
//!
//! The lattice with angles `(alpha, beta, gamma)` and scale `epsilon` is
//! generated by the translations `t1 = epsilon sin(beta)` (real) and
//! `t2 = epsilon sin(gamma) e^{i alpha}`; the third edge direction `t2 - t1`
//! has length `epsilon sin(alpha)` and argument `alpha + beta`. Lattice
//! coordinates `(m, n)` name the vertex `origin_offset + m t1 + n t2`; the
//! cell `(m, n)` holds the "up" triangle `[(m,n), (m+1,n), (m,n+1)]` and the
//! "down" triangle `[(m+1,n), (m+1,n+1), (m,n+1)]`, both counterclockwise.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::NEIGHBOR_OFFSETS;

/// Angles, scale and origin of a congruent-triangle lattice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeSpec {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub epsilon: f64,
    pub origin_offset: Complex64,
}

impl LatticeSpec {
    /// A validated spec with the origin at 0.
    pub fn new(alpha: f64, beta: f64, gamma: f64, epsilon: f64) -> Result<Self> {
        let spec = Self { alpha, beta, gamma, epsilon, origin_offset: Complex64::new(0.0, 0.0) };
        spec.validate()?;
        Ok(spec)
    }

    /// The equilateral lattice at scale `epsilon` (all angles pi/3, edge
    /// lengths `epsilon * sqrt(3)/2`).
    pub fn equilateral(epsilon: f64) -> Self {
        let third = std::f64::consts::FRAC_PI_3;
        Self { alpha: third, beta: third, gamma: third, epsilon, origin_offset: Complex64::new(0.0, 0.0) }
    }

    pub fn with_origin(mut self, origin_offset: Complex64) -> Self {
        self.origin_offset = origin_offset;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, a) in [("alpha", self.alpha), ("beta", self.beta), ("gamma", self.gamma)] {
            if !(a.is_finite() && a > 0.0 && a < std::f64::consts::PI) {
                return Err(Error::InvalidInput(format!("angle {name} = {a} not in (0, pi)")));
            }
        }
        let sum = self.alpha + self.beta + self.gamma;
        if (sum - std::f64::consts::PI).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "angles sum to {sum}, expected pi within 1e-12"
            )));
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::InvalidInput(format!("epsilon = {} must be positive", self.epsilon)));
        }
        Ok(())
    }

    /// First generating translation, length `epsilon sin(beta)`, direction 1.
    pub fn t1(&self) -> Complex64 {
        Complex64::new(self.epsilon * self.beta.sin(), 0.0)
    }

    /// Second generating translation, length `epsilon sin(gamma)`, direction
    /// `e^{i alpha}`.
    pub fn t2(&self) -> Complex64 {
        Complex64::from_polar(self.epsilon * self.gamma.sin(), self.alpha)
    }

    /// Third edge direction `t2 - t1`, length `epsilon sin(alpha)`, argument
    /// `alpha + beta`.
    pub fn t3(&self) -> Complex64 {
        self.t2() - self.t1()
    }

    /// True iff all three angles are strictly below pi/2.
    pub fn strictly_acute(&self) -> bool {
        let right = std::f64::consts::FRAC_PI_2;
        self.alpha < right && self.beta < right && self.gamma < right
    }

    /// Position of lattice coordinate `(m, n)`.
    pub fn position(&self, m: i32, n: i32) -> Complex64 {
        self.origin_offset + self.t1() * m as f64 + self.t2() * n as f64
    }
}

/// A lattice vertex: integer coordinates plus its plane position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VertexCoord {
    pub m: i32,
    pub n: i32,
    pub position: Complex64,
}

/// A compact region with nonempty interior used to cut out subcomplexes.
#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    Disc { center: Complex64, radius: f64 },
    /// Simple polygon, vertices in counterclockwise order.
    Polygon { vertices: Vec<Complex64> },
}

impl Region {
    pub fn disc(center: Complex64, radius: f64) -> Self {
        Region::Disc { center, radius }
    }

    /// Closed containment: boundary points count as inside.
    pub fn contains(&self, p: Complex64) -> bool {
        match self {
            Region::Disc { center, radius } => (p - center).norm() <= *radius,
            Region::Polygon { vertices } => polygon_contains(vertices, p),
        }
    }

    /// Strict interior containment (used for the origin precondition).
    pub fn contains_interior(&self, p: Complex64) -> bool {
        match self {
            Region::Disc { center, radius } => (p - center).norm() < *radius,
            Region::Polygon { vertices } => polygon_contains(vertices, p),
        }
    }

    /// Axis-aligned bounding box `(re_min, re_max, im_min, im_max)`.
    fn bbox(&self) -> (f64, f64, f64, f64) {
        match self {
            Region::Disc { center, radius } => (
                center.re - radius,
                center.re + radius,
                center.im - radius,
                center.im + radius,
            ),
            Region::Polygon { vertices } => {
                let mut b = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
                for v in vertices {
                    b.0 = b.0.min(v.re);
                    b.1 = b.1.max(v.re);
                    b.2 = b.2.min(v.im);
                    b.3 = b.3.max(v.im);
                }
                b
            }
        }
    }
}

fn polygon_contains(vertices: &[Complex64], p: Complex64) -> bool {
    let n = vertices.len();
    if n < 3 {
        return false;
    }
    // Points within a small absolute tolerance of an edge count as inside
    // (closed region).
    let scale = 1.0 + p.norm();
    for i in 0..n {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        let ab = b - a;
        let len2 = ab.norm_sqr();
        if len2 == 0.0 {
            continue;
        }
        let t = ((p - a).re * ab.re + (p - a).im * ab.im) / len2;
        let t = t.clamp(0.0, 1.0);
        if (p - (a + ab * t)).norm() <= 1e-12 * scale {
            return true;
        }
    }
    // Standard even-odd ray casting.
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (vi, vj) = (vertices[i], vertices[j]);
        if (vi.im > p.im) != (vj.im > p.im) {
            let x = vj.re + (p.im - vj.im) / (vi.im - vj.im) * (vi.re - vj.re);
            if p.re < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// A finite union of lattice triangles with disc topology.
///
/// Vertices are indexed row-major (sorted by `(n, m)`); triangles are listed
/// counterclockwise; edges are canonical sorted index pairs in lexicographic
/// order. All orders are deterministic functions of the input.
#[derive(Debug, Clone)]
pub struct Subcomplex {
    pub spec: LatticeSpec,
    pub vertices: Vec<VertexCoord>,
    /// Counterclockwise vertex triples.
    pub triangles: Vec<[usize; 3]>,
    /// Canonical `[low, high]` vertex index pairs, sorted.
    pub edges: Vec<[usize; 2]>,
    /// Vertices with exactly six incident triangles, sorted.
    pub interior_vertices: Vec<usize>,
    /// The remaining vertices, sorted.
    pub boundary_vertices: Vec<usize>,
    /// Index (into `edges`) of the seed edge at the origin vertex.
    pub seed_edge: usize,
    /// Index of the vertex at lattice coordinate (0, 0).
    pub origin_vertex: usize,
    coord_index: BTreeMap<(i32, i32), usize>,
    edge_index: BTreeMap<(usize, usize), usize>,
    /// The one or two triangles incident to each edge.
    edge_triangles: Vec<[Option<usize>; 2]>,
    vertex_triangles: Vec<Vec<usize>>,
    interior_flag: Vec<bool>,
}

impl Subcomplex {
    /// Vertex index at lattice coordinate `(m, n)`, if present.
    pub fn vertex_at(&self, m: i32, n: i32) -> Option<usize> {
        self.coord_index.get(&(m, n)).copied()
    }

    /// Lattice coordinates of vertex `v`.
    pub fn coord_of(&self, v: usize) -> (i32, i32) {
        (self.vertices[v].m, self.vertices[v].n)
    }

    pub fn is_interior(&self, v: usize) -> bool {
        self.interior_flag[v]
    }

    /// Index (into `edges`) of the edge between two vertices, if present.
    pub fn edge_between(&self, a: usize, b: usize) -> Option<usize> {
        let key = (a.min(b), a.max(b));
        self.edge_index.get(&key).copied()
    }

    /// The one or two triangles incident to edge `e`.
    pub fn triangles_of_edge(&self, e: usize) -> [Option<usize>; 2] {
        self.edge_triangles[e]
    }

    /// Triangles incident to vertex `v`.
    pub fn triangles_of_vertex(&self, v: usize) -> &[usize] {
        &self.vertex_triangles[v]
    }

    /// Largest vertex-to-vertex distance (realized on boundary vertices; all
    /// vertices are scanned when the complex has no interior).
    pub fn diameter(&self) -> f64 {
        let idx: Vec<usize> = if self.boundary_vertices.is_empty() {
            (0..self.vertices.len()).collect()
        } else {
            self.boundary_vertices.clone()
        };
        let mut d: f64 = 0.0;
        for (k, &i) in idx.iter().enumerate() {
            for &j in &idx[k + 1..] {
                d = d.max((self.vertices[i].position - self.vertices[j].position).norm());
            }
        }
        d
    }

    /// Assemble a subcomplex directly from lattice coordinates and triangle
    /// index triples, without any topology validation or pruning. Intended
    /// for diagnostics and tests of [`validate_disc_topology`].
    pub fn from_raw(spec: LatticeSpec, coords: &[(i32, i32)], triangles: &[[usize; 3]]) -> Self {
        let vertices: Vec<VertexCoord> = coords
            .iter()
            .map(|&(m, n)| VertexCoord { m, n, position: spec.position(m, n) })
            .collect();
        let mut coord_index = BTreeMap::new();
        for (i, &(m, n)) in coords.iter().enumerate() {
            coord_index.insert((m, n), i);
        }

        let mut edge_set: BTreeSet<(usize, usize)> = BTreeSet::new();
        for t in triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                edge_set.insert((a.min(b), a.max(b)));
            }
        }
        let edges: Vec<[usize; 2]> = edge_set.iter().map(|&(a, b)| [a, b]).collect();
        let mut edge_index = BTreeMap::new();
        for (i, e) in edges.iter().enumerate() {
            edge_index.insert((e[0], e[1]), i);
        }

        let mut edge_triangles = vec![[None, None]; edges.len()];
        let mut vertex_triangles = vec![Vec::new(); vertices.len()];
        for (ti, t) in triangles.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                let e = edge_index[&(a.min(b), a.max(b))];
                let slot = &mut edge_triangles[e];
                if slot[0].is_none() {
                    slot[0] = Some(ti);
                } else if slot[1].is_none() {
                    slot[1] = Some(ti);
                }
                vertex_triangles[t[k]].push(ti);
            }
        }

        let interior_flag: Vec<bool> = vertex_triangles.iter().map(|ts| ts.len() == 6).collect();
        let interior_vertices: Vec<usize> =
            (0..vertices.len()).filter(|&v| interior_flag[v]).collect();
        let boundary_vertices: Vec<usize> =
            (0..vertices.len()).filter(|&v| !interior_flag[v]).collect();

        let origin_vertex = coord_index.get(&(0, 0)).copied().unwrap_or(0);
        let seed_edge = seed_edge_of(&coord_index, &edge_index, origin_vertex, &vertices)
            .unwrap_or(0);

        Subcomplex {
            spec,
            vertices,
            triangles: triangles.to_vec(),
            edges,
            interior_vertices,
            boundary_vertices,
            seed_edge,
            origin_vertex,
            coord_index,
            edge_index,
            edge_triangles,
            vertex_triangles,
            interior_flag,
        }
    }
}

fn seed_edge_of(
    coord_index: &BTreeMap<(i32, i32), usize>,
    edge_index: &BTreeMap<(usize, usize), usize>,
    origin_vertex: usize,
    vertices: &[VertexCoord],
) -> Option<usize> {
    let (m, n) = (vertices[origin_vertex].m, vertices[origin_vertex].n);
    for (dm, dn) in NEIGHBOR_OFFSETS {
        if let Some(&w) = coord_index.get(&(m + dm, n + dn)) {
            let key = (origin_vertex.min(w), origin_vertex.max(w));
            if let Some(&e) = edge_index.get(&key) {
                return Some(e);
            }
        }
    }
    None
}

/// Internal triangle key during construction: `(n, m, up)` so iteration order
/// is row-major with "up" before "down" in each cell.
type Cell = (i32, i32, u8);

fn cell_vertices(c: Cell) -> [(i32, i32); 3] {
    let (n, m, up) = c;
    if up == 0 {
        [(m, n), (m + 1, n), (m, n + 1)]
    } else {
        [(m + 1, n), (m + 1, n + 1), (m, n + 1)]
    }
}

fn cell_edges(c: Cell) -> [((i32, i32), (i32, i32)); 3] {
    let v = cell_vertices(c);
    let mut es = [((0, 0), (0, 0)); 3];
    for k in 0..3 {
        let (a, b) = (v[k], v[(k + 1) % 3]);
        es[k] = if a <= b { (a, b) } else { (b, a) };
    }
    es
}

/// The largest edge-connected union of lattice triangles fully contained in
/// `region` that contains the vertex at lattice coordinate (0, 0), pruned
/// until it is homeomorphic to a closed disc.
pub fn build_lattice_patch(spec: &LatticeSpec, region: &Region) -> Result<Subcomplex> {
    spec.validate()?;
    if !region.contains_interior(spec.origin_offset) {
        return Err(Error::RegionTooSmall(
            "the region must contain the lattice origin in its interior".into(),
        ));
    }

    // Candidate cells from the region bounding box, with margin.
    let (re0, re1, im0, im1) = region.bbox();
    let t1 = spec.t1();
    let t2 = spec.t2();
    let det = t1.re * t2.im - t2.re * t1.im;
    if det.abs() < f64::MIN_POSITIVE {
        return Err(Error::InvalidInput("degenerate lattice basis".into()));
    }
    let (mut m_lo, mut m_hi, mut n_lo, mut n_hi) = (i32::MAX, i32::MIN, i32::MAX, i32::MIN);
    for p in [
        Complex64::new(re0, im0),
        Complex64::new(re0, im1),
        Complex64::new(re1, im0),
        Complex64::new(re1, im1),
    ] {
        let q = p - spec.origin_offset;
        let mf = (q.re * t2.im - t2.re * q.im) / det;
        let nf = (t1.re * q.im - q.re * t1.im) / det;
        m_lo = m_lo.min(mf.floor() as i32 - 2);
        m_hi = m_hi.max(mf.ceil() as i32 + 2);
        n_lo = n_lo.min(nf.floor() as i32 - 2);
        n_hi = n_hi.max(nf.ceil() as i32 + 2);
    }

    let contained = |c: Cell| -> bool {
        let vs = cell_vertices(c).map(|(m, n)| spec.position(m, n));
        // All three vertices plus the three edge midpoints must lie in the
        // (closed) region; for convex regions the vertices alone would do.
        vs.iter().all(|&p| region.contains(p))
            && (0..3).all(|k| region.contains((vs[k] + vs[(k + 1) % 3]) / 2.0))
    };

    let mut candidates: BTreeSet<Cell> = BTreeSet::new();
    for n in n_lo..=n_hi {
        for m in m_lo..=m_hi {
            for up in [0u8, 1u8] {
                let c = (n, m, up);
                if contained(c) {
                    candidates.insert(c);
                }
            }
        }
    }

    let start = candidates
        .iter()
        .copied()
        .find(|&c| cell_vertices(c).contains(&(0, 0)))
        .ok_or_else(|| {
            Error::RegionTooSmall("no lattice triangle around the origin fits in the region".into())
        })?;

    let mut current = edge_component(&candidates, start);
    let cap = candidates.len() + 2;

    for _ in 0..cap {
        let removals = pinch_removals(&current);
        if removals.is_empty() {
            if euler_characteristic(&current) == 1 {
                break;
            }
            // No pinches but not a disc (a hole): peel one boundary triangle
            // deterministically and retry.
            match peel_candidate(&current) {
                Some(c) => {
                    current.remove(&c);
                }
                None => {
                    return Err(Error::TopologyFailure(
                        "cannot reach Euler characteristic 1 by pruning".into(),
                    ))
                }
            }
        } else {
            for c in removals {
                current.remove(&c);
            }
        }
        let start = current
            .iter()
            .copied()
            .find(|&c| cell_vertices(c).contains(&(0, 0)))
            .ok_or_else(|| {
                Error::RegionTooSmall("pruning removed every triangle at the origin".into())
            })?;
        current = edge_component(&current, start);
    }

    if euler_characteristic(&current) != 1 {
        return Err(Error::TopologyFailure(format!(
            "pruning stalled at Euler characteristic {}",
            euler_characteristic(&current)
        )));
    }

    let sub = assemble(*spec, &current)?;
    if !sub.is_interior(sub.origin_vertex) {
        return Err(Error::RegionTooSmall(
            "the origin vertex is not interior after pruning".into(),
        ));
    }
    Ok(sub)
}

/// Edge-connected component of `start` within `cells`.
fn edge_component(cells: &BTreeSet<Cell>, start: Cell) -> BTreeSet<Cell> {
    let mut edge_map: BTreeMap<((i32, i32), (i32, i32)), Vec<Cell>> = BTreeMap::new();
    for &c in cells {
        for e in cell_edges(c) {
            edge_map.entry(e).or_default().push(c);
        }
    }
    let mut seen: BTreeSet<Cell> = BTreeSet::new();
    let mut queue = VecDeque::new();
    seen.insert(start);
    queue.push_back(start);
    while let Some(c) = queue.pop_front() {
        for e in cell_edges(c) {
            for &other in &edge_map[&e] {
                if seen.insert(other) {
                    queue.push_back(other);
                }
            }
        }
    }
    seen
}

/// Triangles to drop because some vertex's incident fan is not edge-connected
/// (pinch points, dangling configurations). The fan cluster containing the
/// smallest triangle key is kept.
fn pinch_removals(cells: &BTreeSet<Cell>) -> Vec<Cell> {
    let mut by_vertex: BTreeMap<(i32, i32), Vec<Cell>> = BTreeMap::new();
    for &c in cells {
        for v in cell_vertices(c) {
            by_vertex.entry(v).or_default().push(c);
        }
    }
    let mut removals: BTreeSet<Cell> = BTreeSet::new();
    for (v, incident) in &by_vertex {
        if incident.len() <= 1 {
            continue;
        }
        // Cluster the incident triangles by shared edges through `v`.
        let mut cluster = vec![usize::MAX; incident.len()];
        let mut next = 0;
        for i in 0..incident.len() {
            if cluster[i] != usize::MAX {
                continue;
            }
            cluster[i] = next;
            let mut stack = vec![i];
            while let Some(a) = stack.pop() {
                for b in 0..incident.len() {
                    if cluster[b] == usize::MAX && share_edge_at(incident[a], incident[b], *v) {
                        cluster[b] = next;
                        stack.push(b);
                    }
                }
            }
            next += 1;
        }
        if next > 1 {
            // Keep the cluster containing the smallest key (incident is
            // sorted because cells iterate in order).
            let keep = cluster[0];
            for (i, &c) in incident.iter().enumerate() {
                if cluster[i] != keep {
                    removals.insert(c);
                }
            }
        }
    }
    removals.into_iter().collect()
}

fn share_edge_at(a: Cell, b: Cell, v: (i32, i32)) -> bool {
    if a == b {
        return false;
    }
    cell_edges(a)
        .iter()
        .any(|e| (e.0 == v || e.1 == v) && cell_edges(b).contains(e))
}

fn euler_characteristic(cells: &BTreeSet<Cell>) -> i64 {
    let mut verts: BTreeSet<(i32, i32)> = BTreeSet::new();
    let mut edges: BTreeSet<((i32, i32), (i32, i32))> = BTreeSet::new();
    for &c in cells {
        for v in cell_vertices(c) {
            verts.insert(v);
        }
        for e in cell_edges(c) {
            edges.insert(e);
        }
    }
    verts.len() as i64 - edges.len() as i64 + cells.len() as i64
}

/// A deterministic triangle to peel when the complex has a hole: the largest
/// key among triangles with at least one boundary edge.
fn peel_candidate(cells: &BTreeSet<Cell>) -> Option<Cell> {
    let mut edge_count: BTreeMap<((i32, i32), (i32, i32)), usize> = BTreeMap::new();
    for &c in cells {
        for e in cell_edges(c) {
            *edge_count.entry(e).or_insert(0) += 1;
        }
    }
    cells
        .iter()
        .copied()
        .filter(|&c| cell_edges(c).iter().any(|e| edge_count[e] == 1))
        .next_back()
}

fn assemble(spec: LatticeSpec, cells: &BTreeSet<Cell>) -> Result<Subcomplex> {
    let mut coord_set: BTreeSet<(i32, i32)> = BTreeSet::new();
    for &c in cells {
        for v in cell_vertices(c) {
            coord_set.insert(v);
        }
    }
    // Row-major vertex order: sorted by (n, m).
    let mut coords: Vec<(i32, i32)> = coord_set.into_iter().collect();
    coords.sort_by_key(|&(m, n)| (n, m));
    let mut coord_index = BTreeMap::new();
    for (i, &(m, n)) in coords.iter().enumerate() {
        coord_index.insert((m, n), i);
    }

    let triangles: Vec<[usize; 3]> = cells
        .iter()
        .map(|&c| cell_vertices(c).map(|v| coord_index[&v]))
        .collect();

    let origin_vertex = *coord_index
        .get(&(0, 0))
        .ok_or_else(|| Error::RegionTooSmall("origin vertex missing from the patch".into()))?;

    let mut sub = Subcomplex::from_raw(spec, &coords, &triangles);
    // from_raw recomputes everything else; fix the validated origin.
    sub.origin_vertex = origin_vertex;
    sub.seed_edge = seed_edge_of(&sub.coord_index, &sub.edge_index, origin_vertex, &sub.vertices)
        .ok_or_else(|| Error::RegionTooSmall("origin vertex has no incident edge".into()))?;
    Ok(sub)
}

/// The interior/boundary partition: interior vertices are those with exactly
/// six incident triangles.
pub fn classify_vertices(sub: &Subcomplex) -> (Vec<usize>, Vec<usize>) {
    (sub.interior_vertices.clone(), sub.boundary_vertices.clone())
}

/// Diagnostic summary of the disc-topology checks.
#[derive(Debug, Clone)]
pub struct TopologyReport {
    pub vertex_count: usize,
    pub edge_count: usize,
    pub triangle_count: usize,
    pub euler_characteristic: i64,
    pub edge_connected: bool,
    pub fans_contiguous: bool,
    pub pass: bool,
    pub notes: Vec<String>,
}

/// Checks Euler characteristic 1, edge-connectivity of the triangle adjacency
/// graph, and that every vertex's incident triangles form one contiguous fan.
pub fn validate_disc_topology(sub: &Subcomplex) -> TopologyReport {
    let v = sub.vertices.len();
    let e = sub.edges.len();
    let f = sub.triangles.len();
    let euler = v as i64 - e as i64 + f as i64;
    let mut notes = Vec::new();
    if euler != 1 {
        notes.push(format!("Euler characteristic {euler}, expected 1"));
    }

    // Edge-connectivity over triangle adjacency.
    let mut connected = f > 0;
    if f > 0 {
        let mut seen = vec![false; f];
        let mut queue = VecDeque::new();
        seen[0] = true;
        queue.push_back(0usize);
        let mut count = 1;
        while let Some(t) = queue.pop_front() {
            let tri = sub.triangles[t];
            for k in 0..3 {
                if let Some(eidx) = sub.edge_between(tri[k], tri[(k + 1) % 3]) {
                    for other in sub.triangles_of_edge(eidx).into_iter().flatten() {
                        if !seen[other] {
                            seen[other] = true;
                            count += 1;
                            queue.push_back(other);
                        }
                    }
                }
            }
        }
        connected = count == f;
        if !connected {
            notes.push(format!("only {count} of {f} triangles edge-reachable from triangle 0"));
        }
    }

    // Fan contiguity at every vertex.
    let mut fans = true;
    for vtx in 0..v {
        let incident = sub.triangles_of_vertex(vtx);
        if incident.len() <= 1 {
            continue;
        }
        let mut cluster = vec![false; incident.len()];
        cluster[0] = true;
        let mut stack = vec![0usize];
        let mut count = 1;
        while let Some(a) = stack.pop() {
            for b in 0..incident.len() {
                if !cluster[b] && triangles_share_edge_at(sub, incident[a], incident[b], vtx) {
                    cluster[b] = true;
                    count += 1;
                    stack.push(b);
                }
            }
        }
        if count != incident.len() {
            fans = false;
            notes.push(format!("vertex {vtx} has a non-contiguous triangle fan"));
        }
    }

    let pass = euler == 1 && connected && fans;
    TopologyReport {
        vertex_count: v,
        edge_count: e,
        triangle_count: f,
        euler_characteristic: euler,
        edge_connected: connected,
        fans_contiguous: fans,
        pass,
        notes,
    }
}

fn triangles_share_edge_at(sub: &Subcomplex, a: usize, b: usize, v: usize) -> bool {
    if a == b {
        return false;
    }
    let ta = sub.triangles[a];
    let tb = sub.triangles[b];
    for i in 0..3 {
        let (p, q) = (ta[i], ta[(i + 1) % 3]);
        if p != v && q != v {
            continue;
        }
        for j in 0..3 {
            let (r, s) = (tb[j], tb[(j + 1) % 3]);
            if (p == r && q == s) || (p == s && q == r) {
                return true;
            }
        }
    }
    false
}
