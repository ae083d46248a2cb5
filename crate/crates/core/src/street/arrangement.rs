use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::TopologyError;
use crate::geometry::{ring_signed_area, BBox, Point, Polyline};
use crate::math;

pub type NodeId = usize;
pub type EdgeId = usize;
pub type FaceId = usize;
/// Half-edge `2e` runs along edge `e` from its `from` node, `2e + 1` runs
/// back from its `to` node.
pub type HalfEdgeId = usize;

/// One raw street segment as digitized.
#[derive(Debug, Clone, PartialEq)]
pub struct StreetSegment {
    pub id: usize,
    pub name: Option<String>,
    pub geometry: Polyline,
}

impl StreetSegment {
    pub fn new(id: usize, geometry: Polyline) -> Self {
        StreetSegment { id, name: None, geometry }
    }

    pub fn named(id: usize, name: impl Into<String>, geometry: Polyline) -> Self {
        StreetSegment { id, name: Some(name.into()), geometry }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub position: Point,
    /// Outgoing half-edges sorted counterclockwise by initial direction.
    pub outgoing: Vec<HalfEdgeId>,
}

impl Node {
    pub fn degree(&self) -> usize {
        self.outgoing.len()
    }
}

/// A noded piece of street between two nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub from: NodeId,
    pub to: NodeId,
    /// Vertices from `from` to `to`, endpoints included.
    pub geometry: Vec<Point>,
    /// Id of the segment this edge was cut from.
    pub segment: usize,
    pub name: Option<String>,
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Face {
    /// Boundary half-edges in traversal order; bounded faces run
    /// counterclockwise.
    pub half_edges: Vec<HalfEdgeId>,
    pub signed_area: f64,
    pub component: usize,
    pub is_outer: bool,
}

/// Planar, fully noded street graph with its faces.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarArrangement {
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
    pub faces: Vec<Face>,
    /// Face on the left of each half-edge.
    pub half_edge_face: Vec<FaceId>,
    /// Connected component of each node.
    pub node_component: Vec<usize>,
    pub component_count: usize,
    pub snap_tolerance: f64,
    next: Vec<HalfEdgeId>,
}

impl PlanarArrangement {
    pub fn half_edge_count(&self) -> usize {
        2 * self.edges.len()
    }

    pub fn twin(h: HalfEdgeId) -> HalfEdgeId {
        h ^ 1
    }

    pub fn origin(&self, h: HalfEdgeId) -> NodeId {
        let e = &self.edges[h / 2];
        if h.is_multiple_of(2) {
            e.from
        } else {
            e.to
        }
    }

    pub fn target(&self, h: HalfEdgeId) -> NodeId {
        self.origin(h ^ 1)
    }

    /// Next half-edge around the face on the left of `h`.
    pub fn next(&self, h: HalfEdgeId) -> HalfEdgeId {
        self.next[h]
    }

    /// Unit vector leaving `origin(h)` along the first piece of geometry.
    pub fn direction(&self, h: HalfEdgeId) -> Point {
        let g = &self.edges[h / 2].geometry;
        let d = if h.is_multiple_of(2) { g[1] - g[0] } else { g[g.len() - 2] - g[g.len() - 1] };
        d * (1.0 / d.norm())
    }

    /// Vertices of `h` in travel order.
    pub fn half_edge_points(&self, h: HalfEdgeId) -> Vec<Point> {
        let mut g = self.edges[h / 2].geometry.clone();
        if h % 2 == 1 {
            g.reverse();
        }
        g
    }

    /// Closed boundary ring of face `f`.
    pub fn face_ring(&self, f: FaceId) -> Vec<Point> {
        let mut ring = Vec::new();
        for &h in &self.faces[f].half_edges {
            let pts = self.half_edge_points(h);
            ring.extend_from_slice(&pts[..pts.len() - 1]);
        }
        if let Some(&p) = ring.first() {
            ring.push(p);
        }
        ring
    }

    /// Edges incident to node `v`, each once, ascending.
    pub fn incident_edges(&self, v: NodeId) -> Vec<EdgeId> {
        let mut es: Vec<EdgeId> = self.nodes[v].outgoing.iter().map(|h| h / 2).collect();
        es.sort_unstable();
        es.dedup();
        es
    }

    /// `V - E + F` for one connected component.
    pub fn euler_characteristic(&self, component: usize) -> i64 {
        let v = self.node_component.iter().filter(|&&c| c == component).count() as i64;
        let e = self
            .edges
            .iter()
            .filter(|e| self.node_component[e.from] == component)
            .count() as i64;
        let f = self.faces.iter().filter(|f| f.component == component).count() as i64;
        v - e + f
    }
}

/// `1e-9` times the bounding-box diagonal of all segments.
pub fn default_snap_tolerance(segments: &[StreetSegment]) -> f64 {
    segments
        .iter()
        .map(|s| s.geometry.bbox())
        .reduce(BBox::union)
        .map(|b| b.snap_tolerance())
        .unwrap_or(0.0)
}

/// A straight piece of an input polyline.
struct Piece {
    seg: usize,
    index: usize,
    a: Point,
    b: Point,
}

/// Point where a piece gets cut: parameter along it, whether another piece
/// meets it there, and the input vertex it coincides with, if any.
#[derive(Clone, Copy)]
struct Cut {
    t: f64,
    junction: bool,
    at: Option<Point>,
}

impl Cut {
    fn crossing(t: f64) -> Cut {
        Cut { t, junction: true, at: None }
    }

    fn vertex(t: f64, at: Point) -> Cut {
        Cut { t, junction: true, at: Some(at) }
    }
}

struct Occurrence {
    pos: Point,
    endpoint: bool,
    junction: bool,
    exact: bool,
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // smaller root wins so representatives stay input-ordered
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

fn param_on(a: Point, b: Point, p: Point) -> f64 {
    let r = b - a;
    ((p - a).dot(r) / r.dot(r)).clamp(0.0, 1.0)
}

fn distance_to_segment(a: Point, b: Point, p: Point) -> f64 {
    a.lerp(b, param_on(a, b, p)).distance(p)
}

/// Records every place where pieces `p` and `q` meet within `tol`.
fn intersect(p: &Piece, q: &Piece, tol: f64, cp: &mut Vec<Cut>, cq: &mut Vec<Cut>) {
    // endpoints resting on the other piece (covers touches, overlaps and
    // near-miss undershoots)
    for (t, e) in [(0.0, q.a), (1.0, q.b)] {
        if distance_to_segment(p.a, p.b, e) <= tol {
            cp.push(Cut::vertex(param_on(p.a, p.b, e), e));
            cq.push(Cut::vertex(t, e));
        }
    }
    for (t, e) in [(0.0, p.a), (1.0, p.b)] {
        if distance_to_segment(q.a, q.b, e) <= tol {
            cq.push(Cut::vertex(param_on(q.a, q.b, e), e));
            cp.push(Cut::vertex(t, e));
        }
    }
    let r = p.b - p.a;
    let s = q.b - q.a;
    let denom = r.cross(s);
    if math::abs(denom) <= 1e-12 * r.norm() * s.norm() {
        return;
    }
    let w = q.a - p.a;
    let t = w.cross(s) / denom;
    let u = w.cross(r) / denom;
    if (0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&u) {
        cp.push(Cut::crossing(t));
        cq.push(Cut::crossing(u));
    }
}

fn overlaps(a: &BBox, b: &BBox, tol: f64) -> bool {
    a.min.x <= b.max.x + tol
        && b.min.x <= a.max.x + tol
        && a.min.y <= b.max.y + tol
        && b.min.y <= a.max.y + tol
}

/// Nodes the segments at every intersection, touch and endpoint, then
/// builds half-edge faces.
///
/// Points closer than `snap_tolerance` are merged. Each connected component
/// is checked against Euler's formula `V - E + F = 2` (its outer face
/// included).
pub fn build_arrangement(
    segments: &[StreetSegment],
    snap_tolerance: f64,
) -> Result<PlanarArrangement, TopologyError> {
    if segments.is_empty() {
        return Err(TopologyError::NoSegments);
    }
    if !(snap_tolerance >= 0.0 && snap_tolerance.is_finite()) {
        return Err(TopologyError::SnapTolerance(snap_tolerance));
    }
    let tol = snap_tolerance;

    let mut pieces = Vec::new();
    for (k, s) in segments.iter().enumerate() {
        for (i, (a, b)) in s.geometry.segments().enumerate() {
            pieces.push(Piece { seg: k, index: i, a, b });
        }
    }
    let mut cuts: Vec<Vec<Cut>> = pieces
        .iter()
        .map(|p| {
            vec![
                Cut { t: 0.0, junction: false, at: Some(p.a) },
                Cut { t: 1.0, junction: false, at: Some(p.b) },
            ]
        })
        .collect();

    // sweep over x to find candidate piece pairs
    let boxes: Vec<BBox> = pieces.iter().map(|p| BBox::of(&[p.a, p.b]).unwrap()).collect();
    let mut order: Vec<usize> = (0..pieces.len()).collect();
    order.sort_by(|&i, &j| boxes[i].min.x.total_cmp(&boxes[j].min.x).then(i.cmp(&j)));
    for (oi, &i) in order.iter().enumerate() {
        for &j in &order[oi + 1..] {
            if boxes[j].min.x > boxes[i].max.x + tol {
                break;
            }
            if !overlaps(&boxes[i], &boxes[j], tol) {
                continue;
            }
            let (p, q) = (&pieces[i], &pieces[j]);
            let (mut ci, mut cj) = (Vec::new(), Vec::new());
            intersect(p, q, tol, &mut ci, &mut cj);
            if p.seg == q.seg && p.index.abs_diff(q.index) == 1 {
                // consecutive pieces meet at their common vertex anyway; only
                // a fold-back overlap elsewhere needs cutting
                let shared = if p.index < q.index { p.b } else { p.a };
                let away = |piece: &Piece, c: &Cut| {
                    let at = c.at.unwrap_or_else(|| piece.a.lerp(piece.b, c.t));
                    at.distance(shared) > tol
                };
                ci.retain(|c| away(p, c));
                cj.retain(|c| away(q, c));
            }
            cuts[i].extend(ci);
            cuts[j].extend(cj);
        }
    }

    // occurrences along each segment, in order
    let mut occ: Vec<Occurrence> = Vec::new();
    let mut seg_occ: Vec<Vec<usize>> = vec![Vec::new(); segments.len()];
    for (pi, piece) in pieces.iter().enumerate() {
        let c = &mut cuts[pi];
        c.sort_by(|x, y| x.t.total_cmp(&y.t));
        let last_piece = piece.index + 1 == segments[piece.seg].geometry.segment_count();
        for cut in c.iter() {
            let pos = match cut.at {
                Some(p) => p,
                None if cut.t <= 0.0 => piece.a,
                None if cut.t >= 1.0 => piece.b,
                None => piece.a.lerp(piece.b, cut.t),
            };
            let exact = cut.at.is_some() || cut.t <= 0.0 || cut.t >= 1.0;
            let endpoint = (piece.index == 0 && cut.t <= 0.0) || (last_piece && cut.t >= 1.0);
            seg_occ[piece.seg].push(occ.len());
            occ.push(Occurrence { pos, endpoint, junction: cut.junction, exact });
        }
    }

    // merge occurrences within tolerance
    let mut uf = UnionFind::new(occ.len());
    let mut by_x: Vec<usize> = (0..occ.len()).collect();
    by_x.sort_by(|&i, &j| occ[i].pos.x.total_cmp(&occ[j].pos.x).then(i.cmp(&j)));
    for (k, &i) in by_x.iter().enumerate() {
        for &j in &by_x[k + 1..] {
            if occ[j].pos.x - occ[i].pos.x > tol {
                break;
            }
            if occ[i].pos.distance(occ[j].pos) <= tol {
                uf.union(i, j);
            }
        }
    }
    let cluster: Vec<usize> = (0..occ.len()).map(|i| uf.find(i)).collect();
    // clusters sit at their first input vertex, else their first crossing
    let mut rep: Vec<Option<usize>> = vec![None; occ.len()];
    for (i, o) in occ.iter().enumerate() {
        let r = &mut rep[cluster[i]];
        let better = match *r {
            None => true,
            Some(j) => o.exact && !occ[j].exact,
        };
        if better {
            *r = Some(i);
        }
    }
    let at = |c: usize| occ[rep[c].unwrap()].pos;

    // per-segment cluster sequences with node flags
    let mut is_node = vec![false; occ.len()];
    let mut uses = vec![0usize; occ.len()];
    let mut sequences: Vec<Vec<usize>> = Vec::with_capacity(segments.len());
    for ids in &seg_occ {
        let mut seq: Vec<usize> = Vec::new();
        for &o in ids {
            let c = cluster[o];
            if occ[o].endpoint || occ[o].junction {
                is_node[c] = true;
            }
            if seq.last() != Some(&c) {
                seq.push(c);
                uses[c] += 1;
            }
        }
        sequences.push(seq);
    }
    for c in 0..occ.len() {
        if uses[c] >= 2 {
            is_node[c] = true;
        }
    }
    // a path that turns straight back makes its turning point a dead end
    for seq in &sequences {
        for w in seq.windows(3) {
            if w[0] == w[2] {
                is_node[w[1]] = true;
            }
        }
    }

    // cut sequences at nodes into edges
    let mut node_of: Vec<Option<NodeId>> = vec![None; occ.len()];
    let mut nodes: Vec<Node> = Vec::new();
    let mut edges: Vec<Edge> = Vec::new();
    let mut seen: BTreeSet<(usize, usize, Vec<usize>)> = BTreeSet::new();
    for (k, seq) in sequences.iter().enumerate() {
        if seq.len() < 2 {
            continue;
        }
        let mut start = seq[0];
        let mut interior: Vec<usize> = Vec::new();
        for &c in &seq[1..] {
            if !is_node[c] {
                interior.push(c);
                continue;
            }
            let end = c;
            let inner = core::mem::take(&mut interior);
            let from = start;
            start = end;
            if from == end && inner.is_empty() {
                continue;
            }
            let key = edge_key(from, end, &inner);
            if !seen.insert(key) {
                continue;
            }
            let mut node_id = |c: usize, nodes: &mut Vec<Node>| -> NodeId {
                *node_of[c].get_or_insert_with(|| {
                    nodes.push(Node { position: at(c), outgoing: Vec::new() });
                    nodes.len() - 1
                })
            };
            let a = node_id(from, &mut nodes);
            let b = node_id(end, &mut nodes);
            let mut geometry = Vec::with_capacity(inner.len() + 2);
            geometry.push(at(from));
            geometry.extend(inner.iter().map(|&c| at(c)));
            geometry.push(at(end));
            let length = math::sum(geometry.windows(2).map(|w| w[0].distance(w[1])));
            edges.push(Edge {
                from: a,
                to: b,
                geometry,
                segment: segments[k].id,
                name: segments[k].name.clone(),
                length,
            });
        }
    }
    if edges.is_empty() {
        return Err(TopologyError::AllDegenerate);
    }

    assemble(nodes, edges, tol)
}

/// Orientation-free identity of an edge: end clusters and interior path.
fn edge_key(a: usize, b: usize, inner: &[usize]) -> (usize, usize, Vec<usize>) {
    let fwd: Vec<usize> = inner.to_vec();
    let mut rev = fwd.clone();
    rev.reverse();
    match a.cmp(&b) {
        core::cmp::Ordering::Less => (a, b, fwd),
        core::cmp::Ordering::Greater => (b, a, rev),
        core::cmp::Ordering::Equal => (a, b, fwd.min(rev)),
    }
}

fn assemble(
    mut nodes: Vec<Node>,
    edges: Vec<Edge>,
    tol: f64,
) -> Result<PlanarArrangement, TopologyError> {
    let mut arr = PlanarArrangement {
        nodes: Vec::new(),
        edges,
        faces: Vec::new(),
        half_edge_face: Vec::new(),
        node_component: Vec::new(),
        component_count: 0,
        snap_tolerance: tol,
        next: Vec::new(),
    };
    let nh = arr.half_edge_count();
    let mut angles = vec![0.0; nh];
    for h in 0..nh {
        let v = if h % 2 == 0 { arr.edges[h / 2].from } else { arr.edges[h / 2].to };
        nodes[v].outgoing.push(h);
        let d = arr.direction(h);
        angles[h] = math::atan2(d.y, d.x);
    }
    let mut slot = vec![0usize; nh];
    for n in nodes.iter_mut() {
        n.outgoing.sort_by(|&a, &b| angles[a].total_cmp(&angles[b]).then(a.cmp(&b)));
        for (i, &h) in n.outgoing.iter().enumerate() {
            slot[h] = i;
        }
    }
    arr.nodes = nodes;

    // the next half-edge turns as far right as possible at the target
    let mut next = vec![0usize; nh];
    for h in 0..nh {
        let t = h ^ 1;
        let out = &arr.nodes[arr.origin(t)].outgoing;
        next[h] = out[(slot[t] + out.len() - 1) % out.len()];
    }
    arr.next = next;

    // components
    let mut uf = UnionFind::new(arr.nodes.len());
    for e in &arr.edges {
        uf.union(e.from, e.to);
    }
    let mut comp_of_root = vec![usize::MAX; arr.nodes.len()];
    let mut count = 0;
    let mut node_component = vec![0; arr.nodes.len()];
    for v in 0..arr.nodes.len() {
        let r = uf.find(v);
        if comp_of_root[r] == usize::MAX {
            comp_of_root[r] = count;
            count += 1;
        }
        node_component[v] = comp_of_root[r];
    }
    arr.node_component = node_component;
    arr.component_count = count;

    // faces
    let mut face_of = vec![usize::MAX; nh];
    let mut faces: Vec<Face> = Vec::new();
    for h0 in 0..nh {
        if face_of[h0] != usize::MAX {
            continue;
        }
        let fid = faces.len();
        let mut cycle = Vec::new();
        let mut h = h0;
        loop {
            face_of[h] = fid;
            cycle.push(h);
            h = arr.next[h];
            if h == h0 {
                break;
            }
        }
        let component = arr.node_component[arr.origin(h0)];
        faces.push(Face { half_edges: cycle, signed_area: 0.0, component, is_outer: false });
    }
    arr.faces = faces;
    arr.half_edge_face = face_of;
    for f in 0..arr.faces.len() {
        arr.faces[f].signed_area = ring_signed_area(&arr.face_ring(f));
    }
    for c in 0..count {
        let outer = (0..arr.faces.len())
            .filter(|&f| arr.faces[f].component == c)
            .min_by(|&a, &b| arr.faces[a].signed_area.total_cmp(&arr.faces[b].signed_area));
        if let Some(f) = outer {
            arr.faces[f].is_outer = true;
        }
    }
    for c in 0..count {
        let chi = arr.euler_characteristic(c);
        if chi != 2 {
            return Err(TopologyError::EulerViolation { component: c, value: chi });
        }
    }
    Ok(arr)
}
