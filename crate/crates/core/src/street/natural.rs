use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::str::FromStr;

use super::arrangement::{EdgeId, HalfEdgeId, PlanarArrangement};
use super::TopologyError;
use crate::math;

pub const DEFAULT_ANGLE_THRESHOLD: f64 = 45.0;

/// Slack on the angle threshold for directions computed from rounded
/// coordinates.
const ANGLE_EPS: f64 = 1e-9;

/// How edge ends meeting at a node are paired into continuations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JoinStrategy {
    /// Pairs with the smallest deflection at each node are joined first.
    EveryBestFit,
    /// Each end in turn takes its best remaining partner.
    SelfBestFit,
    /// Ends with the same non-empty street name are joined.
    SameName,
}

impl JoinStrategy {
    pub fn name(self) -> &'static str {
        match self {
            JoinStrategy::EveryBestFit => "every-best-fit",
            JoinStrategy::SelfBestFit => "self-best-fit",
            JoinStrategy::SameName => "same-name",
        }
    }
}

impl FromStr for JoinStrategy {
    type Err = TopologyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "every-best-fit" => Ok(JoinStrategy::EveryBestFit),
            "self-best-fit" => Ok(JoinStrategy::SelfBestFit),
            "same-name" => Ok(JoinStrategy::SameName),
            other => Err(TopologyError::UnknownStrategy(other.to_string())),
        }
    }
}

/// A chain of edges joined end to end.
#[derive(Debug, Clone, PartialEq)]
pub struct NaturalStreet {
    pub id: usize,
    /// Edges in travel order.
    pub edges: Vec<EdgeId>,
    pub length: f64,
    /// Name shared by all member edges, if any.
    pub name: Option<String>,
    pub closed: bool,
}

fn angle_between(u: crate::Point, w: crate::Point) -> f64 {
    math::to_degrees(math::atan2(math::abs(u.cross(w)), u.dot(w)))
}

/// Turn, in degrees, when travelling in along half-edge `a`'s edge and out
/// along `b`; both must leave the same node. 0 means straight on.
pub fn deflection_angle(arr: &PlanarArrangement, a: HalfEdgeId, b: HalfEdgeId) -> f64 {
    let incoming = arr.direction(a) * -1.0;
    angle_between(incoming, arr.direction(b))
}

/// Deflection rounded to a micro-degree so that ties survive rotation.
fn quantized(deg: f64) -> i64 {
    math::round(deg * 1e6) as i64
}

/// Joins edges into natural streets.
///
/// At every node the edge ends are paired using `strategy`; a pair is only
/// eligible when its deflection is at most `angle_threshold` degrees.
/// Streets are numbered in order of their lowest edge id.
pub fn trace_natural_streets(
    arr: &PlanarArrangement,
    strategy: JoinStrategy,
    angle_threshold: f64,
) -> Result<Vec<NaturalStreet>, TopologyError> {
    if !(angle_threshold > 0.0 && angle_threshold < 90.0) {
        return Err(TopologyError::AngleThreshold(angle_threshold));
    }
    let mut partner: Vec<Option<HalfEdgeId>> = vec![None; arr.half_edge_count()];
    for node in &arr.nodes {
        pair_at_node(arr, &node.outgoing, strategy, angle_threshold, &mut partner);
    }

    let mut used = vec![false; arr.edges.len()];
    let mut streets = Vec::new();
    for e in 0..arr.edges.len() {
        if used[e] {
            continue;
        }
        // back up to a free end, or detect a cycle through e
        let mut end = 2 * e;
        let mut closed = false;
        while let Some(p) = partner[end] {
            if p / 2 == e {
                closed = true;
                break;
            }
            end = p ^ 1;
        }
        let start = if closed { 2 * e } else { end };
        let mut chain = Vec::new();
        let mut h = start;
        loop {
            chain.push(h / 2);
            used[h / 2] = true;
            match partner[h ^ 1] {
                Some(p) if p / 2 != start / 2 => h = p,
                _ => break,
            }
        }
        let length = math::sum(chain.iter().map(|&c| arr.edges[c].length));
        let first_name = arr.edges[chain[0]].name.as_ref();
        let name = first_name
            .filter(|n| chain.iter().all(|&c| arr.edges[c].name.as_ref() == Some(*n)))
            .cloned();
        streets.push(NaturalStreet { id: streets.len(), edges: chain, length, name, closed });
    }
    Ok(streets)
}

fn pair_at_node(
    arr: &PlanarArrangement,
    ends: &[HalfEdgeId],
    strategy: JoinStrategy,
    threshold: f64,
    partner: &mut [Option<HalfEdgeId>],
) {
    if ends.len() < 2 {
        return;
    }
    let mut sorted: Vec<HalfEdgeId> = ends.to_vec();
    sorted.sort_unstable();
    let ok = |d: f64| d <= threshold + ANGLE_EPS;
    let same_name = |a: HalfEdgeId, b: HalfEdgeId| match (&arr.edges[a / 2].name, &arr.edges[b / 2].name) {
        (Some(x), Some(y)) => !x.is_empty() && x == y,
        _ => false,
    };
    match strategy {
        JoinStrategy::EveryBestFit | JoinStrategy::SameName => {
            let mut cands: Vec<(i64, HalfEdgeId, HalfEdgeId)> = Vec::new();
            for (i, &a) in sorted.iter().enumerate() {
                for &b in &sorted[i + 1..] {
                    if strategy == JoinStrategy::SameName && !same_name(a, b) {
                        continue;
                    }
                    let d = deflection_angle(arr, a, b);
                    if ok(d) {
                        cands.push((quantized(d), a, b));
                    }
                }
            }
            cands.sort_unstable();
            for (_, a, b) in cands {
                if partner[a].is_none() && partner[b].is_none() {
                    partner[a] = Some(b);
                    partner[b] = Some(a);
                }
            }
        }
        JoinStrategy::SelfBestFit => {
            for &a in &sorted {
                if partner[a].is_some() {
                    continue;
                }
                let best = sorted
                    .iter()
                    .filter(|&&b| b != a && partner[b].is_none())
                    .map(|&b| (quantized(deflection_angle(arr, a, b)), b))
                    .filter(|&(q, _)| ok(q as f64 * 1e-6))
                    .min();
                if let Some((_, b)) = best {
                    partner[a] = Some(b);
                    partner[b] = Some(a);
                }
            }
        }
    }
}

/// Streets as nodes, linked when they share at least one graph node.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectivityGraph {
    pub street_count: usize,
    /// Undirected links `(a, b)` with `a < b`, sorted.
    pub links: Vec<(usize, usize)>,
    /// Connectivity degree of each street.
    pub degrees: Vec<usize>,
}

impl ConnectivityGraph {
    pub fn degree_series(&self) -> Vec<f64> {
        self.degrees.iter().map(|&d| d as f64).collect()
    }

    pub fn neighbors(&self, s: usize) -> Vec<usize> {
        self.links
            .iter()
            .filter_map(|&(a, b)| {
                if a == s {
                    Some(b)
                } else if b == s {
                    Some(a)
                } else {
                    None
                }
            })
            .collect()
    }
}

/// Builds the street connectivity graph. The streets must use every edge of
/// `arr` exactly once.
pub fn connectivity_graph(
    arr: &PlanarArrangement,
    streets: &[NaturalStreet],
) -> Result<ConnectivityGraph, TopologyError> {
    let mut owner = vec![usize::MAX; arr.edges.len()];
    let mut cover = vec![0usize; arr.edges.len()];
    for (si, s) in streets.iter().enumerate() {
        for &e in &s.edges {
            if e >= arr.edges.len() {
                return Err(TopologyError::NotPartition { edge: e, count: 0 });
            }
            owner[e] = si;
            cover[e] += 1;
        }
    }
    if let Some(e) = cover.iter().position(|&c| c != 1) {
        return Err(TopologyError::NotPartition { edge: e, count: cover[e] });
    }
    let mut links: BTreeSet<(usize, usize)> = BTreeSet::new();
    for v in 0..arr.nodes.len() {
        let mut here: Vec<usize> = arr.incident_edges(v).into_iter().map(|e| owner[e]).collect();
        here.sort_unstable();
        here.dedup();
        for (i, &a) in here.iter().enumerate() {
            for &b in &here[i + 1..] {
                links.insert((a, b));
            }
        }
    }
    let mut degrees = vec![0usize; streets.len()];
    for &(a, b) in &links {
        degrees[a] += 1;
        degrees[b] += 1;
    }
    Ok(ConnectivityGraph { street_count: streets.len(), links: links.into_iter().collect(), degrees })
}

#[cfg(test)]
mod tests {
    use super::super::arrangement::tests::{build, grid_lines, seg};
    use super::*;
    use crate::geometry::{Point, Polyline};
    use crate::street::StreetSegment;

    fn polyline(pts: &[(f64, f64)]) -> Polyline {
        Polyline::new(pts.iter().map(|&(x, y)| Point::new(x, y)).collect()).unwrap()
    }

    #[test]
    fn gentle_chain_joins() {
        // three pieces turning 10 degrees at each joint
        let mut pts = vec![(0.0, 0.0)];
        let mut heading: f64 = 0.0;
        for _ in 0..3 {
            let &(x, y) = pts.last().unwrap();
            pts.push((x + heading.to_radians().cos(), y + heading.to_radians().sin()));
            heading += 10.0;
        }
        let segs: Vec<StreetSegment> =
            pts.windows(2).enumerate().map(|(i, w)| seg(i, &[w[0], w[1]])).collect();
        let a = build(&segs);
        for strategy in [JoinStrategy::EveryBestFit, JoinStrategy::SelfBestFit] {
            let s = trace_natural_streets(&a, strategy, 45.0).unwrap();
            assert_eq!(s.len(), 1);
            assert!((s[0].length - 3.0).abs() < 1e-12);
        }
        let s = trace_natural_streets(&a, JoinStrategy::EveryBestFit, 5.0).unwrap();
        assert_eq!(s.len(), 3);
    }

    #[test]
    fn crossing_streets_continue_straight() {
        let a = build(&[seg(0, &[(-1.0, 0.0), (1.0, 0.0)]), seg(1, &[(0.0, -1.0), (0.0, 1.0)])]);
        let s = trace_natural_streets(&a, JoinStrategy::EveryBestFit, 45.0).unwrap();
        assert_eq!(s.len(), 2);
        for st in &s {
            assert!((st.length - 2.0).abs() < 1e-12);
        }
        let g = connectivity_graph(&a, &s).unwrap();
        assert_eq!(g.links, vec![(0, 1)]);
        assert_eq!(g.degrees, vec![1, 1]);
    }

    #[test]
    fn grid_lines_recovered() {
        let a = build(&grid_lines(3, 3));
        let s = trace_natural_streets(&a, JoinStrategy::EveryBestFit, 45.0).unwrap();
        assert_eq!(s.len(), 8);
        let g = connectivity_graph(&a, &s).unwrap();
        // each line meets the four perpendicular lines
        assert!(g.degrees.iter().all(|&d| d == 4));
    }

    #[test]
    fn same_name_joins_only_matching() {
        let segs = [
            StreetSegment::named(0, "Main", polyline(&[(0.0, 0.0), (1.0, 0.0)])),
            StreetSegment::named(1, "Main", polyline(&[(1.0, 0.0), (2.0, 0.1)])),
            StreetSegment::named(2, "Side", polyline(&[(2.0, 0.1), (3.0, 0.1)])),
        ];
        let a = build(&segs);
        let s = trace_natural_streets(&a, JoinStrategy::SameName, 45.0).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].name.as_deref(), Some("Main"));
        assert_eq!(s[0].edges.len(), 2);
        assert_eq!(s[1].name.as_deref(), Some("Side"));
    }

    #[test]
    fn square_loop_closes() {
        let segs: Vec<StreetSegment> = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0), (0.0, 0.0)]
            .windows(2)
            .enumerate()
            .map(|(i, w)| seg(i, &[w[0], w[1]]))
            .collect();
        let a = build(&segs);
        // right angles exceed the threshold, so every side stands alone
        let s = trace_natural_streets(&a, JoinStrategy::EveryBestFit, 45.0).unwrap();
        assert_eq!(s.len(), 4);
        assert!(s.iter().all(|st| !st.closed));
        let g = connectivity_graph(&a, &s).unwrap();
        assert_eq!(g.degrees, vec![2, 2, 2, 2]);
    }

    #[test]
    fn partition_enforced() {
        let a = build(&[seg(0, &[(-1.0, 0.0), (1.0, 0.0)]), seg(1, &[(0.0, -1.0), (0.0, 1.0)])]);
        let mut s = trace_natural_streets(&a, JoinStrategy::EveryBestFit, 45.0).unwrap();
        s.pop();
        assert!(matches!(connectivity_graph(&a, &s), Err(TopologyError::NotPartition { .. })));
    }

    #[test]
    fn threshold_validated() {
        let a = build(&[seg(0, &[(0.0, 0.0), (1.0, 0.0)])]);
        assert_eq!(
            trace_natural_streets(&a, JoinStrategy::EveryBestFit, 0.0),
            Err(TopologyError::AngleThreshold(0.0))
        );
        assert_eq!(
            "zigzag".parse::<JoinStrategy>(),
            Err(TopologyError::UnknownStrategy("zigzag".to_string()))
        );
    }
}
