use alloc::collections::{BTreeMap, VecDeque};
use alloc::vec;
use alloc::vec::Vec;

use super::arrangement::{EdgeId, FaceId, PlanarArrangement};
use super::TopologyError;
use crate::geometry::Point;
use crate::math;

pub type BlockId = usize;

/// A bounded face of the street graph.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub id: BlockId,
    pub face: FaceId,
    /// Closed counterclockwise boundary.
    pub ring: Vec<Point>,
    pub area: f64,
    /// Blocks sharing at least one edge, ascending.
    pub neighbors: Vec<BlockId>,
    /// Whether an edge of this block also bounds the outer face.
    pub touches_outer: bool,
    /// Edges on the boundary, ascending.
    pub edges: Vec<EdgeId>,
}

/// Bounded faces with positive area, numbered in face order.
pub fn extract_blocks(arr: &PlanarArrangement) -> Vec<Block> {
    let mut block_of: Vec<Option<BlockId>> = vec![None; arr.faces.len()];
    let mut next_id = 0;
    for (f, face) in arr.faces.iter().enumerate() {
        if !face.is_outer && face.signed_area > 0.0 {
            block_of[f] = Some(next_id);
            next_id += 1;
        }
    }
    let mut blocks = Vec::with_capacity(next_id);
    for (f, face) in arr.faces.iter().enumerate() {
        let Some(id) = block_of[f] else { continue };
        let mut neighbors = Vec::new();
        let mut touches_outer = false;
        let mut edges = Vec::new();
        for &h in &face.half_edges {
            edges.push(h / 2);
            match block_of[arr.half_edge_face[h ^ 1]] {
                Some(b) if b != id => neighbors.push(b),
                Some(_) => {}
                None => touches_outer = true,
            }
        }
        neighbors.sort_unstable();
        neighbors.dedup();
        edges.sort_unstable();
        edges.dedup();
        blocks.push(Block {
            id,
            face: f,
            ring: arr.face_ring(f),
            area: face.signed_area,
            neighbors,
            touches_outer,
            edges,
        });
    }
    blocks
}

/// Adjacency distance of each block from the outer face: blocks touching it
/// get 1, their untouched neighbors 2, and so on.
pub fn border_numbers(blocks: &[Block]) -> Result<BTreeMap<BlockId, u32>, TopologyError> {
    if blocks.is_empty() {
        return Err(TopologyError::NoBlocks);
    }
    let index: BTreeMap<BlockId, usize> = blocks.iter().enumerate().map(|(i, b)| (b.id, i)).collect();
    let mut number: Vec<Option<u32>> = vec![None; blocks.len()];
    let mut queue = VecDeque::new();
    for (i, b) in blocks.iter().enumerate() {
        if b.touches_outer {
            number[i] = Some(1);
            queue.push_back(i);
        }
    }
    while let Some(i) = queue.pop_front() {
        let n = number[i].unwrap();
        for nb in &blocks[i].neighbors {
            if let Some(&j) = index.get(nb) {
                if number[j].is_none() {
                    number[j] = Some(n + 1);
                    queue.push_back(j);
                }
            }
        }
    }
    let mut out = BTreeMap::new();
    for (i, b) in blocks.iter().enumerate() {
        match number[i] {
            Some(n) => {
                out.insert(b.id, n);
            }
            None => return Err(TopologyError::UnreachableBlock(b.id)),
        }
    }
    Ok(out)
}

/// Blocks with the largest border number, ascending.
pub fn topological_center(border: &BTreeMap<BlockId, u32>) -> Vec<BlockId> {
    let Some(&max) = border.values().max() else { return Vec::new() };
    border.iter().filter(|&(_, &n)| n == max).map(|(&id, _)| id).collect()
}

/// Relative margin below the mean; areas of equal blocks differ by rounding
/// once the network is rotated.
const AREA_EPS: f64 = 1e-9;

fn below_mean(area: f64, mean: f64) -> bool {
    area < mean * (1.0 - AREA_EPS)
}

/// Adjacent blocks smaller than the mean block size.
#[derive(Debug, Clone, PartialEq)]
pub struct NaturalCity {
    pub id: usize,
    /// Member blocks, ascending.
    pub blocks: Vec<BlockId>,
    pub area: f64,
}

/// Groups below-mean blocks into edge-connected natural cities.
///
/// The mean is taken over all `blocks`. Cities are numbered by their lowest
/// block id.
pub fn natural_cities(blocks: &[Block]) -> Result<Vec<NaturalCity>, TopologyError> {
    if blocks.len() < 2 {
        return Err(TopologyError::TooFewBlocks(blocks.len()));
    }
    let mean = math::sum(blocks.iter().map(|b| b.area)) / blocks.len() as f64;
    let small: BTreeMap<BlockId, &Block> =
        blocks.iter().filter(|b| below_mean(b.area, mean)).map(|b| (b.id, b)).collect();
    let mut city_of: BTreeMap<BlockId, usize> = BTreeMap::new();
    let mut cities = Vec::new();
    for &seed in small.keys() {
        if city_of.contains_key(&seed) {
            continue;
        }
        let id = cities.len();
        let mut members = Vec::new();
        let mut queue = VecDeque::from([seed]);
        city_of.insert(seed, id);
        while let Some(b) = queue.pop_front() {
            members.push(b);
            for nb in &small[&b].neighbors {
                if small.contains_key(nb) && !city_of.contains_key(nb) {
                    city_of.insert(*nb, id);
                    queue.push_back(*nb);
                }
            }
        }
        members.sort_unstable();
        let area = math::sum(members.iter().map(|b| small[b].area));
        cities.push(NaturalCity { id, blocks: members, area });
    }
    Ok(cities)
}

/// Nested below-mean subsets of a city's blocks.
///
/// Each level keeps the blocks smaller than the mean of the previous level;
/// recursion stops when nothing is below the mean or one block is left.
pub fn city_hotspots(city: &NaturalCity, blocks: &[Block]) -> Vec<Vec<BlockId>> {
    let area: BTreeMap<BlockId, f64> = blocks.iter().map(|b| (b.id, b.area)).collect();
    let mut current: Vec<BlockId> = city.blocks.iter().copied().filter(|b| area.contains_key(b)).collect();
    let mut levels = Vec::new();
    while current.len() >= 2 {
        let mean = math::sum(current.iter().map(|b| area[b])) / current.len() as f64;
        let below: Vec<BlockId> = current.iter().copied().filter(|b| below_mean(area[b], mean)).collect();
        if below.is_empty() {
            break;
        }
        levels.push(below.clone());
        current = below;
    }
    levels
}
