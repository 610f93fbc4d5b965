//! Torus geometry and robot configurations.
//!
//! The torus is an `ell x L` grid (`L < ell`) whose rows are called
//! `ell`-rings (length `ell`, there are `L` of them) and whose columns are
//! called `L`-rings. Nodes carry no labels; all indices here are an internal
//! convenience and never leak into robot decisions.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TorusError {
    #[error("invalid dimensions ({ell}, {big_l}): {reason}")]
    InvalidDims { ell: u16, big_l: u16, reason: String },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

/// Dimensions of an `(ell, L)` torus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TorusDims {
    pub ell: u16,
    pub big_l: u16,
}

impl TorusDims {
    /// `L < ell` and both at least 3 are required so that ring directions
    /// and adjacent rings are distinguishable. With `strict` the stronger
    /// requirement `L > 4` from the gathering correctness argument is
    /// enforced as well.
    pub fn new(ell: u16, big_l: u16, strict: bool) -> Result<Self, TorusError> {
        let fail = |reason: &str| TorusError::InvalidDims {
            ell,
            big_l,
            reason: reason.to_string(),
        };
        if ell < 3 || big_l < 3 {
            return Err(fail("each dimension must be at least 3"));
        }
        if big_l >= ell {
            return Err(fail("L must be strictly smaller than ell"));
        }
        if strict && big_l <= 4 {
            return Err(fail("strict mode requires L > 4"));
        }
        Ok(TorusDims { ell, big_l })
    }

    pub fn n(&self) -> usize {
        self.ell as usize * self.big_l as usize
    }

    pub fn wrap_pos(&self, p: i64) -> u16 {
        p.rem_euclid(self.ell as i64) as u16
    }

    pub fn wrap_ring(&self, r: i64) -> u16 {
        r.rem_euclid(self.big_l as i64) as u16
    }

    /// Shortest circular distance along an `ell`-ring.
    pub fn pos_dist(&self, a: u16, b: u16) -> u16 {
        let d = (a as i64 - b as i64).rem_euclid(self.ell as i64) as u16;
        d.min(self.ell - d)
    }

    /// Shortest circular distance along an `L`-ring.
    pub fn ring_dist(&self, a: u16, b: u16) -> u16 {
        let d = (a as i64 - b as i64).rem_euclid(self.big_l as i64) as u16;
        d.min(self.big_l - d)
    }
}

/// A node of the torus: `ring` indexes the `ell`-ring, `pos` the node on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Coord {
    pub ring: u16,
    pub pos: u16,
}

impl Coord {
    pub fn new(ring: u16, pos: u16) -> Self {
        Coord { ring, pos }
    }

    pub fn index(&self, dims: &TorusDims) -> usize {
        self.ring as usize * dims.ell as usize + self.pos as usize
    }

    pub fn step_pos(&self, dims: &TorusDims, d: i64) -> Coord {
        Coord::new(self.ring, dims.wrap_pos(self.pos as i64 + d))
    }

    pub fn step_ring(&self, dims: &TorusDims, d: i64) -> Coord {
        Coord::new(dims.wrap_ring(self.ring as i64 + d), self.pos)
    }
}

/// The four grid neighbours of a node.
pub fn neighbors(dims: &TorusDims, at: Coord) -> [Coord; 4] {
    [
        at.step_pos(dims, 1),
        at.step_pos(dims, -1),
        at.step_ring(dims, 1),
        at.step_ring(dims, -1),
    ]
}

/// Grid distance (shortest path, the product metric of the two ring metrics).
pub fn dist(dims: &TorusDims, a: Coord, b: Coord) -> u16 {
    dims.pos_dist(a.pos, b.pos) + dims.ring_dist(a.ring, b.ring)
}

/// Binary occupancy of the torus (one bit per node, multiplicities erased).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Grid {
    pub dims: TorusDims,
    bits: Vec<bool>,
}

impl Grid {
    pub fn empty(dims: TorusDims) -> Self {
        Grid {
            bits: vec![false; dims.n()],
            dims,
        }
    }

    pub fn from_nodes(dims: TorusDims, nodes: &[Coord]) -> Self {
        let mut g = Grid::empty(dims);
        for c in nodes {
            g.set(*c, true);
        }
        g
    }

    pub fn occupied(&self, at: Coord) -> bool {
        self.bits[at.index(&self.dims)]
    }

    pub fn set(&mut self, at: Coord, v: bool) {
        self.bits[at.index(&self.dims)] = v;
    }

    /// Occupied nodes in row-major order.
    pub fn occupied_nodes(&self) -> Vec<Coord> {
        let mut out = Vec::new();
        for r in 0..self.dims.big_l {
            for p in 0..self.dims.ell {
                let c = Coord::new(r, p);
                if self.occupied(c) {
                    out.push(c);
                }
            }
        }
        out
    }

    /// Number of occupied nodes on the given `ell`-ring.
    pub fn nb_ring(&self, ring: u16) -> u16 {
        (0..self.dims.ell)
            .filter(|&p| self.occupied(Coord::new(ring, p)))
            .count() as u16
    }

    /// Rings with at least one occupied node, ascending.
    pub fn occupied_rings(&self) -> Vec<u16> {
        (0..self.dims.big_l).filter(|&r| self.nb_ring(r) > 0).collect()
    }

    /// Apply `f` to every node coordinate, producing the image grid.
    /// `f` must be a bijection on nodes.
    pub fn map_nodes(&self, f: impl Fn(Coord) -> Coord) -> Grid {
        let mut g = Grid::empty(self.dims);
        for c in self.occupied_nodes() {
            g.set(f(c), true);
        }
        g
    }

    /// Occupied positions on one ring, ascending.
    pub fn ring_positions(&self, ring: u16) -> Vec<u16> {
        (0..self.dims.ell)
            .filter(|&p| self.occupied(Coord::new(ring, p)))
            .collect()
    }
}

/// A maximal run of occupied nodes on an `ell`-ring spaced exactly `d` hops
/// apart. Positions are listed in ring order from one extremity to the other.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub ring: u16,
    pub d: u16,
    pub positions: Vec<u16>,
}

impl Block {
    pub fn size(&self) -> usize {
        self.positions.len()
    }
}

/// All maximal `d`.blocks of the given spacing on one ring.
///
/// A block is a maximal arithmetic run `p, p+d, p+2d, ...` of occupied
/// positions. When the whole ring is one cyclic run (for instance every node
/// occupied at spacing `d`), a single block containing each position once is
/// returned, anchored arbitrarily.
pub fn blocks(grid: &Grid, ring: u16, d: u16) -> Vec<Block> {
    let ell = grid.dims.ell;
    assert!(d >= 1 && d < ell);
    let occ: Vec<bool> = (0..ell).map(|p| grid.occupied(Coord::new(ring, p))).collect();
    let nocc = occ.iter().filter(|&&b| b).count();
    if nocc == 0 {
        return Vec::new();
    }
    let _ = nocc;
    let mut out = Vec::new();
    let mut seen = vec![false; ell as usize];
    for start in 0..ell {
        if !occ[start as usize] || seen[start as usize] {
            continue;
        }
        // walk back to the run head, detecting a full cycle at spacing d
        let mut head = start;
        let mut cyclic = false;
        loop {
            let prev = grid.dims.wrap_pos(head as i64 - d as i64);
            if !occ[prev as usize] {
                break;
            }
            if prev == start {
                cyclic = true;
                break;
            }
            head = prev;
        }
        let mut run = vec![head];
        seen[head as usize] = true;
        let mut cur = head;
        loop {
            let next = grid.dims.wrap_pos(cur as i64 + d as i64);
            if !occ[next as usize] || seen[next as usize] || (cyclic && next == head) {
                break;
            }
            run.push(next);
            seen[next as usize] = true;
            cur = next;
        }
        out.push(Block {
            ring,
            d,
            positions: run,
        });
    }
    out
}

/// A configuration: per-node robot counts. `k >= 3` robots.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Config {
    pub dims: TorusDims,
    counts: Vec<u32>,
}

impl Config {
    pub fn new(dims: TorusDims, robots: &[Coord]) -> Result<Self, TorusError> {
        if robots.len() < 3 {
            return Err(TorusError::InvalidConfig(format!(
                "need at least 3 robots, got {}",
                robots.len()
            )));
        }
        let mut counts = vec![0u32; dims.n()];
        for c in robots {
            if c.ring >= dims.big_l || c.pos >= dims.ell {
                return Err(TorusError::InvalidConfig(format!(
                    "robot at ({}, {}) outside the torus",
                    c.ring, c.pos
                )));
            }
            counts[c.index(&dims)] += 1;
        }
        Ok(Config { dims, counts })
    }

    pub fn k(&self) -> u32 {
        self.counts.iter().sum()
    }

    pub fn count(&self, at: Coord) -> u32 {
        self.counts[at.index(&self.dims)]
    }

    /// Local-weak multiplicity bit: more than one robot on the node.
    pub fn is_multiplicity(&self, at: Coord) -> bool {
        self.count(at) > 1
    }

    pub fn grid(&self) -> Grid {
        let mut g = Grid::empty(self.dims);
        for r in 0..self.dims.big_l {
            for p in 0..self.dims.ell {
                let c = Coord::new(r, p);
                if self.count(c) > 0 {
                    g.set(c, true);
                }
            }
        }
        g
    }

    /// One coordinate per robot (multiplicities expanded), row-major order.
    pub fn robot_positions(&self) -> Vec<Coord> {
        let mut out = Vec::new();
        for r in 0..self.dims.big_l {
            for p in 0..self.dims.ell {
                let c = Coord::new(r, p);
                for _ in 0..self.count(c) {
                    out.push(c);
                }
            }
        }
        out
    }

    pub fn gathered(&self) -> bool {
        self.counts.iter().filter(|&&c| c > 0).count() == 1
    }
}

/// First occupied ring met when scanning from `ring` in direction `dir`
/// (`+1` or `-1`), excluding `ring` itself until a full wrap.
pub fn neighbor_ring(grid: &Grid, ring: u16, dir: i64) -> Option<u16> {
    let l = grid.dims.big_l as i64;
    for step in 1..=l {
        let r = grid.dims.wrap_ring(ring as i64 + dir * step);
        if grid.nb_ring(r) > 0 {
            return Some(r);
        }
    }
    None
}

/// Rings holding the maximum per-ring robot-node count (binary occupancy).
pub fn maximal_rings(grid: &Grid) -> (u16, Vec<u16>) {
    let nb: Vec<u16> = (0..grid.dims.big_l).map(|r| grid.nb_ring(r)).collect();
    let max = *nb.iter().max().unwrap();
    let rings = (0..grid.dims.big_l).filter(|&r| nb[r as usize] == max).collect();
    (max, rings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::{HashSet, VecDeque};

    fn dims65() -> TorusDims {
        TorusDims::new(6, 5, false).unwrap()
    }

    #[test]
    fn dims_validation() {
        assert!(TorusDims::new(6, 5, false).is_ok());
        assert!(TorusDims::new(6, 5, true).is_ok());
        assert!(TorusDims::new(5, 5, false).is_err());
        assert!(TorusDims::new(5, 6, false).is_err());
        assert!(TorusDims::new(6, 2, false).is_err());
        assert!(TorusDims::new(2, 1, false).is_err());
        assert!(TorusDims::new(5, 4, true).is_err());
        assert!(TorusDims::new(5, 4, false).is_ok());
    }

    #[test]
    fn neighbor_set() {
        let d = dims65();
        let ns = neighbors(&d, Coord::new(0, 0));
        let got: HashSet<_> = ns.iter().copied().collect();
        let want: HashSet<_> = [
            Coord::new(0, 1),
            Coord::new(0, 5),
            Coord::new(1, 0),
            Coord::new(4, 0),
        ]
        .into_iter()
        .collect();
        assert_eq!(got, want);
    }

    #[test]
    fn distances() {
        let d = dims65();
        assert_eq!(dist(&d, Coord::new(0, 0), Coord::new(0, 3)), 3);
        assert_eq!(dist(&d, Coord::new(0, 0), Coord::new(0, 4)), 2);
        assert_eq!(dist(&d, Coord::new(0, 0), Coord::new(2, 0)), 2);
        assert_eq!(dist(&d, Coord::new(0, 0), Coord::new(3, 0)), 2);
        assert_eq!(dist(&d, Coord::new(1, 1), Coord::new(4, 5)), 4);
    }

    fn bfs_dist(d: &TorusDims, a: Coord, b: Coord) -> u16 {
        let mut q = VecDeque::new();
        let mut seen = vec![u16::MAX; d.n()];
        q.push_back(a);
        seen[a.index(d)] = 0;
        while let Some(c) = q.pop_front() {
            if c == b {
                return seen[c.index(d)];
            }
            for n in neighbors(d, c) {
                if seen[n.index(d)] == u16::MAX {
                    seen[n.index(d)] = seen[c.index(d)] + 1;
                    q.push_back(n);
                }
            }
        }
        unreachable!()
    }

    proptest! {
        #[test]
        fn dist_matches_bfs(r1 in 0u16..5, p1 in 0u16..6, r2 in 0u16..5, p2 in 0u16..6) {
            let d = dims65();
            let a = Coord::new(r1, p1);
            let b = Coord::new(r2, p2);
            prop_assert_eq!(dist(&d, a, b), bfs_dist(&d, a, b));
        }

        #[test]
        fn dist_is_metric(r1 in 0u16..5, p1 in 0u16..6, r2 in 0u16..5, p2 in 0u16..6,
                          r3 in 0u16..5, p3 in 0u16..6) {
            let d = dims65();
            let a = Coord::new(r1, p1);
            let b = Coord::new(r2, p2);
            let c = Coord::new(r3, p3);
            prop_assert_eq!(dist(&d, a, b), dist(&d, b, a));
            prop_assert_eq!(dist(&d, a, b) == 0, a == b);
            prop_assert!(dist(&d, a, c) <= dist(&d, a, b) + dist(&d, b, c));
        }
    }

    #[test]
    fn blocks_basic() {
        let d = dims65();
        // positions 0,1,2 and 4 on ring 0: one 1.block of 3 and one of 1
        let g = Grid::from_nodes(
            d,
            &[
                Coord::new(0, 0),
                Coord::new(0, 1),
                Coord::new(0, 2),
                Coord::new(0, 4),
            ],
        );
        let bs = blocks(&g, 0, 1);
        let sizes: Vec<usize> = bs.iter().map(|b| b.size()).collect();
        let mut sorted = sizes.clone();
        sorted.sort();
        assert_eq!(sorted, vec![1, 3]);
        // same occupancy read at spacing 2: 0,2,4 form a 2.block of 3; 1 alone
        let bs2 = blocks(&g, 0, 2);
        let mut sizes2: Vec<usize> = bs2.iter().map(|b| b.size()).collect();
        sizes2.sort();
        assert_eq!(sizes2, vec![1, 3]);
    }

    #[test]
    fn blocks_hand_oracle_d1() {
        // Hand enumeration: ring of 6 with occupancy 1,1,0,1,1,0
        // has exactly two 1.blocks, both of size 2, heads at 0 and 3.
        let d = dims65();
        let g = Grid::from_nodes(
            d,
            &[
                Coord::new(0, 0),
                Coord::new(0, 1),
                Coord::new(0, 3),
                Coord::new(0, 4),
            ],
        );
        let mut bs = blocks(&g, 0, 1);
        bs.sort_by_key(|b| b.positions[0]);
        assert_eq!(bs.len(), 2);
        assert_eq!(bs[0].positions, vec![0, 1]);
        assert_eq!(bs[1].positions, vec![3, 4]);
    }

    #[test]
    fn blocks_full_ring_cycle() {
        let d = dims65();
        let g = Grid::from_nodes(d, &(0..6).map(|p| Coord::new(0, p)).collect::<Vec<_>>());
        let bs = blocks(&g, 0, 1);
        assert_eq!(bs.len(), 1);
        assert_eq!(bs[0].size(), 6);
        // equally spaced: 0,2,4 at d=2 is one cyclic block of 3
        let g2 = Grid::from_nodes(d, &[Coord::new(0, 0), Coord::new(0, 2), Coord::new(0, 4)]);
        let bs2 = blocks(&g2, 0, 2);
        assert_eq!(bs2.len(), 1);
        assert_eq!(bs2[0].size(), 3);
    }

    proptest! {
        #[test]
        fn blocks_partition_ring(mask in 0u32..64) {
            let d = dims65();
            let nodes: Vec<Coord> = (0..6)
                .filter(|p| mask & (1 << p) != 0)
                .map(|p| Coord::new(0, p))
                .collect();
            let g = Grid::from_nodes(d, &nodes);
            for spacing in 1..6u16 {
                let bs = blocks(&g, 0, spacing);
                let mut covered: Vec<u16> = bs.iter().flat_map(|b| b.positions.clone()).collect();
                covered.sort();
                let mut expect: Vec<u16> = nodes.iter().map(|c| c.pos).collect();
                expect.sort();
                prop_assert_eq!(covered, expect);
                // runs really are arithmetic with the right spacing
                for b in &bs {
                    for w in b.positions.windows(2) {
                        prop_assert_eq!(d.wrap_pos(w[0] as i64 + spacing as i64), w[1]);
                    }
                }
            }
        }
    }

    #[test]
    fn config_basics() {
        let d = dims65();
        let c = Config::new(
            d,
            &[Coord::new(0, 0), Coord::new(0, 0), Coord::new(2, 3)],
        )
        .unwrap();
        assert_eq!(c.k(), 3);
        assert!(c.is_multiplicity(Coord::new(0, 0)));
        assert!(!c.is_multiplicity(Coord::new(2, 3)));
        assert_eq!(c.grid().occupied_nodes().len(), 2);
        assert!(!c.gathered());
        let g = Config::new(
            d,
            &[Coord::new(1, 1), Coord::new(1, 1), Coord::new(1, 1)],
        )
        .unwrap();
        assert!(g.gathered());
        assert!(Config::new(d, &[Coord::new(0, 0), Coord::new(1, 1)]).is_err());
        assert!(Config::new(d, &[Coord::new(9, 0), Coord::new(1, 1), Coord::new(2, 2)]).is_err());
    }

    #[test]
    fn neighbor_ring_scan() {
        let d = dims65();
        let g = Grid::from_nodes(d, &[Coord::new(0, 0), Coord::new(3, 2)]);
        assert_eq!(neighbor_ring(&g, 0, 1), Some(3));
        assert_eq!(neighbor_ring(&g, 0, -1), Some(3));
        assert_eq!(neighbor_ring(&g, 3, 1), Some(0));
        // single occupied ring: scanning wraps back to itself
        let g1 = Grid::from_nodes(d, &[Coord::new(2, 0)]);
        assert_eq!(neighbor_ring(&g1, 2, 1), Some(2));
        let ge = Grid::empty(d);
        assert_eq!(neighbor_ring(&ge, 0, 1), None);
    }

    #[test]
    fn maximal_ring_sets() {
        let d = dims65();
        let g = Grid::from_nodes(
            d,
            &[
                Coord::new(0, 0),
                Coord::new(0, 1),
                Coord::new(2, 0),
                Coord::new(4, 1),
            ],
        );
        let (max, rings) = maximal_rings(&g);
        assert_eq!(max, 2);
        assert_eq!(rings, vec![0]);
    }
}
