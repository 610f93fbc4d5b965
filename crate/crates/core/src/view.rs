//! Robot views.
//!
//! A robot has no compass: from its own node it can read the binary
//! occupancy of the torus along either ring direction combined with either
//! cross-ring direction, giving four `L x ell` readings. Its view is the
//! multiset of those readings, kept as the descending-sorted list of their
//! row-major flattenings. Two robots look identical exactly when some
//! orientation makes their surroundings read the same.

use crate::torus::{Config, Coord, Grid};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ViewError {
    #[error("election tie: candidates {0:?} share the largest view")]
    Tie(Vec<Coord>),
    #[error("election over an empty candidate set")]
    NoCandidates,
}

/// One oriented reading: `L` rows of `ell` bits starting at the observer,
/// row-major.
pub type Reading = Vec<u8>;

/// Reading of `grid` from `at` with the given scan directions.
pub fn reading(grid: &Grid, at: Coord, ring_dir: i64, pos_dir: i64) -> Reading {
    let dims = grid.dims;
    let mut out = Vec::with_capacity(dims.n());
    for t in 0..dims.big_l as i64 {
        let ring = dims.wrap_ring(at.ring as i64 + ring_dir * t);
        for u in 0..dims.ell as i64 {
            let pos = dims.wrap_pos(at.pos as i64 + pos_dir * u);
            out.push(grid.occupied(Coord::new(ring, pos)) as u8);
        }
    }
    out
}

/// The orientation-free key of a node: its four readings sorted descending
/// and concatenated. Defined for every node, occupied or not.
pub fn node_view_key(grid: &Grid, at: Coord) -> Vec<u8> {
    let mut rs = [
        reading(grid, at, 1, 1),
        reading(grid, at, 1, -1),
        reading(grid, at, -1, 1),
        reading(grid, at, -1, -1),
    ];
    rs.sort_by(|a, b| b.cmp(a));
    let mut key = Vec::with_capacity(4 * grid.dims.n());
    for r in rs {
        key.extend(r);
    }
    key
}

/// What a robot perceives: the orientation-free occupancy key plus its own
/// node's multiplicity bit. The bit takes no part in view comparison.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RobotView {
    pub key: Vec<u8>,
    pub m: bool,
}

pub fn robot_view(cfg: &Config, at: Coord) -> RobotView {
    RobotView {
        key: node_view_key(&cfg.grid(), at),
        m: cfg.is_multiplicity(at),
    }
}

pub fn compare_views(a: &RobotView, b: &RobotView) -> std::cmp::Ordering {
    a.key.cmp(&b.key)
}

/// The unique candidate whose view key is largest. A tie between distinct
/// nodes is an error: the protocol only elects where the paper guarantees
/// distinguishability.
pub fn elect_largest_view(grid: &Grid, candidates: &[Coord]) -> Result<Coord, ViewError> {
    elect_by_key(candidates, |c| node_view_key(grid, *c), true)
}

/// As above but smallest.
pub fn elect_smallest_view(grid: &Grid, candidates: &[Coord]) -> Result<Coord, ViewError> {
    elect_by_key(candidates, |c| node_view_key(grid, *c), false)
}

pub fn elect_by_key<K: Ord>(
    candidates: &[Coord],
    key: impl Fn(&Coord) -> K,
    largest: bool,
) -> Result<Coord, ViewError> {
    if candidates.is_empty() {
        return Err(ViewError::NoCandidates);
    }
    let mut dedup: Vec<Coord> = candidates.to_vec();
    dedup.sort();
    dedup.dedup();
    let mut best: Vec<Coord> = vec![dedup[0]];
    let mut best_key = key(&dedup[0]);
    for c in &dedup[1..] {
        let k = key(c);
        let better = if largest { k > best_key } else { k < best_key };
        if better {
            best = vec![*c];
            best_key = k;
        } else if k == best_key {
            best.push(*c);
        }
    }
    if best.len() > 1 {
        return Err(ViewError::Tie(best));
    }
    Ok(best[0])
}

/// True when every occupied node carries a distinct view. This is the
/// operative notion of rigidity: it is exactly what elections need.
pub fn all_views_distinct(grid: &Grid) -> bool {
    let mut keys: Vec<Vec<u8>> = grid
        .occupied_nodes()
        .iter()
        .map(|c| node_view_key(grid, *c))
        .collect();
    keys.sort();
    keys.windows(2).all(|w| w[0] != w[1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::auto::{all_automorphisms, apply_to_grid};
    use crate::torus::TorusDims;
    use proptest::prelude::*;

    fn dims65() -> TorusDims {
        TorusDims::new(6, 5, false).unwrap()
    }

    fn grid_from_mask(dims: TorusDims, mask: u32) -> Grid {
        let nodes: Vec<Coord> = (0..dims.n())
            .filter(|i| mask & (1 << (i % 30)) != 0)
            .map(|i| Coord::new((i / dims.ell as usize) as u16, (i % dims.ell as usize) as u16))
            .collect();
        Grid::from_nodes(dims, &nodes)
    }

    #[test]
    fn reading_starts_at_self() {
        let d = dims65();
        let g = Grid::from_nodes(d, &[Coord::new(2, 3), Coord::new(2, 4)]);
        let r = reading(&g, Coord::new(2, 3), 1, 1);
        assert_eq!(r[0], 1); // own node
        assert_eq!(r[1], 1); // (2,4) is next in +pos
        assert_eq!(r[2], 0);
        let r2 = reading(&g, Coord::new(2, 3), 1, -1);
        assert_eq!(r2[1], 0); // (2,2) is empty
    }

    #[test]
    fn mirror_robots_share_views() {
        let d = dims65();
        // symmetric pair about the column between pos 0 and 1 on ring 0,
        // plus an anchor placed symmetrically
        let g = Grid::from_nodes(
            d,
            &[Coord::new(0, 0), Coord::new(0, 1), Coord::new(2, 0), Coord::new(2, 1)],
        );
        assert_eq!(
            node_view_key(&g, Coord::new(0, 0)),
            node_view_key(&g, Coord::new(0, 1))
        );
        assert!(!all_views_distinct(&g));
    }

    #[test]
    fn distinct_views_on_generic_config() {
        let d = dims65();
        let g = Grid::from_nodes(d, &[Coord::new(0, 0), Coord::new(1, 2), Coord::new(3, 3)]);
        assert!(all_views_distinct(&g));
        let winner = elect_largest_view(&g, &g.occupied_nodes()).unwrap();
        assert!(g.occupied(winner));
    }

    #[test]
    fn election_tie_detected() {
        let d = dims65();
        let g = Grid::from_nodes(
            d,
            &[Coord::new(0, 0), Coord::new(0, 1), Coord::new(2, 0), Coord::new(2, 1)],
        );
        match elect_largest_view(&g, &g.occupied_nodes()) {
            Err(ViewError::Tie(_)) => {}
            other => panic!("expected tie, got {other:?}"),
        }
    }

    proptest! {
        #[test]
        fn views_commute_with_automorphisms(mask in 1u32..(1 << 30), idx in 0usize..120) {
            let d = dims65();
            let g = grid_from_mask(d, mask);
            prop_assume!(!g.occupied_nodes().is_empty());
            let a = all_automorphisms(&d)[idx];
            let img = apply_to_grid(&d, &a, &g);
            for c in g.occupied_nodes() {
                prop_assert_eq!(node_view_key(&g, c), node_view_key(&img, a.apply(&d, c)));
            }
        }

        #[test]
        fn election_commutes_with_automorphisms(mask in 1u32..(1 << 30), idx in 0usize..120) {
            let d = dims65();
            let g = grid_from_mask(d, mask);
            let occ = g.occupied_nodes();
            prop_assume!(occ.len() >= 2);
            let a = all_automorphisms(&d)[idx];
            let img = apply_to_grid(&d, &a, &g);
            let occ_img: Vec<Coord> = occ.iter().map(|c| a.apply(&d, *c)).collect();
            match (elect_largest_view(&g, &occ), elect_largest_view(&img, &occ_img)) {
                (Ok(w), Ok(w2)) => prop_assert_eq!(a.apply(&d, w), w2),
                (Err(ViewError::Tie(_)), Err(ViewError::Tie(_))) => {}
                (x, y) => prop_assert!(false, "mismatch: {:?} vs {:?}", x, y),
            }
        }
    }

    #[test]
    fn multiplicity_bit_excluded_from_comparison() {
        let d = dims65();
        let cfg = Config::new(
            d,
            &[Coord::new(0, 0), Coord::new(0, 0), Coord::new(1, 2), Coord::new(3, 3)],
        )
        .unwrap();
        let v = robot_view(&cfg, Coord::new(0, 0));
        assert!(v.m);
        let v2 = robot_view(&cfg, Coord::new(1, 2));
        assert!(!v2.m);
        // comparison looks at keys only
        assert_eq!(compare_views(&v, &v), std::cmp::Ordering::Equal);
    }
}
