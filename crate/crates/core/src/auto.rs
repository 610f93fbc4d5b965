//! Automorphisms of the torus grid that preserve the ring structure.
//!
//! For `ell != L` every graph automorphism keeps the two ring families
//! apart, so the group is generated by the two translations and the two
//! reflections: `4 * ell * L` elements.

use crate::torus::{Coord, Grid, TorusDims};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Automorphism {
    pub d_ring: u16,
    pub d_pos: u16,
    pub flip_ring: bool,
    pub flip_pos: bool,
}

impl Automorphism {
    pub fn identity() -> Self {
        Automorphism {
            d_ring: 0,
            d_pos: 0,
            flip_ring: false,
            flip_pos: false,
        }
    }

    pub fn apply(&self, dims: &TorusDims, c: Coord) -> Coord {
        let r = if self.flip_ring { -(c.ring as i64) } else { c.ring as i64 };
        let p = if self.flip_pos { -(c.pos as i64) } else { c.pos as i64 };
        Coord::new(
            dims.wrap_ring(r + self.d_ring as i64),
            dims.wrap_pos(p + self.d_pos as i64),
        )
    }

    pub fn is_identity(&self) -> bool {
        *self == Automorphism::identity()
    }
}

/// Every element of the group, identity first.
pub fn all_automorphisms(dims: &TorusDims) -> Vec<Automorphism> {
    let mut out = Vec::with_capacity(dims.n() * 4);
    for flip_ring in [false, true] {
        for flip_pos in [false, true] {
            for d_ring in 0..dims.big_l {
                for d_pos in 0..dims.ell {
                    out.push(Automorphism {
                        d_ring,
                        d_pos,
                        flip_ring,
                        flip_pos,
                    });
                }
            }
        }
    }
    out.sort_by_key(|a| (a.flip_ring, a.flip_pos, a.d_ring, a.d_pos));
    out
}

pub fn apply_to_grid(dims: &TorusDims, a: &Automorphism, grid: &Grid) -> Grid {
    grid.map_nodes(|c| a.apply(dims, c))
}

/// Lexicographically least image of the occupied-node set over the group.
pub fn canonical_nodes(dims: &TorusDims, nodes: &[Coord]) -> Vec<Coord> {
    let mut best: Option<Vec<Coord>> = None;
    for a in all_automorphisms(dims) {
        let mut img: Vec<Coord> = nodes.iter().map(|c| a.apply(dims, *c)).collect();
        img.sort();
        if best.as_ref().map_or(true, |b| img < *b) {
            best = Some(img);
        }
    }
    best.unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::neighbors;
    use proptest::prelude::*;

    fn dims65() -> TorusDims {
        TorusDims::new(6, 5, false).unwrap()
    }

    #[test]
    fn group_size() {
        let d = dims65();
        assert_eq!(all_automorphisms(&d).len(), 4 * 6 * 5);
    }

    proptest! {
        #[test]
        fn preserves_adjacency(idx in 0usize..120, r in 0u16..5, p in 0u16..6) {
            let d = dims65();
            let a = all_automorphisms(&d)[idx];
            let c = Coord::new(r, p);
            let img = a.apply(&d, c);
            let mut got: Vec<Coord> = neighbors(&d, c).iter().map(|n| a.apply(&d, *n)).collect();
            let mut want: Vec<Coord> = neighbors(&d, img).to_vec();
            got.sort();
            want.sort();
            prop_assert_eq!(got, want);
        }

        #[test]
        fn canonical_is_invariant(idx in 0usize..120) {
            let d = dims65();
            let nodes = vec![Coord::new(0, 0), Coord::new(1, 2), Coord::new(3, 4)];
            let a = all_automorphisms(&d)[idx];
            let img: Vec<Coord> = nodes.iter().map(|c| a.apply(&d, *c)).collect();
            prop_assert_eq!(canonical_nodes(&d, &nodes), canonical_nodes(&d, &img));
        }
    }
}
