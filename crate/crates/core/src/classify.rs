//! Configuration shape analysis: symmetry detection and the classification of
//! a configuration into the behavioral sets that drive both phases.

use crate::auto::{all_automorphisms, Automorphism};
use crate::torus::{blocks, Coord, Grid};
use crate::view;

/// A reflection leaving the occupancy invariant. `anchor2` is twice the axis
/// coordinate, so odd values denote an axis through edges. A `Pos` axis maps
/// `pos -> anchor2 - pos` (it crosses every l-ring at two loci), a `Ring`
/// axis maps `ring -> anchor2 - ring` (it runs along l-rings).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Pos { anchor2: u16 },
    Ring { anchor2: u16 },
}

pub fn pos_axes(g: &Grid) -> Vec<u16> {
    (0..g.dims.ell)
        .filter(|&a| {
            g.occupied_nodes().iter().all(|c| {
                g.occupied(Coord {
                    ring: c.ring,
                    pos: g.dims.wrap_pos(a as i64 - c.pos as i64),
                })
            })
        })
        .collect()
}

pub fn ring_axes(g: &Grid) -> Vec<u16> {
    (0..g.dims.big_l)
        .filter(|&a| {
            g.occupied_nodes().iter().all(|c| {
                g.occupied(Coord {
                    ring: g.dims.wrap_ring(a as i64 - c.ring as i64),
                    pos: c.pos,
                })
            })
        })
        .collect()
}

pub fn symmetry_axes(g: &Grid) -> Vec<Axis> {
    let mut out: Vec<Axis> = pos_axes(g)
        .into_iter()
        .map(|anchor2| Axis::Pos { anchor2 })
        .collect();
    out.extend(ring_axes(g).into_iter().map(|anchor2| Axis::Ring { anchor2 }));
    out
}

/// True when some non-trivial translation leaves the occupancy unchanged.
pub fn is_periodic(g: &Grid) -> bool {
    for dr in 0..g.dims.big_l {
        for dp in 0..g.dims.ell {
            if dr == 0 && dp == 0 {
                continue;
            }
            let t = Automorphism {
                d_ring: dr,
                d_pos: dp,
                flip_ring: false,
                flip_pos: false,
            };
            if preserves(g, &t) {
                return true;
            }
        }
    }
    false
}

fn preserves(g: &Grid, a: &Automorphism) -> bool {
    g.occupied_nodes()
        .iter()
        .all(|&c| g.occupied(a.apply(&g.dims, c)))
}

/// Rigidity as the robots perceive it: every occupied node has a distinct view.
pub fn is_rigid(g: &Grid) -> bool {
    view::all_views_distinct(g)
}

/// No reflection axis and no non-trivial translation. Strictly weaker than
/// `is_rigid`: a 180-degree rotation or a glide reflection can map one
/// occupied node onto another without either an axis or a period existing,
/// and conversely an axis whose reflection fixes every occupied node
/// individually leaves all views distinct.
pub fn is_rigid_geometric(g: &Grid) -> bool {
    symmetry_axes(g).is_empty() && !is_periodic(g)
}

/// Ground-truth counterpart of `is_rigid`: the full symmetry group acts
/// trivially on the occupied set, i.e. every occupancy-preserving
/// automorphism fixes each occupied node.
pub fn stabilizer_acts_trivially(g: &Grid) -> bool {
    all_automorphisms(&g.dims).iter().all(|a| {
        !preserves(g, a)
            || g.occupied_nodes().iter().all(|&c| a.apply(&g.dims, c) == c)
    })
}

/// The three distinguished rings of a target configuration, plus the ring
/// direction `up` with `target + up = max` (the orientation of phase 2).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TargetInfo {
    pub max: u16,
    pub target: u16,
    pub secondary: u16,
    pub v_target: Coord,
    pub up: i64,
}

/// Position of the single occupied node on a ring with exactly one.
pub fn single_pos(g: &Grid, ring: u16) -> Option<u16> {
    let ps = g.ring_positions(ring);
    match ps.as_slice() {
        [p] => Some(*p),
        _ => None,
    }
}

/// Two robots at distance exactly 2: the middle (empty) position, if unambiguous.
pub fn two_at_distance_two(g: &Grid, ring: u16) -> Option<u16> {
    let ps = g.ring_positions(ring);
    if ps.len() != 2 {
        return None;
    }
    let mids: Vec<u16> = (0..g.dims.ell)
        .filter(|&m| {
            !g.occupied(Coord { ring, pos: m })
                && g.occupied(Coord { ring, pos: g.dims.wrap_pos(m as i64 + 1) })
                && g.occupied(Coord { ring, pos: g.dims.wrap_pos(m as i64 - 1) })
        })
        .collect();
    match mids.as_slice() {
        [m] => Some(*m),
        _ => None,
    }
}

/// A single 1.block of the given size covering the whole ring population;
/// returns the block, as positions in consecutive order.
pub fn full_block(g: &Grid, ring: u16, size: u16) -> Option<Vec<u16>> {
    if g.nb_ring(ring) != size {
        return None;
    }
    let bs = blocks(g, ring, 1);
    match bs.as_slice() {
        [b] if b.positions.len() == size as usize => Some(b.positions.clone()),
        _ => None,
    }
}

/// Middle of a 1.block of size 3 holding the ring's entire population.
pub fn block3_middle(g: &Grid, ring: u16) -> Option<u16> {
    full_block(g, ring, 3).map(|b| b[1])
}

/// Middle of a 1.block of size 5 holding the ring's entire population.
pub fn block5_middle(g: &Grid, ring: u16) -> Option<u16> {
    full_block(g, ring, 5).map(|b| b[2])
}

/// Two 1.blocks of size 2 separated on one side by a single empty node:
/// the positions of such separating nodes (two on a 6-ring when the blocks
/// sit two apart on both sides).
pub fn twin_pairs_gaps(g: &Grid, ring: u16) -> Vec<u16> {
    if g.nb_ring(ring) != 4 {
        return Vec::new();
    }
    let bs = blocks(g, ring, 1);
    if bs.len() != 2 || bs.iter().any(|b| b.positions.len() != 2) {
        return Vec::new();
    }
    (0..g.dims.ell)
        .filter(|&m| {
            !g.occupied(Coord { ring, pos: m })
                && g.occupied(Coord { ring, pos: g.dims.wrap_pos(m as i64 + 1) })
                && g.occupied(Coord { ring, pos: g.dims.wrap_pos(m as i64 - 1) })
        })
        .collect()
}

/// A 1.block of size 3 plus a single robot at distance 2 from an extremity:
/// the empty positions between the block and the satellite (two candidates
/// when the satellite sits two hops from both extremities).
pub fn block3_plus_satellite_gaps(g: &Grid, ring: u16) -> Vec<u16> {
    let mut out = Vec::new();
    if g.nb_ring(ring) != 4 {
        return out;
    }
    let bs = blocks(g, ring, 1);
    let (b3, b1) = match bs.as_slice() {
        [a, b] if a.positions.len() == 3 && b.positions.len() == 1 => (a, b),
        [a, b] if a.positions.len() == 1 && b.positions.len() == 3 => (b, a),
        _ => return out,
    };
    let lone = b1.positions[0];
    for end in [b3.positions[0] as i64, b3.positions[2] as i64] {
        for dir in [1i64, -1] {
            if g.dims.wrap_pos(end + 2 * dir) == lone {
                let mid = g.dims.wrap_pos(end + dir);
                if !g.occupied(Coord { ring, pos: mid }) && !out.contains(&mid) {
                    out.push(mid);
                }
            }
        }
    }
    out
}

fn target_pattern(g: &Grid, ring: u16) -> Option<u16> {
    single_pos(g, ring)
        .or_else(|| two_at_distance_two(g, ring))
        .or_else(|| block3_middle(g, ring))
}

pub fn detect_target(g: &Grid) -> Option<TargetInfo> {
    let (_, maxes) = crate::torus::maximal_rings(g);
    let [m] = maxes.as_slice() else { return None };
    let m = *m;
    for up in [1i64, -1] {
        let target = g.dims.wrap_ring(m as i64 - up);
        let secondary = g.dims.wrap_ring(m as i64 + up);
        if g.nb_ring(secondary) != 0 {
            continue;
        }
        if let Some(vp) = target_pattern(g, target) {
            return Some(TargetInfo {
                max: m,
                target,
                secondary,
                v_target: Coord { ring: target, pos: vp },
                up,
            });
        }
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Label {
    Gathered,
    Sp1,
    Sp2,
    Sp3,
    Sp4,
    Pr,
    Ls,
    NotUnique,
    Empty,
    SemiEmpty,
    Oriented1,
    Oriented2,
    SemiOriented,
    Undefined,
}

impl Label {
    pub fn is_phase2(self) -> bool {
        matches!(
            self,
            Label::Gathered
                | Label::Sp1
                | Label::Sp2
                | Label::Sp3
                | Label::Sp4
                | Label::Pr
                | Label::Ls
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            Label::Gathered => "gathered",
            Label::Sp1 => "sp-1",
            Label::Sp2 => "sp-2",
            Label::Sp3 => "sp-3",
            Label::Sp4 => "sp-4",
            Label::Pr => "pr",
            Label::Ls => "ls",
            Label::NotUnique => "not-unique",
            Label::Empty => "empty",
            Label::SemiEmpty => "semi-empty",
            Label::Oriented1 => "oriented-1",
            Label::Oriented2 => "oriented-2",
            Label::SemiOriented => "semi-oriented",
            Label::Undefined => "undefined",
        }
    }
}

fn is_sp4(g: &Grid) -> bool {
    let rings = g.occupied_rings();
    let [r] = rings.as_slice() else { return false };
    let n = g.nb_ring(*r);
    // Any two occupied nodes, adjacent or not: a non-adjacent pair on a
    // single ring only arises late in the gathering when a straggler with
    // an outdated snapshot lands away from the tower, and the tower-versus-
    // single asymmetry still orients the walk.
    n == 2 || (n == 3 && full_block(g, *r, n).is_some())
}

fn is_sp3(g: &Grid) -> bool {
    let Some(ti) = detect_target(g) else { return false };
    if !empty_pred(g, &ti) || g.nb_ring(ti.target) != 1 {
        return false;
    }
    let vp = ti.v_target.pos;
    block3_middle(g, ti.max) == Some(vp) || two_at_distance_two(g, ti.max) == Some(vp)
}

fn is_sp2(g: &Grid) -> bool {
    let Some(ti) = detect_target(g) else { return false };
    if g.nb_ring(ti.target) != 1 {
        return false;
    }
    let vp = ti.v_target.pos;
    twin_pairs_gaps(g, ti.max).contains(&vp)
        || block5_middle(g, ti.max) == Some(vp)
        || block3_plus_satellite_gaps(g, ti.max).contains(&vp)
}

/// The anchor node `u` on the heavy ring of an sp-1 configuration.
pub fn sp1_anchor(g: &Grid) -> Option<(u16, u16, u16)> {
    let mut rings = g.occupied_rings();
    rings.sort_by_key(|&r| g.nb_ring(r));
    let [lo, hi] = rings.as_slice() else { return None };
    let (li, lj) = (*hi, *lo);
    if g.dims.ring_dist(li, lj) != 1 || g.nb_ring(lj) >= g.nb_ring(li) {
        return None;
    }
    let anchors: Vec<u16> = match g.nb_ring(li) {
        4 => twin_pairs_gaps(g, li),
        3 => block3_middle(g, li).into_iter().collect(),
        5 => block5_middle(g, li).into_iter().collect(),
        _ => Vec::new(),
    };
    for u in anchors {
        let ok = match g.nb_ring(lj) {
            3 => block3_middle(g, lj) == Some(u),
            2 => {
                two_at_distance_two(g, lj) == Some(u)
                    || full_block(g, lj, 2)
                        .map(|b| b.contains(&u))
                        .unwrap_or(false)
            }
            _ => false,
        };
        if ok {
            return Some((li, lj, u));
        }
    }
    None
}

fn empty_pred(g: &Grid, ti: &TargetInfo) -> bool {
    (0..g.dims.big_l)
        .filter(|&r| r != ti.max && r != ti.target)
        .all(|r| g.nb_ring(r) == 0)
}

/// Unique maximal ring, if any, with its two adjacent rings.
pub fn unique_max(g: &Grid) -> Option<(u16, u16, u16)> {
    let (_, maxes) = crate::torus::maximal_rings(g);
    let [m] = maxes.as_slice() else { return None };
    let i = g.dims.wrap_ring(*m as i64 + 1);
    let k = g.dims.wrap_ring(*m as i64 - 1);
    Some((*m, i, k))
}

pub fn classify(g: &Grid) -> Label {
    if g.occupied_nodes().len() == 1 {
        return Label::Gathered;
    }
    if is_sp4(g) {
        return Label::Sp4;
    }
    if is_sp3(g) {
        return Label::Sp3;
    }
    if is_sp2(g) {
        return Label::Sp2;
    }
    if sp1_anchor(g).is_some() {
        return Label::Sp1;
    }
    if let Some(ti) = detect_target(g) {
        return if empty_pred(g, &ti) { Label::Ls } else { Label::Pr };
    }
    let Some((_, li, lk)) = unique_max(g) else {
        return Label::NotUnique;
    };
    let (a, b) = (g.nb_ring(li), g.nb_ring(lk));
    match (a.min(b), a.max(b)) {
        (0, 0) => Label::Empty,
        (0, _) => Label::SemiEmpty,
        (1, 1) => Label::SemiOriented,
        (1, _) => {
            // The lighter adjacent ring holds the lone robot whose column
            // orients the heavier one.
            let (one, many) = if a == 1 { (li, lk) } else { (lk, li) };
            let rp = single_pos(g, one).expect("ring with count 1");
            let aligned = block3_middle(g, many) == Some(rp)
                || two_at_distance_two(g, many) == Some(rp);
            if aligned {
                Label::Oriented1
            } else {
                Label::Oriented2
            }
        }
        _ => Label::Undefined,
    }
}

/// The auxiliary configuration used to break ties on the lighter adjacent
/// ring: with at least four occupied rings both adjacents of the maximal
/// ring are blanked, with exactly three only the lighter one is.
pub fn gamma(g: &Grid, li: u16, lk: u16) -> Grid {
    let occupied = g.occupied_rings().len();
    let mut out = g.clone();
    for p in 0..g.dims.ell {
        out.set(Coord { ring: li, pos: p }, false);
        if occupied >= 4 {
            out.set(Coord { ring: lk, pos: p }, false);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::{Coord, Grid, TorusDims};
    use proptest::prelude::*;

    fn dims65() -> TorusDims {
        TorusDims::new(6, 5, false).unwrap()
    }

    fn grid(nodes: &[(u16, u16)]) -> Grid {
        Grid::from_nodes(
            dims65(),
            &nodes
                .iter()
                .map(|&(r, p)| Coord { ring: r, pos: p })
                .collect::<Vec<_>>(),
        )
    }

    #[test]
    fn axes_hand_cases() {
        // Symmetric about the column pos=1: pos -> 2 - pos.
        let g = grid(&[(0, 0), (0, 2), (2, 1)]);
        assert_eq!(pos_axes(&g), vec![2]);
        assert!(ring_axes(&g).is_empty());
        // Single fully occupied column is fixed by the ring axis through it
        // and by the pos axis through its own column.
        let g = grid(&[(1, 2), (3, 2)]);
        assert_eq!(pos_axes(&g), vec![4]);
        assert_eq!(ring_axes(&g), vec![4]);
    }

    #[test]
    fn axes_match_automorphism_filter() {
        // Independent oracle: axes are exactly the occupancy-preserving
        // single-flip automorphisms with no shift along the fixed coordinate.
        let g = grid(&[(0, 0), (1, 2), (2, 1), (4, 4)]);
        for a in all_automorphisms(&g.dims) {
            let pres = g.occupied_nodes().iter().all(|&c| g.occupied(a.apply(&g.dims, c)));
            if a.flip_pos && !a.flip_ring && a.d_ring == 0 {
                assert_eq!(pres, pos_axes(&g).contains(&a.d_pos));
            }
            if a.flip_ring && !a.flip_pos && a.d_pos == 0 {
                assert_eq!(pres, ring_axes(&g).contains(&a.d_ring));
            }
        }
    }

    #[test]
    fn periodicity_hand_cases() {
        let g = grid(&[(0, 0), (0, 3)]); // shift by 3 columns
        assert!(is_periodic(&g));
        let g = grid(&[(0, 0), (0, 1), (2, 4)]);
        assert!(!is_periodic(&g));
    }

    #[test]
    fn rigidity_notions_diverge() {
        // Fixed by the 180-degree rotation (ring,pos) -> (-ring,-pos): no
        // axis, no period, but two robots swap and share a view.
        let g = grid(&[(0, 0), (1, 1), (4, 5)]);
        assert!(is_rigid_geometric(&g));
        assert!(!is_rigid(&g));
        assert!(!stabilizer_acts_trivially(&g));
        // Ring axis through ring 0 fixes every robot individually: an axis
        // exists yet all views are distinct.
        let g = grid(&[(0, 0), (0, 1), (0, 3)]);
        assert!(!is_rigid_geometric(&g));
        assert!(is_rigid(&g));
        assert!(stabilizer_acts_trivially(&g));
    }

    proptest! {
        #[test]
        fn rigid_iff_stabilizer_trivial(mask in 1u64..(1 << 30)) {
            let dims = dims65();
            let nodes: Vec<Coord> = (0..30)
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| Coord { ring: i / 6, pos: i % 6 })
                .collect();
            let g = Grid::from_nodes(dims, &nodes);
            prop_assert_eq!(is_rigid(&g), stabilizer_acts_trivially(&g));
        }
    }

    #[test]
    fn target_detection() {
        // max = ring 2 (4 robots), target = ring 1 (single robot), ring 3 empty.
        let g = grid(&[(2, 0), (2, 1), (2, 2), (2, 4), (1, 1)]);
        let ti = detect_target(&g).unwrap();
        assert_eq!((ti.max, ti.target, ti.secondary), (2, 1, 3));
        assert_eq!(ti.v_target, Coord { ring: 1, pos: 1 });
        assert_eq!(ti.up, 1);

        // Two robots at distance 2 on the target ring: v is the middle node.
        let g = grid(&[(2, 0), (2, 1), (2, 2), (2, 4), (1, 0), (1, 2)]);
        let ti = detect_target(&g).unwrap();
        assert_eq!(ti.v_target, Coord { ring: 1, pos: 1 });

        // Occupied secondary ring on both sides: no target.
        let g = grid(&[(2, 0), (2, 1), (2, 2), (1, 1), (3, 4)]);
        assert!(detect_target(&g).is_none());
    }

    #[test]
    fn classify_hand_cases() {
        assert_eq!(classify(&grid(&[(2, 3)])), Label::Gathered);
        assert_eq!(classify(&grid(&[(2, 1), (2, 2)])), Label::Sp4);
        assert_eq!(classify(&grid(&[(2, 1), (2, 2), (2, 3)])), Label::Sp4);
        // sp-3: 3-block on max, middle over v_target.
        assert_eq!(
            classify(&grid(&[(2, 0), (2, 1), (2, 2), (1, 1)])),
            Label::Sp3
        );
        // sp-3: 2.block on max, empty middle over v_target.
        assert_eq!(classify(&grid(&[(2, 0), (2, 2), (1, 1)])), Label::Sp3);
        // sp-2: 5-block centered over v_target.
        assert_eq!(
            classify(&grid(&[(2, 0), (2, 1), (2, 2), (2, 3), (2, 4), (1, 2)])),
            Label::Sp2
        );
        // sp-2: two pairs around the gap over v_target.
        assert_eq!(
            classify(&grid(&[(2, 0), (2, 1), (2, 3), (2, 4), (1, 2)])),
            Label::Sp2
        );
        // sp-2: 3-block plus satellite, gap over v_target.
        assert_eq!(
            classify(&grid(&[(2, 5), (2, 0), (2, 1), (2, 3), (1, 2)])),
            Label::Sp2
        );
        // sp-1: 3-block over 3-block (not C_target: both adjacents occupied
        // is fine, here the light ring has 3 robots).
        assert_eq!(
            classify(&grid(&[(2, 0), (2, 1), (2, 2), (2, 3), (2, 4), (1, 1), (1, 2), (1, 3)])),
            Label::Sp1
        );
        // sp-1 via the 1.block-of-2 pattern (not C_target).
        assert_eq!(
            classify(&grid(&[(2, 1), (2, 2), (2, 3), (1, 2), (1, 3)])),
            Label::Sp1
        );
        // pr: target shape plus a far occupied ring.
        assert_eq!(
            classify(&grid(&[(2, 0), (2, 1), (2, 2), (2, 4), (1, 1), (4, 3)])),
            Label::Pr
        );
        // ls: target shape, everything else empty, max not an sp pattern.
        assert_eq!(
            classify(&grid(&[(2, 0), (2, 1), (2, 2), (2, 4), (1, 1)])),
            Label::Ls
        );
        // not unique: two rings with the max count.
        assert_eq!(
            classify(&grid(&[(0, 0), (0, 2), (2, 1), (2, 4), (3, 0)])),
            Label::NotUnique
        );
        // empty: both adjacents of the unique max empty, far ring occupied.
        assert_eq!(
            classify(&grid(&[(0, 0), (0, 2), (0, 4), (2, 1), (2, 3)])),
            Label::Empty
        );
        // semi-empty: one adjacent empty, the other holding 2 not in a
        // target pattern (distance 3 apart).
        assert_eq!(
            classify(&grid(&[(2, 0), (2, 1), (2, 2), (1, 0), (1, 3)])),
            Label::SemiEmpty
        );
        // oriented-1: lone robot's column pierces the 2.block middle.
        assert_eq!(
            classify(&grid(&[(2, 0), (2, 1), (2, 2), (3, 4), (1, 3), (1, 5)])),
            Label::Oriented1
        );
        // oriented-2: same counts, block not centered on the lone robot.
        assert_eq!(
            classify(&grid(&[(2, 0), (2, 1), (2, 2), (3, 4), (1, 3), (1, 1)])),
            Label::Oriented2
        );
        // semi-oriented: single robot on each adjacent ring.
        assert_eq!(
            classify(&grid(&[(2, 0), (2, 1), (2, 2), (3, 4), (1, 0)])),
            Label::SemiOriented
        );
        // undefined: both adjacents hold more than one robot.
        assert_eq!(
            classify(&grid(&[(2, 0), (2, 1), (2, 2), (3, 4), (3, 1), (1, 0), (1, 3)])),
            Label::Undefined
        );
    }

    #[test]
    fn oriented1_via_block3() {
        let g = grid(&[(2, 0), (2, 1), (2, 2), (2, 3), (3, 1), (1, 0), (1, 1), (1, 2)]);
        assert_eq!(classify(&g), Label::Oriented1);
    }

    #[test]
    fn gamma_blanks_the_right_rings() {
        // Four occupied rings: both adjacents blanked.
        let g = grid(&[(2, 0), (2, 1), (1, 0), (3, 0), (0, 5)]);
        let gg = gamma(&g, 1, 3);
        assert_eq!(gg.occupied_rings(), vec![0, 2]);
        // Three occupied rings: only the first argument blanked.
        let g = grid(&[(2, 0), (2, 1), (1, 0), (1, 3), (3, 0), (3, 2)]);
        let gg = gamma(&g, 3, 1);
        assert_eq!(gg.occupied_rings(), vec![1, 2]);
    }

    #[test]
    fn phase2_labels() {
        for l in [Label::Gathered, Label::Sp1, Label::Sp4, Label::Pr, Label::Ls] {
            assert!(l.is_phase2());
        }
        for l in [Label::NotUnique, Label::Empty, Label::Undefined] {
            assert!(!l.is_phase2());
        }
    }
}

