//! Alignment of one ring's robots against the marked column of another.
//!
//! `align_enabled(g, li, lk)` returns the moves that reshape the robots on
//! `li` into the pattern centered on the column of `lk`'s mark: a 2.block
//! around the column for two robots, a 1.block of 3 or 5 centered on it, or
//! two pairs around the empty column node for four. Only robots on `li`
//! ever move.

use super::{push_move, Enabled, EnabledSet, ProtocolError};
use crate::classify::{
    block3_middle, block5_middle, full_block, single_pos, twin_pairs_gaps, two_at_distance_two,
};
use crate::torus::{blocks, Coord, Grid};

fn node(g: &Grid, ring: u16, base: u16, off: i64) -> Coord {
    Coord::new(ring, g.dims.wrap_pos(base as i64 + off))
}

/// The marked column on `lk`: the occupied node, the empty middle of a
/// 2.block, or the middle of a 1.block of 3.
pub fn mark_column(g: &Grid, lk: u16) -> Option<u16> {
    match g.nb_ring(lk) {
        1 => single_pos(g, lk),
        2 => two_at_distance_two(g, lk),
        3 => block3_middle(g, lk),
        _ => None,
    }
}

fn precondition(g: &Grid, li: u16, lk: u16) -> Result<u16, ProtocolError> {
    let nb_i = g.nb_ring(li);
    let nb_k = g.nb_ring(lk);
    if !(2..=5).contains(&nb_i) || nb_i <= nb_k {
        return Err(ProtocolError::Precondition(format!(
            "align wants 2..=5 robots on the shaped ring and fewer on the marked one, got {nb_i}/{nb_k}"
        )));
    }
    mark_column(g, lk).ok_or_else(|| {
        ProtocolError::Precondition(format!(
            "no mark on ring {lk}: population {nb_k} is not a single node, 2.block or 1.block of 3"
        ))
    })
}

/// The aligned fixpoint: the `li` pattern for its population, centered on
/// the marked column.
pub fn is_aligned(g: &Grid, li: u16, lk: u16) -> bool {
    let Some(t) = mark_column(g, lk) else { return false };
    if g.nb_ring(li) <= g.nb_ring(lk) {
        return false;
    }
    match g.nb_ring(li) {
        2 => two_at_distance_two(g, li) == Some(t),
        3 => block3_middle(g, li) == Some(t),
        4 => twin_pairs_gaps(g, li).contains(&t),
        5 => block5_middle(g, li) == Some(t),
        _ => false,
    }
}

/// First occupied position walking from `start` in direction `dir`,
/// visiting at most `len` nodes.
fn scan(g: &Grid, ring: u16, start: i64, dir: i64, len: u16) -> Option<u16> {
    (0..len as i64)
        .map(|i| g.dims.wrap_pos(start + i * dir))
        .find(|&p| g.occupied(Coord::new(ring, p)))
}

/// One robot per side closes in on the node adjacent to the column: the
/// first robot found walking outward from `t + side` is the side's runner
/// and steps back toward it. With `need_empty` the side only runs while its
/// slot is still free.
fn side_runner(g: &Grid, li: u16, t: u16, side: i64, need_empty: bool) -> Option<Enabled> {
    let slot = node(g, li, t, side);
    if need_empty && g.occupied(slot) {
        return None;
    }
    // Never scan across the column itself: ell - 1 nodes cover everything else.
    let r = scan(g, li, slot.pos as i64, side, g.dims.ell - 1)?;
    if r == slot.pos {
        return None;
    }
    let dest = node(g, li, r, -side);
    (!g.occupied(dest)).then(|| Enabled { from: Coord::new(li, r), dests: vec![dest] })
}

/// Shortest-path first steps from `p` toward `t` on the ring, empty ones only.
fn steps_toward(g: &Grid, li: u16, p: u16, t: u16) -> Vec<Coord> {
    let d = g.dims.pos_dist(p, t);
    let mut out = Vec::new();
    for dir in [1i64, -1] {
        let dest = node(g, li, p, dir);
        if g.dims.pos_dist(dest.pos, t) < d && !g.occupied(dest) {
            out.push(dest);
        }
    }
    out
}

fn empty_ring_neighbors(g: &Grid, li: u16, p: u16) -> Vec<Coord> {
    [1i64, -1]
        .into_iter()
        .map(|dir| node(g, li, p, dir))
        .filter(|&c| !g.occupied(c))
        .collect()
}

/// Robots on `li` at minimal column distance from `t`.
fn closest(g: &Grid, li: u16, t: u16) -> Vec<u16> {
    let ps = g.ring_positions(li);
    let d = ps.iter().map(|&p| g.dims.pos_dist(p, t)).min().unwrap();
    ps.into_iter().filter(|&p| g.dims.pos_dist(p, t) == d).collect()
}

/// Fill the four nodes around the (excluded) column node `t`: on each side
/// the nearest robot takes the adjacent slot, the next one the slot behind
/// it once the near slot is taken. Used for four robots with the column
/// empty, and for the robots beside the column holder when there are five.
fn slot_fill(g: &Grid, li: u16, t: u16) -> EnabledSet {
    let mut rs: Vec<u16> = g.ring_positions(li).into_iter().filter(|&p| p != t).collect();
    rs.sort_by_key(|&p| g.dims.wrap_pos(p as i64 - t as i64));
    debug_assert_eq!(rs.len(), 4);
    let mut out = Vec::new();
    // (robot, slot offset from t, step direction toward its slot, near-slot gate)
    let lanes = [
        (rs[0], 1i64, -1i64, None),
        (rs[1], 2, -1, Some(1i64)),
        (rs[3], -1, 1, None),
        (rs[2], -2, 1, Some(-1)),
    ];
    for (p, slot_off, step, near) in lanes {
        let slot = node(g, li, t, slot_off);
        if g.occupied(slot) || p == slot.pos {
            continue;
        }
        if let Some(off) = near {
            if !g.occupied(node(g, li, t, off)) {
                continue;
            }
        }
        let dest = node(g, li, p, step);
        if !g.occupied(dest) {
            push_move(&mut out, Coord::new(li, p), vec![dest]);
        }
    }
    out
}

/// Occupancy of `li` restricted to the ring, as a sorted position list.
fn ring_occ(g: &Grid, li: u16) -> Vec<u16> {
    g.ring_positions(li)
}

/// Mirror of the ring occupancy about the column `t`.
fn mirror_symmetric(g: &Grid, li: u16, t: u16) -> bool {
    ring_occ(g, li)
        .iter()
        .all(|&p| g.occupied(node(g, li, t, t as i64 - p as i64)))
}

/// The simultaneous symmetric moves for five robots with `t` empty and the
/// tie unbreakable: the extremities of the single 5-block step outside it,
/// or the ends of the centered 3-block step toward their side's singleton.
fn five_symmetric_moves(g: &Grid, li: u16, t: u16) -> Option<EnabledSet> {
    if g.occupied(Coord::new(li, t)) {
        return None;
    }
    if let Some(b) = full_block(g, li, 5) {
        let (e0, e4) = (b[0], b[4]);
        if g.dims.pos_dist(e0, t) == g.dims.pos_dist(e4, t) {
            return Some(vec![
                Enabled { from: Coord::new(li, e0), dests: vec![node(g, li, e0, -1)] },
                Enabled { from: Coord::new(li, e4), dests: vec![node(g, li, e4, 1)] },
            ]);
        }
    }
    if g.nb_ring(li) == 5 && mirror_symmetric(g, li, t) {
        let bs = blocks(g, li, 1);
        let mut sizes: Vec<usize> = bs.iter().map(|b| b.positions.len()).collect();
        sizes.sort();
        if sizes == [1, 1, 3] {
            let b3 = bs.iter().find(|b| b.positions.len() == 3).unwrap();
            let (m1, m2) = (b3.positions[0], b3.positions[2]);
            return Some(vec![
                Enabled { from: Coord::new(li, m1), dests: vec![node(g, li, m1, -1)] },
                Enabled { from: Coord::new(li, m2), dests: vec![node(g, li, m2, 1)] },
            ]);
        }
    }
    None
}

/// After exactly one of a symmetric pair has moved, the laggard is the only
/// robot allowed to move: detected by undoing one step of some robot and
/// checking that the rewound state prescribed that exact step.
fn five_laggard_moves(g: &Grid, li: u16, t: u16) -> Option<EnabledSet> {
    let mut out: EnabledSet = Vec::new();
    for p in ring_occ(g, li) {
        for dir in [1i64, -1] {
            let back = node(g, li, p, dir);
            if g.occupied(back) {
                continue;
            }
            let mut rewound = g.clone();
            rewound.set(Coord::new(li, p), false);
            rewound.set(back, true);
            let Some(moves) = five_symmetric_moves(&rewound, li, t) else { continue };
            if !moves
                .iter()
                .any(|e| e.from == back && e.dests.contains(&Coord::new(li, p)))
            {
                continue;
            }
            for e in moves {
                if e.from == back {
                    continue;
                }
                let dests: Vec<Coord> = e.dests.into_iter().filter(|&d| !g.occupied(d)).collect();
                push_move(&mut out, e.from, dests);
            }
        }
    }
    (!out.is_empty()).then_some(out)
}

pub fn align_enabled(g: &Grid, li: u16, lk: u16) -> Result<EnabledSet, ProtocolError> {
    let t = precondition(g, li, lk)?;
    if is_aligned(g, li, lk) {
        return Ok(Vec::new());
    }
    let u3 = Coord::new(li, t);
    let mut out: EnabledSet = Vec::new();
    match g.nb_ring(li) {
        2 => {
            if g.occupied(u3) {
                let other = ring_occ(g, li).into_iter().find(|&p| p != t).unwrap();
                let (u2, u4) = (node(g, li, t, -1), node(g, li, t, 1));
                let dests = match (g.occupied(u2), g.occupied(u4)) {
                    (false, false) => {
                        let (d2, d4) =
                            (g.dims.pos_dist(other, u2.pos), g.dims.pos_dist(other, u4.pos));
                        match d2.cmp(&d4) {
                            std::cmp::Ordering::Less => vec![u4],
                            std::cmp::Ordering::Greater => vec![u2],
                            std::cmp::Ordering::Equal => vec![u2, u4],
                        }
                    }
                    (false, true) => vec![u2],
                    (true, false) => vec![u4],
                    (true, true) => unreachable!("two robots, one on the column"),
                };
                push_move(&mut out, u3, dests);
            } else {
                for side in [-1i64, 1] {
                    if let Some(e) = side_runner(g, li, t, side, true) {
                        push_move(&mut out, e.from, e.dests);
                    }
                }
            }
        }
        3 => {
            if g.occupied(u3) {
                for side in [-1i64, 1] {
                    if let Some(e) = side_runner(g, li, t, side, false) {
                        push_move(&mut out, e.from, e.dests);
                    }
                }
            } else if let Some(b) = full_block(g, li, 3) {
                // Unbreakable tie: both extremities of the block step outside it.
                if g.dims.pos_dist(b[0], t) == g.dims.pos_dist(b[2], t) {
                    push_move(&mut out, Coord::new(li, b[0]), vec![node(g, li, b[0], -1)]);
                    push_move(&mut out, Coord::new(li, b[2]), vec![node(g, li, b[2], 1)]);
                } else {
                    three_general(g, li, t, &mut out)?;
                }
            } else if let Some((from, dest)) = three_laggard(g, li, t) {
                push_move(&mut out, from, vec![dest]);
            } else {
                three_general(g, li, t, &mut out)?;
            }
        }
        4 => {
            if g.occupied(u3) {
                let (u2, u4) = (node(g, li, t, -1), node(g, li, t, 1));
                match (g.occupied(u2), g.occupied(u4)) {
                    (false, false) => push_move(&mut out, u3, vec![u2, u4]),
                    (false, true) => push_move(&mut out, u3, vec![u2]),
                    (true, false) => push_move(&mut out, u3, vec![u4]),
                    (true, true) => {
                        let (u1, u5) = (node(g, li, t, -2), node(g, li, t, 2));
                        match (g.occupied(u1), g.occupied(u5)) {
                            (false, true) => push_move(&mut out, u2, vec![u1]),
                            (true, false) => push_move(&mut out, u4, vec![u5]),
                            (false, false) => {
                                let lone = ring_occ(g, li)
                                    .into_iter()
                                    .find(|&p| g.dims.pos_dist(p, t) > 1)
                                    .expect("fourth robot off the central block");
                                let (d1, d5) = (
                                    g.dims.pos_dist(lone, u1.pos),
                                    g.dims.pos_dist(lone, u5.pos),
                                );
                                let dests = if d1 == d5 {
                                    empty_ring_neighbors(g, li, lone)
                                } else {
                                    let target = if d1 < d5 { u1.pos } else { u5.pos };
                                    steps_toward(g, li, lone, target)
                                };
                                push_move(&mut out, Coord::new(li, lone), dests);
                            }
                            (true, true) => {
                                unreachable!("five occupied nodes on a ring of four robots")
                            }
                        }
                    }
                }
            } else {
                out = slot_fill(g, li, t);
            }
        }
        5 => {
            if g.occupied(u3) {
                out = slot_fill(g, li, t);
            } else if let Some(m) = five_symmetric_moves(g, li, t) {
                out = m;
            } else if let Some(m) = five_laggard_moves(g, li, t) {
                out = m;
            } else {
                let r = closest(g, li, t);
                match r.as_slice() {
                    [p] => push_move(&mut out, Coord::new(li, *p), steps_toward(g, li, *p, t)),
                    [a, b] => {
                        let mut rs = ring_occ(g, li);
                        rs.sort_by_key(|&p| g.dims.wrap_pos(p as i64 - t as i64));
                        let r3 = rs[2];
                        let (da, db) = (g.dims.pos_dist(*a, r3), g.dims.pos_dist(*b, r3));
                        if da == db {
                            let dests = empty_ring_neighbors(g, li, r3);
                            if dests.is_empty() {
                                return Err(ProtocolError::Unsupported(
                                    "blocked median outside the symmetric special shapes".into(),
                                ));
                            }
                            push_move(&mut out, Coord::new(li, r3), dests);
                        } else {
                            let mover = if da < db { *a } else { *b };
                            push_move(&mut out, Coord::new(li, mover), steps_toward(g, li, mover, t));
                        }
                    }
                    _ => unreachable!("at most two ring positions share a column distance"),
                }
            }
        }
        _ => unreachable!("population checked by the precondition"),
    }
    Ok(out)
}

/// Three robots, column empty, one extremity already stepped out of the
/// block: a 1.block of 2 with the third robot two away and the far
/// extremity one hop further from the column than the detached robot. The
/// far extremity is the only mover, stepping to its free side.
fn three_laggard(g: &Grid, li: u16, t: u16) -> Option<(Coord, Coord)> {
    let bs = blocks(g, li, 1);
    let (b2, lone) = match bs.as_slice() {
        [a, b] if a.positions.len() == 2 && b.positions.len() == 1 => (a, b.positions[0]),
        [a, b] if a.positions.len() == 1 && b.positions.len() == 2 => (b, a.positions[0]),
        _ => return None,
    };
    for (r1, r2) in [(b2.positions[0], b2.positions[1]), (b2.positions[1], b2.positions[0])] {
        // The laggard shape is one move past the symmetric block opposite
        // the slot column, so the pair sits on the far side: the blockmate
        // r2 is strictly farther from the slot than r1. Without this check
        // the shape left behind by the symmetry-breaking sidestep matches
        // too, and undoing that sidestep cycles forever.
        if g.dims.pos_dist(r2, lone) == 2
            && g.dims.pos_dist(r1, t) == g.dims.pos_dist(lone, t) + 1
            && g.dims.pos_dist(r2, t) > g.dims.pos_dist(r1, t)
        {
            let away = if g.dims.wrap_pos(r1 as i64 + 1) == r2 { -1 } else { 1 };
            let dest = node(g, li, r1, away);
            if !g.occupied(dest) {
                return Some((Coord::new(li, r1), dest));
            }
        }
    }
    None
}

fn three_general(g: &Grid, li: u16, t: u16, out: &mut EnabledSet) -> Result<(), ProtocolError> {
    let r = closest(g, li, t);
    match r.as_slice() {
        [p] => push_move(out, Coord::new(li, *p), steps_toward(g, li, *p, t)),
        [a, b] => {
            let third = ring_occ(g, li)
                .into_iter()
                .find(|p| p != a && p != b)
                .expect("three robots on the ring");
            let (da, db) = (g.dims.pos_dist(*a, third), g.dims.pos_dist(*b, third));
            if da == db {
                let dests = empty_ring_neighbors(g, li, third);
                if dests.is_empty() {
                    return Err(ProtocolError::Unsupported(
                        "blocked tiebreaker outside the equidistant block shape".into(),
                    ));
                }
                push_move(out, Coord::new(li, third), dests);
            } else {
                let mover = if da < db { *a } else { *b };
                push_move(out, Coord::new(li, mover), steps_toward(g, li, mover, t));
            }
        }
        _ => unreachable!("at most two ring positions share a column distance"),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::{Coord, Grid, TorusDims};

    fn grid(ell: u16, nodes: &[(u16, u16)]) -> Grid {
        let dims = TorusDims::new(ell, 5, false).unwrap();
        Grid::from_nodes(
            dims,
            &nodes.iter().map(|&(r, p)| Coord::new(r, p)).collect::<Vec<_>>(),
        )
    }

    fn moves(g: &Grid) -> EnabledSet {
        align_enabled(g, 2, 1).unwrap()
    }

    #[test]
    fn rejects_bad_preconditions() {
        // No mark: two adjacent robots on the marked ring.
        let g = grid(6, &[(2, 0), (2, 2), (1, 0), (1, 1)]);
        assert!(matches!(
            align_enabled(&g, 2, 1),
            Err(ProtocolError::Precondition(_))
        ));
        // Population out of range.
        let g = grid(7, &[(2, 0), (1, 3)]);
        assert!(align_enabled(&g, 2, 1).is_err());
    }

    #[test]
    fn aligned_fixpoints_disable_everything() {
        for nodes in [
            [(2u16, 2u16), (2, 4), (1, 3)].as_slice(),   // 2.block around the column
            [(2, 2), (2, 3), (2, 4), (1, 3)].as_slice(),  // centered 1.block of 3
            [(2, 1), (2, 2), (2, 4), (2, 5), (1, 3)].as_slice(), // two pairs around it
            [(2, 1), (2, 2), (2, 3), (2, 4), (2, 5), (1, 3)].as_slice(), // centered 1.block of 5
        ] {
            let g = grid(7, nodes);
            assert!(is_aligned(&g, 2, 1));
            assert!(moves(&g).is_empty());
        }
    }

    #[test]
    fn two_column_holder_picks_the_far_side() {
        // Column holder at (2,3); the other robot nearer to u2=2, so the
        // holder goes to u4=4.
        let g = grid(7, &[(2, 3), (2, 1), (1, 3)]);
        let m = moves(&g);
        assert_eq!(m, vec![Enabled { from: Coord::new(2, 3), dests: vec![Coord::new(2, 4)] }]);
        // Equidistant other robot (needs an even ring): both slots admissible.
        let dims = TorusDims::new(8, 5, false).unwrap();
        let g = Grid::from_nodes(dims, &[Coord::new(2, 3), Coord::new(2, 7), Coord::new(1, 3)]);
        let m = align_enabled(&g, 2, 1).unwrap();
        assert_eq!(m[0].dests, vec![Coord::new(2, 2), Coord::new(2, 4)]);
    }

    #[test]
    fn two_runners_approach_their_slots() {
        let g = grid(7, &[(2, 0), (2, 5), (1, 3)]);
        let m = moves(&g);
        // Robot at 0 runs to u4=4 side? Walking from u2=2 outward (1, 0):
        // first hit is 0, stepping to 1; from u4=4 outward (5): hit 5, step 4.
        assert!(m.contains(&Enabled { from: Coord::new(2, 0), dests: vec![Coord::new(2, 1)] }));
        assert!(m.contains(&Enabled { from: Coord::new(2, 5), dests: vec![Coord::new(2, 4)] }));
    }

    #[test]
    fn three_equidistant_block_spreads() {
        // 1.block 0..2 opposite the column 3 on a 6-ring? Use ell=7, t=3:
        // block {6,0,1}, extremities 6 and 1 at distance 3 and 2: not equal.
        // Take t=0, block {3,4,5} on ell=7: d(3,0)=3, d(5,0)=2. Use ell=8.
        let dims = TorusDims::new(8, 5, false).unwrap();
        let g = Grid::from_nodes(
            dims,
            &[Coord::new(2, 3), Coord::new(2, 4), Coord::new(2, 5), Coord::new(1, 0)],
        );
        let m = align_enabled(&g, 2, 1).unwrap();
        assert!(m.contains(&Enabled { from: Coord::new(2, 3), dests: vec![Coord::new(2, 2)] }));
        assert!(m.contains(&Enabled { from: Coord::new(2, 5), dests: vec![Coord::new(2, 6)] }));
    }

    #[test]
    fn three_laggard_resumes_the_pair() {
        // From block {3,4,5} with t=0 (ell=8), extremity 5 moved to 6:
        // now {3,4} + lone 6, dist(3,t)=3 = dist(6,t)+1: robot 3 moves to 2.
        let dims = TorusDims::new(8, 5, false).unwrap();
        let g = Grid::from_nodes(
            dims,
            &[Coord::new(2, 3), Coord::new(2, 4), Coord::new(2, 6), Coord::new(1, 0)],
        );
        let m = align_enabled(&g, 2, 1).unwrap();
        assert_eq!(m, vec![Enabled { from: Coord::new(2, 3), dests: vec![Coord::new(2, 2)] }]);
    }

    #[test]
    fn three_unique_closest_advances() {
        let g = grid(7, &[(2, 1), (2, 5), (2, 4), (1, 3)]);
        // Distances to t=3: 2, 2, 1 -> unique closest at 4... but 4 adjacent
        // to 3: it moves to 3? 4 -> 3 is the step toward t.
        let m = moves(&g);
        assert_eq!(m, vec![Enabled { from: Coord::new(2, 4), dests: vec![Coord::new(2, 3)] }]);
    }

    #[test]
    fn four_column_holder_evicted_first() {
        let g = grid(7, &[(2, 3), (2, 0), (2, 1), (2, 5), (1, 3)]);
        // t=3 occupied, u2=2 and u4=4 both empty: adversary choice.
        let m = moves(&g);
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].from, Coord::new(2, 3));
        assert_eq!(m[0].dests, vec![Coord::new(2, 2), Coord::new(2, 4)]);
    }

    #[test]
    fn four_central_block_pushes_outward() {
        // u2,u3,u4 = 2,3,4 occupied, u1=1 empty, u5=5 occupied: the robot
        // on u2 moves out to u1.
        let g = grid(7, &[(2, 2), (2, 3), (2, 4), (2, 5), (1, 3)]);
        let m = moves(&g);
        assert_eq!(m, vec![Enabled { from: Coord::new(2, 2), dests: vec![Coord::new(2, 1)] }]);
    }

    #[test]
    fn four_slot_fill_orders_by_side() {
        // t=3 empty; robots at 4 (near+ slot done), 6, 1, 2 on ell=7.
        // Slots: u4=4 (occupied), u5=5 (next + robot 6 steps in), u2=2
        // (occupied), u1=1 (occupied).
        let g = grid(7, &[(2, 4), (2, 6), (2, 1), (2, 2), (1, 3)]);
        let m = moves(&g);
        assert_eq!(m, vec![Enabled { from: Coord::new(2, 6), dests: vec![Coord::new(2, 5)] }]);
    }

    #[test]
    fn five_block_tie_spreads_both_extremities() {
        // ell=9, t=0: block {2..6}: extremities 2 and 6, both at distance 2...
        // d(2,0)=2, d(6,0)=3. Center the block on the antipode: block {2..6}
        // has middle 4; antipode-ish for ell=9, t=0 gives equal distances
        // for extremities of block {3..7}? d(3,0)=3, d(7,0)=2. ell=9 odd has
        // no symmetric placement; use ell=8, block {2..6}: d(2,0)=2, d(6,0)=2.
        let dims = TorusDims::new(8, 5, false).unwrap();
        let mut nodes: Vec<Coord> = (2..=6).map(|p| Coord::new(2, p)).collect();
        nodes.push(Coord::new(1, 0));
        let g = Grid::from_nodes(dims, &nodes);
        let m = align_enabled(&g, 2, 1).unwrap();
        assert!(m.contains(&Enabled { from: Coord::new(2, 2), dests: vec![Coord::new(2, 1)] }));
        assert!(m.contains(&Enabled { from: Coord::new(2, 6), dests: vec![Coord::new(2, 7)] }));
    }

    #[test]
    fn five_laggard_completes_the_spread() {
        // One extremity already moved: {1,3,4,5,6} on ell=8, t=0: rewinding
        // 1 -> 2 restores the tied block, so 6 is the laggard moving to 7.
        let dims = TorusDims::new(8, 5, false).unwrap();
        let nodes: Vec<Coord> = [1u16, 3, 4, 5, 6]
            .iter()
            .map(|&p| Coord::new(2, p))
            .chain([Coord::new(1, 0)])
            .collect();
        let g = Grid::from_nodes(dims, &nodes);
        let m = align_enabled(&g, 2, 1).unwrap();
        assert_eq!(m, vec![Enabled { from: Coord::new(2, 6), dests: vec![Coord::new(2, 7)] }]);
    }

    #[test]
    fn five_centered_triple_with_singletons_spreads() {
        // ell=8, t=0: 3-block {3,4,5} centered on the antipode, singletons
        // {1,7} symmetric: the block ends move toward their singletons.
        let dims = TorusDims::new(8, 5, false).unwrap();
        let nodes: Vec<Coord> = [1u16, 3, 4, 5, 7]
            .iter()
            .map(|&p| Coord::new(2, p))
            .chain([Coord::new(1, 0)])
            .collect();
        let g = Grid::from_nodes(dims, &nodes);
        let m = align_enabled(&g, 2, 1).unwrap();
        assert!(m.contains(&Enabled { from: Coord::new(2, 3), dests: vec![Coord::new(2, 2)] }));
        assert!(m.contains(&Enabled { from: Coord::new(2, 5), dests: vec![Coord::new(2, 6)] }));
    }

    #[test]
    fn five_column_holder_triggers_slot_fill() {
        // t=3 occupied, others at 4, 2, 6, 0 on ell=7: near slots 4 and 2
        // taken, far slots 5 and 1 get their runners (6 -> 5, 0 -> 1).
        let g = grid(7, &[(2, 3), (2, 4), (2, 2), (2, 6), (2, 0), (1, 3)]);
        let m = moves(&g);
        assert!(m.contains(&Enabled { from: Coord::new(2, 6), dests: vec![Coord::new(2, 5)] }));
        assert!(m.contains(&Enabled { from: Coord::new(2, 0), dests: vec![Coord::new(2, 1)] }));
        assert_eq!(m.len(), 2);
    }
}
