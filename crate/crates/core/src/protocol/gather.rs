//! Gathering phase: the target pattern exists and the robots collapse onto
//! a single node, going through the special shapes sp-1 to sp-4.

use super::{push_move, EnabledSet, MultKnowledge, ProtocolError};
use crate::classify::{block3_middle, detect_target, sp1_anchor, Label};
use crate::torus::{neighbor_ring, Coord, Grid};

pub fn gathering_enabled(
    g: &Grid,
    label: Label,
    mult: MultKnowledge,
) -> Result<EnabledSet, ProtocolError> {
    match label {
        Label::Pr => partial(g),
        Label::Ls => last_stretch(g),
        Label::Sp1 => sp1(g),
        Label::Sp2 => sp2(g),
        Label::Sp3 => sp3(g),
        Label::Sp4 => sp4(g, mult),
        other => Err(ProtocolError::Precondition(format!(
            "{} is not a gathering-phase class",
            other.name()
        ))),
    }
}

fn robots_on(g: &Grid, ring: u16) -> Vec<Coord> {
    g.ring_positions(ring).into_iter().map(|p| Coord::new(ring, p)).collect()
}

/// First steps of the shortest on-ring paths from `from` to column `to`.
fn ring_steps(g: &Grid, ring: u16, from: u16, to: u16, gate: bool) -> Vec<Coord> {
    let d = g.dims.pos_dist(from, to);
    let mut out = Vec::new();
    for dir in [1i64, -1] {
        let dest = Coord::new(ring, g.dims.wrap_pos(from as i64 + dir));
        if g.dims.pos_dist(dest.pos, to) < d && (!gate || !g.occupied(dest)) {
            out.push(dest);
        }
    }
    out
}

/// Rings besides the maximal and target ones still hold robots: they climb
/// toward the maximal ring, around the side away from the target ring.
/// That detour keeps the target node a lone witness until the very end, and
/// any pile-up among climbers just rides the same path into the funnel.
fn partial(g: &Grid) -> Result<EnabledSet, ProtocolError> {
    let ti = detect_target(g).expect("class requires the target pattern");
    let mut out: EnabledSet = Vec::new();
    for r in g.occupied_rings() {
        if r == ti.max || r == ti.target {
            continue;
        }
        let mut dir = 1i64;
        let mut probe = r;
        loop {
            probe = g.dims.wrap_ring(probe as i64 + 1);
            if probe == ti.max {
                break;
            }
            if probe == ti.target {
                dir = -1;
                break;
            }
        }
        for c in robots_on(g, r) {
            push_move(&mut out, c, vec![c.step_ring(&g.dims, dir)]);
        }
    }
    Ok(out)
}

/// Only the maximal and target rings are occupied: funnel the maximal ring
/// onto the column of the target node.
///
/// Every robot on the maximal ring walks toward that column, joins included.
/// Routing all merges through the one anchor keeps stale moves harmless: a
/// collision only grows a group that was headed for the anchor anyway, so no
/// second tower can form away from it.
fn last_stretch(g: &Grid) -> Result<EnabledSet, ProtocolError> {
    let ti = detect_target(g).expect("class requires the target pattern");
    let m = ti.max;
    let vp = ti.v_target.pos;
    let mut out: EnabledSet = Vec::new();
    for c in robots_on(g, m) {
        if c.pos != vp {
            push_move(&mut out, c, ring_steps(g, m, c.pos, vp, false));
        }
    }
    Ok(out)
}

/// Two adjacent occupied rings in the final shape: the light ring's robots
/// climb straight up to the heavy ring, except the one on the anchor
/// column, which stays behind. That robot is the lone witness the two-node
/// endgame needs: it joins last, after the heavy ring has funneled onto the
/// anchor, so the final pair is always a tower plus a single robot. Walking
/// the light ring sideways instead would stack its robots under the anchor
/// and the run could end with two towers facing each other, which no local
/// rule can break.
fn sp1(g: &Grid) -> Result<EnabledSet, ProtocolError> {
    let (li, lj, u) = sp1_anchor(g).expect("class requires the sp-1 anchor");
    let mut out: EnabledSet = Vec::new();
    for c in robots_on(g, lj) {
        if c.pos != u {
            push_move(&mut out, c, vec![Coord::new(li, c.pos)]);
        }
    }
    Ok(out)
}

/// The near-final shapes (twin pairs, triple plus satellite, five-block)
/// walk the same funnel as the last stretch. Giving these shapes their own
/// meeting points would race against funnel walkers computed one snapshot
/// earlier and pile robots off the anchor column.
fn sp2(g: &Grid) -> Result<EnabledSet, ProtocolError> {
    last_stretch(g)
}

/// Triple over the target node: funnel too. The target robot does not
/// climb while its ring neighbors above still span several nodes; it waits
/// as the endgame witness and joins once only the anchor node is left.
fn sp3(g: &Grid) -> Result<EnabledSet, ProtocolError> {
    last_stretch(g)
}

/// Single occupied ring, two or three nodes in a block: fold onto one node.
fn sp4(g: &Grid, mult: MultKnowledge) -> Result<EnabledSet, ProtocolError> {
    let ring = g.occupied_rings()[0];
    let ps = g.ring_positions(ring);
    let mut out: EnabledSet = Vec::new();
    if ps.len() == 3 {
        let mid = block3_middle(g, ring).expect("class requires a block");
        for c in robots_on(g, ring).into_iter().filter(|c| c.pos != mid) {
            push_move(&mut out, c, vec![Coord::new(ring, mid)]);
        }
        return Ok(out);
    }
    // Two occupied nodes, one of them a tower: robots not part of a tower
    // walk toward the other node (straight onto it when adjacent).
    let [a, b] = [Coord::new(ring, ps[0]), Coord::new(ring, ps[1])];
    for (c, other) in [(a, b), (b, a)] {
        if mult.get(c) != Some(true) {
            let dests = if g.dims.pos_dist(c.pos, other.pos) == 1 {
                vec![other]
            } else {
                ring_steps(g, ring, c.pos, other.pos, false)
            };
            push_move(&mut out, c, dests);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::classify;
    use crate::torus::TorusDims;

    fn oracle_none(_: Coord) -> bool {
        false
    }

    fn grid(nodes: &[(u16, u16)]) -> Grid {
        let dims = TorusDims::new(6, 5, false).unwrap();
        Grid::from_nodes(
            dims,
            &nodes.iter().map(|&(r, p)| Coord::new(r, p)).collect::<Vec<_>>(),
        )
    }

    fn gather(g: &Grid) -> EnabledSet {
        let label = classify(g);
        gathering_enabled(g, label, MultKnowledge::Oracle(&oracle_none)).unwrap()
    }

    #[test]
    fn partial_robot_under_target_climbs() {
        // Max ring 2, target ring 1 (single robot at 0), secondary ring 3
        // empty, partial robot right below the target node on ring 0.
        let g = grid(&[(2, 0), (2, 1), (2, 5), (2, 3), (1, 0), (0, 0), (0, 2)]);
        assert_eq!(classify(&g), Label::Pr);
        let m = gather(&g);
        assert_eq!(m, vec![Enabled { from: Coord::new(0, 0), dests: vec![Coord::new(1, 0)] }]);
    }

    #[test]
    fn partial_ring_walks_toward_target_column() {
        // Same shape but the adjacent ring's robots sit off the column.
        let g = grid(&[(2, 0), (2, 1), (2, 5), (2, 3), (1, 0), (0, 2)]);
        assert_eq!(classify(&g), Label::Pr);
        let m = gather(&g);
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].from, Coord::new(0, 2));
        assert_eq!(m[0].dests, vec![Coord::new(0, 1)]);
    }

    #[test]
    fn partial_far_ring_steps_up() {
        // Ring adjacent to the target is empty; the feeder sits two rings
        // out and steps toward the target ring.
        let g = grid(&[(2, 0), (2, 1), (2, 5), (2, 3), (1, 0), (4, 2)]);
        assert_eq!(classify(&g), Label::Pr);
        let m = gather(&g);
        assert_eq!(m, vec![Enabled { from: Coord::new(4, 2), dests: vec![Coord::new(0, 2)] }]);
    }

    #[test]
    fn last_stretch_small_max_aligns() {
        // Max ring 2 holds 4, target single at (1,0): Align(2, 1) runs.
        let g = grid(&[(2, 1), (2, 2), (2, 3), (2, 4), (1, 0)]);
        assert_eq!(classify(&g), Label::Ls);
        let m = gather(&g);
        assert!(!m.is_empty());
        assert!(m.iter().all(|e| e.from.ring == 2));
    }

    #[test]
    fn last_stretch_funnel_closest_pair() {
        // Max ring full except column 0; target single at (1,0): the two
        // hole borders converge on u3 = (2,0).
        let g = grid(&[(2, 1), (2, 2), (2, 3), (2, 4), (2, 5), (2, 0), (1, 0)]);
        // u3 occupied with two occupied neighbors: its robots drop to the
        // target node.
        assert_eq!(classify(&g), Label::Ls);
        let m = gather(&g);
        assert_eq!(m, vec![Enabled { from: Coord::new(2, 0), dests: vec![Coord::new(1, 0)] }]);
    }

    #[test]
    fn sp1_light_pair_stacks_on_the_anchor_column() {
        // Max ring 2 with a centered triple, target pair at distance 2
        // below on ring 1: both light robots converge on (1, 0).
        let g = grid(&[(2, 5), (2, 0), (2, 1), (1, 5), (1, 1)]);
        assert_eq!(classify(&g), Label::Sp1);
        let m = gather(&g);
        assert_eq!(m.len(), 2);
        for e in &m {
            assert_eq!(e.from.ring, 1);
            assert_ne!(e.from.pos, 0);
            assert_eq!(e.dests, vec![Coord::new(1, 0)]);
        }
    }

    #[test]
    fn sp2_twin_pairs_close_the_gap() {
        // Twin pairs on max ring 2 around column 0, target single at (1,0).
        let g = grid(&[(2, 1), (2, 2), (2, 4), (2, 5), (1, 0)]);
        assert_eq!(classify(&g), Label::Sp2);
        let m = gather(&g);
        assert_eq!(m.len(), 2);
        for e in &m {
            assert_eq!(e.dests, vec![Coord::new(2, 0)]);
        }
    }

    #[test]
    fn sp3_target_robot_climbs_to_tower() {
        // Centered triple on max ring 2, target single at (1,0).
        let g = grid(&[(2, 5), (2, 0), (2, 1), (1, 0)]);
        assert_eq!(classify(&g), Label::Sp3);
        let m = gather(&g);
        assert_eq!(m, vec![Enabled { from: Coord::new(1, 0), dests: vec![Coord::new(2, 0)] }]);
    }

    #[test]
    fn sp4_triple_folds_onto_middle() {
        let g = grid(&[(2, 5), (2, 0), (2, 1)]);
        assert_eq!(classify(&g), Label::Sp4);
        let m = gather(&g);
        assert_eq!(m.len(), 2);
        for e in &m {
            assert_eq!(e.dests, vec![Coord::new(2, 0)]);
        }
    }

    #[test]
    fn sp4_pair_lone_robot_joins_tower() {
        let g = grid(&[(2, 0), (2, 1)]);
        assert_eq!(classify(&g), Label::Sp4);
        let tower = |c: Coord| c == Coord::new(2, 1);
        let m = gathering_enabled(&g, Label::Sp4, MultKnowledge::Oracle(&tower)).unwrap();
        assert_eq!(m, vec![Enabled { from: Coord::new(2, 0), dests: vec![Coord::new(2, 1)] }]);
    }
}
