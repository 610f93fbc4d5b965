//! Preparation phase: from an arbitrary rigid configuration to one with a
//! unique maximal ring whose neighborhood matches the target pattern.
//!
//! While several maximal rings exist the population of exactly one of them
//! is changed per step. Once the maximal ring is unique, the moves are
//! driven by the populations of its two adjacent rings; the heaviest
//! machinery (the `gamma` ladders) only serves to pick one robot or node in
//! a way every observer agrees on.

use super::align::align_enabled;
use super::{push_move, Enabled, EnabledSet, MultKnowledge, ProtocolError};
use crate::classify::{
    full_block, gamma, is_periodic, is_rigid, pos_axes, ring_axes, single_pos, unique_max, Label,
};
use crate::torus::{dist, maximal_rings, neighbor_ring, Coord, Grid};
use crate::view::{elect_largest_view, node_view_key};

pub fn preparation_enabled(
    g: &Grid,
    label: Label,
    mult: MultKnowledge,
) -> Result<EnabledSet, ProtocolError> {
    match label {
        Label::NotUnique => not_unique(g),
        Label::Empty => empty_adjacents(g, mult),
        Label::SemiEmpty => semi_empty(g),
        Label::Oriented1 => oriented1(g),
        Label::Oriented2 => oriented2(g),
        Label::SemiOriented => semi_oriented(g),
        Label::Undefined => undefined(g, mult),
        other => Err(ProtocolError::Precondition(format!(
            "{} is not a preparation-phase class",
            other.name()
        ))),
    }
}

fn elect(g: &Grid, cands: &[Coord]) -> Result<Coord, ProtocolError> {
    match cands {
        [] => Err(ProtocolError::Unsupported("no candidate to elect".into())),
        [c] => Ok(*c),
        _ => elect_largest_view(g, cands)
            .map_err(|e| ProtocolError::Unsupported(format!("election failed: {e}"))),
    }
}

fn move_node(g: &Grid, from: Coord, to: Coord) -> Grid {
    let mut out = g.clone();
    out.set(from, false);
    out.set(to, true);
    out
}

/// Shortest-path first steps along a ring from `from` to the column `to`;
/// both directions on a tie. `gate` drops occupied destinations.
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

/// Ring-coordinate directions that shorten the distance from ring `from`
/// to ring `to`.
fn ring_dirs(g: &Grid, from: u16, to: u16) -> Vec<i64> {
    let d = g.dims.ring_dist(from, to);
    [1i64, -1]
        .into_iter()
        .filter(|&dir| g.dims.ring_dist(g.dims.wrap_ring(from as i64 + dir), to) < d)
        .collect()
}

fn robots_on(g: &Grid, ring: u16) -> Vec<Coord> {
    g.ring_positions(ring).into_iter().map(|p| Coord::new(ring, p)).collect()
}

fn empty_pos_neighbors(g: &Grid, c: Coord) -> Vec<Coord> {
    [1i64, -1]
        .into_iter()
        .map(|d| c.step_pos(&g.dims, d))
        .filter(|&n| !g.occupied(n))
        .collect()
}

/// No unique maximal ring yet: thin one of them out, keeping the
/// configuration view-rigid.
fn not_unique(g: &Grid) -> Result<EnabledSet, ProtocolError> {
    let (nbmax, maxes) = maximal_rings(g);
    if nbmax == g.dims.ell {
        // Full maximal rings: one robot steps onto its on-ring neighbor,
        // stacking two robots and vacating a node. Only moves that leave
        // the occupancy view-rigid are admissible.
        let mut cands: Vec<Enabled> = Vec::new();
        for &ring in &maxes {
            for r in robots_on(g, ring) {
                let mut dests = Vec::new();
                for dir in [1i64, -1] {
                    let dest = r.step_pos(&g.dims, dir);
                    let mut g2 = g.clone();
                    g2.set(r, false);
                    if is_rigid(&g2) {
                        dests.push(dest);
                    }
                }
                push_move(&mut cands, r, dests);
            }
        }
        let froms: Vec<Coord> = cands.iter().map(|e| e.from).collect();
        let w = elect(g, &froms)?;
        return Ok(cands.into_iter().filter(|e| e.from == w).collect());
    }
    let occupied_rings = g.occupied_rings();
    if occupied_rings.len() == 2 {
        // Two occupied rings, both maximal: one robot leaves onto an empty
        // ring to break the tie.
        let mut cands: Vec<Enabled> = Vec::new();
        for &ring in &occupied_rings {
            for r in robots_on(g, ring) {
                let dests: Vec<Coord> = [1i64, -1]
                    .into_iter()
                    .map(|d| r.step_ring(&g.dims, d))
                    .filter(|n| g.nb_ring(n.ring) == 0)
                    .collect();
                push_move(&mut cands, r, dests);
            }
        }
        let froms: Vec<Coord> = cands.iter().map(|e| e.from).collect();
        let w = elect(g, &froms)?;
        return Ok(cands.into_iter().filter(|e| e.from == w).collect());
    }
    // More than two occupied rings: the robot closest to an empty node on a
    // maximal ring walks there, with repairs when its step would create a
    // symmetric occupancy.
    let empties: Vec<Coord> = maxes
        .iter()
        .flat_map(|&ring| (0..g.dims.ell).map(move |p| Coord::new(ring, p)))
        .filter(|&c| !g.occupied(c))
        .collect();
    let closest_empty = |r: Coord| -> (u16, Coord) {
        // A robot filling an empty node of its own maximal ring vacates
        // another node of that ring, so the ring counts never change; only
        // cross-ring joins shrink the set of maximal rings.
        empties
            .iter()
            .filter(|&&u| u.ring != r.ring)
            .map(|&u| (dist(&g.dims, r, u), u))
            .min_by(|a, b| {
                a.0.cmp(&b.0)
                    .then_with(|| node_view_key(g, b.1).cmp(&node_view_key(g, a.1)))
                    .then_with(|| (a.1.ring, a.1.pos).cmp(&(b.1.ring, b.1.pos)))
            })
            .unwrap()
    };
    let robots = g.occupied_nodes();
    let best = robots.iter().map(|&r| closest_empty(r).0).min().unwrap();
    let set: Vec<Coord> = robots.into_iter().filter(|&r| closest_empty(r).0 == best).collect();
    let r = elect(g, &set)?;
    let u = closest_empty(r).1;
    let steps: Vec<Coord> = crate::torus::neighbors(&g.dims, r)
        .into_iter()
        .filter(|&n| !g.occupied(n) && dist(&g.dims, n, u) < dist(&g.dims, r, u))
        .collect();
    let rigid_steps: Vec<Coord> =
        steps.iter().copied().filter(|&s| is_rigid(&move_node(g, r, s))).collect();
    if !rigid_steps.is_empty() {
        return Ok(vec![Enabled { from: r, dests: rigid_steps }]);
    }
    if steps.contains(&u) {
        return join_u_repair(g, r, u);
    }
    if let Some(&s) = steps.iter().find(|s| s.pos == u.pos) {
        // The step would land the walker on u's column for the first time:
        // instead the robot already on u's ring in the walker's column
        // fills u directly.
        let _ = s;
        let filler = Coord::new(u.ring, r.pos);
        if !g.occupied(filler) {
            return Err(ProtocolError::Unsupported(
                "no column partner for the symmetric column join".into(),
            ));
        }
        return Ok(vec![Enabled { from: filler, dests: vec![u] }]);
    }
    Err(ProtocolError::Unsupported(
        "symmetric step outside the two repairable shapes".into(),
    ))
}

/// The walker's final step onto `u` would make the occupancy symmetric:
/// another robot moves first, chosen from the would-be configuration.
/// Drop destinations whose occupancy after the move is not view-rigid, and
/// candidates left without any. The tie-breaking repairs below all promise
/// to keep the configuration rigid, so only such moves may be offered.
fn keep_rigid(g: &Grid, cands: Vec<Enabled>) -> Vec<Enabled> {
    cands
        .into_iter()
        .filter_map(|e| {
            let dests: Vec<Coord> = e
                .dests
                .into_iter()
                .filter(|&d| is_rigid(&move_node(g, e.from, d)))
                .collect();
            (!dests.is_empty()).then_some(Enabled { from: e.from, dests })
        })
        .collect()
}

fn join_u_repair(g: &Grid, r: Coord, u: Coord) -> Result<EnabledSet, ProtocolError> {
    let g2 = move_node(g, r, u);
    if g2.occupied_rings().len() == 2 {
        let (_, maxes) = maximal_rings(g);
        let mut cands: Vec<Enabled> = Vec::new();
        for &ring in &maxes {
            for rb in robots_on(g, ring) {
                let dests: Vec<Coord> = [1i64, -1]
                    .into_iter()
                    .map(|d| rb.step_ring(&g.dims, d))
                    .filter(|n| g.nb_ring(n.ring) == 0)
                    .collect();
                push_move(&mut cands, rb, dests);
            }
        }
        let cands = keep_rigid(g, cands);
        let froms: Vec<Coord> = cands.iter().map(|e| e.from).collect();
        let w = elect(g, &froms)?;
        return Ok(cands.into_iter().filter(|e| e.from == w).collect());
    }
    let (m2, _, _) = unique_max(&g2)
        .ok_or_else(|| ProtocolError::Unsupported("no unique maximal ring after join".into()))?;
    // Axis along the new maximal ring: the two rings that were maximal
    // before the join mirror each other through it; empty one sideways.
    // A ring reflection with doubled anchor a2 fixes the rings r with
    // 2r = a2 (mod L): exactly one for odd L, two or none for even L.
    let on_max_axis = ring_axes(&g2)
        .iter()
        .any(|&a2| (2 * m2) % g.dims.big_l == a2 % g.dims.big_l);
    if on_max_axis {
        let (_, maxes) = maximal_rings(g);
        let mut cands: Vec<Enabled> = Vec::new();
        for &ring in &maxes {
            if ring == m2 {
                continue;
            }
            for rb in robots_on(g, ring) {
                push_move(&mut cands, rb, empty_pos_neighbors(g, rb));
            }
        }
        let cands = keep_rigid(g, cands);
        let froms: Vec<Coord> = cands.iter().map(|e| e.from).collect();
        let w = elect(g, &froms)?;
        return Ok(cands.into_iter().filter(|e| e.from == w).collect());
    }
    if !pos_axes(&g2).is_empty() {
        // Axis perpendicular to the new maximal ring. Work on the occupied
        // rings other than u's: a ring whose shape is not two 1.blocks with
        // single-node gaps feeds its biggest block; otherwise any robot
        // with an empty on-ring neighbor steps aside.
        let t_rings: Vec<u16> =
            g.occupied_rings().into_iter().filter(|&x| x != u.ring).collect();
        let two_blocks_single_gaps = |ring: u16| -> bool {
            let bs = crate::torus::blocks(g, ring, 1);
            bs.len() == 2 && g.nb_ring(ring) == g.dims.ell - 2
        };
        let mut cands: Vec<Enabled> = Vec::new();
        for &ring in t_rings.iter().filter(|&&x| !two_blocks_single_gaps(x)) {
            let bs = crate::torus::blocks(g, ring, 1);
            let bmax = bs.iter().map(|b| b.positions.len()).max().unwrap_or(0);
            for b in bs.iter().filter(|b| b.positions.len() == bmax) {
                let gap_dist = |p: u16| {
                    b.positions.iter().map(|&q| g.dims.pos_dist(p, q)).min().unwrap()
                };
                let outside: Vec<u16> = g
                    .ring_positions(ring)
                    .into_iter()
                    .filter(|p| !b.positions.contains(p))
                    .collect();
                let Some(dmin) = outside.iter().map(|&p| gap_dist(p)).min() else { continue };
                for &p in outside.iter().filter(|&&p| gap_dist(p) == dmin) {
                    let target = *b
                        .positions
                        .iter()
                        .min_by_key(|&&q| g.dims.pos_dist(p, q))
                        .unwrap();
                    push_move(&mut cands, Coord::new(ring, p), ring_steps(g, ring, p, target, true));
                }
            }
        }
        if cands.is_empty() {
            for &ring in &t_rings {
                for rb in robots_on(g, ring) {
                    push_move(&mut cands, rb, empty_pos_neighbors(g, rb));
                }
            }
        }
        let cands = keep_rigid(g, cands);
        let froms: Vec<Coord> = cands.iter().map(|e| e.from).collect();
        let w = elect(g, &froms)?;
        return Ok(cands.into_iter().filter(|e| e.from == w).collect());
    }
    Err(ProtocolError::Unsupported(
        "join repair reached without an axis in the joined occupancy".into(),
    ))
}

/// Both adjacent rings of the maximal ring are empty: feed them from the
/// rest of the torus, or leave a lone occupied ring sideways.
fn empty_adjacents(g: &Grid, mult: MultKnowledge) -> Result<EnabledSet, ProtocolError> {
    let (m, li, lk) = unique_max(g).expect("class requires a unique maximal ring");
    if g.occupied_rings() == vec![m] {
        return single_ring_fold(g, m, mult);
    }
    let off: Vec<Coord> =
        g.occupied_nodes().into_iter().filter(|c| c.ring != m).collect();
    let rd = |c: &Coord| g.dims.ring_dist(c.ring, li).min(g.dims.ring_dist(c.ring, lk));
    let best = off.iter().map(rd).min().unwrap();
    let set: Vec<Coord> = off.into_iter().filter(|c| rd(c) == best).collect();
    let r = elect(g, &set)?;
    let mut dests = Vec::new();
    for target in [li, lk] {
        if g.dims.ring_dist(r.ring, target) != best {
            continue;
        }
        for dir in ring_dirs(g, r.ring, target) {
            let dest = r.step_ring(&g.dims, dir);
            if !g.occupied(dest) && !dests.contains(&dest) {
                dests.push(dest);
            }
        }
    }
    Ok(vec![Enabled { from: r, dests }])
}

/// The whole population sits on one ring. A clean start could leave the
/// ring to begin building elsewhere, but this shape also appears mid-run
/// with stacks the observers cannot see, and a stack offered two directions
/// can be torn apart by the scheduler. Staying on the ring avoids that:
/// a full block folds its ends inward (unique destinations, stacks travel
/// intact), anything else walks an elected robot from a shortest run of
/// consecutive occupied nodes toward the rest.
fn single_ring_fold(g: &Grid, m: u16, mult: MultKnowledge) -> Result<EnabledSet, ProtocolError> {
    let n = g.nb_ring(m);
    if let Some(block) = full_block(g, m, n) {
        let (first, last) = (block[0], block[n as usize - 1]);
        let mut out = Vec::new();
        for (end, dir) in [(first, 1i64), (last, -1)] {
            let from = Coord::new(m, end);
            push_move(&mut out, from, vec![from.step_pos(&g.dims, dir)]);
        }
        return Ok(out);
    }
    // Distance from w, walking dir, to the first occupied node past a gap.
    let reach = |w: Coord, dir: i64| {
        let mut gap_seen = false;
        for d in 1..g.dims.ell {
            let q = Coord::new(m, g.dims.wrap_pos(w.pos as i64 + dir * d as i64));
            match (g.occupied(q), gap_seen) {
                (true, true) => return Some(d),
                (true, false) => {}
                (false, _) => gap_seen = true,
            }
        }
        None
    };
    let run = |c: &Coord| {
        let mut len = 1u16;
        for dir in [1i64, -1] {
            let mut p = *c;
            while len < g.dims.ell {
                p = p.step_pos(&g.dims, dir);
                if !g.occupied(p) {
                    break;
                }
                len += 1;
            }
        }
        len
    };
    let nodes = g.occupied_nodes();
    let shortest = nodes.iter().map(run).min().unwrap();
    let set: Vec<Coord> = nodes.into_iter().filter(|c| run(c) == shortest).collect();
    // All candidates sharing the largest view walk, not just one: a view
    // tie here means mirror twins, and both walking toward their nearest
    // neighbor converges on the reflection's fixed node.
    let top = set.iter().map(|&c| node_view_key(g, c)).max().unwrap();
    let mut out = Vec::new();
    for w in set.into_iter().filter(|&c| node_view_key(g, c) == top) {
        if mult.get(w) == Some(true) {
            // A stack stays put: its robots cannot agree on a side.
            continue;
        }
        let best = [1i64, -1].into_iter().filter_map(|d| reach(w, d)).min().unwrap();
        let dests: Vec<Coord> = [1i64, -1]
            .into_iter()
            .filter(|&d| reach(w, d) == Some(best))
            .map(|d| w.step_pos(&g.dims, d))
            .collect();
        push_move(&mut out, w, dests);
    }
    Ok(out)
}

/// One adjacent ring empty, the other holding two or more robots.
fn semi_empty(g: &Grid) -> Result<EnabledSet, ProtocolError> {
    let (m, a, b) = unique_max(g).expect("class requires a unique maximal ring");
    let (li, lk) = if g.nb_ring(a) == 0 { (a, b) } else { (b, a) };
    let nbk = g.nb_ring(lk);
    let up: i64 = if g.dims.wrap_ring(m as i64 + 1) == lk { 1 } else { -1 };
    if nbk != 3 {
        // Pull the occupied ring nearest to the empty adjacent (scanning
        // away from the maximal ring) one step toward it.
        let ln = neighbor_ring(g, li, -up).expect("some ring is occupied");
        let w = elect(g, &robots_on(g, ln))?;
        let dest = w.step_ring(&g.dims, up);
        if g.occupied(dest) {
            return Err(ProtocolError::Unsupported(
                "occupied corridor between the feeding ring and the empty adjacent".into(),
            ));
        }
        return Ok(vec![Enabled { from: w, dests: vec![dest] }]);
    }
    // Three robots on the occupied adjacent: squeeze them into a 1.block.
    let ps = g.ring_positions(lk);
    let gaps: Vec<u16> =
        (0..3).map(|i| g.dims.wrap_pos(ps[(i + 1) % 3] as i64 - ps[i] as i64)).collect();
    let dmin = *gaps.iter().min().unwrap();
    let tight: Vec<usize> = (0..3).filter(|&i| gaps[i] == dmin).collect();
    match tight.len() {
        2 => {
            // Evenly spread triple around one middle robot: it steps aside.
            let j = (0..3)
                .find(|&j| gaps[j] == dmin && gaps[(j + 2) % 3] == dmin)
                .expect("two tight gaps share a robot");
            let mid = Coord::new(lk, ps[j]);
            Ok(vec![Enabled { from: mid, dests: empty_pos_neighbors(g, mid) }])
        }
        1 => {
            let i = tight[0];
            let lone = ps[(i + 2) % 3];
            let (e0, e1) = (ps[i], ps[(i + 1) % 3]);
            let target =
                if g.dims.pos_dist(lone, e0) <= g.dims.pos_dist(lone, e1) { e0 } else { e1 };
            let mut dests = ring_steps(g, lk, lone, target, true);
            if g.dims.pos_dist(lone, e0) == g.dims.pos_dist(lone, e1) {
                for d in ring_steps(g, lk, lone, e1, true) {
                    if !dests.contains(&d) {
                        dests.push(d);
                    }
                }
            }
            Ok(vec![Enabled { from: Coord::new(lk, lone), dests }])
        }
        _ => {
            // Perfectly even triple: any elected robot steps aside.
            let w = elect(g, &robots_on(g, lk))?;
            Ok(vec![Enabled { from: w, dests: empty_pos_neighbors(g, w) }])
        }
    }
}

fn oriented_rings(g: &Grid) -> (u16, u16, u16, Coord) {
    let (m, a, b) = unique_max(g).expect("class requires a unique maximal ring");
    let (li, lk) = if g.nb_ring(a) == 1 { (a, b) } else { (b, a) };
    let ri = Coord::new(li, single_pos(g, li).expect("ring with one robot"));
    (m, li, lk, ri)
}

/// The heavy adjacent already centers the lone robot's column: grow the
/// pattern on the maximal ring, or let the lone robot climb onto it.
fn oriented1(g: &Grid) -> Result<EnabledSet, ProtocolError> {
    let (m, li, _, ri) = oriented_rings(g);
    let u = Coord::new(m, ri.pos);
    let nbm = g.nb_ring(m);
    if nbm > 4 {
        return Ok(vec![Enabled { from: ri, dests: vec![u] }]);
    }
    if nbm == 3 {
        if crate::classify::block3_middle(g, m) == Some(ri.pos) {
            return Ok(vec![Enabled { from: ri, dests: vec![u] }]);
        }
        return align_enabled(g, m, li);
    }
    debug_assert_eq!(nbm, 4);
    if !g.occupied(u) {
        return Ok(vec![Enabled { from: ri, dests: vec![u] }]);
    }
    let aside = empty_pos_neighbors(g, u);
    if !aside.is_empty() {
        return Ok(vec![Enabled { from: u, dests: aside }]);
    }
    // The column holder is walled in: an adjacent robot without an
    // antipodal partner slides outward instead.
    let half = g.dims.ell / 2;
    let on_m = g.ring_positions(m);
    let mut cands: Vec<Enabled> = Vec::new();
    for dir in [1i64, -1] {
        let q = u.step_pos(&g.dims, dir);
        let partnered = on_m.iter().any(|&p| g.dims.pos_dist(p, q.pos) == half);
        let out = q.step_pos(&g.dims, dir);
        if !partnered && !g.occupied(out) {
            push_move(&mut cands, q, vec![out]);
        }
    }
    let froms: Vec<Coord> = cands.iter().map(|e| e.from).collect();
    let w = elect(g, &froms)?;
    Ok(cands.into_iter().filter(|e| e.from == w).collect())
}

/// The heavy adjacent does not center the lone robot's column yet.
fn oriented2(g: &Grid) -> Result<EnabledSet, ProtocolError> {
    let (_, li, lk, ri) = oriented_rings(g);
    if g.nb_ring(lk) <= 3 {
        return align_enabled(g, lk, li);
    }
    // More than three on the heavy ring: pile them on the lone robot's
    // column, nearest first (stacking is intended here).
    let uk = Coord::new(lk, ri.pos);
    let away: Vec<Coord> = robots_on(g, lk).into_iter().filter(|&c| c != uk).collect();
    let best = away.iter().map(|c| g.dims.pos_dist(c.pos, uk.pos)).min().unwrap();
    let set: Vec<Coord> =
        away.into_iter().filter(|c| g.dims.pos_dist(c.pos, uk.pos) == best).collect();
    let w = elect(g, &set)?;
    Ok(vec![Enabled { from: w, dests: ring_steps(g, lk, w.pos, uk.pos, false) }])
}

/// Both adjacent rings hold exactly one robot: feed one of them from the
/// next occupied ring out.
fn semi_oriented(g: &Grid) -> Result<EnabledSet, ProtocolError> {
    let (m, li, lk) = unique_max(g).expect("class requires a unique maximal ring");
    let dir_i: i64 = if g.dims.wrap_ring(m as i64 + 1) == li { 1 } else { -1 };
    let ln_i = neighbor_ring(g, li, dir_i).expect("occupied ring exists");
    let ln_k = neighbor_ring(g, lk, -dir_i).expect("occupied ring exists");
    if ln_i == lk {
        // Only the maximal ring and its two adjacents are occupied: one of
        // the two lone robots backs away from the maximal ring.
        let mut cands: Vec<Enabled> = Vec::new();
        for (ring, dir) in [(li, dir_i), (lk, -dir_i)] {
            for rb in robots_on(g, ring) {
                let dest = rb.step_ring(&g.dims, dir);
                if !g.occupied(dest) {
                    push_move(&mut cands, rb, vec![dest]);
                }
            }
        }
        let froms: Vec<Coord> = cands.iter().map(|e| e.from).collect();
        let w = elect(g, &froms)?;
        return Ok(cands.into_iter().filter(|e| e.from == w).collect());
    }
    let mut cands: Vec<Enabled> = Vec::new();
    for (ln, back) in [(ln_i, -dir_i), (ln_k, dir_i)] {
        for rb in robots_on(g, ln) {
            let dest = rb.step_ring(&g.dims, back);
            if !g.occupied(dest) {
                push_move(&mut cands, rb, vec![dest]);
            }
        }
    }
    let froms: Vec<Coord> = cands.iter().map(|e| e.from).collect();
    let w = elect(g, &froms)?;
    Ok(cands.into_iter().filter(|e| e.from == w).collect())
}

/// Positions fixed by the position reflection encoded as `anchor2`.
fn fixed_positions(ell: u16, anchor2: u16) -> Vec<u16> {
    (0..ell).filter(|&p| (2 * p) % ell == anchor2 % ell).collect()
}

/// Elect a gathering node among `nodes` by comparing node views, first in
/// the blanked configuration then in the full one; a final coordinate
/// order keeps the choice total when both views tie.
fn elect_node(g: &Grid, gm: &Grid, nodes: &[Coord]) -> Coord {
    *nodes
        .iter()
        .max_by(|a, b| {
            node_view_key(gm, **a)
                .cmp(&node_view_key(gm, **b))
                .then_with(|| node_view_key(g, **a).cmp(&node_view_key(g, **b)))
                .then_with(|| (b.ring, b.pos).cmp(&(a.ring, a.pos)))
        })
        .unwrap()
}

/// All robots on `u`'s ring converge on `u`, nearest first. When `u` is the
/// single hole of an almost-full ring only a border robot that is not a
/// stack moves, so no second maximal ring appears.
fn gather_on_node(g: &Grid, u: Coord, mult: MultKnowledge) -> EnabledSet {
    let mut out: EnabledSet = Vec::new();
    if !g.occupied(u) && g.nb_ring(u.ring) == g.dims.ell - 1 {
        for dir in [1i64, -1] {
            let b = u.step_pos(&g.dims, dir);
            if g.occupied(b) && mult.get(b) != Some(true) {
                push_move(&mut out, b, vec![u]);
            }
        }
        return out;
    }
    let others: Vec<Coord> = robots_on(g, u.ring).into_iter().filter(|&c| c != u).collect();
    let Some(best) = others.iter().map(|c| g.dims.pos_dist(c.pos, u.pos)).min() else {
        return out;
    };
    for c in others.into_iter().filter(|c| g.dims.pos_dist(c.pos, u.pos) == best) {
        push_move(&mut out, c, ring_steps(g, u.ring, c.pos, u.pos, false));
    }
    out
}

fn undefined(g: &Grid, mult: MultKnowledge) -> Result<EnabledSet, ProtocolError> {
    let (_, a, b) = unique_max(g).expect("class requires a unique maximal ring");
    let (na, nb) = (g.nb_ring(a), g.nb_ring(b));
    if na == nb {
        return undefined_equal(g, a, b, mult);
    }
    let (li, lk) = if na < nb { (a, b) } else { (b, a) };
    let gm = gamma(g, li, lk);
    if is_periodic(&gm) {
        return periodic_gamma(g, li, lk);
    }
    let pa = pos_axes(&gm);
    let total_axes = pa.len() + ring_axes(&gm).len();
    if total_axes > 1 {
        return multi_axis_gamma(g, &gm);
    }
    if let [anchor2] = pa.as_slice() {
        let fixed = fixed_positions(g.dims.ell, *anchor2);
        return match fixed.as_slice() {
            [p0] => Ok(gather_on_node(g, Coord::new(li, *p0), mult)),
            [p1, p2] => node_node_one_ring(g, li, *p1, *p2),
            [] => {
                let a = edge_anchor(g.dims.ell, *anchor2);
                edge_edge_ring_moves(g, li, a)
            }
            _ => unreachable!("a reflection fixes at most two positions"),
        };
    }
    // No transversal axis: node views in the blanked configuration single
    // out the gathering node on the lighter ring.
    let nodes: Vec<Coord> = (0..g.dims.ell).map(|p| Coord::new(li, p)).collect();
    let u = elect_node(g, &gm, &nodes);
    Ok(gather_on_node(g, u, mult))
}

/// Node-node axis through a single ring: the two fixed nodes compete.
fn node_node_one_ring(g: &Grid, li: u16, p1: u16, p2: u16) -> Result<EnabledSet, ProtocolError> {
    let (u1, u2) = (Coord::new(li, p1), Coord::new(li, p2));
    match (g.occupied(u1), g.occupied(u2)) {
        (true, true) => {
            let w = elect(g, &[u1, u2])?;
            let dests = vec![w.step_pos(&g.dims, 1), w.step_pos(&g.dims, -1)];
            Ok(vec![Enabled { from: w, dests }])
        }
        (false, false) => {
            let robots = robots_on(g, li);
            let d = |c: &Coord| g.dims.pos_dist(c.pos, p1).min(g.dims.pos_dist(c.pos, p2));
            let best = robots.iter().map(d).min().expect("undefined ring is populated");
            let set: Vec<Coord> = robots.into_iter().filter(|c| d(c) == best).collect();
            let r = elect(g, &set)?;
            let mut dests = Vec::new();
            for p in [p1, p2] {
                if g.dims.pos_dist(r.pos, p) == best {
                    for s in ring_steps(g, li, r.pos, p, false) {
                        if !dests.contains(&s) {
                            dests.push(s);
                        }
                    }
                }
            }
            Ok(vec![Enabled { from: r, dests }])
        }
        (occ1, _) => {
            // One fixed node occupied: it plays the gathering node for its
            // ring mates.
            let w = if occ1 { u1 } else { u2 };
            let others: Vec<Coord> =
                robots_on(g, li).into_iter().filter(|&c| c != w).collect();
            let best = others.iter().map(|c| g.dims.pos_dist(c.pos, w.pos)).min().unwrap();
            let mut out: EnabledSet = Vec::new();
            for c in others.into_iter().filter(|c| g.dims.pos_dist(c.pos, w.pos) == best) {
                push_move(&mut out, c, ring_steps(g, li, c.pos, w.pos, false));
            }
            Ok(out)
        }
    }
}

/// Lower anchor of the two edges fixed by an edge-type position reflection.
fn edge_anchor(ell: u16, anchor2: u16) -> u16 {
    (0..ell)
        .find(|&p| (2 * p + 1) % ell == anchor2 % ell)
        .expect("edge axis has an anchored edge")
}

struct EdgeFrame {
    ring: u16,
    /// u1, u2, u3, u4: the edge nodes, u1/u3 on the minus side.
    u: [Coord; 4],
    occ: [bool; 4],
    a: u16,
}

impl EdgeFrame {
    fn new(g: &Grid, ring: u16, a: u16) -> Self {
        let ell = g.dims.ell as i64;
        let u = [
            Coord::new(ring, g.dims.wrap_pos(a as i64)),
            Coord::new(ring, g.dims.wrap_pos(a as i64 + 1)),
            Coord::new(ring, g.dims.wrap_pos(a as i64 + ell / 2 + 1)),
            Coord::new(ring, g.dims.wrap_pos(a as i64 + ell / 2)),
        ];
        let occ = [g.occupied(u[0]), g.occupied(u[1]), g.occupied(u[2]), g.occupied(u[3])];
        EdgeFrame { ring, u, occ, a }
    }

    /// True if `p` lies on the side of u2 and u4.
    fn plus_side(&self, g: &Grid, p: u16) -> bool {
        let off = g.dims.wrap_pos(p as i64 - self.a as i64);
        (1..=g.dims.ell / 2).contains(&off)
    }

    /// Strictly-between arc of a same-side pair is empty.
    fn free_minus(&self, g: &Grid) -> bool {
        let half = g.dims.ell as i64 / 2;
        (2..half).all(|i| !g.occupied(Coord::new(self.ring, g.dims.wrap_pos(self.a as i64 + half + i))))
    }

    fn free_plus(&self, g: &Grid) -> bool {
        let half = g.dims.ell as i64 / 2;
        (2..half).all(|i| !g.occupied(Coord::new(self.ring, g.dims.wrap_pos(self.a as i64 + i))))
    }

    fn count(&self) -> usize {
        self.occ.iter().filter(|&&o| o).count()
    }

    /// Robots on the ring off the four edge nodes.
    fn others(&self, g: &Grid) -> Vec<Coord> {
        robots_on(g, self.ring)
            .into_iter()
            .filter(|c| !self.u.contains(c))
            .collect()
    }

    fn edge_partner(&self, i: usize) -> usize {
        [1, 0, 3, 2][i]
    }

    fn side_partner(&self, i: usize) -> usize {
        [2, 3, 0, 1][i]
    }

    /// Step from `u[i]` away from its edge partner.
    fn away_from_partner(&self, g: &Grid, i: usize) -> Coord {
        let dir = match i {
            0 => -1i64,
            1 => 1,
            2 => 1,
            3 => -1,
            _ => unreachable!(),
        };
        self.u[i].step_pos(&g.dims, dir)
    }
}

/// Behavior on one ring crossed by an edge-type axis of the blanked
/// configuration, driven by which of the four edge nodes hold robots.
fn edge_edge_ring_moves(g: &Grid, ring: u16, a: u16) -> Result<EnabledSet, ProtocolError> {
    let f = EdgeFrame::new(g, ring, a);
    let occ_idx: Vec<usize> = (0..4).filter(|&i| f.occ[i]).collect();
    match occ_idx.len() {
        4 => {
            let w = elect(g, &f.u)?;
            let i = f.u.iter().position(|&c| c == w).unwrap();
            Ok(vec![Enabled { from: w, dests: vec![f.u[f.edge_partner(i)]] }])
        }
        3 => {
            let e = (0..4).find(|&i| !f.occ[i]).unwrap();
            let tgt = f.u[f.side_partner(e)];
            let e_plus = f.plus_side(g, f.u[e].pos);
            let same_side: Vec<Coord> = f
                .others(g)
                .into_iter()
                .filter(|c| f.plus_side(g, c.pos) == e_plus && *c != tgt)
                .collect();
            if !same_side.is_empty() {
                let best =
                    same_side.iter().map(|c| g.dims.pos_dist(c.pos, tgt.pos)).min().unwrap();
                let mut out: EnabledSet = Vec::new();
                for c in same_side
                    .into_iter()
                    .filter(|c| g.dims.pos_dist(c.pos, tgt.pos) == best)
                {
                    push_move(&mut out, c, ring_steps(g, ring, c.pos, tgt.pos, false));
                }
                Ok(out)
            } else {
                let mover = f.edge_partner(e);
                Ok(vec![Enabled {
                    from: f.u[mover],
                    dests: vec![f.away_from_partner(g, mover)],
                }])
            }
        }
        2 => {
            let (i, j) = (occ_idx[0], occ_idx[1]);
            if f.edge_partner(i) == j {
                // The occupied pair spans one of the fixed edges.
                let others = f.others(g);
                let side_of = |idx: usize| f.plus_side(g, f.u[idx].pos);
                let si: Vec<Coord> = others
                    .iter()
                    .copied()
                    .filter(|c| f.plus_side(g, c.pos) == side_of(i))
                    .collect();
                let sj: Vec<Coord> = others
                    .iter()
                    .copied()
                    .filter(|c| f.plus_side(g, c.pos) == side_of(j))
                    .collect();
                return match (si.is_empty(), sj.is_empty()) {
                    (true, true) => {
                        let w = elect(g, &[f.u[i], f.u[j]])?;
                        let other = if w == f.u[i] { f.u[j] } else { f.u[i] };
                        Ok(vec![Enabled { from: w, dests: vec![other] }])
                    }
                    (false, true) => {
                        Ok(vec![Enabled { from: f.u[j], dests: vec![f.u[i]] }])
                    }
                    (true, false) => {
                        Ok(vec![Enabled { from: f.u[i], dests: vec![f.u[j]] }])
                    }
                    (false, false) => {
                        let far = |set: &[Coord], anchor: Coord| -> Vec<Coord> {
                            let dmax = set
                                .iter()
                                .map(|c| g.dims.pos_dist(c.pos, anchor.pos))
                                .max()
                                .unwrap();
                            set.iter()
                                .copied()
                                .filter(|c| g.dims.pos_dist(c.pos, anchor.pos) == dmax)
                                .collect()
                        };
                        let mut cands = far(&si, f.u[i]);
                        cands.extend(far(&sj, f.u[j]));
                        let w = elect(g, &cands)?;
                        let anchor =
                            if f.plus_side(g, w.pos) == side_of(i) { f.u[i] } else { f.u[j] };
                        Ok(vec![Enabled {
                            from: w,
                            dests: ring_steps(g, ring, w.pos, anchor.pos, false),
                        }])
                    }
                };
            }
            // Same-side or diagonal pair: the larger view backs away from
            // its fixed edge.
            let w = elect(g, &[f.u[i], f.u[j]])?;
            let idx = if w == f.u[i] { i } else { j };
            Ok(vec![Enabled { from: w, dests: vec![f.away_from_partner(g, idx)] }])
        }
        1 => {
            let i = occ_idx[0];
            let w = f.u[i];
            let w_plus = f.plus_side(g, w.pos);
            let others = f.others(g);
            let same: Vec<Coord> =
                others.iter().copied().filter(|c| f.plus_side(g, c.pos) == w_plus).collect();
            if !same.is_empty() {
                let best = same.iter().map(|c| g.dims.pos_dist(c.pos, w.pos)).min().unwrap();
                let mut out: EnabledSet = Vec::new();
                for c in same.into_iter().filter(|c| g.dims.pos_dist(c.pos, w.pos) == best) {
                    push_move(&mut out, c, ring_steps(g, ring, c.pos, w.pos, false));
                }
                return Ok(out);
            }
            if !others.is_empty() {
                return Ok(vec![Enabled { from: w, dests: vec![f.u[f.edge_partner(i)]] }]);
            }
            Err(ProtocolError::Unsupported(
                "single edge node occupied with no other robot on the ring".into(),
            ))
        }
        0 => {
            let others = f.others(g);
            let pair_dist = |c: &Coord| -> u16 {
                (0..4)
                    .filter(|&i| f.plus_side(g, f.u[i].pos) == f.plus_side(g, c.pos))
                    .map(|i| g.dims.pos_dist(c.pos, f.u[i].pos))
                    .min()
                    .unwrap()
            };
            let best = others.iter().map(pair_dist).min().ok_or_else(|| {
                ProtocolError::Unsupported("no robot on the edge-axis ring".into())
            })?;
            let set: Vec<Coord> =
                others.into_iter().filter(|c| pair_dist(c) == best).collect();
            let r = elect(g, &set)?;
            let tgt = (0..4)
                .filter(|&i| f.plus_side(g, f.u[i].pos) == f.plus_side(g, r.pos))
                .min_by_key(|&i| g.dims.pos_dist(r.pos, f.u[i].pos))
                .unwrap();
            Ok(vec![Enabled {
                from: r,
                dests: ring_steps(g, ring, r.pos, f.u[tgt].pos, false),
            }])
        }
        _ => unreachable!(),
    }
}

/// The blanked configuration has several axes: one of its robots steps
/// aside to break all but at most one of them.
fn multi_axis_gamma(g: &Grid, gm: &Grid) -> Result<EnabledSet, ProtocolError> {
    let mut cands: Vec<Enabled> = Vec::new();
    for rb in gm.occupied_nodes() {
        push_move(&mut cands, rb, empty_pos_neighbors(g, rb));
    }
    let froms: Vec<Coord> = cands.iter().map(|e| e.from).collect();
    let w = elect(g, &froms)?;
    Ok(cands.into_iter().filter(|e| e.from == w).collect())
}

/// The blanked configuration is periodic: one robot outside the adjacent
/// rings steps sideways so it becomes rigid or singly symmetric.
fn periodic_gamma(g: &Grid, li: u16, lk: u16) -> Result<EnabledSet, ProtocolError> {
    let gm = gamma(g, li, lk);
    let mut strict: Vec<Enabled> = Vec::new();
    let mut loose: Vec<Enabled> = Vec::new();
    for rb in gm.occupied_nodes() {
        for dest in empty_pos_neighbors(g, rb) {
            let g2 = move_node(g, rb, dest);
            let gm2 = gamma(&g2, li, lk);
            if is_periodic(&gm2) || pos_axes(&gm2).len() + ring_axes(&gm2).len() > 1 {
                continue;
            }
            if is_rigid(&g2) {
                push_move(&mut strict, rb, vec![dest]);
            } else {
                push_move(&mut loose, rb, vec![dest]);
            }
        }
    }
    let cands = if strict.is_empty() { loose } else { strict };
    let froms: Vec<Coord> = cands.iter().map(|e| e.from).collect();
    let w = elect(g, &froms)?;
    Ok(cands.into_iter().filter(|e| e.from == w).collect())
}

fn undefined_equal(
    g: &Grid,
    li: u16,
    lk: u16,
    mult: MultKnowledge,
) -> Result<EnabledSet, ProtocolError> {
    let (m, _, _) = unique_max(g).expect("class requires a unique maximal ring");
    let dir_i: i64 = if g.dims.wrap_ring(m as i64 + 1) == li { 1 } else { -1 };
    let l2i = g.dims.wrap_ring(li as i64 + dir_i);
    let l2k = g.dims.wrap_ring(lk as i64 - dir_i);
    let (ei, ek) = (g.nb_ring(l2i) == 0, g.nb_ring(l2k) == 0);
    if ei || ek {
        // At least one outward ring is free: a robot backs onto it, making
        // the adjacent populations differ.
        let mut cands: Vec<Enabled> = Vec::new();
        for (ring, dir, free) in [(li, dir_i, ei), (lk, -dir_i, ek)] {
            if !free {
                continue;
            }
            for rb in robots_on(g, ring) {
                let dest = rb.step_ring(&g.dims, dir);
                if !g.occupied(dest) {
                    push_move(&mut cands, rb, vec![dest]);
                }
            }
        }
        let froms: Vec<Coord> = cands.iter().map(|e| e.from).collect();
        let w = elect(g, &froms)?;
        return Ok(cands.into_iter().filter(|e| e.from == w).collect());
    }
    let gm = gamma(g, li, lk);
    if is_periodic(&gm) {
        return periodic_gamma(g, li, lk);
    }
    let pa = pos_axes(&gm);
    let total_axes = pa.len() + ring_axes(&gm).len();
    if total_axes > 1 {
        return multi_axis_gamma(g, &gm);
    }
    if let [anchor2] = pa.as_slice() {
        let fixed = fixed_positions(g.dims.ell, *anchor2);
        return match fixed.as_slice() {
            [p0] => node_edge_two_rings(g, li, lk, *p0),
            [p1, p2] => node_node_two_rings(g, li, lk, *p1, *p2),
            [] => {
                let a = edge_anchor(g.dims.ell, *anchor2);
                let ring = select_edge_ring(g, li, lk, a)?;
                edge_edge_ring_moves(g, ring, a)
            }
            _ => unreachable!("a reflection fixes at most two positions"),
        };
    }
    let nodes: Vec<Coord> = (0..g.dims.ell)
        .flat_map(|p| [Coord::new(li, p), Coord::new(lk, p)])
        .collect();
    let u = elect_node(g, &gm, &nodes);
    Ok(gather_on_node(g, u, mult))
}

/// Closest robots on `ring` to the column `p`, excluding any robot on the
/// node itself.
fn closest_on_ring(g: &Grid, ring: u16, p: u16) -> Vec<Coord> {
    let others: Vec<Coord> =
        robots_on(g, ring).into_iter().filter(|c| c.pos != p).collect();
    let Some(best) = others.iter().map(|c| g.dims.pos_dist(c.pos, p)).min() else {
        return Vec::new();
    };
    others.into_iter().filter(|c| g.dims.pos_dist(c.pos, p) == best).collect()
}

fn node_edge_two_rings(
    g: &Grid,
    li: u16,
    lk: u16,
    p0: u16,
) -> Result<EnabledSet, ProtocolError> {
    let (u, up) = (Coord::new(li, p0), Coord::new(lk, p0));
    match (g.occupied(u), g.occupied(up)) {
        (true, false) | (false, true) => {
            let w = if g.occupied(u) { u } else { up };
            let set = closest_on_ring(g, w.ring, w.pos);
            let r = elect(g, &set)?;
            Ok(vec![Enabled { from: r, dests: ring_steps(g, r.ring, r.pos, w.pos, false) }])
        }
        (true, true) => {
            let mut set = closest_on_ring(g, li, p0);
            set.extend(closest_on_ring(g, lk, p0));
            let r = elect(g, &set)?;
            Ok(vec![Enabled { from: r, dests: ring_steps(g, r.ring, r.pos, p0, false) }])
        }
        (false, false) => {
            let mut set = closest_on_ring(g, li, p0);
            set.extend(closest_on_ring(g, lk, p0));
            let r = elect(g, &set)?;
            Ok(vec![Enabled { from: r, dests: ring_steps(g, r.ring, r.pos, p0, true) }])
        }
    }
}

fn node_node_two_rings(
    g: &Grid,
    li: u16,
    lk: u16,
    p1: u16,
    p2: u16,
) -> Result<EnabledSet, ProtocolError> {
    let v = [
        Coord::new(li, p1),
        Coord::new(li, p2),
        Coord::new(lk, p1),
        Coord::new(lk, p2),
    ];
    let occ: Vec<Coord> = v.iter().copied().filter(|&c| g.occupied(c)).collect();
    match occ.len() {
        4 => {
            let with_occ_neighbor: Vec<Coord> = v
                .iter()
                .copied()
                .filter(|c| {
                    [1i64, -1].into_iter().any(|d| g.occupied(c.step_pos(&g.dims, d)))
                })
                .collect();
            if !with_occ_neighbor.is_empty() {
                let w = elect(g, &with_occ_neighbor)?;
                let dests: Vec<Coord> = [1i64, -1]
                    .into_iter()
                    .map(|d| w.step_pos(&g.dims, d))
                    .filter(|&n| g.occupied(n))
                    .collect();
                Ok(vec![Enabled { from: w, dests }])
            } else {
                let w = elect(g, &v)?;
                Ok(vec![Enabled { from: w, dests: empty_pos_neighbors(g, w) }])
            }
        }
        3 => {
            let e = v.iter().find(|c| !g.occupied(**c)).unwrap();
            let w = Coord::new(e.ring, if e.pos == p1 { p2 } else { p1 });
            let set = closest_on_ring(g, e.ring, w.pos);
            let mut out: EnabledSet = Vec::new();
            for c in set {
                push_move(&mut out, c, ring_steps(g, c.ring, c.pos, w.pos, false));
            }
            Ok(out)
        }
        2 => {
            if occ[0].ring == occ[1].ring {
                let w = elect(g, &occ)?;
                let dests = vec![w.step_pos(&g.dims, 1), w.step_pos(&g.dims, -1)];
                Ok(vec![Enabled { from: w, dests }])
            } else {
                let mut set = Vec::new();
                for c in &occ {
                    set.extend(closest_on_ring(g, c.ring, c.pos));
                }
                let r = elect(g, &set)?;
                let tgt = occ.iter().find(|c| c.ring == r.ring).unwrap();
                Ok(vec![Enabled {
                    from: r,
                    dests: ring_steps(g, r.ring, r.pos, tgt.pos, false),
                }])
            }
        }
        1 => {
            let w = occ[0];
            let set = closest_on_ring(g, w.ring, w.pos);
            let r = elect(g, &set)?;
            Ok(vec![Enabled { from: r, dests: ring_steps(g, r.ring, r.pos, w.pos, false) }])
        }
        0 => {
            // All four axis nodes free: fall back to the node-edge recipe,
            // walking the nearest robot onto a fixed column.
            let mut set = Vec::new();
            for c in &v {
                set.extend(closest_on_ring(g, c.ring, c.pos));
            }
            set.dedup();
            let r = elect(g, &set)?;
            let tgt = v
                .iter()
                .filter(|c| c.ring == r.ring)
                .min_by_key(|c| g.dims.pos_dist(r.pos, c.pos))
                .unwrap();
            Ok(vec![Enabled { from: r, dests: ring_steps(g, r.ring, r.pos, tgt.pos, true) }])
        }
        _ => unreachable!(),
    }
}

/// Pick the ring (of the two adjacents) whose robots will thin out first
/// when the blanked configuration is edge-edge symmetric: a fixed priority
/// ladder over the edge-node occupancies, then population and view
/// tie-breaks.
fn select_edge_ring(g: &Grid, li: u16, lk: u16, a: u16) -> Result<u16, ProtocolError> {
    let fi = EdgeFrame::new(g, li, a);
    let fk = EdgeFrame::new(g, lk, a);
    let edge_pair = |f: &EdgeFrame| {
        (f.occ[0] && f.occ[1] && !f.occ[2] && !f.occ[3])
            || (f.occ[2] && f.occ[3] && !f.occ[0] && !f.occ[1])
    };
    let same_side_pair = |f: &EdgeFrame| {
        (f.occ[0] && f.occ[2] && !f.occ[1] && !f.occ[3])
            || (f.occ[1] && f.occ[3] && !f.occ[0] && !f.occ[2])
    };

    // Rung 1: an edge pair with both side arcs free is unique by rigidity.
    let p1 = |f: &EdgeFrame| edge_pair(f) && f.free_minus(g) && f.free_plus(g);
    if p1(&fi) {
        return Ok(li);
    }
    if p1(&fk) {
        return Ok(lk);
    }
    // Rung 2: one edge node occupied, its own side arc blocked, the other
    // free; break a double match by distance then view.
    let p2 = |f: &EdgeFrame| -> Option<usize> {
        let occ: Vec<usize> = (0..4).filter(|&i| f.occ[i]).collect();
        let [i] = occ.as_slice() else { return None };
        let own_free = if *i == 0 || *i == 2 { f.free_minus(g) } else { f.free_plus(g) };
        let other_free = if *i == 0 || *i == 2 { f.free_plus(g) } else { f.free_minus(g) };
        (!own_free && other_free).then_some(*i)
    };
    match (p2(&fi), p2(&fk)) {
        (Some(_), None) => return Ok(li),
        (None, Some(_)) => return Ok(lk),
        (Some(i), Some(k)) => {
            let ci = closest_on_ring(g, li, fi.u[i].pos);
            let ck = closest_on_ring(g, lk, fk.u[k].pos);
            let di = ci.first().map(|c| g.dims.pos_dist(c.pos, fi.u[i].pos));
            let dk = ck.first().map(|c| g.dims.pos_dist(c.pos, fk.u[k].pos));
            return match (di, dk) {
                (Some(x), Some(y)) if x < y => Ok(li),
                (Some(x), Some(y)) if x > y => Ok(lk),
                _ => {
                    let mut set = ci;
                    set.extend(ck);
                    Ok(elect(g, &set)?.ring)
                }
            };
        }
        (None, None) => {}
    }
    // Rung 3: an edge pair with at least one free side arc.
    let p3 = |f: &EdgeFrame| edge_pair(f) && (f.free_minus(g) || f.free_plus(g));
    match (p3(&fi), p3(&fk)) {
        (true, false) => return Ok(li),
        (false, true) => return Ok(lk),
        (true, true) => return Ok(elect_on_edge_nodes(g, &fi, &fk)?),
        (false, false) => {}
    }
    // Rung 4: a same-side pair with the opposite arc free and its own arc
    // blocked.
    let p4 = |f: &EdgeFrame| -> bool {
        if !same_side_pair(f) {
            return false;
        }
        let minus = f.occ[0];
        if minus {
            f.free_plus(g) && !f.free_minus(g)
        } else {
            f.free_minus(g) && !f.free_plus(g)
        }
    };
    match (p4(&fi), p4(&fk)) {
        (true, false) => return Ok(li),
        (false, true) => return Ok(lk),
        (true, true) => return Ok(elect_on_edge_nodes(g, &fi, &fk)?),
        (false, false) => {}
    }
    // Rung 5: three edge nodes occupied and the empty one's side arc free.
    let p5 = |f: &EdgeFrame| -> bool {
        if f.count() != 3 {
            return false;
        }
        let e = (0..4).find(|&i| !f.occ[i]).unwrap();
        if e == 0 || e == 2 {
            f.free_minus(g)
        } else {
            f.free_plus(g)
        }
    };
    match (p5(&fi), p5(&fk)) {
        (true, false) => return Ok(li),
        (false, true) => return Ok(lk),
        (true, true) => return Ok(elect_on_edge_nodes(g, &fi, &fk)?),
        (false, false) => {}
    }
    // Fallback ladder: fewer occupied edge nodes first, then per-count
    // tie-breaks.
    if fi.count() != fk.count() {
        return Ok(if fi.count() < fk.count() { li } else { lk });
    }
    match fi.count() {
        4 => elect_on_edge_nodes(g, &fi, &fk),
        3 => {
            let side_count = |f: &EdgeFrame| -> usize {
                let e = (0..4).find(|&i| !f.occ[i]).unwrap();
                let e_plus = f.plus_side(g, f.u[e].pos);
                robots_on(g, f.ring)
                    .into_iter()
                    .filter(|c| f.plus_side(g, c.pos) == e_plus)
                    .count()
            };
            let (si, sk) = (side_count(&fi), side_count(&fk));
            if si != sk {
                return Ok(if si < sk { li } else { lk });
            }
            let anchor = |f: &EdgeFrame| {
                let e = (0..4).find(|&i| !f.occ[i]).unwrap();
                f.u[f.side_partner(e)]
            };
            let (ci, ck) = (
                closest_on_ring(g, li, anchor(&fi).pos),
                closest_on_ring(g, lk, anchor(&fk).pos),
            );
            let di = ci.first().map(|c| g.dims.pos_dist(c.pos, anchor(&fi).pos));
            let dk = ck.first().map(|c| g.dims.pos_dist(c.pos, anchor(&fk).pos));
            match (di, dk) {
                (Some(x), Some(y)) if x < y => Ok(li),
                (Some(x), Some(y)) if x > y => Ok(lk),
                _ => {
                    let mut set = ci;
                    set.extend(ck);
                    Ok(elect(g, &set)?.ring)
                }
            }
        }
        2 => {
            let case = |f: &EdgeFrame| -> u8 {
                if edge_pair(f) {
                    0
                } else if same_side_pair(f) {
                    1
                } else {
                    2
                }
            };
            let (qi, qk) = (case(&fi), case(&fk));
            if qi != qk {
                return Ok(if qi < qk { li } else { lk });
            }
            if qi == 0 {
                let side_counts = |f: &EdgeFrame| -> (usize, usize) {
                    let rs = robots_on(g, f.ring);
                    let plus = rs.iter().filter(|c| f.plus_side(g, c.pos)).count();
                    (rs.len() - plus, plus)
                };
                let (mi, pi) = side_counts(&fi);
                let (mk, pk) = side_counts(&fk);
                let fmin = mi.min(pi).min(mk).min(pk);
                let (hi, hk) = (mi == fmin || pi == fmin, mk == fmin || pk == fmin);
                if hi != hk {
                    return Ok(if hi { li } else { lk });
                }
                let near = |f: &EdgeFrame| -> (Option<u16>, Vec<Coord>) {
                    let mut set = Vec::new();
                    for i in (0..4).filter(|&i| f.occ[i]) {
                        set.extend(closest_on_ring(g, f.ring, f.u[i].pos));
                    }
                    let d = set
                        .iter()
                        .map(|c| {
                            (0..4)
                                .filter(|&i| f.occ[i])
                                .map(|i| g.dims.pos_dist(c.pos, f.u[i].pos))
                                .min()
                                .unwrap()
                        })
                        .min();
                    (d, set)
                };
                let (di, seti) = near(&fi);
                let (dk, setk) = near(&fk);
                return match (di, dk) {
                    (Some(x), Some(y)) if x < y => Ok(li),
                    (Some(x), Some(y)) if x > y => Ok(lk),
                    _ => {
                        let mut set = seti;
                        set.extend(setk);
                        Ok(elect(g, &set)?.ring)
                    }
                };
            }
            elect_on_edge_nodes(g, &fi, &fk)
        }
        1 | 0 => {
            let near = |f: &EdgeFrame| -> Vec<Coord> {
                let anchors: Vec<usize> = if f.count() == 1 {
                    (0..4).filter(|&i| f.occ[i]).collect()
                } else {
                    (0..4).collect()
                };
                let others = f.others(g);
                let d = |c: &Coord| {
                    anchors.iter().map(|&i| g.dims.pos_dist(c.pos, f.u[i].pos)).min().unwrap()
                };
                let Some(best) = others.iter().map(d).min() else { return Vec::new() };
                others.into_iter().filter(|c| d(c) == best).collect()
            };
            let mut set = near(&fi);
            set.extend(near(&fk));
            Ok(elect(g, &set)?.ring)
        }
        _ => unreachable!(),
    }
}

/// The ring hosting the largest-view robot among the occupied edge nodes of
/// both frames.
fn elect_on_edge_nodes(
    g: &Grid,
    fi: &EdgeFrame,
    fk: &EdgeFrame,
) -> Result<u16, ProtocolError> {
    let set: Vec<Coord> = (0..4)
        .filter(|&i| fi.occ[i])
        .map(|i| fi.u[i])
        .chain((0..4).filter(|&i| fk.occ[i]).map(|i| fk.u[i]))
        .collect();
    Ok(elect(g, &set)?.ring)
}
