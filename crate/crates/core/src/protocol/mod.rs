//! The robot algorithm: a pure function from an occupancy snapshot to the
//! set of robots allowed to move and their admissible destinations.
//!
//! Wherever the algorithm leaves a binary choice open ("the adversary
//! chooses"), the enabled entry lists every admissible destination; the
//! scheduler resolves the choice.

pub mod align;
pub mod gather;
pub mod prepare;

use crate::classify::{self, Label};
use crate::torus::{Coord, Grid};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ProtocolError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("unsupported configuration: {0}")]
    Unsupported(String),
}

/// Robots on `from` may move; any robot activated there picks one of `dests`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Enabled {
    pub from: Coord,
    pub dests: Vec<Coord>,
}

pub type EnabledSet = Vec<Enabled>;

pub(crate) fn push_move(set: &mut EnabledSet, from: Coord, dests: Vec<Coord>) {
    if dests.is_empty() {
        return;
    }
    if let Some(e) = set.iter_mut().find(|e| e.from == from) {
        for d in dests {
            if !e.dests.contains(&d) {
                e.dests.push(d);
            }
        }
    } else {
        set.push(Enabled { from, dests });
    }
}

/// What the computing robot knows about node multiplicities: its own node's
/// bit always, every node's when the caller is the simulator.
#[derive(Clone, Copy)]
pub enum MultKnowledge<'a> {
    /// Full per-node tower map (simulator side).
    Oracle(&'a dyn Fn(Coord) -> bool),
    /// Only the computing robot's own bit, as the model allows.
    SelfOnly { at: Coord, m: bool },
}

impl MultKnowledge<'_> {
    /// The multiplicity bit for `c` if known to the holder.
    pub fn get(&self, c: Coord) -> Option<bool> {
        match self {
            MultKnowledge::Oracle(f) => Some(f(c)),
            MultKnowledge::SelfOnly { at, m } => (*at == c).then_some(*m),
        }
    }
}

/// The enabled set of the whole configuration. Rules conditioned on a node's
/// multiplicity keep a candidate only when the bit is known and false, which
/// is exact under `Oracle` and exact for the caller's own node under
/// `SelfOnly` (no rule consults any other node's count).
pub fn enabled_moves(g: &Grid, mult: MultKnowledge) -> Result<EnabledSet, ProtocolError> {
    let label = classify::classify(g);
    if label != Label::Gathered {
        if let [a, b] = g.occupied_nodes()[..] {
            return Ok(endgame_pair(g, a, b, mult));
        }
        if let Some(set) = flanked_max(g) {
            return Ok(set);
        }
    }
    match label {
        Label::Gathered => Ok(Vec::new()),
        l if l.is_phase2() => gather::gathering_enabled(g, label, mult),
        _ => prepare::preparation_enabled(g, label, mult),
    }
}

/// A unique maximal ring flanked by one occupied node on each adjacent ring,
/// nothing else, with the two flankers view-tied: no side can be elected, so
/// both flanking robots climb straight up instead.
fn flanked_max(g: &Grid) -> Option<EnabledSet> {
    let (max, a, b) = classify::unique_max(g)?;
    if g.nb_ring(a) != 1 || g.nb_ring(b) != 1 || g.occupied_rings().len() != 3 {
        return None;
    }
    let ca = Coord::new(a, g.ring_positions(a)[0]);
    let cb = Coord::new(b, g.ring_positions(b)[0]);
    if crate::view::node_view_key(g, ca) != crate::view::node_view_key(g, cb) {
        return None;
    }
    let mut out = Vec::new();
    for c in [ca, cb] {
        push_move(&mut out, c, vec![Coord::new(max, c.pos)]);
    }
    Some(out)
}

/// Two occupied nodes left anywhere on the torus: robots alone on their node
/// walk to the other one, stacked robots wait. With three or more robots one
/// side is always a stack, so the walk is one-sided and cannot oscillate.
fn endgame_pair(g: &Grid, a: Coord, b: Coord, mult: MultKnowledge) -> EnabledSet {
    let mut out = Vec::new();
    for (c, other) in [(a, b), (b, a)] {
        if mult.get(c) == Some(true) {
            continue;
        }
        let mut dests = Vec::new();
        for dir in [1i64, -1] {
            let d = Coord::new(g.dims.wrap_ring(c.ring as i64 + dir), c.pos);
            if g.dims.ring_dist(d.ring, other.ring) < g.dims.ring_dist(c.ring, other.ring) {
                dests.push(d);
            }
            let d = Coord::new(c.ring, g.dims.wrap_pos(c.pos as i64 + dir));
            if g.dims.pos_dist(d.pos, other.pos) < g.dims.pos_dist(c.pos, other.pos) {
                dests.push(d);
            }
        }
        push_move(&mut out, c, dests);
    }
    out
}

/// One robot's Compute: its admissible destinations given its snapshot and
/// its own multiplicity bit, or `None` when it must stay put.
pub fn decide(g: &Grid, at: Coord, m: bool) -> Result<Option<Vec<Coord>>, ProtocolError> {
    let set = enabled_moves(g, MultKnowledge::SelfOnly { at, m })?;
    Ok(set.into_iter().find(|e| e.from == at).map(|e| e.dests))
}
