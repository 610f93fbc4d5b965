//! ASYNC execution engine: robots cycle through Look, Compute and Move
//! under an adversarial but fair scheduler. Moves are instantaneous, so a
//! robot may execute a move computed from an outdated snapshot; that is the
//! whole difficulty of the model and the engine reproduces it faithfully.

use std::collections::BTreeMap;
use std::io::Write;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::classify::{classify, is_rigid, unique_max, Label};
use crate::protocol::{decide, ProtocolError};
use crate::torus::{maximal_rings, Coord, Grid, TorusDims};

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("invalid initial state: {0}")]
    Input(String),
    #[error("robot {robot} cannot execute the scripted action: {reason}")]
    Script { robot: usize, reason: String },
    #[error("protocol has no decision: {0}")]
    Protocol(#[from] ProtocolError),
}

#[derive(Debug, Clone)]
pub struct RobotState {
    pub id: usize,
    pub at: Coord,
    /// Destinations computed at the last Look, not yet executed. A decision
    /// to stay is collapsed to `None` right away.
    pub pending: Option<Vec<Coord>>,
    pub last_activated: u64,
}

#[derive(Debug, Clone)]
pub struct SimState {
    pub dims: TorusDims,
    pub robots: Vec<RobotState>,
    pub step: u64,
}

impl SimState {
    pub fn new(dims: TorusDims, positions: &[Coord]) -> Result<Self, SimError> {
        if positions.len() < 2 {
            return Err(SimError::Input("need at least two robots".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        for c in positions {
            if c.ring >= dims.big_l || c.pos >= dims.ell {
                return Err(SimError::Input(format!(
                    "robot at ({}, {}) is outside the torus",
                    c.ring, c.pos
                )));
            }
            if !seen.insert((c.ring, c.pos)) {
                return Err(SimError::Input(
                    "initial configuration contains a multiplicity".into(),
                ));
            }
        }
        let robots = positions
            .iter()
            .enumerate()
            .map(|(id, &at)| RobotState { id, at, pending: None, last_activated: 0 })
            .collect();
        Ok(SimState { dims, robots, step: 0 })
    }

    pub fn grid(&self) -> Grid {
        let nodes: Vec<Coord> = self.robots.iter().map(|r| r.at).collect();
        Grid::from_nodes(self.dims, &nodes)
    }

    pub fn counts(&self) -> BTreeMap<(u16, u16), u32> {
        let mut m = BTreeMap::new();
        for r in &self.robots {
            *m.entry((r.at.ring, r.at.pos)).or_insert(0) += 1;
        }
        m
    }

    fn count_at(&self, c: Coord) -> u32 {
        self.robots.iter().filter(|r| r.at == c).count() as u32
    }

    /// Terminal fixpoint: all robots share one node and no stale move is
    /// still pending.
    pub fn gathered(&self) -> bool {
        let at = self.robots[0].at;
        self.robots.iter().all(|r| r.at == at && r.pending.is_none())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Action {
    Look,
    /// Execute the pending move; the index resolves an adversary choice.
    Move(usize),
    /// Execute the pending move to an explicit node (trace replay).
    MoveTo(Coord),
}

/// One scheduler decision: the activated robots and their actions.
pub type Choice = Vec<(usize, Action)>;

pub trait Scheduler {
    fn choose(&mut self, state: &SimState) -> Choice;
    /// Activation-gap bound asserted by the runner, in steps.
    fn fairness_gap(&self, k: usize) -> Option<u64>;
}

/// Seeded random adversary with bounded fairness: every robot is activated
/// at least once every `bound * k` steps.
pub struct RandomAdversary {
    rng: ChaCha8Rng,
    pub bound: u64,
}

impl RandomAdversary {
    pub fn new(seed: u64, bound: u64) -> Self {
        RandomAdversary { rng: ChaCha8Rng::seed_from_u64(seed), bound }
    }
}

impl Scheduler for RandomAdversary {
    fn choose(&mut self, state: &SimState) -> Choice {
        let k = state.robots.len() as u64;
        let mut picked: Vec<usize> = Vec::new();
        for r in &state.robots {
            let must = state.step + 1 - r.last_activated >= self.bound * k;
            if must || self.rng.gen_bool(0.5) {
                picked.push(r.id);
            }
        }
        if picked.is_empty() {
            picked.push(self.rng.gen_range(0..state.robots.len()));
        }
        picked
            .into_iter()
            .map(|id| {
                let act = match &state.robots[id].pending {
                    Some(dests) => Action::Move(self.rng.gen_range(0..dests.len())),
                    None => Action::Look,
                };
                (id, act)
            })
            .collect()
    }

    fn fairness_gap(&self, k: usize) -> Option<u64> {
        Some(self.bound * k as u64)
    }
}

/// Fully synchronous scheduler: everyone acts every step, first destination
/// on adversary choices.
pub struct GreedyAll;

impl Scheduler for GreedyAll {
    fn choose(&mut self, state: &SimState) -> Choice {
        state
            .robots
            .iter()
            .map(|r| {
                let act = if r.pending.is_some() { Action::Move(0) } else { Action::Look };
                (r.id, act)
            })
            .collect()
    }

    fn fairness_gap(&self, _k: usize) -> Option<u64> {
        Some(1)
    }
}

/// Replays a fixed script, typically parsed from a trace file.
pub struct Scripted {
    steps: std::vec::IntoIter<Choice>,
}

impl Scripted {
    pub fn new(steps: Vec<Choice>) -> Self {
        Scripted { steps: steps.into_iter() }
    }
}

impl Scheduler for Scripted {
    fn choose(&mut self, _state: &SimState) -> Choice {
        self.steps.next().unwrap_or_default()
    }

    fn fairness_gap(&self, _k: usize) -> Option<u64> {
        None
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceActivation {
    pub robot_id: usize,
    pub action: String,
    pub from: [u16; 2],
    pub to: Option<[u16; 2]>,
    pub set_label: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceRecord {
    pub step: u64,
    pub activations: Vec<TraceActivation>,
    pub occupancy: Vec<[u32; 3]>,
}

impl TraceRecord {
    fn of(state: &SimState, step: u64, activations: Vec<TraceActivation>) -> Self {
        let occupancy = state
            .counts()
            .into_iter()
            .map(|((r, p), n)| [r as u32, p as u32, n])
            .collect();
        TraceRecord { step, activations, occupancy }
    }
}

/// Applies one scheduler decision. Looks snapshot the pre-step occupancy;
/// all moves within the step are simultaneous.
pub fn step(state: &mut SimState, choice: &Choice) -> Result<Vec<TraceActivation>, SimError> {
    let pre = state.grid();
    let label = classify(&pre).name().to_string();
    let mut acts = Vec::with_capacity(choice.len());
    let mut moves: Vec<(usize, Coord)> = Vec::new();
    for (id, action) in choice {
        let r = &state.robots[*id];
        match action {
            Action::Look => {
                let m = state.count_at(r.at) > 1;
                let dests = decide(&pre, r.at, m)?;
                acts.push(TraceActivation {
                    robot_id: *id,
                    action: "look".into(),
                    from: [r.at.ring, r.at.pos],
                    to: None,
                    set_label: label.clone(),
                });
                state.robots[*id].pending = dests;
            }
            Action::Move(idx) => {
                if let Some(dests) = &r.pending {
                    let dest = dests[idx % dests.len()];
                    moves.push((*id, dest));
                }
            }
            Action::MoveTo(dest) => match &r.pending {
                Some(dests) if dests.contains(dest) => moves.push((*id, *dest)),
                Some(_) => {
                    return Err(SimError::Script {
                        robot: *id,
                        reason: format!("({}, {}) is not a pending destination", dest.ring, dest.pos),
                    })
                }
                None => {
                    return Err(SimError::Script { robot: *id, reason: "no pending move".into() })
                }
            },
        }
        state.robots[*id].last_activated = state.step + 1;
    }
    for (id, dest) in moves {
        let from = state.robots[id].at;
        debug_assert_eq!(crate::torus::dist(&state.dims, from, dest), 1);
        acts.push(TraceActivation {
            robot_id: id,
            action: "move".into(),
            from: [from.ring, from.pos],
            to: Some([dest.ring, dest.pos]),
            set_label: label.clone(),
        });
        state.robots[id].at = dest;
        state.robots[id].pending = None;
    }
    state.step += 1;
    Ok(acts)
}

/// Per-step checks of the paper's safety claims. Phase-1 transition graph
/// figures are not reproducible from the text, so phase-1 legality is
/// enforced through the maximal-ring monotone and the one-way phase switch;
/// the sp chain follows the convergence lemmas.
pub struct Hooks {
    unique_seen: bool,
    phase2_seen: bool,
}

impl Hooks {
    pub fn new() -> Self {
        Hooks { unique_seen: false, phase2_seen: false }
    }

    pub fn check(&mut self, pre: &SimState, post: &SimState) -> Vec<String> {
        let mut out = Vec::new();
        let (gpre, gpost) = (pre.grid(), post.grid());
        let (lpre, lpost) = (classify(&gpre), classify(&gpost));
        let pre_unique = self.unique_seen || unique_max(&gpre).is_some();

        let pre_counts = pre.counts();
        let post_counts = post.counts();
        for (&node, &n) in &post_counts {
            if n > 1 && pre_counts.get(&node).copied().unwrap_or(0) <= 1 && !pre_unique {
                // Before the maximal ring is unique, only the full-ring
                // thinning rule may stack robots, and it stacks exactly two
                // at the border of the fresh hole.
                let legal = lpre == Label::NotUnique
                    && maximal_rings(&gpre).0 == pre.dims.ell
                    && n == 2
                    && gpost.nb_ring(node.0) == pre.dims.ell - 1;
                if !legal {
                    out.push(format!(
                        "multiplicity-discipline: tower of {n} created at ({}, {}) before the maximal ring is unique",
                        node.0, node.1
                    ));
                }
            }
        }

        if pre_unique {
            let (_, mpre) = maximal_rings(&gpre);
            let (_, mpost) = maximal_rings(&gpost);
            if mpost.len() > mpre.len() {
                out.push(format!(
                    "max-count-increase: {} maximal rings grew to {}",
                    mpre.len(),
                    mpost.len()
                ));
            }
        }

        if self.phase2_seen && !lpost.is_phase2() {
            out.push(format!("phase-regression: re-entered {}", lpost.name()));
        }
        if lpre.is_phase2() && lpost.is_phase2() {
            let legal: &[Label] = match lpre {
                Label::Pr => &[Label::Pr, Label::Ls, Label::Sp1, Label::Sp2, Label::Sp3],
                Label::Ls => &[Label::Ls, Label::Sp1, Label::Sp2, Label::Sp3],
                Label::Sp1 => &[Label::Sp1, Label::Sp2],
                Label::Sp2 => &[Label::Sp2, Label::Sp3],
                Label::Sp3 => &[Label::Sp3, Label::Sp4],
                Label::Sp4 => &[Label::Sp4, Label::Gathered],
                Label::Gathered => &[Label::Gathered],
                _ => unreachable!(),
            };
            if !legal.contains(&lpost) {
                out.push(format!(
                    "illegal-transition: {} to {}",
                    lpre.name(),
                    lpost.name()
                ));
            }
        }

        let post_mult = post_counts.values().any(|&n| n > 1);
        if !lpre.is_phase2() && !lpost.is_phase2() && !post_mult && !is_rigid(&gpost) {
            out.push("rigidity: phase-1 configuration without towers lost rigidity".into());
        }

        self.unique_seen = pre_unique || unique_max(&gpost).is_some();
        self.phase2_seen = self.phase2_seen || lpost.is_phase2();
        out
    }
}

impl Default for Hooks {
    fn default() -> Self {
        Self::new()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Gathered { step: u64, node: Coord },
    Timeout,
    Violation { id: String },
}

pub struct RunResult {
    pub outcome: Outcome,
    pub steps: u64,
}

pub fn run(
    state: &mut SimState,
    sched: &mut dyn Scheduler,
    max_steps: u64,
    hooks_on: bool,
    mut trace: Option<&mut dyn Write>,
) -> Result<RunResult, SimError> {
    let gap = sched.fairness_gap(state.robots.len());
    let mut hooks = Hooks::new();
    loop {
        if state.gathered() {
            return Ok(RunResult {
                outcome: Outcome::Gathered { step: state.step, node: state.robots[0].at },
                steps: state.step,
            });
        }
        if state.step >= max_steps {
            return Ok(RunResult { outcome: Outcome::Timeout, steps: state.step });
        }
        let choice = sched.choose(state);
        let pre = state.clone();
        let acts = match step(state, &choice) {
            Ok(a) => a,
            Err(SimError::Protocol(e)) => {
                return Ok(RunResult {
                    outcome: Outcome::Violation { id: format!("decision-error: {e}") },
                    steps: state.step,
                })
            }
            Err(e) => return Err(e),
        };
        if let Some(w) = trace.as_deref_mut() {
            let rec = TraceRecord::of(state, state.step, acts);
            serde_json::to_writer(&mut *w, &rec)
                .map_err(|e| SimError::Input(format!("trace write failed: {e}")))?;
            writeln!(w).map_err(|e| SimError::Input(format!("trace write failed: {e}")))?;
        }
        if hooks_on {
            if let Some(v) = hooks.check(&pre, state).into_iter().next() {
                return Ok(RunResult { outcome: Outcome::Violation { id: v }, steps: state.step });
            }
        }
        if let Some(gap) = gap {
            for r in &state.robots {
                debug_assert!(
                    state.step - r.last_activated <= gap,
                    "scheduler broke its own fairness bound"
                );
            }
        }
    }
}

/// Rebuilds the scheduler script encoded in a trace.
pub fn script_from_trace(records: &[TraceRecord]) -> Vec<Choice> {
    records
        .iter()
        .map(|rec| {
            rec.activations
                .iter()
                .map(|a| {
                    let act = match a.action.as_str() {
                        "look" => Action::Look,
                        _ => {
                            let to = a.to.expect("move activation carries a destination");
                            Action::MoveTo(Coord::new(to[0], to[1]))
                        }
                    };
                    (a.robot_id, act)
                })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dims() -> TorusDims {
        TorusDims::new(6, 5, false).unwrap()
    }

    fn state(nodes: &[(u16, u16)]) -> SimState {
        let pos: Vec<Coord> = nodes.iter().map(|&(r, p)| Coord::new(r, p)).collect();
        SimState::new(dims(), &pos).unwrap()
    }

    #[test]
    fn rejects_duplicate_starts() {
        let pos = vec![Coord::new(0, 0), Coord::new(0, 0)];
        assert!(SimState::new(dims(), &pos).is_err());
    }

    #[test]
    fn greedy_run_gathers_a_small_instance() {
        // sp-4 block of three: two steps of the synchronous scheduler fold
        // it onto the middle node.
        let mut s = state(&[(2, 5), (2, 0), (2, 1)]);
        let mut sched = GreedyAll;
        let res = run(&mut s, &mut sched, 100, true, None).unwrap();
        match res.outcome {
            Outcome::Gathered { node, .. } => assert_eq!(node, Coord::new(2, 0)),
            other => panic!("expected gathering, got {other:?}"),
        }
    }

    #[test]
    fn seeded_adversary_is_deterministic() {
        let start = [(2, 0), (2, 1), (2, 3), (1, 0)];
        let mut t1 = Vec::new();
        let mut t2 = Vec::new();
        for buf in [&mut t1, &mut t2] {
            let mut s = state(&start);
            let mut sched = RandomAdversary::new(42, 3);
            run(&mut s, &mut sched, 10_000, true, Some(buf)).unwrap();
        }
        assert_eq!(t1, t2);
    }

    #[test]
    fn trace_replay_reproduces_the_final_state() {
        let start = [(2, 0), (2, 2), (1, 5), (0, 1)];
        let mut buf = Vec::new();
        let mut s1 = state(&start);
        let mut sched = RandomAdversary::new(7, 3);
        let r1 = run(&mut s1, &mut sched, 10_000, false, Some(&mut buf)).unwrap();

        let records: Vec<TraceRecord> = String::from_utf8(buf)
            .unwrap()
            .lines()
            .map(|l| serde_json::from_str(l).unwrap())
            .collect();
        let mut s2 = state(&start);
        let mut replay = Scripted::new(script_from_trace(&records));
        let r2 = run(&mut s2, &mut replay, 10_000, false, None).unwrap();
        assert_eq!(r1.outcome, r2.outcome);
        assert_eq!(s1.counts(), s2.counts());
    }

    #[test]
    fn outdated_move_still_lands_on_look_time_destination() {
        // Robot 0 looks, then robot 1 looks and moves, then robot 0 moves
        // on its outdated view: it still executes the old destination.
        let mut s = state(&[(2, 5), (2, 0), (2, 1)]);
        step(&mut s, &vec![(0, Action::Look)]).unwrap();
        let pending = s.robots[0].pending.clone().unwrap();
        step(&mut s, &vec![(2, Action::Look)]).unwrap();
        step(&mut s, &vec![(2, Action::Move(0))]).unwrap();
        step(&mut s, &vec![(0, Action::Move(0))]).unwrap();
        assert_eq!(s.robots[0].at, pending[0]);
    }

    #[test]
    fn gathered_state_is_a_fixpoint() {
        let mut s = state(&[(2, 5), (2, 0), (2, 1)]);
        let mut sched = GreedyAll;
        let res = run(&mut s, &mut sched, 50, true, None).unwrap();
        assert!(matches!(res.outcome, Outcome::Gathered { .. }));
        let g = s.grid();
        assert_eq!(classify(&g), Label::Gathered);
        let acts = step(&mut s, &vec![(0, Action::Look), (1, Action::Look), (2, Action::Look)]).unwrap();
        assert!(s.robots.iter().all(|r| r.pending.is_none()));
        assert_eq!(acts.len(), 3);
        assert!(s.gathered());
    }
}
