use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use torus_gathering::classify::{self, detect_target};
use torus_gathering::explore::{self, ExploreOutcome};
use torus_gathering::protocol;
use torus_gathering::sim::{self, GreedyAll, Outcome, RandomAdversary, Scheduler};
use torus_gathering::torus::{Coord, Grid, TorusDims};

fn coords(positions: Vec<(u16, u16)>) -> Vec<Coord> {
    positions.into_iter().map(|(r, p)| Coord::new(r, p)).collect()
}

#[pyclass(name = "Torus")]
#[derive(Clone, Copy)]
struct PyTorus {
    dims: TorusDims,
}

#[pymethods]
impl PyTorus {
    #[new]
    #[pyo3(signature = (ell, big_l, strict = false))]
    fn new(ell: u16, big_l: u16, strict: bool) -> PyResult<Self> {
        TorusDims::new(ell, big_l, strict)
            .map(|dims| PyTorus { dims })
            .map_err(|e| PyValueError::new_err(e.to_string()))
    }

    #[getter]
    fn ell(&self) -> u16 {
        self.dims.ell
    }

    #[getter]
    fn rings(&self) -> u16 {
        self.dims.big_l
    }

    fn nodes(&self) -> usize {
        self.dims.n()
    }

    fn classify(&self, positions: Vec<(u16, u16)>) -> String {
        let g = Grid::from_nodes(self.dims, &coords(positions));
        classify::classify(&g).name().to_string()
    }

    fn is_rigid(&self, positions: Vec<(u16, u16)>) -> bool {
        classify::is_rigid(&Grid::from_nodes(self.dims, &coords(positions)))
    }

    fn target(&self, positions: Vec<(u16, u16)>) -> Option<(u16, u16, (u16, u16))> {
        let g = Grid::from_nodes(self.dims, &coords(positions));
        detect_target(&g).map(|t| (t.max, t.target, (t.v_target.ring, t.v_target.pos)))
    }

    /// Destinations the protocol offers a robot at `at`, given whether it
    /// sees a multiplicity on its own node. None means the robot stays.
    #[pyo3(signature = (positions, at, multiplicity = false))]
    fn decide(
        &self,
        positions: Vec<(u16, u16)>,
        at: (u16, u16),
        multiplicity: bool,
    ) -> PyResult<Option<Vec<(u16, u16)>>> {
        let g = Grid::from_nodes(self.dims, &coords(positions));
        protocol::decide(&g, Coord::new(at.0, at.1), multiplicity)
            .map(|o| o.map(|v| v.into_iter().map(|c| (c.ring, c.pos)).collect()))
            .map_err(|e| PyRuntimeError::new_err(e.to_string()))
    }

    /// All enabled moves as {(ring, pos): [(ring, pos), ...]}.
    fn enabled_moves(
        &self,
        positions: Vec<(u16, u16)>,
    ) -> PyResult<Vec<((u16, u16), Vec<(u16, u16)>)>> {
        let g = Grid::from_nodes(self.dims, &coords(positions));
        let f = |_c: Coord| false;
        protocol::enabled_moves(&g, protocol::MultKnowledge::Oracle(&f))
            .map(|set| {
                set.into_iter()
                    .map(|e| {
                        (
                            (e.from.ring, e.from.pos),
                            e.dests.into_iter().map(|c| (c.ring, c.pos)).collect(),
                        )
                    })
                    .collect()
            })
            .map_err(|e| PyRuntimeError::new_err(e.to_string()))
    }
}

#[pyclass(name = "Simulation")]
struct PySimulation {
    state: sim::SimState,
}

#[pymethods]
impl PySimulation {
    #[new]
    fn new(torus: PyTorus, positions: Vec<(u16, u16)>) -> PyResult<Self> {
        sim::SimState::new(torus.dims, &coords(positions))
            .map(|state| PySimulation { state })
            .map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn gathered(&self) -> bool {
        self.state.gathered()
    }

    fn occupancy(&self) -> Vec<((u16, u16), u32)> {
        self.state.counts().into_iter().collect()
    }

    /// Run to completion under a seeded adversarial scheduler
    /// ("random", default) or a synchronous one ("greedy").
    #[pyo3(signature = (max_steps = 10_000, seed = 0, fairness_bound = 3, scheduler = "random", hooks = true))]
    fn run(
        &mut self,
        max_steps: u64,
        seed: u64,
        fairness_bound: u64,
        scheduler: &str,
        hooks: bool,
    ) -> PyResult<(String, u64, Option<(u16, u16)>)> {
        let mut sched: Box<dyn Scheduler> = match scheduler {
            "greedy" => Box::new(GreedyAll),
            "random" => Box::new(RandomAdversary::new(seed, fairness_bound)),
            other => return Err(PyValueError::new_err(format!("unknown scheduler: {other}"))),
        };
        let res = sim::run(&mut self.state, sched.as_mut(), max_steps, hooks, None)
            .map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
        Ok(match res.outcome {
            Outcome::Gathered { step, node } => {
                ("gathered".into(), step, Some((node.ring, node.pos)))
            }
            Outcome::Timeout => ("timeout".into(), res.steps, None),
            Outcome::Violation { id } => (id, res.steps, None),
        })
    }
}

/// Exhaustively explore every fair schedule up to `depth` moves.
/// Returns (outcome, states_visited, max_depth).
#[pyfunction]
#[pyo3(signature = (torus, positions, depth = 100, fairness = 2, force = false))]
fn check_all_schedules(
    torus: PyTorus,
    positions: Vec<(u16, u16)>,
    depth: u32,
    fairness: u16,
    force: bool,
) -> PyResult<(String, usize, u32)> {
    let state = sim::SimState::new(torus.dims, &coords(positions))
        .map_err(|e| PyValueError::new_err(e.to_string()))?;
    let report = explore::explore(&state, depth, fairness, force)
        .map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    let outcome = match report.outcome {
        ExploreOutcome::AllGathered => "all-gathered".to_string(),
        ExploreOutcome::DepthBound => "depth-bound".to_string(),
        ExploreOutcome::Counterexample { kind, .. } => format!("counterexample: {kind:?}"),
    };
    Ok((outcome, report.states_visited, report.max_depth))
}

#[pymodule]
fn torus_gathering_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyTorus>()?;
    m.add_class::<PySimulation>()?;
    m.add_function(wrap_pyfunction!(check_all_schedules, m)?)?;
    Ok(())
}
