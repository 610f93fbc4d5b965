mod scenario;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use itertools::Itertools;
use rayon::prelude::*;

use scenario::{Scenario, SchedulerSpec};
use torus_gathering::classify::{
    classify, detect_target, gamma, is_periodic, is_rigid, pos_axes, ring_axes, unique_max,
};
use torus_gathering::explore::{explore, ExploreOutcome};
use torus_gathering::sim::{
    run, script_from_trace, GreedyAll, Outcome, RandomAdversary, Scheduler, Scripted,
    SimState, TraceRecord,
};
use torus_gathering::torus::{Coord, Grid, TorusDims};

const EXIT_OK: u8 = 0;
const EXIT_TIMEOUT: u8 = 2;
const EXIT_VIOLATION: u8 = 3;
const EXIT_REJECTED: u8 = 4;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(name = "tgather", about = "Gathering of oblivious robots on a torus grid")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one simulation from a scenario file.
    Sim {
        scenario: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        max_steps: u64,
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Replay a recorded trace instead of using the scenario scheduler.
        #[arg(long)]
        replay: Option<PathBuf>,
        #[arg(long)]
        hooks: bool,
        #[arg(long)]
        allow_nonrigid: bool,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Enumerate k-robot configurations on an (ell, L) torus.
    Enum {
        #[arg(long)]
        ell: u16,
        #[arg(long = "L")]
        big_l: u16,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        rigid_only: bool,
        /// Deduplicate modulo torus automorphisms.
        #[arg(long)]
        canonical: bool,
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Run many seeded adversaries over a scenario set.
    Campaign {
        #[arg(long, conflicts_with_all = ["ell", "big_l", "k"])]
        from: Option<PathBuf>,
        #[arg(long)]
        ell: Option<u16>,
        #[arg(long = "L")]
        big_l: Option<u16>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = 20)]
        schedules: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10_000)]
        max_steps: u64,
        /// Where to persist counterexample traces.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Exhaustively check every fair schedule up to a depth bound.
    Check {
        scenario: PathBuf,
        #[arg(long, default_value_t = 200)]
        depth: u32,
        #[arg(long, default_value_t = 2)]
        fairness: u16,
        /// Override the state-space feasibility guard.
        #[arg(long)]
        force: bool,
    },
    /// Print the classification of a scenario.
    Classify {
        scenario: PathBuf,
        #[arg(long)]
        allow_nonrigid: bool,
    },
}

fn env_seed() -> Option<u64> {
    std::env::var("GATHER_SEED").ok().and_then(|s| s.parse().ok())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.cmd) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn dispatch(cmd: Cmd) -> anyhow::Result<u8> {
    match cmd {
        Cmd::Sim { scenario, max_steps, trace, replay, hooks, allow_nonrigid, seed } => {
            cmd_sim(&scenario, max_steps, trace, replay, hooks, allow_nonrigid, seed)
        }
        Cmd::Enum { ell, big_l, k, rigid_only, canonical, emit } => {
            cmd_enum(ell, big_l, k, rigid_only, canonical, emit)
        }
        Cmd::Campaign { from, ell, big_l, k, schedules, seed, max_steps, out } => {
            cmd_campaign(from, ell, big_l, k, schedules, seed, max_steps, out)
        }
        Cmd::Check { scenario, depth, fairness, force } => {
            cmd_check(&scenario, depth, fairness, force)
        }
        Cmd::Classify { scenario, allow_nonrigid } => cmd_classify(&scenario, allow_nonrigid),
    }
}

fn build_scheduler(spec: &SchedulerSpec, seed_override: Option<u64>) -> Box<dyn Scheduler> {
    let seed = env_seed().or(seed_override).unwrap_or(spec.seed);
    match spec.kind.as_str() {
        "greedy" | "greedy-all" => Box::new(GreedyAll),
        _ => Box::new(RandomAdversary::new(seed, spec.fairness_bound)),
    }
}

fn cmd_sim(
    path: &std::path::Path,
    max_steps: u64,
    trace: Option<PathBuf>,
    replay: Option<PathBuf>,
    hooks: bool,
    allow_nonrigid: bool,
    seed: Option<u64>,
) -> anyhow::Result<u8> {
    let sc = Scenario::load(path)?;
    let mut state = match sc.state() {
        Ok(s) => s,
        Err(e) => {
            eprintln!("rejected: {e}");
            return Ok(EXIT_REJECTED);
        }
    };
    if !allow_nonrigid && !is_rigid(&state.grid()) {
        eprintln!("rejected: initial configuration is not rigid");
        return Ok(EXIT_REJECTED);
    }
    let mut sched: Box<dyn Scheduler> = match replay {
        Some(p) => {
            let text = std::fs::read_to_string(p)?;
            let records: Vec<TraceRecord> = text
                .lines()
                .map(serde_json::from_str)
                .collect::<Result<_, _>>()?;
            Box::new(Scripted::new(script_from_trace(&records)))
        }
        None => build_scheduler(&sc.scheduler.clone().unwrap_or_default(), seed),
    };
    let hooks_on = hooks || sc.flags.as_ref().map(|f| f.hooks).unwrap_or(false);
    let mut trace_file = match &trace {
        Some(p) => Some(std::fs::File::create(p)?),
        None => None,
    };
    let res = run(
        &mut state,
        sched.as_mut(),
        max_steps,
        hooks_on,
        trace_file.as_mut().map(|f| f as &mut dyn Write),
    )?;
    match res.outcome {
        Outcome::Gathered { step, node } => {
            println!("gathered step={step} node=[{},{}]", node.ring, node.pos);
            Ok(EXIT_OK)
        }
        Outcome::Timeout => {
            println!("timeout steps={}", res.steps);
            Ok(EXIT_TIMEOUT)
        }
        Outcome::Violation { id } => {
            println!("violation step={} id={id}", res.steps);
            Ok(EXIT_VIOLATION)
        }
    }
}

fn all_configs(dims: TorusDims, k: usize) -> impl Iterator<Item = Vec<Coord>> {
    let nodes: Vec<Coord> = (0..dims.big_l)
        .flat_map(move |r| (0..dims.ell).map(move |p| Coord::new(r, p)))
        .collect();
    nodes.into_iter().combinations(k)
}

fn cmd_enum(
    ell: u16,
    big_l: u16,
    k: usize,
    rigid_only: bool,
    canonical: bool,
    emit: Option<PathBuf>,
) -> anyhow::Result<u8> {
    let dims = TorusDims::new(ell, big_l, false).map_err(|e| anyhow::anyhow!("{e}"))?;
    let n = dims.n() as usize;
    anyhow::ensure!(k <= n, "k exceeds the node count");
    let feasible = (0..k).try_fold(1u64, |acc, i| {
        acc.checked_mul((n - i) as u64).map(|x| x / (i as u64 + 1))
    });
    anyhow::ensure!(
        feasible.map(|c| c <= 5_000_000).unwrap_or(false),
        "enumeration would be too large"
    );
    if let Some(dir) = &emit {
        std::fs::create_dir_all(dir)?;
    }
    let mut seen = std::collections::BTreeSet::new();
    let mut total = 0u64;
    let mut kept = 0u64;
    for combo in all_configs(dims, k) {
        total += 1;
        let g = Grid::from_nodes(dims, &combo);
        if rigid_only && !is_rigid(&g) {
            continue;
        }
        if canonical {
            let key = torus_gathering::auto::canonical_nodes(&dims, &combo);
            if !seen.insert(key) {
                continue;
            }
        }
        kept += 1;
        if let Some(dir) = &emit {
            let sc = Scenario {
                dims: scenario::Dims { ell, big_l },
                robots: combo.iter().map(|c| [c.ring, c.pos]).collect(),
                scheduler: None,
                flags: None,
            };
            let path = dir.join(format!("scenario-{:06}.json", kept));
            std::fs::write(path, serde_json::to_string(&sc)?)?;
        }
    }
    println!("total={total} kept={kept}");
    Ok(EXIT_OK)
}

#[derive(Default)]
struct Summary {
    runs: u64,
    gathered: u64,
    timeouts: u64,
    violations: u64,
    steps_hist: std::collections::BTreeMap<u64, u64>,
}

impl Summary {
    fn absorb(&mut self, other: Summary) {
        self.runs += other.runs;
        self.gathered += other.gathered;
        self.timeouts += other.timeouts;
        self.violations += other.violations;
        for (b, n) in other.steps_hist {
            *self.steps_hist.entry(b).or_default() += n;
        }
    }
}

fn cmd_campaign(
    from: Option<PathBuf>,
    ell: Option<u16>,
    big_l: Option<u16>,
    k: Option<usize>,
    schedules: u64,
    seed: u64,
    max_steps: u64,
    out: PathBuf,
) -> anyhow::Result<u8> {
    let seed = env_seed().unwrap_or(seed);
    let starts: Vec<(String, TorusDims, Vec<Coord>)> = match (from, ell, big_l, k) {
        (Some(dir), ..) => {
            let mut v = Vec::new();
            let mut paths: Vec<_> = std::fs::read_dir(&dir)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().map(|x| x == "json").unwrap_or(false))
                .collect();
            paths.sort();
            for p in paths {
                let sc = Scenario::load(&p)?;
                v.push((
                    p.file_stem().unwrap().to_string_lossy().into_owned(),
                    sc.dims()?,
                    sc.positions(),
                ));
            }
            anyhow::ensure!(!v.is_empty(), "no scenario files in the directory");
            v
        }
        (None, Some(ell), Some(big_l), Some(k)) => {
            let dims = TorusDims::new(ell, big_l, false).map_err(|e| anyhow::anyhow!("{e}"))?;
            let mut seen = std::collections::BTreeSet::new();
            let mut v = Vec::new();
            for combo in all_configs(dims, k) {
                let g = Grid::from_nodes(dims, &combo);
                if !is_rigid(&g) {
                    continue;
                }
                let key = torus_gathering::auto::canonical_nodes(&dims, &combo);
                if !seen.insert(key) {
                    continue;
                }
                v.push((format!("enum-{:06}", v.len()), dims, combo));
            }
            v
        }
        _ => anyhow::bail!("pass either --from DIR or all of --ell, --L, --k"),
    };

    let jobs: Vec<(usize, u64)> = (0..starts.len())
        .flat_map(|i| (0..schedules).map(move |s| (i, s)))
        .collect();
    let results: Vec<(Summary, Option<(String, u64)>)> = jobs
        .par_iter()
        .map(|&(i, s)| {
            let (name, dims, pos) = &starts[i];
            let mut summary = Summary { runs: 1, ..Default::default() };
            let mut state = SimState::new(*dims, pos).expect("enumerated state is valid");
            let mut sched = RandomAdversary::new(seed ^ (s.wrapping_mul(0x9E37_79B9_7F4A_7C15)), 3);
            let res = run(&mut state, &mut sched, max_steps, true, None)
                .expect("runner only fails on IO");
            let mut violation = None;
            match res.outcome {
                Outcome::Gathered { step, .. } => {
                    summary.gathered += 1;
                    *summary.steps_hist.entry(step / 100 * 100).or_default() += 1;
                }
                Outcome::Timeout => summary.timeouts += 1,
                Outcome::Violation { .. } => {
                    summary.violations += 1;
                    violation = Some((name.clone(), s));
                }
            }
            (summary, violation)
        })
        .collect();

    let mut total = Summary::default();
    let mut violations = Vec::new();
    for (s, v) in results {
        total.absorb(s);
        violations.extend(v);
    }
    // Persist a trace for each violating run so it can be replayed.
    for (name, s) in &violations {
        let (i, _) = starts
            .iter()
            .enumerate()
            .find(|(_, (n, ..))| n == name)
            .map(|(i, _)| (i, ()))
            .unwrap();
        let (_, dims, pos) = &starts[i];
        let mut state = SimState::new(*dims, pos).unwrap();
        let mut sched = RandomAdversary::new(seed ^ (s.wrapping_mul(0x9E37_79B9_7F4A_7C15)), 3);
        let mut f = std::fs::File::create(out.join(format!("violation-{name}-{s}.jsonl")))?;
        run(&mut state, &mut sched, max_steps, true, Some(&mut f))?;
    }

    println!(
        "runs={} gathered={} timeouts={} violations={}",
        total.runs, total.gathered, total.timeouts, total.violations
    );
    for (bucket, n) in &total.steps_hist {
        println!("steps[{bucket}..{}]={n}", bucket + 99);
    }
    if total.violations > 0 {
        Ok(EXIT_VIOLATION)
    } else if total.timeouts > 0 {
        Ok(EXIT_TIMEOUT)
    } else {
        Ok(EXIT_OK)
    }
}

fn cmd_check(path: &std::path::Path, depth: u32, fairness: u16, force: bool) -> anyhow::Result<u8> {
    let sc = Scenario::load(path)?;
    let state = match sc.state() {
        Ok(s) => s,
        Err(e) => {
            eprintln!("rejected: {e}");
            return Ok(EXIT_REJECTED);
        }
    };
    let report = match explore(&state, depth, fairness, force) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("rejected: {e}");
            return Ok(EXIT_REJECTED);
        }
    };
    println!("states_visited={} max_depth={}", report.states_visited, report.max_depth);
    match report.outcome {
        ExploreOutcome::AllGathered => {
            println!("outcome=all-gathered");
            Ok(EXIT_OK)
        }
        ExploreOutcome::DepthBound => {
            println!("outcome=depth-bound");
            Ok(EXIT_TIMEOUT)
        }
        ExploreOutcome::Counterexample { kind, script } => {
            println!("outcome=counterexample kind={kind:?} length={}", script.len());
            for (i, choice) in script.iter().enumerate() {
                println!("  step {i}: {choice:?}");
            }
            Ok(EXIT_VIOLATION)
        }
    }
}

fn cmd_classify(path: &std::path::Path, allow_nonrigid: bool) -> anyhow::Result<u8> {
    let sc = Scenario::load(path)?;
    let dims = sc.dims()?;
    let g = Grid::from_nodes(dims, &sc.positions());
    let rigid = is_rigid(&g);
    if !rigid && !allow_nonrigid {
        println!("rigid=false (pass --allow-nonrigid to classify anyway)");
        return Ok(EXIT_REJECTED);
    }
    let label = classify(&g);
    println!("label={}", label.name());
    println!("rigid={rigid}");
    println!("periodic={}", is_periodic(&g));
    let pa = pos_axes(&g);
    let ra = ring_axes(&g);
    for a in &pa {
        println!("axis=pos anchor2={a}");
    }
    for a in &ra {
        println!("axis=ring anchor2={a}");
    }
    if let Some(ti) = detect_target(&g) {
        println!(
            "max={} target={} secondary={} v_target=[{},{}]",
            ti.max, ti.target, ti.secondary, ti.v_target.ring, ti.v_target.pos
        );
    }
    if let Some((m, a, b)) = unique_max(&g) {
        let (na, nb) = (g.nb_ring(a), g.nb_ring(b));
        println!("unique_max={m} adj=[{a}:{na},{b}:{nb}]");
        if na > 1 && nb > 1 {
            let (li, lk) = if na <= nb { (a, b) } else { (b, a) };
            let gm = gamma(&g, li, lk);
            println!(
                "gamma: periodic={} pos_axes={:?} ring_axes={:?}",
                is_periodic(&gm),
                pos_axes(&gm),
                ring_axes(&gm)
            );
        }
    }
    Ok(EXIT_OK)
}
