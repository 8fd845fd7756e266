//! Batch runs over maps, agent counts, scenarios and pipeline variants.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};

use rayon::prelude::*;
use swarmnav_core::sim::{self, FailureReason, NoTrace, Outcome, RunResult, SimConfig};
use swarmnav_core::GridMap;

use crate::formats::Scenario;
use crate::trace::TraceWriter;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, clap::ValueEnum)]
pub enum Variant {
    /// ORCA with deadlock resolution by coordinated groups.
    Coordinated,
    /// ORCA path following only.
    Baseline,
}

impl Variant {
    pub fn tag(self) -> &'static str {
        match self {
            Variant::Coordinated => "coordinated",
            Variant::Baseline => "baseline",
        }
    }

    pub fn apply(self, config: SimConfig) -> SimConfig {
        SimConfig {
            coordination_enabled: self == Variant::Coordinated,
            ..config
        }
    }
}

/// Scenarios for one map. With `Prefix`, a run with `n` agents uses the first
/// `n` tasks of every scenario; with `PerCount` each agent count has its own
/// scenario list.
#[derive(Clone, Debug)]
pub enum ScenarioSet {
    Prefix(Vec<Scenario>),
    PerCount(BTreeMap<usize, Vec<Scenario>>),
}

impl ScenarioSet {
    pub fn for_count(&self, n: usize) -> &[Scenario] {
        match self {
            ScenarioSet::Prefix(v) => v,
            ScenarioSet::PerCount(m) => m.get(&n).map_or(&[], Vec::as_slice),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SweepMap {
    pub name: String,
    pub map: GridMap,
    pub scenarios: ScenarioSet,
}

#[derive(Clone, Debug)]
pub struct SweepSpec {
    pub maps: Vec<SweepMap>,
    pub agent_counts: Vec<usize>,
    pub variants: Vec<Variant>,
    pub config: SimConfig,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), String> {
        if self.agent_counts.windows(2).any(|w| w[0] >= w[1]) {
            return Err("agent counts must be strictly increasing".into());
        }
        for m in &self.maps {
            for &n in &self.agent_counts {
                for (q, s) in m.scenarios.for_count(n).iter().enumerate() {
                    if s.len() < n {
                        return Err(format!(
                            "map {}: scenario {q} has {} tasks, need {n}",
                            m.name,
                            s.len()
                        ));
                    }
                    s.check_against(&m.map)
                        .map_err(|e| format!("map {}: scenario {q}: {e}", m.name))?;
                }
            }
        }
        self.config.validate().map_err(|e| e.to_string())
    }
}

/// One finished run. `result` is `Err` with the panic message if the run
/// panicked.
#[derive(Clone, Debug)]
pub struct RunRecord {
    pub map: String,
    pub variant: Variant,
    pub agents: usize,
    pub scenario: usize,
    pub result: Result<RunResult, String>,
    /// The trace bytes as produced by [`TraceWriter`], when requested.
    pub trace: Option<Vec<u8>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Reason {
    Timeout,
    Collision,
    NoPath,
    Internal,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub map: String,
    pub variant: Variant,
    pub agents: usize,
    pub runs: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub mean_makespan_success: Option<f64>,
    pub mean_flowtime_success: Option<f64>,
    pub timeouts: usize,
    pub collisions: usize,
    pub no_path: usize,
    pub internal: usize,
}

pub const CSV_HEADER: &str =
    "map,variant,agents,runs,success_rate,mean_makespan_success,mean_flowtime_success,failures_by_reason";

impl SweepRow {
    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:.4}"));
        format!(
            "{},{},{},{},{:.4},{},{},timeout:{};collision:{};no_path:{};internal:{}",
            self.map,
            self.variant.tag(),
            self.agents,
            self.runs,
            self.success_rate,
            opt(self.mean_makespan_success),
            opt(self.mean_flowtime_success),
            self.timeouts,
            self.collisions,
            self.no_path,
            self.internal
        )
    }
}

struct Job<'a> {
    map: &'a SweepMap,
    variant: Variant,
    agents: usize,
    scenario: usize,
}

/// Runs one prefix of one scenario; a panic becomes `Err`.
pub fn run_scenario(
    map: &GridMap,
    scen: &Scenario,
    agents: usize,
    config: SimConfig,
    trace: bool,
) -> (Result<RunResult, String>, Option<Vec<u8>>) {
    let (starts, goals) = scen.prefix(agents);
    let out = catch_unwind(AssertUnwindSafe(|| {
        let mut state = sim::init_run(map, &starts, &goals, config);
        if trace {
            let mut w = TraceWriter::new(Some(Vec::new()), None::<Vec<u8>>);
            let r = sim::run_to_completion(&mut state, &mut w);
            let (t, _) = w.finish().expect("writing to memory");
            (r, t)
        } else {
            (sim::run_to_completion(&mut state, &mut NoTrace), None)
        }
    }));
    match out {
        Ok((r, t)) => (Ok(r), t),
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            (Err(msg), None)
        }
    }
}

/// Runs every (map, variant, agent count, scenario) combination on `jobs`
/// threads. Records come back in that nesting order whatever the thread
/// count.
pub fn run_sweep_records(
    spec: &SweepSpec,
    jobs: usize,
    trace: bool,
) -> Result<Vec<RunRecord>, String> {
    spec.validate()?;
    let mut work = Vec::new();
    for m in &spec.maps {
        for &variant in &spec.variants {
            for &agents in &spec.agent_counts {
                for scenario in 0..m.scenarios.for_count(agents).len() {
                    work.push(Job {
                        map: m,
                        variant,
                        agents,
                        scenario,
                    });
                }
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| e.to_string())?;
    let records = pool.install(|| {
        work.par_iter()
            .map(|j| {
                let scen = &j.map.scenarios.for_count(j.agents)[j.scenario];
                let (result, trace) = run_scenario(
                    &j.map.map,
                    scen,
                    j.agents,
                    j.variant.apply(spec.config),
                    trace,
                );
                RunRecord {
                    map: j.map.name.clone(),
                    variant: j.variant,
                    agents: j.agents,
                    scenario: j.scenario,
                    result,
                    trace,
                }
            })
            .collect()
    });
    Ok(records)
}

/// Aggregates records into one row per (map, variant, agent count) that had
/// at least one run. Rows follow the order of first appearance.
pub fn aggregate(records: &[RunRecord]) -> Vec<SweepRow> {
    let mut order: Vec<(String, Variant, usize)> = Vec::new();
    let mut groups: BTreeMap<(String, Variant, usize), Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        let key = (r.map.clone(), r.variant, r.agents);
        if !groups.contains_key(&key) {
            order.push(key.clone());
        }
        groups.entry(key).or_default().push(r);
    }
    order
        .into_iter()
        .map(|key| {
            let runs = &groups[&key];
            let mut reasons: BTreeMap<Reason, usize> = BTreeMap::new();
            let (mut ok, mut make, mut flow) = (0usize, 0.0, 0.0);
            for r in runs {
                match &r.result {
                    Ok(res) => match res.outcome {
                        Outcome::Success => {
                            ok += 1;
                            make += res.makespan;
                            flow += res.flowtime;
                        }
                        Outcome::Failure(FailureReason::Timeout) => {
                            *reasons.entry(Reason::Timeout).or_default() += 1
                        }
                        Outcome::Failure(FailureReason::Collision) => {
                            *reasons.entry(Reason::Collision).or_default() += 1
                        }
                        Outcome::Failure(FailureReason::NoPath) => {
                            *reasons.entry(Reason::NoPath).or_default() += 1
                        }
                    },
                    Err(_) => *reasons.entry(Reason::Internal).or_default() += 1,
                }
            }
            let mean = |s: f64| if ok > 0 { Some(s / ok as f64) } else { None };
            let count = |r| reasons.get(&r).copied().unwrap_or(0);
            SweepRow {
                map: key.0,
                variant: key.1,
                agents: key.2,
                runs: runs.len(),
                successes: ok,
                success_rate: ok as f64 / runs.len() as f64,
                mean_makespan_success: mean(make),
                mean_flowtime_success: mean(flow),
                timeouts: count(Reason::Timeout),
                collisions: count(Reason::Collision),
                no_path: count(Reason::NoPath),
                internal: count(Reason::Internal),
            }
        })
        .collect()
}

pub fn run_sweep(spec: &SweepSpec, jobs: usize) -> Result<Vec<SweepRow>, String> {
    Ok(aggregate(&run_sweep_records(spec, jobs, false)?))
}

pub fn rows_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{CSV_HEADER}");
    for r in rows {
        let _ = writeln!(out, "{}", r.to_csv());
    }
    out
}

pub fn write_csv(out: &mut impl Write, rows: &[SweepRow]) -> std::io::Result<()> {
    out.write_all(rows_to_csv(rows).as_bytes())
}
