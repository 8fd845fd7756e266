//! Command-line front end.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use swarmnav_core::grid::generate_gaps_map;
use swarmnav_core::sim::{self, SimConfig};

use crate::config::{read_config, set_key};
use crate::fixtures;
use crate::formats::{read_map, read_scen, write_map, write_scen, Scenario};
use crate::scenario::{generate_rooms_map, generate_scenarios, ScenarioKind};
use crate::sweep::{self, ScenarioSet, SweepMap, SweepSpec, Variant};
use crate::trace::TraceWriter;

#[derive(Parser, Debug)]
#[command(
    name = "swarmnav",
    version,
    about = "Multi-agent navigation with deadlock resolution"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write a synthetic map in MovingAI format.
    GenMap(GenMap),
    /// Sample scenarios for a map and write them as .scen files.
    GenScen(GenScen),
    /// Run one scenario, optionally writing a trace and an event log.
    Run(Run),
    /// Run a batch of scenarios and print success-rate statistics as CSV.
    Sweep(Sweep),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum MapKind {
    Gaps,
    Rooms,
    /// Two small rooms joined by a one-cell door.
    Door,
}

#[derive(Args, Debug)]
pub struct GenMap {
    #[arg(value_enum)]
    pub kind: MapKind,
    #[arg(long, default_value_t = 64)]
    pub size: usize,
    /// Number of one-cell passages (gaps maps).
    #[arg(long, default_value_t = 1)]
    pub passages: usize,
    /// Rooms per side (rooms maps).
    #[arg(long, default_value_t = 4)]
    pub rooms: usize,
    /// Door width in cells (rooms maps).
    #[arg(long, default_value_t = 2)]
    pub door: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, short)]
    pub out: PathBuf,
    /// Also write the four-agent door swap scenario here (door maps only).
    #[arg(long)]
    pub scen: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct GenScen {
    #[arg(long)]
    pub map: PathBuf,
    #[arg(long, value_enum)]
    pub kind: ScenarioKind,
    #[arg(long, default_value_t = 250)]
    pub count: usize,
    #[arg(long, default_value_t = 40)]
    pub agents: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Directory for `<map stem>-<index>.scen` files.
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Args, Debug)]
pub struct ConfigArgs {
    /// key = value configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override one configuration key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Disable coordinated groups (ORCA-only baseline).
    #[arg(long)]
    pub no_coordination: bool,
}

impl ConfigArgs {
    pub fn resolve(&self) -> Result<SimConfig> {
        let mut c = SimConfig::default();
        if let Some(p) = &self.config {
            c = read_config(p, c)?;
        }
        for o in &self.overrides {
            let (k, v) = o
                .split_once('=')
                .with_context(|| format!("--set {o:?}: expected KEY=VALUE"))?;
            set_key(&mut c, k, v)
                .map_err(anyhow::Error::msg)
                .with_context(|| format!("--set {o:?}"))?;
        }
        if self.no_coordination {
            c.coordination_enabled = false;
        }
        c.validate()?;
        Ok(c)
    }
}

#[derive(Args, Debug)]
pub struct Run {
    #[arg(long)]
    pub map: PathBuf,
    #[arg(long)]
    pub scen: PathBuf,
    /// Use the first N tasks (default: all).
    #[arg(long)]
    pub agents: Option<usize>,
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Per-step CSV trace.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Coordination events, one JSON object per line.
    #[arg(long)]
    pub events: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct Sweep {
    /// Map file; repeatable.
    #[arg(long = "map", required = true)]
    pub maps: Vec<PathBuf>,
    /// Scenario file; repeatable. Each is matched to the map whose file
    /// name equals the scenario's map field.
    #[arg(long = "scen")]
    pub scens: Vec<PathBuf>,
    /// Generate scenarios instead of reading them. Gaps scenarios are drawn
    /// separately for every agent count so that each run is split evenly
    /// between the two directions.
    #[arg(long, value_enum, conflicts_with = "scens")]
    pub generate: Option<ScenarioKind>,
    /// Scenarios per map when generating.
    #[arg(long, default_value_t = 250)]
    pub scenarios: usize,
    #[arg(long, value_delimiter = ',', default_values_t = [5, 10, 15, 20, 25, 30, 35, 40])]
    pub counts: Vec<usize>,
    /// Pipelines to run (default: both).
    #[arg(long, value_enum, value_delimiter = ',')]
    pub variants: Vec<Variant>,
    #[command(flatten)]
    pub config: ConfigArgs,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// CSV output file (default: stdout).
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

pub fn main_with(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenMap(a) => gen_map(&a),
        Command::GenScen(a) => gen_scen(&a),
        Command::Run(a) => run(&a),
        Command::Sweep(a) => run_sweep(&a),
    }
}

fn gen_map(a: &GenMap) -> Result<()> {
    let map = match a.kind {
        MapKind::Gaps => generate_gaps_map(a.size, a.passages)?,
        MapKind::Rooms => generate_rooms_map(a.size, a.rooms, a.door, a.seed)?,
        MapKind::Door => fixtures::door_map(),
    };
    write_map(&a.out, &map)?;
    if let Some(p) = &a.scen {
        if !matches!(a.kind, MapKind::Door) {
            bail!("--scen is only available for door maps");
        }
        let scen = Scenario {
            map_name: file_name(&a.out),
            ..fixtures::door_scenario()
        };
        write_scen(p, &scen)?;
    }
    Ok(())
}

fn file_name(p: &Path) -> String {
    p.file_name().map_or_else(
        || p.display().to_string(),
        |n| n.to_string_lossy().into_owned(),
    )
}

fn gen_scen(a: &GenScen) -> Result<()> {
    let map = read_map(&a.map)?;
    let name = file_name(&a.map);
    let stem = a
        .map
        .file_stem()
        .map_or_else(|| "map".into(), |s| s.to_string_lossy().into_owned());
    let scens = generate_scenarios(&map, &name, a.kind, a.count, a.agents, a.seed)?;
    std::fs::create_dir_all(&a.out_dir)
        .with_context(|| format!("creating {}", a.out_dir.display()))?;
    for (q, s) in scens.iter().enumerate() {
        write_scen(&a.out_dir.join(format!("{stem}-{q}.scen")), s)?;
    }
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn run(a: &Run) -> Result<()> {
    let config = a.config.resolve()?;
    let map = read_map(&a.map)?;
    let scen = read_scen(&a.scen)?;
    scen.check_against(&map)
        .map_err(anyhow::Error::msg)
        .with_context(|| a.scen.display().to_string())?;
    let n = a.agents.unwrap_or(scen.len());
    if n > scen.len() {
        bail!(
            "{}: has {} tasks, {n} requested",
            a.scen.display(),
            scen.len()
        );
    }
    let (starts, goals) = scen.prefix(n);
    let trace = a.trace.as_deref().map(create).transpose()?;
    let events = a.events.as_deref().map(create).transpose()?;
    let mut writer = TraceWriter::new(trace, events);
    let mut state = sim::init_run(&map, &starts, &goals, config);
    let result = sim::run_to_completion(&mut state, &mut writer);
    writer.finish().context("writing trace")?;
    let e = result.events;
    println!("outcome={}", result.outcome.tag());
    println!("steps={}", result.steps_used);
    println!("makespan={}", result.makespan);
    println!("flowtime={}", result.flowtime);
    println!(
        "events=formation:{};merge:{};intruder:{};execution:{};dissolve:{};infeasible:{};abort:{}",
        e.formations, e.merges, e.intruders, e.executions, e.dissolutions, e.infeasible, e.aborts
    );
    Ok(())
}

fn load_sweep_maps(a: &Sweep) -> Result<Vec<SweepMap>> {
    let mut maps = Vec::new();
    for p in &a.maps {
        let map = read_map(p)?;
        maps.push(SweepMap {
            name: file_name(p),
            map,
            scenarios: ScenarioSet::Prefix(Vec::new()),
        });
    }
    if let Some(kind) = a.generate {
        for m in &mut maps {
            m.scenarios = match kind {
                ScenarioKind::Gaps => ScenarioSet::PerCount(
                    a.counts
                        .iter()
                        .map(|&n| {
                            Ok((
                                n,
                                generate_scenarios(
                                    &m.map,
                                    &m.name,
                                    kind,
                                    a.scenarios,
                                    n,
                                    a.config_seed()?,
                                )?,
                            ))
                        })
                        .collect::<Result<_>>()?,
                ),
                ScenarioKind::Rooms => {
                    let longest = a.counts.iter().copied().max().unwrap_or(0);
                    let seed = a.config_seed()?;
                    ScenarioSet::Prefix(generate_scenarios(
                        &m.map,
                        &m.name,
                        kind,
                        a.scenarios,
                        longest,
                        seed,
                    )?)
                }
            };
        }
    } else {
        for p in &a.scens {
            let s: Scenario = read_scen(p)?;
            let m = maps
                .iter_mut()
                .find(|m| m.name == s.map_name)
                .with_context(|| format!("{}: no --map named {}", p.display(), s.map_name))?;
            if let ScenarioSet::Prefix(v) = &mut m.scenarios {
                v.push(s);
            }
        }
    }
    Ok(maps)
}

impl Sweep {
    fn config_seed(&self) -> Result<u64> {
        Ok(self.config.resolve()?.seed)
    }
}

fn run_sweep(a: &Sweep) -> Result<()> {
    let config = a.config.resolve()?;
    let variants = if !a.variants.is_empty() {
        a.variants.clone()
    } else if a.config.no_coordination {
        vec![Variant::Baseline]
    } else {
        vec![Variant::Coordinated, Variant::Baseline]
    };
    let spec = SweepSpec {
        maps: load_sweep_maps(a)?,
        agent_counts: a.counts.clone(),
        variants,
        config,
    };
    let rows = sweep::run_sweep(&spec, a.jobs).map_err(anyhow::Error::msg)?;
    match &a.out {
        Some(p) => {
            let mut f = create(p)?;
            sweep::write_csv(&mut f, &rows)?;
            f.flush()?;
        }
        None => sweep::write_csv(&mut std::io::stdout().lock(), &rows)?,
    }
    Ok(())
}
