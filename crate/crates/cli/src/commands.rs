use std::collections::HashSet;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::info;
use ndarray::Array1;
use relureach::json::to_canonical_string;
use relureach::netmodel::{layer_plan, load_network_file};
use relureach::oracle::{check_soundness, sample_input_set, write_samples_csv, SamplingStrategy};
use relureach::reach::{
    export_reach, reach_from_json, reach_to_json, region_count_bounds, Exported, ReachOptions,
};
use relureach::verify::{verdict_to_json, Status};
use relureach::{network_reach, random_network, verify_network, Error, Polyhedron, Result, SafetySpec, UnionOfPolyhedra};
use serde::Serialize;

use crate::{GenNetArgs, ReachArgs, ReachFlags, SampleCheckArgs, StatsArgs, VerifyArgs};

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(Error::from)
}

fn emit(out: Option<&PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text)?,
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Input sets are either a union (`{"pieces": [...]}`) or a single polyhedron.
fn load_input(path: &Path) -> Result<UnionOfPolyhedra> {
    let text = read(path)?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    if value.get("pieces").is_some() {
        Ok(serde_json::from_value(value)?)
    } else {
        Ok(UnionOfPolyhedra::single(serde_json::from_value::<Polyhedron>(value)?))
    }
}

fn options(flags: &ReachFlags) -> ReachOptions {
    let jobs = flags
        .jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    ReachOptions { mode: flags.mode, jobs, region_cap: flags.region_cap, ..ReachOptions::default() }
}

pub fn gen_net(a: GenNetArgs) -> Result<u8> {
    let (input_dim, plan) = layer_plan(&a.sizes, a.hidden, a.output)?;
    let net = random_network(input_dim, &plan, a.seed)?;
    emit(a.out.as_ref(), &net.to_json())?;
    Ok(0)
}

#[derive(Serialize)]
struct Timing {
    mode: relureach::ReachMode,
    jobs: usize,
    seconds_total: f64,
    per_layer_seconds: Vec<f64>,
}

#[derive(Serialize)]
struct HrepFile<'a> {
    layer: usize,
    mode: relureach::ReachMode,
    output_dim: usize,
    pieces: &'a [Polyhedron],
    stats: &'a relureach::ReachStats,
}

#[derive(Serialize)]
struct PolygonFile<'a> {
    layer: usize,
    mode: relureach::ReachMode,
    polygons: &'a [Vec<[f64; 2]>],
    stats: &'a relureach::ReachStats,
}

pub fn reach(a: ReachArgs) -> Result<u8> {
    let net = load_network_file(&a.net)?;
    let input = load_input(&a.input)?;
    let opts = options(&a.flags);
    let start = Instant::now();
    let (set, stats) = network_reach(&net, &input, &opts)?;
    let text = match export_reach(&set, a.export)? {
        Exported::Regions(set) => reach_to_json(&set, &stats, Some(opts.mode)),
        Exported::Hrep(u) => to_canonical_string(&HrepFile {
            layer: set.layer_index(),
            mode: opts.mode,
            output_dim: u.dim(),
            pieces: u.pieces(),
            stats: &stats,
        }),
        Exported::Polygons(polygons) => to_canonical_string(&PolygonFile {
            layer: set.layer_index(),
            mode: opts.mode,
            polygons: &polygons,
            stats: &stats,
        }),
    };
    let elapsed = start.elapsed().as_secs_f64();
    info!("{} regions in {elapsed:.3}s", set.len());
    emit(a.out.as_ref(), &text)?;
    let timing = serde_json::to_string(&Timing {
        mode: opts.mode,
        jobs: opts.jobs,
        seconds_total: elapsed,
        per_layer_seconds: stats.per_layer_seconds.clone(),
    })?;
    match &a.timing {
        Some(p) => fs::write(p, timing + "\n")?,
        None => eprintln!("{timing}"),
    }
    Ok(0)
}

pub fn verify(a: VerifyArgs) -> Result<u8> {
    let net = load_network_file(&a.net)?;
    let input = load_input(&a.input)?;
    let spec = SafetySpec::from_json(&read(&a.spec)?)?;
    let (verdict, stats) = verify_network(&net, &input, &spec, &options(&a.flags))?;
    print!("{}", verdict_to_json(&verdict, &stats));
    Ok(match verdict.status {
        Status::Safe => 0,
        Status::Unsafe => 1,
    })
}

pub fn sample_check(a: SampleCheckArgs) -> Result<u8> {
    let net = load_network_file(&a.net)?;
    let input = load_input(&a.input)?;
    let (set, _) = reach_from_json(&read(&a.reach)?)?;
    if set.input_dim() != net.input_dim() || set.output_dim() != net.output_dim() {
        return Err(Error::DimensionMismatch {
            context: "reach file vs network output",
            expected: net.output_dim(),
            found: set.output_dim(),
        });
    }
    let strategy = match (a.grid, a.grid_step, a.uniform) {
        (_, Some(step), _) => SamplingStrategy::GridStep { step },
        (_, _, Some(n)) => SamplingStrategy::Uniform { n, seed: a.seed.unwrap_or(0) },
        (Some(per_axis), _, _) => SamplingStrategy::Grid { per_axis },
        (None, None, None) => SamplingStrategy::Grid { per_axis: 20 },
    };
    let samples = sample_input_set(&input, strategy)?;
    let report = check_soundness(&net, &set, &samples, a.tol)?;
    emit(a.report.as_ref(), &report.to_json())?;
    if let Some(path) = &a.csv {
        let outputs = samples.iter().map(|x| net.forward(x.view())).collect::<Result<Vec<_>>>()?;
        let failed: HashSet<usize> = report.failures.iter().map(|f| f.index).collect();
        let member: Vec<bool> = (0..samples.len()).map(|i| !failed.contains(&i)).collect();
        write_samples_csv(io::BufWriter::new(fs::File::create(path)?), &samples, &outputs, &member)?;
    }
    Ok(if report.passed() { 0 } else { 4 })
}

#[derive(Serialize)]
struct StatsFile {
    layer: usize,
    regions: usize,
    input_pieces: usize,
    per_layer_counts: Vec<usize>,
    per_layer_pruned: Vec<usize>,
    per_layer_candidates: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    count_bounds: Option<Vec<u128>>,
    output_lower: Vec<f64>,
    output_upper: Vec<f64>,
}

pub fn stats(a: StatsArgs) -> Result<u8> {
    let (set, stats) = reach_from_json(&read(&a.reach)?)?;
    let count_bounds = match &a.net {
        Some(p) => Some(region_count_bounds(&load_network_file(p)?, stats.input_pieces)),
        None => None,
    };
    let mut lower = Array1::from_elem(set.output_dim(), f64::INFINITY);
    let mut upper = Array1::from_elem(set.output_dim(), f64::NEG_INFINITY);
    for r in set.regions() {
        for (k, (lo, hi)) in r.region.output_bounds()?.into_iter().enumerate() {
            lower[k] = lower[k].min(lo);
            upper[k] = upper[k].max(hi);
        }
    }
    let out = StatsFile {
        layer: set.layer_index(),
        regions: set.len(),
        input_pieces: stats.input_pieces,
        per_layer_counts: stats.per_layer_counts,
        per_layer_pruned: stats.per_layer_pruned,
        per_layer_candidates: stats.per_layer_candidates,
        count_bounds,
        output_lower: lower.to_vec(),
        output_upper: upper.to_vec(),
    };
    print!("{}", to_canonical_string(&out));
    Ok(0)
}
