//! Exact output reachable sets.
//!
//! A reach set is a list of [`AffineRegion`]s whose domains live in the
//! network's input space. Pushing a region through a ReLU layer splits its
//! domain by the sign of every pre-activation; each surviving sign
//! assignment keeps the pre-activation rows of its active neurons and zeroes
//! the rest. Linear layers only compose the map.
//!
//! Two splitting strategies are provided. [`ReachMode::Patterns`] enumerates
//! all `2^n` activation patterns of the layer and checks each candidate
//! domain. [`ReachMode::Neuronwise`] splits one neuron at a time and prunes
//! empty branches as soon as they appear. Both emit exactly the nonempty
//! closed sign cells, so their unions coincide.

use std::cmp::Ordering;
use std::time::Instant;

use log::{info, warn};
use ndarray::{Array1, Array2, ArrayView1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::lp::{TOL, ZERO_ROW};
use crate::geometry::polyhedron::{matrix_to_rows, rows_to_matrix, PolyhedronJson};
use crate::geometry::{vertices_2d, AffineRegion, Polyhedron, UnionOfPolyhedra, DEFAULT_ROW_CAP};
use crate::netmodel::{enumerate_patterns, Activation, ActivationPattern, Layer, Network, DEFAULT_PATTERN_CAP};

pub const DEFAULT_REGION_CAP: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReachMode {
    Patterns,
    Neuronwise,
}

impl std::str::FromStr for ReachMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "patterns" => Ok(ReachMode::Patterns),
            "neuronwise" => Ok(ReachMode::Neuronwise),
            other => Err(Error::InvalidArgument(format!("unknown reach mode {other:?}"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ReachOptions {
    pub mode: ReachMode,
    /// Worker threads; 0 means one per available core.
    pub jobs: usize,
    pub pattern_cap: usize,
    pub region_cap: usize,
    /// Domains with more than `factor * dim` inequality rows are pruned of
    /// redundant rows after each layer.
    pub redundancy_factor: usize,
}

impl Default for ReachOptions {
    fn default() -> Self {
        ReachOptions {
            mode: ReachMode::Neuronwise,
            jobs: 0,
            pattern_cap: DEFAULT_PATTERN_CAP,
            region_cap: DEFAULT_REGION_CAP,
            redundancy_factor: 4,
        }
    }
}

impl ReachOptions {
    pub fn with_mode(mode: ReachMode) -> Self {
        ReachOptions { mode, ..Self::default() }
    }

    pub fn jobs(mut self, jobs: usize) -> Self {
        self.jobs = jobs;
        self
    }

    fn thread_pool(&self) -> Result<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.jobs)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))
    }
}

/// One piece of a reach set, with provenance.
#[derive(Clone, Debug, PartialEq)]
pub struct ReachRegion {
    pub region: AffineRegion,
    /// Index of the input piece the region descends from.
    pub source: usize,
    /// Activation pattern chosen at each processed layer (`None` for linear layers).
    pub trace: Vec<Option<ActivationPattern>>,
}

impl ReachRegion {
    fn canonical_cmp(&self, other: &Self) -> Ordering {
        self.source.cmp(&other.source).then_with(|| self.trace.cmp(&other.trace))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReachSet {
    regions: Vec<ReachRegion>,
    layer_index: usize,
    input_dim: usize,
    output_dim: usize,
}

impl ReachSet {
    /// Identity regions over the nonempty pieces of `input`. Returns the
    /// number of empty pieces that were dropped alongside.
    pub fn from_input(input: &UnionOfPolyhedra) -> Result<(Self, usize)> {
        let mut regions = Vec::with_capacity(input.len());
        let mut dropped = 0;
        for (source, piece) in input.pieces().iter().enumerate() {
            if piece.is_empty()? {
                warn!("input piece {source} is empty and was dropped");
                dropped += 1;
                continue;
            }
            regions.push(ReachRegion {
                region: AffineRegion::identity(piece.clone()),
                source,
                trace: Vec::new(),
            });
        }
        Ok((
            ReachSet { regions, layer_index: 0, input_dim: input.dim(), output_dim: input.dim() },
            dropped,
        ))
    }

    pub fn new(regions: Vec<ReachRegion>, layer_index: usize, input_dim: usize, output_dim: usize) -> Result<Self> {
        for r in &regions {
            if r.region.input_dim() != input_dim || r.region.output_dim() != output_dim {
                return Err(Error::DimensionMismatch {
                    context: "reach region",
                    expected: output_dim,
                    found: r.region.output_dim(),
                });
            }
        }
        Ok(ReachSet { regions, layer_index, input_dim, output_dim })
    }

    pub fn regions(&self) -> &[ReachRegion] {
        &self.regions
    }
    pub fn len(&self) -> usize {
        self.regions.len()
    }
    pub fn is_empty(&self) -> bool {
        self.regions.is_empty()
    }
    pub fn layer_index(&self) -> usize {
        self.layer_index
    }
    pub fn input_dim(&self) -> usize {
        self.input_dim
    }
    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    pub fn without_region(&self, index: usize) -> ReachSet {
        let mut out = self.clone();
        out.regions.remove(index);
        out
    }

    fn check_layer(&self, layer: &Layer) -> Result<()> {
        if layer.input_dim() != self.output_dim {
            return Err(Error::DimensionMismatch {
                context: "layer input vs reach set output",
                expected: self.output_dim,
                found: layer.input_dim(),
            });
        }
        Ok(())
    }
}

/// Per-layer bookkeeping of one layer step.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LayerStats {
    pub candidates: usize,
    pub pruned: usize,
    pub kept: usize,
    pub seconds: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ReachStats {
    pub input_pieces: usize,
    pub per_layer_counts: Vec<usize>,
    pub per_layer_pruned: Vec<usize>,
    pub per_layer_candidates: Vec<usize>,
    #[serde(skip)]
    pub per_layer_seconds: Vec<f64>,
}

impl ReachStats {
    fn push(&mut self, s: LayerStats) {
        self.per_layer_counts.push(s.kept);
        self.per_layer_pruned.push(s.pruned);
        self.per_layer_candidates.push(s.candidates);
        self.per_layer_seconds.push(s.seconds);
    }

    pub fn total_seconds(&self) -> f64 {
        self.per_layer_seconds.iter().sum()
    }
}

/// Worst-case region counts after each layer: `N0 * prod_{s <= l} 2^{n_s}`,
/// saturating at `u128::MAX`.
pub fn region_count_bounds(net: &Network, input_pieces: usize) -> Vec<u128> {
    let mut bound = input_pieces as u128;
    net.layers()
        .iter()
        .map(|l| {
            bound = 1u128
                .checked_shl(l.output_dim() as u32)
                .filter(|_| l.output_dim() < 128)
                .and_then(|f| bound.checked_mul(f))
                .unwrap_or(u128::MAX);
            bound
        })
        .collect()
}

struct PreActivation {
    map: Array2<f64>,
    offset: Array1<f64>,
}

impl PreActivation {
    fn of(layer: &Layer, region: &AffineRegion) -> Self {
        let map = layer.weights().dot(&region.map());
        let offset = layer.weights().dot(&region.offset()) + layer.bias();
        PreActivation { map, offset }
    }

    fn row_tol(&self, i: usize) -> f64 {
        let row = self.map.row(i);
        let norm = row.dot(&row).sqrt();
        // Same scale the LP applies after normalizing rows; constant rows are
        // compared unscaled.
        if norm > ZERO_ROW {
            TOL * norm
        } else {
            TOL
        }
    }

    /// Row encoding `pre_i >= 0` (active) or `pre_i <= 0` (inactive) as `a x <= b`.
    fn sign_row(&self, i: usize, active: bool) -> (Array1<f64>, f64) {
        let g = self.map.row(i);
        if active {
            (g.mapv(|v| -v), self.offset[i])
        } else {
            (g.to_owned(), -self.offset[i])
        }
    }

    fn select(&self, pattern: &ActivationPattern) -> (Array2<f64>, Array1<f64>) {
        let mut map = self.map.clone();
        let mut offset = self.offset.clone();
        for (i, &active) in pattern.bits().iter().enumerate() {
            if !active {
                map.row_mut(i).fill(0.0);
                offset[i] = 0.0;
            }
        }
        (map, offset)
    }
}

fn append_rows(domain: &Polyhedron, rows: &[(Array1<f64>, f64)]) -> Result<Polyhedron> {
    if rows.is_empty() {
        return Ok(domain.clone());
    }
    let dim = domain.dim();
    let a = Array2::from_shape_fn((rows.len(), dim), |(r, k)| rows[r].0[k]);
    let b = Array1::from_iter(rows.iter().map(|r| r.1));
    domain.with_inequalities(a.view(), b.view())
}

fn compact(domain: Polyhedron, factor: usize) -> Result<Polyhedron> {
    if domain.n_ineq() > factor * domain.dim() {
        domain.remove_redundancy()
    } else {
        Ok(domain)
    }
}

fn extend_trace(trace: &[Option<ActivationPattern>], p: Option<ActivationPattern>) -> Vec<Option<ActivationPattern>> {
    let mut t = Vec::with_capacity(trace.len() + 1);
    t.extend_from_slice(trace);
    t.push(p);
    t
}

fn relu_region_patterns(layer: &Layer, input: &ReachRegion, opts: &ReachOptions) -> Result<(Vec<ReachRegion>, usize)> {
    let n = layer.output_dim();
    let pre = PreActivation::of(layer, &input.region);
    let domain = input.region.domain();

    // Sign screening: a pattern bit is impossible when the pre-activation
    // range over the domain excludes it by more than ten tolerances.
    let mut can_active = vec![true; n];
    let mut can_inactive = vec![true; n];
    for i in 0..n {
        let (lo, hi) = domain.linear_range(pre.map.row(i))?;
        let margin = 10.0 * pre.row_tol(i);
        can_active[i] = hi + pre.offset[i] >= -margin;
        can_inactive[i] = lo + pre.offset[i] <= margin;
    }

    let mut out = Vec::new();
    let mut pruned = 0;
    for pattern in enumerate_patterns(n, opts.pattern_cap)? {
        let possible = pattern
            .bits()
            .iter()
            .enumerate()
            .all(|(i, &on)| if on { can_active[i] } else { can_inactive[i] });
        if !possible {
            pruned += 1;
            continue;
        }
        let rows: Vec<(Array1<f64>, f64)> =
            (0..n).map(|i| pre.sign_row(i, pattern.is_active(i))).collect();
        let candidate = append_rows(domain, &rows)?;
        if candidate.is_empty()? {
            pruned += 1;
            continue;
        }
        let (map, offset) = pre.select(&pattern);
        let domain = compact(candidate, opts.redundancy_factor)?;
        out.push(ReachRegion {
            region: AffineRegion::new(domain, map, offset)?,
            source: input.source,
            trace: extend_trace(&input.trace, Some(pattern)),
        });
    }
    Ok((out, pruned))
}

fn relu_region_neuronwise(layer: &Layer, input: &ReachRegion, opts: &ReachOptions) -> Result<(Vec<ReachRegion>, usize)> {
    let n = layer.output_dim();
    let pre = PreActivation::of(layer, &input.region);
    let mut branches: Vec<(Polyhedron, Vec<bool>)> = vec![(input.region.domain().clone(), Vec::with_capacity(n))];
    let mut pruned = 0;
    for i in 0..n {
        let tol = pre.row_tol(i);
        let mut next = Vec::with_capacity(branches.len() * 2);
        for (domain, bits) in branches {
            let (lo, hi) = domain.linear_range(pre.map.row(i))?;
            let (lo, hi) = (lo + pre.offset[i], hi + pre.offset[i]);
            let active_ok = hi >= -tol;
            let inactive_ok = lo <= tol;
            match (active_ok, inactive_ok) {
                (true, true) => {
                    for active in [false, true] {
                        let row = pre.sign_row(i, active);
                        let mut b = bits.clone();
                        b.push(active);
                        next.push((append_rows(&domain, &[row])?, b));
                    }
                }
                (true, false) | (false, true) => {
                    // The sign is fixed on this domain; the row would be redundant.
                    pruned += 1;
                    let mut b = bits;
                    b.push(active_ok);
                    next.push((domain, b));
                }
                (false, false) => unreachable!("lo <= hi on a nonempty domain"),
            }
        }
        branches = next;
    }
    let mut out = Vec::with_capacity(branches.len());
    for (domain, bits) in branches {
        let pattern = ActivationPattern::new(bits);
        let (map, offset) = pre.select(&pattern);
        let domain = compact(domain, opts.redundancy_factor)?;
        out.push(ReachRegion {
            region: AffineRegion::new(domain, map, offset)?,
            source: input.source,
            trace: extend_trace(&input.trace, Some(pattern)),
        });
    }
    Ok((out, pruned))
}

fn run_layer<F>(layer: &Layer, input: &ReachSet, opts: &ReachOptions, per_region: F) -> Result<(ReachSet, LayerStats)>
where
    F: Fn(&Layer, &ReachRegion, &ReachOptions) -> Result<(Vec<ReachRegion>, usize)> + Sync,
{
    input.check_layer(layer)?;
    let start = Instant::now();
    let parts: Vec<(Vec<ReachRegion>, usize)> = input
        .regions
        .par_iter()
        .map(|r| per_region(layer, r, opts))
        .collect::<Result<_>>()?;
    let pruned: usize = parts.iter().map(|p| p.1).sum();
    let mut regions: Vec<ReachRegion> = parts.into_iter().flat_map(|p| p.0).collect();
    regions.sort_by(ReachRegion::canonical_cmp);
    let kept = regions.len();
    let stats = LayerStats { candidates: kept + pruned, pruned, kept, seconds: start.elapsed().as_secs_f64() };
    Ok((
        ReachSet {
            regions,
            layer_index: input.layer_index + 1,
            input_dim: input.input_dim,
            output_dim: layer.output_dim(),
        },
        stats,
    ))
}

fn require_relu(layer: &Layer) -> Result<()> {
    if layer.activation() != Activation::Relu {
        return Err(Error::InvalidArgument("expected a ReLU layer".into()));
    }
    Ok(())
}

/// ReLU layer step by full pattern enumeration.
pub fn relu_layer_reach_patterns(layer: &Layer, input: &ReachSet, opts: &ReachOptions) -> Result<(ReachSet, LayerStats)> {
    require_relu(layer)?;
    if layer.output_dim() > opts.pattern_cap {
        return Err(Error::PatternSpaceTooLarge { neurons: layer.output_dim(), cap: opts.pattern_cap });
    }
    run_layer(layer, input, opts, relu_region_patterns)
}

/// ReLU layer step by successive per-neuron splitting.
pub fn relu_layer_reach_neuronwise(layer: &Layer, input: &ReachSet, opts: &ReachOptions) -> Result<(ReachSet, LayerStats)> {
    require_relu(layer)?;
    run_layer(layer, input, opts, relu_region_neuronwise)
}

/// Linear layer step: every map is composed with `(W, b)`; the count is unchanged.
pub fn linear_layer_reach(layer: &Layer, input: &ReachSet) -> Result<(ReachSet, LayerStats)> {
    if layer.activation() != Activation::Linear {
        return Err(Error::InvalidArgument("expected a linear layer".into()));
    }
    run_layer(layer, input, &ReachOptions::default(), |layer, r, _| {
        let region = r.region.compose(layer.weights().view(), layer.bias().view())?;
        Ok((vec![ReachRegion { region, source: r.source, trace: extend_trace(&r.trace, None) }], 0))
    })
}

fn layer_step(layer: &Layer, input: &ReachSet, opts: &ReachOptions) -> Result<(ReachSet, LayerStats)> {
    match (layer.activation(), opts.mode) {
        (Activation::Linear, _) => linear_layer_reach(layer, input),
        (Activation::Relu, ReachMode::Patterns) => relu_layer_reach_patterns(layer, input, opts),
        (Activation::Relu, ReachMode::Neuronwise) => relu_layer_reach_neuronwise(layer, input, opts),
    }
}

/// Output reachable set of `net` over `input`, layer by layer.
pub fn network_reach(net: &Network, input: &UnionOfPolyhedra, opts: &ReachOptions) -> Result<(ReachSet, ReachStats)> {
    if input.dim() != net.input_dim() {
        return Err(Error::DimensionMismatch {
            context: "input set vs network",
            expected: net.input_dim(),
            found: input.dim(),
        });
    }
    let pool = opts.thread_pool()?;
    pool.install(|| {
        let (mut set, _) = ReachSet::from_input(input)?;
        let mut stats = ReachStats { input_pieces: set.len(), ..ReachStats::default() };
        for (l, layer) in net.layers().iter().enumerate() {
            let (next, layer_stats) = layer_step(layer, &set, opts)?;
            info!(
                "layer {}: {} regions ({} pruned) in {:.3}s",
                l + 1,
                layer_stats.kept,
                layer_stats.pruned,
                layer_stats.seconds
            );
            if next.len() > opts.region_cap {
                return Err(Error::RegionCapExceeded { layer: l + 1, count: next.len(), cap: opts.region_cap });
            }
            stats.push(layer_stats);
            set = next;
        }
        Ok((set, stats))
    })
}

/// Image of `input` under the elementwise ReLU, as explicit polyhedra.
pub fn relu_function_reach(input: &UnionOfPolyhedra) -> Result<UnionOfPolyhedra> {
    let n = input.dim();
    let layer = Layer::relu(Array2::eye(n), Array1::zeros(n))?;
    let (seed, _) = ReachSet::from_input(input)?;
    let (set, _) = relu_layer_reach_patterns(&layer, &seed, &ReachOptions::with_mode(ReachMode::Patterns))?;
    match export_reach(&set, ExportForm::Hrep)? {
        Exported::Hrep(u) => Ok(u),
        _ => unreachable!(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExportForm {
    Regions,
    Hrep,
    Polygons2d,
}

impl std::str::FromStr for ExportForm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "regions" => Ok(ExportForm::Regions),
            "hrep" => Ok(ExportForm::Hrep),
            "polygons2d" => Ok(ExportForm::Polygons2d),
            other => Err(Error::InvalidArgument(format!("unknown export form {other:?}"))),
        }
    }
}

#[derive(Clone, Debug)]
pub enum Exported {
    Regions(ReachSet),
    Hrep(UnionOfPolyhedra),
    Polygons(Vec<Vec<[f64; 2]>>),
}

pub fn export_reach(set: &ReachSet, form: ExportForm) -> Result<Exported> {
    match form {
        ExportForm::Regions => Ok(Exported::Regions(set.clone())),
        ExportForm::Hrep => {
            let pieces = set
                .regions
                .par_iter()
                .map(|r| crate::geometry::region_to_polyhedron(&r.region, DEFAULT_ROW_CAP))
                .collect::<Result<Vec<_>>>()?;
            Ok(Exported::Hrep(UnionOfPolyhedra::new(set.output_dim, pieces)?))
        }
        ExportForm::Polygons2d => {
            if set.output_dim != 2 {
                return Err(Error::DimensionMismatch {
                    context: "polygon export",
                    expected: 2,
                    found: set.output_dim,
                });
            }
            let polys = set
                .regions
                .par_iter()
                .map(|r| vertices_2d(&crate::geometry::region_to_polyhedron(&r.region, DEFAULT_ROW_CAP)?))
                .collect::<Result<Vec<_>>>()?;
            Ok(Exported::Polygons(polys))
        }
    }
}

/// Output-space bounding boxes of every region, for fast membership queries.
pub struct MembershipIndex<'a> {
    set: &'a ReachSet,
    bounds: Vec<Vec<(f64, f64)>>,
}

impl<'a> MembershipIndex<'a> {
    pub fn new(set: &'a ReachSet) -> Result<Self> {
        let bounds = set
            .regions
            .par_iter()
            .map(|r| r.region.output_bounds())
            .collect::<Result<Vec<_>>>()?;
        Ok(MembershipIndex { set, bounds })
    }

    fn may_contain(&self, idx: usize, y: ArrayView1<f64>, tol: f64) -> bool {
        let map = self.set.regions[idx].region.map();
        self.bounds[idx].iter().enumerate().all(|(k, (lo, hi))| {
            let row = map.row(k);
            let margin = 1e3 * tol * row.dot(&row).sqrt().max(1.0) + 1e-12;
            y[k] >= lo - margin && y[k] <= hi + margin
        })
    }

    /// First region containing `y` within `tol`, with its residual. When a
    /// candidate preimage `hint` is known it is tried first on every region.
    pub fn locate(&self, y: ArrayView1<f64>, tol: f64, hint: Option<ArrayView1<f64>>) -> Result<Option<(usize, f64)>> {
        if y.len() != self.set.output_dim {
            return Err(Error::DimensionMismatch {
                context: "membership query",
                expected: self.set.output_dim,
                found: y.len(),
            });
        }
        if let Some(x) = hint.filter(|x| x.len() == self.set.input_dim) {
            for (idx, r) in self.set.regions.iter().enumerate() {
                let res = r.region.witness_residual(x, y);
                if res <= tol {
                    return Ok(Some((idx, res)));
                }
            }
        }
        for (idx, r) in self.set.regions.iter().enumerate() {
            if !self.may_contain(idx, y, tol) {
                continue;
            }
            let res = r.region.membership_residual(y)?;
            if res <= tol {
                return Ok(Some((idx, res)));
            }
        }
        Ok(None)
    }

    /// Smallest membership residual of `y` over all regions.
    pub fn residual(&self, y: ArrayView1<f64>) -> Result<f64> {
        let mut best = f64::INFINITY;
        for r in &self.set.regions {
            best = best.min(r.region.membership_residual(y)?);
        }
        Ok(best)
    }

    pub fn contains(&self, y: ArrayView1<f64>, tol: f64) -> Result<bool> {
        Ok(self.locate(y, tol, None)?.is_some())
    }
}

// JSON wire format.

#[derive(Serialize, Deserialize)]
struct RegionJson {
    #[serde(flatten)]
    domain: PolyhedronJson,
    #[serde(rename = "M")]
    m: Vec<Vec<f64>>,
    c: Vec<f64>,
    #[serde(default)]
    source: usize,
    #[serde(default)]
    pattern: Vec<Option<String>>,
}

#[derive(Serialize, Deserialize)]
struct ReachFile {
    layer: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mode: Option<ReachMode>,
    input_dim: usize,
    output_dim: usize,
    regions: Vec<RegionJson>,
    #[serde(default)]
    stats: ReachStats,
}

/// Canonical reach-result JSON. Timings are excluded so files are
/// byte-identical across worker counts.
pub fn reach_to_json(set: &ReachSet, stats: &ReachStats, mode: Option<ReachMode>) -> String {
    let regions = set
        .regions
        .iter()
        .map(|r| RegionJson {
            domain: PolyhedronJson::from(r.region.domain()),
            m: matrix_to_rows(r.region.map()),
            c: r.region.offset().to_vec(),
            source: r.source,
            pattern: r.trace.iter().map(|p| p.as_ref().map(|p| p.to_string())).collect(),
        })
        .collect();
    crate::json::to_canonical_string(&ReachFile {
        layer: set.layer_index,
        mode,
        input_dim: set.input_dim,
        output_dim: set.output_dim,
        regions,
        stats: stats.clone(),
    })
}

pub fn reach_from_json(text: &str) -> Result<(ReachSet, ReachStats)> {
    let file: ReachFile = serde_json::from_str(text)?;
    let mut regions = Vec::with_capacity(file.regions.len());
    for r in file.regions {
        let domain = Polyhedron::try_from(r.domain)?;
        let map = rows_to_matrix(&r.m, domain.dim(), "region M")?;
        let region = AffineRegion::new(domain, map, Array1::from(r.c))?;
        let trace = r
            .pattern
            .iter()
            .map(|p| p.as_deref().map(ActivationPattern::parse).transpose())
            .collect::<Result<Vec<_>>>()?;
        regions.push(ReachRegion { region, source: r.source, trace });
    }
    let set = ReachSet::new(regions, file.layer, file.input_dim, file.output_dim)?;
    Ok((set, file.stats))
}
