//! Sampling-based validation: input grids, random inputs, forward images and
//! membership checks against computed reach sets.

use std::io::Write;

use ndarray::Array1;
use rand_core::SeedableRng;
use rand_xoshiro::SplitMix64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::lp::TOL;
use crate::geometry::{Polyhedron, UnionOfPolyhedra};
use crate::netmodel::{unit_f64, Network};
use crate::reach::{MembershipIndex, ReachSet};
use crate::verify::SafetySpec;

/// Default membership tolerance for soundness checks.
pub const SOUNDNESS_TOL: f64 = 1e-6;

const REJECTION_TRIES: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SamplingStrategy {
    /// `per_axis` evenly spaced points per coordinate of each piece's
    /// bounding box, endpoints included; a single point sits at the midpoint.
    Grid { per_axis: usize },
    /// Points `lo + k * step` per coordinate, up to and including `hi`.
    GridStep { step: f64 },
    /// `n` points by rejection from the bounding box of a uniformly chosen piece.
    Uniform { n: usize, seed: u64 },
}

fn axis_points(lo: f64, hi: f64, strategy: SamplingStrategy) -> Vec<f64> {
    match strategy {
        SamplingStrategy::Grid { per_axis: 1 } => vec![0.5 * (lo + hi)],
        SamplingStrategy::Grid { per_axis } => {
            let h = (hi - lo) / (per_axis - 1) as f64;
            (0..per_axis).map(|k| if k + 1 == per_axis { hi } else { lo + h * k as f64 }).collect()
        }
        SamplingStrategy::GridStep { step } => {
            let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
            (0..count).map(|k| (lo + step * k as f64).min(hi)).collect()
        }
        SamplingStrategy::Uniform { .. } => unreachable!(),
    }
}

fn grid_piece(piece: &Polyhedron, strategy: SamplingStrategy, out: &mut Vec<Array1<f64>>) -> Result<()> {
    if piece.is_empty()? {
        return Ok(());
    }
    let axes: Vec<Vec<f64>> = piece
        .bounding_box()?
        .into_iter()
        .map(|(lo, hi)| axis_points(lo, hi, strategy))
        .collect();
    let mut idx = vec![0usize; axes.len()];
    loop {
        let x = Array1::from_iter(idx.iter().zip(&axes).map(|(&i, a)| a[i]));
        if piece.contains_tol(x.view(), TOL) {
            out.push(x);
        }
        // Odometer with the last coordinate varying fastest.
        let mut k = axes.len();
        loop {
            if k == 0 {
                return Ok(());
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < axes[k].len() {
                break;
            }
            idx[k] = 0;
        }
    }
}

/// Points of `input` drawn by `strategy`. Every returned point is a member
/// of some piece. Grid points are listed piece by piece; overlapping pieces
/// may contribute the same point twice.
pub fn sample_input_set(input: &UnionOfPolyhedra, strategy: SamplingStrategy) -> Result<Vec<Array1<f64>>> {
    match strategy {
        SamplingStrategy::Grid { per_axis: 0 } => Err(Error::InvalidArgument("grid needs at least one point per axis".into())),
        SamplingStrategy::GridStep { step } if step.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) || !step.is_finite() => {
            Err(Error::InvalidArgument(format!("grid step must be positive, got {step}")))
        }
        SamplingStrategy::Grid { .. } | SamplingStrategy::GridStep { .. } => {
            let mut out = Vec::new();
            for piece in input.pieces() {
                grid_piece(piece, strategy, &mut out)?;
            }
            Ok(out)
        }
        SamplingStrategy::Uniform { n, seed } => uniform(input, n, seed),
    }
}

fn uniform(input: &UnionOfPolyhedra, n: usize, seed: u64) -> Result<Vec<Array1<f64>>> {
    let mut pieces: Vec<(&Polyhedron, Vec<(f64, f64)>)> = Vec::new();
    for p in input.pieces() {
        if !p.is_empty()? {
            pieces.push((p, p.bounding_box()?));
        }
    }
    if pieces.is_empty() {
        return if n == 0 { Ok(Vec::new()) } else { Err(Error::EmptyPolyhedron) };
    }
    let mut rng = SplitMix64::from_seed(seed.to_le_bytes());
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let which = ((unit_f64(&mut rng) * pieces.len() as f64) as usize).min(pieces.len() - 1);
        let (piece, bbox) = &pieces[which];
        let mut found = None;
        for _ in 0..REJECTION_TRIES {
            let x = Array1::from_iter(bbox.iter().map(|(lo, hi)| lo + (hi - lo) * unit_f64(&mut rng)));
            if piece.contains_tol(x.view(), TOL) {
                found = Some(x);
                break;
            }
        }
        match found {
            Some(x) => out.push(x),
            None => return Err(Error::SamplingFailed(out.len())),
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SoundnessFailure {
    pub index: usize,
    pub input: Vec<f64>,
    pub output: Vec<f64>,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SoundnessReport {
    pub samples: usize,
    pub tolerance: f64,
    pub max_residual: f64,
    pub mean_residual: f64,
    pub failures: Vec<SoundnessFailure>,
}

impl SoundnessReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn to_json(&self) -> String {
        crate::json::to_canonical_string(self)
    }
}

/// Checks that `forward(x)` lies in `set` for every sample `x`.
pub fn check_soundness(net: &Network, set: &ReachSet, samples: &[Array1<f64>], tol: f64) -> Result<SoundnessReport> {
    let index = MembershipIndex::new(set)?;
    let per_sample = samples
        .par_iter()
        .enumerate()
        .map(|(i, x)| -> Result<(f64, Option<SoundnessFailure>)> {
            let y = net.forward(x.view())?;
            match index.locate(y.view(), tol, Some(x.view()))? {
                Some((_, res)) => Ok((res, None)),
                None => {
                    let residual = index.residual(y.view())?;
                    let failure =
                        SoundnessFailure { index: i, input: x.to_vec(), output: y.to_vec(), residual };
                    Ok((residual, Some(failure)))
                }
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let max_residual = per_sample.iter().map(|p| p.0).fold(0.0, f64::max);
    let mean_residual = if per_sample.is_empty() {
        0.0
    } else {
        per_sample.iter().map(|p| p.0).sum::<f64>() / per_sample.len() as f64
    };
    let failures = per_sample.into_iter().filter_map(|p| p.1).collect();
    Ok(SoundnessReport { samples: samples.len(), tolerance: tol, max_residual, mean_residual, failures })
}

/// Forward images of a `resolution`-step grid over `input`.
pub fn brute_force_reach(net: &Network, input: &UnionOfPolyhedra, resolution: f64) -> Result<Vec<Array1<f64>>> {
    let xs = sample_input_set(input, SamplingStrategy::GridStep { step: resolution })?;
    xs.par_iter().map(|x| net.forward(x.view())).collect()
}

/// Monte-Carlo search for an input whose output lands in the unsafe set.
pub fn falsify(net: &Network, input: &UnionOfPolyhedra, spec: &SafetySpec, n: usize, seed: u64) -> Result<Option<Array1<f64>>> {
    let xs = sample_input_set(input, SamplingStrategy::Uniform { n, seed })?;
    let hits = xs
        .par_iter()
        .map(|x| Ok((spec.unsafe_set().contains_tol(net.forward(x.view())?.view(), 0.0), x)))
        .collect::<Result<Vec<_>>>()?;
    Ok(hits.into_iter().find(|h| h.0).map(|h| h.1.clone()))
}

/// CSV dump: one row per sample with input coordinates, output coordinates
/// and a 0/1 membership flag.
pub fn write_samples_csv(
    mut w: impl Write,
    inputs: &[Array1<f64>],
    outputs: &[Array1<f64>],
    member: &[bool],
) -> Result<()> {
    let (n_in, n_out) = (inputs.first().map_or(0, |x| x.len()), outputs.first().map_or(0, |y| y.len()));
    let header: Vec<String> = (0..n_in)
        .map(|i| format!("x{i}"))
        .chain((0..n_out).map(|i| format!("y{i}")))
        .chain(std::iter::once("member".to_string()))
        .collect();
    writeln!(w, "{}", header.join(","))?;
    for ((x, y), m) in inputs.iter().zip(outputs).zip(member) {
        let cells: Vec<String> = x
            .iter()
            .chain(y.iter())
            .map(|v| format!("{v:.16e}"))
            .chain(std::iter::once(u8::from(*m).to_string()))
            .collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    Ok(())
}

/// Axis-aligned bounds of a point cloud.
pub fn cloud_bounds(points: &[Array1<f64>]) -> Vec<(f64, f64)> {
    let dim = points.first().map_or(0, |p| p.len());
    (0..dim)
        .map(|k| {
            points
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p[k]), hi.max(p[k])))
        })
        .collect()
}
