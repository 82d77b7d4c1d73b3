//! Feedforward networks with ReLU and linear layers.

use std::fmt;
use std::io::Read;
use std::path::Path;

use ndarray::{Array1, Array2, ArrayView1};
use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::polyhedron::{matrix_to_rows, rows_to_matrix};

/// Default upper bound on `n` for full `2^n` pattern enumeration.
pub const DEFAULT_PATTERN_CAP: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Linear,
}

impl std::str::FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "relu" => Ok(Activation::Relu),
            "linear" => Ok(Activation::Linear),
            other => Err(Error::InvalidArgument(format!("unknown activation {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Layer {
    weights: Array2<f64>,
    bias: Array1<f64>,
    activation: Activation,
}

impl Layer {
    pub fn new(weights: Array2<f64>, bias: Array1<f64>, activation: Activation) -> Result<Self> {
        if bias.len() != weights.nrows() {
            return Err(Error::DimensionMismatch {
                context: "layer bias",
                expected: weights.nrows(),
                found: bias.len(),
            });
        }
        if weights.nrows() == 0 || weights.ncols() == 0 {
            return Err(Error::InvalidArgument("layer weights must be nonempty".into()));
        }
        if weights.iter().chain(bias.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput("layer parameters"));
        }
        Ok(Layer { weights, bias, activation })
    }

    pub fn relu(weights: Array2<f64>, bias: Array1<f64>) -> Result<Self> {
        Self::new(weights, bias, Activation::Relu)
    }

    pub fn linear(weights: Array2<f64>, bias: Array1<f64>) -> Result<Self> {
        Self::new(weights, bias, Activation::Linear)
    }

    pub fn weights(&self) -> &Array2<f64> {
        &self.weights
    }
    pub fn bias(&self) -> &Array1<f64> {
        &self.bias
    }
    pub fn activation(&self) -> Activation {
        self.activation
    }
    pub fn input_dim(&self) -> usize {
        self.weights.ncols()
    }
    pub fn output_dim(&self) -> usize {
        self.weights.nrows()
    }

    pub fn pre_activation(&self, x: ArrayView1<f64>) -> Array1<f64> {
        self.weights.dot(&x) + &self.bias
    }

    pub fn apply(&self, x: ArrayView1<f64>) -> Array1<f64> {
        let v = self.pre_activation(x);
        match self.activation {
            Activation::Relu => v.mapv(|t| t.max(0.0)),
            Activation::Linear => v,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Network {
    input_dim: usize,
    layers: Vec<Layer>,
}

impl Network {
    pub fn new(input_dim: usize, layers: Vec<Layer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidArgument("network needs at least one layer".into()));
        }
        let mut width = input_dim;
        for (i, layer) in layers.iter().enumerate() {
            if layer.input_dim() != width {
                return Err(Error::Shape {
                    layer: i,
                    message: format!("expects {} inputs, previous width is {}", layer.input_dim(), width),
                });
            }
            width = layer.output_dim();
        }
        Ok(Network { input_dim, layers })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }
    pub fn output_dim(&self) -> usize {
        self.layers.last().map(Layer::output_dim).unwrap_or(self.input_dim)
    }
    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }
    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    fn check_input(&self, x: ArrayView1<f64>) -> Result<()> {
        if x.len() != self.input_dim {
            return Err(Error::DimensionMismatch {
                context: "network input",
                expected: self.input_dim,
                found: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput("network input"));
        }
        Ok(())
    }

    pub fn forward(&self, x: ArrayView1<f64>) -> Result<Array1<f64>> {
        self.check_input(x)?;
        let mut v = x.to_owned();
        for layer in &self.layers {
            v = layer.apply(v.view());
        }
        Ok(v)
    }

    /// Pre-activation vectors of every layer, in order.
    pub fn pre_activations(&self, x: ArrayView1<f64>) -> Result<Vec<Array1<f64>>> {
        self.check_input(x)?;
        let mut out = Vec::with_capacity(self.layers.len());
        let mut v = x.to_owned();
        for layer in &self.layers {
            let pre = layer.pre_activation(v.view());
            v = match layer.activation {
                Activation::Relu => pre.mapv(|t| t.max(0.0)),
                Activation::Linear => pre.clone(),
            };
            out.push(pre);
        }
        Ok(out)
    }

    /// Evaluates with ReLU layers replaced by the fixed selectors in `patterns`
    /// (one entry per layer, `None` for linear layers).
    pub fn forward_with_patterns(
        &self,
        x: ArrayView1<f64>,
        patterns: &[Option<ActivationPattern>],
    ) -> Result<Array1<f64>> {
        self.check_input(x)?;
        if patterns.len() != self.layers.len() {
            return Err(Error::DimensionMismatch {
                context: "pattern trace length",
                expected: self.layers.len(),
                found: patterns.len(),
            });
        }
        let mut v = x.to_owned();
        for (layer, pattern) in self.layers.iter().zip(patterns) {
            let mut pre = layer.pre_activation(v.view());
            if let Some(p) = pattern {
                for (t, active) in pre.iter_mut().zip(p.bits()) {
                    if !active {
                        *t = 0.0;
                    }
                }
            }
            v = pre;
        }
        Ok(v)
    }

    pub fn to_json(&self) -> String {
        crate::json::to_canonical_string(&NetworkJson::from(self))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }
}

/// Reads a network from JSON, validating every layer shape.
pub fn load_network(reader: impl Read) -> Result<Network> {
    let raw: NetworkJson = serde_json::from_reader(reader)?;
    Network::try_from(raw)
}

pub fn load_network_file(path: impl AsRef<Path>) -> Result<Network> {
    load_network(std::io::BufReader::new(std::fs::File::open(path)?))
}

#[derive(Serialize, Deserialize)]
struct LayerJson {
    activation: Activation,
    #[serde(rename = "W")]
    w: Vec<Vec<f64>>,
    b: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct NetworkJson {
    input_dim: usize,
    layers: Vec<LayerJson>,
}

impl From<&Network> for NetworkJson {
    fn from(net: &Network) -> Self {
        NetworkJson {
            input_dim: net.input_dim,
            layers: net
                .layers
                .iter()
                .map(|l| LayerJson {
                    activation: l.activation,
                    w: matrix_to_rows(l.weights.view()),
                    b: l.bias.to_vec(),
                })
                .collect(),
        }
    }
}

impl TryFrom<NetworkJson> for Network {
    type Error = Error;

    fn try_from(raw: NetworkJson) -> Result<Self> {
        if raw.input_dim == 0 {
            return Err(Error::InvalidArgument("input_dim must be positive".into()));
        }
        let mut layers = Vec::with_capacity(raw.layers.len());
        for (i, l) in raw.layers.into_iter().enumerate() {
            let shape = |message: String| Error::Shape { layer: i, message };
            let cols = l.w.first().map(Vec::len).ok_or_else(|| shape("empty weight matrix".into()))?;
            let w = rows_to_matrix(&l.w, cols, "weights").map_err(|_| shape("ragged weight rows".into()))?;
            if l.b.len() != w.nrows() {
                return Err(shape(format!("bias has {} entries, W has {} rows", l.b.len(), w.nrows())));
            }
            let layer = Layer::new(w, Array1::from(l.b), l.activation).map_err(|e| shape(e.to_string()))?;
            layers.push(layer);
        }
        Network::new(raw.input_dim, layers)
    }
}

/// Top 53 bits of one generator output, scaled to `[0, 1)`.
pub(crate) fn unit_f64(rng: &mut SplitMix64) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform draw on `[-1, 1)` as `2u - 1`.
fn next_weight(rng: &mut SplitMix64) -> f64 {
    2.0 * unit_f64(rng) - 1.0
}

/// Random network with i.i.d. uniform `[-1, 1]` weights and biases.
///
/// The generator is SplitMix64 with its state initialised to `seed`. Values
/// are drawn layer by layer: the weight matrix in row-major order, then the
/// bias vector.
pub fn random_network(input_dim: usize, layers: &[(usize, Activation)], seed: u64) -> Result<Network> {
    if input_dim == 0 || layers.is_empty() || layers.iter().any(|(n, _)| *n == 0) {
        return Err(Error::InvalidArgument("layer sizes must be positive and nonempty".into()));
    }
    let mut rng = SplitMix64::from_seed(seed.to_le_bytes());
    let mut width = input_dim;
    let mut out = Vec::with_capacity(layers.len());
    for &(n, activation) in layers {
        let w = Array2::from_shape_simple_fn((n, width), || next_weight(&mut rng));
        let b = Array1::from_shape_simple_fn(n, || next_weight(&mut rng));
        out.push(Layer::new(w, b, activation)?);
        width = n;
    }
    Network::new(input_dim, out)
}

/// Layer specification for `sizes = [n0, n1, ..., nL]`: hidden layers use
/// `hidden`, the last layer uses `output`.
pub fn layer_plan(sizes: &[usize], hidden: Activation, output: Activation) -> Result<(usize, Vec<(usize, Activation)>)> {
    if sizes.len() < 2 {
        return Err(Error::InvalidArgument("need at least input and output sizes".into()));
    }
    let last = sizes.len() - 1;
    let plan = sizes[1..]
        .iter()
        .enumerate()
        .map(|(i, &n)| (n, if i + 1 == last { output } else { hidden }))
        .collect();
    Ok((sizes[0], plan))
}

/// The indicator vector of active neurons in one layer.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ActivationPattern {
    bits: Vec<bool>,
}

impl ActivationPattern {
    pub fn new(bits: Vec<bool>) -> Self {
        ActivationPattern { bits }
    }

    /// Pattern number `h` of width `n`: bit `i` (neuron `i`) is bit
    /// `n - 1 - i` of `h`, so `h = 0` is all-inactive and `h = 2^n - 1`
    /// all-active.
    pub fn from_index(n: usize, h: u64) -> Self {
        ActivationPattern { bits: (0..n).map(|i| (h >> (n - 1 - i)) & 1 == 1).collect() }
    }

    pub fn all(n: usize, active: bool) -> Self {
        ActivationPattern { bits: vec![active; n] }
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn is_active(&self, i: usize) -> bool {
        self.bits[i]
    }

    /// `None` when the pattern is wider than 64 neurons.
    pub fn index(&self) -> Option<u64> {
        if self.bits.len() > 64 {
            return None;
        }
        Some(self.bits.iter().fold(0u64, |h, &b| (h << 1) | b as u64))
    }

    /// The diagonal selector `diag(bits)`.
    pub fn selector(&self) -> Array2<f64> {
        Array2::from_diag(&Array1::from_iter(self.bits.iter().map(|&b| if b { 1.0 } else { 0.0 })))
    }

    pub fn parse(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::InvalidArgument(format!("bad pattern character {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(ActivationPattern::new)
    }
}

impl fmt::Display for ActivationPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// All `2^n` patterns in index order.
pub fn enumerate_patterns(n: usize, cap: usize) -> Result<impl Iterator<Item = ActivationPattern>> {
    if n == 0 {
        return Err(Error::InvalidArgument("pattern width must be positive".into()));
    }
    if n > cap || n >= 64 {
        return Err(Error::PatternSpaceTooLarge { neurons: n, cap });
    }
    Ok((0..1u64 << n).map(move |h| ActivationPattern::from_index(n, h)))
}
