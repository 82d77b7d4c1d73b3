//! Safety checking of reach sets against polyhedral unsafe sets.

use ndarray::{Array1, Array2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::lp::TOL;
use crate::geometry::polyhedron::{matrix_to_rows, rows_to_matrix};
use crate::geometry::{Polyhedron, UnionOfPolyhedra};
use crate::netmodel::Network;
use crate::reach::{network_reach, ReachOptions, ReachSet, ReachStats};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpretation {
    UnsafeGiven,
    SafeGiven,
}

/// The unsafe output set to check, stored as a union regardless of how the
/// user phrased it.
#[derive(Clone, Debug, PartialEq)]
pub struct SafetySpec {
    unsafe_set: UnionOfPolyhedra,
    interpretation: Interpretation,
}

impl SafetySpec {
    pub fn unsafe_given(unsafe_set: UnionOfPolyhedra) -> Self {
        SafetySpec { unsafe_set, interpretation: Interpretation::UnsafeGiven }
    }

    /// Everything outside the interior of `safe` is unsafe.
    pub fn safe_given(safe: &Polyhedron) -> Result<Self> {
        Ok(SafetySpec { unsafe_set: complement_of_polyhedron(safe)?, interpretation: Interpretation::SafeGiven })
    }

    pub fn unsafe_set(&self) -> &UnionOfPolyhedra {
        &self.unsafe_set
    }
    pub fn interpretation(&self) -> Interpretation {
        self.interpretation
    }
    pub fn dim(&self) -> usize {
        self.unsafe_set.dim()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        match serde_json::from_str::<SpecJson>(text)? {
            SpecJson::Unsafe { pieces } => Ok(Self::unsafe_given(pieces_to_union(pieces)?)),
            SpecJson::Safe { pieces } => {
                let mut u = pieces_to_union(pieces)?;
                if u.len() != 1 {
                    return Err(Error::InvalidArgument(format!(
                        "a safe set must be a single polyhedron, got {} pieces",
                        u.len()
                    )));
                }
                let p = u.pieces().first().cloned().expect("one piece");
                u = complement_of_polyhedron(&p)?;
                Ok(SafetySpec { unsafe_set: u, interpretation: Interpretation::SafeGiven })
            }
            SpecJson::UnsafeBallInf { center, radius } => unsafe_from_infinity_ball(&center, radius),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct PieceJson {
    #[serde(rename = "C")]
    c: Vec<Vec<f64>>,
    d: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum SpecJson {
    Unsafe { pieces: Vec<PieceJson> },
    Safe { pieces: Vec<PieceJson> },
    UnsafeBallInf { center: Vec<f64>, radius: f64 },
}

fn pieces_to_union(pieces: Vec<PieceJson>) -> Result<UnionOfPolyhedra> {
    let dim = pieces
        .first()
        .and_then(|p| p.c.first())
        .map(Vec::len)
        .ok_or_else(|| Error::InvalidArgument("spec needs at least one piece with one row".into()))?;
    let polys = pieces
        .into_iter()
        .map(|p| {
            let a = rows_to_matrix(&p.c, dim, "spec C")?;
            Polyhedron::from_inequalities(a, Array1::from(p.d))
        })
        .collect::<Result<Vec<_>>>()?;
    UnionOfPolyhedra::new(dim, polys)
}

/// Serializes the unsafe pieces as an `"unsafe"` spec.
pub fn spec_to_json(spec: &SafetySpec) -> Result<String> {
    let pieces = spec
        .unsafe_set
        .pieces()
        .iter()
        .map(|p| {
            if p.n_eq() > 0 {
                return Err(Error::InvalidArgument("spec pieces with equalities cannot be written as C, d".into()));
            }
            Ok(PieceJson { c: matrix_to_rows(p.ineq_lhs()), d: p.ineq_rhs().to_vec() })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(crate::json::to_canonical_string(&SpecJson::Unsafe { pieces }))
}

/// Unsafe set `{y : ||y - center||_inf <= radius}`, with rows
/// `y_i <= center_i + r` and `-y_i <= r - center_i` per coordinate.
pub fn unsafe_from_infinity_ball(center: &[f64], radius: f64) -> Result<SafetySpec> {
    if radius.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) || !radius.is_finite() {
        return Err(Error::InvalidArgument(format!("radius must be positive, got {radius}")));
    }
    Ok(SafetySpec::unsafe_given(UnionOfPolyhedra::single(Polyhedron::infinity_ball(center, radius)?)))
}

/// Closed complement of a polyhedron: one half-space `a^T y >= b` per row.
/// Boundary points of `p` belong to both `p` and the result.
pub fn complement_of_polyhedron(p: &Polyhedron) -> Result<UnionOfPolyhedra> {
    if p.n_eq() > 0 {
        return Err(Error::EqualityNotComplementable);
    }
    let pieces = p
        .ineq_lhs()
        .rows()
        .into_iter()
        .zip(p.ineq_rhs().iter())
        .map(|(row, rhs)| {
            let a = row.mapv(|v| -v).insert_axis(ndarray::Axis(0));
            Polyhedron::from_inequalities(a, Array1::from(vec![-rhs]))
        })
        .collect::<Result<Vec<_>>>()?;
    UnionOfPolyhedra::new(p.dim(), pieces)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Safe,
    Unsafe,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub input: Vec<f64>,
    pub output: Vec<f64>,
    pub piece: usize,
    pub region: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Counterexample>,
    pub checked_pairs: usize,
}

impl Verdict {
    pub fn is_safe(&self) -> bool {
        self.status == Status::Safe
    }
}

#[derive(Serialize)]
struct VerdictFile<'a> {
    #[serde(flatten)]
    verdict: &'a Verdict,
    stats: &'a ReachStats,
}

pub fn verdict_to_json(verdict: &Verdict, stats: &ReachStats) -> String {
    crate::json::to_canonical_string(&VerdictFile { verdict, stats })
}

/// Checks a finished reach set. Pairs are scanned region-major, then by
/// unsafe piece; the first intersecting pair in that order supplies the
/// counterexample whatever order the workers finish in.
pub fn verify_reach_set(net: &Network, set: &ReachSet, spec: &SafetySpec) -> Result<Verdict> {
    if spec.dim() != set.output_dim() || net.output_dim() != set.output_dim() {
        return Err(Error::DimensionMismatch {
            context: "safety spec vs network output",
            expected: set.output_dim(),
            found: spec.dim(),
        });
    }
    let pieces = spec.unsafe_set.pieces();
    let total = set.len() * pieces.len();
    let hit = (0..total)
        .into_par_iter()
        .map(|k| -> Result<Option<Counterexample>> {
            let (ri, pi) = (k / pieces.len(), k % pieces.len());
            let region = &set.regions()[ri].region;
            let piece = &pieces[pi];
            // {x in D : C (M x + c) <= d, E (M x + c) = f}
            let a = piece.ineq_lhs().dot(&region.map());
            let b = piece.ineq_rhs().to_owned() - piece.ineq_lhs().dot(&region.offset());
            let e = piece.eq_lhs().dot(&region.map());
            let f = piece.eq_rhs().to_owned() - piece.eq_lhs().dot(&region.offset());
            let eq = Polyhedron::new(Array2::zeros((0, a.ncols())), Array1::zeros(0), e, f)?;
            let meet = region.domain().with_inequalities(a.view(), b.view())?.intersect(&eq)?;
            if meet.is_empty()? {
                return Ok(None);
            }
            let x = meet.interior_point()?.point;
            let y = net.forward(x.view())?;
            Ok(Some(Counterexample { input: x.to_vec(), output: y.to_vec(), piece: pi, region: ri }))
        })
        .find_map_first(|r| match r {
            Ok(None) => None,
            other => Some(other),
        });
    match hit {
        None => Ok(Verdict { status: Status::Safe, counterexample: None, checked_pairs: total }),
        Some(Err(e)) => Err(e),
        Some(Ok(Some(cx))) => {
            let checked = cx.region * pieces.len() + cx.piece + 1;
            Ok(Verdict { status: Status::Unsafe, counterexample: Some(cx), checked_pairs: checked })
        }
        Some(Ok(None)) => unreachable!(),
    }
}

/// Computes the reach set of `net` over `input` and checks it against `spec`.
pub fn verify_network(
    net: &Network,
    input: &UnionOfPolyhedra,
    spec: &SafetySpec,
    opts: &ReachOptions,
) -> Result<(Verdict, ReachStats)> {
    if spec.dim() != net.output_dim() {
        return Err(Error::DimensionMismatch {
            context: "safety spec vs network output",
            expected: net.output_dim(),
            found: spec.dim(),
        });
    }
    let (set, stats) = network_reach(net, input, opts)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    let verdict = pool.install(|| verify_reach_set(net, &set, spec))?;
    Ok((verdict, stats))
}

/// Re-checks a counterexample by direct evaluation: the forward output
/// matches within `tol` and lies in the named unsafe piece.
pub fn check_counterexample(net: &Network, spec: &SafetySpec, cx: &Counterexample, tol: f64) -> Result<bool> {
    let y = net.forward(Array1::from(cx.input.clone()).view())?;
    let matches = y.iter().zip(&cx.output).all(|(a, b)| (a - b).abs() <= tol);
    let piece = spec
        .unsafe_set
        .pieces()
        .get(cx.piece)
        .ok_or_else(|| Error::InvalidArgument(format!("no unsafe piece {}", cx.piece)))?;
    Ok(matches && piece.contains_tol(y.view(), tol.max(TOL)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::Layer;
    use crate::reach::ReachMode;
    use ndarray::array;

    fn identity_net() -> Network {
        Network::new(2, vec![Layer::linear(Array2::eye(2), Array1::zeros(2)).unwrap()]).unwrap()
    }

    fn square() -> UnionOfPolyhedra {
        UnionOfPolyhedra::single(Polyhedron::from_box(&[-1.0, -1.0], &[1.0, 1.0]).unwrap())
    }

    fn half_plane_y1_at_least(t: f64) -> SafetySpec {
        SafetySpec::unsafe_given(UnionOfPolyhedra::single(
            Polyhedron::from_inequalities(array![[-1.0, 0.0]], array![-t]).unwrap(),
        ))
    }

    #[test]
    fn identity_safe_and_unsafe() {
        let opts = ReachOptions::default();
        let (v, _) = verify_network(&identity_net(), &square(), &half_plane_y1_at_least(2.0), &opts).unwrap();
        assert!(v.is_safe());
        assert_eq!(v.checked_pairs, 1);
        let spec = half_plane_y1_at_least(0.5);
        let (v, _) = verify_network(&identity_net(), &square(), &spec, &opts).unwrap();
        let cx = v.counterexample.clone().unwrap();
        assert_eq!(v.status, Status::Unsafe);
        assert!(cx.input[0] >= 0.5 - 1e-9);
        assert!(check_counterexample(&identity_net(), &spec, &cx, 1e-6).unwrap());
    }

    #[test]
    fn ball_rows() {
        let spec = unsafe_from_infinity_ball(&[0.0, 5.0], 1.0).unwrap();
        let p = &spec.unsafe_set().pieces()[0];
        assert_eq!(p.ineq_lhs(), array![[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]]);
        assert_eq!(p.ineq_rhs(), array![1.0, 1.0, 6.0, -4.0]);
        assert!(p.contains(array![0.0, 5.0].view()));
        assert!(unsafe_from_infinity_ball(&[0.0], 0.0).is_err());
    }

    #[test]
    fn complements() {
        let half = Polyhedron::from_inequalities(array![[1.0]], array![1.0]).unwrap();
        let c = complement_of_polyhedron(&half).unwrap();
        assert_eq!(c.len(), 1);
        assert!(c.contains(array![1.0].view()) && c.contains(array![3.0].view()));
        assert!(!c.contains(array![0.0].view()));

        let b = Polyhedron::from_box(&[-1.0, -1.0], &[1.0, 1.0]).unwrap();
        let c = complement_of_polyhedron(&b).unwrap();
        assert_eq!(c.len(), 4);
        assert!(c.contains(array![1.0, 0.0].view()) && b.contains(array![1.0, 0.0].view()));
        assert!(!c.contains(array![0.0, 0.0].view()));

        let seg = Polyhedron::new(array![[1.0, 0.0]], array![1.0], array![[0.0, 1.0]], array![0.0]).unwrap();
        assert!(matches!(complement_of_polyhedron(&seg), Err(Error::EqualityNotComplementable)));
    }

    #[test]
    fn safe_given_spec() {
        let safe = Polyhedron::from_box(&[-2.0, -2.0], &[2.0, 2.0]).unwrap();
        let spec = SafetySpec::safe_given(&safe).unwrap();
        let (v, _) = verify_network(&identity_net(), &square(), &spec, &ReachOptions::default()).unwrap();
        assert!(v.is_safe());
        let tight = Polyhedron::from_box(&[-0.5, -2.0], &[2.0, 2.0]).unwrap();
        let spec = SafetySpec::safe_given(&tight).unwrap();
        let (v, _) = verify_network(&identity_net(), &square(), &spec, &ReachOptions::default()).unwrap();
        assert!(!v.is_safe());
    }

    #[test]
    fn relu_scan_order_is_deterministic() {
        let net = Network::new(2, vec![Layer::relu(Array2::eye(2), Array1::zeros(2)).unwrap()]).unwrap();
        let spec = unsafe_from_infinity_ball(&[0.0, 0.0], 0.25).unwrap();
        for mode in [ReachMode::Patterns, ReachMode::Neuronwise] {
            let (v, _) = verify_network(&net, &square(), &spec, &ReachOptions::with_mode(mode).jobs(2)).unwrap();
            let cx = v.counterexample.unwrap();
            assert_eq!((cx.region, cx.piece), (0, 0));
            assert_eq!(v.checked_pairs, 1);
        }
    }

    #[test]
    fn spec_json() {
        let s = SpecJson::UnsafeBallInf { center: vec![0.0, 5.0], radius: 1.0 };
        let text = serde_json::to_string(&s).unwrap();
        assert_eq!(text, r#"{"kind":"unsafe_ball_inf","center":[0.0,5.0],"radius":1.0}"#);
        let spec = SafetySpec::from_json(&text).unwrap();
        assert_eq!(spec, unsafe_from_infinity_ball(&[0.0, 5.0], 1.0).unwrap());
        let back = SafetySpec::from_json(&spec_to_json(&spec).unwrap()).unwrap();
        assert_eq!(back, spec);
        let safe = SafetySpec::from_json(r#"{"kind":"safe","pieces":[{"C":[[1.0]],"d":[1.0]}]}"#).unwrap();
        assert_eq!(safe.interpretation(), Interpretation::SafeGiven);
        assert!(SafetySpec::from_json(r#"{"kind":"unsafe","pieces":[]}"#).is_err());
        assert!(SafetySpec::from_json(r#"{"kind":"nope"}"#).is_err());
    }
}
