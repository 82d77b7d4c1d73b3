use ndarray::{concatenate, s, Array1, Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use super::lp::{lp_feasible, lp_minimize, LpOutcome, LpSolution, TOL};
use crate::error::{Error, Result};

/// Half-width of the box added to the Chebyshev LP when the input is unbounded.
pub const REGULARIZATION_BOX: f64 = 1e6;

/// H-representation `{x | A x <= b, E x = f}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Polyhedron {
    dim: usize,
    ineq_lhs: Array2<f64>,
    ineq_rhs: Array1<f64>,
    eq_lhs: Array2<f64>,
    eq_rhs: Array1<f64>,
}

/// Center of the largest inscribed ball, see [`Polyhedron::interior_point`].
#[derive(Clone, Debug, PartialEq)]
pub struct InteriorPoint {
    pub point: Array1<f64>,
    pub radius: f64,
    /// True when a bounding box had to be added because the LP was unbounded.
    pub regularized: bool,
}

impl Polyhedron {
    pub fn new(
        ineq_lhs: Array2<f64>,
        ineq_rhs: Array1<f64>,
        eq_lhs: Array2<f64>,
        eq_rhs: Array1<f64>,
    ) -> Result<Self> {
        let dim = if ineq_lhs.nrows() > 0 || eq_lhs.nrows() == 0 {
            ineq_lhs.ncols()
        } else {
            eq_lhs.ncols()
        };
        Self::with_dim(dim, ineq_lhs, ineq_rhs, eq_lhs, eq_rhs)
    }

    pub fn with_dim(
        dim: usize,
        ineq_lhs: Array2<f64>,
        ineq_rhs: Array1<f64>,
        eq_lhs: Array2<f64>,
        eq_rhs: Array1<f64>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("polyhedron dimension must be positive".into()));
        }
        let ineq_lhs = if ineq_lhs.nrows() == 0 { Array2::zeros((0, dim)) } else { ineq_lhs };
        let eq_lhs = if eq_lhs.nrows() == 0 { Array2::zeros((0, dim)) } else { eq_lhs };
        for (lhs, rhs, context) in [
            (&ineq_lhs, &ineq_rhs, "inequality rows"),
            (&eq_lhs, &eq_rhs, "equality rows"),
        ] {
            if lhs.ncols() != dim {
                return Err(Error::DimensionMismatch { context, expected: dim, found: lhs.ncols() });
            }
            if lhs.nrows() != rhs.len() {
                return Err(Error::DimensionMismatch {
                    context,
                    expected: lhs.nrows(),
                    found: rhs.len(),
                });
            }
            if lhs.iter().chain(rhs.iter()).any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteInput(context));
            }
        }
        Ok(Polyhedron { dim, ineq_lhs, ineq_rhs, eq_lhs, eq_rhs })
    }

    pub fn from_inequalities(a: Array2<f64>, b: Array1<f64>) -> Result<Self> {
        let dim = a.ncols();
        Self::with_dim(dim, a, b, Array2::zeros((0, dim)), Array1::zeros(0))
    }

    /// All of `R^dim`.
    pub fn universe(dim: usize) -> Self {
        Polyhedron {
            dim,
            ineq_lhs: Array2::zeros((0, dim)),
            ineq_rhs: Array1::zeros(0),
            eq_lhs: Array2::zeros((0, dim)),
            eq_rhs: Array1::zeros(0),
        }
    }

    /// The empty set, encoded as the single row `0 <= -1`.
    pub fn empty(dim: usize) -> Self {
        Polyhedron {
            dim,
            ineq_lhs: Array2::zeros((1, dim)),
            ineq_rhs: Array1::from_elem(1, -1.0),
            eq_lhs: Array2::zeros((0, dim)),
            eq_rhs: Array1::zeros(0),
        }
    }

    /// Axis-aligned box; rows ordered `x_i <= hi_i, -x_i <= -lo_i` per coordinate.
    pub fn from_box(lo: &[f64], hi: &[f64]) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch {
                context: "box bounds",
                expected: lo.len(),
                found: hi.len(),
            });
        }
        let dim = lo.len();
        let mut a = Array2::zeros((2 * dim, dim));
        let mut b = Array1::zeros(2 * dim);
        for i in 0..dim {
            a[[2 * i, i]] = 1.0;
            b[2 * i] = hi[i];
            a[[2 * i + 1, i]] = -1.0;
            b[2 * i + 1] = -lo[i];
        }
        Self::from_inequalities(a, b)
    }

    /// `{x | ||x - center||_inf <= radius}`.
    pub fn infinity_ball(center: &[f64], radius: f64) -> Result<Self> {
        let lo: Vec<f64> = center.iter().map(|c| c - radius).collect();
        let hi: Vec<f64> = center.iter().map(|c| c + radius).collect();
        Self::from_box(&lo, &hi)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn ineq_lhs(&self) -> ArrayView2<'_, f64> {
        self.ineq_lhs.view()
    }
    pub fn ineq_rhs(&self) -> ArrayView1<'_, f64> {
        self.ineq_rhs.view()
    }
    pub fn eq_lhs(&self) -> ArrayView2<'_, f64> {
        self.eq_lhs.view()
    }
    pub fn eq_rhs(&self) -> ArrayView1<'_, f64> {
        self.eq_rhs.view()
    }
    pub fn n_ineq(&self) -> usize {
        self.ineq_rhs.len()
    }
    pub fn n_eq(&self) -> usize {
        self.eq_rhs.len()
    }

    pub fn contains(&self, x: ArrayView1<f64>) -> bool {
        self.contains_tol(x, TOL)
    }

    /// Membership with every row relaxed by `tol * ||row||`.
    pub fn contains_tol(&self, x: ArrayView1<f64>, tol: f64) -> bool {
        x.len() == self.dim && self.violation(x) <= tol
    }

    /// Largest row violation, each row scaled to unit norm; zero rows count
    /// their raw violation.
    pub fn violation(&self, x: ArrayView1<f64>) -> f64 {
        let mut worst = 0.0f64;
        for (row, rhs) in self.ineq_lhs.rows().into_iter().zip(self.ineq_rhs.iter()) {
            let norm = row.dot(&row).sqrt().max(f64::MIN_POSITIVE);
            let excess = row.dot(&x) - rhs;
            worst = worst.max(if norm > 1e-13 { excess / norm } else { excess });
        }
        for (row, rhs) in self.eq_lhs.rows().into_iter().zip(self.eq_rhs.iter()) {
            let norm = row.dot(&row).sqrt();
            let excess = (row.dot(&x) - rhs).abs();
            worst = worst.max(if norm > 1e-13 { excess / norm } else { excess });
        }
        worst
    }

    pub fn feasibility(&self) -> Result<LpOutcome> {
        lp_feasible(
            self.ineq_lhs.view(),
            self.ineq_rhs.view(),
            self.eq_lhs.view(),
            self.eq_rhs.view(),
        )
    }

    pub fn is_empty(&self) -> Result<bool> {
        Ok(!self.feasibility()?.is_feasible())
    }

    /// Minimizes `c . x` over the polyhedron.
    pub fn minimize(&self, c: ArrayView1<f64>) -> Result<LpSolution> {
        lp_minimize(
            c,
            self.ineq_lhs.view(),
            self.ineq_rhs.view(),
            self.eq_lhs.view(),
            self.eq_rhs.view(),
        )
    }

    /// `(min, max)` of `c . x`; infinite ends mean unbounded in that direction.
    pub fn linear_range(&self, c: ArrayView1<f64>) -> Result<(f64, f64)> {
        let lo = match self.minimize(c)? {
            LpSolution::Optimal { value, .. } => value,
            LpSolution::Unbounded => f64::NEG_INFINITY,
            LpSolution::Infeasible => return Err(Error::EmptyPolyhedron),
        };
        let neg = c.mapv(|v| -v);
        let hi = match self.minimize(neg.view())? {
            LpSolution::Optimal { value, .. } => -value,
            LpSolution::Unbounded => f64::INFINITY,
            LpSolution::Infeasible => return Err(Error::EmptyPolyhedron),
        };
        Ok((lo, hi))
    }

    /// Per-coordinate `(lo, hi)` bounds; fails on unbounded or empty input.
    pub fn bounding_box(&self) -> Result<Vec<(f64, f64)>> {
        (0..self.dim)
            .map(|i| {
                let mut c = Array1::zeros(self.dim);
                c[i] = 1.0;
                let (lo, hi) = self.linear_range(c.view())?;
                if lo.is_finite() && hi.is_finite() {
                    Ok((lo, hi))
                } else {
                    Err(Error::Unbounded)
                }
            })
            .collect()
    }

    /// Chebyshev center: the center of the largest ball inside the
    /// inequality rows, restricted to the affine hull of the equalities.
    pub fn interior_point(&self) -> Result<InteriorPoint> {
        let projected = self.project_rows_onto_equality_nullspace();
        match self.chebyshev(&projected, false)? {
            Some(found) => Ok(found),
            None => self
                .chebyshev(&projected, true)?
                .ok_or(Error::NumericalFailure(0)),
        }
    }

    fn chebyshev(&self, row_norms: &[f64], regularize: bool) -> Result<Option<InteriorPoint>> {
        let n = self.dim;
        let extra = if regularize { 2 * n } else { 0 };
        let rows = self.n_ineq() + extra + 1;
        let mut a = Array2::zeros((rows, n + 1));
        let mut b = Array1::zeros(rows);
        a.slice_mut(s![..self.n_ineq(), ..n]).assign(&self.ineq_lhs);
        for (i, norm) in row_norms.iter().enumerate() {
            a[[i, n]] = *norm;
            b[i] = self.ineq_rhs[i];
        }
        let mut r = self.n_ineq();
        if regularize {
            for k in 0..n {
                a[[r, k]] = 1.0;
                a[[r, n]] = 1.0;
                b[r] = REGULARIZATION_BOX;
                a[[r + 1, k]] = -1.0;
                a[[r + 1, n]] = 1.0;
                b[r + 1] = REGULARIZATION_BOX;
                r += 2;
            }
        }
        a[[r, n]] = -1.0;
        let mut e = Array2::zeros((self.n_eq(), n + 1));
        e.slice_mut(s![.., ..n]).assign(&self.eq_lhs);
        let mut c = Array1::zeros(n + 1);
        c[n] = -1.0;
        match lp_minimize(c.view(), a.view(), b.view(), e.view(), self.eq_rhs.view())? {
            LpSolution::Optimal { point, value } => Ok(Some(InteriorPoint {
                point: point.slice(s![..n]).to_owned(),
                radius: (-value).max(0.0),
                regularized: regularize,
            })),
            LpSolution::Infeasible => Err(Error::EmptyPolyhedron),
            LpSolution::Unbounded => Ok(None),
        }
    }

    /// Norms of the inequality rows after projecting out the equality directions.
    fn project_rows_onto_equality_nullspace(&self) -> Vec<f64> {
        let basis = orthonormal_rows(self.eq_lhs.view());
        self.ineq_lhs
            .rows()
            .into_iter()
            .map(|row| {
                let mut v = row.to_owned();
                for q in &basis {
                    let d = v.dot(q);
                    v.scaled_add(-d, q);
                }
                v.dot(&v).sqrt()
            })
            .collect()
    }

    /// Row concatenation.
    pub fn intersect(&self, other: &Polyhedron) -> Result<Polyhedron> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                context: "intersect",
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(Polyhedron {
            dim: self.dim,
            ineq_lhs: concatenate![Axis(0), self.ineq_lhs, other.ineq_lhs],
            ineq_rhs: concatenate![Axis(0), self.ineq_rhs, other.ineq_rhs],
            eq_lhs: concatenate![Axis(0), self.eq_lhs, other.eq_lhs],
            eq_rhs: concatenate![Axis(0), self.eq_rhs, other.eq_rhs],
        })
    }

    /// Appends inequality rows `a x <= b`.
    pub fn with_inequalities(&self, a: ArrayView2<f64>, b: ArrayView1<f64>) -> Result<Polyhedron> {
        let extra = Polyhedron::with_dim(
            self.dim,
            a.to_owned(),
            b.to_owned(),
            Array2::zeros((0, self.dim)),
            Array1::zeros(0),
        )?;
        self.intersect(&extra)
    }

    /// `{x | M x + c in self}`.
    pub fn affine_preimage(&self, map: ArrayView2<f64>, offset: ArrayView1<f64>) -> Result<Polyhedron> {
        if map.nrows() != self.dim {
            return Err(Error::DimensionMismatch {
                context: "preimage map rows",
                expected: self.dim,
                found: map.nrows(),
            });
        }
        if offset.len() != self.dim {
            return Err(Error::DimensionMismatch {
                context: "preimage offset",
                expected: self.dim,
                found: offset.len(),
            });
        }
        Polyhedron::with_dim(
            map.ncols(),
            self.ineq_lhs.dot(&map),
            &self.ineq_rhs - &self.ineq_lhs.dot(&offset),
            self.eq_lhs.dot(&map),
            &self.eq_rhs - &self.eq_lhs.dot(&offset),
        )
    }

    /// Drops inequality rows implied by the others, one LP per row.
    pub fn remove_redundancy(&self) -> Result<Polyhedron> {
        if self.is_empty()? {
            return Err(Error::EmptyPolyhedron);
        }
        let mut kept: Vec<usize> = Vec::with_capacity(self.n_ineq());
        for i in 0..self.n_ineq() {
            let row = self.ineq_lhs.row(i);
            let norm = row.dot(&row).sqrt();
            if norm < 1e-13 {
                // 0 <= b with b >= 0 here, since the set is nonempty.
                continue;
            }
            kept.push(i);
        }
        let mut idx = 0;
        while idx < kept.len() {
            let i = kept[idx];
            let others: Vec<usize> = kept.iter().copied().filter(|&k| k != i).collect();
            let a = self.ineq_lhs.select(Axis(0), &others);
            let b = self.ineq_rhs.select(Axis(0), &others);
            let row = self.ineq_lhs.row(i);
            let norm = row.dot(&row).sqrt();
            let neg = row.mapv(|v| -v);
            let redundant = match lp_minimize(
                neg.view(),
                a.view(),
                b.view(),
                self.eq_lhs.view(),
                self.eq_rhs.view(),
            )? {
                LpSolution::Optimal { value, .. } => -value <= self.ineq_rhs[i] + TOL * norm,
                LpSolution::Unbounded => false,
                LpSolution::Infeasible => false,
            };
            if redundant {
                kept.remove(idx);
            } else {
                idx += 1;
            }
        }
        Ok(Polyhedron {
            dim: self.dim,
            ineq_lhs: self.ineq_lhs.select(Axis(0), &kept),
            ineq_rhs: self.ineq_rhs.select(Axis(0), &kept),
            eq_lhs: self.eq_lhs.clone(),
            eq_rhs: self.eq_rhs.clone(),
        })
    }

    /// `self ⊆ other`, decided row by row with LPs over `self`.
    pub fn is_subset_of(&self, other: &Polyhedron) -> Result<bool> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                context: "subset test",
                expected: self.dim,
                found: other.dim,
            });
        }
        if self.is_empty()? {
            return Ok(true);
        }
        for (row, rhs) in other.ineq_lhs.rows().into_iter().zip(other.ineq_rhs.iter()) {
            let norm = row.dot(&row).sqrt();
            let (_, hi) = self.linear_range(row)?;
            if hi > rhs + TOL * norm.max(1.0) {
                return Ok(false);
            }
        }
        for (row, rhs) in other.eq_lhs.rows().into_iter().zip(other.eq_rhs.iter()) {
            let norm = row.dot(&row).sqrt();
            let (lo, hi) = self.linear_range(row)?;
            if hi > rhs + TOL * norm.max(1.0) || lo < rhs - TOL * norm.max(1.0) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Mutual containment.
    pub fn set_equals(&self, other: &Polyhedron) -> Result<bool> {
        Ok(self.is_subset_of(other)? && other.is_subset_of(self)?)
    }
}

/// Modified Gram-Schmidt; rows that are numerically dependent are skipped.
pub(crate) fn orthonormal_rows(rows: ArrayView2<f64>) -> Vec<Array1<f64>> {
    let mut basis: Vec<Array1<f64>> = Vec::new();
    for row in rows.rows() {
        let mut v = row.to_owned();
        let scale = v.dot(&v).sqrt();
        if scale < 1e-13 {
            continue;
        }
        for q in &basis {
            let d = v.dot(q);
            v.scaled_add(-d, q);
        }
        let norm = v.dot(&v).sqrt();
        if norm > 1e-10 * scale {
            basis.push(v / norm);
        }
    }
    basis
}

/// Ordered list of polyhedra of equal dimension; the empty list is the empty set.
#[derive(Clone, Debug, PartialEq)]
pub struct UnionOfPolyhedra {
    dim: usize,
    pieces: Vec<Polyhedron>,
}

impl UnionOfPolyhedra {
    pub fn new(dim: usize, pieces: Vec<Polyhedron>) -> Result<Self> {
        for p in &pieces {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch {
                    context: "union piece",
                    expected: dim,
                    found: p.dim(),
                });
            }
        }
        Ok(UnionOfPolyhedra { dim, pieces })
    }

    pub fn from_pieces(pieces: Vec<Polyhedron>) -> Result<Self> {
        let dim = pieces
            .first()
            .map(Polyhedron::dim)
            .ok_or_else(|| Error::InvalidArgument("cannot infer dimension of an empty union".into()))?;
        Self::new(dim, pieces)
    }

    pub fn single(p: Polyhedron) -> Self {
        UnionOfPolyhedra { dim: p.dim(), pieces: vec![p] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn pieces(&self) -> &[Polyhedron] {
        &self.pieces
    }
    // `is_empty` would read as geometric emptiness; see `is_empty_list`.
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.pieces.len()
    }
    pub fn is_empty_list(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn contains(&self, x: ArrayView1<f64>) -> bool {
        self.contains_tol(x, TOL)
    }

    pub fn contains_tol(&self, x: ArrayView1<f64>, tol: f64) -> bool {
        self.pieces.iter().any(|p| p.contains_tol(x, tol))
    }
}

// JSON wire format.

#[derive(Serialize, Deserialize)]
pub(crate) struct PolyhedronJson {
    #[serde(rename = "A")]
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    #[serde(rename = "E", default)]
    e: Vec<Vec<f64>>,
    #[serde(default)]
    f: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dim: Option<usize>,
}

pub(crate) fn matrix_to_rows(m: ArrayView2<f64>) -> Vec<Vec<f64>> {
    m.rows().into_iter().map(|r| r.to_vec()).collect()
}

pub(crate) fn rows_to_matrix(rows: &[Vec<f64>], cols: usize, context: &'static str) -> Result<Array2<f64>> {
    let mut m = Array2::zeros((rows.len(), cols));
    for (i, r) in rows.iter().enumerate() {
        if r.len() != cols {
            return Err(Error::DimensionMismatch { context, expected: cols, found: r.len() });
        }
        m.row_mut(i).assign(&ArrayView1::from(r.as_slice()));
    }
    Ok(m)
}

impl From<&Polyhedron> for PolyhedronJson {
    fn from(p: &Polyhedron) -> Self {
        PolyhedronJson {
            a: matrix_to_rows(p.ineq_lhs.view()),
            b: p.ineq_rhs.to_vec(),
            e: matrix_to_rows(p.eq_lhs.view()),
            f: p.eq_rhs.to_vec(),
            dim: (p.n_ineq() == 0 && p.n_eq() == 0).then_some(p.dim),
        }
    }
}

impl TryFrom<PolyhedronJson> for Polyhedron {
    type Error = Error;

    fn try_from(j: PolyhedronJson) -> Result<Self> {
        let dim = j
            .dim
            .or_else(|| j.a.first().map(Vec::len))
            .or_else(|| j.e.first().map(Vec::len))
            .ok_or_else(|| Error::InvalidArgument("polyhedron without rows needs \"dim\"".into()))?;
        let a = rows_to_matrix(&j.a, dim, "polyhedron A")?;
        let e = rows_to_matrix(&j.e, dim, "polyhedron E")?;
        Polyhedron::with_dim(dim, a, Array1::from(j.b), e, Array1::from(j.f))
    }
}

impl Serialize for Polyhedron {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PolyhedronJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Polyhedron {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = PolyhedronJson::deserialize(d)?;
        Polyhedron::try_from(j).map_err(serde::de::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct UnionJson {
    pieces: Vec<Polyhedron>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dim: Option<usize>,
}

impl Serialize for UnionOfPolyhedra {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        UnionJson {
            pieces: self.pieces.clone(),
            dim: self.pieces.is_empty().then_some(self.dim),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for UnionOfPolyhedra {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = UnionJson::deserialize(d)?;
        let dim = j
            .dim
            .or_else(|| j.pieces.first().map(Polyhedron::dim))
            .ok_or_else(|| serde::de::Error::custom("empty union needs \"dim\""))?;
        UnionOfPolyhedra::new(dim, j.pieces).map_err(serde::de::Error::custom)
    }
}
