use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2};

use super::elimination::{project_image, DEFAULT_ROW_CAP};
use super::lp::{lp_minimize, LpSolution};
use super::polyhedron::Polyhedron;
use crate::error::{Error, Result};

/// The image `{map * x + offset | x in domain}` of an input-space polyhedron,
/// kept unprojected.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineRegion {
    domain: Polyhedron,
    map: Array2<f64>,
    offset: Array1<f64>,
}

impl AffineRegion {
    pub fn new(domain: Polyhedron, map: Array2<f64>, offset: Array1<f64>) -> Result<Self> {
        if map.ncols() != domain.dim() {
            return Err(Error::DimensionMismatch {
                context: "region map columns",
                expected: domain.dim(),
                found: map.ncols(),
            });
        }
        if offset.len() != map.nrows() {
            return Err(Error::DimensionMismatch {
                context: "region offset",
                expected: map.nrows(),
                found: offset.len(),
            });
        }
        if map.iter().chain(offset.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput("region map"));
        }
        Ok(AffineRegion { domain, map, offset })
    }

    /// Identity map over `domain`.
    pub fn identity(domain: Polyhedron) -> Self {
        let n = domain.dim();
        AffineRegion { domain, map: Array2::eye(n), offset: Array1::zeros(n) }
    }

    pub fn domain(&self) -> &Polyhedron {
        &self.domain
    }
    pub fn map(&self) -> ArrayView2<'_, f64> {
        self.map.view()
    }
    pub fn offset(&self) -> ArrayView1<'_, f64> {
        self.offset.view()
    }
    pub fn input_dim(&self) -> usize {
        self.map.ncols()
    }
    pub fn output_dim(&self) -> usize {
        self.map.nrows()
    }

    pub fn into_parts(self) -> (Polyhedron, Array2<f64>, Array1<f64>) {
        (self.domain, self.map, self.offset)
    }

    /// Post-composes with `y -> outer_map * y + outer_offset`.
    pub fn compose(&self, outer_map: ArrayView2<f64>, outer_offset: ArrayView1<f64>) -> Result<Self> {
        if outer_map.ncols() != self.output_dim() {
            return Err(Error::DimensionMismatch {
                context: "composed map columns",
                expected: self.output_dim(),
                found: outer_map.ncols(),
            });
        }
        AffineRegion::new(
            self.domain.clone(),
            outer_map.dot(&self.map),
            outer_map.dot(&self.offset) + outer_offset,
        )
    }

    pub fn with_domain(&self, domain: Polyhedron) -> Result<Self> {
        AffineRegion::new(domain, self.map.clone(), self.offset.clone())
    }

    pub fn image_of(&self, x: ArrayView1<f64>) -> Array1<f64> {
        self.map.dot(&x) + &self.offset
    }

    pub fn is_empty(&self) -> Result<bool> {
        self.domain.is_empty()
    }

    fn output_scale(&self, k: usize) -> f64 {
        let row = self.map.row(k);
        row.dot(&row).sqrt().max(1.0)
    }

    /// Residual of `y` against this region using `x` as the candidate preimage:
    /// the larger of the domain violation and the scaled output mismatch.
    pub fn witness_residual(&self, x: ArrayView1<f64>, y: ArrayView1<f64>) -> f64 {
        let image = self.image_of(x);
        let mismatch = (0..self.output_dim())
            .map(|k| (image[k] - y[k]).abs() / self.output_scale(k))
            .fold(0.0, f64::max);
        self.domain.violation(x).max(0.0).max(mismatch)
    }

    /// Smallest `t >= 0` such that some `x` violates every domain row by at
    /// most `t` (in unit-row distance) and matches `y` to within `t` per
    /// output coordinate (scaled by `max(1, ||map row||)`).
    pub fn membership_residual(&self, y: ArrayView1<f64>) -> Result<f64> {
        if y.len() != self.output_dim() {
            return Err(Error::DimensionMismatch {
                context: "membership point",
                expected: self.output_dim(),
                found: y.len(),
            });
        }
        let n = self.input_dim();
        let d = &self.domain;
        let rows = d.n_ineq() + 2 * d.n_eq() + 2 * self.output_dim() + 1;
        let mut a = Array2::zeros((rows, n + 1));
        let mut b = Array1::zeros(rows);
        let mut r = 0;
        let mut push = |a: &mut Array2<f64>, b: &mut Array1<f64>, row: ArrayView1<f64>, rhs: f64, scale: f64| {
            a.slice_mut(s![r, ..n]).assign(&row);
            a[[r, n]] = -scale;
            b[r] = rhs;
            r += 1;
        };
        for (row, rhs) in d.ineq_lhs().rows().into_iter().zip(d.ineq_rhs().iter()) {
            let norm = row.dot(&row).sqrt();
            push(&mut a, &mut b, row, *rhs, norm);
        }
        for (row, rhs) in d.eq_lhs().rows().into_iter().zip(d.eq_rhs().iter()) {
            let norm = row.dot(&row).sqrt();
            push(&mut a, &mut b, row, *rhs, norm);
            push(&mut a, &mut b, row.mapv(|v| -v).view(), -rhs, norm);
        }
        for k in 0..self.output_dim() {
            let scale = self.output_scale(k);
            let row = self.map.row(k);
            let target = y[k] - self.offset[k];
            push(&mut a, &mut b, row, target, scale);
            push(&mut a, &mut b, row.mapv(|v| -v).view(), -target, scale);
        }
        a[[rows - 1, n]] = -1.0;
        let mut c = Array1::zeros(n + 1);
        c[n] = 1.0;
        match lp_minimize(
            c.view(),
            a.view(),
            b.view(),
            Array2::zeros((0, n + 1)).view(),
            Array1::zeros(0).view(),
        )? {
            LpSolution::Optimal { value, .. } => Ok(value.max(0.0)),
            LpSolution::Infeasible | LpSolution::Unbounded => Err(Error::NumericalFailure(0)),
        }
    }

    /// `y` lies in the image up to `tol`.
    pub fn contains(&self, y: ArrayView1<f64>, tol: f64) -> Result<bool> {
        Ok(self.membership_residual(y)? <= tol)
    }

    /// Per-output-coordinate `(lo, hi)` over the image.
    pub fn output_bounds(&self) -> Result<Vec<(f64, f64)>> {
        (0..self.output_dim())
            .map(|k| {
                let (lo, hi) = self.domain.linear_range(self.map.row(k))?;
                Ok((lo + self.offset[k], hi + self.offset[k]))
            })
            .collect()
    }

    /// Explicit H-representation of the image.
    pub fn to_polyhedron(&self) -> Result<Polyhedron> {
        region_to_polyhedron(self, DEFAULT_ROW_CAP)
    }
}

/// H-representation of `{M x + c | x in domain}` by equality pivoting and
/// Fourier-Motzkin elimination of `x`.
pub fn region_to_polyhedron(region: &AffineRegion, row_cap: usize) -> Result<Polyhedron> {
    if region.domain.is_empty()? {
        return Err(Error::EmptyPolyhedron);
    }
    project_image(&region.domain, region.map.view(), region.offset.view(), row_cap)
}
