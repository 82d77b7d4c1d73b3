//! Projection of affine images to H-representation.
//!
//! The image `{M x + c | x in D}` is lifted to `(x, y)` with `y = M x + c`.
//! Equalities are used first to substitute `x` coordinates away; whatever
//! `x` coordinates survive are removed by Fourier-Motzkin, with redundant
//! rows dropped after every step.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use super::lp::TOL;
use super::polyhedron::Polyhedron;
use crate::error::{Error, Result};

pub const DEFAULT_ROW_CAP: usize = 10_000;

const COEF_EPS: f64 = 1e-12;

#[derive(Clone, Debug)]
struct Row {
    coef: Vec<f64>,
    rhs: f64,
}

impl Row {
    fn norm(&self) -> f64 {
        self.coef.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// `self - factor * other`, with `col` forced to zero.
    fn eliminate(&mut self, other: &Row, col: usize) {
        let factor = self.coef[col] / other.coef[col];
        for (v, o) in self.coef.iter_mut().zip(&other.coef) {
            *v -= factor * o;
        }
        self.rhs -= factor * other.rhs;
        self.coef[col] = 0.0;
    }

    fn clean(&mut self, cols: std::ops::Range<usize>) {
        let norm = self.norm();
        for j in cols {
            if self.coef[j].abs() <= COEF_EPS * norm.max(1.0) {
                self.coef[j] = 0.0;
            }
        }
    }

    fn normalized(mut self) -> Option<Row> {
        let norm = self.norm();
        if norm < 1e-13 {
            return None;
        }
        for v in &mut self.coef {
            *v /= norm;
        }
        self.rhs /= norm;
        Some(self)
    }
}

pub(crate) fn project_image(
    domain: &Polyhedron,
    map: ArrayView2<f64>,
    offset: ArrayView1<f64>,
    row_cap: usize,
) -> Result<Polyhedron> {
    let n = domain.dim();
    let m = map.nrows();
    let width = n + m;

    let lift = |row: ArrayView1<f64>, rhs: f64| {
        let mut coef = vec![0.0; width];
        for (c, v) in coef.iter_mut().zip(row.iter()) {
            *c = *v;
        }
        Row { coef, rhs }
    };

    let mut ineqs: Vec<Row> = domain
        .ineq_lhs()
        .rows()
        .into_iter()
        .zip(domain.ineq_rhs().iter())
        .map(|(r, b)| lift(r, *b))
        .collect();
    let mut eqs: Vec<Row> = domain
        .eq_lhs()
        .rows()
        .into_iter()
        .zip(domain.eq_rhs().iter())
        .map(|(r, f)| lift(r, *f))
        .collect();
    for k in 0..m {
        let mut coef = vec![0.0; width];
        for j in 0..n {
            coef[j] = -map[[k, j]];
        }
        coef[n + k] = 1.0;
        eqs.push(Row { coef, rhs: offset[k] });
    }

    let mut alive = vec![true; n];

    // Equality pivoting.
    loop {
        let mut best: Option<(usize, usize, f64)> = None;
        for (r, row) in eqs.iter().enumerate() {
            let norm = row.norm().max(f64::MIN_POSITIVE);
            for j in (0..n).filter(|&j| alive[j]) {
                let weight = row.coef[j].abs() / norm;
                if weight > 1e-10 && best.is_none_or(|(_, _, w)| weight > w) {
                    best = Some((r, j, weight));
                }
            }
        }
        let Some((r, j, _)) = best else { break };
        let pivot = eqs.swap_remove(r);
        for row in eqs.iter_mut().chain(ineqs.iter_mut()) {
            if row.coef[j] != 0.0 {
                row.eliminate(&pivot, j);
            }
        }
        alive[j] = false;
    }

    let mut out_eqs = Vec::new();
    for mut row in eqs {
        row.clean(0..n);
        for j in 0..n {
            row.coef[j] = 0.0;
        }
        match row.normalized() {
            Some(r) => out_eqs.push(r),
            None => continue,
        }
    }

    let mut rows: Vec<Row> = ineqs
        .into_iter()
        .filter_map(|mut r| {
            r.clean(0..n);
            r.normalized()
        })
        .collect();

    // Fourier-Motzkin on the remaining input coordinates.
    while let Some(j) = pick_variable(&rows, &alive) {
        let (mut pos, mut neg, mut zero) = (Vec::new(), Vec::new(), Vec::new());
        for row in rows {
            if row.coef[j] > 0.0 {
                pos.push(row);
            } else if row.coef[j] < 0.0 {
                neg.push(row);
            } else {
                zero.push(row);
            }
        }
        let produced = zero.len() + pos.len() * neg.len();
        if produced > row_cap {
            return Err(Error::EliminationBlowup { rows: produced, cap: row_cap });
        }
        let mut next = zero;
        for p in &pos {
            for q in &neg {
                let (wp, wq) = (-q.coef[j], p.coef[j]);
                let mut coef: Vec<f64> = p
                    .coef
                    .iter()
                    .zip(&q.coef)
                    .map(|(a, b)| wp * a + wq * b)
                    .collect();
                coef[j] = 0.0;
                let mut row = Row { coef, rhs: wp * p.rhs + wq * q.rhs };
                row.clean(0..n);
                match row.normalized() {
                    Some(r) => next.push(r),
                    None => {
                        if wp * p.rhs + wq * q.rhs < -TOL {
                            return Err(Error::EmptyPolyhedron);
                        }
                    }
                }
            }
        }
        alive[j] = false;
        rows = prune(next, &out_eqs, width)?;
    }

    let ineq_lhs = Array2::from_shape_fn((rows.len(), m), |(r, k)| rows[r].coef[n + k]);
    let ineq_rhs = Array1::from_iter(rows.iter().map(|r| r.rhs));
    let eq_lhs = Array2::from_shape_fn((out_eqs.len(), m), |(r, k)| out_eqs[r].coef[n + k]);
    let eq_rhs = Array1::from_iter(out_eqs.iter().map(|r| r.rhs));
    Polyhedron::with_dim(m, ineq_lhs, ineq_rhs, eq_lhs, eq_rhs)
}

/// Alive input coordinate with the smallest Fourier-Motzkin fill-in.
fn pick_variable(rows: &[Row], alive: &[bool]) -> Option<usize> {
    (0..alive.len())
        .filter(|&j| alive[j])
        .min_by_key(|&j| {
            let pos = rows.iter().filter(|r| r.coef[j] > 0.0).count();
            let neg = rows.iter().filter(|r| r.coef[j] < 0.0).count();
            (pos * neg) as isize - (pos + neg) as isize
        })
}

fn prune(rows: Vec<Row>, eqs: &[Row], width: usize) -> Result<Vec<Row>> {
    if rows.is_empty() {
        return Ok(rows);
    }
    let a = Array2::from_shape_fn((rows.len(), width), |(r, k)| rows[r].coef[k]);
    let b = Array1::from_iter(rows.iter().map(|r| r.rhs));
    let e = Array2::from_shape_fn((eqs.len(), width), |(r, k)| eqs[r].coef[k]);
    let f = Array1::from_iter(eqs.iter().map(|r| r.rhs));
    let p = Polyhedron::with_dim(width, a, b, e, f)?.remove_redundancy()?;
    Ok(p.ineq_lhs()
        .rows()
        .into_iter()
        .zip(p.ineq_rhs().iter())
        .map(|(r, b)| Row { coef: r.to_vec(), rhs: *b })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::region::{region_to_polyhedron, AffineRegion};
    use ndarray::array;

    fn square() -> Polyhedron {
        Polyhedron::from_box(&[-1.0, -1.0], &[1.0, 1.0]).unwrap()
    }

    #[test]
    fn identity_image_is_domain() {
        let r = AffineRegion::identity(square());
        let p = region_to_polyhedron(&r, DEFAULT_ROW_CAP).unwrap();
        assert!(p.set_equals(&square()).unwrap());
    }

    #[test]
    fn constant_map_gives_point() {
        let dom = Polyhedron::from_box(&[-1.0], &[2.0]).unwrap();
        let r = AffineRegion::new(dom, array![[0.0]], array![0.0]).unwrap();
        let p = region_to_polyhedron(&r, DEFAULT_ROW_CAP).unwrap();
        assert_eq!(p.n_eq(), 1);
        assert!(p.contains(array![0.0].view()));
        assert!(!p.contains(array![1e-6].view()));
        assert!(p.set_equals(&Polyhedron::from_box(&[0.0], &[0.0]).unwrap()).unwrap());
    }

    #[test]
    fn sum_of_square_coordinates() {
        let r = AffineRegion::new(square(), array![[1.0, 1.0]], array![0.0]).unwrap();
        let p = region_to_polyhedron(&r, DEFAULT_ROW_CAP).unwrap();
        assert!(p.set_equals(&Polyhedron::from_box(&[-2.0], &[2.0]).unwrap()).unwrap());
    }

    #[test]
    fn lifting_into_higher_dimension() {
        // [-1,1] embedded as a segment in the plane.
        let dom = Polyhedron::from_box(&[-1.0], &[1.0]).unwrap();
        let r = AffineRegion::new(dom, array![[1.0], [2.0]], array![0.0, 1.0]).unwrap();
        let p = region_to_polyhedron(&r, DEFAULT_ROW_CAP).unwrap();
        assert!(p.contains(array![0.5, 2.0].view()));
        assert!(!p.contains(array![0.5, 2.1].view()));
        assert!(!p.contains(array![1.5, 4.0].view()));
    }

    #[test]
    fn blowup_is_reported() {
        let r = AffineRegion::new(
            Polyhedron::from_box(&[-1.0, -1.0, -1.0], &[1.0, 1.0, 1.0]).unwrap(),
            array![[1.0, 1.0, 1.0]],
            array![0.0],
        )
        .unwrap();
        assert!(matches!(
            region_to_polyhedron(&r, 1),
            Err(Error::EliminationBlowup { .. })
        ));
    }
}
