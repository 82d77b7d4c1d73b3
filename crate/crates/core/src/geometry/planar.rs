use ndarray::{array, Array1};

use super::polyhedron::{orthonormal_rows, Polyhedron};
use crate::error::{Error, Result};

const MERGE_EPS: f64 = 1e-9;

/// Counter-clockwise vertices of a bounded planar polyhedron, starting from
/// the lowest-x (then lowest-y) vertex. Segments yield two points and single
/// points one.
pub fn vertices_2d(p: &Polyhedron) -> Result<Vec<[f64; 2]>> {
    if p.dim() != 2 {
        return Err(Error::DimensionMismatch { context: "vertices_2d", expected: 2, found: p.dim() });
    }
    let anchor = match p.feasibility()?.witness {
        Some(w) => w,
        None => return Err(Error::EmptyPolyhedron),
    };
    // Fails with Unbounded when any coordinate is unbounded.
    p.bounding_box()?;

    let basis = orthonormal_rows(p.eq_lhs());
    let candidates: Vec<[f64; 2]> = match basis.len() {
        0 => pairwise_intersections(p),
        1 => {
            let dir = array![-basis[0][1], basis[0][0]];
            segment_ends(p, &anchor, &dir)
        }
        _ => vec![[anchor[0], anchor[1]]],
    };
    let tol = 1e-7;
    let mut pts: Vec<[f64; 2]> = candidates
        .into_iter()
        .filter(|v| p.contains_tol(array![v[0], v[1]].view(), tol))
        .collect();
    if pts.is_empty() {
        pts.push([anchor[0], anchor[1]]);
    }
    Ok(convex_hull(pts))
}

fn pairwise_intersections(p: &Polyhedron) -> Vec<[f64; 2]> {
    let a = p.ineq_lhs();
    let b = p.ineq_rhs();
    let mut out = Vec::new();
    for i in 0..a.nrows() {
        for j in i + 1..a.nrows() {
            let det = a[[i, 0]] * a[[j, 1]] - a[[i, 1]] * a[[j, 0]];
            let scale = (a.row(i).dot(&a.row(i)) * a.row(j).dot(&a.row(j))).sqrt();
            if det.abs() <= 1e-12 * scale.max(f64::MIN_POSITIVE) {
                continue;
            }
            let x = (b[i] * a[[j, 1]] - a[[i, 1]] * b[j]) / det;
            let y = (a[[i, 0]] * b[j] - b[i] * a[[j, 0]]) / det;
            out.push([x, y]);
        }
    }
    out
}

fn segment_ends(p: &Polyhedron, anchor: &Array1<f64>, dir: &Array1<f64>) -> Vec<[f64; 2]> {
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for (row, rhs) in p.ineq_lhs().rows().into_iter().zip(p.ineq_rhs().iter()) {
        let slope = row.dot(dir);
        let slack = rhs - row.dot(anchor);
        let norm = row.dot(&row).sqrt();
        if slope.abs() <= 1e-12 * norm {
            continue;
        }
        let t = slack / slope;
        if slope > 0.0 {
            hi = hi.min(t);
        } else {
            lo = lo.max(t);
        }
    }
    let lo = if lo.is_finite() { lo } else { 0.0 };
    let hi = if hi.is_finite() { hi } else { 0.0 };
    [lo, hi]
        .iter()
        .map(|t| [anchor[0] + t * dir[0], anchor[1] + t * dir[1]])
        .collect()
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Andrew's monotone chain with collinear points dropped.
fn convex_hull(mut pts: Vec<[f64; 2]>) -> Vec<[f64; 2]> {
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup_by(|a, b| (a[0] - b[0]).abs() <= MERGE_EPS && (a[1] - b[1]).abs() <= MERGE_EPS);
    if pts.len() <= 2 {
        return pts;
    }
    let span = pts
        .iter()
        .flat_map(|p| p.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(1.0);
    let eps = 1e-12 * span * span;
    let mut hull: Vec<[f64; 2]> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &[f64; 2]>> =
            if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
        for &p in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= eps {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    if hull.len() < 2 {
        // All points collinear and the chain collapsed: keep the extremes.
        return vec![pts[0], pts[pts.len() - 1]];
    }
    hull
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn unit_square() {
        let p = Polyhedron::from_box(&[0.0, 0.0], &[1.0, 1.0]).unwrap();
        assert_eq!(vertices_2d(&p).unwrap(), vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]);
    }

    #[test]
    fn vertical_segment() {
        let p = Polyhedron::new(
            array![[0.0, 1.0], [0.0, -1.0]],
            array![1.0, 0.0],
            array![[1.0, 0.0]],
            array![0.0],
        )
        .unwrap();
        let v = vertices_2d(&p).unwrap();
        assert_eq!(v.len(), 2);
        assert!(v[0][0].abs() < 1e-12 && v[0][1].abs() < 1e-12);
        assert!(v[1][0].abs() < 1e-12 && (v[1][1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn triangle() {
        let p = Polyhedron::from_inequalities(
            array![[-1.0, 0.0], [0.0, -1.0], [1.0, 1.0]],
            array![0.0, 0.0, 1.0],
        )
        .unwrap();
        assert_eq!(vertices_2d(&p).unwrap(), vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
    }

    #[test]
    fn point_from_two_equalities() {
        let p = Polyhedron::new(
            ndarray::Array2::zeros((0, 2)),
            ndarray::Array1::zeros(0),
            array![[1.0, 0.0], [0.0, 1.0]],
            array![0.5, -0.5],
        )
        .unwrap();
        assert_eq!(vertices_2d(&p).unwrap(), vec![[0.5, -0.5]]);
    }

    #[test]
    fn errors() {
        let half = Polyhedron::from_inequalities(array![[1.0, 0.0]], array![0.0]).unwrap();
        assert!(matches!(vertices_2d(&half), Err(Error::Unbounded)));
        assert!(matches!(vertices_2d(&Polyhedron::empty(2)), Err(Error::EmptyPolyhedron)));
        let cube = Polyhedron::from_box(&[0.0; 3], &[1.0; 3]).unwrap();
        assert!(matches!(vertices_2d(&cube), Err(Error::DimensionMismatch { .. })));
    }
}
