//! Brute-force geometry written independently of the library: dense
//! Gaussian elimination, vertex enumeration over all active sets, and
//! convex-hull membership by exhaustive direction tests.

#![allow(dead_code)]

pub type Row = (Vec<f64>, f64);

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Solves a square system by partial pivoting; `None` when (near) singular.
pub fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            let pivot_row = a[col].clone();
            for (x, p) in a[r][col..].iter_mut().zip(&pivot_row[col..]) {
                *x -= f * p;
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// Largest normalized violation of `x` against `a x <= b` rows and `e x = f` rows.
pub fn violation(ineq: &[Row], eq: &[Row], x: &[f64]) -> f64 {
    let mut worst = f64::NEG_INFINITY;
    for (a, b) in ineq {
        let n = norm(a);
        let v = if n > 0.0 { (dot(a, x) - b) / n } else { -b };
        worst = worst.max(v);
    }
    for (a, b) in eq {
        let n = norm(a);
        let v = if n > 0.0 { (dot(a, x) - b).abs() / n } else { b.abs() };
        worst = worst.max(v);
    }
    worst.max(0.0)
}

fn subsets(n: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if cur.len() == k {
        out.push(cur.clone());
        return;
    }
    for i in start..n {
        cur.push(i);
        subsets(n, k, i + 1, cur, out);
        cur.pop();
    }
}

/// Every feasible point where `dim` linearly independent constraints are
/// tight, deduplicated. Complete for bounded polyhedra.
pub fn vertices(ineq: &[Row], eq: &[Row], dim: usize, tol: f64) -> Vec<Vec<f64>> {
    let all: Vec<&Row> = eq.iter().chain(ineq.iter()).collect();
    let mut combos = Vec::new();
    subsets(all.len(), dim, 0, &mut Vec::new(), &mut combos);
    let mut out: Vec<Vec<f64>> = Vec::new();
    for c in combos {
        let a = c.iter().map(|&i| all[i].0.clone()).collect();
        let b = c.iter().map(|&i| all[i].1).collect();
        if let Some(x) = solve(a, b) {
            if violation(ineq, eq, &x) <= tol && !out.iter().any(|v| close(v, &x, 1e-7)) {
                out.push(x);
            }
        }
    }
    out
}

pub fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol * (1.0 + x.abs().max(y.abs())))
}

/// `[lo, hi]^dim` as rows.
pub fn box_rows(dim: usize, lo: f64, hi: f64) -> Vec<Row> {
    let mut rows = Vec::new();
    for i in 0..dim {
        let mut e = vec![0.0; dim];
        e[i] = 1.0;
        rows.push((e.clone(), hi));
        e[i] = -1.0;
        rows.push((e, -lo));
    }
    rows
}

/// Whether `q` lies in the convex hull of planar points `pts`, up to `tol`.
/// Tests every direction normal or parallel to a pair of points, plus the
/// axes; a finite hull is cut out by some subset of those.
pub fn in_hull_2d(pts: &[[f64; 2]], q: [f64; 2], tol: f64) -> bool {
    if pts.is_empty() {
        return false;
    }
    let mut dirs = vec![[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]];
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let (dx, dy) = (pts[j][0] - pts[i][0], pts[j][1] - pts[i][1]);
            let l = dx.hypot(dy);
            if l > 1e-12 {
                let (ux, uy) = (dx / l, dy / l);
                dirs.extend([[ux, uy], [-ux, -uy], [-uy, ux], [uy, -ux]]);
            }
        }
    }
    dirs.iter().all(|d| {
        let support = pts.iter().map(|p| d[0] * p[0] + d[1] * p[1]).fold(f64::NEG_INFINITY, f64::max);
        d[0] * q[0] + d[1] * q[1] <= support + tol
    })
}
