//! Dense two-phase simplex over free variables.
//!
//! Every emptiness, redundancy, bounding and membership question in the crate
//! reduces to one of the two entry points here. Rows are scaled to unit norm
//! before pivoting, so the feasibility tolerance reads as a distance.
//! Entering and leaving variables follow Bland's rule.

use ndarray::{Array1, ArrayView1, ArrayView2};

use crate::error::{Error, Result};

/// Global tolerance for feasibility decisions and membership tests.
pub const TOL: f64 = 1e-9;

const PIVOT_TOL: f64 = 1e-11;
const COST_TOL: f64 = 1e-11;
pub(crate) const ZERO_ROW: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Feasible,
    Infeasible,
}

/// Result of a pure feasibility query.
#[derive(Clone, Debug, PartialEq)]
pub struct LpOutcome {
    pub status: LpStatus,
    /// Present iff `status == Feasible`.
    pub witness: Option<Array1<f64>>,
}

impl LpOutcome {
    pub fn is_feasible(&self) -> bool {
        self.status == LpStatus::Feasible
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpSolution {
    Optimal { point: Array1<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

/// Decides whether `{x | A x <= b, E x = f}` is nonempty.
pub fn lp_feasible(
    a: ArrayView2<f64>,
    b: ArrayView1<f64>,
    e: ArrayView2<f64>,
    f: ArrayView1<f64>,
) -> Result<LpOutcome> {
    let n = check_shapes(None, a, b, e, f)?;
    let zeros = vec![0.0; n];
    Ok(match solve(&zeros, a, b, e, f, false)? {
        LpSolution::Optimal { point, .. } => LpOutcome {
            status: LpStatus::Feasible,
            witness: Some(point),
        },
        LpSolution::Infeasible => LpOutcome {
            status: LpStatus::Infeasible,
            witness: None,
        },
        LpSolution::Unbounded => unreachable!("zero objective cannot be unbounded"),
    })
}

/// Minimizes `c . x` subject to `A x <= b, E x = f` with `x` free.
pub fn lp_minimize(
    c: ArrayView1<f64>,
    a: ArrayView2<f64>,
    b: ArrayView1<f64>,
    e: ArrayView2<f64>,
    f: ArrayView1<f64>,
) -> Result<LpSolution> {
    check_shapes(Some(c), a, b, e, f)?;
    let cost: Vec<f64> = c.iter().copied().collect();
    solve(&cost, a, b, e, f, true)
}

fn check_shapes(
    c: Option<ArrayView1<f64>>,
    a: ArrayView2<f64>,
    b: ArrayView1<f64>,
    e: ArrayView2<f64>,
    f: ArrayView1<f64>,
) -> Result<usize> {
    let n = a.ncols();
    if a.nrows() != b.len() {
        return Err(Error::DimensionMismatch {
            context: "inequality rhs",
            expected: a.nrows(),
            found: b.len(),
        });
    }
    if e.nrows() != f.len() {
        return Err(Error::DimensionMismatch {
            context: "equality rhs",
            expected: e.nrows(),
            found: f.len(),
        });
    }
    if e.ncols() != n && e.nrows() > 0 {
        return Err(Error::DimensionMismatch {
            context: "equality columns",
            expected: n,
            found: e.ncols(),
        });
    }
    if let Some(c) = c {
        if c.len() != n {
            return Err(Error::DimensionMismatch {
                context: "objective length",
                expected: n,
                found: c.len(),
            });
        }
        if c.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput("objective"));
        }
    }
    if !a.iter().chain(b.iter()).all(|v| v.is_finite()) {
        return Err(Error::NonFiniteInput("inequality constraints"));
    }
    if !e.iter().chain(f.iter()).all(|v| v.is_finite()) {
        return Err(Error::NonFiniteInput("equality constraints"));
    }
    Ok(n)
}

struct Tableau {
    width: usize,
    data: Vec<f64>,
    basis: Vec<usize>,
    /// Rows whose artificial could not be driven out; they carry no information.
    dead: Vec<bool>,
    reduced: Vec<f64>,
    blocked_from: usize,
}

impl Tableau {
    #[inline]
    fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.width..(r + 1) * self.width]
    }

    #[inline]
    fn at(&self, r: usize, j: usize) -> f64 {
        self.data[r * self.width + j]
    }

    fn rhs(&self, r: usize) -> f64 {
        self.at(r, self.width - 1)
    }

    fn rows(&self) -> usize {
        self.basis.len()
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let w = self.width;
        let p = self.data[r * w + j];
        for v in &mut self.data[r * w..(r + 1) * w] {
            *v /= p;
        }
        let pivot_row: Vec<f64> = self.row(r).to_vec();
        for i in 0..self.rows() {
            if i == r {
                continue;
            }
            let factor = self.data[i * w + j];
            if factor != 0.0 {
                let row = &mut self.data[i * w..(i + 1) * w];
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= factor * pv;
                }
                row[j] = 0.0;
            }
        }
        let factor = self.reduced[j];
        if factor != 0.0 {
            for (v, pv) in self.reduced.iter_mut().zip(&pivot_row) {
                *v -= factor * pv;
            }
            self.reduced[j] = 0.0;
        }
        self.basis[r] = j;
    }

    fn set_costs(&mut self, cost: &[f64]) {
        let w = self.width;
        let mut reduced = vec![0.0; w];
        reduced[..cost.len()].copy_from_slice(cost);
        for r in 0..self.rows() {
            if self.dead[r] {
                continue;
            }
            let cb = cost.get(self.basis[r]).copied().unwrap_or(0.0);
            if cb != 0.0 {
                for (z, v) in reduced.iter_mut().zip(self.row(r)) {
                    *z -= cb * v;
                }
            }
        }
        self.reduced = reduced;
    }

    /// Runs Bland-rule pivots to optimality. Returns `false` on unboundedness.
    fn optimize(&mut self, max_pivots: usize) -> Result<bool> {
        for _ in 0..max_pivots {
            let entering = (0..self.blocked_from).find(|&j| self.reduced[j] < -COST_TOL);
            let Some(j) = entering else {
                return Ok(true);
            };
            let mut best: Option<(usize, f64)> = None;
            for r in 0..self.rows() {
                if self.dead[r] {
                    continue;
                }
                let coef = self.at(r, j);
                if coef <= PIVOT_TOL {
                    continue;
                }
                let ratio = self.rhs(r).max(0.0) / coef;
                best = match best {
                    None => Some((r, ratio)),
                    Some((br, bratio)) => {
                        let slack = 1e-12 * (1.0 + bratio.abs());
                        if ratio < bratio - slack
                            || (ratio <= bratio + slack && self.basis[r] < self.basis[br])
                        {
                            Some((r, ratio))
                        } else {
                            Some((br, bratio))
                        }
                    }
                };
            }
            match best {
                Some((r, _)) => self.pivot(r, j),
                None => return Ok(false),
            }
        }
        Err(Error::NumericalFailure(max_pivots))
    }
}

fn solve(
    cost: &[f64],
    a: ArrayView2<f64>,
    b: ArrayView1<f64>,
    e: ArrayView2<f64>,
    f: ArrayView1<f64>,
    optimize: bool,
) -> Result<LpSolution> {
    let n = cost.len();

    // Normalized rows: (coefficients, rhs, is_equality).
    let mut rows: Vec<(Vec<f64>, f64, bool)> = Vec::with_capacity(a.nrows() + e.nrows());
    for (lhs, &rhs) in a.rows().into_iter().zip(b.iter()) {
        let norm = lhs.dot(&lhs).sqrt();
        if norm < ZERO_ROW {
            if rhs < -TOL {
                return Ok(LpSolution::Infeasible);
            }
            continue;
        }
        rows.push((lhs.iter().map(|v| v / norm).collect(), rhs / norm, false));
    }
    for (lhs, &rhs) in e.rows().into_iter().zip(f.iter()) {
        let norm = lhs.dot(&lhs).sqrt();
        if norm < ZERO_ROW {
            if rhs.abs() > TOL {
                return Ok(LpSolution::Infeasible);
            }
            continue;
        }
        rows.push((lhs.iter().map(|v| v / norm).collect(), rhs / norm, true));
    }

    let m = rows.len();
    let n_slack = rows.iter().filter(|r| !r.2).count();
    let needs_artificial: Vec<bool> = rows.iter().map(|(_, rhs, eq)| *eq || *rhs < 0.0).collect();
    let n_art = needs_artificial.iter().filter(|v| **v).count();
    let slack_base = 2 * n;
    let art_base = slack_base + n_slack;
    let width = art_base + n_art + 1;

    let mut data = vec![0.0; m * width];
    let mut basis = vec![0; m];
    let (mut next_slack, mut next_art) = (slack_base, art_base);
    for (r, (lhs, rhs, eq)) in rows.iter().enumerate() {
        let sign = if *rhs < 0.0 { -1.0 } else { 1.0 };
        let row = &mut data[r * width..(r + 1) * width];
        for (k, v) in lhs.iter().enumerate() {
            row[k] = sign * v;
            row[n + k] = -sign * v;
        }
        if !eq {
            row[next_slack] = sign;
            if !needs_artificial[r] {
                basis[r] = next_slack;
            }
            next_slack += 1;
        }
        if needs_artificial[r] {
            row[next_art] = 1.0;
            basis[r] = next_art;
            next_art += 1;
        }
        row[width - 1] = sign * rhs;
    }

    let mut tab = Tableau {
        width,
        data,
        basis,
        dead: vec![false; m],
        reduced: Vec::new(),
        blocked_from: art_base + n_art,
    };
    let max_pivots = 50 * (m + width) + 1000;

    if n_art > 0 {
        let mut phase1 = vec![0.0; art_base + n_art];
        for c in &mut phase1[art_base..] {
            *c = 1.0;
        }
        tab.set_costs(&phase1);
        tab.optimize(max_pivots)?;
        let infeasibility: f64 = (0..m)
            .filter(|&r| tab.basis[r] >= art_base)
            .map(|r| tab.rhs(r).max(0.0))
            .sum();
        if infeasibility > TOL {
            return Ok(LpSolution::Infeasible);
        }
        for r in 0..m {
            if tab.basis[r] < art_base {
                continue;
            }
            let col = (0..art_base)
                .filter(|&j| tab.at(r, j).abs() > 1e-9)
                .max_by(|&x, &y| tab.at(r, x).abs().total_cmp(&tab.at(r, y).abs()));
            match col {
                Some(j) => tab.pivot(r, j),
                None => tab.dead[r] = true,
            }
        }
        tab.blocked_from = art_base;
    }

    if optimize && cost.iter().any(|c| *c != 0.0) {
        let mut phase2 = vec![0.0; art_base];
        for (k, c) in cost.iter().enumerate() {
            phase2[k] = *c;
            phase2[n + k] = -*c;
        }
        tab.set_costs(&phase2);
        if !tab.optimize(max_pivots)? {
            return Ok(LpSolution::Unbounded);
        }
    }

    let mut point = Array1::<f64>::zeros(n);
    for r in 0..m {
        if tab.dead[r] {
            continue;
        }
        let j = tab.basis[r];
        if j < n {
            point[j] += tab.rhs(r);
        } else if j < 2 * n {
            point[j - n] -= tab.rhs(r);
        }
    }
    let value = cost.iter().zip(point.iter()).map(|(c, x)| c * x).sum();
    Ok(LpSolution::Optimal { point, value })
}
