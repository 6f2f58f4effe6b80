//! Feasibility of `{x ≥ 0 : A x ≤ b}` by a dense phase-I primal simplex.
//!
//! The problem is equilibrated first (columns, then rows, then the right-hand
//! side) because the power-control rows mix coefficients spanning twenty-odd
//! orders of magnitude. Pricing is Dantzig's rule while the objective moves;
//! after a run of degenerate pivots it switches to Bland's rule until the next
//! strict decrease. Any cycle is made of degenerate pivots only, so it cannot
//! survive the Bland phase.

use crate::error::{Error, Result};

/// One inequality `coef · x ≤ rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct LpRow {
    pub coef: Vec<f64>,
    pub rhs: f64,
}

/// Inequality system over non-negative variables.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LpProblem {
    pub num_vars: usize,
    pub rows: Vec<LpRow>,
}

impl LpProblem {
    pub fn new(num_vars: usize) -> Self {
        Self {
            num_vars,
            rows: Vec::new(),
        }
    }

    pub fn push_row(&mut self, coef: Vec<f64>, rhs: f64) {
        assert_eq!(
            coef.len(),
            self.num_vars,
            "row length must equal the variable count"
        );
        self.rows.push(LpRow { coef, rhs });
    }

    /// Largest violation `max(0, row·x − rhs)` and `max(0, −x_j)`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let rows = self.rows.iter().map(|r| {
            let lhs: f64 = r.coef.iter().zip(x).map(|(a, v)| a * v).sum();
            (lhs - r.rhs).max(0.0)
        });
        let bounds = x.iter().map(|v| (-v).max(0.0));
        rows.chain(bounds).fold(0.0, f64::max)
    }

    fn validate(&self) -> Result<()> {
        for (i, r) in self.rows.iter().enumerate() {
            if r.coef.len() != self.num_vars {
                return Err(Error::Dimension(format!(
                    "row {i} has {} coefficients",
                    r.coef.len()
                )));
            }
            if !r.rhs.is_finite() || r.coef.iter().any(|c| !c.is_finite()) {
                return Err(Error::Invalid(format!("row {i} has non-finite entries")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Feasible(Vec<f64>),
    Infeasible,
}

impl LpOutcome {
    pub fn is_feasible(&self) -> bool {
        matches!(self, LpOutcome::Feasible(_))
    }
}

/// Default threshold on the (equilibrated) phase-I objective.
pub const DEFAULT_TOL: f64 = 1e-9;

const PIVOT_EPS: f64 = 1e-11;

/// Consecutive degenerate pivots tolerated before switching to Bland's rule.
const DEGENERATE_RUN: usize = 20;

/// Decides feasibility; on success returns a point in the original scaling.
///
/// `tol` bounds the residual total infeasibility after equilibration.
pub fn lp_feasible(lp: &LpProblem, tol: f64) -> Result<LpOutcome> {
    lp.validate()?;
    let n = lp.num_vars;

    // column equilibration
    let mut col_scale = vec![1.0; n];
    for (j, s) in col_scale.iter_mut().enumerate() {
        let m = lp.rows.iter().map(|r| r.coef[j].abs()).fold(0.0, f64::max);
        if m > 0.0 {
            *s = 1.0 / m;
        }
    }
    // row equilibration; all-zero rows are decided on the spot
    let mut a: Vec<Vec<f64>> = Vec::with_capacity(lp.rows.len());
    let mut b: Vec<f64> = Vec::with_capacity(lp.rows.len());
    for r in &lp.rows {
        let scaled: Vec<f64> = r.coef.iter().zip(&col_scale).map(|(c, s)| c * s).collect();
        let m = scaled.iter().map(|v| v.abs()).fold(0.0, f64::max);
        if m == 0.0 {
            if r.rhs < 0.0 {
                return Ok(LpOutcome::Infeasible);
            }
            continue;
        }
        a.push(scaled.iter().map(|v| v / m).collect());
        b.push(r.rhs / m);
    }
    // rhs normalization (the system is homogeneous in x apart from b)
    let bmax = b.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let rhs_scale = if bmax > 0.0 { bmax } else { 1.0 };
    for v in &mut b {
        *v /= rhs_scale;
    }

    let x_scaled = match phase_one(&a, &b, n, tol)? {
        Some(x) => x,
        None => return Ok(LpOutcome::Infeasible),
    };
    Ok(LpOutcome::Feasible(
        x_scaled
            .iter()
            .zip(&col_scale)
            .map(|(v, s)| (v * s * rhs_scale).max(0.0))
            .collect(),
    ))
}

/// Phase I on `A x ≤ b`, `x ≥ 0`. Returns a feasible `x` or `None`.
fn phase_one(a: &[Vec<f64>], b: &[f64], n: usize, tol: f64) -> Result<Option<Vec<f64>>> {
    let m = a.len();
    if m == 0 {
        return Ok(Some(vec![0.0; n]));
    }
    let needs_art: Vec<bool> = b.iter().map(|&v| v < 0.0).collect();
    let num_art = needs_art.iter().filter(|&&f| f).count();
    // columns: structural [0, n), slacks [n, n+m), artificials [n+m, n+m+num_art)
    let width = n + m + num_art;
    let mut t = vec![vec![0.0; width + 1]; m];
    let mut basis = vec![0usize; m];
    let mut art = n + m;
    for i in 0..m {
        let sign = if needs_art[i] { -1.0 } else { 1.0 };
        for j in 0..n {
            t[i][j] = sign * a[i][j];
        }
        t[i][n + i] = sign;
        t[i][width] = sign * b[i];
        if needs_art[i] {
            t[i][art] = 1.0;
            basis[i] = art;
            art += 1;
        } else {
            basis[i] = n + i;
        }
    }
    if num_art == 0 {
        return Ok(Some(vec![0.0; n]));
    }
    // reduced costs of the phase-I objective Σ artificials
    let mut cost = vec![0.0; width + 1];
    for i in 0..m {
        if needs_art[i] {
            for j in 0..=width {
                cost[j] -= t[i][j];
            }
        }
    }
    for j in n + m..width {
        cost[j] = 0.0;
    }

    let max_pivots = 50 * (width + m) + 1000;
    let mut pivots = 0;
    let mut degenerate = 0;
    loop {
        let bland = degenerate >= DEGENERATE_RUN;
        let enter = if bland {
            (0..width).find(|&j| cost[j] < -PIVOT_EPS)
        } else {
            (0..width)
                .filter(|&j| cost[j] < -PIVOT_EPS)
                .min_by(|&i, &j| cost[i].total_cmp(&cost[j]))
        };
        let Some(enter) = enter else {
            break;
        };
        let mut leave: Option<usize> = None;
        let mut best = f64::INFINITY;
        for i in 0..m {
            let d = t[i][enter];
            if d > PIVOT_EPS {
                let ratio = t[i][width] / d;
                let slack = 1e-12 * best.abs().max(1e-300);
                let better = match leave {
                    None => true,
                    Some(li) => {
                        ratio < best - slack
                            || (ratio <= best + slack
                                && if bland {
                                    basis[i] < basis[li]
                                } else {
                                    d > t[li][enter]
                                })
                    }
                };
                if better {
                    best = ratio;
                    leave = Some(i);
                }
            }
        }
        let Some(row) = leave else {
            // phase I is bounded below by 0, so no improving ray exists
            break;
        };
        let before = cost[width];
        pivot(&mut t, &mut cost, row, enter);
        basis[row] = enter;
        if cost[width] > before + 1e-15 * before.abs().max(1e-300) {
            degenerate = 0;
        } else {
            degenerate += 1;
        }
        pivots += 1;
        if pivots > max_pivots {
            return Err(Error::IterationLimit(max_pivots));
        }
    }

    let infeasibility = -cost[width];
    if infeasibility > tol {
        return Ok(None);
    }
    let mut x = vec![0.0; n];
    for (i, &var) in basis.iter().enumerate() {
        if var < n {
            x[var] = t[i][width].max(0.0);
        }
    }
    Ok(Some(x))
}

fn pivot(t: &mut [Vec<f64>], cost: &mut [f64], row: usize, col: usize) {
    let width = t[row].len();
    let p = t[row][col];
    for j in 0..width {
        t[row][j] /= p;
    }
    let pivot_row = t[row].clone();
    for (i, r) in t.iter_mut().enumerate() {
        if i == row {
            continue;
        }
        let f = r[col];
        if f != 0.0 {
            for j in 0..width {
                r[j] -= f * pivot_row[j];
            }
            r[col] = 0.0;
        }
    }
    let f = cost[col];
    if f != 0.0 {
        for j in 0..width {
            cost[j] -= f * pivot_row[j];
        }
        cost[col] = 0.0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp(num_vars: usize, rows: &[(&[f64], f64)]) -> LpProblem {
        let mut p = LpProblem::new(num_vars);
        for (c, r) in rows {
            p.push_row(c.to_vec(), *r);
        }
        p
    }

    #[test]
    fn contradictory_bounds() {
        let p = lp(1, &[(&[1.0], 1.0), (&[-1.0], -2.0)]);
        assert_eq!(lp_feasible(&p, DEFAULT_TOL).unwrap(), LpOutcome::Infeasible);
    }

    #[test]
    fn simple_feasible() {
        let p = lp(1, &[(&[1.0], 1.0)]);
        match lp_feasible(&p, DEFAULT_TOL).unwrap() {
            LpOutcome::Feasible(x) => assert!(p.max_violation(&x) == 0.0),
            _ => panic!("expected feasible"),
        }
    }

    #[test]
    fn needs_artificials_and_finds_interior_region() {
        // x + y ≥ 2, x ≤ 3, y ≤ 3, x − y ≤ 0.5
        let p = lp(
            2,
            &[
                (&[-1.0, -1.0], -2.0),
                (&[1.0, 0.0], 3.0),
                (&[0.0, 1.0], 3.0),
                (&[1.0, -1.0], 0.5),
            ],
        );
        let LpOutcome::Feasible(x) = lp_feasible(&p, DEFAULT_TOL).unwrap() else {
            panic!("expected feasible");
        };
        assert!(p.max_violation(&x) < 1e-12);
    }

    #[test]
    fn zero_rows() {
        assert!(lp_feasible(&lp(2, &[(&[0.0, 0.0], 0.0)]), DEFAULT_TOL)
            .unwrap()
            .is_feasible());
        assert!(!lp_feasible(&lp(2, &[(&[0.0, 0.0], -1.0)]), DEFAULT_TOL)
            .unwrap()
            .is_feasible());
        assert!(lp_feasible(&LpProblem::new(3), DEFAULT_TOL)
            .unwrap()
            .is_feasible());
    }

    #[test]
    fn badly_scaled_rows() {
        // 1e-14·x ≥ 1e-20, 1e8·x ≤ 1e3  ⇒  x ∈ [1e-6, 1e-5]
        let p = lp(1, &[(&[-1e-14], -1e-20), (&[1e8], 1e3)]);
        let LpOutcome::Feasible(x) = lp_feasible(&p, DEFAULT_TOL).unwrap() else {
            panic!("expected feasible");
        };
        assert!(x[0] >= 1e-6 * (1.0 - 1e-9) && x[0] <= 1e-5 * (1.0 + 1e-9));
        // tighten the lower bound past the upper one
        let p = lp(1, &[(&[-1e-14], -1e-18), (&[1e8], 1e3)]);
        assert!(!lp_feasible(&p, DEFAULT_TOL).unwrap().is_feasible());
    }

    #[test]
    fn rejects_non_finite() {
        let p = lp(1, &[(&[f64::NAN], 1.0)]);
        assert!(lp_feasible(&p, DEFAULT_TOL).is_err());
    }
}
