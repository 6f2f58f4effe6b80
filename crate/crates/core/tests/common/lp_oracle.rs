//! Exact feasibility oracle for `{x ≥ 0 : A x ≤ b}` with integer data.
//!
//! A non-empty polyhedron inside the orthant has a vertex, and a vertex with
//! support `S` is the unique solution of `A_TS x_S = b_T` for some row set `T`
//! with `|T| = |S|` and `A_TS` nonsingular. Enumerating all such pairs and
//! checking each candidate exactly decides feasibility. Systems are solved by
//! fraction-free elimination in `i128`; candidates are compared as rationals.

use num_rational::Ratio;
use rand::Rng;

#[derive(Debug, Clone)]
pub struct IntLp {
    pub num_vars: usize,
    pub a: Vec<Vec<i64>>,
    pub b: Vec<i64>,
}

impl IntLp {
    pub fn random<R: Rng>(
        rng: &mut R,
        num_vars: usize,
        num_rows: usize,
        coef: i64,
        rhs: i64,
    ) -> Self {
        let a = (0..num_rows)
            .map(|_| {
                (0..num_vars)
                    .map(|_| rng.random_range(-coef..=coef))
                    .collect()
            })
            .collect();
        let b = (0..num_rows)
            .map(|_| rng.random_range(-rhs..=rhs))
            .collect();
        Self { num_vars, a, b }
    }

    /// Random system whose first two rows nearly oppose each other with a gap,
    /// so both verdicts occur even with many variables and few rows.
    pub fn random_opposed<R: Rng>(
        rng: &mut R,
        num_vars: usize,
        num_rows: usize,
        coef: i64,
        rhs: i64,
    ) -> Self {
        let mut lp = Self::random(rng, num_vars, num_rows.max(2), coef, rhs);
        let noisy: Vec<i64> = lp.a[0]
            .iter()
            .map(|&v| {
                let u: f64 = rng.random();
                -v + if u < 0.2 {
                    1
                } else if u < 0.25 {
                    -1
                } else {
                    0
                }
            })
            .collect();
        lp.a[1] = noisy;
        lp.b[1] = -lp.b[0] - rng.random_range(1..=rhs);
        lp
    }

    pub fn to_problem(&self) -> wpcf_core::maxmin::LpProblem {
        let mut lp = wpcf_core::maxmin::LpProblem::new(self.num_vars);
        for (row, &rhs) in self.a.iter().zip(&self.b) {
            lp.push_row(row.iter().map(|&v| v as f64).collect(), rhs as f64);
        }
        lp
    }
}

fn combinations(n: usize, k: usize, f: &mut impl FnMut(&[usize]) -> bool) -> bool {
    fn rec(
        start: usize,
        n: usize,
        k: usize,
        cur: &mut Vec<usize>,
        f: &mut impl FnMut(&[usize]) -> bool,
    ) -> bool {
        if cur.len() == k {
            return f(cur);
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            if rec(i + 1, n, k, cur, f) {
                return true;
            }
            cur.pop();
        }
        false
    }
    rec(0, n, k, &mut Vec::with_capacity(k), f)
}

/// Solves the square system by Bareiss elimination. Returns `(d, x·d)` where
/// `d` is the determinant up to sign.
fn solve_exact(mut m: Vec<Vec<i128>>) -> Option<(i128, Vec<i128>)> {
    let s = m.len();
    let mut prev = 1i128;
    for k in 0..s {
        let p = (k..s).find(|&i| m[i][k] != 0)?;
        m.swap(p, k);
        for i in k + 1..s {
            for j in k + 1..=s {
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
            }
            m[i][k] = 0;
        }
        prev = m[k][k];
    }
    let det = m[s - 1][s - 1];
    // back substitution on x·det, which is integral by Cramer's rule
    let mut y = vec![0i128; s];
    for i in (0..s).rev() {
        let mut acc = m[i][s] * det;
        for j in i + 1..s {
            acc -= m[i][j] * y[j];
        }
        y[i] = acc / m[i][i];
    }
    Some((det, y))
}

pub fn feasible(lp: &IntLp) -> bool {
    let (n, rows) = (lp.num_vars, lp.a.len());
    if lp.b.iter().all(|&v| v >= 0) {
        return true;
    }
    for s in 1..=n.min(rows) {
        let found = combinations(n, s, &mut |support| {
            combinations(rows, s, &mut |active| {
                let sys: Vec<Vec<i128>> = active
                    .iter()
                    .map(|&r| {
                        let mut row: Vec<i128> =
                            support.iter().map(|&c| lp.a[r][c] as i128).collect();
                        row.push(lp.b[r] as i128);
                        row
                    })
                    .collect();
                let Some((det, y)) = solve_exact(sys) else {
                    return false;
                };
                let x: Vec<Ratio<i128>> = y.iter().map(|&v| Ratio::new(v, det)).collect();
                if x.iter().any(|v| *v < Ratio::from_integer(0)) {
                    return false;
                }
                lp.a.iter().zip(&lp.b).all(|(row, &rhs)| {
                    let lhs: Ratio<i128> = support
                        .iter()
                        .zip(&x)
                        .map(|(&c, v)| v * row[c] as i128)
                        .fold(Ratio::from_integer(0), |acc, v| acc + v);
                    lhs <= Ratio::from_integer(rhs as i128)
                })
            })
        });
        if found {
            return true;
        }
    }
    false
}
