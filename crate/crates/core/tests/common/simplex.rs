//! Dense two-phase simplex for standard-form linear programs, used as an
//! independent oracle for the library's LP solver on small instances.
//!
//! ```text
//! minimize  cᵀx   subject to  A x = b,  x ≥ 0
//! ```
//!
//! The tableau keeps the artificial columns through phase 2, so the final
//! basis inverse is available and the row duals can be read off the reduced
//! costs of those columns. Pivoting uses the most-negative reduced cost and
//! falls back to Bland's rule after a run of degenerate pivots.

#[derive(Debug)]
pub enum Error {
    Solver(String),
    LengthMismatch(usize, usize),
}

pub type Result<T> = std::result::Result<T, Error>;

const PIVOT_EPS: f64 = 1e-10;
const COST_EPS: f64 = 1e-11;
const DEGENERATE_RUN: usize = 50;

/// A linear program in standard form with dense rows.
#[derive(Clone, Debug)]
pub struct LinearProgram {
    pub cost: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub x: Vec<f64>,
    /// One dual value per constraint row, for the rows as given.
    pub duals: Vec<f64>,
    pub objective: f64,
    pub pivots: usize,
}

struct Tableau {
    m: usize,
    width: usize,
    data: Vec<f64>,
    reduced: Vec<f64>,
    objective: f64,
    basis: Vec<usize>,
    pivots: usize,
}

impl Tableau {
    fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.width + c]
    }

    fn rhs(&self, r: usize) -> f64 {
        self.data[r * self.width + self.width - 1]
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let w = self.width;
        let p = self.at(row, col);
        for v in &mut self.data[row * w..(row + 1) * w] {
            *v /= p;
        }
        let pivot_row: Vec<f64> = self.data[row * w..(row + 1) * w].to_vec();
        for r in 0..self.m {
            if r == row {
                continue;
            }
            let factor = self.data[r * w + col];
            if factor != 0.0 {
                for (v, pv) in self.data[r * w..(r + 1) * w].iter_mut().zip(&pivot_row) {
                    *v -= factor * pv;
                }
                self.data[r * w + col] = 0.0;
            }
        }
        let factor = self.reduced[col];
        if factor != 0.0 {
            for (d, pv) in self.reduced.iter_mut().zip(&pivot_row) {
                *d -= factor * pv;
            }
            self.objective += factor * pivot_row[w - 1];
            self.reduced[col] = 0.0;
        }
        self.basis[row] = col;
        self.pivots += 1;
    }

    /// Runs simplex iterations over columns `0..allowed`.
    fn optimize(&mut self, allowed: usize, max_pivots: usize) -> Result<()> {
        let mut degenerate = 0usize;
        loop {
            let bland = degenerate >= DEGENERATE_RUN;
            let entering = if bland {
                (0..allowed).find(|&j| self.reduced[j] < -COST_EPS)
            } else {
                let mut best: Option<(usize, f64)> = None;
                for j in 0..allowed {
                    let d = self.reduced[j];
                    if d < -COST_EPS && best.map_or(true, |(_, b)| d < b) {
                        best = Some((j, d));
                    }
                }
                best.map(|(j, _)| j)
            };
            let Some(col) = entering else {
                return Ok(());
            };

            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.m {
                let a = self.at(r, col);
                if a > PIVOT_EPS {
                    let ratio = self.rhs(r) / a;
                    let better = match leave {
                        None => true,
                        Some((lr, best)) => {
                            ratio < best - 1e-14
                                || (ratio <= best + 1e-14 && self.basis[r] < self.basis[lr])
                        }
                    };
                    if better {
                        leave = Some((r, ratio));
                    }
                }
            }
            let Some((row, ratio)) = leave else {
                return Err(Error::Solver("linear program is unbounded".into()));
            };
            if ratio.abs() <= 1e-14 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            self.pivot(row, col);
            if self.pivots > max_pivots {
                return Err(Error::Solver(format!(
                    "simplex exceeded {max_pivots} pivots"
                )));
            }
        }
    }
}

pub fn solve(lp: &LinearProgram) -> Result<LpSolution> {
    let m = lp.rows.len();
    let n = lp.cost.len();
    if lp.rhs.len() != m {
        return Err(Error::LengthMismatch(lp.rhs.len(), m));
    }
    if let Some(row) = lp.rows.iter().find(|r| r.len() != n) {
        return Err(Error::LengthMismatch(row.len(), n));
    }

    // make b ≥ 0 and append one artificial column per row
    let width = n + m + 1;
    let mut data = vec![0.0; m * width];
    let mut signs = vec![1.0; m];
    for (r, row) in lp.rows.iter().enumerate() {
        if lp.rhs[r] < 0.0 {
            signs[r] = -1.0;
        }
        for (c, &v) in row.iter().enumerate() {
            data[r * width + c] = signs[r] * v;
        }
        data[r * width + n + r] = 1.0;
        data[r * width + width - 1] = signs[r] * lp.rhs[r];
    }

    // phase 1: minimize the sum of artificials
    let mut reduced = vec![0.0; n + m + 1];
    let mut objective = 0.0;
    for r in 0..m {
        for c in 0..n {
            reduced[c] -= data[r * width + c];
        }
        objective += data[r * width + width - 1];
    }
    let mut t = Tableau {
        m,
        width,
        data,
        reduced,
        objective,
        basis: (n..n + m).collect(),
        pivots: 0,
    };
    let max_pivots = 50 * (n + m) + 10_000;
    t.optimize(n + m, max_pivots)?;
    let infeasibility: f64 = (0..m).filter(|&r| t.basis[r] >= n).map(|r| t.rhs(r)).sum();
    let scale = 1.0 + lp.rhs.iter().map(|b| b.abs()).fold(0.0, f64::max);
    if infeasibility > 1e-8 * scale {
        return Err(Error::Solver(format!(
            "linear program is infeasible (residual {infeasibility:e})"
        )));
    }
    for r in 0..m {
        if t.basis[r] >= n {
            if let Some(c) = (0..n).find(|&c| t.at(r, c).abs() > PIVOT_EPS) {
                t.pivot(r, c);
            }
        }
    }

    // phase 2
    let cost_of = |c: usize| if c < n { lp.cost[c] } else { 0.0 };
    let mut reduced = vec![0.0; n + m + 1];
    for (c, d) in reduced.iter_mut().enumerate().take(n + m) {
        *d = cost_of(c);
    }
    let mut obj = 0.0;
    for r in 0..m {
        let cb = cost_of(t.basis[r]);
        if cb != 0.0 {
            for c in 0..n + m {
                reduced[c] -= cb * t.at(r, c);
            }
            obj += cb * t.rhs(r);
        }
    }
    t.reduced = reduced;
    t.objective = obj;
    t.optimize(n, max_pivots)?;

    let mut x = vec![0.0; n];
    for r in 0..m {
        if t.basis[r] < n {
            x[t.basis[r]] = t.rhs(r);
        }
    }
    let duals = (0..m).map(|r| -signs[r] * t.reduced[n + r]).collect();
    let objective = lp.cost.iter().zip(&x).map(|(c, v)| c * v).sum();
    Ok(LpSolution {
        x,
        duals,
        objective,
        pivots: t.pivots,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_lp_with_duals() {
        // min -x1 - 2x2  s.t. x1 + x2 + s1 = 4, x1 + 3x2 + s2 = 6
        let lp = LinearProgram {
            cost: vec![-1.0, -2.0, 0.0, 0.0],
            rows: vec![vec![1.0, 1.0, 1.0, 0.0], vec![1.0, 3.0, 0.0, 1.0]],
            rhs: vec![4.0, 6.0],
        };
        let sol = solve(&lp).unwrap();
        assert!((sol.objective + 5.0).abs() < 1e-12);
        assert!((sol.x[0] - 3.0).abs() < 1e-12);
        assert!((sol.x[1] - 1.0).abs() < 1e-12);
        // strong duality
        let dual_obj: f64 = sol.duals.iter().zip(&lp.rhs).map(|(y, b)| y * b).sum();
        assert!((dual_obj - sol.objective).abs() < 1e-12);
        assert!((sol.duals[0] + 0.5).abs() < 1e-12);
        assert!((sol.duals[1] + 0.5).abs() < 1e-12);
    }

    #[test]
    fn negative_rhs_and_redundant_row() {
        // x1 - x2 = -1, 2x1 - 2x2 = -2 (redundant), min x1 + x2
        let lp = LinearProgram {
            cost: vec![1.0, 1.0],
            rows: vec![vec![1.0, -1.0], vec![2.0, -2.0]],
            rhs: vec![-1.0, -2.0],
        };
        let sol = solve(&lp).unwrap();
        assert!((sol.objective - 1.0).abs() < 1e-12);
        let dual_obj: f64 = sol.duals.iter().zip(&lp.rhs).map(|(y, b)| y * b).sum();
        assert!((dual_obj - 1.0).abs() < 1e-12);
    }

    #[test]
    fn infeasible_detected() {
        let lp = LinearProgram {
            cost: vec![1.0],
            rows: vec![vec![1.0], vec![1.0]],
            rhs: vec![1.0, 2.0],
        };
        assert!(matches!(solve(&lp), Err(Error::Solver(_))));
    }

    #[test]
    fn unbounded_detected() {
        let lp = LinearProgram {
            cost: vec![-1.0, 0.0],
            rows: vec![vec![1.0, -1.0]],
            rhs: vec![0.0],
        };
        assert!(matches!(solve(&lp), Err(Error::Solver(_))));
    }
}
