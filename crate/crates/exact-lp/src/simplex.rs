//! Exact revised simplex.
//!
//! Two phases with one artificial per row, an explicit dense basis inverse
//! updated by Gauss-Jordan pivots, and deterministic lowest-index tie
//! breaking. Rows that phase 1 proves redundant keep a zero-valued artificial
//! in the basis for the rest of the solve.

use log::trace;

use crate::{Fraction, LpProblem, LpSolution, LpStatus};

/// Entering-variable selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PivotRule {
    /// Lowest-index improving column, lowest-index leaving row on ties.
    #[default]
    Bland,
    /// Most negative reduced cost, falling back to Bland's rule for every
    /// pivot that follows a degenerate one. Still cycle-free: any infinite
    /// run of degenerate pivots would be a Bland cycle.
    DantzigBland,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SolveOptions {
    pub rule: PivotRule,
}

struct Tableau<'a> {
    m: usize,
    n: usize,
    /// Sign-normalized structural columns (rows with b < 0 are negated).
    cols: Vec<Vec<(usize, Fraction)>>,
    flipped: Vec<bool>,
    binv: Vec<Vec<Fraction>>,
    /// Variable per basis row; `n + i` is the artificial of row `i`.
    basis: Vec<usize>,
    position: Vec<Option<usize>>,
    xb: Vec<Fraction>,
    pivots: usize,
    problem: &'a LpProblem,
}

impl<'a> Tableau<'a> {
    fn new(problem: &'a LpProblem) -> Self {
        let m = problem.rows();
        let n = problem.cols();
        let flipped: Vec<bool> = problem.b.iter().map(Fraction::is_negative).collect();
        let cols = (0..n)
            .map(|j| {
                problem
                    .a
                    .column(j)
                    .iter()
                    .map(|(i, v)| (*i, if flipped[*i] { -v } else { v.clone() }))
                    .collect()
            })
            .collect();
        let mut binv = vec![vec![Fraction::zero(); m]; m];
        for (i, row) in binv.iter_mut().enumerate() {
            row[i] = Fraction::one();
        }
        let mut position = vec![None; n + m];
        for i in 0..m {
            position[n + i] = Some(i);
        }
        let xb = problem.b.iter().map(Fraction::abs).collect();
        Self {
            m,
            n,
            cols,
            flipped,
            binv,
            basis: (n..n + m).collect(),
            position,
            xb,
            pivots: 0,
            problem,
        }
    }

    fn is_artificial(&self, var: usize) -> bool {
        var >= self.n
    }

    /// `B⁻¹ a_j` as a dense vector.
    fn column(&self, var: usize) -> Vec<Fraction> {
        if self.is_artificial(var) {
            let i = var - self.n;
            return self.binv.iter().map(|row| row[i].clone()).collect();
        }
        let col = &self.cols[var];
        self.binv
            .iter()
            .map(|row| {
                let mut acc = Fraction::zero();
                for (i, v) in col {
                    let b = &row[*i];
                    if !b.is_zero() {
                        acc += b * v;
                    }
                }
                acc
            })
            .collect()
    }

    /// Simplex multipliers `c_B B⁻¹` for the given cost function.
    fn multipliers(&self, cost: &dyn Fn(usize) -> Fraction) -> Vec<Fraction> {
        let mut y = vec![Fraction::zero(); self.m];
        for (r, &var) in self.basis.iter().enumerate() {
            let cb = cost(var);
            if cb.is_zero() {
                continue;
            }
            for (yi, b) in y.iter_mut().zip(&self.binv[r]) {
                if !b.is_zero() {
                    *yi += &cb * b;
                }
            }
        }
        y
    }

    fn reduced_cost(&self, var: usize, cost: &Fraction, y: &[Fraction]) -> Fraction {
        if self.is_artificial(var) {
            return cost - &y[var - self.n];
        }
        let mut d = cost.clone();
        for (i, v) in &self.cols[var] {
            if !y[*i].is_zero() {
                d -= &y[*i] * v;
            }
        }
        d
    }

    fn pivot(&mut self, row: usize, entering: usize, alpha: &[Fraction]) {
        let piv = alpha[row].clone();
        debug_assert!(!piv.is_zero());
        let theta = &self.xb[row] / &piv;
        if !piv.is_one() {
            let inv = piv.recip();
            for v in self.binv[row].iter_mut() {
                if !v.is_zero() {
                    *v *= &inv;
                }
            }
        }
        let pivot_row = std::mem::take(&mut self.binv[row]);
        let support: Vec<usize> = (0..self.m).filter(|&j| !pivot_row[j].is_zero()).collect();
        for (i, a) in alpha.iter().enumerate() {
            if i == row || a.is_zero() {
                continue;
            }
            let target = &mut self.binv[i];
            for &j in &support {
                target[j] -= a * &pivot_row[j];
            }
            if !theta.is_zero() {
                self.xb[i] -= a * &theta;
            }
        }
        self.binv[row] = pivot_row;
        self.xb[row] = theta;

        let leaving = self.basis[row];
        self.position[leaving] = None;
        self.basis[row] = entering;
        self.position[entering] = Some(row);
        self.pivots += 1;
    }

    /// Ratio test; `None` means the direction is unbounded.
    fn leaving_row(&self, alpha: &[Fraction]) -> Option<usize> {
        let mut best: Option<(usize, Fraction)> = None;
        for (r, a) in alpha.iter().enumerate() {
            if !a.is_positive() {
                continue;
            }
            let ratio = &self.xb[r] / a;
            best = match best {
                None => Some((r, ratio)),
                Some((br, bratio)) => match ratio.cmp(&bratio) {
                    std::cmp::Ordering::Less => Some((r, ratio)),
                    std::cmp::Ordering::Equal if self.basis[r] < self.basis[br] => Some((r, ratio)),
                    _ => Some((br, bratio)),
                },
            };
        }
        best.map(|(r, _)| r)
    }

    /// Runs simplex iterations for `cost` over the eligible variables until
    /// optimal (`true`) or unbounded (`false`).
    fn optimize(
        &mut self,
        cost: &dyn Fn(usize) -> Fraction,
        eligible: &dyn Fn(&Self, usize) -> bool,
        rule: PivotRule,
    ) -> bool {
        let mut last_degenerate = false;
        loop {
            let y = self.multipliers(cost);
            let use_bland = rule == PivotRule::Bland || last_degenerate;
            let mut entering: Option<(usize, Fraction)> = None;
            for var in 0..self.n + self.m {
                if self.position[var].is_some() || !eligible(self, var) {
                    continue;
                }
                let d = self.reduced_cost(var, &cost(var), &y);
                if !d.is_negative() {
                    continue;
                }
                if use_bland {
                    entering = Some((var, d));
                    break;
                }
                if entering.as_ref().map_or(true, |(_, best)| d < *best) {
                    entering = Some((var, d));
                }
            }
            let Some((var, _)) = entering else {
                return true;
            };
            let alpha = self.column(var);
            let Some(row) = self.leaving_row(&alpha) else {
                return false;
            };
            last_degenerate = self.xb[row].is_zero();
            trace!("pivot {} enters {} leaves row {}", self.pivots, var, row);
            self.pivot(row, var, &alpha);
        }
    }

    /// After a feasible phase 1, swaps zero-valued artificials out of the
    /// basis wherever some structural column has a nonzero in their row.
    fn expel_artificials(&mut self) {
        for r in 0..self.m {
            let var = self.basis[r];
            if !self.is_artificial(var) {
                continue;
            }
            let row = &self.binv[r];
            let replacement = (0..self.n).find(|&j| {
                self.position[j].is_none()
                    && self.cols[j].iter().any(|(i, _)| !row[*i].is_zero())
                    && {
                        let mut acc = Fraction::zero();
                        for (i, v) in &self.cols[j] {
                            acc += &row[*i] * v;
                        }
                        !acc.is_zero()
                    }
            });
            if let Some(j) = replacement {
                let alpha = self.column(j);
                self.pivot(r, j, &alpha);
            }
        }
    }

    fn solution(&self) -> LpSolution {
        let p = self.problem;
        let mut x = vec![Fraction::zero(); self.n];
        for (r, &var) in self.basis.iter().enumerate() {
            if !self.is_artificial(var) {
                x[var] = self.xb[r].clone();
            }
        }
        let cost = |var: usize| {
            if var < self.n {
                p.c[var].clone()
            } else {
                Fraction::zero()
            }
        };
        let y = self
            .multipliers(&cost)
            .into_iter()
            .zip(&self.flipped)
            .map(|(v, &f)| if f { -v } else { v })
            .collect();
        let objective = x.iter().zip(&p.c).map(|(a, b)| a * b).sum();
        LpSolution {
            status: LpStatus::Optimal,
            x,
            y,
            objective,
            basis: self
                .basis
                .iter()
                .map(|&v| (!self.is_artificial(v)).then_some(v))
                .collect(),
            pivots: self.pivots,
        }
    }
}

/// Solves `min c·x, A x = b, x ≥ 0` exactly with the default options.
pub fn solve(problem: &LpProblem) -> LpSolution {
    solve_with(problem, SolveOptions::default())
}

pub fn solve_with(problem: &LpProblem, options: SolveOptions) -> LpSolution {
    let mut t = Tableau::new(problem);
    let n = t.n;

    // Phase 1: minimize the sum of artificials.
    let phase1_cost = |var: usize| {
        if var >= n {
            Fraction::one()
        } else {
            Fraction::zero()
        }
    };
    let phase1_eligible = |t: &Tableau, var: usize| !t.is_artificial(var);
    t.optimize(&phase1_cost, &phase1_eligible, options.rule);
    let infeasibility: Fraction = t
        .basis
        .iter()
        .zip(&t.xb)
        .filter(|(&v, _)| v >= n)
        .map(|(_, x)| x.clone())
        .sum();
    if !infeasibility.is_zero() {
        return LpSolution::without_optimum(LpStatus::Infeasible, t.pivots);
    }
    t.expel_artificials();

    // Phase 2 on the structural columns only.
    let c = &problem.c;
    let phase2_cost = |var: usize| if var < n { c[var].clone() } else { Fraction::zero() };
    let phase2_eligible = |t: &Tableau, var: usize| !t.is_artificial(var);
    if !t.optimize(&phase2_cost, &phase2_eligible, options.rule) {
        return LpSolution::without_optimum(LpStatus::Unbounded, t.pivots);
    }
    t.solution()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{verify_solution, SparseColumns};

    fn f(n: i64) -> Fraction {
        Fraction::from_integer(n)
    }

    fn lp(a: &[&[i64]], b: &[i64], c: &[i64]) -> LpProblem {
        let dense: Vec<Vec<Fraction>> = a.iter().map(|r| r.iter().map(|&v| f(v)).collect()).collect();
        LpProblem::new(
            SparseColumns::from_dense(&dense),
            b.iter().map(|&v| f(v)).collect(),
            c.iter().map(|&v| f(v)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn single_variable() {
        let p = lp(&[&[1]], &[1], &[1]);
        let s = solve(&p);
        assert_eq!(s.status, LpStatus::Optimal);
        assert_eq!(s.objective, f(1));
        assert!(verify_solution(&p, &s).unwrap());
    }

    #[test]
    fn simplex_corner() {
        let p = lp(&[&[1, 1, 1]], &[1], &[-1, -1, 0]);
        let s = solve(&p);
        assert_eq!(s.objective, f(-1));
        assert!(verify_solution(&p, &s).unwrap());
    }

    #[test]
    fn infeasible_and_unbounded() {
        // x1 + x2 = -1 with x ≥ 0
        let p = lp(&[&[1, 1]], &[-1], &[0, 0]);
        assert_eq!(solve(&p).status, LpStatus::Infeasible);
        // min -x1 s.t. x1 - x2 = 0
        let p = lp(&[&[1, -1]], &[0], &[-1, 0]);
        assert_eq!(solve(&p).status, LpStatus::Unbounded);
    }

    #[test]
    fn redundant_rows_are_tolerated() {
        // Second row is twice the first, third is their difference.
        let p = lp(
            &[&[1, 2, 1, 0], &[2, 4, 2, 0], &[1, 2, 1, 0], &[0, 1, 0, 1]],
            &[4, 8, 4, 3],
            &[1, 1, 2, 1],
        );
        for rule in [PivotRule::Bland, PivotRule::DantzigBland] {
            let s = solve_with(&p, SolveOptions { rule });
            assert_eq!(s.status, LpStatus::Optimal);
            assert!(verify_solution(&p, &s).unwrap());
            assert_eq!(s.objective, f(3));
        }
    }

    #[test]
    fn negative_rhs_rows_give_correct_duals() {
        // min x1 + 2 x2 s.t. -x1 - x2 + s = -3 (x1 + x2 ≥ 3)
        let p = lp(&[&[-1, -1, 1]], &[-3], &[1, 2, 0]);
        let s = solve(&p);
        assert_eq!(s.objective, f(3));
        assert_eq!(s.y, vec![f(-1)]);
        assert!(verify_solution(&p, &s).unwrap());
    }

    #[test]
    fn degenerate_cycling_example_terminates() {
        // Beale's classic cycling LP in equality form (slacks appended).
        let q = |n, d| Fraction::new(n, d);
        let dense = vec![
            vec![q(1, 4), q(-60, 1), q(-1, 25), q(9, 1), f(1), f(0), f(0)],
            vec![q(1, 2), q(-90, 1), q(-1, 50), q(3, 1), f(0), f(1), f(0)],
            vec![f(0), f(0), f(1), f(0), f(0), f(0), f(1)],
        ];
        let p = LpProblem::new(
            SparseColumns::from_dense(&dense),
            vec![f(0), f(0), f(1)],
            vec![q(-3, 4), q(150, 1), q(-1, 50), q(6, 1), f(0), f(0), f(0)],
        )
        .unwrap();
        for rule in [PivotRule::Bland, PivotRule::DantzigBland] {
            let s = solve_with(&p, SolveOptions { rule });
            assert_eq!(s.status, LpStatus::Optimal);
            assert_eq!(s.objective, q(-1, 20));
            assert!(verify_solution(&p, &s).unwrap());
        }
    }
}
