//! Floating-point revised simplex used to screen instances before exact work.
//!
//! Written independently of the exact solver: it shares only the problem
//! type. Uses Dantzig pricing on a slightly perturbed right-hand side (the
//! lattice programs are massively degenerate), falls back to Bland's rule
//! after a long run of degenerate pivots, and refactors the basis inverse
//! whenever the primal residual drifts. The perturbation is removed before
//! the solution is reported.

use crate::{LpProblem, LpStatus};

const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-10;
const FEAS_TOL: f64 = 1e-8;
const RESIDUAL_CHECK_EVERY: usize = 50;
const MAX_PIVOTS: usize = 200_000;
const PERTURBATION: f64 = 1e-7;
const COST_PERTURBATION: f64 = 1e-6;
const DEGENERATE_RUN_BEFORE_BLAND: usize = 50;

/// Deterministic pseudo-random factor in `[0.5, 1)` for row `i`.
fn jitter(i: usize) -> f64 {
    let mut z = (i as u64).wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    0.5 + (z >> 11) as f64 / (1u64 << 54) as f64
}

#[derive(Debug, Clone)]
pub struct FloatSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub objective: f64,
    /// Basic structural column per row (`None` for an artificial).
    pub basis: Vec<Option<usize>>,
    pub pivots: usize,
}

struct State {
    m: usize,
    n: usize,
    cols: Vec<Vec<(usize, f64)>>,
    b: Vec<f64>,
    flipped: Vec<bool>,
    binv: Vec<Vec<f64>>,
    basis: Vec<usize>,
    position: Vec<Option<usize>>,
    xb: Vec<f64>,
    pivots: usize,
}

impl State {
    fn new(problem: &LpProblem) -> Self {
        let m = problem.rows();
        let n = problem.cols();
        let flipped: Vec<bool> = problem.b.iter().map(|v| v.is_negative()).collect();
        let cols = (0..n)
            .map(|j| {
                problem
                    .a
                    .column(j)
                    .iter()
                    .map(|(i, v)| {
                        let v = v.to_f64();
                        (*i, if flipped[*i] { -v } else { v })
                    })
                    .collect()
            })
            .collect();
        let b: Vec<f64> = problem
            .b
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let v = v.to_f64().abs();
                v + PERTURBATION * (1.0 + v) * jitter(i)
            })
            .collect();
        let mut binv = vec![vec![0.0; m]; m];
        for (i, row) in binv.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        let mut position = vec![None; n + m];
        for i in 0..m {
            position[n + i] = Some(i);
        }
        Self {
            m,
            n,
            cols,
            xb: b.clone(),
            b,
            flipped,
            binv,
            basis: (n..n + m).collect(),
            position,
            pivots: 0,
        }
    }

    fn basis_column(&self, var: usize) -> Vec<(usize, f64)> {
        if var >= self.n {
            vec![(var - self.n, 1.0)]
        } else {
            self.cols[var].clone()
        }
    }

    fn column(&self, var: usize) -> Vec<f64> {
        let col = self.basis_column(var);
        self.binv
            .iter()
            .map(|row| col.iter().map(|(i, v)| row[*i] * v).sum())
            .collect()
    }

    fn multipliers(&self, cost: &dyn Fn(usize) -> f64) -> Vec<f64> {
        let mut y = vec![0.0; self.m];
        for (r, &var) in self.basis.iter().enumerate() {
            let cb = cost(var);
            if cb == 0.0 {
                continue;
            }
            for (yi, b) in y.iter_mut().zip(&self.binv[r]) {
                *yi += cb * b;
            }
        }
        y
    }

    fn reduced_cost(&self, var: usize, cost: f64, y: &[f64]) -> f64 {
        if var >= self.n {
            return cost - y[var - self.n];
        }
        cost - self.cols[var].iter().map(|(i, v)| y[*i] * v).sum::<f64>()
    }

    fn pivot(&mut self, row: usize, entering: usize, alpha: &[f64]) {
        let piv = alpha[row];
        let theta = self.xb[row] / piv;
        for v in self.binv[row].iter_mut() {
            *v /= piv;
        }
        let pivot_row = std::mem::take(&mut self.binv[row]);
        let support: Vec<usize> = (0..self.m).filter(|&j| pivot_row[j] != 0.0).collect();
        for (i, &a) in alpha.iter().enumerate() {
            if i == row || a == 0.0 {
                continue;
            }
            let target = &mut self.binv[i];
            for &j in &support {
                target[j] -= a * pivot_row[j];
            }
            self.xb[i] -= a * theta;
        }
        self.binv[row] = pivot_row;
        self.xb[row] = theta;
        let leaving = self.basis[row];
        self.position[leaving] = None;
        self.basis[row] = entering;
        self.position[entering] = Some(row);
        self.pivots += 1;
        if self.pivots % RESIDUAL_CHECK_EVERY == 0 && self.residual() > 1e-9 {
            let _ = self.refactor();
        }
    }

    fn residual(&self) -> f64 {
        let mut r = self.b.clone();
        for (row, &var) in self.basis.iter().enumerate() {
            for (i, v) in self.basis_column(var) {
                r[i] -= v * self.xb[row];
            }
        }
        r.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// Recomputes `B⁻¹` and `x_B` by Gauss-Jordan elimination with partial
    /// pivoting. Returns `false` (leaving the state untouched) when the basis
    /// is numerically singular.
    fn refactor(&mut self) -> bool {
        let m = self.m;
        let mut aug = vec![vec![0.0; 2 * m]; m];
        for (r, &var) in self.basis.iter().enumerate() {
            for (i, v) in self.basis_column(var) {
                aug[i][r] = v;
            }
        }
        for (i, row) in aug.iter_mut().enumerate() {
            row[m + i] = 1.0;
        }
        for col in 0..m {
            let piv = (col..m)
                .max_by(|&a, &b| aug[a][col].abs().total_cmp(&aug[b][col].abs()))
                .unwrap();
            aug.swap(col, piv);
            let p = aug[col][col];
            if p.abs() < 1e-14 {
                return false;
            }
            for v in aug[col].iter_mut() {
                *v /= p;
            }
            let pivot_row = aug[col].clone();
            for (i, row) in aug.iter_mut().enumerate() {
                if i == col || row[col] == 0.0 {
                    continue;
                }
                let f = row[col];
                for (x, pv) in row.iter_mut().zip(&pivot_row) {
                    *x -= f * pv;
                }
            }
        }
        for (i, row) in aug.into_iter().enumerate() {
            self.binv[i] = row[m..].to_vec();
        }
        self.xb = self
            .binv
            .iter()
            .map(|row| row.iter().zip(&self.b).map(|(a, b)| a * b).sum())
            .collect();
        true
    }

    fn optimize(&mut self, cost: &dyn Fn(usize) -> f64, allow_artificial: bool) -> Option<bool> {
        let mut degenerate_run = 0usize;
        loop {
            if self.pivots > MAX_PIVOTS {
                return None;
            }
            let y = self.multipliers(cost);
            let mut entering: Option<(usize, f64)> = None;
            for var in 0..self.n + self.m {
                if self.position[var].is_some() || (var >= self.n && !allow_artificial) {
                    continue;
                }
                let d = self.reduced_cost(var, cost(var), &y);
                if d >= -COST_TOL {
                    continue;
                }
                if degenerate_run > DEGENERATE_RUN_BEFORE_BLAND {
                    entering = Some((var, d));
                    break;
                }
                if entering.map_or(true, |(_, best)| d < best) {
                    entering = Some((var, d));
                }
            }
            let Some((var, _)) = entering else {
                return Some(true);
            };
            let alpha = self.column(var);
            let mut best: Option<(usize, f64)> = None;
            for (r, &a) in alpha.iter().enumerate() {
                if a <= PIVOT_TOL {
                    continue;
                }
                let ratio = self.xb[r].max(0.0) / a;
                best = match best {
                    None => Some((r, ratio)),
                    Some((br, bratio)) => {
                        if ratio < bratio - 1e-12
                            || (ratio <= bratio + 1e-12 && self.basis[r] < self.basis[br])
                        {
                            Some((r, ratio))
                        } else {
                            Some((br, bratio))
                        }
                    }
                };
            }
            let Some((row, ratio)) = best else {
                return Some(false);
            };
            degenerate_run = if ratio <= 1e-12 { degenerate_run + 1 } else { 0 };
            self.pivot(row, var, &alpha);
        }
    }
}

fn failed(status: LpStatus, pivots: usize) -> FloatSolution {
    FloatSolution {
        status,
        x: Vec::new(),
        y: Vec::new(),
        objective: f64::NAN,
        basis: Vec::new(),
        pivots,
    }
}

/// Solves `min c·x, A x = b, x ≥ 0` in `f64`. Returns `None` if the pivot
/// budget is exhausted.
pub fn solve(problem: &LpProblem) -> Option<FloatSolution> {
    let mut s = State::new(problem);
    let n = s.n;
    let phase1 = |var: usize| if var >= n { 1.0 } else { 0.0 };
    s.optimize(&phase1, false)?;
    let infeas: f64 = s
        .basis
        .iter()
        .zip(&s.xb)
        .filter(|(&v, _)| v >= n)
        .map(|(_, x)| *x)
        .sum();
    // Redundant rows become slightly inconsistent under the perturbation.
    if infeas > FEAS_TOL + 100.0 * PERTURBATION * (1.0 + s.m as f64) {
        return Some(failed(LpStatus::Infeasible, s.pivots));
    }
    // Swap zero-level artificials out where possible.
    for r in 0..s.m {
        if s.basis[r] < n {
            continue;
        }
        let row = s.binv[r].clone();
        let candidate = (0..n).find(|&j| {
            s.position[j].is_none() && s.cols[j].iter().map(|(i, v)| row[*i] * v).sum::<f64>().abs() > 1e-7
        });
        if let Some(j) = candidate {
            let alpha = s.column(j);
            s.pivot(r, j, &alpha);
        }
    }
    phase2(s, problem)
}

/// Phase 2 from a caller-supplied primal feasible basis of structural
/// columns (one per row). Returns `None` if the basis is malformed, singular
/// or infeasible.
pub fn solve_from_basis(problem: &LpProblem, basis: &[usize]) -> Option<FloatSolution> {
    let mut s = State::new(problem);
    if basis.len() != s.m || basis.iter().any(|&j| j >= s.n) {
        return None;
    }
    s.position = vec![None; s.n + s.m];
    for (r, &j) in basis.iter().enumerate() {
        if s.position[j].replace(r).is_some() {
            return None;
        }
        s.basis[r] = j;
    }
    if !s.refactor() || s.xb.iter().any(|&x| x < -FEAS_TOL) {
        return None;
    }
    phase2(s, problem)
}

/// Dual simplex from a caller-supplied basis that is dual feasible but may
/// be primal infeasible, as after adding rows with their slacks basic. Ends
/// with a primal phase 2 pass. Returns `None` if the basis is malformed,
/// singular or not dual feasible, or after `max_pivots` dual pivots.
pub fn solve_dual_from_basis(problem: &LpProblem, basis: &[usize], max_pivots: usize) -> Option<FloatSolution> {
    let mut s = State::new(problem);
    if basis.len() != s.m || basis.iter().any(|&j| j >= s.n) {
        return None;
    }
    s.position = vec![None; s.n + s.m];
    for (r, &j) in basis.iter().enumerate() {
        if s.position[j].replace(r).is_some() {
            return None;
        }
        s.basis[r] = j;
    }
    if !s.refactor() {
        return None;
    }
    let n = s.n;
    let mut c: Vec<f64> = problem.c.iter().map(|v| v.to_f64()).collect();
    let y = s.multipliers(&|var: usize| if var < n { c[var] } else { 0.0 });
    if (0..n).any(|j| s.position[j].is_none() && s.reduced_cost(j, c[j], &y) < -1e-7) {
        return None;
    }
    for (j, cj) in c.iter_mut().enumerate() {
        if s.position[j].is_none() {
            *cj += COST_PERTURBATION * (1.0 + cj.abs()) * jitter(j);
        }
    }
    let cost = |var: usize| if var < n { c[var] } else { 0.0 };
    let mut degenerate_run = 0usize;
    loop {
        if s.pivots > max_pivots.min(MAX_PIVOTS) {
            return None;
        }
        let bland = degenerate_run > DEGENERATE_RUN_BEFORE_BLAND;
        let infeasible = (0..s.m).filter(|&r| s.xb[r] < -FEAS_TOL);
        let leaving = if bland {
            infeasible.min_by_key(|&r| s.basis[r])
        } else {
            infeasible.min_by(|&a, &b| s.xb[a].total_cmp(&s.xb[b]).then(a.cmp(&b)))
        };
        let Some(row) = leaving else {
            break;
        };
        let y = s.multipliers(&cost);
        let rho = &s.binv[row];
        let mut best: Option<(usize, f64, f64)> = None;
        for j in 0..n {
            if s.position[j].is_some() {
                continue;
            }
            let a: f64 = s.cols[j].iter().map(|(i, v)| rho[*i] * v).sum();
            if a >= -PIVOT_TOL {
                continue;
            }
            let ratio = s.reduced_cost(j, c[j], &y).max(0.0) / -a;
            best = match best {
                Some((_, r, size)) if ratio > r + 1e-12 || (ratio >= r - 1e-12 && (bland || -a <= size)) => best,
                _ => Some((j, ratio, -a)),
            };
        }
        let Some((entering, ratio, _)) = best else {
            return Some(failed(LpStatus::Infeasible, s.pivots));
        };
        degenerate_run = if ratio <= 1e-12 { degenerate_run + 1 } else { 0 };
        let alpha = s.column(entering);
        s.pivot(row, entering, &alpha);
    }
    phase2(s, problem)
}

fn phase2(mut s: State, problem: &LpProblem) -> Option<FloatSolution> {
    let n = s.n;
    let c: Vec<f64> = problem.c.iter().map(|v| v.to_f64()).collect();
    let phase2 = |var: usize| if var < n { c[var] } else { 0.0 };
    if !s.optimize(&phase2, false)? {
        return Some(failed(LpStatus::Unbounded, s.pivots));
    }
    s.b = problem.b.iter().map(|v| v.to_f64().abs()).collect();
    let _ = s.refactor();
    let mut x = vec![0.0; n];
    for (r, &var) in s.basis.iter().enumerate() {
        if var < n {
            x[var] = s.xb[r].max(0.0);
        }
    }
    let y = s
        .multipliers(&phase2)
        .into_iter()
        .zip(&s.flipped)
        .map(|(v, &f)| if f { -v } else { v })
        .collect();
    let objective = x.iter().zip(&c).map(|(a, b)| a * b).sum();
    Some(FloatSolution {
        status: LpStatus::Optimal,
        x,
        y,
        objective,
        basis: s.basis.iter().map(|&v| (v < n).then_some(v)).collect(),
        pivots: s.pivots,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{Fraction, SparseColumns};

    fn lp(a: &[&[i64]], b: &[i64], c: &[i64]) -> LpProblem {
        let f = Fraction::from_integer;
        let dense: Vec<Vec<Fraction>> = a.iter().map(|r| r.iter().map(|&v| f(v)).collect()).collect();
        LpProblem::new(
            SparseColumns::from_dense(&dense),
            b.iter().map(|&v| f(v)).collect(),
            c.iter().map(|&v| f(v)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn agrees_with_exact_on_small_problems() {
        let cases = [
            lp(&[&[1, 1, 1]], &[1], &[-1, -1, 0]),
            lp(&[&[1, 2, 1, 0], &[2, 4, 2, 0], &[0, 1, 0, 1]], &[4, 8, 3], &[1, 1, 2, 1]),
            lp(&[&[-1, -1, 1]], &[-3], &[1, 2, 0]),
        ];
        for p in &cases {
            let exact = crate::solve(p);
            let float = solve(p).unwrap();
            assert_eq!(float.status, exact.status);
            assert!((float.objective - exact.objective.to_f64()).abs() < 1e-9);
        }
    }

    #[test]
    fn dual_simplex_repairs_infeasible_basis() {
        let p = lp(&[&[1, 1, -1, 0], &[1, -1, 0, 1]], &[2, 1], &[1, 1, 0, 0]);
        let warm = solve_dual_from_basis(&p, &[2, 3], 100).unwrap();
        assert_eq!(warm.status, LpStatus::Optimal);
        assert!((warm.objective - 2.0).abs() < 1e-6);
        assert!((warm.objective - solve(&p).unwrap().objective).abs() < 1e-6);
        let not_dual_feasible = lp(&[&[1, 1, -1, 0], &[1, -1, 0, 1]], &[2, 1], &[-1, 1, 0, 0]);
        assert!(solve_dual_from_basis(&p, &[2, 3], 0).is_none());
        assert!(solve_dual_from_basis(&not_dual_feasible, &[2, 3], 100).is_none());
        let infeasible = lp(&[&[1, 1, 1]], &[-1], &[1, 1, 0]);
        assert_eq!(solve_dual_from_basis(&infeasible, &[2], 100).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn warm_start_matches_cold_start() {
        let p = lp(&[&[1, 1, 1, 0], &[1, -1, 0, 1]], &[4, 1], &[-2, -1, 0, 0]);
        let cold = solve(&p).unwrap();
        let warm = solve_from_basis(&p, &[2, 3]).unwrap();
        assert!((cold.objective - warm.objective).abs() < 1e-9);
        assert!((warm.objective + 6.5).abs() < 1e-9);
        assert!(solve_from_basis(&p, &[2, 2]).is_none());
        assert!(solve_from_basis(&p, &[0, 1, 2]).is_none());
        // x1 = 4 makes the second row's slack negative.
        assert!(solve_from_basis(&p, &[0, 3]).is_none());
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        assert_eq!(solve(&lp(&[&[1, 1]], &[-1], &[0, 0])).unwrap().status, LpStatus::Infeasible);
        assert_eq!(solve(&lp(&[&[1, -1]], &[0], &[-1, 0])).unwrap().status, LpStatus::Unbounded);
    }
}
