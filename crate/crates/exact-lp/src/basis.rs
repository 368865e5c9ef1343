//! Exact primal and dual values of a given basis, e.g. one reported by the
//! floating-point solver.
//!
//! `B x_B = b` and `Bᵀ y = c_B` are solved by peeling column singletons
//! (slack columns, typically most of the basis) and running dense exact
//! elimination on the remaining core.

use crate::{Fraction, LpProblem};

/// Exact basic solution for a chosen basis. `x` is the full primal vector,
/// `y` the simplex multipliers; neither is checked for sign.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasicSolution {
    pub x: Vec<Fraction>,
    pub y: Vec<Fraction>,
    pub objective: Fraction,
}

/// Solves `Σ_c columns[c] z_c = rhs` for a square system. `None` if singular.
fn solve_square(columns: &[Vec<(usize, Fraction)>], rhs: &[Fraction]) -> Option<Vec<Fraction>> {
    let m = rhs.len();
    if columns.len() != m {
        return None;
    }
    let mut rows: Vec<Vec<(usize, Fraction)>> = vec![Vec::new(); m];
    for (c, col) in columns.iter().enumerate() {
        for (r, v) in col {
            if !v.is_zero() {
                rows[*r].push((c, v.clone()));
            }
        }
    }
    let mut col_count: Vec<usize> = columns.iter().map(|c| c.iter().filter(|(_, v)| !v.is_zero()).count()).collect();
    let mut row_active = vec![true; m];
    let mut col_active = vec![true; m];
    let mut stack: Vec<usize> = (0..m).filter(|&c| col_count[c] == 1).collect();
    let mut peeled: Vec<(usize, usize)> = Vec::new();
    while let Some(c) = stack.pop() {
        if !col_active[c] || col_count[c] != 1 {
            continue;
        }
        let r = columns[c].iter().find(|(r, v)| row_active[*r] && !v.is_zero())?.0;
        col_active[c] = false;
        row_active[r] = false;
        peeled.push((c, r));
        for (c2, _) in &rows[r] {
            if col_active[*c2] {
                col_count[*c2] -= 1;
                match col_count[*c2] {
                    0 => return None,
                    1 => stack.push(*c2),
                    _ => {}
                }
            }
        }
    }

    let core_rows: Vec<usize> = (0..m).filter(|&r| row_active[r]).collect();
    let core_cols: Vec<usize> = (0..m).filter(|&c| col_active[c]).collect();
    if core_rows.len() != core_cols.len() {
        return None;
    }
    let size = core_cols.len();
    let mut col_pos = vec![usize::MAX; m];
    for (i, &c) in core_cols.iter().enumerate() {
        col_pos[c] = i;
    }
    let mut dense: Vec<Vec<Fraction>> = core_rows
        .iter()
        .map(|&r| {
            let mut row = vec![Fraction::zero(); size + 1];
            for (c, v) in &rows[r] {
                if col_active[*c] {
                    row[col_pos[*c]] = v.clone();
                }
            }
            row[size] = rhs[r].clone();
            row
        })
        .collect();
    // Forward elimination, preferring unit pivots to limit growth.
    for col in 0..size {
        let candidates = (col..size).filter(|&i| !dense[i][col].is_zero());
        let pivot = candidates
            .clone()
            .find(|&i| dense[i][col].abs().is_one())
            .or_else(|| candidates.clone().next())?;
        dense.swap(col, pivot);
        let (head, tail) = dense.split_at_mut(col + 1);
        let prow = &head[col];
        let inv = prow[col].recip();
        let support: Vec<usize> = (col + 1..=size).filter(|&j| !prow[j].is_zero()).collect();
        for row in tail.iter_mut() {
            if row[col].is_zero() {
                continue;
            }
            let f = &row[col] * &inv;
            for &j in &support {
                let delta = &f * &prow[j];
                row[j] -= delta;
            }
            row[col] = Fraction::zero();
        }
    }
    let mut z_core = vec![Fraction::zero(); size];
    for i in (0..size).rev() {
        let mut acc = dense[i][size].clone();
        for j in i + 1..size {
            if !dense[i][j].is_zero() {
                acc -= &dense[i][j] * &z_core[j];
            }
        }
        z_core[i] = acc / &dense[i][i];
    }

    let mut z = vec![Fraction::zero(); m];
    for (i, &c) in core_cols.iter().enumerate() {
        z[c] = z_core[i].clone();
    }
    for &(c, r) in peeled.iter().rev() {
        let mut acc = rhs[r].clone();
        let mut pivot = Fraction::zero();
        for (c2, v) in &rows[r] {
            if *c2 == c {
                pivot = v.clone();
            } else {
                acc -= v * &z[*c2];
            }
        }
        z[c] = acc / pivot;
    }
    Some(z)
}

/// Exact `x_B = B⁻¹ b` and `y = B⁻ᵀ c_B` for the basis listing one structural
/// column per row. `None` when the basis is malformed or singular.
pub fn basic_solution(problem: &LpProblem, basis: &[usize]) -> Option<BasicSolution> {
    let m = problem.rows();
    let n = problem.cols();
    if basis.len() != m || basis.iter().any(|&j| j >= n) {
        return None;
    }
    let mut seen = vec![false; n];
    if basis.iter().any(|&j| std::mem::replace(&mut seen[j], true)) {
        return None;
    }
    let columns: Vec<Vec<(usize, Fraction)>> = basis.iter().map(|&j| problem.a.column(j).to_vec()).collect();
    let xb = solve_square(&columns, &problem.b)?;
    let mut transposed: Vec<Vec<(usize, Fraction)>> = vec![Vec::new(); m];
    for (pos, col) in columns.iter().enumerate() {
        for (r, v) in col {
            transposed[*r].push((pos, v.clone()));
        }
    }
    let cb: Vec<Fraction> = basis.iter().map(|&j| problem.c[j].clone()).collect();
    let y = solve_square(&transposed, &cb)?;
    let mut x = vec![Fraction::zero(); n];
    for (&j, v) in basis.iter().zip(xb) {
        x[j] = v;
    }
    let objective = x.iter().zip(&problem.c).filter(|(x, _)| !x.is_zero()).map(|(x, c)| x * c).sum();
    Some(BasicSolution { x, y, objective })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{solve, verify_solution, SparseColumns};

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
    fn reproduces_simplex_optimum_from_its_basis() {
        let p = lp(&[&[1, 1, 1, 0], &[1, -1, 0, 1]], &[4, 1], &[-2, -1, 0, 0]);
        let s = solve(&p);
        let basis: Vec<usize> = s.basis.iter().map(|b| b.unwrap()).collect();
        let exact = basic_solution(&p, &basis).unwrap();
        assert_eq!(exact.x, s.x);
        assert_eq!(exact.y, s.y);
        assert_eq!(exact.objective, Fraction::new(-13, 2));
        let candidate = crate::LpSolution { x: exact.x, y: exact.y, objective: exact.objective, ..s };
        assert!(verify_solution(&p, &candidate).unwrap());
    }

    #[test]
    fn rejects_singular_and_malformed_bases() {
        let p = lp(&[&[1, 2, 1, 0], &[2, 4, 0, 1]], &[1, 1], &[0, 0, 0, 0]);
        assert!(basic_solution(&p, &[0, 1]).is_none());
        assert!(basic_solution(&p, &[2, 2]).is_none());
        assert!(basic_solution(&p, &[2]).is_none());
        assert_eq!(basic_solution(&p, &[2, 3]).unwrap().x, vec![f(0), f(0), f(1), f(1)]);
    }

    #[test]
    fn dense_core_with_fractions() {
        // Core block needs a non-unit pivot.
        let p = lp(&[&[2, 3, 0], &[4, 1, 0], &[1, 1, 1]], &[5, 6, 9], &[1, 1, 1]);
        let exact = basic_solution(&p, &[0, 1, 2]).unwrap();
        assert_eq!(exact.x, vec![Fraction::new(13, 10), Fraction::new(4, 5), Fraction::new(69, 10)]);
    }
}
