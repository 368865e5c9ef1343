use crate::{Fraction, LpError, LpProblem, LpSolution, LpStatus};

/// Re-checks an optimal solution from scratch: primal feasibility, dual
/// feasibility, zero duality gap and complementary slackness, all exact.
/// Returns `Ok(false)` for a solution that is not optimal or fails any check.
pub fn verify_solution(problem: &LpProblem, solution: &LpSolution) -> Result<bool, LpError> {
    if solution.status != LpStatus::Optimal {
        return Ok(false);
    }
    let (m, n) = (problem.rows(), problem.cols());
    if solution.x.len() != n || solution.y.len() != m {
        return Err(LpError::SolutionShape {
            rows: m,
            cols: n,
            x: solution.x.len(),
            y: solution.y.len(),
        });
    }
    Ok(check_optimality(problem, &solution.x, &solution.y, &solution.objective))
}

pub(crate) fn check_optimality(problem: &LpProblem, x: &[Fraction], y: &[Fraction], objective: &Fraction) -> bool {
    if x.iter().any(Fraction::is_negative) {
        return false;
    }
    if problem.a.mul_vec(x) != problem.b {
        return false;
    }
    let aty = problem.a.mul_transpose_vec(y);
    let mut slack_ok = true;
    for ((aj, cj), xj) in aty.iter().zip(&problem.c).zip(x) {
        let reduced = cj - aj;
        if reduced.is_negative() {
            return false;
        }
        if !xj.is_zero() && !reduced.is_zero() {
            slack_ok = false;
        }
    }
    let primal: Fraction = problem.c.iter().zip(x).map(|(c, x)| c * x).sum();
    let dual: Fraction = problem.b.iter().zip(y).map(|(b, y)| b * y).sum();
    slack_ok && primal == dual && primal == *objective
}
