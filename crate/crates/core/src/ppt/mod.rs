//! PPT-distinguishability programs for lattice state sets.

mod certificate;
mod program;
mod tableau;

use exact_lp::{basic_solution, float, solve_with, verify_solution, Fraction, LpProblem, LpSolution, PivotRule, SolveOptions};
use serde::{Deserialize, Serialize};

use crate::lattice::{SignOracle, StateSet};

pub use certificate::{dual_value, primal_value, trivial_dual, verify_certificate, Certificate, CertificateError};
pub use program::{
    beta_prime_program, dual_program, primal_program, restricted_primal_program, DualLayout, PrimalLayout, RestrictedLayout,
};
pub use tableau::{build_tableau, reduced_costs, BlockCheck, ReducedCostReport, SigmaBlock, StandardFormTableau};

/// How `alpha` reaches its exact answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlphaMode {
    /// Exact simplex on the primal program.
    #[default]
    Exact,
    /// Floating-point solve whose final basis is re-solved exactly (or whose
    /// values are rounded) and certified; falls back to the exact simplex
    /// when certification fails.
    Screen,
}

/// Provenance of a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ExactLp,
    ScreenCertified,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::ExactLp => "exact-lp",
            Method::ScreenCertified => "screen-certified",
        }
    }
}

/// Exact optimum together with verified primal and dual witnesses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlphaResult {
    pub alpha: Fraction,
    pub distinguishable: bool,
    pub certificate: Certificate,
    pub method: Method,
    /// Value of the verified primal point (a feasible POVM).
    pub primal_value: Fraction,
    /// Value of the verified dual point.
    pub dual_value: Fraction,
}

const SCREEN_MAX_DENOMINATOR: u64 = 1 << 12;

fn pivot_options() -> SolveOptions {
    SolveOptions {
        rule: PivotRule::DantzigBland,
    }
}

fn solve_checked(problem: &LpProblem) -> LpSolution {
    let solution = solve_with(problem, pivot_options());
    assert!(solution.is_optimal(), "lattice programs are always feasible and bounded");
    assert!(
        verify_solution(problem, &solution).expect("solver output has problem shape"),
        "exact solution failed re-verification"
    );
    solution
}

fn finish(set: &StateSet, p: Vec<Vec<Fraction>>, y: Vec<Fraction>, q: Vec<Vec<Fraction>>, method: Method) -> Option<AlphaResult> {
    let primal = primal_value(set, &p).ok()??;
    let dual = dual_value(set, &y, &q).ok()??;
    if primal != dual {
        return None;
    }
    let distinguishable = primal.is_one();
    let certificate = if distinguishable {
        Certificate::Povm { p }
    } else {
        Certificate::Dual {
            y,
            q,
            value: dual.clone(),
        }
    };
    if !verify_certificate(set, &certificate).ok()? {
        return None;
    }
    Some(AlphaResult {
        alpha: primal.clone(),
        distinguishable,
        certificate,
        method,
        primal_value: primal,
        dual_value: dual,
    })
}

fn alpha_exact(set: &StateSet) -> AlphaResult {
    let (problem, layout) = primal_program(set);
    let solution = solve_checked(&problem);
    let (p, y, q) = unpack(set, &layout, &solution.x, &solution.y);
    finish(set, p, y, q, Method::ExactLp).expect("exact primal/dual pair certifies itself")
}

type Witnesses = (Vec<Vec<Fraction>>, Vec<Fraction>, Vec<Vec<Fraction>>);

/// POVM, `y` and `q` from a primal point and its simplex multipliers.
fn unpack(set: &StateSet, layout: &PrimalLayout, x: &[Fraction], duals: &[Fraction]) -> Witnesses {
    let (n, k) = (layout.n, layout.k);
    let scale = Fraction::from_integer(-(1 << set.t()));
    let p = (0..k).map(|j| (0..n).map(|u| x[layout.p(j, u)].clone()).collect()).collect();
    let y = duals[..n].iter().map(|v| -v).collect();
    let q = (0..k)
        .map(|j| (0..n).map(|u| &duals[layout.ppt_row(j, u)] * &scale).collect())
        .collect();
    (p, y, q)
}

fn round(x: f64) -> Fraction {
    if x.abs() < 1e-9 {
        return Fraction::zero();
    }
    Fraction::approximate(x, SCREEN_MAX_DENOMINATOR).unwrap_or_else(Fraction::zero)
}

fn alpha_screen(set: &StateSet) -> Option<AlphaResult> {
    let (problem, layout) = primal_program(set);
    let solution = float::solve_from_basis(&problem, &layout.crash_basis()).or_else(|| float::solve(&problem))?;
    if solution.status != exact_lp::LpStatus::Optimal {
        return None;
    }
    let basis: Option<Vec<usize>> = solution.basis.iter().copied().collect();
    if let Some(exact) = basis.and_then(|b| basic_solution(&problem, &b)) {
        let (p, y, q) = unpack(set, &layout, &exact.x, &exact.y);
        if let Some(result) = finish(set, p, y, q, Method::ScreenCertified) {
            return Some(result);
        }
    }
    let (n, k) = (layout.n, layout.k);
    let oracle = SignOracle::new(set.t()).ok()?;
    let p: Vec<Vec<Fraction>> = (0..k)
        .map(|j| (0..n).map(|u| round(solution.x[layout.p(j, u)])).collect())
        .collect();
    let scale = -((1u64 << set.t()) as f64);
    let q: Vec<Vec<Fraction>> = (0..k)
        .map(|j| {
            (0..n)
                .map(|u| {
                    let v = round(solution.y[layout.ppt_row(j, u)] * scale);
                    if v.is_negative() {
                        Fraction::zero()
                    } else {
                        v
                    }
                })
                .collect()
        })
        .collect();
    // Smallest y making (y, q) feasible.
    let mut y = vec![Fraction::zero(); n];
    for (j, v) in set.members().iter().enumerate() {
        let pq = certificate::apply_p(&oracle, &q[j]);
        for (u, value) in pq.into_iter().enumerate() {
            let need = if u == v.linear() as usize {
                value + Fraction::one()
            } else {
                value
            };
            if j == 0 || need > y[u] {
                y[u] = need;
            }
        }
    }
    finish(set, p, y, q, Method::ScreenCertified)
}

/// Screening switches to row generation from this `t` on.
const ROW_GENERATION_MIN_T: u32 = 4;

/// Most-violated PPT rows added per member and round of row generation.
const ROWS_PER_ROUND: usize = 16;
const MAX_ROUNDS: usize = 500;
/// Dual simplex budget per round before falling back to a cold start.
const WARM_START_PIVOTS_PER_ROW: usize = 2;

/// `2^t (P^{⊗t} p)[u]` for every `u`, in floating point.
fn scaled_image(oracle: &SignOracle, p: &[f64]) -> Vec<f64> {
    let n = oracle.dimension() as u32;
    (0..n)
        .map(|u| (0..n).map(|w| oracle.unit_entry(u, w) as f64 * p[w as usize]).sum())
        .collect()
}

/// Adds up to [`ROWS_PER_ROUND`] violated rows per member, most violated
/// first. Returns whether anything was added.
fn add_violated(rows: &mut [Vec<usize>], violations: Vec<Vec<(usize, f64)>>) -> bool {
    let mut added = false;
    for (kept, mut found) in rows.iter_mut().zip(violations) {
        found.retain(|(u, _)| !kept.contains(u));
        found.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        for (u, _) in found.into_iter().take(ROWS_PER_ROUND) {
            kept.push(u);
            added = true;
        }
    }
    added
}

/// Carries a basis of `old` over to `new`, which keeps the same rows plus
/// some appended ones. The slacks of the appended rows enter the basis.
fn extend_basis(old: &RestrictedLayout, basis: &[usize], new: &RestrictedLayout) -> Vec<usize> {
    let pn = old.k * old.n;
    let mut out: Vec<usize> = basis
        .iter()
        .map(|&var| {
            if var < pn {
                return var;
            }
            let (j, i) = old.slack_position(var - pn);
            new.slack(j, i)
        })
        .collect();
    for j in 0..new.k {
        out.extend((old.rows[j].len()..new.rows[j].len()).map(|i| new.slack(j, i)));
    }
    out
}

/// Row generation on the primal: solve with a subset of the PPT rows, add
/// rows the optimum violates, repeat. The final round is solved exactly from
/// the floating-point basis and certified like [`AlphaMode::Screen`].
pub fn alpha_row_generation(set: &StateSet) -> Option<AlphaResult> {
    let oracle = SignOracle::new(set.t()).ok()?;
    let (n, k) = (oracle.dimension(), set.k());
    let scale = Fraction::from_integer(-(1 << set.t()));
    let mut rows: Vec<Vec<usize>> = vec![Vec::new(); k];
    let mut previous: Option<(RestrictedLayout, Vec<usize>)> = None;
    for _ in 0..MAX_ROUNDS {
        let (problem, layout) = restricted_primal_program(set, rows.clone());
        let warm = previous.take().and_then(|(old, basis)| {
            let start = extend_basis(&old, &basis, &layout);
            float::solve_dual_from_basis(&problem, &start, WARM_START_PIVOTS_PER_ROW * problem.rows())
        });
        let solution = match warm {
            Some(s) if s.status == exact_lp::LpStatus::Optimal => s,
            _ => float::solve_from_basis(&problem, &layout.crash_basis()).or_else(|| float::solve(&problem))?,
        };
        if solution.status != exact_lp::LpStatus::Optimal {
            return None;
        }
        let violations: Vec<Vec<(usize, f64)>> = (0..k)
            .map(|j| {
                let pj: Vec<f64> = (0..n).map(|u| solution.x[layout.p(j, u)]).collect();
                scaled_image(&oracle, &pj)
                    .into_iter()
                    .enumerate()
                    .filter(|(_, v)| *v < -1e-9)
                    .collect()
            })
            .collect();
        if add_violated(&mut rows, violations) {
            previous = solution.basis.iter().copied().collect::<Option<Vec<_>>>().map(|b| (layout, b));
            continue;
        }
        let basis: Vec<usize> = solution.basis.iter().copied().collect::<Option<_>>()?;
        previous = Some((layout.clone(), basis.clone()));
        let exact = basic_solution(&problem, &basis)?;
        let p: Vec<Vec<Fraction>> = (0..k)
            .map(|j| (0..n).map(|u| exact.x[layout.p(j, u)].clone()).collect())
            .collect();
        let y: Vec<Fraction> = exact.y[..n].iter().map(|v| -v).collect();
        let mut q = vec![vec![Fraction::zero(); n]; k];
        for (j, kept) in layout.rows.iter().enumerate() {
            for (i, &u) in kept.iter().enumerate() {
                q[j][u] = &exact.y[layout.ppt_row(j, i)] * &scale;
            }
        }
        // Omitted rows the exact point violates feed the next round.
        let exact_violations: Vec<Vec<(usize, f64)>> = p
            .iter()
            .map(|pj| {
                certificate::apply_p(&oracle, pj)
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| v.is_negative())
                    .map(|(u, v)| (u, v.to_f64()))
                    .collect()
            })
            .collect();
        if add_violated(&mut rows, exact_violations) {
            continue;
        }
        return finish(set, p, y, q, Method::ScreenCertified);
    }
    None
}

/// Exact `α(set)`: the optimal success probability of PPT discrimination.
pub fn alpha(set: &StateSet, mode: AlphaMode) -> AlphaResult {
    match mode {
        AlphaMode::Exact => alpha_exact(set),
        AlphaMode::Screen if set.t() >= ROW_GENERATION_MIN_T => alpha_row_generation(set)
            .or_else(|| alpha_screen(set))
            .unwrap_or_else(|| alpha_exact(set)),
        AlphaMode::Screen => alpha_screen(set).unwrap_or_else(|| alpha_exact(set)),
    }
}

/// Optimum of the dual standard form, solved independently of the primal.
pub fn alpha_via_dual_program(set: &StateSet) -> Fraction {
    let (problem, _) = dual_program(set);
    let solution = solve_checked(&problem);
    solution.objective * Fraction::new(1, set.k() as i64)
}

/// `β′ = (1/k) Σ_u max_j P^{⊗t}[u, v_j]`.
pub fn beta_prime(set: &StateSet) -> Fraction {
    let oracle = SignOracle::new(set.t()).expect("set has valid t");
    let n = oracle.dimension() as u32;
    let net: i64 = (0..n)
        .map(|u| {
            set.members()
                .iter()
                .map(|v| oracle.unit_entry(u, v.linear()))
                .max()
                .expect("non-empty set")
        })
        .sum();
    Fraction::new(net, (set.k() as i64) << set.t())
}

/// `β′` obtained by solving its LP as an exact program.
pub fn beta_prime_lp(set: &StateSet) -> Fraction {
    let problem = beta_prime_program(set);
    solve_checked(&problem).objective * Fraction::new(1, set.k() as i64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticeIndex;

    fn set(s: &str) -> StateSet {
        StateSet::parse(s).unwrap()
    }

    #[test]
    fn four_state_value() {
        let s = set("00,11,21,31");
        let r = alpha(&s, AlphaMode::Exact);
        assert_eq!(r.alpha, Fraction::new(7, 8));
        assert!(!r.distinguishable);
        assert_eq!(r.certificate.kind(), "dual");
        assert_eq!(r.primal_value, r.dual_value);
        assert!(verify_certificate(&s, &r.certificate).unwrap());
        assert_eq!(alpha_via_dual_program(&s), Fraction::new(7, 8));
        assert_eq!(beta_prime(&s), Fraction::new(7, 8));
        assert_eq!(beta_prime_lp(&s), Fraction::new(7, 8));
    }

    #[test]
    fn screen_agrees_with_exact() {
        for text in ["00,11,21,31", "00,01,02,03", "02,12,20,21,23", "00,01,02"] {
            let s = set(text);
            let exact = alpha(&s, AlphaMode::Exact);
            let screened = alpha(&s, AlphaMode::Screen);
            assert_eq!(exact.alpha, screened.alpha, "{text}");
            assert!(verify_certificate(&s, &screened.certificate).unwrap());
        }
    }

    #[test]
    fn row_generation_agrees_with_exact() {
        for text in ["00,11,21,31", "00,01,02", "02,12,20,21,23,32", "000,020,110,211"] {
            let s = set(text);
            let generated = alpha_row_generation(&s).expect("converges");
            assert_eq!(generated.alpha, alpha(&s, AlphaMode::Exact).alpha, "{text}");
            assert!(verify_certificate(&s, &generated.certificate).unwrap());
        }
    }

    #[test]
    fn small_sets_are_distinguishable() {
        for text in ["00,01,02", "00,01,02,03", "13"] {
            let s = set(text);
            let r = alpha(&s, AlphaMode::Exact);
            assert!(r.distinguishable, "{text}");
            assert_eq!(r.certificate.kind(), "povm");
        }
    }

    #[test]
    fn singletons_and_full_set() {
        for v in [0u32, 7, 15] {
            let s = StateSet::new(2, vec![LatticeIndex::from_linear(2, v).unwrap()]).unwrap();
            assert!(alpha(&s, AlphaMode::Exact).alpha.is_one());
            assert!(beta_prime(&s).is_one());
        }
        let full = StateSet::from_linear(2, &(0..16).collect::<Vec<_>>()).unwrap();
        assert_eq!(beta_prime(&full), Fraction::new(1, 4));
        assert_eq!(beta_prime_lp(&full), Fraction::new(1, 4));
    }

    #[test]
    fn tampered_dual_certificate_rejected() {
        let s = set("00,11,21,31");
        let r = alpha(&s, AlphaMode::Exact);
        let Certificate::Dual { y, mut q, value } = r.certificate else {
            panic!("expected dual certificate");
        };
        let (j, l) = (0..4)
            .flat_map(|j| (0..16).map(move |l| (j, l)))
            .find(|&(j, l)| q[j][l].is_zero())
            .unwrap();
        q[j][l] = Fraction::new(-1, 100);
        assert!(!verify_certificate(&s, &Certificate::Dual { y, q, value }).unwrap());
    }
}
