//! The dual standard form at the basic solution of value 1, its inverse basis
//! and the reduced costs of every nonbasic column.

use std::ops::Range;

use exact_lp::{Fraction, LpProblem};
use serde::Serialize;

use super::program::{dual_program, DualLayout};
use crate::lattice::{SignOracle, StateSet};
use crate::oracle::RationalMatrix;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BlockCheck {
    pub name: String,
    pub pass: bool,
}

/// Standard-form data split into the basis `M` (columns `α_{v_j}` and
/// `r^{(j)}_u`, `u ≠ v_j`) and the nonbasic part `N`, ordered as
/// `[α_K̂, r_K, β, q^{(1)}, …, q^{(k)}]`.
#[derive(Debug, Clone)]
pub struct StandardFormTableau {
    pub set: StateSet,
    pub layout: DualLayout,
    pub problem: LpProblem,
    pub basic: Vec<usize>,
    pub nonbasic: Vec<usize>,
    pub m: RationalMatrix,
    pub m_inv: RationalMatrix,
    /// `M⁻¹ b`, indexed like `basic`.
    pub b_prime: Vec<Fraction>,
    /// `−M⁻¹ N`, rows like `basic`, columns like `nonbasic`.
    pub n_prime: RationalMatrix,
    /// `σ_n = c_n + Σ_m c_m N′_{mn}` with `c = [1, −1, 0, 0]`.
    pub sigma: Vec<Fraction>,
    /// `(1/k) Σ_m c_m b′_m`.
    pub z0: Fraction,
    pub rank: usize,
    pub checks: Vec<BlockCheck>,
}

impl StandardFormTableau {
    pub fn label(&self, col: usize) -> String {
        let DualLayout { n, k } = self.layout;
        let t = self.set.t();
        let name = |u: usize| crate::lattice::LatticeIndex::from_linear(t, u as u32).expect("in range").to_string();
        if col < n {
            format!("alpha_{}", name(col))
        } else if col < 2 * n {
            format!("beta_{}", name(col - n))
        } else if col < 2 * n + k * n {
            let i = col - 2 * n;
            format!("r{}_{}", i / n + 1, name(i % n))
        } else {
            let i = col - 2 * n - k * n;
            format!("q{}_{}", i / n + 1, name(i % n))
        }
    }

    /// Named ranges of `nonbasic`.
    pub fn nonbasic_blocks(&self) -> Vec<(String, Range<usize>)> {
        let DualLayout { n, k } = self.layout;
        let mut blocks = vec![
            ("alpha_khat".to_string(), 0..n - k),
            ("r_k".to_string(), n - k..n),
            ("beta".to_string(), n..2 * n),
        ];
        for j in 0..k {
            blocks.push((format!("q{}", j + 1), 2 * n + j * n..2 * n + (j + 1) * n));
        }
        blocks
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Closed-form `M⁻¹` entry: basic variable `row_var`, constraint row `(l, w)`.
fn predicted_m_inv(layout: &DualLayout, members: &[usize], row_var: usize, l: usize, w: usize) -> Fraction {
    let n = layout.n;
    if row_var < n {
        // α_{v_j}: picks constraint (j, v_j).
        let one = members.iter().position(|&v| v == row_var) == Some(l) && w == row_var;
        return if one { Fraction::one() } else { Fraction::zero() };
    }
    let idx = row_var - 2 * n;
    let (i, u) = (idx / n, idx % n);
    if l == i {
        if u == w {
            Fraction::from_integer(-1)
        } else {
            Fraction::zero()
        }
    } else if u == members[l] && w == members[l] {
        Fraction::one()
    } else {
        Fraction::zero()
    }
}

/// Closed-form `N′` entry for basic `row_var` and nonbasic `col_var`.
fn predicted_n_prime(layout: &DualLayout, oracle: &SignOracle, members: &[usize], row_var: usize, col_var: usize) -> Fraction {
    let DualLayout { n, k } = *layout;
    let in_k = |u: usize| members.contains(&u);
    let zero = Fraction::zero;
    let indicator = |b: bool| if b { Fraction::one() } else { Fraction::zero() };
    let top = row_var < n;
    let (i, u) = if top {
        (members.iter().position(|&v| v == row_var).expect("basic alpha is in K"), row_var)
    } else {
        ((row_var - 2 * n) / n, (row_var - 2 * n) % n)
    };
    if col_var < n {
        // α_{u'}, u' ∉ K.
        return if top { zero() } else { indicator(u == col_var) };
    }
    if col_var < 2 * n {
        let w = col_var - n;
        return if top {
            indicator(w == members[i])
        } else if u == w && !in_k(u) {
            Fraction::from_integer(-1)
        } else {
            zero()
        };
    }
    if col_var < 2 * n + k * n {
        // r^{(l)}_{v_l}
        let l = (col_var - 2 * n) / n;
        return if top { indicator(l == i) } else { indicator(l != i && u == members[l]) };
    }
    let idx = col_var - 2 * n - k * n;
    let (l, w) = (idx / n, idx % n);
    if top {
        if l == i {
            oracle.entry(members[i] as u32, w as u32)
        } else {
            zero()
        }
    } else if l == i {
        -oracle.entry(u as u32, w as u32)
    } else if u == members[l] {
        oracle.entry(members[l] as u32, w as u32)
    } else {
        zero()
    }
}

/// Builds the tableau and checks `M·M⁻¹ = I`, the closed forms of `M⁻¹`,
/// `b′` and `N′`, `z₀ = 1`, and `rank(A) = k·4^t`.
///
/// Dense exact algebra on a `k·4^t`-square basis: intended for `t ≤ 2`.
pub fn build_tableau(set: &StateSet) -> StandardFormTableau {
    let (problem, layout) = dual_program(set);
    let DualLayout { n, k } = layout;
    let oracle = SignOracle::new(set.t()).expect("set has valid t");
    let members: Vec<usize> = set.members().iter().map(|v| v.linear() as usize).collect();

    let mut basic: Vec<usize> = members.iter().map(|&v| layout.alpha(v)).collect();
    for (j, &v) in members.iter().enumerate() {
        basic.extend((0..n).filter(|&u| u != v).map(|u| layout.r(j, u)));
    }
    let mut nonbasic: Vec<usize> = (0..n).filter(|u| !members.contains(u)).map(|u| layout.alpha(u)).collect();
    nonbasic.extend(members.iter().enumerate().map(|(j, &v)| layout.r(j, v)));
    nonbasic.extend((0..n).map(|u| layout.beta(u)));
    for j in 0..k {
        nonbasic.extend((0..n).map(|l| layout.q(j, l)));
    }

    let rows = layout.rows();
    let dense = problem.a.to_dense();
    let column_matrix = |cols: &[usize]| {
        let mut m = RationalMatrix::zeros(rows, cols.len());
        for (c, &var) in cols.iter().enumerate() {
            for (r, row) in dense.iter().enumerate() {
                if !row[var].is_zero() {
                    m.set(r, c, row[var].clone());
                }
            }
        }
        m
    };
    let m = column_matrix(&basic);
    let n_mat = column_matrix(&nonbasic);
    let m_inv = m.inverse().expect("basis of the value-1 solution is invertible");

    let b_col = RationalMatrix::from_rows(problem.b.iter().map(|v| vec![v.clone()]).collect());
    let b_prime: Vec<Fraction> = {
        let x = m_inv.mul(&b_col);
        (0..rows).map(|i| x.get(i, 0).clone()).collect()
    };
    let n_prime = m_inv.mul(&n_mat).scale(&Fraction::from_integer(-1));

    let c_basic: Vec<&Fraction> = basic.iter().map(|&v| &problem.c[v]).collect();
    let sigma: Vec<Fraction> = nonbasic
        .iter()
        .enumerate()
        .map(|(col, &var)| {
            let mut s = problem.c[var].clone();
            for (r, cm) in c_basic.iter().enumerate() {
                if !cm.is_zero() {
                    s += *cm * n_prime.get(r, col);
                }
            }
            s
        })
        .collect();
    let z0 = c_basic.iter().zip(&b_prime).map(|(c, b)| *c * b).sum::<Fraction>() * Fraction::new(1, k as i64);
    let rank = RationalMatrix::from_rows(dense.clone()).rank();

    let mut checks = Vec::new();
    checks.push(BlockCheck {
        name: "M*Minv=I".into(),
        pass: m.mul(&m_inv) == RationalMatrix::identity(rows),
    });
    let m_inv_closed = (0..rows).all(|r| {
        (0..rows).all(|c| *m_inv.get(r, c) == predicted_m_inv(&layout, &members, basic[r], c / n, c % n))
    });
    checks.push(BlockCheck {
        name: "Minv-closed-form".into(),
        pass: m_inv_closed,
    });
    let b_prime_closed = basic.iter().zip(&b_prime).all(|(&var, value)| {
        let expected = if var < n {
            true
        } else {
            let idx = var - 2 * n;
            let (j, u) = (idx / n, idx % n);
            members.contains(&u) && members[j] != u
        };
        *value == if expected { Fraction::one() } else { Fraction::zero() }
    });
    checks.push(BlockCheck {
        name: "b'-basic-solution".into(),
        pass: b_prime_closed,
    });
    let blocks = [
        ("N'-alpha_khat", 0..n - k),
        ("N'-r_k", n - k..n),
        ("N'-beta", n..2 * n),
        ("N'-q", 2 * n..nonbasic.len()),
    ];
    for (name, range) in blocks {
        let pass = range.clone().all(|col| {
            (0..rows).all(|r| *n_prime.get(r, col) == predicted_n_prime(&layout, &oracle, &members, basic[r], nonbasic[col]))
        });
        checks.push(BlockCheck { name: name.into(), pass });
    }
    checks.push(BlockCheck {
        name: "z0=1".into(),
        pass: z0.is_one(),
    });
    checks.push(BlockCheck {
        name: "rank(A)=k*4^t".into(),
        pass: rank == k * n,
    });

    StandardFormTableau {
        set: set.clone(),
        layout,
        problem,
        basic,
        nonbasic,
        m,
        m_inv,
        b_prime,
        n_prime,
        sigma,
        z0,
        rank,
        checks,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SigmaBlock {
    pub name: String,
    pub columns: Vec<String>,
    pub expected: Vec<Fraction>,
    pub observed: Vec<Fraction>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReducedCostReport {
    pub set: String,
    pub z0: Fraction,
    pub rank: usize,
    pub tableau_checks: Vec<BlockCheck>,
    pub blocks: Vec<SigmaBlock>,
    pub pass: bool,
}

/// Reduced costs grouped by block and compared with the expected patterns:
/// `1` on `α_K̂` and `r_K`, `0` on `β_K`, `−1` on `β_K̂`, row `v_j` of
/// `P^{⊗t}` on `q^{(j)}`.
pub fn reduced_costs(set: &StateSet) -> ReducedCostReport {
    let tab = build_tableau(set);
    let oracle = SignOracle::new(set.t()).expect("set has valid t");
    let DualLayout { n, .. } = tab.layout;
    let members: Vec<usize> = set.members().iter().map(|v| v.linear() as usize).collect();
    let mut blocks = Vec::new();
    let mut push = |name: String, cols: Vec<usize>, expected: Vec<Fraction>| {
        let observed: Vec<Fraction> = cols.iter().map(|&c| tab.sigma[c].clone()).collect();
        blocks.push(SigmaBlock {
            name,
            columns: cols.iter().map(|&c| tab.label(tab.nonbasic[c])).collect(),
            pass: observed == expected,
            expected,
            observed,
        });
    };
    let named = tab.nonbasic_blocks();
    let one = Fraction::one();
    let (_, alpha_khat) = &named[0];
    push("alpha_khat".into(), alpha_khat.clone().collect(), vec![one.clone(); alpha_khat.len()]);
    let (_, r_k) = &named[1];
    push("r_k".into(), r_k.clone().collect(), vec![one.clone(); r_k.len()]);
    let (_, beta) = &named[2];
    let (beta_k, beta_khat): (Vec<usize>, Vec<usize>) = beta.clone().partition(|&c| members.contains(&(tab.nonbasic[c] - n)));
    push("beta_k".into(), beta_k.clone(), vec![Fraction::zero(); beta_k.len()]);
    push("beta_khat".into(), beta_khat.clone(), vec![Fraction::from_integer(-1); beta_khat.len()]);
    for (j, (name, range)) in named[3..].iter().enumerate() {
        let expected = (0..n as u32).map(|w| oracle.entry(members[j] as u32, w)).collect();
        push(name.clone(), range.clone().collect(), expected);
    }
    let pass = tab.passed() && blocks.iter().all(|b| b.pass);
    ReducedCostReport {
        set: set.to_string(),
        z0: tab.z0.clone(),
        rank: tab.rank,
        tableau_checks: tab.checks.clone(),
        blocks,
        pass,
    }
}
