//! LP builders for a lattice state set.
//!
//! Two independent encodings of the same optimum:
//!
//! * the primal diagonal program: maximise `(1/k) Σ_j p_j[v_j]` over
//!   `p_j ≥ 0`, `Σ_j p_j = 1`, `P^{⊗t} p_j ≥ 0`;
//! * the dual standard form `min c·x, A x = b, x ≥ 0` with
//!   `x = [α, β, r^(1..k), q^(1..k)]`, whose optimum divided by `k` is the
//!   same value.

use exact_lp::{Fraction, LpProblem, SparseColumns};

use crate::lattice::{SignOracle, StateSet};

/// Column layout of the primal program.
#[derive(Debug, Clone, Copy)]
pub struct PrimalLayout {
    pub n: usize,
    pub k: usize,
}

impl PrimalLayout {
    pub fn p(&self, j: usize, u: usize) -> usize {
        j * self.n + u
    }

    pub fn slack(&self, j: usize, u: usize) -> usize {
        self.k * self.n + j * self.n + u
    }

    pub fn cols(&self) -> usize {
        2 * self.k * self.n
    }

    /// Row of the PPT constraint `s_j[u] − (2^t P p_j)[u] = 0`.
    pub fn ppt_row(&self, j: usize, u: usize) -> usize {
        self.n + j * self.n + u
    }

    pub fn rows(&self) -> usize {
        self.n + self.k * self.n
    }

    /// Feasible starting basis, listed by row: `p_1 = 1` on the POVM rows
    /// and every slack on the PPT rows.
    pub fn crash_basis(&self) -> Vec<usize> {
        let mut basis: Vec<usize> = (0..self.n).map(|u| self.p(0, u)).collect();
        for j in 0..self.k {
            basis.extend((0..self.n).map(|u| self.slack(j, u)));
        }
        basis
    }
}

/// `min −Σ_j p_j[v_j]` subject to the POVM and PPT constraints. The PPT rows
/// use the integer matrix `2^t P^{⊗t}` (entries ±1). The optimum is `−k·α`.
/// Dual values of the PPT rows are `−q_j / 2^t` for the certificate's `q_j`.
pub fn primal_program(set: &StateSet) -> (LpProblem, PrimalLayout) {
    let t = set.t();
    let oracle = SignOracle::new(t).expect("set has valid t");
    let n = oracle.dimension();
    let k = set.k();
    let layout = PrimalLayout { n, k };
    let mut a = SparseColumns::new(layout.rows(), layout.cols());
    for j in 0..k {
        for w in 0..n {
            let col = layout.p(j, w);
            a.set(w, col, Fraction::one());
            for u in 0..n {
                let e = oracle.unit_entry(u as u32, w as u32);
                a.set(layout.ppt_row(j, u), col, Fraction::from_integer(-e));
            }
        }
        for u in 0..n {
            a.set(layout.ppt_row(j, u), layout.slack(j, u), Fraction::one());
        }
    }
    let mut b = vec![Fraction::zero(); layout.rows()];
    for bi in b.iter_mut().take(n) {
        *bi = Fraction::one();
    }
    let mut c = vec![Fraction::zero(); layout.cols()];
    for (j, v) in set.members().iter().enumerate() {
        c[layout.p(j, v.linear() as usize)] = Fraction::from_integer(-1);
    }
    (LpProblem::new(a, b, c).expect("consistent dimensions"), layout)
}

/// Layout of a primal program that keeps only some PPT rows: `rows[j]` lists
/// the labels `u` whose constraint `(P^{⊗t} p_j)[u] ≥ 0` is present.
#[derive(Debug, Clone)]
pub struct RestrictedLayout {
    pub n: usize,
    pub k: usize,
    pub rows: Vec<Vec<usize>>,
    offsets: Vec<usize>,
}

impl RestrictedLayout {
    pub fn new(n: usize, rows: Vec<Vec<usize>>) -> Self {
        let mut offsets = Vec::with_capacity(rows.len());
        let mut next = 0;
        for r in &rows {
            offsets.push(next);
            next += r.len();
        }
        Self { n, k: rows.len(), rows, offsets }
    }

    pub fn p(&self, j: usize, u: usize) -> usize {
        j * self.n + u
    }

    pub fn ppt_count(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// Constraint row of the `i`-th kept PPT row of member `j`.
    pub fn ppt_row(&self, j: usize, i: usize) -> usize {
        self.n + self.offsets[j] + i
    }

    pub fn slack(&self, j: usize, i: usize) -> usize {
        self.k * self.n + self.offsets[j] + i
    }

    /// `(j, i)` of the slack with offset `index` among all slacks.
    pub fn slack_position(&self, index: usize) -> (usize, usize) {
        let j = self.offsets.partition_point(|&o| o <= index) - 1;
        (j, index - self.offsets[j])
    }

    pub fn crash_basis(&self) -> Vec<usize> {
        let mut basis: Vec<usize> = (0..self.n).map(|u| self.p(0, u)).collect();
        basis.extend((0..self.ppt_count()).map(|i| self.k * self.n + i));
        basis
    }
}

/// [`primal_program`] with only the PPT rows in `rows`. Its optimum bounds
/// the full optimum from above; equality holds once the optimal POVM
/// satisfies every omitted row.
pub fn restricted_primal_program(set: &StateSet, rows: Vec<Vec<usize>>) -> (LpProblem, RestrictedLayout) {
    let oracle = SignOracle::new(set.t()).expect("set has valid t");
    let n = oracle.dimension();
    assert_eq!(rows.len(), set.k(), "one row list per member");
    let layout = RestrictedLayout::new(n, rows);
    let k = layout.k;
    let m = n + layout.ppt_count();
    let mut a = SparseColumns::new(m, k * n + layout.ppt_count());
    for j in 0..k {
        for w in 0..n {
            a.set(w, layout.p(j, w), Fraction::one());
        }
        for (i, &u) in layout.rows[j].iter().enumerate() {
            let row = layout.ppt_row(j, i);
            for w in 0..n {
                a.set(row, layout.p(j, w), Fraction::from_integer(-oracle.unit_entry(u as u32, w as u32)));
            }
            a.set(row, layout.slack(j, i), Fraction::one());
        }
    }
    let mut b = vec![Fraction::zero(); m];
    for bi in b.iter_mut().take(n) {
        *bi = Fraction::one();
    }
    let mut c = vec![Fraction::zero(); a.cols()];
    for (j, v) in set.members().iter().enumerate() {
        c[layout.p(j, v.linear() as usize)] = Fraction::from_integer(-1);
    }
    (LpProblem::new(a, b, c).expect("consistent dimensions"), layout)
}

/// Column layout of the dual standard form.
#[derive(Debug, Clone, Copy)]
pub struct DualLayout {
    pub n: usize,
    pub k: usize,
}

impl DualLayout {
    pub fn alpha(&self, u: usize) -> usize {
        u
    }

    pub fn beta(&self, u: usize) -> usize {
        self.n + u
    }

    pub fn r(&self, j: usize, u: usize) -> usize {
        2 * self.n + j * self.n + u
    }

    pub fn q(&self, j: usize, l: usize) -> usize {
        2 * self.n + self.k * self.n + j * self.n + l
    }

    pub fn row(&self, j: usize, u: usize) -> usize {
        j * self.n + u
    }

    pub fn cols(&self) -> usize {
        2 * self.n + 2 * self.k * self.n
    }

    pub fn rows(&self) -> usize {
        self.k * self.n
    }
}

/// Standard form `A x = b`, `x ≥ 0`, objective `c = [1, −1, 0, 0]`; the
/// program value is `(c·x)/k`. Row `(j,u)` reads
/// `α_u − β_u − r_j[u] − Σ_l P[u,l] q_j[l] = δ_{u,v_j}`.
pub fn dual_program(set: &StateSet) -> (LpProblem, DualLayout) {
    let t = set.t();
    let oracle = SignOracle::new(t).expect("set has valid t");
    let n = oracle.dimension();
    let k = set.k();
    let layout = DualLayout { n, k };
    let one = Fraction::one();
    let minus = Fraction::from_integer(-1);
    let mut a = SparseColumns::new(layout.rows(), layout.cols());
    for j in 0..k {
        for u in 0..n {
            let row = layout.row(j, u);
            a.set(row, layout.alpha(u), one.clone());
            a.set(row, layout.beta(u), minus.clone());
            a.set(row, layout.r(j, u), minus.clone());
            for l in 0..n {
                a.set(row, layout.q(j, l), -oracle.entry(u as u32, l as u32));
            }
        }
    }
    let mut b = vec![Fraction::zero(); layout.rows()];
    for (j, v) in set.members().iter().enumerate() {
        b[layout.row(j, v.linear() as usize)] = one.clone();
    }
    let mut c = vec![Fraction::zero(); layout.cols()];
    for u in 0..n {
        c[layout.alpha(u)] = one.clone();
        c[layout.beta(u)] = minus.clone();
    }
    (LpProblem::new(a, b, c).expect("consistent dimensions"), layout)
}

/// The `β′` bound in diagonal form: `min (1/k) Σ_u y_u` with `y ≥ P^{⊗t}e_{v_j}`
/// for every `j`, encoded as `y⁺ − y⁻ − s_j = P[:, v_j]`. Value is `(c·x)/k`.
pub fn beta_prime_program(set: &StateSet) -> LpProblem {
    let oracle = SignOracle::new(set.t()).expect("set has valid t");
    let n = oracle.dimension();
    let k = set.k();
    let cols = 2 * n + k * n;
    let mut a = SparseColumns::new(k * n, cols);
    let mut b = vec![Fraction::zero(); k * n];
    for (j, v) in set.members().iter().enumerate() {
        for u in 0..n {
            let row = j * n + u;
            a.set(row, u, Fraction::one());
            a.set(row, n + u, Fraction::from_integer(-1));
            a.set(row, 2 * n + j * n + u, Fraction::from_integer(-1));
            b[row] = oracle.entry(u as u32, v.linear());
        }
    }
    let mut c = vec![Fraction::zero(); cols];
    for u in 0..n {
        c[u] = Fraction::one();
        c[n + u] = Fraction::from_integer(-1);
    }
    LpProblem::new(a, b, c).expect("consistent dimensions")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primal_shape() {
        let set = StateSet::parse("00,11,21,31").unwrap();
        let (lp, layout) = primal_program(&set);
        assert_eq!((lp.rows(), lp.cols()), (80, 128));
        assert_eq!(layout.cols(), 128);
        // Each p column: one POVM row plus 16 PPT rows.
        assert_eq!(lp.a.column(layout.p(2, 7)).len(), 17);
        assert_eq!(lp.c.iter().filter(|c| !c.is_zero()).count(), 4);
    }

    #[test]
    fn restricted_slack_positions() {
        let layout = RestrictedLayout::new(16, vec![vec![3, 5], vec![], vec![1], vec![0, 2, 4]]);
        let positions: Vec<_> = (0..layout.ppt_count()).map(|i| layout.slack_position(i)).collect();
        assert_eq!(positions, [(0, 0), (0, 1), (2, 0), (3, 0), (3, 1), (3, 2)]);
        assert_eq!(layout.slack(3, 1), 4 * 16 + 4);
    }

    #[test]
    fn dual_shape_matches_block_layout() {
        let set = StateSet::parse("00,11,21,31").unwrap();
        let (lp, layout) = dual_program(&set);
        assert_eq!((lp.rows(), lp.cols()), (64, 160));
        assert_eq!(lp.a.get(layout.row(1, 3), layout.alpha(3)), Fraction::one());
        assert_eq!(lp.a.get(layout.row(1, 3), layout.beta(3)), Fraction::from_integer(-1));
        assert_eq!(lp.a.get(layout.row(1, 3), layout.r(1, 3)), Fraction::from_integer(-1));
        assert!(lp.a.get(layout.row(1, 3), layout.r(0, 3)).is_zero());
        assert_eq!(lp.a.get(layout.row(0, 0), layout.q(0, 11)), Fraction::new(1, 4));
        assert_eq!(lp.b.iter().filter(|b| b.is_one()).count(), 4);
        assert!(lp.b[layout.row(2, 9)].is_one());
    }
}
