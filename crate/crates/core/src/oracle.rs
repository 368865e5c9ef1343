//! Exact dense matrices over `A ⊗ B` for checking the Bell-basis identities
//! the diagonal LP reduction depends on.
//!
//! Layout: for `t` Bell factors the space is `A ⊗ B` with `A = A_1 ⊗ … ⊗ A_t`
//! and `B = B_1 ⊗ … ⊗ B_t`. Basis index is `a·2^t + b`, where `a` packs the
//! per-factor bits `a_1 … a_t` with `a_1` most significant (same for `b`).
//! A single Bell ket lives on `A_d ⊗ B_d` with index `2·a_d + b_d`.

use std::fmt;

use exact_lp::Fraction;
use serde::Serialize;

use crate::lattice::{dimension, LatticeIndex, SignOracle};

/// Largest `t` for which dense objects are built.
pub const MAX_DENSE_T: u32 = 3;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("Bell index {0} is not in 0..=3")]
    BellIndex(usize),
    #[error("dense work needs 1 <= t <= {MAX_DENSE_T}, got {0}")]
    TooLarge(u32),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: String, got: String },
}

/// Dense matrix of exact fractions, row-major.
#[derive(Clone, PartialEq, Eq)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Fraction>,
}

impl RationalMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "empty matrix");
        Self {
            rows,
            cols,
            entries: vec![Fraction::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Fraction::one());
        }
        m
    }

    /// `E_{ij}` of size `n × n`.
    pub fn unit(n: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(n, n);
        m.set(i, j, Fraction::one());
        m
    }

    pub fn from_rows(rows: Vec<Vec<Fraction>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        let mut m = Self::zeros(r, c);
        m.entries = rows.into_iter().flatten().collect();
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Fraction {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Fraction) {
        self.entries[i * self.cols + j] = v;
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn trace(&self) -> Fraction {
        assert!(self.is_square());
        (0..self.rows).map(|i| self.get(i, i).clone()).sum()
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).clone());
            }
        }
        out
    }

    /// Real symmetric (the only Hermitian matrices that occur here).
    pub fn is_hermitian(&self) -> bool {
        self.is_square() && *self == self.transpose()
    }

    pub fn scale(&self, s: &Fraction) -> Self {
        let mut out = self.clone();
        for e in &mut out.entries {
            *e = &*e * s;
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (a, b) in out.entries.iter_mut().zip(&other.entries) {
            *a += b;
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&Fraction::from_integer(-1)))
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self.get(i, l);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(l, j);
                    if !b.is_zero() {
                        out.entries[i * other.cols + j] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Fraction::is_zero)
    }

    /// Row-reduces in place; returns the pivot columns.
    fn reduce(&mut self, stop_at: usize) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..stop_at {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| !self.get(i, c).is_zero()) else {
                continue;
            };
            for j in 0..self.cols {
                self.entries.swap(r * self.cols + j, p * self.cols + j);
            }
            let inv = self.get(r, c).recip();
            for j in 0..self.cols {
                let v = self.get(r, j) * &inv;
                self.set(r, j, v);
            }
            let pivot_row: Vec<(usize, Fraction)> =
                (0..self.cols).filter(|&j| !self.get(r, j).is_zero()).map(|j| (j, self.get(r, j).clone())).collect();
            for i in 0..self.rows {
                if i == r || self.get(i, c).is_zero() {
                    continue;
                }
                let f = self.get(i, c).clone();
                for (j, v) in &pivot_row {
                    let e = self.get(i, *j) - &f * v;
                    self.set(i, *j, e);
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        let mut work = self.clone();
        work.reduce(self.cols).len()
    }

    /// Exact inverse by Gauss-Jordan elimination; `None` if singular.
    pub fn inverse(&self) -> Option<Self> {
        if !self.is_square() {
            return None;
        }
        let n = self.rows;
        let mut aug = Self::zeros(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug.set(i, j, self.get(i, j).clone());
            }
            aug.set(i, n + i, Fraction::one());
        }
        if aug.reduce(n).len() < n {
            return None;
        }
        let mut out = Self::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                out.set(i, j, aug.get(i, n + j).clone());
            }
        }
        Some(out)
    }
}

impl fmt::Debug for RationalMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "RationalMatrix {}x{}", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self.get(i, j).to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// Real ket with amplitudes `entries[i] / √2^{sqrt2_power}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KetVector {
    pub entries: Vec<Fraction>,
    pub sqrt2_power: u32,
}

impl KetVector {
    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    /// `‖ψ‖²`, exact.
    pub fn norm_squared(&self) -> Fraction {
        let s: Fraction = self.entries.iter().map(|e| e * e).sum();
        s * Fraction::pow2_recip(self.sqrt2_power)
    }

    /// `⟨self|other⟩`, available when the combined √2 power is even.
    pub fn inner(&self, other: &Self) -> Option<Fraction> {
        assert_eq!(self.dim(), other.dim());
        let p = self.sqrt2_power + other.sqrt2_power;
        if p % 2 == 1 {
            return None;
        }
        let dot: Fraction = self.entries.iter().zip(&other.entries).map(|(a, b)| a * b).sum();
        Some(dot * Fraction::pow2_recip(p / 2))
    }

    /// `|ψ⟩⟨ψ|`; rational because the √2 power is squared.
    pub fn density(&self) -> RationalMatrix {
        let n = self.dim();
        let scale = Fraction::pow2_recip(self.sqrt2_power);
        let mut m = RationalMatrix::zeros(n, n);
        for i in 0..n {
            if self.entries[i].is_zero() {
                continue;
            }
            for j in 0..n {
                if !self.entries[j].is_zero() {
                    m.set(i, j, &self.entries[i] * &self.entries[j] * &scale);
                }
            }
        }
        m
    }

    /// `⟨ψ|M|ψ⟩`.
    pub fn expectation(&self, m: &RationalMatrix) -> Fraction {
        let n = self.dim();
        assert_eq!((m.rows(), m.cols()), (n, n));
        let mut acc = Fraction::zero();
        for i in 0..n {
            if self.entries[i].is_zero() {
                continue;
            }
            let row: Fraction = (0..n)
                .filter(|&j| !self.entries[j].is_zero())
                .map(|j| m.get(i, j) * &self.entries[j])
                .sum();
            acc += &self.entries[i] * row;
        }
        acc * Fraction::pow2_recip(self.sqrt2_power)
    }
}

const BELL: [[i64; 4]; 4] = [[1, 0, 0, 1], [0, 1, 1, 0], [0, 1, -1, 0], [1, 0, 0, -1]];

/// Bell ket `ψ_i` on `C^2 ⊗ C^2`: `ψ_0 = (|00⟩+|11⟩)/√2`,
/// `ψ_1 = (|01⟩+|10⟩)/√2`, `ψ_2 = (|01⟩−|10⟩)/√2`, `ψ_3 = (|00⟩−|11⟩)/√2`.
pub fn bell_ket(i: usize) -> Result<KetVector, OracleError> {
    let row = BELL.get(i).ok_or(OracleError::BellIndex(i))?;
    Ok(KetVector {
        entries: row.iter().map(|&v| Fraction::from_integer(v)).collect(),
        sqrt2_power: 1,
    })
}

fn check_dense_t(t: u32) -> Result<(), OracleError> {
    if (1..=MAX_DENSE_T).contains(&t) {
        Ok(())
    } else {
        Err(OracleError::TooLarge(t))
    }
}

/// `χ_v = ψ_{v_1} ⊗ … ⊗ ψ_{v_t}` laid out on `A ⊗ B`.
pub fn lattice_ket(v: &LatticeIndex) -> Result<KetVector, OracleError> {
    let t = v.t();
    check_dense_t(t)?;
    let side = 1usize << t;
    let digits = v.digits();
    let mut entries = Vec::with_capacity(side * side);
    for a in 0..side {
        for b in 0..side {
            let amp: i64 = (0..t as usize)
                .map(|d| {
                    let shift = t as usize - 1 - d;
                    let ad = (a >> shift) & 1;
                    let bd = (b >> shift) & 1;
                    BELL[digits[d] as usize][2 * ad + bd]
                })
                .product();
            entries.push(Fraction::from_integer(amp));
        }
    }
    Ok(KetVector { entries, sqrt2_power: t })
}

fn lattice_kets(t: u32) -> Result<Vec<KetVector>, OracleError> {
    (0..dimension(t) as u32)
        .map(|l| lattice_ket(&LatticeIndex::from_linear(t, l).expect("in range")))
        .collect()
}

/// `(T ⊗ I_B)(M)`: `M[(a,b),(a',b')] ↦ M[(a',b),(a,b')]`.
pub fn partial_transpose(m: &RationalMatrix, dim_a: usize, dim_b: usize) -> Result<RationalMatrix, OracleError> {
    let n = dim_a * dim_b;
    if !m.is_square() || m.rows() != n {
        return Err(OracleError::Dimension {
            expected: format!("{n}x{n}"),
            got: format!("{}x{}", m.rows(), m.cols()),
        });
    }
    let mut out = RationalMatrix::zeros(n, n);
    for a in 0..dim_a {
        for b in 0..dim_b {
            for a2 in 0..dim_a {
                for b2 in 0..dim_b {
                    let v = m.get(a * dim_b + b, a2 * dim_b + b2);
                    if !v.is_zero() {
                        out.set(a2 * dim_b + b, a * dim_b + b2, v.clone());
                    }
                }
            }
        }
    }
    Ok(out)
}

/// `Tr_B(M)`.
pub fn partial_trace_b(m: &RationalMatrix, dim_a: usize, dim_b: usize) -> Result<RationalMatrix, OracleError> {
    let n = dim_a * dim_b;
    if !m.is_square() || m.rows() != n {
        return Err(OracleError::Dimension {
            expected: format!("{n}x{n}"),
            got: format!("{}x{}", m.rows(), m.cols()),
        });
    }
    let mut out = RationalMatrix::zeros(dim_a, dim_a);
    for a in 0..dim_a {
        for a2 in 0..dim_a {
            let s: Fraction = (0..dim_b).map(|b| m.get(a * dim_b + b, a2 * dim_b + b).clone()).sum();
            out.set(a, a2, s);
        }
    }
    Ok(out)
}

fn check_lattice_dims(m: &RationalMatrix, t: u32) -> Result<(), OracleError> {
    let n = dimension(t);
    if !m.is_square() || m.rows() != n {
        return Err(OracleError::Dimension {
            expected: format!("{n}x{n}"),
            got: format!("{}x{}", m.rows(), m.cols()),
        });
    }
    Ok(())
}

/// Lattice-basis dephasing `Φ(M) = Σ_v ⟨χ_v|M|χ_v⟩ |χ_v⟩⟨χ_v|`.
pub fn dephase(m: &RationalMatrix, t: u32) -> Result<RationalMatrix, OracleError> {
    check_dense_t(t)?;
    check_lattice_dims(m, t)?;
    dephase_with(m, &lattice_kets(t)?)
}

fn dephase_with(m: &RationalMatrix, kets: &[KetVector]) -> Result<RationalMatrix, OracleError> {
    let n = m.rows();
    let mut out = RationalMatrix::zeros(n, n);
    for ket in kets {
        let w = ket.expectation(m);
        if !w.is_zero() {
            out = out.add(&ket.density().scale(&w));
        }
    }
    Ok(out)
}

/// Outcome of one group of identities.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IdentityGroup {
    pub name: String,
    pub checked: usize,
    /// Human-readable labels of every failing instance.
    pub failures: Vec<String>,
}

impl IdentityGroup {
    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.checked > 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReductionReport {
    pub t: u32,
    pub groups: Vec<IdentityGroup>,
}

impl ReductionReport {
    pub fn passed(&self) -> bool {
        self.groups.iter().all(IdentityGroup::passed)
    }
}

/// Checks `T_A(ψ_i) = ½I − ψ_{i⊕2}`, `T_A(χ_v) = Σ_u P^{⊗t}[u,v] χ_u` for all
/// `v`, and `Φ∘T_A = T_A∘Φ` on every matrix unit.
pub fn verify_reduction(t: u32) -> Result<ReductionReport, OracleError> {
    check_dense_t(t)?;
    let half_identity = RationalMatrix::identity(4).scale(&Fraction::new(1, 2));
    let mut bell = IdentityGroup {
        name: "bell-partial-transpose".into(),
        checked: 0,
        failures: Vec::new(),
    };
    for i in 0..4 {
        let lhs = partial_transpose(&bell_ket(i)?.density(), 2, 2)?;
        let rhs = half_identity.sub(&bell_ket(i ^ 2)?.density());
        bell.checked += 1;
        if lhs != rhs {
            bell.failures.push(format!("psi{i}"));
        }
    }

    let n = dimension(t);
    let side = 1usize << t;
    let oracle = SignOracle::new(t).expect("t validated");
    let kets = lattice_kets(t)?;
    let densities: Vec<RationalMatrix> = kets.iter().map(KetVector::density).collect();

    let mut transition = IdentityGroup {
        name: "transition-matrix".into(),
        checked: 0,
        failures: Vec::new(),
    };
    for (v, rho) in densities.iter().enumerate() {
        let lhs = partial_transpose(rho, side, side)?;
        let mut rhs = RationalMatrix::zeros(n, n);
        for (u, rho_u) in densities.iter().enumerate() {
            rhs = rhs.add(&rho_u.scale(&oracle.entry(u as u32, v as u32)));
        }
        transition.checked += 1;
        if lhs != rhs {
            transition
                .failures
                .push(LatticeIndex::from_linear(t, v as u32).expect("in range").to_string());
        }
    }

    let mut commute = IdentityGroup {
        name: "dephase-commutes-with-partial-transpose".into(),
        checked: 0,
        failures: Vec::new(),
    };
    for i in 0..n {
        for j in 0..n {
            let e = RationalMatrix::unit(n, i, j);
            let lhs = dephase_with(&partial_transpose(&e, side, side)?, &kets)?;
            let rhs = partial_transpose(&dephase_with(&e, &kets)?, side, side)?;
            commute.checked += 1;
            if lhs != rhs {
                commute.failures.push(format!("E({i},{j})"));
            }
        }
    }

    Ok(ReductionReport {
        t,
        groups: vec![bell, transition, commute],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f(n: i64) -> Fraction {
        Fraction::from_integer(n)
    }

    #[test]
    fn bell_kets_orthonormal() {
        assert_eq!(bell_ket(0).unwrap().entries, vec![f(1), f(0), f(0), f(1)]);
        assert_eq!(bell_ket(3).unwrap().entries, vec![f(1), f(0), f(0), f(-1)]);
        assert!(bell_ket(4).is_err());
        for i in 0..4 {
            for j in 0..4 {
                let ip = bell_ket(i).unwrap().inner(&bell_ket(j).unwrap()).unwrap();
                assert_eq!(ip, if i == j { f(1) } else { f(0) });
            }
        }
    }

    #[test]
    fn lattice_kets_form_orthonormal_basis() {
        let v0 = LatticeIndex::from_linear(1, 0).unwrap();
        assert_eq!(lattice_ket(&v0).unwrap(), bell_ket(0).unwrap());
        let kets = lattice_kets(2).unwrap();
        for (i, a) in kets.iter().enumerate() {
            assert_eq!(a.norm_squared(), f(1));
            for (j, b) in kets.iter().enumerate() {
                assert_eq!(a.inner(b).unwrap(), if i == j { f(1) } else { f(0) });
            }
        }
        let rho = kets[0].density();
        assert_eq!(
            partial_trace_b(&rho, 4, 4).unwrap(),
            RationalMatrix::identity(4).scale(&Fraction::new(1, 4))
        );
        assert!(lattice_ket(&LatticeIndex::from_linear(4, 0).unwrap()).is_err());
    }

    #[test]
    fn partial_transpose_matrix_unit() {
        // |0⟩⟨1| ⊗ |0⟩⟨1| on 2×2 → |1⟩⟨0| ⊗ |0⟩⟨1|.
        let e = RationalMatrix::unit(4, 0, 3);
        assert_eq!(partial_transpose(&e, 2, 2).unwrap(), RationalMatrix::unit(4, 2, 1));
        assert!(partial_transpose(&RationalMatrix::zeros(3, 3), 2, 2).is_err());
    }

    #[test]
    fn inverse_and_rank() {
        let m = RationalMatrix::from_rows(vec![vec![f(2), f(1)], vec![f(1), f(1)]]);
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv), RationalMatrix::identity(2));
        let singular = RationalMatrix::from_rows(vec![vec![f(1), f(2)], vec![f(2), f(4)]]);
        assert!(singular.inverse().is_none());
        assert_eq!(singular.rank(), 1);
        assert_eq!(RationalMatrix::identity(5).rank(), 5);
    }

    #[test]
    fn bell_partial_transpose_identity() {
        let lhs = partial_transpose(&bell_ket(0).unwrap().density(), 2, 2).unwrap();
        let rhs = RationalMatrix::identity(4)
            .scale(&Fraction::new(1, 2))
            .sub(&bell_ket(2).unwrap().density());
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn dephase_fixed_points() {
        let kets = lattice_kets(2).unwrap();
        for k in kets.iter().step_by(5) {
            assert_eq!(dephase(&k.density(), 2).unwrap(), k.density());
        }
        assert_eq!(dephase(&RationalMatrix::identity(16), 2).unwrap(), RationalMatrix::identity(16));
        assert!(dephase(&RationalMatrix::identity(8), 2).is_err());
    }

    #[test]
    fn reduction_holds_t1_t2() {
        for t in 1..=2 {
            let report = verify_reduction(t).unwrap();
            assert!(report.passed(), "{report:?}");
            assert_eq!(report.groups[1].checked, dimension(t));
            assert_eq!(report.groups[2].checked, dimension(t) * dimension(t));
        }
    }

    #[test]
    fn transition_expansion_column_23() {
        let v = LatticeIndex::from_digits(&[2, 3]).unwrap();
        let kets = lattice_kets(2).unwrap();
        let pt = partial_transpose(&lattice_ket(&v).unwrap().density(), 4, 4).unwrap();
        let oracle = SignOracle::new(2).unwrap();
        for (u, k) in kets.iter().enumerate() {
            assert_eq!(k.expectation(&pt), oracle.entry(u as u32, v.linear()));
        }
    }

    fn small_matrix(n: usize) -> impl Strategy<Value = RationalMatrix> {
        proptest::collection::vec((-9i64..10, 1i64..5), n * n).prop_map(move |vals| {
            let rows = vals
                .chunks(n)
                .map(|r| r.iter().map(|&(p, q)| Fraction::new(p, q)).collect())
                .collect();
            RationalMatrix::from_rows(rows)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn partial_transpose_involution_and_trace(m in small_matrix(16)) {
            let pt = partial_transpose(&m, 4, 4).unwrap();
            prop_assert_eq!(partial_transpose(&pt, 4, 4).unwrap(), m.clone());
            prop_assert_eq!(pt.trace(), m.trace());
            let sym = m.add(&m.transpose());
            prop_assert!(partial_transpose(&sym, 4, 4).unwrap().is_hermitian());
        }

        #[test]
        fn dephase_preserves_trace(m in small_matrix(16)) {
            prop_assert_eq!(dephase(&m, 2).unwrap().trace(), m.trace());
        }
    }
}
