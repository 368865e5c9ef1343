//! Lattice-state labels and the sign structure of the partial-transpose
//! transition matrix `P^{⊗t}`.
//!
//! A lattice state is labelled by `t` quaternary digits, leftmost digit =
//! first tensor factor = most significant. Entry `(v, w)` of `P^{⊗t}` is
//! `±2^{-t}`, negative exactly when an odd number of digit positions satisfy
//! `w_d = v_d ⊕ 2`.

use std::fmt;
use std::str::FromStr;

use exact_lp::Fraction;
use serde::{Deserialize, Serialize};

/// Largest number of Bell factors supported (families are `4^t`-bit masks).
pub const MAX_T: u32 = 8;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LatticeError {
    #[error("empty digit sequence")]
    EmptyIndex,
    #[error("digit {0} is not in 0..=3")]
    BadDigit(char),
    #[error("t = {0} is outside 1..={MAX_T}")]
    UnsupportedT(u32),
    #[error("linear index {linear} out of range for t = {t}")]
    LinearOutOfRange { t: u32, linear: u32 },
    #[error("mismatched lengths: {0} vs {1}")]
    MixedLengths(u32, u32),
    #[error("duplicate member {0}")]
    Duplicate(String),
    #[error("empty state set")]
    EmptySet,
    #[error("invalid factor permutation {0:?}")]
    BadPermutation(Vec<usize>),
}

fn check_t(t: u32) -> Result<(), LatticeError> {
    if (1..=MAX_T).contains(&t) {
        Ok(())
    } else {
        Err(LatticeError::UnsupportedT(t))
    }
}

/// `4^t`.
pub fn dimension(t: u32) -> usize {
    1usize << (2 * t)
}

/// A lattice-state label: `t` base-4 digits packed into `linear`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LatticeIndex {
    t: u32,
    linear: u32,
}

impl LatticeIndex {
    pub fn from_digits(digits: &[u8]) -> Result<Self, LatticeError> {
        if digits.is_empty() {
            return Err(LatticeError::EmptyIndex);
        }
        let t = digits.len() as u32;
        check_t(t)?;
        let mut linear = 0u32;
        for &d in digits {
            if d > 3 {
                return Err(LatticeError::BadDigit(char::from(b'0'.saturating_add(d))));
            }
            linear = linear * 4 + d as u32;
        }
        Ok(Self { t, linear })
    }

    pub fn from_linear(t: u32, linear: u32) -> Result<Self, LatticeError> {
        check_t(t)?;
        if linear as usize >= dimension(t) {
            return Err(LatticeError::LinearOutOfRange { t, linear });
        }
        Ok(Self { t, linear })
    }

    pub fn t(&self) -> u32 {
        self.t
    }

    pub fn linear(&self) -> u32 {
        self.linear
    }

    pub fn digits(&self) -> Vec<u8> {
        (0..self.t).map(|d| self.digit(d as usize)).collect()
    }

    /// Digit at position `d` (0 = leftmost).
    pub fn digit(&self, d: usize) -> u8 {
        ((self.linear >> (2 * (self.t as usize - 1 - d))) & 3) as u8
    }

    /// Digit-wise XOR (the translation action on labels).
    pub fn xor(&self, other: &Self) -> Self {
        assert_eq!(self.t, other.t, "mismatched t");
        Self {
            t: self.t,
            linear: self.linear ^ other.linear,
        }
    }

    /// Moves digit `perm[d]` of `self` to position `d`.
    pub fn permute_factors(&self, perm: &[usize]) -> Self {
        let digits = self.digits();
        let permuted: Vec<u8> = perm.iter().map(|&p| digits[p]).collect();
        Self::from_digits(&permuted).expect("permutation preserves validity")
    }
}

impl fmt::Display for LatticeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in self.digits() {
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

impl FromStr for LatticeIndex {
    type Err = LatticeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let digits = s
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| match c {
                '0'..='3' => Ok(c as u8 - b'0'),
                _ => Err(LatticeError::BadDigit(c)),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_digits(&digits)
    }
}

/// Parity rule on the XOR of two labels: `true` when the entry is negative.
#[inline]
pub fn negative_for_xor(t: u32, x: u32) -> bool {
    // A digit equals 2 (binary 10) iff its high bit is set and low bit clear.
    let hi_mask = (0..t).fold(0u32, |m, d| m | (2 << (2 * d)));
    let hits = x & hi_mask & !(x << 1);
    hits.count_ones() % 2 == 1
}

/// Sign of a `P^{⊗t}` entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn is_minus(self) -> bool {
        self == Sign::Minus
    }
}

/// Implicit `P^{⊗t}`: signs from the parity rule, magnitude `2^{-t}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SignOracle {
    t: u32,
}

impl SignOracle {
    pub fn new(t: u32) -> Result<Self, LatticeError> {
        check_t(t)?;
        Ok(Self { t })
    }

    pub fn t(&self) -> u32 {
        self.t
    }

    pub fn dimension(&self) -> usize {
        dimension(self.t)
    }

    /// The 4×4 single-factor matrix `P` (entries ±1/2).
    pub fn base_matrix() -> [[Fraction; 4]; 4] {
        let h = Fraction::new(1, 2);
        let m = Fraction::new(-1, 2);
        [
            [h.clone(), h.clone(), m.clone(), h.clone()],
            [h.clone(), h.clone(), h.clone(), m.clone()],
            [m.clone(), h.clone(), h.clone(), h.clone()],
            [h.clone(), m, h.clone(), h],
        ]
    }

    pub fn sign(&self, v: &LatticeIndex, w: &LatticeIndex) -> Result<Sign, LatticeError> {
        if v.t != self.t || w.t != self.t {
            return Err(LatticeError::MixedLengths(v.t, w.t));
        }
        Ok(self.sign_linear(v.linear, w.linear))
    }

    #[inline]
    pub fn sign_linear(&self, v: u32, w: u32) -> Sign {
        if negative_for_xor(self.t, v ^ w) {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }

    /// Exact entry `P^{⊗t}[v, w]`.
    pub fn entry(&self, v: u32, w: u32) -> Fraction {
        let mag = Fraction::pow2_recip(self.t);
        match self.sign_linear(v, w) {
            Sign::Plus => mag,
            Sign::Minus => -mag,
        }
    }

    /// Entry scaled by `2^t`, i.e. `±1`.
    #[inline]
    pub fn unit_entry(&self, v: u32, w: u32) -> i64 {
        self.sign_linear(v, w).as_i8() as i64
    }

    pub fn family(&self, column: &LatticeIndex) -> ColumnFamily {
        assert_eq!(column.t, self.t, "mismatched t");
        let mut rows = RowMask::new(self.dimension());
        for v in 0..self.dimension() as u32 {
            if self.sign_linear(v, column.linear) == Sign::Minus {
                rows.insert(v as usize);
            }
        }
        ColumnFamily {
            column: *column,
            cardinality: rows.count(),
            rows,
        }
    }

    /// `(4^t − 2^t) / 2`, the number of negative entries in every column.
    pub fn family_cardinality(&self) -> usize {
        (dimension(self.t) - (1usize << self.t)) / 2
    }
}

/// Explicit `P^{⊗t}` built by repeated Kronecker products of the 4×4 base
/// matrix. Validation only; refuses `t > 3`.
pub fn kronecker_power(t: u32) -> Result<Vec<Vec<Fraction>>, LatticeError> {
    if !(1..=3).contains(&t) {
        return Err(LatticeError::UnsupportedT(t));
    }
    let base = SignOracle::base_matrix();
    let mut m: Vec<Vec<Fraction>> = vec![vec![Fraction::one()]];
    for _ in 0..t {
        let n = m.len();
        let mut next = vec![vec![Fraction::zero(); n * 4]; n * 4];
        for (i, row) in m.iter().enumerate() {
            for (j, a) in row.iter().enumerate() {
                for (bi, brow) in base.iter().enumerate() {
                    for (bj, b) in brow.iter().enumerate() {
                        next[i * 4 + bi][j * 4 + bj] = a * b;
                    }
                }
            }
        }
        m = next;
    }
    Ok(m)
}

/// Packed bit-vector over the `4^t` lattice labels.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RowMask {
    len: usize,
    words: Vec<u64>,
}

impl RowMask {
    pub fn new(len: usize) -> Self {
        Self {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn full(len: usize) -> Self {
        let mut m = Self::new(len);
        for i in 0..len {
            m.insert(i);
        }
        m
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    pub fn insert(&mut self, i: usize) {
        assert!(i < self.len);
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn contains(&self, i: usize) -> bool {
        i < self.len && self.words[i / 64] & (1 << (i % 64)) != 0
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn intersect_with(&mut self, other: &Self) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
    }

    pub fn intersection(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.intersect_with(other);
        out
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let bit = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + bit)
            })
        })
    }
}

impl fmt::Debug for RowMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// Rows with a negative entry in a given column of `P^{⊗t}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnFamily {
    pub column: LatticeIndex,
    pub rows: RowMask,
    pub cardinality: usize,
}

impl ColumnFamily {
    pub fn members(&self) -> Vec<LatticeIndex> {
        self.rows
            .iter()
            .map(|v| LatticeIndex::from_linear(self.column.t, v as u32).expect("in range"))
            .collect()
    }
}

/// A set of distinct lattice labels sharing one `t`, kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateSet {
    t: u32,
    members: Vec<LatticeIndex>,
}

impl StateSet {
    pub fn new(t: u32, mut members: Vec<LatticeIndex>) -> Result<Self, LatticeError> {
        check_t(t)?;
        if members.is_empty() {
            return Err(LatticeError::EmptySet);
        }
        if let Some(m) = members.iter().find(|m| m.t != t) {
            return Err(LatticeError::MixedLengths(t, m.t));
        }
        members.sort();
        if let Some(w) = members.windows(2).find(|w| w[0] == w[1]) {
            return Err(LatticeError::Duplicate(w[0].to_string()));
        }
        Ok(Self { t, members })
    }

    pub fn from_linear(t: u32, linear: &[u32]) -> Result<Self, LatticeError> {
        let members = linear
            .iter()
            .map(|&l| LatticeIndex::from_linear(t, l))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(t, members)
    }

    pub fn parse(text: &str) -> Result<Self, LatticeError> {
        let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(LatticeError::EmptySet);
        }
        let members = compact
            .split(',')
            .map(LatticeIndex::from_str)
            .collect::<Result<Vec<_>, _>>()?;
        let t = members[0].t;
        if let Some(m) = members.iter().find(|m| m.t != t) {
            return Err(LatticeError::MixedLengths(t, m.t));
        }
        Self::new(t, members)
    }

    pub fn t(&self) -> u32 {
        self.t
    }

    pub fn k(&self) -> usize {
        self.members.len()
    }

    pub fn members(&self) -> &[LatticeIndex] {
        &self.members
    }

    pub fn linear(&self) -> Vec<u32> {
        self.members.iter().map(LatticeIndex::linear).collect()
    }

    pub fn contains(&self, v: &LatticeIndex) -> bool {
        self.members.binary_search(v).is_ok()
    }

    pub fn is_subset_of(&self, other: &StateSet) -> bool {
        self.t == other.t && self.members.iter().all(|m| other.contains(m))
    }

    /// `{ v ⊕ z : v ∈ self }`.
    pub fn translate(&self, z: &LatticeIndex) -> StateSet {
        StateSet::new(self.t, self.members.iter().map(|m| m.xor(z)).collect())
            .expect("translation is a bijection")
    }

    pub fn permute_factors(&self, perm: &[usize]) -> Result<StateSet, LatticeError> {
        let mut seen = vec![false; self.t as usize];
        if perm.len() != self.t as usize || !perm.iter().all(|&p| p < seen.len() && !std::mem::replace(&mut seen[p], true)) {
            return Err(LatticeError::BadPermutation(perm.to_vec()));
        }
        StateSet::new(self.t, self.members.iter().map(|m| m.permute_factors(perm)).collect())
    }

    pub fn as_mask(&self) -> RowMask {
        let mut m = RowMask::new(dimension(self.t));
        for v in &self.members {
            m.insert(v.linear as usize);
        }
        m
    }
}

impl fmt::Display for StateSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, m) in self.members.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{m}")?;
        }
        Ok(())
    }
}

impl FromStr for StateSet {
    type Err = LatticeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

impl Serialize for StateSet {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for StateSet {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Self::parse(&s).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn idx(s: &str) -> LatticeIndex {
        s.parse().unwrap()
    }

    #[test]
    fn digits_to_linear() {
        assert_eq!(LatticeIndex::from_digits(&[0, 0]).unwrap().linear(), 0);
        assert_eq!(LatticeIndex::from_digits(&[2, 3]).unwrap().linear(), 11);
        assert_eq!(LatticeIndex::from_digits(&[3, 1]).unwrap().linear(), 13);
        assert_eq!(LatticeIndex::from_digits(&[]), Err(LatticeError::EmptyIndex));
        assert!(matches!(LatticeIndex::from_digits(&[4]), Err(LatticeError::BadDigit(_))));
        assert_eq!(idx("231").to_string(), "231");
    }

    #[test]
    fn reference_signs() {
        let o = SignOracle::new(2).unwrap();
        assert_eq!(o.sign(&idx("00"), &idx("00")).unwrap(), Sign::Plus);
        assert_eq!(o.sign(&idx("00"), &idx("23")).unwrap(), Sign::Minus);
        assert_eq!(o.sign(&idx("11"), &idx("23")).unwrap(), Sign::Minus);
        assert!(o.sign(&idx("0"), &idx("23")).is_err());
    }

    #[test]
    fn base_matrix_negative_pattern() {
        let p = SignOracle::base_matrix();
        let negatives: Vec<(usize, usize)> = (0..4)
            .flat_map(|i| (0..4).map(move |j| (i, j)))
            .filter(|&(i, j)| p[i][j].is_negative())
            .collect();
        assert_eq!(negatives, vec![(0, 2), (1, 3), (2, 0), (3, 1)]);
        assert!(p.iter().flatten().all(|e| e.abs() == Fraction::new(1, 2)));
    }

    #[test]
    fn oracle_matches_explicit_kronecker_powers() {
        for t in 1..=3 {
            let o = SignOracle::new(t).unwrap();
            let dense = kronecker_power(t).unwrap();
            for (v, row) in dense.iter().enumerate() {
                for (w, e) in row.iter().enumerate() {
                    assert_eq!(*e, o.entry(v as u32, w as u32), "t={t} ({v},{w})");
                }
            }
        }
        assert!(kronecker_power(4).is_err());
    }

    #[test]
    fn families_match_reference_sets() {
        let o = SignOracle::new(2).unwrap();
        let fam = |c: &str| {
            o.family(&idx(c))
                .members()
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(",")
        };
        assert_eq!(fam("00"), "02,12,20,21,23,32");
        assert_eq!(fam("23"), "00,02,03,11,21,31");
        for t in 2..=4 {
            let o = SignOracle::new(t).unwrap();
            let expected = [0, 0, 6, 28, 120][t as usize];
            assert_eq!(o.family_cardinality(), expected);
            for c in [0u32, 5, (dimension(t) - 1) as u32] {
                assert_eq!(o.family(&LatticeIndex::from_linear(t, c).unwrap()).cardinality, expected);
            }
        }
    }

    #[test]
    fn row_sums_and_translation_exhaustive_small_t() {
        for t in 1..=3 {
            let o = SignOracle::new(t).unwrap();
            let n = dimension(t) as u32;
            let fam0 = o.family(&LatticeIndex::from_linear(t, 0).unwrap());
            for v in 0..n {
                let net: i64 = (0..n).map(|w| o.unit_entry(v, w)).sum();
                assert_eq!(net, 1 << t);
                let fam = o.family(&LatticeIndex::from_linear(t, v).unwrap());
                let translated: Vec<usize> = {
                    let mut x: Vec<usize> = fam0.rows.iter().map(|u| u ^ v as usize).collect();
                    x.sort();
                    x
                };
                assert_eq!(fam.rows.iter().collect::<Vec<_>>(), translated);
                for w in 0..n {
                    assert_eq!(o.sign_linear(v, w), o.sign_linear(w, v));
                    for z in 0..n {
                        assert_eq!(o.sign_linear(v ^ z, w ^ z), o.sign_linear(v, w));
                    }
                }
            }
        }
    }

    #[test]
    fn parse_and_format_sets() {
        let s = StateSet::parse("00,11,21,31").unwrap();
        assert_eq!((s.t(), s.k()), (2, 4));
        assert_eq!(s.linear(), vec![0, 5, 9, 13]);
        assert_eq!(s.to_string(), "00,11,21,31");
        assert_eq!(StateSet::parse(" 31, 00 ,11,21").unwrap(), s);
        assert_eq!(StateSet::parse("02").unwrap().k(), 1);
        assert!(matches!(StateSet::parse("00,00"), Err(LatticeError::Duplicate(_))));
        assert!(matches!(StateSet::parse("00,1"), Err(LatticeError::MixedLengths(2, 1))));
        assert!(matches!(StateSet::parse("04"), Err(LatticeError::BadDigit('4'))));
        assert_eq!(StateSet::parse(""), Err(LatticeError::EmptySet));
        assert!(StateSet::parse("00,,11").is_err());
    }

    #[test]
    fn set_permutation_validation() {
        let s = StateSet::parse("012,123").unwrap();
        assert_eq!(s.permute_factors(&[2, 0, 1]).unwrap().to_string(), "201,312");
        assert!(s.permute_factors(&[0, 0, 1]).is_err());
        assert!(s.permute_factors(&[0, 1]).is_err());
    }

    #[test]
    fn row_mask_ops() {
        let mut a = RowMask::new(130);
        for i in [0, 63, 64, 129] {
            a.insert(i);
        }
        let mut b = RowMask::new(130);
        b.insert(64);
        b.insert(129);
        b.insert(5);
        assert_eq!(a.count(), 4);
        assert_eq!(a.intersection(&b).iter().collect::<Vec<_>>(), vec![64, 129]);
        assert!(!a.contains(5) && a.contains(63) && !a.contains(500));
        assert_eq!(RowMask::full(70).count(), 70);
    }

    proptest! {
        #[test]
        fn t4_sampled_invariants(v in 0u32..256, w in 0u32..256, z in 0u32..256, perm in Just(vec![0usize, 1, 2, 3]).prop_shuffle()) {
            let o = SignOracle::new(4).unwrap();
            prop_assert_eq!(o.sign_linear(v ^ z, w ^ z), o.sign_linear(v, w));
            prop_assert_eq!(o.sign_linear(v, w), o.sign_linear(w, v));
            let vi = LatticeIndex::from_linear(4, v).unwrap();
            let wi = LatticeIndex::from_linear(4, w).unwrap();
            prop_assert_eq!(
                o.sign(&vi.permute_factors(&perm), &wi.permute_factors(&perm)).unwrap(),
                o.sign(&vi, &wi).unwrap()
            );
            // Product of per-factor signs of the base matrix.
            let base = SignOracle::base_matrix();
            let neg = (0..4).filter(|&d| base[vi.digit(d) as usize][wi.digit(d) as usize].is_negative()).count();
            prop_assert_eq!(o.sign_linear(v, w) == Sign::Minus, neg % 2 == 1);
        }

        #[test]
        fn digits_linear_roundtrip(digits in proptest::collection::vec(0u8..4, 1..=8)) {
            let i = LatticeIndex::from_digits(&digits).unwrap();
            prop_assert_eq!(i.digits(), digits.clone());
            prop_assert_eq!(LatticeIndex::from_linear(i.t(), i.linear()).unwrap(), i);
            prop_assert_eq!(i.to_string().parse::<LatticeIndex>().unwrap(), i);
        }

        #[test]
        fn canonical_set_text_roundtrip(raw in proptest::collection::btree_set(0u32..64, 1..10)) {
            let s = StateSet::from_linear(3, &raw.into_iter().collect::<Vec<_>>()).unwrap();
            let text = s.to_string();
            prop_assert_eq!(StateSet::parse(&text).unwrap().to_string(), text);
        }
    }
}
