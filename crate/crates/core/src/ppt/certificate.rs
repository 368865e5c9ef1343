use exact_lp::Fraction;
use serde::{Deserialize, Serialize};

use crate::lattice::{LatticeError, SignOracle, StateSet};

/// Exactly checkable witness for the value of a set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Certificate {
    /// Diagonal POVM `p_1 … p_k` achieving perfect discrimination.
    Povm { p: Vec<Vec<Fraction>> },
    /// Dual feasible point `(y, q_1 … q_k)` with `value = (1/k) Σ_u y[u]`.
    Dual {
        y: Vec<Fraction>,
        q: Vec<Vec<Fraction>>,
        value: Fraction,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CertificateError {
    #[error("certificate shape does not match a set with k = {k}, 4^t = {n}")]
    DimensionMismatch { k: usize, n: usize },
    #[error("malformed certificate JSON: {0}")]
    Json(String),
    #[error("certificate set: {0}")]
    Set(#[from] LatticeError),
}

/// `P^{⊗t} x`, exact.
pub(crate) fn apply_p(oracle: &SignOracle, x: &[Fraction]) -> Vec<Fraction> {
    let n = x.len();
    let support: Vec<usize> = (0..n).filter(|&l| !x[l].is_zero()).collect();
    let scale = Fraction::pow2_recip(oracle.t());
    (0..n)
        .map(|u| {
            let mut acc = Fraction::zero();
            for &l in &support {
                if oracle.unit_entry(u as u32, l as u32) > 0 {
                    acc += &x[l];
                } else {
                    acc -= &x[l];
                }
            }
            acc * &scale
        })
        .collect()
}

fn check_shape(set: &StateSet, vectors: &[&Vec<Fraction>], count: usize) -> Result<(), CertificateError> {
    let n = crate::lattice::dimension(set.t());
    if vectors.len() != count || vectors.iter().any(|v| v.len() != n) {
        return Err(CertificateError::DimensionMismatch { k: set.k(), n });
    }
    Ok(())
}

/// Value `(1/k) Σ_j p_j[v_j]` of a feasible primal point, or `None` when
/// `p_j ≥ 0`, `Σ_j p_j = 1` or `P^{⊗t} p_j ≥ 0` fails.
pub fn primal_value(set: &StateSet, p: &[Vec<Fraction>]) -> Result<Option<Fraction>, CertificateError> {
    check_shape(set, &p.iter().collect::<Vec<_>>(), set.k())?;
    let oracle = SignOracle::new(set.t())?;
    let n = oracle.dimension();
    if p.iter().flatten().any(Fraction::is_negative) {
        return Ok(None);
    }
    for u in 0..n {
        let s: Fraction = p.iter().map(|pj| &pj[u]).sum();
        if !s.is_one() {
            return Ok(None);
        }
    }
    if p.iter().any(|pj| apply_p(&oracle, pj).iter().any(Fraction::is_negative)) {
        return Ok(None);
    }
    let total: Fraction = set
        .members()
        .iter()
        .zip(p)
        .map(|(v, pj)| pj[v.linear() as usize].clone())
        .sum();
    Ok(Some(total * Fraction::new(1, set.k() as i64)))
}

/// Value `(1/k) Σ_u y[u]` of a feasible dual point, or `None` when `q_j ≥ 0`
/// or `y − e_{v_j} ≥ P^{⊗t} q_j` fails.
pub fn dual_value(set: &StateSet, y: &[Fraction], q: &[Vec<Fraction>]) -> Result<Option<Fraction>, CertificateError> {
    let y_owned = y.to_vec();
    check_shape(set, &[&y_owned], 1)?;
    check_shape(set, &q.iter().collect::<Vec<_>>(), set.k())?;
    let oracle = SignOracle::new(set.t())?;
    if q.iter().flatten().any(Fraction::is_negative) {
        return Ok(None);
    }
    for (v, qj) in set.members().iter().zip(q) {
        let pq = apply_p(&oracle, qj);
        for (u, (yu, pu)) in y.iter().zip(&pq).enumerate() {
            let mut lhs = yu.clone();
            if u == v.linear() as usize {
                lhs -= Fraction::one();
            }
            if lhs < *pu {
                return Ok(None);
            }
        }
    }
    let total: Fraction = y.iter().sum();
    Ok(Some(total * Fraction::new(1, set.k() as i64)))
}

/// `y = 1_K`, `q = 0`: the dual point of value 1 that every set admits.
pub fn trivial_dual(set: &StateSet) -> (Vec<Fraction>, Vec<Vec<Fraction>>) {
    let n = crate::lattice::dimension(set.t());
    let mut y = vec![Fraction::zero(); n];
    for v in set.members() {
        y[v.linear() as usize] = Fraction::one();
    }
    (y, vec![vec![Fraction::zero(); n]; set.k()])
}

/// Re-checks a certificate from scratch. A POVM must be feasible with
/// `p_j[v_j] = 1`; a dual point must be feasible, carry its true value, and
/// that value must be `< 1`.
pub fn verify_certificate(set: &StateSet, cert: &Certificate) -> Result<bool, CertificateError> {
    match cert {
        Certificate::Povm { p } => {
            let Some(value) = primal_value(set, p)? else {
                return Ok(false);
            };
            let perfect = set.members().iter().zip(p).all(|(v, pj)| pj[v.linear() as usize].is_one());
            Ok(perfect && value.is_one())
        }
        Certificate::Dual { y, q, value } => {
            let Some(actual) = dual_value(set, y, q)? else {
                return Ok(false);
            };
            Ok(actual == *value && *value < Fraction::one())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct CertificateDocument {
    #[serde(rename = "type")]
    kind: String,
    t: u32,
    set: Vec<String>,
    value: Fraction,
    vectors: Vec<Vec<Fraction>>,
}

impl Certificate {
    pub fn kind(&self) -> &'static str {
        match self {
            Certificate::Povm { .. } => "povm",
            Certificate::Dual { .. } => "dual",
        }
    }

    /// Value certified: 1 for a POVM, the stated bound for a dual point.
    pub fn value(&self) -> Fraction {
        match self {
            Certificate::Povm { .. } => Fraction::one(),
            Certificate::Dual { value, .. } => value.clone(),
        }
    }

    /// Serializes as
    /// `{"type","t","set":[...],"value":"p/q","vectors":[[...],...]}`;
    /// dual vectors are `y` followed by `q_1 … q_k`.
    pub fn to_json(&self, set: &StateSet) -> String {
        let vectors = match self {
            Certificate::Povm { p } => p.clone(),
            Certificate::Dual { y, q, .. } => std::iter::once(y.clone()).chain(q.iter().cloned()).collect(),
        };
        let doc = CertificateDocument {
            kind: self.kind().to_string(),
            t: set.t(),
            set: set.members().iter().map(ToString::to_string).collect(),
            value: self.value(),
            vectors,
        };
        serde_json::to_string(&doc).expect("certificate serializes")
    }

    pub fn from_json(text: &str) -> Result<(StateSet, Certificate), CertificateError> {
        let doc: CertificateDocument = serde_json::from_str(text).map_err(|e| CertificateError::Json(e.to_string()))?;
        let set = StateSet::parse(&doc.set.join(","))?;
        if set.t() != doc.t {
            return Err(CertificateError::Json(format!("t = {} but set has t = {}", doc.t, set.t())));
        }
        let cert = match doc.kind.as_str() {
            "povm" => Certificate::Povm { p: doc.vectors },
            "dual" => {
                let mut vectors = doc.vectors.into_iter();
                let y = vectors
                    .next()
                    .ok_or_else(|| CertificateError::Json("dual certificate without y".into()))?;
                Certificate::Dual {
                    y,
                    q: vectors.collect(),
                    value: doc.value,
                }
            }
            other => return Err(CertificateError::Json(format!("unknown type {other:?}"))),
        };
        Ok((set, cert))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(s: &str) -> StateSet {
        StateSet::parse(s).unwrap()
    }

    #[test]
    fn uniform_povm_is_ppt_but_not_perfect() {
        let s = set("00,01,02");
        let p = vec![vec![Fraction::new(1, 3); 16]; 3];
        assert_eq!(primal_value(&s, &p).unwrap(), Some(Fraction::new(1, 3)));
        assert!(!verify_certificate(&s, &Certificate::Povm { p }).unwrap());
    }

    #[test]
    fn trivial_dual_has_value_one_and_is_rejected() {
        let s = set("00,11,21,31");
        let (y, q) = trivial_dual(&s);
        assert_eq!(dual_value(&s, &y, &q).unwrap(), Some(Fraction::one()));
        let cert = Certificate::Dual { y, q, value: Fraction::one() };
        assert!(!verify_certificate(&s, &cert).unwrap());
    }

    #[test]
    fn shape_errors() {
        let s = set("00,11");
        let err = primal_value(&s, &[vec![Fraction::one(); 16]]).unwrap_err();
        assert_eq!(err, CertificateError::DimensionMismatch { k: 2, n: 16 });
        assert!(dual_value(&s, &[Fraction::one()], &[vec![], vec![]]).is_err());
    }

    #[test]
    fn json_roundtrip_and_rejections() {
        let s = set("00,11");
        let (y, q) = trivial_dual(&s);
        let cert = Certificate::Dual { y, q, value: Fraction::one() };
        let text = cert.to_json(&s);
        assert!(text.starts_with(r#"{"type":"dual","t":2,"set":["00","11"],"value":"1","vectors":[["1","0""#));
        assert_eq!(Certificate::from_json(&text).unwrap(), (s.clone(), cert));
        assert!(Certificate::from_json(r#"{"type":"x","t":2,"set":["00"],"value":"1","vectors":[]}"#).is_err());
        assert!(Certificate::from_json(r#"{"type":"povm","t":3,"set":["00"],"value":"1","vectors":[]}"#).is_err());
        assert!(Certificate::from_json("not json").is_err());
    }
}
