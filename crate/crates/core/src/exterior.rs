//! Sparse exterior algebra over an ordered coframe e0..e4 (dim 5) or
//! e0..e4, dt (dim 6).

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{Scalar, DEFAULT_TOL};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExteriorError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error("grade mismatch: {0} vs {1}")]
    GradeMismatch(usize, usize),
    #[error("unsupported coframe dimension {0} (expected 5 or 6)")]
    BadDim(usize),
    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("multi-index {0:?} is not strictly increasing")]
    NotIncreasing(Vec<usize>),
    #[error("cannot contract a 0-form")]
    ContractScalar,
    #[error("expected {expected} vectors, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("empty combination")]
    Empty,
}

pub type Result<T> = std::result::Result<T, ExteriorError>;

fn check_dim(dim: usize) -> Result<()> {
    if dim == 5 || dim == 6 {
        Ok(())
    } else {
        Err(ExteriorError::BadDim(dim))
    }
}

/// Strictly increasing tuple of coframe indices.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MultiIndex(Vec<u8>);

impl MultiIndex {
    pub fn new(indices: &[usize]) -> Result<Self> {
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ExteriorError::NotIncreasing(indices.to_vec()));
        }
        Ok(MultiIndex(indices.iter().map(|&i| i as u8).collect()))
    }

    pub fn empty() -> Self {
        MultiIndex(Vec::new())
    }

    pub fn grade(&self) -> usize {
        self.0.len()
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().map(|&i| i as usize)
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.contains(&(i as u8))
    }

    /// Sign and index of `self ∧ other`, or `None` when they share an index.
    pub fn wedge(&self, other: &MultiIndex) -> Option<(bool, MultiIndex)> {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let mut inversions = 0usize;
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].cmp(&other.0[j]) {
                std::cmp::Ordering::Less => {
                    out.push(self.0[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    // other[j] jumps over the remaining entries of self
                    inversions += self.0.len() - i;
                    out.push(other.0[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => return None,
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        Some((inversions % 2 == 1, MultiIndex(out)))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        for i in self.indices() {
            if i == 5 {
                s.push_str("∧dt");
            } else {
                s.push(char::from(b'0' + i as u8));
            }
        }
        match s.strip_prefix("∧dt") {
            Some(rest) => write!(f, "dt{rest}"),
            None if s.ends_with("∧dt") => write!(f, "e{s}"),
            None if s.is_empty() => write!(f, "1"),
            None => write!(f, "e{s}"),
        }
    }
}

/// Vector over the dual frame e_0..e_4 (and ∂_t when dim = 6).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameVector(pub Vec<Scalar>);

impl FrameVector {
    pub fn new(components: Vec<Scalar>) -> Result<Self> {
        check_dim(components.len())?;
        Ok(FrameVector(components))
    }

    /// The basis vector e_i.
    pub fn basis(dim: usize, i: usize) -> Result<Self> {
        check_dim(dim)?;
        if i >= dim {
            return Err(ExteriorError::IndexOutOfRange { index: i, dim });
        }
        let mut v = vec![Scalar::zero(); dim];
        v[i] = Scalar::one();
        Ok(FrameVector(v))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn component(&self, i: usize) -> &Scalar {
        &self.0[i]
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KForm {
    dim: usize,
    grade: usize,
    terms: BTreeMap<MultiIndex, Scalar>,
}

impl KForm {
    pub fn zero(dim: usize, grade: usize) -> Result<Self> {
        check_dim(dim)?;
        if grade > dim {
            return Err(ExteriorError::GradeMismatch(grade, dim));
        }
        Ok(KForm { dim, grade, terms: BTreeMap::new() })
    }

    pub fn constant(dim: usize, c: Scalar) -> Result<Self> {
        Self::from_terms(dim, 0, vec![(MultiIndex::empty(), c)])
    }

    /// `e^{i1} ∧ ... ∧ e^{ik}` for arbitrary (possibly unsorted) indices;
    /// repeated indices give the zero form.
    pub fn basis(dim: usize, indices: &[usize]) -> Result<Self> {
        Self::monomial(dim, Scalar::one(), indices)
    }

    pub fn monomial(dim: usize, c: Scalar, indices: &[usize]) -> Result<Self> {
        check_dim(dim)?;
        let mut acc = KForm::constant(dim, c)?;
        for &i in indices {
            if i >= dim {
                return Err(ExteriorError::IndexOutOfRange { index: i, dim });
            }
            let single = MultiIndex(vec![i as u8]);
            acc = acc.wedge(&KForm::from_terms(dim, 1, vec![(single, Scalar::one())])?)?;
        }
        Ok(acc)
    }

    pub fn from_terms(dim: usize, grade: usize, terms: Vec<(MultiIndex, Scalar)>) -> Result<Self> {
        let mut f = KForm::zero(dim, grade)?;
        for (mi, c) in terms {
            if mi.grade() != grade {
                return Err(ExteriorError::GradeMismatch(mi.grade(), grade));
            }
            if let Some(i) = mi.indices().find(|&i| i >= dim) {
                return Err(ExteriorError::IndexOutOfRange { index: i, dim });
            }
            f.add_term(mi, c);
        }
        Ok(f)
    }

    fn add_term(&mut self, mi: MultiIndex, c: Scalar) {
        let entry = self.terms.entry(mi.clone()).or_insert_with(Scalar::zero);
        *entry += &c;
        if entry.is_zero_tol(DEFAULT_TOL) {
            self.terms.remove(&mi);
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn grade(&self) -> usize {
        self.grade
    }

    pub fn terms(&self) -> &BTreeMap<MultiIndex, Scalar> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of the sorted index tuple (zero when absent).
    pub fn coeff(&self, indices: &[usize]) -> Scalar {
        MultiIndex::new(indices).ok().and_then(|mi| self.terms.get(&mi).cloned()).unwrap_or_else(Scalar::zero)
    }

    pub fn is_exact(&self) -> bool {
        self.terms.values().all(Scalar::is_exact)
    }

    pub fn to_float(&self) -> KForm {
        let mut out = KForm { dim: self.dim, grade: self.grade, terms: BTreeMap::new() };
        for (mi, c) in &self.terms {
            out.add_term(mi.clone(), c.to_float());
        }
        out
    }

    /// Lift a 5-dim form to the 6-dim coframe (dt appended as index 5).
    pub fn lift6(&self) -> KForm {
        KForm { dim: 6, grade: self.grade, terms: self.terms.clone() }
    }

    pub fn scale(&self, c: &Scalar) -> KForm {
        let mut out = KForm { dim: self.dim, grade: self.grade, terms: BTreeMap::new() };
        for (mi, v) in &self.terms {
            out.add_term(mi.clone(), v * c);
        }
        out
    }

    pub fn neg(&self) -> KForm {
        self.scale(&Scalar::int(-1))
    }

    fn same_shape(&self, other: &KForm) -> Result<()> {
        if self.dim != other.dim {
            return Err(ExteriorError::DimMismatch(self.dim, other.dim));
        }
        // A zero form is accepted at any grade.
        if self.grade != other.grade && !self.is_zero() && !other.is_zero() {
            return Err(ExteriorError::GradeMismatch(self.grade, other.grade));
        }
        Ok(())
    }

    pub fn add(&self, other: &KForm) -> Result<KForm> {
        linear_combine(&[Scalar::one(), Scalar::one()], &[self.clone(), other.clone()])
    }

    pub fn sub(&self, other: &KForm) -> Result<KForm> {
        linear_combine(&[Scalar::one(), Scalar::int(-1)], &[self.clone(), other.clone()])
    }

    pub fn wedge(&self, other: &KForm) -> Result<KForm> {
        if self.dim != other.dim {
            return Err(ExteriorError::DimMismatch(self.dim, other.dim));
        }
        let grade = self.grade + other.grade;
        if grade > self.dim {
            return Ok(KForm { dim: self.dim, grade, terms: BTreeMap::new() });
        }
        let mut out = KForm { dim: self.dim, grade, terms: BTreeMap::new() };
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                if let Some((odd, mi)) = ma.wedge(mb) {
                    let c = ca * cb;
                    out.add_term(mi, if odd { -c } else { c });
                }
            }
        }
        Ok(out)
    }

    /// Interior product `x ⌟ self`.
    pub fn contract(&self, x: &FrameVector) -> Result<KForm> {
        if self.grade == 0 {
            return Err(ExteriorError::ContractScalar);
        }
        if x.dim() != self.dim {
            return Err(ExteriorError::DimMismatch(x.dim(), self.dim));
        }
        let mut out = KForm { dim: self.dim, grade: self.grade - 1, terms: BTreeMap::new() };
        for (mi, c) in &self.terms {
            for (pos, i) in mi.indices().enumerate() {
                let xi = x.component(i);
                if xi.is_zero_tol(0.0) {
                    continue;
                }
                let rest: Vec<u8> = mi.0.iter().enumerate().filter(|&(k, _)| k != pos).map(|(_, &v)| v).collect();
                let v = c * xi;
                out.add_term(MultiIndex(rest), if pos % 2 == 1 { -v } else { v });
            }
        }
        Ok(out)
    }

    /// `self(v_1, ..., v_k)`.
    pub fn evaluate(&self, vectors: &[FrameVector]) -> Result<Scalar> {
        if vectors.len() != self.grade {
            return Err(ExteriorError::Arity { expected: self.grade, got: vectors.len() });
        }
        let mut f = self.clone();
        for v in vectors {
            f = f.contract(v)?;
        }
        Ok(f.coeff(&[]))
    }

    /// Largest absolute coefficient difference.
    pub fn max_abs_diff(&self, other: &KForm) -> Result<Scalar> {
        self.same_shape(other)?;
        let diff = self.sub(other)?;
        Ok(diff.max_abs())
    }

    pub fn max_abs(&self) -> Scalar {
        self.terms.values().map(Scalar::abs).fold(Scalar::zero(), |m, c| if c > m { c } else { m })
    }
}

impl PartialEq for KForm {
    fn eq(&self, other: &Self) -> bool {
        equals(self, other, DEFAULT_TOL)
    }
}

/// Termwise linear combination.
pub fn linear_combine(coeffs: &[Scalar], forms: &[KForm]) -> Result<KForm> {
    let first = forms.first().ok_or(ExteriorError::Empty)?;
    if coeffs.len() != forms.len() {
        return Err(ExteriorError::Arity { expected: forms.len(), got: coeffs.len() });
    }
    let grade = forms.iter().find(|f| !f.is_zero()).map_or(first.grade, |f| f.grade);
    let mut out = KForm { dim: first.dim, grade, terms: BTreeMap::new() };
    for (c, f) in coeffs.iter().zip(forms) {
        out.same_shape(f)?;
        for (mi, v) in &f.terms {
            out.add_term(mi.clone(), c * v);
        }
    }
    Ok(out)
}

/// True iff the largest coefficient difference is within `tol` (exact for
/// exact coefficients). Forms of different dimension are never equal.
pub fn equals(a: &KForm, b: &KForm, tol: f64) -> bool {
    match a.max_abs_diff(b) {
        Ok(d) => d.is_zero_tol(tol),
        Err(_) => false,
    }
}

impl fmt::Display for KForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (mi, c)) in self.terms.iter().enumerate() {
            let neg = c.to_f64() < 0.0;
            let mag = c.abs();
            match (k, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            if mi.grade() == 0 {
                write!(f, "{mag}")?;
            } else if mag == Scalar::one() {
                write!(f, "{mi}")?;
            } else {
                write!(f, "{mag}*{mi}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(ix: &[usize]) -> KForm {
        KForm::basis(5, ix).unwrap()
    }

    fn alpha1() -> KForm {
        e(&[1, 4]).sub(&e(&[2, 3])).unwrap()
    }

    #[test]
    fn combine_examples() {
        let f = linear_combine(&[Scalar::one(), Scalar::zero()], &[e(&[1, 2]), e(&[3, 4])]).unwrap();
        assert_eq!(f, e(&[1, 2]));
        let z = linear_combine(&[Scalar::one(), Scalar::int(-1)], &[e(&[1, 2]), e(&[1, 2])]).unwrap();
        assert!(z.is_zero());
        let a1 = linear_combine(&[Scalar::one(), Scalar::int(-1)], &[e(&[1, 4]), e(&[2, 3])]).unwrap();
        assert_eq!(a1.coeff(&[1, 4]), Scalar::one());
        assert_eq!(a1.coeff(&[2, 3]), Scalar::int(-1));
        assert_eq!(a1.terms().len(), 2);
    }

    #[test]
    fn combine_rejects_mismatch() {
        assert!(linear_combine(&[Scalar::one(), Scalar::one()], &[e(&[1]), e(&[1, 2])]).is_err());
        let six = KForm::basis(6, &[1, 2]).unwrap();
        assert!(linear_combine(&[Scalar::one(), Scalar::one()], &[e(&[1, 2]), six]).is_err());
    }

    #[test]
    fn wedge_examples() {
        assert_eq!(e(&[1]).wedge(&e(&[2])).unwrap(), e(&[1, 2]));
        assert_eq!(e(&[2]).wedge(&e(&[1])).unwrap(), e(&[1, 2]).neg());
        let a1 = alpha1();
        assert_eq!(a1.wedge(&a1).unwrap(), e(&[1, 2, 3, 4]).scale(&Scalar::int(-2)));
        let dtheta = e(&[3, 1]).add(&e(&[4, 2])).unwrap();
        assert!(dtheta.wedge(&e(&[1, 2])).unwrap().is_zero());
        assert!(e(&[1]).wedge(&e(&[1])).unwrap().is_zero());
    }

    #[test]
    fn wedge_over_dim_is_zero() {
        let w = e(&[0, 1, 2]).wedge(&e(&[3, 4, 1])).unwrap();
        assert!(w.is_zero());
        assert_eq!(w.grade(), 6);
    }

    #[test]
    fn contract_examples() {
        let e1 = FrameVector::basis(5, 1).unwrap();
        let e3 = FrameVector::basis(5, 3).unwrap();
        let e0 = FrameVector::basis(5, 0).unwrap();
        assert_eq!(e(&[1, 2]).contract(&e1).unwrap(), e(&[2]));
        let dtheta = e(&[3, 1]).add(&e(&[4, 2])).unwrap();
        assert_eq!(dtheta.contract(&e3).unwrap(), e(&[1]));
        assert!(e(&[1, 2]).contract(&e0).unwrap().is_zero());
        assert_eq!(KForm::constant(5, Scalar::one()).unwrap().contract(&e0), Err(ExteriorError::ContractScalar));
    }

    #[test]
    fn equals_tolerance() {
        let a = e(&[1, 2]);
        assert!(equals(&a, &e(&[1, 2]), 1e-9));
        let perturbed = KForm::from_terms(
            5,
            2,
            vec![
                (MultiIndex::new(&[1, 2]).unwrap(), Scalar::one()),
                (MultiIndex::new(&[3, 4]).unwrap(), Scalar::float(1e-12)),
            ],
        )
        .unwrap();
        assert!(equals(&a, &perturbed, 1e-9));
        assert!(!equals(&a, &e(&[3, 4]), 1e-9));
    }

    #[test]
    fn evaluate_matches_determinant() {
        let v = FrameVector::new(vec![0, 1, 2, 0, 0].into_iter().map(Scalar::int).collect()).unwrap();
        let w = FrameVector::new(vec![0, 3, 5, 0, 0].into_iter().map(Scalar::int).collect()).unwrap();
        assert_eq!(e(&[1, 2]).evaluate(&[v.clone(), w.clone()]).unwrap(), Scalar::int(5 - 2 * 3));
        assert_eq!(e(&[1, 2]).evaluate(&[v.clone(), v]).unwrap(), Scalar::zero());
    }

    #[test]
    fn multi_index_rejects_duplicates() {
        assert!(MultiIndex::new(&[1, 1]).is_err());
        assert!(MultiIndex::new(&[2, 1]).is_err());
    }

    #[test]
    fn display() {
        assert_eq!(alpha1().to_string(), "e14 - e23");
        assert_eq!(KForm::basis(6, &[0, 5]).unwrap().to_string(), "e0∧dt");
        assert_eq!(KForm::basis(6, &[5]).unwrap().to_string(), "dt");
        assert_eq!(e(&[0]).scale(&Scalar::int(2)).to_string(), "2*e0");
    }
}
