use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// Fixed-dimension real vector stored sparsely: `(index, value)` pairs in
/// ascending index order, zeros omitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingVector<S> {
    dimension: usize,
    entries: Vec<(u32, S)>,
    norm: S,
}

impl<S: Scalar> EmbeddingVector<S> {
    pub fn from_dense(values: &[S]) -> Self {
        let entries = values
            .iter()
            .enumerate()
            .filter(|(_, v)| !v.is_zero())
            .map(|(i, &v)| (i as u32, v))
            .collect();
        Self::with_entries(values.len(), entries)
    }

    /// Builds from unsorted pairs; duplicate indices are summed.
    pub fn from_sparse(dimension: usize, mut pairs: Vec<(u32, S)>) -> Self {
        pairs.sort_by_key(|(i, _)| *i);
        let mut entries: Vec<(u32, S)> = Vec::with_capacity(pairs.len());
        for (i, v) in pairs {
            debug_assert!((i as usize) < dimension);
            match entries.last_mut() {
                Some((last, acc)) if *last == i => *acc = *acc + v,
                _ => entries.push((i, v)),
            }
        }
        entries.retain(|(_, v)| !v.is_zero());
        Self::with_entries(dimension, entries)
    }

    fn with_entries(dimension: usize, entries: Vec<(u32, S)>) -> Self {
        let norm = entries.iter().fold(S::zero(), |acc, &(_, v)| acc + v * v).sqrt();
        EmbeddingVector { dimension, entries, norm }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn norm(&self) -> S {
        self.norm
    }

    pub fn entries(&self) -> &[(u32, S)] {
        &self.entries
    }

    pub fn to_dense(&self) -> Vec<S> {
        let mut out = vec![S::zero(); self.dimension];
        for &(i, v) in &self.entries {
            out[i as usize] = v;
        }
        out
    }

    pub fn dot(&self, other: &Self) -> S {
        let (mut a, mut b) = (self.entries.iter().peekable(), other.entries.iter().peekable());
        let mut acc = S::zero();
        while let (Some(&&(i, x)), Some(&&(j, y))) = (a.peek(), b.peek()) {
            match i.cmp(&j) {
                std::cmp::Ordering::Less => {
                    a.next();
                }
                std::cmp::Ordering::Greater => {
                    b.next();
                }
                std::cmp::Ordering::Equal => {
                    acc = acc + x * y;
                    a.next();
                    b.next();
                }
            }
        }
        acc
    }

    /// Cosine similarity clamped to [-1, 1]. Zero when either vector is zero.
    pub fn cosine(&self, other: &Self) -> S {
        if self.norm.is_zero() || other.norm.is_zero() {
            return S::zero();
        }
        let c = self.dot(other) / (self.norm * other.norm);
        c.max(-S::one()).min(S::one())
    }

    pub fn normalized(&self) -> Self {
        if self.norm.is_zero() {
            return self.clone();
        }
        let entries = self.entries.iter().map(|&(i, v)| (i, v / self.norm)).collect();
        Self::with_entries(self.dimension, entries)
    }

    /// Arithmetic mean of same-dimension vectors. `None` for an empty input.
    pub fn mean<'a>(vectors: impl IntoIterator<Item = &'a Self>) -> Option<Self> {
        let mut iter = vectors.into_iter();
        let first = iter.next()?;
        let mut acc = first.to_dense();
        let mut n = 1usize;
        for v in iter {
            debug_assert_eq!(v.dimension, first.dimension);
            for &(i, x) in &v.entries {
                acc[i as usize] = acc[i as usize] + x;
            }
            n += 1;
        }
        let count = S::from_count(n);
        for x in &mut acc {
            *x = *x / count;
        }
        Some(Self::from_dense(&acc))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orthogonal_bisector() {
        let a = EmbeddingVector::from_dense(&[1.0f64, 0.0]);
        let b = EmbeddingVector::from_dense(&[0.0f64, 1.0]);
        let r = EmbeddingVector::mean([&a, &b]).unwrap().normalized();
        let half_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        assert!((r.cosine(&a) - half_sqrt2).abs() < 1e-12);
        assert!((r.cosine(&b) - half_sqrt2).abs() < 1e-12);
        assert!((r.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn generic_over_f32() {
        let a = EmbeddingVector::from_dense(&[3.0f32, 4.0]);
        assert_eq!(a.norm(), 5.0);
        assert!((a.cosine(&a) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn sparse_merge_sums_duplicates() {
        let v = EmbeddingVector::from_sparse(5, vec![(3, 1.0f64), (1, 2.0), (3, 2.0), (4, 0.0)]);
        assert_eq!(v.entries(), &[(1, 2.0), (3, 3.0)]);
        assert_eq!(v.to_dense(), vec![0.0, 2.0, 0.0, 3.0, 0.0]);
    }

    #[test]
    fn disjoint_support_is_exactly_zero() {
        let a = EmbeddingVector::from_sparse(4, vec![(0, 0.3f64), (1, 0.7)]);
        let b = EmbeddingVector::from_sparse(4, vec![(2, 0.1f64), (3, 0.9)]);
        assert_eq!(a.cosine(&b), 0.0);
    }

    #[test]
    fn zero_vector_cosine() {
        let z = EmbeddingVector::<f64>::from_dense(&[0.0, 0.0]);
        let a = EmbeddingVector::from_dense(&[1.0, 0.0]);
        assert_eq!(z.cosine(&a), 0.0);
        assert!(EmbeddingVector::<f64>::mean(std::iter::empty()).is_none());
    }
}
