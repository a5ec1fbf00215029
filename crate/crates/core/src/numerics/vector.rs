use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use super::{MaskBitmap, Scalar};
use crate::error::{Error, Result};

/// Flat model parameters (or an update of the same shape).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParamVector<T> {
    values: Vec<T>,
}

impl<T: Scalar> ParamVector<T> {
    pub fn zeros(d: usize) -> Self {
        Self { values: vec![T::zero(); d] }
    }

    pub fn from_vec(values: Vec<T>) -> Self {
        Self { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.values
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_vec(self) -> Vec<T> {
        self.values
    }

    pub fn iter(&self) -> std::slice::Iter<'_, T> {
        self.values.iter()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    fn check_len(&self, other: &Self) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::invalid(format!("length mismatch: {} vs {}", self.len(), other.len())));
        }
        Ok(())
    }

    /// `self += alpha * other`
    pub fn axpy(&mut self, alpha: T, other: &Self) -> Result<()> {
        self.check_len(other)?;
        for (a, &b) in self.values.iter_mut().zip(&other.values) {
            *a += alpha * b;
        }
        Ok(())
    }

    pub fn add_assign(&mut self, other: &Self) -> Result<()> {
        self.check_len(other)?;
        for (a, &b) in self.values.iter_mut().zip(&other.values) {
            *a += b;
        }
        Ok(())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_len(other)?;
        Ok(Self::from_vec(self.values.iter().zip(&other.values).map(|(&a, &b)| a - b).collect()))
    }

    pub fn scale(&mut self, alpha: T) {
        for v in &mut self.values {
            *v *= alpha;
        }
    }

    pub fn norm_sq(&self) -> T {
        self.values.iter().map(|&v| v * v).sum()
    }

    /// Indices of entries that are not exactly zero.
    pub fn nonzero_indices(&self) -> Vec<usize> {
        self.values.iter().enumerate().filter(|(_, v)| !v.is_zero()).map(|(j, _)| j).collect()
    }
}

impl<T> Index<usize> for ParamVector<T> {
    type Output = T;
    fn index(&self, j: usize) -> &T {
        &self.values[j]
    }
}

impl<T> IndexMut<usize> for ParamVector<T> {
    fn index_mut(&mut self, j: usize) -> &mut T {
        &mut self.values[j]
    }
}

impl<T: Scalar> From<Vec<T>> for ParamVector<T> {
    fn from(values: Vec<T>) -> Self {
        Self::from_vec(values)
    }
}

/// Elementwise mask: keeps `v[j]` where bit `j` is set, zero elsewhere.
pub fn apply_mask<T: Scalar>(v: &ParamVector<T>, m: &MaskBitmap) -> Result<ParamVector<T>> {
    if v.len() != m.len() {
        return Err(Error::invalid(format!("mask length {} does not match vector length {}", m.len(), v.len())));
    }
    Ok(ParamVector::from_vec(v.iter().enumerate().map(|(j, &x)| if m.get(j) { x } else { T::zero() }).collect()))
}
