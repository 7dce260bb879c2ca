use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedVector {
    pub name: String,
    pub values: Vec<f64>,
}

/// Every trainable scalar of a model, grouped into named flat vectors.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ParameterBundle {
    pub vectors: Vec<NamedVector>,
}

impl ParameterBundle {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, name: &str, values: Vec<f64>) {
        debug_assert!(self.get(name).is_none(), "duplicate vector {name}");
        self.vectors.push(NamedVector {
            name: name.to_string(),
            values,
        });
    }

    pub fn get(&self, name: &str) -> Option<&[f64]> {
        self.vectors
            .iter()
            .find(|v| v.name == name)
            .map(|v| v.values.as_slice())
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut Vec<f64>> {
        self.vectors
            .iter_mut()
            .find(|v| v.name == name)
            .map(|v| &mut v.values)
    }

    pub(crate) fn take(&self, name: &str, len: usize) -> Result<Vec<f64>> {
        let v = self
            .get(name)
            .ok_or_else(|| Error::Shape(format!("parameter bundle lacks vector {name}")))?;
        if v.len() != len {
            return Err(Error::Shape(format!(
                "vector {name} has {} values, expected {len}",
                v.len()
            )));
        }
        Ok(v.to_vec())
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.vectors.iter().map(|v| v.name.as_str())
    }

    /// Total number of scalars.
    pub fn total(&self) -> usize {
        self.vectors.iter().map(|v| v.values.len()).sum()
    }

    /// Same names and shapes, all zeros.
    pub fn zeros_like(&self) -> Self {
        Self {
            vectors: self
                .vectors
                .iter()
                .map(|v| NamedVector {
                    name: v.name.clone(),
                    values: vec![0.0; v.values.len()],
                })
                .collect(),
        }
    }

    /// Concatenation in vector order.
    pub fn flatten(&self) -> Vec<f64> {
        self.vectors.iter().flat_map(|v| v.values.iter().copied()).collect()
    }

    /// Inverse of [`flatten`](Self::flatten) against this bundle's layout.
    pub fn unflatten(&self, flat: &[f64]) -> Result<Self> {
        if flat.len() != self.total() {
            return Err(Error::Shape(format!(
                "flat vector has {} values, bundle holds {}",
                flat.len(),
                self.total()
            )));
        }
        let mut offset = 0;
        let vectors = self
            .vectors
            .iter()
            .map(|v| {
                let n = v.values.len();
                let values = flat[offset..offset + n].to_vec();
                offset += n;
                NamedVector {
                    name: v.name.clone(),
                    values,
                }
            })
            .collect();
        Ok(Self { vectors })
    }

    /// `self += scale * other`, matched by position; layouts must agree.
    pub fn add_scaled(&mut self, other: &Self, scale: f64) -> Result<()> {
        self.check_layout(other)?;
        for (a, b) in self.vectors.iter_mut().zip(&other.vectors) {
            for (x, y) in a.values.iter_mut().zip(&b.values) {
                *x += scale * y;
            }
        }
        Ok(())
    }

    pub fn check_layout(&self, other: &Self) -> Result<()> {
        let same = self.vectors.len() == other.vectors.len()
            && self
                .vectors
                .iter()
                .zip(&other.vectors)
                .all(|(a, b)| a.name == b.name && a.values.len() == b.values.len());
        if same {
            Ok(())
        } else {
            Err(Error::Shape("parameter bundles have different layouts".into()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flatten_round_trip_and_layout() {
        let mut b = ParameterBundle::new();
        b.push("a", vec![1.0, 2.0]);
        b.push("b", vec![3.0]);
        assert_eq!(b.total(), 3);
        let flat = b.flatten();
        assert_eq!(b.unflatten(&flat).unwrap(), b);
        assert!(b.unflatten(&[1.0]).is_err());
        let mut g = b.zeros_like();
        g.add_scaled(&b, 2.0).unwrap();
        assert_eq!(g.flatten(), vec![2.0, 4.0, 6.0]);
        let mut other = ParameterBundle::new();
        other.push("a", vec![0.0, 0.0]);
        assert!(g.add_scaled(&other, 1.0).is_err());
        assert!(b.take("b", 2).is_err());
        assert!(b.take("zzz", 1).is_err());
    }
}
