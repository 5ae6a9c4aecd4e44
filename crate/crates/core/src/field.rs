//! Per-vertex scalar fields and their CSV form.

use crate::error::{Error, Result};
use serde::Serialize;
use std::fmt::Write;

/// Fixed 17-significant-digit rendering used in every CSV.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalarField {
    pub name: String,
    pub units: String,
    pub values: Vec<f64>,
}

impl ScalarField {
    pub fn new(name: &str, values: Vec<f64>) -> Self {
        Self {
            name: name.into(),
            units: "dimensionless".into(),
            values,
        }
    }

    pub fn constant(name: &str, n: usize, value: f64) -> Self {
        Self::new(name, vec![value; n])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn expect_len(&self, n: usize) -> Result<()> {
        if self.values.len() != n {
            return Err(Error::Shape {
                expected: n,
                got: self.values.len(),
            });
        }
        Ok(())
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|x| x.is_finite())
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// `vertex_id,value` rows.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("vertex_id,value\n");
        for (i, v) in self.values.iter().enumerate() {
            writeln!(s, "{i},{}", fmt17(*v)).unwrap();
        }
        s
    }
}
