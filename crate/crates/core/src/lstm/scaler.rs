use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-column affine map onto `[0, 1]` over the fitted range. Constant
/// columns get unit range so they map to zero instead of dividing by zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinMaxScaler {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl MinMaxScaler {
    pub fn fit(rows: &[Vec<f64>]) -> Result<Self> {
        let first = rows
            .first()
            .ok_or_else(|| Error::InsufficientData("cannot fit a scaler on zero rows".into()))?;
        let width = first.len();
        let mut min = vec![f64::INFINITY; width];
        let mut max = vec![f64::NEG_INFINITY; width];
        for (r, row) in rows.iter().enumerate() {
            if row.len() != width {
                return Err(Error::Dimension {
                    what: "scaler row",
                    expected: width,
                    got: row.len(),
                });
            }
            for (c, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::Validation(format!("non-finite value in row {r}, column {c}")));
                }
                min[c] = min[c].min(v);
                max[c] = max[c].max(v);
            }
        }
        Ok(MinMaxScaler { min, max })
    }

    pub fn width(&self) -> usize {
        self.min.len()
    }

    fn range(&self, c: usize) -> f64 {
        let r = self.max[c] - self.min[c];
        if r > 0.0 {
            r
        } else {
            1.0
        }
    }

    pub fn scale_value(&self, c: usize, x: f64) -> f64 {
        (x - self.min[c]) / self.range(c)
    }

    pub fn inverse_value(&self, c: usize, y: f64) -> f64 {
        y * self.range(c) + self.min[c]
    }

    pub fn scale(&self, row: &[f64]) -> Vec<f64> {
        row.iter().enumerate().map(|(c, &x)| self.scale_value(c, x)).collect()
    }

    pub fn inverse(&self, row: &[f64]) -> Vec<f64> {
        row.iter().enumerate().map(|(c, &y)| self.inverse_value(c, y)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn constant_column_maps_to_zero() {
        let s = MinMaxScaler::fit(&[vec![3.0, 1.0], vec![3.0, 5.0]]).unwrap();
        assert_eq!(s.scale(&[3.0, 5.0]), vec![0.0, 1.0]);
        assert_eq!(s.inverse(&[0.0, 0.5]), vec![3.0, 3.0]);
    }

    #[test]
    fn rejects_empty_and_ragged() {
        assert!(MinMaxScaler::fit(&[]).is_err());
        assert!(MinMaxScaler::fit(&[vec![1.0], vec![1.0, 2.0]]).is_err());
    }

    proptest! {
        #[test]
        fn round_trip(rows in prop::collection::vec(prop::collection::vec(-1e4f64..1e4, 3), 2..20), pick in 0usize..20) {
            let s = MinMaxScaler::fit(&rows).unwrap();
            let before = s.clone();
            let x = &rows[pick % rows.len()];
            let back = s.inverse(&s.scale(x));
            for (a, b) in back.iter().zip(x) {
                prop_assert!((a - b).abs() <= 1e-10 * b.abs().max(1.0));
            }
            prop_assert_eq!(s, before);
        }
    }
}
