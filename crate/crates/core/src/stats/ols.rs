use crate::error::{Error, Result};

/// Dense row-major regressor matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Design {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension {
                what: "design matrix",
                expected: rows * cols,
                got: data.len(),
            });
        }
        Ok(Design { rows, cols, data })
    }

    /// Builds `[1, c_1, ..., c_k]` rows from equal-length columns.
    pub fn with_intercept(columns: &[&[f64]]) -> Result<Self> {
        let rows = columns.first().map_or(0, |c| c.len());
        if let Some(c) = columns.iter().find(|c| c.len() != rows) {
            return Err(Error::Dimension {
                what: "design column",
                expected: rows,
                got: c.len(),
            });
        }
        let cols = columns.len() + 1;
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            data.push(1.0);
            data.extend(columns.iter().map(|c| c[r]));
        }
        Design::new(rows, cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OlsFit {
    pub coefficients: Vec<f64>,
    /// Residual sum of squares.
    pub rss: f64,
}

/// Least squares by Householder QR.
pub fn ols(y: &[f64], x: &Design) -> Result<OlsFit> {
    let (m, n) = (x.rows, x.cols);
    if y.len() != m {
        return Err(Error::Dimension {
            what: "ols target",
            expected: m,
            got: y.len(),
        });
    }
    if m <= n {
        return Err(Error::InsufficientData(format!(
            "ols needs more rows ({m}) than columns ({n})"
        )));
    }

    // Column-major working copy; R ends up in the upper triangle.
    let mut a: Vec<Vec<f64>> = (0..n).map(|c| (0..m).map(|r| x.get(r, c)).collect()).collect();
    let mut qty = y.to_vec();
    let col_norms: Vec<f64> = a.iter().map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt()).collect();

    for k in 0..n {
        let norm = a[k][k..].iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm <= 1e-10 * col_norms[k].max(f64::MIN_POSITIVE) || norm == 0.0 {
            return Err(Error::SingularDesign { column: k });
        }
        let alpha = if a[k][k] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = a[k][k..].to_vec();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|e| e * e).sum();
        let reflect = |col: &mut [f64]| {
            let dot: f64 = v.iter().zip(col.iter()).map(|(a, b)| a * b).sum();
            let s = 2.0 * dot / vnorm2;
            for (c, vi) in col.iter_mut().zip(&v) {
                *c -= s * vi;
            }
        };
        for col in a.iter_mut().skip(k) {
            reflect(&mut col[k..]);
        }
        reflect(&mut qty[k..]);
    }

    let mut beta = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = qty[i];
        for j in i + 1..n {
            s -= a[j][i] * beta[j];
        }
        beta[i] = s / a[i][i];
    }

    let rss = (0..m)
        .map(|r| {
            let fitted: f64 = (0..n).map(|c| x.get(r, c) * beta[c]).sum();
            (y[r] - fitted).powi(2)
        })
        .sum();
    Ok(OlsFit {
        coefficients: beta,
        rss,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_linear_fit() {
        let x1 = [0.3, 1.2, -0.7, 2.2, 0.9, -1.4];
        let x2 = [1.0, -2.0, 0.5, 0.25, 3.0, 1.5];
        let y: Vec<f64> = x1.iter().zip(&x2).map(|(a, b)| 2.0 - 0.5 * a + 3.0 * b).collect();
        let fit = ols(&y, &Design::with_intercept(&[&x1, &x2]).unwrap()).unwrap();
        let scale: f64 = y.iter().map(|v| v * v).sum();
        assert!(fit.rss <= 1e-18 * scale, "rss {}", fit.rss);
        for (got, want) in fit.coefficients.iter().zip([2.0, -0.5, 3.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn intercept_only() {
        let fit = ols(&[4.0, 4.0, 4.0], &Design::new(3, 1, vec![1.0; 3]).unwrap()).unwrap();
        assert!((fit.coefficients[0] - 4.0).abs() < 1e-15);
        assert!(fit.rss < 1e-28);
    }

    #[test]
    fn normal_equations_example() {
        // slope = Sxy / Sxx = 3 / 5, intercept = 2 - 0.6 * 2.5
        let fit = ols(
            &[1.0, 2.0, 2.0, 3.0],
            &Design::with_intercept(&[&[1.0, 2.0, 3.0, 4.0]]).unwrap(),
        )
        .unwrap();
        assert!((fit.coefficients[0] - 0.5).abs() < 1e-14);
        assert!((fit.coefficients[1] - 0.6).abs() < 1e-14);
        assert!((fit.rss - 0.2).abs() < 1e-14);
    }

    #[test]
    fn rank_deficient() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let twice: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
        let err = ols(&[1.0, 0.0, 1.0, 0.0], &Design::with_intercept(&[&x, &twice]).unwrap()).unwrap_err();
        assert!(matches!(err, Error::SingularDesign { column: 2 }));
    }
}
