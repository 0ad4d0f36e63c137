//! Kernel evaluation and augmented kernel-block construction.
//!
//! The nonlinear model replaces raw feature rows by rows of
//! `Ω = [K(X, C), 1]`, where `C` is the reference set of all training
//! samples of the view (positive class stacked above negative) and the
//! trailing ones column houses the bias.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Kernel kind and parameters shared by both views.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelSpec {
    /// Plain dot product; equivalent to the linear model up to
    /// regularization differences.
    Linear,
    /// Gaussian radial basis function `exp(−‖x−y‖²/σ²)`.
    Rbf { sigma: f64 },
}

impl KernelSpec {
    /// Validates parameter ranges (RBF width must be positive).
    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelSpec::Linear => Ok(()),
            KernelSpec::Rbf { sigma } => {
                if sigma > 0.0 && sigma.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!(
                        "rbf sigma must be positive and finite, got {sigma}"
                    )))
                }
            }
        }
    }

    fn eval(&self, pairs: impl Iterator<Item = (f64, f64)>) -> f64 {
        match *self {
            KernelSpec::Linear => pairs.map(|(a, b)| a * b).sum(),
            KernelSpec::Rbf { sigma } => {
                let sq: f64 = pairs
                    .map(|(a, b)| {
                        let d = a - b;
                        d * d
                    })
                    .sum();
                (-sq / (sigma * sigma)).exp()
            }
        }
    }
}

/// Kernel value between two feature vectors. Symmetric in its arguments.
pub fn kernel_value(x: &[f64], y: &[f64], spec: &KernelSpec) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            context: "kernel evaluation",
            expected: format!("{} features", x.len()),
            found: format!("{} features", y.len()),
        });
    }
    Ok(spec.eval(x.iter().copied().zip(y.iter().copied())))
}

fn kernel_rows(x: &DMatrix<f64>, i: usize, c: &DMatrix<f64>, j: usize, spec: &KernelSpec) -> f64 {
    spec.eval((0..x.ncols()).map(|col| (x[(i, col)], c[(j, col)])))
}

/// `Ω = [K(X, C), 1]`: one row per sample of `X`, one column per reference
/// sample plus a trailing ones column.
pub fn augmented_kernel_block(
    x: &DMatrix<f64>,
    c: &DMatrix<f64>,
    spec: &KernelSpec,
) -> Result<DMatrix<f64>> {
    if c.nrows() == 0 {
        return Err(Error::InvalidParameter(
            "kernel reference set must be nonempty".into(),
        ));
    }
    if x.ncols() != c.ncols() {
        return Err(Error::DimensionMismatch {
            context: "augmented kernel block",
            expected: format!("{} features", c.ncols()),
            found: format!("{} features", x.ncols()),
        });
    }
    let mut omega = DMatrix::zeros(x.nrows(), c.nrows() + 1);
    for i in 0..x.nrows() {
        for j in 0..c.nrows() {
            omega[(i, j)] = kernel_rows(x, i, c, j, spec);
        }
        omega[(i, c.nrows())] = 1.0;
    }
    Ok(omega)
}

/// Full Gram matrix `K(X, X)`.
pub fn gram(x: &DMatrix<f64>, spec: &KernelSpec) -> DMatrix<f64> {
    let n = x.nrows();
    let mut g = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = kernel_rows(x, i, x, j, spec);
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const RBF1: KernelSpec = KernelSpec::Rbf { sigma: 1.0 };

    #[test]
    fn rbf_of_identical_points_is_one() {
        for sigma in [0.2, 1.0, 30.0] {
            let spec = KernelSpec::Rbf { sigma };
            assert_eq!(kernel_value(&[0.3, -2.0], &[0.3, -2.0], &spec).unwrap(), 1.0);
        }
    }

    #[test]
    fn rbf_unit_distance_is_inverse_e() {
        let v = kernel_value(&[0.0, 0.0], &[1.0, 0.0], &RBF1).unwrap();
        assert_relative_eq!(v, (-1.0f64).exp(), max_relative = 1e-15);
    }

    #[test]
    fn linear_kernel_is_dot_product() {
        assert_eq!(kernel_value(&[1.0, 2.0], &[3.0, 4.0], &KernelSpec::Linear).unwrap(), 11.0);
        assert!(kernel_value(&[1.0], &[1.0, 2.0], &KernelSpec::Linear).is_err());
    }

    #[test]
    fn kernel_is_exactly_symmetric() {
        let x = [0.37, -1.2, 5.5];
        let y = [2.25, 0.0, -3.125];
        for spec in [KernelSpec::Linear, RBF1, KernelSpec::Rbf { sigma: 0.3 }] {
            assert_eq!(
                kernel_value(&x, &y, &spec).unwrap(),
                kernel_value(&y, &x, &spec).unwrap()
            );
        }
    }

    #[test]
    fn augmented_block_shapes_and_values() {
        let point = DMatrix::from_row_slice(1, 2, &[0.5, 0.5]);
        let omega = augmented_kernel_block(&point, &point, &RBF1).unwrap();
        assert_eq!(omega, DMatrix::from_row_slice(1, 2, &[1.0, 1.0]));

        let basis = DMatrix::identity(2, 2);
        let omega = augmented_kernel_block(&basis, &basis, &KernelSpec::Linear).unwrap();
        assert_eq!(
            omega,
            DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 1.0, 0.0, 1.0, 1.0])
        );

        let x = DMatrix::from_fn(3, 2, |i, j| (i + j) as f64);
        let c = DMatrix::from_fn(5, 2, |i, j| (i * j) as f64);
        assert_eq!(augmented_kernel_block(&x, &c, &RBF1).unwrap().shape(), (3, 6));

        assert!(augmented_kernel_block(&x, &DMatrix::<f64>::zeros(0, 2), &RBF1).is_err());
    }

    #[test]
    fn rbf_gram_is_numerically_psd_with_unit_diagonal() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for trial in 0..10 {
            let n = 5 + (trial * 5) % 46;
            let x = DMatrix::from_fn(n, 3, |_, _| rng.random_range(-2.0..2.0));
            let g = gram(&x, &RBF1);
            assert_eq!(g, g.transpose());
            for i in 0..n {
                assert_eq!(g[(i, i)], 1.0);
            }
            let min_eig = g
                .clone()
                .symmetric_eigen()
                .eigenvalues
                .min();
            assert!(min_eig >= -1e-8, "n={n}: min eigenvalue {min_eig}");
        }
    }

    #[test]
    fn rbf_increases_toward_one_with_sigma() {
        let x = [0.0, 0.0];
        let y = [2.0, 1.0];
        let vals: Vec<f64> = [0.5, 2.0, 8.0]
            .iter()
            .map(|&s| kernel_value(&x, &y, &KernelSpec::Rbf { sigma: s }).unwrap())
            .collect();
        assert!(vals[0] < vals[1] && vals[1] < vals[2] && vals[2] < 1.0);
    }

    #[test]
    fn rejects_nonpositive_sigma() {
        assert!(KernelSpec::Rbf { sigma: 0.0 }.validate().is_err());
        assert!(KernelSpec::Rbf { sigma: -1.0 }.validate().is_err());
        assert!(KernelSpec::Rbf { sigma: f64::NAN }.validate().is_err());
        assert!(KernelSpec::Linear.validate().is_ok());
    }
}
