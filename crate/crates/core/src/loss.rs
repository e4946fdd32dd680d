//! Duality regularizer between a direction's writing probabilities and the
//! transposed write matrix of the other direction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{check_same_shape, GammaMatrix, Matrix, WritingProbabilityMatrix};
use crate::transpose::{transpose_path, transpose_path_strict, Transposition};

pub const DEFAULT_LAMBDA_DUAL: f64 = 1.0;

/// How argmax regressions in α are handled when deriving γ.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Monotonicity {
    /// Repair with a running maximum.
    #[default]
    Repair,
    /// Fail with [`Error::NonMonotone`].
    Strict,
}

impl Monotonicity {
    pub fn transpose(self, alpha: &WritingProbabilityMatrix) -> Result<Transposition> {
        match self {
            Monotonicity::Repair => transpose_path(alpha),
            Monotonicity::Strict => transpose_path_strict(alpha),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualLossReport {
    pub omega_f: f64,
    pub omega_b: f64,
    pub lambda_dual: f64,
    pub total_reg: f64,
}

/// Frobenius distance `||alpha - gamma||`.
pub fn omega(alpha: &Matrix, gamma: &Matrix) -> Result<f64> {
    Ok(alpha.sub(gamma)?.frobenius_norm())
}

/// Gradient of [`omega`] with respect to `alpha`, `(alpha - gamma) / omega`.
///
/// γ is held constant. Fails with [`Error::ZeroDistance`] where the norm is
/// not differentiable.
pub fn omega_gradient(alpha: &Matrix, gamma: &Matrix) -> Result<Matrix> {
    check_same_shape(alpha, gamma)?;
    let diff = alpha.sub(gamma)?;
    let norm = diff.frobenius_norm();
    if norm == 0.0 {
        return Err(Error::ZeroDistance);
    }
    Ok(diff.scale(1.0 / norm))
}

fn gamma_for(alpha: &WritingProbabilityMatrix, mode: Monotonicity) -> Result<GammaMatrix> {
    Ok(mode.transpose(alpha)?.gamma)
}

/// `lambda_dual * (omega_f + omega_b)` for a forward `I x J` and backward `J x I` pair.
pub fn dual_regularizer(
    alpha_f: &WritingProbabilityMatrix,
    alpha_b: &WritingProbabilityMatrix,
    lambda_dual: f64,
) -> Result<DualLossReport> {
    dual_regularizer_with(alpha_f, alpha_b, lambda_dual, Monotonicity::Repair)
}

pub fn dual_regularizer_with(
    alpha_f: &WritingProbabilityMatrix,
    alpha_b: &WritingProbabilityMatrix,
    lambda_dual: f64,
    mode: Monotonicity,
) -> Result<DualLossReport> {
    if !(lambda_dual.is_finite() && lambda_dual >= 0.0) {
        return Err(Error::invalid(
            "lambda_dual",
            format!("{lambda_dual} is not a finite non-negative value"),
        ));
    }
    let (i, j) = alpha_f.matrix().shape();
    if alpha_b.matrix().shape() != (j, i) {
        return Err(Error::dimension(format!(
            "forward alpha is {i}x{j} so backward alpha must be {j}x{i}, got {}x{}",
            alpha_b.target_len(),
            alpha_b.source_len()
        )));
    }
    let gamma_b = gamma_for(alpha_b, mode)?;
    let gamma_f = gamma_for(alpha_f, mode)?;
    let omega_f = omega(alpha_f.matrix(), &gamma_b.to_dense())?;
    let omega_b = omega(alpha_b.matrix(), &gamma_f.to_dense())?;
    Ok(DualLossReport {
        omega_f,
        omega_b,
        lambda_dual,
        total_reg: lambda_dual * (omega_f + omega_b),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> Matrix {
        Matrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn one_hot(positions: &[usize], cols: usize) -> WritingProbabilityMatrix {
        let rows: Vec<Vec<f64>> = positions
            .iter()
            .map(|&p| (1..=cols).map(|c| f64::from(u8::from(c == p))).collect())
            .collect();
        WritingProbabilityMatrix::from_rows(&rows).unwrap()
    }

    #[test]
    fn omega_examples() {
        let a = m(&[&[1.0, 0.0], &[0.0, 1.0]]);
        assert_eq!(omega(&a, &a).unwrap(), 0.0);

        let gamma = m(&[&[0.0, 1.0], &[0.0, 1.0]]);
        assert!((omega(&a, &gamma).unwrap() - 2f64.sqrt()).abs() < 1e-15);

        let zeros = Matrix::zeros(3, 4);
        let gamma = GammaMatrix::from_g(crate::path::GSequence::new(vec![1, 2, 4]).unwrap(), 4)
            .unwrap()
            .to_dense();
        assert!((omega(&zeros, &gamma).unwrap() - 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn omega_shape_mismatch() {
        assert!(matches!(
            omega(&Matrix::zeros(2, 3), &Matrix::zeros(3, 2)),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn gradient_hand_example() {
        let a = m(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let gamma = m(&[&[0.0, 1.0], &[0.0, 1.0]]);
        let grad = omega_gradient(&a, &gamma).unwrap();
        let s = 1.0 / 2f64.sqrt();
        let expected = [s, -s, 0.0, 0.0];
        for (got, want) in grad.as_slice().iter().zip(expected) {
            assert!((got - want).abs() < 1e-15);
        }
    }

    #[test]
    fn gradient_at_zero_is_an_error() {
        let a = m(&[&[0.5, 0.5]]);
        assert_eq!(omega_gradient(&a, &a), Err(Error::ZeroDistance));
    }

    #[test]
    fn gradient_direction_is_scale_invariant() {
        let gamma = m(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let a = m(&[&[0.3, 0.2], &[0.1, 0.9]]);
        let diff = a.sub(&gamma).unwrap();
        let base = omega_gradient(&a, &gamma).unwrap();
        for c in [0.01, 2.0, 1e3] {
            let scaled = Matrix::from_vec(
                2,
                2,
                gamma
                    .as_slice()
                    .iter()
                    .zip(diff.as_slice())
                    .map(|(g, d)| g + c * d)
                    .collect(),
            )
            .unwrap();
            let grad = omega_gradient(&scaled, &gamma).unwrap();
            for (x, y) in grad.as_slice().iter().zip(base.as_slice()) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn regularizer_zero_for_mutually_transposed_one_hots() {
        let alpha_f = one_hot(&[2, 2, 2, 3, 3, 5], 5);
        let alpha_b = one_hot(&[3, 3, 5, 6, 6], 6);
        let report = dual_regularizer(&alpha_f, &alpha_b, DEFAULT_LAMBDA_DUAL).unwrap();
        assert_eq!(report.omega_f, 0.0);
        assert_eq!(report.omega_b, 0.0);
        assert_eq!(report.total_reg, 0.0);
    }

    #[test]
    fn regularizer_lambda_zero_and_linear() {
        let alpha_f = WritingProbabilityMatrix::from_rows(&[
            vec![0.6, 0.3, 0.1],
            vec![0.2, 0.5, 0.3],
        ])
        .unwrap();
        let alpha_b =
            WritingProbabilityMatrix::from_rows(&[vec![0.9, 0.1], vec![0.4, 0.6], vec![0.3, 0.7]])
                .unwrap();
        let zero = dual_regularizer(&alpha_f, &alpha_b, 0.0).unwrap();
        assert_eq!(zero.total_reg, 0.0);
        assert!(zero.omega_f > 0.0 && zero.omega_b > 0.0);
        let one = dual_regularizer(&alpha_f, &alpha_b, 1.0).unwrap();
        let three = dual_regularizer(&alpha_f, &alpha_b, 3.0).unwrap();
        assert!((three.total_reg - 3.0 * one.total_reg).abs() < 1e-12);
    }

    #[test]
    fn regularizer_rejects_bad_inputs() {
        let alpha_f = one_hot(&[1, 2], 2);
        let wrong = one_hot(&[1, 2, 3], 3);
        assert!(matches!(
            dual_regularizer(&alpha_f, &wrong, 1.0),
            Err(Error::Dimension { .. })
        ));
        assert!(dual_regularizer(&alpha_f, &alpha_f, -1.0).is_err());
        assert!(dual_regularizer(&alpha_f, &alpha_f, f64::NAN).is_err());
    }
}
