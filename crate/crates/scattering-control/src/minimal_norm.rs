use crate::ControlError;
use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Even Neumann partial sum against the pseudoinverse solution.
#[derive(Clone, Debug)]
pub struct NeumannComparison {
    /// `Σ_{k≤K} A^{2k} x`.
    pub series: DVector<f64>,
    /// `(I − A²)⁺ x` from the eigendecomposition.
    pub pseudoinverse: DVector<f64>,
    pub difference: f64,
    pub terms: usize,
}

/// Sums `Σ A^{2k} x` until the increment falls below `tol` (or `max_terms`)
/// and compares with the minimal-norm solution of `(I − A²)y = x`.
pub fn minimal_norm_neumann_check(
    a: &DMatrix<f64>,
    x: &DVector<f64>,
    tol: f64,
    max_terms: usize,
) -> Result<NeumannComparison, ControlError> {
    let asym = (a - a.transpose()).amax();
    let eig = SymmetricEigen::new(a.clone());
    let radius = eig.eigenvalues.amax();
    if asym > 1e-12 * a.amax().max(1.0) || radius > 1.0 + 1e-12 {
        return Err(ControlError::NotContraction { radius, asymmetry: asym });
    }
    let a2 = a * a;
    let mut term = x.clone();
    let mut series = x.clone();
    let mut terms = 1;
    while terms < max_terms {
        term = &a2 * term;
        series += &term;
        terms += 1;
        if term.norm() <= tol * x.norm().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    // Pseudoinverse of I − A² = Q diag(1 − λ²) Qᵀ, dropping the null directions.
    let q = &eig.eigenvectors;
    let coeffs = q.transpose() * x;
    let scaled = DVector::from_iterator(
        coeffs.len(),
        coeffs.iter().zip(eig.eigenvalues.iter()).map(|(c, l)| {
            let d = 1.0 - l * l;
            if d.abs() > 1e-12 {
                c / d
            } else {
                0.0
            }
        }),
    );
    let pseudoinverse = q * scaled;
    let difference = (&series - &pseudoinverse).norm();
    Ok(NeumannComparison { series, pseudoinverse, difference, terms })
}
