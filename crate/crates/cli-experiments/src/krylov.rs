use grid_core::Cauchy64;
use nalgebra::{DMatrix, SymmetricEigen};
use scattering_control::Setup64;

#[derive(Clone, Debug)]
pub struct KrylovEstimate {
    /// Largest Ritz value of `(π*Rπ*)²`, a lower bound for `‖π*Rπ*R‖` on `H*`.
    pub estimate: f64,
    /// Span vectors used.
    pub span: usize,
    /// Dimension left after dropping numerically dependent directions.
    pub dimension: usize,
}

/// Rayleigh–Ritz estimate of `‖π*Rπ*R‖` from the iterates of the scattering
/// control series, at no extra wave solves.
///
/// The increments `d_k = h_{k+1} − h_k` satisfy `d_{k+1} = (π*Rπ*)² d_k`,
/// so `⟨d_i, d_{j+1}⟩` is the operator compressed onto the span of
/// `d_0, …, d_{n−2}`. The Gram matrix of that span is whitened, directions
/// below `1e-10` of its top eigenvalue are dropped, and the largest
/// eigenvalue of the compressed matrix is returned.
///
/// `iterates` are `h_0, h_1, …` in order. Returns `None` when fewer than
/// three are given or every increment vanishes.
pub fn ritz_norm_estimate(setup: &Setup64, iterates: &[Cauchy64]) -> Option<KrylovEstimate> {
    if iterates.len() < 3 {
        return None;
    }
    let d: Vec<Cauchy64> = iterates.windows(2).map(|w| w[1].minus(&w[0])).collect();
    let n = d.len() - 1;
    let gram = DMatrix::from_fn(n, n, |i, j| setup.inner(&d[i], &d[j]));
    let image = DMatrix::from_fn(n, n, |i, j| setup.inner(&d[i], &d[j + 1]));
    let gram = (&gram + gram.transpose()) * 0.5;
    let image = (&image + image.transpose()) * 0.5;
    let eig = SymmetricEigen::new(gram);
    let top = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
    if !(top > 0.0) {
        return None;
    }
    let keep: Vec<usize> = (0..n).filter(|&i| eig.eigenvalues[i] > 1e-10 * top).collect();
    let w = DMatrix::from_fn(n, keep.len(), |r, c| eig.eigenvectors[(r, keep[c])] / eig.eigenvalues[keep[c]].sqrt());
    let c = w.transpose() * image * &w;
    let c = (&c + c.transpose()) * 0.5;
    let estimate = SymmetricEigen::new(c).eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Some(KrylovEstimate { estimate, span: n, dimension: keep.len() })
}
