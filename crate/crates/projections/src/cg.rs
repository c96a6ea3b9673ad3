use grid_core::Real;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CgStats {
    pub iterations: usize,
    /// Final residual norm divided by the right-hand-side norm.
    pub relative_residual: f64,
    pub converged: bool,
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(x, y)| *x * *y).sum()
}

/// Unpreconditioned conjugate gradients for an SPD operator, starting from `x`.
///
/// Stops when `‖b − A x‖ ≤ tol ‖b‖`. A zero right-hand side returns `x = 0`.
pub fn conjugate_gradient<T: Real>(
    mut apply: impl FnMut(&[T], &mut [T]),
    b: &[T],
    x: &mut [T],
    tol: T,
    max_iter: usize,
) -> CgStats {
    let n = b.len();
    let bnorm = dot(b, b).sqrt();
    if bnorm == T::zero() {
        x.iter_mut().for_each(|v| *v = T::zero());
        return CgStats { iterations: 0, relative_residual: 0.0, converged: true };
    }
    let mut ax = vec![T::zero(); n];
    apply(x, &mut ax);
    let mut r: Vec<T> = b.iter().zip(&ax).map(|(bi, ai)| *bi - *ai).collect();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    let target = tol * bnorm;
    let mut ap = vec![T::zero(); n];
    let mut it = 0;
    while rr.sqrt() > target && it < max_iter {
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > T::zero()) {
            break;
        }
        let alpha = rr / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        rr = rr_new;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
        it += 1;
    }
    let rel = (rr.sqrt() / bnorm).to_f64_lossy();
    CgStats { iterations: it, relative_residual: rel, converged: rr.sqrt() <= target }
}
