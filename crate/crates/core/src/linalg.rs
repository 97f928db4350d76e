//! Small dense linear-algebra helpers shared across modules.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

/// Modified Gram–Schmidt with one re-orthogonalization pass.
///
/// Returns `None` when a column falls below `rel_tol` times its original norm
/// after projection, i.e. the columns are numerically dependent.
pub fn orthonormalize(columns: &Matrix, rel_tol: f64) -> Option<Matrix> {
    let (n, m) = columns.shape();
    let mut q = Matrix::zeros(n, m);
    for j in 0..m {
        let mut v = columns.column(j).clone_owned();
        let original = v.norm();
        if original == 0.0 {
            return None;
        }
        for _ in 0..2 {
            for i in 0..j {
                let qi = q.column(i);
                let c = qi.dot(&v);
                v.axpy(-c, &qi, 1.0);
            }
        }
        let norm = v.norm();
        if norm <= rel_tol * original {
            return None;
        }
        q.set_column(j, &(v / norm));
    }
    Some(q)
}

/// Extend an orthonormal frame to an orthonormal basis of the orthogonal
/// complement by sweeping the standard basis.
pub fn orthogonal_complement(frame: &Matrix) -> Matrix {
    let (n, m) = frame.shape();
    let mut basis: Vec<Vector> = (0..m).map(|j| frame.column(j).clone_owned()).collect();
    let mut out = Vec::with_capacity(n - m);
    let mut candidates: Vec<(usize, f64)> = (0..n)
        .map(|i| {
            let residual: f64 = 1.0 - (0..m).map(|j| frame[(i, j)] * frame[(i, j)]).sum::<f64>();
            (i, residual)
        })
        .collect();
    candidates.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    for (i, _) in candidates {
        if out.len() == n - m {
            break;
        }
        let mut v = Vector::zeros(n);
        v[i] = 1.0;
        for _ in 0..2 {
            for b in &basis {
                let c = b.dot(&v);
                v.axpy(-c, b, 1.0);
            }
        }
        let norm = v.norm();
        if norm > 1e-8 {
            let v = v / norm;
            basis.push(v.clone());
            out.push(v);
        }
    }
    if out.is_empty() {
        return Matrix::zeros(n, 0);
    }
    Matrix::from_columns(&out)
}

/// Thin singular value decomposition `a = U·diag(σ)·Vᵀ` by one-sided Jacobi
/// rotations. Accurate to high relative precision, which nalgebra's bidiagonal
/// SVD is not for some nearly orthogonal inputs.
#[derive(Clone, Debug)]
pub struct Svd {
    /// Left singular vectors; columns for zero singular values are zero.
    pub u: Matrix,
    /// Singular values in descending order.
    pub sigma: Vec<f64>,
    /// Right singular vectors as columns.
    pub v: Matrix,
}

pub fn svd(a: &Matrix) -> Svd {
    let (r, c) = a.shape();
    if r < c {
        let t = svd(&a.transpose());
        return Svd {
            u: t.v,
            sigma: t.sigma,
            v: t.u,
        };
    }
    let mut g = a.clone();
    let mut v = Matrix::identity(c, c);
    for _ in 0..80 {
        let mut rotated = false;
        for p in 0..c {
            for q in p + 1..c {
                let alpha = g.column(p).norm_squared();
                let beta = g.column(q).norm_squared();
                let gamma = g.column(p).dot(&g.column(q));
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                rotate_columns(&mut g, p, q, cs, sn);
                rotate_columns(&mut v, p, q, cs, sn);
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<(usize, f64)> = (0..c).map(|j| (j, g.column(j).norm())).collect();
    order.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));
    let mut u = Matrix::zeros(r, c);
    let mut vs = Matrix::zeros(c, c);
    let mut sigma = Vec::with_capacity(c);
    for (k, &(j, s)) in order.iter().enumerate() {
        if s > 0.0 {
            u.set_column(k, &(g.column(j) / s));
        }
        vs.set_column(k, &v.column(j));
        sigma.push(s);
    }
    Svd { u, sigma, v: vs }
}

fn rotate_columns(m: &mut Matrix, p: usize, q: usize, cs: f64, sn: f64) {
    for i in 0..m.nrows() {
        let a = m[(i, p)];
        let b = m[(i, q)];
        m[(i, p)] = cs * a - sn * b;
        m[(i, q)] = sn * a + cs * b;
    }
}

/// Spectral norm of a general matrix.
pub fn operator_norm(a: &Matrix) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    let gram = if a.nrows() < a.ncols() { a * a.transpose() } else { a.transpose() * a };
    symmetric_norm(&gram).sqrt()
}

/// Spectral norm of a symmetric matrix through its eigenvalues.
pub fn symmetric_norm(a: &Matrix) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    let eig = SymmetricEigen::new(a.clone());
    eig.eigenvalues.iter().map(|v| v.abs()).fold(0.0, f64::max)
}

/// Singular values in descending order.
pub fn singular_values(a: &Matrix) -> Vec<f64> {
    if a.is_empty() {
        return Vec::new();
    }
    svd(a).sigma
}

/// Product of the singular values of `b` (the volume factor of an `n×k` map
/// restricted to `R^k`).
pub fn volume_factor(b: &Matrix) -> f64 {
    if b.ncols() == 0 {
        return 1.0;
    }
    if b.nrows() < b.ncols() {
        return 0.0;
    }
    singular_values(b).iter().product()
}

/// Numerical rank with threshold relative to the largest singular value.
pub fn rank(a: &Matrix, rel_tol: f64) -> usize {
    let s = singular_values(a);
    match s.first() {
        None => 0,
        Some(&top) if top == 0.0 => 0,
        Some(&top) => s.iter().filter(|&&v| v > rel_tol * top).count(),
    }
}

/// Orthonormal basis of the kernel of `a` (columns), from the right singular
/// vectors whose singular values fall below `rel_tol` times the largest.
pub fn kernel_basis(a: &Matrix, rel_tol: f64) -> Matrix {
    let (r, c) = a.shape();
    if c == 0 {
        return Matrix::zeros(0, 0);
    }
    if r == 0 {
        return Matrix::identity(c, c);
    }
    // Pad to a square matrix so the SVD returns a full right basis.
    let mut padded = Matrix::zeros(r.max(c), c);
    padded.view_mut((0, 0), (r, c)).copy_from(a);
    let dec = svd(&padded);
    let top = dec.sigma.first().copied().unwrap_or(0.0);
    let cols: Vec<Vector> = (0..dec.sigma.len())
        .filter(|&i| dec.sigma[i] <= rel_tol * top.max(f64::MIN_POSITIVE))
        .map(|i| dec.v.column(i).clone_owned())
        .collect();
    if cols.is_empty() {
        return Matrix::zeros(c, 0);
    }
    orthonormalize(&Matrix::from_columns(&cols), 1e-12).unwrap_or_else(|| Matrix::zeros(c, 0))
}

/// Central finite-difference Jacobian of `f` at `x`.
pub fn finite_difference_jacobian<F>(f: F, x: &Vector, step: f64) -> Matrix
where
    F: Fn(&Vector) -> Vector,
{
    let n = x.len();
    let f0 = f(x);
    let mut jac = Matrix::zeros(f0.len(), n);
    for j in 0..n {
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[j] += step;
        xm[j] -= step;
        let col = (f(&xp) - f(&xm)) / (2.0 * step);
        jac.set_column(j, &col);
    }
    jac
}

pub fn max_abs(a: &Matrix) -> f64 {
    a.iter().map(|v| v.abs()).fold(0.0, f64::max)
}
