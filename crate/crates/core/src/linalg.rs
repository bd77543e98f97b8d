//! Dense complex linear algebra helpers shared by every module.
//!
//! Tensor products are ordered big-endian: for dims `[d0, d1, ...]` the flat
//! index of `(i0, i1, ...)` is `((i0 * d1) + i1) * d2 + ...`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;
pub type RMat = DMatrix<f64>;

/// Default comparison tolerance for dense numerical checks.
pub const DEFAULT_TOL: f64 = 1e-9;

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[inline]
pub fn cr(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn to_complex(m: &RMat) -> CMat {
    m.map(cr)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Kronecker product of a list of matrices, left to right.
pub fn kron_all<'a, I: IntoIterator<Item = &'a CMat>>(mats: I) -> CMat {
    mats.into_iter()
        .fold(CMat::identity(1, 1), |acc, m| acc.kronecker(m))
}

pub fn ket(dim: usize, index: usize) -> CVec {
    let mut v = CVec::zeros(dim);
    v[index] = cr(1.0);
    v
}

pub fn ketbra(dim: usize, i: usize, j: usize) -> CMat {
    let mut m = CMat::zeros(dim, dim);
    m[(i, j)] = cr(1.0);
    m
}

pub fn projector(v: &CVec) -> CMat {
    v * v.adjoint()
}

/// Unnormalized maximally entangled projector `|1⟩⟩⟨⟨1|` on `C^d ⊗ C^d`.
pub fn max_entangled_projector(d: usize) -> CMat {
    let mut m = CMat::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            m[(i * d + i, j * d + j)] = cr(1.0);
        }
    }
    m
}

/// `|V⟩⟩ = Σ_i |i⟩ ⊗ V|i⟩`, so `|V⟩⟩⟨⟨V|` is the Choi matrix of `X ↦ V X V†`.
pub fn choi_vector(v: &CMat) -> CVec {
    let rows = v.nrows();
    CVec::from_fn(v.ncols() * rows, |k, _| v[(k % rows, k / rows)])
}

pub fn trace(m: &CMat) -> Complex64 {
    m.trace()
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch in max_abs_diff");
    a.iter()
        .zip(b.iter())
        .fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()) * cr(0.5)
}

/// Largest entry of `V†V - 1`.
pub fn isometry_residual(v: &CMat) -> f64 {
    let g = v.adjoint() * v;
    max_abs_diff(&g, &CMat::identity(g.nrows(), g.ncols()))
}

/// Largest entry of both `U†U - 1` and `UU† - 1`.
pub fn unitarity_residual(u: &CMat) -> f64 {
    if u.nrows() != u.ncols() {
        return f64::INFINITY;
    }
    isometry_residual(u).max(isometry_residual(&u.adjoint()))
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues sorted descending.
/// Eigenvectors are the columns of the returned matrix.
pub fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let h = hermitian_part(m);
    let eig = SymmetricEigen::new(h);
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Eigenvalues of the Hermitian part of `m`, sorted descending. Cheaper than
/// [`hermitian_eigen`] since no eigenvectors are accumulated.
pub fn hermitian_eigenvalues(m: &CMat) -> Vec<f64> {
    let mut vals: Vec<f64> = hermitian_part(m).symmetric_eigenvalues().iter().copied().collect();
    vals.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    vals
}

/// Rotate a vector so that its first component with modulus above `eps` is
/// real and positive.
pub fn fix_phase(v: &mut CVec, eps: f64) {
    if let Some(z) = v.iter().find(|z| z.norm() > eps).copied() {
        let phase = z.conj() / z.norm();
        for x in v.iter_mut() {
            *x *= phase;
        }
    }
}

fn spectral_map(m: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let (vals, vecs) = hermitian_eigen(m);
    let n = vals.len();
    let mut scaled = vecs.clone();
    for k in 0..n {
        let s = cr(f(vals[k]));
        for i in 0..n {
            scaled[(i, k)] *= s;
        }
    }
    scaled * vecs.adjoint()
}

/// Square root of a positive semidefinite matrix (negative eigenvalues clipped).
pub fn psd_sqrt(m: &CMat) -> CMat {
    spectral_map(m, |x| x.max(0.0).sqrt())
}

/// Inverse square root of a positive definite matrix.
pub fn pd_inv_sqrt(m: &CMat, floor: f64) -> Result<CMat> {
    let vals = hermitian_eigenvalues(m);
    if let Some(&min) = vals.last() {
        if min <= floor {
            return Err(Error::Numerical(format!(
                "matrix is not positive definite (smallest eigenvalue {min:.3e})"
            )));
        }
    }
    Ok(spectral_map(m, |x| 1.0 / x.sqrt()))
}

/// Trace norm `‖M‖₁`, the sum of singular values; from eigenvalues when
/// `m` is Hermitian.
pub fn trace_norm(m: &CMat) -> f64 {
    let scale = max_abs(m).max(1.0);
    if max_abs_diff(m, &m.adjoint()) <= 1e-14 * scale {
        return hermitian_eigenvalues(m).iter().map(|v| v.abs()).sum();
    }
    m.clone().singular_values().iter().sum()
}

/// Map from flat indices of the permuted space to flat indices of the
/// original space. New factor `k` is old factor `perm[k]`.
pub fn subsystem_index_map(dims: &[usize], perm: &[usize]) -> Vec<usize> {
    assert_eq!(dims.len(), perm.len(), "permutation length mismatch");
    let mut seen = vec![false; perm.len()];
    for &p in perm {
        assert!(p < perm.len() && !seen[p], "not a permutation: {perm:?}");
        seen[p] = true;
    }
    let total: usize = dims.iter().product();
    // Strides of the original layout.
    let mut strides = vec![1usize; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * dims[k + 1];
    }
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let mut map = Vec::with_capacity(total);
    let mut digits = vec![0usize; dims.len()];
    for _ in 0..total {
        let old: usize = digits
            .iter()
            .zip(perm)
            .map(|(&digit, &p)| digit * strides[p])
            .sum();
        map.push(old);
        for k in (0..digits.len()).rev() {
            digits[k] += 1;
            if digits[k] < new_dims[k] {
                break;
            }
            digits[k] = 0;
        }
    }
    map
}

/// Reorder the tensor factors of an operator. New factor `k` is old factor
/// `perm[k]`.
pub fn permute_subsystems(m: &CMat, dims: &[usize], perm: &[usize]) -> CMat {
    let map = subsystem_index_map(dims, perm);
    assert_eq!(m.nrows(), map.len(), "operator does not match dims {dims:?}");
    CMat::from_fn(map.len(), map.len(), |i, j| m[(map[i], map[j])])
}

/// Reorder the tensor factors of a vector.
pub fn permute_vector(v: &CVec, dims: &[usize], perm: &[usize]) -> CVec {
    let map = subsystem_index_map(dims, perm);
    CVec::from_fn(map.len(), |i, _| v[map[i]])
}

/// Permutation that moves the factors in `front` to the front (in the given
/// order), keeping the remaining factors in their original order.
pub fn bring_to_front(n_factors: usize, front: &[usize]) -> Vec<usize> {
    let mut perm: Vec<usize> = front.to_vec();
    perm.extend((0..n_factors).filter(|k| !front.contains(k)));
    perm
}

pub fn inverse_permutation(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (k, &p) in perm.iter().enumerate() {
        inv[p] = k;
    }
    inv
}

/// Trace out the listed factors.
pub fn partial_trace(m: &CMat, dims: &[usize], traced: &[usize]) -> CMat {
    let kept: Vec<usize> = (0..dims.len()).filter(|k| !traced.contains(k)).collect();
    let mut perm = kept.clone();
    perm.extend_from_slice(traced);
    let reordered = permute_subsystems(m, dims, &perm);
    let keep_dim: usize = kept.iter().map(|&k| dims[k]).product();
    let trace_dim: usize = traced.iter().map(|&k| dims[k]).product();
    trace_trailing(&reordered, keep_dim, trace_dim)
}

/// Trace out the trailing factor of `A ⊗ B` with `dim(A) = left`.
pub fn trace_trailing(m: &CMat, left: usize, right: usize) -> CMat {
    CMat::from_fn(left, left, |i, j| {
        (0..right).map(|k| m[(i * right + k, j * right + k)]).sum()
    })
}

/// Trace out the leading factor of `A ⊗ B` with `dim(A) = left`.
pub fn trace_leading(m: &CMat, left: usize, right: usize) -> CMat {
    CMat::from_fn(right, right, |i, j| {
        (0..left).map(|k| m[(k * right + i, k * right + j)]).sum()
    })
}

/// Transpose the listed factors.
pub fn partial_transpose(m: &CMat, dims: &[usize], systems: &[usize]) -> CMat {
    let total: usize = dims.iter().product();
    let mut strides = vec![1usize; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * dims[k + 1];
    }
    CMat::from_fn(total, total, |i, j| {
        let (mut a, mut b) = (i, j);
        for &s in systems {
            let di = (i / strides[s]) % dims[s];
            let dj = (j / strides[s]) % dims[s];
            a = a - di * strides[s] + dj * strides[s];
            b = b - dj * strides[s] + di * strides[s];
        }
        m[(a, b)]
    })
}

/// `Σ_k (1 ⊗ K_k) ρ (1 ⊗ K_k)†` where the identity acts on a leading factor
/// of dimension `left`.
pub fn apply_kraus_trailing(state: &CMat, left: usize, kraus: &[CMat]) -> CMat {
    let a = state.nrows() / left;
    assert_eq!(a * left, state.nrows(), "state does not factor as left ⊗ A");
    let b = kraus.first().map_or(a, |k| k.nrows());
    let mut out = CMat::zeros(left * b, left * b);
    for k in kraus {
        assert_eq!(k.ncols(), a, "Kraus operator input dimension mismatch");
        let kd = k.adjoint();
        for l in 0..left {
            for lp in 0..left {
                let block = state.view((l * a, lp * a), (a, a));
                let mapped = k * block * &kd;
                let mut dst = out.view_mut((l * b, lp * b), (b, b));
                dst += mapped;
            }
        }
    }
    out
}

/// `Σ_k (K_k ⊗ 1) ρ (K_k ⊗ 1)†` where the identity acts on a trailing factor
/// of dimension `right`.
pub fn apply_kraus_leading(state: &CMat, right: usize, kraus: &[CMat]) -> CMat {
    let a = state.nrows() / right;
    assert_eq!(a * right, state.nrows(), "state does not factor as A ⊗ right");
    let b = kraus.first().map_or(a, |k| k.nrows());
    let n = state.ncols();
    let mut out = CMat::zeros(b * right, b * right);
    for k in kraus {
        assert_eq!(k.ncols(), a, "Kraus operator input dimension mismatch");
        // (K ⊗ 1) ρ
        let mut left = CMat::zeros(b * right, n);
        for bi in 0..b {
            for ai in 0..a {
                let coef = k[(bi, ai)];
                if coef.norm() == 0.0 {
                    continue;
                }
                let src = state.rows(ai * right, right);
                let mut dst = left.rows_mut(bi * right, right);
                dst += src * coef;
            }
        }
        // ... (K ⊗ 1)†
        for bj in 0..b {
            for aj in 0..a {
                let coef = k[(bj, aj)].conj();
                if coef.norm() == 0.0 {
                    continue;
                }
                let src = left.columns(aj * right, right);
                let mut dst = out.columns_mut(bj * right, right);
                dst += src * coef;
            }
        }
    }
    out
}

/// Apply the map with Choi matrix `choi` (input ⊗ output ordering) to the
/// trailing factor of `state`.
pub fn apply_choi_trailing(state: &CMat, left: usize, choi: &CMat, d_in: usize, d_out: usize) -> CMat {
    assert_eq!(state.nrows(), left * d_in, "state does not factor as left ⊗ d_in");
    assert_eq!(choi.nrows(), d_in * d_out, "Choi dimension mismatch");
    let mut out = CMat::zeros(left * d_out, left * d_out);
    for l in 0..left {
        for lp in 0..left {
            let mut dst = out.view_mut((l * d_out, lp * d_out), (d_out, d_out));
            for a in 0..d_in {
                for ap in 0..d_in {
                    let x = state[(l * d_in + a, lp * d_in + ap)];
                    if x.norm() == 0.0 {
                        continue;
                    }
                    let src = choi.view((a * d_out, ap * d_out), (d_out, d_out));
                    dst += src * x;
                }
            }
        }
    }
    out
}

/// Conjugate by the permutation unitary `P|k⟩ = |map[k]⟩`.
pub fn conjugate_by_index_map(m: &CMat, map: &[usize]) -> CMat {
    let n = map.len();
    let mut out = CMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            out[(map[i], map[j])] = m[(i, j)];
        }
    }
    out
}

/// Dense permutation matrix with `P|k⟩ = |map[k]⟩`.
pub fn permutation_matrix(map: &[usize]) -> CMat {
    let n = map.len();
    let mut p = CMat::zeros(n, n);
    for (k, &target) in map.iter().enumerate() {
        p[(target, k)] = cr(1.0);
    }
    p
}

/// Modified Gram–Schmidt step: orthogonalize `v` against `basis` (twice, for
/// stability) and return its remaining norm.
pub fn orthogonalize_real(v: &mut DVector<f64>, basis: &[DVector<f64>]) -> f64 {
    for _ in 0..2 {
        for b in basis {
            let overlap = b.dot(v);
            v.axpy(-overlap, b, 1.0);
        }
    }
    v.norm()
}

/// Make the first component of `v` with modulus above `eps` positive.
pub fn fix_sign_real(v: &mut DVector<f64>, eps: f64) {
    if let Some(&x) = v.iter().find(|x| x.abs() > eps) {
        if x < 0.0 {
            v.neg_mut();
        }
    }
}
