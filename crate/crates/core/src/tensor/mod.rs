//! Dense complex tensors and the matrix routines every fidelity reduces to.
//!
//! A [`Tensor`] is an `ndarray` dynamic-rank array of `Complex64` in row-major
//! (C) order. Axis order is fixed per tensor kind and documented where the
//! kind is defined (MPS `Γ = (left, phys, right)`, TTN `w = (top, left_child,
//! right_child)`, two-site gates `(out1, out2, in1, in2)`).

mod linalg;

pub use linalg::{
    expm_hermitian, hermitian_decompose, optimal_isometry, polar_isometry, psd_factor,
    singular_values, svd_truncate, trace_norm, HermitianDecomposition, SvdResult,
    TruncationSpec, PSD_CLIP,
};

use ndarray::{Array2, ArrayD, ArrayView2, Axis, IxDyn};
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type Tensor = ArrayD<C64>;

/// Contracts `a` with `b` over the given `(axis_of_a, axis_of_b)` pairs.
///
/// The result carries the unpaired axes of `a` followed by the unpaired axes
/// of `b`, each group in its original order.
pub fn contract(a: &Tensor, b: &Tensor, axis_pairs: &[(usize, usize)]) -> Result<Tensor> {
    let (ra, rb) = (a.ndim(), b.ndim());
    let mut used_a = vec![false; ra];
    let mut used_b = vec![false; rb];
    for &(i, j) in axis_pairs {
        if i >= ra || j >= rb {
            return Err(Error::Argument(format!(
                "axis pair ({i}, {j}) out of range for ranks ({ra}, {rb})"
            )));
        }
        if used_a[i] || used_b[j] {
            return Err(Error::Argument(format!("axis repeated in pair ({i}, {j})")));
        }
        used_a[i] = true;
        used_b[j] = true;
        if a.shape()[i] != b.shape()[j] {
            return Err(Error::Dimension(format!(
                "contracted extents differ: axis {i} has {} but axis {j} has {}",
                a.shape()[i],
                b.shape()[j]
            )));
        }
    }
    let free_a: Vec<usize> = (0..ra).filter(|&i| !used_a[i]).collect();
    let free_b: Vec<usize> = (0..rb).filter(|&j| !used_b[j]).collect();
    let paired_a: Vec<usize> = axis_pairs.iter().map(|p| p.0).collect();
    let paired_b: Vec<usize> = axis_pairs.iter().map(|p| p.1).collect();

    let rows: usize = free_a.iter().map(|&i| a.shape()[i]).product();
    let inner: usize = paired_a.iter().map(|&i| a.shape()[i]).product();
    let cols: usize = free_b.iter().map(|&j| b.shape()[j]).product();

    let perm_a: Vec<usize> = free_a.iter().chain(&paired_a).copied().collect();
    let perm_b: Vec<usize> = paired_b.iter().chain(&free_b).copied().collect();
    let ma = a.view().permuted_axes(perm_a).as_standard_layout().into_owned();
    let mb = b.view().permuted_axes(perm_b).as_standard_layout().into_owned();
    let ma = ma.into_shape_clone((rows, inner))?;
    let mb = mb.into_shape_clone((inner, cols))?;
    let out = ma.dot(&mb);

    let shape: Vec<usize> = free_a
        .iter()
        .map(|&i| a.shape()[i])
        .chain(free_b.iter().map(|&j| b.shape()[j]))
        .collect();
    Ok(out.into_shape_clone(IxDyn(&shape))?)
}

/// Views a rank-2 tensor as a matrix.
pub fn as_matrix(t: &Tensor) -> Result<ArrayView2<'_, C64>> {
    if t.ndim() != 2 {
        return Err(Error::Argument(format!("expected rank-2 tensor, got rank {}", t.ndim())));
    }
    Ok(t.view().into_dimensionality()?)
}

/// Conjugate transpose.
pub fn dagger(m: &ArrayView2<'_, C64>) -> Array2<C64> {
    m.t().mapv(|z| z.conj())
}

pub fn max_abs<'a, I: IntoIterator<Item = &'a C64>>(it: I) -> f64 {
    it.into_iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn identity(n: usize) -> Array2<C64> {
    Array2::from_diag_elem(n, C64::new(1.0, 0.0))
}

/// `‖m†m − 1‖_max` for column isometries (or `‖mm† − 1‖` when `rows` is set).
pub fn isometry_residual(m: &ArrayView2<'_, C64>, rows: bool) -> f64 {
    let g = if rows { m.dot(&dagger(m)) } else { dagger(m).dot(m) };
    let n = g.nrows();
    max_abs((&g - &identity(n)).iter())
}

/// Kronecker product of two matrices.
pub fn kron(a: &ArrayView2<'_, C64>, b: &ArrayView2<'_, C64>) -> Array2<C64> {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    let mut out = Array2::zeros((ar * br, ac * bc));
    for i in 0..ar {
        for j in 0..ac {
            let s = a[[i, j]];
            if s == C64::new(0.0, 0.0) {
                continue;
            }
            out.slice_mut(ndarray::s![i * br..(i + 1) * br, j * bc..(j + 1) * bc])
                .zip_mut_with(b, |o, &x| *o = s * x);
        }
    }
    out
}

/// Tensor with i.i.d. standard complex Gaussian entries.
pub fn random_tensor<R: Rng + ?Sized>(shape: &[usize], rng: &mut R) -> Tensor {
    let n: usize = shape.iter().product();
    let data: Vec<C64> = (0..n)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
        })
        .collect();
    ArrayD::from_shape_vec(IxDyn(shape), data).expect("length matches shape")
}

pub fn random_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Array2<C64> {
    random_tensor(&[rows, cols], rng)
        .into_dimensionality()
        .expect("rank 2")
}

/// Haar-like random isometry: orthonormal rows when `rows <= cols`,
/// orthonormal columns otherwise.
pub fn random_isometry<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Array2<C64> {
    polar_isometry(&random_matrix(rows, cols, rng).view()).expect("gaussian matrices are well conditioned")
}

pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Array2<C64> {
    random_isometry(n, n, rng)
}

/// Sums the squared moduli along all entries.
pub fn norm_sqr<'a, I: IntoIterator<Item = &'a C64>>(it: I) -> f64 {
    it.into_iter().map(|z| z.norm_sqr()).sum()
}

pub(crate) fn scale_axis(t: &mut ndarray::Array3<C64>, axis: usize, w: &[f64]) {
    for (i, mut lane) in t.axis_iter_mut(Axis(axis)).enumerate() {
        lane.mapv_inplace(|z| z * w[i]);
    }
}
