use ndarray::{Array1, Array2, ArrayView2, Axis, ShapeBuilder};
use ndarray_linalg::{Eigh, JobSvd, SVDDC, SVD, UPLO};
use num_complex::Complex64 as C64;

use super::{dagger, max_abs};
use crate::error::{Error, Result};

/// Relative eigenvalue clip shared by every PSD routine: eigenvalues in
/// `[-PSD_CLIP·λ_max, PSD_CLIP·λ_max]` are treated as zero, anything more
/// negative is an error.
pub const PSD_CLIP: f64 = 1e-12;

/// Bounds applied when truncating a singular value decomposition.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruncationSpec {
    /// Keep at most this many singular values (`None` = unbounded).
    pub max_rank: Option<usize>,
    /// Drop trailing singular values whose squared sum is at most this.
    pub weight_cutoff: f64,
}

impl TruncationSpec {
    pub fn unbounded() -> Self {
        Self { max_rank: None, weight_cutoff: 0.0 }
    }

    pub fn new(max_rank: Option<usize>, weight_cutoff: f64) -> Result<Self> {
        if max_rank == Some(0) {
            return Err(Error::Argument("max_rank must be positive".into()));
        }
        if !(weight_cutoff >= 0.0) {
            return Err(Error::Argument(format!("weight_cutoff must be non-negative, got {weight_cutoff}")));
        }
        Ok(Self { max_rank, weight_cutoff })
    }

    pub fn rank(max_rank: usize) -> Self {
        Self { max_rank: Some(max_rank.max(1)), weight_cutoff: 0.0 }
    }

    /// Number of leading singular values kept out of `s` (sorted descending).
    fn kept(&self, s: &[f64]) -> usize {
        let mut k = s.len();
        if let Some(r) = self.max_rank {
            k = k.min(r);
        }
        let mut dropped: f64 = s[k..].iter().map(|x| x * x).sum();
        while k > 1 {
            let next = dropped + s[k - 1] * s[k - 1];
            if next > self.weight_cutoff {
                break;
            }
            dropped = next;
            k -= 1;
        }
        k
    }
}

impl Default for TruncationSpec {
    fn default() -> Self {
        Self::unbounded()
    }
}

/// `m ≈ u · diag(s) · v†` with `u`, `v` column-isometric.
#[derive(Clone, Debug)]
pub struct SvdResult {
    pub u: Array2<C64>,
    pub s: Array1<f64>,
    pub v: Array2<C64>,
    pub discarded_weight: f64,
}

impl SvdResult {
    pub fn rank(&self) -> usize {
        self.s.len()
    }

    pub fn reconstruct(&self) -> Array2<C64> {
        let mut us = self.u.clone();
        for (mut col, &sv) in us.axis_iter_mut(Axis(1)).zip(self.s.iter()) {
            col.mapv_inplace(|z| z * sv);
        }
        us.dot(&dagger(&self.v.view()))
    }
}

fn check_finite(m: &ArrayView2<'_, C64>) -> Result<()> {
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numeric("matrix contains non-finite entries".into()));
    }
    Ok(())
}

/// Thin SVD with `u: r×k`, `vt: k×c`. Falls back to the QR-iteration driver
/// when divide-and-conquer fails to converge.
fn thin_svd(m: &ArrayView2<'_, C64>) -> Result<(Array2<C64>, Array1<f64>, Array2<C64>)> {
    check_finite(m)?;
    let (r, c) = m.dim();
    let k = r.min(c);
    if k == 0 {
        return Ok((Array2::zeros((r, 0)), Array1::zeros(0), Array2::zeros((0, c))));
    }
    let owned = m.as_standard_layout().into_owned();
    match owned.svddc(JobSvd::Some) {
        Ok((Some(u), s, Some(vt))) => Ok((u, s, vt)),
        _ => {
            let (u, s, vt) = owned.svd(true, true)?;
            let u = u.ok_or_else(|| Error::Numeric("SVD returned no left vectors".into()))?;
            let vt = vt.ok_or_else(|| Error::Numeric("SVD returned no right vectors".into()))?;
            Ok((u.slice_move(ndarray::s![.., ..k]), s, vt.slice_move(ndarray::s![..k, ..])))
        }
    }
}

/// Singular values only, descending.
pub fn singular_values(m: &ArrayView2<'_, C64>) -> Result<Array1<f64>> {
    check_finite(m)?;
    if m.nrows().min(m.ncols()) == 0 {
        return Ok(Array1::zeros(0));
    }
    let owned = m.as_standard_layout().into_owned();
    match owned.svddc(JobSvd::None) {
        Ok((_, s, _)) => Ok(s),
        Err(_) => Ok(owned.svd(false, false)?.1),
    }
}

/// Truncated singular value decomposition.
pub fn svd_truncate(m: &ArrayView2<'_, C64>, spec: &TruncationSpec) -> Result<SvdResult> {
    let (u, s, vt) = thin_svd(m)?;
    let k = if s.is_empty() { 0 } else { spec.kept(s.as_slice().expect("contiguous")) };
    let discarded_weight = s.iter().skip(k).map(|x| x * x).sum();
    Ok(SvdResult {
        u: u.slice_move(ndarray::s![.., ..k]),
        s: s.slice_move(ndarray::s![..k]),
        v: dagger(&vt.slice(ndarray::s![..k, ..])),
        discarded_weight,
    })
}

/// Sum of singular values.
pub fn trace_norm(m: &ArrayView2<'_, C64>) -> Result<f64> {
    Ok(singular_values(m)?.sum())
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues descending.
#[derive(Clone, Debug)]
pub struct HermitianDecomposition {
    pub values: Array1<f64>,
    /// Eigenvectors as columns, in the order of `values`.
    pub vectors: Array2<C64>,
}

pub fn hermitian_decompose(m: &ArrayView2<'_, C64>) -> Result<HermitianDecomposition> {
    let (r, c) = m.dim();
    if r != c {
        return Err(Error::Argument(format!("Hermitian input must be square, got {r}x{c}")));
    }
    check_finite(m)?;
    let scale = max_abs(m.iter());
    let asym = max_abs((m - &dagger(m)).iter());
    if asym > 1e-10 * scale {
        return Err(Error::Argument(format!(
            "matrix is not Hermitian: asymmetry {asym:e} vs scale {scale:e}"
        )));
    }
    if r == 0 {
        return Ok(HermitianDecomposition { values: Array1::zeros(0), vectors: Array2::zeros((0, 0)) });
    }
    // Symmetrize so roundoff in the input does not leak into the eigenvectors.
    // Column-major input: the LAPACK wrapper conjugates eigenvectors of
    // row-major complex matrices.
    let mut sym = Array2::<C64>::zeros((r, r).f());
    sym.zip_mut_with(m, |o, &x| *o = x);
    sym.zip_mut_with(&dagger(m), |o, &x| *o = (*o + x) * 0.5);
    let vals = match heevd(&mut sym) {
        Some(v) => v,
        None => {
            sym.zip_mut_with(m, |o, &x| *o = x);
            sym.zip_mut_with(&dagger(m), |o, &x| *o = (*o + x) * 0.5);
            let (v, vecs) = sym.eigh(UPLO::Lower)?;
            sym = vecs;
            v
        }
    };
    let values: Array1<f64> = vals.iter().rev().copied().collect();
    let mut vectors = sym;
    vectors.invert_axis(Axis(1));
    Ok(HermitianDecomposition { values, vectors: vectors.as_standard_layout().into_owned() })
}

/// Divide-and-conquer Hermitian eigensolver (`zheevd`) on a column-major
/// matrix, overwritten by the eigenvectors. Eigenvalues come back ascending;
/// `None` if LAPACK reports a failure.
fn heevd(a: &mut Array2<C64>) -> Option<Array1<f64>> {
    use lapack_sys::__BindgenComplex as Z;
    use std::os::raw::{c_char, c_int};
    let n = a.nrows();
    debug_assert!(a.t().is_standard_layout());
    let nn = c_int::try_from(n).ok()?;
    let (jobz, uplo) = (b'V' as c_char, b'L' as c_char);
    let mut w = Array1::<f64>::zeros(n);
    let mut info: c_int = 0;
    let (mut lwork, mut lrwork, mut liwork) = (-1 as c_int, -1 as c_int, -1 as c_int);
    let mut work_q = [C64::new(0.0, 0.0)];
    let mut rwork_q = [0.0f64];
    let mut iwork_q = [0 as c_int];
    // SAFETY: workspace query; every pointer is valid for the sizes LAPACK
    // reads when lwork = lrwork = liwork = -1.
    unsafe {
        lapack_sys::zheevd_(
            &jobz, &uplo, &nn, a.as_mut_ptr() as *mut Z<f64>, &nn, w.as_mut_ptr(),
            work_q.as_mut_ptr() as *mut Z<f64>, &lwork, rwork_q.as_mut_ptr(), &lrwork,
            iwork_q.as_mut_ptr(), &liwork, &mut info,
        );
    }
    if info != 0 {
        return None;
    }
    lwork = work_q[0].re as c_int;
    lrwork = rwork_q[0] as c_int;
    liwork = iwork_q[0];
    let mut work = vec![C64::new(0.0, 0.0); lwork.max(1) as usize];
    let mut rwork = vec![0.0f64; lrwork.max(1) as usize];
    let mut iwork = vec![0 as c_int; liwork.max(1) as usize];
    // SAFETY: `a` is a contiguous column-major n×n buffer, `w` holds n values
    // and the workspaces have the sizes returned by the query above.
    unsafe {
        lapack_sys::zheevd_(
            &jobz, &uplo, &nn, a.as_mut_ptr() as *mut Z<f64>, &nn, w.as_mut_ptr(),
            work.as_mut_ptr() as *mut Z<f64>, &lwork, rwork.as_mut_ptr(), &lrwork,
            iwork.as_mut_ptr(), &liwork, &mut info,
        );
    }
    (info == 0).then_some(w)
}

/// Factor `C` with `C·C† = m` for positive semidefinite `m`; the width of `C`
/// equals the numerical rank.
pub fn psd_factor(m: &ArrayView2<'_, C64>) -> Result<Array2<C64>> {
    let dec = hermitian_decompose(m)?;
    let lmax = dec.values.iter().fold(0.0_f64, |a, &b| a.max(b.abs()));
    let tol = PSD_CLIP * lmax;
    if let Some(&min) = dec.values.iter().last() {
        if min < -tol {
            return Err(Error::NotPsd { min_eig: min, max_eig: lmax });
        }
    }
    let rank = dec.values.iter().take_while(|&&l| l > tol).count();
    let mut c = dec.vectors.slice_move(ndarray::s![.., ..rank]);
    for (mut col, &l) in c.axis_iter_mut(Axis(1)).zip(dec.values.iter()) {
        let sq = l.sqrt();
        col.mapv_inplace(|z| z * sq);
    }
    Ok(c)
}

/// Isometry `w` (shape `c×r` for an `r×c` input) maximizing `|Tr(w·m)|`,
/// together with the maximum, which equals the trace norm of `m`.
pub fn optimal_isometry(m: &ArrayView2<'_, C64>) -> Result<(Array2<C64>, f64)> {
    let (u, s, vt) = thin_svd(m)?;
    let w = dagger(&vt.view()).dot(&dagger(&u.view()));
    Ok((w, s.sum()))
}

/// Closest isometry to `m` in Frobenius norm (`U·V†` from the thin SVD); same
/// shape as `m`.
pub fn polar_isometry(m: &ArrayView2<'_, C64>) -> Result<Array2<C64>> {
    let (u, _, vt) = thin_svd(m)?;
    Ok(u.dot(&vt))
}

/// `exp(factor · h)` for Hermitian `h`.
pub fn expm_hermitian(h: &ArrayView2<'_, C64>, factor: C64) -> Result<Array2<C64>> {
    let dec = hermitian_decompose(h)?;
    let mut scaled = dec.vectors.clone();
    for (mut col, &l) in scaled.axis_iter_mut(Axis(1)).zip(dec.values.iter()) {
        let e = (factor * l).exp();
        col.mapv_inplace(|z| z * e);
    }
    Ok(scaled.dot(&dagger(&dec.vectors.view())))
}
