use ndarray::{s, Array2};
use ndarray_linalg::SVD;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::tensor::{dagger, identity, isometry_residual, max_abs, polar_isometry};

/// `φ = x·w` for an isometry `w` with `ww† = 1`.
pub fn purify(x: &Array2<C64>, w: &Array2<C64>) -> Result<Array2<C64>> {
    if x.ncols() != w.nrows() {
        return Err(Error::Dimension(format!("x has {} columns but w has {} rows", x.ncols(), w.nrows())));
    }
    if w.nrows() > w.ncols() || isometry_residual(&w.view(), true) > 1e-10 {
        return Err(Error::Argument("w must satisfy ww† = 1".into()));
    }
    Ok(x.dot(w))
}

fn full_svd(m: &Array2<C64>) -> Result<(Array2<C64>, Vec<f64>, Array2<C64>)> {
    let (u, sv, vt) = m.svd(true, true)?;
    let u = u.ok_or_else(|| Error::Numeric("SVD returned no left vectors".into()))?;
    let vt = vt.ok_or_else(|| Error::Numeric("SVD returned no right vectors".into()))?;
    Ok((u, sv.to_vec(), dagger(&vt.view())))
}

/// Finds an isometry `w` (`ww† = 1`) with `x·w = φ`, given that `φ` purifies
/// `xx†`. Builds `w = V_X u_X E V_φ†` from the two singular value
/// decompositions; the rotation `u_X` between the singular bases is the
/// nearest unitary to `S⁻¹ (U_X† U_φ) S` on the range of `x`, which is exact
/// for non-degenerate spectra and aligns degenerate blocks otherwise.
pub fn purification_decompose(phi: &Array2<C64>, x: &Array2<C64>) -> Result<Array2<C64>> {
    let (chi, chi_x) = x.dim();
    let chi_phi = phi.ncols();
    if phi.nrows() != chi {
        return Err(Error::Dimension(format!("φ has {} rows, x has {chi}", phi.nrows())));
    }
    if chi_phi < chi_x {
        return Err(Error::Argument(format!("ancilla dimension {chi_phi} smaller than {chi_x}")));
    }
    let rho_x = x.dot(&dagger(&x.view()));
    let rho_phi = phi.dot(&dagger(&phi.view()));
    let scale = max_abs(rho_x.iter()).max(1.0);
    if max_abs((&rho_x - &rho_phi).iter()) > 1e-10 * scale {
        return Err(Error::Argument("φ is not a purification of xx†".into()));
    }

    let (ux, sx, vx) = full_svd(x)?;
    let (uphi, _, vphi) = full_svd(phi)?;
    let smax = sx.first().copied().unwrap_or(0.0);
    let r = sx.iter().take_while(|&&v| v > 1e-12 * smax).count();

    // u = U_X† U_φ restricted to the range, conjugated by S into u_X.
    let u = dagger(&ux.slice(s![.., ..r])).dot(&uphi.slice(s![.., ..r]));
    let mut ux_block = Array2::<C64>::zeros((r, r));
    for i in 0..r {
        for j in 0..r {
            ux_block[[i, j]] = u[[i, j]] * (sx[j] / sx[i]);
        }
    }
    let ux_block = if r > 0 { polar_isometry(&ux_block.view())? } else { ux_block };
    let mut u_x = identity(chi_x);
    u_x.slice_mut(s![..r, ..r]).assign(&ux_block);

    let mut e = Array2::<C64>::zeros((chi_x, chi_phi));
    e.slice_mut(s![.., ..chi_x]).assign(&identity(chi_x));
    Ok(vx.dot(&u_x).dot(&e).dot(&dagger(&vphi.view())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{random_isometry, random_matrix};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn normalized(mut x: Array2<C64>) -> Array2<C64> {
        let n = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        x.mapv_inplace(|z| z / n);
        x
    }

    fn residual(a: &Array2<C64>, b: &Array2<C64>) -> f64 {
        max_abs((a - b).iter())
    }

    #[test]
    fn identity_isometry_returns_x() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = normalized(random_matrix(3, 3, &mut rng));
        assert_eq!(purify(&x, &identity(3)).unwrap(), x);
        let mut padded = Array2::<C64>::zeros((3, 5));
        padded.slice_mut(s![.., ..3]).assign(&identity(3));
        let phi = purify(&x, &padded).unwrap();
        assert!(residual(&phi.dot(&dagger(&phi.view())), &x.dot(&dagger(&x.view()))) < 1e-15);
    }

    #[test]
    fn non_isometric_w_is_rejected() {
        let x = identity(2);
        let w = identity(2).mapv(|z| z * 2.0);
        assert!(matches!(purify(&x, &w), Err(Error::Argument(_))));
    }

    #[test]
    fn decompose_self_purification() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = normalized(random_matrix(4, 4, &mut rng));
        let w = purification_decompose(&x, &x).unwrap();
        assert!(isometry_residual(&w.view(), true) < 1e-10);
        assert!(residual(&x.dot(&w), &x) < 1e-10);
    }

    #[test]
    fn decompose_recovers_random_purifications() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for trial in 0..200 {
            let chi = 1 + trial % 5;
            let chi_x = 1 + (trial / 5) % 5;
            let chi_phi = chi_x + trial % 3;
            let x = normalized(random_matrix(chi, chi_x, &mut rng));
            let w0 = random_isometry(chi_x, chi_phi, &mut rng);
            let phi = purify(&x, &w0).unwrap();
            let w = purification_decompose(&phi, &x).unwrap();
            assert!(isometry_residual(&w.view(), true) < 1e-10);
            assert!(residual(&x.dot(&w), &phi) < 1e-9, "trial {trial}");
        }
    }

    #[test]
    fn decompose_rank_deficient_and_degenerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        // Two equal singular values and one zero row.
        let mut x = Array2::<C64>::zeros((3, 3));
        x[[0, 0]] = C64::new(0.5, 0.0);
        x[[1, 1]] = C64::new(0.5, 0.0);
        let x = random_isometry(3, 3, &mut rng).dot(&x).dot(&random_isometry(3, 3, &mut rng));
        let w0 = random_isometry(3, 6, &mut rng);
        let phi = purify(&x, &w0).unwrap();
        let w = purification_decompose(&phi, &x).unwrap();
        assert!(isometry_residual(&w.view(), true) < 1e-10);
        assert!(residual(&x.dot(&w), &phi) < 1e-9);
    }

    #[test]
    fn decompose_rejects_non_purifications() {
        let x = identity(2).mapv(|z| z * std::f64::consts::FRAC_1_SQRT_2);
        let mut phi = Array2::<C64>::zeros((2, 2));
        phi[[0, 0]] = C64::new(1.0, 0.0);
        assert!(matches!(purification_decompose(&phi, &x), Err(Error::Argument(_))));
    }
}
