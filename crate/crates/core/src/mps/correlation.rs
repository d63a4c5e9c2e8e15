use ndarray::{Array2, ShapeBuilder};
use ndarray_linalg::EigVals;
use num_complex::Complex64 as C64;

use super::Mps;
use crate::error::{Error, Result};

/// Correlation length from the two leading eigenvalues of the single-site
/// transfer operator of the left-canonical tensor nearest the chain centre
/// with equal bond extents. Returns `0` for a product state and
/// `f64::INFINITY` when the spectrum is degenerate in modulus.
pub fn correlation_length(state: &Mps) -> Result<f64> {
    if !state.is_canonical() {
        return Err(Error::State("correlation length requires a canonical MPS".into()));
    }
    let l = state.len();
    let mid = l / 2;
    let site = (0..l)
        .filter(|&n| state.schmidt(n).len() == state.schmidt(n + 1).len())
        .min_by_key(|&n| n.abs_diff(mid))
        .ok_or_else(|| Error::Dimension("no site with equal left and right bond extents".into()))?;
    let chi = state.schmidt(site).len();
    if chi == 1 {
        return Ok(0.0);
    }
    let a = state.left_tensor(site);
    let d = state.phys_dim();
    let n = chi * chi;
    let mut t = Array2::<C64>::zeros((n, n).f());
    for al in 0..chi {
        for be in 0..chi {
            for ar in 0..chi {
                for br in 0..chi {
                    let mut acc = C64::new(0.0, 0.0);
                    for s in 0..d {
                        acc += a[[al, s, ar]] * a[[be, s, br]].conj();
                    }
                    t[[al * chi + be, ar * chi + br]] = acc;
                }
            }
        }
    }
    let vals = t.eigvals()?;
    let mut mags: Vec<f64> = vals.iter().map(|z| z.norm()).collect();
    mags.sort_by(|x, y| y.total_cmp(x));
    if !(mags[0] > 0.0) {
        return Err(Error::Numeric("transfer operator has vanishing spectrum".into()));
    }
    let ratio = mags[1] / mags[0];
    if ratio >= 1.0 - 1e-12 {
        return Ok(f64::INFINITY);
    }
    if ratio <= 0.0 {
        return Ok(0.0);
    }
    Ok(-1.0 / ratio.ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{Array1, Array3};

    #[test]
    fn product_state_has_zero_length() {
        let s = Mps::basis_state(2, &[0; 8]).unwrap();
        assert_eq!(correlation_length(&s).unwrap(), 0.0);
    }

    #[test]
    fn ghz_state_is_infinite() {
        let l = 8;
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let one = C64::new(1.0, 0.0);
        let mut gammas = Vec::new();
        let mut first = Array3::zeros((1, 2, 2));
        first[[0, 0, 0]] = one;
        first[[0, 1, 1]] = one;
        gammas.push(first);
        for _ in 1..l - 1 {
            let mut g = Array3::zeros((2, 2, 2));
            g[[0, 0, 0]] = C64::new(1.0 / r, 0.0);
            g[[1, 1, 1]] = C64::new(1.0 / r, 0.0);
            gammas.push(g);
        }
        let mut last = Array3::zeros((2, 2, 1));
        last[[0, 0, 0]] = one;
        last[[1, 1, 0]] = one;
        gammas.push(last);
        let mut schmidt = vec![Array1::from(vec![1.0])];
        for _ in 1..l {
            schmidt.push(Array1::from(vec![r, r]));
        }
        schmidt.push(Array1::from(vec![1.0]));
        let s = Mps::from_vidal(gammas, schmidt).unwrap();
        assert!(s.is_canonical(), "residual {}", s.canonical_residual());
        assert_eq!(correlation_length(&s).unwrap(), f64::INFINITY);
    }
}
