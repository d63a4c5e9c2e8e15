use ndarray::{Array1, Array2, ArrayView2, Axis};
use num_complex::Complex64 as C64;

use super::check_capacity;
use crate::error::{Error, Result};
use crate::mps::Mps;
use crate::tensor::identity;
use crate::ttn::Ttn;

/// Full contraction of the chain, left to right, without normalizing.
pub fn mps_contract(state: &Mps) -> Result<Array1<C64>> {
    let l = state.len();
    let d = state.phys_dim();
    check_capacity(d, l)?;
    // acc[(s_0 … s_n), right bond]
    let mut acc = Array2::<C64>::from_elem((1, 1), C64::new(state.schmidt(0)[0], 0.0));
    for n in 0..l {
        let b = state.right_tensor(n);
        let (a, _, r) = b.dim();
        let bm = b.into_shape_clone((a, d * r))?;
        let rows = acc.nrows();
        acc = acc.dot(&bm).into_shape_clone((rows * d, r))?;
    }
    Ok(acc.column(0).to_owned())
}

/// Normalized statevector of an MPS.
pub fn mps_to_statevector(state: &Mps) -> Result<Array1<C64>> {
    normalized(mps_contract(state)?)
}

/// Normalized statevector of a TTN, contracted bottom-up.
pub fn ttn_to_statevector(ttn: &Ttn) -> Result<Array1<C64>> {
    let d = ttn.phys_dim();
    check_capacity(d, ttn.len())?;
    // Each entry maps a node's top index to its vector on the node's sites.
    let mut below: Vec<Array2<C64>> = vec![identity(d); ttn.len()];
    for t in 1..ttn.depth() {
        below = ttn
            .layer(t)
            .iter()
            .enumerate()
            .map(|(p, w)| node_vectors(&w.view(), &below[2 * p], &below[2 * p + 1]))
            .collect::<Result<Vec<_>>>()?;
    }
    let top = ttn.top();
    // ψ[x_l, x_r] = Σ_ab V_l[a, x_l] T[a, b] V_r[b, x_r]
    let psi = below[0].t().dot(top).dot(&below[1]);
    let n = psi.len();
    normalized(psi.into_shape_clone(n)?)
}

fn node_vectors(w: &ndarray::ArrayView3<'_, C64>, left: &Array2<C64>, right: &Array2<C64>) -> Result<Array2<C64>> {
    let (chi, cl, cr) = w.dim();
    let (xl, xr) = (left.ncols(), right.ncols());
    // tmp[a, l, x_r] = Σ_r w[a, l, r] V_r[r, x_r]
    let wm = w.as_standard_layout().into_owned().into_shape_clone((chi * cl, cr))?;
    let tmp = wm.dot(right).into_shape_clone((chi, cl, xr))?;
    let mut out = Array2::<C64>::zeros((chi, xl * xr));
    for a in 0..chi {
        // out[a, x_l, x_r] = Σ_l V_l[l, x_l] tmp[a, l, x_r]
        let block = left.t().dot(&tmp.index_axis(Axis(0), a));
        out.row_mut(a).assign(&block.into_shape_clone(xl * xr)?);
    }
    Ok(out)
}

fn normalized(v: Array1<C64>) -> Result<Array1<C64>> {
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if !(n > 0.0) {
        return Err(Error::DegenerateState("statevector has zero norm".into()));
    }
    Ok(v.mapv(|z| z / n))
}

/// `min_φ ‖a − e^{iφ} b‖`.
pub fn phase_aligned_distance(a: &Array1<C64>, b: &Array1<C64>) -> f64 {
    let na: f64 = a.iter().map(|z| z.norm_sqr()).sum();
    let nb: f64 = b.iter().map(|z| z.norm_sqr()).sum();
    let ov: C64 = a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum();
    (na + nb - 2.0 * ov.norm()).max(0.0).sqrt()
}

/// Applies a `d²×d²` operator to sites `(site, site+1)` of a dense vector.
pub fn apply_two_site_dense(vec: &Array1<C64>, length: usize, phys_dim: usize, site: usize, gate: &ArrayView2<'_, C64>) -> Array1<C64> {
    let dl = phys_dim.pow(site as u32);
    let dm = phys_dim * phys_dim;
    let dr = phys_dim.pow((length - site - 2) as u32);
    let t = vec.as_standard_layout().into_shape_with_order((dl, dm, dr)).expect("vector matches length");
    let mut out = ndarray::Array3::<C64>::zeros((dl, dm, dr));
    for i in 0..dl {
        out.index_axis_mut(Axis(0), i).assign(&gate.dot(&t.index_axis(Axis(0), i)));
    }
    out.into_shape_clone(dl * dm * dr).expect("contiguous")
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array3};

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn product_mps_gives_tensor_product() {
        let v0 = array![c(0.6), c(0.8)];
        let v1 = array![c(0.0), C64::new(0.0, 1.0)];
        let s = Mps::product(&[v0.clone(), v1.clone()]).unwrap();
        let v = mps_to_statevector(&s).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((v[2 * i + j] - v0[i] * v1[j]).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn capacity_is_enforced() {
        let s = Mps::basis_state(2, &[0; 21]).unwrap();
        assert!(matches!(mps_to_statevector(&s), Err(Error::Capacity { .. })));
    }

    #[test]
    fn bond_gauge_leaves_vector() {
        let s = crate::mps::random_mps(6, 2, 3, 4).unwrap();
        let mut tensors: Vec<Array3<C64>> = (0..6).map(|n| s.right_tensor(n)).collect();
        let g = array![[c(2.0), c(1.0), c(0.0)], [c(0.0), c(1.0), c(0.0)], [c(0.5), c(0.0), c(1.0)]];
        use ndarray_linalg::Inverse;
        let gi = g.inv().unwrap();
        let (a, d, b) = tensors[2].dim();
        tensors[2] = tensors[2].clone().into_shape_clone((a * d, b)).unwrap().dot(&g).into_shape_clone((a, d, 3)).unwrap();
        let (a, d, b) = tensors[3].dim();
        tensors[3] = gi.dot(&tensors[3].clone().into_shape_clone((a, d * b)).unwrap()).into_shape_clone((3, d, b)).unwrap();
        let gauged = Mps::from_site_tensors(tensors).unwrap();
        let dist = phase_aligned_distance(&mps_to_statevector(&s).unwrap(), &mps_to_statevector(&gauged).unwrap());
        assert!(dist < 1e-10);
    }

    #[test]
    fn depth_two_ttn_by_hand() {
        // Layer-1 isometries select |00⟩ and |11⟩ for top index 0 and 1;
        // a diagonal top tensor then gives (|0000⟩ + |1111⟩)/√2.
        let mut w = Array3::<C64>::zeros((2, 2, 2));
        w[[0, 0, 0]] = c(1.0);
        w[[1, 1, 1]] = c(1.0);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let top = array![[c(r), c(0.0)], [c(0.0), c(r)]];
        let ttn = Ttn::new(2, vec![vec![w.clone(), w]], top).unwrap();
        let v = ttn_to_statevector(&ttn).unwrap();
        assert!((v[0] - c(r)).norm() < 1e-15);
        assert!((v[15] - c(r)).norm() < 1e-15);
        assert!(v.iter().enumerate().all(|(i, z)| i == 0 || i == 15 || z.norm() < 1e-15));
    }
}
