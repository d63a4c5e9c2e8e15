use ndarray::{Array2, Array3};
use num_complex::Complex64 as C64;

use super::Ttn;
use crate::error::{Error, Result};
use crate::fidelity::{FidelityReport, Method};
use crate::tensor::{contract, dagger, identity, psd_factor, singular_values, Tensor};

/// The window below node `(layer, position)`, separated from the rest of
/// the tree by the node's top leg alone.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Branch {
    pub layer: usize,
    pub position: usize,
    pub start: usize,
    pub end: usize,
}

impl Branch {
    pub fn new(layer: usize, position: usize) -> Self {
        let size = 1usize << layer;
        Self { layer, position, start: position * size, end: (position + 1) * size }
    }

    pub fn size(&self) -> usize {
        self.end - self.start
    }
}

/// All single-cut windows of size `2^t`, `1 ≤ t < depth`, ordered by layer
/// then position. Single sites and the whole system are not included.
pub fn branch_regions(ttn: &Ttn) -> Vec<Branch> {
    let depth = ttn.depth();
    (1..depth).flat_map(|t| (0..(1usize << (depth - t))).map(move |p| Branch::new(t, p))).collect()
}

fn check_branch(ttn: &Ttn, branch: &Branch) -> Result<()> {
    if branch.layer == 0 || branch.layer >= ttn.depth() || branch.position >= (1usize << (ttn.depth() - branch.layer)) {
        return Err(Error::Argument(format!("no branch at layer {}, position {}", branch.layer, branch.position)));
    }
    Ok(())
}

fn to_tensor3(w: &Array3<C64>) -> Tensor {
    w.clone().into_dyn()
}

fn to_matrix(t: Tensor) -> Array2<C64> {
    t.into_dimensionality().expect("rank 2")
}

/// Reduced state `D` on the top leg of the branch node: the complement of
/// the branch contracted down from the top tensor.
pub fn branch_environment(ttn: &Ttn, branch: &Branch) -> Result<Array2<C64>> {
    check_branch(ttn, branch)?;
    let depth = ttn.depth();
    let (t, p) = (branch.layer, branch.position);
    let top = ttn.top();
    let mut q = p >> (depth - 1 - t);
    let mut d = if q == 0 { top.dot(&dagger(&top.view())) } else { top.t().dot(&top.mapv(|z| z.conj())) };
    for s in ((t + 1)..depth).rev() {
        let w = to_tensor3(&ttn.layer(s)[q]);
        let child = p >> (s - 1 - t);
        // z[a, l, r] = Σ_a' D[a, a'] conj(w[a', l, r])
        let z = contract(&d.clone().into_dyn(), &w.mapv(|x| x.conj()), &[(1, 0)])?;
        d = if child % 2 == 0 {
            to_matrix(contract(&w, &z, &[(0, 0), (2, 2)])?)
        } else {
            to_matrix(contract(&w, &z, &[(0, 0), (1, 1)])?)
        };
        q = child;
    }
    Ok(d)
}

/// `B[j, i] = ⟨b_j|a_i⟩` between the basis vectors that the branch node of
/// `b` and of `a` define on the branch window.
fn mixed_transfer(a: &Ttn, b: &Ttn, branch: &Branch) -> Result<Array2<C64>> {
    let d = a.phys_dim();
    let first = branch.start;
    let mut below: Vec<Array2<C64>> = vec![identity(d); branch.size()];
    for s in 1..=branch.layer {
        let offset = first >> s;
        below = (0..below.len() / 2)
            .map(|k| {
                let wa = to_tensor3(&a.layer(s)[offset + k]);
                let wb = to_tensor3(&b.layer(s)[offset + k]).mapv(|x| x.conj());
                // (i, r, l') then (i, l', r')
                let t1 = contract(&wa, &below[2 * k].clone().into_dyn(), &[(1, 1)])?;
                let t2 = contract(&t1, &below[2 * k + 1].clone().into_dyn(), &[(1, 1)])?;
                Ok(to_matrix(contract(&wb, &t2, &[(1, 1), (2, 2)])?))
            })
            .collect::<Result<Vec<_>>>()?;
    }
    Ok(below.pop().expect("one node left"))
}

/// Uhlmann fidelity of the two states restricted to the branch window.
pub fn branch_fidelity(a: &Ttn, b: &Ttn, branch: &Branch) -> Result<FidelityReport> {
    if a.depth() != b.depth() || a.phys_dim() != b.phys_dim() {
        return Err(Error::Argument(format!(
            "tree shapes differ: depth {} vs {}, phys_dim {} vs {}",
            a.depth(),
            b.depth(),
            a.phys_dim(),
            b.phys_dim()
        )));
    }
    check_branch(a, branch)?;
    let ca = psd_factor(&branch_environment(a, branch)?.view())?;
    let cb = psd_factor(&branch_environment(b, branch)?.view())?;
    let mixed = mixed_transfer(a, b, branch)?;
    let core = dagger(&cb.view()).dot(&mixed).dot(&ca);
    let s = singular_values(&core.view())?;
    Ok(FidelityReport {
        value: s.sum(),
        singular_spectrum: s.to_vec(),
        method: Method::TtnBranch,
        iterations: 0,
        converged: true,
        restarts_used: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{reduced_density_matrix, ttn_to_statevector, uhlmann_exact, window_matrix};
    use crate::tensor::hermitian_decompose;
    use crate::ttn::random_ttn;
    use ndarray::{array, Array1};

    #[test]
    fn enumeration_counts() {
        let t2 = random_ttn(2, 4, 2, 0).unwrap();
        let b2 = branch_regions(&t2);
        assert_eq!(b2.iter().map(|b| (b.start, b.end)).collect::<Vec<_>>(), vec![(0, 2), (2, 4)]);
        let t3 = random_ttn(3, 4, 2, 0).unwrap();
        let b3 = branch_regions(&t3);
        assert_eq!(b3.iter().filter(|b| b.size() == 2).count(), 4);
        assert_eq!(b3.iter().filter(|b| b.size() == 4).count(), 2);
        let t5 = random_ttn(5, 2, 2, 0).unwrap();
        assert_eq!(branch_regions(&t5).len(), 32 - 2);
    }

    /// Leaves reachable from the node by walking down the tree.
    fn leaves(t: usize, p: usize) -> Vec<usize> {
        if t == 0 {
            vec![p]
        } else {
            let mut v = leaves(t - 1, 2 * p);
            v.extend(leaves(t - 1, 2 * p + 1));
            v
        }
    }

    #[test]
    fn every_branch_is_cut_by_its_top_leg() {
        let t = random_ttn(5, 2, 2, 0).unwrap();
        for b in branch_regions(&t) {
            // Removing the node's top leg disconnects exactly its subtree.
            let below = leaves(b.layer, b.position);
            assert_eq!(below, (b.start..b.end).collect::<Vec<_>>());
        }
    }

    #[test]
    fn maximally_entangled_top() {
        let mut w = Array3::<C64>::zeros((4, 2, 2));
        for i in 0..4 {
            w[[i, i / 2, i % 2]] = C64::new(1.0, 0.0);
        }
        let top = identity(4).mapv(|z| z * 0.5);
        let ttn = Ttn::new(2, vec![vec![w.clone(), w]], top).unwrap();
        for b in branch_regions(&ttn) {
            let d = branch_environment(&ttn, &b).unwrap();
            assert!((&d - &identity(4).mapv(|z| z * 0.25)).iter().all(|z| z.norm() < 1e-15));
        }
    }

    #[test]
    fn product_tree_has_rank_one_environments() {
        let vs: Vec<Array1<C64>> = (0..8).map(|i| array![C64::new(1.0, 0.0), C64::new(0.1 * i as f64, 0.2)]).collect();
        let ttn = Ttn::product(&vs).unwrap();
        for b in branch_regions(&ttn) {
            let d = branch_environment(&ttn, &b).unwrap();
            assert_eq!(d.dim(), (1, 1));
            assert!((d[[0, 0]].re - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn environment_spectrum_matches_schmidt_oracle() {
        let ttn = random_ttn(3, 3, 2, 7).unwrap();
        let v = ttn_to_statevector(&ttn).unwrap();
        for b in branch_regions(&ttn) {
            let d = branch_environment(&ttn, &b).unwrap();
            assert!((d.diag().sum().re - 1.0).abs() < 1e-10);
            let mut eig = hermitian_decompose(&d.view()).unwrap().values.to_vec();
            let s = crate::tensor::singular_values(&window_matrix(&v, 8, 2, b.start, b.end).unwrap().view()).unwrap();
            let mut schmidt: Vec<f64> = s.iter().map(|x| x * x).collect();
            eig.resize(schmidt.len().max(eig.len()), 0.0);
            schmidt.resize(eig.len(), 0.0);
            for (x, y) in eig.iter().zip(&schmidt) {
                assert!((x - y).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn identical_trees_give_one() {
        let t = random_ttn(4, 5, 2, 8).unwrap();
        for b in branch_regions(&t) {
            assert!((branch_fidelity(&t, &t, &b).unwrap().value - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn product_trees_multiply_overlaps() {
        let va: Vec<Array1<C64>> = (0..8).map(|i| array![C64::new(1.0, 0.0), C64::new(0.1 * i as f64, 0.2)]).collect();
        let vb: Vec<Array1<C64>> = (0..8).map(|i| array![C64::new(0.3, 0.1), C64::new(1.0, -0.05 * i as f64)]).collect();
        let (a, b) = (Ttn::product(&va).unwrap(), Ttn::product(&vb).unwrap());
        let ov: Vec<f64> = va
            .iter()
            .zip(&vb)
            .map(|(x, y)| {
                let ip: C64 = x.iter().zip(y.iter()).map(|(p, q)| p.conj() * q).sum();
                let n = |v: &Array1<C64>| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                ip.norm() / (n(x) * n(y))
            })
            .collect();
        for br in branch_regions(&a) {
            let expect: f64 = ov[br.start..br.end].iter().product();
            assert!((branch_fidelity(&a, &b, &br).unwrap().value - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn random_pair_matches_oracle() {
        let a = random_ttn(3, 4, 2, 11).unwrap();
        let b = random_ttn(3, 4, 2, 12).unwrap();
        let (va, vb) = (ttn_to_statevector(&a).unwrap(), ttn_to_statevector(&b).unwrap());
        for br in branch_regions(&a) {
            let rho = reduced_density_matrix(&va, 8, 2, br.start, br.end).unwrap();
            let sigma = reduced_density_matrix(&vb, 8, 2, br.start, br.end).unwrap();
            let f = branch_fidelity(&a, &b, &br).unwrap().value;
            assert!((f - uhlmann_exact(&rho, &sigma).unwrap()).abs() < 1e-8);
        }
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let a = random_ttn(3, 4, 2, 1).unwrap();
        let b = random_ttn(4, 4, 2, 1).unwrap();
        assert!(matches!(branch_fidelity(&a, &b, &Branch::new(1, 0)), Err(Error::Argument(_))));
        assert!(matches!(branch_environment(&a, &Branch::new(3, 0)), Err(Error::Argument(_))));
    }
}
