//! Variational ground-state search over the tree.
//!
//! Bond terms are shifted by their largest eigenvalue so that every term is
//! negative semidefinite. The energy is then a negative semidefinite
//! quadratic form in each single isometry, and replacing `w` by the polar
//! part of minus its environment never raises the energy. The top tensor is
//! set to the lowest eigenvector of its effective Hamiltonian.
//!
//! Operators are ascended bottom-up: `one[t][p]` collects every bond term
//! inside node `(t, p)`'s window, `two[t][p]` is the single bond crossing
//! between nodes `(t, p)` and `(t, p+1)`. Densities descend top-down:
//! `rho[t][p]` on one node's top leg, `sigma[t][p]` on the pair
//! `(t, p), (t, p+1)`.

use ndarray::{Array2, Array3};
use num_complex::Complex64 as C64;

use super::Ttn;
use crate::error::{Error, Result};
use crate::tensor::{contract, hermitian_decompose, identity, kron, polar_isometry, Tensor};

const SKIP_NORM: f64 = 1e-14;

fn w_mat(w: &Array3<C64>) -> Array2<C64> {
    let (chi, cl, cr) = w.dim();
    w.clone().into_shape_clone((chi, cl * cr)).expect("contiguous")
}

fn rank4(m: &Array2<C64>, dims: [usize; 4]) -> Tensor {
    m.clone().into_shape_clone(dims.to_vec()).expect("pair operator shape")
}

fn from_rank4(t: Tensor, perm: [usize; 4]) -> Array2<C64> {
    let t = t.permuted_axes(perm.to_vec()).as_standard_layout().into_owned();
    let s = t.shape().to_vec();
    t.into_shape_clone((s[0] * s[1], s[2] * s[3])).expect("contiguous")
}

/// `G[a, r, a', r'] = Σ_l conj(w[a,l,r]) w[a',l,r']` (`over_left`) or
/// `G[c, l, c', l'] = Σ_r conj(w[c,l,r]) w[c',l',r]`.
fn gram(w: &Array3<C64>, over_left: bool) -> Tensor {
    let t = w.clone().into_dyn();
    let k = if over_left { 1 } else { 2 };
    contract(&t.mapv(|z| z.conj()), &t, &[(k, k)]).expect("matching extents")
}

fn conj4(t: &Tensor) -> Tensor {
    t.mapv(|z| z.conj())
}

/// `A[a, a'] = Σ conj(w[a, i]) X[i, j] w[a', j]`.
fn ascend_one(w: &Array3<C64>, x: &Array2<C64>) -> Array2<C64> {
    let wm = w_mat(w);
    wm.mapv(|z| z.conj()).dot(x).dot(&wm.t())
}

/// Ascends the bond between the right child of `w1` and the left child of
/// `w2` to an operator on the two parents.
fn ascend_two(w1: &Array3<C64>, w2: &Array3<C64>, b: &Array2<C64>) -> Array2<C64> {
    let (_, _, r) = w1.dim();
    let (_, l2, _) = w2.dim();
    let b4 = rank4(b, [r, l2, r, l2]);
    let tmp = contract(&gram(w1, true), &b4, &[(1, 0), (3, 2)]).expect("extents");
    let res = contract(&tmp, &gram(w2, false), &[(2, 1), (3, 3)]).expect("extents");
    from_rank4(res, [0, 2, 1, 3])
}

/// Pair density of the two children: `W^T ρ conj(W)`.
fn descend_pair(w: &Array3<C64>, rho: &Array2<C64>) -> Array2<C64> {
    let wm = w_mat(w);
    wm.t().dot(rho).dot(&wm.mapv(|z| z.conj()))
}

fn partial_traces(pair: &Array2<C64>, cl: usize, cr: usize) -> (Array2<C64>, Array2<C64>) {
    let mut left = Array2::zeros((cl, cl));
    let mut right = Array2::zeros((cr, cr));
    for l in 0..cl {
        for lp in 0..cl {
            for r in 0..cr {
                left[[l, lp]] += pair[[l * cr + r, lp * cr + r]];
            }
        }
    }
    for r in 0..cr {
        for rp in 0..cr {
            for l in 0..cl {
                right[[r, rp]] += pair[[l * cr + r, l * cr + rp]];
            }
        }
    }
    (left, right)
}

/// Density on (right child of `w1`, left child of `w2`) from the density on
/// the two parents.
fn descend_two(w1: &Array3<C64>, w2: &Array3<C64>, sigma: &Array2<C64>) -> Array2<C64> {
    let (c1, _, _) = w1.dim();
    let (c2, _, _) = w2.dim();
    let s4 = rank4(sigma, [c1, c2, c1, c2]);
    let h1 = conj4(&gram(w1, true));
    let h2 = conj4(&gram(w2, false));
    let tmp = contract(&s4, &h1, &[(0, 0), (2, 2)]).expect("extents");
    let res = contract(&tmp, &h2, &[(0, 0), (1, 2)]).expect("extents");
    from_rank4(res, [0, 2, 1, 3])
}

struct Ascended {
    one: Vec<Vec<Array2<C64>>>,
    two: Vec<Vec<Array2<C64>>>,
}

fn internal_operator(one_l: &Array2<C64>, one_r: &Array2<C64>, bond: &Array2<C64>) -> Array2<C64> {
    let il = identity(one_l.nrows());
    let ir = identity(one_r.nrows());
    kron(&one_l.view(), &ir.view()) + kron(&il.view(), &one_r.view()) + bond
}

fn ascend_layer(ttn: &Ttn, t: usize, asc: &mut Ascended) {
    let layer = ttn.layer(t);
    let one: Vec<Array2<C64>> = layer
        .iter()
        .enumerate()
        .map(|(p, w)| ascend_one(w, &internal_operator(&asc.one[t - 1][2 * p], &asc.one[t - 1][2 * p + 1], &asc.two[t - 1][2 * p])))
        .collect();
    let two: Vec<Array2<C64>> = (0..layer.len().saturating_sub(1))
        .map(|p| ascend_two(&layer[p], &layer[p + 1], &asc.two[t - 1][2 * p + 1]))
        .collect();
    asc.one[t] = one;
    asc.two[t] = two;
}

fn ascend_all(ttn: &Ttn, terms: &[Array2<C64>]) -> Ascended {
    let depth = ttn.depth();
    let d = ttn.phys_dim();
    let mut asc = Ascended { one: vec![Vec::new(); depth], two: vec![Vec::new(); depth] };
    asc.one[0] = vec![Array2::zeros((d, d)); ttn.len()];
    asc.two[0] = terms.to_vec();
    for t in 1..depth {
        ascend_layer(ttn, t, &mut asc);
    }
    asc
}

fn top_hamiltonian(asc: &Ascended, depth: usize) -> Array2<C64> {
    let t = depth - 1;
    internal_operator(&asc.one[t][0], &asc.one[t][1], &asc.two[t][0])
}

fn top_vector(ttn: &Ttn) -> ndarray::Array1<C64> {
    let top = ttn.top();
    top.clone().into_shape_clone(top.len()).expect("contiguous")
}

fn expectation(h: &Array2<C64>, v: &ndarray::Array1<C64>) -> f64 {
    v.iter().zip(h.dot(v).iter()).map(|(x, y)| x.conj() * y).sum::<C64>().re
}

fn check_terms(ttn: &Ttn, terms: &[Array2<C64>]) -> Result<()> {
    let d2 = ttn.phys_dim() * ttn.phys_dim();
    if terms.len() + 1 != ttn.len() {
        return Err(Error::Argument(format!("{} bond terms for a tree of {} sites", terms.len(), ttn.len())));
    }
    if terms.iter().any(|h| h.dim() != (d2, d2)) {
        return Err(Error::Dimension(format!("bond terms must be {d2}x{d2}")));
    }
    Ok(())
}

/// `⟨ψ|H|ψ⟩` for a nearest-neighbour Hamiltonian given per bond.
pub fn ttn_energy(ttn: &Ttn, terms: &[Array2<C64>]) -> Result<f64> {
    check_terms(ttn, terms)?;
    let asc = ascend_all(ttn, terms);
    Ok(expectation(&top_hamiltonian(&asc, ttn.depth()), &top_vector(ttn)))
}

struct Densities {
    rho: Vec<Vec<Array2<C64>>>,
    sigma: Vec<Vec<Array2<C64>>>,
}

fn descend_all(ttn: &Ttn) -> Densities {
    let depth = ttn.depth();
    let mut rho = vec![Vec::new(); depth];
    let mut sigma = vec![Vec::new(); depth];
    let top = ttn.top();
    let v = top_vector(ttn);
    let n = v.len();
    let vc = v.mapv(|z| z.conj());
    sigma[depth - 1] = vec![Array2::from_shape_fn((n, n), |(i, j)| v[i] * vc[j])];
    rho[depth - 1] = vec![top.dot(&top.t().mapv(|z| z.conj())), top.t().dot(&top.mapv(|z| z.conj()))];
    for t in (2..depth).rev() {
        let layer = ttn.layer(t);
        let nodes = layer.len();
        let mut r = Vec::with_capacity(2 * nodes);
        let mut s = Vec::with_capacity(2 * nodes - 1);
        for (p, w) in layer.iter().enumerate() {
            let (_, cl, cr) = w.dim();
            let pair = descend_pair(w, &rho[t][p]);
            let (left, right) = partial_traces(&pair, cl, cr);
            r.push(left);
            r.push(right);
            s.push(pair);
            if p + 1 < nodes {
                s.push(descend_two(w, &layer[p + 1], &sigma[t][p]));
            }
        }
        rho[t - 1] = r;
        sigma[t - 1] = s;
    }
    Densities { rho, sigma }
}

/// Energy environment `∂E/∂conj(w)` of node `(t, p)`.
fn environment(ttn: &Ttn, t: usize, p: usize, asc: &Ascended, den: &Densities) -> Array3<C64> {
    let layer = ttn.layer(t);
    let w = &layer[p];
    let (chi, cl, cr) = w.dim();
    let x = internal_operator(&asc.one[t - 1][2 * p], &asc.one[t - 1][2 * p + 1], &asc.two[t - 1][2 * p]);
    let rho = &den.rho[t][p];
    let mut env = rho.t().dot(&w_mat(w)).dot(&x.t()).into_shape_clone((chi, cl, cr)).expect("contiguous");
    let wt = w.clone().into_dyn();
    if p > 0 {
        let w1 = &layer[p - 1];
        let c1 = w1.dim().0;
        let r1 = w1.dim().2;
        let s4 = rank4(&den.sigma[t][p - 1], [c1, chi, c1, chi]);
        let b4 = rank4(&asc.two[t - 1][2 * p - 1], [r1, cl, r1, cl]);
        let pm = contract(&s4, &gram(w1, true), &[(2, 0), (0, 2)]).expect("extents");
        let q = contract(&pm, &b4, &[(2, 0), (3, 2)]).expect("extents");
        let e = contract(&q, &wt, &[(0, 0), (3, 1)]).expect("extents");
        env += &e.into_dimensionality::<ndarray::Ix3>().expect("rank 3");
    }
    if p + 1 < layer.len() {
        let w2 = &layer[p + 1];
        let c2 = w2.dim().0;
        let l2 = w2.dim().1;
        let s4 = rank4(&den.sigma[t][p], [chi, c2, chi, c2]);
        let b4 = rank4(&asc.two[t - 1][2 * p + 1], [cr, l2, cr, l2]);
        let pm = contract(&s4, &gram(w2, false), &[(3, 0), (1, 2)]).expect("extents");
        let q = contract(&pm, &b4, &[(2, 1), (3, 3)]).expect("extents");
        let e = contract(&q, &wt, &[(0, 0), (3, 2)]).expect("extents");
        let e = e.into_dimensionality::<ndarray::Ix3>().expect("rank 3").permuted_axes([0, 2, 1]);
        env += &e;
    }
    env
}

#[derive(Clone, Debug)]
pub struct OptimizationResult {
    pub ttn: Ttn,
    /// Energy after each sweep.
    pub energies: Vec<f64>,
    /// State after each sweep (empty when an observer was used instead).
    pub snapshots: Vec<Ttn>,
}

/// Runs `sweeps` bottom-up sweeps and keeps a snapshot after each.
pub fn optimize_ground_state(ttn: &Ttn, terms: &[Array2<C64>], sweeps: usize) -> Result<OptimizationResult> {
    let mut snapshots = Vec::with_capacity(sweeps);
    let mut result = optimize_ground_state_with(ttn, terms, sweeps, |_, s| snapshots.push(s.clone()))?;
    result.snapshots = snapshots;
    Ok(result)
}

/// Like [`optimize_ground_state`] but hands each post-sweep state to
/// `observer(sweep, state)` instead of storing it; sweeps count from 1.
pub fn optimize_ground_state_with<F: FnMut(usize, &Ttn)>(
    ttn: &Ttn,
    terms: &[Array2<C64>],
    sweeps: usize,
    mut observer: F,
) -> Result<OptimizationResult> {
    check_terms(ttn, terms)?;
    let mut shift = 0.0;
    let mut shifted = Vec::with_capacity(terms.len());
    for h in terms {
        let lmax = hermitian_decompose(&h.view())?.values[0];
        shift += lmax;
        shifted.push(h - &identity(h.nrows()).mapv(|z| z * lmax));
    }
    let depth = ttn.depth();
    let mut psi = ttn.clone();
    let mut asc = ascend_all(&psi, &shifted);
    let mut energies = Vec::with_capacity(sweeps);
    for sweep in 1..=sweeps {
        let den = descend_all(&psi);
        for t in 1..depth {
            for p in 0..psi.layer(t).len() {
                let env = environment(&psi, t, p, &asc, &den);
                let norm = env.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                if norm < SKIP_NORM {
                    continue;
                }
                let (chi, cl, cr) = env.dim();
                let m = env.mapv(|z| -z).into_shape_clone((chi, cl * cr))?;
                let w = polar_isometry(&m.view())?.into_shape_clone((chi, cl, cr))?;
                psi.set_node(t, p, w);
            }
            ascend_layer(&psi, t, &mut asc);
        }
        let h_top = top_hamiltonian(&asc, depth);
        let current = expectation(&h_top, &top_vector(&psi));
        let eig = hermitian_decompose(&h_top.view())?;
        let n = eig.values.len();
        let lowest = eig.values[n - 1];
        let energy = if current - lowest > 1e-14 * lowest.abs().max(1.0) {
            let (a, b) = psi.top().dim();
            psi.set_top(eig.vectors.column(n - 1).to_owned().into_shape_clone((a, b))?);
            lowest
        } else {
            current
        };
        energies.push(energy + shift);
        observer(sweep, &psi);
    }
    Ok(OptimizationResult { ttn: psi, energies, snapshots: Vec::new() })
}
