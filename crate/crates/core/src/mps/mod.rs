//! Finite open-boundary matrix product states in Vidal canonical form.
//!
//! ```text
//!   S[0]  Γ[0]  S[1]  Γ[1]  S[2]   ...   Γ[L-1]  S[L]
//!    *  ---O---  *  ---O---  *  -- ... ---O---  *
//!          |           |                  |
//! ```
//!
//! `Γ[n]` has axes `(left bond, physical, right bond)`; `S[n]` holds the
//! Schmidt values of the bipartition at bond `n` (between sites `n-1` and
//! `n`), so the boundary vectors `S[0]` and `S[L]` are the one-element vector
//! `(1)`. In canonical form the left tensors `A = S[n]·Γ[n]` and right
//! tensors `B = Γ[n]·S[n+1]` satisfy `Σ_s A†A = 1` and `Σ_s BB† = 1`.

mod correlation;
mod tebd;

pub use correlation::correlation_length;
pub use tebd::{
    imaginary_time_ground_state, tebd_evolve, EvolutionConfig, EvolutionResult, GroundStateSchedule,
    StepDiagnostics, TimeKind,
};

use ndarray::{Array1, Array2, Array3, ArrayView2, Axis};
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::tensor::{
    dagger, identity, isometry_residual, max_abs, random_tensor, scale_axis, svd_truncate, Tensor,
    TruncationSpec,
};

/// Schmidt values below this fraction of the largest one are dropped when
/// (re)building the canonical form.
pub const SCHMIDT_FLOOR: f64 = 1e-14;

/// Residual below which a state counts as canonical.
pub const CANONICAL_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct Mps {
    gammas: Vec<Array3<C64>>,
    schmidt: Vec<Array1<f64>>,
    phys_dim: usize,
    canonical: bool,
}

impl Mps {
    /// Wraps arbitrary site tensors `(left, phys, right)` with unit bond
    /// weights. The result is flagged non-canonical.
    pub fn from_site_tensors(tensors: Vec<Array3<C64>>) -> Result<Self> {
        if tensors.is_empty() {
            return Err(Error::Argument("an MPS needs at least one site".into()));
        }
        let tensors: Vec<Array3<C64>> = tensors.into_iter().map(standard).collect();
        let phys_dim = tensors[0].dim().1;
        let mut schmidt = Vec::with_capacity(tensors.len() + 1);
        schmidt.push(Array1::ones(tensors[0].dim().0));
        for t in &tensors {
            schmidt.push(Array1::ones(t.dim().2));
        }
        let state = Self { gammas: tensors, schmidt, phys_dim, canonical: false };
        state.validate()?;
        Ok(state)
    }

    /// Builds a state from Vidal data; the canonical flag is set when the
    /// orthogonality residuals are within tolerance.
    pub fn from_vidal(gammas: Vec<Array3<C64>>, schmidt: Vec<Array1<f64>>) -> Result<Self> {
        if gammas.is_empty() {
            return Err(Error::Argument("an MPS needs at least one site".into()));
        }
        let gammas: Vec<Array3<C64>> = gammas.into_iter().map(standard).collect();
        let phys_dim = gammas[0].dim().1;
        let mut state = Self { gammas, schmidt, phys_dim, canonical: false };
        state.validate()?;
        state.refresh_canonical_flag();
        Ok(state)
    }

    /// Product state from one (not necessarily normalized) vector per site.
    pub fn product(site_vectors: &[Array1<C64>]) -> Result<Self> {
        let tensors = site_vectors
            .iter()
            .map(|v| v.clone().into_shape_clone((1, v.len(), 1)).map_err(Error::from))
            .collect::<Result<Vec<_>>>()?;
        Self::from_site_tensors(tensors)
    }

    /// Computational basis state `|s_0 s_1 … s_{L-1}⟩`.
    pub fn basis_state(phys_dim: usize, digits: &[usize]) -> Result<Self> {
        let vecs: Vec<Array1<C64>> = digits
            .iter()
            .map(|&s| {
                let mut v = Array1::zeros(phys_dim);
                if s < phys_dim {
                    v[s] = C64::new(1.0, 0.0);
                }
                v
            })
            .collect();
        if digits.iter().any(|&s| s >= phys_dim) {
            return Err(Error::Argument("basis digit exceeds physical dimension".into()));
        }
        Self::product(&vecs)?.canonicalize()
    }

    fn validate(&self) -> Result<()> {
        let l = self.gammas.len();
        if self.schmidt.len() != l + 1 {
            return Err(Error::Dimension(format!("expected {} Schmidt vectors, got {}", l + 1, self.schmidt.len())));
        }
        if self.gammas[0].dim().0 != 1 || self.gammas[l - 1].dim().2 != 1 {
            return Err(Error::Dimension("open boundary bonds must have extent 1".into()));
        }
        for (n, g) in self.gammas.iter().enumerate() {
            let (a, d, b) = g.dim();
            if d != self.phys_dim {
                return Err(Error::Dimension(format!("site {n} has physical dimension {d}, expected {}", self.phys_dim)));
            }
            if self.schmidt[n].len() != a || self.schmidt[n + 1].len() != b {
                return Err(Error::Dimension(format!("bond extents around site {n} disagree")));
            }
            if n + 1 < l && self.gammas[n + 1].dim().0 != b {
                return Err(Error::Dimension(format!("bond {} extents disagree", n + 1)));
            }
            if g.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::Numeric(format!("site {n} has non-finite entries")));
            }
        }
        Ok(())
    }

    fn schmidt_normalized(&self) -> bool {
        self.schmidt.iter().all(|s| {
            let sum: f64 = s.iter().map(|x| x * x).sum();
            (sum - 1.0).abs() <= CANONICAL_TOL && s.iter().all(|&x| x >= 0.0) && s.windows(2).into_iter().all(|w| w[0] >= w[1])
        })
    }

    pub fn len(&self) -> usize {
        self.gammas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gammas.is_empty()
    }

    pub fn phys_dim(&self) -> usize {
        self.phys_dim
    }

    pub fn is_canonical(&self) -> bool {
        self.canonical
    }

    pub fn gamma(&self, site: usize) -> &Array3<C64> {
        &self.gammas[site]
    }

    pub fn gammas(&self) -> &[Array3<C64>] {
        &self.gammas
    }

    /// Schmidt values on bond `bond` (`0..=L`).
    pub fn schmidt(&self, bond: usize) -> &Array1<f64> {
        &self.schmidt[bond]
    }

    pub fn schmidt_vectors(&self) -> &[Array1<f64>] {
        &self.schmidt
    }

    pub fn bond_dims(&self) -> Vec<usize> {
        self.schmidt.iter().map(|s| s.len()).collect()
    }

    pub fn max_bond_dim(&self) -> usize {
        self.schmidt.iter().map(|s| s.len()).max().unwrap_or(1)
    }

    /// `A = S[n]·Γ[n]`, left-orthonormal in canonical form.
    pub fn left_tensor(&self, site: usize) -> Array3<C64> {
        let mut a = self.gammas[site].clone();
        scale_axis(&mut a, 0, self.schmidt[site].as_slice().expect("contiguous"));
        a
    }

    /// `B = Γ[n]·S[n+1]`, right-orthonormal in canonical form.
    pub fn right_tensor(&self, site: usize) -> Array3<C64> {
        let mut b = self.gammas[site].clone();
        scale_axis(&mut b, 2, self.schmidt[site + 1].as_slice().expect("contiguous"));
        b
    }

    /// Largest deviation from the left and right orthogonality conditions
    /// over all sites.
    pub fn canonical_residual(&self) -> f64 {
        (0..self.len())
            .map(|n| {
                let a = self.left_tensor(n);
                let b = self.right_tensor(n);
                let (l, d, r) = a.dim();
                let am = a.into_shape_clone((l * d, r)).expect("contiguous");
                let bm = b.into_shape_clone((l, d * r)).expect("contiguous");
                isometry_residual(&am.view(), false).max(isometry_residual(&bm.view(), true))
            })
            .fold(0.0, f64::max)
    }

    /// Gauge transforms into canonical form, normalizing the state.
    pub fn canonicalize(&self) -> Result<Mps> {
        let l = self.len();
        let d = self.phys_dim;
        let mut sites: Vec<Array3<C64>> = (0..l).map(|n| self.right_tensor(n)).collect();
        let s0 = self.schmidt[0][0];
        sites[0].mapv_inplace(|z| z * s0);

        // Left sweep: left-orthonormal sites, norm ends up in the last one.
        for n in 0..l - 1 {
            let (a, _, b) = sites[n].dim();
            let m = sites[n].as_standard_layout().into_shape_with_order((a * d, b))?;
            let svd = svd_truncate(&m.view(), &TruncationSpec::unbounded())?;
            let k = floor_rank(&svd.s)?;
            let u = svd.u.slice(ndarray::s![.., ..k]).to_owned();
            let mut carry = dagger(&svd.v.slice(ndarray::s![.., ..k]));
            for (mut row, &sv) in carry.axis_iter_mut(Axis(0)).zip(svd.s.iter()) {
                row.mapv_inplace(|z| z * sv);
            }
            sites[n] = u.into_shape_clone((a, d, k))?;
            sites[n + 1] = absorb_left(&carry, &sites[n + 1]);
        }
        let norm = sites[l - 1].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::DegenerateState("state has zero norm".into()));
        }
        sites[l - 1].mapv_inplace(|z| z / norm);

        // Right sweep: Schmidt values at each bond, right-orthonormal sites.
        let mut gammas = vec![Array3::zeros((1, d, 1)); l];
        let mut schmidt = vec![Array1::ones(1); l + 1];
        for n in (1..l).rev() {
            let (a, _, b) = sites[n].dim();
            let m = sites[n].as_standard_layout().into_shape_with_order((a, d * b))?;
            let svd = svd_truncate(&m.view(), &TruncationSpec::unbounded())?;
            let k = floor_rank(&svd.s)?;
            let s_norm = svd.s.iter().take(k).map(|x| x * x).sum::<f64>().sqrt();
            let s: Array1<f64> = svd.s.iter().take(k).map(|x| x / s_norm).collect();
            let right = dagger(&svd.v.slice(ndarray::s![.., ..k]));
            let mut gamma = right.into_shape_clone((k, d, b))?;
            let inv: Vec<f64> = schmidt[n + 1].iter().map(|x| 1.0 / x).collect();
            scale_axis(&mut gamma, 2, &inv);
            gammas[n] = gamma;
            let mut us = svd.u.slice(ndarray::s![.., ..k]).to_owned();
            for (mut col, &sv) in us.axis_iter_mut(Axis(1)).zip(s.iter()) {
                col.mapv_inplace(|z| z * sv);
            }
            sites[n - 1] = absorb_right(&sites[n - 1], &us);
            schmidt[n] = s;
        }
        let mut g0 = sites[0].clone();
        let n0 = g0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let inv: Vec<f64> = schmidt[1].iter().map(|x| 1.0 / (x * n0)).collect();
        scale_axis(&mut g0, 2, &inv);
        gammas[0] = g0;

        Ok(Mps { gammas, schmidt, phys_dim: d, canonical: true })
    }

    /// Marks the state canonical when its residuals allow it; used by
    /// routines that restore the form by construction.
    pub(crate) fn refresh_canonical_flag(&mut self) {
        self.canonical = self.schmidt_normalized() && self.canonical_residual() <= CANONICAL_TOL;
    }

    /// `⟨self|other⟩` by left-to-right transfer contraction.
    pub fn overlap(&self, other: &Mps) -> Result<C64> {
        if self.len() != other.len() || self.phys_dim != other.phys_dim {
            return Err(Error::Argument(format!(
                "overlap needs equal shapes: ({}, {}) vs ({}, {})",
                self.len(),
                self.phys_dim,
                other.len(),
                other.phys_dim
            )));
        }
        let mut env = Array2::<C64>::ones((1, 1));
        for n in 0..self.len() {
            env = transfer_left(&env, &other.right_tensor(n), &self.right_tensor(n));
        }
        let s = self.schmidt[0][0] * other.schmidt[0][0];
        Ok(env[[0, 0]] * s)
    }

    pub fn norm(&self) -> Result<f64> {
        Ok(self.overlap(self)?.re.max(0.0).sqrt())
    }

    /// `⟨ψ|op_site|ψ⟩` from the local canonical tensors.
    pub fn expect_local(&self, op: &ArrayView2<'_, C64>, site: usize) -> Result<C64> {
        self.require_canonical()?;
        if site >= self.len() {
            return Err(Error::Argument(format!("site {site} out of range for length {}", self.len())));
        }
        if op.dim() != (self.phys_dim, self.phys_dim) {
            return Err(Error::Dimension("operator does not match the physical dimension".into()));
        }
        let mut theta = self.left_tensor(site);
        scale_axis(&mut theta, 2, self.schmidt[site + 1].as_slice().expect("contiguous"));
        let mut acc = C64::new(0.0, 0.0);
        for s in 0..self.phys_dim {
            for t in 0..self.phys_dim {
                let o = op[[s, t]];
                if o == C64::new(0.0, 0.0) {
                    continue;
                }
                let ket = theta.index_axis(Axis(1), t);
                let bra = theta.index_axis(Axis(1), s);
                acc += o * bra.iter().zip(ket.iter()).map(|(b, k)| b.conj() * k).sum::<C64>();
            }
        }
        Ok(acc)
    }

    /// `⟨ψ|h|ψ⟩` for a two-site operator `h` (`d²×d²`) on sites `(site, site+1)`.
    pub fn expect_two_site(&self, h: &ArrayView2<'_, C64>, site: usize) -> Result<C64> {
        self.require_canonical()?;
        if site + 1 >= self.len() {
            return Err(Error::Argument(format!("bond {site} out of range")));
        }
        let theta = self.two_site_theta(site);
        let (a, d1, d2, b) = theta.dim();
        let m = theta.into_shape_clone((a, d1 * d2, b))?;
        let hm = apply_phys(h, &m);
        Ok(m.iter().zip(hm.iter()).map(|(x, y)| x.conj() * y).sum())
    }

    /// `⟨ψ|H|ψ⟩ / ⟨ψ|ψ⟩` by full contraction; valid in any gauge.
    pub fn energy_contracted(&self, terms: &[Array2<C64>]) -> Result<f64> {
        let l = self.len();
        if terms.len() + 1 != l {
            return Err(Error::Argument(format!("{} bond terms for length {}", terms.len(), l)));
        }
        let mut sites: Vec<Array3<C64>> = (0..l).map(|n| self.right_tensor(n)).collect();
        let s0 = self.schmidt[0][0];
        sites[0].mapv_inplace(|z| z * s0);
        let mut right = vec![Array2::<C64>::ones((1, 1)); l + 1];
        for n in (0..l).rev() {
            right[n] = transfer_right(&right[n + 1], &sites[n], &sites[n]);
        }
        let norm = right[0][[0, 0]].re;
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::DegenerateState("state has zero norm".into()));
        }
        let d = self.phys_dim;
        let mut left = Array2::<C64>::ones((1, 1));
        let mut e = 0.0;
        for (n, h) in terms.iter().enumerate() {
            let theta = two_site_product(&sites[n], &sites[n + 1]);
            let (a, _, _, b) = theta.dim();
            let theta = theta.into_shape_clone((a, d * d, b))?;
            let env = transfer_left(&left, &apply_phys(&h.view(), &theta), &theta);
            e += env.iter().zip(right[n + 2].iter()).map(|(x, y)| x * y).sum::<C64>().re;
            left = transfer_left(&left, &sites[n], &sites[n]);
        }
        Ok(e / norm)
    }

    /// Energy of a nearest-neighbour Hamiltonian given as one term per bond.
    pub fn energy(&self, terms: &[Array2<C64>]) -> Result<f64> {
        if terms.len() + 1 != self.len() {
            return Err(Error::Argument(format!("{} bond terms for length {}", terms.len(), self.len())));
        }
        let mut e = 0.0;
        for (n, h) in terms.iter().enumerate() {
            e += self.expect_two_site(&h.view(), n)?.re;
        }
        Ok(e)
    }

    /// `S[n]·Γ[n]·S[n+1]·Γ[n+1]·S[n+2]`.
    fn two_site_theta(&self, site: usize) -> ndarray::Array4<C64> {
        let mut a = self.right_tensor(site);
        scale_axis(&mut a, 0, self.schmidt[site].as_slice().expect("contiguous"));
        let b = self.right_tensor(site + 1);
        two_site_product(&a, &b)
    }

    fn require_canonical(&self) -> Result<()> {
        if !self.canonical {
            return Err(Error::State("operation requires a canonical MPS".into()));
        }
        Ok(())
    }

    /// Applies a single-site operator. Unitary operators preserve the
    /// canonical flag; anything else clears it.
    pub fn apply_one_site_gate(&self, op: &ArrayView2<'_, C64>, site: usize) -> Result<Mps> {
        if site >= self.len() {
            return Err(Error::Argument(format!("site {site} out of range")));
        }
        if op.dim() != (self.phys_dim, self.phys_dim) {
            return Err(Error::Dimension("operator does not match the physical dimension".into()));
        }
        let mut out = self.clone();
        let g = &self.gammas[site];
        let (a, d, b) = g.dim();
        let mut ng = Array3::zeros((a, d, b));
        for s in 0..d {
            for t in 0..d {
                let o = op[[s, t]];
                if o == C64::new(0.0, 0.0) {
                    continue;
                }
                let src = g.index_axis(Axis(1), t);
                ng.index_axis_mut(Axis(1), s).scaled_add(o, &src);
            }
        }
        out.gammas[site] = ng;
        out.canonical = self.canonical && isometry_residual(op, false) <= 1e-12;
        Ok(out)
    }

    /// Applies a two-site gate with axes `(out1, out2, in1, in2)` to sites
    /// `(site, site+1)` and re-splits the pair. Returns the new state and the
    /// discarded weight of the truncation.
    pub fn apply_two_site_gate(&self, gate: &Tensor, site: usize, truncation: &TruncationSpec) -> Result<(Mps, f64)> {
        self.require_canonical()?;
        let d = self.phys_dim;
        if gate.shape() != [d, d, d, d] {
            return Err(Error::Dimension(format!("gate shape {:?} does not match physical dimension {d}", gate.shape())));
        }
        let gm = gate.as_standard_layout().into_shape_with_order((d * d, d * d))?.to_owned();
        let mut out = self.clone();
        let w = out.apply_gate_matrix(&gm.view(), site, truncation)?;
        if isometry_residual(&gm.view(), false) > 1e-12 {
            out.canonical = false;
        }
        Ok((out, w))
    }

    /// In-place two-site update; does not touch the canonical flag.
    pub(crate) fn apply_gate_matrix(&mut self, gate: &ArrayView2<'_, C64>, site: usize, truncation: &TruncationSpec) -> Result<f64> {
        let l = self.len();
        if site + 1 >= l {
            return Err(Error::Argument(format!("bond {site} out of range for length {l}")));
        }
        let d = self.phys_dim;
        let b1 = self.right_tensor(site);
        let b2 = self.right_tensor(site + 1);
        let pair = two_site_product(&b1, &b2);
        let (a, _, _, c) = pair.dim();
        let pair = pair.into_shape_clone((a, d * d, c))?;
        let gated = apply_phys(gate, &pair);
        let mut theta = gated.clone();
        scale_axis(&mut theta, 0, self.schmidt[site].as_slice().expect("contiguous"));
        let tm = theta.into_shape_clone((a * d, d * c))?;
        let svd = svd_truncate(&tm.view(), truncation)?;
        let total: f64 = svd.s.iter().map(|x| x * x).sum::<f64>() + svd.discarded_weight;
        let k = floor_rank(&svd.s)?;
        let kept: f64 = svd.s.iter().take(k).map(|x| x * x).sum();
        let discarded = if total > 0.0 { (total - kept) / total } else { 0.0 };
        let norm = kept.sqrt();

        let vdag = dagger(&svd.v.slice(ndarray::s![.., ..k]));
        let right = vdag.clone().into_shape_clone((k, d, c))?;
        // B1' = θ'·V, which avoids dividing by the Schmidt values left of the pair.
        let g2 = gated.into_shape_clone((a * d, d * c))?;
        let left = g2.dot(&svd.v.slice(ndarray::s![.., ..k])).into_shape_clone((a, d, k))?;

        let mut gamma1 = left;
        let inv_s: Vec<f64> = svd.s.iter().take(k).map(|x| 1.0 / x).collect();
        scale_axis(&mut gamma1, 2, &inv_s);
        let mut gamma2 = right;
        let inv_r: Vec<f64> = self.schmidt[site + 2].iter().map(|x| 1.0 / x).collect();
        scale_axis(&mut gamma2, 2, &inv_r);

        self.gammas[site] = gamma1;
        self.gammas[site + 1] = gamma2;
        self.schmidt[site + 1] = svd.s.iter().take(k).map(|x| x / norm).collect();
        Ok(discarded)
    }
}

/// Number of singular values kept above the relative floor; errors if the
/// whole spectrum vanishes.
fn floor_rank(s: &Array1<f64>) -> Result<usize> {
    let smax = s.first().copied().unwrap_or(0.0);
    if !(smax > 0.0) {
        return Err(Error::DegenerateState("all singular values vanish".into()));
    }
    Ok(s.iter().take_while(|&&x| x > SCHMIDT_FLOOR * smax).count())
}

fn standard(t: Array3<C64>) -> Array3<C64> {
    if t.is_standard_layout() { t } else { t.as_standard_layout().into_owned() }
}

/// `carry (k×a) · t (a, d, b) → (k, d, b)`.
fn absorb_left(carry: &Array2<C64>, t: &Array3<C64>) -> Array3<C64> {
    let (a, d, b) = t.dim();
    let m = t.as_standard_layout().into_shape_with_order((a, d * b)).expect("contiguous");
    carry.dot(&m).into_shape_clone((carry.nrows(), d, b)).expect("contiguous")
}

/// `t (a, d, b) · carry (b×k) → (a, d, k)`.
fn absorb_right(t: &Array3<C64>, carry: &Array2<C64>) -> Array3<C64> {
    let (a, d, b) = t.dim();
    let m = t.as_standard_layout().into_owned().into_shape_clone((a * d, b)).expect("contiguous");
    m.dot(carry).into_shape_clone((a, d, carry.ncols())).expect("contiguous")
}

/// `(a, d, m) × (m, d, b) → (a, d, d, b)`.
pub(crate) fn two_site_product(x: &Array3<C64>, y: &Array3<C64>) -> ndarray::Array4<C64> {
    let (a, d1, m) = x.dim();
    let (_, d2, b) = y.dim();
    let xm = x.as_standard_layout().into_owned().into_shape_clone((a * d1, m)).expect("contiguous");
    let ym = y.as_standard_layout().into_owned().into_shape_clone((m, d2 * b)).expect("contiguous");
    xm.dot(&ym).into_shape_clone((a, d1, d2, b)).expect("contiguous")
}

/// Applies a matrix on the middle (physical) axis of `(a, p, b)`.
pub(crate) fn apply_phys(op: &ArrayView2<'_, C64>, t: &Array3<C64>) -> Array3<C64> {
    let (a, p, b) = t.dim();
    let mut out = Array3::zeros((a, op.nrows(), b));
    for i in 0..a {
        let slab = t.index_axis(Axis(0), i);
        out.index_axis_mut(Axis(0), i).assign(&op.dot(&slab));
    }
    debug_assert_eq!(op.ncols(), p);
    out
}

/// One step of the left mixed environment: `E'[α', β'] = Σ x[α,s,α'] E[α,β] conj(y[β,s,β'])`.
pub(crate) fn transfer_left(env: &Array2<C64>, x: &Array3<C64>, y: &Array3<C64>) -> Array2<C64> {
    let (ax, d, bx) = x.dim();
    let (ay, _, by) = y.dim();
    let xm = x.as_standard_layout().into_shape_with_order((ax, d * bx)).expect("contiguous");
    // t[β, s, α'] = Σ_α E[α,β] x[α,s,α']
    let t = env.t().dot(&xm).into_shape_clone((ay * d, bx)).expect("contiguous");
    let ym = y.as_standard_layout().into_shape_with_order((ay * d, by)).expect("contiguous");
    t.t().dot(&ym.mapv(|z| z.conj()))
}

/// One step of the right mixed environment: `E'[α, β] = Σ x[α,s,α'] E[α',β'] conj(y[β,s,β'])`.
pub(crate) fn transfer_right(env: &Array2<C64>, x: &Array3<C64>, y: &Array3<C64>) -> Array2<C64> {
    let (ax, d, bx) = x.dim();
    let (ay, _, by) = y.dim();
    let xm = x.as_standard_layout().into_shape_with_order((ax * d, bx)).expect("contiguous");
    // t[α, s, β'] = Σ_α' x[α,s,α'] E[α',β']
    let t = xm.dot(env).into_shape_clone((ax, d * by)).expect("contiguous");
    let ym = y.as_standard_layout().into_shape_with_order((ay, d * by)).expect("contiguous");
    t.dot(&dagger(&ym.view()))
}

/// Random normalized canonical MPS with bond dimensions capped at `chi`.
pub fn random_mps(length: usize, phys_dim: usize, chi: usize, seed: u64) -> Result<Mps> {
    if length < 2 || chi < 1 || phys_dim < 1 {
        return Err(Error::Argument(format!("random_mps needs L >= 2, chi >= 1, d >= 1 (got {length}, {chi}, {phys_dim})")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bond = |n: usize| -> usize {
        let cap = |k: usize| phys_dim.checked_pow(k as u32).unwrap_or(usize::MAX);
        chi.min(cap(n)).min(cap(length - n))
    };
    let tensors: Vec<Array3<C64>> = (0..length)
        .map(|n| {
            random_tensor(&[bond(n), phys_dim, bond(n + 1)], &mut rng)
                .into_dimensionality()
                .expect("rank 3")
        })
        .collect();
    Mps::from_site_tensors(tensors)?.canonicalize()
}

/// `d²×d²` identity, a convenient no-op gate.
pub fn two_site_identity(phys_dim: usize) -> Array2<C64> {
    identity(phys_dim * phys_dim)
}

#[allow(dead_code)]
pub(crate) fn max_abs_diff(a: &Array3<C64>, b: &Array3<C64>) -> f64 {
    max_abs((a - b).iter())
}
