//! Brute-force references at desk scale. Everything here works on full
//! statevectors and dense density matrices, independently of the tensor
//! network contractions it is used to check.
//!
//! Statevector amplitudes are indexed with site 0 as the most significant
//! digit: `ψ[s_0 s_1 … s_{L-1}]`.

mod purification;
mod restricted;
mod statevector;

pub use purification::{purification_decompose, purify};
pub use restricted::{restricted_fidelity, FidelityMode, RestrictedOptions, RestrictedResult};
pub use statevector::{apply_two_site_dense, mps_contract, mps_to_statevector, phase_aligned_distance, ttn_to_statevector};

use ndarray::{s, Array1, Array2, Axis};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::tensor::{dagger, hermitian_decompose, trace_norm, PSD_CLIP};

/// Largest number of amplitudes the oracle will materialize.
pub const CAPACITY: u128 = 1 << 20;

pub(crate) fn check_capacity(phys_dim: usize, length: usize) -> Result<usize> {
    let requested = (phys_dim as u128).checked_pow(length as u32).unwrap_or(u128::MAX);
    if requested > CAPACITY {
        return Err(Error::Capacity { requested, limit: CAPACITY });
    }
    Ok(requested as usize)
}

#[derive(Clone, Debug)]
pub struct DensityMatrix {
    pub matrix: Array2<C64>,
    /// Sites `start..end` the matrix lives on.
    pub start: usize,
    pub end: usize,
}

/// Splits a statevector into the matrix `ψ[(window), (left, right)]` for the
/// window `start..end`.
pub(crate) fn window_matrix(vec: &Array1<C64>, length: usize, phys_dim: usize, start: usize, end: usize) -> Result<Array2<C64>> {
    let total = check_capacity(phys_dim, length)?;
    if vec.len() != total {
        return Err(Error::Dimension(format!("vector of length {} does not hold {length} sites of dimension {phys_dim}", vec.len())));
    }
    if start >= end || end > length {
        return Err(Error::Argument(format!("window {start}..{end} is empty or exceeds length {length}")));
    }
    let dl = phys_dim.pow(start as u32);
    let dm = phys_dim.pow((end - start) as u32);
    let dr = phys_dim.pow((length - end) as u32);
    let t = vec.as_standard_layout().into_shape_with_order((dl, dm, dr))?;
    let m = t.permuted_axes([1, 0, 2]).as_standard_layout().into_owned();
    Ok(m.into_shape_clone((dm, dl * dr))?)
}

/// Partial trace of `|ψ⟩⟨ψ|` over everything outside `start..end`.
pub fn reduced_density_matrix(vec: &Array1<C64>, length: usize, phys_dim: usize, start: usize, end: usize) -> Result<DensityMatrix> {
    if start >= end || end > length || (start == 0 && end == length) {
        return Err(Error::Argument(format!("region {start}..{end} must be a proper non-empty part of {length} sites")));
    }
    let m = window_matrix(vec, length, phys_dim, start, end)?;
    let matrix = m.dot(&dagger(&m.view()));
    Ok(DensityMatrix { matrix, start, end })
}

/// Spectral square root of a PSD matrix, clipped below `PSD_CLIP · λmax`.
struct PsdRoot {
    /// `V √D` restricted to the kept eigenvalues.
    factor: Array2<C64>,
    vectors: Array2<C64>,
}

impl PsdRoot {
    fn new(m: &Array2<C64>) -> Result<Self> {
        let dec = hermitian_decompose(&m.view())?;
        let lmax = dec.values.iter().copied().fold(0.0, f64::max);
        let floor = PSD_CLIP * lmax;
        if dec.values.iter().any(|&l| l < -floor) {
            let min_eig = dec.values.iter().copied().fold(f64::INFINITY, f64::min);
            return Err(Error::NotPsd { min_eig, max_eig: lmax });
        }
        // Values are descending, so the kept block is a prefix.
        let k = dec.values.iter().take_while(|&&l| l > floor).count();
        let vectors = dec.vectors.slice(s![.., ..k]).to_owned();
        let mut factor = vectors.clone();
        for (mut col, &l) in factor.axis_iter_mut(Axis(1)).zip(dec.values.iter()) {
            let r = l.sqrt();
            col.mapv_inplace(|z| z * r);
        }
        Ok(Self { factor, vectors })
    }

    fn sqrt(&self) -> Array2<C64> {
        self.factor.dot(&dagger(&self.vectors.view()))
    }
}

/// `F(ρ, σ) = Tr √(√ρ σ √ρ)`, cross-checked against `‖√σ √ρ‖_tr`.
pub fn uhlmann_exact(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.matrix.dim() != sigma.matrix.dim() {
        return Err(Error::Argument(format!("density matrices differ in shape: {:?} vs {:?}", rho.matrix.dim(), sigma.matrix.dim())));
    }
    let pr = PsdRoot::new(&rho.matrix)?;
    let ps = PsdRoot::new(&sigma.matrix)?;
    // √ρ σ √ρ = M†M with M = (V_σ√D_σ)† V_ρ√D_ρ built on the two supports;
    // its nonzero spectrum is that of the smaller Gram matrix of M.
    let m = dagger(&ps.factor.view()).dot(&pr.factor);
    let k = if m.nrows() <= m.ncols() { m.dot(&dagger(&m.view())) } else { dagger(&m.view()).dot(&m) };
    let k = (&k + &dagger(&k.view())).mapv(|z| z * 0.5);
    let direct: f64 = hermitian_decompose(&k.view())?.values.iter().map(|l| l.max(0.0).sqrt()).sum();
    let via_norm = trace_norm(&ps.sqrt().dot(&pr.sqrt()).view())?;
    if (direct - via_norm).abs() > 1e-10 {
        return Err(Error::Numeric(format!("fidelity routes disagree: {direct} vs {via_norm}")));
    }
    Ok(via_norm)
}

/// Trace distance `‖ρ − σ‖_tr`.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    trace_norm(&(&rho.matrix - &sigma.matrix).view())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{random_matrix, random_unitary};
    use ndarray::array;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn dm(m: Array2<C64>) -> DensityMatrix {
        DensityMatrix { start: 0, end: 1, matrix: m }
    }

    fn random_dm(n: usize, rank: usize, rng: &mut ChaCha8Rng) -> DensityMatrix {
        let x = random_matrix(n, rank, rng);
        let mut m = x.dot(&dagger(&x.view()));
        let tr: C64 = m.diag().sum();
        m.mapv_inplace(|z| z / tr);
        dm(m)
    }

    fn random_vec(n: usize, rng: &mut ChaCha8Rng) -> Array1<C64> {
        let v = random_matrix(n, 1, rng).column(0).to_owned();
        let nrm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        v.mapv(|z| z / nrm)
    }

    #[test]
    fn product_state_gives_projector() {
        let a = array![c(0.6), c(0.8)];
        let b = array![c(0.0), c(1.0)];
        let v = Array1::from_iter(a.iter().flat_map(|x| b.iter().map(move |y| x * y)));
        let rho = reduced_density_matrix(&v, 2, 2, 0, 1).unwrap();
        let expect = array![[c(0.36), c(0.48)], [c(0.48), c(0.64)]];
        assert!(rho.matrix.iter().zip(expect.iter()).all(|(x, y)| (x - y).norm() < 1e-15));
    }

    #[test]
    fn bell_pair_is_maximally_mixed() {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let v = array![c(r), c(0.0), c(0.0), c(r)];
        let rho = reduced_density_matrix(&v, 2, 2, 1, 2).unwrap();
        assert!((rho.matrix[[0, 0]] - c(0.5)).norm() < 1e-15);
        assert!((rho.matrix[[1, 1]] - c(0.5)).norm() < 1e-15);
        assert!(rho.matrix[[0, 1]].norm() < 1e-15);
    }

    #[test]
    fn purity_matches_schmidt_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let v = random_vec(256, &mut rng);
        let rho = reduced_density_matrix(&v, 8, 2, 3, 6).unwrap();
        let purity: f64 = rho.matrix.dot(&rho.matrix).diag().sum().re;
        // Tr ρ² is invariant under the order of the complement, so the
        // bipartition (window) | (rest) gives it directly.
        let m = window_matrix(&v, 8, 2, 3, 6).unwrap();
        let s = crate::tensor::singular_values(&m.view()).unwrap();
        let oracle: f64 = s.iter().map(|x| x.powi(4)).sum();
        assert!((purity - oracle).abs() < 1e-12);
        let tr: C64 = rho.matrix.diag().sum();
        assert!((tr - c(1.0)).norm() < 1e-10);
    }

    #[test]
    fn region_errors() {
        let v = Array1::from_elem(8, c(1.0 / 8f64.sqrt()));
        assert!(matches!(reduced_density_matrix(&v, 3, 2, 0, 3), Err(Error::Argument(_))));
        assert!(matches!(reduced_density_matrix(&v, 3, 2, 2, 2), Err(Error::Argument(_))));
    }

    #[test]
    fn capacity_guard() {
        assert!(matches!(check_capacity(2, 21), Err(Error::Capacity { .. })));
        assert_eq!(check_capacity(2, 20).unwrap(), 1 << 20);
    }

    #[test]
    fn uhlmann_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rho = random_dm(4, 4, &mut rng);
        assert!((uhlmann_exact(&rho, &rho).unwrap() - 1.0).abs() < 1e-10);
        let p0 = dm(array![[c(1.0), c(0.0)], [c(0.0), c(0.0)]]);
        let p1 = dm(array![[c(0.0), c(0.0)], [c(0.0), c(1.0)]]);
        assert!(uhlmann_exact(&p0, &p1).unwrap().abs() < 1e-12);
        let a = dm(array![[c(0.75), c(0.0)], [c(0.0), c(0.25)]]);
        let b = dm(array![[c(0.25), c(0.0)], [c(0.0), c(0.75)]]);
        assert!((uhlmann_exact(&a, &b).unwrap() - 0.75f64.sqrt()).abs() < 1e-10);
        assert!(matches!(uhlmann_exact(&a, &rho), Err(Error::Argument(_))));
    }

    #[test]
    fn uhlmann_fidelity_axioms() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for trial in 0..50 {
            let n = 2 + trial % 5;
            let rho = random_dm(n, 1 + trial % n, &mut rng);
            let sigma = random_dm(n, n, &mut rng);
            let f = uhlmann_exact(&rho, &sigma).unwrap();
            let g = uhlmann_exact(&sigma, &rho).unwrap();
            assert!((f - g).abs() < 1e-10);
            assert!((0.0..=1.0 + 1e-10).contains(&f));
            assert!(f < 1.0 - 1e-8 || trace_distance(&rho, &sigma).unwrap() <= 1e-8);
            let u = random_unitary(n, &mut rng);
            let rot = |d: &DensityMatrix| dm(u.dot(&d.matrix).dot(&dagger(&u.view())));
            assert!((uhlmann_exact(&rot(&rho), &rot(&sigma)).unwrap() - f).abs() < 1e-10);
            let phi = random_vec(n, &mut rng);
            let pure = dm(Array2::from_shape_fn((n, n), |(i, j)| phi[i] * phi[j].conj()));
            let expect: C64 = phi.iter().zip(rho.matrix.dot(&phi).iter()).map(|(a, b)| a.conj() * b).sum();
            assert!((uhlmann_exact(&rho, &pure).unwrap() - expect.re.sqrt()).abs() < 1e-10);
        }
    }

    #[test]
    fn fidelity_one_only_for_equal_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let rho = random_dm(3, 3, &mut rng);
        let mut close = rho.matrix.clone();
        close[[0, 0]] += c(1e-3);
        close[[1, 1]] -= c(1e-3);
        let close = dm(close);
        assert!(trace_distance(&rho, &close).unwrap() > 1e-8);
        assert!(uhlmann_exact(&rho, &close).unwrap() < 1.0 - 1e-10);
    }
}
