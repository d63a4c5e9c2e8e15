//! Transverse-field Ising chain
//! `H = -½ Σ_i (X_i X_{i+1} + h Z_i - (4/2π)·1)` on open boundaries.

use ndarray::{array, Array2};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::tensor::kron;

/// Largest chain for which the dense Hamiltonian is assembled.
pub const DENSE_MAX_LENGTH: usize = 14;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IsingSpec {
    pub h: f64,
    pub length: usize,
    pub include_offset: bool,
}

impl IsingSpec {
    pub fn new(length: usize, h: f64) -> Self {
        Self { h, length, include_offset: false }
    }

    pub fn with_offset(mut self) -> Self {
        self.include_offset = true;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.length < 2 {
            return Err(Error::Argument(format!("Ising chain needs at least 2 sites, got {}", self.length)));
        }
        if !(self.h >= 0.0) || !self.h.is_finite() {
            return Err(Error::Argument(format!("transverse field must be finite and non-negative, got {}", self.h)));
        }
        Ok(())
    }

    /// Single-site part `-(h/2) Z + (1/π)·1` (offset only when enabled).
    fn site_term(&self) -> Array2<C64> {
        let z = pauli_z();
        let mut t = z.mapv(|v| v * (-self.h / 2.0));
        if self.include_offset {
            let c = 4.0 / (2.0 * std::f64::consts::PI) / 2.0;
            for i in 0..2 {
                t[[i, i]] += C64::new(c, 0.0);
            }
        }
        t
    }
}

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub fn pauli_x() -> Array2<C64> {
    array![[c(0.0), c(1.0)], [c(1.0), c(0.0)]]
}

pub fn pauli_z() -> Array2<C64> {
    array![[c(1.0), c(0.0)], [c(0.0), c(-1.0)]]
}

/// One 4×4 term per bond. Each site's field (and offset) is split evenly
/// between its two bonds; edge sites put their full share on their only bond.
pub fn ising_terms(spec: &IsingSpec) -> Result<Vec<Array2<C64>>> {
    spec.validate()?;
    let l = spec.length;
    let id = Array2::from_diag_elem(2, c(1.0));
    let xx = kron(&pauli_x().view(), &pauli_x().view()).mapv(|v| v * -0.5);
    let site = spec.site_term();
    let share = |n: usize| if n == 0 || n == l - 1 { 1.0 } else { 0.5 };
    Ok((0..l - 1)
        .map(|n| {
            let left = kron(&site.view(), &id.view()).mapv(|v| v * share(n));
            let right = kron(&id.view(), &site.view()).mapv(|v| v * share(n + 1));
            &xx + &left + &right
        })
        .collect())
}

/// Dense real Hamiltonian, site 0 the most significant digit.
pub fn dense_hamiltonian(spec: &IsingSpec) -> Result<Array2<f64>> {
    spec.validate()?;
    let l = spec.length;
    if l > DENSE_MAX_LENGTH {
        return Err(Error::Capacity { requested: 1u128 << l, limit: 1u128 << DENSE_MAX_LENGTH });
    }
    let dim = 1usize << l;
    let offset = if spec.include_offset { 4.0 / (2.0 * std::f64::consts::PI) / 2.0 * l as f64 } else { 0.0 };
    let mut h = Array2::<f64>::zeros((dim, dim));
    for s in 0..dim {
        let bit = |n: usize| (s >> (l - 1 - n)) & 1;
        let mut diag = offset;
        for n in 0..l {
            diag += -spec.h / 2.0 * if bit(n) == 0 { 1.0 } else { -1.0 };
        }
        h[[s, s]] += diag;
        for n in 0..l - 1 {
            let flipped = s ^ (1 << (l - 1 - n)) ^ (1 << (l - 2 - n));
            h[[flipped, s]] += -0.5;
        }
    }
    Ok(h)
}

/// Lowest eigenvalue of the dense Hamiltonian.
pub fn exact_ground_energy(spec: &IsingSpec) -> Result<f64> {
    use ndarray_linalg::{EigValsh, UPLO};
    let h = dense_hamiltonian(spec)?;
    let vals = h.eigvalsh(UPLO::Lower)?;
    Ok(vals[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_sites_without_field() {
        let spec = IsingSpec::new(2, 0.0);
        let terms = ising_terms(&spec).unwrap();
        assert_eq!(terms.len(), 1);
        let xx = kron(&pauli_x().view(), &pauli_x().view()).mapv(|v| v * -0.5);
        assert_eq!(terms[0], xx);
        assert!((exact_ground_energy(&spec).unwrap() + 0.5).abs() < 1e-14);
    }

    #[test]
    fn strong_field_aligns_with_z() {
        let spec = IsingSpec { h: 1e6, length: 4, include_offset: false };
        let h = dense_hamiltonian(&spec).unwrap();
        let mut diag: Vec<(usize, f64)> = (0..16).map(|i| (i, h[[i, i]])).collect();
        diag.sort_by(|a, b| a.1.total_cmp(&b.1));
        assert_eq!(diag[0].0, 0);
    }

    #[test]
    fn bond_terms_sum_to_dense() {
        let spec = IsingSpec::new(5, 0.7).with_offset();
        let terms = ising_terms(&spec).unwrap();
        let dense = dense_hamiltonian(&spec).unwrap();
        let mut sum = Array2::<C64>::zeros((32, 32));
        let id = |k: usize| Array2::<C64>::from_diag_elem(1 << k, c(1.0));
        for (n, t) in terms.iter().enumerate() {
            let left = kron(&id(n).view(), &t.view());
            sum = sum + kron(&left.view(), &id(5 - n - 2).view());
        }
        for ((i, j), v) in dense.indexed_iter() {
            assert!((sum[[i, j]] - c(*v)).norm() < 1e-13);
        }
    }

    #[test]
    fn offset_shifts_energy_per_site() {
        let without = exact_ground_energy(&IsingSpec::new(8, 1.0)).unwrap();
        let with = exact_ground_energy(&IsingSpec::new(8, 1.0).with_offset()).unwrap();
        assert!((with - without - 8.0 / std::f64::consts::PI).abs() < 1e-12);
    }
}
