//! Quick cross-checks of the tensor-network routines against the dense
//! oracles, run by the `selftest` subcommand.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::fidelity::{disjoint_window_fidelity, half_system_fidelity, window_fidelity, DisjointOptions};
use crate::mps::random_mps;
use crate::oracle::{
    mps_to_statevector, purification_decompose, purify, reduced_density_matrix, restricted_fidelity, ttn_to_statevector,
    uhlmann_exact, FidelityMode, RestrictedOptions,
};
use crate::tensor::{max_abs, optimal_isometry, random_isometry, random_matrix, trace_norm};
use crate::ttn::{branch_fidelity, branch_regions, random_ttn};

#[derive(Clone, Debug)]
pub struct Check {
    pub name: &'static str,
    pub worst: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.worst <= self.tolerance
    }
}

fn mps_checks(seed: u64, trials: usize) -> Result<[Check; 3]> {
    let l = 8;
    let (mut half, mut window, mut disjoint) = (0.0f64, 0.0f64, 0.0f64);
    for k in 0..trials as u64 {
        let chi = [2, 3, 4][(k % 3) as usize];
        let a = random_mps(l, 2, chi, seed.wrapping_add(2 * k))?;
        let b = random_mps(l, 2, chi, seed.wrapping_add(2 * k + 1))?;
        let (va, vb) = (mps_to_statevector(&a)?, mps_to_statevector(&b)?);
        for cut in 1..l {
            let rho = reduced_density_matrix(&va, l, 2, 0, cut)?;
            let sigma = reduced_density_matrix(&vb, l, 2, 0, cut)?;
            half = half.max((half_system_fidelity(&a, &b, cut, true)?.value - uhlmann_exact(&rho, &sigma)?).abs());
        }
        for (s, e) in [(1, 3), (2, 6), (3, 4)] {
            let rho = reduced_density_matrix(&va, l, 2, s, e)?;
            let sigma = reduced_density_matrix(&vb, l, 2, s, e)?;
            window = window.max((window_fidelity(&a, &b, s, e)?.value - uhlmann_exact(&rho, &sigma)?).abs());
            let fd = disjoint_window_fidelity(&a, &b, s, e, &DisjointOptions::default())?.value;
            let oracle = restricted_fidelity(&va, &vb, l, 2, (s, e), FidelityMode::Disjoint, &RestrictedOptions::default())?.value;
            disjoint = disjoint.max((fd - oracle).abs());
        }
    }
    Ok([
        Check { name: "half-system fidelity vs dense Uhlmann", worst: half, tolerance: 1e-8 },
        Check { name: "window fidelity vs dense Uhlmann", worst: window, tolerance: 1e-8 },
        Check { name: "disjoint fidelity vs dense alternating oracle", worst: disjoint, tolerance: 1e-6 },
    ])
}

fn ttn_check(seed: u64, trials: usize) -> Result<Check> {
    let mut worst = 0.0f64;
    for k in 0..trials as u64 {
        let a = random_ttn(3, 4, 2, seed.wrapping_add(2 * k))?;
        let b = random_ttn(3, 4, 2, seed.wrapping_add(2 * k + 1))?;
        let (va, vb) = (ttn_to_statevector(&a)?, ttn_to_statevector(&b)?);
        for br in branch_regions(&a) {
            let rho = reduced_density_matrix(&va, 8, 2, br.start, br.end)?;
            let sigma = reduced_density_matrix(&vb, 8, 2, br.start, br.end)?;
            worst = worst.max((branch_fidelity(&a, &b, &br)?.value - uhlmann_exact(&rho, &sigma)?).abs());
        }
    }
    Ok(Check { name: "tree branch fidelity vs dense Uhlmann", worst, tolerance: 1e-8 })
}

fn purification_checks(seed: u64, trials: usize) -> Result<[Check; 2]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut round_trip, mut maximality) = (0.0f64, 0.0f64);
    for _ in 0..trials {
        let chi = rng.random_range(1..5);
        let chi_x = rng.random_range(1..5);
        let chi_phi = chi_x + rng.random_range(0..3);
        let x = random_matrix(chi, chi_x, &mut rng);
        let w = random_isometry(chi_x, chi_phi, &mut rng);
        let phi = purify(&x, &w)?;
        let w2 = purification_decompose(&phi, &x)?;
        round_trip = round_trip.max(max_abs((x.dot(&w2) - &phi).iter()));

        let m = random_matrix(chi, chi_x, &mut rng);
        let (u, value) = optimal_isometry(&m.view())?;
        let tn = trace_norm(&m.view())?;
        let at = |u: &ndarray::Array2<num_complex::Complex64>| {
            m.iter().zip(u.t().iter()).map(|(a, b)| a * b).sum::<num_complex::Complex64>().re
        };
        maximality = maximality.max((value - tn).abs()).max((at(&u) - tn).abs());
        for _ in 0..5 {
            let r = random_isometry(u.nrows().min(u.ncols()), u.nrows().max(u.ncols()), &mut rng);
            let r = if r.dim() == u.dim() { r } else { r.t().to_owned() };
            maximality = maximality.max(at(&r) - tn);
        }
    }
    Ok([
        Check { name: "purification round trip", worst: round_trip, tolerance: 1e-9 },
        Check { name: "optimal isometry attains the trace norm", worst: maximality, tolerance: 1e-12 },
    ])
}

/// Runs every check with `trials` random instances each.
pub fn run_selftest(seed: u64, trials: usize) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    out.extend(mps_checks(seed, trials)?);
    out.push(ttn_check(seed, trials)?);
    out.extend(purification_checks(seed, trials * 10)?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selftest_passes() {
        for c in run_selftest(5, 3).map_err(|e| e.to_string()).unwrap() {
            assert!(c.passed(), "{c:?}");
        }
    }
}
