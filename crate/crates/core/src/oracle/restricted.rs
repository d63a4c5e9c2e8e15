use ndarray::{Array1, Array2, Array3};
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{check_capacity, window_matrix};
use crate::error::{Error, Result};
use crate::tensor::{dagger, identity, optimal_isometry, random_unitary, trace_norm};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FidelityMode {
    /// One unitary on the whole complement.
    Joint,
    /// A product `U_L ⊗ U_R` of unitaries on the two sides of the window.
    Disjoint,
}

#[derive(Clone, Debug)]
pub struct RestrictedOptions {
    pub max_iterations: usize,
    pub tol: f64,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for RestrictedOptions {
    fn default() -> Self {
        Self { max_iterations: 500, tol: 1e-13, restarts: 5, seed: 0 }
    }
}

#[derive(Clone, Debug)]
pub struct RestrictedResult {
    pub value: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// `max |⟨b| (U ⊗ 1_M) |a⟩|` over unitaries `U` on the complement of the
/// window `start..end`, either unrestricted or factorized into left and
/// right parts.
pub fn restricted_fidelity(
    a: &Array1<C64>,
    b: &Array1<C64>,
    length: usize,
    phys_dim: usize,
    window: (usize, usize),
    mode: FidelityMode,
    opts: &RestrictedOptions,
) -> Result<RestrictedResult> {
    let (start, end) = window;
    if start >= end || end > length {
        return Err(Error::Argument(format!("window {start}..{end} invalid for length {length}")));
    }
    if a.len() != b.len() {
        return Err(Error::Dimension("statevectors differ in length".into()));
    }
    match mode {
        FidelityMode::Joint => {
            let ma = window_matrix(a, length, phys_dim, start, end)?;
            let mb = window_matrix(b, length, phys_dim, start, end)?;
            let value = trace_norm(&dagger(&mb.view()).dot(&ma).view())?;
            Ok(RestrictedResult { value, converged: true, iterations: 0 })
        }
        FidelityMode::Disjoint => disjoint(a, b, length, phys_dim, start, end, opts),
    }
}

fn disjoint(
    a: &Array1<C64>,
    b: &Array1<C64>,
    length: usize,
    phys_dim: usize,
    start: usize,
    end: usize,
    opts: &RestrictedOptions,
) -> Result<RestrictedResult> {
    check_capacity(phys_dim, length)?;
    let dl = phys_dim.pow(start as u32);
    let dm = phys_dim.pow((end - start) as u32);
    let dr = phys_dim.pow((length - end) as u32);
    let ta: Array3<C64> = a.clone().into_shape_clone((dl, dm, dr))?;
    let tb: Array3<C64> = b.clone().into_shape_clone((dl, dm, dr))?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);

    let mut best = RestrictedResult { value: 0.0, converged: false, iterations: 0 };
    for restart in 0..opts.restarts.max(1) {
        let mut ur = if restart == 0 { identity(dr) } else { random_unitary(dr, &mut rng) };
        let mut value = 0.0;
        let mut converged = false;
        let mut iterations = 0;
        for it in 0..opts.max_iterations {
            iterations = it + 1;
            // a'[l, m, r'] = Σ_r U_R[r', r] a[l, m, r]
            let ar = rotate_right(&ta, &ur);
            let ml = left_matrix(&ar, &tb);
            let (ul, _) = optimal_isometry(&ml.view())?;
            let al = rotate_left(&ta, &ul);
            let mr = right_matrix(&al, &tb);
            let (new_ur, v) = optimal_isometry(&mr.view())?;
            ur = new_ur;
            let change = v - value;
            value = v;
            if change.abs() <= opts.tol {
                converged = true;
                break;
            }
        }
        if restart == 0 || value > best.value {
            best = RestrictedResult { value, converged, iterations };
        }
    }
    Ok(best)
}

fn rotate_right(t: &Array3<C64>, u: &Array2<C64>) -> Array3<C64> {
    let (dl, dm, dr) = t.dim();
    let flat = t.as_standard_layout().into_shape_with_order((dl * dm, dr)).expect("contiguous");
    flat.dot(&u.t()).into_shape_clone((dl, dm, u.nrows())).expect("contiguous")
}

fn rotate_left(t: &Array3<C64>, u: &Array2<C64>) -> Array3<C64> {
    let (dl, dm, dr) = t.dim();
    let flat = t.as_standard_layout().into_shape_with_order((dl, dm * dr)).expect("contiguous");
    u.dot(&flat).into_shape_clone((u.nrows(), dm, dr)).expect("contiguous")
}

/// `M[l, l'] = Σ_{m, r} a[l, m, r] conj(b[l', m, r])`, so that
/// `⟨b|U_L ⊗ 1|a⟩ = Tr(U_L M)`.
fn left_matrix(a: &Array3<C64>, b: &Array3<C64>) -> Array2<C64> {
    let (dl, dm, dr) = a.dim();
    let am = a.as_standard_layout().into_shape_with_order((dl, dm * dr)).expect("contiguous");
    let bm = b.as_standard_layout().into_shape_with_order((dl, dm * dr)).expect("contiguous");
    am.dot(&dagger(&bm.view()))
}

/// `M[r, r'] = Σ_{l, m} a[l, m, r] conj(b[l, m, r'])`.
fn right_matrix(a: &Array3<C64>, b: &Array3<C64>) -> Array2<C64> {
    let (dl, dm, dr) = a.dim();
    let am = a.as_standard_layout().into_shape_with_order((dl * dm, dr)).expect("contiguous");
    let bm = b.as_standard_layout().into_shape_with_order((dl * dm, dr)).expect("contiguous");
    am.t().dot(&bm.mapv(|z| z.conj()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{reduced_density_matrix, uhlmann_exact};
    use crate::tensor::random_matrix;

    fn random_vec(n: usize, seed: u64) -> Array1<C64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = random_matrix(n, 1, &mut rng).column(0).to_owned();
        let nrm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        v.mapv(|z| z / nrm)
    }

    fn product(vs: &[Array1<C64>]) -> Array1<C64> {
        vs.iter().skip(1).fold(vs[0].clone(), |acc, v| {
            Array1::from_iter(acc.iter().flat_map(|x| v.iter().map(move |y| x * y)))
        })
    }

    #[test]
    fn equal_states_give_one() {
        let a = random_vec(256, 1);
        for mode in [FidelityMode::Joint, FidelityMode::Disjoint] {
            let r = restricted_fidelity(&a, &a, 8, 2, (3, 5), mode, &RestrictedOptions::default()).unwrap();
            assert!((r.value - 1.0).abs() < 1e-10, "{mode:?}: {}", r.value);
        }
    }

    #[test]
    fn product_states_give_window_overlap() {
        let sa: Vec<_> = (0..6).map(|i| random_vec(2, 10 + i)).collect();
        let sb: Vec<_> = (0..6).map(|i| random_vec(2, 20 + i)).collect();
        let (a, b) = (product(&sa), product(&sb));
        let expect: f64 = (2..4)
            .map(|i| sa[i].iter().zip(sb[i].iter()).map(|(x, y)| x.conj() * y).sum::<C64>().norm())
            .product();
        for mode in [FidelityMode::Joint, FidelityMode::Disjoint] {
            let r = restricted_fidelity(&a, &b, 6, 2, (2, 4), mode, &RestrictedOptions::default()).unwrap();
            assert!((r.value - expect).abs() < 1e-10, "{mode:?}: {} vs {expect}", r.value);
        }
    }

    #[test]
    fn joint_equals_uhlmann_and_bounds_disjoint() {
        for seed in 0..5 {
            let a = random_vec(256, 100 + seed);
            let b = random_vec(256, 200 + seed);
            let window = (2 + seed as usize % 3, 5 + seed as usize % 2);
            let joint = restricted_fidelity(&a, &b, 8, 2, window, FidelityMode::Joint, &RestrictedOptions::default()).unwrap();
            let rho = reduced_density_matrix(&a, 8, 2, window.0, window.1).unwrap();
            let sigma = reduced_density_matrix(&b, 8, 2, window.0, window.1).unwrap();
            assert!((joint.value - uhlmann_exact(&rho, &sigma).unwrap()).abs() < 1e-10);
            let dis = restricted_fidelity(&a, &b, 8, 2, window, FidelityMode::Disjoint, &RestrictedOptions::default()).unwrap();
            assert!(dis.value <= joint.value + 1e-10);
        }
    }
}
