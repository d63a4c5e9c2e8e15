#![allow(dead_code)]

use ndarray::{Array2, Axis};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use subfid::fidelity::{disjoint_window_fidelity, half_system_fidelity, window_fidelity, DisjointOptions};
use subfid::mps::{random_mps, Mps};
use subfid::tensor::random_unitary;
use subfid::ttn::{branch_fidelity, branch_regions, random_ttn, Branch, Ttn};

/// A measured violation: `excess ≤ 0` means the property holds.
#[derive(Clone, Debug)]
pub struct Violation {
    pub property: &'static str,
    pub excess: f64,
    pub detail: String,
}

#[derive(Default)]
pub struct Ledger {
    pub items: Vec<Violation>,
}

impl Ledger {
    /// Records `value ≤ bound + tol`.
    pub fn at_most(&mut self, property: &'static str, value: f64, bound: f64, tol: f64, detail: impl Into<String>) {
        self.items.push(Violation { property, excess: value - bound - tol, detail: detail.into() });
    }

    pub fn close(&mut self, property: &'static str, x: f64, y: f64, tol: f64, detail: impl Into<String>) {
        self.items.push(Violation { property, excess: (x - y).abs() - tol, detail: detail.into() });
    }

    pub fn failures(&self) -> Vec<&Violation> {
        self.items.iter().filter(|v| v.excess > 0.0).collect()
    }

    pub fn assert_clean(&self) {
        let f = self.failures();
        assert!(f.is_empty(), "{} violations, first: {:?}", f.len(), f[0]);
    }
}

pub const EXACT_TOL: f64 = 1e-10;
pub const DISJOINT_TOL: f64 = 1e-6;
pub const RANGE_TOL: f64 = 1e-9;

pub fn opts(seed: u64) -> DisjointOptions {
    DisjointOptions { seed, ..Default::default() }
}

/// `Γ → U Γ` on one site.
pub fn rotate_mps(psi: &Mps, u: &Array2<C64>, site: usize) -> Mps {
    psi.apply_one_site_gate(&u.view(), site).expect("unitary gate")
}

/// Applies `u` to the physical leg of `site` through its layer-1 isometry.
pub fn rotate_ttn(ttn: &Ttn, u: &Array2<C64>, site: usize) -> Ttn {
    let mut layers = ttn.layers().to_vec();
    let w = &mut layers[0][site / 2];
    let axis = Axis(1 + site % 2);
    let old = w.clone();
    for (mut lane, src) in w.lanes_mut(axis).into_iter().zip(old.lanes(axis)) {
        lane.assign(&u.dot(&src));
    }
    Ttn::new(ttn.phys_dim(), layers, ttn.top().clone()).expect("rotated tree")
}

pub fn mps_pair(seed: u64) -> (Mps, Mps) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let l = rng.random_range(6..=8);
    let chi = rng.random_range(1..=4);
    let a = random_mps(l, 2, chi, rng.random()).expect("random mps");
    // Half the pairs are close to each other so that fidelities span (0, 1].
    let b = if rng.random_bool(0.5) {
        let u = close_unitary(&mut rng, 0.3);
        rotate_mps(&rotate_mps(&a, &u, rng.random_range(0..l)), &u, rng.random_range(0..l))
    } else {
        random_mps(l, 2, rng.random_range(1..=4), rng.random()).expect("random mps")
    };
    (a, b)
}

fn close_unitary<R: Rng>(rng: &mut R, strength: f64) -> Array2<C64> {
    let h = subfid::tensor::random_matrix(2, 2, rng);
    let h = (&h + &subfid::tensor::dagger(&h.view())).mapv(|z| z * 0.5);
    subfid::tensor::expm_hermitian(&h.view(), C64::new(0.0, -strength)).expect("exponential")
}

/// Range, symmetry, identity, nesting, `F_d ≤ F` and local-unitary invariance
/// for the three MPS fidelity kinds on one random pair.
pub fn mps_invariants(seed: u64, ledger: &mut Ledger) {
    let (a, b) = mps_pair(seed);
    let l = a.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let tag = |s: &str| format!("seed {seed}: {s}");

    let half = |x: &Mps, y: &Mps, c: usize, left: bool| half_system_fidelity(x, y, c, left).expect("half").value;
    let win = |x: &Mps, y: &Mps, s: usize, e: usize| window_fidelity(x, y, s, e).expect("window").value;
    let dis = |x: &Mps, y: &Mps, s: usize, e: usize| disjoint_window_fidelity(x, y, s, e, &opts(seed)).expect("disjoint").value;

    for left in [true, false] {
        let mut prev: Option<f64> = None;
        let cuts: Vec<usize> = if left { (1..l).collect() } else { (1..l).rev().collect() };
        for &c in &cuts {
            let f = half(&a, &b, c, left);
            ledger.at_most("range", f, 1.0, RANGE_TOL, tag("half"));
            ledger.at_most("range", -f, 0.0, 0.0, tag("half"));
            ledger.close("symmetry", f, half(&b, &a, c, left), EXACT_TOL, tag(&format!("half cut {c}")));
            ledger.close("identity", half(&a, &a, c, left), 1.0, EXACT_TOL, tag("half"));
            // Regions grow along `cuts`, so fidelities must not increase.
            if let Some(p) = prev {
                ledger.at_most("nested monotonicity", f, p, EXACT_TOL, tag(&format!("half cut {c}")));
            }
            prev = Some(f);
        }
    }

    let s = rng.random_range(1..l - 2);
    let e = rng.random_range(s + 1..l - 1);
    let (fw, fd) = (win(&a, &b, s, e), dis(&a, &b, s, e));
    for (kind, f, tol) in [("window", fw, EXACT_TOL), ("disjoint", fd, DISJOINT_TOL)] {
        ledger.at_most("range", f, 1.0, RANGE_TOL, tag(kind));
        ledger.at_most("range", -f, 0.0, 0.0, tag(kind));
        let swapped = if kind == "window" { win(&b, &a, s, e) } else { dis(&b, &a, s, e) };
        ledger.close("symmetry", f, swapped, tol, tag(kind));
        let same = if kind == "window" { win(&a, &a, s, e) } else { dis(&a, &a, s, e) };
        ledger.close("identity", same, 1.0, tol, tag(kind));
    }
    ledger.at_most("F_d <= F", fd, fw, RANGE_TOL, tag(&format!("window {s}..{e}")));

    // Grow the window by one site on either side.
    for (s2, e2) in [(s - 1, e), (s, e + 1), (s - 1, e + 1)] {
        ledger.at_most("nested monotonicity", win(&a, &b, s2, e2), fw, EXACT_TOL, tag("window"));
        ledger.at_most("nested monotonicity", dis(&a, &b, s2, e2), fd, DISJOINT_TOL, tag("disjoint"));
    }

    let u = random_unitary(2, &mut rng);
    let inside = rng.random_range(s..e);
    let (ua, ub) = (rotate_mps(&a, &u, inside), rotate_mps(&b, &u, inside));
    ledger.close("local-unitary invariance", win(&ua, &ub, s, e), fw, EXACT_TOL, tag("window, inside"));
    ledger.close("local-unitary invariance", dis(&ua, &ub, s, e), fd, DISJOINT_TOL, tag("disjoint, inside"));
    let outside = if rng.random_bool(0.5) { rng.random_range(0..s) } else { rng.random_range(e..l) };
    let va = rotate_mps(&a, &random_unitary(2, &mut rng), outside);
    ledger.close("local-unitary invariance", win(&va, &b, s, e), fw, EXACT_TOL, tag("window, outside"));
    ledger.close("local-unitary invariance", dis(&va, &b, s, e), fd, DISJOINT_TOL, tag("disjoint, outside"));

    let c = rng.random_range(1..l);
    let fh = half(&a, &b, c, true);
    ledger.close("local-unitary invariance", half(&rotate_mps(&a, &u, c - 1), &rotate_mps(&b, &u, c - 1), c, true), fh, EXACT_TOL, tag("half, inside"));
    let vb = rotate_mps(&b, &random_unitary(2, &mut rng), rng.random_range(c..l));
    ledger.close("local-unitary invariance", half(&a, &vb, c, true), fh, EXACT_TOL, tag("half, outside"));
}

pub fn ttn_pair(seed: u64) -> (Ttn, Ttn) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let depth = rng.random_range(3..=4);
    let a = random_ttn(depth, rng.random_range(1..=4), 2, rng.random()).expect("random tree");
    let b = random_ttn(depth, rng.random_range(1..=4), 2, rng.random()).expect("random tree");
    (a, b)
}

/// The same properties for branch fidelities; nesting compares each branch
/// with its parent.
pub fn ttn_invariants(seed: u64, ledger: &mut Ledger) {
    let (a, b) = ttn_pair(seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7ee);
    let f = |x: &Ttn, y: &Ttn, br: &Branch| branch_fidelity(x, y, br).expect("branch").value;
    let u = random_unitary(2, &mut rng);
    let l = a.len();
    for br in branch_regions(&a) {
        let tag = format!("seed {seed}: branch {}..{}", br.start, br.end);
        let v = f(&a, &b, &br);
        ledger.at_most("range", v, 1.0, RANGE_TOL, tag.clone());
        ledger.at_most("range", -v, 0.0, 0.0, tag.clone());
        ledger.close("symmetry", v, f(&b, &a, &br), EXACT_TOL, tag.clone());
        ledger.close("identity", f(&a, &a, &br), 1.0, EXACT_TOL, tag.clone());
        if br.layer + 1 < a.depth() {
            let parent = Branch::new(br.layer + 1, br.position / 2);
            ledger.at_most("nested monotonicity", f(&a, &b, &parent), v, EXACT_TOL, tag.clone());
        }
        let inside = rng.random_range(br.start..br.end);
        let rot = f(&rotate_ttn(&a, &u, inside), &rotate_ttn(&b, &u, inside), &br);
        ledger.close("local-unitary invariance", rot, v, EXACT_TOL, tag.clone());
        let outside = (br.end + rng.random_range(0..l - br.size())) % l;
        let one = f(&rotate_ttn(&a, &random_unitary(2, &mut rng), outside), &b, &br);
        ledger.close("local-unitary invariance", one, v, EXACT_TOL, tag);
    }
}

/// Ground energy of `-½ Σ (X_i X_{i+1} + h Z_i)` on `l` open sites, built
/// bit by bit in the computational basis (`Z|0⟩ = |0⟩`).
pub fn dense_ising_ground_energy(l: usize, h: f64) -> f64 {
    use ndarray_linalg::{EigValsh, UPLO};
    let n = 1usize << l;
    let mut m = Array2::<f64>::zeros((n, n));
    for s in 0..n {
        for i in 0..l {
            let bit = (s >> (l - 1 - i)) & 1;
            m[[s, s]] -= 0.5 * h * if bit == 0 { 1.0 } else { -1.0 };
            if i + 1 < l {
                let flipped = s ^ (0b11 << (l - 2 - i));
                m[[flipped, s]] -= 0.5;
            }
        }
    }
    m.eigvalsh(UPLO::Lower).expect("dense eigensolver").iter().cloned().fold(f64::INFINITY, f64::min)
}
