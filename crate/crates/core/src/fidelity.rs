//! Subsystem fidelities between two canonical MPSes.
//!
//! All three reduce to the trace norm of a small core matrix: the mixed
//! environment at a cut (half system), the window transfer object (window),
//! or an alternating maximization over one isometry per side (disjoint).

use ndarray::{Array1, Array2, Array3};
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::mps::{transfer_left, transfer_right, Mps};
use crate::tensor::{dagger, optimal_isometry, random_isometry, singular_values, svd_truncate, TruncationSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Region {
    /// Sites `0..cut`.
    LeftHalf { cut: usize },
    /// Sites `cut..L`.
    RightHalf { cut: usize },
    /// Sites `start..end`.
    Window { start: usize, end: usize },
}

impl Region {
    pub fn sites(&self, length: usize) -> (usize, usize) {
        match *self {
            Region::LeftHalf { cut } => (0, cut),
            Region::RightHalf { cut } => (cut, length),
            Region::Window { start, end } => (start, end),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    HalfSystem,
    WindowUhlmann,
    WindowDisjoint,
    TtnBranch,
}

#[derive(Clone, Debug)]
pub struct FidelityReport {
    pub value: f64,
    pub singular_spectrum: Vec<f64>,
    pub method: Method,
    pub iterations: usize,
    pub converged: bool,
    pub restarts_used: usize,
}

impl FidelityReport {
    fn from_core(core: &Array2<C64>, method: Method) -> Result<Self> {
        let s = singular_values(&core.view())?;
        Ok(Self {
            value: s.sum(),
            singular_spectrum: s.to_vec(),
            method,
            iterations: 0,
            converged: true,
            restarts_used: 0,
        })
    }
}

fn check_pair(a: &Mps, b: &Mps) -> Result<()> {
    if !a.is_canonical() || !b.is_canonical() {
        return Err(Error::State("fidelities require canonical MPSes".into()));
    }
    if a.len() != b.len() || a.phys_dim() != b.phys_dim() {
        return Err(Error::Argument(format!(
            "states differ in shape: ({}, {}) vs ({}, {})",
            a.len(),
            a.phys_dim(),
            b.len(),
            b.phys_dim()
        )));
    }
    Ok(())
}

fn weighted(env: &Array2<C64>, sa: &Array1<f64>, sb: &Array1<f64>) -> Array2<C64> {
    Array2::from_shape_fn(env.dim(), |(i, j)| env[[i, j]] * (sa[i] * sb[j]))
}

/// Fidelity of the reduced states on sites `0..cut` (`left = true`) or
/// `cut..L`.
pub fn half_system_fidelity(a: &Mps, b: &Mps, cut: usize, left: bool) -> Result<FidelityReport> {
    check_pair(a, b)?;
    let l = a.len();
    if cut == 0 || cut >= l {
        return Err(Error::Argument(format!("cut {cut} must lie strictly inside 0..{l}")));
    }
    let mut env = Array2::<C64>::ones((1, 1));
    if left {
        for n in 0..cut {
            env = transfer_left(&env, &a.left_tensor(n), &b.left_tensor(n));
        }
    } else {
        for n in (cut..l).rev() {
            env = transfer_right(&env, &a.right_tensor(n), &b.right_tensor(n));
        }
    }
    FidelityReport::from_core(&weighted(&env, a.schmidt(cut), b.schmidt(cut)), Method::HalfSystem)
}

/// Half-system fidelities at every cut `1..L`, from one environment sweep.
pub fn half_system_profile(a: &Mps, b: &Mps, left: bool) -> Result<Vec<FidelityReport>> {
    check_pair(a, b)?;
    let l = a.len();
    let mut env = Array2::<C64>::ones((1, 1));
    let mut out = Vec::with_capacity(l - 1);
    if left {
        for cut in 1..l {
            env = transfer_left(&env, &a.left_tensor(cut - 1), &b.left_tensor(cut - 1));
            out.push(FidelityReport::from_core(&weighted(&env, a.schmidt(cut), b.schmidt(cut)), Method::HalfSystem)?);
        }
    } else {
        for cut in (1..l).rev() {
            env = transfer_right(&env, &a.right_tensor(cut), &b.right_tensor(cut));
            out.push(FidelityReport::from_core(&weighted(&env, a.schmidt(cut), b.schmidt(cut)), Method::HalfSystem)?);
        }
        out.reverse();
    }
    Ok(out)
}

/// Half-system fidelity for a [`Region::LeftHalf`] or [`Region::RightHalf`].
pub fn region_fidelity(a: &Mps, b: &Mps, region: Region) -> Result<FidelityReport> {
    match region {
        Region::LeftHalf { cut } => half_system_fidelity(a, b, cut, true),
        Region::RightHalf { cut } => half_system_fidelity(a, b, cut, false),
        Region::Window { start, end } => window_fidelity(a, b, start, end),
    }
}

fn check_window(a: &Mps, start: usize, end: usize) -> Result<()> {
    if start >= end || end > a.len() {
        return Err(Error::Argument(format!("window {start}..{end} invalid for length {}", a.len())));
    }
    Ok(())
}

/// Window transfer object `T[(α, α'), (β, β')]` for sites `start..end`.
fn window_transfer(a: &Mps, b: &Mps, start: usize, end: usize) -> Result<Array2<C64>> {
    let sa = a.schmidt(start);
    let sb = b.schmidt(start);
    let (ca, cb) = (sa.len(), sb.len());
    // t[(α, β), γ, δ], starting from S_a[α] S_b[β] δ_αγ δ_βδ.
    let mut t = Array3::<C64>::zeros((ca * cb, ca, cb));
    for i in 0..ca {
        for j in 0..cb {
            t[[i * cb + j, i, j]] = C64::new(sa[i] * sb[j], 0.0);
        }
    }
    let rows = ca * cb;
    for n in start..end {
        let ba = a.right_tensor(n);
        let bb = b.right_tensor(n);
        let (ga, d, ga2) = ba.dim();
        let (gb, _, gb2) = bb.dim();
        // u[r, δ, s, γ'] = Σ_γ t[r, γ, δ] Ba[γ, s, γ']
        let tp = t.view().permuted_axes([0, 2, 1]).as_standard_layout().into_owned();
        let tp = tp.into_shape_clone((rows * gb, ga))?;
        let u = tp.dot(&ba.into_shape_clone((ga, d * ga2))?);
        let u = u.into_shape_clone((rows, gb, d, ga2))?;
        // t'[r, γ', δ'] = Σ_{δ, s} u[r, δ, s, γ'] conj(Bb[δ, s, δ'])
        let up = u.permuted_axes([0, 3, 1, 2]).as_standard_layout().into_owned();
        let up = up.into_shape_clone((rows * ga2, gb * d))?;
        let bbm = bb.into_shape_clone((gb * d, gb2))?.mapv(|z| z.conj());
        t = up.dot(&bbm).into_shape_clone((rows, ga2, gb2))?;
    }
    let (_, ga2, gb2) = t.dim();
    // (α, β, α', β') → (α, α') × (β, β')
    let t4 = t.into_shape_clone((ca, cb, ga2, gb2))?;
    let m = t4.permuted_axes([0, 2, 1, 3]).as_standard_layout().into_owned();
    Ok(m.into_shape_clone((ca * ga2, cb * gb2))?)
}

/// `X[(α, α'), s]`: the window's matrix product for every physical string
/// `s`, including the Schmidt values on both boundary bonds.
fn window_strings(m: &Mps, start: usize, end: usize) -> Result<Array2<C64>> {
    let s0 = m.schmidt(start);
    let c = s0.len();
    let mut x = Array3::<C64>::zeros((c, 1, c));
    for i in 0..c {
        x[[i, 0, i]] = C64::new(s0[i], 0.0);
    }
    for n in start..end {
        let b = m.right_tensor(n);
        let (g, d, g2) = b.dim();
        let (_, strings, _) = x.dim();
        let xm = x.into_shape_clone((c * strings, g))?;
        x = xm.dot(&b.into_shape_clone((g, d * g2))?).into_shape_clone((c, strings * d, g2))?;
    }
    let (_, strings, g2) = x.dim();
    let xp = x.permuted_axes([0, 2, 1]).as_standard_layout().into_owned();
    Ok(xp.into_shape_clone((c * g2, strings))?)
}

/// Core of the transfer object `T = X_a·X_b†` reduced through thin SVDs of
/// both factors; worthwhile when `d^|M|` is below the bond-space extents.
fn factored_core(a: &Mps, b: &Mps, start: usize, end: usize) -> Result<Array2<C64>> {
    let xa = svd_truncate(&window_strings(a, start, end)?.view(), &TruncationSpec::unbounded())?;
    let xb = svd_truncate(&window_strings(b, start, end)?.view(), &TruncationSpec::unbounded())?;
    let core = dagger(&xa.v.view()).dot(&xb.v);
    Ok(Array2::from_shape_fn(core.dim(), |(i, j)| core[[i, j]] * (xa.s[i] * xb.s[j])))
}

/// Uhlmann fidelity of the reduced states on sites `start..end`.
pub fn window_fidelity(a: &Mps, b: &Mps, start: usize, end: usize) -> Result<FidelityReport> {
    check_pair(a, b)?;
    check_window(a, start, end)?;
    let strings = (a.phys_dim() as u128).checked_pow((end - start) as u32);
    let extent = |m: &Mps| (m.schmidt(start).len() * m.schmidt(end).len()) as u128;
    let t = match strings {
        Some(n) if n <= extent(a).min(extent(b)) => factored_core(a, b, start, end)?,
        _ => window_transfer(a, b, start, end)?,
    };
    FidelityReport::from_core(&t, Method::WindowUhlmann)
}

#[derive(Clone, Debug)]
pub struct DisjointOptions {
    pub max_iterations: usize,
    /// Relative change of the objective between sweeps.
    pub tol: f64,
    /// Total number of starts: the identity start plus `restarts - 1`
    /// seeded random ones.
    pub restarts: usize,
    pub seed: u64,
}

impl Default for DisjointOptions {
    fn default() -> Self {
        Self { max_iterations: 200, tol: 1e-12, restarts: 3, seed: 0 }
    }
}

/// Truncated identity of shape `rows × cols`.
fn truncated_identity(rows: usize, cols: usize) -> Array2<C64> {
    Array2::from_shape_fn((rows, cols), |(i, j)| if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) })
}

struct Run {
    value: f64,
    spectrum: Array1<f64>,
    iterations: usize,
    converged: bool,
}

fn alternate(a: &Mps, b: &Mps, start: usize, end: usize, mut ur: Array2<C64>, opts: &DisjointOptions) -> Result<Run> {
    let (sa0, sb0) = (a.schmidt(start), b.schmidt(start));
    let ba: Vec<Array3<C64>> = (start..end).map(|n| a.right_tensor(n)).collect();
    let bb: Vec<Array3<C64>> = (start..end).map(|n| b.right_tensor(n)).collect();
    let mut value = 0.0;
    let mut spectrum = Array1::zeros(0);
    for it in 0..opts.max_iterations {
        // Fix U_R, solve U_L.
        let mut r = ur.t().to_owned();
        for k in (0..ba.len()).rev() {
            r = transfer_right(&r, &ba[k], &bb[k]);
        }
        let (ul, _) = optimal_isometry(&weighted(&r, sa0, sb0).view())?;
        // Fix U_L, solve U_R.
        let mut lm = weighted(&ul.t().to_owned(), sa0, sb0);
        for k in 0..ba.len() {
            lm = transfer_left(&lm, &ba[k], &bb[k]);
        }
        let s = singular_values(&lm.view())?;
        let (new_ur, v) = optimal_isometry(&lm.view())?;
        ur = new_ur;
        let change = (v - value).abs();
        value = v;
        spectrum = s;
        if change <= opts.tol * value.max(f64::MIN_POSITIVE) {
            return Ok(Run { value, spectrum, iterations: it + 1, converged: true });
        }
    }
    Ok(Run { value, spectrum, iterations: opts.max_iterations, converged: false })
}

/// Fidelity with the purification isometry restricted to `W_L ⊗ W_R`,
/// maximized by alternating exact updates of the two factors.
pub fn disjoint_window_fidelity(a: &Mps, b: &Mps, start: usize, end: usize, opts: &DisjointOptions) -> Result<FidelityReport> {
    check_pair(a, b)?;
    check_window(a, start, end)?;
    if opts.max_iterations == 0 || opts.restarts == 0 {
        return Err(Error::Argument("disjoint fidelity needs at least one iteration and one start".into()));
    }
    let (ca, cb) = (a.schmidt(end).len(), b.schmidt(end).len());
    let mut starts = vec![truncated_identity(cb, ca)];
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for _ in 1..opts.restarts {
        let g = random_isometry(ca.min(cb), ca.max(cb), &mut rng);
        if ca == cb {
            starts.push(dagger(&g.view()));
            starts.push(g);
        } else if cb < ca {
            starts.push(g);
        } else {
            starts.push(dagger(&g.view()));
        }
    }
    let mut best: Option<Run> = None;
    for ur in starts.iter() {
        let run = alternate(a, b, start, end, ur.clone(), opts)?;
        if best.as_ref().is_none_or(|b| run.value > b.value) {
            best = Some(run);
        }
    }
    let best = best.expect("at least one start");
    Ok(FidelityReport {
        value: best.value,
        singular_spectrum: best.spectrum.to_vec(),
        method: Method::WindowDisjoint,
        iterations: best.iterations,
        converged: best.converged,
        restarts_used: starts.len(),
    })
}
