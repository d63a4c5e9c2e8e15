use std::collections::{BTreeMap, VecDeque};

use rayon::prelude::*;
use serde_json::json;

use super::ising::{ising_terms, IsingSpec};
use super::record::{discrete_derivative, ChiRow, ExperimentRecord, Provenance, Rows, ScaleRow, TtnRow};
use super::ising_ground_state;
use crate::error::{Error, Result};
use crate::fidelity::{disjoint_window_fidelity, window_fidelity, DisjointOptions};
use crate::mps::{correlation_length, Mps};
use crate::ttn::{branch_fidelity, branch_regions, optimize_ground_state_with, random_ttn, Ttn};

/// Window of `size` sites centred in a chain of `length`.
pub fn centered_window(length: usize, size: usize) -> (usize, usize) {
    let start = (length - size) / 2;
    (start, start + size)
}

fn check_sizes(length: usize, sizes: &[usize]) -> Result<()> {
    if sizes.is_empty() || sizes.iter().any(|&m| m == 0 || m > length) {
        return Err(Error::Argument(format!("window sizes must lie in 1..={length}")));
    }
    Ok(())
}

/// `(F, F_d)` on centred windows of every size.
fn window_pair(a: &Mps, b: &Mps, sizes: &[usize], opts: &DisjointOptions) -> Result<Vec<(f64, f64)>> {
    check_sizes(a.len(), sizes)?;
    sizes
        .par_iter()
        .map(|&m| {
            let (start, end) = centered_window(a.len(), m);
            let f = window_fidelity(a, b, start, end)?.value;
            let fd = disjoint_window_fidelity(a, b, start, end, opts)?.value;
            Ok((f, fd))
        })
        .collect()
}

/// Window fidelities between two states as a function of window size, with
/// `dF/d|M|` and both correlation lengths.
pub fn run_scale_compare(a: &Mps, b: &Mps, sizes: &[usize], opts: &DisjointOptions) -> Result<ExperimentRecord> {
    let values = window_pair(a, b, sizes, opts)?;
    let f: Vec<f64> = values.iter().map(|v| v.0).collect();
    let deriv = discrete_derivative(sizes, &f);
    let (xi_1, xi_2) = (correlation_length(a)?, correlation_length(b)?);
    let rows = sizes
        .iter()
        .zip(&values)
        .zip(deriv)
        .map(|((&m, &(f, f_d)), df_dm)| ScaleRow { window_size: m, f, f_d, df_dm, xi_1, xi_2 })
        .collect();
    Ok(ExperimentRecord {
        experiment: "scale-compare".into(),
        parameters: json!({ "length": a.len(), "window_sizes": sizes, "disjoint_restarts": opts.restarts }),
        rows: Rows::ScaleCompare(rows),
        diagnostics: serde_json::Value::Null,
        warnings: Vec::new(),
        provenance: Provenance::new(vec![opts.seed]),
    })
}

/// Ising ground states at `h1` and `h2`, then [`run_scale_compare`].
pub fn run_scale_compare_ising(h1: f64, h2: f64, length: usize, chi: usize, sizes: &[usize], opts: &DisjointOptions) -> Result<ExperimentRecord> {
    let a = ising_ground_state(h1, length, chi)?;
    let b = if h2 == h1 { a.clone() } else { ising_ground_state(h2, length, chi)? };
    let mut rec = run_scale_compare(&a, &b, sizes, opts)?;
    rec.parameters["h1"] = json!(h1);
    rec.parameters["h2"] = json!(h2);
    rec.parameters["chi"] = json!(chi);
    Ok(rec)
}

/// `1 - F` and `1 - F_d` between ground states of the same chain computed
/// with different bond dimensions.
pub fn run_convergence_chi(h: f64, length: usize, chi_pairs: &[(usize, usize)], sizes: &[usize], opts: &DisjointOptions) -> Result<ExperimentRecord> {
    let mut states: BTreeMap<usize, Mps> = BTreeMap::new();
    for &(ca, cb) in chi_pairs {
        for chi in [ca, cb] {
            if !states.contains_key(&chi) {
                states.insert(chi, ising_ground_state(h, length, chi)?);
            }
        }
    }
    let mut rec = convergence_chi_rows(&states, chi_pairs, sizes, opts)?;
    rec.parameters["h"] = json!(h);
    Ok(rec)
}

/// [`run_convergence_chi`] on precomputed states keyed by bond dimension.
pub fn convergence_chi_rows(states: &BTreeMap<usize, Mps>, chi_pairs: &[(usize, usize)], sizes: &[usize], opts: &DisjointOptions) -> Result<ExperimentRecord> {
    let mut rows = Vec::new();
    let mut length = 0;
    for &(ca, cb) in chi_pairs {
        let get = |c: usize| states.get(&c).ok_or_else(|| Error::Argument(format!("no state with bond dimension {c}")));
        let (a, b) = (get(ca)?, get(cb)?);
        length = a.len();
        for (&m, (f, fd)) in sizes.iter().zip(window_pair(a, b, sizes, opts)?) {
            rows.push(ChiRow { window_size: m, chi_a: ca, chi_b: cb, one_minus_f: 1.0 - f, one_minus_fd: 1.0 - fd });
        }
    }
    Ok(ExperimentRecord {
        experiment: "convergence-chi".into(),
        parameters: json!({ "length": length, "chi_pairs": chi_pairs, "window_sizes": sizes }),
        rows: Rows::ConvergenceChi(rows),
        diagnostics: serde_json::Value::Null,
        warnings: Vec::new(),
        provenance: Provenance::new(vec![opts.seed]),
    })
}

/// Smallest per-site branch fidelity `F^(1/|M|)` over all branches of each
/// requested size.
pub fn per_site_branch_fidelity(a: &Ttn, b: &Ttn, sizes: &[usize]) -> Result<Vec<f64>> {
    let regions = branch_regions(a);
    sizes
        .iter()
        .map(|&m| {
            let mut worst = f64::INFINITY;
            for br in regions.iter().filter(|br| br.size() == m) {
                let f = branch_fidelity(a, b, br)?.value.clamp(0.0, 1.0);
                worst = worst.min(f.powf(1.0 / m as f64));
            }
            Ok(worst)
        })
        .collect()
}

/// Optimizes a random tree on the Ising chain and compares every sweep's
/// state with the one `lag` sweeps earlier.
pub fn run_convergence_ttn(h: f64, depth: usize, chi: usize, sweeps: usize, lag: usize, sizes: &[usize], seed: u64) -> Result<(ExperimentRecord, Vec<f64>)> {
    if lag == 0 {
        return Err(Error::Argument("lag must be positive".into()));
    }
    let length = 1usize << depth;
    if sizes.is_empty() || sizes.iter().any(|&m| !m.is_power_of_two() || m < 2 || m >= length) {
        return Err(Error::Argument(format!("branch window sizes must be powers of two in 2..{length}")));
    }
    let terms = ising_terms(&IsingSpec::new(length, h))?;
    let initial = random_ttn(depth, chi, 2, seed)?;
    let mut trail: VecDeque<Ttn> = VecDeque::with_capacity(lag + 1);
    let mut rows = Vec::new();
    let mut failure = None;
    let result = optimize_ground_state_with(&initial, &terms, sweeps, |m, psi| {
        trail.push_back(psi.clone());
        if trail.len() > lag + 1 {
            trail.pop_front();
        }
        if m > lag && failure.is_none() {
            match per_site_branch_fidelity(psi, &trail[0], sizes) {
                Ok(values) => {
                    for (&window_size, per_site_f) in sizes.iter().zip(values) {
                        rows.push(TtnRow { iteration: m, window_size, per_site_f });
                    }
                }
                Err(e) => failure = Some(e),
            }
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    let rec = ExperimentRecord {
        experiment: "convergence-ttn".into(),
        parameters: json!({ "h": h, "depth": depth, "chi": chi, "sweeps": sweeps, "lag": lag, "window_sizes": sizes }),
        rows: Rows::ConvergenceTtn(rows),
        diagnostics: serde_json::Value::Null,
        warnings: Vec::new(),
        provenance: Provenance::new(vec![seed]),
    };
    Ok((rec, result.energies))
}

/// First iteration from which the per-site deficit `1 - F^(1/|M|)` of
/// `size` stays below `threshold` for the rest of the record.
pub fn permanent_convergence(rows: &[TtnRow], size: usize, threshold: f64) -> Option<usize> {
    let series: Vec<&TtnRow> = rows.iter().filter(|r| r.window_size == size).collect();
    let last_bad = series.iter().rposition(|r| 1.0 - r.per_site_f >= threshold);
    match last_bad {
        None => series.first().map(|r| r.iteration),
        Some(i) => series.get(i + 1).map(|r| r.iteration),
    }
}
