//! Local quench: `|ψ(t)⟩ = e^{itH} O_x |E₀⟩`, compared with `|E₀⟩` through
//! half-system and two-site fidelities.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde_json::json;

use super::ising::pauli_z;
use super::record::{ExperimentRecord, ProbeKind, Provenance, QuenchRow, Rows};
use crate::error::{Error, Result};
use crate::fidelity::{half_system_profile, window_fidelity};
use crate::mps::{tebd_evolve, EvolutionConfig, Mps, TimeKind};
use crate::tensor::{dagger, identity, max_abs, TruncationSpec};

/// Per-step discarded weight above which a record carries a warning.
pub const DISCARD_ALARM: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Probe {
    pub kind: ProbeKind,
    pub x: usize,
}

#[derive(Clone, Debug)]
pub struct QuenchConfig {
    pub operator: Array2<C64>,
    pub site: usize,
    /// Sample times, ascending, each a multiple of `evolution.dt`.
    pub times: Vec<f64>,
    /// Real-time settings; `steps` is ignored.
    pub evolution: EvolutionConfig,
    pub probes: Vec<Probe>,
}

impl QuenchConfig {
    /// `Z` at `site`, order-2 steps of `dt` with bond cap `chi`, and every
    /// probe kind at every valid position of a chain of `length` sites.
    pub fn new(length: usize, site: usize, times: Vec<f64>, dt: f64, chi: usize) -> Self {
        let mut probes = Vec::new();
        for x in 0..length.saturating_sub(1) {
            probes.push(Probe { kind: ProbeKind::TwoSite, x });
        }
        for kind in [ProbeKind::LeftHalf, ProbeKind::RightHalf] {
            for x in 1..length {
                probes.push(Probe { kind, x });
            }
        }
        Self {
            operator: pauli_z(),
            site,
            times,
            evolution: EvolutionConfig::real(dt, 1, TruncationSpec { max_rank: Some(chi), weight_cutoff: 1e-16 }),
            probes,
        }
    }

    fn validate(&self, length: usize) -> Result<()> {
        if self.site == 0 || self.site + 1 >= length {
            return Err(Error::Argument(format!("insertion site {} must be interior to 0..{length}", self.site)));
        }
        if self.evolution.kind != TimeKind::Real {
            return Err(Error::Argument("quench evolution must be real time".into()));
        }
        if self.times.is_empty() || self.times.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) {
            return Err(Error::Argument("sample times must be finite and non-negative".into()));
        }
        if self.times.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Argument("sample times must be ascending".into()));
        }
        for &t in &self.times {
            let k = t / self.evolution.dt;
            if (k - k.round()).abs() > 1e-9 * k.abs().max(1.0) {
                return Err(Error::Argument(format!("time {t} is not a multiple of dt = {}", self.evolution.dt)));
            }
        }
        for p in &self.probes {
            let ok = match p.kind {
                ProbeKind::TwoSite => p.x + 1 < length,
                ProbeKind::LeftHalf | ProbeKind::RightHalf => p.x >= 1 && p.x < length,
            };
            if !ok {
                return Err(Error::Argument(format!("probe {:?} at {} lies outside the chain", p.kind, p.x)));
            }
        }
        Ok(())
    }
}

fn is_unitary(op: &Array2<C64>) -> bool {
    op.is_square() && max_abs((dagger(&op.view()).dot(op) - identity(op.nrows())).iter()) <= 1e-12
}

/// Evolves the perturbed ground state and samples every probe at every time.
pub fn run_quench(ground: &Mps, terms: &[Array2<C64>], config: &QuenchConfig) -> Result<ExperimentRecord> {
    let l = ground.len();
    config.validate(l)?;
    if !ground.is_canonical() {
        return Err(Error::State("quench needs a canonical ground state".into()));
    }
    let mut warnings = Vec::new();
    let unitary = is_unitary(&config.operator);
    let mut psi = ground.apply_one_site_gate(&config.operator.view(), config.site)?;
    if !unitary {
        psi = psi.canonicalize()?;
        warnings.push("perturbation is not unitary; the perturbed state was renormalized".into());
    }
    let t_max = *config.times.last().expect("validated non-empty");
    if config.site as f64 - t_max <= 0.0 || config.site as f64 + t_max >= (l - 1) as f64 {
        warnings.push(format!("front (speed 1) reaches the chain boundary before t = {t_max}"));
    }

    let z = pauli_z();
    let mut rows = Vec::new();
    let mut elapsed_steps = 0usize;
    let mut max_discarded: f64 = 0.0;
    let mut overlaps = Vec::with_capacity(config.times.len());
    for &t in &config.times {
        let target = (t / config.evolution.dt).round() as usize;
        if target > elapsed_steps {
            let mut cfg = config.evolution.clone();
            cfg.steps = target - elapsed_steps;
            let run = tebd_evolve(&psi, terms, &cfg)?;
            max_discarded = run.diagnostics.iter().map(|d| d.max_discarded_weight).fold(max_discarded, f64::max);
            psi = run.state;
            elapsed_steps = target;
        }
        overlaps.push(psi.overlap(ground)?.norm());
        let expect_z = (0..l).map(|x| Ok(psi.expect_local(&z.view(), x)?.re)).collect::<Result<Vec<f64>>>()?;
        let needs = |k: ProbeKind| config.probes.iter().any(|p| p.kind == k);
        let left = if needs(ProbeKind::LeftHalf) { half_system_profile(&psi, ground, true)? } else { Vec::new() };
        let right = if needs(ProbeKind::RightHalf) { half_system_profile(&psi, ground, false)? } else { Vec::new() };
        let values = config
            .probes
            .par_iter()
            .map(|p| match p.kind {
                ProbeKind::TwoSite => Ok(window_fidelity(&psi, ground, p.x, p.x + 2)?.value),
                ProbeKind::LeftHalf => Ok(left[p.x - 1].value),
                ProbeKind::RightHalf => Ok(right[p.x - 1].value),
            })
            .collect::<Result<Vec<f64>>>()?;
        for (p, fidelity) in config.probes.iter().zip(values) {
            rows.push(QuenchRow { t, x: p.x, probe: p.kind, fidelity, expect_z: expect_z[p.x] });
        }
    }
    if max_discarded > DISCARD_ALARM {
        warnings.push(format!("discarded weight {max_discarded:e} exceeded {DISCARD_ALARM:e} in a single step"));
    }
    Ok(ExperimentRecord {
        experiment: "quench".into(),
        parameters: json!({
            "length": l,
            "site": config.site,
            "times": config.times,
            "dt": config.evolution.dt,
            "trotter_order": config.evolution.trotter_order,
            "max_rank": config.evolution.truncation.max_rank,
            "weight_cutoff": config.evolution.truncation.weight_cutoff,
            "operator_unitary": unitary,
            "probes": config.probes.len(),
        }),
        rows: Rows::Quench(rows),
        diagnostics: json!({ "ground_overlap": overlaps }),
        warnings,
        provenance: Provenance::new(Vec::new()),
    })
}
