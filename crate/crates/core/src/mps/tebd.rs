use ndarray::Array2;
use num_complex::Complex64 as C64;

use super::Mps;
use crate::error::{Error, Result};
use crate::tensor::{expm_hermitian, TruncationSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TimeKind {
    /// Gates `exp(+i dt h)`.
    Real,
    /// Gates `exp(-dt h)`, renormalized after every step.
    Imaginary,
}

#[derive(Clone, Debug)]
pub struct EvolutionConfig {
    pub kind: TimeKind,
    pub dt: f64,
    pub steps: usize,
    pub trotter_order: u8,
    pub truncation: TruncationSpec,
    /// Imaginary time only: stop once the per-site energy change of a single
    /// step drops below this value. Zero disables the check.
    pub convergence_threshold: f64,
    /// Restore canonical form after every this many steps (and after the
    /// last). Between restorations the Vidal tensors still represent the
    /// state exactly, only without orthonormality.
    pub canonicalize_every: usize,
}

impl EvolutionConfig {
    pub fn real(dt: f64, steps: usize, truncation: TruncationSpec) -> Self {
        Self { kind: TimeKind::Real, dt, steps, trotter_order: 2, truncation, convergence_threshold: 0.0, canonicalize_every: 1 }
    }

    pub fn imaginary(dt: f64, steps: usize, truncation: TruncationSpec, convergence_threshold: f64) -> Self {
        Self { kind: TimeKind::Imaginary, dt, steps, trotter_order: 2, truncation, convergence_threshold, canonicalize_every: 1 }
    }

    fn validate(&self) -> Result<()> {
        if self.dt == 0.0 || !self.dt.is_finite() {
            return Err(Error::Argument(format!("time step must be finite and nonzero, got {}", self.dt)));
        }
        if self.kind == TimeKind::Imaginary && self.dt < 0.0 {
            return Err(Error::Argument("imaginary time step must be positive".into()));
        }
        if self.steps == 0 {
            return Err(Error::Argument("at least one step is required".into()));
        }
        if self.canonicalize_every == 0 {
            return Err(Error::Argument("canonicalize_every must be at least 1".into()));
        }
        if !matches!(self.trotter_order, 1 | 2) {
            return Err(Error::Argument(format!("trotter order must be 1 or 2, got {}", self.trotter_order)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepDiagnostics {
    pub step: usize,
    pub energy: f64,
    pub max_discarded_weight: f64,
    pub max_bond_dim: usize,
}

#[derive(Clone, Debug)]
pub struct EvolutionResult {
    pub state: Mps,
    pub diagnostics: Vec<StepDiagnostics>,
    /// Imaginary time: whether the energy criterion was met before running
    /// out of steps. Always false for real time.
    pub converged: bool,
}

fn check_terms(state: &Mps, terms: &[Array2<C64>]) -> Result<()> {
    let d2 = state.phys_dim() * state.phys_dim();
    if terms.len() + 1 != state.len() {
        return Err(Error::Argument(format!("{} bond terms for a chain of length {}", terms.len(), state.len())));
    }
    if terms.iter().any(|h| h.dim() != (d2, d2)) {
        return Err(Error::Dimension(format!("bond terms must be {d2}x{d2}")));
    }
    Ok(())
}

fn gates(terms: &[Array2<C64>], kind: TimeKind, tau: f64) -> Result<Vec<Array2<C64>>> {
    let factor = match kind {
        TimeKind::Real => C64::new(0.0, tau),
        TimeKind::Imaginary => C64::new(-tau, 0.0),
    };
    terms.iter().map(|h| expm_hermitian(&h.view(), factor)).collect()
}

/// Trotterized evolution under a nearest-neighbour Hamiltonian.
pub fn tebd_evolve(state: &Mps, terms: &[Array2<C64>], config: &EvolutionConfig) -> Result<EvolutionResult> {
    config.validate()?;
    check_terms(state, terms)?;
    if !state.is_canonical() {
        return Err(Error::State("evolution requires a canonical MPS".into()));
    }
    let l = state.len();
    let full = gates(terms, config.kind, config.dt)?;
    let half = if config.trotter_order == 2 { gates(terms, config.kind, config.dt / 2.0)? } else { Vec::new() };
    let even: Vec<usize> = (0..l - 1).step_by(2).collect();
    let odd: Vec<usize> = (1..l - 1).step_by(2).collect();

    let mut psi = state.clone();
    let mut diagnostics = Vec::with_capacity(config.steps);
    let mut energy = psi.energy_contracted(terms)?;
    let mut converged = false;
    for step in 0..config.steps {
        let mut discarded: f64 = 0.0;
        let mut layer = |psi: &mut Mps, bonds: &[usize], g: &[Array2<C64>]| -> Result<()> {
            for &n in bonds {
                discarded = discarded.max(psi.apply_gate_matrix(&g[n].view(), n, &config.truncation)?);
            }
            Ok(())
        };
        if config.trotter_order == 2 {
            layer(&mut psi, &even, &half)?;
            layer(&mut psi, &odd, &full)?;
            layer(&mut psi, &even, &half)?;
        } else {
            layer(&mut psi, &even, &full)?;
            layer(&mut psi, &odd, &full)?;
        }
        let last = step + 1 == config.steps;
        if last || (step + 1) % config.canonicalize_every == 0 {
            psi = psi.canonicalize()?;
        } else {
            psi.canonical = false;
        }
        let new_energy = psi.energy_contracted(terms)?;
        diagnostics.push(StepDiagnostics {
            step: step + 1,
            energy: new_energy,
            max_discarded_weight: discarded,
            max_bond_dim: psi.max_bond_dim(),
        });
        let change = (new_energy - energy).abs() / l as f64;
        energy = new_energy;
        if config.kind == TimeKind::Imaginary && config.convergence_threshold > 0.0 && change < config.convergence_threshold {
            converged = true;
            break;
        }
    }
    if !psi.is_canonical() {
        psi = psi.canonicalize()?;
    }
    Ok(EvolutionResult { state: psi, diagnostics, converged })
}

/// Imaginary-time schedule: one stage per step size, each run until the
/// energy criterion holds or `max_steps_per_stage` is exhausted.
#[derive(Clone, Debug)]
pub struct GroundStateSchedule {
    pub dts: Vec<f64>,
    pub convergence_threshold: f64,
    pub max_steps_per_stage: usize,
    pub truncation: TruncationSpec,
    pub canonicalize_every: usize,
}

impl GroundStateSchedule {
    pub fn new(chi: usize) -> Self {
        Self {
            dts: vec![0.1, 0.01, 0.001],
            convergence_threshold: 1e-10,
            max_steps_per_stage: 20_000,
            truncation: TruncationSpec { max_rank: Some(chi), weight_cutoff: 1e-16 },
            canonicalize_every: 10,
        }
    }
}

/// Ground state by staged imaginary-time TEBD starting from `initial`.
/// Returns the final state and the diagnostics of every stage in order.
pub fn imaginary_time_ground_state(
    initial: &Mps,
    terms: &[Array2<C64>],
    schedule: &GroundStateSchedule,
) -> Result<(Mps, Vec<EvolutionResult>)> {
    if schedule.dts.is_empty() {
        return Err(Error::Argument("empty imaginary-time schedule".into()));
    }
    let mut psi = initial.clone();
    let mut stages = Vec::with_capacity(schedule.dts.len());
    for &dt in &schedule.dts {
        let mut cfg = EvolutionConfig::imaginary(dt, schedule.max_steps_per_stage, schedule.truncation, schedule.convergence_threshold);
        cfg.canonicalize_every = schedule.canonicalize_every;
        let mut run = tebd_evolve(&psi, terms, &cfg)?;
        psi = run.state.clone();
        run.diagnostics.shrink_to_fit();
        stages.push(run);
    }
    Ok((psi, stages))
}
