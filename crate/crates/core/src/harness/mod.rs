//! Experiment drivers on the transverse-field Ising chain, the network
//! container, and CSV records.

pub mod compare;
pub mod container;
pub mod ising;
pub mod quench;
pub mod record;
pub mod selftest;

pub use compare::{
    centered_window, convergence_chi_rows, per_site_branch_fidelity, permanent_convergence, run_convergence_chi,
    run_convergence_ttn, run_scale_compare, run_scale_compare_ising,
};
pub use container::{load_network, save_network, Network};
pub use quench::{run_quench, Probe, QuenchConfig};
pub use record::{ExperimentRecord, ProbeKind, Provenance, Rows};

use crate::error::Result;
use crate::mps::{imaginary_time_ground_state, GroundStateSchedule, Mps};
use ising::{ising_terms, IsingSpec};

/// Bond dimensions of the warm-up runs that precede the target one.
pub const WARMUP_CHIS: [usize; 2] = [8, 16];

/// Ising ground state from staged imaginary-time evolution of `|0…0⟩`.
///
/// The first stage is converged at each bond dimension of [`WARMUP_CHIS`]
/// below `chi` before the full schedule runs at `chi`.
pub fn ising_ground_state(h: f64, length: usize, chi: usize) -> Result<Mps> {
    let terms = ising_terms(&IsingSpec::new(length, h))?;
    let mut psi = Mps::basis_state(2, &vec![0; length])?;
    for &warm in WARMUP_CHIS.iter().filter(|&&w| w < chi) {
        let mut schedule = GroundStateSchedule::new(warm);
        schedule.dts.truncate(1);
        psi = imaginary_time_ground_state(&psi, &terms, &schedule)?.0;
    }
    Ok(imaginary_time_ground_state(&psi, &terms, &GroundStateSchedule::new(chi))?.0)
}
