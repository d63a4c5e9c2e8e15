use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use ndarray::Array2;
use num_complex::Complex64 as C64;
use serde_json::json;

use subfid::fidelity::{disjoint_window_fidelity, half_system_fidelity, window_fidelity, DisjointOptions, FidelityReport};
use subfid::harness::ising::{ising_terms, pauli_x, pauli_z, IsingSpec};
use subfid::harness::selftest::run_selftest;
use subfid::harness::{
    load_network, run_convergence_chi, run_convergence_ttn, run_quench, run_scale_compare_ising, save_network,
    ising_ground_state, Network, Probe, ProbeKind, QuenchConfig,
};
use subfid::ttn::{branch_fidelity, Branch};
use subfid::{Error, Result};

/// Environment variable holding the worker thread count.
const THREADS_ENV: &str = "SUBFID_THREADS";

#[derive(Parser)]
#[command(name = "subfid", version, about = "Subsystem fidelities of matrix product states and tree tensor networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Op {
    Z,
    X,
    Y,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ProbeSet {
    All,
    TwoSite,
    Left,
    Right,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Half,
    Window,
    Disjoint,
}

#[derive(Clone, Copy, ValueEnum)]
enum Side {
    Left,
    Right,
}

#[derive(Subcommand)]
enum Command {
    /// Ising ground state by imaginary-time evolution, saved as a container.
    Gs {
        #[arg(long)]
        h_field: f64,
        #[arg(long)]
        length: usize,
        #[arg(long)]
        chi: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Local quench of a saved ground state.
    Quench {
        #[arg(long)]
        ground_state: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        h_field: f64,
        #[arg(long, value_enum, default_value = "z")]
        op: Op,
        /// Insertion site; defaults to the chain centre.
        #[arg(long)]
        site: Option<usize>,
        #[arg(long)]
        t_max: f64,
        #[arg(long, default_value_t = 0.05)]
        dt: f64,
        /// Spacing of sampled times.
        #[arg(long, default_value_t = 1.0)]
        sample_every: f64,
        #[arg(long, default_value_t = 50)]
        chi: usize,
        #[arg(long, value_enum, value_delimiter = ',', default_value = "all")]
        probes: Vec<ProbeSet>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fidelity between two saved networks.
    Fidelity {
        #[arg(long)]
        state_a: PathBuf,
        #[arg(long)]
        state_b: PathBuf,
        #[arg(long, value_enum, default_value = "window")]
        kind: Kind,
        #[arg(long)]
        cut: Option<usize>,
        #[arg(long, value_enum, default_value = "left")]
        side: Side,
        /// `start:end`, end exclusive.
        #[arg(long)]
        window: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// JSON report; printed to stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Window fidelities between ground states at two fields.
    Compare {
        #[arg(long)]
        h1: f64,
        #[arg(long)]
        h2: f64,
        #[arg(long)]
        length: usize,
        #[arg(long)]
        chi: usize,
        #[arg(long)]
        max_window: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Window fidelities between ground states at different bond dimensions.
    ConvergeChi {
        #[arg(long)]
        h_field: f64,
        #[arg(long)]
        length: usize,
        /// Pairs `a:b`, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "10:20")]
        chi_pairs: Vec<String>,
        #[arg(long)]
        max_window: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Branch fidelities along a tree optimization.
    ConvergeTtn {
        #[arg(long, default_value_t = 1.0)]
        h_field: f64,
        #[arg(long)]
        depth: usize,
        #[arg(long)]
        chi: usize,
        #[arg(long)]
        sweeps: usize,
        #[arg(long, default_value_t = 10)]
        lag: usize,
        /// Branch window sizes; all of them when absent.
        #[arg(long, value_delimiter = ',')]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Cross-checks against the dense oracles.
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        trials: usize,
    },
}

fn parse_pair(s: &str) -> Result<(usize, usize)> {
    let err = || Error::Argument(format!("expected `a:b`, got {s:?}"));
    let (a, b) = s.split_once(':').ok_or_else(err)?;
    Ok((a.trim().parse().map_err(|_| err())?, b.trim().parse().map_err(|_| err())?))
}

fn operator(op: Op) -> Array2<C64> {
    match op {
        Op::Z => pauli_z(),
        Op::X => pauli_x(),
        Op::Y => ndarray::array![[C64::new(0.0, 0.0), C64::new(0.0, -1.0)], [C64::new(0.0, 1.0), C64::new(0.0, 0.0)]],
    }
}

fn load_mps(path: &Path) -> Result<subfid::mps::Mps> {
    match load_network(path)? {
        Network::Mps(m) => Ok(m),
        Network::Ttn(_) => Err(Error::Argument(format!("{} holds a tree, expected an MPS", path.display()))),
    }
}

fn report_json(r: &FidelityReport) -> serde_json::Value {
    json!({
        "value": r.value,
        "singular_spectrum": r.singular_spectrum,
        "method": format!("{:?}", r.method),
        "iterations": r.iterations,
        "converged": r.converged,
        "restarts_used": r.restarts_used,
    })
}

fn emit(out: Option<&Path>, value: &serde_json::Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn print_warnings(warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gs { h_field, length, chi, out } => {
            let gs = ising_ground_state(h_field, length, chi)?;
            let terms = ising_terms(&IsingSpec::new(length, h_field))?;
            let energy = gs.energy(&terms)?;
            save_network(&out, &Network::Mps(gs.clone()))?;
            println!("energy {energy:.12} per site {:.12} max bond {}", energy / length as f64, gs.max_bond_dim());
        }
        Command::Quench { ground_state, h_field, op, site, t_max, dt, sample_every, chi, probes, out } => {
            let e0 = load_mps(&ground_state)?;
            let l = e0.len();
            if !(sample_every > 0.0) || !(t_max >= 0.0) {
                return Err(Error::Argument("t-max must be non-negative and sample-every positive".into()));
            }
            let samples = (t_max / sample_every + 1e-9).floor() as usize;
            let times: Vec<f64> = (0..=samples).map(|k| k as f64 * sample_every).collect();
            let mut cfg = QuenchConfig::new(l, site.unwrap_or(l / 2), times, dt, chi);
            cfg.operator = operator(op);
            let keep = |k: ProbeKind| {
                probes.contains(&ProbeSet::All)
                    || probes.contains(match k {
                        ProbeKind::TwoSite => &ProbeSet::TwoSite,
                        ProbeKind::LeftHalf => &ProbeSet::Left,
                        ProbeKind::RightHalf => &ProbeSet::Right,
                    })
            };
            cfg.probes.retain(|p: &Probe| keep(p.kind));
            let terms = ising_terms(&IsingSpec::new(l, h_field))?;
            let rec = run_quench(&e0, &terms, &cfg)?;
            print_warnings(&rec.warnings);
            rec.write(&out)?;
        }
        Command::Fidelity { state_a, state_b, kind, cut, side, window, seed, out } => {
            let report = match (load_network(&state_a)?, load_network(&state_b)?) {
                (Network::Mps(a), Network::Mps(b)) => match kind {
                    Kind::Half => {
                        let cut = cut.ok_or_else(|| Error::Argument("--cut is required for half-system fidelity".into()))?;
                        half_system_fidelity(&a, &b, cut, matches!(side, Side::Left))?
                    }
                    Kind::Window | Kind::Disjoint => {
                        let (s, e) = parse_pair(window.as_deref().ok_or_else(|| Error::Argument("--window is required".into()))?)?;
                        if matches!(kind, Kind::Window) {
                            window_fidelity(&a, &b, s, e)?
                        } else {
                            disjoint_window_fidelity(&a, &b, s, e, &DisjointOptions { seed, ..Default::default() })?
                        }
                    }
                },
                (Network::Ttn(a), Network::Ttn(b)) => {
                    let (s, e) = parse_pair(window.as_deref().ok_or_else(|| Error::Argument("--window is required for trees".into()))?)?;
                    let size = e.saturating_sub(s);
                    if !size.is_power_of_two() || s % size != 0 {
                        return Err(Error::Argument(format!("window {s}:{e} is not a tree branch")));
                    }
                    branch_fidelity(&a, &b, &Branch::new(size.trailing_zeros() as usize, s / size))?
                }
                _ => return Err(Error::Argument("both states must be of the same kind".into())),
            };
            emit(out.as_deref(), &report_json(&report))?;
        }
        Command::Compare { h1, h2, length, chi, max_window, seed, out } => {
            let sizes: Vec<usize> = (1..=max_window.min(length)).collect();
            let rec = run_scale_compare_ising(h1, h2, length, chi, &sizes, &DisjointOptions { seed, ..Default::default() })?;
            rec.write(&out)?;
        }
        Command::ConvergeChi { h_field, length, chi_pairs, max_window, seed, out } => {
            let pairs = chi_pairs.iter().map(|p| parse_pair(p)).collect::<Result<Vec<_>>>()?;
            let sizes: Vec<usize> = (1..=max_window.min(length)).collect();
            let rec = run_convergence_chi(h_field, length, &pairs, &sizes, &DisjointOptions { seed, ..Default::default() })?;
            rec.write(&out)?;
        }
        Command::ConvergeTtn { h_field, depth, chi, sweeps, lag, sizes, seed, out } => {
            if !(2..=20).contains(&depth) {
                return Err(Error::Argument(format!("depth {depth} out of range 2..=20")));
            }
            let sizes = if sizes.is_empty() { (1..depth).map(|t| 1usize << t).collect() } else { sizes };
            let (rec, energies) = run_convergence_ttn(h_field, depth, chi, sweeps, lag, &sizes, seed)?;
            rec.write(&out)?;
            if let Some(e) = energies.last() {
                println!("final energy {e:.12}");
            }
        }
        Command::Selftest { seed, trials } => {
            let checks = run_selftest(seed, trials)?;
            let mut failed = Vec::new();
            for c in &checks {
                println!("{} {}: worst {:.3e} (tolerance {:.0e})", if c.passed() { "PASS" } else { "FAIL" }, c.name, c.worst, c.tolerance);
                if !c.passed() {
                    failed.push(c.name);
                }
            }
            if !failed.is_empty() {
                return Err(Error::Numeric(format!("selftest failed: {}", failed.join(", "))));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Ok(v) = std::env::var(THREADS_ENV) {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("error: {THREADS_ENV} must be a positive integer, got {v:?}");
                return ExitCode::from(1);
            }
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numeric() { 2 } else { 1 })
        }
    }
}
