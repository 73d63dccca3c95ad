//! One function per subcommand.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use dlab_core::circuit::{
    build_circuit, embed_state, initial_zero_set, peephole_zero_swap, placement_costs, route as route_circuit,
    routing_isometry_deviation, EXHAUSTIVE_LIMIT,
};
use dlab_core::darwinism::{
    averaged_qmi, blp_witness, cmi_grid, combinations, info_triple, mean_stderr, MiCurve, PartitionScheme,
    SchemeKind,
};
use dlab_core::qstate::{fidelity, partial_trace, DensityMatrix, PureState, QuantumState};
use dlab_core::scm::{coherence_finite, coherence_markovian};
use dlab_core::simulator::{derive_seed, run_density, run_statevector, sample, MeasRecord, MeasSetting, Pauli};
use dlab_core::tomography::{
    coherence_from_tomo, matrix_to_text, mle_reconstruct, pauli_settings, qubit_tomography, write_records,
    TomographyJob,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};
use crate::output::{cell, RunOutput};

/// Global state at one time: pure when no gate noise is configured.
enum GlobalState {
    Pure(PureState),
    Mixed(DensityMatrix),
}

impl GlobalState {
    fn as_dyn(&self) -> &(dyn QuantumState + Sync) {
        match self {
            GlobalState::Pure(p) => p,
            GlobalState::Mixed(d) => d,
        }
    }
}

fn ideal_state(cfg: &ExperimentConfig, t: f64) -> CliResult<PureState> {
    Ok(run_statevector(&build_circuit(t, &cfg.params())?)?)
}

fn noisy_state(cfg: &ExperimentConfig, t: f64) -> CliResult<Option<DensityMatrix>> {
    if cfg.noise.is_gate_noiseless() {
        return Ok(None);
    }
    Ok(Some(run_density(&build_circuit(t, &cfg.params())?, &cfg.noise)?))
}

/// The state experiments run on: noisy when noise is configured.
fn experiment_state(cfg: &ExperimentConfig, t: f64) -> CliResult<GlobalState> {
    Ok(match noisy_state(cfg, t)? {
        Some(rho) => GlobalState::Mixed(rho),
        None => GlobalState::Pure(ideal_state(cfg, t)?),
    })
}

fn scheme_label(kind: SchemeKind) -> &'static str {
    match kind {
        SchemeKind::PerQubit => "per_qubit",
        SchemeKind::PerPair => "per_pair",
        SchemeKind::AncillaeOnly => "ancillae_only",
    }
}

/// Seeds for time `i`, independent across times.
fn time_seed(cfg: &ExperimentConfig, i: usize) -> u64 {
    derive_seed(cfg.seed, i as u64)
}

fn sample_tomography<S: QuantumState + ?Sized>(
    state: &S,
    cfg: &ExperimentConfig,
    seed: u64,
) -> CliResult<(Vec<MeasRecord>, DensityMatrix)> {
    let n = state.num_qubits();
    let records = pauli_settings(n)?
        .iter()
        .enumerate()
        .map(|(k, s)| sample(state, s, cfg.shots, derive_seed(seed, k as u64), cfg.noise.readout_flip))
        .collect::<dlab_core::Result<Vec<_>>>()?;
    let job = TomographyJob::from_records(n, &records)?.with_options(cfg.mle);
    let report = mle_reconstruct(&job)?;
    Ok((records, report.state))
}

struct CoherenceRow {
    t: f64,
    analytic: f64,
    markovian: f64,
    simulated: f64,
    noisy: Option<f64>,
    sampled: Option<(f64, f64)>,
}

#[derive(Serialize)]
struct CoherenceSummary {
    blp_analytic: Option<f64>,
    blp_markovian: Option<f64>,
    blp_simulated: Option<f64>,
    max_abs_simulated_minus_analytic: f64,
    sampled_within_3_sigma: Option<usize>,
    points: usize,
}

pub fn coherence(cfg: &ExperimentConfig, out: &mut RunOutput) -> CliResult<()> {
    let p = cfg.params();
    let rows = cfg
        .times
        .par_iter()
        .enumerate()
        .map(|(i, &t)| {
            let rho_s = partial_trace(&ideal_state(cfg, t)?, &[0])?;
            let noisy_s = noisy_state(cfg, t)?.map(|rho| partial_trace(&rho, &[0])).transpose()?;
            let noisy = noisy_s.as_ref().map(coherence_from_tomo).transpose()?;
            let sampled = if cfg.shots > 0 {
                let target = noisy_s.as_ref().unwrap_or(&rho_s);
                let seed = time_seed(cfg, i);
                let records = Pauli::ALL
                    .iter()
                    .enumerate()
                    .map(|(k, &q)| {
                        sample(target, &MeasSetting::pauli(&[q]), cfg.shots, derive_seed(seed, k as u64), cfg.noise.readout_flip)
                    })
                    .collect::<dlab_core::Result<Vec<_>>>()?;
                let counts = records[0].count_vector()?;
                let x = (counts[0] as f64 - counts[1] as f64) / cfg.shots as f64;
                let stderr = ((1.0 - x * x).max(0.0) / cfg.shots as f64).sqrt();
                Some((coherence_from_tomo(&qubit_tomography(&records)?)?, stderr))
            } else {
                None
            };
            Ok(CoherenceRow {
                t,
                analytic: coherence_finite(t, &p),
                markovian: coherence_markovian(t, &p),
                simulated: coherence_from_tomo(&rho_s)?,
                noisy,
                sampled,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;

    let mut csv = String::from("t,analytic,markovian,simulated,noisy,sampled,sampled_stderr\n");
    for r in &rows {
        let _ = writeln!(
            csv,
            "{:?},{:?},{:?},{:?},{},{},{}",
            r.t,
            r.analytic,
            r.markovian,
            r.simulated,
            cell(r.noisy),
            cell(r.sampled.map(|s| s.0)),
            cell(r.sampled.map(|s| s.1)),
        );
    }
    out.write_text("coherence.csv", &csv)?;

    let witness = |f: &dyn Fn(&CoherenceRow) -> f64| {
        let curve: Vec<(f64, f64)> = rows.iter().map(|r| (r.t, f(r))).collect();
        blp_witness(&curve).ok()
    };
    let summary = CoherenceSummary {
        blp_analytic: witness(&|r| r.analytic),
        blp_markovian: witness(&|r| r.markovian),
        blp_simulated: witness(&|r| r.simulated),
        max_abs_simulated_minus_analytic: rows.iter().map(|r| (r.simulated - r.analytic).abs()).fold(0.0, f64::max),
        sampled_within_3_sigma: (cfg.shots > 0).then(|| {
            rows.iter()
                .filter(|r| r.sampled.is_some_and(|(c, s)| (c - r.analytic).abs() <= 3.0 * s))
                .count()
        }),
        points: rows.len(),
    };
    out.write_json("coherence_summary.json", cfg, &summary)
}

pub fn darwinism(cfg: &ExperimentConfig, out: &mut RunOutput) -> CliResult<()> {
    if cfg.tomography {
        cfg.require_shots()?;
    }
    let p = cfg.params();
    let per_time = cfg
        .times
        .par_iter()
        .enumerate()
        .map(|(i, &t)| {
            let ideal = ideal_state(cfg, t)?;
            let noisy = noisy_state(cfg, t)?;
            let reconstructed = if cfg.tomography {
                let target: &dyn QuantumState = match &noisy {
                    Some(rho) => rho,
                    None => &ideal,
                };
                Some(sample_tomography(target, cfg, time_seed(cfg, i))?.1)
            } else {
                None
            };
            let mut curves: Vec<(String, MiCurve)> = Vec::new();
            for &kind in &cfg.partition {
                let scheme = PartitionScheme::for_model(kind, &p)?;
                let label = scheme_label(kind);
                curves.push((format!("darwinism_t{i:02}_{label}_ideal.csv"), averaged_qmi(&ideal, &[0], &scheme)?));
                if let Some(rho) = &noisy {
                    curves.push((format!("darwinism_t{i:02}_{label}_noisy.csv"), averaged_qmi(rho, &[0], &scheme)?));
                }
                if let Some(rho) = &reconstructed {
                    curves.push((format!("darwinism_t{i:02}_{label}_tomo.csv"), averaged_qmi(rho, &[0], &scheme)?));
                }
            }
            Ok(curves)
        })
        .collect::<CliResult<Vec<_>>>()?;
    let mut index = String::from("file,time_index,t\n");
    for (i, curves) in per_time.iter().enumerate() {
        for (name, curve) in curves {
            out.write_text(name, &curve.to_csv())?;
            let _ = writeln!(index, "{name},{i},{:?}", cfg.times[i]);
        }
    }
    out.write_text("darwinism_index.csv", &index)
}

fn first_fraction(cfg: &ExperimentConfig) -> CliResult<Vec<usize>> {
    let scheme = PartitionScheme::for_model(cfg.partition[0], &cfg.params())?;
    if cfg.fraction_size > scheme.num_units() {
        return Err(CliError::Config(format!(
            "field `fraction_size`: the scheme has only {} units",
            scheme.num_units()
        )));
    }
    Ok(scheme.qubits_of(&(0..cfg.fraction_size).collect::<Vec<_>>()))
}

pub fn cmi(cfg: &ExperimentConfig, out: &mut RunOutput) -> CliResult<()> {
    let frac = first_fraction(cfg)?;
    let grids = cfg
        .times
        .iter()
        .map(|&t| {
            let state = experiment_state(cfg, t)?;
            Ok(cmi_grid(state.as_dyn(), &[0], &frac, cfg.grid_steps, cfg.grid_steps)?)
        })
        .collect::<CliResult<Vec<_>>>()?;
    let mut peaks = String::from("t,phi,xi,value\n");
    for (i, grid) in grids.iter().enumerate() {
        let peak = grid.argmax();
        let mut body = grid.to_csv();
        let _ = writeln!(body, "# argmax: phi={:?},xi={:?},value={:?}", peak.phi, peak.xi, peak.value);
        out.write_text(&format!("cmi_t{i:02}.csv"), &body)?;
        let _ = writeln!(peaks, "{:?},{:?},{:?},{:?}", cfg.times[i], peak.phi, peak.xi, peak.value);
    }
    out.write_text("cmi_peaks.csv", &peaks)
}

pub fn compare(cfg: &ExperimentConfig, out: &mut RunOutput) -> CliResult<()> {
    let scheme = PartitionScheme::for_model(cfg.partition[0], &cfg.params())?;
    let m = scheme.num_units();
    let mut csv = String::from("t,size,qmi,holevo,cmi_max,qmi_stderr,holevo_stderr,cmi_max_stderr\n");
    for &t in &cfg.times {
        let state = experiment_state(cfg, t)?;
        for size in 1..=m {
            let triples = combinations(m, size)
                .into_par_iter()
                .map(|s| info_triple(state.as_dyn(), &[0], &scheme.qubits_of(&s), cfg.grid_steps))
                .collect::<dlab_core::Result<Vec<_>>>()?;
            let stat = |f: fn(&dlab_core::darwinism::InfoTriple) -> f64| {
                mean_stderr(&triples.iter().map(f).collect::<Vec<_>>())
            };
            let (q, qs) = stat(|x| x.qmi);
            let (h, hs) = stat(|x| x.holevo);
            let (c, cs) = stat(|x| x.cmi_max);
            let _ = writeln!(csv, "{t:?},{size},{q:?},{h:?},{c:?},{qs:?},{hs:?},{cs:?}");
        }
    }
    out.write_text("compare.csv", &csv)
}

#[derive(Serialize)]
struct RouteReport {
    t: f64,
    initial_layout: Vec<usize>,
    final_layout: Vec<usize>,
    swap_count: usize,
    cnot_count: usize,
    peephole_cnot_count: usize,
    /// Worst amplitude error over every logical basis input.
    isometry_deviation: Option<f64>,
    /// Worst amplitude error of the peephole circuit from `|0...0>`.
    zero_input_deviation: Option<f64>,
    equivalent: Option<bool>,
}

const CHECK_MAX_QUBITS: usize = 12;

pub fn route(cfg: &ExperimentConfig, out: &mut RunOutput) -> CliResult<()> {
    let map = cfg.coupling()?;
    let p = cfg.params();
    let mut reports = Vec::new();
    for (i, &t) in cfg.times.iter().enumerate() {
        let c = build_circuit(t, &p)?;
        let k = c.num_qubits();
        if i == 0 && k <= EXHAUSTIVE_LIMIT {
            let mut table = String::from("placement,cnot_count\n");
            for (layout, cost) in placement_costs(&c, &map)? {
                let l: Vec<String> = layout.iter().map(usize::to_string).collect();
                let _ = writeln!(table, "{},{cost}", l.join(" "));
            }
            out.write_text("route_placements.csv", &table)?;
        }
        let rc = route_circuit(&c, &map)?;
        let logical_zero: BTreeSet<usize> = (0..k).collect();
        let opt = peephole_zero_swap(&rc, &initial_zero_set(&rc, &logical_zero))?;
        let m = map.num_physical();
        let (isometry, zero_input) = if m <= CHECK_MAX_QUBITS {
            let mut ideal = PureState::zero(k);
            c.apply_to(&mut ideal)?;
            let expected = embed_state(&ideal, &rc.final_layout, m)?;
            let mut got = embed_state(&PureState::zero(k), &rc.initial_layout, m)?;
            opt.circuit.apply_to(&mut got)?;
            let dev = got
                .amplitudes()
                .iter()
                .zip(expected.amplitudes())
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            (Some(routing_isometry_deviation(&c, &rc)?), Some(dev))
        } else {
            (None, None)
        };
        out.write_text(&format!("route_t{i:02}_circuit.txt"), &opt.circuit.to_text())?;
        reports.push(RouteReport {
            t,
            initial_layout: rc.initial_layout.clone(),
            final_layout: rc.final_layout.clone(),
            swap_count: rc.swap_count,
            cnot_count: rc.cnot_count,
            peephole_cnot_count: opt.cnot_count,
            isometry_deviation: isometry,
            zero_input_deviation: zero_input,
            equivalent: isometry.zip(zero_input).map(|(a, b)| a < 1e-10 && b < 1e-10 && rc.is_conformant(&map)),
        });
    }
    out.write_json("route.json", cfg, &reports)
}

pub fn tomo(cfg: &ExperimentConfig, out: &mut RunOutput) -> CliResult<()> {
    cfg.require_shots()?;
    let mut csv = String::from("t,fidelity,coherence,iterations,converged,log_likelihood\n");
    for (i, &t) in cfg.times.iter().enumerate() {
        let ideal = ideal_state(cfg, t)?;
        let state = experiment_state(cfg, t)?;
        let n = ideal.num_qubits();
        let records = pauli_settings(n)?
            .iter()
            .enumerate()
            .map(|(k, s)| {
                sample(state.as_dyn(), s, cfg.shots, derive_seed(time_seed(cfg, i), k as u64), cfg.noise.readout_flip)
            })
            .collect::<dlab_core::Result<Vec<_>>>()?;
        let dir = format!("tomo_t{i:02}_records");
        write_records(&out.dir().join(&dir), n, &records)?;
        out.register(&dir);
        let report = mle_reconstruct(&TomographyJob::from_records(n, &records)?.with_options(cfg.mle))?;
        out.write_text(&format!("tomo_t{i:02}_state.txt"), &matrix_to_text(report.state.matrix()))?;
        let f = fidelity(&ideal.to_density(), &report.state)?;
        let c = coherence_from_tomo(&partial_trace(&report.state, &[0])?)?;
        let ll = report.log_likelihood.last().copied().unwrap_or(f64::NAN);
        let _ = writeln!(csv, "{t:?},{f:?},{c:?},{},{},{ll:?}", report.iterations, report.converged);
    }
    out.write_text("tomo.csv", &csv)
}
