//! Acceptance criteria 1-10. Each test prints one `criterion N: PASS|FAIL`
//! line with the measured numbers, then asserts the verdict.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use dlab_core::circuit::{
    build_circuit, embed_state, initial_zero_set, layout_permutation, peephole_zero_swap, route,
    routing_isometry_deviation, unitary_of, CouplingMap,
};
use dlab_core::darwinism::{
    averaged_qmi, blp_witness, cmi_grid, combinations, holevo_bound, pauli_cmi_scan, qmi, PartitionScheme, SchemeKind,
};
use dlab_core::qstate::random::random_pure;
use dlab_core::qstate::{fidelity, partial_trace, PureState, C64};
use dlab_core::scm::{canonical_times, coherence_finite, coherence_markovian, Scenario, ScmParams};
use dlab_core::simulator::{born_probabilities, derive_seed, run_statevector, sample, MeasRecord};
use dlab_core::tomography::{
    coherence_from_tomo, mle_reconstruct, pauli_settings, MleOptions, SettingData, TomographyJob,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn verdict(n: u32, title: &str, pass: bool, detail: &str) {
    println!("criterion {n} [{title}]: {} ({detail})", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {n} failed: {detail}");
}

fn simulated_state(n: usize, sc: Scenario, t: f64) -> (ScmParams, PureState) {
    let p = ScmParams::non_entangling(n, sc);
    let psi = run_statevector(&build_circuit(t, &p).unwrap()).unwrap();
    (p, psi)
}

fn grid_31() -> Vec<f64> {
    let t_rec = canonical_times().2;
    (0..31).map(|k| t_rec * k as f64 / 30.0).collect()
}

/// `[1 - 2(1 - e^{-t})]^n`, the theta = pi, lambda = 1 coherence factor.
fn coherence_oracle(t: f64, n: usize) -> f64 {
    (1.0 - 2.0 * (1.0 - (-t).exp())).powi(n as i32)
}

fn simulated_coherence(n: usize, sc: Scenario, t: f64) -> f64 {
    let (_, psi) = simulated_state(n, sc, t);
    coherence_from_tomo(&partial_trace(&psi, &[0]).unwrap()).unwrap()
}

#[test]
fn criterion_01_coherence_oracle() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for (n, sc) in [(6, Scenario::Condensed), (3, Scenario::Full)] {
        for t in grid_31() {
            worst = worst.max((simulated_coherence(n, sc, t) - coherence_oracle(t, n)).abs());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        1,
        "coherence oracle",
        worst < 1e-10 && secs < 10.0,
        &format!("max deviation {worst:.3e} over 62 points, {secs:.2} s"),
    );
}

#[test]
fn criterion_02_non_markovianity() {
    let grid = grid_31();
    let p = ScmParams::non_entangling(6, Scenario::Condensed);
    let finite: Vec<(f64, f64)> = grid.iter().map(|&t| (t, coherence_finite(t, &p))).collect();
    let simulated: Vec<(f64, f64)> =
        grid.iter().map(|&t| (t, simulated_coherence(6, Scenario::Condensed, t))).collect();
    let markov: Vec<(f64, f64)> = grid.iter().map(|&t| (t, coherence_markovian(t, &p))).collect();
    let (wf, ws, wm) = (
        blp_witness(&finite).unwrap(),
        blp_witness(&simulated).unwrap(),
        blp_witness(&markov).unwrap(),
    );
    verdict(
        2,
        "non-Markovianity",
        wf > 0.05 && ws > 0.05 && wm == 0.0,
        &format!("finite-n witness {wf:.6}, simulated {ws:.6}, Markovian {wm}"),
    );
}

fn ghz(n: usize) -> PureState {
    let mut amps = vec![C64::from(0.0); 1 << n];
    amps[0] = C64::from(std::f64::consts::FRAC_1_SQRT_2);
    amps[(1 << n) - 1] = C64::from(std::f64::consts::FRAC_1_SQRT_2);
    PureState::new(amps).unwrap()
}

#[test]
fn criterion_03_darwinism_plateau() {
    let (p, psi) = simulated_state(6, Scenario::Condensed, canonical_times().0);
    let curve = averaged_qmi(&psi, &[0], &PartitionScheme::for_model(SchemeKind::PerQubit, &p).unwrap()).unwrap();
    let oracle = ghz(7);
    let mut ok = true;
    let mut worst_oracle = 0.0f64;
    let mut worst_stderr = 0.0f64;
    for pt in &curve.points {
        let expected = if pt.f < 6 { 1.0 } else { 2.0 };
        ok &= (pt.value - expected).abs() < 1e-6;
        worst_stderr = worst_stderr.max(pt.stderr);
        // brute-force partial traces of the GHZ form, subset by subset
        for s in combinations(6, pt.f) {
            let frac: Vec<usize> = s.iter().map(|u| u + 1).collect();
            worst_oracle = worst_oracle.max((qmi(&oracle, &[0], &frac).unwrap() - expected).abs());
        }
    }
    let values: Vec<String> = curve.points.iter().map(|p| format!("{:.9}", p.value)).collect();
    verdict(
        3,
        "darwinism plateau",
        ok && worst_stderr < 1e-9 && worst_oracle < 1e-6,
        &format!("curve [{}], max stderr {worst_stderr:.2e}, GHZ oracle dev {worst_oracle:.2e}", values.join(", ")),
    );
}

#[test]
fn criterion_04_partition_dependence() {
    let start = Instant::now();
    let (p, psi) = simulated_state(3, Scenario::Full, canonical_times().0);
    let curve = |kind| -> Vec<f64> {
        averaged_qmi(&psi, &[0], &PartitionScheme::for_model(kind, &p).unwrap())
            .unwrap()
            .points
            .iter()
            .map(|pt| pt.value)
            .collect()
    };
    let pair = curve(SchemeKind::PerPair);
    let anc = curve(SchemeKind::AncillaeOnly);
    let per_qubit = curve(SchemeKind::PerQubit);
    let pair_plateau = (pair[0] - 1.0).abs() < 1e-6 && (pair[1] - 1.0).abs() < 1e-6;
    let anc_zero = anc[0].abs() < 1e-9 && anc[1].abs() < 1e-9;
    let at_one: Vec<bool> = per_qubit.iter().map(|v| (v - 1.0).abs() < 1e-6).collect();
    let no_wide_plateau = !at_one.windows(2).any(|w| w[0] && w[1]);
    let secs = start.elapsed().as_secs_f64();
    verdict(
        4,
        "partition dependence",
        pair_plateau && anc_zero && no_wide_plateau && secs < 30.0,
        &format!("per-pair {pair:.6?}, ancillae-only {anc:?}, per-qubit {per_qubit:.6?}, {secs:.2} s"),
    );
}

/// Grid distance in cells, with xi periodic.
fn cells_from(peak_phi: f64, peak_xi: f64, phi: f64, xi: f64, dphi: f64, dxi: f64) -> (f64, f64) {
    let dx = (peak_xi - xi).rem_euclid(2.0 * PI);
    ((peak_phi - phi).abs() / dphi, dx.min(2.0 * PI - dx) / dxi)
}

#[test]
fn criterion_05_cmi_peak() {
    let t_max = canonical_times().0;
    let mut peaks = Vec::new();
    let mut located = true;
    let mut first_peak = 0.0;
    for k in 1..=4 {
        let (_, psi) = simulated_state(6, Scenario::Condensed, k as f64 * t_max);
        let grid = cmi_grid(&psi, &[0], &[1], 61, 61).unwrap();
        let peak = grid.argmax();
        if k == 1 {
            let (a, b) = cells_from(peak.phi, peak.xi, PI / 2.0, 0.0, grid.phi_spacing(), grid.xi_spacing());
            located = a <= 1.0 && b <= 1.0;
            first_peak = peak.value;
        }
        peaks.push(peak.value);
    }
    let decreasing = peaks.windows(2).all(|w| w[1] < w[0]);
    verdict(
        5,
        "CMI peak",
        located && (first_peak - 1.0).abs() < 1e-6 && decreasing,
        &format!("argmax at (pi/2, 0): {located}, peaks over k*t_max = {peaks:.6?}"),
    );
}

#[test]
fn criterion_06_information_ordering() {
    let (t_max, _, t_rec) = canonical_times();
    let mut lines = Vec::new();
    let mut ordered = true;
    let mut gaps_ok = true;
    let mut agree = true;
    for (t, label) in [(t_rec, "t_rec"), (t_max, "t_max")] {
        let (p, psi) = simulated_state(6, Scenario::Condensed, t);
        let scheme = PartitionScheme::for_model(SchemeKind::PerQubit, &p).unwrap();
        for size in 1..=6 {
            // ideal states are symmetric under unit permutations; one fraction per size
            let frac = scheme.qubits_of(&(0..size).collect::<Vec<_>>());
            let q = qmi(&psi, &[0], &frac).unwrap();
            let h = holevo_bound(&psi, &[0], &frac).unwrap();
            let c = cmi_grid(&psi, &[0], &frac, 61, 61).unwrap().max();
            if label == "t_rec" {
                ordered &= c <= h + 1e-9 && h <= q + 1e-9;
                if size == 1 {
                    gaps_ok = h - c > 0.01 && q - h > 0.01;
                }
            } else {
                agree &= (q - h).abs() < 1e-6 && (h - c).abs() < 1e-6;
            }
            lines.push(format!("{label} size {size}: cmi {c:.5} chi {h:.5} qmi {q:.5}"));
        }
    }
    verdict(
        6,
        "information ordering",
        ordered && gaps_ok && agree,
        &format!(
            "ordering at t_rec {ordered}, size-1 gaps > 0.01 {gaps_ok}, t_max agreement {agree}; {}",
            lines.join("; ")
        ),
    );
}

#[test]
fn criterion_07_non_local_encoding() {
    let (p, psi) = simulated_state(3, Scenario::Full, canonical_times().0);
    let scheme = PartitionScheme::for_model(SchemeKind::PerQubit, &p).unwrap();
    let one = pauli_cmi_scan(&psi, &[0], 1, &scheme).unwrap();
    let two = pauli_cmi_scan(&psi, &[0], 2, &scheme).unwrap();
    let best = two.entries.iter().max_by(|a, b| a.value.total_cmp(&b.value)).unwrap();
    verdict(
        7,
        "non-local encoding",
        one.max() < 1e-10 && two.max() > 0.4,
        &format!(
            "size-1 max {:.3e}, size-2 max {:.6} at {}/{} over 15 unordered pairs",
            one.max(),
            two.max(),
            best.sys_setting,
            best.env_setting
        ),
    );
}

fn exact_job(psi: &PureState) -> TomographyJob {
    let n = psi.num_qubits();
    let data = pauli_settings(n)
        .unwrap()
        .into_iter()
        .map(|setting| SettingData {
            weights: born_probabilities(psi, &setting).unwrap(),
            setting,
        })
        .collect();
    TomographyJob::from_frequencies(n, data).unwrap()
}

/// Largest single-step drop of the log-likelihood trace.
fn worst_drop(ll: &[f64]) -> f64 {
    ll.windows(2).map(|w| w[0] - w[1]).fold(0.0, f64::max)
}

#[test]
fn criterion_08_tomography() {
    let start = Instant::now();
    let strict = MleOptions {
        dilution: 1.0,
        max_iters: 100_000,
        tol: 1e-13,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(2718);
    let t_max = canonical_times().0;
    let mut states: Vec<(String, PureState)> = (1..=3).map(|n| (format!("random n={n}"), random_pure(n, &mut rng))).collect();
    states.push(("full n=1".into(), simulated_state(1, Scenario::Full, t_max).1));
    states.push(("condensed n=2".into(), simulated_state(2, Scenario::Condensed, t_max).1));
    let mut worst_infidelity = 0.0f64;
    let mut drop = 0.0f64;
    let mut details = Vec::new();
    for (label, psi) in &states {
        let report = mle_reconstruct(&exact_job(psi).with_options(strict)).unwrap();
        let f = fidelity(&psi.to_density(), &report.state).unwrap();
        worst_infidelity = worst_infidelity.max(1.0 - f);
        drop = drop.max(worst_drop(&report.log_likelihood));
        details.push(format!("{label}: 1-F {:.2e} in {} its", 1.0 - f, report.iterations));
    }
    let (_, psi4) = simulated_state(3, Scenario::Condensed, t_max);
    let records: Vec<MeasRecord> = pauli_settings(4)
        .unwrap()
        .iter()
        .enumerate()
        .map(|(i, s)| sample(&psi4, s, 4096, derive_seed(5, i as u64), 0.0).unwrap())
        .collect();
    let report = mle_reconstruct(&TomographyJob::from_records(4, &records).unwrap()).unwrap();
    let f4 = fidelity(&psi4.to_density(), &report.state).unwrap();
    drop = drop.max(worst_drop(&report.log_likelihood));
    let secs = start.elapsed().as_secs_f64();
    // drops at the level of floating-point rounding of the sum are ignored
    verdict(
        8,
        "tomography",
        worst_infidelity <= 1e-5 && f4 >= 0.99 && drop <= 1e-12 && secs < 120.0,
        &format!(
            "{}; 4-qubit shots fidelity {f4:.5}; largest log-likelihood drop {drop:.1e}; {secs:.1} s",
            details.join(", ")
        ),
    );
}

fn connected_patches(map: &CouplingMap, k: usize) -> Vec<Vec<usize>> {
    let m = map.num_physical();
    (0u32..1 << m)
        .filter(|s| s.count_ones() as usize == k)
        .map(|s| (0..m).filter(|q| s >> q & 1 == 1).collect::<Vec<_>>())
        .filter(|nodes| map.induced(nodes).is_ok())
        .collect()
}

#[test]
fn criterion_09_routing_soundness() {
    let dev = CouplingMap::casablanca();
    let (t_max, t_close, t_rec) = canonical_times();
    // subcircuits of at most five qubits: smaller models on every connected patch of the device
    let mut unitary_dev = 0.0f64;
    let mut patches = 0;
    for (n, sc) in [(1, Scenario::Full), (2, Scenario::Full), (1, Scenario::Condensed), (2, Scenario::Condensed), (3, Scenario::Condensed), (4, Scenario::Condensed)] {
        let c = build_circuit(t_close, &ScmParams::non_entangling(n, sc)).unwrap();
        let u = unitary_of(&c).unwrap();
        for nodes in connected_patches(&dev, c.num_qubits()) {
            let sub = dev.induced(&nodes).unwrap();
            let rc = route(&c, &sub).unwrap();
            assert!(rc.is_conformant(&sub));
            let expected = layout_permutation(&rc.final_layout).unwrap()
                * &u
                * layout_permutation(&rc.initial_layout).unwrap().transpose();
            let r = unitary_of(&rc.circuit).unwrap();
            unitary_dev = unitary_dev.max((r - expected).iter().map(|z| z.norm()).fold(0.0, f64::max));
            patches += 1;
        }
    }
    let mut state_dev = 0.0f64;
    let mut counts = BTreeMap::new();
    for (n, sc) in [(3, Scenario::Full), (6, Scenario::Condensed)] {
        for t in [t_max, t_close, t_rec] {
            let c = build_circuit(t, &ScmParams::non_entangling(n, sc)).unwrap();
            let rc = route(&c, &dev).unwrap();
            assert!(rc.is_conformant(&dev));
            state_dev = state_dev.max(routing_isometry_deviation(&c, &rc).unwrap());
            let opt = peephole_zero_swap(&rc, &initial_zero_set(&rc, &(0..7).collect::<BTreeSet<_>>())).unwrap();
            let mut ideal = PureState::zero(7);
            c.apply_to(&mut ideal).unwrap();
            let expected = embed_state(&ideal, &rc.final_layout, 7).unwrap();
            let mut got = PureState::zero(7);
            opt.circuit.apply_to(&mut got).unwrap();
            let d = got.amplitudes().iter().zip(expected.amplitudes()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            state_dev = state_dev.max(d);
            counts.insert(format!("{sc:?} n={n}"), (rc.cnot_count, opt.cnot_count));
        }
    }
    let (before, after) = counts["Full n=3"];
    verdict(
        9,
        "routing soundness",
        unitary_dev < 1e-10 && state_dev < 1e-12 && after < before,
        &format!(
            "unitary deviation {unitary_dev:.2e} over {patches} patches, 7-qubit statevector deviation {state_dev:.2e}, CNOTs routed/peephole {counts:?}"
        ),
    );
}

fn snapshot(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut files = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                files.insert(p.strip_prefix(dir).unwrap().to_path_buf(), fs::read(&p).unwrap());
            }
        }
    }
    files
}

#[test]
fn criterion_10_determinism() {
    let tmp = tempfile::tempdir().unwrap();
    let experiments = [
        ("coherence", r#"{"scenario": "condensed", "n": 6, "times": {"start": 0, "stop": "t_rec", "points": 31}, "shots": 8192, "seed": 41, "noise": {"depol_2q": 0.01, "readout_flip": 0.02}}"#),
        ("darwinism", r#"{"scenario": "condensed", "n": 2, "times": ["t_max", "t_rec"], "shots": 1024, "seed": 42, "tomography": true, "noise": {"depol_1q": 0.01}}"#),
        ("cmi", r#"{"scenario": "condensed", "n": 6, "times": ["t_max", "2*t_max"], "seed": 43}"#),
        ("compare", r#"{"scenario": "condensed", "n": 4, "times": ["t_max", "t_close", "t_rec"], "grid_steps": 21, "seed": 44}"#),
        ("route", r#"{"scenario": "full", "n": 3, "times": ["t_max", "t_rec"], "seed": 45}"#),
        ("tomo", r#"{"scenario": "condensed", "n": 2, "times": "t_close", "shots": 2048, "seed": 46, "noise": {"amp_damp_gamma": 0.02}}"#),
    ];
    let mut identical = 0;
    let mut files = 0;
    for (cmd, body) in experiments {
        let cfg = tmp.path().join(format!("{cmd}.json"));
        fs::write(&cfg, body).unwrap();
        let mut snaps = Vec::new();
        for (run, jobs) in [("a", "1"), ("b", "3")] {
            let out = tmp.path().join(format!("{cmd}_{run}"));
            let status = Command::new(env!("CARGO_BIN_EXE_dlab"))
                .args([cmd, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--jobs", jobs])
                .status()
                .unwrap();
            assert!(status.success(), "{cmd}");
            snaps.push(snapshot(&out));
        }
        files += snaps[0].len();
        if snaps[0] == snaps[1] {
            identical += 1;
        }
    }
    verdict(
        10,
        "determinism",
        identical == experiments.len(),
        &format!("{identical}/{} experiments byte-identical on rerun, {files} files compared", experiments.len()),
    );
}
