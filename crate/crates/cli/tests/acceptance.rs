//! Acceptance suite. Prints one line per criterion and exits non-zero if
//! any criterion fails.

use std::collections::BTreeSet;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::Matrix4;
use num_complex::Complex64 as C64;
use pairtomo::estimator::mle_project;
use pairtomo::network::{apply_filter, build_multiplex, calibrate_filter, Layer, Multiplex};
use pairtomo::quantifiers::{
    classical_correlations, concurrence, discord, entropy_bits, mutual_information, purity, Slot,
};
use pairtomo::scheduler::base2_setting_count;
use pairtomo::states::{
    collision_state, exact_rdm, ground_crossings, single_qubit_rdm, w_state, xx_ground_state, xx_zone,
    CollisionConfig, StateVector, XXConfig,
};
use pairtomo::{exact_counts, generate_plan, reconstruct, sample, DensityMatrix2Q, MeasurementPlan};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn log3_ceil(n: usize) -> usize {
    let (mut k, mut reach) = (0, 1);
    while reach < n {
        reach *= 3;
        k += 1;
    }
    k
}

fn setting_count_law() -> Outcome {
    let start = Instant::now();
    for n in 2..=2000 {
        let plan = generate_plan(n).map_err(|e| e.to_string())?;
        let expected = 6 * log3_ceil(n) + 3;
        if plan.len() != expected {
            return Err(format!("N = {n}: {} settings, expected {expected}", plan.len()));
        }
    }
    let elapsed = start.elapsed();
    let n50 = generate_plan(50).unwrap().len();
    let n1024 = generate_plan(1024).unwrap().len();
    let b1024 = base2_setting_count(1024);
    check(
        n50 == 27 && n1024 == 45 && b1024 == 63 && elapsed < Duration::from_secs(5),
        format!("N=50 -> {n50}, N=1024 -> {n1024} vs base-2 {b1024}, {:.2}s", elapsed.as_secs_f64()),
    )
}

fn brute_force_coverage() -> Outcome {
    let start = Instant::now();
    for n in 2..=60 {
        let plan = generate_plan(n).unwrap();
        let rows: Vec<Vec<u8>> = plan.settings.iter().map(|s| s.bases_string().into_bytes()).collect();
        for i in 0..n {
            for j in i + 1..n {
                for a in *b"XYZ" {
                    for b in *b"XYZ" {
                        if !rows.iter().any(|r| r[i] == a && r[j] == b) {
                            return Err(format!("N = {n}: pair ({i}, {j}) never measured in {}{}", a as char, b as char));
                        }
                    }
                }
            }
        }
    }
    let elapsed = start.elapsed();
    check(elapsed < Duration::from_secs(30), format!("N = 2..60 complete, {:.2}s", elapsed.as_secs_f64()))
}

fn worst_round_trip(state: &StateVector) -> f64 {
    let plan = generate_plan(state.n_qubits()).unwrap();
    let net = reconstruct(&exact_counts(state, &plan).unwrap(), &plan).unwrap();
    net.pairs
        .iter()
        .map(|p| p.rho.trace_distance(&exact_rdm(state, p.i, p.j).unwrap()))
        .fold(0.0, f64::max)
}

fn exact_round_trip() -> Outcome {
    let start = Instant::now();
    let mut states: Vec<(String, StateVector)> = (3..=7).map(|n| (format!("W{n}"), w_state(n).unwrap())).collect();
    for b in [0.88, 0.7, 0.45] {
        let cfg = XXConfig::new(9, b).unwrap();
        states.push((format!("XX(B={b})"), xx_ground_state(&cfg).unwrap().0));
    }
    for n in 1..=4 {
        let cfg = CollisionConfig::new(n, 1000.0, 2.0 * std::f64::consts::FRAC_PI_3).unwrap();
        states.push((format!("collision(n={n})"), collision_state(&cfg).unwrap()));
    }
    let mut worst = (0.0, String::new());
    for (name, state) in &states {
        let d = worst_round_trip(state);
        if d > worst.0 {
            worst = (d, name.clone());
        }
    }
    let elapsed = start.elapsed();
    check(
        worst.0 <= 1e-8 && elapsed < Duration::from_secs(120),
        format!(
            "{} states, worst trace distance {:.2e} ({}), {:.2}s",
            states.len(),
            worst.0,
            worst.1,
            elapsed.as_secs_f64()
        ),
    )
}

fn concurrence_weights(mux: &Multiplex) -> Vec<f64> {
    mux.layer(Layer::Concurrence).edges.iter().map(|e| e.2).collect()
}

fn w_concurrence() -> Outcome {
    let mut exact_err: f64 = 0.0;
    for n in 3..=10 {
        let state = w_state(n).unwrap();
        let plan = generate_plan(n).unwrap();
        let mux = build_multiplex(&reconstruct(&exact_counts(&state, &plan).unwrap(), &plan).unwrap()).unwrap();
        let c = concurrence_weights(&mux);
        if c.len() != n * (n - 1) / 2 {
            return Err(format!("N = {n}: {} concurrence edges", c.len()));
        }
        exact_err = c.iter().fold(exact_err, |m, w| m.max((w - 2.0 / n as f64).abs()));
    }
    let plan = generate_plan(5).unwrap();
    let state = w_state(5).unwrap();
    let (mut worst_pair, mut worst_mean): (f64, f64) = (0.0, 0.0);
    for seed in 0..20 {
        let counts = sample(&state, &plan, 8192, seed).unwrap();
        let c = concurrence_weights(&build_multiplex(&reconstruct(&counts, &plan).unwrap()).unwrap());
        let mean = c.iter().sum::<f64>() / c.len() as f64;
        worst_pair = c.iter().fold(worst_pair, |m, w| m.max((w - 0.4).abs()));
        worst_mean = worst_mean.max((mean - 0.4).abs());
    }
    check(
        exact_err <= 1e-8 && worst_pair <= 0.08 && worst_mean <= 0.03,
        format!(
            "exact N=3..10 max |C - 2/N| = {exact_err:.2e}; sampled N=5 over 20 seeds: max pair deviation {worst_pair:.4} (tol 0.08), max mean deviation {worst_mean:.4} (tol 0.03)"
        ),
    )
}

/// Euclidean projection onto the probability simplex by trying every
/// support set.
fn simplex_oracle(lambda: &[f64]) -> Vec<f64> {
    let n = lambda.len();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 1u32..(1 << n) {
        let support: Vec<usize> = (0..n).filter(|k| mask & (1 << k) != 0).collect();
        let shift = (1.0 - support.iter().map(|&k| lambda[k]).sum::<f64>()) / support.len() as f64;
        let x: Vec<f64> = (0..n)
            .map(|k| if mask & (1 << k) != 0 { lambda[k] + shift } else { 0.0 })
            .collect();
        if x.iter().any(|&v| v < 0.0) {
            continue;
        }
        let d: f64 = x.iter().zip(lambda).map(|(a, b)| (a - b).powi(2)).sum();
        if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
            best = Some((d, x));
        }
    }
    let mut x = best.unwrap().1;
    x.sort_by(f64::total_cmp);
    x
}

fn spectrum(m: &Matrix4<C64>) -> Vec<f64> {
    let mut v: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

fn mle_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    let mut projected = 0;
    for trial in 0..1000 {
        let scale = 0.02 + 0.3 * (trial as f64 / 1000.0);
        let g = Matrix4::<C64>::from_fn(|_, _| {
            C64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)) * scale
        });
        let mut h = (g + g.adjoint()) * C64::new(0.5, 0.0);
        let shift = (h.trace().re - 1.0) / 4.0;
        for k in 0..4 {
            h[(k, k)] -= C64::new(shift, 0.0);
        }
        let input = spectrum(&h);
        if input[0] < 0.0 {
            projected += 1;
        }
        let out = spectrum(mle_project(&h).map_err(|e| e.to_string())?.matrix());
        let expected = simplex_oracle(&input);
        worst = out.iter().zip(&expected).fold(worst, |m, (a, b)| m.max((a - b).abs()));
    }
    let fixed = Matrix4::from_diagonal(&nalgebra::Vector4::new(0.9, 0.3, -0.1, -0.1).map(|x| C64::new(x, 0.0)));
    let got = spectrum(mle_project(&fixed).map_err(|e| e.to_string())?.matrix());
    let fixed_err = got.iter().zip([0.0, 0.0, 0.2, 0.8]).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    check(
        worst <= 1e-9 && fixed_err <= 1e-12,
        format!("1000 matrices ({projected} non-physical), max deviation {worst:.2e}; fixed case error {fixed_err:.1e}"),
    )
}

fn quantifier_suite() -> Outcome {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let z = C64::new(0.0, 0.0);
    let bell = DensityMatrix2Q::pure([C64::new(h, 0.0), z, z, C64::new(h, 0.0)]);
    let mixed = DensityMatrix2Q::maximally_mixed();
    let classical = DensityMatrix2Q::mixture(&[
        (0.5, DensityMatrix2Q::pure([C64::new(1.0, 0.0), z, z, z])),
        (0.5, DensityMatrix2Q::pure([z, z, z, C64::new(1.0, 0.0)])),
    ]);
    let row = |rho: &DensityMatrix2Q| -> Result<[f64; 6], String> {
        Ok([
            concurrence(rho),
            entropy_bits(rho),
            purity(rho),
            mutual_information(rho),
            classical_correlations(rho, Slot::First),
            discord(rho, Slot::First).map_err(|e| e.to_string())?,
        ])
    };
    let cases = [
        ("Bell", row(&bell)?, [1.0, 0.0, 1.0, 2.0, 1.0, 1.0]),
        ("I/4", row(&mixed)?, [0.0, 2.0, 0.25, 0.0, 0.0, 0.0]),
    ];
    let mut worst: f64 = 0.0;
    for (_, got, want) in &cases {
        worst = got.iter().zip(want).fold(worst, |m, (a, b)| m.max((a - b).abs()));
    }
    let c = row(&classical)?;
    worst = worst.max((c[3] - 1.0).abs()).max((c[4] - 1.0).abs()).max(c[5].abs());
    check(worst <= 1e-6, format!("Bell, I/4 and classical state, max deviation {worst:.1e}"))
}

fn exact_multiplex(state: &StateVector) -> Multiplex {
    let plan = generate_plan(state.n_qubits()).unwrap();
    build_multiplex(&reconstruct(&exact_counts(state, &plan).unwrap(), &plan).unwrap()).unwrap()
}

fn w(mux: &Multiplex, layer: Layer, i: usize, j: usize) -> f64 {
    let (a, b) = if i < j { (i, j) } else { (j, i) };
    mux.layer(layer).weight(a, b).unwrap()
}

fn collision_structure() -> Outcome {
    let cfg = CollisionConfig::new(4, 1000.0, 2.0 * std::f64::consts::FRAC_PI_3).unwrap();
    let state = collision_state(&cfg).unwrap();
    let mux = exact_multiplex(&state);
    let s = cfg.system();
    let sys_anc = (0..4).map(|k| w(&mux, Layer::Concurrence, cfg.ancilla(k), s)).fold(f64::INFINITY, f64::min);
    let (mut anc_c, mut anc_d): (f64, f64) = (0.0, f64::INFINITY);
    for a in 0..4 {
        for b in a + 1..4 {
            anc_c = anc_c.max(w(&mux, Layer::Concurrence, cfg.ancilla(a), cfg.ancilla(b)));
            anc_d = anc_d.min(w(&mux, Layer::Discord, cfg.ancilla(a), cfg.ancilla(b)));
        }
    }
    let mut emitter_dev: f64 = 0.0;
    for k in 0..4 {
        let r = single_qubit_rdm(&state, cfg.emitter(k)).unwrap();
        let ground = [[1.0, 0.0], [0.0, 0.0]];
        for (x, row) in ground.iter().enumerate() {
            for (y, g) in row.iter().enumerate() {
                emitter_dev = emitter_dev.max((r[(x, y)] - C64::new(*g, 0.0)).norm());
            }
        }
    }
    let mut purity_dev: f64 = 0.0;
    for a in 0..4 {
        for b in a + 1..4 {
            purity_dev = purity_dev.max((w(&mux, Layer::Purity, cfg.emitter(a), cfg.emitter(b)) - 1.0).abs());
        }
    }
    check(
        sys_anc > 0.0 && anc_c <= 1e-9 && anc_d > 1e-3 && emitter_dev <= 1e-6 && purity_dev <= 1e-9,
        format!(
            "min C(system, ancilla) {sys_anc:.4}; max C(ancilla, ancilla) {anc_c:.1e}, min D {anc_d:.4}; emitter deviation {emitter_dev:.1e}; emitter-pair purity deviation {purity_dev:.1e}"
        ),
    )
}

fn topology(mux: &Multiplex) -> BTreeSet<(usize, usize)> {
    mux.layer(Layer::Concurrence).edges.iter().filter(|e| e.2 > 1e-6).map(|e| (e.0, e.1)).collect()
}

fn xx_chain() -> Outcome {
    let crossings = ground_crossings(9, 0.05, 1.5, 2000, 1e-12).map_err(|e| e.to_string())?;
    let expected: Vec<f64> = (1..=4).map(|k| (std::f64::consts::PI * k as f64 / 10.0).cos()).collect();
    if crossings.len() != 4 {
        return Err(format!("found {} crossings in (0.05, 1.5): {crossings:?}", crossings.len()));
    }
    let crossing_err = crossings.iter().zip(&expected).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));

    let fixture: serde_json::Value =
        serde_json::from_str(include_str!("../../core/tests/fixtures/xx9_concurrence_topology.json")).unwrap();
    let mut zone_topologies = Vec::new();
    for zone in fixture["zones"].as_array().unwrap() {
        let k = zone["zone"].as_u64().unwrap() as usize;
        let b = zone["field"].as_f64().unwrap();
        let frozen: BTreeSet<(usize, usize)> = zone["edges"]
            .as_array()
            .unwrap()
            .iter()
            .map(|e| (e[0].as_u64().unwrap() as usize, e[1].as_u64().unwrap() as usize))
            .collect();
        if xx_zone(9, b) != k {
            return Err(format!("B = {b} is not in zone {k}"));
        }
        let mux = exact_multiplex(&xx_ground_state(&XXConfig::new(9, b).unwrap()).unwrap().0);
        let got = topology(&mux);
        if got != frozen {
            return Err(format!("zone {k} (B = {b}) topology differs from fixture"));
        }
        zone_topologies.push((k, got, mux));
    }
    let mut changes = 0;
    for pair in zone_topologies.windows(2) {
        if pair[0].0 + 1 == pair[1].0 {
            if pair[0].1 == pair[1].1 {
                return Err(format!("topology unchanged between zones {} and {}", pair[0].0, pair[1].0));
            }
            changes += 1;
        }
    }
    // B = 0.87 lies between B_2 and B_1; B = 0.7 between B_3 and B_2.
    let mut contrasts = Vec::new();
    for b in [0.87, 0.7] {
        let mux = exact_multiplex(&xx_ground_state(&XXConfig::new(9, b).unwrap()).unwrap().0);
        contrasts.push((b, w(&mux, Layer::Concurrence, 0, 1), w(&mux, Layer::Concurrence, 4, 5)));
    }
    let distinct = contrasts.iter().all(|(_, e, b)| (e - b).abs() > 1e-3);
    check(
        crossing_err <= 1e-6 && distinct,
        format!(
            "crossings max |B - cos(pi k/10)| = {crossing_err:.1e}; {} zone fixtures matched, {changes} adjacent changes; C(0,1) vs C(4,5): {}",
            zone_topologies.len(),
            contrasts
                .iter()
                .map(|(b, e, k)| format!("B={b}: {e:.4} vs {k:.4}"))
                .collect::<Vec<_>>()
                .join(", ")
        ),
    )
}

fn filter_behaviour() -> Outcome {
    let plan: MeasurementPlan = generate_plan(5).unwrap();
    let zero = StateVector::basis_state("00000").unwrap();
    let w5 = w_state(5).unwrap();
    let (mut removed, mut total, mut w_lost) = (0usize, 0usize, 0usize);
    for seed in 0..20u64 {
        let cal = calibrate_filter(5, &plan, Some(8192), seed).unwrap();
        let baseline = sample(&zero, &plan, 8192, 1_000_000 + seed).unwrap();
        let mux = build_multiplex(&reconstruct(&baseline, &plan).unwrap()).unwrap();
        let filtered = apply_filter(&mux, &cal).unwrap();
        for layer in Layer::ALL.into_iter().filter(|l| l.is_filtered()) {
            total += mux.layer(layer).edges.len();
            removed += mux.layer(layer).edges.len() - filtered.layer(layer).edges.len();
        }
        let wc = sample(&w5, &plan, 8192, 2_000_000 + seed).unwrap();
        let wmux = apply_filter(&build_multiplex(&reconstruct(&wc, &plan).unwrap()).unwrap(), &cal).unwrap();
        w_lost += 10 - wmux.layer(Layer::Concurrence).edges.len();
    }
    let fraction = removed as f64 / total as f64;
    check(
        fraction >= 0.99 && w_lost == 0,
        format!("baseline edges removed {removed}/{total} ({:.2}%); W concurrence edges lost {w_lost}", 100.0 * fraction),
    )
}

fn run_pipeline_binary(dir: &Path, args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_pairtomo"))
        .arg("pipeline")
        .args(args)
        .arg("--out")
        .arg(dir)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(String::from_utf8_lossy(&out.stderr).into_owned());
    }
    Ok(())
}

fn determinism() -> Outcome {
    let runs: [&[&str]; 3] = [
        &["--state", "w", "--n", "5", "--shots", "8192", "--seed", "7", "--format", "json,graphml,dot"],
        &["--state", "xx", "--n", "9", "--b", "0.87", "--exact"],
        &["--state", "collision", "--pairs", "3", "--lambda-t", "1.5", "--shots", "4096", "--seed", "11"],
    ];
    let mut compared = 0;
    for args in runs {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        run_pipeline_binary(a.path(), args)?;
        run_pipeline_binary(b.path(), args)?;
        let mut names: Vec<_> = std::fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
        names.sort();
        for name in names {
            let (x, y) = (std::fs::read(a.path().join(&name)).unwrap(), std::fs::read(b.path().join(&name)));
            if y.as_ref().ok() != Some(&x) {
                return Err(format!("{args:?}: {} differs", name.to_string_lossy()));
            }
            compared += 1;
        }
    }
    Ok(format!("{compared} artifacts byte-identical across repeated runs"))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("setting-count law", setting_count_law),
        ("pair coverage", brute_force_coverage),
        ("exact round trip", exact_round_trip),
        ("W-state concurrence", w_concurrence),
        ("MLE oracle equivalence", mle_oracle),
        ("quantifier analytic suite", quantifier_suite),
        ("collision-state structure", collision_structure),
        ("XX chain zones", xx_chain),
        ("filter behaviour", filter_behaviour),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("acceptance {:>2} PASS  {name}: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("acceptance {:>2} FAIL  {name}: {detail}", k + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
