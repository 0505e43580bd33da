//! End-to-end acceptance suite. Each test prints one `ACCEPTANCE <n> ...
//! PASS` line (run with `--nocapture` to see them all) and covers one
//! criterion: gate algebra, encoding equivalence, ground-state recovery,
//! variational bounds, padding/warm-start identities, depth plateau, frontier
//! structure, ramp trends, and CLI determinism.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use qfolio::market_data::AssetStats;
use qfolio::markowitz::{self, DEFAULT_RF};
use qfolio::qaoa::{self, OptimizeConfig, QaoaParams, RAMP_TIME_PER_LAYER};
use qfolio::qubo_ising::{self, example_instance, QuboProblem};
use qfolio::seed::stream_rng;
use qfolio::statevector::{GateOp, StateVector};

use rand::Rng;

fn criterion(number: u32, name: &str, budget: Duration, run: impl FnOnce() -> Result<(), String>) {
    let started = Instant::now();
    let outcome = run();
    let elapsed = started.elapsed();
    match &outcome {
        Ok(()) if elapsed <= budget => {
            println!("ACCEPTANCE {number} ({name}): PASS [{elapsed:.2?}]");
        }
        Ok(()) => {
            println!("ACCEPTANCE {number} ({name}): FAIL [overtime {elapsed:.2?} > {budget:.2?}]");
            panic!("criterion {number} exceeded its time budget");
        }
        Err(msg) => {
            println!("ACCEPTANCE {number} ({name}): FAIL [{msg}]");
            panic!("criterion {number} failed: {msg}");
        }
    }
}

fn check(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn reference_stats() -> AssetStats {
    AssetStats::from_annual(
        vec![
            "BRKM5".into(),
            "ITUB4".into(),
            "KLBN4".into(),
            "VALE3".into(),
        ],
        vec![0.32, 0.06, 0.11, 0.30],
        vec![
            vec![1.00, 0.37, 0.28, 0.33],
            vec![0.37, 1.00, 0.18, 0.36],
            vec![0.28, 0.18, 1.00, 0.24],
            vec![0.33, 0.36, 0.24, 1.00],
        ],
    )
}

fn random_state(n: usize, rng: &mut impl Rng) -> StateVector {
    let mut s = StateVector::init_zero(n).unwrap();
    for q in 0..n {
        s.apply(&GateOp::H(q)).unwrap();
        s.apply(&GateOp::RX {
            target: q,
            theta: rng.random_range(0.0..std::f64::consts::TAU),
        })
        .unwrap();
        s.apply(&GateOp::RZ {
            target: q,
            theta: rng.random_range(0.0..std::f64::consts::TAU),
        })
        .unwrap();
    }
    for q in 1..n {
        s.apply(&GateOp::Cnot {
            control: 0,
            target: q,
        })
        .unwrap();
    }
    s
}

fn random_gate(n: usize, rng: &mut impl Rng) -> GateOp {
    let q = rng.random_range(0..n);
    match rng.random_range(0..6u8) {
        0 => GateOp::X(q),
        1 => GateOp::Z(q),
        2 => GateOp::H(q),
        3 => GateOp::RX {
            target: q,
            theta: rng.random_range(0.0..std::f64::consts::TAU),
        },
        4 => GateOp::RZ {
            target: q,
            theta: rng.random_range(0.0..std::f64::consts::TAU),
        },
        _ => {
            let other = (q + 1 + rng.random_range(0..n - 1)) % n;
            GateOp::Cnot {
                control: q,
                target: other,
            }
        }
    }
}

fn basis_state(n: usize, index: usize) -> StateVector {
    let mut s = StateVector::init_zero(n).unwrap();
    for q in 0..n {
        if (index >> (n - 1 - q)) & 1 == 1 {
            s.apply(&GateOp::X(q)).unwrap();
        }
    }
    s
}

#[test]
fn acceptance_1_gate_algebra() {
    criterion(1, "gate algebra", Duration::from_secs(1), || {
        // Single-qubit truth tables on both basis states.
        for (gate, col0, col1) in [
            (GateOp::X(0), [0.0, 1.0], [1.0, 0.0]),
            (GateOp::Z(0), [1.0, 0.0], [0.0, -1.0]),
            (
                GateOp::H(0),
                [0.5f64.sqrt(), 0.5f64.sqrt()],
                [0.5f64.sqrt(), -(0.5f64.sqrt())],
            ),
        ] {
            for (input, expect) in [(0, col0), (1, col1)] {
                let mut s = basis_state(1, input);
                s.apply(&gate).unwrap();
                for (amp, want) in s.amps().iter().zip(expect) {
                    check(
                        (amp.re - want).abs() < 1e-12 && amp.im.abs() < 1e-12,
                        format!("{gate:?} wrong on |{input}>"),
                    )?;
                }
            }
        }
        // CNOT permutation: 00->00, 01->01, 10->11, 11->10.
        for (input, want) in [(0usize, 0usize), (1, 1), (2, 3), (3, 2)] {
            let mut s = basis_state(2, input);
            s.apply(&GateOp::Cnot {
                control: 0,
                target: 1,
            })
            .unwrap();
            check(
                (s.amps()[want].re - 1.0).abs() < 1e-12,
                format!("CNOT wrong on index {input}"),
            )?;
        }
        // Norm drift over 1000 random gates.
        let mut rng = stream_rng(101, 0);
        let mut s = random_state(4, &mut rng);
        for _ in 0..1000 {
            s.apply(&random_gate(4, &mut rng)).unwrap();
        }
        check(
            (s.norm_sqr() - 1.0).abs() <= 1e-9,
            format!("norm drift {}", (s.norm_sqr() - 1.0).abs()),
        )?;
        // ZZ phase gate equals the CNOT / RZ / CNOT sandwich on random
        // 3-qubit states.
        for trial in 0..20 {
            let mut rng = stream_rng(102, trial);
            let theta = rng.random_range(0.0..std::f64::consts::TAU);
            let mut direct = random_state(3, &mut rng);
            let mut sandwich = direct.clone();
            direct.apply(&GateOp::ZZ { a: 0, b: 2, theta }).unwrap();
            sandwich
                .apply(&GateOp::Cnot {
                    control: 0,
                    target: 2,
                })
                .unwrap();
            sandwich.apply(&GateOp::RZ { target: 2, theta }).unwrap();
            sandwich
                .apply(&GateOp::Cnot {
                    control: 0,
                    target: 2,
                })
                .unwrap();
            for (a, b) in direct.amps().iter().zip(sandwich.amps()) {
                check(
                    (a - b).norm() < 1e-12,
                    format!("ZZ decomposition mismatch {}", (a - b).norm()),
                )?;
            }
        }
        Ok(())
    });
}

#[test]
fn acceptance_2_encoding_equivalence() {
    criterion(
        2,
        "Ising encoding equivalence",
        Duration::from_secs(5),
        || {
            let mut problems: Vec<QuboProblem> = vec![example_instance()];
            let mut rng = stream_rng(202, 0);
            for _ in 0..100 {
                let n = rng.random_range(1..=6usize);
                let mut quad = vec![vec![0.0; n]; n];
                for row in &mut quad {
                    for v in row.iter_mut() {
                        *v = rng.random_range(-2.0..2.0);
                    }
                }
                problems.push(QuboProblem {
                    n,
                    quad,
                    lin: (0..n).map(|_| rng.random_range(-2.0..2.0)).collect(),
                    const_term: rng.random_range(-2.0..2.0),
                    labels: (0..n).map(|i| format!("x{i}")).collect(),
                });
            }
            for q in &problems {
                let h = qubo_ising::qubo_to_ising(q);
                let energies = qubo_ising::diagonal_energies(&h).unwrap();
                for (idx, &e) in energies.iter().enumerate() {
                    let bits: Vec<u8> = (0..q.n).map(|i| qubo_ising::bit_of(idx, i, q.n)).collect();
                    let direct = qubo_ising::evaluate(q, &bits).unwrap();
                    check(
                        (e - direct).abs() < 1e-12,
                        format!("n={} idx={idx}: {e} vs {direct}", q.n),
                    )?;
                }
            }
            Ok(())
        },
    );
}

#[test]
fn acceptance_3_ground_state_identification() {
    criterion(
        3,
        "ground-state identification",
        Duration::from_secs(60),
        || {
            let q = example_instance();
            let brute = qubo_ising::brute_force_solve(&q).unwrap();
            check(
                qubo_ising::bitstring(brute.best_index, q.n) == "1001",
                format!("brute force picked index {}", brute.best_index),
            )?;
            check(
                (brute.best_value - 0.71).abs() < 1e-12,
                format!("brute force minimum {}", brute.best_value),
            )?;

            let h = qubo_ising::qubo_to_ising(&q);
            let result = qaoa::optimize(&h, &OptimizeConfig::new(20, 10, 42)).unwrap();
            let argmax = result
                .state_probs
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .unwrap()
                .0;
            check(
                argmax == brute.best_index,
                format!("probability argmax on index {argmax}"),
            )?;
            check(
                result.ground_prob >= 0.5,
                format!("ground probability {}", result.ground_prob),
            )
        },
    );
}

#[test]
fn acceptance_4_variational_bound() {
    criterion(4, "variational bound", Duration::from_secs(30), || {
        let h = qubo_ising::qubo_to_ising(&example_instance());
        let minimum = qubo_ising::diagonal_energies(&h)
            .unwrap()
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        let mut rng = stream_rng(404, 0);
        for _ in 0..1000 {
            let p = rng.random_range(1..=4usize);
            let params = QaoaParams::new(
                (0..p)
                    .map(|_| rng.random_range(0.0..qaoa::BETA_PERIOD))
                    .collect(),
                (0..p)
                    .map(|_| rng.random_range(0.0..qaoa::GAMMA_PERIOD))
                    .collect(),
            );
            let f = qaoa::evaluate_f(&h, &params).unwrap();
            check(
                f >= minimum - 1e-9,
                format!("F = {f} below minimum {minimum}"),
            )?;
        }
        Ok(())
    });
}

#[test]
fn acceptance_5_padding_and_warm_start() {
    criterion(
        5,
        "padding identity / warm start",
        Duration::from_secs(30),
        || {
            let h = qubo_ising::qubo_to_ising(&example_instance());
            let mut cfg = OptimizeConfig::new(3, 4, 55);
            cfg.budget_per_restart = Some(400);
            let at_p = qaoa::optimize(&h, &cfg).unwrap();
            let padded = at_p.params.padded(1);
            let padded_f = qaoa::evaluate_f(&h, &padded).unwrap();
            check(
                (padded_f - at_p.energy).abs() <= 1e-10,
                format!("padding changed F by {}", (padded_f - at_p.energy).abs()),
            )?;
            let mut next = OptimizeConfig::new(4, 4, 55);
            next.budget_per_restart = Some(400);
            next.extra_starts.push(padded);
            let at_p1 = qaoa::optimize(&h, &next).unwrap();
            check(
                at_p1.energy <= padded_f + 1e-10,
                format!("warm-started F {} above padded {padded_f}", at_p1.energy),
            )
        },
    );
}

#[test]
fn acceptance_6_layer_sweep_plateau() {
    criterion(6, "layer-sweep plateau", Duration::from_secs(120), || {
        let h = qubo_ising::qubo_to_ising(&example_instance());
        let minimum = qubo_ising::brute_force_solve(&example_instance())
            .unwrap()
            .best_value;
        let rows = qaoa::layer_sweep(&h, &[16, 17, 18, 19, 20], 10, 42, None).unwrap();
        for row in &rows {
            check(
                (row.energy_mean2 - minimum).abs() <= 0.1,
                format!("p={} mean-of-two-best {}", row.layers, row.energy_mean2),
            )?;
        }
        Ok(())
    });
}

#[test]
fn acceptance_7_frontier_structure() {
    criterion(7, "frontier structure", Duration::from_secs(10), || {
        let stats = reference_stats();
        let report = markowitz::sample_portfolios(&stats, 30_000, 42, &DEFAULT_RF).unwrap();
        for p in &report.samples {
            check(
                report.named.min_risk.vol <= p.vol,
                "min-risk pick is not the volatility minimum",
            )?;
        }
        check(
            report.named.max_return.weights[0] > 0.5,
            format!(
                "max-return BRKM5 weight {}",
                report.named.max_return.weights[0]
            ),
        )?;
        for (rf, pick) in &report.named.max_sharpe {
            let combined = pick.weights[0] + pick.weights[3];
            check(
                combined > 0.7,
                format!("rf={rf}: BRKM5+VALE3 weight {combined}"),
            )?;
        }
        Ok(())
    });
}

#[test]
fn acceptance_8_adiabatic_ramp_trend() {
    criterion(8, "adiabatic ramp trend", Duration::from_secs(30), || {
        let h = qubo_ising::qubo_to_ising(&example_instance());
        let energies: Vec<f64> = [1usize, 2, 4, 8, 16, 32]
            .iter()
            .map(|&p| {
                let params = qaoa::linear_ramp_params(p, RAMP_TIME_PER_LAYER * p as f64);
                qaoa::evaluate_f(&h, &params).unwrap()
            })
            .collect();
        let diffs: Vec<f64> = energies.windows(2).map(|w| w[1] - w[0]).collect();
        let mean_diff = diffs.iter().sum::<f64>() / diffs.len() as f64;
        check(
            mean_diff <= 0.0 && energies.last() <= energies.first(),
            format!("ramp energies {energies:?}"),
        )
    });
}

// ---- criterion 9: CLI determinism -------------------------------------

fn qfolio_bin() -> &'static str {
    env!("CARGO_BIN_EXE_qfolio")
}

fn fixture_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/prices.csv")
}

fn run_ok(args: &[&str], threads: Option<&str>) {
    let mut cmd = Command::new(qfolio_bin());
    cmd.args(args).env_remove("QFOLIO_THREADS");
    if let Some(t) = threads {
        cmd.args(["--threads", t]);
    }
    let out = cmd.output().expect("spawn qfolio");
    assert!(
        out.status.success(),
        "qfolio {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

/// Run the full pipeline into `dir` and return every output keyed by name.
fn run_pipeline(dir: &Path, threads: Option<&str>) -> BTreeMap<String, Vec<u8>> {
    let out = dir.to_str().unwrap();
    let fixture = fixture_path();
    let fixture = fixture.to_str().unwrap();
    let stats = format!("{out}/stats.json");
    let ising = format!("{out}/ising.json");
    run_ok(&["--out", out, "stats", fixture], threads);
    run_ok(
        &[
            "--out",
            out,
            "frontier",
            &stats,
            "--samples",
            "2000",
            "--seed",
            "42",
        ],
        threads,
    );
    run_ok(&["--out", out, "qubo", &stats], threads);
    run_ok(
        &[
            "--out",
            out,
            "solve",
            &ising,
            "--layers",
            "4",
            "--restarts",
            "3",
            "--seed",
            "42",
        ],
        threads,
    );
    run_ok(
        &[
            "--out",
            out,
            "sweep",
            &ising,
            "--layers",
            "1..3",
            "--restarts",
            "2",
            "--seed",
            "42",
        ],
        threads,
    );
    let mut files = BTreeMap::new();
    for entry in std::fs::read_dir(dir).unwrap() {
        let entry = entry.unwrap();
        files.insert(
            entry.file_name().to_string_lossy().into_owned(),
            std::fs::read(entry.path()).unwrap(),
        );
    }
    files
}

struct TempDir(PathBuf);

impl TempDir {
    fn new(tag: &str) -> TempDir {
        let path = std::env::temp_dir().join(format!("qfolio-acc-{tag}-{}", std::process::id()));
        let _ = std::fs::remove_dir_all(&path);
        std::fs::create_dir_all(&path).unwrap();
        TempDir(path)
    }
}

impl Drop for TempDir {
    fn drop(&mut self) {
        let _ = std::fs::remove_dir_all(&self.0);
    }
}

#[test]
fn acceptance_9_cli_determinism() {
    criterion(9, "CLI determinism", Duration::from_secs(120), || {
        let a = TempDir::new("a");
        let b = TempDir::new("b");
        let c = TempDir::new("c");
        let first = run_pipeline(&a.0, None);
        let second = run_pipeline(&b.0, None);
        let threaded = run_pipeline(&c.0, Some("4"));
        check(!first.is_empty(), "pipeline produced no outputs")?;
        check(
            first.keys().collect::<Vec<_>>()
                == vec![
                    "frontier.csv",
                    "histogram.csv",
                    "ising.json",
                    "named.json",
                    "qubo.json",
                    "result.json",
                    "run_manifest.json",
                    "stats.json",
                    "sweep.csv",
                ],
            format!("unexpected file set {:?}", first.keys().collect::<Vec<_>>()),
        )?;
        check(first == second, "same-seed re-run is not byte-identical")?;
        check(first == threaded, "outputs depend on --threads")?;
        Ok(())
    });
}
