//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use orikit::checks::{run_section, CheckResult, Section, SuiteConfig};
use orikit_cli::{cmd_simulate, RunConfig};

struct Verdict {
    id: &'static str,
    title: &'static str,
    passed: bool,
    detail: String,
}

fn section_verdict(id: &'static str, title: &'static str, section: Section, budget: Option<Duration>) -> Verdict {
    let start = Instant::now();
    let rows: Vec<CheckResult> = run_section(section, &SuiteConfig::default());
    let elapsed = start.elapsed();
    let failed: Vec<&CheckResult> = rows.iter().filter(|r| !r.passed).collect();
    let mut passed = failed.is_empty();
    let mut detail = match failed.first() {
        None => {
            let worst = rows.iter().map(|r| format!("{}: {:.2e}", r.name, r.worst)).collect::<Vec<_>>();
            format!("{} checks; {}", rows.len(), worst.join("; "))
        }
        Some(_) => failed.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(" | "),
    };
    if let Some(b) = budget {
        let in_time = elapsed < b;
        passed &= in_time;
        detail = format!("{detail}; runtime {:.3}s (limit {:.0}s)", elapsed.as_secs_f64(), b.as_secs_f64());
    }
    Verdict { id, title, passed, detail }
}

fn simulate_into(cfg: &RunConfig, dir: &Path) -> orikit::experiment::Outcome {
    let mut cfg = cfg.clone();
    cfg.out_dir = dir.to_path_buf();
    cmd_simulate(&cfg).expect("simulation runs")
}

fn end_to_end() -> Vec<Verdict> {
    let base = RunConfig::default();
    let tmp = tempfile::tempdir().expect("temporary directory");

    let start = Instant::now();
    let mut exact_cfg = base.clone();
    exact_cfg.sim.noise_free = true;
    let exact = simulate_into(&exact_cfg, &tmp.path().join("noise-free"));
    let noisy = simulate_into(&base, &tmp.path().join("noisy"));
    let elapsed = start.elapsed().as_secs_f64() / 2.0;

    let worst_exact = exact.summary.max_error.iter().cloned().fold(0.0, f64::max);
    let sigma_p = (base.noise.position.iter().sum::<f64>() / 3.0).sqrt();
    let rmse_p = noisy.summary.rmse[0];
    let nees = &noisy.summary.nees;
    let timing = format!("runtime {elapsed:.2}s per run (limit 10s)");
    vec![
        Verdict {
            id: "9a",
            title: "noise-free run tracks truth within 1e-6",
            passed: worst_exact <= 1e-6 && elapsed < 10.0,
            detail: format!(
                "max error per block [{}]; {timing}",
                exact.summary.max_error.iter().map(|e| format!("{e:.2e}")).collect::<Vec<_>>().join(", ")
            ),
        },
        Verdict {
            id: "9b",
            title: "noisy position RMSE below 3x pose sigma",
            passed: rmse_p < 3.0 * sigma_p && elapsed < 10.0,
            detail: format!("rmse {rmse_p:.4} m vs bound {:.4} m; {timing}", 3.0 * sigma_p),
        },
        Verdict {
            id: "9c",
            title: "NEES within 95% chi-square band on >= 60% of updates",
            passed: nees.fraction_in_band >= 0.6 && elapsed < 10.0,
            detail: format!(
                "{:.1}% of {} updates in [{:.2}, {:.2}], mean {:.2}; {timing}",
                100.0 * nees.fraction_in_band,
                nees.count,
                nees.band.0,
                nees.band.1,
                nees.mean
            ),
        },
    ]
}

fn determinism() -> Verdict {
    let cfg = RunConfig::default();
    let tmp = tempfile::tempdir().expect("temporary directory");
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    simulate_into(&cfg, &a);
    simulate_into(&cfg, &b);
    let files = ["truth.csv", "imu.csv", "pose.csv", "estimate.csv", "summary.txt"];
    let differing: Vec<&str> = files
        .iter()
        .copied()
        .filter(|f| std::fs::read(a.join(f)).ok() != std::fs::read(b.join(f)).ok() || !a.join(f).exists())
        .collect();
    Verdict {
        id: "10",
        title: "simulate is bit-identical across runs",
        passed: differing.is_empty(),
        detail: if differing.is_empty() {
            format!("{} files identical", files.len())
        } else {
            format!("differing: {}", differing.join(", "))
        },
    }
}

fn main() -> ExitCode {
    let mut verdicts = vec![
        section_verdict("1", "consistency matrix", Section::Consistency, Some(Duration::from_secs(1))),
        section_verdict("2", "boxplus/boxminus axioms", Section::Axioms, None),
        section_verdict("3", "eight derivative identities", Section::Jacobians, None),
        section_verdict("4", "Rodriguez formula vs series", Section::Rodriguez, None),
        section_verdict("5", "adjoint identity", Section::Adjoint, None),
        section_verdict("6", "Gamma inverse and branch continuity", Section::Gamma, None),
        section_verdict("7", "log-additivity limit is first order", Section::Limit, None),
        section_verdict("8", "F, G, H vs finite differences", Section::ModelJacobians, None),
    ];
    verdicts.extend(end_to_end());
    verdicts.push(determinism());

    let mut failed = 0;
    for v in &verdicts {
        if !v.passed {
            failed += 1;
        }
        println!(
            "{} criterion {:<3} {} :: {}",
            if v.passed { "PASS" } else { "FAIL" },
            v.id,
            v.title,
            v.detail
        );
    }
    println!("acceptance: {} passed, {} failed", verdicts.len() - failed, failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
