use adaptix::bench::{emit_report, PHASES};
use adaptix::bench::{run_benchmark, BenchConfig, BenchReport};
use adaptix::mesh::{io, verify};

fn lines(path: &std::path::Path) -> Vec<String> {
    std::fs::read_to_string(path).unwrap().lines().map(String::from).collect()
}

#[test]
fn five_step_run_reports_every_phase() {
    let dir = tempfile::tempdir().unwrap();
    let config = BenchConfig {
        n: 20,
        out: Some(dir.path().to_path_buf()),
        vtk: true,
        ..BenchConfig::desk(1, 5)
    };
    let report = run_benchmark(&config).unwrap();
    assert_eq!(report.steps.len(), 5);
    assert!(report.all_checks_passed());
    assert!(report.reproducible);
    assert_eq!(report.element_trace().len(), 5);

    let stats = lines(&dir.path().join("stats.csv"));
    assert_eq!(stats[0], "step,phase,seconds,elements,vertices,min_q,mean_q");
    assert_eq!(stats.len(), 1 + 5 * PHASES.len());
    for phase in PHASES {
        assert_eq!(stats.iter().filter(|l| l.split(',').nth(1) == Some(phase)).count(), 5);
    }
    let hist = lines(&dir.path().join("quality_hist.csv"));
    assert_eq!(hist.len(), 21);
    // a 1-thread run writes its own baseline, so efficiency is present
    assert!(dir.path().join("baseline.csv").exists());
    for step in 0..5 {
        assert!(dir.path().join(format!("mesh_{step:04}.vtk")).exists());
    }
    let last = io::read_native(&dir.path().join("final.mesh")).unwrap();
    assert!(verify(&last).is_empty());
    assert_eq!(last.alive_element_count(), *report.element_trace().last().unwrap());
}

#[test]
fn parallel_run_uses_the_serial_baseline() {
    let dir = tempfile::tempdir().unwrap();
    let serial = BenchConfig {
        n: 20,
        out: Some(dir.path().to_path_buf()),
        ..BenchConfig::desk(1, 3)
    };
    run_benchmark(&serial).unwrap();
    let parallel = BenchConfig {
        threads: 4,
        ..serial.clone()
    };
    let report = run_benchmark(&parallel).unwrap();
    assert!(report.all_checks_passed());
    let eff = lines(&dir.path().join("efficiency.csv"));
    assert!(eff[0].contains("speedup") && eff[0].contains("efficiency"), "{}", eff[0]);
    assert_eq!(eff.len(), 1 + PHASES.len());
    assert_eq!(report.steps.len(), 3);
}

#[test]
fn missing_baseline_leaves_a_note() {
    let dir = tempfile::tempdir().unwrap();
    let config = BenchConfig {
        n: 10,
        out: Some(dir.path().to_path_buf()),
        ..BenchConfig::desk(2, 1)
    };
    let report = run_benchmark(&config).unwrap();
    assert!(report.notes.iter().any(|n| n.contains("baseline")), "{:?}", report.notes);
    let eff = lines(&dir.path().join("efficiency.csv"));
    assert!(!eff[0].contains("speedup"));
}

#[test]
fn empty_report_writes_header_only_files() {
    let dir = tempfile::tempdir().unwrap();
    let report = BenchReport::empty(BenchConfig::desk(2, 1));
    emit_report(&report, dir.path()).unwrap();
    assert_eq!(lines(&dir.path().join("stats.csv")).len(), 1);
    assert_eq!(lines(&dir.path().join("efficiency.csv")).len(), 1);
}

#[test]
fn invalid_configs_are_rejected() {
    for bad in [
        BenchConfig { n: 0, ..BenchConfig::desk(1, 1) },
        BenchConfig { steps: 0, ..BenchConfig::desk(1, 1) },
        BenchConfig { threads: 0, ..BenchConfig::desk(1, 1) },
        BenchConfig { h_min: 1.0, h_max: 0.5, ..BenchConfig::desk(1, 1) },
        BenchConfig { eta: -1.0, ..BenchConfig::desk(1, 1) },
    ] {
        assert!(run_benchmark(&bad).is_err());
    }
}
