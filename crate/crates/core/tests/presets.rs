//! Every listed preset runs at its smallest rung.

use std::time::Instant;

use sorption_fv::experiments::{preset, run_preset, RunOptions, PRESET_NAMES};

#[test]
fn every_preset_runs_at_its_smallest_rung() {
    for name in PRESET_NAMES {
        let p = preset(name).unwrap();
        let started = Instant::now();
        let report = run_preset(
            &p,
            RunOptions {
                parallel: false,
                max_rungs: Some(1),
            },
        )
        .unwrap();
        let secs = started.elapsed().as_secs_f64();
        assert!(secs < 60.0, "{name}: {secs:.1} s");
        for s in &report.studies {
            for o in &s.outcomes {
                if let Err(e) = o {
                    panic!("{name} / {}: {e}", s.label);
                }
            }
            assert!(s.passed(), "{name} / {}: {:?}", s.label, s.checks);
        }
        assert!(!report.profiles.is_empty(), "{name}");
    }
}
