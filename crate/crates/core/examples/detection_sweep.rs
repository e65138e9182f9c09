//! A small Monte-Carlo sweep over the number of users for two designs,
//! written as CSV and JSON next to the system temp directory.
//!
//! Usage: `detection_sweep [trials]`. The full 200-trial sweep takes a while
//! on one core; set `RAYON_NUM_THREADS` to use more.

use zc_prach::experiment::{emit_both, run_experiment, to_csv, DesignSpec, ExperimentSpec, MethodName, SolverOptions};

fn main() -> zc_prach::Result<()> {
    let trials: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(20);
    let spec = ExperimentSpec {
        preset: "lte".into(),
        config: None,
        designs: vec![
            DesignSpec { method: MethodName::CcgSingle, u: 1, n_cs: Some(15), g: Some(50), label: None },
            DesignSpec { method: MethodName::Cra, u: 2, n_cs: Some(11), g: Some(50), label: None },
        ],
        k: vec![2, 4, 6],
        snr_db: vec![10.0],
        trials,
        seed: 2024,
        solver: SolverOptions::default(),
        output: None,
    };
    let rows = run_experiment(&spec)?;
    print!("{}", to_csv(&rows)?);
    for r in &rows {
        println!("# {} K={} mean iterations {:.0}, {:.1} s", r.design, r.k, r.mean_solver_iters, r.wall_time);
    }
    let stem = std::env::temp_dir().join("zc_prach_sweep");
    emit_both(&rows, stem.to_str().expect("utf-8 temp path"))?;
    println!("# wrote {}.csv and .json", stem.display());
    Ok(())
}
