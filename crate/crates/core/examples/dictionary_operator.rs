//! The PRACH dictionary: explicit matrix, FFT-based operator and binary export.

use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zc_prach::config::SystemConfig;
use zc_prach::design::design_ccg_single;
use zc_prach::dictionary::{read_binary, Dictionary};
use zc_prach::linalg::{norm, LinearOperator};

fn main() -> zc_prach::Result<()> {
    let cfg = SystemConfig::lte();
    let design = design_ccg_single(1, 11, &cfg)?;
    let dict = Dictionary::new(&design.code_matrix, &cfg)?;
    println!("A is {} x {} ({} blocks of {} columns)", dict.m(), dict.width(), dict.g(), dict.n1());

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let x: Vec<Complex64> = (0..dict.width()).map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect();
    let mut fast = vec![Complex64::new(0.0, 0.0); dict.m()];
    let mut dense = fast.clone();

    let t = Instant::now();
    dict.apply(&x, &mut fast);
    let t_fast = t.elapsed();
    let t = Instant::now();
    dict.apply_dense(&x, &mut dense);
    let t_dense = t.elapsed();
    let diff: Vec<Complex64> = fast.iter().zip(&dense).map(|(a, b)| a - b).collect();
    println!("A x: fast {t_fast:?}, dense {t_dense:?}, relative difference {:.2e}", norm(&diff) / norm(&dense));

    let col = dict.block_column(3, 10);
    println!("column norm {:.4} (sqrt(M) = {:.4})", norm(col), (cfg.m as f64).sqrt());

    let path = std::env::temp_dir().join("zc_prach_dictionary.bin");
    dict.write_binary(&path)?;
    let (header, back) = read_binary(&path)?;
    println!("wrote {} with header {:?}; round trip exact: {}", path.display(), header, back == *dict.dense());
    Ok(())
}
