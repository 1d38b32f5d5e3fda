//! Data-parallelism control.
//!
//! `WARP_HARMONIC_THREADS` caps per-face parallelism: unset or 1 means
//! sequential, 0 means let rayon pick, n means a pool of n threads.
//! Per-face work is written into index-ordered buffers and reduced in a fixed
//! sequential order, so results are bit-identical across thread counts.

use rayon::prelude::*;
use std::sync::OnceLock;

static THREAD_CAP: OnceLock<usize> = OnceLock::new();

/// Effective thread cap (1 = sequential).
pub fn thread_cap() -> usize {
    *THREAD_CAP.get_or_init(|| {
        let var = std::env::var("WARP_HARMONIC_THREADS").ok();
        match var.and_then(|s| s.trim().parse::<usize>().ok()) {
            None | Some(1) => 1,
            Some(0) => {
                // rayon default pool
                rayon::current_num_threads().max(1)
            }
            Some(n) => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
                n
            }
        }
    })
}

/// Map `f` over `0..n` into an index-ordered Vec, in parallel when enabled.
pub fn map_indexed<T: Send, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T + Sync + Send,
{
    if thread_cap() == 1 || n < 1024 {
        (0..n).map(f).collect()
    } else {
        (0..n).into_par_iter().map(f).collect()
    }
}
