//! Small shared utilities: a deterministic RNG for sampling-based
//! diagnostics and the capped thread pool used by the FFT row passes.

use std::sync::OnceLock;

/// SplitMix64: tiny, fast, reproducible. Used wherever the crate needs
/// deterministic pseudo-random sampling (pair selection, test fields), so
/// results never depend on platform RNG state.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi)`.
    pub fn in_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }
}

/// Number of worker threads for the FFT row passes. `BELTRAMI_THREADS` caps
/// it; unset or unparsable falls back to the machine's parallelism. Values
/// below 2 select the serial path.
pub fn thread_cap() -> usize {
    static CAP: OnceLock<usize> = OnceLock::new();
    *CAP.get_or_init(|| {
        let hw = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
        match std::env::var("BELTRAMI_THREADS") {
            Ok(s) => s.trim().parse::<usize>().map(|v| v.clamp(1, 256)).unwrap_or(hw),
            Err(_) => hw,
        }
    })
}

/// Shared rayon pool sized by [`thread_cap`]; `None` when running serial.
pub fn fft_pool() -> Option<&'static rayon::ThreadPool> {
    static POOL: OnceLock<Option<rayon::ThreadPool>> = OnceLock::new();
    POOL.get_or_init(|| {
        let cap = thread_cap();
        if cap < 2 {
            return None;
        }
        rayon::ThreadPoolBuilder::new().num_threads(cap).build().ok()
    })
    .as_ref()
}
