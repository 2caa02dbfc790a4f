//! Thread-count control shared by every module that fans work out.
//!
//! `FLOWSIEVE_THREADS` caps internal parallelism; `0` or `1` means serial.
//! Work distributed through [`map_range`] is always collected in index order,
//! so results are identical whatever the thread count.

use std::cell::Cell;
use std::sync::OnceLock;

use rayon::prelude::*;

pub const THREADS_ENV: &str = "FLOWSIEVE_THREADS";

static THREADS: OnceLock<usize> = OnceLock::new();

thread_local! {
    static FORCE_SERIAL: Cell<bool> = const { Cell::new(false) };
}

/// Fixes the thread budget for the process. Only the first call has any
/// effect; later calls return the value already in force.
pub fn configure(threads: usize) -> usize {
    let n = *THREADS.get_or_init(|| threads);
    if n > 1 {
        // Fails harmlessly when the global pool already exists.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    n
}

/// Current thread budget: the configured value, else `FLOWSIEVE_THREADS`,
/// else rayon's default.
pub fn threads() -> usize {
    *THREADS.get_or_init(|| {
        std::env::var(THREADS_ENV)
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .unwrap_or_else(rayon::current_num_threads)
    })
}

pub fn is_serial() -> bool {
    FORCE_SERIAL.with(|f| f.get()) || threads() <= 1
}

/// Runs `f` with all fan-out on this thread disabled. Used around timed fits.
pub fn serial_scope<T>(f: impl FnOnce() -> T) -> T {
    let prev = FORCE_SERIAL.with(|s| s.replace(true));
    let out = f();
    FORCE_SERIAL.with(|s| s.set(prev));
    out
}

/// `(0..n).map(f)`, possibly spread over the rayon pool, collected in order.
pub fn map_range<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    if is_serial() {
        (0..n).map(f).collect()
    } else {
        (0..n).into_par_iter().map(f).collect()
    }
}
