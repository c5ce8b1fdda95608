//! Worker-count control for the rayon-parallel stages.

use rayon::ThreadPoolBuilder;

/// Run `f` on a dedicated pool of `workers` threads. Zero means "one per core".
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T, rayon::ThreadPoolBuildError> {
    let pool = ThreadPoolBuilder::new().num_threads(workers).build()?;
    Ok(pool.install(f))
}
