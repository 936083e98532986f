//! Independent experiments fanned out over a worker pool.
//!
//! With the `parallel` feature (default) work runs on a rayon pool, bounded
//! by `jobs` when given. Without it, or with `jobs = Some(1)`, items run in
//! order on the calling thread. Results are always returned in input order
//! and each run is deterministic, so both paths produce identical output.

use crate::error::Result;
use crate::sim::{run_experiment, Experiment, RunOutput};

pub fn map_sequential<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    items.iter().map(f).collect()
}

#[cfg(feature = "parallel")]
pub fn map_parallel<T, R, F>(items: &[T], jobs: Option<usize>, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    use rayon::prelude::*;
    match jobs {
        None => items.par_iter().map(f).collect(),
        Some(j) => match rayon::ThreadPoolBuilder::new().num_threads(j).build() {
            Ok(pool) => pool.install(|| items.par_iter().map(&f).collect()),
            // thread spawn failed; fall back rather than fail the sweep
            Err(_) => map_sequential(items, f),
        },
    }
}

/// `jobs`: worker count, `None` for one per core.
pub fn map_jobs<T, R, F>(items: &[T], jobs: Option<usize>, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    if jobs == Some(1) || items.len() < 2 {
        return map_sequential(items, f);
    }
    #[cfg(feature = "parallel")]
    {
        map_parallel(items, jobs, f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_sequential(items, f)
    }
}

pub fn simulate_sequential(experiments: &[Experiment]) -> Vec<Result<RunOutput>> {
    map_sequential(experiments, run_experiment)
}

#[cfg(feature = "parallel")]
pub fn simulate_parallel(
    experiments: &[Experiment],
    jobs: Option<usize>,
) -> Vec<Result<RunOutput>> {
    map_parallel(experiments, jobs, run_experiment)
}

pub fn simulate_all(experiments: &[Experiment], jobs: Option<usize>) -> Vec<Result<RunOutput>> {
    map_jobs(experiments, jobs, run_experiment)
}
