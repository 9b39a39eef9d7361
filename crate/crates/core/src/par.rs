//! Data-parallel map with a sequential fallback.
//!
//! Results are always collected in input order, so parallel and sequential
//! runs produce identical outputs.

/// How independent work items are scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Parallel,
    Sequential,
}

/// Ordered map over `items`. `Mode::Parallel` degrades to sequential when the
/// `parallel` feature is disabled.
pub fn map<T, U, F>(mode: Mode, items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    match mode {
        #[cfg(feature = "parallel")]
        Mode::Parallel => {
            use rayon::prelude::*;
            items.par_iter().map(f).collect()
        }
        _ => items.iter().map(f).collect(),
    }
}

/// Runs `f` inside a pool limited to `workers` threads (no-op without the
/// `parallel` feature).
pub fn with_workers<R: Send>(workers: usize, f: impl FnOnce() -> R + Send) -> R {
    #[cfg(feature = "parallel")]
    {
        match rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = workers;
        f()
    }
}

pub fn parallel_enabled() -> bool {
    cfg!(feature = "parallel")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree_and_keep_order() {
        let items: Vec<u64> = (0..200).collect();
        let f = |x: &u64| (*x as f64).sqrt().sin();
        let a = map(Mode::Parallel, &items, f);
        let b = map(Mode::Sequential, &items, f);
        assert_eq!(a, b);
        assert_eq!(with_workers(2, || map(Mode::Parallel, &items, f)), b);
    }
}
