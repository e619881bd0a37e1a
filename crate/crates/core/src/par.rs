//! Data-parallel map with a sequential fallback.
//!
//! With the `parallel` feature (default) work items are distributed over the
//! rayon pool; without it, or under [`Exec::Sequential`], they run in order on
//! the calling thread. Results are always returned in input order so that any
//! subsequent reduction is independent of scheduling.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Execution policy for the outer simulation loops.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    #[default]
    Parallel,
    Sequential,
}

impl Exec {
    /// `true` when work will actually be spread across threads.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }
}

/// Maps `f` over `0..n`, collecting results in index order.
pub fn map_indexed<T, F>(exec: Exec, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if exec == Exec::Parallel {
            return (0..n).into_par_iter().map(f).collect();
        }
    }
    let _ = exec;
    (0..n).map(f).collect()
}

/// Like [`map_indexed`] but short-circuits on the first error (lowest index
/// wins when running sequentially; any failing index when parallel).
pub fn try_map_indexed<T, E, F>(exec: Exec, n: usize, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(usize) -> Result<T, E> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if exec == Exec::Parallel {
            return (0..n).into_par_iter().map(f).collect();
        }
    }
    let _ = exec;
    (0..n).map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let par = map_indexed(Exec::Parallel, 1000, |i| i * i);
        let seq = map_indexed(Exec::Sequential, 1000, |i| i * i);
        assert_eq!(par, seq);
        assert_eq!(par[999], 999 * 999);
    }

    #[test]
    fn errors_propagate() {
        let r: Result<Vec<usize>, String> =
            try_map_indexed(Exec::Sequential, 10, |i| if i == 3 { Err("three".into()) } else { Ok(i) });
        assert_eq!(r.unwrap_err(), "three");
    }
}
