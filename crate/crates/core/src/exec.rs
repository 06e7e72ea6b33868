//! Data-parallel batch execution with a sequential fallback.
//!
//! With the `parallel` feature (on by default) batch work runs on the
//! rayon global pool; without it every path is sequential. Results are
//! identical either way: outputs keep input order.

/// How batch operations should run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Falls back to sequential when built without `parallel`.
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

impl Execution {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }

    /// Maps `f` over `items`, preserving order.
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == Execution::Parallel {
            use rayon::prelude::*;
            return items.par_iter().map(f).collect();
        }
        items.iter().map(f).collect()
    }

    /// Maps then folds with an associative `combine`.
    pub fn map_reduce<T, A, F, C>(self, items: &[T], identity: impl Fn() -> A + Sync + Send, f: F, combine: C) -> A
    where
        T: Sync,
        A: Send,
        F: Fn(&T) -> A + Sync + Send,
        C: Fn(A, A) -> A + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == Execution::Parallel {
            use rayon::prelude::*;
            return items.par_iter().map(f).reduce(&identity, &combine);
        }
        items.iter().map(f).fold(identity(), combine)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_modes_agree() {
        let items: Vec<u64> = (0..1000).collect();
        let seq = Execution::Sequential.map(&items, |x| x * x);
        let par = Execution::Parallel.map(&items, |x| x * x);
        assert_eq!(seq, par);
        let s1 = Execution::Sequential.map_reduce(&items, || 0u64, |x| *x, |a, b| a + b);
        let s2 = Execution::Parallel.map_reduce(&items, || 0u64, |x| *x, |a, b| a + b);
        assert_eq!(s1, 499_500);
        assert_eq!(s1, s2);
    }
}
