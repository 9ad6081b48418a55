//! Independent runs over consecutive seeds. With the `parallel` feature the
//! runs are spread over a rayon pool; results always come back in seed order.

use crate::dsl::Program;
use crate::engine::{run, Trace};
use crate::kernel::State;

/// The seeds `first, first + 1, ...`, wrapping at `u64::MAX`.
pub fn seeds(first: u64, count: usize) -> impl Iterator<Item = u64> + Clone {
    (0..count as u64).map(move |i| first.wrapping_add(i))
}

/// Applies `f` to each seed on the calling thread.
pub fn map_seeds_sequential<T, F>(first: u64, count: usize, f: F) -> Vec<T>
where
    F: Fn(u64) -> T,
{
    seeds(first, count).map(f).collect()
}

/// Applies `f` to each seed, in parallel when the `parallel` feature is on.
#[cfg(feature = "parallel")]
pub fn map_seeds<T, F>(first: u64, count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..count as u64).into_par_iter().map(|i| f(first.wrapping_add(i))).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_seeds<T, F>(first: u64, count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    map_seeds_sequential(first, count, f)
}

pub fn run_batch(scenario: &str, initial: &State, program: &Program, first: u64, count: usize, step_cap: usize) -> Vec<Trace> {
    map_seeds(first, count, |seed| run(scenario, initial, program, seed, step_cap))
}

pub fn run_batch_sequential(
    scenario: &str,
    initial: &State,
    program: &Program,
    first: u64,
    count: usize,
    step_cap: usize,
) -> Vec<Trace> {
    map_seeds_sequential(first, count, |seed| run(scenario, initial, program, seed, step_cap))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_ruleset, default_scenario};

    #[test]
    fn parallel_matches_sequential() {
        let s = default_scenario();
        let p = build_ruleset();
        let init = s.initial_state();
        let a = run_batch("default", &init, &p, 40, 64, 200);
        let b = run_batch_sequential("default", &init, &p, 40, 64, 200);
        assert_eq!(a, b);
        assert!(a.iter().zip(40..).all(|(t, seed)| t.seed == Some(seed)));
    }

    #[test]
    fn seeds_wrap() {
        assert_eq!(seeds(u64::MAX, 2).collect::<Vec<_>>(), [u64::MAX, 0]);
        assert_eq!(map_seeds(3, 0, |s| s), Vec::<u64>::new());
    }
}
