use std::collections::{BTreeMap, HashSet};

use thiserror::Error;

use crate::engine::{applicable_instances, apply};
use crate::kernel::{State, Symbol};

use super::ast::Program;

pub const MAX_REACH_DEPTH: usize = 12;
pub const DEFAULT_STATE_CAP: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReachError {
    #[error("depth {0} exceeds the maximum of {MAX_REACH_DEPTH}")]
    DepthTooLarge(usize),
    #[error("explored more than {0} states")]
    BudgetExceeded(usize),
}

/// For each rule, whether some firing sequence of at most `depth` steps from
/// `init` fires it. Exhaustive breadth-first search over distinct states.
///
/// A rule counts as reachable at depth `d` when it is applicable in a state
/// reached by fewer than `d` firings, so depth 0 marks nothing.
pub fn check_reachability(
    program: &Program,
    init: &State,
    depth: usize,
    state_cap: usize,
) -> Result<BTreeMap<Symbol, bool>, ReachError> {
    if depth > MAX_REACH_DEPTH {
        return Err(ReachError::DepthTooLarge(depth));
    }
    let mut reachable: BTreeMap<Symbol, bool> = program.rules().iter().map(|r| (r.name, false)).collect();
    let mut seen: HashSet<State> = HashSet::new();
    seen.insert(init.clone());
    let mut frontier = vec![init.clone()];
    for level in 0..depth {
        let mut next = Vec::new();
        for state in &frontier {
            for inst in applicable_instances(state, program) {
                reachable.insert(inst.rule.name, true);
                if level + 1 == depth {
                    continue;
                }
                let (succ, _, _) = apply(state, &inst);
                if seen.insert(succ.clone()) {
                    if seen.len() > state_cap {
                        return Err(ReachError::BudgetExceeded(state_cap));
                    }
                    next.push(succ);
                }
            }
        }
        frontier = next;
        if frontier.is_empty() {
            break;
        }
    }
    Ok(reachable)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{parse_atom, parse_program};

    fn chain() -> (Program, State) {
        let p = parse_program(
            "rule one: a -o b.\n\
             rule two: b -o c.\n\
             rule three: c -o d.\n\
             rule never: ghost -o a.",
        )
        .unwrap();
        (p, [parse_atom("a").unwrap()].into_iter().collect())
    }

    #[test]
    fn depth_zero_marks_nothing() {
        let (p, init) = chain();
        let r = check_reachability(&p, &init, 0, DEFAULT_STATE_CAP).unwrap();
        assert!(r.values().all(|v| !v));
    }

    #[test]
    fn depth_grows_the_reachable_set() {
        let (p, init) = chain();
        let at = |d| check_reachability(&p, &init, d, DEFAULT_STATE_CAP).unwrap();
        let count = |m: BTreeMap<Symbol, bool>| m.values().filter(|v| **v).count();
        assert_eq!(count(at(1)), 1);
        assert_eq!(count(at(2)), 2);
        assert_eq!(count(at(3)), 3);
        assert!(!at(12)[&Symbol::new("never")]);
    }

    #[test]
    fn limits() {
        let (p, init) = chain();
        assert_eq!(check_reachability(&p, &init, 13, DEFAULT_STATE_CAP), Err(ReachError::DepthTooLarge(13)));
        let wide = parse_program("rule grow: t -o t * t.").unwrap();
        let init: State = [parse_atom("t").unwrap()].into_iter().collect();
        assert_eq!(check_reachability(&wide, &init, 12, 5), Err(ReachError::BudgetExceeded(5)));
    }
}
