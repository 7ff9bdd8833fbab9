//! Independent oracles for the integration suites: brute-force bisimulation
//! search over all equivalence relations, and satisfiability by exhaustive
//! kernel search. These deliberately share no code with the implementation
//! paths they check.

use std::sync::Arc;

use cml::formula::{Formula, Label};
use cml::kernel::{sat, Kernel, Process};
use cml::rational::Rat;

/// All set partitions of `n` elements as restricted-growth strings:
/// `out[i]` is the block id of element `i`.
pub fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = vec![0usize; n];
    fn go(i: usize, max_used: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == current.len() {
            out.push(current.clone());
            return;
        }
        for b in 0..=max_used + 1 {
            current[i] = b;
            go(i + 1, max_used.max(b), current, out);
        }
    }
    if n == 0 {
        return vec![vec![]];
    }
    current[0] = 0;
    go(1, 0, &mut current, &mut out);
    out
}

/// Stability of an equivalence relation given as block ids: related states
/// must agree on the total rate into every block, for every label.
pub fn is_rate_bisimulation(kernel: &Kernel, block_of: &[usize]) -> bool {
    let n = kernel.state_count();
    let nblocks = block_of.iter().copied().max().map_or(0, |m| m + 1);
    let blocks: Vec<Vec<bool>> = (0..nblocks)
        .map(|b| (0..n).map(|s| block_of[s] == b).collect())
        .collect();
    for label in kernel.labels().clone() {
        for m in 0..n {
            for other in m + 1..n {
                if block_of[m] != block_of[other] {
                    continue;
                }
                for block in &blocks {
                    let rm = kernel.theta(&label, m, block).unwrap();
                    let ro = kernel.theta(&label, other, block).unwrap();
                    if rm != ro {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// The largest rate-bisimulation by brute force: the union of all stable
/// equivalence relations, verified to be an equivalence and stable itself.
/// Returns canonical block ids (first-occurrence numbering).
pub fn brute_force_bisim(kernel: &Kernel) -> Vec<usize> {
    let n = kernel.state_count();
    let mut related = vec![vec![false; n]; n];
    for block_of in set_partitions(n) {
        if !is_rate_bisimulation(kernel, &block_of) {
            continue;
        }
        for i in 0..n {
            for j in 0..n {
                if block_of[i] == block_of[j] {
                    related[i][j] = true;
                }
            }
        }
    }
    // The union of rate-bisimulations must again be one; these asserts would
    // catch a failure of that closure property.
    for i in 0..n {
        assert!(related[i][i]);
        for j in 0..n {
            assert_eq!(related[i][j], related[j][i]);
            for k in 0..n {
                if related[i][j] && related[j][k] {
                    assert!(related[i][k], "union of bisimulations not transitive");
                }
            }
        }
    }
    let mut block_of = vec![usize::MAX; n];
    let mut next = 0;
    for i in 0..n {
        if block_of[i] != usize::MAX {
            continue;
        }
        block_of[i] = next;
        for j in i + 1..n {
            if related[i][j] {
                block_of[j] = next;
            }
        }
        next += 1;
    }
    assert!(is_rate_bisimulation(kernel, &block_of));
    block_of
}

/// Canonicalize block ids for comparison across algorithms.
pub fn canonical_blocks(block_of: &[usize]) -> Vec<usize> {
    let mut map = std::collections::HashMap::new();
    let mut next = 0usize;
    block_of
        .iter()
        .map(|b| {
            *map.entry(*b).or_insert_with(|| {
                let id = next;
                next += 1;
                id
            })
        })
        .collect()
}

/// Build the kernel with `n` states over `labels` whose rate entries are
/// drawn from `rates` according to the digit string `digits` (one digit per
/// (label, from, to), zero meaning no transition).
pub fn kernel_from_digits(
    n: usize,
    labels: &[Label],
    rates: &[Rat],
    digits: &[usize],
) -> Kernel {
    let states: Vec<String> = (0..n).map(|i| format!("s{}", i)).collect();
    let mut entries = Vec::new();
    let mut d = 0;
    for label in labels {
        for i in 0..n {
            for j in 0..n {
                let rate = rates[digits[d]].clone();
                d += 1;
                if !rate.is_zero() {
                    entries.push((label.clone(), states[i].clone(), states[j].clone(), rate));
                }
            }
        }
    }
    Kernel::from_parts(states, labels.to_vec(), entries).unwrap()
}

pub fn decode_digits(mut index: usize, positions: usize, base: usize) -> Vec<usize> {
    let mut digits = vec![0usize; positions];
    for d in digits.iter_mut() {
        *d = index % base;
        index /= base;
    }
    digits
}

/// Satisfiability by exhaustive kernel search: every kernel with one or two
/// states and rates on the quarter-integer grid up to 2, then every 3-state
/// kernel on the half-integer grid if nothing smaller worked.
pub fn oracle_satisfiable(phi: &Formula, labels: &[Label]) -> bool {
    use rayon::prelude::*;
    let fine: Vec<Rat> = (0..=8).map(|k| Rat::new(k, 4)).collect();
    let coarse: Vec<Rat> = (0..=4).map(|k| Rat::new(k, 2)).collect();
    let stages: [(usize, &[Rat]); 3] = [(1, &fine), (2, &fine), (3, &coarse)];
    for (n, rates) in stages {
        let positions = labels.len() * n * n;
        let total = rates.len().pow(positions as u32);
        let found = (0..total).into_par_iter().any(|idx| {
            let digits = decode_digits(idx, positions, rates.len());
            let kernel = Arc::new(kernel_from_digits(n, labels, rates, &digits));
            (0..n).any(|s| {
                sat(&Process::from_index(kernel.clone(), s), phi).expect("labels declared")
            })
        });
        if found {
            return true;
        }
    }
    false
}

/// Structural-recursion reference for the formula measures, written as the
/// obvious four independent recursions rather than one shared pass.
pub mod naive_measures {
    use cml::formula::{Formula, Label};
    use cml::rational::Rat;
    use num::BigUint;
    use std::collections::BTreeSet;

    pub fn granularity(phi: &Formula) -> BigUint {
        use num::Integer;
        match phi {
            Formula::Top => BigUint::from(1u32),
            Formula::Neg(p) => granularity(p),
            Formula::And(p, q) => granularity(p).lcm(&granularity(q)),
            Formula::L(_, r, p) | Formula::M(_, r, p) => {
                r.denom_uint().lcm(&granularity(p))
            }
        }
    }

    pub fn max_index(phi: &Formula) -> Rat {
        match phi {
            Formula::Top => Rat::zero(),
            Formula::Neg(p) => max_index(p),
            Formula::And(p, q) => max_index(p).max(max_index(q)),
            Formula::L(_, r, p) | Formula::M(_, r, p) => r.clone().max(max_index(p)),
        }
    }

    pub fn modal_depth(phi: &Formula) -> u32 {
        match phi {
            Formula::Top => 0,
            Formula::Neg(p) => modal_depth(p),
            Formula::And(p, q) => modal_depth(p).max(modal_depth(q)),
            Formula::L(_, _, p) | Formula::M(_, _, p) => modal_depth(p) + 1,
        }
    }

    pub fn actions(phi: &Formula) -> BTreeSet<Label> {
        match phi {
            Formula::Top => BTreeSet::new(),
            Formula::Neg(p) => actions(p),
            Formula::And(p, q) => {
                let mut s = actions(p);
                s.extend(actions(q));
                s
            }
            Formula::L(a, _, p) | Formula::M(a, _, p) => {
                let mut s = actions(p);
                s.insert(a.clone());
                s
            }
        }
    }
}
