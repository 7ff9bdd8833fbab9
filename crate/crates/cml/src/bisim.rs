//! Rate-bisimilarity on finite kernels by signature refinement, cross-kernel
//! bisimilarity through the disjoint union, and extraction of distinguishing
//! formulas by replaying the splitter that separated two states.

use std::sync::Arc;

use crate::formula::{Formula, Label};
use crate::kernel::{sat, Kernel, Process, StateSet};
use crate::rational::{simplest_in_open, Rat};

/// Disjoint blocks covering all states; the coarsest stable partition equals
/// stochastic bisimilarity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    blocks: Vec<Vec<usize>>,
    block_of: Vec<usize>,
}

impl Partition {
    fn from_block_ids(block_of: Vec<usize>) -> Partition {
        let nblocks = block_of.iter().copied().max().map_or(0, |m| m + 1);
        let mut blocks = vec![Vec::new(); nblocks];
        for (state, &b) in block_of.iter().enumerate() {
            blocks[b].push(state);
        }
        // Renumber by least member for a canonical presentation.
        blocks.sort_by_key(|b| b[0]);
        let mut block_of = block_of;
        for (id, block) in blocks.iter().enumerate() {
            for &s in block {
                block_of[s] = id;
            }
        }
        Partition { blocks, block_of }
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block_of(&self, state: usize) -> usize {
        self.block_of[state]
    }

    pub fn same_block(&self, a: usize, b: usize) -> bool {
        self.block_of[a] == self.block_of[b]
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }
}

struct Refinement {
    partition: Partition,
    /// Splitting rounds performed until stability.
    rounds: usize,
    /// Characteristic formula of each final block over the kernel.
    block_formulas: Vec<Formula>,
    /// For the tracked pair: label, splitter block formula, threshold.
    tracked_splitter: Option<Formula>,
}

/// Signature refinement from the trivial partition. Each round splits blocks
/// whose members disagree on the total rate into some current block under
/// some label; characteristic formulas are maintained alongside, with
/// thresholds placed at the simplest rational between the rates they part.
fn refine(kernel: &Kernel, track: Option<(usize, usize)>) -> Refinement {
    let n = kernel.state_count();
    let labels: Vec<Label> = kernel.labels().iter().cloned().collect();
    let mut block_of = vec![0usize; n];
    let mut chi = vec![Formula::Top];
    let mut rounds = 0usize;
    let mut tracked_splitter = None;

    loop {
        let nblocks = chi.len();
        let mut members: Vec<StateSet> = vec![vec![false; n]; nblocks];
        for (state, &b) in block_of.iter().enumerate() {
            members[b][state] = true;
        }
        // Signature of a state: the rate into every current block, per label.
        let signature = |m: usize| -> Vec<Rat> {
            labels
                .iter()
                .flat_map(|a| {
                    members
                        .iter()
                        .map(move |block| kernel.theta(a, m, block).expect("declared label"))
                })
                .collect()
        };
        let sigs: Vec<Vec<Rat>> = (0..n).map(signature).collect();

        let mut new_block_of = vec![usize::MAX; n];
        let mut new_chi: Vec<Formula> = Vec::new();
        let mut changed = false;
        for b in 0..nblocks {
            // Group the block's members by signature, in state order.
            let mut groups: Vec<(usize, Vec<usize>)> = Vec::new(); // (representative, members)
            for state in 0..n {
                if block_of[state] != b {
                    continue;
                }
                match groups.iter_mut().find(|(rep, _)| sigs[*rep] == sigs[state]) {
                    Some((_, g)) => g.push(state),
                    None => groups.push((state, vec![state])),
                }
            }
            if groups.len() > 1 {
                changed = true;
            }
            for (gi, (rep, group)) in groups.iter().enumerate() {
                let id = new_chi.len();
                for &s in group {
                    new_block_of[s] = id;
                }
                let mut f = chi[b].clone();
                for (hi, (other_rep, _)) in groups.iter().enumerate() {
                    if hi == gi {
                        continue;
                    }
                    f = f.and(separating_literal(
                        &sigs[*rep],
                        &sigs[*other_rep],
                        &labels,
                        &chi,
                    ));
                }
                new_chi.push(f);
            }
        }

        if let (Some((s1, s2)), None) = (track, &tracked_splitter) {
            if block_of[s1] == block_of[s2] && new_block_of[s1] != new_block_of[s2] {
                tracked_splitter = Some(splitter_formula(&sigs[s1], &sigs[s2], &labels, &chi));
            }
        }

        if !changed {
            return Refinement {
                partition: Partition::from_block_ids(block_of),
                rounds,
                block_formulas: chi,
                tracked_splitter,
            };
        }
        rounds += 1;
        block_of = new_block_of;
        chi = new_chi;
    }
}

/// A literal true at signature `sig` and false at `other`: a lower-bound
/// formula on the first coordinate where the two differ, thresholded at the
/// simplest rational strictly between the two rates.
fn separating_literal(
    sig: &[Rat],
    other: &[Rat],
    labels: &[Label],
    chi: &[Formula],
) -> Formula {
    let coord = (0..sig.len())
        .find(|&c| sig[c] != other[c])
        .expect("distinct signatures differ somewhere");
    let nblocks = chi.len();
    let label = &labels[coord / nblocks];
    let block = coord % nblocks;
    let (lo, hi) = if sig[coord] < other[coord] {
        (&sig[coord], &other[coord])
    } else {
        (&other[coord], &sig[coord])
    };
    let r = simplest_in_open(lo, hi);
    let lit = Formula::l(label.clone(), r, chi[block].clone());
    if sig[coord] > other[coord] {
        lit
    } else {
        lit.neg()
    }
}

/// The positive splitter distinguishing two signatures: `L[a,r] chi_C` where
/// the rates into `C` differ and `r` is the simplest rational between them.
fn splitter_formula(sig1: &[Rat], sig2: &[Rat], labels: &[Label], chi: &[Formula]) -> Formula {
    let positive = separating_literal(sig1, sig2, labels, chi);
    match positive {
        Formula::Neg(inner) => (*inner).clone(),
        other => other,
    }
}

/// The stochastic-bisimilarity classes of a kernel: the coarsest partition in
/// which states of a block agree on the rate into every block, per label.
pub fn bisim_classes(kernel: &Kernel) -> Partition {
    refine(kernel, None).partition
}

/// Classes plus the number of splitting rounds used to reach stability.
pub fn bisim_classes_with_rounds(kernel: &Kernel) -> (Partition, usize) {
    let r = refine(kernel, None);
    (r.partition, r.rounds)
}

fn union_indices(p1: &Process, p2: &Process) -> (Kernel, usize, usize) {
    let union = p1.kernel.disjoint_union(&p2.kernel);
    let s1 = union
        .state_index(&format!("0:{}", p1.state_id()))
        .expect("tagged state exists");
    let s2 = union
        .state_index(&format!("1:{}", p2.state_id()))
        .expect("tagged state exists");
    (union, s1, s2)
}

/// Two processes are bisimilar iff their tagged states share a class in the
/// disjoint union of their kernels.
pub fn bisimilar(p1: &Process, p2: &Process) -> bool {
    let (union, s1, s2) = union_indices(p1, p2);
    bisim_classes(&union).same_block(s1, s2)
}

/// `None` for bisimilar processes; otherwise a formula satisfied by exactly
/// one of the two, found by replaying the splitter that first separated them.
pub fn distinguishing_formula(p1: &Process, p2: &Process) -> Option<Formula> {
    let (union, s1, s2) = union_indices(p1, p2);
    let refinement = refine(&union, Some((s1, s2)));
    if refinement.partition.same_block(s1, s2) {
        return None;
    }
    let phi = refinement
        .tracked_splitter
        .expect("separated states have a recorded splitter");
    let union = Arc::new(union);
    debug_assert_ne!(
        sat(&Process::from_index(union.clone(), s1), &phi).ok(),
        sat(&Process::from_index(union, s2), &phi).ok()
    );
    Some(phi)
}

/// Characteristic formulas of the bisimilarity classes: state `m` satisfies
/// the formula of block `i` iff `m` lies in block `i`.
pub fn class_formulas(kernel: &Kernel) -> (Partition, Vec<Formula>) {
    let r = refine(kernel, None);
    (r.partition, r.block_formulas)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::Kernel;
    use crate::parse::parse;

    fn a() -> Label {
        Label::new("a")
    }

    fn k1() -> Kernel {
        Kernel::from_parts(
            vec!["s0".into(), "s1".into()],
            vec![a()],
            vec![(a(), "s0".into(), "s1".into(), Rat::new(3, 2))],
        )
        .unwrap()
    }

    /// Two self-looping states at equal rate collapse into one class.
    #[test]
    fn identical_loops_share_a_block() {
        let k = Kernel::from_parts(
            vec!["x".into(), "y".into()],
            vec![a()],
            vec![
                (a(), "x".into(), "x".into(), Rat::one()),
                (a(), "y".into(), "y".into(), Rat::one()),
            ],
        )
        .unwrap();
        let p = bisim_classes(&k);
        assert_eq!(p.len(), 1);
    }

    #[test]
    fn distinct_total_rates_split() {
        let p = bisim_classes(&k1());
        assert_eq!(p.len(), 2);
        assert!(!p.same_block(0, 1));
    }

    #[test]
    fn single_state_is_one_block() {
        let k = Kernel::from_parts(vec!["s".into()], vec![a()], vec![]).unwrap();
        assert_eq!(bisim_classes(&k).len(), 1);
    }

    #[test]
    fn bisimilar_is_reflexive_and_rate_sensitive() {
        let k = Arc::new(k1());
        let p0 = Process::from_index(k.clone(), 0);
        let p1 = Process::from_index(k.clone(), 1);
        assert!(bisimilar(&p0, &p0.clone()));
        assert!(!bisimilar(&p0, &p1));
    }

    #[test]
    fn two_chains_with_different_rates_are_not_bisimilar() {
        let chain = |rate: Rat| {
            Arc::new(
                Kernel::from_parts(
                    vec!["u0".into(), "u1".into()],
                    vec![a()],
                    vec![(a(), "u0".into(), "u1".into(), rate)],
                )
                .unwrap(),
            )
        };
        let p = Process::from_index(chain(Rat::new(1, 2)), 0);
        let q = Process::from_index(chain(Rat::new(1, 3)), 0);
        assert!(!bisimilar(&p, &q));
        assert!(bisimilar(
            &Process::from_index(p.kernel.clone(), 1),
            &Process::from_index(q.kernel.clone(), 1)
        ));
    }

    #[test]
    fn distinguishing_formula_none_iff_bisimilar() {
        let k = Arc::new(k1());
        let p0 = Process::from_index(k.clone(), 0);
        assert!(distinguishing_formula(&p0, &p0.clone()).is_none());
    }

    #[test]
    fn distinguishing_formula_for_k1_pair() {
        let k = Arc::new(k1());
        let p0 = Process::from_index(k.clone(), 0);
        let p1 = Process::from_index(k.clone(), 1);
        let phi = distinguishing_formula(&p0, &p1).unwrap();
        // Rates 3/2 vs 0: the simplest threshold in (0, 3/2) is 1.
        assert_eq!(phi, parse("L[a,1] T").unwrap());
        assert_ne!(sat(&p0, &phi).unwrap(), sat(&p1, &phi).unwrap());
    }

    #[test]
    fn refinement_round_bound() {
        // A 4-state chain splits once per round; rounds stay below the state
        // count.
        let k = Kernel::from_parts(
            vec!["c0".into(), "c1".into(), "c2".into(), "c3".into()],
            vec![a()],
            vec![
                (a(), "c0".into(), "c1".into(), Rat::one()),
                (a(), "c1".into(), "c2".into(), Rat::one()),
                (a(), "c2".into(), "c3".into(), Rat::one()),
            ],
        )
        .unwrap();
        let (p, rounds) = bisim_classes_with_rounds(&k);
        assert_eq!(p.len(), 4);
        assert!(rounds <= 3);
    }

    #[test]
    fn class_formulas_characterize_blocks() {
        let k = Kernel::from_parts(
            vec!["s0".into(), "s1".into(), "s2".into()],
            vec![a()],
            vec![
                (a(), "s0".into(), "s1".into(), Rat::one()),
                (a(), "s1".into(), "s2".into(), Rat::new(1, 2)),
            ],
        )
        .unwrap();
        let (partition, formulas) = class_formulas(&k);
        for (i, phi) in formulas.iter().enumerate() {
            let den = k.denotation(phi).unwrap();
            for state in 0..k.state_count() {
                assert_eq!(den[state], partition.block_of(state) == i);
            }
        }
    }
}
