//! Acceptance suite: one test per criterion, each printing a pass line.
//! Criterion 2 (countermodel verification through the command-line checker)
//! lives in the CLI crate's acceptance suite.

mod support;

use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;

use cml::axioms::{soundness_campaign, SchemaId};
use cml::bisim::{bisim_classes, bisimilar, distinguishing_formula};
use cml::formula::{measures, ClosureSpec, Formula, Label};
use cml::grid::{enumerate_family, Caps};
use cml::kernel::{sat, Process};
use cml::metrics::{
    check_strong_robustness, check_weak_robustness_with, dsat, fdist, pdist, sd_hat_over,
    synthesize_for,
};
use cml::parse::parse;
use cml::random::{rng_for_sample, FormulaGen, KernelGen};
use cml::rational::Rat;
use cml::sat::{satisfiable_with, SatOutcome};
use cml::Exec;

use rand::Rng;

use support::{
    brute_force_bisim, canonical_blocks, decode_digits, kernel_from_digits, oracle_satisfiable,
};

fn lab(s: &str) -> Label {
    Label::new(s)
}

/// Criterion 1: zero violations over 10^4 samples per sound schema, within
/// a minute.
#[test]
fn criterion_1_axiom_soundness() {
    let start = Instant::now();
    let report = soundness_campaign(&SchemaId::SOUND, 10_000, 20_260_809, Exec::Parallel);
    let elapsed = start.elapsed();
    assert_eq!(report.schemas.len(), 18);
    for schema in &report.schemas {
        assert_eq!(
            schema.violations, 0,
            "schema {} violated: {:?}",
            schema.schema, schema.witnesses
        );
        assert!(schema.scored > 0, "schema {} never scored", schema.schema);
    }
    assert!(
        elapsed.as_secs() <= 60,
        "campaign took {:?}, over the 60 s budget",
        elapsed
    );
    println!(
        "[PASS] criterion 1: 18 schemas x 10^4 samples, 0 violations in {:?}",
        elapsed
    );
}

/// Criterion 3: partition refinement matches the brute-force largest
/// rate-bisimulation on the exhaustive small grid and on 500 random 4-state
/// kernels, within two minutes.
#[test]
fn criterion_3_bisimulation_oracle_equivalence() {
    let start = Instant::now();
    let labels = [lab("a")];
    let rates: Vec<Rat> = vec![Rat::zero(), Rat::new(1, 2), Rat::one()];

    let mut exhaustive_checked = 0usize;
    for n in 1..=3usize {
        let positions = labels.len() * n * n;
        let total = rates.len().pow(positions as u32);
        let mismatches: usize = (0..total)
            .into_par_iter()
            .map(|idx| {
                let digits = decode_digits(idx, positions, rates.len());
                let kernel = kernel_from_digits(n, &labels, &rates, &digits);
                let refined: Vec<usize> = (0..n)
                    .map(|s| bisim_classes(&kernel).block_of(s))
                    .collect();
                let oracle = brute_force_bisim(&kernel);
                usize::from(canonical_blocks(&refined) != canonical_blocks(&oracle))
            })
            .sum();
        assert_eq!(mismatches, 0, "mismatch among {}-state kernels", n);
        exhaustive_checked += total;
    }

    let gen = KernelGen {
        max_states: 4,
        labels: vec![lab("a"), lab("b")],
        max_denominator: 2,
        density: 0.5,
    };
    let mismatches: usize = (0..500usize)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_for_sample(3, 300, i as u64);
            let mut kernel = gen.sample(&mut rng);
            // Force exactly 4 states by resampling.
            while kernel.state_count() != 4 {
                kernel = gen.sample(&mut rng);
            }
            let refined: Vec<usize> = (0..4)
                .map(|s| bisim_classes(&kernel).block_of(s))
                .collect();
            let oracle = brute_force_bisim(&kernel);
            usize::from(canonical_blocks(&refined) != canonical_blocks(&oracle))
        })
        .sum();
    assert_eq!(mismatches, 0, "mismatch among random 4-state kernels");

    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs() <= 120,
        "oracle comparison took {:?}",
        elapsed
    );
    println!(
        "[PASS] criterion 3: {} exhaustive + 500 random kernels, identical partitions in {:?}",
        exhaustive_checked, elapsed
    );
}

/// Criterion 4: bisimilarity coincides with zero process distance over the
/// depth-3 family extended with the distinguishing formula, on 200 random
/// kernel pairs.
#[test]
fn criterion_4_logical_characterization() {
    let labels = vec![lab("a"), lab("b")];
    let spec = ClosureSpec::new(2, Rat::from_int(2), 3, labels.clone());
    let (family, _) = enumerate_family(3, &spec, false, 1500);
    let gen = KernelGen {
        max_states: 4,
        labels,
        max_denominator: 4,
        density: 0.45,
    };
    let failures: usize = (0..200usize)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_for_sample(9, 400, i as u64);
            let k1 = Arc::new(gen.sample(&mut rng));
            let p1 = Process::from_index(k1.clone(), rng.gen_range(0..k1.state_count()));
            let p2 = if i % 2 == 0 {
                // A structurally distinct but bisimilar process: the tagged
                // copy inside the disjoint union with a fresh random kernel.
                let other = gen.sample(&mut rng);
                let union = Arc::new(k1.disjoint_union(&other));
                Process::new(union, &format!("0:{}", p1.state_id())).unwrap()
            } else {
                let k2 = Arc::new(gen.sample(&mut rng));
                Process::from_index(k2.clone(), rng.gen_range(0..k2.state_count()))
            };
            let equivalent = bisimilar(&p1, &p2);
            let mut extended = family.clone();
            if let Some(phi) = distinguishing_formula(&p1, &p2) {
                extended.push(phi);
            }
            let report = pdist(&p1, &p2, &extended, false, Exec::Sequential).unwrap();
            let zero = report.value.is_zero();
            usize::from(zero != equivalent)
        })
        .sum();
    assert_eq!(failures, 0);
    println!("[PASS] criterion 4: 200 pairs, bisimilar <=> pdist = 0 over the extended family");
}

/// Criterion 5: the Truth Lemma holds on the synthesized model of every
/// fixture formula, re-verified here from the public API: membership in the
/// atom's valuation coincides with exact satisfaction at the atom's state,
/// for every carried grid formula and operand class.
#[test]
fn criterion_5_truth_lemma() {
    let fixtures = [
        "L[a,1] T",
        "L[a,1/2] T",
        "L[a,1/4] T",
        "L[a,3/4] T & ~L[a,5/4] T",
        "M[a,1] T",
        "M[a,1/2] T & L[a,1/4] T",
        "E[a,1] T",
        "E[a,3/4] T",
        "L[a,1] T & L[b,1/2] T",
        "E[a,1] T & M[b,1] T",
        "~L[a,1] T",
        "~M[a,1/2] T",
        "L[a,2] T",
        "L[a,1] T | L[b,1] T",
        "L[a,1] T -> L[a,2] T",
        "~(L[a,1] T & M[a,1] T)",
        "L[a,1] L[a,1] T",
        "L[a,1] ~L[a,1] T",
        "L[a,1/2] L[a,1] T",
        "~L[a,1] L[a,1] T",
        "E[a,1] L[a,1] T",
        "L[b,3/2] T & M[b,3/2] T & L[a,1/3] T",
    ];
    assert!(fixtures.len() >= 20);
    for text in fixtures {
        let psi = parse(text).unwrap();
        let start = Instant::now();
        let model = match satisfiable_with(&psi, &Caps::default(), Exec::Parallel).unwrap() {
            SatOutcome::Sat(model, witness) => {
                assert!(sat(&model.process(witness), &psi).unwrap());
                model
            }
            SatOutcome::Unsat => panic!("fixture `{}` should be satisfiable", text),
        };
        let grid = model.grid().clone();
        let mut checked = 0usize;
        let mut formulas: Vec<(Formula, Vec<bool>)> = Vec::new();
        for i in 0..grid.atoms().len() {
            let column = (0..grid.row_count())
                .map(|r| grid.row(r)[i])
                .collect::<Vec<bool>>();
            formulas.push((grid.atom_formula(i).clone(), column));
        }
        for rep in grid.reps() {
            formulas.push((rep.formula.clone(), rep.table.clone()));
        }
        for (phi, expected) in &formulas {
            let den = model.kernel().denotation(phi).unwrap();
            for (state, atom) in model.atoms().iter().enumerate() {
                assert_eq!(
                    den[state],
                    expected[atom.row()],
                    "Truth Lemma failed for `{}` in the model of `{}`",
                    phi,
                    text
                );
                checked += 1;
            }
        }
        let elapsed = start.elapsed();
        assert!(
            elapsed.as_secs() <= 30,
            "synthesis of `{}` took {:?}",
            text,
            elapsed
        );
        assert!(checked > 0);
    }
    println!(
        "[PASS] criterion 5: Truth Lemma verified on {} synthesized models",
        fixtures.len()
    );
}

/// Criterion 6: the decision procedure agrees with exhaustive kernel search
/// on the deduplicated one-label depth-1 family over the half-integer grid
/// up to 1.
#[test]
fn criterion_6_decision_completeness() {
    let labels = [lab("a")];
    // All Boolean functions over the two free grid atoms, as full DNF, plus
    // the forced-valuation corners: bottom operands and the trivial index.
    let l_half = parse("L[a,1/2] T").unwrap();
    let l_one = parse("L[a,1] T").unwrap();
    let minterms = [
        l_half.clone().and(l_one.clone()),
        l_half.clone().and(l_one.clone().neg()),
        l_half.clone().neg().and(l_one.clone()),
        l_half.clone().neg().and(l_one.clone().neg()),
    ];
    let mut family: Vec<Formula> = Vec::new();
    for mask in 0u32..16 {
        let picked: Vec<Formula> = (0..4)
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| minterms[i as usize].clone())
            .collect();
        let formula = picked
            .into_iter()
            .reduce(|x, y| x.or(y))
            .unwrap_or_else(Formula::bottom);
        family.push(formula);
    }
    family.extend([
        parse("L[a,0] T").unwrap(),
        parse("L[a,0] F").unwrap(),
        parse("L[a,1/2] F").unwrap(),
        parse("L[a,1] F").unwrap(),
        parse("~L[a,1/2] F").unwrap(),
        parse("M[a,1/2] T").unwrap(),
        parse("M[a,0] T & L[a,1/2] T").unwrap(),
        parse("M[a,1] T & L[a,1/2] T").unwrap(),
        parse("M[a,1/2] F").unwrap(),
        parse("E[a,1/2] T").unwrap(),
        parse("E[a,1/2] T & L[a,1] T").unwrap(),
        parse("~M[a,1] T & M[a,1/2] T").unwrap(),
    ]);

    let disagreements: Vec<String> = family
        .par_iter()
        .filter_map(|phi| {
            let decided = matches!(
                satisfiable_with(phi, &Caps::default(), Exec::Sequential).unwrap(),
                SatOutcome::Sat(..)
            );
            let oracle = oracle_satisfiable(phi, &labels);
            (decided != oracle).then(|| format!("{} (decider {}, oracle {})", phi, decided, oracle))
        })
        .collect();
    assert!(disagreements.is_empty(), "disagreements: {:?}", disagreements);
    println!(
        "[PASS] criterion 6: decision procedure agrees with kernel search on {} formulas",
        family.len()
    );
}

fn closure_sampler(psi: &Formula) -> FormulaGen {
    let spec = measures(psi);
    let n = format!("{}", spec.granularity).parse::<i64>().unwrap();
    let mut indices = Vec::new();
    let mut k = 0;
    loop {
        let r = Rat::new(k, n);
        if r > spec.max_index {
            break;
        }
        indices.push(r);
        k += 1;
    }
    FormulaGen {
        labels: spec.actions.iter().cloned().collect(),
        indices,
        max_depth: spec.modal_depth,
        with_m: true,
        steps: 4,
    }
}

/// Criterion 7: the weak-robustness inequality holds on 500 random triples
/// with exact arithmetic: an arbitrary 4-state process, closure companions of
/// a fixture anchor, and the parameter of the synthesized model.
#[test]
fn criterion_7_weak_robustness() {
    let anchors = [
        "L[a,1] T",
        "L[a,1/2] T & ~L[a,3/2] T",
        "M[a,1] T",
        "E[a,1] T",
        "L[a,1] T & L[b,1/2] T",
    ];
    let violations: Vec<String> = (0..500usize)
        .into_par_iter()
        .filter_map(|i| {
            let mut rng = rng_for_sample(77, 700, i as u64);
            let psi = parse(anchors[i % anchors.len()]).unwrap();
            let sampler = closure_sampler(&psi);
            let phi1 = sampler.sample(&mut rng);
            let phi2 = sampler.sample(&mut rng);
            let model = synthesize_for(&psi, &phi1, &phi2, &Caps::default(), Exec::Sequential)
                .unwrap();
            let sd = sd_hat_over(&model, &phi1, &phi2, false, Exec::Sequential).unwrap();
            let gen = KernelGen {
                max_states: 4,
                labels: sampler.labels.clone(),
                max_denominator: 12,
                density: 0.5,
            };
            let kernel = Arc::new(gen.sample(&mut rng));
            let state = rng.gen_range(0..kernel.state_count());
            let p = Process::from_index(kernel, state);
            let mut bad = Vec::new();
            for (process, tag) in [(p, "random"), (model.process(0), "atom")] {
                for (lhs, rhs) in [(&phi1, &phi2), (&phi2, &phi1)] {
                    if !check_weak_robustness_with(&process, &sd, lhs, rhs, false).unwrap() {
                        bad.push(format!(
                            "triple {} ({} process): d(P,{}) > d(P,{}) + {} + 2/{}",
                            i, tag, lhs, rhs, sd.value, sd.parameter
                        ));
                    }
                }
            }
            if bad.is_empty() {
                None
            } else {
                Some(bad.join("; "))
            }
        })
        .collect();
    assert!(violations.is_empty(), "violations: {:?}", violations);
    println!("[PASS] criterion 7: weak robustness held on 500 random triples (both directions)");
}

/// Criterion 8: strong robustness over finite witness sets, 500 random
/// instances.
#[test]
fn criterion_8_strong_robustness() {
    let gen = KernelGen::default();
    let fgen = FormulaGen::default();
    let violations: usize = (0..500usize)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_for_sample(8, 800, i as u64);
            let mut witnesses: Vec<Process> = Vec::new();
            for _ in 0..rng.gen_range(1..=3) {
                let k = Arc::new(gen.sample(&mut rng));
                let s = rng.gen_range(0..k.state_count());
                witnesses.push(Process::from_index(k, s));
            }
            let p = witnesses[rng.gen_range(0..witnesses.len())].clone();
            let phi = fgen.sample(&mut rng);
            let psi = fgen.sample(&mut rng);
            let ok =
                check_strong_robustness(&p, &phi, &psi, &witnesses, false, Exec::Sequential)
                    .unwrap();
            usize::from(!ok)
        })
        .sum();
    assert_eq!(violations, 0);
    println!("[PASS] criterion 8: strong robustness held on 500 random instances");
}

/// Criterion 9: exact metric identities: negation invariance of the formula
/// distance, and symmetry plus the triangle inequality for both distances
/// over shared domains.
#[test]
fn criterion_9_metric_identities() {
    let gen = KernelGen::default();
    let fgen = FormulaGen::default();
    let spec = ClosureSpec::new(2, Rat::one(), 1, [lab("a"), lab("b")]);
    let (family, _) = enumerate_family(1, &spec, true, 200);
    let failures: usize = (0..1000usize)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_for_sample(19, 900, i as u64);
            let witnesses: Vec<Process> = (0..2)
                .map(|_| {
                    let k = Arc::new(gen.sample(&mut rng));
                    let s = rng.gen_range(0..k.state_count());
                    Process::from_index(k, s)
                })
                .collect();
            let phi1 = fgen.sample(&mut rng);
            let phi2 = fgen.sample(&mut rng);
            let phi3 = fgen.sample(&mut rng);
            let d12 = fdist(&phi1, &phi2, &witnesses, false, Exec::Sequential)
                .unwrap()
                .value;
            let d21 = fdist(&phi2, &phi1, &witnesses, false, Exec::Sequential)
                .unwrap()
                .value;
            let d13 = fdist(&phi1, &phi3, &witnesses, false, Exec::Sequential)
                .unwrap()
                .value;
            let d23 = fdist(&phi2, &phi3, &witnesses, false, Exec::Sequential)
                .unwrap()
                .value;
            let neg = fdist(
                &phi1.clone().neg(),
                &phi2.clone().neg(),
                &witnesses,
                false,
                Exec::Sequential,
            )
            .unwrap()
            .value;
            let mut bad = d12 != d21 || neg != d12 || d13 > &d12 + &d23;

            let processes: Vec<Process> = (0..3)
                .map(|_| {
                    let k = Arc::new(gen.sample(&mut rng));
                    let s = rng.gen_range(0..k.state_count());
                    Process::from_index(k, s)
                })
                .collect();
            let pd = |x: &Process, y: &Process| {
                pdist(x, y, &family, false, Exec::Sequential).unwrap().value
            };
            let p12 = pd(&processes[0], &processes[1]);
            let p21 = pd(&processes[1], &processes[0]);
            let p13 = pd(&processes[0], &processes[2]);
            let p23 = pd(&processes[1], &processes[2]);
            bad |= p12 != p21 || p13 > &p12 + &p23;
            usize::from(bad)
        })
        .sum();
    assert_eq!(failures, 0);
    println!("[PASS] criterion 9: metric identities exact on 1000 random instances");
}

/// Criterion 10: for negation-free formulas the distance vanishes exactly on
/// satisfaction.
#[test]
fn criterion_10_negation_free_kernel() {
    fn negation_free(rng: &mut impl Rng, labels: &[Label], depth: u32, size: u32) -> Formula {
        let indices = [Rat::zero(), Rat::new(1, 2), Rat::one(), Rat::new(3, 2)];
        if size == 0 {
            return Formula::Top;
        }
        match rng.gen_range(0..4) {
            0 => Formula::Top,
            1 if depth > 0 => {
                let label = labels[rng.gen_range(0..labels.len())].clone();
                let r = indices[rng.gen_range(0..indices.len())].clone();
                Formula::l(label, r, negation_free(rng, labels, depth - 1, size - 1))
            }
            2 if depth > 0 => {
                let label = labels[rng.gen_range(0..labels.len())].clone();
                let r = indices[rng.gen_range(0..indices.len())].clone();
                Formula::m(label, r, negation_free(rng, labels, depth - 1, size - 1))
            }
            _ => {
                let a = negation_free(rng, labels, depth, size / 2);
                let b = negation_free(rng, labels, depth, size / 2);
                a.and(b)
            }
        }
    }
    let gen = KernelGen::default();
    let failures: usize = (0..1000usize)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_for_sample(10, 1000, i as u64);
            let k = Arc::new(gen.sample(&mut rng));
            let s = rng.gen_range(0..k.state_count());
            let p = Process::from_index(k, s);
            let labels: Vec<Label> = p.kernel.labels().iter().cloned().collect();
            let phi = negation_free(&mut rng, &labels, 2, 8);
            assert!(phi.is_negation_free());
            let satisfied = sat(&p, &phi).unwrap();
            let d = dsat(&p, &phi, false).unwrap();
            usize::from(d.is_zero() != satisfied)
        })
        .sum();
    assert_eq!(failures, 0);
    println!("[PASS] criterion 10: d(P,phi) = 0 iff sat on 1000 negation-free samples");
}
