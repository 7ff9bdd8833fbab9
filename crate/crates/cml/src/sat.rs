//! Satisfiability, consistency, and finite-model synthesis.
//!
//! Candidate atoms are the coherent valuations of the modal grid. Each one is
//! subjected to an exact rate-feasibility check: a linear program over
//! nonnegative rational rate variables, one per target atom and label, whose
//! constraints transcribe the atom's `L`/`M` bits. Strict inequalities are
//! decided by maximizing a single slack variable; an atom is feasible iff the
//! optimum slack is strictly positive. Infeasible atoms are discarded and the
//! check is re-run against the reduced candidate set until it stabilizes; the
//! survivors, with their witness rates, are the synthesized model. The Truth
//! Lemma is then verified against the model rather than assumed.

use std::collections::BTreeMap;
use std::sync::Arc;

use num::BigUint;
use thiserror::Error;

use crate::formula::{measures, ClosureSpec, Formula, Label};
use crate::grid::{Caps, Grid, GridError, ModalOp};
use crate::kernel::{sat as model_sat, Kernel, ModelError};
use crate::lp::{feasible_point, maximize, Cmp, Constraint, LpResult};
use crate::par::{map_slice, Exec};
use crate::rational::{lcm_uint, Rat};

#[derive(Debug, Error)]
pub enum SatError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("formula is unsatisfiable")]
    Unsat,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("internal error: {0}")]
    Internal(String),
}

/// A coherent valuation over the modal grid of a closure; the candidate
/// states of the synthesized finite model.
#[derive(Clone)]
pub struct Atom {
    grid: Arc<Grid>,
    row: usize,
}

impl Atom {
    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn row(&self) -> usize {
        self.row
    }

    pub fn closure(&self) -> &ClosureSpec {
        self.grid.spec()
    }

    /// Truth of a closure formula under this valuation.
    pub fn holds(&self, phi: &Formula) -> Result<bool, GridError> {
        Ok(self.grid.truth_vector(phi)?[self.row])
    }

    /// The valuation as (grid formula, bit) pairs, layer by layer.
    pub fn valuation(&self) -> Vec<(Formula, bool)> {
        (0..self.grid.atoms().len())
            .map(|i| (self.grid.atom_formula(i).clone(), self.grid.row(self.row)[i]))
            .collect()
    }
}

impl std::fmt::Debug for Atom {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Atom#{}", self.row)
    }
}

/// Witness rates of one atom: for each label, the rate into each atom of the
/// candidate list (by list position).
pub type WitnessRates = BTreeMap<Label, Vec<Rat>>;

/// Rate feasibility of `atom` against the candidate list `atoms`, which must
/// contain `atom` itself. Returns witness rates at half the optimal slack, or
/// `None` when the constraint system has no solution with positive slack.
pub fn rate_feasible(atom: &Atom, atoms: &[Atom]) -> Option<WitnessRates> {
    let rows: Vec<usize> = atoms.iter().map(|a| a.row).collect();
    feasible(&atom.grid, atom.row, &rows)
}

fn feasible(grid: &Grid, source: usize, targets: &[usize]) -> Option<WitnessRates> {
    let n = targets.len();
    let slack = n; // variable layout: x_0..x_{n-1}, then t
    let mut witness = WitnessRates::new();
    for (label_pos, label) in grid.labels().iter().enumerate() {
        let mut constraints = Vec::new();
        let mut strict = Vec::new(); // (coeffs, cmp, rhs, sign of t)
        for (g_idx, g) in grid.atoms().iter().enumerate() {
            if g.label != label_pos {
                continue;
            }
            let value = grid.row(source)[g_idx];
            let table = &grid.reps()[g.operand].table;
            let coeffs: Vec<(usize, Rat)> = targets
                .iter()
                .enumerate()
                .filter(|(_, &row)| table[row])
                .map(|(j, _)| (j, Rat::one()))
                .collect();
            let r = grid.indices()[g.index].clone();
            match (g.op, value) {
                (ModalOp::L, true) => {
                    if !r.is_zero() {
                        constraints.push(Constraint {
                            coeffs,
                            cmp: Cmp::Ge,
                            rhs: r,
                        });
                    }
                }
                (ModalOp::L, false) => strict.push((coeffs, Cmp::Le, r)),
                (ModalOp::M, true) => constraints.push(Constraint {
                    coeffs,
                    cmp: Cmp::Le,
                    rhs: r,
                }),
                (ModalOp::M, false) => strict.push((coeffs, Cmp::Ge, r)),
            }
        }
        // Strict rows carry the slack: sum <= r - t, resp. sum >= r + t.
        let mut lp = constraints.clone();
        for (coeffs, cmp, rhs) in &strict {
            let mut coeffs = coeffs.clone();
            match cmp {
                Cmp::Le => coeffs.push((slack, Rat::one())),
                Cmp::Ge => coeffs.push((slack, -Rat::one())),
                Cmp::Eq => unreachable!(),
            }
            lp.push(Constraint {
                coeffs,
                cmp: *cmp,
                rhs: rhs.clone(),
            });
        }
        // Cap the slack so the program is bounded even without strict rows.
        lp.push(Constraint {
            coeffs: vec![(slack, Rat::one())],
            cmp: Cmp::Le,
            rhs: Rat::one(),
        });
        let best = match maximize(n + 1, &[(slack, Rat::one())], &lp) {
            LpResult::Optimal { value, .. } => value,
            LpResult::Infeasible => return None,
            LpResult::Unbounded => unreachable!("slack is capped"),
        };
        if !best.is_positive() {
            return None;
        }
        // Re-solve with the slack pinned at half its optimum; any feasible
        // point of that system is a witness.
        let half = best / Rat::from_int(2);
        let mut pinned = constraints;
        for (coeffs, cmp, rhs) in strict {
            let rhs = match cmp {
                Cmp::Le => rhs - &half,
                Cmp::Ge => rhs + &half,
                Cmp::Eq => unreachable!(),
            };
            pinned.push(Constraint { coeffs, cmp, rhs });
        }
        let point =
            feasible_point(n, &pinned).expect("system at half slack contains the LP optimum");
        witness.insert(label.clone(), point);
    }
    Some(witness)
}

/// Discard candidates that fail rate feasibility, re-checking against the
/// shrinking set until stable. Survivors are feasible against the final set.
fn eliminate(grid: &Arc<Grid>, exec: Exec) -> Vec<usize> {
    let mut alive: Vec<usize> = (0..grid.row_count()).collect();
    loop {
        let keep = map_slice(exec, &alive, |&row| feasible(grid, row, &alive).is_some());
        let next: Vec<usize> = alive
            .iter()
            .zip(&keep)
            .filter(|(_, ok)| **ok)
            .map(|(&row, _)| row)
            .collect();
        if next.len() == alive.len() {
            return alive;
        }
        alive = next;
    }
}

/// All valuations over the modal grid that survive the axiom-derived
/// propositional constraints and the rate-feasibility elimination.
pub fn enumerate_atoms(
    spec: &ClosureSpec,
    with_m: bool,
    caps: &Caps,
    exec: Exec,
) -> Result<Vec<Atom>, SatError> {
    let grid = Arc::new(Grid::build(spec, with_m, caps)?);
    Ok(eliminate(&grid, exec)
        .into_iter()
        .map(|row| Atom {
            grid: grid.clone(),
            row,
        })
        .collect())
}

/// The synthesized finite model of a satisfiable formula: one state per
/// surviving atom, rates given by the LP witnesses, granularity parameter
/// read off the witness denominators.
pub struct FiniteModel {
    kernel: Arc<Kernel>,
    parameter: BigUint,
    atoms: Vec<Atom>,
}

impl FiniteModel {
    pub fn kernel(&self) -> &Arc<Kernel> {
        &self.kernel
    }

    /// The parameter `p`: every rate of the model lies on the grid of
    /// denominator `p`, and `p` is a multiple of the closure granularity.
    pub fn parameter(&self) -> &BigUint {
        &self.parameter
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.atoms[0].grid
    }

    pub fn state_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn process(&self, atom_idx: usize) -> crate::kernel::Process {
        crate::kernel::Process::from_index(self.kernel.clone(), atom_idx)
    }
}

pub enum SatOutcome {
    /// The model together with the index of an atom satisfying the formula.
    Sat(FiniteModel, usize),
    Unsat,
}

/// Decide satisfiability of `phi` with explicit caps and execution mode.
/// Every positive answer synthesizes the full finite model of the closure,
/// verifies the Truth Lemma on it, and re-checks the witness by exact model
/// checking before returning. The closure is taken in the extended language
/// exactly when `phi` uses an upper-bound operator.
pub fn satisfiable_with(phi: &Formula, caps: &Caps, exec: Exec) -> Result<SatOutcome, SatError> {
    satisfiable_in(phi, phi.uses_m(), caps, exec)
}

/// As [`satisfiable_with`], with the language chosen explicitly: `with_m`
/// forces the closure of the extended language even for an `L`-only formula.
pub fn satisfiable_in(
    phi: &Formula,
    with_m: bool,
    caps: &Caps,
    exec: Exec,
) -> Result<SatOutcome, SatError> {
    satisfiable_seeded(phi, &[], with_m, caps, exec)
}

/// Decide `phi` over the grid directed by `phi` and the extra seed formulas;
/// the seeds widen the carried operand classes (so that, e.g., closure
/// companions of `phi` stay evaluable on the synthesized model) without
/// affecting the verdict.
pub fn satisfiable_seeded(
    phi: &Formula,
    extra_seeds: &[Formula],
    with_m: bool,
    caps: &Caps,
    exec: Exec,
) -> Result<SatOutcome, SatError> {
    assert!(
        with_m || !phi.uses_m(),
        "an extended-language formula needs the extended closure"
    );
    let spec = measures(phi);
    let mut seeds: Vec<Formula> = vec![phi.clone()];
    seeds.extend_from_slice(extra_seeds);
    let grid = Arc::new(Grid::build_directed(&seeds, &spec, with_m, caps)?);
    let truth = grid.truth_vector(phi)?;
    let alive = eliminate(&grid, exec);
    let Some(witness_pos) = alive.iter().position(|&row| truth[row]) else {
        return Ok(SatOutcome::Unsat);
    };
    let model = build_model(grid, alive, exec)?;
    verify_truth_lemma(&model)?;
    let witness = model.process(witness_pos);
    if !model_sat(&witness, phi)? {
        return Err(SatError::Internal(
            "witness state fails the formula it was synthesized for".into(),
        ));
    }
    Ok(SatOutcome::Sat(model, witness_pos))
}

pub fn satisfiable(phi: &Formula) -> Result<SatOutcome, SatError> {
    satisfiable_with(phi, &Caps::default(), Exec::Parallel)
}

/// Synthesize the finite model of a satisfiable `psi`; errors on
/// unsatisfiable input.
pub fn synthesize_model(psi: &Formula) -> Result<FiniteModel, SatError> {
    synthesize_model_with(psi, &Caps::default(), Exec::Parallel)
}

pub fn synthesize_model_with(
    psi: &Formula,
    caps: &Caps,
    exec: Exec,
) -> Result<FiniteModel, SatError> {
    synthesize_model_in(psi, psi.uses_m(), caps, exec)
}

/// Synthesis with the language chosen explicitly; see [`satisfiable_in`].
pub fn synthesize_model_in(
    psi: &Formula,
    with_m: bool,
    caps: &Caps,
    exec: Exec,
) -> Result<FiniteModel, SatError> {
    synthesize_seeded(psi, &[], with_m, caps, exec)
}

/// Synthesis over the grid directed by `psi` and the extra seeds; see
/// [`satisfiable_seeded`].
pub fn synthesize_seeded(
    psi: &Formula,
    extra_seeds: &[Formula],
    with_m: bool,
    caps: &Caps,
    exec: Exec,
) -> Result<FiniteModel, SatError> {
    match satisfiable_seeded(psi, extra_seeds, with_m, caps, exec)? {
        SatOutcome::Sat(model, _) => Ok(model),
        SatOutcome::Unsat => Err(SatError::Unsat),
    }
}

/// A finite set of formulas is consistent iff its conjunction is satisfiable.
pub fn consistent(gamma: &[Formula]) -> Result<bool, SatError> {
    let conj = gamma
        .iter()
        .cloned()
        .reduce(|a, b| a.and(b))
        .unwrap_or(Formula::Top);
    Ok(matches!(satisfiable(&conj)?, SatOutcome::Sat(..)))
}

fn state_name(i: usize, count: usize) -> String {
    let width = count.saturating_sub(1).to_string().len();
    format!("g{:0width$}", i, width = width)
}

fn build_model(grid: Arc<Grid>, alive: Vec<usize>, exec: Exec) -> Result<FiniteModel, SatError> {
    let witnesses: Vec<WitnessRates> = map_slice(exec, &alive, |&row| {
        feasible(&grid, row, &alive).expect("survivors of elimination are feasible")
    });
    let count = alive.len();
    let states: Vec<String> = (0..count).map(|i| state_name(i, count)).collect();
    let mut entries = Vec::new();
    let mut parameter = grid.spec().granularity.clone();
    for (i, rates) in witnesses.iter().enumerate() {
        for (label, row) in rates {
            for (j, rate) in row.iter().enumerate() {
                if rate.is_zero() {
                    continue;
                }
                parameter = lcm_uint(&parameter, &rate.denom_uint());
                entries.push((
                    label.clone(),
                    state_name(i, count),
                    state_name(j, count),
                    rate.clone(),
                ));
            }
        }
    }
    let kernel = Kernel::from_parts(states, grid.labels().to_vec(), entries)?;
    let atoms = alive
        .into_iter()
        .map(|row| Atom {
            grid: grid.clone(),
            row,
        })
        .collect();
    Ok(FiniteModel {
        kernel: Arc::new(kernel),
        parameter,
        atoms,
    })
}

/// Check, for every atom and every grid formula (modal atoms and operand
/// representatives alike), that satisfaction in the synthesized kernel
/// coincides with the atom's valuation. A failure is an internal error.
fn verify_truth_lemma(model: &FiniteModel) -> Result<(), SatError> {
    let grid = model.grid().clone();
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
    for (phi, expected) in formulas {
        let den = model.kernel.denotation(&phi)?;
        for (state, atom) in model.atoms.iter().enumerate() {
            if den[state] != expected[atom.row] {
                return Err(SatError::Internal(format!(
                    "Truth Lemma violated at state {} for `{}`",
                    state, phi
                )));
            }
        }
    }
    Ok(())
}
