//! Quantitative satisfiability and the pseudometric layer: the degree-of-
//! failure function `d`, process distance over a finite formula family,
//! formula distance over a finite witness set, its exact evaluation over a
//! synthesized finite model, and the two robustness inequalities as
//! executable checks.

use std::collections::HashMap;

use num::{BigInt, BigUint};
use thiserror::Error;

use crate::formula::{measures, Formula};
use crate::grid::Caps;
use crate::kernel::{Kernel, ModelError, Process, StateSet};
use crate::par::{map_slice, Exec};
use crate::rational::Rat;
use crate::sat::{synthesize_seeded, FiniteModel, SatError};

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Sat(#[from] SatError),
    #[error("`{formula}` is outside the closure of the anchor formula")]
    NotInClosure { formula: String },
    #[error("precondition violation: {0}")]
    Precondition(String),
}

/// Truncated difference: `r - s` when positive, else 0.
pub fn trunc_diff(r: &Rat, s: &Rat) -> Rat {
    let d = r - s;
    if d.is_positive() {
        d
    } else {
        Rat::zero()
    }
}

fn clip(v: Rat) -> Rat {
    v.max(Rat::zero()).min(Rat::one())
}

/// Quantitative satisfiability: 0 on satisfaction of positive facts, and the
/// exact rate deficit on modal failures. Denotations inside the modal clauses
/// come from exact Boolean satisfaction, not from the distance recursion.
/// With `clamp`, every clause result is clipped into [0,1] before use.
pub fn dsat(process: &Process, phi: &Formula, clamp: bool) -> Result<Rat, ModelError> {
    let mut denotations: HashMap<Formula, StateSet> = HashMap::new();
    d_rec(
        &process.kernel,
        process.state,
        phi,
        clamp,
        &mut denotations,
    )
}

fn d_rec(
    kernel: &Kernel,
    state: usize,
    phi: &Formula,
    clamp: bool,
    denotations: &mut HashMap<Formula, StateSet>,
) -> Result<Rat, ModelError> {
    let clause = |v: Rat| if clamp { clip(v) } else { v };
    Ok(match phi {
        Formula::Top => Rat::zero(),
        Formula::Neg(p) => {
            let inner = d_rec(kernel, state, p, clamp, denotations)?;
            clause(Rat::one() - inner)
        }
        Formula::And(p, q) => {
            let dp = d_rec(kernel, state, p, clamp, denotations)?;
            let dq = d_rec(kernel, state, q, clamp, denotations)?;
            clause(dp.max(dq))
        }
        Formula::L(a, r, p) => {
            let den = denotation_memo(kernel, p, denotations)?;
            let rate = kernel.theta(a, state, &den)?;
            clause(trunc_diff(r, &rate))
        }
        Formula::M(a, r, p) => {
            let den = denotation_memo(kernel, p, denotations)?;
            let rate = kernel.theta(a, state, &den)?;
            clause(trunc_diff(&rate, r))
        }
    })
}

fn denotation_memo(
    kernel: &Kernel,
    phi: &Formula,
    memo: &mut HashMap<Formula, StateSet>,
) -> Result<StateSet, ModelError> {
    if let Some(hit) = memo.get(phi) {
        return Ok(hit.clone());
    }
    let den = kernel.denotation(phi)?;
    memo.insert(phi.clone(), den.clone());
    Ok(den)
}

/// What attained the maximum in a distance report.
#[derive(Clone, Debug)]
pub enum DistanceWitness {
    Formula(Formula),
    /// Position in the witness list and the state id it points at.
    Process { index: usize, state_id: String },
    /// Empty quantification domain.
    None,
}

/// An enumerated lower bound (or exact value, over a synthesized model) of
/// one of the distance suprema.
#[derive(Clone, Debug)]
pub struct DistanceReport {
    pub value: Rat,
    pub witness: DistanceWitness,
    pub family_descriptor: String,
    /// True only when the quantified domain was finite and fully enumerated
    /// (the atoms of a synthesized model); enumerated families yield lower
    /// bounds of the supremum.
    pub exact: bool,
}

/// Lower bound of the process distance: max over the family of
/// `|d(p1,phi) - d(p2,phi)|`, with the attaining formula as witness.
pub fn pdist(
    p1: &Process,
    p2: &Process,
    family: &[Formula],
    clamp: bool,
    exec: Exec,
) -> Result<DistanceReport, ModelError> {
    let gaps: Vec<Result<Rat, ModelError>> = map_slice(exec, family, |phi| {
        let d1 = dsat(p1, phi, clamp)?;
        let d2 = dsat(p2, phi, clamp)?;
        Ok((d1 - d2).abs())
    });
    let mut best: Option<(usize, Rat)> = None;
    for (i, gap) in gaps.into_iter().enumerate() {
        let gap = gap?;
        if best.as_ref().map_or(true, |(_, b)| &gap > b) {
            best = Some((i, gap));
        }
    }
    Ok(match best {
        Some((i, value)) => DistanceReport {
            value,
            witness: DistanceWitness::Formula(family[i].clone()),
            family_descriptor: format!("family of {} formulas", family.len()),
            exact: false,
        },
        None => DistanceReport {
            value: Rat::zero(),
            witness: DistanceWitness::None,
            family_descriptor: "empty family".into(),
            exact: false,
        },
    })
}

/// Lower bound of the formula distance: max over the witness processes of
/// `|d(P,phi1) - d(P,phi2)|`.
pub fn fdist(
    phi1: &Formula,
    phi2: &Formula,
    witnesses: &[Process],
    clamp: bool,
    exec: Exec,
) -> Result<DistanceReport, ModelError> {
    let report = fdist_inner(phi1, phi2, witnesses, clamp, exec)?;
    Ok(DistanceReport {
        family_descriptor: format!("{} witness processes", witnesses.len()),
        exact: false,
        ..report
    })
}

fn fdist_inner(
    phi1: &Formula,
    phi2: &Formula,
    witnesses: &[Process],
    clamp: bool,
    exec: Exec,
) -> Result<DistanceReport, ModelError> {
    let gaps: Vec<Result<Rat, ModelError>> = map_slice(exec, witnesses, |p| {
        let d1 = dsat(p, phi1, clamp)?;
        let d2 = dsat(p, phi2, clamp)?;
        Ok((d1 - d2).abs())
    });
    let mut best: Option<(usize, Rat)> = None;
    for (i, gap) in gaps.into_iter().enumerate() {
        let gap = gap?;
        if best.as_ref().map_or(true, |(_, b)| &gap > b) {
            best = Some((i, gap));
        }
    }
    Ok(match best {
        Some((i, value)) => DistanceReport {
            value,
            witness: DistanceWitness::Process {
                index: i,
                state_id: witnesses[i].state_id().to_string(),
            },
            family_descriptor: String::new(),
            exact: false,
        },
        None => DistanceReport {
            value: Rat::zero(),
            witness: DistanceWitness::None,
            family_descriptor: String::new(),
            exact: false,
        },
    })
}

/// The formula distance evaluated exactly over the atoms of a synthesized
/// model, together with the model's parameter.
pub struct SdHat {
    pub value: Rat,
    pub parameter: BigUint,
    pub report: DistanceReport,
}

/// Check that both formulas live in the closure of `psi` and evaluate the
/// finite-model formula distance over the synthesized model of `psi`.
pub fn sd_hat(
    psi: &Formula,
    phi1: &Formula,
    phi2: &Formula,
    clamp: bool,
    caps: &Caps,
    exec: Exec,
) -> Result<SdHat, MetricsError> {
    let model = synthesize_for(psi, phi1, phi2, caps, exec)?;
    sd_hat_over(&model, phi1, phi2, clamp, exec)
}

/// Synthesize the model of `psi` whose closure must contain `phi1`, `phi2`.
/// The closure is taken in the extended language as soon as any participant
/// uses an upper-bound operator.
pub fn synthesize_for(
    psi: &Formula,
    phi1: &Formula,
    phi2: &Formula,
    caps: &Caps,
    exec: Exec,
) -> Result<FiniteModel, MetricsError> {
    let spec = measures(psi);
    let with_m = psi.uses_m() || phi1.uses_m() || phi2.uses_m();
    for phi in [phi1, phi2] {
        if !spec.contains(phi) {
            return Err(MetricsError::NotInClosure {
                formula: phi.print(),
            });
        }
    }
    let seeds = [phi1.clone(), phi2.clone()];
    synthesize_seeded(psi, &seeds, with_m, caps, exec).map_err(Into::into)
}

/// Formula distance over an already synthesized model's atoms; exact by
/// construction.
pub fn sd_hat_over(
    model: &FiniteModel,
    phi1: &Formula,
    phi2: &Formula,
    clamp: bool,
    exec: Exec,
) -> Result<SdHat, MetricsError> {
    let witnesses: Vec<Process> = (0..model.state_count()).map(|i| model.process(i)).collect();
    let mut report = fdist_inner(phi1, phi2, &witnesses, clamp, exec)?;
    report.exact = true;
    report.family_descriptor = format!(
        "all {} atoms of the synthesized model (parameter {})",
        model.state_count(),
        model.parameter()
    );
    Ok(SdHat {
        value: report.value.clone(),
        parameter: model.parameter().clone(),
        report,
    })
}

/// Strong robustness: `d(P,psi) <= d(P,phi) + fdist(phi,psi,S)` whenever `P`
/// is drawn from the witness set `S`. A `false` would refute the theorem.
pub fn check_strong_robustness(
    p: &Process,
    phi: &Formula,
    psi: &Formula,
    witnesses: &[Process],
    clamp: bool,
    exec: Exec,
) -> Result<bool, MetricsError> {
    if !witnesses.iter().any(|w| w == p) {
        return Err(MetricsError::Precondition(
            "the process must belong to the witness set".into(),
        ));
    }
    let lhs = dsat(p, psi, clamp)?;
    let rhs = dsat(p, phi, clamp)?;
    let dist = fdist(phi, psi, witnesses, clamp, exec)?;
    Ok(lhs <= rhs + dist.value)
}

/// Weak robustness: `d(P,phi1) <= d(P,phi2) + sd_hat(phi1,phi2) + 2/p` for an
/// arbitrary process `P`, with `p` the parameter of the synthesized model of
/// `psi`.
pub fn check_weak_robustness(
    p: &Process,
    psi: &Formula,
    phi1: &Formula,
    phi2: &Formula,
    clamp: bool,
    caps: &Caps,
    exec: Exec,
) -> Result<bool, MetricsError> {
    let sd = sd_hat(psi, phi1, phi2, clamp, caps, exec)?;
    check_weak_robustness_with(p, &sd, phi1, phi2, clamp)
}

/// The same inequality against a precomputed `sd_hat` evaluation.
pub fn check_weak_robustness_with(
    p: &Process,
    sd: &SdHat,
    phi1: &Formula,
    phi2: &Formula,
    clamp: bool,
) -> Result<bool, MetricsError> {
    let lhs = dsat(p, phi1, clamp)?;
    let rhs = dsat(p, phi2, clamp)?;
    let slack = Rat::from_big(BigInt::from(2), BigInt::from(sd.parameter.clone()));
    Ok(lhs <= rhs + &sd.value + slack)
}
