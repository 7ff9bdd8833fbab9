//! The Hilbert-style axiom schemas of both logics, schema instantiation with
//! side conditions, randomized soundness campaigns over generated kernels,
//! and finite semantic surrogates for the infinitary rules. The probabilistic
//! axioms that fail under Markovian semantics are carried as schemas too, so
//! the campaigns can witness their unsoundness.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::formula::{Formula, Label};
use crate::kernel::Kernel;
use crate::par::{map_range, Exec};
use crate::random::{rng_for_sample, FormulaGen, KernelGen};
use crate::rational::Rat;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum SchemaId {
    A1,
    A2,
    A3,
    A4,
    R1,
    C1,
    C2,
    C3,
    C4,
    C5,
    T1,
    B2,
    B3,
    B4,
    LM1,
    LM2,
    LM3,
    LM4,
    LM5,
    LM6,
    LM7,
}

use SchemaId::*;

impl SchemaId {
    pub const ALL: [SchemaId; 21] = [
        A1, A2, A3, A4, R1, C1, C2, C3, C4, C5, T1, B2, B3, B4, LM1, LM2, LM3, LM4, LM5, LM6, LM7,
    ];

    /// The schemas expected sound for Markovian semantics: both axiom tables
    /// and the derived theorems, but not the probabilistic leftovers.
    pub const SOUND: [SchemaId; 18] = [
        A1, A2, A3, A4, R1, C1, C2, C3, C4, C5, T1, LM1, LM2, LM3, LM4, LM5, LM6, LM7,
    ];

    /// The probabilistic axioms that Markovian semantics falsifies.
    pub const UNSOUND: [SchemaId; 3] = [B2, B3, B4];

    pub fn expected_sound(&self) -> bool {
        !Self::UNSOUND.contains(self)
    }

    /// Conditional schemas: scored only when the premise is valid on the
    /// sampled model.
    pub fn conditional(&self) -> bool {
        matches!(self, R1 | T1 | LM7)
    }

    pub fn name(&self) -> &'static str {
        match self {
            A1 => "A1",
            A2 => "A2",
            A3 => "A3",
            A4 => "A4",
            R1 => "R1",
            C1 => "C1",
            C2 => "C2",
            C3 => "C3",
            C4 => "C4",
            C5 => "C5",
            T1 => "T1",
            B2 => "B2",
            B3 => "B3",
            B4 => "B4",
            LM1 => "LM1",
            LM2 => "LM2",
            LM3 => "LM3",
            LM4 => "LM4",
            LM5 => "LM5",
            LM6 => "LM6",
            LM7 => "LM7",
        }
    }
}

impl fmt::Display for SchemaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemaId {
    type Err = String;
    fn from_str(s: &str) -> Result<SchemaId, String> {
        Self::ALL
            .iter()
            .find(|id| id.name().eq_ignore_ascii_case(s))
            .copied()
            .ok_or_else(|| format!("unknown schema `{}`", s))
    }
}

/// Raw slot values for a schema instantiation.
#[derive(Clone, Debug, Default)]
pub struct Instantiation {
    pub labels: Vec<Label>,
    pub rationals: Vec<Rat>,
    pub formulas: Vec<Formula>,
}

/// A closed instance: optionally a premise (for the conditional schemas) and
/// the conclusion to be checked for validity.
#[derive(Clone, Debug)]
pub struct SchemaInstance {
    pub premise: Option<Formula>,
    pub conclusion: Formula,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InstantiateError {
    #[error("schema {schema} expects {expected} {kind}, got {got}")]
    Arity {
        schema: SchemaId,
        kind: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("side condition violated for {schema}: {message}")]
    SideCondition { schema: SchemaId, message: String },
}

fn arity(
    schema: SchemaId,
    inst: &Instantiation,
    labels: usize,
    rationals: usize,
    formulas: usize,
) -> Result<(), InstantiateError> {
    let checks = [
        ("labels", labels, inst.labels.len()),
        ("rationals", rationals, inst.rationals.len()),
        ("formulas", formulas, inst.formulas.len()),
    ];
    for (kind, expected, got) in checks {
        if expected != got {
            return Err(InstantiateError::Arity {
                schema,
                kind,
                expected,
                got,
            });
        }
    }
    for r in &inst.rationals {
        if r.is_negative() {
            return Err(InstantiateError::SideCondition {
                schema,
                message: format!("negative index {}", r),
            });
        }
    }
    Ok(())
}

fn side(schema: SchemaId, ok: bool, message: &str) -> Result<(), InstantiateError> {
    if ok {
        Ok(())
    } else {
        Err(InstantiateError::SideCondition {
            schema,
            message: message.to_string(),
        })
    }
}

/// Instantiate a schema at concrete labels, indices and formulas.
pub fn instantiate(
    schema: SchemaId,
    inst: &Instantiation,
) -> Result<SchemaInstance, InstantiateError> {
    let one = Rat::one;
    let conclusion = match schema {
        A1 | C1 => {
            arity(schema, inst, 1, 0, 1)?;
            let (a, phi) = (&inst.labels[0], &inst.formulas[0]);
            Formula::l(a.clone(), Rat::zero(), phi.clone())
        }
        A2 | LM3 => {
            arity(schema, inst, 1, 2, 1)?;
            let (a, phi) = (&inst.labels[0], &inst.formulas[0]);
            let (r, s) = (&inst.rationals[0], &inst.rationals[1]);
            Formula::l(a.clone(), r + s, phi.clone()).implies(Formula::l(
                a.clone(),
                r.clone(),
                phi.clone(),
            ))
        }
        A3 | LM5 => {
            arity(schema, inst, 1, 2, 2)?;
            let (a, phi, psi) = (&inst.labels[0], &inst.formulas[0], &inst.formulas[1]);
            let (r, s) = (&inst.rationals[0], &inst.rationals[1]);
            let both = phi.clone().and(psi.clone());
            let only = phi.clone().and(psi.clone().neg());
            Formula::l(a.clone(), r.clone(), both)
                .and(Formula::l(a.clone(), s.clone(), only))
                .implies(Formula::l(a.clone(), r + s, phi.clone()))
        }
        A4 | C4 => {
            arity(schema, inst, 1, 2, 2)?;
            let (a, phi, psi) = (&inst.labels[0], &inst.formulas[0], &inst.formulas[1]);
            let (r, s) = (&inst.rationals[0], &inst.rationals[1]);
            let both = phi.clone().and(psi.clone());
            let only = phi.clone().and(psi.clone().neg());
            Formula::l(a.clone(), r.clone(), both)
                .neg()
                .and(Formula::l(a.clone(), s.clone(), only).neg())
                .implies(Formula::l(a.clone(), r + s, phi.clone()).neg())
        }
        C5 => {
            arity(schema, inst, 1, 2, 2)?;
            let (a, phi, psi) = (&inst.labels[0], &inst.formulas[0], &inst.formulas[1]);
            let (r, s) = (&inst.rationals[0], &inst.rationals[1]);
            let both = phi.clone().and(psi.clone());
            let only = phi.clone().and(psi.clone().neg());
            Formula::m(a.clone(), r.clone(), both)
                .neg()
                .and(Formula::m(a.clone(), s.clone(), only).neg())
                .implies(Formula::m(a.clone(), r + s, phi.clone()).neg())
        }
        C2 => {
            arity(schema, inst, 1, 2, 1)?;
            let (a, phi) = (&inst.labels[0], &inst.formulas[0]);
            let (r, s) = (&inst.rationals[0], &inst.rationals[1]);
            side(schema, s.is_positive(), "requires s > 0")?;
            Formula::l(a.clone(), r + s, phi.clone())
                .implies(Formula::m(a.clone(), r.clone(), phi.clone()).neg())
        }
        C3 => {
            arity(schema, inst, 1, 1, 1)?;
            let (a, phi) = (&inst.labels[0], &inst.formulas[0]);
            let r = &inst.rationals[0];
            Formula::l(a.clone(), r.clone(), phi.clone())
                .neg()
                .implies(Formula::m(a.clone(), r.clone(), phi.clone()))
        }
        R1 | T1 => {
            arity(schema, inst, 1, 1, 2)?;
            let (a, phi, psi) = (&inst.labels[0], &inst.formulas[0], &inst.formulas[1]);
            let r = &inst.rationals[0];
            return Ok(SchemaInstance {
                premise: Some(phi.clone().implies(psi.clone())),
                conclusion: Formula::l(a.clone(), r.clone(), phi.clone())
                    .implies(Formula::l(a.clone(), r.clone(), psi.clone())),
            });
        }
        LM7 => {
            arity(schema, inst, 1, 1, 2)?;
            let (a, phi, psi) = (&inst.labels[0], &inst.formulas[0], &inst.formulas[1]);
            let r = &inst.rationals[0];
            return Ok(SchemaInstance {
                premise: Some(phi.clone().implies(psi.clone())),
                conclusion: Formula::m(a.clone(), r.clone(), psi.clone())
                    .implies(Formula::m(a.clone(), r.clone(), phi.clone())),
            });
        }
        LM1 => {
            arity(schema, inst, 1, 2, 1)?;
            let (a, phi) = (&inst.labels[0], &inst.formulas[0]);
            let (r, s) = (&inst.rationals[0], &inst.rationals[1]);
            side(schema, s.is_positive(), "requires s > 0")?;
            Formula::m(a.clone(), r.clone(), phi.clone())
                .implies(Formula::l(a.clone(), r + s, phi.clone()).neg())
        }
        LM2 => {
            arity(schema, inst, 1, 1, 1)?;
            let (a, phi) = (&inst.labels[0], &inst.formulas[0]);
            let r = &inst.rationals[0];
            Formula::m(a.clone(), r.clone(), phi.clone())
                .neg()
                .implies(Formula::l(a.clone(), r.clone(), phi.clone()))
        }
        LM4 => {
            arity(schema, inst, 1, 2, 1)?;
            let (a, phi) = (&inst.labels[0], &inst.formulas[0]);
            let (r, s) = (&inst.rationals[0], &inst.rationals[1]);
            Formula::m(a.clone(), r.clone(), phi.clone()).implies(Formula::m(
                a.clone(),
                r + s,
                phi.clone(),
            ))
        }
        LM6 => {
            arity(schema, inst, 1, 2, 2)?;
            let (a, phi, psi) = (&inst.labels[0], &inst.formulas[0], &inst.formulas[1]);
            let (r, s) = (&inst.rationals[0], &inst.rationals[1]);
            let both = phi.clone().and(psi.clone());
            let only = phi.clone().and(psi.clone().neg());
            Formula::m(a.clone(), r.clone(), both)
                .and(Formula::m(a.clone(), s.clone(), only))
                .implies(Formula::m(a.clone(), r + s, phi.clone()))
        }
        B2 => {
            arity(schema, inst, 1, 1, 0)?;
            let a = &inst.labels[0];
            let r = &inst.rationals[0];
            side(schema, r <= &one(), "probabilistic index must be at most 1")?;
            Formula::l(a.clone(), r.clone(), Formula::Top)
        }
        B3 => {
            arity(schema, inst, 1, 1, 1)?;
            let (a, phi) = (&inst.labels[0], &inst.formulas[0]);
            let r = &inst.rationals[0];
            side(schema, r <= &one(), "probabilistic index must be at most 1")?;
            Formula::l(a.clone(), r.clone(), phi.clone()).iff(Formula::m(
                a.clone(),
                &one() - r,
                phi.clone().neg(),
            ))
        }
        B4 => {
            arity(schema, inst, 1, 2, 1)?;
            let (a, phi) = (&inst.labels[0], &inst.formulas[0]);
            let (r, s) = (&inst.rationals[0], &inst.rationals[1]);
            side(schema, &(r + s) > &one(), "requires r + s > 1")?;
            side(
                schema,
                r <= &one() && s <= &one(),
                "probabilistic indices must be at most 1",
            )?;
            Formula::l(a.clone(), r.clone(), phi.clone())
                .implies(Formula::l(a.clone(), s.clone(), phi.clone().neg()).neg())
        }
    };
    Ok(SchemaInstance {
        premise: None,
        conclusion,
    })
}

/// Draw an instantiation for `schema` respecting its side conditions, with
/// formula slots biased toward shallow depth and shared subformulas.
pub fn random_instantiation(
    schema: SchemaId,
    labels: &[Label],
    rng: &mut impl Rng,
) -> Instantiation {
    let grid = [
        Rat::zero(),
        Rat::new(1, 4),
        Rat::new(1, 3),
        Rat::new(1, 2),
        Rat::new(2, 3),
        Rat::new(3, 4),
        Rat::one(),
        Rat::new(4, 3),
        Rat::new(3, 2),
        Rat::from_int(2),
    ];
    let pick_r = |rng: &mut dyn rand::RngCore| grid[rng.gen_range(0..grid.len())].clone();
    let pick_pos =
        |rng: &mut dyn rand::RngCore| grid[rng.gen_range(1..grid.len())].clone();
    let pick_unit = |rng: &mut dyn rand::RngCore| {
        let unit = [
            Rat::zero(),
            Rat::new(1, 4),
            Rat::new(1, 3),
            Rat::new(1, 2),
            Rat::new(2, 3),
            Rat::new(3, 4),
            Rat::one(),
        ];
        unit[rng.gen_range(0..unit.len())].clone()
    };
    let label = labels[rng.gen_range(0..labels.len())].clone();
    let gen = FormulaGen {
        labels: labels.to_vec(),
        with_m: true,
        ..FormulaGen::default()
    };
    let (n_rationals, n_formulas) = match schema {
        A1 | C1 => (0, 1),
        A2 | LM3 | LM4 | C2 | LM1 => (2, 1),
        A3 | A4 | C4 | C5 | LM5 | LM6 => (2, 2),
        C3 | LM2 => (1, 1),
        R1 | T1 | LM7 => (1, 2),
        B2 => (1, 0),
        B3 => (1, 1),
        B4 => (2, 1),
    };
    let rationals = match schema {
        C2 | LM1 => vec![pick_r(rng), pick_pos(rng)],
        B2 | B3 => vec![pick_unit(rng)],
        B4 => loop {
            let r = pick_unit(rng);
            let s = pick_unit(rng);
            if &r + &s > Rat::one() {
                break vec![r, s];
            }
        },
        _ => (0..n_rationals).map(|_| pick_r(rng)).collect(),
    };
    let formulas = gen.sample_pool(rng, n_formulas);
    Instantiation {
        labels: vec![label],
        rationals,
        formulas,
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Violation {
    pub sample_index: usize,
    pub model: serde_json::Value,
    pub premise: Option<String>,
    pub conclusion: String,
    pub state: String,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SchemaResult {
    pub schema: SchemaId,
    pub samples: usize,
    /// Samples whose conclusion was actually checked (for conditional
    /// schemas, those whose premise was valid on the sampled model).
    pub scored: usize,
    pub skipped: usize,
    pub violations: usize,
    pub expected_sound: bool,
    pub witnesses: Vec<Violation>,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CampaignReport {
    #[serde(rename = "schemaVersion")]
    pub schema_version: u32,
    pub seed: u64,
    pub samples_per_schema: usize,
    pub schemas: Vec<SchemaResult>,
}

impl CampaignReport {
    /// Violations among schemas expected to be sound.
    pub fn sound_violations(&self) -> usize {
        self.schemas
            .iter()
            .filter(|s| s.expected_sound)
            .map(|s| s.violations)
            .sum()
    }

    /// True when every expectation is met: sound schemas clean, unsound ones
    /// witnessed.
    pub fn as_expected(&self) -> bool {
        self.schemas.iter().all(|s| {
            if s.expected_sound {
                s.violations == 0
            } else {
                s.violations > 0
            }
        })
    }
}

enum SampleOutcome {
    Scored,
    Skipped,
    Violation(Box<Violation>),
}

fn run_sample(schema: SchemaId, seed: u64, index: usize) -> SampleOutcome {
    let mut rng = rng_for_sample(seed, schema as u64, index as u64);
    let kernel = KernelGen::default().sample(&mut rng);
    let labels: Vec<Label> = kernel.labels().iter().cloned().collect();
    let inst = random_instantiation(schema, &labels, &mut rng);
    let instance = instantiate(schema, &inst).expect("sampled within side conditions");
    if let Some(premise) = &instance.premise {
        let den = kernel.denotation(premise).expect("labels are declared");
        if !den.iter().all(|&b| b) {
            return SampleOutcome::Skipped;
        }
    }
    let den = kernel
        .denotation(&instance.conclusion)
        .expect("labels are declared");
    match den.iter().position(|&b| !b) {
        None => SampleOutcome::Scored,
        Some(state) => SampleOutcome::Violation(Box::new(Violation {
            sample_index: index,
            model: kernel.to_json(),
            premise: instance.premise.as_ref().map(|p| p.print()),
            conclusion: instance.conclusion.print(),
            state: kernel.states()[state].clone(),
        })),
    }
}

/// Run `samples` random (model, instantiation) checks per schema. Results are
/// deterministic in `seed` and independent of scheduling; per schema at most
/// `max_witnesses` violating samples are kept in the report.
pub fn soundness_campaign(
    schemas: &[SchemaId],
    samples: usize,
    seed: u64,
    exec: Exec,
) -> CampaignReport {
    let max_witnesses = 3;
    let results = schemas.iter().map(|&schema| {
        let outcomes = map_range(exec, samples, |i| run_sample(schema, seed, i));
        let mut result = SchemaResult {
            schema,
            samples,
            scored: 0,
            skipped: 0,
            violations: 0,
            expected_sound: schema.expected_sound(),
            witnesses: Vec::new(),
        };
        for outcome in outcomes {
            match outcome {
                SampleOutcome::Scored => result.scored += 1,
                SampleOutcome::Skipped => result.skipped += 1,
                SampleOutcome::Violation(w) => {
                    result.scored += 1;
                    result.violations += 1;
                    if result.witnesses.len() < max_witnesses {
                        result.witnesses.push(*w);
                    }
                }
            }
        }
        result
    });
    CampaignReport {
        schema_version: 1,
        seed,
        samples_per_schema: samples,
        schemas: results.collect(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FinitaryRule {
    R2,
    R3,
    T2,
    T3,
    T4,
}

impl FromStr for FinitaryRule {
    type Err = String;
    fn from_str(s: &str) -> Result<FinitaryRule, String> {
        match s.to_ascii_uppercase().as_str() {
            "R2" => Ok(FinitaryRule::R2),
            "R3" => Ok(FinitaryRule::R3),
            "T2" => Ok(FinitaryRule::T2),
            "T3" => Ok(FinitaryRule::T3),
            "T4" => Ok(FinitaryRule::T4),
            other => Err(format!("unknown finitary rule `{}`", other)),
        }
    }
}

/// Finite semantic surrogate for the infinitary rules, checked over every
/// state and label of the model with targets `T` and `~T` and thresholds on
/// the `1/grid_depth` grid.
///
/// For the Archimedean rules the surrogate certifies, with exact arithmetic,
/// that either the conclusion holds or some rational strictly between the
/// rate and the threshold falsifies the infinite premise family. For the
/// finiteness rules it certifies that every total rate is a finite rational,
/// which a finite sum always is.
pub fn finitary_rule_check(rule: FinitaryRule, grid_depth: u32, kernel: &Kernel) -> bool {
    assert!(grid_depth > 0);
    let targets = [Formula::Top, Formula::Top.neg()];
    let thresholds: Vec<Rat> = (0..=2 * grid_depth as i64)
        .map(|k| Rat::new(k, grid_depth as i64))
        .collect();
    for label in kernel.labels().clone() {
        for phi in &targets {
            let den = kernel.denotation(phi).expect("closed formulas");
            for state in 0..kernel.state_count() {
                let rate = kernel.theta(&label, state, &den).expect("declared label");
                match rule {
                    FinitaryRule::R3 | FinitaryRule::T4 => {
                        // Total rates are finite sums of finitely many
                        // rationals; nothing further to witness.
                    }
                    FinitaryRule::R2 | FinitaryRule::T2 => {
                        for s in &thresholds {
                            if &rate >= s {
                                continue; // premise and conclusion both hold
                            }
                            // rate < s: the premise family is falsified at a
                            // rational strictly between the two.
                            let mid = (&rate + s) / Rat::from_int(2);
                            if !(rate < mid && &mid < s) {
                                return false;
                            }
                        }
                    }
                    FinitaryRule::T3 => {
                        for s in &thresholds {
                            if &rate <= s {
                                continue;
                            }
                            let mid = (&rate + s) / Rat::from_int(2);
                            if !(rate > mid && &mid > s) {
                                return false;
                            }
                        }
                    }
                }
            }
        }
    }
    true
}
