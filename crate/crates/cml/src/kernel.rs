//! Finite-support labelled Markov kernels and the exact model-checking
//! semantics. A kernel assigns to every label and source state a rate measure
//! over the (finite) state space; the sigma-algebra is the full powerset, so
//! measurability is automatic and all sums are finite.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::{Formula, Label};
use crate::rational::Rat;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("negative rate `{rate}` on ({label},{from},{to})")]
    NegativeRate {
        label: String,
        from: String,
        to: String,
        rate: String,
    },
    #[error("malformed rational `{0}`")]
    MalformedRational(String),
    #[error("model schema violation: {0}")]
    Schema(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

/// A set of states of a fixed kernel, as a dense membership vector.
pub type StateSet = Vec<bool>;

pub fn set_complement(set: &StateSet) -> StateSet {
    set.iter().map(|b| !b).collect()
}

pub fn set_intersect(a: &StateSet, b: &StateSet) -> StateSet {
    a.iter().zip(b).map(|(x, y)| *x && *y).collect()
}

/// Finite-state labelled rate matrix. Rates are stored sparsely; a missing
/// entry is rate zero and stored entries are strictly positive.
#[derive(Clone, PartialEq, Eq)]
pub struct Kernel {
    states: Vec<String>,
    labels: BTreeSet<Label>,
    rates: BTreeMap<Label, BTreeMap<usize, BTreeMap<usize, Rat>>>,
}

impl fmt::Debug for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Kernel({} states, {} labels)", self.states.len(), self.labels.len())
    }
}

impl Kernel {
    /// Build a kernel from declarations, validating every rate entry.
    /// States are kept in sorted order; zero rates are dropped.
    pub fn from_parts(
        states: Vec<String>,
        labels: Vec<Label>,
        entries: Vec<(Label, String, String, Rat)>,
    ) -> Result<Kernel, ModelError> {
        let mut sorted = states;
        sorted.sort();
        let before = sorted.len();
        sorted.dedup();
        if sorted.len() != before {
            return Err(ModelError::Schema("duplicate state id".into()));
        }
        if sorted.is_empty() {
            return Err(ModelError::Schema("a kernel needs at least one state".into()));
        }
        for s in &sorted {
            if s.is_empty() {
                return Err(ModelError::Schema("empty state id".into()));
            }
        }
        let labels: BTreeSet<Label> = labels.into_iter().collect();
        let index: BTreeMap<&str, usize> = sorted
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i))
            .collect();
        let mut rates: BTreeMap<Label, BTreeMap<usize, BTreeMap<usize, Rat>>> = BTreeMap::new();
        for (label, from, to, rate) in entries {
            if !labels.contains(&label) {
                return Err(ModelError::UnknownLabel(label.to_string()));
            }
            let &fi = index
                .get(from.as_str())
                .ok_or_else(|| ModelError::UnknownState(from.clone()))?;
            let &ti = index
                .get(to.as_str())
                .ok_or_else(|| ModelError::UnknownState(to.clone()))?;
            if rate.is_negative() {
                return Err(ModelError::NegativeRate {
                    label: label.to_string(),
                    from,
                    to,
                    rate: rate.to_string(),
                });
            }
            if rate.is_zero() {
                continue;
            }
            let prev = rates
                .entry(label.clone())
                .or_default()
                .entry(fi)
                .or_default()
                .insert(ti, rate);
            if prev.is_some() {
                return Err(ModelError::Schema(format!(
                    "duplicate rate entry ({},{},{})",
                    label, from, to
                )));
            }
        }
        Ok(Kernel {
            states: sorted,
            labels,
            rates,
        })
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn labels(&self) -> &BTreeSet<Label> {
        &self.labels
    }

    pub fn state_index(&self, id: &str) -> Result<usize, ModelError> {
        self.states
            .binary_search_by(|s| s.as_str().cmp(id))
            .map_err(|_| ModelError::UnknownState(id.to_string()))
    }

    pub fn rate(&self, label: &Label, from: usize, to: usize) -> Rat {
        self.rates
            .get(label)
            .and_then(|m| m.get(&from))
            .and_then(|m| m.get(&to))
            .cloned()
            .unwrap_or_else(Rat::zero)
    }

    /// Total rate from `from` into the state set `into` under `label`: the
    /// exact finite sum of the individual rates.
    pub fn theta(&self, label: &Label, from: usize, into: &StateSet) -> Result<Rat, ModelError> {
        if !self.labels.contains(label) {
            return Err(ModelError::UnknownLabel(label.to_string()));
        }
        if from >= self.states.len() || into.len() != self.states.len() {
            return Err(ModelError::Schema("state index out of range".into()));
        }
        let Some(row) = self.rates.get(label).and_then(|m| m.get(&from)) else {
            return Ok(Rat::zero());
        };
        Ok(row
            .iter()
            .filter(|(to, _)| into[**to])
            .map(|(_, r)| r)
            .sum())
    }

    /// Total outgoing rate under `label`.
    pub fn theta_total(&self, label: &Label, from: usize) -> Result<Rat, ModelError> {
        self.theta(label, from, &vec![true; self.states.len()])
    }

    fn check_labels(&self, phi: &Formula) -> Result<(), ModelError> {
        match phi {
            Formula::Top => Ok(()),
            Formula::Neg(p) => self.check_labels(p),
            Formula::And(p, q) => {
                self.check_labels(p)?;
                self.check_labels(q)
            }
            Formula::L(a, _, p) | Formula::M(a, _, p) => {
                if !self.labels.contains(a) {
                    return Err(ModelError::UnknownLabel(a.to_string()));
                }
                self.check_labels(p)
            }
        }
    }

    /// The set of states satisfying `phi`, computed bottom-up with one
    /// evaluation per distinct subformula.
    pub fn denotation(&self, phi: &Formula) -> Result<StateSet, ModelError> {
        self.check_labels(phi)?;
        let mut memo: HashMap<Formula, StateSet> = HashMap::new();
        Ok(self.denote(phi, &mut memo))
    }

    fn denote(&self, phi: &Formula, memo: &mut HashMap<Formula, StateSet>) -> StateSet {
        if let Some(hit) = memo.get(phi) {
            return hit.clone();
        }
        let result = match phi {
            Formula::Top => vec![true; self.states.len()],
            Formula::Neg(p) => set_complement(&self.denote(p, memo)),
            Formula::And(p, q) => {
                let dp = self.denote(p, memo);
                let dq = self.denote(q, memo);
                set_intersect(&dp, &dq)
            }
            Formula::L(a, r, p) => {
                let dp = self.denote(p, memo);
                (0..self.states.len())
                    .map(|m| &self.theta(a, m, &dp).expect("checked labels") >= r)
                    .collect()
            }
            Formula::M(a, r, p) => {
                let dp = self.denote(p, memo);
                (0..self.states.len())
                    .map(|m| &self.theta(a, m, &dp).expect("checked labels") <= r)
                    .collect()
            }
        };
        memo.insert(phi.clone(), result.clone());
        result
    }

    /// Disjoint union; states of the left component get prefix `0:`, of the
    /// right `1:`, and all cross-component rates are zero.
    pub fn disjoint_union(&self, other: &Kernel) -> Kernel {
        let tag = |prefix: &str, k: &Kernel| -> Vec<String> {
            k.states.iter().map(|s| format!("{}{}", prefix, s)).collect()
        };
        let states: Vec<String> = tag("0:", self).into_iter().chain(tag("1:", other)).collect();
        let labels: Vec<Label> = self.labels.union(&other.labels).cloned().collect();
        let mut entries = Vec::new();
        for (prefix, k) in [("0:", self), ("1:", other)] {
            for (label, rows) in &k.rates {
                for (from, row) in rows {
                    for (to, rate) in row {
                        entries.push((
                            label.clone(),
                            format!("{}{}", prefix, k.states[*from]),
                            format!("{}{}", prefix, k.states[*to]),
                            rate.clone(),
                        ));
                    }
                }
            }
        }
        Kernel::from_parts(states, labels, entries).expect("union of valid kernels is valid")
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut rates = serde_json::Map::new();
        for (label, rows) in &self.rates {
            let mut by_src = serde_json::Map::new();
            for (from, row) in rows {
                let mut by_dst = serde_json::Map::new();
                for (to, rate) in row {
                    by_dst.insert(
                        self.states[*to].clone(),
                        serde_json::Value::String(rate.to_string()),
                    );
                }
                by_src.insert(self.states[*from].clone(), serde_json::Value::Object(by_dst));
            }
            rates.insert(label.to_string(), serde_json::Value::Object(by_src));
        }
        serde_json::json!({
            "states": self.states,
            "labels": self.labels.iter().map(|l| l.to_string()).collect::<Vec<_>>(),
            "rates": serde_json::Value::Object(rates),
        })
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Kernel, ModelError> {
        let file: ModelFile = serde_json::from_value(value.clone())?;
        file.into_kernel()
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    states: Vec<String>,
    labels: Vec<String>,
    #[serde(default)]
    rates: BTreeMap<String, BTreeMap<String, BTreeMap<String, serde_json::Value>>>,
}

impl ModelFile {
    fn into_kernel(self) -> Result<Kernel, ModelError> {
        for name in &self.labels {
            if !Label::is_valid_name(name) {
                return Err(ModelError::Schema(format!("invalid label name `{}`", name)));
            }
        }
        let labels: Vec<Label> = self.labels.iter().map(|l| Label::new(l.clone())).collect();
        let mut entries = Vec::new();
        for (label, by_src) in self.rates {
            for (from, by_dst) in by_src {
                for (to, lit) in by_dst {
                    let rate = parse_rate(&lit)?;
                    entries.push((Label::new(label.clone()), from.clone(), to, rate));
                }
            }
        }
        Kernel::from_parts(self.states, labels, entries)
    }
}

fn parse_rate(lit: &serde_json::Value) -> Result<Rat, ModelError> {
    match lit {
        serde_json::Value::String(s) => {
            Rat::parse(s).map_err(|_| ModelError::MalformedRational(s.clone()))
        }
        serde_json::Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(Rat::from_int(i))
            } else {
                Err(ModelError::MalformedRational(n.to_string()))
            }
        }
        other => Err(ModelError::MalformedRational(other.to_string())),
    }
}

pub fn load_model(path: impl AsRef<Path>) -> Result<Kernel, ModelError> {
    let text = std::fs::read_to_string(path)?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    Kernel::from_json(&value)
}

pub fn save_model(kernel: &Kernel, path: impl AsRef<Path>) -> Result<(), ModelError> {
    let text = serde_json::to_string_pretty(&kernel.to_json())?;
    std::fs::write(path, text)?;
    Ok(())
}

/// A kernel together with a distinguished state.
#[derive(Clone, Debug)]
pub struct Process {
    pub kernel: Arc<Kernel>,
    pub state: usize,
}

impl Process {
    pub fn new(kernel: Arc<Kernel>, state_id: &str) -> Result<Process, ModelError> {
        let state = kernel.state_index(state_id)?;
        Ok(Process { kernel, state })
    }

    pub fn from_index(kernel: Arc<Kernel>, state: usize) -> Process {
        assert!(state < kernel.state_count());
        Process { kernel, state }
    }

    pub fn state_id(&self) -> &str {
        &self.kernel.states()[self.state]
    }
}

impl PartialEq for Process {
    fn eq(&self, other: &Self) -> bool {
        self.state == other.state && *self.kernel == *other.kernel
    }
}

impl Eq for Process {}

/// Satisfaction of `phi` at the process, per the five semantic clauses.
pub fn sat(process: &Process, phi: &Formula) -> Result<bool, ModelError> {
    let den = process.kernel.denotation(phi)?;
    Ok(den[process.state])
}
