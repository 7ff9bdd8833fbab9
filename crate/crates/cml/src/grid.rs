//! The modal grid of a closure: the finite, layered family of modal formulas
//! `X[a,r] chi` with indices on the granularity grid and operands drawn from
//! representative Boolean combinations of lower layers, deduplicated by truth
//! table over the coherent valuations of those layers.
//!
//! The rows of the grid are the axiom-coherent candidate valuations: per
//! `(label, operand)` block, `L`-bits are downward closed with `L[a,0]` true,
//! and the `M`-bits (when present) form the matching upper threshold, at most
//! one grid step above the lower one. Threshold monotonicity along operand
//! implication is enforced across blocks of the same label. Everything beyond
//! that is left to the rate-feasibility check.

use std::collections::HashMap;

use num::ToPrimitive;
use thiserror::Error;

use crate::formula::{ClosureSpec, Formula, Label};
use crate::rational::Rat;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ModalOp {
    L,
    M,
}

/// Enumeration limits. Exceeding a cap is an explicit error, never silent
/// truncation.
#[derive(Clone, Debug)]
pub struct Caps {
    pub max_layer_atoms: usize,
    pub max_atoms: usize,
}

impl Default for Caps {
    fn default() -> Caps {
        Caps {
            max_layer_atoms: 64,
            max_atoms: 4096,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GridError {
    #[error("layer {layer} needs {size} grid atoms, exceeding the cap of {cap}")]
    LayerCapExceeded { layer: u32, size: usize, cap: usize },
    #[error("layer {layer} yields {size} candidate valuations, exceeding the cap of {cap}")]
    AtomCapExceeded { layer: u32, size: usize, cap: usize },
    #[error("granularity or index bound too large to enumerate")]
    TooLarge,
    #[error("formula is outside the closure: {0}")]
    NotInClosure(String),
}

/// One modal formula of the grid, `op[label,index] operand`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridAtom {
    pub op: ModalOp,
    /// Position into [`Grid::labels`].
    pub label: usize,
    /// Position into [`Grid::indices`].
    pub index: usize,
    /// Position into [`Grid::reps`].
    pub operand: usize,
}

/// A representative operand class: one canonical formula per distinct truth
/// table over the coherent rows of the layers below it.
#[derive(Clone, Debug)]
pub struct Rep {
    /// Modal depth of the class; level-0 is the class of `T`.
    pub level: u32,
    /// Truth table over the final rows.
    pub table: Vec<bool>,
    pub formula: Formula,
}

/// Upper rate threshold of a block: least grid index whose `M`-bit is true,
/// or no true `M`-bit at all.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Upper {
    At(usize),
    Inf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Threshold {
    /// Greatest grid index whose `L`-bit is true.
    x: usize,
    w: Upper,
}

#[derive(Debug)]
pub struct Grid {
    spec: ClosureSpec,
    with_m: bool,
    indices: Vec<Rat>,
    labels: Vec<Label>,
    atoms: Vec<GridAtom>,
    atom_formulas: Vec<Formula>,
    /// Atom index ranges per depth 1..=md.
    layers: Vec<std::ops::Range<usize>>,
    reps: Vec<Rep>,
    rep_by_table: HashMap<Vec<bool>, usize>,
    rows: Vec<Vec<bool>>,
    /// Per (label, rep): positions of its L- and M-atoms, by ascending index.
    blocks: HashMap<(usize, usize), Block>,
}

#[derive(Clone, Debug, Default)]
struct Block {
    l_atoms: Vec<usize>,
    m_atoms: Vec<usize>,
}

/// Which operand classes each layer carries.
enum OperandPlan<'a> {
    /// Every Boolean class over the lower layers: the paper-shaped closure.
    /// Explodes combinatorially; the caps keep it honest.
    Full,
    /// Only the classes of modal operands occurring in the seed formulas.
    /// Sound and complete for deciding those seeds, and small.
    Directed(&'a [Formula]),
}

impl Grid {
    /// The full closure grid: representatives are all Boolean classes.
    pub fn build(spec: &ClosureSpec, with_m: bool, caps: &Caps) -> Result<Grid, GridError> {
        Grid::build_impl(spec, with_m, caps, OperandPlan::Full)
    }

    /// The subclosure grid directed by `seeds`: operand representatives are
    /// the classes of the modal operands occurring in the seeds. Deciding or
    /// synthesizing for the seeds over this grid agrees with the full
    /// closure, since candidate coherence and rate feasibility constrain
    /// exactly the carried classes.
    pub fn build_directed(
        seeds: &[Formula],
        spec: &ClosureSpec,
        with_m: bool,
        caps: &Caps,
    ) -> Result<Grid, GridError> {
        Grid::build_impl(spec, with_m, caps, OperandPlan::Directed(seeds))
    }

    fn build_impl(
        spec: &ClosureSpec,
        with_m: bool,
        caps: &Caps,
        plan: OperandPlan,
    ) -> Result<Grid, GridError> {
        let n = spec.granularity.to_u64().ok_or(GridError::TooLarge)?;
        if n == 0 {
            return Err(GridError::TooLarge);
        }
        let step = Rat::from_big(1.into(), (n as i64).into());
        let quotient = &spec.max_index / &step;
        if !quotient.is_integer() {
            return Err(GridError::NotInClosure(
                "index bound is not on the granularity grid".into(),
            ));
        }
        let steps_to_max = quotient.numer().to_u64().ok_or(GridError::TooLarge)?;
        if steps_to_max > 10_000 {
            return Err(GridError::TooLarge);
        }
        let indices: Vec<Rat> = (0..=steps_to_max)
            .map(|k| &step * &Rat::from_int(k as i64))
            .collect();
        let labels: Vec<Label> = spec.actions.iter().cloned().collect();
        let ops: &[ModalOp] = if with_m {
            &[ModalOp::L, ModalOp::M]
        } else {
            &[ModalOp::L]
        };

        let mut grid = Grid {
            spec: spec.clone(),
            with_m,
            indices,
            labels,
            atoms: Vec::new(),
            atom_formulas: Vec::new(),
            layers: Vec::new(),
            reps: vec![Rep {
                level: 0,
                table: vec![true],
                formula: Formula::Top,
            }],
            rep_by_table: HashMap::new(),
            rows: vec![vec![]],
            blocks: HashMap::new(),
        };

        grid.rep_by_table.insert(vec![true], 0);
        let seed_operands: Vec<(Formula, u32)> = match &plan {
            OperandPlan::Full => Vec::new(),
            OperandPlan::Directed(seeds) => {
                let mut out = Vec::new();
                for seed in seeds.iter() {
                    collect_modal_operands(seed, &mut out);
                }
                out.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
                out.dedup();
                out
            }
        };

        for depth in 1..=spec.modal_depth {
            let operands: Vec<usize> = (0..grid.reps.len())
                .filter(|&i| grid.reps[i].level == depth - 1)
                .collect();
            let layer_start = grid.atoms.len();
            for &label in &(0..grid.labels.len()).collect::<Vec<_>>() {
                for &rep in &operands {
                    let block = grid.blocks.entry((label, rep)).or_default();
                    for op in ops {
                        for index in 0..grid.indices.len() {
                            match op {
                                ModalOp::L => block.l_atoms.push(grid.atoms.len()),
                                ModalOp::M => block.m_atoms.push(grid.atoms.len()),
                            }
                            grid.atoms.push(GridAtom {
                                op: *op,
                                label,
                                index,
                                operand: rep,
                            });
                        }
                    }
                }
            }
            let layer = layer_start..grid.atoms.len();
            let layer_size = layer.len();
            if layer_size > caps.max_layer_atoms {
                return Err(GridError::LayerCapExceeded {
                    layer: depth,
                    size: layer_size,
                    cap: caps.max_layer_atoms,
                });
            }
            for i in layer.clone() {
                grid.atom_formulas.push(grid.make_atom_formula(i));
            }
            grid.layers.push(layer);

            grid.extend_rows(&operands, depth, caps)?;
            grid.rep_by_table = grid
                .reps
                .iter()
                .enumerate()
                .map(|(i, rep)| (rep.table.clone(), i))
                .collect();

            if depth < spec.modal_depth {
                match &plan {
                    OperandPlan::Full => grid.enumerate_reps(depth, caps)?,
                    OperandPlan::Directed(_) => grid.add_seed_reps(&seed_operands, depth)?,
                }
            }
        }
        Ok(grid)
    }

    /// Register the classes of seed operands of depth at most `level` that
    /// are not yet representable; they feed the next layer's atom blocks.
    fn add_seed_reps(
        &mut self,
        seed_operands: &[(Formula, u32)],
        level: u32,
    ) -> Result<(), GridError> {
        for (operand, md) in seed_operands {
            if *md > level {
                continue;
            }
            let table = self.truth_vector(operand)?;
            if table.iter().all(|&b| !b) || self.rep_by_table.contains_key(&table) {
                continue;
            }
            self.rep_by_table.insert(table.clone(), self.reps.len());
            self.reps.push(Rep {
                level,
                table,
                formula: operand.clone(),
            });
        }
        Ok(())
    }

    fn make_atom_formula(&self, atom: usize) -> Formula {
        let a = &self.atoms[atom];
        let label = self.labels[a.label].clone();
        let index = self.indices[a.index].clone();
        let arg = self.reps[a.operand].formula.clone();
        match a.op {
            ModalOp::L => Formula::l(label, index, arg),
            ModalOp::M => Formula::m(label, index, arg),
        }
    }

    /// Allowed threshold pairs: the L-bits fix a greatest true index `x`; the
    /// matching upper bound sits at `x` or one grid step above, running off
    /// the grid only at the top.
    fn allowed_thresholds(&self) -> Vec<Threshold> {
        let top = self.indices.len() - 1;
        let mut out = Vec::new();
        for x in 0..=top {
            if !self.with_m {
                out.push(Threshold { x, w: Upper::Inf });
                continue;
            }
            if x < top {
                out.push(Threshold { x, w: Upper::At(x) });
                out.push(Threshold {
                    x,
                    w: Upper::At(x + 1),
                });
            } else {
                out.push(Threshold { x, w: Upper::At(x) });
                out.push(Threshold { x, w: Upper::Inf });
            }
        }
        out
    }

    fn threshold_of_block(&self, row: &[bool], label: usize, rep: usize) -> Threshold {
        let block = &self.blocks[&(label, rep)];
        let x = block
            .l_atoms
            .iter()
            .enumerate()
            .filter(|(_, &a)| row[a])
            .map(|(i, _)| i)
            .max()
            .expect("L[a,0] bit is always true");
        let w = block
            .m_atoms
            .iter()
            .enumerate()
            .find(|(_, &a)| row[a])
            .map(|(i, _)| Upper::At(i))
            .unwrap_or(Upper::Inf);
        Threshold { x, w }
    }

    fn table_subset(a: &[bool], b: &[bool]) -> bool {
        a.iter().zip(b).all(|(x, y)| !*x || *y)
    }

    fn extend_rows(
        &mut self,
        new_reps: &[usize],
        depth: u32,
        caps: &Caps,
    ) -> Result<(), GridError> {
        let allowed = self.allowed_thresholds();
        // Older blocks of each label, for cross-block monotonicity.
        let old_blocks: Vec<(usize, usize)> = self
            .blocks
            .keys()
            .filter(|(_, rep)| !new_reps.contains(rep))
            .cloned()
            .collect();

        let mut new_rows: Vec<Vec<bool>> = Vec::new();
        let old_rows = std::mem::take(&mut self.rows);
        let mut lift_parent: Vec<usize> = Vec::new();

        for (row_idx, row) in old_rows.iter().enumerate() {
            // Per label, enumerate the monotone assignments for the new blocks.
            let mut per_label: Vec<Vec<Vec<Threshold>>> = Vec::new();
            for label in 0..self.labels.len() {
                let olds: Vec<(usize, Threshold)> = old_blocks
                    .iter()
                    .filter(|(l, _)| *l == label)
                    .map(|&(_, rep)| (rep, self.threshold_of_block(row, label, rep)))
                    .collect();
                let mut assignments: Vec<Vec<Threshold>> = Vec::new();
                let mut partial: Vec<Threshold> = Vec::new();
                self.assign_blocks(new_reps, &olds, &allowed, &mut partial, &mut assignments);
                per_label.push(assignments);
            }
            // Cartesian product across labels.
            let mut combos: Vec<Vec<Threshold>> = vec![Vec::new()];
            for assignments in &per_label {
                let mut next = Vec::with_capacity(combos.len() * assignments.len());
                for combo in &combos {
                    for assignment in assignments {
                        let mut c = combo.clone();
                        c.extend_from_slice(assignment);
                        next.push(c);
                    }
                }
                if next.len() > caps.max_atoms {
                    return Err(GridError::AtomCapExceeded {
                        layer: depth,
                        size: next.len(),
                        cap: caps.max_atoms,
                    });
                }
                combos = next;
            }
            for combo in combos {
                let mut bits = row.clone();
                // combo is ordered label-major then new_reps order, matching
                // the atom layout of this layer.
                let mut it = combo.iter();
                for label in 0..self.labels.len() {
                    for &rep in new_reps {
                        let thr = it.next().unwrap();
                        let block = &self.blocks[&(label, rep)];
                        for (i, &atom) in block.l_atoms.iter().enumerate() {
                            debug_assert_eq!(bits.len(), atom);
                            bits.push(i <= thr.x);
                        }
                        for (i, &atom) in block.m_atoms.iter().enumerate() {
                            debug_assert_eq!(bits.len(), atom);
                            bits.push(match thr.w {
                                Upper::At(w) => i >= w,
                                Upper::Inf => false,
                            });
                        }
                    }
                }
                debug_assert_eq!(bits.len(), self.atoms.len());
                new_rows.push(bits);
                lift_parent.push(row_idx);
                if new_rows.len() > caps.max_atoms {
                    return Err(GridError::AtomCapExceeded {
                        layer: depth,
                        size: new_rows.len(),
                        cap: caps.max_atoms,
                    });
                }
            }
        }

        for rep in &mut self.reps {
            rep.table = lift_parent.iter().map(|&p| rep.table[p]).collect();
        }
        self.rows = new_rows;
        Ok(())
    }

    /// DFS over the new blocks of one label, respecting threshold
    /// monotonicity along table inclusion against both the already assigned
    /// new blocks and the fixed older blocks.
    fn assign_blocks(
        &self,
        new_reps: &[usize],
        olds: &[(usize, Threshold)],
        allowed: &[Threshold],
        partial: &mut Vec<Threshold>,
        out: &mut Vec<Vec<Threshold>>,
    ) {
        if partial.len() == new_reps.len() {
            out.push(partial.clone());
            return;
        }
        let rep = new_reps[partial.len()];
        let rep_table = &self.reps[rep].table;
        'next: for thr in allowed {
            for (other, other_thr) in olds.iter().map(|(o, t)| (*o, *t)).chain(
                new_reps[..partial.len()]
                    .iter()
                    .zip(partial.iter())
                    .map(|(o, t)| (*o, *t)),
            ) {
                let other_table = &self.reps[other].table;
                if Self::table_subset(rep_table, other_table)
                    && (thr.x > other_thr.x || thr.w > other_thr.w)
                {
                    continue 'next;
                }
                if Self::table_subset(other_table, rep_table)
                    && (other_thr.x > thr.x || other_thr.w > thr.w)
                {
                    continue 'next;
                }
            }
            partial.push(*thr);
            self.assign_blocks(new_reps, olds, allowed, partial, out);
            partial.pop();
        }
    }

    /// Enumerate the operand classes that become expressible at `level`:
    /// every distinct nonempty truth table over the current rows that does
    /// not factor through the rows of the previous level.
    fn enumerate_reps(&mut self, level: u32, caps: &Caps) -> Result<(), GridError> {
        let rows = self.rows.len();
        if rows >= 24 {
            return Err(GridError::LayerCapExceeded {
                layer: level + 1,
                size: usize::MAX,
                cap: caps.max_layer_atoms,
            });
        }
        // A table factors through lower levels iff it is constant on groups of
        // rows that agree on all atoms below this level's layer.
        let prior_atoms = self.layers[..self.layers.len() - 1]
            .last()
            .map(|r| r.end)
            .unwrap_or(0);
        let mut group_of_row: Vec<usize> = Vec::with_capacity(rows);
        let mut groups: HashMap<Vec<bool>, usize> = HashMap::new();
        for row in &self.rows {
            let key: Vec<bool> = row[..prior_atoms].to_vec();
            let next = groups.len();
            group_of_row.push(*groups.entry(key).or_insert(next));
        }

        let ops = if self.with_m { 2 } else { 1 };
        let per_rep_atoms = ops * self.labels.len() * self.indices.len();
        let minterms: Vec<Formula> = self.rows.iter().map(|row| self.minterm(row)).collect();

        let mut count = 0usize;
        for mask in 1u64..(1u64 << rows) {
            let table: Vec<bool> = (0..rows).map(|i| mask >> i & 1 == 1).collect();
            // Skip tables constant on lower-level groups: those classes were
            // already represented at an earlier level.
            let mut constant_on_groups = true;
            let mut seen: HashMap<usize, bool> = HashMap::new();
            for (i, &b) in table.iter().enumerate() {
                match seen.get(&group_of_row[i]) {
                    None => {
                        seen.insert(group_of_row[i], b);
                    }
                    Some(&prev) if prev != b => {
                        constant_on_groups = false;
                        break;
                    }
                    _ => {}
                }
            }
            if constant_on_groups {
                continue;
            }
            count += 1;
            if count * per_rep_atoms > caps.max_layer_atoms {
                return Err(GridError::LayerCapExceeded {
                    layer: level + 1,
                    size: count * per_rep_atoms,
                    cap: caps.max_layer_atoms,
                });
            }
            let formula = table
                .iter()
                .enumerate()
                .filter(|(_, &b)| b)
                .map(|(i, _)| minterms[i].clone())
                .reduce(|a, b| a.or(b))
                .expect("nonempty table");
            self.reps.push(Rep {
                level,
                table,
                formula,
            });
        }
        Ok(())
    }

    fn minterm(&self, row: &[bool]) -> Formula {
        row.iter()
            .enumerate()
            .map(|(i, &b)| {
                let f = self.atom_formulas[i].clone();
                if b {
                    f
                } else {
                    f.neg()
                }
            })
            .reduce(|a, b| a.and(b))
            .expect("at least one grid atom at depth >= 1")
    }

    pub fn spec(&self) -> &ClosureSpec {
        &self.spec
    }

    pub fn with_m(&self) -> bool {
        self.with_m
    }

    pub fn indices(&self) -> &[Rat] {
        &self.indices
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn atoms(&self) -> &[GridAtom] {
        &self.atoms
    }

    pub fn atom_formula(&self, atom: usize) -> &Formula {
        &self.atom_formulas[atom]
    }

    pub fn reps(&self) -> &[Rep] {
        &self.reps
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, i: usize) -> &[bool] {
        &self.rows[i]
    }

    /// The grid atoms as formulas, one layer per depth; depth 0 is `{T}`.
    pub fn layer_formulas(&self) -> Vec<Vec<Formula>> {
        let mut out = vec![vec![Formula::Top]];
        for layer in &self.layers {
            out.push(layer.clone().map(|i| self.atom_formulas[i].clone()).collect());
        }
        out
    }

    /// Truth of `phi` at every candidate row, resolving modal subformulas
    /// through the grid. Errors when `phi` falls outside the closure.
    pub fn truth_vector(&self, phi: &Formula) -> Result<Vec<bool>, GridError> {
        let mut memo = HashMap::new();
        self.tv(phi, &mut memo)
    }

    fn tv(
        &self,
        phi: &Formula,
        memo: &mut HashMap<Formula, Vec<bool>>,
    ) -> Result<Vec<bool>, GridError> {
        if let Some(hit) = memo.get(phi) {
            return Ok(hit.clone());
        }
        let result = match phi {
            Formula::Top => vec![true; self.rows.len()],
            Formula::Neg(p) => {
                let v = self.tv(p, memo)?;
                v.into_iter().map(|b| !b).collect()
            }
            Formula::And(p, q) => {
                let vp = self.tv(p, memo)?;
                let vq = self.tv(q, memo)?;
                vp.into_iter().zip(vq).map(|(a, b)| a && b).collect()
            }
            Formula::L(a, r, p) | Formula::M(a, r, p) => {
                let op = if matches!(phi, Formula::L(..)) {
                    ModalOp::L
                } else {
                    ModalOp::M
                };
                if op == ModalOp::M && !self.with_m {
                    return Err(GridError::NotInClosure(
                        "M operator in an L-only closure".into(),
                    ));
                }
                let label = self
                    .labels
                    .binary_search(a)
                    .map_err(|_| GridError::NotInClosure(format!("label `{}` not in closure", a)))?;
                let index = self
                    .indices
                    .binary_search(r)
                    .map_err(|_| GridError::NotInClosure(format!("index {} not on the grid", r)))?;
                let inner = self.tv(p, memo)?;
                if inner.iter().all(|b| !b) {
                    // Contradictory operand: the rate into it is exactly 0.
                    let forced = match op {
                        ModalOp::L => index == 0,
                        ModalOp::M => true,
                    };
                    vec![forced; self.rows.len()]
                } else {
                    let rep = *self.rep_by_table.get(&inner).ok_or_else(|| {
                        GridError::NotInClosure(format!(
                            "modal depth of `{}` exceeds the closure",
                            phi
                        ))
                    })?;
                    let block = self
                        .blocks
                        .get(&(label, rep))
                        .expect("every rep below the top layer carries a full atom block");
                    let atom = match op {
                        ModalOp::L => block.l_atoms[index],
                        ModalOp::M => block.m_atoms[index],
                    };
                    (0..self.rows.len()).map(|i| self.rows[i][atom]).collect()
                }
            }
        };
        memo.insert(phi.clone(), result.clone());
        Ok(result)
    }
}

/// Every operand of a modal node in `phi`, with its own modal depth,
/// including operands nested inside other operands.
fn collect_modal_operands(phi: &Formula, out: &mut Vec<(Formula, u32)>) {
    match phi {
        Formula::Top => {}
        Formula::Neg(p) => collect_modal_operands(p, out),
        Formula::And(p, q) => {
            collect_modal_operands(p, out);
            collect_modal_operands(q, out);
        }
        Formula::L(_, _, p) | Formula::M(_, _, p) => {
            out.push(((**p).clone(), p.modal_depth()));
            collect_modal_operands(p, out);
        }
    }
}

/// The grid atoms as layered formulas (depth 0 is `{T}`), per the closure of
/// `spec`.
pub fn modal_grid(
    spec: &ClosureSpec,
    with_m: bool,
    caps: &Caps,
) -> Result<Vec<Vec<Formula>>, GridError> {
    Ok(Grid::build(spec, with_m, caps)?.layer_formulas())
}

/// A deterministic, duplicate-free witness family: modal atoms over
/// previously enumerated operands plus their negations, by depth, then
/// operand order, then label, then grid index, L before M. Truncated at
/// `cap`; the flag reports whether anything was cut.
pub fn enumerate_family(
    depth_bound: u32,
    spec: &ClosureSpec,
    with_m: bool,
    cap: usize,
) -> (Vec<Formula>, bool) {
    assert!(cap > 0, "cap must be positive");
    let n = spec.granularity.to_u64().unwrap_or(u64::MAX);
    let mut indices = Vec::new();
    if n != u64::MAX {
        let step = Rat::from_big(1.into(), (n as i64).into());
        let mut k = 0i64;
        loop {
            let r = &step * &Rat::from_int(k);
            if r > spec.max_index {
                break;
            }
            indices.push(r);
            k += 1;
        }
    }
    let labels: Vec<Label> = spec.actions.iter().cloned().collect();
    let mut out: Vec<Formula> = Vec::new();
    let mut truncated = false;
    let mut push = |out: &mut Vec<Formula>, f: Formula| -> bool {
        if out.len() >= cap {
            truncated = true;
            return false;
        }
        out.push(f);
        true
    };
    'emit: {
        if !push(&mut out, Formula::Top) || !push(&mut out, Formula::Top.neg()) {
            break 'emit;
        }
        // At each depth, the fresh operands are exactly the formulas emitted
        // at the previous depth; reusing older ones would duplicate.
        let mut operands = 0..out.len();
        for _ in 1..=depth_bound {
            let emitted_from = out.len();
            for i in operands.clone() {
                let operand = out[i].clone();
                for label in &labels {
                    for r in &indices {
                        let l = Formula::l(label.clone(), r.clone(), operand.clone());
                        if !push(&mut out, l.clone()) || !push(&mut out, l.neg()) {
                            break 'emit;
                        }
                        if with_m {
                            let m = Formula::m(label.clone(), r.clone(), operand.clone());
                            if !push(&mut out, m.clone()) || !push(&mut out, m.neg()) {
                                break 'emit;
                            }
                        }
                    }
                }
            }
            if out.len() == emitted_from {
                break; // no labels or indices: nothing deeper to build
            }
            operands = emitted_from..out.len();
        }
    }
    (out, truncated)
}
