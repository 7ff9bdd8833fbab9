//! Seed-deterministic random kernels and formulas, shared by the soundness
//! campaigns and the randomized test suites.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::formula::{Formula, Label};
use crate::kernel::Kernel;
use crate::rational::Rat;

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derive an independent stream for a (campaign, schema, sample) coordinate,
/// so results do not depend on scheduling.
pub fn rng_for_sample(seed: u64, group: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(
        seed.wrapping_mul(0x9E37_79B9_7F4A_7C15)
            ^ group.wrapping_mul(0xBF58_476D_1CE4_E5B9)
            ^ index.wrapping_mul(0x94D0_49BB_1331_11EB),
    )
}

/// Random sparse kernels: at most `max_states` states, rates with bounded
/// denominator, each potential edge present with probability `density`.
#[derive(Clone, Debug)]
pub struct KernelGen {
    pub max_states: usize,
    pub labels: Vec<Label>,
    pub max_denominator: i64,
    pub density: f64,
}

impl Default for KernelGen {
    fn default() -> KernelGen {
        KernelGen {
            max_states: 5,
            labels: vec![Label::new("a"), Label::new("b")],
            max_denominator: 12,
            density: 0.4,
        }
    }
}

impl KernelGen {
    pub fn sample(&self, rng: &mut impl Rng) -> Kernel {
        let n = rng.gen_range(1..=self.max_states);
        let states: Vec<String> = (0..n).map(|i| format!("s{}", i)).collect();
        let mut entries = Vec::new();
        for label in &self.labels {
            for i in 0..n {
                for j in 0..n {
                    if !rng.gen_bool(self.density) {
                        continue;
                    }
                    let den = rng.gen_range(1..=self.max_denominator);
                    let num = rng.gen_range(1..=2 * den);
                    entries.push((
                        label.clone(),
                        states[i].clone(),
                        states[j].clone(),
                        Rat::new(num, den),
                    ));
                }
            }
        }
        Kernel::from_parts(states, self.labels.clone(), entries)
            .expect("generated kernels are well formed")
    }
}

/// Random formulas biased toward shallow modal depth and shared subformulas:
/// each draw extends a growing pool and later draws reuse earlier entries.
#[derive(Clone, Debug)]
pub struct FormulaGen {
    pub labels: Vec<Label>,
    pub indices: Vec<Rat>,
    pub max_depth: u32,
    pub with_m: bool,
    pub steps: usize,
}

impl Default for FormulaGen {
    fn default() -> FormulaGen {
        FormulaGen {
            labels: vec![Label::new("a"), Label::new("b")],
            indices: vec![
                Rat::zero(),
                Rat::new(1, 2),
                Rat::one(),
                Rat::new(3, 2),
                Rat::from_int(2),
            ],
            max_depth: 2,
            with_m: true,
            steps: 5,
        }
    }
}

impl FormulaGen {
    pub fn sample(&self, rng: &mut impl Rng) -> Formula {
        let mut pool = vec![Formula::Top];
        for _ in 0..self.steps {
            let f = self.step(rng, &pool);
            pool.push(f);
        }
        pool.pop().unwrap()
    }

    /// A pool of related formulas with shared subformulas, useful where
    /// schema slots must overlap to be non-vacuous.
    pub fn sample_pool(&self, rng: &mut impl Rng, count: usize) -> Vec<Formula> {
        let mut pool = vec![Formula::Top];
        for _ in 0..self.steps.max(count) {
            let f = self.step(rng, &pool);
            pool.push(f);
        }
        (0..count)
            .map(|_| pool[rng.gen_range(0..pool.len())].clone())
            .collect()
    }

    fn step(&self, rng: &mut impl Rng, pool: &[Formula]) -> Formula {
        let pick = |rng: &mut dyn rand::RngCore| pool[rng.gen_range(0..pool.len())].clone();
        for _ in 0..8 {
            match rng.gen_range(0..5) {
                0 => return pick(rng).neg(),
                1 => return pick(rng).and(pick(rng)),
                2 | 3 => {
                    let arg = pick(rng);
                    if arg.modal_depth() >= self.max_depth {
                        continue;
                    }
                    let label = self.labels[rng.gen_range(0..self.labels.len())].clone();
                    let index = self.indices[rng.gen_range(0..self.indices.len())].clone();
                    return Formula::l(label, index, arg);
                }
                _ => {
                    if !self.with_m {
                        continue;
                    }
                    let arg = pick(rng);
                    if arg.modal_depth() >= self.max_depth {
                        continue;
                    }
                    let label = self.labels[rng.gen_range(0..self.labels.len())].clone();
                    let index = self.indices[rng.gen_range(0..self.indices.len())].clone();
                    return Formula::m(label, index, arg);
                }
            }
        }
        pick(rng).neg()
    }
}
