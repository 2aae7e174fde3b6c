//! Synthetic program-recovery benchmark.
//!
//! Ground-truth programs are drawn from a random grammar, executed until
//! `k` distinct traces are collected, and mined back from those traces
//! alone. Programs with fewer than `k` distinct traces are discarded.
//!
//! Candidate `i` draws all its randomness from a ChaCha8 stream selected by
//! `(seed, i)`, so candidates can be evaluated in parallel while the report
//! stays reproducible bit for bit.

use std::collections::BTreeSet;
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::event_log::{Activity, EventLog, Trace};
use crate::metrics::{self, MetricsError, MetricsReport};
use crate::miner::{self, MineError};
use crate::program::{simplify, Program};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid generator configuration: {0}")]
    InvalidConfig(String),
    #[error("only {found} distinct traces found, {wanted} wanted")]
    UnderSampled { found: usize, wanted: usize },
    #[error("no generated program survived filtering after {candidates} candidates")]
    NoPrograms { candidates: usize },
    #[error("mining failed: {0}")]
    Mine(#[from] MineError),
    #[error("evaluation failed: {0}")]
    Metrics(#[from] MetricsError),
}

/// Relative weights of the constructs drawn at each node. `leaf` stops
/// the recursion early; nodes at the depth limit are always leaves.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OperatorWeights {
    pub leaf: f64,
    pub seq: f64,
    pub opt: f64,
    pub choice: f64,
    pub plus: f64,
    pub star: f64,
    pub par: f64,
}

impl Default for OperatorWeights {
    fn default() -> Self {
        OperatorWeights { leaf: 8.0, seq: 6.0, opt: 1.0, choice: 1.5, plus: 2.0, star: 0.5, par: 0.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeneratorConfig {
    pub alphabet_size: usize,
    pub max_depth: usize,
    pub weights: OperatorWeights,
    pub allow_duplicates: bool,
    pub seed: u64,
    /// Largest iteration count of a loop during execution.
    pub loop_bound: usize,
    /// Executions tried per program when collecting distinct traces.
    pub max_attempts: usize,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            alphabet_size: 5,
            max_depth: 4,
            weights: OperatorWeights::default(),
            allow_duplicates: false,
            seed: 0,
            loop_bound: 3,
            max_attempts: 200,
        }
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<(), BenchError> {
        let w = &self.weights;
        let all = [w.leaf, w.seq, w.opt, w.choice, w.plus, w.star, w.par];
        if all.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(BenchError::InvalidConfig("weights must be finite and non-negative".into()));
        }
        if !all.iter().any(|x| *x > 0.0) {
            return Err(BenchError::InvalidConfig("at least one weight must be positive".into()));
        }
        if self.alphabet_size == 0 {
            return Err(BenchError::InvalidConfig("alphabet_size must be at least 1".into()));
        }
        if self.max_depth == 0 {
            return Err(BenchError::InvalidConfig("max_depth must be at least 1".into()));
        }
        Ok(())
    }

    pub fn alphabet(&self) -> Vec<Activity> {
        (0..self.alphabet_size)
            .map(|i| {
                let name = if self.alphabet_size <= 26 {
                    char::from(b'a' + i as u8).to_string()
                } else {
                    format!("a{i}")
                };
                Activity::new(&name).expect("generated names are valid")
            })
            .collect()
    }

    /// The random stream owned by candidate `index`.
    pub fn rng(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        rng
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Op {
    Leaf,
    Seq,
    Opt,
    Choice,
    Plus,
    Star,
    Par,
}

struct Generator<'a, R> {
    cfg: &'a GeneratorConfig,
    rng: &'a mut R,
    alphabet: Vec<Activity>,
    /// Unused activities when duplicates are disallowed.
    pool: Vec<Activity>,
}

impl<R: Rng> Generator<'_, R> {
    fn leaf(&mut self) -> Program {
        if self.cfg.allow_duplicates {
            Program::Leaf(self.alphabet.choose(self.rng).expect("non-empty alphabet").clone())
        } else {
            Program::Leaf(self.pool.pop().expect("leaf budget respected"))
        }
    }

    /// Draws a subtree using at most `budget` leaves (unbounded with
    /// duplicates allowed).
    fn node(&mut self, depth: usize, budget: usize) -> Program {
        let w = self.cfg.weights;
        let mut ops = vec![(Op::Leaf, w.leaf)];
        if depth > 1 {
            ops.extend([(Op::Opt, w.opt), (Op::Plus, w.plus), (Op::Star, w.star)]);
            if budget >= 2 {
                ops.extend([(Op::Seq, w.seq), (Op::Choice, w.choice), (Op::Par, w.par)]);
            }
        }
        let total: f64 = ops.iter().map(|o| o.1).sum();
        let op = if total <= 0.0 {
            Op::Leaf
        } else {
            let mut x = self.rng.gen_range(0.0..total);
            let mut pick = Op::Leaf;
            for (op, wt) in ops {
                if x < wt {
                    pick = op;
                    break;
                }
                x -= wt;
            }
            pick
        };
        match op {
            Op::Leaf => self.leaf(),
            Op::Opt => Program::opt(self.node(depth - 1, budget)),
            Op::Plus => Program::plus(self.node(depth - 1, budget)),
            Op::Star => Program::star(self.node(depth - 1, budget)),
            Op::Seq | Op::Choice | Op::Par => {
                let arity = self.rng.gen_range(2..=budget.min(3));
                let mut left = budget;
                let mut parts = Vec::with_capacity(arity);
                for k in 0..arity {
                    let reserve = arity - k - 1;
                    let before = self.pool.len();
                    parts.push(self.node(depth - 1, left - reserve));
                    if !self.cfg.allow_duplicates {
                        left -= before - self.pool.len();
                    }
                }
                match op {
                    Op::Seq => Program::seq(parts),
                    Op::Choice => Program::choice(parts),
                    _ => Program::par(parts),
                }
            }
        }
    }
}

/// Draws a random program, simplified and in canonical branch order.
pub fn sample_program<R: Rng>(cfg: &GeneratorConfig, rng: &mut R) -> Result<Program, BenchError> {
    cfg.validate()?;
    let alphabet = cfg.alphabet();
    let mut pool = alphabet.clone();
    pool.shuffle(rng);
    let budget = if cfg.allow_duplicates { usize::MAX } else { pool.len() };
    let mut g = Generator { cfg, rng, alphabet, pool };
    let p = g.node(cfg.max_depth, budget);
    Ok(simplify(&p).canonicalize())
}

/// Runs `p` once with uniform random decisions.
pub fn execute<R: Rng>(p: &Program, loop_bound: usize, rng: &mut R, out: &mut Vec<Activity>) {
    match p {
        Program::Leaf(a) => out.push(a.clone()),
        Program::Seq(parts) => parts.iter().for_each(|q| execute(q, loop_bound, rng, out)),
        Program::Opt(body) => {
            if rng.gen_bool(0.5) {
                execute(body, loop_bound, rng, out);
            }
        }
        Program::Choice(branches) => {
            let b = branches.choose(rng).expect("choice has branches");
            execute(b, loop_bound, rng, out);
        }
        Program::Plus(body) | Program::Star(body) => {
            let low = usize::from(matches!(p, Program::Plus(_)));
            for _ in 0..rng.gen_range(low..=loop_bound.max(1)) {
                execute(body, loop_bound, rng, out);
            }
        }
        Program::Par(parts) => {
            let runs: Vec<Vec<Activity>> = parts
                .iter()
                .map(|q| {
                    let mut v = Vec::new();
                    execute(q, loop_bound, rng, &mut v);
                    v
                })
                .collect();
            // picking a component with probability proportional to what it
            // has left yields every interleaving with equal probability
            let mut pos = vec![0; runs.len()];
            let mut left: usize = runs.iter().map(Vec::len).sum();
            while left > 0 {
                let mut x = rng.gen_range(0..left);
                for (k, run) in runs.iter().enumerate() {
                    let rest = run.len() - pos[k];
                    if x < rest {
                        out.push(run[pos[k]].clone());
                        pos[k] += 1;
                        break;
                    }
                    x -= rest;
                }
                left -= 1;
            }
        }
    }
}

/// Collects `k` distinct traces of `p`, or reports how many were found.
pub fn sample_traces<R: Rng>(
    p: &Program,
    k: usize,
    max_attempts: usize,
    loop_bound: usize,
    rng: &mut R,
) -> Result<BTreeSet<Trace>, BenchError> {
    let mut traces = BTreeSet::new();
    for _ in 0..max_attempts {
        let mut events = Vec::new();
        execute(p, loop_bound, rng, &mut events);
        traces.insert(Trace::new(events));
        if traces.len() == k {
            return Ok(traces);
        }
    }
    Err(BenchError::UnderSampled { found: traces.len(), wanted: k })
}

/// Outcome for one retained program.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProgramResult {
    pub index: u64,
    pub truth: String,
    pub mined: String,
    pub truth_tokens: usize,
    pub mean_trace_len: f64,
    pub exact_match: bool,
    pub edit_distance: usize,
    pub metrics: MetricsReport,
    pub flower: MetricsReport,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchReport {
    pub seed: u64,
    pub requested: usize,
    pub programs: usize,
    pub candidates: usize,
    pub k_traces: usize,
    pub exact_match_rate: f64,
    pub edit_distance_mean: f64,
    pub edit_distance_stdev: f64,
    pub mean_truth_tokens: f64,
    pub mean_trace_len: f64,
    pub mined: MetricsReport,
    pub flower: MetricsReport,
    pub config: GeneratorConfig,
}

/// Candidates examined per requested program before giving up.
pub const CANDIDATES_PER_PROGRAM: usize = 200;
const BATCH: usize = 256;

/// Generates, samples, mines and scores candidate `index`. `None` when the
/// candidate is filtered out.
pub fn run_candidate(cfg: &GeneratorConfig, index: u64, k: usize) -> Result<Option<ProgramResult>, BenchError> {
    let mut rng = cfg.rng(index);
    let truth = sample_program(cfg, &mut rng)?;
    // the duplicate regime keeps only programs that do repeat an activity
    if (truth.duplicate_leaf_count() > 0) != cfg.allow_duplicates {
        return Ok(None);
    }
    let traces = match sample_traces(&truth, k, cfg.max_attempts, cfg.loop_bound, &mut rng) {
        Ok(t) => t,
        Err(BenchError::UnderSampled { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    let mean_trace_len = traces.iter().map(Trace::len).sum::<usize>() as f64 / traces.len() as f64;
    let log = EventLog::new(traces.into_iter().collect()).expect("generated activities are valid");
    let (mined, _) = miner::discover(&log)?;
    let flower = miner::flower_model(&log.alphabet(), log.has_empty_trace()).expect("log has activities");
    Ok(Some(ProgramResult {
        index,
        truth: truth.to_expr(),
        mined: mined.canonicalize().to_expr(),
        truth_tokens: truth.tokenize().len(),
        mean_trace_len,
        exact_match: metrics::exact_match(&mined, &truth),
        edit_distance: metrics::edit_distance(&mined, &truth),
        metrics: metrics::evaluate(&log, &mined)?,
        flower: metrics::evaluate(&log, &flower)?,
    }))
}

/// Runs the benchmark and keeps the per-program results.
pub fn run_benchmark_detailed(
    cfg: &GeneratorConfig,
    n_programs: usize,
    k_traces: usize,
) -> Result<(BenchReport, Vec<ProgramResult>), BenchError> {
    cfg.validate()?;
    if n_programs == 0 || k_traces == 0 {
        return Err(BenchError::InvalidConfig("programs and traces must be at least 1".into()));
    }
    let limit = n_programs.saturating_mul(CANDIDATES_PER_PROGRAM);
    let mut results = Vec::with_capacity(n_programs);
    let mut next = 0usize;
    while results.len() < n_programs && next < limit {
        let end = (next + BATCH).min(limit);
        let batch: Vec<Option<ProgramResult>> = (next..end)
            .into_par_iter()
            .map(|i| run_candidate(cfg, i as u64, k_traces))
            .collect::<Result<_, _>>()?;
        for r in batch.into_iter().flatten() {
            if results.len() < n_programs {
                results.push(r);
            }
        }
        next = end;
    }
    let candidates = match results.last() {
        Some(r) => r.index as usize + 1,
        None => return Err(BenchError::NoPrograms { candidates: next }),
    };
    let report = summarize(cfg, n_programs, candidates, k_traces, &results);
    Ok((report, results))
}

pub fn run_benchmark(cfg: &GeneratorConfig, n_programs: usize, k_traces: usize) -> Result<BenchReport, BenchError> {
    run_benchmark_detailed(cfg, n_programs, k_traces).map(|(r, _)| r)
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    sum / n as f64
}

fn mean_report(rs: &[&MetricsReport]) -> MetricsReport {
    MetricsReport {
        fitness: mean(rs.iter().map(|r| r.fitness)),
        precision: mean(rs.iter().map(|r| r.precision)),
        f1: mean(rs.iter().map(|r| r.f1)),
        generalization: mean(rs.iter().map(|r| r.generalization)),
        simplicity: mean(rs.iter().map(|r| r.simplicity)),
    }
}

fn summarize(
    cfg: &GeneratorConfig,
    requested: usize,
    candidates: usize,
    k_traces: usize,
    results: &[ProgramResult],
) -> BenchReport {
    let dist = mean(results.iter().map(|r| r.edit_distance as f64));
    let var = mean(results.iter().map(|r| (r.edit_distance as f64 - dist).powi(2)));
    BenchReport {
        seed: cfg.seed,
        requested,
        programs: results.len(),
        candidates,
        k_traces,
        exact_match_rate: mean(results.iter().map(|r| f64::from(u8::from(r.exact_match)))),
        edit_distance_mean: dist,
        edit_distance_stdev: var.sqrt(),
        mean_truth_tokens: mean(results.iter().map(|r| r.truth_tokens as f64)),
        mean_trace_len: mean(results.iter().map(|r| r.mean_trace_len)),
        mined: mean_report(&results.iter().map(|r| &r.metrics).collect::<Vec<_>>()),
        flower: mean_report(&results.iter().map(|r| &r.flower).collect::<Vec<_>>()),
        config: cfg.clone(),
    }
}

impl fmt::Display for BenchReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let row = |f: &mut fmt::Formatter<'_>, k: &str, v: String| writeln!(f, "{k:<24}{v:>14}");
        row(f, "seed", self.seed.to_string())?;
        row(f, "programs", self.programs.to_string())?;
        row(f, "candidates", self.candidates.to_string())?;
        row(f, "k_traces", self.k_traces.to_string())?;
        row(f, "allow_duplicates", self.config.allow_duplicates.to_string())?;
        row(f, "exact_match_rate", format!("{:.6}", self.exact_match_rate))?;
        row(f, "edit_distance_mean", format!("{:.6}", self.edit_distance_mean))?;
        row(f, "edit_distance_stdev", format!("{:.6}", self.edit_distance_stdev))?;
        row(f, "mean_truth_tokens", format!("{:.6}", self.mean_truth_tokens))?;
        row(f, "mean_trace_len", format!("{:.6}", self.mean_trace_len))?;
        writeln!(f)?;
        writeln!(f, "{:<24}{:>14}{:>14}", "metric", "mined", "flower")?;
        for (k, a, b) in [
            ("fitness", self.mined.fitness, self.flower.fitness),
            ("precision", self.mined.precision, self.flower.precision),
            ("f1", self.mined.f1, self.flower.f1),
            ("generalization", self.mined.generalization, self.flower.generalization),
            ("simplicity", self.mined.simplicity, self.flower.simplicity),
        ] {
            writeln!(f, "{k:<24}{a:>14.6}{b:>14.6}")?;
        }
        Ok(())
    }
}
