//! Differential harness: generate programs, run the projection chain and the
//! direct interpreter, and demand bisimilarity. On a mismatch the witness is
//! shrunk before it is reported.

use crate::interp::{generate, shrink, GenConfig, GenWeights};
use crate::rng::{derive_seed, SplitMix64};
use crate::service::EnvParams;
use crate::thread::bisimilar;
use crate::{AnyProgram, Notation};

/// How each case picks its environment.
#[derive(Debug, Clone, Copy)]
pub enum EnvStrategy {
    /// Every case runs under the same parameters.
    Fixed(EnvParams),
    /// Each case samples maxr in `1..=maxr`, maxn in `1..=maxn`, and maxs in
    /// `0..=maxs` from its seed.
    Sampled { maxr: u64, maxn: u64, maxs: u64 },
}

/// A deliberately broken projection, for harness self-tests: a working
/// detector must fail under sabotage.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sabotage {
    /// Shift every PGLDij search-block start by one.
    PgldijBlockStart,
}

#[derive(Debug, Clone)]
pub struct DiffConfig {
    pub notation: Notation,
    pub count: u64,
    pub max_len: usize,
    pub env: EnvStrategy,
    pub seed: u64,
    pub sabotage: Option<Sabotage>,
    pub weights: GenWeights,
}

impl DiffConfig {
    pub fn new(notation: Notation, count: u64, max_len: usize, env: EnvParams, seed: u64) -> Self {
        DiffConfig {
            notation,
            count,
            max_len,
            env: EnvStrategy::Fixed(env),
            seed,
            sabotage: None,
            weights: GenWeights::default(),
        }
    }
}

/// A shrunk mismatch between the interpreter and the projection chain.
#[derive(Debug, Clone)]
pub struct DiffFailure {
    pub index: u64,
    pub case_seed: u64,
    pub env: EnvParams,
    pub program: AnyProgram,
    /// Machine-readable spec of the interpreter's thread.
    pub oracle_spec: String,
    /// Machine-readable spec of the chain's thread.
    pub chain_spec: String,
}

#[derive(Debug, Clone)]
pub struct DiffReport {
    pub total: u64,
    pub passed: u64,
    pub first_failure: Option<DiffFailure>,
}

impl DiffReport {
    pub fn all_passed(&self) -> bool {
        self.passed == self.total
    }
}

fn chain_behavior(program: &AnyProgram, env: &EnvParams, sabotage: Option<Sabotage>) -> crate::ThreadGraph {
    match (sabotage, program) {
        (Some(Sabotage::PgldijBlockStart), AnyProgram::Pgldij(p)) => {
            crate::indirect::behavior_pgldij_with_shift(p, env, 1)
        }
        _ => program.behavior(env),
    }
}

fn case_env(strategy: &EnvStrategy, rng: &mut SplitMix64) -> EnvParams {
    match strategy {
        EnvStrategy::Fixed(env) => *env,
        EnvStrategy::Sampled { maxr, maxn, maxs } => EnvParams {
            maxr: rng.range(1, *maxr),
            maxn: rng.range(1, *maxn),
            maxs: rng.range(0, *maxs),
        },
    }
}

/// Runs `count` generated programs and reports the tally; the first mismatch
/// is shrunk and kept. Fully deterministic in the seed.
pub fn run_difftest(cfg: &DiffConfig) -> DiffReport {
    let mut passed = 0;
    let mut first_failure = None;

    for index in 0..cfg.count {
        let case_seed = derive_seed(cfg.seed, index);
        let mut env_rng = SplitMix64::new(case_seed);
        let env = case_env(&cfg.env, &mut env_rng);
        let gen_cfg = GenConfig {
            notation: cfg.notation,
            max_len: cfg.max_len,
            env,
            seed: env_rng.next_u64(),
            weights: cfg.weights,
        };
        let program = generate(&gen_cfg);

        let mismatch = |p: &AnyProgram| {
            !bisimilar(&p.interpret(&env), &chain_behavior(p, &env, cfg.sabotage))
        };

        if !mismatch(&program) {
            passed += 1;
            continue;
        }
        if first_failure.is_none() {
            let witness = shrink(&program, mismatch);
            let oracle = witness.interpret(&env);
            let chain = chain_behavior(&witness, &env, cfg.sabotage);
            first_failure = Some(DiffFailure {
                index,
                case_seed,
                env,
                program: witness,
                oracle_spec: oracle.to_spec().to_eqns_string(),
                chain_spec: chain.to_spec().to_eqns_string(),
            });
        }
    }

    DiffReport { total: cfg.count, passed, first_failure }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_runs_pass_for_every_notation() {
        for notation in Notation::ALL {
            let cfg = DiffConfig::new(notation, 40, 5, EnvParams::default(), 11);
            let report = run_difftest(&cfg);
            assert!(
                report.all_passed(),
                "{notation}: {}/{} with failure {:?}",
                report.passed,
                report.total,
                report.first_failure
            );
        }
    }

    #[test]
    fn zero_count_passes_vacuously() {
        let cfg = DiffConfig::new(Notation::Pgld, 0, 5, EnvParams::default(), 0);
        let report = run_difftest(&cfg);
        assert!(report.all_passed());
        assert_eq!(report.total, 0);
    }

    #[test]
    fn sabotage_is_detected_and_shrunk() {
        let mut cfg = DiffConfig::new(Notation::Pgldij, 60, 5, EnvParams::default(), 7);
        cfg.sabotage = Some(Sabotage::PgldijBlockStart);
        let report = run_difftest(&cfg);
        assert!(!report.all_passed(), "sabotaged projection must be caught");
        let failure = report.first_failure.expect("failure recorded");
        assert!(failure.program.len() <= 5);
        assert_ne!(failure.oracle_spec, failure.chain_spec);
    }
}
