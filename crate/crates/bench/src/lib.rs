//! Deterministic fixtures for the criterion benchmarks.

use projsem_core::interp::{generate, GenConfig};
use projsem_core::rng::SplitMix64;
use projsem_core::{Action, AnyProgram, EnvParams, Notation, PgaInstruction, PgaTerm};

/// A nested term with repetitions, concatenations, and jumps.
pub fn sample_pga_term() -> PgaTerm {
    let mut rng = SplitMix64::new(12);
    build_term(&mut rng, 8)
}

fn build_term(rng: &mut SplitMix64, depth: u32) -> PgaTerm {
    if depth == 0 || rng.below(3) == 0 {
        return PgaTerm::Instr(sample_instruction(rng));
    }
    match rng.below(3) {
        0 => PgaTerm::concat(build_term(rng, depth - 1), build_term(rng, depth - 1)),
        1 => PgaTerm::repeat(build_term(rng, depth - 1)),
        _ => PgaTerm::Instr(sample_instruction(rng)),
    }
}

fn sample_instruction(rng: &mut SplitMix64) -> PgaInstruction {
    match rng.below(5) {
        0 => PgaInstruction::Plain(Action::new("a", "m")),
        1 => PgaInstruction::PosTest(Action::new("b", "n")),
        2 => PgaInstruction::NegTest(Action::new("a", "n")),
        3 => PgaInstruction::FwdJump(rng.range(0, 9)),
        _ => PgaInstruction::Halt,
    }
}

/// The environment the benchmarks run under.
pub fn bench_env() -> EnvParams {
    EnvParams::default()
}

/// A fixed program per notation, generous on indirect jumps.
pub fn sample_program(notation: Notation) -> AnyProgram {
    generate(&GenConfig::new(notation, 6, bench_env(), 20260315))
}
