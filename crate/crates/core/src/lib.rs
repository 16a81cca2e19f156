//! Projection semantics for instruction sequences with direct and indirect
//! jumps.
//!
//! Programs in six assembly-like notations are given meaning by translation:
//! the notations with indirect, double indirect, and returning jumps lower to
//! the direct-jump notations PGLD and PGLC, those lower to program algebra,
//! and a program-algebra term extracts to a finite-state thread. Behaviours
//! that consult a register file or a stack are composed with the matching
//! service, which hides the bookkeeping actions. Independent interpreters
//! give each notation a second, direct semantics, and the differential
//! harness checks the two agree program by program.

pub mod difftest;
pub mod indirect;
pub mod interp;
pub mod notation;
pub mod pga;
pub mod rng;
pub mod service;
pub mod text;
pub mod thread;

use std::fmt;

pub use indirect::{
    behavior_pglcij, behavior_pglddij, behavior_pgldij, behavior_pgldrj, pglcij_to_pglc,
    pglddij_to_pgldij, pgldij_to_pgld, pgldrj_to_pgld, OffsetTable, PglcijInstruction,
    PglcijOffsets, PglddijInstruction, PglddijOffsets, PgldijInstruction, PgldijOffsets,
    PgldrjInstruction, PgldrjOffsets,
};
pub use notation::{
    behavior_pglc, behavior_pgld, pglc_to_pga, pgld_to_pglc, PglcInstruction, PgldInstruction,
    Program,
};
pub use pga::{
    collapse_chains, extract_behavior, normalize, thread_extract, unfold_once, CanonicalForm,
    PgaInstruction, PgaTerm,
};
pub use service::{
    compose_use, make_register_file, make_stack, register_file_init, stack_init, EnvParams,
    RegisterFile, Reply, ServiceBehavior, ServiceInstance, StackService,
};
pub use thread::{
    action_prefix, bisimilar, distinguish, solve_spec, unfold_trace, Action, RecursiveSpec,
    ThreadGraph, ThreadNode, TraceEnd,
};

/// The six program notations with their own execution rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Notation {
    Pglc,
    Pgld,
    Pgldij,
    Pglcij,
    Pglddij,
    Pgldrj,
}

impl Notation {
    pub const ALL: [Notation; 6] = [
        Notation::Pglc,
        Notation::Pgld,
        Notation::Pgldij,
        Notation::Pglcij,
        Notation::Pglddij,
        Notation::Pgldrj,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Notation::Pglc => "pglc",
            Notation::Pgld => "pgld",
            Notation::Pgldij => "pgldij",
            Notation::Pglcij => "pglcij",
            Notation::Pglddij => "pglddij",
            Notation::Pgldrj => "pgldrj",
        }
    }
}

impl fmt::Display for Notation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A program of any of the six notations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AnyProgram {
    Pglc(Program<PglcInstruction>),
    Pgld(Program<PgldInstruction>),
    Pgldij(Program<PgldijInstruction>),
    Pglcij(Program<PglcijInstruction>),
    Pglddij(Program<PglddijInstruction>),
    Pgldrj(Program<PgldrjInstruction>),
}

impl AnyProgram {
    pub fn notation(&self) -> Notation {
        match self {
            AnyProgram::Pglc(_) => Notation::Pglc,
            AnyProgram::Pgld(_) => Notation::Pgld,
            AnyProgram::Pgldij(_) => Notation::Pgldij,
            AnyProgram::Pglcij(_) => Notation::Pglcij,
            AnyProgram::Pglddij(_) => Notation::Pglddij,
            AnyProgram::Pgldrj(_) => Notation::Pgldrj,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            AnyProgram::Pglc(p) => p.len(),
            AnyProgram::Pgld(p) => p.len(),
            AnyProgram::Pgldij(p) => p.len(),
            AnyProgram::Pglcij(p) => p.len(),
            AnyProgram::Pglddij(p) => p.len(),
            AnyProgram::Pgldrj(p) => p.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The projection-chain behaviour of the program.
    pub fn behavior(&self, env: &EnvParams) -> ThreadGraph {
        match self {
            AnyProgram::Pglc(p) => behavior_pglc(p),
            AnyProgram::Pgld(p) => behavior_pgld(p),
            AnyProgram::Pgldij(p) => behavior_pgldij(p, env),
            AnyProgram::Pglcij(p) => behavior_pglcij(p, env),
            AnyProgram::Pglddij(p) => behavior_pglddij(p, env),
            AnyProgram::Pgldrj(p) => behavior_pgldrj(p, env),
        }
    }

    /// The direct-interpreter behaviour of the program.
    pub fn interpret(&self, env: &EnvParams) -> ThreadGraph {
        interp::interpret(self, env)
    }

    pub(crate) fn with_instruction_removed(&self, idx: usize) -> AnyProgram {
        fn drop_at<I: Clone>(p: &Program<I>, idx: usize) -> Program<I> {
            let mut instrs = p.instructions().to_vec();
            instrs.remove(idx);
            Program::new(instrs).expect("caller keeps at least one instruction")
        }
        match self {
            AnyProgram::Pglc(p) => AnyProgram::Pglc(drop_at(p, idx)),
            AnyProgram::Pgld(p) => AnyProgram::Pgld(drop_at(p, idx)),
            AnyProgram::Pgldij(p) => AnyProgram::Pgldij(drop_at(p, idx)),
            AnyProgram::Pglcij(p) => AnyProgram::Pglcij(drop_at(p, idx)),
            AnyProgram::Pglddij(p) => AnyProgram::Pglddij(drop_at(p, idx)),
            AnyProgram::Pgldrj(p) => AnyProgram::Pgldrj(drop_at(p, idx)),
        }
    }

    /// Candidate programs with the counter at `idx` decremented: jump
    /// counters step toward 0, register indices toward 1.
    pub(crate) fn with_counter_decremented(&self, idx: usize) -> Vec<AnyProgram> {
        fn replace<I: Clone>(p: &Program<I>, idx: usize, ins: I) -> Program<I> {
            let mut instrs = p.instructions().to_vec();
            instrs[idx] = ins;
            Program::new(instrs).expect("length unchanged")
        }
        match self {
            AnyProgram::Pglc(p) => match &p.instructions()[idx] {
                PglcInstruction::FwdJump(l) if *l > 0 => {
                    vec![AnyProgram::Pglc(replace(p, idx, PglcInstruction::FwdJump(l - 1)))]
                }
                PglcInstruction::BwdJump(l) if *l > 0 => {
                    vec![AnyProgram::Pglc(replace(p, idx, PglcInstruction::BwdJump(l - 1)))]
                }
                _ => vec![],
            },
            AnyProgram::Pgld(p) => match &p.instructions()[idx] {
                PgldInstruction::AbsJump(l) if *l > 0 => {
                    vec![AnyProgram::Pgld(replace(p, idx, PgldInstruction::AbsJump(l - 1)))]
                }
                _ => vec![],
            },
            AnyProgram::Pgldij(p) => match &p.instructions()[idx] {
                PgldijInstruction::AbsJump(l) if *l > 0 => {
                    vec![AnyProgram::Pgldij(replace(p, idx, PgldijInstruction::AbsJump(l - 1)))]
                }
                PgldijInstruction::IndAbsJump(i) if *i > 1 => {
                    vec![AnyProgram::Pgldij(replace(p, idx, PgldijInstruction::IndAbsJump(i - 1)))]
                }
                _ => vec![],
            },
            AnyProgram::Pglcij(p) => match &p.instructions()[idx] {
                PglcijInstruction::FwdJump(l) if *l > 0 => {
                    vec![AnyProgram::Pglcij(replace(p, idx, PglcijInstruction::FwdJump(l - 1)))]
                }
                PglcijInstruction::BwdJump(l) if *l > 0 => {
                    vec![AnyProgram::Pglcij(replace(p, idx, PglcijInstruction::BwdJump(l - 1)))]
                }
                PglcijInstruction::IndFwdJump(i) if *i > 1 => {
                    vec![AnyProgram::Pglcij(replace(p, idx, PglcijInstruction::IndFwdJump(i - 1)))]
                }
                PglcijInstruction::IndBwdJump(i) if *i > 1 => {
                    vec![AnyProgram::Pglcij(replace(p, idx, PglcijInstruction::IndBwdJump(i - 1)))]
                }
                _ => vec![],
            },
            AnyProgram::Pglddij(p) => match &p.instructions()[idx] {
                PglddijInstruction::AbsJump(l) if *l > 0 => {
                    vec![AnyProgram::Pglddij(replace(p, idx, PglddijInstruction::AbsJump(l - 1)))]
                }
                PglddijInstruction::IndAbsJump(i) if *i > 1 => {
                    vec![AnyProgram::Pglddij(replace(
                        p,
                        idx,
                        PglddijInstruction::IndAbsJump(i - 1),
                    ))]
                }
                PglddijInstruction::DblIndAbsJump(i) if *i > 1 => {
                    vec![AnyProgram::Pglddij(replace(
                        p,
                        idx,
                        PglddijInstruction::DblIndAbsJump(i - 1),
                    ))]
                }
                _ => vec![],
            },
            AnyProgram::Pgldrj(p) => match &p.instructions()[idx] {
                PgldrjInstruction::AbsJump(l) if *l > 0 => {
                    vec![AnyProgram::Pgldrj(replace(p, idx, PgldrjInstruction::AbsJump(l - 1)))]
                }
                PgldrjInstruction::RetAbsJump(l) if *l > 0 => {
                    vec![AnyProgram::Pgldrj(replace(p, idx, PgldrjInstruction::RetAbsJump(l - 1)))]
                }
                _ => vec![],
            },
        }
    }
}

impl fmt::Display for AnyProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnyProgram::Pglc(p) => p.fmt(f),
            AnyProgram::Pgld(p) => p.fmt(f),
            AnyProgram::Pgldij(p) => p.fmt(f),
            AnyProgram::Pglcij(p) => p.fmt(f),
            AnyProgram::Pglddij(p) => p.fmt(f),
            AnyProgram::Pgldrj(p) => p.fmt(f),
        }
    }
}
