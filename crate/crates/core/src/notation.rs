//! The two base program notations and their projections: PGLC (relative
//! jumps) lowers to program algebra, PGLD (absolute jumps) lowers to PGLC.
//! Neither has an explicit termination instruction; running past either end
//! of a program terminates.

use std::fmt;

use thiserror::Error;

use crate::pga::{normalize, thread_extract, PgaInstruction, PgaTerm};
use crate::thread::{solve_spec, Action, ThreadGraph};

/// A program in any notation: a non-empty instruction list, positions
/// numbered from 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program<I> {
    instructions: Vec<I>,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("a program must contain at least one instruction")]
pub struct EmptyProgram;

impl<I> Program<I> {
    pub fn new(instructions: Vec<I>) -> Result<Self, EmptyProgram> {
        if instructions.is_empty() {
            return Err(EmptyProgram);
        }
        Ok(Program { instructions })
    }

    /// Number of instructions, `k`.
    pub fn len(&self) -> usize {
        self.instructions.len()
    }

    pub fn is_empty(&self) -> bool {
        false // by construction
    }

    pub fn instructions(&self) -> &[I] {
        &self.instructions
    }

    pub fn iter(&self) -> std::slice::Iter<'_, I> {
        self.instructions.iter()
    }

    /// 1-based access.
    pub fn at(&self, position: u64) -> Option<&I> {
        if position == 0 {
            return None;
        }
        self.instructions.get((position - 1) as usize)
    }
}

impl<I: fmt::Display> fmt::Display for Program<I> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for ins in &self.instructions {
            if !first {
                write!(f, "; ")?;
            }
            write!(f, "{ins}")?;
            first = false;
        }
        Ok(())
    }
}

/// PGLC: relative jumps in both directions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PglcInstruction {
    Plain(Action),
    PosTest(Action),
    NegTest(Action),
    FwdJump(u64),
    BwdJump(u64),
}

impl fmt::Display for PglcInstruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PglcInstruction::Plain(a) => write!(f, "{a}"),
            PglcInstruction::PosTest(a) => write!(f, "+{a}"),
            PglcInstruction::NegTest(a) => write!(f, "-{a}"),
            PglcInstruction::FwdJump(l) => write!(f, "#{l}"),
            PglcInstruction::BwdJump(l) => write!(f, "\\{l}"),
        }
    }
}

/// PGLD: absolute jumps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PgldInstruction {
    Plain(Action),
    PosTest(Action),
    NegTest(Action),
    AbsJump(u64),
}

impl fmt::Display for PgldInstruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PgldInstruction::Plain(a) => write!(f, "{a}"),
            PgldInstruction::PosTest(a) => write!(f, "+{a}"),
            PgldInstruction::NegTest(a) => write!(f, "-{a}"),
            PgldInstruction::AbsJump(l) => write!(f, "##{l}"),
        }
    }
}

/// Lowers a PGLC program of length `k` to the repeated PGA term
/// `(ψ1(u1); ...; ψk(uk); !; !)w`.
///
/// Backward jumps become forward jumps around the repeated copy; jumps past
/// either end become `!`, since out-of-range jumps terminate in PGLC. The two
/// trailing halts make a run-through off the last instruction terminate
/// instead of wrapping.
///
/// A wrapped jump can never land on the appended halts: `\l` at position `j`
/// with `l < j` becomes `#(k+2-l)`, landing at `j + k + 2 - l`, which is
/// position `j - l` of the next copy with `1 <= j - l <= k - 1`.
pub fn pglc_to_pga(program: &Program<PglcInstruction>) -> PgaTerm {
    let k = program.len() as u64;
    let mut instructions = Vec::with_capacity(program.len() + 2);
    for (idx, ins) in program.iter().enumerate() {
        let j = idx as u64 + 1;
        instructions.push(match ins {
            PglcInstruction::Plain(a) => PgaInstruction::Plain(a.clone()),
            PglcInstruction::PosTest(a) => PgaInstruction::PosTest(a.clone()),
            PglcInstruction::NegTest(a) => PgaInstruction::NegTest(a.clone()),
            PglcInstruction::FwdJump(l) => {
                if j.checked_add(*l).is_some_and(|t| t <= k) {
                    PgaInstruction::FwdJump(*l)
                } else {
                    PgaInstruction::Halt
                }
            }
            PglcInstruction::BwdJump(l) => {
                if *l < j {
                    PgaInstruction::FwdJump(k + 2 - l)
                } else {
                    PgaInstruction::Halt
                }
            }
        });
    }
    instructions.push(PgaInstruction::Halt);
    instructions.push(PgaInstruction::Halt);
    PgaTerm::repeat(PgaTerm::sequence(instructions))
}

/// Lowers a PGLD program to PGLC instruction-by-instruction: the absolute
/// jump `##l` at position `j` becomes a relative jump covering the distance.
/// `##j` becomes `#0` (deadlock) and `##0` becomes `\j` (termination past the
/// start), matching the absolute-jump rules.
pub fn pgld_to_pglc(program: &Program<PgldInstruction>) -> Program<PglcInstruction> {
    let lowered = program
        .iter()
        .enumerate()
        .map(|(idx, ins)| {
            let j = idx as u64 + 1;
            match ins {
                PgldInstruction::Plain(a) => PglcInstruction::Plain(a.clone()),
                PgldInstruction::PosTest(a) => PglcInstruction::PosTest(a.clone()),
                PgldInstruction::NegTest(a) => PglcInstruction::NegTest(a.clone()),
                PgldInstruction::AbsJump(l) => {
                    if *l >= j {
                        PglcInstruction::FwdJump(l - j)
                    } else {
                        PglcInstruction::BwdJump(j - l)
                    }
                }
            }
        })
        .collect();
    Program::new(lowered).expect("projection preserves length")
}

/// The behaviour of a PGLC program: lower to PGA, normalize, extract, solve.
pub fn behavior_pglc(program: &Program<PglcInstruction>) -> ThreadGraph {
    let cf = normalize(&pglc_to_pga(program));
    let spec = thread_extract(&cf);
    solve_spec(&spec, "P1").expect("extraction keeps position 1")
}

/// The behaviour of a PGLD program via the PGLC projection.
pub fn behavior_pgld(program: &Program<PgldInstruction>) -> ThreadGraph {
    behavior_pglc(&pgld_to_pglc(program))
}
