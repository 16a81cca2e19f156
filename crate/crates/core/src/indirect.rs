//! Notations with indirect, double indirect, and returning jumps, and their
//! projections onto the direct-jump notations.
//!
//! Each projection appends search blocks that recover a register's (or the
//! stack top's) content by linear search and then perform the intended jump.
//! The offset tables pin down where every block lands; the audit functions
//! check the emitted layout against them position by position.

use std::fmt;

use crate::notation::{behavior_pglc, behavior_pgld, PglcInstruction, PgldInstruction, Program};
use crate::service::{compose_use, register_file_init, stack_init, EnvParams};
use crate::thread::{Action, ThreadGraph};

/// PGLD plus indirect absolute jumps through a register.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PgldijInstruction {
    Plain(Action),
    PosTest(Action),
    NegTest(Action),
    AbsJump(u64),
    /// Jump to the position held in register `i`.
    IndAbsJump(u64),
}

impl fmt::Display for PgldijInstruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PgldijInstruction::Plain(a) => write!(f, "{a}"),
            PgldijInstruction::PosTest(a) => write!(f, "+{a}"),
            PgldijInstruction::NegTest(a) => write!(f, "-{a}"),
            PgldijInstruction::AbsJump(l) => write!(f, "##{l}"),
            PgldijInstruction::IndAbsJump(i) => write!(f, "i##{i}"),
        }
    }
}

/// PGLC plus indirect relative jumps through a register.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PglcijInstruction {
    Plain(Action),
    PosTest(Action),
    NegTest(Action),
    FwdJump(u64),
    BwdJump(u64),
    /// Jump forward by the content of register `i`.
    IndFwdJump(u64),
    /// Jump backward by the content of register `i`.
    IndBwdJump(u64),
}

impl fmt::Display for PglcijInstruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PglcijInstruction::Plain(a) => write!(f, "{a}"),
            PglcijInstruction::PosTest(a) => write!(f, "+{a}"),
            PglcijInstruction::NegTest(a) => write!(f, "-{a}"),
            PglcijInstruction::FwdJump(l) => write!(f, "#{l}"),
            PglcijInstruction::BwdJump(l) => write!(f, "\\{l}"),
            PglcijInstruction::IndFwdJump(i) => write!(f, "i#{i}"),
            PglcijInstruction::IndBwdJump(i) => write!(f, "i\\{i}"),
        }
    }
}

/// PGLDij plus double indirect absolute jumps: the register named by the
/// register.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PglddijInstruction {
    Plain(Action),
    PosTest(Action),
    NegTest(Action),
    AbsJump(u64),
    IndAbsJump(u64),
    /// Jump to the position held in the register whose number is held in
    /// register `i`.
    DblIndAbsJump(u64),
}

impl fmt::Display for PglddijInstruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PglddijInstruction::Plain(a) => write!(f, "{a}"),
            PglddijInstruction::PosTest(a) => write!(f, "+{a}"),
            PglddijInstruction::NegTest(a) => write!(f, "-{a}"),
            PglddijInstruction::AbsJump(l) => write!(f, "##{l}"),
            PglddijInstruction::IndAbsJump(i) => write!(f, "i##{i}"),
            PglddijInstruction::DblIndAbsJump(i) => write!(f, "di##{i}"),
        }
    }
}

/// PGLD plus returning jumps and returns, backed by a stack of return
/// positions. Basic instructions must not use the reserved focus `st`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PgldrjInstruction {
    Plain(Action),
    PosTest(Action),
    NegTest(Action),
    AbsJump(u64),
    /// Jump to position `l`, remembering this instruction's position for a
    /// later return.
    RetAbsJump(u64),
    /// Resume right after the most recent returning jump not yet returned to.
    Return,
}

impl fmt::Display for PgldrjInstruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PgldrjInstruction::Plain(a) => write!(f, "{a}"),
            PgldrjInstruction::PosTest(a) => write!(f, "+{a}"),
            PgldrjInstruction::NegTest(a) => write!(f, "-{a}"),
            PgldrjInstruction::AbsJump(l) => write!(f, "##{l}"),
            PgldrjInstruction::RetAbsJump(l) => write!(f, "r##{l}"),
            PgldrjInstruction::Return => write!(f, "ret"),
        }
    }
}

// ---------------------------------------------------------------------------
// Offset tables
// ---------------------------------------------------------------------------

/// Landing positions of the PGLDij search blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PgldijOffsets {
    pub k: u64,
    pub maxr: u64,
    pub maxn: u64,
    /// Entries per block: `min(k, maxn)`.
    pub n: u64,
}

impl PgldijOffsets {
    pub fn new(k: u64, env: &EnvParams) -> Self {
        PgldijOffsets { k, maxr: env.maxr, maxn: env.maxn, n: k.min(env.maxn) }
    }

    /// Start position of the search block for register `i`.
    pub fn block_start(&self, i: u64) -> u64 {
        self.k + 3 + (2 * self.n + 1) * (i - 1)
    }

    pub fn total_len(&self) -> u64 {
        self.k + 2 + self.maxr * (2 * self.n + 1)
    }
}

/// Landing positions of the PGLCij search blocks. Forward blocks come first,
/// one per (register, source position) pair, then the backward blocks in the
/// same order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PglcijOffsets {
    pub k: u64,
    pub maxr: u64,
    pub maxn: u64,
}

impl PglcijOffsets {
    pub fn new(k: u64, env: &EnvParams) -> Self {
        PglcijOffsets { k, maxr: env.maxr, maxn: env.maxn }
    }

    /// Start of the forward search block for register `i` and source
    /// position `j`.
    pub fn fwd_block_start(&self, i: u64, j: u64) -> u64 {
        self.k + 3 + 2 * (self.maxn + 1) * (self.k * (i - 1) + (j - 1))
    }

    /// Start of the backward search block for register `i` and source
    /// position `j`.
    pub fn bwd_block_start(&self, i: u64, j: u64) -> u64 {
        self.k + 3 + 2 * (self.maxn + 1) * (self.k * (self.maxr + i - 1) + (j - 1))
    }

    /// Backward distance of the jump in forward-block entry `h`: lands on
    /// `j + h` when in range, otherwise jumps back past position 1 and
    /// terminates.
    pub fn fwd_entry_distance(&self, i: u64, j: u64, h: u64) -> u64 {
        if j + h <= self.k {
            self.fwd_block_start(i, j) + 2 * h + 1 - (j + h)
        } else {
            self.k + 3 + 2 * (self.maxn + 1) * self.k * self.maxr
        }
    }

    /// Backward distance of the jump in backward-block entry `h`: lands on
    /// `j - h` when that is non-negative (position 0 terminates), otherwise
    /// jumps back past position 1 and terminates.
    pub fn bwd_entry_distance(&self, i: u64, j: u64, h: u64) -> u64 {
        if h <= j {
            self.bwd_block_start(i, j) + 2 * h + 1 - (j - h)
        } else {
            self.k + 3 + 4 * (self.maxn + 1) * self.k * self.maxr
        }
    }

    pub fn total_len(&self) -> u64 {
        self.k + 2 + 4 * (self.maxn + 1) * self.k * self.maxr
    }
}

/// Landing positions of the PGLDdij search blocks.
///
/// A plain base of `maxn + 1` would only match the emitted layout when
/// `maxn >= k + 2`; the padding below the program brings the first block to
/// `max(k + 2, maxn) + 1` in general, which is what `block_start` uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PglddijOffsets {
    pub k: u64,
    pub maxr: u64,
    pub maxn: u64,
    /// Entries per block: `min(maxr, maxn)`; the searched value names a
    /// register.
    pub n: u64,
}

impl PglddijOffsets {
    pub fn new(k: u64, env: &EnvParams) -> Self {
        PglddijOffsets { k, maxr: env.maxr, maxn: env.maxn, n: env.maxr.min(env.maxn) }
    }

    /// Number of `##0` padding instructions after the two appended halts.
    pub fn padding_len(&self) -> u64 {
        (self.k + 2).max(self.maxn) - (self.k + 2)
    }

    /// Start position of the search block for register `i`.
    pub fn block_start(&self, i: u64) -> u64 {
        (self.k + 2).max(self.maxn) + 1 + (2 * self.n + 1) * (i - 1)
    }

    pub fn total_len(&self) -> u64 {
        (self.k + 2).max(self.maxn) + self.maxr * (2 * self.n + 1)
    }
}

/// Where a PGLDrj returning jump lowers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RetJumpTarget {
    /// The push triple for (value = source position, target).
    Push(u64),
    /// The jump's own position: pushing is impossible because the position
    /// exceeds maxn, so the lowered jump deadlocks on itself.
    SelfJump(u64),
    /// `##0`: the target is 0 or past the program, so execution terminates.
    Terminate,
}

/// Landing positions of the PGLDrj push triples and return quadruples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PgldrjOffsets {
    pub k: u64,
    pub maxn: u64,
    /// Pushable return positions: `min(k, maxn)`.
    pub n: u64,
}

impl PgldrjOffsets {
    pub fn new(k: u64, env: &EnvParams) -> Self {
        PgldrjOffsets { k, maxn: env.maxn, n: k.min(env.maxn) }
    }

    /// Start of the push triple that pushes `value` and jumps to `target`.
    /// Triples are laid out value-major: all targets for value 1, then for
    /// value 2, and so on.
    pub fn push_start(&self, value: u64, target: u64) -> u64 {
        self.k + 3 + 3 * (self.k * (value - 1) + (target - 1))
    }

    /// Start of the return search, the lowering of `ret`.
    pub fn ret_search_start(&self) -> u64 {
        self.k + 3 + 3 * self.k * self.n
    }

    /// Start of the return quadruple testing for stack top `h`.
    pub fn quad_start(&self, h: u64) -> u64 {
        self.ret_search_start() + 4 * (h - 1)
    }

    /// Where a failed top test in quadruple `h` continues: the next
    /// quadruple, or the final self-jump after the last one.
    pub fn quad_next(&self, h: u64) -> u64 {
        self.ret_search_start() + 4 * h
    }

    /// Position of the final `##l` self-jump (the last instruction).
    pub fn final_jump_pos(&self) -> u64 {
        self.ret_search_start() + 4 * self.n
    }

    /// Resolves a returning jump at source position `j` with target `l`.
    /// A target of 0 or past the program terminates; an unpushable source
    /// position deadlocks on itself; otherwise the push triple is entered.
    pub fn returning_jump_target(&self, j: u64, l: u64) -> RetJumpTarget {
        if l == 0 || l > self.k {
            RetJumpTarget::Terminate
        } else if j > self.maxn {
            RetJumpTarget::SelfJump(j)
        } else {
            RetJumpTarget::Push(self.push_start(j, l))
        }
    }

    pub fn total_len(&self) -> u64 {
        self.final_jump_pos()
    }
}

/// The offset table of one projection instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OffsetTable {
    Pgldij(PgldijOffsets),
    Pglcij(PglcijOffsets),
    Pglddij(PglddijOffsets),
    Pgldrj(PgldrjOffsets),
}

// ---------------------------------------------------------------------------
// Projections
// ---------------------------------------------------------------------------

fn rf_eq(i: u64, h: u64) -> Action {
    Action::new("rf", format!("eq:{i}:{h}"))
}

/// Lowers PGLDij to PGLD: indirect jumps become direct jumps to a per-register
/// search block of `+rf.eq:i:h; ##h` entries ending in `##0` (a vacant
/// register terminates). Direct jumps past the program become `##0` so that
/// nothing jumps into the appended code.
pub fn pgldij_to_pgld(
    program: &Program<PgldijInstruction>,
    env: &EnvParams,
) -> Program<PgldInstruction> {
    pgldij_to_pgld_with_shift(program, env, 0)
}

/// Same as [`pgldij_to_pgld`] with every block start shifted by `shift`.
/// A non-zero shift deliberately breaks the layout; the differential harness
/// uses it to prove it can detect a broken projection.
pub(crate) fn pgldij_to_pgld_with_shift(
    program: &Program<PgldijInstruction>,
    env: &EnvParams,
    shift: u64,
) -> Program<PgldInstruction> {
    let offsets = PgldijOffsets::new(program.len() as u64, env);
    let k = offsets.k;
    let mut out: Vec<PgldInstruction> = Vec::with_capacity(offsets.total_len() as usize);

    for ins in program.iter() {
        out.push(match ins {
            PgldijInstruction::Plain(a) => PgldInstruction::Plain(a.clone()),
            PgldijInstruction::PosTest(a) => PgldInstruction::PosTest(a.clone()),
            PgldijInstruction::NegTest(a) => PgldInstruction::NegTest(a.clone()),
            PgldijInstruction::AbsJump(l) => {
                PgldInstruction::AbsJump(if *l <= k { *l } else { 0 })
            }
            PgldijInstruction::IndAbsJump(i) => {
                assert!(*i >= 1 && *i <= env.maxr, "register index {i} out of range");
                PgldInstruction::AbsJump(offsets.block_start(*i) + shift)
            }
        });
    }
    out.push(PgldInstruction::AbsJump(0));
    out.push(PgldInstruction::AbsJump(0));

    for i in 1..=env.maxr {
        for h in 1..=offsets.n {
            out.push(PgldInstruction::PosTest(rf_eq(i, h)));
            out.push(PgldInstruction::AbsJump(h));
        }
        out.push(PgldInstruction::AbsJump(0));
    }

    debug_assert_eq!(out.len() as u64, offsets.total_len());
    Program::new(out).expect("projection output is non-empty")
}

/// Lowers PGLCij to PGLC.
///
/// An indirect jump at position `j` becomes a forward jump of distance
/// `block_start - j`, entering the search block for that (register, position)
/// pair at its first entry; the literal block-start offset would overshoot by
/// `j`, which is why the distance is relative here. Each block holds one
/// entry per storable value `h`, whose backward jump lands exactly on `j + h`
/// (forward case) or `j - h` (backward case); out-of-range entries jump back
/// past position 1, which terminates. Out-of-range direct forward jumps
/// become `\j` (also termination) so nothing jumps into the appended code.
pub fn pglcij_to_pglc(
    program: &Program<PglcijInstruction>,
    env: &EnvParams,
) -> Program<PglcInstruction> {
    let offsets = PglcijOffsets::new(program.len() as u64, env);
    let k = offsets.k;
    let mut out: Vec<PglcInstruction> = Vec::with_capacity(offsets.total_len() as usize);

    for (idx, ins) in program.iter().enumerate() {
        let j = idx as u64 + 1;
        out.push(match ins {
            PglcijInstruction::Plain(a) => PglcInstruction::Plain(a.clone()),
            PglcijInstruction::PosTest(a) => PglcInstruction::PosTest(a.clone()),
            PglcijInstruction::NegTest(a) => PglcInstruction::NegTest(a.clone()),
            PglcijInstruction::FwdJump(l) => {
                if j.checked_add(*l).is_some_and(|t| t <= k) {
                    PglcInstruction::FwdJump(*l)
                } else {
                    PglcInstruction::BwdJump(j)
                }
            }
            PglcijInstruction::BwdJump(l) => PglcInstruction::BwdJump(*l),
            PglcijInstruction::IndFwdJump(i) => {
                assert!(*i >= 1 && *i <= env.maxr, "register index {i} out of range");
                PglcInstruction::FwdJump(offsets.fwd_block_start(*i, j) - j)
            }
            PglcijInstruction::IndBwdJump(i) => {
                assert!(*i >= 1 && *i <= env.maxr, "register index {i} out of range");
                PglcInstruction::FwdJump(offsets.bwd_block_start(*i, j) - j)
            }
        });
    }
    out.push(PglcInstruction::BwdJump(k + 1));
    out.push(PglcInstruction::BwdJump(k + 2));

    for i in 1..=env.maxr {
        for j in 1..=k {
            for h in 0..=env.maxn {
                out.push(PglcInstruction::PosTest(rf_eq(i, h)));
                out.push(PglcInstruction::BwdJump(offsets.fwd_entry_distance(i, j, h)));
            }
        }
    }
    for i in 1..=env.maxr {
        for j in 1..=k {
            for h in 0..=env.maxn {
                out.push(PglcInstruction::PosTest(rf_eq(i, h)));
                out.push(PglcInstruction::BwdJump(offsets.bwd_entry_distance(i, j, h)));
            }
        }
    }

    debug_assert_eq!(out.len() as u64, offsets.total_len());
    Program::new(out).expect("projection output is non-empty")
}

/// Lowers PGLDdij to PGLDij: double indirect jumps become direct jumps to a
/// search block that finds the named register `h` and performs the single
/// indirect jump `i##h`. `##0` padding after the appended halts keeps every
/// block start beyond both the program and the largest storable position.
pub fn pglddij_to_pgldij(
    program: &Program<PglddijInstruction>,
    env: &EnvParams,
) -> Program<PgldijInstruction> {
    let offsets = PglddijOffsets::new(program.len() as u64, env);
    let k = offsets.k;
    let mut out: Vec<PgldijInstruction> = Vec::with_capacity(offsets.total_len() as usize);

    for ins in program.iter() {
        out.push(match ins {
            PglddijInstruction::Plain(a) => PgldijInstruction::Plain(a.clone()),
            PglddijInstruction::PosTest(a) => PgldijInstruction::PosTest(a.clone()),
            PglddijInstruction::NegTest(a) => PgldijInstruction::NegTest(a.clone()),
            PglddijInstruction::AbsJump(l) => {
                PgldijInstruction::AbsJump(if *l <= k { *l } else { 0 })
            }
            PglddijInstruction::IndAbsJump(i) => {
                assert!(*i >= 1 && *i <= env.maxr, "register index {i} out of range");
                PgldijInstruction::IndAbsJump(*i)
            }
            PglddijInstruction::DblIndAbsJump(i) => {
                assert!(*i >= 1 && *i <= env.maxr, "register index {i} out of range");
                PgldijInstruction::AbsJump(offsets.block_start(*i))
            }
        });
    }
    out.push(PgldijInstruction::AbsJump(0));
    out.push(PgldijInstruction::AbsJump(0));
    for _ in 0..offsets.padding_len() {
        out.push(PgldijInstruction::AbsJump(0));
    }

    for i in 1..=env.maxr {
        for h in 1..=offsets.n {
            out.push(PgldijInstruction::PosTest(rf_eq(i, h)));
            out.push(PgldijInstruction::IndAbsJump(h));
        }
        out.push(PgldijInstruction::AbsJump(0));
    }

    debug_assert_eq!(out.len() as u64, offsets.total_len());
    Program::new(out).expect("projection output is non-empty")
}

/// Lowers PGLDrj to PGLD.
///
/// A returning jump to `l` at position `j` enters the push triple
/// `+st.push:j; ##l; ##final`: push the return position, then jump; a failed
/// push (stack overflow) falls through to the final self-jump and deadlocks.
/// A `ret` enters the return search: quadruples `-st.topeq:h; ##next; st.pop;
/// ##(h+1)` pop the found position and resume right after it; if no value
/// matches, the stack is empty and the final self-jump deadlocks. A return
/// position of `k` resumes at `k + 1`, the first appended `##0`, and
/// terminates.
pub fn pgldrj_to_pgld(
    program: &Program<PgldrjInstruction>,
    env: &EnvParams,
) -> Program<PgldInstruction> {
    let offsets = PgldrjOffsets::new(program.len() as u64, env);
    let k = offsets.k;
    let final_pos = offsets.final_jump_pos();
    let mut out: Vec<PgldInstruction> = Vec::with_capacity(offsets.total_len() as usize);

    for (idx, ins) in program.iter().enumerate() {
        let j = idx as u64 + 1;
        out.push(match ins {
            PgldrjInstruction::Plain(a) | PgldrjInstruction::PosTest(a) | PgldrjInstruction::NegTest(a) => {
                assert!(a.focus() != "st", "basic instructions must not use the reserved focus st");
                match ins {
                    PgldrjInstruction::Plain(_) => PgldInstruction::Plain(a.clone()),
                    PgldrjInstruction::PosTest(_) => PgldInstruction::PosTest(a.clone()),
                    _ => PgldInstruction::NegTest(a.clone()),
                }
            }
            PgldrjInstruction::AbsJump(l) => {
                PgldInstruction::AbsJump(if *l <= k { *l } else { 0 })
            }
            PgldrjInstruction::RetAbsJump(l) => {
                PgldInstruction::AbsJump(match offsets.returning_jump_target(j, *l) {
                    RetJumpTarget::Terminate => 0,
                    RetJumpTarget::SelfJump(pos) => pos,
                    RetJumpTarget::Push(start) => start,
                })
            }
            PgldrjInstruction::Return => PgldInstruction::AbsJump(offsets.ret_search_start()),
        });
    }
    out.push(PgldInstruction::AbsJump(0));
    out.push(PgldInstruction::AbsJump(0));

    for value in 1..=offsets.n {
        for target in 1..=k {
            out.push(PgldInstruction::PosTest(Action::new("st", format!("push:{value}"))));
            out.push(PgldInstruction::AbsJump(target));
            out.push(PgldInstruction::AbsJump(final_pos));
        }
    }
    for h in 1..=offsets.n {
        out.push(PgldInstruction::NegTest(Action::new("st", format!("topeq:{h}"))));
        out.push(PgldInstruction::AbsJump(offsets.quad_next(h)));
        out.push(PgldInstruction::Plain(Action::new("st", "pop")));
        out.push(PgldInstruction::AbsJump(h + 1));
    }
    out.push(PgldInstruction::AbsJump(final_pos));

    debug_assert_eq!(out.len() as u64, offsets.total_len());
    Program::new(out).expect("projection output is non-empty")
}

// ---------------------------------------------------------------------------
// Behaviours
// ---------------------------------------------------------------------------

/// Behaviour of a PGLDij program: lower to PGLD, extract, and hide the
/// register-file actions against the all-zero register file.
pub fn behavior_pgldij(program: &Program<PgldijInstruction>, env: &EnvParams) -> ThreadGraph {
    let lowered = pgldij_to_pgld(program, env);
    compose_use(&behavior_pgld(&lowered), "rf", &register_file_init(env))
}

pub(crate) fn behavior_pgldij_with_shift(
    program: &Program<PgldijInstruction>,
    env: &EnvParams,
    shift: u64,
) -> ThreadGraph {
    let lowered = pgldij_to_pgld_with_shift(program, env, shift);
    compose_use(&behavior_pgld(&lowered), "rf", &register_file_init(env))
}

/// Behaviour of a PGLCij program: lower to PGLC, extract, and hide the
/// register-file actions.
pub fn behavior_pglcij(program: &Program<PglcijInstruction>, env: &EnvParams) -> ThreadGraph {
    let lowered = pglcij_to_pglc(program, env);
    compose_use(&behavior_pglc(&lowered), "rf", &register_file_init(env))
}

/// Behaviour of a PGLDdij program: lower to PGLDij, then on down the chain,
/// hiding the register-file actions at the end.
pub fn behavior_pglddij(program: &Program<PglddijInstruction>, env: &EnvParams) -> ThreadGraph {
    let lowered = pglddij_to_pgldij(program, env);
    behavior_pgldij(&lowered, env)
}

/// Behaviour of a PGLDrj program: lower to PGLD, extract, and hide the stack
/// actions against the empty stack.
pub fn behavior_pgldrj(program: &Program<PgldrjInstruction>, env: &EnvParams) -> ThreadGraph {
    let lowered = pgldrj_to_pgld(program, env);
    compose_use(&behavior_pgld(&lowered), "st", &stack_init(env))
}

// ---------------------------------------------------------------------------
// Layout audits
// ---------------------------------------------------------------------------

macro_rules! audit_check {
    ($cond:expr, $($msg:tt)*) => {
        if !$cond {
            return Err(format!($($msg)*));
        }
    };
}

/// Checks the emitted PGLD program against the PGLDij offset table: block
/// starts, entry shapes, entry landings, and the rule that no direct jump
/// from the program region targets appended positions other than block
/// starts.
pub fn audit_pgldij_layout(
    source: &Program<PgldijInstruction>,
    emitted: &Program<PgldInstruction>,
    env: &EnvParams,
) -> Result<(), String> {
    let o = PgldijOffsets::new(source.len() as u64, env);
    audit_check!(
        emitted.len() as u64 == o.total_len(),
        "emitted length {} != expected {}",
        emitted.len(),
        o.total_len()
    );
    for p in [o.k + 1, o.k + 2] {
        audit_check!(
            emitted.at(p) == Some(&PgldInstruction::AbsJump(0)),
            "position {p} should be ##0"
        );
    }
    let mut block_starts = std::collections::HashSet::new();
    for i in 1..=env.maxr {
        let start = o.block_start(i);
        block_starts.insert(start);
        for h in 1..=o.n {
            let test_pos = start + 2 * (h - 1);
            audit_check!(
                emitted.at(test_pos) == Some(&PgldInstruction::PosTest(rf_eq(i, h))),
                "block {i} entry {h}: expected +rf.eq at {test_pos}"
            );
            // the landing equals the found register content, the prose target
            audit_check!(
                emitted.at(test_pos + 1) == Some(&PgldInstruction::AbsJump(h)),
                "block {i} entry {h}: expected ##{h} at {}",
                test_pos + 1
            );
        }
        audit_check!(
            emitted.at(start + 2 * o.n) == Some(&PgldInstruction::AbsJump(0)),
            "block {i}: expected trailing ##0"
        );
    }
    for j in 1..=o.k {
        if let Some(PgldInstruction::AbsJump(l)) = emitted.at(j) {
            audit_check!(
                *l <= o.k || block_starts.contains(l),
                "program-region jump at {j} targets undocumented position {l}"
            );
        }
    }
    Ok(())
}

/// Checks the emitted PGLC program against the PGLCij offset table: block
/// starts, entry shapes, and every in-range entry landing on `j + h` or
/// `j - h` exactly; out-of-range entries must land before position 1.
pub fn audit_pglcij_layout(
    source: &Program<PglcijInstruction>,
    emitted: &Program<PglcInstruction>,
    env: &EnvParams,
) -> Result<(), String> {
    let o = PglcijOffsets::new(source.len() as u64, env);
    audit_check!(
        emitted.len() as u64 == o.total_len(),
        "emitted length {} != expected {}",
        emitted.len(),
        o.total_len()
    );
    audit_check!(
        emitted.at(o.k + 1) == Some(&PglcInstruction::BwdJump(o.k + 1)),
        "position {} should be \\{}",
        o.k + 1,
        o.k + 1
    );
    audit_check!(
        emitted.at(o.k + 2) == Some(&PglcInstruction::BwdJump(o.k + 2)),
        "position {} should be \\{}",
        o.k + 2,
        o.k + 2
    );

    let check_block = |start: u64, i: u64, j: u64, backward: bool| -> Result<(), String> {
        for h in 0..=env.maxn {
            let test_pos = start + 2 * h;
            audit_check!(
                emitted.at(test_pos) == Some(&PglcInstruction::PosTest(rf_eq(i, h))),
                "block ({i},{j},bwd={backward}) entry {h}: expected +rf.eq at {test_pos}"
            );
            let jump_pos = test_pos + 1;
            let distance = match emitted.at(jump_pos) {
                Some(PglcInstruction::BwdJump(d)) => *d,
                other => {
                    return Err(format!(
                        "block ({i},{j},bwd={backward}) entry {h}: expected backward jump, got {other:?}"
                    ))
                }
            };
            let landing = jump_pos as i128 - distance as i128;
            let in_range = if backward { h <= j } else { j + h <= o.k };
            if in_range {
                let expected = if backward { j as i128 - h as i128 } else { (j + h) as i128 };
                audit_check!(
                    landing == expected,
                    "block ({i},{j},bwd={backward}) entry {h}: lands on {landing}, prose target {expected}"
                );
            } else {
                audit_check!(
                    landing < 1,
                    "block ({i},{j},bwd={backward}) entry {h}: out-of-range entry lands on {landing}"
                );
            }
        }
        Ok(())
    };

    for i in 1..=env.maxr {
        for j in 1..=o.k {
            check_block(o.fwd_block_start(i, j), i, j, false)?;
            check_block(o.bwd_block_start(i, j), i, j, true)?;
        }
    }

    // Forward jumps in the program region stay inside it or are the lowered
    // indirect jumps entering their own block start.
    for j in 1..=o.k {
        if let Some(PglcInstruction::FwdJump(l)) = emitted.at(j) {
            let target = j + l;
            let documented = (1..=env.maxr).any(|i| {
                o.fwd_block_start(i, j) == target || o.bwd_block_start(i, j) == target
            });
            audit_check!(
                target <= o.k || documented,
                "program-region forward jump at {j} lands on undocumented position {target}"
            );
        }
    }
    Ok(())
}

/// Checks the emitted PGLDij program against the PGLDdij offset table.
pub fn audit_pglddij_layout(
    source: &Program<PglddijInstruction>,
    emitted: &Program<PgldijInstruction>,
    env: &EnvParams,
) -> Result<(), String> {
    let o = PglddijOffsets::new(source.len() as u64, env);
    audit_check!(
        emitted.len() as u64 == o.total_len(),
        "emitted length {} != expected {}",
        emitted.len(),
        o.total_len()
    );
    for p in (o.k + 1)..=(o.k + 2 + o.padding_len()) {
        audit_check!(
            emitted.at(p) == Some(&PgldijInstruction::AbsJump(0)),
            "position {p} should be ##0 padding"
        );
    }
    let mut block_starts = std::collections::HashSet::new();
    for i in 1..=env.maxr {
        let start = o.block_start(i);
        block_starts.insert(start);
        audit_check!(
            start > o.k + 2 + o.padding_len() || i > 1,
            "block 1 start {start} overlaps the program region"
        );
        for h in 1..=o.n {
            let test_pos = start + 2 * (h - 1);
            audit_check!(
                emitted.at(test_pos) == Some(&PgldijInstruction::PosTest(rf_eq(i, h))),
                "block {i} entry {h}: expected +rf.eq at {test_pos}"
            );
            audit_check!(
                emitted.at(test_pos + 1) == Some(&PgldijInstruction::IndAbsJump(h)),
                "block {i} entry {h}: expected i##{h} at {}",
                test_pos + 1
            );
        }
        audit_check!(
            emitted.at(start + 2 * o.n) == Some(&PgldijInstruction::AbsJump(0)),
            "block {i}: expected trailing ##0"
        );
    }
    for j in 1..=o.k {
        if let Some(PgldijInstruction::AbsJump(l)) = emitted.at(j) {
            audit_check!(
                *l <= o.k || block_starts.contains(l),
                "program-region jump at {j} targets undocumented position {l}"
            );
        }
    }
    Ok(())
}

/// Checks the emitted PGLD program against the PGLDrj offset table: push
/// triples, return quadruples (whose final jump resumes at `h + 1`), the
/// final self-jump, and documented targets only.
pub fn audit_pgldrj_layout(
    source: &Program<PgldrjInstruction>,
    emitted: &Program<PgldInstruction>,
    env: &EnvParams,
) -> Result<(), String> {
    let o = PgldrjOffsets::new(source.len() as u64, env);
    audit_check!(
        emitted.len() as u64 == o.total_len(),
        "emitted length {} != expected {}",
        emitted.len(),
        o.total_len()
    );
    for p in [o.k + 1, o.k + 2] {
        audit_check!(
            emitted.at(p) == Some(&PgldInstruction::AbsJump(0)),
            "position {p} should be ##0"
        );
    }
    let final_pos = o.final_jump_pos();
    let mut documented = std::collections::HashSet::new();
    documented.insert(o.ret_search_start());
    documented.insert(final_pos);

    for value in 1..=o.n {
        for target in 1..=o.k {
            let start = o.push_start(value, target);
            documented.insert(start);
            audit_check!(
                emitted.at(start)
                    == Some(&PgldInstruction::PosTest(Action::new(
                        "st",
                        format!("push:{value}")
                    ))),
                "triple ({value},{target}): expected +st.push at {start}"
            );
            audit_check!(
                emitted.at(start + 1) == Some(&PgldInstruction::AbsJump(target)),
                "triple ({value},{target}): expected ##{target} (the prose target) at {}",
                start + 1
            );
            audit_check!(
                emitted.at(start + 2) == Some(&PgldInstruction::AbsJump(final_pos)),
                "triple ({value},{target}): expected overflow jump ##{final_pos}"
            );
        }
    }
    for h in 1..=o.n {
        let start = o.quad_start(h);
        audit_check!(
            emitted.at(start)
                == Some(&PgldInstruction::NegTest(Action::new("st", format!("topeq:{h}")))),
            "quad {h}: expected -st.topeq at {start}"
        );
        audit_check!(
            emitted.at(start + 1) == Some(&PgldInstruction::AbsJump(o.quad_next(h))),
            "quad {h}: expected miss jump to {}",
            o.quad_next(h)
        );
        audit_check!(
            emitted.at(start + 2) == Some(&PgldInstruction::Plain(Action::new("st", "pop"))),
            "quad {h}: expected st.pop at {}",
            start + 2
        );
        // resumes at the instruction after the returning jump
        audit_check!(
            emitted.at(start + 3) == Some(&PgldInstruction::AbsJump(h + 1)),
            "quad {h}: expected resume jump ##{}",
            h + 1
        );
    }
    audit_check!(
        emitted.at(final_pos) == Some(&PgldInstruction::AbsJump(final_pos)),
        "expected final self-jump at {final_pos}"
    );
    for j in 1..=o.k {
        if let Some(PgldInstruction::AbsJump(l)) = emitted.at(j) {
            audit_check!(
                *l <= o.k || documented.contains(l),
                "program-region jump at {j} targets undocumented position {l}"
            );
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::thread::{action_prefix, bisimilar};

    fn act(s: &str) -> Action {
        let (f, m) = s.split_once('.').unwrap();
        Action::new(f, m)
    }

    fn env(maxr: u64, maxn: u64, maxs: u64) -> EnvParams {
        EnvParams::new(maxr, maxn, maxs).unwrap()
    }

    #[test]
    fn pgldij_offsets() {
        let o = PgldijOffsets::new(2, &env(1, 4, 4));
        assert_eq!(o.n, 2);
        assert_eq!(o.block_start(1), 5);
        let o = PgldijOffsets::new(2, &env(3, 1, 4));
        assert_eq!(o.n, 1);
        assert_eq!(o.block_start(2), 8);
    }

    #[test]
    fn pgldij_projection_matches_worked_example() {
        let e = env(1, 4, 4);
        let p = Program::new(vec![
            PgldijInstruction::Plain(act("rf.set:1:2")),
            PgldijInstruction::IndAbsJump(1),
        ])
        .unwrap();
        let lowered = pgldij_to_pgld(&p, &e);
        assert_eq!(
            lowered.to_string(),
            "rf.set:1:2; ##5; ##0; ##0; +rf.eq:1:1; ##1; +rf.eq:1:2; ##2; ##0"
        );
        assert!(audit_pgldij_layout(&p, &lowered, &e).is_ok());
    }

    #[test]
    fn pgldij_caps_overlong_direct_jumps() {
        let e = env(1, 4, 4);
        let p = Program::new(vec![PgldijInstruction::AbsJump(7)]).unwrap();
        let lowered = pgldij_to_pgld(&p, &e);
        assert_eq!(lowered.at(1), Some(&PgldInstruction::AbsJump(0)));
    }

    #[test]
    fn pglcij_offsets_worked_example() {
        let o = PglcijOffsets::new(1, &env(1, 1, 4));
        assert_eq!(o.fwd_block_start(1, 1), 4);
        // entry h=1 is out of range (j + h = 2 > k = 1): sentinel distance
        assert_eq!(o.fwd_entry_distance(1, 1, 1), 8);
        // entry h=0 loops back to the source position
        assert_eq!(o.fwd_entry_distance(1, 1, 0), 4);
        assert_eq!(o.bwd_block_start(1, 1), 8);
        assert_eq!(o.total_len(), 11);
    }

    #[test]
    fn pglcij_indirect_jump_enters_its_block() {
        let e = env(1, 1, 4);
        let p = Program::new(vec![PglcijInstruction::IndFwdJump(1)]).unwrap();
        let lowered = pglcij_to_pglc(&p, &e);
        // position 1 jumps forward 3, landing on absolute 4, the block start
        assert_eq!(lowered.at(1), Some(&PglcInstruction::FwdJump(3)));
        assert!(audit_pglcij_layout(&p, &lowered, &e).is_ok());
    }

    #[test]
    fn pglddij_offsets_and_padding() {
        let o = PglddijOffsets::new(1, &env(2, 4, 4));
        assert_eq!(o.padding_len(), 1);
        assert_eq!(o.block_start(1), 5);
        assert_eq!(o.block_start(2), 10);

        // when maxn < k + 2 the padding vanishes and the blocks start after
        // the appended halts, not at maxn + 1
        let o = PglddijOffsets::new(4, &env(1, 3, 4));
        assert_eq!(o.padding_len(), 0);
        assert_eq!(o.block_start(1), 7);
    }

    #[test]
    fn pglddij_projection_matches_worked_example() {
        let e = env(2, 4, 4);
        let p = Program::new(vec![PglddijInstruction::DblIndAbsJump(1)]).unwrap();
        let lowered = pglddij_to_pgldij(&p, &e);
        assert_eq!(
            lowered.to_string(),
            "##5; ##0; ##0; ##0; +rf.eq:1:1; i##1; +rf.eq:1:2; i##2; ##0; \
             +rf.eq:2:1; i##1; +rf.eq:2:2; i##2; ##0"
        );
        assert!(audit_pglddij_layout(&p, &lowered, &e).is_ok());
    }

    #[test]
    fn pgldrj_offsets_worked_example() {
        let o = PgldrjOffsets::new(3, &env(3, 8, 4));
        assert_eq!(o.n, 3);
        assert_eq!(o.ret_search_start(), 33);
        assert_eq!(o.final_jump_pos(), 45);
        assert_eq!(o.quad_next(1), 37);
        assert_eq!(o.push_start(1, 3), 12);
        assert_eq!(o.returning_jump_target(1, 0), RetJumpTarget::Terminate);
        assert_eq!(o.returning_jump_target(1, 4), RetJumpTarget::Terminate);
    }

    #[test]
    fn pgldrj_unpushable_position_self_jumps() {
        let e = env(1, 1, 4);
        // k = 2, n = 1: a returning jump at position 2 cannot push 2 > maxn
        let p = Program::new(vec![
            PgldrjInstruction::Plain(act("a.m")),
            PgldrjInstruction::RetAbsJump(1),
        ])
        .unwrap();
        let lowered = pgldrj_to_pgld(&p, &e);
        assert_eq!(lowered.at(2), Some(&PgldInstruction::AbsJump(2)));
        assert!(audit_pgldrj_layout(&p, &lowered, &e).is_ok());
    }

    #[test]
    fn pgldrj_audit_passes_on_worked_example() {
        let e = env(3, 8, 4);
        let p = Program::new(vec![
            PgldrjInstruction::RetAbsJump(3),
            PgldrjInstruction::Plain(act("a.b")),
            PgldrjInstruction::Return,
        ])
        .unwrap();
        let lowered = pgldrj_to_pgld(&p, &e);
        assert_eq!(lowered.at(1), Some(&PgldInstruction::AbsJump(12)));
        assert_eq!(lowered.at(3), Some(&PgldInstruction::AbsJump(33)));
        assert!(audit_pgldrj_layout(&p, &lowered, &e).is_ok());
    }

    #[test]
    fn behavior_pgldij_examples() {
        // register 1 holds 0: the search misses and execution terminates
        let p = Program::new(vec![
            PgldijInstruction::Plain(act("rf.set:1:0")),
            PgldijInstruction::IndAbsJump(1),
        ])
        .unwrap();
        let g = behavior_pgldij(&p, &env(1, 2, 4));
        assert!(bisimilar(&g, &ThreadGraph::stop()));

        // register 1 holds 2: the indirect jump re-enters itself and diverges
        let p = Program::new(vec![
            PgldijInstruction::Plain(act("rf.set:1:2")),
            PgldijInstruction::IndAbsJump(1),
        ])
        .unwrap();
        let g = behavior_pgldij(&p, &env(1, 4, 4));
        assert!(bisimilar(&g, &ThreadGraph::deadlock()));
    }

    #[test]
    fn behavior_pgldrj_examples() {
        // jump to 3, return resumes at 2, second return finds an empty stack
        let p = Program::new(vec![
            PgldrjInstruction::RetAbsJump(3),
            PgldrjInstruction::Plain(act("a.b")),
            PgldrjInstruction::Return,
        ])
        .unwrap();
        let g = behavior_pgldrj(&p, &env(3, 4, 2));
        let expected = action_prefix(act("a.b"), &ThreadGraph::deadlock());
        assert!(bisimilar(&g, &expected));

        // zero-capacity stack: the push fails and the overflow path deadlocks
        let p = Program::new(vec![
            PgldrjInstruction::RetAbsJump(2),
            PgldrjInstruction::Plain(act("a.m")),
        ])
        .unwrap();
        let g = behavior_pgldrj(&p, &EnvParams { maxr: 3, maxn: 8, maxs: 0 });
        assert!(bisimilar(&g, &ThreadGraph::deadlock()));
    }

    #[test]
    fn behavior_pglcij_backward_zero_register_diverges() {
        let p = Program::new(vec![PglcijInstruction::IndBwdJump(1)]).unwrap();
        let g = behavior_pglcij(&p, &env(1, 1, 4));
        assert!(bisimilar(&g, &ThreadGraph::deadlock()));
    }

    #[test]
    fn behavior_pglddij_through_two_registers() {
        // r1 := 2, r2 := 1: di##1 reads r1 = 2, then jumps to r2's content 1...
        // which is the set instruction again, but with identical state: the
        // silent cycle deadlocks.
        let p = Program::new(vec![
            PglddijInstruction::Plain(act("rf.set:1:2")),
            PglddijInstruction::Plain(act("rf.set:2:1")),
            PglddijInstruction::DblIndAbsJump(1),
        ])
        .unwrap();
        let g = behavior_pglddij(&p, &env(2, 4, 4));
        assert!(bisimilar(&g, &ThreadGraph::deadlock()));

        // vacant register: termination
        let p = Program::new(vec![PglddijInstruction::DblIndAbsJump(1)]).unwrap();
        let g = behavior_pglddij(&p, &env(2, 4, 4));
        assert!(bisimilar(&g, &ThreadGraph::stop()));
    }

    #[test]
    fn behavior_graphs_hide_all_service_actions() {
        let e = env(2, 4, 2);
        let seeds = 0..40u64;
        for seed in seeds {
            for notation in
                [crate::Notation::Pgldij, crate::Notation::Pglcij, crate::Notation::Pglddij]
            {
                let cfg = crate::interp::GenConfig::new(notation, 5, e, seed);
                let g = crate::interp::generate(&cfg).behavior(&e);
                assert!(
                    g.actions().all(|a| a.focus() != "rf"),
                    "{notation} seed {seed}: rf action leaked"
                );
            }
            let cfg = crate::interp::GenConfig::new(crate::Notation::Pgldrj, 5, e, seed);
            let g = crate::interp::generate(&cfg).behavior(&e);
            assert!(g.actions().all(|a| a.focus() != "st"), "pgldrj seed {seed}: st action leaked");
        }
    }

    #[test]
    fn pglddij_projection_keeps_single_indirection_only() {
        // Double indirect jumps are gone after one projection step; single
        // indirect jumps remain (the other projections eliminate theirs by
        // construction of the target instruction type).
        let e = env(2, 3, 4);
        let p = Program::new(vec![
            PglddijInstruction::DblIndAbsJump(1),
            PglddijInstruction::IndAbsJump(2),
        ])
        .unwrap();
        let lowered = pglddij_to_pgldij(&p, &e);
        assert!(lowered.iter().any(|i| matches!(i, PgldijInstruction::IndAbsJump(_))));
        assert_eq!(lowered.at(1), Some(&PgldijInstruction::AbsJump(5)));
    }
}
