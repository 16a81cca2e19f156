//! Program algebra: instruction sequences built from primitive instructions,
//! concatenation, and repetition. Terms normalize to a canonical form (a
//! finite prefix plus an optional repeated cycle), jump chains collapse under
//! structural congruence, and every canonical form extracts to a guarded
//! recursive specification describing its behaviour.

use std::fmt;

use thiserror::Error;

use crate::thread::{Action, RecursiveSpec, SpecRhs, SpecTerm, ThreadGraph};

/// A primitive instruction.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PgaInstruction {
    /// Perform the action and continue regardless of the reply.
    Plain(Action),
    /// Perform the action; on a negative reply skip the next instruction.
    PosTest(Action),
    /// Perform the action; on a positive reply skip the next instruction.
    NegTest(Action),
    /// Continue with the l-th next instruction. `#0` deadlocks.
    FwdJump(u64),
    /// Terminate.
    Halt,
}

impl fmt::Display for PgaInstruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PgaInstruction::Plain(a) => write!(f, "{a}"),
            PgaInstruction::PosTest(a) => write!(f, "+{a}"),
            PgaInstruction::NegTest(a) => write!(f, "-{a}"),
            PgaInstruction::FwdJump(l) => write!(f, "#{l}"),
            PgaInstruction::Halt => write!(f, "!"),
        }
    }
}

/// A term: a single instruction, a concatenation, or a repetition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PgaTerm {
    Instr(PgaInstruction),
    Concat(Box<PgaTerm>, Box<PgaTerm>),
    Repeat(Box<PgaTerm>),
}

impl PgaTerm {
    pub fn concat(left: PgaTerm, right: PgaTerm) -> PgaTerm {
        PgaTerm::Concat(Box::new(left), Box::new(right))
    }

    pub fn repeat(inner: PgaTerm) -> PgaTerm {
        PgaTerm::Repeat(Box::new(inner))
    }

    /// Right-associated concatenation of a non-empty instruction list.
    pub fn sequence(instructions: Vec<PgaInstruction>) -> PgaTerm {
        assert!(!instructions.is_empty(), "PGA terms are non-empty");
        let mut iter = instructions.into_iter().rev();
        let mut term = PgaTerm::Instr(iter.next().unwrap());
        for ins in iter {
            term = PgaTerm::concat(PgaTerm::Instr(ins), term);
        }
        term
    }

    /// Number of instruction constants in the term.
    pub fn size(&self) -> usize {
        match self {
            PgaTerm::Instr(_) => 1,
            PgaTerm::Concat(l, r) => l.size() + r.size(),
            PgaTerm::Repeat(t) => t.size(),
        }
    }
}

impl fmt::Display for PgaTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PgaTerm::Instr(i) => write!(f, "{i}"),
            PgaTerm::Concat(l, r) => write!(f, "{l}; {r}"),
            PgaTerm::Repeat(t) => write!(f, "({t})w"),
        }
    }
}

/// Canonical form: a finite instruction sequence `prefix`, optionally followed
/// by `cycle` repeated forever. The two are never both empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalForm {
    prefix: Vec<PgaInstruction>,
    cycle: Vec<PgaInstruction>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PgaError {
    #[error("canonical form must have a non-empty prefix or cycle")]
    EmptyForm,
    #[error("cannot unfold a finite program")]
    UnfoldFinite,
}

impl CanonicalForm {
    pub fn new(prefix: Vec<PgaInstruction>, cycle: Vec<PgaInstruction>) -> Result<Self, PgaError> {
        if prefix.is_empty() && cycle.is_empty() {
            return Err(PgaError::EmptyForm);
        }
        Ok(CanonicalForm { prefix, cycle })
    }

    pub fn prefix(&self) -> &[PgaInstruction] {
        &self.prefix
    }

    pub fn cycle(&self) -> &[PgaInstruction] {
        &self.cycle
    }

    pub fn is_finite(&self) -> bool {
        self.cycle.is_empty()
    }

    /// Total number of positions, `1..=len`, that carry distinct variables in
    /// thread extraction.
    pub fn positions(&self) -> usize {
        self.prefix.len() + self.cycle.len()
    }

    /// Instruction at 1-based position `p` of the denoted sequence, unrolling
    /// the cycle as needed. `None` beyond the end of a finite program.
    pub fn instruction_at(&self, p: u64) -> Option<&PgaInstruction> {
        let plen = self.prefix.len() as u64;
        if p == 0 {
            return None;
        }
        if p <= plen {
            return Some(&self.prefix[(p - 1) as usize]);
        }
        if self.cycle.is_empty() {
            return None;
        }
        let off = (p - plen - 1) % self.cycle.len() as u64;
        Some(&self.cycle[off as usize])
    }

    /// The first `n` instructions of the denoted sequence (fewer if the
    /// program is finite and shorter).
    pub fn denoted_prefix(&self, n: usize) -> Vec<PgaInstruction> {
        let mut out = Vec::with_capacity(n);
        for p in 1..=n as u64 {
            match self.instruction_at(p) {
                Some(ins) => out.push(ins.clone()),
                None => break,
            }
        }
        out
    }

    /// Maps a position of the unrolled sequence back into the canonical
    /// position range `1..=positions()`, folding cycle copies onto the first.
    /// Chain-following works in u128 so that huge jump counters cannot wrap.
    fn canonical_position(&self, p: u128) -> Option<u64> {
        let plen = self.prefix.len() as u128;
        let clen = self.cycle.len() as u128;
        if p == 0 {
            return None;
        }
        if p <= plen {
            return Some(p as u64);
        }
        if clen == 0 {
            return None;
        }
        Some((plen + 1 + (p - plen - 1) % clen) as u64)
    }
}

impl fmt::Display for CanonicalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |instrs: &[PgaInstruction]| {
            instrs.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("; ")
        };
        match (self.prefix.is_empty(), self.cycle.is_empty()) {
            (false, true) => write!(f, "{}", join(&self.prefix)),
            (true, false) => write!(f, "({})w", join(&self.cycle)),
            (false, false) => write!(f, "{}; ({})w", join(&self.prefix), join(&self.cycle)),
            (true, true) => unreachable!("canonical form is never empty"),
        }
    }
}

// ---------------------------------------------------------------------------
// Normalization
// ---------------------------------------------------------------------------

/// Rewrites a term to canonical form.
///
/// Concatenation is flattened; everything after a repetition is dropped; a
/// repetition whose body is already infinite collapses to that body; the
/// cycle is reduced to its shortest period. The prefix and the repeated block
/// are otherwise taken verbatim, so provably equal terms may normalize to
/// different canonical forms denoting the same instruction sequence.
pub fn normalize(term: &PgaTerm) -> CanonicalForm {
    let mut prefix = Vec::new();
    let mut cycle = Vec::new();
    flatten(term, &mut prefix, &mut cycle);
    if !cycle.is_empty() {
        let period = shortest_period(&cycle);
        cycle.truncate(period);
    }
    CanonicalForm { prefix, cycle }
}

/// Appends the flattening of `term` to `prefix`/`cycle`. Once a cycle is
/// present the denoted sequence is infinite and later instructions are
/// unreachable, so flattening stops contributing.
fn flatten(term: &PgaTerm, prefix: &mut Vec<PgaInstruction>, cycle: &mut Vec<PgaInstruction>) {
    let mut stack = vec![term];
    while let Some(t) = stack.pop() {
        if !cycle.is_empty() {
            return;
        }
        match t {
            PgaTerm::Instr(ins) => prefix.push(ins.clone()),
            PgaTerm::Concat(l, r) => {
                stack.push(r);
                stack.push(l);
            }
            PgaTerm::Repeat(body) => {
                let mut inner_prefix = Vec::new();
                let mut inner_cycle = Vec::new();
                flatten(body, &mut inner_prefix, &mut inner_cycle);
                if inner_cycle.is_empty() {
                    *cycle = inner_prefix;
                } else {
                    // The body is itself infinite; the outer repetition never
                    // recurs past its first pass.
                    prefix.extend(inner_prefix);
                    *cycle = inner_cycle;
                }
            }
        }
    }
}

fn shortest_period(cycle: &[PgaInstruction]) -> usize {
    let n = cycle.len();
    for d in 1..=n {
        if n.is_multiple_of(d) && cycle.iter().enumerate().all(|(i, ins)| *ins == cycle[i % d]) {
            return d;
        }
    }
    n
}

/// One application of the unfolding equation: the cycle is copied once onto
/// the end of the prefix. The denoted sequence is unchanged.
pub fn unfold_once(cf: &CanonicalForm) -> Result<CanonicalForm, PgaError> {
    if cf.cycle.is_empty() {
        return Err(PgaError::UnfoldFinite);
    }
    let mut prefix = cf.prefix.clone();
    prefix.extend(cf.cycle.iter().cloned());
    Ok(CanonicalForm { prefix, cycle: cf.cycle.clone() })
}

// ---------------------------------------------------------------------------
// Structural congruence: jump-chain collapsing
// ---------------------------------------------------------------------------

/// Where a chain of jumps starting at some position ends up.
enum ChainEnd {
    /// The chain reaches `#0`, or is cyclic (which denotes the same thing).
    Zero,
    /// The chain ends at this unrolled position, which holds a non-jump
    /// instruction or lies beyond the end of a finite program.
    Lands(u128),
}

fn follow_chain(cf: &CanonicalForm, from: u128) -> ChainEnd {
    let mut visited = std::collections::HashSet::new();
    let mut pos = from;
    loop {
        let canonical = match cf.canonical_position(pos) {
            Some(c) => c,
            None => return ChainEnd::Lands(pos),
        };
        match cf.instruction_at(canonical) {
            Some(PgaInstruction::FwdJump(0)) => return ChainEnd::Zero,
            Some(PgaInstruction::FwdJump(l)) => {
                if !visited.insert(canonical) {
                    return ChainEnd::Zero; // cyclic chain of jumps
                }
                // bounded: the visited set caps the number of hops, and each
                // hop adds at most u64::MAX
                pos += *l as u128;
            }
            _ => return ChainEnd::Lands(pos),
        }
    }
}

/// Collapses every chain of forward jumps to a single jump, the structural
/// congruence normal form.
///
/// A chain ending in `#0` (or revisiting a position, which is a cyclic chain)
/// becomes `#0`. Otherwise the jump is redirected to the chain's final
/// landing; distances of jumps located in the cycle are reduced modulo the
/// cycle length, and a prefix jump overshooting the first cycle copy is pulled
/// back into it. Idempotent, and extraction-preserving.
pub fn collapse_chains(cf: &CanonicalForm) -> CanonicalForm {
    let plen = cf.prefix.len() as u128;
    let clen = cf.cycle.len() as u128;

    let collapse_at = |p: u128, l: u64| -> PgaInstruction {
        if l == 0 {
            return PgaInstruction::FwdJump(0);
        }
        match follow_chain(cf, p + l as u128) {
            ChainEnd::Zero => PgaInstruction::FwdJump(0),
            ChainEnd::Lands(mut t) => {
                if p <= plen {
                    // Prefix jump: reduce the landing into the first cycle copy.
                    if clen > 0 && t > plen + clen {
                        t = plen + 1 + (t - plen - 1) % clen;
                    }
                    // A landing beyond a finite program stays beyond it even
                    // when the accumulated distance saturates.
                    PgaInstruction::FwdJump(u64::try_from(t - p).unwrap_or(u64::MAX))
                } else {
                    // Cycle jump: distance is taken modulo the cycle length.
                    PgaInstruction::FwdJump(((t - p) % clen) as u64)
                }
            }
        }
    };

    let map_region = |instrs: &[PgaInstruction], base: u128| -> Vec<PgaInstruction> {
        instrs
            .iter()
            .enumerate()
            .map(|(i, ins)| match ins {
                PgaInstruction::FwdJump(l) => collapse_at(base + i as u128 + 1, *l),
                other => other.clone(),
            })
            .collect()
    };

    CanonicalForm {
        prefix: map_region(&cf.prefix, 0),
        cycle: map_region(&cf.cycle, plen),
    }
}

// ---------------------------------------------------------------------------
// Thread extraction
// ---------------------------------------------------------------------------

/// What a position's thread resolves to once jumps are chased.
enum Resolved {
    Stop,
    Deadlock,
    /// Canonical position holding a plain or test instruction.
    At(u64),
}

/// Chases jumps starting at unrolled position `p`. A `#0`, a landing beyond
/// the end of a finite program, and a revisited position (a cyclic jump
/// chain) all resolve to deadlock; a halt resolves to stop.
fn resolve_position(cf: &CanonicalForm, p: u128) -> Resolved {
    let mut visited = std::collections::HashSet::new();
    let mut pos = p;
    loop {
        let canonical = match cf.canonical_position(pos) {
            Some(c) => c,
            None => return Resolved::Deadlock, // beyond the end of a finite program
        };
        match cf.instruction_at(canonical).expect("canonical position is in range") {
            PgaInstruction::FwdJump(0) => return Resolved::Deadlock,
            PgaInstruction::FwdJump(l) => {
                if !visited.insert(canonical) {
                    return Resolved::Deadlock; // cyclic jump chain
                }
                pos += *l as u128;
            }
            PgaInstruction::Halt => return Resolved::Stop,
            PgaInstruction::Plain(_) | PgaInstruction::PosTest(_) | PgaInstruction::NegTest(_) => {
                return Resolved::At(canonical)
            }
        }
    }
}

fn position_var(p: u64) -> String {
    format!("P{p}")
}

fn resolved_term(cf: &CanonicalForm, p: u128) -> SpecTerm {
    match resolve_position(cf, p) {
        Resolved::Stop => SpecTerm::Sub(Box::new(SpecRhs::Stop)),
        Resolved::Deadlock => SpecTerm::Sub(Box::new(SpecRhs::Deadlock)),
        Resolved::At(q) => SpecTerm::Var(position_var(q)),
    }
}

/// The behaviour of a canonical form as a guarded recursive specification
/// with one variable per position, pruned to the positions reachable from
/// position 1.
///
/// Plain instructions continue at the next position, test instructions branch
/// to the next position and the one after, `!` terminates, and jumps resolve
/// through `resolve_position` (deadlocking on `#0`, on a landing beyond a
/// finite program, and on cyclic jump chains). Successor positions that
/// resolve to a constant are inlined.
pub fn thread_extract(cf: &CanonicalForm) -> RecursiveSpec {
    // The guarded equation of the basic instruction at canonical position `p`.
    let basic_equation = |p: u64| -> SpecRhs {
        let succ = |offset: u64| resolved_term(cf, p as u128 + offset as u128);
        match cf.instruction_at(p).expect("position in range") {
            PgaInstruction::Plain(a) => {
                let next = succ(1);
                SpecRhs::Branch(a.clone(), next.clone(), next)
            }
            PgaInstruction::PosTest(a) => SpecRhs::Branch(a.clone(), succ(1), succ(2)),
            PgaInstruction::NegTest(a) => SpecRhs::Branch(a.clone(), succ(2), succ(1)),
            _ => unreachable!("caller resolves jumps and halts first"),
        }
    };

    let total = cf.positions() as u64;
    let mut equations = Vec::new();
    for p in 1..=total {
        let rhs = match cf.instruction_at(p).expect("position in range") {
            PgaInstruction::Halt => SpecRhs::Stop,
            PgaInstruction::FwdJump(_) => match resolve_position(cf, p as u128) {
                Resolved::Stop => SpecRhs::Stop,
                Resolved::Deadlock => SpecRhs::Deadlock,
                // Copy the target's guarded equation so every position keeps
                // a guarded right-hand side of its own.
                Resolved::At(q) => basic_equation(q),
            },
            _ => basic_equation(p),
        };
        equations.push((position_var(p), rhs));
    }

    prune_reachable(equations)
}

fn prune_reachable(equations: Vec<(String, SpecRhs)>) -> RecursiveSpec {
    use std::collections::HashSet;
    let index: std::collections::HashMap<&str, usize> = equations
        .iter()
        .enumerate()
        .map(|(i, (name, _))| (name.as_str(), i))
        .collect();
    let mut keep: HashSet<usize> = HashSet::new();
    let mut stack = vec![0usize];
    keep.insert(0);
    while let Some(i) = stack.pop() {
        let mut vars = Vec::new();
        collect_rhs_vars(&equations[i].1, &mut vars);
        for v in vars {
            let j = index[v];
            if keep.insert(j) {
                stack.push(j);
            }
        }
    }
    let kept: Vec<(String, SpecRhs)> = equations
        .into_iter()
        .enumerate()
        .filter(|(i, _)| keep.contains(i))
        .map(|(_, eq)| eq)
        .collect();
    RecursiveSpec::new(kept).expect("extraction emits well-formed specifications")
}

fn collect_rhs_vars<'a>(rhs: &'a SpecRhs, out: &mut Vec<&'a str>) {
    if let SpecRhs::Branch(_, left, right) = rhs {
        for term in [left, right] {
            match term {
                SpecTerm::Var(v) => out.push(v),
                SpecTerm::Sub(inner) => collect_rhs_vars(inner, out),
            }
        }
    }
}

/// Extraction followed by solving: the thread graph of a canonical form.
pub fn extract_behavior(cf: &CanonicalForm) -> ThreadGraph {
    let spec = thread_extract(cf);
    crate::thread::solve_spec(&spec, "P1").expect("position 1 always survives pruning")
}
