//! Direct operational interpreters for all six notations, a seeded random
//! program generator, and a shrinker.
//!
//! The interpreters build the same kind of thread graph as the projection
//! chain but from the prose execution rules, stepping a program counter and
//! an inlined register file or stack. They deliberately share no code with
//! the projections or the service framework: they are the oracle the chain
//! is tested against.

use std::collections::{HashMap, HashSet, VecDeque};
use std::hash::Hash;

use crate::indirect::{
    PglcijInstruction, PglddijInstruction, PgldijInstruction, PgldrjInstruction,
};
use crate::notation::{PglcInstruction, PgldInstruction, Program};
use crate::rng::SplitMix64;
use crate::service::EnvParams;
use crate::thread::{Action, ThreadGraph, ThreadNode};
use crate::{AnyProgram, Notation};

// ---------------------------------------------------------------------------
// Machine driver
// ---------------------------------------------------------------------------

/// One machine step: silent transitions carry the new program counter and
/// internal state; visible branches name the next counter for each reply
/// (the internal state never changes on a visible action).
enum Exec<S> {
    Stop,
    Deadlock,
    Silent(u64, S),
    Visible(Action, u64, u64),
}

/// Explores the reachable machine configurations and assembles the thread
/// graph over visible actions. `step` is only called with `pc` in `1..=k`.
/// Revisiting a configuration inside a silent stretch means divergence and
/// becomes deadlock.
fn build_graph<S, F>(k: u64, start: S, step: F) -> ThreadGraph
where
    S: Clone + Eq + Hash,
    F: Fn(u64, &S) -> Exec<S>,
{
    enum Settled<S> {
        Stop,
        Deadlock,
        Visible(u64, S),
    }

    let settle = |mut pc: u64, mut state: S| -> Settled<S> {
        let mut trail: HashSet<(u64, S)> = HashSet::new();
        loop {
            if pc < 1 || pc > k {
                return Settled::Stop;
            }
            if !trail.insert((pc, state.clone())) {
                return Settled::Deadlock; // silent divergence
            }
            match step(pc, &state) {
                Exec::Stop => return Settled::Stop,
                Exec::Deadlock => return Settled::Deadlock,
                Exec::Silent(next_pc, next_state) => {
                    pc = next_pc;
                    state = next_state;
                }
                Exec::Visible(..) => return Settled::Visible(pc, state),
            }
        }
    };

    let mut nodes: Vec<ThreadNode> = Vec::new();
    let mut stop_node: Option<usize> = None;
    let mut dead_node: Option<usize> = None;
    let mut visible: HashMap<(u64, S), usize> = HashMap::new();
    let mut pending: VecDeque<(usize, u64, S)> = VecDeque::new();

    let intern = |settled: Settled<S>,
                      nodes: &mut Vec<ThreadNode>,
                      stop_node: &mut Option<usize>,
                      dead_node: &mut Option<usize>,
                      visible: &mut HashMap<(u64, S), usize>,
                      pending: &mut VecDeque<(usize, u64, S)>|
     -> usize {
        match settled {
            Settled::Stop => *stop_node.get_or_insert_with(|| {
                nodes.push(ThreadNode::Stop);
                nodes.len() - 1
            }),
            Settled::Deadlock => *dead_node.get_or_insert_with(|| {
                nodes.push(ThreadNode::Deadlock);
                nodes.len() - 1
            }),
            Settled::Visible(pc, state) => {
                if let Some(&id) = visible.get(&(pc, state.clone())) {
                    return id;
                }
                nodes.push(ThreadNode::Deadlock); // placeholder
                let id = nodes.len() - 1;
                visible.insert((pc, state.clone()), id);
                pending.push_back((id, pc, state));
                id
            }
        }
    };

    let root_settled = settle(1, start);
    let root = intern(
        root_settled,
        &mut nodes,
        &mut stop_node,
        &mut dead_node,
        &mut visible,
        &mut pending,
    );

    while let Some((id, pc, state)) = pending.pop_front() {
        let (action, pc_true, pc_false) = match step(pc, &state) {
            Exec::Visible(action, t, f) => (action, t, f),
            _ => unreachable!("queued configurations are visible"),
        };
        let t = intern(
            settle(pc_true, state.clone()),
            &mut nodes,
            &mut stop_node,
            &mut dead_node,
            &mut visible,
            &mut pending,
        );
        let f = intern(
            settle(pc_false, state),
            &mut nodes,
            &mut stop_node,
            &mut dead_node,
            &mut visible,
            &mut pending,
        );
        nodes[id] = ThreadNode::Branch {
            action,
            on_true: crate::thread::NodeId::from_index(t),
            on_false: crate::thread::NodeId::from_index(f),
        };
    }

    ThreadGraph::from_parts(nodes, root).expect("interpreter emits in-bounds references")
}

// ---------------------------------------------------------------------------
// Inlined register file and stack
// ---------------------------------------------------------------------------

/// Decimal numeral, canonical form only (no leading zeros except `0`).
fn numeral(s: &str) -> Option<u64> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    if s.len() > 1 && s.starts_with('0') {
        return None;
    }
    s.parse().ok()
}

enum RfStep {
    /// Reply and the possibly updated registers.
    Reply(bool, Vec<u64>),
    Blocked,
}

/// Processes one `rf.<method>` request against the registers, mirroring the
/// register-file rules: `set:i:n` overwrites and replies true, `eq:i:n`
/// tests, anything else (including out-of-bounds indices or values) blocks.
fn rf_process(method: &str, regs: &[u64], env: &EnvParams) -> RfStep {
    let parsed = method
        .strip_prefix("set:")
        .map(|r| (true, r))
        .or_else(|| method.strip_prefix("eq:").map(|r| (false, r)));
    let (is_set, rest) = match parsed {
        Some(p) => p,
        None => return RfStep::Blocked,
    };
    let (i_str, n_str) = match rest.split_once(':') {
        Some(p) => p,
        None => return RfStep::Blocked,
    };
    let (i, n) = match (numeral(i_str), numeral(n_str)) {
        (Some(i), Some(n)) => (i, n),
        _ => return RfStep::Blocked,
    };
    if i < 1 || i > env.maxr || n > env.maxn {
        return RfStep::Blocked;
    }
    if is_set {
        let mut next = regs.to_vec();
        next[(i - 1) as usize] = n;
        RfStep::Reply(true, next)
    } else {
        RfStep::Reply(regs[(i - 1) as usize] == n, regs.to_vec())
    }
}

/// Dispatches a basic instruction whose reply decides between `pc_true` and
/// `pc_false`: silent when the focus is `rf`, visible otherwise.
fn basic_with_rf(
    action: &Action,
    regs: &[u64],
    env: &EnvParams,
    pc_true: u64,
    pc_false: u64,
) -> Exec<Vec<u64>> {
    if action.focus() != "rf" {
        return Exec::Visible(action.clone(), pc_true, pc_false);
    }
    match rf_process(action.method(), regs, env) {
        RfStep::Blocked => Exec::Deadlock,
        RfStep::Reply(reply, next) => Exec::Silent(if reply { pc_true } else { pc_false }, next),
    }
}

// ---------------------------------------------------------------------------
// Interpreters
// ---------------------------------------------------------------------------

/// Direct PGLC semantics: relative jumps, termination off either end, `#0`
/// and `\0` deadlock.
pub fn interpret_pglc(program: &Program<PglcInstruction>) -> ThreadGraph {
    let k = program.len() as u64;
    build_graph(k, (), |pc, _| match program.at(pc).unwrap() {
        PglcInstruction::Plain(a) => Exec::Visible(a.clone(), pc + 1, pc + 1),
        PglcInstruction::PosTest(a) => Exec::Visible(a.clone(), pc + 1, pc + 2),
        PglcInstruction::NegTest(a) => Exec::Visible(a.clone(), pc + 2, pc + 1),
        PglcInstruction::FwdJump(0) => Exec::Deadlock,
        PglcInstruction::FwdJump(l) => match pc.checked_add(*l) {
            Some(next) => Exec::Silent(next, ()),
            None => Exec::Stop,
        },
        PglcInstruction::BwdJump(0) => Exec::Deadlock,
        PglcInstruction::BwdJump(l) => {
            if *l >= pc {
                Exec::Stop
            } else {
                Exec::Silent(pc - l, ())
            }
        }
    })
}

/// Direct PGLD semantics: absolute jumps, `##0` and overshooting terminate.
/// A self-targeting jump revisits its own configuration and deadlocks via the
/// divergence rule.
pub fn interpret_pgld(program: &Program<PgldInstruction>) -> ThreadGraph {
    let k = program.len() as u64;
    build_graph(k, (), |pc, _| match program.at(pc).unwrap() {
        PgldInstruction::Plain(a) => Exec::Visible(a.clone(), pc + 1, pc + 1),
        PgldInstruction::PosTest(a) => Exec::Visible(a.clone(), pc + 1, pc + 2),
        PgldInstruction::NegTest(a) => Exec::Visible(a.clone(), pc + 2, pc + 1),
        PgldInstruction::AbsJump(l) => {
            if *l == 0 || *l > k {
                Exec::Stop
            } else {
                Exec::Silent(*l, ())
            }
        }
    })
}

/// Direct PGLDij semantics: PGLD plus indirect jumps through a register file
/// that starts all-zero and processes `rf` basics silently.
pub fn interpret_pgldij(program: &Program<PgldijInstruction>, env: &EnvParams) -> ThreadGraph {
    let k = program.len() as u64;
    let regs = vec![0u64; env.maxr as usize];
    build_graph(k, regs, |pc, regs| match program.at(pc).unwrap() {
        PgldijInstruction::Plain(a) => basic_with_rf(a, regs, env, pc + 1, pc + 1),
        PgldijInstruction::PosTest(a) => basic_with_rf(a, regs, env, pc + 1, pc + 2),
        PgldijInstruction::NegTest(a) => basic_with_rf(a, regs, env, pc + 2, pc + 1),
        PgldijInstruction::AbsJump(l) => {
            if *l == 0 || *l > k {
                Exec::Stop
            } else {
                Exec::Silent(*l, regs.clone())
            }
        }
        PgldijInstruction::IndAbsJump(i) => {
            let l = regs[(*i - 1) as usize];
            if l == 0 || l > k {
                Exec::Stop
            } else {
                Exec::Silent(l, regs.clone())
            }
        }
    })
}

/// Direct PGLCij semantics: PGLC plus indirect relative jumps. A zero
/// register deadlocks an indirect jump; an out-of-range landing terminates.
pub fn interpret_pglcij(program: &Program<PglcijInstruction>, env: &EnvParams) -> ThreadGraph {
    let k = program.len() as u64;
    let regs = vec![0u64; env.maxr as usize];
    build_graph(k, regs, |pc, regs| match program.at(pc).unwrap() {
        PglcijInstruction::Plain(a) => basic_with_rf(a, regs, env, pc + 1, pc + 1),
        PglcijInstruction::PosTest(a) => basic_with_rf(a, regs, env, pc + 1, pc + 2),
        PglcijInstruction::NegTest(a) => basic_with_rf(a, regs, env, pc + 2, pc + 1),
        PglcijInstruction::FwdJump(0) => Exec::Deadlock,
        PglcijInstruction::FwdJump(l) => match pc.checked_add(*l) {
            Some(next) => Exec::Silent(next, regs.clone()),
            None => Exec::Stop,
        },
        PglcijInstruction::BwdJump(0) => Exec::Deadlock,
        PglcijInstruction::BwdJump(l) => {
            if *l >= pc {
                Exec::Stop
            } else {
                Exec::Silent(pc - l, regs.clone())
            }
        }
        PglcijInstruction::IndFwdJump(i) => {
            let l = regs[(*i - 1) as usize];
            if l == 0 {
                Exec::Deadlock
            } else {
                Exec::Silent(pc + l, regs.clone())
            }
        }
        PglcijInstruction::IndBwdJump(i) => {
            let l = regs[(*i - 1) as usize];
            if l == 0 {
                Exec::Deadlock
            } else if l >= pc {
                Exec::Stop
            } else {
                Exec::Silent(pc - l, regs.clone())
            }
        }
    })
}

/// Direct PGLDdij semantics: the register named by register `i` supplies the
/// target. A content that names no register (0, or beyond maxr) terminates,
/// the same way the lowered search misses every entry.
pub fn interpret_pglddij(program: &Program<PglddijInstruction>, env: &EnvParams) -> ThreadGraph {
    let k = program.len() as u64;
    let regs = vec![0u64; env.maxr as usize];
    build_graph(k, regs, |pc, regs| match program.at(pc).unwrap() {
        PglddijInstruction::Plain(a) => basic_with_rf(a, regs, env, pc + 1, pc + 1),
        PglddijInstruction::PosTest(a) => basic_with_rf(a, regs, env, pc + 1, pc + 2),
        PglddijInstruction::NegTest(a) => basic_with_rf(a, regs, env, pc + 2, pc + 1),
        PglddijInstruction::AbsJump(l) => {
            if *l == 0 || *l > k {
                Exec::Stop
            } else {
                Exec::Silent(*l, regs.clone())
            }
        }
        PglddijInstruction::IndAbsJump(i) => {
            let l = regs[(*i - 1) as usize];
            if l == 0 || l > k {
                Exec::Stop
            } else {
                Exec::Silent(l, regs.clone())
            }
        }
        PglddijInstruction::DblIndAbsJump(i) => {
            let named = regs[(*i - 1) as usize];
            if named == 0 || named > env.maxr {
                return Exec::Stop;
            }
            let l = regs[(named - 1) as usize];
            if l == 0 || l > k {
                Exec::Stop
            } else {
                Exec::Silent(l, regs.clone())
            }
        }
    })
}

/// Direct PGLDrj semantics with a bounded stack of return positions: a
/// returning jump pushes its own position (overflow deadlocks; an unpushable
/// position deadlocks; targets of 0 or past the end terminate without
/// pushing), and `ret` pops a position and resumes right after it (empty
/// stack deadlocks).
pub fn interpret_pgldrj(program: &Program<PgldrjInstruction>, env: &EnvParams) -> ThreadGraph {
    let k = program.len() as u64;
    build_graph(k, Vec::<u64>::new(), |pc, stack| match program.at(pc).unwrap() {
        PgldrjInstruction::Plain(a) => Exec::Visible(a.clone(), pc + 1, pc + 1),
        PgldrjInstruction::PosTest(a) => Exec::Visible(a.clone(), pc + 1, pc + 2),
        PgldrjInstruction::NegTest(a) => Exec::Visible(a.clone(), pc + 2, pc + 1),
        PgldrjInstruction::AbsJump(l) => {
            if *l == 0 || *l > k {
                Exec::Stop
            } else {
                Exec::Silent(*l, stack.clone())
            }
        }
        PgldrjInstruction::RetAbsJump(l) => {
            if *l == 0 || *l > k {
                Exec::Stop
            } else if pc > env.maxn || stack.len() as u64 >= env.maxs {
                // the return position cannot be stored, or the stack is full
                Exec::Deadlock
            } else {
                let mut next = stack.clone();
                next.push(pc);
                Exec::Silent(*l, next)
            }
        }
        PgldrjInstruction::Return => match stack.split_last() {
            None => Exec::Deadlock, // empty stack
            Some((&top, rest)) => Exec::Silent(top + 1, rest.to_vec()),
        },
    })
}

/// Dispatching interpreter over the six notations.
pub fn interpret(program: &AnyProgram, env: &EnvParams) -> ThreadGraph {
    match program {
        AnyProgram::Pglc(p) => interpret_pglc(p),
        AnyProgram::Pgld(p) => interpret_pgld(p),
        AnyProgram::Pgldij(p) => interpret_pgldij(p, env),
        AnyProgram::Pglcij(p) => interpret_pglcij(p, env),
        AnyProgram::Pglddij(p) => interpret_pglddij(p, env),
        AnyProgram::Pgldrj(p) => interpret_pgldrj(p, env),
    }
}

// ---------------------------------------------------------------------------
// Random program generation
// ---------------------------------------------------------------------------

/// Relative weights for the instruction kinds a notation offers; kinds a
/// notation lacks are ignored.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenWeights {
    pub plain: u32,
    pub pos_test: u32,
    pub neg_test: u32,
    pub direct_jump: u32,
    pub indirect_jump: u32,
    pub double_indirect: u32,
    pub returning_jump: u32,
    pub ret: u32,
}

impl Default for GenWeights {
    fn default() -> Self {
        GenWeights {
            plain: 5,
            pos_test: 3,
            neg_test: 2,
            direct_jump: 4,
            indirect_jump: 4,
            double_indirect: 3,
            returning_jump: 4,
            ret: 3,
        }
    }
}

/// Configuration for the seeded program generator.
#[derive(Debug, Clone)]
pub struct GenConfig {
    pub notation: Notation,
    pub max_len: usize,
    pub env: EnvParams,
    pub seed: u64,
    pub weights: GenWeights,
}

impl GenConfig {
    pub fn new(notation: Notation, max_len: usize, env: EnvParams, seed: u64) -> Self {
        assert!(max_len >= 1, "max_len must be at least 1");
        GenConfig { notation, max_len, env, seed, weights: GenWeights::default() }
    }
}

const VISIBLE_FOCI: [&str; 2] = ["a", "b"];
const VISIBLE_METHODS: [&str; 2] = ["m", "n"];

fn gen_visible_action(rng: &mut SplitMix64) -> Action {
    let f = VISIBLE_FOCI[rng.below(VISIBLE_FOCI.len() as u64) as usize];
    let m = VISIBLE_METHODS[rng.below(VISIBLE_METHODS.len() as u64) as usize];
    Action::new(f, m)
}

/// Basic action for notations with a register file in scope: half visible,
/// half `rf.set`/`rf.eq` within bounds.
fn gen_rf_action(rng: &mut SplitMix64, env: &EnvParams) -> Action {
    if rng.below(2) == 0 {
        return gen_visible_action(rng);
    }
    let i = rng.range(1, env.maxr);
    let n = rng.range(0, env.maxn);
    if rng.below(2) == 0 {
        Action::new("rf", format!("set:{i}:{n}"))
    } else {
        Action::new("rf", format!("eq:{i}:{n}"))
    }
}

/// Generates a well-formed program of the configured notation,
/// deterministically in the seed. Jump counters range over `[0, 2 * max_len]`
/// and register indices over `[1, maxr]`.
pub fn generate(cfg: &GenConfig) -> AnyProgram {
    let mut rng = SplitMix64::new(cfg.seed);
    let len = rng.range(1, cfg.max_len as u64) as usize;
    let max_counter = 2 * cfg.max_len as u64;
    let env = &cfg.env;
    let w = &cfg.weights;

    match cfg.notation {
        Notation::Pglc => {
            let instrs = (0..len)
                .map(|_| {
                    match rng.weighted(&[w.plain, w.pos_test, w.neg_test, w.direct_jump, w.direct_jump]) {
                        0 => PglcInstruction::Plain(gen_visible_action(&mut rng)),
                        1 => PglcInstruction::PosTest(gen_visible_action(&mut rng)),
                        2 => PglcInstruction::NegTest(gen_visible_action(&mut rng)),
                        3 => PglcInstruction::FwdJump(rng.range(0, max_counter)),
                        _ => PglcInstruction::BwdJump(rng.range(0, max_counter)),
                    }
                })
                .collect();
            AnyProgram::Pglc(Program::new(instrs).unwrap())
        }
        Notation::Pgld => {
            let instrs = (0..len)
                .map(|_| match rng.weighted(&[w.plain, w.pos_test, w.neg_test, w.direct_jump]) {
                    0 => PgldInstruction::Plain(gen_visible_action(&mut rng)),
                    1 => PgldInstruction::PosTest(gen_visible_action(&mut rng)),
                    2 => PgldInstruction::NegTest(gen_visible_action(&mut rng)),
                    _ => PgldInstruction::AbsJump(rng.range(0, max_counter)),
                })
                .collect();
            AnyProgram::Pgld(Program::new(instrs).unwrap())
        }
        Notation::Pgldij => {
            let instrs = (0..len)
                .map(|_| {
                    match rng.weighted(&[w.plain, w.pos_test, w.neg_test, w.direct_jump, w.indirect_jump]) {
                        0 => PgldijInstruction::Plain(gen_rf_action(&mut rng, env)),
                        1 => PgldijInstruction::PosTest(gen_rf_action(&mut rng, env)),
                        2 => PgldijInstruction::NegTest(gen_rf_action(&mut rng, env)),
                        3 => PgldijInstruction::AbsJump(rng.range(0, max_counter)),
                        _ => PgldijInstruction::IndAbsJump(rng.range(1, env.maxr)),
                    }
                })
                .collect();
            AnyProgram::Pgldij(Program::new(instrs).unwrap())
        }
        Notation::Pglcij => {
            let instrs = (0..len)
                .map(|_| {
                    match rng.weighted(&[
                        w.plain,
                        w.pos_test,
                        w.neg_test,
                        w.direct_jump,
                        w.direct_jump,
                        w.indirect_jump,
                        w.indirect_jump,
                    ]) {
                        0 => PglcijInstruction::Plain(gen_rf_action(&mut rng, env)),
                        1 => PglcijInstruction::PosTest(gen_rf_action(&mut rng, env)),
                        2 => PglcijInstruction::NegTest(gen_rf_action(&mut rng, env)),
                        3 => PglcijInstruction::FwdJump(rng.range(0, max_counter)),
                        4 => PglcijInstruction::BwdJump(rng.range(0, max_counter)),
                        5 => PglcijInstruction::IndFwdJump(rng.range(1, env.maxr)),
                        _ => PglcijInstruction::IndBwdJump(rng.range(1, env.maxr)),
                    }
                })
                .collect();
            AnyProgram::Pglcij(Program::new(instrs).unwrap())
        }
        Notation::Pglddij => {
            let instrs = (0..len)
                .map(|_| {
                    match rng.weighted(&[
                        w.plain,
                        w.pos_test,
                        w.neg_test,
                        w.direct_jump,
                        w.indirect_jump,
                        w.double_indirect,
                    ]) {
                        0 => PglddijInstruction::Plain(gen_rf_action(&mut rng, env)),
                        1 => PglddijInstruction::PosTest(gen_rf_action(&mut rng, env)),
                        2 => PglddijInstruction::NegTest(gen_rf_action(&mut rng, env)),
                        3 => PglddijInstruction::AbsJump(rng.range(0, max_counter)),
                        4 => PglddijInstruction::IndAbsJump(rng.range(1, env.maxr)),
                        _ => PglddijInstruction::DblIndAbsJump(rng.range(1, env.maxr)),
                    }
                })
                .collect();
            AnyProgram::Pglddij(Program::new(instrs).unwrap())
        }
        Notation::Pgldrj => {
            let instrs = (0..len)
                .map(|_| {
                    match rng.weighted(&[
                        w.plain,
                        w.pos_test,
                        w.neg_test,
                        w.direct_jump,
                        w.returning_jump,
                        w.ret,
                    ]) {
                        0 => PgldrjInstruction::Plain(gen_visible_action(&mut rng)),
                        1 => PgldrjInstruction::PosTest(gen_visible_action(&mut rng)),
                        2 => PgldrjInstruction::NegTest(gen_visible_action(&mut rng)),
                        3 => PgldrjInstruction::AbsJump(rng.range(0, max_counter)),
                        4 => PgldrjInstruction::RetAbsJump(rng.range(0, max_counter)),
                        _ => PgldrjInstruction::Return,
                    }
                })
                .collect();
            AnyProgram::Pgldrj(Program::new(instrs).unwrap())
        }
    }
}

// ---------------------------------------------------------------------------
// Shrinking
// ---------------------------------------------------------------------------

/// Greedily minimizes a program while `predicate` keeps holding: deletes
/// instructions (never renumbering the survivors) and decrements jump
/// counters and register indices. Returns a locally minimal witness;
/// `predicate(program)` must hold on entry.
pub fn shrink<F>(program: &AnyProgram, mut predicate: F) -> AnyProgram
where
    F: FnMut(&AnyProgram) -> bool,
{
    debug_assert!(predicate(program), "shrink requires a failing witness");
    let mut current = program.clone();
    loop {
        let mut improved = false;

        // Deletion pass.
        let len = current.len();
        if len > 1 {
            for idx in 0..len {
                let candidate = current.with_instruction_removed(idx);
                if predicate(&candidate) {
                    current = candidate;
                    improved = true;
                    break;
                }
            }
        }
        if improved {
            continue;
        }

        // Counter decrement pass.
        'outer: for idx in 0..current.len() {
            for candidate in current.with_counter_decremented(idx) {
                if predicate(&candidate) {
                    current = candidate;
                    improved = true;
                    break 'outer;
                }
            }
        }
        if !improved {
            return current;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::thread::{action_prefix, bisimilar, unfold_trace, TraceEnd};

    fn act(s: &str) -> Action {
        let (f, m) = s.split_once('.').unwrap();
        Action::new(f, m)
    }

    fn env(maxr: u64, maxn: u64, maxs: u64) -> EnvParams {
        EnvParams::new(maxr, maxn, maxs).unwrap()
    }

    #[test]
    fn pgld_self_jump_deadlocks() {
        let p = Program::new(vec![PgldInstruction::AbsJump(1)]).unwrap();
        assert!(bisimilar(&interpret_pgld(&p), &ThreadGraph::deadlock()));
    }

    #[test]
    fn pgldij_vacant_register_terminates() {
        let p = Program::new(vec![
            PgldijInstruction::Plain(act("rf.set:1:0")),
            PgldijInstruction::IndAbsJump(1),
        ])
        .unwrap();
        let g = interpret_pgldij(&p, &env(1, 2, 4));
        assert!(bisimilar(&g, &ThreadGraph::stop()));
    }

    #[test]
    fn pgldrj_return_resumes_after_jump() {
        let p = Program::new(vec![
            PgldrjInstruction::RetAbsJump(3),
            PgldrjInstruction::Plain(act("a.m")),
            PgldrjInstruction::Return,
        ])
        .unwrap();
        let g = interpret_pgldrj(&p, &env(3, 8, 2));
        assert!(bisimilar(&g, &action_prefix(act("a.m"), &ThreadGraph::deadlock())));
    }

    #[test]
    fn pglcij_zero_register_backward_jump_deadlocks() {
        let p = Program::new(vec![PglcijInstruction::IndBwdJump(1)]).unwrap();
        let g = interpret_pglcij(&p, &env(1, 1, 4));
        assert!(bisimilar(&g, &ThreadGraph::deadlock()));
    }

    #[test]
    fn pglddij_content_naming_no_register_terminates() {
        // register 1 holds 3, but there is no register 3
        let p = Program::new(vec![
            PglddijInstruction::Plain(act("rf.set:1:3")),
            PglddijInstruction::DblIndAbsJump(1),
        ])
        .unwrap();
        let g = interpret_pglddij(&p, &env(2, 4, 4));
        assert!(bisimilar(&g, &ThreadGraph::stop()));
    }

    #[test]
    fn pgldrj_return_past_the_end_terminates() {
        // the jump at position 3 pushes 3 and re-enters the return at 2,
        // which resumes at 4 = k + 1: termination, not a wrap
        let p = Program::new(vec![
            PgldrjInstruction::AbsJump(3),
            PgldrjInstruction::Return,
            PgldrjInstruction::RetAbsJump(2),
        ])
        .unwrap();
        let e = env(3, 8, 2);
        let g = interpret_pgldrj(&p, &e);
        assert!(bisimilar(&g, &ThreadGraph::stop()));
        assert!(bisimilar(&crate::indirect::behavior_pgldrj(&p, &e), &ThreadGraph::stop()));
    }

    #[test]
    fn blocked_rf_method_deadlocks() {
        // maxn = 2, so rf.set:1:9 is not a register-file method at all
        let p = Program::new(vec![PgldijInstruction::Plain(act("rf.set:1:9"))]).unwrap();
        let g = interpret_pgldij(&p, &env(1, 2, 4));
        assert!(bisimilar(&g, &ThreadGraph::deadlock()));
    }

    #[test]
    fn visible_actions_walk_off_the_end() {
        let p = Program::new(vec![PglcInstruction::Plain(act("a.m"))]).unwrap();
        let g = interpret_pglc(&p);
        let (actions, end) = unfold_trace(&g, &[true]);
        assert_eq!(actions, vec![act("a.m")]);
        assert_eq!(end, TraceEnd::Stopped);
    }

    #[test]
    fn generation_is_deterministic() {
        let cfg = GenConfig::new(Notation::Pgldij, 6, env(3, 8, 4), 99);
        assert_eq!(generate(&cfg), generate(&cfg));
        let other = GenConfig { seed: 100, ..cfg };
        // different seeds almost surely differ on a 6-instruction budget
        assert_ne!(generate(&GenConfig { seed: 99, ..other.clone() }), generate(&other));
    }

    #[test]
    fn generated_register_indices_stay_in_bounds() {
        for seed in 0..50 {
            let cfg = GenConfig::new(Notation::Pglcij, 8, env(2, 3, 4), seed);
            if let AnyProgram::Pglcij(p) = generate(&cfg) {
                for ins in p.iter() {
                    if let PglcijInstruction::IndFwdJump(i) | PglcijInstruction::IndBwdJump(i) = ins
                    {
                        assert!((1..=2).contains(i));
                    }
                }
            } else {
                panic!("wrong notation generated");
            }
        }
    }

    #[test]
    fn shrink_reaches_local_minimum() {
        // predicate: program still contains an absolute jump with counter >= 1
        let p = AnyProgram::Pgld(
            Program::new(vec![
                PgldInstruction::Plain(act("a.m")),
                PgldInstruction::AbsJump(7),
                PgldInstruction::Plain(act("b.m")),
            ])
            .unwrap(),
        );
        let has_jump = |q: &AnyProgram| match q {
            AnyProgram::Pgld(q) => {
                q.iter().any(|i| matches!(i, PgldInstruction::AbsJump(l) if *l >= 1))
            }
            _ => false,
        };
        let minimal = shrink(&p, has_jump);
        match minimal {
            AnyProgram::Pgld(q) => {
                assert_eq!(q.len(), 1);
                assert_eq!(q.at(1), Some(&PgldInstruction::AbsJump(1)));
            }
            _ => panic!("notation changed under shrinking"),
        }
    }

    #[test]
    fn shrink_returns_input_when_stuck() {
        let p = AnyProgram::Pgld(Program::new(vec![PgldInstruction::AbsJump(0)]).unwrap());
        let shrunk = shrink(&p, |q| matches!(q, AnyProgram::Pgld(q) if q.len() == 1));
        assert_eq!(shrunk, p);
    }

    #[test]
    fn shrink_drives_counters_to_zero_when_allowed() {
        let p = AnyProgram::Pgld(Program::new(vec![PgldInstruction::AbsJump(7)]).unwrap());
        let shrunk = shrink(&p, |_| true);
        assert_eq!(
            shrunk,
            AnyProgram::Pgld(Program::new(vec![PgldInstruction::AbsJump(0)]).unwrap())
        );
    }
}
