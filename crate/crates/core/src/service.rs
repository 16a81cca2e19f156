//! Deterministic reply services and thread-service composition.
//!
//! A service is described by a state set, an effect function, and a yield
//! function; any method outside the service's repertoire drives it into an
//! absorbing `Undef` sink that replies `Blocked` forever. Composition hides a
//! chosen focus: actions under that focus are processed silently against the
//! service, all other actions stay visible.

use std::fmt;
use std::hash::Hash;

use thiserror::Error;

use crate::thread::{ThreadGraph, ThreadNode};

/// Reply of a service to one request.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reply {
    True,
    False,
    Blocked,
}

/// The state-machine description of a family of services: a state set with
/// an effect function and a yield function over method tokens.
///
/// Implementations must satisfy the blocked-sink condition: whenever
/// `yld(m, s)` is `Blocked`, `effect(m, s)` lands in a state that replies
/// `Blocked` to every method. Both instances below use a dedicated `Undef`
/// state for this.
pub trait ServiceBehavior: Clone {
    type State: Clone + Eq + Hash + fmt::Debug;

    fn effect(&self, method: &str, state: &Self::State) -> Self::State;
    fn yld(&self, method: &str, state: &Self::State) -> Reply;
}

/// A service description paired with a current state. Immutable: `step`
/// returns a fresh instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServiceInstance<D: ServiceBehavior> {
    description: D,
    state: D::State,
}

impl<D: ServiceBehavior> ServiceInstance<D> {
    pub fn new(description: D, state: D::State) -> Self {
        ServiceInstance { description, state }
    }

    pub fn state(&self) -> &D::State {
        &self.state
    }

    pub fn description(&self) -> &D {
        &self.description
    }

    /// The reply this service gives to `method` in its current state.
    pub fn reply(&self, method: &str) -> Reply {
        self.description.yld(method, &self.state)
    }

    /// The service after processing `method`.
    pub fn step(&self, method: &str) -> Self {
        ServiceInstance {
            description: self.description.clone(),
            state: self.description.effect(method, &self.state),
        }
    }
}

/// Environment bounds: register count, greatest storable number, greatest
/// stack length. A zero-length stack is degenerate but legal (every push
/// overflows).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnvParams {
    pub maxr: u64,
    pub maxn: u64,
    pub maxs: u64,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ServiceError {
    #[error("maxr and maxn must be at least 1 (got maxr={maxr}, maxn={maxn})")]
    BadEnv { maxr: u64, maxn: u64 },
    #[error("initial register map must cover registers 1..={expected} (got {got} entries)")]
    BadRegisterCount { expected: u64, got: usize },
    #[error("register value {value} exceeds maxn {maxn}")]
    RegisterValueTooLarge { value: u64, maxn: u64 },
    #[error("initial stack length {len} exceeds maxs {maxs}")]
    StackTooLong { len: usize, maxs: u64 },
    #[error("stack element {value} exceeds maxn {maxn}")]
    StackValueTooLarge { value: u64, maxn: u64 },
}

impl EnvParams {
    pub fn new(maxr: u64, maxn: u64, maxs: u64) -> Result<Self, ServiceError> {
        if maxr < 1 || maxn < 1 {
            return Err(ServiceError::BadEnv { maxr, maxn });
        }
        Ok(EnvParams { maxr, maxn, maxs })
    }
}

impl Default for EnvParams {
    fn default() -> Self {
        EnvParams { maxr: 3, maxn: 8, maxs: 4 }
    }
}

// ---------------------------------------------------------------------------
// Method tokens
// ---------------------------------------------------------------------------

/// Parses a canonical decimal numeral: digits only, no leading zeros except
/// `0` itself. Anything else makes the whole method token foreign.
fn parse_numeral(s: &str) -> Option<u64> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    if s.len() > 1 && s.starts_with('0') {
        return None;
    }
    s.parse().ok()
}

/// `set:<i>:<n>` / `eq:<i>:<n>`, bounds-checked against the environment.
fn parse_register_method(method: &str, env: &EnvParams) -> Option<(bool, u64, u64)> {
    let rest = method.strip_prefix("set:").map(|r| (true, r)).or_else(|| {
        method.strip_prefix("eq:").map(|r| (false, r))
    });
    let (is_set, rest) = rest?;
    let (i_str, n_str) = rest.split_once(':')?;
    let i = parse_numeral(i_str)?;
    let n = parse_numeral(n_str)?;
    if i < 1 || i > env.maxr || n > env.maxn {
        return None;
    }
    Some((is_set, i, n))
}

/// `push:<n>` / `topeq:<n>` / `pop`, bounds-checked against the environment.
fn parse_stack_method(method: &str, env: &EnvParams) -> Option<StackMethod> {
    if method == "pop" {
        return Some(StackMethod::Pop);
    }
    if let Some(rest) = method.strip_prefix("push:") {
        let n = parse_numeral(rest)?;
        if n > env.maxn {
            return None;
        }
        return Some(StackMethod::Push(n));
    }
    if let Some(rest) = method.strip_prefix("topeq:") {
        let n = parse_numeral(rest)?;
        if n > env.maxn {
            return None;
        }
        return Some(StackMethod::TopEq(n));
    }
    None
}

enum StackMethod {
    Push(u64),
    TopEq(u64),
    Pop,
}

// ---------------------------------------------------------------------------
// Register file service
// ---------------------------------------------------------------------------

/// Register file description: registers 1..=maxr holding values 0..=maxn.
/// Methods `set:i:n` (overwrite, reply true) and `eq:i:n` (test).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegisterFile {
    env: EnvParams,
}

/// Register file state: the register contents indexed from register 1, or the
/// blocked sink.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RegFileState {
    Regs(Vec<u64>),
    Undef,
}

impl ServiceBehavior for RegisterFile {
    type State = RegFileState;

    fn effect(&self, method: &str, state: &Self::State) -> Self::State {
        let regs = match state {
            RegFileState::Undef => return RegFileState::Undef,
            RegFileState::Regs(regs) => regs,
        };
        match parse_register_method(method, &self.env) {
            Some((true, i, n)) => {
                let mut next = regs.clone();
                next[(i - 1) as usize] = n;
                RegFileState::Regs(next)
            }
            Some((false, _, _)) => state.clone(),
            None => RegFileState::Undef,
        }
    }

    fn yld(&self, method: &str, state: &Self::State) -> Reply {
        let regs = match state {
            RegFileState::Undef => return Reply::Blocked,
            RegFileState::Regs(regs) => regs,
        };
        match parse_register_method(method, &self.env) {
            Some((true, _, _)) => Reply::True,
            Some((false, i, n)) => {
                if regs[(i - 1) as usize] == n {
                    Reply::True
                } else {
                    Reply::False
                }
            }
            None => Reply::Blocked,
        }
    }
}

/// A register file with the given initial contents for registers 1..=maxr.
pub fn make_register_file(
    env: &EnvParams,
    initial: &[u64],
) -> Result<ServiceInstance<RegisterFile>, ServiceError> {
    if initial.len() as u64 != env.maxr {
        return Err(ServiceError::BadRegisterCount { expected: env.maxr, got: initial.len() });
    }
    for &value in initial {
        if value > env.maxn {
            return Err(ServiceError::RegisterValueTooLarge { value, maxn: env.maxn });
        }
    }
    Ok(ServiceInstance::new(RegisterFile { env: *env }, RegFileState::Regs(initial.to_vec())))
}

/// The all-zero register file.
pub fn register_file_init(env: &EnvParams) -> ServiceInstance<RegisterFile> {
    make_register_file(env, &vec![0; env.maxr as usize]).expect("zero map is always valid")
}

// ---------------------------------------------------------------------------
// Stack service
// ---------------------------------------------------------------------------

/// Bounded stack description: at most maxs elements, each in 0..=maxn.
/// Methods `push:n`, `topeq:n`, `pop`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StackService {
    env: EnvParams,
}

/// Stack state with the top element last, or the blocked sink.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum StackState {
    Items(Vec<u64>),
    Undef,
}

impl ServiceBehavior for StackService {
    type State = StackState;

    fn effect(&self, method: &str, state: &Self::State) -> Self::State {
        let items = match state {
            StackState::Undef => return StackState::Undef,
            StackState::Items(items) => items,
        };
        match parse_stack_method(method, &self.env) {
            Some(StackMethod::Push(n)) => {
                if (items.len() as u64) < self.env.maxs {
                    let mut next = items.clone();
                    next.push(n);
                    StackState::Items(next)
                } else {
                    state.clone()
                }
            }
            Some(StackMethod::TopEq(_)) => state.clone(),
            Some(StackMethod::Pop) => {
                let mut next = items.clone();
                next.pop();
                StackState::Items(next)
            }
            None => StackState::Undef,
        }
    }

    fn yld(&self, method: &str, state: &Self::State) -> Reply {
        let items = match state {
            StackState::Undef => return Reply::Blocked,
            StackState::Items(items) => items,
        };
        match parse_stack_method(method, &self.env) {
            Some(StackMethod::Push(_)) => {
                if (items.len() as u64) < self.env.maxs {
                    Reply::True
                } else {
                    Reply::False
                }
            }
            Some(StackMethod::TopEq(n)) => match items.last() {
                Some(&top) if top == n => Reply::True,
                _ => Reply::False,
            },
            Some(StackMethod::Pop) => {
                if items.is_empty() {
                    Reply::False
                } else {
                    Reply::True
                }
            }
            None => Reply::Blocked,
        }
    }
}

/// A stack preloaded with `initial` (top element last).
pub fn make_stack(
    env: &EnvParams,
    initial: &[u64],
) -> Result<ServiceInstance<StackService>, ServiceError> {
    if initial.len() as u64 > env.maxs {
        return Err(ServiceError::StackTooLong { len: initial.len(), maxs: env.maxs });
    }
    for &value in initial {
        if value > env.maxn {
            return Err(ServiceError::StackValueTooLarge { value, maxn: env.maxn });
        }
    }
    Ok(ServiceInstance::new(StackService { env: *env }, StackState::Items(initial.to_vec())))
}

/// The empty stack.
pub fn stack_init(env: &EnvParams) -> ServiceInstance<StackService> {
    make_stack(env, &[]).expect("empty stack is always valid")
}

// ---------------------------------------------------------------------------
// Thread-service composition
// ---------------------------------------------------------------------------

/// Composes a thread with a service under `focus`, hiding all actions of that
/// focus.
///
/// The result is the reachable part of the product of thread nodes and
/// service states: termination and deadlock pass through, actions under other
/// foci stay visible with the service state carried along, and actions under
/// `focus` are processed silently (a positive reply follows the true branch,
/// a negative one the false branch, a blocked reply deadlocks). A silent
/// cycle in the product (the thread asking the service questions forever)
/// denotes deadlock.
pub fn compose_use<D: ServiceBehavior>(
    thread: &ThreadGraph,
    focus: &str,
    service: &ServiceInstance<D>,
) -> ThreadGraph {
    use std::collections::{HashMap, HashSet, VecDeque};

    // Follows silent steps from a (node, state) pair until a visible node,
    // constant, block, or silent cycle.
    enum Settled<S> {
        Stop,
        Deadlock,
        Visible(usize, S),
    }

    let settle = |start_node: usize, start_state: D::State| -> Settled<D::State> {
        let mut node = start_node;
        let mut state = start_state;
        let mut trail: HashSet<(usize, D::State)> = HashSet::new();
        loop {
            match thread.node(crate::thread::NodeId::from_index(node)) {
                ThreadNode::Stop => return Settled::Stop,
                ThreadNode::Deadlock => return Settled::Deadlock,
                ThreadNode::Branch { action, on_true, on_false } => {
                    if action.focus() != focus {
                        return Settled::Visible(node, state);
                    }
                    if !trail.insert((node, state.clone())) {
                        return Settled::Deadlock; // silent divergence
                    }
                    match service.description().yld(action.method(), &state) {
                        Reply::Blocked => return Settled::Deadlock,
                        reply => {
                            let next_state = service.description().effect(action.method(), &state);
                            node = if reply == Reply::True {
                                on_true.index()
                            } else {
                                on_false.index()
                            };
                            state = next_state;
                        }
                    }
                }
            }
        }
    };

    let mut nodes: Vec<ThreadNode> = Vec::new();
    let mut stop_node: Option<usize> = None;
    let mut dead_node: Option<usize> = None;
    let mut visible: HashMap<(usize, D::State), usize> = HashMap::new();
    let mut pending: VecDeque<(usize, usize, D::State)> = VecDeque::new();

    let intern = |settled: Settled<D::State>,
                      nodes: &mut Vec<ThreadNode>,
                      stop_node: &mut Option<usize>,
                      dead_node: &mut Option<usize>,
                      visible: &mut HashMap<(usize, D::State), usize>,
                      pending: &mut VecDeque<(usize, usize, D::State)>|
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
            Settled::Visible(node, state) => {
                if let Some(&id) = visible.get(&(node, state.clone())) {
                    return id;
                }
                nodes.push(ThreadNode::Deadlock); // placeholder, filled from the queue
                let id = nodes.len() - 1;
                visible.insert((node, state.clone()), id);
                pending.push_back((id, node, state));
                id
            }
        }
    };

    let root_settled = settle(thread.root().index(), service.state().clone());
    let root = intern(
        root_settled,
        &mut nodes,
        &mut stop_node,
        &mut dead_node,
        &mut visible,
        &mut pending,
    );

    while let Some((id, node, state)) = pending.pop_front() {
        let (action, on_true, on_false) =
            match thread.node(crate::thread::NodeId::from_index(node)) {
                ThreadNode::Branch { action, on_true, on_false } => {
                    (action.clone(), on_true.index(), on_false.index())
                }
                _ => unreachable!("only visible branches are queued"),
            };
        let t = intern(
            settle(on_true, state.clone()),
            &mut nodes,
            &mut stop_node,
            &mut dead_node,
            &mut visible,
            &mut pending,
        );
        let f = intern(
            settle(on_false, state),
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

    ThreadGraph::from_parts(nodes, root).expect("composition emits in-bounds references")
}
