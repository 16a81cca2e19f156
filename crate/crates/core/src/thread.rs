//! Finite-state threads: rooted graphs built from deadlock, termination, and
//! two-way branching on an action, together with guarded recursive
//! specifications and a bisimilarity checker.
//!
//! A thread graph is the solved form of a guarded recursive specification.
//! All graphs here are finite and every node is reachable from the root;
//! constructors prune unreachable nodes.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::fmt;

use thiserror::Error;

/// A basic action `focus.method`: a request to the service named `focus` to
/// process the command `method`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Action {
    focus: String,
    method: String,
}

impl Action {
    pub fn new(focus: impl Into<String>, method: impl Into<String>) -> Self {
        let focus = focus.into();
        let method = method.into();
        assert!(!focus.is_empty() && !method.is_empty(), "action tokens must be non-empty");
        Action { focus, method }
    }

    pub fn focus(&self) -> &str {
        &self.focus
    }

    pub fn method(&self) -> &str {
        &self.method
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.focus, self.method)
    }
}

/// Index of a node within its owning [`ThreadGraph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(usize);

impl NodeId {
    pub fn from_index(index: usize) -> Self {
        NodeId(index)
    }

    pub fn index(self) -> usize {
        self.0
    }
}

/// One state of a thread: inaction, termination, or perform an action and
/// branch on the reply.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ThreadNode {
    Deadlock,
    Stop,
    Branch {
        action: Action,
        on_true: NodeId,
        on_false: NodeId,
    },
}

/// A finite rooted thread graph. Every node is reachable from the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThreadGraph {
    nodes: Vec<ThreadNode>,
    root: NodeId,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ThreadError {
    #[error("node reference {reference} out of bounds (graph has {len} nodes)")]
    DanglingNode { reference: usize, len: usize },
    #[error("root index {root} out of bounds (graph has {len} nodes)")]
    DanglingRoot { root: usize, len: usize },
}

impl ThreadGraph {
    /// The single-node graph that terminates immediately.
    pub fn stop() -> Self {
        ThreadGraph { nodes: vec![ThreadNode::Stop], root: NodeId(0) }
    }

    /// The single-node graph that deadlocks immediately.
    pub fn deadlock() -> Self {
        ThreadGraph { nodes: vec![ThreadNode::Deadlock], root: NodeId(0) }
    }

    /// Builds a graph from raw nodes, checking references and pruning nodes
    /// unreachable from the root. Surviving nodes are renumbered in
    /// breadth-first discovery order, so the root is always node 0.
    pub fn from_parts(nodes: Vec<ThreadNode>, root: usize) -> Result<Self, ThreadError> {
        if root >= nodes.len() {
            return Err(ThreadError::DanglingRoot { root, len: nodes.len() });
        }
        for node in &nodes {
            if let ThreadNode::Branch { on_true, on_false, .. } = node {
                for child in [on_true, on_false] {
                    if child.0 >= nodes.len() {
                        return Err(ThreadError::DanglingNode {
                            reference: child.0,
                            len: nodes.len(),
                        });
                    }
                }
            }
        }

        // BFS renumbering doubles as garbage collection.
        let mut remap: HashMap<usize, usize> = HashMap::new();
        let mut order = Vec::new();
        let mut queue = VecDeque::from([root]);
        remap.insert(root, 0);
        while let Some(old) = queue.pop_front() {
            order.push(old);
            if let ThreadNode::Branch { on_true, on_false, .. } = &nodes[old] {
                for child in [on_true.0, on_false.0] {
                    if !remap.contains_key(&child) {
                        remap.insert(child, remap.len());
                        queue.push_back(child);
                    }
                }
            }
        }

        let new_nodes = order
            .iter()
            .map(|&old| match &nodes[old] {
                ThreadNode::Branch { action, on_true, on_false } => ThreadNode::Branch {
                    action: action.clone(),
                    on_true: NodeId(remap[&on_true.0]),
                    on_false: NodeId(remap[&on_false.0]),
                },
                other => other.clone(),
            })
            .collect();
        Ok(ThreadGraph { nodes: new_nodes, root: NodeId(0) })
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn node(&self, id: NodeId) -> &ThreadNode {
        &self.nodes[id.0]
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = (NodeId, &ThreadNode)> {
        self.nodes.iter().enumerate().map(|(i, n)| (NodeId(i), n))
    }

    /// Every action occurring on a branch of this graph.
    pub fn actions(&self) -> impl Iterator<Item = &Action> {
        self.nodes.iter().filter_map(|n| match n {
            ThreadNode::Branch { action, .. } => Some(action),
            _ => None,
        })
    }

    /// Renders the graph as a guarded recursive specification. Branch nodes
    /// are named `P1`, `P2`, ... in breadth-first order from the root;
    /// constant successors are inlined. A constant root becomes `P1 = S` or
    /// `P1 = D`.
    pub fn to_spec(&self) -> RecursiveSpec {
        let mut names: HashMap<usize, String> = HashMap::new();
        let mut order = Vec::new();
        let mut queue = VecDeque::from([self.root.0]);
        names.insert(self.root.0, "P1".to_string());
        while let Some(idx) = queue.pop_front() {
            order.push(idx);
            if let ThreadNode::Branch { on_true, on_false, .. } = &self.nodes[idx] {
                for child in [on_true.0, on_false.0] {
                    if matches!(self.nodes[child], ThreadNode::Branch { .. })
                        && !names.contains_key(&child)
                    {
                        names.insert(child, format!("P{}", names.len() + 1));
                        queue.push_back(child);
                    }
                }
            }
        }

        let term_for = |id: NodeId, names: &HashMap<usize, String>| match &self.nodes[id.0] {
            ThreadNode::Stop => SpecTerm::Sub(Box::new(SpecRhs::Stop)),
            ThreadNode::Deadlock => SpecTerm::Sub(Box::new(SpecRhs::Deadlock)),
            ThreadNode::Branch { .. } => SpecTerm::Var(names[&id.0].clone()),
        };

        let mut equations = Vec::new();
        for idx in order {
            let rhs = match &self.nodes[idx] {
                ThreadNode::Stop => SpecRhs::Stop,
                ThreadNode::Deadlock => SpecRhs::Deadlock,
                ThreadNode::Branch { action, on_true, on_false } => SpecRhs::Branch(
                    action.clone(),
                    term_for(*on_true, &names),
                    term_for(*on_false, &names),
                ),
            };
            equations.push((names[&idx].clone(), rhs));
        }
        RecursiveSpec::new(equations).expect("spec generated from a graph is always well-formed")
    }
}

/// Prefixes action `a` to a thread: the result performs `a` and continues as
/// `t` on either reply.
pub fn action_prefix(a: Action, t: &ThreadGraph) -> ThreadGraph {
    let mut nodes = t.nodes.clone();
    nodes.push(ThreadNode::Branch { action: a, on_true: t.root, on_false: t.root });
    let root = nodes.len() - 1;
    ThreadGraph::from_parts(nodes, root).expect("prefixing preserves well-formedness")
}

// ---------------------------------------------------------------------------
// Guarded recursive specifications
// ---------------------------------------------------------------------------

/// A sub-position of a right-hand side: either a reference to an equation
/// variable or an anonymous nested right-hand side.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SpecTerm {
    Var(String),
    Sub(Box<SpecRhs>),
}

/// A right-hand side of a guarded equation. A bare variable is not a valid
/// right-hand side, so every conforming value is guarded by construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SpecRhs {
    Stop,
    Deadlock,
    Branch(Action, SpecTerm, SpecTerm),
}

/// A finite guarded recursive specification: one equation per variable.
/// Equation order is preserved (it determines the default start variable and
/// the rendering order).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecursiveSpec {
    equations: Vec<(String, SpecRhs)>,
    index: BTreeMap<String, usize>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SpecError {
    #[error("duplicate equation for variable `{0}`")]
    DuplicateVariable(String),
    #[error("variable `{0}` is referenced but has no equation")]
    UndefinedVariable(String),
    #[error("unknown start variable `{0}`")]
    UnknownStart(String),
    #[error("`{0}` is reserved and cannot name a variable")]
    ReservedName(String),
    #[error("specification has no equations")]
    Empty,
}

fn collect_vars<'a>(rhs: &'a SpecRhs, out: &mut Vec<&'a str>) {
    if let SpecRhs::Branch(_, left, right) = rhs {
        for term in [left, right] {
            match term {
                SpecTerm::Var(v) => out.push(v),
                SpecTerm::Sub(inner) => collect_vars(inner, out),
            }
        }
    }
}

impl RecursiveSpec {
    /// Validates that variable names are legal, unique, and that every
    /// referenced variable has an equation.
    pub fn new(equations: Vec<(String, SpecRhs)>) -> Result<Self, SpecError> {
        if equations.is_empty() {
            return Err(SpecError::Empty);
        }
        let mut index = BTreeMap::new();
        for (i, (name, _)) in equations.iter().enumerate() {
            if name == "S" || name == "D" {
                return Err(SpecError::ReservedName(name.clone()));
            }
            if index.insert(name.clone(), i).is_some() {
                return Err(SpecError::DuplicateVariable(name.clone()));
            }
        }
        for (_, rhs) in &equations {
            let mut vars = Vec::new();
            collect_vars(rhs, &mut vars);
            for v in vars {
                if !index.contains_key(v) {
                    return Err(SpecError::UndefinedVariable(v.to_string()));
                }
            }
        }
        Ok(RecursiveSpec { equations, index })
    }

    pub fn equations(&self) -> &[(String, SpecRhs)] {
        &self.equations
    }

    pub fn get(&self, name: &str) -> Option<&SpecRhs> {
        self.index.get(name).map(|&i| &self.equations[i].1)
    }

    /// The left-hand side of the first equation; the conventional start.
    pub fn first_variable(&self) -> &str {
        &self.equations[0].0
    }

    /// Machine-readable rendering: one `VAR = RHS` line per equation, sorted
    /// by variable name (shorter names first, then lexicographic, so `P2`
    /// precedes `P10`).
    pub fn to_eqns_string(&self) -> String {
        let mut lines: Vec<(&String, String)> = self
            .equations
            .iter()
            .map(|(name, rhs)| (name, format!("{name} = {}", eqns_rhs(rhs))))
            .collect();
        lines.sort_by_key(|(name, _)| (name.len(), (*name).clone()));
        let mut out = String::new();
        for (_, line) in lines {
            out.push_str(&line);
            out.push('\n');
        }
        out
    }

    /// Human-readable rendering using `a ∘ p` for action prefixes and
    /// `p ⊴ a ⊵ q` for genuine branches. Same sorting as the machine form.
    pub fn to_pretty_string(&self) -> String {
        let mut lines: Vec<(&String, String)> = self
            .equations
            .iter()
            .map(|(name, rhs)| (name, format!("{name} = {}", pretty_rhs(rhs))))
            .collect();
        lines.sort_by_key(|(name, _)| (name.len(), (*name).clone()));
        let mut out = String::new();
        for (_, line) in lines {
            out.push_str(&line);
            out.push('\n');
        }
        out
    }
}

fn eqns_term(term: &SpecTerm) -> String {
    match term {
        SpecTerm::Var(v) => v.clone(),
        SpecTerm::Sub(rhs) => match rhs.as_ref() {
            SpecRhs::Stop => "S".to_string(),
            SpecRhs::Deadlock => "D".to_string(),
            branch => format!("({})", eqns_rhs(branch)),
        },
    }
}

fn eqns_rhs(rhs: &SpecRhs) -> String {
    match rhs {
        SpecRhs::Stop => "S".to_string(),
        SpecRhs::Deadlock => "D".to_string(),
        SpecRhs::Branch(a, left, right) => {
            format!("{} < {} > {}", eqns_term(left), a, eqns_term(right))
        }
    }
}

fn pretty_term(term: &SpecTerm) -> String {
    match term {
        SpecTerm::Var(v) => v.clone(),
        SpecTerm::Sub(rhs) => match rhs.as_ref() {
            SpecRhs::Stop => "S".to_string(),
            SpecRhs::Deadlock => "D".to_string(),
            branch => format!("({})", pretty_rhs(branch)),
        },
    }
}

fn pretty_rhs(rhs: &SpecRhs) -> String {
    match rhs {
        SpecRhs::Stop => "S".to_string(),
        SpecRhs::Deadlock => "D".to_string(),
        SpecRhs::Branch(a, left, right) if left == right => {
            format!("{} ∘ {}", a, pretty_term(left))
        }
        SpecRhs::Branch(a, left, right) => {
            format!("{} ⊴ {} ⊵ {}", pretty_term(left), a, pretty_term(right))
        }
    }
}

/// Solves a guarded recursive specification into the thread graph rooted at
/// `start`. Nested anonymous right-hand sides become fresh nodes. The
/// resulting graph satisfies every equation of the specification and is the
/// unique solution up to bisimilarity.
pub fn solve_spec(spec: &RecursiveSpec, start: &str) -> Result<ThreadGraph, SpecError> {
    if spec.get(start).is_none() {
        return Err(SpecError::UnknownStart(start.to_string()));
    }

    // One node per equation, in equation order; anonymous sub-terms appended.
    let mut nodes: Vec<ThreadNode> = vec![ThreadNode::Deadlock; spec.equations.len()];
    let var_slot: HashMap<&str, usize> = spec
        .equations
        .iter()
        .enumerate()
        .map(|(i, (name, _))| (name.as_str(), i))
        .collect();

    fn term_node(
        term: &SpecTerm,
        var_slot: &HashMap<&str, usize>,
        nodes: &mut Vec<ThreadNode>,
    ) -> NodeId {
        match term {
            SpecTerm::Var(v) => NodeId(var_slot[v.as_str()]),
            SpecTerm::Sub(rhs) => rhs_node(rhs, var_slot, nodes),
        }
    }

    fn rhs_node(
        rhs: &SpecRhs,
        var_slot: &HashMap<&str, usize>,
        nodes: &mut Vec<ThreadNode>,
    ) -> NodeId {
        let built = match rhs {
            SpecRhs::Stop => ThreadNode::Stop,
            SpecRhs::Deadlock => ThreadNode::Deadlock,
            SpecRhs::Branch(a, left, right) => {
                let on_true = term_node(left, var_slot, nodes);
                let on_false = term_node(right, var_slot, nodes);
                ThreadNode::Branch { action: a.clone(), on_true, on_false }
            }
        };
        nodes.push(built);
        NodeId(nodes.len() - 1)
    }

    for (i, (_, rhs)) in spec.equations.iter().enumerate() {
        nodes[i] = match rhs {
            SpecRhs::Stop => ThreadNode::Stop,
            SpecRhs::Deadlock => ThreadNode::Deadlock,
            SpecRhs::Branch(a, left, right) => {
                let on_true = term_node(left, &var_slot, &mut nodes);
                let on_false = term_node(right, &var_slot, &mut nodes);
                ThreadNode::Branch { action: a.clone(), on_true, on_false }
            }
        };
    }

    let root = var_slot[start];
    Ok(ThreadGraph::from_parts(nodes, root).expect("solver emits only in-bounds references"))
}

// ---------------------------------------------------------------------------
// Bisimilarity
// ---------------------------------------------------------------------------

/// Classifies what a node offers, for mismatch reporting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeClass {
    Stop,
    Deadlock,
    Action(Action),
}

impl fmt::Display for NodeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeClass::Stop => write!(f, "termination"),
            NodeClass::Deadlock => write!(f, "deadlock"),
            NodeClass::Action(a) => write!(f, "action {a}"),
        }
    }
}

/// Evidence that two graphs are not bisimilar: the replies driving both to a
/// pair of nodes that disagree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Distinguisher {
    pub replies: Vec<bool>,
    pub left: NodeClass,
    pub right: NodeClass,
}

fn classify(node: &ThreadNode) -> NodeClass {
    match node {
        ThreadNode::Stop => NodeClass::Stop,
        ThreadNode::Deadlock => NodeClass::Deadlock,
        ThreadNode::Branch { action, .. } => NodeClass::Action(action.clone()),
    }
}

/// Searches for a distinguishing reply sequence by exploring the synchronized
/// product of the two graphs. Returns `None` when the graphs are bisimilar.
///
/// Threads are deterministic, so the closure of the root pair under matched
/// moves is itself a bisimulation whenever no visited pair disagrees; the
/// shortest disagreeing path (BFS order) is returned otherwise.
pub fn distinguish(left: &ThreadGraph, right: &ThreadGraph) -> Option<Distinguisher> {
    let mut seen: HashSet<(usize, usize)> = HashSet::new();
    let mut queue: VecDeque<(NodeId, NodeId, Vec<bool>)> = VecDeque::new();
    queue.push_back((left.root(), right.root(), Vec::new()));
    seen.insert((left.root().index(), right.root().index()));

    while let Some((l, r, path)) = queue.pop_front() {
        match (left.node(l), right.node(r)) {
            (ThreadNode::Stop, ThreadNode::Stop) | (ThreadNode::Deadlock, ThreadNode::Deadlock) => {}
            (
                ThreadNode::Branch { action: la, on_true: lt, on_false: lf },
                ThreadNode::Branch { action: ra, on_true: rt, on_false: rf },
            ) if la == ra => {
                for (reply, ln, rn) in [(true, lt, rt), (false, lf, rf)] {
                    if seen.insert((ln.index(), rn.index())) {
                        let mut next = path.clone();
                        next.push(reply);
                        queue.push_back((*ln, *rn, next));
                    }
                }
            }
            (ln, rn) => {
                return Some(Distinguisher {
                    replies: path,
                    left: classify(ln),
                    right: classify(rn),
                });
            }
        }
    }
    None
}

/// True iff a bisimulation relates the two roots.
pub fn bisimilar(left: &ThreadGraph, right: &ThreadGraph) -> bool {
    distinguish(left, right).is_none()
}

// ---------------------------------------------------------------------------
// Trace unfolding
// ---------------------------------------------------------------------------

/// How a trace walk ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceEnd {
    Stopped,
    Deadlocked,
    CutOff,
}

impl fmt::Display for TraceEnd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceEnd::Stopped => write!(f, "stopped"),
            TraceEnd::Deadlocked => write!(f, "deadlocked"),
            TraceEnd::CutOff => write!(f, "cut-off"),
        }
    }
}

/// Walks the graph from the root, consuming one reply per branch. Returns the
/// actions visited and how the walk ended: at a constant, or cut off when the
/// replies ran out at a branch.
pub fn unfold_trace(graph: &ThreadGraph, replies: &[bool]) -> (Vec<Action>, TraceEnd) {
    let mut actions = Vec::new();
    let mut current = graph.root();
    let mut remaining = replies.iter();
    loop {
        match graph.node(current) {
            ThreadNode::Stop => return (actions, TraceEnd::Stopped),
            ThreadNode::Deadlock => return (actions, TraceEnd::Deadlocked),
            ThreadNode::Branch { action, on_true, on_false } => match remaining.next() {
                None => return (actions, TraceEnd::CutOff),
                Some(&reply) => {
                    actions.push(action.clone());
                    current = if reply { *on_true } else { *on_false };
                }
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn act(s: &str) -> Action {
        let (f, m) = s.split_once('.').unwrap();
        Action::new(f, m)
    }

    fn var(v: &str) -> SpecTerm {
        SpecTerm::Var(v.to_string())
    }

    fn sub(rhs: SpecRhs) -> SpecTerm {
        SpecTerm::Sub(Box::new(rhs))
    }

    fn spec(eqs: Vec<(&str, SpecRhs)>) -> RecursiveSpec {
        RecursiveSpec::new(eqs.into_iter().map(|(n, r)| (n.to_string(), r)).collect()).unwrap()
    }

    fn loop_graph(a: Action) -> ThreadGraph {
        // X = a ∘ X
        let s = spec(vec![("X", SpecRhs::Branch(a, var("X"), var("X")))]);
        solve_spec(&s, "X").unwrap()
    }

    #[test]
    fn action_prefix_on_constants() {
        let g = action_prefix(act("a.m"), &ThreadGraph::stop());
        assert_eq!(g.node_count(), 2);
        match g.node(g.root()) {
            ThreadNode::Branch { action, on_true, on_false } => {
                assert_eq!(action, &act("a.m"));
                assert_eq!(on_true, on_false);
                assert_eq!(g.node(*on_true), &ThreadNode::Stop);
            }
            other => panic!("expected branch, got {other:?}"),
        }

        let g = action_prefix(act("a.m"), &ThreadGraph::deadlock());
        match g.node(g.root()) {
            ThreadNode::Branch { on_true, .. } => {
                assert_eq!(g.node(*on_true), &ThreadNode::Deadlock)
            }
            other => panic!("expected branch, got {other:?}"),
        }
    }

    #[test]
    fn action_prefix_on_loop() {
        // prefixing a onto X = b ∘ X gives a graph with root a-branch into the loop
        let prefixed = action_prefix(act("a.m"), &loop_graph(act("b.m")));
        let expected = spec(vec![
            ("R", SpecRhs::Branch(act("a.m"), var("X"), var("X"))),
            ("X", SpecRhs::Branch(act("b.m"), var("X"), var("X"))),
        ]);
        assert!(bisimilar(&prefixed, &solve_spec(&expected, "R").unwrap()));
    }

    #[test]
    fn solve_single_constant() {
        let s = spec(vec![("X", SpecRhs::Stop)]);
        let g = solve_spec(&s, "X").unwrap();
        assert_eq!(g.node_count(), 1);
        assert_eq!(g.node(g.root()), &ThreadNode::Stop);
    }

    #[test]
    fn solve_one_node_loop() {
        let g = loop_graph(act("a.m"));
        assert_eq!(g.node_count(), 1);
        match g.node(g.root()) {
            ThreadNode::Branch { on_true, on_false, .. } => {
                assert_eq!(*on_true, g.root());
                assert_eq!(*on_false, g.root());
            }
            other => panic!("expected branch, got {other:?}"),
        }
    }

    #[test]
    fn solve_two_equation_branch() {
        let s = spec(vec![
            ("X", SpecRhs::Branch(act("a.m"), sub(SpecRhs::Stop), var("Y"))),
            ("Y", SpecRhs::Deadlock),
        ]);
        let g = solve_spec(&s, "X").unwrap();
        match g.node(g.root()) {
            ThreadNode::Branch { action, on_true, on_false } => {
                assert_eq!(action, &act("a.m"));
                assert_eq!(g.node(*on_true), &ThreadNode::Stop);
                assert_eq!(g.node(*on_false), &ThreadNode::Deadlock);
            }
            other => panic!("expected branch, got {other:?}"),
        }
    }

    #[test]
    fn solve_rejects_unknown_start() {
        let s = spec(vec![("X", SpecRhs::Stop)]);
        assert_eq!(solve_spec(&s, "Y"), Err(SpecError::UnknownStart("Y".to_string())));
    }

    #[test]
    fn spec_rejects_undefined_reference() {
        let err = RecursiveSpec::new(vec![(
            "X".to_string(),
            SpecRhs::Branch(act("a.m"), var("Z"), var("Z")),
        )])
        .unwrap_err();
        assert_eq!(err, SpecError::UndefinedVariable("Z".to_string()));
    }

    #[test]
    fn spec_rejects_duplicates_and_reserved() {
        let err = RecursiveSpec::new(vec![
            ("X".to_string(), SpecRhs::Stop),
            ("X".to_string(), SpecRhs::Deadlock),
        ])
        .unwrap_err();
        assert_eq!(err, SpecError::DuplicateVariable("X".to_string()));
        let err = RecursiveSpec::new(vec![("S".to_string(), SpecRhs::Stop)]).unwrap_err();
        assert_eq!(err, SpecError::ReservedName("S".to_string()));
    }

    #[test]
    fn bisimilar_constants_and_loops() {
        assert!(bisimilar(&ThreadGraph::stop(), &ThreadGraph::stop()));
        assert!(!bisimilar(&ThreadGraph::stop(), &ThreadGraph::deadlock()));

        // X = a∘X  vs  Y = a∘(a∘Y): same behaviour, different node counts.
        let one = loop_graph(act("a.m"));
        let two_spec = spec(vec![(
            "Y",
            SpecRhs::Branch(
                act("a.m"),
                sub(SpecRhs::Branch(act("a.m"), var("Y"), var("Y"))),
                sub(SpecRhs::Branch(act("a.m"), var("Y"), var("Y"))),
            ),
        )]);
        let two = solve_spec(&two_spec, "Y").unwrap();
        assert!(bisimilar(&one, &two));
    }

    #[test]
    fn distinguish_reports_shortest_witness() {
        // a∘S vs S ⊴ a ⊵ D differ after one negative reply.
        let left = action_prefix(act("a.m"), &ThreadGraph::stop());
        let right_spec = spec(vec![(
            "X",
            SpecRhs::Branch(act("a.m"), sub(SpecRhs::Stop), sub(SpecRhs::Deadlock)),
        )]);
        let right = solve_spec(&right_spec, "X").unwrap();
        let witness = distinguish(&left, &right).unwrap();
        assert_eq!(witness.replies, vec![false]);
        assert_eq!(witness.left, NodeClass::Stop);
        assert_eq!(witness.right, NodeClass::Deadlock);

        // D vs S distinguished by the empty sequence.
        let witness = distinguish(&ThreadGraph::deadlock(), &ThreadGraph::stop()).unwrap();
        assert!(witness.replies.is_empty());
    }

    #[test]
    fn unfold_trace_examples() {
        let branch = spec(vec![(
            "X",
            SpecRhs::Branch(act("a.m"), sub(SpecRhs::Stop), sub(SpecRhs::Deadlock)),
        )]);
        let g = solve_spec(&branch, "X").unwrap();
        assert_eq!(unfold_trace(&g, &[true]), (vec![act("a.m")], TraceEnd::Stopped));
        assert_eq!(unfold_trace(&g, &[false]), (vec![act("a.m")], TraceEnd::Deadlocked));

        let looped = loop_graph(act("a.m"));
        assert_eq!(
            unfold_trace(&looped, &[true, true]),
            (vec![act("a.m"), act("a.m")], TraceEnd::CutOff)
        );
    }

    #[test]
    fn to_spec_round_trips_through_solve() {
        let s = spec(vec![
            ("X", SpecRhs::Branch(act("a.m"), var("Y"), sub(SpecRhs::Stop))),
            ("Y", SpecRhs::Branch(act("b.m"), var("X"), sub(SpecRhs::Deadlock))),
        ]);
        let g = solve_spec(&s, "X").unwrap();
        let rendered = g.to_spec();
        let resolved = solve_spec(&rendered, rendered.first_variable()).unwrap();
        assert!(bisimilar(&g, &resolved));
        assert_eq!(
            rendered.to_eqns_string(),
            "P1 = P2 < a.m > S\nP2 = P1 < b.m > D\n"
        );
    }

    #[test]
    fn pretty_rendering_uses_prefix_and_postconditional() {
        let g = action_prefix(act("a.b"), &ThreadGraph::stop());
        assert_eq!(g.to_spec().to_pretty_string(), "P1 = a.b ∘ S\n");

        let s = spec(vec![(
            "X",
            SpecRhs::Branch(act("a.b"), sub(SpecRhs::Stop), sub(SpecRhs::Deadlock)),
        )]);
        let g = solve_spec(&s, "X").unwrap();
        assert_eq!(g.to_spec().to_pretty_string(), "P1 = S ⊴ a.b ⊵ D\n");
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        pub fn arb_action() -> impl Strategy<Value = Action> {
            ("[abc]", "[mn]").prop_map(|(f, m)| Action::new(f, m))
        }

        /// Random graph over up to `max` nodes; `from_parts` prunes whatever
        /// ends up unreachable.
        pub fn arb_graph(max: usize) -> impl Strategy<Value = ThreadGraph> {
            (1..=max).prop_flat_map(|n| {
                let node = prop_oneof![
                    Just(NodeKind::Stop),
                    Just(NodeKind::Deadlock),
                    (arb_action(), 0..n, 0..n)
                        .prop_map(|(a, t, f)| NodeKind::Branch(a, t, f)),
                ];
                proptest::collection::vec(node, n).prop_map(|kinds| {
                    let nodes = kinds
                        .into_iter()
                        .map(|k| match k {
                            NodeKind::Stop => ThreadNode::Stop,
                            NodeKind::Deadlock => ThreadNode::Deadlock,
                            NodeKind::Branch(a, t, f) => ThreadNode::Branch {
                                action: a,
                                on_true: NodeId(t),
                                on_false: NodeId(f),
                            },
                        })
                        .collect();
                    ThreadGraph::from_parts(nodes, 0).unwrap()
                })
            })
        }

        #[derive(Debug, Clone)]
        enum NodeKind {
            Stop,
            Deadlock,
            Branch(Action, usize, usize),
        }

        /// A graph bisimilar to `g` by construction: node `chosen` is
        /// duplicated and roughly half of its incoming edges are redirected
        /// to the copy.
        fn split_node(g: &ThreadGraph, chosen: usize, salt: usize) -> ThreadGraph {
            let n = g.node_count();
            let chosen = chosen % n;
            let mut nodes: Vec<ThreadNode> = g.nodes().map(|(_, node)| node.clone()).collect();
            nodes.push(nodes[chosen].clone());
            let copy = NodeId(n);
            for (i, node) in nodes.iter_mut().enumerate().take(n) {
                if let ThreadNode::Branch { on_true, on_false, .. } = node {
                    if on_true.0 == chosen && (i + salt).is_multiple_of(2) {
                        *on_true = copy;
                    }
                    if on_false.0 == chosen && (i + salt).is_multiple_of(3) {
                        *on_false = copy;
                    }
                }
            }
            let root = g.root().0;
            ThreadGraph::from_parts(nodes, root).unwrap()
        }

        proptest! {
            #[test]
            fn bisimilarity_is_reflexive(g in arb_graph(6)) {
                prop_assert!(bisimilar(&g, &g));
            }

            #[test]
            fn bisimilarity_is_symmetric(a in arb_graph(5), b in arb_graph(5)) {
                prop_assert_eq!(bisimilar(&a, &b), bisimilar(&b, &a));
            }

            #[test]
            fn bisimilarity_is_transitive_on_split_graphs(
                g in arb_graph(6),
                chosen in 0usize..6,
                salt in 0usize..6,
            ) {
                let g2 = split_node(&g, chosen, salt);
                let g3 = split_node(&g2, chosen.wrapping_add(1), salt.wrapping_add(1));
                prop_assert!(bisimilar(&g, &g2));
                prop_assert!(bisimilar(&g2, &g3));
                prop_assert!(bisimilar(&g, &g3));
            }

            #[test]
            fn distinguisher_is_sound(a in arb_graph(5), b in arb_graph(5)) {
                // replaying the witness replies (plus one step, for an
                // action-vs-action mismatch) must yield different traces
                if let Some(w) = distinguish(&a, &b) {
                    let mut extended = w.replies.clone();
                    extended.push(true);
                    let differs = |replies: &[bool]| {
                        unfold_trace(&a, replies) != unfold_trace(&b, replies)
                    };
                    prop_assert!(
                        differs(&w.replies) || differs(&extended),
                        "witness does not distinguish: {:?}",
                        w
                    );
                }
            }

            #[test]
            fn action_prefix_matches_manual_branch(a in arb_action(), g in arb_graph(5)) {
                let prefixed = action_prefix(a.clone(), &g);
                let mut nodes: Vec<ThreadNode> =
                    g.nodes().map(|(_, node)| node.clone()).collect();
                nodes.push(ThreadNode::Branch {
                    action: a,
                    on_true: g.root(),
                    on_false: g.root(),
                });
                let root = nodes.len() - 1;
                let manual = ThreadGraph::from_parts(nodes, root).unwrap();
                prop_assert!(bisimilar(&prefixed, &manual));
            }
        }

        // --- guarded recursion ---

        fn arb_spec(vars: usize) -> impl Strategy<Value = RecursiveSpec> {
            let names: Vec<String> = (0..vars).map(|i| format!("X{i}")).collect();
            let term = {
                let names = names.clone();
                prop_oneof![
                    (0..vars).prop_map(move |i| SpecTerm::Var(names[i].clone())),
                    Just(SpecTerm::Sub(Box::new(SpecRhs::Stop))),
                    Just(SpecTerm::Sub(Box::new(SpecRhs::Deadlock))),
                ]
            };
            let rhs = prop_oneof![
                Just(SpecRhs::Stop),
                Just(SpecRhs::Deadlock),
                (arb_action(), term.clone(), term).prop_map(|(a, l, r)| SpecRhs::Branch(a, l, r)),
            ];
            proptest::collection::vec(rhs, vars).prop_map(move |rhss| {
                RecursiveSpec::new(
                    names.iter().cloned().zip(rhss).collect::<Vec<_>>(),
                )
                .unwrap()
            })
        }

        /// Builds the graph for `rhs` with every variable replaced by a copy
        /// of its solved subgraph: the right-hand side of the defining
        /// equation, solutions grafted in.
        fn graft(spec: &RecursiveSpec, rhs: &SpecRhs) -> ThreadGraph {
            fn term_root(
                spec: &RecursiveSpec,
                term: &SpecTerm,
                nodes: &mut Vec<ThreadNode>,
            ) -> NodeId {
                match term {
                    SpecTerm::Var(v) => {
                        let solved = solve_spec(spec, v).unwrap();
                        let offset = nodes.len();
                        for (_, node) in solved.nodes() {
                            nodes.push(match node {
                                ThreadNode::Branch { action, on_true, on_false } => {
                                    ThreadNode::Branch {
                                        action: action.clone(),
                                        on_true: NodeId(on_true.0 + offset),
                                        on_false: NodeId(on_false.0 + offset),
                                    }
                                }
                                other => other.clone(),
                            });
                        }
                        NodeId(solved.root().0 + offset)
                    }
                    SpecTerm::Sub(rhs) => rhs_root(spec, rhs, nodes),
                }
            }

            fn rhs_root(
                spec: &RecursiveSpec,
                rhs: &SpecRhs,
                nodes: &mut Vec<ThreadNode>,
            ) -> NodeId {
                let node = match rhs {
                    SpecRhs::Stop => ThreadNode::Stop,
                    SpecRhs::Deadlock => ThreadNode::Deadlock,
                    SpecRhs::Branch(a, l, r) => {
                        let lt = term_root(spec, l, nodes);
                        let rt = term_root(spec, r, nodes);
                        ThreadNode::Branch { action: a.clone(), on_true: lt, on_false: rt }
                    }
                };
                nodes.push(node);
                NodeId(nodes.len() - 1)
            }

            let mut nodes = Vec::new();
            let root = rhs_root(spec, rhs, &mut nodes);
            ThreadGraph::from_parts(nodes, root.0).unwrap()
        }

        proptest! {
            /// Solutions satisfy their defining equations.
            #[test]
            fn solutions_satisfy_equations(s in arb_spec(3)) {
                for (name, rhs) in s.equations() {
                    let solved = solve_spec(&s, name).unwrap();
                    let substituted = graft(&s, rhs);
                    prop_assert!(
                        bisimilar(&solved, &substituted),
                        "equation {name} not satisfied"
                    );
                }
            }

            /// Renaming variables does not change the solution.
            #[test]
            fn solutions_are_stable_under_renaming(s in arb_spec(3)) {
                fn rename_term(t: &SpecTerm) -> SpecTerm {
                    match t {
                        SpecTerm::Var(v) => SpecTerm::Var(format!("Q_{v}")),
                        SpecTerm::Sub(rhs) => SpecTerm::Sub(Box::new(rename_rhs(rhs))),
                    }
                }
                fn rename_rhs(rhs: &SpecRhs) -> SpecRhs {
                    match rhs {
                        SpecRhs::Branch(a, l, r) => {
                            SpecRhs::Branch(a.clone(), rename_term(l), rename_term(r))
                        }
                        other => other.clone(),
                    }
                }
                let renamed = RecursiveSpec::new(
                    s.equations()
                        .iter()
                        .map(|(n, rhs)| (format!("Q_{n}"), rename_rhs(rhs)))
                        .collect(),
                )
                .unwrap();
                for (name, _) in s.equations() {
                    let original = solve_spec(&s, name).unwrap();
                    let rn = solve_spec(&renamed, &format!("Q_{name}")).unwrap();
                    prop_assert!(bisimilar(&original, &rn));
                }
            }

            /// Rendering a graph as a spec and solving it again is lossless
            /// up to bisimilarity.
            #[test]
            fn to_spec_solve_round_trip(g in arb_graph(6)) {
                let spec = g.to_spec();
                let solved = solve_spec(&spec, spec.first_variable()).unwrap();
                prop_assert!(bisimilar(&g, &solved));
            }
        }
    }
}
