//! Shift-reduce transition system over binary discourse trees.

use std::fmt;

use thiserror::Error;

use crate::treebank::{DiscourseNode, DiscourseTree, Nuclearity};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransitionError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("illegal action{}: {reason}", .step.map(|s| format!(" at step {s}")).unwrap_or_default())]
    IllegalAction { step: Option<usize>, reason: String },
    #[error("incomplete parse: {stack} stack items and {remaining} unshifted EDUs remain")]
    IncompleteParse { stack: usize, remaining: usize },
    #[error("bad trace line {line}: {message}")]
    BadTrace { line: usize, message: String },
}

/// Number of structure classes: Shift plus one Reduce per nuclearity.
pub const N_STRUCTURE_CLASSES: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Action {
    Shift,
    Reduce {
        nuclearity: Nuclearity,
        relation: String,
    },
}

impl Action {
    pub fn reduce(nuclearity: Nuclearity, relation: impl Into<String>) -> Self {
        Action::Reduce {
            nuclearity,
            relation: relation.into(),
        }
    }

    /// Structure class: 0 = Shift, 1 = Reduce-NN, 2 = Reduce-NS, 3 = Reduce-SN.
    pub fn structure_class(&self) -> usize {
        match self {
            Action::Shift => 0,
            Action::Reduce { nuclearity, .. } => 1 + nuclearity.index(),
        }
    }

    pub fn is_shift(&self) -> bool {
        matches!(self, Action::Shift)
    }
}

/// Inverse of [`Action::structure_class`] for reduce classes.
pub fn class_nuclearity(class: usize) -> Option<Nuclearity> {
    match class {
        1..=3 => Some(Nuclearity::ALL[class - 1]),
        _ => None,
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Shift => f.write_str("SHIFT"),
            Action::Reduce {
                nuclearity,
                relation,
            } => write!(f, "REDUCE {nuclearity} {relation}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LegalActions {
    pub shift: bool,
    pub reduce: bool,
}

impl LegalActions {
    /// Per structure class legality, indexed like [`Action::structure_class`].
    pub fn mask(self) -> [bool; N_STRUCTURE_CLASSES] {
        [self.shift, self.reduce, self.reduce, self.reduce]
    }

    pub fn any(self) -> bool {
        self.shift || self.reduce
    }
}

/// A subtree on the stack with its cached EDU span.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StackItem {
    pub node: DiscourseNode,
    pub span: (usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParserState {
    pub stack: Vec<StackItem>,
    /// Next unshifted EDU id, `n_edus + 1` once the queue is empty.
    pub queue_cursor: usize,
    pub n_edus: usize,
}

pub fn initial_state(n_edus: usize) -> Result<ParserState, TransitionError> {
    if n_edus == 0 {
        return Err(TransitionError::InvalidInput(
            "a document needs at least one EDU".into(),
        ));
    }
    Ok(ParserState {
        stack: Vec::new(),
        queue_cursor: 1,
        n_edus,
    })
}

impl ParserState {
    pub fn legal_actions(&self) -> LegalActions {
        LegalActions {
            shift: self.queue_cursor <= self.n_edus,
            reduce: self.stack.len() >= 2,
        }
    }

    pub fn is_terminal(&self) -> bool {
        self.stack.len() == 1 && self.queue_cursor > self.n_edus
    }

    pub fn queue_remaining(&self) -> usize {
        self.n_edus + 1 - self.queue_cursor
    }

    /// Top of stack (`depth = 0`) and the items below it.
    pub fn stack_item(&self, depth: usize) -> Option<&StackItem> {
        self.stack
            .len()
            .checked_sub(depth + 1)
            .map(|i| &self.stack[i])
    }

    /// Applies `action` in place; the state is untouched on error.
    pub fn step(&mut self, action: &Action) -> Result<(), TransitionError> {
        match action {
            Action::Shift => {
                if self.queue_cursor > self.n_edus {
                    return Err(TransitionError::IllegalAction {
                        step: None,
                        reason: "shift needs a non-empty queue".into(),
                    });
                }
                let id = self.queue_cursor;
                self.stack.push(StackItem {
                    node: DiscourseNode::Leaf(id),
                    span: (id, id),
                });
                self.queue_cursor += 1;
            }
            Action::Reduce {
                nuclearity,
                relation,
            } => {
                if self.stack.len() < 2 {
                    return Err(TransitionError::IllegalAction {
                        step: None,
                        reason: format!("reduce needs two stack items, found {}", self.stack.len()),
                    });
                }
                let right = self.stack.pop().expect("checked length");
                let left = self.stack.pop().expect("checked length");
                self.stack.push(StackItem {
                    span: (left.span.0, right.span.1),
                    node: DiscourseNode::internal(
                        *nuclearity,
                        relation.clone(),
                        left.node,
                        right.node,
                    ),
                });
            }
        }
        Ok(())
    }

    /// Value-semantics variant of [`ParserState::step`].
    pub fn apply(&self, action: &Action) -> Result<ParserState, TransitionError> {
        let mut next = self.clone();
        next.step(action)?;
        Ok(next)
    }
}

/// Static oracle: post-order traversal, Shift at leaves and Reduce at
/// internal nodes.
pub fn oracle(tree: &DiscourseTree) -> Vec<Action> {
    let mut out = Vec::new();
    emit_post_order(tree, &mut out);
    out
}

fn emit_post_order(node: &DiscourseNode, out: &mut Vec<Action>) {
    match node {
        DiscourseNode::Leaf(_) => out.push(Action::Shift),
        DiscourseNode::Internal {
            nuclearity,
            relation,
            left,
            right,
        } => {
            emit_post_order(left, out);
            emit_post_order(right, out);
            out.push(Action::reduce(*nuclearity, relation.clone()));
        }
    }
}

/// Runs `actions` from the initial state and returns the finished tree.
/// Step numbers in errors are 1-based.
pub fn execute(n_edus: usize, actions: &[Action]) -> Result<DiscourseTree, TransitionError> {
    let mut state = initial_state(n_edus)?;
    for (i, action) in actions.iter().enumerate() {
        state.step(action).map_err(|e| match e {
            TransitionError::IllegalAction { reason, .. } => TransitionError::IllegalAction {
                step: Some(i + 1),
                reason,
            },
            other => other,
        })?;
    }
    if !state.is_terminal() {
        return Err(TransitionError::IncompleteParse {
            stack: state.stack.len(),
            remaining: state.queue_remaining(),
        });
    }
    Ok(state.stack.pop().expect("terminal state").node)
}

/// One action per line, `SHIFT` or `REDUCE <NN|NS|SN> <relation>`.
pub fn render_trace(actions: &[Action]) -> String {
    let mut out = String::new();
    for a in actions {
        out.push_str(&a.to_string());
        out.push('\n');
    }
    out
}

pub fn parse_trace(text: &str) -> Result<Vec<Action>, TransitionError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let parts: Vec<&str> = line.split_whitespace().collect();
        let bad = |message: &str| TransitionError::BadTrace {
            line: i + 1,
            message: message.to_string(),
        };
        match parts.as_slice() {
            [] => continue,
            ["SHIFT"] => out.push(Action::Shift),
            ["REDUCE", nuc, rel] => {
                let nuclearity = nuc
                    .parse::<Nuclearity>()
                    .map_err(|_| bad("unknown nuclearity"))?;
                out.push(Action::reduce(nuclearity, *rel));
            }
            _ => return Err(bad("expected SHIFT or REDUCE <nuc> <relation>")),
        }
    }
    Ok(out)
}
