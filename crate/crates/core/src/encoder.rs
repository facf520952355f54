//! Parser-state features: hashed bags of words over truncated span
//! representations plus a few structural scalars.

use serde::{Deserialize, Serialize};

use crate::transition::ParserState;
use crate::treebank::{DiscourseNode, Document, Nuclearity};

/// How a multi-EDU stack span is shortened to at most `max_span_tokens`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TruncationStrategy {
    /// Concatenate the span and drop tokens from its middle.
    Center,
    /// Represent the span by its head nucleus EDU.
    Nucleus,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncoderConfig {
    pub max_span_tokens: usize,
    pub hash_dim: usize,
    pub truncation_strategy: TruncationStrategy,
    pub hash_seed: u64,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        EncoderConfig {
            max_span_tokens: 8,
            hash_dim: 1024,
            truncation_strategy: TruncationStrategy::Nucleus,
            hash_seed: 0,
        }
    }
}

/// Number of structural scalars appended after the three bag blocks.
pub const N_STRUCTURAL: usize = 4;

/// Stack depths above this are clipped before normalization.
const STACK_DEPTH_CLIP: usize = 10;

impl EncoderConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.max_span_tokens < 1 {
            return Err("max_span_tokens must be at least 1".into());
        }
        if self.hash_dim < 8 {
            return Err("hash_dim must be at least 8".into());
        }
        Ok(())
    }

    /// Feature width: three bag blocks plus the structural scalars.
    pub fn width(&self) -> usize {
        3 * self.hash_dim + N_STRUCTURAL
    }
}

/// A feature vector of fixed width, stored as index-sorted nonzero entries.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    width: usize,
    entries: Vec<(usize, f64)>,
}

impl FeatureVector {
    /// Builds from (index, value) pairs; duplicate indices are summed and
    /// zeros dropped.
    pub fn from_pairs(width: usize, mut pairs: Vec<(usize, f64)>) -> Self {
        pairs.sort_by_key(|p| p.0);
        let mut entries: Vec<(usize, f64)> = Vec::with_capacity(pairs.len());
        for (i, v) in pairs {
            assert!(i < width, "feature index {i} out of width {width}");
            match entries.last_mut() {
                Some(last) if last.0 == i => last.1 += v,
                _ => entries.push((i, v)),
            }
        }
        entries.retain(|e| e.1 != 0.0);
        FeatureVector { width, entries }
    }

    pub fn from_dense(values: &[f64]) -> Self {
        FeatureVector {
            width: values.len(),
            entries: values
                .iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(|(i, v)| (i, *v))
                .collect(),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Nonzero entries in increasing index order.
    pub fn nonzeros(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.width];
        for &(i, v) in &self.entries {
            out[i] = v;
        }
        out
    }

    pub fn get(&self, index: usize) -> f64 {
        match self.entries.binary_search_by_key(&index, |e| e.0) {
            Ok(pos) => self.entries[pos].1,
            Err(_) => 0.0,
        }
    }
}

/// Keeps the first `ceil(L/2)` and last `floor(L/2)` tokens of an over-long
/// sequence.
pub fn truncate_center<T: Clone>(tokens: &[T], max_len: usize) -> Vec<T> {
    if tokens.len() <= max_len {
        return tokens.to_vec();
    }
    let head = max_len.div_ceil(2);
    let tail = max_len / 2;
    let mut out = Vec::with_capacity(max_len);
    out.extend_from_slice(&tokens[..head]);
    out.extend_from_slice(&tokens[tokens.len() - tail..]);
    out
}

/// EDU heading a subtree, following nuclei downward. Multinuclear (NN)
/// nodes resolve to their left child.
pub fn head_nucleus_edu(node: &DiscourseNode) -> usize {
    let mut node = node;
    loop {
        match node {
            DiscourseNode::Leaf(id) => return *id,
            DiscourseNode::Internal {
                nuclearity,
                left,
                right,
                ..
            } => {
                node = match nuclearity {
                    Nuclearity::NS | Nuclearity::NN => left,
                    Nuclearity::SN => right,
                }
            }
        }
    }
}

/// Token representation of a subtree under the configured strategy.
pub fn represent_span(node: &DiscourseNode, doc: &Document, cfg: &EncoderConfig) -> Vec<String> {
    match cfg.truncation_strategy {
        TruncationStrategy::Center => {
            let (first, last) = node.span();
            let all: Vec<String> = (first..=last)
                .flat_map(|id| doc.edu_tokens(id).iter().cloned())
                .collect();
            truncate_center(&all, cfg.max_span_tokens)
        }
        TruncationStrategy::Nucleus => {
            truncate_center(doc.edu_tokens(head_nucleus_edu(node)), cfg.max_span_tokens)
        }
    }
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// Seeded FNV-1a over the little-endian seed bytes followed by the UTF-8
/// token bytes. Stable across platforms and runs.
pub fn token_hash(token: &str, seed: u64) -> u64 {
    let mut h = FNV_OFFSET;
    for b in seed.to_le_bytes().iter().chain(token.as_bytes()) {
        h ^= u64::from(*b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

fn push_bag(pairs: &mut Vec<(usize, f64)>, offset: usize, tokens: &[String], cfg: &EncoderConfig) {
    let scale = 1.0 / tokens.len().max(1) as f64;
    for tok in tokens {
        let bucket = (token_hash(tok, cfg.hash_seed) % cfg.hash_dim as u64) as usize;
        pairs.push((offset + bucket, scale));
    }
}

/// Encodes a parser state as `[top bag | second bag | queue-front bag |
/// structural]`. Empty slots leave their block at zero.
pub fn encode_state(state: &ParserState, doc: &Document, cfg: &EncoderConfig) -> FeatureVector {
    let d = cfg.hash_dim;
    let n = state.n_edus.max(1) as f64;
    let mut pairs = Vec::with_capacity(3 * cfg.max_span_tokens + N_STRUCTURAL);

    let top = state.stack_item(0);
    let second = state.stack_item(1);
    if let Some(item) = top {
        push_bag(&mut pairs, 0, &represent_span(&item.node, doc, cfg), cfg);
    }
    if let Some(item) = second {
        push_bag(&mut pairs, d, &represent_span(&item.node, doc, cfg), cfg);
    }
    if state.queue_cursor <= state.n_edus {
        let front = DiscourseNode::Leaf(state.queue_cursor);
        push_bag(&mut pairs, 2 * d, &represent_span(&front, doc, cfg), cfg);
    }

    let span_len = |item: Option<&crate::transition::StackItem>| {
        item.map_or(0.0, |it| (it.span.1 - it.span.0 + 1) as f64 / n)
    };
    let base = 3 * d;
    pairs.push((
        base,
        state.stack.len().min(STACK_DEPTH_CLIP) as f64 / STACK_DEPTH_CLIP as f64,
    ));
    pairs.push((base + 1, state.queue_remaining() as f64 / n));
    pairs.push((base + 2, span_len(top)));
    pairs.push((base + 3, span_len(second)));
    FeatureVector::from_pairs(cfg.width(), pairs)
}
