//! RST-Parseval scoring and prefix-by-domain evaluation tables.
//!
//! Every internal node, the root included, contributes one labeled
//! constituent, so a tree over `n` EDUs has exactly `n - 1`. A nuclearity
//! match needs the same span and nuclearity; a relation match needs the same
//! span and relation, regardless of nuclearity. Scores are micro-averaged:
//! match counts are summed over documents before computing P/R/F1.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::boosting::{BoostError, BoostedEnsemble};
use crate::treebank::{DiscourseNode, DiscourseTree, Nuclearity, Treebank};

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("document mismatch: {0}")]
    DocumentMismatch(String),
    #[error("relation inventory mismatch: treebank uses {0:?}, unknown to the model")]
    RelationInventoryMismatch(Vec<String>),
    #[error("cannot evaluate an empty treebank")]
    EmptyTreebank,
    #[error("no treebanks to evaluate")]
    NoTreebanks,
    #[error(transparent)]
    Boost(#[from] BoostError),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LabeledConstituent {
    pub start: usize,
    pub end: usize,
    pub nuclearity: Nuclearity,
    pub relation: String,
}

/// One constituent per internal node, ordered by span.
pub fn constituents(tree: &DiscourseTree) -> Vec<LabeledConstituent> {
    let mut out = Vec::new();
    collect(tree, &mut out);
    out.sort();
    out
}

fn collect(node: &DiscourseNode, out: &mut Vec<LabeledConstituent>) -> (usize, usize) {
    match node {
        DiscourseNode::Leaf(id) => (*id, *id),
        DiscourseNode::Internal {
            nuclearity,
            relation,
            left,
            right,
        } => {
            let (start, _) = collect(left, out);
            let (_, end) = collect(right, out);
            out.push(LabeledConstituent {
                start,
                end,
                nuclearity: *nuclearity,
                relation: relation.clone(),
            });
            (start, end)
        }
    }
}

/// Raw match counts; add them up across documents before scoring.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsevalCounts {
    pub docs: usize,
    pub gold: usize,
    pub predicted: usize,
    pub span_matches: usize,
    pub nuc_matches: usize,
    pub rel_matches: usize,
}

impl ParsevalCounts {
    pub fn add(&mut self, other: &ParsevalCounts) {
        self.docs += other.docs;
        self.gold += other.gold;
        self.predicted += other.predicted;
        self.span_matches += other.span_matches;
        self.nuc_matches += other.nuc_matches;
        self.rel_matches += other.rel_matches;
    }

    pub fn scores(&self) -> ParsevalScores {
        let prf = |hits: usize| {
            // Single-EDU trees have no constituents; empty agrees with empty.
            if self.gold == 0 && self.predicted == 0 {
                return (1.0, 1.0, 1.0);
            }
            let p = ratio(hits, self.predicted);
            let r = ratio(hits, self.gold);
            let f = if p + r > 0.0 {
                2.0 * p * r / (p + r)
            } else {
                0.0
            };
            (p, r, f)
        };
        let (span_p, span_r, span_f1) = prf(self.span_matches);
        let (nuc_p, nuc_r, nuc_f1) = prf(self.nuc_matches);
        let (rel_p, rel_r, rel_f1) = prf(self.rel_matches);
        ParsevalScores {
            span_p,
            span_r,
            span_f1,
            nuc_p,
            nuc_r,
            nuc_f1,
            rel_p,
            rel_r,
            rel_f1,
            counts: *self,
        }
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParsevalScores {
    pub span_p: f64,
    pub span_r: f64,
    pub span_f1: f64,
    pub nuc_p: f64,
    pub nuc_r: f64,
    pub nuc_f1: f64,
    pub rel_p: f64,
    pub rel_r: f64,
    pub rel_f1: f64,
    pub counts: ParsevalCounts,
}

/// Match counts for one document.
pub fn count_matches(
    gold: &DiscourseTree,
    pred: &DiscourseTree,
) -> Result<ParsevalCounts, MetricsError> {
    let (g_lo, g_hi) = gold.span();
    let (p_lo, p_hi) = pred.span();
    if (g_lo, g_hi) != (p_lo, p_hi) || gold.internal_count() != pred.internal_count() {
        return Err(MetricsError::DocumentMismatch(format!(
            "gold covers EDUs {g_lo}..={g_hi} with {} leaves, prediction {p_lo}..={p_hi} with {}",
            gold.internal_count() + 1,
            pred.internal_count() + 1
        )));
    }
    let g = constituents(gold);
    let p = constituents(pred);
    let mut counts = ParsevalCounts {
        docs: 1,
        gold: g.len(),
        predicted: p.len(),
        ..ParsevalCounts::default()
    };
    // Spans are unique within a binary tree, so a merge over sorted lists
    // pairs each gold span with at most one predicted span.
    let (mut i, mut j) = (0, 0);
    while i < g.len() && j < p.len() {
        match (g[i].start, g[i].end).cmp(&(p[j].start, p[j].end)) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                counts.span_matches += 1;
                if g[i].nuclearity == p[j].nuclearity {
                    counts.nuc_matches += 1;
                }
                if g[i].relation == p[j].relation {
                    counts.rel_matches += 1;
                }
                i += 1;
                j += 1;
            }
        }
    }
    Ok(counts)
}

pub fn score(gold: &DiscourseTree, pred: &DiscourseTree) -> Result<ParsevalScores, MetricsError> {
    Ok(count_matches(gold, pred)?.scores())
}

/// Micro-averaged scores over aligned (gold, predicted) tree pairs.
pub fn score_pairs<'a, I>(pairs: I) -> Result<ParsevalScores, MetricsError>
where
    I: IntoIterator<Item = (&'a DiscourseTree, &'a DiscourseTree)>,
{
    let mut total = ParsevalCounts::default();
    for (g, p) in pairs {
        total.add(&count_matches(g, p)?);
    }
    Ok(total.scores())
}

/// Relations the treebank declares or uses that the model does not know.
pub fn unknown_relations(ensemble: &BoostedEnsemble, tb: &Treebank) -> Vec<String> {
    let mut labels: BTreeSet<String> = tb.relation_inventory.iter().cloned().collect();
    labels.extend(tb.used_relations());
    labels
        .into_iter()
        .filter(|r| ensemble.relation_id(r).is_none())
        .collect()
}

/// Parses every document with prefix `m` and scores against gold.
pub fn evaluate_treebank(
    ensemble: &BoostedEnsemble,
    m: usize,
    tb: &Treebank,
) -> Result<ParsevalScores, MetricsError> {
    if m < 1 || m > ensemble.len() {
        return Err(BoostError::InvalidPrefix {
            prefix: m,
            steps: ensemble.len(),
        }
        .into());
    }
    if tb.is_empty() {
        return Err(MetricsError::EmptyTreebank);
    }
    let unknown = unknown_relations(ensemble, tb);
    if !unknown.is_empty() {
        return Err(MetricsError::RelationInventoryMismatch(unknown));
    }
    let mut total = ParsevalCounts::default();
    for (doc, gold) in &tb.entries {
        let pred = ensemble.parse(m, doc)?;
        total.add(&count_matches(gold, &pred)?);
    }
    Ok(total.scores())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub m: usize,
    pub domain: String,
    pub docs: usize,
    pub scores: ParsevalScores,
}

/// In-domain minus mean out-of-domain span F1 at one prefix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainGap {
    pub m: usize,
    pub in_domain_span_f1: f64,
    pub out_of_domain_span_f1: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveTable {
    /// Ordered by prefix, then by treebank order.
    pub rows: Vec<CurveRow>,
    /// Present when exactly one treebank matches the training domain and at
    /// least one other treebank exists.
    pub gaps: Vec<DomainGap>,
}

pub const CURVE_CSV_HEADER: &str =
    "m,domain,docs,span_p,span_r,span_f1,nuc_p,nuc_r,nuc_f1,rel_p,rel_r,rel_f1";

/// One CSV line in the curve schema (no trailing newline).
pub fn csv_line(m: usize, domain: &str, docs: usize, s: &ParsevalScores) -> String {
    format!(
        "{m},{domain},{docs},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4}",
        s.span_p, s.span_r, s.span_f1, s.nuc_p, s.nuc_r, s.nuc_f1, s.rel_p, s.rel_r, s.rel_f1
    )
}

impl CurveTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CURVE_CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            let _ = writeln!(
                out,
                "{}",
                csv_line(row.m, &row.domain, row.docs, &row.scores)
            );
        }
        out
    }

    pub fn gap(&self, m: usize) -> Option<f64> {
        self.gaps.iter().find(|g| g.m == m).map(|g| g.gap)
    }
}

/// Scores every prefix `m = 1..=n` on every treebank.
pub fn boost_curve(
    ensemble: &BoostedEnsemble,
    treebanks: &[Treebank],
    training_domain: Option<&str>,
) -> Result<CurveTable, MetricsError> {
    if treebanks.is_empty() {
        return Err(MetricsError::NoTreebanks);
    }
    let mut rows = Vec::with_capacity(ensemble.len() * treebanks.len());
    for m in 1..=ensemble.len() {
        for tb in treebanks {
            rows.push(CurveRow {
                m,
                domain: tb.domain_tag.clone(),
                docs: tb.len(),
                scores: evaluate_treebank(ensemble, m, tb)?,
            });
        }
    }

    let mut gaps = Vec::new();
    if let Some(tag) = training_domain {
        let in_idx: Vec<usize> = (0..treebanks.len())
            .filter(|&i| treebanks[i].domain_tag == tag)
            .collect();
        if in_idx.len() == 1 && treebanks.len() > 1 {
            let k = treebanks.len();
            for m in 1..=ensemble.len() {
                let block = &rows[(m - 1) * k..m * k];
                let inside = block[in_idx[0]].scores.span_f1;
                let outside: Vec<f64> = block
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| *i != in_idx[0])
                    .map(|(_, r)| r.scores.span_f1)
                    .collect();
                let out_mean = outside.iter().sum::<f64>() / outside.len() as f64;
                gaps.push(DomainGap {
                    m,
                    in_domain_span_f1: inside,
                    out_of_domain_span_f1: out_mean,
                    gap: inside - out_mean,
                });
            }
        }
    }
    Ok(CurveTable { rows, gaps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use DiscourseNode::Leaf;

    fn node(n: Nuclearity, r: &str, a: DiscourseNode, b: DiscourseNode) -> DiscourseNode {
        DiscourseNode::internal(n, r, a, b)
    }

    fn left_branching() -> DiscourseNode {
        node(
            Nuclearity::NS,
            "x",
            node(Nuclearity::NS, "x", Leaf(1), Leaf(2)),
            Leaf(3),
        )
    }

    fn right_branching() -> DiscourseNode {
        node(
            Nuclearity::NS,
            "x",
            Leaf(1),
            node(Nuclearity::NS, "x", Leaf(2), Leaf(3)),
        )
    }

    #[test]
    fn single_edu_self_score_is_perfect() {
        let s = score(&Leaf(1), &Leaf(1)).unwrap();
        assert_eq!((s.span_f1, s.nuc_f1, s.rel_f1), (1.0, 1.0, 1.0));
    }

    #[test]
    fn constituent_examples() {
        assert!(constituents(&Leaf(1)).is_empty());
        let two = node(Nuclearity::NS, "elaboration", Leaf(1), Leaf(2));
        assert_eq!(
            constituents(&two),
            vec![LabeledConstituent {
                start: 1,
                end: 2,
                nuclearity: Nuclearity::NS,
                relation: "elaboration".into()
            }]
        );
        let spans: Vec<(usize, usize)> = constituents(&left_branching())
            .iter()
            .map(|c| (c.start, c.end))
            .collect();
        assert_eq!(spans, vec![(1, 2), (1, 3)]);
    }

    #[test]
    fn identical_trees_score_one() {
        let s = score(&left_branching(), &left_branching()).unwrap();
        assert_eq!((s.span_f1, s.nuc_f1, s.rel_f1), (1.0, 1.0, 1.0));
    }

    #[test]
    fn left_vs_right_branching_is_half() {
        // gold {(1,2),(1,3)}, pred {(2,3),(1,3)}: one shared span of two.
        let s = score(&left_branching(), &right_branching()).unwrap();
        assert_eq!(s.span_p, 0.5);
        assert_eq!(s.span_r, 0.5);
        assert_eq!(s.span_f1, 0.5);
    }

    #[test]
    fn flipped_nuclearity() {
        let gold = left_branching();
        let flipped = node(
            Nuclearity::SN,
            "x",
            node(Nuclearity::SN, "x", Leaf(1), Leaf(2)),
            Leaf(3),
        );
        let s = score(&gold, &flipped).unwrap();
        assert_eq!(s.span_f1, 1.0);
        assert_eq!(s.nuc_f1, 0.0);
        assert_eq!(s.rel_f1, 1.0);
    }

    #[test]
    fn mismatched_documents() {
        let two = node(Nuclearity::NS, "x", Leaf(1), Leaf(2));
        assert!(matches!(
            score(&left_branching(), &two),
            Err(MetricsError::DocumentMismatch(_))
        ));
    }

    #[test]
    fn micro_aggregation_sums_counts() {
        let a = left_branching();
        let b = right_branching();
        let one = node(Nuclearity::NN, "x", Leaf(1), Leaf(2));
        let s = score_pairs([(&a, &b), (&one, &one)]).unwrap();
        assert_eq!(s.counts.gold, 3);
        assert_eq!(s.counts.span_matches, 2);
        assert!((s.span_f1 - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn csv_formatting() {
        let s = score(&left_branching(), &right_branching()).unwrap();
        assert_eq!(
            csv_line(2, "a", 7, &s),
            "2,a,7,0.5000,0.5000,0.5000,0.5000,0.5000,0.5000,0.5000,0.5000,0.5000"
        );
    }
}
