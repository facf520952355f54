//! Discourse trees, the bracketed treebank format, validation, and a
//! synthetic treebank generator.
//!
//! Bracketed grammar, one tree per record:
//!
//! ```text
//! tree := leaf | node
//! leaf := (leaf "<text>")
//! node := (<NN|NS|SN> <relation> tree tree)
//! ```
//!
//! Leaf text is tokenized by whitespace splitting and lowercasing. Inside the
//! quotes, `\"` and `\\` escape a quote and a backslash.

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TreebankError {
    #[error("malformed syntax{}: {message}", record_suffix(*.record))]
    MalformedSyntax {
        record: Option<usize>,
        message: String,
    },
    #[error("invalid tree{}: {message}", record_suffix(*.record))]
    InvalidTree {
        record: Option<usize>,
        message: String,
    },
    #[error("invalid synthesis config: {0}")]
    InvalidConfig(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn record_suffix(record: Option<usize>) -> String {
    match record {
        Some(r) => format!(" in record {r}"),
        None => String::new(),
    }
}

impl TreebankError {
    fn malformed(message: impl Into<String>) -> Self {
        TreebankError::MalformedSyntax {
            record: None,
            message: message.into(),
        }
    }

    fn invalid(message: impl Into<String>) -> Self {
        TreebankError::InvalidTree {
            record: None,
            message: message.into(),
        }
    }

    fn at_record(self, index: usize) -> Self {
        match self {
            TreebankError::MalformedSyntax { message, .. } => TreebankError::MalformedSyntax {
                record: Some(index),
                message,
            },
            TreebankError::InvalidTree { message, .. } => TreebankError::InvalidTree {
                record: Some(index),
                message,
            },
            other => other,
        }
    }
}

/// Nuclearity of an internal node: which children are nuclei.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Nuclearity {
    NN,
    NS,
    SN,
}

impl Nuclearity {
    pub const ALL: [Nuclearity; 3] = [Nuclearity::NN, Nuclearity::NS, Nuclearity::SN];

    pub fn as_str(self) -> &'static str {
        match self {
            Nuclearity::NN => "NN",
            Nuclearity::NS => "NS",
            Nuclearity::SN => "SN",
        }
    }

    /// Position in [`Nuclearity::ALL`].
    pub fn index(self) -> usize {
        match self {
            Nuclearity::NN => 0,
            Nuclearity::NS => 1,
            Nuclearity::SN => 2,
        }
    }
}

impl fmt::Display for Nuclearity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Nuclearity {
    type Err = TreebankError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "NN" => Ok(Nuclearity::NN),
            "NS" => Ok(Nuclearity::NS),
            "SN" => Ok(Nuclearity::SN),
            other => Err(TreebankError::invalid(format!(
                "unknown nuclearity tag `{other}`"
            ))),
        }
    }
}

/// Relation labels are restricted to `[a-z_-]+`.
pub fn is_valid_relation(label: &str) -> bool {
    !label.is_empty()
        && label
            .bytes()
            .all(|b| b.is_ascii_lowercase() || b == b'_' || b == b'-')
}

/// Whitespace split plus lowercasing.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace().map(|t| t.to_lowercase()).collect()
}

/// Elementary discourse unit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edu {
    pub id: usize,
    pub tokens: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub doc_id: String,
    pub edus: Vec<Edu>,
}

impl Document {
    /// Builds a document from raw EDU texts, assigning ids 1..n.
    pub fn from_texts<S: AsRef<str>>(doc_id: impl Into<String>, texts: &[S]) -> Self {
        let edus = texts
            .iter()
            .enumerate()
            .map(|(i, t)| Edu {
                id: i + 1,
                tokens: tokenize(t.as_ref()),
            })
            .collect();
        Document {
            doc_id: doc_id.into(),
            edus,
        }
    }

    pub fn n_edus(&self) -> usize {
        self.edus.len()
    }

    /// Tokens of the EDU with the given 1-based id.
    pub fn edu_tokens(&self, id: usize) -> &[String] {
        &self.edus[id - 1].tokens
    }
}

/// A binary discourse tree node. Leaves hold 1-based EDU ids.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum DiscourseNode {
    Leaf(usize),
    Internal {
        nuclearity: Nuclearity,
        relation: String,
        left: Box<DiscourseNode>,
        right: Box<DiscourseNode>,
    },
}

/// Whole trees are just their root node.
pub type DiscourseTree = DiscourseNode;

impl DiscourseNode {
    pub fn internal(
        nuclearity: Nuclearity,
        relation: impl Into<String>,
        left: DiscourseNode,
        right: DiscourseNode,
    ) -> Self {
        DiscourseNode::Internal {
            nuclearity,
            relation: relation.into(),
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, DiscourseNode::Leaf(_))
    }

    /// First and last EDU id covered, read from the leftmost and rightmost leaves.
    pub fn span(&self) -> (usize, usize) {
        (self.first_edu(), self.last_edu())
    }

    pub fn first_edu(&self) -> usize {
        let mut node = self;
        loop {
            match node {
                DiscourseNode::Leaf(id) => return *id,
                DiscourseNode::Internal { left, .. } => node = left,
            }
        }
    }

    pub fn last_edu(&self) -> usize {
        let mut node = self;
        loop {
            match node {
                DiscourseNode::Leaf(id) => return *id,
                DiscourseNode::Internal { right, .. } => node = right,
            }
        }
    }

    /// Leaf ids in left-to-right order.
    pub fn leaves(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves(&self, out: &mut Vec<usize>) {
        match self {
            DiscourseNode::Leaf(id) => out.push(*id),
            DiscourseNode::Internal { left, right, .. } => {
                left.collect_leaves(out);
                right.collect_leaves(out);
            }
        }
    }

    pub fn internal_count(&self) -> usize {
        match self {
            DiscourseNode::Leaf(_) => 0,
            DiscourseNode::Internal { left, right, .. } => {
                1 + left.internal_count() + right.internal_count()
            }
        }
    }

    /// Relation labels used anywhere in the subtree.
    pub fn relations(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_relations(&mut out);
        out
    }

    fn collect_relations(&self, out: &mut BTreeSet<String>) {
        if let DiscourseNode::Internal {
            relation,
            left,
            right,
            ..
        } = self
        {
            out.insert(relation.clone());
            left.collect_relations(out);
            right.collect_relations(out);
        }
    }
}

/// An RST-style treebank: documents paired with gold trees.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Treebank {
    pub name: String,
    pub domain_tag: String,
    pub relation_inventory: Vec<String>,
    pub entries: Vec<(Document, DiscourseTree)>,
}

impl Treebank {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Violations for every entry, prefixed by the 1-based record index,
    /// including relations missing from the inventory.
    pub fn validate(&self) -> Vec<String> {
        let inventory: BTreeSet<&str> =
            self.relation_inventory.iter().map(String::as_str).collect();
        let mut out = Vec::new();
        for (i, (doc, tree)) in self.entries.iter().enumerate() {
            for v in validate(doc, tree) {
                out.push(format!("record {}: {v}", i + 1));
            }
            for rel in tree.relations() {
                if !inventory.contains(rel.as_str()) {
                    out.push(format!(
                        "record {}: relation `{rel}` not in the relation inventory",
                        i + 1
                    ));
                }
            }
        }
        out
    }

    /// Sorted union of the declared inventory and every relation used.
    pub fn used_relations(&self) -> BTreeSet<String> {
        self.entries
            .iter()
            .flat_map(|(_, t)| t.relations())
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Bracketed format

#[derive(Debug, Clone, PartialEq)]
enum Sexp {
    Atom(String),
    Str(String),
    List(Vec<Sexp>),
}

struct Reader<'a> {
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
}

impl<'a> Reader<'a> {
    fn new(text: &'a str) -> Self {
        Reader {
            chars: text.char_indices().peekable(),
        }
    }

    fn skip_ws(&mut self) {
        while let Some(&(_, c)) = self.chars.peek() {
            if c.is_whitespace() {
                self.chars.next();
            } else {
                break;
            }
        }
    }

    fn read(&mut self) -> Result<Sexp, TreebankError> {
        self.skip_ws();
        match self.chars.next() {
            None => Err(TreebankError::malformed("unexpected end of input")),
            Some((pos, ')')) => Err(TreebankError::malformed(format!(
                "unbalanced `)` at offset {pos}"
            ))),
            Some((_, '(')) => {
                let mut items = Vec::new();
                loop {
                    self.skip_ws();
                    match self.chars.peek() {
                        None => {
                            return Err(TreebankError::malformed("unbalanced `(`: missing `)`"))
                        }
                        Some(&(_, ')')) => {
                            self.chars.next();
                            return Ok(Sexp::List(items));
                        }
                        Some(_) => items.push(self.read()?),
                    }
                }
            }
            Some((pos, '"')) => {
                let mut s = String::new();
                loop {
                    match self.chars.next() {
                        None => {
                            return Err(TreebankError::malformed(format!(
                                "unterminated string starting at offset {pos}"
                            )))
                        }
                        Some((_, '"')) => return Ok(Sexp::Str(s)),
                        Some((_, '\\')) => match self.chars.next() {
                            Some((_, c @ ('"' | '\\'))) => s.push(c),
                            _ => {
                                return Err(TreebankError::malformed(format!(
                                    "bad escape in string starting at offset {pos}"
                                )))
                            }
                        },
                        Some((_, c)) => s.push(c),
                    }
                }
            }
            Some((_, c)) => {
                let mut s = String::from(c);
                while let Some(&(_, c)) = self.chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == '"' {
                        break;
                    }
                    s.push(c);
                    self.chars.next();
                }
                Ok(Sexp::Atom(s))
            }
        }
    }
}

fn build_node(sexp: &Sexp, edus: &mut Vec<Edu>) -> Result<DiscourseNode, TreebankError> {
    let items = match sexp {
        Sexp::List(items) => items,
        Sexp::Atom(a) => {
            return Err(TreebankError::malformed(format!(
                "expected a bracketed tree, found atom `{a}`"
            )))
        }
        Sexp::Str(_) => {
            return Err(TreebankError::malformed(
                "expected a bracketed tree, found a string",
            ))
        }
    };
    let head = match items.first() {
        Some(Sexp::Atom(a)) => a.as_str(),
        Some(_) => return Err(TreebankError::malformed("tree head must be a keyword")),
        None => return Err(TreebankError::malformed("empty list")),
    };
    if head == "leaf" {
        let text = match &items[1..] {
            [Sexp::Str(t)] => t,
            _ => {
                return Err(TreebankError::malformed(
                    "leaf takes exactly one quoted text",
                ))
            }
        };
        let tokens = tokenize(text);
        if tokens.is_empty() {
            return Err(TreebankError::invalid(format!(
                "leaf {} has empty text",
                edus.len() + 1
            )));
        }
        let id = edus.len() + 1;
        edus.push(Edu { id, tokens });
        return Ok(DiscourseNode::Leaf(id));
    }
    let nuclearity: Nuclearity = head.parse()?;
    let relation = match items.get(1) {
        Some(Sexp::Atom(r)) if is_valid_relation(r) => r.clone(),
        Some(Sexp::Atom(r)) => {
            return Err(TreebankError::malformed(format!(
                "bad relation keyword `{r}` (expected [a-z_-]+)"
            )))
        }
        _ => {
            return Err(TreebankError::malformed(format!(
                "{nuclearity} node is missing its relation"
            )))
        }
    };
    let children = &items[2..];
    if children.len() != 2 {
        return Err(TreebankError::invalid(format!(
            "{nuclearity} {relation} node has {} children, expected 2",
            children.len()
        )));
    }
    let left = build_node(&children[0], edus)?;
    let right = build_node(&children[1], edus)?;
    Ok(DiscourseNode::internal(nuclearity, relation, left, right))
}

/// Parses one bracketed tree into a document (EDU ids 1..n in leaf order)
/// and its tree. The document id is left empty.
pub fn parse_bracketed(text: &str) -> Result<(Document, DiscourseTree), TreebankError> {
    let mut reader = Reader::new(text);
    let sexp = reader.read()?;
    reader.skip_ws();
    if let Some((pos, _)) = reader.chars.next() {
        return Err(TreebankError::malformed(format!(
            "trailing input at offset {pos}"
        )));
    }
    let mut edus = Vec::new();
    let tree = build_node(&sexp, &mut edus)?;
    Ok((
        Document {
            doc_id: String::new(),
            edus,
        },
        tree,
    ))
}

fn write_quoted(out: &mut String, tokens: &[String]) {
    out.push('"');
    for (i, tok) in tokens.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        for c in tok.chars() {
            if c == '"' || c == '\\' {
                out.push('\\');
            }
            out.push(c);
        }
    }
    out.push('"');
}

fn write_node(out: &mut String, doc: &Document, node: &DiscourseNode) {
    match node {
        DiscourseNode::Leaf(id) => {
            out.push_str("(leaf ");
            write_quoted(out, doc.edu_tokens(*id));
            out.push(')');
        }
        DiscourseNode::Internal {
            nuclearity,
            relation,
            left,
            right,
        } => {
            out.push('(');
            out.push_str(nuclearity.as_str());
            out.push(' ');
            out.push_str(relation);
            out.push(' ');
            write_node(out, doc, left);
            out.push(' ');
            write_node(out, doc, right);
            out.push(')');
        }
    }
}

/// Canonical single-line rendering of a validated tree.
pub fn serialize_bracketed(doc: &Document, tree: &DiscourseTree) -> String {
    let mut out = String::new();
    write_node(&mut out, doc, tree);
    out
}

// ---------------------------------------------------------------------------
// Validation

/// Lists every invariant violation of `tree` against `doc`; empty when valid.
/// Node paths read `root`, then `.L` / `.R` per step down.
pub fn validate(doc: &Document, tree: &DiscourseTree) -> Vec<String> {
    let mut out = Vec::new();
    let n = doc.n_edus();
    if n == 0 {
        out.push("document has no EDUs".to_string());
    }
    for (i, edu) in doc.edus.iter().enumerate() {
        if edu.id != i + 1 {
            out.push(format!(
                "document EDU at position {} has id {}",
                i + 1,
                edu.id
            ));
        }
        if edu.tokens.is_empty() {
            out.push(format!("document EDU {} has no tokens", edu.id));
        }
    }
    let mut leaves = Vec::new();
    walk_validate(tree, "root".to_string(), &mut leaves, &mut out);
    let mut prev = 0usize;
    for (path, id) in &leaves {
        if *id == 0 || *id > n {
            out.push(format!(
                "{path}: coverage: leaf references EDU {id} but the document has {n}"
            ));
        } else if *id <= prev {
            out.push(format!(
                "{path}: ordering: leaf EDU {id} follows EDU {prev}"
            ));
        }
        prev = prev.max(*id);
    }
    if leaves.len() != n {
        out.push(format!(
            "root: coverage: tree has {} leaves but the document has {n} EDUs",
            leaves.len()
        ));
    }
    out
}

fn walk_validate(
    node: &DiscourseNode,
    path: String,
    leaves: &mut Vec<(String, usize)>,
    out: &mut Vec<String>,
) {
    match node {
        DiscourseNode::Leaf(id) => leaves.push((path, *id)),
        DiscourseNode::Internal {
            relation,
            left,
            right,
            ..
        } => {
            if !is_valid_relation(relation) {
                out.push(format!("{path}: malformed relation label `{relation}`"));
            }
            walk_validate(left, format!("{path}.L"), leaves, out);
            walk_validate(right, format!("{path}.R"), leaves, out);
        }
    }
}

// ---------------------------------------------------------------------------
// Treebank files

/// Parses treebank file contents. Blocks are separated by blank lines.
/// An optional leading header block may hold `#treebank <name> <domain>` and
/// `#relations <label>...` lines; each further block is a `#doc <id> <domain>`
/// line followed by one bracketed tree.
pub fn parse_treebank(text: &str, default_name: &str) -> Result<Treebank, TreebankError> {
    let mut name = default_name.to_string();
    let mut domain_tag: Option<String> = None;
    let mut declared: BTreeSet<String> = BTreeSet::new();
    let mut entries = Vec::new();

    let mut blocks: Vec<Vec<&str>> = Vec::new();
    let mut current: Vec<&str> = Vec::new();
    for line in text.lines() {
        if line.trim().is_empty() {
            if !current.is_empty() {
                blocks.push(std::mem::take(&mut current));
            }
        } else {
            current.push(line);
        }
    }
    if !current.is_empty() {
        blocks.push(current);
    }

    let mut record = 0usize;
    for (bi, block) in blocks.iter().enumerate() {
        let first = block[0].trim();
        if bi == 0 && (first.starts_with("#treebank") || first.starts_with("#relations")) {
            for line in block {
                let mut parts = line.split_whitespace();
                match parts.next() {
                    Some("#treebank") => {
                        if let Some(n) = parts.next() {
                            name = n.to_string();
                        }
                        domain_tag = parts.next().map(str::to_string);
                    }
                    Some("#relations") => {
                        for rel in parts {
                            if !is_valid_relation(rel) {
                                return Err(TreebankError::malformed(format!(
                                    "bad relation `{rel}` in header"
                                )));
                            }
                            declared.insert(rel.to_string());
                        }
                    }
                    _ => {
                        return Err(TreebankError::malformed(format!(
                            "unexpected header line `{line}`"
                        )))
                    }
                }
            }
            continue;
        }
        record += 1;
        let (doc, tree, tag) = parse_record(block).map_err(|e| e.at_record(record))?;
        if domain_tag.is_none() {
            domain_tag = Some(tag);
        }
        entries.push((doc, tree));
    }

    let mut inventory = declared;
    for (idx, (doc, tree)) in entries.iter().enumerate() {
        if let Some(v) = validate(doc, tree).first() {
            return Err(TreebankError::InvalidTree {
                record: Some(idx + 1),
                message: v.clone(),
            });
        }
        inventory.extend(tree.relations());
    }
    Ok(Treebank {
        name,
        domain_tag: domain_tag.unwrap_or_else(|| "unknown".to_string()),
        relation_inventory: inventory.into_iter().collect(),
        entries,
    })
}

fn parse_record(block: &[&str]) -> Result<(Document, DiscourseTree, String), TreebankError> {
    let mut header = block[0].split_whitespace();
    if header.next() != Some("#doc") {
        return Err(TreebankError::malformed(format!(
            "expected `#doc <doc_id> <domain_tag>`, found `{}`",
            block[0]
        )));
    }
    let (doc_id, tag) = match (header.next(), header.next(), header.next()) {
        (Some(id), Some(tag), None) => (id.to_string(), tag.to_string()),
        _ => {
            return Err(TreebankError::malformed(
                "`#doc` line needs exactly a doc id and a domain tag",
            ))
        }
    };
    let body = block[1..].join("\n");
    let (mut doc, tree) = parse_bracketed(&body)?;
    doc.doc_id = doc_id;
    Ok((doc, tree, tag))
}

/// Renders a treebank in the file format accepted by [`parse_treebank`].
pub fn render_treebank(tb: &Treebank) -> String {
    let mut out = format!("#treebank {} {}\n", tb.name, tb.domain_tag);
    out.push_str("#relations");
    for rel in &tb.relation_inventory {
        out.push(' ');
        out.push_str(rel);
    }
    out.push('\n');
    for (doc, tree) in &tb.entries {
        out.push('\n');
        out.push_str(&format!("#doc {} {}\n", doc.doc_id, tb.domain_tag));
        out.push_str(&serialize_bracketed(doc, tree));
        out.push('\n');
    }
    out
}

pub fn load_treebank(path: &Path) -> Result<Treebank, TreebankError> {
    let text = fs::read_to_string(path).map_err(|source| TreebankError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("treebank");
    parse_treebank(&text, stem)
}

pub fn save_treebank(tb: &Treebank, path: &Path) -> Result<(), TreebankError> {
    fs::write(path, render_treebank(tb)).map_err(|source| TreebankError::Io {
        path: path.display().to_string(),
        source,
    })
}

// ---------------------------------------------------------------------------
// Synthetic generation

/// A relation label with the nuclearity the generator always gives it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationSpec {
    pub label: String,
    pub nuclearity: Nuclearity,
}

impl RelationSpec {
    pub fn new(label: &str, nuclearity: Nuclearity) -> Self {
        RelationSpec {
            label: label.to_string(),
            nuclearity,
        }
    }
}

/// Configuration of the synthetic treebank generator.
///
/// Each relation owns `markers_per_relation` marker tokens; one of them is
/// injected into the head EDU of the satellite (or second nucleus) of every
/// node carrying that relation. Structure is coupled to the surface through
/// two cue families: every EDU after the first opens with `b<d>`, the depth
/// of the node splitting it from its left neighbour, and the head EDU of a
/// right child of a node at depth `d` ends with `h<d>`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub n_docs: usize,
    pub min_edus: usize,
    pub max_edus: usize,
    pub min_filler_tokens: usize,
    pub max_filler_tokens: usize,
    pub shared_vocab: usize,
    pub domain_vocab: usize,
    pub domain_tag: String,
    pub shared_relations: Vec<RelationSpec>,
    pub domain_relations: Vec<RelationSpec>,
    /// Declared in the inventory without being generated.
    pub extra_relations: Vec<String>,
    pub p_domain: f64,
    pub markers_per_relation: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_docs: 200,
            min_edus: 2,
            max_edus: 12,
            min_filler_tokens: 3,
            max_filler_tokens: 6,
            shared_vocab: 200,
            domain_vocab: 100,
            domain_tag: "a".to_string(),
            shared_relations: default_shared_relations(),
            domain_relations: default_domain_relations("a"),
            extra_relations: default_domain_relations("b")
                .into_iter()
                .map(|r| r.label)
                .collect(),
            p_domain: 0.3,
            markers_per_relation: 2,
        }
    }
}

pub fn default_shared_relations() -> Vec<RelationSpec> {
    vec![
        RelationSpec::new("elaboration", Nuclearity::NS),
        RelationSpec::new("cause", Nuclearity::NS),
        RelationSpec::new("background", Nuclearity::SN),
        RelationSpec::new("contrast", Nuclearity::NN),
    ]
}

/// Two domain-specific relations for the default domains `a` and `b`;
/// other tags get labels derived from the tag.
pub fn default_domain_relations(domain_tag: &str) -> Vec<RelationSpec> {
    match domain_tag {
        "a" => vec![
            RelationSpec::new("evaluation", Nuclearity::NS),
            RelationSpec::new("condition", Nuclearity::SN),
        ],
        "b" => vec![
            RelationSpec::new("manner", Nuclearity::NS),
            RelationSpec::new("sequence", Nuclearity::NN),
        ],
        other => {
            let stem: String = other
                .to_lowercase()
                .chars()
                .filter(|c| c.is_ascii_lowercase() || *c == '_' || *c == '-')
                .collect();
            vec![
                RelationSpec::new(&format!("{stem}-specific-ns"), Nuclearity::NS),
                RelationSpec::new(&format!("{stem}-specific-sn"), Nuclearity::SN),
            ]
        }
    }
}

impl SynthConfig {
    /// Default configuration for a domain tag; the inventory declares the
    /// default `a` and `b` domain relations so both domains share it.
    pub fn for_domain(domain_tag: &str) -> Self {
        let domain_relations = default_domain_relations(domain_tag);
        let mut extra: BTreeSet<String> = ["a", "b"]
            .iter()
            .flat_map(|t| default_domain_relations(t))
            .map(|r| r.label)
            .collect();
        for r in &domain_relations {
            extra.remove(&r.label);
        }
        SynthConfig {
            domain_tag: domain_tag.to_string(),
            domain_relations,
            extra_relations: extra.into_iter().collect(),
            ..SynthConfig::default()
        }
    }

    fn check(&self) -> Result<(), TreebankError> {
        let bad = |m: &str| Err(TreebankError::InvalidConfig(m.to_string()));
        if self.shared_relations.is_empty() {
            return bad("shared relation set is empty");
        }
        if self.p_domain > 0.0 && self.domain_relations.is_empty() {
            return bad("domain relation set is empty while p_domain > 0");
        }
        if self.min_edus < 1 || self.max_edus < self.min_edus {
            return bad("EDU range must satisfy 1 <= min_edus <= max_edus");
        }
        if self.max_filler_tokens < self.min_filler_tokens {
            return bad("filler token range is inverted");
        }
        if self.min_filler_tokens == 0 {
            return bad("min_filler_tokens must be at least 1");
        }
        if self.shared_vocab == 0 {
            return bad("shared_vocab must be positive");
        }
        if self.p_domain > 0.0 && self.domain_vocab == 0 {
            return bad("domain_vocab must be positive while p_domain > 0");
        }
        if !(0.0..=1.0).contains(&self.p_domain) {
            return bad("p_domain must lie in [0, 1]");
        }
        if self.markers_per_relation == 0 {
            return bad("markers_per_relation must be positive");
        }
        if self.domain_tag.is_empty() || self.domain_tag.chars().any(char::is_whitespace) {
            return bad("domain_tag must be a non-empty word");
        }
        for r in self
            .shared_relations
            .iter()
            .chain(&self.domain_relations)
            .map(|r| &r.label)
            .chain(&self.extra_relations)
        {
            if !is_valid_relation(r) {
                return Err(TreebankError::InvalidConfig(format!(
                    "relation `{r}` does not match [a-z_-]+"
                )));
            }
        }
        Ok(())
    }

    fn lexicon_stem(&self) -> String {
        let stem: String = self
            .domain_tag
            .to_lowercase()
            .chars()
            .filter(|c| c.is_alphanumeric())
            .collect();
        if stem.is_empty() {
            "d".to_string()
        } else {
            stem
        }
    }
}

/// Per-EDU annotations gathered while growing a tree.
#[derive(Default, Clone)]
struct EduCues {
    boundary_depth: Option<usize>,
    marker: Option<(usize, usize)>,
    head_depths: Vec<usize>,
}

struct Grower<'a> {
    cfg: &'a SynthConfig,
    rng: &'a mut ChaCha8Rng,
    cues: Vec<EduCues>,
}

impl Grower<'_> {
    /// Grows a tree over EDUs `lo..=hi`; returns the node and its head EDU.
    fn grow(&mut self, lo: usize, hi: usize, depth: usize) -> (DiscourseNode, usize) {
        if lo == hi {
            return (DiscourseNode::Leaf(lo), lo);
        }
        let split = self.rng.gen_range(lo..hi);
        let fires = self.rng.gen::<f64>() < self.cfg.p_domain;
        let (rel_index, spec) = if fires {
            let i = self.rng.gen_range(0..self.cfg.domain_relations.len());
            (
                self.cfg.shared_relations.len() + i,
                &self.cfg.domain_relations[i],
            )
        } else {
            let i = self.rng.gen_range(0..self.cfg.shared_relations.len());
            (i, &self.cfg.shared_relations[i])
        };
        let nuclearity = spec.nuclearity;
        let relation = spec.label.clone();
        let marker = self.rng.gen_range(0..self.cfg.markers_per_relation);

        let (left, left_head) = self.grow(lo, split, depth + 1);
        let (right, right_head) = self.grow(split + 1, hi, depth + 1);

        self.cues[split + 1].boundary_depth = Some(depth);
        self.cues[right_head].head_depths.push(depth);
        let (head, satellite_head) = match nuclearity {
            Nuclearity::NS | Nuclearity::NN => (left_head, right_head),
            Nuclearity::SN => (right_head, left_head),
        };
        self.cues[satellite_head].marker = Some((rel_index, marker));
        (
            DiscourseNode::internal(nuclearity, relation, left, right),
            head,
        )
    }
}

/// Generates a treebank deterministically from `(cfg, seed)`.
pub fn synthesize_treebank(cfg: &SynthConfig, seed: u64) -> Result<Treebank, TreebankError> {
    cfg.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let stem = cfg.lexicon_stem();
    let relation_labels: Vec<&str> = cfg
        .shared_relations
        .iter()
        .chain(&cfg.domain_relations)
        .map(|r| r.label.as_str())
        .collect();
    let mut entries = Vec::with_capacity(cfg.n_docs);
    for d in 0..cfg.n_docs {
        let n = rng.gen_range(cfg.min_edus..=cfg.max_edus);
        let mut grower = Grower {
            cfg,
            rng: &mut rng,
            cues: vec![EduCues::default(); n + 1],
        };
        let (tree, _) = grower.grow(1, n, 0);
        let cues = grower.cues;
        let mut edus = Vec::with_capacity(n);
        for (id, cue) in cues.iter().enumerate().skip(1) {
            let mut tokens = Vec::new();
            if let Some(b) = cue.boundary_depth {
                tokens.push(format!("b{b}"));
            }
            let fillers = rng.gen_range(cfg.min_filler_tokens..=cfg.max_filler_tokens);
            for _ in 0..fillers {
                let domain_word = rng.gen::<f64>() < cfg.p_domain;
                if domain_word {
                    tokens.push(format!("{stem}{}", rng.gen_range(0..cfg.domain_vocab)));
                } else {
                    tokens.push(format!("w{}", rng.gen_range(0..cfg.shared_vocab)));
                }
            }
            if let Some((rel, k)) = cue.marker {
                tokens.push(format!("m_{}_{k}", relation_labels[rel]));
            }
            let mut heads = cue.head_depths.clone();
            heads.sort_unstable();
            tokens.extend(heads.into_iter().map(|h| format!("h{h}")));
            edus.push(Edu { id, tokens });
        }
        let doc = Document {
            doc_id: format!("{}-{:04}", stem, d + 1),
            edus,
        };
        entries.push((doc, tree));
    }
    let inventory: BTreeSet<String> = relation_labels
        .iter()
        .map(|s| s.to_string())
        .chain(cfg.extra_relations.iter().cloned())
        .collect();
    Ok(Treebank {
        name: format!("{}-synth", cfg.domain_tag),
        domain_tag: cfg.domain_tag.clone(),
        relation_inventory: inventory.into_iter().collect(),
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn leaf(id: usize) -> DiscourseNode {
        DiscourseNode::Leaf(id)
    }

    #[test]
    fn parses_two_edu_node() {
        let (doc, tree) =
            parse_bracketed(r#"(NS elaboration (leaf "it rained") (leaf "so we left"))"#).unwrap();
        assert_eq!(doc.n_edus(), 2);
        assert_eq!(doc.edus[0].tokens, vec!["it", "rained"]);
        assert_eq!(doc.edus[1].id, 2);
        assert_eq!(
            tree,
            DiscourseNode::internal(Nuclearity::NS, "elaboration", leaf(1), leaf(2))
        );
    }

    #[test]
    fn parses_single_leaf() {
        let (doc, tree) = parse_bracketed(r#"(leaf "Hello World")"#).unwrap();
        assert_eq!(doc.edus[0].tokens, vec!["hello", "world"]);
        assert_eq!(tree, leaf(1));
    }

    #[test]
    fn unary_node_is_invalid_tree() {
        let err = parse_bracketed(r#"(NS elaboration (leaf "a"))"#).unwrap_err();
        assert!(matches!(err, TreebankError::InvalidTree { .. }), "{err}");
    }

    #[test]
    fn syntax_errors() {
        for bad in [
            r#"(NS elaboration (leaf "a") (leaf "b")"#,
            r#"(NS elaboration (leaf "a") (leaf "b")))"#,
            r#"(NS Elaboration (leaf "a") (leaf "b"))"#,
            r#"(leaf "a" "b")"#,
            r#"(leaf "unterminated)"#,
            r#"()"#,
        ] {
            let err = parse_bracketed(bad).unwrap_err();
            assert!(
                matches!(err, TreebankError::MalformedSyntax { .. }),
                "{bad}: {err}"
            );
        }
        let err = parse_bracketed(r#"(XY rel (leaf "a") (leaf "b"))"#).unwrap_err();
        assert!(matches!(err, TreebankError::InvalidTree { .. }));
    }

    #[test]
    fn serializes_canonically() {
        let doc = Document::from_texts("d", &["a b", "c", "d e"]);
        let tree = DiscourseNode::internal(
            Nuclearity::NS,
            "rel",
            leaf(1),
            DiscourseNode::internal(Nuclearity::NS, "rel", leaf(2), leaf(3)),
        );
        assert_eq!(
            serialize_bracketed(&doc, &tree),
            r#"(NS rel (leaf "a b") (NS rel (leaf "c") (leaf "d e")))"#
        );
        assert_eq!(serialize_bracketed(&doc, &leaf(1)), r#"(leaf "a b")"#);
    }

    #[test]
    fn escapes_round_trip() {
        let doc = Document::from_texts("", &[r#"say "hi" \o/"#]);
        let text = serialize_bracketed(&doc, &leaf(1));
        let (doc2, tree2) = parse_bracketed(&text).unwrap();
        assert_eq!(doc2, doc);
        assert_eq!(tree2, leaf(1));
    }

    #[test]
    fn validate_examples() {
        let doc2 = Document::from_texts("d", &["a", "b"]);
        let ok = DiscourseNode::internal(Nuclearity::NS, "r", leaf(1), leaf(2));
        assert!(validate(&doc2, &ok).is_empty());

        let doc3 = Document::from_texts("d", &["a", "b", "c"]);
        let misordered = DiscourseNode::internal(
            Nuclearity::NS,
            "r",
            leaf(1),
            DiscourseNode::internal(Nuclearity::NS, "r", leaf(3), leaf(2)),
        );
        let v = validate(&doc3, &misordered);
        assert_eq!(v.len(), 1, "{v:?}");
        assert!(v[0].contains("ordering") && v[0].starts_with("root.R.R"));

        let out_of_range = DiscourseNode::internal(
            Nuclearity::NS,
            "r",
            leaf(1),
            DiscourseNode::internal(Nuclearity::NS, "r", leaf(2), leaf(5)),
        );
        let v = validate(&doc3, &out_of_range);
        assert_eq!(v.len(), 1, "{v:?}");
        assert!(v[0].contains("coverage"));
    }

    #[test]
    fn validate_flags_missing_leaves() {
        let doc3 = Document::from_texts("d", &["a", "b", "c"]);
        let short = DiscourseNode::internal(Nuclearity::NS, "r", leaf(1), leaf(2));
        let v = validate(&doc3, &short);
        assert_eq!(v.len(), 1);
        assert!(v[0].contains("coverage"));
    }

    #[test]
    fn treebank_file_edge_cases() {
        let tb = parse_treebank("", "x").unwrap();
        assert!(tb.is_empty());

        let one = "#doc d1 news\n(NS elaboration (leaf \"a\")\n  (leaf \"b\"))\n";
        let tb = parse_treebank(one, "x").unwrap();
        assert_eq!(tb.len(), 1);
        assert_eq!(tb.domain_tag, "news");
        assert_eq!(tb.relation_inventory, vec!["elaboration"]);

        let two = format!("{one}\n#doc d2 news\n(NS elaboration (leaf \"a\")\n");
        match parse_treebank(&two, "x").unwrap_err() {
            TreebankError::MalformedSyntax { record, .. } => assert_eq!(record, Some(2)),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn header_declares_inventory() {
        let text = "#treebank t dom\n#relations zeta alpha\n\n#doc d1 dom\n(NN beta (leaf \"a\") (leaf \"b\"))\n";
        let tb = parse_treebank(text, "x").unwrap();
        assert_eq!(tb.name, "t");
        assert_eq!(tb.relation_inventory, vec!["alpha", "beta", "zeta"]);
        let again = parse_treebank(&render_treebank(&tb), "y").unwrap();
        assert_eq!(again, tb);
    }

    #[test]
    fn synth_is_deterministic_and_valid() {
        let cfg = SynthConfig {
            n_docs: 100,
            ..SynthConfig::default()
        };
        let a = synthesize_treebank(&cfg, 7).unwrap();
        let b = synthesize_treebank(&cfg, 7).unwrap();
        assert_eq!(render_treebank(&a), render_treebank(&b));
        assert!(a.validate().is_empty(), "{:?}", a.validate());
        for (doc, tree) in &a.entries {
            assert!((2..=12).contains(&doc.n_edus()));
            assert_eq!(tree.internal_count(), doc.n_edus() - 1);
        }
        assert_eq!(a.relation_inventory.len(), 8);
    }

    #[test]
    fn p_domain_zero_ignores_domain() {
        let base = SynthConfig {
            n_docs: 30,
            p_domain: 0.0,
            ..SynthConfig::default()
        };
        let a = synthesize_treebank(
            &SynthConfig {
                domain_tag: "a".into(),
                ..base.clone()
            },
            3,
        )
        .unwrap();
        let b = synthesize_treebank(
            &SynthConfig {
                domain_tag: "b".into(),
                ..base
            },
            3,
        )
        .unwrap();
        for ((da, ta), (db, tb)) in a.entries.iter().zip(&b.entries) {
            assert_eq!(ta, tb);
            assert_eq!(da.edus, db.edus);
        }
    }

    #[test]
    fn synth_rejects_bad_config() {
        let empty = SynthConfig {
            shared_relations: vec![],
            ..SynthConfig::default()
        };
        assert!(matches!(
            synthesize_treebank(&empty, 1),
            Err(TreebankError::InvalidConfig(_))
        ));
        let no_edus = SynthConfig {
            min_edus: 0,
            ..SynthConfig::default()
        };
        assert!(synthesize_treebank(&no_edus, 1).is_err());
    }
}
