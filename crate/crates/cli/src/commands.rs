//! The six harness commands. Each writes its artifacts plus a manifest and
//! returns a summary for the caller to print.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rstboost::boosting::{self, split_dev, BoostConfig, BoostedEnsemble, TrainReport};
use rstboost::encoder::EncoderConfig;
use rstboost::metrics::{self, csv_line, CurveTable, ParsevalScores, CURVE_CSV_HEADER};
use rstboost::transition::render_trace;
use rstboost::treebank::{
    load_treebank, parse_treebank, render_treebank, synthesize_treebank, Document, SynthConfig,
    Treebank,
};
use serde::{Deserialize, Serialize};

use crate::error::HarnessError;
use crate::manifest::{manifest_path_for, RunManifest};

fn write_file(path: &Path, contents: &str) -> Result<(), HarnessError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)
            .map_err(|e| HarnessError::Data(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, contents).map_err(|e| HarnessError::Data(format!("{}: {e}", path.display())))
}

fn to_value<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("config types serialize")
}

fn load_model(path: &Path) -> Result<BoostedEnsemble, HarnessError> {
    Ok(BoostedEnsemble::load(path)?)
}

// ---------------------------------------------------------------------------
// synth

/// What `synth` generates. The first domain is the training domain and gets
/// both a train and a test file; every other domain gets a test file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthPlan {
    pub train_docs: usize,
    pub test_docs: usize,
    pub domains: Vec<SynthConfig>,
}

impl Default for SynthPlan {
    fn default() -> Self {
        SynthPlan {
            train_docs: 200,
            test_docs: 100,
            domains: vec![SynthConfig::for_domain("a"), SynthConfig::for_domain("b")],
        }
    }
}

impl SynthPlan {
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.domains.is_empty() {
            return Err(HarnessError::Usage("synth plan lists no domains".into()));
        }
        if self.train_docs == 0 || self.test_docs == 0 {
            return Err(HarnessError::Usage(
                "train_docs and test_docs must be positive".into(),
            ));
        }
        let mut tags: Vec<&str> = self.domains.iter().map(|d| d.domain_tag.as_str()).collect();
        tags.sort_unstable();
        tags.dedup();
        if tags.len() != self.domains.len() {
            return Err(HarnessError::Usage("domain tags must be distinct".into()));
        }
        Ok(())
    }
}

pub fn read_synth_plan(path: &Path) -> Result<SynthPlan, HarnessError> {
    let text = fs::read_to_string(path)
        .map_err(|e| HarnessError::Usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| HarnessError::Usage(format!("{}: {e}", path.display())))
}

/// Seed for the i-th domain of a plan.
fn domain_seed(seed: u64, i: usize) -> u64 {
    seed.wrapping_add(i as u64)
}

fn renamed(mut tb: Treebank, name: String) -> Treebank {
    tb.name = name;
    tb
}

/// Writes `domain_<tag>_train.trees` / `domain_<tag>_test.trees` into `out_dir`.
pub fn cmd_synth(
    plan: &SynthPlan,
    plan_path: Option<&Path>,
    seed: u64,
    out_dir: &Path,
) -> Result<Vec<PathBuf>, HarnessError> {
    let start = Instant::now();
    plan.validate()?;
    let mut manifest = RunManifest::new("synth", to_value(plan), vec![seed]);
    if let Some(p) = plan_path {
        manifest.add_input(p)?;
    }

    let mut outputs = Vec::new();
    for (i, domain) in plan.domains.iter().enumerate() {
        let tag = &domain.domain_tag;
        let s = domain_seed(seed, i);
        if i == 0 {
            let cfg = SynthConfig {
                n_docs: plan.train_docs + plan.test_docs,
                ..domain.clone()
            };
            let mut all = synthesize_treebank(&cfg, s)?;
            let test_entries = all.entries.split_off(plan.train_docs);
            let test = Treebank {
                entries: test_entries,
                ..renamed(all.clone(), format!("{tag}-test"))
            };
            let train = renamed(all, format!("{tag}-train"));
            outputs.push((out_dir.join(format!("domain_{tag}_train.trees")), train));
            outputs.push((out_dir.join(format!("domain_{tag}_test.trees")), test));
        } else {
            let cfg = SynthConfig {
                n_docs: plan.test_docs,
                ..domain.clone()
            };
            let test = renamed(synthesize_treebank(&cfg, s)?, format!("{tag}-test"));
            outputs.push((out_dir.join(format!("domain_{tag}_test.trees")), test));
        }
    }
    let mut paths = Vec::new();
    for (path, tb) in &outputs {
        write_file(path, &render_treebank(tb))?;
        manifest.add_output(path);
        paths.push(path.clone());
    }
    manifest.time("total", start.elapsed().as_secs_f64());
    manifest.write(&out_dir.join("synth.manifest.json"))?;
    Ok(paths)
}

// ---------------------------------------------------------------------------
// train

#[derive(Debug, Clone)]
pub struct TrainOptions {
    pub treebank: PathBuf,
    pub out: PathBuf,
    /// Defaults to `<out stem>.report.json`.
    pub report: Option<PathBuf>,
    pub boost: BoostConfig,
    pub encoder: EncoderConfig,
}

#[derive(Serialize)]
struct TrainManifestConfig<'a> {
    boost: &'a BoostConfig,
    encoder: &'a EncoderConfig,
}

pub fn report_path_for(model: &Path) -> PathBuf {
    model.with_extension("report.json")
}

pub fn cmd_train(opts: &TrainOptions) -> Result<TrainReport, HarnessError> {
    let start = Instant::now();
    opts.boost.validate()?;
    opts.encoder.validate().map_err(HarnessError::Usage)?;
    let tb = load_treebank(&opts.treebank)?;
    let loaded = start.elapsed().as_secs_f64();
    let (ensemble, report) = boosting::train(&tb, &opts.boost, &opts.encoder)?;
    let trained = start.elapsed().as_secs_f64();

    let report_path = opts
        .report
        .clone()
        .unwrap_or_else(|| report_path_for(&opts.out));
    write_file(&opts.out, &ensemble.to_json()?)?;
    write_file(
        &report_path,
        &serde_json::to_string_pretty(&report)
            .map_err(|e| HarnessError::Internal(e.to_string()))?,
    )?;

    let config = TrainManifestConfig {
        boost: &opts.boost,
        encoder: &opts.encoder,
    };
    let seeds = (1..=opts.boost.n_steps)
        .map(|k| opts.boost.step_seed(k))
        .collect::<Vec<_>>();
    let mut manifest = RunManifest::new(
        "train",
        to_value(&config),
        [vec![opts.boost.seed], seeds].concat(),
    );
    manifest.add_input(&opts.treebank)?;
    manifest.add_output(&opts.out);
    manifest.add_output(&report_path);
    manifest.time("load", loaded);
    manifest.time("train", trained - loaded);
    for s in &report.steps {
        manifest.time(&format!("step_{}", s.step), s.seconds);
    }
    manifest.time("total", start.elapsed().as_secs_f64());
    manifest.write(&manifest_path_for(&opts.out))?;
    Ok(report)
}

// ---------------------------------------------------------------------------
// parse

/// Raw-EDU text: one EDU per line, blank lines between documents.
pub fn parse_raw_edus(text: &str) -> Vec<Document> {
    let mut docs = Vec::new();
    let mut current: Vec<&str> = Vec::new();
    let flush = |current: &mut Vec<&str>, docs: &mut Vec<Document>| {
        if !current.is_empty() {
            let id = format!("doc-{:04}", docs.len() + 1);
            docs.push(Document::from_texts(id, current));
            current.clear();
        }
    };
    for line in text.lines() {
        if line.trim().is_empty() {
            flush(&mut current, &mut docs);
        } else {
            current.push(line.trim());
        }
    }
    flush(&mut current, &mut docs);
    docs
}

/// A treebank file starts with a `#` directive; anything else is raw EDUs.
pub fn is_treebank_text(text: &str) -> bool {
    text.lines()
        .find(|l| !l.trim().is_empty())
        .is_some_and(|l| l.trim_start().starts_with('#'))
}

#[derive(Debug, Clone)]
pub struct ParseOptions {
    pub model: PathBuf,
    pub input: PathBuf,
    pub out: PathBuf,
    /// Defaults to every step of the model.
    pub prefix: Option<usize>,
    pub trace: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParseOutcome {
    pub docs: usize,
    pub prefix: usize,
    /// Per-document action traces, when requested.
    pub trace: Option<String>,
}

pub fn cmd_parse(opts: &ParseOptions) -> Result<ParseOutcome, HarnessError> {
    let start = Instant::now();
    if opts.prefix == Some(0) {
        return Err(HarnessError::Usage("--prefix must be at least 1".into()));
    }
    let ensemble = load_model(&opts.model)?;
    let m = opts.prefix.unwrap_or(ensemble.len());
    if m > ensemble.len() {
        return Err(HarnessError::Usage(format!(
            "--prefix {m} exceeds the model's {} steps",
            ensemble.len()
        )));
    }
    let text = fs::read_to_string(&opts.input)
        .map_err(|e| HarnessError::Data(format!("{}: {e}", opts.input.display())))?;
    let stem = opts
        .input
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("input")
        .to_string();
    let (docs, domain_tag) = if is_treebank_text(&text) {
        let tb = parse_treebank(&text, &stem)?;
        let docs = tb.entries.into_iter().map(|(d, _)| d).collect::<Vec<_>>();
        (docs, tb.domain_tag)
    } else {
        (parse_raw_edus(&text), "raw".to_string())
    };
    if docs.is_empty() {
        return Err(HarnessError::Data(format!(
            "{}: no documents",
            opts.input.display()
        )));
    }

    let mut entries = Vec::with_capacity(docs.len());
    let mut trace = opts.trace.then(String::new);
    for doc in docs {
        let (tree, actions) = ensemble.parse_with_trace(m, &doc)?;
        if let Some(t) = trace.as_mut() {
            t.push_str(&format!("# {}\n", doc.doc_id));
            t.push_str(&render_trace(&actions));
        }
        entries.push((doc, tree));
    }
    let predicted = Treebank {
        name: format!("{stem}-pred-m{m}"),
        domain_tag,
        relation_inventory: ensemble.relation_inventory().to_vec(),
        entries,
    };
    write_file(&opts.out, &render_treebank(&predicted))?;

    let config = serde_json::json!({ "prefix": m, "trace": opts.trace });
    let mut manifest = RunManifest::new("parse", config, vec![]);
    manifest.add_input(&opts.model)?;
    manifest.add_input(&opts.input)?;
    manifest.add_output(&opts.out);
    manifest.time("total", start.elapsed().as_secs_f64());
    manifest.write(&manifest_path_for(&opts.out))?;
    Ok(ParseOutcome {
        docs: predicted.entries.len(),
        prefix: m,
        trace,
    })
}

// ---------------------------------------------------------------------------
// eval

#[derive(Debug, Clone)]
pub struct EvalOptions {
    pub gold: PathBuf,
    pub pred: PathBuf,
    pub out_csv: Option<PathBuf>,
    /// Value of the `m` column; 0 means "not tied to a prefix".
    pub m: usize,
}

pub fn cmd_eval(opts: &EvalOptions) -> Result<(ParsevalScores, String), HarnessError> {
    let start = Instant::now();
    let gold = load_treebank(&opts.gold)?;
    let pred = load_treebank(&opts.pred)?;
    if gold.len() != pred.len() {
        return Err(HarnessError::Data(format!(
            "gold has {} documents but prediction has {}",
            gold.len(),
            pred.len()
        )));
    }
    if gold.is_empty() {
        return Err(HarnessError::Data("gold treebank is empty".into()));
    }
    for (i, ((g, _), (p, _))) in gold.entries.iter().zip(&pred.entries).enumerate() {
        if g.doc_id != p.doc_id {
            return Err(HarnessError::Data(format!(
                "document {} differs: gold `{}` vs prediction `{}`",
                i + 1,
                g.doc_id,
                p.doc_id
            )));
        }
    }
    let scores = metrics::score_pairs(
        gold.entries
            .iter()
            .zip(&pred.entries)
            .map(|((_, g), (_, p))| (g, p)),
    )?;
    let csv = format!(
        "{CURVE_CSV_HEADER}\n{}\n",
        csv_line(opts.m, &gold.domain_tag, gold.len(), &scores)
    );

    if let Some(out) = &opts.out_csv {
        write_file(out, &csv)?;
        let mut manifest = RunManifest::new("eval", serde_json::json!({ "m": opts.m }), vec![]);
        manifest.add_input(&opts.gold)?;
        manifest.add_input(&opts.pred)?;
        manifest.add_output(out);
        manifest.time("total", start.elapsed().as_secs_f64());
        manifest.write(&manifest_path_for(out))?;
    }
    Ok((scores, csv))
}

// ---------------------------------------------------------------------------
// curve

#[derive(Debug, Clone)]
pub struct CurveOptions {
    pub model: PathBuf,
    pub treebanks: Vec<PathBuf>,
    pub out: PathBuf,
}

/// Sibling JSON holding the full table including domain gaps.
pub fn curve_json_path_for(csv: &Path) -> PathBuf {
    csv.with_extension("gaps.json")
}

pub fn cmd_curve(opts: &CurveOptions) -> Result<CurveTable, HarnessError> {
    let start = Instant::now();
    if opts.treebanks.is_empty() {
        return Err(HarnessError::Usage(
            "curve needs at least one treebank".into(),
        ));
    }
    let ensemble = load_model(&opts.model)?;
    let treebanks = opts
        .treebanks
        .iter()
        .map(|p| load_treebank(p))
        .collect::<Result<Vec<_>, _>>()?;
    let table = metrics::boost_curve(&ensemble, &treebanks, ensemble.training_domain())?;

    let json_path = curve_json_path_for(&opts.out);
    write_file(&opts.out, &table.to_csv())?;
    write_file(
        &json_path,
        &serde_json::to_string_pretty(&table).map_err(|e| HarnessError::Internal(e.to_string()))?,
    )?;

    let config = serde_json::json!({
        "steps": ensemble.len(),
        "training_domain": ensemble.training_domain(),
    });
    let mut manifest = RunManifest::new("curve", config, vec![]);
    manifest.add_input(&opts.model)?;
    for p in &opts.treebanks {
        manifest.add_input(p)?;
    }
    manifest.add_output(&opts.out);
    manifest.add_output(&json_path);
    manifest.time("total", start.elapsed().as_secs_f64());
    manifest.write(&manifest_path_for(&opts.out))?;
    Ok(table)
}

// ---------------------------------------------------------------------------
// compare

pub const MATCH_TOLERANCE: f64 = 0.05;
pub const NO_MATCHING_WIDTH: &str = "NoMatchingWidth";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WidthMatch {
    pub hidden_dim: usize,
    pub params: usize,
    pub target: usize,
    /// `|params − target| / target`.
    pub relative_gap: f64,
}

impl WidthMatch {
    pub fn within_tolerance(&self) -> bool {
        self.relative_gap <= MATCH_TOLERANCE
    }
}

/// Hidden width whose single-learner parameter count is closest to `target`.
/// Parameters grow linearly in the width, so only the two integers around
/// the real-valued solution need checking (plus the linear learner, H = 0).
pub fn match_hidden_width(input_dim: usize, n_relations: usize, target: usize) -> WidthMatch {
    let outputs = 4 + n_relations;
    let count = |h: usize| rstboost::LearnerConfig::new(input_dim, h, n_relations).param_count();
    let per_unit = (input_dim + 1 + outputs) as f64;
    let real = (target as f64 - outputs as f64) / per_unit;
    let base = real.max(1.0).floor() as usize;
    let mut best: Option<WidthMatch> = None;
    for h in [0, base, base + 1] {
        let params = count(h);
        let relative_gap = (params as f64 - target as f64).abs() / target as f64;
        let cand = WidthMatch {
            hidden_dim: h,
            params,
            target,
            relative_gap,
        };
        if best.is_none_or(|b| cand.relative_gap < b.relative_gap) {
            best = Some(cand);
        }
    }
    best.expect("candidates are non-empty")
}

#[derive(Debug, Clone)]
pub struct CompareOptions {
    pub treebank: PathBuf,
    /// Held-out treebanks; when empty a seeded fraction of `treebank` is held out.
    pub eval: Vec<PathBuf>,
    pub out: PathBuf,
    pub match_params: bool,
    pub holdout_fraction: f64,
    /// Configuration of the weak ensemble; `n_steps` is the step count.
    pub boost: BoostConfig,
    pub encoder: EncoderConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalScores {
    pub treebank: String,
    pub domain: String,
    pub docs: usize,
    pub scores: ParsevalScores,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContenderReport {
    pub name: String,
    pub n_steps: usize,
    pub hidden_dim: usize,
    pub param_total: usize,
    pub train_seconds: f64,
    pub model_bytes: usize,
    pub scores: Vec<EvalScores>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub weak: ContenderReport,
    pub strong: ContenderReport,
    /// Strong over weak parameter totals.
    pub param_ratio: f64,
    pub relative_param_gap: f64,
    pub params_matched: bool,
    pub warning: Option<String>,
    pub train_docs: usize,
    pub total_train_seconds: f64,
}

fn score_contender(
    name: &str,
    ensemble: &BoostedEnsemble,
    seconds: f64,
    eval: &[Treebank],
) -> Result<ContenderReport, HarnessError> {
    let scores = eval
        .iter()
        .map(|tb| {
            Ok(EvalScores {
                treebank: tb.name.clone(),
                domain: tb.domain_tag.clone(),
                docs: tb.len(),
                scores: metrics::evaluate_treebank(ensemble, ensemble.len(), tb)?,
            })
        })
        .collect::<Result<Vec<_>, HarnessError>>()?;
    Ok(ContenderReport {
        name: name.to_string(),
        n_steps: ensemble.len(),
        hidden_dim: ensemble.boost_config().hidden_dim,
        param_total: ensemble.param_count(),
        train_seconds: seconds,
        model_bytes: ensemble.to_json()?.len(),
        scores,
    })
}

/// Splits off a seeded held-out share of the documents.
fn holdout_split(tb: &Treebank, fraction: f64, seed: u64) -> (Treebank, Treebank) {
    let split_cfg = BoostConfig {
        dev_fraction: fraction,
        seed: seed ^ 0xc0ff_ee00,
        ..BoostConfig::default()
    };
    let (train_idx, test_idx) = split_dev(tb.len(), &split_cfg);
    let pick = |idx: &[usize], suffix: &str| Treebank {
        name: format!("{}-{suffix}", tb.name),
        domain_tag: tb.domain_tag.clone(),
        relation_inventory: tb.relation_inventory.clone(),
        entries: idx.iter().map(|&i| tb.entries[i].clone()).collect(),
    };
    (pick(&train_idx, "train"), pick(&test_idx, "heldout"))
}

pub fn cmd_compare(opts: &CompareOptions) -> Result<ComparisonReport, HarnessError> {
    let start = Instant::now();
    opts.boost.validate()?;
    opts.encoder.validate().map_err(HarnessError::Usage)?;
    if !(opts.holdout_fraction > 0.0 && opts.holdout_fraction < 1.0) {
        return Err(HarnessError::Usage(
            "holdout fraction must lie in (0, 1)".into(),
        ));
    }
    let full = load_treebank(&opts.treebank)?;
    if full.is_empty() {
        return Err(HarnessError::Data("training treebank is empty".into()));
    }
    let (train_tb, eval_tbs) = if opts.eval.is_empty() {
        if full.len() < 2 {
            return Err(HarnessError::Data(
                "need at least two documents to hold some out".into(),
            ));
        }
        let (train, held) = holdout_split(&full, opts.holdout_fraction, opts.boost.seed);
        (train, vec![held])
    } else {
        let eval = opts
            .eval
            .iter()
            .map(|p| load_treebank(p))
            .collect::<Result<Vec<_>, _>>()?;
        (full, eval)
    };

    let n_relations = train_tb.relation_inventory.len();
    let weak_cfg = opts.boost.clone();
    let target = weak_cfg.n_steps
        * weak_cfg
            .learner_config(opts.encoder.width(), n_relations)
            .param_count();
    let width = if opts.match_params {
        match_hidden_width(opts.encoder.width(), n_relations, target)
    } else {
        let params = weak_cfg
            .learner_config(opts.encoder.width(), n_relations)
            .param_count();
        WidthMatch {
            hidden_dim: weak_cfg.hidden_dim,
            params,
            target,
            relative_gap: (params as f64 - target as f64).abs() / target as f64,
        }
    };
    let warning = (opts.match_params && !width.within_tolerance()).then(|| {
        format!(
            "{NO_MATCHING_WIDTH}: closest width {} gives {} parameters against {} ({:.2}% off)",
            width.hidden_dim,
            width.params,
            target,
            width.relative_gap * 100.0
        )
    });
    // A different seed for the strong learner keeps n = 1 from being a copy.
    let strong_cfg = BoostConfig {
        n_steps: 1,
        hidden_dim: width.hidden_dim,
        seed: opts.boost.seed.wrapping_add(1),
        ..weak_cfg.clone()
    };

    let t0 = Instant::now();
    let (weak, _) = boosting::train(&train_tb, &weak_cfg, &opts.encoder)?;
    let weak_seconds = t0.elapsed().as_secs_f64();
    let t1 = Instant::now();
    let (strong, _) = boosting::train(&train_tb, &strong_cfg, &opts.encoder)?;
    let strong_seconds = t1.elapsed().as_secs_f64();

    let weak_report = score_contender("weak-ensemble", &weak, weak_seconds, &eval_tbs)?;
    let strong_report = score_contender("strong-single", &strong, strong_seconds, &eval_tbs)?;
    let report = ComparisonReport {
        param_ratio: strong_report.param_total as f64 / weak_report.param_total as f64,
        relative_param_gap: (strong_report.param_total as f64 - weak_report.param_total as f64)
            .abs()
            / weak_report.param_total as f64,
        params_matched: width.within_tolerance(),
        warning: warning.clone(),
        train_docs: train_tb.len(),
        total_train_seconds: weak_seconds + strong_seconds,
        weak: weak_report,
        strong: strong_report,
    };
    write_file(
        &opts.out,
        &serde_json::to_string_pretty(&report)
            .map_err(|e| HarnessError::Internal(e.to_string()))?,
    )?;

    let config = serde_json::json!({
        "weak": to_value(&weak_cfg),
        "strong": to_value(&strong_cfg),
        "encoder": to_value(&opts.encoder),
        "match_params": opts.match_params,
        "holdout_fraction": opts.holdout_fraction,
        "width_match": to_value(&width),
    });
    let mut manifest = RunManifest::new("compare", config, vec![weak_cfg.seed, strong_cfg.seed]);
    manifest.add_input(&opts.treebank)?;
    for p in &opts.eval {
        manifest.add_input(p)?;
    }
    manifest.add_output(&opts.out);
    if let Some(w) = warning {
        manifest.warnings.push(w);
    }
    manifest.time("train_weak", weak_seconds);
    manifest.time("train_strong", strong_seconds);
    manifest.time("total", start.elapsed().as_secs_f64());
    manifest.write(&manifest_path_for(&opts.out))?;
    Ok(report)
}
