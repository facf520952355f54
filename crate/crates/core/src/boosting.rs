//! Staged training of weak learners against the frozen sum of their
//! predecessors, prefix aggregation, and greedy shift-reduce decoding.
//!
//! Step `k` is fit to the combined objective `loss(frozen + f_k(x))`, where
//! `frozen` is the summed logits of steps `1..k-1` and never changes while
//! `f_k` trains. Prediction with prefix `m` sums the logits of the first `m`
//! steps.

use std::collections::HashMap;
use std::fs;
use std::path::Path;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::encoder::{encode_state, EncoderConfig, FeatureVector};
use crate::transition::{
    class_nuclearity, initial_state, oracle, Action, ParserState, TransitionError,
    N_STRUCTURE_CLASSES,
};
use crate::treebank::{DiscourseTree, Document, Treebank};
use crate::weak_learner::{LearnerConfig, LearnerError, LogitPair, Params, WeakLearner};

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum BoostError {
    #[error("treebank has no documents to train on")]
    EmptyTreebank,
    #[error("prefix {prefix} is outside 1..={steps}")]
    InvalidPrefix { prefix: usize, steps: usize },
    #[error("no action to predict: the parser state is terminal")]
    TerminalState,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("relation `{0}` is not in the model's relation inventory")]
    UnknownRelation(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error(transparent)]
    Learner(#[from] LearnerError),
    #[error(transparent)]
    Transition(#[from] TransitionError),
    #[error("model json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShuffleRule {
    /// Reshuffle the training instances before every epoch.
    PerEpoch,
    /// Keep oracle order.
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BoostConfig {
    pub n_steps: usize,
    /// Hidden width of every weak learner; 0 is linear.
    pub hidden_dim: usize,
    pub init_scale: f64,
    pub learning_rate: f64,
    pub l2_penalty: f64,
    pub batch_size: usize,
    pub epochs_max: usize,
    pub patience: usize,
    pub dev_fraction: f64,
    pub seed: u64,
    pub shuffle: ShuffleRule,
}

impl Default for BoostConfig {
    fn default() -> Self {
        BoostConfig {
            n_steps: 5,
            hidden_dim: 16,
            init_scale: 1.0,
            learning_rate: 0.1,
            l2_penalty: 1e-6,
            batch_size: 8,
            epochs_max: 30,
            patience: 3,
            dev_fraction: 0.1,
            seed: 0,
            shuffle: ShuffleRule::PerEpoch,
        }
    }
}

impl BoostConfig {
    pub fn validate(&self) -> Result<(), BoostError> {
        let bad = |m: &str| Err(BoostError::InvalidConfig(m.to_string()));
        if self.n_steps < 1 {
            return bad("n_steps must be at least 1");
        }
        if self.patience < 1 {
            return bad("patience must be at least 1");
        }
        if self.epochs_max < 1 {
            return bad("epochs_max must be at least 1");
        }
        if self.batch_size < 1 {
            return bad("batch_size must be at least 1");
        }
        if !(self.dev_fraction > 0.0 && self.dev_fraction < 1.0) {
            return bad("dev_fraction must lie in (0, 1)");
        }
        Ok(())
    }

    /// Learner configuration for a given feature width and relation count.
    pub fn learner_config(&self, input_dim: usize, n_relations: usize) -> LearnerConfig {
        LearnerConfig {
            init_scale: self.init_scale,
            learning_rate: self.learning_rate,
            l2_penalty: self.l2_penalty,
            ..LearnerConfig::new(input_dim, self.hidden_dim, n_relations)
        }
    }

    /// Seed for the weak learner trained at 1-based step `k`.
    pub fn step_seed(&self, k: usize) -> u64 {
        self.seed
            .wrapping_mul(0x9e37_79b9_7f4a_7c15)
            .wrapping_add(k as u64)
    }
}

/// An ordered list of frozen weak learners sharing one encoder.
#[derive(Debug, Clone, PartialEq)]
pub struct BoostedEnsemble {
    encoder_config: EncoderConfig,
    relation_inventory: Vec<String>,
    relation_index: HashMap<String, usize>,
    steps: Vec<WeakLearner>,
    boost_config: BoostConfig,
    training_domain: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format_version: u32,
    encoder_config: EncoderConfig,
    relation_inventory: Vec<String>,
    boost_config: BoostConfig,
    #[serde(default)]
    training_domain: Option<String>,
    steps: Vec<WeakLearner>,
}

impl BoostedEnsemble {
    /// An ensemble with no steps yet.
    pub fn new(
        encoder_config: EncoderConfig,
        relation_inventory: Vec<String>,
        boost_config: BoostConfig,
    ) -> Result<Self, BoostError> {
        encoder_config
            .validate()
            .map_err(BoostError::InvalidConfig)?;
        boost_config.validate()?;
        if relation_inventory.is_empty() {
            return Err(BoostError::InvalidConfig(
                "relation inventory is empty".into(),
            ));
        }
        let relation_index = relation_inventory
            .iter()
            .enumerate()
            .map(|(i, r)| (r.clone(), i))
            .collect::<HashMap<_, _>>();
        if relation_index.len() != relation_inventory.len() {
            return Err(BoostError::InvalidConfig(
                "relation inventory has duplicates".into(),
            ));
        }
        Ok(BoostedEnsemble {
            encoder_config,
            relation_inventory,
            relation_index,
            steps: Vec::new(),
            boost_config,
            training_domain: None,
        })
    }

    pub fn encoder_config(&self) -> &EncoderConfig {
        &self.encoder_config
    }

    pub fn relation_inventory(&self) -> &[String] {
        &self.relation_inventory
    }

    pub fn relation_id(&self, label: &str) -> Option<usize> {
        self.relation_index.get(label).copied()
    }

    pub fn boost_config(&self) -> &BoostConfig {
        &self.boost_config
    }

    /// Domain tag of the treebank the ensemble was trained on, if known.
    pub fn training_domain(&self) -> Option<&str> {
        self.training_domain.as_deref()
    }

    pub fn set_training_domain(&mut self, tag: Option<String>) {
        self.training_domain = tag;
    }

    pub fn steps(&self) -> &[WeakLearner] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn learner_config(&self) -> LearnerConfig {
        self.boost_config
            .learner_config(self.encoder_config.width(), self.relation_inventory.len())
    }

    /// Appends a frozen step after checking its dimensions.
    pub fn push_step(&mut self, learner: WeakLearner) -> Result<(), BoostError> {
        let c = &learner.config;
        if c.input_dim != self.encoder_config.width()
            || c.n_relations != self.relation_inventory.len()
        {
            return Err(BoostError::DimensionMismatch(format!(
                "step expects input {} and {} relations; ensemble has {} and {}",
                c.input_dim,
                c.n_relations,
                self.encoder_config.width(),
                self.relation_inventory.len()
            )));
        }
        c.validate()?;
        if learner.params.len() != c.param_count() {
            return Err(BoostError::DimensionMismatch(
                "parameter blocks do not match the step config".into(),
            ));
        }
        self.steps.push(learner);
        Ok(())
    }

    /// Copy holding only the first `m` steps.
    pub fn truncated(&self, m: usize) -> Result<BoostedEnsemble, BoostError> {
        self.check_prefix(m)?;
        let mut out = self.clone();
        out.steps.truncate(m);
        Ok(out)
    }

    pub fn param_count(&self) -> usize {
        self.steps.iter().map(WeakLearner::param_count).sum()
    }

    fn check_prefix(&self, m: usize) -> Result<(), BoostError> {
        if m < 1 || m > self.steps.len() {
            return Err(BoostError::InvalidPrefix {
                prefix: m,
                steps: self.steps.len(),
            });
        }
        Ok(())
    }

    /// Elementwise sum of the first `m` steps' logits.
    pub fn aggregate_logits(&self, m: usize, x: &FeatureVector) -> Result<LogitPair, BoostError> {
        self.check_prefix(m)?;
        self.sum_logits(m, x)
    }

    /// Like [`Self::aggregate_logits`] but `m = 0` yields zeros.
    fn sum_logits(&self, m: usize, x: &FeatureVector) -> Result<LogitPair, BoostError> {
        let mut z = LogitPair::zeros(self.relation_inventory.len());
        for step in &self.steps[..m] {
            z.add_assign(&step.forward(x)?);
        }
        Ok(z)
    }

    /// Greedy action under prefix `m`. Illegal structure classes are masked
    /// and ties go to the lowest class index.
    pub fn predict_action(
        &self,
        m: usize,
        state: &ParserState,
        doc: &Document,
    ) -> Result<Action, BoostError> {
        self.check_prefix(m)?;
        let legal = state.legal_actions();
        if !legal.any() {
            return Err(BoostError::TerminalState);
        }
        let x = encode_state(state, doc, &self.encoder_config);
        let z = self.sum_logits(m, &x)?;
        Ok(self.decide(&z, &legal.mask()))
    }

    fn decide(&self, z: &LogitPair, mask: &[bool; N_STRUCTURE_CLASSES]) -> Action {
        let class = argmax_masked(&z.structure, mask).expect("some action is legal");
        match class_nuclearity(class) {
            None => Action::Shift,
            Some(nuclearity) => {
                let rel = argmax_masked(&z.relation, &vec![true; z.relation.len()])
                    .expect("relation inventory is non-empty");
                Action::reduce(nuclearity, self.relation_inventory[rel].clone())
            }
        }
    }

    /// Greedy parse of a document with prefix `m`, returning the action trace.
    pub fn parse_with_trace(
        &self,
        m: usize,
        doc: &Document,
    ) -> Result<(DiscourseTree, Vec<Action>), BoostError> {
        self.check_prefix(m)?;
        let mut state = initial_state(doc.n_edus())?;
        let mut trace = Vec::with_capacity(2 * doc.n_edus());
        while !state.is_terminal() {
            let action = self.predict_action(m, &state, doc)?;
            state.step(&action)?;
            trace.push(action);
        }
        let tree = state.stack.pop().expect("terminal state").node;
        Ok((tree, trace))
    }

    pub fn parse(&self, m: usize, doc: &Document) -> Result<DiscourseTree, BoostError> {
        Ok(self.parse_with_trace(m, doc)?.0)
    }

    pub fn to_json(&self) -> Result<String, BoostError> {
        let file = ModelFile {
            format_version: MODEL_FORMAT_VERSION,
            encoder_config: self.encoder_config.clone(),
            relation_inventory: self.relation_inventory.clone(),
            boost_config: self.boost_config.clone(),
            training_domain: self.training_domain.clone(),
            steps: self.steps.clone(),
        };
        Ok(serde_json::to_string(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self, BoostError> {
        let file: ModelFile = serde_json::from_str(text)?;
        if file.format_version != MODEL_FORMAT_VERSION {
            return Err(BoostError::InvalidConfig(format!(
                "unsupported model format version {}",
                file.format_version
            )));
        }
        let mut ens = BoostedEnsemble::new(
            file.encoder_config,
            file.relation_inventory,
            file.boost_config,
        )?;
        ens.training_domain = file.training_domain;
        for step in file.steps {
            check_matrix_dims(&step)?;
            ens.push_step(step)?;
        }
        Ok(ens)
    }

    pub fn save(&self, path: &Path) -> Result<(), BoostError> {
        fs::write(path, self.to_json()?).map_err(|source| BoostError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self, BoostError> {
        let text = fs::read_to_string(path).map_err(|source| BoostError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }
}

fn check_matrix_dims(step: &WeakLearner) -> Result<(), BoostError> {
    let expected = Params::zeros(&step.config);
    let p = &step.params;
    let ok_matrix = |a: &crate::weak_learner::Matrix, b: &crate::weak_learner::Matrix| {
        a.rows == b.rows && a.cols == b.cols && a.data.len() == a.rows * a.cols
    };
    let hidden_ok = match (&p.hidden, &expected.hidden) {
        (None, None) => true,
        (Some(a), Some(b)) => ok_matrix(&a.weights, &b.weights) && a.bias.len() == b.bias.len(),
        _ => false,
    };
    if hidden_ok
        && ok_matrix(&p.structure_weights, &expected.structure_weights)
        && ok_matrix(&p.relation_weights, &expected.relation_weights)
        && p.structure_bias.len() == expected.structure_bias.len()
        && p.relation_bias.len() == expected.relation_bias.len()
    {
        Ok(())
    } else {
        Err(BoostError::DimensionMismatch(
            "stored parameter shapes disagree with the step config".into(),
        ))
    }
}

/// Index of the largest unmasked value; ties resolve to the lowest index.
pub fn argmax_masked(values: &[f64], mask: &[bool]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, (v, m)) in values.iter().zip(mask).enumerate() {
        if *m && best.is_none_or(|b| *v > values[b]) {
            best = Some(i);
        }
    }
    best
}

// ---------------------------------------------------------------------------
// Training data

/// One gold parser state with its supervision and the frozen prediction of
/// the ensemble trained so far.
#[derive(Debug, Clone)]
pub struct OracleInstance {
    pub x: FeatureVector,
    pub gold_structure: usize,
    pub gold_relation: Option<usize>,
    pub legal: [bool; N_STRUCTURE_CLASSES],
    pub frozen: LogitPair,
}

/// Static-oracle instances for every document, in document then step
/// order, with frozen logits from all current ensemble steps.
pub fn oracle_instances(
    ensemble: &BoostedEnsemble,
    entries: &[(Document, DiscourseTree)],
) -> Result<Vec<OracleInstance>, BoostError> {
    let mut out = Vec::new();
    for (doc, tree) in entries {
        let mut state = initial_state(doc.n_edus())?;
        for action in oracle(tree) {
            let x = encode_state(&state, doc, &ensemble.encoder_config);
            let gold_relation = match &action {
                Action::Shift => None,
                Action::Reduce { relation, .. } => Some(
                    ensemble
                        .relation_id(relation)
                        .ok_or_else(|| BoostError::UnknownRelation(relation.clone()))?,
                ),
            };
            let frozen = ensemble.sum_logits(ensemble.len(), &x)?;
            out.push(OracleInstance {
                gold_structure: action.structure_class(),
                gold_relation,
                legal: state.legal_actions().mask(),
                frozen,
                x,
            });
            state.step(&action)?;
        }
    }
    Ok(out)
}

/// Mean data loss (no l2) of `frozen + learner(x)` over the instances.
pub fn mean_combined_loss(
    learner: Option<&WeakLearner>,
    instances: &[OracleInstance],
) -> Result<f64, BoostError> {
    if instances.is_empty() {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for inst in instances {
        total += match learner {
            Some(w) => {
                let mut z = w.forward(&inst.x)?;
                z.add_assign(&inst.frozen);
                instance_loss(&z, inst)
            }
            None => instance_loss(&inst.frozen, inst),
        };
    }
    Ok(total / instances.len() as f64)
}

fn cross_entropy(v: &[f64], mask: Option<&[bool]>, gold: usize) -> f64 {
    let legal = |i: usize| mask.is_none_or(|m| m[i]);
    let max = (0..v.len())
        .filter(|&i| legal(i))
        .map(|i| v[i])
        .fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = (0..v.len())
        .filter(|&i| legal(i))
        .map(|i| (v[i] - max).exp())
        .sum();
    max + sum.ln() - v[gold]
}

fn instance_loss(z: &LogitPair, inst: &OracleInstance) -> f64 {
    let mut loss = cross_entropy(&z.structure, Some(&inst.legal), inst.gold_structure);
    if let Some(r) = inst.gold_relation {
        loss += cross_entropy(&z.relation, None, r);
    }
    loss
}

/// Mean combined training cross-entropy of prefix `m` over a treebank's
/// oracle states; `m = 0` scores the all-zero predictor.
pub fn prefix_loss(
    ensemble: &BoostedEnsemble,
    m: usize,
    entries: &[(Document, DiscourseTree)],
) -> Result<f64, BoostError> {
    if m > ensemble.len() {
        return Err(BoostError::InvalidPrefix {
            prefix: m,
            steps: ensemble.len(),
        });
    }
    let mut prefix = ensemble.clone();
    prefix.steps.truncate(m);
    let instances = oracle_instances(&prefix, entries)?;
    mean_combined_loss(None, &instances)
}

/// Deterministic document split: `(train, dev)` index lists, both sorted.
pub fn split_dev(n_docs: usize, cfg: &BoostConfig) -> (Vec<usize>, Vec<usize>) {
    let mut order: Vec<usize> = (0..n_docs).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x0005_eed0_fde5);
    order.shuffle(&mut rng);
    let n_dev = if n_docs < 2 {
        0
    } else {
        ((n_docs as f64 * cfg.dev_fraction).ceil() as usize).clamp(1, n_docs - 1)
    };
    let mut dev = order[..n_dev].to_vec();
    let mut train = order[n_dev..].to_vec();
    dev.sort_unstable();
    train.sort_unstable();
    (train, dev)
}

// ---------------------------------------------------------------------------
// Training

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub step: usize,
    /// Mean combined training cross-entropy of the ensemble before this step.
    pub initial_train_loss: f64,
    /// Mean combined training cross-entropy with this step appended.
    pub final_train_loss: f64,
    pub dev_loss_curve: Vec<f64>,
    pub best_epoch: usize,
    pub epochs_run: usize,
    pub seconds: f64,
    pub param_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub steps: Vec<StepReport>,
    pub cumulative_params: Vec<usize>,
    pub train_docs: usize,
    pub dev_docs: usize,
    pub train_instances: usize,
    pub dev_instances: usize,
    pub total_seconds: f64,
}

/// Fits one fresh learner on `train` instances against their frozen logits,
/// early-stopping on `dev` (or on `train` when there is no dev data).
fn fit_step(
    ensemble: &BoostedEnsemble,
    train: &[OracleInstance],
    dev: &[OracleInstance],
    seed: u64,
) -> Result<(WeakLearner, StepReport), BoostError> {
    let start = Instant::now();
    let cfg = &ensemble.boost_config;
    let lcfg = ensemble.learner_config();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut learner = WeakLearner::init(lcfg.clone(), seed)?;
    let mut grads = Params::zeros(&lcfg);
    let stop_set = if dev.is_empty() { train } else { dev };

    let initial_train_loss = mean_combined_loss(None, train)?;
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut best: Option<(f64, WeakLearner, usize)> = None;
    let mut curve = Vec::new();
    let mut since_best = 0;
    let mut epochs_run = 0;

    for epoch in 1..=cfg.epochs_max {
        if cfg.shuffle == ShuffleRule::PerEpoch {
            order.shuffle(&mut rng);
        }
        for batch in order.chunks(cfg.batch_size) {
            grads.fill(0.0);
            let scale = 1.0 / batch.len() as f64;
            for &i in batch {
                let inst = &train[i];
                learner.accumulate_loss_grad(
                    &inst.x,
                    &inst.frozen,
                    inst.gold_structure,
                    inst.gold_relation,
                    &inst.legal,
                    &mut grads,
                    scale,
                )?;
            }
            learner.add_l2_grad(&mut grads, 1.0);
            learner.params.add_scaled(&grads, -lcfg.learning_rate)?;
        }
        epochs_run = epoch;
        if !learner.is_finite() {
            return Err(BoostError::InvalidConfig(format!(
                "training diverged at step {} epoch {epoch}; lower the learning rate",
                ensemble.len() + 1
            )));
        }
        let loss = mean_combined_loss(Some(&learner), stop_set)?;
        curve.push(loss);
        if best.as_ref().is_none_or(|b| loss < b.0) {
            best = Some((loss, learner.clone(), epoch));
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= cfg.patience {
                break;
            }
        }
    }
    let (_, learner, best_epoch) = best.expect("at least one epoch ran");
    let final_train_loss = mean_combined_loss(Some(&learner), train)?;
    let report = StepReport {
        step: ensemble.len() + 1,
        initial_train_loss,
        final_train_loss,
        dev_loss_curve: curve,
        best_epoch,
        epochs_run,
        seconds: start.elapsed().as_secs_f64(),
        param_count: learner.param_count(),
    };
    Ok((learner, report))
}

type Entries = Vec<(Document, DiscourseTree)>;

fn split_entries(tb: &Treebank, cfg: &BoostConfig) -> (Entries, Entries) {
    let (train_idx, dev_idx) = split_dev(tb.entries.len(), cfg);
    let pick = |idx: &[usize]| idx.iter().map(|&i| tb.entries[i].clone()).collect();
    (pick(&train_idx), pick(&dev_idx))
}

/// Trains and appends one step. The treebank is split into train and dev
/// documents exactly as [`train`] does, so repeated calls share one dev set.
pub fn train_step(
    ensemble: &BoostedEnsemble,
    treebank: &Treebank,
    seed: u64,
) -> Result<(BoostedEnsemble, StepReport), BoostError> {
    if treebank.is_empty() {
        return Err(BoostError::EmptyTreebank);
    }
    let (train_entries, dev_entries) = split_entries(treebank, &ensemble.boost_config);
    let train = oracle_instances(ensemble, &train_entries)?;
    let dev = oracle_instances(ensemble, &dev_entries)?;
    let (learner, report) = fit_step(ensemble, &train, &dev, seed)?;
    let mut next = ensemble.clone();
    next.push_step(learner)?;
    Ok((next, report))
}

/// Full staged training: one dev split, then `n_steps` calls' worth of
/// [`train_step`], reusing encoded states and running frozen sums.
pub fn train(
    treebank: &Treebank,
    cfg: &BoostConfig,
    enc_cfg: &EncoderConfig,
) -> Result<(BoostedEnsemble, TrainReport), BoostError> {
    let start = Instant::now();
    if treebank.is_empty() {
        return Err(BoostError::EmptyTreebank);
    }
    let mut ensemble = BoostedEnsemble::new(
        enc_cfg.clone(),
        treebank.relation_inventory.clone(),
        cfg.clone(),
    )?;
    ensemble.training_domain = Some(treebank.domain_tag.clone());
    let (train_entries, dev_entries) = split_entries(treebank, cfg);
    let mut train = oracle_instances(&ensemble, &train_entries)?;
    let mut dev = oracle_instances(&ensemble, &dev_entries)?;

    let mut steps = Vec::with_capacity(cfg.n_steps);
    let mut cumulative = Vec::with_capacity(cfg.n_steps);
    for k in 1..=cfg.n_steps {
        let (learner, report) = fit_step(&ensemble, &train, &dev, cfg.step_seed(k))?;
        for inst in train.iter_mut().chain(dev.iter_mut()) {
            inst.frozen.add_assign(&learner.forward(&inst.x)?);
        }
        ensemble.push_step(learner)?;
        cumulative.push(ensemble.param_count());
        steps.push(report);
    }
    let report = TrainReport {
        steps,
        cumulative_params: cumulative,
        train_docs: train_entries.len(),
        dev_docs: dev_entries.len(),
        train_instances: train.len(),
        dev_instances: dev.len(),
        total_seconds: start.elapsed().as_secs_f64(),
    };
    Ok((ensemble, report))
}
