//! A deliberately small two-headed classifier: an optional tanh hidden
//! layer feeding a structure head (Shift, Reduce-NN, Reduce-NS, Reduce-SN)
//! and a relation head.
//!
//! Gradients are derived by hand for the boosted objective, where the
//! learner's logits are added to a constant frozen prediction from the
//! preceding ensemble steps.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::encoder::FeatureVector;
use crate::transition::N_STRUCTURE_CLASSES;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LearnerError {
    #[error("invalid learner config: {0}")]
    InvalidConfig(String),
    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("illegal gold label: {0}")]
    IllegalGold(String),
}

fn mismatch(what: &'static str, expected: usize, found: usize) -> Result<(), LearnerError> {
    if expected == found {
        Ok(())
    } else {
        Err(LearnerError::DimensionMismatch {
            what,
            expected,
            found,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerConfig {
    pub input_dim: usize,
    /// Zero makes the learner purely linear.
    pub hidden_dim: usize,
    pub n_structure_classes: usize,
    pub n_relations: usize,
    /// Weights start uniform in `±init_scale / sqrt(fan_in)`.
    pub init_scale: f64,
    pub learning_rate: f64,
    pub l2_penalty: f64,
}

impl LearnerConfig {
    pub fn new(input_dim: usize, hidden_dim: usize, n_relations: usize) -> Self {
        LearnerConfig {
            input_dim,
            hidden_dim,
            n_structure_classes: N_STRUCTURE_CLASSES,
            n_relations,
            init_scale: 1.0,
            learning_rate: 0.1,
            l2_penalty: 1e-6,
        }
    }

    pub fn validate(&self) -> Result<(), LearnerError> {
        let bad = |m: &str| Err(LearnerError::InvalidConfig(m.to_string()));
        if self.input_dim == 0 {
            return bad("input_dim must be positive");
        }
        if self.n_structure_classes != N_STRUCTURE_CLASSES {
            return bad("exactly 4 structure classes are supported");
        }
        if self.n_relations == 0 {
            return bad("n_relations must be positive");
        }
        if !(self.init_scale.is_finite() && self.init_scale >= 0.0) {
            return bad("init_scale must be finite and non-negative");
        }
        if !(self.learning_rate.is_finite() && self.learning_rate >= 0.0) {
            return bad("learning_rate must be finite and non-negative");
        }
        if !(self.l2_penalty.is_finite() && self.l2_penalty >= 0.0) {
            return bad("l2_penalty must be finite and non-negative");
        }
        Ok(())
    }

    /// Width read by the output heads.
    fn head_input(&self) -> usize {
        if self.hidden_dim > 0 {
            self.hidden_dim
        } else {
            self.input_dim
        }
    }

    /// Closed-form scalar parameter count.
    pub fn param_count(&self) -> usize {
        let outputs = self.n_structure_classes + self.n_relations;
        if self.hidden_dim > 0 {
            self.input_dim * self.hidden_dim + self.hidden_dim + self.hidden_dim * outputs + outputs
        } else {
            self.input_dim * outputs + outputs
        }
    }
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HiddenLayer {
    /// `input_dim × hidden_dim`.
    pub weights: Matrix,
    pub bias: Vec<f64>,
}

/// All trainable values of a learner. Gradients use the same layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub hidden: Option<HiddenLayer>,
    /// `head_input × 4`.
    pub structure_weights: Matrix,
    pub structure_bias: Vec<f64>,
    /// `head_input × n_relations`.
    pub relation_weights: Matrix,
    pub relation_bias: Vec<f64>,
}

impl Params {
    pub fn zeros(cfg: &LearnerConfig) -> Self {
        let head_in = cfg.head_input();
        Params {
            hidden: (cfg.hidden_dim > 0).then(|| HiddenLayer {
                weights: Matrix::zeros(cfg.input_dim, cfg.hidden_dim),
                bias: vec![0.0; cfg.hidden_dim],
            }),
            structure_weights: Matrix::zeros(head_in, cfg.n_structure_classes),
            structure_bias: vec![0.0; cfg.n_structure_classes],
            relation_weights: Matrix::zeros(head_in, cfg.n_relations),
            relation_bias: vec![0.0; cfg.n_relations],
        }
    }

    fn blocks(&self) -> Vec<&[f64]> {
        let mut out: Vec<&[f64]> = Vec::with_capacity(6);
        if let Some(h) = &self.hidden {
            out.push(&h.weights.data);
            out.push(&h.bias);
        }
        out.push(&self.structure_weights.data);
        out.push(&self.structure_bias);
        out.push(&self.relation_weights.data);
        out.push(&self.relation_bias);
        out
    }

    fn blocks_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> = Vec::with_capacity(6);
        if let Some(h) = &mut self.hidden {
            out.push(&mut h.weights.data);
            out.push(&mut h.bias);
        }
        out.push(&mut self.structure_weights.data);
        out.push(&mut self.structure_bias);
        out.push(&mut self.relation_weights.data);
        out.push(&mut self.relation_bias);
        out
    }

    pub fn len(&self) -> usize {
        self.blocks().iter().map(|b| b.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All values in a fixed order: hidden weights, hidden bias, structure
    /// weights, structure bias, relation weights, relation bias.
    pub fn iter(&self) -> impl Iterator<Item = &f64> {
        self.blocks().into_iter().flat_map(|b| b.iter())
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.blocks_mut().into_iter().flat_map(|b| b.iter_mut())
    }

    pub fn squared_norm(&self) -> f64 {
        self.iter().map(|v| v * v).sum()
    }

    pub fn fill(&mut self, value: f64) {
        for v in self.iter_mut() {
            *v = value;
        }
    }

    fn same_shape(&self, other: &Params) -> bool {
        let a = self.blocks();
        let b = other.blocks();
        a.len() == b.len() && a.iter().zip(&b).all(|(x, y)| x.len() == y.len())
    }

    /// `self += scale * other`.
    pub fn add_scaled(&mut self, other: &Params, scale: f64) -> Result<(), LearnerError> {
        if !self.same_shape(other) {
            return Err(LearnerError::DimensionMismatch {
                what: "parameter blocks",
                expected: self.len(),
                found: other.len(),
            });
        }
        for (a, b) in self.iter_mut().zip(other.iter()) {
            *a += scale * b;
        }
        Ok(())
    }
}

/// Scores from one learner or from a summed ensemble prefix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogitPair {
    pub structure: [f64; N_STRUCTURE_CLASSES],
    pub relation: Vec<f64>,
}

impl LogitPair {
    pub fn zeros(n_relations: usize) -> Self {
        LogitPair {
            structure: [0.0; N_STRUCTURE_CLASSES],
            relation: vec![0.0; n_relations],
        }
    }

    pub fn add_assign(&mut self, other: &LogitPair) {
        for (a, b) in self.structure.iter_mut().zip(&other.structure) {
            *a += b;
        }
        for (a, b) in self.relation.iter_mut().zip(&other.relation) {
            *a += b;
        }
    }
}

/// Intermediate activations kept for the backward pass.
struct Activations {
    hidden: Vec<f64>,
    logits: LogitPair,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakLearner {
    pub config: LearnerConfig,
    pub params: Params,
}

/// `logsumexp` over the entries where `mask` is set and the resulting
/// softmax probabilities (zero where masked).
fn masked_softmax(z: &[f64], mask: &[bool]) -> (f64, Vec<f64>) {
    let max = z
        .iter()
        .zip(mask)
        .filter(|(_, m)| **m)
        .map(|(v, _)| *v)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut probs: Vec<f64> = z
        .iter()
        .zip(mask)
        .map(|(v, m)| if *m { (v - max).exp() } else { 0.0 })
        .collect();
    let sum: f64 = probs.iter().sum();
    for p in &mut probs {
        *p /= sum;
    }
    (max + sum.ln(), probs)
}

impl WeakLearner {
    pub fn init(config: LearnerConfig, seed: u64) -> Result<Self, LearnerError> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = Params::zeros(&config);
        let mut fill = |m: &mut Matrix, fan_in: usize| {
            let a = config.init_scale / (fan_in as f64).sqrt();
            if a > 0.0 {
                for v in &mut m.data {
                    *v = rng.gen_range(-a..a);
                }
            }
        };
        if let Some(h) = &mut params.hidden {
            fill(&mut h.weights, config.input_dim);
        }
        let head_in = config.head_input();
        fill(&mut params.structure_weights, head_in);
        fill(&mut params.relation_weights, head_in);
        Ok(WeakLearner { config, params })
    }

    /// A learner whose parameters are all zero, i.e. whose logits are zero.
    pub fn zeros(config: LearnerConfig) -> Result<Self, LearnerError> {
        config.validate()?;
        let params = Params::zeros(&config);
        Ok(WeakLearner { config, params })
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    pub fn n_relations(&self) -> usize {
        self.config.n_relations
    }

    fn check_input(&self, x: &FeatureVector) -> Result<(), LearnerError> {
        mismatch("feature width", self.config.input_dim, x.width())
    }

    fn activate(&self, x: &FeatureVector) -> Activations {
        let p = &self.params;
        let mut logits = LogitPair {
            structure: [0.0; N_STRUCTURE_CLASSES],
            relation: p.relation_bias.clone(),
        };
        logits.structure.copy_from_slice(&p.structure_bias);
        match &p.hidden {
            Some(layer) => {
                let mut hidden = layer.bias.clone();
                for &(i, xi) in x.nonzeros() {
                    for (h, w) in hidden.iter_mut().zip(layer.weights.row(i)) {
                        *h += xi * w;
                    }
                }
                for h in &mut hidden {
                    *h = h.tanh();
                }
                for (j, &hj) in hidden.iter().enumerate() {
                    accumulate_row(&mut logits, p, j, hj);
                }
                Activations { hidden, logits }
            }
            None => {
                for &(i, xi) in x.nonzeros() {
                    accumulate_row(&mut logits, p, i, xi);
                }
                Activations {
                    hidden: Vec::new(),
                    logits,
                }
            }
        }
    }

    pub fn forward(&self, x: &FeatureVector) -> Result<LogitPair, LearnerError> {
        self.check_input(x)?;
        Ok(self.activate(x).logits)
    }

    fn check_gold(
        &self,
        frozen: &LogitPair,
        gold_structure: usize,
        gold_relation: Option<usize>,
        legal: &[bool; N_STRUCTURE_CLASSES],
    ) -> Result<(), LearnerError> {
        mismatch(
            "frozen relation logits",
            self.config.n_relations,
            frozen.relation.len(),
        )?;
        if gold_structure >= N_STRUCTURE_CLASSES {
            return Err(LearnerError::IllegalGold(format!(
                "structure class {gold_structure} out of range"
            )));
        }
        if !legal[gold_structure] {
            return Err(LearnerError::IllegalGold(format!(
                "structure class {gold_structure} is masked out"
            )));
        }
        match (gold_structure, gold_relation) {
            (0, Some(_)) => Err(LearnerError::IllegalGold(
                "shift carries no relation".into(),
            )),
            (c, None) if c > 0 => Err(LearnerError::IllegalGold(
                "reduce requires a gold relation".into(),
            )),
            (_, Some(r)) if r >= self.config.n_relations => Err(LearnerError::IllegalGold(
                format!("relation {r} out of range"),
            )),
            _ => Ok(()),
        }
    }

    /// Data loss (cross-entropies without the l2 term) of the combined
    /// prediction `frozen + forward(x)`; adds `scale` times its gradient
    /// w.r.t. this learner's parameters into `grads`. Only rows touched by
    /// nonzero features are written.
    #[allow(clippy::too_many_arguments)]
    pub fn accumulate_loss_grad(
        &self,
        x: &FeatureVector,
        frozen: &LogitPair,
        gold_structure: usize,
        gold_relation: Option<usize>,
        legal: &[bool; N_STRUCTURE_CLASSES],
        grads: &mut Params,
        scale: f64,
    ) -> Result<f64, LearnerError> {
        self.check_input(x)?;
        self.check_gold(frozen, gold_structure, gold_relation, legal)?;
        if !grads.same_shape(&self.params) {
            return Err(LearnerError::DimensionMismatch {
                what: "gradient buffer",
                expected: self.params.len(),
                found: grads.len(),
            });
        }
        let act = self.activate(x);

        let mut z_s = act.logits.structure;
        for (z, f) in z_s.iter_mut().zip(&frozen.structure) {
            *z += f;
        }
        let (lse, probs) = masked_softmax(&z_s, legal);
        let mut loss = lse - z_s[gold_structure];
        let mut d_s = [0.0; N_STRUCTURE_CLASSES];
        for k in 0..N_STRUCTURE_CLASSES {
            d_s[k] = probs[k] - if k == gold_structure { 1.0 } else { 0.0 };
        }

        let d_r = match gold_relation {
            Some(gold) => {
                let z_r: Vec<f64> = act
                    .logits
                    .relation
                    .iter()
                    .zip(&frozen.relation)
                    .map(|(a, b)| a + b)
                    .collect();
                let all = vec![true; z_r.len()];
                let (lse_r, mut q) = masked_softmax(&z_r, &all);
                loss += lse_r - z_r[gold];
                q[gold] -= 1.0;
                Some(q)
            }
            None => None,
        };

        let p = &self.params;
        for (g, d) in grads.structure_bias.iter_mut().zip(&d_s) {
            *g += scale * d;
        }
        if let Some(d_r) = &d_r {
            for (g, d) in grads.relation_bias.iter_mut().zip(d_r) {
                *g += scale * d;
            }
        }
        match &p.hidden {
            Some(_) => {
                let hdim = act.hidden.len();
                let mut d_hidden = vec![0.0; hdim];
                for (j, &hj) in act.hidden.iter().enumerate() {
                    let ws = p.structure_weights.row(j);
                    let gs = grads.structure_weights.row_mut(j);
                    let mut acc = 0.0;
                    for k in 0..N_STRUCTURE_CLASSES {
                        gs[k] += scale * hj * d_s[k];
                        acc += ws[k] * d_s[k];
                    }
                    if let Some(d_r) = &d_r {
                        let wr = p.relation_weights.row(j);
                        let gr = grads.relation_weights.row_mut(j);
                        for r in 0..d_r.len() {
                            gr[r] += scale * hj * d_r[r];
                            acc += wr[r] * d_r[r];
                        }
                    }
                    d_hidden[j] = acc * (1.0 - hj * hj);
                }
                let gh = grads
                    .hidden
                    .as_mut()
                    .expect("gradient shape matches learner");
                for (g, d) in gh.bias.iter_mut().zip(&d_hidden) {
                    *g += scale * d;
                }
                for &(i, xi) in x.nonzeros() {
                    for (g, d) in gh.weights.row_mut(i).iter_mut().zip(&d_hidden) {
                        *g += scale * xi * d;
                    }
                }
            }
            None => {
                for &(i, xi) in x.nonzeros() {
                    let gs = grads.structure_weights.row_mut(i);
                    for k in 0..N_STRUCTURE_CLASSES {
                        gs[k] += scale * xi * d_s[k];
                    }
                    if let Some(d_r) = &d_r {
                        let gr = grads.relation_weights.row_mut(i);
                        for r in 0..d_r.len() {
                            gr[r] += scale * xi * d_r[r];
                        }
                    }
                }
            }
        }
        Ok(loss)
    }

    /// `l2_penalty · ‖w‖²`.
    pub fn l2_term(&self) -> f64 {
        self.config.l2_penalty * self.params.squared_norm()
    }

    /// Adds `scale` times the l2 gradient into `grads`.
    pub fn add_l2_grad(&self, grads: &mut Params, scale: f64) {
        let c = 2.0 * self.config.l2_penalty * scale;
        if c == 0.0 {
            return;
        }
        for (g, w) in grads.iter_mut().zip(self.params.iter()) {
            *g += c * w;
        }
    }

    /// Boosted objective on one instance: masked structure cross-entropy,
    /// relation cross-entropy on reduce steps, plus the l2 term, all
    /// evaluated at `frozen + forward(x)`. Gradients are w.r.t. this
    /// learner only.
    pub fn boosted_loss_and_grad(
        &self,
        x: &FeatureVector,
        frozen: &LogitPair,
        gold_structure: usize,
        gold_relation: Option<usize>,
        legal: &[bool; N_STRUCTURE_CLASSES],
    ) -> Result<(f64, Params), LearnerError> {
        let mut grads = Params::zeros(&self.config);
        let data = self.accumulate_loss_grad(
            x,
            frozen,
            gold_structure,
            gold_relation,
            legal,
            &mut grads,
            1.0,
        )?;
        self.add_l2_grad(&mut grads, 1.0);
        Ok((data + self.l2_term(), grads))
    }

    /// Returns `w - lr · grads`.
    pub fn sgd_step(&self, grads: &Params, lr: f64) -> Result<WeakLearner, LearnerError> {
        let mut next = self.clone();
        next.params.add_scaled(grads, -lr)?;
        Ok(next)
    }

    pub fn is_finite(&self) -> bool {
        self.params.iter().all(|v| v.is_finite())
    }
}

#[inline]
fn accumulate_row(logits: &mut LogitPair, p: &Params, row: usize, value: f64) {
    for (z, w) in logits
        .structure
        .iter_mut()
        .zip(p.structure_weights.row(row))
    {
        *z += value * w;
    }
    for (z, w) in logits.relation.iter_mut().zip(p.relation_weights.row(row)) {
        *z += value * w;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const ALL_LEGAL: [bool; 4] = [true; 4];

    fn cfg(input: usize, hidden: usize, rel: usize) -> LearnerConfig {
        LearnerConfig::new(input, hidden, rel)
    }

    fn random_x(width: usize, seed: u64) -> FeatureVector {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dense: Vec<f64> = (0..width)
            .map(|_| {
                if rng.gen_bool(0.5) {
                    rng.gen_range(-1.0..1.0)
                } else {
                    0.0
                }
            })
            .collect();
        FeatureVector::from_dense(&dense)
    }

    #[test]
    fn init_is_seeded() {
        let c = cfg(10, 4, 3);
        let a = WeakLearner::init(c.clone(), 1).unwrap();
        let b = WeakLearner::init(c.clone(), 1).unwrap();
        let d = WeakLearner::init(c.clone(), 2).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, d);
        assert!(a.params.structure_bias.iter().all(|v| *v == 0.0));
        let bound = 1.0 / 10f64.sqrt();
        let hidden = a.params.hidden.as_ref().unwrap();
        assert!(hidden.weights.data.iter().all(|v| v.abs() < bound));
        let linear = WeakLearner::init(cfg(10, 0, 3), 1).unwrap();
        assert!(linear.params.hidden.is_none());
    }

    #[test]
    fn init_rejects_bad_config() {
        let mut c = cfg(10, 4, 3);
        c.n_structure_classes = 5;
        assert!(matches!(
            WeakLearner::init(c, 0),
            Err(LearnerError::InvalidConfig(_))
        ));
        assert!(WeakLearner::init(cfg(0, 4, 3), 0).is_err());
    }

    #[test]
    fn forward_examples() {
        let zero = WeakLearner::zeros(cfg(6, 3, 2)).unwrap();
        let out = zero.forward(&random_x(6, 0)).unwrap();
        assert_eq!(out, LogitPair::zeros(2));

        let mut ident = WeakLearner::zeros(cfg(6, 0, 2)).unwrap();
        for k in 0..4 {
            ident.params.structure_weights.data[k * 4 + k] = 1.0;
        }
        let x = FeatureVector::from_dense(&[0.5, -1.0, 2.0, 3.0, 7.0, 9.0]);
        let out = ident.forward(&x).unwrap();
        assert_eq!(out.structure, [0.5, -1.0, 2.0, 3.0]);
        assert_eq!(out.relation.len(), 2);

        let err = ident.forward(&random_x(5, 0)).unwrap_err();
        assert!(matches!(err, LearnerError::DimensionMismatch { .. }));
    }

    #[test]
    fn param_counts() {
        assert_eq!(cfg(3076, 0, 8).param_count(), 36924);
        assert_eq!(
            cfg(3076, 16, 8).param_count(),
            3076 * 16 + 16 + 16 * 4 + 4 + 16 * 8 + 8
        );
        assert_eq!(cfg(3076, 16, 8).param_count(), 49436);
        for c in [cfg(3076, 0, 8), cfg(3076, 16, 8), cfg(7, 3, 2)] {
            let w = WeakLearner::init(c.clone(), 0).unwrap();
            assert_eq!(w.param_count(), c.param_count());
        }
        let h16 = cfg(100, 16, 8).param_count();
        let h32 = cfg(100, 32, 8).param_count();
        assert_eq!(h32 - 12, 2 * (h16 - 12));
    }

    #[test]
    fn zero_frozen_matches_plain_cross_entropy() {
        let mut c = cfg(8, 0, 3);
        c.l2_penalty = 0.0;
        let w = WeakLearner::init(c, 4).unwrap();
        let x = random_x(8, 1);
        let logits = w.forward(&x).unwrap();
        let (loss, _) = w
            .boosted_loss_and_grad(&x, &LogitPair::zeros(3), 2, Some(1), &ALL_LEGAL)
            .unwrap();
        let ce = |z: &[f64], g: usize| {
            let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            m + z.iter().map(|v| (v - m).exp()).sum::<f64>().ln() - z[g]
        };
        let expected = ce(&logits.structure, 2) + ce(&logits.relation, 1);
        assert!((loss - expected).abs() < 1e-12);
    }

    #[test]
    fn saturated_frozen_silences_structure_gradient() {
        let mut c = cfg(8, 4, 3);
        c.l2_penalty = 0.0;
        let w = WeakLearner::init(c, 9).unwrap();
        let x = random_x(8, 3);
        let mut frozen = LogitPair::zeros(3);
        frozen.structure[0] = 1000.0;
        let (loss, grads) = w
            .boosted_loss_and_grad(&x, &frozen, 0, None, &ALL_LEGAL)
            .unwrap();
        assert!(loss <= 1e-6);
        let max_grad = grads.iter().map(|g| g.abs()).fold(0.0, f64::max);
        assert!(max_grad <= 1e-6, "{max_grad}");
    }

    #[test]
    fn gold_checks() {
        let w = WeakLearner::init(cfg(4, 0, 2), 0).unwrap();
        let x = random_x(4, 0);
        let f = LogitPair::zeros(2);
        let mask = [false, true, true, true];
        assert!(matches!(
            w.boosted_loss_and_grad(&x, &f, 0, None, &mask),
            Err(LearnerError::IllegalGold(_))
        ));
        assert!(w
            .boosted_loss_and_grad(&x, &f, 0, Some(1), &ALL_LEGAL)
            .is_err());
        assert!(w
            .boosted_loss_and_grad(&x, &f, 2, None, &ALL_LEGAL)
            .is_err());
        assert!(w
            .boosted_loss_and_grad(&x, &f, 2, Some(5), &ALL_LEGAL)
            .is_err());
        assert!(w
            .boosted_loss_and_grad(&x, &LogitPair::zeros(3), 0, None, &ALL_LEGAL)
            .is_err());
    }

    #[test]
    fn masked_logits_do_not_matter() {
        let w = WeakLearner::init(cfg(8, 4, 3), 2).unwrap();
        let x = random_x(8, 5);
        let mask = [false, true, true, true];
        let mut frozen = LogitPair::zeros(3);
        let (l1, g1) = w
            .boosted_loss_and_grad(&x, &frozen, 2, Some(0), &mask)
            .unwrap();
        frozen.structure[0] = 55.0;
        let (l2, g2) = w
            .boosted_loss_and_grad(&x, &frozen, 2, Some(0), &mask)
            .unwrap();
        assert_eq!(l1, l2);
        assert_eq!(g1, g2);
    }

    #[test]
    fn sgd_identities() {
        let w = WeakLearner::init(cfg(8, 4, 3), 2).unwrap();
        let x = random_x(8, 5);
        let (_, g) = w
            .boosted_loss_and_grad(&x, &LogitPair::zeros(3), 1, Some(2), &ALL_LEGAL)
            .unwrap();
        assert_eq!(w.sgd_step(&g, 0.0).unwrap(), w);
        let mut zero = g.clone();
        zero.fill(0.0);
        assert_eq!(w.sgd_step(&zero, 0.5).unwrap(), w);
        let other = Params::zeros(&cfg(8, 0, 3));
        assert!(w.sgd_step(&other, 0.1).is_err());
    }

    #[test]
    fn sgd_decreases_convex_loss() {
        let mut c = cfg(8, 0, 3);
        c.l2_penalty = 1e-3;
        let w = WeakLearner::init(c, 11).unwrap();
        let x = random_x(8, 12);
        let frozen = LogitPair::zeros(3);
        let (before, g) = w
            .boosted_loss_and_grad(&x, &frozen, 3, Some(2), &ALL_LEGAL)
            .unwrap();
        let next = w.sgd_step(&g, 0.05).unwrap();
        let (after, _) = next
            .boosted_loss_and_grad(&x, &frozen, 3, Some(2), &ALL_LEGAL)
            .unwrap();
        assert!(after < before, "{after} >= {before}");
    }
}
