//! Python bindings: treebanks, training, parsing and scoring.

use std::path::PathBuf;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use rstboost::boosting::{self, BoostConfig, BoostedEnsemble};
use rstboost::encoder::{EncoderConfig, TruncationStrategy};
use rstboost::metrics::{self, ParsevalScores};
use rstboost::transition::{self, render_trace};
use rstboost::treebank::{self, Document, SynthConfig};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn scores_dict<'py>(py: Python<'py>, s: &ParsevalScores) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    for (k, v) in [
        ("span_p", s.span_p),
        ("span_r", s.span_r),
        ("span_f1", s.span_f1),
        ("nuc_p", s.nuc_p),
        ("nuc_r", s.nuc_r),
        ("nuc_f1", s.nuc_f1),
        ("rel_p", s.rel_p),
        ("rel_r", s.rel_r),
        ("rel_f1", s.rel_f1),
    ] {
        d.set_item(k, v)?;
    }
    Ok(d)
}

/// A collection of documents with gold discourse trees.
#[pyclass(name = "Treebank", module = "rstboost_py", from_py_object)]
#[derive(Clone)]
struct PyTreebank {
    inner: treebank::Treebank,
}

#[pymethods]
impl PyTreebank {
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        treebank::load_treebank(&path)
            .map(|inner| PyTreebank { inner })
            .map_err(|e| match e {
                treebank::TreebankError::Io { .. } => PyIOError::new_err(e.to_string()),
                other => value_err(other),
            })
    }

    #[staticmethod]
    #[pyo3(signature = (text, name = "treebank"))]
    fn from_text(text: &str, name: &str) -> PyResult<Self> {
        treebank::parse_treebank(text, name)
            .map(|inner| PyTreebank { inner })
            .map_err(value_err)
    }

    fn to_text(&self) -> String {
        treebank::render_treebank(&self.inner)
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        treebank::save_treebank(&self.inner, &path).map_err(|e| PyIOError::new_err(e.to_string()))
    }

    #[getter]
    fn name(&self) -> &str {
        &self.inner.name
    }

    #[getter]
    fn domain_tag(&self) -> &str {
        &self.inner.domain_tag
    }

    #[getter]
    fn relations(&self) -> Vec<String> {
        self.inner.relation_inventory.clone()
    }

    /// `(doc_id, bracketed tree)` pairs.
    fn documents(&self) -> Vec<(String, String)> {
        self.inner
            .entries
            .iter()
            .map(|(d, t)| (d.doc_id.clone(), treebank::serialize_bracketed(d, t)))
            .collect()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Treebank(name={:?}, domain={:?}, docs={})",
            self.inner.name,
            self.inner.domain_tag,
            self.inner.len()
        )
    }
}

/// A boosted ensemble of weak shift-reduce classifiers.
#[pyclass(name = "Model", module = "rstboost_py")]
struct PyModel {
    inner: BoostedEnsemble,
}

impl PyModel {
    fn prefix(&self, prefix: Option<usize>) -> PyResult<usize> {
        let m = prefix.unwrap_or(self.inner.len());
        if m == 0 || m > self.inner.len() {
            return Err(value_err(format!(
                "prefix must lie in 1..={}, got {m}",
                self.inner.len()
            )));
        }
        Ok(m)
    }
}

#[pymethods]
impl PyModel {
    /// Trains a boosted ensemble; returns `(model, per-step seconds)`.
    #[staticmethod]
    #[pyo3(signature = (
        treebank, n_steps = 5, hidden_dim = 16, seed = 0, learning_rate = 0.1,
        epochs_max = 30, hash_dim = 1024, max_span_tokens = 8, truncation = "nucleus"
    ))]
    #[allow(clippy::too_many_arguments)]
    fn train(
        treebank: &PyTreebank,
        n_steps: usize,
        hidden_dim: usize,
        seed: u64,
        learning_rate: f64,
        epochs_max: usize,
        hash_dim: usize,
        max_span_tokens: usize,
        truncation: &str,
    ) -> PyResult<(Self, Vec<f64>)> {
        let truncation_strategy = match truncation {
            "nucleus" => TruncationStrategy::Nucleus,
            "center" => TruncationStrategy::Center,
            other => return Err(value_err(format!("unknown truncation `{other}`"))),
        };
        let cfg = BoostConfig {
            n_steps,
            hidden_dim,
            seed,
            learning_rate,
            epochs_max,
            ..BoostConfig::default()
        };
        let enc = EncoderConfig {
            hash_dim,
            max_span_tokens,
            truncation_strategy,
            ..EncoderConfig::default()
        };
        let (inner, report) = boosting::train(&treebank.inner, &cfg, &enc).map_err(value_err)?;
        let seconds = report.steps.iter().map(|s| s.seconds).collect();
        Ok((PyModel { inner }, seconds))
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        BoostedEnsemble::load(&path)
            .map(|inner| PyModel { inner })
            .map_err(value_err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        BoostedEnsemble::from_json(text)
            .map(|inner| PyModel { inner })
            .map_err(value_err)
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(value_err)
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        self.inner
            .save(&path)
            .map_err(|e| PyIOError::new_err(e.to_string()))
    }

    #[getter]
    fn n_steps(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn param_count(&self) -> usize {
        self.inner.param_count()
    }

    #[getter]
    fn relations(&self) -> Vec<String> {
        self.inner.relation_inventory().to_vec()
    }

    /// Parses a document given as a list of EDU strings; returns
    /// `(bracketed tree, action trace lines)`.
    #[pyo3(signature = (edus, prefix = None))]
    fn parse(&self, edus: Vec<String>, prefix: Option<usize>) -> PyResult<(String, Vec<String>)> {
        let m = self.prefix(prefix)?;
        if edus.is_empty() {
            return Err(value_err("a document needs at least one EDU"));
        }
        let doc = Document::from_texts("", &edus);
        let (tree, actions) = self.inner.parse_with_trace(m, &doc).map_err(value_err)?;
        let trace = render_trace(&actions).lines().map(str::to_string).collect();
        Ok((treebank::serialize_bracketed(&doc, &tree), trace))
    }

    #[pyo3(signature = (treebank, prefix = None))]
    fn evaluate<'py>(
        &self,
        py: Python<'py>,
        treebank: &PyTreebank,
        prefix: Option<usize>,
    ) -> PyResult<Bound<'py, PyDict>> {
        let m = self.prefix(prefix)?;
        let s = metrics::evaluate_treebank(&self.inner, m, &treebank.inner).map_err(value_err)?;
        scores_dict(py, &s)
    }

    /// Boosting curve over every prefix as CSV text.
    fn curve(&self, treebanks: Vec<PyTreebank>) -> PyResult<String> {
        let tbs: Vec<_> = treebanks.into_iter().map(|t| t.inner).collect();
        metrics::boost_curve(&self.inner, &tbs, self.inner.training_domain())
            .map(|t| t.to_csv())
            .map_err(value_err)
    }
}

/// Generates a synthetic treebank for a domain tag.
#[pyfunction]
#[pyo3(signature = (domain = "a", n_docs = 200, seed = 0))]
fn synthesize(domain: &str, n_docs: usize, seed: u64) -> PyResult<PyTreebank> {
    let cfg = SynthConfig {
        n_docs,
        ..SynthConfig::for_domain(domain)
    };
    treebank::synthesize_treebank(&cfg, seed)
        .map(|inner| PyTreebank { inner })
        .map_err(value_err)
}

/// Parseval scores of two bracketed trees over the same document.
#[pyfunction]
fn score<'py>(py: Python<'py>, gold: &str, pred: &str) -> PyResult<Bound<'py, PyDict>> {
    let (_, g) = treebank::parse_bracketed(gold).map_err(value_err)?;
    let (_, p) = treebank::parse_bracketed(pred).map_err(value_err)?;
    let s = metrics::score(&g, &p).map_err(value_err)?;
    scores_dict(py, &s)
}

/// Gold action sequence of a bracketed tree, one action per string.
#[pyfunction]
fn oracle(bracketed: &str) -> PyResult<Vec<String>> {
    let (_, tree) = treebank::parse_bracketed(bracketed).map_err(value_err)?;
    Ok(transition::oracle(&tree)
        .iter()
        .map(|a| a.to_string())
        .collect())
}

/// Validity violations of a bracketed tree; empty when valid.
#[pyfunction]
fn validate(bracketed: &str) -> PyResult<Vec<String>> {
    let (doc, tree) = treebank::parse_bracketed(bracketed).map_err(value_err)?;
    Ok(treebank::validate(&doc, &tree))
}

#[pyfunction]
fn truncate_center(tokens: Vec<String>, max_len: usize) -> Vec<String> {
    rstboost::encoder::truncate_center(&tokens, max_len)
}

#[pymodule]
fn rstboost_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyTreebank>()?;
    m.add_class::<PyModel>()?;
    m.add_function(wrap_pyfunction!(synthesize, m)?)?;
    m.add_function(wrap_pyfunction!(score, m)?)?;
    m.add_function(wrap_pyfunction!(oracle, m)?)?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    m.add_function(wrap_pyfunction!(truncate_center, m)?)?;
    Ok(())
}
