//! Phase 2: one new value per adaptor from the feedback of phase 1.
//!
//! The values supporting a change are pooled and combined as
//!
//! ```text
//! u = 1/n · Σ vᵢ · l(|vᵢ − v̄|)
//! l(x) = (1 + (δ/q)·e^{b(x − 2δ)})^(−q/δ)
//! ```
//!
//! with v̄ and δ the mean and (population) standard deviation of the pool.
//! `l` is 1 at the mean's side of the spread and falls towards 0 for values
//! far from it, so outliers contribute little. When δ = 0 every weight is 1.

use std::collections::BTreeMap;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{Assignment, Ontology};
use crate::validation::FeedbackObject;

/// How pooled values relate to the adaptor's current value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UpdateMode {
    /// Pool the required values themselves; the update is the new value.
    Absolute,
    /// Pool `required − current`; the update is added to the current value.
    /// Because weights are at most 1, pooling absolute values shrinks the
    /// result towards zero, while pooling displacements shrinks only the
    /// step.
    #[default]
    Displacement,
}

impl FromStr for UpdateMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<UpdateMode> {
        match s {
            "absolute" => Ok(UpdateMode::Absolute),
            "displacement" => Ok(UpdateMode::Displacement),
            other => Err(Error::Config(format!(
                "unknown update mode `{other}` (expected absolute or displacement)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LearningParams {
    pub q: f64,
    pub b: f64,
    /// Also pool the evidence of adaptors found correct.
    pub include_consistent_evidence: bool,
    pub mode: UpdateMode,
}

impl Default for LearningParams {
    fn default() -> Self {
        LearningParams {
            q: 1.0,
            b: 1.0,
            include_consistent_evidence: false,
            mode: UpdateMode::default(),
        }
    }
}

impl LearningParams {
    pub fn check(&self) -> Result<()> {
        for (name, v) in [("q", self.q), ("b", self.b)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// Weight of a value at distance `x` from the pool mean, for a pool with
/// standard deviation `delta`.
pub fn sigmoid_weight(x: f64, delta: f64, params: &LearningParams) -> f64 {
    if delta == 0.0 {
        return 1.0;
    }
    // ln l = −(q/δ)·ln(1 + e^z), z = ln(δ/q) + b(x − 2δ); evaluated in log
    // space so large x neither overflows nor loses the tail.
    let z = (delta / params.q).ln() + params.b * (x - 2.0 * delta);
    let softplus = if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    };
    (-(params.q / delta) * softplus).exp().clamp(0.0, 1.0)
}

/// The values supporting a change of one adaptor.
#[derive(Debug, Clone, PartialEq)]
pub struct EvidencePool {
    pub adaptor: String,
    /// Sorted ascending, so results do not depend on feedback order.
    values: Vec<f64>,
    mean: f64,
    stddev: f64,
}

impl EvidencePool {
    pub fn new(adaptor: impl Into<String>, mut values: Vec<f64>) -> Result<EvidencePool> {
        let adaptor = adaptor.into();
        if values.is_empty() {
            return Err(Error::NoEvidence(adaptor));
        }
        values.sort_by(f64::total_cmp);
        let n = values.len() as f64;
        let (mean, stddev) = if values[0] == values[values.len() - 1] {
            // Summing can be off by an ulp, and l tends to e^-1 rather than 1
            // as δ → 0, so an all-equal pool must get exactly δ = 0.
            (values[0], 0.0)
        } else {
            let mean = values.iter().sum::<f64>() / n;
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
            (mean, var.sqrt())
        };
        Ok(EvidencePool {
            adaptor,
            values,
            mean,
            stddev,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn stddev(&self) -> f64 {
        self.stddev
    }
}

pub fn compute_update(pool: &EvidencePool, params: &LearningParams) -> f64 {
    if pool.stddev == 0.0 {
        // Every weight is 1.
        return pool.mean;
    }
    let n = pool.values.len() as f64;
    pool.values
        .iter()
        .map(|v| v * sigmoid_weight((v - pool.mean).abs(), pool.stddev, params))
        .sum::<f64>()
        / n
}

/// New values for the adaptors the feedback gives evidence against.
/// Adaptors whose value would not change are left out.
pub fn learn(
    feedback: &[FeedbackObject],
    ontology: &Ontology,
    params: &LearningParams,
) -> Result<Assignment> {
    params.check()?;
    let mut pools: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for fo in feedback {
        let adaptor = ontology
            .adaptor(&fo.adaptor)
            .ok_or_else(|| Error::UnknownAdaptor(fo.adaptor.clone()))?;
        let pooled = !fo.was_correct || params.include_consistent_evidence;
        if let (true, Some(required)) = (pooled, fo.required) {
            let value = match params.mode {
                UpdateMode::Absolute => required,
                UpdateMode::Displacement => required - adaptor.current,
            };
            pools.entry(&adaptor.id).or_default().push(value);
        }
    }

    let mut out = Assignment::new();
    for (id, values) in pools {
        let adaptor = ontology.adaptor(id).expect("pooled adaptors exist");
        let u = compute_update(&EvidencePool::new(id, values)?, params);
        let raw = match params.mode {
            UpdateMode::Absolute => u,
            UpdateMode::Displacement => adaptor.current + u,
        };
        let mut value = adaptor.domain.round(raw);
        if ontology.is_cardinality_adaptor(id) {
            value = value.max(0.0);
        }
        if value != adaptor.current {
            out.insert(id, value);
        }
    }
    Ok(out)
}
