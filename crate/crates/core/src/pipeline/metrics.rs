// SPDX-License-Identifier: Apache-2.0

use std::time::Instant;

use serde::Serialize;

use crate::gnn::{predict, ModelParams, Sample};
use crate::node::Label;

use super::PipelineError;

/// Confusion counts with infected as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Counts {
    pub tp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub fp: usize,
    pub tn: usize,
}

impl Counts {
    pub fn record(&mut self, truth: Label, predicted: Label) {
        match (truth, predicted) {
            (Label::Infected, Label::Infected) => self.tp += 1,
            (Label::Infected, Label::Free) => self.fn_ += 1,
            (Label::Free, Label::Infected) => self.fp += 1,
            (Label::Free, Label::Free) => self.tn += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.tp + self.fn_ + self.fp + self.tn
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Metrics {
    pub precision: f64,
    pub recall: f64,
    pub f_beta: f64,
    pub beta: f64,
    /// Set when any ratio had a zero denominator and was reported as 0.
    pub zero_division: bool,
}

fn ratio(num: f64, den: f64, flag: &mut bool) -> f64 {
    if den == 0.0 {
        *flag = true;
        0.0
    } else {
        num / den
    }
}

pub fn metrics(c: Counts, beta: f64) -> Metrics {
    let mut zero_division = false;
    let precision = ratio(c.tp as f64, (c.tp + c.fp) as f64, &mut zero_division);
    let recall = ratio(c.tp as f64, (c.tp + c.fn_) as f64, &mut zero_division);
    let f_beta = f_beta(precision, recall, beta, &mut zero_division);
    Metrics { precision, recall, f_beta, beta, zero_division }
}

/// `(1 + b^2) P R / (b^2 P + R)`.
pub fn f_beta(precision: f64, recall: f64, beta: f64, zero_division: &mut bool) -> f64 {
    let b2 = beta * beta;
    ratio((1.0 + b2) * precision * recall, b2 * precision + recall, zero_division)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PredictionRecord {
    pub id: String,
    pub truth: Label,
    pub predicted: Label,
    pub p_infected: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvalTiming {
    /// Mean single-graph inference wall clock.
    pub detect_ms_per_sample: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub counts: Counts,
    pub metrics: Metrics,
    pub predictions: Vec<PredictionRecord>,
    pub timing: EvalTiming,
}

/// Scores `model` on labelled samples, one graph at a time.
pub fn evaluate(model: &ModelParams, test: &[(String, Sample)], beta: f64) -> Result<EvalReport, PipelineError> {
    if test.is_empty() {
        return Err(PipelineError::EmptyTestSet);
    }
    let mut counts = Counts::default();
    let mut predictions = Vec::with_capacity(test.len());
    let mut elapsed = 0.0;
    for (id, s) in test {
        let start = Instant::now();
        let p = predict(model, &s.input)?;
        elapsed += start.elapsed().as_secs_f64();
        counts.record(s.label, p.label);
        predictions.push(PredictionRecord {
            id: id.clone(),
            truth: s.label,
            predicted: p.label,
            p_infected: p.probs[0],
        });
    }
    Ok(EvalReport {
        counts,
        metrics: metrics(counts, beta),
        predictions,
        timing: EvalTiming { detect_ms_per_sample: 1e3 * elapsed / test.len() as f64 },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_and_degenerate() {
        let m = metrics(Counts { tp: 3, fn_: 0, fp: 0, tn: 4 }, 1.0);
        assert_eq!((m.precision, m.recall, m.f_beta, m.zero_division), (1.0, 1.0, 1.0, false));
        // everything called infected on a balanced fold
        let m = metrics(Counts { tp: 5, fn_: 0, fp: 5, tn: 0 }, 1.0);
        assert_eq!((m.precision, m.recall), (0.5, 1.0));
        let m = metrics(Counts { tp: 0, fn_: 0, fp: 0, tn: 4 }, 1.0);
        assert_eq!((m.precision, m.recall, m.f_beta, m.zero_division), (0.0, 0.0, 0.0, true));
    }

    #[test]
    fn beta_weights_recall() {
        let m2 = metrics(Counts { tp: 1, fn_: 0, fp: 3, tn: 0 }, 2.0);
        // P = 1/4, R = 1: 5 * 0.25 / (4 * 0.25 + 1)
        assert!((m2.f_beta - 0.625).abs() < 1e-15);
    }
}
