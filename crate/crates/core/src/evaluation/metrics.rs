use std::ops::Add;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Counts with malicious (label 1) as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    pub fn_: u64,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }
}

impl Add for ConfusionMatrix {
    type Output = ConfusionMatrix;

    fn add(self, o: ConfusionMatrix) -> ConfusionMatrix {
        ConfusionMatrix {
            tp: self.tp + o.tp,
            fp: self.fp + o.fp,
            tn: self.tn + o.tn,
            fn_: self.fn_ + o.fn_,
        }
    }
}

pub fn confusion(y_true: &[u8], y_pred: &[u8]) -> Result<ConfusionMatrix> {
    if y_true.len() != y_pred.len() {
        return Err(Error::InvalidArgument(format!(
            "{} true labels but {} predictions",
            y_true.len(),
            y_pred.len()
        )));
    }
    let mut c = ConfusionMatrix::default();
    for (&t, &p) in y_true.iter().zip(y_pred) {
        match (t, p) {
            (1, 1) => c.tp += 1,
            (0, 1) => c.fp += 1,
            (0, 0) => c.tn += 1,
            (1, 0) => c.fn_ += 1,
            _ => return Err(Error::InvalidArgument(format!("non-binary label pair ({t}, {p})"))),
        }
    }
    Ok(c)
}

/// The same ratios with benign as the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BenignView {
    pub prc: f64,
    pub rcl: f64,
    pub f1s: f64,
    pub fpr: f64,
}

/// Percentages in [0, 100]. `undefined` lists every ratio whose denominator
/// was zero; those are reported as 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub acc: f64,
    pub prc: f64,
    pub rcl: f64,
    pub f1s: f64,
    pub fpr: f64,
    pub macro_f1: f64,
    pub benign: BenignView,
    pub undefined: Vec<String>,
}

fn ratio(num: f64, den: f64, name: &str, undefined: &mut Vec<String>) -> f64 {
    if den == 0.0 {
        undefined.push(name.to_string());
        0.0
    } else {
        num / den
    }
}

fn f1(p: f64, r: f64, name: &str, undefined: &mut Vec<String>) -> f64 {
    ratio(2.0 * p * r, p + r, name, undefined)
}

pub fn metrics(c: &ConfusionMatrix) -> Result<Metrics> {
    if c.total() == 0 {
        return Err(Error::InvalidArgument("metrics of an empty confusion matrix".into()));
    }
    let (tp, fp, tn, fn_) = (c.tp as f64, c.fp as f64, c.tn as f64, c.fn_ as f64);
    let mut u = Vec::new();
    let acc = (tp + tn) / (tp + fp + tn + fn_);
    let prc = ratio(tp, tp + fp, "prc", &mut u);
    let rcl = ratio(tp, tp + fn_, "rcl", &mut u);
    let f1s = f1(prc, rcl, "f1s", &mut u);
    let fpr = ratio(fp, fp + tn, "fpr", &mut u);
    let b_prc = ratio(tn, tn + fn_, "benign.prc", &mut u);
    let b_rcl = ratio(tn, tn + fp, "benign.rcl", &mut u);
    let b_f1s = f1(b_prc, b_rcl, "benign.f1s", &mut u);
    let b_fpr = ratio(fn_, fn_ + tp, "benign.fpr", &mut u);
    Ok(Metrics {
        acc: 100.0 * acc,
        prc: 100.0 * prc,
        rcl: 100.0 * rcl,
        f1s: 100.0 * f1s,
        fpr: 100.0 * fpr,
        macro_f1: 100.0 * (f1s + b_f1s) / 2.0,
        benign: BenignView {
            prc: 100.0 * b_prc,
            rcl: 100.0 * b_rcl,
            f1s: 100.0 * b_f1s,
            fpr: 100.0 * b_fpr,
        },
        undefined: u,
    })
}
