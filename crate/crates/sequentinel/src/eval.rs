//! Accuracy, ROC curves, AUC, and TPR at a fixed FPR budget.
//!
//! ROC construction follows the standard threshold-sweep convention: a
//! sample is predicted positive when `score >= threshold`, samples sharing
//! a score cross the threshold together, and the curve carries `+inf` and
//! `-inf` sentinel endpoints so it always spans (0,0) to (1,1). AUC is the
//! trapezoidal area under the swept points.

use crate::data::LabeledSequence;
use crate::error::{Error, Result};
use crate::models::SequenceModel;
use rayon::prelude::*;
use std::path::{Path, PathBuf};

/// One operating point of a ROC curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RocPoint {
    pub threshold: f64,
    pub fpr: f64,
    pub tpr: f64,
}

/// Threshold sweep ordered by descending threshold, plus the area under it.
#[derive(Clone, Debug)]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
    pub auc: f64,
}

/// Scores every sequence, preserving input order. Runs in parallel; the
/// result is independent of thread count.
pub fn score_set(model: &SequenceModel, seqs: &[LabeledSequence]) -> Result<Vec<(f64, bool)>> {
    seqs.par_iter()
        .map(|s| Ok((model.score(&s.events)?, s.label)))
        .collect()
}

/// Fraction of samples whose thresholded prediction matches the label.
/// Scores equal to the threshold predict positive.
pub fn accuracy(scored: &[(f64, bool)], threshold: f64) -> Result<f64> {
    if scored.is_empty() {
        return Err(Error::contract("accuracy: empty scored set"));
    }
    let correct = scored
        .iter()
        .filter(|(score, label)| (*score >= threshold) == *label)
        .count();
    Ok(correct as f64 / scored.len() as f64)
}

/// Sweeps thresholds over the distinct scores (ties grouped) and returns
/// the full curve. Requires at least one positive and one negative sample.
pub fn roc_curve(scored: &[(f64, bool)]) -> Result<RocCurve> {
    let positives = scored.iter().filter(|(_, l)| *l).count();
    let negatives = scored.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::contract(format!(
            "roc_curve: need both classes, got {positives} positive and {negatives} negative"
        )));
    }

    let mut sorted: Vec<(f64, bool)> = scored.to_vec();
    sorted.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("finite scores"));

    let mut points = vec![RocPoint {
        threshold: f64::INFINITY,
        fpr: 0.0,
        tpr: 0.0,
    }];
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut i = 0;
    while i < sorted.len() {
        let score = sorted[i].0;
        while i < sorted.len() && sorted[i].0 == score {
            if sorted[i].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push(RocPoint {
            threshold: score,
            fpr: fp as f64 / negatives as f64,
            tpr: tp as f64 / positives as f64,
        });
    }
    points.push(RocPoint {
        threshold: f64::NEG_INFINITY,
        fpr: 1.0,
        tpr: 1.0,
    });

    let mut auc = 0.0;
    for pair in points.windows(2) {
        let dx = pair[1].fpr - pair[0].fpr;
        auc += dx * (pair[0].tpr + pair[1].tpr) / 2.0;
    }
    Ok(RocCurve { points, auc })
}

/// Maximum TPR among operating points with `fpr <= fpr_target`. No
/// interpolation: this is the best rate achievable under a hard FP budget.
pub fn tpr_at_fpr(curve: &RocCurve, fpr_target: f64) -> f64 {
    curve
        .points
        .iter()
        .filter(|p| p.fpr <= fpr_target)
        .map(|p| p.tpr)
        .fold(0.0, f64::max)
}

// ── emission ────────────────────────────────────────────────────────────

/// Everything known about one evaluated model.
#[derive(Clone, Debug)]
pub struct ModelEval {
    pub name: String,
    pub accuracy: f64,
    /// Absent when the scored set had a single class.
    pub curve: Option<RocCurve>,
}

/// Files written by [`emit_results`].
#[derive(Clone, Debug)]
pub struct EmitPaths {
    pub metrics: PathBuf,
    pub roc_points: PathBuf,
    pub plot: Option<PathBuf>,
}

/// Writes the metrics table, the ROC point lists, and an SVG plot with the
/// FPR axis clipped at 2%. The plot is a convenience artifact; the two
/// text files are the stable interface.
pub fn emit_results(dir: &Path, evals: &[ModelEval]) -> Result<EmitPaths> {
    std::fs::create_dir_all(dir)?;

    let metrics = dir.join("metrics.tsv");
    let mut table = String::from("model\taccuracy\ttpr_at_1pct\tauc\n");
    for e in evals {
        let (tpr1, auc) = match &e.curve {
            Some(c) => (
                format!("{}", tpr_at_fpr(c, 0.01)),
                format!("{}", c.auc),
            ),
            None => ("nan".into(), "nan".into()),
        };
        table.push_str(&format!("{}\t{}\t{}\t{}\n", e.name, e.accuracy, tpr1, auc));
    }
    std::fs::write(&metrics, table)?;

    let roc_points = dir.join("roc_points.tsv");
    let mut rows = String::from("model\tthreshold\tfpr\ttpr\n");
    for e in evals {
        if let Some(c) = &e.curve {
            for p in &c.points {
                rows.push_str(&format!(
                    "{}\t{}\t{}\t{}\n",
                    e.name, p.threshold, p.fpr, p.tpr
                ));
            }
        }
    }
    std::fs::write(&roc_points, rows)?;

    let with_curves: Vec<&ModelEval> = evals.iter().filter(|e| e.curve.is_some()).collect();
    let plot = if with_curves.is_empty() {
        None
    } else {
        let path = dir.join("roc.svg");
        std::fs::write(&path, render_roc_svg(&with_curves))?;
        Some(path)
    };

    Ok(EmitPaths {
        metrics,
        roc_points,
        plot,
    })
}

const SVG_COLORS: &[&str] = &[
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2",
];

/// Renders the curves with the x axis clipped at FPR 0.02.
fn render_roc_svg(evals: &[&ModelEval]) -> String {
    const W: f64 = 640.0;
    const H: f64 = 480.0;
    const M: f64 = 56.0;
    const X_MAX: f64 = 0.02;
    let px = |fpr: f64| M + (fpr / X_MAX).min(1.0) * (W - 2.0 * M);
    let py = |tpr: f64| H - M - tpr * (H - 2.0 * M);

    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" \
         viewBox=\"0 0 {W} {H}\" font-family=\"sans-serif\" font-size=\"12\">\n\
         <rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n"
    );
    // axes
    svg.push_str(&format!(
        "<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"black\"/>\n\
         <line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{3}\" stroke=\"black\"/>\n",
        M,
        H - M,
        W - M,
        M
    ));
    for i in 0..=4 {
        let fpr = X_MAX * i as f64 / 4.0;
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{:.3}</text>\n",
            px(fpr),
            H - M + 18.0,
            fpr
        ));
        let tpr = i as f64 / 4.0;
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{:.2}</text>\n",
            M - 8.0,
            py(tpr) + 4.0,
            tpr
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">false positive rate</text>\n\
         <text x=\"16\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">true positive rate</text>\n",
        W / 2.0,
        H - 12.0,
        H / 2.0,
        H / 2.0
    ));

    for (i, e) in evals.iter().enumerate() {
        let color = SVG_COLORS[i % SVG_COLORS.len()];
        let curve = e.curve.as_ref().expect("filtered to curves");
        let mut path = String::new();
        for p in &curve.points {
            if p.fpr > X_MAX && !path.is_empty() {
                // include the first point past the clip so the line exits
                // the frame instead of stopping short
                path.push_str(&format!("L{:.2},{:.2} ", px(p.fpr), py(p.tpr)));
                break;
            }
            let cmd = if path.is_empty() { 'M' } else { 'L' };
            path.push_str(&format!("{cmd}{:.2},{:.2} ", px(p.fpr), py(p.tpr)));
        }
        svg.push_str(&format!(
            "<path d=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n",
            path.trim_end()
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" fill=\"{color}\">{}</text>\n",
            W - M - 150.0,
            M + 16.0 * (i + 1) as f64,
            e.name
        ));
    }
    svg.push_str("</svg>\n");
    svg
}
