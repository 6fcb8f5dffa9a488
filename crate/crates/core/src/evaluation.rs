//! Long-term tracking metrics: confidence-swept precision and recall, the
//! F-measure and F-score, success plot and AUC, center-error precision and
//! per-attribute aggregation.
//!
//! Counting rule for the threshold sweep: a frame counts at threshold `τ`
//! when the tracker reported a box with confidence `≥ τ`. A frame reported
//! absent never counts, whatever confidence it carries. Precision averages
//! IoU over counted frames (IoU 0 where the target is absent); recall sums
//! IoU over counted frames where the target is present and divides by the
//! number of target-present frames.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geometry::{center_distance_sq, iou, BBox};
use crate::scalar::Scalar;
use crate::simulator::Attribute;

/// One output frame: a box (or absence) and the confidence behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameRecord<T = f64> {
    pub bbox: Option<BBox<T>>,
    pub confidence: T,
}

impl<T: Scalar> FrameRecord<T> {
    pub fn present(bbox: BBox<T>, confidence: T) -> Self {
        Self {
            bbox: Some(bbox),
            confidence,
        }
    }

    pub fn absent(confidence: T) -> Self {
        Self {
            bbox: None,
            confidence,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PredictionTrack<T = f64> {
    pub records: Vec<FrameRecord<T>>,
}

impl<T: Scalar> PredictionTrack<T> {
    /// Rejects confidences outside `[0, 1]`.
    pub fn new(records: Vec<FrameRecord<T>>) -> Result<Self> {
        if let Some(i) = records
            .iter()
            .position(|r| !(r.confidence >= T::zero() && r.confidence <= T::one()))
        {
            return Err(Error::InvalidArgument(format!(
                "confidence {} on frame {i} outside [0, 1]",
                records[i].confidence
            )));
        }
        Ok(Self { records })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// The thresholds at which the F curve can change: every distinct
    /// confidence plus 0 and 1, ascending.
    pub fn sweep_thresholds(&self) -> Vec<T> {
        let mut t: Vec<T> = self
            .records
            .iter()
            .map(|r| r.confidence.clone())
            .chain([T::zero(), T::one()])
            .collect();
        t.sort_by(|a, b| a.partial_cmp(b).expect("confidences are ordered"));
        t.dedup();
        t
    }
}

/// A metric sampled at strictly increasing thresholds.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricCurve<T = f64> {
    thresholds: Vec<T>,
    values: Vec<T>,
}

impl<T: Scalar> MetricCurve<T> {
    pub fn new(thresholds: Vec<T>, values: Vec<T>) -> Result<Self> {
        if thresholds.len() != values.len() {
            return Err(Error::LengthMismatch {
                what: "curve values",
                got: values.len(),
                expected: thresholds.len(),
            });
        }
        if thresholds.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidArgument("curve thresholds must be strictly increasing".into()));
        }
        Ok(Self { thresholds, values })
    }

    pub fn thresholds(&self) -> &[T] {
        &self.thresholds
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Value at the largest threshold not above `tau`.
    pub fn at(&self, tau: &T) -> Option<T> {
        let n = self.thresholds.partition_point(|t| t <= tau);
        n.checked_sub(1).map(|i| self.values[i].clone())
    }
}

fn check_aligned<T>(pred: &PredictionTrack<T>, gt: &[Option<BBox<T>>]) -> Result<()> {
    if pred.records.len() != gt.len() {
        return Err(Error::LengthMismatch {
            what: "prediction track",
            got: pred.records.len(),
            expected: gt.len(),
        });
    }
    Ok(())
}

fn frame_iou<T: Scalar>(p: &Option<BBox<T>>, g: &Option<BBox<T>>) -> T {
    match (p, g) {
        (Some(p), Some(g)) => iou(p, g),
        _ => T::zero(),
    }
}

/// Precision and recall at each threshold.
pub fn pr_re_curves<T: Scalar>(
    pred: &PredictionTrack<T>,
    gt: &[Option<BBox<T>>],
    thresholds: &[T],
) -> Result<(MetricCurve<T>, MetricCurve<T>)> {
    check_aligned(pred, gt)?;
    let n_present = gt.iter().filter(|g| g.is_some()).count();
    // (confidence, iou, gt present) for boxed frames, by descending confidence
    let mut counted: Vec<(T, T, bool)> = pred
        .records
        .iter()
        .zip(gt)
        .filter(|(r, _)| r.bbox.is_some())
        .map(|(r, g)| (r.confidence.clone(), frame_iou(&r.bbox, g), g.is_some()))
        .collect();
    counted.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("confidences are ordered"));

    let mut order: Vec<usize> = (0..thresholds.len()).collect();
    order.sort_by(|&a, &b| thresholds[b].partial_cmp(&thresholds[a]).expect("thresholds are ordered"));
    let mut pr = vec![T::zero(); thresholds.len()];
    let mut re = vec![T::zero(); thresholds.len()];
    let (mut k, mut n_counted, mut sum_all, mut sum_present) = (0, 0usize, T::zero(), T::zero());
    for i in order {
        while k < counted.len() && counted[k].0 >= thresholds[i] {
            let (_, o, present) = &counted[k];
            sum_all = sum_all + o.clone();
            if *present {
                sum_present = sum_present + o.clone();
            }
            n_counted += 1;
            k += 1;
        }
        if n_counted > 0 {
            pr[i] = sum_all.clone() / T::from_usize_exact(n_counted);
        }
        if n_present > 0 {
            re[i] = sum_present.clone() / T::from_usize_exact(n_present);
        }
    }
    Ok((
        MetricCurve::new(thresholds.to_vec(), pr)?,
        MetricCurve::new(thresholds.to_vec(), re)?,
    ))
}

/// Harmonic combination of precision and recall; 0 when both are 0.
pub fn f_measure<T: Scalar>(pr: T, re: T) -> T {
    let s = pr.clone() + re.clone();
    if s.is_zero() {
        T::zero()
    } else {
        T::two() * pr * re / s
    }
}

/// F curve from aligned precision and recall curves.
pub fn f_curve<T: Scalar>(pr: &MetricCurve<T>, re: &MetricCurve<T>) -> Result<MetricCurve<T>> {
    if pr.thresholds != re.thresholds {
        return Err(Error::InvalidArgument("precision and recall curves are not aligned".into()));
    }
    let values = pr
        .values
        .iter()
        .zip(&re.values)
        .map(|(p, r)| f_measure(p.clone(), r.clone()))
        .collect();
    MetricCurve::new(pr.thresholds.clone(), values)
}

/// Maximum of the F curve and the smallest threshold attaining it.
pub fn f_score<T: Scalar>(pr: &MetricCurve<T>, re: &MetricCurve<T>) -> Result<(T, T)> {
    let f = f_curve(pr, re)?;
    let mut best: Option<(T, T)> = None;
    for (t, v) in f.thresholds.iter().zip(&f.values) {
        if best.as_ref().is_none_or(|(b, _)| v > b) {
            best = Some((v.clone(), t.clone()));
        }
    }
    best.ok_or(Error::Empty("F curve"))
}

/// Fraction of target-present frames with IoU strictly above each threshold
/// `k / n_thresholds` for `k = 0..n_thresholds`, and the curve mean. The grid
/// stops short of 1 so a perfect track scores exactly 1.
pub fn success_curve<T: Scalar>(
    pred: &PredictionTrack<T>,
    gt: &[Option<BBox<T>>],
    n_thresholds: usize,
) -> Result<(MetricCurve<T>, T)> {
    check_aligned(pred, gt)?;
    if n_thresholds < 2 {
        return Err(Error::InvalidArgument("success curve needs at least 2 thresholds".into()));
    }
    let ious: Vec<T> = pred
        .records
        .iter()
        .zip(gt)
        .filter(|(_, g)| g.is_some())
        .map(|(r, g)| frame_iou(&r.bbox, g))
        .collect();
    if ious.is_empty() {
        return Err(Error::Empty("target-present frames"));
    }
    let n = T::from_usize_exact(ious.len());
    let steps = T::from_usize_exact(n_thresholds);
    let thresholds: Vec<T> = (0..n_thresholds).map(|k| T::from_usize_exact(k) / steps.clone()).collect();
    let values: Vec<T> = thresholds
        .iter()
        .map(|t| T::from_usize_exact(ious.iter().filter(|o| *o > t).count()) / n.clone())
        .collect();
    let auc = values.iter().fold(T::zero(), |a, v| a + v.clone()) / T::from_usize_exact(n_thresholds);
    Ok((MetricCurve::new(thresholds, values)?, auc))
}

/// Fraction of target-present frames whose predicted center lies within
/// `dist_px` of the groundtruth center (boundary included).
pub fn precision_at<T: Scalar>(pred: &PredictionTrack<T>, gt: &[Option<BBox<T>>], dist_px: T) -> Result<T> {
    check_aligned(pred, gt)?;
    let limit = dist_px.clone() * dist_px;
    let (mut hits, mut total) = (0usize, 0usize);
    for (r, g) in pred.records.iter().zip(gt) {
        let Some(g) = g else { continue };
        total += 1;
        if r.bbox.as_ref().is_some_and(|p| center_distance_sq(p, g) <= limit) {
            hits += 1;
        }
    }
    if total == 0 {
        return Err(Error::Empty("target-present frames"));
    }
    Ok(T::from_usize_exact(hits) / T::from_usize_exact(total))
}

/// Headline metrics of one sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalReport {
    pub f_score: f64,
    pub best_tau: f64,
    pub pr_at_best: f64,
    pub re_at_best: f64,
    /// Recall at confidence threshold 0.5.
    pub re_at_half: f64,
    pub success_auc: f64,
    pub precision_at_20: f64,
}

impl EvalReport {
    pub const CSV_HEADER: &'static str =
        "f_score,best_tau,pr_at_best,re_at_best,re_at_0.5,success_auc,precision_at_20";

    pub fn csv_fields(&self) -> String {
        format!(
            "{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
            self.f_score,
            self.best_tau,
            self.pr_at_best,
            self.re_at_best,
            self.re_at_half,
            self.success_auc,
            self.precision_at_20
        )
    }
}

/// A report plus the curves it was read from.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub report: EvalReport,
    pub precision: MetricCurve,
    pub recall: MetricCurve,
    pub f: MetricCurve,
    pub success: MetricCurve,
}

pub const SUCCESS_THRESHOLDS: usize = 101;
pub const CENTER_ERROR_PX: f64 = 20.0;

/// All metrics of one sequence with the standard settings.
pub fn evaluate(pred: &PredictionTrack, gt: &[Option<BBox<f64>>]) -> Result<Evaluation> {
    let mut thresholds = pred.sweep_thresholds();
    if !thresholds.contains(&0.5) {
        thresholds.push(0.5);
        thresholds.sort_by(f64::total_cmp);
    }
    let (precision, recall) = pr_re_curves(pred, gt, &thresholds)?;
    // 0.5 may be an extra grid point; it never beats the breakpoints
    let sweep = pred.sweep_thresholds();
    let (ps, rs) = pr_re_curves(pred, gt, &sweep)?;
    let (f_score, best_tau) = f_score(&ps, &rs)?;
    let f = f_curve(&precision, &recall)?;
    let (success, success_auc) = success_curve(pred, gt, SUCCESS_THRESHOLDS)?;
    let report = EvalReport {
        f_score,
        best_tau,
        pr_at_best: ps.at(&best_tau).unwrap_or(0.0),
        re_at_best: rs.at(&best_tau).unwrap_or(0.0),
        re_at_half: recall.at(&0.5).unwrap_or(0.0),
        success_auc,
        precision_at_20: precision_at(pred, gt, CENTER_ERROR_PX)?,
    };
    Ok(Evaluation {
        report,
        precision,
        recall,
        f,
        success,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequenceReport {
    pub name: String,
    pub attributes: BTreeSet<Attribute>,
    pub report: EvalReport,
}

/// Mean metrics over the sequences sharing a tag (or all sequences).
#[derive(Debug, Clone, PartialEq)]
pub struct AttributeRow {
    /// An attribute name or `all`.
    pub label: String,
    pub sequences: usize,
    pub mean: EvalReport,
}

fn mean_report<'a>(reports: impl Iterator<Item = &'a EvalReport>) -> (usize, EvalReport) {
    let mut n = 0usize;
    let mut acc = [0.0f64; 7];
    for r in reports {
        n += 1;
        let fields = [
            r.f_score,
            r.best_tau,
            r.pr_at_best,
            r.re_at_best,
            r.re_at_half,
            r.success_auc,
            r.precision_at_20,
        ];
        for (a, v) in acc.iter_mut().zip(fields) {
            *a += v;
        }
    }
    let m = acc.map(|a| if n > 0 { a / n as f64 } else { 0.0 });
    (
        n,
        EvalReport {
            f_score: m[0],
            best_tau: m[1],
            pr_at_best: m[2],
            re_at_best: m[3],
            re_at_half: m[4],
            success_auc: m[5],
            precision_at_20: m[6],
        },
    )
}

/// `all` row first, then one row per attribute that occurs, in tag order.
/// Every metric is the unweighted mean over member sequences.
pub fn attribute_report(sequences: &[SequenceReport]) -> Result<Vec<AttributeRow>> {
    if sequences.is_empty() {
        return Err(Error::Empty("sequence reports"));
    }
    let (n, mean) = mean_report(sequences.iter().map(|s| &s.report));
    let mut rows = vec![AttributeRow {
        label: "all".into(),
        sequences: n,
        mean,
    }];
    for a in Attribute::ALL {
        let (n, mean) = mean_report(
            sequences
                .iter()
                .filter(|s| s.attributes.contains(&a))
                .map(|s| &s.report),
        );
        if n > 0 {
            rows.push(AttributeRow {
                label: a.to_string(),
                sequences: n,
                mean,
            });
        }
    }
    Ok(rows)
}

/// Parses an attribute list such as `FOC OV` or `FOC,OV`.
pub fn parse_attributes(text: &str) -> Result<BTreeSet<Attribute>> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(str::parse)
        .collect()
}

pub fn attribute_table_csv(rows: &[AttributeRow]) -> String {
    let mut out = format!("attribute,sequences,{}\n", EvalReport::CSV_HEADER);
    for r in rows {
        let _ = writeln!(out, "{},{},{}", r.label, r.sequences, r.mean.csv_fields());
    }
    out
}

pub fn summary_csv(sequences: &[SequenceReport]) -> String {
    let mut out = format!("sequence,attributes,{}\n", EvalReport::CSV_HEADER);
    for s in sequences {
        let tags: Vec<String> = s.attributes.iter().map(|a| a.to_string()).collect();
        let _ = writeln!(out, "{},{},{}", s.name, tags.join(" "), s.report.csv_fields());
    }
    out
}

/// One row per confidence threshold: precision, recall, F.
pub fn pr_curve_csv(e: &Evaluation) -> String {
    let mut out = String::from("threshold,precision,recall,f\n");
    for (i, t) in e.precision.thresholds().iter().enumerate() {
        let _ = writeln!(
            out,
            "{t:.6},{:.6},{:.6},{:.6}",
            e.precision.values()[i],
            e.recall.values()[i],
            e.f.values()[i]
        );
    }
    out
}

/// One row per overlap threshold.
pub fn success_curve_csv(e: &Evaluation) -> String {
    let mut out = String::from("overlap_threshold,success\n");
    for (t, v) in e.success.thresholds().iter().zip(e.success.values()) {
        let _ = writeln!(out, "{t:.6},{v:.6}");
    }
    out
}

/// Minimal SVG line plot of curves over the unit square.
pub fn curves_svg(title: &str, curves: &[(&str, &MetricCurve)]) -> String {
    const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];
    let (w, h, m) = (420.0, 320.0, 40.0);
    let px = |x: f64| m + x.clamp(0.0, 1.0) * (w - 2.0 * m);
    let py = |y: f64| h - m - y.clamp(0.0, 1.0) * (h - 2.0 * m);
    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" font-family=\"sans-serif\" font-size=\"12\">"
    );
    let _ = writeln!(s, "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>");
    let _ = writeln!(s, "<text x=\"{m}\" y=\"20\">{}</text>", escape(title));
    let _ = writeln!(
        s,
        "<rect x=\"{m}\" y=\"{m}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>",
        w - 2.0 * m,
        h - 2.0 * m
    );
    for (i, (name, c)) in curves.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let pts: Vec<String> = c
            .thresholds()
            .iter()
            .zip(c.values())
            .map(|(x, y)| format!("{:.2},{:.2}", px(*x), py(*y)))
            .collect();
        let _ = writeln!(
            s,
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>",
            pts.join(" ")
        );
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{}\" fill=\"{color}\">{}</text>",
            w - m - 90.0,
            m + 16.0 * (i + 1) as f64,
            escape(name)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
