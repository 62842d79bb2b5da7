//! Frame labeling under the proximity and visibility regimes, and the
//! mean-of-per-class-accuracy metric.
//!
//! Per-class accuracy for class `c` is the fraction of frames whose actual
//! label is `c` that were predicted as `c`; mAcc is the plain mean over the
//! two classes, so it does not move when one class is oversampled.

use std::fmt;
use std::io::Read;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Aabb2, Point2, Polygon2, Polyline3, SE3Pose};

/// Default labeling range, meters (ℓ∞).
pub const DEFAULT_RANGE: f64 = 20.0;
/// Default horizontal field of view of the ego-view camera, degrees.
pub const DEFAULT_FOV_DEG: f64 = 85.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Label {
    Changed,
    Unchanged,
}

impl Label {
    pub const ALL: [Label; 2] = [Label::Changed, Label::Unchanged];

    fn index(self) -> usize {
        match self {
            Label::Changed => 0,
            Label::Unchanged => 1,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Changed => "CHANGED",
            Label::Unchanged => "UNCHANGED",
        })
    }
}

impl std::str::FromStr for Label {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "CHANGED" | "1" => Ok(Label::Changed),
            "UNCHANGED" | "0" => Ok(Label::Unchanged),
            other => Err(Error::format("label", format!("unknown label {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EvalMode {
    Proximity,
    Visibility,
}

impl std::str::FromStr for EvalMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "PROXIMITY" => Ok(EvalMode::Proximity),
            "VISIBILITY" => Ok(EvalMode::Visibility),
            other => Err(Error::format("evaluation mode", format!("unknown mode {other:?}"))),
        }
    }
}

impl fmt::Display for EvalMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EvalMode::Proximity => "PROXIMITY",
            EvalMode::Visibility => "VISIBILITY",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ChangeClass {
    Crosswalk,
    LaneGeometry,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ChangeDirection {
    Addition,
    Deletion,
    Modification,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ChangeGeometry {
    Polygon(Polygon2),
    Polyline(Polyline3),
}

impl ChangeGeometry {
    pub fn vertices(&self) -> Vec<Point2> {
        match self {
            ChangeGeometry::Polygon(p) => p.vertices().to_vec(),
            ChangeGeometry::Polyline(l) => l.xy(),
        }
    }

    /// Whether any part of the entity lies inside the closed box.
    pub fn touches(&self, b: &Aabb2) -> bool {
        match self {
            ChangeGeometry::Polygon(p) => b.intersects_polygon(p),
            ChangeGeometry::Polyline(l) => b.intersects_polyline(l),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChangeAnnotation {
    pub geometry: ChangeGeometry,
    pub class: ChangeClass,
    pub direction: ChangeDirection,
}

/// CHANGED iff some annotation reaches into the ±`range` square around the
/// ego position (ℓ∞ distance ≤ range).
pub fn label_frame_proximity(ego: &SE3Pose, annotations: &[ChangeAnnotation], range: f64) -> Label {
    let square = Aabb2::around(ego.translation().xy(), range);
    if annotations.iter().any(|a| a.geometry.touches(&square)) {
        Label::Changed
    } else {
        Label::Unchanged
    }
}

/// CHANGED iff some annotation vertex lies within ℓ∞ `range` of the ego and
/// inside the horizontal wedge of half-angle `fov_deg / 2` about the ego
/// heading. Occlusion is not considered.
pub fn label_frame_visibility(ego: &SE3Pose, annotations: &[ChangeAnnotation], fov_deg: f64, range: f64) -> Label {
    let origin = ego.translation().xy();
    let heading = ego.yaw();
    let half = 0.5 * fov_deg.to_radians();
    let square = Aabb2::around(origin, range);
    let visible = |v: Point2| {
        if !square.contains(v) {
            return false;
        }
        let d = v - origin;
        if d.norm() == 0.0 {
            return true;
        }
        let mut bearing = d.y.atan2(d.x) - heading;
        bearing = (bearing + std::f64::consts::PI).rem_euclid(std::f64::consts::TAU) - std::f64::consts::PI;
        bearing.abs() <= half
    };
    if annotations.iter().any(|a| a.geometry.vertices().into_iter().any(visible)) {
        Label::Changed
    } else {
        Label::Unchanged
    }
}

pub fn label_frame(ego: &SE3Pose, annotations: &[ChangeAnnotation], mode: EvalMode, range: f64) -> Label {
    match mode {
        EvalMode::Proximity => label_frame_proximity(ego, annotations, range),
        EvalMode::Visibility => label_frame_visibility(ego, annotations, DEFAULT_FOV_DEG, range),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalFrame {
    pub ego: SE3Pose,
    pub mode: EvalMode,
    label: Label,
    pub prediction: Label,
}

impl EvalFrame {
    /// Labels the frame from the annotations; there is no other way to set it.
    pub fn new(ego: SE3Pose, annotations: &[ChangeAnnotation], mode: EvalMode, prediction: Label) -> Self {
        EvalFrame {
            ego,
            mode,
            label: label_frame(&ego, annotations, mode, DEFAULT_RANGE),
            prediction,
        }
    }

    pub fn label(&self) -> Label {
        self.label
    }
}

/// Counts indexed `[predicted][actual]`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix2 {
    pub counts: [[u64; 2]; 2],
}

impl ConfusionMatrix2 {
    pub fn from_pairs(pairs: impl IntoIterator<Item = (Label, Label)>) -> Self {
        let mut cm = ConfusionMatrix2::default();
        for (predicted, actual) in pairs {
            cm.add(predicted, actual, 1);
        }
        cm
    }

    pub fn add(&mut self, predicted: Label, actual: Label, n: u64) {
        self.counts[predicted.index()][actual.index()] += n;
    }

    pub fn get(&self, predicted: Label, actual: Label) -> u64 {
        self.counts[predicted.index()][actual.index()]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn actual_total(&self, actual: Label) -> u64 {
        Label::ALL.iter().map(|&p| self.get(p, actual)).sum()
    }
}

pub fn confusion(frames: &[EvalFrame]) -> ConfusionMatrix2 {
    ConfusionMatrix2::from_pairs(frames.iter().map(|f| (f.prediction, f.label)))
}

/// Exact per-class accuracy as a fraction.
pub fn per_class_accuracy_exact(cm: &ConfusionMatrix2, class: Label) -> Result<Ratio<u64>> {
    let total = cm.actual_total(class);
    if total == 0 {
        return Err(Error::DivisionUndefined(class));
    }
    Ok(Ratio::new(cm.get(class, class), total))
}

pub fn per_class_accuracy(cm: &ConfusionMatrix2, class: Label) -> Result<f64> {
    let r = per_class_accuracy_exact(cm, class)?;
    Ok(*r.numer() as f64 / *r.denom() as f64)
}

pub fn mean_accuracy_exact(cm: &ConfusionMatrix2) -> Result<Ratio<u64>> {
    let a = per_class_accuracy_exact(cm, Label::Changed)?;
    let b = per_class_accuracy_exact(cm, Label::Unchanged)?;
    Ok((a + b) / 2)
}

pub fn mean_accuracy(cm: &ConfusionMatrix2) -> Result<f64> {
    let r = mean_accuracy_exact(cm)?;
    Ok(*r.numer() as f64 / *r.denom() as f64)
}

/// Mean of the diagonal after dividing each column (actual class) by its
/// sum. Algebraically identical to [`mean_accuracy`]; kept as a cross-check.
pub fn mean_accuracy_column_normalized(cm: &ConfusionMatrix2) -> Result<f64> {
    let mut normalized = [[0.0f64; 2]; 2];
    for actual in Label::ALL {
        let col = cm.actual_total(actual);
        if col == 0 {
            return Err(Error::DivisionUndefined(actual));
        }
        for predicted in Label::ALL {
            normalized[predicted.index()][actual.index()] = cm.get(predicted, actual) as f64 / col as f64;
        }
    }
    Ok(0.5 * (normalized[0][0] + normalized[1][1]))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    #[serde(rename = "mAcc")]
    pub m_acc: f64,
    pub acc_changed: f64,
    pub acc_unchanged: f64,
    /// `[predicted][actual]`, index 0 = CHANGED.
    pub counts: [[u64; 2]; 2],
}

pub fn metrics_report(cm: &ConfusionMatrix2) -> Result<MetricsReport> {
    Ok(MetricsReport {
        m_acc: mean_accuracy(cm)?,
        acc_changed: per_class_accuracy(cm, Label::Changed)?,
        acc_unchanged: per_class_accuracy(cm, Label::Unchanged)?,
        counts: cm.counts,
    })
}

/// One row of the predictions CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRow {
    pub log_id: String,
    pub timestamp_ns: i64,
    pub mode: EvalMode,
    pub label: Label,
    pub prediction: Label,
}

/// Parses `log_id,timestamp_ns,mode,label,prediction` (header required).
pub fn read_predictions_csv(reader: impl Read) -> Result<Vec<PredictionRow>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::format("predictions csv", e.to_string()))?;
        if rec.len() != 5 {
            return Err(Error::format("predictions csv", format!("expected 5 columns, got {}", rec.len())));
        }
        rows.push(PredictionRow {
            log_id: rec[0].to_string(),
            timestamp_ns: rec[1]
                .parse()
                .map_err(|_| Error::format("predictions csv", format!("bad timestamp {:?}", &rec[1])))?,
            mode: rec[2].parse()?,
            label: rec[3].parse()?,
            prediction: rec[4].parse()?,
        });
    }
    Ok(rows)
}
