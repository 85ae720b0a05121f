use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::SimConfigSpec;
use crate::criteria::{evaluate, CriteriaOptions, Verdict};
use crate::dynamics::{simulate, Nonlinearity, SimResult, SimStatus, TimeProfile};
use crate::{Error, Result};

/// Parameter that a sweep axis varies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisKind {
    /// Exponent of every power term.
    P,
    /// Exponent of every log-power term.
    Q,
    /// Time exponent of every power term.
    R,
    /// Time exponent of every log-power term.
    S,
    Alpha,
    Amplitude,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub axis: AxisKind,
    pub values: Vec<f64>,
}

/// One rung of the escalation ladder.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EscalationLevel {
    pub horizon: f64,
    /// Domain extent (half width or radius); by default the larger of the
    /// base extent and `6 T^{1/(2-alpha)}`, at the base spacing.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extent: Option<f64>,
}

pub fn default_ladder() -> Vec<EscalationLevel> {
    [10.0, 100.0, 1000.0]
        .iter()
        .map(|&horizon| EscalationLevel {
            horizon,
            extent: None,
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub base: SimConfigSpec,
    pub axes: Vec<Axis>,
    #[serde(default = "default_ladder")]
    pub escalation: Vec<EscalationLevel>,
    /// When present, the analytic criteria are evaluated at every point.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub criteria: Option<CriteriaOptions>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.axes.is_empty() || self.axes.len() > 2 {
            return Err(Error::input("a sweep needs one or two axes"));
        }
        for a in &self.axes {
            if a.values.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(Error::input(format!(
                    "{:?} grid must increase strictly",
                    a.axis
                )));
            }
        }
        if self.axes.len() == 2 && self.axes[0].axis == self.axes[1].axis {
            return Err(Error::input("sweep axes must differ"));
        }
        check_ladder(&self.escalation)
    }

    /// Axis values of every grid point, first axis outermost.
    pub fn points(&self) -> Vec<Vec<f64>> {
        let first = &self.axes[0].values;
        match self.axes.get(1) {
            None => first.iter().map(|&v| vec![v]).collect(),
            Some(second) => first
                .iter()
                .flat_map(|&a| second.values.iter().map(move |&b| vec![a, b]))
                .collect(),
        }
    }

    /// Base spec with the axis values of one point applied.
    pub fn at(&self, values: &[f64]) -> Result<SimConfigSpec> {
        let mut spec = self.base.clone();
        for (axis, &v) in self.axes.iter().zip(values) {
            apply_axis(&mut spec, axis.axis, v)?;
        }
        Ok(spec)
    }
}

fn check_ladder(ladder: &[EscalationLevel]) -> Result<()> {
    if ladder.is_empty() {
        return Err(Error::input("escalation ladder is empty"));
    }
    if ladder.windows(2).any(|w| !(w[1].horizon > w[0].horizon)) || !(ladder[0].horizon > 0.0) {
        return Err(Error::input(
            "escalation horizons must be positive and increase strictly",
        ));
    }
    Ok(())
}

fn apply_axis(spec: &mut SimConfigSpec, axis: AxisKind, v: f64) -> Result<()> {
    let is_power = |n: &Nonlinearity| matches!(n, Nonlinearity::Power(_));
    match axis {
        AxisKind::P | AxisKind::Q => {
            for term in &mut spec.forcings {
                match (axis, term.nonlinearity) {
                    (AxisKind::P, Nonlinearity::Power(_)) => {
                        term.nonlinearity = Nonlinearity::power(v)?
                    }
                    (AxisKind::Q, Nonlinearity::LogPower(_)) => {
                        term.nonlinearity = Nonlinearity::log_power(v)?
                    }
                    _ => {}
                }
            }
        }
        AxisKind::R | AxisKind::S => {
            for term in &mut spec.forcings {
                if is_power(&term.nonlinearity) == (axis == AxisKind::R)
                    && term.profile != TimeProfile::Zero
                {
                    term.profile = TimeProfile::power_law(v)?;
                }
            }
        }
        AxisKind::Alpha => spec.weight = spec.weight.with_alpha(v)?,
        AxisKind::Amplitude => spec.initial = spec.initial.with_amplitude(v)?,
    }
    Ok(())
}

/// Outcome of the escalation ladder at one point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Classification {
    BlowUp { t_star: f64 },
    GlobalLike { horizon: f64 },
    Undetermined,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub axes: Vec<f64>,
    pub classification: Classification,
    /// Horizon of the last rung that was run.
    pub horizon: f64,
    pub index_i: Option<f64>,
    pub certificate_tau: Option<f64>,
    pub verdict: Option<Verdict>,
    pub reason: Option<String>,
}

/// Whether the sup norm never increases over `[T/10, T]`.
pub fn decays_over_last_decade(result: &SimResult) -> bool {
    let t0 = 0.1 * result.horizon;
    let tail: Vec<f64> = result
        .history
        .iter()
        .filter(|h| h.t >= t0)
        .map(|h| h.sup)
        .collect();
    tail.len() >= 2 && tail.windows(2).all(|w| w[1] <= w[0])
}

fn level_extent(spec: &SimConfigSpec, level: &EscalationLevel) -> f64 {
    level.extent.unwrap_or_else(|| {
        let reach = 6.0 * level.horizon.powf(1.0 / spec.weight.scaling_exponent());
        spec.grid.extent().max(reach)
    })
}

/// Runs `spec` up the ladder.
///
/// `BlowUp` as soon as a rung crosses the blow-up threshold. `GlobalLike`
/// if the last rung completes and either its sup norm does not increase over
/// its last decade or the criteria certify global existence. Otherwise
/// `Undetermined`.
pub fn classify_point(
    spec: &SimConfigSpec,
    ladder: &[EscalationLevel],
    criteria: Option<&CriteriaOptions>,
) -> PhasePoint {
    let mut point = PhasePoint {
        axes: Vec::new(),
        classification: Classification::Undetermined,
        horizon: 0.0,
        index_i: None,
        certificate_tau: None,
        verdict: None,
        reason: None,
    };
    if let Err(e) = check_ladder(ladder) {
        point.reason = Some(e.to_string());
        return point;
    }
    if let Some(opts) = criteria {
        let last = ladder[ladder.len() - 1];
        let report = spec
            .grid_with_extent(level_extent(spec, &last))
            .and_then(|g| spec.build_on(g, last.horizon))
            .and_then(|c| evaluate(&c, opts));
        match report {
            Ok(r) => {
                point.index_i = r.smallness_index;
                point.certificate_tau = r.certificate_tau;
                point.verdict = Some(r.verdict);
            }
            Err(e) => point.reason = Some(format!("criteria: {e}")),
        }
    }
    let mut last: Option<SimResult> = None;
    for level in ladder {
        point.horizon = level.horizon;
        let run = spec
            .grid_with_extent(level_extent(spec, level))
            .and_then(|g| spec.build_on(g, level.horizon))
            .and_then(|c| simulate(&c));
        match run {
            Err(e) => {
                point.reason = Some(e.to_string());
                return point;
            }
            Ok(r) => {
                if let SimStatus::BlownUp(t) = r.status {
                    point.classification = Classification::BlowUp { t_star: t };
                    return point;
                }
                last = Some(r);
            }
        }
    }
    let decayed = last.as_ref().is_some_and(decays_over_last_decade);
    if decayed || point.verdict == Some(Verdict::GlobalBySmallness) {
        point.classification = Classification::GlobalLike {
            horizon: point.horizon,
        };
    } else if point.reason.is_none() {
        point.reason = Some("completed without decay over the last decade".into());
    }
    point
}

/// Classifies every grid point on a pool of `workers` threads. Output order
/// is the grid order whatever the scheduling.
pub fn run_sweep(spec: &SweepSpec, workers: usize) -> Result<Vec<PhasePoint>> {
    spec.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::input(format!("cannot start worker pool: {e}")))?;
    let points = spec.points();
    let ladder = &spec.escalation;
    let criteria = spec.criteria.as_ref();
    Ok(pool.install(|| {
        points
            .par_iter()
            .map(|values| {
                let mut p = match spec.at(values) {
                    Ok(s) => classify_point(&s, ladder, criteria),
                    Err(e) => PhasePoint {
                        axes: Vec::new(),
                        classification: Classification::Undetermined,
                        horizon: 0.0,
                        index_i: None,
                        certificate_tau: None,
                        verdict: None,
                        reason: Some(e.to_string()),
                    },
                };
                p.axes = values.clone();
                p
            })
            .collect()
    }))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassTag {
    BlowUp,
    GlobalLike,
    Undetermined,
}

/// One CSV line of a sweep; the same struct is the JSON row schema.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub axis1: f64,
    pub axis2: Option<f64>,
    pub classification: ClassTag,
    pub t_star: Option<f64>,
    pub horizon: f64,
    #[serde(rename = "index_I")]
    pub index_i: Option<f64>,
    pub certificate_tau: Option<f64>,
}

pub const CSV_HEADER: [&str; 7] = [
    "axis1",
    "axis2",
    "classification",
    "t_star",
    "horizon",
    "index_I",
    "certificate_tau",
];

impl From<&PhasePoint> for SweepRow {
    fn from(p: &PhasePoint) -> Self {
        let (classification, t_star) = match p.classification {
            Classification::BlowUp { t_star } => (ClassTag::BlowUp, Some(t_star)),
            Classification::GlobalLike { .. } => (ClassTag::GlobalLike, None),
            Classification::Undetermined => (ClassTag::Undetermined, None),
        };
        SweepRow {
            axis1: p.axes.first().copied().unwrap_or(f64::NAN),
            axis2: p.axes.get(1).copied(),
            classification,
            t_star,
            horizon: p.horizon,
            index_i: p.index_i,
            certificate_tau: p.certificate_tau,
        }
    }
}

pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    w.write_record(CSV_HEADER)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<SweepRow>> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    if header != CSV_HEADER {
        return Err(Error::input(format!("unexpected sweep header {header:?}")));
    }
    r.deserialize().map(|row| Ok(row?)).collect()
}
