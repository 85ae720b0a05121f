use std::fmt::Write;

use super::sweep::{AxisKind, Classification, PhasePoint, SweepSpec};
use crate::criteria::critical_exponents;

const CELL: f64 = 36.0;
const MARGIN: f64 = 80.0;

fn color(c: &Classification) -> &'static str {
    match c {
        Classification::BlowUp { .. } => "#d7301f",
        Classification::GlobalLike { .. } => "#2b8cbe",
        Classification::Undetermined => "#bdbdbd",
    }
}

/// Continuous cell index of `v` on the increasing grid `values`,
/// extrapolated linearly and clamped to the plotted band.
fn fractional_index(values: &[f64], v: f64) -> f64 {
    let n = values.len();
    let hi = n as f64 - 0.5;
    if n == 1 {
        return if v < values[0] {
            -0.5
        } else if v > values[0] {
            0.5
        } else {
            0.0
        };
    }
    let k = values.windows(2).position(|w| v <= w[1]).unwrap_or(n - 2);
    let (a, b) = (values[k], values[k + 1]);
    (k as f64 + (v - a) / (b - a)).clamp(-0.5, hi)
}

/// Critical exponent of the swept exponent for the given axis values.
fn star_at(spec: &SweepSpec, axis: AxisKind, values: &[f64]) -> Option<f64> {
    let s = spec.at(values).ok()?;
    let (p, q, _) = critical_exponents(&s.weight, &s.forcings);
    if axis == AxisKind::P {
        p
    } else {
        q
    }
}

/// Polyline, in plot coordinates, of the critical exponent over the grid.
fn critical_polyline(spec: &SweepSpec, nrow: usize) -> Option<(Vec<(f64, f64)>, String)> {
    let pos = spec
        .axes
        .iter()
        .position(|a| matches!(a.axis, AxisKind::P | AxisKind::Q))?;
    let axis = spec.axes[pos].axis;
    let label = if axis == AxisKind::P {
        "p_star"
    } else {
        "q_star"
    };
    let exp_values = &spec.axes[pos].values;
    let x_of = |idx: f64| MARGIN + (idx + 0.5) * CELL;
    let y_of = |idx: f64| MARGIN + (nrow as f64 - 0.5 - idx) * CELL;
    let mut pts = Vec::new();
    match spec.axes.len() {
        1 => {
            let star = star_at(spec, axis, &[exp_values[0]])?;
            let i = fractional_index(exp_values, star);
            pts.push((x_of(i), MARGIN));
            pts.push((x_of(i), MARGIN + nrow as f64 * CELL));
        }
        _ => {
            let other = &spec.axes[1 - pos].values;
            for (j, &ov) in other.iter().enumerate() {
                let mut vals = [0.0; 2];
                vals[pos] = exp_values[0];
                vals[1 - pos] = ov;
                let Some(star) = star_at(spec, axis, &vals) else {
                    continue;
                };
                let i = fractional_index(exp_values, star);
                let jf = j as f64;
                let ends: &[f64] = if other.len() == 1 {
                    &[-0.5, 0.5]
                } else if j == 0 {
                    &[-0.5, 0.0]
                } else if j + 1 == other.len() {
                    &[0.0, 0.5]
                } else {
                    &[0.0]
                };
                for &d in ends {
                    pts.push(if pos == 0 {
                        (x_of(i), y_of(jf + d))
                    } else {
                        (x_of(jf + d), y_of(i))
                    });
                }
            }
        }
    }
    (pts.len() >= 2).then(|| (pts, label.to_owned()))
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Heat map of classifications, first axis horizontal, with the critical
/// exponent drawn as a dashed line when one axis is `p` or `q`.
pub fn render_svg(spec: &SweepSpec, points: &[PhasePoint]) -> String {
    let xs: &[f64] = spec.axes.first().map_or(&[], |a| &a.values);
    let ys: &[f64] = spec.axes.get(1).map_or(&[0.0], |a| &a.values);
    let ncol = xs.len();
    let nrow = ys.len();
    let width = 2.0 * MARGIN + ncol as f64 * CELL + 140.0;
    let height = 2.0 * MARGIN + nrow as f64 * CELL;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (k, p) in points.iter().enumerate() {
        let (i, j) = if spec.axes.len() == 2 {
            (k / nrow, k % nrow)
        } else {
            (k, 0)
        };
        let x = MARGIN + i as f64 * CELL;
        let y = MARGIN + (nrow - 1 - j) as f64 * CELL;
        let title = match (&p.classification, &p.reason) {
            (Classification::BlowUp { t_star }, _) => format!("blow_up t*={t_star:.4}"),
            (Classification::GlobalLike { horizon }, _) => format!("global_like T={horizon}"),
            (Classification::Undetermined, Some(r)) => format!("undetermined: {}", escape(r)),
            (Classification::Undetermined, None) => "undetermined".to_owned(),
        };
        let _ = writeln!(
            s,
            r#"<rect x="{x}" y="{y}" width="{CELL}" height="{CELL}" fill="{}" stroke="white"><title>{title}</title></rect>"#,
            color(&p.classification)
        );
    }
    for (i, v) in xs.iter().enumerate() {
        let x = MARGIN + (i as f64 + 0.5) * CELL;
        let y = MARGIN + nrow as f64 * CELL + 14.0;
        let _ = writeln!(
            s,
            r#"<text x="{x}" y="{y}" text-anchor="middle">{v}</text>"#
        );
    }
    if let Some(a) = spec.axes.get(1) {
        for (j, v) in a.values.iter().enumerate() {
            let y = MARGIN + (nrow as f64 - 0.5 - j as f64) * CELL + 4.0;
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{y}" text-anchor="end">{v}</text>"#,
                MARGIN - 6.0
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle" transform="rotate(-90 {} {})">{:?}</text>"#,
            MARGIN - 50.0,
            MARGIN + nrow as f64 * CELL / 2.0,
            MARGIN - 50.0,
            MARGIN + nrow as f64 * CELL / 2.0,
            a.axis
        );
    }
    if let Some(a) = spec.axes.first() {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{:?}</text>"#,
            MARGIN + ncol as f64 * CELL / 2.0,
            MARGIN + nrow as f64 * CELL + 34.0,
            a.axis
        );
    }
    if ncol > 0 {
        if let Some((pts, label)) = critical_polyline(spec, nrow) {
            let path: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
            let _ = writeln!(
                s,
                r#"<polyline id="critical-line" points="{}" fill="none" stroke="black" stroke-width="2" stroke-dasharray="6,4"><title>{label}</title></polyline>"#,
                path.join(" ")
            );
        }
    }
    let lx = MARGIN + ncol as f64 * CELL + 20.0;
    for (k, (name, c)) in [
        ("blow_up", Classification::BlowUp { t_star: 0.0 }),
        ("global_like", Classification::GlobalLike { horizon: 0.0 }),
        ("undetermined", Classification::Undetermined),
    ]
    .iter()
    .enumerate()
    {
        let y = MARGIN + k as f64 * 20.0;
        let _ = writeln!(
            s,
            r#"<rect x="{lx}" y="{y}" width="12" height="12" fill="{}"/>"#,
            color(c)
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}">{name}</text>"#,
            lx + 18.0,
            y + 10.0
        );
    }
    let _ = writeln!(
        s,
        r#"<line x1="{lx}" y1="{y}" x2="{}" y2="{y}" stroke="black" stroke-width="2" stroke-dasharray="6,4"/><text x="{}" y="{}">critical exponent</text>"#,
        lx + 12.0,
        lx + 18.0,
        MARGIN + 64.0,
        y = MARGIN + 66.0
    );
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lab::sweep::{Axis, EscalationLevel};

    #[test]
    fn fractional_index_interpolates() {
        let v = [1.0, 2.0, 4.0];
        assert_eq!(fractional_index(&v, 1.5), 0.5);
        assert_eq!(fractional_index(&v, 3.0), 1.5);
        assert_eq!(fractional_index(&v, 100.0), 2.5);
        assert_eq!(fractional_index(&v, -100.0), -0.5);
    }

    #[test]
    fn line_sits_at_critical_exponent() {
        let base: crate::lab::SimConfigSpec = serde_json::from_str(
            r#"{"weight":{"case":"radial_power","alpha":0.0,"dim":1},
                "grid":{"geometry":"radial","radius":10.0,"nodes":11},
                "forcings":[{"profile":{"kind":"power_law","exponent":0.0},
                             "nonlinearity":{"kind":"power","p":2.0}}],
                "initial":{"kind":"constant","amplitude":0.0},"horizon":1.0}"#,
        )
        .unwrap();
        let spec = SweepSpec {
            base,
            axes: vec![
                Axis {
                    axis: AxisKind::P,
                    values: vec![2.0, 3.0, 4.0],
                },
                Axis {
                    axis: AxisKind::Amplitude,
                    values: vec![0.1, 1.0],
                },
            ],
            escalation: vec![EscalationLevel {
                horizon: 1.0,
                extent: None,
            }],
            criteria: None,
        };
        let (pts, label) = critical_polyline(&spec, 2).unwrap();
        assert_eq!(label, "p_star");
        // p_star = 3 in one dimension without weight: the centre column.
        let x = MARGIN + 1.5 * CELL;
        assert!(pts.iter().all(|p| (p.0 - x).abs() < 1e-9));
        let svg = render_svg(&spec, &[]);
        assert!(svg.contains("critical-line"));
        assert!(svg.ends_with("</svg>\n"));
    }
}
