// SPDX-License-Identifier: Apache-2.0

//! Plot data for the deviation-versus-time figure.
//!
//! Nothing is rendered by default: a run produces CSV series plus a JSON
//! manifest describing axes, reference lines and markers, so any plotting
//! tool can draw the figure. [`PlotBundle::svg`] is a minimal built-in
//! renderer.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use super::config::{Platform, ScenarioConfig};
use super::run::{format_temperature, RunOutput};
use crate::error::Result;
use crate::units::{Acceleration, Length, Time};

/// Free-fall distance `h = g t² / 2`.
pub fn drop_distance(t: Time, g: Acceleration) -> Length {
    Length::new(0.5 * g.si() * t.si() * t.si())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Axis {
    pub label: String,
    pub column: String,
    pub scale: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Series {
    pub name: String,
    pub file: String,
    pub x: String,
    pub y: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HorizontalLine {
    pub label: String,
    pub value_rad: f64,
    /// Displacement equivalent `Δθ · L`.
    pub value_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerticalMarker {
    pub label: String,
    pub temperature_k: f64,
    /// `None` when the decoherence time is infinite.
    pub t_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlatformBand {
    pub platform: String,
    pub duration_s: f64,
    pub drop_distance_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DropTick {
    pub t_s: f64,
    pub h_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SecondaryAxis {
    pub label: String,
    pub free_fall_acceleration_m_s2: f64,
    pub ticks: Vec<DropTick>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlotManifest {
    pub title: String,
    pub theta0_rad: f64,
    pub x_axis: Axis,
    pub y_axis: Axis,
    pub secondary_x_axis: SecondaryAxis,
    pub series: Vec<Series>,
    pub horizontal_lines: Vec<HorizontalLine>,
    pub vertical_markers: Vec<VerticalMarker>,
    pub platform_bands: Vec<PlatformBand>,
}

#[derive(Debug, Clone)]
pub struct PlotBundle {
    pub manifest: PlotManifest,
    pub classical_csv: String,
    pub quantum_csv: String,
    /// Rows `(t, deviation)` of the classical curve, for the SVG renderer.
    points: Vec<(f64, f64)>,
}

pub const CLASSICAL_FILE: &str = "classical.csv";
pub const QUANTUM_FILE: &str = "quantum.csv";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const SVG_FILE: &str = "figure.svg";

pub fn plot_data(config: &ScenarioConfig, output: &RunOutput) -> PlotBundle {
    let report = &output.report;
    let traj = &output.trajectory;
    let half_length = report.parameters.half_length_m;
    let g = config.experiment.free_fall_acceleration;
    let duration = report.parameters.duration_s;

    let mut quantum_csv = String::from("t_s,deviation_rad\n");
    for (t, d) in traj.quantum_baseline() {
        let _ = writeln!(quantum_csv, "{t:e},{d:e}");
    }

    let horizontal_lines = report
        .dynamics
        .crossings
        .iter()
        .map(|c| HorizontalLine {
            label: c.label.clone(),
            value_rad: c.resolution_rad,
            value_m: c.resolution_rad * half_length,
        })
        .collect();

    let vertical_markers = config
        .experiment
        .temperatures_to_mark
        .iter()
        .zip(&report.decoherence.marked)
        .map(|(t, b)| VerticalMarker {
            label: format!("decoherence time at {}", format_temperature(*t)),
            temperature_k: t.si(),
            t_s: b.tau_d,
        })
        .collect();

    let platform_bands = Platform::ALL
        .iter()
        .filter_map(|p| {
            p.default_duration().map(|d| PlatformBand {
                platform: p.name().to_owned(),
                duration_s: d.si(),
                drop_distance_m: drop_distance(d, g).si(),
            })
        })
        .collect();

    // one tick per decade across the sampled range, plus the duration
    let t_min = traj
        .samples
        .iter()
        .map(|p| p.t)
        .find(|&t| t > 0.0)
        .unwrap_or(duration);
    let mut ticks = Vec::new();
    let mut k = t_min.log10().ceil() as i32;
    while 10f64.powi(k) < duration {
        let t = 10f64.powi(k);
        ticks.push(DropTick {
            t_s: t,
            h_m: drop_distance(Time::new(t), g).si(),
        });
        k += 1;
    }
    ticks.push(DropTick {
        t_s: duration,
        h_m: drop_distance(Time::new(duration), g).si(),
    });

    let manifest = PlotManifest {
        title: "Angular deviation |θt − θ0| under classical gravity".into(),
        theta0_rad: report.protocol.theta0_rad,
        x_axis: Axis {
            label: "t (s)".into(),
            column: "t_s".into(),
            scale: "log".into(),
        },
        y_axis: Axis {
            label: "|θt − θ0| (rad)".into(),
            column: "deviation_rad".into(),
            scale: "log".into(),
        },
        secondary_x_axis: SecondaryAxis {
            label: "free-fall distance h (m)".into(),
            free_fall_acceleration_m_s2: g.si(),
            ticks,
        },
        series: vec![
            Series {
                name: "classical".into(),
                file: CLASSICAL_FILE.into(),
                x: "t_s".into(),
                y: "deviation_rad".into(),
            },
            Series {
                name: "quantum".into(),
                file: QUANTUM_FILE.into(),
                x: "t_s".into(),
                y: "deviation_rad".into(),
            },
        ],
        horizontal_lines,
        vertical_markers,
        platform_bands,
    };

    PlotBundle {
        manifest,
        classical_csv: traj.to_csv(),
        quantum_csv,
        points: traj.samples.iter().map(|p| (p.t, p.deviation)).collect(),
    }
}

impl PlotBundle {
    pub fn manifest_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.manifest).expect("manifest serializes");
        s.push('\n');
        s
    }

    /// Writes the manifest and both series into `dir`, creating it if needed.
    pub fn write(&self, dir: &Path, with_svg: bool) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(MANIFEST_FILE), self.manifest_json())?;
        std::fs::write(dir.join(CLASSICAL_FILE), &self.classical_csv)?;
        std::fs::write(dir.join(QUANTUM_FILE), &self.quantum_csv)?;
        if with_svg {
            std::fs::write(dir.join(SVG_FILE), self.svg())?;
        }
        Ok(())
    }

    /// Log-log rendering of the classical curve with resolution lines and
    /// decoherence markers. The quantum baseline is zero and has no place on
    /// a log axis; it is drawn as a flat line along the bottom edge.
    pub fn svg(&self) -> String {
        const W: f64 = 640.0;
        const H: f64 = 420.0;
        const M: f64 = 60.0;
        let pts: Vec<(f64, f64)> = self
            .points
            .iter()
            .copied()
            .filter(|&(t, d)| t > 0.0 && d > 0.0)
            .collect();
        let mut ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
        ys.extend(self.manifest.horizontal_lines.iter().map(|l| l.value_rad));
        let (x0, x1) = match (pts.first(), pts.last()) {
            (Some(a), Some(b)) if b.0 > a.0 => (a.0.log10().floor(), b.0.log10().ceil()),
            _ => (-4.0, 1.0),
        };
        let y0 = ys
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
            .log10()
            .floor();
        let y1 = ys
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
            .log10()
            .ceil();
        let (y0, y1) = if y0.is_finite() && y1 > y0 {
            (y0, y1)
        } else {
            (-20.0, 0.0)
        };
        let px = |t: f64| M + (t.log10() - x0) / (x1 - x0) * (W - 2.0 * M);
        let py = |d: f64| H - M - (d.log10() - y0) / (y1 - y0) * (H - 2.0 * M);

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="11">"#
        );
        let _ = writeln!(
            s,
            r#"<rect x="{M}" y="{M}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            W - 2.0 * M,
            H - 2.0 * M
        );
        for k in x0 as i32..=x1 as i32 {
            let x = px(10f64.powi(k));
            let _ = writeln!(
                s,
                r#"<text x="{x:.1}" y="{}" text-anchor="middle">1e{k}</text>"#,
                H - M + 14.0
            );
        }
        for k in y0 as i32..=y1 as i32 {
            let y = py(10f64.powi(k));
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{y:.1}" text-anchor="end">1e{k}</text>"#,
                M - 4.0
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            W / 2.0,
            H - 20.0,
            self.manifest.x_axis.label
        );
        let _ = writeln!(
            s,
            r#"<text x="14" y="{}" transform="rotate(-90 14 {})" text-anchor="middle">{}</text>"#,
            H / 2.0,
            H / 2.0,
            self.manifest.y_axis.label
        );
        let path: Vec<String> = pts
            .iter()
            .map(|&(t, d)| format!("{:.2},{:.2}", px(t), py(d)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="black" stroke-width="1.5" points="{}"/>"#,
            path.join(" ")
        );
        let _ = writeln!(
            s,
            r#"<line x1="{M}" y1="{}" x2="{}" y2="{}" stroke="steelblue" stroke-dasharray="2,3"/>"#,
            H - M,
            W - M,
            H - M
        );
        for line in &self.manifest.horizontal_lines {
            let y = py(line.value_rad);
            let _ = writeln!(
                s,
                r#"<line x1="{M}" y1="{y:.2}" x2="{}" y2="{y:.2}" stroke="purple"/><text x="{}" y="{:.2}" fill="purple">{}</text>"#,
                W - M,
                M + 4.0,
                y - 3.0,
                line.label
            );
        }
        for m in &self.manifest.vertical_markers {
            if let Some(t) = m.t_s {
                if t.log10() >= x0 && t.log10() <= x1 {
                    let x = px(t);
                    let _ = writeln!(
                        s,
                        r#"<line x1="{x:.2}" y1="{M}" x2="{x:.2}" y2="{}" stroke="red"/><text x="{:.2}" y="{}" fill="red">{} K</text>"#,
                        H - M,
                        x + 2.0,
                        M + 12.0,
                        m.temperature_k
                    );
                }
            }
        }
        s.push_str("</svg>\n");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{load_config, run};

    #[test]
    fn drop_distances() {
        let g = Acceleration::new(9.81);
        assert_eq!(drop_distance(Time::ZERO, g).si(), 0.0);
        assert!((drop_distance(Time::new(4.6), g).si() - 103.7898).abs() < 1e-9);
        let h1 = drop_distance(Time::new(1.3), g).si();
        let h2 = drop_distance(Time::new(2.6), g).si();
        assert!((h2 / h1 - 4.0).abs() < 1e-12);
    }

    #[test]
    fn bundle_contents() {
        let c = load_config("sounding_rocket").unwrap();
        let out = run(&c).unwrap();
        let b = plot_data(&c, &out);
        assert_eq!(b.manifest.vertical_markers.len(), 4);
        assert!((b.manifest.horizontal_lines[0].value_rad - 1e-10).abs() < 1e-22);
        assert!(b.quantum_csv.lines().skip(1).all(|l| l.ends_with(",0e0")));
        assert_eq!(
            b.quantum_csv.lines().count(),
            b.classical_csv.lines().count()
        );
        assert_eq!(b.manifest.secondary_x_axis.ticks.last().unwrap().t_s, 60.0);
        let svg = b.svg();
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
    }

    #[test]
    fn write_creates_files() {
        let c = load_config("nominal").unwrap();
        let b = plot_data(&c, &run(&c).unwrap());
        let dir = tempfile::tempdir().unwrap();
        b.write(dir.path(), true).unwrap();
        for f in [MANIFEST_FILE, CLASSICAL_FILE, QUANTUM_FILE, SVG_FILE] {
            assert!(dir.path().join(f).is_file(), "{f}");
        }
    }
}
