//! File formats: system definitions (JSON), trajectories and portrait
//! polylines (CSV), portraits (SVG), and validators for each.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dynamics::TrajectorySample;
use crate::error::{Error, Result};
use crate::mech::{CoupledSample, PointCloudSystem, Potential};
use crate::rigid_body::{InertiaTensor, PhasePortrait};
use crate::so3::Rotation;
use crate::tube::{tube_f_matrix, TubeConfig};

/// System definition file. A rigid body is given by its principal moments,
/// a point cloud by reference positions, masses and a potential.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SystemDefinition {
    RigidBody {
        inertia: [f64; 3],
        #[serde(default)]
        mu0: Option<f64>,
        /// Initial `eta` for `simulate`.
        #[serde(default)]
        eta0: Option<[f64; 2]>,
    },
    PointCloud {
        q0: Vec<f64>,
        masses: Vec<f64>,
        potential: Potential,
        #[serde(default)]
        mu0: Option<f64>,
        #[serde(default)]
        eta0: Option<[f64; 2]>,
        /// Offsets from the relative equilibrium shape and momentum.
        #[serde(default)]
        ds0: Option<Vec<f64>>,
        #[serde(default)]
        dsigma0: Option<Vec<f64>>,
    },
}

impl SystemDefinition {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))
    }

    pub fn mu0(&self) -> Option<f64> {
        match self {
            SystemDefinition::RigidBody { mu0, .. } | SystemDefinition::PointCloud { mu0, .. } => *mu0,
        }
    }

    pub fn eta0(&self) -> Option<[f64; 2]> {
        match self {
            SystemDefinition::RigidBody { eta0, .. } | SystemDefinition::PointCloud { eta0, .. } => *eta0,
        }
    }

    pub fn inertia(&self) -> Option<Result<InertiaTensor>> {
        match self {
            SystemDefinition::RigidBody { inertia, .. } => Some(InertiaTensor::new(inertia[0], inertia[1], inertia[2])),
            _ => None,
        }
    }

    pub fn point_cloud(&self) -> Option<Result<PointCloudSystem>> {
        match self {
            SystemDefinition::PointCloud { q0, masses, potential, .. } => Some(PointCloudSystem::new(masses.clone(), q0.clone(), *potential)),
            _ => None,
        }
    }
}

fn matrix_columns(prefix: char) -> impl Iterator<Item = String> {
    (0..3).flat_map(move |i| (0..3).map(move |j| format!("{prefix}{i}{j}")))
}

/// `t,nu,eta_x,eta_y,R00..R22,S00..S22,h`.
pub fn trajectory_header() -> String {
    let mut cols = vec!["t".to_string(), "nu".into(), "eta_x".into(), "eta_y".into()];
    cols.extend(matrix_columns('R'));
    cols.extend(matrix_columns('S'));
    cols.push("h".into());
    cols.join(",")
}

fn push_row(out: &mut String, t: f64, nu: f64, eta: (f64, f64), r: &Rotation, s: &Rotation, h: f64, extra: &[f64]) {
    let _ = write!(out, "{t},{nu},{},{}", eta.0, eta.1);
    for m in [r.matrix(), s.matrix()] {
        for i in 0..3 {
            for j in 0..3 {
                let _ = write!(out, ",{}", m[(i, j)]);
            }
        }
    }
    let _ = write!(out, ",{h}");
    for x in extra {
        let _ = write!(out, ",{x}");
    }
    out.push('\n');
}

pub fn trajectory_csv(samples: &[TrajectorySample]) -> String {
    let mut out = trajectory_header();
    out.push('\n');
    for p in samples {
        push_row(&mut out, p.t, p.nu, (p.eta.x, p.eta.y), &p.r, &p.s, p.h, &[]);
    }
    out
}

/// Trajectory columns followed by `s_i` and `sigma_i`.
pub fn coupled_trajectory_csv(cfg: &TubeConfig, samples: &[CoupledSample]) -> String {
    let k = samples.first().map(|p| p.state.s.len()).unwrap_or(0);
    let mut out = trajectory_header();
    for i in 0..k {
        let _ = write!(out, ",s{i}");
    }
    for i in 0..k {
        let _ = write!(out, ",sigma{i}");
    }
    out.push('\n');
    for p in samples {
        let f = tube_f_matrix(cfg, p.state.nu, &p.state.eta);
        let s = p.r * Rotation::from_matrix_unchecked(f.transpose());
        let extra: Vec<f64> = p.state.s.iter().chain(p.state.sigma.iter()).copied().collect();
        push_row(&mut out, p.t, p.state.nu, (p.state.eta.x, p.state.eta.y), &p.r, &s, p.h, &extra);
    }
    out
}

/// `level,segment_id,eta_x,eta_y`, one row per polyline vertex.
pub fn portrait_csv(portrait: &PhasePortrait) -> String {
    let mut out = String::from("level,segment_id,eta_x,eta_y\n");
    for (id, line) in portrait.polylines.iter().enumerate() {
        for &(x, y) in &line.points {
            let _ = writeln!(out, "{},{id},{x},{y}", line.level);
        }
    }
    out
}

/// `eta_x,eta_y,h` at every in-domain grid node.
pub fn surface_csv(portrait: &PhasePortrait) -> String {
    let mut out = String::from("eta_x,eta_y,h\n");
    let g = &portrait.grid;
    for j in 0..g.ny {
        for i in 0..g.nx {
            let h = portrait.values[j * g.nx + i];
            if h.is_finite() {
                let _ = writeln!(out, "{},{},{h}", g.x(i), g.y(j));
            }
        }
    }
    out
}

/// Standalone SVG of the polylines with the tube-domain boundary circle.
pub fn portrait_svg(portrait: &PhasePortrait, domain_radius: f64) -> String {
    const SIZE: f64 = 600.0;
    let g = &portrait.grid;
    let sx = |x: f64| (x - g.x_min) / (g.x_max - g.x_min) * SIZE;
    let sy = |y: f64| SIZE - (y - g.y_min) / (g.y_max - g.y_min) * SIZE;
    let (lo, hi) = portrait.levels.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &l| (a.min(l), b.max(l)));
    let colour = |level: f64| {
        let t = if hi > lo { (level - lo) / (hi - lo) } else { 0.5 };
        format!("rgb({},{},{})", (40.0 + 200.0 * t) as u8, 60, (240.0 - 200.0 * t) as u8)
    };
    let mut out = String::new();
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {SIZE} {SIZE}" width="{SIZE}" height="{SIZE}">"#);
    let _ = writeln!(out, r#"<rect width="{SIZE}" height="{SIZE}" fill="white"/>"#);
    let r = domain_radius / (g.x_max - g.x_min) * SIZE;
    let _ = writeln!(out, r#"<circle cx="{}" cy="{}" r="{r}" fill="none" stroke="gray" stroke-dasharray="4 4"/>"#, sx(0.0), sy(0.0));
    for line in &portrait.polylines {
        let pts: Vec<String> = line.points.iter().map(|&(x, y)| format!("{:.3},{:.3}", sx(x), sy(y))).collect();
        let _ = writeln!(out, r#"<polyline data-level="{}" fill="none" stroke="{}" stroke-width="1.2" points="{}"/>"#, line.level, colour(line.level), pts.join(" "));
    }
    out.push_str("</svg>\n");
    out
}

fn schema_error(what: &str, detail: impl std::fmt::Display) -> Error {
    Error::InvalidConfig(format!("{what} failed schema validation: {detail}"))
}

fn validate_numeric_csv(text: &str, what: &str, header_prefix: &str) -> Result<usize> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| schema_error(what, "empty file"))?;
    if !header.starts_with(header_prefix) {
        return Err(schema_error(what, format!("unexpected header {header:?}")));
    }
    let cols = header.split(',').count();
    let mut rows = 0;
    for (n, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != cols {
            return Err(schema_error(what, format!("row {} has {} fields, expected {cols}", n + 1, fields.len())));
        }
        if let Some(bad) = fields.iter().find(|f| f.parse::<f64>().is_err()) {
            return Err(schema_error(what, format!("row {}: {bad:?} is not a number", n + 1)));
        }
        rows += 1;
    }
    Ok(rows)
}

/// Checks header and row shape; returns the row count.
pub fn validate_trajectory_csv(text: &str) -> Result<usize> {
    validate_numeric_csv(text, "trajectory CSV", &trajectory_header())
}

pub fn validate_portrait_csv(text: &str) -> Result<usize> {
    validate_numeric_csv(text, "portrait CSV", "level,segment_id,eta_x,eta_y")
}

pub fn validate_surface_csv(text: &str) -> Result<usize> {
    validate_numeric_csv(text, "surface CSV", "eta_x,eta_y,h")
}

/// Returns the number of polylines.
pub fn validate_svg(text: &str) -> Result<usize> {
    let t = text.trim();
    if !t.starts_with("<svg") || !t.ends_with("</svg>") {
        return Err(schema_error("SVG", "missing <svg> root"));
    }
    Ok(t.matches("<polyline").count())
}

pub fn validate_normal_form_json(v: &serde_json::Value) -> Result<()> {
    let err = |d: &str| Err(schema_error("normal-form report", d));
    if !v["degree"].is_u64() {
        return err("degree must be an integer");
    }
    let Some(ev) = v["eigenvalues"].as_array() else { return err("eigenvalues must be an array") };
    if ev.iter().any(|e| e.as_array().is_none_or(|p| p.len() != 2 || p.iter().any(|x| !x.is_number()))) {
        return err("eigenvalues must be [re, im] pairs");
    }
    if !v["resonances"].is_array() {
        return err("resonances must be an array");
    }
    let Some(coeffs) = v["coefficients"].as_object() else { return err("coefficients must be an object") };
    for (key, value) in coeffs {
        if !value.is_number() || key.split(',').any(|e| e.parse::<u32>().is_err()) {
            return err("coefficient keys must be comma-separated exponents with numeric values");
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_has_all_columns() {
        let h = trajectory_header();
        assert_eq!(h.split(',').count(), 23);
        assert!(h.starts_with("t,nu,eta_x,eta_y,R00,R01"));
        assert!(h.ends_with("S21,S22,h"));
    }

    #[test]
    fn system_definitions_parse() {
        let rb: SystemDefinition = serde_json::from_str(r#"{"inertia": [1, 2, 3], "mu0": 1.0}"#).unwrap();
        assert!(rb.inertia().unwrap().is_ok());
        let pc: SystemDefinition = serde_json::from_str(
            r#"{"q0": [0.6, 0, 0.8, -0.6, 0, 0.8], "masses": [1, 1], "potential": {"kind": "spring", "k": 4, "rest": 1}, "mu0": 1.5}"#,
        )
        .unwrap();
        assert_eq!(pc.mu0(), Some(1.5));
        assert!(pc.point_cloud().unwrap().is_ok());
        assert!(serde_json::from_str::<SystemDefinition>(r#"{"masses": [1]}"#).is_err());
    }

    #[test]
    fn csv_validation_catches_ragged_rows() {
        assert_eq!(validate_portrait_csv("level,segment_id,eta_x,eta_y\n1,0,0.5,0.25\n").unwrap(), 1);
        assert!(validate_portrait_csv("level,segment_id,eta_x,eta_y\n1,0,0.5\n").is_err());
        assert!(validate_portrait_csv("level,segment_id,eta_x,eta_y\n1,0,x,0.5\n").is_err());
    }
}
