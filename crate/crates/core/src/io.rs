//! JSON model files and the bundled example models.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    pmf_violations, JointPmf, Mode, SystemModel, ValidationReport, Violation, ViolationKind,
    VulnerabilityProfile,
};

/// Bundled models, addressable by name wherever a model path is accepted.
pub const BUNDLED_MODELS: [(&str, &str); 6] = [
    ("example1_p1", include_str!("../fixtures/example1_p1.json")),
    ("example1_p2", include_str!("../fixtures/example1_p2.json")),
    ("example2_p3", include_str!("../fixtures/example2_p3.json")),
    ("ns3_demo", include_str!("../fixtures/ns3_demo.json")),
    ("graph_analog", include_str!("../fixtures/graph_analog.json")),
    ("subcritical", include_str!("../fixtures/subcritical.json")),
];

pub fn bundled_model_text(name: &str) -> Option<&'static str> {
    BUNDLED_MODELS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid model: {0}")]
    Invalid(ValidationReport),
}

/// On-disk form of a [`SystemModel`]. Off-diagonal infection entries are
/// required; diagonal entries are ignored and written as `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comment: Option<String>,
    pub n_systems: usize,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub internal_degree_floor: bool,
    pub degree_dists: Vec<Vec<(Vec<u32>, f64)>>,
    pub infection: Vec<Vec<Option<f64>>>,
    pub vulnerability: Vec<VulnerabilityProfile>,
}

impl ModelFile {
    pub fn from_model(model: &SystemModel, comment: Option<String>) -> Self {
        let n = model.n_systems();
        Self {
            comment,
            n_systems: n,
            mode: model.mode(),
            internal_degree_floor: model.internal_degree_floor(),
            degree_dists: model.degree_dists().iter().map(|p| p.entries().to_vec()).collect(),
            infection: (0..n)
                .map(|i| (0..n).map(|j| (i != j).then(|| model.infection(i, j))).collect())
                .collect(),
            vulnerability: model.vulnerabilities().to_vec(),
        }
    }

    /// Builds the model, or reports every violation found.
    pub fn to_model(&self) -> Result<SystemModel, ValidationReport> {
        let report = validate_model(self);
        if !report.is_valid() {
            return Err(report);
        }
        let n = self.n_systems;
        let dists = self
            .degree_dists
            .iter()
            .map(|e| JointPmf::new(n, e.iter().cloned()).expect("validated pmf"))
            .collect();
        let infection = self
            .infection
            .iter()
            .map(|row| row.iter().map(|q| q.unwrap_or(0.0)).collect())
            .collect();
        SystemModel::new(
            dists,
            infection,
            self.vulnerability.clone(),
            self.internal_degree_floor,
            self.mode,
        )
    }
}

/// Lists all violations in a model file, with field paths.
pub fn validate_model(file: &ModelFile) -> ValidationReport {
    let mut report = ValidationReport::default();
    let n = file.n_systems;
    if n < 2 {
        report.push(Violation::new(
            ViolationKind::SystemCount,
            "n_systems",
            &format!("need at least 2 systems, found {n}"),
        ));
    }
    if file.degree_dists.len() != n {
        report.push(Violation::new(
            ViolationKind::Shape,
            "degree_dists",
            &format!("expected {n} distributions, found {}", file.degree_dists.len()),
        ));
    }
    for (i, entries) in file.degree_dists.iter().enumerate() {
        report
            .violations
            .extend(pmf_violations(n, entries, &format!("degree_dists[{i}]")));
    }
    let mut q = Vec::with_capacity(file.infection.len());
    for (i, row) in file.infection.iter().enumerate() {
        let mut dense = Vec::with_capacity(row.len());
        for (j, v) in row.iter().enumerate() {
            match v {
                Some(x) => dense.push(*x),
                None if i == j => dense.push(0.0),
                None => {
                    report.push(Violation::new(
                        ViolationKind::MissingField,
                        &format!("infection[{i}][{j}]"),
                        "off-diagonal infection probability is missing",
                    ));
                    dense.push(1.0);
                }
            }
        }
        q.push(dense);
    }
    report
        .violations
        .extend(crate::model::infection_violations(&q, n));
    if file.vulnerability.len() != n {
        report.push(Violation::new(
            ViolationKind::Shape,
            "vulnerability",
            &format!("expected {n} profiles, found {}", file.vulnerability.len()),
        ));
    }
    for (i, phi) in file.vulnerability.iter().enumerate() {
        report
            .violations
            .extend(crate::model::vulnerability_violations(phi, &format!("vulnerability[{i}]")));
    }
    if report.is_valid() {
        let dists = file
            .degree_dists
            .iter()
            .map(|e| JointPmf::new(n, e.iter().cloned()).expect("checked pmf"))
            .collect();
        let model_check = SystemModel::new(
            dists,
            q,
            file.vulnerability.clone(),
            file.internal_degree_floor,
            file.mode,
        );
        if let Err(r) = model_check {
            report.violations.extend(r.violations);
        }
    }
    report
}

pub fn parse_model_file(text: &str) -> Result<ModelFile, LoadError> {
    serde_json::from_str(text).map_err(|e| LoadError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

pub fn parse_model(text: &str) -> Result<SystemModel, LoadError> {
    parse_model_file(text)?.to_model().map_err(LoadError::Invalid)
}

/// Reads the model file text for `source`: a path, or a bundled model name
/// when no such file exists.
pub fn read_model_text(source: &str) -> Result<String, LoadError> {
    let path = Path::new(source);
    if !path.exists() {
        if let Some(text) = bundled_model_text(source) {
            return Ok(text.to_owned());
        }
    }
    std::fs::read_to_string(path).map_err(|e| LoadError::Io {
        path: source.to_owned(),
        message: e.to_string(),
    })
}

pub fn load_model_file(source: &str) -> Result<ModelFile, LoadError> {
    parse_model_file(&read_model_text(source)?)
}

pub fn load_model(source: &str) -> Result<SystemModel, LoadError> {
    parse_model(&read_model_text(source)?)
}

/// Pretty JSON for `model`, readable by [`parse_model`].
pub fn serialize_model(model: &SystemModel, comment: Option<String>) -> String {
    let mut s = serde_json::to_string_pretty(&ModelFile::from_model(model, comment))
        .expect("model file serializes");
    s.push('\n');
    s
}
