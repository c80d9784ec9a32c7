//! Instance file parsing: a JSON document with the self-map, the
//! measure, and the ray templates, all rationals as "p/q" strings.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use graphshift::exactmath::{format_rational, parse_rational, Polynomial, Rational};
use graphshift::graph::{FunctionalGraph, VertexId};
use graphshift::shift::{MeasuredGraph, TailTemplate};

#[derive(Debug)]
pub enum CliError {
    Io(std::io::Error),
    Json(serde_json::Error),
    Message(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io(e) => write!(f, "{e}"),
            CliError::Json(e) => write!(f, "{e}"),
            CliError::Message(m) => write!(f, "{m}"),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Json(e)
    }
}

impl CliError {
    pub fn msg(m: impl Into<String>) -> Self {
        CliError::Message(m.into())
    }
}

/// On-disk shape of an instance: the measure space, the self-map, and
/// the infinite rays summarised by their measure polynomials.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InstanceFile {
    pub vertices: Vec<String>,
    pub map: BTreeMap<String, String>,
    pub measure: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tails: Vec<TailSpec>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TailSpec {
    pub attach: String,
    pub mu_poly: Vec<String>,
}

fn check_label(label: &str) -> Result<(), CliError> {
    if label.is_empty() {
        return Err(CliError::msg("labels must be non-empty"));
    }
    if label.chars().any(char::is_whitespace) {
        return Err(CliError::msg(format!(
            "label {label:?} contains whitespace"
        )));
    }
    Ok(())
}

pub(crate) fn parse_field_rational(context: &str, s: &str) -> Result<Rational, CliError> {
    parse_rational(s).map_err(|e| CliError::msg(format!("{context}: {e}")))
}

impl InstanceFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::msg(format!("cannot read {}: {e}", path.display())))?;
        let file: InstanceFile = serde_json::from_str(&text)?;
        Ok(file)
    }

    pub fn save(&self, path: &Path) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(path, text)
            .map_err(|e| CliError::msg(format!("cannot write {}: {e}", path.display())))?;
        Ok(())
    }

    /// Validates the file and splits it into connected components,
    /// each a standalone measured instance. Components are ordered by
    /// their smallest vertex label.
    pub fn build(&self) -> Result<Vec<MeasuredGraph>, CliError> {
        for label in &self.vertices {
            check_label(label)?;
        }
        let vertex_set: BTreeSet<&str> = self.vertices.iter().map(String::as_str).collect();
        for key in self.measure.keys() {
            if !vertex_set.contains(key.as_str()) {
                return Err(CliError::msg(format!(
                    "measure: unknown vertex {key:?}"
                )));
            }
        }
        for v in &self.vertices {
            if !self.measure.contains_key(v) {
                return Err(CliError::msg(format!("measure: missing entry for {v:?}")));
            }
        }
        for tail in &self.tails {
            if !vertex_set.contains(tail.attach.as_str()) {
                return Err(CliError::msg(format!(
                    "tails: unknown attach vertex {:?}",
                    tail.attach
                )));
            }
        }

        let vertices: Vec<VertexId> = self
            .vertices
            .iter()
            .map(|v| VertexId::from(v.as_str()))
            .collect();
        let image: BTreeMap<VertexId, VertexId> = self
            .map
            .iter()
            .map(|(k, v)| (VertexId::from(k.as_str()), VertexId::from(v.as_str())))
            .collect();
        let graph = FunctionalGraph::new(vertices, image)
            .map_err(|e| CliError::msg(format!("map: {e}")))?;

        let mut measure: BTreeMap<VertexId, Rational> = BTreeMap::new();
        for (k, v) in &self.measure {
            measure.insert(
                VertexId::from(k.as_str()),
                parse_field_rational(&format!("measure[{k:?}]"), v)?,
            );
        }
        let mut tails: Vec<(VertexId, TailTemplate)> = Vec::new();
        for (idx, tail) in self.tails.iter().enumerate() {
            let attach = VertexId::from(tail.attach.as_str());
            let coeffs: Vec<Rational> = tail
                .mu_poly
                .iter()
                .map(|c| parse_field_rational(&format!("tails[{idx}].mu_poly"), c))
                .collect::<Result<_, _>>()?;
            tails.push((
                attach.clone(),
                TailTemplate::new(attach, Polynomial::from_coeffs(coeffs)),
            ));
        }

        let mut components = Vec::new();
        for comp in graph.connected_components() {
            let comp_measure: BTreeMap<VertexId, Rational> = comp
                .vertices()
                .iter()
                .map(|v| (v.clone(), measure[v].clone()))
                .collect();
            let comp_tails: Vec<TailTemplate> = tails
                .iter()
                .filter(|(attach, _)| comp.contains(attach))
                .map(|(_, t)| t.clone())
                .collect();
            let mg = MeasuredGraph::new(comp, comp_measure, comp_tails)
                .map_err(|e| CliError::msg(e.to_string()))?;
            components.push(mg);
        }
        Ok(components)
    }

    /// Inverse of `build` for a single instance, used by the family
    /// generator to emit ready-to-check files.
    pub fn from_instance(mg: &MeasuredGraph) -> Self {
        let vertices: Vec<String> = mg
            .graph()
            .vertices()
            .iter()
            .map(|v| v.as_str().to_owned())
            .collect();
        let map = mg
            .graph()
            .vertices()
            .iter()
            .map(|v| {
                let image = mg.graph().image_of(v).expect("valid instance");
                (v.as_str().to_owned(), image.as_str().to_owned())
            })
            .collect();
        let measure = mg
            .graph()
            .vertices()
            .iter()
            .map(|v| {
                let mu = mg.measure_of(v).expect("valid instance");
                (v.as_str().to_owned(), format_rational(mu))
            })
            .collect();
        let tails = mg
            .tails()
            .iter()
            .map(|t| TailSpec {
                attach: t.attach.as_str().to_owned(),
                mu_poly: t.mu_poly.coeffs().iter().map(format_rational).collect(),
            })
            .collect();
        InstanceFile {
            vertices,
            map,
            measure,
            tails,
        }
    }
}
