//! Input file formats: family specs and seed configurations.

use anyhow::{anyhow, bail, Context, Result};
use flexilab::complexes::MeshJson;
use flexilab::families::{
    bricard_family, BricardParams, BricardType, EllipticFamily, EllipticFlexSpec, FamilyError,
    FlexFamily, Flexion, RationalFamily, RationalFlexSpec,
};
use flexilab::geomkit::{simplex_frame, ModelSpace, Polyhedron};
use flexilab::volumetrics::BipyramidFamily;
use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

/// Family spec file. `kind` selects the construction; see the shipped
/// fixtures for examples of each.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FamilyFile {
    Rational {
        n: usize,
        lambda: Vec<f64>,
        frame: FrameJson,
    },
    Elliptic {
        n: usize,
        k: f64,
        sigma: Vec<f64>,
        lambda: Vec<f64>,
    },
    Bricard2 {
        a1: [f64; 3],
        a2: [f64; 3],
        a3: [f64; 3],
        b3: [f64; 3],
        #[serde(default = "default_track_steps")]
        steps: usize,
    },
    Bipyramid {
        sides: [f64; 4],
    },
}

fn default_track_steps() -> usize {
    120
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrameJson {
    pub vertices: Vec<Vec<f64>>,
}

/// A family of any supported kind, unified behind [`Flexion`].
pub enum AnyFamily {
    Flex(FlexFamily),
    Bipyramid(BipyramidFamily),
}

impl Flexion for AnyFamily {
    fn space(&self) -> ModelSpace {
        match self {
            AnyFamily::Flex(f) => f.space(),
            AnyFamily::Bipyramid(f) => f.space(),
        }
    }

    fn complex(&self) -> &Arc<flexilab::complexes::PseudoManifold> {
        match self {
            AnyFamily::Flex(f) => f.complex(),
            AnyFamily::Bipyramid(f) => f.complex(),
        }
    }

    fn eval(&self, u: f64) -> Result<Polyhedron, FamilyError> {
        match self {
            AnyFamily::Flex(f) => f.eval(u),
            AnyFamily::Bipyramid(f) => f.eval(u),
        }
    }

    fn default_range(&self) -> (f64, f64) {
        match self {
            AnyFamily::Flex(f) => f.default_range(),
            AnyFamily::Bipyramid(f) => f.default_range(),
        }
    }
}

impl FamilyFile {
    pub fn into_family(self) -> Result<AnyFamily> {
        match self {
            FamilyFile::Rational { n, lambda, frame } => {
                if frame.vertices.len() != n {
                    bail!("frame must list {n} vertices, got {}", frame.vertices.len());
                }
                for (i, v) in frame.vertices.iter().enumerate() {
                    if v.len() != n {
                        bail!("frame vertex {i} must have {n} coordinates");
                    }
                }
                let vertices: Vec<DVector<f64>> = frame
                    .vertices
                    .iter()
                    .map(|v| DVector::from_row_slice(v))
                    .collect();
                let frame = simplex_frame(&vertices).context("realizing the rational frame")?;
                let spec = RationalFlexSpec::new(frame, lambda)?;
                Ok(AnyFamily::Flex(FlexFamily::Rational(RationalFamily::new(
                    spec,
                )?)))
            }
            FamilyFile::Elliptic {
                n,
                k,
                sigma,
                lambda,
            } => {
                if sigma.len() != n || lambda.len() != n {
                    bail!("sigma and lambda must list {n} values");
                }
                let spec = EllipticFlexSpec::new(k, sigma, lambda)?;
                Ok(AnyFamily::Flex(FlexFamily::Elliptic(EllipticFamily::new(
                    spec,
                )?)))
            }
            FamilyFile::Bricard2 {
                a1,
                a2,
                a3,
                b3,
                steps,
            } => Ok(AnyFamily::Flex(bricard_family(
                BricardType::TypeII,
                BricardParams::PlaneSeed {
                    a1,
                    a2,
                    a3,
                    b3,
                    steps,
                },
            )?)),
            FamilyFile::Bipyramid { sides } => {
                Ok(AnyFamily::Bipyramid(BipyramidFamily::new(sides)?))
            }
        }
    }
}

pub fn read_family_file(path: &Path) -> Result<FamilyFile> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing family spec {}", path.display()))
}

pub fn load_family(path: &Path) -> Result<AnyFamily> {
    read_family_file(path)?
        .into_family()
        .with_context(|| format!("validating family spec {}", path.display()))
}

/// Seed configuration: model space, mesh, and vertex coordinates. The
/// `lengths` map ("u-v" keys by vertex name) may replace coordinates for
/// commands that only need the constraint system shape.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConfigFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub space: Option<String>,
    pub mesh: MeshJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coordinates: Option<BTreeMap<String, Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lengths: Option<BTreeMap<String, f64>>,
}

pub fn parse_space(name: &str, dim: usize) -> Result<ModelSpace> {
    match name {
        "euclid" | "euclidean" => Ok(ModelSpace::Euclidean(dim)),
        "sphere" | "spherical" => Ok(ModelSpace::Sphere(dim)),
        "hyperbolic" => Ok(ModelSpace::Hyperbolic(dim)),
        other => bail!("unknown space '{other}' (euclid | sphere | hyperbolic)"),
    }
}

pub fn read_config_file(path: &Path) -> Result<ConfigFile> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text)
        .with_context(|| format!("parsing configuration {}", path.display()))
}

/// Space resolution: an explicit command-line choice wins over the file.
pub fn resolve_space(flag: Option<&str>, file: &ConfigFile, dim: usize) -> Result<ModelSpace> {
    match (flag, file.space.as_deref()) {
        (Some(s), _) => parse_space(s, dim),
        (None, Some(s)) => parse_space(s, dim),
        (None, None) => bail!("no model space: pass --space or set \"space\" in the file"),
    }
}

/// Load a full seed configuration (mesh + coordinates) as a polyhedron.
pub fn load_configuration(path: &Path, space_flag: Option<&str>) -> Result<Polyhedron> {
    let file = read_config_file(path)?;
    let complex = Arc::new(
        file.mesh
            .clone()
            .into_complex()
            .context("validating the mesh")?,
    );
    let coords_map = file
        .coordinates
        .clone()
        .ok_or_else(|| anyhow!("configuration has no coordinates"))?;
    let n = complex.dim() + 1;
    let space = resolve_space(space_flag, &file, n)?;
    let ambient = space.ambient_dim();
    let mut coords = Vec::with_capacity(complex.vertex_count());
    for name in complex.vertex_names() {
        let c = coords_map
            .get(name)
            .ok_or_else(|| anyhow!("missing coordinates for vertex '{name}'"))?;
        if c.len() != ambient {
            bail!(
                "vertex '{name}' has {} coordinates, the {space:?} model needs {ambient}",
                c.len()
            );
        }
        coords.push(DVector::from_row_slice(c));
    }
    let p = Polyhedron::new(space, complex, coords);
    if !space.is_euclidean() {
        for (v, c) in p.coords.iter().enumerate() {
            space.check_on_model(c).with_context(|| {
                format!("vertex '{}' is off the model surface", p.complex.vertex_names()[v])
            })?;
        }
    }
    Ok(p)
}

/// Edge lengths from a "u-v" keyed map.
pub fn parse_lengths(
    complex: &flexilab::complexes::PseudoManifold,
    map: &BTreeMap<String, f64>,
) -> Result<flexilab::confspace::EdgeLengths> {
    let mut lengths = flexilab::confspace::EdgeLengths::new();
    for (key, &value) in map {
        let (a, b) = key
            .split_once('-')
            .ok_or_else(|| anyhow!("length key '{key}' is not of the form 'u-v'"))?;
        let u = complex
            .vertex_id(a)
            .ok_or_else(|| anyhow!("unknown vertex '{a}' in length key '{key}'"))?;
        let v = complex
            .vertex_id(b)
            .ok_or_else(|| anyhow!("unknown vertex '{b}' in length key '{key}'"))?;
        if value <= 0.0 {
            bail!("length '{key}' must be positive");
        }
        lengths.insert(u, v, value);
    }
    Ok(lengths)
}
