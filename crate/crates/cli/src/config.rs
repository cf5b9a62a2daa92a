//! JSON experiment configuration. Command-line flags override file values.

use std::path::{Path, PathBuf};

use midstar_core::field::Damping;
use midstar_core::starprod::QuadratureSpec;
use midstar_core::{GeneratingFunction, Point, QuadraticPhase, ScalarField, Space, SpaceKind};
use num_complex::Complex64;
use serde::Deserialize;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub space: Option<SpaceKind>,
    pub hbar: Option<f64>,
    /// Evaluation point.
    pub point: Option<Vec<f64>>,
    pub fields: Option<[FieldSpec; 2]>,
    pub generating: Option<[GeneratingSpec; 2]>,
    pub quadrature: Option<QuadratureSpec>,
    pub form: Option<Form>,
    pub output: Option<PathBuf>,
    pub seed: Option<u64>,
    pub suite: Option<Suite>,
    pub cases: Option<usize>,
    pub threads: Option<usize>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
        serde_json::from_str(&text).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Form {
    /// Fiber-and-leaf integration.
    #[default]
    Leaf,
    /// Direct integration over midpoint pairs.
    Midpoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Triangles,
    Recovery,
    Phases,
    Moyal,
    #[default]
    All,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum FieldSpec {
    Bump {
        center: Vec<f64>,
        width: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// Terms are `[i, j, k, coeff]` for `coeff x^i y^j z^k`.
    Polynomial {
        terms: Vec<(u32, u32, u32, f64)>,
        center: Vec<f64>,
        width: f64,
    },
    Oscillatory {
        phase: QuadraticPhase,
        damping: Option<DampingSpec>,
    },
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DampingSpec {
    pub center: Vec<f64>,
    pub width: f64,
}

fn one() -> f64 {
    1.0
}

fn positive(w: f64, what: &str) -> CliResult<f64> {
    if w.is_finite() && w > 0.0 {
        Ok(w)
    } else {
        Err(CliError::usage(format!("{what} must be positive, got {w}")))
    }
}

impl FieldSpec {
    pub fn build(&self, space: &Space) -> CliResult<ScalarField> {
        Ok(match self {
            FieldSpec::Bump { center, width, amplitude } => ScalarField::GaussianBump {
                center: space.project(center)?,
                width: positive(*width, "bump width")?,
                amplitude: Complex64::new(*amplitude, 0.0),
            },
            FieldSpec::Polynomial { terms, center, width } => {
                let terms: Vec<([u32; 3], f64)> = terms.iter().map(|&(i, j, k, c)| ([i, j, k], c)).collect();
                ScalarField::damped_polynomial(&terms, space.project(center)?, positive(*width, "damping width")?)
            }
            FieldSpec::Oscillatory { phase, damping } => {
                let damping = match damping {
                    Some(d) => {
                        Some(Damping { center: space.project(&d.center)?, width: positive(d.width, "damping width")? })
                    }
                    None => None,
                };
                ScalarField::oscillatory(*phase, damping)
            }
        })
    }

    /// Unit bump at the origin of the space.
    pub fn default_bump(space: &Space) -> Self {
        FieldSpec::Bump { center: coords(&space.origin(), space.kind()), width: 1.0, amplitude: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum GeneratingSpec {
    Linear {
        covector: [f64; 2],
    },
    Quadratic {
        hessian: [[f64; 2]; 2],
        #[serde(default)]
        covector: [f64; 2],
        #[serde(default)]
        constant: f64,
    },
}

impl GeneratingSpec {
    /// `a,b` for a linear form or `h11,h12,h22,b1,b2,c` for a quadratic one.
    pub fn parse_flag(s: &str) -> CliResult<Self> {
        let v = parse_numbers(s)?;
        match v.len() {
            2 => Ok(GeneratingSpec::Linear { covector: [v[0], v[1]] }),
            6 => Ok(GeneratingSpec::Quadratic {
                hessian: [[v[0], v[1]], [v[1], v[2]]],
                covector: [v[3], v[4]],
                constant: v[5],
            }),
            n => Err(CliError::usage(format!("generating function needs 2 or 6 numbers, got {n}"))),
        }
    }

    pub fn build(&self) -> GeneratingFunction {
        match *self {
            GeneratingSpec::Linear { covector } => GeneratingFunction::Linear(covector),
            GeneratingSpec::Quadratic { hessian, covector, constant } => {
                GeneratingFunction::Quadratic(QuadraticPhase { hessian, covector, constant })
            }
        }
    }
}

pub fn parse_numbers(s: &str) -> CliResult<Vec<f64>> {
    s.split(',').map(|t| t.trim().parse::<f64>().map_err(|_| CliError::usage(format!("not a number: {t:?}")))).collect()
}

/// Parses `"x,y[,z];x,y[,z];..."` into exactly `n` points.
pub fn parse_points(space: &Space, s: &str, n: usize) -> CliResult<Vec<Point>> {
    let pts: Vec<Point> = s.split(';').map(|p| Ok(space.project(&parse_numbers(p)?)?)).collect::<CliResult<_>>()?;
    if pts.len() != n {
        return Err(CliError::usage(format!("expected {n} points separated by ';', got {}", pts.len())));
    }
    Ok(pts)
}

/// Coordinates as printed: two on the plane, three elsewhere.
pub fn coords(p: &Point, kind: SpaceKind) -> Vec<f64> {
    let c = p.coords();
    match kind {
        SpaceKind::Euclidean2 => vec![c.x, c.y],
        _ => vec![c.x, c.y, c.z],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"space":"s2","hbarr":0.5}"#).is_err());
        let bad_field = r#"{"fields":[{"kind":"bump","center":[0,0],"width":1,"sigma":2},{"kind":"bump","center":[0,0],"width":1}]}"#;
        assert!(serde_json::from_str::<ExperimentConfig>(bad_field).is_err());
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"quadrature":{"nodes":3}}"#).is_err());
    }

    #[test]
    fn full_config_parses() {
        let text = r#"{
            "space": "h2", "hbar": 0.25, "point": [0.1, 0.2],
            "fields": [
                {"kind": "bump", "center": [0, 0], "width": 0.5},
                {"kind": "oscillatory", "phase": {"hessian": [[1, 0], [0, 1]]}, "damping": {"center": [0, 0], "width": 2}}
            ],
            "generating": [{"kind": "linear", "covector": [1, 0]}, {"kind": "quadratic", "hessian": [[0, 1], [1, 0]]}],
            "quadrature": {"resolution": 32, "stretch": 2.0},
            "form": "midpoint", "seed": 9, "suite": "phases", "cases": 10, "threads": 2
        }"#;
        let c: ExperimentConfig = serde_json::from_str(text).unwrap();
        assert_eq!(c.space, Some(SpaceKind::Hyperbolic2));
        assert_eq!(c.quadrature.unwrap().resolution, 32);
        let h = Space::hyperbolic(0.25).unwrap();
        assert!(c.fields.unwrap()[1].build(&h).is_ok());
    }

    #[test]
    fn generating_flags() {
        assert_eq!(GeneratingSpec::parse_flag("1,2").unwrap(), GeneratingSpec::Linear { covector: [1.0, 2.0] });
        assert!(matches!(GeneratingSpec::parse_flag("1,2,3,4,5,6").unwrap(), GeneratingSpec::Quadratic { .. }));
        assert!(GeneratingSpec::parse_flag("1,2,3").is_err());
    }
}
