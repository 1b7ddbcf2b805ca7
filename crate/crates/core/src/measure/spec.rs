//! JSON measure specification files.
//!
//! ```json
//! {"kind": "atoms", "atoms": [[-0.4, 0.0, 0.5], [0.4, 0.0, 0.5]]}
//! {"kind": "grid", "cell_size": 0.5, "origin": [-1, -1], "mass": [[0, 0], [1, 0]]}
//! {"kind": "generator", "name": "product-cantor", "ratio": 0.3333333333333333, "depth": 4,
//!  "endpoints": [[-0.8, 0], [0.8, 0]]}
//! ```
//! Grid masses are row-major, row `j` at height `origin.y + j·cell_size`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Atom, DiskMeasure, Generator, GridDensity};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MeasureSpec {
    Atoms { atoms: Vec<[f64; 3]> },
    Grid { cell_size: f64, origin: [f64; 2], mass: Vec<Vec<f64>> },
    Generator(GeneratorSpec),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum GeneratorSpec {
    UniformDisk,
    UniformSegment {
        endpoints: [[f64; 2]; 2],
    },
    ProductCantor {
        ratio: f64,
        depth: u32,
        #[serde(default = "default_diameter")]
        endpoints: [[f64; 2]; 2],
    },
    SingleAtom {
        point: [f64; 2],
    },
}

fn default_diameter() -> [[f64; 2]; 2] {
    [[-1.0, 0.0], [1.0, 0.0]]
}

impl MeasureSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::parse("measure spec", e))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("measure spec serializes")
    }

    /// Builds the measure and normalises it to total mass 1.
    pub fn build<T: Real>(&self) -> Result<DiskMeasure<T>> {
        let pt = |a: [f64; 2]| Point::<T>::from_array(a);
        let m = match self {
            MeasureSpec::Atoms { atoms } => DiskMeasure::from_atoms(
                atoms.iter().map(|&[x, y, w]| Atom::new(Point::new(T::lit(x), T::lit(y)), T::lit(w))).collect(),
            )?,
            MeasureSpec::Grid { cell_size, origin, mass } => {
                let rows = mass.len();
                let cols = mass.first().map_or(0, Vec::len);
                if mass.iter().any(|r| r.len() != cols) {
                    return Err(Error::InvalidArgument("grid rows have unequal lengths".into()));
                }
                DiskMeasure::from_grid(GridDensity {
                    cell_size: T::lit(*cell_size),
                    origin: pt(*origin),
                    cols,
                    rows,
                    mass: mass.iter().flatten().map(|&m| T::lit(m)).collect(),
                })?
            }
            MeasureSpec::Generator(g) => DiskMeasure::from_generator(match g {
                GeneratorSpec::UniformDisk => Generator::UniformDisk,
                GeneratorSpec::UniformSegment { endpoints: [a, b] } => {
                    Generator::UniformSegment { a: pt(*a), b: pt(*b) }
                }
                GeneratorSpec::ProductCantor { ratio, depth, endpoints: [a, b] } => {
                    Generator::ProductCantor { ratio: T::lit(*ratio), depth: *depth, a: pt(*a), b: pt(*b) }
                }
                GeneratorSpec::SingleAtom { point } => Generator::SingleAtom(pt(*point)),
            })?,
        };
        if !(m.total_mass() > T::zero()) {
            return Err(Error::Unnormalized { mass: m.total_mass().to_f64_lossy() });
        }
        m.normalized()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_every_kind() {
        let cases = [
            r#"{"kind":"atoms","atoms":[[-0.4,0,1],[0.4,0,1]]}"#,
            r#"{"kind":"grid","cell_size":0.5,"origin":[-1,-1],"mass":[[0,0,0,0],[0,1,1,0],[0,1,1,0],[0,0,0,0]]}"#,
            r#"{"kind":"generator","name":"uniform-disk"}"#,
            r#"{"kind":"generator","name":"uniform-segment","endpoints":[[-0.5,0],[0.5,0]]}"#,
            r#"{"kind":"generator","name":"product-cantor","ratio":0.3333333333333333,"depth":4}"#,
            r#"{"kind":"generator","name":"single-atom","point":[0.1,0.2]}"#,
        ];
        for text in cases {
            let spec = MeasureSpec::from_json(text).unwrap();
            let m: DiskMeasure<f64> = spec.build().unwrap();
            assert!((m.total_mass() - 1.0).abs() < 1e-12, "{text}");
            assert_eq!(MeasureSpec::from_json(&spec.to_json()).unwrap(), spec);
        }
    }

    #[test]
    fn rejects_unknown_kind_and_outside_atoms() {
        assert!(MeasureSpec::from_json(r#"{"kind":"blob"}"#).is_err());
        let spec = MeasureSpec::from_json(r#"{"kind":"atoms","atoms":[[2,0,1]]}"#).unwrap();
        assert!(spec.build::<f64>().is_err());
    }
}
