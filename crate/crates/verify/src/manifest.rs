//! TOML run manifests.
//!
//! ```toml
//! [geometry]
//! name = ["GAUSS", "CYL"]
//!
//! [suite]
//! identities = ["soliton-all", "lemmas"]
//! samples = 50
//! seed = 7
//! jet_order = 5
//!
//! [quadrature]
//! q = 12
//! levels = [5.0]
//!
//! [output]
//! path = "report.json"
//! grid_alpha = [-1.0, 1.0, 0.25]
//! grid_beta = [-1.0, 1.0, 0.25]
//! ```

use std::path::{Path, PathBuf};

use bachlike_core::geometry::{Geometry, RandomMetricConfig, CATALOG};
use bachlike_core::regime::GridAxis;
use bachlike_core::suite::{check_order, resolve_selection, IdentityId, ORDER_RANGE};
use serde::Deserialize;

use crate::error::{Error, Result};

/// Name of the seeded random metric in `[geometry]`.
pub const RANDOM: &str = "RAND";

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub geometry: GeometrySection,
    #[serde(default)]
    pub suite: SuiteSection,
    #[serde(default)]
    pub quadrature: QuadratureSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Names {
    One(String),
    Many(Vec<String>),
}

impl Names {
    pub fn to_vec(&self) -> Vec<String> {
        match self {
            Names::One(n) => vec![n.clone()],
            Names::Many(v) => v.clone(),
        }
    }
}

/// Catalog names, or `RAND` with the generator settings below.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySection {
    pub name: Names,
    #[serde(default = "defaults::random_seed")]
    pub seed: u64,
    #[serde(default = "defaults::dim")]
    pub dim: usize,
    #[serde(default = "defaults::epsilon")]
    pub epsilon: f64,
    #[serde(default = "defaults::degree")]
    pub degree: usize,
    #[serde(default)]
    pub with_potential: bool,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteSection {
    #[serde(default = "defaults::identities")]
    pub identities: Vec<String>,
    #[serde(default = "defaults::samples")]
    pub samples: usize,
    #[serde(default = "defaults::seed")]
    pub seed: u64,
    #[serde(default = "defaults::jet_order")]
    pub jet_order: usize,
    /// Overrides every pointwise default tolerance.
    pub tolerance: Option<f64>,
    #[serde(default = "defaults::threads")]
    pub threads: usize,
    /// `(α, β)` pairs for the Bach-like integral identities.
    #[serde(default = "defaults::bach_like")]
    pub bach_like: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSection {
    #[serde(default = "defaults::q")]
    pub q: usize,
    #[serde(default = "defaults::levels")]
    pub levels: Vec<f64>,
    /// Relative integral tolerance.
    pub tolerance: Option<f64>,
    pub decay_alpha: Option<f64>,
    #[serde(default)]
    pub decay_levels: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub path: Option<PathBuf>,
    /// `[min, max, step]`
    pub grid_alpha: Option<[f64; 3]>,
    pub grid_beta: Option<[f64; 3]>,
}

mod defaults {
    pub fn random_seed() -> u64 {
        7
    }
    pub fn dim() -> usize {
        4
    }
    pub fn epsilon() -> f64 {
        0.05
    }
    pub fn degree() -> usize {
        3
    }
    pub fn identities() -> Vec<String> {
        vec!["pointwise-all".into()]
    }
    pub fn samples() -> usize {
        50
    }
    pub fn seed() -> u64 {
        7
    }
    pub fn jet_order() -> usize {
        bachlike_core::suite::DEFAULT_ORDER
    }
    pub fn threads() -> usize {
        1
    }
    pub fn bach_like() -> Vec<[f64; 2]> {
        vec![[1.0, 1.0]]
    }
    pub fn q() -> usize {
        bachlike_core::quadrature::DEFAULT_Q
    }
    pub fn levels() -> Vec<f64> {
        vec![4.0]
    }
}

impl Default for SuiteSection {
    fn default() -> Self {
        Self {
            identities: defaults::identities(),
            samples: defaults::samples(),
            seed: defaults::seed(),
            jet_order: defaults::jet_order(),
            tolerance: None,
            threads: defaults::threads(),
            bach_like: defaults::bach_like(),
        }
    }
}

impl Default for QuadratureSection {
    fn default() -> Self {
        Self {
            q: defaults::q(),
            levels: defaults::levels(),
            tolerance: None,
            decay_alpha: None,
            decay_levels: Vec::new(),
        }
    }
}

/// Command-line values that replace manifest entries.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub jet_order: Option<usize>,
    pub quadrature: Option<usize>,
    pub tolerance: Option<f64>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
}

impl Manifest {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(v) = o.seed {
            self.suite.seed = v;
        }
        if let Some(v) = o.jet_order {
            self.suite.jet_order = v;
        }
        if let Some(v) = o.quadrature {
            self.quadrature.q = v;
        }
        if let Some(v) = o.tolerance {
            self.suite.tolerance = Some(v);
        }
        if let Some(v) = &o.out {
            self.output.path = Some(v.clone());
        }
        if let Some(v) = o.threads {
            self.suite.threads = v;
        }
    }

    /// Resolved identity selection; refuses unknown ids and insufficient jet order.
    pub fn selection(&self) -> Result<Vec<IdentityId>> {
        let ids = resolve_selection(&self.suite.identities)?;
        check_order(&ids, self.suite.jet_order)?;
        Ok(ids)
    }

    pub fn geometries(&self) -> Result<Vec<Geometry>> {
        let g = &self.geometry;
        g.name
            .to_vec()
            .iter()
            .map(|name| {
                if name == RANDOM {
                    Ok(Geometry::random(&RandomMetricConfig {
                        seed: g.seed,
                        dim: g.dim,
                        epsilon: g.epsilon,
                        degree: g.degree,
                        with_potential: g.with_potential,
                    })?)
                } else if CATALOG.contains(&name.as_str()) {
                    Ok(Geometry::catalog(name)?)
                } else {
                    Err(bachlike_core::Error::UnknownGeometry(name.clone()).into())
                }
            })
            .collect()
    }

    pub fn grid_axes(&self) -> Result<Option<(GridAxis, GridAxis)>> {
        match (self.output.grid_alpha, self.output.grid_beta) {
            (None, None) => Ok(None),
            (Some(a), Some(b)) => Ok(Some((
                GridAxis::new(a[0], a[1], a[2])?,
                GridAxis::new(b[0], b[1], b[2])?,
            ))),
            _ => Err(Error::Manifest(
                "grid_alpha and grid_beta must be given together".into(),
            )),
        }
    }

    /// Every check that can be made before any computation starts.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Manifest(msg));
        if self.geometry.name.to_vec().is_empty() {
            return bad("[geometry] name is empty".into());
        }
        let (lo, hi) = ORDER_RANGE;
        if !(lo..=hi).contains(&self.suite.jet_order) {
            return bad(format!("jet_order must lie in {lo}..={hi}"));
        }
        if self.suite.samples == 0 {
            return bad("samples must be at least 1".into());
        }
        if self.suite.threads == 0 {
            return bad("threads must be at least 1".into());
        }
        if self.quadrature.q < 2 {
            return bad("quadrature q must be at least 2".into());
        }
        if let Some(t) = self.suite.tolerance {
            if !(t > 0.0) {
                return bad(format!("tolerance must be positive, got {t}"));
            }
        }
        if let Some(t) = self.quadrature.tolerance {
            if !(t > 0.0) {
                return bad(format!("quadrature tolerance must be positive, got {t}"));
            }
        }
        let ids = self.selection()?;
        if ids.iter().any(|id| matches!(id, IdentityId::Lemma(_)))
            && self.quadrature.levels.is_empty()
        {
            return bad("integral identities need at least one level".into());
        }
        if let Some(a) = self.quadrature.decay_alpha {
            if !(a > 0.0) {
                return bad(format!("decay_alpha must be positive, got {a}"));
            }
        }
        self.grid_axes()?;
        self.geometries()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_manifest_takes_defaults() {
        let m = Manifest::parse("[geometry]\nname = \"GAUSS\"\n").unwrap();
        assert_eq!(m.suite, SuiteSection::default());
        assert_eq!(m.quadrature.q, 24);
        assert_eq!(m.geometry.name.to_vec(), vec!["GAUSS"]);
        m.validate().unwrap();
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(Manifest::parse("[geometry]\nname = \"E4\"\ncolour = 1\n").is_err());
        assert!(Manifest::parse("[suite]\nsamples = 3\n").is_err());
    }

    #[test]
    fn order_gate_refuses_low_jet_order() {
        let m = Manifest::parse(
            "[geometry]\nname = \"RAND\"\n[suite]\nidentities = [\"divergence-u\"]\njet_order = 3\n",
        )
        .unwrap();
        let e = m.validate().unwrap_err().to_string();
        assert!(
            e.contains("divergence-u") && e.contains("needs order 5"),
            "{e}"
        );
    }

    #[test]
    fn overrides_replace_entries() {
        let mut m = Manifest::parse("[geometry]\nname = [\"S4\", \"CYL\"]\n").unwrap();
        m.apply(&Overrides {
            seed: Some(3),
            jet_order: Some(4),
            quadrature: Some(8),
            tolerance: Some(1e-6),
            out: Some("x.json".into()),
            threads: Some(2),
        });
        assert_eq!((m.suite.seed, m.suite.jet_order, m.quadrature.q), (3, 4, 8));
        assert_eq!(m.suite.tolerance, Some(1e-6));
        assert_eq!(m.output.path, Some(PathBuf::from("x.json")));
        assert_eq!(m.geometries().unwrap().len(), 2);
    }

    #[test]
    fn bad_values_are_configuration_errors() {
        for text in [
            "[geometry]\nname = \"T4\"\n",
            "[geometry]\nname = \"E4\"\n[suite]\nsamples = 0\n",
            "[geometry]\nname = \"E4\"\n[suite]\nidentities = [\"nope\"]\n",
            "[geometry]\nname = \"E4\"\n[output]\ngrid_alpha = [0.0, 1.0, 0.5]\n",
            "[geometry]\nname = \"E4\"\n[quadrature]\nq = 1\n",
        ] {
            assert!(Manifest::parse(text).unwrap().validate().is_err(), "{text}");
        }
    }
}
