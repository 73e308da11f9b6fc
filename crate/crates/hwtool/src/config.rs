//! JSON run configuration.
//!
//! ```json
//! {
//!   "q": 2,
//!   "orbits": [{"type": "symmetric", "d": 2, "multiplicity": 1}],
//!   "polarization": "simple",
//!   "suites": ["validate", "character-table"]
//! }
//! ```

use std::path::Path;

use anyhow::{bail, Context, Result};
use hwcore::ff_tower::{Canonical, ClosureModel, Fe, DEFAULT_CAP};
use hwcore::weight_datum::{OrbitKind, OrbitSpec, PolarizationChoice, WeightDatum};
use serde::{Deserialize, Serialize};

/// An element of `k_e` by its coordinates over `F_p` in the canonical basis.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElementJson {
    pub degree: u32,
    pub coords: Vec<u32>,
}

impl From<&ElementJson> for Canonical {
    fn from(e: &ElementJson) -> Self {
        Canonical { degree: e.degree, coords: e.coords.clone() }
    }
}

impl From<&Canonical> for ElementJson {
    fn from(c: &Canonical) -> Self {
        ElementJson { degree: c.degree, coords: c.coords.clone() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrbitType {
    Polarized,
    Unitary,
    Asymmetric,
    Symmetric,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrbitJson {
    #[serde(rename = "type")]
    pub kind: OrbitType,
    pub d: u32,
    #[serde(default = "one")]
    pub multiplicity: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub form: Option<Vec<ElementJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scalars: Option<Vec<ElementJson>>,
}

fn one() -> u32 {
    1
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitJson {
    pub labels: Vec<String>,
    pub sigma: Vec<String>,
    pub neg: Vec<String>,
    pub multiplicity: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PolarizationJson {
    Named(String),
    Labels(Vec<String>),
}

impl Default for PolarizationJson {
    fn default() -> Self {
        PolarizationJson::Named("simple".into())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussJson {
    pub a: Vec<ElementJson>,
    pub degs: Vec<u32>,
    pub d: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Validate,
    CharacterTable,
    GaussSum,
    TorsorCount,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::Validate, Suite::CharacterTable, Suite::GaussSum, Suite::TorsorCount];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Validate => "validate",
            Suite::CharacterTable => "character-table",
            Suite::GaussSum => "gauss-sum",
            Suite::TorsorCount => "torsor-count",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub q: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orbits: Option<Vec<OrbitJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub explicit: Option<ExplicitJson>,
    #[serde(default)]
    pub polarization: PolarizationJson,
    /// Twist of `psi`; an element of `k`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi_scale: Option<ElementJson>,
    /// A second twist; characters are compared against it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi_twist: Option<ElementJson>,
    /// Integer weight per label, for the restriction check.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grading: Option<Vec<i64>>,
    #[serde(default)]
    pub gauss: Vec<GaussJson>,
    #[serde(default)]
    pub suites: Vec<Suite>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_min: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cap: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    /// Which square roots are used when extending `psi` to the Lagrangian.
    #[serde(default)]
    pub mu0_variant: u64,
    /// Number of sampled pairs for the multiplicativity check on large groups.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
}

pub const DEFAULT_TOLERANCE: f64 = 1e-9;
pub const DEFAULT_SAMPLES: usize = 10_000;

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: RunConfig = serde_json::from_str(text).context("ConfigParse")?;
        c.check()?;
        Ok(c)
    }

    pub fn from_orbits(q: u64, orbits: Vec<OrbitJson>) -> Self {
        RunConfig {
            q,
            orbits: Some(orbits),
            explicit: None,
            polarization: PolarizationJson::default(),
            psi_scale: None,
            psi_twist: None,
            grading: None,
            gauss: Vec::new(),
            suites: Vec::new(),
            t_min: None,
            t_max: None,
            cap: None,
            tolerance: None,
            mu0_variant: 0,
            samples: None,
        }
    }

    pub fn check(&self) -> Result<()> {
        if self.orbits.is_some() == self.explicit.is_some() {
            bail!("ConfigParse: give exactly one of \"orbits\" and \"explicit\"");
        }
        if self.cap == Some(0) {
            bail!("ConfigParse: cap must be positive");
        }
        if let (Some(a), Some(b)) = (self.t_min, self.t_max) {
            if a == 0 || a > b {
                bail!("ConfigParse: empty t-range {a}..={b}");
            }
        }
        if self.t_max == Some(0) {
            bail!("ConfigParse: t_max must be positive");
        }
        if let Some(t) = self.tolerance {
            if !(t > 0.0 && t.is_finite()) {
                bail!("ConfigParse: tolerance must be positive");
            }
        }
        if let PolarizationJson::Named(n) = &self.polarization {
            if n != "simple" {
                bail!("ConfigParse: unknown polarization {n:?}");
            }
        }
        Ok(())
    }

    pub fn cap(&self) -> u64 {
        self.cap.unwrap_or(DEFAULT_CAP)
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance.unwrap_or(DEFAULT_TOLERANCE)
    }

    pub fn samples(&self) -> usize {
        self.samples.unwrap_or(DEFAULT_SAMPLES)
    }

    pub fn datum(&self) -> hwcore::Result<WeightDatum> {
        if let Some(e) = &self.explicit {
            return WeightDatum::from_explicit(self.q, &e.labels, &e.sigma, &e.neg, &e.multiplicity);
        }
        let orbits: Vec<OrbitSpec> = self
            .orbits
            .as_deref()
            .unwrap_or_default()
            .iter()
            .map(|o| OrbitSpec {
                kind: match o.kind {
                    OrbitType::Polarized | OrbitType::Asymmetric => OrbitKind::Asymmetric,
                    OrbitType::Unitary | OrbitType::Symmetric => OrbitKind::Symmetric,
                },
                d: o.d,
                multiplicity: o.multiplicity,
                form: o.form.as_ref().map(|v| v.iter().map(Canonical::from).collect()),
                scalars: o.scalars.as_ref().map(|v| v.iter().map(Canonical::from).collect()),
            })
            .collect();
        WeightDatum::from_orbits(self.q, &orbits)
    }

    pub fn polarization(&self) -> PolarizationChoice {
        match &self.polarization {
            PolarizationJson::Named(_) => PolarizationChoice::Simple,
            PolarizationJson::Labels(l) => PolarizationChoice::Explicit(l.clone()),
        }
    }

    fn element(model: &ClosureModel, e: Option<&ElementJson>) -> hwcore::Result<Fe> {
        let Some(e) = e else { return Ok(Fe::ONE) };
        if e.degree != 1 {
            return Err(hwcore::Error::DegreeMismatch("psi twists must lie in k".into()));
        }
        let x = model.embed(&Canonical::from(e))?;
        if x.is_zero() {
            return Err(hwcore::Error::DivisionByZero);
        }
        Ok(x)
    }

    pub fn psi_scale(&self, model: &ClosureModel) -> hwcore::Result<Fe> {
        Self::element(model, self.psi_scale.as_ref())
    }

    pub fn psi_twist(&self, model: &ClosureModel) -> hwcore::Result<Option<Fe>> {
        self.psi_twist.as_ref().map(|e| Self::element(model, Some(e))).transpose()
    }
}
