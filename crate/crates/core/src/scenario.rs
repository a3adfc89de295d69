//! TOML scenario files, the built-in reproduction scenario and run records.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::audit::DeviationRow;
use crate::control::CalibrationResult;
use crate::dynamics::{BioParams, DiffusionSpec, EconParams, ModelVariant, State};
use crate::equilibrium::{EquilibriumReport, NormalityDiagnosis};
use crate::error::{Error, Result};
use crate::simulation::{DEFAULT_HORIZON, DEFAULT_STEP};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Initial condition and constant effort of a forward run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimulationSetup {
    pub initial: State,
    pub horizon: f64,
    pub step: f64,
    pub effort: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    pub name: String,
    pub description: Option<String>,
    pub variant: ModelVariant,
    pub bio: BioParams,
    pub econ: EconParams,
    pub diffusion: DiffusionSpec,
    pub simulation: Option<SimulationSetup>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    description: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    variant: Option<String>,
    bio: RawBio,
    econ: RawEcon,
    diffusion: RawDiffusion,
    #[serde(skip_serializing_if = "Option::is_none")]
    simulation: Option<RawSimulation>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawBio {
    r1: f64,
    r2: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    r: Option<f64>,
    alpha: f64,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawEcon {
    p: f64,
    q: f64,
    c: f64,
    delta: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    e_max: Option<f64>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawDiffusion {
    mode: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda0: Option<f64>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawSimulation {
    x1_0: f64,
    x2_0: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    horizon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    step: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    effort: Option<f64>,
}

fn invariant(e: Error) -> Error {
    match e {
        Error::Invariant(msg) => Error::Scenario(format!("invariant violated: {msg}")),
        other => other,
    }
}

impl RawScenario {
    fn into_scenario(self) -> Result<Scenario> {
        if self.name.trim().is_empty() {
            return Err(Error::Scenario("invariant violated: name nonempty".into()));
        }
        let variant = match self.variant.as_deref() {
            None => ModelVariant::PatchesReserve,
            Some(v) => v.parse()?,
        };
        let bio = BioParams {
            r1: self.bio.r1,
            r2: self.bio.r2,
            r: self.bio.r,
            alpha: self.bio.alpha,
        };
        bio.validate().map_err(invariant)?;
        if variant.is_global() && bio.r.is_none() {
            return Err(Error::Scenario(format!(
                "bio.r is required by variant {}",
                variant.name()
            )));
        }
        let econ = EconParams {
            p: self.econ.p,
            q: self.econ.q,
            c: self.econ.c,
            delta: self.econ.delta,
            e_max: self.econ.e_max.unwrap_or(EconParams::DEFAULT_E_MAX),
        };
        econ.validate().map_err(invariant)?;

        let d = &self.diffusion;
        let diffusion = match (d.mode.as_str(), d.lambda, d.lambda0) {
            ("constant", Some(lambda), None) => DiffusionSpec::Constant { lambda },
            ("size_dependent", None, Some(lambda0)) => DiffusionSpec::SizeDependent { lambda0 },
            ("constant", _, _) => {
                return Err(Error::Scenario(
                    "diffusion mode \"constant\" takes exactly the key `lambda`".into(),
                ))
            }
            ("size_dependent", _, _) => {
                return Err(Error::Scenario(
                    "diffusion mode \"size_dependent\" takes exactly the key `lambda0`".into(),
                ))
            }
            (other, _, _) => {
                return Err(Error::Scenario(format!(
                    "unknown diffusion mode `{other}` (expected \"constant\" or \"size_dependent\")"
                )))
            }
        };
        diffusion.validate().map_err(invariant)?;

        let simulation = match self.simulation {
            None => None,
            Some(s) => {
                let setup = SimulationSetup {
                    initial: State::new(s.x1_0, s.x2_0),
                    horizon: s.horizon.unwrap_or(DEFAULT_HORIZON),
                    step: s.step.unwrap_or(DEFAULT_STEP),
                    effort: s.effort.unwrap_or(0.0),
                };
                if !(setup.initial.x1 >= 0.0 && setup.initial.x2 >= 0.0) {
                    return Err(Error::Scenario(
                        "invariant violated: initial stocks >= 0".into(),
                    ));
                }
                if !(setup.step > 0.0 && setup.horizon >= setup.step) {
                    return Err(Error::Scenario(
                        "invariant violated: step > 0 and horizon >= step".into(),
                    ));
                }
                econ.check_effort(setup.effort)?;
                Some(setup)
            }
        };

        Ok(Scenario {
            name: self.name,
            description: self.description,
            variant,
            bio,
            econ,
            diffusion,
            simulation,
        })
    }
}

/// Parses and validates a scenario document.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let raw: RawScenario =
        toml::from_str(text).map_err(|e| Error::Scenario(e.message().to_string()))?;
    raw.into_scenario()
}

impl Scenario {
    /// Canonical TOML form; parsing it yields an equal scenario.
    pub fn to_toml(&self) -> String {
        let (mode, lambda, lambda0) = match self.diffusion {
            DiffusionSpec::Constant { lambda } => ("constant", Some(lambda), None),
            DiffusionSpec::SizeDependent { lambda0 } => ("size_dependent", None, Some(lambda0)),
        };
        let raw = RawScenario {
            name: self.name.clone(),
            description: self.description.clone(),
            variant: Some(self.variant.name().to_string()),
            bio: RawBio {
                r1: self.bio.r1,
                r2: self.bio.r2,
                r: self.bio.r,
                alpha: self.bio.alpha,
            },
            econ: RawEcon {
                p: self.econ.p,
                q: self.econ.q,
                c: self.econ.c,
                delta: self.econ.delta,
                e_max: Some(self.econ.e_max),
            },
            diffusion: RawDiffusion {
                mode: mode.to_string(),
                lambda,
                lambda0,
            },
            simulation: self.simulation.map(|s| RawSimulation {
                x1_0: s.initial.x1,
                x2_0: s.initial.x2,
                horizon: Some(s.horizon),
                step: Some(s.step),
                effort: Some(s.effort),
            }),
        };
        toml::to_string(&raw).expect("scenario fields are plain TOML values")
    }

    /// SHA-256 of the canonical TOML form.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }

    /// The two-zone comparison parameters used for the published numerical
    /// application.
    pub fn paper() -> Scenario {
        Scenario {
            name: "paper".into(),
            description: Some(PAPER_DESCRIPTION.into()),
            variant: ModelVariant::PatchesReserve,
            bio: BioParams {
                r1: 0.4,
                r2: 0.05,
                r: Some(0.28739),
                alpha: 0.5,
            },
            econ: EconParams {
                p: 0.3,
                q: 2.0,
                c: 0.15,
                delta: 0.05,
                e_max: EconParams::DEFAULT_E_MAX,
            },
            diffusion: DiffusionSpec::Constant { lambda: 20.0 },
            simulation: None,
        }
    }
}

pub const PAPER_DESCRIPTION: &str =
    "Published comparison parameters. The price is not given in the \
source; p = 0.3 is reverse-engineered from the split-model closed form and the reported global \
equilibrium x2* = 0.125.";

/// Short summary of a forward run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectorySummary {
    pub samples: usize,
    pub horizon: f64,
    pub final_state: State,
    pub discounted_revenue: f64,
    pub tail_bound: f64,
    pub clamped_samples: usize,
}

/// Everything a CLI run produced, serializable as JSON.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub tool_version: &'static str,
    pub scenario_name: String,
    pub scenario_digest: String,
    pub equilibria: Vec<EquilibriumReport>,
    pub normality: Option<NormalityDiagnosis>,
    pub calibration: Option<CalibrationResult>,
    pub trajectory: Option<TrajectorySummary>,
    pub deviations: Vec<DeviationRow>,
}

impl RunRecord {
    pub fn new(scenario: &Scenario) -> Self {
        RunRecord {
            tool_version: TOOL_VERSION,
            scenario_name: scenario.name.clone(),
            scenario_digest: scenario.digest(),
            equilibria: Vec::new(),
            normality: None,
            calibration: None,
            trajectory: None,
            deviations: Vec::new(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("run record serializes")
    }
}
