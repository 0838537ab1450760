//! JSON form of [`NetworkConfig`].
//!
//! Power-like quantities are objects with exactly one of a `dbm` or a
//! `watts` key. `p_max` takes either a single value (shared by every ST) or
//! one value per ST. `N` may be omitted and then defaults to `M * L`.
//!
//! ```json
//! {
//!   "K": 5, "M": 10, "L": 20,
//!   "p_max": { "dbm": 20 },
//!   "sigma2": { "dbm": -90 },
//!   "carrier_hz": 2.3e9, "bandwidth_hz": 1e7,
//!   "geometry": { "st_center": [0, 0], "dt_center": [200, 0],
//!                 "cluster_radius": 2, "irs_position": [120, 50] },
//!   "exponents": { "direct": 3.5, "st_irs": 2.0, "irs_dt": 2.1 },
//!   "ref_loss_db": 30,
//!   "power_model": { "P_ST": { "dbm": 10 }, "P_DT": { "dbm": 10 },
//!                    "xi_ST": 1.2, "element_power": 0.01 }
//! }
//! ```

use std::path::Path;

use irs_core::model::{
    dbm_to_watts, ConfigError, GeometryConfig, NetworkConfig, PathLossExponents, PowerModel, VarianceModel,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigFileError {
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}: give exactly one of `dbm` or `watts`")]
    PowerUnit(&'static str),
    #[error("p_max lists {got} values for {k} pairs")]
    PowerCount { got: usize, k: usize },
    #[error(transparent)]
    Invalid(#[from] ConfigError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

/// A power in either unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerValue {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dbm: Option<OneOrMany>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub watts: Option<OneOrMany>,
}

impl PowerValue {
    pub fn watts(w: f64) -> Self {
        PowerValue {
            dbm: None,
            watts: Some(OneOrMany::One(w)),
        }
    }

    fn to_watts(&self, field: &'static str) -> Result<Vec<f64>, ConfigFileError> {
        let (values, dbm) = match (&self.dbm, &self.watts) {
            (Some(v), None) => (v, true),
            (None, Some(v)) => (v, false),
            _ => return Err(ConfigFileError::PowerUnit(field)),
        };
        let raw = match values {
            OneOrMany::One(v) => vec![*v],
            OneOrMany::Many(v) => v.clone(),
        };
        Ok(raw.into_iter().map(|v| if dbm { dbm_to_watts(v) } else { v }).collect())
    }

    fn scalar(&self, field: &'static str) -> Result<f64, ConfigFileError> {
        match self.to_watts(field)?.as_slice() {
            [w] => Ok(*w),
            _ => Err(ConfigFileError::PowerUnit(field)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryFile {
    pub st_center: [f64; 2],
    pub dt_center: [f64; 2],
    pub cluster_radius: f64,
    pub irs_position: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentsFile {
    pub direct: f64,
    pub st_irs: f64,
    pub irs_dt: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerModelFile {
    #[serde(rename = "P_ST")]
    pub p_st: PowerValue,
    #[serde(rename = "P_DT")]
    pub p_dt: PowerValue,
    #[serde(rename = "xi_ST")]
    pub xi_st: f64,
    /// Watts per reflecting element of an active module.
    pub element_power: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceModelFile {
    #[default]
    ReferenceLoss,
    Ratio200,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    pub p_max: PowerValue,
    pub sigma2: PowerValue,
    #[serde(rename = "Q", default, skip_serializing_if = "Option::is_none")]
    pub q: Option<usize>,
    pub carrier_hz: f64,
    pub bandwidth_hz: f64,
    pub geometry: GeometryFile,
    pub exponents: ExponentsFile,
    pub ref_loss_db: f64,
    pub power_model: PowerModelFile,
    #[serde(default)]
    pub variance_model: VarianceModelFile,
}

impl ConfigFile {
    /// Converts to watts and validates.
    pub fn into_network(self) -> Result<NetworkConfig, ConfigFileError> {
        let mut p_max = self.p_max.to_watts("p_max")?;
        if p_max.len() == 1 {
            p_max = vec![p_max[0]; self.k];
        } else if p_max.len() != self.k {
            return Err(ConfigFileError::PowerCount {
                got: p_max.len(),
                k: self.k,
            });
        }
        let cfg = NetworkConfig {
            k: self.k,
            m: self.m,
            l: self.l,
            n: self.n.unwrap_or(self.m * self.l),
            p_max,
            sigma2: self.sigma2.scalar("sigma2")?,
            q: self.q,
            carrier_hz: self.carrier_hz,
            bandwidth_hz: self.bandwidth_hz,
            geometry: GeometryConfig {
                st_center: self.geometry.st_center,
                dt_center: self.geometry.dt_center,
                cluster_radius: self.geometry.cluster_radius,
                irs_position: self.geometry.irs_position,
            },
            exponents: PathLossExponents {
                direct: self.exponents.direct,
                st_irs: self.exponents.st_irs,
                irs_dt: self.exponents.irs_dt,
            },
            ref_loss_db: self.ref_loss_db,
            power_model: PowerModel {
                p_st: self.power_model.p_st.scalar("P_ST")?,
                p_dt: self.power_model.p_dt.scalar("P_DT")?,
                xi_st: self.power_model.xi_st,
                element_power: self.power_model.element_power,
            },
            variance_model: match self.variance_model {
                VarianceModelFile::ReferenceLoss => VarianceModel::ReferenceLoss,
                VarianceModelFile::Ratio200 => VarianceModel::Ratio200,
            },
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Watt-denominated file form of `cfg`.
    pub fn from_network(cfg: &NetworkConfig) -> Self {
        ConfigFile {
            k: cfg.k,
            m: cfg.m,
            l: cfg.l,
            n: Some(cfg.n),
            p_max: PowerValue {
                dbm: None,
                watts: Some(OneOrMany::Many(cfg.p_max.clone())),
            },
            sigma2: PowerValue::watts(cfg.sigma2),
            q: cfg.q,
            carrier_hz: cfg.carrier_hz,
            bandwidth_hz: cfg.bandwidth_hz,
            geometry: GeometryFile {
                st_center: cfg.geometry.st_center,
                dt_center: cfg.geometry.dt_center,
                cluster_radius: cfg.geometry.cluster_radius,
                irs_position: cfg.geometry.irs_position,
            },
            exponents: ExponentsFile {
                direct: cfg.exponents.direct,
                st_irs: cfg.exponents.st_irs,
                irs_dt: cfg.exponents.irs_dt,
            },
            ref_loss_db: cfg.ref_loss_db,
            power_model: PowerModelFile {
                p_st: PowerValue::watts(cfg.power_model.p_st),
                p_dt: PowerValue::watts(cfg.power_model.p_dt),
                xi_st: cfg.power_model.xi_st,
                element_power: cfg.power_model.element_power,
            },
            variance_model: match cfg.variance_model {
                VarianceModel::ReferenceLoss => VarianceModelFile::ReferenceLoss,
                VarianceModel::Ratio200 => VarianceModelFile::Ratio200,
            },
        }
    }
}

pub fn parse_config(text: &str) -> Result<NetworkConfig, ConfigFileError> {
    serde_json::from_str::<ConfigFile>(text)?.into_network()
}

pub fn load_config(path: &Path) -> Result<NetworkConfig, ConfigFileError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigFileError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config(&text)
}

pub fn to_json(cfg: &NetworkConfig) -> String {
    serde_json::to_string_pretty(&ConfigFile::from_network(cfg)).expect("config serializes")
}
