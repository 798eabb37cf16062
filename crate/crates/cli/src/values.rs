//! Flag value types shared by the subcommands.

use std::fmt;
use std::str::FromStr;

use hurstlab::estimator::EstimatorConfig;
use serde::{Deserialize, Deserializer, Serialize};

/// A list of reals given as `start:step:end` (inclusive) or `a,b,c`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Grid(pub Vec<f64>);

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if s.contains(':') {
            return EstimatorConfig::parse_grid(s)
                .map(Grid)
                .map_err(|e| e.to_string());
        }
        s.split(',')
            .map(|x| {
                x.trim()
                    .parse::<f64>()
                    .map_err(|_| format!("`{x}` is not a number in list `{s}`"))
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Grid)
    }
}

impl<'de> Deserialize<'de> for Grid {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            One(f64),
            List(Vec<f64>),
        }
        match Raw::deserialize(d)? {
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
            Raw::One(x) => Ok(Grid(vec![x])),
            Raw::List(v) => Ok(Grid(v)),
        }
    }
}

/// Pairs of reals given as `a:b,c:d`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Pairs(pub Vec<(f64, f64)>);

impl FromStr for Pairs {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        s.split(',')
            .map(|p| {
                let (a, b) = p
                    .split_once(':')
                    .ok_or_else(|| format!("pair `{p}` must read a:b"))?;
                let num = |x: &str| {
                    x.trim()
                        .parse::<f64>()
                        .map_err(|_| format!("`{x}` is not a number in pair `{p}`"))
                };
                Ok((num(a)?, num(b)?))
            })
            .collect::<Result<Vec<_>, String>>()
            .map(Pairs)
    }
}

impl<'de> Deserialize<'de> for Pairs {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            List(Vec<(f64, f64)>),
        }
        match Raw::deserialize(d)? {
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
            Raw::List(v) => Ok(Pairs(v)),
        }
    }
}

/// `on` / `off` switch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Switch {
    On,
    Off,
}

impl FromStr for Switch {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "on" | "true" => Ok(Switch::On),
            "off" | "false" => Ok(Switch::Off),
            other => Err(format!("expected on or off, got `{other}`")),
        }
    }
}

impl fmt::Display for Switch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if *self == Switch::On { "on" } else { "off" })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplerChoice {
    Projection,
    Exact,
}

impl FromStr for SamplerChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "projection" => Ok(SamplerChoice::Projection),
            "exact" => Ok(SamplerChoice::Exact),
            other => Err(format!("unknown sampler `{other}` (projection or exact)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WickKind {
    Centered,
    Mixed,
}

impl FromStr for WickKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "centered" => Ok(WickKind::Centered),
            "mixed" => Ok(WickKind::Mixed),
            other => Err(format!("unknown expansion `{other}` (centered or mixed)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckId {
    HolderTime,
    HurstDirection,
    Rectangular,
    SupH,
    PathwiseHolder,
    SdeRegularity,
    ErgodicRegularity,
    VDecay,
    CovarianceDecay,
    LawIdentity,
}

impl CheckId {
    pub const ALL: [CheckId; 10] = [
        CheckId::HolderTime,
        CheckId::HurstDirection,
        CheckId::Rectangular,
        CheckId::SupH,
        CheckId::PathwiseHolder,
        CheckId::SdeRegularity,
        CheckId::ErgodicRegularity,
        CheckId::VDecay,
        CheckId::CovarianceDecay,
        CheckId::LawIdentity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckId::HolderTime => "holder-time",
            CheckId::HurstDirection => "hurst-direction",
            CheckId::Rectangular => "rectangular",
            CheckId::SupH => "sup-h",
            CheckId::PathwiseHolder => "pathwise-holder",
            CheckId::SdeRegularity => "sde-regularity",
            CheckId::ErgodicRegularity => "ergodic-regularity",
            CheckId::VDecay => "v-decay",
            CheckId::CovarianceDecay => "covariance-decay",
            CheckId::LawIdentity => "law-identity",
        }
    }
}

impl FromStr for CheckId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        CheckId::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = CheckId::ALL.iter().map(|c| c.name()).collect();
                format!("unknown check `{s}` (one of {})", names.join(", "))
            })
    }
}
