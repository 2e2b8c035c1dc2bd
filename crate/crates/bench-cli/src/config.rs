//! Experiment configuration: a TOML file with one table per parameter group.
//! Unknown keys are rejected by name; missing or invalid values are collected
//! and reported together.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, Context};
use serde::Deserialize;

use rdars_core::baselines::{DasPlacement, SchemeId};
use rdars_core::channel::{PathLossParams, RicianParams, Topology};
use rdars_core::greedy::AoConfig;
use rdars_core::pdd::PddConfig;
use rdars_core::SystemDims;

/// Sweep axes mirroring the benchmark figures: transmit power, surface size,
/// connected-element count, Rician factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    PowerDbm,
    NElements,
    NConnected,
    RicianFactor,
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::PowerDbm => "power_dbm",
            SweepAxis::NElements => "n_elements",
            SweepAxis::NConnected => "n_connected",
            SweepAxis::RicianFactor => "rician_factor",
        }
    }
}

/// Initial selection fed to the penalized algorithm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PddInit {
    Fixed,
    Random,
}

/// Scale profiles: `desk` keeps CI runtimes low, `paper` matches the
/// reference simulation scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Profile {
    Desk,
    Paper,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDims {
    n_bs_antennas: Option<usize>,
    n_users: Option<usize>,
    n_elements: Option<usize>,
    n_connected: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTopology {
    bs_position: Option<[f64; 3]>,
    rdars_position: Option<[f64; 3]>,
    user_center: Option<[f64; 3]>,
    user_radius: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPathLoss {
    beta0_db: Option<f64>,
    exponent_rb: Option<f64>,
    exponent_ur: Option<f64>,
    exponent_ub: Option<f64>,
    shadow_sigma_db: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRician {
    kappa: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    axis: Option<SweepAxis>,
    values: Option<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPdd {
    rho0: Option<f64>,
    alpha: Option<f64>,
    eps_violation: Option<f64>,
    eps_rbp: Option<f64>,
    max_outer: Option<usize>,
    max_inner: Option<usize>,
    ccp_iters: Option<usize>,
    init_selection: Option<PddInit>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAo {
    eps_ao: Option<f64>,
    max_ao_rounds: Option<usize>,
    mm_iters_p9: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    output_path: Option<String>,
    trials: Option<u64>,
    base_seed: Option<u64>,
    power_dbm: Option<f64>,
    noise_dbm: Option<f64>,
    schemes: Option<Vec<String>>,
    das_placement: Option<String>,
    dims: Option<RawDims>,
    topology: Option<RawTopology>,
    path_loss: Option<RawPathLoss>,
    rician: Option<RawRician>,
    sweep: Option<RawSweep>,
    #[serde(default)]
    pdd: RawPdd,
    #[serde(default)]
    ao: RawAo,
}

/// Fully validated experiment description.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub dims: SystemDims,
    pub topo: Topology,
    pub pl: PathLossParams,
    pub ric: RicianParams,
    pub schemes: Vec<SchemeId>,
    pub sweep_axis: SweepAxis,
    pub sweep_values: Vec<f64>,
    pub trials: u64,
    pub base_seed: u64,
    /// Total transmit power (uniformly split across users) when the sweep
    /// axis is not power.
    pub power_dbm: f64,
    pub noise_dbm: f64,
    pub pdd: PddConfig,
    pub pdd_init: PddInit,
    pub ao: AoConfig,
    pub das_placement: DasPlacement,
    pub output_path: PathBuf,
}

impl ExperimentConfig {
    pub fn apply_profile(&mut self, profile: Profile) {
        match profile {
            Profile::Desk => {
                self.dims.n_elements = 64;
                self.trials = 50;
            }
            Profile::Paper => {
                self.dims.n_elements = 256;
                self.trials = 300;
            }
        }
    }
}

macro_rules! require {
    ($errs:ident, $field:expr, $name:literal) => {
        match $field {
            Some(v) => Some(v),
            None => {
                $errs.push(format!("missing required key '{}'", $name));
                None
            }
        }
    };
}

fn validate(raw: RawConfig) -> anyhow::Result<ExperimentConfig> {
    let mut errs: Vec<String> = Vec::new();

    let dims_raw = raw.dims.unwrap_or(RawDims {
        n_bs_antennas: None,
        n_users: None,
        n_elements: None,
        n_connected: None,
    });
    let n_bs = require!(errs, dims_raw.n_bs_antennas, "dims.n_bs_antennas");
    let n_users = require!(errs, dims_raw.n_users, "dims.n_users");
    let n_elements = require!(errs, dims_raw.n_elements, "dims.n_elements");
    let n_connected = require!(errs, dims_raw.n_connected, "dims.n_connected");

    let topo_raw = raw.topology.unwrap_or(RawTopology {
        bs_position: None,
        rdars_position: None,
        user_center: None,
        user_radius: None,
    });
    let bs_pos = require!(errs, topo_raw.bs_position, "topology.bs_position");
    let rd_pos = require!(errs, topo_raw.rdars_position, "topology.rdars_position");
    let user_center = require!(errs, topo_raw.user_center, "topology.user_center");
    let user_radius = require!(errs, topo_raw.user_radius, "topology.user_radius");

    let pl_raw = raw.path_loss.unwrap_or(RawPathLoss {
        beta0_db: None,
        exponent_rb: None,
        exponent_ur: None,
        exponent_ub: None,
        shadow_sigma_db: None,
    });
    let beta0 = require!(errs, pl_raw.beta0_db, "path_loss.beta0_db");
    let exp_rb = require!(errs, pl_raw.exponent_rb, "path_loss.exponent_rb");
    let exp_ur = require!(errs, pl_raw.exponent_ur, "path_loss.exponent_ur");
    let exp_ub = require!(errs, pl_raw.exponent_ub, "path_loss.exponent_ub");
    let shadow = require!(errs, pl_raw.shadow_sigma_db, "path_loss.shadow_sigma_db");

    let kappa = require!(errs, raw.rician.and_then(|r| r.kappa), "rician.kappa");

    let sweep_raw = raw.sweep.unwrap_or(RawSweep {
        axis: None,
        values: None,
    });
    let axis = require!(errs, sweep_raw.axis, "sweep.axis");
    let values = require!(errs, sweep_raw.values, "sweep.values");
    if let Some(v) = &values {
        if v.is_empty() {
            errs.push("sweep.values must be nonempty".into());
        }
    }

    let trials = require!(errs, raw.trials, "trials");
    if let Some(t) = trials {
        if t == 0 {
            errs.push("trials must be >= 1".into());
        }
    }
    let base_seed = require!(errs, raw.base_seed, "base_seed");
    let power_dbm = require!(errs, raw.power_dbm, "power_dbm");
    let noise_dbm = require!(errs, raw.noise_dbm, "noise_dbm");
    let output_path = require!(errs, raw.output_path, "output_path");

    let scheme_names = require!(errs, raw.schemes, "schemes");
    let mut schemes = Vec::new();
    if let Some(names) = &scheme_names {
        if names.is_empty() {
            errs.push("schemes must be nonempty".into());
        }
        for name in names {
            match SchemeId::from_str(name) {
                Ok(id) => schemes.push(id),
                Err(e) => errs.push(e.to_string()),
            }
        }
    }

    let das_placement = match raw.das_placement.as_deref() {
        None | Some("greedy") => DasPlacement::Greedy,
        Some("fixed") => DasPlacement::Fixed,
        Some(other) => {
            errs.push(format!(
                "das_placement must be 'greedy' or 'fixed', got '{other}'"
            ));
            DasPlacement::Greedy
        }
    };

    if let (Some(n), Some(a)) = (n_elements, n_connected) {
        if a > n {
            errs.push(format!("dims.n_connected = {a} exceeds dims.n_elements = {n}"));
        }
    }
    if let Some(k) = kappa {
        if !(0.0..=1.0).contains(&k) {
            errs.push(format!("rician.kappa = {k} outside [0, 1]"));
        }
    }

    let mut pdd = PddConfig::default();
    if let Some(v) = raw.pdd.rho0 {
        pdd.rho0 = v;
    }
    if let Some(v) = raw.pdd.alpha {
        if !(0.0 < v && v < 1.0) {
            errs.push(format!("pdd.alpha = {v} outside (0, 1)"));
        }
        pdd.alpha = v;
    }
    if let Some(v) = raw.pdd.eps_violation {
        pdd.eps_violation = v;
    }
    if let Some(v) = raw.pdd.eps_rbp {
        pdd.eps_rbp = v;
    }
    if let Some(v) = raw.pdd.max_outer {
        pdd.max_outer = v;
    }
    if let Some(v) = raw.pdd.max_inner {
        pdd.max_inner = v;
    }
    if let Some(v) = raw.pdd.ccp_iters {
        pdd.ccp_iters = v;
    }
    let pdd_init = raw.pdd.init_selection.unwrap_or(PddInit::Fixed);

    let mut ao = AoConfig::default();
    if let Some(v) = raw.ao.eps_ao {
        ao.eps_ao = v;
    }
    if let Some(v) = raw.ao.max_ao_rounds {
        ao.max_ao_rounds = v;
    }
    if let Some(v) = raw.ao.mm_iters_p9 {
        ao.mm_iters_p9 = v;
    }

    if !errs.is_empty() {
        return Err(anyhow!("invalid config:\n  - {}", errs.join("\n  - ")));
    }

    let dims = SystemDims::new(
        n_bs.unwrap(),
        n_users.unwrap(),
        n_elements.unwrap(),
        n_connected.unwrap(),
    )
    .map_err(|e| anyhow!("invalid config:\n  - {e}"))?;

    Ok(ExperimentConfig {
        dims,
        topo: Topology {
            bs_position: bs_pos.unwrap(),
            rdars_position: rd_pos.unwrap(),
            user_center: user_center.unwrap(),
            user_radius: user_radius.unwrap(),
        },
        pl: PathLossParams {
            beta0_db: beta0.unwrap(),
            exponent_rb: exp_rb.unwrap(),
            exponent_ur: exp_ur.unwrap(),
            exponent_ub: exp_ub.unwrap(),
            shadow_sigma_db: shadow.unwrap(),
        },
        ric: RicianParams {
            kappa: kappa.unwrap(),
        },
        schemes,
        sweep_axis: axis.unwrap(),
        sweep_values: values.unwrap(),
        trials: trials.unwrap(),
        base_seed: base_seed.unwrap(),
        power_dbm: power_dbm.unwrap(),
        noise_dbm: noise_dbm.unwrap(),
        pdd,
        pdd_init,
        ao,
        das_placement,
        output_path: PathBuf::from(output_path.unwrap()),
    })
}

/// Parses and validates an experiment file, reporting every violation at
/// once.
pub fn parse_config(path: &Path) -> anyhow::Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config file {}", path.display()))?;
    let raw: RawConfig = toml::from_str(&text)
        .map_err(|e| anyhow!("cannot parse {}: {e}", path.display()))?;
    validate(raw)
}
