//! Experiment execution: one seeded channel per (sweep value, trial) cell,
//! every scheme run on the identical realization with the identical phase
//! initialization, results gathered and sorted so parallelism never changes
//! the output bytes.

use std::time::Instant;

use anyhow::anyhow;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use rdars_core::baselines::{
    scheme_das, scheme_fixed_index, scheme_gs_rand, scheme_passive_ris, scheme_random_index,
    SchemeId, SchemeResult,
};
use rdars_core::channel::{generate_channel_set, LinkBudget, RicianParams};
use rdars_core::greedy::run_ao;
use rdars_core::model::{approx_objective, reduced_objective};
use rdars_core::pdd::run_pdd;
use rdars_core::{ChannelSet, ModeSelection, PhaseVector, SystemDims};

use crate::config::{ExperimentConfig, PddInit, SweepAxis};
use crate::csvio::{quantize_sig9, ResultRecord};

/// FNV-1a over the cell coordinates; mixing it into the base seed keeps
/// channel draws stable when schemes are added or reordered.
fn cell_hash(axis: &str, value: f64, trial: u64) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    let mut eat = |bytes: &[u8]| {
        for &b in bytes {
            h ^= b as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
    };
    eat(axis.as_bytes());
    eat(&value.to_bits().to_le_bytes());
    eat(&trial.to_le_bytes());
    h
}

const THETA_STREAM: u64 = 0x7468657461; // distinct sub-streams per purpose
const RANDOM_INDEX_STREAM: u64 = 0x72616e6469;
const GS_RAND_STREAM: u64 = 0x677372616e;
const PDD_INIT_STREAM: u64 = 0x706464;

/// Parameters of one sweep cell after applying the axis override.
struct CellParams {
    dims: SystemDims,
    ric: RicianParams,
    power_dbm: f64,
}

fn cell_params(cfg: &ExperimentConfig, value: f64) -> anyhow::Result<CellParams> {
    let mut dims = cfg.dims;
    let mut ric = cfg.ric;
    let mut power_dbm = cfg.power_dbm;
    match cfg.sweep_axis {
        SweepAxis::PowerDbm => power_dbm = value,
        SweepAxis::NElements => {
            let n = value as usize;
            if n as f64 != value || n == 0 {
                return Err(anyhow!("n_elements sweep value {value} is not a positive integer"));
            }
            dims.n_elements = n;
            if dims.n_connected > n {
                return Err(anyhow!(
                    "n_connected = {} exceeds swept n_elements = {n}",
                    dims.n_connected
                ));
            }
        }
        SweepAxis::NConnected => {
            let a = value as usize;
            if a as f64 != value {
                return Err(anyhow!("n_connected sweep value {value} is not an integer"));
            }
            if a > dims.n_elements {
                return Err(anyhow!(
                    "swept n_connected = {a} exceeds n_elements = {}",
                    dims.n_elements
                ));
            }
            dims.n_connected = a;
        }
        SweepAxis::RicianFactor => {
            if !(0.0..=1.0).contains(&value) {
                return Err(anyhow!("rician sweep value {value} outside [0, 1]"));
            }
            ric.kappa = value;
        }
    }
    Ok(CellParams {
        dims,
        ric,
        power_dbm,
    })
}

/// Runs one scheme on a fixed realization. Schemes that draw extra
/// randomness (random placement, random phases) derive it from the cell seed
/// and a per-purpose stream tag.
pub fn run_scheme(
    scheme: SchemeId,
    ch: &ChannelSet,
    dims: &SystemDims,
    cfg: &ExperimentConfig,
    theta0: &PhaseVector,
    cell_seed: u64,
) -> anyhow::Result<(SchemeResult, u64)> {
    let res = match scheme {
        SchemeId::PassiveRis => scheme_passive_ris(ch, dims, theta0, &cfg.ao)?,
        SchemeId::Das => scheme_das(ch, dims, cfg.das_placement)?,
        SchemeId::RandomIndex => scheme_random_index(
            ch,
            dims,
            cell_seed ^ RANDOM_INDEX_STREAM,
            theta0,
            &cfg.ao,
        )?,
        SchemeId::FixedIndex => scheme_fixed_index(ch, dims, theta0, &cfg.ao)?,
        SchemeId::GsRand => scheme_gs_rand(ch, dims, cell_seed ^ GS_RAND_STREAM)?,
        SchemeId::GsAo => {
            let out = run_ao(ch, dims, &cfg.ao, theta0)?;
            let exact = reduced_objective(ch, &out.selection, &out.phases)?;
            let approx = approx_objective(ch, &out.selection, &out.phases)?;
            SchemeResult {
                scheme,
                selection: out.selection,
                phases: out.phases,
                objective_exact: exact,
                objective_approx: approx,
                iterations: out.rounds,
                converged: out.converged,
            }
        }
        SchemeId::IbcdPdd => {
            let init_sel = match cfg.pdd_init {
                PddInit::Fixed => ModeSelection::first_k(ch.n_elements(), dims.n_connected)?,
                PddInit::Random => {
                    let mut rng = ChaCha12Rng::seed_from_u64(cell_seed ^ PDD_INIT_STREAM);
                    let n = ch.n_elements();
                    let mut pool: Vec<usize> = (0..n).collect();
                    for i in 0..dims.n_connected.min(n) {
                        let j = i + (rand::Rng::random::<u64>(&mut rng) as usize) % (n - i);
                        pool.swap(i, j);
                    }
                    let mut chosen = pool[..dims.n_connected].to_vec();
                    chosen.sort_unstable();
                    ModeSelection::from_indices(n, &chosen)?
                }
            };
            let out = run_pdd(ch, dims, &cfg.pdd, (&init_sel, theta0))?;
            let exact = reduced_objective(ch, &out.selection, &out.phases)?;
            let approx = approx_objective(ch, &out.selection, &out.phases)?;
            SchemeResult {
                scheme,
                selection: out.selection,
                phases: out.phases,
                objective_exact: exact,
                objective_approx: approx,
                iterations: out.outer_iterations,
                converged: out.converged,
            }
        }
        SchemeId::Exhaustive => {
            let (sel, val) = rdars_core::baselines::exhaustive_search(
                ch,
                dims,
                theta0,
                rdars_core::baselines::ObjectiveKind::Exact,
                rdars_core::baselines::DEFAULT_EXHAUSTIVE_CAP,
            )?;
            let approx = approx_objective(ch, &sel, theta0)?;
            SchemeResult {
                scheme,
                selection: sel,
                phases: theta0.clone(),
                objective_exact: val,
                objective_approx: approx,
                iterations: 0,
                converged: true,
            }
        }
    };
    let fp = ch.fingerprint();
    Ok((res, fp))
}

fn record_from(
    scheme_res: &SchemeResult,
    n_users: usize,
    sweep_value: f64,
    trial: u64,
    seed: u64,
) -> ResultRecord {
    ResultRecord {
        scheme: scheme_res.scheme,
        sweep_value: quantize_sig9(sweep_value),
        trial,
        seed,
        anmse: quantize_sig9(scheme_res.objective_exact / n_users as f64),
        objective_exact: quantize_sig9(scheme_res.objective_exact),
        objective_approx: quantize_sig9(scheme_res.objective_approx),
        iterations: scheme_res.iterations as u64,
        converged: scheme_res.converged,
        wall_time_ms: 0,
    }
}

/// Runs the full sweep. Cells are independent work items; the record list is
/// sorted by (sweep index, trial, scheme index) before returning, so the
/// output does not depend on scheduling.
pub fn run_experiment(cfg: &ExperimentConfig) -> anyhow::Result<Vec<ResultRecord>> {
    let cells: Vec<(usize, f64, u64)> = cfg
        .sweep_values
        .iter()
        .enumerate()
        .flat_map(|(vi, &value)| (0..cfg.trials).map(move |t| (vi, value, t)))
        .collect();

    let started = Instant::now();
    let mut results: Vec<(usize, u64, Vec<ResultRecord>)> = cells
        .par_iter()
        .map(|&(vi, value, trial)| -> anyhow::Result<(usize, u64, Vec<ResultRecord>)> {
            let params = cell_params(cfg, value)?;
            let seed = cfg.base_seed ^ cell_hash(cfg.sweep_axis.name(), value, trial);
            let budget = LinkBudget::from_dbm(params.power_dbm, cfg.noise_dbm);
            let ch = generate_channel_set(
                &params.dims,
                &cfg.topo,
                &cfg.pl,
                &params.ric,
                &budget,
                seed,
            )?;
            let mut theta_rng = ChaCha12Rng::seed_from_u64(seed ^ THETA_STREAM);
            let theta0 = PhaseVector::random(ch.n_elements(), &mut theta_rng);

            let mut records = Vec::with_capacity(cfg.schemes.len());
            for &scheme in &cfg.schemes {
                match run_scheme(scheme, &ch, &params.dims, cfg, &theta0, seed) {
                    Ok((res, _fp)) => {
                        records.push(record_from(&res, params.dims.n_users, value, trial, seed))
                    }
                    Err(e) => {
                        // Scheme failures are recorded, not fatal.
                        eprintln!(
                            "warn: {scheme} failed on sweep={value} trial={trial}: {e}"
                        );
                        records.push(ResultRecord {
                            scheme,
                            sweep_value: quantize_sig9(value),
                            trial,
                            seed,
                            anmse: f64::NAN,
                            objective_exact: f64::NAN,
                            objective_approx: f64::NAN,
                            iterations: 0,
                            converged: false,
                            wall_time_ms: 0,
                        });
                    }
                }
            }
            Ok((vi, trial, records))
        })
        .collect::<anyhow::Result<Vec<_>>>()?;

    results.sort_by_key(|(vi, trial, _)| (*vi, *trial));
    let scheme_index = |s: SchemeId| cfg.schemes.iter().position(|&x| x == s).unwrap_or(usize::MAX);
    let mut flat = Vec::with_capacity(results.len() * cfg.schemes.len());
    for (_, _, mut cell_records) in results {
        cell_records.sort_by_key(|r| scheme_index(r.scheme));
        flat.extend(cell_records);
    }
    eprintln!(
        "ran {} cells x {} schemes in {:.1}s",
        cells.len(),
        cfg.schemes.len(),
        started.elapsed().as_secs_f64()
    );
    Ok(flat)
}
