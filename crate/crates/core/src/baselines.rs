//! Comparison schemes and ground-truth oracles: passive surface, distributed
//! antennas, random/fixed element placement, greedy selection without phase
//! optimization, exhaustive subset search, and the single-user closed forms
//! for the SISO and pure-LoS regimes.

use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::greedy::{greedy_mode_select, phase_optimize_p9_steps, AoConfig};
use crate::linalg::{C64, CMat};
use crate::model::{
    approx_objective, reduced_objective, ChannelSet, ModeSelection, PhaseVector, SystemDims,
};

/// Subset count above which exhaustive enumeration refuses to run.
pub const DEFAULT_EXHAUSTIVE_CAP: u128 = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeId {
    PassiveRis,
    Das,
    RandomIndex,
    FixedIndex,
    GsRand,
    GsAo,
    IbcdPdd,
    Exhaustive,
}

impl SchemeId {
    pub const ALL: [SchemeId; 8] = [
        SchemeId::PassiveRis,
        SchemeId::Das,
        SchemeId::RandomIndex,
        SchemeId::FixedIndex,
        SchemeId::GsRand,
        SchemeId::GsAo,
        SchemeId::IbcdPdd,
        SchemeId::Exhaustive,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SchemeId::PassiveRis => "PassiveRIS",
            SchemeId::Das => "DAS",
            SchemeId::RandomIndex => "RandomIndex",
            SchemeId::FixedIndex => "FixedIndex",
            SchemeId::GsRand => "GSRand",
            SchemeId::GsAo => "GSAO",
            SchemeId::IbcdPdd => "IBCDPDD",
            SchemeId::Exhaustive => "Exhaustive",
        }
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SchemeId::ALL
            .iter()
            .copied()
            .find(|id| id.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown scheme '{s}'")))
    }
}

/// Selection/phases produced by one scheme plus both scalar objectives.
#[derive(Debug, Clone)]
pub struct SchemeResult {
    pub scheme: SchemeId,
    pub selection: ModeSelection,
    pub phases: PhaseVector,
    pub objective_exact: f64,
    pub objective_approx: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn finish(
    scheme: SchemeId,
    ch: &ChannelSet,
    selection: ModeSelection,
    phases: PhaseVector,
    iterations: usize,
    converged: bool,
) -> Result<SchemeResult> {
    let objective_exact = reduced_objective(ch, &selection, &phases)?;
    let objective_approx = approx_objective(ch, &selection, &phases)?;
    Ok(SchemeResult {
        scheme,
        selection,
        phases,
        objective_exact,
        objective_approx,
        iterations,
        converged,
    })
}

/// Fully passive surface: every element reflects, phases MM-optimized. This
/// is exactly the alternating loop run with zero connected elements.
pub fn scheme_passive_ris(
    ch: &ChannelSet,
    dims: &SystemDims,
    theta0: &PhaseVector,
    ao: &AoConfig,
) -> Result<SchemeResult> {
    let dims0 = SystemDims {
        n_connected: 0,
        ..*dims
    };
    let out = crate::greedy::run_ao(ch, &dims0, ao, theta0)?;
    finish(
        SchemeId::PassiveRis,
        ch,
        out.selection,
        out.phases,
        out.rounds,
        out.converged,
    )
}

/// Placement rule for the distributed-antenna baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DasPlacement {
    /// Rows chosen by the same greedy gain rule (reflection disabled).
    Greedy,
    /// The first `a` rows.
    Fixed,
}

/// Distributed antennas only: the reflection path is removed entirely
/// (`G = 0`), leaving the direct channel plus `a` connected rows of `H_r`
/// with the connected-side noise floor.
pub fn scheme_das(ch: &ChannelSet, dims: &SystemDims, placement: DasPlacement) -> Result<SchemeResult> {
    let mut ch_das = ch.clone();
    ch_das.g_bs = CMat::zeros(ch.n_elements(), ch.n_bs_antennas());
    let phases = PhaseVector::ones(ch.n_elements());
    let sel = match placement {
        DasPlacement::Greedy => greedy_mode_select(&ch_das, &phases, dims)?,
        DasPlacement::Fixed => ModeSelection::first_k(ch.n_elements(), dims.n_connected)?,
    };
    finish(SchemeId::Das, &ch_das, sel, phases, 0, true)
}

/// Uniformly random `a`-subset (seeded), phases MM-optimized.
pub fn scheme_random_index(
    ch: &ChannelSet,
    dims: &SystemDims,
    seed: u64,
    theta0: &PhaseVector,
    ao: &AoConfig,
) -> Result<SchemeResult> {
    let n = ch.n_elements();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut pool: Vec<usize> = (0..n).collect();
    // Partial Fisher-Yates: the first `a` slots end up a uniform subset.
    for i in 0..dims.n_connected.min(n) {
        let j = i + (rand::Rng::random::<u64>(&mut rng) as usize) % (n - i);
        pool.swap(i, j);
    }
    let mut chosen = pool[..dims.n_connected].to_vec();
    chosen.sort_unstable();
    let sel = ModeSelection::from_indices(n, &chosen)?;
    let (phases, steps) = phase_optimize_p9_steps(ch, &sel, theta0, ao.mm_iters_p9)?;
    finish(SchemeId::RandomIndex, ch, sel, phases, steps, true)
}

/// First `a` elements connected, phases MM-optimized.
pub fn scheme_fixed_index(
    ch: &ChannelSet,
    dims: &SystemDims,
    theta0: &PhaseVector,
    ao: &AoConfig,
) -> Result<SchemeResult> {
    let sel = ModeSelection::first_k(ch.n_elements(), dims.n_connected)?;
    let (phases, steps) = phase_optimize_p9_steps(ch, &sel, theta0, ao.mm_iters_p9)?;
    finish(SchemeId::FixedIndex, ch, sel, phases, steps, true)
}

/// Greedy mode selection at seeded random phases, phases left unoptimized.
pub fn scheme_gs_rand(ch: &ChannelSet, dims: &SystemDims, seed: u64) -> Result<SchemeResult> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let phases = PhaseVector::random(ch.n_elements(), &mut rng);
    let sel = greedy_mode_select(ch, &phases, dims)?;
    finish(SchemeId::GsRand, ch, sel, phases, 0, true)
}

/// Which objective the exhaustive oracle minimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjectiveKind {
    Exact,
    Approx,
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

/// Enumerates every `a`-subset in lexicographic order and returns the
/// minimizer of the chosen objective at fixed phases.
pub fn exhaustive_search(
    ch: &ChannelSet,
    dims: &SystemDims,
    ph: &PhaseVector,
    objective: ObjectiveKind,
    cap: u128,
) -> Result<(ModeSelection, f64)> {
    let n = ch.n_elements();
    let a = dims.n_connected;
    let subsets = binomial(n, a);
    if subsets > cap {
        return Err(Error::CapExceeded { subsets, cap });
    }
    let eval = |sel: &ModeSelection| -> Result<f64> {
        match objective {
            ObjectiveKind::Exact => reduced_objective(ch, sel, ph),
            ObjectiveKind::Approx => approx_objective(ch, sel, ph),
        }
    };
    if a == 0 {
        let sel = ModeSelection::empty(n);
        let val = eval(&sel)?;
        return Ok((sel, val));
    }
    let mut best: Option<(ModeSelection, f64)> = None;
    for combo in (0..n).combinations(a) {
        let sel = ModeSelection::from_indices(n, &combo)?;
        let val = eval(&sel)?;
        match &best {
            Some((_, b)) if *b <= val => {}
            _ => best = Some((sel, val)),
        }
    }
    Ok(best.expect("at least one subset"))
}

/// Single-user single-BS-antenna closed form: connect the `a` strongest
/// `|h_r|` entries and co-phase every reflected path with the direct link,
/// `theta_n = exp(j(arg h_d - arg h_{r,n} + arg g_n))`.
pub fn siso_closed_form(ch: &ChannelSet, a: usize) -> Result<(ModeSelection, PhaseVector)> {
    if ch.n_bs_antennas() != 1 || ch.n_users() != 1 {
        return Err(Error::InvalidInput(format!(
            "siso_closed_form requires N_r = M = 1, got N_r = {}, M = {}",
            ch.n_bs_antennas(),
            ch.n_users()
        )));
    }
    let n = ch.n_elements();
    if a > n {
        return Err(Error::InvalidInput(format!("a = {a} exceeds N = {n}")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        ch.h_ris[(j, 0)]
            .norm_sqr()
            .partial_cmp(&ch.h_ris[(i, 0)].norm_sqr())
            .unwrap()
            .then(i.cmp(&j))
    });
    let mut chosen = order[..a].to_vec();
    chosen.sort_unstable();
    let sel = ModeSelection::from_indices(n, &chosen)?;

    let hd = ch.h_direct[(0, 0)];
    let phases: Vec<f64> = (0..n)
        .map(|i| hd.arg() - ch.h_ris[(i, 0)].arg() + ch.g_bs[(i, 0)].arg())
        .collect();
    Ok((sel, PhaseVector::from_phases(&phases)))
}

/// Relative tolerance on the second singular value when checking the rank-1
/// LoS premise.
const RANK1_TOL: f64 = 1e-8;

/// Pure-LoS single-user closed form: with `G = kappa_g a_gr a_gt^H`, the
/// optimal reflection phases are
/// `theta = exp(j(arg(a_tilde) - arg(h_d^H a_gt)))` with
/// `a_tilde_n = kappa_g a_{gr,n} (1 - x_n) conj(h_{r,n})`; connected entries
/// are immaterial and set to 1.
pub fn los_closed_form(ch: &ChannelSet, sel: &ModeSelection) -> Result<PhaseVector> {
    if ch.n_users() != 1 {
        return Err(Error::InvalidInput(
            "los_closed_form requires a single user".into(),
        ));
    }
    let n = ch.n_elements();
    if sel.n_elements() != n {
        return Err(Error::dim(
            "los_closed_form",
            format!("{n} elements"),
            format!("{}", sel.n_elements()),
        ));
    }
    let svd = ch.g_bs.clone().svd(true, true);
    let s = &svd.singular_values;
    if s.len() > 1 && s[1] > RANK1_TOL * s[0] {
        return Err(Error::InvalidInput(format!(
            "BS-surface channel is not rank one (sigma2/sigma1 = {:.3e})",
            s[1] / s[0]
        )));
    }
    let u = svd.u.as_ref().expect("svd with u");
    let v_t = svd.v_t.as_ref().expect("svd with v_t");
    let a_gr: Vec<C64> = (0..n).map(|i| u[(i, 0)]).collect();
    let a_gt: Vec<C64> = (0..ch.n_bs_antennas()).map(|j| v_t[(0, j)].conj()).collect();

    // arg(h_d^H a_gt)
    let mut hd_at = C64::new(0.0, 0.0);
    for (j, &at) in a_gt.iter().enumerate() {
        hd_at += ch.h_direct[(j, 0)].conj() * at;
    }
    let ref_phase = hd_at.arg();

    let mask = sel.mask();
    let phases: Vec<f64> = (0..n)
        .map(|i| {
            if mask[i] == 1 {
                0.0
            } else {
                let a_tilde = a_gr[i] * ch.h_ris[(i, 0)].conj();
                a_tilde.arg() - ref_phase
            }
        })
        .collect();
    Ok(PhaseVector::from_phases(&phases))
}

/// The single-user link-gain objective maximized by the closed forms:
/// `||h_d + G^H (I - A) diag(theta) h_r||^2 + h_r^H A h_r`.
pub fn p8_objective(ch: &ChannelSet, sel: &ModeSelection, ph: &PhaseVector) -> Result<f64> {
    if ch.n_users() != 1 {
        return Err(Error::InvalidInput("p8_objective requires a single user".into()));
    }
    let hb = crate::model::effective_bs_channel(ch, sel, ph);
    let mut connected_gain = 0.0;
    for &i in sel.indices() {
        connected_gain += ch.h_ris[(i, 0)].norm_sqr();
    }
    Ok(hb.column(0).norm_squared() + connected_gain)
}
