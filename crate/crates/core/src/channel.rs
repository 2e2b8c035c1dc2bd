//! Seeded channel generation: 3GPP-style distance path loss with log-normal
//! shadowing, Rician small-scale fading with array-response LoS components,
//! and the deployment geometry used by the benchmark sweeps.
//!
//! Conventions (half-wavelength spacing everywhere):
//! * the BS carries a uniform linear array; its steering angle is measured
//!   from broadside, entry `k = exp(j pi k sin(psi))`;
//! * the surface carries a uniform planar array factored as `N = N_h x N_v`,
//!   response `a(az, el) = a_ula(N_h, arg_h) kron a_ula(N_v, arg_v)` with
//!   `arg_h = sin(az) sin(el)` and `arg_v = cos(el)` (`el` is the polar angle
//!   measured from the z axis);
//! * the user-BS channel is Rayleigh; the surface-related channels mix a
//!   deterministic LoS component with a Rayleigh one via the normalized
//!   Rician factor `kappa`.
//!
//! Generation is a pure function of the seed: user positions first, then the
//! per-link shadowing draws, then the NLoS matrices, in a fixed order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::linalg::{C64, CMat, CVec, RVec};
use crate::model::{ChannelSet, SystemDims};

/// Positions in meters; users are drawn uniformly in a horizontal disk of
/// radius `user_radius` around `user_center`.
#[derive(Debug, Clone, Copy)]
pub struct Topology {
    pub bs_position: [f64; 3],
    pub rdars_position: [f64; 3],
    pub user_center: [f64; 3],
    pub user_radius: f64,
}

impl Topology {
    pub fn validate(&self) -> Result<()> {
        let finite = |p: &[f64; 3]| p.iter().all(|x| x.is_finite());
        if !finite(&self.bs_position) || !finite(&self.rdars_position) || !finite(&self.user_center)
        {
            return Err(Error::NonFinite("Topology positions"));
        }
        if !(self.user_radius >= 0.0) {
            return Err(Error::InvalidInput("user_radius must be >= 0".into()));
        }
        Ok(())
    }
}

/// `PL(d) = 10^((beta0_db + shadow_db)/10) * d^{-alpha}`, with per-link
/// exponent `alpha` and a Gaussian shadowing draw in dB.
#[derive(Debug, Clone, Copy)]
pub struct PathLossParams {
    pub beta0_db: f64,
    pub exponent_rb: f64,
    pub exponent_ur: f64,
    pub exponent_ub: f64,
    pub shadow_sigma_db: f64,
}

impl PathLossParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.exponent_rb > 0.0) || !(self.exponent_ur > 0.0) || !(self.exponent_ub > 0.0) {
            return Err(Error::InvalidInput("path loss exponents must be > 0".into()));
        }
        if !(self.shadow_sigma_db >= 0.0) {
            return Err(Error::InvalidInput("shadow_sigma_db must be >= 0".into()));
        }
        Ok(())
    }
}

/// Normalized Rician factor in [0, 1] for the surface-related channels
/// (`kappa = 1` is pure LoS, `kappa = 0` pure Rayleigh). The user-BS channel
/// stays Rayleigh regardless.
#[derive(Debug, Clone, Copy)]
pub struct RicianParams {
    pub kappa: f64,
}

impl RicianParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.kappa) {
            return Err(Error::InvalidInput(format!(
                "rician kappa = {} outside [0, 1]",
                self.kappa
            )));
        }
        Ok(())
    }
}

/// BS linear array of `n_bs` elements and surface planar array factored as
/// `n_h x n_v`.
#[derive(Debug, Clone, Copy)]
pub struct ArrayGeometry {
    pub n_bs: usize,
    pub n_h: usize,
    pub n_v: usize,
}

impl ArrayGeometry {
    pub fn new(n_bs: usize, n_h: usize, n_v: usize, n_elements: usize) -> Result<Self> {
        if n_h * n_v != n_elements {
            return Err(Error::InvalidInput(format!(
                "planar factorization {n_h}x{n_v} does not cover {n_elements} elements"
            )));
        }
        Ok(Self { n_bs, n_h, n_v })
    }

    /// Most balanced factorization with `n_h >= n_v` (square when `n` is a
    /// perfect square).
    pub fn for_elements(n_bs: usize, n: usize) -> Self {
        let mut n_v = (n as f64).sqrt().floor() as usize;
        while n_v > 1 && n % n_v != 0 {
            n_v -= 1;
        }
        let n_v = n_v.max(1);
        Self {
            n_bs,
            n_h: n / n_v,
            n_v,
        }
    }

    pub fn n_elements(&self) -> usize {
        self.n_h * self.n_v
    }
}

/// Transmit/noise powers in watts used to populate a `ChannelSet`. The total
/// power is split uniformly across users.
#[derive(Debug, Clone, Copy)]
pub struct LinkBudget {
    pub total_power_w: f64,
    pub noise_bs_w: f64,
    pub noise_conn_w: f64,
}

impl LinkBudget {
    pub fn from_dbm(power_dbm: f64, noise_dbm: f64) -> Self {
        Self {
            total_power_w: dbm_to_watts(power_dbm),
            noise_bs_w: dbm_to_watts(noise_dbm),
            noise_conn_w: dbm_to_watts(noise_dbm),
        }
    }
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0) * 1e-3
}

/// Linear power gain of one link.
pub fn path_loss(
    distance_m: f64,
    exponent: f64,
    params: &PathLossParams,
    shadow_draw_db: f64,
) -> Result<f64> {
    if !(distance_m > 0.0) {
        return Err(Error::InvalidInput(format!(
            "path loss requires distance > 0, got {distance_m}"
        )));
    }
    Ok(10f64.powf((params.beta0_db + shadow_draw_db) / 10.0) * distance_m.powf(-exponent))
}

/// Half-wavelength ULA steering vector, entry `k = exp(j pi k sin(angle))`.
pub fn array_response_ula(n: usize, angle: f64) -> CVec {
    let s = angle.sin();
    CVec::from_fn(n, |k, _| C64::cis(std::f64::consts::PI * k as f64 * s))
}

fn ula_from_arg(n: usize, arg: f64) -> CVec {
    CVec::from_fn(n, |k, _| C64::cis(std::f64::consts::PI * k as f64 * arg))
}

/// Planar-array response as the Kronecker product of two ULA responses, in
/// `sin(azimuth) sin(elevation)` and `cos(elevation)`.
pub fn array_response_upa(geom: &ArrayGeometry, azimuth: f64, elevation: f64) -> CVec {
    let a_h = ula_from_arg(geom.n_h, azimuth.sin() * elevation.sin());
    let a_v = ula_from_arg(geom.n_v, elevation.cos());
    let mut out = CVec::zeros(geom.n_h * geom.n_v);
    for i in 0..geom.n_h {
        for j in 0..geom.n_v {
            out[i * geom.n_v + j] = a_h[i] * a_v[j];
        }
    }
    out
}

/// `sqrt(kappa) los + sqrt(1 - kappa) nlos`.
pub fn rician_channel(los: &CMat, nlos: &CMat, kappa: f64) -> Result<CMat> {
    if los.shape() != nlos.shape() {
        return Err(Error::dim(
            "rician_channel",
            format!("{}x{}", los.nrows(), los.ncols()),
            format!("{}x{}", nlos.nrows(), nlos.ncols()),
        ));
    }
    if !(0.0..=1.0).contains(&kappa) {
        return Err(Error::InvalidInput(format!("kappa = {kappa} outside [0, 1]")));
    }
    Ok(los.scale(kappa.sqrt()) + nlos.scale((1.0 - kappa).sqrt()))
}

fn standard_normal<R: Rng>(rng: &mut R) -> (f64, f64) {
    // Box-Muller on the ChaCha stream keeps generation reproducible without
    // depending on distribution-crate internals.
    let mut u1: f64 = rng.random();
    while u1 <= 1e-300 {
        u1 = rng.random();
    }
    let u2: f64 = rng.random();
    let r = (-2.0 * u1.ln()).sqrt();
    let phi = std::f64::consts::TAU * u2;
    (r * phi.cos(), r * phi.sin())
}

fn complex_gaussian<R: Rng>(rng: &mut R) -> C64 {
    let (a, b) = standard_normal(rng);
    C64::new(a, b) * std::f64::consts::FRAC_1_SQRT_2
}

fn cn_matrix<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    // Column-major fill order, pinned for reproducibility.
    let data: Vec<C64> = (0..rows * cols).map(|_| complex_gaussian(rng)).collect();
    CMat::from_vec(rows, cols, data)
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn norm3(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// Azimuth (atan2(y, x)) and polar angle from z of a direction vector.
fn az_el(d: [f64; 3]) -> (f64, f64) {
    let r = norm3(d).max(1e-300);
    (d[1].atan2(d[0]), (d[2] / r).clamp(-1.0, 1.0).acos())
}

/// ULA steering angle of a direction: measured from broadside, with the
/// array laid along the x axis.
fn ula_angle(d: [f64; 3]) -> f64 {
    let r = norm3(d).max(1e-300);
    (d[0] / r).clamp(-1.0, 1.0).asin()
}

/// Deterministic channel realization for one seed.
///
/// Draw order: user positions, shadowing (user-BS per user, user-RDARS per
/// user, RDARS-BS), then the NLoS matrices for `H_d`, `H_r`, `G`.
pub fn generate_channel_set(
    dims: &SystemDims,
    topo: &Topology,
    pl: &PathLossParams,
    ric: &RicianParams,
    budget: &LinkBudget,
    seed: u64,
) -> Result<ChannelSet> {
    topo.validate()?;
    pl.validate()?;
    ric.validate()?;
    let (nr, m, n) = (dims.n_bs_antennas, dims.n_users, dims.n_elements);
    let geom = ArrayGeometry::for_elements(nr, n);
    let mut rng = ChaCha12Rng::seed_from_u64(seed);

    // User positions: uniform in the disk, at the configured height.
    let mut users = Vec::with_capacity(m);
    for _ in 0..m {
        let u1: f64 = rng.random();
        let u2: f64 = rng.random();
        let r = topo.user_radius * u1.sqrt();
        let phi = std::f64::consts::TAU * u2;
        users.push([
            topo.user_center[0] + r * phi.cos(),
            topo.user_center[1] + r * phi.sin(),
            topo.user_center[2],
        ]);
    }

    let shadow = |rng: &mut ChaCha12Rng, sigma: f64| -> f64 {
        let (z, _) = standard_normal(rng);
        z * sigma
    };
    let shadows_ub: Vec<f64> = (0..m).map(|_| shadow(&mut rng, pl.shadow_sigma_db)).collect();
    let shadows_ur: Vec<f64> = (0..m).map(|_| shadow(&mut rng, pl.shadow_sigma_db)).collect();
    let shadow_rb = shadow(&mut rng, pl.shadow_sigma_db);

    let nlos_d = cn_matrix(nr, m, &mut rng);
    let nlos_r = cn_matrix(n, m, &mut rng);
    let nlos_g = cn_matrix(n, nr, &mut rng);

    // H_d: Rayleigh, per-user path loss.
    let mut h_direct = nlos_d;
    for (u, pos) in users.iter().enumerate() {
        let d = norm3(sub(*pos, topo.bs_position));
        let gain = path_loss(d, pl.exponent_ub, pl, shadows_ub[u])?.sqrt();
        for i in 0..nr {
            h_direct[(i, u)] *= gain;
        }
    }

    // H_r: Rician per user, LoS from the surface array response toward the
    // user.
    let mut h_ris = CMat::zeros(n, m);
    for (u, pos) in users.iter().enumerate() {
        let dir = sub(*pos, topo.rdars_position);
        let (az, el) = az_el(dir);
        let los = array_response_upa(&geom, az, el);
        let col = rician_channel(
            &CMat::from_column_slice(n, 1, los.as_slice()),
            &CMat::from_column_slice(n, 1, nlos_r.column(u).clone_owned().as_slice()),
            ric.kappa,
        )?;
        let d = norm3(dir);
        let gain = path_loss(d, pl.exponent_ur, pl, shadows_ur[u])?.sqrt();
        for i in 0..n {
            h_ris[(i, u)] = col[(i, 0)] * gain;
        }
    }

    // G: Rician, LoS = a_R(arrival at surface) a_B(departure at BS)^H.
    let dir_rb = sub(topo.bs_position, topo.rdars_position);
    let (az_a, el_a) = az_el(dir_rb);
    let a_r = array_response_upa(&geom, az_a, el_a);
    let a_b = array_response_ula(nr, ula_angle(sub(topo.rdars_position, topo.bs_position)));
    let los_g = CMat::from_fn(n, nr, |i, j| a_r[i] * a_b[j].conj());
    let d_rb = norm3(dir_rb);
    let gain_rb = path_loss(d_rb, pl.exponent_rb, pl, shadow_rb)?.sqrt();
    let g_bs = rician_channel(&los_g, &nlos_g, ric.kappa)?.scale(gain_rb);

    let ch = ChannelSet {
        h_direct,
        h_ris,
        g_bs,
        power: RVec::from_element(m, budget.total_power_w / m as f64),
        noise_bs: budget.noise_bs_w,
        noise_conn: budget.noise_conn_w,
    };
    ch.validate()?;
    Ok(ch)
}

#[cfg(test)]
pub mod tests_support {
    use super::*;

    /// Simulation-scale instance (reference deployment and path-loss numbers)
    /// with the BS-surface link scaled by `g_scale`.
    pub fn sv_instance(nr: usize, m: usize, n: usize, seed: u64, g_scale: f64) -> ChannelSet {
        let topo = Topology {
            bs_position: [0.0, 100.0, 5.0],
            rdars_position: [0.0, 50.0, 15.0],
            user_center: [0.0, 0.0, 1.5],
            user_radius: 10.0,
        };
        let pl = PathLossParams {
            beta0_db: -30.0,
            exponent_rb: 2.2,
            exponent_ur: 2.2,
            exponent_ub: 3.5,
            shadow_sigma_db: 5.8,
        };
        let ric = RicianParams { kappa: 0.75 };
        let dims = SystemDims::new(nr, m, n, 0).unwrap();
        let budget = LinkBudget::from_dbm(10.0, -90.0);
        let mut ch = generate_channel_set(&dims, &topo, &pl, &ric, &budget, seed).unwrap();
        ch.g_bs.scale_mut(g_scale);
        ch
    }
}
