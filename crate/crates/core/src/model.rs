//! System model for the RDARS-aided uplink: effective channel assembly, the
//! MMSE receiver, the average-MSE matrix and the scalar objectives minimized
//! by the optimizers.
//!
//! An RDARS with `N` elements splits into `a` elements wired to the BS
//! ("connection mode") and `N - a` passive reflecting elements. The stacked
//! receive channel is
//!
//! ```text
//! H = [ H_d + G^H (I - A) diag(theta) H_r ]   (N_r rows, BS antennas)
//!     [ A_a H_r                          ]   (a rows, connected elements)
//! ```
//!
//! with per-element mode mask `A` and unit-modulus reflection coefficients
//! `theta`. All operations here are pure functions of their inputs.

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{
    all_finite, hermitian_part, hermitian_solve, real_to_complex, scale_cols, scale_rows,
    trace_inverse_hermitian, C64, CMat, CVec, RVec,
};

/// Unit-modulus tolerance for reflection coefficients.
pub const PHASE_TOL: f64 = 1e-12;

/// Problem dimensions: BS antennas `N_r`, users `M`, surface elements `N`,
/// connected elements `a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SystemDims {
    pub n_bs_antennas: usize,
    pub n_users: usize,
    pub n_elements: usize,
    pub n_connected: usize,
}

impl SystemDims {
    pub fn new(
        n_bs_antennas: usize,
        n_users: usize,
        n_elements: usize,
        n_connected: usize,
    ) -> Result<Self> {
        if n_bs_antennas == 0 || n_users == 0 || n_elements == 0 {
            return Err(Error::InvalidInput(
                "n_bs_antennas, n_users and n_elements must all be >= 1".into(),
            ));
        }
        if n_connected > n_elements {
            return Err(Error::InvalidInput(format!(
                "n_connected = {n_connected} exceeds n_elements = {n_elements}"
            )));
        }
        Ok(Self {
            n_bs_antennas,
            n_users,
            n_elements,
            n_connected,
        })
    }
}

/// One channel realization plus the power/noise parameters that go with it.
///
/// `power` holds the per-user transmit powers `p_m` in watts (the diagonal of
/// `P^2`); `noise_bs`/`noise_conn` are the noise variances at the BS antennas
/// and at the connected elements.
#[derive(Debug, Clone)]
pub struct ChannelSet {
    pub h_direct: CMat,
    pub h_ris: CMat,
    pub g_bs: CMat,
    pub power: RVec,
    pub noise_bs: f64,
    pub noise_conn: f64,
}

impl ChannelSet {
    pub fn n_bs_antennas(&self) -> usize {
        self.h_direct.nrows()
    }

    pub fn n_users(&self) -> usize {
        self.h_direct.ncols()
    }

    pub fn n_elements(&self) -> usize {
        self.h_ris.nrows()
    }

    pub fn validate(&self) -> Result<()> {
        let (nr, m, n) = (self.n_bs_antennas(), self.n_users(), self.n_elements());
        if self.h_ris.ncols() != m {
            return Err(Error::dim(
                "ChannelSet.h_ris",
                format!("{n}x{m}"),
                format!("{}x{}", self.h_ris.nrows(), self.h_ris.ncols()),
            ));
        }
        if self.g_bs.nrows() != n || self.g_bs.ncols() != nr {
            return Err(Error::dim(
                "ChannelSet.g_bs",
                format!("{n}x{nr}"),
                format!("{}x{}", self.g_bs.nrows(), self.g_bs.ncols()),
            ));
        }
        if self.power.len() != m {
            return Err(Error::dim(
                "ChannelSet.power",
                format!("length {m}"),
                format!("length {}", self.power.len()),
            ));
        }
        if self.power.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
            return Err(Error::InvalidInput("power entries must be finite and >= 0".into()));
        }
        if !(self.noise_bs > 0.0) || !(self.noise_conn > 0.0) {
            return Err(Error::InvalidInput("noise variances must be > 0".into()));
        }
        if !all_finite(&self.h_direct) || !all_finite(&self.h_ris) || !all_finite(&self.g_bs) {
            return Err(Error::NonFinite("ChannelSet matrices"));
        }
        Ok(())
    }

    /// `diag(sqrt(p_1), ..., sqrt(p_M))` as a complex vector.
    pub fn sqrt_power(&self) -> CVec {
        CVec::from_iterator(
            self.power.len(),
            self.power.iter().map(|&p| C64::new(p.sqrt(), 0.0)),
        )
    }

    /// Stable fingerprint of the realization, for cross-scheme fairness checks.
    pub fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf29ce484222325;
        let mut eat = |x: f64| {
            for b in x.to_bits().to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x100000001b3);
            }
        };
        for m in [&self.h_direct, &self.h_ris, &self.g_bs] {
            for z in m.iter() {
                eat(z.re);
                eat(z.im);
            }
        }
        for &p in self.power.iter() {
            eat(p);
        }
        eat(self.noise_bs);
        eat(self.noise_conn);
        h
    }
}

/// Binary element-mode selection: `mask[n] = 1` marks element `n` (0-based)
/// as connected. `index_set` lists the connected indices in ascending order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModeSelection {
    mask: Vec<u8>,
    index_set: Vec<usize>,
}

impl ModeSelection {
    pub fn from_mask(mask: Vec<u8>) -> Result<Self> {
        if mask.iter().any(|&b| b > 1) {
            return Err(Error::InvalidInput("mode mask entries must be 0 or 1".into()));
        }
        let index_set = mask
            .iter()
            .enumerate()
            .filter(|(_, &b)| b == 1)
            .map(|(i, _)| i)
            .collect();
        Ok(Self { mask, index_set })
    }

    pub fn from_indices(n_elements: usize, indices: &[usize]) -> Result<Self> {
        let mut mask = vec![0u8; n_elements];
        for &i in indices {
            if i >= n_elements {
                return Err(Error::InvalidInput(format!(
                    "selection index {i} out of range for {n_elements} elements"
                )));
            }
            if mask[i] == 1 {
                return Err(Error::InvalidInput(format!("duplicate selection index {i}")));
            }
            mask[i] = 1;
        }
        Self::from_mask(mask)
    }

    pub fn empty(n_elements: usize) -> Self {
        Self {
            mask: vec![0; n_elements],
            index_set: Vec::new(),
        }
    }

    /// The "Fixed Index" selection: the first `k` elements connected.
    pub fn first_k(n_elements: usize, k: usize) -> Result<Self> {
        if k > n_elements {
            return Err(Error::InvalidInput(format!(
                "cannot connect {k} of {n_elements} elements"
            )));
        }
        let indices: Vec<usize> = (0..k).collect();
        Self::from_indices(n_elements, &indices)
    }

    pub fn mask(&self) -> &[u8] {
        &self.mask
    }

    pub fn indices(&self) -> &[usize] {
        &self.index_set
    }

    pub fn n_elements(&self) -> usize {
        self.mask.len()
    }

    pub fn n_connected(&self) -> usize {
        self.index_set.len()
    }

    /// Mask as a real vector (the diagonal of `A`).
    pub fn mask_f64(&self) -> RVec {
        RVec::from_iterator(self.mask.len(), self.mask.iter().map(|&b| b as f64))
    }

    /// Reflection weights `1 - mask` (the diagonal of `I - A`).
    pub fn reflect_f64(&self) -> RVec {
        RVec::from_iterator(self.mask.len(), self.mask.iter().map(|&b| 1.0 - b as f64))
    }
}

/// Unit-modulus reflection coefficients `theta` (one per element).
#[derive(Debug, Clone)]
pub struct PhaseVector {
    theta: CVec,
}

impl PhaseVector {
    pub fn new(theta: CVec) -> Result<Self> {
        for (n, z) in theta.iter().enumerate() {
            if (z.norm() - 1.0).abs() > PHASE_TOL {
                return Err(Error::InvalidInput(format!(
                    "|theta[{n}]| = {} violates the unit-modulus constraint",
                    z.norm()
                )));
            }
        }
        Ok(Self { theta })
    }

    pub fn ones(n: usize) -> Self {
        Self {
            theta: CVec::from_element(n, C64::new(1.0, 0.0)),
        }
    }

    pub fn from_phases(phases: &[f64]) -> Self {
        Self {
            theta: CVec::from_iterator(phases.len(), phases.iter().map(|&p| C64::cis(p))),
        }
    }

    /// Uniform random phases from the supplied generator.
    pub fn random<R: Rng>(n: usize, rng: &mut R) -> Self {
        let phases: Vec<f64> = (0..n)
            .map(|_| rng.random::<f64>() * std::f64::consts::TAU)
            .collect();
        Self::from_phases(&phases)
    }

    pub fn as_vec(&self) -> &CVec {
        &self.theta
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.len() == 0
    }
}

/// Receive beamforming matrix `W` (rows: users, columns: N_r + a receive
/// chains, BS antennas first then connected elements by ascending index).
#[derive(Debug, Clone)]
pub struct Receiver {
    pub w: CMat,
}

fn check_inputs(ch: &ChannelSet, sel: &ModeSelection, ph: &PhaseVector) -> Result<()> {
    ch.validate()?;
    if sel.n_elements() != ch.n_elements() {
        return Err(Error::dim(
            "ModeSelection",
            format!("{} elements", ch.n_elements()),
            format!("{} elements", sel.n_elements()),
        ));
    }
    if ph.len() != ch.n_elements() {
        return Err(Error::dim(
            "PhaseVector",
            format!("length {}", ch.n_elements()),
            format!("length {}", ph.len()),
        ));
    }
    Ok(())
}

/// Effective channel seen by the BS antennas:
/// `H_b = H_d + G^H (I - A) diag(theta) H_r`.
pub fn effective_bs_channel(ch: &ChannelSet, sel: &ModeSelection, ph: &PhaseVector) -> CMat {
    let weights = CVec::from_iterator(
        ch.n_elements(),
        sel.mask()
            .iter()
            .zip(ph.as_vec().iter())
            .map(|(&b, &t)| if b == 1 { C64::new(0.0, 0.0) } else { t }),
    );
    &ch.h_direct + ch.g_bs.adjoint() * scale_rows(&ch.h_ris, &weights)
}

/// Rows of `H_r` owned by the connected elements, ordered by ascending index.
pub fn connected_channel(ch: &ChannelSet, sel: &ModeSelection) -> CMat {
    let m = ch.n_users();
    let mut h_c = CMat::zeros(sel.n_connected(), m);
    for (row, &idx) in sel.indices().iter().enumerate() {
        h_c.set_row(row, &ch.h_ris.row(idx));
    }
    h_c
}

/// Diagonal of the effective noise covariance `blkdiag(sigma_b^2 I_{N_r},
/// sigma_c^2 I_a)`.
pub fn effective_noise_diag(ch: &ChannelSet, n_connected: usize) -> RVec {
    let nr = ch.n_bs_antennas();
    RVec::from_fn(nr + n_connected, |i, _| {
        if i < nr {
            ch.noise_bs
        } else {
            ch.noise_conn
        }
    })
}

/// Stacks the BS-side and connected-element channels into the
/// `(N_r + a) x M` effective channel.
pub fn assemble_effective_channel(
    ch: &ChannelSet,
    sel: &ModeSelection,
    ph: &PhaseVector,
) -> Result<CMat> {
    check_inputs(ch, sel, ph)?;
    let top = effective_bs_channel(ch, sel, ph);
    let bottom = connected_channel(ch, sel);
    let (nr, a, m) = (top.nrows(), bottom.nrows(), top.ncols());
    let mut h = CMat::zeros(nr + a, m);
    h.view_mut((0, 0), (nr, m)).copy_from(&top);
    h.view_mut((nr, 0), (a, m)).copy_from(&bottom);
    Ok(h)
}

/// MMSE receive beamforming matrix
/// `W* = P^H H^H (H P P^H H^H + Lambda)^{-1}`,
/// obtained through a Hermitian linear solve rather than explicit inversion.
pub fn optimal_receiver(ch: &ChannelSet, sel: &ModeSelection, ph: &PhaseVector) -> Result<Receiver> {
    let h = assemble_effective_channel(ch, sel, ph)?;
    let hp = scale_cols(&h, &ch.sqrt_power());
    let noise = effective_noise_diag(ch, sel.n_connected());
    let mut gram = &hp * hp.adjoint();
    for i in 0..gram.nrows() {
        gram[(i, i)] += C64::new(noise[i], 0.0);
    }
    // Gram^{-1} (H P), then W = (that)^H = P^H H^H Gram^{-1}.
    let z = hermitian_solve(&gram, &hp)?;
    Ok(Receiver { w: z.adjoint() })
}

/// Average MSE matrix `E[(s_hat - s)(s_hat - s)^H]`, computed from the
/// definition `(W H P - I)(W H P - I)^H + W Lambda W^H`.
pub fn mse_matrix(
    ch: &ChannelSet,
    sel: &ModeSelection,
    ph: &PhaseVector,
    rx: &Receiver,
) -> Result<CMat> {
    let h = assemble_effective_channel(ch, sel, ph)?;
    let m = ch.n_users();
    let chains = h.nrows();
    if rx.w.nrows() != m || rx.w.ncols() != chains {
        return Err(Error::dim(
            "Receiver",
            format!("{m}x{chains}"),
            format!("{}x{}", rx.w.nrows(), rx.w.ncols()),
        ));
    }
    let hp = scale_cols(&h, &ch.sqrt_power());
    let residual = &rx.w * &hp - CMat::identity(m, m);
    let noise = effective_noise_diag(ch, sel.n_connected());
    let w_noise = scale_cols(&rx.w, &real_to_complex(&noise));
    let mse = &residual * residual.adjoint() + w_noise * rx.w.adjoint();
    Ok(hermitian_part(&mse))
}

/// Gram matrix of the reduced objective:
/// `I_M + sigma_b^{-2} (H_b P)^H (H_b P) + sigma_c^{-2} (H_c P)^H (H_c P)`.
fn reduced_gram(ch: &ChannelSet, sel: &ModeSelection, ph: &PhaseVector) -> CMat {
    let m = ch.n_users();
    let sqrt_p = ch.sqrt_power();
    let bp = scale_cols(&effective_bs_channel(ch, sel, ph), &sqrt_p);
    let cp = scale_cols(&connected_channel(ch, sel), &sqrt_p);
    let k = CMat::identity(m, m)
        + (bp.adjoint() * &bp).scale(1.0 / ch.noise_bs)
        + (cp.adjoint() * &cp).scale(1.0 / ch.noise_conn);
    hermitian_part(&k)
}

/// Sum MSE after plugging in the optimal receiver:
/// `Tr{(I_M + sigma_b^{-2} R_b(A, Phi) + sigma_c^{-2} R_c(A))^{-1}}`.
///
/// `R_b` is assembled directly as `(H_b P)^H (H_b P)`, which keeps the
/// cross-term bookkeeping implicit. Values lie in `(0, M]`.
pub fn reduced_objective(ch: &ChannelSet, sel: &ModeSelection, ph: &PhaseVector) -> Result<f64> {
    check_inputs(ch, sel, ph)?;
    trace_inverse_hermitian(&reduced_gram(ch, sel, ph))
}

/// Low-complexity surrogate of the reduced objective: the reflected channel
/// is replaced by the full-reflection one `H_b' = H_d + G^H diag(theta) H_r`,
/// ignoring the `G^H A diag(theta) H_r` correction.
pub fn approx_objective(ch: &ChannelSet, sel: &ModeSelection, ph: &PhaseVector) -> Result<f64> {
    check_inputs(ch, sel, ph)?;
    let m = ch.n_users();
    let sqrt_p = ch.sqrt_power();
    let hb_full = &ch.h_direct + ch.g_bs.adjoint() * scale_rows(&ch.h_ris, ph.as_vec());
    let bp = scale_cols(&hb_full, &sqrt_p);
    let cp = scale_cols(&connected_channel(ch, sel), &sqrt_p);
    let k = CMat::identity(m, m)
        + (bp.adjoint() * &bp).scale(1.0 / ch.noise_bs)
        + (cp.adjoint() * &cp).scale(1.0 / ch.noise_conn);
    trace_inverse_hermitian(&hermitian_part(&k))
}

/// Average normalized MSE: mean over realizations of `Tr(MSE) / M`.
pub fn anmse(trace_values: &[f64], n_users: usize) -> Result<f64> {
    if trace_values.is_empty() {
        return Err(Error::InvalidInput("anmse requires at least one realization".into()));
    }
    if n_users == 0 {
        return Err(Error::InvalidInput("anmse requires n_users >= 1".into()));
    }
    let sum: f64 = trace_values.iter().sum();
    Ok(sum / (trace_values.len() as f64 * n_users as f64))
}
