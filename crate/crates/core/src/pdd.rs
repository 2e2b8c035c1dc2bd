//! Inexact BCD-based penalty dual decomposition for the joint phase /
//! mode-selection problem.
//!
//! The binary cardinality constraint is lifted through the box-ball-alignment
//! reformulation: `x` lives in `[0,1]^N`, the auxiliary `v` in the ball
//! `||2v - 1|| <= sqrt(N)`, and feasibility is enforced through the two
//! equalities `x^T 1 = a` and `(2x-1)^T (2v-1) = N`, priced by the scalar
//! duals `lambda`, `nu` and a penalty parameter `rho`.
//!
//! Inner sweeps update `theta` (one MM step), `x` (CCP over a PSD/NSD split
//! of the quadratic surrogate, each round a box QP), and `v` (projected
//! gradient on the exact ball-constrained subproblem). The outer loop either
//! updates the duals (when the constraint violation is small) or shrinks
//! `rho`.

use crate::error::Result;
use crate::linalg::{
    hermitian_part, hermitian_solve, scale_cols, scale_rows, symmetric_part, C64, CMat, CVec,
    RMat, RVec,
};
use crate::model::{
    optimal_receiver, ChannelSet, ModeSelection, PhaseVector, Receiver, SystemDims,
};
use crate::subsolvers::{
    eig_split, mm_phase_step, phase_objective, project_ball, solve_ball_trace_inverse,
    solve_box_qp, BoxQp, MmScratch,
};

/// Algorithm parameters. The defaults follow standard penalty-method
/// practice: a loose initial penalty tightened geometrically, inner accuracy
/// well below the outer progress threshold.
///
/// `rho0` is dimensionless: the run scales it by `N^2 / f(init)` so that a
/// full-scale constraint violation is initially priced at roughly `1/rho0`
/// of the objective, independent of the SNR regime. Without this the penalty
/// either drowns the objective (path-loss-scaled channels, where the sum MSE
/// sits orders of magnitude below the squared residual range) or never binds.
#[derive(Debug, Clone, Copy)]
pub struct PddConfig {
    pub rho0: f64,
    /// Penalty shrink factor in (0, 1).
    pub alpha: f64,
    /// Constraint-violation threshold for the dual-update branch.
    pub eps_violation: f64,
    /// Relative objective progress threshold terminating an inner phase.
    pub eps_rbp: f64,
    pub max_outer: usize,
    pub max_inner: usize,
    /// Convex-concave rounds inside each x update.
    pub ccp_iters: usize,
    pub subsolver_tol: f64,
    pub subsolver_max_iter: usize,
    /// Disable to keep the phases frozen at their initial value (used by the
    /// selection-only oracle comparisons).
    pub update_phases: bool,
}

impl Default for PddConfig {
    fn default() -> Self {
        Self {
            rho0: 10.0,
            alpha: 0.6,
            eps_violation: 1e-6,
            eps_rbp: 1e-5,
            max_outer: 200,
            max_inner: 30,
            ccp_iters: 5,
            subsolver_tol: crate::subsolvers::SUBSOLVER_TOL,
            subsolver_max_iter: crate::subsolvers::SUBSOLVER_MAX_ITER,
            update_phases: true,
        }
    }
}

/// Primal/dual iterate of the augmented-Lagrangian loop.
#[derive(Debug, Clone)]
pub struct PddState {
    pub theta: PhaseVector,
    pub x: RVec,
    pub v: RVec,
    pub lambda: f64,
    pub nu: f64,
    pub rho: f64,
    /// Augmented-Lagrangian values after each inner sweep.
    pub history: Vec<f64>,
}

impl PddState {
    pub fn new(init_selection: &ModeSelection, init_phases: &PhaseVector, cfg: &PddConfig) -> Self {
        let x = init_selection.mask_f64();
        Self {
            theta: init_phases.clone(),
            v: x.clone(),
            x,
            lambda: 0.0,
            nu: 0.0,
            rho: cfg.rho0,
            history: Vec::new(),
        }
    }

    fn reflect_weights(&self) -> RVec {
        self.x.map(|t| 1.0 - t)
    }
}

fn cardinality_residual(x: &RVec, a: usize) -> f64 {
    x.sum() - a as f64
}

fn alignment_residual(x: &RVec, v: &RVec) -> f64 {
    let n = x.len() as f64;
    let sx = x.map(|t| 2.0 * t - 1.0);
    let sv = v.map(|t| 2.0 * t - 1.0);
    sx.dot(&sv) - n
}

/// Augmented Lagrangian
/// `f(x, v, theta) + nu g_align + lambda g_card + (g_card^2 + g_align^2) / (2 rho)`,
/// where the objective uses `A = diag(x)` in the reflected term and
/// `diag(v)` in the connected term.
pub fn al_objective(ch: &ChannelSet, st: &PddState, a: usize) -> Result<f64> {
    let f = phase_objective(ch, &st.reflect_weights(), &st.v, &st.theta)?;
    let g_card = cardinality_residual(&st.x, a);
    let g_align = alignment_residual(&st.x, &st.v);
    Ok(f + st.nu * g_align
        + st.lambda * g_card
        + (g_card * g_card + g_align * g_align) / (2.0 * st.rho))
}

/// One MM step on the phases at the current `(x, v)` anchor.
pub fn theta_update(ch: &ChannelSet, st: &PddState) -> Result<PhaseVector> {
    let scratch = MmScratch::build(ch, &st.reflect_weights(), &st.v, &st.theta)?;
    Ok(mm_phase_step(&scratch, &st.theta))
}

/// Outcome of one x-block update.
#[derive(Debug, Clone)]
pub struct XUpdate {
    pub x: RVec,
    pub subsolvers_converged: bool,
    /// Quadratic-surrogate objective after each CCP round (non-increasing).
    pub surrogate_trace: Vec<f64>,
}

/// Quadratic surrogate data `(Xi, zeta)` for the x subproblem at the anchor
/// `x^k`: the MM bound on the sum-MSE part plus the exact penalty/dual
/// quadratic.
fn build_x_surrogate(ch: &ChannelSet, st: &PddState, a: usize) -> Result<(RMat, RVec)> {
    let n = ch.n_elements();
    let m = ch.n_users();
    let sqrt_p = ch.sqrt_power();
    let br = scale_cols(&ch.h_ris, &sqrt_p);
    let bd = scale_cols(&ch.h_direct, &sqrt_p);
    let theta = st.theta.as_vec();

    // C from the connected weights v (fixed in this block).
    let weighted = scale_rows(&br, &CVec::from_fn(n, |i, _| C64::new(st.v[i], 0.0)));
    let c_mat = hermitian_part(
        &(CMat::identity(m, m) + (br.adjoint() * weighted).scale(1.0 / ch.noise_conn)),
    );
    let c_inv = crate::linalg::hermitian_inverse(&c_mat)?;
    let c_inv2 = &c_inv * &c_inv;

    // Anchor matrices at x^k.
    let refl = CVec::from_fn(n, |i, _| theta[i] * (1.0 - st.x[i]));
    let y_anchor = &bd + ch.g_bs.adjoint() * scale_rows(&br, &refl);
    let mut q_anchor = &y_anchor * &c_inv * y_anchor.adjoint();
    for i in 0..q_anchor.nrows() {
        q_anchor[(i, i)] += C64::new(ch.noise_bs, 0.0);
    }
    let q_anchor = hermitian_part(&q_anchor);
    let w1 = hermitian_solve(&q_anchor, &y_anchor)?; // Q^{-1} Y^k
    let s_mid = &w1 * &c_inv2 * w1.adjoint();

    // Hadamard quadratic coefficient:
    // (Phi H_r P C^{-1} P^H H_r^H Phi^H)^T o (G S G^H), taken as its real
    // part since x is real.
    let br_phi = scale_rows(&br, theta);
    let v_phi = &br_phi * &c_inv * br_phi.adjoint();
    let g_s_g = ch.g_bs.clone() * &s_mid * ch.g_bs.adjoint();
    let had = v_phi.transpose().component_mul(&g_s_g);
    let mut xi = RMat::from_fn(n, n, |i, j| had[(i, j)].re);
    xi = symmetric_part(&xi);

    // Penalty quadratic: (1 1^T + 4 u u^T) / (2 rho), u = 2v - 1.
    let u = st.v.map(|t| 2.0 * t - 1.0);
    let inv_2rho = 1.0 / (2.0 * st.rho);
    for i in 0..n {
        for j in 0..n {
            xi[(i, j)] += inv_2rho * (1.0 + 4.0 * u[i] * u[j]);
        }
    }

    // Linear term: MM cross terms plus the expanded penalty/dual terms.
    let b_full = &bd + ch.g_bs.adjoint() * scale_rows(&br, theta);
    let inner = CMat::identity(m, m) - &c_inv * b_full.adjoint() * &w1;
    let lin_mat = &br_phi * inner * &c_inv2 * w1.adjoint() * ch.g_bs.adjoint();
    let mut zeta = RVec::from_fn(n, |i, _| 2.0 * lin_mat[(i, i)].re);
    let u_sum = u.sum();
    let n_f = n as f64;
    let a_f = a as f64;
    for i in 0..n {
        zeta[i] += (st.rho * st.lambda - a_f) / st.rho
            + (2.0 * (st.rho * st.nu - n_f) - 2.0 * u_sum) * u[i] / st.rho;
    }
    Ok((xi, zeta))
}

/// Block update of `x`: builds the quadratic surrogate at the anchor `x^k`,
/// splits its matrix into PSD and NSD parts, and runs `ccp_iters` rounds of
/// the convex-concave procedure, each solving a box QP warm-started at the
/// previous iterate.
pub fn x_update(ch: &ChannelSet, st: &PddState, a: usize, cfg: &PddConfig) -> Result<XUpdate> {
    let (xi, zeta) = build_x_surrogate(ch, st, a)?;
    let (xi_p, xi_n) = eig_split(&xi)?;
    let surrogate = |x: &RVec| x.dot(&(&xi * x)) + zeta.dot(x);

    let mut x = st.x.clone();
    let mut trace = vec![surrogate(&x)];
    let mut all_converged = true;
    for _ in 0..cfg.ccp_iters {
        // Concave part linearized at the current point.
        let c = &zeta + (&xi_n * &x).scale(2.0);
        let qp = BoxQp::new(xi_p.clone(), c)?;
        let sol = solve_box_qp(&qp, &x, cfg.subsolver_tol, cfg.subsolver_max_iter);
        all_converged &= sol.converged;
        let cand = sol.x;
        let f_cand = surrogate(&cand);
        if f_cand <= *trace.last().unwrap() + 1e-12 {
            x = cand;
            trace.push(f_cand);
        } else {
            break;
        }
    }
    Ok(XUpdate {
        x,
        subsolvers_converged: all_converged,
        surrogate_trace: trace,
    })
}

/// Outcome of one v-block update.
#[derive(Debug, Clone)]
pub struct VUpdate {
    pub v: RVec,
    pub subsolver_converged: bool,
    pub objective_trace: Vec<f64>,
}

/// Block update of `v`: projected gradient with Armijo backtracking on the
/// exact ball-constrained objective
/// `Tr{K(v)^{-1}} + (g_align + rho nu)^2 / (2 rho)`.
pub fn v_update(ch: &ChannelSet, st: &PddState, cfg: &PddConfig) -> Result<VUpdate> {
    let n = ch.n_elements();
    let m = ch.n_users();
    let sqrt_p = ch.sqrt_power();
    let br = scale_cols(&ch.h_ris, &sqrt_p);
    let bd = scale_cols(&ch.h_direct, &sqrt_p);
    let theta = st.theta.as_vec();
    let refl = CVec::from_fn(n, |i, _| theta[i] * (1.0 - st.x[i]));
    let y = &bd + ch.g_bs.adjoint() * scale_rows(&br, &refl);
    let base = hermitian_part(
        &(CMat::identity(m, m) + (y.adjoint() * &y).scale(1.0 / ch.noise_bs)),
    );

    let sx = st.x.map(|t| 2.0 * t - 1.0);
    let n_f = n as f64;
    let rho = st.rho;
    let nu = st.nu;
    let inv_noise_c = 1.0 / ch.noise_conn;

    let objective = |v: &RVec| -> Result<(f64, RVec)> {
        let weighted = scale_rows(&br, &CVec::from_fn(n, |i, _| C64::new(v[i], 0.0)));
        let k = hermitian_part(&(&base + (br.adjoint() * weighted).scale(inv_noise_c)));
        let k_inv = crate::linalg::hermitian_inverse(&k)?;
        let trace: f64 = k_inv.diagonal().iter().map(|z| z.re).sum();
        let g_align = sx.dot(&v.map(|t| 2.0 * t - 1.0)) - n_f;
        let shifted = g_align + rho * nu;
        let value = trace + shifted * shifted / (2.0 * rho);

        // d Tr(K^{-1}) / d v_i = -sigma_c^{-2} || (H_r P K^{-1})_i ||^2.
        let t = &br * &k_inv;
        let mut grad = RVec::from_fn(n, |i, _| {
            -inv_noise_c * t.row(i).iter().map(|z| z.norm_sqr()).sum::<f64>()
        });
        for i in 0..n {
            grad[i] += 2.0 * shifted * sx[i] / rho;
        }
        Ok((value, grad))
    };

    let sol = solve_ball_trace_inverse(
        objective,
        n,
        &project_ball(&st.v, n),
        cfg.subsolver_tol,
        cfg.subsolver_max_iter,
    )?;
    Ok(VUpdate {
        v: sol.v,
        subsolver_converged: sol.converged,
        objective_trace: sol.objective_trace,
    })
}

/// `h = max(|x^T 1 - a|, |(2x-1)^T (2v-1) - N|)`.
pub fn constraint_violation(st: &PddState, a: usize) -> f64 {
    cardinality_residual(&st.x, a)
        .abs()
        .max(alignment_residual(&st.x, &st.v).abs())
}

/// Dual ascent when the violation is small, penalty tightening otherwise;
/// exactly one branch runs.
pub fn outer_update(st: &mut PddState, a: usize, cfg: &PddConfig) {
    let h = constraint_violation(st, a);
    if h < cfg.eps_violation {
        st.lambda += cardinality_residual(&st.x, a) / st.rho;
        st.nu += alignment_residual(&st.x, &st.v) / st.rho;
    } else {
        st.rho *= cfg.alpha;
    }
}

/// Rounds a box iterate to the `a` largest entries (ties to the lowest
/// index).
pub fn round_to_binary(x: &RVec, a: usize) -> ModeSelection {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&i, &j| x[j].partial_cmp(&x[i]).unwrap().then(i.cmp(&j)));
    let mut chosen = order[..a].to_vec();
    chosen.sort_unstable();
    ModeSelection::from_indices(x.len(), &chosen).expect("round_to_binary indices are valid")
}

/// Per-outer-iteration diagnostics record.
#[derive(Debug, Clone, Copy)]
pub struct PddIterRecord {
    pub outer_iter: usize,
    pub violation: f64,
    pub al_value: f64,
    pub rho: f64,
    pub lambda: f64,
    pub nu: f64,
}

#[derive(Debug, Clone)]
pub struct PddOutcome {
    pub selection: ModeSelection,
    pub phases: PhaseVector,
    pub receiver: Receiver,
    pub diagnostics: Vec<PddIterRecord>,
    pub converged: bool,
    pub outer_iterations: usize,
    pub subsolvers_converged: bool,
}

/// Runs the full double loop from the given initial selection/phases and
/// returns the rounded selection, final phases, the MMSE receiver on the
/// exact model, and per-outer-iteration diagnostics.
pub fn run_pdd(
    ch: &ChannelSet,
    dims: &SystemDims,
    cfg: &PddConfig,
    init: (&ModeSelection, &PhaseVector),
) -> Result<PddOutcome> {
    ch.validate()?;
    let a = dims.n_connected;
    let n = ch.n_elements();
    let mut st = PddState::new(init.0, init.1, cfg);

    if a == 0 {
        // Degenerate cardinality: x = v = 0 is the only feasible point and
        // the problem reduces to pure MM phase optimization.
        st.x = RVec::zeros(n);
        st.v = RVec::zeros(n);
        let (theta, steps) = if cfg.update_phases {
            crate::greedy::mm_phase_loop(
                ch,
                &RVec::from_element(n, 1.0),
                &RVec::zeros(n),
                &st.theta,
                cfg.max_outer * cfg.max_inner,
                cfg.eps_rbp,
            )?
        } else {
            (st.theta.clone(), 0)
        };
        st.theta = theta;
        let al = al_objective(ch, &st, a)?;
        let selection = ModeSelection::empty(n);
        let receiver = optimal_receiver(ch, &selection, &st.theta)?;
        return Ok(PddOutcome {
            selection,
            phases: st.theta,
            receiver,
            diagnostics: vec![PddIterRecord {
                outer_iter: 0,
                violation: 0.0,
                al_value: al,
                rho: st.rho,
                lambda: st.lambda,
                nu: st.nu,
            }],
            converged: true,
            outer_iterations: steps,
            subsolvers_converged: true,
        })
    }

    // Scale-free penalty initialization: price a full-range violation
    // (order N per equality, N^2 squared) at ~1/rho0 of the starting
    // objective.
    let f_init = phase_objective(ch, &st.reflect_weights(), &st.v, &st.theta)?;
    st.rho = cfg.rho0 * (n as f64).powi(2) / f_init.max(1e-12);

    let mut diagnostics = Vec::new();
    let mut converged = false;
    let mut subsolvers_ok = true;
    let mut outer_done = 0;

    for outer in 0..cfg.max_outer {
        let mut prev_al = al_objective(ch, &st, a)?;
        let mut rbp_met = false;
        for _ in 0..cfg.max_inner {
            if cfg.update_phases {
                st.theta = theta_update(ch, &st)?;
            }
            let xu = x_update(ch, &st, a, cfg)?;
            subsolvers_ok &= xu.subsolvers_converged;
            st.x = xu.x;
            let vu = v_update(ch, &st, cfg)?;
            subsolvers_ok &= vu.subsolver_converged;
            st.v = vu.v;

            let al = al_objective(ch, &st, a)?;
            st.history.push(al);
            let rel = (al - prev_al).abs() / prev_al.abs().max(1e-300);
            prev_al = al;
            if rel <= cfg.eps_rbp {
                rbp_met = true;
                break;
            }
        }

        let h = constraint_violation(&st, a);
        diagnostics.push(PddIterRecord {
            outer_iter: outer,
            violation: h,
            al_value: prev_al,
            rho: st.rho,
            lambda: st.lambda,
            nu: st.nu,
        });
        outer_done = outer + 1;
        if h <= cfg.eps_violation && rbp_met {
            converged = true;
            break;
        }
        outer_update(&mut st, a, cfg);
    }

    let selection = round_to_binary(&st.x, a);
    let receiver = optimal_receiver(ch, &selection, &st.theta)?;
    Ok(PddOutcome {
        selection,
        phases: st.theta,
        receiver,
        diagnostics,
        converged,
        outer_iterations: outer_done,
        subsolvers_converged: subsolvers_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    use crate::model::reduced_objective;

    fn random_channel(nr: usize, m: usize, n: usize, seed: u64) -> ChannelSet {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut draw = || C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
        ChannelSet {
            h_direct: CMat::from_fn(nr, m, |_, _| draw()),
            h_ris: CMat::from_fn(n, m, |_, _| draw()),
            g_bs: CMat::from_fn(n, nr, |_, _| draw()),
            power: RVec::from_element(m, 1.0),
            noise_bs: 0.5,
            noise_conn: 0.5,
        }
    }

    fn zero_channel(nr: usize, m: usize, n: usize) -> ChannelSet {
        ChannelSet {
            h_direct: CMat::zeros(nr, m),
            h_ris: CMat::zeros(n, m),
            g_bs: CMat::zeros(n, nr),
            power: RVec::from_element(m, 1.0),
            noise_bs: 1.0,
            noise_conn: 1.0,
        }
    }

    fn feasible_state(n: usize, a: usize, cfg: &PddConfig) -> PddState {
        let sel = ModeSelection::first_k(n, a).unwrap();
        PddState::new(&sel, &PhaseVector::ones(n), cfg)
    }

    #[test]
    fn al_objective_reduces_to_f_when_feasible() {
        let cfg = PddConfig::default();
        let ch = random_channel(2, 2, 4, 1);
        let mut st = feasible_state(4, 2, &cfg);
        st.lambda = 0.7;
        st.nu = -0.4;
        let al = al_objective(&ch, &st, 2).unwrap();
        let f = phase_objective(&ch, &st.x.map(|t| 1.0 - t), &st.v, &st.theta).unwrap();
        assert!((al - f).abs() < 1e-12);
    }

    #[test]
    fn al_objective_zero_channels_is_m() {
        let cfg = PddConfig::default();
        let ch = zero_channel(2, 3, 4);
        let st = feasible_state(4, 2, &cfg);
        let al = al_objective(&ch, &st, 2).unwrap();
        assert!((al - 3.0).abs() < 1e-12);
    }

    #[test]
    fn al_objective_double_entry() {
        // Independent re-evaluation from the raw formulas.
        let cfg = PddConfig::default();
        let ch = random_channel(2, 2, 5, 3);
        let mut rng = ChaCha12Rng::seed_from_u64(4);
        let mut st = feasible_state(5, 2, &cfg);
        st.x = RVec::from_fn(5, |_, _| rng.random::<f64>());
        st.v = project_ball(&RVec::from_fn(5, |_, _| rng.random::<f64>() * 1.5 - 0.2), 5);
        st.theta = PhaseVector::random(5, &mut rng);
        st.lambda = 0.3;
        st.nu = -0.2;
        st.rho = 2.5;
        let a = 2usize;

        let al = al_objective(&ch, &st, a).unwrap();

        let f = phase_objective(&ch, &st.x.map(|t| 1.0 - t), &st.v, &st.theta).unwrap();
        let gc: f64 = st.x.iter().sum::<f64>() - a as f64;
        let mut ga = -(5.0f64);
        for i in 0..5 {
            ga += (2.0 * st.x[i] - 1.0) * (2.0 * st.v[i] - 1.0);
        }
        let manual = f + st.nu * ga + st.lambda * gc + (gc * gc + ga * ga) / (2.0 * st.rho);
        assert!((al - manual).abs() <= 1e-12 * manual.abs().max(1.0));
    }

    #[test]
    fn x_update_penalty_only_equalizes_entries() {
        // Zero channels, v = 1/2 (u = 0), lambda = nu = 0, tiny rho: the only
        // active term is (x^T 1 - a)^2, whose symmetric minimizer from a
        // symmetric start is a/N per entry.
        let cfg = PddConfig {
            rho0: 1e-4,
            ..PddConfig::default()
        };
        let ch = zero_channel(2, 2, 4);
        let mut st = feasible_state(4, 2, &cfg);
        st.x = RVec::from_element(4, 0.5);
        st.v = RVec::from_element(4, 0.5);
        let out = x_update(&ch, &st, 2, &cfg).unwrap();
        for &xi in out.x.iter() {
            assert!((xi - 0.5).abs() < 1e-6, "entry {xi}");
        }
        // Same structure with a = 1: entries settle at 1/4.
        let out = x_update(&ch, &st, 1, &cfg).unwrap();
        for &xi in out.x.iter() {
            assert!((xi - 0.25).abs() < 1e-6, "entry {xi}");
        }
    }

    #[test]
    fn x_update_keeps_binary_fixed_point() {
        let cfg = PddConfig::default();
        let ch = zero_channel(2, 2, 6);
        let st = feasible_state(6, 3, &cfg);
        let out = x_update(&ch, &st, 3, &cfg).unwrap();
        assert!((out.x - st.x).norm() < 1e-8);
    }

    #[test]
    fn x_update_ccp_rounds_descend() {
        let cfg = PddConfig {
            ccp_iters: 5,
            ..PddConfig::default()
        };
        for seed in 0..10u64 {
            let ch = random_channel(2, 2, 8, 100 + seed);
            let mut rng = ChaCha12Rng::seed_from_u64(200 + seed);
            let mut st = feasible_state(8, 3, &cfg);
            st.x = RVec::from_fn(8, |_, _| rng.random::<f64>());
            st.v = project_ball(&st.x, 8);
            st.theta = PhaseVector::random(8, &mut rng);
            let out = x_update(&ch, &st, 3, &cfg).unwrap();
            for w in out.surrogate_trace.windows(2) {
                assert!(w[1] <= w[0] + 1e-9, "CCP rose: {:?}", out.surrogate_trace);
            }
        }
    }

    #[test]
    fn constraint_violation_examples() {
        let cfg = PddConfig::default();
        let st = feasible_state(4, 2, &cfg);
        assert_eq!(constraint_violation(&st, 2), 0.0);

        let mut st2 = st.clone();
        st2.x = RVec::from_element(4, 0.5);
        st2.v = RVec::from_element(4, 0.5);
        assert!((constraint_violation(&st2, 2) - 4.0).abs() < 1e-12);

        assert!(constraint_violation(&st2, 1) >= 0.0);
    }

    #[test]
    fn outer_update_branches() {
        let cfg = PddConfig::default();
        // Feasible: duals move by residual / rho (here zero), rho unchanged.
        let mut st = feasible_state(4, 2, &cfg);
        outer_update(&mut st, 2, &cfg);
        assert_eq!(st.lambda, 0.0);
        assert_eq!(st.nu, 0.0);
        assert_eq!(st.rho, cfg.rho0);

        // Violated: rho shrinks by exactly alpha, duals untouched.
        let mut st = feasible_state(4, 2, &cfg);
        st.x = RVec::from_element(4, 0.5);
        st.v = RVec::from_element(4, 0.5);
        outer_update(&mut st, 2, &cfg);
        assert_eq!(st.lambda, 0.0);
        assert_eq!(st.nu, 0.0);
        assert!((st.rho - cfg.rho0 * cfg.alpha).abs() < 1e-15);
    }

    #[test]
    fn outer_update_scripted_two_sweeps() {
        let cfg = PddConfig::default();
        let mut st = feasible_state(4, 2, &cfg);
        let mut rho_trace = vec![st.rho];
        // Infeasible sweep: rho shrinks, duals frozen.
        st.x = RVec::from_element(4, 0.6);
        st.v = RVec::from_element(4, 0.6);
        outer_update(&mut st, 2, &cfg);
        rho_trace.push(st.rho);
        assert_eq!((st.lambda, st.nu), (0.0, 0.0));
        // Feasible sweep: duals move, rho frozen.
        st.x = RVec::from_row_slice(&[1.0, 1.0, 0.0, 0.0]);
        st.v = st.x.clone();
        outer_update(&mut st, 2, &cfg);
        rho_trace.push(st.rho);
        assert_eq!(rho_trace[2], rho_trace[1]);
        for w in rho_trace.windows(2) {
            assert!(w[1] <= w[0]);
        }
    }

    #[test]
    fn round_to_binary_rules() {
        let x = RVec::from_row_slice(&[1.0, 0.0, 1.0, 0.0]);
        assert_eq!(round_to_binary(&x, 2).indices(), &[0, 2]);
        let x = RVec::from_row_slice(&[0.9, 0.2, 0.8, 0.1]);
        assert_eq!(round_to_binary(&x, 2).indices(), &[0, 2]);
        let x = RVec::from_element(4, 0.5);
        assert_eq!(round_to_binary(&x, 2).indices(), &[0, 1]);
    }

    #[test]
    fn inner_sweep_is_monotone_in_al() {
        // Fixed duals/penalty: each block is a descent step on the AL.
        let cfg = PddConfig::default();
        for seed in 0..50u64 {
            let ch = random_channel(2, 2, 8, 300 + seed);
            let mut rng = ChaCha12Rng::seed_from_u64(400 + seed);
            let mut st = feasible_state(8, 2, &cfg);
            st.theta = PhaseVector::random(8, &mut rng);
            let mut al = al_objective(&ch, &st, 2).unwrap();
            for _ in 0..3 {
                st.theta = theta_update(&ch, &st).unwrap();
                let after_theta = al_objective(&ch, &st, 2).unwrap();
                assert!(after_theta <= al + 1e-9, "theta step rose");
                st.x = x_update(&ch, &st, 2, &cfg).unwrap().x;
                let after_x = al_objective(&ch, &st, 2).unwrap();
                assert!(after_x <= after_theta + 1e-9, "x step rose");
                st.v = v_update(&ch, &st, &cfg).unwrap().v;
                let after_v = al_objective(&ch, &st, 2).unwrap();
                assert!(after_v <= after_x + 1e-9, "v step rose");
                al = after_v;
            }
        }
    }

    #[test]
    fn run_pdd_degenerate_a0_matches_pure_phase_optimization() {
        let ch = random_channel(3, 2, 6, 900);
        let dims = SystemDims::new(3, 2, 6, 0).unwrap();
        let cfg = PddConfig {
            eps_rbp: 1e-8,
            ..PddConfig::default()
        };
        let mut rng = ChaCha12Rng::seed_from_u64(901);
        let theta0 = PhaseVector::random(6, &mut rng);
        let init_sel = ModeSelection::empty(6);
        let out = run_pdd(&ch, &dims, &cfg, (&init_sel, &theta0)).unwrap();
        assert_eq!(out.selection.n_connected(), 0);
        assert!(out.converged);

        let (theta_ref, _) = crate::greedy::mm_phase_loop(
            &ch,
            &RVec::from_element(6, 1.0),
            &RVec::zeros(6),
            &theta0,
            cfg.max_outer * cfg.max_inner,
            cfg.eps_rbp,
        )
        .unwrap();
        assert!((out.phases.as_vec() - theta_ref.as_vec()).norm() < 1e-12);
    }

    #[test]
    fn run_pdd_selection_quality_with_frozen_phases() {
        // N = 8, a = 2, phases frozen: the rounded selection should land
        // within 2% of the exhaustive optimum on most seeds.
        let dims = SystemDims::new(2, 2, 8, 2).unwrap();
        let cfg = PddConfig {
            update_phases: false,
            ..PddConfig::default()
        };
        let mut hits = 0;
        let trials = 10u64;
        for seed in 0..trials {
            let ch = random_channel(2, 2, 8, 1000 + seed);
            let mut rng = ChaCha12Rng::seed_from_u64(1100 + seed);
            let theta = PhaseVector::random(8, &mut rng);
            let init = ModeSelection::first_k(8, 2).unwrap();
            let out = run_pdd(&ch, &dims, &cfg, (&init, &theta)).unwrap();
            let got = reduced_objective(&ch, &out.selection, &theta).unwrap();

            let mut best = f64::INFINITY;
            for i in 0..8 {
                for j in (i + 1)..8 {
                    let s = ModeSelection::from_indices(8, &[i, j]).unwrap();
                    best = best.min(reduced_objective(&ch, &s, &theta).unwrap());
                }
            }
            if got <= 1.02 * best {
                hits += 1;
            }
            assert_eq!(out.selection.n_connected(), 2);
        }
        assert!(hits * 10 >= trials * 8, "only {hits}/{trials} within 2%");
    }

    #[test]
    fn run_pdd_converged_runs_have_feasible_diagnostics() {
        let dims = SystemDims::new(2, 2, 8, 2).unwrap();
        let cfg = PddConfig::default();
        for seed in 0..5u64 {
            let ch = random_channel(2, 2, 8, 2000 + seed);
            let mut rng = ChaCha12Rng::seed_from_u64(2100 + seed);
            let theta0 = PhaseVector::random(8, &mut rng);
            let init = ModeSelection::first_k(8, 2).unwrap();
            let out = run_pdd(&ch, &dims, &cfg, (&init, &theta0)).unwrap();
            if out.converged {
                let last = out.diagnostics.last().unwrap();
                assert!(last.violation <= cfg.eps_violation);
            }
            // rho never increases; duals change only after feasible sweeps.
            for w in out.diagnostics.windows(2) {
                assert!(w[1].rho <= w[0].rho + 1e-15);
                let dual_moved =
                    w[1].lambda != w[0].lambda || w[1].nu != w[0].nu;
                if dual_moved {
                    assert!(w[0].violation < cfg.eps_violation);
                }
            }
            assert_eq!(out.selection.n_connected(), 2);
        }
    }
}
