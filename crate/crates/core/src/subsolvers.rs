//! Convex kernels behind the penalized block updates: Euclidean projections
//! onto the box and the relaxed-binary ball, an accelerated projected-gradient
//! solver for box-constrained quadratics, a projected-gradient solver with
//! Armijo backtracking for the ball-constrained trace-inverse problem, the
//! two-level MM phase-update step, and the PSD/NSD eigenvalue split used by
//! the convex-concave procedure.
//!
//! First-order methods are used throughout (no external conic solver); the
//! per-iteration cost stays O(N^2).

use nalgebra::SymmetricEigen;

use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_inverse, hermitian_part, largest_eigenvalue_psd, scale_cols, scale_rows,
    symmetric_part, trace_inverse_hermitian, C64, CMat, CVec, RMat, RVec,
};
use crate::model::{ChannelSet, PhaseVector};

/// Default relative accuracy of the inner solvers; chosen so inner accuracy
/// dominates the outer relative-progress threshold.
pub const SUBSOLVER_TOL: f64 = 1e-8;
pub const SUBSOLVER_MAX_ITER: usize = 5000;

/// Entrywise clamp onto `[0, 1]^N`.
pub fn project_box(x: &RVec) -> RVec {
    x.map(|v| v.clamp(0.0, 1.0))
}

/// Euclidean projection onto `{ v : ||2v - 1||_2 <= sqrt(n) }`.
pub fn project_ball(v: &RVec, n: usize) -> RVec {
    let u = v.map(|x| 2.0 * x - 1.0);
    let norm = u.norm();
    let radius = (n as f64).sqrt();
    if norm <= radius {
        return v.clone();
    }
    u.map(|x| (1.0 + x * radius / norm) / 2.0)
}

/// Box-constrained quadratic `min_x x^T q x + c^T x  s.t. 0 <= x <= 1`, with
/// `q` symmetric PSD.
#[derive(Debug, Clone)]
pub struct BoxQp {
    pub q: RMat,
    pub c: RVec,
}

impl BoxQp {
    pub fn new(q: RMat, c: RVec) -> Result<Self> {
        if q.nrows() != q.ncols() || q.nrows() != c.len() {
            return Err(Error::dim(
                "BoxQp",
                format!("square q matching c of length {}", c.len()),
                format!("{}x{}", q.nrows(), q.ncols()),
            ));
        }
        let asym = (&q - q.transpose()).amax();
        if asym > 1e-10 {
            return Err(Error::InvalidInput(format!(
                "BoxQp matrix is not symmetric (max asymmetry {asym:.3e})"
            )));
        }
        Ok(Self { q, c })
    }

    pub fn objective(&self, x: &RVec) -> f64 {
        x.dot(&(&self.q * x)) + self.c.dot(x)
    }

    fn gradient(&self, x: &RVec) -> RVec {
        (&self.q * x).scale(2.0) + &self.c
    }
}

#[derive(Debug, Clone)]
pub struct QpSolution {
    pub x: RVec,
    pub converged: bool,
    pub iterations: usize,
    /// Objective after every accepted iterate (monotone non-increasing).
    pub objective_trace: Vec<f64>,
}

/// Accelerated projected gradient (monotone variant) with step `1/L`, where
/// `L = 2 lambda_max(q)` is the Lipschitz constant of the gradient, found by
/// power iteration. Stops when the prox-gradient displacement falls below
/// `tol * (1 + ||x||)` or on `max_iter`.
pub fn solve_box_qp(p: &BoxQp, x0: &RVec, tol: f64, max_iter: usize) -> QpSolution {
    let lip = 2.0 * largest_eigenvalue_psd(&p.q, 1e-6, 10_000);
    let step = 1.0 / lip.max(1e-30);

    let mut x = project_box(x0);
    let mut f_x = p.objective(&x);
    let mut x_prev = x.clone();
    let mut t_prev = 1.0f64;
    let mut trace = vec![f_x];

    for it in 0..max_iter {
        let t = (1.0 + (1.0 + 4.0 * t_prev * t_prev).sqrt()) / 2.0;
        let beta = (t_prev - 1.0) / t;
        let y = &x + (&x - &x_prev).scale(beta);
        let cand = project_box(&(&y - p.gradient(&y).scale(step)));
        let f_cand = p.objective(&cand);

        let (next, f_next, t_next) = if f_cand <= f_x {
            (cand, f_cand, t)
        } else {
            // Momentum overshot: plain projected-gradient step from x, which
            // cannot increase the objective; restart the momentum sequence.
            let fallback = project_box(&(&x - p.gradient(&x).scale(step)));
            let f_fb = p.objective(&fallback);
            if f_fb <= f_x {
                (fallback, f_fb, 1.0)
            } else {
                (x.clone(), f_x, 1.0)
            }
        };

        let displacement = (&next - &x).norm();
        x_prev = std::mem::replace(&mut x, next);
        t_prev = t_next;
        f_x = f_next;
        trace.push(f_x);

        // Prox-gradient residual at the accepted point.
        let resid = (&x - project_box(&(&x - p.gradient(&x).scale(step)))).norm();
        if resid <= tol * (1.0 + x.norm()) && displacement <= tol * (1.0 + x.norm()) {
            return QpSolution {
                x,
                converged: true,
                iterations: it + 1,
                objective_trace: trace,
            };
        }
    }
    QpSolution {
        x,
        converged: false,
        iterations: max_iter,
        objective_trace: trace,
    }
}

#[derive(Debug, Clone)]
pub struct BallSolution {
    pub v: RVec,
    pub converged: bool,
    pub iterations: usize,
    pub objective_trace: Vec<f64>,
}

/// Projected gradient with Armijo backtracking (halving, initial step 1.0)
/// for a smooth convex objective over `||2v - 1|| <= sqrt(n)`.
///
/// The objective callback returns `(value, gradient)`; an `Err` during the
/// line search is treated as an infeasible trial point (step rejected), while
/// an `Err` at the starting point is propagated.
pub fn solve_ball_trace_inverse<F>(
    objective: F,
    n: usize,
    v0: &RVec,
    tol: f64,
    max_iter: usize,
) -> Result<BallSolution>
where
    F: Fn(&RVec) -> Result<(f64, RVec)>,
{
    const ARMIJO_C1: f64 = 1e-4;
    const MIN_STEP: f64 = 1e-20;

    let mut v = project_ball(v0, n);
    let (mut f, mut g) = objective(&v)?;
    let mut trace = vec![f];

    for it in 0..max_iter {
        let mut step = 1.0f64;
        let mut accepted: Option<(RVec, f64, RVec)> = None;
        while step >= MIN_STEP {
            let cand = project_ball(&(&v - g.scale(step)), n);
            match objective(&cand) {
                Ok((f_cand, g_cand)) => {
                    let decrease = g.dot(&(&cand - &v));
                    if f_cand <= f + ARMIJO_C1 * decrease {
                        accepted = Some((cand, f_cand, g_cand));
                        break;
                    }
                }
                Err(_) => {}
            }
            step /= 2.0;
        }
        let Some((cand, f_cand, g_cand)) = accepted else {
            // No acceptable step: stationary to working precision.
            return Ok(BallSolution {
                v,
                converged: true,
                iterations: it,
                objective_trace: trace,
            });
        };
        let drop = f - f_cand;
        v = cand;
        f = f_cand;
        g = g_cand;
        trace.push(f);
        if drop <= tol * f.abs().max(1.0) {
            return Ok(BallSolution {
                v,
                converged: true,
                iterations: it + 1,
                objective_trace: trace,
            });
        }
    }
    Ok(BallSolution {
        v,
        converged: false,
        iterations: max_iter,
        objective_trace: trace,
    })
}

/// Anchor matrices of the two-level MM surrogate for the phase subproblem.
///
/// Built at the anchor `theta_k` for the objective
/// `Tr{(C + X^H Lambda_b^{-1} X)^{-1}}` with
/// `X = (H_d + G^H diag(r) diag(theta) H_r) P` and
/// `C = I_M + sigma_c^{-2} P^H H_r^H diag(w) H_r P`.
///
/// The reflection weights `r` and connection weights `w` select the flavor:
/// the penalized block update uses `r = 1 - x`, `w = v`; the approximate
/// objective uses `r = 1` and the binary mask as `w`.
#[derive(Debug, Clone)]
pub struct MmScratch {
    pub c_mat: CMat,
    pub x_anchor: CMat,
    pub q_anchor: CMat,
    pub d_mat: CMat,
    pub u_mat: CMat,
    pub v_mat: CMat,
    pub lipschitz: f64,
}

fn complex_weights(r: &RVec, theta: &CVec) -> CVec {
    CVec::from_fn(r.len(), |i, _| theta[i] * r[i])
}

impl MmScratch {
    pub fn build(
        ch: &ChannelSet,
        reflect_weights: &RVec,
        connect_weights: &RVec,
        theta: &PhaseVector,
    ) -> Result<Self> {
        let n = ch.n_elements();
        if reflect_weights.len() != n || connect_weights.len() != n || theta.len() != n {
            return Err(Error::dim(
                "MmScratch::build",
                format!("weight/phase vectors of length {n}"),
                format!(
                    "{}/{}/{}",
                    reflect_weights.len(),
                    connect_weights.len(),
                    theta.len()
                ),
            ));
        }
        let m = ch.n_users();
        let sqrt_p = ch.sqrt_power();
        let br = scale_cols(&ch.h_ris, &sqrt_p); // H_r P
        let bd = scale_cols(&ch.h_direct, &sqrt_p); // H_d P

        let wr = RVec::from_fn(n, |i, _| connect_weights[i]);
        let weighted = scale_rows(&br, &CVec::from_fn(n, |i, _| C64::new(wr[i], 0.0)));
        let c_mat = hermitian_part(
            &(CMat::identity(m, m) + (br.adjoint() * weighted).scale(1.0 / ch.noise_conn)),
        );
        let c_inv = hermitian_inverse(&c_mat)?;
        let c_inv2 = &c_inv * &c_inv;

        let x_anchor = &bd
            + ch.g_bs.adjoint() * scale_rows(&br, &complex_weights(reflect_weights, theta.as_vec()));
        let mut q_anchor = &x_anchor * &c_inv * x_anchor.adjoint();
        for i in 0..q_anchor.nrows() {
            q_anchor[(i, i)] += C64::new(ch.noise_bs, 0.0);
        }
        let q_anchor = hermitian_part(&q_anchor);

        let w1 = crate::linalg::hermitian_solve(&q_anchor, &x_anchor)?; // Q^{-1} X
        let s_mid = &w1 * &c_inv2 * w1.adjoint(); // Q^{-1} X C^{-2} X^H Q^{-1}

        let gr = scale_rows(
            &ch.g_bs,
            &CVec::from_fn(n, |i, _| C64::new(reflect_weights[i], 0.0)),
        );
        let u_mat = hermitian_part(&(&gr * &s_mid * gr.adjoint()));
        let v_mat = hermitian_part(&(&br * &c_inv * br.adjoint()));

        let inner = CMat::identity(m, m) - &c_inv * bd.adjoint() * &w1;
        let d_mat = &br * inner * &c_inv2 * w1.adjoint() * gr.adjoint();

        let lipschitz: f64 = (0..n).map(|i| (v_mat[(i, i)] * u_mat[(i, i)]).re).sum();

        Ok(Self {
            c_mat,
            x_anchor,
            q_anchor,
            d_mat,
            u_mat,
            v_mat,
            lipschitz,
        })
    }
}

/// Exact phase objective `Tr{(C + X^H Lambda_b^{-1} X)^{-1}}` at the given
/// phases (same weight conventions as `MmScratch::build`). This equals the
/// reduced sum-MSE with the corresponding continuous weights.
pub fn phase_objective(
    ch: &ChannelSet,
    reflect_weights: &RVec,
    connect_weights: &RVec,
    theta: &PhaseVector,
) -> Result<f64> {
    let n = ch.n_elements();
    let m = ch.n_users();
    let sqrt_p = ch.sqrt_power();
    let br = scale_cols(&ch.h_ris, &sqrt_p);
    let bd = scale_cols(&ch.h_direct, &sqrt_p);
    let weighted = scale_rows(&br, &CVec::from_fn(n, |i, _| C64::new(connect_weights[i], 0.0)));
    let x = &bd + ch.g_bs.adjoint() * scale_rows(&br, &complex_weights(reflect_weights, theta.as_vec()));
    let k = CMat::identity(m, m)
        + (br.adjoint() * weighted).scale(1.0 / ch.noise_conn)
        + (x.adjoint() * &x).scale(1.0 / ch.noise_bs);
    trace_inverse_hermitian(&hermitian_part(&k))
}

/// The closed-form minimizer of `Re{theta^H theta_tilde}` over unit-modulus
/// vectors: `theta_n = -exp(j arg(theta_tilde_n))`, keeping the previous
/// phase wherever `theta_tilde_n` vanishes.
pub fn phase_update_rule(theta_tilde: &CVec, theta_k: &CVec) -> CVec {
    CVec::from_fn(theta_tilde.len(), |i, _| {
        let t = theta_tilde[i];
        if t.re == 0.0 && t.im == 0.0 {
            theta_k[i]
        } else {
            -C64::cis(t.arg())
        }
    })
}

/// One majorization-minimization step on the phase vector:
/// `theta_tilde = (V^T o U - Tr(V^T o U) I) theta_k - diag(D^H)` followed by
/// the sign rule above. Never increases the exact phase objective.
pub fn mm_phase_step(scratch: &MmScratch, theta_k: &PhaseVector) -> PhaseVector {
    let k = scratch.v_mat.transpose().component_mul(&scratch.u_mat);
    let d_diag = CVec::from_fn(scratch.d_mat.nrows(), |i, _| scratch.d_mat[(i, i)].conj());
    let tilde = &k * theta_k.as_vec()
        - theta_k.as_vec().scale(scratch.lipschitz)
        - d_diag;
    PhaseVector::new(phase_update_rule(&tilde, theta_k.as_vec()))
        .expect("phase update preserves unit modulus")
}

/// Splits a symmetric matrix into its PSD and NSD parts via eigendecomposition
/// (`m` is symmetrized first). Returns `(p, n)` with `p + n = m`.
pub fn eig_split(m: &RMat) -> Result<(RMat, RMat)> {
    let sym = symmetric_part(m);
    let eig = SymmetricEigen::try_new(sym, f64::EPSILON, 0)
        .ok_or_else(|| Error::Linalg("symmetric eigendecomposition did not converge".into()))?;
    let u = &eig.eigenvectors;
    let pos = RVec::from_fn(eig.eigenvalues.len(), |i, _| eig.eigenvalues[i].max(0.0));
    let neg = RVec::from_fn(eig.eigenvalues.len(), |i, _| eig.eigenvalues[i].min(0.0));
    let scale = |vals: &RVec| -> RMat {
        let mut scaled = u.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= vals[j];
        }
        // Rounding in the reconstruction leaves ~1e-10 asymmetry; clean it.
        symmetric_part(&(scaled * u.transpose()))
    };
    Ok((scale(&pos), scale(&neg)))
}
