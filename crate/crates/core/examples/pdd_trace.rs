//! Dumps the block-iterate path of one PDD run for schedule debugging.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use rdars_core::channel::{generate_channel_set, LinkBudget, PathLossParams, RicianParams, Topology};
use rdars_core::model::{reduced_objective, ChannelSet, ModeSelection, PhaseVector, SystemDims};
use rdars_core::pdd::{
    al_objective, constraint_violation, outer_update, round_to_binary, v_update, x_update,
    PddConfig, PddState,
};

fn sv_channel(nr: usize, m: usize, n: usize, seed: u64) -> ChannelSet {
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
    generate_channel_set(&dims, &topo, &pl, &ric, &budget, seed).unwrap()
}

fn random_channel(nr: usize, m: usize, n: usize, seed: u64) -> ChannelSet {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut draw = || C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
    ChannelSet {
        h_direct: DMatrix::from_fn(nr, m, |_, _| draw()),
        h_ris: DMatrix::from_fn(n, m, |_, _| draw()),
        g_bs: DMatrix::from_fn(n, nr, |_, _| draw()),
        power: DVector::from_element(m, 1.0),
        noise_bs: 0.5,
        noise_conn: 0.5,
    }
}

fn top2(x: &DVector<f64>) -> (usize, usize) {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&i, &j| x[j].partial_cmp(&x[i]).unwrap());
    (idx[0], idx[1])
}

fn main() {
    let realistic = std::env::var("SV").is_ok();
    let rho0: f64 = std::env::var("RHO0").ok().and_then(|s| s.parse().ok()).unwrap_or(10.0);
    let seed: u64 = std::env::var("SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(1001);
    let n = 8usize;
    let a = 2usize;
    let ch = if realistic {
        sv_channel(2, 2, n, seed)
    } else {
        random_channel(2, 2, n, seed)
    };
    let mut rng = ChaCha12Rng::seed_from_u64(seed + 100);
    let theta = PhaseVector::random(n, &mut rng);

    // Exhaustive reference.
    let mut best = f64::INFINITY;
    let mut best_pair = (0, 0);
    for i in 0..n {
        for j in (i + 1)..n {
            let s = ModeSelection::from_indices(n, &[i, j]).unwrap();
            let v = reduced_objective(&ch, &s, &theta).unwrap();
            if v < best {
                best = v;
                best_pair = (i, j);
            }
        }
    }
    println!("best pair {:?} value {best:.6e}", best_pair);

    let cfg = PddConfig {
        rho0,
        update_phases: false,
        ..PddConfig::default()
    };
    let init = ModeSelection::first_k(n, a).unwrap();
    let mut st = PddState::new(&init, &theta, &cfg);
    let f_init = {
        use rdars_core::subsolvers::phase_objective;
        let r = st.x.map(|t| 1.0 - t);
        phase_objective(&ch, &r, &st.v, &st.theta).unwrap()
    };
    st.rho = cfg.rho0 * (n as f64).powi(2) / f_init.max(1e-12);
    println!("f_init {f_init:.3e} rho_eff {:.3e}", st.rho);

    for outer in 0..60 {
        let mut prev = al_objective(&ch, &st, a).unwrap();
        for _inner in 0..cfg.max_inner {
            let xu = x_update(&ch, &st, a, &cfg).unwrap();
            st.x = xu.x;
            let vu = v_update(&ch, &st, &cfg).unwrap();
            st.v = vu.v;
            let al = al_objective(&ch, &st, a).unwrap();
            let rel = (al - prev).abs() / prev.abs().max(1e-300);
            prev = al;
            if rel <= cfg.eps_rbp {
                break;
            }
        }
        let h = constraint_violation(&st, a);
        let sel = round_to_binary(&st.x, a);
        let f_round = reduced_objective(&ch, &sel, &theta).unwrap();
        if outer % 4 == 0 || outer < 8 {
            println!(
                "outer {outer:3} rho {:9.3e} h {:9.3e} al {prev:12.6e} | x_top {:?} v_top {:?} | f(round) {:.6e} x {:?}",
                st.rho,
                h,
                top2(&st.x),
                top2(&st.v),
                f_round,
                st.x.iter().map(|v| (v * 100.0).round() / 100.0).collect::<Vec<_>>(),
            );
        }
        if h <= cfg.eps_violation {
            println!("feasible at outer {outer}");
            break;
        }
        outer_update(&mut st, a, &cfg);
    }
}
