//! Scratch driver for tuning PDD penalty schedules on small instances.
//! Reports how often the rounded selection lands within 2% of the exhaustive
//! optimum (phases frozen), and basic convergence stats.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use rdars_core::channel::{generate_channel_set, LinkBudget, PathLossParams, RicianParams, Topology};
use rdars_core::model::{reduced_objective, ChannelSet, ModeSelection, PhaseVector, SystemDims};
use rdars_core::pdd::{run_pdd, PddConfig};

fn sv_channel_p(nr: usize, m: usize, n: usize, seed: u64, power_dbm: f64) -> ChannelSet {
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
    let budget = LinkBudget::from_dbm(power_dbm, -90.0);
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

fn main() {
    let seeds: u64 = std::env::var("SEEDS").ok().and_then(|s| s.parse().ok()).unwrap_or(20);
    let realistic = std::env::var("SV").is_ok();
    // (rho0, alpha, sub_tol, sub_iters)
    let scan: Vec<(f64, f64, f64, usize)> = vec![
        (100.0, 0.6, 1e-10, 20000),
        (100.0, 0.8, 1e-8, 5000),
    ];
    for (rho0, alpha, sub_tol, sub_iters) in scan {
        let dims = SystemDims::new(2, 2, 8, 2).unwrap();
        let cfg = PddConfig {
            rho0,
            alpha,
            subsolver_tol: sub_tol,
            subsolver_max_iter: sub_iters,
            update_phases: false,
            ..PddConfig::default()
        };
        let (eps_rbp, max_inner) = (cfg.eps_rbp, cfg.max_inner);
        let mut hits = 0usize;
        let mut conv = 0usize;
        let mut outer_sum = 0usize;
        let mut ratio_sum = 0.0f64;
        let mut greedy_hits = 0usize;
        let mut greedy_ratio = 0.0f64;
        for seed in 0..seeds {
            let ch = if realistic {
                sv_channel_p(2, 2, 8, 1000 + seed, power)
            } else {
                random_channel(2, 2, 8, 1000 + seed)
            };
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
            let gsel = rdars_core::greedy::greedy_mode_select(&ch, &theta, &dims).unwrap();
            let gval = reduced_objective(&ch, &gsel, &theta).unwrap();
            if gval <= 1.02 * best {
                greedy_hits += 1;
            }
            greedy_ratio += gval / best;
            if out.converged {
                conv += 1;
            }
            outer_sum += out.outer_iterations;
            ratio_sum += got / best;
        }
        println!(
            "rho0={rho0:8.1} alpha={alpha:.2} stol={sub_tol:.0e} siter={sub_iters:6} P={power:5.1}dBm: pdd {hits}/{seeds} (ratio {:.4})  greedy {greedy_hits}/{seeds} (ratio {:.4})  conv {conv}/{seeds} outers {:.1}",
            ratio_sum / seeds as f64,
            greedy_ratio / seeds as f64,
            outer_sum as f64 / seeds as f64
        );
        let _ = (eps_rbp, max_inner);
    }
}
