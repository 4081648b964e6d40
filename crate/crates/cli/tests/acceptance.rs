//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.
//!
//! The scalar channel, rate and constraint code below is written separately
//! from the library so that it can serve as an oracle.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use hawkvlc::experiment::convergence::converged_means;
use hawkvlc::experiment::{
    run_convergence, run_sweep, run_trainer_benchmark, solve_with, ExperimentConfig, SweepParameter, SweepResult,
    UserSquare,
};
use hawkvlc::fnn::train::{Algorithm, LossKind};
use hawkvlc::hho::{optimize, HhoParams, SearchSpace};
use hawkvlc::planner::{Problem, Scheme, Solution};
use hawkvlc::vlc::{channel_gain, Placement, Scenario, UserPosition};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

mod oracle {
    use super::*;

    /// Lambertian LOS gain written out term by term.
    pub fn gain(s: &Scenario, x: f64, y: f64, user: UserPosition) -> f64 {
        let o = &s.optics;
        let h = s.altitude_m;
        let d2 = (x - user.x).powi(2) + (y - user.y).powi(2) + h * h;
        let d = d2.sqrt();
        let cos_angle = h / d;
        if cos_angle.acos() > o.fov_rad {
            return 0.0;
        }
        let m = -(2f64.ln()) / o.semiangle_rad.cos().ln();
        let g = o.refractive_index.powi(2) / o.fov_rad.sin().powi(2);
        (m + 1.0) * o.detector_area_m2 / (2.0 * PI * d2) * cos_angle.powf(m) * o.filter_gain * g * cos_angle
    }

    pub struct Check {
        pub sum_rate_bps: f64,
        pub feasible: bool,
    }

    /// Rates and feasibility of a decision, with SIC checked only under NOMA.
    pub fn check(s: &Scenario, x: f64, y: f64, p: &[f64], ofdma: bool) -> Check {
        let n = s.users.len();
        let h: Vec<f64> = s.users.iter().map(|&u| gain(s, x, y, u)).collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| h[a].partial_cmp(&h[b]).unwrap().then(a.cmp(&b)));
        let n0 = s.noise_power_w;
        let mut rates = vec![0.0; n];
        for (k, &i) in order.iter().enumerate() {
            rates[i] = if ofdma {
                (1.0 + h[i] * p[i] * n as f64 / n0).log2() / n as f64
            } else {
                let interference: f64 = order[k + 1..].iter().map(|&j| p[j]).sum();
                (1.0 + h[i] * p[i] / (n0 + h[i] * interference)).log2()
            };
        }
        let tol = 1e-9;
        let mut ok = p.iter().all(|&v| v >= -tol * s.p_max_w);
        ok &= p.iter().sum::<f64>() <= s.p_max_w * (1.0 + tol);
        let c = s.dc_bias.min(s.peak_intensity - s.dc_bias) / s.delta;
        ok &= p.iter().map(|v| v.max(0.0).sqrt()).sum::<f64>() <= c * (1.0 + tol);
        if !ofdma {
            for k in 0..n - 1 {
                let rest: f64 = order[k + 1..].iter().map(|&j| p[j]).sum();
                ok &= h[order[k + 1]] / n0 * (p[order[k]] - rest) >= s.theta * (1.0 - tol);
            }
        }
        let rmin = s.rate_min_bps / s.bandwidth_hz;
        ok &= rates.iter().all(|&r| r >= rmin * (1.0 - tol));
        ok &= x * x + y * y <= s.disc_radius_m.powi(2) * (1.0 + tol);
        Check {
            sum_rate_bps: rates.iter().sum::<f64>() * s.bandwidth_hz,
            feasible: ok,
        }
    }

    /// All compositions of `total` into `parts` non-negative integers.
    fn compositions(total: usize, parts: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if parts == 1 {
            prefix.push(total);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for k in 0..=total {
            prefix.push(k);
            compositions(total - k, parts - 1, prefix, out);
            prefix.pop();
        }
    }

    /// Best feasible NOMA sum rate over a square placement grid of `g` points
    /// per axis and every power split of the full budget in `levels` steps.
    /// Scaling all powers up raises every SINR and keeps every SIC gap, and
    /// the optical limit is far above `√(N·P_max)`, so the budget is tight at
    /// the optimum. Placements leaving a user outside its field of view
    /// cannot meet that user's rate and are skipped.
    pub fn grid_optimum(s: &Scenario, g: usize, levels: usize) -> f64 {
        let n = s.users.len();
        let mut splits = Vec::new();
        compositions(levels, n, &mut Vec::new(), &mut splits);
        let splits: Vec<Vec<f64>> = splits
            .into_iter()
            .map(|k| k.iter().map(|&v| s.p_max_w * v as f64 / levels as f64).collect())
            .collect();
        let r = s.disc_radius_m;
        let mut best = 0.0f64;
        for a in 0..g {
            for b in 0..g {
                let x = -r + 2.0 * r * a as f64 / (g - 1) as f64;
                let y = -r + 2.0 * r * b as f64 / (g - 1) as f64;
                if x * x + y * y > r * r || s.users.iter().any(|&u| gain(s, x, y, u) == 0.0) {
                    continue;
                }
                for p in &splits {
                    let c = check(s, x, y, p, false);
                    if c.feasible && c.sum_rate_bps > best {
                        best = c.sum_rate_bps;
                    }
                }
            }
        }
        best
    }
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn mbps(v: f64) -> String {
    format!("{:.2}", v / 1e6)
}

fn fmt_curve(c: &[(f64, f64)]) -> String {
    c.iter()
        .map(|(v, r)| format!("{v}:{}", mbps(*r)))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Users clustered inside the coverage of a central placement.
fn compact_config(n_users: usize, seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        n_users,
        user_square_m: UserSquare::Side(4.0),
        master_seed: seed,
        ..ExperimentConfig::default()
    }
}

fn sweep(parameter: SweepParameter, schemes: &[Scheme], realizations: usize) -> SweepResult {
    let cfg = ExperimentConfig {
        sweep_parameter: parameter,
        schemes: schemes.to_vec(),
        realizations,
        ..ExperimentConfig::default()
    };
    let dir = tempfile::tempdir().unwrap();
    run_sweep(&cfg, &dir.path().join("sweep.csv")).expect("sweep runs")
}

fn strictly_increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] > w[0])
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

const SWEEP_REALIZATIONS: usize = 100;

fn c1_channel() -> Outcome {
    let cfg = ExperimentConfig::default();
    let s = cfg.generate_scenario(0);
    let user = UserPosition { x: 0.0, y: 0.0 };
    let lib = channel_gain(Placement::new(0.0, 0.0), user, &s);
    let indep = oracle::gain(&s, 0.0, 0.0, user);
    // A = 1 cm², Ts = 1, n = 1.5, Φ = 45°, m = 1, d = h = 3 m
    let hand = 2.0 / (2.0 * PI * 9.0) * 1e-4 * 1.5f64.powi(2) / (PI / 4.0).sin().powi(2);
    let rel = |a: f64, b: f64| ((a - b) / b).abs();
    let pass = rel(lib, 1.5915e-5) < 1e-4 && rel(lib, indep) < 1e-12 && rel(lib, hand) < 1e-12;
    outcome(
        pass,
        format!("gain {lib:.6e}, target 1.5915e-5, rel err {:.2e}", rel(lib, 1.5915e-5)),
    )
}

fn c2_sphere() -> Outcome {
    let started = Instant::now();
    let space = SearchSpace::uniform(5, -10.0, 10.0).unwrap();
    let params = HhoParams::new(30, 500);
    let f = |x: &[f64]| -x.iter().map(|v| v * v).sum::<f64>();
    let best: Vec<f64> = (0..10)
        .map(|seed| optimize(&space, &f, &params, seed).unwrap().best_fitness)
        .collect();
    let hits = best.iter().filter(|&&b| b >= -1e-6).count();
    let secs = started.elapsed().as_secs_f64();
    let worst = best.iter().cloned().fold(f64::INFINITY, f64::min);
    outcome(
        hits >= 9 && secs < 10.0,
        format!("{hits}/10 seeds reach -1e-6 (worst {worst:.2e}), {secs:.2} s"),
    )
}

fn c3_oracle(feasible: &mut Vec<(Scenario, Solution)>) -> Outcome {
    let mut worst_gap = 0.0f64;
    let mut worst_refine = 0.0f64;
    let mut details = Vec::new();
    let mut ok = true;
    for (n, count, seed, grids) in [
        (2usize, 10usize, 101u64, [(41, 40), (81, 80), (161, 160)]),
        (3, 5, 103, [(41, 20), (81, 40), (161, 80)]),
    ] {
        let cfg = compact_config(n, seed);
        for r in 0..count {
            let s = cfg.generate_scenario(r);
            let coarse = oracle::grid_optimum(&s, grids[0].0, grids[0].1);
            let fine = oracle::grid_optimum(&s, grids[2].0, grids[2].1);
            let refine = (fine - coarse).abs() / fine;
            let sol = solve_with(&cfg, Scheme::Hhopap, &s, cfg.solver_seed(r, Scheme::Hhopap)).unwrap();
            let gap = (sol.sum_rate_bps - fine).abs() / fine;
            worst_gap = worst_gap.max(gap);
            worst_refine = worst_refine.max(refine);
            if !(fine > 0.0 && refine < 5e-3 && gap <= 0.02 && sol.feasible) {
                ok = false;
                details.push(format!(
                    "N={n} r={r}: HHOPAP {} oracle {}",
                    mbps(sol.sum_rate_bps),
                    mbps(fine)
                ));
            }
            if sol.feasible {
                feasible.push((s, sol));
            }
        }
    }
    outcome(
        ok,
        format!(
            "worst HHOPAP/oracle gap {:.3}%, worst change under two refinements {:.3}% {}",
            100.0 * worst_gap,
            100.0 * worst_refine,
            details.join("; ")
        ),
    )
}

fn c4_convergence() -> Outcome {
    let cfg = ExperimentConfig {
        convergence_runs: 10,
        ..ExperimentConfig::default()
    };
    let dir = tempfile::tempdir().unwrap();
    let rows = run_convergence(&cfg, &dir.path().join("convergence.csv")).unwrap();
    let t = cfg.iterations;
    let mut monotone = true;
    let mut plateau = true;
    let mut worst = 0.0f64;
    let mut unsettled = Vec::new();
    for trace in rows.chunks(t) {
        monotone &= trace.len() == t && trace.windows(2).all(|w| w[1].best_fitness >= w[0].best_fitness);
        let (a, b) = (&trace[t - 51], &trace[t - 1]);
        let fit = (b.best_fitness - a.best_fitness).abs() / a.best_fitness.abs().max(1e-300);
        let rate = (b.sum_rate_bps - a.sum_rate_bps).abs() / a.sum_rate_bps.max(1e-300);
        let settled = fit < 1e-4 && rate < 1e-4;
        // the plateau requirement is stated for the default 20-user setting
        if b.n_users == cfg.n_users {
            worst = worst.max(rate.max(fit));
            plateau &= settled;
        } else if !settled {
            unsettled.push(format!("N={} run {}", b.n_users, b.run));
        }
    }
    let means = converged_means(&rows);
    let falling = strictly_decreasing(&means.iter().map(|m| m.1).collect::<Vec<_>>());
    let shown: Vec<String> = means.iter().map(|(n, r)| format!("N={n}:{}", mbps(*r))).collect();
    outcome(
        monotone && plateau && falling,
        format!(
            "monotone {monotone}; N={} plateau {plateau} (worst relative change over last 50 iterations {worst:.2e}); \
             other user counts still moving: {unsettled:?}; mean converged sum rate {}",
            cfg.n_users,
            shown.join(" ")
        ),
    )
}

fn c5_pmax(feasible_rows: &mut usize, bad_rows: &mut usize) -> Outcome {
    let res = sweep(SweepParameter::PMax, &Scheme::ALL, SWEEP_REALIZATIONS);
    count_reverified(&res, SweepParameter::PMax, feasible_rows, bad_rows);
    let curve = |s| res.curve(s);
    let hho: Vec<f64> = curve(Scheme::Hhopap).iter().map(|p| p.1).collect();
    let inc: Vec<f64> = hho.windows(2).map(|w| w[1] - w[0]).collect();
    let concave = strictly_increasing(&hho) && strictly_decreasing(&inc);
    let at = |s: Scheme, k: usize| curve(s)[k].1;
    let ordered = (0..hho.len()).all(|k| {
        at(Scheme::Hhopap, k) > at(Scheme::Grpa, k)
            && at(Scheme::Hhopap, k) > at(Scheme::RandP, k)
            && at(Scheme::Grpa, k) > at(Scheme::Ofdma, k)
            && at(Scheme::RandP, k) > at(Scheme::Ofdma, k)
    });
    let incs: Vec<String> = inc.iter().map(|v| mbps(*v)).collect();
    outcome(
        concave && ordered,
        format!(
            "increasing with shrinking steps {concave} (increments {}), ordering {ordered}; HHOPAP {} GRPA {} RandP {} OFDMA {}",
            incs.join(" "),
            fmt_curve(&curve(Scheme::Hhopap)),
            fmt_curve(&curve(Scheme::Grpa)),
            fmt_curve(&curve(Scheme::RandP)),
            fmt_curve(&curve(Scheme::Ofdma)),
        ),
    )
}

fn c6_fov(feasible_rows: &mut usize, bad_rows: &mut usize) -> Outcome {
    let res = sweep(SweepParameter::Fov, &[Scheme::Hhopap], SWEEP_REALIZATIONS);
    count_reverified(&res, SweepParameter::Fov, feasible_rows, bad_rows);
    let c = res.curve(Scheme::Hhopap);
    let pass = strictly_decreasing(&c.iter().map(|p| p.1).collect::<Vec<_>>());
    outcome(pass, format!("HHOPAP {}", fmt_curve(&c)))
}

fn c7_radius(feasible_rows: &mut usize, bad_rows: &mut usize) -> Outcome {
    let res = sweep(
        SweepParameter::DiscRadius,
        &[Scheme::Hhopap, Scheme::RandP, Scheme::Ofdma],
        SWEEP_REALIZATIONS,
    );
    count_reverified(&res, SweepParameter::DiscRadius, feasible_rows, bad_rows);
    let hho = res.curve(Scheme::Hhopap);
    let randp = res.curve(Scheme::RandP);
    let ofdma = res.curve(Scheme::Ofdma);
    let falling = strictly_decreasing(&hho.iter().map(|p| p.1).collect::<Vec<_>>());
    let overtake = (1..ofdma.len()).find(|&k| randp[k - 1].1 >= ofdma[k - 1].1 && ofdma[k].1 > randp[k].1);
    outcome(
        falling && overtake.is_some(),
        format!(
            "HHOPAP decreasing {falling}, OFDMA overtakes RandP at {:?} m; HHOPAP {} RandP {} OFDMA {}",
            overtake.map(|k| ofdma[k].0),
            fmt_curve(&hho),
            fmt_curve(&randp),
            fmt_curve(&ofdma)
        ),
    )
}

fn c8_altitude(feasible_rows: &mut usize, bad_rows: &mut usize) -> Outcome {
    // closed form: UAV (3,1), user (1,2), wide field of view so no cutoff
    let mut s = ExperimentConfig::default().generate_scenario(0);
    s.optics.fov_rad = 80f64.to_radians();
    let user = UserPosition { x: 1.0, y: 2.0 };
    let hs: Vec<f64> = (500..=4000).map(|k| k as f64 * 1e-3).collect();
    let mut proportional = true;
    let ratio0 = {
        s.altitude_m = 1.0;
        channel_gain(Placement::new(3.0, 1.0), user, &s) / (1.0 / 36.0)
    };
    let mut arg = 0.0;
    let mut best = 0.0;
    for &h in &hs {
        s.altitude_m = h;
        let g = channel_gain(Placement::new(3.0, 1.0), user, &s);
        let closed = h * h / (5.0 + h * h).powi(2);
        proportional &= (g / closed / ratio0 - 1.0).abs() < 1e-9;
        if closed > best {
            best = closed;
            arg = h;
        }
    }
    let analytic = proportional && (arg - 5f64.sqrt()).abs() < 1e-3;

    let res = sweep(SweepParameter::Altitude, &[Scheme::Hhopap], SWEEP_REALIZATIONS);
    count_reverified(&res, SweepParameter::Altitude, feasible_rows, bad_rows);
    let c = res.curve(Scheme::Hhopap);
    let v: Vec<f64> = c.iter().map(|p| p.1).collect();
    let peak = (0..v.len()).max_by(|&a, &b| v[a].total_cmp(&v[b])).unwrap();
    let unimodal =
        peak > 0 && peak + 1 < v.len() && strictly_increasing(&v[..=peak]) && strictly_decreasing(&v[peak..]);
    outcome(
        analytic && unimodal,
        format!(
            "closed-form peak at h={arg:.3} (sqrt 5 = 2.236) {analytic}, sweep unimodal {unimodal}; HHOPAP {}",
            fmt_curve(&c)
        ),
    )
}

fn c9_datasets() -> Outcome {
    let cfg = ExperimentConfig {
        trainer_loss: LossKind::DatasetMse,
        ..ExperimentConfig::default()
    };
    let dir = tempfile::tempdir().unwrap();
    let b = run_trainer_benchmark(&cfg, dir.path()).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for task in ["iris", "cancer"] {
        let wins = (0..cfg.trainer_runs)
            .filter(|&run| {
                let loss = |a| b.runs_of(task, a).iter().find(|r| r.run == run).unwrap().final_loss;
                let hho = loss(Algorithm::Hho);
                [Algorithm::Pso, Algorithm::Es, Algorithm::Ga]
                    .iter()
                    .all(|&a| hho < loss(a))
            })
            .count();
        pass &= wins >= 7;
        let med: Vec<String> = Algorithm::ALL
            .iter()
            .map(|&a| {
                let mut l: Vec<f64> = b.runs_of(task, a).iter().map(|r| r.final_loss).collect();
                l.sort_by(f64::total_cmp);
                format!("{a} {:.4}", l[l.len() / 2])
            })
            .collect();
        parts.push(format!(
            "{task}: HHO lowest in {wins}/{} seeds (median MSE {})",
            cfg.trainer_runs,
            med.join(", ")
        ));
    }
    outcome(pass, parts.join("; "))
}

fn c10_network() -> Outcome {
    let cfg = ExperimentConfig {
        trainer_loss: LossKind::SumRate,
        ..ExperimentConfig::default()
    };
    let dir = tempfile::tempdir().unwrap();
    let b = run_trainer_benchmark(&cfg, dir.path()).unwrap();
    let mean = |a| {
        let r = b.runs_of("sum_rate", a);
        r.iter().map(|r| r.eval_sum_rate_bps.unwrap()).sum::<f64>() / r.len() as f64
    };
    let reference = b.summary[0].hhopap_sum_rate_bps.unwrap();
    let hho = mean(Algorithm::Hho);
    let others: Vec<(Algorithm, f64)> = [Algorithm::Pso, Algorithm::Es, Algorithm::Ga]
        .iter()
        .map(|&a| (a, mean(a)))
        .collect();
    let pass = (hho / reference - 1.0).abs() <= 0.15 && others.iter().all(|o| hho > o.1);
    let shown: Vec<String> = others.iter().map(|(a, v)| format!("{a} {}", mbps(*v))).collect();
    outcome(
        pass,
        format!(
            "HHO network {} vs HHOPAP {} (ratio {:.3}); {}",
            mbps(hho),
            mbps(reference),
            hho / reference,
            shown.join(", ")
        ),
    )
}

fn count_reverified(res: &SweepResult, parameter: SweepParameter, feasible_rows: &mut usize, bad_rows: &mut usize) {
    let base = ExperimentConfig {
        sweep_parameter: parameter,
        ..ExperimentConfig::default()
    };
    for row in res.rows.iter().filter(|r| r.feasible) {
        let cfg = base.with_parameter(parameter, row.value).unwrap();
        let s = cfg.generate_scenario(row.realization);
        let c = oracle::check(
            &s,
            row.x_u_m,
            row.y_u_m,
            &row.powers().unwrap(),
            row.scheme == Scheme::Ofdma,
        );
        *feasible_rows += 1;
        if !c.feasible {
            *bad_rows += 1;
        }
    }
}

fn c11_feasibility(mut solutions: Vec<(Scenario, Solution)>, sweep_feasible: usize, sweep_bad: usize) -> Outcome {
    // extra compact instances so every scheme contributes feasible solutions
    for n in 2..=6 {
        let cfg = compact_config(n, 1100 + n as u64);
        for r in 0..4 {
            let s = cfg.generate_scenario(r);
            for scheme in Scheme::ALL {
                let sol = solve_with(&cfg, scheme, &s, cfg.solver_seed(r, scheme)).unwrap();
                if sol.feasible {
                    solutions.push((s.clone(), sol));
                }
            }
        }
    }
    let bad = solutions
        .iter()
        .filter(|(s, sol)| {
            !oracle::check(
                s,
                sol.placement.x,
                sol.placement.y,
                sol.powers.watts(),
                sol.scheme == Scheme::Ofdma,
            )
            .feasible
        })
        .count();

    // dominance on random pairs
    let s = compact_config(3, 7).generate_scenario(0);
    let problem = Problem::with_default_penalty(&s, Scheme::Hhopap).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = s.users.len();
    let pmax = s.p_max_w;
    let mut feasible_points = Vec::new();
    let mut violating_points = Vec::new();
    while feasible_points.len() < 10_000 || violating_points.len() < 10_000 {
        let (x, y) = (rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5));
        let gains: Vec<f64> = s.users.iter().map(|&u| oracle::gain(&s, x, y, u)).collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| gains[a].total_cmp(&gains[b]).then(a.cmp(&b)));
        // ladder from the strongest user down, each at least 1.1x the users above it
        let mut p = vec![0.0; n];
        let mut above = 0.0;
        for (k, &i) in order.iter().enumerate().rev() {
            p[i] = if k == n - 1 {
                rng.random_range(0.1..1.0)
            } else {
                above * rng.random_range(1.1..3.0)
            };
            above += p[i];
        }
        let total = rng.random_range(0.5..1.0) * pmax;
        p.iter_mut().for_each(|v| *v *= total / above);
        if oracle::check(&s, x, y, &p, false).feasible && feasible_points.len() < 10_000 {
            feasible_points.push((x, y, p.clone()));
        }
        if violating_points.len() < 10_000 {
            // half barely over budget on the weakest user, half uniform in the box
            let mut q = p.clone();
            let (qx, qy) = if violating_points.len() % 2 == 0 {
                let scale = pmax / q.iter().sum::<f64>();
                q.iter_mut().for_each(|v| *v *= scale);
                q[order[0]] += rng.random_range(1.01e-4..2e-4);
                (x, y)
            } else {
                q.iter_mut().for_each(|v| *v = rng.random_range(0.0..pmax));
                (rng.random_range(-12.0..12.0), rng.random_range(-12.0..12.0))
            };
            let worst = problem
                .evaluate(Placement::new(qx, qy), &q)
                .residuals
                .penalized(Scheme::Hhopap.constraints())
                .flatten()
                .fold(f64::NEG_INFINITY, f64::max);
            if worst > 1e-4 {
                violating_points.push((qx, qy, q));
            }
        }
    }
    let dominated = feasible_points
        .iter()
        .zip(&violating_points)
        .filter(|(f, v)| {
            let sf = problem.score(Placement::new(f.0, f.1), &f.2);
            let sv = problem.score(Placement::new(v.0, v.1), &v.2);
            sf.beats(sv) && sf.value() > sv.value()
        })
        .count();
    let pass = bad == 0 && sweep_bad == 0 && !solutions.is_empty() && dominated == 10_000;
    outcome(
        pass,
        format!(
            "{} solver solutions and {sweep_feasible} sweep rows reported feasible, {} fail recheck; dominance {dominated}/10000 pairs",
            solutions.len(),
            bad + sweep_bad
        ),
    )
}

fn run_cli(args: &[&str], out: &Path) -> bool {
    Command::new(env!("CARGO_BIN_EXE_hawkvlc"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false)
}

fn dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(&p).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

fn c12_determinism() -> Outcome {
    let small = ["--set", "n_users=5", "--set", "iterations=40", "--set", "population=10"];
    let cases: Vec<(&str, Vec<&str>)> = vec![
        ("solve", vec!["solve", "--realization", "3"]),
        (
            "sweep",
            vec![
                "sweep",
                "--parameter",
                "altitude",
                "--values",
                "2,3",
                "--realizations",
                "3",
            ],
        ),
        ("converge", vec!["converge", "--users", "3,5", "--runs", "2"]),
        (
            "train",
            vec![
                "train",
                "--runs",
                "2",
                "--set",
                "trainer_iterations=20",
                "--set",
                "trainer_population=8",
            ],
        ),
        (
            "train-network",
            vec![
                "train",
                "--loss",
                "sum_rate",
                "--runs",
                "2",
                "--set",
                "trainer_iterations=20",
                "--set",
                "train_batch=3",
                "--set",
                "eval_batch=3",
            ],
        ),
        (
            "bench-functions",
            vec!["bench-functions", "--dim", "4", "--runs", "3", "--iterations", "60"],
        ),
    ];
    let root = tempfile::tempdir().unwrap();
    let mut failed = Vec::new();
    for (name, args) in &cases {
        let mut args = args.clone();
        args.extend_from_slice(&small);
        let a = root.path().join(format!("{name}-a"));
        let b = root.path().join(format!("{name}-b"));
        let mut args_b = args.clone();
        // a different worker count must not change any byte
        args_b.extend_from_slice(&["--parallel", "2"]);
        let ran = run_cli(&args, &a) && run_cli(&args, &b) && run_cli(&args_b, &root.path().join(format!("{name}-c")));
        let same = ran && {
            let first = dir_bytes(&a);
            !first.is_empty() && first == dir_bytes(&b) && first == dir_bytes(&root.path().join(format!("{name}-c")))
        };
        if !same {
            failed.push(*name);
        }
    }
    outcome(
        failed.is_empty(),
        format!("{} subcommand runs compared, differing: {:?}", cases.len(), failed),
    )
}

fn main() {
    let started = Instant::now();
    let mut results: Vec<(usize, &str, Outcome)> = Vec::new();
    let mut report = |k: usize, name: &'static str, o: Outcome| {
        println!(
            "criterion {k:>2} {} {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        results.push((k, name, o));
    };
    let mut feasible = Vec::new();
    let (mut sweep_feasible, mut sweep_bad) = (0, 0);
    report(1, "analytic channel gain", c1_channel());
    report(2, "test-function sanity", c2_sphere());
    report(3, "grid-oracle equivalence", c3_oracle(&mut feasible));
    report(4, "convergence traces", c4_convergence());
    report(
        5,
        "p_max trend and ordering",
        c5_pmax(&mut sweep_feasible, &mut sweep_bad),
    );
    report(6, "field-of-view trend", c6_fov(&mut sweep_feasible, &mut sweep_bad));
    report(7, "cell-radius trend", c7_radius(&mut sweep_feasible, &mut sweep_bad));
    report(8, "altitude trend", c8_altitude(&mut sweep_feasible, &mut sweep_bad));
    report(9, "dataset trainer benchmark", c9_datasets());
    report(10, "trained network vs planner", c10_network());
    report(
        11,
        "feasibility suite",
        c11_feasibility(feasible, sweep_feasible, sweep_bad),
    );
    report(12, "determinism suite", c12_determinism());
    let failed: Vec<usize> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    println!(
        "acceptance: {}/{} criteria pass in {:.0} s{}",
        results.len() - failed.len(),
        results.len(),
        started.elapsed().as_secs_f64(),
        if failed.is_empty() {
            String::new()
        } else {
            format!(", failing {failed:?}")
        }
    );
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
