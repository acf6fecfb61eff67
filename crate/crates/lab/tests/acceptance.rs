//! One PASS/FAIL line per acceptance criterion.

use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sqsep_core::cube::{push_forward, random_signs, tv_exact, Channel, DiscreteDist, HardFamily};
use sqsep_core::ldp::{
    audit_epsilon, draw_users, extreme_probes, run_noninteractive, Assignment, LdpSqOracle, LocalRandomizer, LrOracle,
    RandomizedResponse,
};
use sqsep_core::learners::{
    err_loss_bridge, phi_gamma, random_halfspace_learner, separable_sphere_instance, sq_gradient_descent, GdConfig,
    LossSpec, ThresholdMode,
};
use sqsep_core::moment::{construct_q_detailed, moments_p, ConstructionParams, OrthoBasis};
use sqsep_core::sq::{
    chebyshev_sweep, family_conditionals, variance_identity_check, HonestNoise, LabeledDistribution, SqOracle,
    SqOracleSession, StatQuery,
};
use sqsep_core::Error;
use sqsep_lab::audit::registered;
use sqsep_lab::separation::run_separation;
use sqsep_lab::ExperimentConfig;

type Outcome = (bool, String);

fn stress() -> ConstructionParams {
    ConstructionParams::explicit(0.1, 0.1 * 3f64.powf(-1.5), 3).unwrap()
}

fn canonical() -> ConstructionParams {
    ConstructionParams::from_gamma_r(0.35, 0.5).unwrap()
}

fn within(start: Instant, limit: Duration) -> bool {
    start.elapsed() < limit
}

fn orthonormality() -> Outcome {
    let start = Instant::now();
    let mut exact_worst = 0.0f64;
    let mut float_worst = 0.0f64;
    for eta in [0.05, 0.1, 0.3] {
        let moments = moments_p(eta, 16);
        for k in 1..=8 {
            let basis = OrthoBasis::new(eta, k).unwrap();
            for m in 0..=k {
                for l in 0..=m {
                    exact_worst = exact_worst.max(basis.orthonormality_deviation(m, l).abs());
                    let (cm, cl) = (basis.coefficients(m), basis.coefficients(l));
                    let ip: f64 = cm
                        .iter()
                        .enumerate()
                        .flat_map(|(i, a)| cl.iter().enumerate().map(move |(j, b)| (i + j, a * b)))
                        .map(|(n, c)| c * moments[n])
                        .sum();
                    let delta = if m == l { 1.0 } else { 0.0 };
                    float_worst = float_worst.max((ip - delta).abs());
                }
            }
        }
    }
    let fast = within(start, Duration::from_secs(5));
    (
        exact_worst <= 1e-9 && float_worst <= 1e-9 && fast,
        format!("exact {exact_worst:.2e}, float moments {float_worst:.2e}, {:?}", start.elapsed()),
    )
}

fn moment_matching() -> Outcome {
    let start = Instant::now();
    let mut ok = true;
    let mut notes = Vec::new();
    for (name, params) in [("canonical", canonical()), ("stress", stress())] {
        let q = construct_q_detailed(&params).unwrap();
        let target = moments_p(params.eta, 2 * params.k);
        let rel = (0..=2 * params.k)
            .map(|i| {
                let m: f64 = q.measure.atoms().iter().map(|a| a.weight * a.location.powi(i as i32)).sum();
                (m - target[i]).abs() / target[i].abs().max(1.0)
            })
            .fold(0.0, f64::max);
        let min_w = q.measure.atoms().iter().map(|a| a.weight).fold(f64::INFINITY, f64::min);
        let rho = OrthoBasis::new(params.eta, params.k).unwrap().rho(-params.gamma_prime);
        let node = q.measure.mass_at(-params.gamma_prime);
        let this = rel <= 1e-8 && min_w >= 0.0 && (node - rho).abs() <= 1e-9 && rho >= 1.0 - 10.0 * params.eta;
        ok &= this;
        notes.push(format!("{name}: k={} rel {rel:.1e} min_w {min_w:.3} rho {rho:.6} node gap {:.1e}", params.k, (node - rho).abs()));
    }
    ok &= within(start, Duration::from_secs(5));
    (ok, format!("{}, {:?}", notes.join("; "), start.elapsed()))
}

fn fourier_equivalence() -> Outcome {
    let mut worst = 0.0f64;
    let mut parseval = 0.0f64;
    for d in [4, 6, 8] {
        let fam = HardFamily::new(&stress(), d).unwrap();
        for cube in [fam.p1(), fam.pm1(), &fam.pm1().negate()] {
            let n = 1usize << d;
            let points: Vec<Vec<i8>> = (0..n)
                .map(|idx| (0..d).map(|i| if idx >> i & 1 == 1 { -1 } else { 1 }).collect())
                .collect();
            let pmf: Vec<f64> = points.iter().map(|x| cube.pmf(x).unwrap()).collect();
            let mut sq = 0.0;
            for mask in 0..n {
                let set: Vec<usize> = (0..d).filter(|i| mask >> i & 1 == 1).collect();
                let brute: f64 = points
                    .iter()
                    .zip(&pmf)
                    .map(|(x, p)| p * set.iter().map(|&i| x[i] as f64).product::<f64>())
                    .sum();
                let analytic = cube.fourier_coeff(&set).unwrap();
                worst = worst.max((brute - analytic).abs());
                sq += analytic * analytic;
            }
            let lhs = n as f64 * pmf.iter().map(|p| p * p).sum::<f64>();
            parseval = parseval.max((lhs - sq).abs());
        }
    }
    (
        worst <= 1e-8 && parseval <= 1e-8,
        format!("max coefficient gap {worst:.1e}, Parseval gap {parseval:.1e}"),
    )
}

fn variance_and_chebyshev() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for d in [3, 4] {
        let fam = HardFamily::new(&stress(), d).unwrap();
        let (p, q) = family_conditionals(&fam).unwrap();
        for _ in 0..20 {
            let table: Vec<f64> = (0..1usize << (2 * d)).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            let h = move |x: &[f64]| {
                let idx = x.iter().enumerate().fold(0usize, |acc, (i, v)| acc | ((*v < 0.0) as usize) << i);
                table[idx]
            };
            let r = variance_identity_check(&h, &p, &q).unwrap();
            worst = worst.max(r.gap());
        }
    }
    let fam = Arc::new(HardFamily::new(&stress(), 6).unwrap());
    let mut queries: Vec<StatQuery> = (0..8)
        .map(|_| {
            let set: Vec<usize> = (0..12).filter(|_| rng.gen_bool(0.3)).collect();
            StatQuery::labeled_parity(set, 1)
        })
        .collect();
    for j in 0..4 {
        let w: Vec<f64> = (0..12).map(|_| rng.gen_range(-1.0..1.0)).collect();
        queries.push(StatQuery::new(format!("tanh{j}"), move |x, y| {
            (y * x.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>()).tanh()
        }));
    }
    let mut sweeps_ok = true;
    let mut notes = Vec::new();
        for t in [0.05, 0.1, 0.2, 0.4, 0.8] {
        let r = chebyshev_sweep(&queries, &fam, t, 1000, &mut rng).unwrap();
        sweeps_ok &= r.within_bound();
        notes.push(format!("t={t} frac {:.3} <= {:.3}+{:.3}", r.fraction, r.bound, r.half_width));
    }
    (
        worst <= 1e-8 && sweeps_ok,
        format!("variance gap {worst:.1e}; {}", notes.join("; ")),
    )
}

fn random_dist(n: usize, rng: &mut ChaCha8Rng) -> DiscreteDist {
    let w: Vec<f64> = (0..1usize << n).map(|_| rng.gen::<f64>()).collect();
    let s: f64 = w.iter().sum();
    DiscreteDist::cube(n, w.iter().map(|v| v / s).collect()).unwrap()
}

fn tv_and_processing() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    for (name, params, d) in [("canonical", canonical(), 12), ("stress", stress(), 8)] {
        let fam = HardFamily::new(&params, d).unwrap();
        let tv = tv_exact(&fam.p1().enumerate().unwrap(), &fam.pm1().negate().enumerate().unwrap()).unwrap();
        ok &= tv <= 10.0 * params.eta;
        notes.push(format!("{name} d={d}: tv {tv:.4} <= {:.4}", 10.0 * params.eta));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let fam = HardFamily::new(&stress(), 8).unwrap();
    let p = fam.p1().enumerate().unwrap();
    let q = fam.pm1().negate().enumerate().unwrap();
    let base = tv_exact(&p, &q).unwrap();
    let mut dpi_excess = f64::NEG_INFINITY;
    for i in 0..100 {
        let outputs = 2 + i % 7;
        let ch = Channel::random(p.len(), outputs, &mut rng);
        let after = tv_exact(&push_forward(&p, &ch).unwrap(), &push_forward(&q, &ch).unwrap()).unwrap();
        dpi_excess = dpi_excess.max(after - base);
    }
    let mut sub_excess = f64::NEG_INFINITY;
    for _ in 0..100 {
        let (a, a2, b, b2) = (
            random_dist(3, &mut rng),
            random_dist(3, &mut rng),
            random_dist(2, &mut rng),
            random_dist(2, &mut rng),
        );
        let joint = tv_exact(&a.product(&b), &a2.product(&b2)).unwrap();
        sub_excess = sub_excess.max(joint - tv_exact(&a, &a2).unwrap() - tv_exact(&b, &b2).unwrap());
    }
    ok &= dpi_excess <= 1e-12 && sub_excess <= 1e-12;
    notes.push(format!("channel excess {dpi_excess:.1e}, product excess {sub_excess:.1e}"));
    (ok, notes.join("; "))
}

fn separation() -> (Outcome, Outcome) {
    let start = Instant::now();
    let res = ExperimentConfig::default().resolve().unwrap();
    let report = run_separation(&res).unwrap();
    let s = &report.summary;
    let low = s.mean_accuracy["lowdeg"];
    let perc = s.mean_accuracy["perceptron"];
    let gap = s.gap.unwrap();
    let ident = s.identical_fraction.unwrap();
    let elapsed = start.elapsed();
    (
        (
            low <= 0.55 && perc >= 0.9 && gap >= 0.3 && elapsed < Duration::from_secs(300),
            format!(
                "n_a={} tau={:.5} k={} lowdeg {low:.4} (<= 0.55) perceptron {perc:.4} (>= 0.9) gap {gap:.4} (>= 0.3), adversarial perceptron {:.4}, {elapsed:?}",
                res.config.n_a,
                s.tau,
                s.query_budget,
                s.mean_accuracy["perceptron_adversarial"]
            ),
        ),
        (ident >= 0.95, format!("identical transcripts {ident:.4} (>= 0.95) over {} a", res.config.n_a)),
    )
}

fn upper_bound_learner() -> Outcome {
    let (gamma, eps, m, dim) = (0.5, 0.2, 10_000, 8);
    let mut good = 0;
    let mut monotone = true;
    for seed in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let (d, _) = separable_sphere_instance(dim, gamma, 200, &mut rng).unwrap();
        let d: Arc<dyn LabeledDistribution> = Arc::new(d);
        let mut prev = f64::INFINITY;
        let mut best = 1.0;
        for mm in [10, 100, 1000, m] {
            let mut o = SqOracleSession::honest(d.clone(), eps / 4.0, HonestNoise::WorstCase)
                .unwrap()
                .non_adaptive();
            let run =
                random_halfspace_learner(&mut o, dim, mm, ThresholdMode::Error, &mut ChaCha8Rng::seed_from_u64(seed))
                    .unwrap();
            best = run.hypothesis.error(d.as_ref()).unwrap();
            monotone &= best <= prev;
            prev = best;
        }
        if best <= 2.0 * eps {
            good += 1;
        }
    }
    (good >= 45 && monotone, format!("{good}/50 runs with error <= 0.4, monotone in m: {monotone}"))
}

fn convex_suite() -> Outcome {
    let mut ok = true;
    let mut grid_fail = 0;
    for gamma in [0.1, 0.25, 0.35, 0.5, 0.9] {
        ok &= phi_gamma(1.0, gamma) == 0.0 && phi_gamma(0.0, gamma) == 9.0 / 8.0;
        ok &= (phi_gamma(gamma, gamma) - (1.0 - gamma).powi(2) / 8.0).abs() <= 1e-15;
        let h = 1e-3;
        let n = 2000;
        for i in 1..n {
            let t = -1.0 + 2.0 * i as f64 / n as f64;
            let slope = (phi_gamma(t + h, gamma) - phi_gamma(t, gamma)).abs() / h;
            let second = (phi_gamma(t + h, gamma) - 2.0 * phi_gamma(t, gamma) + phi_gamma(t - h, gamma)) / (h * h);
            if slope > 3.0 / gamma + 1e-9 || second < 0.25 - 1e-6 || second > 3.0 / (gamma * gamma) + 1e-6 {
                grid_fail += 1;
            }
        }
    }
    ok &= grid_fail == 0;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut pipeline = 0;
    let mut worst_err = 0.0f64;
    for _ in 0..20 {
        let gamma = rng.gen_range(0.2..0.6);
        let (d, w_star) = separable_sphere_instance(5, gamma, 100, &mut rng).unwrap();
        let loss = LossSpec::phi(gamma);
        let opt_upper = loss.expected(&w_star, &d);
        let shared: Arc<dyn LabeledDistribution> = Arc::new(d.clone());
        let mut o = SqOracleSession::honest(shared, 1e-6, HonestNoise::WorstCase).unwrap();
        let cfg = GdConfig {
            dim: 5,
            input_scale: 1.0,
            steps: 300,
            step_size: Some(1.0 / loss.smooth),
        };
        let run = sq_gradient_descent(&mut o, &loss, &cfg, None).unwrap();
        let value = loss.expected(&run.hypothesis.w, &d);
        let bridge = err_loss_bridge(&run.hypothesis.w, &d, gamma).unwrap();
        worst_err = worst_err.max(bridge.err);
        if value <= opt_upper + 0.125 && bridge.holds && bridge.err <= 0.25 {
            pipeline += 1;
        }
    }
    ok &= pipeline == 20;
    (
        ok,
        format!("grid violations {grid_fail}, pipeline {pipeline}/20 (worst err {worst_err:.3})"),
    )
}

fn ldp_audits() -> Outcome {
    let mut ok = true;
    let probes = extreme_probes(6);
    let mut worst = 0.0f64;
    for eps in [0.1, 0.5, 1.0, 2.0] {
        for r in registered(eps).unwrap() {
            match audit_epsilon(r.as_ref(), &probes) {
                Ok(a) => worst = worst.max((a - r.epsilon_claimed().unwrap()).abs()),
                Err(_) => ok = false,
            }
        }
    }
    ok &= worst <= 1e-12;

    let fam = Arc::new(HardFamily::new(&stress(), 3).unwrap());
    let a = random_signs(6, &mut ChaCha8Rng::seed_from_u64(1));
    let inst = sqsep_core::cube::HardInstance::new(fam, a, 0).unwrap();
    let q = StatQuery::labeled_parity(vec![0], 1);
    let truth = inst.expectation(&q).unwrap();
    let run = run_noninteractive(&[q.clone()], 1.0, draw_users(&inst, 100_000, 3), Assignment::Split, 3).unwrap();
    let z = (run.estimates[0] - truth) / run.std_error_bounds[0];
    ok &= z.abs() <= 4.0;

    let samples = draw_users(&inst, 4, 5);
    let rr: Arc<dyn LocalRandomizer> = Arc::new(RandomizedResponse::new(q.clone(), 1.0).unwrap());
    let mut lr = LrOracle::new(samples, 1.0).unwrap();
    lr.declare(0, rr.clone()).unwrap();
    let reuse = lr.declare(0, rr.clone()) == Err(Error::SampleReuse(0));
    lr.release(1).unwrap();
    let adaptive = lr.declare(1, rr.clone()) == Err(Error::AdaptiveQuery);
    let second = matches!(lr.release(2), Err(Error::SampleReuse(_)));
    let mut o = LdpSqOracle::new(Arc::new(inst), 1.0, 100, Assignment::Split, 1);
    o.submit(q.clone()).unwrap();
    o.answers().unwrap();
    let ldp_adaptive = o.submit(q) == Err(Error::AdaptiveQuery);
    ok &= reuse && adaptive && second && ldp_adaptive;
    (
        ok,
        format!(
            "audit slack {worst:.1e}, RR z-score {z:.3}, negatives reuse={reuse} adaptive={adaptive} rerelease={second} oracle={ldp_adaptive}"
        ),
    )
}

fn main() {
    let (six, seven) = separation();
    let results = [
        (1, "orthonormality", orthonormality()),
        (2, "moment matching", moment_matching()),
        (3, "fourier equivalence", fourier_equivalence()),
        (4, "variance identity and chebyshev", variance_and_chebyshev()),
        (5, "tv and data processing", tv_and_processing()),
        (6, "separation", six),
        (7, "adversarial indistinguishability", seven),
        (8, "upper-bound learner", upper_bound_learner()),
        (9, "convex loss suite", convex_suite()),
        (10, "ldp audits", ldp_audits()),
    ];
    let mut failed = Vec::new();
    for (n, name, (pass, detail)) in &results {
        println!("criterion {n:>2} {} {name}: {detail}", if *pass { "PASS" } else { "FAIL" });
        if !pass {
            failed.push(*n);
        }
    }
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
