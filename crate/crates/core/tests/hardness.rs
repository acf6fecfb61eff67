use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sqsep_core::cube::{random_signs, HardFamily, HardInstance};
use sqsep_core::moment::ConstructionParams;
use sqsep_core::sq::{
    chebyshev_sweep, family_conditionals, family_theta, pair_gaps, pairing_sweep, tensor_gap_bound_check,
    variance_identity_check, LabeledDistribution, ReplayOracle, SqOracle, SqOracleSession, StatQuery,
};

fn stress(d: usize) -> Arc<HardFamily> {
    let p = ConstructionParams::explicit(0.1, 0.1 * 3f64.powf(-1.5), 3).unwrap();
    Arc::new(HardFamily::new(&p, d).unwrap())
}

fn random_parities(n: usize, dim: usize, rng: &mut ChaCha8Rng) -> Vec<StatQuery> {
    (0..n)
        .map(|_| {
            let set: Vec<usize> = (0..dim).filter(|_| rng.gen_bool(0.25)).collect();
            StatQuery::labeled_parity(set, rng.gen_range(0..2))
        })
        .collect()
}

#[test]
fn variance_identity_on_random_tables() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for d in [3, 4] {
        let (p, q) = family_conditionals(&stress(d)).unwrap();
        for _ in 0..20 {
            let table: Vec<f64> = (0..1usize << (2 * d)).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            let h = |x: &[f64]| {
                let idx = x.iter().enumerate().fold(0, |acc, (i, v)| acc | ((*v < 0.0) as usize) << i);
                table[idx]
            };
            let r = variance_identity_check(&h, &p, &q).unwrap();
            assert!(r.gap() <= 1e-8, "{r:?}");
        }
    }
}

#[test]
fn chebyshev_sweep_within_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let fam = stress(5);
    let queries = random_parities(6, 10, &mut rng);
    for t in [0.1, 0.3, 0.6, 1.0] {
        let r = chebyshev_sweep(&queries, &fam, t, 1000, &mut rng).unwrap();
        assert!(r.within_bound(), "{r:?}");
    }
}

#[test]
fn pair_gaps_never_exceed_theta() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let fam = stress(6);
    let theta = family_theta(&fam).unwrap();
    let queries = random_parities(20, 12, &mut rng);
    for _ in 0..20 {
        let a = random_signs(12, &mut rng);
        for g in pair_gaps(&queries, &fam, &a).unwrap() {
            assert!(g <= theta + 1e-12);
        }
    }
}

#[test]
fn pairing_at_large_tolerance_is_total() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let fam = stress(4);
    let theta = family_theta(&fam).unwrap();
    let queries = random_parities(10, 8, &mut rng);
    let r = pairing_sweep(&queries, &fam, theta.min(1.0), 50, &mut rng).unwrap();
    assert_eq!(r.identical_fraction, 1.0);
}

#[test]
fn tensor_bound_on_family_halves() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let fam = stress(4);
    let p1 = fam.p1().enumerate().unwrap();
    let pm1 = fam.pm1().enumerate().unwrap();
    let r = tensor_gap_bound_check(&p1, &pm1, &pm1, &p1, 200, &mut rng).unwrap();
    assert!(r.holds(1e-12), "{r:?}");
}

#[test]
fn adversarial_transcript_replays() {
    let fam = stress(4);
    let a = random_signs(8, &mut ChaCha8Rng::seed_from_u64(6));
    let i0: Arc<dyn LabeledDistribution> = Arc::new(HardInstance::new(fam.clone(), a.clone(), 0).unwrap());
    let i1: Arc<dyn LabeledDistribution> = Arc::new(HardInstance::new(fam, a, 1).unwrap());
    let queries = random_parities(8, 8, &mut ChaCha8Rng::seed_from_u64(7));
    let mut s = SqOracleSession::adversarial(i0, i1, 1, 0.2).unwrap();
    for q in &queries {
        s.submit(q.clone()).unwrap();
    }
    let answers = s.answers().unwrap();
    let mut replay = ReplayOracle::from_jsonl(&s.transcript_jsonl().unwrap(), 0.2).unwrap();
    for q in &queries {
        replay.submit(q.clone()).unwrap();
    }
    assert_eq!(replay.answers().unwrap(), answers);
    assert!(replay.submit(StatQuery::label()).is_err());
}
