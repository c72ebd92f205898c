//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use quantacode::{
    error_profile, exhaustive_best, kl_divergence, lemma1_bound, measure_rate, plan_precision, record_scan,
    round_min_max, theorem1_bound, theorem2_bound_binary, theorem2_bound_mary, FrequencyTable, Kappa, PlanMode,
    Precision, ProbabilityVector,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::{Float, Integer, Rational};

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Outcome { passed, detail: detail.into() }
    }
}

fn random_source(rng: &mut ChaCha8Rng, m: usize) -> ProbabilityVector {
    let weights: Vec<u64> = (0..m).map(|_| u64::from(rng.random::<u32>()) + 1).collect();
    ProbabilityVector::from_weights(weights).unwrap()
}

fn rational(n: u64, d: u64) -> Rational {
    Rational::from((n, d))
}

fn prec() -> Precision {
    Precision::default()
}

/// Exact `x < c·(1 + eps)` style comparisons go through rationals; this keeps
/// the decimal constants in the criteria exact.
fn dec(text: &str) -> Rational {
    quantacode::prob_model::parse_rational(text).unwrap()
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut violations = 0;
    let mut checked = 0;
    while checked < 1000 {
        let m = rng.random_range(2..=8);
        let p = random_source(&mut rng, m);
        let t = rng.random_range(m as u64..=4096);
        let base = round_min_max(&p, t).unwrap();
        // Move a few units between symbols to get a table off the optimum.
        let mut freqs = base.freqs().to_vec();
        for _ in 0..rng.random_range(0..=3) {
            let from = rng.random_range(0..m);
            let to = rng.random_range(0..m);
            if freqs[from] > 1 {
                freqs[from] -= 1;
                freqs[to] += 1;
            }
        }
        let table = FrequencyTable::for_source(&p, freqs).unwrap();
        let profile = error_profile(&p, &table).unwrap();
        if !profile.ratio_below_one() {
            continue;
        }
        checked += 1;
        let bound = lemma1_bound(m, &profile.delta_star, p.p_min()).unwrap();
        let d = kl_divergence(&p, &table, prec()).unwrap().nats;
        if d > bound {
            violations += 1;
        }
    }
    Outcome::new(violations == 0, format!("{checked} pairs, {violations} violations"))
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut hard_failures, mut bound_violations) = (0u64, 0u64);
    // Failures split by whether t·p_min ≥ 1, i.e. whether the f_i ≥ 1
    // constraint can bind at all.
    let mut failures_with_room = 0u64;
    let mut summary = Vec::new();
    for m in [2usize, 3, 4, 8] {
        let (mut half, mut total) = (0u64, 0u64);
        for _ in 0..20 {
            let p = random_source(&mut rng, m);
            for t in m as u64..=10_000 {
                let table = round_min_max(&p, t).unwrap();
                let delta = error_profile(&p, &table).unwrap().delta_star;
                total += 1;
                if delta >= rational(1, t) {
                    hard_failures += 1;
                    if Rational::from(p.p_min() * t) >= 1 {
                        failures_with_room += 1;
                    }
                }
                if delta <= rational(1, 2 * t) {
                    half += 1;
                    if let Ok(bound) = theorem1_bound(m, t, p.p_min()) {
                        let d = kl_divergence(&p, &table, prec()).unwrap().nats;
                        if d > bound {
                            bound_violations += 1;
                        }
                    }
                }
            }
        }
        let share = half as f64 / total as f64;
        summary.push(format!(
            "m={m}: {:.1}% at 1/(2t){}",
            100.0 * share,
            if share >= 0.6 { "" } else { " (below 60%)" }
        ));
    }
    Outcome::new(
        hard_failures == 0 && bound_violations == 0,
        format!(
            "delta* >= 1/t: {hard_failures} ({failures_with_room} with t*p_min >= 1); bound violations: {bound_violations}; {}",
            summary.join(", ")
        ),
    )
}

fn is_fibonacci_upto(limit: u64) -> Vec<u64> {
    let mut fib = vec![];
    let (mut a, mut b) = (1u64, 2u64);
    while b <= limit {
        fib.push(b);
        (a, b) = (b, a + b);
    }
    fib
}

fn criterion_3() -> Outcome {
    let golden = ProbabilityVector::golden(60);
    let scan = record_scan(&golden, 10_000, Kappa::Golden, prec()).unwrap();
    let records: Vec<u64> = scan.records().map(|e| e.t).collect();
    let missing: Vec<u64> = is_fibonacci_upto(10_000).into_iter().filter(|f| !records.contains(f)).collect();

    let center = dec("0.4472");
    let lo = &center * dec("0.999");
    let hi = &center * dec("1.01");
    let t2_delta = |e: &quantacode::ScanEntry| Rational::from(&e.delta_star * Integer::from(e.t).square());
    let out_of_band: Vec<u64> = scan
        .records()
        .filter(|e| e.t >= 100)
        .filter(|e| {
            let q = t2_delta(e);
            q < lo || q > hi
        })
        .map(|e| e.t)
        .collect();

    // q < 5^(−1/2)·(1 − 10⁻³) ⇔ 5·q² < (1 − 10⁻³)²
    let floor_sq = dec("0.999").square();
    let below: Vec<(u64, f64)> = scan
        .entries
        .iter()
        .filter(|e| (t2_delta(e).square() * 5u32) < floor_sq)
        .map(|e| (e.t, t2_delta(e).to_f64()))
        .collect();

    Outcome::new(
        missing.is_empty() && out_of_band.is_empty() && below.is_empty(),
        format!(
            "records {:?}; missing Fibonacci {missing:?}; outside band {out_of_band:?}; below 5^-1/2(1-1e-3): {below:?}",
            records
        ),
    )
}

fn criterion_4() -> Outcome {
    let silver = ProbabilityVector::silver(60);
    let scan = record_scan(&silver, 10_000, Kappa::Generic, prec()).unwrap();
    let hits: Vec<_> = scan.records().filter(|e| e.beats_fact_constant).collect();
    let mut violations = 0;
    for e in &hits {
        let table = FrequencyTable::for_source(&silver, e.freqs.clone()).unwrap();
        let d = kl_divergence(&silver, &table, prec()).unwrap().nats;
        let bound = theorem2_bound_binary(e.t, silver.p_min(), Kappa::Generic, prec()).unwrap();
        if d > bound {
            violations += 1;
        }
    }
    let ts: Vec<u64> = hits.iter().map(|e| e.t).collect();
    Outcome::new(
        hits.len() >= 5 && violations == 0,
        format!("records below 2^-3/2: {ts:?}; bound violations: {violations}"),
    )
}

fn criterion_5() -> Outcome {
    let p = ProbabilityVector::surd3(60);
    let scan = record_scan(&p, 100_000, Kappa::Generic, prec()).unwrap();
    let hits: Vec<_> = scan.entries.iter().filter(|e| e.beats_fact_constant).collect();
    let decades: Vec<usize> =
        (1..=4u32).map(|k| hits.iter().filter(|e| (10u64.pow(k)..10u64.pow(k + 1)).contains(&e.t)).count()).collect();
    let mut violations = 0;
    let mut unchecked = 0;
    for e in &hits {
        let table = FrequencyTable::for_source(&p, e.freqs.clone()).unwrap();
        let d = kl_divergence(&p, &table, prec()).unwrap().nats;
        match theorem2_bound_mary(3, e.t, p.p_min(), prec()) {
            Ok(bound) if d <= bound => {}
            Ok(_) => violations += 1,
            Err(_) => unchecked += 1,
        }
    }
    Outcome::new(
        hits.len() >= 5 && decades.iter().all(|&c| c > 0) && violations == 0,
        format!(
            "{} hits, per decade 10^1..10^4: {decades:?}; bound violations: {violations}; below bound precondition: {unchecked}",
            hits.len()
        ),
    )
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut mismatches = 0;
    let mut cases = 0;
    for _ in 0..50 {
        for m in 2..=4usize {
            let p = random_source(&mut rng, m);
            for t in m as u64..=64 {
                let fast = error_profile(&p, &round_min_max(&p, t).unwrap()).unwrap().delta_star;
                let slow = error_profile(&p, &exhaustive_best(&p, t).unwrap()).unwrap().delta_star;
                cases += 1;
                if fast != slow {
                    mismatches += 1;
                }
            }
        }
    }
    Outcome::new(mismatches == 0, format!("{cases} cases, {mismatches} mismatches"))
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let targets = [rational(1, 100), rational(1, 1000), rational(1, 10_000)];
    let mut failures = Vec::new();
    let mut plans = 0;
    for _ in 0..30 {
        let m = rng.random_range(2..=8);
        let p = random_source(&mut rng, m);
        for target in &targets {
            plans += 1;
            let plan = match plan_precision(&p, target, PlanMode::Guaranteed, Kappa::Generic, prec()) {
                Ok(plan) => plan,
                Err(e) => {
                    failures.push(format!("m={m} R={target}: {e}"));
                    continue;
                }
            };
            let verified = kl_divergence(&p, &plan.table, prec()).unwrap().nats;
            // W < log₂(x) ⇔ 2^W < x
            let x = Rational::from(m as u64) / target + Rational::from(p.p_min().recip_ref());
            let width_ok = Integer::from(1) << plan.width < x;
            if verified > *target || !width_ok {
                failures.push(format!("m={m} R={target}: W={} D={}", plan.width, verified.to_f64()));
            }
        }
    }
    let golden = ProbabilityVector::golden(60);
    let target = rational(1, 100_000);
    let opp = plan_precision(&golden, &target, PlanMode::Opportunistic, Kappa::Golden, prec()).unwrap();
    let guaranteed = plan_precision(&golden, &target, PlanMode::Guaranteed, Kappa::Golden, prec()).unwrap();
    let trend = 10 * opp.width <= 6 * guaranteed.width;
    Outcome::new(
        failures.is_empty() && trend,
        format!(
            "{plans} guaranteed plans, failures {failures:?}; golden R=1e-5: opportunistic W={} (t={}), guaranteed W={}",
            opp.width,
            opp.t(),
            guaranteed.width
        ),
    )
}

fn criterion_8() -> Outcome {
    let p = ProbabilityVector::parse(&["0.7", "0.2", "0.1"]).unwrap();
    let n = 1_000_000;
    let seed = 8;
    let exact = FrequencyTable::for_source(&p, vec![7, 2, 1]).unwrap();
    let uniform = FrequencyTable::for_source(&p, vec![1, 1, 1]).unwrap();
    let a = measure_rate(&p, &exact, n, seed).unwrap();
    let b = measure_rate(&p, &uniform, n, seed).unwrap();

    // log₂3 − H(0.7, 0.2, 0.1), evaluated separately at 50 digits.
    let oracle = Float::parse("0.4281828512741167087927980365207078989437016528442").unwrap();
    let d_bits = kl_divergence(&p, &uniform, prec()).unwrap().bits;
    let oracle_agrees =
        (Float::with_val(prec().bits(), &d_bits - &Float::with_val(prec().bits(), oracle))).abs() < 1e-40;

    let lossless = a.lossless && b.lossless;
    let exact_ok = a.excess <= 1e-3;
    let gap = (b.excess - d_bits.to_f64()).abs();
    Outcome::new(
        lossless && exact_ok && gap <= 0.005 && oracle_agrees,
        format!(
            "lossless {lossless}; exact-table excess {:.3e}; uniform excess {:.6} vs D_bits {:.6} (gap {gap:.2e}); D_bits matches oracle {oracle_agrees}",
            a.excess,
            b.excess,
            d_bits.to_f64()
        ),
    )
}

/// Id, name, runtime budget and check.
type Criterion = (u32, &'static str, Duration, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        (1, "lemma 1 soundness", Duration::from_secs(10), criterion_1),
        (2, "theorem 1 behavior", Duration::from_secs(60), criterion_2),
        (3, "binary records, golden source", Duration::from_secs(30), criterion_3),
        (4, "binary records, generic source", Duration::from_secs(30), criterion_4),
        (5, "m-ary simultaneous approximation", Duration::from_secs(300), criterion_5),
        (6, "oracle equivalence", Duration::from_secs(60), criterion_6),
        (7, "width planning end to end", Duration::from_secs(60), criterion_7),
        (8, "coder validation", Duration::from_secs(60), criterion_8),
    ];
    let filter: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (id, name, budget, run) in criteria {
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= budget;
        let passed = outcome.passed && in_time;
        if !passed {
            failed += 1;
        }
        println!(
            "criterion {id} [{}] {name}: {:.2}s (budget {}s{}) | {}",
            if passed { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            budget.as_secs(),
            if in_time { "" } else { ", exceeded" },
            outcome.detail
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criterion(s) failed");
        ExitCode::FAILURE
    }
}
