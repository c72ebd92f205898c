use quantacode::coder::REGISTER_BITS;
use quantacode::{encode, kl_divergence, measure_rate, sample_symbols, FrequencyTable, Precision, ProbabilityVector};

fn pv(entries: &[&str]) -> ProbabilityVector {
    ProbabilityVector::parse(entries).unwrap()
}

const N: usize = 1_000_000;

#[test]
fn exact_binary_model_costs_only_the_flush() {
    let p = pv(&["1/2", "1/2"]);
    let table = FrequencyTable::new(vec![1, 1]).unwrap();
    let r = measure_rate(&p, &table, N, 11).unwrap();
    assert!(r.lossless);
    assert!(r.excess <= 1e-4, "{}", r.excess);
    assert!(r.excess <= f64::from(REGISTER_BITS + 8) / N as f64);
    assert_eq!(r.rate, r.total_bits as f64 / N as f64);
}

#[test]
fn uniform_model_on_skewed_binary_source() {
    let p = pv(&["7/10", "3/10"]);
    let table = FrequencyTable::for_source(&p, vec![1, 1]).unwrap();
    let r = measure_rate(&p, &table, N, 12).unwrap();
    // 1 − H₂(0.7)
    assert!((r.excess - 0.118_709_100_769).abs() <= 0.005, "{}", r.excess);
    assert!((r.divergence_bits - 0.118_709_100_769_307_4).abs() < 1e-12);
}

#[test]
fn exact_ternary_table_has_negligible_excess() {
    let p = pv(&["7/10", "2/10", "1/10"]);
    let table = FrequencyTable::for_source(&p, vec![7, 2, 1]).unwrap();
    let r = measure_rate(&p, &table, N, 13).unwrap();
    assert!(r.lossless);
    assert!(r.excess <= 1e-3);
    assert!(r.excess <= f64::from(REGISTER_BITS + 8) / N as f64, "{}", r.excess);
    // H(0.7, 0.2, 0.1)
    assert!((r.source_entropy_bits - 1.156_779_649_447_04).abs() < 1e-12);
}

#[test]
fn excess_tracks_divergence() {
    let cases: [(&[&str], Vec<u64>); 4] = [
        (&["7/10", "3/10"], vec![2, 1]),
        (&["7/10", "2/10", "1/10"], vec![1, 1, 1]),
        (&["1/3", "1/3", "1/3"], vec![5, 3, 2]),
        (&["0.05", "0.15", "0.3", "0.5"], vec![1, 2, 4, 9]),
    ];
    for (seed, (probs, freqs)) in cases.into_iter().enumerate() {
        let p = pv(probs);
        let table = FrequencyTable::for_source(&p, freqs).unwrap();
        for n in [1_000, 100_000] {
            let r = measure_rate(&p, &table, n, seed as u64).unwrap();
            let allowance = 4.0 * r.std_error + 64.0 / n as f64;
            assert!((r.excess - r.divergence_bits).abs() <= allowance, "{probs:?} n={n}: {r:?}");
        }
        let d = kl_divergence(&p, &table, Precision::default()).unwrap().bits.to_f64();
        assert_eq!(measure_rate(&p, &table, 10, 0).unwrap().divergence_bits, d);
    }
}

#[test]
fn output_is_deterministic_across_thread_pools() {
    let p = pv(&["0.05", "0.15", "0.3", "0.5"]);
    let table = FrequencyTable::for_source(&p, vec![1, 2, 4, 9]).unwrap();
    let symbols = sample_symbols(&p, 200_000, 99);
    let reference = encode(&symbols, &table).unwrap();
    let outputs: Vec<Vec<u8>> = (1..=4)
        .map(|threads| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            pool.install(|| encode(&sample_symbols(&p, 200_000, 99), &table).unwrap())
        })
        .collect();
    assert!(outputs.iter().all(|o| *o == reference));
}

#[test]
fn csv_has_header_and_one_row() {
    let p = pv(&["1/2", "1/2"]);
    let table = FrequencyTable::new(vec![1, 1]).unwrap();
    let r = measure_rate(&p, &table, 1000, 3).unwrap();
    let mut buf = Vec::new();
    r.write_csv(&mut buf, 3).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("n,total_bits,rate,entropy_bits"));
    assert!(lines[1].starts_with("1000,"));
    assert!(lines[1].ends_with(",true,3"));
}
