//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use bss_core::attack::{
    chosen_ciphertext_attack, chosen_plaintext_attack, dac_row_decrypt, exhaustive_guess_attack, guess_key,
    hit_probability, keyspace_size, known_plaintext_attack, recover_keystream_structured, required_plaintexts,
    sensitivity_scan, ExhaustiveConfig, KeySpaceModel, SensitivityConfig,
};
use bss_core::cipher::{IMAGE_BETA, SPEECH_BETA};
use bss_core::linalg::Matrix;
use bss_core::media::{load_asset, to_signal};
use bss_core::metrics::mae_in;
use bss_core::signal::SignalBlock;
use bss_core::{
    decrypt, encrypt, encrypt_general, generate_key, generate_keystream, CipherParams, CounterRng, Domain, MediaAsset,
    MixingKey64, Mode, SeedKey, SignalKind,
};
use num_bigint::BigUint;

type Block = SignalBlock<f64>;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn corpus(name: &str) -> MediaAsset {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name);
    load_asset(&path).unwrap_or_else(|e| panic!("loading {}: {e}", path.display()))
}

fn random_plain(rng: &mut CounterRng, p: usize, t: usize) -> Block {
    let m = Matrix::from_fn(p, t, |_, _| rng.next_symmetric());
    SignalBlock::new(m, p * t, SignalKind::Plaintext).unwrap()
}

fn random_params(rng: &mut CounterRng, ps: &[usize]) -> CipherParams {
    let p = ps[(rng.next_u64() % ps.len() as u64) as usize];
    if rng.next_unit() < 0.5 {
        CipherParams::structured(p, 1.0 + 9.0 * rng.next_unit())
    } else {
        let q = if rng.next_unit() < 0.5 { 1 } else { p };
        CipherParams::general(p, q)
    }
}

fn round_trip() -> Outcome {
    let mut rng = CounterRng::new(1);
    let mut worst = 0.0f64;
    let mut modes = [0usize; 2];
    for n in 0..100u64 {
        let params = random_params(&mut rng, &[1, 2, 4]);
        modes[(params.mode == Mode::Structured) as usize] += 1;
        let t = [3, 50, 10_000][(n % 3) as usize];
        let key: MixingKey64 = generate_key(&params, rng.next_u64()).unwrap();
        let ks = generate_keystream(SeedKey::new(rng.next_u64()), params.q, t).unwrap();
        let s = random_plain(&mut rng, params.p, t);
        let back = decrypt(&encrypt(&s, &key, &ks).unwrap(), &key, &ks).unwrap();
        worst = worst.max(back.max_abs_diff(&s));
    }
    outcome(worst <= 1e-9 && modes.iter().all(|&m| m > 0), format!("max error {worst:.2e} (tol 1e-9), general/structured {modes:?}"))
}

/// Entries on a coarse dyadic grid, so every product and sum below is exact.
fn dyadic(rng: &mut CounterRng, rows: usize, cols: usize) -> Matrix<f64> {
    Matrix::from_fn(rows, cols, |_, _| ((rng.next_u64() % 257) as f64 - 128.0) / 128.0)
}

fn differential_identity() -> Outcome {
    let mut rng = CounterRng::new(2);
    let mut worst = 0.0f64;
    let mut bitwise = 0;
    for _ in 0..100 {
        let params = random_params(&mut rng, &[1, 2, 4]);
        let t = 64;
        let key: MixingKey64 = generate_key(&params, rng.next_u64()).unwrap();
        let ks = generate_keystream(SeedKey::new(rng.next_u64()), params.q, t).unwrap();
        let (s1, s2) = (random_plain(&mut rng, params.p, t), random_plain(&mut rng, params.p, t));
        let dx = encrypt(&s1, &key, &ks).unwrap().differential(&encrypt(&s2, &key, &ks).unwrap()).unwrap();
        let expected = key.a_s().matmul(s1.differential(&s2).unwrap().matrix()).unwrap();
        worst = worst.max(dx.matrix().max_abs_diff(&expected));

        // Keystream swap on exactly representable data: the differential
        // must not change in a single bit.
        let (p, q) = (params.p, params.q);
        let exact = MixingKey64::raw(dyadic(&mut rng, p, p), dyadic(&mut rng, p, q)).unwrap();
        let grid = |rng: &mut CounterRng, rows| SignalBlock::new(dyadic(rng, rows, t), rows * t, SignalKind::Plaintext).unwrap();
        let (e1, e2) = (grid(&mut rng, p), grid(&mut rng, p));
        let (k1, k2) = (grid(&mut rng, q), grid(&mut rng, q));
        let d = |k: &Block| {
            encrypt_general(&e1, &exact, k).unwrap().differential(&encrypt_general(&e2, &exact, k).unwrap()).unwrap()
        };
        let (da, db) = (d(&k1), d(&k2));
        if da.matrix().as_slice().iter().zip(db.matrix().as_slice()).all(|(a, b)| a.to_bits() == b.to_bits()) {
            bitwise += 1;
        }
    }
    outcome(worst <= 1e-12 && bitwise == 100, format!("max |dx - A_s ds| {worst:.2e} (tol 1e-12), keystream-independent {bitwise}/100"))
}

fn perturbation_bounds() -> Outcome {
    let mut rng = CounterRng::new(3);
    let mut violations = [0usize; 3];
    for _ in 0..1000 {
        let params = random_params(&mut rng, &[1, 2, 4]);
        let t = 32;
        let eps = 10f64.powf(-6.0 + 5.0 * rng.next_unit());
        let key: MixingKey64 = generate_key(&params, rng.next_u64()).unwrap();
        let ks = generate_keystream(SeedKey::new(rng.next_u64()), params.q, t).unwrap();
        let s = random_plain(&mut rng, params.p, t);
        let x = encrypt_general(&s, &key, &ks).unwrap();
        // Rounding slack well below any bound being checked.
        let slack = 1e-12 * (1.0 + x.max_abs());
        let (p, q) = (params.p as f64, params.q as f64);

        let mut jitter = |rows, cols| Matrix::from_fn(rows, cols, |_, _| eps * rng.next_symmetric());
        let shifted = key.mixing().add(&jitter(params.p, params.p + params.q)).unwrap();
        let perturbed = MixingKey64::from_mixing(&shifted).unwrap();
        let stacked_max = s.max_abs().max(ks.max_abs());
        let bound = (p + q) * stacked_max * eps;
        if encrypt_general(&s, &perturbed, &ks).unwrap().max_abs_diff(&x) > bound + slack {
            violations[0] += 1;
        }

        let ks2 = SignalBlock::new(ks.matrix().add(&jitter(params.q, t)).unwrap(), params.q * t, SignalKind::Differential).unwrap();
        let bound = q * key.a_k().max_abs() * eps;
        if encrypt_general(&s, &key, &ks2).unwrap().max_abs_diff(&x) > bound + slack {
            violations[1] += 1;
        }

        let s2 = SignalBlock::new(s.matrix().add(&jitter(params.p, t)).unwrap(), params.p * t, SignalKind::Differential).unwrap();
        let bound = p * key.a_s().max_abs() * eps;
        if encrypt_general(&s2, &key, &ks).unwrap().max_abs_diff(&x) > bound + slack {
            violations[2] += 1;
        }
    }
    outcome(violations == [0; 3], format!("violations key/keystream/plaintext {violations:?} over 1000 instances"))
}

fn known_plaintext() -> Outcome {
    let mut rng = CounterRng::new(4);
    let (mut as_err, mut held_err, mut ks_err) = (0.0f64, 0.0f64, 0.0f64);
    let mut cases = 0;
    for params in [CipherParams::general(2, 3), CipherParams::general(4, 4), CipherParams::structured(2, 10.0), CipherParams::structured(4, 10.0)] {
        for _ in 0..5 {
            let t = 100;
            let key: MixingKey64 = generate_key(&params, rng.next_u64()).unwrap();
            let ks = generate_keystream(SeedKey::new(rng.next_u64()), params.q, t).unwrap();
            let pairs: Vec<_> = (0..2)
                .map(|_| {
                    let s = random_plain(&mut rng, params.p, t);
                    let x = encrypt(&s, &key, &ks).unwrap();
                    (s, x)
                })
                .collect();
            let result = known_plaintext_attack(&pairs).unwrap();
            as_err = as_err.max(result.recovered_as.as_ref().unwrap().max_abs_diff(key.a_s()));
            let held = random_plain(&mut rng, params.p, t);
            let back = result.recovered_key().unwrap().decrypt(&encrypt(&held, &key, &ks).unwrap()).unwrap();
            held_err = held_err.max(back.max_abs_diff(&held));
            if let Some(form) = key.structured_form() {
                let k = recover_keystream_structured(&pairs[0].0, &pairs[0].1, &form.b, form.beta).unwrap();
                ks_err = ks_err.max(k.max_abs_diff(&ks));
            }
            cases += 1;
        }
    }
    outcome(
        as_err <= 1e-6 && held_err <= 1e-6 && ks_err <= 1e-9,
        format!("{cases} keys: A_s error {as_err:.2e}, held-out error {held_err:.2e} (tol 1e-6), keystream error {ks_err:.2e} (tol 1e-9)"),
    )
}

fn chosen_text() -> Outcome {
    let mut rng = CounterRng::new(5);
    let (mut worst, mut max_queries, mut excess) = (0.0f64, 0usize, 0);
    for n in 0..20 {
        let params = if n % 2 == 0 { CipherParams::general(2 + 2 * (n % 4 / 2), 3) } else { CipherParams::structured(2 + 2 * (n % 4 / 2), 10.0) };
        let t = 40;
        let key: MixingKey64 = generate_key(&params, rng.next_u64()).unwrap();
        let ks = generate_keystream(SeedKey::new(rng.next_u64()), params.q, t).unwrap();
        let mask = key.a_k().matmul(ks.matrix()).unwrap();
        let cpa = chosen_plaintext_attack(|s: &Block| encrypt(s, &key, &ks), params.p, t).unwrap();
        let cca = chosen_ciphertext_attack(|x: &Block| decrypt(x, &key, &ks), params.p, t).unwrap();
        for r in [&cpa, &cca] {
            worst = worst.max(r.recovered_as.as_ref().unwrap().max_abs_diff(key.a_s()));
            worst = worst.max(r.recovered_mask.as_ref().unwrap().max_abs_diff(&mask));
            max_queries = max_queries.max(r.oracle_queries);
            if r.oracle_queries > params.p + 1 {
                excess += 1;
            }
        }
        let unseen = random_plain(&mut rng, params.p, t);
        let x = encrypt(&unseen, &key, &ks).unwrap();
        worst = worst.max(cca.recovered_key().unwrap().decrypt(&x).unwrap().max_abs_diff(&unseen));
    }
    outcome(worst <= 1e-6 && excess == 0, format!("20 hidden keys: max key-material error {worst:.2e} (tol 1e-6), max queries {max_queries} (<= P+1)"))
}

/// Fraction of `samples` experiments in which one of `r` uniform guesses
/// lands in the same width-`2/n` cell of `[-1, 1]` as a uniform target.
fn monte_carlo_hit(n: u64, r: u64, samples: u64, seed: u64) -> f64 {
    let root = CounterRng::new(seed);
    let cell = |v: f64| (((v + 1.0) / 2.0 * n as f64) as u64).min(n - 1);
    let hits = (0..samples)
        .filter(|&k| {
            let mut rng = root.split(k);
            let target = cell(rng.next_symmetric());
            (0..r).any(|_| cell(rng.next_symmetric()) == target)
        })
        .count();
    hits as f64 / samples as f64
}

fn probability_model() -> Outcome {
    let mut worst = 0.0f64;
    let mut detail = Vec::new();
    for (n, r) in [(20, 20), (20, 50), (100, 100)] {
        let mc = monte_carlo_hit(n, r, 100_000, n * 1000 + r);
        let p = hit_probability(n, r);
        worst = worst.max((mc - p).abs());
        detail.push(format!("p({n},{r})={p:.4} mc={mc:.4}"));
    }
    let bound = 1.0 - (-1.0f64).exp();
    let floor_ok = (1..=1000).all(|n| hit_probability(n, n) > bound);
    outcome(worst <= 0.02 && floor_ok, format!("{}; max gap {worst:.4} (tol 0.02); p(n,n) > 0.6321 for n<=1000: {floor_ok}", detail.join(", ")))
}

fn sensitivity() -> Outcome {
    let params = CipherParams::structured(4, IMAGE_BETA);
    let mut pass = true;
    let mut detail = Vec::new();
    for name in ["scene.pgm", "portrait.pgm"] {
        let plain: Block = to_signal(&corpus(name), 4).unwrap();
        let cfg = SensitivityConfig { epsilons: vec![1e-3, 1e-1], trials: 100, master_seed: 7, domain: Domain::Image };
        let curve = sensitivity_scan(&plain, &params, &cfg).unwrap();
        let (lo, hi) = (curve.points[0].mean_mae, curve.points[1].mean_mae);
        pass &= lo < hi / 10.0 && (20.0..=80.0).contains(&hi);
        detail.push(format!("{name}: MAE(1e-3)={lo:.3} MAE(0.1)={hi:.3}"));
    }
    outcome(pass, format!("{} (need ratio < 1/10, MAE(0.1) in [20, 80])", detail.join("; ")))
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

fn exhaustive() -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for (name, beta) in [("scene.pgm", IMAGE_BETA), ("one.wav", SPEECH_BETA)] {
        let asset = corpus(name);
        let domain = Domain::from(asset.kind());
        let params = CipherParams::structured(2, beta);
        let plain: Block = to_signal(&asset, 2).unwrap();
        let key: MixingKey64 = generate_key(&params, 1234).unwrap();
        let ks = generate_keystream(SeedKey::new(5678), 2, plain.segment_len()).unwrap();
        let cipher = encrypt(&plain, &key, &ks).unwrap();
        let assembled_mae = |rounds, seed| {
            let result = exhaustive_guess_attack(&cipher, &ks, &params, &ExhaustiveConfig::new(rounds, seed, domain)).unwrap();
            mae_in(domain, result.assembled.as_ref().unwrap(), &plain).unwrap().aggregate_mae.unwrap()
        };
        let baseline = (0..100)
            .map(|trial| {
                let guess: MixingKey64 = guess_key(&params, 0xBA5E, trial).unwrap();
                mae_in(domain, &decrypt(&cipher, &guess, &ks).unwrap(), &plain).unwrap().aggregate_mae.unwrap()
            })
            .sum::<f64>()
            / 100.0;
        let seeds = 1..=5u64;
        let at_1k = median(seeds.clone().map(|s| assembled_mae(1_000, s)).collect());
        let at_10k: Vec<f64> = seeds.map(|s| assembled_mae(10_000, s)).collect();
        let worst = at_10k.iter().copied().fold(0.0, f64::max);
        let at_10k = median(at_10k);
        pass &= worst < 0.5 * baseline && at_10k <= at_1k;
        detail.push(format!(
            "{name}: worst r=10k MAE {worst:.4} vs random-guess mean {baseline:.4}, median r=1k {at_1k:.4} -> r=10k {at_10k:.4}"
        ));
    }
    outcome(pass, detail.join("; "))
}

fn dac_and_keyspace() -> Outcome {
    let params = CipherParams::general(4, 4);
    let key: MixingKey64 = generate_key(&params, 9).unwrap();
    let ks = generate_keystream(SeedKey::new(10), 4, 200).unwrap();
    let mut rng = CounterRng::new(11);
    let s = random_plain(&mut rng, 4, 200);
    let x = encrypt(&s, &key, &ks).unwrap();
    let ahat = key.ahat().unwrap();
    let mut changed = 0;
    for i in 0..4 {
        let reference = dac_row_decrypt(&x, ahat.row(i), &ks, i).unwrap();
        let mut other = ahat.clone();
        for j in (0..4).filter(|&j| j != i) {
            other.row_mut(j).iter_mut().for_each(|v| *v += rng.next_symmetric());
        }
        let again = dac_row_decrypt(&x, other.row(i), &ks, i).unwrap();
        changed += reference.iter().zip(&again).filter(|(a, b)| a.to_bits() != b.to_bits()).count();
    }
    let m = KeySpaceModel { p: 4, q: 4, r: 1 << 31, l: 64, epsilon: 0.1 };
    let one = BigUint::from(1u8);
    let expected = [
        (false, false, one.clone() << 1056usize),
        (true, false, one.clone() << (31 * 16 + 64) as usize),
        (false, true, BigUint::from(4u8) << (31 * 8 + 64) as usize),
        (true, true, BigUint::from(4u8) << (31 * 4 + 64) as usize),
    ];
    let forms_ok = expected.iter().all(|(st, dac, n)| keyspace_size(&m, *st, *dac).unwrap() == *n);
    outcome(changed == 0 && forms_ok, format!("samples changed by other rows: {changed}; four closed forms exact (incl. 2^1056): {forms_ok}"))
}

fn errata() -> Outcome {
    let counts = required_plaintexts(2).unwrap();
    let params = CipherParams::structured(2, 10.0);
    let key: MixingKey64 = generate_key(&params, 12).unwrap();
    let ks = generate_keystream(SeedKey::new(13), 2, 50).unwrap();
    let s = random_plain(&mut CounterRng::new(14), 2, 50);
    let x = encrypt(&s, &key, &ks).unwrap();
    let form = key.structured_form().unwrap();
    let corrected = recover_keystream_structured(&s, &x, &form.b, form.beta).unwrap();
    let corrected_err = encrypt(&s, &key, &corrected).unwrap().max_abs_diff(&x);
    // The printed form (s - B^-1 x) / beta is the negation of the corrected one.
    let printed = corrected.map_valid(|v| -v);
    let printed_err = encrypt(&s, &key, &printed).unwrap().max_abs_diff(&x);
    let pass = counts.n_formula == 2 && counts.n_exact == 3 && corrected_err <= 1e-9 && printed_err > 1e-3;
    outcome(
        pass,
        format!(
            "P=2: n_formula={} n_exact={}; re-encryption error corrected {corrected_err:.2e}, printed {printed_err:.2e}",
            counts.n_formula, counts.n_exact
        ),
    )
}

fn main() {
    let criteria: [(&str, u64, fn() -> Outcome); 10] = [
        ("round-trip correctness", 10, round_trip),
        ("differential identity", 5, differential_identity),
        ("perturbation bounds", 30, perturbation_bounds),
        ("known-plaintext attack", 10, known_plaintext),
        ("chosen-plaintext/ciphertext attack", 10, chosen_text),
        ("probability model", 30, probability_model),
        ("sensitivity scan", 120, sensitivity),
        ("exhaustive-guess attack", 300, exhaustive),
        ("divide-and-conquer and key space", 1, dac_and_keyspace),
        ("errata surfacing", 1, errata),
    ];
    let mut failed = 0;
    for (n, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(*budget);
        let pass = out.pass && in_time;
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {}: {} ({}; {:.2} s of {} s)",
            n + 1,
            name,
            if pass { "PASS" } else { "FAIL" },
            out.detail,
            elapsed.as_secs_f64(),
            budget
        );
    }
    println!("acceptance: {} passed, {} failed", criteria.len() - failed, failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
