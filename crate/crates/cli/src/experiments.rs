use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use bss_core::attack::report::{export_candidates, AttackReport};
use bss_core::attack::{
    approximate_keyspace_size, chosen_ciphertext_attack, chosen_plaintext_attack, differential_attack, differential_guess,
    exhaustive_guess_attack, guess_key, hit_probability, keyspace_size, known_plaintext_attack,
    recover_keystream_structured, required_plaintexts, sensitivity_scan, ExhaustiveConfig, Guesses, KeySpaceModel,
    SensitivityConfig, DEFAULT_EPSILONS,
};
use bss_core::cipher::{IMAGE_BETA, SPEECH_BETA};
use bss_core::linalg::Matrix;
use bss_core::media::{encode_asset, from_signal, load_asset, to_signal};
use bss_core::metrics::{mae_in, mane_in};
use bss_core::signal::SignalBlock;
use bss_core::{
    decrypt, encrypt, generate_key, generate_keystream, CipherParams, CounterRng, Domain, MediaAsset, MixingKey64, Mode,
    SeedKey,
};
use clap::ValueEnum;
use serde::Serialize;

use crate::commands::params_from;
use crate::manifest::{digest, FileDigest, Outputs};
use crate::{default_corpus, ModeArg};

type Block = SignalBlock<f64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentName {
    Sensitivity,
    Exhaustive,
    Differential,
    Kpa,
    Cpa,
    Keyspace,
}

#[derive(clap::Args, Debug)]
pub struct ExperimentArgs {
    #[arg(value_enum)]
    pub name: ExperimentName,
    /// Output directory.
    #[arg(long, short = 'o')]
    pub out: PathBuf,
    /// Directory holding the bundled corpus.
    #[arg(long, default_value_os_t = default_corpus())]
    pub corpus: PathBuf,
    /// Media inputs; defaults depend on the experiment.
    #[arg(long, short = 'i')]
    pub input: Vec<PathBuf>,
    #[arg(long, short = 'p')]
    pub p: Option<usize>,
    #[arg(long, short = 'q')]
    pub q: Option<usize>,
    #[arg(long, value_enum, default_value = "structured")]
    pub mode: ModeArg,
    /// Keystream gain; defaults to 10 for images and 1 for speech.
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long, default_value_t = 1)]
    pub master_seed: u64,
    /// Sensitivity grid, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub epsilons: Vec<f64>,
    /// Trials per sensitivity point.
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    /// Exhaustive-search rounds r.
    #[arg(long, default_value_t = 10_000)]
    pub rounds: usize,
    /// Candidates kept besides the per-segment winners.
    #[arg(long, default_value_t = 20)]
    pub retain: usize,
    /// Random guesses in the differential attack.
    #[arg(long, default_value_t = 8)]
    pub guesses: usize,
    /// Differential attack on the fixed 2x2 key/guess mismatch pair.
    #[arg(long)]
    pub mismatch_example: bool,
    /// Key-space model: values per matrix entry.
    #[arg(long, default_value_t = 1u64 << 31)]
    pub r: u64,
    /// Key-space model: seed bits.
    #[arg(long, default_value_t = 64)]
    pub l: u32,
    /// Key-space model: coarse search precision.
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
}

/// Fully resolved configuration, as recorded in the manifest.
#[derive(Serialize)]
struct Config {
    experiment: ExperimentName,
    inputs: Vec<String>,
    p: usize,
    q: usize,
    mode: ModeArg,
    beta: f64,
    master_seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    epsilons: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    trials: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rounds: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    retain: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    guesses: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mismatch_example: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    keyspace: Option<KeySpaceModel>,
}

/// Streams of the run's randomness, all split off the master seed.
mod streams {
    pub const KEY: u64 = 1;
    pub const KEYSTREAM: u64 = 2;
    pub const BASELINE: u64 = 3;
    pub const ATTACK: u64 = 4;
}

fn derive(master: u64, stream: u64) -> u64 {
    CounterRng::new(master).split(stream).next_u64()
}

struct Summary {
    text: String,
    failures: usize,
}

impl Summary {
    fn new(name: ExperimentName) -> Self {
        Summary { text: format!("experiment {}\n", name.to_possible_value().expect("named").get_name()), failures: 0 }
    }

    fn line(&mut self, s: impl AsRef<str>) {
        self.text.push_str(s.as_ref());
        self.text.push('\n');
    }

    fn check(&mut self, name: &str, pass: bool, detail: impl AsRef<str>) {
        if !pass {
            self.failures += 1;
        }
        let verdict = if pass { "PASS" } else { "FAIL" };
        let _ = writeln!(self.text, "check {name}: {verdict} ({})", detail.as_ref());
    }
}

struct Run<'a> {
    args: &'a ExperimentArgs,
    inputs: Vec<(PathBuf, MediaAsset)>,
    out: Outputs,
    summary: Summary,
}

impl Run<'_> {
    fn domain(&self) -> Domain {
        Domain::from(self.inputs[0].1.kind())
    }

    fn beta(&self) -> f64 {
        self.args.beta.unwrap_or(if self.domain() == Domain::Image { IMAGE_BETA } else { SPEECH_BETA })
    }

    fn params(&self, default_p: usize) -> CipherParams {
        params_from(self.args.p.unwrap_or(default_p), self.args.q, self.args.mode, self.beta())
    }

    fn key(&self, params: &CipherParams) -> Result<MixingKey64> {
        Ok(generate_key(params, derive(self.args.master_seed, streams::KEY))?)
    }

    fn keystream(&self, q: usize, t: usize) -> Result<Block> {
        Ok(generate_keystream(SeedKey::new(derive(self.args.master_seed, streams::KEYSTREAM)), q, t)?)
    }

    fn signal(&self, k: usize, p: usize) -> Result<Block> {
        Ok(to_signal(&self.inputs[k].1, p)?)
    }

    fn write_media(&mut self, name: &str, sig: &Block, template: &MediaAsset) -> Result<()> {
        let file = format!("{name}.{}", template.kind().extension());
        let asset = from_signal(sig, template, template.kind().is_image())?;
        self.out.write(&file, encode_asset(&asset))
    }

    fn write_report(&mut self, name: &str, report: &AttackReport) -> Result<()> {
        self.out.write(name, report.to_json()?)
    }

    fn gallery(&mut self, result: &bss_core::AttackResult64, template: &MediaAsset) -> Result<()> {
        let dir = self.out.path("gallery");
        for path in export_candidates(result, template, &dir)? {
            let name = path.file_name().expect("file").to_string_lossy();
            self.out.record(&format!("gallery/{name}"));
        }
        Ok(())
    }
}

fn default_inputs(name: ExperimentName) -> &'static [&'static str] {
    match name {
        ExperimentName::Sensitivity | ExperimentName::Exhaustive | ExperimentName::Cpa => &["scene.pgm"],
        ExperimentName::Differential | ExperimentName::Kpa => &["scene.pgm", "portrait.pgm"],
        ExperimentName::Keyspace => &[],
    }
}

pub fn run(args: &ExperimentArgs) -> Result<()> {
    let paths: Vec<PathBuf> = if args.input.is_empty() {
        default_inputs(args.name).iter().map(|f| args.corpus.join(f)).collect()
    } else {
        args.input.clone()
    };
    let inputs = paths
        .iter()
        .map(|p| Ok((p.clone(), load_asset(p).with_context(|| format!("reading {}", p.display()))?)))
        .collect::<Result<Vec<_>>>()?;
    let mut run = Run { args, inputs, out: Outputs::new(&args.out)?, summary: Summary::new(args.name) };

    let config = match args.name {
        ExperimentName::Sensitivity => sensitivity(&mut run)?,
        ExperimentName::Exhaustive => exhaustive(&mut run)?,
        ExperimentName::Differential => differential(&mut run)?,
        ExperimentName::Kpa => kpa(&mut run)?,
        ExperimentName::Cpa => cpa(&mut run)?,
        ExperimentName::Keyspace => keyspace(&mut run)?,
    };

    let failures = run.summary.failures;
    let _ = writeln!(run.summary.text, "summary: {}", if failures == 0 { "all checks passed".to_string() } else { format!("{failures} check(s) failed") });
    print!("{}", run.summary.text);
    run.out.write("summary.txt", &run.summary.text)?;
    let digests = run
        .inputs
        .iter()
        .map(|(p, _)| digest(p, display(p)))
        .collect::<Result<Vec<FileDigest>>>()?;
    run.out.finish(&format!("{:?}", args.name).to_lowercase(), config, digests)
}

fn display(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}

fn base_config(run: &Run, params: &CipherParams) -> Config {
    Config {
        experiment: run.args.name,
        inputs: run.inputs.iter().map(|(p, _)| display(p)).collect(),
        p: params.p,
        q: params.q,
        mode: match params.mode {
            Mode::General => ModeArg::General,
            Mode::Structured => ModeArg::Structured,
        },
        beta: params.beta,
        master_seed: run.args.master_seed,
        epsilons: None,
        trials: None,
        rounds: None,
        retain: None,
        guesses: None,
        mismatch_example: None,
        keyspace: None,
    }
}

fn require_inputs(run: &Run, n: usize) -> Result<()> {
    if run.inputs.len() < n {
        bail!("experiment needs {n} media inputs, got {}", run.inputs.len());
    }
    Ok(())
}

fn sensitivity(run: &mut Run) -> Result<Config> {
    require_inputs(run, 1)?;
    let params = run.params(4);
    let epsilons = if run.args.epsilons.is_empty() { DEFAULT_EPSILONS.to_vec() } else { run.args.epsilons.clone() };
    let plain = run.signal(0, params.p)?;
    let domain = run.domain();
    let cfg = SensitivityConfig { epsilons: epsilons.clone(), trials: run.args.trials, master_seed: run.args.master_seed, domain };
    let curve = sensitivity_scan(&plain, &params, &cfg)?;
    run.out.write("sensitivity.csv", curve.to_csv())?;

    let s = &mut run.summary;
    for p in &curve.points {
        s.line(format!("epsilon {:<8} mean MAE {:>10.4} std {:>9.4}", p.epsilon, p.mean_mae, p.std_mae));
    }
    let monotone = curve.points.windows(2).all(|w| w[1].mean_mae >= 0.95 * w[0].mean_mae);
    s.check("mean MAE non-decreasing in epsilon (5% slack)", monotone, format!("{} points", curve.points.len()));
    let at = |e: f64| curve.points.iter().find(|p| (p.epsilon - e).abs() < 1e-12).map(|p| p.mean_mae);
    if domain == Domain::Image {
        if let Some(hi) = at(0.1) {
            s.check("MAE at epsilon 0.1 within [20, 80]", (20.0..=80.0).contains(&hi), format!("{hi:.4}"));
            if let Some(lo) = at(1e-3) {
                s.check("MAE(1e-3) below MAE(0.1) / 10", lo < hi / 10.0, format!("{lo:.4} vs {hi:.4}"));
            }
        }
    }
    Ok(Config { epsilons: Some(epsilons), trials: Some(run.args.trials), ..base_config(run, &params) })
}

fn exhaustive(run: &mut Run) -> Result<Config> {
    require_inputs(run, 1)?;
    let params = run.params(2);
    let template = run.inputs[0].1.clone();
    let domain = run.domain();
    let plain = run.signal(0, params.p)?;
    let key = run.key(&params)?;
    let ks = run.keystream(params.q, plain.segment_len())?;
    let cipher = encrypt(&plain, &key, &ks)?;
    let cfg = ExhaustiveConfig { rounds: run.args.rounds, master_seed: derive(run.args.master_seed, streams::ATTACK), domain, retained: run.args.retain };
    let result = exhaustive_guess_attack(&cipher, &ks, &params, &cfg)?;

    let assembled = result.assembled.as_ref().expect("exhaustive search assembles");
    let mae = mae_in(domain, assembled, &plain)?.aggregate_mae.expect("aggregate");
    let baseline_seed = derive(run.args.master_seed, streams::BASELINE);
    let mut baseline = 0.0;
    for trial in 0..100 {
        let guess: MixingKey64 = guess_key(&params, baseline_seed, trial)?;
        baseline += mae_in(domain, &decrypt(&cipher, &guess, &ks)?, &plain)?.aggregate_mae.expect("aggregate") / 100.0;
    }
    run.write_report("report.json", &AttackReport::from_result(&result, Some(template.kind().extension())))?;
    run.write_media("assembled", assembled, &template)?;
    run.gallery(&result, &template)?;

    let s = &mut run.summary;
    s.line(format!("rounds {}, candidates kept {}", cfg.rounds, result.candidates.len()));
    s.line(format!("plaintext MANE per segment   {:?}", mane_in(domain, &plain).per_segment_mane));
    let q = result.assembled_quality.as_ref().expect("assembled quality");
    s.line(format!("assembled MANE per segment   {:?}", q.per_segment_mane));
    s.line(format!("assembled MAE {mae:.4}, mean MAE of 100 random guesses {baseline:.4}"));
    s.check("assembled MAE below half the random-guess mean", mae < 0.5 * baseline, format!("{mae:.4} vs {:.4}", 0.5 * baseline));
    Ok(Config { rounds: Some(cfg.rounds), retain: Some(cfg.retained), ..base_config(run, &params) })
}

/// Fixed mismatch pair: a true `A_s` and a far-off guess.
fn mismatch_pair() -> (Matrix<f64>, Matrix<f64>) {
    let a = Matrix::from_rows(&[vec![0.7123, -0.4272], vec![0.1958, 0.1295]]).expect("2x2");
    let guess = Matrix::from_rows(&[vec![0.5914, 0.9527], vec![0.5726, 0.1437]]).expect("2x2");
    (a, guess)
}

fn differential(run: &mut Run) -> Result<Config> {
    require_inputs(run, 2)?;
    let example = run.args.mismatch_example;
    let mut params = run.params(2);
    if example {
        params = CipherParams::general(2, params.q);
    }
    let (s1, s2) = (run.signal(0, params.p)?, run.signal(1, params.p)?);
    if !s1.same_shape(&s2) || run.inputs[0].1.kind() != run.inputs[1].1.kind() {
        bail!("differential inputs must have the same format and length");
    }
    let template = run.inputs[0].1.clone();
    let mut key = run.key(&params)?;
    let mut guesses = Guesses::Random(run.args.guesses);
    if example {
        let (a, guess) = mismatch_pair();
        key = MixingKey64::raw(a, key.a_k().clone())?;
        let mut list = vec![guess];
        let mut rng = CounterRng::new(derive(run.args.master_seed, streams::ATTACK));
        while list.len() < 1 + run.args.guesses {
            let m = Matrix::from_fn(2, 2, |_, _| rng.next_symmetric());
            if m.condition_number() <= bss_core::cipher::MAX_CONDITION {
                list.push(m);
            }
        }
        guesses = Guesses::Explicit(list);
    }
    let ks = run.keystream(params.q, s1.segment_len())?;
    let (x1, x2) = (encrypt(&s1, &key, &ks)?, encrypt(&s2, &key, &ks)?);
    let result = differential_attack(&x1, &x2, &guesses, derive(run.args.master_seed, streams::ATTACK), run.domain())?;
    run.write_report("report.json", &AttackReport::from_result(&result, Some(template.kind().extension())))?;
    run.gallery(&result, &template)?;

    let truth = s1.differential(&s2)?;
    let exact = differential_guess(&x1.differential(&x2)?, key.a_s())?;
    let err = exact.max_abs_diff(&truth);
    let s = &mut run.summary;
    s.line(format!("{} candidate differentials written to gallery/ for inspection; none is preferred", result.candidates.len()));
    if example {
        let (a, guess) = mismatch_pair();
        let mix = guess.inverse()?.matmul(&a)?;
        s.line(format!("effective mixing guess^-1 A_s = {:?}", mix.to_rows()));
    }
    s.check("true A_s recovers the plaintext differential", err <= 1e-9, format!("max error {err:.2e}"));
    Ok(Config { guesses: Some(run.args.guesses), mismatch_example: Some(example), ..base_config(run, &params) })
}

fn kpa(run: &mut Run) -> Result<Config> {
    require_inputs(run, 2)?;
    let params = run.params(2);
    let plains = (0..run.inputs.len()).map(|k| run.signal(k, params.p)).collect::<Result<Vec<_>>>()?;
    let t = plains.iter().map(|s| s.segment_len()).max().expect("inputs");
    let key = run.key(&params)?;
    let ks = run.keystream(params.q, t)?;
    let pairs = plains
        .iter()
        .map(|s| {
            let ks_s = generate_keystream_prefix(&ks, s.segment_len())?;
            Ok((s.clone(), encrypt(s, &key, &ks_s)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let result = known_plaintext_attack(&pairs)?;
    let recovered = result.recovered_key().expect("as and mask");
    let as_err = recovered.a_s.max_abs_diff(key.a_s());

    // Held out: the first input mirrored end to end.
    let template = run.inputs[0].1.clone();
    let mirrored: Vec<i32> = template.samples().iter().rev().copied().collect();
    let held = MediaAsset::like(&template, mirrored)?;
    let held_plain: Block = to_signal(&held, params.p)?;
    let held_x = encrypt(&held_plain, &key, &generate_keystream_prefix(&ks, held_plain.segment_len())?)?;
    let held_back = recovered.decrypt(&held_x)?;
    let held_err = held_back.max_abs_diff(&held_plain);

    run.write_report("report.json", &AttackReport::from_result(&result, None))?;
    run.write_media("held_out_recovered", &held_back, &held)?;
    let s = &mut run.summary;
    s.line(format!("{} known pairs, mask covers {} instants", pairs.len(), recovered.coverage()));
    s.line(format!("recovered A_s = {:?}", recovered.a_s.to_rows()));
    s.check("recovered A_s within 1e-6", as_err <= 1e-6, format!("max entry error {as_err:.2e}"));
    s.check("held-out ciphertext decrypts within 1e-6", held_err <= 1e-6, format!("max error {held_err:.2e}"));
    if params.mode == Mode::Structured {
        let (sp, xp) = &pairs[0];
        let k = recover_keystream_structured(sp, xp, &recovered.a_s, params.beta)?;
        let k_err = k.max_abs_diff(&generate_keystream_prefix(&ks, sp.segment_len())?);
        s.check("keystream recovered within 1e-9", k_err <= 1e-9, format!("max error {k_err:.2e}"));
    }
    Ok(base_config(run, &params))
}

/// First `t` samples of every keystream row.
fn generate_keystream_prefix(ks: &Block, t: usize) -> Result<Block> {
    let m = ks.matrix().columns(0, t);
    let len = m.rows() * t;
    Ok(SignalBlock::new(m, len, bss_core::SignalKind::Keystream)?)
}

fn cpa(run: &mut Run) -> Result<Config> {
    require_inputs(run, 1)?;
    let params = run.params(2);
    let plain = run.signal(0, params.p)?;
    let t = plain.segment_len();
    let key = run.key(&params)?;
    let ks = run.keystream(params.q, t)?;
    let mask = key.a_k().matmul(ks.matrix())?;
    let cpa = chosen_plaintext_attack(|s: &Block| encrypt(s, &key, &ks), params.p, t)?;
    let cca = chosen_ciphertext_attack(|x: &Block| decrypt(x, &key, &ks), params.p, t)?;
    let x = encrypt(&plain, &key, &ks)?;
    let recovered = cca.recovered_key().expect("as and mask").decrypt(&x)?;
    let dec_err = recovered.max_abs_diff(&plain);

    let template = run.inputs[0].1.clone();
    run.write_report("cpa_report.json", &AttackReport::from_result(&cpa, None))?;
    run.write_report("cca_report.json", &AttackReport::from_result(&cca, None))?;
    run.write_media("recovered", &recovered, &template)?;
    let s = &mut run.summary;
    for (name, r) in [("chosen-plaintext", &cpa), ("chosen-ciphertext", &cca)] {
        let err = r.recovered_as.as_ref().expect("A_s").max_abs_diff(key.a_s()).max(r.recovered_mask.as_ref().expect("mask").max_abs_diff(&mask));
        s.check(&format!("{name}: key material within 1e-6"), err <= 1e-6, format!("max error {err:.2e}"));
        s.check(&format!("{name}: at most P+1 queries"), r.oracle_queries <= params.p + 1, format!("{} queries", r.oracle_queries));
    }
    s.check("unseen ciphertext decrypts within 1e-6", dec_err <= 1e-6, format!("max error {dec_err:.2e}"));
    Ok(base_config(run, &params))
}

#[derive(Serialize)]
struct KeySpaceReport {
    model: KeySpaceModel,
    general: String,
    structured: String,
    general_dac: String,
    structured_dac: String,
    approximate_general_dac: String,
    approximate_structured_dac: String,
    n_eps: u64,
    hit_probability_n_eps_rounds: f64,
    required_plaintexts_formula: u64,
    required_plaintexts_exact: u64,
}

fn keyspace(run: &mut Run) -> Result<Config> {
    let p = run.args.p.unwrap_or(4);
    let q = run.args.q.unwrap_or(p);
    let model = KeySpaceModel { p: p as u32, q: q as u32, r: run.args.r, l: run.args.l, epsilon: run.args.epsilon };
    let need = required_plaintexts(p as u64)?;
    let report = KeySpaceReport {
        model,
        general: keyspace_size(&model, false, false)?.to_string(),
        structured: keyspace_size(&model, true, false)?.to_string(),
        general_dac: keyspace_size(&model, false, true)?.to_string(),
        structured_dac: keyspace_size(&model, true, true)?.to_string(),
        approximate_general_dac: approximate_keyspace_size(&model, false)?.to_string(),
        approximate_structured_dac: approximate_keyspace_size(&model, true)?.to_string(),
        n_eps: model.n_eps(),
        hit_probability_n_eps_rounds: hit_probability(model.n_eps(), model.n_eps()),
        required_plaintexts_formula: need.n_formula,
        required_plaintexts_exact: need.n_exact,
    };
    run.out.write("keyspace.json", serde_json::to_string_pretty(&report)? + "\n")?;
    let s = &mut run.summary;
    s.line(format!("model P={} Q={} R={} L={} epsilon={}", model.p, model.q, model.r, model.l, model.epsilon));
    s.line(format!("general           R^(P(P+Q)) 2^L = {}", report.general));
    s.line(format!("structured        R^(P^2) 2^L    = {}", report.structured));
    s.line(format!("general + DAC     P R^(P+Q) 2^L  = {}", report.general_dac));
    s.line(format!("structured + DAC  P R^P 2^L      = {}", report.structured_dac));
    s.line(format!("approximate DAC search at epsilon: general {}, structured {}", report.approximate_general_dac, report.approximate_structured_dac));
    s.line(format!("p(n_eps={}, r=n_eps) = {:.6}", report.n_eps, report.hit_probability_n_eps_rounds));
    s.line(format!("known plaintexts for P={p}: closed form {}, exact {}", need.n_formula, need.n_exact));
    let ordered = keyspace_size(&model, false, true)? <= keyspace_size(&model, false, false)?
        && keyspace_size(&model, true, true)? <= keyspace_size(&model, true, false)?;
    s.check("divide-and-conquer never enlarges the key space", ordered, "both modes");
    let params = CipherParams { p, q, mode: Mode::General, beta: 1.0 };
    Ok(Config { keyspace: Some(model), ..base_config(run, &params) })
}
