//! End-to-end acceptance criteria. Each test prints one PASS/FAIL line to the
//! real stdout (not the captured test output) and then asserts.

mod common;

use std::io::Write;
use std::time::Instant;

use common::{noise_image, op_cases, SEEDS};
use flowstyle::flow::{PfnConfig, PfnModel};
use flowstyle::grad::{check_gradients, grad_check, half_squared_norm, CheckOptions};
use flowstyle::harness::{leak_test, reverse_transfer};
use flowstyle::io::{decode_ppm, encode_ppm, Checkpoint, ImageFile};
use flowstyle::linalg::{matmul, sym_eig, Matrix};
use flowstyle::train::{
    evaluate_losses, objective_on_tape, rerandomize_couplings, synthetic_pairs, train, PairPool, TrainConfig,
    CONTROL_COUPLING_STD,
};
use flowstyle::transfer::{adain, adain_content_factor, channel_stats, cov_factor, wct, wct_content_factor, TransferKind};
use flowstyle::{seeded_rng, Tensor};
use rand::Rng;

fn report(n: u32, name: &str, pass: bool, detail: String, started: Instant) {
    let line = format!(
        "criterion {n} [{}] {name}: {detail} ({:.1}s)\n",
        if pass { "PASS" } else { "FAIL" },
        started.elapsed().as_secs_f64()
    );
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
    assert!(pass, "{line}");
}

/// `‖inverse(forward(x)) − x‖∞` over `count` seeded random models of the
/// given configurations, cycled.
fn worst_recon(configs: &[PfnConfig], count: u64, data_init_every: u64) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..count {
        let config = configs[i as usize % configs.len()];
        let mut rng = seeded_rng(1000 + i);
        let batch = rng.random_range(1..=2);
        let div = config.spatial_divisor();
        let side = div * rng.random_range((8 / div).max(1)..=(32 / div).max(2));
        let shape = [batch, config.in_channels, side, side];
        let x = if i % 2 == 0 {
            Tensor::randn(shape, 1.0, &mut rng)
        } else {
            Tensor::rand_uniform(shape, 0.0, 1.0, &mut rng)
        };
        let model = if data_init_every > 0 && i % data_init_every == 0 {
            let mut m = PfnModel::new(config, i).unwrap();
            m.initialize(&x).unwrap();
            m
        } else {
            PfnModel::randomized(config, i).unwrap()
        };
        let z = model.forward(&x).unwrap();
        assert_eq!(z.shape(), [batch, config.latent_channels(), side / div, side / div]);
        worst = worst.max(model.inverse(&z).unwrap().max_abs_diff(&x));
    }
    worst
}

#[test]
fn criterion_1_lossless_reversibility() {
    let t = Instant::now();
    let configs = [
        PfnConfig::new(1, 1, [3, 16, 16]).with_hidden(4),
        PfnConfig::new(2, 1, [3, 16, 16]).with_hidden(8),
        PfnConfig::new(2, 2, [3, 16, 16]).with_hidden(8),
        PfnConfig::new(4, 2, [3, 16, 16]).with_hidden(16),
        PfnConfig::new(3, 3, [1, 16, 16]).with_hidden(8),
    ];
    let worst = worst_recon(&configs, 100, 3);
    report(1, "lossless reversibility", worst < 1e-9, format!("100 models, max recon error {worst:e} (< 1e-9)"), t);
}

#[test]
fn criterion_2_adain_unbiased() {
    let t = Instant::now();
    let mut rng = seeded_rng(2);
    let (mut stats_err, mut content_err) = (0.0f64, 0.0f64);
    for _ in 0..1000 {
        let c = rng.random_range(1..=8);
        let fc_shape = [rng.random_range(1..=2), c, rng.random_range(2..=8), rng.random_range(2..=8)];
        let fs_shape = [rng.random_range(1..=2), c, rng.random_range(2..=8), rng.random_range(2..=8)];
        let (kc, oc) = (rng.random_range(0.1..5.0), rng.random_range(-3.0..3.0));
        let (ks, os) = (rng.random_range(0.1..5.0), rng.random_range(-3.0..3.0));
        let fc = Tensor::randn(fc_shape, kc, &mut rng).map(|v| v + oc);
        let fs = Tensor::randn(fs_shape, ks, &mut rng).map(|v| v + os);
        let out = adain(&fc, &fs).unwrap();
        stats_err = stats_err.max(channel_stats(&out).max_abs_diff(&channel_stats(&fs)));
        content_err = content_err.max(adain_content_factor(&out).max_abs_diff(&adain_content_factor(&fc)));
    }
    let pass = stats_err < 1e-9 && content_err < 1e-9;
    report(
        2,
        "AdaIN unbiased",
        pass,
        format!("1000 pairs, style stats error {stats_err:e}, content factor error {content_err:e} (< 1e-9)"),
        t,
    );
}

/// Seeded feature with covariance `Q diag(g²) Qᵀ`, gains in `[0.5, 2)`.
fn conditioned_feature(c: usize, h: usize, w: usize, rng: &mut impl Rng) -> Tensor {
    let gains: Vec<f64> = (0..c).map(|_| rng.random_range(0.5..2.0)).collect();
    let mix = matmul(&Matrix::random_orthogonal(c, rng), &Matrix::diag(&gains)).unwrap();
    let raw = Tensor::randn([1, c, h, w], 1.0, rng);
    let offset = rng.random_range(-2.0..2.0);
    mix_channels(&raw, &mix).map(|v| v + offset)
}

/// `m` applied to the channel vector at every position.
fn mix_channels(f: &Tensor, m: &Matrix) -> Tensor {
    let [_, c, h, w] = f.shape();
    let plane = h * w;
    let mut out = vec![0.0; f.numel()];
    for i in 0..c {
        for j in 0..c {
            let k = m.get(i, j);
            for p in 0..plane {
                out[i * plane + p] += k * f.data()[j * plane + p];
            }
        }
    }
    Tensor::from_vec(f.shape(), out).unwrap()
}

fn shift(f: &Tensor, delta: &[f64]) -> Tensor {
    let plane = f.plane();
    let data = f.data().iter().enumerate().map(|(i, v)| v + delta[i / plane]).collect();
    Tensor::from_vec(f.shape(), data).unwrap()
}

fn condition_number(f: &Tensor) -> f64 {
    let eig = sym_eig(&cov_factor(f).unwrap().cov).unwrap();
    let vals = &eig.values;
    vals.iter().cloned().fold(f64::MIN, f64::max) / vals.iter().cloned().fold(f64::MAX, f64::min)
}

#[test]
fn criterion_3_wct_unbiased() {
    let t = Instant::now();
    let mut rng = seeded_rng(3);
    let (mut cov_err, mut content_err, mut worst_cond) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..200 {
        let c = rng.random_range(2..=8);
        let (hc, wc) = (rng.random_range(6..=12), rng.random_range(6..=12));
        let (hs, ws) = (rng.random_range(6..=12), rng.random_range(6..=12));
        let fc = conditioned_feature(c, hc, wc, &mut rng);
        let fs = conditioned_feature(c, hs, ws, &mut rng);
        worst_cond = worst_cond.max(condition_number(&fc)).max(condition_number(&fs));
        let out = wct(&fc, &fs).unwrap();
        let (co, cs) = (cov_factor(&out).unwrap(), cov_factor(&fs).unwrap());
        cov_err = cov_err.max(co.cov.max_abs_diff(&cs.cov));
        // whiten the output in the style's basis
        let neg: Vec<f64> = cs.mean.iter().map(|m| -m).collect();
        let centered = shift(&out, &neg);
        let white = mix_channels(&centered, &cs.whitener.to_matrix());
        content_err = content_err.max(white.max_abs_diff(&wct_content_factor(&fc).unwrap()));
    }
    let pass = cov_err < 1e-6 && content_err < 1e-6 && worst_cond < 1e6;
    report(
        3,
        "WCT unbiased",
        pass,
        format!(
            "200 pairs (max condition number {worst_cond:.1}), covariance error {cov_err:e}, whitened content error {content_err:e} (< 1e-6)"
        ),
        t,
    );
}

/// Seeded models for the leak and reversal criteria: data-initialized fresh
/// models and fully randomized ones.
fn harness_models() -> Vec<(String, PfnModel)> {
    let mut models = Vec::new();
    for seed in 0..3 {
        let config = PfnConfig::new(2, 2, [3, 32, 32]).with_hidden(8);
        let mut fresh = PfnModel::new(config, seed).unwrap();
        let (c, s) = synthetic_pairs(2, 32, seed);
        fresh.initialize(&Tensor::stack(&[c, s].concat()).unwrap()).unwrap();
        models.push((format!("initialized/{seed}"), fresh));
        models.push((format!("random/{seed}"), PfnModel::randomized(config, seed + 10).unwrap()));
    }
    models
}

/// Content/style pairs at 32×32: uniform noise for every module, plus smooth
/// synthetic images for AdaIN.
fn harness_images(seed: u64) -> (Vec<(Tensor, Tensor)>, Vec<(Tensor, Tensor)>) {
    let noise = (noise_image(32, 100 + seed), noise_image(32, 200 + seed));
    let (c, s) = synthetic_pairs(1, 32, 300 + seed);
    let smooth = (c[0].clone(), s[0].clone());
    (vec![noise.clone(), smooth], vec![noise])
}

#[test]
fn criterion_4_content_leak() {
    let t = Instant::now();
    let (mut adain_drift, mut wct_drift) = (0.0f64, 0.0f64);
    let (mut control_failures, mut flat_random) = (Vec::new(), Vec::new());
    let mut runs = 0;
    for (i, (name, model)) in harness_models().iter().enumerate() {
        let (adain_pairs, wct_pairs) = harness_images(i as u64);
        for (c, s) in &adain_pairs {
            adain_drift = adain_drift.max(leak_test(model, TransferKind::Adain, c, s, 20).unwrap().max_drift());
            let ps = leak_test(model, TransferKind::patch_swap(), c, s, 20).unwrap();
            let grew = ps.drift[19] > ps.drift[1];
            let line = format!("{name}: drift2={:e} drift20={:e}", ps.drift[1], ps.drift[19]);
            // The control is asserted on data-initialized models only.
            if name.starts_with("initialized") {
                runs += 1;
                if !grew {
                    control_failures.push(line);
                }
            } else if !grew {
                flat_random.push(line);
            }
        }
        for (c, s) in &wct_pairs {
            wct_drift = wct_drift.max(leak_test(model, TransferKind::Wct, c, s, 20).unwrap().max_drift());
        }
    }
    let pass = adain_drift < 1e-4 && wct_drift < 1e-4 && control_failures.is_empty();
    report(
        4,
        "content leak eliminated",
        pass,
        format!(
            "20 rounds, max drift AdaIN {adain_drift:e}, WCT {wct_drift:e} (< 1e-4); PatchSwap drift grows on \
             {}/{runs} initialized runs {control_failures:?}; randomized-coupling runs without growth {flat_random:?}",
            runs - control_failures.len()
        ),
        t,
    );
}

#[test]
fn criterion_5_reverse_transfer() {
    let t = Instant::now();
    let (mut adain_err, mut wct_err) = (0.0f64, 0.0f64);
    for (i, (_, model)) in harness_models().iter().enumerate() {
        let (adain_pairs, wct_pairs) = harness_images(i as u64);
        for (c, s) in &adain_pairs {
            let (_, rec) = reverse_transfer(model, TransferKind::Adain, c, s).unwrap();
            adain_err = adain_err.max(rec.max_abs_diff(c));
        }
        for (c, s) in &wct_pairs {
            let (_, rec) = reverse_transfer(model, TransferKind::Wct, c, s).unwrap();
            wct_err = wct_err.max(rec.max_abs_diff(c));
        }
    }
    let pass = adain_err < 1e-6 && wct_err < 1e-4;
    report(
        5,
        "reverse style transfer",
        pass,
        format!("recovery error AdaIN {adain_err:e} (< 1e-6), WCT {wct_err:e} (< 1e-4)"),
        t,
    );
}

#[test]
fn criterion_6_gradients() {
    let t = Instant::now();
    let mut failures = Vec::new();
    let mut worst = 0.0f64;
    let cases = op_cases();
    for case in &cases {
        for seed in 0..SEEDS {
            match case.check(seed) {
                Ok(r) => {
                    worst = worst.max(r.max_rel_error());
                    if !r.passed() {
                        failures.push(format!("{} seed {seed}", case.name));
                    }
                }
                Err(e) => failures.push(format!("{} seed {seed}: {e}", case.name)),
            }
        }
    }
    let config = PfnConfig::new(2, 1, [3, 8, 8]).with_hidden(4);
    let cfg = TrainConfig { crop: 8, ..Default::default() };
    let net = cfg.lossnet(3);
    let (mut kinks, mut objective_entries) = (0, 0);
    for seed in 0..SEEDS {
        let model = PfnModel::randomized(config, seed).unwrap();
        let x = Tensor::randn([1, 3, 8, 8], 1.0, &mut seeded_rng(seed + 40));
        let opts = CheckOptions { max_entries: Some(12), ..Default::default() };
        let latent = grad_check(&model, &half_squared_norm, &x, &opts).unwrap();
        let (c, s) = synthetic_pairs(2, 8, seed);
        let (c, s) = (Tensor::stack(&c).unwrap(), Tensor::stack(&s).unwrap());
        let params: Vec<Tensor> = model.params().into_iter().cloned().collect();
        let objective = check_gradients(
            &params,
            |tape, v| Ok(objective_on_tape(tape, &model, v, &net, &c, &s, &cfg)?.total),
            &CheckOptions { max_entries: Some(4), kink_retry: true, ..Default::default() },
        )
        .unwrap();
        kinks += objective.kinks();
        objective_entries += objective.checked();
        for (what, r) in [("2-flow model latent", latent), ("2-flow model objective", objective)] {
            worst = worst.max(r.max_rel_error());
            if !r.passed() {
                failures.push(format!("{what} seed {seed}"));
            }
        }
    }
    report(
        6,
        "gradient correctness",
        failures.is_empty() && kinks * 20 <= objective_entries,
        format!(
            "{} ops and a 2-flow model x {SEEDS} seeds, max relative error {worst:e} (< 1e-4), \
             ReLU kinks re-measured {kinks}/{objective_entries} objective entries, failures {failures:?}",
            cases.len()
        ),
        t,
    );
}

#[test]
fn criterion_7_training_sanity() {
    let t = Instant::now();
    let config = PfnConfig::new(2, 2, [3, 16, 16]).with_hidden(8);
    let (contents, styles) = synthetic_pairs(4, 16, 7);
    let cfg = TrainConfig { iterations: 2000, batch_size: 2, crop: 16, seed: 7, ..Default::default() };
    let pool = || PairPool::new(contents.clone(), styles.clone(), cfg.seed).unwrap();
    let out = train(PfnModel::new(config, cfg.seed).unwrap(), &cfg, &mut pool()).unwrap();
    let (first, last) = (out.log[0].total, out.log[out.log.len() - 1].total);
    let worst_recon = out.log.iter().map(|r| r.recon_error).fold(0.0, f64::max);

    let init = train(
        PfnModel::new(config, cfg.seed).unwrap(),
        &TrainConfig { iterations: 0, ..cfg.clone() },
        &mut pool(),
    )
    .unwrap()
    .checkpoint
    .model;
    let net = cfg.lossnet(3);
    let (c, s) = (Tensor::stack(&contents).unwrap(), Tensor::stack(&styles).unwrap());
    let zero_lc = evaluate_losses(&init, &net, &c, &s).unwrap().0;
    let controls: Vec<f64> = (0..5)
        .map(|k| evaluate_losses(&rerandomize_couplings(&init, CONTROL_COUPLING_STD, 50 + k), &net, &c, &s).unwrap().0)
        .collect();
    let min_control = controls.iter().cloned().fold(f64::INFINITY, f64::min);

    let pass = out.log.len() == 2000 && last < first && worst_recon < 1e-9 && zero_lc < min_control;
    report(
        7,
        "desk-scale training",
        pass,
        format!(
            "2000 steps on 4 pairs, total loss {first:e} -> {last:e}, max recon error {worst_recon:e} (< 1e-9), \
             initial content loss {zero_lc:e} < min of 5 controls {min_control:e}"
        ),
        t,
    );
}

#[test]
fn criterion_8_architectures() {
    let t = Instant::now();
    let mut details = Vec::new();
    let mut pass = true;
    for (name, latent_c, div) in [
        ("Flow8-Block2", 48, 4),
        ("Flow8-Block1", 12, 2),
        ("Flow16-Block1", 12, 2),
        ("Flow4-Block4", 768, 16),
    ] {
        let arch: flowstyle::flow::ArchName = name.parse().unwrap();
        let config = PfnConfig::new(arch.n_flows, arch.n_blocks, [3, 32, 32]);
        let model = PfnModel::randomized(config, 0).unwrap();
        let shape_ok = config.name() == name
            && config.latent_shape(1) == [1, latent_c, 32 / div, 32 / div]
            && model.forward(&noise_image(32, 8)).unwrap().shape() == [1, latent_c, 32 / div, 32 / div];
        let worst = worst_recon(&[config], 100, 4);
        pass &= shape_ok && worst < 1e-9;
        details.push(format!("{name} latent {latent_c}x{0}x{0} ok={shape_ok} recon {worst:e}", 32 / div));
    }
    report(8, "architecture variants", pass, details.join("; "), t);
}

#[test]
fn criterion_9_bit_exact_io() {
    let t = Instant::now();
    let mut checked = 0;
    let mut failures = Vec::new();
    let dir = tempfile::tempdir().unwrap();

    let config = PfnConfig::new(2, 2, [3, 16, 16]).with_hidden(4);
    let mut models = vec![PfnModel::new(config, 1).unwrap(), PfnModel::randomized(config, 2).unwrap()];
    let mut init = PfnModel::new(config, 3).unwrap();
    init.initialize(&noise_image(16, 3)).unwrap();
    models.push(init);
    models.push(PfnModel::randomized(PfnConfig::new(1, 3, [1, 8, 8]).with_hidden(2), 4).unwrap());
    for (i, model) in models.iter().enumerate() {
        let bytes = Checkpoint::new(model.clone()).to_bytes();
        let back = Checkpoint::from_bytes(&bytes).unwrap();
        let path = dir.path().join(format!("m{i}.pfn"));
        back.save(&path).unwrap();
        let ok = back.model == *model
            && back.to_bytes() == bytes
            && std::fs::read(&path).unwrap() == bytes
            && Checkpoint::load(&path).unwrap().model == *model;
        if !ok {
            failures.push(format!("checkpoint {i}"));
        }
        checked += 1;
    }

    let mut rng = seeded_rng(9);
    let headers = ["P6\n4 3\n255\n", "P6 4 3 255\n", "P6\n# comment\n4  3\n# another\n255\n", "P6\t4\r\n3 255 "];
    for (i, header) in headers.iter().enumerate() {
        let mut file = header.as_bytes().to_vec();
        file.extend((0..36).map(|_| rng.random::<u8>()));
        let img = decode_ppm(&file).unwrap();
        let values_ok = img.pixels.data().iter().all(|v| (v * 255.0).round() / 255.0 == *v);
        let path = dir.path().join(format!("p{i}.ppm"));
        img.write(&path).unwrap();
        let ok = img.to_bytes().unwrap() == file
            && std::fs::read(&path).unwrap() == file
            && ImageFile::read(&path).unwrap() == img
            && values_ok;
        if !ok {
            failures.push(format!("ppm header {header:?}"));
        }
        checked += 1;
    }
    for i in 0..20 {
        let side = rng.random_range(1..=12);
        let img = Tensor::rand_uniform([1, 3, side, side + i % 3], -0.2, 1.2, &mut rng);
        let bytes = encode_ppm(&img).unwrap();
        if encode_ppm(&decode_ppm(&bytes).unwrap().pixels).unwrap() != bytes {
            failures.push(format!("ppm encode {i}"));
        }
        checked += 1;
    }
    report(
        9,
        "bit-exact I/O",
        failures.is_empty(),
        format!("{checked} checkpoint and PPM round trips byte-identical, failures {failures:?}"),
        t,
    );
}
