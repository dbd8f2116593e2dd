//! Command-line driver.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::flow::{ArchName, PfnConfig, PfnModel, DEFAULT_HIDDEN};
use crate::harness::{
    ablation_configs, ablation_run, content_factor_image, leak_test, reverse_transfer, stylize, EvalSet,
    DEFAULT_LEAK_ROUNDS,
};
use crate::io::{load_checkpoint, read_image, write_image, KeyValues};
use crate::tensor::Tensor;
use crate::train::{synthetic_pairs, train_with, PairPool, PairSource, SyntheticPairs, TrainConfig};
use crate::transfer::TransferKind;
use crate::verify::run_invariants;

#[derive(Parser, Debug)]
#[command(name = "flowstyle", version, about = "Lossless style transfer with a reversible flow network")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct TransferArgs {
    /// adain, wct or patchswap
    #[arg(long, default_value = "adain")]
    transfer: TransferKind,
    /// Patch side for patchswap
    #[arg(long, default_value_t = 3)]
    patch_size: usize,
    /// Patch stride for patchswap
    #[arg(long, default_value_t = 1)]
    patch_stride: usize,
}

impl TransferArgs {
    fn kind(&self) -> TransferKind {
        match self.transfer {
            TransferKind::PatchSwap { .. } => TransferKind::PatchSwap {
                patch_size: self.patch_size,
                stride: self.patch_stride,
            },
            k => k,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Stylize a content image with a style image
    Stylize {
        #[arg(long)]
        content: PathBuf,
        #[arg(long)]
        style: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        transfer: TransferArgs,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long)]
        out: PathBuf,
        /// Center-crop inputs to the nearest admissible size
        #[arg(long)]
        center_crop: bool,
    },
    /// Train a model from a key=value config file
    Train {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Stylize repeatedly and report drift from the first round
    LeakTest {
        #[arg(long)]
        content: PathBuf,
        #[arg(long)]
        style: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        transfer: TransferArgs,
        #[arg(long, default_value_t = DEFAULT_LEAK_ROUNDS)]
        rounds: usize,
        /// Also write the last round's image
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        center_crop: bool,
    },
    /// Stylize, then recover the content by restyling with it
    Reverse {
        #[arg(long)]
        content: PathBuf,
        #[arg(long)]
        style: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        transfer: TransferArgs,
        #[arg(long)]
        out_stylized: PathBuf,
        #[arg(long)]
        out_recovered: PathBuf,
        #[arg(long)]
        center_crop: bool,
    },
    /// Render the content factor of an image with a neutral style
    Factor {
        #[arg(long)]
        content: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        transfer: TransferArgs,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        center_crop: bool,
    },
    /// Run the invariant suite
    Verify {
        /// Checkpoint to verify; a fresh seeded model otherwise
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Architecture of the fresh model
        #[arg(long, default_value = "Flow8-Block2")]
        arch: ArchName,
        #[arg(long, default_value_t = DEFAULT_HIDDEN)]
        hidden: usize,
    },
    /// Train and score the four named architectures
    Ablate {
        #[arg(long, default_value_t = 20)]
        iterations: usize,
        #[arg(long, default_value_t = 16)]
        size: usize,
        #[arg(long, default_value_t = 2)]
        pairs: usize,
        #[arg(long, default_value_t = 8)]
        hidden: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// Largest centered crop whose extents are divisible by `d`.
fn fit(img: Tensor, d: usize, center_crop: bool) -> Result<Tensor> {
    if !center_crop {
        return Ok(img);
    }
    let (h, w) = (img.height() / d * d, img.width() / d * d);
    if h == 0 || w == 0 {
        return Err(Error::Invalid(format!("image smaller than {d} pixels cannot be cropped to fit")));
    }
    img.center_crop(h, w)
}

fn load_image(path: &Path, model: &PfnModel, center_crop: bool) -> Result<Tensor> {
    let img = read_image(path).map_err(|e| context(e, path))?;
    fit(img, model.config().spatial_divisor(), center_crop)
}

fn load_model(path: &Path) -> Result<PfnModel> {
    load_checkpoint(path).map_err(|e| context(e, path))
}

fn context(e: Error, path: &Path) -> Error {
    match e {
        Error::Io(m) => Error::Io(format!("{}: {m}", path.display())),
        other => other,
    }
}

const TRAIN_KEYS: &[&str] = &[
    "iterations",
    "batch_size",
    "lr",
    "lr_decay",
    "lambda_c",
    "lambda_s",
    "seed",
    "crop",
    "checkpoint_every",
    "arch",
    "hidden",
    "channels",
    "pairs",
    "content",
    "style",
];

fn paths(list: &str) -> Vec<PathBuf> {
    list.split(',').map(str::trim).filter(|s| !s.is_empty()).map(PathBuf::from).collect()
}

fn run_train(config: &Path, out: &Path, stdout: &mut dyn Write) -> Result<()> {
    let text = fs::read_to_string(config).map_err(|e| context(e.into(), config))?;
    let kv = KeyValues::parse(&text)?;
    kv.reject_unknown(TRAIN_KEYS)?;
    let d = TrainConfig::default();
    let cfg = TrainConfig {
        iterations: kv.get_or("iterations", d.iterations)?,
        batch_size: kv.get_or("batch_size", d.batch_size)?,
        lr: kv.get_or("lr", d.lr)?,
        lr_decay: kv.get_or("lr_decay", d.lr_decay)?,
        lambda_c: kv.get_or("lambda_c", d.lambda_c)?,
        lambda_s: kv.get_or("lambda_s", d.lambda_s)?,
        seed: kv.get_or("seed", d.seed)?,
        crop: kv.get_or("crop", d.crop)?,
        checkpoint_every: kv.get_or("checkpoint_every", d.checkpoint_every)?,
        checkpoint_path: Some(out.to_path_buf()),
    };
    let arch: ArchName = kv.get_or("arch", "Flow8-Block2".parse()?)?;
    let hidden = kv.get_or("hidden", DEFAULT_HIDDEN)?;
    let channels = kv.get_or("channels", 3usize)?;
    let config = PfnConfig::new(arch.n_flows, arch.n_blocks, [channels, cfg.crop, cfg.crop]).with_hidden(hidden);
    let model = PfnModel::new(config, cfg.seed)?;

    let mut source: Box<dyn PairSource> = match (kv.get_str("content"), kv.get_str("style")) {
        (Some(c), Some(s)) => {
            let load = |list: &str| -> Result<Vec<Tensor>> { paths(list).iter().map(|p| read_image(p).map_err(|e| context(e, p))).collect() };
            Box::new(PairPool::new(load(c)?, load(s)?, cfg.seed)?)
        }
        (None, None) => match kv.get_or("pairs", 0usize)? {
            0 => Box::new(SyntheticPairs::new(cfg.seed)),
            n => {
                let (c, s) = synthetic_pairs(n, cfg.crop, cfg.seed);
                Box::new(PairPool::new(c, s, cfg.seed)?)
            }
        },
        _ => return Err(Error::Invalid("content and style image lists must be given together".into())),
    };
    let outcome = train_with(model, &cfg, source.as_mut(), |r, _| {
        writeln!(stdout, "{}", r.log_line())?;
        Ok(())
    })?;
    outcome.checkpoint.save(out)?;
    Ok(())
}

fn dispatch(cli: Cli, stdout: &mut dyn Write) -> Result<bool> {
    match cli.command {
        Command::Stylize { content, style, model, transfer, alpha, out, center_crop } => {
            let m = load_model(&model)?;
            let c = load_image(&content, &m, center_crop)?;
            let s = load_image(&style, &m, center_crop)?;
            let img = stylize(&m, transfer.kind(), &c, &s, alpha)?;
            write_image(&out, &img)?;
            writeln!(stdout, "wrote {} ({}x{}, {}, alpha={alpha})", out.display(), img.width(), img.height(), transfer.kind())?;
        }
        Command::Train { config, out } => run_train(&config, &out, stdout)?,
        Command::LeakTest { content, style, model, transfer, rounds, out, center_crop } => {
            let m = load_model(&model)?;
            let c = load_image(&content, &m, center_crop)?;
            let s = load_image(&style, &m, center_crop)?;
            let report = leak_test(&m, transfer.kind(), &c, &s, rounds)?;
            write!(stdout, "{report}")?;
            if let Some(out) = out {
                write_image(&out, &report.last)?;
            }
        }
        Command::Reverse { content, style, model, transfer, out_stylized, out_recovered, center_crop } => {
            let m = load_model(&model)?;
            let c = load_image(&content, &m, center_crop)?;
            let s = load_image(&style, &m, center_crop)?;
            let (stylized, recovered) = reverse_transfer(&m, transfer.kind(), &c, &s)?;
            write_image(&out_stylized, &stylized)?;
            write_image(&out_recovered, &recovered)?;
            writeln!(stdout, "recovery_error={:.16e}", recovered.max_abs_diff(&c))?;
        }
        Command::Factor { content, model, transfer, out, center_crop } => {
            let m = load_model(&model)?;
            let c = load_image(&content, &m, center_crop)?;
            let img = content_factor_image(&m, transfer.kind(), &c)?;
            write_image(&out, &img)?;
            writeln!(stdout, "wrote {}", out.display())?;
        }
        Command::Verify { model, seed, arch, hidden } => {
            let m = match model {
                Some(p) => load_model(&p)?,
                None => {
                    let config = PfnConfig::new(arch.n_flows, arch.n_blocks, [3, 32, 32]).with_hidden(hidden);
                    let mut m = PfnModel::new(config, seed)?;
                    let d = config.spatial_divisor().max(8);
                    let (c, s) = synthetic_pairs(2, 4 * d, seed);
                    m.initialize(&Tensor::stack(&[c, s].concat())?)?;
                    m
                }
            };
            writeln!(stdout, "# verifying {} hidden={} seed={seed}", m.config().name(), m.config().hidden)?;
            let report = run_invariants(&m, seed);
            writeln!(stdout, "{report}")?;
            return Ok(report.passed());
        }
        Command::Ablate { iterations, size, pairs, hidden, seed } => {
            let (contents, styles) = synthetic_pairs(pairs, size, seed);
            let cfg = TrainConfig { iterations, crop: size, seed, batch_size: pairs.clamp(1, 2), ..Default::default() };
            let table = ablation_run(&ablation_configs([3, size, size], hidden), &EvalSet { contents, styles }, &cfg)?;
            write!(stdout, "{table}")?;
        }
    }
    Ok(true)
}

/// Runs the command line `args` (program name first). Returns the process
/// exit code: 0 on success, 1 on runtime failure, 2 on usage errors.
pub fn cli_main<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                2
            } else {
                let _ = write!(stdout, "{text}");
                0
            };
        }
    };
    match dispatch(cli, stdout) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            1
        }
    }
}
