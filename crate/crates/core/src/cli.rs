//! Command-line front end.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::channel::{pack_pdus, transmit, transmitted_counts, ClassLink, MonteCarloSummary, OutcomeReport};
use crate::codec::{self, CodecConfig, TokenBitstream};
use crate::error::{Error, Result};
use crate::link::{optimize, AdaptationPlan, BlerTable, ClassCounts, LinkProfile, Weights};
use crate::report::{self, FixtureSpec, SweepSpec};
use crate::token::{intended_ratio, pool_pixel_masks, GridGeometry, PixelMaskSequence, SemanticTokenMask, TokenGrid};

#[derive(Debug, Parser)]
#[command(name = "tokencom", version, about = "Intent-aware token coding and link adaptation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a seeded synthetic grid (.tg), pixel mask (.pm) and token mask (.tm).
    GenFixtures(GenFixturesArgs),
    /// Pool a pixel mask sequence onto the token grid.
    PoolMask(PoolMaskArgs),
    /// Encode a token grid under a token mask.
    Encode(EncodeArgs),
    /// Decode a bitstream back to a token grid.
    Decode(DecodeArgs),
    /// Select bit precision and MCS per class.
    Optimize(OptimizeArgs),
    /// Send a bitstream through the PDU erasure channel.
    Simulate(SimulateArgs),
    /// Run optimize, encode and simulate over an SNR/bandwidth grid.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
struct GenFixturesArgs {
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 64000)]
    codebook: u32,
    #[arg(long, default_value_t = 8)]
    frames: u32,
    #[arg(long, default_value_t = 64)]
    height: u32,
    #[arg(long, default_value_t = 64)]
    width: u32,
    #[arg(long, default_value_t = 2)]
    dt: u16,
    #[arg(long, default_value_t = 8)]
    ds: u16,
    #[arg(long, default_value_t = 2000)]
    spread: u32,
    #[arg(long, default_value_t = 0.5)]
    theta: f64,
}

#[derive(Debug, Args)]
struct PoolMaskArgs {
    /// Pixel mask sequence (.pm).
    #[arg(long)]
    input: PathBuf,
    /// Token mask to write (.tm).
    #[arg(long)]
    out: PathBuf,
    /// Take the pooling geometry from this token grid.
    #[arg(long, conflicts_with_all = ["dt", "ds"])]
    grid: Option<PathBuf>,
    #[arg(long, required_unless_present = "grid")]
    dt: Option<u16>,
    #[arg(long, required_unless_present = "grid")]
    ds: Option<u16>,
    #[arg(long, default_value_t = 0.5)]
    theta: f64,
}

#[derive(Debug, Args)]
struct EncodeArgs {
    #[arg(long)]
    grid: PathBuf,
    #[arg(long)]
    mask: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Non-intended precision; defaults to b_full.
    #[arg(long)]
    bdelta: Option<u32>,
    /// Full precision; must equal ceil(log2 N) when given.
    #[arg(long)]
    bfull: Option<u32>,
}

#[derive(Debug, Args)]
struct DecodeArgs {
    #[arg(long)]
    stream: PathBuf,
    #[arg(long)]
    mask: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct LinkArgs {
    /// Link profile (JSON); omitted fields take defaults.
    #[arg(long)]
    profile: Option<PathBuf>,
    /// BLER table (JSON) overriding the profile's.
    #[arg(long)]
    bler_table: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    snr: Option<f64>,
    /// Bandwidth in Hz.
    #[arg(long)]
    bw: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    wd: Option<f64>,
    #[arg(long)]
    wt: Option<f64>,
}

#[derive(Debug, Args)]
struct OptimizeArgs {
    #[command(flatten)]
    link: LinkArgs,
    /// Class counts as INTENDED,NON_INTENDED.
    #[arg(long, value_delimiter = ',', conflicts_with = "mask", required_unless_present = "mask")]
    counts: Option<Vec<u64>>,
    /// Token mask whose transmitted counts are used.
    #[arg(long)]
    mask: Option<PathBuf>,
    /// Write the plan as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long)]
    stream: PathBuf,
    #[arg(long)]
    mask: PathBuf,
    #[command(flatten)]
    link: LinkArgs,
    /// Use this plan instead of optimizing at the stream's precision.
    #[arg(long)]
    plan: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    trials: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long)]
    grid: PathBuf,
    #[arg(long)]
    mask: PathBuf,
    /// Sweep spec (JSON); flags below override its fields.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long)]
    profile: Option<PathBuf>,
    #[arg(long)]
    bler_table: Option<PathBuf>,
    /// SNR points in dB, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    snr: Option<Vec<f64>>,
    /// Bandwidth points in Hz, comma separated.
    #[arg(long, value_delimiter = ',')]
    bw: Option<Vec<f64>>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    wd: Option<f64>,
    #[arg(long)]
    wt: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::GenFixtures(a) => gen_fixtures(a),
        Command::PoolMask(a) => pool_mask(a),
        Command::Encode(a) => encode(a),
        Command::Decode(a) => decode(a),
        Command::Optimize(a) => cmd_optimize(a),
        Command::Simulate(a) => simulate(a),
        Command::Sweep(a) => sweep(a),
    }
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn gen_fixtures(a: GenFixturesArgs) -> Result<()> {
    let geometry = GridGeometry::new(a.codebook, a.frames, a.height, a.width, a.dt, a.ds)?;
    let spec = FixtureSpec {
        spread: a.spread,
        ..FixtureSpec::new(geometry, a.seed)
    };
    let fixture = report::generate_fixture(&spec)?;
    let mask = pool_pixel_masks(&fixture.pixel_mask, &geometry, a.theta)?;
    fs::create_dir_all(&a.out_dir)?;
    let paths = [
        a.out_dir.join("grid.tg"),
        a.out_dir.join("mask.pm"),
        a.out_dir.join("mask.tm"),
    ];
    fixture.grid.save(&paths[0])?;
    fixture.pixel_mask.save(&paths[1])?;
    mask.save(&paths[2])?;
    for p in &paths {
        println!("wrote {}", p.display());
    }
    println!("rho_s: {:.6}", intended_ratio(&mask));
    Ok(())
}

fn pool_mask(a: PoolMaskArgs) -> Result<()> {
    let pixels = PixelMaskSequence::load(&a.input)?;
    let geometry = match &a.grid {
        Some(path) => *TokenGrid::load(path)?.geometry(),
        None => GridGeometry::new(
            2,
            pixels.frames(),
            pixels.height(),
            pixels.width(),
            a.dt.expect("required by clap"),
            a.ds.expect("required by clap"),
        )?,
    };
    let mask = pool_pixel_masks(&pixels, &geometry, a.theta)?;
    mask.save(&a.out)?;
    let d = mask.dims();
    println!("token grid: {}x{}x{}", d.t, d.h, d.w);
    println!("intended tokens: {}", mask.intended_count());
    println!("rho_s: {:.6}", intended_ratio(&mask));
    Ok(())
}

fn encode(a: EncodeArgs) -> Result<()> {
    let grid = TokenGrid::load(&a.grid)?;
    let mask = SemanticTokenMask::load(&a.mask)?;
    let n = grid.geometry().codebook_size;
    let full = grid.geometry().full_bits();
    let cfg = CodecConfig::with_full_bits(n, a.bfull.unwrap_or(full), a.bdelta.unwrap_or(full))?;
    let stream = codec::encode(&grid, &mask, &cfg)?;
    stream.save(&a.out)?;
    println!("b_full: {}", cfg.full_bits());
    println!("b_delta: {}", cfg.delta_bits());
    println!("rho_s: {:.6}", intended_ratio(&mask));
    println!("payload_bits: {}", codec::payload_bits(&mask, &cfg));
    println!("token_bits: {}", stream.token_bits());
    println!("bpp: {:.6}", codec::bpp(&mask, &cfg, grid.geometry()));
    Ok(())
}

fn decode(a: DecodeArgs) -> Result<()> {
    let stream = TokenBitstream::load(&a.stream)?;
    let mask = SemanticTokenMask::load(&a.mask)?;
    let grid = codec::decode(&stream, &mask)?;
    grid.save(&a.out)?;
    let d = grid.dims();
    println!("decoded {}x{}x{} tokens", d.t, d.h, d.w);
    Ok(())
}

fn resolve_weights(base: Weights, wd: Option<f64>, wt: Option<f64>) -> Weights {
    match (wd, wt) {
        (Some(d), Some(t)) => Weights {
            distortion: d,
            delay: t,
        },
        (Some(d), None) => Weights {
            distortion: d,
            delay: 1.0 - d,
        },
        (None, Some(t)) => Weights {
            distortion: 1.0 - t,
            delay: t,
        },
        (None, None) => base,
    }
}

fn load_profile(path: Option<&Path>) -> Result<LinkProfile> {
    match path {
        Some(p) => LinkProfile::load(p),
        None => Ok(LinkProfile::default()),
    }
}

fn load_table(profile: &LinkProfile, flag: Option<&Path>) -> Result<BlerTable> {
    match flag.map(Path::to_path_buf).or_else(|| profile.bler_table.as_ref().map(PathBuf::from)) {
        Some(p) => BlerTable::load(p),
        None => Ok(BlerTable::default_table()),
    }
}

impl LinkArgs {
    fn resolve(&self) -> Result<(LinkProfile, BlerTable)> {
        let mut profile = load_profile(self.profile.as_deref())?;
        if let Some(v) = self.snr {
            profile.snr_db = v;
        }
        if let Some(v) = self.bw {
            profile.bandwidth_hz = v;
        }
        if let Some(v) = self.eta {
            profile.resource_fraction = v;
        }
        profile.weights = resolve_weights(profile.weights, self.wd, self.wt);
        profile.validate()?;
        let table = load_table(&profile, self.bler_table.as_deref())?;
        Ok((profile, table))
    }
}

fn print_plan(profile: &LinkProfile, plan: &AdaptationPlan) {
    println!("snr_db: {}", profile.snr_db);
    println!("bandwidth_hz: {}", profile.bandwidth_hz);
    println!("budget: {:.6}", plan.budget);
    println!("counts: {} intended, {} non-intended", plan.counts.intended, plan.counts.non_intended);
    for (label, c) in [("intended", &plan.intended), ("non_intended", &plan.non_intended)] {
        println!(
            "{label}: {} rate {} bits {} g {:.4} bler {:.6}",
            c.mcs.name, c.mcs.code_rate, c.bits, c.spectral_efficiency, c.bler
        );
    }
    println!("total_distortion: {:.6}", plan.total_distortion);
    println!("total_delay_s: {:.9}", plan.total_delay_s);
    println!("objective: {:.6}", plan.objective);
    println!("utilization: {:.6}", plan.utilization());
}

fn cmd_optimize(a: OptimizeArgs) -> Result<()> {
    let (profile, table) = a.link.resolve()?;
    let counts = match (&a.counts, &a.mask) {
        (Some(c), _) => match c[..] {
            [s, n] => ClassCounts::new(s, n),
            _ => return Err(Error::InvalidParameter("--counts takes INTENDED,NON_INTENDED".into())),
        },
        (None, Some(path)) => transmitted_counts(&SemanticTokenMask::load(path)?),
        (None, None) => unreachable!("clap requires counts or mask"),
    };
    let plan = optimize(&profile, &table, counts)?;
    print_plan(&profile, &plan);
    if let Some(out) = &a.out {
        write_json(out, &plan)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct SimulationReport<'a> {
    seed: u64,
    trials: u64,
    profile: &'a LinkProfile,
    plan: &'a AdaptationPlan,
    first_trial: OutcomeReport,
    summary: MonteCarloSummary,
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let stream = TokenBitstream::load(&a.stream)?;
    let mask = SemanticTokenMask::load(&a.mask)?;
    let (mut profile, table) = a.link.resolve()?;
    profile.codebook_size = stream.config().codebook_size();
    profile.non_intended_bits = vec![stream.config().delta_bits()];
    let plan = match &a.plan {
        Some(path) => serde_json::from_str::<AdaptationPlan>(&fs::read_to_string(path)?)?,
        None => report::optimize_for_mask(&profile, &table, &mask)?,
    };
    let summary = report::simulate(&plan, &profile, &stream, &mask, a.trials, a.seed)?;
    let plans = pack_pdus(&stream, &mask, &profile.pdu)?;
    let first = transmit(&stream, &plans, &ClassLink::from_plan(&plan, profile.bandwidth_hz), a.seed)?;

    print_plan(&profile, &plan);
    println!("trials: {}", summary.trials);
    println!("seed: {}", summary.base_seed);
    for (label, s) in [("intended", &summary.intended), ("non_intended", &summary.non_intended)] {
        println!(
            "{label}: pdus {} loss_fraction {:.6} mean_erased {:.3} mean_errors {:.3}",
            s.pdus, s.loss_fraction, s.mean_tokens_erased, s.mean_token_errors
        );
    }
    println!("reference_loss_rate: {:.6}", summary.reference_loss_rate);
    println!("delay_s: {:.9}", summary.mean_delay_s);
    if let Some(out) = &a.out {
        write_json(
            out,
            &SimulationReport {
                seed: a.seed,
                trials: a.trials,
                profile: &profile,
                plan: &plan,
                first_trial: first.report(),
                summary,
            },
        )?;
    }
    Ok(())
}

fn sweep(a: SweepArgs) -> Result<()> {
    let grid = TokenGrid::load(&a.grid)?;
    let mask = SemanticTokenMask::load(&a.mask)?;
    let mut spec = match &a.spec {
        Some(p) => SweepSpec::load(p)?,
        None => SweepSpec::default(),
    };
    if let Some(p) = &a.profile {
        spec.profile = LinkProfile::load(p)?;
    }
    if let Some(v) = a.snr {
        spec.snr_db = v;
    }
    if let Some(v) = a.bw {
        spec.bandwidth_hz = v;
    }
    if let Some(v) = a.eta {
        spec.profile.resource_fraction = v;
    }
    spec.profile.weights = resolve_weights(spec.profile.weights, a.wd, a.wt);
    if let Some(v) = a.seed {
        spec.base_seed = v;
    }
    if let Some(v) = a.trials {
        spec.trials = v;
    }
    if let Some(p) = &a.bler_table {
        spec.profile.bler_table = Some(p.display().to_string());
    }
    spec.validate()?;
    let table = load_table(&spec.profile, None)?;
    let run = report::sweep(&spec, &table, &grid, &mask)?;
    fs::write(&a.out, run.to_json())?;

    println!("snr_db bandwidth_hz intended non_intended objective distortion");
    for p in &run.points {
        match &p.plan {
            Some(plan) => println!(
                "{} {} {} {} {:.6} {:.6}",
                p.snr_db,
                p.bandwidth_hz,
                plan.intended.name(),
                plan.non_intended.name(),
                plan.objective,
                plan.total_distortion
            ),
            None => println!("{} {} infeasible", p.snr_db, p.bandwidth_hz),
        }
    }
    println!("wrote {}", a.out.display());
    Ok(())
}
