//! Command-line front end. [`run`] parses, validates, and dispatches one
//! subcommand, returning the process exit code.

use std::ffi::OsString;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};

use wavefuse::bitstream::SpihtBitstream;
use wavefuse::fusion::{fuse, FusionRule};
use wavefuse::metrics::{coder_name, write_report, MetricsReport, ReportRow};
use wavefuse::pixelio::{crop_to_common, load_pgm, save_pgm};
use wavefuse::remspiht::{decode_auto, encode_remspiht, MaskSource, RemspihtConfig, Retained};
use wavefuse::spiht::{encode_traced, Budget, SpihtOptions};
use wavefuse::wavelet::{dwt2, idwt2, TransformMode};
use wavefuse::weighting::{
    entropy_times_nonzero, label_image, segment, write_cluster_stats, CrossbandPolicy,
    SegmentConfig,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FAILURE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "wavefuse", version, about = "Wavelet image fusion and embedded coding")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fuse two registered grayscale images in the wavelet domain
    Fuse(FuseArgs),
    /// Encode a PGM image into an RMS1 stream
    Encode(EncodeArgs),
    /// Decode an RMS1 stream into a PGM image
    Decode(DecodeArgs),
    /// Cluster wavelet trees by texture and report per-cluster statistics
    Segment(SegmentArgs),
    /// Compare an original and a decoded image and write a one-row CSV report
    Metrics(MetricsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Rule {
    Avg,
    Max,
    Min,
    Pca,
}

impl From<Rule> for FusionRule {
    fn from(r: Rule) -> Self {
        match r {
            Rule::Avg => FusionRule::Averaging,
            Rule::Max => FusionRule::Maximum,
            Rule::Min => FusionRule::Minimum,
            Rule::Pca => FusionRule::Pca,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// Reversible integer lifting
    Integer,
    /// Orthonormal floating point
    Float,
}

impl From<Mode> for TransformMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Integer => TransformMode::IntegerLifting,
            Mode::Float => TransformMode::OrthonormalFloat,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Coder {
    Spiht,
    Remspiht,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MaskCase {
    /// Cross-band threshold on the LL maximum
    Case1,
    /// Texture clustering with entropy ranking
    Case2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Policy {
    All,
    Any,
}

#[derive(Debug, Args)]
pub struct FuseArgs {
    #[arg(long, value_enum, default_value = "max")]
    pub rule: Rule,
    #[arg(long, default_value_t = 3)]
    pub levels: u8,
    #[arg(long, value_enum, default_value = "integer")]
    pub mode: Mode,
    pub first: PathBuf,
    pub second: PathBuf,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    #[arg(long, value_enum, default_value = "spiht")]
    pub coder: Coder,
    /// Total stream size limit in bits, header included [default: unbounded]
    #[arg(long)]
    pub budget_bits: Option<u64>,
    #[arg(long, default_value_t = 3)]
    pub levels: u8,
    #[arg(long, value_enum, default_value = "integer")]
    pub mode: Mode,
    /// Retained coefficients are multiplied by 2^shift [default: 2]
    #[arg(long)]
    pub scale_shift: Option<u8>,
    /// How the retained set is chosen [default: case2]
    #[arg(long, value_enum)]
    pub mask: Option<MaskCase>,
    /// case1: threshold is 2^(floor(log2 max|LL|) - u0) [default: 3]
    #[arg(long)]
    pub u0: Option<u32>,
    /// case1: keep a detail triple when all or any reach the threshold [default: all]
    #[arg(long, value_enum)]
    pub policy: Option<Policy>,
    /// case2: number of texture clusters [default: 2]
    #[arg(long)]
    pub k: Option<usize>,
    /// case2: clustering seed [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// case2: mixture refinement steps [default: 10]
    #[arg(long)]
    pub em_iters: Option<usize>,
    /// case2: retained count, or a fraction when written with a decimal point [default: 1.0, keep all]
    #[arg(long)]
    pub m: Option<String>,
    /// case2: weight multiplier [default: 2]
    #[arg(long)]
    pub lambda: Option<f64>,
    pub input: PathBuf,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    /// Decode only this many payload bits [default: all]
    #[arg(long)]
    pub upto_bits: Option<u64>,
    pub input: PathBuf,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct SegmentArgs {
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 10)]
    pub em_iters: usize,
    #[arg(long, default_value_t = 3)]
    pub levels: u8,
    #[arg(long, value_enum, default_value = "integer")]
    pub mode: Mode,
    /// Cluster statistics CSV
    #[arg(long)]
    pub csv: PathBuf,
    pub input: PathBuf,
    /// Label image
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    #[arg(long)]
    pub orig: PathBuf,
    #[arg(long)]
    pub decoded: PathBuf,
    #[arg(long)]
    pub stream: PathBuf,
    #[arg(long)]
    pub csv: PathBuf,
}

/// Bad flag combination, reported as a usage error.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn parse_retained(s: &str) -> Result<Retained, UsageError> {
    let bad = || UsageError(format!("--m expects a count or a fraction, got `{s}`"));
    if s.contains('.') {
        let f: f64 = s.parse().map_err(|_| bad())?;
        if !(0.0..=1.0).contains(&f) {
            return Err(UsageError(format!("--m fraction {f} is outside [0, 1]")));
        }
        Ok(Retained::Fraction(f))
    } else {
        Ok(Retained::Count(s.parse().map_err(|_| bad())?))
    }
}

/// Builds the pruned-coder settings, rejecting flags that do not apply.
pub fn remspiht_config(args: &EncodeArgs) -> Result<Option<RemspihtConfig>, UsageError> {
    let case1 = [("--u0", args.u0.is_some()), ("--policy", args.policy.is_some())];
    let case2 = [
        ("--k", args.k.is_some()),
        ("--seed", args.seed.is_some()),
        ("--em-iters", args.em_iters.is_some()),
        ("--m", args.m.is_some()),
        ("--lambda", args.lambda.is_some()),
    ];
    let reject = |flags: &[(&str, bool)], why: &str| -> Result<(), UsageError> {
        match flags.iter().find(|(_, given)| *given) {
            Some((name, _)) => Err(UsageError(format!("{name} {why}"))),
            None => Ok(()),
        }
    };
    if args.coder == Coder::Spiht {
        let pruned_only = [("--scale-shift", args.scale_shift.is_some()), ("--mask", args.mask.is_some())];
        reject(&pruned_only, "needs --coder remspiht")?;
        reject(&case1, "needs --coder remspiht")?;
        reject(&case2, "needs --coder remspiht")?;
        return Ok(None);
    }
    if args.scale_shift.is_some_and(|s| s > 30) {
        return Err(UsageError("--scale-shift must be at most 30".into()));
    }
    let defaults = RemspihtConfig::default();
    let mask_source = match args.mask.unwrap_or(MaskCase::Case2) {
        MaskCase::Case1 => {
            reject(&case2, "only applies to --mask case2")?;
            MaskSource::CaseI {
                u0: args.u0.unwrap_or(3),
                policy: match args.policy.unwrap_or(Policy::All) {
                    Policy::All => CrossbandPolicy::All,
                    Policy::Any => CrossbandPolicy::Any,
                },
            }
        }
        MaskCase::Case2 => {
            reject(&case1, "only applies to --mask case1")?;
            let k = args.k.unwrap_or(2);
            if k == 0 {
                return Err(UsageError("--k must be at least 1".into()));
            }
            MaskSource::CaseII {
                k,
                seed: args.seed.unwrap_or(0),
                em_iters: args.em_iters.unwrap_or(10),
            }
        }
    };
    let lambda = args.lambda.unwrap_or(defaults.lambda);
    if lambda.is_nan() || lambda < 0.0 {
        return Err(UsageError("--lambda must be non-negative".into()));
    }
    Ok(Some(RemspihtConfig {
        scale_shift: args.scale_shift.unwrap_or(defaults.scale_shift),
        retained: args.m.as_deref().map(parse_retained).transpose()?.unwrap_or(defaults.retained),
        lambda,
        mask_source,
        budget: args.budget_bits.map_or(Budget::Unbounded, Budget::Bits),
        ..defaults
    }))
}

fn read_stream(path: &Path) -> anyhow::Result<SpihtBitstream> {
    let data = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    SpihtBitstream::from_bytes(&data).with_context(|| format!("parsing {}", path.display()))
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn run_fuse(args: &FuseArgs) -> anyhow::Result<()> {
    let a = load_pgm(&args.first).with_context(|| format!("reading {}", args.first.display()))?;
    let b = load_pgm(&args.second).with_context(|| format!("reading {}", args.second.display()))?;
    let (a, b) = crop_to_common(&a, &b)?;
    let fused = fuse(&a, &b, args.rule.into(), args.levels, args.mode.into())?;
    save_pgm(&fused, &args.output).with_context(|| format!("writing {}", args.output.display()))?;
    Ok(())
}

fn run_encode(args: &EncodeArgs, pruned: Option<RemspihtConfig>) -> anyhow::Result<()> {
    let img = load_pgm(&args.input).with_context(|| format!("reading {}", args.input.display()))?;
    let pyr = dwt2(&img, args.levels, args.mode.into())?;
    let bs = match pruned {
        Some(cfg) => encode_remspiht(&pyr, &cfg)?,
        None => {
            let opts = SpihtOptions {
                budget: args.budget_bits.map_or(Budget::Unbounded, Budget::Bits),
                ..SpihtOptions::default()
            };
            encode_traced(&pyr, &opts)?.0
        }
    };
    std::fs::write(&args.output, bs.to_bytes())
        .with_context(|| format!("writing {}", args.output.display()))?;
    Ok(())
}

fn run_decode(args: &DecodeArgs) -> anyhow::Result<()> {
    let bs = read_stream(&args.input)?;
    let img = idwt2(&decode_auto(&bs, args.upto_bits)?)?;
    save_pgm(&img, &args.output).with_context(|| format!("writing {}", args.output.display()))?;
    Ok(())
}

fn run_segment(args: &SegmentArgs) -> anyhow::Result<()> {
    let img = load_pgm(&args.input).with_context(|| format!("reading {}", args.input.display()))?;
    let pyr = dwt2(&img, args.levels, args.mode.into())?;
    let cfg = SegmentConfig {
        k: args.k,
        seed: args.seed,
        em_iters: args.em_iters,
        ..SegmentConfig::default()
    };
    let seg = segment(&pyr, &cfg, entropy_times_nonzero)?;
    save_pgm(&label_image(&pyr, &seg.assignments, args.k)?, &args.output)
        .with_context(|| format!("writing {}", args.output.display()))?;
    write_cluster_stats(create(&args.csv)?, &seg.stats, &seg.scores)?;
    Ok(())
}

fn run_metrics(args: &MetricsArgs) -> anyhow::Result<()> {
    let orig = load_pgm(&args.orig).with_context(|| format!("reading {}", args.orig.display()))?;
    let decoded =
        load_pgm(&args.decoded).with_context(|| format!("reading {}", args.decoded.display()))?;
    let bs = read_stream(&args.stream)?;
    let row = ReportRow {
        image: args.orig.file_name().map_or_else(String::new, |n| n.to_string_lossy().into_owned()),
        coder: coder_name(bs.header.coder).to_owned(),
        budget_bits: Some(bs.total_bytes() as u64 * 8),
        metrics: MetricsReport::measure(&orig, &decoded, &bs)?,
    };
    write_report(create(&args.csv)?, &[row])?;
    Ok(())
}

fn dispatch(cli: &Cli) -> Result<(), (i32, anyhow::Error)> {
    let failed = |e: anyhow::Error| (EXIT_FAILURE, e);
    match &cli.command {
        Command::Fuse(a) => run_fuse(a).map_err(failed),
        Command::Encode(a) => {
            let cfg = remspiht_config(a).map_err(|e| (EXIT_USAGE, e.into()))?;
            run_encode(a, cfg).map_err(failed)
        }
        Command::Decode(a) => run_decode(a).map_err(failed),
        Command::Segment(a) => {
            if a.k == 0 {
                return Err((EXIT_USAGE, UsageError("--k must be at least 1".into()).into()));
            }
            run_segment(a).map_err(failed)
        }
        Command::Metrics(a) => run_metrics(a).map_err(failed),
    }
}

/// Runs one invocation. `argv[0]` is the program name.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // help and version land here too
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli) {
        Ok(()) => EXIT_OK,
        Err((code, e)) => {
            eprintln!("error: {e:#}");
            code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn encode_args(extra: &[&str]) -> Result<EncodeArgs, clap::Error> {
        let mut argv = vec!["wavefuse", "encode", "in.pgm", "-o", "out.rms"];
        argv.extend_from_slice(extra);
        Cli::try_parse_from(argv).map(|cli| match cli.command {
            Command::Encode(a) => a,
            _ => unreachable!(),
        })
    }

    #[test]
    fn plain_coder_rejects_pruning_flags() {
        for flags in [&["--mask", "case1"][..], &["--k", "3"], &["--scale-shift", "1"], &["--u0", "2"]] {
            let a = encode_args(flags).unwrap();
            assert!(remspiht_config(&a).is_err(), "{flags:?}");
        }
        assert!(remspiht_config(&encode_args(&[]).unwrap()).unwrap().is_none());
    }

    #[test]
    fn case_flags_must_match_the_mask() {
        let a = encode_args(&["--coder", "remspiht", "--mask", "case1", "--k", "3"]).unwrap();
        assert!(remspiht_config(&a).is_err());
        let a = encode_args(&["--coder", "remspiht", "--u0", "3"]).unwrap();
        assert!(remspiht_config(&a).is_err());
        let a = encode_args(&["--coder", "remspiht", "--mask", "case1", "--u0", "4", "--policy", "any"]).unwrap();
        let cfg = remspiht_config(&a).unwrap().unwrap();
        assert_eq!(cfg.mask_source, MaskSource::CaseI { u0: 4, policy: CrossbandPolicy::Any });
    }

    #[test]
    fn retained_parsing() {
        assert_eq!(parse_retained("0.25").unwrap(), Retained::Fraction(0.25));
        assert_eq!(parse_retained("100").unwrap(), Retained::Count(100));
        assert!(parse_retained("1.5").is_err());
        assert!(parse_retained("x").is_err());
    }

    #[test]
    fn defaults_are_the_library_defaults() {
        let a = encode_args(&["--coder", "remspiht"]).unwrap();
        let cfg = remspiht_config(&a).unwrap().unwrap();
        let d = RemspihtConfig::default();
        assert_eq!(cfg.scale_shift, d.scale_shift);
        assert_eq!(cfg.retained, d.retained);
        assert_eq!(cfg.mask_source, d.mask_source);
        assert_eq!(cfg.budget, Budget::Unbounded);
    }

    #[test]
    fn parse_outcomes() {
        use clap::error::ErrorKind;
        let kind = |argv: &[&str]| Cli::try_parse_from(argv).unwrap_err().kind();
        assert_eq!(kind(&["wavefuse", "--help"]), ErrorKind::DisplayHelp);
        assert_eq!(kind(&["wavefuse", "encode", "--bogus"]), ErrorKind::UnknownArgument);
        assert_eq!(kind(&["wavefuse", "fuse", "--rule", "median", "a", "b", "-o", "c"]), ErrorKind::InvalidValue);
        assert_eq!(run(["wavefuse", "decode", "/nonexistent/x.rms", "-o", "/nonexistent/y.pgm"]), EXIT_FAILURE);
    }
}
