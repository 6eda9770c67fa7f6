use std::ffi::OsString;
use std::path::PathBuf;

use bbpekit::{Mode, Unit};
use clap::{ArgAction, ArgMatches, Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "bbpekit", version, about = "Byte-level BPE vocabularies for mixed Mandarin/English text")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a vocabulary from one or more text corpora.
    Train(TrainArgs),
    /// Encode text lines into symbol ids.
    Encode(EncodeArgs),
    /// Decode id lines back into text, repairing invalid byte sequences.
    Decode(DecodeArgs),
    /// Recover the longest valid UTF-8 text from byte strings.
    Repair(RepairArgs),
    /// Score hypotheses against references and describe vocabularies.
    Analyze(AnalyzeArgs),
    /// Symbol sharing between two vocabularies.
    Compare(CompareArgs),
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Vocabulary mode: character, bpe, byte or bbpe.
    #[arg(long, default_value = "bbpe")]
    pub mode: Mode,
    /// Length penalty strength; merges longer than --n bytes keep (1 - alpha) of their count.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Length penalty cutoff in bytes.
    #[arg(long = "n")]
    pub cutoff_n: Option<usize>,
    /// Alphabet penalty strength for all-letter merges.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Train without any penalty (plain BPE selection).
    #[arg(long, conflicts_with_all = ["alpha", "cutoff_n", "beta", "penalize"])]
    pub no_penalty: bool,
    /// Target vocabulary size, special tokens included. Required for bpe and bbpe.
    #[arg(long)]
    pub size: Option<usize>,
    /// Corpus file, one utterance per line. Repeat for joint training.
    #[arg(long = "in", required = true, action = ArgAction::Append)]
    pub inputs: Vec<PathBuf>,
    /// Apply the penalties to the preceding --in only. Without any --penalize,
    /// every input is penalized.
    #[arg(
        long,
        action = ArgAction::Append,
        num_args = 0,
        default_missing_value = "true",
        value_parser = clap::value_parser!(bool)
    )]
    pub penalize: Vec<bool>,
    /// Letters counted by the alphabet penalty.
    #[arg(long, value_enum, default_value_t = AlphabetArg::Ascii)]
    pub alphabet: AlphabetArg,
    /// Output vocabulary file.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the merge log (rank, left, right, raw and adjusted counts).
    #[arg(long)]
    pub log: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlphabetArg {
    Ascii,
    LatinExtended,
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    #[arg(long)]
    pub vocab: PathBuf,
    /// Text file; standard input when omitted.
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = EncodeFormat::Segmented)]
    pub format: EncodeFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EncodeFormat {
    /// Space-separated ids.
    Ids,
    /// Ids with `|` between whitespace-separated segments.
    Segmented,
    /// Hex bytes of each symbol, `|` between segments.
    HexSymbols,
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    #[arg(long)]
    pub vocab: PathBuf,
    /// Id lines (a `|` token marks a segment boundary); standard input when omitted.
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write one JSON line per input line describing dropped bytes to standard error.
    #[arg(long)]
    pub repair_report: bool,
}

#[derive(Debug, Args)]
pub struct RepairArgs {
    /// Input; standard input when omitted. Lines of hex-encoded bytes unless --raw.
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Treat the whole input as one arbitrary byte string.
    #[arg(long)]
    pub raw: bool,
    /// Write one JSON line per repaired string to standard error.
    #[arg(long)]
    pub report: bool,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Reference transcripts, one per line.
    #[arg(long = "ref", requires = "hyp")]
    pub reference: Option<PathBuf>,
    /// Hypotheses, one per line.
    #[arg(long)]
    pub hyp: Option<PathBuf>,
    #[arg(long, default_value = "word")]
    pub unit: Unit,
    /// Vocabulary for composition, hypothesis length and sharing.
    #[arg(long)]
    pub vocab: Option<PathBuf>,
    /// Second vocabulary for the sharing rate.
    #[arg(long, requires = "vocab")]
    pub vocab_b: Option<PathBuf>,
    /// True language per hypothesis line (en or zh).
    #[arg(long, requires = "hyp")]
    pub labels: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub vocab_a: PathBuf,
    #[arg(long)]
    pub vocab_b: PathBuf,
}

/// Parse `argv`, keeping the raw matches so that the position of repeated
/// flags can be recovered.
pub fn parse(argv: Vec<OsString>) -> Result<(Cli, ArgMatches), clap::Error> {
    let matches = Cli::command().try_get_matches_from(argv)?;
    let cli = Cli::from_arg_matches(&matches)?;
    Ok((cli, matches))
}

/// For each `--in`, whether a `--penalize` follows it before the next `--in`.
pub fn penalized_inputs(train: &ArgMatches) -> Vec<bool> {
    let ins: Vec<usize> = train.indices_of("inputs").map(Iterator::collect).unwrap_or_default();
    let flags: Vec<usize> = train.indices_of("penalize").map(Iterator::collect).unwrap_or_default();
    ins.iter()
        .enumerate()
        .map(|(k, &at)| {
            let next = ins.get(k + 1).copied().unwrap_or(usize::MAX);
            flags.iter().any(|&f| f > at && f < next)
        })
        .collect()
}
