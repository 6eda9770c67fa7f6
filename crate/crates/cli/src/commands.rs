use std::fmt::Write as _;
use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use anyhow::{anyhow, Context};
use bbpekit::codec::Encoder;
use bbpekit::metrics::corpus_alignment;
use bbpekit::{
    avg_hyp_length, confusion_report, decode, merge_log, repair_utf8, sharing_rate, AlphabetClass, ExactTrainer,
    LangLabel, PenaltyConfig, SegmentTable, TokenSeq, TrainOptions, Vocabulary,
};
use clap::ArgMatches;
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::{
    penalized_inputs, AlphabetArg, AnalyzeArgs, Cli, Command, CompareArgs, DecodeArgs, EncodeArgs, EncodeFormat,
    RepairArgs, TrainArgs,
};
use crate::io::{check_input, check_output, emit, load_vocab, read_bytes, read_lines, read_text, write_atomic};
use crate::{CliError, CliResult};

/// Environment variable capping internal parallelism.
const THREADS_ENV: &str = "BBPEKIT_THREADS";

pub fn run(cli: Cli, matches: &ArgMatches) -> CliResult {
    let threads = thread_cap()?;
    if let Some(n) = threads {
        // Only fails if a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match cli.command {
        Command::Train(args) => {
            let sub = matches.subcommand_matches("train").expect("train matches");
            train(args, penalized_inputs(sub), threads)
        }
        Command::Encode(args) => encode(args),
        Command::Decode(args) => decode_cmd(args),
        Command::Repair(args) => repair(args),
        Command::Analyze(args) => analyze(args),
        Command::Compare(args) => compare(args),
    }
}

fn thread_cap() -> CliResult<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got `{v}`"))),
        },
    }
}

fn to_json<T: Serialize>(value: &T) -> CliResult<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(value)?;
    out.push(b'\n');
    Ok(out)
}

fn train(args: TrainArgs, marked: Vec<bool>, threads: Option<usize>) -> CliResult {
    let mode = args.mode;
    let any_penalty_flag = args.alpha.is_some() || args.cutoff_n.is_some() || args.beta.is_some() || !args.penalize.is_empty();
    let penalty = if !mode.allows_merges() {
        if any_penalty_flag {
            return Err(CliError::Usage(format!("penalty options do not apply to {mode} vocabularies")));
        }
        None
    } else if args.no_penalty {
        None
    } else {
        let defaults = PenaltyConfig::default();
        let config = PenaltyConfig {
            alpha: args.alpha.unwrap_or(defaults.alpha),
            cutoff_n: args.cutoff_n.unwrap_or(defaults.cutoff_n),
            beta: args.beta.unwrap_or(defaults.beta),
        };
        config.validate().map_err(CliError::Usage)?;
        Some(config)
    };
    let target = match (args.size, mode.allows_merges()) {
        (Some(size), _) => size,
        (None, false) => usize::MAX,
        (None, true) => return Err(CliError::Usage(format!("--size is required for {mode} vocabularies"))),
    };

    for input in &args.inputs {
        check_input(input)?;
    }
    check_output(&args.out)?;
    if let Some(log) = &args.log {
        check_output(log)?;
    }

    let penalize_all = !marked.iter().any(|&m| m);
    let mut tables = Vec::with_capacity(args.inputs.len());
    for (input, &mark) in args.inputs.iter().zip(&marked) {
        let file = File::open(input).with_context(|| format!("cannot read {}", input.display()))?;
        let table = SegmentTable::ingest(BufReader::new(file), mode)
            .with_context(|| format!("cannot ingest {}", input.display()))?;
        tables.push((table, if penalize_all || mark { penalty } else { None }));
    }

    let mut options = TrainOptions::new(target).with_alphabet(match args.alphabet {
        AlphabetArg::Ascii => AlphabetClass::Ascii,
        AlphabetArg::LatinExtended => AlphabetClass::LatinExtended,
    });
    if let Some(n) = threads {
        options = options.with_threads(n);
    }
    let vocab = ExactTrainer::new(options).train_joint(&tables)?;

    write_atomic(&args.out, vocab.to_file_string().as_bytes())?;
    if let Some(log) = &args.log {
        write_atomic(log, merge_log(&vocab).as_bytes())?;
    }
    let composition = vocab.composition_report();
    let summary = json!({
        "mode": vocab.mode().as_str(),
        "size": vocab.len(),
        "merges": vocab.merges().len(),
        "fingerprint": vocab.fingerprint(),
        "composition": composition,
        "fractions": composition.fractions(),
    });
    emit(None, &to_json(&summary)?)
}

fn check_optional_io(input: Option<&Path>, out: Option<&Path>) -> CliResult {
    if let Some(p) = input {
        check_input(p)?;
    }
    if let Some(p) = out {
        check_output(p)?;
    }
    Ok(())
}

fn encode(args: EncodeArgs) -> CliResult {
    check_input(&args.vocab)?;
    check_optional_io(args.input.as_deref(), args.out.as_deref())?;
    let vocab = load_vocab(&args.vocab)?;
    let text = read_text(args.input.as_deref())?;
    let mut encoder = Encoder::new(&vocab);
    let mut out = String::new();
    for (n, line) in text.lines().enumerate() {
        let seq = encoder.encode(line).with_context(|| format!("line {}", n + 1))?;
        let rendered: Vec<String> = match args.format {
            EncodeFormat::Ids => seq.ids().iter().map(u32::to_string).collect(),
            EncodeFormat::Segmented => join_segments(&seq, |id| id.to_string()),
            EncodeFormat::HexSymbols => join_segments(&seq, |id| {
                hex::encode(vocab.symbol(id).expect("encoder emits known ids").bytes())
            }),
        };
        out.push_str(&rendered.join(" "));
        out.push('\n');
    }
    emit(args.out.as_deref(), out.as_bytes())
}

fn join_segments(seq: &TokenSeq, render: impl Fn(u32) -> String) -> Vec<String> {
    let mut parts = Vec::new();
    for (i, seg) in seq.segments().into_iter().enumerate() {
        if i > 0 {
            parts.push("|".to_owned());
        }
        parts.extend(seg.iter().map(|&id| render(id)));
    }
    parts
}

#[derive(Serialize)]
struct DropReport<'a> {
    line: usize,
    kept_bytes: usize,
    dropped_count: usize,
    dropped_indices: &'a [usize],
}

fn decode_cmd(args: DecodeArgs) -> CliResult {
    check_input(&args.vocab)?;
    check_optional_io(args.input.as_deref(), args.out.as_deref())?;
    let vocab = load_vocab(&args.vocab)?;
    let text = read_text(args.input.as_deref())?;
    let mut out = String::new();
    let mut report = String::new();
    for (n, line) in text.lines().enumerate() {
        let seq = parse_id_line(line, &vocab).with_context(|| format!("line {}", n + 1))?;
        let decoded = decode(&seq, &vocab)?;
        out.push_str(&decoded.text);
        out.push('\n');
        if args.repair_report {
            let entry = DropReport {
                line: n + 1,
                kept_bytes: decoded.repair.kept_bytes,
                dropped_count: decoded.repair.dropped.len(),
                dropped_indices: &decoded.repair.dropped,
            };
            writeln!(report, "{}", serde_json::to_string(&entry)?).expect("writing to a String");
        }
    }
    emit(args.out.as_deref(), out.as_bytes())?;
    eprint!("{report}");
    Ok(())
}

fn parse_id_line(line: &str, vocab: &Vocabulary) -> anyhow::Result<TokenSeq> {
    let mut segments = vec![Vec::new()];
    let mut has_bounds = false;
    for tok in line.split_whitespace() {
        if tok == "|" {
            has_bounds = true;
            segments.push(Vec::new());
        } else {
            let id = tok.parse::<u32>().map_err(|_| anyhow!("`{tok}` is not a symbol id"))?;
            segments.last_mut().expect("non-empty").push(id);
        }
    }
    Ok(if has_bounds {
        TokenSeq::from_segments(segments, vocab)?
    } else {
        TokenSeq::from_ids(segments.pop().expect("non-empty"), vocab)?
    })
}

fn repair(args: RepairArgs) -> CliResult {
    check_optional_io(args.input.as_deref(), args.out.as_deref())?;
    let blobs: Vec<Vec<u8>> = if args.raw {
        vec![read_bytes(args.input.as_deref())?]
    } else {
        read_text(args.input.as_deref())?
            .lines()
            .enumerate()
            .map(|(n, line)| {
                let digits: String = line.split_whitespace().collect();
                hex::decode(&digits).with_context(|| format!("line {} is not hex-encoded bytes", n + 1))
            })
            .collect::<anyhow::Result<_>>()?
    };
    let mut out = String::new();
    let mut report = String::new();
    for (n, blob) in blobs.iter().enumerate() {
        let result = repair_utf8(blob);
        out.push_str(&result.text);
        if !args.raw {
            out.push('\n');
        }
        if args.report {
            let entry = DropReport {
                line: n + 1,
                kept_bytes: result.kept_bytes,
                dropped_count: result.dropped.len(),
                dropped_indices: &result.dropped,
            };
            writeln!(report, "{}", serde_json::to_string(&entry)?).expect("writing to a String");
        }
    }
    emit(args.out.as_deref(), out.as_bytes())?;
    eprint!("{report}");
    Ok(())
}

fn analyze(args: AnalyzeArgs) -> CliResult {
    if args.reference.is_none() && args.vocab.is_none() && args.hyp.is_none() {
        return Err(CliError::Usage("nothing to analyze: give --ref/--hyp and/or --vocab".into()));
    }
    for p in [&args.reference, &args.hyp, &args.vocab, &args.vocab_b, &args.labels].into_iter().flatten() {
        check_input(p)?;
    }

    let hyps = args.hyp.as_deref().map(read_lines).transpose()?;
    let vocab = args.vocab.as_deref().map(load_vocab).transpose()?;

    let alignment = match (&args.reference, &hyps) {
        (Some(r), Some(h)) => {
            let refs = read_lines(r)?;
            let stats = corpus_alignment(&refs, h, args.unit)?;
            let mut value = serde_json::to_value(stats)?;
            value["unit"] = serde_json::to_value(args.unit)?;
            value
        }
        _ => Value::Null,
    };

    let sharing = match (&vocab, &args.vocab_b) {
        (Some(a), Some(b)) => serde_json::to_value(sharing_rate(a, &load_vocab(b)?)?)?,
        _ => Value::Null,
    };

    let avg_length = match (&vocab, &hyps) {
        (Some(v), Some(h)) if !h.is_empty() => {
            let mut encoder = Encoder::new(v);
            let seqs = h
                .iter()
                .enumerate()
                .map(|(n, line)| encoder.encode(line).with_context(|| format!("hypothesis line {}", n + 1)))
                .collect::<anyhow::Result<Vec<_>>>()?;
            json!(avg_hyp_length(&seqs)?)
        }
        _ => Value::Null,
    };

    let composition = match &vocab {
        Some(v) => {
            let stats = v.composition_report();
            json!({ "counts": stats, "fractions": stats.fractions() })
        }
        None => Value::Null,
    };

    let confusion = match (&args.labels, &hyps) {
        (Some(path), Some(h)) => {
            let labels = read_lines(path)?
                .iter()
                .enumerate()
                .filter(|(_, l)| !l.trim().is_empty())
                .map(|(n, l)| l.trim().parse::<LangLabel>().map_err(|e| anyhow!("labels line {}: {e}", n + 1)))
                .collect::<anyhow::Result<Vec<_>>>()?;
            serde_json::to_value(confusion_report(&labels, h)?)?
        }
        _ => Value::Null,
    };

    let report = json!({
        "alignment": alignment,
        "sharing": sharing,
        "avg_length": avg_length,
        "composition": composition,
        "confusion": confusion,
    });
    emit(None, &to_json(&report)?)
}

fn compare(args: CompareArgs) -> CliResult {
    check_input(&args.vocab_a)?;
    check_input(&args.vocab_b)?;
    let a = load_vocab(&args.vocab_a)?;
    let b = load_vocab(&args.vocab_b)?;
    emit(None, &to_json(&sharing_rate(&a, &b)?)?)
}
