//! Line-oriented text format for vocabularies.
//!
//! ```text
//! bbpekit-vocab v1 mode=bbpe
//! specials BOS:0 EOS:1 PAD:2 UNK:3 SEP:4 MASK:5
//! penalty alpha=9.8999999999999999e-1 n=3 beta=9.9900000000000000e-1
//! S 00 6
//! ...
//! M 0 e4 bd 1234 1234
//! P corpus_sha256 <hex of value>
//! ```
//!
//! Byte strings are lowercase hex. Floats carry 17 significant digits so they
//! parse back to the identical `f64`. Provenance lines are optional and come
//! last.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Read, Write};

use super::{Mode, PenaltyConfig, VocabBuilder, VocabError, Vocabulary};

pub const FORMAT_MAGIC: &str = "bbpekit-vocab";
pub const FORMAT_VERSION: &str = "v1";

fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

impl Vocabulary {
    /// Write the vocabulary file. Equal vocabularies produce identical bytes.
    pub fn save<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        out.write_all(self.to_file_string().as_bytes())?;
        out.flush()
    }

    pub fn to_file_string(&self) -> String {
        use std::fmt::Write as _;
        let mut s = String::new();
        let _ = writeln!(s, "{FORMAT_MAGIC} {FORMAT_VERSION} mode={}", self.mode);
        s.push_str("specials");
        for (i, name) in self.specials.iter().enumerate() {
            let _ = write!(s, " {name}:{i}");
        }
        s.push('\n');
        match &self.penalty {
            Some(p) => {
                let _ = writeln!(
                    s,
                    "penalty alpha={} n={} beta={}",
                    fmt_float(p.alpha),
                    p.cutoff_n,
                    fmt_float(p.beta)
                );
            }
            None => s.push_str("penalty none\n"),
        }
        for sym in self.base_symbols() {
            let _ = writeln!(s, "S {} {}", hex::encode(sym.bytes()), sym.id());
        }
        for m in &self.merges {
            let left = self.symbol(m.left).expect("merge parent");
            let right = self.symbol(m.right).expect("merge parent");
            let _ = writeln!(
                s,
                "M {} {} {} {} {}",
                m.rank,
                hex::encode(left.bytes()),
                hex::encode(right.bytes()),
                m.raw_count,
                fmt_float(m.adjusted_count)
            );
        }
        for (k, v) in &self.provenance {
            let _ = writeln!(s, "P {k} {}", hex::encode(v.as_bytes()));
        }
        s
    }

    /// Parse a vocabulary file, re-checking every invariant.
    pub fn load<R: Read>(source: R) -> Result<Vocabulary, VocabError> {
        let mut lines = Vec::new();
        for line in BufReader::new(source).lines() {
            lines.push(line?);
        }
        Parser { lines, pos: 0 }.parse()
    }

    pub fn from_file_str(text: &str) -> Result<Vocabulary, VocabError> {
        Self::load(text.as_bytes())
    }
}

struct Parser {
    lines: Vec<String>,
    pos: usize,
}

impl Parser {
    fn err(&self, invariant: impl Into<String>) -> VocabError {
        VocabError::Corrupt {
            invariant: invariant.into(),
            line: Some(self.pos),
        }
    }

    fn next_line(&mut self, what: &str) -> Result<&str, VocabError> {
        self.pos += 1;
        match self.lines.get(self.pos - 1) {
            Some(l) => Ok(l.as_str()),
            None => Err(self.err(format!("missing {what} line"))),
        }
    }

    fn parse(mut self) -> Result<Vocabulary, VocabError> {
        let header = self.next_line("header")?.to_owned();
        let mut parts = header.split(' ');
        if parts.next() != Some(FORMAT_MAGIC) {
            return Err(self.err("not a vocabulary file"));
        }
        let version = parts.next().unwrap_or_default();
        if version != FORMAT_VERSION {
            return Err(VocabError::Version {
                found: version.to_owned(),
            });
        }
        let mode: Mode = parts
            .next()
            .and_then(|m| m.strip_prefix("mode="))
            .ok_or_else(|| self.err("header lacks mode"))?
            .parse()
            .map_err(|e: String| self.err(e))?;

        let specials_line = self.next_line("specials")?.to_owned();
        let mut fields = specials_line.split(' ');
        if fields.next() != Some("specials") {
            return Err(self.err("expected specials line"));
        }
        let mut specials = Vec::new();
        for (i, field) in fields.enumerate() {
            let (name, id) = field.rsplit_once(':').ok_or_else(|| self.err("special token lacks id"))?;
            if id.parse::<usize>().ok() != Some(i) {
                return Err(self.err("special token ids must be 0, 1, 2, ... in order"));
            }
            specials.push(name.to_owned());
        }

        let penalty_line = self.next_line("penalty")?.to_owned();
        let penalty = self.parse_penalty(&penalty_line)?;

        let mut base = Vec::new();
        while let Some(line) = self.lines.get(self.pos).filter(|l| l.starts_with("S ")) {
            let line = line.clone();
            self.pos += 1;
            let f: Vec<&str> = line.split(' ').collect();
            if f.len() != 3 {
                return Err(self.err("base symbol line needs hex and id"));
            }
            let bytes = self.hex(f[1])?;
            let expected = specials.len() + base.len();
            if f[2].parse::<usize>().ok() != Some(expected) {
                return Err(self.err(format!("base symbol id must be {expected}")));
            }
            base.push(bytes);
        }
        let mut builder = VocabBuilder::new(mode, specials, &base).map_err(|e| self.at_line(e))?;

        while let Some(line) = self.lines.get(self.pos).filter(|l| l.starts_with("M ")) {
            let line = line.clone();
            self.pos += 1;
            let f: Vec<&str> = line.split(' ').collect();
            if f.len() != 6 {
                return Err(self.err("merge line needs rank, two symbols and two counts"));
            }
            let rank: usize = f[1].parse().map_err(|_| self.err("bad merge rank"))?;
            if rank != builder.merge_count() {
                return Err(self.err("merge ranks must be dense and ascending"));
            }
            let left = self.hex(f[2])?;
            let right = self.hex(f[3])?;
            let raw: u64 = f[4].parse().map_err(|_| self.err("bad raw count"))?;
            let adjusted: f64 = f[5].parse().map_err(|_| self.err("bad adjusted count"))?;
            let l = builder.id_of(&left).ok_or_else(|| self.err("merge left parent is not a known symbol"))?;
            let r = builder.id_of(&right).ok_or_else(|| self.err("merge right parent is not a known symbol"))?;
            builder.push_merge(l, r, raw, adjusted).map_err(|e| self.at_line(e))?;
        }

        let mut provenance = BTreeMap::new();
        while let Some(line) = self.lines.get(self.pos).filter(|l| l.starts_with("P ")) {
            let line = line.clone();
            self.pos += 1;
            let f: Vec<&str> = line.split(' ').collect();
            if f.len() != 3 {
                return Err(self.err("provenance line needs key and hex value"));
            }
            let value = String::from_utf8(self.hex(f[2])?).map_err(|_| self.err("provenance value is not UTF-8"))?;
            provenance.insert(f[1].to_owned(), value);
        }

        if let Some(extra) = self.lines.get(self.pos) {
            if !extra.is_empty() || self.lines.len() > self.pos + 1 {
                self.pos += 1;
                return Err(self.err("unexpected line"));
            }
        }
        builder.finish(penalty, provenance).map_err(|e| self.at_line(e))
    }

    fn parse_penalty(&self, line: &str) -> Result<Option<PenaltyConfig>, VocabError> {
        if line == "penalty none" {
            return Ok(None);
        }
        let rest = line.strip_prefix("penalty ").ok_or_else(|| self.err("expected penalty line"))?;
        let mut alpha = None;
        let mut n = None;
        let mut beta = None;
        for kv in rest.split(' ') {
            match kv.split_once('=') {
                Some(("alpha", v)) => alpha = v.parse::<f64>().ok(),
                Some(("n", v)) => n = v.parse::<usize>().ok(),
                Some(("beta", v)) => beta = v.parse::<f64>().ok(),
                _ => return Err(self.err(format!("unknown penalty field `{kv}`"))),
            }
        }
        match (alpha, n, beta) {
            (Some(alpha), Some(cutoff_n), Some(beta)) => Ok(Some(PenaltyConfig { alpha, cutoff_n, beta })),
            _ => Err(self.err("penalty line needs alpha, n and beta")),
        }
    }

    fn hex(&self, s: &str) -> Result<Vec<u8>, VocabError> {
        hex::decode(s).map_err(|_| self.err(format!("`{s}` is not a hex byte string")))
    }

    fn at_line(&self, e: VocabError) -> VocabError {
        match e {
            VocabError::Corrupt { invariant, .. } => VocabError::Corrupt {
                invariant,
                line: Some(self.pos),
            },
            other => other,
        }
    }
}
