//! Input parsing and every serialized artifact, with readers for each.
//!
//! Outputs give S positions 5'->3' (as the user supplied the sequence); the
//! header of every artifact states both conventions. Numbers use fixed
//! formats (`{:.10}` for probabilities, `{:.12e}` for partition functions),
//! independent of locale.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::oracle::{exact_probabilities, EnsembleReport};
use crate::outside::{HybridProbMatrix, ProbTables, TargetRow, TargetStrand, TargetTable};
use crate::seq::{JointStructure, SeqError, Strand};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error, PartialEq)]
pub enum ReportError {
    #[error("{path}: line {line}: {msg}")]
    BadFasta { path: String, line: usize, msg: String },
    #[error("expected 2 records, found {found}")]
    WrongRecordCount { found: usize },
    #[error("record '{record}': invalid residue '{ch}' at position {pos}")]
    BadAlphabet { record: String, pos: usize, ch: char },
    #[error("{0}")]
    Io(String),
    #[error("line {line}: {msg}")]
    BadArtifact { line: usize, msg: String },
}

impl ReportError {
    /// Error class as printed by the command line tool.
    pub fn class(&self) -> &'static str {
        match self {
            ReportError::BadFasta { .. } => "BadFasta",
            ReportError::WrongRecordCount { .. } => "WrongRecordCount",
            ReportError::BadAlphabet { .. } => "BadAlphabet",
            ReportError::Io(_) => "Io",
            ReportError::BadArtifact { .. } => "BadArtifact",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FastaRecord {
    pub id: String,
    pub seq: String,
}

pub fn parse_fasta(text: &str, path: &str) -> Result<Vec<FastaRecord>, ReportError> {
    let mut records: Vec<FastaRecord> = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with(';') {
            continue;
        }
        if let Some(header) = line.strip_prefix('>') {
            let id = header.split_whitespace().next().unwrap_or("").to_string();
            if id.is_empty() {
                return Err(ReportError::BadFasta { path: path.into(), line: k + 1, msg: "empty record id".into() });
            }
            records.push(FastaRecord { id, seq: String::new() });
        } else if let Some(rec) = records.last_mut() {
            rec.seq.push_str(line);
        } else {
            return Err(ReportError::BadFasta { path: path.into(), line: k + 1, msg: "sequence before first header".into() });
        }
    }
    Ok(records)
}

/// Reads one file with two records, or two files with one record each.
/// The first record is R, the second S.
pub fn ingest_fasta(paths: &[PathBuf]) -> Result<(Strand, Strand), ReportError> {
    let mut records = Vec::new();
    for p in paths {
        let text = fs::read_to_string(p).map_err(|e| ReportError::Io(format!("{}: {e}", p.display())))?;
        records.extend(parse_fasta(&text, &p.display().to_string())?);
    }
    strands_from_records(&records)
}

pub fn strands_from_records(records: &[FastaRecord]) -> Result<(Strand, Strand), ReportError> {
    let [r, s] = records else {
        return Err(ReportError::WrongRecordCount { found: records.len() });
    };
    let conv = |rec: &FastaRecord, e: SeqError| match e {
        SeqError::BadAlphabet { pos, ch } => ReportError::BadAlphabet { record: rec.id.clone(), pos, ch },
        SeqError::Empty => ReportError::BadFasta { path: rec.id.clone(), line: 0, msg: "empty sequence".into() },
    };
    let rs = Strand::query(&r.id, &r.seq).map_err(|e| conv(r, e))?;
    let ss = Strand::target(&s.id, &s.seq).map_err(|e| conv(s, e))?;
    Ok((rs, ss))
}

/// Run metadata carried by every artifact.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub version: String,
    pub fingerprint: String,
    pub seed: Option<u64>,
    pub r_id: String,
    pub s_id: String,
    pub n: usize,
    pub m: usize,
}

impl Header {
    pub fn new(r: &Strand, s: &Strand, fingerprint: &str, seed: Option<u64>) -> Self {
        Header {
            version: VERSION.into(),
            fingerprint: fingerprint.into(),
            seed,
            r_id: r.id.clone(),
            s_id: s.id.clone(),
            n: r.len(),
            m: s.len(),
        }
    }

    pub fn render(&self, kind: &str) -> String {
        let seed = self.seed.map_or("-".to_string(), |s| s.to_string());
        format!(
            "# jointpf {} {}\n# model {}\n# seed {}\n\
             # R {} length {}: positions 1..{} read 5'->3'\n\
             # S {} length {}: positions 1..{} read 5'->3'; internal index = {} - position\n",
            self.version,
            kind,
            self.fingerprint,
            seed,
            self.r_id,
            self.n,
            self.n,
            self.s_id,
            self.m,
            self.m,
            self.m + 1
        )
    }

    /// User-facing S position of internal index `p`.
    pub fn s_user(&self, p: usize) -> usize {
        self.m + 1 - p
    }
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().map(|(k, l)| (k + 1, l)).filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn bad(line: usize, msg: impl Into<String>) -> ReportError {
    ReportError::BadArtifact { line, msg: msg.into() }
}

fn num<T: std::str::FromStr>(line: usize, field: &str) -> Result<T, ReportError> {
    field.trim().parse().map_err(|_| bad(line, format!("cannot parse '{field}'")))
}

// ---- pf

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PfReport {
    #[serde(flatten)]
    pub header: Header,
    pub q_joint: f64,
    pub q_r: f64,
    pub q_s: f64,
}

pub fn write_pf(pf: &PfReport) -> String {
    let mut out = pf.header.render("pf");
    writeln!(out, "Q_joint\t{:.12e}", pf.q_joint).unwrap();
    writeln!(out, "q_R\t{:.12e}", pf.q_r).unwrap();
    writeln!(out, "q_S\t{:.12e}", pf.q_s).unwrap();
    out
}

pub fn write_pf_json(pf: &PfReport) -> String {
    serde_json::to_string_pretty(pf).expect("report serializes") + "\n"
}

/// Parses the three values of a text `pf` artifact.
pub fn read_pf(text: &str) -> Result<(f64, f64, f64), ReportError> {
    let mut v: HashMap<&str, f64> = HashMap::new();
    for (line, l) in data_lines(text) {
        let (k, x) = l.split_once('\t').ok_or_else(|| bad(line, "expected key<TAB>value"))?;
        v.insert(k, num(line, x)?);
    }
    let get = |k: &str| v.get(k).copied().ok_or_else(|| bad(0, format!("missing {k}")));
    Ok((get("Q_joint")?, get("q_R")?, get("q_S")?))
}

// ---- bpp

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ArcKind {
    R,
    S,
    RS,
}

/// Arc probabilities in user coordinates, `(kind, a, b, p)`.
pub fn bpp_rows(h: &Header, p: &ProbTables, full: bool) -> Vec<(ArcKind, usize, usize, f64)> {
    let mut rows = Vec::new();
    let keep = |x: f64| full || x > 0.0;
    for i in 1..=p.n {
        for j in i + 1..=p.n {
            if keep(p.bpp_r[i][j]) {
                rows.push((ArcKind::R, i, j, p.bpp_r[i][j]));
            }
        }
    }
    for a in 1..=p.m {
        for b in a + 1..=p.m {
            // internal (h, l) = (m+1-b, m+1-a)
            let x = p.bpp_s[h.m + 1 - b][h.m + 1 - a];
            if keep(x) {
                rows.push((ArcKind::S, a, b, x));
            }
        }
    }
    for i in 1..=p.n {
        for a in 1..=p.m {
            let x = p.bpp_ext[i][h.m + 1 - a];
            if keep(x) {
                rows.push((ArcKind::RS, i, a, x));
            }
        }
    }
    rows
}

pub fn write_bpp(h: &Header, p: &ProbTables, full: bool) -> String {
    let mut out = h.render("bpp");
    out.push_str("kind\ti\tj\tprobability\n");
    for (k, a, b, x) in bpp_rows(h, p, full) {
        writeln!(out, "{k:?}\t{a}\t{b}\t{x:.10}").unwrap();
    }
    out
}

pub fn read_bpp(text: &str) -> Result<Vec<(ArcKind, usize, usize, f64)>, ReportError> {
    let mut rows = Vec::new();
    for (line, l) in data_lines(text).skip(1) {
        let f: Vec<&str> = l.split('\t').collect();
        if f.len() != 4 {
            return Err(bad(line, "expected 4 fields"));
        }
        let kind = match f[0] {
            "R" => ArcKind::R,
            "S" => ArcKind::S,
            "RS" => ArcKind::RS,
            other => return Err(bad(line, format!("unknown arc kind '{other}'"))),
        };
        rows.push((kind, num(line, f[1])?, num(line, f[2])?, num(line, f[3])?));
    }
    Ok(rows)
}

// ---- hybrids

/// Hybrid footprints `(i, j, a, b, p)` with S given 5'->3', plus the R projection `(i, j, p)`.
pub type HybridRows = (Vec<(usize, usize, usize, usize, f64)>, Vec<(usize, usize, f64)>);

pub fn hybrid_rows(h: &Header, hy: &HybridProbMatrix) -> HybridRows {
    let mut four: Vec<_> =
        hy.entries().into_iter().map(|(i, j, hh, l, p)| (i, j, h.s_user(l), h.s_user(hh), p)).collect();
    four.sort_by_key(|x| (x.0, x.1, x.2, x.3));
    let t = hy.target_r();
    let mut proj = Vec::new();
    for (i, row) in t.iter().enumerate() {
        for (j, &p) in row.iter().enumerate() {
            if p > 0.0 {
                proj.push((i, j, p));
            }
        }
    }
    (four, proj)
}

pub fn write_hybrids(h: &Header, hy: &HybridProbMatrix) -> String {
    let (four, proj) = hybrid_rows(h, hy);
    let mut out = h.render("hybrids");
    out.push_str("## footprints\ni\tj\th\tl\tprobability\n");
    for (i, j, a, b, p) in four {
        writeln!(out, "{i}\t{j}\t{a}\t{b}\t{p:.10}").unwrap();
    }
    out.push_str("## R projection\ni\tj\tprobability\n");
    for (i, j, p) in proj {
        writeln!(out, "{i}\t{j}\t{p:.10}").unwrap();
    }
    out
}

pub fn read_hybrids(text: &str) -> Result<HybridRows, ReportError> {
    let (mut four, mut proj) = (Vec::new(), Vec::new());
    let mut section = 0;
    for (k, l) in text.lines().enumerate() {
        let line = k + 1;
        if l.starts_with("## footprints") {
            section = 1;
            continue;
        }
        if l.starts_with("## R projection") {
            section = 2;
            continue;
        }
        if l.is_empty() || l.starts_with('#') || l.starts_with("i\t") {
            continue;
        }
        let f: Vec<&str> = l.split('\t').collect();
        match (section, f.len()) {
            (1, 5) => four.push((num(line, f[0])?, num(line, f[1])?, num(line, f[2])?, num(line, f[3])?, num(line, f[4])?)),
            (2, 3) => proj.push((num(line, f[0])?, num(line, f[1])?, num(line, f[2])?)),
            _ => return Err(bad(line, "unexpected row")),
        }
    }
    Ok((four, proj))
}

// ---- targets

/// `i,j: pp.p%`
pub fn format_target(i: usize, j: usize, p: f64) -> String {
    format!("{i},{j}: {:.1}%", p * 100.0)
}

/// Region in user coordinates.
pub fn user_region(h: &Header, row: &TargetRow) -> (usize, usize) {
    match row.strand {
        TargetStrand::R => (row.i, row.j),
        TargetStrand::S => (h.s_user(row.j), h.s_user(row.i)),
    }
}

pub fn write_targets(h: &Header, t: &TargetTable, threshold: f64) -> String {
    let mut out = h.render("targets");
    writeln!(out, "# regions with probability > {threshold}").unwrap();
    for (strand, id) in [(TargetStrand::R, &h.r_id), (TargetStrand::S, &h.s_id)] {
        writeln!(out, "## {strand:?} {id}").unwrap();
        for row in t.strand_rows(strand) {
            let (a, b) = user_region(h, row);
            out.push_str(&format_target(a, b, row.probability));
            out.push('\n');
        }
    }
    out.push_str("## optimum\n");
    if let Some(row) = &t.p_opt {
        let (a, b) = user_region(h, row);
        writeln!(out, "{:?} {}", row.strand, format_target(a, b, row.probability)).unwrap();
    }
    out
}

/// Parsed `targets` artifact; probabilities are the printed percentages.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TargetsFile {
    pub r: Vec<(usize, usize, f64)>,
    pub s: Vec<(usize, usize, f64)>,
    pub optimum: Option<(TargetStrand, usize, usize, f64)>,
}

pub fn parse_target_line(line: usize, l: &str) -> Result<(usize, usize, f64), ReportError> {
    let (region, pct) = l.split_once(": ").ok_or_else(|| bad(line, "expected 'i,j: p%'"))?;
    let (i, j) = region.split_once(',').ok_or_else(|| bad(line, "expected 'i,j'"))?;
    let pct = pct.strip_suffix('%').ok_or_else(|| bad(line, "missing '%'"))?;
    Ok((num(line, i)?, num(line, j)?, num(line, pct)?))
}

pub fn read_targets(text: &str) -> Result<TargetsFile, ReportError> {
    let mut t = TargetsFile::default();
    let mut section = "";
    for (k, l) in text.lines().enumerate() {
        let line = k + 1;
        if let Some(rest) = l.strip_prefix("## ") {
            section = match rest.split_whitespace().next() {
                Some("R") => "R",
                Some("S") => "S",
                Some("optimum") => "opt",
                _ => return Err(bad(line, "unknown section")),
            };
            continue;
        }
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        match section {
            "R" => t.r.push(parse_target_line(line, l)?),
            "S" => t.s.push(parse_target_line(line, l)?),
            "opt" => {
                let (strand, rest) = l.split_once(' ').ok_or_else(|| bad(line, "expected strand"))?;
                let strand = if strand == "R" { TargetStrand::R } else { TargetStrand::S };
                let (i, j, p) = parse_target_line(line, rest)?;
                t.optimum = Some((strand, i, j, p));
            }
            _ => return Err(bad(line, "row outside a section")),
        }
    }
    Ok(t)
}

// ---- samples

/// Dot-bracket lines for R and S (S 5'->3') and the intermolecular pairs.
///
/// `(` `)` mark intramolecular arcs, `|` a base paired with the other strand.
pub fn extended_dot_bracket(js: &JointStructure) -> (String, String, String) {
    let draw = |len: usize, arcs: &std::collections::BTreeSet<(usize, usize)>, ext: &[usize]| {
        let mut v = vec!['.'; len + 1];
        for &(a, b) in arcs {
            v[a] = '(';
            v[b] = ')';
        }
        for &p in ext {
            v[p] = '|';
        }
        v
    };
    let r = draw(js.n, &js.interior_r, &js.exterior.iter().map(|e| e.0).collect::<Vec<_>>());
    let s = draw(js.m, &js.interior_s, &js.exterior.iter().map(|e| e.1).collect::<Vec<_>>());
    let r: String = r[1..].iter().collect();
    // S in user order: reverse, and intramolecular brackets swap direction
    let s: String = s[1..]
        .iter()
        .rev()
        .map(|&c| match c {
            '(' => ')',
            ')' => '(',
            c => c,
        })
        .collect();
    let ext: Vec<String> = js.exterior.iter().map(|&(i, h)| format!("{i}-{}", js.m + 1 - h)).collect();
    let ext = if ext.is_empty() { "-".to_string() } else { ext.join(",") };
    (r, s, ext)
}

fn parse_brackets(line: usize, s: &str) -> Result<Vec<(usize, usize)>, ReportError> {
    let mut stack = Vec::new();
    let mut arcs = Vec::new();
    for (k, c) in s.chars().enumerate() {
        match c {
            '(' => stack.push(k + 1),
            ')' => arcs.push((stack.pop().ok_or_else(|| bad(line, "unbalanced ')'"))?, k + 1)),
            '.' | '|' => {}
            _ => return Err(bad(line, format!("unexpected '{c}'"))),
        }
    }
    if !stack.is_empty() {
        return Err(bad(line, "unbalanced '('"));
    }
    Ok(arcs)
}

pub fn parse_dot_bracket(line: usize, r: &str, s: &str, ext: &str) -> Result<JointStructure, ReportError> {
    let (n, m) = (r.chars().count(), s.chars().count());
    let ir = parse_brackets(line, r)?;
    let is: Vec<_> = parse_brackets(line, s)?.into_iter().map(|(a, b)| (m + 1 - b, m + 1 - a)).collect();
    let mut ex = Vec::new();
    if ext != "-" {
        for pair in ext.split(',') {
            let (i, a) = pair.split_once('-').ok_or_else(|| bad(line, "expected 'i-h'"))?;
            let a: usize = num(line, a)?;
            ex.push((num(line, i)?, m + 1 - a));
        }
    }
    Ok(JointStructure::new(n, m, ir, is, ex))
}

/// Distinct structures with their counts, most frequent first (ties by first appearance).
pub fn frequencies(structures: &[JointStructure]) -> Vec<(JointStructure, usize)> {
    let mut first: BTreeMap<&JointStructure, (usize, usize)> = BTreeMap::new();
    for (k, js) in structures.iter().enumerate() {
        first.entry(js).or_insert((k, 0)).1 += 1;
    }
    let mut v: Vec<_> = first.into_iter().map(|(js, (k, c))| (k, js.clone(), c)).collect();
    v.sort_by(|a, b| b.2.cmp(&a.2).then(a.0.cmp(&b.0)));
    v.into_iter().map(|(_, js, c)| (js, c)).collect()
}

pub fn write_samples(h: &Header, structures: &[JointStructure]) -> String {
    let mut out = h.render("sample");
    writeln!(out, "# {} draws", structures.len()).unwrap();
    out.push_str("## structures\n");
    for (k, js) in structures.iter().enumerate() {
        let (r, s, x) = extended_dot_bracket(js);
        writeln!(out, "{}\t{r}\t{s}\t{x}", k + 1).unwrap();
    }
    out.push_str("## frequencies\ncount\tfrequency\tR\tS\tpairs\n");
    let total = structures.len() as f64;
    for (js, c) in frequencies(structures) {
        let (r, s, x) = extended_dot_bracket(&js);
        writeln!(out, "{c}\t{:.10}\t{r}\t{s}\t{x}", c as f64 / total).unwrap();
    }
    out
}

pub fn read_samples(text: &str) -> Result<Vec<JointStructure>, ReportError> {
    let mut out = Vec::new();
    let mut in_structures = false;
    for (k, l) in text.lines().enumerate() {
        let line = k + 1;
        if let Some(rest) = l.strip_prefix("## ") {
            in_structures = rest == "structures";
            continue;
        }
        if !in_structures || l.is_empty() || l.starts_with('#') {
            continue;
        }
        let f: Vec<&str> = l.split('\t').collect();
        if f.len() != 4 {
            return Err(bad(line, "expected 4 fields"));
        }
        out.push(parse_dot_bracket(line, f[1], f[2], f[3])?);
    }
    Ok(out)
}

// ---- dot plot

/// Intermolecular pair probabilities as an SVG: R along x, S along y (both 5'->3'),
/// each square's area proportional to its probability.
pub fn write_dotplot(h: &Header, r: &Strand, s: &Strand, p: &ProbTables) -> String {
    let cell = 12.0;
    let margin = 40.0;
    let (n, m) = (p.n, p.m);
    let width = margin * 2.0 + cell * n as f64;
    let height = margin * 2.0 + cell * m as f64 + 30.0;
    let mut out = String::new();
    writeln!(out, "<?xml version=\"1.0\" encoding=\"UTF-8\"?>").unwrap();
    for l in h.render("dotplot").lines() {
        writeln!(out, "<!-- {} -->", l.trim_start_matches("# ")).unwrap();
    }
    writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.1}\" height=\"{height:.1}\" viewBox=\"0 0 {width:.1} {height:.1}\">"
    )
    .unwrap();
    writeln!(
        out,
        "<rect x=\"{margin:.1}\" y=\"{margin:.1}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"none\" stroke=\"black\"/>",
        cell * n as f64,
        cell * m as f64
    )
    .unwrap();
    let rs = r.user_string();
    let ss = s.user_string();
    for (k, c) in rs.chars().enumerate() {
        let x = margin + cell * (k as f64 + 0.5);
        writeln!(out, "<text x=\"{x:.1}\" y=\"{:.1}\" font-size=\"9\" text-anchor=\"middle\">{c}</text>", margin - 4.0)
            .unwrap();
    }
    for (k, c) in ss.chars().enumerate() {
        let y = margin + cell * (k as f64 + 0.5) + 3.0;
        writeln!(out, "<text x=\"{:.1}\" y=\"{y:.1}\" font-size=\"9\" text-anchor=\"end\">{c}</text>", margin - 4.0)
            .unwrap();
    }
    for i in 1..=n {
        for a in 1..=m {
            let x = p.bpp_ext[i][h.s_user(a)];
            if x <= 0.0 {
                continue;
            }
            let side = cell * x.clamp(0.0, 1.0).sqrt();
            let cx = margin + cell * (i as f64 - 0.5);
            let cy = margin + cell * (a as f64 - 0.5);
            writeln!(
                out,
                "<rect x=\"{:.3}\" y=\"{:.3}\" width=\"{side:.3}\" height=\"{side:.3}\" fill=\"black\"><title>{i},{a}: {:.10}</title></rect>",
                cx - side / 2.0,
                cy - side / 2.0,
                x
            )
            .unwrap();
        }
    }
    writeln!(
        out,
        "<text x=\"{margin:.1}\" y=\"{:.1}\" font-size=\"10\">x: {} 5'-3'; y: {} 5'-3' (stored reversed internally); area ~ pair probability</text>",
        height - 12.0,
        h.r_id,
        h.s_id
    )
    .unwrap();
    out.push_str("</svg>\n");
    out
}

/// Squares of a dot plot as `(i, a, p)`.
pub fn read_dotplot(text: &str) -> Result<Vec<(usize, usize, f64)>, ReportError> {
    let mut out = Vec::new();
    for (k, l) in text.lines().enumerate() {
        if let Some(rest) = l.split("<title>").nth(1) {
            let t = rest.split("</title>").next().unwrap_or("");
            let (i, j, p) = {
                let (region, p) = t.split_once(": ").ok_or_else(|| bad(k + 1, "bad title"))?;
                let (i, a) = region.split_once(',').ok_or_else(|| bad(k + 1, "bad title"))?;
                (num(k + 1, i)?, num(k + 1, a)?, num(k + 1, p)?)
            };
            out.push((i, j, p));
        }
    }
    Ok(out)
}

/// Exhaustive-enumeration summary; S positions 5'->3'.
pub fn write_oracle(h: &Header, rep: &EnsembleReport) -> String {
    let mut out = h.render("oracle");
    let p = exact_probabilities(rep);
    writeln!(out, "count\t{}", rep.count).unwrap();
    writeln!(out, "weighted_sum\t{:.12e}", rep.weighted_sum).unwrap();
    let sorted = |m: &HashMap<(usize, usize), f64>| {
        let mut v: Vec<_> = m.iter().map(|(&k, &x)| (k, x)).collect();
        v.sort_by_key(|a| a.0);
        v
    };
    out.push_str("## pairs\nkind\ti\tj\tprobability\n");
    for ((i, j), x) in sorted(&p.bpp_r) {
        writeln!(out, "R\t{i}\t{j}\t{x:.10}").unwrap();
    }
    let mut s_rows: Vec<_> = p.bpp_s.iter().map(|(&(a, b), &x)| ((h.s_user(b), h.s_user(a)), x)).collect();
    s_rows.sort_by_key(|a| a.0);
    for ((i, j), x) in s_rows {
        writeln!(out, "S\t{i}\t{j}\t{x:.10}").unwrap();
    }
    let mut e_rows: Vec<_> = p.bpp_ext.iter().map(|(&(i, a), &x)| ((i, h.s_user(a)), x)).collect();
    e_rows.sort_by_key(|a| a.0);
    for ((i, a), x) in e_rows {
        writeln!(out, "RS\t{i}\t{a}\t{x:.10}").unwrap();
    }
    out.push_str("## hybrids\ni\tj\th\tl\tprobability\n");
    let mut hy: Vec<_> = p.p_hy.iter().map(|(&(i, j, a, b), &x)| ((i, j, h.s_user(b), h.s_user(a)), x)).collect();
    hy.sort_by_key(|a| a.0);
    for ((i, j, a, b), x) in hy {
        writeln!(out, "{i}\t{j}\t{a}\t{b}\t{x:.10}").unwrap();
    }
    if !p.structures.is_empty() {
        out.push_str("## structures\nprobability\tR\tS\tpairs\n");
        for (js, x) in &p.structures {
            let (r, s, e) = extended_dot_bracket(js);
            writeln!(out, "{x:.10}\t{r}\t{s}\t{e}").unwrap();
        }
    }
    out
}

/// Writes `contents` to `dir/name`, or to standard output without a directory.
pub fn emit(dir: Option<&Path>, name: &str, contents: &str) -> Result<(), ReportError> {
    match dir {
        Some(d) => {
            fs::create_dir_all(d).map_err(|e| ReportError::Io(format!("{}: {e}", d.display())))?;
            let path = d.join(name);
            fs::write(&path, contents).map_err(|e| ReportError::Io(format!("{}: {e}", path.display())))
        }
        None => {
            use std::io::Write;
            std::io::stdout().write_all(contents.as_bytes()).map_err(|e| ReportError::Io(e.to_string()))
        }
    }
}
