//! Strands, arcs and joint interaction structures.
//!
//! All positions are 1-based. The query strand `R` is indexed from its 5' end,
//! the target strand `S` from its 3' end; the reversal of `S` happens once at
//! ingestion (see [`Strand::target`]).

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Base {
    A,
    C,
    G,
    U,
}

impl Base {
    pub fn from_char(c: char) -> Option<Base> {
        match c.to_ascii_uppercase() {
            'A' => Some(Base::A),
            'C' => Some(Base::C),
            'G' => Some(Base::G),
            'U' | 'T' => Some(Base::U),
            _ => None,
        }
    }

    pub fn to_char(self) -> char {
        match self {
            Base::A => 'A',
            Base::C => 'C',
            Base::G => 'G',
            Base::U => 'U',
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    /// Indexed 5' -> 3'.
    Query,
    /// Indexed 3' -> 5'.
    Target,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SeqError {
    #[error("empty sequence")]
    Empty,
    #[error("invalid residue '{ch}' at position {pos}")]
    BadAlphabet { pos: usize, ch: char },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Strand {
    pub id: String,
    /// Residues in internal order (position 1 is `residues[0]`).
    pub residues: Vec<Base>,
    pub role: Role,
}

fn parse_residues(seq: &str) -> Result<Vec<Base>, SeqError> {
    let residues = seq
        .chars()
        .enumerate()
        .map(|(k, ch)| Base::from_char(ch).ok_or(SeqError::BadAlphabet { pos: k + 1, ch }))
        .collect::<Result<Vec<_>, _>>()?;
    if residues.is_empty() {
        return Err(SeqError::Empty);
    }
    Ok(residues)
}

impl Strand {
    /// Query strand from a 5'->3' sequence.
    pub fn query(id: &str, seq_5to3: &str) -> Result<Strand, SeqError> {
        Ok(Strand { id: id.to_string(), residues: parse_residues(seq_5to3)?, role: Role::Query })
    }

    /// Target strand from a 5'->3' sequence; stored reversed so that position 1 is the 3' end.
    pub fn target(id: &str, seq_5to3: &str) -> Result<Strand, SeqError> {
        let mut residues = parse_residues(seq_5to3)?;
        residues.reverse();
        Ok(Strand { id: id.to_string(), residues, role: Role::Target })
    }

    /// Strand whose internal order is given directly.
    pub fn from_internal(id: &str, internal: &str, role: Role) -> Result<Strand, SeqError> {
        Ok(Strand { id: id.to_string(), residues: parse_residues(internal)?, role })
    }

    pub fn len(&self) -> usize {
        self.residues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.residues.is_empty()
    }

    /// Internal 1-based position -> user-facing 5'->3' position.
    pub fn user_pos(&self, p: usize) -> usize {
        match self.role {
            Role::Query => p,
            Role::Target => self.len() + 1 - p,
        }
    }

    /// The sequence in internal order.
    pub fn internal_string(&self) -> String {
        self.residues.iter().map(|b| b.to_char()).collect()
    }

    /// The sequence as the user gave it (5'->3').
    pub fn user_string(&self) -> String {
        let s = self.internal_string();
        match self.role {
            Role::Query => s,
            Role::Target => s.chars().rev().collect(),
        }
    }
}

/// A pair of secondary structures plus intermolecular arcs `(i, h)` (R position, S position).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct JointStructure {
    pub n: usize,
    pub m: usize,
    pub interior_r: BTreeSet<(usize, usize)>,
    pub interior_s: BTreeSet<(usize, usize)>,
    pub exterior: Vec<(usize, usize)>,
}

impl JointStructure {
    pub fn empty(n: usize, m: usize) -> Self {
        JointStructure { n, m, ..Default::default() }
    }

    pub fn new(
        n: usize,
        m: usize,
        interior_r: impl IntoIterator<Item = (usize, usize)>,
        interior_s: impl IntoIterator<Item = (usize, usize)>,
        exterior: impl IntoIterator<Item = (usize, usize)>,
    ) -> Self {
        let mut exterior: Vec<_> = exterior.into_iter().collect();
        exterior.sort_unstable();
        JointStructure {
            n,
            m,
            interior_r: interior_r.into_iter().collect(),
            interior_s: interior_s.into_iter().collect(),
            exterior,
        }
    }

    /// Exterior arcs whose R endpoint lies strictly inside `(i, j)`, as an index range into `exterior`.
    fn covered_by_r(&self, (i, j): (usize, usize)) -> Option<(usize, usize)> {
        index_run(self.exterior.iter().map(|e| i < e.0 && e.0 < j))
    }

    fn covered_by_s(&self, (h, l): (usize, usize)) -> Option<(usize, usize)> {
        index_run(self.exterior.iter().map(|e| h < e.1 && e.1 < l))
    }

    /// Positions of R paired to S.
    pub fn ext_r_positions(&self) -> BTreeSet<usize> {
        self.exterior.iter().map(|e| e.0).collect()
    }

    pub fn ext_s_positions(&self) -> BTreeSet<usize> {
        self.exterior.iter().map(|e| e.1).collect()
    }
}

/// First and last index of the `true` entries; exterior arcs are sorted and
/// noncrossing, so coverage by an interval is always a contiguous run.
fn index_run(flags: impl Iterator<Item = bool>) -> Option<(usize, usize)> {
    let mut run: Option<(usize, usize)> = None;
    for (k, f) in flags.enumerate() {
        if f {
            run = Some(match run {
                None => (k, k),
                Some((a, _)) => (a, k),
            });
        }
    }
    run
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rule {
    OutOfRange,
    DoublePairedPosition,
    CrossingArcs,
    ZigZag,
    HairpinTooSmall,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ValidityReport {
    Valid,
    Invalid { rule: Rule, detail: String },
}

impl ValidityReport {
    pub fn is_valid(&self) -> bool {
        matches!(self, ValidityReport::Valid)
    }

    pub fn rule(&self) -> Option<Rule> {
        match self {
            ValidityReport::Valid => None,
            ValidityReport::Invalid { rule, .. } => Some(*rule),
        }
    }
}

impl fmt::Display for ValidityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidityReport::Valid => write!(f, "Valid"),
            ValidityReport::Invalid { rule, detail } => write!(f, "{rule:?}: {detail}"),
        }
    }
}

fn invalid(rule: Rule, detail: String) -> ValidityReport {
    ValidityReport::Invalid { rule, detail }
}

fn crossing_pair(arcs: &BTreeSet<(usize, usize)>) -> Option<((usize, usize), (usize, usize))> {
    let v: Vec<_> = arcs.iter().copied().collect();
    for (k, &a) in v.iter().enumerate() {
        for &b in &v[k + 1..] {
            // a.0 < b.0 by ordering
            if b.0 < a.1 && a.1 < b.1 {
                return Some((a, b));
            }
        }
    }
    None
}

/// Checks every structural rule; the first violation found is reported.
///
/// Order: range, double pairing, crossing, zig-zag, hairpin size.
pub fn validate(js: &JointStructure, min_hairpin: usize) -> ValidityReport {
    for &(i, j) in &js.interior_r {
        if !(1 <= i && i < j && j <= js.n) {
            return invalid(Rule::OutOfRange, format!("R arc ({i},{j})"));
        }
    }
    for &(h, l) in &js.interior_s {
        if !(1 <= h && h < l && l <= js.m) {
            return invalid(Rule::OutOfRange, format!("S arc ({h},{l})"));
        }
    }
    for &(i, h) in &js.exterior {
        if !(1 <= i && i <= js.n && 1 <= h && h <= js.m) {
            return invalid(Rule::OutOfRange, format!("exterior arc ({i},{h})"));
        }
    }

    let mut used_r = vec![false; js.n + 1];
    let mut used_s = vec![false; js.m + 1];
    for &(i, j) in &js.interior_r {
        for p in [i, j] {
            if std::mem::replace(&mut used_r[p], true) {
                return invalid(Rule::DoublePairedPosition, format!("R{p} in arc ({i},{j})"));
            }
        }
    }
    for &(h, l) in &js.interior_s {
        for p in [h, l] {
            if std::mem::replace(&mut used_s[p], true) {
                return invalid(Rule::DoublePairedPosition, format!("S{p} in arc ({h},{l})"));
            }
        }
    }
    for &(i, h) in &js.exterior {
        if std::mem::replace(&mut used_r[i], true) {
            return invalid(Rule::DoublePairedPosition, format!("R{i} in exterior arc ({i},{h})"));
        }
        if std::mem::replace(&mut used_s[h], true) {
            return invalid(Rule::DoublePairedPosition, format!("S{h} in exterior arc ({i},{h})"));
        }
    }

    if let Some((a, b)) = crossing_pair(&js.interior_r) {
        return invalid(Rule::CrossingArcs, format!("R arcs {a:?} and {b:?}"));
    }
    if let Some((a, b)) = crossing_pair(&js.interior_s) {
        return invalid(Rule::CrossingArcs, format!("S arcs {a:?} and {b:?}"));
    }
    let mut ext = js.exterior.clone();
    ext.sort_unstable();
    for w in ext.windows(2) {
        if w[1].1 <= w[0].1 {
            return invalid(Rule::CrossingArcs, format!("exterior arcs {:?} and {:?}", w[0], w[1]));
        }
    }

    if let Some((a, b)) = find_zigzag(js) {
        return invalid(Rule::ZigZag, format!("R arc {a:?} and S arc {b:?}"));
    }

    for &(i, j) in &js.interior_r {
        if j - i - 1 < min_hairpin {
            return invalid(Rule::HairpinTooSmall, format!("R arc ({i},{j})"));
        }
    }
    for &(h, l) in &js.interior_s {
        if l - h - 1 < min_hairpin {
            return invalid(Rule::HairpinTooSmall, format!("S arc ({h},{l})"));
        }
    }
    ValidityReport::Valid
}

/// An R arc and an S arc that share a covered exterior arc while neither
/// covered set contains the other.
fn find_zigzag(js: &JointStructure) -> Option<((usize, usize), (usize, usize))> {
    let runs_r: Vec<_> =
        js.interior_r.iter().filter_map(|&a| js.covered_by_r(a).map(|run| (a, run))).collect();
    let runs_s: Vec<_> =
        js.interior_s.iter().filter_map(|&b| js.covered_by_s(b).map(|run| (b, run))).collect();
    for &(a, (ra0, ra1)) in &runs_r {
        for &(b, (rb0, rb1)) in &runs_s {
            let overlap = ra0.max(rb0) <= ra1.min(rb1);
            let a_in_b = rb0 <= ra0 && ra1 <= rb1;
            let b_in_a = ra0 <= rb0 && rb1 <= ra1;
            if overlap && !a_in_b && !b_in_a {
                return Some((a, b));
            }
        }
    }
    None
}

/// True unless an R arc and an S arc cover overlapping, mutually non-nested
/// runs of exterior arcs (either orientation).
pub fn is_zigzag_free(js: &JointStructure) -> bool {
    find_zigzag(js).is_none()
}

/// A maximal run of exterior arcs separated only by unpaired positions on both strands.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Hybrid {
    pub arcs: Vec<(usize, usize)>,
}

impl Hybrid {
    pub fn footprint_r(&self) -> (usize, usize) {
        (self.arcs[0].0, self.arcs[self.arcs.len() - 1].0)
    }

    pub fn footprint_s(&self) -> (usize, usize) {
        (self.arcs[0].1, self.arcs[self.arcs.len() - 1].1)
    }
}

/// Splits the exterior arcs into maximal hybrids, in order.
pub fn extract_hybrids(js: &JointStructure) -> Vec<Hybrid> {
    let mut paired_r = vec![false; js.n + 2];
    let mut paired_s = vec![false; js.m + 2];
    for &(i, j) in &js.interior_r {
        paired_r[i] = true;
        paired_r[j] = true;
    }
    for &(h, l) in &js.interior_s {
        paired_s[h] = true;
        paired_s[l] = true;
    }
    let mut ext = js.exterior.clone();
    ext.sort_unstable();

    let mut hybrids: Vec<Hybrid> = Vec::new();
    let mut current: Vec<(usize, usize)> = Vec::new();
    for e in ext {
        if let Some(&prev) = current.last() {
            let gap_free = (prev.0 + 1..e.0).all(|p| !paired_r[p]) && (prev.1 + 1..e.1).all(|p| !paired_s[p]);
            if !gap_free {
                hybrids.push(Hybrid { arcs: std::mem::take(&mut current) });
            }
        }
        current.push(e);
    }
    if !current.is_empty() {
        hybrids.push(Hybrid { arcs: current });
    }
    hybrids
}
