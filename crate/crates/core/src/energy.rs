//! Energy model and Boltzmann weights.
//!
//! Energies are free energies in kcal/mol; every weight is `exp(-E / rt)`.
//! Disallowed base pairs have weight 0.

use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::seq::Base;

/// Loop context of one strand's side of a joint sub-structure: the exterior
/// loop, or the inside of a kissing loop.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LoopCtx {
    E,
    K,
}

/// Pair of loop contexts, R side first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Ctx {
    pub r: LoopCtx,
    pub s: LoopCtx,
}

impl Ctx {
    pub const EE: Ctx = Ctx { r: LoopCtx::E, s: LoopCtx::E };
    pub const EK: Ctx = Ctx { r: LoopCtx::E, s: LoopCtx::K };
    pub const KE: Ctx = Ctx { r: LoopCtx::K, s: LoopCtx::E };
    pub const KK: Ctx = Ctx { r: LoopCtx::K, s: LoopCtx::K };
    pub const ALL: [Ctx; 4] = [Ctx::EE, Ctx::EK, Ctx::KE, Ctx::KK];

    pub fn index(self) -> usize {
        (self.r as usize) * 2 + self.s as usize
    }

    pub fn with_r(self, r: LoopCtx) -> Ctx {
        Ctx { r, ..self }
    }

    pub fn with_s(self, s: LoopCtx) -> Ctx {
        Ctx { s, ..self }
    }
}

impl fmt::Display for Ctx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}{:?}", self.r, self.s)
    }
}

pub const PAIR_NAMES: [&str; 6] = ["AU", "CG", "GC", "GU", "UA", "UG"];

/// Canonical pair type index, or `None` for non-canonical combinations.
pub fn pair_type(a: Base, b: Base) -> Option<usize> {
    use Base::*;
    match (a, b) {
        (A, U) => Some(0),
        (C, G) => Some(1),
        (G, C) => Some(2),
        (G, U) => Some(3),
        (U, A) => Some(4),
        (U, G) => Some(5),
        _ => None,
    }
}

fn pair_index(name: &str) -> Option<usize> {
    PAIR_NAMES.iter().position(|p| p.eq_ignore_ascii_case(name))
}

#[derive(Debug, Error)]
pub enum EnergyError {
    #[error("missing parameter file {0}")]
    MissingFile(String),
    #[error("line {line}: {msg}")]
    ParseError { line: usize, msg: String },
    #[error("invalid hybrid gap: ({i1},{h1}) -> ({j},{l})")]
    InvalidGap { i1: usize, h1: usize, j: usize, l: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyModel {
    /// Thermal energy RT in kcal/mol.
    pub rt: f64,
    pub min_hairpin: usize,
    /// Allowed pair types, indexed like [`PAIR_NAMES`].
    pub allowed: [bool; 6],
    /// Hairpin energy by loop size; larger loops extrapolate logarithmically.
    pub hairpin: Vec<f64>,
    /// Interior/bulge energy by total unpaired size (index 0 unused).
    pub interior: Vec<f64>,
    pub interior_asym: f64,
    /// Stacking energy of an outer pair type followed by an inner pair type.
    pub stack: [[f64; 6]; 6],
    pub multi_init: f64,
    pub multi_branch: f64,
    pub multi_unpaired: f64,
    pub kiss_init: f64,
    pub kiss_branch: f64,
    pub kiss_unpaired: f64,
    pub sigma0: f64,
    pub sigma: f64,
    pub beta3: f64,
    /// Energy of the first intermolecular pair of a hybrid, by pair type.
    pub exterior_arc: [f64; 6],
}

const LOOP_EXTRAPOLATION: f64 = 1.07856;

fn default_stack() -> [[f64; 6]; 6] {
    let strength = |p: usize| match PAIR_NAMES[p] {
        "GC" | "CG" => 3.0,
        "AU" | "UA" => 1.5,
        _ => 0.9,
    };
    let mut t = [[0.0; 6]; 6];
    for (p, row) in t.iter_mut().enumerate() {
        for (q, v) in row.iter_mut().enumerate() {
            *v = -(strength(p) + strength(q)) / 2.0;
        }
    }
    t
}

impl Default for EnergyModel {
    fn default() -> Self {
        EnergyModel {
            rt: 0.6163,
            min_hairpin: 3,
            allowed: [true; 6],
            hairpin: vec![5.4, 5.4, 5.4, 5.4, 5.6, 5.7, 5.4, 6.0, 5.5, 6.4],
            interior: vec![0.0, 3.8, 1.0, 2.0, 1.1, 2.0, 2.0, 2.2, 2.3, 2.4, 2.5],
            interior_asym: 0.6,
            stack: default_stack(),
            multi_init: 3.4,
            multi_branch: 0.4,
            multi_unpaired: 0.0,
            kiss_init: 4.0,
            kiss_branch: 0.4,
            kiss_unpaired: 0.0,
            sigma0: 4.1,
            sigma: 1.0,
            beta3: 0.3,
            exterior_arc: [0.0; 6],
        }
    }
}

impl EnergyModel {
    /// Every energy zero: the partition function of an ensemble is its size.
    pub fn unit() -> Self {
        EnergyModel {
            hairpin: vec![0.0],
            interior: vec![0.0],
            interior_asym: 0.0,
            stack: [[0.0; 6]; 6],
            multi_init: 0.0,
            multi_branch: 0.0,
            multi_unpaired: 0.0,
            kiss_init: 0.0,
            kiss_branch: 0.0,
            kiss_unpaired: 0.0,
            sigma0: 0.0,
            sigma: 0.0,
            beta3: 0.0,
            exterior_arc: [0.0; 6],
            ..EnergyModel::default()
        }
    }

    pub fn boltz(&self, e: f64) -> f64 {
        (-e / self.rt).exp()
    }

    pub fn pair(&self, a: Base, b: Base) -> Option<usize> {
        pair_type(a, b).filter(|&p| self.allowed[p])
    }

    pub fn hairpin_energy(&self, size: usize) -> f64 {
        table_energy(&self.hairpin, size)
    }

    /// Interior loop (or bulge) with `s1` and `s2` unpaired bases on the two sides.
    pub fn interior_energy(&self, s1: usize, s2: usize) -> f64 {
        table_energy(&self.interior, s1 + s2) + self.interior_asym * s1.abs_diff(s2) as f64
    }

    /// Gap energy between consecutive intermolecular pairs of a hybrid.
    pub fn g_int(&self, pt_prev: usize, pt_next: usize, gap_r: usize, gap_s: usize) -> f64 {
        if gap_r == 0 && gap_s == 0 {
            self.stack[pt_prev][pt_next]
        } else {
            self.interior_energy(gap_r, gap_s)
        }
    }

    /// Weight of extending a hybrid from pair `(i1, h1)` to pair `(j, l)`.
    ///
    /// The gap on a side whose context is `K` pays `beta3` per unpaired base.
    pub fn hybrid_step_weight(
        &self,
        (i1, h1): (usize, usize),
        (j, l): (usize, usize),
        g_int: f64,
        ctx: Ctx,
    ) -> Result<f64, EnergyError> {
        if j <= i1 || l <= h1 {
            return Err(EnergyError::InvalidGap { i1, h1, j, l });
        }
        let gap_r = (j - i1 - 1) as f64;
        let gap_s = (l - h1 - 1) as f64;
        let mut e = self.sigma0 + self.sigma * g_int;
        if ctx.r == LoopCtx::K {
            e += gap_r * self.beta3;
        }
        if ctx.s == LoopCtx::K {
            e += gap_s * self.beta3;
        }
        Ok(self.boltz(e))
    }

    /// Short stable hash of the model parameters.
    pub fn fingerprint(&self) -> String {
        let json = serde_json::to_string(self).expect("model serializes");
        let digest = Sha256::digest(json.as_bytes());
        hex::encode(&digest[..8])
    }

    pub fn load_params(path: &Path) -> Result<EnergyModel, EnergyError> {
        let text = fs::read_to_string(path).map_err(|_| EnergyError::MissingFile(path.display().to_string()))?;
        EnergyModel::parse_params(&text)
    }

    /// Parses `key = value` lines over the defaults. `#` starts a comment.
    pub fn parse_params(text: &str) -> Result<EnergyModel, EnergyError> {
        let mut model = EnergyModel::default();
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let err = |msg: String| EnergyError::ParseError { line, msg };
            let (key, value) = content.split_once('=').ok_or_else(|| err("expected key = value".into()))?;
            let (key, value) = (key.trim(), value.trim());
            let num = |v: &str| v.trim().parse::<f64>().map_err(|_| err(format!("invalid number '{}'", v.trim())));
            let list = |v: &str| v.split(',').map(num).collect::<Result<Vec<f64>, _>>();
            match key {
                "rt" => {
                    model.rt = num(value)?;
                    if model.rt <= 0.0 {
                        return Err(err("rt must be positive".into()));
                    }
                }
                "min_hairpin" => {
                    model.min_hairpin = value.parse().map_err(|_| err(format!("invalid integer '{value}'")))?
                }
                "pairs" => {
                    let mut allowed = [false; 6];
                    for name in value.split(',') {
                        let p = pair_index(name.trim()).ok_or_else(|| err(format!("unknown pair '{}'", name.trim())))?;
                        allowed[p] = true;
                    }
                    model.allowed = allowed;
                }
                "hairpin" => model.hairpin = nonempty(list(value)?, line)?,
                "interior" => model.interior = nonempty(list(value)?, line)?,
                "interior_asym" => model.interior_asym = num(value)?,
                "multi_init" => model.multi_init = num(value)?,
                "multi_branch" => model.multi_branch = num(value)?,
                "multi_unpaired" => model.multi_unpaired = num(value)?,
                "kiss_init" => model.kiss_init = num(value)?,
                "kiss_branch" => model.kiss_branch = num(value)?,
                "kiss_unpaired" => model.kiss_unpaired = num(value)?,
                "sigma0" => model.sigma0 = num(value)?,
                "sigma" => model.sigma = num(value)?,
                "beta3" => model.beta3 = num(value)?,
                "stack" => model.stack = [[num(value)?; 6]; 6],
                "exterior_arc" => model.exterior_arc = [num(value)?; 6],
                _ => {
                    let parts: Vec<&str> = key.split('.').collect();
                    match parts.as_slice() {
                        ["stack", p, q] => {
                            let p = pair_index(p).ok_or_else(|| err(format!("unknown pair '{p}'")))?;
                            let q = pair_index(q).ok_or_else(|| err(format!("unknown pair '{q}'")))?;
                            model.stack[p][q] = num(value)?;
                        }
                        ["exterior_arc", p] => {
                            let p = pair_index(p).ok_or_else(|| err(format!("unknown pair '{p}'")))?;
                            model.exterior_arc[p] = num(value)?;
                        }
                        _ => return Err(err(format!("unknown key '{key}'"))),
                    }
                }
            }
        }
        Ok(model)
    }
}

fn nonempty(v: Vec<f64>, line: usize) -> Result<Vec<f64>, EnergyError> {
    if v.is_empty() {
        Err(EnergyError::ParseError { line, msg: "empty list".into() })
    } else {
        Ok(v)
    }
}

fn table_energy(table: &[f64], size: usize) -> f64 {
    let last = table.len() - 1;
    if size <= last {
        table[size]
    } else if last == 0 {
        table[0]
    } else {
        table[last] + LOOP_EXTRAPOLATION * (size as f64 / last as f64).ln()
    }
}

/// Boltzmann weights for one (R, S) pair, precomputed from a model.
#[derive(Clone, Debug)]
pub struct Weights {
    pub model: EnergyModel,
    pub r: StrandWeights,
    pub s: StrandWeights,
    /// Pair type of `(R_i, S_h)`, 1-based, if allowed.
    ext_pt: Vec<Vec<Option<usize>>>,
    ext_first: [f64; 6],
    sigma_stack: [[f64; 6]; 6],
    sigma_loop: Vec<Vec<f64>>,
    beta3_pow: Vec<f64>,
}

/// Weights for intramolecular features of one strand.
#[derive(Clone, Debug)]
pub struct StrandWeights {
    pub len: usize,
    pub min_hairpin: usize,
    /// Pair type of `(x_i, x_j)`, 1-based, if allowed.
    pt: Vec<Vec<Option<usize>>>,
    hairpin: Vec<f64>,
    interior: Vec<Vec<f64>>,
    stack: [[f64; 6]; 6],
    pub multi_close: f64,
    pub multi_branch: f64,
    multi_unp: Vec<f64>,
    pub kiss_close: f64,
    pub kiss_branch: f64,
    kiss_unp: Vec<f64>,
}

impl StrandWeights {
    fn new(model: &EnergyModel, seq: &[Base], max_len: usize) -> Self {
        let n = seq.len();
        let mut pt = vec![vec![None; n + 2]; n + 2];
        for i in 1..=n {
            for j in i + 1..=n {
                pt[i][j] = model.pair(seq[i - 1], seq[j - 1]);
            }
        }
        let pow = |e: f64| (0..=max_len + 1).map(|k| model.boltz(e * k as f64)).collect::<Vec<_>>();
        StrandWeights {
            len: n,
            min_hairpin: model.min_hairpin,
            pt,
            hairpin: (0..=n).map(|s| model.boltz(model.hairpin_energy(s))).collect(),
            interior: (0..=n).map(|a| (0..=n).map(|b| model.boltz(model.interior_energy(a, b))).collect()).collect(),
            stack: model.stack.map(|row| row.map(|e| model.boltz(e))),
            multi_close: model.boltz(model.multi_init + model.multi_branch),
            multi_branch: model.boltz(model.multi_branch),
            multi_unp: pow(model.multi_unpaired),
            kiss_close: model.boltz(model.kiss_init + model.kiss_branch),
            kiss_branch: model.boltz(model.kiss_branch),
            kiss_unp: pow(model.kiss_unpaired),
        }
    }

    /// Whether `(i, j)` can be an intramolecular arc: allowed pair and hairpin size.
    #[inline]
    pub fn can_pair(&self, i: usize, j: usize) -> bool {
        i < j && j - i > self.min_hairpin && self.pt[i][j].is_some()
    }

    #[inline]
    pub fn hairpin(&self, i: usize, j: usize) -> f64 {
        self.hairpin[j - i - 1]
    }

    /// Loop closed by `(i, j)` with the single inner pair `(p, q)`.
    #[inline]
    pub fn interior(&self, i: usize, j: usize, p: usize, q: usize) -> f64 {
        if p == i + 1 && q + 1 == j {
            self.stack[self.pt[i][j].unwrap()][self.pt[p][q].unwrap()]
        } else {
            self.interior[p - i - 1][j - q - 1]
        }
    }

    #[inline]
    pub fn multi_unpaired(&self, k: usize) -> f64 {
        self.multi_unp[k]
    }

    #[inline]
    pub fn kiss_unpaired(&self, k: usize) -> f64 {
        self.kiss_unp[k]
    }

    /// Weight of `k` unpaired bases at the top level of a loop in context `ctx`.
    #[inline]
    pub fn unpaired(&self, ctx: LoopCtx, k: usize) -> f64 {
        match ctx {
            LoopCtx::E => 1.0,
            LoopCtx::K => self.kiss_unp[k],
        }
    }

    /// Weight of a branch hanging in a loop of context `ctx`.
    #[inline]
    pub fn branch(&self, ctx: LoopCtx) -> f64 {
        match ctx {
            LoopCtx::E => 1.0,
            LoopCtx::K => self.kiss_branch,
        }
    }
}

impl Weights {
    pub fn new(model: &EnergyModel, r: &[Base], s: &[Base]) -> Self {
        let max_len = r.len().max(s.len());
        let mut ext_pt = vec![vec![None; s.len() + 2]; r.len() + 2];
        for i in 1..=r.len() {
            for h in 1..=s.len() {
                ext_pt[i][h] = model.pair(r[i - 1], s[h - 1]);
            }
        }
        let sigma_e = |g: f64| model.boltz(model.sigma0 + model.sigma * g);
        Weights {
            r: StrandWeights::new(model, r, max_len),
            s: StrandWeights::new(model, s, max_len),
            ext_pt,
            ext_first: model.exterior_arc.map(|e| model.boltz(e)),
            sigma_stack: model.stack.map(|row| row.map(sigma_e)),
            sigma_loop: (0..=r.len())
                .map(|a| (0..=s.len()).map(|b| sigma_e(model.interior_energy(a, b))).collect())
                .collect(),
            beta3_pow: (0..=max_len + 1).map(|k| model.boltz(model.beta3 * k as f64)).collect(),
            model: model.clone(),
        }
    }

    #[inline]
    pub fn ext_allowed(&self, i: usize, h: usize) -> bool {
        self.ext_pt[i][h].is_some()
    }

    /// Weight of `(i, h)` as the first pair of a hybrid.
    #[inline]
    pub fn ext_first(&self, i: usize, h: usize) -> f64 {
        self.ext_pt[i][h].map_or(0.0, |p| self.ext_first[p])
    }

    /// Weight of the hybrid step `(i1, h1) -> (j, l)` in context `ctx`; zero if `(j, l)` cannot pair.
    #[inline]
    pub fn step(&self, i1: usize, h1: usize, j: usize, l: usize, ctx: Ctx) -> f64 {
        let (Some(p), Some(q)) = (self.ext_pt[i1][h1], self.ext_pt[j][l]) else {
            return 0.0;
        };
        let (gr, gs) = (j - i1 - 1, l - h1 - 1);
        let mut w = if gr == 0 && gs == 0 { self.sigma_stack[p][q] } else { self.sigma_loop[gr][gs] };
        if ctx.r == LoopCtx::K {
            w *= self.beta3_pow[gr];
        }
        if ctx.s == LoopCtx::K {
            w *= self.beta3_pow[gs];
        }
        w
    }

    pub fn beta3_pow(&self, k: usize) -> f64 {
        self.beta3_pow[k]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1e-300)
    }

    #[test]
    fn unit_loops_are_free() {
        let m = EnergyModel::unit();
        for a in 0..40 {
            assert_eq!(m.hairpin_energy(a), 0.0);
            for b in 0..40 {
                assert_eq!(m.interior_energy(a, b), 0.0);
                assert_eq!(m.g_int(0, 1, a, b), 0.0);
            }
        }
    }

    #[test]
    fn unit_step_is_one() {
        let m = EnergyModel::unit();
        for ctx in Ctx::ALL {
            assert_eq!(m.hybrid_step_weight((1, 1), (3, 4), 0.0, ctx).unwrap(), 1.0);
        }
    }

    #[test]
    fn step_weight_examples() {
        let m = EnergyModel { sigma0: 1.0, sigma: 1.0, rt: 1.0, beta3: 0.25, ..EnergyModel::unit() };
        let ee = m.hybrid_step_weight((4, 7), (5, 8), 0.5, Ctx::EE).unwrap();
        assert!(close(ee, (-1.5f64).exp(), 1e-15));
        assert!((ee - 0.22313).abs() < 1e-5);
        let kk = m.hybrid_step_weight((4, 7), (6, 8), 0.5, Ctx::KK).unwrap();
        assert!((kk - 0.17377).abs() < 1e-5);
        // EK only prices the S gap, KE only the R gap.
        let ek = m.hybrid_step_weight((4, 7), (6, 8), 0.5, Ctx::EK).unwrap();
        let ke = m.hybrid_step_weight((4, 7), (6, 8), 0.5, Ctx::KE).unwrap();
        assert!(close(ek, ee, 1e-15));
        assert!(close(ke, kk, 1e-15));
        assert!(matches!(m.hybrid_step_weight((4, 7), (4, 8), 0.5, Ctx::EE), Err(EnergyError::InvalidGap { .. })));
    }

    #[test]
    fn weights_are_multiplicative() {
        let m = EnergyModel::default();
        for (a, b) in [(0.3, -1.2), (2.0, 5.5), (-4.1, 0.0)] {
            assert!(close(m.boltz(a + b), m.boltz(a) * m.boltz(b), 1e-12));
        }
    }

    #[test]
    fn params_parsing() {
        assert_eq!(EnergyModel::parse_params("").unwrap(), EnergyModel::default());
        let m = EnergyModel::parse_params("# comment\nsigma0 = 1.0\nstack.GC.CG = -3.4\npairs = AU, UA\n").unwrap();
        assert_eq!(m.sigma0, 1.0);
        assert_eq!(m.stack[2][1], -3.4);
        assert_eq!(m.allowed, [true, false, false, false, true, false]);
        match EnergyModel::parse_params("rt = 0.6\nsigma0 = abc\n") {
            Err(EnergyError::ParseError { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(EnergyModel::parse_params("bogus = 1"), Err(EnergyError::ParseError { line: 1, .. })));
        assert!(matches!(
            EnergyModel::load_params(Path::new("/nonexistent/params.txt")),
            Err(EnergyError::MissingFile(_))
        ));
    }

    #[test]
    fn fingerprint_tracks_parameters() {
        let a = EnergyModel::default();
        let b = EnergyModel { beta3: 0.31, ..EnergyModel::default() };
        assert_eq!(a.fingerprint(), EnergyModel::default().fingerprint());
        assert_ne!(a.fingerprint(), b.fingerprint());
    }

    #[test]
    fn loop_tables_extrapolate() {
        let m = EnergyModel::default();
        assert_eq!(m.hairpin_energy(3), 5.4);
        assert!(m.hairpin_energy(20) > m.hairpin_energy(9));
        assert_eq!(m.interior_energy(1, 1), 1.0);
        assert!((m.interior_energy(3, 1) - (1.1 + 1.2)).abs() < 1e-12);
    }
}
