//! Outside pass: component probabilities, base-pair probabilities, hybrid
//! and target-site probabilities.
//!
//! The outside value of a cell is the derivative of the partition function
//! with respect to it. Visiting cells parents-first, each term of a parent
//! passes `outside(parent) * coef * (product of the other operands)` to each
//! operand, so that `inside * outside / Q` is the probability of the
//! component. Arcs emitted by a term receive the term's probability.

use crate::energy::Ctx;
use crate::grammar::{Cell, Emit, InsideResult, JointKind, Store};
use crate::tensor::Tensor4;

/// Most operands any term has.
const MAX_OPS: usize = 8;

#[derive(Clone, Debug)]
pub struct ProbTables {
    pub n: usize,
    pub m: usize,
    pub q_total: f64,
    /// Outside values, one per inside cell.
    pub outside: Store,
    /// `bpp_r[i][j]`, `i < j`.
    pub bpp_r: Vec<Vec<f64>>,
    pub bpp_s: Vec<Vec<f64>>,
    /// `bpp_ext[i][h]`.
    pub bpp_ext: Vec<Vec<f64>>,
    /// Largest `|sum of terms / value - 1|` over cells with nonzero probability.
    pub tpf_max_deviation: f64,
}

impl ProbTables {
    /// Probability of a component, `inside * outside / Q`.
    pub fn probability(&self, ins: &InsideResult, cell: Cell) -> f64 {
        if self.q_total == 0.0 {
            return 0.0;
        }
        ins.value(cell) * self.outside.get(cell) / self.q_total
    }
}

pub fn outside(ins: &InsideResult) -> ProbTables {
    let (n, m) = (ins.n(), ins.m());
    let q = ins.q_total;
    let mut bar = Store::zeros(n, m);
    let mut bpp_r = vec![vec![0.0; n + 1]; n + 1];
    let mut bpp_s = vec![vec![0.0; m + 1]; m + 1];
    let mut bpp_ext = vec![vec![0.0; m + 1]; n + 1];
    let mut dev: f64 = 0.0;
    bar.root = 1.0;
    let g = ins.grammar();
    g.for_each_cell(true, |cell| {
        let outer = bar.get(cell);
        let value = ins.value(cell);
        if outer == 0.0 || value == 0.0 {
            return;
        }
        let mut total = 0.0;
        g.terms(cell, &mut |coef, ops, emits| {
            let mut vals = [0.0; MAX_OPS];
            let mut term = coef;
            for (k, &op) in ops.iter().enumerate() {
                vals[k] = ins.value(op);
                term *= vals[k];
            }
            total += term;
            if coef == 0.0 {
                return;
            }
            for (k, &op) in ops.iter().enumerate() {
                let mut others = coef;
                for (t, v) in vals[..ops.len()].iter().enumerate() {
                    if t != k {
                        others *= v;
                    }
                }
                if others != 0.0 {
                    bar.add(op, outer * others);
                }
            }
            if term != 0.0 {
                let p = outer * term / q;
                for e in emits {
                    match *e {
                        Emit::R(i, j) => bpp_r[i][j] += p,
                        Emit::S(h, l) => bpp_s[h][l] += p,
                        Emit::Ext(i, h) => bpp_ext[i][h] += p,
                    }
                }
            }
        });
        dev = dev.max((total / value - 1.0).abs());
    });
    ProbTables { n, m, q_total: q, outside: bar, bpp_r, bpp_s, bpp_ext, tpf_max_deviation: dev }
}

/// Probabilities of maximal hybrids by footprint, summed over the four loop contexts.
#[derive(Clone, Debug)]
pub struct HybridProbMatrix {
    pub n: usize,
    pub m: usize,
    p_hy: Tensor4,
}

impl HybridProbMatrix {
    pub fn get(&self, i: usize, j: usize, h: usize, l: usize) -> f64 {
        self.p_hy.get(i, j, h, l)
    }

    /// Nonzero entries `(i, j, h, l, p)` in lexicographic order.
    pub fn entries(&self) -> Vec<(usize, usize, usize, usize, f64)> {
        let mut out = Vec::new();
        for i in 1..=self.n {
            for j in i..=self.n {
                for h in 1..=self.m {
                    for l in h..=self.m {
                        let p = self.get(i, j, h, l);
                        if p > 0.0 {
                            out.push((i, j, h, l, p));
                        }
                    }
                }
            }
        }
        out
    }

    /// `P^tar` of every R region `[i, j]`, indexed `[i][j]`.
    pub fn target_r(&self) -> Vec<Vec<f64>> {
        let mut t = vec![vec![0.0; self.n + 1]; self.n + 1];
        for (i, j, _, _, p) in self.entries() {
            t[i][j] += p;
        }
        t
    }

    /// `P^tar` of every S region `[h, l]` (internal coordinates).
    pub fn target_s(&self) -> Vec<Vec<f64>> {
        let mut t = vec![vec![0.0; self.m + 1]; self.m + 1];
        for (_, _, h, l, p) in self.entries() {
            t[h][l] += p;
        }
        t
    }
}

/// Probability of a maximal hybrid `(i, j; h, l)` in loop context `ctx`.
pub fn hybrid_probability_ctx(
    ins: &InsideResult,
    probs: &ProbTables,
    ctx: Ctx,
    (i, j, h, l): (usize, usize, usize, usize),
) -> f64 {
    let cell = Cell::Joint { kind: JointKind::Hybrid, ctx, i: i as u16, j: j as u16, h: h as u16, l: l as u16 };
    probs.probability(ins, cell)
}

pub fn hybrid_probabilities(ins: &InsideResult, probs: &ProbTables) -> HybridProbMatrix {
    let (n, m) = (ins.n(), ins.m());
    let mut p_hy = Tensor4::zeros(n, m);
    for i in 1..=n {
        for j in i..=n {
            for h in 1..=m {
                for l in h..=m {
                    let p: f64 = Ctx::ALL.iter().map(|&c| hybrid_probability_ctx(ins, probs, c, (i, j, h, l))).sum();
                    p_hy.set(i, j, h, l, p);
                }
            }
        }
    }
    HybridProbMatrix { n, m, p_hy }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TargetStrand {
    R,
    S,
}

/// One region; S regions are in internal coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TargetRow {
    pub strand: TargetStrand,
    pub i: usize,
    pub j: usize,
    pub probability: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TargetTable {
    /// Regions above the threshold, most probable first.
    pub rows: Vec<TargetRow>,
    /// Most probable region over both strands, regardless of the threshold.
    pub p_opt: Option<TargetRow>,
}

impl TargetTable {
    pub fn strand_rows(&self, strand: TargetStrand) -> impl Iterator<Item = &TargetRow> {
        self.rows.iter().filter(move |r| r.strand == strand)
    }
}

pub fn target_sites(hy: &HybridProbMatrix, threshold: f64) -> TargetTable {
    let mut all = Vec::new();
    for (strand, t) in [(TargetStrand::R, hy.target_r()), (TargetStrand::S, hy.target_s())] {
        for (i, row) in t.iter().enumerate() {
            for (j, &p) in row.iter().enumerate() {
                if p > 0.0 {
                    all.push(TargetRow { strand, i, j, probability: p.min(1.0) });
                }
            }
        }
    }
    // stable order: probability descending, then strand and region
    all.sort_by(|a, b| {
        b.probability.total_cmp(&a.probability).then((a.strand, a.i, a.j).cmp(&(b.strand, b.i, b.j)))
    });
    let p_opt = all.first().copied();
    let rows = all.into_iter().filter(|r| r.probability > threshold).collect();
    TargetTable { rows, p_opt }
}
