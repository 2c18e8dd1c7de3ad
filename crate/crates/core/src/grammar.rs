//! Decomposition grammar for joint structures and the inside pass.
//!
//! Every table entry is a sum of *terms*; a term is a constant weight times a
//! product of other entries, and may emit arcs. [`Grammar::terms`] enumerates
//! the terms of one entry and is the single source of truth for the
//! recursions: the inside fill evaluates them bottom-up, the outside pass
//! distributes probability mass along them top-down, and the sampler draws
//! one of them at a time. `docs/grammar.md` lists the productions.
//!
//! A joint sub-structure is a sequence of *items* (maximal hybrids and tight
//! blocks) separated by secondary-structure segments. Tight blocks are closed
//! by an R arc (nabla), an S arc (delta) or both (square). Two hybrids may
//! only be adjacent when the segments between them hold at least one arc,
//! which keeps every hybrid maximal and every parse unique.

use thiserror::Error;

use crate::energy::{Ctx, EnergyModel, LoopCtx, Weights};
use crate::secfold::{SecKind, SecTables};
use crate::seq::Strand;
use crate::tensor::{Mat2, Tensor4};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    R,
    S,
}

/// Joint component kinds, in the order they are filled within one cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum JointKind {
    /// Prefix of a hybrid: arcs `(i,h) .. (j,l)` with unpaired gaps.
    HybridPart,
    /// A hybrid used as an item.
    Hybrid,
    /// Tight block closed by the R arc `(i,j)` only.
    TightNabla,
    /// Tight block closed by the S arc `(h,l)` only.
    TightDelta,
    /// Tight block closed by both `(i,j)` and `(h,l)`.
    TightSquare,
    /// Any of the three tight kinds.
    TightAny,
    /// Double-tight: a tight block followed by at least one more item.
    DoubleTightMulti,
    /// Double-tight starting with a tight block.
    DoubleTightA,
    /// Double-tight starting with a hybrid.
    DoubleTightB,
    /// Inside of a nabla block: R free at both ends, S tight.
    NablaInterior,
    /// Inside of a delta block: R tight, S free at both ends.
    DeltaInterior,
    /// Right-tight, left free, not starting with unpaired segments followed by a hybrid.
    RightTightA,
    /// Right-tight, left free.
    RightTight,
    /// Free at all four ends, at least one item.
    Arbitrary,
}

impl JointKind {
    /// Whether a table of this kind is ever used in loop context `ctx`.
    ///
    /// Nabla and delta interiors sit inside a kissing loop on their closed
    /// side; free-standing arbitrary structures occur only at the top level
    /// and inside square blocks.
    pub fn reachable(self, ctx: Ctx) -> bool {
        match self {
            JointKind::NablaInterior => ctx.r == LoopCtx::K,
            JointKind::DeltaInterior => ctx.s == LoopCtx::K,
            JointKind::Arbitrary => ctx == Ctx::EE || ctx == Ctx::KK,
            _ => true,
        }
    }

    /// Number of reachable `(kind, ctx)` tables.
    pub fn reachable_tables() -> usize {
        JointKind::ALL.iter().map(|&k| Ctx::ALL.iter().filter(|&&c| k.reachable(c)).count()).sum()
    }

    pub const ALL: [JointKind; 14] = [
        JointKind::HybridPart,
        JointKind::Hybrid,
        JointKind::TightNabla,
        JointKind::TightDelta,
        JointKind::TightSquare,
        JointKind::TightAny,
        JointKind::DoubleTightMulti,
        JointKind::DoubleTightA,
        JointKind::DoubleTightB,
        JointKind::NablaInterior,
        JointKind::DeltaInterior,
        JointKind::RightTightA,
        JointKind::RightTight,
        JointKind::Arbitrary,
    ];
}

/// A table entry.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Cell {
    Root,
    Sec { side: Side, kind: SecKind, a: u16, b: u16 },
    Joint { kind: JointKind, ctx: Ctx, i: u16, j: u16, h: u16, l: u16 },
}

/// An arc produced by a term.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Emit {
    R(usize, usize),
    S(usize, usize),
    Ext(usize, usize),
}

#[derive(Debug, Error, PartialEq)]
pub enum InsideError {
    #[error("capacity exceeded: {required} bytes required, budget {budget} bytes")]
    CapacityExceeded { required: usize, budget: usize },
    #[error("sequences must be at most {max} nt (got {n} and {m})")]
    TooLong { n: usize, m: usize, max: usize },
}

#[derive(Clone, Debug)]
pub struct EngineConfig {
    /// Upper bound on table memory in bytes.
    pub memory_budget: usize,
    /// Reserve room for the outside pass when checking the budget.
    pub with_outside: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig { memory_budget: 2 << 30, with_outside: true }
    }
}

/// All table values for one pair of strands (inside values, or outside adjoints).
#[derive(Clone, Debug)]
pub struct Store {
    pub n: usize,
    pub m: usize,
    pub root: f64,
    pub sec_r: SecTables,
    pub sec_s: SecTables,
    joint: Vec<Tensor4>,
}

fn joint_slot(kind: JointKind, ctx: Ctx) -> usize {
    kind as usize * 4 + ctx.index()
}

impl Store {
    pub fn zeros(n: usize, m: usize) -> Self {
        Store {
            n,
            m,
            root: 0.0,
            sec_r: SecTables::zeros(n),
            sec_s: SecTables::zeros(m),
            joint: JointKind::ALL
                .iter()
                .flat_map(|&k| Ctx::ALL.map(|c| if k.reachable(c) { Tensor4::zeros(n, m) } else { Tensor4::zeros(0, 0) }))
                .collect(),
        }
    }

    /// Bytes a store for `n x m` occupies.
    pub fn bytes_for(n: usize, m: usize) -> usize {
        JointKind::reachable_tables() * Tensor4::cells(n, m) * std::mem::size_of::<f64>()
            + SecKind::ALL.len() * (Mat2::len_bytes(n) + Mat2::len_bytes(m))
    }

    pub fn tensor(&self, kind: JointKind, ctx: Ctx) -> &Tensor4 {
        &self.joint[joint_slot(kind, ctx)]
    }

    pub fn sec(&self, side: Side) -> &SecTables {
        match side {
            Side::R => &self.sec_r,
            Side::S => &self.sec_s,
        }
    }

    fn sec_mut(&mut self, side: Side) -> &mut SecTables {
        match side {
            Side::R => &mut self.sec_r,
            Side::S => &mut self.sec_s,
        }
    }

    #[inline]
    pub fn get(&self, cell: Cell) -> f64 {
        match cell {
            Cell::Root => self.root,
            Cell::Sec { side, kind, a, b } => self.sec(side).table(kind).get(a as usize, b as usize),
            Cell::Joint { kind, ctx, i, j, h, l } => {
                self.joint[joint_slot(kind, ctx)].get(i as usize, j as usize, h as usize, l as usize)
            }
        }
    }

    #[inline]
    pub fn set(&mut self, cell: Cell, v: f64) {
        match cell {
            Cell::Root => self.root = v,
            Cell::Sec { side, kind, a, b } => self.sec_mut(side).table_mut(kind).set(a as usize, b as usize, v),
            Cell::Joint { kind, ctx, i, j, h, l } => {
                self.joint[joint_slot(kind, ctx)].set(i as usize, j as usize, h as usize, l as usize, v)
            }
        }
    }

    #[inline]
    pub fn add(&mut self, cell: Cell, v: f64) {
        match cell {
            Cell::Root => self.root += v,
            Cell::Sec { side, kind, a, b } => self.sec_mut(side).table_mut(kind).add(a as usize, b as usize, v),
            Cell::Joint { kind, ctx, i, j, h, l } => {
                self.joint[joint_slot(kind, ctx)].add(i as usize, j as usize, h as usize, l as usize, v)
            }
        }
    }

    pub fn bytes(&self) -> usize {
        self.joint.iter().map(Tensor4::bytes).sum::<usize>() + self.sec_r.bytes() + self.sec_s.bytes()
    }
}

#[inline]
fn joint(kind: JointKind, ctx: Ctx, i: usize, j: usize, h: usize, l: usize) -> Cell {
    Cell::Joint { kind, ctx, i: i as u16, j: j as u16, h: h as u16, l: l as u16 }
}

#[inline]
fn sec(side: Side, kind: SecKind, a: usize, b: usize) -> Cell {
    Cell::Sec { side, kind, a: a as u16, b: b as u16 }
}

/// Secondary-structure segment in loop context `ctx` (possibly empty).
#[inline]
fn seg(side: Side, ctx: LoopCtx, a: usize, b: usize) -> Cell {
    sec(side, if ctx == LoopCtx::E { SecKind::Q } else { SecKind::Qk0 }, a, b)
}

/// Segment holding at least one arc.
#[inline]
fn seg_paired(side: Side, ctx: LoopCtx, a: usize, b: usize) -> Cell {
    sec(side, if ctx == LoopCtx::E { SecKind::Q1 } else { SecKind::Qk }, a, b)
}

/// The recursions for one pair of strands.
#[derive(Clone, Copy)]
pub struct Grammar<'a> {
    pub w: &'a Weights,
    pub n: usize,
    pub m: usize,
}

impl<'a> Grammar<'a> {
    pub fn new(w: &'a Weights) -> Self {
        Grammar { w, n: w.r.len, m: w.s.len }
    }

    /// Calls `f(coef, operands, emitted)` once per term of `cell`.
    #[inline]
    pub fn terms<F: FnMut(f64, &[Cell], &[Emit])>(&self, cell: Cell, f: &mut F) {
        match cell {
            Cell::Root => {
                f(1.0, &[sec(Side::R, SecKind::Q, 1, self.n), sec(Side::S, SecKind::Q, 1, self.m)], &[]);
                f(1.0, &[joint(JointKind::Arbitrary, Ctx::EE, 1, self.n, 1, self.m)], &[]);
            }
            Cell::Sec { side, kind, a, b } => {
                let sw = match side {
                    Side::R => &self.w.r,
                    Side::S => &self.w.s,
                };
                crate::secfold::sec_terms(sw, side, kind, a as usize, b as usize, f)
            }
            Cell::Joint { kind, ctx, i, j, h, l } => {
                self.joint_terms(kind, ctx, i as usize, j as usize, h as usize, l as usize, f)
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn joint_terms<F: FnMut(f64, &[Cell], &[Emit])>(
        &self,
        kind: JointKind,
        c: Ctx,
        i: usize,
        j: usize,
        h: usize,
        l: usize,
        f: &mut F,
    ) {
        use JointKind::*;
        let (wr, ws) = (&self.w.r, &self.w.s);
        match kind {
            HybridPart => {
                if i == j && h == l {
                    f(self.w.ext_first(i, h), &[], &[Emit::Ext(i, h)]);
                } else if i < j && h < l && self.w.ext_allowed(j, l) {
                    let emit = [Emit::Ext(j, l)];
                    f(self.w.step(i, h, j, l, c), &[joint(HybridPart, c, i, i, h, h)], &emit);
                    for i1 in i + 1..j {
                        for h1 in h + 1..l {
                            let w = self.w.step(i1, h1, j, l, c);
                            if w != 0.0 {
                                f(w, &[joint(HybridPart, c, i, i1, h, h1)], &emit);
                            }
                        }
                    }
                }
            }
            Hybrid => f(1.0, &[joint(HybridPart, c, i, j, h, l)], &[]),
            TightNabla => {
                if i + 1 < j && wr.can_pair(i, j) {
                    let inner = c.with_r(LoopCtx::K);
                    f(
                        wr.kiss_close * wr.branch(c.r),
                        &[joint(NablaInterior, inner, i + 1, j - 1, h, l)],
                        &[Emit::R(i, j)],
                    );
                }
            }
            TightDelta => {
                if h + 1 < l && ws.can_pair(h, l) {
                    let inner = c.with_s(LoopCtx::K);
                    f(
                        ws.kiss_close * ws.branch(c.s),
                        &[joint(DeltaInterior, inner, i, j, h + 1, l - 1)],
                        &[Emit::S(h, l)],
                    );
                }
            }
            TightSquare => {
                if i + 1 < j && h + 1 < l && wr.can_pair(i, j) && ws.can_pair(h, l) {
                    f(
                        wr.kiss_close * wr.branch(c.r) * ws.kiss_close * ws.branch(c.s),
                        &[joint(Arbitrary, Ctx::KK, i + 1, j - 1, h + 1, l - 1)],
                        &[Emit::R(i, j), Emit::S(h, l)],
                    );
                }
            }
            TightAny => {
                for k in [TightNabla, TightDelta, TightSquare] {
                    f(1.0, &[joint(k, c, i, j, h, l)], &[]);
                }
            }
            DoubleTightMulti => {
                for i1 in i..j {
                    for h1 in h..l {
                        f(1.0, &[joint(TightAny, c, i, i1, h, h1), joint(RightTight, c, i1 + 1, j, h1 + 1, l)], &[]);
                    }
                }
            }
            DoubleTightA => {
                f(1.0, &[joint(TightAny, c, i, j, h, l)], &[]);
                f(1.0, &[joint(DoubleTightMulti, c, i, j, h, l)], &[]);
            }
            DoubleTightB => {
                f(1.0, &[joint(Hybrid, c, i, j, h, l)], &[]);
                for i1 in i..j {
                    for h1 in h..l {
                        f(1.0, &[joint(Hybrid, c, i, i1, h, h1), joint(RightTightA, c, i1 + 1, j, h1 + 1, l)], &[]);
                    }
                }
            }
            NablaInterior => {
                // A lone delta or square item spanning all of S would share its
                // S arc's covered exterior arcs with the enclosing R arc: that is
                // a square block, generated elsewhere.
                for i1 in i..=j {
                    for j1 in i1..=j {
                        let (left, right) = (seg(Side::R, c.r, i, i1 - 1), seg(Side::R, c.r, j1 + 1, j));
                        for k in [DoubleTightB, DoubleTightMulti, TightNabla] {
                            f(1.0, &[left, joint(k, c, i1, j1, h, l), right], &[]);
                        }
                    }
                }
            }
            DeltaInterior => {
                for h1 in h..=l {
                    for l1 in h1..=l {
                        let (left, right) = (seg(Side::S, c.s, h, h1 - 1), seg(Side::S, c.s, l1 + 1, l));
                        for k in [DoubleTightB, DoubleTightMulti, TightDelta] {
                            f(1.0, &[left, joint(k, c, i, j, h1, l1), right], &[]);
                        }
                    }
                }
            }
            RightTightA => {
                for i1 in i..=j {
                    for h1 in h..=l {
                        let sr = seg(Side::R, c.r, i, i1 - 1);
                        let ss = seg(Side::S, c.s, h, h1 - 1);
                        f(1.0, &[sr, ss, joint(DoubleTightA, c, i1, j, h1, l)], &[]);
                        let b = joint(DoubleTightB, c, i1, j, h1, l);
                        // a hybrid may only follow if the segments hold an arc
                        if i1 > i {
                            f(1.0, &[seg_paired(Side::R, c.r, i, i1 - 1), ss, b], &[]);
                        }
                        if h1 > h {
                            f(wr.unpaired(c.r, i1 - i), &[seg_paired(Side::S, c.s, h, h1 - 1), b], &[]);
                        }
                    }
                }
            }
            RightTight => {
                for i1 in i..=j {
                    for h1 in h..=l {
                        let sr = seg(Side::R, c.r, i, i1 - 1);
                        let ss = seg(Side::S, c.s, h, h1 - 1);
                        f(1.0, &[sr, ss, joint(DoubleTightA, c, i1, j, h1, l)], &[]);
                        f(1.0, &[sr, ss, joint(DoubleTightB, c, i1, j, h1, l)], &[]);
                    }
                }
            }
            Arbitrary => {
                for j1 in i..=j {
                    for l1 in h..=l {
                        f(
                            1.0,
                            &[
                                joint(RightTight, c, i, j1, h, l1),
                                seg(Side::R, c.r, j1 + 1, j),
                                seg(Side::S, c.s, l1 + 1, l),
                            ],
                            &[],
                        );
                    }
                }
            }
        }
    }

    /// Visits every cell in an order where each cell follows all its operands
    /// (or precedes them, when `reverse`).
    pub fn for_each_cell<F: FnMut(Cell)>(&self, reverse: bool, mut f: F) {
        let (n, m) = (self.n, self.m);
        let sec_cells = |side: Side, len: usize, f: &mut F| {
            let mut spans: Vec<usize> = (0..=len).collect();
            if reverse {
                spans.reverse();
            }
            for d in spans {
                let mut starts: Vec<usize> = (1..=len + 1 - d).collect();
                if reverse {
                    starts.reverse();
                }
                for a in starts {
                    let b = a + d - 1;
                    let mut kinds = SecKind::ALL.to_vec();
                    if reverse {
                        kinds.reverse();
                    }
                    for kind in kinds {
                        f(sec(side, kind, a, b));
                    }
                }
            }
        };
        let joint_cells = |f: &mut F| {
            let rev = |mut v: Vec<usize>| {
                if reverse {
                    v.reverse();
                }
                v
            };
            let mut kinds: Vec<(JointKind, Ctx)> = JointKind::ALL
                .iter()
                .flat_map(|&k| Ctx::ALL.map(|c| (k, c)))
                .filter(|&(k, c)| k.reachable(c))
                .collect();
            if reverse {
                kinds.reverse();
            }
            for dr in rev((0..n).collect()) {
                for ds in rev((0..m).collect()) {
                    for i in rev((1..=n - dr).collect()) {
                        for h in rev((1..=m - ds).collect()) {
                            for &(k, c) in &kinds {
                                f(joint(k, c, i, i + dr, h, h + ds));
                            }
                        }
                    }
                }
            }
        };
        if reverse {
            f(Cell::Root);
            joint_cells(&mut f);
            sec_cells(Side::S, m, &mut f);
            sec_cells(Side::R, n, &mut f);
        } else {
            sec_cells(Side::R, n, &mut f);
            sec_cells(Side::S, m, &mut f);
            joint_cells(&mut f);
            f(Cell::Root);
        }
    }
}

/// Inside tables for a pair of strands, with everything needed by the outside pass and the sampler.
#[derive(Clone, Debug)]
pub struct InsideResult {
    pub r: Strand,
    pub s: Strand,
    pub weights: Weights,
    pub store: Store,
    pub q_total: f64,
}

/// Bytes of table memory used by [`inside`] (and by the outside pass, if `with_outside`).
pub fn memory_estimate(n: usize, m: usize, with_outside: bool) -> usize {
    let store = Store::bytes_for(n, m);
    if with_outside {
        // adjoint store plus the hybrid probability tensor
        2 * store + Tensor4::cells(n, m) * std::mem::size_of::<f64>()
    } else {
        store
    }
}

/// Fills every table bottom-up and returns the total partition function.
pub fn inside(r: &Strand, s: &Strand, model: &EnergyModel, cfg: &EngineConfig) -> Result<InsideResult, InsideError> {
    let (n, m) = (r.len(), s.len());
    if n.max(m) >= u16::MAX as usize - 2 {
        return Err(InsideError::TooLong { n, m, max: u16::MAX as usize - 3 });
    }
    let required = memory_estimate(n, m, cfg.with_outside);
    if required > cfg.memory_budget {
        return Err(InsideError::CapacityExceeded { required, budget: cfg.memory_budget });
    }
    let weights = Weights::new(model, &r.residues, &s.residues);
    let mut store = Store::zeros(n, m);
    {
        let g = Grammar::new(&weights);
        // without a usable intermolecular pair every joint table is zero
        let interacting = (1..=n).any(|i| (1..=m).any(|h| weights.ext_first(i, h) > 0.0));
        g.for_each_cell(false, |cell| {
            if !interacting && matches!(cell, Cell::Joint { .. }) {
                return;
            }
            let mut v = 0.0;
            g.terms(cell, &mut |coef, ops, _| {
                let mut t = coef;
                for &op in ops {
                    t *= store.get(op);
                }
                v += t;
            });
            store.set(cell, v);
        });
    }
    let q_total = store.root;
    Ok(InsideResult { r: r.clone(), s: s.clone(), weights, store, q_total })
}

impl InsideResult {
    pub fn grammar(&self) -> Grammar<'_> {
        Grammar::new(&self.weights)
    }

    pub fn n(&self) -> usize {
        self.r.len()
    }

    pub fn m(&self) -> usize {
        self.s.len()
    }

    /// Partition function of R alone, `q(1, N)`.
    pub fn q_r(&self) -> f64 {
        self.store.sec_r.q(1, self.n())
    }

    pub fn q_s(&self) -> f64 {
        self.store.sec_s.q(1, self.m())
    }

    pub fn tensor(&self, kind: JointKind, ctx: Ctx) -> &Tensor4 {
        self.store.tensor(kind, ctx)
    }

    /// Hybrid tables for the four loop contexts, ordered EE, EK, KE, KK.
    pub fn hybrid_tables(&self) -> [&Tensor4; 4] {
        Ctx::ALL.map(|c| self.tensor(JointKind::HybridPart, c))
    }

    pub fn value(&self, cell: Cell) -> f64 {
        self.store.get(cell)
    }
}
