//! Single-strand partition functions, including the multi-loop and
//! kissing-loop segment tables used by the joint grammar.
//!
//! Both segment families share one recursion, instantiated with the
//! multi-loop or the kissing-loop affine penalties.

use crate::energy::{EnergyModel, StrandWeights, Weights};
use crate::grammar::{Cell, Emit, Side};
use crate::seq::Strand;
use crate::tensor::Mat2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SecKind {
    /// Arc `(a, b)` closing a loop without intermolecular pairs inside.
    Qb,
    /// Multi-loop segment with at least one branch.
    Qm,
    /// Multi-loop segment, possibly without branches.
    Qm0,
    /// Kissing-loop segment with at least one branch.
    Qk,
    /// Kissing-loop segment, possibly without branches.
    Qk0,
    /// Exterior-loop segment with at least one arc.
    Q1,
    /// Exterior-loop segment; the empty structure included.
    Q,
}

impl SecKind {
    /// Fill order within one interval.
    pub const ALL: [SecKind; 7] =
        [SecKind::Qb, SecKind::Qm, SecKind::Qm0, SecKind::Qk, SecKind::Qk0, SecKind::Q1, SecKind::Q];
}

#[derive(Clone, Debug)]
pub struct SecTables {
    pub n: usize,
    tables: Vec<Mat2>,
}

impl SecTables {
    pub fn zeros(n: usize) -> Self {
        SecTables { n, tables: SecKind::ALL.iter().map(|_| Mat2::zeros(n)).collect() }
    }

    pub fn table(&self, kind: SecKind) -> &Mat2 {
        &self.tables[kind as usize]
    }

    pub fn table_mut(&mut self, kind: SecKind) -> &mut Mat2 {
        &mut self.tables[kind as usize]
    }

    pub fn q(&self, a: usize, b: usize) -> f64 {
        self.table(SecKind::Q).get(a, b)
    }

    pub fn qb(&self, a: usize, b: usize) -> f64 {
        self.table(SecKind::Qb).get(a, b)
    }

    pub fn qm(&self, a: usize, b: usize) -> f64 {
        self.table(SecKind::Qm).get(a, b)
    }

    pub fn qk(&self, a: usize, b: usize) -> f64 {
        self.table(SecKind::Qk).get(a, b)
    }

    pub fn bytes(&self) -> usize {
        self.tables.iter().map(Mat2::bytes).sum()
    }
}

#[inline]
fn cell(side: Side, kind: SecKind, a: usize, b: usize) -> Cell {
    Cell::Sec { side, kind, a: a as u16, b: b as u16 }
}

/// Terms of one secondary-structure entry; `b = a - 1` denotes the empty interval.
pub(crate) fn sec_terms<F: FnMut(f64, &[Cell], &[Emit])>(
    sw: &StrandWeights,
    side: Side,
    kind: SecKind,
    a: usize,
    b: usize,
    f: &mut F,
) {
    let arc = |i: usize, j: usize| match side {
        Side::R => Emit::R(i, j),
        Side::S => Emit::S(i, j),
    };
    let len = b + 1 - a;
    match kind {
        SecKind::Q => {
            f(1.0, &[], &[]);
            if len > 0 {
                f(1.0, &[cell(side, SecKind::Q1, a, b)], &[]);
            }
        }
        SecKind::Q1 => {
            // last top-level arc (k, l); l+1..b unpaired
            for l in a..=b {
                for k in a..l {
                    if sw.can_pair(k, l) {
                        f(1.0, &[cell(side, SecKind::Q, a, k - 1), cell(side, SecKind::Qb, k, l)], &[]);
                    }
                }
            }
        }
        SecKind::Qm0 | SecKind::Qk0 => {
            let (unp, inner) = if kind == SecKind::Qm0 {
                (sw.multi_unpaired(len), SecKind::Qm)
            } else {
                (sw.kiss_unpaired(len), SecKind::Qk)
            };
            f(unp, &[], &[]);
            if len > 0 {
                f(1.0, &[cell(side, inner, a, b)], &[]);
            }
        }
        SecKind::Qm | SecKind::Qk => {
            let multi = kind == SecKind::Qm;
            let (branch, prefix) =
                if multi { (sw.multi_branch, SecKind::Qm0) } else { (sw.kiss_branch, SecKind::Qk0) };
            for l in a..=b {
                let tail = if multi { sw.multi_unpaired(b - l) } else { sw.kiss_unpaired(b - l) };
                for k in a..l {
                    if sw.can_pair(k, l) {
                        f(branch * tail, &[cell(side, prefix, a, k - 1), cell(side, SecKind::Qb, k, l)], &[]);
                    }
                }
            }
        }
        SecKind::Qb => {
            if len < 2 || !sw.can_pair(a, b) {
                return;
            }
            let emit = [arc(a, b)];
            f(sw.hairpin(a, b), &[], &emit);
            for p in a + 1..b {
                for q in p + 1..b {
                    if sw.can_pair(p, q) {
                        f(sw.interior(a, b, p, q), &[cell(side, SecKind::Qb, p, q)], &emit);
                    }
                }
            }
            // multi-loop: at least one branch in Qm, then the last branch (k, l)
            for k in a + 2..b {
                for l in k + 1..b {
                    if sw.can_pair(k, l) {
                        f(
                            sw.multi_close * sw.multi_branch * sw.multi_unpaired(b - 1 - l),
                            &[cell(side, SecKind::Qm, a + 1, k - 1), cell(side, SecKind::Qb, k, l)],
                            &emit,
                        );
                    }
                }
            }
        }
    }
}

/// Fills the single-strand tables of `strand` in O(N^4) time.
pub fn fold(strand: &Strand, model: &EnergyModel) -> SecTables {
    let w = Weights::new(model, &strand.residues, &[]);
    fill(&w.r, Side::R)
}

pub(crate) fn fill(sw: &StrandWeights, side: Side) -> SecTables {
    let n = sw.len;
    let mut t = SecTables::zeros(n);
    for d in 0..=n {
        for a in 1..=n + 1 - d {
            let b = a + d - 1;
            for kind in SecKind::ALL {
                let mut v = 0.0;
                sec_terms(sw, side, kind, a, b, &mut |coef, ops, _| {
                    let mut x = coef;
                    for op in ops {
                        if let Cell::Sec { kind, a, b, .. } = *op {
                            x *= t.table(kind).get(a as usize, b as usize);
                        }
                    }
                    v += x;
                });
                t.table_mut(kind).set(a, b, v);
            }
        }
    }
    t
}

/// Base-pair probabilities of a single strand, `p[i][j]` for `i < j` (1-based).
pub fn pair_probabilities(strand: &Strand, model: &EnergyModel) -> Vec<Vec<f64>> {
    let w = Weights::new(model, &strand.residues, &[]);
    let sw = &w.r;
    let n = sw.len;
    let t = fill(sw, Side::R);
    let mut bar = SecTables::zeros(n);
    let mut p = vec![vec![0.0; n + 1]; n + 1];
    let z = t.q(1, n);
    bar.table_mut(SecKind::Q).set(1, n, 1.0);
    for d in (0..=n).rev() {
        for a in (1..=n + 1 - d).rev() {
            let b = a + d - 1;
            for kind in SecKind::ALL.iter().rev().copied() {
                let outer = bar.table(kind).get(a, b);
                if outer == 0.0 {
                    continue;
                }
                sec_terms(sw, Side::R, kind, a, b, &mut |coef, ops, emits| {
                    let vals: Vec<f64> = ops.iter().map(|op| sec_value(&t, op)).collect();
                    let term = coef * vals.iter().product::<f64>();
                    for (k, op) in ops.iter().enumerate() {
                        let others: f64 =
                            coef * vals.iter().enumerate().filter(|&(m, _)| m != k).map(|(_, v)| v).product::<f64>();
                        if let Cell::Sec { kind, a, b, .. } = *op {
                            bar.table_mut(kind).add(a as usize, b as usize, outer * others);
                        }
                    }
                    for e in emits {
                        if let Emit::R(i, j) = *e {
                            p[i][j] += outer * term / z;
                        }
                    }
                });
            }
        }
    }
    p
}

fn sec_value(t: &SecTables, op: &Cell) -> f64 {
    match *op {
        Cell::Sec { kind, a, b, .. } => t.table(kind).get(a as usize, b as usize),
        _ => unreachable!("secondary terms only reference secondary cells"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(seq: &str, model: &EnergyModel) -> f64 {
        let s = Strand::query("x", seq).unwrap();
        fold(&s, model).q(1, s.len())
    }

    #[test]
    fn unit_counts() {
        let unit = EnergyModel::unit();
        assert_eq!(q("AAAA", &unit), 1.0);
        assert_eq!(q("GAAAC", &unit), 2.0);
        // arcs (1,6), (1,7), (2,6), (2,7), and (1,7)+(2,6)
        assert_eq!(q("GGAAACC", &unit), 6.0);
    }

    #[test]
    fn empty_intervals_have_unit_weight() {
        let s = Strand::query("x", "GGGAAACCC").unwrap();
        let t = fold(&s, &EnergyModel::default());
        for a in 1..=s.len() + 1 {
            assert_eq!(t.q(a, a - 1), 1.0);
            assert_eq!(t.table(SecKind::Qk0).get(a, a - 1), 1.0);
        }
        for a in 1..=s.len() {
            for b in a..=s.len() {
                assert!(t.q(a, b) >= 1.0);
            }
        }
    }

    #[test]
    fn hairpin_example_probability() {
        let s = Strand::query("x", "GAAAC").unwrap();
        let p = pair_probabilities(&s, &EnergyModel::unit());
        assert!((p[1][5] - 0.5).abs() < 1e-12);
    }
}
