//! Exhaustive enumeration of joint structures.
//!
//! Structures are generated directly from their definition (two secondary
//! structures plus a noncrossing intermolecular matching, filtered by
//! [`validate`]) and priced from their geometry, never from a parse.

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use crate::energy::{pair_type, EnergyModel};
use crate::seq::{extract_hybrids, validate, Base, JointStructure, Strand};

type Arcs = Vec<(usize, usize)>;
type Visit<'a> = dyn FnMut(&[(usize, usize)]) + 'a;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("ensemble exceeds the limit of {limit} structures (at least {seen} seen)")]
    LimitExceeded { limit: usize, seen: usize },
}

#[derive(Clone, Debug)]
pub struct Limits {
    pub max_structures: usize,
    /// Keep every structure with its weight.
    pub keep_structures: bool,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { max_structures: 10_000_000, keep_structures: false }
    }
}

/// Weighted sums over the ensemble; divide by `weighted_sum` for probabilities.
#[derive(Clone, Debug, Default)]
pub struct EnsembleReport {
    pub n: usize,
    pub m: usize,
    pub count: usize,
    pub weighted_sum: f64,
    pub structures: Vec<(JointStructure, f64)>,
    pub bpp_r: HashMap<(usize, usize), f64>,
    pub bpp_s: HashMap<(usize, usize), f64>,
    pub bpp_ext: HashMap<(usize, usize), f64>,
    /// Keyed by footprint `(i, j, h, l)`.
    pub hybrids: HashMap<(usize, usize, usize, usize), f64>,
}

/// Normalized marginals.
#[derive(Clone, Debug, Default)]
pub struct ExactMarginals {
    pub structures: Vec<(JointStructure, f64)>,
    pub bpp_r: HashMap<(usize, usize), f64>,
    pub bpp_s: HashMap<(usize, usize), f64>,
    pub bpp_ext: HashMap<(usize, usize), f64>,
    pub p_hy: HashMap<(usize, usize, usize, usize), f64>,
    pub tar_r: HashMap<(usize, usize), f64>,
    pub tar_s: HashMap<(usize, usize), f64>,
}

/// All pseudoknot-free secondary structures of `seq` under the model's pair set and hairpin size.
pub fn secondary_structures(seq: &[Base], model: &EnergyModel) -> Vec<Arcs> {
    fn rec(
        seq: &[Base],
        model: &EnergyModel,
        a: usize,
        b: usize,
        memo: &mut HashMap<(usize, usize), Vec<Arcs>>,
    ) -> Vec<Arcs> {
        if a > b {
            return vec![vec![]];
        }
        if let Some(v) = memo.get(&(a, b)) {
            return v.clone();
        }
        // position a unpaired
        let mut out = rec(seq, model, a + 1, b, memo);
        // a paired with k
        for k in a + 1 + model.min_hairpin..=b {
            if model.pair(seq[a - 1], seq[k - 1]).is_none() {
                continue;
            }
            let inner = rec(seq, model, a + 1, k - 1, memo);
            let outer = rec(seq, model, k + 1, b, memo);
            for x in &inner {
                for y in &outer {
                    let mut s = vec![(a, k)];
                    s.extend_from_slice(x);
                    s.extend_from_slice(y);
                    out.push(s);
                }
            }
        }
        memo.insert((a, b), out.clone());
        out
    }
    rec(seq, model, 1, seq.len(), &mut HashMap::new())
}

fn matchings(
    r: &[Base],
    s: &[Base],
    ur: &[usize],
    us: &[usize],
    model: &EnergyModel,
    prefix: &mut Vec<(usize, usize)>,
    out: &mut Visit<'_>,
) {
    out(prefix);
    let last = prefix.last().copied().unwrap_or((0, 0));
    for &i in ur.iter().filter(|&&i| i > last.0) {
        for &h in us.iter().filter(|&&h| h > last.1) {
            if model.pair(r[i - 1], s[h - 1]).is_some() {
                prefix.push((i, h));
                matchings(r, s, ur, us, model, prefix, &mut *out);
                prefix.pop();
            }
        }
    }
}

/// Free energy of a joint structure, from its loops and hybrids.
pub fn structure_energy(r: &[Base], s: &[Base], js: &JointStructure, model: &EnergyModel) -> f64 {
    let hybrids = extract_hybrids(js);
    let mut gaps_r = BTreeSet::new();
    let mut gaps_s = BTreeSet::new();
    let mut e = 0.0;
    for hy in &hybrids {
        let (i0, h0) = hy.arcs[0];
        e += model.exterior_arc[pair_type(r[i0 - 1], s[h0 - 1]).expect("allowed pair")];
        for w in hy.arcs.windows(2) {
            let ((i1, h1), (j, l)) = (w[0], w[1]);
            gaps_r.extend(i1 + 1..j);
            gaps_s.extend(h1 + 1..l);
            let p = pair_type(r[i1 - 1], s[h1 - 1]).expect("allowed pair");
            let q = pair_type(r[j - 1], s[l - 1]).expect("allowed pair");
            e += model.sigma0 + model.sigma * model.g_int(p, q, j - i1 - 1, l - h1 - 1);
        }
    }
    e += strand_loops_energy(r, &js.interior_r, &js.ext_r_positions(), &gaps_r, model);
    e += strand_loops_energy(s, &js.interior_s, &js.ext_s_positions(), &gaps_s, model);
    e
}

fn strand_loops_energy(
    seq: &[Base],
    arcs: &BTreeSet<(usize, usize)>,
    ext: &BTreeSet<usize>,
    gaps: &BTreeSet<usize>,
    model: &EnergyModel,
) -> f64 {
    let mut partner = vec![0usize; seq.len() + 1];
    for &(i, j) in arcs {
        partner[i] = j;
        partner[j] = i;
    }
    let pt = |i: usize, j: usize| pair_type(seq[i - 1], seq[j - 1]).expect("allowed pair");
    let mut e = 0.0;
    for &(i, j) in arcs {
        // walk the loop's top level
        let mut children = Vec::new();
        let mut unpaired = Vec::new();
        let mut p = i + 1;
        while p < j {
            if partner[p] > p {
                children.push((p, partner[p]));
                p = partner[p] + 1;
            } else {
                if !ext.contains(&p) {
                    unpaired.push(p);
                }
                p += 1;
            }
        }
        let kissing = ext.range(i + 1..j).next().is_some();
        if kissing {
            e += model.kiss_init + model.kiss_branch * (children.len() + 1) as f64;
            for p in &unpaired {
                e += if gaps.contains(p) { model.beta3 } else { model.kiss_unpaired };
            }
        } else {
            e += match children.as_slice() {
                [] => model.hairpin_energy(j - i - 1),
                [(p, q)] if *p == i + 1 && *q + 1 == j => model.stack[pt(i, j)][pt(*p, *q)],
                [(p, q)] => model.interior_energy(p - i - 1, j - q - 1),
                _ => {
                    model.multi_init
                        + model.multi_branch * (children.len() + 1) as f64
                        + model.multi_unpaired * unpaired.len() as f64
                }
            };
        }
    }
    e
}

/// Enumerates every valid joint structure of `r` and `s`.
pub fn enumerate(r: &Strand, s: &Strand, model: &EnergyModel, limits: &Limits) -> Result<EnsembleReport, OracleError> {
    let (rs, ss) = (&r.residues, &s.residues);
    let (n, m) = (rs.len(), ss.len());
    let sec_r = secondary_structures(rs, model);
    let sec_s = secondary_structures(ss, model);
    let mut rep = EnsembleReport { n, m, ..Default::default() };
    let mut overflow = false;
    for ar in &sec_r {
        for as_ in &sec_s {
            let unpaired = |len: usize, arcs: &[(usize, usize)]| {
                let paired: BTreeSet<usize> = arcs.iter().flat_map(|&(a, b)| [a, b]).collect();
                (1..=len).filter(|p| !paired.contains(p)).collect::<Vec<_>>()
            };
            let (ur, us) = (unpaired(n, ar), unpaired(m, as_));
            let mut visit = |ext: &[(usize, usize)]| {
                if overflow {
                    return;
                }
                let js = JointStructure::new(n, m, ar.iter().copied(), as_.iter().copied(), ext.iter().copied());
                if !validate(&js, model.min_hairpin).is_valid() {
                    return;
                }
                rep.count += 1;
                if rep.count > limits.max_structures {
                    overflow = true;
                    return;
                }
                let w = model.boltz(structure_energy(rs, ss, &js, model));
                rep.weighted_sum += w;
                for &a in &js.interior_r {
                    *rep.bpp_r.entry(a).or_default() += w;
                }
                for &a in &js.interior_s {
                    *rep.bpp_s.entry(a).or_default() += w;
                }
                for &a in &js.exterior {
                    *rep.bpp_ext.entry(a).or_default() += w;
                }
                for hy in extract_hybrids(&js) {
                    let ((i, j), (h, l)) = (hy.footprint_r(), hy.footprint_s());
                    *rep.hybrids.entry((i, j, h, l)).or_default() += w;
                }
                if limits.keep_structures {
                    rep.structures.push((js, w));
                }
            };
            matchings(rs, ss, &ur, &us, model, &mut Vec::new(), &mut visit);
            if overflow {
                return Err(OracleError::LimitExceeded { limit: limits.max_structures, seen: rep.count });
            }
        }
    }
    Ok(rep)
}

pub fn exact_probabilities(rep: &EnsembleReport) -> ExactMarginals {
    let z = rep.weighted_sum;
    let norm = |h: &HashMap<(usize, usize), f64>| h.iter().map(|(&k, &v)| (k, v / z)).collect::<HashMap<_, _>>();
    let p_hy: HashMap<_, _> = rep.hybrids.iter().map(|(&k, &v)| (k, v / z)).collect();
    let mut tar_r: HashMap<(usize, usize), f64> = HashMap::new();
    let mut tar_s: HashMap<(usize, usize), f64> = HashMap::new();
    for (&(i, j, h, l), &p) in &p_hy {
        *tar_r.entry((i, j)).or_default() += p;
        *tar_s.entry((h, l)).or_default() += p;
    }
    ExactMarginals {
        structures: rep.structures.iter().map(|(js, w)| (js.clone(), w / z)).collect(),
        bpp_r: norm(&rep.bpp_r),
        bpp_s: norm(&rep.bpp_s),
        bpp_ext: norm(&rep.bpp_ext),
        p_hy,
        tar_r,
        tar_s,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seq::Role;

    fn strands(r: &str, s: &str) -> (Strand, Strand) {
        (Strand::query("r", r).unwrap(), Strand::from_internal("s", s, Role::Target).unwrap())
    }

    #[test]
    fn tiny_counts() {
        let unit = EnergyModel::unit();
        let (r, s) = strands("A", "U");
        assert_eq!(enumerate(&r, &s, &unit, &Limits::default()).unwrap().count, 2);
        let (r, s) = strands("AAA", "UUU");
        let rep = enumerate(&r, &s, &unit, &Limits::default()).unwrap();
        assert_eq!(rep.count, 20);
        assert_eq!(rep.weighted_sum, 20.0);
    }

    #[test]
    fn uniform_marginals() {
        let (r, s) = strands("AAA", "UUU");
        let limits = Limits { keep_structures: true, ..Limits::default() };
        let p = exact_probabilities(&enumerate(&r, &s, &EnergyModel::unit(), &limits).unwrap());
        assert!(p.structures.iter().all(|(_, q)| (q - 0.05).abs() < 1e-15));
        assert!((p.bpp_ext[&(1, 1)] - 0.3).abs() < 1e-15);
        assert!((p.p_hy[&(1, 3, 1, 3)] - 0.1).abs() < 1e-15);
        assert!((p.tar_r[&(1, 1)] - 0.15).abs() < 1e-15);
        assert!((p.tar_r[&(1, 3)] - 0.2).abs() < 1e-15);
        let total: f64 = p.structures.iter().map(|(_, q)| q).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_structure_ensemble() {
        let (r, s) = strands("A", "A");
        let limits = Limits { keep_structures: true, ..Limits::default() };
        let p = exact_probabilities(&enumerate(&r, &s, &EnergyModel::unit(), &limits).unwrap());
        assert_eq!(p.structures.len(), 1);
        assert_eq!(p.structures[0].1, 1.0);
    }

    #[test]
    fn limit_is_reported() {
        let (r, s) = strands("AAAA", "UUUU");
        let limits = Limits { max_structures: 10, keep_structures: false };
        assert!(matches!(
            enumerate(&r, &s, &EnergyModel::unit(), &limits),
            Err(OracleError::LimitExceeded { limit: 10, .. })
        ));
    }

    #[test]
    fn duplicate_free() {
        let (r, s) = strands("GAAACU", "AGUUUC");
        let limits = Limits { keep_structures: true, ..Limits::default() };
        let rep = enumerate(&r, &s, &EnergyModel { min_hairpin: 1, ..EnergyModel::unit() }, &limits).unwrap();
        let set: BTreeSet<_> = rep.structures.iter().map(|(js, _)| js.clone()).collect();
        assert_eq!(set.len(), rep.count);
    }

    #[test]
    fn secondary_counts() {
        let unit = EnergyModel::unit();
        let seq = Strand::query("x", "GGAAACC").unwrap().residues;
        assert_eq!(secondary_structures(&seq, &unit).len(), 6);
    }
}
