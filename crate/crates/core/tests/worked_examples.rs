mod common;

use common::pair;
use jointpf::oracle::{enumerate, Limits};
use jointpf::outside::{hybrid_probabilities, outside};
use jointpf::{inside, Ctx, EnergyModel, EngineConfig, JointKind};

#[test]
fn hybrid_contributions_cover_every_nonempty_structure() {
    // every nonempty structure of AAA/UUU is a single hybrid
    let (r, s) = pair("AAA", "UUU");
    let ins = inside(&r, &s, &EnergyModel::unit(), &EngineConfig::default()).unwrap();
    let hy = hybrid_probabilities(&ins, &outside(&ins));
    let total: f64 = hy.entries().iter().map(|e| e.4).sum();
    assert!((total * ins.q_total - 19.0).abs() < 1e-9);
    assert!((hy.get(1, 3, 1, 3) * 20.0 - 2.0).abs() < 1e-12);
    assert_eq!(ins.tensor(JointKind::HybridPart, Ctx::EE).get(1, 3, 1, 3), 2.0);
}

#[test]
fn nabla_blocks_match_enumeration() {
    let unit = EnergyModel::unit();
    let (r, s) = pair("GAAAC", "UUU");
    let ins = inside(&r, &s, &unit, &EngineConfig::default()).unwrap();
    for h in 1..=3 {
        for l in h..=3 {
            let (rr, ss) = pair("GAAAC", &"U".repeat(l + 1 - h));
            let limits = Limits { keep_structures: true, ..Limits::default() };
            let rep = enumerate(&rr, &ss, &unit, &limits).unwrap();
            let m = l + 1 - h;
            let tight = rep
                .structures
                .iter()
                .filter(|(js, _)| {
                    let ext_s = js.ext_s_positions();
                    js.interior_r.contains(&(1, 5)) && ext_s.contains(&1) && ext_s.contains(&m)
                })
                .count();
            for ctx in Ctx::ALL {
                let v = ins.tensor(JointKind::TightNabla, ctx).get(1, 5, h, l);
                assert_eq!(v, tight as f64, "({h},{l}) in {ctx}");
            }
        }
    }
}

#[test]
fn single_arc_ensemble() {
    let (r, s) = pair("A", "U");
    let ins = inside(&r, &s, &EnergyModel::unit(), &EngineConfig::default()).unwrap();
    assert_eq!(ins.q_total, 2.0);
    let p = outside(&ins);
    assert!((p.bpp_ext[1][1] - 0.5).abs() < 1e-15);
}

#[test]
fn reachable_tables_are_exactly_the_used_ones() {
    let model = EnergyModel { min_hairpin: 1, ..EnergyModel::unit() };
    let (r, s) = pair("GAUCAUGC", "CAUGAUCG");
    let ins = inside(&r, &s, &model, &EngineConfig::default()).unwrap();
    let p = outside(&ins);
    assert_eq!(JointKind::reachable_tables(), 50);
    for kind in JointKind::ALL {
        for ctx in Ctx::ALL {
            if !kind.reachable(ctx) {
                assert!(ins.tensor(kind, ctx).values().is_empty());
                continue;
            }
            let inner = ins.tensor(kind, ctx).values();
            let outer = p.outside.tensor(kind, ctx).values();
            let mass: f64 = inner.iter().zip(outer).map(|(a, b)| a * b).sum();
            assert!(mass > 0.0, "{kind:?} in {ctx} never used");
        }
    }
}
