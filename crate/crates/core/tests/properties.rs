mod common;

use common::pair;
use jointpf::outside::{hybrid_probabilities, outside, target_sites};
use jointpf::sampler::{draw_rng, sample_one};
use jointpf::{inside, validate, EnergyModel, EngineConfig};
use proptest::prelude::*;

fn seq(max: usize) -> impl Strategy<Value = String> {
    proptest::collection::vec(prop::sample::select(vec!['A', 'C', 'G', 'U']), 1..=max)
        .prop_map(|v| v.into_iter().collect())
}

fn model() -> impl Strategy<Value = EnergyModel> {
    (0usize..=3, -1.0f64..2.0, -1.0f64..2.0, 0.0f64..1.0).prop_map(|(hp, ext, sigma0, beta3)| EnergyModel {
        min_hairpin: hp,
        exterior_arc: [ext; 6],
        sigma0,
        beta3,
        ..EnergyModel::default()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn probabilities_are_consistent(r in seq(9), s in seq(9), m in model()) {
        let (rs, ss) = pair(&r, &s);
        let ins = inside(&rs, &ss, &m, &EngineConfig::default()).unwrap();
        prop_assert!(ins.q_total >= ins.q_r() * ins.q_s() * (1.0 - 1e-12));
        let p = outside(&ins);
        prop_assert!(p.tpf_max_deviation < 1e-9);
        let (n, mm) = (rs.len(), ss.len());
        // each position pairs at most once
        for i in 1..=n {
            let row: f64 = (1..=n).map(|j| p.bpp_r[i.min(j)][i.max(j)]).sum::<f64>()
                + (1..=mm).map(|h| p.bpp_ext[i][h]).sum::<f64>();
            prop_assert!(row <= 1.0 + 1e-9, "R position {} pairs with probability {}", i, row);
        }
        for h in 1..=mm {
            let row: f64 = (1..=mm).map(|l| p.bpp_s[h.min(l)][h.max(l)]).sum::<f64>()
                + (1..=n).map(|i| p.bpp_ext[i][h]).sum::<f64>();
            prop_assert!(row <= 1.0 + 1e-9);
        }
        // each position lies in at most one hybrid
        let hy = hybrid_probabilities(&ins, &p);
        let mut cover = vec![0.0; n + 1];
        for (i, j, _, _, x) in hy.entries() {
            prop_assert!((-1e-12..=1.0 + 1e-9).contains(&x));
            for c in cover.iter_mut().take(j + 1).skip(i) {
                *c += x;
            }
        }
        prop_assert!(cover.iter().all(|&c| c <= 1.0 + 1e-9));
        let t = target_sites(&hy, 0.0);
        prop_assert!(t.rows.windows(2).all(|w| w[0].probability >= w[1].probability));
        prop_assert_eq!(t.p_opt, t.rows.first().copied());
    }

    #[test]
    fn samples_are_valid(r in seq(10), s in seq(10), m in model(), seed in any::<u64>()) {
        let (rs, ss) = pair(&r, &s);
        let ins = inside(&rs, &ss, &m, &EngineConfig::default()).unwrap();
        for k in 0..20 {
            let js = sample_one(&ins, &mut draw_rng(seed, k)).unwrap();
            prop_assert!(validate(&js, m.min_hairpin).is_valid());
        }
    }

    #[test]
    fn swapping_strands_preserves_the_partition_function(r in seq(7), s in seq(7), m in model()) {
        // R 5'->3' against S indexed from its 3' end is the mirror image of S
        // 5'->3' against R indexed from its 3' end
        let rev = |x: &str| x.chars().rev().collect::<String>();
        let (a1, b1) = pair(&r, &s);
        let (a2, b2) = pair(&rev(&s), &rev(&r));
        let cfg = EngineConfig::default();
        let q1 = inside(&a1, &b1, &m, &cfg).unwrap().q_total;
        let q2 = inside(&a2, &b2, &m, &cfg).unwrap().q_total;
        prop_assert!((q1 - q2).abs() <= 1e-9 * q1);
    }
}
