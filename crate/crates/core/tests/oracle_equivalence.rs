#![allow(clippy::needless_range_loop)]

mod common;

use common::{pair, random_model, random_seq};
use jointpf::oracle::{enumerate, Limits};
use jointpf::{inside, EnergyModel, EngineConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn compare(r: &str, s: &str, model: &EnergyModel) {
    let (rs, ss) = pair(r, s);
    let q = inside(&rs, &ss, model, &EngineConfig::default()).unwrap().q_total;
    let o = enumerate(&rs, &ss, model, &Limits::default()).unwrap().weighted_sum;
    assert!((q - o).abs() <= 1e-9 * o.abs(), "{r}/{s}: grammar {q} vs enumeration {o}");
}

#[test]
fn counts_match_small_examples() {
    let unit = EnergyModel::unit();
    for (r, s) in [("AAA", "UUU"), ("GAAAC", "GAAAC"), ("GGAAACC", "GGUUUCC"), ("GCAUGC", "GCAUGC")] {
        compare(r, s, &unit);
    }
}

#[test]
fn counts_match_random_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for hp in [1, 3] {
        let model = EnergyModel { min_hairpin: hp, ..EnergyModel::unit() };
        for _ in 0..25 {
            let (n, m) = (rng.gen_range(1..=7), rng.gen_range(1..=7));
            let (r, s) = (random_seq(&mut rng, n), random_seq(&mut rng, m));
            compare(&r, &s, &model);
        }
    }
}

#[test]
fn weights_match_random_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let model = EnergyModel { min_hairpin: 1, ..EnergyModel::default() };
    for _ in 0..25 {
        let (n, m) = (rng.gen_range(1..=7), rng.gen_range(1..=7));
        let (r, s) = (random_seq(&mut rng, n), random_seq(&mut rng, m));
        compare(&r, &s, &model);
    }
}

#[test]
fn weights_match_random_models() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for k in 0..30 {
        let model = random_model(&mut rng, 1 + k % 2);
        let (n, m) = (rng.gen_range(4..=8), rng.gen_range(4..=8));
        let (r, s) = (random_seq(&mut rng, n), random_seq(&mut rng, m));
        compare(&r, &s, &model);
    }
}

#[test]
fn kissing_rich_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let model = random_model(&mut rng, 1);
    for (r, s) in [("GAUCAUG", "CAUGAUC"), ("GGAUUCC", "GGAAUCC"), ("AUAUAUAU", "UAUAUAUA"), ("GCGAUCGC", "GCGAUCGC")] {
        compare(r, s, &model);
        compare(r, s, &EnergyModel { min_hairpin: 1, ..EnergyModel::unit() });
    }
}

fn compare_marginals(r: &str, s: &str, model: &EnergyModel) {
    use jointpf::oracle::exact_probabilities;
    use jointpf::outside::{hybrid_probabilities, outside};
    let (rs, ss) = pair(r, s);
    let ins = inside(&rs, &ss, model, &EngineConfig::default()).unwrap();
    let p = outside(&ins);
    let hy = hybrid_probabilities(&ins, &p);
    let ex = exact_probabilities(&enumerate(&rs, &ss, model, &Limits::default()).unwrap());
    let (n, m) = (rs.len(), ss.len());
    let get = |t: &std::collections::HashMap<(usize, usize), f64>, a, b| t.get(&(a, b)).copied().unwrap_or(0.0);
    let tol = 1e-9;
    assert!(p.tpf_max_deviation < tol, "{r}/{s}: tpf {}", p.tpf_max_deviation);
    for i in 1..=n {
        for j in 1..=n {
            assert!((p.bpp_r[i][j] - get(&ex.bpp_r, i, j)).abs() < tol, "{r}/{s}: bpp_r {i},{j}");
        }
        for h in 1..=m {
            assert!((p.bpp_ext[i][h] - get(&ex.bpp_ext, i, h)).abs() < tol, "{r}/{s}: bpp_ext {i},{h}");
        }
    }
    for h in 1..=m {
        for l in 1..=m {
            assert!((p.bpp_s[h][l] - get(&ex.bpp_s, h, l)).abs() < tol, "{r}/{s}: bpp_s {h},{l}");
        }
    }
    let (tr, ts) = (hy.target_r(), hy.target_s());
    for i in 1..=n {
        for j in i..=n {
            assert!((tr[i][j] - get(&ex.tar_r, i, j)).abs() < tol, "{r}/{s}: tar_r {i},{j}");
            for h in 1..=m {
                for l in h..=m {
                    let e = ex.p_hy.get(&(i, j, h, l)).copied().unwrap_or(0.0);
                    assert!((hy.get(i, j, h, l) - e).abs() < tol, "{r}/{s}: p_hy {i},{j},{h},{l}");
                }
            }
        }
    }
    for h in 1..=m {
        for l in h..=m {
            assert!((ts[h][l] - get(&ex.tar_s, h, l)).abs() < tol, "{r}/{s}: tar_s {h},{l}");
        }
    }
}

#[test]
fn marginals_match_random_models() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for k in 0..25 {
        let model = random_model(&mut rng, 1 + k % 2);
        let (n, m) = (rng.gen_range(3..=6), rng.gen_range(3..=6));
        let (r, s) = (random_seq(&mut rng, n), random_seq(&mut rng, m));
        compare_marginals(&r, &s, &model);
    }
    compare_marginals("AAA", "UUU", &EnergyModel::unit());
    compare_marginals("GAUCAUG", "CAUGAUC", &EnergyModel { min_hairpin: 1, ..EnergyModel::unit() });
}
