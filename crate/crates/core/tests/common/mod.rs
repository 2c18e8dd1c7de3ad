#![allow(dead_code)]

use jointpf::seq::Role;
use jointpf::{EnergyModel, Strand};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn random_seq(rng: &mut ChaCha8Rng, len: usize) -> String {
    (0..len).map(|_| b"ACGU"[rng.gen_range(0..4)] as char).collect()
}

/// AU-rich sequences admit the most intermolecular pairs.
pub fn au_rich_seq(rng: &mut ChaCha8Rng, len: usize) -> String {
    (0..len).map(|_| b"AUAUAUG"[rng.gen_range(0..7)] as char).collect()
}

/// Strands with `s` given in internal order.
pub fn pair(r: &str, s: &str) -> (Strand, Strand) {
    (Strand::query("r", r).unwrap(), Strand::from_internal("s", s, Role::Target).unwrap())
}

/// Every parameter drawn at random, so that no feature is priced at zero.
pub fn random_model(rng: &mut ChaCha8Rng, min_hairpin: usize) -> EnergyModel {
    let mut u = || rng.gen_range(-1.0..1.5);
    let mut m = EnergyModel { min_hairpin, rt: 1.0, ..EnergyModel::default() };
    m.hairpin = (0..12).map(|_| u()).collect();
    m.interior = (0..12).map(|_| u()).collect();
    m.interior_asym = u();
    for row in m.stack.iter_mut() {
        for x in row.iter_mut() {
            *x = u();
        }
    }
    for x in m.exterior_arc.iter_mut() {
        *x = u();
    }
    m.multi_init = u();
    m.multi_branch = u();
    m.multi_unpaired = u();
    m.kiss_init = u();
    m.kiss_branch = u();
    m.kiss_unpaired = u();
    m.sigma0 = u();
    m.sigma = u();
    m.beta3 = u();
    m
}
