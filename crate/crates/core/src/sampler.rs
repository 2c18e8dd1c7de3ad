//! Stochastic traceback through the inside tables.
//!
//! Pending components wait in stack A; each is replaced by one of its terms,
//! drawn with probability `term / value`. Arcs emitted along the way collect
//! in stack B. Components are taken from the bottom of stack A.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::grammar::{Cell, Emit, InsideResult};
use crate::seq::JointStructure;

/// Largest tolerated relative gap between a cell's value and the sum of its terms.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error, PartialEq)]
pub enum SampleError {
    #[error("cases of {cell} sum to {sum:e}, table holds {value:e}")]
    NumericalUnderflow { cell: String, sum: f64, value: f64 },
    #[error("sample count must be at least 1")]
    ZeroCount,
    #[error("draw {index}: {source}")]
    Draw {
        index: usize,
        #[source]
        source: Box<SampleError>,
    },
}

#[derive(Clone, Debug)]
pub struct SampleBatch {
    pub structures: Vec<JointStructure>,
    pub seed: u64,
    pub fingerprint: String,
    pub draws: usize,
}

/// Random stream of draw `index` of a batch seeded with `seed`.
pub fn draw_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

pub fn sample_one<G: Rng + ?Sized>(ins: &InsideResult, rng: &mut G) -> Result<JointStructure, SampleError> {
    let g = ins.grammar();
    let mut stack_a = VecDeque::from([Cell::Root]);
    let mut stack_b: Vec<Emit> = Vec::new();
    while let Some(cell) = stack_a.pop_front() {
        let value = ins.value(cell);
        let target = rng.gen::<f64>() * value;
        let mut acc = 0.0;
        let mut chosen: Option<(Vec<Cell>, Vec<Emit>)> = None;
        let mut last: Option<(Vec<Cell>, Vec<Emit>)> = None;
        g.terms(cell, &mut |coef, ops, emits| {
            let mut t = coef;
            for &op in ops {
                t *= ins.value(op);
            }
            if t <= 0.0 {
                return;
            }
            acc += t;
            if chosen.is_none() {
                if acc > target {
                    chosen = Some((ops.to_vec(), emits.to_vec()));
                } else {
                    last = Some((ops.to_vec(), emits.to_vec()));
                }
            }
        });
        if value.is_nan() || value <= 0.0 || (acc - value).abs() > NORMALIZATION_TOLERANCE * value {
            return Err(SampleError::NumericalUnderflow { cell: format!("{cell:?}"), sum: acc, value });
        }
        // rounding can leave target a hair above the final prefix sum
        let (ops, emits) = chosen.or(last).expect("a positive cell has a positive term");
        stack_a.extend(ops);
        stack_b.extend(emits);
    }
    let mut ir = Vec::new();
    let mut is = Vec::new();
    let mut ext = Vec::new();
    for e in stack_b {
        match e {
            Emit::R(i, j) => ir.push((i, j)),
            Emit::S(h, l) => is.push((h, l)),
            Emit::Ext(i, h) => ext.push((i, h)),
        }
    }
    Ok(JointStructure::new(ins.n(), ins.m(), ir, is, ext))
}

/// `n` independent draws; draw `k` uses stream `k` of `seed`, so the batch does
/// not depend on how draws are spread over threads.
pub fn sample_batch(ins: &InsideResult, n: usize, seed: u64) -> Result<SampleBatch, SampleError> {
    if n == 0 {
        return Err(SampleError::ZeroCount);
    }
    let structures = (0..n)
        .into_par_iter()
        .map(|k| {
            sample_one(ins, &mut draw_rng(seed, k))
                .map_err(|e| SampleError::Draw { index: k, source: Box::new(e) })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SampleBatch { structures, seed, fingerprint: ins.weights.model.fingerprint(), draws: n })
}
