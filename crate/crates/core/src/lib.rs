//! Partition function, outside probabilities and Boltzmann sampling for
//! RNA-RNA joint interaction structures.

pub mod energy;
pub mod grammar;
pub mod oracle;
pub mod report;
pub mod outside;
pub mod sampler;
pub mod secfold;
pub mod seq;
pub mod tensor;

pub use energy::{Ctx, EnergyModel, LoopCtx};
pub use grammar::{inside, memory_estimate, EngineConfig, InsideError, InsideResult, JointKind};
pub use seq::{extract_hybrids, is_zigzag_free, validate, Hybrid, JointStructure, Role, Strand, ValidityReport};
