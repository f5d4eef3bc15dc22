//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("vertex pair ({i}, {j}) is not a valid edge for n = {n}")]
    BadEdge { n: u64, i: u64, j: u64 },

    #[error("vertex {v} out of range 1..={n}")]
    BadVertex { n: u64, v: u64 },

    #[error("band upper edge (C + alpha_n)/n = {p_u} exceeds 1 at n = {n}: n too small for this model")]
    InfeasibleBand { n: u64, p_u: f64 },

    #[error("{name} = {value} violates requirement: {requirement}")]
    BadParam {
        name: &'static str,
        value: f64,
        requirement: &'static str,
    },

    #[error("{op} is undefined at C = 1 (delta(1) = 0)")]
    CriticalC { op: &'static str },

    #[error("delta_{which} = {value} is not positive: series/bound diverges for these (C, epsilon, omega)")]
    DivergentSeries { which: u8, value: f64 },

    #[error("M = {m} gives M*delta_0 = {m_delta0} < 1: bound n^(1 - M*delta_0) grows with n (vacuous)")]
    VacuousBound { m: f64, m_delta0: f64 },

    #[error("exact enumeration capped at n = {cap}, got n = {n}")]
    EnumerationTooLarge { n: u64, cap: u64 },

    #[error("probability table: {msg}")]
    BadTable { msg: String },

    #[error("model descriptor: {msg}")]
    BadDescriptor { msg: String },
}
