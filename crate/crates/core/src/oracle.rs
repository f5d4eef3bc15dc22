//! Exact answers on very small graphs by exhausting all 2^m edge
//! configurations: the distribution of the component size containing a
//! chosen vertex, and the exact probability of any census predicate. The
//! enumeration uses its own bitmask flood fill rather than the union-find
//! in [`crate::components`], so the two paths can cross-check each other.

use crate::components::ComponentCensus;
use crate::error::{Error, Result};
use crate::probmodel::{pair_count, AlphaDescriptor, ModelDescriptor};

/// Largest vertex count accepted by the plain constructor (2^15 configs).
pub const MAX_EXACT_N: u64 = 6;
/// Absolute ceiling, reachable only through the explicit override
/// constructor (2^21 configs).
pub const MAX_EXACT_N_OVERRIDE: u64 = 7;

/// An explicit per-pair probability table on n vertices, stored in
/// colexicographic pair order (the same layout the descriptor uses).
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ProbTable {
    n: u64,
    probs: Vec<f64>,
}

impl ProbTable {
    /// A table on 2..=6 vertices. `probs` holds one probability per pair in
    /// colexicographic order.
    pub fn new(n: u64, probs: Vec<f64>) -> Result<Self> {
        if n > MAX_EXACT_N {
            return Err(Error::EnumerationTooLarge { n, cap: MAX_EXACT_N });
        }
        Self::validated(n, probs)
    }

    /// Like [`ProbTable::new`] but additionally admits n = 7, whose
    /// enumeration visits 2^21 configurations. The separate constructor
    /// makes the cost opt-in.
    pub fn new_with_n7_override(n: u64, probs: Vec<f64>) -> Result<Self> {
        if n > MAX_EXACT_N_OVERRIDE {
            return Err(Error::EnumerationTooLarge {
                n,
                cap: MAX_EXACT_N_OVERRIDE,
            });
        }
        Self::validated(n, probs)
    }

    fn validated(n: u64, probs: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::BadTable {
                msg: format!("need at least 2 vertices, got {n}"),
            });
        }
        let expect = pair_count(n) as usize;
        if probs.len() != expect {
            return Err(Error::BadTable {
                msg: format!(
                    "table for n = {n} needs {expect} probabilities, got {}",
                    probs.len()
                ),
            });
        }
        if let Some(&bad) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::BadTable {
                msg: format!("probability {bad} outside [0, 1]"),
            });
        }
        Ok(Self { n, probs })
    }

    /// A table with the same probability on every pair.
    pub fn homogeneous(n: u64, p: f64) -> Result<Self> {
        let len = if n >= 2 { pair_count(n) as usize } else { 0 };
        Self::new(n, vec![p; len])
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn min_p(&self) -> f64 {
        self.probs.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_p(&self) -> f64 {
        self.probs.iter().copied().fold(0.0, f64::max)
    }

    /// The equivalent sampling-model descriptor (band parameters derived
    /// from the table extremes).
    pub fn descriptor(&self) -> ModelDescriptor {
        ModelDescriptor::CustomTable {
            n: self.n,
            probs: self.probs.clone(),
            c: None,
            alpha: None::<AlphaDescriptor>,
        }
    }
}

/// Compensated (Kahan) accumulator for sums of many small products.
struct Kahan {
    sum: f64,
    carry: f64,
}

impl Kahan {
    fn new() -> Self {
        Self {
            sum: 0.0,
            carry: 0.0,
        }
    }

    fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }
}

/// Visit every edge configuration of the table with its exact probability
/// and census. The census is rebuilt in place with the same label
/// convention as [`crate::components::components`]: labels are descending
/// size ranks with first-appearance tie-breaks.
fn enumerate_configs<F: FnMut(f64, &ComponentCensus)>(table: &ProbTable, mut visit: F) {
    let n = table.n as usize;
    let m = table.probs.len();
    let pairs: Vec<(usize, usize)> = {
        let mut v = Vec::with_capacity(m);
        for j in 1..n {
            for i in 0..j {
                v.push((i, j));
            }
        }
        v
    };
    let mut census = ComponentCensus {
        n: table.n,
        comp_id: vec![0; n],
        sizes: Vec::with_capacity(n),
    };
    let mut nbr = [0u8; 8];
    let (mut comp_of, mut size_at, mut order) = ([0u8; 8], [0u8; 8], [0u8; 8]);
    for mask in 0u32..(1u32 << m) {
        // Exact configuration probability: plain product of per-edge terms.
        let mut prob = 1.0f64;
        nbr[..n].fill(0);
        for (e, &(a, b)) in pairs.iter().enumerate() {
            if mask >> e & 1 == 1 {
                prob *= table.probs[e];
                nbr[a] |= 1 << b;
                nbr[b] |= 1 << a;
            } else {
                prob *= 1.0 - table.probs[e];
            }
        }
        // Bitmask flood fill in vertex order.
        let mut visited = 0u8;
        let mut ncomp = 0usize;
        for v in 0..n {
            if visited >> v & 1 == 1 {
                continue;
            }
            let mut comp = 1u8 << v;
            loop {
                let mut grow = comp;
                let mut rest = comp;
                while rest != 0 {
                    grow |= nbr[rest.trailing_zeros() as usize];
                    rest &= rest - 1;
                }
                if grow == comp {
                    break;
                }
                comp = grow;
            }
            visited |= comp;
            size_at[ncomp] = comp.count_ones() as u8;
            let mut rest = comp;
            while rest != 0 {
                comp_of[rest.trailing_zeros() as usize] = ncomp as u8;
                rest &= rest - 1;
            }
            ncomp += 1;
        }
        // Rank labels by descending size, stable in appearance order.
        for (r, slot) in order[..ncomp].iter_mut().enumerate() {
            *slot = r as u8;
        }
        order[..ncomp].sort_by_key(|&lbl| std::cmp::Reverse(size_at[lbl as usize]));
        let mut rank_of = [0u8; 8];
        for (rank, &lbl) in order[..ncomp].iter().enumerate() {
            rank_of[lbl as usize] = rank as u8;
        }
        census.sizes.clear();
        census
            .sizes
            .extend(order[..ncomp].iter().map(|&lbl| size_at[lbl as usize] as u64));
        for v in 0..n {
            census.comp_id[v] = rank_of[comp_of[v] as usize] as u32;
        }
        visit(prob, &census);
    }
}

/// Exact distribution of the size of the component containing `vertex`
/// (1-based): entry r-1 is the probability the component has exactly r
/// vertices.
pub fn exact_component_law(table: &ProbTable, vertex: u64) -> Result<Vec<f64>> {
    if vertex < 1 || vertex > table.n {
        return Err(Error::BadVertex {
            n: table.n,
            v: vertex,
        });
    }
    let mut law: Vec<Kahan> = (0..table.n).map(|_| Kahan::new()).collect();
    enumerate_configs(table, |prob, census| {
        law[census.size_of(vertex) as usize - 1].add(prob);
    });
    Ok(law.into_iter().map(|k| k.sum).collect())
}

/// Exact probability that the component census satisfies `predicate`.
pub fn exact_event_prob(
    table: &ProbTable,
    predicate: &dyn Fn(&ComponentCensus) -> bool,
) -> Result<f64> {
    let mut acc = Kahan::new();
    enumerate_configs(table, |prob, census| {
        if predicate(census) {
            acc.add(prob);
        }
    });
    Ok(acc.sum)
}
