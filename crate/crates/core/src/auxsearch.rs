//! Quantized probability-simplex enumeration and factored auxiliary chains.
//!
//! Region builders take unions over the input distribution; this module
//! realizes those unions as exhaustive grids with entries that are integer
//! multiples of `1/steps`, plus an optional deterministic hill-climb
//! refinement around a chosen grid point.

use serde::{Deserialize, Serialize};

use crate::channel::Channel;
use crate::error::{Error, Result};
use crate::info::AuxChain;

/// Default cap on the number of enumerated chains before refusing.
pub const DEFAULT_ENUM_CAP: u64 = 100_000_000;

/// Grid-search configuration for the auxiliary-chain union.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Simplex quantization: entries are multiples of `1/steps`.
    pub steps: usize,
    pub q1_size: usize,
    pub u1_size: usize,
    pub u2_size: usize,
    /// Restrict the channel-input maps `P(x1|u1)`, `P(x2|u2)` to
    /// deterministic maps (pinned to the identity when sizes match).
    pub det_maps: bool,
    pub refine_rounds: usize,
    pub refine_radius: f64,
    /// Refuses enumerations with more chains than this.
    pub cap: u64,
}

impl GridSpec {
    /// Defaults for a channel: auxiliary alphabets matching the channel
    /// input alphabets, stochastic input maps, no refinement.
    pub fn for_channel(ch: &Channel, steps: usize) -> Self {
        GridSpec {
            steps,
            q1_size: ch.x1_size(),
            u1_size: ch.x1_size(),
            u2_size: ch.x2_size(),
            det_maps: false,
            refine_rounds: 0,
            refine_radius: 0.25,
            cap: DEFAULT_ENUM_CAP,
        }
    }

    pub fn with_sizes(mut self, q1: usize, u1: usize, u2: usize) -> Self {
        self.q1_size = q1;
        self.u1_size = u1;
        self.u2_size = u2;
        self
    }
}

/// Number of grid points on the `dim`-simplex with step `1/steps`:
/// `C(steps + dim - 1, dim - 1)`.
pub fn simplex_grid_count(dim: usize, steps: usize) -> u128 {
    binomial(steps as u128 + dim as u128 - 1, dim as u128 - 1)
}

fn binomial(n: u128, k: u128) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// All distributions over `dim` outcomes whose entries are multiples of
/// `1/steps`, in lexicographic order. Deterministic.
pub fn simplex_grid(dim: usize, steps: usize) -> Vec<Vec<f64>> {
    assert!(dim >= 1 && steps >= 1);
    let mut out = Vec::with_capacity(simplex_grid_count(dim, steps) as usize);
    let mut counts = vec![0usize; dim];
    fill_compositions(&mut counts, 0, steps, steps, &mut out);
    out
}

fn fill_compositions(
    counts: &mut [usize],
    pos: usize,
    remaining: usize,
    steps: usize,
    out: &mut Vec<Vec<f64>>,
) {
    if pos == counts.len() - 1 {
        counts[pos] = remaining;
        out.push(counts.iter().map(|&c| c as f64 / steps as f64).collect());
        return;
    }
    for c in 0..=remaining {
        counts[pos] = c;
        fill_compositions(counts, pos + 1, remaining - c, steps, out);
    }
}

fn identity_matrix(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| {
            let mut row = vec![0.0; n];
            row[i] = 1.0;
            row
        })
        .collect()
}

fn one_hot_rows(dim: usize) -> Vec<Vec<f64>> {
    identity_matrix(dim)
}

/// The set of stochastic matrices a channel-input map may range over.
enum MapChoices {
    /// Rows chosen independently from a common row grid.
    RowProduct { rows: Vec<Vec<f64>>, nrows: usize },
    /// A single fixed matrix (the identity map).
    Fixed(Vec<Vec<f64>>),
}

impl MapChoices {
    fn count(&self) -> u128 {
        match self {
            MapChoices::RowProduct { rows, nrows } => {
                (rows.len() as u128).saturating_pow(*nrows as u32)
            }
            MapChoices::Fixed(_) => 1,
        }
    }

    fn at(&self, mut idx: u64) -> Vec<Vec<f64>> {
        match self {
            MapChoices::RowProduct { rows, nrows } => {
                let base = rows.len() as u64;
                let mut out = vec![Vec::new(); *nrows];
                for r in (0..*nrows).rev() {
                    out[r] = rows[(idx % base) as usize].clone();
                    idx /= base;
                }
                out
            }
            MapChoices::Fixed(m) => m.clone(),
        }
    }

    /// Like `at`, but copying into preallocated rows.
    fn fill_at(&self, mut idx: u64, out: &mut [Vec<f64>]) {
        match self {
            MapChoices::RowProduct { rows, nrows } => {
                let base = rows.len() as u64;
                for r in (0..*nrows).rev() {
                    out[r].copy_from_slice(&rows[(idx % base) as usize]);
                    idx /= base;
                }
            }
            MapChoices::Fixed(m) => {
                for (dst, src) in out.iter_mut().zip(m) {
                    dst.copy_from_slice(src);
                }
            }
        }
    }
}

/// Exhaustive, indexable enumeration of auxiliary chains over the grid.
///
/// The enumeration is the Cartesian product of per-factor grids: `P(Q1)`,
/// the `q1_size` rows of `P(U1|Q1)`, `P(U2)`, and the channel-input maps
/// `P(X1|U1)` and `P(X2|U2)`, with the `P(Q1)` choice varying slowest.
/// `chain_at(i)` is pure, so callers may scan indices in parallel;
/// aggregation over chains must stay order-independent.
pub struct AuxChainEnum {
    q1_size: usize,
    u1_size: usize,
    u2_size: usize,
    q1_grid: Vec<Vec<f64>>,
    u1_row_grid: Vec<Vec<f64>>,
    u2_grid: Vec<Vec<f64>>,
    x1_maps: MapChoices,
    x2_maps: MapChoices,
    total: u64,
}

impl AuxChainEnum {
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn q1_size(&self) -> usize {
        self.q1_size
    }

    pub fn u1_size(&self) -> usize {
        self.u1_size
    }

    pub fn u2_size(&self) -> usize {
        self.u2_size
    }

    /// Decodes the chain at a mixed-radix index in `[0, total)`.
    pub fn chain_at(&self, index: u64) -> AuxChain {
        debug_assert!(index < self.total);
        let mut rem = index;
        // fastest-varying factors peel off first
        let x2_idx = rem % self.x2_maps.count() as u64;
        rem /= self.x2_maps.count() as u64;
        let x1_idx = rem % self.x1_maps.count() as u64;
        rem /= self.x1_maps.count() as u64;
        let u2_idx = (rem % self.u2_grid.len() as u64) as usize;
        rem /= self.u2_grid.len() as u64;
        let mut u1_rows_idx = vec![0usize; self.q1_size];
        for q1 in (0..self.q1_size).rev() {
            u1_rows_idx[q1] = (rem % self.u1_row_grid.len() as u64) as usize;
            rem /= self.u1_row_grid.len() as u64;
        }
        let q1_idx = (rem % self.q1_grid.len() as u64) as usize;
        AuxChain {
            q1_size: self.q1_size,
            u1_size: self.u1_size,
            u2_size: self.u2_size,
            pmf_q1: self.q1_grid[q1_idx].clone(),
            pmf_u1_given_q1: u1_rows_idx
                .iter()
                .map(|&i| self.u1_row_grid[i].clone())
                .collect(),
            pmf_u2: self.u2_grid[u2_idx].clone(),
            pmf_x1_given_u1: self.x1_maps.at(x1_idx),
            pmf_x2_given_u2: self.x2_maps.at(x2_idx),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = AuxChain> + '_ {
        (0..self.total).map(move |i| self.chain_at(i))
    }

    /// Decodes the chain at `index` into a preallocated chain of matching
    /// shape (see [`AuxChainEnum::chain_at`]); the hot path for grid scans.
    pub fn fill_chain(&self, index: u64, out: &mut AuxChain) {
        debug_assert!(index < self.total);
        let mut rem = index;
        let x2_idx = rem % self.x2_maps.count() as u64;
        rem /= self.x2_maps.count() as u64;
        let x1_idx = rem % self.x1_maps.count() as u64;
        rem /= self.x1_maps.count() as u64;
        let u2_idx = (rem % self.u2_grid.len() as u64) as usize;
        rem /= self.u2_grid.len() as u64;
        self.x2_maps.fill_at(x2_idx, &mut out.pmf_x2_given_u2);
        self.x1_maps.fill_at(x1_idx, &mut out.pmf_x1_given_u1);
        out.pmf_u2.copy_from_slice(&self.u2_grid[u2_idx]);
        for q1 in (0..self.q1_size).rev() {
            let row = (rem % self.u1_row_grid.len() as u64) as usize;
            rem /= self.u1_row_grid.len() as u64;
            out.pmf_u1_given_q1[q1].copy_from_slice(&self.u1_row_grid[row]);
        }
        out.pmf_q1
            .copy_from_slice(&self.q1_grid[(rem % self.q1_grid.len() as u64) as usize]);
    }
}

fn map_choices(det: bool, from: usize, to: usize, steps: usize) -> MapChoices {
    if det {
        if from == to {
            MapChoices::Fixed(identity_matrix(to))
        } else {
            MapChoices::RowProduct {
                rows: one_hot_rows(to),
                nrows: from,
            }
        }
    } else {
        MapChoices::RowProduct {
            rows: simplex_grid(to, steps),
            nrows: from,
        }
    }
}

/// Builds the exhaustive chain enumeration for a grid spec over a channel.
///
/// Refuses with a count-carrying error when the product of per-factor grid
/// sizes exceeds `spec.cap`.
pub fn enumerate_aux_chains(spec: &GridSpec, ch: &Channel) -> Result<AuxChainEnum> {
    if spec.steps < 1 || spec.q1_size < 1 || spec.u1_size < 1 || spec.u2_size < 1 {
        return Err(Error::Validation("grid spec sizes must be >= 1".into()));
    }
    let q1_grid = simplex_grid(spec.q1_size, spec.steps);
    let u1_row_grid = simplex_grid(spec.u1_size, spec.steps);
    let u2_grid = simplex_grid(spec.u2_size, spec.steps);
    let x1_maps = map_choices(spec.det_maps, spec.u1_size, ch.x1_size(), spec.steps);
    let x2_maps = map_choices(spec.det_maps, spec.u2_size, ch.x2_size(), spec.steps);

    let mut count: u128 = q1_grid.len() as u128;
    count = count.saturating_mul((u1_row_grid.len() as u128).saturating_pow(spec.q1_size as u32));
    count = count.saturating_mul(u2_grid.len() as u128);
    count = count.saturating_mul(x1_maps.count());
    count = count.saturating_mul(x2_maps.count());
    if count > spec.cap as u128 {
        return Err(Error::GridGuard {
            count,
            cap: spec.cap,
        });
    }
    Ok(AuxChainEnum {
        q1_size: spec.q1_size,
        u1_size: spec.u1_size,
        u2_size: spec.u2_size,
        q1_grid,
        u1_row_grid,
        u2_grid,
        x1_maps,
        x2_maps,
        total: count as u64,
    })
}

/// Deterministic local refinement: hill-climbs `objective` from `best` by
/// shifting probability mass `refine_radius * r` between coordinate pairs of
/// every factor row, halving `r` each round. Never returns a chain worse
/// than the input.
pub fn refine_around<F>(best: &AuxChain, spec: &GridSpec, objective: F) -> AuxChain
where
    F: Fn(&AuxChain) -> f64,
{
    let mut current = best.clone();
    let mut value = objective(&current);
    let mut radius = spec.refine_radius;
    for _ in 0..spec.refine_rounds {
        for slot in 0..row_slots(&current) {
            let dim = row_of(&current, slot).len();
            if dim < 2 {
                continue;
            }
            for i in 0..dim {
                for j in 0..dim {
                    if i == j {
                        continue;
                    }
                    let mut cand = current.clone();
                    {
                        let row = row_of_mut(&mut cand, slot);
                        let delta = radius.min(row[j]);
                        if delta <= 0.0 {
                            continue;
                        }
                        row[i] += delta;
                        row[j] -= delta;
                    }
                    let v = objective(&cand);
                    if v > value {
                        value = v;
                        current = cand;
                    }
                }
            }
        }
        radius *= 0.5;
    }
    current
}

fn row_slots(aux: &AuxChain) -> usize {
    2 + aux.q1_size + aux.u1_size + aux.u2_size
}

fn row_of(aux: &AuxChain, slot: usize) -> &[f64] {
    let mut s = slot;
    if s == 0 {
        return &aux.pmf_q1;
    }
    s -= 1;
    if s < aux.q1_size {
        return &aux.pmf_u1_given_q1[s];
    }
    s -= aux.q1_size;
    if s == 0 {
        return &aux.pmf_u2;
    }
    s -= 1;
    if s < aux.u1_size {
        return &aux.pmf_x1_given_u1[s];
    }
    s -= aux.u1_size;
    &aux.pmf_x2_given_u2[s]
}

fn row_of_mut(aux: &mut AuxChain, slot: usize) -> &mut Vec<f64> {
    let mut s = slot;
    if s == 0 {
        return &mut aux.pmf_q1;
    }
    s -= 1;
    if s < aux.q1_size {
        return &mut aux.pmf_u1_given_q1[s];
    }
    s -= aux.q1_size;
    if s == 0 {
        return &mut aux.pmf_u2;
    }
    s -= 1;
    if s < aux.u1_size {
        return &mut aux.pmf_x1_given_u1[s];
    }
    s -= aux.u1_size;
    &mut aux.pmf_x2_given_u2[s]
}
