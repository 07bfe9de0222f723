//! Achievable rate-equivocation regions for the wire-tap channel with a
//! helping interferer.
//!
//! Every region here is an inner bound evaluated at a finite grid of
//! auxiliary-chain distributions: per chain the closed-form rate and
//! equivocation caps are turned into extreme points of
//! `{0 <= Re <= R1 <= A, Re <= B}`, the points are unioned over the grid,
//! and the final polygon is the convex hull (time sharing). Nothing in this
//! module claims capacity.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::auxsearch::{enumerate_aux_chains, AuxChainEnum, GridSpec};
use crate::channel::Channel;
use crate::error::{Error, Result};
use crate::hull::{diagonal_max, hull2d, hull_subset, max_hull_violation};
use crate::info::{compose_joint, AuxChain, EntropyTable, JointDist, Var};

/// Number of evenly spaced common-rate slices kept for the three-rate
/// broadcast regions, endpoints included.
pub const BCC_SLICES: usize = 17;

/// Bitmasks of the reduced region catalog `(Q1, U1, U2, Y, Z[, Y1])`.
const MQ1: u32 = 1 << 0;
const MU1: u32 = 1 << 1;
const MU2: u32 = 1 << 2;
const MY: u32 = 1 << 3;
const MZ: u32 = 1 << 4;
const MY1: u32 = 1 << 5;

/// An achievable rate-equivocation pair in bits per channel use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub r1: f64,
    pub re: f64,
}

/// Descriptive metadata attached to every computed region.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegionMeta {
    pub formula: String,
    pub grid: Option<GridSpec>,
    pub channel_digest: String,
    /// Set when the underlying region statement is a conjecture rather than
    /// a proven achievability result.
    pub conjectured: bool,
}

impl RegionMeta {
    fn new(formula: &str, grid: Option<&GridSpec>, ch: &Channel) -> Self {
        RegionMeta {
            formula: formula.to_string(),
            grid: grid.cloned(),
            channel_digest: ch.digest(),
            conjectured: false,
        }
    }
}

/// A 2-D region: the generating point cloud and its convex hull
/// (counterclockwise, starting at the lexicographic minimum).
#[derive(Debug, Clone)]
pub struct RateRegion {
    pub points: Vec<RatePoint>,
    pub hull: Vec<RatePoint>,
    pub meta: RegionMeta,
}

impl RateRegion {
    pub fn from_cloud(cloud: Vec<(f64, f64)>, meta: RegionMeta) -> Self {
        let hull = hull2d(&cloud);
        let mut points = cloud;
        points.sort_by(|a, b| a.partial_cmp(b).expect("finite rates"));
        points.dedup();
        RateRegion {
            points: points.into_iter().map(|(r1, re)| RatePoint { r1, re }).collect(),
            hull: hull.into_iter().map(|(r1, re)| RatePoint { r1, re }).collect(),
            meta,
        }
    }

    pub fn hull_xy(&self) -> Vec<(f64, f64)> {
        self.hull.iter().map(|p| (p.r1, p.re)).collect()
    }

    /// Largest `r` with `(r, r)` in the hull: the region's perfect-secrecy
    /// extent.
    pub fn diagonal_max(&self) -> f64 {
        diagonal_max(&self.hull_xy())
    }

    /// True iff every hull vertex of `self` lies inside `other`'s hull
    /// within `tol`.
    pub fn subset_of(&self, other: &RateRegion, tol: f64) -> bool {
        hull_subset(&self.hull_xy(), &other.hull_xy(), tol)
    }

    /// Largest violation of any of `self`'s hull vertices against `other`.
    pub fn max_violation_in(&self, other: &RateRegion) -> f64 {
        max_hull_violation(&self.hull_xy(), &other.hull_xy())
    }
}

/// True iff region `a` is contained in region `b` within `tol`.
pub fn region_subset(a: &RateRegion, b: &RateRegion, tol: f64) -> bool {
    a.subset_of(b, tol)
}

/// A 3-D `(R1, Re, R0)` point set, kept as sampled fixed-`R0` slices.
#[derive(Debug, Clone)]
pub struct TripleRegion {
    pub points: Vec<[f64; 3]>,
    /// Slice common rate paired with the 2-D region at that rate, ascending.
    pub slices: Vec<(f64, RateRegion)>,
}

/// Per-chain caps on `(R1, Re)` with the mutual-information terms used.
#[derive(Debug, Clone, Serialize)]
pub struct PerPiBounds {
    pub r1_cap: f64,
    /// Equivocation cap clamped into `[0, r1_cap]`.
    pub re_cap: f64,
    /// The cap before clamping (may be negative).
    pub re_cap_raw: f64,
    pub diagnostics: MiTerms,
}

/// Named conditional mutual informations entering the helper-region caps.
#[derive(Debug, Clone, Serialize)]
pub struct MiTerms {
    pub i_u1_y_g_u2q1: f64,
    pub i_q1_y_g_u2: f64,
    pub i_q1_z_g_u2: f64,
    pub i_u2_y_g_q1: f64,
    pub i_u2_z_g_u1: f64,
    pub i_u1_z_g_u2q1: f64,
    pub i_u1u2_z_g_q1: f64,
}

/// Which multiple-access pentagon to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MacOutput {
    Receiver,
    Eavesdropper,
}

/// Extreme points of `{0 <= Re <= R1 <= a, Re <= b}`, plus the origin and
/// the downward-closure corner.
#[inline]
fn polygon_points(a: f64, b_raw: f64, out: &mut Vec<(f64, f64)>) {
    let a = a.max(0.0);
    let re = b_raw.clamp(0.0, a);
    out.push((0.0, 0.0));
    out.push((a, 0.0));
    out.push((a, re));
    out.push((re, re));
}

/// Composes a chain with the channel and marginalizes down to the variables
/// the region formulas use.
fn region_joint(aux: &AuxChain, ch: &Channel, keep_y1: bool) -> Result<JointDist> {
    let j = compose_joint(aux, ch)?;
    let keep: &[Var] = if keep_y1 && ch.y1_size() > 0 {
        &[Var::Q1, Var::U1, Var::U2, Var::Y, Var::Z, Var::Y1]
    } else {
        &[Var::Q1, Var::U1, Var::U2, Var::Y, Var::Z]
    };
    j.drop_to(keep)
}

/// Source of conditional mutual informations by reduced-catalog bitmask.
trait MiSource {
    fn cmi_mask(&mut self, a: u32, b: u32, c: u32) -> Result<f64>;
}

impl MiSource for EntropyTable<'_> {
    fn cmi_mask(&mut self, a: u32, b: u32, c: u32) -> Result<f64> {
        EntropyTable::cmi_mask(self, a, b, c)
    }
}

/// Allocation-free per-thread evaluator for grid scans: composes the
/// reduced joint over `(Q1, U1, U2, Y, Z[, Y1])` into reusable buffers and
/// memoizes subset entropies with per-mask projection tables.
struct ChainEval {
    nq1: usize,
    nu1: usize,
    nu2: usize,
    x1_size: usize,
    x2_size: usize,
    /// Flattened output-cell count per input pair: `ny * nz (* ny1)`.
    outs: usize,
    dims: Vec<usize>,
    /// Channel tensor `[x1][x2][outs]`, with the helper observation kept or
    /// pre-marginalized.
    chan: Vec<f64>,
    /// Effective per-(u1, u2) output law.
    eff: Vec<f64>,
    joint: Vec<f64>,
    marg: Vec<f64>,
    /// Per-mask flat-to-marginal index tables, built on first use; they
    /// depend only on the dimensions, so they persist across chains.
    proj: Vec<Vec<u32>>,
    msize: Vec<usize>,
    h: Vec<f64>,
    known: Vec<bool>,
    aux: AuxChain,
}

impl ChainEval {
    fn new(e: &AuxChainEnum, ch: &Channel, keep_y1: bool) -> Self {
        let keep_y1 = keep_y1 && ch.y1_size() > 0;
        let ny1 = if keep_y1 { ch.y1_size() } else { 1 };
        let outs = ch.y_size() * ch.z_size() * ny1;
        let mut dims = vec![
            e.q1_size(),
            e.u1_size(),
            e.u2_size(),
            ch.y_size(),
            ch.z_size(),
        ];
        if keep_y1 {
            dims.push(ch.y1_size());
        }
        let mut chan = Vec::with_capacity(ch.x1_size() * ch.x2_size() * outs);
        for x1 in 0..ch.x1_size() {
            for x2 in 0..ch.x2_size() {
                for y in 0..ch.y_size() {
                    for z in 0..ch.z_size() {
                        if keep_y1 {
                            for y1 in 0..ch.y1_size() {
                                chan.push(ch.prob(x1, x2, y, z, y1));
                            }
                        } else {
                            chan.push(ch.prob_yz(x1, x2, y, z));
                        }
                    }
                }
            }
        }
        let n: usize = dims.iter().product();
        let nmask = 1usize << dims.len();
        ChainEval {
            nq1: e.q1_size(),
            nu1: e.u1_size(),
            nu2: e.u2_size(),
            x1_size: ch.x1_size(),
            x2_size: ch.x2_size(),
            outs,
            chan,
            eff: vec![0.0; e.u1_size() * e.u2_size() * outs],
            joint: vec![0.0; n],
            marg: vec![0.0; n],
            proj: vec![Vec::new(); nmask],
            msize: vec![0; nmask],
            h: vec![0.0; nmask],
            known: vec![false; nmask],
            dims,
            aux: e.chain_at(0),
        }
    }

    fn load(&mut self, e: &AuxChainEnum, index: u64) {
        e.fill_chain(index, &mut self.aux);
        self.eff.fill(0.0);
        let outs = self.outs;
        for u1 in 0..self.nu1 {
            for u2 in 0..self.nu2 {
                let dst_base = (u1 * self.nu2 + u2) * outs;
                for x1 in 0..self.x1_size {
                    let p1 = self.aux.pmf_x1_given_u1[u1][x1];
                    if p1 == 0.0 {
                        continue;
                    }
                    for x2 in 0..self.x2_size {
                        let w = p1 * self.aux.pmf_x2_given_u2[u2][x2];
                        if w == 0.0 {
                            continue;
                        }
                        let src = &self.chan[(x1 * self.x2_size + x2) * outs..][..outs];
                        let dst = &mut self.eff[dst_base..dst_base + outs];
                        for (d, s) in dst.iter_mut().zip(src) {
                            *d += w * s;
                        }
                    }
                }
            }
        }
        for q1 in 0..self.nq1 {
            let pq = self.aux.pmf_q1[q1];
            for u1 in 0..self.nu1 {
                let pu = pq * self.aux.pmf_u1_given_q1[q1][u1];
                for u2 in 0..self.nu2 {
                    let w = pu * self.aux.pmf_u2[u2];
                    let src = &self.eff[(u1 * self.nu2 + u2) * outs..][..outs];
                    let dst_base = ((q1 * self.nu1 + u1) * self.nu2 + u2) * outs;
                    let dst = &mut self.joint[dst_base..dst_base + outs];
                    for (d, s) in dst.iter_mut().zip(src) {
                        *d = w * s;
                    }
                }
            }
        }
        self.known.fill(false);
    }

    fn build_proj(&mut self, mask: usize) {
        let n = self.joint.len();
        let mut size = 1usize;
        for (i, &d) in self.dims.iter().enumerate() {
            if mask >> i & 1 == 1 {
                size *= d;
            }
        }
        let mut lut = vec![0u32; n];
        let mut idx = vec![0usize; self.dims.len()];
        for entry in lut.iter_mut() {
            let mut p = 0usize;
            for (i, &d) in self.dims.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    p = p * d + idx[i];
                }
            }
            *entry = p as u32;
            for i in (0..self.dims.len()).rev() {
                idx[i] += 1;
                if idx[i] < self.dims[i] {
                    break;
                }
                idx[i] = 0;
            }
        }
        self.proj[mask] = lut;
        self.msize[mask] = size;
    }

    fn h_mask(&mut self, mask: u32) -> f64 {
        if mask == 0 {
            return 0.0;
        }
        let mi = mask as usize;
        if self.known[mi] {
            return self.h[mi];
        }
        if self.proj[mi].is_empty() {
            self.build_proj(mi);
        }
        let size = self.msize[mi];
        let lut = &self.proj[mi];
        let marg = &mut self.marg[..size];
        marg.fill(0.0);
        for (i, &v) in self.joint.iter().enumerate() {
            marg[lut[i] as usize] += v;
        }
        let mut hh = 0.0;
        for &v in marg.iter() {
            if v > 0.0 {
                hh -= v * v.log2();
            }
        }
        self.h[mi] = hh;
        self.known[mi] = true;
        hh
    }
}

impl MiSource for ChainEval {
    fn cmi_mask(&mut self, a: u32, b: u32, c: u32) -> Result<f64> {
        let raw = self.h_mask(a | c) + self.h_mask(b | c) - self.h_mask(a | b | c) - self.h_mask(c);
        crate::info::clamp_cmi(raw)
    }
}

/// Runs `per_chain` over every grid chain in parallel and concatenates the
/// emitted points. Aggregation is order-independent (the caller hulls the
/// cloud), so the result does not depend on the worker count.
fn scan_grid<F>(
    e: &AuxChainEnum,
    ch: &Channel,
    keep_y1: bool,
    per_chain: F,
) -> Result<Vec<(f64, f64)>>
where
    F: Fn(&mut ChainEval, &mut Vec<(f64, f64)>) -> Result<()> + Sync,
{
    (0..e.total())
        .into_par_iter()
        .try_fold(
            || (ChainEval::new(e, ch, keep_y1), Vec::new()),
            |(mut ev, mut acc): (ChainEval, Vec<(f64, f64)>), i| {
                ev.load(e, i);
                per_chain(&mut ev, &mut acc)?;
                Ok::<_, Error>((ev, acc))
            },
        )
        .map(|r| r.map(|(_, acc)| acc))
        .try_reduce(Vec::new, |mut a, mut b| {
            a.append(&mut b);
            Ok(a)
        })
}

/// Parallel maximum of a per-chain scalar over the grid.
fn max_over_grid<F>(e: &AuxChainEnum, ch: &Channel, keep_y1: bool, per_chain: F) -> Result<f64>
where
    F: Fn(&mut ChainEval) -> Result<f64> + Sync,
{
    (0..e.total())
        .into_par_iter()
        .try_fold(
            || (ChainEval::new(e, ch, keep_y1), f64::NEG_INFINITY),
            |(mut ev, best): (ChainEval, f64), i| {
                ev.load(e, i);
                let v = per_chain(&mut ev)?;
                Ok::<_, Error>((ev, best.max(v)))
            },
        )
        .map(|r| r.map(|(_, best)| best))
        .try_reduce(|| f64::NEG_INFINITY, |a, b| Ok(a.max(b)))
}

// Per-chain cap formulas, all on the reduced catalog masks.

fn caps_wiretap(t: &mut impl MiSource) -> Result<(f64, f64)> {
    let a = t.cmi_mask(MU1, MY, 0)?;
    let b = t.cmi_mask(MU1, MY, MQ1)? - t.cmi_mask(MU1, MZ, MQ1)?;
    Ok((a, b))
}

fn caps_lai_elgamal(t: &mut impl MiSource) -> Result<(f64, f64)> {
    let a = t.cmi_mask(MU1, MY, MU2)?;
    let i_u2_y = t.cmi_mask(MU2, MY, 0)?;
    let i_u2_z = t.cmi_mask(MU2, MZ, 0)?;
    let i_u1_z_g_u2 = t.cmi_mask(MU1, MZ, MU2)?;
    let i_u2_z_g_u1 = t.cmi_mask(MU2, MZ, MU1)?;
    let b = a - i_u2_y.min(i_u2_z) - i_u1_z_g_u2 + i_u2_y.min(i_u2_z_g_u1);
    Ok((a, b))
}

fn caps_c(t: &mut impl MiSource) -> Result<PerPiBounds> {
    let r1p = t.cmi_mask(MU1, MY, MU2 | MQ1)?;
    let i_q1_y_g_u2 = t.cmi_mask(MQ1, MY, MU2)?;
    let i_q1_z_g_u2 = t.cmi_mask(MQ1, MZ, MU2)?;
    let i_u2_y_g_q1 = t.cmi_mask(MU2, MY, MQ1)?;
    let i_u2_z_g_u1 = t.cmi_mask(MU2, MZ, MU1)?;
    let i_u1_z_g_u2q1 = t.cmi_mask(MU1, MZ, MU2 | MQ1)?;
    let i_u1u2_z_g_q1 = t.cmi_mask(MU1 | MU2, MZ, MQ1)?;

    let r1_cap = r1p + i_q1_y_g_u2.min(i_q1_z_g_u2);
    let r2p = i_u2_y_g_q1.min(i_u2_z_g_u1);
    let re_raw = (r1p + r2p - i_u1_z_g_u2q1 - i_u2_y_g_q1).max(r1p + r2p - i_u1u2_z_g_q1);
    Ok(PerPiBounds {
        r1_cap,
        re_cap: re_raw.clamp(0.0, r1_cap.max(0.0)),
        re_cap_raw: re_raw,
        diagnostics: MiTerms {
            i_u1_y_g_u2q1: r1p,
            i_q1_y_g_u2,
            i_q1_z_g_u2,
            i_u2_y_g_q1,
            i_u2_z_g_u1,
            i_u1_z_g_u2q1,
            i_u1u2_z_g_q1,
        },
    })
}

fn caps_cb(t: &mut impl MiSource) -> Result<(f64, f64)> {
    // helper treated as noise: no helper-rate constraint appears
    caps_wiretap(t)
}

/// Capacity-equivocation region of the helperless wire-tap channel,
/// evaluated over a `(Q1, U1)` grid with `Q1 -> U1 -> X1`.
pub fn wiretap_ce_region(ch: &Channel, spec: &GridSpec) -> Result<RateRegion> {
    if ch.x2_size() != 1 {
        return Err(Error::Validation(
            "wiretap region requires a helperless channel (x2_size = 1)".into(),
        ));
    }
    let mut spec = spec.clone();
    spec.u2_size = 1;
    let e = enumerate_aux_chains(&spec, ch)?;
    let cloud = scan_grid(&e, ch, false, |t, acc| {
        let (a, b) = caps_wiretap(t)?;
        polygon_points(a, b, acc);
        Ok(())
    })?;
    Ok(RateRegion::from_cloud(
        cloud,
        RegionMeta::new("wiretap", Some(&spec), ch),
    ))
}

/// Helper-region baseline with independent `(U1, U2)` and no common layer.
pub fn lai_elgamal_region(ch: &Channel, spec: &GridSpec) -> Result<RateRegion> {
    let mut spec = spec.clone();
    spec.q1_size = 1;
    let e = enumerate_aux_chains(&spec, ch)?;
    let cloud = scan_grid(&e, ch, false, |t, acc| {
        let (a, b) = caps_lai_elgamal(t)?;
        polygon_points(a, b, acc);
        Ok(())
    })?;
    Ok(RateRegion::from_cloud(
        cloud,
        RegionMeta::new("le", Some(&spec), ch),
    ))
}

/// Rate and equivocation caps of the rate-split helper region for one chain.
pub fn per_pi_bounds_c(aux: &AuxChain, ch: &Channel) -> Result<PerPiBounds> {
    let j = region_joint(aux, ch, false)?;
    let mut t = EntropyTable::new(&j);
    caps_c(&mut t)
}

/// The rate-split helper region: union of per-chain caps over the grid.
pub fn region_c(ch: &Channel, spec: &GridSpec) -> Result<RateRegion> {
    let e = enumerate_aux_chains(spec, ch)?;
    let cloud = scan_grid(&e, ch, false, |t, acc| {
        let b = caps_c(t)?;
        polygon_points(b.r1_cap, b.re_cap_raw, acc);
        Ok(())
    })?;
    Ok(RateRegion::from_cloud(
        cloud,
        RegionMeta::new("c", Some(spec), ch),
    ))
}

/// Scheme-A region polygon for a single chain.
pub fn region_ca(aux: &AuxChain, ch: &Channel) -> Result<RateRegion> {
    let b = per_pi_bounds_c(aux, ch)?;
    let mut cloud = Vec::with_capacity(4);
    polygon_points(b.r1_cap, b.re_cap_raw, &mut cloud);
    Ok(RateRegion::from_cloud(cloud, RegionMeta::new("ca", None, ch)))
}

/// Scheme-B region polygon for a single chain (helper decoded by nobody).
pub fn region_cb(aux: &AuxChain, ch: &Channel) -> Result<RateRegion> {
    let j = region_joint(aux, ch, false)?;
    let mut t = EntropyTable::new(&j);
    let (a, b) = caps_cb(&mut t)?;
    let mut cloud = Vec::with_capacity(4);
    polygon_points(a, b, &mut cloud);
    Ok(RateRegion::from_cloud(cloud, RegionMeta::new("cb", None, ch)))
}

/// Combined region: per chain the union of the scheme-A and scheme-B
/// polygons, hulled over the grid.
pub fn region_ctilde(ch: &Channel, spec: &GridSpec) -> Result<RateRegion> {
    let e = enumerate_aux_chains(spec, ch)?;
    let cloud = scan_grid(&e, ch, false, |t, acc| {
        let b = caps_c(t)?;
        polygon_points(b.r1_cap, b.re_cap_raw, acc);
        let (ab, bb) = caps_cb(t)?;
        polygon_points(ab, bb, acc);
        Ok(())
    })?;
    Ok(RateRegion::from_cloud(
        cloud,
        RegionMeta::new("ctilde", Some(spec), ch),
    ))
}

/// Best perfect-secrecy rate of the independent-helper formula over the
/// grid (no common layer).
pub fn ps_rate_le(ch: &Channel, spec: &GridSpec) -> Result<f64> {
    let mut spec = spec.clone();
    spec.q1_size = 1;
    let e = enumerate_aux_chains(&spec, ch)?;
    let v = max_over_grid(&e, ch, false, |t| {
        let (_, b) = caps_lai_elgamal(t)?;
        Ok(b.max(0.0))
    })?;
    Ok(v.max(0.0))
}

/// Best perfect-secrecy rate of the combined region over the grid. The
/// common layer does not move the diagonal, so the scan uses plain
/// `(U1, U2)` inputs.
pub fn ps_rate_ctilde(ch: &Channel, spec: &GridSpec) -> Result<f64> {
    let mut spec = spec.clone();
    spec.q1_size = 1;
    let e = enumerate_aux_chains(&spec, ch)?;
    let v = max_over_grid(&e, ch, false, |t| {
        let i_u1_y_g_u2 = t.cmi_mask(MU1, MY, MU2)?;
        let i_u1_z_g_u2 = t.cmi_mask(MU1, MZ, MU2)?;
        let i_u2_y = t.cmi_mask(MU2, MY, 0)?;
        let i_u2_z_g_u1 = t.cmi_mask(MU2, MZ, MU1)?;
        let i_u1u2_z = t.cmi_mask(MU1 | MU2, MZ, 0)?;
        let r2p = i_u2_y.min(i_u2_z_g_u1);
        let ca = (i_u1_y_g_u2 - i_u1_z_g_u2 + r2p - i_u2_y).max(i_u1_y_g_u2 + r2p - i_u1u2_z);
        let cb = t.cmi_mask(MU1, MY, 0)? - t.cmi_mask(MU1, MZ, 0)?;
        Ok(ca.max(cb).max(0.0))
    })?;
    Ok(v.max(0.0))
}

/// Per-chain caps for the broadcast region with a common message.
struct BccCaps {
    /// Cap on `R0 + R1`.
    a_total: f64,
    /// Raw equivocation cap.
    b: f64,
    /// Cap on the common rate `R0`.
    r0_cap: f64,
}

fn caps_bcc(t: &mut impl MiSource) -> Result<BccCaps> {
    let i_u1_y_g_q1 = t.cmi_mask(MU1, MY, MQ1)?;
    let i_u1_z_g_q1 = t.cmi_mask(MU1, MZ, MQ1)?;
    let r0 = t.cmi_mask(MQ1, MY, 0)?.min(t.cmi_mask(MQ1, MZ, 0)?);
    Ok(BccCaps {
        a_total: i_u1_y_g_q1 + r0,
        b: i_u1_y_g_q1 - i_u1_z_g_q1,
        r0_cap: r0,
    })
}

fn caps_bcc_helper_a(t: &mut impl MiSource) -> Result<BccCaps> {
    let i_u1_y_g_u2q1 = t.cmi_mask(MU1, MY, MU2 | MQ1)?;
    let i_u1_z_g_u2q1 = t.cmi_mask(MU1, MZ, MU2 | MQ1)?;
    let r0 = t
        .cmi_mask(MQ1, MY, MU2)?
        .min(t.cmi_mask(MQ1, MZ, MU2)?);
    Ok(BccCaps {
        a_total: i_u1_y_g_u2q1 + r0,
        b: i_u1_y_g_u2q1 - i_u1_z_g_u2q1,
        r0_cap: r0,
    })
}

fn triple_from_caps(
    caps: Vec<BccCaps>,
    formula: &str,
    spec: &GridSpec,
    ch: &Channel,
) -> TripleRegion {
    let r0_max = caps.iter().map(|c| c.r0_cap).fold(0.0f64, f64::max);
    // common rates below float noise are structurally zero
    let mut slice_values: Vec<f64> = if r0_max <= 1e-12 {
        vec![0.0]
    } else {
        (0..BCC_SLICES)
            .map(|i| r0_max * i as f64 / (BCC_SLICES - 1) as f64)
            .collect()
    };
    slice_values.dedup();
    let mut slices = Vec::with_capacity(slice_values.len());
    let mut points = Vec::new();
    for &rho in &slice_values {
        let mut cloud = Vec::new();
        for c in &caps {
            if c.r0_cap + 1e-12 >= rho {
                polygon_points(c.a_total - rho, c.b, &mut cloud);
            }
        }
        if cloud.is_empty() {
            cloud.push((0.0, 0.0));
        }
        let mut meta = RegionMeta::new(formula, Some(spec), ch);
        meta.formula = format!("{formula}@r0={rho:.6}");
        let mut region = RateRegion::from_cloud(cloud, meta);
        // keep slices compact: the stored points are the hull vertices
        region.points = region.hull.clone();
        for p in &region.points {
            points.push([p.r1, p.re, rho]);
        }
        slices.push((rho, region));
    }
    TripleRegion { points, slices }
}

/// Broadcast capacity-equivocation region (no helper), in sampled
/// common-rate slices.
pub fn bcc_region(ch: &Channel, spec: &GridSpec) -> Result<TripleRegion> {
    if ch.x2_size() != 1 {
        return Err(Error::Validation(
            "broadcast region requires a helperless channel (x2_size = 1)".into(),
        ));
    }
    let mut spec = spec.clone();
    spec.u2_size = 1;
    let e = enumerate_aux_chains(&spec, ch)?;
    let caps = collect_caps(&e, ch, caps_bcc)?;
    Ok(triple_from_caps(caps, "bcc", &spec, ch))
}

/// Broadcast region with a helping interferer: per chain the union of the
/// helper-conditioned and helper-ignoring cap sets.
pub fn bcc_helper_region(ch: &Channel, spec: &GridSpec) -> Result<TripleRegion> {
    let e = enumerate_aux_chains(spec, ch)?;
    let caps = {
        let a = collect_caps(&e, ch, caps_bcc_helper_a)?;
        let b = collect_caps(&e, ch, caps_bcc)?;
        let mut all = a;
        all.extend(b);
        all
    };
    Ok(triple_from_caps(caps, "bcc-helper", spec, ch))
}

fn collect_caps<F>(e: &AuxChainEnum, ch: &Channel, f: F) -> Result<Vec<BccCaps>>
where
    F: Fn(&mut ChainEval) -> Result<BccCaps> + Sync,
{
    (0..e.total())
        .into_par_iter()
        .try_fold(
            || (ChainEval::new(e, ch, false), Vec::new()),
            |(mut ev, mut acc): (ChainEval, Vec<BccCaps>), i| {
                ev.load(e, i);
                acc.push(f(&mut ev)?);
                Ok::<_, Error>((ev, acc))
            },
        )
        .map(|r| r.map(|(_, acc)| acc))
        .try_reduce(Vec::new, |mut a, mut b| {
            a.append(&mut b);
            Ok(a)
        })
}

/// Helper region with the extra secrecy-from-the-helper constraint. The
/// underlying statement is a conjecture; the meta flags it.
pub fn deaf_helper_region(ch: &Channel, spec: &GridSpec) -> Result<RateRegion> {
    if ch.y1_size() == 0 {
        return Err(Error::Validation(
            "deaf-helper region requires a helper observation output (y1_size > 0)".into(),
        ));
    }
    let e = enumerate_aux_chains(spec, ch)?;
    let cloud = scan_grid(&e, ch, true, |t, acc| {
        let b = caps_c(t)?;
        let deaf = (b.diagnostics.i_u1_y_g_u2q1 - t.cmi_mask(MU1, MY1, MU2 | MQ1)?).max(0.0);
        polygon_points(b.r1_cap, b.re_cap_raw.min(deaf), acc);
        Ok(())
    })?;
    let mut meta = RegionMeta::new("deaf", Some(spec), ch);
    meta.conjectured = true;
    Ok(RateRegion::from_cloud(cloud, meta))
}

/// Perfect-secrecy rate of the deaf-helper strategy: the minimum of the
/// eavesdropper-facing and helper-facing equivocation caps, maximized over
/// plain `(U1, U2)` inputs.
pub fn deaf_ps_rate(ch: &Channel, spec: &GridSpec) -> Result<f64> {
    if ch.y1_size() == 0 {
        return Err(Error::Validation(
            "deaf-helper rate requires a helper observation output (y1_size > 0)".into(),
        ));
    }
    let mut spec = spec.clone();
    spec.q1_size = 1;
    let e = enumerate_aux_chains(&spec, ch)?;
    let v = max_over_grid(&e, ch, true, |t| {
        let i_u1_y_g_u2 = t.cmi_mask(MU1, MY, MU2)?;
        let i_u1_z_g_u2 = t.cmi_mask(MU1, MZ, MU2)?;
        let i_u2_y = t.cmi_mask(MU2, MY, 0)?;
        let i_u2_z_g_u1 = t.cmi_mask(MU2, MZ, MU1)?;
        let i_u1u2_z = t.cmi_mask(MU1 | MU2, MZ, 0)?;
        let i_u1_y1_g_u2 = t.cmi_mask(MU1, MY1, MU2)?;
        let r2p = i_u2_y.min(i_u2_z_g_u1);
        let re1 = (i_u1_y_g_u2 - i_u1_z_g_u2 + r2p - i_u2_y).max(i_u1_y_g_u2 + r2p - i_u1u2_z);
        let re2 = (i_u1_y_g_u2 + r2p - i_u1_y1_g_u2).max(0.0);
        Ok(re1.min(re2))
    })?;
    Ok(v.max(0.0))
}

/// Standard two-sender multiple-access pentagon toward the receiver or the
/// eavesdropper, for independent inputs `p_x1`, `p_x2`. Plot support only:
/// the second axis is the helper rate, not an equivocation.
pub fn mac_pentagon(
    ch: &Channel,
    p_x1: &[f64],
    p_x2: &[f64],
    which: MacOutput,
) -> Result<RateRegion> {
    if p_x1.len() != ch.x1_size() || p_x2.len() != ch.x2_size() {
        return Err(Error::DimMismatch("input pmf sizes for the pentagon".into()));
    }
    let (o_size, o_var) = match which {
        MacOutput::Receiver => (ch.y_size(), Var::Y),
        MacOutput::Eavesdropper => (ch.z_size(), Var::Z),
    };
    let slice = ch.marginals();
    let mut p = Vec::with_capacity(ch.x1_size() * ch.x2_size() * o_size);
    for x1 in 0..ch.x1_size() {
        for x2 in 0..ch.x2_size() {
            for o in 0..o_size {
                let po = match which {
                    MacOutput::Receiver => slice.p_y(x1, x2, o),
                    MacOutput::Eavesdropper => slice.p_z(x1, x2, o),
                };
                p.push(p_x1[x1] * p_x2[x2] * po);
            }
        }
    }
    let j = JointDist::new(
        vec![(Var::X1, ch.x1_size()), (Var::X2, ch.x2_size()), (o_var, o_size)],
        p,
    )?;
    let a1 = j.cmi(&[Var::X1], &[o_var], &[Var::X2])?;
    let a2 = j.cmi(&[Var::X2], &[o_var], &[Var::X1])?;
    let s = j.cmi(&[Var::X1, Var::X2], &[o_var], &[])?;
    let cloud = vec![
        (0.0, 0.0),
        (a1, 0.0),
        (a1, (s - a1).max(0.0)),
        ((s - a2).max(0.0), a2),
        (0.0, a2),
    ];
    let tag = match which {
        MacOutput::Receiver => "mac-pentagon-y",
        MacOutput::Eavesdropper => "mac-pentagon-z",
    };
    Ok(RateRegion::from_cloud(cloud, RegionMeta::new(tag, None, ch)))
}
