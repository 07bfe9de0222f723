//! Random-coding schemes at tiny blocklength: seeded codebook generation,
//! stochastic binning encoders, maximum-likelihood and joint-typicality
//! decoding, and exact per-codebook equivocation by enumerating every
//! eavesdropper output sequence.
//!
//! Codebook sizes follow a power-of-two split of the secret index space so
//! that the bin partition always has equal-cardinality cells; realized rates
//! are reported back and every theoretical comparison uses them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::channel::Channel;
use crate::error::{Error, Result};
use crate::info::{compose_joint, AuxChain, EntropyTable, JointDist, Var};
use crate::region::per_pi_bounds_c;

/// Exhaustive equivocation enumeration refuses beyond this many output
/// sequences.
pub const ENUM_GUARD: u64 = 1 << 24;

/// Decoding rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Decoder {
    MaxLikelihood,
    /// Joint typicality with slack `epsilon` (bits per symbol); ambiguity
    /// and no-candidate outcomes are erasures.
    JointTypicality { epsilon: f64 },
}

/// Which coding scheme drives codebook structure and decoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Scheme1,
    Scheme2,
    NoiseForwarding,
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Scheme::Scheme1 => "scheme1",
            Scheme::Scheme2 => "scheme2",
            Scheme::NoiseForwarding => "noise_forwarding",
        };
        f.write_str(s)
    }
}

/// Full configuration of one simulation run.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub channel: Channel,
    pub pmf_q1: Vec<f64>,
    /// Row `q1` holds `P(x1 | q1)`.
    pub pmf_x1_given_q1: Vec<Vec<f64>>,
    pub pmf_x2: Vec<f64>,
    /// Common-layer message rate (decodable by everyone).
    pub r10: f64,
    /// Secret-layer message rate.
    pub r11: f64,
    /// Helper dummy-message rate.
    pub r2: f64,
    /// Secret-layer codebook rate `R >= r11`; the excess is dummy
    /// randomness protecting the message.
    pub r: f64,
    pub blocklength: usize,
    pub trials: usize,
    pub seed: u64,
    pub decoder: Decoder,
    pub scheme: Scheme,
}

impl SimConfig {
    /// Uniform single-layer config on a channel: no common layer, uniform
    /// `P(x1)` and `P(x2)`.
    pub fn uniform(channel: Channel, scheme: Scheme) -> Self {
        let x1 = channel.x1_size();
        let x2 = channel.x2_size();
        SimConfig {
            pmf_q1: vec![1.0],
            pmf_x1_given_q1: vec![vec![1.0 / x1 as f64; x1]],
            pmf_x2: vec![1.0 / x2 as f64; x2],
            r10: 0.0,
            r11: 0.0,
            r2: 0.0,
            r: 0.0,
            blocklength: 4,
            trials: 100,
            seed: 0,
            decoder: Decoder::MaxLikelihood,
            scheme,
            channel,
        }
    }

    /// Embeds the input PMFs as an auxiliary chain with identity channel
    /// maps, so the region formulas evaluate at the simulated input level.
    pub fn x_level_chain(&self) -> AuxChain {
        let x1 = self.channel.x1_size();
        let x2 = self.channel.x2_size();
        let identity = |n: usize| -> Vec<Vec<f64>> {
            (0..n)
                .map(|i| {
                    let mut row = vec![0.0; n];
                    row[i] = 1.0;
                    row
                })
                .collect()
        };
        AuxChain {
            q1_size: self.pmf_q1.len(),
            u1_size: x1,
            u2_size: x2,
            pmf_q1: self.pmf_q1.clone(),
            pmf_u1_given_q1: self.pmf_x1_given_q1.clone(),
            pmf_u2: self.pmf_x2.clone(),
            pmf_x1_given_u1: identity(x1),
            pmf_x2_given_u2: identity(x2),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.pmf_q1.len() != self.pmf_x1_given_q1.len() {
            return Err(Error::DimMismatch("P(Q1) vs P(X1|Q1) rows".into()));
        }
        for row in &self.pmf_x1_given_q1 {
            if row.len() != self.channel.x1_size() {
                return Err(Error::DimMismatch("P(X1|Q1) row width vs |X1|".into()));
            }
        }
        if self.pmf_x2.len() != self.channel.x2_size() {
            return Err(Error::DimMismatch("P(X2) vs |X2|".into()));
        }
        if self.blocklength == 0 {
            return Err(Error::Validation("blocklength must be >= 1".into()));
        }
        for (name, v) in [
            ("r10", self.r10),
            ("r11", self.r11),
            ("r2", self.r2),
            ("r", self.r),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::Validation(format!("rate {name} must be >= 0")));
            }
        }
        Ok(())
    }
}

/// Mutual-information terms of the simulated input law, at the channel
/// input level.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SchemeTerms {
    pub i_x1_y_g_x2q1: f64,
    pub i_x1_z_g_x2q1: f64,
    pub i_x2_y_g_q1: f64,
    pub i_x2_z_g_q1: f64,
    pub i_x2_z_g_x1: f64,
    pub i_x1x2_z_g_q1: f64,
    pub i_x1_z_g_q1: f64,
}

fn scheme_terms(cfg: &SimConfig) -> Result<SchemeTerms> {
    let aux = cfg.x_level_chain();
    let j = compose_joint(&aux, &cfg.channel)?
        .drop_to(&[Var::Q1, Var::X1, Var::X2, Var::Y, Var::Z])?;
    let mut t = EntropyTable::new(&j);
    const Q1: u32 = 1;
    const X1: u32 = 2;
    const X2: u32 = 4;
    const Y: u32 = 8;
    const Z: u32 = 16;
    Ok(SchemeTerms {
        i_x1_y_g_x2q1: t.cmi_mask(X1, Y, X2 | Q1)?,
        i_x1_z_g_x2q1: t.cmi_mask(X1, Z, X2 | Q1)?,
        i_x2_y_g_q1: t.cmi_mask(X2, Y, Q1)?,
        i_x2_z_g_q1: t.cmi_mask(X2, Z, Q1)?,
        i_x2_z_g_x1: t.cmi_mask(X2, Z, X1)?,
        i_x1x2_z_g_q1: t.cmi_mask(X1 | X2, Z, Q1)?,
        i_x1_z_g_q1: t.cmi_mask(X1, Z, Q1)?,
    })
}

/// The receiver-side codeword-rate cap `I(X1;Y|X2,Q1)` at the configured
/// input law; the natural default for the secret-layer codebook rate.
pub fn receiver_rate_cap(cfg: &SimConfig) -> Result<f64> {
    Ok(scheme_terms(cfg)?.i_x1_y_g_x2q1)
}

/// Which regime the simulated law falls into, by the stated mutual
/// information comparisons.
fn case_label(terms: &SchemeTerms) -> &'static str {
    if terms.i_x1_y_g_x2q1 <= terms.i_x1_z_g_x2q1 {
        "case1"
    } else if terms.i_x2_y_g_q1 >= terms.i_x2_z_g_q1 {
        "case2a"
    } else {
        "case2b"
    }
}

/// Realized (integer-codebook) rates in bits per symbol.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RealizedRates {
    pub r10: f64,
    pub r11: f64,
    pub r2: f64,
    pub r: f64,
}

/// A sampled random codebook with its secret-index split.
pub struct Codebook {
    /// Common-layer codewords, `m10 x n`.
    pub q_seqs: Vec<Vec<u8>>,
    /// Secret-layer codewords, indexed `[i][b]`, each length `n`.
    pub x1_seqs: Vec<Vec<Vec<u8>>>,
    /// Helper codewords, `m2 x n`.
    pub x2_seqs: Vec<Vec<u8>>,
    pub n: usize,
    pub m10: usize,
    pub m11: usize,
    pub m2: usize,
    /// Secret-index space `m = mw * ml`.
    pub m: usize,
    pub mw: usize,
    pub ml: usize,
    /// Partition of the `ml` dummy indices into `cells` cells of
    /// `cell_size` each (`cells == 1` when the message fits the secure part).
    pub cells: usize,
    pub cell_size: usize,
    pub realized: RealizedRates,
    /// Realized secure excess rate `log2(mw) / n`.
    pub r_prime: f64,
    /// The formula value the split was derived from.
    pub r_prime_target: f64,
    /// Set when the secure excess is zero: the run proceeds carrying rate
    /// only, with no secrecy claim.
    pub zero_secrecy: bool,
    pub case: &'static str,
    pub scheme: Scheme,
    pub terms: SchemeTerms,
}

impl Codebook {
    /// Bin partition: cell index of a dummy index `l`.
    pub fn g(&self, l: usize) -> usize {
        l / self.cell_size
    }

    /// True when the secret message is split across the partition
    /// (`r11 > r_prime`).
    pub fn partitioned(&self) -> bool {
        self.cells > 1
    }

    /// Number of valid secret indices `b` (all of them when partitioned,
    /// the first `m11 * ml` otherwise).
    pub fn valid_b(&self) -> usize {
        if self.partitioned() {
            self.m
        } else {
            self.m11 * self.ml
        }
    }

    /// Message carried by secret index `b`.
    pub fn message_of_b(&self, b: usize) -> usize {
        let w = b / self.ml;
        let l = b % self.ml;
        if self.partitioned() {
            w * self.cells + self.g(l)
        } else {
            w
        }
    }
}

fn ceil_exp(n: usize, rate: f64) -> u32 {
    (n as f64 * rate - 1e-9).ceil().max(0.0) as u32
}

fn sample_idx<R: Rng>(rng: &mut R, pmf: &[f64]) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, &p) in pmf.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    pmf.len() - 1
}

/// Draws the random codebook for a configuration. Deterministic given the
/// seed: the codebook uses its own RNG stream.
pub fn build_codebook(cfg: &SimConfig) -> Result<Codebook> {
    cfg.validate()?;
    let n = cfg.blocklength;
    let terms = scheme_terms(cfg)?;
    let case = case_label(&terms);

    let a_m = ceil_exp(n, cfg.r);
    let a_11 = ceil_exp(n, cfg.r11);
    if a_11 > a_m {
        return Err(Error::Validation(format!(
            "infeasible split: r11 rounds to 2^{a_11} messages but the codebook only has 2^{a_m} indices (raise r)"
        )));
    }
    let m10 = (2f64.powf(n as f64 * cfg.r10) - 1e-9).ceil().max(1.0) as usize;
    let m2 = (2f64.powf(n as f64 * cfg.r2) - 1e-9).ceil().max(1.0) as usize;
    let m = 1usize << a_m;
    let m11 = 1usize << a_11;

    let realized = RealizedRates {
        r10: (m10 as f64).log2() / n as f64,
        r11: a_11 as f64 / n as f64,
        r2: (m2 as f64).log2() / n as f64,
        r: a_m as f64 / n as f64,
    };

    // secure excess rate per the scheme's equivocation analysis, from
    // realized rates
    let r_prime_target = match cfg.scheme {
        Scheme::Scheme1 => realized.r + realized.r2 - terms.i_x1x2_z_g_q1,
        Scheme::Scheme2 => {
            if terms.i_x2_y_g_q1 >= terms.i_x2_z_g_q1 {
                realized.r + terms.i_x2_y_g_q1.min(terms.i_x2_z_g_x1) - terms.i_x1x2_z_g_q1
            } else {
                realized.r - terms.i_x1_z_g_x2q1
            }
        }
        Scheme::NoiseForwarding => realized.r - terms.i_x1_z_g_q1,
    };
    let r_prime_target = r_prime_target.max(0.0);
    let w_exp = ((n as f64 * r_prime_target + 1e-9).floor() as u32).min(a_m);
    let mw = 1usize << w_exp;
    let ml = 1usize << (a_m - w_exp);
    let zero_secrecy = w_exp == 0;

    let (cells, cell_size) = if a_11 > w_exp {
        (1usize << (a_11 - w_exp), 1usize << (a_m - a_11))
    } else {
        (1, ml)
    };

    if (m10 as u64)
        .saturating_mul(m as u64)
        .saturating_mul(m2 as u64)
        > ENUM_GUARD
    {
        return Err(Error::Guard(format!(
            "codebook of {m10} x {m} x {m2} entries exceeds the enumeration guard"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(0);
    let q_seqs: Vec<Vec<u8>> = (0..m10)
        .map(|_| (0..n).map(|_| sample_idx(&mut rng, &cfg.pmf_q1) as u8).collect())
        .collect();
    let x1_seqs: Vec<Vec<Vec<u8>>> = (0..m10)
        .map(|i| {
            (0..m)
                .map(|_| {
                    (0..n)
                        .map(|pos| {
                            let q = q_seqs[i][pos] as usize;
                            sample_idx(&mut rng, &cfg.pmf_x1_given_q1[q]) as u8
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    let x2_seqs: Vec<Vec<u8>> = (0..m2)
        .map(|_| (0..n).map(|_| sample_idx(&mut rng, &cfg.pmf_x2) as u8).collect())
        .collect();

    let cb = Codebook {
        q_seqs,
        x1_seqs,
        x2_seqs,
        n,
        m10,
        m11,
        m2,
        m,
        mw,
        ml,
        cells,
        cell_size,
        realized,
        r_prime: w_exp as f64 / n as f64,
        r_prime_target,
        zero_secrecy,
        case,
        scheme: cfg.scheme,
        terms,
    };
    debug_assert!(cb.r_prime <= cb.realized.r + 1e-12);
    debug_assert_eq!(cb.cells * cb.cell_size * cb.mw, cb.m);
    Ok(cb)
}

/// One encoded transmission.
#[derive(Debug, Clone, Copy)]
pub struct Encoded {
    pub i: usize,
    pub b: usize,
    pub w: usize,
    pub l: usize,
    pub k: usize,
}

/// Stochastic encoder: maps the message pair onto a codeword, drawing the
/// dummy index uniformly from its partition cell (or from the whole dummy
/// space when the message fits the secure part) and the helper index
/// uniformly.
pub fn encode<R: Rng>(cb: &Codebook, w10: usize, w11: usize, rng: &mut R) -> Result<Encoded> {
    if w10 >= cb.m10 || w11 >= cb.m11 {
        return Err(Error::Validation(format!(
            "message ({w10}, {w11}) out of range ({}, {})",
            cb.m10, cb.m11
        )));
    }
    let (w, l) = if cb.partitioned() {
        let w = w11 / cb.cells;
        let j = w11 % cb.cells;
        let l = j * cb.cell_size + rng.gen_range(0..cb.cell_size);
        (w, l)
    } else {
        (w11, rng.gen_range(0..cb.ml))
    };
    let b = w * cb.ml + l;
    let k = rng.gen_range(0..cb.m2);
    Ok(Encoded {
        i: w10,
        b,
        w,
        l,
        k,
    })
}

/// Samples one channel output tuple per symbol.
pub fn transmit<R: Rng>(
    ch: &Channel,
    x1: &[u8],
    x2: &[u8],
    rng: &mut R,
) -> (Vec<u8>, Vec<u8>, Vec<u8>) {
    let y1_eff = ch.y1_size().max(1);
    let mut ys = Vec::with_capacity(x1.len());
    let mut zs = Vec::with_capacity(x1.len());
    let mut y1s = Vec::with_capacity(x1.len());
    for pos in 0..x1.len() {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut chosen = (ch.y_size() - 1, ch.z_size() - 1, y1_eff - 1);
        'outer: for y in 0..ch.y_size() {
            for z in 0..ch.z_size() {
                for y1 in 0..y1_eff {
                    acc += ch.prob(x1[pos] as usize, x2[pos] as usize, y, z, y1);
                    if u < acc {
                        chosen = (y, z, y1);
                        break 'outer;
                    }
                }
            }
        }
        ys.push(chosen.0 as u8);
        zs.push(chosen.1 as u8);
        y1s.push(chosen.2 as u8);
    }
    (ys, zs, y1s)
}

/// A single-letter joint with per-subset marginals and entropies, used by
/// the typicality checks.
struct LetterJoint {
    dims: Vec<usize>,
    marg: Vec<Vec<f64>>,
    h: Vec<f64>,
}

impl LetterJoint {
    fn new(j: &JointDist) -> Self {
        let nv = j.vars().len();
        let dims: Vec<usize> = j.vars().iter().map(|&(_, s)| s).collect();
        let nmask = 1usize << nv;
        let mut marg = Vec::with_capacity(nmask);
        let mut h = Vec::with_capacity(nmask);
        for mask in 0..nmask {
            if mask == 0 {
                marg.push(Vec::new());
                h.push(0.0);
            } else {
                let m = j.marginal_mask(mask as u32);
                h.push(crate::info::entropy_of(&m));
                marg.push(m);
            }
        }
        LetterJoint { dims, marg, h }
    }

    fn proj(&self, mask: usize, tuple: &[usize]) -> usize {
        let mut idx = 0usize;
        for (i, &d) in self.dims.iter().enumerate() {
            if mask >> i & 1 == 1 {
                idx = idx * d + tuple[i];
            }
        }
        idx
    }

    /// All-subset sample-entropy test: `seqs[i][pos]` is variable `i` at
    /// symbol `pos`.
    fn typical(&self, seqs: &[&[u8]], epsilon: f64) -> bool {
        let n = seqs[0].len();
        let nmask = 1usize << self.dims.len();
        let mut tuple = vec![0usize; self.dims.len()];
        let mut slog = vec![0.0f64; nmask];
        for pos in 0..n {
            for (i, s) in seqs.iter().enumerate() {
                tuple[i] = s[pos] as usize;
            }
            for mask in 1..nmask {
                let p = self.marg[mask][self.proj(mask, &tuple)];
                if p <= 0.0 {
                    return false;
                }
                slog[mask] -= p.log2();
            }
        }
        (1..nmask).all(|mask| (slog[mask] / n as f64 - self.h[mask]).abs() <= epsilon)
    }
}

/// Shared decoding context: per-symbol likelihood tables and (for the
/// typicality rule) the single-letter joints of each decode step.
pub struct DecodeCtx {
    /// `p(y | x1, x2)` flattened `[x1][x2][y]`.
    p_y: Vec<f64>,
    /// Helper-marginalized `p(y | x1)` flattened `[x1][y]`, for
    /// noise-forwarding decode.
    p_y_nf: Vec<f64>,
    x2_size: usize,
    y_size: usize,
    /// `(Q1, X2, Y)` letter joint: first receiver step.
    typ_step1: LetterJoint,
    /// `(Q1, X1, X2, Y)` letter joint: second receiver step.
    typ_step2: LetterJoint,
    /// `(Q1, Y)` with the helper as noise: first NF step.
    typ_nf1: LetterJoint,
    /// `(Q1, X1, Y)` with the helper as noise: second NF step.
    typ_nf2: LetterJoint,
}

impl DecodeCtx {
    pub fn new(cfg: &SimConfig) -> Result<Self> {
        let ch = &cfg.channel;
        let slice = ch.marginals();
        let mut p_y = vec![0.0; ch.x1_size() * ch.x2_size() * ch.y_size()];
        for x1 in 0..ch.x1_size() {
            for x2 in 0..ch.x2_size() {
                for y in 0..ch.y_size() {
                    p_y[(x1 * ch.x2_size() + x2) * ch.y_size() + y] = slice.p_y(x1, x2, y);
                }
            }
        }
        let mut p_y_nf = vec![0.0; ch.x1_size() * ch.y_size()];
        for x1 in 0..ch.x1_size() {
            for y in 0..ch.y_size() {
                p_y_nf[x1 * ch.y_size() + y] = (0..ch.x2_size())
                    .map(|x2| cfg.pmf_x2[x2] * slice.p_y(x1, x2, y))
                    .sum();
            }
        }

        // single-letter joint P(q1, x1, x2, y)
        let nq = cfg.pmf_q1.len();
        let (nx1, nx2, ny) = (ch.x1_size(), ch.x2_size(), ch.y_size());
        let mut full = Vec::with_capacity(nq * nx1 * nx2 * ny);
        for q in 0..nq {
            for x1 in 0..nx1 {
                for x2 in 0..nx2 {
                    for y in 0..ny {
                        full.push(
                            cfg.pmf_q1[q]
                                * cfg.pmf_x1_given_q1[q][x1]
                                * cfg.pmf_x2[x2]
                                * slice.p_y(x1, x2, y),
                        );
                    }
                }
            }
        }
        let j_full = JointDist::new(
            vec![
                (Var::Q1, nq),
                (Var::X1, nx1),
                (Var::X2, nx2),
                (Var::Y, ny),
            ],
            full,
        )?;
        let j_step1 = j_full.drop_to(&[Var::Q1, Var::X2, Var::Y])?;
        let j_nf2 = j_full.drop_to(&[Var::Q1, Var::X1, Var::Y])?;
        let j_nf1 = j_full.drop_to(&[Var::Q1, Var::Y])?;

        Ok(DecodeCtx {
            p_y,
            p_y_nf,
            x2_size: nx2,
            y_size: ny,
            typ_step1: LetterJoint::new(&j_step1),
            typ_step2: LetterJoint::new(&j_full),
            typ_nf1: LetterJoint::new(&j_nf1),
            typ_nf2: LetterJoint::new(&j_nf2),
        })
    }

    #[inline]
    fn loglik(&self, x1: &[u8], x2: &[u8], y: &[u8]) -> f64 {
        let mut ll = 0.0;
        for pos in 0..y.len() {
            let p = self.p_y
                [(x1[pos] as usize * self.x2_size + x2[pos] as usize) * self.y_size + y[pos] as usize];
            if p <= 0.0 {
                return f64::NEG_INFINITY;
            }
            ll += p.log2();
        }
        ll
    }

    #[inline]
    fn loglik_nf(&self, x1: &[u8], y: &[u8]) -> f64 {
        let mut ll = 0.0;
        for pos in 0..y.len() {
            let p = self.p_y_nf[x1[pos] as usize * self.y_size + y[pos] as usize];
            if p <= 0.0 {
                return f64::NEG_INFINITY;
            }
            ll += p.log2();
        }
        ll
    }
}

fn ml_decode_receiver(ctx: &DecodeCtx, cb: &Codebook, y: &[u8]) -> Option<(usize, usize)> {
    let mut best = f64::NEG_INFINITY;
    let mut best_msg: Option<(usize, usize)> = None;
    let mut ambiguous = false;
    for i in 0..cb.m10 {
        for b in 0..cb.valid_b() {
            let x1 = &cb.x1_seqs[i][b];
            for k in 0..cb.m2 {
                let ll = ctx.loglik(x1, &cb.x2_seqs[k], y);
                if ll == f64::NEG_INFINITY {
                    continue;
                }
                let msg = (i, cb.message_of_b(b));
                if ll > best {
                    best = ll;
                    best_msg = Some(msg);
                    ambiguous = false;
                } else if ll == best && best_msg != Some(msg) {
                    ambiguous = true;
                }
            }
        }
    }
    if ambiguous {
        None
    } else {
        best_msg
    }
}

fn ml_decode_nf(ctx: &DecodeCtx, cb: &Codebook, y: &[u8]) -> Option<(usize, usize)> {
    let mut best = f64::NEG_INFINITY;
    let mut best_msg: Option<(usize, usize)> = None;
    let mut ambiguous = false;
    for i in 0..cb.m10 {
        for b in 0..cb.valid_b() {
            let ll = ctx.loglik_nf(&cb.x1_seqs[i][b], y);
            if ll == f64::NEG_INFINITY {
                continue;
            }
            let msg = (i, cb.message_of_b(b));
            if ll > best {
                best = ll;
                best_msg = Some(msg);
                ambiguous = false;
            } else if ll == best && best_msg != Some(msg) {
                ambiguous = true;
            }
        }
    }
    if ambiguous {
        None
    } else {
        best_msg
    }
}

fn typ_decode_receiver(
    ctx: &DecodeCtx,
    cb: &Codebook,
    y: &[u8],
    epsilon: f64,
) -> Option<(usize, usize)> {
    // step 1: unique (i, k) with (q(i), x2(k), y) typical
    let mut found: Option<(usize, usize)> = None;
    for i in 0..cb.m10 {
        for k in 0..cb.m2 {
            if ctx
                .typ_step1
                .typical(&[&cb.q_seqs[i], &cb.x2_seqs[k], y], epsilon)
            {
                if found.is_some() {
                    return None;
                }
                found = Some((i, k));
            }
        }
    }
    let (i, k) = found?;
    // step 2: unique b with (q(i), x1(i,b), x2(k), y) typical
    let mut found_b: Option<usize> = None;
    for b in 0..cb.valid_b() {
        if ctx.typ_step2.typical(
            &[&cb.q_seqs[i], &cb.x1_seqs[i][b], &cb.x2_seqs[k], y],
            epsilon,
        ) {
            if let Some(prev) = found_b {
                if cb.message_of_b(prev) != cb.message_of_b(b) {
                    return None;
                }
            } else {
                found_b = Some(b);
            }
        }
    }
    found_b.map(|b| (i, cb.message_of_b(b)))
}

fn typ_decode_nf(ctx: &DecodeCtx, cb: &Codebook, y: &[u8], epsilon: f64) -> Option<(usize, usize)> {
    let mut found: Option<usize> = None;
    for i in 0..cb.m10 {
        if ctx.typ_nf1.typical(&[&cb.q_seqs[i], y], epsilon) {
            if found.is_some() {
                return None;
            }
            found = Some(i);
        }
    }
    let i = found?;
    let mut found_b: Option<usize> = None;
    for b in 0..cb.valid_b() {
        if ctx
            .typ_nf2
            .typical(&[&cb.q_seqs[i], &cb.x1_seqs[i][b], y], epsilon)
        {
            if let Some(prev) = found_b {
                if cb.message_of_b(prev) != cb.message_of_b(b) {
                    return None;
                }
            } else {
                found_b = Some(b);
            }
        }
    }
    found_b.map(|b| (i, cb.message_of_b(b)))
}

/// Receiver decode: returns the reconstructed `(w10, w11)` or `None` on
/// erasure/ambiguity (counted as error).
pub fn decode_receiver(
    cfg: &SimConfig,
    cb: &Codebook,
    y: &[u8],
    decoder: Decoder,
) -> Result<Option<(usize, usize)>> {
    let ctx = DecodeCtx::new(cfg)?;
    Ok(decode_receiver_ctx(&ctx, cb, y, decoder))
}

fn decode_receiver_ctx(
    ctx: &DecodeCtx,
    cb: &Codebook,
    y: &[u8],
    decoder: Decoder,
) -> Option<(usize, usize)> {
    match decoder {
        Decoder::MaxLikelihood => ml_decode_receiver(ctx, cb, y),
        Decoder::JointTypicality { epsilon } => typ_decode_receiver(ctx, cb, y, epsilon),
    }
}

/// Noise-forwarding decode: the helper codeword is never decoded; the
/// likelihood marginalizes it out symbolwise.
pub fn decode_noise_forwarding(
    cfg: &SimConfig,
    cb: &Codebook,
    y: &[u8],
    decoder: Decoder,
) -> Result<Option<(usize, usize)>> {
    let ctx = DecodeCtx::new(cfg)?;
    Ok(decode_nf_ctx(&ctx, cb, y, decoder))
}

fn decode_nf_ctx(
    ctx: &DecodeCtx,
    cb: &Codebook,
    y: &[u8],
    decoder: Decoder,
) -> Option<(usize, usize)> {
    match decoder {
        Decoder::MaxLikelihood => ml_decode_nf(ctx, cb, y),
        Decoder::JointTypicality { epsilon } => typ_decode_nf(ctx, cb, y, epsilon),
    }
}

fn decode_seq(mut idx: u64, n: usize, base: usize) -> Vec<u8> {
    let mut out = vec![0u8; n];
    for pos in (0..n).rev() {
        out[pos] = (idx % base as u64) as u8;
        idx /= base as u64;
    }
    out
}

/// Joint weight `P(z-sequence, message)` accumulated over the dummy and
/// helper indices of one codebook.
fn z_message_weights(cb: &Codebook, p_z: &[f64], x2_size: usize, z_size: usize, z: &[u8]) -> Vec<f64> {
    let n = z.len();
    let n_msg = cb.m10 * cb.m11;
    let mut out = vec![0.0; n_msg];
    let prior_msg = 1.0 / (cb.m10 as f64 * cb.m11 as f64);
    for i in 0..cb.m10 {
        for b in 0..cb.valid_b() {
            let w11 = cb.message_of_b(b);
            let l_count = if cb.partitioned() {
                cb.cell_size
            } else {
                cb.ml
            } as f64;
            let x1 = &cb.x1_seqs[i][b];
            let mut lik_sum = 0.0;
            for k in 0..cb.m2 {
                let x2 = &cb.x2_seqs[k];
                let mut lik = 1.0;
                for pos in 0..n {
                    lik *= p_z[(x1[pos] as usize * x2_size + x2[pos] as usize) * z_size
                        + z[pos] as usize];
                    if lik == 0.0 {
                        break;
                    }
                }
                lik_sum += lik;
            }
            out[i * cb.m11 + w11] += prior_msg / l_count / cb.m2 as f64 * lik_sum;
        }
    }
    out
}

/// Exact per-codebook equivocation `H(W1 | Z^N) / N` in bits per symbol,
/// by enumerating every eavesdropper output sequence. Refuses when
/// `|Z|^N` exceeds the guard; use [`equivocation_monte_carlo`] then.
pub fn exact_equivocation(cfg: &SimConfig, cb: &Codebook) -> Result<f64> {
    let ch = &cfg.channel;
    let n = cb.n;
    let total = (ch.z_size() as u64).checked_pow(n as u32).unwrap_or(u64::MAX);
    if total > ENUM_GUARD {
        return Err(Error::Guard(format!(
            "|Z|^N = {total} output sequences exceed the exact-enumeration guard; \
             use the Monte Carlo equivocation estimate"
        )));
    }
    let slice = ch.marginals();
    let mut p_z = vec![0.0; ch.x1_size() * ch.x2_size() * ch.z_size()];
    for x1 in 0..ch.x1_size() {
        for x2 in 0..ch.x2_size() {
            for z in 0..ch.z_size() {
                p_z[(x1 * ch.x2_size() + x2) * ch.z_size() + z] = slice.p_z(x1, x2, z);
            }
        }
    }
    let x2_size = ch.x2_size();
    let z_size = ch.z_size();
    // fixed-size chunks, summed in chunk order: the reduction is
    // deterministic no matter how many workers run
    let chunk: u64 = 4096;
    let n_chunks = total.div_ceil(chunk);
    let partials: Vec<f64> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = 0.0;
            for zi in c * chunk..((c + 1) * chunk).min(total) {
                let z = decode_seq(zi, n, z_size);
                let weights = z_message_weights(cb, &p_z, x2_size, z_size, &z);
                let pz: f64 = weights.iter().sum();
                if pz > 0.0 {
                    for &w in &weights {
                        if w > 0.0 {
                            acc += w * (pz / w).log2();
                        }
                    }
                }
            }
            acc
        })
        .collect();
    let h: f64 = partials.iter().sum();
    Ok(h / n as f64)
}

/// Monte Carlo estimate of `H(W1 | Z^N) / N` with a 95% confidence
/// half-width, for configurations past the exact-enumeration guard.
pub fn equivocation_monte_carlo(
    cfg: &SimConfig,
    cb: &Codebook,
    samples: usize,
) -> Result<(f64, f64)> {
    let ch = &cfg.channel;
    let slice = ch.marginals();
    let mut p_z = vec![0.0; ch.x1_size() * ch.x2_size() * ch.z_size()];
    for x1 in 0..ch.x1_size() {
        for x2 in 0..ch.x2_size() {
            for z in 0..ch.z_size() {
                p_z[(x1 * ch.x2_size() + x2) * ch.z_size() + z] = slice.p_z(x1, x2, z);
            }
        }
    }
    let x2_size = ch.x2_size();
    let z_size = ch.z_size();
    let vals: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(1_000_000_007 + s as u64);
            let w10 = rng.gen_range(0..cb.m10);
            let w11 = rng.gen_range(0..cb.m11);
            let enc = encode(cb, w10, w11, &mut rng).expect("message in range");
            let (_, z, _) = transmit(ch, &cb.x1_seqs[enc.i][enc.b], &cb.x2_seqs[enc.k], &mut rng);
            let weights = z_message_weights(cb, &p_z, x2_size, z_size, &z);
            let pz: f64 = weights.iter().sum();
            let pm = weights[w10 * cb.m11 + w11];
            if pm > 0.0 && pz > 0.0 {
                (pz / pm).log2()
            } else {
                0.0
            }
        })
        .collect();
    let n = cb.n as f64;
    let mean = vals.iter().sum::<f64>() / vals.len() as f64 / n;
    let var = vals
        .iter()
        .map(|v| (v / n - mean).powi(2))
        .sum::<f64>()
        / (vals.len().saturating_sub(1)).max(1) as f64;
    let ci = 1.96 * (var / vals.len() as f64).sqrt();
    Ok((mean, ci))
}

/// Helper-facing security `H(W1 | Y1^N, X2^N) / N`, measurable when the
/// channel exposes a helper observation output.
pub fn deaf_helper_security(cfg: &SimConfig, cb: &Codebook) -> Result<f64> {
    let ch = &cfg.channel;
    if ch.y1_size() == 0 {
        return Err(Error::Validation("channel has no helper observation".into()));
    }
    let n = cb.n;
    let total = (ch.y1_size() as u64)
        .checked_pow(n as u32)
        .unwrap_or(u64::MAX)
        .saturating_mul(cb.m2 as u64);
    if total > ENUM_GUARD {
        return Err(Error::Guard(format!(
            "|Y1|^N * M2 = {total} exceeds the exact-enumeration guard"
        )));
    }
    let slice = ch.marginals();
    let mut p_y1 = vec![0.0; ch.x1_size() * ch.x2_size() * ch.y1_size()];
    for x1 in 0..ch.x1_size() {
        for x2 in 0..ch.x2_size() {
            for y1 in 0..ch.y1_size() {
                p_y1[(x1 * ch.x2_size() + x2) * ch.y1_size() + y1] = slice.p_y1(x1, x2, y1);
            }
        }
    }
    let y1_size = ch.y1_size();
    let seqs = (y1_size as u64).pow(n as u32);
    let n_msg = cb.m10 * cb.m11;
    let prior_msg = 1.0 / n_msg as f64;
    let mut h = 0.0;
    for k in 0..cb.m2 {
        let x2 = &cb.x2_seqs[k];
        for si in 0..seqs {
            let y1 = decode_seq(si, n, y1_size);
            let mut weights = vec![0.0; n_msg];
            for i in 0..cb.m10 {
                for b in 0..cb.valid_b() {
                    let w11 = cb.message_of_b(b);
                    let l_count = if cb.partitioned() {
                        cb.cell_size
                    } else {
                        cb.ml
                    } as f64;
                    let x1 = &cb.x1_seqs[i][b];
                    let mut lik = 1.0;
                    for pos in 0..n {
                        lik *= p_y1[(x1[pos] as usize * ch.x2_size() + x2[pos] as usize)
                            * y1_size
                            + y1[pos] as usize];
                        if lik == 0.0 {
                            break;
                        }
                    }
                    weights[i * cb.m11 + w11] += prior_msg / l_count * lik;
                }
            }
            let pt: f64 = weights.iter().sum::<f64>() / cb.m2 as f64;
            if pt > 0.0 {
                for &w in &weights {
                    let w = w / cb.m2 as f64;
                    if w > 0.0 {
                        h += w * (pt / w).log2();
                    }
                }
            }
        }
    }
    Ok(h / n as f64)
}

/// Everything a simulation run measures, serialized as the report JSON.
#[derive(Debug, Clone, Serialize)]
pub struct SimReport {
    pub empirical_pe: f64,
    pub pe_ci95: f64,
    pub equivocation_bits_per_symbol: f64,
    pub realized_r10: f64,
    pub realized_r11: f64,
    pub realized_r2: f64,
    pub r_prime: f64,
    pub scheme: String,
    pub case: String,
    pub seed: u64,
    pub realized_r: f64,
    pub blocklength: usize,
    pub trials: usize,
    pub errors: usize,
    /// `exact` (full enumeration) or `monte_carlo`.
    pub equivocation_mode: String,
    /// 95% half-width of the Monte Carlo estimate; 0 for exact.
    pub equivocation_ci95: f64,
    /// The run proceeded with zero secure excess (rate only, no secrecy).
    pub zero_secrecy: bool,
    /// Per-chain rate cap of the region formulas at the simulated input law.
    pub theoretical_r1_cap: f64,
    /// Per-chain equivocation cap at the simulated input law.
    pub theoretical_re_cap: f64,
    /// Helper-facing security `H(W1|Y1^N X2^N)/N`, when measurable.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub deaf_security_bits_per_symbol: Option<f64>,
}

/// Builds the codebook, runs the seeded trials, and measures equivocation.
/// Fully deterministic given `(cfg, seed)`; trials use independent RNG
/// streams so the error count is worker-count independent.
pub fn run_experiment(cfg: &SimConfig) -> Result<SimReport> {
    if cfg.trials == 0 {
        return Err(Error::Validation("trials must be >= 1".into()));
    }
    let cb = build_codebook(cfg)?;
    if cb.r_prime > cb.realized.r + 1e-12 {
        return Err(Error::Internal("secure excess exceeds codebook rate".into()));
    }
    let ctx = DecodeCtx::new(cfg)?;
    let errors: usize = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(2 + t as u64);
            let w10 = rng.gen_range(0..cb.m10);
            let w11 = rng.gen_range(0..cb.m11);
            let enc = encode(&cb, w10, w11, &mut rng).expect("message in range");
            let (y, _z, _y1) = transmit(
                &cfg.channel,
                &cb.x1_seqs[enc.i][enc.b],
                &cb.x2_seqs[enc.k],
                &mut rng,
            );
            let decoded = match cfg.scheme {
                Scheme::NoiseForwarding => decode_nf_ctx(&ctx, &cb, &y, cfg.decoder),
                _ => decode_receiver_ctx(&ctx, &cb, &y, cfg.decoder),
            };
            usize::from(decoded != Some((w10, w11)))
        })
        .sum();
    let pe = errors as f64 / cfg.trials as f64;
    let pe_ci95 = 1.96 * (pe * (1.0 - pe) / cfg.trials as f64).sqrt();

    let (equiv, equiv_ci, mode) = match exact_equivocation(cfg, &cb) {
        Ok(v) => (v, 0.0, "exact"),
        Err(Error::Guard(_)) => {
            let (v, ci) = equivocation_monte_carlo(cfg, &cb, 20_000)?;
            (v, ci, "monte_carlo")
        }
        Err(e) => return Err(e),
    };

    let bounds = per_pi_bounds_c(&cfg.x_level_chain(), &cfg.channel)?;

    let deaf = if cfg.channel.y1_size() > 0 {
        match deaf_helper_security(cfg, &cb) {
            Ok(v) => Some(v),
            Err(Error::Guard(_)) => None,
            Err(e) => return Err(e),
        }
    } else {
        None
    };

    Ok(SimReport {
        empirical_pe: pe,
        pe_ci95,
        equivocation_bits_per_symbol: equiv,
        realized_r10: cb.realized.r10,
        realized_r11: cb.realized.r11,
        realized_r2: cb.realized.r2,
        r_prime: cb.r_prime,
        scheme: cb.scheme.to_string(),
        case: cb.case.to_string(),
        seed: cfg.seed,
        realized_r: cb.realized.r,
        blocklength: cfg.blocklength,
        trials: cfg.trials,
        errors,
        equivocation_mode: mode.to_string(),
        equivocation_ci95: equiv_ci,
        zero_secrecy: cb.zero_secrecy,
        theoretical_r1_cap: bounds.r1_cap,
        theoretical_re_cap: bounds.re_cap,
        deaf_security_bits_per_symbol: deaf,
    })
}
