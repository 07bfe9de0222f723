//! Exact entropies and conditional mutual informations over explicit joint
//! PMFs, built by composing a factored auxiliary chain with a [`Channel`].
//!
//! All quantities are in bits (log base 2). Alphabets are tiny by design, so
//! marginalization is explicit summation over a flat tensor; nothing is
//! sampled or approximated.

use serde::{Deserialize, Serialize};

use crate::channel::Channel;
use crate::error::{Error, Result};

/// Negative conditional-MI values with magnitude up to this bound are float
/// cancellation and get clamped to 0; anything more negative is a bug.
pub const CMI_CLAMP: f64 = 1e-9;

/// Variables a composed joint distribution can range over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Var {
    Q1,
    U1,
    U2,
    X1,
    X2,
    Y,
    Z,
    Y1,
}

impl std::fmt::Display for Var {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Var::Q1 => "Q1",
            Var::U1 => "U1",
            Var::U2 => "U2",
            Var::X1 => "X1",
            Var::X2 => "X2",
            Var::Y => "Y",
            Var::Z => "Z",
            Var::Y1 => "Y1",
        };
        f.write_str(s)
    }
}

/// A factored input distribution
/// `P(q1) P(u1|q1) P(u2) P(x1|u1) P(x2|u2)`.
///
/// The Markov structure `Q1 -> U1 -> X1` and the independence of the
/// `(Q1, U1, X1)` branch from the `(U2, X2)` branch hold by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuxChain {
    pub q1_size: usize,
    pub u1_size: usize,
    pub u2_size: usize,
    pub pmf_q1: Vec<f64>,
    /// Stochastic matrix, row `q1` holds `P(u1 | q1)`.
    pub pmf_u1_given_q1: Vec<Vec<f64>>,
    pub pmf_u2: Vec<f64>,
    /// Stochastic matrix, row `u1` holds `P(x1 | u1)`.
    pub pmf_x1_given_u1: Vec<Vec<f64>>,
    /// Stochastic matrix, row `u2` holds `P(x2 | u2)`.
    pub pmf_x2_given_u2: Vec<Vec<f64>>,
}

fn check_pmf(p: &[f64], what: &str) -> Result<()> {
    if p.is_empty() {
        return Err(Error::Validation(format!("{what}: empty distribution")));
    }
    let mut sum = 0.0;
    for &v in p {
        if !(v >= 0.0) || !v.is_finite() {
            return Err(Error::Validation(format!("{what}: bad entry {v}")));
        }
        sum += v;
    }
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::Validation(format!("{what}: sums to {sum}")));
    }
    Ok(())
}

impl AuxChain {
    /// The trivial chain with every alphabet of size 1.
    pub fn degenerate() -> Self {
        Self::degenerate_for(1, 1)
    }

    /// Unit auxiliary alphabets pinned to the first channel input symbols;
    /// every information term vanishes under this chain.
    pub fn degenerate_for(x1_size: usize, x2_size: usize) -> Self {
        let point = |n: usize| {
            let mut row = vec![0.0; n];
            row[0] = 1.0;
            row
        };
        AuxChain {
            q1_size: 1,
            u1_size: 1,
            u2_size: 1,
            pmf_q1: vec![1.0],
            pmf_u1_given_q1: vec![vec![1.0]],
            pmf_u2: vec![1.0],
            pmf_x1_given_u1: vec![point(x1_size)],
            pmf_x2_given_u2: vec![point(x2_size)],
        }
    }

    pub fn x1_size(&self) -> usize {
        self.pmf_x1_given_u1[0].len()
    }

    pub fn x2_size(&self) -> usize {
        self.pmf_x2_given_u2[0].len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.pmf_q1.len() != self.q1_size
            || self.pmf_u1_given_q1.len() != self.q1_size
            || self.pmf_u2.len() != self.u2_size
            || self.pmf_x1_given_u1.len() != self.u1_size
            || self.pmf_x2_given_u2.len() != self.u2_size
        {
            return Err(Error::DimMismatch("aux chain factor shapes".into()));
        }
        check_pmf(&self.pmf_q1, "P(Q1)")?;
        check_pmf(&self.pmf_u2, "P(U2)")?;
        for (q1, row) in self.pmf_u1_given_q1.iter().enumerate() {
            if row.len() != self.u1_size {
                return Err(Error::DimMismatch(format!("P(U1|Q1={q1}) row length")));
            }
            check_pmf(row, &format!("P(U1|Q1={q1})"))?;
        }
        for (u1, row) in self.pmf_x1_given_u1.iter().enumerate() {
            check_pmf(row, &format!("P(X1|U1={u1})"))?;
        }
        for (u2, row) in self.pmf_x2_given_u2.iter().enumerate() {
            check_pmf(row, &format!("P(X2|U2={u2})"))?;
        }
        Ok(())
    }
}

/// A fully expanded joint PMF over an ordered variable catalog.
#[derive(Debug, Clone)]
pub struct JointDist {
    vars: Vec<(Var, usize)>,
    p: Vec<f64>,
}

impl JointDist {
    pub fn new(vars: Vec<(Var, usize)>, p: Vec<f64>) -> Result<Self> {
        let expected: usize = vars.iter().map(|&(_, s)| s).product();
        if p.len() != expected {
            return Err(Error::DimMismatch(format!(
                "joint tensor has {} entries, catalog implies {}",
                p.len(),
                expected
            )));
        }
        let mut mass = 0.0;
        for &v in &p {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::Validation(format!("joint entry {v}")));
            }
            mass += v;
        }
        if (mass - 1.0).abs() > 1e-9 {
            return Err(Error::Validation(format!("joint mass {mass}")));
        }
        Ok(JointDist { vars, p })
    }

    pub fn vars(&self) -> &[(Var, usize)] {
        &self.vars
    }

    pub fn tensor(&self) -> &[f64] {
        &self.p
    }

    pub fn total_mass(&self) -> f64 {
        self.p.iter().sum()
    }

    fn position(&self, v: Var) -> Option<usize> {
        self.vars.iter().position(|&(w, _)| w == v)
    }

    /// Bitmask over catalog positions for a set of variable names.
    pub fn mask_of(&self, vars: &[Var]) -> Result<u32> {
        let mut mask = 0u32;
        for &v in vars {
            match self.position(v) {
                Some(i) => mask |= 1 << i,
                None => return Err(Error::UnknownVariable(v.to_string())),
            }
        }
        Ok(mask)
    }

    /// Marginal PMF over the masked variables, flattened in catalog order.
    pub fn marginal_mask(&self, mask: u32) -> Vec<f64> {
        let n = self.vars.len();
        let mut out_size = 1usize;
        for (i, &(_, s)) in self.vars.iter().enumerate() {
            if mask >> i & 1 == 1 {
                out_size *= s;
            }
        }
        let mut out = vec![0.0; out_size];
        // index arithmetic: walk the flat tensor once, projecting each full
        // index onto the selected coordinates
        let mut idx = vec![0usize; n];
        for (flat, &v) in self.p.iter().enumerate() {
            let _ = flat;
            let mut proj = 0usize;
            for (i, &(_, s)) in self.vars.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    proj = proj * s + idx[i];
                }
            }
            out[proj] += v;
            // increment mixed-radix counter (last var fastest)
            for i in (0..n).rev() {
                idx[i] += 1;
                if idx[i] < self.vars[i].1 {
                    break;
                }
                idx[i] = 0;
            }
        }
        out
    }

    /// Entropy in bits of the marginal over `vars`, with `0 log 0 = 0`.
    pub fn entropy(&self, vars: &[Var]) -> Result<f64> {
        if vars.is_empty() {
            return Err(Error::Validation("entropy of empty variable set".into()));
        }
        let mask = self.mask_of(vars)?;
        Ok(self.entropy_mask(mask))
    }

    pub fn entropy_mask(&self, mask: u32) -> f64 {
        if mask == 0 {
            return 0.0;
        }
        entropy_of(&self.marginal_mask(mask))
    }

    /// Conditional mutual information `I(A; B | C)` in bits; `c` may be
    /// empty. Small negative results (float cancellation) clamp to 0.
    pub fn cmi(&self, a: &[Var], b: &[Var], c: &[Var]) -> Result<f64> {
        let ma = self.mask_of(a)?;
        let mb = self.mask_of(b)?;
        let mc = self.mask_of(c)?;
        if ma & mb != 0 || ma & mc != 0 || mb & mc != 0 {
            return Err(Error::OverlappingVariables(format!(
                "a={a:?} b={b:?} c={c:?}"
            )));
        }
        let raw = self.entropy_mask(ma | mc) + self.entropy_mask(mb | mc)
            - self.entropy_mask(ma | mb | mc)
            - self.entropy_mask(mc);
        clamp_cmi(raw)
    }

    /// Marginalizes down to `keep`, preserving catalog order.
    pub fn drop_to(&self, keep: &[Var]) -> Result<JointDist> {
        let mask = self.mask_of(keep)?;
        let vars: Vec<(Var, usize)> = self
            .vars
            .iter()
            .enumerate()
            .filter(|&(i, _)| mask >> i & 1 == 1)
            .map(|(_, &vs)| vs)
            .collect();
        let p = self.marginal_mask(mask);
        Ok(JointDist { vars, p })
    }
}

pub(crate) fn entropy_of(pmf: &[f64]) -> f64 {
    let mut h = 0.0;
    for &v in pmf {
        if v > 0.0 {
            h -= v * v.log2();
        }
    }
    h
}

pub(crate) fn clamp_cmi(raw: f64) -> Result<f64> {
    if raw >= 0.0 {
        Ok(raw)
    } else if raw >= -CMI_CLAMP {
        Ok(0.0)
    } else {
        Err(Error::Internal(format!(
            "conditional mutual information {raw} below -{CMI_CLAMP}"
        )))
    }
}

/// Memoized subset entropies of one joint distribution, keyed by variable
/// bitmask. Per-chain region evaluation reuses many overlapping terms, so
/// each marginal entropy is computed at most once.
pub struct EntropyTable<'a> {
    j: &'a JointDist,
    h: Vec<f64>,
    known: Vec<bool>,
}

impl<'a> EntropyTable<'a> {
    pub fn new(j: &'a JointDist) -> Self {
        let n = 1usize << j.vars().len();
        EntropyTable {
            j,
            h: vec![0.0; n],
            known: vec![false; n],
        }
    }

    pub fn h(&mut self, mask: u32) -> f64 {
        if mask == 0 {
            return 0.0;
        }
        let i = mask as usize;
        if !self.known[i] {
            self.h[i] = self.j.entropy_mask(mask);
            self.known[i] = true;
        }
        self.h[i]
    }

    pub fn mask(&self, vars: &[Var]) -> Result<u32> {
        self.j.mask_of(vars)
    }

    /// `I(A; B | C)` by masks, clamped like [`JointDist::cmi`].
    pub fn cmi_mask(&mut self, a: u32, b: u32, c: u32) -> Result<f64> {
        let raw = self.h(a | c) + self.h(b | c) - self.h(a | b | c) - self.h(c);
        clamp_cmi(raw)
    }

    pub fn cmi(&mut self, a: &[Var], b: &[Var], c: &[Var]) -> Result<f64> {
        let (ma, mb, mc) = (self.mask(a)?, self.mask(b)?, self.mask(c)?);
        self.cmi_mask(ma, mb, mc)
    }
}

/// Composes an auxiliary chain with a channel into the joint law over
/// `(Q1, U1, U2, X1, X2, Y, Z[, Y1])`.
pub fn compose_joint(aux: &AuxChain, ch: &Channel) -> Result<JointDist> {
    aux.validate()?;
    if aux.x1_size() != ch.x1_size() {
        return Err(Error::DimMismatch(format!(
            "P(X1|U1) emits |X1| = {}, channel expects {}",
            aux.x1_size(),
            ch.x1_size()
        )));
    }
    if aux.x2_size() != ch.x2_size() {
        return Err(Error::DimMismatch(format!(
            "P(X2|U2) emits |X2| = {}, channel expects {}",
            aux.x2_size(),
            ch.x2_size()
        )));
    }
    let has_y1 = ch.y1_size() > 0;
    let y1_eff = ch.y1_size().max(1);
    let mut vars = vec![
        (Var::Q1, aux.q1_size),
        (Var::U1, aux.u1_size),
        (Var::U2, aux.u2_size),
        (Var::X1, ch.x1_size()),
        (Var::X2, ch.x2_size()),
        (Var::Y, ch.y_size()),
        (Var::Z, ch.z_size()),
    ];
    if has_y1 {
        vars.push((Var::Y1, ch.y1_size()));
    }
    let total: usize = vars.iter().map(|&(_, s)| s).product();
    let mut p = Vec::with_capacity(total);
    for q1 in 0..aux.q1_size {
        let pq = aux.pmf_q1[q1];
        for u1 in 0..aux.u1_size {
            let pu1 = pq * aux.pmf_u1_given_q1[q1][u1];
            for u2 in 0..aux.u2_size {
                let pu2 = pu1 * aux.pmf_u2[u2];
                for x1 in 0..ch.x1_size() {
                    let px1 = pu2 * aux.pmf_x1_given_u1[u1][x1];
                    for x2 in 0..ch.x2_size() {
                        let px2 = px1 * aux.pmf_x2_given_u2[u2][x2];
                        for y in 0..ch.y_size() {
                            for z in 0..ch.z_size() {
                                for y1 in 0..y1_eff {
                                    p.push(px2 * ch.prob(x1, x2, y, z, y1));
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    JointDist::new(vars, p)
}
