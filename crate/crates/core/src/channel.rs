//! Finite discrete memoryless channels with one receiver output, one
//! eavesdropper output, and an optional helper observation output.
//!
//! A channel stores the conditional PMF `p(y, z [, y1] | x1, x2)` as a flat
//! tensor over finite alphabets. `x2_size = 1` is the canonical encoding of
//! "no helper", so single-sender wiretap channels share the same type.

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Row sums within this distance of 1 are renormalized exactly; anything
/// further out is rejected.
pub const ROW_SUM_TOL: f64 = 1e-9;

/// A discrete memoryless channel `p(y, z [, y1] | x1, x2)`.
///
/// Immutable after construction; all entries are validated nonnegative and
/// every conditional output distribution is renormalized to sum exactly to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    x1_size: usize,
    x2_size: usize,
    y_size: usize,
    z_size: usize,
    /// 0 means the helper observation output is absent.
    y1_size: usize,
    /// Flat tensor indexed `[x1][x2][y][z][y1]` (the y1 axis has extent 1
    /// when `y1_size == 0`).
    p: Vec<f64>,
}

impl Channel {
    /// Builds a channel from alphabet sizes and a flat tensor in
    /// `[x1][x2][y][z][y1]` order. Rows within `ROW_SUM_TOL` of total mass 1
    /// are renormalized (and the renormalization logged); anything else is an
    /// error naming the offending `(x1, x2)` row.
    pub fn new(
        x1_size: usize,
        x2_size: usize,
        y_size: usize,
        z_size: usize,
        y1_size: usize,
        mut p: Vec<f64>,
    ) -> Result<Self> {
        if x1_size == 0 || x2_size == 0 || y_size == 0 || z_size == 0 {
            return Err(Error::DimMismatch(
                "alphabet sizes x1, x2, y, z must all be >= 1".into(),
            ));
        }
        let y1_eff = y1_size.max(1);
        let expected = x1_size * x2_size * y_size * z_size * y1_eff;
        if p.len() != expected {
            return Err(Error::DimMismatch(format!(
                "tensor has {} entries, expected {}",
                p.len(),
                expected
            )));
        }
        let row_len = y_size * z_size * y1_eff;
        for x1 in 0..x1_size {
            for x2 in 0..x2_size {
                let base = (x1 * x2_size + x2) * row_len;
                let row = &mut p[base..base + row_len];
                for &v in row.iter() {
                    if !(v >= 0.0) || !v.is_finite() {
                        return Err(Error::Validation(format!(
                            "negative or non-finite probability {v} at (x1={x1}, x2={x2})"
                        )));
                    }
                }
                let sum: f64 = row.iter().sum();
                if (sum - 1.0).abs() > ROW_SUM_TOL {
                    return Err(Error::RowSum { x1, x2, sum });
                }
                if sum != 1.0 {
                    log::warn!(
                        "renormalizing channel row (x1={x1}, x2={x2}): sum was {sum:.17}"
                    );
                    renormalize_row(row);
                }
            }
        }
        Ok(Self {
            x1_size,
            x2_size,
            y_size,
            z_size,
            y1_size,
            p,
        })
    }

    pub fn x1_size(&self) -> usize {
        self.x1_size
    }
    pub fn x2_size(&self) -> usize {
        self.x2_size
    }
    pub fn y_size(&self) -> usize {
        self.y_size
    }
    pub fn z_size(&self) -> usize {
        self.z_size
    }
    pub fn y1_size(&self) -> usize {
        self.y1_size
    }

    fn y1_eff(&self) -> usize {
        self.y1_size.max(1)
    }

    /// `p(y, z, y1 | x1, x2)`; pass `y1 = 0` for channels without a helper
    /// observation.
    #[inline]
    pub fn prob(&self, x1: usize, x2: usize, y: usize, z: usize, y1: usize) -> f64 {
        let y1_eff = self.y1_eff();
        self.p[(((x1 * self.x2_size + x2) * self.y_size + y) * self.z_size + z) * y1_eff + y1]
    }

    /// `p(y, z | x1, x2)` with the helper observation marginalized out.
    #[inline]
    pub fn prob_yz(&self, x1: usize, x2: usize, y: usize, z: usize) -> f64 {
        let y1_eff = self.y1_eff();
        let base = (((x1 * self.x2_size + x2) * self.y_size + y) * self.z_size + z) * y1_eff;
        self.p[base..base + y1_eff].iter().sum()
    }

    /// Derived conditional marginals `p(y|x1,x2)`, `p(z|x1,x2)`, `p(y1|x1,x2)`.
    pub fn marginals(&self) -> ChannelSlice {
        let (nx1, nx2, ny, nz) = (self.x1_size, self.x2_size, self.y_size, self.z_size);
        let ny1 = self.y1_eff();
        let mut p_y = vec![0.0; nx1 * nx2 * ny];
        let mut p_z = vec![0.0; nx1 * nx2 * nz];
        let mut p_y1 = vec![0.0; nx1 * nx2 * ny1];
        for x1 in 0..nx1 {
            for x2 in 0..nx2 {
                for y in 0..ny {
                    for z in 0..nz {
                        for y1 in 0..ny1 {
                            let v = self.prob(x1, x2, y, z, y1);
                            p_y[(x1 * nx2 + x2) * ny + y] += v;
                            p_z[(x1 * nx2 + x2) * nz + z] += v;
                            p_y1[(x1 * nx2 + x2) * ny1 + y1] += v;
                        }
                    }
                }
            }
        }
        ChannelSlice {
            x1_size: nx1,
            x2_size: nx2,
            y_size: ny,
            z_size: nz,
            y1_size: self.y1_size,
            p_y_given_x: p_y,
            p_z_given_x: p_z,
            p_y1_given_x: p_y1,
        }
    }

    /// Content hash of the parsed tensor (dimensions plus entry bit patterns).
    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        for d in [
            self.x1_size,
            self.x2_size,
            self.y_size,
            self.z_size,
            self.y1_size,
        ] {
            hasher.update((d as u64).to_le_bytes());
        }
        for &v in &self.p {
            hasher.update(v.to_bits().to_le_bytes());
        }
        let out = hasher.finalize();
        let mut s = String::with_capacity(64);
        for b in out {
            s.push_str(&format!("{b:02x}"));
        }
        s
    }

    /// Serializes back to the channel JSON document format. `parse` of the
    /// output reproduces numerically identical tensors.
    pub fn to_json(&self) -> Value {
        let y1_eff = self.y1_eff();
        let mut x1_arr = Vec::with_capacity(self.x1_size);
        for x1 in 0..self.x1_size {
            let mut x2_arr = Vec::with_capacity(self.x2_size);
            for x2 in 0..self.x2_size {
                let mut y_arr = Vec::with_capacity(self.y_size);
                for y in 0..self.y_size {
                    let mut z_arr = Vec::with_capacity(self.z_size);
                    for z in 0..self.z_size {
                        if self.y1_size > 0 {
                            let y1_arr: Vec<Value> = (0..y1_eff)
                                .map(|y1| json!(self.prob(x1, x2, y, z, y1)))
                                .collect();
                            z_arr.push(Value::Array(y1_arr));
                        } else {
                            z_arr.push(json!(self.prob(x1, x2, y, z, 0)));
                        }
                    }
                    y_arr.push(Value::Array(z_arr));
                }
                x2_arr.push(Value::Array(y_arr));
            }
            x1_arr.push(Value::Array(x2_arr));
        }
        json!({
            "x1_size": self.x1_size,
            "x2_size": self.x2_size,
            "y_size": self.y_size,
            "z_size": self.z_size,
            "y1_size": self.y1_size,
            "p": Value::Array(x1_arr),
        })
    }

    pub fn serialize(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("channel json")
    }
}

/// Derived conditional PMFs of a [`Channel`], one per output.
#[derive(Debug, Clone)]
pub struct ChannelSlice {
    pub x1_size: usize,
    pub x2_size: usize,
    pub y_size: usize,
    pub z_size: usize,
    pub y1_size: usize,
    p_y_given_x: Vec<f64>,
    p_z_given_x: Vec<f64>,
    p_y1_given_x: Vec<f64>,
}

impl ChannelSlice {
    pub fn p_y(&self, x1: usize, x2: usize, y: usize) -> f64 {
        self.p_y_given_x[(x1 * self.x2_size + x2) * self.y_size + y]
    }
    pub fn p_z(&self, x1: usize, x2: usize, z: usize) -> f64 {
        self.p_z_given_x[(x1 * self.x2_size + x2) * self.z_size + z]
    }
    pub fn p_y1(&self, x1: usize, x2: usize, y1: usize) -> f64 {
        self.p_y1_given_x[(x1 * self.x2_size + x2) * self.y1_size.max(1) + y1]
    }
}

fn get_usize(v: &Value, key: &str) -> Result<usize> {
    match v.get(key) {
        Some(Value::Number(n)) => {
            let n = n
                .as_u64()
                .ok_or_else(|| Error::Format(format!("\"{key}\" must be a nonnegative integer")))?;
            Ok(n as usize)
        }
        Some(_) => Err(Error::Format(format!("\"{key}\" must be an integer"))),
        None => Err(Error::Format(format!("missing key \"{key}\""))),
    }
}

fn flatten_tensor(v: &Value, dims: &[usize], path: &str, out: &mut Vec<f64>) -> Result<()> {
    match dims.split_first() {
        None => match v.as_f64() {
            Some(x) => {
                out.push(x);
                Ok(())
            }
            None => Err(Error::Format(format!("expected number at p{path}"))),
        },
        Some((&d, rest)) => {
            let arr = v
                .as_array()
                .ok_or_else(|| Error::Format(format!("expected array at p{path}")))?;
            if arr.len() != d {
                return Err(Error::Format(format!(
                    "expected {d} entries at p{path}, found {}",
                    arr.len()
                )));
            }
            for (i, e) in arr.iter().enumerate() {
                flatten_tensor(e, rest, &format!("{path}[{i}]"), out)?;
            }
            Ok(())
        }
    }
}

/// Parses a channel JSON document:
/// `{ "x1_size", "x2_size", "y_size", "z_size", "y1_size" (optional),
///   "p": nested array p[x1][x2][y][z] or p[x1][x2][y][z][y1] }`.
pub fn parse_channel(text: &str) -> Result<Channel> {
    let v: Value = serde_json::from_str(text)?;
    if !v.is_object() {
        return Err(Error::Format("channel document must be a JSON object".into()));
    }
    let x1_size = get_usize(&v, "x1_size")?;
    let x2_size = get_usize(&v, "x2_size")?;
    let y_size = get_usize(&v, "y_size")?;
    let z_size = get_usize(&v, "z_size")?;
    let y1_size = if v.get("y1_size").is_some() {
        get_usize(&v, "y1_size")?
    } else {
        0
    };
    let p = v
        .get("p")
        .ok_or_else(|| Error::Format("missing key \"p\"".into()))?;
    let mut dims = vec![x1_size, x2_size, y_size, z_size];
    if y1_size > 0 {
        dims.push(y1_size);
    }
    let mut flat = Vec::with_capacity(dims.iter().product());
    flatten_tensor(p, &dims, "", &mut flat)?;
    Channel::new(x1_size, x2_size, y_size, z_size, y1_size, flat)
}

/// Drives the row sum to exactly 1.0 by absorbing the residual into the
/// largest entry. Idempotent: once the sum is exact (or no step improves
/// it), re-running changes nothing, so parse -> serialize -> parse is a
/// fixed point.
fn renormalize_row(row: &mut [f64]) {
    for _ in 0..64 {
        let s: f64 = row.iter().sum();
        let d = 1.0 - s;
        if d == 0.0 {
            return;
        }
        let imax = row
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).expect("finite"))
            .map(|(i, _)| i)
            .expect("nonempty row");
        let old = row[imax];
        row[imax] = old + d;
        let s2: f64 = row.iter().sum();
        if (1.0 - s2).abs() >= d.abs() {
            row[imax] = old;
            return;
        }
    }
}

/// A binary symmetric channel matrix with crossover probability `p`.
pub fn bsc_matrix(p: f64) -> [[f64; 2]; 2] {
    [[1.0 - p, p], [p, 1.0 - p]]
}

/// Builds the helperless channel where `Y` and `Z` are independent
/// observations of `X1` through the given per-output transition matrices.
/// Useful for degraded BSC-pair test channels.
pub fn product_wiretap_channel(py_given_x: &[Vec<f64>], pz_given_x: &[Vec<f64>]) -> Result<Channel> {
    let x1_size = py_given_x.len();
    if pz_given_x.len() != x1_size {
        return Err(Error::DimMismatch("p(y|x) and p(z|x) disagree on |X1|".into()));
    }
    let y_size = py_given_x[0].len();
    let z_size = pz_given_x[0].len();
    let mut p = Vec::with_capacity(x1_size * y_size * z_size);
    for x1 in 0..x1_size {
        for y in 0..y_size {
            for z in 0..z_size {
                p.push(py_given_x[x1][y] * pz_given_x[x1][z]);
            }
        }
    }
    Channel::new(x1_size, 1, y_size, z_size, 0, p)
}
