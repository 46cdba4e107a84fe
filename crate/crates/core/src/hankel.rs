//! Truncated Hankel matrices `A[j][k] = scale · h(j + k)`, stored by their
//! `2N − 1` defining entries and applied through circulant embedding.

use std::io::{Read, Write};
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::model::DiscreteSymbolSpec;
use crate::par::{self, Parallelism};
use crate::sequences::eval_discrete;

/// Largest order [`HankelTruncation::dense_matrix`] materializes by default.
pub const DEFAULT_DENSE_LIMIT: usize = 8192;

#[derive(Clone)]
struct CirculantPlan {
    len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// Transform of the reversed entries, pre-divided by `len`.
    symbol: Arc<[Complex64]>,
}

/// An `N × N` Hankel truncation.
#[derive(Clone)]
pub struct HankelTruncation {
    order: usize,
    entries: Vec<f64>,
    scale: f64,
    label: String,
    plan: CirculantPlan,
}

impl std::fmt::Debug for HankelTruncation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HankelTruncation")
            .field("order", &self.order)
            .field("scale", &self.scale)
            .field("label", &self.label)
            .field("circulant_len", &self.plan.len)
            .finish()
    }
}

impl HankelTruncation {
    /// Builds the truncation of order `N` from `entries = h(0..=2N−2)`.
    pub fn new(entries: Vec<f64>, scale: f64, label: impl Into<String>) -> Result<Self> {
        if entries.is_empty() || entries.len().is_multiple_of(2) {
            return Err(Error::domain(format!(
                "a Hankel truncation needs an odd number 2N-1 of entries, got {}",
                entries.len()
            )));
        }
        if !scale.is_finite() || entries.iter().any(|x| !x.is_finite()) {
            return Err(Error::domain("Hankel entries and scale must be finite"));
        }
        let order = entries.len().div_ceil(2);
        let plan = CirculantPlan::new(&entries, order);
        Ok(HankelTruncation {
            order,
            entries,
            scale,
            label: label.into(),
            plan,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Size of the embedding circulant (next power of two `≥ 2N`).
    pub fn circulant_len(&self) -> usize {
        self.plan.len
    }

    /// `v[j] = scale · Σ_k h(j+k) u[k]` in `O(N log N)`.
    pub fn matvec(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(u)?;
        let mut out = vec![0.0; self.order];
        self.plan.apply(u, &mut out, self.scale);
        Ok(out)
    }

    /// Same as [`matvec`](Self::matvec), also returning the discarded
    /// imaginary residue relative to the output norm.
    pub fn matvec_with_residue(&self, u: &[f64]) -> Result<(Vec<f64>, f64)> {
        self.check_dim(u)?;
        let mut out = vec![0.0; self.order];
        let residue = self.plan.apply(u, &mut out, self.scale);
        let norm = par::norm(&out);
        let rel = if norm > 0.0 {
            residue * self.scale.abs() / norm
        } else {
            residue
        };
        Ok((out, rel))
    }

    /// Unchecked fast product used by the solvers; `out.len() == u.len() == N`.
    pub(crate) fn apply_into(&self, u: &[f64], out: &mut [f64]) {
        self.plan.apply(u, out, self.scale);
    }

    /// Reference `O(N²)` product by the double loop.
    pub fn dense_matvec(&self, u: &[f64], mode: Parallelism) -> Result<Vec<f64>> {
        self.check_dim(u)?;
        let n = self.order;
        let h = &self.entries;
        let s = self.scale;
        Ok(par::map_range(mode, n, |j| {
            let mut acc = 0.0;
            for k in 0..n {
                acc += h[j + k] * u[k];
            }
            s * acc
        }))
    }

    /// Materializes the symmetric matrix, refusing orders above `limit`.
    pub fn dense_matrix_with_limit(&self, limit: usize) -> Result<DMatrix<f64>> {
        let n = self.order;
        if n > limit {
            return Err(Error::resource(format!("order {n} exceeds the dense limit {limit}")));
        }
        Ok(DMatrix::from_fn(n, n, |j, k| self.scale * self.entries[j + k]))
    }

    pub fn dense_matrix(&self) -> Result<DMatrix<f64>> {
        self.dense_matrix_with_limit(DEFAULT_DENSE_LIMIT)
    }

    /// Writes `2N − 1` as a little-endian u64 followed by the entries as
    /// little-endian f64 (the scale is applied).
    pub fn write_entries<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(&(self.entries.len() as u64).to_le_bytes())?;
        for x in &self.entries {
            w.write_all(&(self.scale * x).to_le_bytes())?;
        }
        Ok(())
    }

    /// Reads the format produced by [`write_entries`](Self::write_entries).
    pub fn read_entries<R: Read>(mut r: R, label: impl Into<String>) -> Result<Self> {
        let mut buf = [0u8; 8];
        r.read_exact(&mut buf)?;
        let len = u64::from_le_bytes(buf);
        let len = usize::try_from(len).map_err(|_| Error::domain("entry count overflows usize"))?;
        if len > (1 << 34) {
            return Err(Error::resource(format!("entry count {len} is implausibly large")));
        }
        let mut entries = Vec::with_capacity(len);
        for _ in 0..len {
            r.read_exact(&mut buf)?;
            entries.push(f64::from_le_bytes(buf));
        }
        Self::new(entries, 1.0, label)
    }

    fn check_dim(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.order {
            return Err(Error::domain(format!(
                "vector length {} does not match Hankel order {}",
                u.len(),
                self.order
            )));
        }
        Ok(())
    }
}

impl CirculantPlan {
    fn new(entries: &[f64], order: usize) -> Self {
        let len = (2 * order).next_power_of_two();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(len);
        let inverse = planner.plan_fft_inverse(len);
        // v[j] = Σ_k r[2N−2−j−k] u[k] with r the reversed entries: a linear
        // convolution read at indices N−1..=2N−2, which wrap-around in a
        // circulant of length ≥ 2N never reaches.
        let mut buf = vec![Complex64::new(0.0, 0.0); len];
        for (i, &h) in entries.iter().rev().enumerate() {
            buf[i] = Complex64::new(h, 0.0);
        }
        forward.process(&mut buf);
        let inv_len = 1.0 / len as f64;
        buf.iter_mut().for_each(|z| *z *= inv_len);
        CirculantPlan {
            len,
            forward,
            inverse,
            symbol: buf.into(),
        }
    }

    /// Returns the largest discarded imaginary part.
    fn apply(&self, u: &[f64], out: &mut [f64], scale: f64) -> f64 {
        let n = u.len();
        let mut buf = vec![Complex64::new(0.0, 0.0); self.len];
        for (b, &x) in buf.iter_mut().zip(u) {
            b.re = x;
        }
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.forward.get_inplace_scratch_len()];
        self.forward.process_with_scratch(&mut buf, &mut scratch);
        for (b, s) in buf.iter_mut().zip(self.symbol.iter()) {
            *b *= s;
        }
        self.inverse.process_with_scratch(&mut buf, &mut scratch);
        let mut residue = 0.0f64;
        let top = 2 * n - 2;
        for (j, o) in out.iter_mut().enumerate() {
            let z = buf[top - j];
            *o = scale * z.re;
            residue = residue.max(z.im.abs());
        }
        residue
    }
}

/// Truncation of order `N` of the discrete model sequence.
pub fn build_discrete(spec: &DiscreteSymbolSpec, n: usize) -> Result<HankelTruncation> {
    if n < 2 {
        return Err(Error::domain(format!("truncation order N = {n} must be at least 2")));
    }
    spec.validate()?;
    let entries: Vec<f64> = (0..(2 * n - 1) as u64).map(|k| eval_discrete(spec, k)).collect();
    HankelTruncation::new(entries, 1.0, format!("discrete N={n}"))
}
