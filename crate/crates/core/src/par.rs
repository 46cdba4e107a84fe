//! Data-parallel helpers with a sequential fallback.
//!
//! Every helper produces bitwise-identical results in both modes: work is
//! split only across independent outputs, and each output is reduced in a
//! fixed sequential order. With the `parallel` feature disabled,
//! [`Parallelism::Rayon`] silently runs sequentially.

/// Execution mode for the data-parallel inner loops.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Parallelism {
    #[default]
    Sequential,
    Rayon,
}

impl Parallelism {
    /// Whether rayon-backed execution is compiled in.
    pub const fn available() -> bool {
        cfg!(feature = "parallel")
    }

    /// Mode picked from the compiled feature set.
    pub fn from_features() -> Self {
        if Self::available() {
            Parallelism::Rayon
        } else {
            Parallelism::Sequential
        }
    }
}

const MIN_CHUNK: usize = 4096;

/// Sequential dot product; the reduction order is fixed.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    // four accumulators, combined in a fixed order
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for i in 0..chunks {
        let k = 4 * i;
        acc[0] += a[k] * b[k];
        acc[1] += a[k + 1] * b[k + 1];
        acc[2] += a[k + 2] * b[k + 2];
        acc[3] += a[k + 3] * b[k + 3];
    }
    let mut tail = 0.0;
    for k in 4 * chunks..a.len() {
        tail += a[k] * b[k];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Fills `out[i] = f(i)`.
pub fn fill_indexed<F>(mode: Parallelism, out: &mut [f64], f: F)
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    match mode {
        #[cfg(feature = "parallel")]
        Parallelism::Rayon if out.len() >= MIN_CHUNK => {
            use rayon::prelude::*;
            out.par_iter_mut().enumerate().for_each(|(i, o)| *o = f(i));
        }
        _ => {
            for (i, o) in out.iter_mut().enumerate() {
                *o = f(i);
            }
        }
    }
}

/// Maps over `0..n` collecting the results in index order.
pub fn map_range<T, F>(mode: Parallelism, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match mode {
        #[cfg(feature = "parallel")]
        Parallelism::Rayon => {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(f).collect()
        }
        _ => (0..n).map(f).collect(),
    }
}

/// Dot products of `w` against every vector of `basis`.
pub fn project(mode: Parallelism, basis: &[Vec<f64>], w: &[f64]) -> Vec<f64> {
    match mode {
        #[cfg(feature = "parallel")]
        Parallelism::Rayon if w.len() >= MIN_CHUNK => {
            use rayon::prelude::*;
            basis.par_iter().map(|v| dot(v, w)).collect()
        }
        _ => basis.iter().map(|v| dot(v, w)).collect(),
    }
}

/// `w -= Σ_i coeffs[i] · basis[i]`, summing each entry in basis order.
pub fn subtract_combination(mode: Parallelism, basis: &[Vec<f64>], coeffs: &[f64], w: &mut [f64]) {
    debug_assert_eq!(basis.len(), coeffs.len());
    let kernel = |offset: usize, chunk: &mut [f64]| {
        for (v, &c) in basis.iter().zip(coeffs) {
            if c == 0.0 {
                continue;
            }
            let src = &v[offset..offset + chunk.len()];
            for (x, &y) in chunk.iter_mut().zip(src) {
                *x -= c * y;
            }
        }
    };
    match mode {
        #[cfg(feature = "parallel")]
        Parallelism::Rayon if w.len() >= MIN_CHUNK => {
            use rayon::prelude::*;
            w.par_chunks_mut(MIN_CHUNK)
                .enumerate()
                .for_each(|(ci, chunk)| kernel(ci * MIN_CHUNK, chunk));
        }
        _ => {
            for (ci, chunk) in w.chunks_mut(MIN_CHUNK).enumerate() {
                kernel(ci * MIN_CHUNK, chunk);
            }
        }
    }
}

/// `out = Σ_i coeffs[i] · basis[i]`.
pub fn combine(mode: Parallelism, basis: &[Vec<f64>], coeffs: &[f64], out: &mut [f64]) {
    out.iter_mut().for_each(|x| *x = 0.0);
    let neg: Vec<f64> = coeffs.iter().map(|c| -c).collect();
    subtract_combination(mode, basis, &neg, out);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn basis(n: usize, m: usize) -> Vec<Vec<f64>> {
        (0..m)
            .map(|i| (0..n).map(|k| ((i * 31 + k * 7) % 13) as f64 - 6.0).collect())
            .collect()
    }

    #[test]
    fn modes_agree_bitwise() {
        let n = 3 * MIN_CHUNK + 17;
        let b = basis(n, 5);
        let w: Vec<f64> = (0..n).map(|k| (k as f64 * 0.37).sin()).collect();
        let p1 = project(Parallelism::Sequential, &b, &w);
        let p2 = project(Parallelism::Rayon, &b, &w);
        assert_eq!(p1, p2);

        let mut w1 = w.clone();
        let mut w2 = w.clone();
        subtract_combination(Parallelism::Sequential, &b, &p1, &mut w1);
        subtract_combination(Parallelism::Rayon, &b, &p1, &mut w2);
        assert_eq!(w1, w2);
    }

    #[test]
    fn dot_matches_naive() {
        let a: Vec<f64> = (0..11).map(|x| x as f64).collect();
        let naive: f64 = a.iter().map(|x| x * x).sum();
        assert_eq!(dot(&a, &a), naive);
    }
}
