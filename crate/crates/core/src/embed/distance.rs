use crate::{Error, Result};

fn check(u: &[f64], v: &[f64]) -> Result<()> {
    if u.len() != v.len() {
        return Err(Error::Dimension {
            expected: u.len(),
            found: v.len(),
        });
    }
    Ok(())
}

/// Squared Euclidean distance summed in index order. The clustering search
/// decides every borderline pair with exactly this arithmetic.
#[inline]
pub fn squared_euclidean(u: &[f64], v: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (a, b) in u.iter().zip(v) {
        let d = a - b;
        acc += d * d;
    }
    acc
}

pub fn euclidean(u: &[f64], v: &[f64]) -> Result<f64> {
    check(u, v)?;
    Ok(squared_euclidean(u, v).sqrt())
}

/// Cosine similarity clamped to [-1, 1]; a zero-norm input is an error.
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64> {
    check(u, v)?;
    let (mut dot, mut nu, mut nv) = (0.0, 0.0, 0.0);
    for (a, b) in u.iter().zip(v) {
        dot += a * b;
        nu += a * a;
        nv += b * b;
    }
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok((dot / (nu.sqrt() * nv.sqrt())).clamp(-1.0, 1.0))
}
