//! Post-hoc similarity metrics over the mutual foreground of two rasters.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::raster::Raster;

pub const NMI_BINS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub mse: f64,
    pub nmi: f64,
    pub ncc: f64,
    pub overlap_pixels: usize,
}

/// Pixels where both single-channel rasters are nonzero.
fn mutual_foreground(a: &Raster, b: &Raster) -> Result<Vec<(f64, f64)>> {
    if a.dims() != b.dims() || a.channels() != 1 || b.channels() != 1 {
        return Err(Error::DimensionMismatch("metrics need equal single-channel rasters".into()));
    }
    let pairs: Vec<_> = a
        .data()
        .iter()
        .zip(b.data())
        .filter(|(x, y)| **x > 0.0 && **y > 0.0)
        .map(|(&x, &y)| (f64::from(x), f64::from(y)))
        .collect();
    if pairs.is_empty() {
        return Err(Error::EmptyOverlap);
    }
    Ok(pairs)
}

pub fn mse(a: &Raster, b: &Raster) -> Result<f64> {
    let p = mutual_foreground(a, b)?;
    Ok(p.iter().map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / p.len() as f64)
}

/// Zero-mean normalized cross-correlation; 0 when either side is constant.
pub fn ncc(a: &Raster, b: &Raster) -> Result<f64> {
    let p = mutual_foreground(a, b)?;
    Ok(ncc_pairs(&p))
}

fn ncc_pairs(p: &[(f64, f64)]) -> f64 {
    let n = p.len() as f64;
    let ma = p.iter().map(|v| v.0).sum::<f64>() / n;
    let mb = p.iter().map(|v| v.1).sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in p {
        let (da, db) = (x - ma, y - mb);
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if saa <= 0.0 || sbb <= 0.0 {
        0.0
    } else {
        sab / (saa * sbb).sqrt()
    }
}

#[inline]
fn bin(v: f64) -> usize {
    ((v * NMI_BINS as f64) as usize).min(NMI_BINS - 1)
}

fn entropy(counts: &[u64], n: f64) -> f64 {
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// `(H(a) + H(b)) / H(a, b)` on a 64-bin joint histogram of `[0, 1]` values.
/// Lies in `[1, 2]`; a degenerate joint histogram (single cell) yields 2.
pub fn nmi(a: &Raster, b: &Raster) -> Result<f64> {
    let p = mutual_foreground(a, b)?;
    Ok(nmi_pairs(&p))
}

fn nmi_pairs(p: &[(f64, f64)]) -> f64 {
    let mut joint = vec![0u64; NMI_BINS * NMI_BINS];
    let mut ha = vec![0u64; NMI_BINS];
    let mut hb = vec![0u64; NMI_BINS];
    for &(x, y) in p {
        let (i, j) = (bin(x), bin(y));
        joint[i * NMI_BINS + j] += 1;
        ha[i] += 1;
        hb[j] += 1;
    }
    let n = p.len() as f64;
    let hj = entropy(&joint, n);
    if hj <= 0.0 {
        return 2.0;
    }
    (entropy(&ha, n) + entropy(&hb, n)) / hj
}

pub fn compute_metrics(a: &Raster, b: &Raster) -> Result<Metrics> {
    let p = mutual_foreground(a, b)?;
    let n = p.len() as f64;
    Ok(Metrics {
        mse: p.iter().map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / n,
        nmi: nmi_pairs(&p),
        ncc: ncc_pairs(&p),
        overlap_pixels: p.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(v: &[f32]) -> Raster {
        Raster::new(v.len(), 1, 1, v.to_vec()).unwrap()
    }

    #[test]
    fn identical_inputs() {
        let a = r(&[0.1, 0.4, 0.9, 0.6, 0.0]);
        let m = compute_metrics(&a, &a).unwrap();
        assert_eq!(m.mse, 0.0);
        assert!((m.ncc - 1.0).abs() < 1e-12);
        assert!((m.nmi - 2.0).abs() < 1e-12);
        assert_eq!(m.overlap_pixels, 4);
    }

    #[test]
    fn background_is_excluded() {
        let a = r(&[0.5, 0.0, 0.2]);
        let b = r(&[0.25, 0.9, 0.0]);
        assert!((mse(&a, &b).unwrap() - 0.0625).abs() < 1e-12);
        assert!(matches!(mse(&r(&[0.0, 0.3]), &r(&[0.3, 0.0])), Err(Error::EmptyOverlap)));
    }

    #[test]
    fn anticorrelated() {
        let a = r(&[0.1, 0.2, 0.3]);
        let b = r(&[0.3, 0.2, 0.1]);
        assert!((ncc(&a, &b).unwrap() + 1.0).abs() < 1e-12);
    }
}
