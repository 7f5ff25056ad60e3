//! Reference implementations written straight from the definitions, kept
//! independent of the engine's code paths.

/// Closed-form decay samples `A·exp(-k·bin/τ) + b`.
pub fn decay(a: f64, tau_ns: f64, b: f64, bins: usize, bin_ps: f64) -> Vec<f64> {
    (0..bins).map(|k| a * (-(k as f64) * bin_ps * 1e-3 / tau_ns).exp() + b).collect()
}

/// Exhaustive Otsu from pixel values: for every candidate t, split the pixels
/// and compare n0·n1·(μ0 − μ1)² exactly as rationals; first maximum wins.
pub fn brute_force_otsu(levels: &[u8]) -> Option<u8> {
    let mut best: Option<(u8, u128, u128)> = None;
    for t in 0..=255u8 {
        let (mut n0, mut s0, mut n1, mut s1) = (0u128, 0u128, 0u128, 0u128);
        for &v in levels {
            if v <= t {
                n0 += 1;
                s0 += u128::from(v);
            } else {
                n1 += 1;
                s1 += u128::from(v);
            }
        }
        if n0 == 0 || n1 == 0 {
            continue;
        }
        // (μ0 − μ1)² n0 n1 = (s0·n1 − s1·n0)² / (n0·n1)
        let diff = (s0 * n1).abs_diff(s1 * n0);
        let (num, den) = (diff * diff, n0 * n1);
        if best.is_none_or(|(_, bn, bd)| num * bd > bn * den) {
            best = Some((t, num, den));
        }
    }
    best.map(|b| b.0)
}

/// Pixel pairs where both images are nonzero.
pub fn overlap(a: &[f64], b: &[f64]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for i in 0..a.len() {
        if a[i] != 0.0 && b[i] != 0.0 {
            out.push((a[i], b[i]));
        }
    }
    out
}

pub fn mse(p: &[(f64, f64)]) -> f64 {
    let mut s = 0.0;
    for &(x, y) in p {
        s += (x - y) * (x - y);
    }
    s / p.len() as f64
}

pub fn ncc(p: &[(f64, f64)]) -> f64 {
    let n = p.len() as f64;
    let ma = p.iter().map(|q| q.0).sum::<f64>() / n;
    let mb = p.iter().map(|q| q.1).sum::<f64>() / n;
    let cov = p.iter().map(|q| (q.0 - ma) * (q.1 - mb)).sum::<f64>() / n;
    let va = p.iter().map(|q| (q.0 - ma).powi(2)).sum::<f64>() / n;
    let vb = p.iter().map(|q| (q.1 - mb).powi(2)).sum::<f64>() / n;
    cov / (va.sqrt() * vb.sqrt())
}

pub fn nmi(p: &[(f64, f64)], bins: usize) -> f64 {
    let bin = |v: f64| {
        let mut k = 0;
        while k + 1 < bins && v >= (k + 1) as f64 / bins as f64 {
            k += 1;
        }
        k
    };
    let n = p.len() as f64;
    let mut joint = std::collections::HashMap::new();
    let mut ha = std::collections::HashMap::new();
    let mut hb = std::collections::HashMap::new();
    for &(x, y) in p {
        *joint.entry((bin(x), bin(y))).or_insert(0.0) += 1.0;
        *ha.entry(bin(x)).or_insert(0.0) += 1.0;
        *hb.entry(bin(y)).or_insert(0.0) += 1.0;
    }
    let h = |counts: Vec<f64>| -> f64 { counts.iter().map(|c| -(c / n) * (c / n).log2()).sum() };
    let hj = h(joint.values().copied().collect());
    (h(ha.values().copied().collect()) + h(hb.values().copied().collect())) / hj
}
