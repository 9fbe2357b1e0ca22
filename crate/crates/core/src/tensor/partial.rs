use num_complex::Complex64 as C64;

use super::{CMatrix, FactoredDims};
use crate::error::{Error, Result};

/// Trace out every factor of `q` not listed in `keep`.
///
/// `keep` holds 0-based factor indices; the kept factors appear in the result
/// in their original order regardless of the order given.
pub fn partial_trace(q: &CMatrix, dims: &FactoredDims, keep: &[usize]) -> Result<CMatrix> {
    if !q.is_square() || q.rows() != dims.total() {
        return Err(Error::DimensionMismatch(format!(
            "operator is {}x{}, factors {:?} give {}",
            q.rows(),
            q.cols(),
            dims.factors(),
            dims.total()
        )));
    }
    if keep.is_empty() {
        return Err(Error::EmptyKeepSet);
    }
    let nf = dims.len();
    let mut kept = vec![false; nf];
    for &k in keep {
        if k >= nf {
            return Err(Error::FactorOutOfRange { index: k, factors: nf });
        }
        kept[k] = true;
    }

    let factors = dims.factors();
    let kept_dim: usize = (0..nf).filter(|&f| kept[f]).map(|f| factors[f]).product();
    let traced_dim = dims.total() / kept_dim;

    // Split every full index into (kept index, traced index), both in the
    // original factor order.
    let total = dims.total();
    let mut by_traced = vec![Vec::with_capacity(kept_dim); traced_dim];
    let mut digits = vec![0usize; nf];
    for full in 0..total {
        let mut rem = full;
        for f in (0..nf).rev() {
            digits[f] = rem % factors[f];
            rem /= factors[f];
        }
        let (mut k_idx, mut t_idx) = (0usize, 0usize);
        for f in 0..nf {
            if kept[f] {
                k_idx = k_idx * factors[f] + digits[f];
            } else {
                t_idx = t_idx * factors[f] + digits[f];
            }
        }
        // Full indices increase with kept index for a fixed traced index.
        debug_assert_eq!(by_traced[t_idx].len(), k_idx);
        by_traced[t_idx].push(full);
    }

    let mut out = CMatrix::zeros(kept_dim, kept_dim);
    for group in &by_traced {
        for (a, &i) in group.iter().enumerate() {
            let row = q.row(i);
            for (b, &j) in group.iter().enumerate() {
                out[(a, b)] += row[j];
            }
        }
    }
    Ok(out)
}

/// Apply `(F ⊗ 1) · Q · (F ⊗ 1)` where `F` acts on the leading factors of
/// total dimension `f.rows()` and the identity on the trailing `tail` dims.
///
/// This never materializes the dense `F ⊗ 1` operator.
pub(crate) fn sandwich_prefix(f: &CMatrix, q: &CMatrix, tail: usize) -> CMatrix {
    let head = f.rows();
    let total = head * tail;
    debug_assert_eq!(q.rows(), total);

    // left = (F ⊗ 1) Q : row (a, t) = Σ_b F[a, b] Q[(b, t), :]
    let mut left = CMatrix::zeros(total, total);
    for a in 0..head {
        for b in 0..head {
            let fab = f[(a, b)];
            if fab == C64::new(0.0, 0.0) {
                continue;
            }
            for t in 0..tail {
                let src = q.row(b * tail + t);
                let dst = a * tail + t;
                for (c, s) in src.iter().enumerate() {
                    left[(dst, c)] += fab * s;
                }
            }
        }
    }

    // out = left (F ⊗ 1) : column (a, t) = Σ_b left[:, (b, t)] F[b, a]
    let mut out = CMatrix::zeros(total, total);
    for r in 0..total {
        let src = left.row(r).to_vec();
        for b in 0..head {
            for a in 0..head {
                let fba = f[(b, a)];
                if fba == C64::new(0.0, 0.0) {
                    continue;
                }
                for t in 0..tail {
                    out[(r, a * tail + t)] += src[b * tail + t] * fba;
                }
            }
        }
    }
    out
}
