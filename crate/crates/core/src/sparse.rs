//! Thin helpers over faer's compressed-column matrices.

use std::io::{self, Write};

use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;

pub type SparseMat = SparseColMat<usize, f64>;

/// Builds a matrix from `(row, col, value)` entries; duplicates are summed.
pub fn from_triplets(nrows: usize, ncols: usize, entries: &[(usize, usize, f64)]) -> SparseMat {
    let t: Vec<Triplet<usize, usize, f64>> = entries.iter().map(|&(r, c, v)| Triplet::new(r, c, v)).collect();
    SparseMat::try_new_from_triplets(nrows, ncols, &t).expect("triplet indices in range")
}

pub fn diagonal(d: &[f64]) -> SparseMat {
    let t: Vec<_> = d.iter().enumerate().map(|(i, &v)| (i, i, v)).collect();
    from_triplets(d.len(), d.len(), &t)
}

pub fn triplets(a: &SparseMat) -> Vec<(usize, usize, f64)> {
    let mut out = Vec::with_capacity(a.compute_nnz());
    for j in 0..a.ncols() {
        for (&i, &v) in a.row_idx_of_col_raw(j).iter().zip(a.val_of_col(j)) {
            out.push((i, j, v));
        }
    }
    out
}

pub fn matvec(a: &SparseMat, x: &[f64]) -> Vec<f64> {
    assert_eq!(a.ncols(), x.len());
    let mut y = vec![0.0; a.nrows()];
    for (j, &xj) in x.iter().enumerate() {
        if xj == 0.0 {
            continue;
        }
        for (&i, &v) in a.row_idx_of_col_raw(j).iter().zip(a.val_of_col(j)) {
            y[i] += v * xj;
        }
    }
    y
}

/// `xᵀ A y`.
pub fn bilinear(a: &SparseMat, x: &[f64], y: &[f64]) -> f64 {
    dot(x, &matvec(a, y))
}

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

/// `alpha A + beta B`.
pub fn axpby(alpha: f64, a: &SparseMat, beta: f64, b: &SparseMat) -> SparseMat {
    assert_eq!((a.nrows(), a.ncols()), (b.nrows(), b.ncols()));
    let mut t: Vec<_> = triplets(a).into_iter().map(|(i, j, v)| (i, j, alpha * v)).collect();
    t.extend(triplets(b).into_iter().map(|(i, j, v)| (i, j, beta * v)));
    from_triplets(a.nrows(), a.ncols(), &t)
}

pub fn product(a: &SparseMat, b: &SparseMat) -> SparseMat {
    assert_eq!(a.ncols(), b.nrows());
    // Column-by-column accumulation: C[:, j] = Σ_k A[:, k] B[k, j].
    let mut acc = vec![0.0; a.nrows()];
    let mut touched = Vec::new();
    let mut mark = vec![false; a.nrows()];
    let mut t = Vec::new();
    for j in 0..b.ncols() {
        for (&k, &bkj) in b.row_idx_of_col_raw(j).iter().zip(b.val_of_col(j)) {
            for (&i, &aik) in a.row_idx_of_col_raw(k).iter().zip(a.val_of_col(k)) {
                if !mark[i] {
                    mark[i] = true;
                    touched.push(i);
                }
                acc[i] += aik * bkj;
            }
        }
        touched.sort_unstable();
        for &i in &touched {
            t.push((i, j, acc[i]));
            acc[i] = 0.0;
            mark[i] = false;
        }
        touched.clear();
    }
    from_triplets(a.nrows(), b.ncols(), &t)
}

pub fn transpose(a: &SparseMat) -> SparseMat {
    let t: Vec<_> = triplets(a).into_iter().map(|(i, j, v)| (j, i, v)).collect();
    from_triplets(a.ncols(), a.nrows(), &t)
}

/// `D A D` for a diagonal `D = diag(d)`.
pub fn scale_symmetric(a: &SparseMat, d: &[f64]) -> SparseMat {
    let t: Vec<_> = triplets(a).into_iter().map(|(i, j, v)| (i, j, d[i] * v * d[j])).collect();
    from_triplets(a.nrows(), a.ncols(), &t)
}

/// Submatrix on the given row and column index lists, in that order.
pub fn select(a: &SparseMat, rows: &[usize], cols: &[usize]) -> SparseMat {
    let mut rmap = vec![usize::MAX; a.nrows()];
    for (k, &r) in rows.iter().enumerate() {
        rmap[r] = k;
    }
    let mut t = Vec::new();
    for (kc, &c) in cols.iter().enumerate() {
        for (&i, &v) in a.row_idx_of_col_raw(c).iter().zip(a.val_of_col(c)) {
            if rmap[i] != usize::MAX {
                t.push((rmap[i], kc, v));
            }
        }
    }
    from_triplets(rows.len(), cols.len(), &t)
}

pub fn diagonal_of(a: &SparseMat) -> Vec<f64> {
    let mut d = vec![0.0; a.nrows().min(a.ncols())];
    for (i, j, v) in triplets(a) {
        if i == j {
            d[i] += v;
        }
    }
    d
}

/// `max |A − Aᵀ| / max |A|`.
pub fn symmetry_error(a: &SparseMat) -> f64 {
    let diff = axpby(1.0, a, -1.0, &transpose(a));
    let scale = a.val().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let worst = diff.val().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        worst
    } else {
        worst / scale
    }
}

/// Infinity norm (max absolute row sum).
pub fn norm_inf(a: &SparseMat) -> f64 {
    let mut rows = vec![0.0; a.nrows()];
    for (i, _, v) in triplets(a) {
        rows[i] += v.abs();
    }
    rows.into_iter().fold(0.0, f64::max)
}

pub fn to_dense(a: &SparseMat) -> Mat<f64> {
    let mut m = Mat::zeros(a.nrows(), a.ncols());
    for (i, j, v) in triplets(a) {
        m[(i, j)] += v;
    }
    m
}

/// MatrixMarket coordinate format, general real.
pub fn write_matrix_market<W: Write>(a: &SparseMat, mut w: W) -> io::Result<()> {
    let t = triplets(a);
    writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(w, "{} {} {}", a.nrows(), a.ncols(), t.len())?;
    for (i, j, v) in t {
        writeln!(w, "{} {} {:.17e}", i + 1, j + 1, v)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SparseMat {
        from_triplets(3, 3, &[(0, 0, 2.0), (0, 1, -1.0), (1, 0, -1.0), (1, 1, 2.0), (1, 2, -1.0), (2, 1, -1.0), (2, 2, 2.0), (0, 0, 1.0)])
    }

    #[test]
    fn duplicates_are_summed() {
        let a = small();
        assert_eq!(to_dense(&a)[(0, 0)], 3.0);
        assert_eq!(diagonal_of(&a), vec![3.0, 2.0, 2.0]);
    }

    #[test]
    fn products_and_transpose_match_dense() {
        let a = small();
        let b = from_triplets(3, 2, &[(0, 1, 1.0), (2, 0, 4.0), (1, 1, -2.0)]);
        let c = to_dense(&product(&a, &b));
        let c_ref = to_dense(&a) * to_dense(&b);
        assert!((&c - &c_ref).norm_max() < 1e-15);
        assert_eq!(to_dense(&transpose(&b)), to_dense(&b).transpose().to_owned());
        assert_eq!(matvec(&a, &[1.0, 1.0, 1.0]), vec![2.0, 0.0, 1.0]);
        assert_eq!(symmetry_error(&a), 0.0);
    }

    #[test]
    fn selection_keeps_order() {
        let a = small();
        let s = to_dense(&select(&a, &[2, 0], &[0, 2]));
        assert_eq!((s[(0, 0)], s[(0, 1)], s[(1, 0)], s[(1, 1)]), (0.0, 2.0, 3.0, 0.0));
    }

    #[test]
    fn matrix_market_header() {
        let mut buf = Vec::new();
        write_matrix_market(&small(), &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        let mut lines = s.lines();
        assert_eq!(lines.next(), Some("%%MatrixMarket matrix coordinate real general"));
        assert_eq!(lines.next(), Some("3 3 7"));
    }
}
