//! Dense coefficient-matrix helpers behind the Schmidt machinery.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

/// A complex matrix whose rows and columns are indexed by sorted keys.
pub(crate) struct KeyedMatrix<R, C> {
    pub rows: Vec<R>,
    pub cols: Vec<C>,
    pub data: DMatrix<Complex64>,
}

impl<R: Ord + Clone, C: Ord + Clone> KeyedMatrix<R, C> {
    pub fn from_entries<I>(entries: I) -> Self
    where
        I: IntoIterator<Item = (R, C, Complex64)>,
    {
        let mut cells: BTreeMap<(R, C), Complex64> = BTreeMap::new();
        for (r, c, v) in entries {
            *cells.entry((r, c)).or_default() += v;
        }
        let mut rows: Vec<R> = cells.keys().map(|(r, _)| r.clone()).collect();
        rows.dedup();
        let mut cols: Vec<C> = cells.keys().map(|(_, c)| c.clone()).collect();
        cols.sort();
        cols.dedup();
        let mut data = DMatrix::zeros(rows.len(), cols.len());
        for ((r, c), v) in cells {
            let i = rows.binary_search(&r).unwrap();
            let j = cols.binary_search(&c).unwrap();
            data[(i, j)] = v;
        }
        KeyedMatrix { rows, cols, data }
    }
}

/// Singular triplets of a matrix, sorted by descending singular value.
pub(crate) struct Svd {
    pub values: Vec<f64>,
    /// Left singular vectors, one `Vec` per triplet (length = rows).
    pub left: Vec<Vec<Complex64>>,
    /// Rows of V^H, one per triplet (length = cols), so that
    /// `M[r][c] = sum_k values[k] * left[k][r] * right[k][c]`.
    pub right: Vec<Vec<Complex64>>,
}

pub(crate) fn svd(m: &DMatrix<Complex64>) -> Svd {
    let decomposition = m.clone().svd(true, true);
    let u = decomposition.u.expect("left vectors requested");
    let v_t = decomposition.v_t.expect("right vectors requested");
    let sv = decomposition.singular_values;

    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]));

    let mut out = Svd {
        values: Vec::with_capacity(order.len()),
        left: Vec::with_capacity(order.len()),
        right: Vec::with_capacity(order.len()),
    };
    for k in order {
        out.values.push(sv[k]);
        out.left.push(u.column(k).iter().copied().collect());
        out.right.push(v_t.row(k).iter().copied().collect());
    }
    out
}
