//! Small SVD helpers over dynamically sized matrices.

use nalgebra::{DMatrix, DVector, Matrix3};

/// Right singular system sorted by descending singular value.
///
/// Wide inputs are padded with zero rows, so there is always one right
/// singular vector per column.
pub(crate) struct RightSvd {
    pub values: Vec<f64>,
    pub vectors: Vec<DVector<f64>>,
}

impl RightSvd {
    pub fn new(a: &DMatrix<f64>) -> Self {
        let cols = a.ncols();
        let padded = if a.nrows() < cols {
            let mut p = DMatrix::zeros(cols, cols);
            p.view_mut((0, 0), (a.nrows(), cols)).copy_from(a);
            p
        } else {
            a.clone()
        };
        let svd = padded.svd(false, true);
        let v_t = svd.v_t.expect("requested V^T");
        let mut order: Vec<usize> = (0..cols).collect();
        order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
        let values = order.iter().map(|&i| svd.singular_values[i]).collect();
        let vectors = order
            .iter()
            .map(|&i| v_t.row(i).transpose().into_owned())
            .collect();
        Self { values, vectors }
    }

    pub fn smallest(&self) -> (&DVector<f64>, f64) {
        let last = self.values.len() - 1;
        (&self.vectors[last], self.values[last])
    }

    /// Number of singular values above `rel_tol * sigma_max`.
    pub fn rank(&self, rel_tol: f64) -> usize {
        let max = self.values.first().copied().unwrap_or(0.0);
        if max <= 0.0 {
            return 0;
        }
        self.values.iter().filter(|&&s| s > rel_tol * max).count()
    }
}

/// Closest rank-2 matrix in Frobenius norm, together with the singular values
/// of the input.
pub(crate) fn project_rank2(m: &Matrix3<f64>) -> (Matrix3<f64>, [f64; 3]) {
    let svd = m.svd(true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^T");
    let s = svd.singular_values;
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| s[j].total_cmp(&s[i]));
    let mut out = Matrix3::zeros();
    for &k in &order[..2] {
        out += u.column(k) * v_t.row(k) * s[k];
    }
    (out, [s[order[0]], s[order[1]], s[order[2]]])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wide_matrix_gets_full_right_basis() {
        let a = DMatrix::from_row_slice(2, 4, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
        let svd = RightSvd::new(&a);
        assert_eq!(svd.values.len(), 4);
        assert_eq!(svd.rank(1e-9), 2);
        let (v, s) = svd.smallest();
        assert!(s.abs() < 1e-15);
        assert!((a * v).norm() < 1e-15);
    }

    #[test]
    fn rank2_projection_kills_smallest_value() {
        let m = Matrix3::new(3.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 1.0);
        let (p, s) = project_rank2(&m);
        assert_eq!(s, [3.0, 2.0, 1.0]);
        assert!((p - Matrix3::new(3.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 0.0)).norm() < 1e-14);
    }
}
