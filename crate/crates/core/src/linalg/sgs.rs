use super::{CsrMatrix, Preconditioner};
use crate::scalar::Real;

/// One forward plus one backward Gauss-Seidel sweep from a zero initial
/// guess, i.e. `z = (D + U)^{-1} D (D + L)^{-1} r`.
#[derive(Debug, Clone)]
pub struct SymmetricGaussSeidel<'a, T> {
    matrix: &'a CsrMatrix<T>,
    inv_diag: Vec<T>,
    diag_pos: Vec<Option<usize>>,
    /// Rows whose diagonal was zero and was replaced by one.
    pub zero_diagonals: Vec<usize>,
}

impl<'a, T: Real> SymmetricGaussSeidel<'a, T> {
    pub fn new(matrix: &'a CsrMatrix<T>) -> Self {
        let mut inv_diag = Vec::with_capacity(matrix.nrows);
        let mut diag_pos = Vec::with_capacity(matrix.nrows);
        let mut zero_diagonals = Vec::new();
        for i in 0..matrix.nrows {
            let (cols, vals) = matrix.row(i);
            let k = cols.binary_search(&i).ok();
            let d = k.map_or(T::zero(), |k| vals[k]);
            if d == T::zero() {
                zero_diagonals.push(i);
                inv_diag.push(T::one());
            } else {
                inv_diag.push(T::one() / d);
            }
            diag_pos.push(k);
        }
        Self { matrix, inv_diag, diag_pos, zero_diagonals }
    }

    fn off_diagonal_sum(&self, i: usize, z: &[T]) -> T {
        let (cols, vals) = self.matrix.row(i);
        let skip = self.diag_pos[i];
        cols.iter()
            .zip(vals)
            .enumerate()
            .filter(|(k, _)| Some(*k) != skip)
            .map(|(_, (&c, &v))| v * z[c])
            .sum()
    }
}

impl<T: Real> Preconditioner<T> for SymmetricGaussSeidel<'_, T> {
    fn apply(&self, r: &[T], z: &mut [T]) {
        z.iter_mut().for_each(|v| *v = T::zero());
        let n = self.matrix.nrows;
        for i in 0..n {
            z[i] = (r[i] - self.off_diagonal_sum(i, z)) * self.inv_diag[i];
        }
        for i in (0..n).rev() {
            z[i] = (r[i] - self.off_diagonal_sum(i, z)) * self.inv_diag[i];
        }
    }
}

/// Block-diagonal preconditioner: symmetric Gauss-Seidel on the bulk block
/// for the first `bulk` entries and on the surface block for the rest.
/// The coupling blocks are ignored.
#[derive(Debug, Clone)]
pub struct BlockSgsPreconditioner<'a, T> {
    pub bulk: SymmetricGaussSeidel<'a, T>,
    pub surface: SymmetricGaussSeidel<'a, T>,
}

impl<'a, T: Real> BlockSgsPreconditioner<'a, T> {
    pub fn new(bulk: &'a CsrMatrix<T>, surface: &'a CsrMatrix<T>) -> Self {
        Self { bulk: SymmetricGaussSeidel::new(bulk), surface: SymmetricGaussSeidel::new(surface) }
    }

    pub fn zero_diagonals(&self) -> usize {
        self.bulk.zero_diagonals.len() + self.surface.zero_diagonals.len()
    }
}

impl<T: Real> Preconditioner<T> for BlockSgsPreconditioner<'_, T> {
    fn apply(&self, r: &[T], z: &mut [T]) {
        let nb = self.bulk.matrix.nrows;
        let (rb, rs) = r.split_at(nb);
        let (zb, zs) = z.split_at_mut(nb);
        self.bulk.apply(rb, zb);
        self.surface.apply(rs, zs);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_is_exact_inverse() {
        let m = CsrMatrix::from_dense(&[vec![2.0, 0.0, 0.0], vec![0.0, 4.0, 0.0], vec![0.0, 0.0, -0.5]]);
        let p = SymmetricGaussSeidel::new(&m);
        let mut z = [0.0; 3];
        p.apply(&[1.0, 1.0, 1.0], &mut z);
        assert_eq!(z, [0.5, 0.25, -2.0]);
    }

    #[test]
    fn tridiagonal_sweep_by_hand() {
        // A = tridiag(-1, 2, -1), r = (1, 0, 0).
        // Forward: z = (1/2, 1/4, 1/8).
        // Backward: z3 = (0 + 1/4)/2 = 1/8, z2 = (0 + 1/2 + 1/8)/2 = 5/16,
        //           z1 = (1 + 5/16)/2 = 21/32.
        let m = CsrMatrix::from_dense(&[vec![2.0, -1.0, 0.0], vec![-1.0, 2.0, -1.0], vec![0.0, -1.0, 2.0]]);
        let p = SymmetricGaussSeidel::new(&m);
        let mut z = [0.0; 3];
        p.apply(&[1.0, 0.0, 0.0], &mut z);
        assert_eq!(z, [21.0 / 32.0, 5.0 / 16.0, 1.0 / 8.0]);
    }

    #[test]
    fn zero_diagonal_is_flagged() {
        let m = CsrMatrix::from_dense(&[vec![0.0, 1.0], vec![1.0, 3.0]]);
        let p = SymmetricGaussSeidel::new(&m);
        assert_eq!(p.zero_diagonals, vec![0]);
    }
}
