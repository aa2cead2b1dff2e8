use crate::error::{check_len, Result};
use crate::Scalar;

/// A real linear map `A: ℝ^cols → ℝ^rows` with its adjoint.
pub trait LinearOperator<T: Scalar>: Sync {
    fn rows(&self) -> usize;
    fn cols(&self) -> usize;

    /// `out = A x`. Lengths are the caller's responsibility.
    fn apply_into(&self, x: &[T], out: &mut [T]);

    /// `out = Aᵀ r`. Lengths are the caller's responsibility.
    fn apply_transpose_into(&self, r: &[T], out: &mut [T]);

    fn apply(&self, x: &[T]) -> Result<Vec<T>> {
        check_len(self.cols(), x.len())?;
        let mut out = vec![T::zero(); self.rows()];
        self.apply_into(x, &mut out);
        Ok(out)
    }

    fn apply_transpose(&self, r: &[T]) -> Result<Vec<T>> {
        check_len(self.rows(), r.len())?;
        let mut out = vec![T::zero(); self.cols()];
        self.apply_transpose_into(r, &mut out);
        Ok(out)
    }
}
