//! Sparse {0,1} sensing matrices drawn from Gallager's biregular LDPC ensemble.
//!
//! A matrix is the adjacency of a bipartite graph between `M` variables
//! (columns) and `n` factors (rows). Every variable has degree `ν` and every
//! factor degree `s`, with `νM = sn`. Both adjacency directions are kept so
//! that `Ax`, `Aᵀr` and single-column updates are all cheap.

use rand::seq::SliceRandom;

use crate::error::{check_len, Error, Result};
use crate::operator::LinearOperator;
use crate::rng;
use crate::Scalar;

/// Shape and degrees of a biregular LDPC graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LdpcParams {
    pub num_vars: usize,
    pub num_factors: usize,
    pub var_degree: usize,
    pub factor_degree: usize,
}

impl LdpcParams {
    /// Derives the factor degree `s = νM/n` from the other three quantities.
    pub fn new(num_vars: usize, num_factors: usize, var_degree: usize) -> Result<Self> {
        if num_factors == 0 {
            return Err(Error::param("number of factors must be positive"));
        }
        let edges = var_degree
            .checked_mul(num_vars)
            .ok_or_else(|| Error::param("edge count overflows"))?;
        if edges % num_factors != 0 {
            return Err(Error::param(format!(
                "nu*M = {edges} is not divisible by n = {num_factors}"
            )));
        }
        Self::with_degrees(num_vars, num_factors, var_degree, edges / num_factors)
    }

    pub fn with_degrees(
        num_vars: usize,
        num_factors: usize,
        var_degree: usize,
        factor_degree: usize,
    ) -> Result<Self> {
        let p = LdpcParams {
            num_vars,
            num_factors,
            var_degree,
            factor_degree,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let LdpcParams {
            num_vars: m,
            num_factors: n,
            var_degree: nu,
            factor_degree: s,
        } = *self;
        if m == 0 || n == 0 || nu == 0 || s == 0 {
            return Err(Error::param("M, n, nu and s must all be positive"));
        }
        if nu.checked_mul(m) != s.checked_mul(n) {
            return Err(Error::param(format!(
                "degree arithmetic violated: nu*M = {} but s*n = {}",
                nu as u128 * m as u128,
                s as u128 * n as u128
            )));
        }
        if m % s != 0 {
            return Err(Error::param(format!(
                "factor degree s = {s} does not divide M = {m}"
            )));
        }
        if m > u32::MAX as usize || n > u32::MAX as usize {
            return Err(Error::param("dimensions exceed u32 index range"));
        }
        Ok(())
    }

    pub fn num_edges(&self) -> usize {
        self.var_degree * self.num_vars
    }

    /// Number of factors introduced per sampling round, `M/s`.
    pub fn factors_per_round(&self) -> usize {
        self.num_vars / self.factor_degree
    }
}

/// Biregular bipartite adjacency, stored as flat fixed-stride lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseBinaryMatrix {
    params: LdpcParams,
    /// `var_adj[j*ν .. (j+1)*ν]`: sorted factors touching variable `j`.
    var_adj: Vec<u32>,
    /// `factor_adj[f*s .. (f+1)*s]`: sorted variables in factor `f`.
    factor_adj: Vec<u32>,
}

impl SparseBinaryMatrix {
    /// Draws a matrix from the ensemble.
    ///
    /// The sampler runs `ν` rounds. In round `r` the variable indices are
    /// shuffled (Fisher–Yates) and cut into `M/s` consecutive blocks of size
    /// `s`; block `i` becomes factor `r·(M/s) + i`.
    pub fn sample_gallager(params: LdpcParams, seed: u64) -> Result<Self> {
        params.validate()?;
        let mut rng = rng::seeded(seed);
        let s = params.factor_degree;
        let mut perm: Vec<u32> = (0..params.num_vars as u32).collect();
        let mut factor_adj = Vec::with_capacity(params.num_edges());
        for _round in 0..params.var_degree {
            perm.shuffle(&mut rng);
            for part in perm.chunks_exact(s) {
                let start = factor_adj.len();
                factor_adj.extend_from_slice(part);
                factor_adj[start..].sort_unstable();
            }
        }
        let var_adj = transpose(&params, &factor_adj).expect("sampler produced a biregular graph");
        Ok(SparseBinaryMatrix {
            params,
            var_adj,
            factor_adj,
        })
    }

    /// Builds a matrix from explicit factor neighbourhoods, checking every
    /// structural invariant.
    pub fn from_factor_lists(params: LdpcParams, lists: &[Vec<usize>]) -> Result<Self> {
        params.validate()?;
        if lists.len() != params.num_factors {
            return Err(Error::param(format!(
                "expected {} factor lists, got {}",
                params.num_factors,
                lists.len()
            )));
        }
        let mut factor_adj = Vec::with_capacity(params.num_edges());
        for (f, list) in lists.iter().enumerate() {
            if list.len() != params.factor_degree {
                return Err(Error::param(format!(
                    "factor {f} has degree {}, expected {}",
                    list.len(),
                    params.factor_degree
                )));
            }
            let start = factor_adj.len();
            for &v in list {
                if v >= params.num_vars {
                    return Err(Error::param(format!(
                        "factor {f} references variable {v} outside [0, {})",
                        params.num_vars
                    )));
                }
                factor_adj.push(v as u32);
            }
            let part = &mut factor_adj[start..];
            part.sort_unstable();
            if part.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::param(format!("factor {f} lists a variable twice")));
            }
        }
        let var_adj = transpose(&params, &factor_adj)?;
        Ok(SparseBinaryMatrix {
            params,
            var_adj,
            factor_adj,
        })
    }

    pub fn params(&self) -> &LdpcParams {
        &self.params
    }

    pub fn num_vars(&self) -> usize {
        self.params.num_vars
    }

    pub fn num_factors(&self) -> usize {
        self.params.num_factors
    }

    pub fn var_degree(&self) -> usize {
        self.params.var_degree
    }

    pub fn factor_degree(&self) -> usize {
        self.params.factor_degree
    }

    #[inline]
    pub fn var_neighbors(&self, var: usize) -> &[u32] {
        let nu = self.params.var_degree;
        &self.var_adj[var * nu..(var + 1) * nu]
    }

    #[inline]
    pub fn factor_neighbors(&self, factor: usize) -> &[u32] {
        let s = self.params.factor_degree;
        &self.factor_adj[factor * s..(factor + 1) * s]
    }

    /// Dense 0/1 rendering, row-major `n × M`. Intended for small instances.
    pub fn to_dense(&self) -> Vec<Vec<u8>> {
        let mut dense = vec![vec![0u8; self.num_vars()]; self.num_factors()];
        for (f, row) in dense.iter_mut().enumerate() {
            for &v in self.factor_neighbors(f) {
                row[v as usize] = 1;
            }
        }
        dense
    }

    /// `y_f = Σ_{j ∈ V(f)} x_j`.
    pub fn matvec<T: Scalar>(&self, x: &[T]) -> Result<Vec<T>> {
        check_len(self.num_vars(), x.len())?;
        let mut out = vec![T::zero(); self.num_factors()];
        self.matvec_into(x, &mut out);
        Ok(out)
    }

    /// `(Aᵀr)_j = Σ_{f ∈ F(j)} r_f`.
    pub fn matvec_transpose<T: Scalar>(&self, r: &[T]) -> Result<Vec<T>> {
        check_len(self.num_factors(), r.len())?;
        let mut out = vec![T::zero(); self.num_vars()];
        self.matvec_transpose_into(r, &mut out);
        Ok(out)
    }

    fn matvec_into<T: Scalar>(&self, x: &[T], out: &mut [T]) {
        let s = self.params.factor_degree;
        for (o, vars) in out.iter_mut().zip(self.factor_adj.chunks_exact(s)) {
            *o = vars.iter().map(|&v| x[v as usize]).sum();
        }
    }

    fn matvec_transpose_into<T: Scalar>(&self, r: &[T], out: &mut [T]) {
        let nu = self.params.var_degree;
        for (o, factors) in out.iter_mut().zip(self.var_adj.chunks_exact(nu)) {
            *o = factors.iter().map(|&f| r[f as usize]).sum();
        }
    }
}

impl<T: Scalar> LinearOperator<T> for SparseBinaryMatrix {
    fn rows(&self) -> usize {
        self.num_factors()
    }

    fn cols(&self) -> usize {
        self.num_vars()
    }

    fn apply_into(&self, x: &[T], out: &mut [T]) {
        self.matvec_into(x, out);
    }

    fn apply_transpose_into(&self, r: &[T], out: &mut [T]) {
        self.matvec_transpose_into(r, out);
    }
}

/// Builds the variable-side lists from the factor-side ones, checking that
/// every variable ends up with degree exactly `ν`.
fn transpose(params: &LdpcParams, factor_adj: &[u32]) -> Result<Vec<u32>> {
    let nu = params.var_degree;
    let mut fill = vec![0usize; params.num_vars];
    let mut var_adj = vec![0u32; params.num_edges()];
    for (f, vars) in factor_adj.chunks_exact(params.factor_degree).enumerate() {
        for &v in vars {
            let v = v as usize;
            if fill[v] == nu {
                return Err(Error::param(format!(
                    "variable {v} has degree greater than {nu}"
                )));
            }
            var_adj[v * nu + fill[v]] = f as u32;
            fill[v] += 1;
        }
    }
    if let Some(v) = fill.iter().position(|&d| d != nu) {
        return Err(Error::param(format!(
            "variable {v} has degree {}, expected {nu}",
            fill[v]
        )));
    }
    // Factors are visited in increasing order, so every list is already sorted.
    Ok(var_adj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn small() -> SparseBinaryMatrix {
        SparseBinaryMatrix::sample_gallager(LdpcParams::new(8, 4, 2).unwrap(), 0).unwrap()
    }

    fn dense_mul(dense: &[Vec<u8>], x: &[f64]) -> Vec<f64> {
        dense
            .iter()
            .map(|row| row.iter().zip(x).map(|(&a, &b)| a as f64 * b).sum())
            .collect()
    }

    #[test]
    fn params_validation() {
        assert_eq!(LdpcParams::new(8, 4, 2).unwrap().factor_degree, 4);
        // s = 4 does not divide M = 6.
        assert!(LdpcParams::new(6, 3, 2).is_err());
        // νM = 30 is not a multiple of n = 4.
        assert!(LdpcParams::new(10, 4, 3).is_err());
        assert_eq!(LdpcParams::new(10, 4, 2).unwrap().factor_degree, 5);
        assert!(LdpcParams::with_degrees(8, 4, 2, 3).is_err());
        assert!(LdpcParams::new(8, 0, 2).is_err());
        assert!(LdpcParams::new(0, 4, 2).is_err());
        assert!(LdpcParams::new(8, 3, 2).is_err());
    }

    #[test]
    fn paper_scale_degrees() {
        let p = LdpcParams::new(1 << 14, 1 << 11, 16).unwrap();
        assert_eq!(p.factor_degree, 128);
        let a = SparseBinaryMatrix::sample_gallager(p, 1).unwrap();
        assert_eq!(p.num_edges(), 1 << 18);
        for j in 0..a.num_vars() {
            assert_eq!(a.var_neighbors(j).len(), 16);
        }
        for f in 0..a.num_factors() {
            assert_eq!(a.factor_neighbors(f).len(), 128);
        }
    }

    #[test]
    fn degree_one_is_a_permutation() {
        let a = SparseBinaryMatrix::sample_gallager(LdpcParams::new(4, 4, 1).unwrap(), 3).unwrap();
        let dense = a.to_dense();
        for row in &dense {
            assert_eq!(row.iter().filter(|&&v| v == 1).count(), 1);
        }
        for j in 0..4 {
            assert_eq!(dense.iter().filter(|row| row[j] == 1).count(), 1);
            // A e_j = e_{π(j)}
            let mut e = vec![0.0f64; 4];
            e[j] = 1.0;
            let y = a.matvec(&e).unwrap();
            let pi = a.var_neighbors(j)[0] as usize;
            let mut expect = vec![0.0; 4];
            expect[pi] = 1.0;
            assert_eq!(y, expect);
            // Aᵀ e_f = e_{π⁻¹(f)}
            let mut ef = vec![0.0f64; 4];
            ef[pi] = 1.0;
            let mut back = vec![0.0; 4];
            back[j] = 1.0;
            assert_eq!(a.matvec_transpose(&ef).unwrap(), back);
        }
    }

    #[test]
    fn sampling_is_reproducible() {
        let a = small();
        let b = small();
        assert_eq!(a, b);
        let c = SparseBinaryMatrix::sample_gallager(*a.params(), 1).unwrap();
        assert_eq!(c.params(), a.params());
    }

    #[test]
    fn matvec_matches_dense_reference() {
        let a = small();
        let dense = a.to_dense();
        let mut r = rng::seeded(11);
        for _ in 0..20 {
            let x: Vec<f64> = (0..8).map(|_| (rand::Rng::random::<bool>(&mut r)) as u8 as f64).collect();
            assert_eq!(a.matvec(&x).unwrap(), dense_mul(&dense, &x));
            let rr: Vec<f64> = (0..4).map(|_| rand::Rng::random::<f64>(&mut r) - 0.5).collect();
            let expect: Vec<f64> = (0..8)
                .map(|j| (0..4).map(|f| dense[f][j] as f64 * rr[f]).sum())
                .collect();
            let got = a.matvec_transpose(&rr).unwrap();
            for (g, e) in got.iter().zip(&expect) {
                assert!((g - e).abs() < 1e-15);
            }
        }
        assert_eq!(a.matvec(&[0.0f64; 8]).unwrap(), vec![0.0; 4]);
        assert_eq!(a.matvec_transpose(&[0.0f64; 4]).unwrap(), vec![0.0; 8]);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let a = small();
        assert!(matches!(
            a.matvec(&[0.0f64; 7]),
            Err(Error::DimensionMismatch { expected: 8, got: 7 })
        ));
        assert!(a.matvec_transpose(&[0.0f64; 5]).is_err());
    }

    #[test]
    fn from_factor_lists_rejects_bad_graphs() {
        let p = LdpcParams::new(4, 2, 1).unwrap();
        assert!(SparseBinaryMatrix::from_factor_lists(p, &[vec![0, 1], vec![2, 3]]).is_ok());
        // repeated variable
        assert!(SparseBinaryMatrix::from_factor_lists(p, &[vec![0, 0], vec![2, 3]]).is_err());
        // out of range
        assert!(SparseBinaryMatrix::from_factor_lists(p, &[vec![0, 1], vec![2, 4]]).is_err());
        // variable degree 2 / 0
        assert!(SparseBinaryMatrix::from_factor_lists(p, &[vec![0, 1], vec![1, 3]]).is_err());
        // wrong factor degree
        assert!(SparseBinaryMatrix::from_factor_lists(p, &[vec![0, 1, 2], vec![3]]).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn sampled_graphs_are_biregular(
            seed in any::<u64>(),
            (nu, blocks, s) in (1usize..5, 1usize..6, 1usize..7),
        ) {
            let m = blocks * s;
            let n = nu * blocks;
            let p = LdpcParams::with_degrees(m, n, nu, s).unwrap();
            let a = SparseBinaryMatrix::sample_gallager(p, seed).unwrap();
            let ones = vec![1.0f64; m];
            prop_assert_eq!(a.matvec(&ones).unwrap(), vec![s as f64; n]);
            prop_assert_eq!(a.matvec_transpose(&vec![1.0f64; n]).unwrap(), vec![nu as f64; m]);
            // each round's parts are disjoint and cover all variables
            for round in 0..nu {
                let mut seen = vec![false; m];
                for f in round * blocks..(round + 1) * blocks {
                    for &v in a.factor_neighbors(f) {
                        prop_assert!(!seen[v as usize]);
                        seen[v as usize] = true;
                    }
                }
                prop_assert!(seen.iter().all(|&b| b));
            }
            // transpose consistency
            for j in 0..m {
                for &f in a.var_neighbors(j) {
                    prop_assert!(a.factor_neighbors(f as usize).contains(&(j as u32)));
                }
                prop_assert!(a.var_neighbors(j).windows(2).all(|w| w[0] < w[1]));
            }
        }
    }
}
