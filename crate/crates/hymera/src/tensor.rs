//! Dense complex tensors with named legs.
//!
//! A [`Tensor`] stores its entries in row-major order over an ordered list of
//! leg labels (leftmost leg varies slowest). Contraction is by explicit leg
//! pairing, never by label matching; schemas own the wiring. [`MatrixView`]
//! groups legs into a row block and a column block, which is how every
//! unitarity and isometry condition in this crate is phrased.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eig, Eigh, UPLO};
use num_complex::Complex64;
use thiserror::Error;

pub type C64 = Complex64;

#[derive(Debug, Error)]
pub enum TensorError {
    #[error("duplicate leg label `{0}`")]
    DuplicateLeg(String),
    #[error("leg `{0}` not found")]
    UnknownLeg(String),
    #[error("leg dimensions must be >= 1")]
    ZeroDim,
    #[error("data length {got} does not match shape product {want}")]
    DataLength { got: usize, want: usize },
    #[error("contracting `{left}` (dim {left_dim}) with `{right}` (dim {right_dim}): dimension mismatch")]
    DimMismatch {
        left: String,
        left_dim: usize,
        right: String,
        right_dim: usize,
    },
    #[error("leg `{0}` paired more than once")]
    DuplicatePairing(String),
    #[error("row and column legs do not partition the tensor legs")]
    BadPartition,
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("eigensolver failed: {0}")]
    EigenFailure(String),
    #[error("eigenpair residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    ResidualTooLarge { residual: f64, tol: f64 },
}

pub type Result<T> = std::result::Result<T, TensorError>;

/// Dense complex tensor with an ordered list of unique leg labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    legs: Vec<String>,
    shape: Vec<usize>,
    data: Vec<C64>,
}

impl Tensor {
    /// Build from legs, per-leg dimensions and row-major entries.
    pub fn new<S: Into<String>>(legs: Vec<S>, shape: Vec<usize>, data: Vec<C64>) -> Result<Self> {
        let legs: Vec<String> = legs.into_iter().map(Into::into).collect();
        if shape.contains(&0) {
            return Err(TensorError::ZeroDim);
        }
        for (i, l) in legs.iter().enumerate() {
            if legs[..i].contains(l) {
                return Err(TensorError::DuplicateLeg(l.clone()));
            }
        }
        let want: usize = shape.iter().product();
        if legs.len() != shape.len() || data.len() != want {
            return Err(TensorError::DataLength {
                got: data.len(),
                want,
            });
        }
        Ok(Self { legs, shape, data })
    }

    /// Rank-n identity-like delta tensor on two legs of dimension `dim`.
    pub fn identity(dim: usize, leg_out: &str, leg_in: &str) -> Self {
        let mut data = vec![C64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            data[i * dim + i] = C64::new(1.0, 0.0);
        }
        Self::new(vec![leg_out, leg_in], vec![dim, dim], data).expect("identity")
    }

    /// Basis state |k> as a 1-leg tensor.
    pub fn basis_state(dim: usize, k: usize, leg: &str) -> Self {
        let mut data = vec![C64::new(0.0, 0.0); dim];
        data[k] = C64::new(1.0, 0.0);
        Self::new(vec![leg], vec![dim], data).expect("basis state")
    }

    pub fn legs(&self) -> &[String] {
        &self.legs
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn rank(&self) -> usize {
        self.legs.len()
    }

    pub fn leg_dim(&self, leg: &str) -> Result<usize> {
        self.leg_index(leg).map(|i| self.shape[i])
    }

    fn leg_index(&self, leg: &str) -> Result<usize> {
        self.legs
            .iter()
            .position(|l| l == leg)
            .ok_or_else(|| TensorError::UnknownLeg(leg.to_string()))
    }

    /// Entry at a full multi-index (row-major, leftmost leg slowest).
    pub fn get(&self, idx: &[usize]) -> C64 {
        debug_assert_eq!(idx.len(), self.rank());
        let mut flat = 0;
        for (i, &k) in idx.iter().enumerate() {
            flat = flat * self.shape[i] + k;
        }
        self.data[flat]
    }

    /// Entry-wise complex conjugate.
    pub fn conj(&self) -> Self {
        Self {
            legs: self.legs.clone(),
            shape: self.shape.clone(),
            data: self.data.iter().map(|c| c.conj()).collect(),
        }
    }

    /// Same entries under renamed legs.
    pub fn renamed<S: Into<String>>(&self, legs: Vec<S>) -> Result<Self> {
        Self::new(legs, self.shape.clone(), self.data.clone())
    }

    /// Reorder legs to the given label order (data permuted accordingly).
    pub fn permuted(&self, order: &[&str]) -> Result<Self> {
        if order.len() != self.rank() {
            return Err(TensorError::BadPartition);
        }
        let perm: Vec<usize> = order
            .iter()
            .map(|l| self.leg_index(l))
            .collect::<Result<_>>()?;
        {
            let mut seen = vec![false; perm.len()];
            for &p in &perm {
                if seen[p] {
                    return Err(TensorError::DuplicatePairing(self.legs[p].clone()));
                }
                seen[p] = true;
            }
        }
        let new_shape: Vec<usize> = perm.iter().map(|&p| self.shape[p]).collect();
        let new_legs: Vec<String> = perm.iter().map(|&p| self.legs[p].clone()).collect();
        let mut new_data = vec![C64::new(0.0, 0.0); self.data.len()];
        let rank = self.rank();
        let mut idx = vec![0usize; rank];
        for (flat, value) in self.data.iter().enumerate() {
            let mut rem = flat;
            for i in (0..rank).rev() {
                idx[i] = rem % self.shape[i];
                rem /= self.shape[i];
            }
            let mut new_flat = 0;
            for (i, &p) in perm.iter().enumerate() {
                new_flat = new_flat * new_shape[i] + idx[p];
            }
            new_data[new_flat] = *value;
        }
        Tensor::new(new_legs, new_shape, new_data)
    }

    /// Fuse consecutive groups of legs into single legs with product dimension.
    /// `groups` partitions the current leg order from left to right.
    pub fn fused(&self, groups: &[(&str, usize)]) -> Result<Self> {
        let total: usize = groups.iter().map(|(_, n)| n).sum();
        if total != self.rank() {
            return Err(TensorError::BadPartition);
        }
        let mut shape = Vec::with_capacity(groups.len());
        let mut legs = Vec::with_capacity(groups.len());
        let mut at = 0;
        for (name, n) in groups {
            let dim: usize = self.shape[at..at + n].iter().product();
            shape.push(dim);
            legs.push(name.to_string());
            at += n;
        }
        Tensor::new(legs, shape, self.data.clone())
    }

    /// Scale every entry.
    pub fn scaled(&self, factor: C64) -> Self {
        Self {
            legs: self.legs.clone(),
            shape: self.shape.clone(),
            data: self.data.iter().map(|c| c * factor).collect(),
        }
    }

    /// Entry-wise linear combination; legs and shapes must match exactly.
    pub fn linear_combination(alpha: C64, x: &Tensor, beta: C64, y: &Tensor) -> Result<Tensor> {
        if x.legs != y.legs || x.shape != y.shape {
            return Err(TensorError::BadPartition);
        }
        let data = x
            .data
            .iter()
            .zip(&y.data)
            .map(|(a, b)| alpha * a + beta * b)
            .collect();
        Tensor::new(x.legs.clone(), x.shape.clone(), data)
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.data.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

/// Contract `x` and `y` over the given (leg-of-x, leg-of-y) pairs.
///
/// Output legs are the unpaired legs of `x` followed by those of `y`, in
/// their original orders.
pub fn contract(x: &Tensor, y: &Tensor, pairs: &[(&str, &str)]) -> Result<Tensor> {
    let mut x_bound = Vec::new();
    let mut y_bound = Vec::new();
    for (lx, ly) in pairs {
        let ix = x.leg_index(lx)?;
        let iy = y.leg_index(ly)?;
        if x_bound.contains(&ix) {
            return Err(TensorError::DuplicatePairing(lx.to_string()));
        }
        if y_bound.contains(&iy) {
            return Err(TensorError::DuplicatePairing(ly.to_string()));
        }
        if x.shape[ix] != y.shape[iy] {
            return Err(TensorError::DimMismatch {
                left: lx.to_string(),
                left_dim: x.shape[ix],
                right: ly.to_string(),
                right_dim: y.shape[iy],
            });
        }
        x_bound.push(ix);
        y_bound.push(iy);
    }

    let x_free: Vec<usize> = (0..x.rank()).filter(|i| !x_bound.contains(i)).collect();
    let y_free: Vec<usize> = (0..y.rank()).filter(|i| !y_bound.contains(i)).collect();

    // Permute to (free..., bound...) on x and (bound..., free...) on y, then
    // multiply as matrices.
    let x_order: Vec<&str> = x_free
        .iter()
        .chain(&x_bound)
        .map(|&i| x.legs[i].as_str())
        .collect();
    let y_order: Vec<&str> = y_bound
        .iter()
        .chain(&y_free)
        .map(|&i| y.legs[i].as_str())
        .collect();
    let xp = x.permuted(&x_order)?;
    let yp = y.permuted(&y_order)?;

    let m: usize = x_free.iter().map(|&i| x.shape[i]).product();
    let k: usize = x_bound.iter().map(|&i| x.shape[i]).product();
    let n: usize = y_free.iter().map(|&i| y.shape[i]).product();

    let xa = Array2::from_shape_vec((m, k), xp.data).expect("x reshape");
    let ya = Array2::from_shape_vec((k, n), yp.data).expect("y reshape");
    let prod = xa.dot(&ya);

    let mut legs: Vec<String> = x_free.iter().map(|&i| x.legs[i].clone()).collect();
    legs.extend(y_free.iter().map(|&i| y.legs[i].clone()));
    let mut shape: Vec<usize> = x_free.iter().map(|&i| x.shape[i]).collect();
    shape.extend(y_free.iter().map(|&i| y.shape[i]));
    if legs.is_empty() {
        // Full contraction to a scalar: keep a single dummy leg of dim 1.
        return Tensor::new(vec!["scalar"], vec![1], vec![prod[(0, 0)]]);
    }
    Tensor::new(legs, shape, prod.into_raw_vec_and_offset().0)
}

/// A tensor matricized over a (row legs | column legs) partition.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixView {
    pub rows: usize,
    pub cols: usize,
    pub row_legs: Vec<String>,
    pub col_legs: Vec<String>,
    row_dims: Vec<usize>,
    col_dims: Vec<usize>,
    pub data: Array2<C64>,
}

impl MatrixView {
    pub fn from_array(data: Array2<C64>) -> Self {
        let (r, c) = data.dim();
        MatrixView {
            rows: r,
            cols: c,
            row_legs: vec!["row".into()],
            col_legs: vec!["col".into()],
            row_dims: vec![r],
            col_dims: vec![c],
            data,
        }
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn dagger(&self) -> Array2<C64> {
        self.data.t().mapv(|c| c.conj())
    }

    /// Invert the matricization back to the tensor with legs in
    /// (row legs, col legs) order. Bit-exact round trip.
    pub fn into_tensor(&self) -> Tensor {
        let legs: Vec<String> = self
            .row_legs
            .iter()
            .chain(&self.col_legs)
            .cloned()
            .collect();
        let shape: Vec<usize> = self
            .row_dims
            .iter()
            .chain(&self.col_dims)
            .copied()
            .collect();
        let data = self.data.iter().copied().collect();
        Tensor::new(legs, shape, data).expect("dematricize")
    }

    pub fn max_abs_diff(&self, other: &Array2<C64>) -> f64 {
        (&self.data - other)
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }
}

/// Matricize `x` with the given row/column leg partition.
///
/// Entry ((i),(j)) equals the tensor entry at the corresponding multi-indices
/// under the row-major convention (leftmost leg of each group slowest).
pub fn matricize(x: &Tensor, row_legs: &[&str], col_legs: &[&str]) -> Result<MatrixView> {
    if row_legs.len() + col_legs.len() != x.rank() {
        return Err(TensorError::BadPartition);
    }
    let mut seen: Vec<&str> = Vec::new();
    for l in row_legs.iter().chain(col_legs) {
        if seen.contains(l) {
            return Err(TensorError::BadPartition);
        }
        seen.push(l);
    }
    for l in &seen {
        x.leg_index(l)?;
    }
    let order: Vec<&str> = row_legs.iter().chain(col_legs).copied().collect();
    let xp = x.permuted(&order)?;
    let rows: usize = xp.shape[..row_legs.len()].iter().product();
    let cols: usize = xp.shape[row_legs.len()..].iter().product();
    let row_dims = xp.shape[..row_legs.len()].to_vec();
    let col_dims = xp.shape[row_legs.len()..].to_vec();
    let data = Array2::from_shape_vec((rows, cols), xp.data).expect("matricize reshape");
    Ok(MatrixView {
        rows,
        cols,
        row_legs: row_legs.iter().map(|s| s.to_string()).collect(),
        col_legs: col_legs.iter().map(|s| s.to_string()).collect(),
        row_dims,
        col_dims,
        data,
    })
}

/// ‖M·M† − I‖_max for a square matrix view.
pub fn unitarity_defect(m: &MatrixView) -> Result<f64> {
    if !m.is_square() {
        return Err(TensorError::NotSquare {
            rows: m.rows,
            cols: m.cols,
        });
    }
    let g = m.data.dot(&m.dagger());
    Ok(max_dev_from_identity(&g))
}

pub(crate) fn max_dev_from_identity(g: &Array2<C64>) -> f64 {
    let n = g.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            };
            worst = worst.max((g[(i, j)] - target).norm());
        }
    }
    worst
}

/// Eigen-decomposition of a square complex matrix, sorted by descending |λ|.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<C64>,
    /// Column i pairs with eigenvalue i.
    pub eigenvectors: Array2<C64>,
    /// max over pairs of ‖M·v − λ·v‖_max
    pub residual: f64,
}

/// Full eigen-decomposition of a (generally non-normal) complex matrix.
///
/// Pairs are sorted by descending |λ|, ties broken by descending real then
/// imaginary part so that degenerate spectra order deterministically. The
/// decomposition is rejected if any pair's residual exceeds `tol`.
pub fn eigendecompose(m: &MatrixView, tol: f64) -> Result<EigenDecomposition> {
    if !m.is_square() {
        return Err(TensorError::NotSquare {
            rows: m.rows,
            cols: m.cols,
        });
    }
    let (vals, vecs) = m
        .data
        .eig()
        .map_err(|e| TensorError::EigenFailure(e.to_string()))?;
    let n = m.rows;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        let (a, b) = (vals[i], vals[j]);
        b.norm()
            .partial_cmp(&a.norm())
            .unwrap()
            .then(b.re.partial_cmp(&a.re).unwrap())
            .then(b.im.partial_cmp(&a.im).unwrap())
    });
    let eigenvalues: Vec<C64> = order.iter().map(|&i| vals[i]).collect();
    let mut eigenvectors = Array2::<C64>::zeros((n, n));
    for (k, &i) in order.iter().enumerate() {
        eigenvectors.column_mut(k).assign(&vecs.column(i));
    }
    let mut residual = 0.0f64;
    for (k, lam) in eigenvalues.iter().enumerate() {
        let v = eigenvectors.column(k);
        let mv = m.data.dot(&v);
        for i in 0..n {
            residual = residual.max((mv[i] - lam * v[i]).norm());
        }
    }
    if residual > tol {
        return Err(TensorError::ResidualTooLarge { residual, tol });
    }
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
        residual,
    })
}

/// Eigenvalues of a Hermitian matrix, ascending (wrapper used for density
/// matrices and Choi operators).
pub fn hermitian_eigenvalues(m: &Array2<C64>) -> Result<Vec<f64>> {
    let (vals, _) = m
        .eigh(UPLO::Lower)
        .map_err(|e| TensorError::EigenFailure(e.to_string()))?;
    Ok(vals.to_vec())
}

pub fn hermitian_defect(m: &Array2<C64>) -> f64 {
    let d = m - &m.t().mapv(|c| c.conj());
    d.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// Von Neumann entropy −tr(ρ log ρ) of a Hermitian unit-trace matrix.
pub fn von_neumann_entropy(rho: &Array2<C64>) -> Result<f64> {
    let vals = hermitian_eigenvalues(rho)?;
    Ok(vals
        .iter()
        .filter(|&&p| p > 1e-14)
        .map(|&p| -p * p.ln())
        .sum())
}

pub fn trace(m: &Array2<C64>) -> C64 {
    let mut t = C64::new(0.0, 0.0);
    for i in 0..m.nrows().min(m.ncols()) {
        t += m[(i, i)];
    }
    t
}

/// Dense matrix-vector application returning a fresh vector.
pub fn apply(m: &Array2<C64>, v: &Array1<C64>) -> Array1<C64> {
    m.dot(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_tensor(rng: &mut StdRng, legs: Vec<&str>, dims: Vec<usize>) -> Tensor {
        let n: usize = dims.iter().product();
        let data = (0..n)
            .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        Tensor::new(legs, dims, data).unwrap()
    }

    /// Naive nested-loop contraction over one shared leg pair; the
    /// independent oracle for the fast permute-and-multiply path.
    fn loop_contract_oracle(x: &Tensor, y: &Tensor, lx: &str, ly: &str) -> Vec<C64> {
        let ix = x.legs().iter().position(|l| l == lx).unwrap();
        let iy = y.legs().iter().position(|l| l == ly).unwrap();
        let xf: Vec<usize> = (0..x.rank()).filter(|&i| i != ix).collect();
        let yf: Vec<usize> = (0..y.rank()).filter(|&i| i != iy).collect();
        let out_shape: Vec<usize> = xf
            .iter()
            .map(|&i| x.shape()[i])
            .chain(yf.iter().map(|&i| y.shape()[i]))
            .collect();
        let total: usize = out_shape.iter().product();
        let mut out = vec![c(0.0, 0.0); total];
        for flat in 0..total {
            let mut rem = flat;
            let mut idx = vec![0usize; out_shape.len()];
            for i in (0..out_shape.len()).rev() {
                idx[i] = rem % out_shape[i];
                rem /= out_shape[i];
            }
            let mut acc = c(0.0, 0.0);
            for k in 0..x.shape()[ix] {
                let mut xi = vec![0usize; x.rank()];
                for (pos, &i) in xf.iter().enumerate() {
                    xi[i] = idx[pos];
                }
                xi[ix] = k;
                let mut yi = vec![0usize; y.rank()];
                for (pos, &i) in yf.iter().enumerate() {
                    yi[i] = idx[xf.len() + pos];
                }
                yi[iy] = k;
                acc += x.get(&xi) * y.get(&yi);
            }
            out[flat] = acc;
        }
        out
    }

    #[test]
    fn identity_composition() {
        let i1 = Tensor::identity(2, "u", "v");
        let i2 = Tensor::identity(2, "v", "w");
        let out = contract(&i1, &i2, &[("v", "v")]).unwrap();
        assert_eq!(out.legs(), &["u".to_string(), "w".to_string()]);
        assert_eq!(out.data(), Tensor::identity(2, "u", "w").data());
    }

    #[test]
    fn contract_matches_loop_oracle() {
        let mut rng = StdRng::seed_from_u64(17);
        for _ in 0..20 {
            let x = random_tensor(&mut rng, vec!["a", "b", "c"], vec![2, 2, 2]);
            let y = random_tensor(&mut rng, vec!["p", "q", "r"], vec![2, 2, 2]);
            let fast = contract(&x, &y, &[("b", "q")]).unwrap();
            let slow = loop_contract_oracle(&x, &y, "b", "q");
            for (f, s) in fast.data().iter().zip(&slow) {
                assert!((f - s).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn contract_error_paths() {
        let x = random_tensor(&mut StdRng::seed_from_u64(1), vec!["a", "b"], vec![2, 3]);
        let y = random_tensor(&mut StdRng::seed_from_u64(2), vec!["c", "d"], vec![2, 3]);
        assert!(matches!(
            contract(&x, &y, &[("b", "c")]),
            Err(TensorError::DimMismatch { .. })
        ));
        assert!(matches!(
            contract(&x, &y, &[("a", "c"), ("a", "d")]),
            Err(TensorError::DuplicatePairing(_))
        ));
    }

    #[test]
    fn contraction_is_bilinear() {
        let mut rng = StdRng::seed_from_u64(3);
        let x1 = random_tensor(&mut rng, vec!["a", "b"], vec![2, 2]);
        let x2 = random_tensor(&mut rng, vec!["a", "b"], vec![2, 2]);
        let y = random_tensor(&mut rng, vec!["b", "c"], vec![2, 2]);
        let (alpha, beta) = (c(0.7, -0.2), c(-1.1, 0.4));
        let lhs = contract(
            &Tensor::linear_combination(alpha, &x1, beta, &x2).unwrap(),
            &y,
            &[("b", "b")],
        )
        .unwrap();
        let t1 = contract(&x1, &y, &[("b", "b")]).unwrap();
        let t2 = contract(&x2, &y, &[("b", "b")]).unwrap();
        let rhs = Tensor::linear_combination(alpha, &t1, beta, &t2).unwrap();
        for (l, r) in lhs.data().iter().zip(rhs.data()) {
            assert!((l - r).norm() < 1e-12);
        }
    }

    #[test]
    fn matricize_round_trips_bit_exactly() {
        let mut rng = StdRng::seed_from_u64(5);
        let x = random_tensor(&mut rng, vec!["a", "b", "c", "d"], vec![2, 3, 2, 2]);
        let m = matricize(&x, &["a", "c"], &["b", "d"]).unwrap();
        let back = m.into_tensor();
        let restored = back.permuted(&["a", "b", "c", "d"]).unwrap();
        assert_eq!(restored.data(), x.data());
    }

    #[test]
    fn matricize_matches_permute_reshape_oracle() {
        let mut rng = StdRng::seed_from_u64(6);
        let x = random_tensor(&mut rng, vec!["a", "b", "c", "d"], vec![2, 2, 2, 2]);
        let m = matricize(&x, &["a", "c"], &["b", "d"]).unwrap();
        for a in 0..2 {
            for b in 0..2 {
                for cc in 0..2 {
                    for d in 0..2 {
                        let got = m.data[(2 * a + cc, 2 * b + d)];
                        assert_eq!(got, x.get(&[a, b, cc, d]));
                    }
                }
            }
        }
    }

    #[test]
    fn matricize_rejects_non_partition() {
        let x = random_tensor(&mut StdRng::seed_from_u64(7), vec!["a", "b"], vec![2, 2]);
        assert!(matches!(
            matricize(&x, &["a"], &["a"]),
            Err(TensorError::BadPartition)
        ));
    }

    #[test]
    fn unitarity_defect_examples() {
        let m = matricize(&Tensor::identity(2, "a", "b"), &["a"], &["b"]).unwrap();
        assert_eq!(unitarity_defect(&m).unwrap(), 0.0);
        let two = Tensor::identity(2, "a", "b").scaled(c(2.0, 0.0));
        let m2 = matricize(&two, &["a"], &["b"]).unwrap();
        assert!((unitarity_defect(&m2).unwrap() - 3.0).abs() < 1e-15);
    }

    #[test]
    fn eigendecompose_identity_and_diagonal() {
        let id = matricize(
            &contract(
                &Tensor::identity(4, "a", "b"),
                &Tensor::identity(4, "b", "c"),
                &[("b", "b")],
            )
            .unwrap(),
            &["a"],
            &["c"],
        )
        .unwrap();
        let e = eigendecompose(&id, 1e-10).unwrap();
        for v in &e.eigenvalues {
            assert!((v - c(1.0, 0.0)).norm() < 1e-12);
        }

        let diag = Tensor::new(
            vec!["r", "s"],
            vec![3, 3],
            vec![
                c(3.0, 0.0),
                c(0.0, 0.0),
                c(0.0, 0.0),
                c(0.0, 0.0),
                c(-1.0, 0.0),
                c(0.0, 0.0),
                c(0.0, 0.0),
                c(0.0, 0.0),
                c(0.5, 0.0),
            ],
        )
        .unwrap();
        let m = matricize(&diag, &["r"], &["s"]).unwrap();
        let e = eigendecompose(&m, 1e-10).unwrap();
        let got: Vec<f64> = e.eigenvalues.iter().map(|v| v.re).collect();
        assert!((got[0] - 3.0).abs() < 1e-12);
        assert!((got[1] + 1.0).abs() < 1e-12);
        assert!((got[2] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn eigendecompose_random_residual() {
        let mut rng = StdRng::seed_from_u64(11);
        let x = random_tensor(&mut rng, vec!["r", "s"], vec![8, 8]);
        let m = matricize(&x, &["r"], &["s"]).unwrap();
        let e = eigendecompose(&m, 1e-8).unwrap();
        assert!(e.residual <= 1e-8);
        for k in 0..8 {
            let v = e.eigenvectors.column(k);
            let mv = m.data.dot(&v);
            for i in 0..8 {
                assert!((mv[i] - e.eigenvalues[k] * v[i]).norm() <= 1e-8);
            }
        }
    }

    #[test]
    fn eigendecompose_rejects_non_square() {
        let x = random_tensor(&mut StdRng::seed_from_u64(13), vec!["r", "s"], vec![2, 3]);
        let m = matricize(&x, &["r"], &["s"]).unwrap();
        assert!(matches!(
            eigendecompose(&m, 1e-8),
            Err(TensorError::NotSquare { .. })
        ));
    }
}
