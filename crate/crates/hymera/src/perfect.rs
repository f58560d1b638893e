//! Perfect-tensor checks (proportional isometry across every bipartition
//! with |A| ≤ |Aᶜ|) and operator pushing through isometric tensors.

use serde::Serialize;
use thiserror::Error;

use crate::tensor::{matricize, Tensor, TensorError, C64};

#[derive(Debug, Error)]
pub enum PerfectError {
    #[error("perfect-tensor check requires an even number of legs (got {0})")]
    OddLegCount(usize),
    #[error("tensor is not isometric on the given partition (defect {0:.3e})")]
    NotIsometric(f64),
    #[error("operator dimension {got} does not match the tensor input dimension {want}")]
    OperatorDim { got: usize, want: usize },
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

pub type Result<T> = std::result::Result<T, PerfectError>;

/// Defect of one bipartition check.
#[derive(Debug, Clone, Serialize)]
pub struct BipartitionDefect {
    /// Leg labels in the A side.
    pub side: Vec<String>,
    /// ‖M·M† / c − I‖_max with c the fitted proportionality constant.
    pub defect: f64,
    /// Fitted constant; 0 when no positive fit exists.
    pub constant: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PerfectCheckResult {
    pub tensor_id: String,
    pub defects: Vec<BipartitionDefect>,
    pub is_perfect: bool,
    pub tol: f64,
}

fn proportional_isometry_defect(t: &Tensor, side: &[usize]) -> Result<(f64, f64)> {
    let legs: Vec<&str> = t.legs().iter().map(String::as_str).collect();
    let rows: Vec<&str> = side.iter().map(|&i| legs[i]).collect();
    let cols: Vec<&str> = (0..t.rank())
        .filter(|i| !side.contains(i))
        .map(|i| legs[i])
        .collect();
    let m = matricize(t, &rows, &cols)?;
    let g = m.data.dot(&m.dagger());
    let n = g.nrows();
    let c: f64 = (0..n).map(|i| g[(i, i)].re).sum::<f64>() / n as f64;
    if c <= 1e-14 {
        return Ok((f64::INFINITY, 0.0));
    }
    let mut defect = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j {
                C64::new(c, 0.0)
            } else {
                C64::new(0.0, 0.0)
            };
            defect = defect.max((g[(i, j)] - target).norm() / c);
        }
    }
    Ok((defect, c))
}

/// Enumerate every bipartition with |A| ≤ |Aᶜ| (complement-duplicates of the
/// balanced case dropped) and test C·I proportionality on each.
pub fn perfect_check(t: &Tensor, tensor_id: &str, tol: f64) -> Result<PerfectCheckResult> {
    let n = t.rank();
    if !n.is_multiple_of(2) {
        return Err(PerfectError::OddLegCount(n));
    }
    let half = n / 2;
    let mut defects = Vec::new();
    let mut is_perfect = true;
    for mask in 1u32..(1 << n) {
        let size = mask.count_ones() as usize;
        if size > half {
            continue;
        }
        // for balanced bipartitions keep only the representative containing leg 0
        if size == half && (mask & 1) == 0 {
            continue;
        }
        let side: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let (defect, constant) = proportional_isometry_defect(t, &side)?;
        if defect > tol {
            is_perfect = false;
        }
        defects.push(BipartitionDefect {
            side: side.iter().map(|&i| t.legs()[i].clone()).collect(),
            defect,
            constant,
        });
    }
    Ok(PerfectCheckResult {
        tensor_id: tensor_id.to_string(),
        defects,
        is_perfect,
        tol,
    })
}

/// The AME(4,3) tensor T_{ijkl} = 1 iff k = i+j mod 3 and l = i+2j mod 3.
pub fn ame_4_3() -> Tensor {
    let mut data = vec![C64::new(0.0, 0.0); 81];
    for i in 0..3 {
        for j in 0..3 {
            let k = (i + j) % 3;
            let l = (i + 2 * j) % 3;
            data[((i * 3 + j) * 3 + k) * 3 + l] = C64::new(1.0, 0.0);
        }
    }
    Tensor::new(vec!["i", "j", "k", "l"], vec![3, 3, 3, 3], data).expect("ame tensor")
}

/// Push an operator through an isometric tensor: O' = T·O·T†.
///
/// `in_legs`/`out_legs` partition the tensor's legs; the tensor must be
/// isometric on that partition within `tol`.
pub fn push_operator(
    t: &Tensor,
    op: &ndarray::Array2<C64>,
    in_legs: &[&str],
    out_legs: &[&str],
    tol: f64,
) -> Result<ndarray::Array2<C64>> {
    let m = matricize(t, out_legs, in_legs)?;
    let gram = m.dagger().dot(&m.data);
    let defect = crate::tensor::max_dev_from_identity(&gram);
    if defect > tol {
        return Err(PerfectError::NotIsometric(defect));
    }
    if op.nrows() != m.cols || op.ncols() != m.cols {
        return Err(PerfectError::OperatorDim {
            got: op.nrows(),
            want: m.cols,
        });
    }
    Ok(m.data.dot(op).dot(&m.dagger()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{build_y, ParameterSet};
    use ndarray::Array2;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    #[test]
    fn ame_4_3_is_perfect() {
        let t = ame_4_3();
        let result = perfect_check(&t, "ame43", 1e-10).unwrap();
        assert!(result.is_perfect);
        // 4 singletons + 3 balanced bipartitions
        assert_eq!(result.defects.len(), 7);
        for d in &result.defects {
            assert!(d.defect <= 1e-12);
            assert!(d.constant > 0.0);
        }
    }

    #[test]
    fn product_state_is_not_perfect() {
        // |00><00|-style rank-1 product tensor on 4 legs
        let mut data = vec![C64::new(0.0, 0.0); 16];
        data[0] = C64::new(1.0, 0.0);
        let t = Tensor::new(vec!["a", "b", "c", "d"], vec![2, 2, 2, 2], data).unwrap();
        let result = perfect_check(&t, "product", 1e-10).unwrap();
        assert!(!result.is_perfect);
    }

    #[test]
    fn random_two_dim_tensor_is_not_perfect() {
        let mut rng = StdRng::seed_from_u64(9);
        let data = (0..16)
            .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let t = Tensor::new(vec!["a", "b", "c", "d"], vec![2, 2, 2, 2], data).unwrap();
        let result = perfect_check(&t, "random", 1e-10).unwrap();
        assert!(!result.is_perfect);
    }

    #[test]
    fn odd_leg_count_rejected() {
        let t = Tensor::basis_state(2, 0, "a");
        assert!(matches!(
            perfect_check(&t, "odd", 1e-10),
            Err(PerfectError::OddLegCount(1))
        ));
    }

    #[test]
    fn push_identity_through_y() {
        let y = build_y(&ParameterSet::from_pairs(&[(1, 0.8)])).unwrap();
        let id = Array2::<C64>::eye(4);
        let pushed = push_operator(&y, &id, &["c", "d"], &["a", "b"], 1e-10).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((pushed[(i, j)] - C64::new(want, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn push_preserves_spectrum() {
        let y = build_y(&ParameterSet::from_pairs(&[(1, 0.37)])).unwrap();
        // Pauli-like involution X ⊗ Z
        let mut op = Array2::<C64>::zeros((4, 4));
        op[(0, 2)] = C64::new(1.0, 0.0);
        op[(1, 3)] = C64::new(-1.0, 0.0);
        op[(2, 0)] = C64::new(1.0, 0.0);
        op[(3, 1)] = C64::new(-1.0, 0.0);
        let pushed = push_operator(&y, &op, &["c", "d"], &["a", "b"], 1e-10).unwrap();
        let view = crate::tensor::MatrixView::from_array(pushed);
        let e = crate::tensor::eigendecompose(&view, 1e-8).unwrap();
        let mut mags: Vec<f64> = e.eigenvalues.iter().map(|l| l.norm()).collect();
        mags.sort_by(|a, b| b.partial_cmp(a).unwrap());
        for m in mags {
            assert!((m - 1.0).abs() < 1e-10);
        }
        let sum: C64 = e.eigenvalues.iter().sum();
        assert!(sum.norm() < 1e-10); // traceless involution stays traceless
    }

    #[test]
    fn push_through_non_isometry_errors() {
        let mut rng = StdRng::seed_from_u64(21);
        let data = (0..16)
            .map(|_| C64::new(rng.random_range(-1.0..1.0), 0.0))
            .collect();
        let junk = Tensor::new(vec!["a", "b", "c", "d"], vec![2, 2, 2, 2], data).unwrap();
        let id = Array2::<C64>::eye(4);
        assert!(matches!(
            push_operator(&junk, &id, &["c", "d"], &["a", "b"], 1e-8),
            Err(PerfectError::NotIsometric(_))
        ));
    }
}
