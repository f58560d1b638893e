//! Descending and ascending superoperators on n-site density matrices,
//! built from causal-cone schemas, their eigen-spectra, and the CFT-side
//! quantities derived from them (scaling dimensions, central charge,
//! correlation exponents).
//!
//! A cone schema lists Kraus-factor nodes (W/U/Bgate roles from a bound
//! decomposition), internal bonds, and the partition of the free legs into
//! channel inputs, kept region legs, and traced environment legs:
//!
//!   D(ρ) = Tr_traced[ K ρ K† ],   A(O) = K† (O ⊗ I_traced) K
//!
//! with K the contraction of the cone. The multitensor constraints make K an
//! isometry, so D is completely positive and trace preserving and A is its
//! unital dual.

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decomposition::Decomposition;
use crate::families::ParameterSet;
use crate::schema::{compose_relaxed, ContractionSchema, LegRef, SchemaError};
use crate::tensor::{
    eigendecompose, hermitian_defect, hermitian_eigenvalues, MatrixView, Tensor, TensorError, C64,
};

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("cone `{0}` failed to parse: {1}")]
    BadCone(String, String),
    #[error("cone kept/input dimensions differ ({kept} vs {input})")]
    RegionMismatch { kept: usize, input: usize },
    #[error("built map is not trace preserving (defect {0:.3e}); cone is mis-wired")]
    NotTracePreserving(f64),
    #[error("superoperator shapes differ")]
    ShapeMismatch,
    #[error("averaging weights must be nonnegative and sum to 1 (sum {0})")]
    BadWeights(f64),
    #[error("superoperator kinds differ")]
    KindMismatch,
    #[error("scale factor must exceed 1 (got {0})")]
    BadScaleFactor(f64),
    #[error("dominant scaling dimension {0:.3e} deviates from 0 beyond 1e-6")]
    AnomalousLeadingEigenvalue(f64),
    #[error("eigenvalue index {0} out of range")]
    IndexOutOfRange(usize),
    #[error("central charge requires n > m >= 1 (got n={0}, m={1})")]
    BadRegionSizes(usize, usize),
    #[error(transparent)]
    Schema(#[from] SchemaError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Decomposition(#[from] Box<crate::decomposition::DecompositionError>),
}

impl From<crate::decomposition::DecompositionError> for ChannelError {
    fn from(e: crate::decomposition::DecompositionError) -> Self {
        ChannelError::Decomposition(Box::new(e))
    }
}

pub type Result<T> = std::result::Result<T, ChannelError>;

pub const CHANNEL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SuperoperatorKind {
    Descending,
    Ascending,
}

/// Causal-cone wiring: Kraus-factor nodes plus the input/kept/traced leg
/// partition. Same node/bond format as composition schemas.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConeSchema {
    pub name: String,
    #[serde(default)]
    pub comment: String,
    pub nodes: Vec<crate::schema::SchemaNode>,
    #[serde(default)]
    pub bonds: Vec<(LegRef, LegRef)>,
    pub inputs: Vec<LegRef>,
    pub kept: Vec<LegRef>,
    pub traced: Vec<LegRef>,
}

impl ConeSchema {
    pub fn from_json(name: &str, text: &str) -> Result<Self> {
        let cone: ConeSchema = serde_json::from_str(text)
            .map_err(|e| ChannelError::BadCone(name.to_string(), e.to_string()))?;
        cone.as_contraction_schema().validate_relaxed()?;
        Ok(cone)
    }

    pub fn load(name: &str) -> Result<Self> {
        let text = crate::decomposition::load_cone_text(name)?;
        Self::from_json(name, &text)
    }

    fn as_contraction_schema(&self) -> ContractionSchema {
        let outputs = self
            .kept
            .iter()
            .chain(&self.traced)
            .chain(&self.inputs)
            .cloned()
            .map(crate::schema::OutputLeg::Single)
            .collect();
        ContractionSchema {
            nodes: self.nodes.clone(),
            bonds: self.bonds.clone(),
            outputs,
        }
    }
}

/// A matricized linear map on n-site density matrices.
///
/// `matrix[(k,l),(i,j)]` maps vec(ρ) to vec(D(ρ)) in row-major vec order.
#[derive(Debug, Clone)]
pub struct Superoperator {
    pub sites: usize,
    pub site_dim: usize,
    pub kind: SuperoperatorKind,
    pub cone_id: String,
    pub matrix: Array2<C64>,
}

impl Superoperator {
    pub fn dim(&self) -> usize {
        self.site_dim.pow(self.sites as u32)
    }

    /// Apply to a density matrix.
    pub fn apply(&self, rho: &Array2<C64>) -> Array2<C64> {
        let d = self.dim();
        let v: Vec<C64> = rho.iter().copied().collect();
        let v = ndarray::Array1::from_vec(v);
        let out = self.matrix.dot(&v);
        Array2::from_shape_vec((d, d), out.to_vec()).expect("apply reshape")
    }

    /// max_ij |tr D(|i><j|) − δ_ij| for descending maps.
    pub fn trace_preserving_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let mut acc = C64::new(0.0, 0.0);
                for k in 0..d {
                    acc += self.matrix[(k * d + k, i * d + j)];
                }
                let target = if i == j {
                    C64::new(1.0, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                };
                worst = worst.max((acc - target).norm());
            }
        }
        worst
    }

    /// ‖A(I) − I‖_max for ascending maps.
    pub fn unital_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let mut acc = C64::new(0.0, 0.0);
                for k in 0..d {
                    acc += self.matrix[(i * d + j, k * d + k)];
                }
                let target = if i == j {
                    C64::new(1.0, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                };
                worst = worst.max((acc - target).norm());
            }
        }
        worst
    }

    /// Choi matrix C[(i,k),(j,l)] = D[(k,l),(i,j)].
    pub fn choi_matrix(&self) -> Array2<C64> {
        let d = self.dim();
        let mut choi = Array2::<C64>::zeros((d * d, d * d));
        for k in 0..d {
            for l in 0..d {
                for i in 0..d {
                    for j in 0..d {
                        choi[(i * d + k, j * d + l)] = self.matrix[(k * d + l, i * d + j)];
                    }
                }
            }
        }
        choi
    }

    /// Smallest eigenvalue of the (Hermitized) Choi matrix; ≥ −1e-8 for a
    /// completely positive map.
    pub fn choi_min_eigenvalue(&self) -> Result<f64> {
        let c = self.choi_matrix();
        let herm = (&c + &c.t().mapv(|z| z.conj())).mapv(|z| z * 0.5);
        let vals = hermitian_eigenvalues(&herm)?;
        Ok(vals[0])
    }

    pub fn choi_hermiticity_defect(&self) -> f64 {
        hermitian_defect(&self.choi_matrix())
    }

    pub fn spectral_radius(&self) -> Result<f64> {
        let view = MatrixView::from_array(self.matrix.clone());
        let e = eigendecompose(&view, CHANNEL_TOL)?;
        Ok(e.eigenvalues[0].norm())
    }
}

/// Contract a cone into its Kraus tensor K with legs (kept…, traced…, inputs…).
fn build_kraus(decomposition: &Decomposition, cone: &ConeSchema) -> Result<Tensor> {
    let bindings = decomposition.cone_bindings(CHANNEL_TOL)?;
    Ok(compose_relaxed(&cone.as_contraction_schema(), &bindings)?)
}

fn kraus_dims(k: &Tensor, cone: &ConeSchema) -> Result<(usize, usize, usize)> {
    let shape = k.shape();
    let nk = cone.kept.len();
    let nt = cone.traced.len();
    // sites of the region must share one dimension
    if shape[..nk].iter().any(|&d| d != shape[0]) {
        return Err(ChannelError::RegionMismatch {
            kept: shape[..nk].iter().product(),
            input: shape[0].pow(nk as u32),
        });
    }
    let dk: usize = shape[..nk].iter().product();
    let dt: usize = shape[nk..nk + nt].iter().product();
    let di: usize = shape[nk + nt..].iter().product();
    Ok((dk, dt, di))
}

/// Build the descending superoperator D(ρ) = Tr_traced[K ρ K†].
pub fn build_descending(decomposition: &Decomposition, cone: &ConeSchema) -> Result<Superoperator> {
    let k = build_kraus(decomposition, cone)?;
    let (dk, dt, di) = kraus_dims(&k, cone)?;
    if dk != di {
        return Err(ChannelError::RegionMismatch {
            kept: dk,
            input: di,
        });
    }
    let data = k.data();
    let mut matrix = Array2::<C64>::zeros((dk * dk, di * di));
    // K is stored row-major over (kept, traced, input)
    for ka in 0..dk {
        for t in 0..dt {
            for i in 0..di {
                let x = data[(ka * dt + t) * di + i];
                if x.norm() == 0.0 {
                    continue;
                }
                for l in 0..dk {
                    for j in 0..di {
                        let y = data[(l * dt + t) * di + j].conj();
                        matrix[(ka * dk + l, i * di + j)] += x * y;
                    }
                }
            }
        }
    }
    let site_dim = k.shape()[0];
    let op = Superoperator {
        sites: cone.kept.len(),
        site_dim,
        kind: SuperoperatorKind::Descending,
        cone_id: cone.name.clone(),
        matrix,
    };
    let tp = op.trace_preserving_defect();
    if tp > CHANNEL_TOL {
        return Err(ChannelError::NotTracePreserving(tp));
    }
    Ok(op)
}

/// Build the dual ascending superoperator A(O) = K†(O ⊗ I)K.
pub fn build_ascending(decomposition: &Decomposition, cone: &ConeSchema) -> Result<Superoperator> {
    let k = build_kraus(decomposition, cone)?;
    let (dk, dt, di) = kraus_dims(&k, cone)?;
    if dk != di {
        return Err(ChannelError::RegionMismatch {
            kept: dk,
            input: di,
        });
    }
    let data = k.data();
    let mut matrix = Array2::<C64>::zeros((di * di, dk * dk));
    for ka in 0..dk {
        for t in 0..dt {
            for i in 0..di {
                let x = data[(ka * dt + t) * di + i].conj();
                if x.norm() == 0.0 {
                    continue;
                }
                for l in 0..dk {
                    for j in 0..di {
                        let y = data[(l * dt + t) * di + j];
                        matrix[(i * di + j, ka * dk + l)] += x * y;
                    }
                }
            }
        }
    }
    Ok(Superoperator {
        sites: cone.kept.len(),
        site_dim: k.shape()[0],
        kind: SuperoperatorKind::Ascending,
        cone_id: cone.name.clone(),
        matrix,
    })
}

/// Convex combination of same-shape superoperators.
pub fn average_superoperator(ops: &[Superoperator], weights: &[f64]) -> Result<Superoperator> {
    if ops.is_empty() || ops.len() != weights.len() {
        return Err(ChannelError::ShapeMismatch);
    }
    let wsum: f64 = weights.iter().sum();
    if weights.iter().any(|&w| w < 0.0) || (wsum - 1.0).abs() > 1e-9 {
        return Err(ChannelError::BadWeights(wsum));
    }
    let first = &ops[0];
    let mut matrix = Array2::<C64>::zeros(first.matrix.dim());
    for (op, &w) in ops.iter().zip(weights) {
        if op.matrix.dim() != first.matrix.dim()
            || op.sites != first.sites
            || op.site_dim != first.site_dim
        {
            return Err(ChannelError::ShapeMismatch);
        }
        if op.kind != first.kind {
            return Err(ChannelError::KindMismatch);
        }
        matrix = matrix + op.matrix.mapv(|z| z * w);
    }
    Ok(Superoperator {
        sites: first.sites,
        site_dim: first.site_dim,
        kind: first.kind,
        cone_id: "average".to_string(),
        matrix,
    })
}

/// Build the decomposition's average n-site descending superoperator from its
/// preset cone mix (n = 1 or 2), with optional weight overrides.
pub fn average_descending(
    decomposition: &Decomposition,
    sites: usize,
    weights_override: Option<&[f64]>,
) -> Result<Superoperator> {
    let mix = match sites {
        1 => &decomposition.spec.cones.one_site,
        2 => &decomposition.spec.cones.two_site,
        _ => return Err(ChannelError::ShapeMismatch),
    };
    let mix: Vec<(String, f64)> = mix
        .iter()
        .enumerate()
        .map(|(idx, (name, w))| {
            let w = weights_override
                .and_then(|ws| ws.get(idx).copied())
                .unwrap_or(*w);
            (name.clone(), w)
        })
        .collect();
    average_descending_with_mix(decomposition, &mix)
}

/// Average descending superoperator over an explicit cone preset mix.
pub fn average_descending_with_mix(
    decomposition: &Decomposition,
    mix: &[(String, f64)],
) -> Result<Superoperator> {
    let mut ops = Vec::new();
    let mut weights = Vec::new();
    for (name, w) in mix {
        let cone = ConeSchema::load(name)?;
        ops.push(build_descending(decomposition, &cone)?);
        weights.push(*w);
    }
    average_superoperator(&ops, &weights)
}

/// Fixed point of a descending superoperator by power iteration from the
/// maximally mixed state; stops at 1e-10 successive-iterate distance or
/// 10⁴ iterations.
pub fn fixed_point(op: &Superoperator) -> (Array2<C64>, usize, f64) {
    let d = op.dim();
    let mut rho = Array2::<C64>::eye(d).mapv(|z| z / d as f64);
    let mut delta = f64::INFINITY;
    for iter in 0..10_000 {
        let mut next = op.apply(&rho);
        // restore exact Hermiticity and unit trace against roundoff drift
        next = (&next + &next.t().mapv(|z| z.conj())).mapv(|z| z * 0.5);
        let tr: f64 = (0..d).map(|i| next[(i, i)].re).sum();
        if tr.abs() > 1e-300 {
            next = next.mapv(|z| z / tr);
        }
        delta = (&next - &rho).iter().map(|z| z.norm()).fold(0.0, f64::max);
        rho = next;
        if delta <= 1e-10 {
            return (rho, iter + 1, delta);
        }
    }
    (rho, 10_000, delta)
}

/// Eigenvalues and scaling dimensions Δᵢ = −log_s |λᵢ| of a superoperator.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalingSpectrum {
    pub eigenvalues: Vec<(f64, f64)>,
    pub dimensions: Vec<f64>,
    pub scale_factor: f64,
    pub trial_params: Option<ParameterSet>,
}

/// Top-k eigenpairs of the superoperator converted to scaling dimensions.
///
/// Δ₀ must vanish within 1e-6 (the dominant eigenvalue of a trace-preserving
/// map is 1); Δᵢ are nondecreasing by the magnitude sort.
pub fn scaling_spectrum(op: &Superoperator, s: f64, k: usize) -> Result<ScalingSpectrum> {
    if s <= 1.0 {
        return Err(ChannelError::BadScaleFactor(s));
    }
    let view = MatrixView::from_array(op.matrix.clone());
    let e = eigendecompose(&view, CHANNEL_TOL)?;
    let k = k.min(e.eigenvalues.len());
    let lambdas = &e.eigenvalues[..k];
    let dims: Vec<f64> = lambdas.iter().map(|l| -l.norm().ln() / s.ln()).collect();
    if dims.first().is_some_and(|d| d.abs() > 1e-6) {
        return Err(ChannelError::AnomalousLeadingEigenvalue(dims[0]));
    }
    Ok(ScalingSpectrum {
        eigenvalues: lambdas.iter().map(|l| (l.re, l.im)).collect(),
        dimensions: dims,
        scale_factor: s,
        trial_params: None,
    })
}

/// Cardy inversion: c = 3 (S_n − S_m) / (log n − log m).
pub fn central_charge(s_n: f64, s_m: f64, n: usize, m: usize) -> Result<f64> {
    if m < 1 || n <= m {
        return Err(ChannelError::BadRegionSizes(n, m));
    }
    Ok(3.0 * (s_n - s_m) / ((n as f64).ln() - (m as f64).ln()))
}

/// Predicted algebraic decay exponent 2Δ_α of the two-point function of the
/// α-th scaling operator.
pub fn correlation_exponent(spectrum: &ScalingSpectrum, alpha: usize) -> Result<f64> {
    if alpha < 1 || alpha >= spectrum.dimensions.len() {
        return Err(ChannelError::IndexOutOfRange(alpha));
    }
    Ok(2.0 * spectrum.dimensions[alpha])
}

/// Duality defect max |tr[O·D(ρ)] − tr[A(O)·ρ]| over `n` random (O, ρ) pairs.
pub fn duality_defect(
    descending: &Superoperator,
    ascending: &Superoperator,
    n: usize,
    rng: &mut impl rand::Rng,
) -> f64 {
    let d = descending.dim();
    let mut worst = 0.0f64;
    for _ in 0..n {
        let o = random_matrix(d, rng);
        let rho = random_density(d, rng);
        let lhs = trace_product(&o, &descending.apply(&rho));
        let a_of_o = apply_ascending(ascending, &o);
        let rhs = trace_product(&a_of_o, &rho);
        worst = worst.max((lhs - rhs).norm());
    }
    worst
}

fn apply_ascending(op: &Superoperator, o: &Array2<C64>) -> Array2<C64> {
    op.apply(o)
}

fn trace_product(a: &Array2<C64>, b: &Array2<C64>) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

fn random_matrix(d: usize, rng: &mut impl rand::Rng) -> Array2<C64> {
    Array2::from_shape_fn((d, d), |_| {
        C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

fn random_density(d: usize, rng: &mut impl rand::Rng) -> Array2<C64> {
    let g = random_matrix(d, rng);
    let gg = g.dot(&g.t().mapv(|z| z.conj()));
    let tr: f64 = (0..d).map(|i| gg[(i, i)].re).sum();
    gg.mapv(|z| z / tr)
}

/// Von Neumann entropies of the one- and two-site fixed points and the
/// resulting Cardy central-charge estimate (diagnostic; no target value).
pub fn fixed_point_central_charge(decomposition: &Decomposition) -> Result<f64> {
    let d1 = average_descending(decomposition, 1, None)?;
    let d2 = average_descending(decomposition, 2, None)?;
    let (rho1, _, _) = fixed_point(&d1);
    let (rho2, _, _) = fixed_point(&d2);
    let s1 = crate::tensor::von_neumann_entropy(&rho1)?;
    let s2 = crate::tensor::von_neumann_entropy(&rho2)?;
    central_charge(s2, s1, 2, 1)
}
