//! Contraction schemas: wiring diagrams that assemble composite tensors
//! ({A,B} vertex/edge tensors, {U,W} renormalization gates) from bound
//! constituent tensors.
//!
//! Schemas are plain data (JSON-loadable); the canonical wirings ship as
//! presets. Node roles are the constituent letters Y/R/Q/T/S, the built-ins
//! `anc0` (1-leg |0> cap) and `id2` (2-leg identity), composite roles bound
//! by the caller, or `conj:<node-id>` for the conjugate of another node's
//! tensor.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tensor::{
    self, contract, hermitian_defect, hermitian_eigenvalues, matricize, max_dev_from_identity,
    MatrixView, Tensor, C64,
};

#[derive(Debug, Error)]
pub enum SchemaError {
    #[error("duplicate node id `{0}`")]
    DuplicateNode(String),
    #[error(
        "node `{node}` leg `{leg}` used {count} times across bonds and outputs (want exactly 1)"
    )]
    LegUsage {
        node: String,
        leg: String,
        count: usize,
    },
    #[error("schema references unknown node `{0}`")]
    UnknownNode(String),
    #[error("schema graph is disconnected")]
    Disconnected,
    #[error("role `{0}` is not bound")]
    UnboundRole(String),
    #[error("node `{node}` has {got} legs but its role tensor has {want}")]
    ArityMismatch {
        node: String,
        got: usize,
        want: usize,
    },
    #[error("gram matrix is not proportional to the identity (defect {0:.3e})")]
    NotProportional(f64),
    #[error("density matrix is not Hermitian (defect {0:.3e})")]
    NonHermitian(f64),
    #[error(transparent)]
    Tensor(#[from] tensor::TensorError),
}

pub type Result<T> = std::result::Result<T, SchemaError>;

pub type LegRef = (String, String);

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SchemaNode {
    pub id: String,
    pub role: String,
    pub legs: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OutputLeg {
    Single(LegRef),
    Fused { fuse: Vec<LegRef> },
}

/// A wiring diagram: nodes with labelled legs, internal bonds, and the
/// ordered free output legs (single or fused into one network leg).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContractionSchema {
    pub nodes: Vec<SchemaNode>,
    #[serde(default)]
    pub bonds: Vec<(LegRef, LegRef)>,
    pub outputs: Vec<OutputLeg>,
}

impl ContractionSchema {
    fn output_refs(&self) -> Vec<LegRef> {
        let mut out = Vec::new();
        for o in &self.outputs {
            match o {
                OutputLeg::Single(r) => out.push(r.clone()),
                OutputLeg::Fused { fuse } => out.extend(fuse.iter().cloned()),
            }
        }
        out
    }

    /// Structural validation: unique ids, every leg used exactly once,
    /// connectivity of the bond graph.
    pub fn validate(&self) -> Result<()> {
        self.validate_structure(true)
    }

    /// Validation for cone graphs, which may legitimately be disconnected
    /// (a product of independent wires is a valid Kraus factor).
    pub fn validate_relaxed(&self) -> Result<()> {
        self.validate_structure(false)
    }

    fn validate_structure(&self, require_connected: bool) -> Result<()> {
        let mut ids = Vec::new();
        for n in &self.nodes {
            if ids.contains(&n.id) {
                return Err(SchemaError::DuplicateNode(n.id.clone()));
            }
            ids.push(n.id.clone());
        }
        let mut usage: BTreeMap<(String, String), usize> = BTreeMap::new();
        for n in &self.nodes {
            for l in &n.legs {
                usage.insert((n.id.clone(), l.clone()), 0);
            }
        }
        let mut touch = |r: &LegRef| -> Result<()> {
            match usage.get_mut(&(r.0.clone(), r.1.clone())) {
                Some(c) => {
                    *c += 1;
                    Ok(())
                }
                None => Err(SchemaError::UnknownNode(format!("{}.{}", r.0, r.1))),
            }
        };
        for (x, y) in &self.bonds {
            touch(x)?;
            touch(y)?;
        }
        for r in self.output_refs() {
            touch(&r)?;
        }
        for ((node, leg), count) in &usage {
            if *count != 1 {
                return Err(SchemaError::LegUsage {
                    node: node.clone(),
                    leg: leg.clone(),
                    count: *count,
                });
            }
        }
        // connectivity over bonds
        if require_connected && self.nodes.len() > 1 {
            let idx: BTreeMap<&str, usize> = self
                .nodes
                .iter()
                .enumerate()
                .map(|(i, n)| (n.id.as_str(), i))
                .collect();
            let mut comp: Vec<usize> = (0..self.nodes.len()).collect();
            fn root(comp: &mut [usize], mut i: usize) -> usize {
                while comp[i] != i {
                    comp[i] = comp[comp[i]];
                    i = comp[i];
                }
                i
            }
            for (x, y) in &self.bonds {
                let (a, b) = (idx[x.0.as_str()], idx[y.0.as_str()]);
                let (ra, rb) = (root(&mut comp, a), root(&mut comp, b));
                comp[ra] = rb;
            }
            let r0 = root(&mut comp, 0);
            for i in 1..self.nodes.len() {
                if root(&mut comp, i) != r0 {
                    return Err(SchemaError::Disconnected);
                }
            }
        }
        Ok(())
    }
}

fn qualified(node: &str, leg: &str) -> String {
    format!("{node}.{leg}")
}

fn resolve_role(
    node: &SchemaNode,
    nodes: &[SchemaNode],
    bindings: &BTreeMap<String, Tensor>,
) -> Result<Tensor> {
    if let Some(target) = node.role.strip_prefix("conj:") {
        let t = nodes
            .iter()
            .find(|n| n.id == target)
            .ok_or_else(|| SchemaError::UnknownNode(target.to_string()))?;
        if t.role.starts_with("conj:") {
            return Err(SchemaError::UnknownNode(format!(
                "conj of conj node `{target}`"
            )));
        }
        return Ok(resolve_role(t, nodes, bindings)?.conj());
    }
    match node.role.as_str() {
        "anc0" => Ok(Tensor::basis_state(2, 0, "k")),
        "id2" => Ok(Tensor::identity(2, "o", "i")),
        letter => bindings
            .get(letter)
            .cloned()
            .ok_or_else(|| SchemaError::UnboundRole(letter.to_string())),
    }
}

/// Sum a tensor over two equal-dimension legs of itself.
fn trace_pair(t: &Tensor, l1: &str, l2: &str) -> Result<Tensor> {
    let keep: Vec<&str> = t
        .legs()
        .iter()
        .map(String::as_str)
        .filter(|l| *l != l1 && *l != l2)
        .collect();
    let mut order = keep.clone();
    order.push(l1);
    order.push(l2);
    let tp = t.permuted(&order)?;
    let d = *tp.shape().last().unwrap();
    let outer: usize = tp.shape()[..tp.rank() - 2].iter().product();
    let mut data = vec![C64::new(0.0, 0.0); outer];
    for (o, slot) in data.iter_mut().enumerate() {
        for k in 0..d {
            *slot += tp.data()[o * d * d + k * d + k];
        }
    }
    if keep.is_empty() {
        return Tensor::new(vec!["scalar"], vec![1], data).map_err(Into::into);
    }
    let shape = tp.shape()[..tp.rank() - 2].to_vec();
    Tensor::new(keep, shape, data).map_err(Into::into)
}

/// Contract a schema with the given role bindings.
///
/// Bonds are evaluated greedily, smallest intermediate first; the result is
/// independent of evaluation order. Output legs are returned in declared
/// order, with fused groups reshaped into single legs of product dimension.
pub fn compose(schema: &ContractionSchema, bindings: &BTreeMap<String, Tensor>) -> Result<Tensor> {
    schema.validate()?;
    compose_unchecked(schema, bindings, false)
}

/// Like [`compose`] but permits disconnected graphs, combining the leftover
/// components by outer product. Used for cone schemas.
pub fn compose_relaxed(
    schema: &ContractionSchema,
    bindings: &BTreeMap<String, Tensor>,
) -> Result<Tensor> {
    schema.validate_relaxed()?;
    compose_unchecked(schema, bindings, true)
}

fn compose_unchecked(
    schema: &ContractionSchema,
    bindings: &BTreeMap<String, Tensor>,
    allow_disconnected: bool,
) -> Result<Tensor> {
    let mut parts: Vec<Option<Tensor>> = Vec::new();
    for node in &schema.nodes {
        let raw = resolve_role(node, &schema.nodes, bindings)?;
        if raw.rank() != node.legs.len() {
            return Err(SchemaError::ArityMismatch {
                node: node.id.clone(),
                got: node.legs.len(),
                want: raw.rank(),
            });
        }
        let renamed = raw.renamed(
            node.legs
                .iter()
                .map(|l| qualified(&node.id, l))
                .collect::<Vec<_>>(),
        )?;
        parts.push(Some(renamed));
    }

    let mut bonds: Vec<(String, String)> = schema
        .bonds
        .iter()
        .map(|(x, y)| (qualified(&x.0, &x.1), qualified(&y.0, &y.1)))
        .collect();

    let find_part = |parts: &[Option<Tensor>], leg: &str| -> usize {
        parts
            .iter()
            .position(|p| {
                p.as_ref()
                    .is_some_and(|t| t.legs().iter().any(|l| l == leg))
            })
            .expect("leg must live in some component")
    };

    while !bonds.is_empty() {
        // Internal traces first: they only shrink the component.
        if let Some(pos) = bonds
            .iter()
            .position(|(x, y)| find_part(&parts, x) == find_part(&parts, y))
        {
            let (x, y) = bonds.remove(pos);
            let i = find_part(&parts, &x);
            let t = parts[i].take().unwrap();
            parts[i] = Some(trace_pair(&t, &x, &y)?);
            continue;
        }
        // Otherwise pick the merge with the smallest resulting tensor and
        // contract over every bond between that pair at once.
        let mut best: Option<(usize, usize, usize)> = None;
        for (x, y) in &bonds {
            let (i, j) = (find_part(&parts, x), find_part(&parts, y));
            let (ti, tj) = (parts[i].as_ref().unwrap(), parts[j].as_ref().unwrap());
            let shared: usize = bonds
                .iter()
                .filter(|(a, b)| {
                    let (pa, pb) = (find_part(&parts, a), find_part(&parts, b));
                    (pa, pb) == (i, j) || (pa, pb) == (j, i)
                })
                .map(|(a, _)| ti.leg_dim(a).or_else(|_| tj.leg_dim(a)).unwrap())
                .product();
            let size = ti.data().len() * tj.data().len() / (shared * shared);
            if best.is_none_or(|(_, _, s)| size < s) {
                best = Some((i, j, size));
            }
        }
        let (i, j, _) = best.unwrap();
        let between: Vec<(String, String)> = bonds
            .iter()
            .filter(|(a, b)| {
                let (pa, pb) = (find_part(&parts, a), find_part(&parts, b));
                (pa, pb) == (i, j) || (pa, pb) == (j, i)
            })
            .cloned()
            .collect();
        bonds.retain(|(a, b)| {
            let (pa, pb) = (find_part(&parts, a), find_part(&parts, b));
            !((pa, pb) == (i, j) || (pa, pb) == (j, i))
        });
        let ti = parts[i].take().unwrap();
        let tj = parts[j].take().unwrap();
        // orient every pair as (leg-of-i, leg-of-j)
        let pairs: Vec<(String, String)> = between
            .into_iter()
            .map(|(a, b)| {
                if ti.legs().contains(&a) {
                    (a, b)
                } else {
                    (b, a)
                }
            })
            .collect();
        let pair_refs: Vec<(&str, &str)> = pairs
            .iter()
            .map(|(a, b)| (a.as_str(), b.as_str()))
            .collect();
        parts[i] = Some(contract(&ti, &tj, &pair_refs)?);
    }

    let is_scalar = |t: &Tensor| t.rank() == 1 && t.legs()[0] == "scalar";
    let mut remaining = parts.into_iter().flatten();
    let mut result = remaining.next().ok_or(SchemaError::Disconnected)?;
    for part in remaining {
        if !allow_disconnected {
            return Err(SchemaError::Disconnected);
        }
        // fully-traced components reduce to scalar factors
        if is_scalar(&part) {
            result = result.scaled(part.data()[0]);
        } else if is_scalar(&result) {
            result = part.scaled(result.data()[0]);
        } else {
            result = contract(&result, &part, &[])?;
        }
    }

    // A fully contracted schema leaves the scalar slot.
    if schema.outputs.is_empty() {
        return Ok(result);
    }

    // Order outputs as declared, then fuse groups.
    let flat_order: Vec<String> = schema
        .output_refs()
        .iter()
        .map(|(n, l)| qualified(n, l))
        .collect();
    let order_refs: Vec<&str> = flat_order.iter().map(String::as_str).collect();
    let permuted = result.permuted(&order_refs)?;
    let groups: Vec<(String, usize)> = schema
        .outputs
        .iter()
        .map(|o| match o {
            OutputLeg::Single(r) => (qualified(&r.0, &r.1), 1),
            OutputLeg::Fused { fuse } => {
                let name = fuse
                    .iter()
                    .map(|(n, l)| qualified(n, l))
                    .collect::<Vec<_>>()
                    .join("|");
                (name, fuse.len())
            }
        })
        .collect();
    let group_refs: Vec<(&str, usize)> = groups.iter().map(|(n, k)| (n.as_str(), *k)).collect();
    permuted.fused(&group_refs).map_err(Into::into)
}

/// ‖W†·W − I‖_max over the input-leg space.
pub fn isometry_defect(w: &Tensor, in_legs: &[&str], out_legs: &[&str]) -> Result<f64> {
    let m = matricize(w, out_legs, in_legs)?;
    let g = m.dagger().dot(&m.data);
    Ok(max_dev_from_identity(&g))
}

/// Fit W†·W = c·I and return c; errors when the gram matrix is not
/// proportional to the identity within `tol`.
pub fn isometry_constant(w: &Tensor, in_legs: &[&str], out_legs: &[&str], tol: f64) -> Result<f64> {
    let m = matricize(w, out_legs, in_legs)?;
    let g = m.dagger().dot(&m.data);
    let n = g.nrows();
    let mean: f64 = (0..n).map(|i| g[(i, i)].re).sum::<f64>() / n as f64;
    let mut dev = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j {
                C64::new(mean, 0.0)
            } else {
                C64::new(0.0, 0.0)
            };
            dev = dev.max((g[(i, j)] - target).norm());
        }
    }
    let scale = mean.abs().max(1.0);
    if dev > tol * scale || mean <= tol {
        return Err(SchemaError::NotProportional(dev));
    }
    Ok(mean)
}

/// Rescale a composite so that W†·W = I; errors when the gram matrix is not
/// a positive multiple of the identity.
pub fn normalize_composite(
    t: &Tensor,
    in_legs: &[&str],
    out_legs: &[&str],
    tol: f64,
) -> Result<Tensor> {
    let c = isometry_constant(t, in_legs, out_legs, tol)?;
    Ok(t.scaled(C64::new(1.0 / c.sqrt(), 0.0)))
}

/// True iff a Hermitian unit-trace matrix has eigenvalue spread above 1e-6;
/// rejects inputs with Hermiticity defect above 1e-8.
pub fn nontrivial_spectrum_check(rho: &MatrixView) -> Result<bool> {
    let h = hermitian_defect(&rho.data);
    if h > 1e-8 {
        return Err(SchemaError::NonHermitian(h));
    }
    let sym = (&rho.data + &rho.data.t().mapv(|c| c.conj())).mapv(|c| c * 0.5);
    let vals = hermitian_eigenvalues(&sym)?;
    let spread = vals.last().unwrap() - vals.first().unwrap();
    Ok(spread > 1e-6)
}
