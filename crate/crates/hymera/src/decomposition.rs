//! Decomposition presets: which constituent family fills the vertex, edge and
//! disentangler slots, the {A,B,U,W} wiring schemas, and the default cone
//! mix. Presets ship embedded and can be overridden through
//! `HYMERA_PRESET_DIR`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::families::{self, Family, ParameterSet};
use crate::schema::{self, ContractionSchema};
use crate::tensor::Tensor;
use crate::tiling::InflationGrammar;

#[derive(Debug, Error)]
pub enum DecompositionError {
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("preset `{0}` failed to parse: {1}")]
    BadPreset(String, String),
    #[error("role `{0}` is not a constituent family letter")]
    BadRole(String),
    #[error(transparent)]
    Family(#[from] families::FamilyError),
    #[error(transparent)]
    Schema(#[from] schema::SchemaError),
    #[error(transparent)]
    Tiling(#[from] crate::tiling::TilingError),
}

pub type Result<T> = std::result::Result<T, DecompositionError>;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RoleMap {
    pub vertex: String,
    pub edge: String,
    pub disentangler: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConeMix {
    pub two_site: Vec<(String, f64)>,
    pub one_site: Vec<(String, f64)>,
}

/// Serialized decomposition preset.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecompositionSpec {
    pub name: String,
    pub schlafli: (u32, u32),
    pub grammar: String,
    pub roles: RoleMap,
    pub schemas: BTreeMap<String, ContractionSchema>,
    pub cones: ConeMix,
}

impl DecompositionSpec {
    pub fn from_json(name: &str, text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| DecompositionError::BadPreset(name.to_string(), e.to_string()))
    }
}

/// A decomposition bound to a concrete parameter draw.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub spec: DecompositionSpec,
    pub params: ParameterSet,
    bindings: BTreeMap<String, Tensor>,
}

impl Decomposition {
    pub fn bind(spec: DecompositionSpec, params: ParameterSet) -> Result<Self> {
        let mut letters: Vec<&str> = vec![
            spec.roles.vertex.as_str(),
            spec.roles.edge.as_str(),
            spec.roles.disentangler.as_str(),
        ];
        for s in spec.schemas.values() {
            for n in &s.nodes {
                if Family::from_letter(&n.role).is_some() {
                    letters.push(n.role.as_str());
                }
            }
        }
        letters.sort_unstable();
        letters.dedup();
        let mut bindings = BTreeMap::new();
        for letter in letters {
            let family = Family::from_letter(letter)
                .ok_or_else(|| DecompositionError::BadRole(letter.to_string()))?;
            bindings.insert(letter.to_string(), families::build(family, &params)?);
        }
        Ok(Self {
            spec,
            params,
            bindings,
        })
    }

    pub fn name(&self) -> &str {
        &self.spec.name
    }

    pub fn family_tensor(&self, letter: &str) -> Option<&Tensor> {
        self.bindings.get(letter)
    }

    /// Raw composite for one of the A/B/U/W slots.
    pub fn composite(&self, kind: &str) -> Result<Tensor> {
        let schema = self
            .spec
            .schemas
            .get(kind)
            .ok_or_else(|| DecompositionError::UnknownPreset(format!("schema {kind}")))?;
        Ok(schema::compose(schema, &self.bindings)?)
    }

    /// The layer isometry W, rescaled so W†W = I. Legs (c1, c2, in).
    pub fn isometry(&self, tol: f64) -> Result<Tensor> {
        let w = self.composite("W")?;
        let legs: Vec<&str> = w.legs().iter().map(String::as_str).collect();
        let out = &legs[..legs.len() - 1];
        let inp = &legs[legs.len() - 1..];
        let normalized = schema::normalize_composite(&w, inp, out, tol)?;
        normalized
            .renamed(vec!["c1", "c2", "in"])
            .map_err(|e| DecompositionError::Schema(e.into()))
    }

    /// The disentangler U, rescaled to exact unitarity. Legs (o1, o2, i1, i2).
    pub fn disentangler(&self, tol: f64) -> Result<Tensor> {
        let u = self.composite("U")?;
        let legs: Vec<&str> = u.legs().iter().map(String::as_str).collect();
        let (out, inp) = legs.split_at(2);
        let normalized = schema::normalize_composite(&u, inp, out, tol)?;
        normalized
            .renamed(vec!["o1", "o2", "i1", "i2"])
            .map_err(|e| DecompositionError::Schema(e.into()))
    }

    /// The edge tensor as a normalized two-site gate. Legs (o1, o2, i1, i2).
    pub fn edge_gate(&self, tol: f64) -> Result<Tensor> {
        let raw = self
            .bindings
            .get(&self.spec.roles.edge)
            .expect("edge bound");
        let legs: Vec<&str> = raw.legs().iter().map(String::as_str).collect();
        let (out, inp) = legs.split_at(2);
        let normalized = schema::normalize_composite(raw, inp, out, tol)?;
        normalized
            .renamed(vec!["o1", "o2", "i1", "i2"])
            .map_err(|e| DecompositionError::Schema(e.into()))
    }

    /// Resolve the tensors cone schemas may reference.
    pub fn cone_bindings(&self, tol: f64) -> Result<BTreeMap<String, Tensor>> {
        let mut map = BTreeMap::new();
        map.insert("W".to_string(), self.isometry(tol)?);
        map.insert("U".to_string(), self.disentangler(tol)?);
        map.insert("Bgate".to_string(), self.edge_gate(tol)?);
        Ok(map)
    }

    pub fn grammar(&self) -> Result<InflationGrammar> {
        load_grammar(&self.spec.grammar)
    }

    /// Scale factor of the decomposition's tiling.
    pub fn scale_factor(&self) -> Result<f64> {
        Ok(self.grammar()?.scale_factor())
    }
}

const EMBEDDED_DECOMPOSITIONS: &[(&str, &str)] = &[
    (
        "yqr-54",
        include_str!("../presets/decompositions/yqr-54.json"),
    ),
    (
        "yqt-54",
        include_str!("../presets/decompositions/yqt-54.json"),
    ),
    (
        "yqs-54",
        include_str!("../presets/decompositions/yqs-54.json"),
    ),
    (
        "qr-54",
        include_str!("../presets/decompositions/qr-54.json"),
    ),
    (
        "yqr-73",
        include_str!("../presets/decompositions/yqr-73.json"),
    ),
];

const EMBEDDED_GRAMMARS: &[(&str, &str)] = &[
    ("54", include_str!("../presets/grammars/54.json")),
    ("73", include_str!("../presets/grammars/73.json")),
];

const EMBEDDED_CONES: &[(&str, &str)] = &[
    (
        "two-site-central",
        include_str!("../presets/cones/two-site-central.json"),
    ),
    (
        "two-site-passthrough",
        include_str!("../presets/cones/two-site-passthrough.json"),
    ),
    (
        "two-site-edge",
        include_str!("../presets/cones/two-site-edge.json"),
    ),
    (
        "two-site-identity",
        include_str!("../presets/cones/two-site-identity.json"),
    ),
    (
        "one-site-first",
        include_str!("../presets/cones/one-site-first.json"),
    ),
    (
        "one-site-second",
        include_str!("../presets/cones/one-site-second.json"),
    ),
];

pub const PRESET_DIR_ENV: &str = "HYMERA_PRESET_DIR";

fn load_text(category: &str, name: &str, embedded: &[(&str, &str)]) -> Result<String> {
    if let Ok(dir) = std::env::var(PRESET_DIR_ENV) {
        let path = std::path::Path::new(&dir)
            .join(category)
            .join(format!("{name}.json"));
        if path.is_file() {
            return std::fs::read_to_string(&path)
                .map_err(|e| DecompositionError::BadPreset(name.to_string(), e.to_string()));
        }
    }
    embedded
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| text.to_string())
        .ok_or_else(|| DecompositionError::UnknownPreset(name.to_string()))
}

pub fn load_decomposition(name: &str) -> Result<DecompositionSpec> {
    let text = load_text("decompositions", name, EMBEDDED_DECOMPOSITIONS)?;
    DecompositionSpec::from_json(name, &text)
}

pub fn load_grammar(name: &str) -> Result<InflationGrammar> {
    let text = load_text("grammars", name, EMBEDDED_GRAMMARS)?;
    InflationGrammar::from_json(&text).map_err(DecompositionError::Tiling)
}

pub fn load_cone_text(name: &str) -> Result<String> {
    load_text("cones", name, EMBEDDED_CONES)
}

pub fn decomposition_names() -> Vec<&'static str> {
    EMBEDDED_DECOMPOSITIONS.iter().map(|(n, _)| *n).collect()
}

/// Bind a named preset to a parameter draw.
pub fn bind_preset(name: &str, params: ParameterSet) -> Result<Decomposition> {
    Decomposition::bind(load_decomposition(name)?, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::isometry_defect;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    #[test]
    fn presets_load_and_validate() {
        for name in decomposition_names() {
            let spec = load_decomposition(name).unwrap();
            assert_eq!(spec.name, name);
            for schema in spec.schemas.values() {
                schema.validate().unwrap();
            }
        }
    }

    #[test]
    fn a_has_q_output_legs_and_b_has_two() {
        let mut rng = StdRng::seed_from_u64(7);
        let p = ParameterSet::sample(&mut rng);
        for name in ["yqr-54", "yqt-54", "yqs-54", "qr-54", "yqr-73"] {
            let spec = load_decomposition(name).unwrap();
            let q = spec.schlafli.1 as usize;
            let d = Decomposition::bind(spec, p.clone()).unwrap();
            let a = d.composite("A").unwrap();
            assert_eq!(a.rank(), q, "{name}: A should have q output legs");
            let b = d.composite("B").unwrap();
            assert_eq!(b.rank(), 2);
            assert_eq!(b.shape(), &[4, 4]);
        }
    }

    #[test]
    fn isometries_pass_after_normalization() {
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..50 {
            let p = ParameterSet::sample(&mut rng);
            for name in decomposition_names() {
                let d = bind_preset(name, p.clone()).unwrap();
                let w = d.isometry(1e-8).unwrap();
                assert!(
                    isometry_defect(&w, &["in"], &["c1", "c2"]).unwrap() <= 1e-10,
                    "{name}: W isometry defect too large"
                );
            }
        }
    }

    #[test]
    fn unnormalized_t_isometry_defect_matches_scalar() {
        let mut rng = StdRng::seed_from_u64(13);
        let p = ParameterSet::sample(&mut rng);
        let d = bind_preset("yqt-54", p.clone()).unwrap();
        let w = d.composite("W").unwrap();
        let legs: Vec<&str> = w.legs().iter().map(String::as_str).collect();
        let defect = isometry_defect(&w, &legs[2..], &legs[..2]).unwrap();
        // one edge node in the W schema: defect = |c^1 - 1|
        let c = crate::families::t_scalar_constant(&p).unwrap();
        assert!((defect - (c - 1.0).abs()).abs() < 1e-10);
        let normalized = d.isometry(1e-8).unwrap();
        assert!(isometry_defect(&normalized, &["in"], &["c1", "c2"]).unwrap() <= 1e-10);
    }

    #[test]
    fn unknown_preset_errors() {
        assert!(matches!(
            load_decomposition("nope"),
            Err(DecompositionError::UnknownPreset(_))
        ));
    }

    #[test]
    fn a73_ring_is_connected_composite() {
        let mut rng = StdRng::seed_from_u64(17);
        let p = ParameterSet::sample(&mut rng);
        let d = bind_preset("yqr-73", p).unwrap();
        let a = d.composite("A").unwrap();
        assert_eq!(a.shape(), &[4, 4, 4]);
    }
}
