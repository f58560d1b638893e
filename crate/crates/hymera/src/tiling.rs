//! Vertex-inflation engine for {p,q} hyperbolic tessellations: substitution
//! rewriting over the alphabet {a,b}, inflation matrices and scale factors,
//! deflation parsing, and quasiperiodic coupling sequences.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TilingError {
    #[error("grammar rules must cover letters `a` and `b` with nonempty words over {{a,b}}")]
    BadRules,
    #[error("inflation matrix is not primitive")]
    NonPrimitive,
    #[error("word is not an inflation image (stuck at position {0})")]
    Unparseable(usize),
    #[error("couplings require J_b > J_a > 0 (got J_a={0}, J_b={1})")]
    BadCouplings(f64, f64),
    #[error("word layer is already 0")]
    AtBaseLayer,
}

pub type Result<T> = std::result::Result<T, TilingError>;

/// Substitution rules over {a,b} with the induced letter-count matrix.
///
/// `matrix[x][y]` counts occurrences of letter x in the image of letter y
/// (x, y indexed a=0, b=1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InflationGrammar {
    rules: BTreeMap<char, String>,
    matrix: [[u64; 2]; 2],
    schlafli: (u32, u32),
}

#[derive(Debug, Serialize, Deserialize)]
struct GrammarFile {
    p: u32,
    q: u32,
    rules: BTreeMap<char, String>,
}

impl InflationGrammar {
    pub fn new(p: u32, q: u32, rule_a: &str, rule_b: &str) -> Result<Self> {
        let rules: BTreeMap<char, String> = [('a', rule_a.to_string()), ('b', rule_b.to_string())]
            .into_iter()
            .collect();
        if rule_a.is_empty()
            || rule_b.is_empty()
            || rules
                .values()
                .any(|w| w.chars().any(|c| c != 'a' && c != 'b'))
        {
            return Err(TilingError::BadRules);
        }
        let count = |w: &str, c: char| w.chars().filter(|&x| x == c).count() as u64;
        let matrix = [
            [count(rule_a, 'a'), count(rule_b, 'a')],
            [count(rule_a, 'b'), count(rule_b, 'b')],
        ];
        let g = Self {
            rules,
            matrix,
            schlafli: (p, q),
        };
        if !g.is_primitive() {
            return Err(TilingError::NonPrimitive);
        }
        Ok(g)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: GrammarFile = serde_json::from_str(text).map_err(|_| TilingError::BadRules)?;
        let a = f.rules.get(&'a').ok_or(TilingError::BadRules)?.clone();
        let b = f.rules.get(&'b').ok_or(TilingError::BadRules)?.clone();
        Self::new(f.p, f.q, &a, &b)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&GrammarFile {
            p: self.schlafli.0,
            q: self.schlafli.1,
            rules: self.rules.clone(),
        })
        .expect("grammar json")
    }

    pub fn rule(&self, letter: char) -> &str {
        &self.rules[&letter]
    }

    pub fn matrix(&self) -> [[u64; 2]; 2] {
        self.matrix
    }

    pub fn schlafli(&self) -> (u32, u32) {
        self.schlafli
    }

    /// Some power of the count matrix is strictly positive.
    fn is_primitive(&self) -> bool {
        let m = self.matrix;
        let mut p = m;
        for _ in 0..4 {
            if p.iter().flatten().all(|&x| x > 0) {
                return true;
            }
            p = mat_mul(p, m);
        }
        false
    }

    /// Perron–Frobenius eigenvalue of the count matrix.
    pub fn scale_factor(&self) -> f64 {
        let m = self.matrix;
        let (a, b, c, d) = (
            m[0][0] as f64,
            m[0][1] as f64,
            m[1][0] as f64,
            m[1][1] as f64,
        );
        let tr = a + d;
        let disc = (a - d) * (a - d) + 4.0 * b * c;
        (tr + disc.sqrt()) / 2.0
    }

    /// matrixⁿ applied to a letter-count column vector, exact.
    pub fn count_power(&self, n: u32, seed_counts: [u128; 2]) -> [u128; 2] {
        let mut v = seed_counts;
        for _ in 0..n {
            let m = self.matrix;
            v = [
                m[0][0] as u128 * v[0] + m[0][1] as u128 * v[1],
                m[1][0] as u128 * v[0] + m[1][1] as u128 * v[1],
            ];
        }
        v
    }
}

fn mat_mul(x: [[u64; 2]; 2], y: [[u64; 2]; 2]) -> [[u64; 2]; 2] {
    let mut out = [[0u64; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = x[i][0].saturating_mul(y[0][j]) + x[i][1].saturating_mul(y[1][j]);
        }
    }
    out
}

/// A boundary letter sequence at a given inflation depth.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryWord {
    pub letters: String,
    pub layer: u32,
}

impl BoundaryWord {
    pub fn seed(letters: &str) -> Self {
        Self {
            letters: letters.to_string(),
            layer: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn counts(&self) -> [u128; 2] {
        let a = self.letters.chars().filter(|&c| c == 'a').count() as u128;
        [a, self.letters.len() as u128 - a]
    }
}

/// Replace each letter by its rule image; layer increments.
pub fn inflate(w: &BoundaryWord, g: &InflationGrammar) -> BoundaryWord {
    let mut out = String::with_capacity(w.letters.len() * 4);
    for c in w.letters.chars() {
        out.push_str(g.rule(c));
    }
    BoundaryWord {
        letters: out,
        layer: w.layer + 1,
    }
}

/// Invert one inflation step.
///
/// Parsing is leftmost-longest with backtracking, so nearly-prefix-free rule
/// sets like abaab/ab parse deterministically; errors when the word is not in
/// the image of [`inflate`].
pub fn deflate(w: &BoundaryWord, g: &InflationGrammar) -> Result<BoundaryWord> {
    // candidate images, longest first
    let mut images: Vec<(char, &str)> = vec![('a', g.rule('a')), ('b', g.rule('b'))];
    images.sort_by_key(|(_, w)| std::cmp::Reverse(w.len()));
    let s = w.letters.as_bytes();
    let mut out = String::new();
    // stack of (position, image choice index) for backtracking
    let mut stack: Vec<(usize, usize)> = vec![(0, 0)];
    let mut deepest = 0usize;
    loop {
        let &(pos, choice) = stack.last().unwrap();
        if pos == s.len() {
            stack.pop();
            break;
        }
        deepest = deepest.max(pos);
        if choice >= images.len() {
            // exhausted alternatives here: backtrack
            stack.pop();
            out.pop();
            match stack.last_mut() {
                Some(top) => top.1 += 1,
                None => return Err(TilingError::Unparseable(deepest)),
            }
            continue;
        }
        let (letter, image) = images[choice];
        if s[pos..].starts_with(image.as_bytes()) {
            out.push(letter);
            stack.push((pos + image.len(), 0));
        } else {
            stack.last_mut().unwrap().1 += 1;
        }
    }
    if w.layer == 0 {
        return Err(TilingError::AtBaseLayer);
    }
    Ok(BoundaryWord {
        letters: out,
        layer: w.layer - 1,
    })
}

/// Quasiperiodic nearest-neighbour couplings over a boundary word: letter a
/// carries J_a, letter b carries J_b, with J_b > J_a > 0.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingSequence {
    pub word: BoundaryWord,
    pub j_a: f64,
    pub j_b: f64,
}

impl CouplingSequence {
    pub fn new(word: BoundaryWord, j_a: f64, j_b: f64) -> Result<Self> {
        if !(j_b > j_a && j_a > 0.0) {
            return Err(TilingError::BadCouplings(j_a, j_b));
        }
        Ok(Self { word, j_a, j_b })
    }

    /// One coupling per letter.
    pub fn couplings(&self) -> Vec<f64> {
        self.word
            .letters
            .chars()
            .map(|c| if c == 'a' { self.j_a } else { self.j_b })
            .collect()
    }
}

/// Renormalize couplings one layer toward the centre: the word deflates and
/// each deflated letter receives an effective coupling through `map`
/// (defaulting to the identity relabeling J_a'=J_a, J_b'=J_b when `None`).
pub fn renormalize_couplings(
    c: &CouplingSequence,
    g: &InflationGrammar,
    map: Option<&dyn Fn(f64, f64) -> (f64, f64)>,
) -> Result<CouplingSequence> {
    let deflated = deflate(&c.word, g)?;
    let (ja, jb) = match map {
        Some(f) => f(c.j_a, c.j_b),
        None => (c.j_a, c.j_b),
    };
    CouplingSequence::new(deflated, ja, jb)
}

/// Built-in {5,4} rules a→abaab, b→ab.
pub fn grammar_54() -> InflationGrammar {
    InflationGrammar::new(5, 4, "abaab", "ab").expect("{5,4} grammar")
}

/// Built-in {7,3} rules a→aba, b→ab with count matrix rows (2,1) and (1,1).
pub fn grammar_73() -> InflationGrammar {
    InflationGrammar::new(7, 3, "aba", "ab").expect("{7,3} grammar")
}
