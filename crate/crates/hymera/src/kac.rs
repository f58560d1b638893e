//! Minimal-model Kac table: exact rational conformal weights
//! h_{r,s} = ((p'r − q's)² − (p'−q')²) / (4 p'q') and the spinless scaling
//! dimensions Δ = 2h used as CFT targets.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum KacError {
    #[error("minimal model requires coprime p' > q' >= 2 (got ({0},{1}))")]
    BadModel(u32, u32),
    #[error("(r,s)=({0},{1}) outside the Kac table of M({2},{3})")]
    OutOfRange(u32, u32, u32, u32),
}

pub type Result<T> = std::result::Result<T, KacError>;

/// Exact rational with positive denominator, always reduced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rational {
    pub num: i64,
    pub den: i64,
}

impl Rational {
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0);
        let g = gcd(num.unsigned_abs(), den.unsigned_abs()) as i64;
        let sign = if den < 0 { -1 } else { 1 };
        Self {
            num: sign * num / g,
            den: sign * den / g,
        }
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn double(self) -> Self {
        Self::new(2 * self.num, self.den)
    }
}

impl std::fmt::Display for Rational {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.max(1)
}

fn check_model(p: u32, q: u32) -> Result<()> {
    if q < 2 || p <= q || gcd(p as u64, q as u64) != 1 {
        return Err(KacError::BadModel(p, q));
    }
    Ok(())
}

/// Exact conformal weight h_{r,s} of the minimal model M(p',q').
pub fn kac_dimension(pq: (u32, u32), rs: (u32, u32)) -> Result<Rational> {
    let (p, q) = pq;
    let (r, s) = rs;
    check_model(p, q)?;
    if r < 1 || r >= q || s < 1 || s >= p {
        return Err(KacError::OutOfRange(r, s, p, q));
    }
    let pr_qs = p as i64 * r as i64 - q as i64 * s as i64;
    let diff = p as i64 - q as i64;
    Ok(Rational::new(
        pr_qs * pr_qs - diff * diff,
        4 * p as i64 * q as i64,
    ))
}

/// One Kac-table entry with its spinless scaling dimension Δ = 2h.
#[derive(Debug, Clone, Serialize)]
pub struct KacEntry {
    pub r: u32,
    pub s: u32,
    pub h: Rational,
    pub delta: Rational,
}

/// The full Kac table of a minimal model M(p',q').
#[derive(Debug, Clone, Serialize)]
pub struct KacTable {
    pub p: u32,
    pub q: u32,
    pub entries: Vec<KacEntry>,
}

impl KacTable {
    pub fn new(p: u32, q: u32) -> Result<Self> {
        check_model(p, q)?;
        let mut entries = Vec::new();
        for r in 1..q {
            for s in 1..p {
                let h = kac_dimension((p, q), (r, s))?;
                entries.push(KacEntry {
                    r,
                    s,
                    h,
                    delta: h.double(),
                });
            }
        }
        Ok(Self { p, q, entries })
    }

    pub fn entry(&self, r: u32, s: u32) -> Option<&KacEntry> {
        self.entries.iter().find(|e| e.r == r && e.s == s)
    }

    /// Central charge c = 1 − 6(p−q)²/(pq) as an exact rational.
    pub fn central_charge(&self) -> Rational {
        let diff = self.p as i64 - self.q as i64;
        Rational::new(
            self.p as i64 * self.q as i64 - 6 * diff * diff,
            self.p as i64 * self.q as i64,
        )
    }
}

/// Ising model M(4,3).
pub fn ising() -> KacTable {
    KacTable::new(4, 3).expect("ising")
}

/// Tricritical Ising model M(5,4).
pub fn tricritical_ising() -> KacTable {
    KacTable::new(5, 4).expect("tricritical")
}

/// Three-state Potts model M(6,5).
pub fn three_state_potts() -> KacTable {
    KacTable::new(6, 5).expect("potts")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ising_weights() {
        let h = kac_dimension((4, 3), (2, 2)).unwrap();
        assert_eq!(h, Rational::new(1, 16));
        assert_eq!(h.double(), Rational::new(1, 8));
        let h = kac_dimension((4, 3), (2, 1)).unwrap();
        assert_eq!(h, Rational::new(1, 2));
        assert_eq!(h.double(), Rational::new(1, 1));
    }

    #[test]
    fn identity_has_zero_weight() {
        for (p, q) in [(4, 3), (5, 4), (6, 5), (7, 2)] {
            assert_eq!(kac_dimension((p, q), (1, 1)).unwrap(), Rational::new(0, 1));
        }
    }

    #[test]
    fn known_tricritical_and_potts_values() {
        assert_eq!(kac_dimension((5, 4), (2, 2)).unwrap(), Rational::new(3, 80));
        assert_eq!(kac_dimension((5, 4), (2, 1)).unwrap(), Rational::new(7, 16));
        assert_eq!(kac_dimension((6, 5), (3, 3)).unwrap(), Rational::new(1, 15));
        assert_eq!(kac_dimension((6, 5), (2, 1)).unwrap(), Rational::new(2, 5));
    }

    #[test]
    fn kac_symmetry_is_exact() {
        for table in [ising(), tricritical_ising(), three_state_potts()] {
            for e in &table.entries {
                let mirror =
                    kac_dimension((table.p, table.q), (table.q - e.r, table.p - e.s)).unwrap();
                assert_eq!(e.h, mirror);
            }
        }
    }

    #[test]
    fn central_charges() {
        assert_eq!(ising().central_charge(), Rational::new(1, 2));
        assert_eq!(tricritical_ising().central_charge(), Rational::new(7, 10));
        assert_eq!(three_state_potts().central_charge(), Rational::new(4, 5));
    }

    #[test]
    fn rejects_bad_models_and_ranges() {
        assert!(matches!(
            kac_dimension((4, 2), (1, 1)),
            Err(KacError::BadModel(4, 2))
        ));
        assert!(matches!(
            kac_dimension((3, 4), (1, 1)),
            Err(KacError::BadModel(3, 4))
        ));
        assert!(matches!(
            kac_dimension((4, 3), (3, 1)),
            Err(KacError::OutOfRange(3, 1, 4, 3))
        ));
        assert!(matches!(
            kac_dimension((4, 3), (1, 4)),
            Err(KacError::OutOfRange(1, 4, 4, 3))
        ));
    }
}
