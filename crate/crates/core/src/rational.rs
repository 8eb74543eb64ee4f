//! Rational maps in partial-fraction form.
//!
//! A [`RationalMap`] is a sum of polynomial blocks and pole terms,
//!
//! ```text
//!   f(z) = sum_i  P_i((z - c_i)/rho_i)  +  sum_p sum_k  a_{p,k} (s_p/(z - p))^k
//! ```
//!
//! Coefficients are stored against the scaled variables `(z - c)/rho` and
//! `s_p/(z - p)`. The scaling keeps every stored coefficient at the size of
//! the function values it produces on the certified region, which is what
//! keeps evaluation stable once pole orders grow into the hundreds. A block
//! with `center = 0, scale = 1` is a plain monomial-basis polynomial.

use crate::error::{CoreError, Result};
use crate::C;
use serde::{Deserialize, Serialize};

/// Polynomial in the scaled variable `(z - center)/scale`, constant-first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyBlock {
    pub center: C,
    pub scale: f64,
    pub coeffs: Vec<C>,
}

impl PolyBlock {
    pub fn eval(&self, z: C) -> C {
        let w = (z - self.center) / self.scale;
        let mut acc = C::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            acc = acc * w + c;
        }
        acc
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }
}

/// Terms `sum_k coeffs[k-1] * (scale/(z - location))^k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoleTerm {
    pub location: C,
    pub scale: f64,
    pub coeffs: Vec<C>,
}

impl PoleTerm {
    pub fn eval(&self, z: C) -> C {
        let q = C::new(self.scale, 0.0) / (z - self.location);
        let mut acc = C::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            acc = (acc + c) * q;
        }
        acc
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    /// Largest coefficient magnitude; a pole with all-zero coefficients is inert.
    pub fn max_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

/// Value of a map into the Riemann sphere.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Value {
    Finite(C),
    Infinity,
}

impl Value {
    pub fn finite(self) -> Option<C> {
        match self {
            Value::Finite(z) => Some(z),
            Value::Infinity => None,
        }
    }
}

/// A rational function as polynomial blocks plus pole terms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
pub struct RationalMap {
    pub blocks: Vec<PolyBlock>,
    pub poles: Vec<PoleTerm>,
}

/// Relative radius around a pole treated as the pole's cell: evaluation there
/// returns the infinity marker.
const POLE_EPS: f64 = 1e-12;

impl RationalMap {
    pub fn constant(c: C) -> Self {
        RationalMap {
            blocks: vec![PolyBlock {
                center: C::new(0.0, 0.0),
                scale: 1.0,
                coeffs: vec![c],
            }],
            poles: Vec::new(),
        }
    }

    pub fn translation(c: C) -> Self {
        RationalMap {
            blocks: vec![PolyBlock {
                center: C::new(0.0, 0.0),
                scale: 1.0,
                coeffs: vec![c, C::new(1.0, 0.0)],
            }],
            poles: Vec::new(),
        }
    }

    /// Plain polynomial from monomial coefficients, constant-first.
    pub fn from_poly(coeffs: Vec<C>) -> Self {
        RationalMap {
            blocks: vec![PolyBlock {
                center: C::new(0.0, 0.0),
                scale: 1.0,
                coeffs,
            }],
            poles: Vec::new(),
        }
    }

    pub fn is_constant(&self) -> Option<C> {
        if self.poles.iter().any(|p| p.max_coeff() > 0.0) {
            return None;
        }
        let mut value = C::new(0.0, 0.0);
        for b in &self.blocks {
            if b.coeffs.iter().skip(1).any(|c| c.norm() > 0.0) {
                return None;
            }
            if let Some(c0) = b.coeffs.first() {
                value += c0;
            }
        }
        Some(value)
    }

    /// Poles that actually carry mass (some nonzero coefficient).
    pub fn active_poles(&self) -> Vec<&PoleTerm> {
        self.poles.iter().filter(|p| p.max_coeff() > 0.0).collect()
    }

    /// Total polynomial degree metadata (max over blocks).
    pub fn poly_degree(&self) -> usize {
        self.blocks.iter().map(|b| b.degree()).max().unwrap_or(0)
    }

    /// Max pole order metadata.
    pub fn pole_order(&self) -> usize {
        self.poles.iter().map(|p| p.order()).max().unwrap_or(0)
    }

    /// Evaluate at `z`. Returns [`Value::Infinity`] within an ulp-scale radius
    /// of a pole location or on floating-point overflow.
    pub fn eval(&self, z: C) -> Value {
        for p in &self.poles {
            if p.max_coeff() > 0.0 {
                let d = (z - p.location).norm();
                if d <= POLE_EPS * (1.0 + p.location.norm()) {
                    return Value::Infinity;
                }
            }
        }
        let mut acc = C::new(0.0, 0.0);
        for b in &self.blocks {
            acc += b.eval(z);
        }
        for p in &self.poles {
            acc += p.eval(z);
        }
        if acc.re.is_finite() && acc.im.is_finite() {
            Value::Finite(acc)
        } else {
            Value::Infinity
        }
    }

    /// Orbit `[z, f(z), ..., f^n(z)]`, truncated at the first infinity.
    /// The boolean is true when the orbit hit a pre-pole before completing.
    pub fn iterate(&self, z: C, n: usize) -> (Vec<Value>, bool) {
        let mut orbit = Vec::with_capacity(n + 1);
        orbit.push(Value::Finite(z));
        let mut cur = z;
        for _ in 0..n {
            match self.eval(cur) {
                Value::Finite(w) => {
                    orbit.push(Value::Finite(w));
                    cur = w;
                }
                Value::Infinity => {
                    orbit.push(Value::Infinity);
                    return (orbit, true);
                }
            }
        }
        (orbit, false)
    }

    /// `f^n(z)` if the whole orbit is finite.
    pub fn iterate_value(&self, z: C, n: usize) -> Value {
        let mut cur = z;
        for _ in 0..n {
            match self.eval(cur) {
                Value::Finite(w) => cur = w,
                Value::Infinity => return Value::Infinity,
            }
        }
        Value::Finite(cur)
    }

    /// Structural sum: concatenates blocks and pole terms, merging pole terms
    /// at bit-identical locations.
    pub fn add(&self, other: &RationalMap) -> RationalMap {
        let mut blocks = self.blocks.clone();
        blocks.extend(other.blocks.iter().cloned());
        let mut poles = self.poles.clone();
        for p in &other.poles {
            if let Some(existing) = poles.iter_mut().find(|q| {
                q.location == p.location && q.scale == p.scale
            }) {
                if existing.coeffs.len() < p.coeffs.len() {
                    existing.coeffs.resize(p.coeffs.len(), C::new(0.0, 0.0));
                }
                for (k, c) in p.coeffs.iter().enumerate() {
                    existing.coeffs[k] += c;
                }
            } else {
                poles.push(p.clone());
            }
        }
        RationalMap { blocks, poles }
    }

    /// Structural difference `self - other`: shared blocks and pole terms
    /// cancel exactly, which keeps the difference evaluable near shared poles.
    pub fn sub_structured(&self, other: &RationalMap) -> RationalMap {
        let mut blocks: Vec<PolyBlock> = Vec::new();
        let mut other_blocks: Vec<&PolyBlock> = other.blocks.iter().collect();
        for b in &self.blocks {
            if let Some(pos) = other_blocks.iter().position(|ob| *ob == b) {
                other_blocks.swap_remove(pos);
            } else {
                blocks.push(b.clone());
            }
        }
        for ob in other_blocks {
            let mut neg = ob.clone();
            for c in &mut neg.coeffs {
                *c = -*c;
            }
            blocks.push(neg);
        }

        let mut poles: Vec<PoleTerm> = Vec::new();
        let mut other_poles: Vec<&PoleTerm> = other.poles.iter().collect();
        for p in &self.poles {
            if let Some(pos) = other_poles.iter().position(|op| *op == p) {
                other_poles.swap_remove(pos);
            } else {
                poles.push(p.clone());
            }
        }
        for op in other_poles {
            let mut neg = op.clone();
            for c in &mut neg.coeffs {
                *c = -*c;
            }
            poles.push(neg);
        }
        RationalMap { blocks, poles }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let m: RationalMap = serde_json::from_str(s)?;
        for p in &m.poles {
            if !(p.scale > 0.0) {
                return Err(CoreError::InvalidInput(
                    "pole term scale must be positive".into(),
                ));
            }
        }
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_map_evaluates() {
        // f_0 = -3 everywhere.
        let f = RationalMap::constant(C::new(-3.0, 0.0));
        let v = f.eval(C::new(17.0, 5.0)).finite().unwrap();
        assert_eq!(v, C::new(-3.0, 0.0));
    }

    #[test]
    fn translation_eval() {
        let f = RationalMap::translation(C::new(3.0, 0.0));
        assert_eq!(
            f.eval(C::new(6.0, 0.0)).finite().unwrap(),
            C::new(9.0, 0.0)
        );
    }

    #[test]
    fn pole_marker() {
        // f(z) = 1/(z-1): infinity marker at the pole.
        let f = RationalMap {
            blocks: vec![],
            poles: vec![PoleTerm {
                location: C::new(1.0, 0.0),
                scale: 1.0,
                coeffs: vec![C::new(1.0, 0.0)],
            }],
        };
        assert_eq!(f.eval(C::new(1.0, 0.0)), Value::Infinity);
        let v = f.eval(C::new(2.0, 0.0)).finite().unwrap();
        assert!((v - C::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn orbit_constant() {
        let f = RationalMap::constant(C::new(-3.0, 0.0));
        let (orbit, prepole) = f.iterate(C::new(5.0, 0.0), 3);
        assert!(!prepole);
        let vals: Vec<f64> = orbit.iter().map(|v| v.finite().unwrap().re).collect();
        assert_eq!(vals, vec![5.0, -3.0, -3.0, -3.0]);
    }

    #[test]
    fn orbit_translation() {
        let f = RationalMap::translation(C::new(3.0, 0.0));
        let (orbit, _) = f.iterate(C::new(0.0, 0.0), 4);
        let vals: Vec<f64> = orbit.iter().map(|v| v.finite().unwrap().re).collect();
        assert_eq!(vals, vec![0.0, 3.0, 6.0, 9.0, 12.0]);
    }

    #[test]
    fn orbit_prepole() {
        // f(z) = 1/z at z=0: flagged pre-pole at step 1.
        let f = RationalMap {
            blocks: vec![],
            poles: vec![PoleTerm {
                location: C::new(0.0, 0.0),
                scale: 1.0,
                coeffs: vec![C::new(1.0, 0.0)],
            }],
        };
        let (orbit, prepole) = f.iterate(C::new(0.0, 0.0), 3);
        assert!(prepole);
        assert_eq!(orbit.len(), 2);
        assert_eq!(orbit[1], Value::Infinity);
    }

    #[test]
    fn json_roundtrip_exact() {
        let f = RationalMap {
            blocks: vec![PolyBlock {
                center: C::new(-1.5, 0.25),
                scale: 3.0,
                coeffs: vec![C::new(0.1234567890123456, -7.0), C::new(1e-17, 2.5)],
            }],
            poles: vec![PoleTerm {
                location: C::new(0.577215664901532, -0.3),
                scale: 0.0078125,
                coeffs: vec![C::new(-3.14159e10, 1.0)],
            }],
        };
        let s = f.to_json().unwrap();
        let back = RationalMap::from_json(&s).unwrap();
        assert_eq!(f, back, "decimal round-trip must be bit exact");
    }

    #[test]
    fn structured_difference_cancels_shared_poles() {
        let shared = PoleTerm {
            location: C::new(0.5, 0.5),
            scale: 0.01,
            coeffs: vec![C::new(4.0, 0.0)],
        };
        let f = RationalMap {
            blocks: vec![PolyBlock {
                center: C::new(0.0, 0.0),
                scale: 1.0,
                coeffs: vec![C::new(1.0, 0.0)],
            }],
            poles: vec![shared.clone()],
        };
        let g = RationalMap {
            blocks: vec![],
            poles: vec![shared.clone()],
        };
        let d = f.sub_structured(&g);
        assert!(d.poles.is_empty());
        // Evaluable arbitrarily close to the shared pole.
        let z = shared.location + C::new(1e-300, 0.0);
        assert_eq!(d.eval(z).finite().unwrap(), C::new(1.0, 0.0));
    }
}
