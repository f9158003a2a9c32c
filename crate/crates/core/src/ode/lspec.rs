//! Level functions `L(x, y)` for L-ODEs and their jump sets.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, ToPrimitive};

use super::{OdeError, Result};
use crate::numeric::{self, Int};

type Level = dyn Fn(&Int, &[Int]) -> Int + Send + Sync;
type Enumerator = dyn Fn(u64, &[Int]) -> Option<Int> + Send + Sync;

/// Points checked against a scan before an enumerator is trusted.
const VALIDATION_WINDOW: u64 = 32;

/// Largest `x` for which a jump set is computed by scanning.
pub const SCAN_LIMIT: u64 = 1 << 24;

/// A level function with an optional enumerator of its jump points,
/// `alpha(j)` being the `j`-th point `i` with `L(i+1) != L(i)`.
#[derive(Clone)]
pub struct LSpec {
    name: String,
    level: Arc<Level>,
    enumerator: Option<Arc<Enumerator>>,
}

impl fmt::Debug for LSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LSpec")
            .field("name", &self.name)
            .field("enumerated", &self.enumerator.is_some())
            .finish()
    }
}

impl LSpec {
    pub fn new<L>(name: impl Into<String>, level: L) -> LSpec
    where
        L: Fn(&Int, &[Int]) -> Int + Send + Sync + 'static,
    {
        LSpec { name: name.into(), level: Arc::new(level), enumerator: None }
    }

    /// Attach a jump enumerator; `None` from it ends the jump set.
    pub fn with_enumerator<E>(mut self, enumerator: E) -> LSpec
    where
        E: Fn(u64, &[Int]) -> Option<Int> + Send + Sync + 'static,
    {
        self.enumerator = Some(Arc::new(enumerator));
        self
    }

    /// `L(x) = len(x)`, jumping at `2^j - 1`.
    pub fn length() -> LSpec {
        LSpec::new("len", |x, _| numeric::length_int(x)).with_enumerator(|j, _| Some(numeric::all_ones(j)))
    }

    /// `L(x) = len(x)^2`; same jump points as `len`.
    pub fn length_squared() -> LSpec {
        LSpec::new("len_sq", |x, _| {
            let l = numeric::length_int(x);
            &l * &l
        })
        .with_enumerator(|j, _| Some(numeric::all_ones(j)))
    }

    /// `L(x) = floor(sqrt(x))`, without an enumerator; jump sets are scanned.
    pub fn isqrt() -> LSpec {
        LSpec::new("isqrt", |x, _| if x.is_negative() { Int::default() } else { x.sqrt() })
    }

    /// A constant level, with an empty jump set.
    pub fn constant(name: impl Into<String>) -> LSpec {
        LSpec::new(name, |_, _| Int::one()).with_enumerator(|_, _| None)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn has_enumerator(&self) -> bool {
        self.enumerator.is_some()
    }

    pub fn level(&self, x: &Int, y: &[Int]) -> Int {
        (self.level)(x, y)
    }

    /// `L(x+1) - L(x)`.
    pub fn delta(&self, x: &Int, y: &[Int]) -> Int {
        self.level(&(x + 1), y) - self.level(x, y)
    }

    pub fn alpha(&self, j: u64, y: &[Int]) -> Option<Int> {
        self.enumerator.as_ref().and_then(|e| e(j, y))
    }

    /// Jump points below `x`, found by scanning `0..x`.
    pub fn scan(&self, x: u64, y: &[Int]) -> Vec<Int> {
        let mut out = Vec::new();
        let mut prev = self.level(&Int::default(), y);
        for i in 0..x {
            let next = self.level(&Int::from(i + 1), y);
            if next != prev {
                out.push(Int::from(i));
            }
            prev = next;
        }
        out
    }

    /// Compare the enumerator with a scan on the first points.
    pub fn validate(&self, x: &Int, y: &[Int]) -> Result<()> {
        if self.enumerator.is_none() {
            return Ok(());
        }
        let window = x.to_u64().unwrap_or(u64::MAX).min(VALIDATION_WINDOW);
        let scanned = self.scan(window, y);
        let bound = Int::from(window);
        let enumerated = self.enumerate_below(&bound, y)?;
        if scanned != enumerated {
            let point = scanned
                .iter()
                .zip(&enumerated)
                .find(|(a, b)| a != b)
                .map(|(a, _)| a.clone())
                .or_else(|| scanned.get(enumerated.len()).cloned())
                .or_else(|| enumerated.get(scanned.len()).cloned())
                .and_then(|p| p.to_u64())
                .unwrap_or(window);
            return Err(OdeError::EnumeratorMismatch { spec: self.name.clone(), point });
        }
        Ok(())
    }

    fn enumerate_below(&self, x: &Int, y: &[Int]) -> Result<Vec<Int>> {
        let mut out: Vec<Int> = Vec::new();
        for j in 0.. {
            let Some(a) = self.alpha(j, y) else { break };
            if &a >= x {
                break;
            }
            if out.last().is_some_and(|prev| prev >= &a) || a.is_negative() {
                let point = a.to_u64().unwrap_or(0);
                return Err(OdeError::EnumeratorMismatch { spec: self.name.clone(), point });
            }
            out.push(a);
        }
        Ok(out)
    }

    /// `{0 <= i < x : L(i+1, y) != L(i, y)}` in increasing order.
    pub fn jump_set(&self, x: &Int, y: &[Int]) -> Result<Vec<Int>> {
        if self.enumerator.is_some() {
            self.validate(x, y)?;
            return self.enumerate_below(x, y);
        }
        match x.to_u64().filter(|&v| v <= SCAN_LIMIT) {
            Some(v) => Ok(self.scan(v, y)),
            None if x.is_negative() => Ok(Vec::new()),
            None => Err(OdeError::ScanTooLarge { spec: self.name.clone(), x: x.clone() }),
        }
    }
}

/// Named level functions available to `wrt L=NAME`.
#[derive(Clone, Debug)]
pub struct LSpecRegistry {
    specs: HashMap<String, LSpec>,
}

impl Default for LSpecRegistry {
    fn default() -> Self {
        Self::standard()
    }
}

impl LSpecRegistry {
    pub fn empty() -> Self {
        LSpecRegistry { specs: HashMap::new() }
    }

    /// `len`, `len_sq` and `isqrt`.
    pub fn standard() -> Self {
        let mut reg = Self::empty();
        for spec in [LSpec::length(), LSpec::length_squared(), LSpec::isqrt()] {
            reg.insert(spec);
        }
        reg
    }

    pub fn insert(&mut self, spec: LSpec) {
        self.specs.insert(spec.name.clone(), spec);
    }

    pub fn get(&self, name: &str) -> Result<&LSpec> {
        self.specs.get(name).ok_or_else(|| OdeError::UnknownLSpec(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.specs.keys().map(String::as_str)
    }
}


#[cfg(test)]
mod tests {
    use super::*;

    fn ints(v: &[i64]) -> Vec<Int> {
        v.iter().map(|&x| Int::from(x)).collect()
    }

    #[test]
    fn length_jumps() {
        let len = LSpec::length();
        assert_eq!(len.jump_set(&Int::from(5), &[]).unwrap(), ints(&[0, 1, 3]));
        assert_eq!(len.scan(5, &[]), ints(&[0, 1, 3]));
        assert_eq!(len.jump_set(&Int::from(0), &[]).unwrap(), ints(&[]));
        let big = Int::one() << 100u32;
        assert_eq!(len.jump_set(&big, &[]).unwrap().len(), 101);
    }

    #[test]
    fn constant_level_has_no_jumps() {
        assert!(LSpec::constant("one").jump_set(&Int::from(100), &[]).unwrap().is_empty());
    }

    #[test]
    fn scanned_spec_without_enumerator() {
        let sq = LSpec::isqrt();
        assert_eq!(sq.jump_set(&Int::from(20), &[]).unwrap(), ints(&[0, 3, 8, 15]));
        assert!(matches!(
            sq.jump_set(&(Int::one() << 40u32), &[]),
            Err(OdeError::ScanTooLarge { .. })
        ));
    }

    #[test]
    fn wrong_enumerator_is_rejected() {
        let bad = LSpec::new("bad", |x, _| numeric::length_int(x)).with_enumerator(|j, _| Some(Int::from(2 * j)));
        assert!(matches!(
            bad.jump_set(&Int::from(10), &[]),
            Err(OdeError::EnumeratorMismatch { point: 1, .. })
        ));
        let short = LSpec::new("short", |x, _| numeric::length_int(x))
            .with_enumerator(|j, _| (j < 2).then(|| numeric::all_ones(j)));
        assert!(matches!(
            short.jump_set(&Int::from(10), &[]),
            Err(OdeError::EnumeratorMismatch { point: 3, .. })
        ));
    }
}
