use num_complex::Complex64;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

pub const PRUNE: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Ladder {
    pub mode: usize,
    pub dagger: bool,
}

pub fn create(mode: usize) -> Ladder {
    Ladder { mode, dagger: true }
}

pub fn annihilate(mode: usize) -> Ladder {
    Ladder { mode, dagger: false }
}

impl fmt::Display for Ladder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.dagger {
            write!(f, "a+{}", self.mode)
        } else {
            write!(f, "a{}", self.mode)
        }
    }
}

/// Whether `a` belongs strictly left of `b` in normal order: creations first
/// with descending modes, then annihilations with ascending modes.
fn precedes(a: Ladder, b: Ladder) -> bool {
    match (a.dagger, b.dagger) {
        (true, false) => true,
        (false, true) => false,
        (true, true) => a.mode > b.mode,
        (false, false) => a.mode < b.mode,
    }
}

/// Expand a product of ladders into normal-ordered terms.
fn normal_order(coef: Complex64, ops: Vec<Ladder>, out: &mut BTreeMap<Vec<Ladder>, Complex64>) {
    let mut stack = vec![(coef, ops)];
    'outer: while let Some((c, mut ops)) = stack.pop() {
        for k in 0..ops.len().saturating_sub(1) {
            let (l, r) = (ops[k], ops[k + 1]);
            if l == r {
                continue 'outer;
            }
            if precedes(r, l) {
                if !l.dagger && r.dagger && l.mode == r.mode {
                    let mut contracted = ops.clone();
                    contracted.drain(k..k + 2);
                    stack.push((c, contracted));
                }
                ops.swap(k, k + 1);
                stack.push((-c, ops));
                continue 'outer;
            }
        }
        *out.entry(ops).or_insert(Complex64::new(0.0, 0.0)) += c;
    }
}

/// Linear combination of normal-ordered ladder products.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FermionSum {
    terms: BTreeMap<Vec<Ladder>, Complex64>,
}

impl FermionSum {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn identity() -> Self {
        Self::term(1.0, &[])
    }

    pub fn term(coef: impl Into<Complex64>, ops: &[Ladder]) -> Self {
        let mut s = Self::zero();
        s.add_term(coef, ops);
        s
    }

    pub fn add_term(&mut self, coef: impl Into<Complex64>, ops: &[Ladder]) {
        normal_order(coef.into(), ops.to_vec(), &mut self.terms);
        self.prune();
    }

    fn prune(&mut self) {
        self.terms.retain(|_, c| c.norm() >= PRUNE);
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[Ladder], Complex64)> {
        self.terms.iter().map(|(k, v)| (k.as_slice(), *v))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_mode(&self) -> Option<usize> {
        self.terms.keys().flat_map(|k| k.iter().map(|l| l.mode)).max()
    }

    pub fn scale(&self, s: impl Into<Complex64>) -> Self {
        let s = s.into();
        let mut out = self.clone();
        for v in out.terms.values_mut() {
            *v *= s;
        }
        out.prune();
        out
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zero();
        for (ops, c) in &self.terms {
            let rev: Vec<Ladder> = ops
                .iter()
                .rev()
                .map(|l| Ladder { mode: l.mode, dagger: !l.dagger })
                .collect();
            normal_order(c.conj(), rev, &mut out.terms);
        }
        out.prune();
        out
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.terms.values().all(|c| c.norm() < tol)
    }

    /// Action of the operator on occupation bitstring `b`.
    pub fn apply_to_basis(&self, b: u64) -> Vec<(u64, Complex64)> {
        let mut acc: BTreeMap<u64, Complex64> = BTreeMap::new();
        for (ops, c) in &self.terms {
            if let Some((sign, r)) = apply_ladders(ops, b) {
                *acc.entry(r).or_default() += c * sign;
            }
        }
        acc.into_iter().filter(|(_, v)| v.norm() >= PRUNE).collect()
    }
}

/// Apply a ladder product (rightmost first) to an occupation bitstring with
/// the sign convention |b> = a+_{p1} ... a+_{pn}|0>, p ascending.
pub fn apply_ladders(ops: &[Ladder], mut b: u64) -> Option<(f64, u64)> {
    let mut sign = 1.0;
    for op in ops.iter().rev() {
        let bit = 1u64 << op.mode;
        let occupied = b & bit != 0;
        if occupied == op.dagger {
            return None;
        }
        if (b & (bit - 1)).count_ones() % 2 == 1 {
            sign = -sign;
        }
        b ^= bit;
    }
    Some((sign, b))
}

impl Add for &FermionSum {
    type Output = FermionSum;
    fn add(self, rhs: &FermionSum) -> FermionSum {
        let mut out = self.clone();
        for (k, v) in &rhs.terms {
            *out.terms.entry(k.clone()).or_default() += v;
        }
        out.prune();
        out
    }
}

impl Sub for &FermionSum {
    type Output = FermionSum;
    fn sub(self, rhs: &FermionSum) -> FermionSum {
        self + &(-rhs)
    }
}

impl Neg for &FermionSum {
    type Output = FermionSum;
    fn neg(self) -> FermionSum {
        self.scale(-1.0)
    }
}

impl Mul for &FermionSum {
    type Output = FermionSum;
    fn mul(self, rhs: &FermionSum) -> FermionSum {
        let mut out = FermionSum::zero();
        for (a, ca) in &self.terms {
            for (b, cb) in &rhs.terms {
                let mut ops = a.clone();
                ops.extend_from_slice(b);
                normal_order(ca * cb, ops, &mut out.terms);
            }
        }
        out.prune();
        out
    }
}

impl fmt::Display for FermionSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (ops, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "({:+.6}{:+.6}i)", c.re, c.im)?;
            for l in ops {
                write!(f, " {l}")?;
            }
        }
        Ok(())
    }
}
