//! Sparse Pauli-string algebra.
//!
//! A [`PauliString`] stores its X and Z parts as bitmasks (Y = iXZ), so products,
//! commutation tests and hashing are word operations. A [`QubitOperator`] is an
//! ordered map from strings to complex coefficients.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use smallvec::SmallVec;
use thiserror::Error;

type Words = SmallVec<[u64; 2]>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    fn bits(self) -> (bool, bool) {
        match self {
            Axis::X => (true, false),
            Axis::Y => (true, true),
            Axis::Z => (false, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Option<Axis> {
        match (x, z) {
            (true, false) => Some(Axis::X),
            (true, true) => Some(Axis::Y),
            (false, true) => Some(Axis::Z),
            (false, false) => None,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Axis::X => 'X',
            Axis::Y => 'Y',
            Axis::Z => 'Z',
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PauliError {
    #[error("qubit {0} appears twice in a Pauli string")]
    DuplicateQubit(usize),
    #[error("cannot parse Pauli factor {0:?}")]
    BadFactor(String),
    #[error("line {line}: {reason}")]
    BadLine { line: usize, reason: String },
}

/// Tensor product of single-qubit Paulis with no phase.
///
/// Trailing zero words are trimmed, so derived equality and hashing are canonical.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct PauliString {
    x: Words,
    z: Words,
}

impl PauliString {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn single(qubit: usize, axis: Axis) -> Self {
        let mut s = Self::identity();
        s.set(qubit, Some(axis));
        s
    }

    /// Builds a string from `(qubit, axis)` factors in any order.
    pub fn from_factors<I>(factors: I) -> Result<Self, PauliError>
    where
        I: IntoIterator<Item = (usize, Axis)>,
    {
        let mut s = Self::identity();
        for (q, a) in factors {
            if s.get(q).is_some() {
                return Err(PauliError::DuplicateQubit(q));
            }
            s.set(q, Some(a));
        }
        Ok(s)
    }

    fn set(&mut self, qubit: usize, axis: Option<Axis>) {
        let (w, b) = (qubit / 64, qubit % 64);
        let need = w + 1;
        if self.x.len() < need {
            self.x.resize(need, 0);
            self.z.resize(need, 0);
        }
        let (xb, zb) = axis.map_or((false, false), Axis::bits);
        let mask = 1u64 << b;
        self.x[w] = (self.x[w] & !mask) | if xb { mask } else { 0 };
        self.z[w] = (self.z[w] & !mask) | if zb { mask } else { 0 };
        self.trim();
    }

    fn trim(&mut self) {
        while let (Some(&0), Some(&0)) = (self.x.last(), self.z.last()) {
            self.x.pop();
            self.z.pop();
        }
    }

    pub fn get(&self, qubit: usize) -> Option<Axis> {
        let (w, b) = (qubit / 64, qubit % 64);
        if w >= self.x.len() {
            return None;
        }
        Axis::from_bits(self.x[w] >> b & 1 == 1, self.z[w] >> b & 1 == 1)
    }

    pub fn is_identity(&self) -> bool {
        self.x.is_empty()
    }

    /// Number of non-identity factors.
    pub fn weight(&self) -> usize {
        self.x
            .iter()
            .zip(&self.z)
            .map(|(x, z)| (x | z).count_ones() as usize)
            .sum()
    }

    /// Factors in increasing qubit order.
    pub fn factors(&self) -> impl Iterator<Item = (usize, Axis)> + '_ {
        self.x.iter().zip(&self.z).enumerate().flat_map(|(w, (&x, &z))| {
            let mut support = x | z;
            std::iter::from_fn(move || {
                if support == 0 {
                    return None;
                }
                let b = support.trailing_zeros() as usize;
                support &= support - 1;
                let axis = Axis::from_bits(x >> b & 1 == 1, z >> b & 1 == 1)?;
                Some((w * 64 + b, axis))
            })
        })
    }

    pub fn min_qubit(&self) -> Option<usize> {
        self.x
            .iter()
            .zip(&self.z)
            .enumerate()
            .find(|(_, (x, z))| (*x | *z) != 0)
            .map(|(w, (x, z))| w * 64 + (x | z).trailing_zeros() as usize)
    }

    pub fn max_qubit(&self) -> Option<usize> {
        let w = self.x.len().checked_sub(1)?;
        let top = self.x[w] | self.z[w];
        Some(w * 64 + 63 - top.leading_zeros() as usize)
    }

    /// True when the two strings commute as operators.
    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let n = self.x.len().min(other.x.len());
        let mut parity = 0u32;
        for i in 0..n {
            parity ^= ((self.x[i] & other.z[i]) ^ (self.z[i] & other.x[i])).count_ones();
        }
        parity & 1 == 0
    }

    /// Product `self * other = i^k * P`, returned as `(k mod 4, P)`.
    pub fn mul(&self, other: &PauliString) -> (u8, PauliString) {
        let n = self.x.len().max(other.x.len());
        let word = |v: &Words, i: usize| v.get(i).copied().unwrap_or(0);
        let mut x = Words::with_capacity(n);
        let mut z = Words::with_capacity(n);
        let mut power: i64 = 0;
        for i in 0..n {
            let (x1, z1, x2, z2) = (word(&self.x, i), word(&self.z, i), word(&other.x, i), word(&other.z, i));
            let (px1, py1, pz1) = (x1 & !z1, x1 & z1, !x1 & z1);
            let (px2, py2, pz2) = (x2 & !z2, x2 & z2, !x2 & z2);
            // XY = iZ, YZ = iX, ZX = iY and the reversed products carry -i.
            let plus = (px1 & py2) | (py1 & pz2) | (pz1 & px2);
            let minus = (py1 & px2) | (pz1 & py2) | (px1 & pz2);
            power += plus.count_ones() as i64 - minus.count_ones() as i64;
            x.push(x1 ^ x2);
            z.push(z1 ^ z2);
        }
        let mut p = PauliString { x, z };
        p.trim();
        (power.rem_euclid(4) as u8, p)
    }
}

/// `i^k` for `k` in 0..4.
pub fn phase(k: u8) -> Complex64 {
    match k & 3 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// True when `[a, b] = 0`: disjoint supports or an even number of anticommuting sites.
pub fn commutes_trivially(a: &PauliString, b: &PauliString) -> bool {
    a.commutes_with(b)
}

impl Ord for PauliString {
    fn cmp(&self, other: &Self) -> Ordering {
        let mut a = self.factors();
        let mut b = other.factors();
        loop {
            match (a.next(), b.next()) {
                (None, None) => return Ordering::Equal,
                (None, Some(_)) => return Ordering::Less,
                (Some(_), None) => return Ordering::Greater,
                (Some(fa), Some(fb)) => match fa.cmp(&fb) {
                    Ordering::Equal => continue,
                    ord => return ord,
                },
            }
        }
    }
}

impl PartialOrd for PauliString {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            return f.write_str("I");
        }
        let mut first = true;
        for (q, a) in self.factors() {
            if !first {
                f.write_str(" ")?;
            }
            first = false;
            write!(f, "{}{}", a.symbol(), q)?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{self}]")
    }
}

impl FromStr for PauliString {
    type Err = PauliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let tokens: Vec<&str> = s.split_whitespace().collect();
        if tokens.is_empty() || tokens == ["I"] {
            return Ok(Self::identity());
        }
        let factors = tokens
            .iter()
            .map(|t| parse_factor(t))
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_factors(factors)
    }
}

fn parse_factor(token: &str) -> Result<(usize, Axis), PauliError> {
    let bad = || PauliError::BadFactor(token.to_string());
    let mut chars = token.chars();
    let axis = match chars.next() {
        Some('X') => Axis::X,
        Some('Y') => Axis::Y,
        Some('Z') => Axis::Z,
        _ => return Err(bad()),
    };
    let qubit = chars.as_str().parse::<usize>().map_err(|_| bad())?;
    Ok((qubit, axis))
}

/// Sparse linear combination of Pauli strings.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct QubitOperator {
    terms: BTreeMap<PauliString, Complex64>,
    drop_tolerance: f64,
}

impl QubitOperator {
    pub fn zero() -> Self {
        Self::default()
    }

    /// Terms whose magnitude falls to or below `tol` are discarded; zero means exact cancellation only.
    pub fn with_drop_tolerance(mut self, tol: f64) -> Self {
        self.drop_tolerance = tol.max(0.0);
        self.terms.retain(|_, c| c.norm() > self.drop_tolerance);
        self
    }

    pub fn drop_tolerance(&self) -> f64 {
        self.drop_tolerance
    }

    pub fn identity(coeff: Complex64) -> Self {
        Self::term(PauliString::identity(), coeff)
    }

    pub fn term(p: PauliString, coeff: Complex64) -> Self {
        let mut op = Self::zero();
        op.add_term(p, coeff);
        op
    }

    pub fn from_terms<I: IntoIterator<Item = (PauliString, Complex64)>>(terms: I) -> Self {
        let mut op = Self::zero();
        for (p, c) in terms {
            op.add_term(p, c);
        }
        op
    }

    pub fn add_term(&mut self, p: PauliString, coeff: Complex64) {
        let tol = self.drop_tolerance;
        match self.terms.entry(p) {
            std::collections::btree_map::Entry::Vacant(e) => {
                if coeff.norm() > tol {
                    e.insert(coeff);
                }
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let v = *e.get() + coeff;
                if v.norm() > tol {
                    *e.get_mut() = v;
                } else {
                    e.remove();
                }
            }
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&PauliString, &Complex64)> {
        self.terms.iter()
    }

    pub fn into_terms(self) -> impl Iterator<Item = (PauliString, Complex64)> {
        self.terms.into_iter()
    }

    pub fn coefficient(&self, p: &PauliString) -> Complex64 {
        self.terms.get(p).copied().unwrap_or_default()
    }

    /// One more than the largest qubit index acted on.
    pub fn num_qubits(&self) -> usize {
        self.terms
            .keys()
            .filter_map(PauliString::max_qubit)
            .max()
            .map_or(0, |q| q + 1)
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        let mut out = QubitOperator { terms: BTreeMap::new(), drop_tolerance: self.drop_tolerance };
        for (p, c) in &self.terms {
            out.add_term(p.clone(), c * s);
        }
        out
    }

    pub fn add(&self, other: &QubitOperator) -> Self {
        let mut out = self.clone();
        out.add_assign(other);
        out
    }

    pub fn add_assign(&mut self, other: &QubitOperator) {
        for (p, c) in &other.terms {
            self.add_term(p.clone(), *c);
        }
    }

    pub fn sub(&self, other: &QubitOperator) -> Self {
        self.add(&other.scaled(Complex64::new(-1.0, 0.0)))
    }

    /// Operator with the identity term removed.
    pub fn without_identity(&self) -> Self {
        let mut out = self.clone();
        out.terms.remove(&PauliString::identity());
        out
    }

    pub fn multiply(&self, other: &QubitOperator) -> Self {
        let mut out = QubitOperator { terms: BTreeMap::new(), drop_tolerance: self.drop_tolerance };
        for (pa, ca) in &self.terms {
            for (pb, cb) in &other.terms {
                let (k, p) = pa.mul(pb);
                out.add_term(p, ca * cb * phase(k));
            }
        }
        out
    }

    /// `ab - ba`. Only anticommuting pairs contribute, each as `2ab`.
    pub fn commutator(&self, other: &QubitOperator) -> Self {
        let mut out = QubitOperator { terms: BTreeMap::new(), drop_tolerance: self.drop_tolerance };
        for (pa, ca) in &self.terms {
            for (pb, cb) in &other.terms {
                if pa.commutes_with(pb) {
                    continue;
                }
                let (k, p) = pa.mul(pb);
                out.add_term(p, ca * cb * phase(k) * 2.0);
            }
        }
        out
    }

    /// Sum of coefficient magnitudes, identity included.
    pub fn one_norm(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).sum()
    }

    /// Sum of coefficient magnitudes with the identity term skipped.
    pub fn one_norm_traceless(&self) -> f64 {
        self.terms
            .iter()
            .filter(|(p, _)| !p.is_identity())
            .map(|(_, c)| c.norm())
            .sum()
    }

    /// Largest imaginary part magnitude over all coefficients.
    pub fn max_imaginary(&self) -> f64 {
        self.terms.values().map(|c| c.im.abs()).fold(0.0, f64::max)
    }

    /// True when every coefficient pair differs by at most `tol`.
    pub fn approx_eq(&self, other: &QubitOperator, tol: f64) -> bool {
        self.sub(other).terms.values().all(|c| c.norm() <= tol)
    }

    /// Line-oriented text: `re im X3 Y7` per term, `I` for the identity.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (p, c) in &self.terms {
            s.push_str(&format!("{:e} {:e} {}\n", c.re, c.im, p));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self, PauliError> {
        let mut op = Self::zero();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |reason: &str| PauliError::BadLine { line: i + 1, reason: reason.to_string() };
            let mut parts = line.splitn(3, char::is_whitespace);
            let re: f64 = parts.next().and_then(|t| t.parse().ok()).ok_or_else(|| bad("real part"))?;
            let im: f64 = parts
                .next()
                .and_then(|t| t.trim().parse().ok())
                .ok_or_else(|| bad("imaginary part"))?;
            let p: PauliString = parts.next().unwrap_or("I").parse()?;
            op.add_term(p, Complex64::new(re, im));
        }
        Ok(op)
    }
}
