//! Exact arithmetic in the three field kinds used throughout the crate:
//! the rationals, quadratic extensions Q(sqrt(D)), and finite fields GF(p^n).

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum FieldError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("operands belong to different fields")]
    FieldMismatch,
    #[error("cannot complete the square in characteristic two")]
    CharacteristicTwo,
    #[error("invalid field descriptor: {0}")]
    BadDescriptor(String),
    #[error("modulus is not irreducible over GF({0})")]
    NotIrreducible(u64),
    #[error("parse error: {0}")]
    Parse(String),
}

/// Which exact field scalars live in.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FieldDescriptor {
    Rationals,
    /// Q(s) with s^2 = D, D squarefree, D not in {0, 1}.
    Quadratic { d: i64 },
    /// GF(p^n) = GF(p)[t] / (t^n + modulus[n-1] t^(n-1) + ... + modulus[0]).
    Finite { p: u64, n: usize, modulus: Vec<u64> },
}

fn is_squarefree(d: i64) -> bool {
    let mut m = d.unsigned_abs();
    let mut f = 2u64;
    while f * f <= m {
        if m % (f * f) == 0 {
            return false;
        }
        while m % f == 0 {
            m /= f;
        }
        f += 1;
    }
    true
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut f = 2u64;
    while f * f <= p {
        if p % f == 0 {
            return false;
        }
        f += 1;
    }
    true
}

/// Built-in irreducible moduli for the small finite fields the net
/// constructions need.
pub fn builtin_modulus(p: u64, n: usize) -> Option<Vec<u64>> {
    match (p, n) {
        (_, 1) => Some(vec![0]),
        (2, 2) => Some(vec![1, 1]),          // t^2+t+1
        (2, 3) => Some(vec![1, 1, 0]),       // t^3+t+1
        (3, 2) => Some(vec![1, 0]),          // t^2+1
        (2, 4) => Some(vec![1, 1, 0, 0]),    // t^4+t+1
        (3, 3) => Some(vec![1, 2, 0]),       // t^3+2t+1
        _ => None,
    }
}

// ---- dense GF(p) polynomial helpers (coefficient vectors, low degree first) ----

fn gfp_trim(v: &mut Vec<u64>) {
    while v.len() > 1 && *v.last().unwrap() == 0 {
        v.pop();
    }
}

fn gfp_mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x * y) % p;
        }
    }
    gfp_trim(&mut out);
    out
}

fn gfp_inv_scalar(x: u64, p: u64) -> u64 {
    // p prime, x != 0
    let mut r = 1u64;
    let mut b = x % p;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    r
}

/// Remainder of a modulo b over GF(p); b need not be monic.
fn gfp_rem(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut r: Vec<u64> = a.to_vec();
    gfp_trim(&mut r);
    let db = b.len() - 1;
    let lb_inv = gfp_inv_scalar(b[db], p);
    while r.len() - 1 >= db && !(r.len() == 1 && r[0] == 0) {
        let dr = r.len() - 1;
        let c = r[dr] * lb_inv % p;
        if c != 0 {
            for i in 0..=db {
                let idx = dr - db + i;
                r[idx] = (r[idx] + p - c * b[i] % p) % p;
            }
        }
        r.pop();
        gfp_trim(&mut r);
        if dr == db {
            break;
        }
    }
    gfp_trim(&mut r);
    r
}

fn gfp_is_zero(a: &[u64]) -> bool {
    a.iter().all(|&c| c == 0)
}

/// Trial-factorization irreducibility test, adequate for n <= 4.
fn gfp_irreducible(modulus: &[u64], p: u64) -> bool {
    let n = modulus.len();
    if n == 1 {
        return true;
    }
    // full monic polynomial t^n + modulus
    let mut full: Vec<u64> = modulus.to_vec();
    full.push(1);
    // no roots in GF(p) kills linear factors
    for x in 0..p {
        let mut acc = 0u64;
        for &c in full.iter().rev() {
            acc = (acc * x + c) % p;
        }
        if acc == 0 {
            return false;
        }
    }
    if n <= 3 {
        return true;
    }
    // n == 4: also rule out monic irreducible quadratic factors
    for c1 in 0..p {
        for c0 in 0..p {
            let q = vec![c0, c1, 1];
            if gfp_is_zero(&gfp_rem(&full, &q, p)) {
                return false;
            }
        }
    }
    true
}

impl FieldDescriptor {
    pub fn rationals() -> Self {
        FieldDescriptor::Rationals
    }

    pub fn quadratic(d: i64) -> Result<Self, FieldError> {
        if d == 0 || d == 1 || !is_squarefree(d) {
            return Err(FieldError::BadDescriptor(format!(
                "D = {d} must be squarefree and not 0 or 1"
            )));
        }
        Ok(FieldDescriptor::Quadratic { d })
    }

    pub fn finite(p: u64, n: usize, modulus: Option<Vec<u64>>) -> Result<Self, FieldError> {
        if !is_prime(p) {
            return Err(FieldError::BadDescriptor(format!("{p} is not prime")));
        }
        if n == 0 || n > 4 {
            return Err(FieldError::BadDescriptor(format!(
                "extension degree {n} outside supported range 1..=4"
            )));
        }
        let modulus = match modulus {
            Some(m) => m,
            None => builtin_modulus(p, n).ok_or_else(|| {
                FieldError::BadDescriptor(format!("no built-in modulus for GF({p}^{n})"))
            })?,
        };
        if modulus.len() != n || modulus.iter().any(|&c| c >= p) {
            return Err(FieldError::BadDescriptor(
                "modulus must list n coefficients below p".into(),
            ));
        }
        if !gfp_irreducible(&modulus, p) {
            return Err(FieldError::NotIrreducible(p));
        }
        Ok(FieldDescriptor::Finite { p, n, modulus })
    }

    pub fn characteristic(&self) -> u64 {
        match self {
            FieldDescriptor::Finite { p, .. } => *p,
            _ => 0,
        }
    }

    /// Number of elements for finite fields.
    pub fn order(&self) -> Option<u64> {
        match self {
            FieldDescriptor::Finite { p, n, .. } => Some(p.pow(*n as u32)),
            _ => None,
        }
    }

    pub fn zero(&self) -> Scalar {
        Scalar::from_i64(self, 0)
    }

    pub fn one(&self) -> Scalar {
        Scalar::from_i64(self, 1)
    }

    /// All elements of a finite field, in lexicographic residue order.
    pub fn elements(&self) -> Option<Vec<Scalar>> {
        let (p, n) = match self {
            FieldDescriptor::Finite { p, n, .. } => (*p, *n),
            _ => return None,
        };
        let q = p.pow(n as u32);
        let mut out = Vec::with_capacity(q as usize);
        for code in 0..q {
            let mut c = code;
            let mut coeffs = vec![0u64; n];
            for slot in coeffs.iter_mut().rev() {
                *slot = c % p;
                c /= p;
            }
            out.push(Scalar {
                field: self.clone(),
                repr: Repr::Fin(coeffs),
            });
        }
        Some(out)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
enum Repr {
    Rat(BigRational),
    /// x + y*s with s^2 = D
    Quad(BigRational, BigRational),
    /// residue coefficients c0..c_{n-1}, all < p
    Fin(Vec<u64>),
}

/// An element of one of the supported exact fields, always in canonical form.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Scalar {
    field: FieldDescriptor,
    repr: Repr,
}

pub type FieldResult<T> = Result<T, FieldError>;

fn brat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

impl Scalar {
    pub fn field(&self) -> &FieldDescriptor {
        &self.field
    }

    pub fn from_i64(field: &FieldDescriptor, v: i64) -> Scalar {
        match field {
            FieldDescriptor::Rationals => Scalar {
                field: field.clone(),
                repr: Repr::Rat(brat(v, 1)),
            },
            FieldDescriptor::Quadratic { .. } => Scalar {
                field: field.clone(),
                repr: Repr::Quad(brat(v, 1), brat(0, 1)),
            },
            FieldDescriptor::Finite { p, n, .. } => {
                let r = v.rem_euclid(*p as i64) as u64;
                let mut coeffs = vec![0u64; *n];
                coeffs[0] = r;
                Scalar {
                    field: field.clone(),
                    repr: Repr::Fin(coeffs),
                }
            }
        }
    }

    pub fn from_ratio(field: &FieldDescriptor, num: i64, den: i64) -> FieldResult<Scalar> {
        let n = Scalar::from_i64(field, num);
        let d = Scalar::from_i64(field, den);
        n.div(&d)
    }

    pub fn rational(r: BigRational) -> Scalar {
        Scalar {
            field: FieldDescriptor::Rationals,
            repr: Repr::Rat(r),
        }
    }

    /// x + y*s in Q(sqrt(D)).
    pub fn quadratic(d: i64, x: BigRational, y: BigRational) -> FieldResult<Scalar> {
        let field = FieldDescriptor::quadratic(d)?;
        Ok(Scalar {
            field,
            repr: Repr::Quad(x, y),
        })
    }

    /// The generator s with s^2 = D.
    pub fn sqrt_gen(d: i64) -> FieldResult<Scalar> {
        Scalar::quadratic(d, brat(0, 1), brat(1, 1))
    }

    pub fn finite(field: &FieldDescriptor, coeffs: Vec<u64>) -> FieldResult<Scalar> {
        match field {
            FieldDescriptor::Finite { p, n, .. } => {
                if coeffs.len() > *n {
                    return Err(FieldError::BadDescriptor("residue degree too high".into()));
                }
                let mut c: Vec<u64> = coeffs.iter().map(|x| x % p).collect();
                c.resize(*n, 0);
                Ok(Scalar {
                    field: field.clone(),
                    repr: Repr::Fin(c),
                })
            }
            _ => Err(FieldError::FieldMismatch),
        }
    }

    pub fn is_zero(&self) -> bool {
        match &self.repr {
            Repr::Rat(r) => r.is_zero(),
            Repr::Quad(x, y) => x.is_zero() && y.is_zero(),
            Repr::Fin(c) => c.iter().all(|&v| v == 0),
        }
    }

    pub fn is_one(&self) -> bool {
        self == &self.field.one()
    }

    /// Rational value when the scalar is a plain rational (or a quadratic
    /// element with zero irrational part).
    pub fn as_rational(&self) -> Option<&BigRational> {
        match &self.repr {
            Repr::Rat(r) => Some(r),
            Repr::Quad(x, y) if y.is_zero() => Some(x),
            _ => None,
        }
    }

    /// (x, y) parts of a quadratic element.
    pub fn quad_parts(&self) -> Option<(&BigRational, &BigRational)> {
        match &self.repr {
            Repr::Quad(x, y) => Some((x, y)),
            _ => None,
        }
    }

    pub fn finite_coeffs(&self) -> Option<&[u64]> {
        match &self.repr {
            Repr::Fin(c) => Some(c),
            _ => None,
        }
    }

    fn check(&self, other: &Scalar) -> FieldResult<()> {
        if self.field == other.field {
            Ok(())
        } else {
            Err(FieldError::FieldMismatch)
        }
    }

    pub fn add(&self, other: &Scalar) -> FieldResult<Scalar> {
        self.check(other)?;
        let repr = match (&self.repr, &other.repr) {
            (Repr::Rat(a), Repr::Rat(b)) => Repr::Rat(a + b),
            (Repr::Quad(ax, ay), Repr::Quad(bx, by)) => Repr::Quad(ax + bx, ay + by),
            (Repr::Fin(a), Repr::Fin(b)) => {
                let p = self.field.characteristic();
                Repr::Fin(a.iter().zip(b).map(|(x, y)| (x + y) % p).collect())
            }
            _ => unreachable!(),
        };
        Ok(Scalar {
            field: self.field.clone(),
            repr,
        })
    }

    pub fn sub(&self, other: &Scalar) -> FieldResult<Scalar> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Scalar {
        let repr = match &self.repr {
            Repr::Rat(a) => Repr::Rat(-a),
            Repr::Quad(x, y) => Repr::Quad(-x, -y),
            Repr::Fin(c) => {
                let p = self.field.characteristic();
                Repr::Fin(c.iter().map(|&x| (p - x) % p).collect())
            }
        };
        Scalar {
            field: self.field.clone(),
            repr,
        }
    }

    pub fn mul(&self, other: &Scalar) -> FieldResult<Scalar> {
        self.check(other)?;
        let repr = match (&self.repr, &other.repr) {
            (Repr::Rat(a), Repr::Rat(b)) => Repr::Rat(a * b),
            (Repr::Quad(ax, ay), Repr::Quad(bx, by)) => {
                let d = match &self.field {
                    FieldDescriptor::Quadratic { d } => brat(*d, 1),
                    _ => unreachable!(),
                };
                Repr::Quad(ax * bx + &d * (ay * by), ax * by + ay * bx)
            }
            (Repr::Fin(a), Repr::Fin(b)) => {
                let (p, modulus) = match &self.field {
                    FieldDescriptor::Finite { p, modulus, .. } => (*p, modulus),
                    _ => unreachable!(),
                };
                let mut full = modulus.clone();
                full.push(1);
                let mut r = gfp_rem(&gfp_mul(a, b, p), &full, p);
                r.resize(a.len(), 0);
                Repr::Fin(r)
            }
            _ => unreachable!(),
        };
        Ok(Scalar {
            field: self.field.clone(),
            repr,
        })
    }

    pub fn inv(&self) -> FieldResult<Scalar> {
        if self.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        let repr = match &self.repr {
            Repr::Rat(a) => Repr::Rat(a.recip()),
            Repr::Quad(x, y) => {
                let d = match &self.field {
                    FieldDescriptor::Quadratic { d } => brat(*d, 1),
                    _ => unreachable!(),
                };
                // (x + y s)^-1 = (x - y s) / (x^2 - D y^2)
                let norm = x * x - &d * (y * y);
                debug_assert!(!norm.is_zero(), "D squarefree makes the norm form anisotropic");
                Repr::Quad(x / &norm, -(y / &norm))
            }
            Repr::Fin(_) => {
                // brute-force inverse; field orders here are desk scale
                let elems = self.field.elements().unwrap();
                let one = self.field.one();
                let mut found = None;
                for e in elems {
                    if self.mul(&e)? == one {
                        found = Some(e);
                        break;
                    }
                }
                return Ok(found.expect("nonzero element of a field has an inverse"));
            }
        };
        Ok(Scalar {
            field: self.field.clone(),
            repr,
        })
    }

    pub fn div(&self, other: &Scalar) -> FieldResult<Scalar> {
        self.mul(&other.inv()?)
    }

    pub fn pow(&self, e: u32) -> Scalar {
        let mut acc = self.field.one();
        for _ in 0..e {
            acc = acc.mul(self).unwrap();
        }
        acc
    }

    /// A canonical square root in the same field, when one exists.
    pub fn sqrt(&self) -> Option<Scalar> {
        match &self.repr {
            Repr::Rat(r) => rational_sqrt(r).map(Scalar::rational),
            Repr::Quad(x, y) => {
                let d = match &self.field {
                    FieldDescriptor::Quadratic { d } => *d,
                    _ => unreachable!(),
                };
                quad_sqrt(d, x, y).map(|(a, b)| Scalar {
                    field: self.field.clone(),
                    repr: Repr::Quad(a, b),
                })
            }
            Repr::Fin(_) => {
                for e in self.field.elements().unwrap() {
                    if e.mul(&e).unwrap() == *self {
                        return Some(e); // elements() is lex-ordered, first hit is canonical
                    }
                }
                None
            }
        }
    }
}

fn rational_sqrt(r: &BigRational) -> Option<BigRational> {
    if r.is_negative() {
        return None;
    }
    let n = r.numer();
    let d = r.denom();
    let sn = num::integer::Roots::sqrt(n);
    let sd = num::integer::Roots::sqrt(d);
    if &(&sn * &sn) == n && &(&sd * &sd) == d {
        Some(BigRational::new(sn, sd))
    } else {
        None
    }
}

/// Square root of x + y*s in Q(sqrt(D)), canonical sign.
fn quad_sqrt(d: i64, x: &BigRational, y: &BigRational) -> Option<(BigRational, BigRational)> {
    let dd = brat(d, 1);
    let canonical = |a: BigRational, b: BigRational| {
        if a.is_negative() || (a.is_zero() && b.is_negative()) {
            (-a, -b)
        } else {
            (a, b)
        }
    };
    if y.is_zero() {
        if let Some(a) = rational_sqrt(x) {
            return Some(canonical(a, brat(0, 1)));
        }
        // x = D * b^2 gives root b*s
        let q = x / &dd;
        if let Some(b) = rational_sqrt(&q) {
            return Some(canonical(brat(0, 1), b));
        }
        return None;
    }
    // (a + b s)^2 = x + y s  =>  a^2 + D b^2 = x, 2ab = y
    // b^2 = (x +- sqrt(x^2 - D y^2)) / (2D)
    let norm = x * x - &dd * (y * y);
    let root_norm = rational_sqrt(&norm)?;
    for sign in [1i64, -1] {
        let cand = (x + brat(sign, 1) * &root_norm) / (brat(2, 1) * &dd);
        if let Some(b) = rational_sqrt(&cand) {
            if b.is_zero() {
                continue;
            }
            let a = y / (brat(2, 1) * &b);
            return Some(canonical(a, b));
        }
    }
    None
}

/// Roots of a x^2 + b x + c in the scalars' field, plus the discriminant
/// so callers can decide which extension to adjoin when the list is empty.
pub struct QuadraticRoots {
    pub roots: Vec<Scalar>,
    pub discriminant: Scalar,
}

pub fn solve_quadratic(a: &Scalar, b: &Scalar, c: &Scalar) -> FieldResult<QuadraticRoots> {
    a.check(b)?;
    a.check(c)?;
    let field = a.field().clone();
    if a.is_zero() && b.is_zero() {
        return Err(FieldError::BadDescriptor(
            "leading coefficients both zero".into(),
        ));
    }
    if a.is_zero() {
        return Ok(QuadraticRoots {
            roots: vec![c.neg().div(b)?],
            discriminant: b.mul(b)?,
        });
    }
    if field.characteristic() == 2 {
        return Err(FieldError::CharacteristicTwo);
    }
    let four = Scalar::from_i64(&field, 4);
    let two = Scalar::from_i64(&field, 2);
    let disc = b.mul(b)?.sub(&four.mul(a)?.mul(c)?)?;
    let roots = match disc.sqrt() {
        Some(r) => {
            let denom = two.mul(a)?;
            let r1 = b.neg().add(&r)?.div(&denom)?;
            let r2 = b.neg().sub(&r)?.div(&denom)?;
            if r1 == r2 {
                vec![r1]
            } else {
                vec![r1, r2]
            }
        }
        None => vec![],
    };
    Ok(QuadraticRoots {
        roots,
        discriminant: disc,
    })
}

// ---- text syntax ----

fn fmt_rat(r: &BigRational) -> String {
    if r.denom().is_one() {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            Repr::Rat(r) => write!(f, "{}", fmt_rat(r)),
            Repr::Quad(x, y) => {
                let d = match &self.field {
                    FieldDescriptor::Quadratic { d } => *d,
                    _ => unreachable!(),
                };
                write!(f, "{}+{}*s | D={}", fmt_rat(x), fmt_rat(y), d)
            }
            Repr::Fin(c) => {
                let (p, n) = match &self.field {
                    FieldDescriptor::Finite { p, n, .. } => (*p, *n),
                    _ => unreachable!(),
                };
                for (i, v) in c.iter().enumerate() {
                    if i == 0 {
                        write!(f, "{v}")?;
                    } else if i == 1 {
                        write!(f, "+{v}*t")?;
                    } else {
                        write!(f, "+{v}*t^{i}")?;
                    }
                }
                write!(f, " | GF({p}^{n})")
            }
        }
    }
}

fn parse_rat(s: &str) -> FieldResult<BigRational> {
    let s = s.trim();
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let n: BigInt = n
        .trim()
        .parse()
        .map_err(|_| FieldError::Parse(format!("bad integer {n:?}")))?;
    let d: BigInt = d
        .trim()
        .parse()
        .map_err(|_| FieldError::Parse(format!("bad integer {d:?}")))?;
    if d.is_zero() {
        return Err(FieldError::DivisionByZero);
    }
    Ok(BigRational::new(n, d))
}

/// Parse the bit-exact text syntax: `p/q`, `x+y*s | D=-3`,
/// `c0+c1*t+... | GF(p^n)` (finite fields use the built-in modulus table).
pub fn parse_scalar(s: &str) -> FieldResult<Scalar> {
    let s = s.trim();
    if let Some((lhs, rhs)) = s.split_once('|') {
        let rhs = rhs.trim();
        if let Some(dstr) = rhs.strip_prefix("D=") {
            let d: i64 = dstr
                .trim()
                .parse()
                .map_err(|_| FieldError::Parse(format!("bad D {dstr:?}")))?;
            let lhs = lhs.trim();
            let (xs, ys) = lhs
                .strip_suffix("*s")
                .and_then(|body| {
                    // split at the '+' separating the parts; neither part
                    // contains an interior '+'
                    body[1..].find('+').map(|k| (&body[..k + 1], &body[k + 2..]))
                })
                .ok_or_else(|| FieldError::Parse(format!("bad quadratic scalar {lhs:?}")))?;
            return Scalar::quadratic(d, parse_rat(xs)?, parse_rat(ys)?);
        }
        if let Some(inner) = rhs.strip_prefix("GF(").and_then(|r| r.strip_suffix(')')) {
            let (p, n) = match inner.split_once('^') {
                Some((p, n)) => (
                    p.parse::<u64>()
                        .map_err(|_| FieldError::Parse(format!("bad prime {p:?}")))?,
                    n.parse::<usize>()
                        .map_err(|_| FieldError::Parse(format!("bad degree {n:?}")))?,
                ),
                None => (
                    inner
                        .parse::<u64>()
                        .map_err(|_| FieldError::Parse(format!("bad prime {inner:?}")))?,
                    1,
                ),
            };
            let field = FieldDescriptor::finite(p, n, None)?;
            let mut coeffs = vec![0u64; n];
            for term in lhs.trim().split('+') {
                let term = term.trim();
                let (c, pow) = match term.split_once('*') {
                    None => (term, 0usize),
                    Some((c, t)) => {
                        let pow = if t == "t" {
                            1
                        } else {
                            t.strip_prefix("t^")
                                .and_then(|e| e.parse().ok())
                                .ok_or_else(|| {
                                    FieldError::Parse(format!("bad term {term:?}"))
                                })?
                        };
                        (c, pow)
                    }
                };
                let c: u64 = c
                    .trim()
                    .parse()
                    .map_err(|_| FieldError::Parse(format!("bad coefficient {c:?}")))?;
                if pow >= n {
                    return Err(FieldError::Parse(format!("degree {pow} exceeds {n}")));
                }
                coeffs[pow] = (coeffs[pow] + c) % p;
            }
            return Scalar::finite(&field, coeffs);
        }
        return Err(FieldError::Parse(format!("unrecognized field tag {rhs:?}")));
    }
    Ok(Scalar::rational(parse_rat(s)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Scalar {
        Scalar::rational(brat(n, d))
    }

    #[test]
    fn hesse_w_satisfies_its_equation() {
        // w = (1 + s)/2 in Q(sqrt(-3)) has w^2 - w + 1 = 0
        let w = Scalar::quadratic(-3, brat(1, 2), brat(1, 2)).unwrap();
        let lhs = w
            .mul(&w)
            .unwrap()
            .sub(&w)
            .unwrap()
            .add(&w.field().one())
            .unwrap();
        assert!(lhs.is_zero());
    }

    #[test]
    fn rational_inverse_identity() {
        assert_eq!(q(1, 1).inv().unwrap(), q(1, 1));
        assert_eq!(q(2, 3).inv().unwrap(), q(3, 2));
        assert_eq!(q(0, 1).inv(), Err(FieldError::DivisionByZero));
    }

    #[test]
    fn gf4_inverse_matches_brute_force_table() {
        let f = FieldDescriptor::finite(2, 2, None).unwrap();
        let t = Scalar::finite(&f, vec![0, 1]).unwrap();
        let t_plus_1 = Scalar::finite(&f, vec![1, 1]).unwrap();
        assert_eq!(t.inv().unwrap(), t_plus_1);
        // exhaust all nonzero elements
        for e in f.elements().unwrap() {
            if e.is_zero() {
                continue;
            }
            assert_eq!(e.mul(&e.inv().unwrap()).unwrap(), f.one());
        }
    }

    #[test]
    fn field_mismatch_detected() {
        let a = q(1, 2);
        let b = Scalar::quadratic(-3, brat(1, 2), brat(0, 1)).unwrap();
        assert_eq!(a.add(&b), Err(FieldError::FieldMismatch));
    }

    #[test]
    fn solve_quadratic_hesse() {
        // roots of w^2 - w + 1 over Q(sqrt(-3)) are (1 +- s)/2
        let f = FieldDescriptor::quadratic(-3).unwrap();
        let roots = solve_quadratic(&f.one(), &f.one().neg(), &f.one()).unwrap();
        let r1 = Scalar::quadratic(-3, brat(1, 2), brat(1, 2)).unwrap();
        let r2 = Scalar::quadratic(-3, brat(1, 2), brat(-1, 2)).unwrap();
        assert_eq!(roots.roots.len(), 2);
        assert!(roots.roots.contains(&r1));
        assert!(roots.roots.contains(&r2));
    }

    #[test]
    fn solve_quadratic_rational_cases() {
        let f = FieldDescriptor::Rationals;
        let r = solve_quadratic(&f.one(), &f.zero(), &f.one().neg()).unwrap();
        assert_eq!(r.roots, vec![q(1, 1), q(-1, 1)]);
        // x^2 + 1: no rational roots, discriminant -4 reported
        let r = solve_quadratic(&f.one(), &f.zero(), &f.one()).unwrap();
        assert!(r.roots.is_empty());
        assert_eq!(r.discriminant, q(-4, 1));
    }

    #[test]
    fn char_two_quadratic_rejected() {
        let f = FieldDescriptor::finite(2, 2, None).unwrap();
        let e = solve_quadratic(&f.one(), &f.one(), &f.one());
        assert!(matches!(e, Err(FieldError::CharacteristicTwo)));
    }

    #[test]
    fn is_square_examples() {
        assert_eq!(q(4, 9).sqrt(), Some(q(2, 3)));
        let minus3 = Scalar::quadratic(-3, brat(-3, 1), brat(0, 1)).unwrap();
        let s = Scalar::sqrt_gen(-3).unwrap();
        assert_eq!(minus3.sqrt(), Some(s));
    }

    #[test]
    fn gf9_squares_match_exhaustive_table() {
        let f = FieldDescriptor::finite(3, 2, None).unwrap();
        let elems = f.elements().unwrap();
        for x in &elems {
            // brute-force oracle over all 9 residues
            let oracle: Vec<&Scalar> = elems
                .iter()
                .filter(|r| &r.mul(r).unwrap() == x)
                .collect();
            match x.sqrt() {
                Some(r) => {
                    assert_eq!(r.mul(&r).unwrap(), *x);
                    // canonical choice is the lexicographically first root
                    assert_eq!(&r, oracle[0]);
                }
                None => assert!(oracle.is_empty()),
            }
        }
    }

    #[test]
    fn field_axioms_random_sampling() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let fields = vec![
            FieldDescriptor::Rationals,
            FieldDescriptor::quadratic(-3).unwrap(),
            FieldDescriptor::quadratic(5).unwrap(),
            FieldDescriptor::finite(5, 1, None).unwrap(),
            FieldDescriptor::finite(2, 3, None).unwrap(),
        ];
        for f in fields {
            for _ in 0..1000 {
                let rnd = |rng: &mut rand_chacha::ChaCha8Rng| match &f {
                    FieldDescriptor::Rationals => q(rng.gen_range(-9..10), rng.gen_range(1..7)),
                    FieldDescriptor::Quadratic { d } => Scalar::quadratic(
                        *d,
                        brat(rng.gen_range(-9..10), rng.gen_range(1..7)),
                        brat(rng.gen_range(-9..10), rng.gen_range(1..7)),
                    )
                    .unwrap(),
                    FieldDescriptor::Finite { p, n, .. } => Scalar::finite(
                        &f,
                        (0..*n).map(|_| rng.gen_range(0..*p)).collect(),
                    )
                    .unwrap(),
                };
                let (a, b, c) = (rnd(&mut rng), rnd(&mut rng), rnd(&mut rng));
                // associativity
                assert_eq!(
                    a.mul(&b).unwrap().mul(&c).unwrap(),
                    a.mul(&b.mul(&c).unwrap()).unwrap()
                );
                // distributivity
                assert_eq!(
                    a.mul(&b.add(&c).unwrap()).unwrap(),
                    a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap()
                );
                // inverse law
                if !a.is_zero() {
                    assert_eq!(a.mul(&a.inv().unwrap()).unwrap(), f.one());
                }
            }
        }
    }

    #[test]
    fn text_syntax_round_trip() {
        let samples = vec![
            q(-7, 3),
            q(5, 1),
            Scalar::quadratic(-3, brat(1, 2), brat(-1, 2)).unwrap(),
            Scalar::quadratic(5, brat(-2, 1), brat(3, 4)).unwrap(),
            Scalar::finite(&FieldDescriptor::finite(2, 2, None).unwrap(), vec![1, 1]).unwrap(),
            Scalar::finite(&FieldDescriptor::finite(3, 2, None).unwrap(), vec![2, 1]).unwrap(),
        ];
        for s in samples {
            let printed = s.to_string();
            let back = parse_scalar(&printed).unwrap();
            assert_eq!(back, s, "round trip failed for {printed}");
            assert_eq!(back.to_string(), printed);
        }
    }

    #[test]
    fn reducible_modulus_rejected() {
        // t^2 + 1 is reducible over GF(2)
        let e = FieldDescriptor::finite(2, 2, Some(vec![1, 0]));
        assert!(matches!(e, Err(FieldError::NotIrreducible(2))));
    }
}
