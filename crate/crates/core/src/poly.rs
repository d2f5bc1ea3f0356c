//! Sparse multivariate polynomials and reduced rational functions over an
//! exact field. Monomials are ordered graded-lexicographically; rational
//! functions are kept gcd-reduced with a monic denominator.

use crate::field::{FieldDescriptor, Scalar};
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

/// Exponent vector with graded-lex ordering (total degree first, then lex).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Mono(pub Vec<u32>);

impl Mono {
    pub fn one(nvars: usize) -> Self {
        Mono(vec![0; nvars])
    }
    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Mono(e)
    }
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }
    pub fn mul(&self, other: &Mono) -> Mono {
        Mono(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
    pub fn divides(&self, other: &Mono) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }
    pub fn div(&self, other: &Mono) -> Mono {
        Mono(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Mono {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

/// Sparse multivariate polynomial with exact field coefficients.
/// Zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiPoly {
    pub nvars: usize,
    pub field: FieldDescriptor,
    pub terms: BTreeMap<Mono, Scalar>,
}

impl MultiPoly {
    pub fn zero(field: &FieldDescriptor, nvars: usize) -> Self {
        MultiPoly {
            nvars,
            field: field.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(c: Scalar, nvars: usize) -> Self {
        let field = c.field().clone();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Mono::one(nvars), c);
        }
        MultiPoly {
            nvars,
            field,
            terms,
        }
    }

    pub fn one(field: &FieldDescriptor, nvars: usize) -> Self {
        Self::constant(field.one(), nvars)
    }

    pub fn var(field: &FieldDescriptor, nvars: usize, i: usize) -> Self {
        assert!(i < nvars);
        let mut terms = BTreeMap::new();
        terms.insert(Mono::var(nvars, i), field.one());
        MultiPoly {
            nvars,
            field: field.clone(),
            terms,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.len() <= 1 && self.terms.keys().all(|m| m.degree() == 0)
    }

    pub fn constant_value(&self) -> Scalar {
        if self.is_zero() {
            self.field.zero()
        } else {
            self.terms.values().next().unwrap().clone()
        }
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|m| m.degree()).max().unwrap_or(0)
    }

    pub fn degree_in(&self, i: usize) -> u32 {
        self.terms.keys().map(|m| m.0[i]).max().unwrap_or(0)
    }

    pub fn uses_var(&self, i: usize) -> bool {
        self.terms.keys().any(|m| m.0[i] > 0)
    }

    /// Leading term in graded-lex order.
    pub fn leading(&self) -> Option<(&Mono, &Scalar)> {
        self.terms.iter().next_back()
    }

    pub fn leading_coeff(&self) -> Scalar {
        self.leading()
            .map(|(_, c)| c.clone())
            .unwrap_or_else(|| self.field.zero())
    }

    pub(crate) fn insert_term(&mut self, m: Mono, c: Scalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let s = e.get().add(&c).unwrap();
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, other: &MultiPoly) -> MultiPoly {
        let mut r = self.clone();
        for (m, c) in &other.terms {
            r.insert_term(m.clone(), c.clone());
        }
        r
    }

    pub fn neg(&self) -> MultiPoly {
        let mut r = self.clone();
        for c in r.terms.values_mut() {
            *c = c.neg();
        }
        r
    }

    pub fn sub(&self, other: &MultiPoly) -> MultiPoly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &MultiPoly) -> MultiPoly {
        let mut r = MultiPoly::zero(&self.field, self.nvars);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                r.insert_term(m1.mul(m2), c1.mul(c2).unwrap());
            }
        }
        r
    }

    pub fn mul_scalar(&self, s: &Scalar) -> MultiPoly {
        if s.is_zero() {
            return MultiPoly::zero(&self.field, self.nvars);
        }
        let mut r = self.clone();
        for c in r.terms.values_mut() {
            *c = c.mul(s).unwrap();
        }
        r
    }

    pub fn pow(&self, mut e: u32) -> MultiPoly {
        let mut base = self.clone();
        let mut acc = MultiPoly::one(&self.field, self.nvars);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn eval(&self, vals: &[Scalar]) -> Scalar {
        let mut acc = self.field.zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (i, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    t = t.mul(&vals[i].pow(e)).unwrap();
                }
            }
            acc = acc.add(&t).unwrap();
        }
        acc
    }

    pub fn derivative(&self, i: usize) -> MultiPoly {
        let mut r = MultiPoly::zero(&self.field, self.nvars);
        for (m, c) in &self.terms {
            let e = m.0[i];
            if e > 0 {
                let mut m2 = m.clone();
                m2.0[i] -= 1;
                r.insert_term(m2, c.mul(&Scalar::from_i64(&self.field, e as i64)).unwrap());
            }
        }
        r
    }

    /// Coefficients of the powers of variable `i` (each with exponent of `i`
    /// zeroed out).
    pub fn coeffs_in(&self, i: usize) -> BTreeMap<u32, MultiPoly> {
        let mut out: BTreeMap<u32, MultiPoly> = BTreeMap::new();
        for (m, c) in &self.terms {
            let e = m.0[i];
            let mut m2 = m.clone();
            m2.0[i] = 0;
            out.entry(e)
                .or_insert_with(|| MultiPoly::zero(&self.field, self.nvars))
                .insert_term(m2, c.clone());
        }
        out.retain(|_, p| !p.is_zero());
        out
    }

    /// Divide by leading coefficient so the graded-lex leading coefficient is 1.
    pub fn monic(&self) -> MultiPoly {
        if self.is_zero() {
            return self.clone();
        }
        let lc = self.leading_coeff();
        self.mul_scalar(&lc.inv().expect("nonzero leading coefficient"))
    }

    /// Exact division; `None` if `d` does not divide `self`.
    pub fn exact_div(&self, d: &MultiPoly) -> Option<MultiPoly> {
        assert!(!d.is_zero(), "division by zero polynomial");
        let mut rem = self.clone();
        let mut quo = MultiPoly::zero(&self.field, self.nvars);
        let (dm, dc) = {
            let (m, c) = d.leading().unwrap();
            (m.clone(), c.clone())
        };
        let dc_inv = dc.inv().unwrap();
        while !rem.is_zero() {
            let (rm, rc) = {
                let (m, c) = rem.leading().unwrap();
                (m.clone(), c.clone())
            };
            if !dm.divides(&rm) {
                return None;
            }
            let qm = rm.div(&dm);
            let qc = rc.mul(&dc_inv).unwrap();
            // Subtract qc * x^qm * d from the remainder in place.
            for (m2, c2) in &d.terms {
                rem.insert_term(qm.mul(m2), qc.mul(c2).unwrap().neg());
            }
            quo.insert_term(qm, qc);
        }
        Some(quo)
    }

    /// Pseudo-remainder of `self` by `d` in variable `m`:
    /// lc(d)^(deg self - deg d + 1) * self ≡ prem (mod d).
    fn prem(&self, d: &MultiPoly, v: usize) -> MultiPoly {
        let dd = d.degree_in(v);
        let dcoeffs = d.coeffs_in(v);
        let dlc = dcoeffs.get(&dd).unwrap().clone();
        let mut r = self.clone();
        while !r.is_zero() && r.degree_in(v) >= dd {
            let rd = r.degree_in(v);
            let rcoeffs = r.coeffs_in(v);
            let rlc = rcoeffs.get(&rd).unwrap().clone();
            // r := dlc * r - rlc * x_v^(rd-dd) * d
            let mut shift = MultiPoly::zero(&self.field, self.nvars);
            shift.insert_term(
                {
                    let mut m = Mono::one(self.nvars);
                    m.0[v] = rd - dd;
                    m
                },
                self.field.one(),
            );
            r = r.mul(&dlc).sub(&rlc.mul(&shift).mul(d));
        }
        r
    }

    /// Content of `self` viewed in k[other vars][x_v]: gcd of the coefficient
    /// polynomials.
    fn content_in(&self, v: usize) -> MultiPoly {
        let coeffs = self.coeffs_in(v);
        let mut g = MultiPoly::zero(&self.field, self.nvars);
        for p in coeffs.values() {
            g = poly_gcd(&g, p);
            if g.is_constant() && !g.is_zero() {
                break;
            }
        }
        g
    }

    /// Common monomial factor of all terms.
    fn monomial_content(&self) -> Mono {
        let mut m = match self.terms.keys().next() {
            Some(m) => m.clone(),
            None => return Mono::one(self.nvars),
        };
        for k in self.terms.keys() {
            for (a, b) in m.0.iter_mut().zip(&k.0) {
                *a = (*a).min(*b);
            }
        }
        m
    }

    fn div_monomial(&self, m: &Mono) -> MultiPoly {
        let mut r = MultiPoly::zero(&self.field, self.nvars);
        for (k, c) in &self.terms {
            r.insert_term(k.div(m), c.clone());
        }
        r
    }

    pub fn to_string_with(&self, names: &[&str]) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut parts = Vec::new();
        // print highest terms first
        for (m, c) in self.terms.iter().rev() {
            let mut factors = Vec::new();
            let cs = format!("{}", c);
            let is_one = cs == "1";
            let is_minus_one = cs == "-1";
            for (i, &e) in m.0.iter().enumerate() {
                if e == 1 {
                    factors.push(names[i].to_string());
                } else if e > 1 {
                    factors.push(format!("{}^{}", names[i], e));
                }
            }
            let body = if factors.is_empty() {
                cs.clone()
            } else if is_one {
                factors.join("*")
            } else if is_minus_one {
                format!("-{}", factors.join("*"))
            } else if cs.contains('+') || (cs.rfind('-').unwrap_or(0) > 0) || cs.contains('*') {
                format!("({})*{}", cs, factors.join("*"))
            } else {
                format!("{}*{}", cs, factors.join("*"))
            };
            parts.push(body);
        }
        let mut s = String::new();
        for (i, p) in parts.iter().enumerate() {
            if i == 0 {
                s.push_str(p);
            } else if let Some(stripped) = p.strip_prefix('-') {
                s.push_str(" - ");
                s.push_str(stripped);
            } else {
                s.push_str(" + ");
                s.push_str(p);
            }
        }
        s
    }
}

/// GCD of multivariate polynomials over a field, normalized monic.
/// Primitive pseudo-remainder sequence with monomial fast paths.
pub fn poly_gcd(f: &MultiPoly, g: &MultiPoly) -> MultiPoly {
    if f.is_zero() {
        return g.monic();
    }
    if g.is_zero() {
        return f.monic();
    }
    if f.is_constant() || g.is_constant() {
        // field coefficients: any nonzero constant is a unit
        let mf = f.monomial_content();
        let mg = g.monomial_content();
        let mut common = mf;
        for (a, b) in common.0.iter_mut().zip(&mg.0) {
            *a = (*a).min(*b);
        }
        let mut r = MultiPoly::zero(&f.field, f.nvars);
        r.insert_term(common, f.field.one());
        return r;
    }
    // split off monomial contents
    let mf = f.monomial_content();
    let mg = g.monomial_content();
    let mut mcommon = mf.clone();
    for (a, b) in mcommon.0.iter_mut().zip(&mg.0) {
        *a = (*a).min(*b);
    }
    let f1 = f.div_monomial(&mf);
    let g1 = g.div_monomial(&mg);
    let core = match (&f.field, heu::poly_gcd_heuristic(&f1, &g1)) {
        (FieldDescriptor::Rationals, Some(h)) => h,
        _ => poly_gcd_primitive(&f1, &g1),
    };
    let mut mono = MultiPoly::zero(&f.field, f.nvars);
    mono.insert_term(mcommon, f.field.one());
    core.mul(&mono).monic()
}

/// Heuristic multivariate gcd over the rationals: clear denominators,
/// evaluate one variable at a large integer, recurse, reconstruct the
/// candidate xi-adically, and verify by exact trial division.  Falls
/// back (returns `None`) when unlucky.
mod heu {
    use super::*;
    use num::bigint::Sign;
    use num::{BigInt, BigRational, Integer, Zero as _};

    /// Entry point; inputs must be nonzero with rational coefficients.
    pub fn poly_gcd_heuristic(f: &MultiPoly, g: &MultiPoly) -> Option<MultiPoly> {
        if f.field != FieldDescriptor::Rationals {
            return None;
        }
        let fi = clear_denoms(f);
        let gi = clear_denoms(g);
        let h = gcdheu(&fi, &gi, 0)?;
        Some(h.monic())
    }

    /// Scale to integer coefficients (content is irrelevant for gcd over
    /// a field).
    fn clear_denoms(f: &MultiPoly) -> MultiPoly {
        let mut l = BigInt::from(1u32);
        for c in f.terms.values() {
            let r = c.as_rational().unwrap();
            l = l.lcm(r.denom());
        }
        let s = Scalar::rational(BigRational::from(l));
        f.mul_scalar(&s)
    }

    fn int_content(f: &MultiPoly) -> BigInt {
        let mut g = BigInt::from(0u32);
        for c in f.terms.values() {
            g = g.gcd(c.as_rational().unwrap().numer());
            if g == BigInt::from(1u32) {
                break;
            }
        }
        g
    }

    fn div_int(f: &MultiPoly, n: &BigInt) -> MultiPoly {
        let s = Scalar::rational(BigRational::new(BigInt::from(1u32), n.clone()));
        f.mul_scalar(&s)
    }

    fn max_norm(f: &MultiPoly) -> BigInt {
        let mut m = BigInt::from(0u32);
        for c in f.terms.values() {
            let a = c.as_rational().unwrap().numer().magnitude().clone();
            let a = BigInt::from_biguint(Sign::Plus, a);
            if a > m {
                m = a;
            }
        }
        m
    }

    /// Substitute `x_v = n`.
    fn eval_var(f: &MultiPoly, v: usize, n: &BigInt) -> MultiPoly {
        let mut out = MultiPoly::zero(&f.field, f.nvars);
        for (e, coeff) in f.coeffs_in(v) {
            let p = n.pow(e);
            let s = Scalar::rational(BigRational::from(p));
            out = out.add(&coeff.mul_scalar(&s));
        }
        out
    }

    /// Balanced remainder mod xi, per coefficient.
    fn balanced_mod(f: &MultiPoly, xi: &BigInt) -> MultiPoly {
        let half = xi / 2;
        let mut out = MultiPoly::zero(&f.field, f.nvars);
        for (m, c) in &f.terms {
            let n = c.as_rational().unwrap().numer();
            let mut r = n.mod_floor(xi);
            if r > half {
                r -= xi;
            }
            if !r.is_zero() {
                out.insert_term(m.clone(), Scalar::rational(BigRational::from(r)));
            }
        }
        out
    }

    fn gcdheu(f: &MultiPoly, g: &MultiPoly, depth: usize) -> Option<MultiPoly> {
        if depth > 32 {
            return None;
        }
        let cf = int_content(f);
        let cg = int_content(g);
        let cc = cf.gcd(&cg);
        let fp = div_int(f, &cf);
        let gp = div_int(g, &cg);
        let ccp = MultiPoly::constant(
            Scalar::rational(BigRational::from(cc)),
            f.nvars,
        );
        let v = match (0..f.nvars).find(|&i| fp.uses_var(i) || gp.uses_var(i)) {
            Some(v) => v,
            None => return Some(ccp),
        };
        if fp.is_constant() || gp.is_constant() {
            return Some(ccp);
        }
        let two = BigInt::from(2u32);
        let norm = max_norm(&fp).min(max_norm(&gp));
        let mut xi: BigInt = &two * &norm + &two + &two;
        for _ in 0..6 {
            if xi.bits() > 100_000 {
                return None;
            }
            let fv = eval_var(&fp, v, &xi);
            let gv = eval_var(&gp, v, &xi);
            if !fv.is_zero() && !gv.is_zero() {
                if let Some(gamma) = gcdheu(&fv, &gv, depth + 1) {
                    // xi-adic reconstruction in x_v.
                    let mut h = MultiPoly::zero(&f.field, f.nvars);
                    let mut rest = gamma;
                    let mut e: u32 = 0;
                    while !rest.is_zero() && e < 4096 {
                        let c = balanced_mod(&rest, &xi);
                        if !c.is_zero() {
                            let mut mono = MultiPoly::zero(&f.field, f.nvars);
                            let mut m = Mono::one(f.nvars);
                            m.0[v] = e;
                            mono.insert_term(m, f.field.one());
                            h = h.add(&c.mul(&mono));
                            rest = rest.sub(&c);
                        }
                        rest = div_int(&rest, &xi);
                        e += 1;
                    }
                    if !h.is_zero() {
                        let ch = int_content(&h);
                        let hp = div_int(&h, &ch);
                        if fp.exact_div(&hp).is_some() && gp.exact_div(&hp).is_some() {
                            return Some(hp.mul(&ccp));
                        }
                    }
                }
            }
            // next evaluation point: grow by an irrational-ish ratio
            xi = &xi * BigInt::from(73794u32) / BigInt::from(27011u32)
                + BigInt::from(37u32);
        }
        None
    }
}

fn poly_gcd_primitive(f: &MultiPoly, g: &MultiPoly) -> MultiPoly {
    // cheap exact-division checks
    if f.terms.len() <= g.terms.len() && g.exact_div(f).is_some() {
        return f.monic();
    }
    if g.terms.len() < f.terms.len() && f.exact_div(g).is_some() {
        return g.monic();
    }
    // main variable: lowest index used by both; if none shared, gcd of
    // contents only.
    let mut v = None;
    for i in 0..f.nvars {
        if f.uses_var(i) && g.uses_var(i) {
            v = Some(i);
            break;
        }
    }
    let v = match v {
        Some(v) => v,
        None => {
            // no shared variable: gcd is gcd of all coefficients = 1 (field)
            return MultiPoly::one(&f.field, f.nvars);
        }
    };
    let cf = f.content_in(v);
    let cg = g.content_in(v);
    let c = poly_gcd(&cf, &cg);
    let pf = f.exact_div(&cf).unwrap();
    let pg = g.exact_div(&cg).unwrap();
    let (mut a, mut b) = if pf.degree_in(v) >= pg.degree_in(v) {
        (pf, pg)
    } else {
        (pg, pf)
    };
    loop {
        let r = a.prem(&b, v);
        if r.is_zero() {
            let cb = b.content_in(v);
            let pb = b.exact_div(&cb).unwrap();
            return c.mul(&pb).monic();
        }
        if r.degree_in(v) == 0 {
            return c.monic();
        }
        let cr = r.content_in(v);
        let pr = r.exact_div(&cr).unwrap();
        a = b;
        b = pr;
    }
}

/// If `f = c·h²` for a scalar `c` and squarefree `h`, return `(h, c)`.
pub fn poly_sqrt_up_to_scalar(f: &MultiPoly) -> Option<(MultiPoly, Scalar)> {
    if f.is_zero() {
        return Some((f.clone(), f.field.one()));
    }
    if f.is_constant() {
        return Some((MultiPoly::one(&f.field, f.nvars), f.constant_value()));
    }
    let v = (0..f.nvars).find(|&i| f.uses_var(i))?;
    let d = f.derivative(v);
    let g = poly_gcd(f, &d);
    if g.is_zero() {
        return None;
    }
    let q = f.exact_div(&g)?; // q = c·h up to scalar when f = c·h²
    if q.is_zero() {
        return None;
    }
    // f = c * h^2 with h = q / c  =>  q^2 = c * f
    let q2 = q.mul(&q);
    let c = q2.exact_div(f)?;
    if !c.is_constant() {
        return None;
    }
    let cval = c.constant_value();
    if cval.is_zero() {
        return None;
    }
    let h = q.mul_scalar(&cval.inv().unwrap());
    // verify exactly: c * h^2 == f
    if h.mul(&h).mul_scalar(&cval) == *f {
        Some((h, cval))
    } else {
        None
    }
}

/// Reduced rational function: num/den with gcd(num, den) = 1 and den monic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatFunc {
    pub num: MultiPoly,
    pub den: MultiPoly,
}

impl RatFunc {
    pub fn new(num: MultiPoly, den: MultiPoly) -> RatFunc {
        assert!(!den.is_zero(), "zero denominator");
        let mut r = RatFunc { num, den };
        r.reduce();
        r
    }

    pub fn from_poly(p: MultiPoly) -> RatFunc {
        let den = MultiPoly::one(&p.field, p.nvars);
        RatFunc { num: p, den }
    }

    pub fn zero(field: &FieldDescriptor, nvars: usize) -> RatFunc {
        Self::from_poly(MultiPoly::zero(field, nvars))
    }

    pub fn one(field: &FieldDescriptor, nvars: usize) -> RatFunc {
        Self::from_poly(MultiPoly::one(field, nvars))
    }

    pub fn constant(c: Scalar, nvars: usize) -> RatFunc {
        Self::from_poly(MultiPoly::constant(c, nvars))
    }

    pub fn var(field: &FieldDescriptor, nvars: usize, i: usize) -> RatFunc {
        Self::from_poly(MultiPoly::var(field, nvars, i))
    }

    fn reduce(&mut self) {
        if self.num.is_zero() {
            self.den = MultiPoly::one(&self.den.field, self.den.nvars);
            return;
        }
        if !self.den.is_constant() {
            let g = poly_gcd(&self.num, &self.den);
            if !g.is_constant() {
                self.num = self.num.exact_div(&g).unwrap();
                self.den = self.den.exact_div(&g).unwrap();
            }
        }
        let lc = self.den.leading_coeff();
        if format!("{}", lc) != "1" {
            let inv = lc.inv().unwrap();
            self.num = self.num.mul_scalar(&inv);
            self.den = self.den.mul_scalar(&inv);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_constant(&self) -> bool {
        self.num.is_constant() && self.den.is_constant()
    }

    pub fn add(&self, o: &RatFunc) -> RatFunc {
        RatFunc::new(
            self.num.mul(&o.den).add(&o.num.mul(&self.den)),
            self.den.mul(&o.den),
        )
    }

    pub fn sub(&self, o: &RatFunc) -> RatFunc {
        RatFunc::new(
            self.num.mul(&o.den).sub(&o.num.mul(&self.den)),
            self.den.mul(&o.den),
        )
    }

    pub fn neg(&self) -> RatFunc {
        RatFunc {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn mul(&self, o: &RatFunc) -> RatFunc {
        RatFunc::new(self.num.mul(&o.num), self.den.mul(&o.den))
    }

    pub fn div(&self, o: &RatFunc) -> RatFunc {
        assert!(!o.is_zero(), "division by zero rational function");
        RatFunc::new(self.num.mul(&o.den), self.den.mul(&o.num))
    }

    pub fn inv(&self) -> Option<RatFunc> {
        if self.is_zero() {
            None
        } else {
            Some(RatFunc::new(self.den.clone(), self.num.clone()))
        }
    }

    /// Exact evaluation; `None` if the denominator vanishes at the point.
    pub fn eval(&self, vals: &[Scalar]) -> Option<Scalar> {
        let d = self.den.eval(vals);
        if d.is_zero() {
            return None;
        }
        Some(self.num.eval(vals).mul(&d.inv().unwrap()).unwrap())
    }

    /// Substitute `vals[i]` (a rational function) for variable `i` in a
    /// polynomial, for every variable that has a substitution.
    pub fn eval_poly(p: &MultiPoly, vals: &BTreeMap<usize, RatFunc>) -> RatFunc {
        let (num, den) = Self::eval_poly_parts(p, vals);
        RatFunc::new(num, den)
    }

    /// Like `eval_poly`, but returns the raw numerator and the common
    /// denominator without reducing them.  The denominator is a product
    /// of the substituted denominators, so the numerator equals the
    /// reduced one up to such factors.  Building the result over one
    /// common denominator avoids per-term gcd work.
    pub fn eval_poly_parts(p: &MultiPoly, vals: &BTreeMap<usize, RatFunc>) -> (MultiPoly, MultiPoly) {
        let one = MultiPoly::one(&p.field, p.nvars);
        // Highest power of each substituted variable appearing in `p`.
        let mut maxdeg: BTreeMap<usize, usize> = BTreeMap::new();
        for (m, _) in &p.terms {
            for (i, &e) in m.0.iter().enumerate() {
                if e > 0 && vals.contains_key(&i) {
                    let d = maxdeg.entry(i).or_insert(0);
                    *d = (*d).max(e as usize);
                }
            }
        }
        // Power tables for each substituted numerator and denominator.
        let mut npow: BTreeMap<usize, Vec<MultiPoly>> = BTreeMap::new();
        let mut dpow: BTreeMap<usize, Vec<MultiPoly>> = BTreeMap::new();
        for (&i, &d) in &maxdeg {
            let v = &vals[&i];
            let mut ns = vec![one.clone()];
            let mut ds = vec![one.clone()];
            for k in 1..=d {
                ns.push(ns[k - 1].mul(&v.num));
                ds.push(ds[k - 1].mul(&v.den));
            }
            npow.insert(i, ns);
            dpow.insert(i, ds);
        }
        let mut num = MultiPoly::zero(&p.field, p.nvars);
        for (m, c) in &p.terms {
            // Unsubstituted part of the monomial, with its coefficient.
            let mut rest = Mono(vec![0; p.nvars]);
            for (i, &e) in m.0.iter().enumerate() {
                if !maxdeg.contains_key(&i) {
                    rest.0[i] = e;
                }
            }
            let mut t = MultiPoly::zero(&p.field, p.nvars);
            t.insert_term(rest, c.clone());
            for (&i, &d) in &maxdeg {
                let e = m.0[i] as usize;
                if e > 0 {
                    t = t.mul(&npow[&i][e]);
                }
                if d > e {
                    t = t.mul(&dpow[&i][d - e]);
                }
            }
            for (m2, c2) in t.terms {
                num.insert_term(m2, c2);
            }
        }
        let mut den = one;
        for (&i, &d) in &maxdeg {
            den = den.mul(&dpow[&i][d]);
        }
        (num, den)
    }

    pub fn to_string_with(&self, names: &[&str]) -> String {
        let n = self.num.to_string_with(names);
        if self.den.is_constant() {
            // den is monic constant = 1
            n
        } else {
            let d = self.den.to_string_with(names);
            let nn = if self.num.terms.len() > 1 {
                format!("({})", n)
            } else {
                n
            };
            let bare = d.chars().all(|c| c.is_alphanumeric() || c == '_');
            let dd = if bare { d } else { format!("({})", d) };
            format!("{}/{}", nn, dd)
        }
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = (0..self.nvars).map(|i| format!("x{}", i)).collect();
        let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        write!(f, "{}", self.to_string_with(&refs))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldDescriptor;
    use rand::Rng;
    use rand::SeedableRng;

    fn qq() -> FieldDescriptor {
        FieldDescriptor::rationals()
    }

    fn v(i: usize, n: usize) -> MultiPoly {
        MultiPoly::var(&qq(), n, i)
    }

    fn c(x: i64, n: usize) -> MultiPoly {
        MultiPoly::constant(Scalar::from_i64(&qq(), x), n)
    }

    #[test]
    fn expand_identity() {
        // (a-1)(b-1) - (ab - a - b + 1) == 0
        let n = 2;
        let a = v(0, n);
        let b = v(1, n);
        let one = c(1, n);
        let lhs = a.sub(&one).mul(&b.sub(&one));
        let rhs = a.mul(&b).sub(&a).sub(&b).add(&one);
        assert!(lhs.sub(&rhs).is_zero());
    }

    #[test]
    fn substitution_identity() {
        // substituting a = b/(b-1) into (a-1)(b-1) gives 1
        let n = 2;
        let a = v(0, n);
        let b = v(1, n);
        let one = c(1, n);
        let expr = a.sub(&one).mul(&b.sub(&one));
        let sub = RatFunc::new(b.clone(), b.sub(&one));
        let mut vals = BTreeMap::new();
        vals.insert(0usize, sub);
        let r = RatFunc::eval_poly(&expr, &vals);
        assert_eq!(r, RatFunc::one(&qq(), n));
    }

    #[test]
    fn gcd_and_reduction() {
        let n = 3;
        let a = v(0, n);
        let b = v(1, n);
        let cvar = v(2, n);
        let p = a.add(&b); // a+b
        let q = a.sub(&cvar); // a-c
        let f = p.mul(&q).mul(&p); // (a+b)^2 (a-c)
        let g = p.mul(&q).mul(&q); // (a+b)(a-c)^2
        let gc = poly_gcd(&f, &g);
        let expected = p.mul(&q).monic();
        assert_eq!(gc, expected);
        let r = RatFunc::new(f, g);
        assert_eq!(r.num, p.monic().mul_scalar(&r.den.leading_coeff()).monic());
        assert_eq!(r.den, q.monic());
    }

    #[test]
    fn ratfunc_arith() {
        let n = 2;
        let a = v(0, n);
        let b = v(1, n);
        let one = RatFunc::one(&qq(), n);
        // 1/(a-b) + 1/(b-a) = 0
        let x = RatFunc::new(c(1, n), a.sub(&b));
        let y = RatFunc::new(c(1, n), b.sub(&a));
        assert!(x.add(&y).is_zero());
        // (a/b) * (b/a) = 1
        let p = RatFunc::new(a.clone(), b.clone());
        let q = RatFunc::new(b.clone(), a.clone());
        assert_eq!(p.mul(&q), one);
    }

    #[test]
    fn eval_homomorphism() {
        // eval(f*g) == eval(f)*eval(g) on random rational points
        let n = 3;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let mut rand_poly = || {
                let mut p = MultiPoly::zero(&qq(), n);
                for _ in 0..4 {
                    let mut m = Mono::one(n);
                    for e in m.0.iter_mut() {
                        *e = rng.gen_range(0..3);
                    }
                    let coef = Scalar::from_i64(&qq(), rng.gen_range(-5..6));
                    let mut t = MultiPoly::zero(&qq(), n);
                    t.insert_term(m, coef);
                    p = p.add(&t);
                }
                p
            };
            let f = rand_poly();
            let g = rand_poly();
            let pt: Vec<Scalar> = (0..n)
                .map(|_| Scalar::from_i64(&qq(), rng.gen_range(-4..5)))
                .collect();
            assert_eq!(f.mul(&g).eval(&pt), f.eval(&pt).mul(&g.eval(&pt)).unwrap());
        }
    }

    #[test]
    fn sqrt_up_to_scalar() {
        let n = 2;
        let a = v(0, n);
        let b = v(1, n);
        // f = -3 * ((a-1)(a-b))^2
        let h = a.sub(&c(1, n)).mul(&a.sub(&b));
        let f = h.mul(&h).mul_scalar(&Scalar::from_i64(&qq(), -3));
        let (h2, cv) = poly_sqrt_up_to_scalar(&f).unwrap();
        assert_eq!(h2.mul(&h2).mul_scalar(&cv), f);
        assert_eq!(format!("{}", cv.mul(&h2.leading_coeff().pow(2)).unwrap()), "-3");
        // not a square times scalar
        let g = a.mul(&b).add(&c(1, n));
        assert!(poly_sqrt_up_to_scalar(&g).is_none());
    }

    #[test]
    fn exact_division() {
        let n = 2;
        let a = v(0, n);
        let b = v(1, n);
        let f = a.pow(3).sub(&b.pow(3));
        let d = a.sub(&b);
        let q = f.exact_div(&d).unwrap();
        let expect = a.mul(&a).add(&a.mul(&b)).add(&b.mul(&b));
        assert_eq!(q, expect);
        assert!(f.exact_div(&a.add(&b)).is_none());
    }
}
