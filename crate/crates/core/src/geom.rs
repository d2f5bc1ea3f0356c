//! Projective geometry over an exact field: points of P^n, lines of P^2,
//! span lines of P^n, projectivities, and incidence operations.

use crate::field::{FieldDescriptor, FieldError, FieldResult, Scalar};
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum GeomError {
    #[error("all coordinates are zero")]
    ZeroVector,
    #[error("matrix is singular")]
    Singular,
    #[error("points or lines coincide")]
    Coincident,
    #[error("frame points are not in general position")]
    DegenerateFrame,
    #[error("dimension mismatch")]
    Dimension,
    #[error(transparent)]
    Field(#[from] FieldError),
}

fn canonicalize(coords: &mut [Scalar]) -> Result<(), GeomError> {
    let lead = coords
        .iter()
        .find(|c| !c.is_zero())
        .cloned()
        .ok_or(GeomError::ZeroVector)?;
    let inv = lead.inv()?;
    for c in coords.iter_mut() {
        *c = c.mul(&inv)?;
    }
    Ok(())
}

fn cross(a: &[Scalar], b: &[Scalar]) -> FieldResult<[Scalar; 3]> {
    let m = |i: usize, j: usize| -> FieldResult<Scalar> {
        a[i].mul(&b[j])?.sub(&a[j].mul(&b[i])?)
    };
    Ok([m(1, 2)?, m(2, 0)?, m(0, 1)?])
}

/// Exact determinant of a square Scalar matrix by fraction-free-enough
/// Gaussian elimination (we are over a field, so plain division works).
pub fn det(rows: &[Vec<Scalar>]) -> FieldResult<Scalar> {
    let n = rows.len();
    let field = rows[0][0].field().clone();
    let mut m: Vec<Vec<Scalar>> = rows.to_vec();
    let mut acc = field.one();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !m[r][col].is_zero());
        let pivot = match pivot {
            Some(p) => p,
            None => return Ok(field.zero()),
        };
        if pivot != col {
            m.swap(pivot, col);
            acc = acc.neg();
        }
        let pv = m[col][col].clone();
        acc = acc.mul(&pv)?;
        let inv = pv.inv()?;
        for r in (col + 1)..n {
            if m[r][col].is_zero() {
                continue;
            }
            let factor = m[r][col].mul(&inv)?;
            for c in col..n {
                let delta = factor.mul(&m[col][c])?;
                m[r][c] = m[r][c].sub(&delta)?;
            }
        }
    }
    Ok(acc)
}

/// Point of P^n in canonical coordinates (first nonzero coordinate is 1).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProjPoint {
    coords: Vec<Scalar>,
}

/// Line of P^2, stored by its canonical coefficient triple (ax+by+cz = 0).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProjLine {
    coeffs: [Scalar; 3],
}

impl ProjPoint {
    pub fn new(mut coords: Vec<Scalar>) -> Result<Self, GeomError> {
        if coords.len() < 2 {
            return Err(GeomError::Dimension);
        }
        canonicalize(&mut coords)?;
        Ok(ProjPoint { coords })
    }

    pub fn from_i64(field: &FieldDescriptor, v: &[i64]) -> Result<Self, GeomError> {
        ProjPoint::new(v.iter().map(|&x| Scalar::from_i64(field, x)).collect())
    }

    pub fn coords(&self) -> &[Scalar] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len() - 1
    }

    pub fn field(&self) -> &FieldDescriptor {
        self.coords[0].field()
    }

    /// Line of P^2 through two distinct points.
    pub fn join(&self, other: &ProjPoint) -> Result<ProjLine, GeomError> {
        if self.dim() != 2 || other.dim() != 2 {
            return Err(GeomError::Dimension);
        }
        let c = cross(&self.coords, &other.coords)?;
        if c.iter().all(|x| x.is_zero()) {
            return Err(GeomError::Coincident);
        }
        ProjLine::new(c)
    }
}

impl ProjLine {
    pub fn new(mut coeffs: [Scalar; 3]) -> Result<Self, GeomError> {
        canonicalize(&mut coeffs)?;
        Ok(ProjLine { coeffs })
    }

    pub fn from_i64(field: &FieldDescriptor, v: [i64; 3]) -> Result<Self, GeomError> {
        ProjLine::new(v.map(|x| Scalar::from_i64(field, x)))
    }

    pub fn coeffs(&self) -> &[Scalar; 3] {
        &self.coeffs
    }

    pub fn field(&self) -> &FieldDescriptor {
        self.coeffs[0].field()
    }

    /// Intersection point of two distinct lines.
    pub fn meet(&self, other: &ProjLine) -> Result<ProjPoint, GeomError> {
        let c = cross(&self.coeffs, &other.coeffs)?;
        if c.iter().all(|x| x.is_zero()) {
            return Err(GeomError::Coincident);
        }
        ProjPoint::new(c.to_vec())
    }

    /// Value of the defining form at a point (well defined up to scale;
    /// zero iff incident thanks to canonical representatives).
    pub fn eval(&self, p: &ProjPoint) -> Result<Scalar, GeomError> {
        if p.dim() != 2 {
            return Err(GeomError::Dimension);
        }
        let mut acc = self.coeffs[0].field().zero();
        for i in 0..3 {
            acc = acc.add(&self.coeffs[i].mul(&p.coords()[i])?)?;
        }
        Ok(acc)
    }

    pub fn contains(&self, p: &ProjPoint) -> Result<bool, GeomError> {
        Ok(self.eval(p)?.is_zero())
    }
}

impl fmt::Display for ProjPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coords.iter().map(|c| c.to_string()).collect();
        write!(f, "[{}]", parts.join(" : "))
    }
}

impl fmt::Display for ProjLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} : {} : {})", self.coeffs[0], self.coeffs[1], self.coeffs[2])
    }
}

/// Line of P^n given by an ordered pair of distinct spanning points.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpanLine {
    pub a: ProjPoint,
    pub b: ProjPoint,
}

impl SpanLine {
    pub fn new(a: ProjPoint, b: ProjPoint) -> Result<Self, GeomError> {
        if a.dim() != b.dim() {
            return Err(GeomError::Dimension);
        }
        if a == b {
            return Err(GeomError::Coincident);
        }
        Ok(SpanLine { a, b })
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    /// Point a*t + b*u for [t:u] in P^1.
    pub fn at(&self, t: &Scalar, u: &Scalar) -> Result<ProjPoint, GeomError> {
        let mut coords = Vec::with_capacity(self.a.coords().len());
        for (x, y) in self.a.coords().iter().zip(self.b.coords()) {
            coords.push(x.mul(t)?.add(&y.mul(u)?)?);
        }
        ProjPoint::new(coords)
    }

    pub fn contains(&self, p: &ProjPoint) -> FieldResult<bool> {
        // rank of the 3 x (n+1) matrix stays 2
        let n = p.coords().len();
        for i in 0..n {
            for j in (i + 1)..n {
                for k in (j + 1)..n {
                    let rows = vec![
                        vec![
                            self.a.coords()[i].clone(),
                            self.a.coords()[j].clone(),
                            self.a.coords()[k].clone(),
                        ],
                        vec![
                            self.b.coords()[i].clone(),
                            self.b.coords()[j].clone(),
                            self.b.coords()[k].clone(),
                        ],
                        vec![
                            p.coords()[i].clone(),
                            p.coords()[j].clone(),
                            p.coords()[k].clone(),
                        ],
                    ];
                    if !det(&rows)?.is_zero() {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    }
}

/// Invertible projectivity of P^2, acting on column vectors of point
/// coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjMap {
    mat: [[Scalar; 3]; 3],
}

fn det3(m: &[[Scalar; 3]; 3]) -> FieldResult<Scalar> {
    let mut acc = m[0][0].field().zero();
    for i in 0..3 {
        let j = (i + 1) % 3;
        let k = (i + 2) % 3;
        // cyclic column indices carry the cofactor sign already
        let minor = m[1][j].mul(&m[2][k])?.sub(&m[1][k].mul(&m[2][j])?)?;
        acc = acc.add(&m[0][i].mul(&minor)?)?;
    }
    Ok(acc)
}

impl ProjMap {
    pub fn new(mat: [[Scalar; 3]; 3]) -> Result<Self, GeomError> {
        if det3(&mat)?.is_zero() {
            return Err(GeomError::Singular);
        }
        Ok(ProjMap { mat })
    }

    pub fn identity(field: &FieldDescriptor) -> Self {
        let e = |i: usize, j: usize| Scalar::from_i64(field, (i == j) as i64);
        ProjMap {
            mat: std::array::from_fn(|i| std::array::from_fn(|j| e(i, j))),
        }
    }

    pub fn matrix(&self) -> &[[Scalar; 3]; 3] {
        &self.mat
    }

    fn cofactor(&self, i: usize, j: usize) -> FieldResult<Scalar> {
        let r = [(i + 1) % 3, (i + 2) % 3];
        let c = [(j + 1) % 3, (j + 2) % 3];
        self.mat[r[0]][c[0]]
            .mul(&self.mat[r[1]][c[1]])?
            .sub(&self.mat[r[0]][c[1]].mul(&self.mat[r[1]][c[0]])?)
    }

    /// Adjugate matrix; projectively this is the inverse map.
    pub fn inverse(&self) -> Result<ProjMap, GeomError> {
        let mut adj = std::array::from_fn::<_, 3, _>(|_| {
            std::array::from_fn::<_, 3, _>(|_| self.mat[0][0].field().zero())
        });
        for (i, row) in adj.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e = self.cofactor(j, i)?; // transpose of cofactors
            }
        }
        ProjMap::new(adj)
    }

    pub fn apply(&self, p: &ProjPoint) -> Result<ProjPoint, GeomError> {
        if p.dim() != 2 {
            return Err(GeomError::Dimension);
        }
        let v = p.coords();
        let mut out = vec![v[0].field().zero(); 3];
        for (i, row) in self.mat.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                out[i] = out[i].add(&e.mul(&v[j])?)?;
            }
        }
        ProjPoint::new(out)
    }

    /// Lines transform by the inverse transpose.
    pub fn apply_line(&self, l: &ProjLine) -> Result<ProjLine, GeomError> {
        let inv = self.inverse()?;
        let v = l.coeffs();
        let mut out = std::array::from_fn::<_, 3, _>(|_| v[0].field().zero());
        for (i, row) in inv.mat.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                out[j] = out[j].add(&e.mul(&v[i])?)?;
            }
        }
        ProjLine::new(out)
    }

    pub fn compose(&self, other: &ProjMap) -> Result<ProjMap, GeomError> {
        let z = self.mat[0][0].field().zero();
        let mut out =
            std::array::from_fn::<_, 3, _>(|_| std::array::from_fn::<_, 3, _>(|_| z.clone()));
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    out[i][j] = out[i][j].add(&self.mat[i][k].mul(&other.mat[k][j])?)?;
                }
            }
        }
        ProjMap::new(out)
    }

    /// Unique projectivity sending the standard frame e1, e2, e3,
    /// e1+e2+e3 to the four given points (in general position).
    pub fn from_frame(pts: &[ProjPoint; 4]) -> Result<ProjMap, GeomError> {
        if !general_position(pts)? {
            return Err(GeomError::DegenerateFrame);
        }
        // solve [p1 p2 p3] * (l1,l2,l3)^T = p4 by Cramer's rule
        let col = |k: usize| -> [Scalar; 3] {
            std::array::from_fn(|i| pts[k].coords()[i].clone())
        };
        let m = |c0: [Scalar; 3], c1: [Scalar; 3], c2: [Scalar; 3]| {
            std::array::from_fn::<_, 3, _>(|i| [c0[i].clone(), c1[i].clone(), c2[i].clone()])
        };
        let base = m(col(0), col(1), col(2));
        let d = det3(&base)?;
        let lam = [
            det3(&m(col(3), col(1), col(2)))?.div(&d)?,
            det3(&m(col(0), col(3), col(2)))?.div(&d)?,
            det3(&m(col(0), col(1), col(3)))?.div(&d)?,
        ];
        let mut mat = base;
        for (j, l) in lam.iter().enumerate() {
            for row in mat.iter_mut() {
                row[j] = row[j].mul(l)?;
            }
        }
        ProjMap::new(mat)
    }

    /// Unique projectivity sending one general-position frame to another.
    pub fn frame_transport(
        src: &[ProjPoint; 4],
        dst: &[ProjPoint; 4],
    ) -> Result<ProjMap, GeomError> {
        let a = ProjMap::from_frame(src)?;
        let b = ProjMap::from_frame(dst)?;
        b.compose(&a.inverse()?)
    }
}

/// True iff the n+2 supplied points of P^n have every (n+1)-subset
/// linearly independent.
pub fn general_position(pts: &[ProjPoint]) -> Result<bool, GeomError> {
    let n = pts[0].dim();
    if pts.len() != n + 2 {
        return Err(GeomError::Dimension);
    }
    for skip in 0..pts.len() {
        let rows: Vec<Vec<Scalar>> = pts
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != skip)
            .map(|(_, p)| p.coords().to_vec())
            .collect();
        if det(&rows)?.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn qq() -> FieldDescriptor {
        FieldDescriptor::Rationals
    }

    fn pt(v: [i64; 3]) -> ProjPoint {
        ProjPoint::from_i64(&qq(), &v).unwrap()
    }

    fn ln(v: [i64; 3]) -> ProjLine {
        ProjLine::from_i64(&qq(), v).unwrap()
    }

    #[test]
    fn canonical_scaling() {
        assert_eq!(pt([2, 4, 6]), pt([1, 2, 3]));
        assert_eq!(pt([0, -3, 6]), pt([0, 1, -2]));
    }

    #[test]
    fn meet_and_join() {
        let x_axis = ln([0, 1, 0]); // y = 0
        let y_axis = ln([1, 0, 0]); // x = 0
        assert_eq!(x_axis.meet(&y_axis).unwrap(), pt([0, 0, 1]));
        let p = pt([1, 0, 1]);
        let q = pt([0, 1, 1]);
        let l = p.join(&q).unwrap();
        assert!(l.contains(&p).unwrap());
        assert!(l.contains(&q).unwrap());
        assert_eq!(l, ln([1, 1, -1]));
    }

    #[test]
    fn meet_of_equal_lines_fails() {
        let l = ln([1, 2, 3]);
        assert_eq!(l.meet(&ln([2, 4, 6])), Err(GeomError::Coincident));
    }

    #[test]
    fn hesse_line_meet_lands_on_l7() {
        // Hesse lines L2 = (x + wz) and L6 = (x + (1-w)y + z) meet on
        // L7 = (y + z), realizing the 4-point [[2,6,7,12]]
        use num::BigRational;
        use num::{BigInt, One};
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        let w = Scalar::quadratic(-3, half.clone(), half).unwrap();
        let f = w.field().clone();
        let one = f.one();
        let l2 = ProjLine::new([one.clone(), f.zero(), w.clone()]).unwrap();
        let l6 = ProjLine::new([one.clone(), one.sub(&w).unwrap(), one.clone()]).unwrap();
        let l7 = ProjLine::new([f.zero(), one.clone(), one.clone()]).unwrap();
        let l12 = ProjLine::new([one.sub(&w).unwrap(), one.neg(), f.zero()]).unwrap();
        let p = l2.meet(&l6).unwrap();
        assert!(l7.contains(&p).unwrap());
        assert!(l12.contains(&p).unwrap());
    }

    #[test]
    fn map_inverse_round_trip() {
        let f = qq();
        let s = |v: i64| Scalar::from_i64(&f, v);
        let m = ProjMap::new([
            [s(1), s(2), s(0)],
            [s(0), s(1), s(3)],
            [s(1), s(0), s(1)],
        ])
        .unwrap();
        let p = pt([3, -1, 2]);
        let q = m.apply(&p).unwrap();
        assert_eq!(m.inverse().unwrap().apply(&q).unwrap(), p);
    }

    #[test]
    fn incidence_preserved_by_random_maps() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let f = qq();
        let s = |rng: &mut rand_chacha::ChaCha8Rng| Scalar::from_i64(&f, rng.gen_range(-5..6));
        let mut done = 0;
        while done < 200 {
            let mat = std::array::from_fn::<_, 3, _>(|_| {
                std::array::from_fn::<_, 3, _>(|_| s(&mut rng))
            });
            let m = match ProjMap::new(mat) {
                Ok(m) => m,
                Err(_) => continue,
            };
            let a = [rng.gen_range(-5..6), rng.gen_range(-5..6), rng.gen_range(1..6)];
            let b = [rng.gen_range(-5..6), rng.gen_range(-5..6), rng.gen_range(1..6)];
            let p = pt(a);
            let q = pt(b);
            if p == q {
                continue;
            }
            let l = p.join(&q).unwrap();
            let lm = m.apply_line(&l).unwrap();
            assert!(lm.contains(&m.apply(&p).unwrap()).unwrap());
            assert!(lm.contains(&m.apply(&q).unwrap()).unwrap());
            done += 1;
        }
    }

    #[test]
    fn frame_transport_moves_frames() {
        let src = [pt([1, 0, 0]), pt([0, 1, 0]), pt([0, 0, 1]), pt([1, 1, 1])];
        let dst = [pt([1, 1, 0]), pt([0, 1, 1]), pt([1, 0, 1]), pt([1, 2, 4])];
        let t = ProjMap::frame_transport(&src, &dst).unwrap();
        for (s, d) in src.iter().zip(&dst) {
            assert_eq!(t.apply(s).unwrap(), *d);
        }
    }

    #[test]
    fn general_position_detects_collinear() {
        let good = [pt([1, 0, 0]), pt([0, 1, 0]), pt([0, 0, 1]), pt([1, 1, 1])];
        assert!(general_position(&good).unwrap());
        let bad = [pt([1, 0, 0]), pt([0, 1, 0]), pt([1, 1, 0]), pt([1, 1, 1])];
        assert!(!general_position(&bad).unwrap());
    }

    #[test]
    fn general_position_higher_dim_frame() {
        // standard frame e1..e4, (1,1,1,1) in P^3 (d = 5)
        let f = qq();
        let mut pts: Vec<ProjPoint> = (0..4)
            .map(|i| {
                let mut v = [0i64; 4];
                v[i] = 1;
                ProjPoint::from_i64(&f, &v).unwrap()
            })
            .collect();
        pts.push(ProjPoint::from_i64(&f, &[1, 1, 1, 1]).unwrap());
        assert!(general_position(&pts).unwrap());
    }

    #[test]
    fn general_position_matches_brute_force_over_gf7() {
        let f = FieldDescriptor::finite(7, 1, None).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        for _ in 0..50 {
            let pts: Vec<ProjPoint> = (0..4)
                .filter_map(|_| {
                    let v = [
                        rng.gen_range(0..7i64),
                        rng.gen_range(0..7i64),
                        rng.gen_range(1..7i64),
                    ];
                    ProjPoint::from_i64(&f, &v).ok()
                })
                .collect();
            if pts.len() < 4 {
                continue;
            }
            // oracle: expand each 3x3 minor directly
            let mut oracle = true;
            for skip in 0..4 {
                let sub: Vec<&ProjPoint> =
                    pts.iter().enumerate().filter(|(i, _)| *i != skip).map(|(_, p)| p).collect();
                let c = |r: usize, j: usize| sub[r].coords()[j].clone();
                let mut d = f.zero();
                for (perm, sign) in [
                    ([0, 1, 2], 1i64),
                    ([1, 2, 0], 1),
                    ([2, 0, 1], 1),
                    ([0, 2, 1], -1),
                    ([2, 1, 0], -1),
                    ([1, 0, 2], -1),
                ] {
                    let t = c(0, perm[0])
                        .mul(&c(1, perm[1]))
                        .unwrap()
                        .mul(&c(2, perm[2]))
                        .unwrap();
                    d = if sign == 1 { d.add(&t).unwrap() } else { d.sub(&t).unwrap() };
                }
                if d.is_zero() {
                    oracle = false;
                }
            }
            let quad: [ProjPoint; 4] = [
                pts[0].clone(),
                pts[1].clone(),
                pts[2].clone(),
                pts[3].clone(),
            ];
            assert_eq!(general_position(&quad).unwrap(), oracle);
        }
    }

    #[test]
    fn span_line_membership_and_parametrization() {
        let f = qq();
        let a = ProjPoint::from_i64(&f, &[1, 0, 0, 1]).unwrap();
        let b = ProjPoint::from_i64(&f, &[0, 1, 1, 0]).unwrap();
        let l = SpanLine::new(a.clone(), b.clone()).unwrap();
        let mid = l.at(&f.one(), &f.one()).unwrap();
        assert!(l.contains(&mid).unwrap());
        assert!(l.contains(&a).unwrap());
        let off = ProjPoint::from_i64(&f, &[1, 1, 0, 0]).unwrap();
        assert!(!l.contains(&off).unwrap());
    }
}
