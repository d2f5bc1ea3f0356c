//! Labeled line arrangements, their incidence combinatorics, and the
//! correspondence between pointed arrangements and lines in P^(d-2).

use crate::field::{FieldDescriptor, FieldError, Scalar};
use crate::geom::{general_position, GeomError, ProjLine, ProjMap, ProjPoint, SpanLine};
use num::rational::BigRational;
use num::{BigInt, Signed};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ArrangeError {
    #[error("an arrangement needs at least 3 lines")]
    TooFewLines,
    #[error("lines {0} and {1} coincide")]
    DuplicateLines(usize, usize),
    #[error("all lines share a common point")]
    CommonPoint,
    #[error("base point lies on line {0}")]
    BasePointOnLine(usize),
    #[error("deleted line {0} misses the base point")]
    PivotMismatch(usize),
    #[error("line is contained in the discriminant hyperplane ({0},{1})")]
    LineInsideDiscriminant(usize, usize),
    #[error("lambda does not pass through the base point")]
    LineMissesBasePoint,
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("bad serialized arrangement: {0}")]
    Format(String),
    #[error(transparent)]
    Geom(#[from] GeomError),
}

impl From<FieldError> for ArrangeError {
    fn from(e: FieldError) -> Self {
        ArrangeError::Geom(GeomError::Field(e))
    }
}

/// d >= 3 labeled lines with empty total intersection. Labels are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Arrangement {
    lines: Vec<ProjLine>,
}

impl Arrangement {
    pub fn new(lines: Vec<ProjLine>) -> Result<Self, ArrangeError> {
        if lines.len() < 3 {
            return Err(ArrangeError::TooFewLines);
        }
        for i in 0..lines.len() {
            for j in (i + 1)..lines.len() {
                if lines[i] == lines[j] {
                    return Err(ArrangeError::DuplicateLines(i + 1, j + 1));
                }
            }
        }
        // a common point would have to be L1 meet L2
        let p = lines[0].meet(&lines[1])?;
        let mut common = true;
        for l in &lines[2..] {
            if !l.contains(&p)? {
                common = false;
                break;
            }
        }
        if common {
            return Err(ArrangeError::CommonPoint);
        }
        Ok(Arrangement { lines })
    }

    pub fn d(&self) -> usize {
        self.lines.len()
    }

    pub fn lines(&self) -> &[ProjLine] {
        &self.lines
    }

    /// Line by 1-based label.
    pub fn line(&self, label: usize) -> &ProjLine {
        &self.lines[label - 1]
    }

    pub fn field(&self) -> &FieldDescriptor {
        self.lines[0].field()
    }

    /// Complete incidence table of the arrangement.
    pub fn k_points(&self) -> Result<KPointTable, ArrangeError> {
        let d = self.d();
        let mut by_point: Vec<(ProjPoint, Vec<usize>)> = Vec::new();
        for i in 0..d {
            for j in (i + 1)..d {
                let p = self.lines[i].meet(&self.lines[j])?;
                match by_point.iter_mut().find(|(q, _)| *q == p) {
                    Some((_, labels)) => {
                        for l in [i + 1, j + 1] {
                            if !labels.contains(&l) {
                                labels.push(l);
                            }
                        }
                    }
                    None => by_point.push((p, vec![i + 1, j + 1])),
                }
            }
        }
        let mut t: BTreeMap<usize, usize> = BTreeMap::new();
        for (_, labels) in &mut by_point {
            labels.sort_unstable();
            *t.entry(labels.len()).or_insert(0) += 1;
        }
        by_point.sort_by(|a, b| a.1.cmp(&b.1));
        // sum over k of C(k,2) t_k must equal C(d,2)
        let lhs: usize = t.iter().map(|(k, n)| k * (k - 1) / 2 * n).sum();
        assert_eq!(lhs, d * (d - 1) / 2, "incidence count identity violated");
        Ok(KPointTable {
            d,
            points: by_point,
            t,
        })
    }
}

/// All k-points of an arrangement with their incident line labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KPointTable {
    pub d: usize,
    /// canonical point together with the sorted incident labels (size >= 2)
    pub points: Vec<(ProjPoint, Vec<usize>)>,
    /// t[k] = number of k-points
    pub t: BTreeMap<usize, usize>,
}

impl KPointTable {
    pub fn t_k(&self, k: usize) -> usize {
        self.t.get(&k).copied().unwrap_or(0)
    }

    /// Labels of the point set, sorted, for combinatorial comparisons.
    pub fn label_sets(&self) -> Vec<Vec<usize>> {
        let mut v: Vec<Vec<usize>> = self.points.iter().map(|(_, l)| l.clone()).collect();
        v.sort();
        v
    }
}

/// Exact evaluation of the Hirzebruch-type inequality
/// t_2 + (3/4) t_3 >= d + sum_{k>=5} (k-4) t_k.
pub fn hirzebruch_check(arr: &Arrangement) -> Result<(bool, BigRational), ArrangeError> {
    if arr.field().characteristic() != 0 {
        return Err(ArrangeError::PreconditionViolated(
            "inequality applies over characteristic zero".into(),
        ));
    }
    let table = arr.k_points()?;
    let d = arr.d();
    if table.t_k(d) != 0 || table.t_k(d - 1) != 0 {
        return Err(ArrangeError::PreconditionViolated(
            "t_d and t_{d-1} must vanish".into(),
        ));
    }
    let r = |n: i64, m: i64| BigRational::new(BigInt::from(n), BigInt::from(m));
    let mut slack = r(table.t_k(2) as i64, 1) + r(3, 4) * r(table.t_k(3) as i64, 1) - r(d as i64, 1);
    for (&k, &n) in &table.t {
        if k >= 5 {
            slack -= r((k - 4) as i64, 1) * r(n as i64, 1);
        }
    }
    Ok((!slack.is_negative(), slack))
}

/// How the base point sits relative to the arrangement.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum BaseMode {
    /// P avoids every line.
    Exterior,
    /// P is a k-point of a larger arrangement; the deleted lines all pass
    /// through P and are recorded by their original labels.
    Pivot { deleted: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointedArrangement {
    pub arr: Arrangement,
    pub base: ProjPoint,
    pub mode: BaseMode,
}

impl PointedArrangement {
    pub fn exterior(arr: Arrangement, base: ProjPoint) -> Result<Self, ArrangeError> {
        for (i, l) in arr.lines().iter().enumerate() {
            if l.contains(&base)? {
                return Err(ArrangeError::BasePointOnLine(i + 1));
            }
        }
        Ok(PointedArrangement {
            arr,
            base,
            mode: BaseMode::Exterior,
        })
    }

    pub fn pivot(
        arr: Arrangement,
        base: ProjPoint,
        deleted_lines: Vec<(usize, ProjLine)>,
    ) -> Result<Self, ArrangeError> {
        for (label, l) in &deleted_lines {
            if !l.contains(&base)? {
                return Err(ArrangeError::PivotMismatch(*label));
            }
        }
        for (i, l) in arr.lines().iter().enumerate() {
            if l.contains(&base)? {
                return Err(ArrangeError::BasePointOnLine(i + 1));
            }
        }
        Ok(PointedArrangement {
            arr,
            base,
            mode: BaseMode::Pivot {
                deleted: deleted_lines.into_iter().map(|(l, _)| l).collect(),
            },
        })
    }

    pub fn d(&self) -> usize {
        self.arr.d()
    }
}

/// The embedding iota: P^2 -> P^(d-1) with coordinates L_i(x)/L_i(P).
pub struct IotaMap {
    denominators: Vec<Scalar>,
    lines: Vec<ProjLine>,
}

impl IotaMap {
    pub fn apply(&self, q: &ProjPoint) -> Result<ProjPoint, ArrangeError> {
        let mut coords = Vec::with_capacity(self.lines.len());
        for (l, den) in self.lines.iter().zip(&self.denominators) {
            coords.push(l.eval(q)?.div(den)?);
        }
        Ok(ProjPoint::new(coords)?)
    }
}

pub fn embed_iota(pa: &PointedArrangement) -> Result<IotaMap, ArrangeError> {
    let mut denominators = Vec::with_capacity(pa.d());
    for (i, l) in pa.arr.lines().iter().enumerate() {
        let v = l.eval(&pa.base)?;
        if v.is_zero() {
            return Err(ArrangeError::BasePointOnLine(i + 1));
        }
        denominators.push(v);
    }
    Ok(IotaMap {
        denominators,
        lines: pa.arr.lines().to_vec(),
    })
}

/// The line L(A,P) in P^(d-2), plus normalized-chart data when available.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorrespondenceLine {
    /// ambient dimension d-2
    pub dim: usize,
    pub span: SpanLine,
    /// (a_i, b_i) for i = 1..d-1 when the pair is in the normalized chart
    /// P = [0:0:1], L_i = (a_i x + b_i y + z), L_d = (z)
    pub chart: Option<Vec<(Scalar, Scalar)>>,
}

/// The projection rho: [y_1 : ... : y_d] -> [y_1 - y_d : ... : y_{d-1} - y_d].
fn rho(y: &ProjPoint) -> Result<ProjPoint, ArrangeError> {
    let c = y.coords();
    let d = c.len();
    let mut out = Vec::with_capacity(d - 1);
    for item in c.iter().take(d - 1) {
        out.push(item.sub(&c[d - 1])?);
    }
    Ok(ProjPoint::new(out)?)
}

/// Chart data of an exterior pair when it is exactly in the normalized
/// chart: P = [0:0:1], last line = (z), others with nonzero z-coefficient.
fn chart_data(pa: &PointedArrangement) -> Result<Option<Vec<(Scalar, Scalar)>>, ArrangeError> {
    let field = pa.arr.field();
    let p0 = ProjPoint::from_i64(field, &[0, 0, 1]).map_err(ArrangeError::Geom)?;
    if pa.base != p0 {
        return Ok(None);
    }
    let d = pa.d();
    let z_line = ProjLine::from_i64(field, [0, 0, 1]).map_err(ArrangeError::Geom)?;
    if *pa.arr.line(d) != z_line {
        return Ok(None);
    }
    let mut chart = Vec::with_capacity(d - 1);
    for l in &pa.arr.lines()[..d - 1] {
        let [a, b, c] = l.coeffs();
        if c.is_zero() {
            return Ok(None);
        }
        chart.push((a.div(c)?, b.div(c)?));
    }
    Ok(Some(chart))
}

pub fn correspondence_line(pa: &PointedArrangement) -> Result<CorrespondenceLine, ArrangeError> {
    let d = pa.d();
    let iota = embed_iota(pa)?;
    let chart = chart_data(pa)?;
    let (u, v) = if let Some(ch) = &chart {
        // span by [a_i] and [b_i] directly
        let a = ProjPoint::new(ch.iter().map(|(a, _)| a.clone()).collect())?;
        let b = ProjPoint::new(ch.iter().map(|(_, b)| b.clone()).collect())?;
        (a, b)
    } else {
        // images of two points with distinct images span the line
        let field = pa.arr.field();
        let mut found: Vec<ProjPoint> = Vec::new();
        'outer: for x in -6i64..7 {
            for y in -6i64..7 {
                for z in 0i64..2 {
                    let q = match ProjPoint::from_i64(field, &[x, y, z]) {
                        Ok(q) => q,
                        Err(_) => continue,
                    };
                    if q == pa.base {
                        continue;
                    }
                    let img = match iota.apply(&q) {
                        Ok(i) => i,
                        Err(_) => continue,
                    };
                    let img = match rho(&img) {
                        Ok(i) => i,
                        Err(_) => continue, // q collinear with P direction
                    };
                    if !found.contains(&img) {
                        found.push(img);
                    }
                    if found.len() == 2 {
                        break 'outer;
                    }
                }
            }
        }
        if found.len() < 2 {
            return Err(ArrangeError::PreconditionViolated(
                "could not find two spanning images".into(),
            ));
        }
        let b = found.pop().unwrap();
        let a = found.pop().unwrap();
        (a, b)
    };
    let span = SpanLine::new(u, v)?;
    // the line must avoid containment in every discriminant hyperplane
    for (i, j) in discriminant_pairs(d) {
        if span_inside_lambda(&span, i, j, d)? {
            return Err(ArrangeError::LineInsideDiscriminant(i, j));
        }
    }
    Ok(CorrespondenceLine {
        dim: d - 2,
        span,
        chart,
    })
}

/// The hyperplane Lambda_{i,j} of H_d: {x_i = x_j} for j < d and
/// {x_i = 0} for j = d (1-based labels, coordinates x_1..x_{d-1}).
fn discriminant_pairs(d: usize) -> Vec<(usize, usize)> {
    let mut v = Vec::new();
    for i in 1..d {
        for j in (i + 1)..=d {
            v.push((i, j));
        }
    }
    v
}

fn lambda_eval(p: &ProjPoint, i: usize, j: usize, d: usize) -> Scalar {
    let c = p.coords();
    if j == d {
        c[i - 1].clone()
    } else {
        c[i - 1].sub(&c[j - 1]).unwrap()
    }
}

fn span_inside_lambda(span: &SpanLine, i: usize, j: usize, d: usize) -> Result<bool, ArrangeError> {
    Ok(lambda_eval(&span.a, i, j, d).is_zero() && lambda_eval(&span.b, i, j, d).is_zero())
}

/// Inverse of the correspondence in the normalized chart: spanning points
/// (u, v) become L_i = (u_i x + v_i y + z), L_d = (z), P = [0:0:1].
pub fn reconstruct_pair(cl: &CorrespondenceLine) -> Result<PointedArrangement, ArrangeError> {
    let d = cl.dim + 2;
    for (i, j) in discriminant_pairs(d) {
        if span_inside_lambda(&cl.span, i, j, d)? {
            return Err(ArrangeError::LineInsideDiscriminant(i, j));
        }
    }
    let field = cl.span.a.field().clone();
    let one = field.one();
    let mut lines = Vec::with_capacity(d);
    for i in 0..(d - 1) {
        lines.push(ProjLine::new([
            cl.span.a.coords()[i].clone(),
            cl.span.b.coords()[i].clone(),
            one.clone(),
        ])?);
    }
    lines.push(ProjLine::from_i64(&field, [0, 0, 1])?);
    let base = ProjPoint::from_i64(&field, &[0, 0, 1])?;
    PointedArrangement::exterior(Arrangement::new(lines)?, base)
}

/// K(lambda): the k-point label sets of the arrangement lying on a line
/// through the base point.
pub fn k_set(pa: &PointedArrangement, lambda: &ProjLine) -> Result<Vec<Vec<usize>>, ArrangeError> {
    if !lambda.contains(&pa.base)? {
        return Err(ArrangeError::LineMissesBasePoint);
    }
    let table = pa.arr.k_points()?;
    let mut out = Vec::new();
    for (p, labels) in &table.points {
        if lambda.contains(p)? {
            out.push(labels.clone());
        }
    }
    out.sort();
    Ok(out)
}

/// Label-preserving projective isomorphism between pointed arrangements,
/// decided by frame transport over canonical 4-point frames built from the
/// base point and pairwise intersections.
pub fn isomorphism(
    pa1: &PointedArrangement,
    pa2: &PointedArrangement,
) -> Result<Option<ProjMap>, ArrangeError> {
    let d = pa1.d();
    if d != pa2.d() || pa1.arr.field() != pa2.arr.field() {
        return Ok(None);
    }
    // candidate points by combinatorial source: base point first, then
    // pairwise meets in lexicographic label order
    let mut pts1 = vec![pa1.base.clone()];
    let mut pts2 = vec![pa2.base.clone()];
    for i in 1..=d {
        for j in (i + 1)..=d {
            pts1.push(pa1.arr.line(i).meet(pa1.arr.line(j))?);
            pts2.push(pa2.arr.line(i).meet(pa2.arr.line(j))?);
        }
    }
    let n = pts1.len();
    // first 4-subset (lex order) in general position on the unprimed side
    let mut frame_idx = None;
    'search: for a in 0..n {
        for b in (a + 1)..n {
            for c in (b + 1)..n {
                for e in (c + 1)..n {
                    let f1 = [
                        pts1[a].clone(),
                        pts1[b].clone(),
                        pts1[c].clone(),
                        pts1[e].clone(),
                    ];
                    if general_position(&f1)? {
                        frame_idx = Some([a, b, c, e]);
                        break 'search;
                    }
                }
            }
        }
    }
    let idx = match frame_idx {
        Some(i) => i,
        None => {
            return Err(ArrangeError::PreconditionViolated(
                "no general-position frame in arrangement".into(),
            ))
        }
    };
    let f1 = idx.map(|k| pts1[k].clone());
    let f2 = idx.map(|k| pts2[k].clone());
    if !general_position(&f2)? {
        // an isomorphism would carry frames to frames source by source
        return Ok(None);
    }
    let t = ProjMap::frame_transport(&f1, &f2)?;
    if t.apply(&pa1.base)? != pa2.base {
        return Ok(None);
    }
    for i in 1..=d {
        if t.apply_line(pa1.arr.line(i))? != *pa2.arr.line(i) {
            return Ok(None);
        }
    }
    Ok(Some(t))
}

// ---- JSON interchange ----

pub fn to_json(pa: &PointedArrangement) -> serde_json::Value {
    let lines: Vec<Vec<String>> = pa
        .arr
        .lines()
        .iter()
        .map(|l| l.coeffs().iter().map(|c| c.to_string()).collect())
        .collect();
    let base: Vec<String> = pa.base.coords().iter().map(|c| c.to_string()).collect();
    let (mode, deleted) = match &pa.mode {
        BaseMode::Exterior => ("exterior", vec![]),
        BaseMode::Pivot { deleted } => ("pivot", deleted.clone()),
    };
    serde_json::json!({
        "field": pa.arr.field(),
        "lines": lines,
        "base_point": base,
        "mode": mode,
        "deleted": deleted,
    })
}

pub fn from_json(v: &serde_json::Value) -> Result<PointedArrangement, ArrangeError> {
    let err = |m: &str| ArrangeError::Format(m.to_string());
    let _field: FieldDescriptor = serde_json::from_value(
        v.get("field").ok_or_else(|| err("missing field"))?.clone(),
    )
    .map_err(|e| err(&format!("bad field descriptor: {e}")))?;
    let parse_triple = |arr: &serde_json::Value| -> Result<[Scalar; 3], ArrangeError> {
        let items = arr.as_array().ok_or_else(|| err("line must be an array"))?;
        if items.len() != 3 {
            return Err(err("line needs 3 coefficients"));
        }
        let mut out = Vec::new();
        for it in items {
            let s = it.as_str().ok_or_else(|| err("coefficient must be a string"))?;
            out.push(crate::field::parse_scalar(s).map_err(|e| err(&e.to_string()))?);
        }
        Ok([out[0].clone(), out[1].clone(), out[2].clone()])
    };
    let lines_v = v
        .get("lines")
        .and_then(|l| l.as_array())
        .ok_or_else(|| err("missing lines"))?;
    let mut lines = Vec::new();
    for lv in lines_v {
        lines.push(ProjLine::new(parse_triple(lv)?)?);
    }
    let base_v = v
        .get("base_point")
        .and_then(|b| b.as_array())
        .ok_or_else(|| err("missing base_point"))?;
    let mut base_coords = Vec::new();
    for it in base_v {
        let s = it.as_str().ok_or_else(|| err("coordinate must be a string"))?;
        base_coords.push(crate::field::parse_scalar(s).map_err(|e| err(&e.to_string()))?);
    }
    let base = ProjPoint::new(base_coords)?;
    let arr = Arrangement::new(lines)?;
    match v.get("mode").and_then(|m| m.as_str()) {
        Some("pivot") => {
            let deleted: Vec<usize> = v
                .get("deleted")
                .and_then(|d| d.as_array())
                .map(|a| a.iter().filter_map(|x| x.as_u64().map(|u| u as usize)).collect())
                .unwrap_or_default();
            Ok(PointedArrangement {
                arr,
                base,
                mode: BaseMode::Pivot { deleted },
            })
        }
        _ => PointedArrangement::exterior(arr, base),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::Zero;
    use rand::{Rng, SeedableRng};

    fn qq() -> FieldDescriptor {
        FieldDescriptor::Rationals
    }

    fn ln(v: [i64; 3]) -> ProjLine {
        ProjLine::from_i64(&qq(), v).unwrap()
    }

    fn pt(v: [i64; 3]) -> ProjPoint {
        ProjPoint::from_i64(&qq(), &v).unwrap()
    }

    /// Complete quadrilateral: joins of A=e1, B=e2, C=e3, D=(1,1,1),
    /// labeled L1=AB, L2=AC, L3=AD, L4=CD, L5=BD, L6=BC so that the
    /// 3-points are [[1,2,3]], [[1,5,6]], [[2,4,6]], [[3,4,5]].
    fn quadrilateral() -> Arrangement {
        Arrangement::new(vec![
            ln([0, 0, 1]),  // AB
            ln([0, 1, 0]),  // AC
            ln([0, -1, 1]), // AD: y = z
            ln([-1, 1, 0]), // CD: x = y
            ln([1, 0, -1]), // BD: x = z
            ln([1, 0, 0]),  // BC
        ])
        .unwrap()
    }

    #[test]
    fn quadrilateral_k_points() {
        let t = quadrilateral().k_points().unwrap();
        assert_eq!(t.t_k(2), 3);
        assert_eq!(t.t_k(3), 4);
        let sets = t.label_sets();
        assert!(sets.contains(&vec![1, 2, 3]));
        assert!(sets.contains(&vec![1, 4]));
        assert!(sets.contains(&vec![3, 6]));
        assert!(sets.contains(&vec![2, 5]));
    }

    #[test]
    fn three_coordinate_lines() {
        let a = Arrangement::new(vec![ln([1, 0, 0]), ln([0, 1, 0]), ln([0, 0, 1])]).unwrap();
        assert_eq!(a.k_points().unwrap().t_k(2), 3);
    }

    #[test]
    fn concurrent_lines_rejected() {
        let e = Arrangement::new(vec![ln([1, 0, 0]), ln([0, 1, 0]), ln([1, 1, 0])]);
        assert_eq!(e, Err(ArrangeError::CommonPoint));
    }

    #[test]
    fn hirzebruch_quadrilateral_and_generic() {
        let (ok, slack) = hirzebruch_check(&quadrilateral()).unwrap();
        assert!(ok);
        assert!(slack.is_zero());
        // 5 generic lines: t2 = 10, slack 5
        let generic = Arrangement::new(vec![
            ln([1, 0, 1]),
            ln([0, 1, 1]),
            ln([1, 1, 1]),
            ln([2, 5, 1]),
            ln([3, -1, 1]),
        ])
        .unwrap();
        let t = generic.k_points().unwrap();
        assert_eq!(t.t_k(2), 10);
        let (ok, slack) = hirzebruch_check(&generic).unwrap();
        assert!(ok);
        assert_eq!(slack, BigRational::from(BigInt::from(5)));
    }

    #[test]
    fn k_set_matches_figure() {
        let arr = quadrilateral();
        let p = pt([2, 3, 1]);
        let pa = PointedArrangement::exterior(arr, p).unwrap();
        // lambda through the 2-points {3,6} and {1,4}
        let lambda = ln([-1, 1, -1]);
        assert!(lambda.contains(&pa.base).unwrap());
        assert_eq!(k_set(&pa, &lambda).unwrap(), vec![vec![1, 4], vec![3, 6]]);
        // lambda' through the 3-point {1,2,3} = e1
        let lambda2 = pa.base.join(&pt([1, 0, 0])).unwrap();
        assert_eq!(k_set(&pa, &lambda2).unwrap(), vec![vec![1, 2, 3]]);
        // generic line through P
        let generic = ln([1, 1, -5]);
        assert!(generic.contains(&pa.base).unwrap());
        assert_eq!(k_set(&pa, &generic).unwrap(), Vec::<Vec<usize>>::new());
    }

    #[test]
    fn iota_normalizes_base_point() {
        let arr = Arrangement::new(vec![ln([1, 0, 0]), ln([0, 1, 0]), ln([0, 0, 1])]).unwrap();
        let pa = PointedArrangement::exterior(arr, pt([1, 1, 1])).unwrap();
        let iota = embed_iota(&pa).unwrap();
        assert_eq!(iota.apply(&pa.base).unwrap(), pt([1, 1, 1]));
        assert_eq!(iota.apply(&pt([2, 3, 5])).unwrap(), pt([2, 3, 5]));
    }

    #[test]
    fn iota_sends_lines_into_coordinate_hyperplanes() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let arr = quadrilateral();
        let pa = PointedArrangement::exterior(arr, pt([2, 3, 1])).unwrap();
        let iota = embed_iota(&pa).unwrap();
        for (i, l) in pa.arr.lines().iter().enumerate() {
            // sample points of L_i by meeting with random lines
            let mut sampled = 0;
            while sampled < 5 {
                let m = ln([
                    rng.gen_range(-4..5),
                    rng.gen_range(-4..5),
                    rng.gen_range(-4..5),
                ]);
                let q = match l.meet(&m) {
                    Ok(q) => q,
                    Err(_) => continue,
                };
                let img = iota.apply(&q).unwrap();
                assert!(img.coords()[i].is_zero());
                sampled += 1;
            }
        }
    }

    #[test]
    fn chart_reconstruction_example() {
        // line [t:u] -> [t, u, t+u] in P^2 gives (x+z), (y+z), (x+y+z), (z)
        let f = qq();
        let span = SpanLine::new(
            ProjPoint::from_i64(&f, &[1, 0, 1]).unwrap(),
            ProjPoint::from_i64(&f, &[0, 1, 1]).unwrap(),
        )
        .unwrap();
        let cl = CorrespondenceLine {
            dim: 2,
            span,
            chart: None,
        };
        let pa = reconstruct_pair(&cl).unwrap();
        assert_eq!(pa.arr.lines()[0], ln([1, 0, 1]));
        assert_eq!(pa.arr.lines()[1], ln([0, 1, 1]));
        assert_eq!(pa.arr.lines()[2], ln([1, 1, 1]));
        assert_eq!(pa.arr.lines()[3], ln([0, 0, 1]));
        assert_eq!(pa.base, pt([0, 0, 1]));
        // correspondence inverts it
        let back = correspondence_line(&pa).unwrap();
        assert_eq!(back.span.a, pt([1, 0, 1]));
        assert_eq!(back.span.b, pt([0, 1, 1]));
    }

    #[test]
    fn line_inside_discriminant_rejected() {
        // u = (1,1,0), v = (2,2,1): x1 = x2 identically
        let f = qq();
        let span = SpanLine::new(
            ProjPoint::from_i64(&f, &[1, 1, 0]).unwrap(),
            ProjPoint::from_i64(&f, &[2, 2, 1]).unwrap(),
        )
        .unwrap();
        let cl = CorrespondenceLine {
            dim: 2,
            span,
            chart: None,
        };
        assert_eq!(
            reconstruct_pair(&cl),
            Err(ArrangeError::LineInsideDiscriminant(1, 2))
        );
    }

    #[test]
    fn correspondence_meets_every_discriminant_hyperplane_once() {
        // quadrilateral pointed at a generic P: the line meets all 15
        // hyperplanes, coincident hits exactly at images of the 3-points
        let arr = quadrilateral();
        let pa = PointedArrangement::exterior(arr, pt([2, 3, 1])).unwrap();
        let cl = correspondence_line(&pa).unwrap();
        let d = 6;
        for (i, j) in discriminant_pairs(d) {
            // ca + t*cb = 0 must have exactly one projective solution
            let ca = lambda_eval(&cl.span.a, i, j, d);
            let cb = lambda_eval(&cl.span.b, i, j, d);
            assert!(!(ca.is_zero() && cb.is_zero()));
        }
    }

    #[test]
    fn round_trip_random_exterior_pairs() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let mut done = 0;
        while done < 10 {
            let d = 4 + (rng.gen_range(0..3) as usize);
            let mut lines = Vec::new();
            for k in 0..d {
                let l = if k == d - 1 {
                    ln([0, 0, 1])
                } else {
                    ln([rng.gen_range(-5..6), rng.gen_range(-5..6), 1])
                };
                lines.push(l);
            }
            let arr = match Arrangement::new(lines) {
                Ok(a) => a,
                Err(_) => continue,
            };
            let pa = match PointedArrangement::exterior(arr, pt([0, 0, 1])) {
                Ok(p) => p,
                Err(_) => continue,
            };
            let cl = match correspondence_line(&pa) {
                Ok(c) => c,
                Err(_) => continue,
            };
            let back = reconstruct_pair(&cl).unwrap();
            let iso = isomorphism(&pa, &back).unwrap();
            assert!(iso.is_some(), "round trip failed for {:?}", pa.arr.lines());
            done += 1;
        }
    }

    #[test]
    fn isomorphism_distinguishes() {
        let arr = quadrilateral();
        let pa1 = PointedArrangement::exterior(arr.clone(), pt([2, 3, 1])).unwrap();
        // transform by a projectivity: must stay isomorphic
        let f = qq();
        let s = |v: i64| Scalar::from_i64(&f, v);
        let t = ProjMap::new([
            [s(1), s(1), s(0)],
            [s(0), s(1), s(1)],
            [s(1), s(0), s(1)],
        ])
        .unwrap();
        let moved = Arrangement::new(
            arr.lines()
                .iter()
                .map(|l| t.apply_line(l).unwrap())
                .collect(),
        )
        .unwrap();
        let pa2 =
            PointedArrangement::exterior(moved, t.apply(&pa1.base).unwrap()).unwrap();
        assert!(isomorphism(&pa1, &pa2).unwrap().is_some());
        // different base point: generally not isomorphic as pairs
        let pa3 = PointedArrangement::exterior(arr, pt([3, 5, 1])).unwrap();
        assert!(isomorphism(&pa1, &pa3).unwrap().is_none());
    }

    #[test]
    fn json_round_trip() {
        let arr = quadrilateral();
        let pa = PointedArrangement::exterior(arr, pt([2, 3, 1])).unwrap();
        let v = to_json(&pa);
        let back = from_json(&v).unwrap();
        assert_eq!(back, pa);
    }
}
