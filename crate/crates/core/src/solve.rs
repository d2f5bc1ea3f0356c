//! Symbolic realization engine for nets.
//!
//! From one Latin square (3-nets) or two orthogonal squares (4-nets) we
//! build the coordinate patterns of the three or four special lines,
//! impose the 2x2 determinant constraints coming from the surviving
//! multiple points, and eliminate variables one at a time over an exact
//! rational-function field.  The output is either a parametrized family
//! (with its residual hypersurface constraints and excluded locus) or a
//! contradiction trace.

use std::collections::BTreeMap;
use std::sync::Arc;

use num::{BigInt, BigRational, One as _, Signed, Zero as _};
use serde::Serialize;
use thiserror::Error;

use crate::field::{FieldDescriptor, FieldError, Scalar};
use crate::geom::{GeomError, ProjLine};
use crate::latin::{incidence_from_squares, LatinError, LatinSquare};
use crate::poly::{poly_sqrt_up_to_scalar, MultiPoly, RatFunc};

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("pattern has no constant invertible pair to solve [t:u]")]
    NoInvertibleBlock,
    #[error("constraint {point} is nonlinear in {var}")]
    NonlinearInTarget { point: String, var: String },
    #[error("leading coefficient for {var} vanishes identically in {point}")]
    ZeroLeadingCoefficient { point: String, var: String },
    #[error("variable {0} is already assigned")]
    AlreadyAssigned(String),
    #[error("division by zero polynomial")]
    DivisionByZeroPolynomial,
    #[error("parameter value lies on the excluded locus: {0}")]
    OnExcludedLocus(String),
    #[error("constraint not satisfied at parameter values: {0}")]
    ConstraintNotSatisfied(String),
    #[error("unknown case id {0}")]
    UnknownCase(String),
    #[error("unknown variable {0}")]
    UnknownVariable(String),
    #[error("no pending constraint at point {0}")]
    UnknownPoint(String),
    #[error("cannot adjoin sqrt({0}) over {1}")]
    UnsupportedExtension(i64, String),
    #[error("branch analysis left an unresolved factor: {0}")]
    UnresolvedBranch(String),
    #[error("missing value for parameter {0}")]
    MissingParameter(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error(transparent)]
    Latin(#[from] LatinError),
}

/// One symbolic coordinate of a special-line pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PatEntry {
    Zero,
    One,
    Var(usize),
}

/// Symbolic coordinate vector of one special line, together with the
/// multiple point that forced each zero / shared-variable group.
#[derive(Debug, Clone, Serialize)]
pub struct PatternPoint {
    pub entries: Vec<PatEntry>,
    /// Original line labels of the forcing point, per position (None for
    /// singleton coordinates, which are free).
    pub provenance: Vec<Option<Vec<usize>>>,
}

/// The full symbolic setup derived from the square(s): patterns, the
/// surviving multiple points, variable names and designated parameters.
#[derive(Debug, Clone)]
pub struct Problem {
    pub q: usize,
    /// Number of classes: 3 or 4.
    pub p: usize,
    pub squares: Vec<LatinSquare>,
    /// Variable names; pattern variables first, then t, u (, t2, u2).
    pub vars: Vec<String>,
    /// Display aliases (designated parameter names), indexed like `vars`.
    pub display: Vec<Option<String>>,
    /// Indices of the designated free parameters.
    pub frees: Vec<usize>,
    pub patterns: Vec<PatternPoint>,
    /// 0-based class of each surviving position (0 = first class, ...).
    pub pos_class: Vec<usize>,
    /// Original line label of each surviving position.
    pub pos_label: Vec<usize>,
    /// Original labels of the deleted special lines, one per class.
    pub deleted: Vec<usize>,
    /// Original label and class of the last surviving line (no coordinate).
    pub last_label: usize,
    pub last_class: usize,
    /// Number of surviving lines; positions run 1..dprime-1, the last
    /// line is position dprime.
    pub dprime: usize,
    /// Surviving multiple points as sorted position lists (1-based,
    /// possibly containing `dprime`).
    pub xprime: Vec<Vec<usize>>,
    pub t_idx: usize,
    pub u_idx: usize,
    pub t2_idx: Option<usize>,
    pub u2_idx: Option<usize>,
}

impl Problem {
    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars
            .iter()
            .position(|v| v == name)
            .or_else(|| self.display.iter().position(|d| d.as_deref() == Some(name)))
    }

    pub fn var_name(&self, i: usize) -> &str {
        self.display[i].as_deref().unwrap_or(&self.vars[i])
    }

    pub fn names(&self) -> Vec<&str> {
        (0..self.vars.len()).map(|i| self.var_name(i)).collect()
    }

    /// The symbolic coordinate of pattern `pat` at 1-based position `pos`.
    pub fn entry_poly(&self, pat: usize, pos: usize) -> MultiPoly {
        let f = FieldDescriptor::rationals();
        match self.patterns[pat].entries[pos - 1] {
            PatEntry::Zero => MultiPoly::zero(&f, self.nvars()),
            PatEntry::One => MultiPoly::one(&f, self.nvars()),
            PatEntry::Var(v) => MultiPoly::var(&f, self.nvars(), v),
        }
    }
}

/// Builds the special-line patterns and surviving multiple points for the
/// net described by one square (3 classes) or two orthogonal squares
/// (4 classes).  `frees` designates the free parameters as
/// (variable, display alias) pairs; variables named there are never
/// chosen as elimination targets.
pub fn build_patterns(
    squares: &[LatinSquare],
    frees: &[(&str, &str)],
) -> Result<Problem, SolveError> {
    assert!(
        squares.len() == 1 || squares.len() == 2,
        "one square (3-net) or two orthogonal squares (4-net)"
    );
    let q = squares[0].order();
    let p = squares.len() + 2;
    let points = incidence_from_squares(squares)?;

    // Pivot cell: (1,1) for 3 classes, (1,q) for 4 classes (1-based).
    let (pr, pc) = if p == 3 { (0, 0) } else { (0, q - 1) };
    let mut deleted = vec![pc + 1, q + pr + 1];
    for (i, sq) in squares.iter().enumerate() {
        deleted.push((i + 2) * q + sq.get(pr, pc) as usize);
    }

    // Survivors in label order; the largest label is the line without a
    // coordinate of its own.
    let survivors: Vec<usize> = (1..=p * q).filter(|l| !deleted.contains(l)).collect();
    let dprime = survivors.len();
    let mut pos_of: BTreeMap<usize, usize> = BTreeMap::new();
    for (i, &l) in survivors.iter().enumerate() {
        pos_of.insert(l, i + 1);
    }
    let last_label = survivors[dprime - 1];
    let class_of = |label: usize| (label - 1) / q;
    let last_class = class_of(last_label);
    let npos = dprime - 1;
    let pos_label: Vec<usize> = survivors[..npos].to_vec();
    let pos_class: Vec<usize> = pos_label.iter().map(|&l| class_of(l)).collect();

    let mut vars: Vec<String> = Vec::new();
    let mut patterns: Vec<PatternPoint> = Vec::new();
    let prefixes = ["a", "b", "c", "d"];
    for (k, &del) in deleted.iter().enumerate() {
        // Groups of surviving positions sharing a multiple point with the
        // deleted line `del`, with the forcing point recorded.
        let mut groups: Vec<(Vec<usize>, Vec<usize>, bool)> = Vec::new(); // (positions, point, has_last)
        for pt in &points {
            if !pt.contains(&del) || pt.iter().all(|m| deleted.contains(m)) {
                continue;
            }
            let others: Vec<usize> = pt.iter().cloned().filter(|m| !deleted.contains(m)).collect();
            let has_last = others.contains(&last_label);
            let posns: Vec<usize> = others
                .iter()
                .filter(|&&m| m != last_label)
                .map(|&m| pos_of[&m])
                .collect();
            groups.push((posns, pt.clone(), has_last));
        }
        let mut entries = vec![None::<PatEntry>; npos];
        let mut provenance = vec![None::<Vec<usize>>; npos];
        let mut counter = 0usize;
        let mut pinned = false;
        let mut new_var = |vars: &mut Vec<String>| {
            counter += 1;
            vars.push(format!("{}{}", prefixes[k], counter));
            PatEntry::Var(vars.len() - 1)
        };
        for pos in 1..=npos {
            if entries[pos - 1].is_some() {
                continue;
            }
            if let Some((posns, pt, has_last)) =
                groups.iter().find(|(posns, _, _)| posns.contains(&pos))
            {
                let e = if *has_last {
                    PatEntry::Zero
                } else if !pinned {
                    pinned = true;
                    PatEntry::One
                } else {
                    new_var(&mut vars)
                };
                for &m in posns {
                    entries[m - 1] = Some(e);
                    provenance[m - 1] = Some(pt.clone());
                }
            } else {
                entries[pos - 1] = Some(new_var(&mut vars));
            }
        }
        // A pattern made only of singletons still has a scaling freedom:
        // pin its first variable.
        if !pinned {
            if let Some(e) = entries.iter_mut().find(|e| **e != Some(PatEntry::Zero)) {
                if let Some(PatEntry::Var(v)) = *e {
                    *e = Some(PatEntry::One);
                    // drop the name only if it was the most recent
                    let _ = v;
                }
            }
        }
        patterns.push(PatternPoint {
            entries: entries.into_iter().map(|e| e.unwrap()).collect(),
            provenance,
        });
    }

    let t_idx = vars.len();
    vars.push("t".into());
    let u_idx = vars.len();
    vars.push("u".into());
    let (t2_idx, u2_idx) = if p == 4 {
        vars.push("t2".into());
        vars.push("u2".into());
        (Some(vars.len() - 2), Some(vars.len() - 1))
    } else {
        (None, None)
    };

    let mut display = vec![None; vars.len()];
    let mut free_idx = Vec::new();
    for (name, alias) in frees {
        let i = vars
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| SolveError::UnknownVariable((*name).into()))?;
        display[i] = Some((*alias).to_string());
        free_idx.push(i);
    }

    // Surviving multiple points: no deleted member.
    let xprime: Vec<Vec<usize>> = points
        .iter()
        .filter(|pt| pt.iter().all(|m| !deleted.contains(m)))
        .map(|pt| {
            let mut v: Vec<usize> = pt.iter().map(|&m| pos_of[&m]).collect();
            v.sort_unstable();
            v
        })
        .collect();

    Ok(Problem {
        q,
        p,
        squares: squares.to_vec(),
        vars,
        display,
        frees: free_idx,
        patterns,
        pos_class,
        pos_label,
        deleted,
        last_label,
        last_class,
        dprime,
        xprime,
        t_idx,
        u_idx,
        t2_idx,
        u2_idx,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ConstraintStatus {
    Pending,
    Used,
    Satisfied,
    Violated,
}

/// One determinant equation from a surviving multiple point (or a
/// leftover pencil-round equation, labelled by its single position).
#[derive(Debug, Clone)]
pub struct Constraint {
    pub label: Vec<usize>,
    /// The equation over the base rationals, in the full variable list.
    pub original: MultiPoly,
    /// Numerator of the equation after the current assignments.
    pub current: MultiPoly,
    pub status: ConstraintStatus,
    pub solved_var: Option<usize>,
}

fn lift_scalar(s: &Scalar, f: &FieldDescriptor) -> Result<Scalar, SolveError> {
    if s.field() == f {
        return Ok(s.clone());
    }
    let r = s
        .as_rational()
        .ok_or_else(|| SolveError::UnsupportedExtension(0, format!("{f:?}")))?;
    match f {
        FieldDescriptor::Rationals => Ok(Scalar::rational(r.clone())),
        FieldDescriptor::Quadratic { d } => {
            Ok(Scalar::quadratic(*d, r.clone(), BigRational::zero())?)
        }
        FieldDescriptor::Finite { .. } => {
            let embed_int = |n: &BigInt| -> Scalar {
                let mut acc = Scalar::from_i64(f, 0);
                let ten = Scalar::from_i64(f, 10);
                for ch in n.magnitude().to_string().bytes() {
                    let digit = Scalar::from_i64(f, (ch - b'0') as i64);
                    acc = acc.mul(&ten).unwrap().add(&digit).unwrap();
                }
                if n.is_negative() {
                    acc.neg()
                } else {
                    acc
                }
            };
            let num = embed_int(r.numer());
            let den = embed_int(r.denom());
            Ok(num.div(&den)?)
        }
    }
}

pub fn lift_poly(pl: &MultiPoly, f: &FieldDescriptor) -> Result<MultiPoly, SolveError> {
    if &pl.field == f {
        return Ok(pl.clone());
    }
    let mut out = MultiPoly::zero(f, pl.nvars);
    for (m, c) in &pl.terms {
        out.insert_term(m.clone(), lift_scalar(c, f)?);
    }
    Ok(out)
}

fn lift_rat(r: &RatFunc, f: &FieldDescriptor) -> Result<RatFunc, SolveError> {
    Ok(RatFunc::new(lift_poly(&r.num, f)?, lift_poly(&r.den, f)?))
}

/// The elimination engine state: fully back-substituted assignments,
/// reduced constraints, excluded locus, trace.
#[derive(Debug, Clone)]
pub struct EliminationState {
    pub prob: Arc<Problem>,
    pub field: FieldDescriptor,
    pub assign: BTreeMap<usize, RatFunc>,
    pub constraints: Vec<Constraint>,
    pub excluded: Vec<MultiPoly>,
    pub trace: Vec<String>,
    /// Benign coincidences (same-class concurrences) found along the way.
    pub extras: Vec<String>,
    pub contradiction: Option<String>,
    pub branch_count: Option<usize>,
    /// D of the quadratic extension adjoined mid-run, if any.
    pub extension: Option<i64>,
    /// Keep [t:u] as symbols during the pencil rounds instead of solving
    /// the zero-position equations for them.
    pub symbolic_pencil: bool,
    init_done: bool,
}

fn fmt_point(label: &[usize]) -> String {
    let inner: Vec<String> = label.iter().map(|x| x.to_string()).collect();
    format!("[[{}]]", inner.join(","))
}

impl EliminationState {
    pub fn new(prob: Arc<Problem>) -> Self {
        let field = FieldDescriptor::rationals();
        let nv = prob.nvars();
        let mut constraints = Vec::new();
        for pt in &prob.xprime {
            let has_last = *pt.last().unwrap() == prob.dprime;
            let members: Vec<usize> = pt.iter().cloned().filter(|&m| m != prob.dprime).collect();
            let row = |pos: usize| {
                (
                    prob.entry_poly(0, pos), // alpha coordinate
                    prob.entry_poly(1, pos), // beta coordinate
                )
            };
            let det = |(a0, b0): &(MultiPoly, MultiPoly), (a1, b1): &(MultiPoly, MultiPoly)| {
                a0.mul(b1).sub(&b0.mul(a1))
            };
            let mut eqs: Vec<MultiPoly> = Vec::new();
            if has_last {
                // Lines concurrent on the last line z = 0: all (alpha,
                // beta) rows proportional.
                let base = row(members[0]);
                for &m in &members[1..] {
                    eqs.push(det(&base, &row(m)));
                }
            } else {
                // Concurrent affine lines: difference rows proportional.
                let r0 = row(members[0]);
                let diff = |m: usize| {
                    let r = row(m);
                    (r0.0.sub(&r.0), r0.1.sub(&r.1))
                };
                let d1 = diff(members[1]);
                for &m in &members[2..] {
                    eqs.push(det(&d1, &diff(m)));
                }
            }
            for eq in eqs {
                constraints.push(Constraint {
                    label: pt.clone(),
                    original: eq.clone(),
                    current: eq,
                    status: ConstraintStatus::Pending,
                    solved_var: None,
                });
            }
        }
        let _ = nv;
        EliminationState {
            prob,
            field,
            assign: BTreeMap::new(),
            constraints,
            excluded: Vec::new(),
            trace: Vec::new(),
            extras: Vec::new(),
            contradiction: None,
            branch_count: None,
            extension: None,
            symbolic_pencil: false,
            init_done: false,
        }
    }

    fn poly_var(&self, i: usize) -> RatFunc {
        RatFunc::var(&self.field, self.prob.nvars(), i)
    }

    /// Current value of a variable: its assignment, or itself.
    pub fn value_of(&self, i: usize) -> RatFunc {
        self.assign.get(&i).cloned().unwrap_or_else(|| self.poly_var(i))
    }

    /// Current value of pattern `pat` at position `pos`.
    pub fn entry_value(&self, pat: usize, pos: usize) -> RatFunc {
        match self.prob.patterns[pat].entries[pos - 1] {
            PatEntry::Zero => RatFunc::zero(&self.field, self.prob.nvars()),
            PatEntry::One => RatFunc::one(&self.field, self.prob.nvars()),
            PatEntry::Var(v) => self.value_of(v),
        }
    }

    fn push_excluded(&mut self, pl: &MultiPoly) {
        // Strip known factors first so the list stays close to atomic;
        // that makes later factor-stripping precise.
        let rem = self.strip_excluded(pl);
        if rem.is_constant() {
            return;
        }
        let m = rem.monic();
        if !self.excluded.contains(&m) {
            self.excluded.push(m);
        }
    }

    /// Assign `var := val` and back-substitute everywhere.  `val` must
    /// only mention unassigned variables.
    fn assign_var(&mut self, var: usize, val: RatFunc) -> Result<(), SolveError> {
        if self.assign.contains_key(&var) {
            return Err(SolveError::AlreadyAssigned(self.prob.vars[var].clone()));
        }
        debug_assert!(
            !val.num.uses_var(var) && !val.den.uses_var(var),
            "self-referential assignment"
        );
        self.push_excluded(&val.den.clone());
        let mut subst: BTreeMap<usize, RatFunc> = BTreeMap::new();
        subst.insert(var, val.clone());
        let apply = |r: &RatFunc, subst: &BTreeMap<usize, RatFunc>| -> Result<RatFunc, SolveError> {
            if !r.num.uses_var(var) && !r.den.uses_var(var) {
                return Ok(r.clone());
            }
            let num = RatFunc::eval_poly(&r.num, subst);
            let den = RatFunc::eval_poly(&r.den, subst);
            if den.is_zero() {
                return Err(SolveError::DivisionByZeroPolynomial);
            }
            Ok(num.div(&den))
        };
        let keys: Vec<usize> = self.assign.keys().cloned().collect();
        for k in keys {
            let cur = self.assign[&k].clone();
            let new = apply(&cur, &subst)?;
            self.assign.insert(k, new);
        }
        self.assign.insert(var, val);
        self.recompute_constraints(&subst)?;
        self.check_legality();
        Ok(())
    }

    /// Substitute freshly assigned variables into the pending constraint
    /// numerators.  The substituted denominators are excluded factors, so
    /// stripping them keeps the numerators reduced.
    fn recompute_constraints(&mut self, subst: &BTreeMap<usize, RatFunc>) -> Result<(), SolveError> {
        let mut updated: Vec<(usize, MultiPoly)> = Vec::new();
        for (i, c) in self.constraints.iter().enumerate() {
            if matches!(c.status, ConstraintStatus::Pending)
                && subst.keys().any(|&v| c.current.uses_var(v))
            {
                let (num, _) = RatFunc::eval_poly_parts(&c.current, subst);
                updated.push((i, self.strip_excluded(&num)));
            }
        }
        for (i, p) in updated {
            self.constraints[i].current = p;
        }
        Ok(())
    }

    /// Detect forced degenerations: a coordinate forced to zero, two
    /// coordinates forced equal across classes, or two surviving lines
    /// forced to coincide.  Benign same-class concurrences are recorded.
    fn check_legality(&mut self) {
        if self.contradiction.is_some() {
            return;
        }
        let prob = self.prob.clone();
        let npos = prob.dprime - 1;
        for (k, pat) in prob.patterns.iter().enumerate() {
            let vals: Vec<RatFunc> = (1..=npos).map(|p| self.entry_value(k, p)).collect();
            for i in 1..=npos {
                let e = pat.entries[i - 1];
                if e == PatEntry::Zero {
                    continue;
                }
                if vals[i - 1].is_zero() {
                    let name = match e {
                        PatEntry::Var(v) => prob.vars[v].clone(),
                        _ => format!("coordinate {i}"),
                    };
                    let msg = format!(
                        "{name}=0 forces L{}, L{} and L{} concurrent",
                        prob.deleted[k],
                        prob.pos_label[i - 1],
                        prob.last_label
                    );
                    if prob.pos_class[i - 1] == k && k == prob.last_class {
                        if !self.extras.contains(&msg) {
                            self.extras.push(msg);
                        }
                    } else {
                        self.contradiction = Some(format!("{name}=0"));
                        return;
                    }
                }
            }
            for i in 1..=npos {
                for j in (i + 1)..=npos {
                    if pat.entries[i - 1] == pat.entries[j - 1] {
                        continue; // structural (same group)
                    }
                    if pat.entries[i - 1] == PatEntry::Zero || pat.entries[j - 1] == PatEntry::Zero
                    {
                        continue; // zero cases handled above
                    }
                    if vals[i - 1] == vals[j - 1] {
                        let nm = |e: PatEntry, pos: usize| match e {
                            PatEntry::Var(v) => prob.vars[v].clone(),
                            PatEntry::One => format!("coordinate {pos}"),
                            PatEntry::Zero => unreachable!(),
                        };
                        let msg = format!(
                            "{}={}",
                            nm(pat.entries[i - 1], i),
                            nm(pat.entries[j - 1], j)
                        );
                        if prob.pos_class[i - 1] == prob.pos_class[j - 1]
                            && prob.pos_class[i - 1] == k
                        {
                            let note = format!(
                                "{msg} (L{}, L{} and L{} concurrent)",
                                prob.deleted[k],
                                prob.pos_label[i - 1],
                                prob.pos_label[j - 1]
                            );
                            if !self.extras.contains(&note) {
                                self.extras.push(note);
                            }
                        } else {
                            self.contradiction = Some(msg);
                            return;
                        }
                    }
                }
            }
        }
        // Two surviving lines coinciding entirely.
        for i in 1..=npos {
            for j in (i + 1)..=npos {
                let same_a = self.entry_value(0, i) == self.entry_value(0, j);
                if !same_a {
                    continue;
                }
                let same_b = self.entry_value(1, i) == self.entry_value(1, j);
                if same_b {
                    self.contradiction = Some(format!(
                        "L{}=L{}",
                        prob.pos_label[i - 1],
                        prob.pos_label[j - 1]
                    ));
                    return;
                }
            }
        }
    }

    /// Solve the pencil round `alpha*t + beta*u = pattern[pat]` for the
    /// given parameter pair.  For 3 classes a structural pass (each
    /// equation solves its own designated variable); leftover equations
    /// become constraints.
    fn pencil_round(&mut self, pat: usize, ti: usize, ui: usize) -> Result<(), SolveError> {
        let prob = self.prob.clone();
        let npos = prob.dprime - 1;
        let is_open = |st: &Self, v: usize| !st.assign.contains_key(&v) && !prob.frees.contains(&v);
        let entry_var = |pat: usize, pos: usize| match prob.patterns[pat].entries[pos - 1] {
            PatEntry::Var(v) => Some(v),
            _ => None,
        };

        // [t:u] from the two positions where one of (alpha, beta) is
        // structurally zero; if absent, fall back to a greedy sweep.
        let z_b = (1..=npos).find(|&p| prob.patterns[1].entries[p - 1] == PatEntry::Zero);
        let z_a = (1..=npos).find(|&p| prob.patterns[0].entries[p - 1] == PatEntry::Zero);

        if prob.p == 3 {
            let (z_b, z_a) = match (z_b, z_a) {
                (Some(b), Some(a)) => (b, a),
                _ => return Err(SolveError::NoInvertibleBlock),
            };
            if self.symbolic_pencil {
                // Keep [t:u] symbolic: turn the two zero-position pencil
                // equations around, solving for the pattern entry instead.
                let t = self.value_of(ti);
                let u = self.value_of(ui);
                if let Some(v) = entry_var(pat, z_b).filter(|&v| is_open(self, v)) {
                    let val = self.entry_value(0, z_b).mul(&t);
                    self.assign_var(v, val)?;
                } else if let Some(v) = entry_var(0, z_b).filter(|&v| is_open(self, v)) {
                    let val = self.entry_value(pat, z_b).div(&t);
                    self.assign_var(v, val)?;
                } else {
                    self.push_round_constraint(pat, z_b, ti, ui);
                }
                if let Some(v) = entry_var(pat, z_a).filter(|&v| is_open(self, v)) {
                    let val = self.entry_value(1, z_a).mul(&u);
                    self.assign_var(v, val)?;
                } else if let Some(v) = entry_var(1, z_a).filter(|&v| is_open(self, v)) {
                    let val = self.entry_value(pat, z_a).div(&u);
                    self.assign_var(v, val)?;
                } else {
                    self.push_round_constraint(pat, z_a, ti, ui);
                }
            } else {
                let av = self.entry_value(0, z_b);
                let t_val = self.entry_value(pat, z_b).div(&av);
                self.assign_var(ti, t_val)?;
                let bv = self.entry_value(1, z_a);
                let u_val = self.entry_value(pat, z_a).div(&bv);
                self.assign_var(ui, u_val)?;
            }
            // Class-ordered structural solves: symbol positions first
            // (alpha group variables / gamma singletons), then the
            // remaining alpha singles, then the beta singles.
            let mut order: Vec<usize> = Vec::new();
            for cls in [2usize, 0, 1] {
                for p in 1..=npos {
                    if p != z_a && p != z_b && prob.pos_class[p - 1] == cls {
                        order.push(p);
                    }
                }
            }
            for p in order {
                if self.contradiction.is_some() {
                    return Ok(());
                }
                let t = self.value_of(ti);
                let u = self.value_of(ui);
                let va = self.entry_value(0, p);
                let vb = self.entry_value(1, p);
                let vg = self.entry_value(pat, p);
                if prob.pos_class[p - 1] == 2 {
                    if let Some(v) = entry_var(0, p).filter(|&v| is_open(self, v)) {
                        // alpha group variable from this symbol position
                        let val = vg.sub(&vb.mul(&u)).div(&t);
                        self.assign_var(v, val)?;
                        continue;
                    }
                    if let Some(v) = entry_var(pat, p).filter(|&v| is_open(self, v)) {
                        let val = va.mul(&t).add(&vb.mul(&u));
                        self.assign_var(v, val)?;
                        continue;
                    }
                } else if prob.pos_class[p - 1] == 0 {
                    if let Some(v) = entry_var(0, p).filter(|&v| is_open(self, v)) {
                        let val = vg.sub(&vb.mul(&u)).div(&t);
                        self.assign_var(v, val)?;
                        continue;
                    }
                } else if let Some(v) = entry_var(1, p).filter(|&v| is_open(self, v)) {
                    let val = vg.sub(&va.mul(&t)).div(&u);
                    self.assign_var(v, val)?;
                    continue;
                }
                // No designated variable available: keep the equation.
                self.push_round_constraint(pat, p, ti, ui);
            }
            return Ok(());
        }

        // 4-class rounds: greedy fixpoint, solving any equation with a
        // single open unknown; leftovers become constraints.
        let mut solved_eq = vec![false; npos + 1];
        loop {
            if self.contradiction.is_some() {
                return Ok(());
            }
            let mut progress = false;
            for p in 1..=npos {
                if solved_eq[p] {
                    continue;
                }
                let t = self.value_of(ti);
                let u = self.value_of(ui);
                let va = self.entry_value(0, p);
                let vb = self.entry_value(1, p);
                let vg = self.entry_value(pat, p);
                // residual = va*t + vb*u - vg as a rational function
                let res = va.mul(&t).add(&vb.mul(&u)).sub(&vg);
                let open: Vec<usize> = (0..prob.nvars())
                    .filter(|&v| {
                        res.num.uses_var(v)
                            && !self.assign.contains_key(&v)
                            && !prob.frees.contains(&v)
                    })
                    .collect();
                if res.is_zero() {
                    solved_eq[p] = true;
                    progress = true;
                    continue;
                }
                if open.len() != 1 {
                    continue;
                }
                let v = open[0];
                if res.num.degree_in(v) != 1 {
                    continue;
                }
                let coeffs = res.num.coeffs_in(v);
                let c1 = coeffs.get(&1).cloned().unwrap();
                let c0 = coeffs
                    .get(&0)
                    .cloned()
                    .unwrap_or_else(|| MultiPoly::zero(&self.field, prob.nvars()));
                let val = RatFunc::new(c0.neg(), c1);
                self.assign_var(v, val)?;
                solved_eq[p] = true;
                progress = true;
            }
            if !progress {
                break;
            }
        }
        for p in 1..=npos {
            if !solved_eq[p] {
                let t = self.value_of(ti);
                let u = self.value_of(ui);
                let res = self
                    .entry_value(0, p)
                    .mul(&t)
                    .add(&self.entry_value(1, p).mul(&u))
                    .sub(&self.entry_value(pat, p));
                if !res.is_zero() {
                    self.push_round_constraint_res(p, res);
                }
            }
        }
        Ok(())
    }

    fn push_round_constraint(&mut self, pat: usize, p: usize, ti: usize, ui: usize) {
        let t = self.value_of(ti);
        let u = self.value_of(ui);
        let res = self
            .entry_value(0, p)
            .mul(&t)
            .add(&self.entry_value(1, p).mul(&u))
            .sub(&self.entry_value(pat, p));
        if !res.is_zero() {
            self.push_round_constraint_res(p, res);
        }
    }

    fn push_round_constraint_res(&mut self, p: usize, res: RatFunc) {
        self.constraints.push(Constraint {
            label: vec![p],
            original: res.num.clone(), // already reduced; field may differ from Q
            current: res.num.clone(),
            status: ConstraintStatus::Pending,
            solved_var: None,
        });
    }

    /// Introduce [t:u] (and [t2:u2] for 4 classes) and solve the pencil
    /// equations, expressing the designated dependent variables in terms
    /// of the rest.  Idempotent.
    pub fn init_gamma(&mut self) -> Result<(), SolveError> {
        if self.init_done {
            return Ok(());
        }
        let prob = self.prob.clone();
        self.pencil_round(2, prob.t_idx, prob.u_idx)?;
        if prob.p == 4 {
            if self.contradiction.is_none() {
                self.pencil_round(3, prob.t2_idx.unwrap(), prob.u2_idx.unwrap())?;
            }
        }
        for (i, v) in [(prob.t_idx, "t"), (prob.u_idx, "u")] {
            if let Some(val) = self.assign.get(&i) {
                self.trace
                    .push(format!("init solve={v} expr={}", self.fmt_rat(val)));
            }
        }
        self.init_done = true;
        Ok(())
    }

    pub fn fmt_rat(&self, r: &RatFunc) -> String {
        r.to_string_with(&self.prob.names())
    }

    pub fn fmt_poly(&self, p: &MultiPoly) -> String {
        p.to_string_with(&self.prob.names())
    }

    /// Strip excluded-locus factors (known nonzero) off a residual.
    pub fn strip_excluded(&self, pl: &MultiPoly) -> MultiPoly {
        let mut r = pl.clone();
        loop {
            let mut divided = false;
            for f in &self.excluded {
                if r.is_constant() {
                    return r;
                }
                let fl = match lift_poly(f, &r.field) {
                    Ok(x) => x,
                    Err(_) => continue,
                };
                if let Some(q) = r.exact_div(&fl) {
                    r = q;
                    divided = true;
                }
            }
            if !divided {
                return r;
            }
        }
    }

    pub fn constraint_index(&self, label: &[usize]) -> Option<usize> {
        self.constraints
            .iter()
            .position(|c| c.label == label && matches!(c.status, ConstraintStatus::Pending))
    }

    /// Solve the pending constraint at `point` for `var_name`, globally
    /// back-substituting.  Degree-2 targets trigger an exact quadratic
    /// solve, adjoining a square root when necessary.
    pub fn eliminate(&mut self, point: &[usize], var_name: &str) -> Result<(), SolveError> {
        let prob = self.prob.clone();
        let var = prob
            .var_index(var_name)
            .ok_or_else(|| SolveError::UnknownVariable(var_name.into()))?;
        let ci = self
            .constraint_index(point)
            .ok_or_else(|| SolveError::UnknownPoint(fmt_point(point)))?;
        if self.assign.contains_key(&var) {
            return Err(SolveError::AlreadyAssigned(var_name.into()));
        }
        let mut residual = self.strip_excluded(&self.constraints[ci].current);
        if residual.is_zero() {
            self.constraints[ci].status = ConstraintStatus::Satisfied;
            return Ok(());
        }
        // A degeneration factor (nonzero on the net locus) may multiply
        // the intended linear equation; divide such factors out.
        if residual.degree_in(var) >= 2 {
            let cands = self.degeneration_candidates();
            'reduce: while residual.degree_in(var) >= 2 {
                for (_, f) in &cands {
                    let fl = match lift_poly(f, &residual.field) {
                        Ok(x) => x,
                        Err(_) => continue,
                    };
                    if fl.is_constant() {
                        continue;
                    }
                    if let Some(qt) = residual.exact_div(&fl) {
                        residual = qt;
                        continue 'reduce;
                    }
                }
                break;
            }
        }
        match residual.degree_in(var) {
            0 => Err(SolveError::ZeroLeadingCoefficient {
                point: fmt_point(point),
                var: var_name.into(),
            }),
            1 => {
                let coeffs = residual.coeffs_in(var);
                let c1 = coeffs.get(&1).cloned().unwrap();
                if c1.is_zero() {
                    return Err(SolveError::ZeroLeadingCoefficient {
                        point: fmt_point(point),
                        var: var_name.into(),
                    });
                }
                let c0 = coeffs
                    .get(&0)
                    .cloned()
                    .unwrap_or_else(|| MultiPoly::zero(&residual.field, residual.nvars));
                let val = RatFunc::new(c0.neg(), c1);
                self.constraints[ci].status = ConstraintStatus::Used;
                self.constraints[ci].solved_var = Some(var);
                self.trace.push(format!(
                    "point={} solve={} expr={}",
                    fmt_point(point),
                    prob.var_name(var),
                    self.fmt_rat(&val)
                ));
                self.assign_var(var, val)?;
                Ok(())
            }
            2 => {
                let val = self.solve_quadratic_in(&residual, var, true)?;
                self.constraints[ci].status = ConstraintStatus::Used;
                self.constraints[ci].solved_var = Some(var);
                self.trace.push(format!(
                    "point={} solve={} expr={}",
                    fmt_point(point),
                    prob.var_name(var),
                    self.fmt_rat(&val)
                ));
                self.assign_var(var, val)?;
                Ok(())
            }
            _ => Err(SolveError::NonlinearInTarget {
                point: fmt_point(point),
                var: var_name.into(),
            }),
        }
    }

    /// Solve for `var` by combining two pending constraints that are both
    /// quadratic in it: cross-multiplying by the leading coefficients
    /// cancels the square term, leaving a linear relation valid wherever
    /// the leading coefficients do not vanish.
    pub fn eliminate_pair(
        &mut self,
        p1: &[usize],
        p2: &[usize],
        var_name: &str,
    ) -> Result<(), SolveError> {
        let prob = self.prob.clone();
        let var = prob
            .var_index(var_name)
            .ok_or_else(|| SolveError::UnknownVariable(var_name.into()))?;
        if self.assign.contains_key(&var) {
            return Err(SolveError::AlreadyAssigned(var_name.into()));
        }
        let i1 = self
            .constraint_index(p1)
            .ok_or_else(|| SolveError::UnknownPoint(fmt_point(p1)))?;
        let i2 = self
            .constraint_index(p2)
            .ok_or_else(|| SolveError::UnknownPoint(fmt_point(p2)))?;
        let r1 = self.strip_excluded(&self.constraints[i1].current);
        let r2 = self.strip_excluded(&self.constraints[i2].current);
        if r1.degree_in(var) != 2 || r2.degree_in(var) != 2 {
            return Err(SolveError::NonlinearInTarget {
                point: format!("{}*{}", fmt_point(p1), fmt_point(p2)),
                var: var_name.into(),
            });
        }
        let l1 = r1.coeffs_in(var)[&2].clone();
        let l2 = r2.coeffs_in(var)[&2].clone();
        let combo = self.strip_excluded(&r1.mul(&l2).sub(&r2.mul(&l1)));
        if combo.degree_in(var) != 1 {
            return Err(SolveError::NonlinearInTarget {
                point: format!("{}*{}", fmt_point(p1), fmt_point(p2)),
                var: var_name.into(),
            });
        }
        let coeffs = combo.coeffs_in(var);
        let c1 = coeffs[&1].clone();
        if c1.is_zero() {
            return Err(SolveError::ZeroLeadingCoefficient {
                point: format!("{}*{}", fmt_point(p1), fmt_point(p2)),
                var: var_name.into(),
            });
        }
        let c0 = coeffs
            .get(&0)
            .cloned()
            .unwrap_or_else(|| MultiPoly::zero(&combo.field, combo.nvars));
        let val = RatFunc::new(c0.neg(), c1);
        self.trace.push(format!(
            "point={}*{} solve={} expr={}",
            fmt_point(p1),
            fmt_point(p2),
            prob.var_name(var),
            self.fmt_rat(&val)
        ));
        self.assign_var(var, val)?;
        Ok(())
    }

    /// Exact quadratic-formula solve for `var` inside `residual`,
    /// adjoining a quadratic irrationality when the discriminant is not a
    /// square.  `plus` picks the canonical root branch.
    fn solve_quadratic_in(
        &mut self,
        residual: &MultiPoly,
        var: usize,
        plus: bool,
    ) -> Result<RatFunc, SolveError> {
        let coeffs = residual.coeffs_in(var);
        let zero = MultiPoly::zero(&residual.field, residual.nvars);
        let a = coeffs.get(&2).cloned().unwrap_or_else(|| zero.clone());
        let b = coeffs.get(&1).cloned().unwrap_or_else(|| zero.clone());
        let c = coeffs.get(&0).cloned().unwrap_or_else(|| zero.clone());
        let four = MultiPoly::constant(Scalar::from_i64(&residual.field, 4), residual.nvars);
        let disc = b.mul(&b).sub(&four.mul(&a).mul(&c));
        let (h, sc) = poly_sqrt_up_to_scalar(&disc).ok_or_else(|| {
            SolveError::UnresolvedBranch(format!(
                "discriminant is not scalar*square: {}",
                self.fmt_poly(&disc)
            ))
        })?;
        // sc = r^2 * d with d squarefree.
        let sqrt_sc = match scalar_sqrt_decompose(&sc)? {
            (r, 1) => lift_scalar(&Scalar::rational(r), &self.field)?,
            (r, d) => {
                // Adjoin sqrt(d) if we are still over the rationals.
                match &self.field {
                    FieldDescriptor::Rationals => {
                        self.extend_field(d)?;
                        Scalar::quadratic(d, BigRational::zero(), r)?
                    }
                    FieldDescriptor::Quadratic { d: d0 } if *d0 == d => {
                        Scalar::quadratic(d, BigRational::zero(), r)?
                    }
                    other => {
                        return Err(SolveError::UnsupportedExtension(d, format!("{other:?}")))
                    }
                }
            }
        };
        let field = self.field.clone();
        let h = lift_poly(&h, &field)?;
        let a = lift_poly(&a, &field)?;
        let b = lift_poly(&b, &field)?;
        let sqrt_disc = h.mul_scalar(&sqrt_sc);
        let num = if plus {
            b.neg().add(&sqrt_disc)
        } else {
            b.neg().sub(&sqrt_disc)
        };
        let two = MultiPoly::constant(Scalar::from_i64(&field, 2), residual.nvars);
        Ok(RatFunc::new(num, two.mul(&a)))
    }

    /// Move the whole state into Q(sqrt(d)).
    fn extend_field(&mut self, d: i64) -> Result<(), SolveError> {
        let f = FieldDescriptor::quadratic(d)?;
        let mut assign = BTreeMap::new();
        for (k, v) in &self.assign {
            assign.insert(*k, lift_rat(v, &f)?);
        }
        self.assign = assign;
        for c in &mut self.constraints {
            c.current = lift_poly(&c.current, &f)?;
        }
        let mut excl = Vec::new();
        for e in &self.excluded {
            excl.push(lift_poly(e, &f)?);
        }
        self.excluded = excl;
        self.field = f;
        self.extension = Some(d);
        self.trace.push(format!("extend field D={d}"));
        Ok(())
    }

    /// Candidate degeneration factors for branch analysis: numerators of
    /// illegal coordinate differences and of illegal zero coordinates.
    fn degeneration_candidates(&self) -> Vec<(String, MultiPoly)> {
        let prob = self.prob.clone();
        let npos = prob.dprime - 1;
        let mut out: Vec<(String, MultiPoly)> = Vec::new();
        let mut push = |name: String, pl: MultiPoly| {
            if !pl.is_constant() && !out.iter().any(|(_, p)| *p == pl.monic()) {
                out.push((name, pl.monic()));
            }
        };
        for (k, pat) in prob.patterns.iter().enumerate() {
            for i in 1..=npos {
                let ei = pat.entries[i - 1];
                if ei == PatEntry::Zero {
                    continue;
                }
                let vi = self.entry_value(k, i);
                let benign_zero = prob.pos_class[i - 1] == k && k == prob.last_class;
                if !benign_zero {
                    let nm = match ei {
                        PatEntry::Var(v) => format!("{}=0", prob.vars[v]),
                        _ => continue,
                    };
                    push(nm, vi.num.clone());
                }
                for j in (i + 1)..=npos {
                    let ej = pat.entries[j - 1];
                    if ej == PatEntry::Zero || ei == ej {
                        continue;
                    }
                    let benign = prob.pos_class[i - 1] == prob.pos_class[j - 1]
                        && prob.pos_class[i - 1] == k;
                    if benign {
                        continue;
                    }
                    let vj = self.entry_value(k, j);
                    let nm = |e: PatEntry, pos: usize| match e {
                        PatEntry::Var(v) => prob.vars[v].clone(),
                        PatEntry::One => format!("1@{pos}"),
                        PatEntry::Zero => unreachable!(),
                    };
                    // Cross-multiplied numerator; the extra denominator
                    // factors are excluded, so stripping them recovers the
                    // reduced numerator without a rational-function gcd.
                    let diff = vi.num.mul(&vj.den).sub(&vj.num.mul(&vi.den));
                    push(format!("{}={}", nm(ei, i), nm(ej, j)), self.strip_excluded(&diff));
                }
            }
        }
        // [t:u] degenerating onto [1:0] or [0:1].
        for idx in [Some(prob.t_idx), Some(prob.u_idx), prob.t2_idx, prob.u2_idx]
            .into_iter()
            .flatten()
        {
            let v = self.value_of(idx);
            push(format!("{}=0", prob.vars[idx]), v.num.clone());
        }
        out
    }

    /// Factor a residual into degeneration candidates by repeated exact
    /// division; succeeds when the cofactor reduces to a nonzero scalar.
    pub fn branch_analysis(&mut self, point: &[usize]) -> Result<(), SolveError> {
        let ci = self
            .constraint_index(point)
            .ok_or_else(|| SolveError::UnknownPoint(fmt_point(point)))?;
        let r = self.strip_excluded(&self.constraints[ci].current);
        if r.is_zero() {
            return Err(SolveError::UnresolvedBranch("residual vanished".into()));
        }
        let branches = self
            .factor_into_degenerations(&r)
            .ok_or_else(|| SolveError::UnresolvedBranch(self.fmt_poly(&r)))?;
        self.constraints[ci].status = ConstraintStatus::Violated;
        self.branch_count = Some(branches.len());
        self.trace.push(format!(
            "point={} branches={}",
            fmt_point(point),
            branches.join("|")
        ));
        self.contradiction = Some(format!(
            "every factor of {} is a forbidden degeneration: {}",
            fmt_point(point),
            branches.join(", ")
        ));
        Ok(())
    }

    /// Full factorization of a residual into fatal degeneration factors;
    /// `Some(names)` when the cofactor reduces to a nonzero scalar.
    fn factor_into_degenerations(&self, r: &MultiPoly) -> Option<Vec<String>> {
        let cands = self.degeneration_candidates();
        let mut r = r.clone();
        let mut names: Vec<String> = Vec::new();
        'outer: while !r.is_constant() {
            for (name, f) in &cands {
                let fl = match lift_poly(f, &r.field) {
                    Ok(x) => x,
                    Err(_) => continue,
                };
                if fl.is_constant() {
                    continue;
                }
                if let Some(qt) = r.exact_div(&fl) {
                    names.push(name.clone());
                    r = qt;
                    continue 'outer;
                }
            }
            return None;
        }
        if r.is_zero() {
            None
        } else {
            Some(names)
        }
    }

    /// Final sweep: mark vanished constraints satisfied, detect residuals
    /// forcing a forbidden degeneration, solve stragglers that are linear
    /// in a non-designated variable (or quadratic in a lone variable),
    /// and leave genuine hypersurface constraints pending.
    pub fn finish(&mut self) -> Result<(), SolveError> {
        loop {
            if self.contradiction.is_some() {
                return Ok(());
            }
            // Pass 1: satisfied / contradictory constraints.
            for ci in 0..self.constraints.len() {
                if !matches!(self.constraints[ci].status, ConstraintStatus::Pending) {
                    continue;
                }
                let r = self.strip_excluded(&self.constraints[ci].current);
                if r.is_zero() {
                    self.constraints[ci].status = ConstraintStatus::Satisfied;
                    continue;
                }
                if r.is_constant() {
                    self.constraints[ci].status = ConstraintStatus::Violated;
                    self.contradiction = Some(format!(
                        "constraint {} reduces to a nonzero constant",
                        fmt_point(&self.constraints[ci].label)
                    ));
                    return Ok(());
                }
                if let Some(names) = self.factor_into_degenerations(&r) {
                    self.constraints[ci].status = ConstraintStatus::Violated;
                    let label = fmt_point(&self.constraints[ci].label);
                    self.trace
                        .push(format!("point={} branches={}", label, names.join("|")));
                    self.contradiction = Some(names.join(", "));
                    return Ok(());
                }
            }
            let mut acted = false;
            for ci in 0..self.constraints.len() {
                if !matches!(self.constraints[ci].status, ConstraintStatus::Pending) {
                    continue;
                }
                let r = self.strip_excluded(&self.constraints[ci].current);
                if r.is_zero() || r.is_constant() {
                    continue;
                }
                let used: Vec<usize> = (0..self.prob.nvars())
                    .filter(|&v| r.uses_var(v))
                    .collect();
                // A lone-variable constraint pins that variable even if it
                // was designated free.
                if used.len() == 1 {
                    let v = used[0];
                    if !self.assign.contains_key(&v) {
                        let label = self.constraints[ci].label.clone();
                        let val = match r.degree_in(v) {
                            1 => {
                                let coeffs = r.coeffs_in(v);
                                let c1 = coeffs.get(&1).cloned().unwrap();
                                let c0 = coeffs
                                    .get(&0)
                                    .cloned()
                                    .unwrap_or_else(|| MultiPoly::zero(&r.field, r.nvars));
                                RatFunc::new(c0.neg(), c1)
                            }
                            2 => self.solve_quadratic_in(&r, v, true)?,
                            _ => continue,
                        };
                        self.constraints[ci].status = ConstraintStatus::Used;
                        self.constraints[ci].solved_var = Some(v);
                        self.trace.push(format!(
                            "point={} solve={} expr={}",
                            fmt_point(&label),
                            self.prob.var_name(v),
                            self.fmt_rat(&val)
                        ));
                        self.assign_var(v, val)?;
                        acted = true;
                        break;
                    }
                }
                // Otherwise: linear in some open non-designated variable.
                if let Some(&v) = used.iter().find(|&&v| {
                    !self.assign.contains_key(&v)
                        && !self.prob.frees.contains(&v)
                        && r.degree_in(v) == 1
                        && !r.coeffs_in(v).get(&1).cloned().unwrap().is_zero()
                }) {
                    let label = self.constraints[ci].label.clone();
                    let coeffs = r.coeffs_in(v);
                    let c1 = coeffs.get(&1).cloned().unwrap();
                    let c0 = coeffs
                        .get(&0)
                        .cloned()
                        .unwrap_or_else(|| MultiPoly::zero(&r.field, r.nvars));
                    let val = RatFunc::new(c0.neg(), c1);
                    self.constraints[ci].status = ConstraintStatus::Used;
                    self.constraints[ci].solved_var = Some(v);
                    self.trace.push(format!(
                        "point={} solve={} expr={}",
                        fmt_point(&label),
                        self.prob.var_name(v),
                        self.fmt_rat(&val)
                    ));
                    self.assign_var(v, val)?;
                    acted = true;
                    break;
                }
            }
            if !acted {
                return Ok(());
            }
        }
    }

    /// Deduplicated residual constraints (monic), with excluded-locus and
    /// degeneration factors (nonzero on the net locus) divided out.
    pub fn residual_constraints(&self) -> Vec<MultiPoly> {
        let cands = self.degeneration_candidates();
        let mut out: Vec<MultiPoly> = Vec::new();
        for c in &self.constraints {
            if matches!(c.status, ConstraintStatus::Pending) {
                let mut r = self.strip_excluded(&c.current);
                'reduce: while !r.is_zero() && !r.is_constant() {
                    for (_, f) in &cands {
                        let fl = match lift_poly(f, &r.field) {
                            Ok(x) => x,
                            Err(_) => continue,
                        };
                        if fl.is_constant() {
                            continue;
                        }
                        if let Some(qt) = r.exact_div(&fl) {
                            if !qt.is_constant() {
                                r = qt;
                                continue 'reduce;
                            }
                        }
                    }
                    break;
                }
                if !r.is_zero() && !r.is_constant() {
                    let m = r.monic();
                    if !out.contains(&m) {
                        out.push(m);
                    }
                }
            }
        }
        out
    }
}

/// Rational scalar as r^2 * d with d a squarefree integer (sign kept in d).
fn scalar_sqrt_decompose(s: &Scalar) -> Result<(BigRational, i64), SolveError> {
    let r = s
        .as_rational()
        .or_else(|| s.quad_parts().and_then(|(x, y)| if y.is_zero() { Some(x) } else { None }))
        .ok_or(SolveError::DivisionByZeroPolynomial)?
        .clone();
    if r.is_zero() {
        return Ok((BigRational::zero(), 1));
    }
    let n = r.numer() * r.denom(); // r = n / denom^2 * (1/1)
    let mut m: BigInt = n.abs();
    let mut root = BigInt::one();
    let mut d: i64 = if n.is_negative() { -1 } else { 1 };
    let mut f = BigInt::from(2u32);
    while &f * &f <= m {
        let mut count = 0u32;
        while (&m % &f).is_zero() {
            m /= &f;
            count += 1;
        }
        for _ in 0..(count / 2) {
            root *= &f;
        }
        if count % 2 == 1 {
            d = d
                .checked_mul(i64::try_from(&f).map_err(|_| {
                    SolveError::UnresolvedBranch("squarefree part overflows".into())
                })?)
                .ok_or_else(|| SolveError::UnresolvedBranch("squarefree part overflows".into()))?;
        }
        f += 1u32;
    }
    if !m.is_one() {
        d = d
            .checked_mul(i64::try_from(&m).map_err(|_| {
                SolveError::UnresolvedBranch("squarefree part overflows".into())
            })?)
            .ok_or_else(|| SolveError::UnresolvedBranch("squarefree part overflows".into()))?;
    }
    // s = (root/denom)^2 * d
    let rat = BigRational::new(root, r.denom().clone());
    Ok((rat, d))
}

/// A realized moduli family: parameter names, full coordinate formulas,
/// residual hypersurface constraints and excluded locus.
#[derive(Debug, Clone)]
pub struct ParamFamily {
    pub case_id: String,
    pub prob: Arc<Problem>,
    pub field: FieldDescriptor,
    /// Display names of the free parameters.
    pub params: Vec<String>,
    /// Value of every variable (free ones map to themselves).
    pub values: Vec<RatFunc>,
    pub constraints: Vec<MultiPoly>,
    pub excluded: Vec<MultiPoly>,
    pub extras: Vec<String>,
    pub trace: Vec<String>,
    /// Species key of the first square.
    pub species: LatinSquare,
}

impl ParamFamily {
    /// Dimension of the family: free parameters minus independent
    /// hypersurface constraints.
    pub fn dim(&self) -> usize {
        self.params.len() - self.constraints.len()
    }
}

#[derive(Debug, Clone)]
pub struct ContradictionTrace {
    pub case_id: String,
    pub reason: String,
    pub steps_used: usize,
    pub branch_count: Option<usize>,
    pub trace: Vec<String>,
}

#[derive(Debug, Clone)]
pub enum SolveOutcome {
    Family(Box<ParamFamily>),
    Contradiction(ContradictionTrace),
}

impl SolveOutcome {
    pub fn family(&self) -> Option<&ParamFamily> {
        match self {
            SolveOutcome::Family(f) => Some(f),
            _ => None,
        }
    }

    pub fn contradiction(&self) -> Option<&ContradictionTrace> {
        match self {
            SolveOutcome::Contradiction(c) => Some(c),
            _ => None,
        }
    }

    /// Stable text trace: one line per step, final FAMILY/CONTRADICTION.
    pub fn trace_text(&self) -> String {
        let mut lines: Vec<String> = Vec::new();
        match self {
            SolveOutcome::Family(f) => {
                lines.extend(f.trace.iter().cloned());
                let cons: Vec<String> = f
                    .constraints
                    .iter()
                    .map(|c| c.to_string_with(&f.prob.names()))
                    .collect();
                lines.push(format!(
                    "FAMILY params={} constraints={}",
                    f.params.join(","),
                    if cons.is_empty() {
                        "none".into()
                    } else {
                        cons.join(" ; ")
                    }
                ));
            }
            SolveOutcome::Contradiction(c) => {
                lines.extend(c.trace.iter().cloned());
                lines.push(format!("CONTRADICTION reason={}", c.reason));
            }
        }
        lines.join("\n")
    }

    /// JSON mirror of the text trace.
    pub fn trace_json(&self) -> serde_json::Value {
        match self {
            SolveOutcome::Family(f) => serde_json::json!({
                "outcome": "family",
                "params": f.params,
                "constraints": f.constraints.iter()
                    .map(|c| c.to_string_with(&f.prob.names())).collect::<Vec<_>>(),
                "steps": f.trace,
                "extras": f.extras,
            }),
            SolveOutcome::Contradiction(c) => serde_json::json!({
                "outcome": "contradiction",
                "reason": c.reason,
                "branches": c.branch_count,
                "steps": c.trace,
            }),
        }
    }
}

/// One step of an elimination schedule.
#[derive(Debug, Clone)]
pub enum Step {
    Solve(Vec<usize>, &'static str),
    /// Solve for a variable from the first pending constraint that is
    /// linear in it (for schedules where the source point is ambiguous).
    SolveVar(&'static str),
    /// Case split on the factors of the constraint at this point.
    Branch(Vec<usize>),
}

/// A built-in case: squares, designated parameters and schedule.
#[derive(Debug, Clone)]
pub struct CaseSpec {
    pub id: &'static str,
    pub squares: Vec<LatinSquare>,
    pub frees: Vec<(&'static str, &'static str)>,
    pub schedule: Vec<Step>,
    /// Use the greedy auto-scheduler instead of `schedule`.
    pub auto: bool,
    /// Keep [t:u] symbolic during the pencil rounds.
    pub symbolic_pencil: bool,
}

/// Greedy auto-scheduler: repeatedly solve the lexicographically first
/// pending constraint that is linear in some open, non-designated
/// variable.  Deterministic; a heuristic for squares without a built-in
/// schedule.
pub fn auto_schedule(state: &mut EliminationState) -> Result<(), SolveError> {
    loop {
        if state.contradiction.is_some() {
            return Ok(());
        }
        let mut pick: Option<(Vec<usize>, usize)> = None;
        let mut labels: Vec<Vec<usize>> = state
            .constraints
            .iter()
            .filter(|c| matches!(c.status, ConstraintStatus::Pending))
            .map(|c| c.label.clone())
            .collect();
        labels.sort();
        labels.dedup();
        'search: for label in labels {
            let ci = match state.constraint_index(&label) {
                Some(i) => i,
                None => continue,
            };
            let r = state.strip_excluded(&state.constraints[ci].current);
            if r.is_zero() || r.is_constant() {
                continue;
            }
            for v in 0..state.prob.nvars() {
                if state.assign.contains_key(&v) || state.prob.frees.contains(&v) {
                    continue;
                }
                if r.degree_in(v) == 1 && !r.coeffs_in(v)[&1].is_zero() {
                    pick = Some((label, v));
                    break 'search;
                }
            }
        }
        match pick {
            Some((label, v)) => {
                let name = state.prob.vars[v].clone();
                state.eliminate(&label, &name)?;
            }
            None => return Ok(()),
        }
    }
}

/// Run a case end to end: build patterns, init, schedule, final sweep.
pub fn run_case(case: &CaseSpec) -> Result<SolveOutcome, SolveError> {
    let prob = Arc::new(build_patterns(&case.squares, &case.frees)?);
    let mut state = EliminationState::new(prob.clone());
    state.symbolic_pencil = case.symbolic_pencil;
    state.init_gamma()?;
    let mut steps_used = 0usize;
    if state.contradiction.is_none() {
        if case.auto {
            auto_schedule(&mut state)?;
        } else {
            for step in &case.schedule {
                if state.contradiction.is_some() {
                    break;
                }
                match step {
                    Step::Solve(point, var) => {
                        steps_used += 1;
                        match state.eliminate(point, var) {
                            Ok(()) => {}
                            Err(SolveError::NonlinearInTarget { .. })
                            | Err(SolveError::ZeroLeadingCoefficient { .. }) => {
                                state.branch_analysis(point)?;
                            }
                            Err(e) => return Err(e),
                        }
                    }
                    Step::SolveVar(var) => {
                        steps_used += 1;
                        let v = state
                            .prob
                            .var_index(var)
                            .ok_or_else(|| SolveError::UnknownVariable(var.to_string()))?;
                        let mut labels: Vec<Vec<usize>> = state
                            .constraints
                            .iter()
                            .filter(|c| matches!(c.status, ConstraintStatus::Pending))
                            .map(|c| c.label.clone())
                            .collect();
                        labels.sort();
                        labels.dedup();
                        // Prefer the constraint giving the smallest solved
                        // expression, to keep downstream work manageable.
                        let label = labels
                            .iter()
                            .filter_map(|l| {
                                let ci = state.constraint_index(l)?;
                                let r = state.strip_excluded(&state.constraints[ci].current);
                                if r.degree_in(v) == 1 && !r.coeffs_in(v)[&1].is_zero() {
                                    let cs = r.coeffs_in(v);
                                    let score = cs.get(&0).map_or(0, |p| p.terms.len())
                                        + cs[&1].terms.len();
                                    Some((score, r.terms.len(), l.clone()))
                                } else {
                                    None
                                }
                            })
                            .min()
                            .map(|(_, _, l)| l);
                        if let Some(label) = label {
                            state.eliminate(&label, var)?;
                        } else {
                            // No single constraint is linear in the target;
                            // cross-multiply the two smallest quadratics in
                            // it to cancel the square term.
                            let mut quads: Vec<(usize, Vec<usize>)> = labels
                                .iter()
                                .filter_map(|l| {
                                    let ci = state.constraint_index(l)?;
                                    let r = state
                                        .strip_excluded(&state.constraints[ci].current);
                                    if r.degree_in(v) == 2 {
                                        Some((r.terms.len(), l.clone()))
                                    } else {
                                        None
                                    }
                                })
                                .collect();
                            quads.sort();
                            if quads.len() < 2 {
                                return Err(SolveError::UnknownVariable(var.to_string()));
                            }
                            state.eliminate_pair(&quads[0].1, &quads[1].1, var)?;
                        }
                    }
                    Step::Branch(point) => {
                        steps_used += 1;
                        state.branch_analysis(point)?;
                    }
                }
            }
        }
    }
    if state.contradiction.is_none() {
        state.finish()?;
    }
    finish_outcome(case.id, prob, state, steps_used)
}

fn finish_outcome(
    id: &str,
    prob: Arc<Problem>,
    state: EliminationState,
    steps_used: usize,
) -> Result<SolveOutcome, SolveError> {
    if let Some(reason) = state.contradiction.clone() {
        return Ok(SolveOutcome::Contradiction(ContradictionTrace {
            case_id: id.into(),
            reason,
            steps_used,
            branch_count: state.branch_count,
            trace: state.trace,
        }));
    }
    let params: Vec<String> = prob
        .frees
        .iter()
        .filter(|v| !state.assign.contains_key(v))
        .map(|&v| prob.var_name(v).to_string())
        .collect();
    let values: Vec<RatFunc> = (0..prob.nvars()).map(|v| state.value_of(v)).collect();
    let constraints = state.residual_constraints();
    Ok(SolveOutcome::Family(Box::new(ParamFamily {
        case_id: id.into(),
        prob: prob.clone(),
        field: state.field.clone(),
        params,
        values,
        constraints,
        excluded: state.excluded.clone(),
        extras: state.extras.clone(),
        trace: state.trace.clone(),
        species: prob.squares[0].species_representative(),
    })))
}

/// Evaluate a family at explicit parameter values (keyed by display
/// name), returning the full labeled line list of the net: class k lines
/// carry labels kq+1..(k+1)q.
pub fn specialize(
    family: &ParamFamily,
    values: &BTreeMap<String, Scalar>,
) -> Result<Vec<(usize, ProjLine)>, SolveError> {
    let prob = &family.prob;
    // Working field: the field of the supplied values (they must all
    // agree), which must admit the family's field.
    let field = values
        .values()
        .next()
        .map(|s| s.field().clone())
        .unwrap_or_else(|| family.field.clone());
    if family.field != FieldDescriptor::Rationals && field != family.field {
        return Err(SolveError::UnsupportedExtension(
            0,
            format!("family over {:?}, values over {:?}", family.field, field),
        ));
    }
    let mut full: Vec<Scalar> = vec![Scalar::from_i64(&field, 0); prob.nvars()];
    let mut free_set = vec![false; prob.nvars()];
    for (&v, _) in prob
        .frees
        .iter()
        .map(|v| (v, ()))
        .collect::<Vec<_>>()
        .iter()
    {
        if family.params.contains(&prob.var_name(v).to_string()) {
            let s = values
                .get(prob.var_name(v))
                .ok_or_else(|| SolveError::MissingParameter(prob.var_name(v).into()))?;
            full[v] = lift_scalar(s, &field)?;
            free_set[v] = true;
        }
    }
    // Evaluate every variable.
    let mut vals: Vec<Scalar> = vec![Scalar::from_i64(&field, 0); prob.nvars()];
    for v in 0..prob.nvars() {
        if free_set[v] {
            vals[v] = full[v].clone();
            continue;
        }
        let rf = lift_rat(&family.values[v], &field)?;
        let free_vals: Vec<Scalar> = (0..prob.nvars())
            .map(|i| if free_set[i] { full[i].clone() } else { Scalar::from_i64(&field, 0) })
            .collect();
        match rf.eval(&free_vals) {
            Some(s) => vals[v] = s,
            None => {
                return Err(SolveError::OnExcludedLocus(format!(
                    "denominator of {} vanishes",
                    prob.var_name(v)
                )))
            }
        }
    }
    // Constraints must vanish, excluded locus must not.
    for c in &family.constraints {
        let cv = lift_poly(c, &field)?.eval(&vals);
        if !cv.is_zero() {
            return Err(SolveError::ConstraintNotSatisfied(
                c.to_string_with(&prob.names()),
            ));
        }
    }
    for e in &family.excluded {
        let ev = lift_poly(e, &field)?.eval(&vals);
        if ev.is_zero() {
            return Err(SolveError::OnExcludedLocus(e.to_string_with(&prob.names())));
        }
    }
    emit_lines(prob, &field, &vals)
}

/// Assemble the labeled line list from evaluated variables.
fn emit_lines(
    prob: &Problem,
    field: &FieldDescriptor,
    vals: &[Scalar],
) -> Result<Vec<(usize, ProjLine)>, SolveError> {
    let zero = Scalar::from_i64(field, 0);
    let one = Scalar::from_i64(field, 1);
    let mut out: Vec<(usize, ProjLine)> = Vec::new();
    // Special pencil parameters per deleted line.
    let tu = |k: usize| -> (Scalar, Scalar) {
        match k {
            0 => (one.clone(), zero.clone()),
            1 => (zero.clone(), one.clone()),
            2 => (vals[prob.t_idx].clone(), vals[prob.u_idx].clone()),
            _ => (
                vals[prob.t2_idx.unwrap()].clone(),
                vals[prob.u2_idx.unwrap()].clone(),
            ),
        }
    };
    for (k, &label) in prob.deleted.iter().enumerate() {
        let (t, u) = tu(k);
        // Line u*x - t*y through [0:0:1].
        out.push((label, ProjLine::new([u, t.neg(), zero.clone()])?));
    }
    let entry_scalar = |pat: usize, pos: usize| -> Scalar {
        match prob.patterns[pat].entries[pos - 1] {
            PatEntry::Zero => zero.clone(),
            PatEntry::One => one.clone(),
            PatEntry::Var(v) => vals[v].clone(),
        }
    };
    for pos in 1..prob.dprime {
        let a = entry_scalar(0, pos);
        let b = entry_scalar(1, pos);
        out.push((prob.pos_label[pos - 1], ProjLine::new([a, b, one.clone()])?));
    }
    out.push((
        prob.last_label,
        ProjLine::new([zero.clone(), zero.clone(), one])?,
    ));
    out.sort_by_key(|(l, _)| *l);
    Ok(out)
}

// ---------------------------------------------------------------------
// Built-in case data.
// ---------------------------------------------------------------------

fn sq(rows: &[&[u8]]) -> LatinSquare {
    LatinSquare::new(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
}

pub fn square_36(idx: usize) -> LatinSquare {
    let tables: [&[&[u8]]; 12] = [
        &[
            &[1, 2, 3, 4, 5, 6],
            &[2, 3, 4, 5, 6, 1],
            &[3, 4, 5, 6, 1, 2],
            &[4, 5, 6, 1, 2, 3],
            &[5, 6, 1, 2, 3, 4],
            &[6, 1, 2, 3, 4, 5],
        ],
        &[
            &[1, 2, 3, 4, 5, 6],
            &[2, 1, 5, 6, 3, 4],
            &[3, 6, 1, 5, 4, 2],
            &[4, 5, 6, 1, 2, 3],
            &[5, 4, 2, 3, 6, 1],
            &[6, 3, 4, 2, 1, 5],
        ],
        &[
            &[1, 2, 3, 4, 5, 6],
            &[2, 3, 1, 5, 6, 4],
            &[3, 1, 2, 6, 4, 5],
            &[4, 6, 5, 2, 1, 3],
            &[5, 4, 6, 3, 2, 1],
            &[6, 5, 4, 1, 3, 2],
        ],
        &[
            &[1, 2, 3, 4, 5, 6],
            &[2, 1, 4, 3, 6, 5],
            &[3, 4, 5, 6, 1, 2],
            &[4, 3, 6, 5, 2, 1],
            &[5, 6, 1, 2, 4, 3],
            &[6, 5, 2, 1, 3, 4],
        ],
        &[
            &[1, 2, 3, 4, 5, 6],
            &[2, 1, 4, 3, 6, 5],
            &[3, 4, 5, 6, 1, 2],
            &[4, 3, 6, 5, 2, 1],
            &[5, 6, 2, 1, 4, 3],
            &[6, 5, 1, 2, 3, 4],
        ],
        &[
            &[1, 2, 3, 4, 5, 6],
            &[2, 1, 4, 5, 6, 3],
            &[3, 6, 2, 1, 4, 5],
            &[4, 5, 6, 2, 3, 1],
            &[5, 3, 1, 6, 2, 4],
            &[6, 4, 5, 3, 1, 2],
        ],
        &[
            &[1, 2, 3, 4, 5, 6],
            &[2, 1, 4, 3, 6, 5],
            &[3, 5, 1, 6, 4, 2],
            &[4, 6, 5, 1, 2, 3],
            &[5, 3, 6, 2, 1, 4],
            &[6, 4, 2, 5, 3, 1],
        ],
        &[
            &[1, 2, 3, 4, 5, 6],
            &[2, 1, 6, 5, 3, 4],
            &[3, 6, 1, 2, 4, 5],
            &[4, 5, 2, 1, 6, 3],
            &[5, 3, 4, 6, 1, 2],
            &[6, 4, 5, 3, 2, 1],
        ],
        &[
            &[1, 2, 3, 4, 5, 6],
            &[2, 3, 1, 6, 4, 5],
            &[3, 1, 2, 5, 6, 4],
            &[4, 6, 5, 1, 2, 3],
            &[5, 4, 6, 2, 3, 1],
            &[6, 5, 4, 3, 1, 2],
        ],
        &[
            &[1, 2, 3, 4, 5, 6],
            &[2, 1, 6, 5, 4, 3],
            &[3, 5, 1, 2, 6, 4],
            &[4, 6, 2, 1, 3, 5],
            &[5, 3, 4, 6, 2, 1],
            &[6, 4, 5, 3, 1, 2],
        ],
        &[
            &[1, 2, 3, 4, 5, 6],
            &[2, 1, 4, 5, 6, 3],
            &[3, 4, 2, 6, 1, 5],
            &[4, 5, 6, 2, 3, 1],
            &[5, 6, 1, 3, 2, 4],
            &[6, 3, 5, 1, 4, 2],
        ],
        &[
            &[1, 2, 3, 4, 5, 6],
            &[2, 1, 5, 6, 4, 3],
            &[3, 5, 4, 2, 6, 1],
            &[4, 6, 2, 3, 1, 5],
            &[5, 4, 6, 1, 3, 2],
            &[6, 3, 1, 5, 2, 4],
        ],
    ];
    sq(tables[idx - 1])
}

pub fn square_34(idx: usize) -> LatinSquare {
    match idx {
        1 => sq(&[
            &[1, 2, 3, 4],
            &[2, 3, 4, 1],
            &[3, 4, 1, 2],
            &[4, 1, 2, 3],
        ]),
        _ => sq(&[
            &[1, 2, 3, 4],
            &[2, 1, 4, 3],
            &[3, 4, 1, 2],
            &[4, 3, 2, 1],
        ]),
    }
}

pub fn square_35(idx: usize) -> LatinSquare {
    match idx {
        1 => sq(&[
            &[1, 2, 3, 4, 5],
            &[2, 3, 4, 5, 1],
            &[3, 4, 5, 1, 2],
            &[4, 5, 1, 2, 3],
            &[5, 1, 2, 3, 4],
        ]),
        _ => sq(&[
            &[1, 2, 3, 4, 5],
            &[2, 1, 4, 5, 3],
            &[3, 5, 1, 2, 4],
            &[4, 3, 5, 1, 2],
            &[5, 4, 2, 3, 1],
        ]),
    }
}

/// The two orthogonal order-3 squares of the dual Hesse configuration.
pub fn hesse_squares() -> Vec<LatinSquare> {
    vec![
        sq(&[&[1, 2, 3], &[2, 3, 1], &[3, 1, 2]]),
        sq(&[&[1, 2, 3], &[3, 1, 2], &[2, 3, 1]]),
    ]
}

/// The two orthogonal order-4 squares of the (4,4) nonexistence run.
pub fn squares_44() -> Vec<LatinSquare> {
    vec![
        sq(&[
            &[1, 2, 3, 4],
            &[2, 1, 4, 3],
            &[3, 4, 1, 2],
            &[4, 3, 2, 1],
        ]),
        sq(&[
            &[1, 2, 3, 4],
            &[3, 4, 1, 2],
            &[4, 3, 2, 1],
            &[2, 1, 4, 3],
        ]),
    ]
}

fn st(pts: &[(&[usize], &'static str)]) -> Vec<Step> {
    pts.iter()
        .map(|(p, v)| Step::Solve(p.to_vec(), v))
        .collect()
}

/// Built-in schedules and parameter designations, keyed by case id.
///
/// The published tables for one-square cases index rows by the first
/// class; our incidence builder indexes columns by the first class, so
/// those squares enter transposed (a no-op for the symmetric ones).
pub fn case_spec(id: &str) -> Result<CaseSpec, SolveError> {
    let t = |s: LatinSquare| s.conjugate(1);
    let spec = match id {
        "net32" => CaseSpec {
            id: "net32",
            squares: vec![t(sq(&[&[1, 2], &[2, 1]]))],
            frees: vec![],
            schedule: vec![],
            auto: false,
            symbolic_pencil: false,
        },
        "net33" => CaseSpec {
            id: "net33",
            squares: vec![t(sq(&[&[1, 2, 3], &[2, 3, 1], &[3, 1, 2]]))],
            frees: vec![("a2", "a"), ("b2", "b"), ("c1", "c")],
            schedule: vec![],
            auto: false,
            symbolic_pencil: false,
        },
        "net34_M1" => CaseSpec {
            id: "net34_M1",
            squares: vec![t(square_34(1))],
            frees: vec![("a3", "a"), ("b4", "b"), ("c2", "c")],
            schedule: st(&[
                (&[1, 5, 9], "c4"),
                (&[2, 4, 9], "c1"),
                (&[1, 4, 8], "b1"),
            ]),
            auto: false,
            symbolic_pencil: false,
        },
        "net34_M2" => CaseSpec {
            id: "net34_M2",
            squares: vec![t(square_34(2))],
            frees: vec![("a3", "a"), ("b4", "b"), ("c2", "c")],
            schedule: vec![],
            auto: true,
            symbolic_pencil: false,
        },
        "net35_M1" => CaseSpec {
            id: "net35_M1",
            squares: vec![t(square_35(1))],
            frees: vec![("a4", "a"), ("b6", "b"), ("c3", "c"), ("c1", "d")],
            schedule: st(&[
                (&[3, 5, 12], "b2"),
                (&[4, 8, 11], "c6"),
                (&[2, 6, 12], "c5"),
                (&[2, 8, 9], "b1"),
                (&[3, 8, 10], "c2"),
            ]),
            auto: false,
            symbolic_pencil: false,
        },
        "net35_M2" => CaseSpec {
            id: "net35_M2",
            squares: vec![t(square_35(2))],
            frees: vec![("a4", "a"), ("b6", "b"), ("c1", "c")],
            schedule: vec![],
            auto: true,
            symbolic_pencil: false,
        },
        "net36_M1" => CaseSpec {
            id: "net36_M1",
            squares: vec![t(square_36(1))],
            frees: vec![("a5", "a"), ("b1", "d"), ("b8", "b"), ("c4", "c")],
            schedule: st(&[
                (&[4, 6, 15], "c3"),
                (&[5, 10, 14], "c8"),
                (&[1, 9, 15], "c1"),
                (&[5, 9, 13], "c7"),
                (&[3, 10, 12], "c6"),
                (&[2, 10, 11], "b3"),
                (&[3, 9, 11], "c2"),
                (&[2, 8, 15], "b2"),
            ]),
            auto: false,
            symbolic_pencil: false,
        },
        "net36_M2" => CaseSpec {
            id: "net36_M2",
            squares: vec![t(square_36(2))],
            frees: vec![("a5", "a"), ("b3", "e"), ("c4", "c")],
            schedule: st(&[
                (&[5, 10, 14], "c8"),
                (&[2, 6, 15], "c1"),
                (&[1, 10, 13], "c7"),
                (&[1, 9, 12], "c6"),
                (&[2, 10, 11], "b1"),
                (&[5, 6, 12], "c3"),
                (&[1, 8, 15], "b2"),
                (&[1, 7, 14], "b8"),
                (&[2, 8, 14], "c2"),
            ]),
            auto: false,
            symbolic_pencil: false,
        },
        "net36_M3" => CaseSpec {
            id: "net36_M3",
            squares: vec![t(square_36(3))],
            frees: vec![("a5", "a"), ("c3", "d"), ("c2", "e"), ("c4", "c")],
            schedule: st(&[
                (&[5, 10, 11], "b8"),
                (&[1, 9, 15], "c8"),
                (&[5, 9, 12], "c6"),
                (&[3, 6, 15], "c1"),
                (&[1, 10, 13], "c7"),
                (&[4, 9, 11], "b3"),
                (&[1, 6, 12], "b1"),
                (&[3, 10, 12], "b2"),
            ]),
            auto: false,
            symbolic_pencil: false,
        },
        "net36_M4" => CaseSpec {
            id: "net36_M4",
            squares: vec![t(square_36(4))],
            frees: vec![],
            schedule: st(&[
                (&[5, 10, 13], "c7"),
                (&[3, 7, 15], "c6"),
                (&[2, 8, 15], "b2"),
                (&[4, 6, 15], "c3"),
                (&[5, 6, 14], "a5"),
                (&[1, 9, 15], "c8"),
                (&[1, 10, 14], "c1"),
                (&[3, 8, 14], "c2"),
                (&[2, 10, 11], "c4"),
                (&[2, 6, 13], "b1"),
            ]),
            auto: false,
            symbolic_pencil: false,
        },
        "net36_M5" => CaseSpec {
            id: "net36_M5",
            squares: vec![t(square_36(5))],
            frees: vec![],
            schedule: st(&[(&[5, 10, 13], "c7"), (&[3, 7, 15], "c6")]),
            auto: false,
            symbolic_pencil: false,
        },
        "net36_M6" => CaseSpec {
            id: "net36_M6",
            squares: vec![t(square_36(6))],
            frees: vec![("b8", "b"), ("c2", "d"), ("c4", "c")],
            schedule: st(&[
                (&[5, 10, 11], "a5"),
                (&[1, 9, 15], "c8"),
                (&[3, 7, 15], "c6"),
                (&[2, 6, 15], "b1"),
                (&[5, 6, 13], "c7"),
                (&[4, 9, 11], "b3"),
                (&[2, 9, 13], "c1"),
                (&[1, 10, 12], "c3"),
                (&[3, 9, 12], "b2"),
            ]),
            auto: false,
            symbolic_pencil: false,
        },
        "net36_M7" => CaseSpec {
            id: "net36_M7",
            squares: vec![t(square_36(7))],
            frees: vec![("a5", "a"), ("c4", "c")],
            schedule: st(&[
                (&[5, 6, 13], "c7"),
                (&[3, 6, 15], "b2"),
                (&[1, 9, 15], "c8"),
                (&[5, 9, 12], "c6"),
                (&[1, 10, 14], "b3"),
                (&[3, 9, 11], "b8"),
                (&[4, 8, 11], "c3"),
                (&[4, 10, 13], "c2"),
                (&[4, 7, 15], "b1"),
                (&[5, 7, 11], "c1"),
            ]),
            auto: false,
            symbolic_pencil: false,
        },
        "net36_M8" => CaseSpec {
            id: "net36_M8",
            squares: vec![t(square_36(8))],
            frees: vec![("b8", "b"), ("c4", "c"), ("c2", "e")],
            schedule: st(&[
                (&[2, 6, 15], "b1"),
                (&[1, 10, 13], "c7"),
                (&[1, 7, 15], "c6"),
                (&[5, 7, 14], "c8"),
                (&[4, 10, 11], "c3"),
                (&[5, 6, 13], "b2"),
                (&[2, 10, 14], "b3"),
                (&[5, 9, 11], "a5"),
                (&[3, 7, 11], "c1"),
            ]),
            auto: false,
            symbolic_pencil: false,
        },
        "net36_M9" => CaseSpec {
            id: "net36_M9",
            squares: vec![t(square_36(9))],
            frees: vec![("b1", "e"), ("b8", "b"), ("c4", "c"), ("c3", "d")],
            schedule: st(&[
                (&[5, 10, 11], "a5"),
                (&[1, 10, 14], "c8"),
                (&[4, 7, 15], "c6"),
                (&[4, 9, 12], "b3"),
                (&[1, 8, 15], "c7"),
                (&[5, 8, 12], "c2"),
                (&[5, 6, 14], "c1"),
                (&[3, 6, 15], "b2"),
            ]),
            auto: false,
            symbolic_pencil: false,
        },
        "net36_M10" => CaseSpec {
            id: "net36_M10",
            squares: vec![t(square_36(10))],
            frees: vec![("b8", "b"), ("c4", "c"), ("c1", "e")],
            schedule: st(&[
                (&[5, 10, 11], "a5"),
                (&[1, 7, 15], "b1"),
                (&[1, 10, 12], "c6"),
                (&[3, 6, 15], "b2"),
                (&[5, 6, 13], "c7"),
                (&[5, 7, 14], "c8"),
                (&[4, 8, 15], "b3"),
                (&[3, 7, 11], "c3"),
                (&[2, 8, 11], "c2"),
            ]),
            auto: false,
            symbolic_pencil: false,
        },
        "net36_M11" => CaseSpec {
            id: "net36_M11",
            squares: vec![t(square_36(11))],
            frees: vec![("b2", "e"), ("b8", "b"), ("c4", "c")],
            schedule: st(&[
                (&[5, 10, 11], "a5"),
                (&[1, 9, 15], "c8"),
                (&[3, 8, 11], "c7"),
                (&[3, 7, 15], "c6"),
                (&[4, 6, 15], "b3"),
                (&[2, 8, 15], "b1"),
                (&[4, 9, 11], "c2"),
                (&[5, 7, 14], "c3"),
                (&[1, 8, 14], "c1"),
            ]),
            auto: false,
            symbolic_pencil: false,
        },
        "net36_M12" => {
            let mut schedule = st(&[
                (&[2, 9, 15], "c8"),
                (&[5, 10, 13], "c7"),
                (&[3, 6, 15], "b2"),
                (&[1, 8, 15], "c3"),
                (&[1, 10, 12], "c6"),
                (&[5, 9, 11], "c2"),
                (&[5, 6, 12], "b1"),
            ]);
            schedule.push(Step::Branch(vec![1, 9, 13]));
            CaseSpec {
                id: "net36_M12",
                squares: vec![t(square_36(12))],
                frees: vec![],
                schedule,
                auto: false,
                symbolic_pencil: false,
            }
        }
        "quaternion38" => CaseSpec {
            id: "quaternion38",
            squares: vec![crate::latin::quaternion_table()],
            frees: vec![("a7", "a"), ("b2", "e"), ("c3", "d")],
            schedule: [
                "c10", "c9", "c11", "b3", "c8", "u", "c4", "c1", "c2", "c5", "b5",
                "b4", "t", "b1",
            ]
            .iter()
            .map(|v| Step::SolveVar(v))
            .collect(),
            auto: false,
            symbolic_pencil: true,
        },
        "hesse43" => CaseSpec {
            id: "hesse43",
            squares: hesse_squares(),
            frees: vec![("c2", "w")],
            schedule: vec![],
            auto: false,
            symbolic_pencil: false,
        },
        "nonexistence44" => CaseSpec {
            id: "nonexistence44",
            squares: squares_44(),
            frees: vec![("c2", "a"), ("c3", "b"), ("c4", "c")],
            schedule: vec![],
            auto: false,
            symbolic_pencil: false,
        },
        other => return Err(SolveError::UnknownCase(other.into())),
    };
    Ok(spec)
}

pub fn run_case_id(id: &str) -> Result<SolveOutcome, SolveError> {
    run_case(&case_spec(id)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names_of(prob: &Problem) -> Vec<String> {
        prob.names().iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn patterns_order4_match_expected_shape() {
        let prob = build_patterns(&[square_34(1)], &[]).unwrap();
        let shape = |pat: usize| -> Vec<String> {
            prob.patterns[pat]
                .entries
                .iter()
                .map(|e| match e {
                    PatEntry::Zero => "0".to_string(),
                    PatEntry::One => "1".to_string(),
                    PatEntry::Var(v) => prob.vars[*v].clone(),
                })
                .collect()
        };
        assert_eq!(shape(0), ["a1", "a2", "a3", "1", "a4", "0", "1", "a4"]);
        assert_eq!(shape(1), ["1", "b1", "0", "b2", "b3", "b4", "1", "b1"]);
        assert_eq!(shape(2), ["1", "c1", "c2", "c2", "c1", "1", "c3", "c4"]);
        assert_eq!(prob.xprime.len(), 6);
    }

    #[test]
    fn order3_family_matches_expected_values() {
        let out = run_case_id("net33").unwrap();
        let fam = out.family().expect("family");
        let prob = &fam.prob;
        let names: Vec<String> = names_of(prob);
        let nm: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        let show = |v: &str| -> String {
            fam.values[prob.var_index(v).unwrap()].to_string_with(&nm)
        };
        assert_eq!(show("a1"), "(a*b - a)/(b*c)");
        assert_eq!(show("b1"), "(a*b*c - b*c)/a");
        // one residual constraint, equivalent to (a-1)(b-1) = 1
        assert_eq!(fam.constraints.len(), 1);
        let f = FieldDescriptor::rationals();
        let nv = prob.nvars();
        let v = |n: &str| MultiPoly::var(&f, nv, prob.var_index(n).unwrap());
        let one = MultiPoly::one(&f, nv);
        let expect = v("a2")
            .sub(&one)
            .mul(&v("b2").sub(&one))
            .sub(&one)
            .monic();
        assert_eq!(fam.constraints[0], expect);
        assert_eq!(fam.dim(), 2);
    }

    #[test]
    fn order4_cyclic_family_matches_expected_values() {
        let out = run_case_id("net34_M1").unwrap();
        let fam = out.family().expect("family");
        let prob = &fam.prob;
        let names = names_of(prob);
        let nm: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        let show = |v: &str| fam.values[prob.var_index(v).unwrap()].to_string_with(&nm);
        assert!(fam.constraints.is_empty());
        assert_eq!(fam.params, ["a", "b", "c"]);
        assert_eq!(show("a1"), "(a*b - a)/(b*c)");
        assert_eq!(show("b2"), "(a*b*c - b*c)/a");
        assert_eq!(show("a2"), "a*b/(a*b*c + a*b - b*c - a)");
        assert_eq!(show("b4"), "b");
    }

    #[test]
    fn order6_case5_contradiction_after_two_steps() {
        let out = run_case_id("net36_M5").unwrap();
        let c = out.contradiction().expect("contradiction");
        // a forced coincidence of two distinct-class coordinates
        assert!(c.reason.contains('='), "reason: {}", c.reason);
        assert_eq!(c.steps_used, 2);
    }

    #[test]
    fn order6_case11_records_forced_concurrence() {
        let out = run_case_id("net36_M11").unwrap();
        let fam = out.family().expect("family");
        assert!(fam
            .extras
            .iter()
            .any(|e| e.starts_with("c7=0")), "extras: {:?}", fam.extras);
        assert_eq!(fam.dim(), 2);
    }

    #[test]
    fn hesse_round_solves_over_adjoined_root() {
        let out = run_case_id("hesse43").unwrap();
        let fam = out.family().expect("family");
        assert_eq!(fam.field, FieldDescriptor::quadratic(-3).unwrap());
        assert!(fam.params.is_empty());
        assert!(fam.constraints.is_empty());
    }
}
