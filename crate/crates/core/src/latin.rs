//! Latin squares, their six conjugates, species (main class) canonical
//! forms and census, orthogonality, and the incidence structure a tuple of
//! mutually orthogonal squares cuts out.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::fmt;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum LatinError {
    #[error("not a latin square: {0}")]
    NotLatin(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("squares have different orders")]
    OrderMismatch,
}

/// Latin square of order q with symbols 1..=q, row-major storage.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LatinSquare {
    q: usize,
    cells: Vec<u8>,
}

impl LatinSquare {
    pub fn new(rows: Vec<Vec<u8>>) -> Result<Self, LatinError> {
        let q = rows.len();
        if q == 0 || q > 16 {
            return Err(LatinError::NotLatin(format!("unsupported order {q}")));
        }
        let mut cells = Vec::with_capacity(q * q);
        for r in &rows {
            if r.len() != q {
                return Err(LatinError::NotLatin("ragged rows".into()));
            }
            cells.extend_from_slice(r);
        }
        let sq = LatinSquare { q, cells };
        sq.validate()?;
        Ok(sq)
    }

    fn validate(&self) -> Result<(), LatinError> {
        let q = self.q;
        for i in 0..q {
            let mut row_seen = vec![false; q];
            let mut col_seen = vec![false; q];
            for j in 0..q {
                for (seen, v) in [(&mut row_seen, self.get(i, j)), (&mut col_seen, self.get(j, i))]
                {
                    let v = v as usize;
                    if v < 1 || v > q {
                        return Err(LatinError::NotLatin(format!("symbol {v} out of range")));
                    }
                    if seen[v - 1] {
                        return Err(LatinError::NotLatin(format!(
                            "repeated symbol {v} in row/column {i}"
                        )));
                    }
                    seen[v - 1] = true;
                }
            }
        }
        Ok(())
    }

    pub fn order(&self) -> usize {
        self.q
    }

    /// Symbol at row r, column c (0-based).
    pub fn get(&self, r: usize, c: usize) -> u8 {
        self.cells[r * self.q + c]
    }

    pub fn rows(&self) -> Vec<Vec<u8>> {
        self.cells.chunks(self.q).map(|r| r.to_vec()).collect()
    }

    /// First row and first column both read 1..q.
    pub fn is_reduced(&self) -> bool {
        (0..self.q).all(|j| self.get(0, j) == (j + 1) as u8 && self.get(j, 0) == (j + 1) as u8)
    }

    /// The six conjugates, obtained by permuting the roles of
    /// (row, column, symbol) in the orthogonal-array triples.
    /// `which` indexes the role permutation:
    /// 0 = rcs, 1 = crs, 2 = rsc, 3 = src, 4 = csr, 5 = scr.
    pub fn conjugate(&self, which: usize) -> LatinSquare {
        let q = self.q;
        let mut cells = vec![0u8; q * q];
        for r in 0..q {
            for c in 0..q {
                let s = self.get(r, c) as usize - 1;
                let (x, y, z) = match which {
                    0 => (r, c, s),
                    1 => (c, r, s),
                    2 => (r, s, c),
                    3 => (s, c, r),
                    4 => (c, s, r),
                    5 => (s, r, c),
                    _ => panic!("conjugate index out of range"),
                };
                cells[x * q + y] = (z + 1) as u8;
            }
        }
        LatinSquare { q, cells }
    }

    /// Canonical species (main class) key: the lexicographically least
    /// row-major matrix over all conjugates, row/column permutations, and
    /// symbol relabelings.
    pub fn species_key(&self) -> Vec<u8> {
        let q = self.q;
        let mut best: Option<Vec<u8>> = None;
        let mut cols: Vec<usize> = (0..q).collect();
        for conj in 0..6 {
            let m = self.conjugate(conj);
            for first in 0..q {
                permute_all(&mut cols, &mut |kappa: &[usize]| {
                    // symbol relabeling forced by making the first row 1..q
                    let mut sigma = vec![0u8; q + 1];
                    for (j, &cj) in kappa.iter().enumerate() {
                        sigma[m.get(first, cj) as usize] = (j + 1) as u8;
                    }
                    let mut rest: Vec<Vec<u8>> = (0..q)
                        .filter(|&r| r != first)
                        .map(|r| kappa.iter().map(|&c| sigma[m.get(r, c) as usize]).collect())
                        .collect();
                    rest.sort_unstable();
                    let mut cand = Vec::with_capacity(q * q);
                    cand.extend((1..=q).map(|v| v as u8));
                    for row in rest {
                        cand.extend(row);
                    }
                    match &best {
                        Some(b) if *b <= cand => {}
                        _ => best = Some(cand),
                    }
                });
            }
        }
        best.unwrap()
    }

    pub fn species_representative(&self) -> LatinSquare {
        let key = self.species_key();
        LatinSquare {
            q: self.q,
            cells: key,
        }
    }
}

fn permute_all<F: FnMut(&[usize])>(items: &mut [usize], f: &mut F) {
    // Heap's algorithm
    fn go<F: FnMut(&[usize])>(k: usize, items: &mut [usize], f: &mut F) {
        if k == 1 {
            f(items);
            return;
        }
        for i in 0..k {
            go(k - 1, items, f);
            if k % 2 == 0 {
                items.swap(i, k - 1);
            } else {
                items.swap(0, k - 1);
            }
        }
    }
    let n = items.len();
    go(n, items, f);
}

/// All reduced Latin squares of order q (first row and column natural).
pub fn reduced_squares(q: usize) -> Vec<LatinSquare> {
    assert!(q >= 1 && q <= 6, "reduced enumeration supported for q <= 6");
    let mut out = Vec::new();
    let mut cells = vec![0u8; q * q];
    for j in 0..q {
        cells[j] = (j + 1) as u8;
        cells[j * q] = (j + 1) as u8;
    }
    fn fill(q: usize, pos: usize, cells: &mut Vec<u8>, out: &mut Vec<LatinSquare>) {
        if pos == q * q {
            out.push(LatinSquare {
                q,
                cells: cells.clone(),
            });
            return;
        }
        let (r, c) = (pos / q, pos % q);
        if cells[pos] != 0 {
            fill(q, pos + 1, cells, out);
            return;
        }
        'symbol: for s in 1..=q as u8 {
            for i in 0..q {
                if cells[r * q + i] == s || cells[i * q + c] == s {
                    continue 'symbol;
                }
            }
            cells[pos] = s;
            fill(q, pos + 1, cells, out);
            cells[pos] = 0;
        }
    }
    fill(q, 0, &mut cells, &mut out);
    out
}

/// Species census: canonical representatives of every main class of
/// order q, sorted, plus the number of reduced squares seen.
pub fn enumerate_species(q: usize) -> (Vec<LatinSquare>, usize) {
    let reduced = reduced_squares(q);
    let count = reduced.len();
    let keys: HashSet<Vec<u8>> = reduced
        .par_iter()
        .map(|sq| sq.species_key())
        .collect();
    let mut reps: Vec<LatinSquare> = keys
        .into_iter()
        .map(|cells| LatinSquare { q, cells })
        .collect();
    reps.sort();
    (reps, count)
}

/// Multiplication table of Z/q (cyclic group), reduced form.
pub fn cyclic_table(q: usize) -> LatinSquare {
    let mut rows = Vec::with_capacity(q);
    for r in 0..q {
        rows.push((0..q).map(|c| ((r + c) % q + 1) as u8).collect());
    }
    LatinSquare::new(rows).unwrap()
}

/// Multiplication table of the quaternion group on symbols 1..8.
pub fn quaternion_table() -> LatinSquare {
    LatinSquare::new(vec![
        vec![1, 2, 3, 4, 5, 6, 7, 8],
        vec![2, 1, 6, 7, 8, 3, 4, 5],
        vec![3, 6, 2, 5, 7, 1, 8, 4],
        vec![4, 7, 8, 2, 3, 5, 1, 6],
        vec![5, 8, 7, 6, 2, 4, 3, 1],
        vec![6, 3, 1, 8, 4, 2, 5, 7],
        vec![7, 4, 5, 1, 6, 8, 2, 3],
        vec![8, 5, 4, 3, 1, 7, 6, 2],
    ])
    .unwrap()
}

/// Two squares are orthogonal when superimposing them yields every
/// ordered symbol pair exactly once.
pub fn orthogonal(a: &LatinSquare, b: &LatinSquare) -> Result<bool, LatinError> {
    if a.order() != b.order() {
        return Err(LatinError::OrderMismatch);
    }
    let q = a.order();
    let mut seen = vec![false; q * q];
    for r in 0..q {
        for c in 0..q {
            let idx = (a.get(r, c) as usize - 1) * q + b.get(r, c) as usize - 1;
            if seen[idx] {
                return Ok(false);
            }
            seen[idx] = true;
        }
    }
    Ok(true)
}

/// Incidence structure of a (k, q)-net template given k-2 mutually
/// orthogonal squares: line labels are 1..=k*q, class i occupying labels
/// (i-1)q+1 ..= iq (class 1 columns, class 2 rows, class i+2 the symbols
/// of square i), and every cell (r, c) contributes one k-point.
pub fn incidence_from_squares(squares: &[LatinSquare]) -> Result<Vec<Vec<usize>>, LatinError> {
    let q = squares
        .first()
        .ok_or(LatinError::OrderMismatch)?
        .order();
    for pair in squares.windows(2) {
        if !orthogonal(&pair[0], &pair[1])? {
            return Err(LatinError::NotLatin("squares are not orthogonal".into()));
        }
    }
    for w in 0..squares.len() {
        for v in (w + 1)..squares.len() {
            if !orthogonal(&squares[w], &squares[v])? {
                return Err(LatinError::NotLatin("squares are not orthogonal".into()));
            }
        }
    }
    let mut pts = Vec::with_capacity(q * q);
    for r in 0..q {
        for c in 0..q {
            let mut p = vec![c + 1, q + r + 1];
            for (i, sq) in squares.iter().enumerate() {
                p.push((i + 2) * q + sq.get(r, c) as usize);
            }
            pts.push(p);
        }
    }
    Ok(pts)
}

impl fmt::Display for LatinSquare {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.cells.chunks(self.q) {
            let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            writeln!(f, "{}", line.join(" "))?;
        }
        Ok(())
    }
}

pub fn parse_square(text: &str) -> Result<LatinSquare, LatinError> {
    let rows: Result<Vec<Vec<u8>>, LatinError> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(|l| {
            l.split_whitespace()
                .map(|t| {
                    t.parse::<u8>()
                        .map_err(|_| LatinError::Parse(format!("bad symbol {t:?}")))
                })
                .collect()
        })
        .collect();
    LatinSquare::new(rows?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conjugates_are_latin_and_involutive() {
        let m = cyclic_table(5);
        for k in 0..6 {
            let c = m.conjugate(k);
            assert!(c.validate().is_ok());
        }
        assert_eq!(m.conjugate(1).conjugate(1), m);
        assert_eq!(m.conjugate(2).conjugate(2), m);
    }

    #[test]
    fn species_key_is_class_invariant() {
        let m = cyclic_table(4);
        let key = m.species_key();
        for k in 0..6 {
            assert_eq!(m.conjugate(k).species_key(), key);
        }
        // row swap stays in the class
        let mut rows = m.rows();
        rows.swap(1, 3);
        let swapped = LatinSquare::new(rows).unwrap();
        assert_eq!(swapped.species_key(), key);
    }

    #[test]
    fn reduced_counts_small_orders() {
        assert_eq!(reduced_squares(1).len(), 1);
        assert_eq!(reduced_squares(2).len(), 1);
        assert_eq!(reduced_squares(3).len(), 1);
        assert_eq!(reduced_squares(4).len(), 4);
        assert_eq!(reduced_squares(5).len(), 56);
    }

    #[test]
    fn species_counts_up_to_five() {
        for (q, want) in [(1usize, 1usize), (2, 1), (3, 1), (4, 2), (5, 2)] {
            let (reps, _) = enumerate_species(q);
            assert_eq!(reps.len(), want, "order {q}");
        }
    }

    #[test]
    fn quaternion_table_is_latin_and_nonabelian() {
        let m = quaternion_table();
        assert!(m.validate().is_ok());
        // 3*4 = 5 but 4*3 = 8 in the printed table
        assert_ne!(m.get(2, 3), m.get(3, 2));
    }

    #[test]
    fn cyclic_mols_order_three() {
        // M[r][c] = r+c, N[r][c] = 2r+c (mod 3) are orthogonal
        let m = cyclic_table(3);
        let n = LatinSquare::new(vec![vec![1, 2, 3], vec![3, 1, 2], vec![2, 3, 1]]).unwrap();
        assert!(orthogonal(&m, &n).unwrap());
        assert!(!orthogonal(&m, &m).unwrap());
    }

    #[test]
    fn incidence_structure_shape() {
        let m = cyclic_table(3);
        let pts = incidence_from_squares(std::slice::from_ref(&m)).unwrap();
        assert_eq!(pts.len(), 9);
        assert_eq!(pts[0], vec![1, 4, 7]); // cell (1,1), symbol 1
        assert_eq!(pts[5], vec![3, 5, 7]); // cell (2,3): M[2][3] = 1
        // every line label appears in exactly q points
        for label in 1..=9usize {
            assert_eq!(pts.iter().filter(|p| p.contains(&label)).count(), 3);
        }
    }

    #[test]
    fn text_round_trip() {
        let m = quaternion_table();
        let printed = m.to_string();
        assert_eq!(parse_square(&printed).unwrap(), m);
    }
}
