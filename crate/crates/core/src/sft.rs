//! Two-sided shifts of finite type.
//!
//! A [`TransitionMatrix`] is stored sparsely as sorted successor lists, so the
//! same type serves the small textbook shifts and the large shifts produced
//! by Markov codings.

use std::collections::VecDeque;

use num_integer::Integer;

use crate::error::{Error, Result};

/// A finite symbol sequence. Admissibility is checked by the owning matrix.
pub type Word = Vec<usize>;

/// Largest period for exact periodic-point censuses.
pub const MAX_CENSUS_PERIOD: usize = 32;

const PERRON_TOL: f64 = 1e-13;
const PERRON_MAX_ITER: usize = 1_000_000;

/// 0/1 transition matrix of a one-step SFT.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionMatrix {
    succ: Vec<Vec<usize>>,
    pred: Vec<Vec<usize>>,
}

impl TransitionMatrix {
    /// Validates a dense 0/1 matrix.
    pub fn validate(rows: &[Vec<u8>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::EmptyMatrix);
        }
        let mut succ = vec![Vec::new(); n];
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::NonSquare { row: i, found: row.len(), expected: n });
            }
            for (j, &v) in row.iter().enumerate() {
                match v {
                    0 => {}
                    1 => succ[i].push(j),
                    other => return Err(Error::NotBinary { row: i, col: j, value: other.to_string() }),
                }
            }
        }
        Self::from_successors(succ)
    }

    /// Parses "N" followed by N rows of space-separated 0/1 entries; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, raw)| (i + 1, raw.split('#').next().unwrap_or("")))
            .filter(|(_, l)| !l.trim().is_empty());
        let (first, head) = lines.next().ok_or(Error::Parse { line: 1, col: 1, msg: "empty input".into() })?;
        let n: usize = head.trim().parse().map_err(|_| Error::Parse {
            line: first,
            col: 1 + head.len() - head.trim_start().len(),
            msg: format!("expected a size, found {:?}", head.trim()),
        })?;
        let mut rows = Vec::with_capacity(n);
        let mut last = first;
        for (line, l) in lines {
            last = line;
            let mut row = Vec::new();
            let mut col = 1;
            for tok in l.split_whitespace() {
                col = l[col - 1..].find(tok).map_or(col, |k| col + k);
                match tok {
                    "0" => row.push(0),
                    "1" => row.push(1),
                    _ => return Err(Error::Parse { line, col, msg: format!("expected 0 or 1, found {tok:?}") }),
                }
                col += tok.len();
            }
            if row.len() != n {
                return Err(Error::Parse { line, col: 1, msg: format!("row has {} entries, expected {n}", row.len()) });
            }
            rows.push(row);
        }
        if rows.len() != n {
            return Err(Error::Parse { line: last, col: 1, msg: format!("found {} rows, expected {n}", rows.len()) });
        }
        Self::validate(&rows)
    }

    /// Builds a matrix from successor lists; lists are sorted and deduplicated.
    pub fn from_successors(mut succ: Vec<Vec<usize>>) -> Result<Self> {
        let n = succ.len();
        if n == 0 {
            return Err(Error::EmptyMatrix);
        }
        let mut pred = vec![Vec::new(); n];
        for (i, s) in succ.iter_mut().enumerate() {
            s.sort_unstable();
            s.dedup();
            for &j in s.iter() {
                if j >= n {
                    return Err(Error::NonSquare { row: i, found: j + 1, expected: n });
                }
                pred[j].push(i);
            }
        }
        for i in 0..n {
            if succ[i].is_empty() {
                return Err(Error::EmptyRowOrColumn { symbol: i, kind: "row" });
            }
        }
        for j in 0..n {
            if pred[j].is_empty() {
                return Err(Error::EmptyRowOrColumn { symbol: j, kind: "column" });
            }
        }
        Ok(Self { succ, pred })
    }

    pub fn size(&self) -> usize {
        self.succ.len()
    }

    pub fn successors(&self, i: usize) -> &[usize] {
        &self.succ[i]
    }

    pub fn predecessors(&self, j: usize) -> &[usize] {
        &self.pred[j]
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.succ[i].binary_search(&j).is_ok()
    }

    /// Number of allowed transitions.
    pub fn edge_count(&self) -> usize {
        self.succ.iter().map(Vec::len).sum()
    }

    pub fn to_dense(&self) -> Vec<Vec<u8>> {
        let n = self.size();
        let mut out = vec![vec![0u8; n]; n];
        for (i, s) in self.succ.iter().enumerate() {
            for &j in s {
                out[i][j] = 1;
            }
        }
        out
    }

    pub fn is_admissible(&self, word: &[usize]) -> bool {
        word.iter().all(|&s| s < self.size()) && word.windows(2).all(|w| self.get(w[0], w[1]))
    }

    /// Admissible including the wrap-around transition.
    pub fn is_cyclically_admissible(&self, word: &[usize]) -> bool {
        !word.is_empty() && self.is_admissible(word) && self.get(word[word.len() - 1], word[0])
    }

    fn reach(&self, start: usize, forward: bool) -> Vec<bool> {
        let mut seen = vec![false; self.size()];
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(u) = queue.pop_front() {
            let next = if forward { &self.succ[u] } else { &self.pred[u] };
            for &v in next {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        seen
    }

    /// True iff every symbol reaches every other symbol.
    pub fn is_irreducible(&self) -> bool {
        self.reach(0, true).iter().all(|&b| b) && self.reach(0, false).iter().all(|&b| b)
    }

    /// Period of an irreducible matrix.
    pub fn period(&self) -> Result<usize> {
        self.weighted_period(|_, _| 1)
    }

    /// gcd of the weighted lengths of all cycles, for positive integer edge weights.
    pub fn weighted_period(&self, weight: impl Fn(usize, usize) -> u64) -> Result<usize> {
        if !self.is_irreducible() {
            return Err(Error::NotIrreducible);
        }
        let n = self.size();
        let mut level: Vec<Option<i128>> = vec![None; n];
        level[0] = Some(0);
        let mut queue = VecDeque::from([0usize]);
        while let Some(u) = queue.pop_front() {
            let lu = level[u].expect("visited");
            for &v in &self.succ[u] {
                if level[v].is_none() {
                    level[v] = Some(lu + weight(u, v) as i128);
                    queue.push_back(v);
                }
            }
        }
        let mut g: i128 = 0;
        for u in 0..n {
            let lu = level[u].expect("irreducible");
            for &v in &self.succ[u] {
                let d = lu + weight(u, v) as i128 - level[v].expect("irreducible");
                g = g.gcd(&d.abs());
            }
        }
        Ok(g as usize)
    }

    /// Number of admissible words of length n.
    pub fn count_words(&self, n: usize) -> Result<u128> {
        if n == 0 {
            return Err(Error::InvalidArgument("word length must be at least 1".into()));
        }
        let mut counts = vec![1u128; self.size()];
        for _ in 1..n {
            counts = self.step_counts(&counts)?;
        }
        counts.iter().try_fold(0u128, |acc, &c| acc.checked_add(c)).ok_or(Error::Overflow("counting words"))
    }

    fn step_counts(&self, counts: &[u128]) -> Result<Vec<u128>> {
        let mut next = vec![0u128; self.size()];
        for (i, &c) in counts.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for &j in &self.succ[i] {
                next[j] = next[j].checked_add(c).ok_or(Error::Overflow("counting words"))?;
            }
        }
        Ok(next)
    }

    /// All admissible words of length n in lexicographic order.
    pub fn words(&self, n: usize) -> Vec<Word> {
        let mut out = Vec::new();
        if n == 0 {
            return out;
        }
        let mut stack: Vec<Word> = (0..self.size()).rev().map(|s| vec![s]).collect();
        while let Some(w) = stack.pop() {
            if w.len() == n {
                out.push(w);
                continue;
            }
            let last = *w.last().expect("nonempty");
            for &j in self.succ[last].iter().rev() {
                let mut next = w.clone();
                next.push(j);
                stack.push(next);
            }
        }
        out
    }

    /// trace(Aⁿ) by exact integer dynamic programming.
    pub fn trace_power(&self, n: usize) -> Result<u128> {
        if n == 0 || n > MAX_CENSUS_PERIOD {
            return Err(Error::InvalidArgument(format!("census period must lie in 1..={MAX_CENSUS_PERIOD}")));
        }
        let mut total: u128 = 0;
        for s in 0..self.size() {
            let mut counts = vec![0u128; self.size()];
            counts[s] = 1;
            for _ in 0..n {
                counts = self.step_counts(&counts)?;
            }
            total = total.checked_add(counts[s]).ok_or(Error::Overflow("computing trace"))?;
        }
        Ok(total)
    }

    /// Primitive orbits of least period exactly n, sorted, in canonical rotation.
    pub fn primitive_orbits(&self, n: usize) -> Vec<PeriodicOrbit> {
        let mut out = Vec::new();
        if n == 0 {
            return out;
        }
        for start in 0..self.size() {
            let mut path = vec![start];
            self.cycle_dfs(start, n, &mut path, &mut out);
        }
        out.sort();
        out
    }

    fn cycle_dfs(&self, start: usize, n: usize, path: &mut Word, out: &mut Vec<PeriodicOrbit>) {
        let last = *path.last().expect("nonempty");
        if path.len() == n {
            if self.get(last, start) && is_primitive(path) && canonical_rotation(path) == *path {
                out.push(PeriodicOrbit { word: path.clone() });
            }
            return;
        }
        for &j in &self.succ[last] {
            if j < start {
                continue;
            }
            path.push(j);
            self.cycle_dfs(start, n, path, out);
            path.pop();
        }
    }

    /// Primitive orbits of least period n together with the number of points of period n.
    pub fn enumerate_periodic(&self, n: usize) -> Result<PeriodicCensus> {
        if n == 0 || n > MAX_CENSUS_PERIOD {
            return Err(Error::InvalidArgument(format!("census period must lie in 1..={MAX_CENSUS_PERIOD}")));
        }
        let mut census: u128 = 0;
        let mut orbits = Vec::new();
        for d in 1..=n {
            if !n.is_multiple_of(d) {
                continue;
            }
            let found = self.primitive_orbits(d);
            census += (d as u128) * found.len() as u128;
            if d == n {
                orbits = found;
            }
        }
        Ok(PeriodicCensus { period: n, census, orbits })
    }

    /// Nonnegative weighted copy with unit weights.
    pub fn to_weighted(&self) -> WeightedMatrix {
        WeightedMatrix::from_rows(self.succ.iter().map(|s| s.iter().map(|&j| (j, 1.0)).collect()).collect())
    }
}

/// Periodic-point census for one period.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeriodicCensus {
    pub period: usize,
    /// Number of points x with σⁿx = x.
    pub census: u128,
    /// Primitive orbits of least period n.
    pub orbits: Vec<PeriodicOrbit>,
}

/// A primitive periodic orbit stored in its lexicographically minimal rotation.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PeriodicOrbit {
    word: Word,
}

impl PeriodicOrbit {
    /// Canonicalizes a cyclically admissible primitive word.
    pub fn new(a: &TransitionMatrix, word: &[usize]) -> Result<Self> {
        if !a.is_cyclically_admissible(word) {
            return Err(Error::InadmissibleWord(word.to_vec()));
        }
        if !is_primitive(word) {
            return Err(Error::InvalidArgument(format!("word {word:?} is not primitive")));
        }
        Ok(Self { word: canonical_rotation(word) })
    }

    pub fn word(&self) -> &[usize] {
        &self.word
    }

    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }
}

/// True iff the word is not a proper power of a shorter word.
pub fn is_primitive(word: &[usize]) -> bool {
    let n = word.len();
    (1..n).filter(|d| n.is_multiple_of(*d)).all(|d| (d..n).any(|i| word[i] != word[i - d]))
}

/// Lexicographically minimal rotation.
pub fn canonical_rotation(word: &[usize]) -> Word {
    let n = word.len();
    let mut best = word.to_vec();
    for r in 1..n {
        let rot: Word = word[r..].iter().chain(&word[..r]).copied().collect();
        if rot < best {
            best = rot;
        }
    }
    best
}

/// Sparse nonnegative matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedMatrix {
    rows: Vec<Vec<(usize, f64)>>,
}

impl WeightedMatrix {
    pub fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Self {
        Self { rows }
    }

    pub fn size(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn mul_vec(&self, x: &[f64], out: &mut [f64]) {
        for (i, row) in self.rows.iter().enumerate() {
            out[i] = row.iter().map(|&(j, w)| w * x[j]).sum();
        }
    }

    pub fn vec_mul(&self, x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, w) in row {
                out[j] += x[i] * w;
            }
        }
    }

    fn transpose(&self) -> Self {
        let mut rows = vec![Vec::new(); self.size()];
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, w) in row {
                rows[j].push((i, w));
            }
        }
        Self { rows }
    }

    fn support(&self) -> Result<TransitionMatrix> {
        TransitionMatrix::from_successors(
            self.rows.iter().map(|r| r.iter().filter(|&&(_, w)| w > 0.0).map(|&(j, _)| j).collect()).collect(),
        )
        .map_err(|_| Error::NotIrreducible)
    }
}

/// Dominant eigendata of a nonnegative irreducible matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Perron {
    pub lambda: f64,
    /// Left eigenvector, scaled so that Σ lᵢrᵢ = 1.
    pub left: Vec<f64>,
    /// Right eigenvector, scaled so that Σ rᵢ = 1.
    pub right: Vec<f64>,
    pub iterations: usize,
}

/// Perron eigendata by power iteration on M + I from the all-ones vector.
pub fn perron(m: &WeightedMatrix) -> Result<Perron> {
    if m.size() == 0 {
        return Err(Error::EmptyMatrix);
    }
    if !m.support()?.is_irreducible() {
        return Err(Error::NotIrreducible);
    }
    let (lambda_r, right, it_r) = power_iterate(m)?;
    let (_, mut left, it_l) = power_iterate(&m.transpose())?;
    let mut mr = vec![0.0; m.size()];
    m.mul_vec(&right, &mut mr);
    let num: f64 = left.iter().zip(&mr).map(|(a, b)| a * b).sum();
    let den: f64 = left.iter().zip(&right).map(|(a, b)| a * b).sum();
    let lambda = if den > 0.0 { num / den } else { lambda_r };
    left.iter_mut().for_each(|v| *v /= den);
    Ok(Perron { lambda, left, right, iterations: it_r.max(it_l) })
}

fn power_iterate(m: &WeightedMatrix) -> Result<(f64, Vec<f64>, usize)> {
    let n = m.size();
    let mut x = vec![1.0 / n as f64; n];
    let mut mx = vec![0.0; n];
    let mut residual = f64::INFINITY;
    let mut best = f64::INFINITY;
    let mut polish = 64;
    for it in 0..PERRON_MAX_ITER {
        m.mul_vec(&x, &mut mx);
        let lambda: f64 = mx.iter().sum::<f64>() / x.iter().sum::<f64>();
        residual = mx.iter().zip(&x).map(|(a, b)| (a - lambda * b).abs()).fold(0.0, f64::max);
        if residual <= PERRON_TOL * lambda.max(1.0) {
            if polish == 0 || residual >= best {
                return Ok((lambda, x, it));
            }
            polish -= 1;
        }
        best = best.min(residual);
        let mut total = 0.0;
        for i in 0..n {
            x[i] += mx[i];
            total += x[i];
        }
        x.iter_mut().for_each(|v| *v /= total);
    }
    Err(Error::NoConvergence { iterations: PERRON_MAX_ITER, residual })
}

/// Outcome of comparing two finite windows in the cylinder metric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowDistance {
    /// 2^{-l}, or 0 when the windows agree everywhere.
    pub value: f64,
    /// False when the windows agree, in which case the true distance is at most `bound`.
    pub resolved: bool,
    pub bound: f64,
}

/// Cylinder-metric distance 2^{-l} between windows x[-R..=R] and y[-R..=R].
pub fn sequence_distance(x: &[usize], y: &[usize]) -> Result<WindowDistance> {
    if x.len() != y.len() || x.len().is_multiple_of(2) {
        return Err(Error::InvalidArgument("windows must have equal odd length centered at index 0".into()));
    }
    let r = x.len() / 2;
    for l in 0..=r {
        if x[r + l] != y[r + l] || x[r - l] != y[r - l] {
            let v = 0.5f64.powi(l as i32);
            return Ok(WindowDistance { value: v, resolved: true, bound: v });
        }
    }
    Ok(WindowDistance { value: 0.0, resolved: false, bound: 0.5f64.powi(r as i32 + 1) })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn golden() -> TransitionMatrix {
        TransitionMatrix::validate(&[vec![1, 1], vec![1, 0]]).unwrap()
    }

    #[test]
    fn validate_reports_empty_row() {
        let err = TransitionMatrix::validate(&[vec![0, 0], vec![1, 1]]).unwrap_err();
        assert_eq!(err, Error::EmptyRowOrColumn { symbol: 0, kind: "row" });
    }

    #[test]
    fn validate_reports_non_square() {
        assert!(matches!(TransitionMatrix::validate(&[vec![1, 1], vec![1]]), Err(Error::NonSquare { row: 1, .. })));
    }

    #[test]
    fn irreducibility_and_period() {
        assert!(golden().is_irreducible());
        let id = TransitionMatrix::validate(&[vec![1, 0], vec![0, 1]]).unwrap();
        assert!(!id.is_irreducible());
        assert_eq!(id.period(), Err(Error::NotIrreducible));
        assert_eq!(golden().period().unwrap(), 1);
        let swap = TransitionMatrix::validate(&[vec![0, 1], vec![1, 0]]).unwrap();
        assert_eq!(swap.period().unwrap(), 2);
    }

    #[test]
    fn word_counts() {
        assert_eq!(golden().count_words(3).unwrap(), 5);
        assert_eq!(golden().count_words(1).unwrap(), 2);
        let full = TransitionMatrix::validate(&[vec![1, 1], vec![1, 1]]).unwrap();
        assert_eq!(full.count_words(3).unwrap(), 8);
        assert!(matches!(full.count_words(200), Err(Error::Overflow(_))));
    }

    #[test]
    fn periodic_census() {
        let c = golden().enumerate_periodic(2).unwrap();
        assert_eq!(c.census, 3);
        assert_eq!(c.orbits.len(), 1);
        assert_eq!(c.orbits[0].word(), &[0, 1]);
        let c1 = golden().enumerate_periodic(1).unwrap();
        assert_eq!(c1.census, 1);
        assert_eq!(c1.orbits[0].word(), &[0]);
    }

    #[test]
    fn canonical_rotation_is_minimal() {
        assert_eq!(canonical_rotation(&[1, 0, 0]), vec![0, 0, 1]);
        assert!(!is_primitive(&[0, 1, 0, 1]));
        assert!(is_primitive(&[0, 0, 1]));
    }

    #[test]
    fn perron_golden_mean() {
        let p = perron(&golden().to_weighted()).unwrap();
        assert!((p.lambda - (1.0 + 5f64.sqrt()) / 2.0).abs() < 1e-13);
        let s: f64 = p.right.iter().sum();
        assert!((s - 1.0).abs() < 1e-14);
        let lr: f64 = p.left.iter().zip(&p.right).map(|(a, b)| a * b).sum();
        assert!((lr - 1.0).abs() < 1e-14);
    }

    #[test]
    fn perron_handles_periodic_matrix() {
        let swap = TransitionMatrix::validate(&[vec![0, 1], vec![1, 0]]).unwrap();
        let p = perron(&swap.to_weighted()).unwrap();
        assert!((p.lambda - 1.0).abs() < 1e-13);
    }

    #[test]
    fn window_distances() {
        let x = [0, 0, 0, 0, 0, 0, 0];
        let mut y = x;
        assert_eq!(sequence_distance(&x, &y).unwrap().value, 0.0);
        assert_eq!(sequence_distance(&x, &y).unwrap().bound, 1.0 / 16.0);
        y[3] = 1;
        assert_eq!(sequence_distance(&x, &y).unwrap().value, 1.0);
        y[3] = 0;
        y[0] = 1;
        assert_eq!(sequence_distance(&x, &y).unwrap().value, 0.125);
    }

    #[test]
    fn parse_matrix_text() {
        assert_eq!(TransitionMatrix::parse("2\n1 1\n1 0\n").unwrap(), golden());
        assert_eq!(TransitionMatrix::parse("# golden\n2\n\n1 1 # row 0\n1 0").unwrap(), golden());
        match TransitionMatrix::parse("2\n1 1\n1 x\n") {
            Err(Error::Parse { line: 3, col: 3, .. }) => {}
            other => panic!("{other:?}"),
        }
        match TransitionMatrix::parse("2\n1 1\n1 2\n") {
            Err(Error::Parse { line: 3, col: 3, .. }) => {}
            other => panic!("{other:?}"),
        }
        assert!(matches!(TransitionMatrix::parse("2\n1 1 1\n1 0\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(TransitionMatrix::parse("2\n1 1\n"), Err(Error::Parse { .. })));
        assert!(matches!(TransitionMatrix::parse("2\n0 0\n1 1\n"), Err(Error::EmptyRowOrColumn { .. })));
    }
}
