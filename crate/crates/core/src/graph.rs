//! Geodesic flows on compact metric graphs.
//!
//! Directed edge 2k runs along edge k from its first endpoint to its second;
//! 2k + 1 is its reverse.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_integer::Integer;
use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::sft::{canonical_rotation, is_primitive, PeriodicOrbit, TransitionMatrix, Word};
use crate::suspension::{weak_mixing_test, FlowMeasure, RoofFunction, SuspensionFlow};
use crate::thermo::LocallyConstantPotential;

/// Tolerance used when a comparison involves a real length.
pub const REAL_TOL: f64 = 1e-12;

/// Edge length or edge coordinate: exact when rational.
#[derive(Debug, Clone, Copy)]
pub enum Length {
    Rational(Ratio<i128>),
    Real(f64),
}

impl Length {
    pub fn int(n: i128) -> Self {
        Length::Rational(Ratio::from_integer(n))
    }

    pub fn ratio(p: i128, q: i128) -> Self {
        Length::Rational(Ratio::new(p, q))
    }

    pub fn zero() -> Self {
        Self::int(0)
    }

    pub fn to_f64(self) -> f64 {
        match self {
            Length::Rational(r) => *r.numer() as f64 / *r.denom() as f64,
            Length::Real(x) => x,
        }
    }

    pub fn is_rational(&self) -> bool {
        matches!(self, Length::Rational(_))
    }

    /// Exact for rationals, within REAL_TOL (relative to max(1, |a|)) otherwise.
    pub fn compare(self, other: Self) -> Ordering {
        match (self, other) {
            (Length::Rational(a), Length::Rational(b)) => a.cmp(&b),
            _ => {
                let (a, b) = (self.to_f64(), other.to_f64());
                if (a - b).abs() <= REAL_TOL * a.abs().max(b.abs()).max(1.0) {
                    Ordering::Equal
                } else if a < b {
                    Ordering::Less
                } else {
                    Ordering::Greater
                }
            }
        }
    }

    pub fn lt(self, other: Self) -> bool {
        self.compare(other) == Ordering::Less
    }

    pub fn le(self, other: Self) -> bool {
        self.compare(other) != Ordering::Greater
    }

    pub fn eq_len(self, other: Self) -> bool {
        self.compare(other) == Ordering::Equal
    }

    pub fn is_positive(self) -> bool {
        Self::zero().lt(self)
    }

    pub fn min(self, other: Self) -> Self {
        if other.lt(self) {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: Self) -> Self {
        if self.lt(other) {
            other
        } else {
            self
        }
    }

    /// Parses "3", "3/2", a decimal, or "sqrt(x)".
    pub fn parse(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        if let Some(inner) = s.strip_prefix("sqrt(").and_then(|r| r.strip_suffix(')')) {
            let x: f64 = inner.trim().parse().map_err(|_| format!("bad number {inner:?}"))?;
            return Ok(Length::Real(x.sqrt()));
        }
        if let Some((p, q)) = s.split_once('/') {
            let p: i128 = p.trim().parse().map_err(|_| format!("bad numerator {p:?}"))?;
            let q: i128 = q.trim().parse().map_err(|_| format!("bad denominator {q:?}"))?;
            if q == 0 {
                return Err("zero denominator".into());
            }
            return Ok(Self::ratio(p, q));
        }
        if let Ok(n) = s.parse::<i128>() {
            return Ok(Self::int(n));
        }
        s.parse::<f64>().map(Length::Real).map_err(|_| format!("bad length {s:?}"))
    }
}

impl fmt::Display for Length {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Length::Rational(r) if *r.denom() == 1 => write!(f, "{}", r.numer()),
            Length::Rational(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            Length::Real(x) => write!(f, "{x}"),
        }
    }
}

impl PartialEq for Length {
    fn eq(&self, other: &Self) -> bool {
        self.eq_len(*other)
    }
}

impl From<f64> for Length {
    fn from(x: f64) -> Self {
        Length::Real(x)
    }
}

macro_rules! length_op {
    ($tr:ident, $f:ident, $op:tt) => {
        impl $tr for Length {
            type Output = Length;
            fn $f(self, rhs: Length) -> Length {
                match (self, rhs) {
                    (Length::Rational(a), Length::Rational(b)) => Length::Rational(a $op b),
                    _ => Length::Real(self.to_f64() $op rhs.to_f64()),
                }
            }
        }
    };
}

length_op!(Add, add, +);
length_op!(Sub, sub, -);
length_op!(Mul, mul, *);

impl Neg for Length {
    type Output = Length;
    fn neg(self) -> Length {
        match self {
            Length::Rational(a) => Length::Rational(-a),
            Length::Real(x) => Length::Real(-x),
        }
    }
}

impl std::iter::Sum for Length {
    fn sum<I: Iterator<Item = Length>>(iter: I) -> Length {
        iter.fold(Length::zero(), |a, b| a + b)
    }
}

/// Compact metric graph with every vertex of degree ≥ 3.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricGraph {
    vertices: usize,
    edges: Vec<(usize, usize, Length)>,
}

impl MetricGraph {
    pub fn new(vertices: usize, edges: Vec<(usize, usize, Length)>) -> Result<Self> {
        if vertices == 0 {
            return Err(Error::InvalidArgument("graph has no vertices".into()));
        }
        let mut degree = vec![0usize; vertices];
        for &(u, v, len) in &edges {
            if u >= vertices || v >= vertices {
                return Err(Error::InvalidArgument(format!("edge ({u}, {v}) names a missing vertex")));
            }
            if !len.is_positive() {
                return Err(Error::InvalidArgument(format!("edge ({u}, {v}) has length {len}")));
            }
            degree[u] += 1;
            degree[v] += 1;
        }
        if let Some((vertex, &degree)) = degree.iter().enumerate().find(|(_, &d)| d < 3) {
            return Err(Error::DegreeTooLow { vertex, degree });
        }
        let g = Self { vertices, edges };
        let mut seen = vec![false; vertices];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &(a, b, _) in &g.edges {
                for (x, y) in [(a, b), (b, a)] {
                    if x == v && !seen[y] {
                        seen[y] = true;
                        stack.push(y);
                    }
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::Disconnected);
        }
        Ok(g)
    }

    /// One vertex with a loop of each given length.
    pub fn rose(lengths: &[Length]) -> Result<Self> {
        Self::new(1, lengths.iter().map(|&l| (0, 0, l)).collect())
    }

    /// Two vertices joined by parallel edges.
    pub fn theta(lengths: &[Length]) -> Result<Self> {
        Self::new(2, lengths.iter().map(|&l| (0, 1, l)).collect())
    }

    /// Parses "vertices N" followed by "edge u v length" lines; '#' starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut vertices = None;
        let mut edges = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("");
            let mut toks = line.split_whitespace();
            let Some(head) = toks.next() else { continue };
            let col = raw.find(head).unwrap_or(0) + 1;
            let err = |msg: String| Error::Parse { line: i + 1, col, msg };
            let rest: Vec<&str> = toks.collect();
            match head {
                "vertices" => {
                    let [n] = rest[..] else { return Err(err("expected: vertices N".into())) };
                    vertices = Some(n.parse::<usize>().map_err(|_| err(format!("bad count {n:?}")))?);
                }
                "edge" => {
                    let [u, v, l] = rest[..] else { return Err(err("expected: edge u v length".into())) };
                    let u = u.parse::<usize>().map_err(|_| err(format!("bad vertex {u:?}")))?;
                    let v = v.parse::<usize>().map_err(|_| err(format!("bad vertex {v:?}")))?;
                    edges.push((u, v, Length::parse(l).map_err(err)?));
                }
                other => return Err(err(format!("unknown directive {other:?}"))),
            }
        }
        let n = vertices.ok_or(Error::Parse { line: 1, col: 1, msg: "missing vertices line".into() })?;
        Self::new(n, edges)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices
    }

    pub fn edges(&self) -> &[(usize, usize, Length)] {
        &self.edges
    }

    pub fn directed_count(&self) -> usize {
        2 * self.edges.len()
    }

    pub fn tail(&self, d: usize) -> usize {
        let (u, v, _) = self.edges[d / 2];
        if d.is_multiple_of(2) {
            u
        } else {
            v
        }
    }

    pub fn head(&self, d: usize) -> usize {
        let (u, v, _) = self.edges[d / 2];
        if d.is_multiple_of(2) {
            v
        } else {
            u
        }
    }

    pub fn reverse(d: usize) -> usize {
        d ^ 1
    }

    pub fn length(&self, d: usize) -> Length {
        self.edges[d / 2].2
    }

    pub fn min_length(&self) -> Length {
        self.edges.iter().map(|e| e.2).reduce(Length::min).expect("edges")
    }

    pub fn max_length(&self) -> Length {
        self.edges.iter().map(|e| e.2).reduce(Length::max).expect("edges")
    }

    pub fn all_rational(&self) -> bool {
        self.edges.iter().all(|e| e.2.is_rational())
    }

    pub fn word_length(&self, word: &[usize]) -> Length {
        word.iter().map(|&d| self.length(d)).sum()
    }
}

/// Non-backtracking transitions between directed edges.
pub fn edge_shift(g: &MetricGraph) -> TransitionMatrix {
    let n = g.directed_count();
    let succ =
        (0..n).map(|e| (0..n).filter(|&f| g.tail(f) == g.head(e) && f != MetricGraph::reverse(e)).collect()).collect();
    TransitionMatrix::from_successors(succ).expect("degree >= 3 gives nonempty rows")
}

/// Suspension over the edge shift with the edge length as roof.
pub fn code_flow(g: &MetricGraph) -> SuspensionFlow {
    let a = edge_shift(g);
    let rho = LocallyConstantPotential::new(&a, 1, |w| g.length(w[0]).to_f64()).expect("depth 1");
    SuspensionFlow::new(a, RoofFunction::new(rho).expect("positive lengths")).expect("same base")
}

/// Primitive closed non-backtracking cycles of total length ≤ L_max.
pub fn closed_geodesics(g: &MetricGraph, l_max: Length) -> Vec<(PeriodicOrbit, Length)> {
    let a = edge_shift(g);
    let mut out = Vec::new();
    let mut path = Vec::new();
    for start in 0..a.size() {
        path.clear();
        path.push(start);
        cycles_from(g, &a, start, g.length(start), l_max, &mut path, &mut out);
    }
    out.sort_by(|x, y| x.1.compare(y.1).then_with(|| x.0.word().cmp(y.0.word())));
    out
}

fn cycles_from(
    g: &MetricGraph,
    a: &TransitionMatrix,
    start: usize,
    len: Length,
    l_max: Length,
    path: &mut Word,
    out: &mut Vec<(PeriodicOrbit, Length)>,
) {
    let last = *path.last().expect("nonempty");
    if a.get(last, start) && is_primitive(path) && canonical_rotation(path) == *path {
        out.push((PeriodicOrbit::new(a, path).expect("cyclic"), len));
    }
    for &next in a.successors(last) {
        if next < start {
            continue;
        }
        let l = len + g.length(next);
        if l.le(l_max) {
            path.push(next);
            cycles_from(g, a, start, l, l_max, path, out);
            path.pop();
        }
    }
}

/// Length of the shortest closed geodesic.
pub fn systole(g: &MetricGraph) -> Length {
    let mut bound = g.max_length();
    loop {
        if let Some((_, l)) = closed_geodesics(g, bound).first() {
            return *l;
        }
        bound = bound + bound;
    }
}

/// Largest c with every edge length in cℤ, if any.
pub fn arithmetic_check(g: &MetricGraph) -> Option<Length> {
    if g.all_rational() {
        let mut acc: Option<Ratio<i128>> = None;
        for &(_, _, l) in g.edges() {
            let Length::Rational(r) = l else { unreachable!() };
            acc = Some(match acc {
                None => r,
                Some(c) => {
                    let n = (c.numer() * r.denom()).gcd(&(r.numer() * c.denom()));
                    Ratio::new(n, c.denom() * r.denom())
                }
            });
        }
        return acc.map(Length::Rational);
    }
    let lengths: Vec<f64> = g.edges().iter().map(|e| e.2.to_f64()).collect();
    weak_mixing_test(&lengths, 1e-9).ok().flatten().map(Length::Real)
}

/// Measure of maximal entropy in the equal-length case.
#[derive(Debug, Clone, PartialEq)]
pub struct BowenMargulis {
    pub edge_length: Length,
    pub measure: FlowMeasure,
    pub entropy: f64,
}

pub fn bowen_margulis(g: &MetricGraph) -> Result<BowenMargulis> {
    let c = g.edges()[0].2;
    if g.edges().iter().any(|e| !e.2.eq_len(c)) {
        return Err(Error::UnequalLengths);
    }
    let flow = code_flow(g);
    let measure = flow.flow_measure(&LocallyConstantPotential::zero(flow.base()))?;
    let lambda = crate::sft::perron(&flow.base().to_weighted())?.lambda;
    Ok(BowenMargulis { edge_length: c, measure, entropy: lambda.ln() / c.to_f64() })
}
