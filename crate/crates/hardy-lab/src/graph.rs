//! Locally finite weighted graphs and the weighted Hardy–Rellich identities.
//!
//! A graph is a symmetric positive edge weight `b(x, y)` on a finite vertex
//! set (an infinite locally finite graph is represented by a finite window
//! wide enough that every stencil touching the support of the test function
//! is exact). On top of it:
//!
//! * `Δf(x) = Σ_y b(x,y)[f(x) − f(y)]` — [`laplacian`],
//! * `⟨∇f, ∇g⟩_x = ½ Σ_y b(x,y)[f(x)−f(y)][g(x)−g(y)]` — [`grad_pairing`],
//! * `div F(x) = ½ Σ_y b(x,y)[F(y,x) − F(x,y)]` — [`edge_divergence`],
//! * `T(V, f) = V·Δf − ⟨∇f, ∇V⟩ = −div(V∇f)` — [`t_functional`],
//! * the sum-of-squares functional `F(V, f, u)` — [`f_functional`],
//!
//! and the exact first-order, second-order, iterated and odd-order energy
//! identities built from them — [`identity_residual`].

use crate::sum::KahanSum;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use thiserror::Error;

pub type Vertex = u64;

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("unknown vertex {0}")]
    UnknownVertex(Vertex),
    #[error("self-loop at vertex {0}")]
    SelfLoop(Vertex),
    #[error("edge weight must be positive: b({0},{1}) = {2}")]
    NonpositiveWeight(Vertex, Vertex, f64),
    #[error("edge ({0},{1}) already present")]
    DuplicateEdge(Vertex, Vertex),
    #[error("edge function has no value on ordered pair ({0},{1})")]
    MissingEdgeValue(Vertex, Vertex),
    #[error("reference function must be positive, got {value} at vertex {vertex}")]
    NonpositiveF { vertex: Vertex, value: f64 },
    #[error("identity hypothesis violated: Δ^{k} f = {value} at vertex {vertex} (needs > {threshold})")]
    HypothesisViolated {
        vertex: Vertex,
        k: u32,
        value: f64,
        threshold: f64,
    },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Finite weighted graph with symmetric positive edge weights and no
/// self-loops. Neighbor lists are kept sorted so every traversal is
/// deterministic.
#[derive(Debug, Clone, Default)]
pub struct Graph {
    adj: BTreeMap<Vertex, Vec<(Vertex, f64)>>,
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    /// A path on vertices `lo..=hi` with unit edge weights.
    pub fn path(lo: Vertex, hi: Vertex) -> Self {
        Self::weighted_path(lo, hi, |_| 1.0)
    }

    /// A path on `lo..=hi`; edge `{n−1, n}` gets weight `b(n)`.
    pub fn weighted_path(lo: Vertex, hi: Vertex, b: impl Fn(Vertex) -> f64) -> Self {
        let mut g = Self::new();
        g.add_vertex(lo);
        for n in lo + 1..=hi {
            g.add_edge(n - 1, n, b(n)).expect("path edge");
        }
        g
    }

    pub fn add_vertex(&mut self, x: Vertex) {
        self.adj.entry(x).or_default();
    }

    pub fn add_edge(&mut self, x: Vertex, y: Vertex, b: f64) -> Result<(), GraphError> {
        if x == y {
            return Err(GraphError::SelfLoop(x));
        }
        if !(b > 0.0) {
            return Err(GraphError::NonpositiveWeight(x, y, b));
        }
        if self.edge_weight(x, y).is_some() {
            return Err(GraphError::DuplicateEdge(x, y));
        }
        for (a, c) in [(x, y), (y, x)] {
            let list = self.adj.entry(a).or_default();
            let pos = list.partition_point(|&(v, _)| v < c);
            list.insert(pos, (c, b));
        }
        Ok(())
    }

    pub fn contains(&self, x: Vertex) -> bool {
        self.adj.contains_key(&x)
    }

    pub fn vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.adj.keys().copied()
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    pub fn neighbors(&self, x: Vertex) -> Result<&[(Vertex, f64)], GraphError> {
        self.adj
            .get(&x)
            .map(|v| v.as_slice())
            .ok_or(GraphError::UnknownVertex(x))
    }

    pub fn edge_weight(&self, x: Vertex, y: Vertex) -> Option<f64> {
        let list = self.adj.get(&x)?;
        list.binary_search_by(|&(v, _)| v.cmp(&y))
            .ok()
            .map(|i| list[i].1)
    }

    pub fn is_connected(&self) -> bool {
        let Some(&start) = self.adj.keys().next() else {
            return true;
        };
        self.ball(&[start], usize::MAX).len() == self.adj.len()
    }

    /// Vertices within graph distance `radius` of `seeds`.
    pub fn ball(&self, seeds: &[Vertex], radius: usize) -> BTreeSet<Vertex> {
        let mut seen: BTreeSet<Vertex> = seeds.iter().copied().collect();
        let mut frontier: VecDeque<(Vertex, usize)> =
            seeds.iter().map(|&s| (s, 0usize)).collect();
        while let Some((x, d)) = frontier.pop_front() {
            if d == radius {
                continue;
            }
            if let Some(list) = self.adj.get(&x) {
                for &(y, _) in list {
                    if seen.insert(y) {
                        frontier.push_back((y, d + 1));
                    }
                }
            }
        }
        seen
    }

    /// Parses the interchange format: one `x y b(x,y)` triple per line,
    /// nonnegative integer vertex ids. Blank lines and lines starting with
    /// `#` are skipped. A line with a single integer declares an isolated
    /// vertex.
    pub fn parse(text: &str) -> Result<Self, GraphError> {
        let mut g = Self::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let err = |msg: &str| GraphError::Parse {
                line: i + 1,
                msg: msg.to_string(),
            };
            let x: Vertex = parts
                .next()
                .unwrap()
                .parse()
                .map_err(|_| err("bad vertex id"))?;
            match parts.next() {
                None => g.add_vertex(x),
                Some(ys) => {
                    let y: Vertex = ys.parse().map_err(|_| err("bad vertex id"))?;
                    let b: f64 = parts
                        .next()
                        .ok_or_else(|| err("missing edge weight"))?
                        .parse()
                        .map_err(|_| err("bad edge weight"))?;
                    if parts.next().is_some() {
                        return Err(err("trailing tokens"));
                    }
                    g.add_edge(x, y, b)?;
                }
            }
        }
        Ok(g)
    }

    /// Serializes in the interchange format with each edge listed once.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for (&x, list) in &self.adj {
            if list.is_empty() {
                out.push_str(&format!("{x}\n"));
            }
            for &(y, b) in list {
                if x < y {
                    out.push_str(&format!("{x} {y} {b:.17e}\n"));
                }
            }
        }
        out
    }
}

/// Real function on vertices; 0 outside the stored support.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct VertexFunction {
    map: BTreeMap<Vertex, f64>,
}

impl VertexFunction {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn constant(g: &Graph, c: f64) -> Self {
        Self::from_fn(g.vertices(), |_| c)
    }

    pub fn from_fn(verts: impl IntoIterator<Item = Vertex>, mut f: impl FnMut(Vertex) -> f64) -> Self {
        let mut map = BTreeMap::new();
        for x in verts {
            map.insert(x, f(x));
        }
        Self { map }
    }

    #[inline]
    pub fn get(&self, x: Vertex) -> f64 {
        self.map.get(&x).copied().unwrap_or(0.0)
    }

    pub fn set(&mut self, x: Vertex, v: f64) {
        self.map.insert(x, v);
    }

    /// Stored (vertex, value) pairs in vertex order.
    pub fn iter(&self) -> impl Iterator<Item = (Vertex, f64)> + '_ {
        self.map.iter().map(|(&x, &v)| (x, v))
    }

    /// Vertices with nonzero value.
    pub fn support(&self) -> Vec<Vertex> {
        self.map
            .iter()
            .filter(|(_, &v)| v != 0.0)
            .map(|(&x, _)| x)
            .collect()
    }
}

/// Real function on ordered adjacent pairs.
#[derive(Debug, Clone, Default)]
pub struct EdgeFunction {
    map: BTreeMap<(Vertex, Vertex), f64>,
}

impl EdgeFunction {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, x: Vertex, y: Vertex, v: f64) {
        self.map.insert((x, y), v);
    }

    pub fn get(&self, x: Vertex, y: Vertex) -> Option<f64> {
        self.map.get(&(x, y)).copied()
    }

    /// `∇f(x,y) = f(x) − f(y)` on every ordered adjacent pair.
    pub fn gradient(g: &Graph, f: &VertexFunction) -> Self {
        let mut e = Self::new();
        for x in g.vertices() {
            for &(y, _) in g.neighbors(x).unwrap() {
                e.set(x, y, f.get(x) - f.get(y));
            }
        }
        e
    }

    /// `F(x,y) ↦ V(x)·F(x,y)`.
    pub fn scale_by_vertex(&self, v: &VertexFunction) -> Self {
        let mut e = Self::new();
        for (&(x, y), &val) in &self.map {
            e.set(x, y, v.get(x) * val);
        }
        e
    }

    pub fn is_antisymmetric(&self, tol: f64) -> bool {
        self.map.iter().all(|(&(x, y), &v)| {
            self.get(y, x)
                .map(|w| (v + w).abs() <= tol * (v.abs() + w.abs() + 1.0))
                .unwrap_or(false)
        })
    }
}

/// `Δf(x) = Σ_{y∼x} b(x,y)[f(x) − f(y)]`.
pub fn laplacian(g: &Graph, f: &VertexFunction, x: Vertex) -> Result<f64, GraphError> {
    let mut acc = KahanSum::new();
    let fx = f.get(x);
    for &(y, b) in g.neighbors(x)? {
        acc.add(b * (fx - f.get(y)));
    }
    Ok(acc.value())
}

/// `Δ^k f` as a vertex function over the whole (finite) graph.
pub fn laplace_power(g: &Graph, f: &VertexFunction, k: u32) -> VertexFunction {
    let mut cur = f.clone();
    for _ in 0..k {
        cur = VertexFunction::from_fn(g.vertices(), |x| laplacian(g, &cur, x).unwrap());
    }
    cur
}

/// `⟨∇f, ∇g⟩_x = ½ Σ_{y∼x} b(x,y)[f(x)−f(y)][g(x)−g(y)]`.
pub fn grad_pairing(
    g: &Graph,
    f: &VertexFunction,
    h: &VertexFunction,
    x: Vertex,
) -> Result<f64, GraphError> {
    let mut acc = KahanSum::new();
    let (fx, hx) = (f.get(x), h.get(x));
    for &(y, b) in g.neighbors(x)? {
        acc.add(b * (fx - f.get(y)) * (hx - h.get(y)));
    }
    Ok(0.5 * acc.value())
}

/// `div F(x) = ½ Σ_{y∼x} b(x,y)[F(y,x) − F(x,y)]`. Every touched ordered
/// pair must carry a stored value.
pub fn edge_divergence(g: &Graph, ef: &EdgeFunction, x: Vertex) -> Result<f64, GraphError> {
    let mut acc = KahanSum::new();
    for &(y, b) in g.neighbors(x)? {
        let fyx = ef.get(y, x).ok_or(GraphError::MissingEdgeValue(y, x))?;
        let fxy = ef.get(x, y).ok_or(GraphError::MissingEdgeValue(x, y))?;
        acc.add(b * (fyx - fxy));
    }
    Ok(0.5 * acc.value())
}

/// `T(V, f)(x) = V(x)Δf(x) − ⟨∇f, ∇V⟩_x`; equals `−div(V∇f)(x)` exactly.
pub fn t_functional(
    g: &Graph,
    v: &VertexFunction,
    f: &VertexFunction,
    x: Vertex,
) -> Result<f64, GraphError> {
    Ok(v.get(x) * laplacian(g, f, x)? - grad_pairing(g, f, v, x)?)
}

/// `F(V, f, u) = ½ Σ_{x,y} b(x,y) V(x) (√(f(x)/f(y)) u(y) − √(f(y)/f(x)) u(x))²`.
///
/// `f` must be positive wherever a nonzero summand reads it.
pub fn f_functional(
    g: &Graph,
    v: &VertexFunction,
    f: &VertexFunction,
    u: &VertexFunction,
) -> Result<f64, GraphError> {
    let mut acc = KahanSum::new();
    for x in g.vertices() {
        for &(y, b) in g.neighbors(x).unwrap() {
            let (ux, uy) = (u.get(x), u.get(y));
            if ux == 0.0 && uy == 0.0 {
                continue;
            }
            let (fx, fy) = (f.get(x), f.get(y));
            for (vert, val) in [(x, fx), (y, fy)] {
                if !(val > 0.0) {
                    return Err(GraphError::NonpositiveF { vertex: vert, value: val });
                }
            }
            let r = (fx / fy).sqrt();
            let s = r * uy - ux / r;
            acc.add(0.5 * b * v.get(x) * s * s);
        }
    }
    Ok(acc.value())
}

/// Which exact energy identity to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IdentityKind {
    /// `Σ V|∇u|² − Σ (T(V,f)/f) u² = F(V, f, u)`.
    FirstOrder,
    /// `Σ V|Δu|² = Σ (Δ(VΔf)/f) u² + 2F(V·L(f), f, u) + Σ V|Δu − L(f)u|²`
    /// with `L(f) = Δf/f`.
    SecondOrder,
    /// The order-`2m` identity obtained by iterating the second-order one.
    Iterated(u32),
    /// The order-`2m+1` identity (gradient of `Δ^m u` on the left).
    OddOrder(u32),
}

/// Both sides of an identity, evaluated exactly as written.
#[derive(Debug, Clone, Copy)]
pub struct IdentityCheck {
    pub lhs: f64,
    pub rhs: f64,
}

impl IdentityCheck {
    pub fn residual(&self) -> f64 {
        (self.lhs - self.rhs).abs()
    }

    pub fn relative_residual(&self) -> f64 {
        self.residual() / (self.lhs.abs() + self.rhs.abs() + 1.0)
    }
}

fn hypothesis_order(which: IdentityKind) -> u32 {
    match which {
        IdentityKind::FirstOrder => 0,
        IdentityKind::SecondOrder => 1,
        IdentityKind::Iterated(m) | IdentityKind::OddOrder(m) => m,
    }
}

/// Evaluates the selected identity for concrete `V`, `f`, `u` and returns
/// both sides. The positivity hypotheses (`Δ^k f > 0` for `k` up to the
/// identity order) are checked, with strictness threshold `1e−13 · max|Δ^k f|`,
/// on the vertices within stencil reach of the support of `u`; a violation
/// is an error, not a residual.
pub fn identity_residual(
    g: &Graph,
    v: &VertexFunction,
    f: &VertexFunction,
    u: &VertexFunction,
    which: IdentityKind,
) -> Result<IdentityCheck, GraphError> {
    let m = hypothesis_order(which);
    // Δ^k f for k = 0..=m+1 (the top power shows up in L(Δ^m f) numerators).
    let mut fk: Vec<VertexFunction> = Vec::with_capacity(m as usize + 2);
    fk.push(f.clone());
    for _ in 0..=m {
        let last = fk.last().unwrap();
        fk.push(VertexFunction::from_fn(g.vertices(), |x| {
            laplacian(g, last, x).unwrap()
        }));
    }
    // Hypothesis check within stencil reach of supp(u).
    let reach = g.ball(&u.support(), m as usize + 2);
    for k in 0..=m {
        let scale = reach
            .iter()
            .map(|&x| fk[k as usize].get(x).abs())
            .fold(0.0f64, f64::max);
        let threshold = 1e-13 * scale;
        for &x in &reach {
            let val = fk[k as usize].get(x);
            if !(val > threshold) {
                return Err(GraphError::HypothesisViolated {
                    vertex: x,
                    k,
                    value: val,
                    threshold,
                });
            }
        }
    }

    match which {
        IdentityKind::FirstOrder => {
            let mut lhs = KahanSum::new();
            for x in g.vertices() {
                lhs.add(v.get(x) * grad_pairing(g, u, u, x)?);
                let ux = u.get(x);
                if ux != 0.0 {
                    lhs.add(-t_functional(g, v, f, x)? / f.get(x) * ux * ux);
                }
            }
            Ok(IdentityCheck {
                lhs: lhs.value(),
                rhs: f_functional(g, v, f, u)?,
            })
        }
        IdentityKind::SecondOrder => identity_iterated(g, v, &fk, u, 1),
        IdentityKind::Iterated(m) => identity_iterated(g, v, &fk, u, m),
        IdentityKind::OddOrder(m) => identity_odd(g, v, &fk, u, m),
    }
}

/// `L(h) = Δh/h` wherever needed; caller guarantees `h != 0` there.
fn quotient(num: &VertexFunction, den: &VertexFunction, x: Vertex) -> f64 {
    num.get(x) / den.get(x)
}

/// Order-`2m` identity:
/// `Σ V|Δ^m u|² − Σ (Δ^m(VΔ^m f)/f) u²`
/// `= Σ_{k<m} Σ_x (Δ^{m−1−k}(VΔ^m f)/Δ^{k+1}f) |Δ^{k+1}u − L(Δ^k f)Δ^k u|²`
/// `+ 2 Σ_{k<m} F(Δ^{m−1−k}(VΔ^m f)/Δ^k f, Δ^k f, Δ^k u)`.
fn identity_iterated(
    g: &Graph,
    v: &VertexFunction,
    fk: &[VertexFunction],
    u: &VertexFunction,
    m: u32,
) -> Result<IdentityCheck, GraphError> {
    let uk = powers_of(g, u, m);
    // w_j = Δ^j (V Δ^m f), j = 0..=m.
    let vfm = VertexFunction::from_fn(g.vertices(), |x| v.get(x) * fk[m as usize].get(x));
    let wj: Vec<VertexFunction> = (0..=m).map(|j| laplace_power(g, &vfm, j)).collect();

    let mut lhs = KahanSum::new();
    for x in g.vertices() {
        let dmu = uk[m as usize].get(x);
        lhs.add(v.get(x) * dmu * dmu);
        let ux = u.get(x);
        if ux != 0.0 {
            lhs.add(-wj[m as usize].get(x) / fk[0].get(x) * ux * ux);
        }
    }

    let mut rhs = KahanSum::new();
    for k in 0..m {
        let weight = &wj[(m - 1 - k) as usize];
        for x in g.vertices() {
            let a = uk[(k + 1) as usize].get(x);
            let b = uk[k as usize].get(x);
            if a == 0.0 && b == 0.0 {
                continue;
            }
            let l = quotient(&fk[(k + 1) as usize], &fk[k as usize], x);
            let s = a - l * b;
            rhs.add(quotient(weight, &fk[(k + 1) as usize], x) * s * s);
        }
        let wq = VertexFunction::from_fn(touched(g, &uk[k as usize]), |x| {
            quotient(weight, &fk[k as usize], x)
        });
        rhs.add(2.0 * f_functional(g, &wq, &fk[k as usize], &uk[k as usize])?);
    }
    Ok(IdentityCheck {
        lhs: lhs.value(),
        rhs: rhs.value(),
    })
}

/// Order-`2m+1` identity:
/// `Σ V|∇(Δ^m u)|² − Σ (Δ^m T(V, Δ^m f)/f) u²`
/// `= Σ_{k<m} Σ_x (Δ^{m−1−k}T(V,Δ^m f)/Δ^{k+1}f) |Δ^{k+1}u − L(Δ^k f)Δ^k u|²`
/// `+ 2 Σ_{k<m} F(Δ^{m−1−k}T(V,Δ^m f)/Δ^k f, Δ^k f, Δ^k u) + F(V, Δ^m f, Δ^m u)`.
fn identity_odd(
    g: &Graph,
    v: &VertexFunction,
    fk: &[VertexFunction],
    u: &VertexFunction,
    m: u32,
) -> Result<IdentityCheck, GraphError> {
    let uk = powers_of(g, u, m);
    let t = VertexFunction::from_fn(g.vertices(), |x| {
        t_functional(g, v, &fk[m as usize], x).unwrap()
    });
    let tj: Vec<VertexFunction> = (0..=m).map(|j| laplace_power(g, &t, j)).collect();

    let mut lhs = KahanSum::new();
    for x in g.vertices() {
        lhs.add(v.get(x) * grad_pairing(g, &uk[m as usize], &uk[m as usize], x)?);
        let ux = u.get(x);
        if ux != 0.0 {
            lhs.add(-tj[m as usize].get(x) / fk[0].get(x) * ux * ux);
        }
    }

    let mut rhs = KahanSum::new();
    for k in 0..m {
        let weight = &tj[(m - 1 - k) as usize];
        for x in g.vertices() {
            let a = uk[(k + 1) as usize].get(x);
            let b = uk[k as usize].get(x);
            if a == 0.0 && b == 0.0 {
                continue;
            }
            let l = quotient(&fk[(k + 1) as usize], &fk[k as usize], x);
            let s = a - l * b;
            rhs.add(quotient(weight, &fk[(k + 1) as usize], x) * s * s);
        }
        let wq = VertexFunction::from_fn(touched(g, &uk[k as usize]), |x| {
            quotient(weight, &fk[k as usize], x)
        });
        rhs.add(2.0 * f_functional(g, &wq, &fk[k as usize], &uk[k as usize])?);
    }
    rhs.add(f_functional(g, v, &fk[m as usize], &uk[m as usize])?);
    Ok(IdentityCheck {
        lhs: lhs.value(),
        rhs: rhs.value(),
    })
}

/// `Δ^k u` for `k = 0..=m`.
fn powers_of(g: &Graph, u: &VertexFunction, m: u32) -> Vec<VertexFunction> {
    (0..=m).map(|k| laplace_power(g, u, k)).collect()
}

/// Vertices whose `F`-functional summands can be nonzero: the support of `w`
/// and its neighbors.
fn touched(g: &Graph, w: &VertexFunction) -> Vec<Vertex> {
    g.ball(&w.support(), 1).into_iter().collect()
}

/// Max relative residual over the Green formula `⟨Δf, g⟩ = ⟨∇f, ∇g⟩` and the
/// pointwise Leibniz rule `Δ(fg) = fΔg + gΔf − 2⟨∇f, ∇g⟩_x`.
pub fn leibniz_green_residual(
    g: &Graph,
    f: &VertexFunction,
    h: &VertexFunction,
) -> Result<f64, GraphError> {
    let mut green_l = KahanSum::new();
    let mut green_r = KahanSum::new();
    let mut worst: f64 = 0.0;
    let fh = VertexFunction::from_fn(g.vertices(), |x| f.get(x) * h.get(x));
    for x in g.vertices() {
        green_l.add(laplacian(g, f, x)? * h.get(x));
        green_r.add(grad_pairing(g, f, h, x)?);
        let lhs = laplacian(g, &fh, x)?;
        let rhs = f.get(x) * laplacian(g, h, x)? + h.get(x) * laplacian(g, f, x)?
            - 2.0 * grad_pairing(g, f, h, x)?;
        worst = worst.max((lhs - rhs).abs() / (lhs.abs() + rhs.abs() + 1.0));
    }
    let (gl, gr) = (green_l.value(), green_r.value());
    worst = worst.max((gl - gr).abs() / (gl.abs() + gr.abs() + 1.0));
    Ok(worst)
}

/// Hypothesis flags for [`rellich_weight_from_f`]: strict positivity of
/// `Δ^k f` for `k ≤ ⌊ℓ/2⌋`, nonnegativity for `⌊ℓ/2⌋ < i ≤ ℓ`, per order.
#[derive(Debug, Clone)]
pub struct HypothesisCertificate {
    /// `ok[k]` says whether `Δ^k f` met its requirement on the region.
    pub ok: Vec<bool>,
    pub all_ok: bool,
}

/// The weight `x ↦ Δ^ℓ f(x) / f(x)` on `region`, plus the certificate of the
/// positivity hypotheses that make it a valid Hardy–Rellich weight.
pub fn rellich_weight_from_f(
    g: &Graph,
    f: &VertexFunction,
    ell: u32,
    region: &[Vertex],
) -> Result<(VertexFunction, HypothesisCertificate), GraphError> {
    for &x in region {
        let val = f.get(x);
        if !(val > 0.0) {
            return Err(GraphError::NonpositiveF { vertex: x, value: val });
        }
    }
    let powers: Vec<VertexFunction> = (0..=ell).map(|k| laplace_power(g, f, k)).collect();
    let weight = VertexFunction::from_fn(region.iter().copied(), |x| {
        powers[ell as usize].get(x) / f.get(x)
    });
    let half = ell / 2;
    let ok: Vec<bool> = (0..=ell)
        .map(|k| {
            region.iter().all(|&x| {
                let v = powers[k as usize].get(x);
                if k <= half {
                    v > 0.0
                } else {
                    v >= 0.0
                }
            })
        })
        .collect();
    let all_ok = ok.iter().all(|&b| b);
    Ok((weight, HypothesisCertificate { ok, all_ok }))
}

/// A randomized instance on which every identity's positivity hypotheses
/// hold by construction.
pub struct IdentityInstance {
    pub graph: Graph,
    /// Ground state of the Laplacian on a deep window, extended by zero:
    /// `Δ^k f = λ^k f > 0` near the support of `u` for every relevant `k`.
    pub f: VertexFunction,
    pub lambda: f64,
    /// Random test function supported well inside the window.
    pub u: VertexFunction,
}

/// Builds a random tree with a long path tail; the window keeps the whole
/// tree and most of the tail, so the Dirichlet ground state satisfies
/// `Δ^k f = λ^k f` exactly on the wide neighborhood of `supp u` that the
/// identities of order up to `2m+1` read (for `m ≤ 3`).
pub fn identity_instance(tree_size: usize, m: u32, seed: u64) -> IdentityInstance {
    assert!(m <= 3, "tail depth is sized for m <= 3");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut graph = random_tree_with(&mut rng, tree_size.max(4));
    const TAIL: Vertex = 1000;
    graph.add_vertex(TAIL);
    for v in TAIL + 1..=TAIL + 30 {
        graph.add_edge(v - 1, v, rng.gen_range(0.5..2.0)).unwrap();
    }
    graph
        .add_edge((tree_size.max(4) - 1) as Vertex, TAIL, rng.gen_range(0.5..2.0))
        .unwrap();
    // Window: everything except the far end of the tail. Cutting early keeps
    // the ground-state eigenvalue away from zero, so Δ^k f = λ^k f stays
    // comfortably positive up to k = 3.
    let window: Vec<Vertex> = graph.vertices().filter(|&v| v < TAIL + 10).collect();
    let (f, lambda) = dirichlet_ground_state(&graph, &window);
    let supp: Vec<Vertex> = graph.ball(&[0], 2).into_iter().filter(|&v| v < TAIL).collect();
    let mut u = VertexFunction::new();
    for &x in &supp {
        u.set(x, rng.gen_range(-2.0..2.0));
    }
    IdentityInstance {
        graph,
        f,
        lambda,
        u,
    }
}

/// Random connected graph: a random spanning tree plus extra random edges,
/// weights uniform in `[0.5, 2]`. Deterministic in `seed`.
pub fn random_graph(n: usize, extra_edges: usize, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = random_tree_with(&mut rng, n);
    let mut added = 0;
    let mut attempts = 0;
    while added < extra_edges && attempts < 50 * extra_edges.max(1) {
        attempts += 1;
        let x = rng.gen_range(0..n) as Vertex;
        let y = rng.gen_range(0..n) as Vertex;
        if x != y && g.edge_weight(x, y).is_none() {
            g.add_edge(x, y, rng.gen_range(0.5..2.0)).unwrap();
            added += 1;
        }
    }
    g
}

/// Random attachment tree on vertices `0..n`. Deterministic in `seed`.
pub fn random_tree(n: usize, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_tree_with(&mut rng, n)
}

fn random_tree_with(rng: &mut ChaCha8Rng, n: usize) -> Graph {
    let mut g = Graph::new();
    g.add_vertex(0);
    for v in 1..n {
        let parent = rng.gen_range(0..v) as Vertex;
        g.add_edge(parent, v as Vertex, rng.gen_range(0.5..2.0)).unwrap();
    }
    g
}

/// Random vertex function with values uniform in `range` on `verts`.
pub fn random_vertex_function(
    verts: impl IntoIterator<Item = Vertex>,
    lo: f64,
    hi: f64,
    seed: u64,
) -> VertexFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    VertexFunction::from_fn(verts, |_| rng.gen_range(lo..hi))
}

/// Principal Dirichlet eigenpair of the Laplacian restricted to `verts`
/// (zero outside): returns a positive function `φ` with `Δφ = λ φ` on the
/// interior of `verts`, so `Δ^k φ = λ^k φ > 0` there for every `k`.
///
/// `verts` should induce a connected subgraph and omit at least one vertex
/// of a connected `g` so that `λ > 0`.
pub fn dirichlet_ground_state(g: &Graph, verts: &[Vertex]) -> (VertexFunction, f64) {
    let set: BTreeSet<Vertex> = verts.iter().copied().collect();
    let index: BTreeMap<Vertex, usize> = set.iter().enumerate().map(|(i, &x)| (x, i)).collect();
    let n = set.len();
    // Dense Dirichlet Laplacian (degree counts edges leaving the window too).
    let mut a = vec![vec![0.0f64; n]; n];
    for (&x, &i) in &index {
        let mut deg = 0.0;
        for &(y, b) in g.neighbors(x).unwrap() {
            deg += b;
            if let Some(&j) = index.get(&y) {
                a[i][j] = -b;
            }
        }
        a[i][i] = deg;
    }
    // Power-iteration warmup on cI − L (c above the Gershgorin bound) to get
    // a positive vector and a Rayleigh estimate of the smallest eigenvalue.
    let c = 1.0 + a.iter().enumerate().map(|(i, row)| 2.0 * row[i]).fold(0.0f64, f64::max);
    let rayleigh = |v: &[f64]| -> f64 {
        let mut num = KahanSum::new();
        for i in 0..n {
            let mut row = KahanSum::new();
            for j in 0..n {
                if a[i][j] != 0.0 {
                    row.add(a[i][j] * v[j]);
                }
            }
            num.add(row.value() * v[i]);
        }
        num.value() / v.iter().map(|x| x * x).sum::<f64>()
    };
    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    for _ in 0..500 {
        let mut w = vec![0.0; n];
        for i in 0..n {
            let mut acc = KahanSum::new();
            acc.add((c - a[i][i]) * v[i]);
            for j in 0..n {
                if j != i && a[i][j] != 0.0 {
                    acc.add(-a[i][j] * v[j]);
                }
            }
            w[i] = acc.value();
        }
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        for x in &mut w {
            *x /= norm;
        }
        v = w;
    }
    // Shifted inverse iteration: a few solves of (L − σI)w = v polish the
    // vector to machine precision.
    for _ in 0..4 {
        let sigma = 0.995 * rayleigh(&v);
        let mut m = a.clone();
        for i in 0..n {
            m[i][i] -= sigma;
        }
        if let Some(w) = lu_solve(m, &v) {
            let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            v = w.into_iter().map(|x| x / norm).collect();
        } else {
            break;
        }
    }
    let lambda = rayleigh(&v);
    let sign = if v.iter().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
    let f = VertexFunction::from_fn(set.iter().copied(), |x| sign * v[index[&x]]);
    (f, lambda)
}

/// Solves `M w = rhs` by Gaussian elimination with partial pivoting.
fn lu_solve(mut m: Vec<Vec<f64>>, rhs: &[f64]) -> Option<Vec<f64>> {
    let n = rhs.len();
    let mut b = rhs.to_vec();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[pivot][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let factor = m[row][col] / m[col][col];
            if factor != 0.0 {
                for k in col..n {
                    m[row][k] -= factor * m[col][k];
                }
                b[row] -= factor * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for col in (0..n).rev() {
        let mut acc = b[col];
        for k in col + 1..n {
            acc -= m[col][k] * x[k];
        }
        x[col] = acc / m[col][col];
    }
    Some(x)
}
