//! Background-free lattice: bookkeeping vertices, link variables, plaquette
//! holonomies, the Wilson action and label propagation.
//!
//! Vertices sit on a grid of spacing `epsilon / 2`. A link joins two vertices
//! two grid steps apart and is evaluated at the intermediate vertex, so link
//! variables live on the coarse (all-even) sublattice with spacing `epsilon`.

use crate::algebra::{exp_matrix, AlgebraMode, GroupElement, Mat5};
use crate::error::{ensure_finite, Error, Result};
use crate::potential::{ConnectionField, PotentialField};
use crate::quadrature::gauss_legendre_on;
use crate::tensor::{Mat4, Point4};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::{HashSet, VecDeque};

pub type VertexId = usize;

#[derive(Clone, Debug)]
pub struct LatticeGraph {
    pub mode: AlgebraMode,
    /// Coarse cells per direction; the vertex grid has `2 * cells + 1` points.
    pub cells: [usize; 4],
    pub epsilon: f64,
    pub origin: Point4,
    links: Vec<Mat5>,
    severed: HashSet<(VertexId, usize)>,
}

impl LatticeGraph {
    /// Lattice with every link set to the identity.
    pub fn new(mode: AlgebraMode, cells: [usize; 4], epsilon: f64, origin: Point4) -> Result<Self> {
        if cells.contains(&0) {
            return Err(Error::InvalidInput("every direction needs at least one cell".into()));
        }
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "lattice spacing {epsilon} must be positive"
            )));
        }
        ensure_finite(&origin, "lattice origin")?;
        let sites: usize = cells.iter().map(|c| c + 1).product();
        Ok(Self {
            mode,
            cells,
            epsilon,
            origin,
            links: vec![Mat5::identity(); sites * 4],
            severed: HashSet::new(),
        })
    }

    /// Links `U = exp(epsilon A_a(midpoint))` from a connection field.
    pub fn from_connection(
        field: &impl ConnectionField,
        cells: [usize; 4],
        epsilon: f64,
        origin: Point4,
        tolerance: f64,
    ) -> Result<Self> {
        let mut lat = Self::new(field.mode(), cells, epsilon, origin)?;
        let coarse = lat.coarse_dims();
        let links: Vec<Mat5> = (0..lat.links.len())
            .into_par_iter()
            .map(|idx| {
                let (site, a) = (idx / 4, idx % 4);
                let c = unravel(site, &coarse);
                if c[a] + 1 >= coarse[a] {
                    return Mat5::identity();
                }
                let mut mid = [0.0; 4];
                for d in 0..4 {
                    mid[d] = origin[d] + epsilon * c[d] as f64;
                }
                mid[a] += 0.5 * epsilon;
                let u = exp_matrix(&(field.connection(&mid, a) * epsilon), tolerance);
                GroupElement {
                    mode: field.mode(),
                    matrix: u,
                }
                .projected()
                .matrix
            })
            .collect();
        if links.iter().any(|m| !m.iter().all(|v| v.is_finite())) {
            return Err(Error::NonFinite("link variable".into()));
        }
        lat.links = links;
        Ok(lat)
    }

    pub fn vertex_dims(&self) -> [usize; 4] {
        self.cells.map(|c| 2 * c + 1)
    }

    fn coarse_dims(&self) -> [usize; 4] {
        self.cells.map(|c| c + 1)
    }

    /// Number of coarse sites, one gauge element each.
    pub fn site_count(&self) -> usize {
        self.coarse_dims().iter().product()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_dims().iter().product()
    }

    pub fn vertex(&self, n: [usize; 4]) -> Result<VertexId> {
        let dims = self.vertex_dims();
        if (0..4).any(|d| n[d] >= dims[d]) {
            return Err(Error::OutOfRange(format!("vertex {n:?} outside {dims:?}")));
        }
        Ok(ravel(&n, &dims))
    }

    pub fn coords(&self, v: VertexId) -> [usize; 4] {
        unravel(v, &self.vertex_dims())
    }

    /// Bookkeeping position `origin + (epsilon/2) n`.
    pub fn position(&self, v: VertexId) -> Point4 {
        let n = self.coords(v);
        std::array::from_fn(|d| self.origin[d] + 0.5 * self.epsilon * n[d] as f64)
    }

    fn site_of(&self, v: VertexId) -> Option<usize> {
        let n = self.coords(v);
        if n.iter().any(|k| k % 2 == 1) {
            return None;
        }
        Some(ravel(&n.map(|k| k / 2), &self.coarse_dims()))
    }

    /// Direction and orientation of a link `from -> to`, if they are two steps apart.
    fn link_direction(&self, from: VertexId, to: VertexId) -> Option<(usize, bool)> {
        let (p, q) = (self.coords(from), self.coords(to));
        let diffs: Vec<(usize, i64)> = (0..4)
            .filter(|&d| p[d] != q[d])
            .map(|d| (d, q[d] as i64 - p[d] as i64))
            .collect();
        match diffs.as_slice() {
            [(d, 2)] => Some((*d, true)),
            [(d, -2)] => Some((*d, false)),
            _ => None,
        }
    }

    /// Link variable `U_{from -> to}`; the reverse link is the group inverse.
    pub fn link(&self, from: VertexId, to: VertexId) -> Result<GroupElement> {
        let n = self.vertex_count();
        if from >= n || to >= n {
            return Err(Error::OutOfRange(format!("vertex id {} or {} >= {n}", from, to)));
        }
        let (a, forward) = self
            .link_direction(from, to)
            .ok_or_else(|| Error::InvalidInput(format!("vertices {from} and {to} are not joined by a link")))?;
        let base = if forward { from } else { to };
        let site = self
            .site_of(base)
            .ok_or_else(|| Error::InvalidInput("links start on even vertices".into()))?;
        let u = GroupElement {
            mode: self.mode,
            matrix: self.links[site * 4 + a],
        };
        Ok(if forward { u } else { u.inverse() })
    }

    pub fn set_link(&mut self, from: VertexId, a: usize, u: &GroupElement) -> Result<()> {
        if u.mode != self.mode {
            return Err(Error::ModeMismatch(format!("{} vs {}", u.mode, self.mode)));
        }
        let site = self
            .site_of(from)
            .ok_or_else(|| Error::InvalidInput("links start on even vertices".into()))?;
        self.links[site * 4 + a] = u.matrix;
        Ok(())
    }

    /// Remove the single edge `v -> v + e_a` from label propagation.
    pub fn sever_edge(&mut self, v: VertexId, a: usize) {
        self.severed.insert((v, a));
    }

    /// `U(x) -> g(x) U(x) g(x + a)^{-1}` with one group element per coarse site.
    pub fn gauge_transform(&self, gauge: &[GroupElement]) -> Result<LatticeGraph> {
        let coarse = self.coarse_dims();
        let sites: usize = coarse.iter().product();
        if gauge.len() != sites {
            return Err(Error::InvalidInput(format!(
                "need {sites} gauge elements, got {}",
                gauge.len()
            )));
        }
        let mut out = self.clone();
        for site in 0..sites {
            let c = unravel(site, &coarse);
            for a in 0..4 {
                if c[a] + 1 < coarse[a] {
                    let mut n = c;
                    n[a] += 1;
                    let next = ravel(&n, &coarse);
                    out.links[site * 4 + a] =
                        gauge[site].matrix * self.links[site * 4 + a] * gauge[next].inverse().matrix;
                }
            }
        }
        Ok(out)
    }
}

fn ravel(n: &[usize; 4], dims: &[usize; 4]) -> usize {
    ((n[0] * dims[1] + n[1]) * dims[2] + n[2]) * dims[3] + n[3]
}

fn unravel(mut idx: usize, dims: &[usize; 4]) -> [usize; 4] {
    let mut n = [0; 4];
    for d in (0..4).rev() {
        n[d] = idx % dims[d];
        idx /= dims[d];
    }
    n
}

/// Ordered product of links along a vertex path.
pub fn path_holonomy(lat: &LatticeGraph, path: &[VertexId]) -> Result<GroupElement> {
    let mut acc = GroupElement::identity(lat.mode);
    for w in path.windows(2) {
        acc = acc.compose(&lat.link(w[0], w[1])?);
    }
    Ok(acc)
}

/// Elementary plaquette `U_a(x) U_b(x+a) U_a(x+b)^-1 U_b(x)^-1` with base vertex `x`.
pub fn plaquette_holonomy(lat: &LatticeGraph, base: VertexId, a: usize, b: usize) -> Result<GroupElement> {
    if a == b || a > 3 || b > 3 {
        return Err(Error::InvalidInput(format!("plaquette plane ({a},{b}) is degenerate")));
    }
    let n = lat.coords(base);
    let step = |n: [usize; 4], d: usize| -> Result<[usize; 4]> {
        let mut m = n;
        m[d] += 2;
        lat.vertex(m).map(|_| m)
    };
    let p1 = step(n, a)?;
    let p2 = step(p1, b)?;
    let p3 = step(n, b)?;
    let ids = [base, lat.vertex(p1)?, lat.vertex(p2)?, lat.vertex(p3)?, base];
    path_holonomy(lat, &ids)
}

/// `Re tr(U - 1)`.
pub fn trace_deficit(u: &GroupElement) -> f64 {
    u.matrix.trace() - 5.0
}

/// Wilson action `sum_{a<b} f_a f_b sum_p w_p Re tr(P - 1)`, with trapezoid
/// weights in the two directions transverse to each plaquette.
pub fn wilson_action(lat: &LatticeGraph) -> f64 {
    let form = lat.mode.spacetime_form();
    let coarse = lat.coarse_dims();
    let sites: usize = coarse.iter().product();
    let links = &lat.links;
    let mode = lat.mode;
    let inv = |m: &Mat5| GroupElement { mode, matrix: *m }.inverse().matrix;
    let mut total = 0.0;
    for a in 0..4 {
        for b in (a + 1)..4 {
            let sum: f64 = (0..sites)
                .into_par_iter()
                .map(|site| {
                    let c = unravel(site, &coarse);
                    if c[a] + 1 >= coarse[a] || c[b] + 1 >= coarse[b] {
                        return 0.0;
                    }
                    let mut w = 1.0;
                    for d in 0..4 {
                        if d != a && d != b && (c[d] == 0 || c[d] + 1 == coarse[d]) {
                            w *= 0.5;
                        }
                    }
                    let mut ca = c;
                    ca[a] += 1;
                    let mut cb = c;
                    cb[b] += 1;
                    let ua = links[site * 4 + a];
                    let ub_a = links[ravel(&ca, &coarse) * 4 + b];
                    let ua_b = links[ravel(&cb, &coarse) * 4 + a];
                    let ub = links[site * 4 + b];
                    let p = ua * ub_a * inv(&ua_b) * inv(&ub);
                    w * (p.trace() - 5.0)
                })
                .sum();
            total += form[a] * form[b] * sum;
        }
    }
    total
}

/// `1/4 int f^{aa} f^{bb} tr(F_ab F_ab)` over a box by a Gauss-Legendre product rule.
pub fn continuum_action(field: &impl ConnectionField, lo: Point4, hi: Point4, nodes: usize) -> Result<f64> {
    ensure_finite(&lo, "domain")?;
    ensure_finite(&hi, "domain")?;
    if (0..4).any(|d| hi[d] <= lo[d]) || nodes == 0 {
        return Err(Error::InvalidInput("empty integration domain".into()));
    }
    let form = field.mode().spacetime_form();
    let rules: Vec<(Vec<f64>, Vec<f64>)> = (0..4).map(|d| gauss_legendre_on(nodes, lo[d], hi[d])).collect();
    let total: f64 = (0..nodes.pow(4))
        .into_par_iter()
        .map(|idx| {
            let n = unravel(idx, &[nodes; 4]);
            let x: Point4 = std::array::from_fn(|d| rules[d].0[n[d]]);
            let w: f64 = (0..4).map(|d| rules[d].1[n[d]]).product();
            let a_mats: [Mat5; 4] = std::array::from_fn(|a| field.connection(&x, a));
            let mut density = 0.0;
            for a in 0..4 {
                for b in (a + 1)..4 {
                    let f = field.connection_derivative(&x, b, a) - field.connection_derivative(&x, a, b)
                        + a_mats[a] * a_mats[b]
                        - a_mats[b] * a_mats[a];
                    density += form[a] * form[b] * 0.5 * (f * f).trace();
                }
            }
            w * density
        })
        .sum();
    if !total.is_finite() {
        return Err(Error::NonFinite("continuum action".into()));
    }
    Ok(total)
}

/// Labels assigned by propagation from a seed vertex.
#[derive(Clone, Debug)]
pub struct VertexLabels {
    pub y: Vec<Option<[f64; 5]>>,
    pub unlabelled: Vec<VertexId>,
    /// Largest mismatch along edges not used by the spanning tree.
    pub loop_closure_residual: f64,
}

fn hop_forward(g: &Mat4, h: &Mat4, y: &[f64; 5], step: f64, a: usize) -> [f64; 5] {
    let mut w = *y;
    for b in 0..4 {
        let mut acc = g[(a, b)];
        for c in 0..4 {
            acc += h[(b, c)] * y[c];
        }
        w[b] = y[b] + step * acc;
    }
    w
}

/// Propagate `y` labels across single edges from `(0,0,0,0,y4)` at `seed`:
/// `w_b = y_b + (epsilon/2)(G_ab + H_abc y_c)` with potentials at the edge midpoint.
/// Backward hops invert the same relation. `y4` is carried unchanged.
pub fn propagate_labels(
    lat: &LatticeGraph,
    potential: &impl PotentialField,
    seed: VertexId,
    y4: f64,
) -> Result<VertexLabels> {
    let count = lat.vertex_count();
    if seed >= count {
        return Err(Error::OutOfRange(format!("seed {seed} >= {count}")));
    }
    let dims = lat.vertex_dims();
    let step = 0.5 * lat.epsilon;
    let mut y: Vec<Option<[f64; 5]>> = vec![None; count];
    y[seed] = Some([0.0, 0.0, 0.0, 0.0, y4]);
    let mut tree: HashSet<(VertexId, usize)> = HashSet::new();
    let mut queue = VecDeque::from([seed]);
    let slot = |x: &Point4, a: usize| -> (Mat4, Mat4) {
        let g = potential.g(x);
        let h = potential.h(x).slot(a);
        (g, h)
    };
    let midpoint = |v: VertexId, w: VertexId| -> Point4 {
        let (p, q) = (lat.position(v), lat.position(w));
        std::array::from_fn(|d| 0.5 * (p[d] + q[d]))
    };
    while let Some(v) = queue.pop_front() {
        let n = lat.coords(v);
        let yv = y[v].expect("queued vertices are labelled");
        for a in 0..4 {
            if n[a] + 1 < dims[a] {
                let mut m = n;
                m[a] += 1;
                let w = ravel(&m, &dims);
                if y[w].is_none() && !lat.severed.contains(&(v, a)) {
                    let (g, h) = slot(&midpoint(v, w), a);
                    y[w] = Some(hop_forward(&g, &h, &yv, step, a));
                    tree.insert((v, a));
                    queue.push_back(w);
                }
            }
            if n[a] > 0 {
                let mut m = n;
                m[a] -= 1;
                let w = ravel(&m, &dims);
                if y[w].is_none() && !lat.severed.contains(&(w, a)) {
                    let (g, h) = slot(&midpoint(v, w), a);
                    let lhs = Mat4::identity() + h * step;
                    let rhs = nalgebra::Vector4::from_fn(|b, _| yv[b] - step * g[(a, b)]);
                    let sol = lhs
                        .lu()
                        .solve(&rhs)
                        .ok_or_else(|| Error::Precondition("singular backward hop".into()))?;
                    y[w] = Some([sol[0], sol[1], sol[2], sol[3], yv[4]]);
                    tree.insert((w, a));
                    queue.push_back(w);
                }
            }
        }
    }
    let mut residual = 0.0_f64;
    for v in 0..count {
        let n = lat.coords(v);
        for a in 0..4 {
            if n[a] + 1 >= dims[a] || tree.contains(&(v, a)) || lat.severed.contains(&(v, a)) {
                continue;
            }
            let mut m = n;
            m[a] += 1;
            let w = ravel(&m, &dims);
            if let (Some(yv), Some(yw)) = (y[v], y[w]) {
                let (g, h) = slot(&midpoint(v, w), a);
                let pred = hop_forward(&g, &h, &yv, step, a);
                for b in 0..5 {
                    residual = residual.max((pred[b] - yw[b]).abs());
                }
            }
        }
    }
    let unlabelled = (0..count).filter(|&v| y[v].is_none()).collect();
    Ok(VertexLabels {
        y,
        unlabelled,
        loop_closure_residual: residual,
    })
}

/// One row of a Wilson-action convergence study.
#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceRow {
    pub cells: usize,
    pub epsilon: f64,
    pub wilson: f64,
    pub continuum: f64,
    pub error: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceStudy {
    pub rows: Vec<ConvergenceRow>,
    /// `log2(e_k / e_{k+1})` between successive halvings.
    pub pairwise_orders: Vec<f64>,
    /// Least-squares slope of `log e` against `log epsilon`.
    pub fitted_order: f64,
}

/// Wilson action on `[lo, lo + length]^4` for each cell count against the continuum value.
pub fn convergence_study(
    field: &impl ConnectionField,
    lo: Point4,
    length: f64,
    levels: &[usize],
    quadrature_nodes: usize,
    tolerance: f64,
) -> Result<ConvergenceStudy> {
    if levels.len() < 2 {
        return Err(Error::InvalidInput("need at least two refinement levels".into()));
    }
    let hi = lo.map(|v| v + length);
    let continuum = continuum_action(field, lo, hi, quadrature_nodes)?;
    let mut rows = Vec::new();
    for &n in levels {
        let eps = length / n as f64;
        let lat = LatticeGraph::from_connection(field, [n; 4], eps, lo, tolerance)?;
        let wilson = wilson_action(&lat);
        rows.push(ConvergenceRow {
            cells: n,
            epsilon: eps,
            wilson,
            continuum,
            error: (wilson - continuum).abs(),
        });
    }
    let pairwise_orders = rows
        .windows(2)
        .map(|w| (w[0].error / w[1].error).ln() / (w[0].epsilon / w[1].epsilon).ln())
        .collect();
    let fitted_order = fit_slope(
        &rows.iter().map(|r| r.epsilon.ln()).collect::<Vec<_>>(),
        &rows.iter().map(|r| r.error.ln()).collect::<Vec<_>>(),
    );
    Ok(ConvergenceStudy {
        rows,
        pairwise_orders,
        fitted_order,
    })
}

/// Least-squares slope of `y` against `x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Smooth analytic connection used for convergence and invariance studies:
/// every generator coefficient is `alpha sin(k.x + phi) + beta`.
#[derive(Clone, Debug)]
pub struct SmoothTestField {
    pub mode: AlgebraMode,
    basis: Vec<Mat5>,
    coeffs: Vec<[WaveCoeff; 10]>,
}

#[derive(Clone, Copy, Debug)]
struct WaveCoeff {
    alpha: f64,
    beta: f64,
    k: [f64; 4],
    phi: f64,
}

impl SmoothTestField {
    /// Deterministic coefficients scaled by `amplitude`.
    pub fn new(mode: AlgebraMode, amplitude: f64) -> Self {
        let gens = crate::algebra::build_generators(mode);
        let basis = gens.basis();
        let frac = |i: usize| ((i as f64 * 0.618_033_988_749_895).fract() - 0.5) * 2.0;
        let coeffs = (0..4)
            .map(|a| {
                std::array::from_fn(|g| {
                    let s = a * 10 + g;
                    WaveCoeff {
                        alpha: amplitude * 0.6 * frac(s + 1),
                        beta: amplitude * 0.4 * frac(3 * s + 7),
                        k: std::array::from_fn(|d| 1.5 * frac(5 * s + 11 * d + 2)),
                        phi: 3.0 * frac(7 * s + 13),
                    }
                })
            })
            .collect();
        Self { mode, basis, coeffs }
    }
}

impl ConnectionField for SmoothTestField {
    fn mode(&self) -> AlgebraMode {
        self.mode
    }

    fn connection(&self, x: &Point4, a: usize) -> Mat5 {
        self.coeffs[a]
            .iter()
            .zip(&self.basis)
            .fold(Mat5::zeros(), |acc, (c, t)| {
                let phase: f64 = c.phi + (0..4).map(|d| c.k[d] * x[d]).sum::<f64>();
                acc + t * (c.alpha * phase.sin() + c.beta)
            })
    }

    fn connection_derivative(&self, x: &Point4, a: usize, b: usize) -> Mat5 {
        self.coeffs[a]
            .iter()
            .zip(&self.basis)
            .fold(Mat5::zeros(), |acc, (c, t)| {
                let phase: f64 = c.phi + (0..4).map(|d| c.k[d] * x[d]).sum::<f64>();
                acc + t * (c.alpha * c.k[b] * phase.cos())
            })
    }
}
