//! Generators of so(4,1), so(5) and the Poincare contraction as 5x5 matrices.
//!
//! `M_AB` acts as `(M_AB)_CD = d_AC f_BD - d_AD f_BC` with `f` the five-dimensional
//! form; the momentum generators are `V_mu = M_mu4`. In Poincare mode `V_mu` is the
//! nilpotent translation `e_mu e_4^T`.

use crate::error::{ensure_finite, Error, Result};
use crate::tensor::{Mat4, ETA};
use nalgebra::Matrix5;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

pub type Mat5 = Matrix5<f64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlgebraMode {
    DeSitter,
    EuclideanSo5,
    Poincare,
}

impl AlgebraMode {
    pub const ALL: [AlgebraMode; 3] = [Self::DeSitter, Self::EuclideanSo5, Self::Poincare];

    /// Four-dimensional form used to raise and lower indices.
    pub fn spacetime_form(self) -> [f64; 4] {
        match self {
            Self::EuclideanSo5 => [1.0; 4],
            _ => ETA,
        }
    }

    /// Five-dimensional invariant form, absent for the contraction.
    pub fn form5(self) -> Option<Mat5> {
        match self {
            Self::Poincare => None,
            _ => {
                let f = self.spacetime_form();
                Some(Mat5::from_diagonal(&nalgebra::Vector5::new(
                    f[0], f[1], f[2], f[3], 1.0,
                )))
            }
        }
    }
}

impl fmt::Display for AlgebraMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::DeSitter => "desitter",
            Self::EuclideanSo5 => "so5",
            Self::Poincare => "poincare",
        })
    }
}

impl FromStr for AlgebraMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "desitter" | "de-sitter" | "so41" => Ok(Self::DeSitter),
            "so5" | "euclidean" | "euclidean-so5" => Ok(Self::EuclideanSo5),
            "poincare" => Ok(Self::Poincare),
            other => Err(Error::InvalidInput(format!("unknown algebra mode '{other}'"))),
        }
    }
}

/// Index pairs `mu < nu` labelling the rotation generators.
pub const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// The ten basis matrices of one mode.
#[derive(Clone, Debug)]
pub struct GeneratorSet {
    pub mode: AlgebraMode,
    pub v: [Mat5; 4],
    pub m: [[Mat5; 4]; 4],
    /// Global sign in `[V_mu, V_nu] = sigma M_mu_nu` and the companion relations.
    pub sigma: f64,
}

impl GeneratorSet {
    /// `V^mu`, raised with the spacetime form.
    pub fn v_up(&self, mu: usize) -> Mat5 {
        self.v[mu] * self.form(mu)
    }

    /// `M^{mu nu}`, raised with the spacetime form.
    pub fn m_up(&self, mu: usize, nu: usize) -> Mat5 {
        self.m[mu][nu] * (self.form(mu) * self.form(nu))
    }

    pub fn form(&self, mu: usize) -> f64 {
        self.mode.spacetime_form()[mu]
    }

    /// All ten generators, momenta first.
    pub fn basis(&self) -> Vec<Mat5> {
        let mut out: Vec<Mat5> = self.v.to_vec();
        out.extend(PAIRS.iter().map(|&(a, b)| self.m[a][b]));
        out
    }
}

fn rotation(mu: usize, nu: usize, form: &[f64; 4]) -> Mat5 {
    let mut m = Mat5::zeros();
    if mu != nu {
        m[(mu, nu)] = form[nu];
        m[(nu, mu)] = -form[mu];
    }
    m
}

/// Build the generator matrices for `mode` and fix the sign `sigma`.
pub fn build_generators(mode: AlgebraMode) -> GeneratorSet {
    let form = mode.spacetime_form();
    let mut m = [[Mat5::zeros(); 4]; 4];
    for (mu, row) in m.iter_mut().enumerate() {
        for (nu, entry) in row.iter_mut().enumerate() {
            *entry = rotation(mu, nu, &form);
        }
    }
    let v = std::array::from_fn(|mu| {
        let mut x = Mat5::zeros();
        x[(mu, 4)] = 1.0;
        if mode != AlgebraMode::Poincare {
            x[(4, mu)] = -form[mu];
        }
        x
    });
    let mut set = GeneratorSet { mode, v, m, sigma: 0.0 };
    // [M_01, V_0] = sigma * eta_00 * V_1 fixes the sign in every mode.
    let probe = bracket(&set.m[0][1], &set.v[0]);
    set.sigma = inner(&probe, &set.v[1]) / (form[0] * inner(&set.v[1], &set.v[1]));
    set
}

fn bracket(a: &Mat5, b: &Mat5) -> Mat5 {
    a * b - b * a
}

fn inner(a: &Mat5, b: &Mat5) -> f64 {
    a.component_mul(b).sum()
}

fn max_abs(m: &Mat5) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// Element of the Lie algebra in its 5x5 representation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AlgebraElement {
    pub mode: AlgebraMode,
    pub matrix: Mat5,
}

impl AlgebraElement {
    pub fn new(mode: AlgebraMode, matrix: Mat5) -> Self {
        Self { mode, matrix }
    }

    pub fn zero(mode: AlgebraMode) -> Self {
        Self {
            mode,
            matrix: Mat5::zeros(),
        }
    }
}

/// Matrix commutator; both elements must share a mode.
pub fn commutator(a: &AlgebraElement, b: &AlgebraElement) -> Result<AlgebraElement> {
    if a.mode != b.mode {
        return Err(Error::ModeMismatch(format!("{} vs {}", a.mode, b.mode)));
    }
    ensure_finite(a.matrix.as_slice(), "commutator operand")?;
    ensure_finite(b.matrix.as_slice(), "commutator operand")?;
    Ok(AlgebraElement::new(a.mode, bracket(&a.matrix, &b.matrix)))
}

/// Worst-case deviations from the structure relations.
#[derive(Clone, Debug, Serialize)]
pub struct AlgebraReport {
    pub mode: AlgebraMode,
    pub sigma: f64,
    pub vv_residual: f64,
    pub mv_residual: f64,
    pub mm_residual: f64,
    pub jacobi_residual: f64,
    pub decomposition_residual: f64,
    pub passed: bool,
}

pub const ALGEBRA_TOLERANCE: f64 = 1e-12;

/// Check every generator pair against the closed-form relations
/// `[V,V] = s M`, `[M_mn,V_r] = s(f_mr V_n - f_nr V_m)` and
/// `[M_mn,M_rs] = s(f_mr M_ns - f_ms M_nr - f_nr M_ms + f_ns M_mr)`,
/// plus the Jacobi identity over all basis triples.
pub fn verify_algebra(gens: &GeneratorSet) -> AlgebraReport {
    let s = gens.sigma;
    let f = gens.mode.spacetime_form();
    let (v, m) = (&gens.v, &gens.m);
    let mut vv = 0.0_f64;
    let mut mv = 0.0_f64;
    let mut mm = 0.0_f64;
    for mu in 0..4 {
        for nu in 0..4 {
            let expected = if gens.mode == AlgebraMode::Poincare {
                Mat5::zeros()
            } else {
                m[mu][nu] * s
            };
            vv = vv.max(max_abs(&(bracket(&v[mu], &v[nu]) - expected)));
            for rho in 0..4 {
                let exp = (v[nu] * f[mu] * kd(mu, rho) - v[mu] * f[nu] * kd(nu, rho)) * s;
                mv = mv.max(max_abs(&(bracket(&m[mu][nu], &v[rho]) - exp)));
                for sg in 0..4 {
                    let exp = (m[nu][sg] * (f[mu] * kd(mu, rho))
                        - m[nu][rho] * (f[mu] * kd(mu, sg))
                        - m[mu][sg] * (f[nu] * kd(nu, rho))
                        + m[mu][rho] * (f[nu] * kd(nu, sg)))
                        * s;
                    mm = mm.max(max_abs(&(bracket(&m[mu][nu], &m[rho][sg]) - exp)));
                }
            }
        }
    }
    let basis = gens.basis();
    let mut jac = 0.0_f64;
    for x in &basis {
        for y in &basis {
            for z in &basis {
                let j = bracket(x, &bracket(y, z)) + bracket(y, &bracket(z, x)) + bracket(z, &bracket(x, y));
                jac = jac.max(max_abs(&j));
            }
        }
    }
    let mut dec = 0.0_f64;
    for k in 0..16 {
        let g = std::array::from_fn(|i| ((k * 7 + i * 3) % 5) as f64 - 2.0);
        let h = Mat4::from_fn(|i, j| {
            if i == j {
                0.0
            } else {
                let sgn = if i < j { 1.0 } else { -1.0 };
                sgn * (((k + i * 5 + j * 11) % 7) as f64 - 3.0) * 0.25
            }
        });
        if let Ok(el) = compose_potential(gens, &g, &h) {
            match decompose_potential(gens, &el) {
                Ok((g2, h2)) => {
                    let dg = g.iter().zip(&g2).fold(0.0_f64, |a, (p, q)| a.max((p - q).abs()));
                    dec = dec.max(dg).max((h - h2).amax());
                }
                Err(_) => dec = f64::INFINITY,
            }
        }
    }
    let vv_ok = if gens.mode == AlgebraMode::Poincare {
        vv == 0.0
    } else {
        vv <= ALGEBRA_TOLERANCE
    };
    let passed = vv_ok
        && mv <= ALGEBRA_TOLERANCE
        && mm <= ALGEBRA_TOLERANCE
        && jac <= ALGEBRA_TOLERANCE
        && dec <= ALGEBRA_TOLERANCE
        && s.abs() == 1.0;
    AlgebraReport {
        mode: gens.mode,
        sigma: s,
        vv_residual: vv,
        mv_residual: mv,
        mm_residual: mm,
        jacobi_residual: jac,
        decomposition_residual: dec,
        passed,
    }
}

fn kd(a: usize, b: usize) -> f64 {
    if a == b {
        1.0
    } else {
        0.0
    }
}

/// Assemble `g_nu V^nu + h_{nu lambda} M^{nu lambda}` (full double sum).
pub fn compose_potential(gens: &GeneratorSet, g: &[f64; 4], h: &Mat4) -> Result<AlgebraElement> {
    ensure_finite(g, "potential components")?;
    ensure_finite(h.as_slice(), "potential components")?;
    let asym = (h + h.transpose()).amax();
    if asym > 1e-12 * (1.0 + h.amax()) {
        return Err(Error::InvalidInput(format!(
            "rotation block not antisymmetric ({asym:.3e})"
        )));
    }
    let mut x = Mat5::zeros();
    for nu in 0..4 {
        x += gens.v_up(nu) * g[nu];
        for la in 0..4 {
            if nu != la {
                x += gens.m_up(nu, la) * h[(nu, la)];
            }
        }
    }
    Ok(AlgebraElement::new(gens.mode, x))
}

/// Inverse of [`compose_potential`]; fails when the matrix leaves the span.
pub fn decompose_potential(gens: &GeneratorSet, x: &AlgebraElement) -> Result<([f64; 4], Mat4)> {
    if x.mode != gens.mode {
        return Err(Error::ModeMismatch(format!("{} vs {}", x.mode, gens.mode)));
    }
    ensure_finite(x.matrix.as_slice(), "algebra element")?;
    let f = gens.mode.spacetime_form();
    let g = std::array::from_fn(|nu| f[nu] * x.matrix[(nu, 4)]);
    let h = Mat4::from_fn(|a, b| if a == b { 0.0 } else { 0.5 * f[a] * x.matrix[(a, b)] });
    let rebuilt = compose_potential(gens, &g, &h)?;
    let residual = max_abs(&(rebuilt.matrix - x.matrix));
    if residual > 1e-12 * (1.0 + max_abs(&x.matrix)) {
        return Err(Error::NotInSpan { residual });
    }
    Ok((g, h))
}

/// Element of the group generated by one of the algebras.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GroupElement {
    pub mode: AlgebraMode,
    pub matrix: Mat5,
}

impl GroupElement {
    pub fn identity(mode: AlgebraMode) -> Self {
        Self {
            mode,
            matrix: Mat5::identity(),
        }
    }

    /// Inverse using the invariant form (no general inversion needed).
    pub fn inverse(&self) -> Self {
        let matrix = match self.mode.form5() {
            Some(f) => f * self.matrix.transpose() * f,
            None => {
                let eta = crate::tensor::eta_matrix();
                let l = self.matrix.fixed_view::<4, 4>(0, 0).into_owned();
                let t = self.matrix.fixed_view::<4, 1>(0, 4).into_owned();
                let linv = eta * l.transpose() * eta;
                let mut out = Mat5::identity();
                out.fixed_view_mut::<4, 4>(0, 0).copy_from(&linv);
                out.fixed_view_mut::<4, 1>(0, 4).copy_from(&(-linv * t));
                out
            }
        };
        Self {
            mode: self.mode,
            matrix,
        }
    }

    /// Deviation from the defining property of the group.
    pub fn form_residual(&self) -> f64 {
        match self.mode.form5() {
            Some(f) => max_abs(&(self.matrix.transpose() * f * self.matrix - f)),
            None => {
                let eta = crate::tensor::eta_matrix();
                let l = self.matrix.fixed_view::<4, 4>(0, 0).into_owned();
                let lorentz = (l.transpose() * eta * l - eta).amax();
                let last = (0..5)
                    .map(|j| (self.matrix[(4, j)] - kd(4, j)).abs())
                    .fold(0.0_f64, f64::max);
                lorentz.max(last)
            }
        }
    }

    /// Newton steps `U <- U (3 - f^-1 U^T f U) / 2` back onto the group manifold.
    pub fn projected(&self) -> Self {
        let Some(f) = self.mode.form5() else {
            let mut m = self.matrix;
            for j in 0..5 {
                m[(4, j)] = kd(4, j);
            }
            let mut l = GroupElement {
                mode: AlgebraMode::DeSitter,
                matrix: Mat5::identity(),
            };
            l.matrix
                .fixed_view_mut::<4, 4>(0, 0)
                .copy_from(&m.fixed_view::<4, 4>(0, 0));
            let l = l.projected();
            m.fixed_view_mut::<4, 4>(0, 0)
                .copy_from(&l.matrix.fixed_view::<4, 4>(0, 0));
            return Self {
                mode: self.mode,
                matrix: m,
            };
        };
        let mut m = self.matrix;
        for _ in 0..2 {
            let gram = f * m.transpose() * f * m;
            m = m * (Mat5::identity() * 3.0 - gram) * 0.5;
        }
        Self {
            mode: self.mode,
            matrix: m,
        }
    }

    pub fn compose(&self, other: &GroupElement) -> GroupElement {
        GroupElement {
            mode: self.mode,
            matrix: self.matrix * other.matrix,
        }
    }
}

/// Matrix exponential by scaling and squaring around a Taylor core.
pub fn exp_matrix(x: &Mat5, tolerance: f64) -> Mat5 {
    let norm = x.abs().row_sum().amax();
    let mut squarings = 0u32;
    if norm > 0.25 {
        squarings = (norm / 0.25).log2().ceil() as u32;
    }
    let y = x / 2f64.powi(squarings as i32);
    let local_tol = (tolerance / 2f64.powi(squarings as i32 + 1)).max(1e-18);
    let mut sum = Mat5::identity();
    let mut term = Mat5::identity();
    for k in 1..60 {
        term = term * y / k as f64;
        sum += term;
        let t = term.amax();
        if t <= local_tol * 1e-2 || t <= f64::EPSILON * 1e-3 {
            break;
        }
    }
    for _ in 0..squarings {
        sum = sum * sum;
    }
    sum
}

/// Exponential of an algebra element; the result respects the mode's form.
pub fn exp_map(x: &AlgebraElement, tolerance: f64) -> Result<GroupElement> {
    ensure_finite(x.matrix.as_slice(), "exp_map argument")?;
    if !(tolerance > 0.0) {
        return Err(Error::InvalidInput("tolerance must be positive".into()));
    }
    Ok(GroupElement {
        mode: x.mode,
        matrix: exp_matrix(&x.matrix, tolerance),
    }
    .projected())
}
