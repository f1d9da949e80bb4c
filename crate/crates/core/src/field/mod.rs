//! Component field strengths and field equations of the SO(4,1) theory.
//!
//! Indices are raised with `eta = diag(-1,1,1,1)`. The connection is
//! `A_mu = G_{mu nu} V^nu - 1/2 H_{mu nu lambda} M^{nu lambda}`; with that
//! normalisation `F_mu_nu = E_{mu nu lambda} V^lambda - 1/2 F_{mu nu a b} M^{ab}`.

mod fixtures;
mod gauge;
mod grid;
mod spherical;

pub use fixtures::{SmoothGauge, SmoothPotential, SmoothSource};
pub use gauge::{gauge_transform, GaugeParams, GaugeTransformed};
pub use grid::{grid_field_residual, GridPotential, GridSource, GridSpec};
pub use spherical::{
    harmonic_refinement, harmonic_residuals, solve_spherical, Coordinates, HarmonicResiduals, SphericalSolution,
};

use crate::algebra::{build_generators, decompose_potential, AlgebraElement, AlgebraMode, GeneratorSet, Mat5};
use crate::error::{Error, Result};
use crate::potential::{connection_matrix, shift, PotentialField};
use crate::stencil::{first_derivative_weights, supported_first_order, Stencil};
use crate::tensor::{Mat4, Point4, Tensor3, Tensor4, ETA};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// How the constant `eta.eta` commutator of a flat background is treated.
///
/// With `G = eta` the momentum generators do not commute, so the literal
/// field strength of flat space is `F_{mu nu a b} = eta_{mu a} eta_{nu b} - eta_{mu b} eta_{nu a}`.
/// `VacuumSubtracted` removes that constant so that flat space is an exact vacuum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Background {
    Literal,
    #[default]
    VacuumSubtracted,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldOptions {
    pub background: Background,
    /// Stencil for the outer divergence in the field and continuity equations.
    pub stencil: Stencil,
}

impl Default for FieldOptions {
    fn default() -> Self {
        Self {
            background: Background::default(),
            stencil: Stencil::new(1e-3, 6),
        }
    }
}

impl FieldOptions {
    pub fn literal() -> Self {
        Self {
            background: Background::Literal,
            ..Self::default()
        }
    }
}

/// Sources `T_{nu lambda}` and `S_{nu a b}`.
pub trait SourceField: Send + Sync {
    fn t(&self, x: &Point4) -> Mat4;

    fn s(&self, _x: &Point4) -> Tensor3 {
        Tensor3::zero()
    }
}

/// No matter at all.
#[derive(Clone, Copy, Debug, Default)]
pub struct NoSource;

impl SourceField for NoSource {
    fn t(&self, _x: &Point4) -> Mat4 {
        Mat4::zeros()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldStrengths {
    pub e: Tensor3,
    pub f: Tensor4,
}

impl FieldStrengths {
    /// Worst violation of the antisymmetries of `E` and `F`.
    pub fn antisymmetry_residual(&self) -> f64 {
        let mut worst = 0.0_f64;
        for m in 0..4 {
            for n in 0..4 {
                for l in 0..4 {
                    worst = worst.max((self.e[(m, n, l)] + self.e[(n, m, l)]).abs());
                    for k in 0..4 {
                        worst = worst.max((self.f[(m, n, l, k)] + self.f[(n, m, l, k)]).abs());
                        worst = worst.max((self.f[(m, n, l, k)] + self.f[(m, n, k, l)]).abs());
                    }
                }
            }
        }
        worst
    }
}

fn check_potential(g: &Mat4, h: &Tensor3, x: &Point4) -> Result<()> {
    if !g.iter().all(|v| v.is_finite()) || !h.is_finite() {
        return Err(Error::NonFinite(format!("potential at {x:?}")));
    }
    let asym = h.last_pair_asymmetry();
    if asym > 1e-12 * (1.0 + h.max_abs()) {
        return Err(Error::InvalidInput(format!(
            "H not antisymmetric in its last pair at {x:?} ({asym:.2e})"
        )));
    }
    Ok(())
}

/// `E` and `F` from the potentials and their first derivatives.
pub fn strengths_from_parts(
    g: &Mat4,
    h: &Tensor3,
    dg: &[Mat4; 4],
    dh: &[Tensor3; 4],
    background: Background,
) -> FieldStrengths {
    let eta = |a: usize, b: usize| if a == b { ETA[a] } else { 0.0 };
    let mut e = Tensor3::zero();
    for m in 0..4 {
        for n in 0..4 {
            for l in 0..4 {
                let mut v = dg[m][(n, l)] - dg[n][(m, l)];
                for s in 0..4 {
                    let es = ETA[s];
                    v += es
                        * (g[(m, l)] * h[(n, s, s)] - g[(m, s)] * h[(n, s, l)] - g[(n, l)] * h[(m, s, s)]
                            + g[(n, s)] * h[(m, s, l)]);
                }
                e[(m, n, l)] = v;
            }
        }
    }
    // Phi: the four displayed terms coincide under antisymmetry of H; one copy is kept.
    let phi = |m: usize, n: usize, a: usize, b: usize| -> f64 {
        let mut acc = 0.0;
        for s in 0..4 {
            acc += ETA[s]
                * (h[(m, s, a)] * h[(n, s, b)] - h[(m, a, s)] * h[(n, s, b)] - h[(m, s, a)] * h[(n, b, s)]
                    + h[(m, a, s)] * h[(n, b, s)]);
        }
        0.25 * acc
    };
    let f = Tensor4::from_fn(|m, n, a, b| {
        let mut v = dh[m][(n, a, b)] - dh[n][(m, a, b)] + g[(m, a)] * g[(n, b)] - g[(m, b)] * g[(n, a)];
        if background == Background::VacuumSubtracted {
            v -= eta(m, a) * eta(n, b) - eta(m, b) * eta(n, a);
        }
        v + phi(m, n, a, b) - phi(m, n, b, a)
    });
    FieldStrengths { e, f }
}

fn gather(potential: &impl PotentialField, x: &Point4) -> Result<(Mat4, Tensor3, [Mat4; 4], [Tensor3; 4])> {
    let g = potential.g(x);
    let h = potential.h(x);
    check_potential(&g, &h, x)?;
    let dg = std::array::from_fn(|m| potential.dg(x, m));
    let dh = std::array::from_fn(|m| potential.dh(x, m));
    Ok((g, h, dg, dh))
}

/// Field strengths of a potential at one point.
pub fn field_strength(potential: &impl PotentialField, x: &Point4, background: Background) -> Result<FieldStrengths> {
    potential.validate_point(x, 0.0)?;
    let (g, h, dg, dh) = gather(potential, x)?;
    Ok(strengths_from_parts(&g, &h, &dg, &dh, background))
}

/// Residuals of the V-part (rank 2) and M-part (rank 3) of `D^mu F_{mu nu} = 8 pi J_nu`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldResidual {
    pub rank2: Mat4,
    pub rank3: Tensor3,
}

impl FieldResidual {
    pub fn max_abs(&self) -> f64 {
        self.rank2.amax().max(self.rank3.max_abs())
    }
}

fn check_stencil(opts: &FieldOptions) -> Result<()> {
    if !supported_first_order(opts.stencil.order) || !(opts.stencil.h > 0.0) {
        return Err(Error::InvalidInput(format!("unsupported stencil {:?}", opts.stencil)));
    }
    Ok(())
}

fn divergence_of_strengths(
    potential: &impl PotentialField,
    x: &Point4,
    opts: &FieldOptions,
) -> Result<(Mat4, Tensor3)> {
    let st = opts.stencil;
    let mut div_e = Mat4::zeros();
    let mut div_f = Tensor3::zero();
    for m in 0..4 {
        for &(k, w) in first_derivative_weights(st.order) {
            let xs = shift(x, m, k as f64 * st.h);
            let fs = field_strength(potential, &xs, opts.background)?;
            let c = ETA[m] * w / st.h;
            for n in 0..4 {
                for l in 0..4 {
                    div_e[(n, l)] += c * fs.e[(m, n, l)];
                    for b in 0..4 {
                        div_f[(n, l, b)] += c * fs.f[(m, n, l, b)];
                    }
                }
            }
        }
    }
    Ok((div_e, div_f))
}

/// Gauge-covariant field equations in component form:
///
/// rank 2: `d^mu E_{mu nu l} + eta^{sr}(E_{mu nu r} H^mu_{s l} - G^mu_r F_{mu nu s l}) - 8 pi T_{nu l}`
///
/// rank 3: `d^mu F_{mu nu a b} + G^mu_a E_{mu nu b} - G^mu_b E_{mu nu a} - (Z_ab - Z_ba) - 8 pi S_{nu a b}`
/// with `Z_ab = eta^{rs} H^mu_{a r} F_{mu nu s b}`.
pub fn field_equation_residual(
    potential: &impl PotentialField,
    source: &impl SourceField,
    x: &Point4,
    opts: &FieldOptions,
) -> Result<FieldResidual> {
    check_stencil(opts)?;
    potential.validate_point(x, opts.stencil.h * opts.stencil.reach() as f64)?;
    let (div_e, div_f) = divergence_of_strengths(potential, x, opts)?;
    let (g, h, dg, dh) = gather(potential, x)?;
    let fs = strengths_from_parts(&g, &h, &dg, &dh, opts.background);
    let (t, s) = (source.t(x), source.s(x));
    let mut rank2 = Mat4::zeros();
    for n in 0..4 {
        for l in 0..4 {
            let mut v = div_e[(n, l)];
            for m in 0..4 {
                for sg in 0..4 {
                    let w = ETA[m] * ETA[sg];
                    v += w * (fs.e[(m, n, sg)] * h[(m, sg, l)] - g[(m, sg)] * fs.f[(m, n, sg, l)]);
                }
            }
            rank2[(n, l)] = v - 8.0 * PI * t[(n, l)];
        }
    }
    let z = |n: usize, a: usize, b: usize| -> f64 {
        let mut acc = 0.0;
        for m in 0..4 {
            for r in 0..4 {
                acc += ETA[m] * ETA[r] * h[(m, a, r)] * fs.f[(m, n, r, b)];
            }
        }
        acc
    };
    let rank3 = Tensor3::from_fn(|n, a, b| {
        let mut v = div_f[(n, a, b)];
        for m in 0..4 {
            v += ETA[m] * (g[(m, a)] * fs.e[(m, n, b)] - g[(m, b)] * fs.e[(m, n, a)]);
        }
        v - (z(n, a, b) - z(n, b, a)) - 8.0 * PI * s[(n, a, b)]
    });
    Ok(FieldResidual { rank2, rank3 })
}

/// Residuals of the covariant continuity equations `D^mu J_mu = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContinuityResidual {
    pub rank1: [f64; 4],
    pub rank2: Mat4,
}

impl ContinuityResidual {
    pub fn max_abs(&self) -> f64 {
        self.rank1.iter().fold(self.rank2.amax(), |m, v| m.max(v.abs()))
    }
}

/// rank 1: `d^mu T_{mu l} + eta^{sr}(T_{mu r} H^mu_{s l} - G^mu_r S_{mu s l})`;
/// rank 2: `d^mu S_{mu a b} + G^mu_a T_{mu b} - G^mu_b T_{mu a} - (Z'_ab - Z'_ba)`.
pub fn continuity_residual(
    potential: &impl PotentialField,
    source: &impl SourceField,
    x: &Point4,
    opts: &FieldOptions,
) -> Result<ContinuityResidual> {
    check_stencil(opts)?;
    potential.validate_point(x, 0.0)?;
    let st = opts.stencil;
    let g = potential.g(x);
    let h = potential.h(x);
    check_potential(&g, &h, x)?;
    let (t, s) = (source.t(x), source.s(x));
    let mut div_t = [0.0; 4];
    let mut div_s = Mat4::zeros();
    for m in 0..4 {
        for &(k, w) in first_derivative_weights(st.order) {
            let xs = shift(x, m, k as f64 * st.h);
            let (ts, ss) = (source.t(&xs), source.s(&xs));
            let c = ETA[m] * w / st.h;
            for l in 0..4 {
                div_t[l] += c * ts[(m, l)];
                for b in 0..4 {
                    div_s[(l, b)] += c * ss[(m, l, b)];
                }
            }
        }
    }
    let mut rank1 = [0.0; 4];
    for (l, out) in rank1.iter_mut().enumerate() {
        let mut v = div_t[l];
        for m in 0..4 {
            for sg in 0..4 {
                v += ETA[m] * ETA[sg] * (t[(m, sg)] * h[(m, sg, l)] - g[(m, sg)] * s[(m, sg, l)]);
            }
        }
        *out = v;
    }
    let z = |a: usize, b: usize| -> f64 {
        let mut acc = 0.0;
        for m in 0..4 {
            for r in 0..4 {
                acc += ETA[m] * ETA[r] * h[(m, a, r)] * s[(m, r, b)];
            }
        }
        acc
    };
    let rank2 = Mat4::from_fn(|a, b| {
        let mut v = div_s[(a, b)];
        for m in 0..4 {
            v += ETA[m] * (g[(m, a)] * t[(m, b)] - g[(m, b)] * t[(m, a)]);
        }
        v - (z(a, b) - z(b, a))
    });
    Ok(ContinuityResidual { rank1, rank2 })
}

/// Largest gap between the full rank-2 residual and the Abelian operator
/// `d^mu(d_mu G_{nu l} - d_nu G_{mu l}) - 8 pi T_{nu l}`. Requires `H = 0`, `S = 0`.
pub fn abelian_limit_check(
    potential: &impl PotentialField,
    source: &impl SourceField,
    x: &Point4,
    opts: &FieldOptions,
) -> Result<f64> {
    let st = opts.stencil;
    for m in 0..4 {
        for &(k, _) in first_derivative_weights(st.order) {
            let xs = shift(x, m, k as f64 * st.h);
            if potential.h(&xs).max_abs() != 0.0 || source.s(&xs).max_abs() != 0.0 {
                return Err(Error::Precondition("Abelian limit needs H = 0 and S = 0".into()));
            }
        }
    }
    let full = field_equation_residual(potential, source, x, opts)?;
    let mut abelian = Mat4::zeros();
    let t = source.t(x);
    for m in 0..4 {
        for &(k, w) in first_derivative_weights(st.order) {
            let xs = shift(x, m, k as f64 * st.h);
            let dg: [Mat4; 4] = std::array::from_fn(|q| potential.dg(&xs, q));
            let c = ETA[m] * w / st.h;
            for n in 0..4 {
                for l in 0..4 {
                    abelian[(n, l)] += c * (dg[m][(n, l)] - dg[n][(m, l)]);
                }
            }
        }
    }
    abelian -= t * (8.0 * PI);
    Ok((full.rank2 - abelian).amax())
}

/// The same quantities computed from 5x5 matrices, used as an independent route.
pub mod matrix_route {
    use super::*;

    fn gens() -> GeneratorSet {
        build_generators(AlgebraMode::DeSitter)
    }

    fn connection(gs: &GeneratorSet, p: &impl PotentialField, x: &Point4, mu: usize) -> Mat5 {
        connection_matrix(gs, &p.g(x), &p.h(x), mu)
    }

    fn d_connection(gs: &GeneratorSet, p: &impl PotentialField, x: &Point4, mu: usize, along: usize) -> Mat5 {
        connection_matrix(gs, &p.dg(x, along), &p.dh(x, along), mu)
    }

    fn vacuum(gs: &GeneratorSet, m: usize, n: usize, background: Background) -> Mat5 {
        match background {
            Background::Literal => Mat5::zeros(),
            Background::VacuumSubtracted => gs.v[m] * gs.v[n] - gs.v[n] * gs.v[m],
        }
    }

    /// `F_mn = d_m A_n - d_n A_m + [A_m, A_n]` as matrices.
    pub fn curvature(p: &impl PotentialField, x: &Point4, background: Background) -> [[Mat5; 4]; 4] {
        let gs = gens();
        let a: [Mat5; 4] = std::array::from_fn(|m| connection(&gs, p, x, m));
        std::array::from_fn(|m| {
            std::array::from_fn(|n| {
                d_connection(&gs, p, x, n, m) - d_connection(&gs, p, x, m, n) + a[m] * a[n]
                    - a[n] * a[m]
                    - vacuum(&gs, m, n, background)
            })
        })
    }

    /// Split a matrix into `(x_l, y_ab)` with `X = x_l V^l - 1/2 y_ab M^ab`.
    pub fn split(m: &Mat5) -> Result<([f64; 4], Mat4)> {
        let (g, h) = decompose_potential(&gens(), &AlgebraElement::new(AlgebraMode::DeSitter, *m))?;
        Ok((g, h * -2.0))
    }

    pub fn strengths(p: &impl PotentialField, x: &Point4, background: Background) -> Result<FieldStrengths> {
        let f = curvature(p, x, background);
        let mut e = Tensor3::zero();
        let mut ff = Tensor4::zero();
        for m in 0..4 {
            for n in 0..4 {
                let (v, r) = split(&f[m][n])?;
                for a in 0..4 {
                    e[(m, n, a)] = v[a];
                    for b in 0..4 {
                        ff[(m, n, a, b)] = r[(a, b)];
                    }
                }
            }
        }
        Ok(FieldStrengths { e, f: ff })
    }

    /// `D^mu F_{mu nu} - 8 pi J_nu`, split into components.
    pub fn field_residual(
        p: &impl PotentialField,
        src: &impl SourceField,
        x: &Point4,
        opts: &FieldOptions,
    ) -> Result<FieldResidual> {
        let gs = gens();
        let st = opts.stencil;
        let f0 = curvature(p, x, opts.background);
        let a: [Mat5; 4] = std::array::from_fn(|m| connection(&gs, p, x, m));
        let (t, s) = (src.t(x), src.s(x));
        let mut rank2 = Mat4::zeros();
        let mut rank3 = Tensor3::zero();
        for n in 0..4 {
            let mut d = Mat5::zeros();
            for m in 0..4 {
                let mut df = Mat5::zeros();
                for &(k, w) in first_derivative_weights(st.order) {
                    df += curvature(p, &shift(x, m, k as f64 * st.h), opts.background)[m][n] * (w / st.h);
                }
                d += (df + a[m] * f0[m][n] - f0[m][n] * a[m]) * ETA[m];
            }
            let srow = s.slot(n);
            let j = connection_matrix(&gs, &t, &Tensor3::from_fn(|_, a, b| srow[(a, b)]), n);
            let (v, r) = split(&(d - j * (8.0 * PI)))?;
            for l in 0..4 {
                rank2[(n, l)] = v[l];
                for b in 0..4 {
                    rank3[(n, l, b)] = r[(l, b)];
                }
            }
        }
        Ok(FieldResidual { rank2, rank3 })
    }

    /// `D^mu J_mu` split into components.
    pub fn continuity(
        p: &impl PotentialField,
        src: &impl SourceField,
        x: &Point4,
        opts: &FieldOptions,
    ) -> Result<ContinuityResidual> {
        let gs = gens();
        let st = opts.stencil;
        let current = |y: &Point4, m: usize| -> Mat5 {
            let srow = src.s(y).slot(m);
            connection_matrix(&gs, &src.t(y), &Tensor3::from_fn(|_, a, b| srow[(a, b)]), m)
        };
        let mut d = Mat5::zeros();
        for m in 0..4 {
            let mut dj = Mat5::zeros();
            for &(k, w) in first_derivative_weights(st.order) {
                dj += current(&shift(x, m, k as f64 * st.h), m) * (w / st.h);
            }
            let am = connection(&gs, p, x, m);
            let jm = current(x, m);
            d += (dj + am * jm - jm * am) * ETA[m];
        }
        let (v, r) = split(&d)?;
        Ok(ContinuityResidual { rank1: v, rank2: r })
    }
}
