//! Potential fields `G_{mu nu}(x)`, `H_{mu nu lambda}(x)` and matrix connections.

use crate::algebra::{build_generators, AlgebraMode, GeneratorSet, Mat5};
use crate::error::Result;
use crate::stencil::first_derivative_weights;
use crate::tensor::{eta_matrix, Mat4, Point4, Tensor3};

/// Gravitational potentials on the bookkeeping coordinates.
///
/// Derivatives default to sixth-order central differences; analytic
/// implementations should override them.
pub trait PotentialField: Send + Sync {
    fn g(&self, x: &Point4) -> Mat4;

    fn h(&self, _x: &Point4) -> Tensor3 {
        Tensor3::zero()
    }

    fn dg(&self, x: &Point4, mu: usize) -> Mat4 {
        let step = fd_step(x, mu);
        first_derivative_weights(6).iter().fold(Mat4::zeros(), |acc, &(k, w)| {
            acc + self.g(&shift(x, mu, k as f64 * step)) * w
        }) / step
    }

    fn dh(&self, x: &Point4, mu: usize) -> Tensor3 {
        let step = fd_step(x, mu);
        first_derivative_weights(6)
            .iter()
            .fold(Tensor3::zero(), |acc, &(k, w)| {
                acc + self.h(&shift(x, mu, k as f64 * step)) * w
            })
            * (1.0 / step)
    }

    /// Reject evaluation points whose surrounding stencil of radius `reach`
    /// leaves the domain on which the potential is defined.
    fn validate_point(&self, _x: &Point4, _reach: f64) -> Result<()> {
        Ok(())
    }
}

pub(crate) fn fd_step(x: &Point4, mu: usize) -> f64 {
    1e-3 * (1.0 + x[mu].abs())
}

pub fn shift(x: &Point4, mu: usize, d: f64) -> Point4 {
    let mut y = *x;
    y[mu] += d;
    y
}

impl<P: PotentialField + ?Sized> PotentialField for &P {
    fn g(&self, x: &Point4) -> Mat4 {
        (**self).g(x)
    }
    fn h(&self, x: &Point4) -> Tensor3 {
        (**self).h(x)
    }
    fn dg(&self, x: &Point4, mu: usize) -> Mat4 {
        (**self).dg(x, mu)
    }
    fn dh(&self, x: &Point4, mu: usize) -> Tensor3 {
        (**self).dh(x, mu)
    }
    fn validate_point(&self, x: &Point4, reach: f64) -> Result<()> {
        (**self).validate_point(x, reach)
    }
}

/// Flat background `G = eta`, `H = 0`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Minkowski;

impl PotentialField for Minkowski {
    fn g(&self, _x: &Point4) -> Mat4 {
        eta_matrix()
    }
    fn dg(&self, _x: &Point4, _mu: usize) -> Mat4 {
        Mat4::zeros()
    }
    fn dh(&self, _x: &Point4, _mu: usize) -> Tensor3 {
        Tensor3::zero()
    }
}

/// Potential given by closures; derivatives fall back to finite differences.
pub struct FnPotential<G, H>
where
    G: Fn(&Point4) -> Mat4 + Send + Sync,
    H: Fn(&Point4) -> Tensor3 + Send + Sync,
{
    pub g: G,
    pub h: H,
}

impl<G, H> PotentialField for FnPotential<G, H>
where
    G: Fn(&Point4) -> Mat4 + Send + Sync,
    H: Fn(&Point4) -> Tensor3 + Send + Sync,
{
    fn g(&self, x: &Point4) -> Mat4 {
        (self.g)(x)
    }
    fn h(&self, x: &Point4) -> Tensor3 {
        (self.h)(x)
    }
}

/// A matrix-valued gauge connection `A_a(x)` in one algebra mode.
pub trait ConnectionField: Send + Sync {
    fn mode(&self) -> AlgebraMode;

    fn connection(&self, x: &Point4, a: usize) -> Mat5;

    fn connection_derivative(&self, x: &Point4, a: usize, b: usize) -> Mat5 {
        let step = fd_step(x, b);
        first_derivative_weights(6).iter().fold(Mat5::zeros(), |acc, &(k, w)| {
            acc + self.connection(&shift(x, b, k as f64 * step), a) * w
        }) / step
    }

    /// `F_ab = d_a A_b - d_b A_a + [A_a, A_b]`.
    fn curvature(&self, x: &Point4, a: usize, b: usize) -> Mat5 {
        let (aa, ab) = (self.connection(x, a), self.connection(x, b));
        self.connection_derivative(x, b, a) - self.connection_derivative(x, a, b) + aa * ab - ab * aa
    }
}

/// Connection `A_mu = G_{mu nu} V^nu - 1/2 H_{mu nu lambda} M^{nu lambda}` built from a
/// potential. The factor -1/2 gives the component field strengths their standard form.
pub struct ComponentConnection<P: PotentialField> {
    pub potential: P,
    pub gens: GeneratorSet,
}

impl<P: PotentialField> ComponentConnection<P> {
    pub fn new(potential: P, mode: AlgebraMode) -> Self {
        Self {
            potential,
            gens: build_generators(mode),
        }
    }

    fn assemble(&self, g: &Mat4, h: &Tensor3, a: usize) -> Mat5 {
        connection_matrix(&self.gens, g, h, a)
    }
}

/// `G_{a nu} V^nu - 1/2 H_{a nu lambda} M^{nu lambda}` for one direction `a`.
pub fn connection_matrix(gens: &GeneratorSet, g: &Mat4, h: &Tensor3, a: usize) -> Mat5 {
    let mut x = Mat5::zeros();
    for nu in 0..4 {
        x += gens.v_up(nu) * g[(a, nu)];
        for la in 0..4 {
            if nu != la {
                x -= gens.m_up(nu, la) * (0.5 * h[(a, nu, la)]);
            }
        }
    }
    x
}

impl<P: PotentialField> ConnectionField for ComponentConnection<P> {
    fn mode(&self) -> AlgebraMode {
        self.gens.mode
    }

    fn connection(&self, x: &Point4, a: usize) -> Mat5 {
        self.assemble(&self.potential.g(x), &self.potential.h(x), a)
    }

    fn connection_derivative(&self, x: &Point4, a: usize, b: usize) -> Mat5 {
        self.assemble(&self.potential.dg(x, b), &self.potential.dh(x, b), a)
    }
}
