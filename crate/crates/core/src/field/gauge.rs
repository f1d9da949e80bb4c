//! Infinitesimal component gauge transformations.

use crate::error::Result;
use crate::potential::{fd_step, shift, PotentialField};
use crate::stencil::first_derivative_weights;
use crate::tensor::{Mat4, Point4, Tensor3, ETA};

/// Gauge parameters `xi_mu(x)` and antisymmetric `chi_ab(x)`.
pub trait GaugeParams: Send + Sync {
    fn xi(&self, x: &Point4) -> [f64; 4];

    fn chi(&self, x: &Point4) -> Mat4;

    fn dxi(&self, x: &Point4, mu: usize) -> [f64; 4] {
        let step = fd_step(x, mu);
        let mut out = [0.0; 4];
        for &(k, w) in first_derivative_weights(6) {
            let v = self.xi(&shift(x, mu, k as f64 * step));
            for (o, vi) in out.iter_mut().zip(v) {
                *o += w * vi / step;
            }
        }
        out
    }

    fn dchi(&self, x: &Point4, mu: usize) -> Mat4 {
        let step = fd_step(x, mu);
        first_derivative_weights(6).iter().fold(Mat4::zeros(), |acc, &(k, w)| {
            acc + self.chi(&shift(x, mu, k as f64 * step)) * w
        }) / step
    }
}

/// `P + lambda * delta P`, with
///
/// `dG_{mu nu} = d_mu xi_nu + chi_{nu c} G_mu^c - H_{mu nu c} xi^c`
///
/// `dH_{mu a b} = d_mu chi_ab + G_{mu a} xi_b - G_{mu b} xi_a - eta^{rs}(H_{mu a r} chi_{s b} - H_{mu b r} chi_{s a})`.
///
/// Derivatives of the transformed potential use finite differences.
pub struct GaugeTransformed<P, Q> {
    pub potential: P,
    pub params: Q,
    pub lambda: f64,
}

/// Apply an infinitesimal gauge transformation of strength `lambda`.
pub fn gauge_transform<P: PotentialField, Q: GaugeParams>(
    potential: P,
    params: Q,
    lambda: f64,
) -> GaugeTransformed<P, Q> {
    GaugeTransformed {
        potential,
        params,
        lambda,
    }
}

impl<P: PotentialField, Q: GaugeParams> GaugeTransformed<P, Q> {
    /// The first-order variations `(dG, dH)` at `x`.
    pub fn variation(&self, x: &Point4) -> (Mat4, Tensor3) {
        let g = self.potential.g(x);
        let h = self.potential.h(x);
        let xi = self.params.xi(x);
        let chi = self.params.chi(x);
        let dxi: [[f64; 4]; 4] = std::array::from_fn(|m| self.params.dxi(x, m));
        let dchi: [Mat4; 4] = std::array::from_fn(|m| self.params.dchi(x, m));
        let dg = Mat4::from_fn(|m, n| {
            let mut v = dxi[m][n];
            for c in 0..4 {
                v += ETA[c] * (chi[(n, c)] * g[(m, c)] - h[(m, n, c)] * xi[c]);
            }
            v
        });
        let dh = Tensor3::from_fn(|m, a, b| {
            let mut v = dchi[m][(a, b)] + g[(m, a)] * xi[b] - g[(m, b)] * xi[a];
            for r in 0..4 {
                v -= ETA[r] * (h[(m, a, r)] * chi[(r, b)] - h[(m, b, r)] * chi[(r, a)]);
            }
            v
        });
        (dg, dh)
    }
}

impl<P: PotentialField, Q: GaugeParams> PotentialField for GaugeTransformed<P, Q> {
    fn g(&self, x: &Point4) -> Mat4 {
        self.potential.g(x) + self.variation(x).0 * self.lambda
    }

    fn h(&self, x: &Point4) -> Tensor3 {
        self.potential.h(x) + self.variation(x).1 * self.lambda
    }

    fn validate_point(&self, x: &Point4, reach: f64) -> Result<()> {
        self.potential.validate_point(x, reach)
    }
}

impl<Q: GaugeParams + ?Sized> GaugeParams for &Q {
    fn xi(&self, x: &Point4) -> [f64; 4] {
        (**self).xi(x)
    }
    fn chi(&self, x: &Point4) -> Mat4 {
        (**self).chi(x)
    }
    fn dxi(&self, x: &Point4, mu: usize) -> [f64; 4] {
        (**self).dxi(x, mu)
    }
    fn dchi(&self, x: &Point4, mu: usize) -> Mat4 {
        (**self).dchi(x, mu)
    }
}
