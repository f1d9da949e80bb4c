//! The static, spherically symmetric linearized solution.

use crate::error::{Error, Result};
use crate::lattice::fit_slope;
use crate::potential::PotentialField;
use crate::stencil::second_derivative_weights;
use crate::tensor::{Mat4, Point4, Tensor3};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Coordinates {
    /// `(t, r, theta, phi)`.
    Spherical,
    /// `(t, x, y, z)`, with `G_ij = delta_ij + (2M/r) n_i n_j`.
    Cartesian,
}

/// `G_00 = -(1 - 2M/r)`, `G_rr = 1 + 2M/r`, flat angular part, `H = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SphericalSolution {
    pub mass: f64,
    pub r_min: f64,
    pub coords: Coordinates,
}

/// Build the spherical solution. `mass = 0` gives flat space.
pub fn solve_spherical(mass: f64, r_min: f64, coords: Coordinates) -> Result<SphericalSolution> {
    if !mass.is_finite() || mass < 0.0 {
        return Err(Error::InvalidInput(format!(
            "mass must be finite and non-negative, got {mass}"
        )));
    }
    if !r_min.is_finite() || r_min <= 0.0 {
        return Err(Error::InvalidInput(format!("r_min must be positive, got {r_min}")));
    }
    Ok(SphericalSolution { mass, r_min, coords })
}

impl SphericalSolution {
    pub fn g00(&self, r: f64) -> f64 {
        -(1.0 - 2.0 * self.mass / r)
    }

    pub fn grr(&self, r: f64) -> f64 {
        1.0 + 2.0 * self.mass / r
    }

    /// Areal radius of an evaluation point.
    pub fn radius(&self, x: &Point4) -> f64 {
        match self.coords {
            Coordinates::Spherical => x[1],
            Coordinates::Cartesian => (x[1] * x[1] + x[2] * x[2] + x[3] * x[3]).sqrt(),
        }
    }
}

impl PotentialField for SphericalSolution {
    fn g(&self, x: &Point4) -> Mat4 {
        let m = self.mass;
        match self.coords {
            Coordinates::Spherical => {
                let (r, th) = (x[1], x[2]);
                Mat4::from_diagonal(&nalgebra::Vector4::new(
                    self.g00(r),
                    self.grr(r),
                    r * r,
                    (r * th.sin()).powi(2),
                ))
            }
            Coordinates::Cartesian => {
                let r = self.radius(x);
                let mut g = Mat4::identity();
                g[(0, 0)] = self.g00(r);
                for i in 1..4 {
                    for j in 1..4 {
                        g[(i, j)] += 2.0 * m * x[i] * x[j] / r.powi(3);
                    }
                }
                g
            }
        }
    }

    fn h(&self, _x: &Point4) -> Tensor3 {
        Tensor3::zero()
    }

    fn dg(&self, x: &Point4, mu: usize) -> Mat4 {
        let m = self.mass;
        let mut d = Mat4::zeros();
        if mu == 0 {
            return d;
        }
        match self.coords {
            Coordinates::Spherical => {
                let (r, th) = (x[1], x[2]);
                match mu {
                    1 => {
                        d[(0, 0)] = -2.0 * m / (r * r);
                        d[(1, 1)] = -2.0 * m / (r * r);
                        d[(2, 2)] = 2.0 * r;
                        d[(3, 3)] = 2.0 * r * th.sin().powi(2);
                    }
                    2 => d[(3, 3)] = 2.0 * r * r * th.sin() * th.cos(),
                    _ => {}
                }
            }
            Coordinates::Cartesian => {
                let r = self.radius(x);
                let (r3, r5) = (r.powi(3), r.powi(5));
                d[(0, 0)] = -2.0 * m * x[mu] / r3;
                for i in 1..4 {
                    for j in 1..4 {
                        let kron = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
                        d[(i, j)] = 2.0 * m * (kron(i, mu) * x[j] + kron(j, mu) * x[i]) / r3
                            - 6.0 * m * x[i] * x[j] * x[mu] / r5;
                    }
                }
            }
        }
        d
    }

    fn dh(&self, _x: &Point4, _mu: usize) -> Tensor3 {
        Tensor3::zero()
    }

    fn validate_point(&self, x: &Point4, reach: f64) -> Result<()> {
        let r = self.radius(x);
        if r - reach < self.r_min {
            return Err(Error::OutOfRange(format!(
                "r = {r} with stencil reach {reach} enters r < r_min = {}",
                self.r_min
            )));
        }
        Ok(())
    }
}

/// Flat-space Laplacians of `G_00` and `G_rr = n^i n^j G_ij` at one point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HarmonicResiduals {
    pub h: f64,
    pub lap_g00: f64,
    pub lap_grr: f64,
}

/// Evaluate both harmonic-gauge vacuum residuals with a 3-D Cartesian stencil of
/// spacing `h` and order 2, 4 or 6 around `point`.
pub fn harmonic_residuals(sol: &SphericalSolution, point: [f64; 3], h: f64, order: usize) -> Result<HarmonicResiduals> {
    if !matches!(order, 2 | 4 | 6) || !(h > 0.0) {
        return Err(Error::InvalidInput(format!(
            "unsupported Laplacian stencil (h = {h}, order = {order})"
        )));
    }
    let cart = SphericalSolution {
        coords: Coordinates::Cartesian,
        ..*sol
    };
    let weights = second_derivative_weights(order);
    let reach = weights.iter().map(|&(k, _)| k.unsigned_abs()).max().unwrap_or(0) as f64 * h;
    let x0 = [0.0, point[0], point[1], point[2]];
    cart.validate_point(&x0, reach)?;
    let (mut l00, mut lrr) = (0.0, 0.0);
    for axis in 1..4 {
        for &(k, w) in weights {
            let mut x = x0;
            x[axis] += k as f64 * h;
            let g = cart.g(&x);
            let r = cart.radius(&x);
            let mut grr = 0.0;
            for i in 1..4 {
                for j in 1..4 {
                    grr += x[i] * x[j] * g[(i, j)];
                }
            }
            l00 += w * g[(0, 0)];
            lrr += w * grr / (r * r);
        }
    }
    Ok(HarmonicResiduals {
        h,
        lap_g00: l00 / (h * h),
        lap_grr: lrr / (h * h),
    })
}

/// Refinement study over the given spacings; returns the rows and the fitted
/// orders of `|lap G_00|` and `|lap G_rr|` against `h`.
pub fn harmonic_refinement(
    sol: &SphericalSolution,
    point: [f64; 3],
    spacings: &[f64],
    order: usize,
) -> Result<(Vec<HarmonicResiduals>, f64, f64)> {
    if spacings.len() < 2 {
        return Err(Error::InvalidInput("refinement needs at least two spacings".into()));
    }
    let rows = spacings
        .iter()
        .map(|&h| harmonic_residuals(sol, point, h, order))
        .collect::<Result<Vec<_>>>()?;
    let lh: Vec<f64> = rows.iter().map(|r| r.h.ln()).collect();
    let l0: Vec<f64> = rows.iter().map(|r| r.lap_g00.abs().ln()).collect();
    let l1: Vec<f64> = rows.iter().map(|r| r.lap_grr.abs().ln()).collect();
    Ok((rows, fit_slope(&lh, &l0), fit_slope(&lh, &l1)))
}
