//! First post-Newtonian field of a system of point masses.
//!
//! Potentials are sums over bodies. Each body's own contribution is excluded
//! when a potential is evaluated at that body's position. The field is stored as
//! `h = (G - eta)/2`.

use crate::error::{Error, Result};
use crate::potential::PotentialField;
use crate::tensor::{eta_matrix, Mat4, Point4};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub type Vec3 = [f64; 3];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Body {
    pub mass: f64,
    pub position: Vec3,
    pub velocity: Vec3,
}

impl Body {
    pub fn new(mass: f64, position: Vec3, velocity: Vec3) -> Result<Self> {
        let b = Self {
            mass,
            position,
            velocity,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        crate::error::ensure_finite(&[self.mass], "body mass")?;
        crate::error::ensure_finite(&self.position, "body position")?;
        crate::error::ensure_finite(&self.velocity, "body velocity")?;
        if self.mass <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "body mass must be positive, got {}",
                self.mass
            )));
        }
        if dot(&self.velocity, &self.velocity) >= 1.0 {
            return Err(Error::InvalidInput("body speed must be below c".into()));
        }
        Ok(())
    }

    fn speed2(&self) -> f64 {
        dot(&self.velocity, &self.velocity)
    }
}

fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Distance and unit vector from body to field point.
fn separation(body: &Body, x: &Vec3) -> (f64, Vec3) {
    let d = [
        x[0] - body.position[0],
        x[1] - body.position[1],
        x[2] - body.position[2],
    ];
    let r = dot(&d, &d).sqrt();
    (r, [d[0] / r, d[1] / r, d[2] / r])
}

fn check(bodies: &[Body], x: &Vec3) -> Result<()> {
    crate::error::ensure_finite(x, "field point")?;
    for (i, b) in bodies.iter().enumerate() {
        b.validate()?;
        if b.position == *x {
            return Err(Error::Coincident(i));
        }
    }
    Ok(())
}

/// `U = sum m_a / |x - x_a|`.
pub fn newtonian_potential(bodies: &[Body], x: &Vec3) -> Result<f64> {
    check(bodies, x)?;
    Ok(bodies.iter().map(|b| b.mass / separation(b, x).0).sum())
}

/// `U` at body `a` from all other bodies.
pub fn external_potential(bodies: &[Body], a: usize) -> f64 {
    let xa = bodies[a].position;
    bodies
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != a)
        .map(|(_, b)| b.mass / separation(b, &xa).0)
        .sum()
}

/// `V_j = sum m_a v_aj / |x - x_a|`.
pub fn vector_potential(bodies: &[Body], x: &Vec3) -> Result<Vec3> {
    check(bodies, x)?;
    let mut v = [0.0; 3];
    for b in bodies {
        let r = separation(b, x).0;
        for j in 0..3 {
            v[j] += b.mass * b.velocity[j] / r;
        }
    }
    Ok(v)
}

/// `Psi = sum m_a (v_a^2 + U_{-a}(x_a)) / |x - x_a|` and
/// `Phi = sum m_a ((n.v_a)^2 - v_a^2) / |x - x_a|`.
pub fn psi_phi_potentials(bodies: &[Body], x: &Vec3) -> Result<(f64, f64)> {
    check(bodies, x)?;
    let (mut psi, mut phi) = (0.0, 0.0);
    for (a, b) in bodies.iter().enumerate() {
        let (r, n) = separation(b, x);
        let nv = dot(&n, &b.velocity);
        psi += b.mass * (b.speed2() + external_potential(bodies, a)) / r;
        phi += b.mass * (nv * nv - b.speed2()) / r;
    }
    Ok((psi, phi))
}

/// `chi = sum m_a |x - x_a|`.
pub fn gauge_function(bodies: &[Body], x: &Vec3) -> Result<f64> {
    check(bodies, x)?;
    Ok(bodies.iter().map(|b| b.mass * separation(b, x).0).sum())
}

/// Second derivatives of `chi` for bodies in uniform motion: `(d0 d0 chi, d0 dj chi, di dj chi)`.
/// Body accelerations are neglected.
pub fn gauge_hessian(bodies: &[Body], x: &Vec3) -> Result<(f64, Vec3, [[f64; 3]; 3])> {
    check(bodies, x)?;
    let (mut tt, mut tj, mut ij) = (0.0, [0.0; 3], [[0.0; 3]; 3]);
    for b in bodies {
        let (r, n) = separation(b, x);
        let nv = dot(&n, &b.velocity);
        tt += b.mass * (b.speed2() - nv * nv) / r;
        for j in 0..3 {
            tj[j] += b.mass * (-b.velocity[j] + n[j] * nv) / r;
            for i in 0..3 {
                let kron = if i == j { 1.0 } else { 0.0 };
                ij[i][j] += b.mass * (kron - n[i] * n[j]) / r;
            }
        }
    }
    Ok((tt, tj, ij))
}

/// Epsilon orders to which each block is trusted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderTags {
    pub h00: u32,
    pub h0j: u32,
    pub hij: u32,
}

pub const PN_ORDERS: OrderTags = OrderTags { h00: 4, h0j: 3, hij: 2 };

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PNField {
    pub h00: f64,
    pub h0j: Vec3,
    pub hij: [[f64; 3]; 3],
    pub order_tags: OrderTags,
}

impl PNField {
    /// `G = eta + 2 h`.
    pub fn metric(&self) -> Mat4 {
        let mut g = eta_matrix();
        g[(0, 0)] += 2.0 * self.h00;
        for j in 0..3 {
            g[(0, j + 1)] += 2.0 * self.h0j[j];
            g[(j + 1, 0)] += 2.0 * self.h0j[j];
            for i in 0..3 {
                g[(i + 1, j + 1)] += 2.0 * self.hij[i][j];
            }
        }
        g
    }

    pub fn max_abs_diff(&self, other: &PNField) -> f64 {
        let mut d = (self.h00 - other.h00).abs();
        for j in 0..3 {
            d = d.max((self.h0j[j] - other.h0j[j]).abs());
            for i in 0..3 {
                d = d.max((self.hij[i][j] - other.hij[i][j]).abs());
            }
        }
        d
    }
}

/// Field before the gauge transformation: `h00 = U + 2 Psi + Phi`,
/// `h0j = -sum m (v_j + (n.v) n_j)/r`, `hij = sum m n_i n_j / r`.
pub fn pre_gauge_field(bodies: &[Body], x: &Vec3) -> Result<PNField> {
    let u = newtonian_potential(bodies, x)?;
    let (psi, phi) = psi_phi_potentials(bodies, x)?;
    let (mut h0j, mut hij) = ([0.0; 3], [[0.0; 3]; 3]);
    for b in bodies {
        let (r, n) = separation(b, x);
        let nv = dot(&n, &b.velocity);
        for j in 0..3 {
            h0j[j] -= b.mass * (b.velocity[j] + nv * n[j]) / r;
            for i in 0..3 {
                hij[i][j] += b.mass * (n[i] * n[j]) / r;
            }
        }
    }
    Ok(PNField {
        h00: u + 2.0 * psi + phi,
        h0j,
        hij,
        order_tags: PN_ORDERS,
    })
}

/// The gauge-fixed 1PN field `h_mu_nu -> h_mu_nu + d_mu d_nu chi`, which gives
/// `h00 = U + 2 Psi`, `h0j = -2 V_j`, `hij = delta_ij U`.
pub fn assemble_1pn_field(bodies: &[Body], x: &Vec3) -> Result<PNField> {
    let pre = pre_gauge_field(bodies, x)?;
    let (tt, tj, ij) = gauge_hessian(bodies, x)?;
    let mut out = pre;
    out.h00 += tt;
    for j in 0..3 {
        out.h0j[j] += tj[j];
        for i in 0..3 {
            out.hij[i][j] += ij[i][j];
        }
    }
    Ok(out)
}

/// Closed form `(U + 2 Psi, -2 V, delta U)` built directly from the potentials.
pub fn closed_form_1pn_field(bodies: &[Body], x: &Vec3) -> Result<PNField> {
    let u = newtonian_potential(bodies, x)?;
    let (psi, _) = psi_phi_potentials(bodies, x)?;
    let v = vector_potential(bodies, x)?;
    let mut hij = [[0.0; 3]; 3];
    for (i, row) in hij.iter_mut().enumerate() {
        row[i] = u;
    }
    Ok(PNField {
        h00: u + 2.0 * psi,
        h0j: [-2.0 * v[0], -2.0 * v[1], -2.0 * v[2]],
        hij,
        order_tags: PN_ORDERS,
    })
}

/// The displayed two-body `G_mu_nu`: `-1 + 2U + 2Psi`, `-2 V_j`, `delta_ij (1 + 2U)`,
/// with `Psi` written as its explicit two-body double sum.
pub fn displayed_two_body_metric(bodies: &[Body], x: &Vec3) -> Result<Mat4> {
    check(bodies, x)?;
    let mut u = 0.0;
    let mut psi = 0.0;
    let mut v = [0.0; 3];
    for (a, ba) in bodies.iter().enumerate() {
        let ra = separation(ba, x).0;
        u += ba.mass / ra;
        psi += ba.mass * ba.speed2() / ra;
        for (b, bb) in bodies.iter().enumerate() {
            if a != b {
                psi += (ba.mass / ra) * (bb.mass / separation(bb, &ba.position).0);
            }
        }
        for j in 0..3 {
            v[j] += ba.mass * ba.velocity[j] / ra;
        }
    }
    let mut g = eta_matrix();
    g[(0, 0)] = -1.0 + 2.0 * u + 2.0 * psi;
    for j in 0..3 {
        g[(0, j + 1)] = -2.0 * v[j];
        g[(j + 1, 0)] = -2.0 * v[j];
        g[(j + 1, j + 1)] = 1.0 + 2.0 * u;
    }
    Ok(g)
}

/// Instantaneous iteration of the integral equation, starting from `h = 0`.
///
/// Iteration `k+1` sources `h00` with `m_a (1 + 2 v_a^2 + 2 h00^(k)_{-a}(x_a))`, the
/// gauge-fixed form of the boosted dust tensor plus the field felt by each body;
/// `h0j = -2 V` and `hij = delta U^(k+1)` use the same gauge.
pub fn iterate_integral_field(bodies: &[Body], points: &[Vec3], iterations: usize) -> Result<Vec<PNField>> {
    if iterations == 0 {
        return Err(Error::InvalidInput("at least one iteration is required".into()));
    }
    for x in points {
        check(bodies, x)?;
    }
    // h00 felt by each body from the others, per iteration.
    let mut felt = vec![0.0; bodies.len()];
    for _ in 1..iterations {
        felt = (0..bodies.len())
            .map(|a| {
                let xa = bodies[a].position;
                bodies
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != a)
                    .map(|(i, b)| b.mass * (1.0 + 2.0 * b.speed2() + 2.0 * felt[i]) / separation(b, &xa).0)
                    .sum()
            })
            .collect();
    }
    points
        .par_iter()
        .map(|x| {
            let mut h00 = 0.0;
            let mut u = 0.0;
            for (i, b) in bodies.iter().enumerate() {
                let r = separation(b, x).0;
                h00 += b.mass * (1.0 + 2.0 * b.speed2() + 2.0 * felt[i]) / r;
                u += b.mass / r;
            }
            let v = vector_potential(bodies, x)?;
            let mut hij = [[0.0; 3]; 3];
            for (i, row) in hij.iter_mut().enumerate() {
                row[i] = u;
            }
            Ok(PNField {
                h00,
                h0j: [-2.0 * v[0], -2.0 * v[1], -2.0 * v[2]],
                hij,
                order_tags: PN_ORDERS,
            })
        })
        .collect()
}

/// Relation between the areal radius `r` and the isotropic radius `r_bar`.
pub fn r_from_isotropic(m: f64, r_bar: f64) -> f64 {
    r_bar * (1.0 + m / (2.0 * r_bar)).powi(2)
}

/// Inverse of [`r_from_isotropic`] on the outer branch.
pub fn isotropic_from_r(m: f64, r: f64) -> f64 {
    0.5 * (r - m + (r * r - 2.0 * m * r).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IsotropicComparison {
    /// `x - 2 x^2` with `x = M / r_bar`, as displayed.
    pub ym_series: f64,
    /// `M / r(r_bar)`: the spherical solution's `h00` after the change of radius.
    pub ym_exact: f64,
    /// `(1 - ((1 - x/2)/(1 + x/2))^2) / 2` from the isotropic Schwarzschild metric.
    pub gr_exact: f64,
    /// `gr_exact - ym_series`.
    pub difference: f64,
}

/// Compare `h00` in isotropic coordinates.
pub fn isotropic_comparison(m: f64, r_bar: f64) -> Result<IsotropicComparison> {
    if !(r_bar > m / 2.0) || !(m >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "need r_bar > M/2 >= 0, got M = {m}, r_bar = {r_bar}"
        )));
    }
    let x = m / r_bar;
    let ym_series = x - 2.0 * x * x;
    let ym_exact = m / r_from_isotropic(m, r_bar);
    // (1 - L)(1 + L)/2 with the lapse L = (1 - x/2)/(1 + x/2), avoiding cancellation.
    let lapse = (1.0 - x / 2.0) / (1.0 + x / 2.0);
    let gr_exact = 0.5 * (x / (1.0 + x / 2.0)) * (1.0 + lapse);
    Ok(IsotropicComparison {
        ym_series,
        ym_exact,
        gr_exact,
        difference: gr_exact - ym_series,
    })
}

/// The assembled field as a potential, with bodies moving uniformly from their
/// positions at `t = 0`.
#[derive(Clone, Debug)]
pub struct PnPotential {
    pub bodies: Vec<Body>,
}

impl PnPotential {
    fn at(&self, t: f64) -> Vec<Body> {
        self.bodies
            .iter()
            .map(|b| Body {
                position: std::array::from_fn(|k| b.position[k] + b.velocity[k] * t),
                ..*b
            })
            .collect()
    }
}

impl PotentialField for PnPotential {
    fn g(&self, x: &Point4) -> Mat4 {
        assemble_1pn_field(&self.at(x[0]), &[x[1], x[2], x[3]])
            .map(|f| f.metric())
            .unwrap_or_else(|_| Mat4::from_element(f64::NAN))
    }
}
