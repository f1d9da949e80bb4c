//! Test-particle motion: the geodesic equation of `G_{mu nu}` and the classic
//! weak-field observables.

use crate::error::{Error, Result};
use crate::field::{solve_spherical, Coordinates, SphericalSolution};
use crate::ode::{dopri_step, Dopri5, OdeOptions};
use crate::potential::PotentialField;
use crate::tensor::{Mat4, Point4, Tensor3};
use serde::Serialize;
use std::f64::consts::PI;

/// Position and affine velocity `u = dx/dtau`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GeodesicState {
    pub x: Point4,
    pub u: [f64; 4],
}

impl GeodesicState {
    fn pack(&self) -> [f64; 8] {
        let mut y = [0.0; 8];
        y[..4].copy_from_slice(&self.x);
        y[4..].copy_from_slice(&self.u);
        y
    }

    fn unpack(y: &[f64; 8]) -> Self {
        Self {
            x: [y[0], y[1], y[2], y[3]],
            u: [y[4], y[5], y[6], y[7]],
        }
    }

    /// `G_{mu nu} u^mu u^nu`.
    pub fn norm(&self, potential: &impl PotentialField) -> f64 {
        quad(&potential.g(&self.x), &self.u)
    }
}

fn quad(g: &Mat4, u: &[f64; 4]) -> f64 {
    (0..4)
        .map(|a| (0..4).map(|b| g[(a, b)] * u[a] * u[b]).sum::<f64>())
        .sum()
}

#[derive(Clone, Debug, Serialize)]
pub struct Trajectory {
    pub samples: Vec<(f64, GeodesicState)>,
    /// Largest `|G u.u - initial|` seen along the run.
    pub norm_drift: f64,
    /// Set when integration stopped early; the samples up to that point are kept.
    pub diagnostic: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeodesicOptions {
    pub tol: f64,
    /// Add the Euler-Lagrange force of the cubic `H u u u` Lagrangian term.
    pub torsion: bool,
    pub max_steps: usize,
}

impl Default for GeodesicOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            torsion: false,
            max_steps: 2_000_000,
        }
    }
}

impl GeodesicOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }

    fn ode(&self) -> OdeOptions {
        OdeOptions {
            max_steps: self.max_steps,
            h_min: 1e-15,
            ..OdeOptions::with_tol(self.tol)
        }
    }
}

fn inverse(g: &Mat4, x: &Point4) -> Result<Mat4> {
    let scale = g.amax();
    let inv = g.try_inverse().ok_or(Error::SingularMetric { location: *x })?;
    if !inv.iter().all(|v| v.is_finite()) || g.determinant().abs() < 1e-14 * scale.powi(4) {
        return Err(Error::SingularMetric { location: *x });
    }
    Ok(inv)
}

/// `Gamma^l_{mu rho} = 1/2 (G^-1)^{l nu} (d_rho G_{mu nu} + d_mu G_{rho nu} - d_nu G_{mu rho})`,
/// stored as `[(l, mu, rho)]`.
pub fn connection_coefficients(potential: &impl PotentialField, x: &Point4) -> Result<Tensor3> {
    let g = potential.g(x);
    let ginv = inverse(&g, x)?;
    let dg: [Mat4; 4] = std::array::from_fn(|m| potential.dg(x, m));
    let lower = Tensor3::from_fn(|n, m, r| 0.5 * (dg[r][(m, n)] + dg[m][(r, n)] - dg[n][(m, r)]));
    Ok(Tensor3::from_fn(|l, m, r| {
        (0..4).map(|n| ginv[(l, n)] * lower[(n, m, r)]).sum()
    }))
}

/// Euler-Lagrange force `d/dtau dL3/du^nu - dL3/dx^nu` of `L3 = H_{abc} u^a u^b u^c`,
/// holding `u` fixed. It vanishes identically for `H` antisymmetric in its last pair.
pub fn torsion_force(potential: &impl PotentialField, x: &Point4, u: &[f64; 4]) -> [f64; 4] {
    let dh: [Tensor3; 4] = std::array::from_fn(|m| potential.dh(x, m));
    let momentum = |h: &Tensor3, n: usize| -> f64 {
        let mut p = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                p += (h[(n, a, b)] + h[(a, n, b)] + h[(a, b, n)]) * u[a] * u[b];
            }
        }
        p
    };
    let cubic = |h: &Tensor3| -> f64 {
        let mut s = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    s += h[(a, b, c)] * u[a] * u[b] * u[c];
                }
            }
        }
        s
    };
    std::array::from_fn(|n| (0..4).map(|r| u[r] * momentum(&dh[r], n)).sum::<f64>() - cubic(&dh[n]))
}

fn acceleration(potential: &impl PotentialField, y: &[f64; 8], torsion: bool) -> Result<[f64; 8]> {
    let s = GeodesicState::unpack(y);
    let gamma = connection_coefficients(potential, &s.x)?;
    let mut out = [0.0; 8];
    out[..4].copy_from_slice(&s.u);
    for l in 0..4 {
        let mut a = 0.0;
        for m in 0..4 {
            for r in 0..4 {
                a -= gamma[(l, m, r)] * s.u[m] * s.u[r];
            }
        }
        out[4 + l] = a;
    }
    if torsion {
        let ginv = inverse(&potential.g(&s.x), &s.x)?;
        let f = torsion_force(potential, &s.x, &s.u);
        for l in 0..4 {
            out[4 + l] -= 0.5 * (0..4).map(|n| ginv[(l, n)] * f[n]).sum::<f64>();
        }
    }
    Ok(out)
}

/// Wraps the right-hand side so evaluation failures surface after the step.
struct Rhs<'a, P> {
    potential: &'a P,
    torsion: bool,
    failure: Option<Error>,
}

impl<P: PotentialField> Rhs<'_, P> {
    fn eval(&mut self, y: &[f64; 8]) -> [f64; 8] {
        match acceleration(self.potential, y, self.torsion) {
            Ok(v) => v,
            Err(e) => {
                self.failure.get_or_insert(e);
                [f64::NAN; 8]
            }
        }
    }
}

/// Integrate from `ic` over `tau_end` (either sign) with an adaptive 5(4) pair.
pub fn integrate_geodesic(
    ic: GeodesicState,
    potential: &impl PotentialField,
    tau_end: f64,
    opts: &GeodesicOptions,
) -> Result<Trajectory> {
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidInput(format!(
            "tolerance must be positive, got {}",
            opts.tol
        )));
    }
    crate::error::ensure_finite(&ic.pack(), "initial state")?;
    acceleration(potential, &ic.pack(), opts.torsion)?;
    let norm0 = ic.norm(potential);
    let mut rhs = Rhs {
        potential,
        torsion: opts.torsion,
        failure: None,
    };
    let cell = std::cell::RefCell::new(&mut rhs);
    let mut ode = Dopri5::new(
        |_, y: &[f64; 8]| cell.borrow_mut().eval(y),
        0.0,
        ic.pack(),
        tau_end,
        opts.ode(),
    );
    let mut samples = vec![(0.0, ic)];
    let mut drift = 0.0_f64;
    let mut diagnostic = None;
    while (tau_end - ode.t) * tau_end.signum() > 0.0 {
        match ode.step(tau_end) {
            Ok(_) => {
                if let Some(e) = cell.borrow_mut().failure.take() {
                    diagnostic = Some(e.to_string());
                    break;
                }
                let s = GeodesicState::unpack(&ode.y);
                drift = drift.max((s.norm(potential) - norm0).abs());
                samples.push((ode.t, s));
            }
            Err(e) => {
                let why = cell
                    .borrow_mut()
                    .failure
                    .take()
                    .map(|f| f.to_string())
                    .unwrap_or_else(|| e.to_string());
                diagnostic = Some(why);
                break;
            }
        }
    }
    Ok(Trajectory {
        samples,
        norm_drift: drift,
        diagnostic,
    })
}

fn equatorial(sol: &SphericalSolution, r: f64, phi: f64, ur: f64, uphi: f64, massive: bool) -> GeodesicState {
    let x = [0.0, r, PI / 2.0, phi];
    let g = sol.g(&x);
    let spatial = g[(1, 1)] * ur * ur + g[(3, 3)] * uphi * uphi;
    let ut = ((spatial + if massive { 1.0 } else { 0.0 }) / -g[(0, 0)]).sqrt();
    GeodesicState {
        x,
        u: [ut, ur, 0.0, uphi],
    }
}

/// Initial state at perihelion of a Newtonian ellipse in the spherical field.
pub fn perihelion_state(sol: &SphericalSolution, a: f64, e: f64) -> GeodesicState {
    let rp = a * (1.0 - e);
    let l = (sol.mass * a * (1.0 - e * e)).sqrt();
    equatorial(sol, rp, 0.0, 0.0, l / (rp * rp), true)
}

/// Successive perihelion angles and the mean advance per orbit.
#[derive(Clone, Debug, Serialize)]
pub struct PrecessionResult {
    pub perihelion_phi: Vec<f64>,
    pub perihelion_t: Vec<f64>,
    pub advance_per_orbit: f64,
    pub mean_period: f64,
    pub norm_drift: f64,
}

/// Mean apsidal advance (radians per orbit). Lengths in geometric units.
pub fn perihelion_precession(m_central: f64, a: f64, e: f64, n_orbits: usize, tol: f64) -> Result<PrecessionResult> {
    if !(0.0..1.0).contains(&e) {
        return Err(Error::Unbound { e });
    }
    if n_orbits < 3 {
        return Err(Error::InvalidInput(format!("need at least 3 orbits, got {n_orbits}")));
    }
    if !(m_central >= 0.0) || !(a > 0.0) {
        return Err(Error::InvalidInput(format!(
            "mass {m_central} and semi-major axis {a} must be positive"
        )));
    }
    if m_central == 0.0 {
        return Ok(PrecessionResult {
            perihelion_phi: (1..=n_orbits).map(|k| 2.0 * PI * k as f64).collect(),
            perihelion_t: vec![f64::INFINITY; n_orbits],
            advance_per_orbit: 0.0,
            mean_period: f64::INFINITY,
            norm_drift: 0.0,
        });
    }
    if a * (1.0 - e) < 20.0 * m_central {
        return Err(Error::Precondition(format!(
            "perihelion {} is not in the weak field",
            a * (1.0 - e)
        )));
    }
    // Work in units of a.
    let sol = solve_spherical(m_central / a, 1e-6, Coordinates::Spherical)?;
    let ic = perihelion_state(&sol, 1.0, e);
    let norm0 = ic.norm(&sol);
    let opts = GeodesicOptions::with_tol(tol);
    let mut rhs = Rhs {
        potential: &sol,
        torsion: false,
        failure: None,
    };
    let cell = std::cell::RefCell::new(&mut rhs);
    let mut f = |_: f64, y: &[f64; 8]| cell.borrow_mut().eval(y);
    let mut ode = Dopri5::new(&mut f, 0.0, ic.pack(), 1.0, opts.ode());
    let mut phis = Vec::with_capacity(n_orbits);
    let mut times = Vec::with_capacity(n_orbits);
    let mut drift = 0.0_f64;
    while phis.len() < n_orbits {
        let rec = ode.step(f64::INFINITY)?;
        if let Some(err) = cell.borrow_mut().failure.take() {
            return Err(err);
        }
        drift = drift.max((GeodesicState::unpack(&rec.y1).norm(&sol) - norm0).abs());
        if rec.y0[5] < 0.0 && rec.y1[5] >= 0.0 {
            // Quadratic model of u^r through the bracket for the first guess,
            // then Newton on exact single steps from the bracket start.
            let h = rec.t1 - rec.t0;
            let (u0, u1, a0) = (rec.y0[5], rec.y1[5], rec.f0[5]);
            let c = (u1 - u0 - a0 * h) / (h * h);
            let mut s = if c.abs() > 0.0 {
                let disc = (a0 * a0 - 4.0 * c * u0).max(0.0).sqrt();
                let cands = [(-a0 + disc) / (2.0 * c), (-a0 - disc) / (2.0 * c)];
                cands
                    .into_iter()
                    .filter(|v| (0.0..=h).contains(v))
                    .fold(-u0 / a0, |_, v| v)
            } else {
                -u0 / a0
            };
            let mut y = rec.y1;
            for _ in 0..20 {
                let (ys, fs, _) = dopri_step(&mut f_step(&sol), rec.t0, &rec.y0, &rec.f0, s);
                y = ys;
                let ds = ys[5] / fs[5];
                s -= ds;
                if ds.abs() < 1e-15 * h.max(1.0) {
                    let (ys, _, _) = dopri_step(&mut f_step(&sol), rec.t0, &rec.y0, &rec.f0, s);
                    y = ys;
                    break;
                }
            }
            phis.push(y[3]);
            times.push(y[0]);
        }
    }
    let mut prev = 0.0;
    let mut adv = 0.0;
    for &p in &phis {
        adv += p - prev - 2.0 * PI;
        prev = p;
    }
    let mut tprev = 0.0;
    let mut period = 0.0;
    for &t in &times {
        period += t - tprev;
        tprev = t;
    }
    Ok(PrecessionResult {
        perihelion_phi: phis,
        perihelion_t: times.iter().map(|t| t * a).collect(),
        advance_per_orbit: adv / n_orbits as f64,
        mean_period: period / n_orbits as f64 * a,
        norm_drift: drift,
    })
}

fn f_step(sol: &SphericalSolution) -> impl FnMut(f64, &[f64; 8]) -> [f64; 8] + '_ {
    move |_, y| acceleration(sol, y, false).unwrap_or([f64::NAN; 8])
}

/// Asymptotic bending angle of a null ray with impact parameter `b`.
pub fn light_deflection(m_central: f64, b: f64, tol: f64) -> Result<f64> {
    if !(m_central >= 0.0) || !(b > 0.0) {
        return Err(Error::InvalidInput(format!(
            "mass {m_central} and impact parameter {b} must be positive"
        )));
    }
    if m_central == 0.0 {
        return Ok(0.0);
    }
    if b <= 3.0 * m_central {
        return Err(Error::Captured { r: b });
    }
    // Units of b; start far out on the -x side moving along +x.
    let m = m_central / b;
    let sol = solve_spherical(m, 1e-12, Coordinates::Spherical)?;
    let d = 1000.0;
    let r0 = (d * d + 1.0_f64).sqrt();
    let phi0 = PI - (1.0 / d).atan();
    let gr = sol.g(&[0.0, r0, PI / 2.0, phi0])[(1, 1)];
    let ic = equatorial(&sol, r0, phi0, phi0.cos() / gr.sqrt(), -phi0.sin() / r0, false);
    let mut f = f_step(&sol);
    let mut ode = Dopri5::new(&mut f, 0.0, ic.pack(), 1.0, GeodesicOptions::with_tol(tol).ode());
    let mut turned = false;
    loop {
        let rec = ode.step(f64::INFINITY)?;
        let (r, ur) = (rec.y1[1], rec.y1[5]);
        if !r.is_finite() {
            return Err(Error::Integration("non-finite state during ray tracing".into()));
        }
        if r < 2.5 * m {
            return Err(Error::Captured { r: r * b });
        }
        turned |= ur > 0.0;
        if turned && r >= r0 {
            let phi = rec.y1[3];
            let uphi = rec.y1[7];
            let vx = ur * phi.cos() - r * uphi * phi.sin();
            let vy = ur * phi.sin() + r * uphi * phi.cos();
            return Ok(vy.atan2(vx).abs());
        }
    }
}

/// `nu_emit / nu_obs = sqrt(G_00(r_obs) / G_00(r_emit))`; `r_obs` may be infinite.
pub fn gravitational_redshift(m_central: f64, r_emit: f64, r_obs: f64) -> Result<f64> {
    if !(m_central >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "mass must be non-negative, got {m_central}"
        )));
    }
    for r in [r_emit, r_obs] {
        if !(r > 2.0 * m_central) {
            return Err(Error::InvalidInput(format!(
                "radius {r} is inside 2M = {}",
                2.0 * m_central
            )));
        }
    }
    let lapse = |r: f64| {
        if r.is_infinite() {
            1.0
        } else {
            1.0 - 2.0 * m_central / r
        }
    };
    Ok((lapse(r_obs) / lapse(r_emit)).sqrt())
}

/// `(G_rr, Schwarzschild g_rr, difference)` at radius `r`.
pub fn radial_potential_comparison(m: f64, r: f64) -> Result<(f64, f64, f64)> {
    if !(r > 2.0 * m) || !(m >= 0.0) {
        return Err(Error::InvalidInput(format!("need r > 2M >= 0, got M = {m}, r = {r}")));
    }
    let x = 2.0 * m / r;
    let ym = 1.0 + x;
    let gr = 1.0 / (1.0 - x);
    Ok((ym, gr, gr - ym))
}

/// Coordinate period of a circular orbit, measured by integration.
pub fn circular_orbit_period(m_central: f64, r: f64, tol: f64) -> Result<f64> {
    if !(m_central > 0.0) || !(r > 6.0 * m_central) {
        return Err(Error::InvalidInput(format!(
            "need r > 6M > 0, got M = {m_central}, r = {r}"
        )));
    }
    let sol = solve_spherical(m_central / r, 1e-6, Coordinates::Spherical)?;
    let omega = (m_central / r).sqrt();
    let g = sol.g(&[0.0, 1.0, PI / 2.0, 0.0]);
    let ut = (1.0 / (-g[(0, 0)] - g[(3, 3)] * omega * omega)).sqrt();
    let ic = GeodesicState {
        x: [0.0, 1.0, PI / 2.0, 0.0],
        u: [ut, 0.0, 0.0, omega * ut],
    };
    let mut f = f_step(&sol);
    let mut ode = Dopri5::new(&mut f, 0.0, ic.pack(), 1.0, GeodesicOptions::with_tol(tol).ode());
    loop {
        let rec = ode.step(f64::INFINITY)?;
        if rec.y1[3] >= 2.0 * PI {
            let mut s = (2.0 * PI - rec.y0[3]) / rec.f0[3];
            for _ in 0..20 {
                let (ys, fs, _) = dopri_step(&mut f_step(&sol), rec.t0, &rec.y0, &rec.f0, s);
                let ds = (ys[3] - 2.0 * PI) / fs[3];
                s -= ds;
                if ds.abs() < 1e-15 {
                    let (ys, _, _) = dopri_step(&mut f_step(&sol), rec.t0, &rec.y0, &rec.f0, s);
                    return Ok(ys[0] * r);
                }
            }
            return Err(Error::Integration("period root did not converge".into()));
        }
    }
}
