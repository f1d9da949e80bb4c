//! Quadrupole radiation from binaries and the orbital period decay.
//!
//! Internal quantities are geometric (`G = c = 1`, lengths in metres).
//! `KeplerBinary` keeps SI inputs and converts at the boundary.

use crate::error::{Error, Result};
use crate::post_newtonian::{Body, Vec3};
use crate::stencil::{second_derivative_weights, THIRD_DERIVATIVE_7PT};
use crate::units::{C_SI, G_SI};
use nalgebra::{Matrix3, Rotation3, Vector3};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub type Mat3 = Matrix3<f64>;

/// Samples per orbit below which third derivatives are not trusted.
pub const MIN_SAMPLES_PER_ORBIT: usize = 64;
const PAD: usize = 3;

/// `q_ij = sum m x_i x_j`.
pub fn quadrupole_moment(bodies: &[Body]) -> Mat3 {
    bodies.iter().fold(Mat3::zeros(), |acc, b| {
        let x = Vector3::from(b.position);
        acc + x * x.transpose() * b.mass
    })
}

/// Trace-free part `Q = q - (tr q / 3) I`.
pub fn reduced(q: &Mat3) -> Mat3 {
    q - Mat3::identity() * (q.trace() / 3.0)
}

/// Pulsar binary with SI inputs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KeplerBinary {
    /// kg
    pub m_p: f64,
    /// kg
    pub m_c: f64,
    /// s
    pub p_b: f64,
    pub e: f64,
}

impl KeplerBinary {
    pub fn validate(&self) -> Result<()> {
        crate::error::ensure_finite(&[self.m_p, self.m_c, self.p_b, self.e], "binary parameters")?;
        if !(0.0..1.0).contains(&self.e) {
            return Err(Error::Unbound { e: self.e });
        }
        if self.m_p <= 0.0 || self.m_c <= 0.0 || self.p_b <= 0.0 {
            return Err(Error::InvalidInput("masses and period must be positive".into()));
        }
        Ok(())
    }

    /// `(m_p, m_c, P_b)` in metres.
    pub fn geometric(&self) -> (f64, f64, f64) {
        let k = G_SI / (C_SI * C_SI);
        (self.m_p * k, self.m_c * k, self.p_b * C_SI)
    }

    /// Semi-major axis from Kepler's third law, metres.
    pub fn semi_major_axis(&self) -> f64 {
        let (mp, mc, pb) = self.geometric();
        ((mp + mc) * (pb / (2.0 * PI)).powi(2)).cbrt()
    }
}

/// `(1 + 73 e^2/24 + 37 e^4/96) / (1 - e^2)^{7/2}`.
pub fn eccentricity_enhancement(e: f64) -> f64 {
    let e2 = e * e;
    (1.0 + 73.0 * e2 / 24.0 + 37.0 * e2 * e2 / 96.0) / (1.0 - e2).powf(3.5)
}

/// Dimensionless period derivative, evaluated with explicit SI `G` and `c`.
pub fn orbital_speedup(b: &KeplerBinary) -> Result<f64> {
    b.validate()?;
    Ok(-(192.0 * PI / 5.0)
        * G_SI.powf(5.0 / 3.0)
        * C_SI.powi(-5)
        * (b.p_b / (2.0 * PI)).powf(-5.0 / 3.0)
        * eccentricity_enhancement(b.e)
        * b.m_p
        * b.m_c
        * (b.m_p + b.m_c).powf(-1.0 / 3.0))
}

/// Period derivative implied by a (geometric, dimensionless) power `de_dt` via
/// `E = -m_p m_c / 2a` and Kepler's third law: `Pdot = -(3/2) P Edot / E`.
pub fn speedup_from_energy_loss(b: &KeplerBinary, de_dt: f64) -> Result<f64> {
    b.validate()?;
    let (mp, mc, pb) = b.geometric();
    let energy = -mp * mc / (2.0 * b.semi_major_axis());
    Ok(-1.5 * pb * de_dt / energy)
}

/// Pointwise Peters-Matthews power `-(8/15) mu^2 m^2 (12 v^2 - 11 rdot^2) / r^4`.
pub fn peters_matthews_power(m1: f64, m2: f64, r: f64, v: f64, rdot: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::InvalidInput(format!("separation must be positive, got {r}")));
    }
    let m = m1 + m2;
    let mu = m1 * m2 / m;
    Ok(-(8.0 / 15.0) * mu * mu * m * m * (12.0 * v * v - 11.0 * rdot * rdot) / r.powi(4))
}

/// Orbit average of the closed form: `-(32/5) mu^2 m^3 / a^5 * enhancement(e)`.
pub fn peters_matthews_average_closed(m1: f64, m2: f64, a: f64, e: f64) -> f64 {
    let m = m1 + m2;
    let mu = m1 * m2 / m;
    -(32.0 / 5.0) * mu * mu * m.powi(3) / a.powi(5) * eccentricity_enhancement(e)
}

/// Solve Kepler's equation `E - e sin E = M`.
pub fn eccentric_anomaly(mean: f64, e: f64) -> f64 {
    let mut ea = if e < 0.8 { mean } else { PI };
    for _ in 0..60 {
        let d = (ea - e * ea.sin() - mean) / (1.0 - e * ea.cos());
        ea -= d;
        if d.abs() < 1e-15 {
            break;
        }
    }
    ea
}

/// Relative separation vector and velocity at mean anomaly `mean`.
fn kepler_relative(m: f64, a: f64, e: f64, mean: f64) -> (Vec3, Vec3) {
    let n = (m / a.powi(3)).sqrt();
    let ea = eccentric_anomaly(mean, e);
    let bsemi = a * (1.0 - e * e).sqrt();
    let edot = n / (1.0 - e * ea.cos());
    (
        [a * (ea.cos() - e), bsemi * ea.sin(), 0.0],
        [-a * ea.sin() * edot, bsemi * ea.cos() * edot, 0.0],
    )
}

/// Orbit average of the pointwise Peters-Matthews power, sampled uniformly in time.
pub fn peters_matthews_average(m1: f64, m2: f64, a: f64, e: f64, samples: usize) -> Result<f64> {
    if samples == 0 || !(0.0..1.0).contains(&e) {
        return Err(Error::InvalidInput("need samples > 0 and 0 <= e < 1".into()));
    }
    let m = m1 + m2;
    let mut acc = 0.0;
    for k in 0..samples {
        let (x, v) = kepler_relative(m, a, e, 2.0 * PI * k as f64 / samples as f64);
        let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
        let rdot = (x[0] * v[0] + x[1] * v[1]) / r;
        acc += peters_matthews_power(m1, m2, r, (v[0] * v[0] + v[1] * v[1]).sqrt(), rdot)?;
    }
    Ok(acc / samples as f64)
}

/// Two-body trajectory sampled uniformly in time.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BinaryTrajectory {
    pub masses: [f64; 2],
    pub times: Vec<f64>,
    pub positions: Vec<[Vec3; 2]>,
    pub velocities: Vec<[Vec3; 2]>,
    /// Orbital period if the trajectory is periodic.
    pub period: Option<f64>,
}

/// Orientation and bulk motion of a generated Kepler orbit.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct OrbitFrame {
    /// Euler angles (roll, pitch, yaw) of the orbital plane.
    pub angles: [f64; 3],
    pub com_position: Vec3,
    pub com_velocity: Vec3,
}

impl BinaryTrajectory {
    /// Analytic Kepler orbit over `orbits` periods with `per_orbit` samples each,
    /// plus three padding samples on either side for the derivative stencils.
    pub fn kepler(
        m1: f64,
        m2: f64,
        a: f64,
        e: f64,
        per_orbit: usize,
        orbits: usize,
        frame: OrbitFrame,
    ) -> Result<Self> {
        if !(0.0..1.0).contains(&e) {
            return Err(Error::Unbound { e });
        }
        if !(m1 > 0.0 && m2 > 0.0 && a > 0.0) || per_orbit == 0 || orbits == 0 {
            return Err(Error::InvalidInput(
                "masses, axis and sample counts must be positive".into(),
            ));
        }
        let m = m1 + m2;
        let period = 2.0 * PI * (a.powi(3) / m).sqrt();
        let dt = period / per_orbit as f64;
        let rot = Rotation3::from_euler_angles(frame.angles[0], frame.angles[1], frame.angles[2]);
        let n = per_orbit * orbits + 2 * PAD + 1;
        let mut out = Self {
            masses: [m1, m2],
            times: vec![],
            positions: vec![],
            velocities: vec![],
            period: Some(period),
        };
        for k in 0..n {
            let t = (k as f64 - PAD as f64) * dt;
            let (x, v) = kepler_relative(m, a, e, 2.0 * PI * t / period);
            let (x, v) = (rot * Vector3::from(x), rot * Vector3::from(v));
            let com = Vector3::from(frame.com_position) + Vector3::from(frame.com_velocity) * t;
            let vc = Vector3::from(frame.com_velocity);
            let p1 = com - x * (m2 / m);
            let p2 = com + x * (m1 / m);
            let v1 = vc - v * (m2 / m);
            let v2 = vc + v * (m1 / m);
            out.times.push(t);
            out.positions.push([p1.into(), p2.into()]);
            out.velocities.push([v1.into(), v2.into()]);
        }
        Ok(out)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn bodies(&self, k: usize) -> [Body; 2] {
        std::array::from_fn(|i| Body {
            mass: self.masses[i],
            position: self.positions[k][i],
            velocity: self.velocities[k][i],
        })
    }

    fn step(&self) -> Result<f64> {
        if self.times.len() < 2 * PAD + 2 {
            return Err(Error::InvalidInput(format!(
                "trajectory has only {} samples",
                self.times.len()
            )));
        }
        let dt = self.times[1] - self.times[0];
        if !(dt > 0.0) {
            return Err(Error::InvalidInput("sample times must increase".into()));
        }
        for w in self.times.windows(2) {
            if ((w[1] - w[0]) - dt).abs() > 1e-9 * dt {
                return Err(Error::InvalidInput("trajectory must be sampled uniformly".into()));
            }
        }
        if let Some(p) = self.period {
            if p / dt < MIN_SAMPLES_PER_ORBIT as f64 - 1e-9 {
                return Err(Error::InvalidInput(format!(
                    "{:.1} samples per orbit; at least {MIN_SAMPLES_PER_ORBIT} are needed",
                    p / dt
                )));
            }
        }
        Ok(dt)
    }
}

/// Moments along a trajectory.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuadrupoleSeries {
    pub times: Vec<f64>,
    pub q: Vec<Mat3>,
    pub reduced: Vec<Mat3>,
}

impl QuadrupoleSeries {
    pub fn from_trajectory(traj: &BinaryTrajectory) -> Self {
        let q: Vec<Mat3> = (0..traj.len()).map(|k| quadrupole_moment(&traj.bodies(k))).collect();
        let reduced = q.iter().map(reduced).collect();
        Self {
            times: traj.times.clone(),
            q,
            reduced,
        }
    }

    /// Largest `|tr Q|` over the samples.
    pub fn max_trace(&self) -> f64 {
        self.reduced.iter().map(|m| m.trace().abs()).fold(0.0, f64::max)
    }
}

fn third_derivative(series: &[Mat3], k: usize, dt: f64) -> Mat3 {
    THIRD_DERIVATIVE_7PT.iter().fold(Mat3::zeros(), |acc, &(o, w)| {
        acc + series[(k as i64 + o as i64) as usize] * w
    }) / dt.powi(3)
}

/// Averaged numeric power and the per-sample values it came from.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NumericPower {
    pub times: Vec<f64>,
    pub power: Vec<f64>,
    pub average: f64,
}

/// `dE/dt = -(1/5) Q'''_jk Q'''_jk` on every interior sample, averaged over the
/// interior (an integer number of orbits for generated Kepler trajectories).
pub fn radiated_power_numeric(traj: &BinaryTrajectory) -> Result<NumericPower> {
    let dt = traj.step()?;
    let series = QuadrupoleSeries::from_trajectory(traj);
    let range = PAD..traj.len() - PAD;
    let mut times = Vec::with_capacity(range.len());
    let mut power = Vec::with_capacity(range.len());
    for k in range {
        let d3 = third_derivative(&series.reduced, k, dt);
        times.push(traj.times[k]);
        power.push(-0.2 * d3.component_mul(&d3).sum());
    }
    // Closed sample set: the last interior sample repeats the first orbit phase.
    let n = power.len() - 1;
    let average = power[..n].iter().sum::<f64>() / n as f64;
    Ok(NumericPower { times, power, average })
}

/// Rates of the monopole and dipole moments, and the quadrupole power for scale.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MomentRates {
    /// `max |d/dt sum m|`.
    pub monopole_rate: f64,
    /// `max |d^2/dt^2 sum m x|`, the source of dipole radiation.
    pub dipole_rate: f64,
    /// `|sum m x|` at the first sample.
    pub dipole_initial: f64,
    /// Orbit-averaged quadrupole power.
    pub quadrupole_power: f64,
    /// `mu a omega^2`-type acceleration scale for judging `dipole_rate`.
    pub dipole_scale: f64,
}

pub fn moment_content(traj: &BinaryTrajectory) -> Result<MomentRates> {
    let dt = traj.step()?;
    let mass: Vec<f64> = (0..traj.len())
        .map(|k| traj.bodies(k).iter().map(|b| b.mass).sum())
        .collect();
    let dipole: Vec<Vector3<f64>> = (0..traj.len())
        .map(|k| {
            traj.bodies(k)
                .iter()
                .fold(Vector3::zeros(), |acc, b| acc + Vector3::from(b.position) * b.mass)
        })
        .collect();
    let d1 = crate::stencil::first_derivative_weights(6);
    let d2 = second_derivative_weights(6);
    let (mut mono, mut dip, mut scale) = (0.0_f64, 0.0_f64, 0.0_f64);
    for k in PAD..traj.len() - PAD {
        let at = |o: i32| (k as i64 + o as i64) as usize;
        let dm: f64 = d1.iter().map(|&(o, w)| w * mass[at(o)]).sum::<f64>() / dt;
        let dd = d2.iter().fold(Vector3::zeros(), |acc, &(o, w)| acc + dipole[at(o)] * w) / (dt * dt);
        mono = mono.max(dm.abs());
        dip = dip.max(dd.norm());
        // Largest single-body mass times acceleration magnitude.
        for i in 0..2 {
            let x = |o: i32| Vector3::from(traj.positions[at(o)][i]);
            let acc = d2.iter().fold(Vector3::zeros(), |s, &(o, w)| s + x(o) * w) / (dt * dt);
            scale = scale.max(traj.masses[i] * acc.norm());
        }
    }
    let quad = radiated_power_numeric(traj)?.average;
    Ok(MomentRates {
        monopole_rate: mono,
        dipole_rate: dip,
        dipole_initial: dipole[0].norm(),
        quadrupole_power: quad,
        dipole_scale: scale,
    })
}

/// Wave potential `h'_ij = (2/r) q''_ij` at distance `r` for sample `k` (retardation is
/// a shift of the sample index and is left to the caller).
pub fn wave_strain(traj: &BinaryTrajectory, k: usize, r: f64) -> Result<Mat3> {
    let dt = traj.step()?;
    if k < PAD || k + PAD >= traj.len() || !(r > 0.0) {
        return Err(Error::InvalidInput(format!("sample {k} or distance {r} out of range")));
    }
    let series = QuadrupoleSeries::from_trajectory(traj);
    let q2 = second_derivative_weights(6).iter().fold(Mat3::zeros(), |acc, &(o, w)| {
        acc + series.q[(k as i64 + o as i64) as usize] * w
    }) / (dt * dt);
    Ok(q2 * (2.0 / r))
}
