//! Homogeneous isotropic universe with `G_00 = -1`, `G_ij = b a^2 delta_ij` and
//! torsion `H_i0i = c a^2`, `H_iij = d a^2`, filled with radiation-like matter.
//!
//! The scale factor is prescribed, `a = a0 t / t0`. The integrated system takes
//! `b` from the 8 pi rho equation, `c` and `d` from the two torsion equations and
//! `rho` from matter conservation; the 8 pi p equation is monitored as a constraint.

use crate::error::{Error, Result};
use crate::ode::{Dopri5, OdeOptions};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    DeSitter,
    Poincare,
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "desitter" | "de-sitter" => Ok(Mode::DeSitter),
            "poincare" => Ok(Mode::Poincare),
            _ => Err(Error::InvalidInput(format!("unknown cosmology mode '{s}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CosmoParams {
    pub a0: f64,
    pub t0: f64,
    pub rho0: f64,
    pub b0: f64,
    pub c0: f64,
    /// `d(t0)`; `d'(t0) = 0` is always imposed.
    #[serde(default)]
    pub d0: f64,
    #[serde(default)]
    pub mode: Mode,
}

impl Default for CosmoParams {
    fn default() -> Self {
        Self {
            a0: 1.0,
            t0: 1.0,
            rho0: 0.0,
            b0: 1.0,
            c0: 0.0,
            d0: 0.0,
            mode: Mode::DeSitter,
        }
    }
}

impl CosmoParams {
    pub fn validate(&self) -> Result<()> {
        crate::error::ensure_finite(
            &[self.a0, self.t0, self.rho0, self.b0, self.c0, self.d0],
            "cosmology parameters",
        )?;
        if !(self.a0 > 0.0 && self.t0 > 0.0) {
            return Err(Error::InvalidInput("a0 and t0 must be positive".into()));
        }
        if self.rho0 < 0.0 {
            return Err(Error::InvalidInput("rho0 must be non-negative".into()));
        }
        Ok(())
    }

    /// Default start time `t0 / 100`.
    pub fn t_min(&self) -> f64 {
        self.t0 / 100.0
    }

    /// The constant `C = (-12 c0 + 8 pi rho0 t0^4) / (3 t0)` of the de Sitter closed form.
    pub fn big_c(&self) -> f64 {
        (-12.0 * self.c0 + 8.0 * PI * self.rho0 * self.t0.powi(4)) / (3.0 * self.t0)
    }

    /// The constant `K = (b0 + 8 pi rho0 t0^2 / (3 a0^4) - 1) a0` of the Poincare closed form.
    pub fn big_k(&self) -> f64 {
        (self.b0 + 8.0 * PI * self.rho0 * self.t0.powi(2) / (3.0 * self.a0.powi(4)) - 1.0) * self.a0
    }

    fn scale(&self, t: f64) -> (f64, f64, f64) {
        (self.a0 * t / self.t0, self.a0 / self.t0, 0.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CosmoState {
    pub t: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub rho: f64,
}

/// A state together with the first and second time derivatives the equations need.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CosmoJet {
    pub state: CosmoState,
    pub a_dot: f64,
    pub a_ddot: f64,
    pub b_dot: f64,
    pub b_ddot: f64,
    pub c_dot: f64,
    pub c_ddot: f64,
    pub d_dot: f64,
    pub d_ddot: f64,
    pub rho_dot: f64,
}

/// One equation: its value and the largest magnitude among its terms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Term {
    pub value: f64,
    pub scale: f64,
}

impl Term {
    fn of(terms: &[f64]) -> Self {
        Self {
            value: terms.iter().sum(),
            scale: terms.iter().fold(0.0_f64, |m, v| m.max(v.abs())),
        }
    }

    /// `|value| / scale`, or `|value|` when every term vanishes.
    pub fn relative(&self) -> f64 {
        if self.scale > 0.0 {
            self.value.abs() / self.scale
        } else {
            self.value.abs()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CosmoResiduals {
    pub t: f64,
    /// `8 pi rho` equation.
    pub density: Term,
    /// `8 pi p` equation with `p = rho / 3`.
    pub pressure: Term,
    /// Torsion equation for `c`; absent in the Poincare approximation.
    pub torsion_c: Option<Term>,
    pub torsion_d: Term,
    pub matter: Term,
}

impl CosmoResiduals {
    pub fn max_relative(&self) -> f64 {
        [self.density, self.pressure, self.torsion_d, self.matter]
            .iter()
            .chain(self.torsion_c.iter())
            .map(Term::relative)
            .fold(0.0, f64::max)
    }
}

fn ensure_t(t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::OutOfRange(format!("time must be positive, got {t}")));
    }
    Ok(())
}

/// Residuals of the field and matter equations for a state with derivatives.
pub fn residuals(j: &CosmoJet, mode: Mode) -> Result<CosmoResiduals> {
    let s = j.state;
    ensure_t(s.t)?;
    if !(s.a > 0.0) {
        return Err(Error::OutOfRange(format!("scale factor must be positive, got {}", s.a)));
    }
    let (a, ad, add) = (s.a, j.a_dot, j.a_ddot);
    let (b, bd, bdd) = (s.b, j.b_dot, j.b_ddot);
    let (c, cd, cdd) = match mode {
        Mode::DeSitter => (s.c, j.c_dot, j.c_ddot),
        Mode::Poincare => (0.0, 0.0, 0.0),
    };
    let (d, dd, ddd) = (s.d, j.d_dot, j.d_ddot);
    let a2 = a * a;
    let density = Term::of(&[
        3.0 * ad * bd / a,
        3.0 * ad * ad * b / a2,
        -3.0 * ad * ad / a2,
        3.0 * ad * c / a,
        -8.0 * PI * s.rho,
    ]);
    let pressure = Term::of(&[
        -3.0 * ad * bd / a,
        -bdd,
        -add * b / a,
        -ad * ad * b / a2,
        add / a,
        -bdd,
        -cd,
        -2.0 * ad * c / a,
        -8.0 * PI * s.rho / 3.0,
    ]);
    let torsion_c = (mode == Mode::DeSitter).then(|| {
        Term::of(&[
            cdd * a2,
            3.0 * cd * ad * a,
            -3.0 * ad * ad * c,
            add * a * c,
            -ad * a * b,
            a * ad,
            -bd * a2,
            -c * a2,
        ])
    });
    let torsion_d = Term::of(&[ddd * a2, -ad * ad * d, a * ad * dd, -a2 * b * b * d]);
    let matter = Term::of(&[j.rho_dot, 4.0 * ad * s.rho / a]);
    Ok(CosmoResiduals {
        t: s.t,
        density,
        pressure,
        torsion_c,
        torsion_d,
        matter,
    })
}

/// Residuals with the de Sitter algebra.
pub fn desitter_residuals(j: &CosmoJet) -> Result<CosmoResiduals> {
    residuals(j, Mode::DeSitter)
}

/// Standalone `d` equation `d'' a^2 - a'^2 d + a a' d' - a^2 b^2 d = 0` with data at `t0`,
/// for a given `b(t)`.
pub fn solve_d(params: &CosmoParams, b: impl Fn(f64) -> f64, t: f64, tol: f64) -> Result<(f64, f64)> {
    ensure_t(t)?;
    let p = *params;
    let rhs = move |t: f64, y: &[f64; 2]| {
        let (a, ad, _) = p.scale(t);
        let bb = b(t);
        [
            y[1],
            (ad * ad * y[0] - a * ad * y[1] + a * a * bb * bb * y[0]) / (a * a),
        ]
    };
    let dir = if t >= p.t0 { 1.0 } else { -1.0 };
    let mut ode = Dopri5::new(rhs, p.t0, [p.d0, 0.0], dir, OdeOptions::with_tol(tol));
    ode.integrate_to(t)?;
    Ok((ode.y[0], ode.y[1]))
}

fn with_d(params: &CosmoParams, mut j: CosmoJet, b: impl Fn(f64) -> f64 + Copy) -> Result<CosmoJet> {
    let t = j.state.t;
    let (d, dd) = if params.d0 == 0.0 {
        (0.0, 0.0)
    } else {
        solve_d(params, b, t, 1e-12)?
    };
    let (a, ad) = (j.state.a, j.a_dot);
    let bb = b(t);
    j.state.d = d;
    j.d_dot = dd;
    j.d_ddot = (ad * ad * d - a * ad * dd + a * a * bb * bb * d) / (a * a);
    Ok(j)
}

fn desitter_b(p: &CosmoParams, t: f64) -> [f64; 3] {
    let (cc, k) = (p.big_c(), 8.0 * PI * p.rho0 * p.t0.powi(4));
    [
        (cc * t * t - 3.0 * cc * t + 12.0 + k - 5.0 * k / t - 4.0 * k / (t * t)) / 12.0,
        (2.0 * cc * t - 3.0 * cc + 5.0 * k / (t * t) + 8.0 * k / t.powi(3)) / 12.0,
        (2.0 * cc - 10.0 * k / t.powi(3) - 24.0 * k / t.powi(4)) / 12.0,
    ]
}

fn poincare_b(p: &CosmoParams, t: f64) -> [f64; 3] {
    let q = 8.0 * PI * p.rho0 * p.t0.powi(4) / (3.0 * p.a0.powi(4));
    let k = p.big_k() * p.t0 / p.a0;
    [
        1.0 - q / (t * t) + k / t,
        2.0 * q / t.powi(3) - k / (t * t),
        -6.0 * q / t.powi(4) + 2.0 * k / t.powi(3),
    ]
}

fn base_jet(p: &CosmoParams, t: f64, b: [f64; 3], c: [f64; 3]) -> CosmoJet {
    let (a, ad, add) = p.scale(t);
    let rho = p.rho0 * (p.a0 / a).powi(4);
    CosmoJet {
        state: CosmoState {
            t,
            a,
            b: b[0],
            c: c[0],
            d: 0.0,
            rho,
        },
        a_dot: ad,
        a_ddot: add,
        b_dot: b[1],
        b_ddot: b[2],
        c_dot: c[1],
        c_ddot: c[2],
        d_dot: 0.0,
        d_ddot: 0.0,
        rho_dot: -4.0 * ad * rho / a,
    }
}

/// The displayed de Sitter closed form; `d` comes from its own ODE.
pub fn closed_form_desitter(t: f64, params: &CosmoParams) -> Result<CosmoJet> {
    params.validate()?;
    ensure_t(t)?;
    let p = *params;
    let (cc, k) = (p.big_c(), 8.0 * PI * p.rho0 * p.t0.powi(4));
    let c = [(-3.0 * cc * t + k) / 12.0, -cc / 4.0, 0.0];
    with_d(params, base_jet(params, t, desitter_b(params, t), c), move |s| {
        desitter_b(&p, s)[0]
    })
}

/// The displayed Poincare-approximation closed form (`c = 0`).
pub fn closed_form_poincare(t: f64, params: &CosmoParams) -> Result<CosmoJet> {
    params.validate()?;
    ensure_t(t)?;
    let p = *params;
    with_d(params, base_jet(params, t, poincare_b(params, t), [0.0; 3]), move |s| {
        poincare_b(&p, s)[0]
    })
}

pub fn closed_form(t: f64, params: &CosmoParams) -> Result<CosmoJet> {
    match params.mode {
        Mode::DeSitter => closed_form_desitter(t, params),
        Mode::Poincare => closed_form_poincare(t, params),
    }
}

/// `b'` from the density equation.
fn b_rate(a: f64, ad: f64, b: f64, c: f64, rho: f64) -> f64 {
    8.0 * PI * rho * a / (3.0 * ad) - b * ad / a + ad / a - c
}

fn rhs(p: &CosmoParams, t: f64, y: &[f64; 6]) -> [f64; 6] {
    let (a, ad, add) = p.scale(t);
    let [b, c, cd, d, dd, rho] = *y;
    let (c, cd) = if p.mode == Mode::Poincare { (0.0, 0.0) } else { (c, cd) };
    let bd = b_rate(a, ad, b, c, rho);
    let a2 = a * a;
    let cdd = match p.mode {
        Mode::DeSitter => {
            -(3.0 * cd * ad * a - 3.0 * ad * ad * c + add * a * c - ad * a * b + a * ad - bd * a2 - c * a2) / a2
        }
        Mode::Poincare => 0.0,
    };
    let ddd = (ad * ad * d - a * ad * dd + a2 * b * b * d) / a2;
    [bd, cd, cdd, dd, ddd, -4.0 * ad * rho / a]
}

fn jet_from(p: &CosmoParams, t: f64, y: &[f64; 6]) -> CosmoJet {
    let (a, ad, add) = p.scale(t);
    let f = rhs(p, t, y);
    let [b, c, _, d, _, rho] = *y;
    let c = if p.mode == Mode::Poincare { 0.0 } else { c };
    let (bd, cd, rhod) = (f[0], f[1], f[5]);
    let k = 8.0 * PI / 3.0;
    let bdd = k * (rhod * a + rho * ad) / ad - k * rho * a * add / (ad * ad) - bd * ad / a
        + (1.0 - b) * (add * a - ad * ad) / (a * a)
        - cd;
    CosmoJet {
        state: CosmoState { t, a, b, c, d, rho },
        a_dot: ad,
        a_ddot: add,
        b_dot: bd,
        b_ddot: bdd,
        c_dot: cd,
        c_ddot: f[2],
        d_dot: y[4],
        d_ddot: f[4],
        rho_dot: rhod,
    }
}

/// Integrated trajectory; `diagnostic` is set when integration stopped early.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CosmoRun {
    pub jets: Vec<CosmoJet>,
    pub diagnostic: Option<String>,
}

/// Integrate the coupled system from closed-form data at `t0` (with `d(t0) = d0`,
/// `d'(t0) = 0`) to each of `samples` log-spaced times in `[t_start, t_end]`.
pub fn integrate_cosmology(
    params: &CosmoParams,
    t_start: f64,
    t_end: f64,
    tol: f64,
    samples: usize,
) -> Result<CosmoRun> {
    params.validate()?;
    ensure_t(t_start)?;
    if !(t_end > t_start) || !(tol > 0.0) || samples < 2 {
        return Err(Error::InvalidInput(
            "need 0 < t_start < t_end, tol > 0 and at least 2 samples".into(),
        ));
    }
    let p = *params;
    let cf = closed_form(p.t0, &p)?;
    let y0 = [cf.state.b, cf.state.c, cf.c_dot, p.d0, 0.0, p.rho0];
    let times: Vec<f64> = (0..samples)
        .map(|k| t_start * (t_end / t_start).powf(k as f64 / (samples - 1) as f64))
        .collect();
    let split = times.partition_point(|&t| t < p.t0);
    // Local error control three orders below the requested global tolerance.
    let opts = OdeOptions {
        h_max: p.t0 / 10.0,
        ..OdeOptions::with_tol(tol * 1e-3)
    };
    let mut backward = Vec::new();
    let mut diagnostic = None;
    let mut ode = Dopri5::new(|t, y: &[f64; 6]| rhs(&p, t, y), p.t0, y0, -1.0, opts);
    for &t in times[..split].iter().rev() {
        if let Err(e) = ode.integrate_to(t) {
            diagnostic = Some(format!("backward integration stopped near t = {:.6e}: {e}", ode.t));
            break;
        }
        backward.push(jet_from(&p, t, &ode.y));
    }
    backward.reverse();
    let mut jets = backward;
    let mut ode = Dopri5::new(|t, y: &[f64; 6]| rhs(&p, t, y), p.t0, y0, 1.0, opts);
    for &t in &times[split..] {
        if let Err(e) = ode.integrate_to(t) {
            diagnostic.get_or_insert(format!("forward integration stopped near t = {:.6e}: {e}", ode.t));
            break;
        }
        jets.push(jet_from(&p, t, &ode.y));
    }
    Ok(CosmoRun { jets, diagnostic })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HubbleReading {
    /// `a'/a`.
    pub h: f64,
    /// `beta'/beta` with `beta = sqrt(b)`.
    pub beta_rate: f64,
    /// Apparent rate `beta'/beta + H`.
    pub h_tilde: f64,
    /// Age `1 / (H~ - beta'/beta)`.
    pub age: f64,
}

pub fn hubble_from_jet(j: &CosmoJet) -> Result<HubbleReading> {
    if !(j.state.b > 0.0) {
        return Err(Error::OutOfRange(format!(
            "b = {:.6e} <= 0 at t = {}: sqrt(b) undefined",
            j.state.b, j.state.t
        )));
    }
    let h = j.a_dot / j.state.a;
    let beta_rate = j.b_dot / (2.0 * j.state.b);
    let h_tilde = beta_rate + h;
    Ok(HubbleReading {
        h,
        beta_rate,
        h_tilde,
        age: age_estimate(h_tilde, beta_rate),
    })
}

/// Apparent Hubble rate of the closed form at `t`.
pub fn apparent_hubble(t: f64, params: &CosmoParams) -> Result<HubbleReading> {
    hubble_from_jet(&closed_form(t, params)?)
}

pub fn age_estimate(h_tilde: f64, beta_rate: f64) -> f64 {
    1.0 / (h_tilde - beta_rate)
}

/// Apparent scale `s = sqrt(b) a` and its derivatives.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ApparentScale {
    pub t: f64,
    pub s: f64,
    pub s_dot: f64,
    pub s_ddot: f64,
}

pub fn apparent_scale(j: &CosmoJet) -> Result<ApparentScale> {
    let (a, ad, add) = (j.state.a, j.a_dot, j.a_ddot);
    let (b, bd, bdd) = (j.state.b, j.b_dot, j.b_ddot);
    if !(b > 0.0) {
        return Err(Error::OutOfRange(format!("b = {b:.6e} <= 0 at t = {}", j.state.t)));
    }
    let rb = b.sqrt();
    Ok(ApparentScale {
        t: j.state.t,
        s: rb * a,
        s_dot: bd * a / (2.0 * rb) + rb * ad,
        s_ddot: bdd * a / (2.0 * rb) - bd * bd * a / (4.0 * b * rb) + bd * ad / rb + rb * add,
    })
}

/// `s(t)` and `s''(t)` of the closed form at each time.
pub fn acceleration_diagnostic(params: &CosmoParams, times: &[f64]) -> Result<Vec<ApparentScale>> {
    times
        .iter()
        .map(|&t| apparent_scale(&closed_form(t, params)?))
        .collect()
}
