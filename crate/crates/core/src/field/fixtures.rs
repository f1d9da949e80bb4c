//! Smooth analytic potentials, sources and gauge parameters with exact derivatives.

use super::{GaugeParams, SourceField};
use crate::potential::PotentialField;
use crate::tensor::{eta_matrix, Mat4, Point4, Tensor3};

#[derive(Clone, Copy, Debug)]
struct Wave {
    alpha: f64,
    beta: f64,
    k: [f64; 4],
    phi: f64,
}

impl Wave {
    fn new(seed: usize, amplitude: f64) -> Self {
        let frac = |i: usize| ((i as f64 * 0.618_033_988_749_895).fract() - 0.5) * 2.0;
        Self {
            alpha: amplitude * frac(seed + 3),
            beta: amplitude * 0.5 * frac(3 * seed + 5),
            k: std::array::from_fn(|d| 1.2 * frac(5 * seed + 11 * d + 1)),
            phi: 3.0 * frac(7 * seed + 2),
        }
    }

    fn phase(&self, x: &Point4) -> f64 {
        self.phi + (0..4).map(|d| self.k[d] * x[d]).sum::<f64>()
    }

    fn value(&self, x: &Point4) -> f64 {
        self.alpha * self.phase(x).sin() + self.beta
    }

    fn deriv(&self, x: &Point4, mu: usize) -> f64 {
        self.alpha * self.k[mu] * self.phase(x).cos()
    }
}

fn symmetric_waves(offset: usize, amplitude: f64) -> [[Wave; 4]; 4] {
    std::array::from_fn(|a| {
        std::array::from_fn(|b| {
            let (i, j) = if a <= b { (a, b) } else { (b, a) };
            Wave::new(offset + 4 * i + j, amplitude)
        })
    })
}

fn antisymmetric_waves(offset: usize, amplitude: f64) -> [[[Wave; 4]; 4]; 4] {
    std::array::from_fn(|m| {
        std::array::from_fn(|a| {
            std::array::from_fn(|b| Wave::new(offset + 16 * m + 4 * a.min(b) + a.max(b), amplitude))
        })
    })
}

fn antisym_eval(w: &[[[Wave; 4]; 4]; 4], f: impl Fn(&Wave) -> f64) -> Tensor3 {
    Tensor3::from_fn(|m, a, b| match a.cmp(&b) {
        std::cmp::Ordering::Less => f(&w[m][a][b]),
        std::cmp::Ordering::Greater => -f(&w[m][b][a]),
        std::cmp::Ordering::Equal => 0.0,
    })
}

/// `G = eta + amplitude * waves` (symmetric), `H = amplitude * waves` (antisymmetric in its last pair).
#[derive(Clone, Debug)]
pub struct SmoothPotential {
    g: [[Wave; 4]; 4],
    h: [[[Wave; 4]; 4]; 4],
    torsion: bool,
}

impl SmoothPotential {
    pub fn new(amplitude: f64) -> Self {
        Self {
            g: symmetric_waves(0, amplitude),
            h: antisymmetric_waves(100, amplitude),
            torsion: true,
        }
    }

    /// Same metric part with `H = 0`.
    pub fn without_torsion(amplitude: f64) -> Self {
        Self {
            torsion: false,
            ..Self::new(amplitude)
        }
    }
}

impl PotentialField for SmoothPotential {
    fn g(&self, x: &Point4) -> Mat4 {
        eta_matrix() + Mat4::from_fn(|a, b| self.g[a][b].value(x))
    }

    fn h(&self, x: &Point4) -> Tensor3 {
        if !self.torsion {
            return Tensor3::zero();
        }
        antisym_eval(&self.h, |w| w.value(x))
    }

    fn dg(&self, x: &Point4, mu: usize) -> Mat4 {
        Mat4::from_fn(|a, b| self.g[a][b].deriv(x, mu))
    }

    fn dh(&self, x: &Point4, mu: usize) -> Tensor3 {
        if !self.torsion {
            return Tensor3::zero();
        }
        antisym_eval(&self.h, |w| w.deriv(x, mu))
    }
}

/// Smooth symmetric `T` and antisymmetric `S`.
#[derive(Clone, Debug)]
pub struct SmoothSource {
    t: [[Wave; 4]; 4],
    s: [[[Wave; 4]; 4]; 4],
}

impl SmoothSource {
    pub fn new(amplitude: f64) -> Self {
        Self {
            t: symmetric_waves(300, amplitude),
            s: antisymmetric_waves(400, amplitude),
        }
    }
}

impl SourceField for SmoothSource {
    fn t(&self, x: &Point4) -> Mat4 {
        Mat4::from_fn(|a, b| self.t[a][b].value(x))
    }

    fn s(&self, x: &Point4) -> Tensor3 {
        antisym_eval(&self.s, |w| w.value(x))
    }
}

/// Smooth gauge parameters `xi_mu`, `chi_ab`.
#[derive(Clone, Debug)]
pub struct SmoothGauge {
    xi: [Wave; 4],
    chi: [[Wave; 4]; 4],
}

impl SmoothGauge {
    pub fn new(amplitude: f64, seed: usize) -> Self {
        let base = 600 + 50 * seed;
        Self {
            xi: std::array::from_fn(|m| Wave::new(base + m, amplitude)),
            chi: std::array::from_fn(|a| {
                std::array::from_fn(|b| Wave::new(base + 10 + 4 * a.min(b) + a.max(b), amplitude))
            }),
        }
    }

    fn chi_with(&self, f: impl Fn(&Wave) -> f64) -> Mat4 {
        Mat4::from_fn(|a, b| match a.cmp(&b) {
            std::cmp::Ordering::Less => f(&self.chi[a][b]),
            std::cmp::Ordering::Greater => -f(&self.chi[b][a]),
            std::cmp::Ordering::Equal => 0.0,
        })
    }
}

impl GaugeParams for SmoothGauge {
    fn xi(&self, x: &Point4) -> [f64; 4] {
        std::array::from_fn(|m| self.xi[m].value(x))
    }

    fn chi(&self, x: &Point4) -> Mat4 {
        self.chi_with(|w| w.value(x))
    }

    fn dxi(&self, x: &Point4, mu: usize) -> [f64; 4] {
        std::array::from_fn(|m| self.xi[m].deriv(x, mu))
    }

    fn dchi(&self, x: &Point4, mu: usize) -> Mat4 {
        self.chi_with(|w| w.deriv(x, mu))
    }
}
