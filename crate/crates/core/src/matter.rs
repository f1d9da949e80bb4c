//! Spin/polarization tensors and the Maxwell-like stress-energy they carry.

use crate::error::{ensure_finite, Error, Result};
use crate::tensor::{eta_matrix, Mat4, ETA};
use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

/// Rest-frame polarization `p` and spin `s`, in geometric mass units.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpinPolarization {
    pub p: [f64; 3],
    pub s: [f64; 3],
}

impl SpinPolarization {
    pub fn new(p: [f64; 3], s: [f64; 3]) -> Self {
        Self { p, s }
    }

    /// `p.p + s.s`, the rest mass when `p` and `s` are parallel.
    pub fn mass(&self) -> f64 {
        let (p, s) = (Vector3::from(self.p), Vector3::from(self.s));
        p.norm_squared() + s.norm_squared()
    }

    pub fn is_rest_frame(&self, tol: f64) -> bool {
        Vector3::from(energy_flux(self)).norm() <= tol * (1.0 + self.mass())
    }
}

/// Antisymmetric 4x4 spin tensor.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpinTensor {
    matrix: Mat4,
    pub frame: String,
}

impl SpinTensor {
    /// Accepts any exactly antisymmetric matrix.
    pub fn from_matrix(matrix: Mat4, frame: &str) -> Result<Self> {
        ensure_finite(matrix.as_slice(), "spin tensor")?;
        if matrix != -matrix.transpose() {
            return Err(Error::InvalidInput("spin tensor must be antisymmetric".into()));
        }
        Ok(Self {
            matrix,
            frame: frame.to_string(),
        })
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.matrix
    }
}

/// Symmetric, traceless stress-energy tensor with lower indices.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StressEnergy {
    pub t: Mat4,
}

impl StressEnergy {
    pub fn symmetry_residual(&self) -> f64 {
        (self.t - self.t.transpose()).amax()
    }

    /// `eta^{mu nu} T_{mu nu}`.
    pub fn trace(&self) -> f64 {
        (0..4).map(|i| ETA[i] * self.t[(i, i)]).sum()
    }

    pub fn energy_flux(&self) -> [f64; 3] {
        [self.t[(0, 1)], self.t[(0, 2)], self.t[(0, 3)]]
    }
}

/// The matrix exactly as laid out in the vortex model:
/// rows `(0,p1,p2,p3)`, `(-p1,0,s3,s2)`, `(-p2,-s3,0,s1)`, `(-p3,-s2,-s1,0)`.
pub fn spin_tensor(sp: &SpinPolarization) -> SpinTensor {
    let [p1, p2, p3] = sp.p;
    let [s1, s2, s3] = sp.s;
    #[rustfmt::skip]
    let m = Mat4::new(
        0.0,  p1,  p2,  p3,
        -p1, 0.0,  s3,  s2,
        -p2, -s3, 0.0,  s1,
        -p3, -s2, -s1, 0.0,
    );
    SpinTensor {
        matrix: m,
        frame: "rest".into(),
    }
}

/// Layout with `S_ij = eps_ijk s_k`, for which the block identities hold.
pub fn spin_tensor_conventional(sp: &SpinPolarization) -> SpinTensor {
    let [s1, s2, s3] = sp.s;
    spin_tensor(&SpinPolarization::new(sp.p, [s1, -s2, s3]))
}

/// `T_{mu nu} = -[S_{mu l} S^l_nu + 1/4 eta_{mu nu} S_{ab} S^{ab}]`.
pub fn stress_energy(s: &SpinTensor) -> StressEnergy {
    let eta = eta_matrix();
    let sm = s.matrix;
    let raised = eta * sm * eta;
    let contraction = sm.component_mul(&raised).sum();
    let t = -(sm * eta * sm + eta * (0.25 * contraction));
    // round-off aside, the product is symmetric; enforce it exactly
    StressEnergy {
        t: (t + t.transpose()) * 0.5,
    }
}

/// The explicit block form with `U = p x s` and
/// `P_ij = p_i p_j + s_i s_j - (p^2 + s^2) d_ij / 2`.
pub fn stress_energy_block(sp: &SpinPolarization) -> StressEnergy {
    let (p, s) = (Vector3::from(sp.p), Vector3::from(sp.s));
    let u = p.cross(&s);
    let half = 0.5 * (p.norm_squared() + s.norm_squared());
    let mut t = Mat4::zeros();
    t[(0, 0)] = half;
    for i in 0..3 {
        t[(0, i + 1)] = u[i];
        t[(i + 1, 0)] = u[i];
        for j in 0..3 {
            let delta = if i == j { half } else { 0.0 };
            t[(i + 1, j + 1)] = -(p[i] * p[j] + s[i] * s[j] - delta);
        }
    }
    StressEnergy { t }
}

/// Energy flux `p x s`.
pub fn energy_flux(sp: &SpinPolarization) -> [f64; 3] {
    Vector3::from(sp.p).cross(&Vector3::from(sp.s)).into()
}

/// Rest-frame "spherical" components `(T_00, T_rr)` with `T_rr = d^{jk} T_jk`.
pub fn rest_frame_spherical(sp: &SpinPolarization) -> (f64, f64) {
    let t = stress_energy(&spin_tensor_conventional(sp)).t;
    (t[(0, 0)], (1..4).map(|i| t[(i, i)]).sum())
}

/// Boost matrix for velocity `v` (contravariant components).
pub fn boost_matrix(v: [f64; 3]) -> Result<Mat4> {
    ensure_finite(&v, "boost velocity")?;
    let v = Vector3::from(v);
    let v2 = v.norm_squared();
    if v2 >= 1.0 {
        return Err(Error::InvalidInput(format!(
            "boost speed {} must be below 1",
            v2.sqrt()
        )));
    }
    let gamma = 1.0 / (1.0 - v2).sqrt();
    let mut l = Mat4::identity();
    l[(0, 0)] = gamma;
    for i in 0..3 {
        l[(0, i + 1)] = gamma * v[i];
        l[(i + 1, 0)] = gamma * v[i];
        for j in 0..3 {
            if v2 > 0.0 {
                l[(i + 1, j + 1)] += (gamma - 1.0) * v[i] * v[j] / v2;
            }
        }
    }
    Ok(l)
}

/// `Lambda T Lambda^T`.
pub fn boost_stress_energy(t: &StressEnergy, v: [f64; 3]) -> Result<StressEnergy> {
    let l = boost_matrix(v)?;
    Ok(StressEnergy {
        t: l * t.t * l.transpose(),
    })
}
