//! Small fixed-size tensors over four spacetime indices.

use nalgebra::Matrix4;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Sub};

pub type Mat4 = Matrix4<f64>;
pub type Point4 = [f64; 4];

/// Minkowski form, signature (-,+,+,+).
pub const ETA: [f64; 4] = [-1.0, 1.0, 1.0, 1.0];

pub fn eta_matrix() -> Mat4 {
    Mat4::from_diagonal(&nalgebra::Vector4::from(ETA))
}

/// Rank-3 tensor `T[i][j][k]`.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Tensor3(pub [[[f64; 4]; 4]; 4]);

/// Rank-4 tensor `T[i][j][k][l]`.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Tensor4(pub [[[[f64; 4]; 4]; 4]; 4]);

impl Tensor3 {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_fn(f: impl Fn(usize, usize, usize) -> f64) -> Self {
        let mut t = Self::zero();
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    t.0[i][j][k] = f(i, j, k);
                }
            }
        }
        t
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest violation of antisymmetry in the last index pair.
    pub fn last_pair_asymmetry(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    worst = worst.max((self.0[i][j][k] + self.0[i][k][j]).abs());
                }
            }
        }
        worst
    }

    /// Projection onto the part antisymmetric in the last pair.
    pub fn antisymmetrized(&self) -> Self {
        Self::from_fn(|i, j, k| 0.5 * (self.0[i][j][k] - self.0[i][k][j]))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().flatten().all(|v| v.is_finite())
    }

    pub fn slot(&self, i: usize) -> Mat4 {
        Mat4::from_fn(|j, k| self.0[i][j][k])
    }
}

impl Tensor4 {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_fn(f: impl Fn(usize, usize, usize, usize) -> f64) -> Self {
        let mut t = Self::zero();
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    for l in 0..4 {
                        t.0[i][j][k][l] = f(i, j, k, l);
                    }
                }
            }
        }
        t
    }

    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .flatten()
            .flatten()
            .fold(0.0, |m, v| m.max(v.abs()))
    }
}

macro_rules! tensor_ops {
    ($t:ident, $($idx:ident),+) => {
        impl Add for $t {
            type Output = $t;
            fn add(self, rhs: $t) -> $t {
                $t::from_fn(|$($idx),+| self[($($idx),+)] + rhs[($($idx),+)])
            }
        }
        impl Sub for $t {
            type Output = $t;
            fn sub(self, rhs: $t) -> $t {
                $t::from_fn(|$($idx),+| self[($($idx),+)] - rhs[($($idx),+)])
            }
        }
        impl Mul<f64> for $t {
            type Output = $t;
            fn mul(self, s: f64) -> $t {
                $t::from_fn(|$($idx),+| self[($($idx),+)] * s)
            }
        }
        impl AddAssign for $t {
            fn add_assign(&mut self, rhs: $t) {
                *self = *self + rhs;
            }
        }
    };
}

impl Index<(usize, usize, usize)> for Tensor3 {
    type Output = f64;
    fn index(&self, (i, j, k): (usize, usize, usize)) -> &f64 {
        &self.0[i][j][k]
    }
}
impl IndexMut<(usize, usize, usize)> for Tensor3 {
    fn index_mut(&mut self, (i, j, k): (usize, usize, usize)) -> &mut f64 {
        &mut self.0[i][j][k]
    }
}
impl Index<(usize, usize, usize, usize)> for Tensor4 {
    type Output = f64;
    fn index(&self, (i, j, k, l): (usize, usize, usize, usize)) -> &f64 {
        &self.0[i][j][k][l]
    }
}
impl IndexMut<(usize, usize, usize, usize)> for Tensor4 {
    fn index_mut(&mut self, (i, j, k, l): (usize, usize, usize, usize)) -> &mut f64 {
        &mut self.0[i][j][k][l]
    }
}

tensor_ops!(Tensor3, i, j, k);
tensor_ops!(Tensor4, i, j, k, l);
