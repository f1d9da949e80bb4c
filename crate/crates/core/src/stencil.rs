//! Central finite-difference stencils.

use serde::{Deserialize, Serialize};

/// Step size and formal order of a central difference.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stencil {
    pub h: f64,
    pub order: usize,
}

impl Stencil {
    pub fn new(h: f64, order: usize) -> Self {
        Self { h, order }
    }

    /// Half-width in grid steps.
    pub fn reach(&self) -> usize {
        self.order / 2
    }
}

/// Weights `(offset, w)` for the first derivative; divide by `h`.
pub fn first_derivative_weights(order: usize) -> &'static [(i32, f64)] {
    match order {
        2 => &[(-1, -0.5), (1, 0.5)],
        4 => &[(-2, 1.0 / 12.0), (-1, -2.0 / 3.0), (1, 2.0 / 3.0), (2, -1.0 / 12.0)],
        6 => &[
            (-3, -1.0 / 60.0),
            (-2, 3.0 / 20.0),
            (-1, -3.0 / 4.0),
            (1, 3.0 / 4.0),
            (2, -3.0 / 20.0),
            (3, 1.0 / 60.0),
        ],
        8 => &[
            (-4, 1.0 / 280.0),
            (-3, -4.0 / 105.0),
            (-2, 1.0 / 5.0),
            (-1, -4.0 / 5.0),
            (1, 4.0 / 5.0),
            (2, -1.0 / 5.0),
            (3, 4.0 / 105.0),
            (4, -1.0 / 280.0),
        ],
        _ => panic!("unsupported first-derivative order {order}"),
    }
}

/// Weights for the second derivative; divide by `h^2`.
pub fn second_derivative_weights(order: usize) -> &'static [(i32, f64)] {
    match order {
        2 => &[(-1, 1.0), (0, -2.0), (1, 1.0)],
        4 => &[
            (-2, -1.0 / 12.0),
            (-1, 4.0 / 3.0),
            (0, -5.0 / 2.0),
            (1, 4.0 / 3.0),
            (2, -1.0 / 12.0),
        ],
        6 => &[
            (-3, 1.0 / 90.0),
            (-2, -3.0 / 20.0),
            (-1, 3.0 / 2.0),
            (0, -49.0 / 18.0),
            (1, 3.0 / 2.0),
            (2, -3.0 / 20.0),
            (3, 1.0 / 90.0),
        ],
        _ => panic!("unsupported second-derivative order {order}"),
    }
}

/// Seven-point, fourth-order weights for the third derivative; divide by `h^3`.
pub const THIRD_DERIVATIVE_7PT: [(i32, f64); 6] = [
    (-3, 1.0 / 8.0),
    (-2, -1.0),
    (-1, 13.0 / 8.0),
    (1, -13.0 / 8.0),
    (2, 1.0),
    (3, -1.0 / 8.0),
];

pub fn supported_first_order(order: usize) -> bool {
    matches!(order, 2 | 4 | 6 | 8)
}

/// Central first derivative of a scalar function.
pub fn derivative(f: impl Fn(f64) -> f64, x: f64, h: f64, order: usize) -> f64 {
    first_derivative_weights(order)
        .iter()
        .map(|&(k, w)| w * f(x + k as f64 * h))
        .sum::<f64>()
        / h
}
