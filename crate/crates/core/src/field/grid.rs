//! Potentials and sources sampled on a regular 4-D grid.

use super::{field_equation_residual, FieldOptions, FieldResidual, SourceField};
use crate::error::{Error, Result};
use crate::potential::PotentialField;
use crate::stencil::Stencil;
use crate::tensor::{Mat4, Point4, Tensor3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Regular grid. An axis with a single node is treated as a symmetry direction
/// (fields constant along it).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub origin: [f64; 4],
    pub spacing: [f64; 4],
    pub dims: [usize; 4],
}

const NODE_TOL: f64 = 1e-6;

impl GridSpec {
    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, idx: [usize; 4]) -> usize {
        ((idx[0] * self.dims[1] + idx[1]) * self.dims[2] + idx[2]) * self.dims[3] + idx[3]
    }

    pub fn multi_index(&self, mut n: usize) -> [usize; 4] {
        let mut idx = [0; 4];
        for a in (0..4).rev() {
            idx[a] = n % self.dims[a];
            n /= self.dims[a];
        }
        idx
    }

    pub fn point(&self, idx: [usize; 4]) -> Point4 {
        std::array::from_fn(|a| self.origin[a] + idx[a] as f64 * self.spacing[a])
    }

    fn validate(&self) -> Result<()> {
        for a in 0..4 {
            if self.dims[a] == 0 || !(self.spacing[a] > 0.0) || !self.origin[a].is_finite() {
                return Err(Error::InvalidInput(format!("bad grid axis {a}: {self:?}")));
            }
            if (2..5).contains(&self.dims[a]) {
                return Err(Error::GridTooCoarse(format!(
                    "axis {a} has {} nodes; the 4th-order stencil needs at least 5",
                    self.dims[a]
                )));
            }
        }
        Ok(())
    }

    /// Fractional node coordinate along `axis`, or `None` for a singleton axis.
    fn coord(&self, x: &Point4, axis: usize) -> Option<f64> {
        (self.dims[axis] > 1).then(|| (x[axis] - self.origin[axis]) / self.spacing[axis])
    }

    fn nearest(&self, x: &Point4) -> [usize; 4] {
        std::array::from_fn(|a| match self.coord(x, a) {
            None => 0,
            Some(c) => (c.round().max(0.0) as usize).min(self.dims[a] - 1),
        })
    }
}

/// Sampled `(G, H)`; values are exact at nodes and derivatives use 4th-order
/// central differences, dropping to 2nd order at the boundary.
#[derive(Clone, Debug, PartialEq)]
pub struct GridPotential {
    pub spec: GridSpec,
    g: Vec<Mat4>,
    h: Vec<Tensor3>,
}

/// Sampled `(T, S)` on the same kind of grid.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSource {
    pub spec: GridSpec,
    t: Vec<Mat4>,
    s: Vec<Tensor3>,
}

fn check_len<T>(spec: &GridSpec, v: &[T], what: &str) -> Result<()> {
    if v.len() != spec.len() {
        return Err(Error::InvalidInput(format!(
            "{what}: {} samples for a grid of {} nodes",
            v.len(),
            spec.len()
        )));
    }
    Ok(())
}

fn fd<T>(spec: &GridSpec, data: &[T], idx: [usize; 4], axis: usize) -> T
where
    T: Copy + std::ops::Add<Output = T> + std::ops::Sub<Output = T> + std::ops::Mul<f64, Output = T>,
{
    let n = spec.dims[axis];
    let i = idx[axis];
    let at = |k: isize| {
        let mut j = idx;
        j[axis] = (i as isize + k) as usize;
        data[spec.index(j)]
    };
    let inv = 1.0 / spec.spacing[axis];
    if i >= 2 && i + 2 < n {
        (at(-2) * (1.0 / 12.0) - at(-1) * (8.0 / 12.0) + at(1) * (8.0 / 12.0) - at(2) * (1.0 / 12.0)) * inv
    } else if i >= 1 && i + 1 < n {
        (at(1) - at(-1)) * (0.5 * inv)
    } else if i == 0 {
        (at(1) * 4.0 - at(0) * 3.0 - at(2)) * (0.5 * inv)
    } else {
        (at(0) * 3.0 - at(-1) * 4.0 + at(-2)) * (0.5 * inv)
    }
}

impl GridPotential {
    pub fn new(spec: GridSpec, g: Vec<Mat4>, h: Vec<Tensor3>) -> Result<Self> {
        spec.validate()?;
        check_len(&spec, &g, "G")?;
        check_len(&spec, &h, "H")?;
        for (n, hv) in h.iter().enumerate() {
            if !hv.is_finite() || g[n].iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!("potential sample {n}")));
            }
            if hv.last_pair_asymmetry() > 1e-12 * (1.0 + hv.max_abs()) {
                return Err(Error::InvalidInput(format!("H sample {n} is not antisymmetric")));
            }
        }
        Ok(Self { spec, g, h })
    }

    /// Sample any potential on the grid.
    pub fn sample(spec: GridSpec, p: &impl PotentialField) -> Result<Self> {
        spec.validate()?;
        let pts: Vec<Point4> = (0..spec.len()).map(|n| spec.point(spec.multi_index(n))).collect();
        let g = pts.par_iter().map(|x| p.g(x)).collect();
        let h = pts.par_iter().map(|x| p.h(x)).collect();
        Self::new(spec, g, h)
    }
}

impl GridSource {
    pub fn new(spec: GridSpec, t: Vec<Mat4>, s: Vec<Tensor3>) -> Result<Self> {
        spec.validate()?;
        check_len(&spec, &t, "T")?;
        check_len(&spec, &s, "S")?;
        Ok(Self { spec, t, s })
    }

    pub fn sample(spec: GridSpec, src: &impl SourceField) -> Result<Self> {
        spec.validate()?;
        let pts: Vec<Point4> = (0..spec.len()).map(|n| spec.point(spec.multi_index(n))).collect();
        let t = pts.iter().map(|x| src.t(x)).collect();
        let s = pts.iter().map(|x| src.s(x)).collect();
        Self::new(spec, t, s)
    }
}

impl PotentialField for GridPotential {
    fn g(&self, x: &Point4) -> Mat4 {
        self.g[self.spec.index(self.spec.nearest(x))]
    }

    fn h(&self, x: &Point4) -> Tensor3 {
        self.h[self.spec.index(self.spec.nearest(x))]
    }

    fn dg(&self, x: &Point4, mu: usize) -> Mat4 {
        if self.spec.dims[mu] == 1 {
            return Mat4::zeros();
        }
        fd(&self.spec, &self.g, self.spec.nearest(x), mu)
    }

    fn dh(&self, x: &Point4, mu: usize) -> Tensor3 {
        if self.spec.dims[mu] == 1 {
            return Tensor3::zero();
        }
        fd(&self.spec, &self.h, self.spec.nearest(x), mu)
    }

    fn validate_point(&self, x: &Point4, reach: f64) -> Result<()> {
        for a in 0..4 {
            let Some(c) = self.spec.coord(x, a) else { continue };
            if (c - c.round()).abs() > NODE_TOL {
                return Err(Error::InvalidInput(format!(
                    "point {x:?} is not a grid node along axis {a}"
                )));
            }
            let k = (reach / self.spec.spacing[a]).round();
            if c.round() - k < 0.0 || c.round() + k > (self.spec.dims[a] - 1) as f64 {
                return Err(Error::GridTooCoarse(format!(
                    "stencil of reach {reach} around {x:?} leaves the grid along axis {a}"
                )));
            }
        }
        Ok(())
    }
}

impl SourceField for GridSource {
    fn t(&self, x: &Point4) -> Mat4 {
        self.t[self.spec.index(self.spec.nearest(x))]
    }

    fn s(&self, x: &Point4) -> Tensor3 {
        self.s[self.spec.index(self.spec.nearest(x))]
    }
}

/// Field-equation residuals at every node whose divergence stencil fits inside
/// the grid and only touches nodes with full-order derivative stencils.
pub fn grid_field_residual(
    potential: &GridPotential,
    source: &GridSource,
    background: super::Background,
) -> Result<Vec<([usize; 4], FieldResidual)>> {
    let spec = potential.spec;
    if spec != source.spec {
        return Err(Error::InvalidInput("potential and source grids differ in shape".into()));
    }
    let active: Vec<usize> = (0..4).filter(|&a| spec.dims[a] > 1).collect();
    let h = active.first().map(|&a| spec.spacing[a]).unwrap_or(1.0);
    if active.iter().any(|&a| (spec.spacing[a] - h).abs() > 1e-12 * h) {
        return Err(Error::InvalidInput(
            "grid residuals need equal spacing on every non-trivial axis".into(),
        ));
    }
    let opts = FieldOptions {
        background,
        stencil: Stencil::new(h, 4),
    };
    let margin = 4;
    let interior: Vec<[usize; 4]> = (0..spec.len())
        .map(|n| spec.multi_index(n))
        .filter(|idx| {
            active
                .iter()
                .all(|&a| idx[a] >= margin && idx[a] + margin < spec.dims[a])
        })
        .collect();
    if interior.is_empty() {
        return Err(Error::GridTooCoarse(format!(
            "no interior nodes at margin {margin} on {:?}",
            spec.dims
        )));
    }
    interior
        .par_iter()
        .map(|&idx| {
            Ok((
                idx,
                field_equation_residual(potential, source, &spec.point(idx), &opts)?,
            ))
        })
        .collect()
}
