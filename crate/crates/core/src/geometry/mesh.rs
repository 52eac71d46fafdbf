use super::BackgroundKind;
use crate::error::{Result, YamabeError};
use crate::scalar::Real;
use std::ops::{Deref, DerefMut};

/// Uniform radial grid on `[r_min, r_max]` with `intervals + 1` nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialMesh<T> {
    background: BackgroundKind,
    dim: usize,
    nodes: Vec<T>,
    dr: T,
}

impl<T: Real> RadialMesh<T> {
    pub fn new(
        background: BackgroundKind,
        dim: usize,
        r_min: T,
        r_max: T,
        intervals: usize,
    ) -> Result<Self> {
        if dim < 3 {
            return Err(YamabeError::InvalidParameter(format!(
                "dimension must be at least 3, got {dim}"
            )));
        }
        if !(r_min >= T::zero()) || !r_max.is_finite() || !(r_max > r_min) {
            return Err(YamabeError::InvalidParameter(format!(
                "mesh needs 0 <= r_min < r_max, got [{r_min}, {r_max}]"
            )));
        }
        if intervals < 4 {
            return Err(YamabeError::InvalidParameter(format!(
                "mesh needs at least 4 intervals, got {intervals}"
            )));
        }
        let dr = (r_max - r_min) / T::from_count(intervals);
        let mut nodes: Vec<T> = (0..=intervals)
            .map(|i| r_min + dr * T::from_count(i))
            .collect();
        nodes[intervals] = r_max;
        Ok(Self {
            background,
            dim,
            nodes,
            dr,
        })
    }

    /// Mesh with a prescribed spacing; `r_max - r_min` must be a whole number
    /// of steps. Meshes built this way on a common `r_min` share their nodes,
    /// which is what the exhaustion ladder compares on.
    pub fn with_spacing(
        background: BackgroundKind,
        dim: usize,
        r_min: T,
        r_max: T,
        dr: T,
    ) -> Result<Self> {
        if !(dr > T::zero()) {
            return Err(YamabeError::InvalidParameter(format!(
                "mesh spacing must be positive, got {dr}"
            )));
        }
        let steps = ((r_max - r_min) / dr).round();
        if ((r_max - r_min) / dr - steps).abs() > T::lit(1e-6) || !(steps >= T::one()) {
            return Err(YamabeError::InvalidParameter(format!(
                "length {} is not a multiple of the spacing {dr}",
                r_max - r_min
            )));
        }
        let intervals = steps.to_usize().ok_or_else(|| {
            YamabeError::InvalidParameter(format!("too many intervals for spacing {dr}"))
        })?;
        let mut mesh = Self::new(background, dim, r_min, r_max, intervals)?;
        mesh.dr = dr;
        for (i, r) in mesh.nodes.iter_mut().enumerate().take(intervals) {
            *r = r_min + dr * T::from_count(i);
        }
        Ok(mesh)
    }

    pub fn background(&self) -> BackgroundKind {
        self.background
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `(m - 2) / 4`.
    pub fn eta(&self) -> T {
        T::from_count(self.dim - 2) * T::lit(0.25)
    }

    pub fn dr(&self) -> T {
        self.dr
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn intervals(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn r_min(&self) -> T {
        self.nodes[0]
    }

    pub fn r_max(&self) -> T {
        self.nodes[self.nodes.len() - 1]
    }

    /// True when the first node is the center of the ball.
    pub fn has_origin(&self) -> bool {
        self.nodes[0] == T::zero()
    }

    /// Index `i` of the cell `[r_i, r_{i+1}]` containing `r`, clamped to the
    /// mesh.
    pub fn cell_of(&self, r: T) -> usize {
        let x = ((r - self.r_min()) / self.dr).floor();
        match x.to_usize() {
            Some(i) => i.min(self.intervals() - 1),
            None => 0,
        }
    }

    /// Node sitting at `r` up to a small fraction of the spacing.
    pub fn index_of(&self, r: T) -> Option<usize> {
        let x = (r - self.r_min()) / self.dr;
        let i = x.round();
        if (x - i).abs() > T::lit(1e-6) {
            return None;
        }
        i.to_usize().filter(|&i| i < self.len())
    }

    /// Leading part of the mesh up to the node at `r_max`.
    pub fn truncated(&self, r_max: T) -> Result<Self> {
        let last = self.index_of(r_max).ok_or_else(|| {
            YamabeError::InvalidParameter(format!("radius {r_max} is not a mesh node"))
        })?;
        if last < 4 {
            return Err(YamabeError::InvalidParameter(format!(
                "truncating at {r_max} leaves fewer than 4 intervals"
            )));
        }
        Ok(Self {
            background: self.background,
            dim: self.dim,
            nodes: self.nodes[..=last].to_vec(),
            dr: self.dr,
        })
    }
}

/// Samples of a rotationally symmetric function, one per mesh node.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RadialField<T> {
    values: Vec<T>,
}

impl<T: Real> RadialField<T> {
    pub fn from_values(values: Vec<T>) -> Self {
        Self { values }
    }

    pub fn from_fn(mesh: &RadialMesh<T>, f: impl Fn(T) -> T) -> Self {
        Self {
            values: mesh.nodes().iter().map(|&r| f(r)).collect(),
        }
    }

    pub fn constant(mesh: &RadialMesh<T>, c: T) -> Self {
        Self {
            values: vec![c; mesh.len()],
        }
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            values: self.values.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn max(&self) -> T {
        self.values.iter().copied().fold(T::neg_infinity(), T::max)
    }

    pub fn min(&self) -> T {
        self.values.iter().copied().fold(T::infinity(), T::min)
    }

    /// Largest `|a - b|` over common nodes.
    pub fn sup_distance(&self, other: &Self) -> T {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| (a - b).abs())
            .fold(T::zero(), T::max)
    }

    pub fn ensure_positive(&self) -> Result<()> {
        match self.values.iter().position(|&x| !(x > T::zero()) || !x.is_finite()) {
            Some(node) => Err(YamabeError::InvalidField {
                node,
                value: self.values[node].as_f64(),
            }),
            None => Ok(()),
        }
    }

    pub fn ensure_len(&self, mesh: &RadialMesh<T>) -> Result<()> {
        if self.values.len() != mesh.len() {
            return Err(YamabeError::InvalidParameter(format!(
                "field has {} values, mesh has {} nodes",
                self.values.len(),
                mesh.len()
            )));
        }
        Ok(())
    }
}

impl<T> Deref for RadialField<T> {
    type Target = [T];

    fn deref(&self) -> &[T] {
        &self.values
    }
}

impl<T> DerefMut for RadialField<T> {
    fn deref_mut(&mut self) -> &mut [T] {
        &mut self.values
    }
}
