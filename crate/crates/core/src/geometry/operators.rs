use super::{BackgroundKind, RadialMesh};
use crate::scalar::Real;

const GAUSS_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664,
];
const GAUSS_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

/// Discrete radial Laplacian and gradient on a fixed mesh.
///
/// Rows away from the mesh ends use the conservative form
/// `Δu = A^{-1} (A u_r)_r` with `A = sinh^{m-1} r` (or `r^{m-1}`) over the
/// cell `[r_i - h/2, r_i + h/2]`, so off-diagonal weights are positive at
/// every node. The origin row integrates over `[0, h/2]`, which is the
/// even-reflection stencil `m u_rr(0)` up to `O(h²)` (exactly `2m(u_1-u_0)/h²`
/// on flat space). Nodes on a mesh end that is not the origin use one-sided
/// second order differences.
#[derive(Debug, Clone)]
pub struct RadialOperators<T> {
    background: BackgroundKind,
    dim: usize,
    nodes: Vec<T>,
    dr: T,
    has_origin: bool,
    lower: Vec<T>,
    upper: Vec<T>,
}

impl<T: Real> RadialOperators<T> {
    pub fn new(mesh: &RadialMesh<T>) -> Self {
        let n = mesh.len();
        let h = mesh.dr();
        let half = h * T::lit(0.5);
        let bg = mesh.background();
        let dim = mesh.dim();
        // ∫_{a}^{b} A(r)/A(pivot) dr
        let volume = |a: T, b: T, pivot: T| {
            let mid = (a + b) * T::lit(0.5);
            let rad = (b - a) * T::lit(0.5);
            let mut acc = T::zero();
            for (x, w) in GAUSS_NODES.iter().zip(GAUSS_WEIGHTS) {
                acc = acc + T::lit(w) * bg.area_ratio(dim, mid + rad * T::lit(*x), pivot);
            }
            acc * rad
        };
        let mut lower = vec![T::zero(); n];
        let mut upper = vec![T::zero(); n];
        let nodes = mesh.nodes().to_vec();
        if mesh.has_origin() {
            upper[0] = T::one() / (h * volume(T::zero(), half, half));
        }
        for i in 1..n - 1 {
            let r = nodes[i];
            let vol = h * volume(r - half, r + half, r);
            lower[i] = bg.area_ratio(dim, r - half, r) / vol;
            upper[i] = bg.area_ratio(dim, r + half, r) / vol;
        }
        Self {
            background: bg,
            dim,
            nodes,
            dr: h,
            has_origin: mesh.has_origin(),
            lower,
            upper,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Whether node `i` has a conservative three-point row.
    pub fn has_row(&self, i: usize) -> bool {
        (i > 0 && i + 1 < self.nodes.len()) || (i == 0 && self.has_origin)
    }

    /// Weights `(w_-, w_+)` of the row `(Lu)_i = w_-(u_{i-1}-u_i) + w_+(u_{i+1}-u_i)`.
    pub fn row(&self, i: usize) -> (T, T) {
        (self.lower[i], self.upper[i])
    }

    pub fn laplacian(&self, u: &[T]) -> Vec<T> {
        let n = self.nodes.len();
        assert_eq!(u.len(), n, "field and operator sizes differ");
        let mut out = vec![T::zero(); n];
        for (i, o) in out.iter_mut().enumerate() {
            *o = if self.has_row(i) {
                let below = if i > 0 { u[i - 1] - u[i] } else { T::zero() };
                self.lower[i] * below + self.upper[i] * (u[i + 1] - u[i])
            } else {
                self.one_sided_laplacian(u, i)
            };
        }
        out
    }

    /// Radial derivative: centered inside, zero at the origin, one-sided at
    /// the other mesh ends.
    pub fn gradient(&self, u: &[T]) -> Vec<T> {
        let n = self.nodes.len();
        assert_eq!(u.len(), n, "field and operator sizes differ");
        let two_h = self.dr + self.dr;
        let mut out = vec![T::zero(); n];
        for i in 1..n - 1 {
            out[i] = (u[i + 1] - u[i - 1]) / two_h;
        }
        out[n - 1] = (T::lit(3.0) * u[n - 1] - T::lit(4.0) * u[n - 2] + u[n - 3]) / two_h;
        if !self.has_origin {
            out[0] = (T::lit(-3.0) * u[0] + T::lit(4.0) * u[1] - u[2]) / two_h;
        }
        out
    }

    fn one_sided_laplacian(&self, u: &[T], i: usize) -> T {
        let h2 = self.dr * self.dr;
        let two_h = self.dr + self.dr;
        let (ur, urr) = if i == 0 {
            (
                (T::lit(-3.0) * u[0] + T::lit(4.0) * u[1] - u[2]) / two_h,
                (T::lit(2.0) * u[0] - T::lit(5.0) * u[1] + T::lit(4.0) * u[2] - u[3]) / h2,
            )
        } else {
            (
                (T::lit(3.0) * u[i] - T::lit(4.0) * u[i - 1] + u[i - 2]) / two_h,
                (T::lit(2.0) * u[i] - T::lit(5.0) * u[i - 1] + T::lit(4.0) * u[i - 2]
                    - u[i - 3])
                    / h2,
            )
        };
        urr + self
            .background
            .first_order_coefficient(self.dim, self.nodes[i])
            * ur
    }
}
