//! Reward-space geometry: points, convex target sets, Euclidean projection
//! and the steering direction that points from an average reward toward
//! the target.
//!
//! A [`TargetSet`] is an intersection of half-spaces `{x : <n, x> <= b}`.
//! Axis-aligned boxes keep their bounds alongside the face list and are
//! projected by clamping. General polytopes are projected with Dykstra's
//! alternating projections, followed by an exact solve on the detected
//! active set so the returned point satisfies the optimality conditions to
//! machine precision.

use std::fmt;
use std::ops::{Add, Deref, Index, Sub};

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

/// Default threshold below which the steering direction is switched off.
pub const DEFAULT_EPS_PROJ: f64 = 1e-3;

/// Maximum number of Dykstra sweeps over all half-spaces.
pub const DYKSTRA_MAX_CYCLES: usize = 10_000;

/// Dykstra stops once a full sweep changes the correction increments by
/// less than this.
pub const DYKSTRA_STEP_TOL: f64 = 1e-10;

/// Feasibility slack used when checking membership of projected points.
pub const FEASIBILITY_TOL: f64 = 1e-9;

const NORMAL_TOL: f64 = 1e-12;
const ACTIVE_TOL: f64 = 1e-7;
const NEAR_ACTIVE_TOL: f64 = 1e-3;
const MAX_NEAR_ACTIVE: usize = 12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("non-finite coordinate in point")]
    NonFinite,
    #[error("half-space {index} has a zero normal")]
    ZeroNormal { index: usize },
    #[error("box lower bound exceeds upper bound on coordinate {axis}")]
    InvertedBox { axis: usize },
    #[error("target set is empty (best candidate violates constraints by {violation:e})")]
    Empty { violation: f64 },
    #[error("target set needs at least one constraint")]
    NoConstraints,
    #[error("projection did not converge within {cycles} cycles (last step {residual:e})")]
    NotConverged { cycles: usize, residual: f64 },
    #[error("eps_proj must be positive, got {0}")]
    BadTolerance(f64),
}

/// A point of reward space.
#[derive(Clone, PartialEq, Default)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        Point(coords)
    }

    pub fn zeros(dim: usize) -> Self {
        Point(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn dot(&self, other: &[f64]) -> f64 {
        debug_assert_eq!(self.0.len(), other.len());
        self.0.iter().zip(other).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(&self.0).sqrt()
    }

    pub fn scale(&self, factor: f64) -> Point {
        Point(self.0.iter().map(|v| v * factor).collect())
    }

    pub fn distance_to(&self, other: &Point) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// In-place `self += other`.
    pub fn accumulate(&mut self, other: &Point) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += b;
        }
    }

    pub(crate) fn coords_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }

    fn check(&self, dim: usize) -> Result<(), GeometryError> {
        if self.dim() != dim {
            return Err(GeometryError::Dimension {
                expected: dim,
                got: self.dim(),
            });
        }
        if !self.is_finite() {
            return Err(GeometryError::NonFinite);
        }
        Ok(())
    }
}

impl From<Vec<f64>> for Point {
    fn from(v: Vec<f64>) -> Self {
        Point(v)
    }
}

impl<const N: usize> From<[f64; N]> for Point {
    fn from(v: [f64; N]) -> Self {
        Point(v.to_vec())
    }
}

impl Deref for Point {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl Index<usize> for Point {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl<'a> Sub<&'a Point> for &'a Point {
    type Output = Point;

    fn sub(self, rhs: &'a Point) -> Point {
        Point(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl<'a> Add<&'a Point> for &'a Point {
    type Output = Point;

    fn add(self, rhs: &'a Point) -> Point {
        Point(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

/// `{x : <normal, x> <= offset}` with a unit normal.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfSpace {
    normal: Point,
    offset: f64,
}

impl HalfSpace {
    /// Builds the half-space `<normal, x> <= offset`, rescaling so the
    /// stored normal has unit length.
    pub fn new(normal: Point, offset: f64) -> Result<Self, GeometryError> {
        let len = normal.norm();
        if !len.is_finite() || !offset.is_finite() {
            return Err(GeometryError::NonFinite);
        }
        if len == 0.0 {
            return Err(GeometryError::ZeroNormal { index: 0 });
        }
        let mut hs = HalfSpace {
            normal: normal.scale(1.0 / len),
            offset: offset / len,
        };
        // one renormalisation pass pins the norm to within a few ulps
        let len2 = hs.normal.norm();
        if (len2 - 1.0).abs() > NORMAL_TOL {
            hs.normal = hs.normal.scale(1.0 / len2);
            hs.offset /= len2;
        }
        Ok(hs)
    }

    pub fn normal(&self) -> &Point {
        &self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Positive when `x` lies outside.
    pub fn violation(&self, x: &[f64]) -> f64 {
        self.normal.dot(x) - self.offset
    }

    fn project_into(&self, x: &mut [f64]) {
        let excess = self.violation(x);
        if excess > 0.0 {
            for (xi, ni) in x.iter_mut().zip(self.normal.iter()) {
                *xi -= excess * ni;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct BoxBounds {
    lower: Point,
    upper: Point,
}

/// Nonempty convex subset of reward space given as an intersection of
/// half-spaces.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetSet {
    dim: usize,
    halfspaces: Vec<HalfSpace>,
    bounds: Option<BoxBounds>,
    feasible: Point,
}

impl TargetSet {
    /// Axis-aligned box `[lower, upper]`. Degenerate boxes (a single point
    /// on some axes) are allowed.
    pub fn boxed(lower: Point, upper: Point) -> Result<Self, GeometryError> {
        let dim = lower.dim();
        upper.check(dim)?;
        lower.check(dim)?;
        if dim == 0 {
            return Err(GeometryError::NoConstraints);
        }
        let mut halfspaces = Vec::with_capacity(2 * dim);
        for axis in 0..dim {
            if lower[axis] > upper[axis] {
                return Err(GeometryError::InvertedBox { axis });
            }
            let mut e = vec![0.0; dim];
            e[axis] = 1.0;
            halfspaces.push(HalfSpace::new(Point(e.clone()), upper[axis])?);
            e[axis] = -1.0;
            halfspaces.push(HalfSpace::new(Point(e), -lower[axis])?);
        }
        let feasible = (&lower + &upper).scale(0.5);
        let set = TargetSet {
            dim,
            halfspaces,
            bounds: Some(BoxBounds { lower, upper }),
            feasible,
        };
        set.verify_feasible()?;
        Ok(set)
    }

    /// Intersection of the given half-spaces. A feasible point is located by
    /// projecting the origin; the set is rejected if none exists.
    pub fn polytope(halfspaces: Vec<HalfSpace>) -> Result<Self, GeometryError> {
        let dim = halfspaces
            .first()
            .map(|h| h.normal.dim())
            .ok_or(GeometryError::NoConstraints)?;
        for h in &halfspaces {
            if h.normal.dim() != dim {
                return Err(GeometryError::Dimension {
                    expected: dim,
                    got: h.normal.dim(),
                });
            }
        }
        let mut set = TargetSet {
            dim,
            halfspaces,
            bounds: None,
            feasible: Point::zeros(dim),
        };
        let origin = Point::zeros(dim);
        let run = set.dykstra(&origin);
        let candidate = set.polish(&origin, &run.point).unwrap_or(run.point);
        let violation = set.max_violation(&candidate);
        if violation > FEASIBILITY_TOL {
            return Err(GeometryError::Empty { violation });
        }
        set.feasible = candidate;
        set.verify_feasible()?;
        Ok(set)
    }

    /// Same as [`TargetSet::polytope`] with a caller-supplied feasible point.
    pub fn polytope_with_point(
        halfspaces: Vec<HalfSpace>,
        feasible: Point,
    ) -> Result<Self, GeometryError> {
        if halfspaces.is_empty() {
            return Err(GeometryError::NoConstraints);
        }
        let dim = feasible.dim();
        feasible.check(dim)?;
        for h in &halfspaces {
            if h.normal.dim() != dim {
                return Err(GeometryError::Dimension {
                    expected: dim,
                    got: h.normal.dim(),
                });
            }
        }
        let set = TargetSet {
            dim,
            halfspaces,
            bounds: None,
            feasible,
        };
        set.verify_feasible()?;
        Ok(set)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn halfspaces(&self) -> &[HalfSpace] {
        &self.halfspaces
    }

    pub fn is_box(&self) -> bool {
        self.bounds.is_some()
    }

    /// Box corners, if this set was built with [`TargetSet::boxed`].
    pub fn bounds(&self) -> Option<(&Point, &Point)> {
        self.bounds.as_ref().map(|b| (&b.lower, &b.upper))
    }

    /// A point known to lie in the set.
    pub fn feasible_point(&self) -> &Point {
        &self.feasible
    }

    /// Largest constraint violation at `x` (non-positive inside the set).
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        self.halfspaces
            .iter()
            .map(|h| h.violation(x))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.max_violation(x) <= tol
    }

    fn verify_feasible(&self) -> Result<(), GeometryError> {
        let violation = self.max_violation(&self.feasible);
        if violation > FEASIBILITY_TOL {
            return Err(GeometryError::Empty { violation });
        }
        Ok(())
    }

    /// Euclidean projection `argmin_{b in T} |s - b|`.
    pub fn project(&self, s: &Point) -> Result<Point, GeometryError> {
        s.check(self.dim)?;
        if let Some(b) = &self.bounds {
            let coords = s
                .iter()
                .zip(b.lower.iter().zip(b.upper.iter()))
                .map(|(&v, (&lo, &hi))| v.clamp(lo, hi))
                .collect();
            return Ok(Point(coords));
        }
        if self.max_violation(s) <= 0.0 {
            return Ok(s.clone());
        }
        let run = self.dykstra(s);
        if let Some(exact) = self.polish(s, &run.point) {
            return Ok(exact);
        }
        if run.converged {
            Ok(run.point)
        } else {
            Err(GeometryError::NotConverged {
                cycles: DYKSTRA_MAX_CYCLES,
                residual: run.last_step,
            })
        }
    }

    /// Dykstra's alternating projections over the half-space list. Progress
    /// can stall when a constraint is nearly active at the solution, so the
    /// last iterate is returned even without convergence.
    fn dykstra(&self, s: &Point) -> DykstraRun {
        let m = self.halfspaces.len();
        let k = self.dim;
        let mut x = s.0.clone();
        let mut increments = vec![0.0; m * k];
        let mut y = vec![0.0; k];
        let mut last_step = f64::INFINITY;
        for _ in 0..DYKSTRA_MAX_CYCLES {
            // x can return to the same point after a cycle while the
            // increments are still moving, so both are measured
            let mut change = 0.0;
            for (i, h) in self.halfspaces.iter().enumerate() {
                let q = &mut increments[i * k..(i + 1) * k];
                for j in 0..k {
                    y[j] = x[j] + q[j];
                }
                x.copy_from_slice(&y);
                h.project_into(&mut x);
                for j in 0..k {
                    let next = y[j] - x[j];
                    change += (next - q[j]) * (next - q[j]);
                    q[j] = next;
                }
            }
            last_step = change.sqrt();
            if last_step < DYKSTRA_STEP_TOL && self.max_violation(&x) <= FEASIBILITY_TOL {
                return DykstraRun {
                    point: Point(x),
                    converged: true,
                    last_step,
                };
            }
        }
        DykstraRun {
            point: Point(x),
            converged: false,
            last_step,
        }
    }

    /// Exact projection from an approximate one: solves the equality-
    /// constrained problem on candidate active sets near `approx` and keeps
    /// the first solution meeting the KKT conditions of the full problem.
    /// Since the problem is strictly convex that solution is the projection.
    fn polish(&self, s: &Point, approx: &Point) -> Option<Point> {
        let mut near: Vec<&HalfSpace> = self
            .halfspaces
            .iter()
            .filter(|h| h.violation(approx) >= -NEAR_ACTIVE_TOL)
            .collect();
        // most nearly active first, so the common case is the first subset tried
        near.sort_by(|a, b| b.violation(approx).total_cmp(&a.violation(approx)));
        near.truncate(MAX_NEAR_ACTIVE);
        let tight = near
            .iter()
            .filter(|h| h.violation(approx) >= -ACTIVE_TOL)
            .count();
        if let Some(y) = self.kkt_point(s, &independent_prefix(&near[..tight], self.dim)) {
            return Some(y);
        }
        let mut chosen = Vec::with_capacity(self.dim);
        (1..=self.dim.min(near.len()))
            .find_map(|size| self.search_subsets(s, &near, size, 0, &mut chosen))
    }

    fn search_subsets<'a>(
        &self,
        s: &Point,
        pool: &[&'a HalfSpace],
        size: usize,
        from: usize,
        chosen: &mut Vec<&'a HalfSpace>,
    ) -> Option<Point> {
        if chosen.len() == size {
            return self.kkt_point(s, chosen);
        }
        for i in from..pool.len() {
            chosen.push(pool[i]);
            let found = self.search_subsets(s, pool, size, i + 1, chosen);
            chosen.pop();
            if found.is_some() {
                return found;
            }
        }
        None
    }

    /// Projection onto the intersection of the boundaries of `active`, if it
    /// is feasible and all multipliers are nonnegative.
    fn kkt_point(&self, s: &Point, active: &[&HalfSpace]) -> Option<Point> {
        if active.is_empty() {
            return None;
        }
        let g = gram(active);
        if g.determinant().abs() <= 1e-10 {
            return None;
        }
        let rhs = DVector::from_iterator(active.len(), active.iter().map(|h| h.violation(s)));
        let multipliers = g.lu().solve(&rhs)?;
        if multipliers.iter().any(|&mu| mu < -1e-12) {
            return None;
        }
        let mut y = s.0.clone();
        for (h, mu) in active.iter().zip(multipliers.iter()) {
            for (yi, ni) in y.iter_mut().zip(h.normal.iter()) {
                *yi -= mu * ni;
            }
        }
        if self.max_violation(&y) > 1e-12 * (1.0 + s.norm()) {
            return None;
        }
        Some(Point(y))
    }

    /// `D(s, T) = |s - project(s)|`.
    pub fn distance(&self, s: &Point) -> Result<f64, GeometryError> {
        Ok(s.distance_to(&self.project(s)?))
    }
}

struct DykstraRun {
    point: Point,
    converged: bool,
    last_step: f64,
}

/// Greedily keeps a linearly independent subset of at most `dim` rows.
fn independent_prefix<'a>(rows: &[&'a HalfSpace], dim: usize) -> Vec<&'a HalfSpace> {
    let mut kept: Vec<&HalfSpace> = Vec::new();
    for &h in rows {
        kept.push(h);
        if kept.len() > dim || gram(&kept).determinant().abs() <= 1e-10 {
            kept.pop();
        }
    }
    kept
}

fn gram(rows: &[&HalfSpace]) -> DMatrix<f64> {
    let n = rows.len();
    DMatrix::from_fn(n, n, |i, j| rows[i].normal.dot(&rows[j].normal))
}

/// Unit vector from a point toward its projection on the target, or zero
/// when the point is already within tolerance of the set.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringVector(Point);

impl SteeringVector {
    pub fn zero(dim: usize) -> Self {
        SteeringVector(Point::zeros(dim))
    }

    /// Normalises `direction`; a zero vector stays zero.
    pub fn from_direction(direction: Point) -> Self {
        let len = direction.norm();
        if len == 0.0 {
            SteeringVector(direction)
        } else {
            SteeringVector(direction.scale(1.0 / len))
        }
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&v| v == 0.0)
    }

    pub fn as_point(&self) -> &Point {
        &self.0
    }

    /// Scalarises a reward vector along this direction.
    pub fn scalarize(&self, r: &[f64]) -> f64 {
        self.0.dot(r)
    }
}

impl Deref for SteeringVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Projection, distance and steering direction evaluated together, as the
/// outer loop needs all three.
#[derive(Debug, Clone, PartialEq)]
pub struct Steering {
    pub projection: Point,
    pub distance: f64,
    pub lambda: SteeringVector,
}

pub fn project(s: &Point, target: &TargetSet) -> Result<Point, GeometryError> {
    target.project(s)
}

pub fn distance(s: &Point, target: &TargetSet) -> Result<f64, GeometryError> {
    target.distance(s)
}

/// Steering direction toward the target. The zero vector is returned when
/// `distance(s, T) <= eps_proj`, including exactly at the threshold.
pub fn steering_direction(
    s: &Point,
    target: &TargetSet,
    eps_proj: f64,
) -> Result<SteeringVector, GeometryError> {
    Ok(steer(s, target, eps_proj)?.lambda)
}

pub fn steer(s: &Point, target: &TargetSet, eps_proj: f64) -> Result<Steering, GeometryError> {
    if !(eps_proj > 0.0) {
        return Err(GeometryError::BadTolerance(eps_proj));
    }
    let projection = target.project(s)?;
    let gap = &projection - s;
    let distance = gap.norm();
    let lambda = if distance <= eps_proj {
        SteeringVector::zero(s.dim())
    } else {
        SteeringVector(gap.scale(1.0 / distance))
    };
    Ok(Steering {
        projection,
        distance,
        lambda,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn unit_box() -> TargetSet {
        TargetSet::boxed([1.0, 3.0].into(), [2.0, 4.0].into()).unwrap()
    }

    #[test]
    fn box_projection_nearest_corner() {
        assert_eq!(
            unit_box().project(&[0.0, 0.0].into()).unwrap(),
            [1.0, 3.0].into()
        );
    }

    #[test]
    fn box_projection_inside_is_identity() {
        let p: Point = [1.5, 3.5].into();
        assert_eq!(unit_box().project(&p).unwrap(), p);
    }

    #[test]
    fn single_halfspace_projection() {
        let t = TargetSet::polytope(vec![HalfSpace::new([1.0, 0.0].into(), 1.0).unwrap()]).unwrap();
        let p = t.project(&[3.0, 0.5].into()).unwrap();
        assert_abs_diff_eq!(p[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p[1], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn distances() {
        let t = TargetSet::boxed([3.0, 0.0].into(), [4.0, 1.0].into()).unwrap();
        assert_eq!(t.distance(&[0.0, 0.0].into()).unwrap(), 3.0);
        assert_eq!(unit_box().distance(&[1.2, 3.9].into()).unwrap(), 0.0);
        let t = TargetSet::boxed([1.0, 1.0].into(), [2.0, 2.0].into()).unwrap();
        assert_abs_diff_eq!(
            t.distance(&[0.0, 0.0].into()).unwrap(),
            2f64.sqrt(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn steering_examples() {
        let lam = steering_direction(&[0.0, 3.0].into(), &unit_box(), 1e-3).unwrap();
        assert_eq!(lam.as_point(), &Point::from([1.0, 0.0]));
        let lam = steering_direction(&[1.5, 3.5].into(), &unit_box(), 1e-3).unwrap();
        assert!(lam.is_zero());
        let t = TargetSet::boxed([3.0, 4.0].into(), [4.0, 5.0].into()).unwrap();
        let lam = steering_direction(&[0.0, 0.0].into(), &t, 1e-3).unwrap();
        assert_abs_diff_eq!(lam[0], 0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(lam[1], 0.8, epsilon = 1e-15);
    }

    #[test]
    fn steering_zero_within_tolerance_band() {
        // 5e-4 outside the box, tolerance 1e-3
        let lam = steering_direction(&[0.9995, 3.5].into(), &unit_box(), 1e-3).unwrap();
        assert!(lam.is_zero());
        // exactly on the threshold the zero branch wins
        let t = TargetSet::boxed([0.0, 0.0].into(), [1.0, 1.0].into()).unwrap();
        let lam = steering_direction(&[1.5, 0.5].into(), &t, 0.5).unwrap();
        assert!(lam.is_zero());
    }

    #[test]
    fn steering_rejects_nonpositive_tolerance() {
        assert!(matches!(
            steering_direction(&[0.0, 0.0].into(), &unit_box(), 0.0),
            Err(GeometryError::BadTolerance(_))
        ));
    }

    #[test]
    fn halfspace_normal_is_normalised() {
        let h = HalfSpace::new([3.0, 4.0].into(), 10.0).unwrap();
        assert_abs_diff_eq!(h.normal().norm(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(h.offset(), 2.0, epsilon = 1e-15);
        assert!(matches!(
            HalfSpace::new([0.0, 0.0].into(), 1.0),
            Err(GeometryError::ZeroNormal { .. })
        ));
    }

    #[test]
    fn empty_polytope_rejected() {
        let hs = vec![
            HalfSpace::new([1.0, 0.0].into(), 0.0).unwrap(),
            HalfSpace::new([-1.0, 0.0].into(), -1.0).unwrap(),
        ];
        assert!(matches!(
            TargetSet::polytope(hs),
            Err(GeometryError::Empty { .. })
        ));
    }

    #[test]
    fn inverted_box_rejected() {
        assert!(matches!(
            TargetSet::boxed([1.0, 0.0].into(), [0.0, 1.0].into()),
            Err(GeometryError::InvertedBox { axis: 0 })
        ));
    }

    #[test]
    fn dimension_and_finiteness_checked() {
        assert!(matches!(
            unit_box().project(&[0.0].into()),
            Err(GeometryError::Dimension {
                expected: 2,
                got: 1
            })
        ));
        assert!(matches!(
            unit_box().project(&[f64::NAN, 0.0].into()),
            Err(GeometryError::NonFinite)
        ));
    }

    #[test]
    fn polytope_matches_box_fast_path() {
        let hs = vec![
            HalfSpace::new([1.0, 0.0].into(), 2.0).unwrap(),
            HalfSpace::new([-1.0, 0.0].into(), -1.0).unwrap(),
            HalfSpace::new([0.0, 1.0].into(), 4.0).unwrap(),
            HalfSpace::new([0.0, -1.0].into(), -3.0).unwrap(),
        ];
        let poly = TargetSet::polytope(hs).unwrap();
        for s in [[0.0, 0.0], [5.0, 3.5], [1.5, 10.0], [-3.0, 7.0]] {
            let a = poly.project(&s.into()).unwrap();
            let b = unit_box().project(&s.into()).unwrap();
            assert!(a.distance_to(&b) < 1e-12, "{s:?}: {a:?} vs {b:?}");
        }
    }

    #[test]
    fn wedge_corner_projection() {
        // x + y <= 0 and x - y <= 0: wedge with apex at the origin
        let t = TargetSet::polytope(vec![
            HalfSpace::new([1.0, 1.0].into(), 0.0).unwrap(),
            HalfSpace::new([1.0, -1.0].into(), 0.0).unwrap(),
        ])
        .unwrap();
        let p = t.project(&[2.0, 0.5].into()).unwrap();
        assert!(p.norm() < 1e-12);
        let p = t.project(&[1.0, 3.0].into()).unwrap();
        assert_abs_diff_eq!(p[0], -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p[1], 1.0, epsilon = 1e-12);
    }
}
