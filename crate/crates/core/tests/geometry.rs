use approach_core::geometry::{steer, GeometryError, HalfSpace, Point, TargetSet};
use proptest::prelude::*;

const TOL: f64 = 1e-8;

fn point2() -> impl Strategy<Value = Point> {
    prop::array::uniform2(-6.0f64..6.0).prop_map(Point::from)
}

/// Square `[-2, 2]^2` cut by up to three random half-planes that keep the
/// origin strictly inside.
fn polytope() -> impl Strategy<Value = TargetSet> {
    prop::collection::vec((0.0f64..std::f64::consts::TAU, 0.1f64..1.5), 0..4).prop_map(|cuts| {
        let mut hs = Vec::new();
        for (axis, sign) in [(0, 1.0), (0, -1.0), (1, 1.0), (1, -1.0)] {
            let mut n = [0.0, 0.0];
            n[axis] = sign;
            hs.push(HalfSpace::new(n.into(), 2.0).unwrap());
        }
        for (angle, offset) in cuts {
            hs.push(HalfSpace::new([angle.cos(), angle.sin()].into(), offset).unwrap());
        }
        TargetSet::polytope(hs).unwrap()
    })
}

fn boxed() -> impl Strategy<Value = TargetSet> {
    (
        prop::array::uniform2(-3.0f64..3.0),
        prop::array::uniform2(0.0f64..3.0),
    )
        .prop_map(|(lo, w)| {
            TargetSet::boxed(lo.into(), [lo[0] + w[0], lo[1] + w[1]].into()).unwrap()
        })
}

fn any_target() -> impl Strategy<Value = TargetSet> {
    prop_oneof![polytope(), boxed()]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn projection_lands_in_the_set(t in any_target(), s in point2()) {
        let p = t.project(&s).unwrap();
        prop_assert!(t.contains(&p, TOL));
        if t.contains(&s, 0.0) {
            prop_assert!(p.distance_to(&s) < TOL);
        }
    }

    #[test]
    fn projection_is_idempotent(t in any_target(), s in point2()) {
        let p = t.project(&s).unwrap();
        let pp = t.project(&p).unwrap();
        prop_assert!(p.distance_to(&pp) < TOL);
    }

    #[test]
    fn projection_is_nonexpansive(t in any_target(), a in point2(), b in point2()) {
        let pa = t.project(&a).unwrap();
        let pb = t.project(&b).unwrap();
        prop_assert!(pa.distance_to(&pb) <= a.distance_to(&b) + TOL);
    }

    #[test]
    fn projection_satisfies_variational_inequality(
        t in any_target(),
        s in point2(),
        ys in prop::collection::vec(point2(), 20),
    ) {
        let p = t.project(&s).unwrap();
        let gap = &s - &p;
        let mut tested = 0;
        for y in ys.iter().chain(std::iter::once(t.feasible_point())) {
            if !t.contains(y, 0.0) {
                continue;
            }
            tested += 1;
            prop_assert!(gap.dot(&(y - &p)) <= TOL * (1.0 + y.distance_to(&p)));
        }
        prop_assert!(tested >= 1);
    }

    #[test]
    fn steering_is_unit_or_zero(t in any_target(), s in point2(), eps in 1e-6f64..0.5) {
        let st = steer(&s, &t, eps).unwrap();
        let d = t.distance(&s).unwrap();
        prop_assert!((st.distance - d).abs() < TOL);
        if d <= eps {
            prop_assert!(st.lambda.is_zero());
        } else {
            prop_assert!((st.lambda.as_point().norm() - 1.0).abs() < 1e-12);
            let toward = &st.projection - &s;
            prop_assert!((toward.dot(&st.lambda) - d).abs() < TOL);
        }
    }

    #[test]
    fn box_and_polytope_paths_agree(t in boxed(), s in point2()) {
        let (lo, hi) = t.bounds().unwrap();
        let faces = vec![
            HalfSpace::new([1.0, 0.0].into(), hi[0]).unwrap(),
            HalfSpace::new([-1.0, 0.0].into(), -lo[0]).unwrap(),
            HalfSpace::new([0.0, 1.0].into(), hi[1]).unwrap(),
            HalfSpace::new([0.0, -1.0].into(), -lo[1]).unwrap(),
        ];
        let general = TargetSet::polytope_with_point(faces, t.feasible_point().clone()).unwrap();
        prop_assert!(t.project(&s).unwrap().distance_to(&general.project(&s).unwrap()) < 1e-7);
    }
}

/// Pentagon with all interior angles 108 degrees.
fn pentagon() -> TargetSet {
    let hs = (0..5)
        .map(|i| {
            let a = std::f64::consts::TAU * i as f64 / 5.0 + 0.3;
            HalfSpace::new([a.cos(), a.sin()].into(), 1.0).unwrap()
        })
        .collect();
    TargetSet::polytope(hs).unwrap()
}

fn grid_distance(t: &TargetSet, s: &Point, h: f64) -> f64 {
    let steps = (4.0 / h) as i64;
    let mut best = f64::INFINITY;
    for i in 0..=steps {
        for j in 0..=steps {
            let y = Point::from([-2.0 + i as f64 * h, -2.0 + j as f64 * h]);
            if t.contains(&y, 0.0) {
                best = best.min(y.distance_to(s));
            }
        }
    }
    best
}

#[test]
fn projection_distance_matches_grid_search() {
    let h = 0.01;
    let targets = [
        pentagon(),
        TargetSet::boxed([-0.5, -1.0].into(), [1.2, 0.3].into()).unwrap(),
    ];
    let probes = [
        [3.0, 0.5],
        [-2.5, 2.5],
        [0.1, -3.0],
        [1.4, 1.4],
        [-3.0, -0.2],
        [0.0, 0.0],
    ];
    for t in &targets {
        for s in probes {
            let s = Point::from(s);
            let exact = t.distance(&s).unwrap();
            let grid = grid_distance(t, &s, h);
            assert!(grid >= exact - 1e-12, "grid {grid} below exact {exact}");
            assert!(grid - exact <= 2.0 * h, "grid {grid} exact {exact}");
        }
    }
}

#[test]
fn square_corner_projection() {
    let t = TargetSet::boxed([0.0, 0.0].into(), [1.0, 1.0].into()).unwrap();
    let p = t.project(&[2.0, 3.0].into()).unwrap();
    assert_eq!(p, Point::from([1.0, 1.0]));
    assert!((t.distance(&[2.0, 3.0].into()).unwrap() - 5f64.sqrt()).abs() < 1e-15);
}

#[test]
fn halfplane_projection_by_hand() {
    // x + y <= 1: the projection of (2, 2) drops 3/sqrt(2) along (1, 1)/sqrt(2)
    let t = TargetSet::polytope(vec![HalfSpace::new([1.0, 1.0].into(), 1.0).unwrap()]).unwrap();
    let p = t.project(&[2.0, 2.0].into()).unwrap();
    assert!(p.distance_to(&Point::from([0.5, 0.5])) < 1e-12);
}

#[test]
fn steering_threshold_is_inclusive() {
    let t = TargetSet::boxed([0.0, 0.0].into(), [1.0, 1.0].into()).unwrap();
    assert!(steer(&[1.5, 0.5].into(), &t, 0.5).unwrap().lambda.is_zero());
    let st = steer(&[1.5, 0.5].into(), &t, 0.4999).unwrap();
    assert_eq!(st.lambda.as_point(), &Point::from([-1.0, 0.0]));
}

#[test]
fn invalid_sets_are_rejected() {
    assert!(matches!(
        TargetSet::boxed([1.0, 0.0].into(), [0.0, 1.0].into()),
        Err(GeometryError::InvertedBox { axis: 0 })
    ));
    let empty = vec![
        HalfSpace::new([1.0, 0.0].into(), -1.0).unwrap(),
        HalfSpace::new([-1.0, 0.0].into(), -1.0).unwrap(),
    ];
    assert!(matches!(
        TargetSet::polytope(empty),
        Err(GeometryError::Empty { .. })
    ));
    assert!(HalfSpace::new([0.0, 0.0].into(), 1.0).is_err());
    assert!(steer(
        &[0.0, 0.0].into(),
        &TargetSet::boxed([0.0].into(), [1.0].into()).unwrap(),
        1e-3
    )
    .is_err());
    assert!(steer(
        &[0.0].into(),
        &TargetSet::boxed([0.0].into(), [1.0].into()).unwrap(),
        0.0
    )
    .is_err());
}

fn square_with_cuts(cuts: &[([f64; 2], f64)]) -> TargetSet {
    let mut hs = Vec::new();
    for n in [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]] {
        hs.push(HalfSpace::new(n.into(), 2.0).unwrap());
    }
    for &(n, b) in cuts {
        hs.push(HalfSpace::new(n.into(), b).unwrap());
    }
    TargetSet::polytope(hs).unwrap()
}

#[test]
fn projection_onto_a_vertex_with_a_nearly_active_neighbour() {
    let angle = 4.45896458797703f64;
    let n = [angle.cos(), angle.sin()];
    let b = 1.434649121010601;
    let t = square_with_cuts(&[
        (
            [2.898128219686428f64.cos(), 2.898128219686428f64.sin()],
            0.9258424372208953,
        ),
        (
            [3.1598197835525834f64.cos(), 3.1598197835525834f64.sin()],
            0.7734379946621476,
        ),
        (n, b),
    ]);
    // the answer sits where x = 2 meets the last cut, 3e-5 above y = -2
    let expected = [2.0, (b - 2.0 * n[0]) / n[1]];
    let p = t
        .project(&[1.8309632990120228, -3.917661673548162].into())
        .unwrap();
    assert!(
        (p[0] - expected[0]).abs() < 1e-12 && (p[1] - expected[1]).abs() < 1e-12,
        "{p:?}"
    );
}

#[test]
fn projection_when_the_sweep_revisits_its_start() {
    let n = [0.7225667569396071, 0.6913011512834176];
    let b = 1.9588999183803926;
    let t = square_with_cuts(&[(n, b)]);
    // vertex of the cut and y = 2; both multipliers are positive there
    let expected = [(b - 2.0 * n[1]) / n[0], 2.0];
    let p = t
        .project(&[2.746829661335271, 3.941343750580206].into())
        .unwrap();
    assert!(
        (p[0] - expected[0]).abs() < 1e-12 && (p[1] - expected[1]).abs() < 1e-12,
        "{p:?}"
    );
}
