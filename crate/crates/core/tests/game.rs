mod common;

use approach_core::game::{adversary_best_response, fixtures, AdversaryOracle};
use approach_core::{
    ClimateEnv, ClimateParams, Environment, GameError, Point, SegmentOracle, SteeringVector,
    TabularGame,
};
use common::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tabular_text_round_trip(seed in any::<u64>(), n in 1usize..5, a1 in 1usize..4, a2 in 1usize..4, k in 2usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let game = random_game(&mut rng, n, a1, a2, k, 0.01);
        let back = TabularGame::parse(&game.to_text()).unwrap();
        prop_assert_eq!(back, game);
    }
}

#[test]
fn shipped_fixture_round_trips() {
    let game = fixtures::verification_game();
    assert_eq!(TabularGame::parse(&game.to_text()).unwrap(), game);
    assert_eq!(
        (
            game.num_states(),
            game.num_u1(),
            game.num_u2(),
            game.reward_dim()
        ),
        (3, 2, 2, 2)
    );
}

#[test]
fn parse_errors_carry_line_numbers() {
    let bad_row = "1 1 1 2\n# comment\n0.5 0.7\n";
    assert!(matches!(
        TabularGame::parse(bad_row),
        Err(GameError::Parse { line: 3, .. })
    ));
    let bad_number = "1 1 1 2\n0.5 x 1\n";
    assert!(matches!(
        TabularGame::parse(bad_number),
        Err(GameError::Parse { line: 2, .. })
    ));
    let missing = "2 1 1 2\n0.5 0.5 0.5 0.5\n";
    assert!(TabularGame::parse(missing).is_err());
    let not_stochastic = "1 1 1 2\n0.5 0.5 0.9\n";
    assert!(TabularGame::parse(not_stochastic).is_err());
}

#[test]
fn reducible_text_is_rejected() {
    let text = "2 1 1 2\n1 1 1 0\n0 0 0 1\n";
    assert!(matches!(
        TabularGame::parse(text),
        Err(GameError::Ergodicity(_))
    ));
}

fn quiet(mixing_rate: f64) -> ClimateEnv {
    ClimateEnv::new(ClimateParams {
        mixing_rate,
        noise_scale: 0.0,
        ..ClimateParams::default()
    })
    .unwrap()
}

#[test]
fn noiseless_climate_contracts_at_the_mixing_rate() {
    for gamma in [0.1, 0.3, 0.7] {
        let env = quiet(gamma);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let target = env.params().segments[2].at(1.0);
        let mut x = env.reset(&mut rng);
        let d0 = Point::from(x).distance_to(&target.into());
        for t in 1..=40 {
            x = env.step(&x, 2, 1.0, &mut rng).unwrap().next;
            let d = Point::from(x).distance_to(&target.into());
            let expected = (1.0 - gamma).powi(t) * d0;
            assert!(
                (d - expected).abs() <= 1e-9 * d0,
                "gamma {gamma} t {t}: {d} vs {expected}"
            );
        }
    }
}

#[test]
fn climate_noise_is_bounded_and_seeded() {
    let env = ClimateEnv::new(ClimateParams::default()).unwrap();
    let quiet_env = quiet(0.3);
    let mut a = ChaCha8Rng::seed_from_u64(9);
    let mut b = ChaCha8Rng::seed_from_u64(9);
    let x = [22.0, 50.0];
    for _ in 0..1000 {
        let noisy = env.step(&x, 1, 0.5, &mut a).unwrap();
        assert_eq!(noisy, env.step(&x, 1, 0.5, &mut b).unwrap());
        let clean = quiet_env
            .step(&x, 1, 0.5, &mut ChaCha8Rng::seed_from_u64(0))
            .unwrap();
        for axis in 0..2 {
            assert!((noisy.next[axis] - clean.next[axis]).abs() <= 0.5);
        }
        assert_eq!(noisy.reward, Point::from(noisy.next));
    }
}

#[test]
fn climate_state_stays_in_bounds() {
    let env = ClimateEnv::new(ClimateParams {
        noise_scale: 20.0,
        ..ClimateParams::default()
    })
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut x = env.reset(&mut rng);
    for i in 0..5000 {
        x = env.step(&x, i % 3, 1.0, &mut rng).unwrap().next;
        assert!((10.0..=35.0).contains(&x[0]) && (20.0..=80.0).contains(&x[1]));
    }
}

#[test]
fn climate_anchor_recurs_under_a_homing_adversary() {
    // with the adversary pinned to segment starts every action pulls toward
    // the anchor, so recurrence times are short
    let env = ClimateEnv::new(ClimateParams::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut x = env.reset(&mut rng);
    let mut visits = 0;
    let mut last = 0;
    let mut longest = 0;
    for t in 1..=20_000 {
        x = env.step(&x, t % 3, 0.0, &mut rng).unwrap().next;
        if env.is_recurrent(&x) {
            visits += 1;
            longest = longest.max(t - last);
            last = t;
        }
    }
    assert!(visits > 1000, "{visits}");
    assert!(longest < 200, "{longest}");
}

#[test]
fn segment_adversary_uses_the_endpoint_that_hurts_most() {
    let env = ClimateEnv::new(ClimateParams::default()).unwrap();
    let proj = Point::from([24.0, 50.0]);
    // average too hot: lambda points toward cooler temperatures
    let lambda = SteeringVector::from_direction([-1.0, 0.0].into());
    let cands = SegmentOracle.candidates(&env, &[25.0, 50.0], 0);
    assert_eq!(cands.len(), 2);
    // segment 0 runs from the anchor toward (31.5, 54); its far end scores
    // (31.5 - 24) * -1 = -7.5 against 0.5 at the anchor
    assert_eq!(
        adversary_best_response(&cands, &proj, &lambda).unwrap(),
        1.0
    );
    let cands = SegmentOracle.candidates(&env, &[25.0, 50.0], 1);
    assert_eq!(
        adversary_best_response(&cands, &proj, &lambda).unwrap(),
        0.0
    );
    assert!(SegmentOracle.candidates(&env, &[25.0, 50.0], 3).is_empty());
}

#[test]
fn invalid_climate_parameters_are_rejected() {
    let base = ClimateParams::default();
    assert!(ClimateEnv::new(ClimateParams {
        mixing_rate: 0.0,
        ..base.clone()
    })
    .is_err());
    assert!(ClimateEnv::new(ClimateParams {
        mixing_rate: 1.5,
        ..base.clone()
    })
    .is_err());
    assert!(ClimateEnv::new(ClimateParams {
        noise_scale: -1.0,
        ..base.clone()
    })
    .is_err());
    assert!(ClimateEnv::new(ClimateParams {
        anchor_radius: 0.0,
        ..base.clone()
    })
    .is_err());
    assert!(ClimateEnv::new(ClimateParams {
        start: [0.0, 0.0],
        ..base.clone()
    })
    .is_err());
    assert!(ClimateEnv::new(ClimateParams {
        segments: vec![],
        ..base
    })
    .is_err());
}
