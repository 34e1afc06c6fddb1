//! Shared fixtures for the benchmarks: physical scenarios and synthetic
//! channel matrices of configurable size.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use risbeam_core::{
    build_grid_layout, ChannelMatrix, Direction, PathLossMode, Scenario, Terminal, WeightedUser,
    SPEED_OF_LIGHT,
};

/// A surface of `rows x rows` units at 3.4 GHz serving `n_users` users on a
/// 20-degree-elevation ring at 15 m.
pub fn ring_scenario(rows: usize, n_users: usize) -> Scenario {
    let lambda = SPEED_OF_LIGHT / 3.4e9;
    let ris = build_grid_layout(rows, rows, lambda / 2.0).unwrap();
    let users = (0..n_users)
        .map(|k| {
            let phi = 360.0 * k as f64 / n_users as f64;
            WeightedUser::new(
                Terminal::new(Direction::new(20.0, phi).unwrap(), 15.0).unwrap(),
                1.0,
            )
            .unwrap()
        })
        .collect();
    Scenario::new(
        lambda,
        1.0,
        Terminal::new(Direction::new(0.0, 0.0).unwrap(), 5.0).unwrap(),
        users,
        ris,
        PathLossMode::AsWritten,
    )
    .unwrap()
}

/// Synthetic unit-scale channel with seeded entries.
pub fn synthetic_channel(seed: u64, n_units: usize, n_users: usize) -> ChannelMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let entries = (0..n_units * n_users)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    ChannelMatrix::from_entries(n_units, n_users, entries).unwrap()
}

/// Seeded vector with entries in `[-scale, scale]`.
pub fn random_vector(seed: u64, n: usize, scale: f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(-scale..scale)).collect()
}
