//! Phase design for passive reflecting surfaces serving multiple users.
//!
//! The crate models the surface/feed/user geometry, assembles the composite
//! per-unit channel, and maximizes the minimum weighted received power over
//! the unit phase shifts by smoothing the inner max with its Moreau envelope
//! and driving the smoothing parameter from the active-set gap. Post-
//! processing covers discrete phase quantization, scattered-power pattern
//! grids, and wide-beam synthesis from packed sub-beam directions.
//!
//! # Example
//!
//! ```
//! use risbeam_core::{
//!     assemble_channel, build_grid_layout, solve_maxmin, Direction, PathLossMode,
//!     Scenario, SolverOptions, Terminal, WeightedUser,
//! };
//!
//! // 8x8 surface at 3.4 GHz, feed at broadside, two users at 15 m
//! let wavelength = risbeam_core::SPEED_OF_LIGHT / 3.4e9;
//! let ris = build_grid_layout(8, 8, wavelength / 2.0).unwrap();
//! let bs = Terminal::new(Direction::new(0.0, 0.0).unwrap(), 5.0).unwrap();
//! let users = vec![
//!     WeightedUser::new(Terminal::new(Direction::new(20.0, 0.0).unwrap(), 15.0).unwrap(), 1.0)
//!         .unwrap(),
//!     WeightedUser::new(Terminal::new(Direction::new(40.0, 180.0).unwrap(), 15.0).unwrap(), 2.0)
//!         .unwrap(),
//! ];
//! let scenario =
//!     Scenario::new(wavelength, 1.0, bs, users, ris, PathLossMode::AsWritten).unwrap();
//!
//! let channel = assemble_channel(&scenario).unwrap();
//! let solution = solve_maxmin(
//!     &channel,
//!     &scenario.weights(),
//!     scenario.tx_power,
//!     &SolverOptions::default(),
//! )
//! .unwrap();
//! assert!(solution.status.is_converged());
//! // the weighted powers are equalized: P_2/P_1 ≈ α_1/α_2 = 1/2
//! let ratio = solution.user_powers[1] / solution.user_powers[0];
//! assert!((ratio - 0.5).abs() < 0.01);
//! ```

pub mod beam;
pub mod channel;
pub mod geometry;
pub mod oracle;
pub mod solver;

pub use beam::{
    align_for_quantization, power_ratio_report, probe_power, quantize_phases, region_coverage,
    scattered_pattern, widebeam_directions, BeamError, CoverageReport, PatternGrid, RegionSpec,
};
pub use channel::{assemble_channel, bs_ris_gain, ris_ue_gain, ChannelError, ChannelMatrix};
pub use geometry::{
    arrival_distance, build_grid_layout, departure_delay, direction_vector, Direction,
    GeometryError, PathLossMode, RisLayout, Scenario, Terminal, WeightedUser, SPEED_OF_LIGHT,
};
pub use solver::{
    agd_minimize, max_component, moreau_gradient, moreau_value, objective_components,
    objective_jacobian, project_simplex, smoothed_objective, solve_maxmin, user_powers, AgdOutcome,
    PhaseConfig, SimplexPoint, Solution, SolverError, SolverOptions, SolverStatus,
};
