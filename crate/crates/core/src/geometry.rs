//! Physical layout of the reflecting surface, the feed, and the served users,
//! plus the purely geometric quantities the channel model is built from:
//! direction vectors, per-unit arrival distances, and departure delay
//! distances via projection onto the reference plane.
//!
//! Conventions: the surface lies in the `z = 0` plane with broadside along
//! `+z`; elevation is measured from the surface normal, azimuth from the
//! `+x` axis. Angles cross the API boundary in degrees and are converted to
//! radians exactly once, internally.

use std::fmt;

/// Exact speed of light in m/s, used for frequency/wavelength conversion.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Errors from constructing or combining geometric values.
#[derive(Debug, Clone, PartialEq)]
pub enum GeometryError {
    /// Elevation outside `[0, 90)` degrees.
    ElevationOutOfRange(f64),
    /// Angle was NaN or infinite.
    NonFiniteAngle(f64),
    /// A distance that must be strictly positive was not.
    NonPositiveDistance(f64),
    /// A user weight that must be strictly positive was not.
    NonPositiveWeight(f64),
    /// Wavelength must be strictly positive.
    NonPositiveWavelength(f64),
    /// Transmit power must be strictly positive.
    NonPositiveTxPower(f64),
    /// Grid dimensions must be at least 1.
    EmptyGridDimension,
    /// Unit spacing must be strictly positive.
    NonPositiveSpacing(f64),
    /// A scenario needs at least one user.
    NoUsers,
    /// A surface unit coincides with the source phase center.
    UnitCoincidesWithSource { unit_index: usize },
    /// A unit vector could not be derived (zero or non-finite input).
    InvalidVector,
}

impl fmt::Display for GeometryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::ElevationOutOfRange(t) => {
                write!(f, "elevation {t} deg outside [0, 90)")
            }
            Self::NonFiniteAngle(a) => write!(f, "angle {a} is not finite"),
            Self::NonPositiveDistance(d) => write!(f, "distance {d} m must be > 0"),
            Self::NonPositiveWeight(w) => write!(f, "weight {w} must be > 0"),
            Self::NonPositiveWavelength(w) => write!(f, "wavelength {w} m must be > 0"),
            Self::NonPositiveTxPower(p) => write!(f, "transmit power {p} must be > 0"),
            Self::EmptyGridDimension => write!(f, "grid rows and cols must be >= 1"),
            Self::NonPositiveSpacing(s) => write!(f, "unit spacing {s} m must be > 0"),
            Self::NoUsers => write!(f, "scenario needs at least one user"),
            Self::UnitCoincidesWithSource { unit_index } => {
                write!(
                    f,
                    "unit {unit_index} coincides with the source phase center"
                )
            }
            Self::InvalidVector => write!(f, "cannot normalize a zero or non-finite vector"),
        }
    }
}

impl std::error::Error for GeometryError {}

// ── small 3-vector helpers ──────────────────────────────────────────────────

pub(crate) fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn scale(a: [f64; 3], s: f64) -> [f64; 3] {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub(crate) fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

// ── directions ──────────────────────────────────────────────────────────────

/// A look direction given by elevation from the surface normal and azimuth
/// from the `+x` axis, both in degrees. Elevation is restricted to
/// `[0, 90)` (the open half-space in front of the surface); azimuth is
/// normalized into `[0, 360)` on construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction {
    theta_deg: f64,
    phi_deg: f64,
}

impl Direction {
    pub fn new(theta_deg: f64, phi_deg: f64) -> Result<Self, GeometryError> {
        if !theta_deg.is_finite() {
            return Err(GeometryError::NonFiniteAngle(theta_deg));
        }
        if !phi_deg.is_finite() {
            return Err(GeometryError::NonFiniteAngle(phi_deg));
        }
        if !(0.0..90.0).contains(&theta_deg) {
            return Err(GeometryError::ElevationOutOfRange(theta_deg));
        }
        let mut phi = phi_deg.rem_euclid(360.0);
        if phi >= 360.0 {
            // rem_euclid can round up to the modulus for tiny negative inputs
            phi = 0.0;
        }
        Ok(Self {
            theta_deg,
            phi_deg: phi,
        })
    }

    /// Recover a direction from a unit vector pointing into `z > 0`.
    pub fn from_unit_vector(v: [f64; 3]) -> Result<Self, GeometryError> {
        let n = norm(v);
        if !n.is_finite() || n < 1e-12 {
            return Err(GeometryError::InvalidVector);
        }
        let w = scale(v, 1.0 / n);
        let theta = w[2].clamp(-1.0, 1.0).acos().to_degrees();
        let phi = w[1].atan2(w[0]).to_degrees();
        Self::new(theta, phi)
    }

    pub fn theta_deg(&self) -> f64 {
        self.theta_deg
    }

    pub fn phi_deg(&self) -> f64 {
        self.phi_deg
    }

    /// Unit direction vector `[sin θ cos φ, sin θ sin φ, cos θ]`.
    pub fn unit_vector(&self) -> [f64; 3] {
        let theta = self.theta_deg.to_radians();
        let phi = self.phi_deg.to_radians();
        [
            theta.sin() * phi.cos(),
            theta.sin() * phi.sin(),
            theta.cos(),
        ]
    }
}

/// Unit direction vector for a [`Direction`].
pub fn direction_vector(d: &Direction) -> [f64; 3] {
    d.unit_vector()
}

// ── surface layout ──────────────────────────────────────────────────────────

/// Rectangular lattice of reflecting units in the `z = 0` plane, centered at
/// the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct RisLayout {
    rows: usize,
    cols: usize,
    spacing_m: f64,
    unit_positions: Vec<[f64; 3]>,
}

impl RisLayout {
    /// Build a `rows x cols` grid with the given inter-unit spacing. The grid
    /// is centered so the positions sum to zero.
    pub fn grid(rows: usize, cols: usize, spacing_m: f64) -> Result<Self, GeometryError> {
        if rows == 0 || cols == 0 {
            return Err(GeometryError::EmptyGridDimension);
        }
        if !(spacing_m.is_finite() && spacing_m > 0.0) {
            return Err(GeometryError::NonPositiveSpacing(spacing_m));
        }
        let mut unit_positions = Vec::with_capacity(rows * cols);
        let row_off = (rows as f64 - 1.0) / 2.0;
        let col_off = (cols as f64 - 1.0) / 2.0;
        for r in 0..rows {
            for c in 0..cols {
                let x = (c as f64 - col_off) * spacing_m;
                let y = (r as f64 - row_off) * spacing_m;
                unit_positions.push([x, y, 0.0]);
            }
        }
        Ok(Self {
            rows,
            cols,
            spacing_m,
            unit_positions,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn spacing_m(&self) -> f64 {
        self.spacing_m
    }

    pub fn n_units(&self) -> usize {
        self.unit_positions.len()
    }

    pub fn positions(&self) -> &[[f64; 3]] {
        &self.unit_positions
    }
}

/// Build a centered rectangular lattice in the `z = 0` plane.
pub fn build_grid_layout(
    rows: usize,
    cols: usize,
    spacing_m: f64,
) -> Result<RisLayout, GeometryError> {
    RisLayout::grid(rows, cols, spacing_m)
}

// ── terminals and scenarios ─────────────────────────────────────────────────

/// A transmitter or receiver placed at `distance_m` along a direction from
/// the surface center.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Terminal {
    pub direction: Direction,
    pub distance_m: f64,
}

impl Terminal {
    pub fn new(direction: Direction, distance_m: f64) -> Result<Self, GeometryError> {
        if !(distance_m.is_finite() && distance_m > 0.0) {
            return Err(GeometryError::NonPositiveDistance(distance_m));
        }
        Ok(Self {
            direction,
            distance_m,
        })
    }

    /// Cartesian position, `distance · unit_vector`.
    pub fn position(&self) -> [f64; 3] {
        scale(self.direction.unit_vector(), self.distance_m)
    }
}

/// A served user with its max-min weight factor. Larger weights push the
/// solver to allocate proportionally less power to the user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedUser {
    pub terminal: Terminal,
    pub weight: f64,
}

impl WeightedUser {
    pub fn new(terminal: Terminal, weight: f64) -> Result<Self, GeometryError> {
        if !(weight.is_finite() && weight > 0.0) {
            return Err(GeometryError::NonPositiveWeight(weight));
        }
        Ok(Self { terminal, weight })
    }
}

/// Path-loss convention for the unit-to-user hop; see
/// [`crate::channel::ris_ue_gain`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PathLossMode {
    /// Amplitude `λ / (4π (d_dep + d_k))`.
    #[default]
    AsWritten,
    /// Amplitude `λ / (4π d_dep)`.
    Standard,
}

/// Full physical description of one design problem: carrier, transmit power,
/// source terminal, weighted users, and surface layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub wavelength_m: f64,
    pub tx_power: f64,
    pub bs: Terminal,
    pub users: Vec<WeightedUser>,
    pub ris: RisLayout,
    pub path_loss_mode: PathLossMode,
}

impl Scenario {
    pub fn new(
        wavelength_m: f64,
        tx_power: f64,
        bs: Terminal,
        users: Vec<WeightedUser>,
        ris: RisLayout,
        path_loss_mode: PathLossMode,
    ) -> Result<Self, GeometryError> {
        if !(wavelength_m.is_finite() && wavelength_m > 0.0) {
            return Err(GeometryError::NonPositiveWavelength(wavelength_m));
        }
        if !(tx_power.is_finite() && tx_power > 0.0) {
            return Err(GeometryError::NonPositiveTxPower(tx_power));
        }
        if users.is_empty() {
            return Err(GeometryError::NoUsers);
        }
        Ok(Self {
            wavelength_m,
            tx_power,
            bs,
            users,
            ris,
            path_loss_mode,
        })
    }

    pub fn n_units(&self) -> usize {
        self.ris.n_units()
    }

    pub fn n_users(&self) -> usize {
        self.users.len()
    }

    /// User weight factors in user order.
    pub fn weights(&self) -> Vec<f64> {
        self.users.iter().map(|u| u.weight).collect()
    }
}

// ── geometric quantities ────────────────────────────────────────────────────

/// Euclidean distance from the source phase center to a surface unit.
pub fn arrival_distance(bs: &Terminal, unit_position: [f64; 3]) -> Result<f64, GeometryError> {
    let d = norm(sub(bs.position(), unit_position));
    if d <= 1e-12 {
        return Err(GeometryError::UnitCoincidesWithSource { unit_index: 0 });
    }
    Ok(d)
}

/// Delay distance of a unit relative to a user in direction `u` at range
/// `d_k`: the unit's position is projected onto the plane through the origin
/// normal to `u`, and the signed offset of that projection is added to the
/// user range. Algebraically this equals `d_k − ⟨u, r⟩`.
pub fn departure_delay(u: [f64; 3], unit_position: [f64; 3], d_k: f64) -> f64 {
    debug_assert!((norm(u) - 1.0).abs() < 1e-9, "u must be a unit vector");
    let along = dot(u, unit_position);
    // projection of r onto the reference plane, then the signed step back
    let projected = sub(unit_position, scale(u, along));
    let offset = sub(projected, unit_position);
    let delay = sign(dot(u, offset)) * norm(offset) + d_k;
    debug_assert!(
        (delay - (d_k - along)).abs() <= 1e-12 * d_k.abs().max(1.0),
        "projection construction disagrees with closed form"
    );
    delay
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}
