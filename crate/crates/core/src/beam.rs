//! Beam post-processing: discrete phase quantization, scattered-power
//! evaluation over angular grids, sub-beam direction generation for
//! wide-beam synthesis, and power-ratio reporting.

use std::fmt;
use std::io::{self, Write};

use crate::channel::{assemble_channel, ChannelError};
use crate::geometry::{cross, norm, scale, Direction, GeometryError, Scenario, Terminal};
use crate::solver::{user_powers, PhaseConfig, SolverError};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq)]
pub enum BeamError {
    /// Quantization depth outside `[1, 8]` bits.
    BitsOutOfRange(u32),
    /// Sample lists must be nonempty, finite, ascending, and in range.
    InvalidSamples(String),
    NonPositiveRange(f64),
    /// The requested ring layout would place a sub-beam at or past the
    /// horizon.
    RegionExceedsElevation {
        theta_deg: f64,
    },
    InvalidRegion(String),
    /// Ratios are relative to the first power, which must be positive.
    ZeroLeadingPower,
    NonFinitePower,
    /// The whole grid evaluated to zero power; normalization is undefined.
    ZeroPatternMaximum,
    Channel(ChannelError),
    Solver(SolverError),
    Geometry(GeometryError),
}

impl fmt::Display for BeamError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::BitsOutOfRange(b) => write!(f, "bit depth {b} outside [1, 8]"),
            Self::InvalidSamples(msg) => write!(f, "invalid sample grid: {msg}"),
            Self::NonPositiveRange(r) => write!(f, "evaluation range {r} m must be > 0"),
            Self::RegionExceedsElevation { theta_deg } => {
                write!(
                    f,
                    "sub-beam elevation {theta_deg} deg reaches past the horizon"
                )
            }
            Self::InvalidRegion(msg) => write!(f, "invalid region: {msg}"),
            Self::ZeroLeadingPower => write!(f, "first power must be positive for ratios"),
            Self::NonFinitePower => write!(f, "powers must be finite and nonnegative"),
            Self::ZeroPatternMaximum => write!(f, "pattern maximum is zero"),
            Self::Channel(e) => write!(f, "{e}"),
            Self::Solver(e) => write!(f, "{e}"),
            Self::Geometry(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for BeamError {}

impl From<ChannelError> for BeamError {
    fn from(e: ChannelError) -> Self {
        Self::Channel(e)
    }
}

impl From<SolverError> for BeamError {
    fn from(e: SolverError) -> Self {
        Self::Solver(e)
    }
}

impl From<GeometryError> for BeamError {
    fn from(e: GeometryError) -> Self {
        Self::Geometry(e)
    }
}

// ── quantization ────────────────────────────────────────────────────────────

/// Round each phase to the nearest of `2^bits` uniformly spaced levels with
/// wrap-around distance. Exact midpoints round toward the lower level. The
/// per-unit error is at most `π/2^bits`.
pub fn quantize_phases(phases: &PhaseConfig, bits: u32) -> Result<PhaseConfig, BeamError> {
    if !(1..=8).contains(&bits) {
        return Err(BeamError::BitsOutOfRange(bits));
    }
    let levels = (1u32 << bits) as f64;
    let step = TWO_PI / levels;
    let quantized: Vec<f64> = phases
        .phases()
        .iter()
        .map(|&w| {
            let q = w / step;
            let fract = q - q.floor();
            // round half down: an exact midpoint keeps the lower level
            let m = if fract > 0.5 {
                q.floor() + 1.0
            } else {
                q.floor()
            };
            let m = (m as i64).rem_euclid(levels as i64) as f64;
            m * step
        })
        .collect();
    Ok(PhaseConfig::with_bit_depth(quantized, bits))
}

/// Rotate all phases by the common offset that minimizes the total squared
/// wrap distance to the `2^bits`-level grid. Received powers are invariant
/// under a global rotation, so this picks the representative of a solution
/// that rounds onto hardware levels with the least distortion; phases
/// already on the grid are returned unchanged.
pub fn align_for_quantization(phases: &PhaseConfig, bits: u32) -> Result<PhaseConfig, BeamError> {
    if !(1..=8).contains(&bits) {
        return Err(BeamError::BitsOutOfRange(bits));
    }
    let step = TWO_PI / (1u32 << bits) as f64;
    // signed distance from (w + c) to its nearest level, in (−step/2, step/2]
    let signed_err = |w: f64, c: f64| -> f64 {
        let r = (w + c).rem_euclid(step);
        if r > step / 2.0 {
            r - step
        } else {
            r
        }
    };
    let total = |c: f64| -> f64 {
        phases
            .phases()
            .iter()
            .map(|&w| {
                let e = signed_err(w, c);
                e * e
            })
            .sum()
    };

    let scan = 4096;
    let mut best_c = 0.0;
    let mut best_e = total(0.0);
    for j in 1..scan {
        let c = j as f64 * step / scan as f64;
        let e = total(c);
        if e < best_e {
            best_e = e;
            best_c = c;
        }
    }
    // the error is piecewise quadratic in the offset; finish with the exact
    // minimum of the segment the scan landed in
    let mean = phases
        .phases()
        .iter()
        .map(|&w| signed_err(w, best_c))
        .sum::<f64>()
        / phases.len().max(1) as f64;
    let refined = best_c - mean;
    if total(refined) < best_e {
        best_c = refined;
    }
    Ok(PhaseConfig::new(
        phases.phases().iter().map(|w| w + best_c).collect(),
    ))
}

// ── scattered-power patterns ────────────────────────────────────────────────

/// Received power sampled over an (elevation, azimuth) grid at a fixed
/// probe range.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternGrid {
    theta_samples_deg: Vec<f64>,
    phi_samples_deg: Vec<f64>,
    /// Row-major over theta then phi.
    power: Vec<f64>,
    range_m: f64,
    normalized: bool,
}

impl PatternGrid {
    pub fn theta_samples_deg(&self) -> &[f64] {
        &self.theta_samples_deg
    }

    pub fn phi_samples_deg(&self) -> &[f64] {
        &self.phi_samples_deg
    }

    pub fn range_m(&self) -> f64 {
        self.range_m
    }

    pub fn normalized(&self) -> bool {
        self.normalized
    }

    pub fn power_at(&self, theta_index: usize, phi_index: usize) -> f64 {
        self.power[theta_index * self.phi_samples_deg.len() + phi_index]
    }

    pub fn max_power(&self) -> f64 {
        self.power.iter().cloned().fold(0.0, f64::max)
    }

    /// Grid cell with the highest power, as `(theta_index, phi_index)`.
    pub fn argmax(&self) -> (usize, usize) {
        let mut best = (0, 0);
        let mut best_v = f64::NEG_INFINITY;
        for a in 0..self.theta_samples_deg.len() {
            for b in 0..self.phi_samples_deg.len() {
                let v = self.power_at(a, b);
                if v > best_v {
                    best_v = v;
                    best = (a, b);
                }
            }
        }
        best
    }

    /// CSV export: one row per cell, row-major over theta then phi, with the
    /// power also in dB relative to the grid maximum.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "theta_deg,phi_deg,power,power_db_normalized")?;
        let max = self.max_power();
        for (a, &theta) in self.theta_samples_deg.iter().enumerate() {
            for (b, &phi) in self.phi_samples_deg.iter().enumerate() {
                let p = self.power_at(a, b);
                let db = if p > 0.0 && max > 0.0 {
                    10.0 * (p / max).log10()
                } else {
                    -300.0
                };
                writeln!(out, "{theta:?},{phi:?},{p:?},{db:?}")?;
            }
        }
        Ok(())
    }
}

fn check_samples(samples: &[f64], upper: f64, name: &str) -> Result<(), BeamError> {
    if samples.is_empty() {
        return Err(BeamError::InvalidSamples(format!("{name} list is empty")));
    }
    for pair in samples.windows(2) {
        if pair[1] <= pair[0] {
            return Err(BeamError::InvalidSamples(format!(
                "{name} must be ascending"
            )));
        }
    }
    for &s in samples {
        if !s.is_finite() || s < 0.0 || s >= upper {
            return Err(BeamError::InvalidSamples(format!(
                "{name} value {s} outside [0, {upper})"
            )));
        }
    }
    Ok(())
}

/// Evaluate the received power of a probe terminal at every grid direction,
/// under the scenario's feed, surface, and path-loss mode. With `normalize`
/// the grid is divided by its maximum.
pub fn scattered_pattern(
    scenario: &Scenario,
    phases: &PhaseConfig,
    theta_samples_deg: &[f64],
    phi_samples_deg: &[f64],
    range_m: f64,
    normalize: bool,
) -> Result<PatternGrid, BeamError> {
    check_samples(theta_samples_deg, 90.0, "theta")?;
    check_samples(phi_samples_deg, 360.0, "phi")?;
    if !(range_m.is_finite() && range_m > 0.0) {
        return Err(BeamError::NonPositiveRange(range_m));
    }

    let mut power = Vec::with_capacity(theta_samples_deg.len() * phi_samples_deg.len());
    for &theta in theta_samples_deg {
        for &phi in phi_samples_deg {
            power.push(probe_power(scenario, phases, theta, phi, range_m)?);
        }
    }
    if normalize {
        let max = power.iter().cloned().fold(0.0f64, f64::max);
        if max <= 0.0 {
            return Err(BeamError::ZeroPatternMaximum);
        }
        for p in &mut power {
            *p /= max;
        }
    }
    Ok(PatternGrid {
        theta_samples_deg: theta_samples_deg.to_vec(),
        phi_samples_deg: phi_samples_deg.to_vec(),
        power,
        range_m,
        normalized: normalize,
    })
}

/// Received power of a single probe terminal at the given direction and
/// range, under the scenario's physics and the given phases.
pub fn probe_power(
    scenario: &Scenario,
    phases: &PhaseConfig,
    theta_deg: f64,
    phi_deg: f64,
    range_m: f64,
) -> Result<f64, BeamError> {
    let probe = Terminal::new(Direction::new(theta_deg, phi_deg)?, range_m)?;
    let mut single = scenario.clone();
    single.users = vec![crate::geometry::WeightedUser {
        terminal: probe,
        weight: 1.0,
    }];
    let h = assemble_channel(&single)?;
    Ok(user_powers(&h, phases, scenario.tx_power)?[0])
}

// ── wide-beam sub-directions ────────────────────────────────────────────────

/// A circular angular region to cover with closely packed sub-beams.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionSpec {
    pub center: Direction,
    pub angular_radius_deg: f64,
    pub sub_beam_count: usize,
}

impl RegionSpec {
    pub fn new(
        center: Direction,
        angular_radius_deg: f64,
        sub_beam_count: usize,
    ) -> Result<Self, BeamError> {
        if !(angular_radius_deg.is_finite() && angular_radius_deg > 0.0) {
            return Err(BeamError::InvalidRegion(format!(
                "angular radius {angular_radius_deg} deg must be > 0"
            )));
        }
        if sub_beam_count == 0 {
            return Err(BeamError::InvalidRegion(
                "sub-beam count must be >= 1".into(),
            ));
        }
        Ok(Self {
            center,
            angular_radius_deg,
            sub_beam_count,
        })
    }
}

/// Sub-beam directions packed in concentric hexagonal rings around the
/// region center: one center beam, then rings of 6, 12, 18, … points at
/// evenly spaced radii up to the region radius (37 beams fill exactly three
/// rings). Fails if any generated direction reaches the horizon.
pub fn widebeam_directions(region: &RegionSpec) -> Result<Vec<Direction>, BeamError> {
    let count = region.sub_beam_count;
    let mut dirs = Vec::with_capacity(count);
    dirs.push(region.center);
    if count == 1 {
        return Ok(dirs);
    }

    // number of full-capacity rings needed: 1 + 6 + 12 + ... + 6R >= count
    let mut rings = 0usize;
    let mut capacity = 1usize;
    while capacity < count {
        rings += 1;
        capacity += 6 * rings;
    }

    let u_c = region.center.unit_vector();
    // tangent basis at the center direction
    let e1 = if region.center.theta_deg() < 1e-9 {
        [1.0, 0.0, 0.0]
    } else {
        let c = cross([0.0, 0.0, 1.0], u_c);
        scale(c, 1.0 / norm(c))
    };
    let e2 = cross(u_c, e1);

    let mut remaining = count - 1;
    for ring in 1..=rings {
        let on_ring = remaining.min(6 * ring);
        let rho = (region.angular_radius_deg * ring as f64 / rings as f64).to_radians();
        for m in 0..on_ring {
            let xi = TWO_PI * m as f64 / on_ring as f64;
            let mut v = [0.0; 3];
            for a in 0..3 {
                v[a] = rho.cos() * u_c[a] + rho.sin() * (xi.cos() * e1[a] + xi.sin() * e2[a]);
            }
            let dir =
                Direction::from_unit_vector(v).map_err(|_| BeamError::RegionExceedsElevation {
                    theta_deg: v[2].clamp(-1.0, 1.0).acos().to_degrees(),
                })?;
            dirs.push(dir);
        }
        remaining -= on_ring;
    }
    debug_assert_eq!(dirs.len(), count);
    Ok(dirs)
}

/// Power statistics over a disc of directions inside a region, at a fixed
/// probe range: minimum, maximum, and their ratio in dB.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageReport {
    pub range_m: f64,
    pub min_power: f64,
    pub max_power: f64,
    pub ripple_db: f64,
    pub sample_count: usize,
}

/// Sample the region on a dense polar disc (center plus 8 rings of 24
/// azimuths) and report min/max/ripple of the received power.
pub fn region_coverage(
    scenario: &Scenario,
    phases: &PhaseConfig,
    region: &RegionSpec,
    range_m: f64,
) -> Result<CoverageReport, BeamError> {
    if !(range_m.is_finite() && range_m > 0.0) {
        return Err(BeamError::NonPositiveRange(range_m));
    }
    let u_c = region.center.unit_vector();
    let e1 = if region.center.theta_deg() < 1e-9 {
        [1.0, 0.0, 0.0]
    } else {
        let c = cross([0.0, 0.0, 1.0], u_c);
        scale(c, 1.0 / norm(c))
    };
    let e2 = cross(u_c, e1);

    let mut min_power = f64::INFINITY;
    let mut max_power = f64::NEG_INFINITY;
    let mut count = 0usize;
    let rings = 8usize;
    for ring in 0..=rings {
        let rho = (region.angular_radius_deg * ring as f64 / rings as f64).to_radians();
        let azimuths = if ring == 0 { 1 } else { 24 };
        for m in 0..azimuths {
            let xi = TWO_PI * m as f64 / azimuths as f64;
            let mut v = [0.0; 3];
            for a in 0..3 {
                v[a] = rho.cos() * u_c[a] + rho.sin() * (xi.cos() * e1[a] + xi.sin() * e2[a]);
            }
            let dir =
                Direction::from_unit_vector(v).map_err(|_| BeamError::RegionExceedsElevation {
                    theta_deg: v[2].clamp(-1.0, 1.0).acos().to_degrees(),
                })?;
            let p = probe_power(scenario, phases, dir.theta_deg(), dir.phi_deg(), range_m)?;
            min_power = min_power.min(p);
            max_power = max_power.max(p);
            count += 1;
        }
    }
    let ripple_db = if min_power > 0.0 {
        10.0 * (max_power / min_power).log10()
    } else {
        f64::INFINITY
    };
    Ok(CoverageReport {
        range_m,
        min_power,
        max_power,
        ripple_db,
        sample_count: count,
    })
}

// ── ratio reporting ─────────────────────────────────────────────────────────

/// Normalize powers so the first entry is one.
pub fn power_ratio_report(powers: &[f64]) -> Result<Vec<f64>, BeamError> {
    if powers.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(BeamError::NonFinitePower);
    }
    let first = *powers.first().ok_or(BeamError::ZeroLeadingPower)?;
    if first <= 0.0 {
        return Err(BeamError::ZeroLeadingPower);
    }
    Ok(powers.iter().map(|p| p / first).collect())
}
