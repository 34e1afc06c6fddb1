//! Composite environmental channel between the source and each user through
//! every surface unit: a spherical-wavefront arrival gain times a
//! planar-wavefront departure gain, `h = g_dep · g_arr`, exposed with
//! magnitude/phase accessors.

use std::fmt;
use std::io::{self, Write};

use num_complex::Complex64;

use crate::geometry::{arrival_distance, departure_delay, GeometryError, PathLossMode, Scenario};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Errors from channel assembly.
#[derive(Debug, Clone, PartialEq)]
pub enum ChannelError {
    /// Arrival distance must be strictly positive.
    NonPositiveArrivalDistance(f64),
    /// The path-loss denominator came out non-positive.
    NonPositivePathLossDenominator(f64),
    /// Wavelength must be strictly positive.
    NonPositiveWavelength(f64),
    Geometry(GeometryError),
}

impl fmt::Display for ChannelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NonPositiveArrivalDistance(d) => {
                write!(f, "arrival distance {d} m must be > 0")
            }
            Self::NonPositivePathLossDenominator(d) => {
                write!(f, "path-loss denominator {d} m must be > 0")
            }
            Self::NonPositiveWavelength(w) => write!(f, "wavelength {w} m must be > 0"),
            Self::Geometry(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for ChannelError {}

impl From<GeometryError> for ChannelError {
    fn from(e: GeometryError) -> Self {
        Self::Geometry(e)
    }
}

/// Gain of the source-to-unit hop: amplitude `λ/(4π d)` and phase delay
/// `2π d / λ` with a positive exponent.
pub fn bs_ris_gain(d_arr: f64, wavelength: f64) -> Result<Complex64, ChannelError> {
    if !(wavelength.is_finite() && wavelength > 0.0) {
        return Err(ChannelError::NonPositiveWavelength(wavelength));
    }
    if !(d_arr.is_finite() && d_arr > 0.0) {
        return Err(ChannelError::NonPositiveArrivalDistance(d_arr));
    }
    let magnitude = wavelength / (4.0 * std::f64::consts::PI * d_arr);
    Ok(Complex64::from_polar(
        magnitude,
        TWO_PI * d_arr / wavelength,
    ))
}

/// Gain of the unit-to-user hop for a delay distance `d_dep` and user range
/// `d_k`. The phase is `2π d_dep / λ`; the amplitude denominator depends on
/// the [`PathLossMode`]: `d_dep + d_k` as written in the source model, or
/// plain `d_dep` for the conventional spherical spreading law.
pub fn ris_ue_gain(
    d_dep: f64,
    d_k: f64,
    wavelength: f64,
    mode: PathLossMode,
) -> Result<Complex64, ChannelError> {
    if !(wavelength.is_finite() && wavelength > 0.0) {
        return Err(ChannelError::NonPositiveWavelength(wavelength));
    }
    let denom = match mode {
        PathLossMode::AsWritten => d_dep + d_k,
        PathLossMode::Standard => d_dep,
    };
    if !(denom.is_finite() && denom > 0.0) {
        return Err(ChannelError::NonPositivePathLossDenominator(denom));
    }
    let magnitude = wavelength / (4.0 * std::f64::consts::PI * denom);
    Ok(Complex64::from_polar(
        magnitude,
        TWO_PI * d_dep / wavelength,
    ))
}

/// Complex `N × K` environmental channel, one entry per (unit, user) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    n_units: usize,
    n_users: usize,
    /// Row-major: entry `(i, k)` at `i * n_users + k`.
    entries: Vec<Complex64>,
}

impl ChannelMatrix {
    /// Wrap raw entries; mainly for synthetic test channels.
    pub fn from_entries(
        n_units: usize,
        n_users: usize,
        entries: Vec<Complex64>,
    ) -> Result<Self, ChannelError> {
        assert_eq!(entries.len(), n_units * n_users, "entry count mismatch");
        Ok(Self {
            n_units,
            n_users,
            entries,
        })
    }

    pub fn n_units(&self) -> usize {
        self.n_units
    }

    pub fn n_users(&self) -> usize {
        self.n_users
    }

    pub fn entry(&self, unit: usize, user: usize) -> Complex64 {
        self.entries[unit * self.n_users + user]
    }

    /// Magnitude `β` of an entry.
    pub fn beta(&self, unit: usize, user: usize) -> f64 {
        self.entry(unit, user).norm()
    }

    /// Phase `ψ` of an entry, normalized into `[0, 2π)`.
    pub fn psi(&self, unit: usize, user: usize) -> f64 {
        let mut psi = self.entry(unit, user).arg().rem_euclid(TWO_PI);
        if psi >= TWO_PI {
            psi = 0.0;
        }
        psi
    }

    /// Column magnitudes summed per user, `Σ_i β_{i,k}`.
    pub fn beta_column_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.n_users];
        for i in 0..self.n_units {
            for (k, s) in sums.iter_mut().enumerate() {
                *s += self.beta(i, k);
            }
        }
        sums
    }

    /// Entrywise scaling by a real factor.
    pub(crate) fn scaled(&self, factor: f64) -> ChannelMatrix {
        ChannelMatrix {
            n_units: self.n_units,
            n_users: self.n_users,
            entries: self.entries.iter().map(|h| h * factor).collect(),
        }
    }

    /// Keep only the given user columns, in the given order.
    pub fn select_users(&self, users: &[usize]) -> ChannelMatrix {
        let mut entries = Vec::with_capacity(self.n_units * users.len());
        for i in 0..self.n_units {
            for &k in users {
                entries.push(self.entry(i, k));
            }
        }
        ChannelMatrix {
            n_units: self.n_units,
            n_users: users.len(),
            entries,
        }
    }

    /// Debug dump, one row per (unit, user) cell.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "unit_index,user_index,re,im,beta,psi")?;
        for i in 0..self.n_units {
            for k in 0..self.n_users {
                let h = self.entry(i, k);
                writeln!(
                    out,
                    "{},{},{:?},{:?},{:?},{:?}",
                    i,
                    k,
                    h.re,
                    h.im,
                    self.beta(i, k),
                    self.psi(i, k)
                )?;
            }
        }
        Ok(())
    }
}

/// Assemble the full channel matrix for a scenario: for every unit and user,
/// the product of the arrival and departure gains.
pub fn assemble_channel(scenario: &Scenario) -> Result<ChannelMatrix, ChannelError> {
    let n = scenario.n_units();
    let k_users = scenario.n_users();
    let lambda = scenario.wavelength_m;
    let user_dirs: Vec<[f64; 3]> = scenario
        .users
        .iter()
        .map(|u| u.terminal.direction.unit_vector())
        .collect();

    let mut entries = Vec::with_capacity(n * k_users);
    for (i, &r_i) in scenario.ris.positions().iter().enumerate() {
        let d_arr = arrival_distance(&scenario.bs, r_i).map_err(|e| match e {
            GeometryError::UnitCoincidesWithSource { .. } => {
                ChannelError::Geometry(GeometryError::UnitCoincidesWithSource { unit_index: i })
            }
            other => ChannelError::Geometry(other),
        })?;
        let arr = bs_ris_gain(d_arr, lambda)?;
        for (k, user) in scenario.users.iter().enumerate() {
            let d_k = user.terminal.distance_m;
            let d_dep = departure_delay(user_dirs[k], r_i, d_k);
            let dep = ris_ue_gain(d_dep, d_k, lambda, scenario.path_loss_mode)?;
            let h = arr * dep;
            debug_assert!(
                phase_distance(h.arg(), TWO_PI * (d_dep + d_arr) / lambda) < 1e-9,
                "product phase disagrees with closed form"
            );
            entries.push(h);
        }
    }
    ChannelMatrix::from_entries(n, k_users, entries)
}

/// Wrap-aware distance between two angles in radians.
pub(crate) fn phase_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TWO_PI);
    d.min(TWO_PI - d)
}
