//! Donor species parameters and the half-integer type used for spin
//! projections.
//!
//! All frequencies are stored as angular frequencies (rad/s). Configuration
//! files and constructors take the conventional laboratory units: MHz for the
//! hyperfine constant and GHz/T for the electron gyromagnetic ratio.

use std::{f64::consts::TAU, fmt, path::Path, str::FromStr};

use serde::Deserialize;

use crate::error::{Error, Result};

/// Default electron gyromagnetic ratio, γ_e / 2π in GHz/T (g ≈ 2).
pub const DEFAULT_GAMMA_E_GHZ_PER_T: f64 = 27.997;

/// A half-integer (or integer) value stored exactly as twice its value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HalfInt(i32);

impl HalfInt {
    pub const fn from_twice(twice: i32) -> Self {
        Self(twice)
    }

    pub const fn twice(self) -> i32 {
        self.0
    }

    pub fn value(self) -> f64 {
        f64::from(self.0) * 0.5
    }

    pub fn abs(self) -> Self {
        Self(self.0.abs())
    }

    /// True when the value is an odd multiple of 1/2.
    pub fn is_half_odd(self) -> bool {
        self.0 % 2 != 0
    }
}

impl std::ops::Add for HalfInt {
    type Output = HalfInt;
    fn add(self, rhs: Self) -> Self {
        Self(self.0 + rhs.0)
    }
}

impl std::ops::Sub for HalfInt {
    type Output = HalfInt;
    fn sub(self, rhs: Self) -> Self {
        Self(self.0 - rhs.0)
    }
}

impl std::ops::Neg for HalfInt {
    type Output = HalfInt;
    fn neg(self) -> Self {
        Self(-self.0)
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

impl FromStr for HalfInt {
    type Err = Error;

    /// Accepts `"9/2"`, `"-3/2"`, `"4"`, or decimal forms such as `"4.5"`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Parameter(format!("`{s}` is not a half-integer"));
        if let Some((num, den)) = s.split_once('/') {
            let num: i32 = num.trim().parse().map_err(|_| bad())?;
            match den.trim() {
                "2" => Ok(Self(num)),
                "1" => Ok(Self(2 * num)),
                _ => Err(bad()),
            }
        } else if let Ok(n) = s.parse::<i32>() {
            Ok(Self(2 * n))
        } else {
            let x: f64 = s.parse().map_err(|_| bad())?;
            let twice = (2.0 * x).round();
            if (2.0 * x - twice).abs() > 1e-12 || !twice.is_finite() || twice.abs() > 1e6 {
                return Err(bad());
            }
            Ok(Self(twice as i32))
        }
    }
}

/// Parameters of one donor species, entering
/// H₀ = ω₀(S_z − δ I_z) + A **I**·**S** with ω₀ = γ_e B₀.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeciesParams {
    pub name: String,
    /// Nuclear spin I.
    pub nuclear_spin: HalfInt,
    /// Isotropic hyperfine coupling A in rad/s.
    pub hyperfine: f64,
    /// Ratio of nuclear to electronic gyromagnetic ratios.
    pub delta: f64,
    /// Electron gyromagnetic ratio in rad/s per tesla.
    pub gamma_e: f64,
}

impl SpeciesParams {
    /// Builds a validated species from laboratory units.
    pub fn new(
        name: impl Into<String>,
        nuclear_spin: HalfInt,
        hyperfine_mhz: f64,
        delta: f64,
        gamma_e_ghz_per_t: f64,
    ) -> Result<Self> {
        let species = Self {
            name: name.into(),
            nuclear_spin,
            hyperfine: hyperfine_mhz * 1e6 * TAU,
            delta,
            gamma_e: gamma_e_ghz_per_t * 1e9 * TAU,
        };
        species.validate()?;
        Ok(species)
    }

    /// Bismuth-209 in silicon: I = 9/2, A/2π = 1475.4 MHz, δ = 2.488e-4.
    pub fn bismuth() -> Self {
        Self::new(
            "Bi",
            HalfInt::from_twice(9),
            1475.4,
            2.488e-4,
            DEFAULT_GAMMA_E_GHZ_PER_T,
        )
        .expect("built-in constants are valid")
    }

    /// Same species with a different electron gyromagnetic ratio (GHz/T).
    pub fn with_gamma_e(mut self, gamma_e_ghz_per_t: f64) -> Result<Self> {
        self.gamma_e = gamma_e_ghz_per_t * 1e9 * TAU;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nuclear_spin.twice() <= 0 {
            return Err(Error::Parameter(format!(
                "nuclear spin must be a positive half-integer, got {}",
                self.nuclear_spin
            )));
        }
        if !(self.hyperfine.is_finite() && self.hyperfine > 0.0) {
            return Err(Error::Parameter(format!(
                "hyperfine coupling must be positive, got {} rad/s",
                self.hyperfine
            )));
        }
        if !(self.delta.is_finite() && (0.0..0.1).contains(&self.delta)) {
            return Err(Error::Parameter(format!(
                "delta must satisfy 0 <= delta << 1, got {}",
                self.delta
            )));
        }
        if !(self.gamma_e.is_finite() && self.gamma_e > 0.0) {
            return Err(Error::Parameter(format!(
                "gamma_e must be positive, got {} rad/s/T",
                self.gamma_e
            )));
        }
        Ok(())
    }

    /// Hilbert-space dimension (2I + 1)(2s + 1) with s = 1/2.
    pub fn dimension(&self) -> usize {
        2 * self.nuclear_dim()
    }

    /// Number of nuclear projections, 2I + 1.
    pub fn nuclear_dim(&self) -> usize {
        (self.nuclear_spin.twice() + 1) as usize
    }

    pub fn spin(&self) -> f64 {
        self.nuclear_spin.value()
    }

    /// Electron Zeeman frequency ω₀ = γ_e B₀ in rad/s.
    pub fn omega0(&self, b0: f64) -> f64 {
        self.gamma_e * b0
    }

    pub fn hyperfine_mhz(&self) -> f64 {
        self.hyperfine / TAU / 1e6
    }

    pub fn gamma_e_ghz_per_t(&self) -> f64 {
        self.gamma_e / TAU / 1e9
    }

    /// Largest total projection, |m| = I + 1/2.
    pub fn max_m(&self) -> HalfInt {
        HalfInt::from_twice(self.nuclear_spin.twice() + 1)
    }

    /// Parses a species document (TOML).
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let doc: SpeciesDoc = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        doc.into_params()
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// Resolves a built-in species name; only bismuth ships with the library.
    pub fn builtin(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "bi" | "bismuth" | "si:bi" => Some(Self::bismuth()),
            _ => None,
        }
    }
}

/// On-disk species description.
///
/// ```toml
/// name = "Bi"
/// I = "9/2"
/// A_MHz = 1475.4
/// delta = 2.488e-4
/// gamma_e_GHz_per_T = 27.997
/// ```
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeciesDoc {
    pub name: String,
    #[serde(rename = "I")]
    pub nuclear_spin: String,
    #[serde(rename = "A_MHz")]
    pub hyperfine_mhz: f64,
    pub delta: f64,
    #[serde(rename = "gamma_e_GHz_per_T", default = "default_gamma")]
    pub gamma_e_ghz_per_t: f64,
}

fn default_gamma() -> f64 {
    DEFAULT_GAMMA_E_GHZ_PER_T
}

impl SpeciesDoc {
    pub fn into_params(self) -> Result<SpeciesParams> {
        let spin: HalfInt = self.nuclear_spin.parse()?;
        SpeciesParams::new(
            self.name,
            spin,
            self.hyperfine_mhz,
            self.delta,
            self.gamma_e_ghz_per_t,
        )
    }
}
