//! Microwave transitions between donor eigenstates and their flip-flop
//! amplitudes.
//!
//! A transverse drive couples |m_s, m_I⟩ ↔ |m_s ± 1, m_I⟩, so only pairs of
//! eigenstates whose total projections differ by one are connected. In each
//! such pair exactly one Zeeman component of each state takes part. Whether
//! that component is the high-field ("major", weight cos²(β/2)) or the
//! admixed ("minor", weight sin²(β/2)) one fixes the class:
//!
//! | upper | lower | class                 | ρ                          |
//! |-------|-------|-----------------------|----------------------------|
//! | major | major | allowed               | cos²(β_u/2) cos²(β_d/2)    |
//! | major | minor | NMR-type forbidden    | cos²(β_u/2) sin²(β_d/2)    |
//! | minor | major | NMR-type forbidden    | sin²(β_u/2) cos²(β_d/2)    |
//! | minor | minor | fully forbidden       | sin²(β_u/2) sin²(β_d/2)    |
//!
//! ρ = ⟨ud| S₁⁺S₂⁻ + S₁⁻S₂⁺ |du⟩ is the squared single-donor S^± element.

use std::{f64::consts::TAU, fmt, str::FromStr};

use crate::{
    donor::{
        analytic_level, validate_label, zeeman_index, DoubletState, Eigensystem, Level, StateLabel,
    },
    error::{Error, Result},
    species::SpeciesParams,
};

/// Squared S_x element below which a pair is reported as dark.
pub const DARK_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TransitionClass {
    Allowed,
    NmrTypeForbidden,
    FullyForbidden,
    Dark,
}

impl fmt::Display for TransitionClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TransitionClass::Allowed => "allowed",
            TransitionClass::NmrTypeForbidden => "nmr_type_forbidden",
            TransitionClass::FullyForbidden => "fully_forbidden",
            TransitionClass::Dark => "dark",
        })
    }
}

/// Which Zeeman component of each state the S^± operator connects.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Coupling {
    pub upper_major: bool,
    pub lower_major: bool,
}

impl Coupling {
    /// Connected components of a pair of labels, or `None` when |Δm| ≠ 1.
    pub fn between(upper: StateLabel, lower: StateLabel) -> Option<Self> {
        match upper.m.twice() - lower.m.twice() {
            // S⁺ takes the lower state's |↓, m_d+½⟩ to the upper's |↑, m_u−½⟩
            2 => Some(Self {
                upper_major: upper.major_is_up(),
                lower_major: !lower.major_is_up(),
            }),
            // S⁻ takes the lower state's |↑, m_d−½⟩ to the upper's |↓, m_u+½⟩
            -2 => Some(Self {
                upper_major: !upper.major_is_up(),
                lower_major: lower.major_is_up(),
            }),
            _ => None,
        }
    }

    /// Structural class, ignoring whether the element vanishes at this field.
    pub fn class(&self) -> TransitionClass {
        match (self.upper_major, self.lower_major) {
            (true, true) => TransitionClass::Allowed,
            (false, false) => TransitionClass::FullyForbidden,
            _ => TransitionClass::NmrTypeForbidden,
        }
    }

    fn weight(major: bool, beta: f64) -> f64 {
        let (s, c) = (0.5 * beta).sin_cos();
        if major {
            c * c
        } else {
            s * s
        }
    }

    /// Class formula for ρ given the two mixing angles.
    pub fn rho(&self, beta_upper: f64, beta_lower: f64) -> f64 {
        Self::weight(self.upper_major, beta_upper) * Self::weight(self.lower_major, beta_lower)
    }
}

/// A transition named by field-independent state labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TransitionId {
    pub upper: StateLabel,
    pub lower: StateLabel,
}

impl TransitionId {
    pub fn new(upper: StateLabel, lower: StateLabel) -> Self {
        Self { upper, lower }
    }

    pub fn coupling(&self) -> Option<Coupling> {
        Coupling::between(self.upper, self.lower)
    }

    pub fn validate(&self, species: &SpeciesParams) -> Result<Coupling> {
        validate_label(species, self.upper)?;
        validate_label(species, self.lower)?;
        self.coupling().ok_or_else(|| {
            Error::UnknownTransition(format!(
                "{self}: states are not connected by S_x (|Δm| must be 1)"
            ))
        })
    }
}

impl fmt::Display for TransitionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.upper, self.lower)
    }
}

impl FromStr for TransitionId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (u, d) = s.split_once(',').ok_or_else(|| {
            Error::Parameter(format!("transition `{s}` must be written `upper,lower`"))
        })?;
        Ok(Self::new(u.parse()?, d.parse()?))
    }
}

/// A transition selector as typed by a user: ascending-energy indices or
/// state labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransitionSelector {
    Indices(usize, usize),
    Labels(TransitionId),
}

impl FromStr for TransitionSelector {
    type Err = Error;

    /// `"11,10"` selects by index, `"-4+,-5u"` by label.
    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s
            .split_once(',')
            .ok_or_else(|| Error::Parameter(format!("transition `{s}` must be written `a,b`")))?;
        match (a.trim().parse::<usize>(), b.trim().parse::<usize>()) {
            (Ok(i), Ok(j)) => Ok(Self::Indices(i, j)),
            _ => Ok(Self::Labels(s.parse()?)),
        }
    }
}

impl fmt::Display for TransitionSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Indices(i, j) => write!(f, "{i},{j}"),
            Self::Labels(id) => write!(f, "{id}"),
        }
    }
}

impl TransitionSelector {
    /// Resolves to labels using the state ordering of `sys`. The upper state
    /// is the higher-energy one whatever order the user typed.
    pub fn resolve(&self, species: &SpeciesParams, sys: &Eigensystem) -> Result<TransitionId> {
        let unknown = || Error::UnknownTransition(self.to_string());
        let (a, b) = match *self {
            Self::Indices(i, j) => (
                *sys.state(i).ok_or_else(unknown)?,
                *sys.state(j).ok_or_else(unknown)?,
            ),
            Self::Labels(id) => (
                *sys.find(id.upper).ok_or_else(unknown)?,
                *sys.find(id.lower).ok_or_else(unknown)?,
            ),
        };
        if a.label == b.label {
            return Err(unknown());
        }
        let id = if a.energy >= b.energy {
            TransitionId::new(a.label, b.label)
        } else {
            TransitionId::new(b.label, a.label)
        };
        id.validate(species)?;
        Ok(id)
    }
}

/// One transition evaluated at a field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub upper: DoubletState,
    pub lower: DoubletState,
    /// E_u − E_d in rad/s.
    pub frequency: f64,
    pub class: TransitionClass,
    /// Flip-flop amplitude ρ.
    pub rho: f64,
    /// |⟨u|S_x|d⟩|².
    pub strength: f64,
    pub coupling: Coupling,
}

impl Transition {
    /// Builds the transition between two states of `sys` (1-based indices).
    pub fn new(
        species: &SpeciesParams,
        sys: &Eigensystem,
        upper_index: usize,
        lower_index: usize,
    ) -> Result<Self> {
        let missing =
            || Error::UnknownTransition(format!("{upper_index},{lower_index}: no such state"));
        let upper = *sys.state(upper_index).ok_or_else(missing)?;
        let lower = *sys.state(lower_index).ok_or_else(missing)?;
        let frequency = transition_frequency(&upper, &lower)?;
        let coupling = TransitionId::new(upper.label, lower.label).validate(species)?;
        let strength = sx_strength(species, sys, upper_index, lower_index);
        let class = if strength < DARK_THRESHOLD {
            TransitionClass::Dark
        } else {
            coupling.class()
        };
        Ok(Self {
            upper,
            lower,
            frequency,
            class,
            rho: coupling.rho(upper.beta, lower.beta),
            strength,
            coupling,
        })
    }

    pub fn from_id(species: &SpeciesParams, sys: &Eigensystem, id: TransitionId) -> Result<Self> {
        let unknown = || Error::UnknownTransition(id.to_string());
        let u = sys.find(id.upper).ok_or_else(unknown)?.index;
        let d = sys.find(id.lower).ok_or_else(unknown)?.index;
        Self::new(species, sys, u, d)
    }

    pub fn id(&self) -> TransitionId {
        TransitionId::new(self.upper.label, self.lower.label)
    }

    pub fn frequency_mhz(&self) -> f64 {
        self.frequency / TAU / 1e6
    }
}

/// |⟨u|S_x|d⟩|² from the Zeeman amplitudes stored in `sys`.
pub fn sx_strength(species: &SpeciesParams, sys: &Eigensystem, u: usize, d: usize) -> f64 {
    let vu = sys.vector(u);
    let vd = sys.vector(d);
    let twice_i = species.nuclear_spin.twice();
    let mut raise = 0.0;
    let mut lower = 0.0;
    let mut tmi = -twice_i;
    while tmi <= twice_i {
        let up = zeeman_index(species, true, tmi).unwrap();
        let down = zeeman_index(species, false, tmi).unwrap();
        raise += vu[up] * vd[down];
        lower += vu[down] * vd[up];
        tmi += 2;
    }
    let sx = 0.5 * (raise + lower);
    sx * sx
}

/// Every S_x-connected pair with positive frequency, ordered by
/// (upper index, lower index). Pairs degenerate at the evaluated field
/// (zero field, within one hyperfine manifold) have no frequency and are
/// skipped.
pub fn enumerate_transitions(species: &SpeciesParams, sys: &Eigensystem) -> Vec<Transition> {
    let mut out = Vec::new();
    for u in 1..=sys.len() {
        for d in 1..u {
            let (su, sd) = (sys.state(u).unwrap(), sys.state(d).unwrap());
            if (su.m().twice() - sd.m().twice()).abs() != 2 || su.energy <= sd.energy {
                continue;
            }
            if let Ok(t) = Transition::new(species, sys, u, d) {
                out.push(t);
            }
        }
    }
    out
}

/// Class-dispatched flip-flop amplitude ρ.
pub fn flip_flop_amplitude(t: &Transition) -> Result<f64> {
    let (bu, bd) = (t.upper.beta, t.lower.beta);
    let cos2 = |b: f64| (0.5 * b).cos().powi(2);
    let sin2 = |b: f64| (0.5 * b).sin().powi(2);
    match t.class {
        TransitionClass::Allowed => Ok(cos2(bu) * cos2(bd)),
        TransitionClass::NmrTypeForbidden if t.coupling.upper_major => Ok(cos2(bu) * sin2(bd)),
        TransitionClass::NmrTypeForbidden => Ok(sin2(bu) * cos2(bd)),
        TransitionClass::FullyForbidden => Ok(sin2(bu) * sin2(bd)),
        TransitionClass::Dark => Err(Error::Domain(format!(
            "transition {} is dark at this field",
            t.id()
        ))),
    }
}

/// E_u − E_d; the upper state must lie strictly higher.
pub fn transition_frequency(upper: &DoubletState, lower: &DoubletState) -> Result<f64> {
    if upper.label == lower.label {
        return Err(Error::Domain(format!(
            "transition from state {} to itself",
            upper.label
        )));
    }
    let f = upper.energy - lower.energy;
    if f <= 0.0 {
        return Err(Error::Domain(format!(
            "state {} does not lie above state {}",
            upper.label, lower.label
        )));
    }
    Ok(f)
}

/// Closed-form levels of a line at one field, without building the spectrum.
pub(crate) fn line_levels(
    species: &SpeciesParams,
    b0: f64,
    id: &TransitionId,
) -> Result<(Level, Level, Coupling)> {
    let coupling = id.validate(species)?;
    if !(b0.is_finite() && b0 >= 0.0) {
        return Err(Error::Parameter(format!("field must be >= 0 T, got {b0}")));
    }
    Ok((
        analytic_level(species, b0, id.upper),
        analytic_level(species, b0, id.lower),
        coupling,
    ))
}
