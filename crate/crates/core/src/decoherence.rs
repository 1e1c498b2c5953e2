//! Pair-product coherence decay of a central donor in a dilute donor bath.
//!
//! The central donor is driven on the transition u ↔ d and starts in u.
//! Each neighbour contributes an independent factor and the coherence is
//! their product. With pulse spacing τ:
//!
//! * resonant neighbour (state u or d): cos((Jτ/4)[(P_u − P_d)² ± 2ρ]),
//!   + when it starts in the same state as the central donor;
//! * any other neighbour: cos((Jτ/2)ρ_pair);
//! * instantaneous diffusion alone: cos((Jτ/4)(P_u − P_d)²).
//!
//! Curves are reported against the total echo time t = 2τ.

use std::{f64::consts::PI, fmt, str::FromStr};

use rand::{distr::weighted::WeightedIndex, Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, UnitSphere};
use rayon::prelude::*;

use crate::{
    donor::{eigensystem_analytic, Eigensystem},
    error::{Error, Result},
    species::SpeciesParams,
    transitions::{Coupling, Transition, TransitionId},
};

/// Reduced Planck constant in J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// μ₀/4π in T·m/A.
pub const MU0_OVER_4PI: f64 = 1e-7;
/// Default minimum donor separation in metres.
pub const DEFAULT_R_MIN: f64 = 5e-9;
/// Largest accepted expected neighbour count.
pub const MAX_EXPECTED_NEIGHBORS: f64 = 1e5;
/// Pulse spacing per unit of total echo time.
pub const ECHO_TIME_FACTOR: f64 = 0.5;

const PLACEMENT_ATTEMPTS: usize = 10_000;
/// Γ(4/3), for the mean nearest-neighbour distance of a Poisson process.
const GAMMA_FOUR_THIRDS: f64 = 0.892_979_511_569_249_2;

/// Secular dipolar coupling J = D(1 − 3cos²θ)/r³.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DipolarCoupling {
    /// D in rad/s·m³.
    pub prefactor: f64,
    /// Closest allowed separation in metres.
    pub r_min: f64,
}

impl DipolarCoupling {
    /// D = (μ₀/4π) γ_e² ħ for the species' electron gyromagnetic ratio.
    pub fn for_species(species: &SpeciesParams) -> Self {
        Self {
            prefactor: MU0_OVER_4PI * species.gamma_e * species.gamma_e * HBAR,
            r_min: DEFAULT_R_MIN,
        }
    }

    pub fn with_r_min(self, r_min: f64) -> Self {
        Self { r_min, ..self }
    }

    /// J for a separation vector and a unit field axis.
    pub fn coupling(&self, r: [f64; 3], axis: [f64; 3]) -> Result<f64> {
        let dist = norm(r);
        if !(dist >= self.r_min) {
            return Err(Error::Domain(format!(
                "separation {dist:e} m is below the minimum {:e} m",
                self.r_min
            )));
        }
        let cos = dot(r, axis) / (dist * norm(axis));
        Ok(self.prefactor * (1.0 - 3.0 * cos * cos) / dist.powi(3))
    }
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    norm([a[0] - b[0], a[1] - b[1], a[2] - b[2]])
}

/// Donor density (m⁻³) whose Poisson mean nearest-neighbour distance is `d`.
pub fn density_for_mean_nn_distance(d: f64) -> f64 {
    let x = GAMMA_FOUR_THIRDS / d;
    3.0 * x.powi(3) / (4.0 * PI)
}

/// Initial-state distribution of bath donors.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum Population {
    /// Uniform over all eigenstates (high-temperature limit).
    #[default]
    Unpolarized,
    /// Relative weights per eigenstate, in ascending-energy order.
    Weighted(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BathConfig {
    /// Donors per m³.
    pub density: f64,
    /// Sampling sphere radius in metres.
    pub radius: f64,
    pub r_min: f64,
    pub population: Population,
}

impl BathConfig {
    pub fn new(density: f64, radius: f64) -> Self {
        Self {
            density,
            radius,
            r_min: DEFAULT_R_MIN,
            population: Population::Unpolarized,
        }
    }

    pub fn expected_count(&self) -> f64 {
        self.density * 4.0 / 3.0 * PI * self.radius.powi(3)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.density.is_finite() && self.density > 0.0) {
            return Err(Error::Parameter(format!(
                "density must be positive, got {}",
                self.density
            )));
        }
        if !(self.radius.is_finite() && self.radius >= 0.0) {
            return Err(Error::Parameter(format!(
                "radius must be >= 0, got {}",
                self.radius
            )));
        }
        if !(self.r_min.is_finite() && self.r_min >= 0.0) {
            return Err(Error::Parameter(format!(
                "r_min must be >= 0, got {}",
                self.r_min
            )));
        }
        let n = self.expected_count();
        if n > MAX_EXPECTED_NEIGHBORS {
            return Err(Error::Resource(format!(
                "expected {n:.3e} bath donors exceeds the limit of {MAX_EXPECTED_NEIGHBORS:e}"
            )));
        }
        Ok(())
    }
}

/// One sampled arrangement of bath donors around the central donor.
#[derive(Debug, Clone, PartialEq)]
pub struct BathRealization {
    /// Positions in metres, central donor at the origin.
    pub positions: Vec<[f64; 3]>,
    /// J_k in rad/s.
    pub couplings: Vec<f64>,
    /// Ascending-energy eigenstate index (1-based) of each neighbour.
    pub states: Vec<usize>,
    /// Whether each neighbour sits in u or d.
    pub resonant: Vec<bool>,
    pub seed: u64,
}

impl BathRealization {
    pub fn empty(seed: u64) -> Self {
        Self {
            positions: Vec::new(),
            couplings: Vec::new(),
            states: Vec::new(),
            resonant: Vec::new(),
            seed,
        }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Distance from the central donor to its closest neighbour.
    pub fn nearest_distance(&self) -> Option<f64> {
        self.positions
            .iter()
            .map(|&p| norm(p))
            .min_by(f64::total_cmp)
    }
}

/// Samples a bath for a central donor driven on `transition`.
pub fn sample_bath(
    config: &BathConfig,
    species: &SpeciesParams,
    transition: &Transition,
    seed: u64,
) -> Result<BathRealization> {
    config.validate()?;
    let dim = species.dimension();
    let weights = match &config.population {
        Population::Unpolarized => None,
        Population::Weighted(w) => {
            if w.len() != dim {
                return Err(Error::Parameter(format!(
                    "population needs {dim} weights, got {}",
                    w.len()
                )));
            }
            Some(WeightedIndex::new(w).map_err(|e| Error::Parameter(e.to_string()))?)
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bath = BathRealization::empty(seed);
    if config.radius <= config.r_min {
        return Ok(bath);
    }
    let lambda = config.expected_count();
    let count = if lambda > 0.0 {
        Poisson::new(lambda)
            .map_err(|e| Error::Parameter(e.to_string()))?
            .sample(&mut rng) as usize
    } else {
        0
    };
    let dipolar = DipolarCoupling::for_species(species).with_r_min(config.r_min);
    let (u, d) = (transition.upper.index, transition.lower.index);
    for _ in 0..count {
        let pos = place(&mut rng, config, &bath.positions)?;
        let state = match &weights {
            None => rng.random_range(1..=dim),
            Some(w) => w.sample(&mut rng) + 1,
        };
        bath.couplings.push(dipolar.coupling(pos, [0.0, 0.0, 1.0])?);
        bath.positions.push(pos);
        bath.states.push(state);
        bath.resonant.push(state == u || state == d);
    }
    Ok(bath)
}

fn place(rng: &mut ChaCha8Rng, config: &BathConfig, placed: &[[f64; 3]]) -> Result<[f64; 3]> {
    for _ in 0..PLACEMENT_ATTEMPTS {
        let dir: [f64; 3] = UnitSphere.sample(rng);
        let r = config.radius * rng.random::<f64>().cbrt();
        let p = [dir[0] * r, dir[1] * r, dir[2] * r];
        if r >= config.r_min && placed.iter().all(|&q| dist(p, q) >= config.r_min) {
            return Ok(p);
        }
    }
    Err(Error::Resource(format!(
        "could not place a donor {:e} m from all others after {PLACEMENT_ATTEMPTS} attempts",
        config.r_min
    )))
}

/// cos((Jτ/4)[(P_u − P_d)² ± 2ρ]), + for a neighbour in the same state.
pub fn pair_decay_resonant(j: f64, p_u: f64, p_d: f64, rho: f64, tau: f64, same: bool) -> f64 {
    let dp = p_u - p_d;
    let sign = if same { 1.0 } else { -1.0 };
    (j * tau / 4.0 * (dp * dp + sign * 2.0 * rho)).cos()
}

/// cos((Jτ/2)ρ_pair).
pub fn pair_decay_nonresonant(j: f64, rho_pair: f64, tau: f64) -> f64 {
    (j * tau / 2.0 * rho_pair).cos()
}

/// cos((Jτ/4)(P_u − P_d)²).
pub fn id_only_decay(j: f64, p_u: f64, p_d: f64, tau: f64) -> f64 {
    let dp = p_u - p_d;
    (j * tau / 4.0 * dp * dp).cos()
}

/// Which pair processes enter the product.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum DecayMode {
    /// Instantaneous diffusion and direct flip-flops together.
    #[default]
    Full,
    /// Diagonal coupling of resonant neighbours only.
    IdOnly,
    /// Flip-flop terms only.
    DffOnly,
}

impl fmt::Display for DecayMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DecayMode::Full => "full",
            DecayMode::IdOnly => "id_only",
            DecayMode::DffOnly => "dff_only",
        })
    }
}

impl FromStr for DecayMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "full" => Ok(Self::Full),
            "id_only" | "id" => Ok(Self::IdOnly),
            "dff_only" | "dff" => Ok(Self::DffOnly),
            _ => Err(Error::Parameter(format!(
                "decay mode must be full, id_only or dff_only, got `{s}`"
            ))),
        }
    }
}

/// Flip-flop amplitude between the central transition and a bath donor in
/// state `bath`.
///
/// The bath donor can exchange its state with whichever of u or d differs
/// from it by one unit of m; the amplitude is ρ of that pair of states, or
/// zero when neither qualifies.
pub fn rho_pair(sys: &Eigensystem, transition: &Transition, bath: usize) -> f64 {
    let (u, d) = (transition.upper, transition.lower);
    if bath == u.index || bath == d.index {
        return 0.0;
    }
    let Some(b) = sys.state(bath) else {
        return 0.0;
    };
    let partner = [u, d]
        .into_iter()
        .find(|x| (x.m().twice() - b.m().twice()).abs() == 2);
    let Some(x) = partner else {
        return 0.0;
    };
    let (hi, lo) = if x.energy >= b.energy {
        (x, *b)
    } else {
        (*b, x)
    };
    Coupling::between(hi.label, lo.label)
        .map(|c| c.rho(hi.beta, lo.beta))
        .unwrap_or(0.0)
}

/// Per-field data needed to evaluate pair factors for one transition.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayModel {
    pub transition: Transition,
    pub p_u: f64,
    pub p_d: f64,
    pub rho: f64,
    /// ρ_pair for each state index (entry 0 unused).
    pub rho_pair: Vec<f64>,
}

impl DecayModel {
    pub fn new(species: &SpeciesParams, b0: f64, id: &TransitionId) -> Result<Self> {
        let sys = eigensystem_analytic(species, b0)?;
        let t = Transition::from_id(species, &sys, *id)?;
        let mut rho_pair = vec![0.0; sys.len() + 1];
        for (k, r) in rho_pair.iter_mut().enumerate().skip(1) {
            *r = self::rho_pair(&sys, &t, k);
        }
        Ok(Self {
            p_u: t.upper.polarization,
            p_d: t.lower.polarization,
            rho: t.rho,
            transition: t,
            rho_pair,
        })
    }

    /// Factor of one neighbour at pulse spacing τ.
    pub fn factor(&self, j: f64, state: usize, resonant: bool, tau: f64, mode: DecayMode) -> f64 {
        if resonant {
            let same = state == self.transition.upper.index;
            match mode {
                DecayMode::Full => pair_decay_resonant(j, self.p_u, self.p_d, self.rho, tau, same),
                DecayMode::IdOnly => id_only_decay(j, self.p_u, self.p_d, tau),
                DecayMode::DffOnly => pair_decay_nonresonant(j, self.rho, tau),
            }
        } else {
            match mode {
                DecayMode::IdOnly => 1.0,
                _ => {
                    pair_decay_nonresonant(j, self.rho_pair.get(state).copied().unwrap_or(0.0), tau)
                }
            }
        }
    }
}

/// Coherence against total echo time.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayCurve {
    /// Total echo times 2τ in seconds.
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub t2: Option<f64>,
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(Error::Parameter("times must be finite and >= 0".into()));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Parameter("times must be ascending".into()));
    }
    Ok(())
}

/// Product of all pair factors of one bath on the given total echo times.
pub fn ensemble_decay(
    model: &DecayModel,
    bath: &BathRealization,
    times: &[f64],
    mode: DecayMode,
) -> Result<DecayCurve> {
    check_times(times)?;
    let values: Vec<f64> = times
        .iter()
        .map(|&t| {
            let tau = ECHO_TIME_FACTOR * t;
            bath.couplings
                .iter()
                .zip(&bath.states)
                .zip(&bath.resonant)
                .map(|((&j, &s), &r)| model.factor(j, s, r, tau, mode))
                .product()
        })
        .collect();
    let t2 = t2(times, &values);
    Ok(DecayCurve {
        times: times.to_vec(),
        values,
        t2,
    })
}

/// First time at which |L| falls to 1/e, linearly interpolated.
pub fn t2(times: &[f64], values: &[f64]) -> Option<f64> {
    let target = (-1.0f64).exp();
    let k = values.iter().position(|v| v.abs() <= target)?;
    if k == 0 {
        return Some(times[0]);
    }
    let (t0, t1) = (times[k - 1], times[k]);
    let (a, b) = (values[k - 1].abs(), values[k].abs());
    if a == b {
        return Some(t1);
    }
    Some(t0 + (a - target) / (a - b) * (t1 - t0))
}

/// Everything needed to simulate a decay.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayConfig {
    pub species: SpeciesParams,
    pub transition: TransitionId,
    /// Field in tesla.
    pub b0: f64,
    pub bath: BathConfig,
    pub mode: DecayMode,
    /// Total echo times in seconds, ascending.
    pub times: Vec<f64>,
}

/// Mean decay over independent baths with its standard error.
#[derive(Debug, Clone, PartialEq)]
pub struct AveragedDecay {
    pub times: Vec<f64>,
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    pub n_realizations: usize,
    /// 1/e time of the mean curve.
    pub t2: Option<f64>,
}

/// Averages `n` realizations; realization i uses seed `seed + i`.
pub fn average_decay(config: &DecayConfig, n: usize, seed: u64) -> Result<AveragedDecay> {
    if n == 0 {
        return Err(Error::Parameter("need at least one realization".into()));
    }
    check_times(&config.times)?;
    config.bath.validate()?;
    let model = DecayModel::new(&config.species, config.b0, &config.transition)?;
    let curves = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let bath = sample_bath(
                &config.bath,
                &config.species,
                &model.transition,
                seed.wrapping_add(i),
            )?;
            ensemble_decay(&model, &bath, &config.times, config.mode).map(|c| c.values)
        })
        .collect::<Result<Vec<_>>>()?;
    let nf = n as f64;
    let m = config.times.len();
    let mut mean = vec![0.0; m];
    let mut stderr = vec![0.0; m];
    for k in 0..m {
        let mu = curves.iter().map(|c| c[k]).sum::<f64>() / nf;
        mean[k] = mu;
        if n > 1 {
            let var = curves.iter().map(|c| (c[k] - mu).powi(2)).sum::<f64>() / (nf - 1.0);
            stderr[k] = (var / nf).sqrt();
        }
    }
    let t2 = t2(&config.times, &mean);
    Ok(AveragedDecay {
        times: config.times.clone(),
        mean,
        stderr,
        n_realizations: n,
        t2,
    })
}
