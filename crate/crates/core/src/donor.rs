//! Single-donor spin Hamiltonian and its eigenstates.
//!
//! The Hamiltonian H₀ = ω₀(S_z − δ I_z) + A **I**·**S** conserves the total
//! projection m = m_s + m_I, so it is block diagonal with blocks of size at
//! most two in the Zeeman product basis |m_s, m_I⟩. Two independent routes to
//! the spectrum are provided:
//!
//! * [`build_hamiltonian`] + [`eigensystem_numeric`]: dense diagonalization of
//!   the full (2I+1)(2s+1) matrix, blind to the block structure except for
//!   resolving exact degeneracies.
//! * [`eigensystem_analytic`] / [`doublet_analytic`]: closed-form doublets
//!   |±,m⟩ parameterized by a mixing angle β_m.
//!
//! In the closed form, with Z_m = m + (ω₀/A)(1 + δ) and
//! X_m = √(I(I+1) − m² + 1/4),
//!
//! ```text
//! |+,m⟩ =  cos(β_m/2) |↑, m−½⟩ + sin(β_m/2) |↓, m+½⟩
//! |−,m⟩ = −sin(β_m/2) |↑, m−½⟩ + cos(β_m/2) |↓, m+½⟩
//! β_m   = atan2(X_m, Z_m) ∈ [0, π]
//! E_±   = −A/4 − δ ω₀ m ± (A/2) √(Z_m² + X_m²)
//! ```
//!
//! The two states with |m| = I + 1/2 are pure Zeeman states (β = 0).

use std::{fmt, str::FromStr};

use nalgebra::{DMatrix, SymmetricEigen};

use crate::{
    error::{Error, Result},
    species::{HalfInt, SpeciesParams},
};

/// Which member of a constant-m doublet a state is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Parity {
    /// Upper branch |+,m⟩.
    Plus,
    /// Lower branch |−,m⟩.
    Minus,
    /// One of the two pure states with |m| = I + 1/2.
    Unmixed,
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Parity::Plus => "+",
            Parity::Minus => "-",
            Parity::Unmixed => "u",
        })
    }
}

/// Field-independent name of an eigenstate: its total projection and branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateLabel {
    pub m: HalfInt,
    pub parity: Parity,
}

impl StateLabel {
    pub fn new(m: HalfInt, parity: Parity) -> Self {
        Self { m, parity }
    }

    /// True when the |↑, m−½⟩ component dominates at high field.
    pub fn major_is_up(&self) -> bool {
        match self.parity {
            Parity::Plus => true,
            Parity::Minus => false,
            Parity::Unmixed => self.m.twice() > 0,
        }
    }
}

impl fmt::Display for StateLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.m, self.parity)
    }
}

impl FromStr for StateLabel {
    type Err = Error;

    /// Parses `"-4+"`, `"3/2-"` or `"-5u"`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (body, parity) = match s.chars().last() {
            Some('+') => (&s[..s.len() - 1], Parity::Plus),
            Some('-') if s.len() > 1 => (&s[..s.len() - 1], Parity::Minus),
            Some('u') | Some('U') => (&s[..s.len() - 1], Parity::Unmixed),
            _ => {
                return Err(Error::Parameter(format!(
                    "state label `{s}` needs a parity suffix (+, - or u)"
                )))
            }
        };
        Ok(Self::new(body.parse()?, parity))
    }
}

/// One eigenstate of the donor Hamiltonian at a given field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoubletState {
    /// Ascending-energy label, 1..=d.
    pub index: usize,
    pub label: StateLabel,
    /// Mixing angle β_m in [0, π]; zero for unmixed states.
    pub beta: f64,
    /// Energy in rad/s.
    pub energy: f64,
    /// P = 2⟨S_z⟩.
    pub polarization: f64,
}

impl DoubletState {
    pub fn m(&self) -> HalfInt {
        self.label.m
    }

    pub fn parity(&self) -> Parity {
        self.label.parity
    }

    /// True when the |↑, m−½⟩ component is the one that survives at high
    /// field.
    pub fn major_is_up(&self) -> bool {
        self.label.major_is_up()
    }

    /// cos²(β/2): weight of the high-field (major) Zeeman component.
    pub fn major_weight(&self) -> f64 {
        let c = (0.5 * self.beta).cos();
        c * c
    }

    /// sin²(β/2): weight of the admixed (minor) Zeeman component.
    pub fn minor_weight(&self) -> f64 {
        let s = (0.5 * self.beta).sin();
        s * s
    }

    /// Weight of |↑, m−½⟩.
    pub fn up_weight(&self) -> f64 {
        if self.major_is_up() {
            self.major_weight()
        } else {
            self.minor_weight()
        }
    }

    /// Weight of |↓, m+½⟩.
    pub fn down_weight(&self) -> f64 {
        if self.major_is_up() {
            self.minor_weight()
        } else {
            self.major_weight()
        }
    }
}

/// 2⟨S_z⟩ of a state: cos β on the upper branch, −cos β on the lower one and
/// ±1 for the unmixed states.
pub fn polarization(state: &DoubletState) -> f64 {
    state.polarization
}

/// Full spectrum at one field.
#[derive(Debug, Clone)]
pub struct Eigensystem {
    /// Field in tesla.
    pub b0: f64,
    /// States sorted by ascending energy; `states[i].index == i + 1`.
    pub states: Vec<DoubletState>,
    /// Column `i` holds the Zeeman amplitudes of `states[i]`, in the basis
    /// order of [`zeeman_index`].
    pub basis_map: DMatrix<f64>,
}

impl Eigensystem {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// State by its 1-based index.
    pub fn state(&self, index: usize) -> Option<&DoubletState> {
        index.checked_sub(1).and_then(|i| self.states.get(i))
    }

    pub fn find(&self, label: StateLabel) -> Option<&DoubletState> {
        self.states.iter().find(|s| s.label == label)
    }

    /// Zeeman amplitudes of the state with the given 1-based index.
    pub fn vector(&self, index: usize) -> nalgebra::DVectorView<'_, f64> {
        self.basis_map.column(index - 1)
    }

    pub fn energies(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.energy).collect()
    }
}

/// Position of |m_s, m_I⟩ in the product basis: spin-up block first, each
/// block ordered m_I = I, I−1, …, −I.
pub fn zeeman_index(species: &SpeciesParams, spin_up: bool, twice_mi: i32) -> Option<usize> {
    let twice_i = species.nuclear_spin.twice();
    if twice_mi.abs() > twice_i || (twice_i - twice_mi) % 2 != 0 {
        return None;
    }
    let k = ((twice_i - twice_mi) / 2) as usize;
    Some(if spin_up {
        k
    } else {
        species.nuclear_dim() + k
    })
}

/// (2m_s, 2m_I) of a basis position.
pub fn zeeman_quantum_numbers(species: &SpeciesParams, idx: usize) -> (i32, i32) {
    let n = species.nuclear_dim();
    let twice_i = species.nuclear_spin.twice();
    let (twice_ms, k) = if idx < n { (1, idx) } else { (-1, idx - n) };
    (twice_ms, twice_i - 2 * k as i32)
}

fn check_field(b0: f64) -> Result<()> {
    if !(b0.is_finite() && b0 >= 0.0) {
        return Err(Error::Parameter(format!("field must be >= 0 T, got {b0}")));
    }
    Ok(())
}

/// H₀ = ω₀(S_z − δ I_z) + A **I**·**S** in the Zeeman product basis (rad/s).
///
/// All matrix elements are real, so the Hermitian matrix is returned as a
/// real symmetric one.
pub fn build_hamiltonian(species: &SpeciesParams, b0: f64) -> Result<DMatrix<f64>> {
    species.validate()?;
    check_field(b0)?;
    let d = species.dimension();
    let w0 = species.omega0(b0);
    let a = species.hyperfine;
    let i = species.spin();
    let mut h = DMatrix::zeros(d, d);
    for idx in 0..d {
        let (tms, tmi) = zeeman_quantum_numbers(species, idx);
        let ms = 0.5 * f64::from(tms);
        let mi = 0.5 * f64::from(tmi);
        h[(idx, idx)] = w0 * (ms - species.delta * mi) + a * ms * mi;
    }
    // (A/2)(S⁺I⁻ + S⁻I⁺): ⟨↑, m_I−1| S⁺I⁻ |↓, m_I⟩ = √(I(I+1) − m_I(m_I−1)).
    let twice_i = species.nuclear_spin.twice();
    let mut twice_mi = twice_i;
    while twice_mi > -twice_i {
        let mi = 0.5 * f64::from(twice_mi);
        let amp = 0.5 * a * (i * (i + 1.0) - mi * (mi - 1.0)).sqrt();
        let up = zeeman_index(species, true, twice_mi - 2).unwrap();
        let down = zeeman_index(species, false, twice_mi).unwrap();
        h[(up, down)] = amp;
        h[(down, up)] = amp;
        twice_mi -= 2;
    }
    Ok(h)
}

/// Total projection operator F_z = S_z + I_z (diagonal).
fn total_projection(species: &SpeciesParams) -> Vec<f64> {
    (0..species.dimension())
        .map(|idx| {
            let (tms, tmi) = zeeman_quantum_numbers(species, idx);
            0.5 * f64::from(tms + tmi)
        })
        .collect()
}

/// dE/dω₀ = ⟨S_z − δ I_z⟩, used to order exactly degenerate levels by
/// the way they split at infinitesimally higher field.
fn field_slope(species: &SpeciesParams, amps: &[f64]) -> f64 {
    amps.iter()
        .enumerate()
        .map(|(idx, a)| {
            let (tms, tmi) = zeeman_quantum_numbers(species, idx);
            a * a * 0.5 * (f64::from(tms) - species.delta * f64::from(tmi))
        })
        .sum()
}

fn degeneracy_tolerance(species: &SpeciesParams) -> f64 {
    1e-9 * species.hyperfine
}

/// Sorts by energy, breaking near-ties by the field slope.
fn sort_order(species: &SpeciesParams, energies: &[f64], slopes: &[f64]) -> Vec<usize> {
    let tol = degeneracy_tolerance(species);
    let mut order: Vec<usize> = (0..energies.len()).collect();
    order.sort_by(|&x, &y| energies[x].total_cmp(&energies[y]));
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && energies[order[end]] - energies[order[end - 1]] <= tol {
            end += 1;
        }
        order[start..end].sort_by(|&x, &y| {
            slopes[x]
                .total_cmp(&slopes[y])
                .then(energies[x].total_cmp(&energies[y]))
        });
        start = end;
    }
    order
}

/// Dense diagonalization of `h` (from [`build_hamiltonian`]).
///
/// Exactly degenerate eigenvalues (zero field) leave the eigenvectors free to
/// mix different m; within each degenerate cluster the vectors are rotated to
/// diagonalize F_z so that every state carries a definite m.
pub fn eigensystem_numeric(
    h: &DMatrix<f64>,
    species: &SpeciesParams,
    b0: f64,
) -> Result<Eigensystem> {
    let d = species.dimension();
    if h.nrows() != d || h.ncols() != d {
        return Err(Error::Parameter(format!(
            "Hamiltonian is {}x{}, species needs {d}x{d}",
            h.nrows(),
            h.ncols()
        )));
    }
    let numeric = |reason: &str| Error::Numeric {
        field: b0,
        reason: reason.to_string(),
    };
    let eig = SymmetricEigen::try_new(h.clone(), f64::EPSILON, 100_000)
        .ok_or_else(|| numeric("symmetric eigensolver did not converge"))?;

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));
    let mut vecs = DMatrix::zeros(d, d);
    for (col, &k) in order.iter().enumerate() {
        vecs.set_column(col, &eig.eigenvectors.column(k));
    }
    let vals: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();

    let fz = total_projection(species);
    let tol = degeneracy_tolerance(species);
    let mut start = 0;
    while start < d {
        let mut end = start + 1;
        while end < d && vals[end] - vals[end - 1] <= tol {
            end += 1;
        }
        if end - start > 1 {
            let block = vecs.columns(start, end - start).into_owned();
            let mut proj = block.transpose();
            for (r, f) in fz.iter().enumerate() {
                proj.column_mut(r).scale_mut(*f);
            }
            let proj = proj * &block;
            let sub = SymmetricEigen::try_new(proj, f64::EPSILON, 100_000)
                .ok_or_else(|| numeric("degenerate-block rotation did not converge"))?;
            let rotated = block * sub.eigenvectors;
            vecs.columns_mut(start, end - start).copy_from(&rotated);
        }
        start = end;
    }

    struct Raw {
        twice_m: i32,
        energy: f64,
        amps: Vec<f64>,
    }
    let mut raw = Vec::with_capacity(d);
    for col in 0..d {
        let v = vecs.column(col);
        let amps: Vec<f64> = v.iter().copied().collect();
        let mean_m: f64 = amps.iter().zip(&fz).map(|(a, f)| a * a * f).sum();
        let twice_m = (2.0 * mean_m).round() as i32;
        let leak: f64 = amps
            .iter()
            .zip(&fz)
            .filter(|(_, f)| (2.0 * **f).round() as i32 != twice_m)
            .map(|(a, _)| a * a)
            .sum();
        if leak > 1e-10 {
            return Err(numeric("eigenvector without a definite total projection m"));
        }
        let hv = h * v;
        let energy = v.dot(&hv);
        raw.push(Raw {
            twice_m,
            energy,
            amps,
        });
    }

    let max_m = species.max_m().twice();
    let mut states = Vec::with_capacity(d);
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(d);
    let mut twice_m = -max_m;
    while twice_m <= max_m {
        let group: Vec<usize> = (0..d).filter(|&k| raw[k].twice_m == twice_m).collect();
        let m = HalfInt::from_twice(twice_m);
        let up = zeeman_index(species, true, twice_m - 1);
        let down = zeeman_index(species, false, twice_m + 1);
        let slot = |k: usize, idx: Option<usize>| idx.map_or(0.0, |i| raw[k].amps[i]);
        match group.as_slice() {
            [k] if twice_m.abs() == max_m => {
                let mut amps = raw[*k].amps.clone();
                let main = up.or(down).unwrap();
                if amps[main] < 0.0 {
                    amps.iter_mut().for_each(|a| *a = -*a);
                }
                let p = slot(*k, up).powi(2) - slot(*k, down).powi(2);
                states.push(DoubletState {
                    index: 0,
                    label: StateLabel::new(m, Parity::Unmixed),
                    beta: 0.0,
                    energy: raw[*k].energy,
                    polarization: p,
                });
                columns.push(amps);
            }
            [k1, k2] if twice_m.abs() < max_m => {
                let (hi, lo) = if raw[*k1].energy >= raw[*k2].energy {
                    (*k1, *k2)
                } else {
                    (*k2, *k1)
                };
                for (k, parity) in [(hi, Parity::Plus), (lo, Parity::Minus)] {
                    let mut a = slot(k, up);
                    let mut b = slot(k, down);
                    let mut amps = raw[k].amps.clone();
                    // Phase convention: cos(β/2) ≥ 0 on the major slot.
                    let flip = match parity {
                        Parity::Plus => a < 0.0,
                        _ => b < 0.0,
                    };
                    if flip {
                        a = -a;
                        b = -b;
                        amps.iter_mut().for_each(|x| *x = -*x);
                    }
                    let beta = match parity {
                        Parity::Plus => 2.0 * b.abs().atan2(a.abs()),
                        _ => 2.0 * a.abs().atan2(b.abs()),
                    };
                    states.push(DoubletState {
                        index: 0,
                        label: StateLabel::new(m, parity),
                        beta,
                        energy: raw[k].energy,
                        polarization: a * a - b * b,
                    });
                    columns.push(amps);
                }
            }
            _ => {
                return Err(numeric(&format!(
                    "found {} eigenstates with m = {m}",
                    group.len()
                )))
            }
        }
        twice_m += 2;
    }
    Ok(assemble(species, b0, states, columns))
}

fn assemble(
    species: &SpeciesParams,
    b0: f64,
    states: Vec<DoubletState>,
    columns: Vec<Vec<f64>>,
) -> Eigensystem {
    let d = species.dimension();
    let energies: Vec<f64> = states.iter().map(|s| s.energy).collect();
    let slopes: Vec<f64> = columns.iter().map(|c| field_slope(species, c)).collect();
    let order = sort_order(species, &energies, &slopes);
    let mut basis_map = DMatrix::zeros(d, d);
    let mut sorted = Vec::with_capacity(d);
    for (pos, &k) in order.iter().enumerate() {
        let mut s = states[k];
        s.index = pos + 1;
        sorted.push(s);
        for (r, a) in columns[k].iter().enumerate() {
            basis_map[(r, pos)] = *a;
        }
    }
    Eigensystem {
        b0,
        states: sorted,
        basis_map,
    }
}

/// Closed-form level data without an index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Level {
    pub beta: f64,
    pub energy: f64,
    pub polarization: f64,
}

fn check_label(species: &SpeciesParams, label: StateLabel) -> Result<()> {
    let tm = label.m.twice();
    let max = species.max_m().twice();
    if tm.abs() > max {
        return Err(Error::Domain(format!(
            "|m| = {} exceeds I + 1/2 = {}",
            label.m.abs(),
            species.max_m()
        )));
    }
    if (tm - species.nuclear_spin.twice()) % 2 == 0 {
        return Err(Error::Domain(format!(
            "m = {} is not reachable as m_s + m_I for I = {}",
            label.m, species.nuclear_spin
        )));
    }
    let unmixed = tm.abs() == max;
    match (unmixed, label.parity) {
        (true, Parity::Unmixed) | (false, Parity::Plus) | (false, Parity::Minus) => Ok(()),
        (true, _) => Err(Error::Domain(format!(
            "m = {} has a single unmixed state; use parity `u`",
            label.m
        ))),
        (false, Parity::Unmixed) => Err(Error::Domain(format!(
            "m = {} labels a mixed doublet; use parity + or -",
            label.m
        ))),
    }
}

/// Closed-form energy, angle and polarization of one labelled state.
pub(crate) fn analytic_level(species: &SpeciesParams, b0: f64, label: StateLabel) -> Level {
    let a = species.hyperfine;
    let i = species.spin();
    let w0 = species.omega0(b0);
    let m = label.m.value();
    let z = m + w0 / a * (1.0 + species.delta);
    match label.parity {
        Parity::Unmixed => {
            // |↑, I⟩ for m = I + 1/2, |↓, −I⟩ for m = −(I + 1/2).
            let sign = if label.m.twice() > 0 { 1.0 } else { -1.0 };
            Level {
                beta: 0.0,
                energy: sign * 0.5 * w0 * (1.0 - 2.0 * species.delta * i) + 0.5 * a * i,
                polarization: sign,
            }
        }
        parity => {
            let x = (i * (i + 1.0) - m * m + 0.25).sqrt();
            let r = z.hypot(x);
            let beta = x.atan2(z);
            let cos_beta = z / r;
            let mean = -0.25 * a - species.delta * w0 * m;
            let (energy, polarization) = if parity == Parity::Plus {
                (mean + 0.5 * a * r, cos_beta)
            } else {
                (mean - 0.5 * a * r, -cos_beta)
            };
            Level {
                beta,
                energy,
                polarization,
            }
        }
    }
}

/// All labels of a species in order of increasing m, lower branch first.
pub fn all_labels(species: &SpeciesParams) -> Vec<StateLabel> {
    let max = species.max_m().twice();
    let mut labels = Vec::with_capacity(species.dimension());
    let mut tm = -max;
    while tm <= max {
        let m = HalfInt::from_twice(tm);
        if tm.abs() == max {
            labels.push(StateLabel::new(m, Parity::Unmixed));
        } else {
            labels.push(StateLabel::new(m, Parity::Minus));
            labels.push(StateLabel::new(m, Parity::Plus));
        }
        tm += 2;
    }
    labels
}

/// Zeeman amplitudes of a labelled state per the closed form.
fn analytic_amplitudes(species: &SpeciesParams, label: StateLabel, beta: f64) -> Vec<f64> {
    let mut amps = vec![0.0; species.dimension()];
    let tm = label.m.twice();
    let up = zeeman_index(species, true, tm - 1);
    let down = zeeman_index(species, false, tm + 1);
    let (c, s) = ((0.5 * beta).cos(), (0.5 * beta).sin());
    let (a_up, a_down) = match label.parity {
        Parity::Plus => (c, s),
        Parity::Minus => (-s, c),
        Parity::Unmixed => (1.0, 1.0),
    };
    if let Some(i) = up {
        amps[i] = a_up;
    }
    if let Some(i) = down {
        amps[i] = a_down;
    }
    amps
}

/// Closed-form spectrum, sorted and indexed exactly like
/// [`eigensystem_numeric`].
pub fn eigensystem_analytic(species: &SpeciesParams, b0: f64) -> Result<Eigensystem> {
    species.validate()?;
    check_field(b0)?;
    let labels = all_labels(species);
    let mut states = Vec::with_capacity(labels.len());
    let mut columns = Vec::with_capacity(labels.len());
    for label in labels {
        let lv = analytic_level(species, b0, label);
        states.push(DoubletState {
            index: 0,
            label,
            beta: lv.beta,
            energy: lv.energy,
            polarization: lv.polarization,
        });
        columns.push(analytic_amplitudes(species, label, lv.beta));
    }
    Ok(assemble(species, b0, states, columns))
}

/// Closed-form doublet state |parity, m⟩ at field `b0`.
pub fn doublet_analytic(
    species: &SpeciesParams,
    b0: f64,
    m: HalfInt,
    parity: Parity,
) -> Result<DoubletState> {
    let label = StateLabel::new(m, parity);
    check_label(species, label)?;
    let sys = eigensystem_analytic(species, b0)?;
    Ok(*sys
        .find(label)
        .expect("every valid label is in the spectrum"))
}

/// Validates a label against a species without computing anything.
pub fn validate_label(species: &SpeciesParams, label: StateLabel) -> Result<()> {
    check_label(species, label)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bi() -> SpeciesParams {
        SpeciesParams::bismuth()
    }

    fn species(twice_i: i32) -> SpeciesParams {
        SpeciesParams::new("test", HalfInt::from_twice(twice_i), 500.0, 3e-4, 27.997).unwrap()
    }

    #[test]
    fn hamiltonian_is_symmetric_and_traceless() {
        let h = build_hamiltonian(&bi(), 0.1).unwrap();
        assert_eq!(h.nrows(), 20);
        assert!((&h - h.transpose()).amax() == 0.0);
        assert!(h.trace().abs() < 1e-6 * h.amax());
    }

    #[test]
    fn hamiltonian_rejects_negative_field() {
        assert!(matches!(
            build_hamiltonian(&bi(), -0.1),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn zero_field_manifolds() {
        // Brute force: the zero-field spectrum of A I·S is A/2[F(F+1) − I(I+1) − 3/4]
        // with F = I ± 1/2, split by A(I + 1/2).
        let sp = bi();
        let h = build_hamiltonian(&sp, 0.0).unwrap();
        let sys = eigensystem_numeric(&h, &sp, 0.0).unwrap();
        let a = sp.hyperfine;
        let lower = -2.75 * a;
        let upper = 2.25 * a;
        let n_lower = sys
            .states
            .iter()
            .filter(|s| (s.energy - lower).abs() < 1e-9 * a)
            .count();
        let n_upper = sys
            .states
            .iter()
            .filter(|s| (s.energy - upper).abs() < 1e-9 * a)
            .count();
        assert_eq!((n_lower, n_upper), (9, 11));
        assert!(((upper - lower) - 5.0 * a).abs() < 1e-6);
        // eigenvectors orthonormal even inside the degenerate manifolds
        let v = &sys.basis_map;
        let gram = v.transpose() * v;
        assert!((gram - DMatrix::<f64>::identity(20, 20)).amax() < 1e-12);
    }

    #[test]
    fn unmixed_states_are_pure() {
        let sp = bi();
        for b in [0.0, 0.05, 0.21, 0.6] {
            let sys = eigensystem_analytic(&sp, b).unwrap();
            for s in sys.states.iter().filter(|s| s.parity() == Parity::Unmixed) {
                assert_eq!(s.beta, 0.0);
                assert_eq!(s.polarization.abs(), 1.0);
            }
        }
        let top = doublet_analytic(&sp, 0.1, HalfInt::from_twice(10), Parity::Unmixed).unwrap();
        assert_eq!(top.polarization, 1.0);
        assert_eq!(top.index, 20);
    }

    #[test]
    fn beta_half_pi_near_zm_zero() {
        // Z_{-4} = -4 + (ω₀/A)(1+δ) vanishes at B0 ≈ 0.21 T.
        let sp = bi();
        let s = doublet_analytic(&sp, 0.21, HalfInt::from_twice(-8), Parity::Plus).unwrap();
        assert!((s.beta - std::f64::consts::FRAC_PI_2).abs() < 0.02);
        assert!(s.polarization.abs() < 0.01);
        assert_eq!(s.index, 11);
    }

    #[test]
    fn doublet_domain_errors() {
        let sp = bi();
        assert!(matches!(
            doublet_analytic(&sp, 0.1, HalfInt::from_twice(12), Parity::Plus),
            Err(Error::Domain(_))
        ));
        assert!(doublet_analytic(&sp, 0.1, HalfInt::from_twice(10), Parity::Plus).is_err());
        assert!(doublet_analytic(&sp, 0.1, HalfInt::from_twice(4), Parity::Unmixed).is_err());
        // half-odd m is unreachable for half-odd I
        assert!(doublet_analytic(&sp, 0.1, HalfInt::from_twice(3), Parity::Plus).is_err());
    }

    #[test]
    fn high_field_limit_unmixes() {
        let sp = bi();
        let sys = eigensystem_analytic(&sp, 1e4).unwrap();
        for s in &sys.states {
            assert!(s.beta < 1e-3, "{:?}", s);
            assert!((s.polarization.abs() - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn state_counts() {
        for (twice_i, d) in [(1, 4), (3, 8), (9, 20)] {
            let sp = species(twice_i);
            let h = build_hamiltonian(&sp, 0.05).unwrap();
            assert_eq!(eigensystem_numeric(&h, &sp, 0.05).unwrap().len(), d);
        }
    }

    #[test]
    fn label_round_trip() {
        for text in ["-4+", "3/2-", "-5u", "0+"] {
            let l: StateLabel = text.parse().unwrap();
            assert_eq!(l.to_string(), text);
        }
        assert!("4".parse::<StateLabel>().is_err());
    }

    #[test]
    fn bismuth_labels_match_level_diagram() {
        let sys = eigensystem_analytic(&bi(), 0.1).unwrap();
        let label = |i: usize| sys.state(i).unwrap().label.to_string();
        assert_eq!(label(10), "-5u");
        assert_eq!(label(11), "-4+");
        assert_eq!(label(14), "-1+");
        assert_eq!(label(7), "-2-");
        assert_eq!(label(1), "4-");
        assert_eq!(label(20), "5u");
    }
}
