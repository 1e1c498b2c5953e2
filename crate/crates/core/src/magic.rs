//! Dipolar refocusing points and optimal working points.
//!
//! For a transition u ↔ d the Hahn echo of a resonant pair refocuses the full
//! secular dipolar coupling when
//!
//! φ(B₀) = (P_u − P_d)² − 2ρ = 0,
//!
//! and removes the diagonal part alone when P_u − P_d = 0. Both objectives are
//! evaluated from the closed-form levels, so a line keeps its identity across
//! the scanned field range.

use std::fmt;

use rayon::prelude::*;

use crate::{
    donor::eigensystem_analytic,
    error::{Error, Result},
    species::SpeciesParams,
    transitions::{line_levels, TransitionId, DARK_THRESHOLD},
};

/// Default scan interval in tesla.
pub const DEFAULT_RANGE: (f64, f64) = (0.005, 0.3);
/// Smallest accepted grid size.
pub const MIN_GRID: usize = 100;

const FIELD_TOL: f64 = 1e-7;
const RESIDUAL_TOL: f64 = 1e-10;
const GRAZING_TOL: f64 = 1e-12;
const MAX_ITER: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RootKind {
    Drp,
    Owp,
}

impl fmt::Display for RootKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RootKind::Drp => "DRP",
            RootKind::Owp => "OWP",
        })
    }
}

/// A refined zero of one of the two objectives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldRoot {
    /// Field in tesla.
    pub field: f64,
    pub kind: RootKind,
    pub transition: TransitionId,
    /// Ascending-energy indices (upper, lower) at the root field.
    pub indices: (usize, usize),
    /// Objective value at `field`.
    pub residual: f64,
    /// Grid interval that isolated the root.
    pub bracket: (f64, f64),
}

/// A grid minimum of |objective| below 1e-12 without a sign change.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrazingPoint {
    pub field: f64,
    pub kind: RootKind,
    pub value: f64,
}

/// Objective values at one grid field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanPoint {
    pub field: f64,
    pub phi: f64,
    pub pu_minus_pd: f64,
    pub rho: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scan {
    pub transition: TransitionId,
    pub points: Vec<ScanPoint>,
    pub drps: Vec<FieldRoot>,
    pub owps: Vec<FieldRoot>,
    pub grazing: Vec<GrazingPoint>,
}

/// φ for given polarizations and flip-flop amplitude.
pub fn drp_condition(p_u: f64, p_d: f64, rho: f64) -> f64 {
    let dp = p_u - p_d;
    dp * dp - 2.0 * rho
}

/// φ of an allowed line written in mixing angles, taking P = cos β for
/// both states and ρ = cos²(β_u/2) cos²(β_d/2).
pub fn drp_condition_from_angles(beta_u: f64, beta_d: f64) -> f64 {
    let rho = ((0.5 * beta_u).cos() * (0.5 * beta_d).cos()).powi(2);
    drp_condition(beta_u.cos(), beta_d.cos(), rho)
}

fn evaluate(id: &TransitionId, species: &SpeciesParams, b0: f64) -> Result<ScanPoint> {
    let (u, d, coupling) = line_levels(species, b0, id)?;
    let rho = coupling.rho(u.beta, d.beta);
    if rho / 4.0 < DARK_THRESHOLD {
        return Err(Error::Domain(format!(
            "transition {id} is dark at B0 = {b0} T"
        )));
    }
    Ok(ScanPoint {
        field: b0,
        phi: drp_condition(u.polarization, d.polarization, rho),
        pu_minus_pd: u.polarization - d.polarization,
        rho,
    })
}

/// φ = (P_u − P_d)² − 2ρ at `b0`.
pub fn drp_objective(id: &TransitionId, species: &SpeciesParams, b0: f64) -> Result<f64> {
    evaluate(id, species, b0).map(|p| p.phi)
}

/// P_u − P_d at `b0`.
pub fn owp_objective(id: &TransitionId, species: &SpeciesParams, b0: f64) -> Result<f64> {
    evaluate(id, species, b0).map(|p| p.pu_minus_pd)
}

fn objective(kind: RootKind, id: &TransitionId, species: &SpeciesParams, b0: f64) -> Result<f64> {
    match kind {
        RootKind::Drp => drp_objective(id, species, b0),
        RootKind::Owp => owp_objective(id, species, b0),
    }
}

fn grid(range: (f64, f64), grid_n: usize) -> Result<Vec<f64>> {
    let (lo, hi) = range;
    if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && lo < hi) {
        return Err(Error::Parameter(format!(
            "field range must satisfy 0 <= lo < hi, got [{lo}, {hi}]"
        )));
    }
    if grid_n < MIN_GRID {
        return Err(Error::Parameter(format!(
            "grid size must be at least {MIN_GRID}, got {grid_n}"
        )));
    }
    let step = (hi - lo) / (grid_n - 1) as f64;
    Ok((0..grid_n)
        .map(|i| {
            if i + 1 == grid_n {
                hi
            } else {
                lo + step * i as f64
            }
        })
        .collect())
}

/// Evaluates both objectives on a uniform grid and refines every root.
pub fn scan(
    id: &TransitionId,
    species: &SpeciesParams,
    range: (f64, f64),
    grid_n: usize,
) -> Result<Scan> {
    id.validate(species)?;
    let fields = grid(range, grid_n)?;
    let points = fields
        .par_iter()
        .map(|&b| evaluate(id, species, b))
        .collect::<Result<Vec<_>>>()?;
    let phi: Vec<f64> = points.iter().map(|p| p.phi).collect();
    let dp: Vec<f64> = points.iter().map(|p| p.pu_minus_pd).collect();
    let drps = roots_on_grid(RootKind::Drp, id, species, &fields, &phi)?;
    let owps = roots_on_grid(RootKind::Owp, id, species, &fields, &dp)?;
    let mut grazing = grazing_points(RootKind::Drp, &fields, &phi);
    grazing.extend(grazing_points(RootKind::Owp, &fields, &dp));
    Ok(Scan {
        transition: *id,
        points,
        drps,
        owps,
        grazing,
    })
}

/// All sign-change roots of φ in `range`, ascending in field.
pub fn find_drps(
    id: &TransitionId,
    species: &SpeciesParams,
    range: (f64, f64),
    grid_n: usize,
) -> Result<Vec<FieldRoot>> {
    find(RootKind::Drp, id, species, range, grid_n)
}

/// All sign-change roots of P_u − P_d in `range`, ascending in field.
pub fn find_owps(
    id: &TransitionId,
    species: &SpeciesParams,
    range: (f64, f64),
    grid_n: usize,
) -> Result<Vec<FieldRoot>> {
    find(RootKind::Owp, id, species, range, grid_n)
}

fn find(
    kind: RootKind,
    id: &TransitionId,
    species: &SpeciesParams,
    range: (f64, f64),
    grid_n: usize,
) -> Result<Vec<FieldRoot>> {
    id.validate(species)?;
    let fields = grid(range, grid_n)?;
    let values = fields
        .par_iter()
        .map(|&b| objective(kind, id, species, b))
        .collect::<Result<Vec<_>>>()?;
    roots_on_grid(kind, id, species, &fields, &values)
}

fn roots_on_grid(
    kind: RootKind,
    id: &TransitionId,
    species: &SpeciesParams,
    fields: &[f64],
    values: &[f64],
) -> Result<Vec<FieldRoot>> {
    let n = fields.len();
    let mut brackets = Vec::new();
    let mut i = 0;
    while i + 1 < n {
        let (fa, fb) = (values[i], values[i + 1]);
        if fa == 0.0 {
            // Exact grid hit: widen to the neighbours so the bracket still
            // carries the sign change.
            let lo = i.saturating_sub(1);
            if values[lo] * values[i + 1] < 0.0 || lo == i {
                brackets.push((fields[i], fields[i], true));
            }
            i += 1;
            continue;
        }
        if fa * fb < 0.0 {
            brackets.push((fields[i], fields[i + 1], false));
        }
        i += 1;
    }
    if values[n - 1] == 0.0 && n >= 2 && values[n - 2] != 0.0 {
        brackets.push((fields[n - 1], fields[n - 1], true));
    }

    let mut roots = brackets
        .par_iter()
        .map(|&(lo, hi, exact)| {
            let (field, residual, bracket) = if exact {
                let k = fields.iter().position(|&b| b == lo).unwrap();
                let blo = fields[k.saturating_sub(1)];
                let bhi = fields[(k + 1).min(n - 1)];
                (lo, 0.0, (blo, bhi))
            } else {
                let (x, fx) = refine(|b| objective(kind, id, species, b), lo, hi)?;
                (x, fx, (lo, hi))
            };
            let sys = eigensystem_analytic(species, field)?;
            let idx = |l| sys.find(l).map(|s| s.index).unwrap_or(0);
            Ok(FieldRoot {
                field,
                kind,
                transition: *id,
                indices: (idx(id.upper), idx(id.lower)),
                residual,
                bracket,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    roots.sort_by(|a, b| a.field.total_cmp(&b.field));
    Ok(roots)
}

/// Refines a sign-change bracket, alternating secant and bisection steps,
/// until the bracket is narrower than 1e-7 T and the best point has
/// |f| < 1e-10.
fn refine<F>(f: F, mut a: f64, mut b: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    let (mut best, mut fbest) = if fa.abs() < fb.abs() {
        (a, fa)
    } else {
        (b, fb)
    };
    for iter in 0..MAX_ITER {
        if fbest == 0.0 || (b - a < FIELD_TOL && fbest.abs() < RESIDUAL_TOL) {
            return Ok((best, fbest));
        }
        let mid = 0.5 * (a + b);
        let secant = a - fa * (b - a) / (fb - fa);
        let x = if iter % 2 == 0 && secant > a && secant < b {
            secant
        } else {
            mid
        };
        if x <= a || x >= b {
            break;
        }
        let fx = f(x)?;
        if fx.abs() < fbest.abs() {
            best = x;
            fbest = fx;
        }
        if fx == 0.0 {
            return Ok((x, fx));
        }
        if fa * fx < 0.0 {
            b = x;
            fb = fx;
        } else {
            a = x;
            fa = fx;
        }
    }
    if b - a < FIELD_TOL && fbest.abs() < RESIDUAL_TOL {
        return Ok((best, fbest));
    }
    Err(Error::Numeric {
        field: best,
        reason: format!("root refinement stalled in [{a}, {b}] with residual {fbest:e}"),
    })
}

fn grazing_points(kind: RootKind, fields: &[f64], values: &[f64]) -> Vec<GrazingPoint> {
    let mut out = Vec::new();
    for i in 1..values.len().saturating_sub(1) {
        let (l, c, r) = (values[i - 1], values[i], values[i + 1]);
        let local_min = c.abs() < l.abs() && c.abs() <= r.abs();
        let same_sign = l * c > 0.0 && c * r > 0.0;
        if local_min && same_sign && c.abs() < GRAZING_TOL {
            out.push(GrazingPoint {
                field: fields[i],
                kind,
                value: c,
            });
        }
    }
    out
}
