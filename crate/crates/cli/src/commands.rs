use std::path::{Path, PathBuf};

use donor_drp::{
    decoherence::{
        average_decay, density_for_mean_nn_distance, BathConfig, DecayConfig, DecayMode,
    },
    donor::{build_hamiltonian, eigensystem_analytic, eigensystem_numeric, Eigensystem},
    echo::{concurrence, echo_fidelity, evolve, Axis, PairHamiltonian, PairState},
    magic::{self, FieldRoot, DEFAULT_RANGE},
    species::SpeciesParams,
    transitions::{
        enumerate_transitions, Transition, TransitionClass, TransitionId, TransitionSelector,
    },
    Error, Result,
};

use crate::{
    args::{DecayArgs, EchoArgs, LevelsArgs, MagicArgs, TransitionsArgs},
    config::RunConfig,
    output::{float, parse_range, parse_sweep, Table},
};

const MHZ: f64 = 2.0 * std::f64::consts::PI * 1e6;

/// Settings shared by every subcommand after merging flags and config.
pub struct Context {
    pub species: SpeciesParams,
    pub config: RunConfig,
    pub output: Option<PathBuf>,
}

/// A failure together with what the user needs to recover from it.
#[derive(Debug)]
pub struct Failure {
    pub error: Error,
    /// Valid transitions at the relevant field, for selector errors.
    pub listing: Option<String>,
}

impl From<Error> for Failure {
    fn from(error: Error) -> Self {
        Self {
            error,
            listing: None,
        }
    }
}

type Outcome = std::result::Result<String, Failure>;

fn required<T>(value: Option<T>, what: &str) -> Result<T> {
    value.ok_or_else(|| Error::Parameter(format!("missing {what}")))
}

fn numeric_system(species: &SpeciesParams, b0: f64) -> Result<Eigensystem> {
    let h = build_hamiltonian(species, b0)?;
    eigensystem_numeric(&h, species, b0)
}

/// Lines a user can select at `b0`, one per row.
fn listing(species: &SpeciesParams, b0: f64) -> String {
    let Ok(sys) = eigensystem_analytic(species, b0) else {
        return String::new();
    };
    let mut out = format!("valid transitions at B0 = {b0} T (upper,lower  labels  class  MHz):\n");
    for t in enumerate_transitions(species, &sys) {
        if t.class == TransitionClass::Dark {
            continue;
        }
        out.push_str(&format!(
            "  {},{}  {},{}  {}  {:.3}\n",
            t.upper.index,
            t.lower.index,
            t.upper.label,
            t.lower.label,
            t.class,
            t.frequency_mhz()
        ));
    }
    out
}

fn resolve_transition(
    ctx: &Context,
    selector: Option<&str>,
    b0: f64,
) -> std::result::Result<TransitionId, Failure> {
    let fail = |error: Error| Failure {
        error,
        listing: Some(listing(&ctx.species, b0)),
    };
    let raw = selector
        .map(str::to_owned)
        .or_else(|| ctx.config.transition.clone())
        .ok_or_else(|| fail(Error::UnknownTransition("no --transition given".into())))?;
    let sel: TransitionSelector = raw
        .parse()
        .map_err(|_| fail(Error::UnknownTransition(raw.clone())))?;
    let sys = eigensystem_analytic(&ctx.species, b0)?;
    sel.resolve(&ctx.species, &sys).map_err(|e| match e {
        Error::UnknownTransition(_) | Error::Domain(_) => {
            fail(Error::UnknownTransition(raw.clone()))
        }
        other => other.into(),
    })
}

fn indices_at(ctx: &Context, id: &TransitionId, b0: f64) -> Result<(usize, usize)> {
    let sys = eigensystem_analytic(&ctx.species, b0)?;
    let t = Transition::from_id(&ctx.species, &sys, *id)?;
    Ok((t.upper.index, t.lower.index))
}

pub fn levels(ctx: &Context, args: &LevelsArgs) -> Outcome {
    let text = args
        .field
        .clone()
        .or_else(|| ctx.config.field.clone())
        .or_else(|| ctx.config.b0.map(|b| b.to_string()))
        .unwrap_or_else(|| "0:0.6:601".into());
    let fields = parse_sweep(&text)?;
    let d = ctx.species.dimension();
    let mut header = vec!["B0_T".to_string()];
    header.extend((1..=d).map(|k| format!("E_{k}_MHz")));
    let mut table = Table::create(ctx.output.as_deref(), &header)?;
    let mut last = None;
    for &b in &fields {
        let sys = numeric_system(&ctx.species, b)?;
        let mut row = vec![float(b)];
        row.extend(sys.states.iter().map(|s| float(s.energy / MHZ)));
        table.row(&row)?;
        last = Some(sys);
    }
    table.finish()?;
    let labels = last
        .map(|sys| {
            sys.states
                .iter()
                .map(|s| format!("{}:{}", s.index, s.label))
                .collect::<Vec<_>>()
                .join(" ")
        })
        .unwrap_or_default();
    Ok(format!(
        "{} levels of {} at {} fields; labels at {} T: {labels}",
        d,
        ctx.species.name,
        fields.len(),
        fields.last().copied().unwrap_or_default()
    ))
}

pub fn transitions(ctx: &Context, args: &TransitionsArgs) -> Outcome {
    let text = args
        .field
        .clone()
        .or_else(|| ctx.config.field.clone())
        .or_else(|| ctx.config.b0.map(|b| b.to_string()));
    let fields = parse_sweep(&required(text, "--B")?)?;
    let include_dark = args.include_dark || ctx.config.include_dark.unwrap_or(false);
    let header: Vec<String> = [
        "B0_T", "idx_u", "idx_d", "m_u", "m_d", "class", "freq_MHz", "P_u", "P_d", "rho",
        "strength",
    ]
    .map(String::from)
    .to_vec();
    let mut table = Table::create(ctx.output.as_deref(), &header)?;
    let mut rows = 0;
    let mut allowed = 0;
    for &b in &fields {
        let sys = numeric_system(&ctx.species, b)?;
        for t in enumerate_transitions(&ctx.species, &sys) {
            if t.class == TransitionClass::Dark && !include_dark {
                continue;
            }
            if t.class == TransitionClass::Allowed {
                allowed += 1;
            }
            rows += 1;
            table.row(&[
                float(b),
                t.upper.index.to_string(),
                t.lower.index.to_string(),
                t.upper.m().to_string(),
                t.lower.m().to_string(),
                t.class.to_string(),
                float(t.frequency_mhz()),
                float(t.upper.polarization),
                float(t.lower.polarization),
                float(t.rho),
                float(t.strength),
            ])?;
        }
    }
    table.finish()?;
    Ok(format!(
        "{rows} transitions ({allowed} allowed) over {} fields",
        fields.len()
    ))
}

fn describe_roots(kind: &str, roots: &[FieldRoot]) -> String {
    match roots {
        [] => format!("no {kind}"),
        _ => {
            let fields: Vec<String> = roots.iter().map(|r| format!("{:.6} T", r.field)).collect();
            format!("{kind} at {}", fields.join(", "))
        }
    }
}

pub fn magic(ctx: &Context, args: &MagicArgs) -> Outcome {
    let range = match args.range.as_ref().or(ctx.config.range.as_ref()) {
        Some(s) => parse_range(s)?,
        None => DEFAULT_RANGE,
    };
    let grid = args.grid.or(ctx.config.grid).unwrap_or(400);
    // Indices are resolved in the middle of the range, away from the
    // zero-field degeneracies.
    let mid = 0.5 * (range.0 + range.1);
    let id = resolve_transition(ctx, args.transition.as_deref(), mid)?;
    let (iu, id_) = indices_at(ctx, &id, mid)?;
    let scan = magic::scan(&id, &ctx.species, range, grid)?;

    let header = ["B0_T", "phi", "Pu_minus_Pd", "rho"].map(String::from);
    let mut table = Table::create(ctx.output.as_deref(), &header)?;
    for p in &scan.points {
        table.row(&[
            float(p.field),
            float(p.phi),
            float(p.pu_minus_pd),
            float(p.rho),
        ])?;
    }
    table.finish()?;

    let roots_path = args
        .roots
        .clone()
        .or_else(|| ctx.config.roots.as_ref().map(PathBuf::from));
    if let Some(path) = roots_path {
        write_roots(&path, &scan.drps, &scan.owps)?;
    }
    let mut summary = format!(
        "{iu}->{id_} ({id}): {}; {}",
        describe_roots("DRP", &scan.drps),
        describe_roots("OWP", &scan.owps)
    );
    if !scan.grazing.is_empty() {
        let g: Vec<String> = scan
            .grazing
            .iter()
            .map(|g| format!("{} near {:.6} T", g.kind, g.field))
            .collect();
        summary.push_str(&format!("; grazing {}", g.join(", ")));
    }
    Ok(summary)
}

fn write_roots(path: &Path, drps: &[FieldRoot], owps: &[FieldRoot]) -> Result<()> {
    let header = ["transition", "kind", "B_T", "residual"].map(String::from);
    let mut table = Table::create(Some(path), &header)?;
    let mut all: Vec<&FieldRoot> = drps.iter().chain(owps).collect();
    all.sort_by(|a, b| a.field.total_cmp(&b.field));
    for r in all {
        table.row(&[
            format!("{}->{}", r.indices.0, r.indices.1),
            r.kind.to_string(),
            float(r.field),
            float(r.residual),
        ])?;
    }
    table.finish()
}

pub fn echo(ctx: &Context, args: &EchoArgs) -> Outcome {
    let b0 = required(args.field.or(ctx.config.b0), "--B")?;
    let j = required(args.j.or(ctx.config.j), "--J")?;
    let times = parse_sweep(&required(
        args.t.clone().or_else(|| ctx.config.t.clone()),
        "--t",
    )?)?;
    let dimensionless = args.dimensionless || ctx.config.dimensionless.unwrap_or(false);
    let axis: Axis = args
        .axis
        .as_ref()
        .or(ctx.config.axis.as_ref())
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(Axis::Y);
    if dimensionless && j == 0.0 {
        return Err(Error::Parameter("--dimensionless needs a non-zero J".into()).into());
    }
    if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(Error::Parameter("times must be >= 0".into()).into());
    }
    let id = resolve_transition(ctx, args.transition.as_deref(), b0)?;
    let sys = eigensystem_analytic(&ctx.species, b0)?;
    let t = Transition::from_id(&ctx.species, &sys, id)?;
    let h = PairHamiltonian::from_transition(&t, j);

    let first = if dimensionless { "Jt" } else { "t_s" };
    let header = [
        first,
        "population_ud",
        "population_du",
        "concurrence",
        "fidelity",
    ]
    .map(String::from);
    let mut table = Table::create(ctx.output.as_deref(), &header)?;
    let mut last = (0.0, 1.0);
    for &x in &times {
        let seconds = if dimensionless { x / j } else { x };
        let free = evolve(&PairState::ud(), &h, seconds);
        let fidelity = echo_fidelity(&h, 0.5 * seconds, axis);
        table.row(&[
            float(x),
            float(free.population(PairState::UD)),
            float(free.population(PairState::DU)),
            float(concurrence(&free)),
            float(fidelity),
        ])?;
        last = (x, fidelity);
    }
    table.finish()?;
    Ok(format!(
        "{}->{} ({id}) at {b0} T, J = {j} rad/s, π_{axis}: echo fidelity {} at {first} = {}",
        t.upper.index,
        t.lower.index,
        float(last.1),
        last.0
    ))
}

pub fn decay(ctx: &Context, args: &DecayArgs) -> Outcome {
    let cfg = &ctx.config;
    let seed = args.seed.or(cfg.seed).ok_or_else(|| {
        Error::Parameter("decay needs --seed (or `seed` in the config) for reproducibility".into())
    })?;
    let b0 = required(args.field.or(cfg.b0), "--B")?;
    let density = match (args.density, args.spacing) {
        (Some(d), _) => d,
        (None, Some(s)) => density_for_mean_nn_distance(s),
        (None, None) => match (cfg.density_per_m3, cfg.spacing_m) {
            (Some(d), _) => d,
            (None, Some(s)) => density_for_mean_nn_distance(s),
            (None, None) => {
                return Err(Error::Parameter("missing --density or --spacing".into()).into())
            }
        },
    };
    let radius = args.radius.or(cfg.radius_m).unwrap_or(1e-6);
    let r_min = args
        .r_min
        .or(cfg.r_min_m)
        .unwrap_or(donor_drp::decoherence::DEFAULT_R_MIN);
    let mode: DecayMode = args
        .mode
        .as_ref()
        .or(cfg.mode.as_ref())
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or_default();
    let n = args.n_realizations.or(cfg.n_realizations).unwrap_or(200);
    let times = parse_sweep(&required(args.t.clone().or_else(|| cfg.t.clone()), "--t")?)?;
    let id = resolve_transition(ctx, args.transition.as_deref(), b0)?;
    let (iu, id_) = indices_at(ctx, &id, b0)?;

    let config = DecayConfig {
        species: ctx.species.clone(),
        transition: id,
        b0,
        bath: BathConfig {
            r_min,
            ..BathConfig::new(density, radius)
        },
        mode,
        times,
    };
    let avg = average_decay(&config, n, seed)?;
    let header = ["t_s", "L_mean", "L_stderr", "n_realizations"].map(String::from);
    let mut table = Table::create(ctx.output.as_deref(), &header)?;
    for k in 0..avg.times.len() {
        table.row(&[
            float(avg.times[k]),
            float(avg.mean[k]),
            float(avg.stderr[k]),
            avg.n_realizations.to_string(),
        ])?;
    }
    table.finish()?;
    let t2 = match avg.t2 {
        Some(t) => format!("t2 = {} s", float(t)),
        None => "no 1/e crossing in the time window".into(),
    };
    Ok(format!(
        "{iu}->{id_} ({id}) at {b0} T, {mode}, {n} realizations, seed {seed}: {t2}"
    ))
}
