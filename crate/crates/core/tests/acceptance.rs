//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::{
    f64::consts::FRAC_PI_2,
    time::{Duration, Instant},
};

use donor_drp::{
    decoherence::{
        average_decay, density_for_mean_nn_distance, pair_decay_resonant, BathConfig, DecayConfig,
        DecayMode, ECHO_TIME_FACTOR,
    },
    donor::{build_hamiltonian, eigensystem_analytic, eigensystem_numeric, Parity},
    echo::{echo_coherence, refocus, refocus_fidelity, Axis, Neighbor, PairHamiltonian, PairState},
    magic::{self, drp_condition_from_angles, find_drps, find_owps, FieldRoot, DEFAULT_RANGE},
    species::{HalfInt, SpeciesParams},
    transitions::{enumerate_transitions, Transition, TransitionClass, TransitionId},
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn bi() -> SpeciesParams {
    SpeciesParams::bismuth()
}

fn line(s: &str) -> TransitionId {
    s.parse().unwrap()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..hi.ln())).exp()
}

fn drp_11_10() -> Result<FieldRoot, String> {
    let roots = find_drps(&line("-4+,-5u"), &bi(), (0.01, 0.3), 400).map_err(|e| e.to_string())?;
    ensure(roots.len() == 1, || {
        format!("expected one DRP, found {}", roots.len())
    })?;
    Ok(roots[0])
}

fn pair_at(id: &TransitionId, b: f64, j: f64) -> PairHamiltonian {
    let sp = bi();
    let sys = eigensystem_analytic(&sp, b).unwrap();
    PairHamiltonian::from_transition(&Transition::from_id(&sp, &sys, *id).unwrap(), j)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let root = drp_11_10()?;
    let elapsed = start.elapsed();
    ensure((root.field - 0.21).abs() <= 0.01, || {
        format!("DRP at {} T", root.field)
    })?;
    ensure(elapsed < Duration::from_secs(1), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!("one DRP at {:.6} T in {elapsed:.2?}", root.field))
}

fn criterion_2() -> Outcome {
    let root = drp_11_10()?;
    let id = line("-4+,-5u");
    let sys = eigensystem_analytic(&bi(), root.field).map_err(|e| e.to_string())?;
    let u = sys.find(id.upper).unwrap();
    let d = sys.find(id.lower).unwrap();
    ensure((u.index, d.index) == (11, 10), || {
        format!("indices {}, {}", u.index, d.index)
    })?;
    ensure((u.beta - FRAC_PI_2).abs() < 0.02, || {
        format!("β_u = {}", u.beta)
    })?;
    ensure(d.beta == 0.0 && d.parity() == Parity::Unmixed, || {
        format!("β_d = {}", d.beta)
    })?;
    Ok(format!("β_u − π/2 = {:.2e}, β_d = 0", u.beta - FRAC_PI_2))
}

fn criterion_3() -> Outcome {
    let sp = bi();
    let id = line("-1+,-2-");
    let drps = find_drps(&id, &sp, (0.01, 0.3), 400).map_err(|e| e.to_string())?;
    let owps = find_owps(&id, &sp, (0.01, 0.3), 400).map_err(|e| e.to_string())?;
    ensure(drps.len() == 2, || format!("{} DRPs", drps.len()))?;
    ensure(owps.len() == 1, || format!("{} OWPs", owps.len()))?;
    let sep = drps
        .iter()
        .map(|d| (d.field - owps[0].field).abs())
        .fold(f64::INFINITY, f64::min);
    ensure(sep > 1e-4, || format!("separation {sep}"))?;
    Ok(format!(
        "DRPs {:.6}, {:.6} T; OWP {:.6} T; min separation {:.4} T",
        drps[0].field, drps[1].field, owps[0].field, sep
    ))
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let sp = bi();
    let id = line("-4+,-5u");
    let b = drp_11_10()?.field;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst_drp = 1.0f64;
    let mut best_off = 1.0f64;
    for _ in 0..100 {
        let j = log_uniform(&mut rng, 1e3, 1e7);
        let tau = log_uniform(&mut rng, 1e-6, 1e-2);
        let f = refocus_fidelity(&id, &sp, b, j, tau).map_err(|e| e.to_string())?;
        worst_drp = worst_drp.min(f);
        let off = refocus_fidelity(&id, &sp, 0.1, j, tau).map_err(|e| e.to_string())?;
        best_off = best_off.min(off);
    }
    let elapsed = start.elapsed();
    ensure(worst_drp > 1.0 - 1e-10, || {
        format!("DRP fidelity {worst_drp}")
    })?;
    ensure(best_off < 0.99, || {
        format!("lowest off-DRP fidelity {best_off}")
    })?;
    ensure(elapsed < Duration::from_secs(5), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!(
        "min DRP fidelity 1 − {:.1e}; min fidelity at 0.1 T {best_off:.4}; {elapsed:.2?}",
        1.0 - worst_drp
    ))
}

fn random_amplitude(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

/// Output components divided by those of the uncoupled run, on
/// (T₊₁, T₋₁, S₀, T₀).
fn phase_ratios(state: &PairState, h: &PairHamiltonian, tau: f64) -> [Complex64; 4] {
    let coupled = refocus(state, h, tau, Axis::Y).singlet_triplet();
    let free = refocus(state, &h.uncoupled(), tau, Axis::Y).singlet_triplet();
    std::array::from_fn(|k| coupled[k] / free[k])
}

fn criterion_5() -> Outcome {
    let id = line("-4+,-5u");
    let b = drp_11_10()?.field;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let j = log_uniform(&mut rng, 1e3, 1e7);
        let tau = log_uniform(&mut rng, 1e-6, 1e-2);
        let h = pair_at(&id, b, j);
        let c = [
            random_amplitude(&mut rng),
            random_amplitude(&mut rng),
            random_amplitude(&mut rng),
            Complex64::new(0.0, 0.0),
        ];
        let psi = PairState::from_singlet_triplet(c).normalized().unwrap();
        let r = phase_ratios(&psi, &h, tau);
        for a in 0..3 {
            for bb in 0..a {
                worst = worst.max((r[a] / r[bb]).arg().abs());
            }
        }
    }
    ensure(worst < 1e-9, || format!("DFS phase drift {worst:e} rad"))?;

    let mut worst_rel = 0.0f64;
    for _ in 0..50 {
        let h = pair_at(&id, b, log_uniform(&mut rng, 1e3, 1e7));
        // Keep the expected drift Jρτ inside (0.1, 3) rad so it is unwrapped.
        let target = rng.random_range(0.1..3.0);
        let tau = target / (h.j * h.rho);
        let c: [Complex64; 4] = std::array::from_fn(|_| random_amplitude(&mut rng));
        let psi = PairState::from_singlet_triplet(c).normalized().unwrap();
        let r = phase_ratios(&psi, &h, tau);
        let drift = (r[3] / r[2]).arg();
        let expected = 0.5 * h.j * h.rho * (2.0 * tau);
        worst_rel = worst_rel.max((drift / expected - 1.0).abs());
    }
    ensure(worst_rel < 1e-6, || {
        format!("T₀ drift relative error {worst_rel:e}")
    })?;
    Ok(format!(
        "max DFS drift {worst:.1e} rad; T₀–S₀ rate relative error {worst_rel:.1e}"
    ))
}

fn criterion_6() -> Outcome {
    let mut worst = 0.0f64;
    let mut counts = Vec::new();
    for (twice_i, a, delta) in [
        (1, 117.53, 6.156e-4),
        (3, 198.35, 2.613e-4),
        (9, 1475.4, 2.488e-4),
    ] {
        let sp = SpeciesParams::new("x", HalfInt::from_twice(twice_i), a, delta, 27.997)
            .map_err(|e| e.to_string())?;
        counts.push(sp.dimension());
        for k in 0..200 {
            let b = 0.6 * f64::from(k) / 199.0;
            let h = build_hamiltonian(&sp, b).map_err(|e| e.to_string())?;
            let num = eigensystem_numeric(&h, &sp, b).map_err(|e| e.to_string())?;
            let ana = eigensystem_analytic(&sp, b).map_err(|e| e.to_string())?;
            ensure(num.len() == ana.len(), || "state count mismatch".into())?;
            for (x, y) in num.states.iter().zip(&ana.states) {
                let rel = (x.energy - y.energy).abs() / x.energy.abs().max(sp.hyperfine);
                worst = worst.max(rel);
            }
        }
    }
    ensure(counts == [4, 8, 20], || format!("state counts {counts:?}"))?;
    ensure(worst < 1e-10, || {
        format!("max relative energy error {worst:e}")
    })?;
    Ok(format!(
        "state counts {counts:?}; max relative error {worst:.1e}"
    ))
}

fn criterion_7() -> Outcome {
    let p = SpeciesParams::new("P", HalfInt::from_twice(1), 117.53, 6.156e-4, 27.997)
        .map_err(|e| e.to_string())?;
    let sys = eigensystem_analytic(&p, 0.1).map_err(|e| e.to_string())?;
    let allowed: Vec<_> = enumerate_transitions(&p, &sys)
        .into_iter()
        .filter(|t| t.class == TransitionClass::Allowed)
        .collect();
    ensure(allowed.len() == 2, || {
        format!("{} allowed lines", allowed.len())
    })?;
    for t in &allowed {
        let id = t.id();
        let d = find_drps(&id, &p, DEFAULT_RANGE, 400).map_err(|e| e.to_string())?;
        let o = find_owps(&id, &p, DEFAULT_RANGE, 400).map_err(|e| e.to_string())?;
        ensure(d.is_empty() && o.is_empty(), || {
            format!("{id}: {} DRPs, {} OWPs", d.len(), o.len())
        })?;
    }
    let phi = drp_condition_from_angles(0.0, 0.0);
    ensure(phi == -2.0, || format!("unmixed φ = {phi}"))?;
    Ok("2 allowed lines, no DRPs or OWPs; unmixed φ = −2".into())
}

fn criterion_8() -> Outcome {
    let sp = bi();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let sys = eigensystem_analytic(&sp, 0.1).unwrap();
    let lines: Vec<TransitionId> = enumerate_transitions(&sp, &sys)
        .into_iter()
        .filter(|t| t.class != TransitionClass::Dark)
        .map(|t| t.id())
        .collect();
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let id = lines[rng.random_range(0..lines.len())];
        let b = rng.random_range(0.01..0.3);
        let h = pair_at(&id, b, log_uniform(&mut rng, 1e2, 1e5));
        let t = log_uniform(&mut rng, 1e-5, 1e-2);
        let same = rng.random_bool(0.5);
        let neighbour = if same {
            Neighbor::Same
        } else {
            Neighbor::Different
        };
        let tau = ECHO_TIME_FACTOR * t;
        let exact = echo_coherence(&h, tau, neighbour);
        let model = pair_decay_resonant(h.j, h.p_u, h.p_d, h.rho, tau, same);
        worst = worst.max((exact - model).norm());
    }
    ensure(worst < 1e-6, || format!("max deviation {worst:e}"))?;
    Ok(format!(
        "20 pairs, convention τ = {ECHO_TIME_FACTOR}·t, max deviation {worst:.1e}"
    ))
}

fn criterion_9() -> Outcome {
    let start = Instant::now();
    let sp = bi();
    let id = line("-1+,-2-");
    let owp = find_owps(&id, &sp, (0.01, 0.3), 400).map_err(|e| e.to_string())?;
    ensure(owp.len() == 1, || format!("{} OWPs", owp.len()))?;
    let n = 200;
    let points = 400;
    let config = |b0: f64, t_max: f64| DecayConfig {
        species: sp.clone(),
        transition: id,
        b0,
        bath: BathConfig::new(density_for_mean_nn_distance(150e-9), 1e-6),
        mode: DecayMode::IdOnly,
        times: (0..points)
            .map(|k| t_max * k as f64 / (points - 1) as f64)
            .collect(),
    };
    let mut window = 0.1;
    let reference = loop {
        let avg = average_decay(&config(0.1, window), n, 2024).map_err(|e| e.to_string())?;
        if let Some(t2) = avg.t2 {
            break t2;
        }
        window *= 4.0;
        ensure(window < 1e4, || "no decay at 0.1 T".into())?;
    };
    let owp_window = 10.0 * reference;
    let at_owp =
        average_decay(&config(owp[0].field, owp_window), n, 2024).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(60), || {
        format!("took {elapsed:?}")
    })?;
    match at_owp.t2 {
        Some(t2) => {
            let ratio = t2 / reference;
            ensure(ratio > 3.0, || format!("t2 ratio {ratio}"))?;
            Ok(format!(
                "t2(0.1 T) = {reference:.3e} s; t2 ratio {ratio:.2}; {elapsed:.2?}"
            ))
        }
        None => Ok(format!(
            "t2(0.1 T) = {reference:.3e} s; no 1/e crossing at the OWP within {owp_window:.3e} s \
             (ratio > 10, min L = {:.6}); {elapsed:.2?}",
            at_owp.mean.iter().cloned().fold(f64::INFINITY, f64::min)
        )),
    }
}

fn criterion_10() -> Outcome {
    let sp = bi();
    let mut summary = Vec::new();
    for s in ["-4+,-5u", "-1+,-2-"] {
        let id = line(s);
        let coarse = magic::scan(&id, &sp, (0.01, 0.3), 400).map_err(|e| e.to_string())?;
        let fine = magic::scan(&id, &sp, (0.01, 0.3), 800).map_err(|e| e.to_string())?;
        ensure(coarse.drps.len() == fine.drps.len(), || {
            format!("{s}: DRP count changes")
        })?;
        ensure(coarse.owps.len() == fine.owps.len(), || {
            format!("{s}: OWP count changes")
        })?;
        ensure(coarse.grazing.is_empty() && fine.grazing.is_empty(), || {
            format!("{s}: grazing")
        })?;
        // Every sign change of φ on a dense grid holds exactly one reported root.
        let dense = magic::scan(&id, &sp, (0.01, 0.3), 8000).map_err(|e| e.to_string())?;
        let mut changes = Vec::new();
        for w in dense.points.windows(2) {
            if w[0].phi * w[1].phi < 0.0 {
                changes.push((w[0].field, w[1].field));
            }
        }
        ensure(changes.len() == coarse.drps.len(), || {
            format!(
                "{s}: {} sign changes vs {} roots",
                changes.len(),
                coarse.drps.len()
            )
        })?;
        for ((lo, hi), root) in changes.iter().zip(&coarse.drps) {
            ensure(*lo <= root.field && root.field <= *hi, || {
                format!("{s}: root {} outside [{lo}, {hi}]", root.field)
            })?;
        }
        summary.push(format!("{s}: {} DRPs", coarse.drps.len()));
    }
    Ok(summary.join(", "))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("Bi 11→10 DRP", criterion_1),
        ("DRP geometry", criterion_2),
        ("two DRPs for 14→7", criterion_3),
        ("refocusing at DRP", criterion_4),
        ("decoherence-free subspace", criterion_5),
        ("analytic/numeric oracle", criterion_6),
        ("no DRPs for spin-1/2-like systems", criterion_7),
        ("pair-decay oracle", criterion_8),
        ("OWP suppression", criterion_9),
        ("φ(B) shape", criterion_10),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        match outcome {
            Ok(detail) => println!(
                "criterion {:>2} PASS  {name}: {detail} [{elapsed:.2?}]",
                k + 1
            ),
            Err(detail) => {
                failed += 1;
                println!(
                    "criterion {:>2} FAIL  {name}: {detail} [{elapsed:.2?}]",
                    k + 1
                );
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all 10 acceptance criteria passed");
}
