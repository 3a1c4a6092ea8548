//! The four subcommands: propagate, compare, caustic-map, quartic-bench.

use std::path::Path;

use rayon::prelude::*;

use chordflow_core::export::{fmt17, pgm_p2};
use chordflow_core::oracle::{
    displaced_fock, fock_project, fock_synthesize, shear_evolve, wigner_at, GridWavefunction,
};
use chordflow_core::wigner::evaluate_from_chords;
use chordflow_core::{
    leaf_evolution_engine, leaf_from_csv, make_circle_leaf, propagate_point, run_bench,
    scaling_probe, wigner_caustic_trace, Chord, ChordIndex, CoreError, HamiltonianModel, Leaf,
    MaslovConvention, PhasePoint, QuarticChordSpec,
};

use crate::config::{LeafSpec, RunConfig};
use crate::manifest::Manifest;

/// Process exit codes: config errors and numerical or acceptance failures
/// are distinguished for scripting.
pub enum CmdError {
    Config(String),
    Numerical(String),
    Acceptance(String),
}

impl CmdError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CmdError::Config(_) => 2,
            CmdError::Numerical(_) => 3,
            CmdError::Acceptance(_) => 4,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CmdError::Config(m) | CmdError::Numerical(m) | CmdError::Acceptance(m) => m,
        }
    }
}

fn numerical(site: &str, e: CoreError) -> CmdError {
    CmdError::Numerical(format!("{site}: {e}"))
}

pub fn build_leaf(cfg: &RunConfig) -> Result<Leaf, CmdError> {
    match &cfg.leaf {
        LeafSpec::Circle {
            center,
            radius,
            n_samples,
            quantum_number,
        } => {
            let mut leaf = make_circle_leaf(*center, *radius, *n_samples)
                .map_err(|e| CmdError::Config(format!("leaf: {e}")))?;
            if let Some(n) = quantum_number {
                leaf = leaf
                    .with_quantum_number(*n, cfg.hbar)
                    .map_err(|e| CmdError::Config(format!("leaf: {e}")))?;
            }
            Ok(leaf)
        }
        LeafSpec::File(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CmdError::Config(format!("leaf file: {e}")))?;
            leaf_from_csv(&text).map_err(|e| CmdError::Config(format!("leaf file: {e}")))
        }
    }
}

fn write_text(dir: &Path, name: &str, text: &str, manifest: &mut Manifest) -> Result<(), CmdError> {
    std::fs::create_dir_all(dir).map_err(|e| CmdError::Config(format!("output dir: {e}")))?;
    std::fs::write(dir.join(name), text)
        .map_err(|e| CmdError::Numerical(format!("writing {name}: {e}")))?;
    manifest.outputs.push(name.to_string());
    Ok(())
}

/// Evaluate the leaf-evolution field on the region raster.
fn field_rows(
    leaf_t: &Leaf,
    hbar: f64,
    newton_tol: f64,
    points: &[PhasePoint],
) -> Vec<(PhasePoint, Option<f64>, usize, bool)> {
    let index = ChordIndex::build(leaf_t);
    let conv = MaslovConvention::default();
    points
        .par_iter()
        .map(|x| {
            let chords = match index.chords_at(leaf_t, *x, newton_tol * (1.0 + x.norm())) {
                Ok(c) => c,
                Err(_) => return (*x, None, 0, true),
            };
            match evaluate_from_chords(leaf_t, hbar, &chords, &conv) {
                Ok(eval) => {
                    let caustic = eval.value.is_none();
                    (*x, eval.value, eval.branches.len(), caustic)
                }
                Err(_) => (*x, None, chords.len(), true),
            }
        })
        .collect()
}

fn field_csv(rows: &[(PhasePoint, Option<f64>, usize, bool)]) -> String {
    let mut out = String::from("p,q,W,branch_count,caustic_flag\n");
    for (x, v, n, flag) in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt17(x.p),
            fmt17(x.q),
            fmt17(v.unwrap_or(f64::NAN)),
            n,
            u8::from(*flag)
        ));
    }
    out
}

fn field_pgm(rows: &[(PhasePoint, Option<f64>, usize, bool)], resolution: usize) -> String {
    let vals: Vec<f64> = rows
        .iter()
        .map(|(_, v, _, _)| v.unwrap_or(f64::NAN))
        .collect();
    pgm_p2(&vals, resolution, resolution)
}

pub fn cmd_propagate(cfg: &RunConfig, manifest: &mut Manifest) -> Result<(), CmdError> {
    let leaf = build_leaf(cfg)?;
    let points = cfg.region.points();
    let index = ChordIndex::build(&leaf);

    type Row = (PhasePoint, Vec<chordflow_core::PropagatedBranch>);
    let results: Vec<Result<Row, (PhasePoint, CoreError)>> = points
        .par_iter()
        .map(|x0| {
            match index
                .chords_at(&leaf, *x0, cfg.newton_tol * (1.0 + x0.norm()))
                .and_then(|chords| {
                    chords
                        .iter()
                        .map(|c| propagate_chord(&leaf, cfg, c))
                        .collect::<Result<Vec<_>, _>>()
                }) {
                Ok(branches) => Ok((*x0, branches)),
                Err(e) => Err((*x0, e)),
            }
        })
        .collect();

    let mut csv = String::from(
        "p0,q0,p_tilde,q_tilde,S0,S_t,A0,A_t,branch,caustic_central,caustic_chord\n",
    );
    for res in &results {
        match res {
            Ok((x0, branches)) => {
                for (k, b) in branches.iter().enumerate() {
                    if b.branch0.caustic.is_on_caustic {
                        manifest.caustic_counts.on_wigner_caustic += 1;
                    }
                    if b.caustic_central {
                        manifest.caustic_counts.central_flags += 1;
                    }
                    if b.caustic_chord {
                        manifest.caustic_counts.chord_flags += 1;
                    }
                    csv.push_str(&format!(
                        "{},{},{},{},{},{},{},{},{},{},{}\n",
                        fmt17(x0.p),
                        fmt17(x0.q),
                        fmt17(b.chord_t.center.p),
                        fmt17(b.chord_t.center.q),
                        fmt17(b.branch0.action),
                        fmt17(b.action_t),
                        fmt17(b.branch0.amplitude.unwrap_or(f64::NAN)),
                        fmt17(b.amplitude_t.unwrap_or(f64::NAN)),
                        k,
                        u8::from(b.caustic_central),
                        u8::from(b.caustic_chord),
                    ));
                }
            }
            Err((x0, e)) => {
                if matches!(e, CoreError::DegenerateCenter { .. }) {
                    manifest.caustic_counts.degenerate_centers += 1;
                } else {
                    return Err(numerical(
                        &format!("propagate at ({}, {})", x0.p, x0.q),
                        CoreError::Domain(e.to_string()),
                    ));
                }
            }
        }
    }
    write_text(&cfg.out_dir, "propagation_report.csv", &csv, manifest)?;

    // propagated field on the same raster via the evolved leaf
    let leaf_t = leaf_evolution_engine(&leaf, cfg.model, cfg.t, cfg.ode_tol)
        .map_err(|e| numerical("leaf evolution", e))?;
    let rows = field_rows(&leaf_t, cfg.hbar, cfg.newton_tol, &points);
    write_text(&cfg.out_dir, "wt_field.csv", &field_csv(&rows), manifest)?;
    write_text(
        &cfg.out_dir,
        "wt_field.pgm",
        &field_pgm(&rows, cfg.region.resolution),
        manifest,
    )?;
    Ok(())
}

fn propagate_chord(
    leaf: &Leaf,
    cfg: &RunConfig,
    chord: &Chord,
) -> Result<chordflow_core::PropagatedBranch, CoreError> {
    // reuse the per-point engine on a single chord
    let branches = propagate_point(leaf, cfg.hbar, chord.center, cfg.model, cfg.t, cfg.ode_tol)?;
    branches
        .into_iter()
        .min_by(|a, b| {
            let da = param_dist(a.branch0.chord.params, chord.params);
            let db = param_dist(b.branch0.chord.params, chord.params);
            da.partial_cmp(&db).expect("finite")
        })
        .ok_or_else(|| CoreError::Domain("no branch at chord center".into()))
}

fn param_dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    let d = |x: f64, y: f64| {
        let r = (x - y).rem_euclid(1.0);
        r.min(1.0 - r)
    };
    d(a.0, b.0) + d(a.1, b.1)
}

pub fn cmd_compare(cfg: &RunConfig, manifest: &mut Manifest) -> Result<(), CmdError> {
    if !cfg.engines.oracle {
        return Err(CmdError::Config(
            "compare requires engines.oracle = true".into(),
        ));
    }
    let leaf = build_leaf(cfg)?;
    let LeafSpec::Circle {
        center,
        quantum_number: Some(n_fock),
        ..
    } = cfg.leaf
    else {
        return Err(CmdError::Config(
            "compare needs a circle leaf with leaf.quantum_number (the oracle state)".into(),
        ));
    };

    // oracle state and its exact evolution
    let half = cfg.oracle.grid_half;
    let psi0 = displaced_fock(
        n_fock as usize,
        center,
        -half,
        half,
        cfg.oracle.n_grid,
        cfg.hbar,
    )
    .map_err(|e| numerical("oracle state", e))?;
    let psi_t: GridWavefunction = match cfg.model {
        HamiltonianModel::Harmonic | HamiltonianModel::Quartic => {
            let c = fock_project(&psi0, cfg.oracle.fock_cutoff)
                .map_err(|e| numerical("fock projection", e))?;
            let ct = match cfg.model {
                HamiltonianModel::Harmonic => c.evolve_harmonic(cfg.t),
                _ => c.evolve_quartic(cfg.t),
            };
            fock_synthesize(&ct, -half, half, 2 * cfg.oracle.n_grid)
                .map_err(|e| numerical("fock synthesis", e))?
        }
        HamiltonianModel::Shear => shear_evolve(&psi0, cfg.t),
    };

    let points = cfg.region.points();
    let leaf_t = leaf_evolution_engine(&leaf, cfg.model, cfg.t, cfg.ode_tol)
        .map_err(|e| numerical("leaf evolution", e))?;
    let index_t = ChordIndex::build(&leaf_t);
    let index_0 = ChordIndex::build(&leaf);
    let conv = MaslovConvention::default();

    struct CompareRow {
        x: PhasePoint,
        tips: Option<f64>,
        liouville: Option<f64>,
        leaf_evolution: Option<f64>,
        oracle: f64,
    }

    let rows: Vec<CompareRow> = points
        .par_iter()
        .map(|x| {
            let tol = cfg.newton_tol * (1.0 + x.norm());
            let chords_t = index_t.chords_at(&leaf_t, *x, tol).ok();

            // leaf-evolution engine
            let leaf_ev = if cfg.engines.leaf_evolution {
                chords_t.as_ref().and_then(|ch| {
                    evaluate_from_chords(&leaf_t, cfg.hbar, ch, &conv)
                        .ok()
                        .and_then(|e| e.value)
                })
            } else {
                None
            };

            // tips engine: transport along the chords whose evolved
            // midpoint is x (lagrangian labels of the evolved chords)
            let tips_enabled = cfg.engines.tips;
            let tips = chords_t.as_ref().filter(|_| tips_enabled).and_then(|ch| {
                if ch.is_empty() {
                    return Some(0.0);
                }
                let mut acc = 0.0;
                for c in ch {
                    if c.is_zero_length() {
                        return None;
                    }
                    let chord0 = chord_from_params(&leaf, c.params);
                    let branches = propagate_point(
                        &leaf,
                        cfg.hbar,
                        chord0.center,
                        cfg.model,
                        cfg.t,
                        cfg.ode_tol,
                    )
                    .ok()?;
                    let b = branches.into_iter().min_by(|a, b| {
                        param_dist(a.branch0.chord.params, c.params)
                            .partial_cmp(&param_dist(b.branch0.chord.params, c.params))
                            .expect("finite")
                    })?;
                    acc += b.value(cfg.hbar)?;
                }
                Some(acc)
            });

            // liouville engine on the initial semiclassical field
            let liouville = if cfg.engines.liouville {
                let back = chordflow_core::oracle::exact_backward(cfg.model, *x, cfg.t);
                index_0
                    .chords_at(&leaf, back, cfg.newton_tol * (1.0 + back.norm()))
                    .ok()
                    .and_then(|ch| {
                        evaluate_from_chords(&leaf, cfg.hbar, &ch, &conv)
                            .ok()
                            .and_then(|e| e.value)
                    })
            } else {
                None
            };

            CompareRow {
                x: *x,
                tips,
                liouville,
                leaf_evolution: leaf_ev,
                oracle: wigner_at(&psi_t, *x),
            }
        })
        .collect();

    let mut csv =
        String::from("p,q,W_tips,W_liouville,W_leaf_evolution,W_oracle\n");
    for r in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            fmt17(r.x.p),
            fmt17(r.x.q),
            fmt17(r.tips.unwrap_or(f64::NAN)),
            fmt17(r.liouville.unwrap_or(f64::NAN)),
            fmt17(r.leaf_evolution.unwrap_or(f64::NAN)),
            fmt17(r.oracle),
        ));
    }
    write_text(&cfg.out_dir, "compare_fields.csv", &csv, manifest)?;

    // error metrics over points where every requested engine has a value
    let mut metrics = String::from("engine,l2_error,points\n");
    let engines: [(&str, Box<dyn Fn(&CompareRow) -> Option<f64>>); 3] = [
        ("tips", Box::new(|r: &CompareRow| r.tips)),
        ("liouville", Box::new(|r: &CompareRow| r.liouville)),
        (
            "leaf_evolution",
            Box::new(|r: &CompareRow| r.leaf_evolution),
        ),
    ];
    for (name, getter) in &engines {
        let mut num = 0.0;
        let mut count = 0usize;
        for r in &rows {
            if let Some(v) = getter(r) {
                num += (v - r.oracle) * (v - r.oracle);
                count += 1;
            }
        }
        let l2 = if count > 0 {
            (num / count as f64).sqrt()
        } else {
            f64::NAN
        };
        metrics.push_str(&format!("{name},{},{count}\n", fmt17(l2)));
    }
    write_text(&cfg.out_dir, "compare_metrics.csv", &metrics, manifest)?;
    Ok(())
}

fn chord_from_params(leaf: &Leaf, params: (f64, f64)) -> Chord {
    let tip_minus = leaf.point(params.0);
    let tip_plus = leaf.point(params.1);
    Chord {
        center: chordflow_core::midpoint(tip_minus, tip_plus),
        tip_minus,
        tip_plus,
        xi: tip_plus - tip_minus,
        params,
    }
}

pub fn cmd_caustic_map(cfg: &RunConfig, manifest: &mut Manifest) -> Result<(), CmdError> {
    let leaf0 = build_leaf(cfg)?;
    let leaf = if cfg.t != 0.0 {
        leaf_evolution_engine(&leaf0, cfg.model, cfg.t, cfg.ode_tol)
            .map_err(|e| numerical("leaf evolution", e))?
    } else {
        leaf0
    };

    let locus = wigner_caustic_trace(&leaf, cfg.caustic_scan)
        .map_err(|e| numerical("caustic trace", e))?;
    let mut csv = String::from("p,q\n");
    for x in &locus {
        csv.push_str(&format!("{},{}\n", fmt17(x.p), fmt17(x.q)));
    }
    write_text(&cfg.out_dir, "caustic_trace.csv", &csv, manifest)?;

    let points = cfg.region.points();
    let index = ChordIndex::build(&leaf);
    let counts: Vec<i64> = points
        .par_iter()
        .map(
            |x| match index.chords_at(&leaf, *x, cfg.newton_tol * (1.0 + x.norm())) {
                Ok(c) => c.len() as i64,
                Err(_) => -1,
            },
        )
        .collect();
    let mut csv = String::from("p,q,chord_count\n");
    for (x, c) in points.iter().zip(&counts) {
        csv.push_str(&format!("{},{},{}\n", fmt17(x.p), fmt17(x.q), c));
    }
    write_text(&cfg.out_dir, "chord_counts.csv", &csv, manifest)?;
    let vals: Vec<f64> = counts.iter().map(|&c| c.max(0) as f64).collect();
    write_text(
        &cfg.out_dir,
        "chord_counts.pgm",
        &pgm_p2(&vals, cfg.region.resolution, cfg.region.resolution),
        manifest,
    )?;
    manifest.caustic_counts.degenerate_centers =
        counts.iter().filter(|&&c| c < 0).count();
    Ok(())
}

pub fn cmd_quartic_bench(cfg: &RunConfig, manifest: &mut Manifest) -> Result<(), CmdError> {
    if cfg.model != HamiltonianModel::Quartic {
        return Err(CmdError::Config("quartic-bench requires run.model = quartic".into()));
    }
    if cfg.bench.n_specs == 0 {
        return Err(CmdError::Config("bench.n_specs must be positive".into()));
    }

    let specs = seeded_specs(cfg.bench.n_specs, cfg.bench.seed);
    let rows = run_bench(&specs, cfg.ode_tol).map_err(|e| numerical("bench", e))?;

    let mut csv = String::from("r_minus,r_plus,alpha,beta,t,dS_closed,dS_numeric,abs_err\n");
    let mut offenders = Vec::new();
    for r in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            fmt17(r.spec.r_minus),
            fmt17(r.spec.r_plus),
            fmt17(r.spec.alpha),
            fmt17(r.spec.beta),
            fmt17(r.spec.t),
            fmt17(r.ds_closed),
            fmt17(r.ds_numeric),
            fmt17(r.abs_err),
        ));
        if r.abs_err > cfg.bench.tolerance || r.center_err > cfg.bench.center_tolerance {
            offenders.push(format!(
                "spec (r-={}, r+={}, a={}, b={}, t={}): dS err {:.3e}, center err {:.3e}",
                r.spec.r_minus, r.spec.r_plus, r.spec.alpha, r.spec.beta, r.spec.t,
                r.abs_err, r.center_err
            ));
        }
    }
    write_text(&cfg.out_dir, "quartic_bench.csv", &csv, manifest)?;

    // cubic scaling probe
    let b = &cfg.bench;
    let scaling: Vec<QuarticChordSpec> = (0..b.scaling_n)
        .map(|i| {
            let f = i as f64 / (b.scaling_n - 1).max(1) as f64;
            let delta = b.scaling_delta_min * (b.scaling_delta_max / b.scaling_delta_min).powf(f);
            QuarticChordSpec::new(
                b.scaling_rbar - delta / 2.0,
                b.scaling_rbar + delta / 2.0,
                0.0,
                0.0,
                b.scaling_t,
            )
            .expect("positive radii")
        })
        .collect();
    let fit = scaling_probe(&scaling, cfg.ode_tol).map_err(|e| numerical("scaling probe", e))?;
    let mut csv = String::from("delta_r,discrepancy\n");
    for (d, v) in &fit.points {
        csv.push_str(&format!("{},{}\n", fmt17(*d), fmt17(*v)));
    }
    csv.push_str(&format!("# exponent,{}\n", fmt17(fit.exponent)));
    write_text(&cfg.out_dir, "scaling_probe.csv", &csv, manifest)?;

    if (fit.exponent - 3.0).abs() > 0.2 {
        offenders.push(format!("scaling exponent {:.3} outside 3.0 +- 0.2", fit.exponent));
    }
    if !offenders.is_empty() {
        return Err(CmdError::Acceptance(offenders.join("; ")));
    }
    Ok(())
}

/// Deterministic spec sampler (splitmix-style), independent of crate RNGs.
fn seeded_specs(n: usize, seed: u64) -> Vec<QuarticChordSpec> {
    let mut state = seed.wrapping_add(0x9e3779b97f4a7c15);
    let mut next = move || {
        state = state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z = z ^ (z >> 31);
        (z >> 11) as f64 / (1u64 << 53) as f64
    };
    (0..n)
        .map(|_| {
            QuarticChordSpec::new(
                0.3 + 1.7 * next(),
                0.3 + 1.7 * next(),
                -1.0 + 2.0 * next(),
                -1.0 + 2.0 * next(),
                -1.0 + 2.0 * next(),
            )
            .expect("positive radii")
        })
        .collect()
}
