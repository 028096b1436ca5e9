//! Batch front-end: each subcommand reads a JSON config, runs the requested
//! engines, and writes figure-ready CSV/JSON artifacts into --out.
//!
//! Momentum CSV grids are two-zone: full resolution within 0.35 p_u of the
//! carrier, where the transient fringes live, and coarse outside, where the
//! density is a featureless tail. With both engines selected the analytic
//! rows are evaluated at exactly the oracle's momenta so the files compare
//! line by line.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;

use crate::analytic::{self, GaussianPacket};
use crate::barrier::{structural_poles, ContourSide};
use crate::config::{EngineChoice, RunConfig};
use crate::grid::{self, Propagator};
use crate::observables::{self, GqCurve, MaxSearch};
use crate::output::{self, fnum, Header};
use crate::{faddeeva, Error, Result};

#[derive(Debug, Parser)]
#[command(
    name = "transient-scatter",
    version,
    about = "Gaussian wavepacket vs. square barrier: transient momentum interference"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct TaskArgs {
    /// JSON run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory for artifacts.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Random seed, recorded in artifact headers and used by stochastic tasks.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Momentum densities at the configured times, one CSV per time and engine.
    Evolve {
        #[command(flatten)]
        task: TaskArgs,
        /// Comma-separated override of the configured times.
        #[arg(long, value_delimiter = ',')]
        times: Option<Vec<f64>>,
    },
    /// Search the maximum of G(p,t); writes a JSON record and the scan surface.
    Gqmax {
        #[command(flatten)]
        task: TaskArgs,
    },
    /// Argand decomposition of the analytic amplitude over a momentum window.
    Argand {
        #[command(flatten)]
        task: TaskArgs,
    },
    /// Resonance and structural poles plus saddle metadata at one time.
    Poles {
        #[command(flatten)]
        task: TaskArgs,
    },
    /// Cross-validate the engines at one time; exit 4 when the threshold fails.
    Compare {
        #[command(flatten)]
        task: TaskArgs,
    },
    /// Evaluate the w function at one complex point (diagnostic).
    #[command(hide = true)]
    WEval {
        #[arg(long, allow_hyphen_values = true)]
        re: f64,
        #[arg(long, allow_hyphen_values = true)]
        im: f64,
    },
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Evolve { task, times } => cmd_evolve(&task, times),
        Command::Gqmax { task } => cmd_gqmax(&task),
        Command::Argand { task } => cmd_argand(&task),
        Command::Poles { task } => cmd_poles(&task),
        Command::Compare { task } => cmd_compare(&task),
        Command::WEval { re, im } => cmd_w_eval(re, im),
    }
}

/// Times formatted the way they appear in file names.
fn tname(t: f64) -> String {
    format!("{t}")
}

/// Two-zone momentum row indices over an ascending grid: `fine_stride` near
/// the carrier, `coarse_stride` elsewhere, clipped to `window`.
fn two_zone_indices(
    p: &[f64],
    p_c: f64,
    window: (f64, f64),
    fine_half_width: f64,
    fine_stride: usize,
    coarse_stride: usize,
) -> Vec<usize> {
    let lo = p.partition_point(|&x| x < window.0);
    let hi = p.partition_point(|&x| x <= window.1);
    let mut idx = Vec::new();
    let mut i = lo;
    while i < hi {
        idx.push(i);
        let stride = if (p[i] - p_c).abs() <= fine_half_width {
            fine_stride
        } else {
            coarse_stride
        };
        i += stride;
    }
    idx
}

fn cmd_evolve(task: &TaskArgs, times_override: Option<Vec<f64>>) -> Result<()> {
    let cfg = RunConfig::load(&task.config)?;
    let r = cfg.resolve()?;
    let (mut times, pad) = match (&times_override, &cfg.evolve) {
        (Some(ts), Some(block)) => (ts.clone(), block.pad),
        (Some(ts), None) => (ts.clone(), 8),
        (None, Some(block)) => (block.times.clone(), block.pad),
        (None, None) => {
            return Err(Error::Config(
                "evolve: no times given (config evolve block or --times)".into(),
            ));
        }
    };
    if times.is_empty() {
        return Err(Error::Config("evolve: times list is empty".into()));
    }
    if let Some(&bad) = times.iter().find(|&&t| !(t >= 0.0)) {
        return Err(Error::Config(format!("evolve: negative time {bad}")));
    }
    times.sort_by(|a, b| a.partial_cmp(b).unwrap());
    times.dedup();

    let window = (r.packet.p_c - 3.5).max(0.01);
    let window = (window, r.packet.p_c + 3.5);
    let mut written: Vec<PathBuf> = Vec::new();

    if r.engine.uses_oracle() {
        let t_final = *times.last().unwrap();
        let sgrid = cfg.spatial_grid(&r.packet, &r.barrier, t_final)?;
        let dt = cfg.dt();
        let mut state = grid::init_packet(&sgrid, &r.packet, &r.barrier)?;
        let mut prop = Propagator::new(sgrid, &r.barrier, r.packet.hbar);
        for &t in &times {
            prop.propagate_to(&mut state, t, dt)?;
            let (p, amps) = grid::momentum_spectrum(&state, &sgrid, r.packet.hbar, pad)?;
            let idx = two_zone_indices(&p, r.packet.p_c, window, 0.35, 1, 12);
            let rows = idx.iter().map(|&i| {
                vec![
                    fnum(p[i]),
                    fnum(amps[i].norm_sqr()),
                    fnum(amps[i].re),
                    fnum(amps[i].im),
                ]
            });
            let path = task.out.join(format!("evolve_oracle_t{}.csv", tname(t)));
            let header = Header {
                command: "evolve",
                config: &cfg,
                seed: task.seed,
                extra: vec![
                    format!("t: {t}"),
                    format!("engine: oracle"),
                    format!("dt: {dt}"),
                    format!("grid: n={} x_min={} dx={}", sgrid.n, sgrid.x_min, sgrid.dx),
                    format!("pad: {pad}"),
                    format!("norm: {:.16e}", state.norm),
                ],
            };
            write_density_csv(&path, &header, rows)?;
            written.push(path.clone());

            if r.engine.uses_analytic() {
                // Same momentum rows so the two files diff line by line.
                let sd = analytic::saddle_data(&r.packet, &r.barrier, t);
                let rows = idx
                    .iter()
                    .map(|&i| {
                        let a = analytic::psi_it0_at(&r.packet, &r.barrier, &sd, p[i])?;
                        Ok(vec![
                            fnum(p[i]),
                            fnum(a.psi.norm_sqr()),
                            fnum(a.psi.re),
                            fnum(a.psi.im),
                        ])
                    })
                    .collect::<Result<Vec<_>>>()?;
                let path = task.out.join(format!("evolve_analytic_t{}.csv", tname(t)));
                let header = analytic_evolve_header(&cfg, task.seed, t);
                write_density_csv(&path, &header, rows.into_iter())?;
                written.push(path);
            }
        }
    } else {
        // Analytic alone: two-zone uniform grid around the carrier.
        let p_grid = analytic_two_zone_grid(&r.packet, window);
        for &t in &times {
            let sd = analytic::saddle_data(&r.packet, &r.barrier, t);
            let rows = p_grid
                .iter()
                .map(|&p| {
                    let a = analytic::psi_it0_at(&r.packet, &r.barrier, &sd, p)?;
                    Ok(vec![
                        fnum(p),
                        fnum(a.psi.norm_sqr()),
                        fnum(a.psi.re),
                        fnum(a.psi.im),
                    ])
                })
                .collect::<Result<Vec<_>>>()?;
            let path = task.out.join(format!("evolve_analytic_t{}.csv", tname(t)));
            let header = analytic_evolve_header(&cfg, task.seed, t);
            write_density_csv(&path, &header, rows.into_iter())?;
            written.push(path);
        }
    }
    for p in &written {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn analytic_evolve_header<'a>(cfg: &'a RunConfig, seed: Option<u64>, t: f64) -> Header<'a> {
    Header {
        command: "evolve",
        config: cfg,
        seed,
        extra: vec![format!("t: {t}"), "engine: analytic".to_string()],
    }
}

fn write_density_csv(
    path: &Path,
    header: &Header,
    rows: impl Iterator<Item = Vec<String>>,
) -> Result<()> {
    output::write_csv(path, header, &["p", "density", "re_psi", "im_psi"], rows)
}

fn analytic_two_zone_grid(packet: &GaussianPacket, window: (f64, f64)) -> Vec<f64> {
    let mut p_grid = Vec::new();
    let mut p = window.0;
    while p <= window.1 {
        p_grid.push(p);
        p += if (p - packet.p_c).abs() <= 0.35 { 2e-5 } else { 2e-4 };
    }
    p_grid
}

fn cmd_gqmax(task: &TaskArgs) -> Result<()> {
    let cfg = RunConfig::load(&task.config)?;
    let r = cfg.resolve()?;
    let block = cfg
        .gqmax
        .clone()
        .ok_or_else(|| Error::Config("gqmax: config has no gqmax block".into()))?;
    let search = MaxSearch {
        p_range: (block.p_range[0], block.p_range[1]),
        t_range: (block.t_range[0], block.t_range[1]),
        nt: block.nt,
        ..MaxSearch::default()
    };
    let mut preferred: Option<String> = None;

    for engine in [EngineChoice::Oracle, EngineChoice::Analytic] {
        let selected = match engine {
            EngineChoice::Oracle => r.engine.uses_oracle(),
            _ => r.engine.uses_analytic(),
        };
        if !selected {
            continue;
        }
        let label = engine.label();
        let (record, rows, resolution) = match engine {
            EngineChoice::Oracle => {
                let t_final = block.t_fixed.unwrap_or(search.t_range.1);
                let sgrid = cfg.spatial_grid(&r.packet, &r.barrier, t_final)?;
                let dt = cfg.dt();
                let resolution = serde_json::json!({
                    "dt": dt, "n": sgrid.n, "pad": block.pad, "nt": search.nt, "tol": search.tol,
                });
                match block.t_fixed {
                    Some(t) => {
                        let (curve, m) = observables::gq_fixed_t_oracle(
                            &r.packet, &r.barrier, &sgrid, dt, block.pad, t, search.p_range,
                        )?;
                        let rec = observables::MaxRecord {
                            gq_max: m.gq,
                            p_star: m.p,
                            t_star: t,
                            boundary_warning: m.on_boundary,
                        };
                        (rec, vec![curve_for_surface(&curve, &search)], resolution)
                    }
                    None => {
                        let surface = observables::gq_max_oracle(
                            &r.packet, &r.barrier, &sgrid, dt, block.pad, &search,
                        )?;
                        let rows = surface_rows_csv(&surface);
                        (surface.max_record, rows, resolution)
                    }
                }
            }
            _ => {
                let resolution = serde_json::json!({
                    "dp": 2e-6, "nt": search.nt, "tol": search.tol,
                });
                match block.t_fixed {
                    Some(t) => {
                        let (curve, m) = observables::gq_fixed_t_analytic(
                            &r.packet, &r.barrier, t, search.p_range,
                        )?;
                        let rec = observables::MaxRecord {
                            gq_max: m.gq,
                            p_star: m.p,
                            t_star: t,
                            boundary_warning: m.on_boundary,
                        };
                        (rec, vec![curve_for_surface(&curve, &search)], resolution)
                    }
                    None => {
                        let surface = observables::gq_max_analytic(&r.packet, &r.barrier, &search)?;
                        let rows = surface_rows_csv(&surface);
                        (surface.max_record, rows, resolution)
                    }
                }
            }
        };
        let record_json = serde_json::json!({
            "gq_max": record.gq_max,
            "p_star": record.p_star,
            "t_star": record.t_star,
            "boundary_warning": record.boundary_warning,
            "engine": label,
            "resolution": resolution,
        });
        let json_path = task.out.join(format!("gqmax_{label}.json"));
        let text =
            output::write_json_record(&json_path, "gqmax", &cfg, task.seed, &record_json)?;
        let surface_path = task.out.join(format!("gq_surface_{label}.csv"));
        let header = Header {
            command: "gqmax",
            config: &cfg,
            seed: task.seed,
            extra: vec![format!("engine: {label}")],
        };
        output::write_csv(
            &surface_path,
            &header,
            &["t", "p", "gq"],
            rows.iter().flat_map(|(t, ps, gs)| {
                let t = *t;
                ps.iter()
                    .zip(gs.iter())
                    .map(move |(&p, &g)| vec![fnum(t), fnum(p), fnum(g)])
            }),
        )?;
        println!("wrote {}", json_path.display());
        println!("wrote {}", surface_path.display());
        if preferred.is_none() || engine == EngineChoice::Oracle {
            preferred = Some(text);
        }
    }
    if let Some(text) = preferred {
        print!("{text}");
    }
    Ok(())
}

type SurfaceRow = (f64, Vec<f64>, Vec<f64>);

fn curve_for_surface(curve: &GqCurve, search: &MaxSearch) -> SurfaceRow {
    // Downsample to the surface budget, mirroring the full search export.
    let lo = curve.p_samples.partition_point(|&x| x < search.p_range.0);
    let hi = curve.p_samples.partition_point(|&x| x <= search.p_range.1);
    let stride = ((hi - lo) / search.surface_points.max(2)).max(1);
    let idx: Vec<usize> = (lo..hi).step_by(stride).collect();
    (
        curve.t,
        idx.iter().map(|&i| curve.p_samples[i]).collect(),
        idx.iter().map(|&i| curve.gq[i]).collect(),
    )
}

fn surface_rows_csv(surface: &observables::GqSurface) -> Vec<SurfaceRow> {
    surface
        .t_samples
        .iter()
        .zip(surface.gq_values.iter())
        .map(|(&t, row)| (t, surface.p_samples.clone(), row.clone()))
        .collect()
}

fn cmd_argand(task: &TaskArgs) -> Result<()> {
    let cfg = RunConfig::load(&task.config)?;
    let r = cfg.resolve()?;
    if r.engine == EngineChoice::Oracle {
        return Err(Error::Config(
            "argand: the term decomposition exists only in the analytic engine".into(),
        ));
    }
    let block = cfg
        .argand
        .clone()
        .ok_or_else(|| Error::Config("argand: config has no argand block".into()))?;
    if block.count < 2 {
        return Err(Error::Config(format!(
            "argand: count must be >= 2, got {}",
            block.count
        )));
    }
    if !(block.p_window[0] > 0.0 && block.p_window[1] > block.p_window[0]) {
        return Err(Error::Config(format!(
            "argand: window must be positive and increasing, got [{}, {}]",
            block.p_window[0], block.p_window[1]
        )));
    }
    let n = block.count;
    let p_grid: Vec<f64> = (0..n)
        .map(|i| {
            block.p_window[0]
                + (block.p_window[1] - block.p_window[0]) * i as f64 / (n - 1) as f64
        })
        .collect();
    let points = analytic::argand_scan(&r.packet, &r.barrier, block.t, &p_grid)?;
    let sd = analytic::saddle_data(&r.packet, &r.barrier, block.t);
    let header = Header {
        command: "argand",
        config: &cfg,
        seed: task.seed,
        extra: vec![
            format!("t: {}", block.t),
            format!("saddle: {:.16e} {:+.16e}i", sd.s.re, sd.s.im),
            format!("sdp-slope: {:.16e}", sd.slope),
        ],
    };
    let path = task.out.join(format!("argand_t{}.csv", tname(block.t)));
    output::write_csv(
        &path,
        &header,
        &[
            "p", "re_inc", "im_inc", "re_trans", "im_trans", "re_w_uI", "im_w_uI", "re_mw_muT",
            "im_mw_muT", "re_prefI", "im_prefI", "re_prefT", "im_prefT",
        ],
        points.iter().map(|pt| {
            vec![
                fnum(pt.amp.p),
                fnum(pt.amp.incident.re),
                fnum(pt.amp.incident.im),
                fnum(pt.amp.transmitted.re),
                fnum(pt.amp.transmitted.im),
                fnum(pt.w_u_i.re),
                fnum(pt.w_u_i.im),
                fnum(pt.neg_w_neg_u_t.re),
                fnum(pt.neg_w_neg_u_t.im),
                fnum(pt.pref_incident.re),
                fnum(pt.pref_incident.im),
                fnum(pt.pref_transmitted.re),
                fnum(pt.pref_transmitted.im),
            ]
        }),
    )?;
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_poles(task: &TaskArgs) -> Result<()> {
    let cfg = RunConfig::load(&task.config)?;
    let r = cfg.resolve()?;
    let block = cfg
        .poles
        .clone()
        .ok_or_else(|| Error::Config("poles: config has no poles block".into()))?;
    if !(block.re_range[0] < block.re_range[1] && block.im_range[0] < block.im_range[1]) {
        return Err(Error::Config(format!(
            "poles: malformed region [{}, {}] x [{}, {}]",
            block.re_range[0], block.re_range[1], block.im_range[0], block.im_range[1]
        )));
    }
    let resonances = r.barrier.find_resonance_poles(
        r.packet.hbar,
        (block.re_range[0], block.re_range[1]),
        (block.im_range[0], block.im_range[1]),
        block.max_count,
    )?;
    let structural = structural_poles(r.packet.p_c);
    let sd = analytic::saddle_data(&r.packet, &r.barrier, block.t);
    let mut extra = vec![
        format!("t: {}", block.t),
        format!("saddle: {:.16e} {:+.16e}i", sd.s.re, sd.s.im),
        format!("sdp-slope: {:.16e}", sd.slope),
    ];
    if let Some(warning) = analytic::sdp_pole_warning(&sd, &resonances) {
        extra.push(format!("sdp-warning: {warning}"));
        eprintln!("warning: {warning}");
    }
    let side = |s: ContourSide| match s {
        ContourSide::Above => "above",
        ContourSide::Below => "below",
    };
    let mut rows: Vec<Vec<String>> = structural
        .iter()
        .map(|sp| {
            let om = r.barrier.omega(sp.z, r.packet.hbar);
            vec![
                format!("structural_{}", sp.label),
                fnum(sp.z.re),
                fnum(sp.z.im),
                side(sp.side).to_string(),
                fnum(om.norm()),
            ]
        })
        .collect();
    rows.extend(resonances.iter().map(|rp| {
        vec![
            "resonance".to_string(),
            fnum(rp.z.re),
            fnum(rp.z.im),
            "below".to_string(),
            fnum(rp.residual),
        ]
    }));
    let header = Header {
        command: "poles",
        config: &cfg,
        seed: task.seed,
        extra,
    };
    let path = task.out.join("poles.csv");
    output::write_csv(
        &path,
        &header,
        &["kind", "re_p", "im_p", "contour_side", "abs_omega"],
        rows.into_iter(),
    )?;
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_compare(task: &TaskArgs) -> Result<()> {
    let cfg = RunConfig::load(&task.config)?;
    let r = cfg.resolve()?;
    if r.engine != EngineChoice::Both {
        return Err(Error::Config(
            "compare: requires engine \"both\" (it cross-validates the two engines)".into(),
        ));
    }
    let block = cfg
        .compare
        .clone()
        .ok_or_else(|| Error::Config("compare: config has no compare block".into()))?;
    let (w_lo, w_hi) = (block.window[0], block.window[1]);
    if !(w_lo > 0.0 && w_hi > w_lo) {
        return Err(Error::Config(format!(
            "compare: window must be positive and increasing, got [{w_lo}, {w_hi}]"
        )));
    }
    let sgrid = cfg.spatial_grid(&r.packet, &r.barrier, block.t)?;
    let dt = cfg.dt();
    let mut state = grid::init_packet(&sgrid, &r.packet, &r.barrier)?;
    let mut prop = Propagator::new(sgrid, &r.barrier, r.packet.hbar);
    prop.propagate_to(&mut state, block.t, dt)?;
    let (p, amps) = grid::momentum_spectrum(&state, &sgrid, r.packet.hbar, block.pad)?;
    let lo = p.partition_point(|&x| x < w_lo);
    let hi = p.partition_point(|&x| x <= w_hi);
    let sd = analytic::saddle_data(&r.packet, &r.barrier, block.t);
    let mut l2_num = 0.0;
    let mut l2_den = 0.0;
    let mut max_abs = 0.0f64;
    let mut peak = 0.0f64;
    for i in lo..hi {
        let rho_o = amps[i].norm_sqr();
        let rho_a = analytic::psi_it0_at(&r.packet, &r.barrier, &sd, p[i])?
            .psi
            .norm_sqr();
        let d = rho_a - rho_o;
        l2_num += d * d;
        l2_den += rho_o * rho_o;
        max_abs = max_abs.max(d.abs());
        peak = peak.max(rho_o);
    }
    if l2_den == 0.0 {
        return Err(Error::Numerical(format!(
            "compare: oracle density vanishes on [{w_lo}, {w_hi}]"
        )));
    }
    let l2_rel = (l2_num / l2_den).sqrt();
    let max_rel = max_abs / peak;
    let pass = l2_rel <= block.threshold;
    let record = serde_json::json!({
        "t": block.t,
        "window": [w_lo, w_hi],
        "l2_rel": l2_rel,
        "max_rel": max_rel,
        "threshold": block.threshold,
        "pass": pass,
        "dt": dt,
        "pad": block.pad,
        "n": sgrid.n,
    });
    let path = task.out.join(format!("compare_t{}.json", tname(block.t)));
    let text = output::write_json_record(&path, "compare", &cfg, task.seed, &record)?;
    print!("{text}");
    println!("wrote {}", path.display());
    if !pass {
        return Err(Error::Threshold(format!(
            "relative L2 distance {l2_rel:.4} exceeds {} at t = {}",
            block.threshold, block.t
        )));
    }
    Ok(())
}

fn cmd_w_eval(re: f64, im: f64) -> Result<()> {
    let ev = faddeeva::w_eval(Complex64::new(re, im))?;
    let record = serde_json::json!({
        "z": {"re": re, "im": im},
        "w": {"re": ev.w.re, "im": ev.w.im},
        "est_error": ev.est_error,
    });
    println!("{}", serde_json::to_string_pretty(&record)?);
    Ok(())
}
