//! Momentum distributions, the integrated excess G(p,t), and its maxima.
//!
//! G(p,t) integrates the density difference rho(.,t) - rho(.,0) from p to the
//! top of the sampled momentum grid. Both densities are unit-normalized, so
//! the value at the bottom of a full grid vanishes and the neglected tail
//! above the grid top is bounded by the initial Gaussian's tail mass there.
//!
//! The maximum search is deterministic by construction: a coarse time scan,
//! then golden-section refinement in t, with the momentum maximum read off
//! the sampling grid and sharpened by a local quadratic fit. Identical
//! inputs give bit-identical records.
//!
//! The classical control evolves samples of the matching Gaussian phase-space
//! density through exact piecewise-constant-potential dynamics. Energy
//! conservation caps every trajectory's momentum at its initial value, so
//! the classical G can only lose probability above any threshold.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::analytic::{self, GaussianPacket};
use crate::barrier::BarrierSpec;
use crate::grid::{self, GridState, Propagator, SpatialGrid};
use crate::{Error, Result};

/// Momentum density sampled on an increasing grid at one time.
#[derive(Debug, Clone)]
pub struct MomentumDistribution {
    pub t: f64,
    pub p_samples: Vec<f64>,
    pub density: Vec<f64>,
}

impl MomentumDistribution {
    pub fn new(t: f64, p_samples: Vec<f64>, density: Vec<f64>) -> Result<MomentumDistribution> {
        if p_samples.len() != density.len() || p_samples.len() < 2 {
            return Err(Error::Input(format!(
                "distribution needs matching sample arrays of length >= 2, got {} and {}",
                p_samples.len(),
                density.len()
            )));
        }
        if p_samples.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Input("momentum samples must increase strictly".into()));
        }
        if density.iter().any(|&d| d < 0.0 || !d.is_finite()) {
            return Err(Error::Input("density must be finite and non-negative".into()));
        }
        Ok(MomentumDistribution { t, p_samples, density })
    }

    /// Builds the distribution from a grid state via the padded FFT analysis.
    pub fn from_state(
        state: &GridState,
        grid: &SpatialGrid,
        hbar: f64,
        pad: usize,
    ) -> Result<MomentumDistribution> {
        let (p, amps) = grid::momentum_spectrum(state, grid, hbar, pad)?;
        let density = amps.iter().map(|a| a.norm_sqr()).collect();
        MomentumDistribution::new(state.t, p, density)
    }

    /// Trapezoidal integral over the sampled range.
    pub fn integral(&self) -> f64 {
        trapezoid(&self.p_samples, &self.density)
    }
}

fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| 0.5 * (ys[0] + ys[1]) * (xs[1] - xs[0]))
        .sum()
}

fn check_same_grid(a: &MomentumDistribution, b: &MomentumDistribution) -> Result<()> {
    if a.p_samples.len() != b.p_samples.len()
        || a.p_samples
            .iter()
            .zip(b.p_samples.iter())
            .any(|(x, y)| x != y)
    {
        return Err(Error::Input(
            "distributions sampled on different momentum grids cannot be differenced".into(),
        ));
    }
    Ok(())
}

/// G(p,t) at a single momentum: the integral of (density_t - density_0) from
/// p to the top of the shared grid, with the first partial cell interpolated
/// linearly.
pub fn gq(dist_t: &MomentumDistribution, dist_0: &MomentumDistribution, p: f64) -> Result<f64> {
    check_same_grid(dist_t, dist_0)?;
    let ps = &dist_t.p_samples;
    let n = ps.len();
    if p < ps[0] || p > ps[n - 1] {
        return Err(Error::Input(format!(
            "momentum {p} outside sampled range [{}, {}]",
            ps[0],
            ps[n - 1]
        )));
    }
    let diff = |i: usize| dist_t.density[i] - dist_0.density[i];
    // Index of the first sample >= p.
    let k = ps.partition_point(|&x| x < p);
    let mut total = 0.0;
    for i in k..n - 1 {
        total += 0.5 * (diff(i) + diff(i + 1)) * (ps[i + 1] - ps[i]);
    }
    if k > 0 && p < ps[k] {
        let frac = (ps[k] - p) / (ps[k] - ps[k - 1]);
        let d_at_p = diff(k) + (diff(k - 1) - diff(k)) * frac;
        total += 0.5 * (d_at_p + diff(k)) * (ps[k] - p);
    }
    Ok(total)
}

/// G(p,t) at every grid point, as a reverse cumulative trapezoid.
#[derive(Debug, Clone)]
pub struct GqCurve {
    pub t: f64,
    pub p_samples: Vec<f64>,
    pub gq: Vec<f64>,
}

pub fn gq_curve(dist_t: &MomentumDistribution, dist_0: &MomentumDistribution) -> Result<GqCurve> {
    check_same_grid(dist_t, dist_0)?;
    let ps = &dist_t.p_samples;
    let n = ps.len();
    let diff: Vec<f64> = (0..n)
        .map(|i| dist_t.density[i] - dist_0.density[i])
        .collect();
    let mut gq = vec![0.0; n];
    for i in (0..n - 1).rev() {
        gq[i] = gq[i + 1] + 0.5 * (diff[i] + diff[i + 1]) * (ps[i + 1] - ps[i]);
    }
    Ok(GqCurve {
        t: dist_t.t,
        p_samples: ps.clone(),
        gq,
    })
}

/// Location and value of a curve maximum.
#[derive(Debug, Clone, Copy)]
pub struct CurveMax {
    pub p: f64,
    pub gq: f64,
    /// True when the grid argmax sits on the search window edge.
    pub on_boundary: bool,
}

impl GqCurve {
    /// Maximum over [p_lo, p_hi], sharpened by a quadratic fit through the
    /// grid argmax and its neighbors. The fit shifts the location by less
    /// than one grid cell; it never moves the value by more than the local
    /// curvature allows, keeping the search deterministic.
    pub fn max_in(&self, p_lo: f64, p_hi: f64) -> Result<CurveMax> {
        let lo = self.p_samples.partition_point(|&x| x < p_lo);
        let hi = self.p_samples.partition_point(|&x| x <= p_hi);
        if hi - lo < 3 {
            return Err(Error::Input(format!(
                "search window [{p_lo}, {p_hi}] covers fewer than 3 samples"
            )));
        }
        let mut best = lo;
        for i in lo..hi {
            if self.gq[i] > self.gq[best] {
                best = i;
            }
        }
        let on_boundary = best == lo || best == hi - 1;
        if on_boundary || best == 0 || best == self.p_samples.len() - 1 {
            return Ok(CurveMax {
                p: self.p_samples[best],
                gq: self.gq[best],
                on_boundary,
            });
        }
        // Quadratic vertex through (p, G) at best-1, best, best+1.
        let (x0, x1, x2) = (
            self.p_samples[best - 1],
            self.p_samples[best],
            self.p_samples[best + 1],
        );
        let (y0, y1, y2) = (self.gq[best - 1], self.gq[best], self.gq[best + 1]);
        let denom = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0);
        if denom.abs() < 1e-300 {
            return Ok(CurveMax {
                p: x1,
                gq: y1,
                on_boundary: false,
            });
        }
        let num = (x1 - x0) * (x1 - x0) * (y1 - y2) - (x1 - x2) * (x1 - x2) * (y1 - y0);
        let p_star = x1 - 0.5 * num / denom;
        let g_star = quadratic_at(x0, x1, x2, y0, y1, y2, p_star).max(y1);
        Ok(CurveMax {
            p: p_star,
            gq: g_star,
            on_boundary: false,
        })
    }
}

fn quadratic_at(x0: f64, x1: f64, x2: f64, y0: f64, y1: f64, y2: f64, x: f64) -> f64 {
    let l0 = (x - x1) * (x - x2) / ((x0 - x1) * (x0 - x2));
    let l1 = (x - x0) * (x - x2) / ((x1 - x0) * (x1 - x2));
    let l2 = (x - x0) * (x - x1) / ((x2 - x0) * (x2 - x1));
    y0 * l0 + y1 * l1 + y2 * l2
}

/// Coarse-scan rows plus the refined maximum.
#[derive(Debug, Clone)]
pub struct GqSurface {
    pub t_samples: Vec<f64>,
    pub p_samples: Vec<f64>,
    /// gq_values[i][j] = G(p_samples[j], t_samples[i]).
    pub gq_values: Vec<Vec<f64>>,
    pub max_record: MaxRecord,
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct MaxRecord {
    pub gq_max: f64,
    pub p_star: f64,
    pub t_star: f64,
    /// Set when the coarse maximum sat on a range edge (range too small).
    pub boundary_warning: bool,
}

/// Search control for the G maximum.
#[derive(Debug, Clone, Copy)]
pub struct MaxSearch {
    pub p_range: (f64, f64),
    pub t_range: (f64, f64),
    /// Coarse time samples across t_range (>= 3 for interior refinement).
    pub nt: usize,
    /// Absolute G change between refinement steps below which the search stops.
    pub tol: f64,
    /// Points kept per row in the exported surface.
    pub surface_points: usize,
}

impl Default for MaxSearch {
    fn default() -> MaxSearch {
        MaxSearch {
            p_range: (25.0, 32.0),
            t_range: (2.2, 3.1),
            nt: 15,
            tol: 1e-3,
            surface_points: 1201,
        }
    }
}

const GOLDEN: f64 = 0.618033988749894848;

fn downsample_window(curve: &GqCurve, p_lo: f64, p_hi: f64, points: usize) -> (Vec<f64>, Vec<f64>) {
    let lo = curve.p_samples.partition_point(|&x| x < p_lo);
    let hi = curve.p_samples.partition_point(|&x| x <= p_hi);
    let span = hi.saturating_sub(lo);
    let stride = (span / points.max(2)).max(1);
    let idx: Vec<usize> = (lo..hi).step_by(stride).collect();
    (
        idx.iter().map(|&i| curve.p_samples[i]).collect(),
        idx.iter().map(|&i| curve.gq[i]).collect(),
    )
}

/// Maximum of the analytic G over (p, t): coarse scan then golden-section
/// refinement in t. Each time slice is integrated on a fringe-resolving
/// momentum grid around the carrier; outside that band the approximate
/// density is indistinguishable from the initial one.
pub fn gq_max_analytic(
    packet: &GaussianPacket,
    barrier: &BarrierSpec,
    search: &MaxSearch,
) -> Result<GqSurface> {
    if search.nt < 3 {
        return Err(Error::Input(format!("coarse scan needs nt >= 3, got {}", search.nt)));
    }
    let band = analytic_band(packet, search);
    let eval = |t: f64| -> Result<GqCurve> {
        let gq = analytic::gq_analytic(packet, barrier, t, &band)?;
        Ok(GqCurve {
            t,
            p_samples: band.clone(),
            gq,
        })
    };
    run_search(search, eval)
}

/// Fringe-resolving momentum grid covering the transient band. The band is
/// the integration grid: the approximate density equals the initial one to
/// integration accuracy a quarter momentum unit above the carrier, so the
/// cumulative integral starts there.
fn analytic_band(packet: &GaussianPacket, search: &MaxSearch) -> Vec<f64> {
    let lo = (packet.p_c - 0.2).max(search.p_range.0).max(1e-6);
    let hi = packet.p_c + 0.25;
    let dp = 2e-6;
    let n = ((hi - lo) / dp).ceil() as usize;
    (0..=n).map(|i| lo + i as f64 * dp).collect()
}

/// G curve and window maximum at one pinned time, analytic engine.
pub fn gq_fixed_t_analytic(
    packet: &GaussianPacket,
    barrier: &BarrierSpec,
    t: f64,
    p_range: (f64, f64),
) -> Result<(GqCurve, CurveMax)> {
    let search = MaxSearch {
        p_range,
        ..MaxSearch::default()
    };
    let band = analytic_band(packet, &search);
    let gq = analytic::gq_analytic(packet, barrier, t, &band)?;
    let curve = GqCurve {
        t,
        p_samples: band,
        gq,
    };
    let m = curve.max_in(p_range.0, p_range.1)?;
    Ok((curve, m))
}

/// G curve and window maximum at one pinned time, oracle engine.
pub fn gq_fixed_t_oracle(
    packet: &GaussianPacket,
    barrier: &BarrierSpec,
    grid: &SpatialGrid,
    dt: f64,
    pad: usize,
    t: f64,
    p_range: (f64, f64),
) -> Result<(GqCurve, CurveMax)> {
    let state0 = grid::init_packet(grid, packet, barrier)?;
    let dist0 = MomentumDistribution::from_state(&state0, grid, packet.hbar, pad)?;
    let mut prop = Propagator::new(*grid, barrier, packet.hbar);
    let mut state = state0;
    prop.propagate_to(&mut state, t, dt)?;
    let dist = MomentumDistribution::from_state(&state, grid, packet.hbar, pad)?;
    let curve = gq_curve(&dist, &dist0)?;
    let m = curve.max_in(p_range.0, p_range.1)?;
    Ok((curve, m))
}

/// Maximum of the oracle G over (p, t). The coarse scan propagates forward
/// once; refinement re-propagates from a moving base state just below the
/// shrinking bracket, so total work stays near twice the plain scan.
pub fn gq_max_oracle(
    packet: &GaussianPacket,
    barrier: &BarrierSpec,
    grid: &SpatialGrid,
    dt: f64,
    pad: usize,
    search: &MaxSearch,
) -> Result<GqSurface> {
    if search.nt < 3 {
        return Err(Error::Input(format!("coarse scan needs nt >= 3, got {}", search.nt)));
    }
    let state0 = grid::init_packet(grid, packet, barrier)?;
    let dist0 = MomentumDistribution::from_state(&state0, grid, packet.hbar, pad)?;
    let mut prop = Propagator::new(*grid, barrier, packet.hbar);

    let (t_lo, t_hi) = search.t_range;
    let nt = search.nt;
    let t_coarse: Vec<f64> = (0..nt)
        .map(|i| t_lo + (t_hi - t_lo) * i as f64 / (nt - 1) as f64)
        .collect();

    // Forward coarse scan; keep the state one coarse step behind the running
    // best so the refinement bracket can restart there instead of from t=0.
    let mut rows: Vec<GqCurve> = Vec::with_capacity(nt);
    let mut state = state0.clone();
    let mut best_i = 0usize;
    let mut best_val = f64::NEG_INFINITY;
    let mut bracket_state = state0;
    for (i, &t) in t_coarse.iter().enumerate() {
        let before = state.clone();
        prop.propagate_to(&mut state, t, dt)?;
        let dist = MomentumDistribution::from_state(&state, grid, packet.hbar, pad)?;
        let curve = gq_curve(&dist, &dist0)?;
        let m = curve.max_in(search.p_range.0, search.p_range.1)?;
        if m.gq > best_val {
            best_val = m.gq;
            best_i = i;
            bracket_state = before;
        }
        rows.push(curve);
    }

    let boundary_t = best_i == 0 || best_i == nt - 1;
    let mut a = t_coarse[best_i.saturating_sub(1)];
    let mut b = t_coarse[(best_i + 1).min(nt - 1)];
    // bracket_state sits at t_coarse[best_i - 1], or at t=0 when best_i == 0.
    let mut base = bracket_state;
    prop.propagate_to(&mut base, a, dt)?;

    fn eval_at(
        prop: &mut Propagator,
        base: &GridState,
        t: f64,
        dt: f64,
        grid: &SpatialGrid,
        hbar: f64,
        pad: usize,
        dist0: &MomentumDistribution,
        p_range: (f64, f64),
    ) -> Result<CurveMax> {
        let mut s = base.clone();
        prop.propagate_to(&mut s, t, dt)?;
        let dist = MomentumDistribution::from_state(&s, grid, hbar, pad)?;
        gq_curve(&dist, dist0)?.max_in(p_range.0, p_range.1)
    }
    macro_rules! probe {
        ($t:expr) => {
            eval_at(
                &mut prop,
                &base,
                $t,
                dt,
                grid,
                packet.hbar,
                pad,
                &dist0,
                search.p_range,
            )?
        };
    }

    // Golden-section in t, advancing the base state as the bracket floor rises.
    let mut c = b - GOLDEN * (b - a);
    let mut d = a + GOLDEN * (b - a);
    let mut fc = probe!(c);
    let mut fd = probe!(d);
    let mut best = if fc.gq > fd.gq { (c, fc) } else { (d, fd) };
    if best_val > best.1.gq {
        let coarse = rows[best_i].max_in(search.p_range.0, search.p_range.1)?;
        best = (t_coarse[best_i], coarse);
    }
    for _ in 0..40 {
        if (b - a) < dt || (fc.gq - fd.gq).abs() < search.tol {
            break;
        }
        if fc.gq > fd.gq {
            b = d;
            d = c;
            fd = fc;
            c = b - GOLDEN * (b - a);
            fc = probe!(c);
        } else {
            a = c;
            prop.propagate_to(&mut base, a, dt)?;
            c = d;
            fc = fd;
            d = a + GOLDEN * (b - a);
            fd = probe!(d);
        }
        let cand = if fc.gq > fd.gq { (c, fc) } else { (d, fd) };
        if cand.1.gq > best.1.gq {
            best = cand;
        }
    }

    let (p_samples, gq_values) = surface_rows(&rows, search);
    Ok(GqSurface {
        t_samples: t_coarse,
        p_samples,
        gq_values,
        max_record: MaxRecord {
            gq_max: best.1.gq,
            p_star: best.1.p,
            t_star: best.0,
            boundary_warning: boundary_t || best.1.on_boundary,
        },
    })
}

fn run_search<F>(search: &MaxSearch, mut eval: F) -> Result<GqSurface>
where
    F: FnMut(f64) -> Result<GqCurve>,
{
    let (t_lo, t_hi) = search.t_range;
    let nt = search.nt;
    let t_coarse: Vec<f64> = (0..nt)
        .map(|i| t_lo + (t_hi - t_lo) * i as f64 / (nt - 1) as f64)
        .collect();
    let mut rows = Vec::with_capacity(nt);
    let mut best_i = 0usize;
    let mut best_val = f64::NEG_INFINITY;
    for (i, &t) in t_coarse.iter().enumerate() {
        let curve = eval(t)?;
        let m = curve.max_in(search.p_range.0, search.p_range.1)?;
        if m.gq > best_val {
            best_val = m.gq;
            best_i = i;
        }
        rows.push(curve);
    }
    let boundary_t = best_i == 0 || best_i == nt - 1;
    let mut a = t_coarse[best_i.saturating_sub(1)];
    let mut b = t_coarse[(best_i + 1).min(nt - 1)];
    let max_of = |curve: &GqCurve| curve.max_in(search.p_range.0, search.p_range.1);
    let mut c = b - GOLDEN * (b - a);
    let mut d = a + GOLDEN * (b - a);
    let mut fc = max_of(&eval(c)?)?;
    let mut fd = max_of(&eval(d)?)?;
    let mut best = if fc.gq > fd.gq { (c, fc) } else { (d, fd) };
    if best_val > best.1.gq {
        best = (t_coarse[best_i], max_of(&rows[best_i])?);
    }
    for _ in 0..60 {
        if (b - a) < 1e-6 || (fc.gq - fd.gq).abs() < search.tol {
            break;
        }
        if fc.gq > fd.gq {
            b = d;
            d = c;
            fd = fc;
            c = b - GOLDEN * (b - a);
            fc = max_of(&eval(c)?)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + GOLDEN * (b - a);
            fd = max_of(&eval(d)?)?;
        }
        let cand = if fc.gq > fd.gq { (c, fc) } else { (d, fd) };
        if cand.1.gq > best.1.gq {
            best = cand;
        }
    }
    let (p_samples, gq_values) = surface_rows(&rows, search);
    Ok(GqSurface {
        t_samples: t_coarse,
        p_samples,
        gq_values,
        max_record: MaxRecord {
            gq_max: best.1.gq,
            p_star: best.1.p,
            t_star: best.0,
            boundary_warning: boundary_t || best.1.on_boundary,
        },
    })
}

fn surface_rows(rows: &[GqCurve], search: &MaxSearch) -> (Vec<f64>, Vec<Vec<f64>>) {
    let (p_samples, _) = downsample_window(
        &rows[0],
        search.p_range.0,
        search.p_range.1,
        search.surface_points,
    );
    let values = rows
        .iter()
        .map(|r| {
            downsample_window(r, search.p_range.0, search.p_range.1, search.surface_points).1
        })
        .collect();
    (p_samples, values)
}

/// Classical trajectory regions for the piecewise-constant barrier.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Region {
    Left,
    Inside,
    Right,
}

/// Final momentum of one classical sample after time t, plus a flag for the
/// measure-zero threshold tie (transmitted with zero interior momentum).
fn classical_final_momentum(barrier: &BarrierSpec, x0: f64, p0: f64, t: f64) -> (f64, bool) {
    let half = barrier.d / 2.0;
    let m = barrier.m;
    let two_mv = 2.0 * m * barrier.v0;
    let mut region = if x0 < -half {
        Region::Left
    } else if x0 > half {
        Region::Right
    } else {
        Region::Inside
    };
    let mut x = x0;
    let mut p = p0;
    let mut rem = t;
    let mut stuck = false;
    loop {
        if rem <= 0.0 {
            break;
        }
        if p == 0.0 {
            // Resting sample (threshold tie or zero draw): stays put.
            break;
        }
        let v = p / m;
        let target = match (region, v > 0.0) {
            (Region::Left, true) => Some(-half),
            (Region::Left, false) => None,
            (Region::Right, false) => Some(half),
            (Region::Right, true) => None,
            (Region::Inside, dirright) => Some(if dirright { half } else { -half }),
        };
        let Some(edge) = target else {
            break; // free flight away from the barrier
        };
        let dt_hit = (edge - x) / v;
        if dt_hit >= rem {
            break;
        }
        x = edge;
        rem -= dt_hit;
        match region {
            Region::Left | Region::Right => {
                let e2 = p * p;
                if e2 > two_mv {
                    p = p.signum() * (e2 - two_mv).sqrt();
                    region = Region::Inside;
                } else if e2 == two_mv {
                    // Measure-zero tie: enters with zero interior momentum
                    // and sits on the barrier for the remaining time.
                    p = 0.0;
                    region = Region::Inside;
                    stuck = true;
                } else {
                    p = -p;
                }
            }
            Region::Inside => {
                p = p.signum() * (p * p + two_mv).sqrt();
                region = if p > 0.0 { Region::Right } else { Region::Left };
            }
        }
    }
    (p, stuck)
}

/// Phase-space samples matching the initial quantum state: independent
/// Gaussians in x (mean -alpha*delta_x, variance delta_x) and p (mean p_c,
/// variance hbar^2/(4 delta_x)). Each sample draws from its own counter
/// stream, so the set is independent of evaluation order.
fn classical_samples(packet: &GaussianPacket, n: usize, seed: u64) -> Vec<(f64, f64)> {
    let x_dist = Normal::new(packet.x0(), packet.delta_x.sqrt()).unwrap();
    let p_dist = Normal::new(packet.p_c, packet.sigma_p()).unwrap();
    (0..n)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            (x_dist.sample(&mut rng), p_dist.sample(&mut rng))
        })
        .collect()
}

/// Classical analogue of G(p,t) by paired Monte Carlo: the same samples
/// estimate both the evolved and the initial exceedance probability, and the
/// half-width is the 95% confidence interval of the paired difference.
pub fn classical_gq(
    packet: &GaussianPacket,
    barrier: &BarrierSpec,
    p: f64,
    t: f64,
    n_samples: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if n_samples < 10_000 {
        return Err(Error::Input(format!(
            "classical estimate needs >= 10000 samples, got {n_samples}"
        )));
    }
    let samples = classical_samples(packet, n_samples, seed);
    let finals: Vec<f64> = samples
        .iter()
        .map(|&(x0, p0)| classical_final_momentum(barrier, x0, p0, t).0)
        .collect();
    Ok(paired_exceedance(&samples, &finals, p, n_samples))
}

fn paired_exceedance(samples: &[(f64, f64)], finals: &[f64], p: f64, n: usize) -> (f64, f64) {
    let mut sum = 0.0;
    let mut sum2 = 0.0;
    for (&(_, p0), &pt) in samples.iter().zip(finals.iter()) {
        let d = (pt > p) as i32 as f64 - (p0 > p) as i32 as f64;
        sum += d;
        sum2 += d * d;
    }
    let nf = n as f64;
    let mean = sum / nf;
    let var = (sum2 / nf - mean * mean).max(0.0) * nf / (nf - 1.0);
    let hw = 1.96 * (var / nf).sqrt();
    (mean, hw)
}

/// Classical G over a (p, t) grid, reusing each time slice's trajectories
/// for every momentum threshold.
pub fn classical_gq_grid(
    packet: &GaussianPacket,
    barrier: &BarrierSpec,
    p_grid: &[f64],
    t_grid: &[f64],
    n_samples: usize,
    seed: u64,
) -> Result<Vec<Vec<(f64, f64)>>> {
    if n_samples < 10_000 {
        return Err(Error::Input(format!(
            "classical estimate needs >= 10000 samples, got {n_samples}"
        )));
    }
    let samples = classical_samples(packet, n_samples, seed);
    let mut out = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let finals: Vec<f64> = samples
            .iter()
            .map(|&(x0, p0)| classical_final_momentum(barrier, x0, p0, t).0)
            .collect();
        out.push(
            p_grid
                .iter()
                .map(|&p| paired_exceedance(&samples, &finals, p, n_samples))
                .collect(),
        );
    }
    Ok(out)
}
