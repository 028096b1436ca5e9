//! Uniform saddle-point approximation of the collision in momentum space.
//!
//! The wavepacket's momentum amplitude at time t is approximated by two
//! terms, an incidence term w(u) and a transmission term T(p) w(-u), sharing
//! one complex argument u = (p - s) sqrt(c) built from the saddle momentum s
//! of the combined Gaussian-spectrum and kinetic-phase exponent. The w
//! function smooths the passage of the integrand's poles across the descent
//! path, so the form stays valid through the collision where plain steepest
//! descent breaks down.
//!
//! The Gaussian spectral weight e^{-delta_x p_c^2 / hbar^2} (exponent ~3.5e9
//! for the reference parameters) cancels analytically against Re eta^2; only
//! the combined, bounded exponent is ever exponentiated. Its closed form
//!
//!   exp0 = [-B^2 + 4 i a p_c (B - beta p_c)] / (4c),   Re exp0 <= 0,
//!
//! with a = delta_x/hbar^2, beta = t/(2 m hbar), c = a + i beta and
//! B = (alpha delta_x - d/2)/hbar, is used directly; its real part is
//! -a (B - 2 beta p_c)^2 / (4 |c|^2), manifestly non-positive.

use num_complex::Complex64;

use crate::barrier::{BarrierSpec, ResonancePole};
use crate::faddeeva;
use crate::{Error, Result};

/// Gaussian wavepacket released left of the barrier moving right: spatial
/// variance `delta_x`, mean momentum `p_c`, center x0 = -alpha * delta_x.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPacket {
    pub delta_x: f64,
    pub p_c: f64,
    pub alpha: f64,
    pub hbar: f64,
}

impl GaussianPacket {
    pub fn new(delta_x: f64, p_c: f64, alpha: f64, hbar: f64) -> Result<GaussianPacket> {
        if !(delta_x > 0.0) {
            return Err(Error::Input(format!("delta_x must be positive, got {delta_x}")));
        }
        if !(p_c > 0.0) {
            return Err(Error::Input(format!("p_c must be positive, got {p_c}")));
        }
        if !(alpha > 0.0) {
            return Err(Error::Input(format!(
                "alpha must be positive (packet starts left of the barrier), got {alpha}"
            )));
        }
        if !(hbar > 0.0) {
            return Err(Error::Input(format!("hbar must be positive, got {hbar}")));
        }
        Ok(GaussianPacket { delta_x, p_c, alpha, hbar })
    }

    /// Initial center x0 = -alpha * delta_x.
    pub fn x0(&self) -> f64 {
        -self.alpha * self.delta_x
    }

    /// Momentum standard deviation hbar / (2 sqrt(delta_x)).
    pub fn sigma_p(&self) -> f64 {
        self.hbar / (2.0 * self.delta_x.sqrt())
    }

    /// Checks the packet against a barrier: the 3-sigma spatial extent must
    /// clear the left barrier edge at t=0, and the Gaussian mass at negative
    /// momenta must be below 1e-6 (the approximation drops those components).
    pub fn validate_against(&self, barrier: &BarrierSpec) -> Result<()> {
        let reach = self.x0() + 3.0 * self.delta_x.sqrt();
        if !(reach < -barrier.d / 2.0) {
            return Err(Error::Input(format!(
                "packet overlaps the barrier at t=0: x0 + 3 sqrt(delta_x) = {reach} >= {}",
                -barrier.d / 2.0
            )));
        }
        let neg_mass = 0.5 * faddeeva::erfc(self.p_c / (self.sigma_p() * std::f64::consts::SQRT_2));
        if !(neg_mass < 1e-6) {
            return Err(Error::Input(format!(
                "negative-momentum weight {neg_mass:.3e} >= 1e-6 (p_c only {:.2} sigma_p above zero)",
                self.p_c / self.sigma_p()
            )));
        }
        Ok(())
    }

    /// Initial momentum amplitude (2 delta_x / pi hbar^2)^{1/4}
    /// e^{-delta_x (p - p_c)^2 / hbar^2} e^{-i p x0 / hbar}.
    pub fn amplitude(&self, p: f64) -> Complex64 {
        let peak = (2.0 * self.delta_x / (std::f64::consts::PI * self.hbar * self.hbar)).powf(0.25);
        let dp = p - self.p_c;
        let modulus = peak * (-self.delta_x * dp * dp / (self.hbar * self.hbar)).exp();
        let phase = -p * self.x0() / self.hbar;
        Complex64::from_polar(modulus, phase)
    }

    /// Initial momentum density |amplitude|^2.
    pub fn density0(&self, p: f64) -> f64 {
        let dp = p - self.p_c;
        (2.0 * self.delta_x / std::f64::consts::PI).sqrt() / self.hbar
            * (-2.0 * self.delta_x * dp * dp / (self.hbar * self.hbar)).exp()
    }
}

/// Saddle-point data at one time: the complex saddle momentum `s`, the scale
/// `f` with f^{-2} = delta_x/hbar^2 + i t/(2 m hbar), the exponent root
/// `eta`, the constant normalization `tau`, and the descent-path slope.
#[derive(Debug, Clone, Copy)]
pub struct SaddleData {
    pub t: f64,
    pub s: Complex64,
    pub f: Complex64,
    pub eta: Complex64,
    pub tau: f64,
    pub slope: f64,
    sqrt_c: Complex64,
    exp0: Complex64,
    half_d_over_hbar: f64,
}

/// Builds the saddle data for a packet/barrier pair at time t.
pub fn saddle_data(packet: &GaussianPacket, barrier: &BarrierSpec, t: f64) -> SaddleData {
    let hbar = packet.hbar;
    let a = packet.delta_x / (hbar * hbar);
    let beta = t / (2.0 * barrier.m * hbar);
    let c = Complex64::new(a, beta);
    let big_a = 2.0 * packet.p_c * a;
    let big_b = (packet.alpha * packet.delta_x - barrier.d / 2.0) / hbar;
    let num = Complex64::new(big_a, big_b);
    let s = num / (2.0 * c);
    let sqrt_c = c.sqrt(); // principal branch: Re > 0 since Re c > 0
    let f = 1.0 / sqrt_c;
    let eta = num / (2.0 * sqrt_c);
    let tau = (2.0 * std::f64::consts::PI * hbar).powf(-0.5)
        * (2.0 * packet.delta_x / (std::f64::consts::PI * hbar * hbar)).powf(0.25);
    let slope = -t * hbar / (2.0 * barrier.m * packet.delta_x);
    // Combined exponent -delta_x p_c^2/hbar^2 + eta^2, reorganized so the
    // giant Gaussian weight cancels before exponentiation.
    let exp0 = Complex64::new(
        -big_b * big_b,
        4.0 * a * packet.p_c * (big_b - beta * packet.p_c),
    ) / (4.0 * c);
    SaddleData {
        t,
        s,
        f,
        eta,
        tau,
        slope,
        sqrt_c,
        exp0,
        half_d_over_hbar: barrier.d / (2.0 * hbar),
    }
}

/// One momentum sample of the approximation, kept as its two interfering
/// terms; `psi` is their sum as constructed.
#[derive(Debug, Clone, Copy)]
pub struct MomentumAmplitude {
    pub p: f64,
    pub psi: Complex64,
    pub incident: Complex64,
    pub transmitted: Complex64,
}

/// One row of an Argand scan: the two terms plus their decomposition into
/// bare w values and slowly rotating prefactors, so
/// incident = pref_incident * w_u_i and
/// transmitted = pref_transmitted * neg_w_neg_u_t.
#[derive(Debug, Clone, Copy)]
pub struct ArgandPoint {
    pub amp: MomentumAmplitude,
    pub w_u_i: Complex64,
    pub neg_w_neg_u_t: Complex64,
    pub pref_incident: Complex64,
    pub pref_transmitted: Complex64,
}

/// Evaluates the two-term approximation at momentum p and time t.
pub fn psi_it0(
    packet: &GaussianPacket,
    barrier: &BarrierSpec,
    p: f64,
    t: f64,
) -> Result<MomentumAmplitude> {
    let sd = saddle_data(packet, barrier, t);
    psi_it0_at(packet, barrier, &sd, p)
}

/// Same as `psi_it0` but reusing precomputed saddle data (the per-time part),
/// for scans over many momenta.
pub fn psi_it0_at(
    packet: &GaussianPacket,
    barrier: &BarrierSpec,
    sd: &SaddleData,
    p: f64,
) -> Result<MomentumAmplitude> {
    Ok(argand_point(packet, barrier, sd, p)?.amp)
}

fn argand_point(
    packet: &GaussianPacket,
    barrier: &BarrierSpec,
    sd: &SaddleData,
    p: f64,
) -> Result<ArgandPoint> {
    if !(p > 0.0) {
        return Err(Error::Input(format!("psi_it0 requires p > 0, got {p}")));
    }
    let hbar = packet.hbar;
    let exponent = sd.exp0 + Complex64::new(0.0, p * sd.half_d_over_hbar);
    if exponent.re > 709.0 {
        return Err(Error::Numerical(format!(
            "combined exponent overflows: Re = {} at p = {p}, t = {}",
            exponent.re, sd.t
        )));
    }
    let norm = (2.0 * std::f64::consts::PI * hbar).powf(-0.5) * std::f64::consts::PI * sd.tau * hbar;
    let pref = norm * exponent.exp();
    let u = (p - sd.s) * sd.sqrt_c;
    let w_u = faddeeva::w(u)?;
    let w_mu = faddeeva::w(-u)?;
    let t_amp = barrier.transmission(Complex64::new(p, 0.0), hbar);
    let incident = pref * w_u;
    let transmitted = pref * t_amp * w_mu;
    Ok(ArgandPoint {
        amp: MomentumAmplitude {
            p,
            psi: incident + transmitted,
            incident,
            transmitted,
        },
        w_u_i: w_u,
        neg_w_neg_u_t: -w_mu,
        pref_incident: pref,
        pref_transmitted: -pref * t_amp,
    })
}

/// Argand decomposition over a strictly increasing positive momentum grid.
pub fn argand_scan(
    packet: &GaussianPacket,
    barrier: &BarrierSpec,
    t: f64,
    p_grid: &[f64],
) -> Result<Vec<ArgandPoint>> {
    require_increasing(p_grid)?;
    let sd = saddle_data(packet, barrier, t);
    p_grid
        .iter()
        .map(|&p| argand_point(packet, barrier, &sd, p))
        .collect()
}

/// G(p,t) on the given grid from the approximate density: the integral of
/// |psi|^2 from each grid point to the top of the grid (trapezoid) minus the
/// exact Gaussian initial tail integral from the same point to infinity.
/// The grid must extend far enough above the transient structure that the
/// neglected |psi|^2 tail beyond it is negligible.
pub fn gq_analytic(
    packet: &GaussianPacket,
    barrier: &BarrierSpec,
    t: f64,
    p_grid: &[f64],
) -> Result<Vec<f64>> {
    require_increasing(p_grid)?;
    let sd = saddle_data(packet, barrier, t);
    let rho: Vec<f64> = p_grid
        .iter()
        .map(|&p| psi_it0_at(packet, barrier, &sd, p).map(|a| a.psi.norm_sqr()))
        .collect::<Result<_>>()?;
    let n = p_grid.len();
    let mut above = vec![0.0; n];
    for i in (0..n - 1).rev() {
        above[i] = above[i + 1]
            + 0.5 * (rho[i] + rho[i + 1]) * (p_grid[i + 1] - p_grid[i]);
    }
    let scale = (2.0 * packet.delta_x).sqrt() / packet.hbar;
    Ok((0..n)
        .map(|i| above[i] - 0.5 * faddeeva::erfc(scale * (p_grid[i] - packet.p_c)))
        .collect())
}

/// Perpendicular distance from a point to the straight descent path through
/// the saddle with the saddle slope.
pub fn sdp_pole_distance(sd: &SaddleData, z: Complex64) -> f64 {
    let rel = z - sd.s;
    (rel.im - sd.slope * rel.re).abs() / (1.0 + sd.slope * sd.slope).sqrt()
}

/// Warns when any resonance pole lies within 3 momentum units of the descent
/// path; dropping pole residues is only safe when the path passes far from
/// them, so proximity is surfaced rather than silently accepted.
pub fn sdp_pole_warning(sd: &SaddleData, poles: &[ResonancePole]) -> Option<String> {
    let near: Vec<String> = poles
        .iter()
        .filter(|p| sdp_pole_distance(sd, p.z) < 3.0)
        .map(|p| format!("{:.6}{:+.6}i (distance {:.3e})", p.z.re, p.z.im, sdp_pole_distance(sd, p.z)))
        .collect();
    if near.is_empty() {
        None
    } else {
        Some(format!(
            "resonance pole(s) within 3 p_u of the descent path at t = {}: {}",
            sd.t,
            near.join(", ")
        ))
    }
}

fn require_increasing(p_grid: &[f64]) -> Result<()> {
    if p_grid.is_empty() {
        return Err(Error::Input("momentum grid is empty".into()));
    }
    if p_grid[0] <= 0.0 {
        return Err(Error::Input("momentum grid must be positive".into()));
    }
    if p_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Input("momentum grid must be strictly increasing".into()));
    }
    Ok(())
}
