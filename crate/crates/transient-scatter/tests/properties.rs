//! Cross-cutting property suites: function identities against independent
//! oracles, scattering unitarity, dual-route amplitude checks, pole
//! bookkeeping, and propagator conservation laws.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use transient_scatter::analytic::GaussianPacket;
use transient_scatter::barrier::BarrierSpec;
use transient_scatter::faddeeva;
use transient_scatter::grid::{self, Propagator, SpatialGrid};
use transient_scatter::observables;

fn fig1_barrier() -> BarrierSpec {
    BarrierSpec::new(102.5, 2.5, 1.558023).unwrap()
}

const HBAR: f64 = 0.005;

// ---------------------------------------------------------------- faddeeva

#[test]
fn w_sum_identity() {
    // w(z) + w(-z) = 2 exp(-z^2), everywhere; the residual must stay inside
    // the error bounds the evaluations attach to themselves.
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let z = Complex64::new(rng.gen_range(-6.0..6.0), rng.gen_range(-2.0..6.0));
        let ep = faddeeva::w_eval(z).unwrap();
        let em = faddeeva::w_eval(-z).unwrap();
        let rhs = 2.0 * (-z * z).exp();
        let tol = ep.est_error + em.est_error + 1e-14 * rhs.norm();
        assert!(
            (ep.w + em.w - rhs).norm() <= tol,
            "sum identity fails at z = {z}: {} vs {rhs}",
            ep.w + em.w
        );
    }
}

#[test]
fn w_conjugation_identity() {
    // w(-conj z) = conj(w(z)).
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..200 {
        let z = Complex64::new(rng.gen_range(-6.0..6.0), rng.gen_range(-2.0..6.0));
        let lhs = faddeeva::w(-z.conj()).unwrap();
        let rhs = faddeeva::w(z).unwrap().conj();
        assert!(
            (lhs - rhs).norm() / rhs.norm().max(1e-300) < 1e-12,
            "conjugation fails at z = {z}"
        );
    }
}

#[test]
fn w_real_axis_and_imaginary_axis() {
    for i in 0..120 {
        let x = -6.0 + 0.1 * i as f64;
        let ev = faddeeva::w_eval(Complex64::new(x, 0.0)).unwrap();
        // On the real axis the real part is exactly the Gaussian, up to the
        // evaluation's own absolute error bound.
        let g = (-x * x).exp();
        assert!(
            (ev.w.re - g).abs() <= ev.est_error,
            "Re w({x}) = {} vs {g} (bound {})",
            ev.w.re,
            ev.est_error
        );
        // On the positive imaginary axis w is real and positive.
        let wy = faddeeva::w(Complex64::new(0.0, x.abs())).unwrap();
        assert!(wy.re > 0.0);
        assert!(wy.im.abs() <= 1e-15 * wy.re);
    }
}

/// Adaptive Simpson quadrature of the defining integral
/// w(z) = (i/pi) Int e^{-t^2} / (z - t) dt, valid for Im z > 0.
fn w_by_quadrature(z: Complex64) -> Complex64 {
    fn integrand(z: Complex64, t: f64) -> Complex64 {
        (-t * t).exp() / (z - t)
    }
    fn simpson(a: f64, b: f64, fa: Complex64, fm: Complex64, fb: Complex64) -> Complex64 {
        (fa + 4.0 * fm + fb) * ((b - a) / 6.0)
    }
    fn adapt(
        z: Complex64,
        a: f64,
        b: f64,
        fa: Complex64,
        fm: Complex64,
        fb: Complex64,
        whole: Complex64,
        tol: f64,
        depth: usize,
    ) -> Complex64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = integrand(z, lm);
        let frm = integrand(z, rm);
        let left = simpson(a, m, fa, flm, fm);
        let right = simpson(m, b, fm, frm, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.norm() < 15.0 * tol {
            return left + right + delta / 15.0;
        }
        adapt(z, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + adapt(z, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let (a, b) = (-7.5, 7.5);
    let m = 0.0;
    let fa = integrand(z, a);
    let fm = integrand(z, m);
    let fb = integrand(z, b);
    let whole = simpson(a, b, fa, fm, fb);
    let integral = adapt(z, a, b, fa, fm, fb, whole, 1e-12, 28);
    Complex64::new(0.0, std::f64::consts::FRAC_1_PI) * integral
}

#[test]
fn w_matches_defining_integral() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..50 {
        let z = Complex64::new(rng.gen_range(-5.0..5.0), rng.gen_range(0.15..5.0));
        let direct = faddeeva::w(z).unwrap();
        let quad = w_by_quadrature(z);
        assert!(
            (direct - quad).norm() / quad.norm() < 1e-8,
            "quadrature mismatch at z = {z}: {direct} vs {quad}"
        );
    }
}

// ------------------------------------------------------------- scattering

#[test]
fn unitarity_over_random_momenta() {
    let barrier = fig1_barrier();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..1000 {
        let p = rng.gen_range(1.0..60.0);
        let a = barrier.amplitudes(Complex64::new(p, 0.0), HBAR).unwrap();
        let sum = a.r.norm_sqr() + a.t.norm_sqr();
        assert!(
            (sum - 1.0).abs() < 1e-10,
            "|R|^2 + |T|^2 = {sum} at p = {p}"
        );
    }
}

#[test]
fn transmission_omega_product_is_pure_phase() {
    // T(p) * Omega(p) = exp(-i k' d) on the over-threshold strip. Below
    // threshold Omega grows like exp(kappa d) while T underflows, so the
    // product form is only evaluable where both factors are representable.
    let barrier = fig1_barrier();
    for i in 0..1000 {
        let p = 18.0 + 42.0 * i as f64 / 999.0;
        let pc = Complex64::new(p, 0.0);
        let t = barrier.transmission(pc, HBAR);
        let om = barrier.omega(pc, HBAR);
        let (k1, _) = barrier.wavenumbers(pc, HBAR);
        let expect = (-Complex64::i() * k1 * barrier.d).exp();
        assert!(
            (t * om - expect).norm() < 1e-10,
            "product off at p = {p}: {} vs {expect}",
            t * om
        );
    }
}

/// Transfer-route amplitudes: solve the two interface matchings numerically,
/// from the transmitted side back to the incident one. Shares no algebra
/// with the closed-form Omega expressions.
fn amplitudes_by_interface_matching(
    barrier: &BarrierSpec,
    p: f64,
) -> (Complex64, Complex64) {
    let pc = Complex64::new(p, 0.0);
    let (k1, k2) = barrier.wavenumbers(pc, HBAR);
    let (x1, x2) = (-barrier.d / 2.0, barrier.d / 2.0);
    let i = Complex64::i();
    // Transmitted side: F = 1.
    let f = Complex64::new(1.0, 0.0);
    let ratio = k1 / k2;
    let c = f * (i * k1 * x2).exp() * (1.0 + ratio) / 2.0 / (i * k2 * x2).exp();
    let d = f * (i * k1 * x2).exp() * (1.0 - ratio) / 2.0 / (-i * k2 * x2).exp();
    // Incident side: psi and psi' at x1 from the interior solution.
    let e_plus = (i * k2 * x1).exp();
    let e_minus = (-i * k2 * x1).exp();
    let psi = c * e_plus + d * e_minus;
    let dpsi = i * k2 * (c * e_plus - d * e_minus);
    let a = 0.5 * (psi + dpsi / (i * k1)) / (i * k1 * x1).exp();
    let b = 0.5 * (psi - dpsi / (i * k1)) / (-i * k1 * x1).exp();
    (b / a, f / a) // (R, T)
}

#[test]
fn interface_matching_agrees_with_solver() {
    let barrier = fig1_barrier();
    let thr = barrier.threshold();
    let mut momenta: Vec<f64> = (0..200).map(|i| 17.88 + (60.0 - 17.88) * i as f64 / 199.0).collect();
    // Thin under-threshold band where exp(kappa d) stays representable.
    momenta.extend((0..20).map(|i| thr - 1e-4 - 0.01 * i as f64 / 19.0));
    for p in momenta {
        let (r2, t2) = amplitudes_by_interface_matching(&barrier, p);
        let a = barrier.amplitudes(Complex64::new(p, 0.0), HBAR).unwrap();
        assert!(
            (a.r - r2).norm() < 1e-10,
            "R routes disagree at p = {p}: {} vs {r2}",
            a.r
        );
        assert!(
            (a.t - t2).norm() < 1e-10,
            "T routes disagree at p = {p}: {} vs {t2}",
            a.t
        );
    }
}

#[test]
fn wavefunction_continuity_at_barrier_edges() {
    let barrier = fig1_barrier();
    let i = Complex64::i();
    // Over-threshold set plus two shallow-tunneling momenta; deeper ones put
    // exp(kappa d) beyond representability in the edge evaluation itself.
    for p in [28.48, 32.0, 25.0, 19.0, 17.875, 17.87] {
        let pc = Complex64::new(p, 0.0);
        let a = barrier.amplitudes(pc, HBAR).unwrap();
        let (k1, k2) = (a.k_prime, a.k_dprime);
        let (x1, x2) = (-barrier.d / 2.0, barrier.d / 2.0);
        let left = |x: f64| (i * k1 * x).exp() + a.r * (-i * k1 * x).exp();
        let left_d = |x: f64| i * k1 * ((i * k1 * x).exp() - a.r * (-i * k1 * x).exp());
        let mid = |x: f64| a.c * (i * k2 * x).exp() + a.d * (-i * k2 * x).exp();
        let mid_d = |x: f64| i * k2 * (a.c * (i * k2 * x).exp() - a.d * (-i * k2 * x).exp());
        let right = |x: f64| a.t * (i * k1 * x).exp();
        let right_d = |x: f64| i * k1 * a.t * (i * k1 * x).exp();
        let scale = left(x1).norm().max(1.0);
        assert!(
            (left(x1) - mid(x1)).norm() / scale < 1e-10,
            "psi jump at left edge, p = {p}"
        );
        assert!(
            (left_d(x1) - mid_d(x1)).norm() / (k1.norm() * scale) < 1e-10,
            "psi' jump at left edge, p = {p}"
        );
        assert!(
            (mid(x2) - right(x2)).norm() / scale < 1e-10,
            "psi jump at right edge, p = {p}"
        );
        assert!(
            (mid_d(x2) - right_d(x2)).norm() / (k1.norm() * scale) < 1e-10,
            "psi' jump at right edge, p = {p}"
        );
    }
}

#[test]
fn threshold_constant() {
    let barrier = fig1_barrier();
    assert_eq!(barrier.threshold(), (2.0f64 * 1.558023 * 102.5).sqrt());
    assert!((barrier.threshold() - 17.87).abs() < 5e-3);
}

// ------------------------------------------------------------------ poles

#[test]
fn resonance_poles_residuals_location_symmetry() {
    let barrier = fig1_barrier();
    let poles = barrier
        .find_resonance_poles(HBAR, (28.3, 28.7), (-0.2, -1e-6), 200)
        .unwrap();
    assert!(
        poles.len() > 50,
        "expected a dense pole family, found {}",
        poles.len()
    );
    for p in &poles {
        assert!(p.residual < 1e-8, "residual {} at {}", p.residual, p.z);
        assert!(p.z.im < 0.0, "pole {} not in lower half plane", p.z);
        // Mirror partner -conj(z) is a zero too.
        let mirror = barrier.omega(-p.z.conj(), HBAR).norm();
        assert!(mirror < 1e-6, "mirror of {} has |Omega| = {mirror}", p.z);
    }
}

#[test]
fn argument_principle_counts_all_poles() {
    // Winding of Omega around the search rectangle (counterclockwise) equals
    // the number of enclosed zeros; equality shows the search missed none.
    let barrier = fig1_barrier();
    let (re0, re1, im0, im1) = (28.35, 28.45, -0.2, -1e-6);
    let poles = barrier
        .find_resonance_poles(HBAR, (re0, re1), (im0, im1), 200)
        .unwrap();
    let n_per_edge = 4000;
    let mut boundary = Vec::with_capacity(4 * n_per_edge);
    for k in 0..n_per_edge {
        let s = k as f64 / n_per_edge as f64;
        boundary.push(Complex64::new(re0 + s * (re1 - re0), im0));
    }
    for k in 0..n_per_edge {
        let s = k as f64 / n_per_edge as f64;
        boundary.push(Complex64::new(re1, im0 + s * (im1 - im0)));
    }
    for k in 0..n_per_edge {
        let s = k as f64 / n_per_edge as f64;
        boundary.push(Complex64::new(re1 - s * (re1 - re0), im1));
    }
    for k in 0..n_per_edge {
        let s = k as f64 / n_per_edge as f64;
        boundary.push(Complex64::new(re0, im1 + s * (im1 - im0)));
    }
    let mut winding = 0.0;
    let mut prev = barrier.omega(boundary[0], HBAR).arg();
    for z in boundary.iter().skip(1).chain(std::iter::once(&boundary[0])) {
        let arg = barrier.omega(*z, HBAR).arg();
        let mut d = arg - prev;
        while d > std::f64::consts::PI {
            d -= 2.0 * std::f64::consts::PI;
        }
        while d < -std::f64::consts::PI {
            d += 2.0 * std::f64::consts::PI;
        }
        winding += d;
        prev = arg;
    }
    let n_zeros = (winding / (2.0 * std::f64::consts::PI)).round() as i64;
    assert_eq!(
        n_zeros,
        poles.len() as i64,
        "winding {} vs {} located poles",
        winding / (2.0 * std::f64::consts::PI),
        poles.len()
    );
}

// ------------------------------------------------------------- propagator

fn reduced() -> (GaussianPacket, BarrierSpec, SpatialGrid) {
    let packet = GaussianPacket::new(1.0, 2.0, 8.0, 0.05).unwrap();
    let barrier = BarrierSpec::new(1.5, 2.5, 1.0).unwrap();
    let grid = SpatialGrid::new(-16.0, 16.0, 1 << 10).unwrap();
    (packet, barrier, grid)
}

#[test]
fn norm_conserved_over_ten_thousand_steps() {
    let (packet, barrier, g) = reduced();
    let mut state = grid::init_packet(&g, &packet, &barrier).unwrap();
    let mut prop = Propagator::new(g, &barrier, packet.hbar);
    prop.propagate_to(&mut state, 1.0, 1e-4).unwrap();
    assert!((state.norm - 1.0).abs() < 1e-8, "norm = {}", state.norm);
}

#[test]
fn grid_doubling_leaves_gq_max_stable() {
    // With dt well converged, doubling n over the same box shifts the
    // windowed G maximum by far less than 1e-3. Padding keeps the momentum
    // bin width tied to the box length, so both grids sample the same p's.
    let (packet, barrier, _) = reduced();
    let t = 3.1;
    let window = (1.7, 2.3);
    let max_at = |n: usize| {
        let g = SpatialGrid::new(-16.0, 16.0, n).unwrap();
        let (_, m) =
            observables::gq_fixed_t_oracle(&packet, &barrier, &g, 1e-3, 8, t, window).unwrap();
        m.gq
    };
    let coarse = max_at(1 << 10);
    let fine = max_at(1 << 11);
    assert!(coarse > 0.03, "transient too weak to probe: {coarse}");
    assert!(
        (coarse - fine).abs() < 1e-3,
        "G max moved from {coarse} to {fine} on grid doubling"
    );
}

#[test]
fn strang_error_scales_second_order() {
    let (packet, barrier, g) = reduced();
    let state0 = grid::init_packet(&g, &packet, &barrier).unwrap();
    let mut prop = Propagator::new(g, &barrier, packet.hbar);
    let t_end = 3.0;
    let mut run = |dt: f64| {
        let mut s = state0.clone();
        prop.propagate_to(&mut s, t_end, dt).unwrap();
        s
    };
    let reference = run(2.5e-4);
    let l2 = |s: &grid::GridState| -> f64 {
        s.samples
            .iter()
            .zip(reference.samples.iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    };
    let mut prop2 = Propagator::new(g, &barrier, packet.hbar);
    let mut run2 = |dt: f64| {
        let mut s = state0.clone();
        prop2.propagate_to(&mut s, t_end, dt).unwrap();
        s
    };
    let e1 = l2(&run2(4e-3));
    let e2 = l2(&run2(2e-3));
    let ratio = e1 / e2;
    assert!(
        (3.0..5.0).contains(&ratio),
        "halving dt cut the error by {ratio:.2}, expected ~4"
    );
}
