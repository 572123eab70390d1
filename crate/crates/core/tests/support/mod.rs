//! Reference computations for the test suites.
//!
//! Everything here is written from the closed-form equations directly and
//! uses only `erf`/`erfc` from the library: residual formulas, root
//! location (grid scan + bisection), quadrature (Romberg) and ODE
//! integration (classical RK4) are independent re-implementations.
#![allow(dead_code)]

use stefan_core::special::{erf, erfc};
use stefan_core::{DiffusivityKind, TransformedProblem};

pub const SQRT_PI: f64 = 1.772_453_850_905_516;

// ---------------------------------------------------------------------------
// deterministic random numbers

pub struct SeededRng(u64);

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        SeededRng(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1)
    }

    pub fn next_f64(&mut self) -> f64 {
        // xorshift64*
        self.0 ^= self.0 >> 12;
        self.0 ^= self.0 << 25;
        self.0 ^= self.0 >> 27;
        let v = self.0.wrapping_mul(0x2545_F491_4F6C_DD1D);
        (v >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }
}

// ---------------------------------------------------------------------------
// scalar root finding

pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> Option<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if !(flo.is_finite() && fhi.is_finite()) || flo * fhi > 0.0 {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if !fm.is_finite() {
            return None;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// All sign changes of `f` on `grid`, each refined by bisection. Points
/// where `f` is not finite break brackets.
pub fn scan_roots(f: impl Fn(f64) -> f64, grid: &[f64]) -> Vec<f64> {
    let vals: Vec<f64> = grid.iter().map(|&x| f(x)).collect();
    let mut roots = Vec::new();
    for k in 0..grid.len() - 1 {
        let (a, b) = (vals[k], vals[k + 1]);
        if a.is_finite() && b.is_finite() && a * b <= 0.0 {
            if let Some(r) = bisect(&f, grid[k], grid[k + 1]) {
                if roots.last().map_or(true, |&l: &f64| (r - l).abs() > 1e-12 * r.abs().max(1.0)) {
                    roots.push(r);
                }
            }
        }
    }
    roots
}

/// Inner equations may have several roots; each branch is followed
/// separately, counted from the largest root.
const BRANCHES: usize = 2;

fn nth_from_top(roots: Vec<f64>, branch: usize) -> Option<f64> {
    roots.len().checked_sub(branch + 1).map(|i| roots[i])
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

// ---------------------------------------------------------------------------
// ODE integration

/// Classical RK4 for `U'' = -(w/2) D(U) U'` from `(w0, U0, U0')`, returning
/// `U` at each target (targets in increasing distance from `w0`, same side).
pub fn integrate_profile(
    d: impl Fn(f64) -> f64,
    w0: f64,
    u0: f64,
    du0: f64,
    targets: &[f64],
    steps_per_segment: usize,
) -> Vec<f64> {
    let rhs = |w: f64, y: [f64; 2]| [y[1], -0.5 * w * d(y[0]) * y[1]];
    let mut w = w0;
    let mut y = [u0, du0];
    let mut out = Vec::with_capacity(targets.len());
    for &target in targets {
        let h = (target - w) / steps_per_segment as f64;
        for _ in 0..steps_per_segment {
            let k1 = rhs(w, y);
            let k2 = rhs(w + 0.5 * h, [y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]]);
            let k3 = rhs(w + 0.5 * h, [y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]]);
            let k4 = rhs(w + h, [y[0] + h * k3[0], y[1] + h * k3[1]]);
            for i in 0..2 {
                y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
            w += h;
        }
        w = target;
        out.push(y[0]);
    }
    out
}

// ---------------------------------------------------------------------------
// quadrature

/// Romberg integration on `[a, b]` with `2^levels` panels at the finest level.
pub fn romberg(f: impl Fn(f64) -> f64, a: f64, b: f64, levels: usize) -> f64 {
    let mut r = vec![vec![0.0; levels + 1]; levels + 1];
    let mut h = b - a;
    r[0][0] = 0.5 * h * (f(a) + f(b));
    for i in 1..=levels {
        h *= 0.5;
        let n = 1usize << (i - 1);
        let s: f64 = (0..n).map(|k| f(a + (2 * k + 1) as f64 * h)).sum();
        r[i][0] = 0.5 * r[i - 1][0] + h * s;
        let mut p = 1.0;
        for j in 1..=i {
            p *= 4.0;
            r[i][j] = r[i][j - 1] + (r[i][j - 1] - r[i - 1][j - 1]) / (p - 1.0);
        }
    }
    r[levels][levels]
}

// ---------------------------------------------------------------------------
// implicit relation of the exponential family

/// `g` with `ln(2g - nu) - nu/(2g - nu) - b^2 nu^2/4 = c3`, by bisection on
/// `ln(2g - nu)` (nu >= 0).
pub fn implicit_g(c3: f64, b: f64, nu: f64) -> f64 {
    let k = c3 + 0.25 * b * b * nu * nu;
    let f = |y: f64| y - nu * (-y).exp() - k;
    let lo = k - 1.0;
    let mut hi = k + 1.0;
    while f(hi) < 0.0 {
        hi += 2.0 * (hi - k);
    }
    let y = bisect(f, lo, hi).expect("monotone relation");
    0.5 * (nu + y.exp())
}

/// `int_{nu2}^{inf} ds / g(s)`, truncated where `1/g` is negligible.
pub fn far_integral(c3: f64, b: f64, nu2: f64) -> f64 {
    let mut end = nu2 + 1.0;
    while 1.0 / implicit_g(c3, b, end) > 1e-18 {
        end += 1.0;
    }
    romberg(|s| 1.0 / implicit_g(c3, b, s), nu2, end, 12)
}

// ---------------------------------------------------------------------------
// residuals written out from the closed forms

#[derive(Debug, Clone, Copy)]
pub struct Data {
    pub a: f64,
    pub b: f64,
    pub u1: f64,
    pub u2: f64,
    pub v2: f64,
    pub v0: f64,
    pub hv: f64,
    pub hm: f64,
    pub q0: f64,
}

impl Data {
    pub fn problem(&self, liquid: fn(f64) -> DiffusivityKind, solid: fn(f64) -> DiffusivityKind) -> TransformedProblem {
        TransformedProblem {
            liquid_kind: liquid(self.a),
            solid_kind: solid(self.b),
            u_evaporation: self.u1,
            u_melting: self.u2,
            v_melting: self.v2,
            v_far: self.v0,
            latent_evaporation: self.hv,
            latent_melting: self.hm,
            flux_amplitude: self.q0,
            ref_u: 0.0,
            ref_v: 0.0,
        }
    }
}

pub fn const_kind(c: f64) -> DiffusivityKind {
    DiffusivityKind::ConstDiff { coeff: c }
}
pub fn invsq_kind(c: f64) -> DiffusivityKind {
    DiffusivityKind::InverseSquare { coeff: c }
}
pub fn exp_kind(c: f64) -> DiffusivityKind {
    DiffusivityKind::ExpDiff { coeff: c }
}

/// Liquid erf profile flux `U'(w) = C1 e^{-a^2 w^2 / 4}`.
fn liquid_flux(d: &Data, w1: f64, w2: f64, w: f64) -> f64 {
    let c1 = d.a / SQRT_PI * (d.u2 - d.u1) / (erf(d.a * w2 / 2.0) - erf(d.a * w1 / 2.0));
    c1 * (-d.a * d.a * w * w / 4.0).exp()
}

pub fn ex1_r1(d: &Data, w1: f64, w2: f64) -> f64 {
    liquid_flux(d, w1, w2, w1) - (w1 * d.hv / 2.0 - d.q0)
}

pub fn ex1_r2(d: &Data, w1: f64, w2: f64) -> f64 {
    let z = d.b * w2 / 2.0;
    let solid = d.b / SQRT_PI * (d.v2 - d.v0) * (-z * z).exp() / (-erfc(z));
    solid - liquid_flux(d, w1, w2, w2) - w2 * d.hm / 2.0
}

/// Ex1 roots by elimination: `w1(w2)` from `r1`, then `r2` along that curve.
pub fn ex1_roots(d: &Data) -> Vec<(f64, f64)> {
    let w1_of = |w2: f64, branch: usize| -> Option<f64> {
        let top = w2.min(2.0 * d.q0 / d.hv);
        let grid = linspace(top * 1e-6, top * (1.0 - 1e-9), 400);
        nth_from_top(scan_roots(|w1| ex1_r1(d, w1, w2), &grid), branch)
    };
    let w1_max = 2.0 * d.q0 / d.hv;
    let grid: Vec<f64> = (0..300)
        .map(|i| w1_max * 1e-3 * (1e5f64).powf(i as f64 / 299.0))
        .collect();
    let mut out = Vec::new();
    for branch in 0..BRANCHES {
        let outer = |w2: f64| w1_of(w2, branch).map_or(f64::NAN, |w1| ex1_r2(d, w1, w2));
        for w2 in scan_roots(outer, &grid) {
            out.extend(w1_of(w2, branch).map(|w1| (w1, w2)));
        }
    }
    out
}

pub fn ex2_k1(d: &Data, t1: f64, t2: f64) -> f64 {
    (d.u2 - d.u1) / (SQRT_PI * (erf(t2) - erf(t1)))
}

pub fn ex2_k2(d: &Data, n2: f64) -> f64 {
    (d.v2 - d.v0) / (SQRT_PI * (erf(n2) - 1.0))
}

pub fn ex2_omega_liquid(d: &Data, t1: f64, t2: f64, t: f64, u: f64) -> f64 {
    2.0 / d.a * (t * u + ex2_k1(d, t1, t2) * (-t * t).exp())
}

pub fn ex2_omega_solid(d: &Data, n2: f64) -> f64 {
    2.0 / d.b * (n2 * d.v2 + ex2_k2(d, n2) * (-n2 * n2).exp())
}

pub fn ex2_r1(d: &Data, t1: f64, t2: f64) -> f64 {
    ex2_k1(d, t1, t2) * (d.a * d.a / d.u1 - d.hv) * (-t1 * t1).exp() - (d.u1 * d.hv * t1 - d.a * d.q0)
}

pub fn ex2_r2(d: &Data, t1: f64, t2: f64, n2: f64) -> f64 {
    let lhs = d.a * d.b * ex2_k2(d, n2) / d.v2 * (-n2 * n2).exp();
    let rhs = ex2_k1(d, t1, t2) * (d.a * d.a / d.u2 + d.hm) * (-t2 * t2).exp() + d.u2 * d.hm * t2;
    rhs - lhs
}

/// Ex2 roots: `nu2(tau2)` from the front match, `tau1(tau2)` from `r1`,
/// then a scan over `tau2` for `r2`.
pub fn ex2_roots(d: &Data) -> Vec<(f64, f64, f64)> {
    let tau1_of = |t2: f64, branch: usize| -> Option<f64> {
        let grid = linspace(t2 - 6.0, t2 - 1e-9, 600);
        let roots = scan_roots(|t1| ex2_r1(d, t1, t2), &grid)
            .into_iter()
            .filter(|&t1| ex2_omega_liquid(d, t1, t2, t1, d.u1) > 0.0)
            .collect();
        nth_from_top(roots, branch)
    };
    let nu2_of = |t1: f64, t2: f64| -> Option<f64> {
        let w2 = ex2_omega_liquid(d, t1, t2, t2, d.u2);
        // the front match can have several roots in nu2; keep them all
        Some(scan_roots(|n| ex2_omega_solid(d, n) - w2, &linspace(-6.0, 5.5, 461)))
            .filter(|r| r.len() == 1)
            .map(|r| r[0])
    };
    let mut out = Vec::new();
    for branch in 0..BRANCHES {
        let outer = |t2: f64| {
            tau1_of(t2, branch)
                .and_then(|t1| Some(ex2_r2(d, t1, t2, nu2_of(t1, t2)?)))
                .unwrap_or(f64::NAN)
        };
        for t2 in scan_roots(outer, &linspace(-3.0, 4.0, 281)) {
            if let Some(t1) = tau1_of(t2, branch) {
                out.extend(nu2_of(t1, t2).map(|n2| (t1, t2, n2)));
            }
        }
    }
    out
}

/// `(w2, C3)` of the exponential solid for given `(w1, nu2)`.
pub fn ex3_c3(d: &Data, w1: f64, n2: f64) -> Option<(f64, f64)> {
    let w2 = n2 * (-d.v2 / 2.0).exp();
    let flux2 = w2 * d.hm / 2.0 + (w1 * d.hv / 2.0 - d.q0) * (d.a * d.a * (w1 * w1 - w2 * w2) / 4.0).exp();
    if !(flux2 > 0.0) || !(w2 > w1) {
        return None;
    }
    let g2 = n2 / 2.0 + (d.v2 / 2.0).exp() / flux2;
    let h2 = 2.0 * g2 - n2;
    Some((w2, h2.ln() - n2 / h2 - d.b * d.b * n2 * n2 / 4.0))
}

pub fn ex3_r1(d: &Data, w1: f64, n2: f64) -> f64 {
    let w2 = n2 * (-d.v2 / 2.0).exp();
    ex1_r1(d, w1, w2)
}

pub fn ex3_r2(d: &Data, w1: f64, n2: f64) -> f64 {
    match ex3_c3(d, w1, n2) {
        Some((_, c3)) => d.v0 - d.v2 - far_integral(c3, d.b, n2),
        None => f64::NAN,
    }
}

/// Ex3 roots: `w1(nu2)` from `r1`, then a scan over `nu2` for `r2`.
pub fn ex3_roots(d: &Data, nu_lo: f64, nu_hi: f64, n: usize) -> Vec<(f64, f64)> {
    let w1_of = |n2: f64, branch: usize| -> Option<f64> {
        let w2 = n2 * (-d.v2 / 2.0).exp();
        let top = w2.min(2.0 * d.q0 / d.hv);
        let grid = linspace(top * 1e-6, top * (1.0 - 1e-9), 400);
        nth_from_top(scan_roots(|w1| ex3_r1(d, w1, n2), &grid), branch)
    };
    let mut out = Vec::new();
    for branch in 0..BRANCHES {
        let outer = |n2: f64| w1_of(n2, branch).map_or(f64::NAN, |w1| ex3_r2(d, w1, n2));
        for n2 in scan_roots(outer, &linspace(nu_lo, nu_hi, n)) {
            out.extend(w1_of(n2, branch).map(|w1| (w1, n2)));
        }
    }
    out
}

// ---------------------------------------------------------------------------
// synthetic parameter sets with known roots (back-solved)

/// Ex1 set: pick the fronts, solve `r1` for `q0` and `r2` for `Hm`.
pub fn ex1_set(rng: &mut SeededRng) -> (Data, (f64, f64)) {
    loop {
        let mut d = Data {
            a: rng.uniform(0.5, 2.0),
            b: rng.uniform(0.5, 2.0),
            u1: rng.uniform(1.5, 3.0),
            u2: rng.uniform(0.5, 1.4),
            v2: 0.0,
            v0: 0.0,
            hv: rng.uniform(1.0, 6.0),
            hm: 0.0,
            q0: 0.0,
        };
        d.v2 = d.u2 * rng.uniform(0.8, 1.2);
        d.v0 = d.v2 * rng.uniform(0.0, 0.9);
        let w1 = rng.uniform(0.1, 0.8);
        let w2 = w1 + rng.uniform(0.2, 1.0);
        d.q0 = w1 * d.hv / 2.0 - liquid_flux(&d, w1, w2, w1);
        // r2 = solid - liquid - w2 Hm / 2 = 0
        d.hm = 0.0;
        d.hm = 2.0 * ex1_r2(&d, w1, w2) / w2;
        if d.hm > 0.05 && d.q0 > 0.0 {
            return (d, (w1, w2));
        }
    }
}

/// Ex2 set: pick `(tau1, tau2, nu2)`, solve for `V0`, `q0`, `Hm`.
pub fn ex2_set(rng: &mut SeededRng) -> (Data, (f64, f64, f64)) {
    loop {
        let mut d = Data {
            a: rng.uniform(0.8, 2.0),
            b: rng.uniform(0.8, 2.0),
            u1: rng.uniform(1.5, 3.0),
            u2: rng.uniform(0.5, 1.4),
            v2: 0.0,
            v0: 0.0,
            hv: rng.uniform(1.0, 5.0),
            hm: 0.0,
            q0: 0.0,
        };
        d.v2 = d.u2 * rng.uniform(0.8, 1.2);
        let t1 = rng.uniform(0.2, 1.5);
        let t2 = t1 + rng.uniform(0.15, 1.0);
        let n2 = rng.uniform(0.3, 1.8);
        let w1 = ex2_omega_liquid(&d, t1, t2, t1, d.u1);
        let w2 = ex2_omega_liquid(&d, t1, t2, t2, d.u2);
        // front match: n2 V2 + (V2 - V0) K = b w2 / 2, K = e^{-n2^2} / (sqrt(pi)(erf n2 - 1))
        let k = (-n2 * n2).exp() / (SQRT_PI * (erf(n2) - 1.0));
        d.v0 = d.v2 - (d.b * w2 / 2.0 - n2 * d.v2) / k;
        d.q0 = 0.0;
        d.q0 = -ex2_r1(&d, t1, t2) / d.a;
        d.hm = 0.0;
        let lhs = d.a * d.b * ex2_k2(&d, n2) / d.v2 * (-n2 * n2).exp();
        let e2 = ex2_k1(&d, t1, t2) * (-t2 * t2).exp();
        d.hm = (lhs - e2 * d.a * d.a / d.u2) / (e2 + d.u2 * t2);
        if d.v0 > 0.05 * d.v2 && d.v0 < 0.95 * d.v2 && d.q0 > 0.0 && d.hm > 0.05 && w1 > 0.05 && w2 > w1 {
            return (d, (t1, t2, n2));
        }
    }
}

/// Ex3 set: pick `(w1, nu2)` and a melting heat large enough for a positive
/// solid flux; `q0` from `r1`, `V0` from the far-field integral.
pub fn ex3_set(rng: &mut SeededRng) -> (Data, (f64, f64)) {
    loop {
        let mut d = Data {
            a: rng.uniform(0.6, 1.6),
            b: rng.uniform(0.6, 1.6),
            u1: rng.uniform(1.5, 4.0),
            u2: rng.uniform(0.5, 1.4),
            v2: rng.uniform(-0.5, 1.0),
            v0: 0.0,
            hv: rng.uniform(0.5, 4.0),
            hm: 0.0,
            q0: 0.0,
        };
        let w1 = rng.uniform(0.1, 0.8);
        let w2 = w1 + rng.uniform(0.2, 1.0);
        let n2 = w2 * (d.v2 / 2.0).exp();
        d.q0 = w1 * d.hv / 2.0 - liquid_flux(&d, w1, w2, w1);
        d.hm = rng.uniform(1.5, 4.0) * 2.0 * liquid_flux(&d, w1, w2, w2).abs() / w2;
        let Some((_, c3)) = ex3_c3(&d, w1, n2) else { continue };
        d.v0 = d.v2 + far_integral(c3, d.b, n2);
        if d.q0 > 0.0 {
            return (d, (w1, n2));
        }
    }
}
