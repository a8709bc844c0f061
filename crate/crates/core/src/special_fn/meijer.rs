//! Univariate Meijer-G function of positive real argument.
//!
//! ```text
//!                 1   ⌠  Π_{j≤m} Γ(b_j + s) Π_{k≤n} Γ(1 − a_k − s)
//! G^{m,n}_{p,q} = ─── │  ─────────────────────────────────────────  z^{−s} ds
//!                 2πi ⌡L Π_{j>m} Γ(1 − b_j − s) Π_{k>n} Γ(a_k + s)
//! ```
//!
//! The contour is a vertical line `Re s = c`. When a different line gives a
//! better conditioned integral, `c` is moved across simple poles and their
//! residues are added back exactly. The line integral is folded onto
//! `Im s ≥ 0` (the integrand is conjugate symmetric) and integrated with
//! adaptive Gauss–Kronrod, truncated where the integrand has decayed below the
//! tolerance. Everything is done relative to a log-space reference magnitude, so
//! gamma factors with large arguments never overflow.

use std::sync::{Arc, OnceLock};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::quadrature::{integrate_fallible, QuadOptions};
use crate::real::Real;
use crate::sum::CompensatedSum;

use super::gamma::{is_nonpositive_integer, ln_factorial, ln_gamma_abs, ln_gamma_complex, ln_rgamma_complex};

/// Most poles a contour may be moved across.
const MAX_CROSSINGS: usize = 60;
/// Doubling steps allowed when extending the truncation point.
const MAX_REFINEMENTS: usize = 8;
/// Best-scored contours tried before giving up.
const PLANS_TRIED: usize = 3;

/// Parameters of a `G^{m,n}_{p,q}` instance.
///
/// The argument-independent part of the evaluation (simplified kernel,
/// candidate contours, pole residues) is built on first use and cached, so
/// evaluating one spec at many arguments is cheap.
#[derive(Debug, Clone)]
pub struct MeijerGSpec<T> {
    m: usize,
    n: usize,
    a: Vec<T>,
    b: Vec<T>,
    prepared: OnceLock<Arc<Prepared<T>>>,
}

impl<T: PartialEq> PartialEq for MeijerGSpec<T> {
    fn eq(&self, other: &Self) -> bool {
        self.m == other.m && self.n == other.n && self.a == other.a && self.b == other.b
    }
}

/// A value together with an upper bound on its absolute error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    pub error_bound: T,
}

impl<T: Real> MeijerGSpec<T> {
    /// Builds a spec, rejecting orders out of range, non-finite parameters and
    /// pole collisions (`a_k − b_j` a positive integer for `k ≤ n`, `j ≤ m`).
    pub fn new(m: usize, n: usize, a: Vec<T>, b: Vec<T>) -> Result<Self> {
        let op = "meijer_g";
        if m > b.len() || n > a.len() {
            return Err(Error::domain(op, format!("orders m={m}, n={n} exceed q={}, p={}", b.len(), a.len())));
        }
        if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
            return Err(Error::domain(op, "parameters must be finite"));
        }
        for ak in &a[..n] {
            for bj in &b[..m] {
                let d = *ak - *bj;
                if d > T::lit(0.5) && is_nonpositive_integer(-d + T::one()) {
                    return Err(Error::domain(
                        op,
                        format!("pole collision: a = {ak} and b = {bj} differ by a positive integer"),
                    ));
                }
            }
        }
        Ok(MeijerGSpec { m, n, a, b, prepared: OnceLock::new() })
    }

    pub fn m(&self) -> usize {
        self.m
    }
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn p(&self) -> usize {
        self.a.len()
    }
    pub fn q(&self) -> usize {
        self.b.len()
    }
    pub fn a(&self) -> &[T] {
        &self.a
    }
    pub fn b(&self) -> &[T] {
        &self.b
    }

    pub(crate) fn kernel(&self) -> Kernel<T> {
        let mut k = Kernel::default();
        for (j, &bj) in self.b.iter().enumerate() {
            if j < self.m {
                k.num.push(Factor::plus(bj));
            } else {
                k.den.push(Factor::minus(T::one() - bj));
            }
        }
        for (i, &ai) in self.a.iter().enumerate() {
            if i < self.n {
                k.num.push(Factor::minus(T::one() - ai));
            } else {
                k.den.push(Factor::plus(ai));
            }
        }
        k.simplify();
        k
    }

    /// Evaluates `G(z)` with an error bound.
    pub fn eval(&self, z: T) -> Result<Estimate<T>> {
        self.eval_scaled(z, T::zero())
    }

    /// Evaluates `exp(ln_prefactor)·G(z)`. The prefactor is folded into the
    /// log-space integrand, so a huge `G` times a tiny prefactor stays finite.
    pub fn eval_scaled(&self, z: T, ln_prefactor: T) -> Result<Estimate<T>> {
        self.eval_scaled_within(z, ln_prefactor, T::zero())
    }

    /// As [`eval_scaled`](Self::eval_scaled), but also accepts a result whose
    /// error bound is below `abs_floor`. For terms whose absolute contribution to
    /// a larger sum is all that matters.
    pub fn eval_scaled_within(&self, z: T, ln_prefactor: T, abs_floor: T) -> Result<Estimate<T>> {
        if !(z > T::zero()) || !z.is_finite() {
            return Err(Error::domain("meijer_g", format!("argument must be positive and finite, got {z}")));
        }
        let prepared = self.prepared.get_or_init(|| Arc::new(Prepared::new(self.kernel())));
        eval_prepared(prepared, z, ln_prefactor, abs_floor, "meijer_g")
    }
}

/// `G(z)`, failing rather than returning a value whose error bound exceeds the
/// accuracy contract.
pub fn meijer_g<T: Real>(spec: &MeijerGSpec<T>, z: T) -> Result<T> {
    spec.eval(z).map(|e| e.value)
}

/// One gamma factor `Γ(u + s)` (`plus`) or `Γ(u − s)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Factor<T> {
    pub u: T,
    pub plus: bool,
}

impl<T: Real> Factor<T> {
    pub fn plus(u: T) -> Self {
        Factor { u, plus: true }
    }
    pub fn minus(u: T) -> Self {
        Factor { u, plus: false }
    }
    fn arg(&self, s: T) -> T {
        if self.plus {
            self.u + s
        } else {
            self.u - s
        }
    }
    fn arg_c(&self, s: Complex<T>) -> Complex<T> {
        if self.plus {
            s + self.u
        } else {
            -s + self.u
        }
    }
    /// Position of the k-th pole in the s-plane.
    fn pole(&self, k: usize) -> T {
        if self.plus {
            -self.u - T::from_count(k)
        } else {
            self.u + T::from_count(k)
        }
    }
    /// Number of poles strictly on the wrong side of a line at `c`.
    fn crossed(&self, c: T) -> usize {
        // plus-factors belong left of the line, minus-factors right of it
        let d = if self.plus { -self.u - c } else { c - self.u };
        if d <= T::zero() {
            0
        } else {
            d.ceil().to_usize().unwrap_or(usize::MAX)
        }
    }
}

fn same_param<T: Real>(x: T, y: T) -> bool {
    (x - y).abs() <= T::lit(64.0) * T::epsilon() * x.abs().max(T::one())
}

fn gamma_sign<T: Real>(x: T) -> T {
    if x > T::zero() || (x.floor().to_i64().unwrap_or(0)) % 2 == 0 {
        T::one()
    } else {
        -T::one()
    }
}

/// Ratio of gamma products forming a Mellin–Barnes integrand (without `z^{−s}`).
#[derive(Debug, Clone, Default)]
pub(crate) struct Kernel<T> {
    pub num: Vec<Factor<T>>,
    pub den: Vec<Factor<T>>,
}

impl<T: Real> Kernel<T> {
    /// Cancels identical numerator/denominator factors.
    pub fn simplify(&mut self) {
        let mut i = 0;
        while i < self.num.len() {
            let f = self.num[i];
            if let Some(j) = self.den.iter().position(|g| g.plus == f.plus && same_param(g.u, f.u)) {
                self.den.swap_remove(j);
                self.num.swap_remove(i);
            } else {
                i += 1;
            }
        }
    }

    /// Exponential decay rate (in units of π) of the integrand along `Im s`.
    pub fn decay(&self) -> T {
        (T::from_count(self.num.len()) - T::from_count(self.den.len())) * T::lit(0.5)
    }

    pub fn ln_at(&self, s: Complex<T>) -> Complex<T> {
        let mut acc = Complex::new(T::zero(), T::zero());
        for f in &self.num {
            acc = acc + ln_gamma_complex(f.arg_c(s));
        }
        for f in &self.den {
            acc = acc + ln_rgamma_complex(f.arg_c(s));
        }
        acc
    }

    /// `ln |kernel(x)|` on the real axis; `+∞` at a numerator pole.
    pub fn ln_abs_real(&self, x: T) -> T {
        let mut acc = T::zero();
        for f in &self.num {
            let v = f.arg(x);
            if is_nonpositive_integer(v) {
                return T::infinity();
            }
            acc = acc + ln_gamma_abs(v);
        }
        for f in &self.den {
            let v = f.arg(x);
            if is_nonpositive_integer(v) {
                return T::neg_infinity();
            }
            acc = acc - ln_gamma_abs(v);
        }
        acc
    }

    /// Sum of `|ln Γ|` magnitudes at a real point, the scale of roundoff in the
    /// log-space integrand.
    fn log_magnitude(&self, x: T) -> T {
        self.num
            .iter()
            .chain(self.den.iter())
            .map(|f| {
                let v = f.arg(x);
                if is_nonpositive_integer(v) {
                    T::zero()
                } else {
                    ln_gamma_abs(v).abs()
                }
            })
            .fold(T::zero(), |a, b| a + b)
    }

    fn has_left(&self) -> bool {
        self.num.iter().any(|f| f.plus)
    }
    fn has_right(&self) -> bool {
        self.num.iter().any(|f| !f.plus)
    }

    /// Residue of `kernel(s)·z^{-s}` at the k-th pole of numerator factor `i`,
    /// signed as it enters `G` when the line is moved across that pole. Returns
    /// `None` when the pole is not simple and `Some(None)` when it is cancelled.
    pub fn crossing_residue(&self, i: usize, k: usize, ln_z: T) -> Option<Option<SignedLog<T>>> {
        let s0 = self.num[i].pole(k);
        let np = self.num.iter().filter(|f| is_nonpositive_integer(f.arg(s0))).count();
        let dp = self.den.iter().filter(|f| is_nonpositive_integer(f.arg(s0))).count();
        if np <= dp {
            return Some(None);
        }
        if np != 1 || dp != 0 {
            return None;
        }
        let mut ln = -ln_factorial::<T>(k) - s0 * ln_z;
        let mut sign = if k % 2 == 0 { T::one() } else { -T::one() };
        for (j, f) in self.num.iter().enumerate() {
            if j != i {
                let v = f.arg(s0);
                ln = ln + ln_gamma_abs(v);
                sign = sign * gamma_sign(v);
            }
        }
        for f in &self.den {
            let v = f.arg(s0);
            ln = ln - ln_gamma_abs(v);
            sign = sign * gamma_sign(v);
        }
        Some(Some(SignedLog { ln, sign }))
    }

    /// All residues picked up by a line at `c`, or `None` if the line would cross
    /// a pole that is not simple or too many poles.
    pub fn residues_for(&self, c: T, ln_z: T) -> Option<Vec<(T, SignedLog<T>)>> {
        self.residue_table().residues_for(self, c, ln_z)
    }

    /// Residues of the numerator poles a contour may cross, computed once and
    /// reused for every abscissa and argument.
    pub fn residue_table(&self) -> ResidueTable<T> {
        let factors = self
            .num
            .iter()
            .enumerate()
            .map(|(i, f)| {
                let mut col = Vec::new();
                for k in 0..MAX_CROSSINGS {
                    match self.crossing_residue(i, k, T::zero()) {
                        None => break,
                        Some(r) => col.push((f.pole(k), r)),
                    }
                }
                col
            })
            .collect();
        ResidueTable { factors }
    }

    /// Candidate abscissas for the contour: sample points inside every gap
    /// between consecutive poles near the natural strip.
    pub fn contour_candidates(&self) -> Vec<T> {
        let depth = MAX_CROSSINGS + 4;
        let mut poles = Vec::new();
        let mut lcut = T::neg_infinity();
        let mut rcut = T::infinity();
        for f in &self.num {
            for k in 0..=depth {
                poles.push(f.pole(k));
            }
            if f.plus {
                lcut = lcut.max(f.pole(depth));
            } else {
                rcut = rcut.min(f.pole(depth));
            }
        }
        poles.retain(|&p| p >= lcut && p <= rcut);
        poles.sort_by(|x, y| x.partial_cmp(y).unwrap());
        poles.dedup_by(|x, y| same_param(*x, *y));

        let fr = |x: f64| T::lit(x);
        let mut out = Vec::new();
        let push_gap = |lo: T, hi: T, out: &mut Vec<T>| {
            let w = hi - lo;
            for &t in &[0.1, 0.3, 0.5, 0.7, 0.9] {
                out.push(lo + w * fr(t));
            }
            if w > fr(2.0) {
                let steps = (w / fr(0.5)).to_usize().unwrap_or(0).min(64);
                for j in 1..steps {
                    out.push(lo + w * T::from_count(j) / T::from_count(steps));
                }
            }
        };
        let ray = |start: T, dir: T, out: &mut Vec<T>| {
            for &d in &[0.1, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0, 256.0, 512.0] {
                out.push(start + dir * fr(d));
            }
        };
        match (poles.first().copied(), poles.last().copied()) {
            (None, _) | (_, None) => out.push(fr(0.5)),
            (Some(lo), Some(hi)) => {
                for w in poles.windows(2) {
                    push_gap(w[0], w[1], &mut out);
                }
                if !self.has_left() {
                    ray(lo, -T::one(), &mut out);
                }
                if !self.has_right() {
                    ray(hi, T::one(), &mut out);
                }
            }
        }
        out
    }
}

/// Residues (without the `z^{−s}` factor) of each numerator factor's poles, in
/// crossing order, up to the first pole that is not simple. Cancelled poles hold
/// `None`.
#[derive(Debug)]
pub(crate) struct ResidueTable<T> {
    factors: Vec<Vec<(T, Option<SignedLog<T>>)>>,
}

impl<T: Real> ResidueTable<T> {
    pub fn residues_for(&self, kernel: &Kernel<T>, c: T, ln_z: T) -> Option<Vec<(T, SignedLog<T>)>> {
        let mut total = 0usize;
        for f in &kernel.num {
            total = total.saturating_add(f.crossed(c));
        }
        if total > MAX_CROSSINGS {
            return None;
        }
        let mut out = Vec::new();
        for (f, col) in kernel.num.iter().zip(&self.factors) {
            let n = f.crossed(c);
            if n > col.len() {
                return None;
            }
            for (s0, r) in &col[..n] {
                if let Some(r) = r {
                    out.push((*s0, SignedLog { ln: r.ln - *s0 * ln_z, sign: r.sign }));
                }
            }
        }
        Some(out)
    }

    /// Largest residue log-magnitude and residue count for a line at `c`, or
    /// `None` when the line is inadmissible.
    fn summary(&self, kernel: &Kernel<T>, c: T, ln_z: T) -> Option<(T, usize)> {
        let mut total = 0usize;
        for f in &kernel.num {
            total = total.saturating_add(f.crossed(c));
        }
        if total > MAX_CROSSINGS {
            return None;
        }
        let mut best = T::neg_infinity();
        let mut count = 0;
        for (f, col) in kernel.num.iter().zip(&self.factors) {
            let n = f.crossed(c);
            if n > col.len() {
                return None;
            }
            for (s0, r) in &col[..n] {
                if let Some(r) = r {
                    best = best.max(r.ln - *s0 * ln_z);
                    count += 1;
                }
            }
        }
        Some((best, count))
    }
}

/// A real number stored as `sign·exp(ln)`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct SignedLog<T> {
    pub ln: T,
    pub sign: T,
}

/// The selected contour and the residues it picks up.
pub(crate) struct Contour<T> {
    pub c: T,
    pub residues: Vec<SignedLog<T>>,
    /// Reference log-magnitude all values are normalized by.
    pub ln_ref: T,
}

/// Argument-independent data for evaluating one kernel.
#[derive(Debug)]
pub(crate) struct Prepared<T> {
    kernel: Kernel<T>,
    /// Candidate abscissas with `ln|kernel(c)|`.
    candidates: Vec<(T, T)>,
    table: ResidueTable<T>,
}

impl<T: Real> Prepared<T> {
    pub fn new(kernel: Kernel<T>) -> Self {
        let candidates = kernel
            .contour_candidates()
            .into_iter()
            .map(|c| (c, kernel.ln_abs_real(c)))
            .filter(|(_, h)| !(h.is_infinite() && *h > T::zero()))
            .collect();
        let table = kernel.residue_table();
        Prepared { kernel, candidates, table }
    }
}

/// Picks the best-conditioned lines for `kernel(s)·z^{-s}`, best first.
fn plan_contours<T: Real>(prep: &Prepared<T>, ln_z: T) -> Vec<Contour<T>> {
    let kernel = &prep.kernel;
    let mut scored: Vec<(T, T, T)> = Vec::new();
    for &(c, h0) in &prep.candidates {
        let h = h0 - c * ln_z;
        let (best, count) = match prep.table.summary(kernel, c, ln_z) {
            Some(v) => v,
            None => continue,
        };
        let ln_ref = h.max(best);
        if !ln_ref.is_finite() {
            continue;
        }
        // Mild preference for fewer crossings when scores are close.
        let score = ln_ref + T::lit(0.05) * T::from_count(count);
        scored.push((score, c, ln_ref));
    }
    scored.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap_or(std::cmp::Ordering::Equal));
    scored
        .into_iter()
        .take(PLANS_TRIED)
        .map(|(_, c, ln_ref)| {
            let residues = prep
                .table
                .residues_for(kernel, c, ln_z)
                .expect("scored lines are admissible")
                .into_iter()
                .map(|(_, r)| r)
                .collect();
            Contour { c, residues, ln_ref }
        })
        .collect()
}

/// Evaluates the line integral `(1/2πi)∫ kernel(s) z^{-s} ds` with a residue
/// corrected contour, scaled by `exp(ln_prefactor)`.
pub(crate) fn eval_kernel<T: Real>(kernel: &Kernel<T>, z: T, ln_prefactor: T, op: &'static str) -> Result<Estimate<T>> {
    eval_prepared(&Prepared::new(kernel.clone()), z, ln_prefactor, T::zero(), op)
}

fn eval_prepared<T: Real>(
    prep: &Prepared<T>,
    z: T,
    ln_prefactor: T,
    abs_floor: T,
    op: &'static str,
) -> Result<Estimate<T>> {
    let kernel = &prep.kernel;
    let delta = kernel.decay();
    if !(delta > T::zero()) {
        return Err(Error::non_convergence(
            op,
            format!("integrand does not decay along the contour (rate {delta})"),
        ));
    }
    let ln_z = z.ln();
    let plans = plan_contours(prep, ln_z);
    if plans.is_empty() {
        return Err(Error::non_convergence(op, "no admissible contour: coincident poles would have to be crossed"));
    }
    let mut last_err = None;
    for plan in &plans {
        match line_integral(kernel, ln_z, ln_prefactor, plan, op) {
            Ok(e) if e.error_bound <= (T::accept_rel_tol() * e.value.abs()).max(abs_floor) => return Ok(e),
            Ok(e) => {
                last_err = Some(Error::non_convergence(
                    op,
                    format!(
                        "error bound {:e} exceeds accuracy contract for value {:e}",
                        e.error_bound.to_f64().unwrap_or(f64::NAN),
                        e.value.to_f64().unwrap_or(f64::NAN)
                    ),
                ))
            }
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.expect("at least one plan was tried"))
}

fn line_integral<T: Real>(
    kernel: &Kernel<T>,
    ln_z: T,
    ln_prefactor: T,
    plan: &Contour<T>,
    op: &'static str,
) -> Result<Estimate<T>> {
    let c = plan.c;
    let ln_ref = plan.ln_ref;
    let tol = T::default_rel_tol();
    let pi = T::PI();
    let delta = kernel.decay();

    let log_integrand = |y: T| {
        let s = Complex::new(c, y);
        kernel.ln_at(s) - s * ln_z - ln_ref
    };
    let integrand = |y: T| -> Result<T> {
        let l = log_integrand(y);
        if l.re < T::lit(-700.0) || l.re == T::neg_infinity() {
            return Ok(T::zero());
        }
        let v = l.re.exp() * l.im.cos();
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::non_convergence(op, format!("integrand overflow at Im s = {y}")))
        }
    };
    let envelope = |y: T| {
        let r = log_integrand(y).re;
        if r.is_nan() {
            T::zero()
        } else {
            r.exp()
        }
    };

    let mut res_sum = CompensatedSum::new();
    let mut res_abs = T::zero();
    for r in &plan.residues {
        let v = r.sign * (r.ln - ln_ref).exp();
        res_sum.add(v);
        res_abs = res_abs + v.abs();
    }
    let res_total = res_sum.value();

    // Initial truncation: first doubling point past which the envelope has
    // dropped far below everything seen so far.
    let mut peak = envelope(T::zero()).max(res_abs * pi);
    let mut t = T::lit(2.0);
    let mut y = T::lit(0.25);
    while y < t {
        peak = peak.max(envelope(y));
        y = y * T::lit(2.0);
    }
    let small = tol * T::lit(1e-3);
    for _ in 0..40 {
        let et = envelope(t);
        peak = peak.max(et);
        if et <= small * peak && envelope(t * T::lit(1.5)) <= et {
            break;
        }
        t = t * T::lit(2.0);
    }
    if !t.is_finite() {
        return Err(Error::non_convergence(op, "truncation point diverged"));
    }

    let abs_tol = tol * res_total.abs() * pi;
    let opts = |len: T| {
        let pieces = len.ceil().to_usize().unwrap_or(16).clamp(16, 2048);
        let o = QuadOptions { abs_tol, rel_tol: tol, max_intervals: 8 * pieces + 2000 };
        (pieces, o)
    };
    let partition = |lo: T, hi: T, pieces: usize| -> Vec<T> {
        (0..=pieces).map(|j| lo + (hi - lo) * T::from_count(j) / T::from_count(pieces)).collect()
    };

    let (pieces, o) = opts(t);
    let first = integrate_fallible(integrand, &partition(T::zero(), t, pieces), &o)?;
    let mut integral = first.value();
    let mut quad_err = first.error;
    let mut abs_integral = first.abs_integral;
    let mut refinements = 0;
    let tail = loop {
        let tail = T::lit(2.0) * envelope(t) / (pi * delta);
        let scale = integral.abs().max(res_total.abs() * pi);
        if tail <= small * scale || tail == T::zero() {
            break tail;
        }
        if refinements == MAX_REFINEMENTS {
            return Err(Error::non_convergence(op, format!("contour tail still significant at Im s = {t}")));
        }
        let (pieces, o) = opts(t);
        let more = integrate_fallible(integrand, &partition(t, t * T::lit(2.0), pieces), &o)?;
        integral = integral + more.value();
        quad_err = quad_err + more.error;
        abs_integral = abs_integral + more.abs_integral;
        t = t * T::lit(2.0);
        refinements += 1;
    };

    let total = res_total + integral / pi;
    // Roundoff: every integrand value carries a relative error of order
    // eps·(magnitude of the logs that were exponentiated).
    let log_scale = T::lit(4.0) + kernel.log_magnitude(c) + (c * ln_z).abs() + ln_ref.abs();
    let roundoff = T::lit(8.0) * T::epsilon() * log_scale * (res_abs + abs_integral / pi);
    let err = (quad_err + tail) / pi + roundoff + T::epsilon() * total.abs();

    let ln_scale = ln_ref + ln_prefactor;
    let (value, error_bound) = if total == T::zero() {
        (T::zero(), err * ln_scale.exp())
    } else {
        let ln_abs = total.abs().ln();
        let value = total.signum() * (ln_scale + ln_abs).exp();
        let error_bound = value.abs() * (err / total.abs()) * (T::one() + T::lit(4.0) * T::epsilon() * ln_scale.abs());
        (value, error_bound)
    };
    if !value.is_finite() || !error_bound.is_finite() {
        return Err(Error::Overflow { op, detail: format!("result not representable (log-magnitude {ln_scale})") });
    }
    Ok(Estimate { value, error_bound })
}
