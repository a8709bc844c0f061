//! Extended bivariate Meijer-G function,
//!
//! ```text
//!             1    ⌠⌠
//! G(x, y) = ─────  ││ Φ0(s + t) Φx(s) Φy(t) x^{−s} y^{−t} ds dt
//!           (2πi)² ⌡⌡
//! ```
//!
//! where each Φ is the gamma ratio of a univariate Meijer-G block. The double
//! integral runs over two vertical lines. The `s` line may be moved across
//! simple poles of Φx; each such residue is a univariate Meijer-G in `y` whose
//! parameter lists absorb the shifted outer block.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::quadrature::{integrate_partitioned, QuadOptions};
use crate::real::Real;
use crate::sum::CompensatedSum;

use super::meijer::{eval_kernel, Estimate, Factor, Kernel, MeijerGSpec};

const MAX_REFINEMENTS: usize = 8;

/// Parameter blocks of an extended bivariate Meijer-G instance.
#[derive(Debug, Clone, PartialEq)]
pub struct BivariateGSpec<T> {
    /// Block in the coupled variable `s + t`.
    pub outer: MeijerGSpec<T>,
    pub x: MeijerGSpec<T>,
    pub y: MeijerGSpec<T>,
}

impl<T: Real> BivariateGSpec<T> {
    pub fn new(outer: MeijerGSpec<T>, x: MeijerGSpec<T>, y: MeijerGSpec<T>) -> Self {
        BivariateGSpec { outer, x, y }
    }

    /// The coupling-free spec whose value is `G_x(x)·G_y(y)`.
    pub fn decoupled(x: MeijerGSpec<T>, y: MeijerGSpec<T>) -> Self {
        let outer = MeijerGSpec::new(0, 0, vec![], vec![]).expect("empty block is valid");
        BivariateGSpec { outer, x, y }
    }

    /// Evaluates `G(x, y)` with an error bound.
    pub fn eval(&self, x: T, y: T) -> Result<Estimate<T>> {
        self.eval_scaled(x, y, T::zero())
    }

    /// Evaluates `exp(ln_prefactor)·G(x, y)`.
    pub fn eval_scaled(&self, x: T, y: T, ln_prefactor: T) -> Result<Estimate<T>> {
        for (name, v) in [("x", x), ("y", y)] {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::domain(OP, format!("{name} must be positive and finite, got {v}")));
            }
        }
        Evaluator::new(self, x.ln(), y.ln())?.run(ln_prefactor)
    }
}

/// `G(x, y)` under the same accuracy contract as [`BivariateGSpec::eval`].
pub fn bivariate_meijer_g<T: Real>(spec: &BivariateGSpec<T>, x: T, y: T) -> Result<T> {
    spec.eval(x, y).map(|e| e.value)
}

const OP: &str = "bivariate_meijer_g";

fn accept_tol<T: Real>() -> T {
    T::lit(1e-6).max(T::epsilon() * T::lit(1e5))
}

fn fail(contour: &str, detail: impl std::fmt::Display) -> Error {
    Error::non_convergence(OP, format!("{contour} contour: {detail}"))
}

struct Evaluator<T> {
    k0: Kernel<T>,
    kx: Kernel<T>,
    ky: Kernel<T>,
    ln_x: T,
    ln_y: T,
    d0: T,
    dx: T,
    dy: T,
}

struct Plan<T> {
    cs: T,
    ct: T,
    /// Residues of Φx(s) x^{−s} picked up by the `s` line, with their poles.
    residues: Vec<(T, T, T)>,
    ln_ref: T,
}

impl<T: Real> Evaluator<T> {
    fn new(spec: &BivariateGSpec<T>, ln_x: T, ln_y: T) -> Result<Self> {
        let k0 = spec.outer.kernel();
        let kx = spec.x.kernel();
        let ky = spec.y.kernel();
        let (d0, dx, dy) = (k0.decay(), kx.decay(), ky.decay());
        let couple = d0.min(T::zero());
        if !(dx > T::zero()) || !(dx + couple > T::zero()) {
            return Err(fail("x", format!("integrand does not decay (rates {dx}, {d0})")));
        }
        if !(dy > T::zero()) || !(dy + couple > T::zero()) {
            return Err(fail("y", format!("integrand does not decay (rates {dy}, {d0})")));
        }
        Ok(Evaluator { k0, kx, ky, ln_x, ln_y, d0, dx, dy })
    }

    /// True when no pole of the outer block lies on the wrong side of `Re(s+t) = u`.
    fn outer_admits(&self, u: T) -> bool {
        self.k0.residues_for(u, T::zero()).map_or(false, |r| r.is_empty())
            && self.k0.ln_abs_real(u).is_finite()
    }

    fn plans(&self) -> Vec<Plan<T>> {
        let ty = self.ky.residue_table();
        let ct_list: Vec<T> = self
            .ky
            .contour_candidates()
            .into_iter()
            .filter(|&c| ty.residues_for(&self.ky, c, self.ln_y).map_or(false, |r| r.is_empty()))
            .collect();
        let tx = self.kx.residue_table();
        let mut cs_list = Vec::new();
        for c in self.kx.contour_candidates() {
            let h = self.kx.ln_abs_real(c);
            if !h.is_finite() {
                continue;
            }
            if let Some(res) = tx.residues_for(&self.kx, c, self.ln_x) {
                cs_list.push((c, h, res));
            }
        }
        let mut scored = Vec::new();
        for &ct in &ct_list {
            let hy = self.ky.ln_abs_real(ct) - ct * self.ln_y;
            if !hy.is_finite() {
                continue;
            }
            for (cs, hx, res) in &cs_list {
                let u = *cs + ct;
                if !self.outer_admits(u) {
                    continue;
                }
                let mut ln_ref = *hx - *cs * self.ln_x + hy + self.k0.ln_abs_real(u);
                let mut residues = Vec::new();
                let mut ok = true;
                for (s0, r) in res {
                    if !self.outer_admits(*s0 + ct) {
                        ok = false;
                        break;
                    }
                    ln_ref = ln_ref.max(r.ln + hy + self.k0.ln_abs_real(*s0 + ct));
                    residues.push((*s0, r.ln, r.sign));
                }
                if ok && ln_ref.is_finite() {
                    let score = ln_ref + T::lit(0.05) * T::from_count(residues.len());
                    scored.push((score, Plan { cs: *cs, ct, residues, ln_ref }));
                }
            }
        }
        scored.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
        scored.into_iter().map(|(_, p)| p).collect()
    }

    fn run(&self, ln_prefactor: T) -> Result<Estimate<T>> {
        let plans = self.plans();
        if plans.is_empty() {
            return Err(fail("x", "no admissible pair of contours"));
        }
        let mut last = None;
        for plan in plans.iter().take(2) {
            match self.evaluate(plan, ln_prefactor) {
                Ok(e) if e.error_bound <= accept_tol::<T>() * e.value.abs() => return Ok(e),
                Ok(e) => {
                    last = Some(fail(
                        "outer",
                        format!(
                        "error bound {:e} exceeds accuracy contract for value {:e}",
                        e.error_bound.to_f64().unwrap_or(f64::NAN),
                        e.value.to_f64().unwrap_or(f64::NAN)
                    ),
                    ))
                }
                Err(e) => last = Some(e),
            }
        }
        Err(last.expect("a plan was tried"))
    }

    /// Univariate kernel in `t` left after taking the residue at `s = s0`.
    fn residue_kernel(&self, s0: T) -> Kernel<T> {
        let mut k = self.ky.clone();
        let shift = |f: &Factor<T>| Factor { u: if f.plus { f.u + s0 } else { f.u - s0 }, plus: f.plus };
        k.num.extend(self.k0.num.iter().map(shift));
        k.den.extend(self.k0.den.iter().map(shift));
        k.simplify();
        k
    }

    fn evaluate(&self, plan: &Plan<T>, ln_prefactor: T) -> Result<Estimate<T>> {
        let ln_ref = plan.ln_ref;
        // Residue terms, each a univariate Meijer-G in y; values relative to ln_ref.
        let mut res_sum = CompensatedSum::new();
        let mut res_err = T::zero();
        let y = self.ln_y.exp();
        for &(s0, ln_r, sign) in &plan.residues {
            let k = self.residue_kernel(s0);
            let e = eval_kernel(&k, y, ln_r - ln_ref, OP)
                .map_err(|e| fail("y", format!("residue at s = {s0}: {e}")))?;
            res_sum.add(sign * e.value);
            res_err = res_err + e.error_bound;
        }
        let res_total = res_sum.value();

        let tol = T::lit(1e-11).max(T::epsilon() * T::lit(64.0));
        let small = tol * T::lit(1e-3);
        let pi = T::PI();
        let (cs, ct) = (plan.cs, plan.ct);

        let outer_log = |w: T| {
            let t = Complex::new(ct, w);
            self.ky.ln_at(t) - t * self.ln_y - ln_ref
        };
        let inner_log = |v: T, w: T, a: Complex<T>| {
            let s = Complex::new(cs, v);
            let u = Complex::new(cs + ct, v + w);
            a + self.k0.ln_at(u) + self.kx.ln_at(s) - s * self.ln_x
        };
        let mag = |l: Complex<T>| if l.re.is_nan() { T::zero() } else { l.re.exp() };
        let inner_rate = self.dx + self.d0;
        let outer_rate = if self.d0 >= T::zero() { self.dy + self.d0.min(self.dx) } else { self.dy + self.d0 };

        let env_w = |w: T| {
            let a = outer_log(w);
            mag(inner_log(T::zero(), w, a)).max(mag(inner_log(-w, w, a)))
        };
        let global = env_w(T::zero()).max(res_total.abs() * T::lit(2.0) * pi * pi);
        let inner_abs_tol = tol * T::lit(1e-2) * global;

        // Inner integral over v for fixed w: returns [∫Re F dv, error, ∫|F| dv].
        let inner = |w: T| -> Result<[T; 3]> {
            let a = outer_log(w);
            if a.re < T::lit(-700.0) {
                return Ok([T::zero(); 3]);
            }
            let env = |v: T| mag(inner_log(v, w, a));
            let (p1, p2) = (T::zero().min(-w), T::zero().max(-w));
            let mut peak = env(p1).max(env(p2)).max(env((p1 + p2) * T::lit(0.5)));
            let mut reach = |anchor: T, dir: T| {
                let mut d = T::one();
                for _ in 0..40 {
                    let e = env(anchor + dir * d);
                    peak = peak.max(e);
                    if e <= small * peak && env(anchor + dir * d * T::lit(1.5)) <= e {
                        break;
                    }
                    d = d * T::lit(2.0);
                }
                anchor + dir * d
            };
            let hi = reach(p2, T::one());
            let lo = reach(p1, -T::one());
            if peak == T::zero() {
                return Ok([T::zero(); 3]);
            }
            let tail = T::lit(2.0) * (env(lo) + env(hi)) / (pi * inner_rate);
            let pieces = (hi - lo).ceil().to_usize().unwrap_or(8).clamp(8, 512);
            let mut pts: Vec<T> = (0..=pieces).map(|j| lo + (hi - lo) * T::from_count(j) / T::from_count(pieces)).collect();
            pts.push(p1);
            pts.push(p2);
            pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
            pts.dedup();
            let opts = QuadOptions { abs_tol: inner_abs_tol, rel_tol: tol, max_intervals: 8 * pieces + 2000 };
            let r = integrate_partitioned(
                |v: T| {
                    let l = inner_log(v, w, a);
                    if l.re < T::lit(-700.0) || l.re.is_nan() {
                        return Ok([T::zero()]);
                    }
                    let f = l.re.exp() * l.im.cos();
                    if f.is_finite() {
                        Ok([f])
                    } else {
                        Err(fail("x", format!("integrand overflow at (v, w) = ({v}, {w})")))
                    }
                },
                &pts,
                &opts,
            )?;
            Ok([r.value(), r.error + tail, r.abs_integral])
        };

        // Outer truncation from the magnitude at the two ridge points.
        let mut peak = global;
        let mut t = T::one();
        for _ in 0..40 {
            let e = env_w(t);
            peak = peak.max(e);
            if e <= small * peak && env_w(t * T::lit(1.5)) <= e {
                break;
            }
            t = t * T::lit(2.0);
        }
        let outer_opts = |len: T| {
            let pieces = (len * T::lit(2.0)).ceil().to_usize().unwrap_or(16).clamp(16, 512);
            let o = QuadOptions {
                abs_tol: tol * res_total.abs() * T::lit(2.0) * pi * pi,
                rel_tol: tol,
                max_intervals: 4 * pieces + 500,
            };
            (pieces, o)
        };
        let part = |lo: T, hi: T, n: usize| -> Vec<T> {
            (0..=n).map(|j| lo + (hi - lo) * T::from_count(j) / T::from_count(n)).collect()
        };
        let (n, o) = outer_opts(t);
        let first = integrate_partitioned(&inner, &part(T::zero(), t, n), &o)?;
        let mut integral = first.values[0];
        let mut err = first.error + first.values[1].abs();
        let mut abs_int = first.values[2];
        let mut refinements = 0;
        let tail = loop {
            let edge = inner(t)?;
            let tail = T::lit(2.0) * edge[2] / (pi * outer_rate);
            let scale = integral.abs().max(res_total.abs() * T::lit(2.0) * pi * pi);
            if tail <= small * scale || tail == T::zero() {
                break tail;
            }
            if refinements == MAX_REFINEMENTS {
                return Err(fail("y", format!("tail still significant at Im t = {t}")));
            }
            let (n, o) = outer_opts(t);
            let more = integrate_partitioned(&inner, &part(t, t * T::lit(2.0), n), &o)?;
            integral = integral + more.values[0];
            err = err + more.error + more.values[1].abs();
            abs_int = abs_int + more.values[2];
            t = t * T::lit(2.0);
            refinements += 1;
        };

        let norm = T::lit(2.0) * pi * pi;
        let total = res_total + integral / norm;
        let log_scale = T::lit(8.0)
            + self.kx.ln_abs_real(cs).abs()
            + self.ky.ln_abs_real(ct).abs()
            + self.k0.ln_abs_real(cs + ct).abs()
            + (cs * self.ln_x).abs()
            + (ct * self.ln_y).abs()
            + ln_ref.abs();
        let roundoff = T::lit(16.0) * T::epsilon() * log_scale * abs_int / norm;
        let err = res_err + (err + tail) / norm + roundoff + T::epsilon() * total.abs();

        let ln_scale = ln_ref + ln_prefactor;
        if total == T::zero() {
            return Ok(Estimate { value: T::zero(), error_bound: err * ln_scale.exp() });
        }
        let value = total.signum() * (ln_scale + total.abs().ln()).exp();
        let error_bound = value.abs() * err / total.abs();
        if !value.is_finite() || !error_bound.is_finite() {
            return Err(Error::Overflow { op: OP, detail: format!("result not representable (log-magnitude {ln_scale})") });
        }
        Ok(Estimate { value, error_bound })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decoupled_is_product() {
        let gx = MeijerGSpec::new(1, 0, vec![], vec![0.0f64]).unwrap();
        let gy = MeijerGSpec::new(2, 0, vec![], vec![1.0, 0.0]).unwrap();
        let spec = BivariateGSpec::decoupled(gx.clone(), gy.clone());
        for &(x, y) in &[(0.5f64, 1.0f64), (2.0, 0.3), (0.05, 4.0)] {
            let want = gx.eval(x).unwrap().value * gy.eval(y).unwrap().value;
            let got = spec.eval(x, y).unwrap();
            assert!((got.value - want).abs() <= 1e-8 * want, "({x},{y}): {} vs {want}", got.value);
        }
    }

    #[test]
    fn laplace_coupling_matches_closed_form() {
        // Φ0 = Γ(1−s−t), Φx = Γ(s), Φy = Γ(t):
        // G = ∫_0^∞ e^{−u} e^{−xu} e^{−yu} du = 1/(1+x+y)
        let outer = MeijerGSpec::new(0, 1, vec![0.0f64], vec![]).unwrap();
        let g1 = MeijerGSpec::new(1, 0, vec![], vec![0.0f64]).unwrap();
        let spec = BivariateGSpec::new(outer, g1.clone(), g1);
        for &(x, y) in &[(0.5f64, 0.5f64), (2.0, 0.1), (1e-4, 3.0), (5.0, 5.0)] {
            let got = spec.eval(x, y).unwrap();
            let want = 1.0 / (1.0 + x + y);
            assert!((got.value - want).abs() <= 1e-8 * want, "({x},{y}): {} vs {want}", got.value);
            assert!(got.error_bound >= (got.value - want).abs());
        }
    }

    #[test]
    fn rejects_nonpositive_arguments() {
        let g1 = MeijerGSpec::new(1, 0, vec![], vec![0.0f64]).unwrap();
        let spec = BivariateGSpec::decoupled(g1.clone(), g1);
        assert!(matches!(spec.eval(0.0, 1.0), Err(Error::Domain { .. })));
        assert!(matches!(spec.eval(1.0, -1.0), Err(Error::Domain { .. })));
    }

    #[test]
    fn failing_contour_is_named() {
        let g0 = MeijerGSpec::new(1, 1, vec![0.5f64, 0.2], vec![0.0, 0.3]).unwrap();
        let g1 = MeijerGSpec::new(1, 0, vec![], vec![0.0f64]).unwrap();
        let spec = BivariateGSpec::decoupled(g0, g1);
        match spec.eval(1.0, 1.0) {
            Err(Error::NonConvergence { detail, .. }) => assert!(detail.starts_with("x contour"), "{detail}"),
            other => panic!("expected failure, got {other:?}"),
        }
    }
}
