//! Adaptive Gauss–Kronrod (10/21-point) quadrature on finite intervals.
//!
//! Integrands may be vector valued (`[T; N]`): every component is integrated on
//! the same nodes, while subdivision is driven by the error of component 0. The
//! per-interval error is the raw Gauss/Kronrod difference plus a roundoff floor,
//! which overestimates the true error for smooth integrands.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::real::Real;

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_600_525_255_354,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss weights for the nodes XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_399_198_411_968,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions<T> {
    pub abs_tol: T,
    pub rel_tol: T,
    pub max_intervals: usize,
}

impl<T: Real> Default for QuadOptions<T> {
    fn default() -> Self {
        QuadOptions { abs_tol: T::zero(), rel_tol: T::default_rel_tol(), max_intervals: 2000 }
    }
}

impl<T: Real> QuadOptions<T> {
    pub fn with_tolerances(abs_tol: T, rel_tol: T) -> Self {
        QuadOptions { abs_tol, rel_tol, ..Self::default() }
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult<T, const N: usize> {
    pub values: [T; N],
    /// Error estimate for component 0.
    pub error: T,
    /// Integral of `|f_0|`, used by callers to bound cancellation.
    pub abs_integral: T,
    pub evaluations: usize,
    pub intervals: usize,
    pub converged: bool,
}

impl<T: Real, const N: usize> QuadResult<T, N> {
    pub fn value(&self) -> T {
        self.values[0]
    }
}

struct Segment<T, const N: usize> {
    a: T,
    b: T,
    values: [T; N],
    error: T,
    abs: T,
}

impl<T: Real, const N: usize> PartialEq for Segment<T, N> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T: Real, const N: usize> Eq for Segment<T, N> {}
impl<T: Real, const N: usize> PartialOrd for Segment<T, N> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T: Real, const N: usize> Ord for Segment<T, N> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.partial_cmp(&other.error).unwrap_or(Ordering::Equal)
    }
}

fn gk21<T, F, const N: usize>(f: &mut F, a: T, b: T) -> Result<Segment<T, N>>
where
    T: Real,
    F: FnMut(T) -> Result<[T; N]>,
{
    let half = (b - a) * T::lit(0.5);
    let center = (a + b) * T::lit(0.5);
    let fc = f(center)?;
    let mut res_k = [T::zero(); N];
    let mut res_g = [T::zero(); N];
    for c in 0..N {
        res_k[c] = fc[c] * T::lit(WGK[10]);
    }
    let mut res_abs = fc[0].abs() * T::lit(WGK[10]);
    for j in 0..10 {
        let dx = half * T::lit(XGK[j]);
        let f1 = f(center - dx)?;
        let f2 = f(center + dx)?;
        let wk = T::lit(WGK[j]);
        for c in 0..N {
            res_k[c] = res_k[c] + wk * (f1[c] + f2[c]);
        }
        res_abs = res_abs + wk * (f1[0].abs() + f2[0].abs());
        if j % 2 == 1 {
            let wg = T::lit(WG[j / 2]);
            for c in 0..N {
                res_g[c] = res_g[c] + wg * (f1[c] + f2[c]);
            }
        }
    }
    let scale = half.abs();
    let mut values = [T::zero(); N];
    for c in 0..N {
        values[c] = res_k[c] * half;
    }
    let abs = res_abs * scale;
    let raw = ((res_k[0] - res_g[0]) * half).abs();
    let floor = T::lit(50.0) * T::epsilon() * abs;
    let error = raw.max(floor);
    if !error.is_finite() || !values.iter().all(|v| v.is_finite()) {
        return Err(Error::non_convergence("quadrature", "non-finite integrand value"));
    }
    Ok(Segment { a, b, values, error, abs })
}

/// Integrates a vector-valued integrand over `[points[0], points[last]]`, with the
/// interior points used as the initial partition.
pub fn integrate_partitioned<T, F, const N: usize>(
    mut f: F,
    points: &[T],
    opts: &QuadOptions<T>,
) -> Result<QuadResult<T, N>>
where
    T: Real,
    F: FnMut(T) -> Result<[T; N]>,
{
    if points.len() < 2 {
        return Err(Error::domain("quadrature", "need at least two partition points"));
    }
    let mut heap = BinaryHeap::new();
    let mut evaluations = 0;
    for w in points.windows(2) {
        if w[1] == w[0] {
            continue;
        }
        heap.push(gk21(&mut f, w[0], w[1])?);
        evaluations += 21;
    }
    let totals = |heap: &BinaryHeap<Segment<T, N>>| {
        let mut v = [T::zero(); N];
        let mut e = T::zero();
        let mut abs = T::zero();
        for s in heap.iter() {
            for c in 0..N {
                v[c] = v[c] + s.values[c];
            }
            e = e + s.error;
            abs = abs + s.abs;
        }
        (v, e, abs)
    };
    let (mut values, mut error, mut abs) = totals(&heap);
    let mut converged = error <= opts.abs_tol.max(opts.rel_tol * values[0].abs());
    while !converged && heap.len() < opts.max_intervals {
        let worst = match heap.pop() {
            Some(s) => s,
            None => break,
        };
        let mid = (worst.a + worst.b) * T::lit(0.5);
        if mid <= worst.a.min(worst.b) || mid >= worst.a.max(worst.b) {
            // Interval can no longer be split in this precision.
            heap.push(worst);
            break;
        }
        let left = gk21(&mut f, worst.a, mid)?;
        let right = gk21(&mut f, mid, worst.b)?;
        evaluations += 42;
        heap.push(left);
        heap.push(right);
        // Recompute totals from scratch to keep the running sums free of drift.
        let t = totals(&heap);
        values = t.0;
        error = t.1;
        abs = t.2;
        converged = error <= opts.abs_tol.max(opts.rel_tol * values[0].abs());
    }
    Ok(QuadResult { values, error, abs_integral: abs, evaluations, intervals: heap.len(), converged })
}

/// Scalar convenience wrapper over [`integrate_partitioned`].
pub fn integrate<T, F>(mut f: F, a: T, b: T, opts: &QuadOptions<T>) -> Result<QuadResult<T, 1>>
where
    T: Real,
    F: FnMut(T) -> T,
{
    integrate_partitioned(|x| Ok([f(x)]), &[a, b], opts)
}

/// Fallible scalar integrand over an explicit initial partition.
pub fn integrate_fallible<T, F>(mut f: F, points: &[T], opts: &QuadOptions<T>) -> Result<QuadResult<T, 1>>
where
    T: Real,
    F: FnMut(T) -> Result<T>,
{
    integrate_partitioned(|x| f(x).map(|v| [v]), points, opts)
}
