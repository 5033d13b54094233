//! Adaptive one-dimensional quadrature.
//!
//! Everything here is built on a single 21-point Gauss–Kronrod rule with the
//! embedded 10-point Gauss rule as error estimate, bisecting the interval with
//! the largest error until the requested tolerance is met. The engine is
//! generic over the integrand's value type so complex Cauchy transforms share
//! the exact same subdivision logic as real integrals.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::QuadratureError;

/// Tolerances and limits for every integral evaluated by the crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    /// Upper limit substituted for `+inf` in semi-infinite integrals.
    pub truncation_radius: f64,
}

/// Squared truncation radius before the `max(alpha, 0)` shift.
///
/// Integrands carry a factor bounded by `exp(alpha - tau^2)`, so the
/// discarded tail beyond `sqrt(42 + alpha)` is below `e^-42 < 1e-18`.
pub const TAIL_EXPONENT: f64 = 42.0;

pub const INNER_TOLERANCE: f64 = 1e-10;
pub const OUTER_TOLERANCE: f64 = 1e-8;
pub const DEFAULT_MAX_SUBDIVISIONS: usize = 2000;

impl QuadratureConfig {
    /// Inner (dispersion-level) configuration for a given chemical potential ratio.
    pub fn for_alpha(alpha: f64) -> Self {
        Self {
            abs_tol: INNER_TOLERANCE,
            rel_tol: INNER_TOLERANCE,
            max_subdivisions: DEFAULT_MAX_SUBDIVISIONS,
            truncation_radius: truncation_radius(alpha),
        }
    }

    /// Same radius and limits with the looser profile-level tolerances.
    pub fn outer(&self) -> Self {
        Self {
            abs_tol: self.abs_tol.max(OUTER_TOLERANCE),
            rel_tol: self.rel_tol.max(OUTER_TOLERANCE),
            ..*self
        }
    }

    pub fn with_tolerance(self, tol: f64) -> Self {
        Self {
            abs_tol: tol,
            rel_tol: tol,
            ..self
        }
    }

    pub fn validate(&self) -> Result<(), QuadratureError> {
        let ok = self.abs_tol > 0.0
            && self.rel_tol > 0.0
            && self.max_subdivisions >= 1
            && self.truncation_radius > 0.0
            && self.abs_tol.is_finite()
            && self.rel_tol.is_finite()
            && self.truncation_radius.is_finite();
        if ok {
            Ok(())
        } else {
            Err(QuadratureError::InvalidConfig(format!("{self:?}")))
        }
    }
}

pub fn truncation_radius(alpha: f64) -> f64 {
    (TAIL_EXPONENT + alpha.max(0.0)).sqrt()
}

/// Outcome of a converged integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegralResult<T = f64> {
    pub value: T,
    pub error_estimate: f64,
    pub subdivisions_used: usize,
}

/// Values the adaptive engine can accumulate.
pub trait QuadValue:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
    fn is_finite_value(&self) -> bool;
    fn parts(&self) -> (f64, f64);
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }
    fn parts(&self) -> (f64, f64) {
        (*self, 0.0)
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn is_finite_value(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
    fn parts(&self) -> (f64, f64) {
        (self.re, self.im)
    }
}

// Published 21-point Kronrod nodes and weights, digits as tabulated.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689,
    0.973_906_528_517_171_720_077_964_012_084,
    0.930_157_491_355_708_226_001_207_180_060,
    0.865_063_366_688_984_510_732_096_688_423,
    0.780_817_726_586_416_897_063_717_578_345,
    0.679_409_568_299_024_406_234_327_365_115,
    0.562_757_134_668_604_683_339_000_099_273,
    0.433_395_394_129_247_190_799_265_943_166,
    0.294_392_862_701_460_198_131_126_603_104,
    0.148_874_338_981_631_210_884_826_001_130,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062,
    0.032_558_162_307_964_727_478_818_972_459,
    0.054_755_896_574_351_996_031_381_300_245,
    0.075_039_674_810_919_952_767_043_140_916,
    0.093_125_454_583_697_605_535_065_465_083,
    0.109_387_158_802_297_641_899_210_590_326,
    0.123_491_976_262_065_851_077_208_032_828,
    0.134_709_217_311_473_325_928_054_001_772,
    0.142_775_938_577_060_080_797_094_273_139,
    0.147_739_104_901_338_491_374_841_515_972,
    0.149_445_554_002_916_905_664_936_468_390,
];

// Gauss weights for XGK[1], XGK[3], ..., XGK[9].
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893,
    0.149_451_349_150_580_593_145_776_339_658,
    0.219_086_362_515_982_043_995_534_934_228,
    0.269_266_719_309_996_355_091_226_921_569,
    0.295_524_224_714_752_870_173_892_994_651,
];

#[derive(Debug, Clone, Copy)]
struct Segment<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
}

fn rescale_error(err: f64, resabs: f64, resasc: f64) -> f64 {
    let mut err = err;
    if resasc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / resasc).powf(1.5);
        err = if scale < 1.0 { resasc * scale } else { resasc };
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    err
}

fn kronrod21<T, F>(f: &mut F, a: f64, b: f64) -> Result<Segment<T>, QuadratureError>
where
    T: QuadValue,
    F: FnMut(f64) -> T,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut eval = |x: f64| -> Result<T, QuadratureError> {
        let y = f(x);
        if y.is_finite_value() {
            Ok(y)
        } else {
            Err(QuadratureError::InvalidIntegrand { abscissa: x })
        }
    };

    let fc = eval(center)?;
    let mut kronrod = fc * WGK[10];
    let mut gauss = T::zero();
    let mut resabs = fc.magnitude() * WGK[10];
    let mut samples = [(T::zero(), T::zero()); 10];
    for (j, sample) in samples.iter_mut().enumerate() {
        let dx = half * XGK[j];
        let lo = eval(center - dx)?;
        let hi = eval(center + dx)?;
        let pair = lo + hi;
        kronrod = kronrod + pair * WGK[j];
        resabs += WGK[j] * (lo.magnitude() + hi.magnitude());
        if j % 2 == 1 {
            gauss = gauss + pair * WG[j / 2];
        }
        *sample = (lo, hi);
    }

    let mean = kronrod * 0.5;
    let mut resasc = WGK[10] * (fc - mean).magnitude();
    for (j, (lo, hi)) in samples.iter().enumerate() {
        resasc += WGK[j] * ((*lo - mean).magnitude() + (*hi - mean).magnitude());
    }

    let scale = half.abs();
    let raw = ((kronrod - gauss) * half).magnitude();
    Ok(Segment {
        a,
        b,
        value: kronrod * half,
        error: rescale_error(raw, resabs * scale, resasc * scale),
    })
}

#[derive(Debug)]
struct Ranked {
    error: f64,
    index: usize,
}

impl PartialEq for Ranked {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Ranked {}
impl PartialOrd for Ranked {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Ranked {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.index.cmp(&self.index))
    }
}

/// Adaptive integration of a possibly complex-valued integrand.
pub fn integrate_generic<T, F>(
    mut f: F,
    a: f64,
    b: f64,
    cfg: &QuadratureConfig,
) -> Result<IntegralResult<T>, QuadratureError>
where
    T: QuadValue,
    F: FnMut(f64) -> T,
{
    cfg.validate()?;
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(QuadratureError::InvalidInterval { a, b });
    }

    // One level of grading toward both endpoints, where the kernel's mild
    // logarithmic behavior lives.
    let width = b - a;
    let mut breaks = vec![a];
    if cfg.max_subdivisions >= 3 {
        breaks.push(a + width / 16.0);
        breaks.push(b - width / 16.0);
    }
    breaks.push(b);

    let mut segments: Vec<Segment<T>> = Vec::with_capacity(64);
    for w in breaks.windows(2) {
        segments.push(kronrod21(&mut f, w[0], w[1])?);
    }
    let mut subdivisions = segments.len() - 1;

    let mut heap: BinaryHeap<Ranked> = segments
        .iter()
        .enumerate()
        .map(|(index, s)| Ranked {
            error: s.error,
            index,
        })
        .collect();

    loop {
        let (value, error) = totals(&segments);
        if error <= cfg.abs_tol.max(cfg.rel_tol * value.magnitude()) {
            return Ok(IntegralResult {
                value,
                error_estimate: error,
                subdivisions_used: subdivisions,
            });
        }

        let worst = loop {
            match heap.pop() {
                Some(r) => {
                    let s = &segments[r.index];
                    let mid = 0.5 * (s.a + s.b);
                    // Intervals that can no longer be split in floating point
                    // drop out of the queue.
                    if mid > s.a && mid < s.b {
                        break Some(r.index);
                    }
                }
                None => break None,
            }
        };

        let Some(index) = worst.filter(|_| subdivisions < cfg.max_subdivisions) else {
            let (re, im) = value.parts();
            return Err(QuadratureError::ToleranceNotReached {
                value: re,
                value_im: im,
                error_estimate: error,
                subdivisions,
            });
        };

        let parent = segments[index];
        let mid = 0.5 * (parent.a + parent.b);
        let left = kronrod21(&mut f, parent.a, mid)?;
        let right = kronrod21(&mut f, mid, parent.b)?;
        segments[index] = left;
        segments.push(right);
        heap.push(Ranked {
            error: left.error,
            index,
        });
        heap.push(Ranked {
            error: right.error,
            index: segments.len() - 1,
        });
        subdivisions += 1;
    }
}

fn totals<T: QuadValue>(segments: &[Segment<T>]) -> (T, f64) {
    segments
        .iter()
        .fold((T::zero(), 0.0), |(v, e), s| (v + s.value, e + s.error))
}

/// `integral_a^b f(x) dx` to within `max(abs_tol, rel_tol * |value|)`.
pub fn integrate<F>(
    f: F,
    a: f64,
    b: f64,
    cfg: &QuadratureConfig,
) -> Result<IntegralResult, QuadratureError>
where
    F: FnMut(f64) -> f64,
{
    integrate_generic(f, a, b, cfg)
}

/// `integral_0^inf f`, truncated at `cfg.truncation_radius`.
pub fn integrate_semi_infinite<F>(
    f: F,
    cfg: &QuadratureConfig,
) -> Result<IntegralResult, QuadratureError>
where
    F: FnMut(f64) -> f64,
{
    integrate(f, 0.0, cfg.truncation_radius, cfg)
}

/// Principal value of `integral_a^b f(t) / (t - pole) dt`.
///
/// Uses singularity subtraction; `f` itself must be smooth at the pole.
pub fn integrate_principal_value<F>(
    mut f: F,
    pole: f64,
    a: f64,
    b: f64,
    cfg: &QuadratureConfig,
) -> Result<IntegralResult, QuadratureError>
where
    F: FnMut(f64) -> f64,
{
    if !(a < pole && pole < b) {
        return Err(QuadratureError::PoleOutsideInterval { pole, a, b });
    }
    let at_pole = f(pole);
    if !at_pole.is_finite() {
        return Err(QuadratureError::InvalidIntegrand { abscissa: pole });
    }
    let mut regular = |t: f64| (f(t) - at_pole) / (t - pole);
    // Splitting at the pole keeps the 0/0 point off the rule's nodes.
    let left = integrate(&mut regular, a, pole, cfg)?;
    let right = integrate(&mut regular, pole, b, cfg)?;
    let log_term = at_pole * ((b - pole) / (pole - a)).ln();
    Ok(IntegralResult {
        value: left.value + right.value + log_term,
        error_estimate: left.error_estimate + right.error_estimate,
        subdivisions_used: left.subdivisions_used.max(right.subdivisions_used),
    })
}

/// Runs `body` with an integrand whose evaluation can fail. The first
/// failure is returned in place of the quadrature outcome.
pub(crate) fn with_fallible<F, R>(
    mut f: F,
    body: impl FnOnce(&mut dyn FnMut(f64) -> f64) -> Result<R, QuadratureError>,
) -> crate::error::Result<R>
where
    F: FnMut(f64) -> crate::error::Result<f64>,
{
    let mut failure = None;
    let outcome = body(&mut |x| match f(x) {
        Ok(v) => v,
        Err(e) => {
            failure.get_or_insert(e);
            f64::NAN
        }
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(outcome?),
    }
}

pub(crate) fn integrate_fallible<F>(
    f: F,
    a: f64,
    b: f64,
    cfg: &QuadratureConfig,
) -> crate::error::Result<IntegralResult>
where
    F: FnMut(f64) -> crate::error::Result<f64>,
{
    with_fallible(f, |g| integrate(g, a, b, cfg))
}

pub(crate) fn integrate_principal_value_fallible<F>(
    f: F,
    pole: f64,
    a: f64,
    b: f64,
    cfg: &QuadratureConfig,
) -> crate::error::Result<IntegralResult>
where
    F: FnMut(f64) -> crate::error::Result<f64>,
{
    with_fallible(f, |g| integrate_principal_value(g, pole, a, b, cfg))
}

/// `integral_a^b dt / (t - w)` for `w` off the real segment `[a, b]`.
pub fn log_cauchy_weight(w: Complex64, a: f64, b: f64) -> Complex64 {
    if w.im != 0.0 {
        // The path t - w stays on one side of the negative real axis.
        (Complex64::new(b, 0.0) - w).ln() - (Complex64::new(a, 0.0) - w).ln()
    } else {
        Complex64::new(((b - w.re) / (a - w.re)).abs().ln(), 0.0)
    }
}

/// Cauchy transform `integral_a^b f(t) / (t - w) dt` for complex `w` off `[a, b]`.
///
/// The value of `f` at the projection of `w` onto `[a, b]` is subtracted and
/// integrated analytically, which keeps the integrand bounded as `w`
/// approaches the segment.
pub fn integrate_cauchy<F>(
    mut f: F,
    w: Complex64,
    a: f64,
    b: f64,
    cfg: &QuadratureConfig,
) -> Result<IntegralResult<Complex64>, QuadratureError>
where
    F: FnMut(f64) -> f64,
{
    if w.im == 0.0 && w.re >= a && w.re <= b {
        return Err(QuadratureError::PoleOutsideInterval { pole: w.re, a, b });
    }
    let anchor = w.re.clamp(a, b);
    let at_anchor = f(anchor);
    if !at_anchor.is_finite() {
        return Err(QuadratureError::InvalidIntegrand { abscissa: anchor });
    }
    let mut regular = |t: f64| Complex64::new(f(t) - at_anchor, 0.0) / (Complex64::new(t, 0.0) - w);
    let mut value = Complex64::new(0.0, 0.0);
    let mut error = 0.0;
    let mut subdivisions = 0;
    let pieces: &[(f64, f64)] = if anchor > a && anchor < b {
        &[(a, anchor), (anchor, b)]
    } else {
        &[(a, b)]
    };
    for &(lo, hi) in pieces {
        let r = integrate_generic(&mut regular, lo, hi, cfg)?;
        value += r.value;
        error += r.error_estimate;
        subdivisions = subdivisions.max(r.subdivisions_used);
    }
    Ok(IntegralResult {
        value: value + log_cauchy_weight(w, a, b) * at_anchor,
        error_estimate: error,
        subdivisions_used: subdivisions,
    })
}
