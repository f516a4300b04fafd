//! Norm coefficients, asymptotic ratios, explicit eigenvalue intervals,
//! and the growth/bound hypothesis checks behind them.
//!
//! For a coefficient function `a` on the middle half-interval, the window
//! functional is
//!
//! ```text
//! gamma_a(t) = (rho/2) [ \int_{1/4}^t 1/p(s) phi^{-1}( 1/q(s) \int_s^t a ) ds
//!                      + \int_t^{3/4} 1/p(s) phi^{-1}( 1/q(s) \int_t^s a ) ds ],
//! ```
//!
//! and for a separable system the two norm coefficients per component are
//!
//! ```text
//! A_i = \int_0^1 1/p(s) phi^{-1}( 1/q(s) \int_0^1 h_i ) ds,
//! B_i = min over [1/4, 3/4] of gamma_{h_i},
//! ```
//!
//! aggregated as `A = max_i A_i`, `B = min_i B_i`. With the asymptotic
//! ratios `g0_i` and `ginf_i` of `g_i(u) / phi(||u||)` at zero and
//! infinity, the lambda-scaled system has at least one positive solution
//! for every lambda in
//!
//! ```text
//! ( 1 / (B^{p-1} min_i ginf_i),  1 / (A^{p-1} max_i g0_i) )
//! ```
//!
//! whenever that interval is nonempty, and in the twin interval with the
//! roles of the two ratios swapped. The conventions `1/inf = 0` and
//! `1/0 = inf` apply literally, so e.g. `ginf = inf` with `g0 = 0` yields
//! `(0, inf)`.
//!
//! Ratio limits are estimated by finite sampling over magnitude decades
//! and directions; that is a heuristic, clearly labelled in the report,
//! and user-declared analytic values always take precedence.

use crate::cone::{compute_rho_on, WINDOW};
use crate::error::{Error, Result};
use crate::expr::ExprAst;
use crate::operator::{phi_inv, Operator};
use crate::problem::{Nonlinearity, ProblemSpec};
use crate::quadrature::{integrate, interp_cubic};
use crate::solver::{solve_auto, Method, SolutionBundle, SolverConfig};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;

/// Default magnitude grid for ratio estimation: decades `1e-6 ..= 1e6`.
pub fn default_magnitudes() -> Vec<f64> {
    (-6..=6).map(|k| 10f64.powi(k)).collect()
}

#[derive(Debug, Clone)]
pub struct AnalysisOptions {
    /// Grid for the quadrature tables (divisible by 4).
    pub grid_n: usize,
    /// Magnitude grid for ratio estimation (log-spaced, >= 6 decades).
    pub magnitudes: Vec<f64>,
    /// Total number of sampling directions (axis + all-ones + random fill).
    pub directions: usize,
    /// Seed for the random directions and box samples.
    pub seed: u64,
    /// Random interior points per box in the pointwise bound checks.
    pub box_samples: usize,
    /// Truncation for infinite lambda interval ends in sweeps.
    pub lambda_cap: f64,
    /// Truncation for lambda interval ends at zero in sweeps.
    pub lambda_floor: f64,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            grid_n: crate::DEFAULT_GRID_N,
            magnitudes: default_magnitudes(),
            directions: 12,
            seed: 42,
            box_samples: 256,
            lambda_cap: 1e6,
            lambda_floor: 1e-6,
        }
    }
}

/// Equality slack for the bound checks: the constructions behind them sit
/// exactly at equality, so comparisons carry a relative `1e-9` tolerance.
const EQUALITY_SLACK: f64 = 1e-9;

// ---------------------------------------------------------------------------
// The window functional gamma
// ---------------------------------------------------------------------------

/// Reusable evaluator for `gamma_a` on a fixed spec, grid and coefficient.
pub struct GammaEvaluator<'a> {
    op: Operator<'a>,
    rho: f64,
    cumulative: Vec<f64>,
}

impl<'a> GammaEvaluator<'a> {
    pub fn new(
        spec: &'a ProblemSpec,
        a: impl Fn(f64) -> Result<f64>,
        grid_n: usize,
    ) -> Result<Self> {
        let op = Operator::new(spec, grid_n)?;
        let rho = compute_rho_on(spec, grid_n)?.rho();
        let mut samples = Vec::with_capacity(grid_n + 1);
        for j in 0..=grid_n {
            let t = j as f64 / grid_n as f64;
            let v = a(t)?;
            if (WINDOW.0..=WINDOW.1).contains(&t) && v < 0.0 {
                return Err(Error::InvalidInput(format!(
                    "window functional needs a >= 0 on [1/4, 3/4]; a({t}) = {v}"
                )));
            }
            samples.push(v);
        }
        let cumulative = op.cumulative_of_samples(&samples);
        Ok(GammaEvaluator {
            op,
            rho,
            cumulative,
        })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(WINDOW.0..=WINDOW.1).contains(&t) {
            return Err(Error::InvalidInput(format!(
                "gamma is defined on [{}, {}], got t = {t}",
                WINDOW.0, WINDOW.1
            )));
        }
        let anchor = interp_cubic(&self.cumulative, t);
        let left = self
            .op
            .weighted_branch(WINDOW.0, t, &self.cumulative, anchor, false)?;
        let right = self
            .op
            .weighted_branch(t, WINDOW.1, &self.cumulative, anchor, true)?;
        Ok(0.5 * self.rho * (left + right))
    }

    /// Window minimum by a 65-point scan followed by golden-section
    /// refinement of the best bracket to `1e-10` in `t`. The scan guards
    /// against non-unimodal profiles; the refinement assumes continuity
    /// only.
    pub fn minimize(&self) -> Result<(f64, f64)> {
        const SCAN: usize = 64;
        let width = WINDOW.1 - WINDOW.0;
        let mut best_j = 0;
        let mut best_v = f64::INFINITY;
        for j in 0..=SCAN {
            let t = WINDOW.0 + width * j as f64 / SCAN as f64;
            let v = self.eval(t)?;
            if v < best_v {
                best_v = v;
                best_j = j;
            }
        }
        let lo = WINDOW.0 + width * best_j.saturating_sub(1) as f64 / SCAN as f64;
        let hi = WINDOW.0 + width * (best_j + 1).min(SCAN) as f64 / SCAN as f64;
        let (value, argmin) = golden_min(|t| self.eval(t), lo, hi, 1e-10)?;
        if value <= best_v {
            Ok((value, argmin))
        } else {
            Ok((best_v, WINDOW.0 + width * best_j as f64 / SCAN as f64))
        }
    }
}

fn golden_min(
    f: impl Fn(f64) -> Result<f64>,
    mut a: f64,
    mut b: f64,
    tol: f64,
) -> Result<(f64, f64)> {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
        }
    }
    let x = 0.5 * (a + b);
    Ok((f(x)?, x))
}

/// One-shot `gamma_a(t)` on the default grid.
pub fn gamma(spec: &ProblemSpec, a: impl Fn(f64) -> Result<f64>, t: f64) -> Result<f64> {
    GammaEvaluator::new(spec, a, crate::DEFAULT_GRID_N)?.eval(t)
}

// ---------------------------------------------------------------------------
// Norm coefficients
// ---------------------------------------------------------------------------

fn separable_parts(spec: &ProblemSpec) -> Result<(&[ExprAst], &[ExprAst])> {
    match spec.nonlinearity() {
        Nonlinearity::Separable { h, g } => Ok((h, g)),
        Nonlinearity::General { .. } => Err(Error::InvalidInput(
            "this analysis requires the separable form h_i(t) * g_i(u)".into(),
        )),
    }
}

/// `A_i` on the given grid (zero-based component index).
pub fn compute_a(spec: &ProblemSpec, i: usize, grid_n: usize) -> Result<f64> {
    let (h, _) = separable_parts(spec)?;
    let pexp = spec.phi_exponent();
    let mass = integrate(|t| h[i].evaluate(t, &[]), 0.0, 1.0, grid_n)?;
    integrate(
        |s| -> Result<f64> {
            let p_s = positive_weight(spec, "p", s)?;
            let q_s = positive_weight(spec, "q", s)?;
            Ok(phi_inv(mass / q_s, pexp) / p_s)
        },
        0.0,
        1.0,
        grid_n,
    )
}

/// `B_i` with its minimiser, on the given grid.
pub fn compute_b(spec: &ProblemSpec, i: usize, grid_n: usize) -> Result<(f64, f64)> {
    let (h, _) = separable_parts(spec)?;
    let hi = &h[i];
    let evaluator = GammaEvaluator::new(spec, |t| Ok(hi.evaluate(t, &[])?), grid_n)?;
    evaluator.minimize()
}

fn positive_weight(spec: &ProblemSpec, name: &'static str, s: f64) -> Result<f64> {
    let ast = if name == "p" {
        spec.weight_p()
    } else {
        spec.weight_q()
    };
    let v = ast.evaluate(s, &[])?;
    if v <= 0.0 {
        return Err(Error::NonpositiveWeight {
            name,
            t: s,
            value: v,
        });
    }
    Ok(v)
}

// ---------------------------------------------------------------------------
// Asymptotic ratio estimation
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LimitClass {
    Finite,
    Diverging,
    Vanishing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LimitSource {
    Estimated,
    Declared,
}

/// Sampled estimate of `lim g(u) / phi(||u||)` at one end of the magnitude
/// range.
#[derive(Debug, Clone)]
pub struct LimitEstimate {
    /// The value used downstream: 0 for vanishing, infinity for diverging,
    /// otherwise the midpoint of the direction range at the extreme
    /// magnitude.
    pub value: f64,
    /// Range over directions at the extreme magnitude.
    pub lo: f64,
    pub hi: f64,
    pub class: LimitClass,
    /// Convergence diagnostic: (magnitude, min, max) at the last three
    /// magnitudes toward the limit.
    pub trail: Vec<(f64, f64, f64)>,
    pub source: LimitSource,
}

impl LimitEstimate {
    pub fn declared(value: f64) -> Self {
        let class = if value == 0.0 {
            LimitClass::Vanishing
        } else if value.is_infinite() {
            LimitClass::Diverging
        } else {
            LimitClass::Finite
        };
        LimitEstimate {
            value,
            lo: value,
            hi: value,
            class,
            trail: Vec::new(),
            source: LimitSource::Declared,
        }
    }
}

/// Estimates `(g0_i, ginf_i)` by evaluating `g_i(s d) / phi(s)` over the
/// magnitude grid and sampling directions (axis vectors, the all-ones
/// vector — a unit vector in the max norm — and random nonnegative unit
/// vectors).
///
/// Classification: the ratio "diverges" when, over the last three
/// magnitude steps toward the limit, even the slowest direction grows at
/// least tenfold per decade; it "vanishes" when even the fastest direction
/// shrinks at least tenfold per decade. Anything else is reported with the
/// final value range. A finite sample cannot prove a limit; reports label
/// these as estimates.
pub fn estimate_g_limits(
    spec: &ProblemSpec,
    i: usize,
    magnitudes: &[f64],
    directions: usize,
    rng: &mut StdRng,
) -> Result<(LimitEstimate, LimitEstimate)> {
    let (_, g) = separable_parts(spec)?;
    let gi = &g[i];
    let n = spec.component_count();
    let pexp = spec.phi_exponent();

    if magnitudes.len() < 4 {
        return Err(Error::InvalidInput(
            "ratio estimation needs at least 4 magnitudes".into(),
        ));
    }
    let mut mags = magnitudes.to_vec();
    mags.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if mags[0] <= 0.0 || !mags.iter().all(|m| m.is_finite()) {
        return Err(Error::InvalidInput(
            "magnitudes must be positive and finite".into(),
        ));
    }
    if mags[mags.len() - 1] / mags[0] < 1e6 * (1.0 - 1e-9) {
        return Err(Error::InvalidInput(
            "magnitude grid must span at least 6 decades".into(),
        ));
    }

    let mut dirs: Vec<Vec<f64>> = Vec::new();
    for k in 0..n {
        let mut e = vec![0.0; n];
        e[k] = 1.0;
        dirs.push(e);
    }
    dirs.push(vec![1.0; n]);
    while dirs.len() < directions.max(n + 1) {
        let mut d: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let max = d.iter().cloned().fold(0.0f64, f64::max);
        if max <= 0.0 {
            continue;
        }
        d.iter_mut().for_each(|x| *x /= max);
        dirs.push(d);
    }

    // Ratio range over directions at each magnitude.
    let mut ranges: Vec<(f64, f64, f64)> = Vec::with_capacity(mags.len());
    let mut u = vec![0.0; n];
    for &s in &mags {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for d in &dirs {
            for (uk, dk) in u.iter_mut().zip(d) {
                *uk = s * dk;
            }
            let gv = gi.evaluate(0.0, &u)?;
            let ratio = gv / s.powf(pexp - 1.0);
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
        ranges.push((s, lo, hi));
    }

    let toward_zero: Vec<(f64, f64, f64)> = ranges.iter().rev().cloned().collect();
    let g0 = classify_limit(&toward_zero);
    let ginf = classify_limit(&ranges);
    Ok((g0, ginf))
}

/// `ranges` is ordered toward the limit; the last entries are closest.
fn classify_limit(ranges: &[(f64, f64, f64)]) -> LimitEstimate {
    let steps = 3.min(ranges.len() - 1);
    let tail = &ranges[ranges.len() - 1 - steps..];
    let mut diverging = steps > 0;
    let mut vanishing = steps > 0;
    for w in tail.windows(2) {
        let (s0, lo0, hi0) = w[0];
        let (s1, lo1, hi1) = w[1];
        // Growth demanded per decade of magnitude, regridded to the
        // actual spacing.
        let decades = (s1 / s0).abs().log10().abs();
        let factor = 10f64.powf(decades);
        if !(lo1 >= lo0 * factor * (1.0 - 1e-6) && lo0 > 0.0) {
            diverging = false;
        }
        if !(hi1 <= hi0 / factor * (1.0 + 1e-6)) {
            vanishing = false;
        }
    }
    let (s_end, lo, hi) = *ranges.last().unwrap();
    let _ = s_end;
    let (class, value) = if diverging {
        (LimitClass::Diverging, f64::INFINITY)
    } else if vanishing {
        (LimitClass::Vanishing, 0.0)
    } else {
        (LimitClass::Finite, 0.5 * (lo + hi))
    };
    LimitEstimate {
        value,
        lo,
        hi,
        class,
        trail: tail.to_vec(),
        source: LimitSource::Estimated,
    }
}

// ---------------------------------------------------------------------------
// Eigenvalue intervals
// ---------------------------------------------------------------------------

/// Per-component user-declared limits overriding the sampled estimates.
#[derive(Debug, Clone, Default)]
pub struct LimitOverrides {
    pub g0: Option<Vec<f64>>,
    pub ginf: Option<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct ComponentAnalysis {
    /// One-based component index.
    pub component: usize,
    pub a: f64,
    pub b: f64,
    pub b_argmin: f64,
    pub g0: LimitEstimate,
    pub ginf: LimitEstimate,
    /// Growth condition (h1) for this component:
    /// `g0 < (1/A_i)^(p-1)` and `ginf > (1/B_i)^(p-1)`.
    pub h1: bool,
    /// The twin condition with the roles of the limits swapped.
    pub h2: bool,
}

#[derive(Debug, Clone)]
pub struct IntervalReport {
    pub rho: f64,
    pub a_max: f64,
    pub b_min: f64,
    pub components: Vec<ComponentAnalysis>,
    /// `( 1/(B^{p-1} min ginf), 1/(A^{p-1} max g0) )` when nonempty.
    pub interval_s: Option<(f64, f64)>,
    /// The twin interval with g0 and ginf swapped.
    pub interval_t: Option<(f64, f64)>,
    pub h1_all: bool,
    pub h2_all: bool,
    /// All components diverge at infinity and vanish at zero.
    pub corollary_i: bool,
    /// All components diverge at zero and vanish at infinity.
    pub corollary_ii: bool,
    /// Either corollary condition holds: positive solutions for every
    /// lambda in (0, inf).
    pub lambda_unrestricted: bool,
}

impl IntervalReport {
    pub fn any_conclusion(&self) -> bool {
        self.interval_s.is_some() || self.interval_t.is_some() || self.h1_all || self.h2_all
    }
}

/// Computes the full interval report: coefficients, ratio limits
/// (estimated or declared), both eigenvalue intervals, the growth
/// conditions, and the unrestricted-lambda flags.
pub fn eigenvalue_intervals(
    spec: &ProblemSpec,
    overrides: &LimitOverrides,
    options: &AnalysisOptions,
) -> Result<IntervalReport> {
    let n = spec.component_count();
    separable_parts(spec)?;
    for (name, list) in [("g0", &overrides.g0), ("ginf", &overrides.ginf)] {
        if let Some(values) = list {
            if values.len() != n {
                return Err(Error::InvalidInput(format!(
                    "{name} override needs {n} value(s), got {}",
                    values.len()
                )));
            }
            if values.iter().any(|v| *v < 0.0 || v.is_nan()) {
                return Err(Error::InvalidInput(format!(
                    "{name} override values must be nonnegative (or inf)"
                )));
            }
        }
    }

    let rho = compute_rho_on(spec, options.grid_n)?.rho();
    let pexp = spec.phi_exponent();
    let mut rng = StdRng::seed_from_u64(options.seed);
    let mut components = Vec::with_capacity(n);
    for i in 0..n {
        let a = compute_a(spec, i, options.grid_n)?;
        let (b, b_argmin) = compute_b(spec, i, options.grid_n)?;
        let (g0_est, ginf_est) =
            estimate_g_limits(spec, i, &options.magnitudes, options.directions, &mut rng)?;
        let g0 = match &overrides.g0 {
            Some(values) => LimitEstimate::declared(values[i]),
            None => g0_est,
        };
        let ginf = match &overrides.ginf {
            Some(values) => LimitEstimate::declared(values[i]),
            None => ginf_est,
        };
        let a_threshold = inverse_power(a, pexp);
        let b_threshold = inverse_power(b, pexp);
        let h1 = g0.value < a_threshold && ginf.value > b_threshold;
        let h2 = ginf.value < a_threshold && g0.value > b_threshold;
        components.push(ComponentAnalysis {
            component: i + 1,
            a,
            b,
            b_argmin,
            g0,
            ginf,
            h1,
            h2,
        });
    }

    let a_max = components
        .iter()
        .map(|c| c.a)
        .fold(f64::NEG_INFINITY, f64::max);
    let b_min = components.iter().map(|c| c.b).fold(f64::INFINITY, f64::min);
    let min_ginf = components
        .iter()
        .map(|c| c.ginf.value)
        .fold(f64::INFINITY, f64::min);
    let max_g0 = components.iter().map(|c| c.g0.value).fold(0.0f64, f64::max);
    let min_g0 = components
        .iter()
        .map(|c| c.g0.value)
        .fold(f64::INFINITY, f64::min);
    let max_ginf = components
        .iter()
        .map(|c| c.ginf.value)
        .fold(0.0f64, f64::max);

    let interval_s = lambda_interval(b_min, min_ginf, a_max, max_g0, pexp);
    let interval_t = lambda_interval(b_min, min_g0, a_max, max_ginf, pexp);

    let h1_all = components.iter().all(|c| c.h1);
    let h2_all = components.iter().all(|c| c.h2);
    let corollary_i = components
        .iter()
        .all(|c| c.ginf.value.is_infinite() && c.g0.value == 0.0);
    let corollary_ii = components
        .iter()
        .all(|c| c.g0.value.is_infinite() && c.ginf.value == 0.0);

    Ok(IntervalReport {
        rho,
        a_max,
        b_min,
        components,
        interval_s,
        interval_t,
        h1_all,
        h2_all,
        corollary_i,
        corollary_ii,
        lambda_unrestricted: corollary_i || corollary_ii,
    })
}

/// `(1/x)^(p-1)` with the conventions at 0 and infinity.
fn inverse_power(x: f64, pexp: f64) -> f64 {
    if x == 0.0 {
        f64::INFINITY
    } else if x.is_infinite() {
        0.0
    } else {
        (1.0 / x).powf(pexp - 1.0)
    }
}

/// `( 1/(B^{p-1} lim_lower), 1/(A^{p-1} lim_upper) )` under the literal
/// `1/0 = inf`, `1/inf = 0` conventions; `None` when empty.
fn lambda_interval(
    b: f64,
    lim_lower: f64,
    a: f64,
    lim_upper: f64,
    pexp: f64,
) -> Option<(f64, f64)> {
    let lower = reciprocal_product(b.powf(pexp - 1.0), lim_lower);
    let upper = reciprocal_product(a.powf(pexp - 1.0), lim_upper);
    (lower < upper).then_some((lower, upper))
}

fn reciprocal_product(coeff: f64, limit: f64) -> f64 {
    if limit.is_infinite() {
        // 1/inf = 0 exactly, regardless of the finite coefficient.
        if coeff > 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        let denom = coeff * limit;
        if denom == 0.0 {
            f64::INFINITY
        } else {
            1.0 / denom
        }
    }
}

// ---------------------------------------------------------------------------
// Hypothesis checks
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct ConditionCheck {
    pub name: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GrowthReport {
    pub h1_all: bool,
    pub h2_all: bool,
    pub checks: Vec<ConditionCheck>,
}

/// Evaluates the growth conditions per component with precomputed
/// coefficients: (h1) `0 <= g0 < (1/A_i)^(p-1)` and
/// `(1/B_i)^(p-1) < ginf <= inf`; (h2) with the limits swapped.
pub fn check_h1_h2(
    spec: &ProblemSpec,
    limits: &[(f64, f64)],
    options: &AnalysisOptions,
) -> Result<GrowthReport> {
    separable_parts(spec)?;
    let n = spec.component_count();
    if limits.len() != n {
        return Err(Error::InvalidInput(format!(
            "expected {n} (g0, ginf) pairs, got {}",
            limits.len()
        )));
    }
    let pexp = spec.phi_exponent();
    let mut checks = Vec::new();
    let mut h1_all = true;
    let mut h2_all = true;
    for (i, (g0, ginf)) in limits.iter().enumerate() {
        let a = compute_a(spec, i, options.grid_n)?;
        let (b, _) = compute_b(spec, i, options.grid_n)?;
        let a_thr = inverse_power(a, pexp);
        let b_thr = inverse_power(b, pexp);
        let h1 = *g0 >= 0.0 && *g0 < a_thr && *ginf > b_thr;
        let h2 = *ginf >= 0.0 && *ginf < a_thr && *g0 > b_thr;
        h1_all &= h1;
        h2_all &= h2;
        checks.push(ConditionCheck {
            name: format!("h1[{}]", i + 1),
            passed: h1,
            witness: (!h1)
                .then(|| format!("g0 = {g0}, ginf = {ginf}, need g0 < {a_thr} and ginf > {b_thr}")),
        });
        checks.push(ConditionCheck {
            name: format!("h2[{}]", i + 1),
            passed: h2,
            witness: (!h2)
                .then(|| format!("g0 = {g0}, ginf = {ginf}, need ginf < {a_thr} and g0 > {b_thr}")),
        });
    }
    Ok(GrowthReport {
        h1_all,
        h2_all,
        checks,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub d1_all: bool,
    pub d2_all: bool,
    pub rho: f64,
    pub checks: Vec<ConditionCheck>,
}

/// Sampled check of the two-sided bound hypotheses for a norm window
/// `[min(alpha, beta), max(alpha, beta)]`:
///
/// - D1: `f_i(t, u) >= (rho alpha)^(p-1) psi_i(t)` on the window
///   `t in [1/4, 3/4]` for `u_j in [0, alpha]` (j != i),
///   `u_i in [rho alpha, alpha]`, plus `inf gamma_{psi_i} >= 1`;
/// - D2: `f_i(t, u) <= beta^(p-1) varphi_i(t)` on `[0, 1]` for
///   `0 < u_j <= beta`, plus the unit bound
///   `\int_0^1 1/p(s) phi^{-1}( 1/q(s) \int_0^1 varphi_i ) ds <= 1`.
///
/// The `u` boxes are sampled at their corners plus random interior points;
/// the open end at `u_j = 0` is sampled down to `1e-9`. A passing report
/// is sampled evidence, not a proof. Comparisons carry a `1e-9` relative
/// slack because the natural choices of `psi` and `varphi` sit exactly at
/// equality.
pub fn check_d1_d2(
    spec: &ProblemSpec,
    alpha: f64,
    beta: f64,
    psi: &[ExprAst],
    varphi: &[ExprAst],
    options: &AnalysisOptions,
) -> Result<BoundReport> {
    if !(alpha > 0.0) || !(beta > 0.0) {
        return Err(Error::InvalidInput(
            "alpha and beta must be positive".into(),
        ));
    }
    if alpha == beta {
        return Err(Error::InvalidInput("alpha and beta must differ".into()));
    }
    let n = spec.component_count();
    if psi.len() != n || varphi.len() != n {
        return Err(Error::InvalidInput(format!(
            "expected {n} psi and varphi expressions, got {} and {}",
            psi.len(),
            varphi.len()
        )));
    }
    let rho = compute_rho_on(spec, options.grid_n)?.rho();
    let pexp = spec.phi_exponent();
    let mut rng = StdRng::seed_from_u64(options.seed);
    let mut checks = Vec::new();
    let mut d1_all = true;
    let mut d2_all = true;

    const T_SAMPLES: usize = 33;
    for i in 0..n {
        // --- D1: lower bound over the window box ---
        let scale = (rho * alpha).powf(pexp - 1.0);
        let mut witness: Option<String> = None;
        'd1: for jt in 0..=T_SAMPLES {
            let t = WINDOW.0 + (WINDOW.1 - WINDOW.0) * jt as f64 / T_SAMPLES as f64;
            let psi_t = psi[i].evaluate(t, &[])?;
            if psi_t <= 0.0 {
                witness = Some(format!("psi{}({t}) = {psi_t} is not positive", i + 1));
                break 'd1;
            }
            let bound = scale * psi_t;
            let slack = EQUALITY_SLACK * (1.0 + bound.abs());
            for u in d1_box_samples(n, i, alpha, rho, options.box_samples, &mut rng) {
                let f = spec.forcing(i, t, &u)?;
                if f < bound - slack {
                    witness = Some(format!("f{}({t}, {u:?}) = {f} < required {bound}", i + 1));
                    break 'd1;
                }
            }
        }
        let pointwise_ok = witness.is_none();
        checks.push(ConditionCheck {
            name: format!("D1.bound[{}]", i + 1),
            passed: pointwise_ok,
            witness,
        });

        let psi_i = &psi[i];
        let gamma_psi = GammaEvaluator::new(spec, |t| Ok(psi_i.evaluate(t, &[])?), options.grid_n)?;
        let (gamma_min, gamma_argmin) = gamma_psi.minimize()?;
        let gamma_ok = gamma_min >= 1.0 - EQUALITY_SLACK;
        checks.push(ConditionCheck {
            name: format!("D1.gamma[{}]", i + 1),
            passed: gamma_ok,
            witness: (!gamma_ok)
                .then(|| format!("inf gamma_psi = {gamma_min} at t = {gamma_argmin}, need >= 1")),
        });
        d1_all &= pointwise_ok && gamma_ok;

        // --- D2: upper bound over the full box ---
        let scale2 = beta.powf(pexp - 1.0);
        let mut witness2: Option<String> = None;
        'd2: for jt in 0..=(2 * T_SAMPLES) {
            let t = jt as f64 / (2 * T_SAMPLES) as f64;
            let var_t = varphi[i].evaluate(t, &[])?;
            if var_t <= 0.0 {
                witness2 = Some(format!("varphi{}({t}) = {var_t} is not positive", i + 1));
                break 'd2;
            }
            let bound = scale2 * var_t;
            let slack = EQUALITY_SLACK * (1.0 + bound.abs());
            for u in d2_box_samples(n, beta, options.box_samples, &mut rng) {
                let f = spec.forcing(i, t, &u)?;
                if f > bound + slack {
                    witness2 = Some(format!("f{}({t}, {u:?}) = {f} > allowed {bound}", i + 1));
                    break 'd2;
                }
            }
        }
        let pointwise2_ok = witness2.is_none();
        checks.push(ConditionCheck {
            name: format!("D2.bound[{}]", i + 1),
            passed: pointwise2_ok,
            witness: witness2,
        });

        let var_mass = integrate(|t| varphi[i].evaluate(t, &[]), 0.0, 1.0, options.grid_n)?;
        let unit = integrate(
            |s| -> Result<f64> {
                let p_s = positive_weight(spec, "p", s)?;
                let q_s = positive_weight(spec, "q", s)?;
                Ok(phi_inv(var_mass / q_s, pexp) / p_s)
            },
            0.0,
            1.0,
            options.grid_n,
        )?;
        let unit_ok = unit <= 1.0 + EQUALITY_SLACK;
        checks.push(ConditionCheck {
            name: format!("D2.unit[{}]", i + 1),
            passed: unit_ok,
            witness: (!unit_ok).then(|| format!("integral bound = {unit}, need <= 1")),
        });
        d2_all &= pointwise2_ok && unit_ok;
    }

    Ok(BoundReport {
        d1_all,
        d2_all,
        rho,
        checks,
    })
}

/// Corner points of the D1 box plus random interior samples:
/// `u_j in [0, alpha]` for `j != i`, `u_i in [rho alpha, alpha]`.
fn d1_box_samples(
    n: usize,
    i: usize,
    alpha: f64,
    rho: f64,
    extra: usize,
    rng: &mut StdRng,
) -> Vec<Vec<f64>> {
    let mut samples = Vec::new();
    for mask in 0..(1usize << n) {
        let u: Vec<f64> = (0..n)
            .map(|j| {
                let high = mask & (1 << j) != 0;
                if j == i {
                    if high {
                        alpha
                    } else {
                        rho * alpha
                    }
                } else if high {
                    alpha
                } else {
                    0.0
                }
            })
            .collect();
        samples.push(u);
    }
    for _ in 0..extra {
        let u: Vec<f64> = (0..n)
            .map(|j| {
                if j == i {
                    rho * alpha + (alpha - rho * alpha) * rng.random::<f64>()
                } else {
                    alpha * rng.random::<f64>()
                }
            })
            .collect();
        samples.push(u);
    }
    samples
}

/// Corner points of the D2 box plus random interior samples:
/// `u_j in (0, beta]`, sampled down to `1e-9` at the open end.
fn d2_box_samples(n: usize, beta: f64, extra: usize, rng: &mut StdRng) -> Vec<Vec<f64>> {
    let floor = 1e-9_f64.min(0.5 * beta);
    let mut samples = Vec::new();
    for mask in 0..(1usize << n) {
        let u: Vec<f64> = (0..n)
            .map(|j| if mask & (1 << j) != 0 { beta } else { floor })
            .collect();
        samples.push(u);
    }
    for _ in 0..extra {
        let u: Vec<f64> = (0..n).map(|_| beta * (1.0 - rng.random::<f64>())).collect();
        samples.push(u);
    }
    samples
}

// ---------------------------------------------------------------------------
// Lambda sweeps
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub lambda: f64,
    pub converged: bool,
    pub positive: bool,
    pub norm: f64,
    pub r_fp: f64,
    pub r_ode: f64,
    pub sigma: Vec<f64>,
    pub iterations: usize,
    pub method: Method,
}

#[derive(Debug, Clone)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    pub truncated_low: bool,
    pub truncated_high: bool,
    pub lambda_floor: f64,
    pub lambda_cap: f64,
}

impl SweepReport {
    pub fn all_converged(&self) -> bool {
        !self.rows.is_empty() && self.rows.iter().all(|r| r.converged)
    }
}

/// Solves the lambda-scaled system at log-spaced points of `interval`,
/// truncating an infinite (or zero) end to the configured cap (floor).
/// Per-point failures are recorded in their rows, not raised.
pub fn lambda_sweep(
    spec: &ProblemSpec,
    interval: (f64, f64),
    points: usize,
    solver_config: &SolverConfig,
    options: &AnalysisOptions,
) -> Result<SweepReport> {
    separable_parts(spec)?;
    if points == 0 {
        return Err(Error::InvalidInput("sweep needs at least one point".into()));
    }
    let (raw_lo, raw_hi) = interval;
    let mut report = SweepReport {
        rows: Vec::new(),
        truncated_low: false,
        truncated_high: false,
        lambda_floor: options.lambda_floor,
        lambda_cap: options.lambda_cap,
    };
    if raw_lo > raw_hi || raw_hi <= 0.0 {
        return Ok(report); // empty interval: an empty report is the answer
    }
    let mut lo = raw_lo;
    let mut hi = raw_hi;
    if lo < options.lambda_floor {
        lo = options.lambda_floor;
        report.truncated_low = true;
    }
    if hi > options.lambda_cap || hi.is_infinite() {
        hi = options.lambda_cap;
        report.truncated_high = true;
    }
    if lo > hi {
        return Ok(report);
    }

    let lambdas: Vec<f64> = if points == 1 || lo == hi {
        vec![(lo * hi).sqrt()]
    } else {
        let ratio = hi / lo;
        (0..points)
            .map(|k| lo * ratio.powf(k as f64 / (points - 1) as f64))
            .collect()
    };

    for lambda in lambdas {
        let scaled = spec.with_lambda(lambda)?;
        let bundle = solve_auto(&scaled, solver_config)?;
        report.rows.push(row_from_bundle(lambda, &bundle));
    }
    Ok(report)
}

fn row_from_bundle(lambda: f64, bundle: &SolutionBundle) -> SweepRow {
    SweepRow {
        lambda,
        converged: bundle.converged,
        positive: bundle.is_positive_solution(),
        norm: bundle.norm,
        r_fp: bundle.r_fp,
        r_ode: bundle.r_ode,
        sigma: bundle.sigma.clone(),
        iterations: bundle.iterations,
        method: bundle.method,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use approx::assert_abs_diff_eq;

    fn separable(h: &str, g: &str, pexp: f64) -> ProblemSpec {
        ProblemSpec::separable(
            1,
            pexp,
            parse("1").unwrap(),
            parse("1").unwrap(),
            vec![parse(h).unwrap()],
            vec![parse(g).unwrap()],
            1.0,
        )
        .unwrap()
    }

    fn small_options() -> AnalysisOptions {
        AnalysisOptions {
            grid_n: 128,
            ..AnalysisOptions::default()
        }
    }

    #[test]
    fn gamma_of_zero_coefficient_vanishes() {
        let spec = separable("1", "u1", 2.0);
        let v = gamma(&spec, |_| Ok(0.0), 0.5).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn gamma_closed_form_unit_data() {
        // p = 2, unit weights, a = 1, rho = 1/4:
        // gamma(t) = (1/16) [ (t - 1/4)^2 + (3/4 - t)^2 ].
        let spec = separable("1", "u1", 2.0);
        for t in [0.25, 0.4, 0.5, 0.75] {
            let expect = ((t - 0.25f64).powi(2) + (0.75 - t).powi(2)) / 16.0;
            let v = gamma(&spec, |_| Ok(1.0), t).unwrap();
            assert_abs_diff_eq!(v, expect, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(
            gamma(&spec, |_| Ok(1.0), 0.5).unwrap(),
            1.0 / 128.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            gamma(&spec, |_| Ok(1.0), 0.25).unwrap(),
            1.0 / 64.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn gamma_rejects_t_outside_window() {
        let spec = separable("1", "u1", 2.0);
        assert!(gamma(&spec, |_| Ok(1.0), 0.1).is_err());
        assert!(gamma(&spec, |_| Ok(1.0), 0.9).is_err());
    }

    #[test]
    fn gamma_scales_with_phi_power_of_coefficient() {
        // Replacing a by c^(p-1) a multiplies gamma by c.
        for (pexp, c) in [(2.0f64, 5.0f64), (3.0, 0.3)] {
            let spec = separable("1", "u1", pexp);
            let factor = c.powf(pexp - 1.0);
            for t in [0.3, 0.5, 0.6] {
                let base = gamma(&spec, |_| Ok(2.0), t).unwrap();
                let scaled = gamma(&spec, |_| Ok(2.0 * factor), t).unwrap();
                assert_abs_diff_eq!(scaled, c * base, epsilon = 1e-10 * (c * base).abs());
            }
        }
    }

    #[test]
    fn coefficient_a_unit_cases() {
        let spec = separable("1", "u1", 2.0);
        assert_abs_diff_eq!(compute_a(&spec, 0, 128).unwrap(), 1.0, epsilon = 1e-13);
        let spec3 = separable("1", "u1", 3.0);
        assert_abs_diff_eq!(compute_a(&spec3, 0, 128).unwrap(), 1.0, epsilon = 1e-13);
        let zero = separable("0", "u1", 2.0);
        assert_eq!(compute_a(&zero, 0, 128).unwrap(), 0.0);
    }

    #[test]
    fn coefficient_b_matches_closed_form() {
        let spec = separable("1", "u1", 2.0);
        let (b, argmin) = compute_b(&spec, 0, 512).unwrap();
        assert_abs_diff_eq!(b, 1.0 / 128.0, epsilon = 1e-8);
        assert_abs_diff_eq!(argmin, 0.5, epsilon = 1e-6);
    }

    #[test]
    fn coefficient_b_agrees_with_brute_force_scan() {
        for h in ["1 + t", "max(0, 0.25 - t)", "t*(1-t)", "2 + sin(6*t)"] {
            let spec = separable(h, "u1", 2.0);
            let hi = parse(h).unwrap();
            let evaluator = GammaEvaluator::new(&spec, |t| Ok(hi.evaluate(t, &[])?), 256).unwrap();
            let (b, _) = evaluator.minimize().unwrap();
            let mut brute = f64::INFINITY;
            for j in 0..=10_000 {
                let t = 0.25 + 0.5 * j as f64 / 10_000.0;
                brute = brute.min(evaluator.eval(t).unwrap());
            }
            assert_abs_diff_eq!(b, brute, epsilon = 1e-8 * (1.0 + brute.abs()));
            assert!(b <= brute + 1e-14);
        }
    }

    #[test]
    fn limit_estimation_superlinear_quadratic() {
        let spec = separable("1", "u1^2", 2.0);
        let mut rng = StdRng::seed_from_u64(7);
        let (g0, ginf) = estimate_g_limits(&spec, 0, &default_magnitudes(), 12, &mut rng).unwrap();
        assert_eq!(g0.class, LimitClass::Vanishing);
        assert_eq!(g0.value, 0.0);
        assert_eq!(ginf.class, LimitClass::Diverging);
        assert!(ginf.value.is_infinite());
    }

    #[test]
    fn limit_estimation_linear_growth() {
        let spec = separable("1", "3*u1", 2.0);
        let mut rng = StdRng::seed_from_u64(7);
        let (g0, ginf) = estimate_g_limits(&spec, 0, &default_magnitudes(), 12, &mut rng).unwrap();
        assert_eq!(g0.class, LimitClass::Finite);
        assert_abs_diff_eq!(g0.value, 3.0, epsilon = 1e-9);
        assert_eq!(ginf.class, LimitClass::Finite);
        assert_abs_diff_eq!(ginf.value, 3.0, epsilon = 1e-9);
    }

    #[test]
    fn limit_estimation_matches_phi_power() {
        // p = 3: phi(s) = s^2, so g(u) = u^2 has ratio exactly 1 both ways.
        let spec = separable("1", "u1^2", 3.0);
        let mut rng = StdRng::seed_from_u64(7);
        let (g0, ginf) = estimate_g_limits(&spec, 0, &default_magnitudes(), 12, &mut rng).unwrap();
        assert_eq!(g0.class, LimitClass::Finite);
        assert_abs_diff_eq!(g0.value, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ginf.value, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn superlinear_interval_is_unrestricted() {
        let spec = separable("1", "u1^2", 2.0);
        let report =
            eigenvalue_intervals(&spec, &LimitOverrides::default(), &small_options()).unwrap();
        assert_eq!(report.interval_s, Some((0.0, f64::INFINITY)));
        assert!(report.corollary_i);
        assert!(report.lambda_unrestricted);
        assert!(report.h1_all);
        assert!(!report.h2_all);
    }

    #[test]
    fn constant_g_triggers_the_twin_interval() {
        // g = 1: the ratio 1/phi(s) diverges at zero and vanishes at
        // infinity, which is the swapped-roles pattern: interval_t is
        // (0, inf) and the all-components flag for it holds.
        let spec = separable("1", "1", 2.0);
        let report =
            eigenvalue_intervals(&spec, &LimitOverrides::default(), &small_options()).unwrap();
        assert_eq!(report.interval_t, Some((0.0, f64::INFINITY)));
        assert_eq!(report.interval_s, None);
        assert!(report.corollary_ii);
        assert!(!report.corollary_i);
        assert!(report.h2_all);
        assert!(report.lambda_unrestricted);
    }

    #[test]
    fn declared_limits_override_estimates() {
        // g0 = 1/2, ginf = inf on unit weights: interval ( 0, 2 ).
        let spec = separable("1", "u1^2", 2.0);
        let overrides = LimitOverrides {
            g0: Some(vec![0.5]),
            ginf: Some(vec![f64::INFINITY]),
        };
        let report = eigenvalue_intervals(&spec, &overrides, &small_options()).unwrap();
        let (lo, hi) = report.interval_s.expect("interval must be nonempty");
        assert_eq!(lo, 0.0);
        assert_abs_diff_eq!(hi, 2.0, epsilon = 1e-10);
        assert_eq!(report.components[0].g0.source, LimitSource::Declared);
    }

    #[test]
    fn finite_equal_limits_make_empty_interval() {
        // g0 = ginf = 1 with A = 1, B = 1/128: requires 128 < 1, empty.
        let spec = separable("1", "3*u1", 2.0);
        let overrides = LimitOverrides {
            g0: Some(vec![1.0]),
            ginf: Some(vec![1.0]),
        };
        let report = eigenvalue_intervals(&spec, &overrides, &small_options()).unwrap();
        assert_eq!(report.interval_s, None);
        assert_eq!(report.interval_t, None);
    }

    #[test]
    fn enlarging_declared_g0_never_widens_the_interval() {
        let spec = separable("1", "u1^2", 2.0);
        let mut prev_width = f64::INFINITY;
        for g0 in [0.0, 0.25, 1.0, 4.0] {
            let overrides = LimitOverrides {
                g0: Some(vec![g0]),
                ginf: Some(vec![f64::INFINITY]),
            };
            let report = eigenvalue_intervals(&spec, &overrides, &small_options()).unwrap();
            let width = match report.interval_s {
                Some((lo, hi)) => hi - lo,
                None => 0.0,
            };
            assert!(width <= prev_width + 1e-12, "width grew at g0 = {g0}");
            prev_width = width;
        }
    }

    #[test]
    fn growth_conditions_spec_examples() {
        let spec = separable("1", "u1^2", 2.0);
        let opts = small_options();
        // Superlinear: h1 holds (0 < 1, inf > 128).
        let report = check_h1_h2(&spec, &[(0.0, f64::INFINITY)], &opts).unwrap();
        assert!(report.h1_all);
        assert!(!report.h2_all);
        // Linear growth 3u: neither direction.
        let report = check_h1_h2(&spec, &[(3.0, 3.0)], &opts).unwrap();
        assert!(!report.h1_all);
        assert!(!report.h2_all);
        // Declared extremes: h2 holds.
        let report = check_h1_h2(&spec, &[(f64::INFINITY, 0.0)], &opts).unwrap();
        assert!(report.h2_all);
        assert!(!report.h1_all);
    }

    #[test]
    fn bound_hypotheses_pass_at_the_equality_construction() {
        // Constant forcing f = 8 via h = 8, g = 1. With unit weights and
        // p = 2: B = 8/128 = 1/16, A = 8, so psi = 128, varphi = 1.
        // alpha = 1/4 puts the lower bound exactly at equality, beta = 8
        // the upper one.
        let spec = separable("8", "1", 2.0);
        let opts = small_options();
        let psi = vec![parse("128").unwrap()];
        let varphi = vec![parse("1").unwrap()];
        let report = check_d1_d2(&spec, 0.25, 8.0, &psi, &varphi, &opts).unwrap();
        assert!(report.d1_all, "{:#?}", report.checks);
        assert!(report.d2_all, "{:#?}", report.checks);
    }

    #[test]
    fn undersized_varphi_fails_with_witness() {
        let spec = separable("8", "1", 2.0);
        let opts = small_options();
        let psi = vec![parse("128").unwrap()];
        let varphi = vec![parse("0.5").unwrap()];
        let report = check_d1_d2(&spec, 0.25, 8.0, &psi, &varphi, &opts).unwrap();
        assert!(!report.d2_all);
        let failing = report
            .checks
            .iter()
            .find(|c| c.name.starts_with("D2.bound") && !c.passed)
            .expect("expected a D2 bound failure");
        assert!(failing.witness.is_some());
    }

    #[test]
    fn equal_alpha_beta_rejected() {
        let spec = separable("8", "1", 2.0);
        let opts = small_options();
        let psi = vec![parse("128").unwrap()];
        let varphi = vec![parse("1").unwrap()];
        assert!(check_d1_d2(&spec, 1.0, 1.0, &psi, &varphi, &opts).is_err());
    }

    #[test]
    fn psi_construction_hits_unit_infimum() {
        // psi = (1/B)^(p-1) h makes inf gamma_psi = 1 exactly.
        for (h, pexp) in [("1", 2.0), ("1 + t", 2.0), ("1", 3.0)] {
            let spec = separable(h, "u1", pexp);
            let (b, _) = compute_b(&spec, 0, 256).unwrap();
            let factor = (1.0 / b).powf(pexp - 1.0);
            let h_ast = parse(h).unwrap();
            let evaluator =
                GammaEvaluator::new(&spec, |t| Ok(factor * h_ast.evaluate(t, &[])?), 256).unwrap();
            let (min, _) = evaluator.minimize().unwrap();
            assert_abs_diff_eq!(min, 1.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn sweep_solves_each_point_and_respects_truncation() {
        let spec = separable("1", "u1^2", 2.0);
        let config = SolverConfig::default().with_grid(64);
        let opts = small_options();
        let report = lambda_sweep(&spec, (0.1, 10.0), 3, &config, &opts).unwrap();
        assert_eq!(report.rows.len(), 3);
        assert!(report.all_converged(), "{:?}", report.rows);
        assert!(report.rows.iter().all(|r| r.positive));
        assert_abs_diff_eq!(report.rows[0].lambda, 0.1, epsilon = 1e-12);
        assert_abs_diff_eq!(report.rows[1].lambda, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(report.rows[2].lambda, 10.0, epsilon = 1e-12);
        assert!(!report.truncated_low && !report.truncated_high);

        let truncated = lambda_sweep(&spec, (0.0, f64::INFINITY), 1, &config, &opts).unwrap();
        assert!(truncated.truncated_low && truncated.truncated_high);
    }

    #[test]
    fn empty_interval_gives_empty_report() {
        let spec = separable("1", "u1^2", 2.0);
        let config = SolverConfig::default().with_grid(64);
        let report = lambda_sweep(&spec, (5.0, 1.0), 3, &config, &small_options()).unwrap();
        assert!(report.rows.is_empty());
    }

    #[test]
    fn single_point_sweep_reproduces_plain_solve() {
        let spec = separable("1", "sqrt(u1) + 1", 2.0);
        let config = SolverConfig::default().with_grid(64);
        let report = lambda_sweep(&spec, (1.0, 1.0), 1, &config, &small_options()).unwrap();
        assert_eq!(report.rows.len(), 1);
        let direct = solve_auto(&spec, &config).unwrap();
        assert_abs_diff_eq!(report.rows[0].norm, direct.norm, epsilon = 1e-12);
    }

    #[test]
    fn general_specs_are_rejected_by_separable_analyses() {
        let spec = ProblemSpec::general(
            1,
            2.0,
            parse("1").unwrap(),
            parse("1").unwrap(),
            vec![parse("8").unwrap()],
        )
        .unwrap();
        assert!(compute_a(&spec, 0, 128).is_err());
        assert!(compute_b(&spec, 0, 128).is_err());
        let mut rng = StdRng::seed_from_u64(1);
        assert!(estimate_g_limits(&spec, 0, &default_magnitudes(), 12, &mut rng).is_err());
    }
}
