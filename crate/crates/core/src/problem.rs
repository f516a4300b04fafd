//! Problem descriptions for the boundary value system, sampled hypothesis
//! validation, lambda scaling, and the radial annulus reduction.
//!
//! A [`ProblemSpec`] describes the system
//!
//! ```text
//! (q(t) phi(p(t) u_i'(t)))' + f_i(t, u) = 0,   u(0) = u(1) = 0,
//! ```
//!
//! where the forcing is either general (`f_i(t, u)`) or separable
//! (`lambda * h_i(t) * g_i(u)`). The standing structural assumptions are
//! checked by [`validate`] on finite sample sets:
//!
//! - H1: each general `f_i` is strictly positive on `[0,1] x R+^n`;
//! - H2: `p`, `q` are positive and `q` is nondecreasing on `[0,1]`;
//! - H3: each `g_i` is nonnegative with `g_i(u) > 0` for `||u|| > 0`;
//! - H4: each `h_i` is nonnegative and not identically zero on any
//!   subinterval.
//!
//! These are statements about continuous functions; the checks here sample
//! them on finite grids and the reports say so. A passing report is
//! evidence, not proof.

use crate::error::{Error, Result};
use crate::expr::{self, ExprAst};
use serde::{Deserialize, Serialize};

/// Largest supported component count.
pub const MAX_COMPONENTS: usize = expr::MAX_COMPONENTS;

/// Default magnitude grid for sampling the `u` domain: log-spaced decades
/// spanning `10^-3 ..= 10^3`.
pub fn default_u_magnitudes() -> Vec<f64> {
    (-3..=3).map(|k| 10f64.powi(k)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub enum Nonlinearity {
    /// Forcing given directly as `f_i(t, u)`.
    General { f: Vec<ExprAst> },
    /// Forcing `lambda * h_i(t) * g_i(u)`.
    Separable { h: Vec<ExprAst>, g: Vec<ExprAst> },
}

/// Full description of the boundary value system.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    n: usize,
    phi_exponent: f64,
    weight_p: ExprAst,
    weight_q: ExprAst,
    nonlinearity: Nonlinearity,
    lambda: f64,
}

impl ProblemSpec {
    /// System with a general forcing `f_i(t, u)`.
    pub fn general(
        n: usize,
        phi_exponent: f64,
        weight_p: ExprAst,
        weight_q: ExprAst,
        f: Vec<ExprAst>,
    ) -> Result<Self> {
        let spec = ProblemSpec {
            n,
            phi_exponent,
            weight_p,
            weight_q,
            nonlinearity: Nonlinearity::General { f },
            lambda: 1.0,
        };
        spec.check_shape()?;
        Ok(spec)
    }

    /// System with separable forcing `lambda * h_i(t) * g_i(u)`.
    pub fn separable(
        n: usize,
        phi_exponent: f64,
        weight_p: ExprAst,
        weight_q: ExprAst,
        h: Vec<ExprAst>,
        g: Vec<ExprAst>,
        lambda: f64,
    ) -> Result<Self> {
        let spec = ProblemSpec {
            n,
            phi_exponent,
            weight_p,
            weight_q,
            nonlinearity: Nonlinearity::Separable { h, g },
            lambda,
        };
        spec.check_shape()?;
        Ok(spec)
    }

    fn check_shape(&self) -> Result<()> {
        if self.n == 0 || self.n > MAX_COMPONENTS {
            return Err(Error::InvalidInput(format!(
                "component count must be in 1..={MAX_COMPONENTS}, got {}",
                self.n
            )));
        }
        if !(self.phi_exponent > 1.0) || !self.phi_exponent.is_finite() {
            return Err(Error::InvalidInput(format!(
                "phi exponent must be a finite real > 1, got {}",
                self.phi_exponent
            )));
        }
        if !self.lambda.is_finite() || self.lambda < 0.0 {
            return Err(Error::InvalidInput(format!(
                "lambda must be a finite real >= 0, got {}",
                self.lambda
            )));
        }
        for (name, w) in [("p", &self.weight_p), ("q", &self.weight_q)] {
            if w.max_component().is_some() {
                return Err(Error::InvalidInput(format!(
                    "weight {name}(t) must depend on t only"
                )));
            }
        }
        match &self.nonlinearity {
            Nonlinearity::General { f } => {
                if f.len() != self.n {
                    return Err(Error::InvalidInput(format!(
                        "expected {} forcing expressions, got {}",
                        self.n,
                        f.len()
                    )));
                }
                if self.lambda != 1.0 {
                    return Err(Error::InvalidInput(
                        "lambda scaling is defined for the separable form only; \
                         fold the factor into f instead"
                            .into(),
                    ));
                }
                for (i, fi) in f.iter().enumerate() {
                    check_component_range(fi, self.n, &format!("f{}", i + 1))?;
                }
            }
            Nonlinearity::Separable { h, g } => {
                if h.len() != self.n || g.len() != self.n {
                    return Err(Error::InvalidInput(format!(
                        "expected {} h and g expressions, got {} and {}",
                        self.n,
                        h.len(),
                        g.len()
                    )));
                }
                for (i, hi) in h.iter().enumerate() {
                    if hi.max_component().is_some() {
                        return Err(Error::InvalidInput(format!(
                            "h{}(t) must depend on t only",
                            i + 1
                        )));
                    }
                }
                for (i, gi) in g.iter().enumerate() {
                    if gi.uses_time() {
                        return Err(Error::InvalidInput(format!(
                            "g{}(u) must not depend on t",
                            i + 1
                        )));
                    }
                    check_component_range(gi, self.n, &format!("g{}", i + 1))?;
                }
            }
        }
        Ok(())
    }

    pub fn component_count(&self) -> usize {
        self.n
    }

    pub fn phi_exponent(&self) -> f64 {
        self.phi_exponent
    }

    pub fn weight_p(&self) -> &ExprAst {
        &self.weight_p
    }

    pub fn weight_q(&self) -> &ExprAst {
        &self.weight_q
    }

    pub fn nonlinearity(&self) -> &Nonlinearity {
        &self.nonlinearity
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn is_separable(&self) -> bool {
        matches!(self.nonlinearity, Nonlinearity::Separable { .. })
    }

    /// Effective forcing value `f_i(t, u)` (with the lambda factor applied
    /// in the separable case). `i` is zero-based.
    pub fn forcing(&self, i: usize, t: f64, u: &[f64]) -> Result<f64> {
        match &self.nonlinearity {
            Nonlinearity::General { f } => Ok(f[i].evaluate(t, u)?),
            Nonlinearity::Separable { h, g } => {
                Ok(self.lambda * h[i].evaluate(t, &[])? * g[i].evaluate(t, u)?)
            }
        }
    }

    /// Multiplies the separable forcing by `lambda`; the receiver is left
    /// untouched.
    pub fn scale_by_lambda(&self, lambda: f64) -> Result<ProblemSpec> {
        if !self.is_separable() {
            return Err(Error::InvalidInput(
                "lambda scaling requires the separable form h_i(t) * g_i(u)".into(),
            ));
        }
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidInput(format!(
                "lambda factor must be a finite real > 0, got {lambda}"
            )));
        }
        let mut scaled = self.clone();
        scaled.lambda = self.lambda * lambda;
        Ok(scaled)
    }

    /// Replaces the lambda multiplier outright (separable only).
    pub fn with_lambda(&self, lambda: f64) -> Result<ProblemSpec> {
        if !self.is_separable() {
            return Err(Error::InvalidInput(
                "lambda is defined for the separable form only".into(),
            ));
        }
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidInput(format!(
                "lambda must be a finite real >= 0, got {lambda}"
            )));
        }
        let mut out = self.clone();
        out.lambda = lambda;
        Ok(out)
    }
}

fn check_component_range(ast: &ExprAst, n: usize, name: &str) -> Result<()> {
    if let Some(max) = ast.max_component() {
        if max >= n {
            return Err(Error::InvalidInput(format!(
                "{name} references u{} but the system has {n} component(s)",
                max + 1
            )));
        }
    }
    Ok(())
}

/// Radial elliptic system on an annulus `R1 < |x| < R2` in dimension
/// `dim >= 2`, with forcing `k_i(r) * g_i(u)` and zero boundary data on
/// both spheres. Within the `k_i` expressions, `t` stands for the radius.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialSpec {
    pub n: usize,
    pub phi_exponent: f64,
    pub dim: u32,
    pub r1: f64,
    pub r2: f64,
    pub k: Vec<ExprAst>,
    pub g: Vec<ExprAst>,
}

impl RadialSpec {
    pub fn new(
        n: usize,
        phi_exponent: f64,
        dim: u32,
        r1: f64,
        r2: f64,
        k: Vec<ExprAst>,
        g: Vec<ExprAst>,
    ) -> Result<Self> {
        let spec = RadialSpec {
            n,
            phi_exponent,
            dim,
            r1,
            r2,
            k,
            g,
        };
        spec.check_shape()?;
        Ok(spec)
    }

    fn check_shape(&self) -> Result<()> {
        if self.n == 0 || self.n > MAX_COMPONENTS {
            return Err(Error::InvalidInput(format!(
                "component count must be in 1..={MAX_COMPONENTS}, got {}",
                self.n
            )));
        }
        if !(self.phi_exponent > 1.0) || !self.phi_exponent.is_finite() {
            return Err(Error::InvalidInput(format!(
                "phi exponent must be a finite real > 1, got {}",
                self.phi_exponent
            )));
        }
        if self.dim < 2 {
            return Err(Error::InvalidInput(format!(
                "space dimension must be >= 2, got {}",
                self.dim
            )));
        }
        if !(self.r1 > 0.0 && self.r2 > self.r1) || !self.r2.is_finite() {
            return Err(Error::InvalidInput(format!(
                "radii must satisfy 0 < R1 < R2 < infinity, got R1 = {}, R2 = {}",
                self.r1, self.r2
            )));
        }
        if self.k.len() != self.n || self.g.len() != self.n {
            return Err(Error::InvalidInput(format!(
                "expected {} k and g expressions, got {} and {}",
                self.n,
                self.k.len(),
                self.g.len()
            )));
        }
        for (i, ki) in self.k.iter().enumerate() {
            if ki.max_component().is_some() {
                return Err(Error::InvalidInput(format!(
                    "k{}(r) must depend on the radius only",
                    i + 1
                )));
            }
        }
        for (i, gi) in self.g.iter().enumerate() {
            if gi.uses_time() {
                return Err(Error::InvalidInput(format!(
                    "g{}(u) must not depend on t",
                    i + 1
                )));
            }
            check_component_range(gi, self.n, &format!("g{}", i + 1))?;
        }
        Ok(())
    }
}

/// Transforms the radial annulus system to the unit-interval system via
/// `r = (R2 - R1) t + R1`.
///
/// The substitution yields a separable problem with
///
/// ```text
/// q(t) = ((R2 - R1) t + R1)^(dim - 1),
/// p(t) = 1 / (R2 - R1)            (the chain-rule factor dt/dr),
/// h_i(t) = (R2 - R1) * ((R2 - R1) t + R1)^(dim - 1) * k_i((R2 - R1) t + R1),
/// ```
///
/// and the `g_i` carried over unchanged. The boundary data on the two
/// spheres becomes `u(0) = u(1) = 0`.
pub fn radial_to_bvp(rspec: &RadialSpec) -> Result<ProblemSpec> {
    rspec.check_shape()?;
    let dr = rspec.r2 - rspec.r1;
    let radius = affine_time(dr, rspec.r1);
    let q_ast = pow_expr(radius.clone(), (rspec.dim - 1) as f64);
    let p_ast = ExprAst::constant(1.0 / dr);
    let h: Vec<ExprAst> = rspec
        .k
        .iter()
        .map(|ki| {
            mul_expr(
                mul_expr(ExprAst::constant(dr), q_ast.clone()),
                ki.substitute_time(&radius),
            )
        })
        .collect();
    ProblemSpec::separable(
        rspec.n,
        rspec.phi_exponent,
        p_ast,
        q_ast,
        h,
        rspec.g.clone(),
        1.0,
    )
}

// AST builders with light simplification so emitted expressions stay
// readable (`1*x`, `x^1` and friends are folded away).

fn affine_time(slope: f64, offset: f64) -> ExprAst {
    use crate::expr::{BinaryOp, ExprKind, Span};
    let t = ExprAst {
        kind: ExprKind::Time,
        span: Span { start: 0, end: 0 },
    };
    let scaled = mul_expr(ExprAst::constant(slope), t);
    if offset == 0.0 {
        return scaled;
    }
    ExprAst {
        kind: ExprKind::Binary(
            BinaryOp::Add,
            Box::new(scaled),
            Box::new(ExprAst::constant(offset)),
        ),
        span: Span { start: 0, end: 0 },
    }
}

fn mul_expr(lhs: ExprAst, rhs: ExprAst) -> ExprAst {
    use crate::expr::{BinaryOp, ExprKind, Span};
    if matches!(lhs.kind, ExprKind::Constant(c) if c == 1.0) {
        return rhs;
    }
    if matches!(rhs.kind, ExprKind::Constant(c) if c == 1.0) {
        return lhs;
    }
    ExprAst {
        kind: ExprKind::Binary(BinaryOp::Mul, Box::new(lhs), Box::new(rhs)),
        span: Span { start: 0, end: 0 },
    }
}

fn pow_expr(base: ExprAst, exponent: f64) -> ExprAst {
    use crate::expr::{BinaryOp, ExprKind, Span};
    if exponent == 1.0 {
        return base;
    }
    if exponent == 0.0 {
        return ExprAst::constant(1.0);
    }
    ExprAst {
        kind: ExprKind::Binary(
            BinaryOp::Pow,
            Box::new(base),
            Box::new(ExprAst::constant(exponent)),
        ),
        span: Span { start: 0, end: 0 },
    }
}

/// Options controlling the sampled hypothesis checks.
#[derive(Debug, Clone)]
pub struct ValidationOptions {
    /// Magnitude grid for `u` samples (log-spaced decades by default).
    pub u_magnitudes: Vec<f64>,
    /// Number of subintervals used for the H4 "not identically zero on
    /// any subinterval" check.
    pub h4_windows: usize,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        ValidationOptions {
            u_magnitudes: default_u_magnitudes(),
            h4_windows: 16,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Witness {
    pub t: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u: Option<Vec<f64>>,
    pub value: f64,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct HypothesisCheck {
    /// "H1" .. "H4".
    pub hypothesis: String,
    /// One-based component index, when the check is per-component.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub component: Option<usize>,
    pub description: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub samples: usize,
    pub checks: Vec<HypothesisCheck>,
}

impl ValidationReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &HypothesisCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Sampled validation of hypotheses H1-H4 with a uniform `samples`-point
/// time grid. Deterministic for a fixed sample count.
pub fn validate(spec: &ProblemSpec, samples: usize) -> Result<ValidationReport> {
    validate_with(spec, samples, &ValidationOptions::default())
}

pub fn validate_with(
    spec: &ProblemSpec,
    samples: usize,
    options: &ValidationOptions,
) -> Result<ValidationReport> {
    if samples < 64 {
        return Err(Error::InvalidInput(format!(
            "validation needs at least 64 samples, got {samples}"
        )));
    }
    let t_grid: Vec<f64> = (0..samples)
        .map(|j| j as f64 / (samples - 1) as f64)
        .collect();
    let mut checks = Vec::new();

    check_weight_positive(spec.weight_p(), "p", &t_grid, &mut checks)?;
    check_weight_positive(spec.weight_q(), "q", &t_grid, &mut checks)?;
    check_q_nondecreasing(spec.weight_q(), &t_grid, &mut checks)?;

    match spec.nonlinearity() {
        Nonlinearity::General { .. } => {
            let u_samples = u_sample_set(spec.component_count(), &options.u_magnitudes);
            for i in 0..spec.component_count() {
                check_forcing_positive(spec, i, &t_grid, &u_samples, &mut checks)?;
            }
        }
        Nonlinearity::Separable { h, g } => {
            let u_samples = u_sample_set(spec.component_count(), &options.u_magnitudes);
            for (i, gi) in g.iter().enumerate() {
                check_g_positive(gi, i, &u_samples, &mut checks)?;
            }
            for (i, hi) in h.iter().enumerate() {
                check_h_nonnegative(hi, i, &t_grid, &mut checks)?;
                check_h_not_identically_zero(hi, i, &t_grid, options.h4_windows, &mut checks)?;
            }
        }
    }

    Ok(ValidationReport { samples, checks })
}

fn eval_at(ast: &ExprAst, t: f64, u: &[f64]) -> Result<f64> {
    ast.evaluate(t, u).map_err(|source| Error::EvalAtSample {
        context: if u.is_empty() {
            format!("t = {t}")
        } else {
            format!("t = {t}, u = {u:?}")
        },
        source,
    })
}

fn check_weight_positive(
    w: &ExprAst,
    name: &str,
    t_grid: &[f64],
    checks: &mut Vec<HypothesisCheck>,
) -> Result<()> {
    let mut witness = None;
    for &t in t_grid {
        let v = eval_at(w, t, &[])?;
        if v <= 0.0 {
            witness = Some(Witness {
                t,
                u: None,
                value: v,
                detail: format!("{name}({t}) = {v} is not positive"),
            });
            break;
        }
    }
    checks.push(HypothesisCheck {
        hypothesis: "H2".into(),
        component: None,
        description: format!("{name}(t) > 0 on sampled [0,1]"),
        passed: witness.is_none(),
        witness,
    });
    Ok(())
}

fn check_q_nondecreasing(
    q: &ExprAst,
    t_grid: &[f64],
    checks: &mut Vec<HypothesisCheck>,
) -> Result<()> {
    let mut witness = None;
    let mut prev: Option<(f64, f64)> = None;
    for &t in t_grid {
        let v = eval_at(q, t, &[])?;
        if let Some((tp, vp)) = prev {
            // Tolerate rounding-level dips only.
            if v < vp - 1e-12 * (1.0 + vp.abs()) {
                witness = Some(Witness {
                    t,
                    u: None,
                    value: v,
                    detail: format!(
                        "q decreases between t = {tp} (q = {vp}) and t = {t} (q = {v})"
                    ),
                });
                break;
            }
        }
        prev = Some((t, v));
    }
    checks.push(HypothesisCheck {
        hypothesis: "H2".into(),
        component: None,
        description: "q(t) nondecreasing on sampled [0,1]".into(),
        passed: witness.is_none(),
        witness,
    });
    Ok(())
}

/// Sample set for the `u` domain: the origin, plus every magnitude times
/// every direction (axis directions and the all-ones direction, which is a
/// unit vector in the max norm).
fn u_sample_set(n: usize, magnitudes: &[f64]) -> Vec<Vec<f64>> {
    let mut directions: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        directions.push(e);
    }
    directions.push(vec![1.0; n]);

    let mut samples = vec![vec![0.0; n]];
    for &m in magnitudes {
        for d in &directions {
            samples.push(d.iter().map(|x| m * x).collect());
        }
    }
    samples
}

fn check_forcing_positive(
    spec: &ProblemSpec,
    i: usize,
    t_grid: &[f64],
    u_samples: &[Vec<f64>],
    checks: &mut Vec<HypothesisCheck>,
) -> Result<()> {
    let mut witness = None;
    'outer: for &t in t_grid {
        for u in u_samples {
            let v = spec.forcing(i, t, u).map_err(|e| match e {
                Error::Eval(source) => Error::EvalAtSample {
                    context: format!("t = {t}, u = {u:?}"),
                    source,
                },
                other => other,
            })?;
            if v <= 0.0 {
                witness = Some(Witness {
                    t,
                    u: Some(u.clone()),
                    value: v,
                    detail: format!("f{}({t}, {u:?}) = {v} is not positive", i + 1),
                });
                break 'outer;
            }
        }
    }
    checks.push(HypothesisCheck {
        hypothesis: "H1".into(),
        component: Some(i + 1),
        description: format!("f{}(t, u) > 0 on sampled domain", i + 1),
        passed: witness.is_none(),
        witness,
    });
    Ok(())
}

fn check_g_positive(
    g: &ExprAst,
    i: usize,
    u_samples: &[Vec<f64>],
    checks: &mut Vec<HypothesisCheck>,
) -> Result<()> {
    let mut witness = None;
    for u in u_samples {
        let v = eval_at(g, 0.0, u)?;
        let norm = u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if v < 0.0 || (norm > 0.0 && v <= 0.0) {
            witness = Some(Witness {
                t: 0.0,
                u: Some(u.clone()),
                value: v,
                detail: format!("g{}({u:?}) = {v}", i + 1),
            });
            break;
        }
    }
    checks.push(HypothesisCheck {
        hypothesis: "H3".into(),
        component: Some(i + 1),
        description: format!(
            "g{} >= 0 with g{}(u) > 0 for ||u|| > 0, sampled",
            i + 1,
            i + 1
        ),
        passed: witness.is_none(),
        witness,
    });
    Ok(())
}

fn check_h_nonnegative(
    h: &ExprAst,
    i: usize,
    t_grid: &[f64],
    checks: &mut Vec<HypothesisCheck>,
) -> Result<()> {
    let mut witness = None;
    for &t in t_grid {
        let v = eval_at(h, t, &[])?;
        if v < 0.0 {
            witness = Some(Witness {
                t,
                u: None,
                value: v,
                detail: format!("h{}({t}) = {v} is negative", i + 1),
            });
            break;
        }
    }
    checks.push(HypothesisCheck {
        hypothesis: "H4".into(),
        component: Some(i + 1),
        description: format!("h{}(t) >= 0 on sampled [0,1]", i + 1),
        passed: witness.is_none(),
        witness,
    });
    Ok(())
}

fn check_h_not_identically_zero(
    h: &ExprAst,
    i: usize,
    t_grid: &[f64],
    windows: usize,
    checks: &mut Vec<HypothesisCheck>,
) -> Result<()> {
    let windows = windows.max(1);
    let mut has_positive = vec![false; windows];
    for &t in t_grid {
        let v = eval_at(h, t, &[])?;
        if v > 0.0 {
            let w = ((t * windows as f64) as usize).min(windows - 1);
            has_positive[w] = true;
        }
    }
    let witness = has_positive.iter().position(|p| !p).map(|w| {
        let lo = w as f64 / windows as f64;
        let hi = (w + 1) as f64 / windows as f64;
        Witness {
            t: lo,
            u: None,
            value: 0.0,
            detail: format!("h{} vanishes at every sample in [{lo}, {hi}]", i + 1),
        }
    });
    checks.push(HypothesisCheck {
        hypothesis: "H4".into(),
        component: Some(i + 1),
        description: format!(
            "h{} not identically 0 on any of {windows} sampled subintervals",
            i + 1
        ),
        passed: witness.is_none(),
        witness,
    });
    Ok(())
}

// ---------------------------------------------------------------------------
// JSON problem files
// ---------------------------------------------------------------------------

/// On-disk problem description. Expressions are stored as strings in the
/// expression language; either `f` (general) or `h` + `g` (separable) must
/// be present, or a `radial` object describing an annulus problem.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub n: usize,
    pub phi_exponent: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight_p: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight_q: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radial: Option<RadialFile>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadialFile {
    #[serde(rename = "N")]
    pub dim: u32,
    #[serde(rename = "R1")]
    pub r1: f64,
    #[serde(rename = "R2")]
    pub r2: f64,
    pub k: Vec<String>,
    pub g: Vec<String>,
}

fn parse_list(texts: &[String], what: &str) -> Result<Vec<ExprAst>> {
    texts
        .iter()
        .enumerate()
        .map(|(i, s)| {
            expr::parse(s).map_err(|e| Error::InvalidInput(format!("{what}[{i}] {s:?}: {e}")))
        })
        .collect()
}

impl ProblemFile {
    pub fn is_radial(&self) -> bool {
        self.radial.is_some()
    }

    /// Parses the expression strings into a [`ProblemSpec`].
    pub fn to_spec(&self) -> Result<ProblemSpec> {
        if self.radial.is_some() {
            return Err(Error::InvalidInput(
                "this file describes a radial annulus problem; \
                 apply the radial transform first"
                    .into(),
            ));
        }
        let weight_p = match &self.weight_p {
            Some(s) => {
                expr::parse(s).map_err(|e| Error::InvalidInput(format!("weight_p {s:?}: {e}")))?
            }
            None => return Err(Error::InvalidInput("missing weight_p".into())),
        };
        let weight_q = match &self.weight_q {
            Some(s) => {
                expr::parse(s).map_err(|e| Error::InvalidInput(format!("weight_q {s:?}: {e}")))?
            }
            None => return Err(Error::InvalidInput("missing weight_q".into())),
        };
        match (&self.f, &self.h, &self.g) {
            (Some(f), None, None) => {
                if self.lambda.is_some() {
                    return Err(Error::InvalidInput(
                        "lambda applies to the separable form (h, g) only".into(),
                    ));
                }
                ProblemSpec::general(
                    self.n,
                    self.phi_exponent,
                    weight_p,
                    weight_q,
                    parse_list(f, "f")?,
                )
            }
            (None, Some(h), Some(g)) => ProblemSpec::separable(
                self.n,
                self.phi_exponent,
                weight_p,
                weight_q,
                parse_list(h, "h")?,
                parse_list(g, "g")?,
                self.lambda.unwrap_or(1.0),
            ),
            _ => Err(Error::InvalidInput(
                "provide either f (general) or both h and g (separable)".into(),
            )),
        }
    }

    /// Parses the `radial` object into a [`RadialSpec`].
    pub fn to_radial(&self) -> Result<RadialSpec> {
        let radial = self
            .radial
            .as_ref()
            .ok_or_else(|| Error::InvalidInput("this file has no radial object".into()))?;
        RadialSpec::new(
            self.n,
            self.phi_exponent,
            radial.dim,
            radial.r1,
            radial.r2,
            parse_list(&radial.k, "k")?,
            parse_list(&radial.g, "g")?,
        )
    }

    /// Renders a spec back to the on-disk form (expressions pretty-printed).
    pub fn from_spec(spec: &ProblemSpec) -> ProblemFile {
        let (f, h, g, lambda) = match spec.nonlinearity() {
            Nonlinearity::General { f } => (
                Some(f.iter().map(|e| e.to_string()).collect()),
                None,
                None,
                None,
            ),
            Nonlinearity::Separable { h, g } => (
                None,
                Some(h.iter().map(|e| e.to_string()).collect()),
                Some(g.iter().map(|e| e.to_string()).collect()),
                Some(spec.lambda()),
            ),
        };
        ProblemFile {
            n: spec.component_count(),
            phi_exponent: spec.phi_exponent(),
            weight_p: Some(spec.weight_p().to_string()),
            weight_q: Some(spec.weight_q().to_string()),
            f,
            h,
            g,
            lambda,
            radial: None,
        }
    }
}
