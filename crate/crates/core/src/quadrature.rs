//! Composite 5-point Gauss-Legendre quadrature and grid-sampled functions.
//!
//! Every integral in the operator and analysis formulas runs through the
//! fixed-order composite rule here. The rule is deliberately not adaptive:
//! with a fixed panel layout the whole pipeline is deterministic and its
//! numbers are reproducible across runs.

use crate::error::{Error, Result};

/// Minimum panel count for a [`GridFunction`].
pub const MIN_GRID_N: usize = 16;

/// 5-point Gauss-Legendre abscissae and weights on [-1, 1].
///
/// Exact values: x = 0, ±sqrt(5 - 2 sqrt(10/7))/3, ±sqrt(5 + 2 sqrt(10/7))/3;
/// w = 128/225, (322 ± 13 sqrt(70))/900.
pub(crate) const GL5: [(f64, f64); 5] = [
    (-0.906_179_845_938_664, 0.23692688505618908),
    (-0.5384693101056831, 0.47862867049936647),
    (0.0, 0.5688888888888889),
    (0.5384693101056831, 0.47862867049936647),
    (0.906_179_845_938_664, 0.23692688505618908),
];

/// A real function sampled on the uniform grid `t_j = j/N`, `j = 0..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    values: Vec<f64>,
    tag: Option<String>,
}

impl GridFunction {
    /// Wraps `values` (length N+1, N even and >= 16, all finite).
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.len() < MIN_GRID_N + 1 || !(values.len() - 1).is_multiple_of(2) {
            return Err(Error::InvalidInput(format!(
                "grid function needs N+1 values with N even and >= {MIN_GRID_N}, got {}",
                values.len()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "grid function values must be finite, got {bad}"
            )));
        }
        Ok(GridFunction { values, tag: None })
    }

    /// The zero function on an N-panel grid.
    pub fn zeros(n: usize) -> Result<Self> {
        GridFunction::from_values(vec![0.0; n + 1])
    }

    pub fn with_tag(mut self, tag: impl Into<String>) -> Self {
        self.tag = Some(tag.into());
        self
    }

    pub fn tag(&self) -> Option<&str> {
        self.tag.as_deref()
    }

    /// Number of grid panels N.
    pub fn panels(&self) -> usize {
        self.values.len() - 1
    }

    /// Grid spacing 1/N.
    pub fn spacing(&self) -> f64 {
        1.0 / self.panels() as f64
    }

    /// Node location t_j.
    pub fn node(&self, j: usize) -> f64 {
        j as f64 / self.panels() as f64
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, j: usize) -> f64 {
        self.values[j]
    }

    /// Sup norm over the grid nodes.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().fold(f64::INFINITY, |m, v| m.min(*v))
    }

    /// Builds a grid function by evaluating `f` at every node.
    pub fn sample<E>(
        n: usize,
        mut f: impl FnMut(f64) -> std::result::Result<f64, E>,
    ) -> Result<Self>
    where
        Error: From<E>,
    {
        let mut values = Vec::with_capacity(n + 1);
        for j in 0..=n {
            values.push(f(j as f64 / n as f64).map_err(Error::from)?);
        }
        GridFunction::from_values(values)
    }

    /// Pointwise combination with another grid function of the same size.
    pub fn zip_with(
        &self,
        other: &GridFunction,
        mut f: impl FnMut(f64, f64) -> f64,
    ) -> Result<Self> {
        if self.panels() != other.panels() {
            return Err(Error::InvalidInput(format!(
                "grid size mismatch: {} vs {}",
                self.panels(),
                other.panels()
            )));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| f(*a, *b))
            .collect();
        GridFunction::from_values(values)
    }

    pub fn map(&self, f: impl FnMut(f64) -> f64) -> Result<Self> {
        GridFunction::from_values(self.values.iter().copied().map(f).collect())
    }
}

/// Composite 5-point Gauss-Legendre integral of `f` over `[a, b]`.
///
/// Splits `[a, b]` into `panels` equal panels; returns 0 when `a == b`.
/// For smooth integrands the error decreases at order 10 in the panel
/// width.
pub fn integrate<E>(
    mut f: impl FnMut(f64) -> std::result::Result<f64, E>,
    a: f64,
    b: f64,
    panels: usize,
) -> Result<f64>
where
    Error: From<E>,
{
    if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) || a > b {
        return Err(Error::InvalidInput(format!(
            "integration bounds must satisfy 0 <= a <= b <= 1, got [{a}, {b}]"
        )));
    }
    if panels == 0 {
        return Err(Error::InvalidInput("panel count must be >= 1".into()));
    }
    if a == b {
        return Ok(0.0);
    }
    let width = (b - a) / panels as f64;
    let mut total = 0.0;
    for k in 0..panels {
        let left = a + k as f64 * width;
        total += panel_integral(&mut f, left, left + width)?;
    }
    Ok(total)
}

/// Single 5-point panel over `[left, right]`.
fn panel_integral<E>(
    f: &mut impl FnMut(f64) -> std::result::Result<f64, E>,
    left: f64,
    right: f64,
) -> Result<f64>
where
    Error: From<E>,
{
    let half = 0.5 * (right - left);
    let mid = 0.5 * (left + right);
    let mut sum = 0.0;
    for (x, w) in GL5 {
        sum += w * f(mid + half * x).map_err(Error::from)?;
    }
    Ok(half * sum)
}

/// Cumulative integral table: `F(t_j) = \int_0^{t_j} f`, one 5-point panel
/// per grid cell, so the table is consistent with [`integrate`] on
/// node-aligned ranges.
pub fn cumulative<E>(
    mut f: impl FnMut(f64) -> std::result::Result<f64, E>,
    n: usize,
) -> Result<GridFunction>
where
    Error: From<E>,
{
    if n < MIN_GRID_N || !n.is_multiple_of(2) {
        return Err(Error::InvalidInput(format!(
            "cumulative table needs an even grid size >= {MIN_GRID_N}, got {n}"
        )));
    }
    let h = 1.0 / n as f64;
    let mut values = Vec::with_capacity(n + 1);
    values.push(0.0);
    let mut acc = 0.0;
    for j in 0..n {
        acc += panel_integral(&mut f, j as f64 * h, (j + 1) as f64 * h)?;
        values.push(acc);
    }
    GridFunction::from_values(values)
}

/// Cubic (4-point Lagrange) interpolation of a grid function at `s`.
///
/// Exact at the nodes; the stencil is centred where possible and shifted
/// at the ends of the grid.
pub fn sample_between(g: &GridFunction, s: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::InvalidInput(format!(
            "interpolation point must lie in [0, 1], got {s}"
        )));
    }
    Ok(interp_cubic(g.values(), s))
}

/// Unchecked cubic interpolation used on hot paths; `s` must be in [0, 1].
pub(crate) fn interp_cubic(values: &[f64], s: f64) -> f64 {
    let n = values.len() - 1;
    let x = s * n as f64;
    let j = (x.floor() as usize).min(n.saturating_sub(1));
    // Early out when s is (numerically) a node; keeps node values exact.
    if x == j as f64 {
        return values[j];
    }
    // Stencil nodes j-1 .. j+2, clamped into the grid.
    let lo = j.saturating_sub(1).min(n.saturating_sub(3));
    let mut acc = 0.0;
    for (a, &va) in values[lo..lo + 4].iter().enumerate() {
        let xa = (lo + a) as f64;
        let mut weight = 1.0;
        for b in 0..4 {
            if a != b {
                let xb = (lo + b) as f64;
                weight *= (x - xb) / (xa - xb);
            }
        }
        acc += weight * va;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    type NoErr = std::result::Result<f64, Error>;

    #[test]
    fn integrates_constants_exactly() {
        let v = integrate(|_| -> NoErr { Ok(1.0) }, 0.0, 1.0, 4).unwrap();
        assert_eq!(v, 1.0);
    }

    #[test]
    fn integrates_linear_exactly() {
        let v = integrate(|t| -> NoErr { Ok(t) }, 0.0, 1.0, 4).unwrap();
        assert_abs_diff_eq!(v, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn integrates_reciprocal_to_ln2() {
        let v = integrate(|t| -> NoErr { Ok(1.0 / (1.0 + t)) }, 0.0, 1.0, 8).unwrap();
        assert_abs_diff_eq!(v, std::f64::consts::LN_2, epsilon = 1e-12);
    }

    #[test]
    fn error_decreases_at_high_order() {
        // For the smooth integrand 1/(1+t) the composite rule converges at
        // order 10: doubling the panel count shrinks the error ~2^10.
        let exact = std::f64::consts::LN_2;
        let err = |panels: usize| {
            (integrate(|t| -> NoErr { Ok(1.0 / (1.0 + t)) }, 0.0, 1.0, panels).unwrap() - exact)
                .abs()
        };
        let e2 = err(2);
        let e4 = err(4);
        assert!(
            e4 > 1e-15,
            "refine the probe; e4 = {e4:.3e} is at the noise floor"
        );
        let order = (e2 / e4).log2();
        assert!(
            order >= 9.0,
            "observed order {order:.2} (e2 = {e2:.3e}, e4 = {e4:.3e})"
        );
    }

    #[test]
    fn zero_width_range_integrates_to_zero() {
        let v = integrate(|_| -> NoErr { Ok(5.0) }, 0.3, 0.3, 4).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn rejects_bad_bounds() {
        assert!(integrate(|_| -> NoErr { Ok(1.0) }, 0.5, 0.2, 4).is_err());
        assert!(integrate(|_| -> NoErr { Ok(1.0) }, -0.1, 0.2, 4).is_err());
        assert!(integrate(|_| -> NoErr { Ok(1.0) }, 0.0, 1.0, 0).is_err());
    }

    #[test]
    fn integrand_errors_propagate() {
        let r = integrate(
            |t| {
                if t > 0.5 {
                    Err(Error::InvalidInput("boom".into()))
                } else {
                    Ok(1.0)
                }
            },
            0.0,
            1.0,
            4,
        );
        assert!(r.is_err());
    }

    #[test]
    fn cumulative_of_one_is_identity() {
        let f = cumulative(|_| -> NoErr { Ok(1.0) }, 16).unwrap();
        for j in 0..=16 {
            assert_abs_diff_eq!(f.value(j), f.node(j), epsilon = 1e-15);
        }
    }

    #[test]
    fn cumulative_of_linear_is_square() {
        let f = cumulative(|t| -> NoErr { Ok(2.0 * t) }, 64).unwrap();
        for j in 0..=64 {
            let t = f.node(j);
            assert_abs_diff_eq!(f.value(j), t * t, epsilon = 1e-12);
        }
    }

    #[test]
    fn cumulative_of_zero_is_zero() {
        let f = cumulative(|_| -> NoErr { Ok(0.0) }, 16).unwrap();
        assert!(f.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn cumulative_matches_integrate_panelwise() {
        let f = cumulative(|t| -> NoErr { Ok((3.0 * t).sin() + 1.2) }, 32).unwrap();
        for j in [4usize, 17, 32] {
            let direct = integrate(
                |t| -> NoErr { Ok((3.0 * t).sin() + 1.2) },
                0.0,
                f.node(j),
                j,
            )
            .unwrap();
            assert_abs_diff_eq!(f.value(j), direct, epsilon = 1e-14);
        }
    }

    #[test]
    fn interpolation_is_exact_at_nodes() {
        let g = GridFunction::sample(32, |t| -> NoErr { Ok(t * t * t - 0.3 * t) }).unwrap();
        for j in 0..=32 {
            assert_eq!(sample_between(&g, g.node(j)).unwrap(), g.value(j));
        }
    }

    #[test]
    fn interpolation_handles_linear_midpoints() {
        let g = GridFunction::sample(16, |t| -> NoErr { Ok(3.0 * t + 1.0) }).unwrap();
        let mid = (g.node(4) + g.node(5)) / 2.0;
        let expect = (g.value(4) + g.value(5)) / 2.0;
        assert_abs_diff_eq!(sample_between(&g, mid).unwrap(), expect, epsilon = 1e-13);
    }

    #[test]
    fn interpolated_cumulative_matches_antiderivative() {
        let f = cumulative(|t| -> NoErr { Ok(2.0 * t) }, 64).unwrap();
        assert_abs_diff_eq!(sample_between(&f, 0.3).unwrap(), 0.09, epsilon = 1e-9);
    }

    #[test]
    fn interpolation_rejects_out_of_range() {
        let g = GridFunction::zeros(16).unwrap();
        assert!(sample_between(&g, -0.01).is_err());
        assert!(sample_between(&g, 1.01).is_err());
    }

    #[test]
    fn grid_function_shape_rules() {
        assert!(GridFunction::from_values(vec![0.0; 17]).is_ok());
        assert!(GridFunction::from_values(vec![0.0; 16]).is_err()); // N = 15 odd
        assert!(GridFunction::from_values(vec![0.0; 10]).is_err()); // too small
        assert!(GridFunction::from_values(vec![f64::NAN; 17]).is_err());
    }

    proptest! {
        // Additivity over a split point, on smooth data.
        #[test]
        fn integral_additivity(split in 1usize..16) {
            let f = |t: f64| -> NoErr { Ok((2.0 * t).cos() + 2.0) };
            let b = split as f64 / 16.0;
            let whole = integrate(f, 0.0, 1.0, 16).unwrap();
            let left = integrate(f, 0.0, b, split.max(1)).unwrap();
            let right = integrate(f, b, 1.0, 16 - split.min(15)).unwrap();
            prop_assert!((whole - (left + right)).abs() <= 1e-12 * whole.abs().max(1.0));
        }

        // Linearity in the integrand.
        #[test]
        fn integral_linearity(alpha in -5.0..5.0f64, beta in -5.0..5.0f64) {
            let f = |t: f64| (3.0 * t).sin();
            let g = |t: f64| t * t + 0.5;
            let combined =
                integrate(|t| -> NoErr { Ok(alpha * f(t) + beta * g(t)) }, 0.0, 1.0, 8).unwrap();
            let fa = integrate(|t| -> NoErr { Ok(f(t)) }, 0.0, 1.0, 8).unwrap();
            let gb = integrate(|t| -> NoErr { Ok(g(t)) }, 0.0, 1.0, 8).unwrap();
            let scale = combined.abs().max(1.0);
            prop_assert!((combined - (alpha * fa + beta * gb)).abs() <= 1e-12 * scale);
        }

        // Positivity: nonnegative integrand, nonnegative integral.
        #[test]
        fn integral_positivity(shift in 0.0..3.0f64) {
            let v = integrate(
                |t| -> NoErr { Ok((t - 0.5).abs() + shift) },
                0.1,
                0.9,
                7,
            )
            .unwrap();
            prop_assert!(v >= 0.0);
        }
    }
}
