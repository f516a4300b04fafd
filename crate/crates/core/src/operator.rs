//! The constructive integral operator whose fixed points solve the system.
//!
//! For a nonnegative iterate `u` and each component `i`, the image is
//!
//! ```text
//!              | \int_0^t  1/p(s) phi^{-1}( 1/q(s) \int_s^{sigma_i} f_i(tau, u) dtau ) ds,  t <= sigma_i,
//! (T_i u)(t) = |
//!              | \int_t^1  1/p(s) phi^{-1}( 1/q(s) \int_{sigma_i}^s f_i(tau, u) dtau ) ds,  t >= sigma_i,
//! ```
//!
//! where the peak location `sigma_i` is the root of the auxiliary map
//!
//! ```text
//! Theta_i u(t) = \int_0^t 1/p(s) phi^{-1}( 1/q(s) \int_s^t f_i dtau ) ds
//!              - \int_t^1 1/p(s) phi^{-1}( 1/q(s) \int_t^s f_i dtau ) ds.
//! ```
//!
//! `Theta_i u` is nondecreasing with `Theta_i u(0) < 0 < Theta_i u(1)`
//! whenever the forcing has positive mass along the iterate, so the root is
//! found by bisection. The two branch formulas agree at `sigma_i` by
//! construction; the residual gap is recorded as `branch_mismatch`. When
//! the forcing vanishes on subintervals, `Theta` may be flat at zero; any
//! point of the flat interval is a valid peak location (the image does not
//! depend on the choice there) and the bisection returns the midpoint of
//! its final bracket.
//!
//! Implementation notes. The forcing is sampled once per component on the
//! master grid and turned into a single cumulative table, so one operator
//! application costs O(N) rather than O(N^2). Inner integral values read
//! from that table are clamped at zero: the continuous quantity
//! `\int_s^t f` is nonnegative for nonnegative forcing, and the clamp
//! removes cubic-interpolation undershoot near flat regions.

use crate::error::{Error, Result};
use crate::problem::ProblemSpec;
use crate::quadrature::{interp_cubic, GridFunction, GL5, MIN_GRID_N};

/// Argument tolerance for the bisection locating `sigma_i`.
pub const SIGMA_TOL: f64 = 1e-12;

/// Iteration cap for the bisection; 2^-80 is far below the tolerance, so
/// this only guards against degenerate arithmetic.
const SIGMA_MAX_ITER: usize = 80;

/// The odd power `phi(x) = |x|^(p-2) x`, with `phi(0) = 0` for every
/// `p > 1` (the limit value; the naive formula reads 0^negative * 0 when
/// `p < 2`).
pub fn phi(x: f64, p: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    if p == 2.0 {
        x
    } else if p == 3.0 {
        x.abs() * x
    } else {
        x.abs().powf(p - 2.0) * x
    }
}

/// Exact inverse of [`phi`]: `phi_inv(y) = sign(y) |y|^(1/(p-1))`.
pub fn phi_inv(y: f64, p: f64) -> f64 {
    if y == 0.0 {
        return 0.0;
    }
    if p == 2.0 {
        y
    } else if p == 3.0 {
        y.signum() * y.abs().sqrt()
    } else {
        y.signum() * y.abs().powf(1.0 / (p - 1.0))
    }
}

#[derive(Debug, Clone, Copy)]
enum PhiKind {
    Linear,
    Quadratic,
    General,
}

/// `phi^{-1}` restricted to nonnegative arguments, with the exponent
/// resolved once. All branch integrands use this fast path.
#[derive(Debug, Clone, Copy)]
struct PhiInvNonneg {
    kind: PhiKind,
    inv_exponent: f64,
}

impl PhiInvNonneg {
    fn new(p: f64) -> Self {
        let kind = if p == 2.0 {
            PhiKind::Linear
        } else if p == 3.0 {
            PhiKind::Quadratic
        } else {
            PhiKind::General
        };
        PhiInvNonneg {
            kind,
            inv_exponent: 1.0 / (p - 1.0),
        }
    }

    #[inline]
    fn eval(&self, y: f64) -> f64 {
        debug_assert!(y >= 0.0);
        match self.kind {
            PhiKind::Linear => y,
            PhiKind::Quadratic => y.sqrt(),
            PhiKind::General => {
                if y == 0.0 {
                    0.0
                } else {
                    y.powf(self.inv_exponent)
                }
            }
        }
    }
}

/// One component of an operator application.
#[derive(Debug, Clone)]
pub struct OperatorComponent {
    /// The image `T_i u` sampled on the grid.
    pub image: GridFunction,
    /// Peak location: the root of `Theta_i u`.
    pub sigma: f64,
    /// `|left(sigma) - right(sigma)|`, the gap between the two branch
    /// formulas at the peak.
    pub branch_mismatch: f64,
    /// Branch-averaged image value at `sigma` (the peak of the continuous
    /// profile; at least the grid maximum up to the mismatch).
    pub peak: f64,
    /// Set when the forcing had no mass along the iterate and the image
    /// was taken to be identically zero.
    pub degenerate: bool,
}

#[derive(Debug, Clone)]
pub struct OperatorOutput {
    pub components: Vec<OperatorComponent>,
}

impl OperatorOutput {
    /// `||T u|| = max_i |T_i u|_0` over the grid nodes.
    pub fn norm(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.image.sup_norm())
            .fold(0.0, f64::max)
    }

    pub fn images(&self) -> Vec<GridFunction> {
        self.components.iter().map(|c| c.image.clone()).collect()
    }

    pub fn sigmas(&self) -> Vec<f64> {
        self.components.iter().map(|c| c.sigma).collect()
    }
}

/// Forcing data for one component along a fixed iterate: node samples and
/// the cumulative integral table.
struct ForcingTable {
    cumulative: Vec<f64>,
}

impl ForcingTable {
    fn mass(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    #[inline]
    fn at(&self, s: f64) -> f64 {
        interp_cubic(&self.cumulative, s)
    }
}

/// Evaluator for `Theta`, `sigma` and `T` on a fixed spec and grid.
///
/// Construction samples `1/p` and `1/q` at every panel quadrature point
/// once; applications then reuse the tables. Component applications are
/// independent and the evaluator itself is immutable, so concurrent use is
/// safe.
pub struct Operator<'a> {
    spec: &'a ProblemSpec,
    n_grid: usize,
    h: f64,
    inv_p_gl: Vec<[f64; 5]>,
    inv_q_gl: Vec<[f64; 5]>,
}

impl<'a> Operator<'a> {
    pub fn new(spec: &'a ProblemSpec, n_grid: usize) -> Result<Self> {
        if n_grid < MIN_GRID_N || !n_grid.is_multiple_of(2) {
            return Err(Error::InvalidInput(format!(
                "operator grid must be even and >= {MIN_GRID_N}, got {n_grid}"
            )));
        }
        let h = 1.0 / n_grid as f64;
        let mut inv_p_gl = Vec::with_capacity(n_grid);
        let mut inv_q_gl = Vec::with_capacity(n_grid);
        for k in 0..n_grid {
            let mid = (k as f64 + 0.5) * h;
            let half = 0.5 * h;
            let mut ip = [0.0; 5];
            let mut iq = [0.0; 5];
            for (m, (x, _)) in GL5.iter().enumerate() {
                let s = mid + half * x;
                ip[m] = inv_weight(spec, "p", s)?;
                iq[m] = inv_weight(spec, "q", s)?;
            }
            inv_p_gl.push(ip);
            inv_q_gl.push(iq);
        }
        Ok(Operator {
            spec,
            n_grid,
            h,
            inv_p_gl,
            inv_q_gl,
        })
    }

    pub fn grid_size(&self) -> usize {
        self.n_grid
    }

    pub fn spec(&self) -> &ProblemSpec {
        self.spec
    }

    fn phi_inv(&self) -> PhiInvNonneg {
        PhiInvNonneg::new(self.spec.phi_exponent())
    }

    /// Samples the forcing for component `i` along `u` at the grid nodes
    /// and builds its cumulative table.
    fn forcing_table(&self, i: usize, u_nodes: &[Vec<f64>]) -> Result<ForcingTable> {
        let mut nodes = Vec::with_capacity(self.n_grid + 1);
        for (j, uj) in u_nodes.iter().enumerate() {
            let t = j as f64 * self.h;
            let v = self.spec.forcing(i, t, uj)?;
            nodes.push(v);
        }
        Ok(ForcingTable {
            cumulative: self.cumulative_of_samples(&nodes),
        })
    }

    /// Panelwise cumulative integral of the cubic interpolant of node
    /// samples, clamped at zero against interpolation undershoot.
    pub(crate) fn cumulative_of_samples(&self, nodes: &[f64]) -> Vec<f64> {
        let mut cumulative = Vec::with_capacity(self.n_grid + 1);
        cumulative.push(0.0);
        let mut acc = 0.0;
        for k in 0..self.n_grid {
            let mid = (k as f64 + 0.5) * self.h;
            let half = 0.5 * self.h;
            let mut sum = 0.0;
            for (x, w) in GL5 {
                sum += w * interp_cubic(nodes, mid + half * x).max(0.0);
            }
            acc += half * sum;
            cumulative.push(acc);
        }
        cumulative
    }

    /// Crate-internal access to the weighted branch integral on an
    /// arbitrary cumulative table; the window functional of the analysis
    /// module shares this integrand shape.
    pub(crate) fn weighted_branch(
        &self,
        a: f64,
        b: f64,
        cumulative: &[f64],
        anchor: f64,
        falling: bool,
    ) -> Result<f64> {
        self.branch_integral(a, b, cumulative, anchor, falling)
    }

    /// Integral over `[a, b]` of `1/p(s) phi_inv( 1/q(s) * arg(s) )` with
    /// `arg(s) = anchor - F(s)` (rising branch) or `F(s) - anchor`
    /// (falling branch), clamped at zero. Full master panels inside the
    /// range use the precomputed weight tables; the partial end panels
    /// evaluate the weights directly.
    fn branch_integral(
        &self,
        a: f64,
        b: f64,
        cumulative: &[f64],
        anchor: f64,
        falling: bool,
    ) -> Result<f64> {
        if b <= a {
            return Ok(0.0);
        }
        let pinv = self.phi_inv();
        let k_lo = (a / self.h).ceil() as usize;
        let k_hi = ((b / self.h).floor() as usize).min(self.n_grid);
        if k_lo > k_hi {
            // The whole range sits inside one panel.
            return self.partial_segment(a, b, cumulative, anchor, falling);
        }
        let mut total = 0.0;
        if a < k_lo as f64 * self.h {
            total += self.partial_segment(a, k_lo as f64 * self.h, cumulative, anchor, falling)?;
        }
        for k in k_lo..k_hi {
            total += self.full_panel(k, cumulative, anchor, falling, pinv);
        }
        if b > k_hi as f64 * self.h {
            total += self.partial_segment(k_hi as f64 * self.h, b, cumulative, anchor, falling)?;
        }
        Ok(total)
    }

    /// 5-point rule on an off-grid segment; weights evaluated on the fly.
    fn partial_segment(
        &self,
        a: f64,
        b: f64,
        cumulative: &[f64],
        anchor: f64,
        falling: bool,
    ) -> Result<f64> {
        if b <= a {
            return Ok(0.0);
        }
        let pinv = self.phi_inv();
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let mut sum = 0.0;
        for (x, w) in GL5 {
            let s = mid + half * x;
            let ip = inv_weight(self.spec, "p", s)?;
            let iq = inv_weight(self.spec, "q", s)?;
            let f_s = interp_cubic(cumulative, s);
            let d = if falling { f_s - anchor } else { anchor - f_s };
            sum += w * ip * pinv.eval(iq * d.max(0.0));
        }
        Ok(half * sum)
    }

    #[inline]
    fn full_panel(
        &self,
        k: usize,
        cumulative: &[f64],
        anchor: f64,
        falling: bool,
        pinv: PhiInvNonneg,
    ) -> f64 {
        let mid = (k as f64 + 0.5) * self.h;
        let half = 0.5 * self.h;
        let ip = &self.inv_p_gl[k];
        let iq = &self.inv_q_gl[k];
        let mut sum = 0.0;
        for (m, (x, w)) in GL5.iter().enumerate() {
            let s = mid + half * x;
            let f_s = interp_cubic(cumulative, s);
            let d = if falling { f_s - anchor } else { anchor - f_s };
            sum += w * ip[m] * pinv.eval(iq[m] * d.max(0.0));
        }
        half * sum
    }

    fn theta_from_table(&self, table: &ForcingTable, t: f64) -> Result<f64> {
        let anchor = table.at(t);
        let left = self.branch_integral(0.0, t, &table.cumulative, anchor, false)?;
        let right = self.branch_integral(t, 1.0, &table.cumulative, anchor, true)?;
        Ok(left - right)
    }

    /// The auxiliary map `Theta_i u(t)`.
    pub fn theta(&self, i: usize, u: &[GridFunction], t: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidInput(format!(
                "t must lie in [0, 1], got {t}"
            )));
        }
        self.check_iterate(u)?;
        let table = self.forcing_table(i, &transpose(u))?;
        self.theta_from_table(&table, t)
    }

    fn find_sigma_from_table(&self, table: &ForcingTable, tol: f64) -> Result<f64> {
        if table.mass() <= 0.0 {
            return Err(Error::DegenerateForcing);
        }
        let mut lo = 0.0f64;
        let mut hi = 1.0f64;
        let theta_lo = self.theta_from_table(table, lo)?;
        let theta_hi = self.theta_from_table(table, hi)?;
        if theta_lo > 0.0 || theta_hi < 0.0 {
            // Positive mass forces Theta(0) < 0 < Theta(1); anything else
            // means the forcing is numerically degenerate.
            return Err(Error::DegenerateForcing);
        }
        for _ in 0..SIGMA_MAX_ITER {
            if hi - lo <= tol {
                break;
            }
            let mid = 0.5 * (lo + hi);
            let v = self.theta_from_table(table, mid)?;
            if v == 0.0 {
                // Exact zero: collapse the bracket onto it; on a flat zero
                // interval this is the midpoint of the current bracket.
                return Ok(mid);
            } else if v < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Root of `Theta_i u` in (0, 1) by bisection, to argument tolerance
    /// `tol`.
    pub fn find_sigma(&self, i: usize, u: &[GridFunction], tol: f64) -> Result<f64> {
        self.check_iterate(u)?;
        let table = self.forcing_table(i, &transpose(u))?;
        self.find_sigma_from_table(&table, tol)
    }

    fn check_iterate(&self, u: &[GridFunction]) -> Result<()> {
        if u.len() != self.spec.component_count() {
            return Err(Error::InvalidInput(format!(
                "expected {} components, got {}",
                self.spec.component_count(),
                u.len()
            )));
        }
        for (i, ui) in u.iter().enumerate() {
            if ui.panels() != self.n_grid {
                return Err(Error::InvalidInput(format!(
                    "component {} lives on an {}-panel grid, operator uses {}",
                    i + 1,
                    ui.panels(),
                    self.n_grid
                )));
            }
            if ui.min_value() < 0.0 {
                return Err(Error::InvalidInput(format!(
                    "component {} has negative values; clamp the iterate first",
                    i + 1
                )));
            }
        }
        Ok(())
    }

    /// Applies the operator to a nonnegative iterate.
    pub fn apply(&self, u: &[GridFunction]) -> Result<OperatorOutput> {
        self.check_iterate(u)?;
        let u_nodes = transpose(u);
        let mut components = Vec::with_capacity(self.spec.component_count());
        for i in 0..self.spec.component_count() {
            let table = self.forcing_table(i, &u_nodes)?;
            if table.mass() <= 0.0 {
                components.push(OperatorComponent {
                    image: GridFunction::zeros(self.n_grid)?,
                    sigma: 0.5,
                    branch_mismatch: 0.0,
                    peak: 0.0,
                    degenerate: true,
                });
                continue;
            }
            let sigma = self.find_sigma_from_table(&table, SIGMA_TOL)?;
            components.push(self.image_component(&table, sigma)?);
        }
        Ok(OperatorOutput { components })
    }

    fn image_component(&self, table: &ForcingTable, sigma: f64) -> Result<OperatorComponent> {
        let pinv = self.phi_inv();
        let anchor = table.at(sigma);
        let n = self.n_grid;
        let mut values = vec![0.0; n + 1];
        // Last node at or below the peak; nodes 0..=m take the rising
        // branch, nodes m+1..=n the falling one.
        let m = ((sigma / self.h).floor() as usize).min(n - 1);

        let cum = &table.cumulative;
        for k in 0..m {
            values[k + 1] = values[k] + self.full_panel(k, cum, anchor, false, pinv);
        }
        for k in (m + 1..n).rev() {
            values[k] = values[k + 1] + self.full_panel(k, cum, anchor, true, pinv);
        }

        let left_at_sigma =
            values[m] + self.partial_segment(m as f64 * self.h, sigma, cum, anchor, false)?;
        let right_at_sigma = values[m + 1]
            + self.partial_segment(sigma, (m + 1) as f64 * self.h, cum, anchor, true)?;
        let image = GridFunction::from_values(values)?;
        let peak = 0.5 * (left_at_sigma + right_at_sigma);
        Ok(OperatorComponent {
            image,
            sigma,
            branch_mismatch: (left_at_sigma - right_at_sigma).abs(),
            peak,
            degenerate: false,
        })
    }
}

fn inv_weight(spec: &ProblemSpec, name: &'static str, s: f64) -> Result<f64> {
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
    Ok(1.0 / v)
}

/// Node-major view of the iterate: `result[j]` collects the component
/// values at node `j`.
fn transpose(u: &[GridFunction]) -> Vec<Vec<f64>> {
    let n_nodes = u.first().map(|g| g.values().len()).unwrap_or(0);
    (0..n_nodes)
        .map(|j| u.iter().map(|g| g.value(j)).collect())
        .collect()
}

/// Convenience wrappers matching the per-operation entry points; each
/// builds a fresh evaluator on the iterate's grid.
pub fn theta(spec: &ProblemSpec, i: usize, u: &[GridFunction], t: f64) -> Result<f64> {
    let n = grid_of(u)?;
    Operator::new(spec, n)?.theta(i, u, t)
}

pub fn find_sigma(spec: &ProblemSpec, i: usize, u: &[GridFunction], tol: f64) -> Result<f64> {
    let n = grid_of(u)?;
    Operator::new(spec, n)?.find_sigma(i, u, tol)
}

pub fn apply_t(spec: &ProblemSpec, u: &[GridFunction]) -> Result<OperatorOutput> {
    let n = grid_of(u)?;
    Operator::new(spec, n)?.apply(u)
}

fn grid_of(u: &[GridFunction]) -> Result<usize> {
    u.first()
        .map(|g| g.panels())
        .ok_or_else(|| Error::InvalidInput("empty iterate".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::problem::ProblemSpec;
    use approx::assert_abs_diff_eq;

    fn unit_spec(phi_exponent: f64, f: &str) -> ProblemSpec {
        ProblemSpec::general(
            1,
            phi_exponent,
            parse("1").unwrap(),
            parse("1").unwrap(),
            vec![parse(f).unwrap()],
        )
        .unwrap()
    }

    fn bump(n: usize, level: f64) -> GridFunction {
        GridFunction::sample(n, |t| -> crate::Result<f64> {
            Ok(level * 4.0 * t * (1.0 - t))
        })
        .unwrap()
    }

    #[test]
    fn phi_examples() {
        assert_eq!(phi(-2.0, 3.0), -4.0);
        assert_eq!(phi(5.0, 2.0), 5.0);
        assert_eq!(phi(0.0, 1.5), 0.0);
    }

    #[test]
    fn phi_inv_examples() {
        assert_eq!(phi_inv(-4.0, 3.0), -2.0);
        assert_eq!(phi_inv(9.0, 2.0), 9.0);
        assert_abs_diff_eq!(phi_inv(8.0, 4.0), 2.0, epsilon = 1e-14);
    }

    #[test]
    fn phi_inverse_pair_is_exact() {
        for p in [1.5, 2.0, 3.0, 4.7] {
            for x in [-1000.0, -31.7, -1.0, -1e-3, 0.0, 1e-3, 0.5, 7.0, 998.3] {
                let back = phi_inv(phi(x, p), p);
                assert_abs_diff_eq!(back, x, epsilon = 1e-12 * x.abs().max(1e-9));
            }
        }
    }

    #[test]
    fn theta_closed_form_linear_case() {
        // p = 2, unit weights, f = 8: Theta(t) = 4t^2 - 4(1-t)^2 = 8t - 4.
        let spec = unit_spec(2.0, "8");
        let u = vec![bump(64, 1.0)];
        let op = Operator::new(&spec, 64).unwrap();
        for t in [0.0, 0.2, 0.5, 0.77, 1.0] {
            let v = op.theta(0, &u, t).unwrap();
            assert_abs_diff_eq!(v, 8.0 * t - 4.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn theta_signs_at_endpoints() {
        let spec = unit_spec(2.5, "1 + t");
        let u = vec![bump(64, 0.3)];
        assert!(theta(&spec, 0, &u, 0.0).unwrap() < 0.0);
        assert!(theta(&spec, 0, &u, 1.0).unwrap() > 0.0);
    }

    #[test]
    fn theta_vanishes_at_center_for_symmetric_data() {
        let spec = unit_spec(3.0, "2");
        let u = vec![bump(64, 1.0)];
        let v = theta(&spec, 0, &u, 0.5).unwrap();
        assert_abs_diff_eq!(v, 0.0, epsilon = 1e-13);
    }

    #[test]
    fn sigma_is_half_for_symmetric_data() {
        let spec = unit_spec(2.0, "8");
        let u = vec![bump(64, 1.0)];
        let sigma = find_sigma(&spec, 0, &u, SIGMA_TOL).unwrap();
        assert_abs_diff_eq!(sigma, 0.5, epsilon = 1e-10);
    }

    #[test]
    fn sigma_moves_right_for_right_weighted_forcing() {
        // f = 1 + 10 t: Theta(t) = F(t) - \int_0^1 F with F(t) = t + 5t^2,
        // so sigma solves 5 sigma^2 + sigma - 13/6 = 0.
        let spec = unit_spec(2.0, "1 + 10*t");
        let u = vec![bump(128, 1.0)];
        let sigma = find_sigma(&spec, 0, &u, SIGMA_TOL).unwrap();
        let exact = (-1.0 + (1.0f64 + 130.0 / 3.0).sqrt()) / 10.0;
        assert!(sigma > 0.5);
        assert_abs_diff_eq!(sigma, exact, epsilon = 1e-9);

        // Independent bracket: scan Theta for its sign change on a fine grid.
        let op = Operator::new(&spec, 128).unwrap();
        let scan = 10_000;
        let mut bracket = None;
        let mut prev = op.theta(0, &u, 0.0).unwrap();
        for j in 1..=scan {
            let t = j as f64 / scan as f64;
            let v = op.theta(0, &u, t).unwrap();
            if prev < 0.0 && v >= 0.0 {
                bracket = Some(((j - 1) as f64 / scan as f64, t));
                break;
            }
            prev = v;
        }
        let (lo, hi) = bracket.expect("scan must find the sign change");
        assert!(
            sigma >= lo && sigma <= hi,
            "sigma {sigma} outside [{lo}, {hi}]"
        );
    }

    #[test]
    fn degenerate_forcing_reported() {
        let spec = ProblemSpec::separable(
            1,
            2.0,
            parse("1").unwrap(),
            parse("1").unwrap(),
            vec![parse("0").unwrap()],
            vec![parse("u1").unwrap()],
            1.0,
        )
        .unwrap();
        let u = vec![bump(64, 1.0)];
        assert!(matches!(
            find_sigma(&spec, 0, &u, SIGMA_TOL),
            Err(Error::DegenerateForcing)
        ));
        // apply_t resolves the same situation to a flagged zero component.
        let out = apply_t(&spec, &u).unwrap();
        assert!(out.components[0].degenerate);
        assert_eq!(out.components[0].image.sup_norm(), 0.0);
    }

    #[test]
    fn constant_forcing_reproduces_parabola() {
        // p = 2, unit weights, f = 8: T u = 4t(1-t) regardless of u.
        let spec = unit_spec(2.0, "8");
        let u = vec![bump(512, 0.123)];
        let out = apply_t(&spec, &u).unwrap();
        let c = &out.components[0];
        assert_abs_diff_eq!(c.sigma, 0.5, epsilon = 1e-10);
        for j in 0..=512 {
            let t = c.image.node(j);
            assert_abs_diff_eq!(c.image.value(j), 4.0 * t * (1.0 - t), epsilon = 1e-10);
        }
        assert_abs_diff_eq!(c.peak, 1.0, epsilon = 1e-10);
        assert!(c.branch_mismatch <= 1e-8 * (1.0 + c.peak));
    }

    #[test]
    fn genuine_p_laplacian_midpoint_value() {
        // p = 3, unit weights, f = 1: u'(t) = sqrt(1/2 - t) on the rising
        // side, so T u(1/2) = (2/3) (1/2)^(3/2).
        let spec = unit_spec(3.0, "1");
        let u = vec![bump(512, 1.0)];
        let out = apply_t(&spec, &u).unwrap();
        let c = &out.components[0];
        let expect = (2.0 / 3.0) * 0.5f64.powf(1.5);
        assert_abs_diff_eq!(c.image.value(256), expect, epsilon = 1e-7);
        assert_abs_diff_eq!(c.peak, expect, epsilon = 1e-7);
    }

    #[test]
    fn endpoints_are_exactly_zero_and_image_nonnegative() {
        let spec = unit_spec(2.5, "1 + t + u1");
        let u = vec![bump(64, 2.0)];
        let out = apply_t(&spec, &u).unwrap();
        let image = &out.components[0].image;
        assert_eq!(image.value(0), 0.0);
        assert_eq!(image.value(64), 0.0);
        assert!(image.values().iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn peak_dominates_grid_maximum() {
        for f in ["8", "1 + 10*t", "1 + u1^2"] {
            let spec = unit_spec(2.0, f);
            let u = vec![bump(128, 1.0)];
            let out = apply_t(&spec, &u).unwrap();
            let c = &out.components[0];
            assert!(
                c.peak >= c.image.sup_norm() - 1e-12,
                "{f}: peak {} vs grid max {}",
                c.peak,
                c.image.sup_norm()
            );
        }
    }

    #[test]
    fn theta_is_nondecreasing_for_positive_forcing() {
        let cases = [
            (2.0, "1", "2 + sin(3*t)", "1 + 2*t"),
            (1.5, "1 + t", "1", "0.5 + t^2"),
            (3.0, "2 - t", "1 + t", "3 + cos(2*t)"),
        ];
        for (pexp, pw, qw, f) in cases {
            let spec = ProblemSpec::general(
                1,
                pexp,
                parse(pw).unwrap(),
                parse(qw).unwrap(),
                vec![parse(f).unwrap()],
            )
            .unwrap();
            let u = vec![bump(64, 1.0)];
            let op = Operator::new(&spec, 64).unwrap();
            let mut prev = f64::NEG_INFINITY;
            for j in 0..=64 {
                let t = j as f64 / 64.0;
                let v = op.theta(0, &u, t).unwrap();
                assert!(
                    v >= prev - 1e-10,
                    "theta not monotone for {f} at t = {t}: {v} < {prev}"
                );
                prev = v;
            }
        }
    }

    #[test]
    fn forcing_scaling_scales_image_exactly() {
        // Replacing f by c^(p-1) f multiplies the image by c.
        for (pexp, c) in [(2.0f64, 3.0f64), (3.0, 0.2), (1.5, 10.0)] {
            let base = ProblemSpec::separable(
                1,
                pexp,
                parse("1 + t").unwrap(),
                parse("1").unwrap(),
                vec![parse("1 + t^2").unwrap()],
                vec![parse("1 + u1").unwrap()],
                1.0,
            )
            .unwrap();
            let scaled = base.scale_by_lambda(c.powf(pexp - 1.0)).unwrap();
            let u = vec![bump(64, 0.8)];
            let out_base = apply_t(&base, &u).unwrap();
            let out_scaled = apply_t(&scaled, &u).unwrap();
            for j in 0..=64 {
                let expect = c * out_base.components[0].image.value(j);
                let got = out_scaled.components[0].image.value(j);
                assert_abs_diff_eq!(got, expect, epsilon = 1e-10 * expect.abs().max(1e-12));
            }
        }
    }

    #[test]
    fn images_land_in_the_cone() {
        use crate::cone::{compute_rho_on, in_cone};
        let specs = [
            unit_spec(2.0, "1 + t + 0.5*u1"),
            ProblemSpec::general(
                2,
                2.5,
                parse("1 + 0.3*t").unwrap(),
                parse("1 + t^2").unwrap(),
                vec![parse("1 + u2").unwrap(), parse("2 + u1 + t").unwrap()],
            )
            .unwrap(),
        ];
        for spec in &specs {
            let cone = compute_rho_on(spec, 64).unwrap();
            for level in [0.1, 1.0, 10.0] {
                let u = vec![bump(64, level); spec.component_count()];
                let out = apply_t(spec, &u).unwrap();
                let report = in_cone(&out.images(), &cone, 1e-10 * (1.0 + out.norm()));
                assert!(report.all_member(), "level {level}: {report:?}");
                for c in &out.components {
                    assert!(
                        c.branch_mismatch <= 1e-8 * (1.0 + c.peak),
                        "branch mismatch {} at peak {}",
                        c.branch_mismatch,
                        c.peak
                    );
                }
            }
        }
    }

    #[test]
    fn images_dominate_their_harnack_floor() {
        use crate::cone::{compute_rho_on, harnack_floor};
        let spec = unit_spec(3.0, "1 + t");
        let cone = compute_rho_on(&spec, 64).unwrap();
        let u = vec![bump(64, 1.0)];
        let out = apply_t(&spec, &u).unwrap();
        let image = &out.components[0].image;
        let floor = harnack_floor(image, &cone);
        for j in 0..=64 {
            assert!(
                image.value(j) >= floor.value(j) - 1e-8,
                "floor exceeded at node {j}: {} < {}",
                image.value(j),
                floor.value(j)
            );
        }
    }

    #[test]
    fn rejects_negative_iterates_and_size_mismatches() {
        let spec = unit_spec(2.0, "8");
        let bad = GridFunction::sample(64, |t| -> crate::Result<f64> { Ok(t - 0.5) }).unwrap();
        assert!(apply_t(&spec, &[bad]).is_err());
        let wrong_count = vec![bump(64, 1.0), bump(64, 1.0)];
        assert!(apply_t(&spec, &wrong_count).is_err());
    }
}
