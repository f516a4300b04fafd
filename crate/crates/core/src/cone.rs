//! The cone of admissible iterates and its constants.
//!
//! The solution space is ordered by the cone
//!
//! ```text
//! K = { u : u_i >= 0 on [0,1] and min_{1/4 <= t <= 3/4} u_i(t) >= rho |u_i|_0 },
//! ```
//!
//! where the constant `rho` is built from the weight `p` alone:
//!
//! ```text
//! rho = [ \int_0^1 ds/p(s) ]^{-1} * min{ \int_0^{1/4} ds/p(s), \int_{3/4}^1 ds/p(s) }.
//! ```
//!
//! Any nonnegative `u` for which `q phi(p u')` is nonincreasing (every
//! operator image is of this form) obeys the Harnack-type lower bound
//!
//! ```text
//! u(t) >= P^{-1} min{ \int_0^t ds/p, \int_t^1 ds/p } |u|_0,    P = \int_0^1 ds/p,
//! ```
//!
//! whose right-hand side [`harnack_floor`] computes; restricting it to the
//! middle half-interval gives the cone bound with exactly this `rho`.

use crate::error::{Error, Result};
use crate::problem::ProblemSpec;
use crate::quadrature::{cumulative, GridFunction};
use crate::DEFAULT_GRID_N;
use serde::Serialize;

/// The window over which the cone enforces the lower bound. Fixed by the
/// cone definition, not configurable.
pub const WINDOW: (f64, f64) = (0.25, 0.75);

/// Cone constant `rho` together with the weight table it was computed from.
#[derive(Debug, Clone)]
pub struct ConeData {
    rho: f64,
    /// Cumulative table of `1/p`.
    inv_p_cumulative: GridFunction,
    /// Total mass `P = \int_0^1 ds/p(s)`.
    total: f64,
}

impl ConeData {
    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn inv_p_cumulative(&self) -> &GridFunction {
        &self.inv_p_cumulative
    }

    pub fn total_inv_p(&self) -> f64 {
        self.total
    }

    /// Recomputes `rho` from the stored cumulative table. Agrees with
    /// [`ConeData::rho`] to roundoff; used as an internal consistency check.
    pub fn rho_from_table(&self) -> Result<f64> {
        let first = crate::quadrature::sample_between(&self.inv_p_cumulative, WINDOW.0)?;
        let last =
            self.total - crate::quadrature::sample_between(&self.inv_p_cumulative, WINDOW.1)?;
        Ok(first.min(last) / self.total)
    }
}

/// Computes the cone constant for `spec` on the default master grid.
pub fn compute_rho(spec: &ProblemSpec) -> Result<ConeData> {
    compute_rho_on(spec, DEFAULT_GRID_N)
}

/// Computes the cone constant with an `n`-panel table (n divisible by 4 so
/// the quarter points fall on panel boundaries).
pub fn compute_rho_on(spec: &ProblemSpec, n: usize) -> Result<ConeData> {
    if !n.is_multiple_of(4) {
        return Err(Error::InvalidInput(format!(
            "cone table grid must be divisible by 4, got {n}"
        )));
    }
    let inv_p = |s: f64| -> Result<f64> {
        let v = spec.weight_p().evaluate(s, &[])?;
        if v <= 0.0 {
            return Err(Error::NonpositiveWeight {
                name: "p",
                t: s,
                value: v,
            });
        }
        Ok(1.0 / v)
    };
    let inv_p_cumulative = cumulative(inv_p, n)?;
    let total = inv_p_cumulative.value(n);
    // The table panels align with the quarter points, so reading the table
    // there is exact with respect to the composite rule.
    let first = inv_p_cumulative.value(n / 4);
    let last = total - inv_p_cumulative.value(3 * n / 4);
    let rho = first.min(last) / total;
    debug_assert!(rho > 0.0 && rho <= 0.5 + 1e-12);
    Ok(ConeData {
        rho,
        inv_p_cumulative,
        total,
    })
}

/// The Harnack lower-bound profile `t -> P^{-1} min{C(t), P - C(t)} |u|_0`,
/// where `C` is the cumulative integral of `1/p`.
pub fn harnack_floor(u: &GridFunction, cone: &ConeData) -> GridFunction {
    let sup = u.sup_norm();
    let n = u.panels();
    let values: Vec<f64> = (0..=n)
        .map(|j| {
            let t = j as f64 / n as f64;
            let c = crate::quadrature::interp_cubic(cone.inv_p_cumulative.values(), t);
            let floor = c.min(cone.total - c).max(0.0) / cone.total;
            floor * sup
        })
        .collect();
    GridFunction::from_values(values).expect("floor profile inherits a valid grid")
}

/// Per-component cone membership margins.
#[derive(Debug, Clone, Serialize)]
pub struct ComponentMembership {
    /// One-based component index.
    pub component: usize,
    /// Sup norm of the component over the grid.
    pub sup_norm: f64,
    /// `min_j u(t_j)`; nonnegativity requires this `>= -tol`.
    pub nonneg_margin: f64,
    /// `min over window nodes of u - rho * sup_norm`; membership requires
    /// this `>= -tol`.
    pub window_margin: f64,
    pub member: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct MembershipReport {
    pub rho: f64,
    pub tol: f64,
    pub components: Vec<ComponentMembership>,
}

impl MembershipReport {
    pub fn all_member(&self) -> bool {
        self.components.iter().all(|c| c.member)
    }

    /// Smallest margin over all components and both conditions.
    pub fn worst_margin(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.nonneg_margin.min(c.window_margin))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Checks each component for cone membership at the grid nodes:
/// `u_i >= -tol` everywhere and `u_i >= rho |u_i|_0 - tol` on the nodes in
/// the middle half-interval.
pub fn in_cone(u_all: &[GridFunction], cone: &ConeData, tol: f64) -> MembershipReport {
    let components = u_all
        .iter()
        .enumerate()
        .map(|(idx, u)| {
            let sup = u.sup_norm();
            let nonneg_margin = u.min_value();
            let n = u.panels();
            let window_min = (0..=n)
                .filter(|&j| {
                    let t = j as f64 / n as f64;
                    (WINDOW.0..=WINDOW.1).contains(&t)
                })
                .map(|j| u.value(j))
                .fold(f64::INFINITY, f64::min);
            let window_margin = window_min - cone.rho * sup;
            ComponentMembership {
                component: idx + 1,
                sup_norm: sup,
                nonneg_margin,
                window_margin,
                member: nonneg_margin >= -tol && window_margin >= -tol,
            }
        })
        .collect();
    MembershipReport {
        rho: cone.rho,
        tol,
        components,
    }
}
