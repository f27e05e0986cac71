//! Material parameters of the complex-order fractional Zener rod, conversion
//! to dimensionless form, and the dissipativity (Second Law) restrictions.
//!
//! The dimensionless constitutive law is
//!
//! ```text
//! σ + a₁ D^α σ + b₁ (D^{α+iβ} + D^{α−iβ}) σ = ε + a₂ D^α ε + b₂ (D^{α+iβ} + D^{α−iβ}) ε
//! ```
//!
//! and it is dissipative (storage and loss moduli nonnegative at every
//! frequency) exactly when `a₂b₁ = a₁b₂` and the four inequalities
//! `aᵢ ≥ bᵢ · restriction_rhs(α, β, kind)` hold for both kinds.

use std::f64::consts::FRAC_PI_2;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Default relative tolerance for the `a₂b₁ = a₁b₂` equality.
pub const DEFAULT_TD1_TOL: f64 = 1e-12;

/// Length of the rod in dimensionless units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RodLength {
    Infinite,
    Finite(f64),
}

impl RodLength {
    pub fn is_infinite(&self) -> bool {
        matches!(self, RodLength::Infinite)
    }

    pub fn finite(&self) -> Option<f64> {
        match *self {
            RodLength::Infinite => None,
            RodLength::Finite(l) => Some(l),
        }
    }
}

impl fmt::Display for RodLength {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RodLength::Infinite => write!(f, "inf"),
            RodLength::Finite(l) => write!(f, "{l}"),
        }
    }
}

impl Serialize for RodLength {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match *self {
            RodLength::Infinite => serializer.serialize_str("inf"),
            RodLength::Finite(l) => serializer.serialize_f64(l),
        }
    }
}

impl<'de> Deserialize<'de> for RodLength {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Text(s) if s == "inf" => Ok(RodLength::Infinite),
            Raw::Text(s) => Err(serde::de::Error::custom(format!(
                "rod_length must be \"inf\" or a positive number, got \"{s}\""
            ))),
            Raw::Number(l) if l > 0.0 && l.is_finite() => Ok(RodLength::Finite(l)),
            Raw::Number(l) => Err(serde::de::Error::custom(format!(
                "rod_length must be positive, got {l}"
            ))),
        }
    }
}

/// Dimensionless material coefficients. Field domains are enforced by
/// [`MaterialParams::new`] and by deserialization; admissibility is a separate
/// question answered by [`validate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, try_from = "RawParams")]
pub struct MaterialParams {
    pub a1: f64,
    pub a2: f64,
    pub b1: f64,
    pub b2: f64,
    pub alpha: f64,
    pub beta: f64,
    pub rod_length: RodLength,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    a1: f64,
    a2: f64,
    b1: f64,
    b2: f64,
    alpha: f64,
    beta: f64,
    rod_length: RodLength,
}

impl TryFrom<RawParams> for MaterialParams {
    type Error = Error;

    fn try_from(r: RawParams) -> Result<Self> {
        MaterialParams::new(r.a1, r.a2, r.b1, r.b2, r.alpha, r.beta, r.rod_length)
    }
}

impl MaterialParams {
    pub fn new(
        a1: f64,
        a2: f64,
        b1: f64,
        b2: f64,
        alpha: f64,
        beta: f64,
        rod_length: RodLength,
    ) -> Result<Self> {
        for (name, v) in [("a1", a1), ("a2", a2), ("b1", b1), ("b2", b2)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidParams(format!(
                    "{name} must be finite and nonnegative, got {v}"
                )));
            }
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidParams(format!(
                "alpha must lie in (0, 1), got {alpha}"
            )));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "beta must be positive, got {beta}"
            )));
        }
        if let RodLength::Finite(l) = rod_length {
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::InvalidParams(format!(
                    "rod_length must be positive, got {l}"
                )));
            }
        }
        Ok(Self {
            a1,
            a2,
            b1,
            b2,
            alpha,
            beta,
            rod_length,
        })
    }

    /// Builds parameters with `b₂ := a₂b₁/a₁`, so the `a₂b₁ = a₁b₂` restriction
    /// holds up to a single rounding.
    pub fn with_matched_b2(
        a1: f64,
        a2: f64,
        b1: f64,
        alpha: f64,
        beta: f64,
        rod_length: RodLength,
    ) -> Result<Self> {
        if !(a1 > 0.0) {
            return Err(Error::InvalidParams(format!(
                "deriving b2 from a2*b1/a1 needs a1 > 0, got {a1}"
            )));
        }
        Self::new(a1, a2, b1, a2 * b1 / a1, alpha, beta, rod_length)
    }

    pub fn with_rod_length(mut self, rod_length: RodLength) -> Self {
        self.rod_length = rod_length;
        self
    }

    /// `a₁ = a₂` and `b₁ = b₂`: the modulus is identically one and the rod
    /// obeys the classical wave equation.
    pub fn is_elastic_degenerate(&self) -> bool {
        let close = |u: f64, v: f64| (u - v).abs() <= 1e-14 * u.abs().max(v.abs()).max(1.0);
        close(self.a1, self.a2) && close(self.b1, self.b2)
    }

    /// High-frequency limit of `Re M`, i.e. `√(a₁/a₂)`. The wavefront travels
    /// at the reciprocal of this value.
    pub fn slowness_at_infinity(&self) -> f64 {
        if self.is_elastic_degenerate() || self.a2 == 0.0 {
            1.0
        } else {
            (self.a1 / self.a2).sqrt()
        }
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Which trigonometric factor enters the restriction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RestrictionKind {
    /// `ctg(απ/2)`: the pair of inequalities tied to the loss modulus.
    Ctg,
    /// `tg(απ/2)`: the pair tied to the storage modulus.
    Tg,
}

/// `2·cosh(βπ/2)·√(1 + (k(απ/2)·tanh(βπ/2))²)` with `k = ctg` or `tg`.
///
/// This is the factor multiplying `bᵢ` on the right of the restriction
/// `aᵢ ≥ bᵢ·(…)`. It is at least 2 and increases with `β`.
pub fn restriction_rhs(alpha: f64, beta: f64, kind: RestrictionKind) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::Domain(format!("beta must be positive, got {beta}")));
    }
    let half_alpha = alpha * FRAC_PI_2;
    let half_beta = beta * FRAC_PI_2;
    let k = match kind {
        RestrictionKind::Ctg => 1.0 / half_alpha.tan(),
        RestrictionKind::Tg => half_alpha.tan(),
    };
    let q = k * half_beta.tanh();
    Ok(2.0 * half_beta.cosh() * q.hypot(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Condition {
    /// `a₂b₁ = a₁b₂`.
    Td1,
    /// `a₁ ≥ b₁·rhs(ctg)`.
    CtgFirst,
    /// `a₂ ≥ b₂·rhs(ctg)`.
    CtgSecond,
    /// `a₁ ≥ b₁·rhs(tg)`.
    TgFirst,
    /// `a₂ ≥ b₂·rhs(tg)`.
    TgSecond,
    /// `a₂ ≥ a₁` (strictly, in strict mode) and `b₂ ≥ b₁`.
    Ordering,
    /// `a₂ < a₁`: the reversed regime is not supported.
    ReversedRegime,
    /// A margin is exactly zero while strict margins were requested.
    StrictMargin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", content = "failed")]
pub enum Verdict {
    Admissible,
    AdmissibleStrict,
    Inadmissible(Vec<Condition>),
}

impl Verdict {
    pub fn is_admissible(&self) -> bool {
        !matches!(self, Verdict::Inadmissible(_))
    }

    pub fn is_strict(&self) -> bool {
        matches!(self, Verdict::AdmissibleStrict)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    /// `a₂b₁ − a₁b₂`.
    pub td1_residual: f64,
    /// `aᵢ − bᵢ·rhs(ctg)` for `i = 1, 2`.
    pub td300_margins: (f64, f64),
    /// `aᵢ − bᵢ·rhs(tg)` for `i = 1, 2`.
    pub td30_margins: (f64, f64),
    pub ordering_ok: bool,
    pub strict: bool,
    pub elastic_degenerate: bool,
    pub verdict: Verdict,
}

/// Checks the dissipativity restrictions.
///
/// `a₂b₁ = a₁b₂` is accepted when `|a₂b₁ − a₁b₂| ≤ tol·max(1, a₂b₁)`. With
/// `strict` set, `a₂ > a₁` is required and a zero margin fails.
pub fn validate(params: &MaterialParams, strict: bool, tol: f64) -> ValidationReport {
    let p = params;
    let td1_residual = p.a2 * p.b1 - p.a1 * p.b2;
    let td1_ok = td1_residual.abs() <= tol * (p.a2 * p.b1).max(1.0);

    // Domains are guaranteed by construction, so these never fail.
    let ctg = restriction_rhs(p.alpha, p.beta, RestrictionKind::Ctg).unwrap_or(f64::INFINITY);
    let tg = restriction_rhs(p.alpha, p.beta, RestrictionKind::Tg).unwrap_or(f64::INFINITY);
    let td300_margins = (p.a1 - p.b1 * ctg, p.a2 - p.b2 * ctg);
    let td30_margins = (p.a1 - p.b1 * tg, p.a2 - p.b2 * tg);

    let elastic_degenerate = p.is_elastic_degenerate();
    let reversed = p.a2 < p.a1 && !elastic_degenerate;
    let a_order = if strict && !elastic_degenerate {
        p.a2 > p.a1
    } else {
        p.a2 >= p.a1 || elastic_degenerate
    };
    let ordering_ok = a_order && (p.b2 >= p.b1 || elastic_degenerate);

    let mut failed = Vec::new();
    if !td1_ok {
        failed.push(Condition::Td1);
    }
    let margins = [
        (Condition::CtgFirst, td300_margins.0),
        (Condition::CtgSecond, td300_margins.1),
        (Condition::TgFirst, td30_margins.0),
        (Condition::TgSecond, td30_margins.1),
    ];
    for (cond, m) in margins {
        if m < 0.0 {
            failed.push(cond);
        }
    }
    if reversed {
        failed.push(Condition::ReversedRegime);
    }
    if !ordering_ok {
        failed.push(Condition::Ordering);
    }
    let all_positive = margins.iter().all(|&(_, m)| m > 0.0);
    if failed.is_empty() && strict && !all_positive {
        failed.push(Condition::StrictMargin);
    }

    let verdict = if !failed.is_empty() {
        Verdict::Inadmissible(failed)
    } else if all_positive {
        Verdict::AdmissibleStrict
    } else {
        Verdict::Admissible
    };

    ValidationReport {
        td1_residual,
        td300_margins,
        td30_margins,
        ordering_ok,
        strict,
        elastic_degenerate,
        verdict,
    }
}

/// Material description in physical units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalParams {
    /// Modulus of elasticity, Pa.
    #[serde(rename = "E")]
    pub e_modulus: f64,
    /// Density, kg/m³.
    #[serde(rename = "rho")]
    pub density: f64,
    /// Coefficients in s^α.
    pub a1: f64,
    pub a2: f64,
    pub b1: f64,
    pub b2: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Scale of the boundary displacement, m.
    #[serde(rename = "U_scale")]
    pub u_scale: f64,
    #[serde(rename = "rod_length_m")]
    pub rod_length: RodLength,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Nondimensional {
    pub params: MaterialParams,
    /// `T = a₂^{1/α}`, seconds.
    pub time_scale: f64,
    /// `L = T·√(E/ρ)`, meters.
    pub length_scale: f64,
    /// Boundary displacement scale divided by `L`.
    pub boundary_scale: f64,
}

/// Rescales time by `T = a₂^{1/α}` and length by `L = T√(E/ρ)`; the resulting
/// dimensionless `a₂` is one.
pub fn nondimensionalize(phys: &PhysicalParams) -> Result<Nondimensional> {
    if !(phys.e_modulus > 0.0 && phys.density > 0.0) {
        return Err(Error::InvalidParams(format!(
            "E and rho must be positive, got E = {}, rho = {}",
            phys.e_modulus, phys.density
        )));
    }
    if !(phys.a2 > 0.0) {
        return Err(Error::InvalidParams(format!(
            "a2 must be positive to define the time scale, got {}",
            phys.a2
        )));
    }
    if !(phys.alpha > 0.0 && phys.alpha < 1.0) {
        return Err(Error::InvalidParams(format!(
            "alpha must lie in (0, 1), got {}",
            phys.alpha
        )));
    }
    let time_scale = phys.a2.powf(1.0 / phys.alpha);
    let length_scale = time_scale * (phys.e_modulus / phys.density).sqrt();
    let t_alpha = time_scale.powf(phys.alpha);
    let rod_length = match phys.rod_length {
        RodLength::Infinite => RodLength::Infinite,
        RodLength::Finite(l) => RodLength::Finite(l / length_scale),
    };
    let params = MaterialParams::new(
        phys.a1 / t_alpha,
        // exactly one by construction; avoid the rounding of a2 / a2^{1/α·α}
        1.0,
        phys.b1 / t_alpha,
        phys.b2 / t_alpha,
        phys.alpha,
        phys.beta,
        rod_length,
    )?;
    Ok(Nondimensional {
        params,
        time_scale,
        length_scale,
        boundary_scale: phys.u_scale / length_scale,
    })
}
