//! One-parameter group actions and single twists on `A_q`.
//!
//! All five actions are diagonal on the PBW basis. On the generators:
//!
//! ```text
//! ρ_z(α) = q^{−2iz}α   ρ_z(γ) = γ        (modular group;  ρ_i(α) = q²α)
//! τ_z(α) = α           τ_z(γ) = q^{2iz}γ  (scaling group)
//! σ(α)   = q^{−2}α     σ(γ)   = q^{−4}γ   (twist restricted to A_q)
//! φ(α)   = q^{−1}α     φ(γ)   = q^{−2}γ   (square root of σ: φ² = σ)
//! β_z(α) = q^{2iz}α    β_z(γ) = q^{4iz}γ  (β_i = σ)
//! ```
//!
//! On a monomial `a(u,v)y^m` the exponents add along the word, giving the
//! diagonal factors implemented below; `y` is fixed by all five.

use super::{AlgElement, PBWMonomial, QContext};
use num_complex::Complex64;

/// Selector for the five diagonal actions.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum GroupTag {
    /// Modular group `ρ_z`.
    Rho,
    /// Scaling group `τ_z`.
    Tau,
    /// Twist automorphism `σ` restricted to the algebra (`z` ignored).
    SigmaA,
    /// Square root `φ` of `σ` (`z` ignored).
    Phi,
    /// One-parameter group `β_z` with `β_i = σ`.
    BetaA,
}

/// Diagonal factor of the action on one monomial.
pub fn group_factor(ctx: &QContext, g: GroupTag, z: Complex64, m: &PBWMonomial) -> Complex64 {
    let u = m.k as f64;
    let v = m.l as f64;
    let i = Complex64::new(0.0, 1.0);
    match g {
        GroupTag::Rho => ctx.qpc(-2.0 * i * z * u),
        GroupTag::Tau => ctx.qpc(2.0 * i * z * v),
        GroupTag::SigmaA => Complex64::new(ctx.qp((-2 * m.k - 4 * m.l) as i64), 0.0),
        GroupTag::Phi => Complex64::new(ctx.qp((-m.k - 2 * m.l) as i64), 0.0),
        GroupTag::BetaA => ctx.qpc((2.0 * u + 4.0 * v) * i * z),
    }
}

/// Apply a group action to an element.
pub fn apply_group(ctx: &QContext, g: GroupTag, z: Complex64, a: &AlgElement) -> AlgElement {
    let mut out = AlgElement::zero();
    for (m, c) in a.iter() {
        out.push(*m, c * group_factor(ctx, g, z, m));
    }
    out.pruned()
}
