//! Comultiplication and counit.
//!
//! `Δ` is the unique algebra homomorphism with
//!
//! ```text
//! Δα  = α⊗α − qγ*⊗γ        Δγ  = γ⊗α + α*⊗γ
//! Δα* = α*⊗α* − qγ⊗γ*      Δγ* = α⊗γ* + γ*⊗α*
//! ```
//!
//! (the matrix coproduct of `W² = (α*, −qγ; γ*, α)`), and the counit reads
//! off the same corepresentation: `ε(α) = ε(α*) = 1`, `ε(γ) = ε(γ*) = 0`.

use super::{mono_mul, multiply, AlgElement, Gen, PBWMonomial, QContext};
use num_complex::Complex64;
use std::collections::BTreeMap;

/// Sparse element of `A_q ⊗ A_q` over pairs of PBW monomials.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TensorElement {
    terms: BTreeMap<(PBWMonomial, PBWMonomial), Complex64>,
}

impl TensorElement {
    /// The zero tensor.
    pub fn zero() -> Self {
        TensorElement::default()
    }

    /// `1 ⊗ 1`.
    pub fn one() -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(
            (PBWMonomial::unit(), PBWMonomial::unit()),
            Complex64::new(1.0, 0.0),
        );
        TensorElement { terms }
    }

    /// Elementary tensor `a ⊗ b`.
    pub fn pure(a: &AlgElement, b: &AlgElement) -> Self {
        let mut out = TensorElement::zero();
        for (ma, ca) in a.iter() {
            for (mb, cb) in b.iter() {
                out.push(*ma, *mb, ca * cb);
            }
        }
        out.pruned()
    }

    /// Iterate over stored `((left, right), coefficient)` triples.
    pub fn iter(&self) -> impl Iterator<Item = (&(PBWMonomial, PBWMonomial), &Complex64)> {
        self.terms.iter()
    }

    /// Number of stored terms.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    /// Whether the tensor is zero.
    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest coefficient magnitude.
    pub fn norm_inf(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub(crate) fn push(&mut self, l: PBWMonomial, r: PBWMonomial, c: Complex64) {
        let e = self.terms.entry((l, r)).or_insert(Complex64::new(0.0, 0.0));
        *e += c;
    }

    /// Sum of tensors.
    pub fn add(&self, other: &TensorElement) -> TensorElement {
        let mut out = self.clone();
        for ((l, r), c) in other.iter() {
            out.push(*l, *r, *c);
        }
        out.pruned()
    }

    /// Difference of tensors.
    pub fn sub(&self, other: &TensorElement) -> TensorElement {
        let mut out = self.clone();
        for ((l, r), c) in other.iter() {
            out.push(*l, *r, -*c);
        }
        out.pruned()
    }

    /// Scalar multiple.
    pub fn scale(&self, c: Complex64) -> TensorElement {
        let terms = self.terms.iter().map(|(k, v)| (*k, v * c)).collect();
        TensorElement { terms }.pruned()
    }

    /// Drop exactly-cancelled terms.
    ///
    /// No relative threshold here: coproduct powers legitimately carry
    /// coefficients spanning `q^{±O(m²)}`, so magnitude-based pruning
    /// would delete the small real terms the Haar solve reads.
    pub fn pruned(mut self) -> TensorElement {
        self.terms.retain(|_, c| c.norm() > 0.0);
        self
    }

    /// Max coefficient magnitude of the difference.
    pub fn distance(&self, other: &TensorElement) -> f64 {
        self.sub(other).norm_inf()
    }

    /// Apply a linear functional `f` to the right leg: `(id ⊗ f)`.
    pub fn contract_right(&self, f: impl Fn(&PBWMonomial) -> Complex64) -> AlgElement {
        let mut out = AlgElement::zero();
        for ((l, r), c) in self.iter() {
            let w = f(r);
            if w != Complex64::new(0.0, 0.0) {
                out.push(*l, c * w);
            }
        }
        out.pruned()
    }

    /// Apply a linear functional `f` to the left leg: `(f ⊗ id)`.
    pub fn contract_left(&self, f: impl Fn(&PBWMonomial) -> Complex64) -> AlgElement {
        let mut out = AlgElement::zero();
        for ((l, r), c) in self.iter() {
            let w = f(l);
            if w != Complex64::new(0.0, 0.0) {
                out.push(*r, c * w);
            }
        }
        out.pruned()
    }
}

/// Componentwise product in `A_q ⊗ A_q`.
pub fn tensor_mul(ctx: &QContext, a: &TensorElement, b: &TensorElement) -> TensorElement {
    let q = ctx.q();
    let mut out = TensorElement::zero();
    for ((la, ra), ca) in a.iter() {
        for ((lb, rb), cb) in b.iter() {
            let c = ca * cb;
            for (lm, lw) in mono_mul(q, *la, *lb) {
                for (rm, rw) in mono_mul(q, *ra, *rb) {
                    out.push(lm, rm, c * (lw * rw));
                }
            }
        }
    }
    out.pruned()
}

/// Coproduct of a single generator, read off the matrix coproduct of `W²`.
pub fn delta_generator(q: f64, g: Gen) -> TensorElement {
    let one = Complex64::new(1.0, 0.0);
    let negq = Complex64::new(-q, 0.0);
    let mono = |k: i32, l: i32| PBWMonomial::new(k, l, 0);
    let mut t = TensorElement::zero();
    match g {
        Gen::Alpha => {
            t.push(mono(1, 0), mono(1, 0), one);
            t.push(mono(0, -1), mono(0, 1), negq);
        }
        Gen::AlphaStar => {
            t.push(mono(-1, 0), mono(-1, 0), one);
            t.push(mono(0, 1), mono(0, -1), negq);
        }
        Gen::Gamma => {
            t.push(mono(0, 1), mono(1, 0), one);
            t.push(mono(-1, 0), mono(0, 1), one);
        }
        Gen::GammaStar => {
            t.push(mono(1, 0), mono(0, -1), one);
            t.push(mono(0, -1), mono(-1, 0), one);
        }
    }
    t
}

/// Comultiplication `Δ: A_q → A_q ⊗ A_q`.
pub fn comultiply(ctx: &QContext, a: &AlgElement) -> TensorElement {
    let d_alpha = delta_generator(ctx.q(), Gen::Alpha);
    let d_alphastar = delta_generator(ctx.q(), Gen::AlphaStar);
    let d_gamma = delta_generator(ctx.q(), Gen::Gamma);
    let d_gammastar = delta_generator(ctx.q(), Gen::GammaStar);
    // Δy = Δγ* · Δγ.
    let d_y = tensor_mul(ctx, &d_gammastar, &d_gamma);

    let mut out = TensorElement::zero();
    for (m, c) in a.iter() {
        let mut t = TensorElement::one();
        let (d_a, ka) = if m.k >= 0 { (&d_alpha, m.k) } else { (&d_alphastar, -m.k) };
        for _ in 0..ka {
            t = tensor_mul(ctx, &t, d_a);
        }
        let (d_g, lg) = if m.l >= 0 { (&d_gamma, m.l) } else { (&d_gammastar, -m.l) };
        for _ in 0..lg {
            t = tensor_mul(ctx, &t, d_g);
        }
        for _ in 0..m.m {
            t = tensor_mul(ctx, &t, &d_y);
        }
        out = out.add(&t.scale(*c));
    }
    out.pruned()
}

/// Counit `ε`: kills every monomial with a `γ`-part or a `y`-part.
pub fn counit(a: &AlgElement) -> Complex64 {
    let mut out = Complex64::new(0.0, 0.0);
    for (m, c) in a.iter() {
        if m.l == 0 && m.m == 0 {
            out += c;
        }
    }
    out
}

/// Multiplication map `A_q ⊗ A_q → A_q`.
pub fn tensor_collapse(ctx: &QContext, t: &TensorElement) -> AlgElement {
    let mut out = AlgElement::zero();
    for ((l, r), c) in t.iter() {
        let prod = multiply(
            ctx,
            &AlgElement::from_monomial(*l, Complex64::new(1.0, 0.0)),
            &AlgElement::from_monomial(*r, Complex64::new(1.0, 0.0)),
        );
        out = out.add(&prod.scale(*c));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::{haar, star};
    use super::*;

    fn ctx() -> QContext {
        QContext::new(0.5, 1e-9).unwrap()
    }

    #[test]
    fn coproduct_of_unit_is_pure_tensor() {
        let d = comultiply(&ctx(), &AlgElement::one());
        assert_eq!(d, TensorElement::one());
    }

    #[test]
    fn coproduct_of_gammastar_matches_matrix_form() {
        let ctx = ctx();
        let d = comultiply(&ctx, &AlgElement::generator(Gen::GammaStar));
        let mut want = TensorElement::zero();
        let one = Complex64::new(1.0, 0.0);
        want.push(PBWMonomial::new(1, 0, 0), PBWMonomial::new(0, -1, 0), one);
        want.push(PBWMonomial::new(0, -1, 0), PBWMonomial::new(-1, 0, 0), one);
        assert!(d.distance(&want) == 0.0);
    }

    #[test]
    fn coproduct_is_algebra_homomorphism_on_samples() {
        let ctx = ctx();
        let a = AlgElement::from_monomial(PBWMonomial::new(1, 1, 0), Complex64::new(0.7, 0.2));
        let b = AlgElement::from_monomial(PBWMonomial::new(-1, 0, 1), Complex64::new(-0.4, 1.0));
        let lhs = comultiply(&ctx, &super::multiply(&ctx, &a, &b));
        let rhs = tensor_mul(&ctx, &comultiply(&ctx, &a), &comultiply(&ctx, &b));
        assert!(lhs.distance(&rhs) < 1e-12 * lhs.norm_inf().max(1.0));
    }

    #[test]
    fn counit_law_on_pbw_samples() {
        let ctx = ctx();
        let samples = [
            PBWMonomial::new(2, -1, 1),
            PBWMonomial::new(-1, 2, 0),
            PBWMonomial::new(0, 0, 2),
            PBWMonomial::new(1, 0, 0),
        ];
        for m in samples {
            let a = AlgElement::from_monomial(m, Complex64::new(1.0, -0.3));
            let d = comultiply(&ctx, &a);
            // (ε⊗id)Δ = id and (id⊗ε)Δ = id.
            let left = d.contract_left(|mm| {
                if mm.l == 0 && mm.m == 0 {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            });
            let right = d.contract_right(|mm| {
                if mm.l == 0 && mm.m == 0 {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            });
            assert!(left.distance(&a) < 1e-12 * a.norm_inf());
            assert!(right.distance(&a) < 1e-12 * a.norm_inf());
        }
    }

    #[test]
    fn haar_invariance_both_sides_low_degree() {
        let ctx = ctx();
        // (id⊗h)Δ(x) = h(x)·1 = (h⊗id)Δ(x) on monomials of degree ≤ 6.
        for k in -2i32..=2 {
            for l in -2i32..=2 {
                for m in 0u32..=1 {
                    let mono = PBWMonomial::new(k, l, m);
                    if mono.degree() > 6 {
                        continue;
                    }
                    let a = AlgElement::from_monomial(mono, Complex64::new(1.0, 0.0));
                    let hx = haar(&ctx, &a);
                    let d = comultiply(&ctx, &a);
                    let via_right = d.contract_right(|mm| {
                        let e = AlgElement::from_monomial(*mm, Complex64::new(1.0, 0.0));
                        haar(&ctx, &e)
                    });
                    let via_left = d.contract_left(|mm| {
                        let e = AlgElement::from_monomial(*mm, Complex64::new(1.0, 0.0));
                        haar(&ctx, &e)
                    });
                    let want = AlgElement::one().scale(hx);
                    assert!(via_right.distance(&want) < 1e-12, "right invariance at {mono:?}");
                    assert!(via_left.distance(&want) < 1e-12, "left invariance at {mono:?}");
                }
            }
        }
    }

    #[test]
    fn haar_is_a_state_on_star_squares() {
        let ctx = ctx();
        let a = AlgElement::from_monomial(PBWMonomial::new(1, -1, 0), Complex64::new(0.6, 0.1))
            .add(&AlgElement::one().scale(Complex64::new(0.2, 0.0)));
        let aa = super::super::multiply(&ctx, &a, &star(&ctx, &a));
        let v = haar(&ctx, &aa);
        assert!(v.im.abs() < 1e-14);
        assert!(v.re > 0.0);
    }
}
