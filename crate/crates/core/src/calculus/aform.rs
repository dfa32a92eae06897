//! Forms with free algebra coefficients.
//!
//! An [`AForm`] stores one PBW-basis coefficient per invariant basis form,
//! `ω = Σ_i a_i e_i`, with no corepresentation bookkeeping. Everything is
//! computed from first principles: the differential runs through the full
//! coproduct (`E_r = (id⊗χ_r)Δ`), products multiply in the PBW basis, and
//! the integral and inner product evaluate the Haar state. This
//! representation is the independent oracle for the index-level operators
//! on [`super::Form`], and the only place where a product of two
//! matrix-coefficient forms exists exactly.

use super::{Form, InvariantExterior, BETA_EXP, GRADE, MOVE_WEIGHT, SIGMA_EXP};
use crate::corep::{e_alg, w_entry};
use crate::qalg::{apply_group, haar, haar_inner, multiply, AlgElement, GroupTag, QContext};
use crate::Result;
use num_complex::Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Form `Σ_i a_i e_i` with algebra coefficients.
#[derive(Clone, Debug)]
pub struct AForm {
    comp: [AlgElement; 8],
}

impl AForm {
    /// Zero form.
    pub fn zero() -> AForm {
        AForm {
            comp: std::array::from_fn(|_| AlgElement::zero()),
        }
    }

    /// Form `a · e_i`.
    pub fn from_component(id: usize, a: AlgElement) -> AForm {
        let mut f = AForm::zero();
        f.comp[id] = a;
        f
    }

    /// Expand a matrix-coefficient form into PBW coefficients.
    pub fn from_matrix(ctx: &QContext, f: &Form) -> Result<AForm> {
        let mut out = AForm::zero();
        for ((w, id), c) in f.iter() {
            let e = w_entry(ctx, *w)?;
            out.comp[*id] = out.comp[*id].add(&e.scale(*c));
        }
        Ok(out)
    }

    /// Coefficient of one invariant basis form.
    pub fn component(&self, id: usize) -> &AlgElement {
        &self.comp[id]
    }

    /// Largest PBW coefficient magnitude across components.
    pub fn norm_inf(&self) -> f64 {
        self.comp.iter().map(|a| a.norm_inf()).fold(0.0, f64::max)
    }

    /// Whether every component vanishes.
    pub fn is_empty(&self) -> bool {
        self.comp.iter().all(|a| a.is_empty())
    }

    /// Common grade of the nonzero components, if homogeneous.
    pub fn grade(&self) -> Option<u32> {
        let mut g = None;
        for (i, a) in self.comp.iter().enumerate() {
            if a.is_empty() {
                continue;
            }
            match g {
                None => g = Some(GRADE[i]),
                Some(h) if h == GRADE[i] => {}
                _ => return None,
            }
        }
        g
    }

    /// Sum.
    pub fn add(&self, other: &AForm) -> AForm {
        AForm {
            comp: std::array::from_fn(|i| self.comp[i].add(&other.comp[i])),
        }
    }

    /// Difference.
    pub fn sub(&self, other: &AForm) -> AForm {
        AForm {
            comp: std::array::from_fn(|i| self.comp[i].sub(&other.comp[i])),
        }
    }

    /// Scalar multiple.
    pub fn scale(&self, c: Complex64) -> AForm {
        AForm {
            comp: std::array::from_fn(|i| self.comp[i].scale(c)),
        }
    }

    /// Largest coefficient of the difference.
    pub fn distance(&self, other: &AForm) -> f64 {
        self.sub(other).norm_inf()
    }
}

/// Move an invariant form of bimodule weight `w` rightwards past an
/// algebra element: diagonal factor `q^{−w(u+v)}` per PBW monomial.
fn move_past(ctx: &QContext, weight: i64, a: &AlgElement) -> AlgElement {
    let mut out = AlgElement::zero();
    for (m, c) in a.iter() {
        out.push(*m, c * ctx.qp(-weight * (m.k + m.l) as i64));
    }
    out
}

/// Wedge product in PBW coefficients: exact for arbitrary factors.
pub fn wedge_alg(ctx: &QContext, ext: &InvariantExterior, a: &AForm, b: &AForm) -> AForm {
    let mut out = AForm::zero();
    for i in 0..8 {
        if a.comp[i].is_empty() {
            continue;
        }
        for j in 0..8 {
            if b.comp[j].is_empty() {
                continue;
            }
            if let Some((t, s)) = ext.prod(i, j) {
                let moved = move_past(ctx, MOVE_WEIGHT[i], &b.comp[j]);
                let prod = multiply(ctx, &a.comp[i], &moved);
                out.comp[t] = out.comp[t].add(&prod.scale(Complex64::new(s, 0.0)));
            }
        }
    }
    out
}

/// Differential from first principles: coproduct-contracted derivations
/// against the wedge table, plus the invariant Cartan–Maurer part.
pub fn differential_alg(ctx: &QContext, ext: &InvariantExterior, f: &AForm) -> AForm {
    let mut out = AForm::zero();
    for i in 0..8 {
        if f.comp[i].is_empty() {
            continue;
        }
        if let Some((t, s)) = ext.d_inv(i) {
            out.comp[t] = out.comp[t].add(&f.comp[i].scale(Complex64::new(s, 0.0)));
        }
        for r in 1..=3u8 {
            if let Some((t, s)) = ext.prod(r as usize, i) {
                let der = e_alg(ctx, r, &f.comp[i]);
                out.comp[t] = out.comp[t].add(&der.scale(Complex64::new(s, 0.0)));
            }
        }
    }
    out
}

/// Co-differential from first principles. The adjoint functionals reduce
/// to the originals: `χ₁* = −q⁻¹χ₃`, `χ₂* = χ₂`, `χ₃* = −qχ₁`.
pub fn codifferential_alg(ctx: &QContext, ext: &InvariantExterior, f: &AForm) -> AForm {
    let q = ctx.q();
    let mut out = AForm::zero();
    for i in 0..8 {
        if f.comp[i].is_empty() {
            continue;
        }
        if let Some((t, s)) = ext.dstar_inv(i) {
            out.comp[t] = out.comp[t].add(&f.comp[i].scale(Complex64::new(s, 0.0)));
        }
        for r in 1..=3u8 {
            if let Some((t, s)) = ext.mstar(r, i) {
                let der = match r {
                    1 => e_alg(ctx, 3, &f.comp[i]).scale(Complex64::new(-1.0 / q, 0.0)),
                    2 => e_alg(ctx, 2, &f.comp[i]),
                    _ => e_alg(ctx, 1, &f.comp[i]).scale(Complex64::new(-q, 0.0)),
                };
                out.comp[t] = out.comp[t].add(&der.scale(Complex64::new(s, 0.0)));
            }
        }
    }
    out
}

/// Graded star: `(a e_i)* = e_i* a*`, with the starred invariant form
/// moved back past the starred coefficient.
pub fn star_alg(ctx: &QContext, ext: &InvariantExterior, f: &AForm) -> AForm {
    let mut out = AForm::zero();
    for i in 0..8 {
        if f.comp[i].is_empty() {
            continue;
        }
        let (j, s) = ext.star(i);
        let starred = crate::qalg::star(ctx, &f.comp[i]);
        let moved = move_past(ctx, MOVE_WEIGHT[j], &starred);
        out.comp[j] = out.comp[j].add(&moved.scale(Complex64::new(s, 0.0)));
    }
    out
}

/// Hodge operator, left-linear over the coefficients.
pub fn hodge_alg(ext: &InvariantExterior, f: &AForm) -> AForm {
    let mut out = AForm::zero();
    for i in 0..8 {
        if f.comp[i].is_empty() {
            continue;
        }
        let (t, s) = ext.hodge(i);
        out.comp[t] = out.comp[t].add(&f.comp[i].scale(Complex64::new(s, 0.0)));
    }
    out
}

/// Integral: the Haar state of the top-grade coefficient.
pub fn integral_alg(ctx: &QContext, f: &AForm) -> Complex64 {
    haar(ctx, &f.comp[7])
}

/// Inner product `⟨a e_i | b e_j⟩ = h(ab*) ⟨e_i|e_j⟩` with the rebalanced
/// diagonal invariant gram.
pub fn inner_alg(ctx: &QContext, ext: &InvariantExterior, a: &AForm, b: &AForm) -> Complex64 {
    let mut acc = ZERO;
    for i in 0..8 {
        if a.comp[i].is_empty() || b.comp[i].is_empty() {
            continue;
        }
        acc += haar_inner(ctx, &a.comp[i], &b.comp[i]) * ext.gram(i);
    }
    acc
}

/// Twist `σ` on algebra coefficients and invariant part together.
pub fn twist_alg(ctx: &QContext, f: &AForm) -> AForm {
    let mut out = AForm::zero();
    for i in 0..8 {
        if f.comp[i].is_empty() {
            continue;
        }
        let a = apply_group(ctx, GroupTag::SigmaA, ZERO, &f.comp[i]);
        out.comp[i] = a.scale(Complex64::new(ctx.qp(SIGMA_EXP[i]), 0.0));
    }
    out
}

/// One-parameter group `β_z` with `β_i = σ`.
pub fn group_beta_alg(ctx: &QContext, z: Complex64, f: &AForm) -> AForm {
    let i_unit = Complex64::new(0.0, 1.0);
    let mut out = AForm::zero();
    for i in 0..8 {
        if f.comp[i].is_empty() {
            continue;
        }
        let a = apply_group(ctx, GroupTag::BetaA, z, &f.comp[i]);
        out.comp[i] = a.scale(ctx.qpc(BETA_EXP[i] as f64 * i_unit * z));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::form::{self, random_form};
    use super::*;
    use crate::corep::WIndex;
    use crate::qalg::Gen;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ctx() -> QContext {
        QContext::new(0.5, 1e-9).unwrap()
    }

    fn ext() -> InvariantExterior {
        InvariantExterior::new(0.5).unwrap()
    }

    fn one() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    fn w(dim: u32, p2: i32, k2: i32) -> WIndex {
        WIndex::new(dim, p2, k2).unwrap()
    }

    fn to_alg(ctx: &QContext, f: &Form) -> AForm {
        AForm::from_matrix(ctx, f).unwrap()
    }

    #[test]
    fn matrix_expansion_recovers_generators() {
        let ctx = ctx();
        let f = Form::basis(w(2, 1, 1), 0, one()).unwrap();
        let a = to_alg(&ctx, &f);
        assert!(a.component(0).distance(&AlgElement::generator(Gen::Alpha)) < 1e-12);
        assert!(a.grade() == Some(0));
    }

    #[test]
    fn wedge_agrees_with_the_index_level_product_where_both_exist() {
        let (ctx, ext) = (ctx(), ext());
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..6 {
            let inv = random_form(&mut rng, 1, 3, None);
            let mat = random_form(&mut rng, 4, 4, None);
            for (l, r) in [(&inv, &mat), (&mat, &inv)] {
                let via_form = form::wedge(&ctx, &ext, l, r).unwrap();
                let direct = wedge_alg(&ctx, &ext, &to_alg(&ctx, l), &to_alg(&ctx, r));
                let d = to_alg(&ctx, &via_form).distance(&direct);
                assert!(d < 1e-10, "wedge mismatch {d}");
            }
        }
    }

    #[test]
    fn differential_matches_the_index_level_operator() {
        let (ctx, ext) = (ctx(), ext());
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..8 {
            let f = random_form(&mut rng, 4, 5, None);
            let via_form = to_alg(&ctx, &form::differential(&ctx, &ext, &f).unwrap());
            let direct = differential_alg(&ctx, &ext, &to_alg(&ctx, &f));
            let d = via_form.distance(&direct);
            assert!(d < 1e-10 * direct.norm_inf().max(1.0), "residual {d}");
        }
    }

    #[test]
    fn codifferential_matches_the_index_level_operator() {
        let (ctx, ext) = (ctx(), ext());
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..8 {
            let f = random_form(&mut rng, 4, 5, None);
            let via_form = to_alg(&ctx, &form::codifferential(&ctx, &ext, &f).unwrap());
            let direct = codifferential_alg(&ctx, &ext, &to_alg(&ctx, &f));
            let d = via_form.distance(&direct);
            assert!(d < 1e-10 * direct.norm_inf().max(1.0), "residual {d}");
        }
    }

    #[test]
    fn differential_is_a_graded_derivation() {
        let (ctx, ext) = (ctx(), ext());
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for g1 in 0..=2u32 {
            for g2 in 0..=(2 - g1) {
                let x = to_alg(&ctx, &random_form(&mut rng, 3, 3, Some(g1)));
                let y = to_alg(&ctx, &random_form(&mut rng, 3, 3, Some(g2)));
                let lhs = differential_alg(&ctx, &ext, &wedge_alg(&ctx, &ext, &x, &y));
                let sign = if g1 % 2 == 1 { -1.0 } else { 1.0 };
                let rhs = wedge_alg(&ctx, &ext, &differential_alg(&ctx, &ext, &x), &y).add(
                    &wedge_alg(&ctx, &ext, &x, &differential_alg(&ctx, &ext, &y))
                        .scale(Complex64::new(sign, 0.0)),
                );
                let d = lhs.distance(&rhs);
                let scale = lhs.norm_inf().max(rhs.norm_inf()).max(1.0);
                assert!(d < 1e-10 * scale, "Leibniz fails at grades ({g1},{g2}): {d}");
            }
        }
    }

    #[test]
    fn differential_commutes_with_the_star() {
        let (ctx, ext) = (ctx(), ext());
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        for _ in 0..6 {
            let f = to_alg(&ctx, &random_form(&mut rng, 3, 5, None));
            let lhs = differential_alg(&ctx, &ext, &star_alg(&ctx, &ext, &f));
            let rhs = star_alg(&ctx, &ext, &differential_alg(&ctx, &ext, &f));
            let d = lhs.distance(&rhs);
            assert!(d < 1e-10 * lhs.norm_inf().max(1.0), "star residual {d}");
        }
    }

    #[test]
    fn star_is_involutive_on_forms() {
        let (ctx, ext) = (ctx(), ext());
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..6 {
            let f = to_alg(&ctx, &random_form(&mut rng, 3, 5, None));
            let ff = star_alg(&ctx, &ext, &star_alg(&ctx, &ext, &f));
            assert!(ff.distance(&f) < 1e-12 * f.norm_inf().max(1.0));
        }
    }

    #[test]
    fn integral_evaluates_haar_on_top_grade_and_kills_the_rest() {
        let ctx = ctx();
        let a = w_entry(&ctx, w(3, 0, 0)).unwrap();
        let f = AForm::from_component(7, a.clone());
        let want = haar(&ctx, &a);
        assert!((integral_alg(&ctx, &f) - want).norm() < 1e-14);
        let g = AForm::from_component(4, a);
        assert_eq!(integral_alg(&ctx, &g), ZERO);
    }

    #[test]
    fn integral_is_closed() {
        let (ctx, ext) = (ctx(), ext());
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for _ in 0..6 {
            let f = to_alg(&ctx, &random_form(&mut rng, 3, 5, Some(2)));
            let v = integral_alg(&ctx, &differential_alg(&ctx, &ext, &f));
            assert!(v.norm() < 1e-12, "∫d ≠ 0: {v}");
        }
    }

    #[test]
    fn integral_is_a_twisted_graded_trace() {
        let (ctx, ext) = (ctx(), ext());
        // All invariant basis pairs.
        for i in 0..8usize {
            for j in 0..8usize {
                let x = to_alg(&ctx, &Form::invariant(i, one()).unwrap());
                let y = to_alg(&ctx, &Form::invariant(j, one()).unwrap());
                let lhs = integral_alg(&ctx, &wedge_alg(&ctx, &ext, &x, &y));
                let sign = if (GRADE[i] * GRADE[j]) % 2 == 1 { -1.0 } else { 1.0 };
                let rhs = integral_alg(
                    &ctx,
                    &wedge_alg(&ctx, &ext, &twist_alg(&ctx, &y), &x),
                ) * sign;
                assert!((lhs - rhs).norm() < 1e-12, "trace law fails at ({i},{j})");
            }
        }
        // Mixed algebra-coefficient samples.
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        for (g1, g2) in [(1u32, 2u32), (0, 3), (2, 1), (3, 0)] {
            let x = to_alg(&ctx, &random_form(&mut rng, 3, 4, Some(g1)));
            let y = to_alg(&ctx, &random_form(&mut rng, 3, 4, Some(g2)));
            let lhs = integral_alg(&ctx, &wedge_alg(&ctx, &ext, &x, &y));
            let sign = if (g1 * g2) % 2 == 1 { -1.0 } else { 1.0 };
            let rhs =
                integral_alg(&ctx, &wedge_alg(&ctx, &ext, &twist_alg(&ctx, &y), &x)) * sign;
            let scale = lhs.norm().max(rhs.norm()).max(1.0);
            assert!(
                (lhs - rhs).norm() < 1e-11 * scale,
                "trace law fails at grades ({g1},{g2}): {lhs} vs {rhs}"
            );
        }
    }

    #[test]
    fn integral_is_invariant_under_twist_and_beta() {
        let ctx = ctx();
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        let z = Complex64::new(0.7, 0.2);
        for _ in 0..6 {
            let f = to_alg(&ctx, &random_form(&mut rng, 3, 6, None));
            let base = integral_alg(&ctx, &f);
            let tw = integral_alg(&ctx, &twist_alg(&ctx, &f));
            let bz = integral_alg(&ctx, &group_beta_alg(&ctx, z, &f));
            assert!((base - tw).norm() < 1e-12 * base.norm().max(1.0));
            assert!((base - bz).norm() < 1e-12 * base.norm().max(1.0));
        }
    }

    #[test]
    fn twist_conjugated_by_star_is_its_inverse() {
        let (ctx, ext) = (ctx(), ext());
        let mut rng = ChaCha8Rng::seed_from_u64(59);
        for _ in 0..6 {
            let f = to_alg(&ctx, &random_form(&mut rng, 3, 5, None));
            let inner1 = twist_alg(&ctx, &star_alg(&ctx, &ext, &f));
            let back = twist_alg(&ctx, &star_alg(&ctx, &ext, &inner1));
            assert!(back.distance(&f) < 1e-12 * f.norm_inf().max(1.0));
        }
    }

    /// The companion conjugation of the pairing, extended to coefficients
    /// exactly like the star.
    fn conj_pairing(ctx: &QContext, f: &AForm) -> AForm {
        let table = super::super::pairing_conjugation(ctx.q());
        let mut out = AForm::zero();
        for i in 0..8 {
            if f.comp[i].is_empty() {
                continue;
            }
            let (j, s) = table[i];
            let starred = crate::qalg::star(ctx, &f.comp[i]);
            let moved = move_past(ctx, MOVE_WEIGHT[j], &starred);
            out.comp[j] = out.comp[j].add(&moved.scale(Complex64::new(s, 0.0)));
        }
        out
    }

    #[test]
    fn hodge_satisfies_the_pairing_identity() {
        let (ctx, ext) = (ctx(), ext());
        // ∫ ω⋆ L(ω′) = ⟨ω′|ω⟩ on all invariant basis pairs, then on
        // matrix-coefficient samples; ⋆ is the companion conjugation.
        for i in 0..8usize {
            for j in 0..8usize {
                let omega = to_alg(&ctx, &Form::invariant(i, one()).unwrap());
                let omega_p = to_alg(&ctx, &Form::invariant(j, one()).unwrap());
                let lhs = integral_alg(
                    &ctx,
                    &wedge_alg(
                        &ctx,
                        &ext,
                        &conj_pairing(&ctx, &omega),
                        &hodge_alg(&ext, &omega_p),
                    ),
                );
                let rhs = inner_alg(&ctx, &ext, &omega_p, &omega);
                assert!((lhs - rhs).norm() < 1e-12, "pairing fails at ({i},{j})");
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        for _ in 0..6 {
            let omega = to_alg(&ctx, &random_form(&mut rng, 3, 4, None));
            let omega_p = to_alg(&ctx, &random_form(&mut rng, 3, 4, None));
            let lhs = integral_alg(
                &ctx,
                &wedge_alg(
                    &ctx,
                    &ext,
                    &conj_pairing(&ctx, &omega),
                    &hodge_alg(&ext, &omega_p),
                ),
            );
            let rhs = inner_alg(&ctx, &ext, &omega_p, &omega);
            let scale = lhs.norm().max(rhs.norm()).max(1.0);
            assert!((lhs - rhs).norm() < 1e-11 * scale, "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn pairing_with_the_involution_scales_the_coupled_directions() {
        // Replacing ⋆ by the involution in the pairing identity multiplies
        // the diagonal by q⁻² on ids {1,4} and by q² on ids {3,5}.
        let (ctx, ext) = (ctx(), ext());
        for i in 0..8usize {
            let omega = to_alg(&ctx, &Form::invariant(i, one()).unwrap());
            let lhs = integral_alg(
                &ctx,
                &wedge_alg(
                    &ctx,
                    &ext,
                    &star_alg(&ctx, &ext, &omega),
                    &hodge_alg(&ext, &omega),
                ),
            );
            let rhs = inner_alg(&ctx, &ext, &omega, &omega);
            let expect = match i {
                1 | 4 => ctx.qp(-2),
                3 | 5 => ctx.qp(2),
                _ => 1.0,
            };
            assert!(
                ((lhs / rhs) - Complex64::new(expect, 0.0)).norm() < 1e-12,
                "ratio off at id {i}: {}",
                lhs / rhs
            );
        }
    }

    #[test]
    fn inner_product_agrees_with_the_blockwise_gram() {
        let (ctx, ext) = (ctx(), ext());
        let mut rng = ChaCha8Rng::seed_from_u64(67);
        for _ in 0..6 {
            let a = random_form(&mut rng, 3, 5, None);
            let b = random_form(&mut rng, 3, 5, None);
            let block = form::inner(&ctx, &ext, &a, &b).unwrap();
            let pbw = inner_alg(&ctx, &ext, &to_alg(&ctx, &a), &to_alg(&ctx, &b));
            let scale = block.norm().max(pbw.norm()).max(1.0);
            assert!(
                (block - pbw).norm() < 1e-11 * scale,
                "gram mismatch: {block} vs {pbw}"
            );
        }
    }

    #[test]
    fn beta_at_i_equals_the_twist() {
        let ctx = ctx();
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        let f = to_alg(&ctx, &random_form(&mut rng, 3, 6, None));
        let bi = group_beta_alg(&ctx, Complex64::new(0.0, 1.0), &f);
        assert!(bi.distance(&twist_alg(&ctx, &f)) < 1e-12 * f.norm_inf().max(1.0));
    }

    #[test]
    fn relative_eq_smoke_for_matrix_norm_values() {
        let ctx = ctx();
        let f = Form::basis(w(2, -1, -1), 0, one()).unwrap();
        let a = to_alg(&ctx, &f);
        let n = haar_inner(&ctx, a.component(0), a.component(0));
        assert_relative_eq!(n.im, 0.0, epsilon = 1e-14);
        assert!(n.re > 0.0);
    }
}
