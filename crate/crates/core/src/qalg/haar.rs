//! Haar weights by the invariance solve.
//!
//! Right invariance `(id⊗h)Δ(a) = h(a)·1` applied to `a = y^m` pins the
//! weights `H_m = h(y^m)` one degree at a time: expanding `Δ(y^m)` and
//! contracting the right leg with the already-known `H_0..H_{m−1}` plus the
//! unknown `H_m` leaves an element whose `y^m` coefficient must vanish.
//! Every other coefficient must vanish too, which is asserted as a
//! consistency check on the solve.

use super::{comultiply, tensor_mul, AlgElement, PBWMonomial, QContext, TensorElement};
use num_complex::Complex64;

pub(crate) struct HaarCache {
    /// `weights[m] = H_m`; `H_0 = 1`.
    weights: Vec<f64>,
    /// `Δ(y^{weights.len() − 1})`, carried so extensions are incremental.
    dy_pow: Option<TensorElement>,
}

impl HaarCache {
    pub(crate) fn new() -> Self {
        HaarCache { weights: vec![1.0], dy_pow: None }
    }

    pub(crate) fn weight(&mut self, ctx: &QContext, m: u32) -> f64 {
        while self.weights.len() <= m as usize {
            self.extend(ctx);
        }
        self.weights[m as usize]
    }

    fn extend(&mut self, ctx: &QContext) {
        let m_next = self.weights.len() as u32;
        let dy = {
            let y = AlgElement::from_monomial(PBWMonomial::new(0, 0, 1), Complex64::new(1.0, 0.0));
            comultiply(ctx, &y)
        };
        let prev = match self.dy_pow.take() {
            Some(t) => t,
            None => TensorElement::one(),
        };
        let cur = tensor_mul(ctx, &prev, &dy);

        // Split (id⊗h)Δ(y^m) into the part weighted by known H_j and the
        // coefficient element multiplying the unknown H_m. The absolute
        // masses accumulate the pre-cancellation scale per left monomial.
        let mut known = AlgElement::zero();
        let mut unknown = AlgElement::zero();
        let mut mass: std::collections::BTreeMap<PBWMonomial, f64> = Default::default();
        for ((l, r), c) in cur.iter() {
            if r.k != 0 || r.l != 0 {
                continue;
            }
            if r.m == m_next {
                unknown.push(*l, *c);
            } else {
                known.push(*l, *c * self.weights[r.m as usize]);
                *mass.entry(*l).or_default() += c.norm() * self.weights[r.m as usize].abs();
            }
        }
        let target = PBWMonomial::new(0, 0, m_next);
        let denom = unknown.coeff(&target).re;
        assert!(
            denom.abs() > 1e-12,
            "haar invariance solve degenerate at m = {m_next}"
        );
        let h_m = -known.coeff(&target).re / denom;
        // Residual check: with H_m substituted, only the unit component of
        // (id⊗h)Δ(y^m) may survive. Judged monomial by monomial against the
        // pre-cancellation scale, since the raw coefficients of Δ(y^m) grow
        // like q^{−O(m²)} and cancel down to the unit.
        let total = known.add(&unknown.scale(Complex64::new(h_m, 0.0)));
        for (mono, c) in total.iter() {
            if *mono != PBWMonomial::unit() {
                let scale = mass.get(mono).copied().unwrap_or(0.0)
                    + h_m.abs() * unknown.coeff(mono).norm()
                    + 1.0;
                assert!(
                    c.norm() < 1e-9 * scale,
                    "haar invariance residual at m = {m_next}, monomial {mono:?}: \
                     |c| = {:.3e}, scale = {:.3e}, q = {}",
                    c.norm(),
                    scale,
                    ctx.q()
                );
            }
        }
        self.weights.push(h_m);
        self.dy_pow = Some(cur);
    }
}
