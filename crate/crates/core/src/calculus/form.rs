//! Forms in matrix-coefficient coordinates.
//!
//! A [`Form`] is a finite sum `Σ c · W^M_{pk} ξ` over pairs of a matrix
//! coefficient and an invariant basis form, the canonical left-coefficient
//! normal form of a form of the calculus. On this basis the differential
//! acts index-locally,
//!
//! ```text
//! d(W ξ) = Σ_r E_r(W) η_r ξ + W dξ
//! d(W^M_{pk}) = −c_{k+1} W^M_{p,k+1} η₁ + λ_k W^M_{pk} η₂ + q c_k W^M_{p,k−1} η₃
//! ```
//!
//! and the co-differential pairs with it through the adjoint functionals
//! and the adjoint wedge tables. All operators here stay inside one
//! corepresentation dimension; growing products live on the
//! algebra-coefficient side ([`super::AForm`]).

use super::{InvariantExterior, BETA_EXP, GRADE, MOVE_WEIGHT, SIGMA_EXP};
use crate::corep::{e_action, w_norms, ChiFunc, WIndex};
use crate::qalg::QContext;
use crate::{QError, Result};
use num_complex::Complex64;
use rand::Rng;
use std::collections::BTreeMap;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Address of the scalar matrix coefficient `W¹ = 1`.
fn unit_w() -> WIndex {
    WIndex {
        dim: 1,
        p2: 0,
        k2: 0,
    }
}

/// Sparse form `Σ c · W^M_{pk} e_i` with a truncation cap on `M`.
#[derive(Clone, Debug)]
pub struct Form {
    max_dim: u32,
    terms: BTreeMap<(WIndex, usize), Complex64>,
}

impl Form {
    /// Zero form capped at corepresentation dimension `max_dim`.
    pub fn zero(max_dim: u32) -> Form {
        Form {
            max_dim,
            terms: BTreeMap::new(),
        }
    }

    /// Basis form `W_pk e_i` with the cap set by its own index.
    pub fn basis(w: WIndex, id: usize, c: Complex64) -> Result<Form> {
        let mut f = Form::zero(w.dim);
        f.insert(w, id, c)?;
        Ok(f)
    }

    /// Invariant basis form `e_i` as a form with scalar coefficient.
    pub fn invariant(id: usize, c: Complex64) -> Result<Form> {
        Form::basis(unit_w(), id, c)
    }

    /// Add one validated term; the index must sit inside the truncation
    /// and the proper column range.
    pub fn insert(&mut self, w: WIndex, id: usize, c: Complex64) -> Result<()> {
        if id >= 8 {
            return Err(QError::InvalidParam(format!("basis id {id} out of range")));
        }
        if !w.in_range() {
            return Err(QError::InvalidParam(format!("overflow column in {w:?}")));
        }
        if w.dim > self.max_dim {
            return Err(QError::Truncation(format!(
                "W^{} term exceeds the form truncation {}",
                w.dim, self.max_dim
            )));
        }
        self.push(w, id, c);
        Ok(())
    }

    pub(crate) fn push(&mut self, w: WIndex, id: usize, c: Complex64) {
        let entry = self.terms.entry((w, id)).or_insert(ZERO);
        *entry += c;
    }

    /// Truncation cap.
    pub fn max_dim(&self) -> u32 {
        self.max_dim
    }

    /// Term iterator.
    pub fn iter(&self) -> impl Iterator<Item = (&(WIndex, usize), &Complex64)> {
        self.terms.iter()
    }

    /// Number of stored terms.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    /// Whether no terms are stored.
    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of one basis pair.
    pub fn coeff(&self, w: WIndex, id: usize) -> Complex64 {
        self.terms.get(&(w, id)).copied().unwrap_or(ZERO)
    }

    /// Largest coefficient magnitude.
    pub fn norm_inf(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Common grade of all terms, if the form is homogeneous.
    pub fn grade(&self) -> Option<u32> {
        let mut g = None;
        for ((_, id), _) in self.terms.iter() {
            match g {
                None => g = Some(GRADE[*id]),
                Some(h) if h == GRADE[*id] => {}
                _ => return None,
            }
        }
        g
    }

    /// Sum; the truncation widens to the larger cap.
    pub fn add(&self, other: &Form) -> Form {
        let mut out = self.clone();
        out.max_dim = out.max_dim.max(other.max_dim);
        for ((w, id), c) in other.terms.iter() {
            out.push(*w, *id, *c);
        }
        out.pruned()
    }

    /// Difference; the truncation widens to the larger cap.
    pub fn sub(&self, other: &Form) -> Form {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// Scalar multiple.
    pub fn scale(&self, c: Complex64) -> Form {
        let mut out = self.clone();
        for v in out.terms.values_mut() {
            *v *= c;
        }
        out.pruned()
    }

    /// Drop exact zeros (coefficient magnitudes are never thresholded).
    pub fn pruned(mut self) -> Form {
        self.terms.retain(|_, c| c.norm() > 0.0);
        self
    }

    /// Largest coefficient of the difference.
    pub fn distance(&self, other: &Form) -> f64 {
        self.sub(other).norm_inf()
    }

    /// Whether every coefficient sits on the scalar matrix part `W¹`.
    pub fn is_invariant(&self) -> bool {
        self.terms.keys().all(|(w, _)| w.dim == 1)
    }
}

/// Differential in index coordinates.
pub fn differential(ctx: &QContext, ext: &InvariantExterior, f: &Form) -> Result<Form> {
    let mut out = Form::zero(f.max_dim());
    for ((w, id), c) in f.iter() {
        if let Some((t, s)) = ext.d_inv(*id) {
            out.push(*w, t, c * s);
        }
        for r in 1..=3u8 {
            if let Some((t, sw)) = ext.prod(r as usize, *id) {
                if let Some((w2, ce)) = e_action(ctx, ChiFunc::Chi(r), *w)? {
                    out.push(w2, t, c * ce * sw);
                }
            }
        }
    }
    Ok(out.pruned())
}

/// Co-differential in index coordinates: adjoint functionals against the
/// adjoint wedge tables.
pub fn codifferential(ctx: &QContext, ext: &InvariantExterior, f: &Form) -> Result<Form> {
    let mut out = Form::zero(f.max_dim());
    for ((w, id), c) in f.iter() {
        if let Some((t, s)) = ext.dstar_inv(*id) {
            out.push(*w, t, c * s);
        }
        for r in 1..=3u8 {
            if let Some((t, sm)) = ext.mstar(r, *id) {
                if let Some((w2, ce)) = e_action(ctx, ChiFunc::ChiStar(r), *w)? {
                    out.push(w2, t, c * ce * sm);
                }
            }
        }
    }
    Ok(out.pruned())
}

/// Laplacian `∇ = dd* + d*d`.
pub fn laplacian(ctx: &QContext, ext: &InvariantExterior, f: &Form) -> Result<Form> {
    let a = differential(ctx, ext, &codifferential(ctx, ext, f)?)?;
    let b = codifferential(ctx, ext, &differential(ctx, ext, f)?)?;
    Ok(a.add(&b))
}

/// Hodge operator; left-linear over the matrix coefficient.
pub fn hodge(ext: &InvariantExterior, f: &Form) -> Form {
    let mut out = Form::zero(f.max_dim());
    for ((w, id), c) in f.iter() {
        let (t, s) = ext.hodge(*id);
        out.push(*w, t, c * s);
    }
    out.pruned()
}

/// Wedge product. One factor must carry only scalar matrix coefficients;
/// a product of two matrix-coefficient forms leaves the index
/// representation and must run through the algebra-coefficient side.
pub fn wedge(ctx: &QContext, ext: &InvariantExterior, a: &Form, b: &Form) -> Result<Form> {
    let mut out = Form::zero(a.max_dim().max(b.max_dim()));
    if b.is_invariant() {
        for ((wa, i), ca) in a.iter() {
            for ((_, j), cb) in b.iter() {
                if let Some((t, s)) = ext.prod(*i, *j) {
                    out.push(*wa, t, ca * cb * s);
                }
            }
        }
    } else if a.is_invariant() {
        for ((_, i), ca) in a.iter() {
            // Moving e_i past W_pk scales by q^{−w_i(u+v)} with u+v = 2k.
            for ((wb, j), cb) in b.iter() {
                if let Some((t, s)) = ext.prod(*i, *j) {
                    let mv = ctx.qp(-MOVE_WEIGHT[*i] * wb.k2 as i64);
                    out.push(*wb, t, ca * cb * s * mv);
                }
            }
        }
    } else {
        return Err(QError::InvalidParam(
            "wedge of two matrix-coefficient forms needs algebra coefficients".into(),
        ));
    }
    Ok(out.pruned())
}

/// Integral: the Haar state of the top-grade coefficient, which only the
/// scalar matrix part survives.
pub fn integral(f: &Form) -> Complex64 {
    f.coeff(unit_w(), 7)
}

/// Inner product `⟨aω|bη⟩ = h(ab*)⟨ω|η⟩`: the matrix basis is orthogonal
/// with Haar-computed squared norms, the invariant part diagonal in the
/// rebalanced gram. Requires matrix norms, hence dimensions inside the
/// PBW cap.
pub fn inner(ctx: &QContext, ext: &InvariantExterior, a: &Form, b: &Form) -> Result<Complex64> {
    let mut acc = ZERO;
    for ((w, id), ca) in a.iter() {
        let cb = b.coeff(*w, *id);
        if cb == ZERO {
            continue;
        }
        let norms = w_norms(ctx, w.dim)?;
        acc += ca * cb.conj() * norms[w.offset()] * ext.gram(*id);
    }
    Ok(acc)
}

/// Twist `σ`, diagonal on the basis: the algebra factor on `W_pk` joins
/// the invariant exponent.
pub fn twist(ctx: &QContext, f: &Form) -> Form {
    let mut out = Form::zero(f.max_dim());
    for ((w, id), c) in f.iter() {
        let e = (w.p2 - 3 * w.k2) as i64 + SIGMA_EXP[*id];
        out.push(*w, *id, c * ctx.qp(e));
    }
    out.pruned()
}

/// One-parameter group `β_z`, diagonal with `β_i = σ`.
pub fn group_beta(ctx: &QContext, z: Complex64, f: &Form) -> Form {
    let i = Complex64::new(0.0, 1.0);
    let mut out = Form::zero(f.max_dim());
    for ((w, id), c) in f.iter() {
        let e = (3 * w.k2 - w.p2) as i64 + BETA_EXP[*id];
        out.push(*w, *id, c * ctx.qpc(e as f64 * i * z));
    }
    out.pruned()
}

/// Seeded random form: `terms` draws of a basis pair with coefficients
/// uniform on the unit square, optionally restricted to one grade.
pub fn random_form(rng: &mut impl Rng, max_dim: u32, terms: usize, grade: Option<u32>) -> Form {
    let ids: Vec<usize> = (0..8)
        .filter(|&i| grade.map_or(true, |g| GRADE[i] == g))
        .collect();
    let mut f = Form::zero(max_dim);
    for _ in 0..terms {
        let dim = rng.gen_range(1..=max_dim);
        let m2 = dim as i32 - 1;
        let p2 = -m2 + 2 * rng.gen_range(0..dim) as i32;
        let k2 = -m2 + 2 * rng.gen_range(0..dim) as i32;
        let id = ids[rng.gen_range(0..ids.len())];
        let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        f.push(WIndex { dim, p2, k2 }, id, c);
    }
    f.pruned()
}
