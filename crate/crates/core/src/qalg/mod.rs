//! Symbolic *-algebra of quantum SU(2) in PBW normal form.
//!
//! Every element of `A_q` expands uniquely over the monomials
//!
//! ```text
//! a(k,l)·y^m,    y = γ*γ,
//! a(k,l) = α^k γ^l          (k,l ≥ 0; negative k means α*-powers,
//!                            negative l means γ*-powers)
//! ```
//!
//! Multiplication rewrites any product back onto this basis using the
//! defining relations; the only nontrivial steps are the `q`-commutations
//! (`γ-ish` past `α-ish` costs `q^{∓1}`, `y` past `α^{±1}` costs `q^{∓2}`)
//! and the contractions `αα* = 1 − q²y`, `α*α = 1 − y`, which emit
//! polynomials in the central-in-`γ` element `y`.

mod coproduct;
mod group;
mod haar;

pub use coproduct::{comultiply, counit, delta_generator, tensor_collapse, tensor_mul, TensorElement};
pub use group::{apply_group, group_factor, GroupTag};

use crate::{QError, Result};
use haar::HaarCache;
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

/// One PBW basis monomial `a(k,l)(γ*γ)^m`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct PBWMonomial {
    /// Power of `α` if nonnegative, of `α*` if negative.
    pub k: i32,
    /// Power of `γ` if nonnegative, of `γ*` if negative.
    pub l: i32,
    /// Power of `y = γ*γ`.
    pub m: u32,
}

impl PBWMonomial {
    /// The monomial `a(k,l)y^m`.
    pub fn new(k: i32, l: i32, m: u32) -> Self {
        PBWMonomial { k, l, m }
    }

    /// The unit monomial.
    pub fn unit() -> Self {
        PBWMonomial { k: 0, l: 0, m: 0 }
    }

    /// Total generator degree `|k| + |l| + 2m`.
    pub fn degree(&self) -> u32 {
        self.k.unsigned_abs() + self.l.unsigned_abs() + 2 * self.m
    }
}

/// The four algebra generators.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Gen {
    Alpha,
    AlphaStar,
    Gamma,
    GammaStar,
}

impl Gen {
    /// PBW monomial of the generator itself.
    pub fn monomial(self) -> PBWMonomial {
        match self {
            Gen::Alpha => PBWMonomial::new(1, 0, 0),
            Gen::AlphaStar => PBWMonomial::new(-1, 0, 0),
            Gen::Gamma => PBWMonomial::new(0, 1, 0),
            Gen::GammaStar => PBWMonomial::new(0, -1, 0),
        }
    }
}

/// Sparse element of `A_q` over the PBW basis.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AlgElement {
    terms: BTreeMap<PBWMonomial, Complex64>,
}

impl AlgElement {
    /// The zero element.
    pub fn zero() -> Self {
        AlgElement::default()
    }

    /// The unit element.
    pub fn one() -> Self {
        AlgElement::from_monomial(PBWMonomial::unit(), Complex64::new(1.0, 0.0))
    }

    /// A single scaled monomial.
    pub fn from_monomial(m: PBWMonomial, c: Complex64) -> Self {
        let mut terms = BTreeMap::new();
        if c != Complex64::new(0.0, 0.0) {
            terms.insert(m, c);
        }
        AlgElement { terms }
    }

    /// The generator `g` as an element.
    pub fn generator(g: Gen) -> Self {
        AlgElement::from_monomial(g.monomial(), Complex64::new(1.0, 0.0))
    }

    /// Iterate over stored `(monomial, coefficient)` pairs in canonical order.
    pub fn iter(&self) -> impl Iterator<Item = (&PBWMonomial, &Complex64)> {
        self.terms.iter()
    }

    /// Number of stored terms.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    /// Whether the element is zero.
    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of one monomial (zero when absent).
    pub fn coeff(&self, m: &PBWMonomial) -> Complex64 {
        self.terms.get(m).copied().unwrap_or(Complex64::new(0.0, 0.0))
    }

    /// Largest coefficient magnitude.
    pub fn norm_inf(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Largest total generator degree over stored monomials.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|m| m.degree()).max().unwrap_or(0)
    }

    /// Add a scaled monomial in place (no pruning).
    pub(crate) fn push(&mut self, m: PBWMonomial, c: Complex64) {
        let e = self.terms.entry(m).or_insert(Complex64::new(0.0, 0.0));
        *e += c;
    }

    /// Sum of elements.
    pub fn add(&self, other: &AlgElement) -> AlgElement {
        let mut out = self.clone();
        for (m, c) in other.iter() {
            out.push(*m, *c);
        }
        out.pruned()
    }

    /// Difference of elements.
    pub fn sub(&self, other: &AlgElement) -> AlgElement {
        let mut out = self.clone();
        for (m, c) in other.iter() {
            out.push(*m, -*c);
        }
        out.pruned()
    }

    /// Scalar multiple.
    pub fn scale(&self, c: Complex64) -> AlgElement {
        if c == Complex64::new(0.0, 0.0) {
            return AlgElement::zero();
        }
        let terms = self.terms.iter().map(|(m, v)| (*m, v * c)).collect();
        AlgElement { terms }.pruned()
    }

    /// Drop exactly-cancelled terms.
    ///
    /// Deliberately not a relative threshold: elements routinely carry
    /// legitimate coefficients spanning `q^{±O(m²)}`, so pruning against
    /// the largest one would delete real data. Comparisons that need to
    /// ignore floating dust do so through their own tolerances.
    pub fn pruned(mut self) -> AlgElement {
        self.terms.retain(|_, c| c.norm() > 0.0);
        self
    }

    /// Max coefficient magnitude of the difference (loose equality metric).
    pub fn distance(&self, other: &AlgElement) -> f64 {
        self.sub(other).norm_inf()
    }
}

/// Immutable computation context: the deformation parameter, the comparison
/// tolerance, and the memo tables shared by all operations.
#[derive(Clone)]
pub struct QContext {
    q: f64,
    tol: f64,
    caches: Arc<Caches>,
}

pub(crate) struct Caches {
    pub(crate) haar: Mutex<HaarCache>,
    /// Peter–Weyl matrices keyed by `(M, rescaled)`; entries stored
    /// row-major. The raw (coideal-basis) chain feeds the column recursion,
    /// the rescaled one is the public matrix.
    pub(crate) wmats: Mutex<BTreeMap<(u32, bool), Arc<Vec<AlgElement>>>>,
    /// Squared norms `⟨W_pk|W_pk⟩` keyed by `M`, row-major, real.
    pub(crate) grams: Mutex<BTreeMap<u32, Arc<Vec<f64>>>>,
    /// Generator multiplication coefficients keyed by `(generator, M)`:
    /// per source entry `(c_up, c_down, residual)`.
    pub(crate) genco: Mutex<BTreeMap<(u8, u32), Arc<Vec<(f64, f64, f64)>>>>,
}

impl QContext {
    /// Build a context at deformation parameter `q` with comparison
    /// tolerance `tol`. The Haar weight table is seeded eagerly.
    pub fn new(q: f64, tol: f64) -> Result<Self> {
        if !(q > 0.0 && q < 1.0) {
            return Err(QError::InvalidParam(format!("q = {q} outside (0,1)")));
        }
        if !(tol > 0.0) {
            return Err(QError::InvalidParam(format!("tol = {tol} must be positive")));
        }
        let ctx = QContext {
            q,
            tol,
            caches: Arc::new(Caches {
                haar: Mutex::new(HaarCache::new()),
                wmats: Mutex::new(BTreeMap::new()),
                grams: Mutex::new(BTreeMap::new()),
                genco: Mutex::new(BTreeMap::new()),
            }),
        };
        // Invariance solve for low y-degrees up front; the table extends on
        // demand behind the same lock.
        ctx.haar_weight(6);
        Ok(ctx)
    }

    /// Deformation parameter.
    pub fn q(&self) -> f64 {
        self.q
    }

    /// Scalar comparison tolerance.
    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// Integer power of `q`.
    pub fn qp(&self, n: i64) -> f64 {
        self.q.powi(n as i32)
    }

    /// Complex power `q^w = exp(w·ln q)`.
    pub fn qpc(&self, w: Complex64) -> Complex64 {
        (w * self.q.ln()).exp()
    }

    /// Haar weight `H_m = h((γ*γ)^m)`, from the invariance linear solve.
    pub fn haar_weight(&self, m: u32) -> f64 {
        let mut cache = self.caches.haar.lock().unwrap();
        cache.weight(self, m)
    }

    pub(crate) fn caches(&self) -> &Caches {
        &self.caches
    }
}

/// Product of two PBW monomials as a short list of scaled monomials.
///
/// All rewriting coefficients are real powers of `q` with signs coming from
/// the contraction polynomials.
pub(crate) fn mono_mul(q: f64, m1: PBWMonomial, m2: PBWMonomial) -> Vec<(PBWMonomial, f64)> {
    // y^{m1} and the γ-part of m1 move right past the α-part of m2.
    let phase = q.powi(-2 * (m1.m as i32) * m2.k - m2.k * m1.l.abs());
    // γ-parts merge; opposite signs contract into y-powers.
    let l = m1.l + m2.l;
    let extra_y = if m1.l.signum() * m2.l.signum() < 0 {
        m1.l.abs().min(m2.l.abs()) as u32
    } else {
        0
    };
    let m_base = m1.m + m2.m + extra_y;
    let k = m1.k + m2.k;

    if m1.k == 0 || m2.k == 0 || m1.k.signum() == m2.k.signum() {
        return vec![(PBWMonomial::new(k, l, m_base), phase)];
    }

    // Opposite α-parts contract; collect the emitted y-polynomial.
    let s = m1.k.abs().min(m2.k.abs());
    let mut poly = vec![1.0f64];
    if m1.k > 0 {
        // α^a (α*)^b: factors (1 − q^{2i} y), i = b−s+1 ..= b.
        let b = m2.k.abs();
        for i in (b - s + 1)..=b {
            poly = poly_mul_linear(&poly, -q.powi(2 * i));
        }
    } else {
        // (α*)^b α^a: factors (1 − q^{−2i} y), i = a−s ..= a−1.
        let a = m2.k.abs();
        for i in (a - s)..=(a - 1) {
            poly = poly_mul_linear(&poly, -q.powi(-2 * i));
        }
    }
    poly.iter()
        .enumerate()
        .filter(|(_, c)| **c != 0.0)
        .map(|(j, c)| (PBWMonomial::new(k, l, m_base + j as u32), phase * c))
        .collect()
}

/// Multiply a polynomial in `y` by `(1 + c·y)`.
fn poly_mul_linear(p: &[f64], c: f64) -> Vec<f64> {
    let mut out = vec![0.0; p.len() + 1];
    for (j, v) in p.iter().enumerate() {
        out[j] += v;
        out[j + 1] += v * c;
    }
    out
}

/// Product in `A_q`.
pub fn multiply(ctx: &QContext, a: &AlgElement, b: &AlgElement) -> AlgElement {
    let mut out = AlgElement::zero();
    for (ma, ca) in a.iter() {
        for (mb, cb) in b.iter() {
            let c = ca * cb;
            for (m, w) in mono_mul(ctx.q(), *ma, *mb) {
                out.push(m, c * w);
            }
        }
    }
    out.pruned()
}

/// Involution of `A_q`.
///
/// `(a(k,l)y^m)* = q^{k|l| + 2mk}·a(−k,−l)y^m` with the coefficient
/// conjugated; the power of `q` reorders the reversed word back into
/// normal form.
pub fn star(ctx: &QContext, a: &AlgElement) -> AlgElement {
    let mut out = AlgElement::zero();
    for (m, c) in a.iter() {
        let w = ctx.qp((m.k * m.l.abs() + 2 * m.m as i32 * m.k) as i64);
        out.push(PBWMonomial::new(-m.k, -m.l, m.m), c.conj() * w);
    }
    out.pruned()
}

/// PBW expansion of a word in the generators.
pub fn normal_form(ctx: &QContext, word: &[(Gen, u32)]) -> AlgElement {
    let mut out = AlgElement::one();
    for (g, pow) in word {
        let gen = AlgElement::generator(*g);
        for _ in 0..*pow {
            out = multiply(ctx, &out, &gen);
        }
    }
    out
}

/// Haar state `h` on an element.
///
/// `h` kills every monomial off the `y`-subalgebra and weighs `y^m` by the
/// invariance-solve value `H_m`.
pub fn haar(ctx: &QContext, a: &AlgElement) -> Complex64 {
    let mut out = Complex64::new(0.0, 0.0);
    for (m, c) in a.iter() {
        if m.k == 0 && m.l == 0 {
            out += c * ctx.haar_weight(m.m);
        }
    }
    out
}

/// Haar inner product `⟨a|b⟩ = h(ab*)`, linear in `a`, conjugate-linear
/// in `b`.
pub fn haar_inner(ctx: &QContext, a: &AlgElement, b: &AlgElement) -> Complex64 {
    let bs = star(ctx, b);
    haar(ctx, &multiply(ctx, a, &bs))
}
