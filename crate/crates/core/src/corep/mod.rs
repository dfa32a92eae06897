//! Irreducible corepresentations of quantum SU(2) and their weight data.
//!
//! The spin-m corepresentation (`M = 2m+1`, `m` a half-integer) has matrix
//! coefficients `W^M_{pk}`, `p,k ∈ {−m,…,m}`, stored with doubled indices.
//! The three twisted derivations `E_r(a) = (id⊗χ_r)Δ(a)` act along rows:
//!
//! ```text
//! E₁(W_pk) = −c_{k+1} W_{p,k+1}
//! E₂(W_pk) =  λ_k     W_pk          λ_k = q²(1−q²)⁻¹(q^{−4k}−1)
//! E₃(W_pk) =  q c_k   W_{p,k−1}
//! ```
//!
//! with `c_k = q(1−q²)⁻¹[(q^{−2k}−q^{2m})(q^{−2m}−q^{−2(k−1)})]^{1/2}` and
//! the boundary convention `c_{−m−1} = c_{m+1} = 0` (so raising past `m` or
//! lowering past `−m` contributes nothing). The adjoints of the derivations
//! with respect to the Haar inner product are again in their span:
//! `χ₁* = −q⁻¹χ₃`, `χ₂* = χ₂`, `χ₃* = −qχ₁`, and the Laplacian weight on
//! the matrix-coefficient line is `ν_k = c_{k+1}² + λ_k² + q²c_k²`.

mod wmatrix;

pub use wmatrix::{
    build_w_pbw, build_w_raw, check_corep_identity, gen_fit_residual, multiply_by_generator,
    q_gram, w_entry, w_norms, M_PBW_CAP,
};

use crate::qalg::{comultiply, AlgElement, PBWMonomial, QContext};
use crate::{QError, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;

/// Address of one matrix coefficient `W^M_{pk}` (indices stored doubled).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct WIndex {
    /// Corepresentation dimension `M = 2m + 1`.
    pub dim: u32,
    /// Doubled row index `2p`.
    pub p2: i32,
    /// Doubled column index `2k`; may overflow to `±(M+1)` where the
    /// coefficient is zero by convention.
    pub k2: i32,
}

impl WIndex {
    /// Construct and validate an index (column overflow allowed).
    pub fn new(dim: u32, p2: i32, k2: i32) -> Result<Self> {
        let m2 = dim as i32 - 1;
        if dim == 0 {
            return Err(QError::InvalidParam("W index with M = 0".into()));
        }
        if p2.abs() > m2 || (p2 - m2) % 2 != 0 {
            return Err(QError::InvalidParam(format!(
                "row index 2p = {p2} invalid for M = {dim}"
            )));
        }
        if k2.abs() > m2 + 2 || (k2 - m2) % 2 != 0 {
            return Err(QError::InvalidParam(format!(
                "column index 2k = {k2} invalid for M = {dim}"
            )));
        }
        Ok(WIndex { dim, p2, k2 })
    }

    /// Doubled spin `2m = M − 1`.
    pub fn m2(&self) -> i32 {
        self.dim as i32 - 1
    }

    /// Whether the column index lies in the proper (non-overflow) range.
    pub fn in_range(&self) -> bool {
        self.k2.abs() <= self.m2()
    }

    /// Row-major position inside the `M×M` entry tables.
    pub fn offset(&self) -> usize {
        let m2 = self.m2();
        (((self.p2 + m2) / 2) * self.dim as i32 + (self.k2 + m2) / 2) as usize
    }
}

/// Weight pair `(λ_k, c_k)` at one column index.
#[derive(Clone, Copy, Debug)]
pub struct WeightData {
    pub lambda: f64,
    pub c: f64,
}

/// `λ_k = q²(1−q²)⁻¹(q^{−4k}−1)`, with `k` passed doubled.
pub fn lambda_k(ctx: &QContext, k2: i32) -> f64 {
    let q = ctx.q();
    q * q * (q.powi(-2 * k2) - 1.0) / (1.0 - q * q)
}

/// `c_k` for the spin of `M = 2m+1`, with `k` passed doubled.
///
/// Returns 0 at the overflow indices `±(m+1)` (for `−(m+1)` the radicand
/// goes negative and the boundary convention takes over).
pub fn c_k(ctx: &QContext, dim: u32, k2: i32) -> Result<f64> {
    let m2 = dim as i32 - 1;
    if k2.abs() > m2 + 2 {
        return Err(QError::InvalidParam(format!(
            "c_k index 2k = {k2} outside extended range for M = {dim}"
        )));
    }
    let q = ctx.q();
    let radicand = (q.powi(-k2) - q.powi(m2)) * (q.powi(-m2) - q.powi(-(k2 - 2)));
    if radicand <= 0.0 {
        return Ok(0.0);
    }
    Ok(q / (1.0 - q * q) * radicand.sqrt())
}

/// Both weights at one column index.
pub fn weight_data(ctx: &QContext, dim: u32, k2: i32) -> Result<WeightData> {
    Ok(WeightData { lambda: lambda_k(ctx, k2), c: c_k(ctx, dim, k2)? })
}

/// Laplacian weight `ν_k = c_{k+1}² + λ_k² + q²c_k²` on the `W_pk` line.
pub fn nu(ctx: &QContext, dim: u32, k2: i32) -> Result<f64> {
    let q = ctx.q();
    let c_up = c_k(ctx, dim, k2 + 2)?;
    let c_dn = c_k(ctx, dim, k2)?;
    let l = lambda_k(ctx, k2);
    Ok(c_up * c_up + l * l + q * q * c_dn * c_dn)
}

/// The functionals whose matrices against `W^M` drive every index-level
/// computation: the counit (identity action), the three `χ_r`, and their
/// Haar adjoints.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ChiFunc {
    Id,
    Chi(u8),
    ChiStar(u8),
}

/// Action of `E_f = (id⊗f)Δ` on one matrix coefficient: the target index
/// and its real coefficient. `None` when the target leaves the proper
/// column range (its coefficient always vanishes there).
pub fn e_action(ctx: &QContext, f: ChiFunc, w: WIndex) -> Result<Option<(WIndex, f64)>> {
    let shift_coeff = match f {
        ChiFunc::Id => (0, 1.0),
        ChiFunc::Chi(1) => (2, -c_k(ctx, w.dim, w.k2 + 2)?),
        ChiFunc::Chi(2) => (0, lambda_k(ctx, w.k2)),
        ChiFunc::Chi(3) => (-2, ctx.q() * c_k(ctx, w.dim, w.k2)?),
        ChiFunc::ChiStar(1) => (-2, -c_k(ctx, w.dim, w.k2)?),
        ChiFunc::ChiStar(2) => (0, lambda_k(ctx, w.k2)),
        ChiFunc::ChiStar(3) => (2, ctx.q() * c_k(ctx, w.dim, w.k2 + 2)?),
        _ => return Err(QError::InvalidParam(format!("bad functional {f:?}"))),
    };
    let (dk2, coeff) = shift_coeff;
    let k2 = w.k2 + dk2;
    if k2.abs() > w.m2() {
        return Ok(None);
    }
    Ok(Some((WIndex { dim: w.dim, p2: w.p2, k2 }, coeff)))
}

/// Matrix `f(W^M)` with entries `f(W^M_{jk})`, rows and columns running
/// over ascending `k`.
pub fn a_matrix(ctx: &QContext, dim: u32, f: ChiFunc) -> Result<DMatrix<f64>> {
    let n = dim as usize;
    let m2 = dim as i32 - 1;
    let mut a = DMatrix::zeros(n, n);
    for col in 0..n {
        let k2 = -m2 + 2 * col as i32;
        let w = WIndex { dim, p2: -m2, k2 };
        if let Some((tgt, coeff)) = e_action(ctx, f, w)? {
            let row = ((tgt.k2 + m2) / 2) as usize;
            a[(row, col)] = coeff;
        }
    }
    Ok(a)
}

/// χ-functional values on PBW monomials.
///
/// `χ₁` is supported on `a(u,−1)`, `χ₃` on `a(u,+1)` (both with value −1),
/// and `χ₂` on `a(u,0)` with value `λ_{u/2}`; all three kill any `y`-power.
pub fn chi_value(ctx: &QContext, r: u8, m: &PBWMonomial) -> Complex64 {
    let zero = Complex64::new(0.0, 0.0);
    if m.m != 0 {
        return zero;
    }
    match (r, m.l) {
        (1, -1) | (3, 1) => Complex64::new(-1.0, 0.0),
        (2, 0) => {
            let q = ctx.q();
            Complex64::new(q * q * (q.powi(-2 * m.k) - 1.0) / (1.0 - q * q), 0.0)
        }
        _ => zero,
    }
}

/// First-principles twisted derivation `E_r(a) = (id⊗χ_r)Δ(a)`.
///
/// Deliberately routed through the full coproduct so it can serve as an
/// independent oracle for the index-level `e_action`.
pub fn e_alg(ctx: &QContext, r: u8, a: &AlgElement) -> AlgElement {
    comultiply(ctx, a).contract_right(|m| chi_value(ctx, r, m))
}

/// Character values `f_r` on PBW monomials (`f₁ = f₃`, `f₂ = f₁²`).
///
/// Supported on `a(u,0)` with value `q^{−u}` (`r ∈ {1,3}`) or `q^{−2u}`
/// (`r = 2`); kills every γ- or y-carrying monomial.
pub fn f_value(ctx: &QContext, r: u8, m: &PBWMonomial) -> Complex64 {
    if m.l != 0 || m.m != 0 {
        return Complex64::new(0.0, 0.0);
    }
    let w = match r {
        1 | 3 => 1,
        2 => 2,
        _ => unreachable!("f_r index out of range"),
    };
    Complex64::new(ctx.qp(-w * m.k as i64), 0.0)
}

/// Diagonal factor of `F_r = (id⊗f_r)Δ` on one PBW monomial.
///
/// These drive the bimodule commutation `η_r a = (F_r a) η_r`: each `F_r`
/// scales `a(u,v)yⁿ` by `q^{−(u+v)}` for `r ∈ {1,3}` and by `q^{−2(u+v)}`
/// for `r = 2`.
pub fn f_factor(ctx: &QContext, r: u8, m: &PBWMonomial) -> f64 {
    let w = (m.k + m.l) as i64;
    match r {
        1 | 3 => ctx.qp(-w),
        2 => ctx.qp(-2 * w),
        _ => unreachable!("f_r index out of range"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qalg::QContext;

    fn ctx() -> QContext {
        QContext::new(0.5, 1e-9).unwrap()
    }

    #[test]
    fn lambda_at_zero_and_half_integers() {
        let ctx = ctx();
        assert_eq!(lambda_k(&ctx, 0), 0.0);
        assert!((lambda_k(&ctx, 1) - 1.0).abs() < 1e-15);
        let q2 = ctx.q() * ctx.q();
        assert!((lambda_k(&ctx, -1) + q2).abs() < 1e-15);
    }

    #[test]
    fn c_examples_and_boundaries() {
        let ctx = ctx();
        // (M=2, k=1/2) → 1 for every q.
        assert!((c_k(&ctx, 2, 1).unwrap() - 1.0).abs() < 1e-15);
        // (M=1, k=0) → 0.
        assert_eq!(c_k(&ctx, 1, 0).unwrap(), 0.0);
        // Overflow indices vanish.
        assert_eq!(c_k(&ctx, 3, 4).unwrap(), 0.0);
        assert_eq!(c_k(&ctx, 3, -4).unwrap(), 0.0);
        // Beyond the extended range errors out.
        assert!(c_k(&ctx, 3, 6).is_err());
    }

    #[test]
    fn lambda_identity_against_c() {
        // λ_k = c_k² − q²c_{k+1}² over a sweep of (M, k).
        for q in [0.3, 0.5, 0.8] {
            let ctx = QContext::new(q, 1e-9).unwrap();
            for dim in 1..=21u32 {
                let m2 = dim as i32 - 1;
                for k2 in (-m2..=m2).step_by(2) {
                    let l = lambda_k(&ctx, k2);
                    let c0 = c_k(&ctx, dim, k2).unwrap();
                    let c1 = c_k(&ctx, dim, k2 + 2).unwrap();
                    let rhs = c0 * c0 - q * q * c1 * c1;
                    // Scale against the cancelling addends, which dwarf the
                    // difference near k = 0.
                    let scale = (c0 * c0).max(l.abs()).max(1.0);
                    assert!(
                        (l - rhs).abs() < 1e-9 * scale,
                        "λ identity fails at q={q}, M={dim}, k2={k2}"
                    );
                }
            }
        }
    }

    #[test]
    fn nu_vanishes_only_for_trivial_corep() {
        let ctx = ctx();
        assert_eq!(nu(&ctx, 1, 0).unwrap(), 0.0);
        for dim in 2..=9u32 {
            let m2 = dim as i32 - 1;
            for k2 in (-m2..=m2).step_by(2) {
                assert!(nu(&ctx, dim, k2).unwrap() > 0.0, "ν must be positive at M={dim}, k2={k2}");
            }
        }
    }

    #[test]
    fn nu_matches_chi_matrix_product() {
        // ν diag = Σ_r χ_r*(W)χ_r(W) assembled from the A-matrices.
        let ctx = ctx();
        for dim in 1..=7u32 {
            let n = dim as usize;
            let mut sum = DMatrix::<f64>::zeros(n, n);
            for r in 1..=3u8 {
                let a = a_matrix(&ctx, dim, ChiFunc::Chi(r)).unwrap();
                let astar = a_matrix(&ctx, dim, ChiFunc::ChiStar(r)).unwrap();
                sum += astar * a;
            }
            let m2 = dim as i32 - 1;
            for col in 0..n {
                let k2 = -m2 + 2 * col as i32;
                let want = nu(&ctx, dim, k2).unwrap();
                for row in 0..n {
                    let got = sum[(row, col)];
                    let expect = if row == col { want } else { 0.0 };
                    assert!(
                        (got - expect).abs() < 1e-12 * want.max(1.0),
                        "χ*χ product wrong at M={dim}, ({row},{col})"
                    );
                }
            }
        }
    }

    #[test]
    fn chi_star_matrices_are_transposes() {
        let ctx = ctx();
        for dim in 1..=9u32 {
            for r in 1..=3u8 {
                let a = a_matrix(&ctx, dim, ChiFunc::Chi(r)).unwrap();
                let astar = a_matrix(&ctx, dim, ChiFunc::ChiStar(r)).unwrap();
                assert!((astar - a.transpose()).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn e_action_boundary_conventions() {
        let ctx = ctx();
        // E₁ at the top column raises out of range: coefficient c_{m+1} = 0.
        let w = WIndex::new(3, 0, 2).unwrap();
        assert!(e_action(&ctx, ChiFunc::Chi(1), w).unwrap().is_none());
        // E₂ at k = 0 is multiplication by λ_0 = 0.
        let w0 = WIndex::new(3, 0, 0).unwrap();
        let (_, coeff) = e_action(&ctx, ChiFunc::Chi(2), w0).unwrap().unwrap();
        assert_eq!(coeff, 0.0);
        // E₃ lowers with coefficient q·c_k.
        let (tgt, coeff) = e_action(&ctx, ChiFunc::Chi(3), w).unwrap().unwrap();
        assert_eq!(tgt.k2, 0);
        let want = ctx.q() * c_k(&ctx, 3, 2).unwrap();
        assert!((coeff - want).abs() < 1e-15);
    }

    #[test]
    fn recurrence_identity_for_lambda() {
        // q⁹(1+q²) − q¹¹λ_k = −q⁷λ_{k−1}.
        for q in [0.3, 0.5, 0.8] {
            let ctx = QContext::new(q, 1e-9).unwrap();
            for k2 in (-20..=20).step_by(2) {
                let lhs = ctx.qp(9) * (1.0 + q * q) - ctx.qp(11) * lambda_k(&ctx, k2);
                let rhs = -ctx.qp(7) * lambda_k(&ctx, k2 - 2);
                let scale = (ctx.qp(11) * lambda_k(&ctx, k2)).abs().max(1.0);
                assert!((lhs - rhs).abs() < 1e-9 * scale);
            }
        }
    }

    #[test]
    fn f_characters_act_diagonally() {
        // (id⊗f_r)Δ scales each PBW monomial by the stated factor.
        let ctx = ctx();
        for r in [1u8, 2, 3] {
            for (k, l, m) in [(0, 0, 0), (2, -1, 0), (-1, 3, 1), (1, 0, 2), (-2, -2, 1)] {
                let mono = PBWMonomial::new(k, l, m);
                let a = AlgElement::from_monomial(mono, Complex64::new(1.0, 0.0));
                let acted = comultiply(&ctx, &a).contract_right(|n| f_value(&ctx, r, n));
                let want = a.scale(Complex64::new(f_factor(&ctx, r, &mono), 0.0));
                assert!(
                    acted.distance(&want) < 1e-12 * acted.norm_inf().max(1.0),
                    "F_{r} not diagonal on {mono:?}"
                );
            }
        }
    }

    #[test]
    fn f2_decomposes_over_counit_and_chi2() {
        // f₂ = ε + (q⁻²−1)χ₂ monomial by monomial.
        let ctx = ctx();
        let shift = 1.0 / (ctx.q() * ctx.q()) - 1.0;
        for (k, l, m) in [(0, 0, 0), (3, 0, 0), (-2, 0, 0), (1, 1, 0), (0, 0, 1)] {
            let mono = PBWMonomial::new(k, l, m);
            let eps = if l == 0 && m == 0 { 1.0 } else { 0.0 };
            let want = Complex64::new(eps, 0.0) + shift * chi_value(&ctx, 2, &mono);
            assert!((f_value(&ctx, 2, &mono) - want).norm() < 1e-12);
        }
    }

    #[test]
    fn index_action_agrees_with_coproduct_derivation() {
        // E_r(W_pk) computed through the full coproduct collapses onto the
        // single neighbouring coefficient with the tabulated weight.
        let ctx = ctx();
        for dim in 1..=4u32 {
            let m2 = dim as i32 - 1;
            for p2 in (-m2..=m2).step_by(2) {
                for k2 in (-m2..=m2).step_by(2) {
                    let w = WIndex::new(dim, p2, k2).unwrap();
                    let entry = crate::corep::w_entry(&ctx, w).unwrap();
                    for r in 1..=3u8 {
                        let acted = e_alg(&ctx, r, &entry);
                        let want = match e_action(&ctx, ChiFunc::Chi(r), w).unwrap() {
                            None => AlgElement::zero(),
                            Some((tgt, coeff)) => crate::corep::w_entry(&ctx, tgt)
                                .unwrap()
                                .scale(Complex64::new(coeff, 0.0)),
                        };
                        let scale = acted.norm_inf().max(want.norm_inf()).max(1.0);
                        assert!(
                            acted.distance(&want) < 1e-9 * scale,
                            "E_{r} mismatch at M={dim}, (2p,2k)=({p2},{k2})"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn windex_validation() {
        assert!(WIndex::new(3, 1, 0).is_err()); // parity mismatch
        assert!(WIndex::new(3, 4, 0).is_err()); // row out of range
        assert!(WIndex::new(3, 2, 4).is_ok()); // column overflow allowed
        assert!(WIndex::new(3, 2, 6).is_err()); // beyond overflow
        assert!(!WIndex::new(3, 2, 4).unwrap().in_range());
    }
}
