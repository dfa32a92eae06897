//! Throwaway probe: commutator per-dimension norms out to M = 13.

use qsu2_core::calculus::InvariantExterior;
use qsu2_core::qalg::QContext;
use qsu2_core::spectral::{commutator_norm, CommGen};

fn main() {
    let ctx = QContext::new(0.5, 1e-9).unwrap();
    let ext = InvariantExterior::new(&ctx).unwrap();
    let rep = commutator_norm(&ctx, &ext, CommGen::Alpha, 0.5, 0.5, 13).unwrap();
    for (i, (p, s)) in rep.per_m.iter().zip(rep.s.iter()).enumerate() {
        println!("M = {:2}  per_m = {p:.6e}  s = {s:.6e}", i + 1);
    }
}
