//! Random matrix ensembles used by tests, benches and the acceptance suite.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::manifold::StiefelFrame;
use crate::matcore::{c, AntiHermitian, CMatrix};

/// Complex Ginibre matrix with i.i.d. standard normal real and imaginary parts.
pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        c(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// Haar-distributed unitary: QR of a Ginibre matrix with the phases of R's
/// diagonal absorbed into Q.
pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    let qr = ginibre(rng, n, n).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            c(1.0, 0.0)
        };
        q.column_mut(j).iter_mut().for_each(|z| *z *= phase);
    }
    q
}

pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    let g = ginibre(rng, n, n);
    (&g + g.adjoint()).scale(0.5)
}

pub fn random_anti_hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> AntiHermitian {
    AntiHermitian::skew_part(&ginibre(rng, n, n))
}

/// First k columns of a Haar unitary.
pub fn random_frame<R: Rng + ?Sized>(rng: &mut R, n: usize, k: usize) -> StiefelFrame {
    let u = haar_unitary(rng, n);
    StiefelFrame::new(u.columns(0, k).into_owned()).expect("Haar columns are orthonormal")
}
