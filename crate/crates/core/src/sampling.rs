//! Seeded random fixtures: Hermitian matrices, unitaries, and commuting
//! POVMs built by smearing a random PVM with a random stochastic kernel.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::operators::{CMatrix, HermitianOperator, Projection};
use crate::povm::{DiscretePovm, DiscretePvm, OutcomeGrid};
use crate::reconstruction::{smear, KernelMatrix, TOL_ROW};

fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    DMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

pub fn random_hermitian<R: Rng + ?Sized>(d: usize, rng: &mut R) -> HermitianOperator {
    let g = gaussian_matrix(d, d, rng);
    HermitianOperator::new((&g + g.adjoint()).scale(0.5)).expect("symmetrized matrix is Hermitian")
}

/// Haar-like unitary from the QR factor of a complex Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    gaussian_matrix(d, d, rng).qr().q()
}

/// `k` mutually orthogonal projectors of random rank summing to the identity.
pub fn random_projectors<R: Rng + ?Sized>(d: usize, k: usize, rng: &mut R) -> Vec<HermitianOperator> {
    assert!(k >= 1 && k <= d, "need 1 <= k <= d");
    let u = random_unitary(d, rng);
    // Random composition of d into k positive parts.
    let mut cuts: Vec<usize> = (1..d).collect();
    cuts.shuffle(rng);
    let mut cuts: Vec<usize> = cuts.into_iter().take(k - 1).collect();
    cuts.sort_unstable();
    cuts.insert(0, 0);
    cuts.push(d);
    cuts.windows(2)
        .map(|w| {
            let cols = u.columns(w[0], w[1] - w[0]).into_owned();
            Projection::onto_span(&cols).op().clone()
        })
        .collect()
}

/// `k x m` row-stochastic table with pairwise distinct rows.
pub fn random_stochastic<R: Rng + ?Sized>(k: usize, m: usize, rng: &mut R) -> KernelMatrix {
    let rows = (0..k)
        .map(|_| {
            let w: Vec<f64> = (0..m).map(|_| -rng.random::<f64>().max(1e-300).ln()).collect();
            let s: f64 = w.iter().sum();
            w.into_iter().map(|x| x / s).collect()
        })
        .collect();
    KernelMatrix::new(rows, TOL_ROW).expect("normalized rows")
}

pub struct CommutingFixture {
    pub povm: DiscretePovm,
    pub pvm: DiscretePvm,
    pub kernel: KernelMatrix,
}

/// Commuting POVM of dimension `d` on `m` cells of `[0, 1]`, obtained by
/// smearing a random `k`-outcome PVM.
pub fn random_commuting_povm<R: Rng + ?Sized>(d: usize, k: usize, m: usize, rng: &mut R) -> CommutingFixture {
    let projectors = random_projectors(d, k, rng);
    let points = (0..k).map(|i| i as f64).collect();
    let pvm = DiscretePvm::new(points, projectors, 1e-10).expect("orthogonal complete projectors");
    let kernel = random_stochastic(k, m, rng);
    let grid = OutcomeGrid::uniform(0.0, 1.0, m).expect("valid grid");
    let povm = smear(&pvm, &kernel, &grid).expect("shapes match");
    CommutingFixture { povm, pvm, kernel }
}
