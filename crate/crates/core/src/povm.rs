//! Discrete POVMs over a partition of an interval into half-open cells.
//!
//! Cells are `[e_{j}, e_{j+1})` and are indexed from zero. Finite unions of
//! cells ([`RingSet`]) are closed under union, intersection and difference, so
//! they play the role of the generating ring of outcome sets.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::{
    commutator_norm, idempotency_residual, operator_norm, spectral_norm, Effect,
    HermitianOperator, Projection,
};

/// Default tolerance for `sum_j F_j = 1`.
pub const TOL_NORM: f64 = 1e-9;

/// Support threshold for the cell-level spectrum.
pub const TOL_SPECTRUM: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeGrid {
    edges: Vec<f64>,
}

impl OutcomeGrid {
    pub fn new(edges: Vec<f64>) -> Result<Self> {
        if edges.len() < 2 {
            return Err(Error::InvalidGrid("need at least two edges".into()));
        }
        if edges.iter().any(|e| !e.is_finite()) {
            return Err(Error::InvalidGrid("edges must be finite".into()));
        }
        if edges.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidGrid("edges must be strictly increasing".into()));
        }
        Ok(Self { edges })
    }

    /// `m` equal cells over `[a, b]`.
    pub fn uniform(a: f64, b: f64, m: usize) -> Result<Self> {
        if m == 0 || !(a < b) {
            return Err(Error::InvalidGrid(format!("uniform grid needs a < b and m >= 1 (a={a}, b={b}, m={m})")));
        }
        let h = (b - a) / m as f64;
        let mut edges: Vec<f64> = (0..m).map(|j| a + h * j as f64).collect();
        edges.push(b);
        Self::new(edges)
    }

    pub fn a(&self) -> f64 {
        self.edges[0]
    }

    pub fn b(&self) -> f64 {
        self.edges[self.edges.len() - 1]
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn cells(&self) -> usize {
        self.edges.len() - 1
    }

    pub fn cell(&self, j: usize) -> (f64, f64) {
        (self.edges[j], self.edges[j + 1])
    }

    pub fn midpoint(&self, j: usize) -> f64 {
        0.5 * (self.edges[j] + self.edges[j + 1])
    }

    /// Index of the cell containing `x`, if any.
    pub fn locate(&self, x: f64) -> Option<usize> {
        if !(x >= self.a() && x < self.b()) {
            return None;
        }
        let idx = self.edges.partition_point(|&e| e <= x);
        Some(idx - 1)
    }

    /// Splits every cell into `factor` equal sub-cells.
    pub fn refine(&self, factor: usize) -> Result<Self> {
        if factor == 0 {
            return Err(Error::InvalidGrid("refinement factor must be positive".into()));
        }
        let mut edges = Vec::with_capacity(self.cells() * factor + 1);
        for j in 0..self.cells() {
            let (lo, hi) = self.cell(j);
            let h = (hi - lo) / factor as f64;
            edges.extend((0..factor).map(|s| lo + h * s as f64));
        }
        edges.push(self.b());
        Self::new(edges)
    }
}

/// A finite union of grid cells, kept sorted and duplicate-free.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct RingSet {
    cells: Vec<usize>,
}

impl RingSet {
    pub fn new(cells: impl IntoIterator<Item = usize>) -> Self {
        let set: BTreeSet<usize> = cells.into_iter().collect();
        Self {
            cells: set.into_iter().collect(),
        }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn all(m: usize) -> Self {
        Self {
            cells: (0..m).collect(),
        }
    }

    pub fn singleton(j: usize) -> Self {
        Self { cells: vec![j] }
    }

    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn contains(&self, j: usize) -> bool {
        self.cells.binary_search(&j).is_ok()
    }

    pub fn union(&self, other: &RingSet) -> RingSet {
        RingSet::new(self.cells.iter().chain(other.cells.iter()).copied())
    }

    pub fn intersection(&self, other: &RingSet) -> RingSet {
        RingSet {
            cells: self.cells.iter().copied().filter(|j| other.contains(*j)).collect(),
        }
    }

    pub fn difference(&self, other: &RingSet) -> RingSet {
        RingSet {
            cells: self.cells.iter().copied().filter(|j| !other.contains(*j)).collect(),
        }
    }

    pub fn is_disjoint(&self, other: &RingSet) -> bool {
        self.intersection(other).is_empty()
    }

    pub fn is_subset(&self, other: &RingSet) -> bool {
        self.cells.iter().all(|j| other.contains(*j))
    }

    pub(crate) fn check_range(&self, m: usize) -> Result<()> {
        match self.cells.last() {
            Some(&j) if j >= m => Err(Error::IndexOutOfRange { index: j, cells: m }),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscretePovm {
    grid: OutcomeGrid,
    effects: Vec<Effect>,
}

impl DiscretePovm {
    /// Checks shape and that each cell operator is an effect. Normalization
    /// is reported separately by [`check_normalization`].
    pub fn new(grid: OutcomeGrid, effects: Vec<HermitianOperator>, tol: f64) -> Result<Self> {
        if effects.len() != grid.cells() {
            return Err(Error::ShapeMismatch(format!(
                "{} effects for {} cells",
                effects.len(),
                grid.cells()
            )));
        }
        let dim = effects[0].dim();
        if dim == 0 {
            return Err(Error::InvalidInput("effects must have positive dimension".into()));
        }
        let effects = effects
            .into_iter()
            .map(|op| {
                if op.dim() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        found: op.dim(),
                    });
                }
                Effect::new(op, tol)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { grid, effects })
    }

    pub(crate) fn from_effects_unchecked(grid: OutcomeGrid, effects: Vec<Effect>) -> Self {
        Self { grid, effects }
    }

    pub fn grid(&self) -> &OutcomeGrid {
        &self.grid
    }

    pub fn effects(&self) -> &[Effect] {
        &self.effects
    }

    pub fn effect(&self, j: usize) -> &HermitianOperator {
        self.effects[j].op()
    }

    pub fn dim(&self) -> usize {
        self.effects[0].dim()
    }

    pub fn cells(&self) -> usize {
        self.effects.len()
    }

    /// `F(delta) = sum_{j in delta} F_j`, summed in ascending cell order.
    pub fn evaluate(&self, delta: &RingSet) -> Result<HermitianOperator> {
        delta.check_range(self.cells())?;
        Ok(delta
            .cells()
            .iter()
            .fold(HermitianOperator::zeros(self.dim()), |acc, &j| {
                &acc + self.effect(j)
            }))
    }

    /// Merges cells so that only the given subset of edges survives. The
    /// first and last edge must be kept.
    pub fn coarsen(&self, keep_edges: &[f64]) -> Result<DiscretePovm> {
        let grid = OutcomeGrid::new(keep_edges.to_vec())?;
        if grid.a() != self.grid.a() || grid.b() != self.grid.b() {
            return Err(Error::InvalidGrid("coarse grid must share end points".into()));
        }
        let mut effects = Vec::with_capacity(grid.cells());
        let mut j = 0;
        for c in 0..grid.cells() {
            let (_, hi) = grid.cell(c);
            let start = j;
            while j < self.cells() && self.grid.cell(j).1 <= hi {
                j += 1;
            }
            if self.grid.edges()[j] != hi {
                return Err(Error::InvalidGrid(format!("edge {hi} is not an edge of the fine grid")));
            }
            let op = self.evaluate(&RingSet::new(start..j))?;
            effects.push(Effect::new_unchecked(op));
        }
        Ok(DiscretePovm { grid, effects })
    }
}

/// Sharp observable on finitely many points.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretePvm {
    points: Vec<f64>,
    projectors: Vec<Projection>,
}

impl DiscretePvm {
    pub fn new(points: Vec<f64>, projectors: Vec<HermitianOperator>, tol: f64) -> Result<Self> {
        if points.len() != projectors.len() || points.is_empty() {
            return Err(Error::ShapeMismatch(format!(
                "{} points for {} projectors",
                points.len(),
                projectors.len()
            )));
        }
        let mut sorted = points.clone();
        sorted.sort_by(f64::total_cmp);
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicatePoint(w[0]));
        }
        let dim = projectors[0].dim();
        let projectors = projectors
            .into_iter()
            .map(|p| {
                if p.dim() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        found: p.dim(),
                    });
                }
                Projection::new(p, tol)
            })
            .collect::<Result<Vec<_>>>()?;
        let pvm = Self { points, projectors };
        let total = pvm.total();
        let resid = operator_norm(&(&total - &HermitianOperator::identity(dim)));
        if resid > tol {
            return Err(Error::MalformedPovm(format!(
                "projectors sum to identity only within {resid:e}"
            )));
        }
        for i in 0..pvm.len() {
            for k in i + 1..pvm.len() {
                let n = spectral_norm(&pvm.projector(i).product(pvm.projector(k)))?;
                if n > tol {
                    return Err(Error::MalformedPovm(format!(
                        "projectors {i} and {k} overlap (||P_i P_k|| = {n:e})"
                    )));
                }
            }
        }
        Ok(pvm)
    }

    pub(crate) fn from_parts_unchecked(points: Vec<f64>, projectors: Vec<Projection>) -> Self {
        Self { points, projectors }
    }

    /// Position-like PVM: projector `k` onto the `k`-th coordinate axis.
    pub fn coordinate(points: Vec<f64>) -> Result<Self> {
        let d = points.len();
        let projectors = (0..d)
            .map(|k| {
                let mut diag = vec![0.0; d];
                diag[k] = 1.0;
                HermitianOperator::from_real_diagonal(&diag)
            })
            .collect();
        Self::new(points, projectors, 1e-12)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn projectors(&self) -> &[Projection] {
        &self.projectors
    }

    pub fn projector(&self, k: usize) -> &HermitianOperator {
        self.projectors[k].op()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.projectors[0].op().dim()
    }

    fn total(&self) -> HermitianOperator {
        self.projectors
            .iter()
            .fold(HermitianOperator::zeros(self.dim()), |acc, p| &acc + p.op())
    }

    /// `sum_k g(lambda_k) P_k`.
    pub fn apply(&self, g: impl Fn(f64) -> f64) -> HermitianOperator {
        self.points
            .iter()
            .zip(&self.projectors)
            .fold(HermitianOperator::zeros(self.dim()), |acc, (&x, p)| {
                &acc + &p.op().scale(g(x))
            })
    }

    /// Embeds the PVM into a grid POVM: every point gets its own cell centred
    /// on it and the gaps between points become zero cells.
    pub fn to_povm(&self) -> Result<DiscretePovm> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&i, &j| self.points[i].total_cmp(&self.points[j]));
        let sorted: Vec<f64> = order.iter().map(|&i| self.points[i]).collect();
        let min_gap = sorted
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min);
        let half = if min_gap.is_finite() { min_gap / 4.0 } else { 0.5 };
        let mut edges = Vec::with_capacity(3 * sorted.len());
        let mut effects = Vec::with_capacity(2 * sorted.len());
        for (pos, (&x, &k)) in sorted.iter().zip(&order).enumerate() {
            if pos > 0 {
                effects.push(Effect::new_unchecked(HermitianOperator::zeros(self.dim())));
            }
            edges.push(x - half);
            edges.push(x + half);
            effects.push(Effect::new_unchecked(self.projector(k).clone()));
        }
        let grid = OutcomeGrid::new(edges)?;
        Ok(DiscretePovm { grid, effects })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommutativityReport {
    pub commutative: bool,
    pub max_commutator_norm: f64,
    pub worst_pair: Option<(usize, usize)>,
}

/// Pairwise cell commutativity. By bilinearity this covers every pair of
/// ring sets, so ring sets are not re-scanned.
pub fn is_commutative(f: &DiscretePovm, tol: f64) -> CommutativityReport {
    let mut max = 0.0;
    let mut worst = None;
    for i in 0..f.cells() {
        for j in i + 1..f.cells() {
            let n = commutator_norm(f.effect(i), f.effect(j)).unwrap_or(f64::INFINITY);
            if n > max {
                max = n;
                worst = Some((i, j));
            }
        }
    }
    CommutativityReport {
        commutative: max <= tol,
        max_commutator_norm: max,
        worst_pair: worst,
    }
}

/// True iff every cell is a projection and distinct cells are orthogonal.
pub fn is_pvm(f: &DiscretePovm, tol: f64) -> bool {
    let projections = f
        .effects()
        .iter()
        .all(|e| idempotency_residual(e.op()) <= tol);
    if !projections {
        return false;
    }
    (0..f.cells()).all(|i| {
        (i + 1..f.cells()).all(|j| {
            spectral_norm(&f.effect(i).product(f.effect(j))).is_ok_and(|n| n <= tol)
        })
    })
}

/// Cells whose effect has norm above `tol`: the grid-resolution support.
pub fn povm_spectrum(f: &DiscretePovm, tol: f64) -> BTreeSet<usize> {
    (0..f.cells())
        .filter(|&j| operator_norm(f.effect(j)) > tol)
        .collect()
}

/// `sum_j g(midpoint_j) F_j`.
pub fn integrate(f: &DiscretePovm, g: impl Fn(f64) -> f64) -> HermitianOperator {
    (0..f.cells()).fold(HermitianOperator::zeros(f.dim()), |acc, j| {
        &acc + &f.effect(j).scale(g(f.grid().midpoint(j)))
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizationCheck {
    pub accepted: bool,
    pub residual: f64,
}

pub fn check_normalization(f: &DiscretePovm, tol: f64) -> NormalizationCheck {
    let total = f
        .evaluate(&RingSet::all(f.cells()))
        .expect("full ring set is always in range");
    let residual = operator_norm(&(&total - &HermitianOperator::identity(f.dim())));
    NormalizationCheck {
        accepted: residual <= tol,
        residual,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag_povm() -> DiscretePovm {
        DiscretePovm::new(
            OutcomeGrid::uniform(0.0, 2.0, 2).unwrap(),
            vec![
                HermitianOperator::from_real_diagonal(&[0.7, 0.2]),
                HermitianOperator::from_real_diagonal(&[0.3, 0.8]),
            ],
            1e-9,
        )
        .unwrap()
    }

    fn pvm2() -> DiscretePovm {
        DiscretePovm::new(
            OutcomeGrid::uniform(0.0, 2.0, 2).unwrap(),
            vec![
                HermitianOperator::from_real_diagonal(&[1.0, 0.0]),
                HermitianOperator::from_real_diagonal(&[0.0, 1.0]),
            ],
            1e-9,
        )
        .unwrap()
    }

    #[test]
    fn grid_rejects_bad_edges() {
        assert!(OutcomeGrid::new(vec![0.0]).is_err());
        assert!(OutcomeGrid::new(vec![0.0, 1.0, 1.0]).is_err());
        assert!(OutcomeGrid::new(vec![0.0, f64::NAN]).is_err());
        assert!(OutcomeGrid::uniform(1.0, 0.0, 3).is_err());
    }

    #[test]
    fn grid_locate_uses_half_open_cells() {
        let g = OutcomeGrid::uniform(0.0, 3.0, 3).unwrap();
        assert_eq!(g.locate(0.0), Some(0));
        assert_eq!(g.locate(1.0), Some(1));
        assert_eq!(g.locate(2.999), Some(2));
        assert_eq!(g.locate(3.0), None);
        assert_eq!(g.refine(2).unwrap().cells(), 6);
    }

    #[test]
    fn ring_set_algebra() {
        let a = RingSet::new([3, 1, 1, 2]);
        assert_eq!(a.cells(), &[1, 2, 3]);
        let b = RingSet::new([2, 5]);
        assert_eq!(a.union(&b).cells(), &[1, 2, 3, 5]);
        assert_eq!(a.intersection(&b).cells(), &[2]);
        assert_eq!(a.difference(&b).cells(), &[1, 3]);
        assert!(!a.is_disjoint(&b));
    }

    #[test]
    fn evaluate_examples() {
        let f = diag_povm();
        let all = f.evaluate(&RingSet::all(2)).unwrap();
        assert!(all.max_abs_diff(&HermitianOperator::identity(2)) < 1e-15);
        assert_eq!(f.evaluate(&RingSet::empty()).unwrap(), HermitianOperator::zeros(2));
        assert_eq!(
            f.evaluate(&RingSet::singleton(0)).unwrap(),
            HermitianOperator::from_real_diagonal(&[0.7, 0.2])
        );
        assert!(matches!(
            f.evaluate(&RingSet::singleton(2)),
            Err(Error::IndexOutOfRange { index: 2, cells: 2 })
        ));
    }

    #[test]
    fn commutativity_examples() {
        let r = is_commutative(&diag_povm(), 1e-12);
        assert!(r.commutative);
        assert_eq!(r.max_commutator_norm, 0.0);

        let p = HermitianOperator::from_real_diagonal(&[0.5, 0.0]);
        let q = HermitianOperator::from_real_rows(&[&[0.25, 0.25], &[0.25, 0.25]]).unwrap();
        let rest = &(&HermitianOperator::identity(2) - &p) - &q;
        let f = DiscretePovm::new(OutcomeGrid::uniform(0.0, 3.0, 3).unwrap(), vec![p, q, rest], 1e-9).unwrap();
        let r = is_commutative(&f, 1e-12);
        assert!(!r.commutative);
        assert!(r.max_commutator_norm > 0.1);

        let single = DiscretePovm::new(
            OutcomeGrid::uniform(0.0, 1.0, 1).unwrap(),
            vec![HermitianOperator::identity(3)],
            1e-9,
        )
        .unwrap();
        assert!(is_commutative(&single, 0.0).commutative);
    }

    #[test]
    fn pvm_examples() {
        assert!(is_pvm(&pvm2(), 1e-12));
        assert!(!is_pvm(&diag_povm(), 1e-12));
        let p = crate::operators::Projection::onto_span(&nalgebra::DMatrix::from_row_slice(
            2,
            1,
            &[num_complex::Complex64::new(0.6, 0.0), num_complex::Complex64::new(0.0, 0.8)],
        ));
        let f = DiscretePovm::new(
            OutcomeGrid::uniform(0.0, 1.0, 2).unwrap(),
            vec![p.op().clone(), &HermitianOperator::identity(2) - p.op()],
            1e-9,
        )
        .unwrap();
        assert!(is_pvm(&f, 1e-12));
    }

    #[test]
    fn spectrum_excludes_zero_cells() {
        assert_eq!(povm_spectrum(&pvm2(), TOL_SPECTRUM), BTreeSet::from([0, 1]));
        let f = DiscretePovm::new(
            OutcomeGrid::uniform(0.0, 3.0, 3).unwrap(),
            vec![
                HermitianOperator::from_real_diagonal(&[1.0, 0.0]),
                HermitianOperator::zeros(2),
                HermitianOperator::from_real_diagonal(&[0.0, 1.0]),
            ],
            1e-9,
        )
        .unwrap();
        assert_eq!(povm_spectrum(&f, TOL_SPECTRUM), BTreeSet::from([0, 2]));
    }

    #[test]
    fn integrate_examples() {
        let f = diag_povm();
        assert!(integrate(&f, |_| 1.0).max_abs_diff(&HermitianOperator::identity(2)) < 1e-15);
        let pvm = DiscretePvm::coordinate(vec![0.0, 1.0]).unwrap().to_povm().unwrap();
        let a = integrate(&pvm, |x| x);
        assert!(a.max_abs_diff(&HermitianOperator::from_real_diagonal(&[0.0, 1.0])) < 1e-15);
    }

    #[test]
    fn normalization_examples() {
        let c = check_normalization(&diag_povm(), TOL_NORM);
        assert!(c.accepted && c.residual <= 1e-12);
        let f = DiscretePovm::new(
            OutcomeGrid::uniform(0.0, 1.0, 2).unwrap(),
            vec![
                HermitianOperator::from_real_diagonal(&[0.5, 0.4]),
                HermitianOperator::from_real_diagonal(&[0.4, 0.5]),
            ],
            1e-9,
        )
        .unwrap();
        let c = check_normalization(&f, TOL_NORM);
        assert!(!c.accepted);
        assert!((c.residual - 0.1).abs() < 1e-12);
    }

    #[test]
    fn pvm_embedding_keeps_spectrum_on_point_cells() {
        let pvm = DiscretePvm::coordinate(vec![0.3, -1.0, 2.0]).unwrap();
        let f = pvm.to_povm().unwrap();
        assert_eq!(f.cells(), 5);
        assert!(is_pvm(&f, 1e-12));
        assert!(is_commutative(&f, 1e-12).commutative);
        assert_eq!(povm_spectrum(&f, TOL_SPECTRUM), BTreeSet::from([0, 2, 4]));
        let g = f.grid();
        assert_eq!(g.midpoint(0), -1.0);
    }

    #[test]
    fn coarsen_merges_cells() {
        let f = diag_povm();
        let c = f.coarsen(&[0.0, 2.0]).unwrap();
        assert_eq!(c.cells(), 1);
        assert!(c.effect(0).max_abs_diff(&HermitianOperator::identity(2)) < 1e-15);
        assert!(f.coarsen(&[0.0, 0.5, 2.0]).is_err());
    }

    #[test]
    fn pvm_rejects_duplicates_and_overlaps() {
        assert!(matches!(
            DiscretePvm::coordinate(vec![1.0, 1.0]),
            Err(Error::DuplicatePoint(_))
        ));
        let p = HermitianOperator::from_real_diagonal(&[1.0, 0.0]);
        assert!(DiscretePvm::new(vec![0.0, 1.0], vec![p.clone(), p], 1e-9).is_err());
    }
}
