//! Sharp reconstruction of commuting POVMs.
//!
//! A commuting [`DiscretePovm`] is jointly diagonalized, every joint
//! eigenspace gets an exact label obtained by Cantor-encoding the binary
//! expansion of its eigenvalue pattern, and the eigenvalue pattern itself is
//! read off as a Markov kernel. The resulting [`VonNeumannTriplet`] satisfies
//! `F(cell_j) = sum_k mu_j(lambda_k) P_k`, and [`smear`] inverts it.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::operators::{
    cluster_sorted, hermitian_eigen, hermitian_part, operator_norm, sorted_eigen, spectral_norm, CMatrix, Effect,
    HermitianOperator, Projection,
};
use crate::povm::{check_normalization, is_commutative, DiscretePovm, DiscretePvm, OutcomeGrid, RingSet, TOL_NORM};

pub const DEFAULT_BITS_PER_EFFECT: u32 = 16;

#[derive(Debug, Clone)]
pub struct ReconstructionOptions {
    /// Commutativity, block-scalar and round-trip tolerance.
    pub tol: f64,
    /// Gap below which joint eigenvalue patterns are considered equal.
    /// `None` means `1e-8 * max_j ||F_j||`.
    pub cluster_tol: Option<f64>,
    pub bits_per_effect: u32,
    /// Seed for the random linear combinations used in joint diagonalization.
    pub seed: u64,
    pub max_refine: usize,
    pub max_doublings: u32,
}

impl Default for ReconstructionOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            cluster_tol: None,
            bits_per_effect: DEFAULT_BITS_PER_EFFECT,
            seed: 42,
            max_refine: 16,
            max_doublings: 6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct JointEigenstructure {
    pub projectors: Vec<Projection>,
    /// `eigen_table[k][j]`: eigenvalue of cell effect `j` on eigenspace `k`.
    pub eigen_table: Vec<Vec<f64>>,
    pub cluster_tol: f64,
    /// `max_j ||F_j - sum_k eigen_table[k][j] P_k||`.
    pub residual: f64,
}

impl JointEigenstructure {
    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }
}

struct Block {
    basis: CMatrix,
    row: Vec<f64>,
}

fn compress(basis: &CMatrix, op: &HermitianOperator) -> CMatrix {
    hermitian_part(&(basis.adjoint() * op.matrix() * basis))
}

/// Deviation of the compressed effect from a multiple of the identity.
fn scalar_deviation(b: &CMatrix) -> (f64, f64) {
    let r = b.nrows();
    let mean = b.trace().re / r as f64;
    let shifted = b - CMatrix::identity(r, r).scale(mean);
    (mean, spectral_norm(&shifted).unwrap_or(f64::INFINITY))
}

fn lex_desc(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match y.total_cmp(x) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    Ordering::Equal
}

fn row_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Maximal common eigenspace decomposition of a commuting POVM.
///
/// A generic combination `sum_j c_j F_j` is diagonalized and clustered; any
/// cluster on which some effect is not scalar is split again with fresh
/// coefficients. Eigenspaces with equal eigenvalue patterns are merged and
/// the result is sorted by descending lexicographic order of the patterns.
pub fn joint_diagonalize(f: &DiscretePovm, opts: &ReconstructionOptions) -> Result<JointEigenstructure> {
    let comm = is_commutative(f, opts.tol);
    if !comm.commutative {
        return Err(Error::NonCommuting {
            norm: comm.max_commutator_norm,
            pair: comm.worst_pair.unwrap_or((0, 0)),
        });
    }
    let scale = f
        .effects()
        .iter()
        .map(|e| operator_norm(e.op()))
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let cluster_tol = opts.cluster_tol.unwrap_or(1e-8 * scale);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let d = f.dim();

    let mut pending = vec![CMatrix::identity(d, d)];
    let mut done: Vec<Block> = Vec::new();
    let mut passes = 0;
    let mut worst = 0.0;
    while !pending.is_empty() {
        if passes > opts.max_refine {
            return Err(Error::RefinementFailure {
                passes,
                residual: worst,
            });
        }
        passes += 1;
        worst = 0.0;
        let mut next = Vec::new();
        for basis in pending {
            let compressed: Vec<CMatrix> = f.effects().iter().map(|e| compress(&basis, e.op())).collect();
            let mut row = Vec::with_capacity(compressed.len());
            let mut dev_max: f64 = 0.0;
            for b in &compressed {
                let (mean, dev) = scalar_deviation(b);
                row.push(mean);
                dev_max = dev_max.max(dev);
            }
            if dev_max <= opts.tol {
                done.push(Block { basis, row });
                continue;
            }
            worst = f64::max(worst, dev_max);
            let mut combo = CMatrix::zeros(basis.ncols(), basis.ncols());
            for b in &compressed {
                let c: f64 = rng.sample(StandardNormal);
                combo += b.scale(c);
            }
            let (vals, vecs) = sorted_eigen(&hermitian_part(&combo))?;
            let spread = vals.iter().map(|v| v.abs()).fold(0.0, f64::max);
            let tol = (1e-8 * spread).max(f64::MIN_POSITIVE);
            let clusters = cluster_sorted(&vals, tol);
            for range in clusters {
                let sub = vecs.columns(range.start, range.len()).into_owned();
                next.push(&basis * sub);
            }
        }
        pending = next;
    }

    // Merge eigenspaces with indistinguishable eigenvalue patterns.
    done.sort_by(|a, b| lex_desc(&a.row, &b.row));
    let mut merged: Vec<Block> = Vec::with_capacity(done.len());
    for blk in done {
        if let Some(target) = merged.iter_mut().find(|m| row_gap(&m.row, &blk.row) <= cluster_tol) {
            let r1 = target.basis.ncols() as f64;
            let r2 = blk.basis.ncols() as f64;
            for (x, y) in target.row.iter_mut().zip(&blk.row) {
                *x = (*x * r1 + y * r2) / (r1 + r2);
            }
            let joined = CMatrix::from_fn(d, target.basis.ncols() + blk.basis.ncols(), |i, c| {
                if c < target.basis.ncols() {
                    target.basis[(i, c)]
                } else {
                    blk.basis[(i, c - target.basis.ncols())]
                }
            });
            target.basis = joined;
        } else {
            merged.push(blk);
        }
    }
    merged.sort_by(|a, b| lex_desc(&a.row, &b.row));

    let projectors: Vec<Projection> = merged.iter().map(|b| Projection::onto_span(&b.basis)).collect();
    let eigen_table: Vec<Vec<f64>> = merged.into_iter().map(|b| b.row).collect();
    let residual = reassembly_residual(f, &projectors, &eigen_table);
    if residual > opts.tol {
        return Err(Error::RefinementFailure { passes, residual });
    }
    Ok(JointEigenstructure {
        projectors,
        eigen_table,
        cluster_tol,
        residual,
    })
}

fn reassembly_residual(f: &DiscretePovm, projectors: &[Projection], table: &[Vec<f64>]) -> f64 {
    (0..f.cells())
        .map(|j| {
            let rebuilt = projectors
                .iter()
                .zip(table)
                .fold(HermitianOperator::zeros(f.dim()), |acc, (p, row)| {
                    &acc + &p.op().scale(row[j])
                });
            operator_norm(&(&rebuilt - f.effect(j)))
        })
        .fold(0.0, f64::max)
}

/// Exact value of `sum_i x_i / 3^i` for binary digits `x_1, x_2, ...`.
pub fn cantor_encode(digits: &[u8]) -> Result<BigRational> {
    let mut numer = BigInt::zero();
    let three = BigInt::from(3u8);
    for (i, &x) in digits.iter().enumerate() {
        if x > 1 {
            return Err(Error::NonBinaryDigit { position: i, digit: x });
        }
        numer = numer * &three + BigInt::from(x);
    }
    let denom = num_traits::pow(three, digits.len());
    Ok(BigRational::new(numer, denom))
}

/// First `bits` binary digits of `v` clamped to `[0, 1 - 2^-bits]`,
/// i.e. the expansion of `floor(v 2^bits)`.
pub fn quantize(v: f64, bits: u32) -> Vec<u8> {
    if !(v > 0.0) {
        return vec![0; bits as usize];
    }
    if v >= 1.0 {
        return vec![1; bits as usize];
    }
    // Doubling and subtracting one are exact in binary floating point.
    let mut x = v;
    (0..bits)
        .map(|_| {
            x *= 2.0;
            if x >= 1.0 {
                x -= 1.0;
                1
            } else {
                0
            }
        })
        .collect()
}

/// Eigenvalue of the generator on one joint eigenspace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Label {
    /// Cantor label, compared exactly.
    Exact(BigRational),
    /// Ordinary spectral point, e.g. a position sample.
    Real(OrderedF64),
}

/// `f64` with a total order, for labels that are plain reals.
#[derive(Debug, Clone, Copy)]
pub struct OrderedF64(pub f64);

impl PartialEq for OrderedF64 {
    fn eq(&self, other: &Self) -> bool {
        self.0.total_cmp(&other.0) == Ordering::Equal
    }
}

impl Eq for OrderedF64 {}

impl Label {
    pub fn real(x: f64) -> Self {
        Label::Real(OrderedF64(x))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Label::Exact(q) => q.to_f64().unwrap_or(f64::NAN),
            Label::Real(x) => x.0,
        }
    }

    /// `self - other`, exact when both labels are exact.
    pub fn diff_f64(&self, other: &Label) -> f64 {
        match (self, other) {
            (Label::Exact(a), Label::Exact(b)) => (a - b).to_f64().unwrap_or(f64::NAN),
            _ => self.to_f64() - other.to_f64(),
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Exact(q) if q.is_integer() => write!(f, "{}/1", q.numer()),
            Label::Exact(q) => write!(f, "{}/{}", q.numer(), q.denom()),
            Label::Real(x) => write!(f, "{}", x.0),
        }
    }
}

impl FromStr for Label {
    type Err = Error;

    /// `"p/q"` parses as an exact label, anything else as a finite real.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some((p, q)) = s.split_once('/') {
            let p: BigInt = p.trim().parse().map_err(|_| Error::Parse(format!("bad numerator in {s:?}")))?;
            let q: BigInt = q.trim().parse().map_err(|_| Error::Parse(format!("bad denominator in {s:?}")))?;
            if q.is_zero() {
                return Err(Error::Parse(format!("zero denominator in {s:?}")));
            }
            return Ok(Label::Exact(BigRational::new(p, q)));
        }
        let x: f64 = s.parse().map_err(|_| Error::Parse(format!("bad label {s:?}")))?;
        if !x.is_finite() {
            return Err(Error::Parse(format!("non-finite label {s:?}")));
        }
        Ok(Label::real(x))
    }
}

#[derive(Debug, Clone)]
pub struct Generator {
    pub labels: Vec<Label>,
    pub projectors: Vec<Projection>,
    /// `A = sum_k lambda_k P_k` in floating point.
    pub operator: HermitianOperator,
    /// Quantization depth that made the labels injective, for Cantor labels.
    pub bits_per_effect: Option<u32>,
    pub doublings: u32,
}

impl Generator {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label_values(&self) -> Vec<f64> {
        self.labels.iter().map(Label::to_f64).collect()
    }

    /// The sharp observable as a PVM on the floating-point label values.
    /// Fails if two exact labels round to the same `f64`.
    pub fn pvm(&self) -> Result<DiscretePvm> {
        let pts = self.label_values();
        let mut sorted = pts.clone();
        sorted.sort_by(f64::total_cmp);
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicatePoint(w[0]));
        }
        Ok(DiscretePvm::from_parts_unchecked(pts, self.projectors.clone()))
    }

    pub(crate) fn from_labels(labels: Vec<Label>, projectors: Vec<Projection>, bits: Option<u32>, doublings: u32) -> Self {
        let dim = projectors[0].op().dim();
        let operator = labels
            .iter()
            .zip(&projectors)
            .fold(HermitianOperator::zeros(dim), |acc, (l, p)| {
                &acc + &p.op().scale(l.to_f64())
            });
        Self {
            labels,
            projectors,
            operator,
            bits_per_effect: bits,
            doublings,
        }
    }

    /// Generator of a PVM whose points are used directly as labels.
    pub fn from_pvm(pvm: &DiscretePvm) -> Self {
        let labels = pvm.points().iter().map(|&x| Label::real(x)).collect();
        Self::from_labels(labels, pvm.projectors().to_vec(), None, 0)
    }
}

/// Cantor-labels every joint eigenspace. Collisions between distinct rows
/// double the quantization depth, up to `max_doublings` times.
pub fn build_generator(je: &JointEigenstructure, bits_per_effect: u32, max_doublings: u32) -> Result<Generator> {
    if je.is_empty() {
        return Err(Error::InvalidInput("empty joint eigenstructure".into()));
    }
    if bits_per_effect == 0 {
        return Err(Error::InvalidInput("bits_per_effect must be positive".into()));
    }
    let k = je.len();
    for a in 0..k {
        for b in a + 1..k {
            if je.eigen_table[a] == je.eigen_table[b] {
                return Err(Error::SeparationFailure(a, b));
            }
        }
    }
    let mut bits = bits_per_effect;
    for doublings in 0..=max_doublings {
        let labels = je
            .eigen_table
            .iter()
            .map(|row| {
                let digits: Vec<u8> = row.iter().flat_map(|&v| quantize(v, bits)).collect();
                cantor_encode(&digits)
            })
            .collect::<Result<Vec<_>>>()?;
        match first_collision(&labels) {
            None => {
                let labels = labels.into_iter().map(Label::Exact).collect();
                return Ok(Generator::from_labels(labels, je.projectors.clone(), Some(bits), doublings));
            }
            Some((a, b)) if doublings == max_doublings => return Err(Error::SeparationFailure(a, b)),
            Some(_) => bits = bits.saturating_mul(2),
        }
    }
    unreachable!("loop returns on its last iteration")
}

fn first_collision(labels: &[BigRational]) -> Option<(usize, usize)> {
    let mut order: Vec<usize> = (0..labels.len()).collect();
    order.sort_by(|&a, &b| labels[a].cmp(&labels[b]));
    order
        .windows(2)
        .find(|w| labels[w[0]] == labels[w[1]])
        .map(|w| (w[0].min(w[1]), w[0].max(w[1])))
}

/// Row-stochastic table `mu[k][j] = mu_{cell j}(lambda_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    rows: Vec<Vec<f64>>,
}

/// Default tolerance on kernel row sums.
pub const TOL_ROW: f64 = 1e-9;

impl KernelMatrix {
    /// Validates shape, entry range and row sums; entries are clamped to `[0, 1]`.
    pub fn new(rows: Vec<Vec<f64>>, tol_row: f64) -> Result<Self> {
        let m = rows.first().map_or(0, Vec::len);
        if rows.is_empty() || m == 0 {
            return Err(Error::ShapeMismatch("kernel needs at least one row and one column".into()));
        }
        let mut out = Vec::with_capacity(rows.len());
        for (k, row) in rows.into_iter().enumerate() {
            if row.len() != m {
                return Err(Error::ShapeMismatch(format!("row {k} has {} entries, expected {m}", row.len())));
            }
            if row.iter().any(|v| !v.is_finite() || *v < -tol_row || *v > 1.0 + tol_row) {
                return Err(Error::NonStochastic {
                    row: k,
                    sum: row.iter().sum(),
                });
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > tol_row {
                return Err(Error::NonStochastic { row: k, sum });
            }
            out.push(row.into_iter().map(|v| v.clamp(0.0, 1.0)).collect());
        }
        Ok(Self { rows: out })
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.rows[k]
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.rows[0].len()
    }

    /// `mu_delta(lambda_k)` for a union of cells.
    pub fn value(&self, k: usize, delta: &RingSet) -> Result<f64> {
        delta.check_range(self.n_cols())?;
        Ok(delta.cells().iter().map(|&j| self.rows[k][j]).sum())
    }

    pub fn identity(k: usize) -> Self {
        Self {
            rows: (0..k)
                .map(|i| (0..k).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
                .collect(),
        }
    }
}

/// Reads the kernel off the joint eigenstructure.
pub fn extract_kernel(f: &DiscretePovm, je: &JointEigenstructure, tol_row: f64) -> Result<KernelMatrix> {
    if je.eigen_table.first().map_or(0, Vec::len) != f.cells() {
        return Err(Error::ShapeMismatch("eigen table does not match the POVM".into()));
    }
    KernelMatrix::new(je.eigen_table.clone(), tol_row).map_err(|e| match e {
        Error::NonStochastic { row, sum } => {
            Error::MalformedPovm(format!("kernel row {row} sums to {sum}, not 1"))
        }
        other => other,
    })
}

/// `tr(P_k F_j) / tr(P_k)`, computed without the eigen table.
pub fn kernel_by_trace(f: &DiscretePovm, projectors: &[Projection]) -> Vec<Vec<f64>> {
    projectors
        .iter()
        .map(|p| {
            let tr = p.op().trace();
            (0..f.cells())
                .map(|j| p.op().product(f.effect(j)).trace().re / tr)
                .collect()
        })
        .collect()
}

pub(crate) fn smear_projectors(projectors: &[Projection], mu: &KernelMatrix, grid: &OutcomeGrid) -> Result<DiscretePovm> {
    if projectors.len() != mu.n_rows() {
        return Err(Error::ShapeMismatch(format!(
            "{} projectors for {} kernel rows",
            projectors.len(),
            mu.n_rows()
        )));
    }
    if grid.cells() != mu.n_cols() {
        return Err(Error::ShapeMismatch(format!(
            "{} grid cells for {} kernel columns",
            grid.cells(),
            mu.n_cols()
        )));
    }
    let dim = projectors[0].op().dim();
    let effects = (0..mu.n_cols())
        .map(|j| {
            let op = projectors
                .iter()
                .zip(mu.rows())
                .fold(HermitianOperator::zeros(dim), |acc, (p, row)| {
                    &acc + &p.op().scale(row[j])
                });
            Effect::new_unchecked(op)
        })
        .collect();
    Ok(DiscretePovm::from_effects_unchecked(grid.clone(), effects))
}

/// `F_j = sum_k mu[k][j] P_k`.
pub fn smear(e: &DiscretePvm, mu: &KernelMatrix, grid: &OutcomeGrid) -> Result<DiscretePovm> {
    smear_projectors(e.projectors(), mu, grid)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparationReport {
    pub separated: bool,
    /// Smallest max-entry distance between two rows.
    pub min_gap: f64,
    pub closest_pair: Option<(usize, usize)>,
}

/// Rows pairwise distinct: every pair differs by more than `tol` in some column.
pub fn check_separation(mu: &KernelMatrix, tol: f64) -> SeparationReport {
    let mut min_gap = f64::INFINITY;
    let mut pair = None;
    for a in 0..mu.n_rows() {
        for b in a + 1..mu.n_rows() {
            let g = row_gap(mu.row(a), mu.row(b));
            if g < min_gap {
                min_gap = g;
                pair = Some((a, b));
            }
        }
    }
    SeparationReport {
        separated: min_gap > tol,
        min_gap,
        closest_pair: pair,
    }
}

/// `(F, A, mu)` with `F(cell_j) = mu_j(A)`.
#[derive(Debug, Clone)]
pub struct VonNeumannTriplet {
    pub povm: DiscretePovm,
    pub generator: Generator,
    pub kernel: KernelMatrix,
    /// Indices of labels on which the kernel is a probability measure. In
    /// finite dimension every label qualifies.
    pub gamma: Vec<usize>,
    /// `max_j ||smear(E, mu)_j - F_j||`.
    pub residual: f64,
}

impl VonNeumannTriplet {
    pub fn grid(&self) -> &OutcomeGrid {
        self.povm.grid()
    }

    /// `mu_delta(lambda_k)` through the trace formula on `F(delta)`.
    pub fn trace_value(&self, k: usize, delta: &RingSet) -> Result<f64> {
        let fd = self.povm.evaluate(delta)?;
        let p = self.generator.projectors[k].op();
        Ok(p.product(&fd).trace().re / p.trace())
    }

    /// Re-smears the sharp part with the kernel.
    pub fn smear(&self) -> Result<DiscretePovm> {
        smear_projectors(&self.generator.projectors, &self.kernel, self.povm.grid())
    }

    pub(crate) fn assemble(povm: DiscretePovm, generator: Generator, kernel: KernelMatrix) -> Result<Self> {
        let rebuilt = smear_projectors(&generator.projectors, &kernel, povm.grid())?;
        let residual = max_cell_distance(&rebuilt, &povm);
        let gamma = (0..generator.len()).collect();
        Ok(Self {
            povm,
            generator,
            kernel,
            gamma,
            residual,
        })
    }
}

/// `max_j ||F_j - G_j||` over matching cells.
pub fn max_cell_distance(f: &DiscretePovm, g: &DiscretePovm) -> f64 {
    (0..f.cells().min(g.cells()))
        .map(|j| operator_norm(&(f.effect(j) - g.effect(j))))
        .fold(0.0, f64::max)
}

/// Full reconstruction pipeline.
pub fn build_triplet(f: &DiscretePovm, opts: &ReconstructionOptions) -> Result<VonNeumannTriplet> {
    let norm = check_normalization(f, TOL_NORM.max(opts.tol));
    if !norm.accepted {
        return Err(Error::MalformedPovm(format!(
            "effects sum to the identity only within {:e}",
            norm.residual
        )));
    }
    let je = joint_diagonalize(f, opts)?;
    let generator = build_generator(&je, opts.bits_per_effect, opts.max_doublings)?;
    let kernel = extract_kernel(f, &je, TOL_ROW.max(opts.tol))?;
    let triplet = VonNeumannTriplet::assemble(f.clone(), generator, kernel)?;
    if triplet.residual > opts.tol {
        return Err(Error::RefinementFailure {
            passes: 0,
            residual: triplet.residual,
        });
    }
    Ok(triplet)
}

/// Lagrange interpolation of the kernel column through the labels, applied
/// to the generator matrix: `max_j ||p_j(A) - F_j||`.
///
/// `p_j(A)` is evaluated as `V p_j(D) V*` from a fresh eigendecomposition of
/// `A`. Since `p_j` only matters on the spectrum, a computed eigenvalue that
/// sits within a quarter of the smallest label gap of exactly one label is
/// read as that label; anything else goes through the barycentric formula.
/// Evaluating `p_j` pointwise at rounded eigenvalues costs `|p_j'| * eps`,
/// and `|p_j'|` reaches 1e12 for crowded labels at `K = 8`.
pub fn interpolation_residual(t: &VonNeumannTriplet) -> f64 {
    let g = &t.generator;
    let k = g.len();
    let Ok(eig) = hermitian_eigen(g.operator.matrix()) else {
        return f64::INFINITY;
    };
    let weights: Vec<f64> = (0..k)
        .map(|a| {
            1.0 / (0..k)
                .filter(|&b| b != a)
                .map(|b| g.labels[a].diff_f64(&g.labels[b]))
                .product::<f64>()
        })
        .collect();
    let nodes: Vec<f64> = g.labels.iter().map(Label::to_f64).collect();
    let mut gap = f64::INFINITY;
    for a in 0..k {
        for b in 0..a {
            gap = gap.min((nodes[a] - nodes[b]).abs());
        }
    }
    let snap = |x: f64| -> Option<usize> {
        let near: Vec<usize> = (0..k).filter(|&a| (x - nodes[a]).abs() < gap / 4.0).collect();
        (near.len() == 1).then(|| near[0])
    };
    let v = &eig.eigenvectors;
    (0..t.povm.cells())
        .map(|j| {
            let p = |x: f64| -> f64 {
                if let Some(a) = snap(x) {
                    return t.kernel.row(a)[j];
                }
                let (mut num, mut den) = (0.0, 0.0);
                for a in 0..k {
                    let y = t.kernel.row(a)[j];
                    let dx = x - nodes[a];
                    if dx == 0.0 {
                        return y;
                    }
                    num += weights[a] * y / dx;
                    den += weights[a] / dx;
                }
                num / den
            };
            let diag = CMatrix::from_diagonal(&eig.eigenvalues.map(|x| Complex64::new(p(x), 0.0)));
            let pa = v * diag * v.adjoint();
            spectral_norm(&(pa - t.povm.effect(j).matrix())).unwrap_or(f64::INFINITY)
        })
        .fold(0.0, f64::max)
}

/// Triplet of a sharp observable: identity kernel on its own points.
pub fn pvm_triplet(e: &DiscretePvm) -> Result<VonNeumannTriplet> {
    let povm = e.to_povm()?;
    let mut rows = Vec::with_capacity(e.len());
    let mut order: Vec<usize> = (0..e.len()).collect();
    order.sort_by(|&a, &b| e.points()[a].total_cmp(&e.points()[b]));
    for k in 0..e.len() {
        let pos = order.iter().position(|&o| o == k).expect("index present");
        let mut row = vec![0.0; povm.cells()];
        row[2 * pos] = 1.0;
        rows.push(row);
    }
    let kernel = KernelMatrix::new(rows, TOL_ROW)?;
    VonNeumannTriplet::assemble(povm, Generator::from_pvm(e), kernel)
}
