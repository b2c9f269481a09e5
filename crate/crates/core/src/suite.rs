//! Standard check suites and demos, shared by the command-line tool.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::analysis::{
    absolute_continuity_constant, absolute_continuity_povm, cell_partitions, default_ring_samples, dini_check,
    norm1_kernel, norm1_povm, power_table, sigma_additivity_check, strong_feller_family_check,
    strong_feller_triplet, uniform_continuity_check, uniform_continuity_povm, DominatingMeasure, KernelModel,
    PropertyReport, SpectrumDomain, Verdict,
};
use crate::error::{Error, Result};
use crate::kernels::{
    unsharp_position, weak_convergence_check, ConvolutionKernel, Interval, IntervalSet, KernelProfile, PointKernel,
    TailPolicy, TestFunction,
};
use crate::povm::{DiscretePovm, OutcomeGrid, RingSet};
use crate::reconstruction::{build_triplet, check_separation, KernelMatrix, ReconstructionOptions, VonNeumannTriplet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Property {
    UniformContinuity,
    StrongFeller,
    Norm1,
    AbsoluteContinuity,
    SigmaAdditivity,
    Separation,
    WeakConvergence,
    Dini,
}

impl Property {
    pub const ALL: [Property; 8] = [
        Property::UniformContinuity,
        Property::StrongFeller,
        Property::Norm1,
        Property::AbsoluteContinuity,
        Property::SigmaAdditivity,
        Property::Separation,
        Property::WeakConvergence,
        Property::Dini,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Property::UniformContinuity => "uniform-continuity",
            Property::StrongFeller => "strong-feller",
            Property::Norm1 => "norm-1",
            Property::AbsoluteContinuity => "absolute-continuity",
            Property::SigmaAdditivity => "sigma-additivity",
            Property::Separation => "separation",
            Property::WeakConvergence => "weak-convergence",
            Property::Dini => "dini",
        }
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Property {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Property::ALL
            .into_iter()
            .find(|p| p.name() == s.trim())
            .ok_or_else(|| Error::InvalidInput(format!("unknown property {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyKind {
    /// `(-inf, -n)`, `n = 1..=10`, decreasing to the empty set.
    HalfLines,
    /// `[c, c + 2^-n]`, `n = 1..=40`, decreasing to `{c}`.
    Shrinking,
    /// `[0, 1]` repeated.
    Constant,
}

impl FromStr for FamilyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "halflines" => Ok(FamilyKind::HalfLines),
            "shrinking" => Ok(FamilyKind::Shrinking),
            "constant" => Ok(FamilyKind::Constant),
            other => Err(Error::InvalidInput(format!("unknown family {other:?}"))),
        }
    }
}

pub fn family(kind: FamilyKind, anchor: f64) -> (Vec<IntervalSet>, IntervalSet) {
    match kind {
        FamilyKind::HalfLines => (
            (1..=10).map(|n| Interval::below(-(n as f64)).into()).collect(),
            IntervalSet::empty(),
        ),
        FamilyKind::Shrinking => (
            (1..=40)
                .map(|n| Interval::closed(anchor, anchor + 2f64.powi(-n)).into())
                .collect(),
            Interval::point(anchor).into(),
        ),
        FamilyKind::Constant => {
            let d: IntervalSet = Interval::closed(0.0, 1.0).into();
            (vec![d.clone(); 5], d)
        }
    }
}

/// Compactly supported profiles live on the spectrum `[0, 1]`; the rest on
/// the real line.
pub fn default_domain(p: &KernelProfile) -> SpectrumDomain {
    if p.is_unit_supported() {
        SpectrumDomain::unit()
    } else {
        SpectrumDomain::Real
    }
}

/// Parses `unit`, `real` or `lo,hi`.
pub fn parse_domain(s: &str) -> Result<SpectrumDomain> {
    match s.trim() {
        "unit" => Ok(SpectrumDomain::unit()),
        "real" => Ok(SpectrumDomain::Real),
        t => {
            let (a, b) = t
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("domain {t:?} is not unit, real or lo,hi")))?;
            let lo: f64 = a.trim().parse().map_err(|_| Error::Parse(format!("bad domain start {a:?}")))?;
            let hi: f64 = b.trim().parse().map_err(|_| Error::Parse(format!("bad domain end {b:?}")))?;
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::Parse(format!("domain [{lo}, {hi}] is empty or unbounded")));
            }
            Ok(SpectrumDomain::Interval { lo, hi })
        }
    }
}

#[derive(Debug, Clone)]
pub struct SuiteOptions {
    pub tol: f64,
    pub quad_tol: f64,
    pub seed: u64,
    pub family: Option<FamilyKind>,
    pub domain: Option<SpectrumDomain>,
    pub grid: Option<OutcomeGrid>,
    /// Spectrum samples for discretized kernel models.
    pub points: Vec<f64>,
    pub reconstruction: ReconstructionOptions,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            quad_tol: 1e-10,
            seed: 42,
            family: None,
            domain: None,
            grid: None,
            points: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            reconstruction: ReconstructionOptions::default(),
        }
    }
}

fn anchor(domain: &SpectrumDomain) -> f64 {
    match domain {
        SpectrumDomain::Interval { lo, .. } => *lo,
        _ => 0.0,
    }
}

fn default_grid(k: &ConvolutionKernel, points: &[f64]) -> Result<OutcomeGrid> {
    let lo = points.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = points.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if k.profile.is_unit_supported() {
        OutcomeGrid::uniform(lo - 1.0, hi, 20)
    } else {
        let s = 5.0 * k.profile.scale();
        OutcomeGrid::uniform(lo - s, hi + s, 24)
    }
}

/// Discretized `Q^f` on `opts.points`, with tails absorbed at the grid ends.
pub fn discretize(k: &ConvolutionKernel, opts: &SuiteOptions) -> Result<VonNeumannTriplet> {
    let grid = match &opts.grid {
        Some(g) => g.clone(),
        None => default_grid(k, &opts.points)?,
    };
    unsharp_position(k, &opts.points, &grid, TailPolicy::AbsorbToBoundary)
}

fn separation_report(kernel: &KernelMatrix, tol: f64) -> PropertyReport {
    let s = check_separation(kernel, tol);
    let mut r = PropertyReport::new("separation");
    r.residuals.push((0, s.min_gap));
    r.estimate = Some(s.min_gap);
    if s.separated {
        r.verdict = Verdict::Holds;
    } else {
        let (a, b) = s.closest_pair.unwrap_or((0, 0));
        r.verdict = Verdict::Fails;
        r.witness = Some(format!("kernel rows {a} and {b} differ by {:e}", s.min_gap));
    }
    r
}

/// Lebesgue samples for kernel models: 40 cells of `[lo, hi]` plus 50
/// random unions of them.
fn interval_samples(lo: f64, hi: f64, seed: u64) -> Vec<IntervalSet> {
    let grid = OutcomeGrid::uniform(lo, hi, 40).expect("valid sample grid");
    default_ring_samples(grid.cells(), 50, seed)
        .iter()
        .map(|s| {
            IntervalSet::new(s.cells().iter().map(|&j| {
                let (a, b) = grid.cell(j);
                Interval::closed_open(a, b)
            }))
        })
        .collect()
}

/// Runs one property on a convolution kernel model.
pub fn check_kernel(k: &ConvolutionKernel, prop: Property, opts: &SuiteOptions) -> Result<Vec<PropertyReport>> {
    let domain = opts.domain.clone().unwrap_or_else(|| default_domain(&k.profile));
    let real = domain == SpectrumDomain::Real;
    let kind = opts
        .family
        .unwrap_or(if real { FamilyKind::HalfLines } else { FamilyKind::Shrinking });
    let (fam, limit) = family(kind, anchor(&domain));
    let step = if real { 1e-2 * k.scale() } else { 1e-3 };
    let report = match prop {
        Property::UniformContinuity => uniform_continuity_check(k, &domain, &fam, &limit, opts.tol)?,
        Property::StrongFeller => strong_feller_family_check(k, &fam, &limit, &domain, step)?,
        Property::Norm1 => {
            let lam = match &domain {
                SpectrumDomain::Interval { lo, hi } => 0.5 * (lo + hi),
                _ => 0.0,
            };
            let schedule = [1e-1, 1e-2, 1e-3, 1e-4];
            norm1_kernel(k, &[lam], &schedule, &domain, 1e-12)?
        }
        Property::AbsoluteContinuity => {
            let m = k.profile.density_bound();
            let (nu, samples) = if k.profile.is_unit_supported() {
                (
                    DominatingMeasure::Lebesgue {
                        scale: m,
                        window: Some((-1.0, 1.0)),
                    },
                    interval_samples(-1.0, 1.0, opts.seed),
                )
            } else {
                let s = 5.0 * k.scale();
                (
                    DominatingMeasure::Lebesgue { scale: m, window: None },
                    interval_samples(-s, s, opts.seed),
                )
            };
            let model = KernelModel {
                kernel: k,
                domain: domain.clone(),
            };
            let mut r = absolute_continuity_constant(&model, &nu, &samples, opts.tol)?;
            r.notes.push(format!("nu = {m} * Lebesgue"));
            r
        }
        Property::SigmaAdditivity => {
            let t = discretize(k, opts)?;
            sigma_additivity_check(&t.kernel, &cell_partitions(t.kernel.n_cols()), opts.tol)?
        }
        Property::Separation => separation_report(&discretize(k, opts)?.kernel, opts.tol),
        Property::WeakConvergence => {
            let x_star = match &domain {
                SpectrumDomain::Interval { lo, hi } => 0.5 * (lo + hi),
                _ => 0.0,
            };
            let xs: Vec<f64> = (1..=40).map(|n| x_star + 2f64.powi(-n)).collect();
            return weak_convergence_check(k, &xs, x_star, &TestFunction::default_set(), opts.quad_tol);
        }
        Property::Dini => return Err(Error::InvalidInput("dini needs a table input".into())),
    };
    Ok(vec![report])
}

/// `F` of full cells removed one at a time from the left.
fn povm_family(m: usize) -> Vec<RingSet> {
    (0..=m).map(|i| RingSet::new(i..m)).collect()
}

/// Runs one property on a discrete POVM.
pub fn check_povm(f: &DiscretePovm, prop: Property, opts: &SuiteOptions) -> Result<Vec<PropertyReport>> {
    let report = match prop {
        Property::UniformContinuity => uniform_continuity_povm(f, &povm_family(f.cells()), opts.tol)?,
        Property::StrongFeller => strong_feller_triplet(&build_triplet(f, &opts.reconstruction)?),
        Property::Norm1 => norm1_povm(f, opts.tol),
        Property::AbsoluteContinuity => {
            let nu = DominatingMeasure::Lebesgue {
                scale: 1.0,
                window: Some((f.grid().a(), f.grid().b())),
            };
            absolute_continuity_povm(f, &nu, None, opts.seed, opts.tol)?
        }
        Property::SigmaAdditivity => {
            let t = build_triplet(f, &opts.reconstruction)?;
            sigma_additivity_check(&t.kernel, &cell_partitions(f.cells()), opts.tol)?
        }
        Property::Separation => separation_report(&build_triplet(f, &opts.reconstruction)?.kernel, opts.tol),
        Property::WeakConvergence | Property::Dini => {
            return Err(Error::InvalidInput(format!("{prop} does not apply to a discrete POVM")))
        }
    };
    Ok(vec![report])
}

#[derive(Debug, Clone)]
pub struct Curve {
    pub name: String,
    pub delta: IntervalSet,
    pub xs: Vec<f64>,
    pub mu: Vec<f64>,
}

fn curve(k: &dyn PointKernel, name: String, delta: IntervalSet, lo: f64, hi: f64, n: usize) -> Curve {
    let xs: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
    let mu = xs.iter().map(|&x| k.prob(&delta, x)).collect();
    Curve { name, delta, xs, mu }
}

#[derive(Debug, Clone, Default)]
pub struct DemoOutput {
    pub summary: Vec<String>,
    pub curves: Vec<Curve>,
    pub reports: Vec<PropertyReport>,
    /// Extra CSV files as `(file name, contents)`.
    pub tables: Vec<(String, String)>,
}

pub const DEMOS: [&str; 3] = ["unsharp-position-compact", "optimal-phase-space", "dini"];

pub fn run_demo(name: &str, l: f64, opts: &SuiteOptions) -> Result<DemoOutput> {
    match name {
        "unsharp-position-compact" => demo_compact(opts),
        "optimal-phase-space" => demo_phase_space(l, opts),
        "dini" => demo_dini(),
        other => Err(Error::InvalidInput(format!("unknown demo {other:?}; expected one of {DEMOS:?}"))),
    }
}

fn summarize(out: &mut DemoOutput, label: &str, r: &PropertyReport) {
    let last = r.residuals.last().map_or(String::from("-"), |(n, v)| format!("{v:e} at n = {n}"));
    out.summary
        .push(format!("{label}: {} {} (last residual {last})", r.property, r.verdict));
}

fn demo_compact(opts: &SuiteOptions) -> Result<DemoOutput> {
    let mut out = DemoOutput::default();
    let deltas: Vec<IntervalSet> = ["[0, 1]", "[0.2, 0.5]", "[-0.5, 0.25]"]
        .iter()
        .map(|s| s.parse())
        .collect::<Result<_>>()?;
    for profile in [KernelProfile::Box, KernelProfile::Triangle] {
        let k = ConvolutionKernel::new(profile);
        let name = k.profile.name();
        for (i, d) in deltas.iter().enumerate() {
            out.curves.push(curve(&k, format!("{name}_{i}"), d.clone(), 0.0, 1.0, 100));
        }
        for prop in [Property::UniformContinuity, Property::StrongFeller, Property::AbsoluteContinuity] {
            for mut r in check_kernel(&k, prop, opts)? {
                r.notes.push(format!("profile {name} on spectrum [0, 1]"));
                summarize(&mut out, name, &r);
                out.reports.push(r);
            }
        }
    }
    out.summary
        .push("compactly supported profiles: uniformly continuous, strong Feller".into());
    Ok(out)
}

fn demo_phase_space(l: f64, opts: &SuiteOptions) -> Result<DemoOutput> {
    let k = ConvolutionKernel::gaussian(l)?;
    let mut out = DemoOutput::default();
    let deltas: Vec<IntervalSet> = vec![
        Interval::below(-1.0).into(),
        Interval::below(-2.0).into(),
        Interval::closed(-0.5, 0.5).into(),
    ];
    for (i, d) in deltas.into_iter().enumerate() {
        out.curves
            .push(curve(&k, format!("gaussian_{i}"), d, -10.0 - 5.0 * l, 5.0 * l, 400));
    }
    for prop in [
        Property::UniformContinuity,
        Property::StrongFeller,
        Property::Norm1,
        Property::AbsoluteContinuity,
    ] {
        for r in check_kernel(&k, prop, opts)? {
            summarize(&mut out, "gaussian", &r);
            out.reports.push(r);
        }
    }
    out.summary.push(format!(
        "gaussian l = {l} on the real line: continuous kernel, but not uniformly continuous"
    ));
    Ok(out)
}

fn demo_dini() -> Result<DemoOutput> {
    let (xs, table) = power_table(0.0, 0.9, 1000, 300);
    let r = dini_check(&table, Some(&xs), 1e-12)?;
    let mut out = DemoOutput::default();
    let mut csv = String::from("n,sup\n");
    for (n, s) in &r.residuals {
        csv.push_str(&format!("{n},{s}\n"));
    }
    out.tables.push(("dini_sup.csv".into(), csv));
    summarize(&mut out, "lambda^n on [0, 0.9]", &r);
    out.reports.push(r);
    let (xs1, table1) = power_table(0.0, 1.0, 1000, 300);
    match dini_check(&table1, Some(&xs1), 1e-12) {
        Err(e) => out.summary.push(format!("lambda^n on [0, 1]: rejected ({e})")),
        Ok(_) => out.summary.push("lambda^n on [0, 1]: unexpectedly accepted".into()),
    }
    Ok(out)
}

/// Seeded random commuting POVM, for smoke tests and demos.
pub fn random_fixture(seed: u64, d: usize, k: usize, m: usize) -> crate::sampling::CommutingFixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    crate::sampling::random_commuting_povm(d, k, m, &mut rng)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn property_names_round_trip() {
        for p in Property::ALL {
            assert_eq!(p.name().parse::<Property>().unwrap(), p);
        }
        assert!("bogus".parse::<Property>().is_err());
    }

    #[test]
    fn gaussian_suite_verdicts() {
        let k = ConvolutionKernel::gaussian(1.0).unwrap();
        let o = SuiteOptions::default();
        let v = |p| check_kernel(&k, p, &o).unwrap()[0].verdict;
        assert_eq!(v(Property::UniformContinuity), Verdict::Fails);
        assert_eq!(v(Property::StrongFeller), Verdict::Fails);
        assert_eq!(v(Property::Norm1), Verdict::Impossible);
        assert_eq!(v(Property::SigmaAdditivity), Verdict::Holds);
    }

    #[test]
    fn box_suite_verdicts() {
        let k = ConvolutionKernel::new(KernelProfile::Box);
        let o = SuiteOptions::default();
        let v = |p| check_kernel(&k, p, &o).unwrap()[0].clone();
        assert_eq!(v(Property::UniformContinuity).verdict, Verdict::Holds);
        assert_eq!(v(Property::StrongFeller).verdict, Verdict::Holds);
        let ac = v(Property::AbsoluteContinuity);
        assert_eq!(ac.verdict, Verdict::Holds);
        assert!(ac.estimate.unwrap() <= 1.0 + 1e-9);
    }

    #[test]
    fn domains_parse() {
        assert_eq!(parse_domain("unit").unwrap(), SpectrumDomain::unit());
        assert_eq!(parse_domain("-1, 2").unwrap(), SpectrumDomain::Interval { lo: -1.0, hi: 2.0 });
        assert!(parse_domain("2,1").is_err());
    }
}
