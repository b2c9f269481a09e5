//! Continuity checks for discrete POVMs and kernel models.
//!
//! In a kernel model the observable is `F(delta) = mu_delta(Q)` for a sharp
//! position `Q`, so `||F(delta)|| = sup_x mu_delta(x)`. Sups over the real
//! line are taken over an explicit finite window recorded in each report.

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{Interval, IntervalSet, PointKernel};
use crate::operators::operator_norm;
use crate::povm::{DiscretePovm, DiscretePvm, RingSet};
use crate::reconstruction::{KernelMatrix, VonNeumannTriplet};

/// Window half-width, in units of the kernel scale, around finite endpoints.
pub const WINDOW_SCALES: f64 = 5.0;

const SUP_SAMPLES: usize = 4001;
const GOLDEN_ITERS: usize = 80;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Holds,
    Fails,
    /// The necessary condition for the property is violated.
    Impossible,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Holds => "holds",
            Verdict::Fails => "fails",
            Verdict::Impossible => "impossible",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub property: String,
    pub verdict: Verdict,
    pub residuals: Vec<(usize, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
    /// Finite window standing in for the spectrum domain.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<(f64, f64)>,
    /// Where each residual's sup was attained.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub locations: Vec<(usize, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimate: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl PropertyReport {
    pub fn new(property: impl Into<String>) -> Self {
        Self {
            property: property.into(),
            verdict: Verdict::Inconclusive,
            residuals: Vec::new(),
            witness: None,
            window: None,
            locations: Vec::new(),
            estimate: None,
            notes: Vec::new(),
        }
    }

    fn fail(&mut self, verdict: Verdict, witness: String) {
        self.verdict = verdict;
        self.witness = Some(witness);
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,residual\n");
        for (n, r) in &self.residuals {
            out.push_str(&format!("{n},{r}\n"));
        }
        out
    }
}

/// Where the spectral variable lives.
#[derive(Debug, Clone, PartialEq)]
pub enum SpectrumDomain {
    Interval { lo: f64, hi: f64 },
    Real,
    Points(Vec<f64>),
}

impl SpectrumDomain {
    pub fn unit() -> Self {
        SpectrumDomain::Interval { lo: 0.0, hi: 1.0 }
    }

    fn within_unit(&self) -> bool {
        match self {
            SpectrumDomain::Interval { lo, hi } => *lo >= 0.0 && *hi <= 1.0,
            SpectrumDomain::Points(p) => p.iter().all(|x| (0.0..=1.0).contains(x)),
            SpectrumDomain::Real => false,
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            SpectrumDomain::Interval { lo, hi } if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() => {
                Err(Error::InvalidInput(format!("bad spectrum interval [{lo}, {hi}]")))
            }
            SpectrumDomain::Points(p) if p.is_empty() || p.iter().any(|x| !x.is_finite()) => {
                Err(Error::InvalidInput("spectrum sample must be finite and non-empty".into()))
            }
            _ => Ok(()),
        }
    }

    /// Finite window used for `sets`. On the real line it extends
    /// `WINDOW_SCALES * scale` past the outermost finite endpoints.
    pub fn window(&self, sets: &[&IntervalSet], scale: f64) -> (f64, f64) {
        match self {
            SpectrumDomain::Interval { lo, hi } => (*lo, *hi),
            SpectrumDomain::Points(p) => (
                p.iter().copied().fold(f64::INFINITY, f64::min),
                p.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            ),
            SpectrumDomain::Real => {
                let ends: Vec<f64> = sets
                    .iter()
                    .flat_map(|s| s.endpoints())
                    .filter(|e| e.is_finite())
                    .collect();
                let pad = WINDOW_SCALES * scale;
                if ends.is_empty() {
                    (-pad, pad)
                } else {
                    let lo = ends.iter().copied().fold(f64::INFINITY, f64::min);
                    let hi = ends.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    (lo - pad, hi + pad)
                }
            }
        }
    }
}

/// `(sup |g|, argmax)` over `[lo, hi]` from a uniform sample plus `extra`
/// candidates, polished by golden-section search around the best sample.
pub(crate) fn sup_abs(g: impl Fn(f64) -> f64, lo: f64, hi: f64, extra: &[f64]) -> (f64, f64) {
    let mut best = (g(lo).abs(), lo);
    let consider = |x: f64, best: &mut (f64, f64)| {
        let v = g(x).abs();
        if v > best.0 {
            *best = (v, x);
        }
    };
    if hi <= lo {
        return best;
    }
    let h = (hi - lo) / (SUP_SAMPLES - 1) as f64;
    for i in 1..SUP_SAMPLES {
        let x = if i == SUP_SAMPLES - 1 { hi } else { lo + h * i as f64 };
        consider(x, &mut best);
    }
    for &x in extra {
        if x >= lo && x <= hi {
            consider(x, &mut best);
            for side in [x - 1e-12 * (1.0 + x.abs()), x + 1e-12 * (1.0 + x.abs())] {
                if side >= lo && side <= hi {
                    consider(side, &mut best);
                }
            }
        }
    }
    let (mut a, mut b) = ((best.1 - h).max(lo), (best.1 + h).min(hi));
    let r = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..GOLDEN_ITERS {
        let c = b - r * (b - a);
        let d = a + r * (b - a);
        if g(c).abs() >= g(d).abs() {
            b = d;
        } else {
            a = c;
        }
    }
    consider(0.5 * (a + b), &mut best);
    best
}

fn candidates(k: &dyn PointKernel, sets: &[&IntervalSet]) -> Vec<f64> {
    let offsets = k.breakpoints();
    sets.iter()
        .flat_map(|s| s.endpoints())
        .filter(|e| e.is_finite())
        .flat_map(|e| offsets.iter().map(move |b| e + b).collect::<Vec<_>>())
        .collect()
}

/// `sup_x |mu_a(x) - mu_b(x)|` over the domain; returns `(value, argmax, window)`.
fn sup_difference(
    k: &dyn PointKernel,
    a: &IntervalSet,
    b: &IntervalSet,
    domain: &SpectrumDomain,
) -> (f64, f64, (f64, f64)) {
    let window = domain.window(&[a, b], k.scale());
    let g = |x: f64| k.prob(a, x) - k.prob(b, x);
    if let SpectrumDomain::Points(p) = domain {
        let (v, x) = p
            .iter()
            .map(|&x| (g(x).abs(), x))
            .fold((0.0, p[0]), |acc, c| if c.0 > acc.0 { c } else { acc });
        return (v, x, window);
    }
    let (v, x) = sup_abs(g, window.0, window.1, &candidates(k, &[a, b]));
    (v, x, window)
}

/// `||F(delta)|| = sup_x mu_delta(x)` in a kernel model.
pub fn kernel_norm(k: &dyn PointKernel, delta: &IntervalSet, domain: &SpectrumDomain) -> f64 {
    sup_difference(k, delta, &IntervalSet::empty(), domain).0
}

fn check_descending(family: &[IntervalSet], limit: &IntervalSet) -> Result<()> {
    for (n, w) in family.windows(2).enumerate() {
        if !w[1].is_subset(&w[0]) {
            return Err(Error::InvalidInput(format!(
                "family is not descending at n = {}: {} is not contained in {}",
                n + 2,
                w[1],
                w[0]
            )));
        }
    }
    if let Some(last) = family.last() {
        if !limit.is_subset(last) {
            return Err(Error::InvalidInput(format!("limit {limit} is not contained in {last}")));
        }
    }
    Ok(())
}

/// Norm continuity along a descending family `delta_n` with limit `limit`:
/// residual `n` is `sup_x |mu_{delta_n}(x) - mu_limit(x)|`. Holds once a
/// residual drops below `eps`.
pub fn uniform_continuity_check(
    k: &dyn PointKernel,
    domain: &SpectrumDomain,
    family: &[IntervalSet],
    limit: &IntervalSet,
    eps: f64,
) -> Result<PropertyReport> {
    domain.validate()?;
    check_descending(family, limit)?;
    let mut report = PropertyReport::new("uniform-continuity");
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut bound_violation = None;
    for (i, delta) in family.iter().enumerate() {
        let n = i + 1;
        let (r, x, w) = sup_difference(k, delta, limit, domain);
        lo = lo.min(w.0);
        hi = hi.max(w.1);
        report.residuals.push((n, r));
        report.locations.push((n, x));
        if domain.within_unit() && bound_violation.is_none() {
            if let Some(bound) = k.compact_bound(&delta.difference(limit)) {
                if r > bound * (1.0 + 1e-9) + 1e-15 {
                    bound_violation = Some((n, r, bound));
                }
            }
        }
    }
    report.window = Some((lo, hi));
    if let Some((n, r, bound)) = bound_violation {
        report.fail(
            Verdict::Fails,
            format!("n = {n}: residual {r:e} exceeds the compact-support bound {bound:e}"),
        );
        return Ok(report);
    }
    match report.residuals.iter().find(|(_, r)| *r < eps) {
        Some(&(n, r)) => {
            report.verdict = Verdict::Holds;
            report.notes.push(format!("residual {r:e} < {eps:e} at n = {n}"));
        }
        None => match report.residuals.last().copied() {
            Some((n, r)) => {
                let x = report.locations[n - 1].1;
                report.fail(
                    Verdict::Fails,
                    format!("n = {n}: |mu_delta_n(x) - mu_limit(x)| = {r} at x = {x}"),
                );
            }
            None => report.notes.push("empty family".into()),
        },
    }
    Ok(report)
}

/// Discrete analogue: residual `n` is `||F(delta_n \ delta_last)||`. A
/// descending chain of ring sets is eventually constant, so this holds.
pub fn uniform_continuity_povm(f: &DiscretePovm, family: &[RingSet], eps: f64) -> Result<PropertyReport> {
    for (n, w) in family.windows(2).enumerate() {
        if !w[1].is_subset(&w[0]) {
            return Err(Error::InvalidInput(format!("family is not descending at n = {}", n + 2)));
        }
    }
    let mut report = PropertyReport::new("uniform-continuity");
    let Some(limit) = family.last() else {
        report.notes.push("empty family".into());
        return Ok(report);
    };
    for (i, delta) in family.iter().enumerate() {
        let r = operator_norm(&f.evaluate(&delta.difference(limit))?);
        report.residuals.push((i + 1, r));
    }
    report.verdict = if report.residuals.iter().any(|(_, r)| *r < eps) {
        Verdict::Holds
    } else {
        Verdict::Fails
    };
    if report.verdict == Verdict::Fails {
        report.witness = Some(format!("family of length {} has not reached its limit", family.len()));
    }
    report.notes.push("finite outcome grid: norm sigma-additivity reduces to finite sums".into());
    Ok(report)
}

fn grid_points(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    crate::kernels::sample_points(lo, hi, step)
}

fn modulus(k: &dyn PointKernel, delta: &IntervalSet, xs: &[f64]) -> (f64, f64, f64) {
    let vals: Vec<f64> = xs.iter().map(|&x| k.prob(delta, x)).collect();
    let mut best = (0.0, xs[0], xs[0]);
    for i in 1..xs.len() {
        let d = (vals[i] - vals[i - 1]).abs();
        if d > best.0 {
            best = (d, xs[i - 1], xs[i]);
        }
    }
    best
}

/// Continuity of `x -> mu_delta(x)` for each listed set, judged by the
/// modulus over adjacent samples `step` apart. With a known Lipschitz bound
/// `L` the modulus must stay below `L * step`; otherwise it must shrink when
/// the step is quartered.
pub fn strong_feller_check(
    k: &dyn PointKernel,
    deltas: &[IntervalSet],
    domain: &SpectrumDomain,
    step: f64,
) -> Result<PropertyReport> {
    domain.validate()?;
    if !(step > 0.0) {
        return Err(Error::InvalidInput("step must be positive".into()));
    }
    let mut report = PropertyReport::new("strong-feller");
    let mut worst_slope: f64 = 0.0;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (i, delta) in deltas.iter().enumerate() {
        let (xs, fine) = match domain {
            SpectrumDomain::Points(_) => {
                report.residuals.push((i + 1, 0.0));
                continue;
            }
            _ => {
                let (a, b) = domain.window(&[delta], k.scale());
                lo = lo.min(a);
                hi = hi.max(b);
                (grid_points(a, b, step), grid_points(a, b, step / 4.0))
            }
        };
        let (m, x0, x1) = modulus(k, delta, &xs);
        report.residuals.push((i + 1, m));
        worst_slope = worst_slope.max(m / step);
        if report.witness.is_some() {
            continue;
        }
        let ok = match k.lipschitz_bound() {
            Some(l) => m <= l * step * (1.0 + 1e-6) + 1e-12,
            None => {
                let (mf, _, _) = modulus(k, delta, &fine);
                m <= 1e-12 || mf <= 0.5 * m + 1e-12
            }
        };
        if !ok {
            let (mf, y0, y1) = modulus(k, delta, &fine);
            let (w0, w1, wm) = if mf >= m { (y0, y1, mf) } else { (x0, x1, m) };
            report.fail(
                Verdict::Fails,
                format!("delta = {delta}: |mu(x) - mu(x')| = {wm} at x = {w0}, x' = {w1}"),
            );
        }
    }
    if lo <= hi {
        report.window = Some((lo, hi));
    }
    report.estimate = Some(worst_slope);
    if let Some(l) = k.lipschitz_bound() {
        report.notes.push(format!("modulus bound {l} * step"));
    }
    if matches!(domain, SpectrumDomain::Points(_)) {
        report.notes.push("discrete spectrum: every function of the points is continuous".into());
    }
    if report.witness.is_none() {
        report.verdict = Verdict::Holds;
    }
    Ok(report)
}

/// [`strong_feller_check`] on the members of a descending family plus a
/// tightness condition at the ends of an unbounded domain: extending each
/// `mu_{delta_n}` to `±inf`, the values must converge to those of the limit
/// set. Otherwise mass escapes to infinity and the kernel on the
/// compactified spectrum is not a Markov kernel.
pub fn strong_feller_family_check(
    k: &dyn PointKernel,
    family: &[IntervalSet],
    limit: &IntervalSet,
    domain: &SpectrumDomain,
    step: f64,
) -> Result<PropertyReport> {
    check_descending(family, limit)?;
    let mut report = strong_feller_check(k, family, domain, step)?;
    if *domain != SpectrumDomain::Real || report.verdict != Verdict::Holds {
        return Ok(report);
    }
    const FAR: f64 = 1e300;
    let Some(last) = family.last() else {
        return Ok(report);
    };
    for (end, x) in [("-inf", -FAR), ("+inf", FAR)] {
        let gap = (k.prob(last, x) - k.prob(limit, x)).abs();
        if gap > 1e-9 {
            report.fail(
                Verdict::Fails,
                format!(
                    "mass escapes at {end}: mu_delta_n({end}) - mu_limit({end}) = {gap} for n = {}",
                    family.len()
                ),
            );
            report.notes.push("end values do not converge to the limit set's values".into());
            return Ok(report);
        }
    }
    Ok(report)
}

/// A finite spectrum carries the discrete topology, so the kernel of a
/// triplet is trivially strong Feller.
pub fn strong_feller_triplet(t: &VonNeumannTriplet) -> PropertyReport {
    let mut report = PropertyReport::new("strong-feller");
    report.verdict = Verdict::Holds;
    report
        .notes
        .push(format!("{} isolated labels: every function on them is continuous", t.generator.len()));
    report
        .notes
        .push("sharp reconstruction taken as the Cantor-labelled generator of the triplet".into());
    report
}

/// Set function `(row, delta) -> value` on ring sets.
pub trait SetFunction {
    fn n_rows(&self) -> usize;
    fn n_cells(&self) -> usize;
    fn value(&self, row: usize, delta: &RingSet) -> Result<f64>;
}

impl SetFunction for KernelMatrix {
    fn n_rows(&self) -> usize {
        KernelMatrix::n_rows(self)
    }

    fn n_cells(&self) -> usize {
        self.n_cols()
    }

    fn value(&self, row: usize, delta: &RingSet) -> Result<f64> {
        KernelMatrix::value(self, row, delta)
    }
}

impl SetFunction for VonNeumannTriplet {
    fn n_rows(&self) -> usize {
        self.generator.len()
    }

    fn n_cells(&self) -> usize {
        self.povm.cells()
    }

    fn value(&self, row: usize, delta: &RingSet) -> Result<f64> {
        self.trace_value(row, delta)
    }
}

/// Explicit table of set-function values; every queried set must be listed.
#[derive(Debug, Clone, Default)]
pub struct SetTable {
    pub cells: usize,
    pub rows: Vec<BTreeMap<RingSet, f64>>,
}

impl SetFunction for SetTable {
    fn n_rows(&self) -> usize {
        self.rows.len()
    }

    fn n_cells(&self) -> usize {
        self.cells
    }

    fn value(&self, row: usize, delta: &RingSet) -> Result<f64> {
        self.rows
            .get(row)
            .and_then(|r| r.get(delta))
            .copied()
            .ok_or_else(|| Error::InvalidInput(format!("no table entry for row {row}, cells {:?}", delta.cells())))
    }
}

/// `|sum_i mu(delta_i) - mu(union)|` for every row and partition. Residual
/// index `row * partitions.len() + p` (zero-based) is reported as `n`.
pub fn sigma_additivity_check(mu: &dyn SetFunction, partitions: &[Vec<RingSet>], tol: f64) -> Result<PropertyReport> {
    let mut unions = Vec::with_capacity(partitions.len());
    for (p, parts) in partitions.iter().enumerate() {
        let mut acc = RingSet::empty();
        for s in parts {
            s.check_range(mu.n_cells())?;
            if !acc.is_disjoint(s) {
                return Err(Error::InvalidInput(format!("partition {p} has overlapping members")));
            }
            acc = acc.union(s);
        }
        unions.push(acc);
    }
    let mut report = PropertyReport::new("sigma-additivity");
    let mut worst: Option<(usize, usize, f64)> = None;
    for row in 0..mu.n_rows() {
        for (p, parts) in partitions.iter().enumerate() {
            let mut sum = 0.0;
            for s in parts {
                sum += mu.value(row, s)?;
            }
            let r = (sum - mu.value(row, &unions[p])?).abs();
            report.residuals.push((row * partitions.len() + p, r));
            if worst.is_none_or(|w| r > w.2) {
                worst = Some((row, p, r));
            }
        }
    }
    report.estimate = Some(worst.map_or(0.0, |w| w.2));
    match worst {
        Some((row, p, r)) if r > tol => report.fail(
            Verdict::Fails,
            format!("row {row}, partition {p}: |sum - value of union| = {r:e}"),
        ),
        _ => report.verdict = Verdict::Holds,
    }
    Ok(report)
}

/// All two-block partitions `{A, complement}` of the cells plus the
/// partition into single cells. Above 16 cells only `{cell, rest}` splits
/// are listed.
pub fn cell_partitions(m: usize) -> Vec<Vec<RingSet>> {
    let mut out = vec![(0..m).map(RingSet::singleton).collect::<Vec<_>>()];
    if m <= 16 {
        for mask in 1u32..(1 << m) - 1 {
            let a = RingSet::new((0..m).filter(|j| mask & (1 << j) != 0));
            let b = RingSet::all(m).difference(&a);
            out.push(vec![a, b]);
        }
    } else {
        for j in 0..m {
            out.push(vec![RingSet::singleton(j), RingSet::all(m).difference(&RingSet::singleton(j))]);
        }
    }
    out
}

/// Norm-1 property of a discrete POVM. Every nonempty ring set contains a
/// cell, and `F(union) >= F(cell)`, so checking single cells is exact.
pub fn norm1_povm(f: &DiscretePovm, tol: f64) -> PropertyReport {
    let mut report = PropertyReport::new("norm-1");
    for j in 0..f.cells() {
        let n = operator_norm(f.effect(j));
        if n <= tol {
            continue;
        }
        report.residuals.push((j, n));
        if n < 1.0 - tol && report.witness.is_none() {
            report.fail(Verdict::Fails, format!("cell {j}: 0 < ||F|| = {n} < 1"));
        }
    }
    if report.witness.is_none() {
        report.verdict = Verdict::Holds;
    }
    report
}

/// Necessary condition for norm-1 in a kernel model: point-like sets
/// `[lambda, lambda + h_n]` must keep norm 1 as `h_n -> 0`. Residual `n` is
/// the largest `sup_x mu_{[lambda, lambda + h_n]}(x)` over `lambdas`.
pub fn norm1_kernel(
    k: &dyn PointKernel,
    lambdas: &[f64],
    schedule: &[f64],
    domain: &SpectrumDomain,
    tol: f64,
) -> Result<PropertyReport> {
    domain.validate()?;
    if lambdas.is_empty() {
        return Err(Error::InvalidInput("need at least one lambda".into()));
    }
    if schedule.iter().any(|h| !(*h > 0.0)) || schedule.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidInput("width schedule must be positive and decreasing".into()));
    }
    let mut report = PropertyReport::new("norm-1");
    let mut witness = None;
    for (i, &h) in schedule.iter().enumerate() {
        let mut best = (0.0, lambdas[0]);
        for &lam in lambdas {
            let delta = IntervalSet::single(Interval::closed(lam, lam + h));
            let v = kernel_norm(k, &delta, domain);
            if v > tol && v < 1.0 - tol && witness.is_none() {
                witness = Some(format!("||F([{lam}, {}])|| = {v} lies strictly between 0 and 1", lam + h));
            }
            if v > best.0 {
                best = (v, lam);
            }
        }
        report.residuals.push((i + 1, best.0));
        report.locations.push((i + 1, best.1));
    }
    match witness {
        Some(w) => {
            report.fail(Verdict::Impossible, w);
            if report.residuals.windows(2).all(|w| w[1].1 <= w[0].1) {
                report.notes.push("point masses vanish as h -> 0".into());
            }
        }
        None => report
            .notes
            .push("necessary condition met; no sufficient criterion is available".into()),
    }
    Ok(report)
}

/// Norm-1 of a sharp observable: projections have norm 0 or 1.
pub fn norm1_pvm(e: &DiscretePvm, tol: f64) -> PropertyReport {
    let mut report = PropertyReport::new("norm-1");
    for k in 0..e.len() {
        report.residuals.push((k, operator_norm(e.projector(k))));
    }
    match report.residuals.iter().find(|(_, n)| *n > tol && *n < 1.0 - tol) {
        Some(&(k, n)) => report.fail(Verdict::Fails, format!("projector {k} has norm {n}")),
        None => report.verdict = Verdict::Holds,
    }
    report
}

#[derive(Debug, Clone, PartialEq)]
pub enum DominatingMeasure {
    /// `scale * |delta ∩ window|` (no window: the whole line).
    Lebesgue { scale: f64, window: Option<(f64, f64)> },
    /// Weight per grid cell.
    CellWeights(Vec<f64>),
    /// Number of cells.
    Counting,
}

impl DominatingMeasure {
    pub fn of_interval_set(&self, delta: &IntervalSet) -> Result<f64> {
        match self {
            DominatingMeasure::Lebesgue { scale, window } => Ok(scale * restrict(delta, *window).measure()),
            _ => Err(Error::InvalidInput("cell-based measures need ring sets".into())),
        }
    }

    pub fn of_ring_set(&self, f: &DiscretePovm, delta: &RingSet) -> Result<f64> {
        delta.check_range(f.cells())?;
        match self {
            DominatingMeasure::Lebesgue { scale, window } => {
                let set = IntervalSet::new(delta.cells().iter().map(|&j| {
                    let (a, b) = f.grid().cell(j);
                    Interval::closed_open(a, b)
                }));
                Ok(scale * restrict(&set, *window).measure())
            }
            DominatingMeasure::CellWeights(w) => {
                if w.len() != f.cells() {
                    return Err(Error::ShapeMismatch(format!("{} weights for {} cells", w.len(), f.cells())));
                }
                Ok(delta.cells().iter().map(|&j| w[j]).sum())
            }
            DominatingMeasure::Counting => Ok(delta.len() as f64),
        }
    }

    fn is_finite(&self) -> bool {
        match self {
            DominatingMeasure::Lebesgue { window, .. } => window.is_some(),
            _ => true,
        }
    }
}

fn restrict(delta: &IntervalSet, window: Option<(f64, f64)>) -> IntervalSet {
    match window {
        Some((a, b)) => delta.intersection(&IntervalSet::single(Interval::closed(a, b))),
        None => delta.clone(),
    }
}

/// Observables whose norm can be evaluated on interval sets.
pub trait IntervalObservable {
    fn norm(&self, delta: &IntervalSet) -> f64;
}

/// A kernel model restricted to a spectrum domain.
pub struct KernelModel<'a> {
    pub kernel: &'a dyn PointKernel,
    pub domain: SpectrumDomain,
}

impl IntervalObservable for KernelModel<'_> {
    fn norm(&self, delta: &IntervalSet) -> f64 {
        kernel_norm(self.kernel, delta, &self.domain)
    }
}

impl IntervalObservable for DiscretePvm {
    fn norm(&self, delta: &IntervalSet) -> f64 {
        if self.points().iter().any(|&p| delta.contains(p)) {
            1.0
        } else {
            0.0
        }
    }
}

struct AcAccumulator {
    report: PropertyReport,
    c: f64,
    violation: Option<String>,
    tol: f64,
}

impl AcAccumulator {
    fn new(tol: f64) -> Self {
        Self {
            report: PropertyReport::new("absolute-continuity"),
            c: 0.0,
            violation: None,
            tol,
        }
    }

    fn push(&mut self, i: usize, norm: f64, nu: f64, label: impl FnOnce() -> String) {
        if nu <= 0.0 {
            if norm > self.tol && self.violation.is_none() {
                self.violation = Some(format!("{}: nu = 0 but ||F|| = {norm}", label()));
            }
            return;
        }
        let ratio = norm / nu;
        self.report.residuals.push((i, ratio));
        self.c = self.c.max(ratio);
    }

    fn finish(mut self, finite: bool) -> PropertyReport {
        self.report.estimate = Some(self.c);
        match self.violation {
            Some(w) => self.report.fail(Verdict::Fails, w),
            None => {
                self.report.verdict = Verdict::Holds;
                if finite {
                    self.report.notes.push("finite dominating measure: uniform continuity follows".into());
                }
            }
        }
        self.report
    }
}

/// `c = max ||F(delta)|| / nu(delta)` over interval-set samples.
pub fn absolute_continuity_constant(
    target: &dyn IntervalObservable,
    nu: &DominatingMeasure,
    samples: &[IntervalSet],
    tol: f64,
) -> Result<PropertyReport> {
    let mut acc = AcAccumulator::new(tol);
    for (i, delta) in samples.iter().enumerate() {
        let m = nu.of_interval_set(delta)?;
        acc.push(i, target.norm(delta), m, || format!("delta = {delta}"));
    }
    Ok(acc.finish(nu.is_finite()))
}

/// Default ring-set samples: every single cell plus `extra` random unions.
pub fn default_ring_samples(m: usize, extra: usize, seed: u64) -> Vec<RingSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<RingSet> = (0..m).map(RingSet::singleton).collect();
    for _ in 0..extra {
        let mut s = RingSet::new((0..m).filter(|_| rng.random_bool(0.5)));
        if s.is_empty() {
            s = RingSet::singleton(rng.random_range(0..m));
        }
        out.push(s);
    }
    out
}

/// `c = max ||F(delta)|| / nu(delta)` for a discrete POVM. Without samples,
/// uses [`default_ring_samples`] with 50 random sets.
pub fn absolute_continuity_povm(
    f: &DiscretePovm,
    nu: &DominatingMeasure,
    samples: Option<&[RingSet]>,
    seed: u64,
    tol: f64,
) -> Result<PropertyReport> {
    let owned;
    let samples = match samples {
        Some(s) => s,
        None => {
            owned = default_ring_samples(f.cells(), 50, seed);
            &owned
        }
    };
    let mut acc = AcAccumulator::new(tol);
    for (i, delta) in samples.iter().enumerate() {
        let m = nu.of_ring_set(f, delta)?;
        let n = operator_norm(&f.evaluate(delta)?);
        acc.push(i, n, m, || format!("cells {:?}", delta.cells()));
    }
    Ok(acc.finish(nu.is_finite()))
}

/// Dini's theorem on a sampled compact set. `table[n][i]` is `f_{n+1}` at
/// point `i`. Inputs must be non-increasing in `n`, lie in `[0, 1]` and have
/// no point stuck above `tol`; violations are rejected. Holds when the sup
/// norms fall below `tol`.
pub fn dini_check(table: &[Vec<f64>], points: Option<&[f64]>, tol: f64) -> Result<PropertyReport> {
    let width = table.first().map_or(0, Vec::len);
    if table.is_empty() || width == 0 {
        return Err(Error::InvalidInput("empty table".into()));
    }
    if table.iter().any(|r| r.len() != width) {
        return Err(Error::ShapeMismatch("table rows differ in length".into()));
    }
    if let Some(p) = points {
        if p.len() != width {
            return Err(Error::ShapeMismatch(format!("{} points for {width} columns", p.len())));
        }
    }
    let at = |i: usize| points.map_or(format!("point {i}"), |p| format!("lambda = {}", p[i]));
    for (n, row) in table.iter().enumerate() {
        if let Some(i) = row.iter().position(|v| !v.is_finite() || *v < -tol || *v > 1.0 + tol) {
            return Err(Error::InvalidInput(format!(
                "value {} outside [0, 1] at n = {}, {}",
                row[i],
                n + 1,
                at(i)
            )));
        }
    }
    for (n, w) in table.windows(2).enumerate() {
        if let Some(i) = (0..width).find(|&i| w[1][i] > w[0][i] + tol) {
            return Err(Error::InvalidInput(format!(
                "not non-increasing: f_{}({}) > f_{}",
                n + 2,
                at(i),
                n + 1
            )));
        }
    }
    if table.len() >= 2 {
        let (prev, last) = (&table[table.len() - 2], &table[table.len() - 1]);
        if let Some(i) = (0..width)
            .filter(|&i| last[i] > tol && (prev[i] - last[i]).abs() <= tol)
            .max_by(|&a, &b| last[a].total_cmp(&last[b]))
        {
            return Err(Error::InvalidInput(format!(
                "pointwise limit is not zero at {}: f_n stays at {}",
                at(i),
                last[i]
            )));
        }
    }
    let mut report = PropertyReport::new("dini");
    for (n, row) in table.iter().enumerate() {
        report.residuals.push((n + 1, row.iter().copied().fold(0.0, f64::max)));
    }
    let (n, s) = report.residuals[report.residuals.len() - 1];
    if s <= tol {
        report.verdict = Verdict::Holds;
    } else {
        report.notes.push(format!("sup norm {s:e} at n = {n} is still above {tol:e}"));
    }
    Ok(report)
}

/// `f_n(lambda) = lambda^n` for `n = 1..=steps` on `points` equispaced
/// samples of `[lo, hi]`.
pub fn power_table(lo: f64, hi: f64, points: usize, steps: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let xs: Vec<f64> = (0..points)
        .map(|i| {
            if points == 1 {
                lo
            } else if i == points - 1 {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (points - 1) as f64
            }
        })
        .collect();
    let table = (1..=steps)
        .map(|n| xs.iter().map(|x| x.powi(n as i32)).collect())
        .collect();
    (xs, table)
}
