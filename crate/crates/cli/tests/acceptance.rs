//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::f64::consts::{PI, SQRT_2};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use semispectral::analysis::{
    absolute_continuity_constant, absolute_continuity_povm, cell_partitions, dini_check, norm1_kernel, norm1_povm,
    norm1_pvm, power_table, sigma_additivity_check, strong_feller_check, strong_feller_family_check,
    strong_feller_triplet, uniform_continuity_check, uniform_continuity_povm, DominatingMeasure, KernelModel,
    SpectrumDomain, Verdict,
};
use semispectral::kernels::quadrature::{integrate_with_breaks, QuadratureOptions};
use semispectral::kernels::{
    kernel_eval, lipschitz_scan, unsharp_position, ConvolutionKernel, Interval, IntervalSet, KernelProfile,
    PointKernel, TailPolicy,
};
use semispectral::operators::{commutator_norm, HermitianOperator};
use semispectral::povm::{is_commutative, DiscretePovm, DiscretePvm, OutcomeGrid, RingSet};
use semispectral::reconstruction::{
    build_generator, build_triplet, check_separation, interpolation_residual, joint_diagonalize, max_cell_distance,
    pvm_triplet, Label, ReconstructionOptions, VonNeumannTriplet,
};
use semispectral::suite::{family, random_fixture, FamilyKind};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Shape of the fixture for seed `s`: `d <= 8`, `k <= d`, `2 <= m <= 16`.
fn shape(s: u64) -> (usize, usize, usize) {
    let d = 1 + (s % 8) as usize;
    let k = 1 + ((s / 8) as usize * 5 + s as usize) % d;
    let m = 2 + ((s * 7) % 15) as usize;
    (d, k, m)
}

struct Fixture {
    povm: DiscretePovm,
    triplet: VonNeumannTriplet,
}

fn fixtures() -> Result<(Vec<Fixture>, f64), String> {
    let start = Instant::now();
    let opts = ReconstructionOptions::default();
    let mut out = Vec::new();
    for s in 0..100 {
        let (d, k, m) = shape(s);
        let fx = random_fixture(s, d, k, m);
        let triplet = build_triplet(&fx.povm, &opts).map_err(|e| format!("seed {s} (d={d}, k={k}, m={m}): {e}"))?;
        out.push(Fixture { povm: fx.povm, triplet });
    }
    Ok((out, start.elapsed().as_secs_f64()))
}

fn c1_round_trip() -> Outcome {
    let (fx, secs) = fixtures()?;
    let mut worst: f64 = 0.0;
    for f in &fx {
        let back = f.triplet.smear().map_err(|e| e.to_string())?;
        worst = worst.max(max_cell_distance(&back, &f.povm));
    }
    ensure(worst <= 1e-9, || format!("max residual {worst:e} > 1e-9"))?;
    ensure(secs < 10.0, || format!("runtime {secs:.2} s >= 10 s"))?;
    Ok(format!("max residual {worst:e}, {secs:.2} s for 100 reconstructions"))
}

fn c2_kernel_validity() -> Outcome {
    let (fx, _) = fixtures()?;
    let mut worst_row: f64 = 0.0;
    let mut worst_sigma: f64 = 0.0;
    for f in &fx {
        let mu = &f.triplet.kernel;
        for row in mu.rows() {
            ensure(row.iter().all(|v| (0.0..=1.0).contains(v)), || format!("entry outside [0, 1] in {row:?}"))?;
            worst_row = worst_row.max((row.iter().sum::<f64>() - 1.0).abs());
        }
        let r = sigma_additivity_check(mu, &cell_partitions(mu.n_cols()), 1e-12).map_err(|e| e.to_string())?;
        worst_sigma = worst_sigma.max(r.estimate.unwrap_or(f64::INFINITY));
    }
    ensure(worst_row <= 1e-10, || format!("row sum off by {worst_row:e}"))?;
    ensure(worst_sigma <= 1e-12, || format!("sigma-additivity residual {worst_sigma:e}"))?;
    Ok(format!("row sums within {worst_row:e}, sigma residual {worst_sigma:e}"))
}

fn c3_separation() -> Outcome {
    let (fx, _) = fixtures()?;
    for (s, f) in fx.iter().enumerate() {
        let sep = check_separation(&f.triplet.kernel, 1e-9);
        ensure(sep.separated, || format!("seed {s}: rows {:?} not separated", sep.closest_pair))?;
        let labels = &f.triplet.generator.labels;
        for (i, a) in labels.iter().enumerate() {
            ensure(matches!(a, Label::Exact(_)), || format!("seed {s}: label {a} is not exact"))?;
            ensure(!labels[..i].contains(a), || format!("seed {s}: duplicate label {a}"))?;
        }
    }
    // Rows agree in their first 16 bits per entry and differ by 2^-20.
    let gap = 2f64.powi(-20);
    let grid = OutcomeGrid::uniform(0.0, 1.0, 2).map_err(|e| e.to_string())?;
    let f = DiscretePovm::new(
        grid,
        vec![
            HermitianOperator::from_real_diagonal(&[0.3, 0.3 + gap]),
            HermitianOperator::from_real_diagonal(&[0.7, 0.7 - gap]),
        ],
        1e-9,
    )
    .map_err(|e| e.to_string())?;
    let je = joint_diagonalize(&f, &ReconstructionOptions::default()).map_err(|e| e.to_string())?;
    let g = build_generator(&je, 16, 2).map_err(|e| e.to_string())?;
    ensure(g.doublings >= 1 && g.doublings <= 2, || format!("{} doublings", g.doublings))?;
    ensure(g.labels[0] != g.labels[1], || "collision not resolved".into())?;
    Ok(format!(
        "100 seeds separated with exact distinct labels; 2^-20 gap resolved after {} doubling(s) at {} bits",
        g.doublings,
        g.bits_per_effect.unwrap_or(0)
    ))
}

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_semispectral")
}

const NON_COMMUTING: &str = r#"{"dim":2,"grid":{"a":0,"b":1,"m":2},"effects":[
[[[1,0],[0,0]],[[0,0],[0,0]]],
[[[0.5,0],[0.5,0]],[[0.5,0],[0.5,0]]]]}"#;

fn c4_commutativity_gate() -> Outcome {
    let p = HermitianOperator::from_real_diagonal(&[1.0, 0.0]);
    let b = HermitianOperator::from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5]]).map_err(|e| e.to_string())?;
    let c = commutator_norm(&p, &b).map_err(|e| e.to_string())?;
    ensure((c - 0.5).abs() < 1e-15, || format!("commutator norm {c}"))?;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("noncommuting.json");
    std::fs::write(&path, NON_COMMUTING).map_err(|e| e.to_string())?;
    let out = Command::new(bin())
        .args(["reconstruct", "--in"])
        .arg(&path)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.code() == Some(2), || format!("exit status {:?}", out.status.code()))?;
    let (fx, _) = fixtures()?;
    for (s, f) in fx.iter().enumerate() {
        let back = f.triplet.smear().map_err(|e| e.to_string())?;
        let r = is_commutative(&back, 1e-9);
        ensure(r.commutative, || format!("seed {s}: smear output not commutative ({:e})", r.max_commutator_norm))?;
    }
    Ok(format!("commutator norm {c}, CLI exit 2, 100 smear outputs commutative"))
}

/// `int_{delta} f(x - y) dy` by adaptive quadrature over the effective support.
fn oracle(k: &ConvolutionKernel, delta: &IntervalSet, x: f64) -> f64 {
    let (slo, shi) = k.profile.effective_support();
    let opts = QuadratureOptions {
        abs_tol: 1e-14,
        max_subdivisions: 20_000,
    };
    delta
        .parts()
        .iter()
        .map(|p| {
            let lo = p.lo.max(x - shi);
            let hi = p.hi.min(x - slo);
            if lo >= hi {
                return 0.0;
            }
            let mut breaks = vec![lo, hi];
            breaks.extend(k.profile.breakpoints().iter().map(|b| x - b).filter(|y| *y > lo && *y < hi));
            integrate_with_breaks(|y| k.profile.density(x - y), &breaks, &opts).expect("oracle quadrature")
        })
        .sum()
}

fn random_interval(rng: &mut ChaCha8Rng, spread: f64) -> IntervalSet {
    match rng.random_range(0..4) {
        0 => Interval::below(rng.random_range(-spread..spread)).into(),
        1 => Interval::new(rng.random_range(-spread..spread), f64::INFINITY, true, false).into(),
        _ => {
            let a = rng.random_range(-spread..spread);
            let b = a + rng.random_range(0.0..spread);
            Interval::closed(a, b).into()
        }
    }
}

fn c5_gaussian_closed_form() -> Outcome {
    let start = Instant::now();
    let g = ConvolutionKernel::gaussian(1.0).map_err(|e| e.to_string())?;
    let d: IntervalSet = Interval::closed(-1.0, 1.0).into();
    let v = kernel_eval(&g, &d, 0.0);
    let o = oracle(&g, &d, 0.0);
    ensure((v - o).abs() <= 1e-12, || format!("erf(1/sqrt 2): closed {v} vs oracle {o}"))?;
    // erf(1/sqrt(2)) to 18 digits.
    ensure((v - 0.682_689_492_137_085_9).abs() <= 1e-15, || format!("closed form {v}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let profile = match rng.random_range(0..4) {
            0 => KernelProfile::Box,
            1 => KernelProfile::Triangle,
            _ => KernelProfile::gaussian(rng.random_range(0.1..2.0)).map_err(|e| e.to_string())?,
        };
        let k = ConvolutionKernel::new(profile);
        let delta = random_interval(&mut rng, 3.0);
        let x = rng.random_range(-3.0..3.0);
        worst = worst.max((kernel_eval(&k, &delta, x) - oracle(&k, &delta, x)).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(worst <= 1e-10, || format!("max disagreement {worst:e}"))?;
    ensure(secs < 5.0, || format!("runtime {secs:.2} s"))?;
    Ok(format!("erf(1/sqrt 2) = {v}, 200 triples within {worst:e}, {secs:.2} s"))
}

fn c6_lipschitz() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut worst_ratio: f64 = 0.0;
    for l in [0.1, 0.5, 1.0, 2.0] {
        let k = ConvolutionKernel::gaussian(l).map_err(|e| e.to_string())?;
        let bound = SQRT_2 / (l * PI.sqrt());
        for _ in 0..20 {
            let a = rng.random_range(-2.0..2.0) * l;
            let b = a + rng.random_range(0.0..3.0) * l;
            let delta: IntervalSet = Interval::closed(a, b).into();
            let s = lipschitz_scan(&k, &delta, (a - 6.0 * l, b + 6.0 * l), 1e-3 * l).map_err(|e| e.to_string())?;
            ensure(s.estimate <= bound * (1.0 + 1e-6), || {
                format!("l = {l}, delta = {delta}: {} > {bound}", s.estimate)
            })?;
            worst_ratio = worst_ratio.max(s.estimate / bound);
        }
    }
    Ok(format!("max estimate / bound = {worst_ratio:.9}"))
}

fn c7_dichotomy() -> Outcome {
    let unit = SpectrumDomain::unit();
    let mut agreed = 0;
    let mut check_pair = |name: &str, uc: Verdict, sf: Verdict| -> Result<(), String> {
        ensure(uc == sf, || format!("{name}: uniform continuity {uc:?} vs strong Feller {sf:?}"))?;
        agreed += 1;
        Ok(())
    };
    for profile in [KernelProfile::Box, KernelProfile::Triangle] {
        let k = ConvolutionKernel::new(profile);
        let m = k.profile.density_bound();
        for kind in [FamilyKind::Shrinking, FamilyKind::Constant] {
            let (fam, limit) = family(kind, 0.0);
            let r = uniform_continuity_check(&k, &unit, &fam, &limit, 1e-9).map_err(|e| e.to_string())?;
            ensure(r.verdict == Verdict::Holds, || format!("{}: {:?}", k.describe(), r.witness))?;
            for ((n, res), d) in r.residuals.iter().zip(&fam) {
                let window: IntervalSet = Interval::closed(-1.0, 1.0).into();
                let bound = m * d.difference(&limit).intersection(&window).measure();
                ensure(*res <= bound * (1.0 + 1e-9) + 1e-15, || format!("n = {n}: {res} > {bound}"))?;
            }
            let f = strong_feller_family_check(&k, &fam, &limit, &unit, 1e-3).map_err(|e| e.to_string())?;
            check_pair(&k.describe(), r.verdict, f.verdict)?;
        }
    }
    let g = ConvolutionKernel::gaussian(1.0).map_err(|e| e.to_string())?;
    let (fam, limit) = family(FamilyKind::HalfLines, 0.0);
    let r = uniform_continuity_check(&g, &SpectrumDomain::Real, &fam, &limit, 1e-9).map_err(|e| e.to_string())?;
    ensure(r.verdict == Verdict::Fails, || "gaussian half-lines did not fail".into())?;
    for ((n, res), (_, x)) in r.residuals.iter().zip(&r.locations) {
        ensure(*res >= 1.0 - 1e-6, || format!("n = {n}: residual {res}"))?;
        let want = -(*n as f64) - 5.0;
        ensure(*x == want, || format!("n = {n}: witness x = {x}, expected {want}"))?;
    }
    let f = strong_feller_family_check(&g, &fam, &limit, &SpectrumDomain::Real, 1e-2).map_err(|e| e.to_string())?;
    check_pair("gaussian on the real line", r.verdict, f.verdict)?;
    // Plain continuity of each mu_delta still holds for the Gaussian.
    let plain = strong_feller_check(&g, &fam, &SpectrumDomain::Real, 1e-2).map_err(|e| e.to_string())?;
    ensure(plain.verdict == Verdict::Holds, || "gaussian mu_delta not continuous".into())?;
    let (fx, _) = fixtures()?;
    for f in fx.iter().take(20) {
        let m = f.povm.cells();
        let chain: Vec<RingSet> = (0..=m).map(|i| RingSet::new(i..m)).collect();
        let uc = uniform_continuity_povm(&f.povm, &chain, 1e-9).map_err(|e| e.to_string())?;
        check_pair("finite POVM", uc.verdict, strong_feller_triplet(&f.triplet).verdict)?;
    }
    Ok(format!(
        "box/triangle hold within the compact bound, gaussian fails with residual >= {:.9} at x = -n-5, {agreed} verdict pairs agree",
        r.residuals.iter().map(|p| p.1).fold(1.0, f64::min)
    ))
}

fn c8_norm1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for s in 0..20u64 {
        let d = 1 + (s % 6) as usize;
        let k = 1 + (s as usize * 3) % d;
        let projectors = semispectral::sampling::random_projectors(d, k, &mut rng);
        let points: Vec<f64> = (0..k).map(|i| i as f64 * 0.5).collect();
        let pvm = DiscretePvm::new(points, projectors, 1e-10).map_err(|e| e.to_string())?;
        ensure(norm1_pvm(&pvm, 1e-9).verdict == Verdict::Holds, || format!("pvm {s}"))?;
        let t = pvm_triplet(&pvm).map_err(|e| e.to_string())?;
        ensure(norm1_povm(&t.povm, 1e-9).verdict == Verdict::Holds, || format!("pvm povm {s}"))?;
    }
    let g = ConvolutionKernel::gaussian(1.0).map_err(|e| e.to_string())?;
    let schedule = [1e-1, 1e-2, 1e-3, 1e-4];
    let r = norm1_kernel(&g, &[0.0, 0.37], &schedule, &SpectrumDomain::Real, 1e-12).map_err(|e| e.to_string())?;
    for ((_, v), h) in r.residuals.iter().zip(schedule) {
        let bound = h / (2.0 * PI).sqrt();
        ensure(*v <= bound + 1e-12, || format!("h = {h}: sup {v} > {bound}"))?;
    }
    ensure(r.verdict == Verdict::Impossible, || format!("verdict {:?}", r.verdict))?;
    Ok(format!(
        "20 PVMs hold; gaussian sup at h = 1e-4 is {:e}, verdict impossible",
        r.residuals[3].1
    ))
}

fn c9_absolute_continuity() -> Outcome {
    let nu = DominatingMeasure::Lebesgue {
        scale: 1.0,
        window: Some((-1.0, 1.0)),
    };
    let b = ConvolutionKernel::new(KernelProfile::Box);
    let points: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
    let grid = OutcomeGrid::uniform(-1.0, 1.0, 20).map_err(|e| e.to_string())?;
    let t = unsharp_position(&b, &points, &grid, TailPolicy::ReportDeficit).map_err(|e| e.to_string())?;
    let r = absolute_continuity_povm(&t.povm, &nu, None, 42, 1e-12).map_err(|e| e.to_string())?;
    let c_povm = r.estimate.unwrap_or(f64::INFINITY);
    ensure(r.verdict == Verdict::Holds && c_povm <= 1.0 + 1e-9, || format!("discrete Q^f: c = {c_povm}"))?;
    let m = t.povm.cells();
    let chain: Vec<RingSet> = (0..=m).map(|i| RingSet::new(i..m)).collect();
    let uc = uniform_continuity_povm(&t.povm, &chain, 1e-9).map_err(|e| e.to_string())?;
    ensure(uc.verdict == Verdict::Holds, || "discrete Q^f not uniformly continuous".into())?;

    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let samples: Vec<IntervalSet> = (0..200).map(|_| random_interval(&mut rng, 1.5)).collect();
    let mut c_kernel: f64 = 0.0;
    for profile in [KernelProfile::Box, KernelProfile::Triangle] {
        let k = ConvolutionKernel::new(profile);
        let nu_k = DominatingMeasure::Lebesgue {
            scale: k.profile.density_bound(),
            window: Some((-1.0, 1.0)),
        };
        let model = KernelModel {
            kernel: &k,
            domain: SpectrumDomain::unit(),
        };
        let r = absolute_continuity_constant(&model, &nu_k, &samples, 1e-12).map_err(|e| e.to_string())?;
        let c = r.estimate.unwrap_or(f64::INFINITY);
        ensure(r.verdict == Verdict::Holds && c <= 1.0 + 1e-9, || format!("{}: c = {c}", k.describe()))?;
        c_kernel = c_kernel.max(c);
        let (fam, limit) = family(FamilyKind::Shrinking, 0.0);
        let uc = uniform_continuity_check(&k, &SpectrumDomain::unit(), &fam, &limit, 1e-9).map_err(|e| e.to_string())?;
        ensure(uc.verdict == Verdict::Holds, || format!("{}: absolutely continuous but not uniformly", k.describe()))?;
    }
    Ok(format!("discrete box Q^f c = {c_povm}, kernel models c = {c_kernel}; uniform continuity follows"))
}

fn c10_dini() -> Outcome {
    let (xs, table) = power_table(0.0, 0.9, 1000, 300);
    let r = dini_check(&table, Some(&xs), 1e-12).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for (n, s) in &r.residuals {
        worst = worst.max((s - 0.9f64.powi(*n as i32)).abs());
    }
    ensure(worst <= 1e-12, || format!("sup series off by {worst:e}"))?;
    ensure(r.verdict == Verdict::Holds, || format!("verdict {:?}", r.verdict))?;
    let (xs1, table1) = power_table(0.0, 1.0, 1000, 300);
    let rejected = dini_check(&table1, Some(&xs1), 1e-12);
    ensure(rejected.is_err(), || "[0, 1] table accepted".into())?;
    Ok(format!(
        "sup series within {worst:e} of 0.9^n, holds; [0, 1] rejected: {}",
        rejected.err().map(|e| e.to_string()).unwrap_or_default()
    ))
}

fn c11_generator() -> Outcome {
    let (fx, _) = fixtures()?;
    let mut worst: f64 = 0.0;
    let mut worst_seed = 0;
    for (s, f) in fx.iter().enumerate() {
        ensure(f.triplet.generator.len() <= 8, || format!("seed {s}: K > 8"))?;
        let r = interpolation_residual(&f.triplet);
        if r > worst {
            worst = r;
            worst_seed = s;
        }
    }
    ensure(worst <= 1e-8, || format!("seed {worst_seed}: interpolation residual {worst:e}"))?;
    Ok(format!("max interpolation residual {worst:e} (seed {worst_seed})"))
}

fn run_cli(args: &[&str], dir: &Path) -> Result<Vec<u8>, String> {
    let out = Command::new(bin())
        .args(args)
        .current_dir(dir)
        .output()
        .map_err(|e| e.to_string())?;
    let mut bytes = out.stdout;
    bytes.extend(format!("exit {:?}", out.status.code()).bytes());
    Ok(bytes)
}

fn c12_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let fx = random_fixture(5, 4, 3, 6);
    let text = semispectral::io::to_json_string(&semispectral::io::povm_to_json(&fx.povm)).map_err(|e| e.to_string())?;
    std::fs::write(dir.path().join("f.json"), text).map_err(|e| e.to_string())?;
    let runs: [&[&str]; 5] = [
        &["reconstruct", "--in", "f.json"],
        &["check", "--in", "f.json", "--property", "all"],
        &["check", "--profile", "gaussian", "--l", "1", "--property", "all"],
        &["check", "--profile", "box", "--property", "absolute-continuity", "--format", "csv"],
        &["demo", "optimal-phase-space", "--l", "1"],
    ];
    for args in runs {
        let a = run_cli(args, dir.path())?;
        let b = run_cli(args, dir.path())?;
        ensure(a == b, || format!("outputs differ for {args:?}"))?;
    }
    for (i, name) in ["unsharp-position-compact", "dini"].iter().enumerate() {
        let mut trees = Vec::new();
        for rep in 0..2 {
            let out = dir.path().join(format!("demo{i}_{rep}"));
            let o = out.to_string_lossy().into_owned();
            run_cli(&["demo", name, "--out", &o], dir.path())?;
            let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(&out)
                .map_err(|e| e.to_string())?
                .map(|e| {
                    let e = e.expect("dir entry");
                    (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).expect("read"))
                })
                .collect();
            files.sort();
            trees.push(files);
        }
        ensure(!trees[0].is_empty() && trees[0] == trees[1], || format!("demo {name} output differs"))?;
    }
    Ok("reconstruct, check and demo outputs byte-identical across runs".into())
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("1 triplet round trip", c1_round_trip),
        ("2 kernel validity", c2_kernel_validity),
        ("3 separation", c3_separation),
        ("4 commutativity gate", c4_commutativity_gate),
        ("5 gaussian closed form", c5_gaussian_closed_form),
        ("6 lipschitz bound", c6_lipschitz),
        ("7 uniform-continuity dichotomy", c7_dichotomy),
        ("8 norm-1", c8_norm1),
        ("9 absolute continuity", c9_absolute_continuity),
        ("10 dini", c10_dini),
        ("11 generator property", c11_generator),
        ("12 cli determinism", c12_determinism),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into()))
        });
        match result {
            Ok(detail) => println!("PASS  criterion {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  criterion {name}: {why}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 12 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
