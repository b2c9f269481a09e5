//! File formats: POVM and triplet JSON, grid specs, Dini tables, curve CSV.
//!
//! Matrices are row-major arrays of `[re, im]` pairs. Floats are written in
//! shortest round-trip form, and exact labels as `"p/q"` strings.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analysis::PropertyReport;
use crate::error::{Error, Result};
use crate::operators::{CMatrix, HermitianOperator, Projection, TOL_HERM};
use crate::povm::{DiscretePovm, OutcomeGrid};
use crate::reconstruction::{Generator, KernelMatrix, Label, VonNeumannTriplet, TOL_ROW};

/// Tolerance for effects and projections read from files.
pub const TOL_FILE: f64 = 1e-9;

pub type JsonMatrix = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridJson {
    pub a: f64,
    pub b: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<f64>>,
    /// Number of equal cells, used when `edges` is absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
}

impl GridJson {
    pub fn from_grid(g: &OutcomeGrid) -> Self {
        Self {
            a: g.a(),
            b: g.b(),
            edges: Some(g.edges().to_vec()),
            m: None,
        }
    }

    pub fn to_grid(&self) -> Result<OutcomeGrid> {
        match (&self.edges, self.m) {
            (Some(e), _) => {
                let g = OutcomeGrid::new(e.clone())?;
                if g.a() != self.a || g.b() != self.b {
                    return Err(Error::InvalidGrid(format!(
                        "edges span [{}, {}] but a = {}, b = {}",
                        g.a(),
                        g.b(),
                        self.a,
                        self.b
                    )));
                }
                Ok(g)
            }
            (None, Some(m)) => OutcomeGrid::uniform(self.a, self.b, m),
            (None, None) => Err(Error::InvalidGrid("grid needs edges or m".into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PovmJson {
    pub dim: usize,
    pub grid: GridJson,
    pub effects: Vec<JsonMatrix>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TripletJson {
    pub dim: usize,
    pub grid: GridJson,
    pub labels: Vec<String>,
    pub projectors: Vec<JsonMatrix>,
    pub kernel: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bits_per_effect: Option<u32>,
    #[serde(default)]
    pub doublings: u32,
    #[serde(default)]
    pub residual: f64,
}

pub fn matrix_to_json(m: &CMatrix) -> JsonMatrix {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

/// Reads a `dim x dim` Hermitian matrix.
pub fn matrix_from_json(rows: &JsonMatrix, dim: usize) -> Result<HermitianOperator> {
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: rows.iter().map(Vec::len).find(|&n| n != dim).unwrap_or(rows.len()),
        });
    }
    if rows.iter().flatten().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Parse("matrix entries must be finite".into()));
    }
    let m = CMatrix::from_fn(dim, dim, |i, j| Complex64::new(rows[i][j][0], rows[i][j][1]));
    HermitianOperator::with_tolerance(m, TOL_HERM)
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 || dim > 64 {
        return Err(Error::Parse(format!("dimension {dim} outside 1..=64")));
    }
    Ok(())
}

pub fn povm_from_json(p: &PovmJson) -> Result<DiscretePovm> {
    check_dim(p.dim)?;
    let grid = p.grid.to_grid()?;
    let effects = p
        .effects
        .iter()
        .map(|e| matrix_from_json(e, p.dim))
        .collect::<Result<Vec<_>>>()?;
    DiscretePovm::new(grid, effects, TOL_FILE)
}

pub fn povm_to_json(f: &DiscretePovm) -> PovmJson {
    PovmJson {
        dim: f.dim(),
        grid: GridJson::from_grid(f.grid()),
        effects: f.effects().iter().map(|e| matrix_to_json(e.op().matrix())).collect(),
    }
}

/// Parses POVM JSON text. Normalization is not checked here.
pub fn parse_povm(text: &str) -> Result<DiscretePovm> {
    let p: PovmJson = serde_json::from_str(text)?;
    povm_from_json(&p)
}

pub fn triplet_to_json(t: &VonNeumannTriplet) -> TripletJson {
    TripletJson {
        dim: t.povm.dim(),
        grid: GridJson::from_grid(t.grid()),
        labels: t.generator.labels.iter().map(Label::to_string).collect(),
        projectors: t
            .generator
            .projectors
            .iter()
            .map(|p| matrix_to_json(p.op().matrix()))
            .collect(),
        kernel: t.kernel.rows().to_vec(),
        bits_per_effect: t.generator.bits_per_effect,
        doublings: t.generator.doublings,
        residual: t.residual,
    }
}

/// Rebuilds a triplet; `F` is recomputed by smearing the projectors.
pub fn triplet_from_json(t: &TripletJson) -> Result<VonNeumannTriplet> {
    check_dim(t.dim)?;
    let grid = t.grid.to_grid()?;
    if t.labels.is_empty() || t.labels.len() != t.projectors.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} labels for {} projectors",
            t.labels.len(),
            t.projectors.len()
        )));
    }
    let labels = t.labels.iter().map(|s| s.parse()).collect::<Result<Vec<Label>>>()?;
    for (i, a) in labels.iter().enumerate() {
        if labels[..i].contains(a) {
            return Err(Error::Parse(format!("duplicate label {a}")));
        }
    }
    let projectors = t
        .projectors
        .iter()
        .map(|p| Projection::new(matrix_from_json(p, t.dim)?, TOL_FILE))
        .collect::<Result<Vec<_>>>()?;
    let kernel = KernelMatrix::new(t.kernel.clone(), TOL_ROW)?;
    let generator = Generator::from_labels(labels, projectors, t.bits_per_effect, t.doublings);
    let povm = crate::reconstruction::smear_projectors(&generator.projectors, &kernel, &grid)?;
    VonNeumannTriplet::assemble(povm, generator, kernel)
}

pub fn parse_triplet(text: &str) -> Result<VonNeumannTriplet> {
    let t: TripletJson = serde_json::from_str(text)?;
    triplet_from_json(&t)
}

/// Pretty JSON with a trailing newline; output is deterministic.
pub fn to_json_string<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

pub fn parse_reports(text: &str) -> Result<Vec<PropertyReport>> {
    Ok(serde_json::from_str(text)?)
}

/// `"a,b,m"`: `m` equal cells over `[a, b]`.
pub fn parse_grid_spec(s: &str) -> Result<OutcomeGrid> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [a, b, m] = parts.as_slice() else {
        return Err(Error::Parse(format!("grid spec {s:?} is not a,b,m")));
    };
    let a: f64 = a.parse().map_err(|_| Error::Parse(format!("bad grid start {a:?}")))?;
    let b: f64 = b.parse().map_err(|_| Error::Parse(format!("bad grid end {b:?}")))?;
    let m: usize = m.parse().map_err(|_| Error::Parse(format!("bad cell count {m:?}")))?;
    if m > 1_000_000 {
        return Err(Error::Parse(format!("cell count {m} is too large")));
    }
    OutcomeGrid::uniform(a, b, m)
}

/// Dini table as CSV: an optional header `lambda,x1,x2,...` giving the
/// sample points, then one row of values per step.
#[derive(Debug, Clone, PartialEq)]
pub struct DiniTable {
    pub points: Option<Vec<f64>>,
    pub rows: Vec<Vec<f64>>,
}

pub fn parse_dini_csv(text: &str) -> Result<DiniTable> {
    let mut points = None;
    let mut rows = Vec::new();
    let parse_row = |line: &str, no: usize| -> Result<Vec<f64>> {
        line.split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("line {no}: bad number {:?}", v.trim())))
            })
            .collect()
    };
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(rest) = line.strip_prefix("lambda,") {
            if points.is_some() || !rows.is_empty() {
                return Err(Error::Parse(format!("line {}: header must come first", i + 1)));
            }
            points = Some(parse_row(rest, i + 1)?);
            continue;
        }
        rows.push(parse_row(line, i + 1)?);
    }
    if rows.is_empty() {
        return Err(Error::Parse("no data rows".into()));
    }
    let width = rows[0].len();
    if rows.iter().any(|r| r.len() != width) || points.as_ref().is_some_and(|p: &Vec<f64>| p.len() != width) {
        return Err(Error::Parse("ragged table".into()));
    }
    Ok(DiniTable { points, rows })
}

pub fn dini_to_csv(points: &[f64], rows: &[Vec<f64>]) -> String {
    let mut out = String::from("lambda");
    for p in points {
        out.push_str(&format!(",{p}"));
    }
    out.push('\n');
    for r in rows {
        let line: Vec<String> = r.iter().map(|v| v.to_string()).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

/// `x,mu` curve CSV.
pub fn curve_csv(xs: &[f64], mu: &[f64]) -> String {
    let mut out = String::from("x,mu\n");
    for (x, m) in xs.iter().zip(mu) {
        out.push_str(&format!("{x},{m}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::HermitianOperator;
    use crate::reconstruction::{build_triplet, max_cell_distance, ReconstructionOptions};

    fn diag_povm() -> DiscretePovm {
        let grid = OutcomeGrid::uniform(0.0, 1.0, 2).unwrap();
        DiscretePovm::new(
            grid,
            vec![
                HermitianOperator::from_real_diagonal(&[0.7, 0.2]),
                HermitianOperator::from_real_diagonal(&[0.3, 0.8]),
            ],
            1e-9,
        )
        .unwrap()
    }

    #[test]
    fn povm_round_trip() {
        let f = diag_povm();
        let text = to_json_string(&povm_to_json(&f)).unwrap();
        let g = parse_povm(&text).unwrap();
        assert_eq!(max_cell_distance(&f, &g), 0.0);
        assert_eq!(text, to_json_string(&povm_to_json(&g)).unwrap());
    }

    #[test]
    fn triplet_round_trip() {
        let t = build_triplet(&diag_povm(), &ReconstructionOptions::default()).unwrap();
        let text = to_json_string(&triplet_to_json(&t)).unwrap();
        assert!(t.generator.labels.iter().all(|l| text.contains(&format!("\"{l}\""))));
        let u = parse_triplet(&text).unwrap();
        assert_eq!(u.generator.labels, t.generator.labels);
        assert!(max_cell_distance(&u.povm, &t.povm) < 1e-15);
    }

    #[test]
    fn grid_spec() {
        let g = parse_grid_spec("-1, 2, 30").unwrap();
        assert_eq!(g.cells(), 30);
        assert!(parse_grid_spec("1,2").is_err());
        assert!(parse_grid_spec("2,1,3").is_err());
        assert!(parse_grid_spec("0,1,0").is_err());
    }

    #[test]
    fn uniform_grid_json() {
        let text = r#"{"dim":1,"grid":{"a":0,"b":1,"m":2},"effects":[[[[0.5,0]]],[[[0.5,0]]]]}"#;
        assert_eq!(parse_povm(text).unwrap().cells(), 2);
        let bad = r#"{"dim":2,"grid":{"a":0,"b":1,"m":1},"effects":[[[[1,0]]]]}"#;
        assert!(parse_povm(bad).is_err());
    }

    #[test]
    fn dini_csv() {
        let t = parse_dini_csv("lambda,0,0.5\n0,0.5\n0,0.25\n").unwrap();
        assert_eq!(t.points, Some(vec![0.0, 0.5]));
        assert_eq!(t.rows.len(), 2);
        assert!(parse_dini_csv("1,2\n3\n").is_err());
        assert!(parse_dini_csv("").is_err());
        let text = dini_to_csv(&[0.0, 0.5], &[vec![0.0, 0.5]]);
        assert_eq!(parse_dini_csv(&text).unwrap().rows, vec![vec![0.0, 0.5]]);
    }
}
