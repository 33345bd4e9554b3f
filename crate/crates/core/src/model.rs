//! Program data: `min cᵀx` subject to `A₀ + Σ xⱼ Aⱼ` lying in a cone.

use std::marker::PhantomData;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cones::{min_quad_over_simplex, DEFAULT_REFINE_ROUNDS};
use crate::error::{Error, Result};
use crate::symcore::{SimplexGrid, SimplexPoint, SymMatrix};

/// Asymmetry above this is averaged away with a warning.
pub const ASYMMETRY_WARN: f64 = 1e-9;
/// Asymmetry above this is rejected.
pub const ASYMMETRY_MAX: f64 = 1e-6;

/// Marker for the cone a program is posed over.
pub trait ConeKind: Clone + std::fmt::Debug {
    const NAME: &'static str;
}

#[derive(Clone, Debug, PartialEq)]
pub struct Copositive;

#[derive(Clone, Debug, PartialEq)]
pub struct Psd;

impl ConeKind for Copositive {
    const NAME: &'static str = "copositive";
}

impl ConeKind for Psd {
    const NAME: &'static str = "sdp";
}

/// `min cᵀx` s.t. `A₀ + Σ xⱼ Aⱼ ∈ K`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearConicProgram<K: ConeKind> {
    p: usize,
    a: Vec<SymMatrix>,
    c: Vec<f64>,
    _cone: PhantomData<K>,
}

pub type CopositiveProgram = LinearConicProgram<Copositive>;
pub type SdpProgram = LinearConicProgram<Psd>;

impl<K: ConeKind> LinearConicProgram<K> {
    /// `a[0]` is `A₀`; `a.len()` must be `c.len() + 1`.
    pub fn new(a: Vec<SymMatrix>, c: Vec<f64>) -> Result<Self> {
        if a.len() != c.len() + 1 {
            return Err(Error::DimensionMismatch { expected: a.len().saturating_sub(1), found: c.len() });
        }
        let p = a[0].dim();
        for m in &a {
            if m.dim() != p {
                return Err(Error::DimensionMismatch { expected: p, found: m.dim() });
            }
        }
        if c.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("cost vector must be finite".into()));
        }
        Ok(LinearConicProgram { p, a, c, _cone: PhantomData })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn n(&self) -> usize {
        self.c.len()
    }

    pub fn a(&self, j: usize) -> &SymMatrix {
        &self.a[j]
    }

    pub fn matrices(&self) -> &[SymMatrix] {
        &self.a
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    pub fn with_cost(&self, c: Vec<f64>) -> Result<Self> {
        Self::new(self.a.clone(), c)
    }

    /// Same data read as a program over another cone.
    pub fn recast<L: ConeKind>(&self) -> LinearConicProgram<L> {
        LinearConicProgram { p: self.p, a: self.a.clone(), c: self.c.clone(), _cone: PhantomData }
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        self.c.iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// `𝒜(x) = A₀ + Σ xⱼ Aⱼ`.
    pub fn constraint_matrix(&self, x: &[f64]) -> Result<SymMatrix> {
        if x.len() != self.n() {
            return Err(Error::DimensionMismatch { expected: self.n(), found: x.len() });
        }
        let mut out = self.a[0].clone();
        for (xj, aj) in x.iter().zip(&self.a[1..]) {
            out.axpy(*xj, aj)?;
        }
        Ok(out)
    }

    fn to_file(&self) -> ProgramFile {
        ProgramFile {
            kind: K::NAME.to_string(),
            p: self.p,
            n: self.n(),
            c: self.c.clone(),
            a: self.a.iter().map(SymMatrix::rows).collect(),
        }
    }
}

pub fn constraint_matrix<K: ConeKind>(prog: &LinearConicProgram<K>, x: &[f64]) -> Result<SymMatrix> {
    prog.constraint_matrix(x)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub feasible: bool,
    pub min_value: f64,
    pub witness: SimplexPoint,
}

/// Minimum of `tᵀ𝒜(x)t` over the simplex via grid search plus refinement.
pub fn feasibility_check(
    prog: &CopositiveProgram,
    x: &[f64],
    grid: &SimplexGrid,
    tol: f64,
) -> Result<FeasibilityReport> {
    let m = prog.constraint_matrix(x)?;
    let r = min_quad_over_simplex(&m, grid, DEFAULT_REFINE_ROUNDS)?;
    Ok(FeasibilityReport { feasible: r.value >= -tol, min_value: r.value, witness: r.argmin })
}

/// Wire format shared by both program kinds.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProgramFile {
    kind: String,
    p: usize,
    n: usize,
    c: Vec<f64>,
    #[serde(rename = "A")]
    a: Vec<Vec<Vec<f64>>>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LoadedProgram {
    Copositive(CopositiveProgram),
    Sdp(SdpProgram),
}

impl LoadedProgram {
    pub fn into_copositive(self) -> Result<CopositiveProgram> {
        match self {
            LoadedProgram::Copositive(p) => Ok(p),
            LoadedProgram::Sdp(_) => {
                Err(Error::InvalidArgument("expected a copositive program, found kind \"sdp\"".into()))
            }
        }
    }

    pub fn into_sdp(self) -> Result<SdpProgram> {
        match self {
            LoadedProgram::Sdp(p) => Ok(p),
            LoadedProgram::Copositive(_) => {
                Err(Error::InvalidArgument("expected an sdp program, found kind \"copositive\"".into()))
            }
        }
    }
}

pub fn parse_program(text: &str) -> Result<LoadedProgram> {
    let f: ProgramFile = serde_json::from_str(text)?;
    if f.p == 0 {
        return Err(Error::InvalidArgument("p must be positive".into()));
    }
    if f.c.len() != f.n {
        return Err(Error::DimensionMismatch { expected: f.n, found: f.c.len() });
    }
    if f.a.len() != f.n + 1 {
        return Err(Error::DimensionMismatch { expected: f.n + 1, found: f.a.len() });
    }
    let mut mats = Vec::with_capacity(f.a.len());
    for (j, rows) in f.a.iter().enumerate() {
        if rows.len() != f.p {
            return Err(Error::DimensionMismatch { expected: f.p, found: rows.len() });
        }
        let (m, asym) = SymMatrix::from_rows_tolerant(rows, ASYMMETRY_MAX)?;
        if asym > ASYMMETRY_WARN {
            log::warn!("A[{j}] asymmetric by {asym:e}; symmetrized");
        }
        mats.push(m);
    }
    match f.kind.as_str() {
        "copositive" => Ok(LoadedProgram::Copositive(CopositiveProgram::new(mats, f.c)?)),
        "sdp" => Ok(LoadedProgram::Sdp(SdpProgram::new(mats, f.c)?)),
        other => Err(Error::InvalidArgument(format!("unknown program kind {other:?}"))),
    }
}

pub fn load_program(path: impl AsRef<Path>) -> Result<LoadedProgram> {
    parse_program(&std::fs::read_to_string(path)?)
}

pub fn program_to_json<K: ConeKind>(prog: &LinearConicProgram<K>) -> String {
    serde_json::to_string_pretty(&prog.to_file()).expect("program serializes")
}

/// Writes the program as JSON. Floats are written in shortest round-trip
/// form, so loading reproduces every entry bit for bit.
pub fn save_program<K: ConeKind>(prog: &LinearConicProgram<K>, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, program_to_json(prog) + "\n")?;
    Ok(())
}

/// Reads a single symmetric matrix: a JSON array of rows.
pub fn parse_matrix(text: &str) -> Result<SymMatrix> {
    let rows: Vec<Vec<f64>> = serde_json::from_str(text)?;
    let (m, asym) = SymMatrix::from_rows_tolerant(&rows, ASYMMETRY_MAX)?;
    if asym > ASYMMETRY_WARN {
        log::warn!("matrix asymmetric by {asym:e}; symmetrized");
    }
    Ok(m)
}

pub fn load_matrix(path: impl AsRef<Path>) -> Result<SymMatrix> {
    parse_matrix(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcore::simplex_grid;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn ex_sl() -> CopositiveProgram {
        CopositiveProgram::new(vec![SymMatrix::zeros(2), SymMatrix::identity(2)], vec![1.0]).unwrap()
    }

    fn ex_ns() -> CopositiveProgram {
        CopositiveProgram::new(vec![SymMatrix::zeros(2), SymMatrix::diag(&[1.0, 0.0])], vec![1.0]).unwrap()
    }

    #[test]
    fn constraint_matrix_examples() {
        let p = ex_sl();
        assert_eq!(p.constraint_matrix(&[0.0]).unwrap(), SymMatrix::zeros(2));
        assert_eq!(p.constraint_matrix(&[2.0]).unwrap(), SymMatrix::diag(&[2.0, 2.0]));
        assert_eq!(ex_ns().constraint_matrix(&[3.0]).unwrap(), SymMatrix::diag(&[3.0, 0.0]));
        assert!(p.constraint_matrix(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn feasibility_examples() {
        let g = simplex_grid(2, 16).unwrap();
        let r = feasibility_check(&ex_sl(), &[1.0], &g, 1e-7).unwrap();
        assert!(r.feasible);
        assert_abs_diff_eq!(r.min_value, 0.5, epsilon = 1e-12);
        let r = feasibility_check(&ex_ns(), &[-1.0], &g, 1e-7).unwrap();
        assert!(!r.feasible);
        assert_eq!(r.min_value, -1.0);
        assert_eq!(r.witness, SimplexPoint::vertex(2, 0));
        let r = feasibility_check(&ex_ns(), &[0.0], &g, 1e-7).unwrap();
        assert!(r.feasible && r.min_value == 0.0);
    }

    #[test]
    fn parse_rejects_bad_files() {
        let bad_c = r#"{"kind":"copositive","p":2,"n":1,"c":[1,2],"A":[[[0,0],[0,0]],[[1,0],[0,0]]]}"#;
        assert!(matches!(parse_program(bad_c), Err(Error::DimensionMismatch { .. })));
        let asym = r#"{"kind":"copositive","p":2,"n":1,"c":[1],"A":[[[0,0],[0,0]],[[1,0.5],[0.4,0]]]}"#;
        assert!(matches!(parse_program(asym), Err(Error::NotSymmetric { .. })));
        let tiny = r#"{"kind":"copositive","p":2,"n":1,"c":[1],"A":[[[0,0],[0,0]],[[1,1e-12],[0,0]]]}"#;
        let p = parse_program(tiny).unwrap().into_copositive().unwrap();
        assert_eq!(p.a(1).get(0, 1), p.a(1).get(1, 0));
        assert!(parse_program("{").is_err());
    }

    #[test]
    fn save_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sl.json");
        save_program(&ex_sl(), &path).unwrap();
        let back = load_program(&path).unwrap().into_copositive().unwrap();
        assert_eq!(back, ex_sl());
        assert!(save_program(&ex_sl(), "").is_err());
    }

    proptest! {
        #[test]
        fn round_trip_is_exact(v in proptest::collection::vec(-1e3..1e3f64, 3 * 9 + 2)) {
            let mats: Vec<SymMatrix> = (0..3)
                .map(|k| {
                    let s = &v[k * 9..k * 9 + 9];
                    let rows: Vec<Vec<f64>> = (0..3).map(|i| (0..3).map(|j| s[i.min(j) * 3 + i.max(j)]).collect()).collect();
                    SymMatrix::from_rows(&rows).unwrap()
                })
                .collect();
            let prog = SdpProgram::new(mats, v[27..].to_vec()).unwrap();
            let back = parse_program(&program_to_json(&prog)).unwrap().into_sdp().unwrap();
            prop_assert_eq!(back, prog);
        }

        #[test]
        fn constraint_matrix_is_affine(
            x in proptest::collection::vec(-5.0..5.0f64, 2),
            y in proptest::collection::vec(-5.0..5.0f64, 2),
            alpha in 0.0..1.0f64,
        ) {
            let prog = CopositiveProgram::new(
                vec![SymMatrix::diag(&[1.0, 2.0]), SymMatrix::identity(2), SymMatrix::outer(&[1.0, -1.0])],
                vec![1.0, 1.0],
            ).unwrap();
            let z: Vec<f64> = x.iter().zip(&y).map(|(a, b)| alpha * a + (1.0 - alpha) * b).collect();
            let lhs = prog.constraint_matrix(&z).unwrap();
            let mut rhs = prog.constraint_matrix(&x).unwrap().scaled(alpha);
            rhs.axpy(1.0 - alpha, &prog.constraint_matrix(&y).unwrap()).unwrap();
            prop_assert!(lhs.sub(&rhs).unwrap().max_abs() <= 1e-12);
        }
    }
}
