//! JSON documents for spaces, maps, families, candidates and reports.
//!
//! Every file is `{"schema_version": 1, "kind": "...", "data": {...}}`.
//! Matrices are row-major nested arrays, atoms are listed one per row,
//! and non-finite numbers (including the exponent `inf`) are strings.

use std::fmt;
use std::path::{Path, PathBuf};

use atomkit_core::atomic::{AtomicSystemCandidate, Certificate, Note};
use atomkit_core::frames::VectorFamily;
use atomkit_core::linalg::{ComplementPair, Exponent, LinearMap, PNormSpace};
use atomkit_core::seqspace::{NormMode, SequenceNormConfig, TriangularFunctionalFamily};
use nalgebra::DMatrix;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}", render_schema(.file, .line, .column, .field, .message))]
    Schema {
        file: String,
        line: Option<usize>,
        column: Option<usize>,
        field: String,
        message: String,
    },
}

fn render_schema(file: &str, line: &Option<usize>, column: &Option<usize>, field: &str, message: &str) -> String {
    let at = match (line, column) {
        (Some(l), Some(c)) => format!("{file}:{l}:{c}"),
        _ => file.to_string(),
    };
    format!("{at}: schema error at `{field}`: {message}")
}

impl LoadError {
    pub fn field(&self) -> Option<&str> {
        match self {
            LoadError::Schema { field, .. } => Some(field),
            LoadError::Io { .. } => None,
        }
    }

    pub fn line(&self) -> Option<usize> {
        match self {
            LoadError::Schema { line, .. } => *line,
            LoadError::Io { .. } => None,
        }
    }
}

/// Semantic validation failure at a dotted field path.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

impl FieldError {
    pub fn new(field: impl Into<String>, message: impl fmt::Display) -> Self {
        FieldError {
            field: field.into(),
            message: message.to_string(),
        }
    }

    pub fn within(self, parent: &str) -> Self {
        let field = if self.field.is_empty() {
            parent.to_string()
        } else {
            format!("{parent}.{}", self.field)
        };
        FieldError { field, ..self }
    }
}

type Checked<T> = std::result::Result<T, FieldError>;

/// A float that serializes non-finite values as strings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Num(pub f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        atomkit_core::float::serialize(&self.0, s)
    }
}

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        atomkit_core::float::deserialize(d).map(Num)
    }
}

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MatrixDto(pub Vec<Vec<Num>>);

impl MatrixDto {
    pub fn from_matrix(m: &DMatrix<f64>) -> Self {
        MatrixDto(
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| Num(m[(i, j)])).collect())
                .collect(),
        )
    }

    /// The matrix with `cols` columns (needed when there are no rows).
    pub fn to_matrix(&self, rows: usize, cols: usize) -> Checked<DMatrix<f64>> {
        if self.0.len() != rows {
            return Err(FieldError::new("", format!("expected {rows} rows, found {}", self.0.len())));
        }
        for (i, row) in self.0.iter().enumerate() {
            if row.len() != cols {
                return Err(FieldError::new(
                    format!("[{i}]"),
                    format!("expected {cols} entries, found {}", row.len()),
                ));
            }
        }
        Ok(DMatrix::from_fn(rows, cols, |i, j| self.0[i][j].0))
    }

    pub fn rows(&self) -> usize {
        self.0.len()
    }

    /// Column count taken from the first row (0 when there are no rows).
    pub fn cols(&self) -> usize {
        self.0.first().map_or(0, |r| r.len())
    }
}

/// Exponent as a number `>= 1` or `"inf"`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExponentDto(pub Exponent);

impl Serialize for ExponentDto {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        atomkit_core::float::serialize(&self.0.value(), s)
    }
}

impl<'de> Deserialize<'de> for ExponentDto {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = atomkit_core::float::deserialize(d)?;
        Exponent::new(v).map(ExponentDto).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormModeDto {
    Flat,
    RowSup,
}

impl From<NormMode> for NormModeDto {
    fn from(m: NormMode) -> Self {
        match m {
            NormMode::Flat => NormModeDto::Flat,
            NormMode::RowSup => NormModeDto::RowSup,
        }
    }
}

impl From<NormModeDto> for NormMode {
    fn from(m: NormModeDto) -> Self {
        match m {
            NormModeDto::Flat => NormMode::Flat,
            NormModeDto::RowSup => NormMode::RowSup,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceDto {
    pub dim: usize,
    pub p: ExponentDto,
}

impl SpaceDto {
    pub fn from_space(s: &PNormSpace) -> Self {
        SpaceDto {
            dim: s.dim(),
            p: ExponentDto(s.p()),
        }
    }

    pub fn to_space(&self) -> Checked<PNormSpace> {
        PNormSpace::new(self.dim, self.p.0).map_err(|e| FieldError::new("dim", e))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapDto {
    pub domain: SpaceDto,
    pub codomain: SpaceDto,
    pub matrix: MatrixDto,
}

impl MapDto {
    pub fn from_map(a: &LinearMap) -> Self {
        MapDto {
            domain: SpaceDto::from_space(a.domain()),
            codomain: SpaceDto::from_space(a.codomain()),
            matrix: MatrixDto::from_matrix(a.matrix()),
        }
    }

    pub fn to_map(&self) -> Checked<LinearMap> {
        let domain = self.domain.to_space().map_err(|e| e.within("domain"))?;
        let codomain = self.codomain.to_space().map_err(|e| e.within("codomain"))?;
        let m = self
            .matrix
            .to_matrix(codomain.dim(), domain.dim())
            .map_err(|e| e.within("matrix"))?;
        LinearMap::new(domain, codomain, m).map_err(|e| FieldError::new("matrix", e))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormDto {
    pub q: ExponentDto,
    pub mode: NormModeDto,
}

impl NormDto {
    pub fn from_config(c: &SequenceNormConfig) -> Self {
        NormDto {
            q: ExponentDto(c.q),
            mode: c.mode.into(),
        }
    }

    pub fn to_config(&self) -> SequenceNormConfig {
        SequenceNormConfig::new(self.q.0, self.mode.into())
    }
}

/// Atoms listed one per row of `atoms`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyDto {
    pub space: SpaceDto,
    pub coeff_exponent: ExponentDto,
    pub atoms: MatrixDto,
}

impl FamilyDto {
    pub fn from_family(f: &VectorFamily) -> Self {
        FamilyDto {
            space: SpaceDto::from_space(f.space()),
            coeff_exponent: ExponentDto(f.coeff_exponent()),
            atoms: MatrixDto::from_matrix(&f.atoms().transpose()),
        }
    }

    pub fn to_family(&self) -> Checked<VectorFamily> {
        let space = self.space.to_space().map_err(|e| e.within("space"))?;
        let rows = self.atoms.to_matrix(self.atoms.rows(), space.dim()).map_err(|e| e.within("atoms"))?;
        VectorFamily::new(space, rows.transpose(), self.coeff_exponent.0).map_err(|e| FieldError::new("atoms", e))
    }
}

/// Level `n` is an `m_n x d` matrix whose rows are `h_{n,1..m_n}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionalsDto {
    pub space: SpaceDto,
    pub levels: Vec<MatrixDto>,
}

impl FunctionalsDto {
    pub fn from_family(h: &TriangularFunctionalFamily) -> Self {
        FunctionalsDto {
            space: SpaceDto::from_space(h.space()),
            levels: h.levels().iter().map(MatrixDto::from_matrix).collect(),
        }
    }

    pub fn to_family(&self) -> Checked<TriangularFunctionalFamily> {
        let space = self.space.to_space().map_err(|e| e.within("space"))?;
        let mut levels = Vec::with_capacity(self.levels.len());
        for (n, l) in self.levels.iter().enumerate() {
            levels.push(
                l.to_matrix(l.rows(), space.dim())
                    .map_err(|e| e.within(&format!("levels[{n}]")))?,
            );
        }
        TriangularFunctionalFamily::new(space, levels).map_err(|e| FieldError::new("levels", e))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CandidateDto {
    pub family: FamilyDto,
    pub functionals: FunctionalsDto,
    pub operator: MapDto,
    pub norm: NormDto,
}

impl CandidateDto {
    pub fn from_candidate(c: &AtomicSystemCandidate) -> Self {
        CandidateDto {
            family: FamilyDto::from_family(c.family()),
            functionals: FunctionalsDto::from_family(c.functionals()),
            operator: MapDto::from_map(c.operator()),
            norm: NormDto::from_config(c.norm()),
        }
    }

    pub fn to_candidate(&self) -> Checked<AtomicSystemCandidate> {
        let family = self.family.to_family().map_err(|e| e.within("family"))?;
        let functionals = self.functionals.to_family().map_err(|e| e.within("functionals"))?;
        let operator = self.operator.to_map().map_err(|e| e.within("operator"))?;
        AtomicSystemCandidate::new(family, functionals, operator, self.norm.to_config())
            .map_err(|e| FieldError::new("", e))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplementsDto {
    pub kernel_projection: MapDto,
    pub range_projection: MapDto,
}

impl ComplementsDto {
    pub fn from_pair(c: &ComplementPair) -> Self {
        ComplementsDto {
            kernel_projection: MapDto::from_map(c.kernel_projection()),
            range_projection: MapDto::from_map(c.range_projection()),
        }
    }

    pub fn to_pair(&self) -> Checked<ComplementPair> {
        let p = self.kernel_projection.to_map().map_err(|e| e.within("kernel_projection"))?;
        let q = self.range_projection.to_map().map_err(|e| e.within("range_projection"))?;
        ComplementPair::new(p, q).map_err(|e| FieldError::new("", e))
    }
}

/// Input of `construct e3|e4|converse`. `e3` and `converse` read
/// `family`; `e4` reads `functionals`. `w` is optional everywhere.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstructionDto {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilyDto>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub functionals: Option<FunctionalsDto>,
    pub operator: MapDto,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<MapDto>,
    pub norm: NormDto,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CharacterizeDto {
    pub family: FamilyDto,
    pub projection: MapDto,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub functionals: Option<FunctionalsDto>,
    pub norm: NormDto,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplementedDto {
    pub family: FamilyDto,
    pub functionals: FunctionalsDto,
    pub projection: MapDto,
    pub norm: NormDto,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KFrameDto {
    pub family: FamilyDto,
    pub operator: MapDto,
}

/// Output of `construct`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstructionResultDto {
    pub method: String,
    pub candidate: CandidateDto,
    pub certificate: Certificate,
    pub checks: Vec<Note>,
}

/// Output of `characterize` on a `characterize` document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CharacterizationDto {
    pub agree: bool,
    pub a: bool,
    pub b: bool,
    pub c: bool,
    #[serde(with = "atomkit_core::float")]
    pub solvability_residual: f64,
    #[serde(with = "atomkit_core::float")]
    pub solvability_threshold: f64,
    #[serde(with = "atomkit_core::float")]
    pub tup_residual: f64,
    pub functionals: FunctionalsDto,
    pub local: Certificate,
    pub operator: Certificate,
}

/// Output of `characterize` on a `complemented` document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplementedResultDto {
    pub atoms: FamilyDto,
    pub functionals: FunctionalsDto,
    pub certificate: Certificate,
    #[serde(with = "atomkit_core::float")]
    pub angle: f64,
}

/// A document body with a fixed `kind` tag.
pub trait Kind: Serialize + DeserializeOwned {
    const KIND: &'static str;
}

macro_rules! kinds {
    ($($t:ty => $k:literal),* $(,)?) => {
        $(impl Kind for $t { const KIND: &'static str = $k; })*
    };
}

kinds! {
    SpaceDto => "space",
    MapDto => "map",
    FamilyDto => "family",
    FunctionalsDto => "functionals",
    CandidateDto => "candidate",
    ComplementsDto => "complements",
    ConstructionDto => "construction",
    CharacterizeDto => "characterize",
    ComplementedDto => "complemented",
    KFrameDto => "kframe",
    Certificate => "certificate",
    ConstructionResultDto => "construction-result",
    CharacterizationDto => "characterization",
    ComplementedResultDto => "complemented-result",
    crate::generate::InstanceSpec => "instance-spec",
    crate::suite::SuiteConfig => "suite-config",
    crate::suite::SuiteReport => "suite-report",
}

#[derive(Serialize)]
struct DocumentRef<'a, T> {
    schema_version: u32,
    kind: &'a str,
    data: &'a T,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Document<T> {
    schema_version: u32,
    kind: String,
    data: T,
}

/// Pretty JSON document with a trailing newline.
pub fn to_string<T: Kind>(value: &T) -> String {
    let doc = DocumentRef {
        schema_version: SCHEMA_VERSION,
        kind: T::KIND,
        data: value,
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("documents always serialize");
    s.push('\n');
    s
}

fn schema_error(file: &str, e: serde_path_to_error::Error<serde_json::Error>) -> LoadError {
    let field = e.path().to_string();
    let inner = e.into_inner();
    LoadError::Schema {
        file: file.to_string(),
        line: Some(inner.line()),
        column: Some(inner.column()),
        field,
        message: strip_position(&inner.to_string()),
    }
}

fn parse<T: DeserializeOwned>(text: &str, file: &str) -> Result<T, LoadError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| schema_error(file, e))
}

pub fn from_str<T: Kind>(text: &str, file: &str) -> Result<T, LoadError> {
    let head: Document<serde::de::IgnoredAny> = parse(text, file)?;
    let schema = |field: &str, message: String| LoadError::Schema {
        file: file.to_string(),
        line: None,
        column: None,
        field: field.to_string(),
        message,
    };
    if head.schema_version != SCHEMA_VERSION {
        return Err(schema(
            "schema_version",
            format!("unsupported version {} (expected {SCHEMA_VERSION})", head.schema_version),
        ));
    }
    if head.kind != T::KIND {
        return Err(schema("kind", format!("expected \"{}\", found \"{}\"", T::KIND, head.kind)));
    }
    let doc: Document<T> = parse(text, file)?;
    Ok(doc.data)
}

fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}

/// The `kind` tag of a document.
pub fn peek_kind(path: &Path) -> Result<String, LoadError> {
    let text = std::fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let head: Document<serde::de::IgnoredAny> = parse(&text, &path.display().to_string())?;
    Ok(head.kind)
}

pub fn load<T: Kind>(path: &Path) -> Result<T, LoadError> {
    let text = std::fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    from_str(&text, &path.display().to_string())
}

pub fn save<T: Kind>(path: &Path, value: &T) -> std::io::Result<()> {
    std::fs::write(path, to_string(value))
}

/// Turn a semantic validation failure into a schema error rooted at `data`.
pub fn field_error(file: &str, e: FieldError) -> LoadError {
    let e = e.within("data");
    LoadError::Schema {
        file: file.to_string(),
        line: None,
        column: None,
        field: e.field,
        message: e.message,
    }
}

/// Load a document and convert it with `f`, reporting conversion failures
/// as schema errors.
pub fn load_with<T: Kind, U>(path: &Path, f: impl FnOnce(&T) -> Checked<U>) -> Result<U, LoadError> {
    let dto = load::<T>(path)?;
    let file = path.display().to_string();
    f(&dto).map_err(|e| field_error(&file, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_round_trip_and_infinity() {
        let a = LinearMap::new(
            PNormSpace::new(2, Exponent::INFINITY).unwrap(),
            PNormSpace::new(3, Exponent::new(1.5).unwrap()).unwrap(),
            DMatrix::from_row_slice(3, 2, &[0.1, -2.0, 1e-300, 3.0, f64::MIN_POSITIVE, 0.3]),
        )
        .unwrap();
        let text = to_string(&MapDto::from_map(&a));
        assert!(text.contains("\"inf\""));
        let back = from_str::<MapDto>(&text, "m.json").unwrap().to_map().unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn mismatched_dims_name_the_field() {
        let text = r#"{"schema_version": 1, "kind": "map", "data": {
            "domain": {"dim": 2, "p": 2}, "codomain": {"dim": 2, "p": 2},
            "matrix": [[1, 2], [3]]}}"#;
        let dto = from_str::<MapDto>(text, "bad.json").unwrap();
        let err = field_error("bad.json", dto.to_map().unwrap_err());
        assert_eq!(err.field(), Some("data.matrix.[1]"));
    }

    #[test]
    fn type_errors_carry_line_and_path() {
        let text = "{\"schema_version\": 1, \"kind\": \"space\",\n \"data\": {\"dim\": 2,\n \"p\": \"two\"}}";
        let err = from_str::<SpaceDto>(text, "s.json").unwrap_err();
        assert_eq!(err.field(), Some("data.p"));
        assert_eq!(err.line(), Some(3));
        let msg = err.to_string();
        assert!(msg.starts_with("s.json:3:"), "{msg}");
    }

    #[test]
    fn wrong_kind_and_version_rejected() {
        let s = to_string(&SpaceDto::from_space(&PNormSpace::euclidean(2).unwrap()));
        assert_eq!(from_str::<MapDto>(&s, "x").unwrap_err().field(), Some("kind"));
        let v2 = s.replace("\"schema_version\": 1", "\"schema_version\": 2");
        assert_eq!(from_str::<SpaceDto>(&v2, "x").unwrap_err().field(), Some("schema_version"));
    }

    #[test]
    fn exponent_below_one_rejected() {
        let text = r#"{"schema_version": 1, "kind": "space", "data": {"dim": 2, "p": 0.5}}"#;
        assert_eq!(from_str::<SpaceDto>(text, "x").unwrap_err().field(), Some("data.p"));
    }
}
