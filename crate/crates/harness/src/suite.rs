//! Theorem-suite runner.

use std::time::Instant;

use atomkit_core::atomic::{self, AtomicSystemCandidate, Certificate, Note, DEFAULT_TOL};
use atomkit_core::frames::{bessel_bound, frame_bounds, kframe_bounds, synthesis_operator, VectorFamily};
use atomkit_core::linalg::{dense, matrix_norm, ComplementPair, LinearMap, RANK_RTOL};
use atomkit_core::par::{self, Execution};
use atomkit_core::random;
use atomkit_core::seqspace::{embed_classical, xd_bessel_bound, NormMode};
use atomkit_core::Error;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::generate::{generate, Dims, Exponents, Generated, InstanceSpec, Inputs, Ranks, Scenario};
use crate::io::NormModeDto;

/// `W = U_0` with `K = T U_0` must return `U_0` to this accuracy.
pub const W_INVARIANCE_TOL: f64 = 1e-12;
/// Relative slack for comparing two independently computed bounds.
pub const BOUND_MATCH_TOL: f64 = 1e-9;
/// Relative slack for recomputed level residuals.
pub const RESIDUAL_MATCH_TOL: f64 = 1e-10;
/// Unit vectors sampled for the K-frame inequalities.
pub const KFRAME_SAMPLES: usize = 64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    /// Overrides the suite-wide instance count.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instances: Option<usize>,
    #[serde(default)]
    pub dims: Dims,
    #[serde(default)]
    pub exponents: Exponents,
    /// Drawn per instance from the feasible range when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ranks: Option<Ranks>,
    #[serde(default)]
    pub adversarial: bool,
}

impl ScenarioConfig {
    pub fn new(scenario: Scenario) -> Self {
        ScenarioConfig {
            scenario,
            instances: None,
            dims: Dims::default(),
            exponents: Exponents::default(),
            ranks: None,
            adversarial: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    #[serde(default = "default_tol", with = "atomkit_core::float")]
    pub tol: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_instances")]
    pub instances: usize,
    #[serde(default = "default_mode")]
    pub norm_mode: NormModeDto,
    #[serde(default)]
    pub scenarios: Vec<ScenarioConfig>,
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}

fn default_instances() -> usize {
    10
}

fn default_mode() -> NormModeDto {
    NormModeDto::RowSup
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            tol: DEFAULT_TOL,
            seed: 0,
            instances: default_instances(),
            norm_mode: default_mode(),
            scenarios: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NamedCertificate {
    pub name: String,
    pub certificate: Certificate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceResult {
    pub scenario: Scenario,
    pub index: usize,
    pub seed: u64,
    pub spec: InstanceSpec,
    /// Whether the scenario hypotheses hold for this instance.
    pub expected: bool,
    pub passed: bool,
    pub checks: Vec<Note>,
    pub certificates: Vec<NamedCertificate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl InstanceResult {
    pub fn check(&self, name: &str) -> Option<&Note> {
        self.checks.iter().find(|n| n.name == name)
    }

    pub fn certificate(&self, name: &str) -> Option<&Certificate> {
        self.certificates.iter().find(|c| c.name == name).map(|c| &c.certificate)
    }

    fn max_residual(&self) -> f64 {
        self.checks
            .iter()
            .map(|n| n.residual)
            .filter(|r| r.is_finite())
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSummary {
    pub scenario: Scenario,
    pub adversarial: bool,
    pub instances: usize,
    pub passed: usize,
    #[serde(with = "atomkit_core::float")]
    pub max_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub instances: usize,
    pub passed: usize,
    pub failed: usize,
    #[serde(with = "atomkit_core::float")]
    pub max_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub config: SuiteConfig,
    pub aggregate: Aggregate,
    pub scenarios: Vec<ScenarioSummary>,
    pub instances: Vec<InstanceResult>,
    /// Timing; the only field that varies between identical runs.
    pub wall_time_seconds: f64,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.aggregate.failed == 0
    }

    /// The report with timing zeroed.
    pub fn canonical(&self) -> SuiteReport {
        SuiteReport {
            wall_time_seconds: 0.0,
            ..self.clone()
        }
    }
}

fn pick(seed: u64, salt: u64, lo: usize, hi: usize) -> usize {
    if hi <= lo {
        return lo;
    }
    lo + (random::derive_seed(seed, salt, 0x7a4e) % (hi - lo + 1) as u64) as usize
}

/// Feasible rank targets drawn from `seed`.
pub fn sample_ranks(seed: u64, scenario: Scenario, dims: Dims, adversarial: bool) -> Ranks {
    let lim = dims.d.min(dims.m);
    if adversarial {
        let t = pick(seed, 1, 0, lim.min(dims.d.saturating_sub(1)));
        let k = pick(seed, 2, 1, lim);
        return Ranks { k, t };
    }
    match scenario {
        Scenario::E3 | Scenario::Converse | Scenario::Kframe => {
            let t = pick(seed, 1, 1, lim);
            Ranks {
                k: pick(seed, 2, 0, t),
                t,
            }
        }
        Scenario::Characterize => {
            let t = pick(seed, 1, 1, lim);
            Ranks {
                k: pick(seed, 2, 1, t),
                t,
            }
        }
        Scenario::E4 | Scenario::EmbedClassical => {
            let t = pick(seed, 1, 1, lim);
            Ranks { k: t, t }
        }
        Scenario::Complemented => Ranks {
            k: pick(seed, 2, 1, dims.d),
            t: dims.d,
        },
        Scenario::ShiftExample => Ranks { k: 0, t: 0 },
    }
}

/// `(scenario entry, index, spec)` in report order.
pub fn instance_specs(config: &SuiteConfig) -> Vec<(usize, usize, InstanceSpec)> {
    let mut out = Vec::new();
    for (si, sc) in config.scenarios.iter().enumerate() {
        for index in 0..sc.instances.unwrap_or(config.instances) {
            let seed = random::derive_seed(config.seed, si as u64, index as u64);
            let ranks = sc
                .ranks
                .unwrap_or_else(|| sample_ranks(seed, sc.scenario, sc.dims, sc.adversarial));
            out.push((
                si,
                index,
                InstanceSpec {
                    seed,
                    scenario: sc.scenario,
                    dims: sc.dims,
                    exponents: sc.exponents,
                    ranks,
                    adversarial: sc.adversarial,
                    norm_mode: config.norm_mode,
                },
            ));
        }
    }
    out
}

pub fn run_suite(config: &SuiteConfig, exec: Execution) -> SuiteReport {
    let start = Instant::now();
    let specs = instance_specs(config);
    let tol = config.tol;
    let instances = par::map_indexed(exec, specs.len(), |i| {
        let (_, index, spec) = specs[i];
        run_instance(index, &spec, tol)
    });
    let scenarios = config
        .scenarios
        .iter()
        .enumerate()
        .map(|(si, sc)| {
            let mine: Vec<&InstanceResult> = instances
                .iter()
                .zip(&specs)
                .filter(|(_, (owner, _, _))| *owner == si)
                .map(|(r, _)| r)
                .collect();
            ScenarioSummary {
                scenario: sc.scenario,
                adversarial: sc.adversarial,
                instances: mine.len(),
                passed: mine.iter().filter(|r| r.passed).count(),
                max_residual: mine.iter().map(|r| r.max_residual()).fold(0.0, f64::max),
            }
        })
        .collect();
    let passed = instances.iter().filter(|r| r.passed).count();
    let aggregate = Aggregate {
        instances: instances.len(),
        passed,
        failed: instances.len() - passed,
        max_residual: instances.iter().map(|r| r.max_residual()).fold(0.0, f64::max),
    };
    SuiteReport {
        config: config.clone(),
        aggregate,
        scenarios,
        instances,
        wall_time_seconds: start.elapsed().as_secs_f64(),
    }
}

pub fn run_instance(index: usize, spec: &InstanceSpec, tol: f64) -> InstanceResult {
    let mut out = Outcome::default();
    let error = match generate(spec) {
        Ok(g) => evaluate(&g, tol, &mut out).err().map(|e| e.to_string()),
        Err(e) => Some(e.to_string()),
    };
    let passed = error.is_none() && !out.checks.is_empty() && out.checks.iter().all(|n| n.passed);
    InstanceResult {
        scenario: spec.scenario,
        index,
        seed: spec.seed,
        spec: *spec,
        expected: !spec.adversarial,
        passed,
        checks: out.checks,
        certificates: out.certificates,
        error,
    }
}

#[derive(Default)]
struct Outcome {
    checks: Vec<Note>,
    certificates: Vec<NamedCertificate>,
}

impl Outcome {
    fn check(&mut self, name: &str, passed: bool, residual: f64) {
        self.checks.push(Note::new(name, passed, residual));
    }

    fn certificate(&mut self, name: &str, c: &Certificate) {
        self.check(name, c.passed(), c.final_residual());
        self.certificates.push(NamedCertificate {
            name: name.to_string(),
            certificate: c.clone(),
        });
    }

    /// Verify the candidate and check that a pass implies range inclusion.
    fn verify_with_necessity(&mut self, cand: &AtomicSystemCandidate, tol: f64) -> Result<Certificate, Error> {
        let cert = atomic::verify_atomic_system(cand, tol);
        self.certificate("verify", &cert);
        let inc = atomic::necessary_range_test(cand.family(), cand.operator(), tol)?;
        self.check("necessity", !cert.passed() || inc.holds, inc.residual);
        Ok(cert)
    }
}

fn relative(residual: f64, scale: f64) -> f64 {
    residual / dense::unit_floor(scale)
}

fn identity_residual(lhs: &DMatrix<f64>, k: &DMatrix<f64>) -> f64 {
    relative(dense::spectral_norm(&(lhs - k)), dense::spectral_norm(k))
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |a: f64, x| a.max(x.abs()))
}

fn evaluate(g: &Generated, tol: f64, out: &mut Outcome) -> Result<(), Error> {
    let spec = &g.spec;
    let cfg = spec.norm();
    match &g.inputs {
        Inputs::E3 { family, k, w } if !g.expected => {
            let inc = atomic::necessary_range_test(family, k, tol)?;
            out.check("necessity-negative", !inc.holds, inc.residual);
            match atomic::e3_coefficient_map(family, k, Some(w), tol) {
                Err(Error::InclusionFailure { residual, .. }) => out.check("rejected", true, residual),
                Err(e) => return Err(e),
                Ok(_) => out.check("rejected", false, 0.0),
            }
        }
        Inputs::E3 { family, k, w } => {
            let tm = family.atoms();
            let s = atomic::e3_coefficient_map(family, k, Some(w), tol)?;
            out.check("e3-identity", true, identity_residual(&(tm * s.matrix()), k.matrix()));
            let k0 = LinearMap::new(*k.domain(), *k.codomain(), tm * w.matrix())?;
            let s0 = atomic::e3_coefficient_map(family, &k0, Some(w), tol)?;
            let drift = max_abs(&(s0.matrix() - w.matrix()));
            out.check("w-invariance", drift <= W_INVARIANCE_TOL, drift);
            let h = embed_classical(*family.space(), s.matrix())?;
            let cand = AtomicSystemCandidate::new(family.clone(), h, k.clone(), cfg)?;
            let cert = out.verify_with_necessity(&cand, tol)?;
            if cert.passed() {
                let pair = ComplementPair::orthogonal(k, RANK_RTOL);
                let r = atomic::atoms_for_operator_range(&cand, &pair, tol)?;
                out.certificate("range-local", &r.local);
                out.certificate("range-dual", &r.dual_decomposition);
            }
        }
        Inputs::E4 { functionals, k, w } => {
            let t = atomic::e4_synthesis(functionals, k, Some(w), &cfg, tol)?;
            let s = functionals.final_level();
            out.check("e4-identity", true, identity_residual(&(t.matrix() * s), k.matrix()));
            let adj = atomic::e4_adjoint_residual(functionals, k);
            out.check("adjoint-identity", adj <= tol, adj);
            let family = VectorFamily::new(*functionals.space(), t.into_matrix(), cfg.q)?;
            let cand = AtomicSystemCandidate::new(family, functionals.clone(), k.clone(), cfg)?;
            out.verify_with_necessity(&cand, tol)?;
        }
        Inputs::Converse { family, k } if !g.expected => {
            let inc = atomic::necessary_range_test(family, k, tol)?;
            out.check("necessity-negative", !inc.holds, inc.residual);
            let rejected = atomic::converse_construction(family, k, tol).is_err();
            out.check("rejected", rejected, inc.residual);
        }
        Inputs::Converse { family, k } => {
            let h = atomic::converse_construction(family, k, tol)?;
            let cand = AtomicSystemCandidate::new(family.clone(), h, k.clone(), cfg)?;
            out.verify_with_necessity(&cand, tol)?;
        }
        Inputs::Characterize { family, projection } => {
            let c = atomic::characterize_local_atoms(family, None, projection, &cfg, tol)?;
            out.check("agreement", c.agree(), c.tup_residual);
            out.check("expected-verdict", c.a == g.expected, c.solvability.residual);
            out.certificates.push(NamedCertificate {
                name: "local".into(),
                certificate: c.local,
            });
            out.certificates.push(NamedCertificate {
                name: "operator".into(),
                certificate: c.operator,
            });
        }
        Inputs::Complemented {
            family,
            functionals,
            projection,
        } => {
            let r = atomic::complemented_subspace_atoms(family, functionals, projection, &cfg, tol)?;
            out.certificate("complemented-local", &r.certificate);
        }
        Inputs::Shift { family } => {
            let b = bessel_bound(family);
            out.check("bessel-one", b.is_finite() && b.contains(1.0, 1e-12), b.upper);
            let fb = frame_bounds(family);
            out.check("not-onto", !fb.onto, fb.synthesis_rank as f64);
            out.check("lower-zero", fb.lower.lower == 0.0 && fb.lower.upper == 0.0, fb.lower.upper);
        }
        Inputs::Embed { candidate, classical } => {
            let cert = out.verify_with_necessity(candidate, tol)?;
            let p = candidate.family().space().p();
            let xd = xd_bessel_bound(candidate.functionals(), &cfg);
            let cl = matrix_norm(classical, p, cfg.q);
            let slack = 1.0 + BOUND_MATCH_TOL;
            let matches = match cfg.mode {
                NormMode::RowSup => xd.lower <= cl.upper * slack && cl.lower <= xd.upper * slack,
                NormMode::Flat => cl.lower <= xd.upper * slack,
            };
            out.check("bessel-match", matches, relative((xd.value() - cl.value()).abs(), cl.value()));
            let drift = truncation_drift(candidate, classical, &cert.level_residuals);
            out.check("truncation-residuals", drift <= RESIDUAL_MATCH_TOL, drift);
        }
        Inputs::Kframe { family, k } => kframe_checks(family, k, g, out)?,
    }
    Ok(())
}

/// Largest relative gap between `r_n` and `|K - sum_{i<=n} x_i g_i^T|_2`
/// built one outer product at a time.
fn truncation_drift(cand: &AtomicSystemCandidate, g: &DMatrix<f64>, residuals: &[f64]) -> f64 {
    let k = cand.operator().matrix();
    let x = cand.family().atoms();
    let scale = dense::unit_floor(dense::spectral_norm(k));
    let mut partial = DMatrix::zeros(k.nrows(), k.ncols());
    let mut worst: f64 = 0.0;
    for (n, r) in residuals.iter().enumerate() {
        partial += x.column(n) * g.row(n);
        let direct = dense::singular_values(&(k - &partial)).first().copied().unwrap_or(0.0);
        worst = worst.max((direct - r).abs() / scale);
    }
    if residuals.len() != g.nrows() {
        return f64::INFINITY;
    }
    worst
}

fn kframe_checks(family: &VectorFamily, k: &LinearMap, g: &Generated, out: &mut Outcome) -> Result<(), Error> {
    let kb = kframe_bounds(family, k)?;
    let b = kb.upper.value();
    let a = kb.lower.map_or(0.0, |l| l.value());
    let tm = synthesis_operator(family);
    let k_rank = dense::rank(k.matrix(), RANK_RTOL);
    if g.expected {
        let positive = kb.lower.is_some_and(|l| l.lower > 0.0);
        out.check("lower-positive", positive == (k_rank > 0), a);
    } else {
        out.check("lower-zero", kb.lower.is_some_and(|l| l.upper == 0.0), a);
    }
    let mut rng = random::rng(random::derive_seed(g.spec.seed, 0xf4a3e, 0));
    let mut worst: f64 = 0.0;
    for _ in 0..KFRAME_SAMPLES {
        let mut x = random::gaussian(&mut rng, family.space().dim(), 1);
        x /= x.norm();
        let energy = (tm.matrix().transpose() * &x).norm_squared();
        let kx = (k.matrix().transpose() * &x).norm_squared();
        worst = worst.max(a * kx - energy).max(energy - b);
    }
    out.check("kframe-inequalities", worst <= BOUND_MATCH_TOL * dense::unit_floor(b), worst.max(0.0));
    Ok(())
}
