//! Reproducible random inputs for each scenario.

use atomkit_core::atomic::AtomicSystemCandidate;
use atomkit_core::frames::VectorFamily;
use atomkit_core::linalg::{dense, Exponent, LinearMap, PNormSpace, RANK_RTOL};
use atomkit_core::random::{self, Rng};
use atomkit_core::seqspace::{embed_classical, SequenceNormConfig, TriangularFunctionalFamily};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::io::{
    self, CandidateDto, CharacterizeDto, ComplementedDto, ConstructionDto, ExponentDto, FamilyDto, FunctionalsDto,
    KFrameDto, MapDto, NormDto, NormModeDto,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    E3,
    E4,
    Converse,
    Characterize,
    Complemented,
    ShiftExample,
    EmbedClassical,
    Kframe,
}

impl Scenario {
    pub const ALL: [Scenario; 8] = [
        Scenario::E3,
        Scenario::E4,
        Scenario::Converse,
        Scenario::Characterize,
        Scenario::Complemented,
        Scenario::ShiftExample,
        Scenario::EmbedClassical,
        Scenario::Kframe,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::E3 => "e3",
            Scenario::E4 => "e4",
            Scenario::Converse => "converse",
            Scenario::Characterize => "characterize",
            Scenario::Complemented => "complemented",
            Scenario::ShiftExample => "shift-example",
            Scenario::EmbedClassical => "embed-classical",
            Scenario::Kframe => "kframe",
        }
    }

    /// Scenarios with a negative variant.
    pub fn supports_adversarial(self) -> bool {
        matches!(
            self,
            Scenario::E3 | Scenario::Converse | Scenario::Characterize | Scenario::Kframe
        )
    }
}

impl std::fmt::Display for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// `d` = dim X, `m` = number of atoms, `levels` = number of levels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Dims {
    pub d: usize,
    pub m: usize,
    pub levels: usize,
}

impl Default for Dims {
    fn default() -> Self {
        Dims { d: 4, m: 6, levels: 3 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Exponents {
    pub p: ExponentDto,
    pub q: ExponentDto,
}

impl Default for Exponents {
    fn default() -> Self {
        Exponents {
            p: ExponentDto(Exponent::TWO),
            q: ExponentDto(Exponent::TWO),
        }
    }
}

/// Rank targets: `k` for the operator (or projection), `t` for the
/// synthesis matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ranks {
    pub k: usize,
    pub t: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSpec {
    pub seed: u64,
    pub scenario: Scenario,
    pub dims: Dims,
    #[serde(default)]
    pub exponents: Exponents,
    pub ranks: Ranks,
    /// Violate the scenario hypothesis on purpose.
    #[serde(default)]
    pub adversarial: bool,
    #[serde(default = "default_mode")]
    pub norm_mode: NormModeDto,
}

fn default_mode() -> NormModeDto {
    NormModeDto::RowSup
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpecError {
    #[error("dimension `{0}` must be positive")]
    ZeroDim(&'static str),
    #[error("rank target `{name}` = {value} exceeds {limit}")]
    Rank {
        name: &'static str,
        value: usize,
        limit: usize,
    },
    #[error("infeasible rank targets for {scenario}: {reason}")]
    Infeasible { scenario: Scenario, reason: String },
    #[error("{0}")]
    Core(#[from] atomkit_core::Error),
}

impl InstanceSpec {
    pub fn validate(&self) -> Result<(), SpecError> {
        let Dims { d, m, levels } = self.dims;
        for (name, v) in [("d", d), ("m", m), ("levels", levels)] {
            if v == 0 {
                return Err(SpecError::ZeroDim(name));
            }
        }
        let limit = d.min(m);
        for (name, value) in [("k", self.ranks.k), ("t", self.ranks.t)] {
            if value > limit {
                return Err(SpecError::Rank { name, value, limit });
            }
        }
        let Ranks { k, t } = self.ranks;
        let infeasible = |reason: &str| {
            Err(SpecError::Infeasible {
                scenario: self.scenario,
                reason: reason.to_string(),
            })
        };
        if self.adversarial {
            if !self.scenario.supports_adversarial() {
                return infeasible("scenario has no adversarial variant");
            }
            if t >= d || k == 0 {
                return infeasible("a range outside Range T needs t < d and k > 0");
            }
            return Ok(());
        }
        match self.scenario {
            Scenario::E3 | Scenario::Converse | Scenario::Characterize | Scenario::Kframe if k > t => {
                infeasible("Range K ⊆ Range T forces k <= t")
            }
            Scenario::E4 if k != t => infeasible("Range K* = Range S* forces k = t"),
            Scenario::E4 if t == 0 => infeasible("the final level needs t > 0"),
            Scenario::E4 if levels > m => infeasible("levels must not exceed m"),
            Scenario::Complemented if t != d => infeasible("an atomic system for I needs t = d"),
            Scenario::ShiftExample if d < 2 => infeasible("the shift family needs d >= 2"),
            _ => Ok(()),
        }
    }

    pub fn space(&self) -> Result<PNormSpace, SpecError> {
        Ok(PNormSpace::new(self.dims.d, self.exponents.p.0)?)
    }

    pub fn norm(&self) -> SequenceNormConfig {
        SequenceNormConfig::new(self.exponents.q.0, self.norm_mode.into())
    }
}

/// Generated scenario inputs. `expected` is whether the hypotheses hold.
#[derive(Clone, Debug, PartialEq)]
pub struct Generated {
    pub spec: InstanceSpec,
    pub expected: bool,
    pub inputs: Inputs,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Inputs {
    /// `K = T C` (or a generic `K` when adversarial) with a random `W`.
    E3 {
        family: VectorFamily,
        k: LinearMap,
        w: LinearMap,
    },
    /// Functionals whose final level is `S`, and `K = B S`.
    E4 {
        functionals: TriangularFunctionalFamily,
        k: LinearMap,
        w: LinearMap,
    },
    Converse {
        family: VectorFamily,
        k: LinearMap,
    },
    Characterize {
        family: VectorFamily,
        projection: LinearMap,
    },
    /// A frame with functionals from the E3 construction for `K = I`.
    Complemented {
        family: VectorFamily,
        functionals: TriangularFunctionalFamily,
        projection: LinearMap,
    },
    Shift {
        family: VectorFamily,
    },
    /// `K = T G` reconstructed by the classical family `G` (rows).
    Embed {
        candidate: AtomicSystemCandidate,
        classical: DMatrix<f64>,
    },
    Kframe {
        family: VectorFamily,
        k: LinearMap,
    },
}

fn endo(space: PNormSpace, m: DMatrix<f64>) -> Result<LinearMap, SpecError> {
    Ok(LinearMap::new(space, space, m)?)
}

/// `d x m` matrix of rank `t` with condition number capped.
fn synthesis(rng: &mut Rng, spec: &InstanceSpec) -> Result<VectorFamily, SpecError> {
    let Dims { d, m, .. } = spec.dims;
    let atoms = random::with_rank(rng, d, m, spec.ranks.t);
    Ok(VectorFamily::new(spec.space()?, atoms, spec.exponents.q.0)?)
}

/// `K = T C` with `rank C = k`, or a generic rank-`k` `K` when adversarial.
fn operator(rng: &mut Rng, spec: &InstanceSpec, family: &VectorFamily) -> Result<LinearMap, SpecError> {
    let Dims { d, m, .. } = spec.dims;
    let km = if spec.adversarial {
        random::with_rank(rng, d, d, spec.ranks.k)
    } else {
        family.atoms() * random::with_rank(rng, m, d, spec.ranks.k)
    };
    endo(*family.space(), km)
}

/// Nondecreasing level sizes ending at `m`.
fn level_sizes(levels: usize, m: usize) -> Vec<usize> {
    (1..=levels).map(|n| (n * m).div_ceil(levels)).collect()
}

pub fn generate(spec: &InstanceSpec) -> Result<Generated, SpecError> {
    spec.validate()?;
    let mut rng = random::rng(spec.seed);
    let space = spec.space()?;
    let Dims { d, m, levels } = spec.dims;
    let q = spec.exponents.q.0;
    let inputs = match spec.scenario {
        Scenario::E3 => {
            let family = synthesis(&mut rng, spec)?;
            let k = operator(&mut rng, spec, &family)?;
            let w = LinearMap::new(space, family.coefficient_space(), random::gaussian(&mut rng, m, d))?;
            Inputs::E3 { family, k, w }
        }
        Scenario::E4 => {
            let sizes = level_sizes(levels, m);
            let mut mats: Vec<DMatrix<f64>> = sizes[..levels - 1]
                .iter()
                .map(|&s| random::gaussian(&mut rng, s, d))
                .collect();
            let s = random::with_rank(&mut rng, m, d, spec.ranks.t);
            let b = random::gaussian(&mut rng, d, m);
            let k = endo(space, &b * &s)?;
            mats.push(s);
            let functionals = TriangularFunctionalFamily::new(space, mats)?;
            let w = LinearMap::new(PNormSpace::new(m, q)?, space, random::gaussian(&mut rng, d, m))?;
            Inputs::E4 { functionals, k, w }
        }
        Scenario::Converse => {
            let family = synthesis(&mut rng, spec)?;
            let k = operator(&mut rng, spec, &family)?;
            Inputs::Converse { family, k }
        }
        Scenario::Characterize => {
            let family = synthesis(&mut rng, spec)?;
            let onto = if spec.adversarial {
                random::orthonormal(&mut rng, d, spec.ranks.k)
            } else {
                let range = dense::range_basis(family.atoms(), RANK_RTOL);
                &range * random::orthonormal(&mut rng, range.ncols(), spec.ranks.k)
            };
            let projection = endo(space, random::projection_onto(&mut rng, &onto))?;
            Inputs::Characterize { family, projection }
        }
        Scenario::Complemented => {
            let family = synthesis(&mut rng, spec)?;
            let functionals = atomkit_core::atomic::construct_from_bessel(
                &family,
                &LinearMap::identity(space),
                None,
                atomkit_core::atomic::DEFAULT_TOL,
            )?;
            let projection = endo(space, random::projection(&mut rng, d, spec.ranks.k))?;
            Inputs::Complemented {
                family,
                functionals,
                projection,
            }
        }
        Scenario::ShiftExample => Inputs::Shift {
            family: VectorFamily::shift_example(d)?,
        },
        Scenario::EmbedClassical => {
            let family = synthesis(&mut rng, spec)?;
            let classical = random::gaussian(&mut rng, m, d);
            let k = endo(space, family.atoms() * &classical)?;
            let functionals = embed_classical(space, &classical)?;
            let candidate = AtomicSystemCandidate::new(family, functionals, k, spec.norm())?;
            Inputs::Embed { candidate, classical }
        }
        Scenario::Kframe => {
            let family = synthesis(&mut rng, spec)?;
            let k = operator(&mut rng, spec, &family)?;
            Inputs::Kframe { family, k }
        }
    };
    Ok(Generated {
        spec: *spec,
        expected: !spec.adversarial,
        inputs,
    })
}

impl Generated {
    /// The input as the document consumed by the matching CLI verb.
    pub fn to_document(&self) -> String {
        let norm = NormDto::from_config(&self.spec.norm());
        match &self.inputs {
            Inputs::E3 { family, k, w } => io::to_string(&ConstructionDto {
                family: Some(FamilyDto::from_family(family)),
                functionals: None,
                operator: MapDto::from_map(k),
                w: Some(MapDto::from_map(w)),
                norm,
            }),
            Inputs::E4 { functionals, k, w } => io::to_string(&ConstructionDto {
                family: None,
                functionals: Some(FunctionalsDto::from_family(functionals)),
                operator: MapDto::from_map(k),
                w: Some(MapDto::from_map(w)),
                norm,
            }),
            Inputs::Converse { family, k } => io::to_string(&ConstructionDto {
                family: Some(FamilyDto::from_family(family)),
                functionals: None,
                operator: MapDto::from_map(k),
                w: None,
                norm,
            }),
            Inputs::Characterize { family, projection } => io::to_string(&CharacterizeDto {
                family: FamilyDto::from_family(family),
                projection: MapDto::from_map(projection),
                functionals: None,
                norm,
            }),
            Inputs::Complemented {
                family,
                functionals,
                projection,
            } => io::to_string(&ComplementedDto {
                family: FamilyDto::from_family(family),
                functionals: FunctionalsDto::from_family(functionals),
                projection: MapDto::from_map(projection),
                norm,
            }),
            Inputs::Shift { family } => io::to_string(&FamilyDto::from_family(family)),
            Inputs::Embed { candidate, .. } => io::to_string(&CandidateDto::from_candidate(candidate)),
            Inputs::Kframe { family, k } => io::to_string(&KFrameDto {
                family: FamilyDto::from_family(family),
                operator: MapDto::from_map(k),
            }),
        }
    }
}
