//! Simulated training streams driven through validate → learn → update.
//!
//! Three scenarios are bundled:
//!
//! - `minors`: persons of random age labelled `Minor` or `LegalAdult`
//!   according to a moving age threshold (adaptor `X1`);
//! - `parents`: parents labelled `BusyParent` or `RelaxedParent` according to
//!   a moving child count (adaptor `X2`);
//! - `geo`: city centres, places and distances read from JSON fixtures
//!   (adaptors `C` and `D`).
//!
//! All randomness comes from one [`ChaCha8Rng`] seeded from the config.

mod geo;

use std::str::FromStr;

use log::info;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::parse_ontology;
use crate::learning::{learn, LearningParams};
use crate::model::{Axiom, Concept, Ontology};
use crate::updater::apply_updates;
use crate::validation::validate;

pub use geo::{
    generate_geo_fixtures, geo_targets, load_geo_fixtures, Distance, GeoFixture, GeoTargets,
    GeoWorld, Place,
};

pub const PERSONS_ONTOLOGY: &str = include_str!("../../data/persons.vago");
pub const GEO_ONTOLOGY: &str = include_str!("../../data/geo.vago");

/// Youngest and oldest generated age.
pub const AGE_RANGE: (u32, u32) = (1, 40);

pub fn persons_ontology() -> Ontology {
    parse_ontology(PERSONS_ONTOLOGY)
        .expect("bundled persons ontology parses")
        .ontology
}

pub fn geo_ontology() -> Ontology {
    parse_ontology(GEO_ONTOLOGY)
        .expect("bundled geo ontology parses")
        .ontology
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    Minors,
    Parents,
    Geo,
}

impl Scenario {
    /// The adaptors whose values are recorded.
    pub fn adaptors(self) -> &'static [&'static str] {
        match self {
            Scenario::Minors => &["X1"],
            Scenario::Parents => &["X2"],
            Scenario::Geo => &["C", "D"],
        }
    }

    pub fn default_schedule(self) -> Vec<(usize, f64)> {
        match self {
            Scenario::Minors => vec![(1, 18.0), (11, 25.0), (21, 15.0), (31, 20.0)],
            Scenario::Parents => vec![(1, 3.0), (11, 5.0), (21, 6.0), (31, 4.0)],
            Scenario::Geo => Vec::new(),
        }
    }

    pub fn default_per_iteration(self) -> usize {
        match self {
            Scenario::Minors => 30,
            Scenario::Parents => 20,
            Scenario::Geo => 1,
        }
    }

    pub fn default_iterations(self) -> usize {
        match self {
            Scenario::Minors | Scenario::Parents => 40,
            Scenario::Geo => 30,
        }
    }

    pub fn ontology(self) -> Ontology {
        match self {
            Scenario::Minors | Scenario::Parents => persons_ontology(),
            Scenario::Geo => geo_ontology(),
        }
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Scenario> {
        match s {
            "minors" => Ok(Scenario::Minors),
            "parents" => Ok(Scenario::Parents),
            "geo" => Ok(Scenario::Geo),
            other => Err(Error::Config(format!(
                "unknown scenario `{other}` (expected minors, parents or geo)"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimulationConfig {
    pub scenario: Scenario,
    pub iterations: usize,
    pub seed: u64,
    /// Individuals per training set (persons, or parents split evenly
    /// between busy and relaxed). Unused by `geo`.
    pub per_iteration: usize,
    /// `(first iteration, target)` pairs for the scenario's adaptor.
    pub schedule: Vec<(usize, f64)>,
    /// Probability of flipping a generated label.
    pub noise_rate: f64,
    pub params: LearningParams,
    /// One fixture per iteration, for `geo`.
    pub fixtures: Vec<GeoFixture>,
}

impl SimulationConfig {
    pub fn new(scenario: Scenario, seed: u64) -> SimulationConfig {
        SimulationConfig {
            scenario,
            iterations: scenario.default_iterations(),
            seed,
            per_iteration: scenario.default_per_iteration(),
            schedule: scenario.default_schedule(),
            noise_rate: 0.0,
            params: LearningParams::default(),
            fixtures: Vec::new(),
        }
    }

    pub fn check(&self) -> Result<()> {
        self.params.check()?;
        if self.iterations == 0 {
            return Err(Error::Config("iterations must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.noise_rate) {
            return Err(Error::Config(format!(
                "noise rate must lie in [0, 1), got {}",
                self.noise_rate
            )));
        }
        match self.scenario {
            Scenario::Geo => {
                if self.fixtures.len() < self.iterations {
                    return Err(Error::Config(format!(
                        "{} iterations need as many fixtures, found {}",
                        self.iterations,
                        self.fixtures.len()
                    )));
                }
            }
            Scenario::Minors | Scenario::Parents => {
                if self.per_iteration == 0 {
                    return Err(Error::Config("per-iteration count must be positive".into()));
                }
                let Some(&(first, _)) = self.schedule.first() else {
                    return Err(Error::Config("the target schedule is empty".into()));
                };
                if first != 1 || self.schedule.windows(2).any(|w| w[0].0 >= w[1].0) {
                    return Err(Error::Config(
                        "schedule start iterations must increase strictly from 1".into(),
                    ));
                }
                for &(_, target) in &self.schedule {
                    if target < 1.0 || target.fract() != 0.0 {
                        return Err(Error::Config(format!(
                            "targets must be positive integers, got {target}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Target in force at `iteration` (1-based).
    pub fn target_at(&self, iteration: usize) -> Option<f64> {
        self.schedule
            .iter()
            .take_while(|(start, _)| *start <= iteration)
            .last()
            .map(|(_, t)| *t)
    }

    /// Description of the random source, for trajectory headers.
    pub fn rng_label(&self) -> String {
        format!("ChaCha8Rng seed={}", self.seed)
    }
}

/// Parses `start:target,start:target,...`.
pub fn parse_schedule(spec: &str) -> Result<Vec<(usize, f64)>> {
    spec.split(',')
        .map(|part| {
            let (start, target) = part.trim().split_once(':').ok_or_else(|| {
                Error::Config(format!("schedule entry `{part}` is not start:target"))
            })?;
            let start = start
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad start iteration in `{part}`")))?;
            let target = target
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad target in `{part}`")))?;
            Ok((start, target))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub iteration: usize,
    pub adaptor: String,
    pub value: f64,
    pub target: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Simulation {
    pub trajectory: Vec<TrajectoryPoint>,
    pub ontology: Ontology,
}

fn member(concept: &str, individual: &str) -> Axiom {
    Axiom::ConceptAssertion {
        concept: Concept::atomic(concept),
        individual: individual.into(),
    }
}

/// `n` persons with ages uniform in [`AGE_RANGE`], labelled `Minor` below
/// `target` and `LegalAdult` otherwise. Per person the age is drawn first,
/// then a uniform number in [0, 1) that flips the label if below
/// `noise_rate`.
pub fn gen_minors_training(
    target: u32,
    n: usize,
    noise_rate: f64,
    rng: &mut impl Rng,
) -> Vec<Axiom> {
    let mut out = Vec::with_capacity(3 * n);
    for i in 0..n {
        let age = rng.gen_range(AGE_RANGE.0..=AGE_RANGE.1);
        let flip = rng.gen::<f64>() < noise_rate;
        let minor = (age < target) != flip;
        let name = format!("person{i}");
        out.push(member("Person", &name));
        out.push(member(if minor { "Minor" } else { "LegalAdult" }, &name));
        out.push(Axiom::DataAssertion {
            property: "hasAge".into(),
            individual: name,
            value: age as f64,
        });
    }
    out
}

/// Busy parents with `target..=target+2` young children and relaxed
/// parents with `1..target` of them. Per parent the child count is drawn
/// first, then the label-flip number.
pub fn gen_parents_training(
    target: u32,
    n_busy: usize,
    n_relaxed: usize,
    noise_rate: f64,
    rng: &mut impl Rng,
) -> Result<Vec<Axiom>> {
    if target < 2 {
        return Err(Error::Config(format!(
            "a child-count target of {target} leaves no room for relaxed parents"
        )));
    }
    let mut out = Vec::new();
    let groups = [
        ("busy", n_busy, target..=target + 2),
        ("relaxed", n_relaxed, 1..=target - 1),
    ];
    for (prefix, count, children) in groups {
        for i in 0..count {
            let kids = rng.gen_range(children.clone());
            let flip = rng.gen::<f64>() < noise_rate;
            let busy = (prefix == "busy") != flip;
            let parent = format!("{prefix}{i}");
            out.push(member("Person", &parent));
            out.push(member(
                if busy { "BusyParent" } else { "RelaxedParent" },
                &parent,
            ));
            for j in 0..kids {
                let child = format!("{parent}c{j}");
                out.push(Axiom::RoleAssertion {
                    role: "parentOf".into(),
                    subject: parent.clone(),
                    object: child.clone(),
                });
                out.push(member("Minor", &child));
            }
        }
    }
    Ok(out)
}

/// Runs `config.iterations` rounds of validate → learn → update starting
/// from `original`, recording the scenario's adaptors after each round.
pub fn run_simulation(original: &Ontology, config: &SimulationConfig) -> Result<Simulation> {
    config.check()?;
    for id in config.scenario.adaptors() {
        if original.adaptor(id).is_none() {
            return Err(Error::UnknownAdaptor(id.to_string()));
        }
    }
    let geo_targets = match config.scenario {
        Scenario::Geo => Some(geo_targets(&config.fixtures[..config.iterations])),
        _ => None,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut ontology = original.clone();
    let mut trajectory = Vec::with_capacity(config.iterations * config.scenario.adaptors().len());

    for iteration in 1..=config.iterations {
        let target = config.target_at(iteration);
        let training = match config.scenario {
            Scenario::Minors => gen_minors_training(
                target.unwrap_or_default() as u32,
                config.per_iteration,
                config.noise_rate,
                &mut rng,
            ),
            Scenario::Parents => {
                let busy = config.per_iteration / 2;
                gen_parents_training(
                    target.unwrap_or_default() as u32,
                    busy,
                    config.per_iteration - busy,
                    config.noise_rate,
                    &mut rng,
                )?
            }
            Scenario::Geo => config.fixtures[iteration - 1].training(),
        };
        let feedback = validate(&ontology, &training)?;
        let learned = learn(&feedback, &ontology, &config.params)?;
        let (next, records) = apply_updates(&ontology, &learned)?;
        ontology = next;
        info!(
            "iteration {iteration}: {} feedback objects, {} updates",
            feedback.len(),
            records.len()
        );

        for &id in config.scenario.adaptors() {
            let target = match (&geo_targets, id) {
                (Some(t), "C") => Some(t.c),
                (Some(t), "D") => Some(t.d),
                (Some(_), _) => None,
                (None, _) => target,
            };
            trajectory.push(TrajectoryPoint {
                iteration,
                adaptor: id.to_string(),
                value: ontology.adaptor(id).expect("checked above").current,
                target,
            });
        }
    }
    Ok(Simulation {
        trajectory,
        ontology,
    })
}
