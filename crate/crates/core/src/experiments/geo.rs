//! Geo fixtures: one city centre, nearby places, and measured distances,
//! some of which a human has labelled as close.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Axiom, Concept};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Place {
    pub id: String,
    pub bookshop: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Distance {
    pub a: String,
    pub b: String,
    pub meters: u64,
    /// Labelled as a close distance.
    pub close: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeoFixture {
    pub city: String,
    pub places: Vec<Place>,
    pub distances: Vec<Distance>,
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    chars
        .next()
        .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

impl GeoFixture {
    /// Schema checks beyond what deserialization enforces. Errors name the
    /// offending JSON path.
    pub fn check(&self) -> std::result::Result<(), String> {
        if !is_identifier(&self.city) {
            return Err(format!("city: `{}` is not a valid name", self.city));
        }
        let mut known: HashSet<&str> = HashSet::from([self.city.as_str()]);
        for (i, p) in self.places.iter().enumerate() {
            if !is_identifier(&p.id) {
                return Err(format!("places[{i}].id: `{}` is not a valid name", p.id));
            }
            if !known.insert(&p.id) {
                return Err(format!("places[{i}].id: `{}` is not unique", p.id));
            }
        }
        for (i, d) in self.distances.iter().enumerate() {
            for (field, end) in [("a", &d.a), ("b", &d.b)] {
                if !known.contains(end.as_str()) {
                    return Err(format!("distances[{i}].{field}: unknown place `{end}`"));
                }
            }
            if d.a == d.b {
                return Err(format!("distances[{i}]: both ends are `{}`", d.a));
            }
        }
        Ok(())
    }

    fn distance_name(&self, index: usize) -> String {
        format!("{}_dist{index}", self.city)
    }

    /// Training axioms: the city is a profitable place, bookshops are
    /// bookshops, and every distance is an individual linked to both ends.
    pub fn training(&self) -> Vec<Axiom> {
        let member = |c: &str, i: &str| Axiom::ConceptAssertion {
            concept: Concept::atomic(c),
            individual: i.to_string(),
        };
        let edge = |r: &str, s: &str, o: &str| Axiom::RoleAssertion {
            role: r.into(),
            subject: s.into(),
            object: o.into(),
        };
        let mut out = vec![
            member("ProfitablePlace", &self.city),
            member("SpatialThing", &self.city),
        ];
        for p in &self.places {
            out.push(member("SpatialThing", &p.id));
            if p.bookshop {
                out.push(member("Bookshop", &p.id));
            }
        }
        for (k, d) in self.distances.iter().enumerate() {
            let name = self.distance_name(k);
            out.push(member("Distance", &name));
            out.push(edge("distBetween", &name, &d.a));
            out.push(edge("distBetween", &name, &d.b));
            out.push(Axiom::DataAssertion {
                property: "distMeasure".into(),
                individual: name.clone(),
                value: d.meters as f64,
            });
            out.push(edge("hasDistance", &d.a, &name));
            out.push(edge("hasDistance", &d.b, &name));
            if d.close {
                out.push(member("CloseDistance", &name));
            }
        }
        out
    }

    /// Bookshops at a labelled close distance from the city centre.
    pub fn close_bookshops(&self) -> usize {
        let shops: HashSet<&str> = self
            .places
            .iter()
            .filter(|p| p.bookshop)
            .map(|p| p.id.as_str())
            .collect();
        self.distances
            .iter()
            .filter(|d| d.close)
            .filter(|d| {
                (d.a == self.city && shops.contains(d.b.as_str()))
                    || (d.b == self.city && shops.contains(d.a.as_str()))
            })
            .count()
    }
}

/// Reads every `*.json` file in `dir`, in file-name order.
pub fn load_geo_fixtures(dir: &Path) -> Result<Vec<GeoFixture>> {
    let fixture_error = |path: &Path, message: String| Error::Fixture {
        path: path.to_path_buf(),
        message,
    };
    let entries = fs::read_dir(dir).map_err(|e| fixture_error(dir, e.to_string()))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(fixture_error(dir, "no JSON fixtures found".into()));
    }
    let mut out = Vec::with_capacity(paths.len());
    for path in paths {
        let text = fs::read_to_string(&path).map_err(|e| fixture_error(&path, e.to_string()))?;
        let fixture: GeoFixture =
            serde_json::from_str(&text).map_err(|e| fixture_error(&path, e.to_string()))?;
        fixture.check().map_err(|m| fixture_error(&path, m))?;
        out.push(fixture);
    }
    Ok(out)
}

/// Reference values computed from the fixtures: mean plus (population)
/// standard deviation of close-bookshop counts per city, and of all
/// labelled close distances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeoTargets {
    pub c: f64,
    pub d: f64,
    pub c_mean: f64,
    pub c_std: f64,
    pub d_mean: f64,
    pub d_std: f64,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

pub fn geo_targets(fixtures: &[GeoFixture]) -> GeoTargets {
    let counts: Vec<f64> = fixtures
        .iter()
        .map(|f| f.close_bookshops() as f64)
        .collect();
    let close: Vec<f64> = fixtures
        .iter()
        .flat_map(|f| {
            f.distances
                .iter()
                .filter(|d| d.close)
                .map(|d| d.meters as f64)
        })
        .collect();
    let (c_mean, c_std) = mean_std(&counts);
    let (d_mean, d_std) = mean_std(&close);
    GeoTargets {
        c: c_mean + c_std,
        d: d_mean + d_std,
        c_mean,
        c_std,
        d_mean,
        d_std,
    }
}

/// Parameters of the synthetic world behind the bundled fixtures.
///
/// Every city has a handful of places around its centre, some of them
/// bookshops. Distances from the centre to each place are drawn
/// log-uniformly; a labeller marks as close those within a per-city
/// tolerance. A few pairs of places far apart are mislabelled as close.
#[derive(Debug, Clone, PartialEq)]
pub struct GeoWorld {
    pub cities: usize,
    pub places: (usize, usize),
    pub bookshop_rate: f64,
    /// Range of centre-to-place distances, in meters.
    pub spread: (f64, f64),
    /// Range of the labeller's closeness tolerance, in meters.
    pub tolerance: (f64, f64),
    /// Extra place-to-place distances per city.
    pub cross_links: usize,
    /// Chance that a city carries one far distance wrongly labelled close.
    pub mislabel_rate: f64,
    /// Range of mislabelled distances, in meters.
    pub far: (f64, f64),
}

impl Default for GeoWorld {
    fn default() -> Self {
        GeoWorld {
            cities: 30,
            places: (10, 16),
            bookshop_rate: 0.15,
            spread: (60.0, 6000.0),
            tolerance: (1250.0, 1400.0),
            cross_links: 16,
            mislabel_rate: 0.1,
            far: (10_500.0, 14_000.0),
        }
    }
}

/// Draws `world.cities` fixtures. The RNG is consumed city by city: place
/// count, tolerance, then per place the bookshop flag and distance, then
/// the cross links, then the mislabel draw.
pub fn generate_geo_fixtures(world: &GeoWorld, seed: u64) -> Vec<GeoFixture> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let log_uniform = |rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)| -> u64 {
        (lo.ln() + rng.gen::<f64>() * (hi.ln() - lo.ln()))
            .exp()
            .round() as u64
    };
    (1..=world.cities)
        .map(|c| {
            let city = format!("city{c:02}");
            let n = rng.gen_range(world.places.0..=world.places.1);
            let tolerance = rng.gen_range(world.tolerance.0..=world.tolerance.1);
            let mut places = Vec::with_capacity(n);
            let mut distances = Vec::new();
            for p in 0..n {
                let id = format!("{city}_place{p}");
                let bookshop = rng.gen::<f64>() < world.bookshop_rate;
                let meters = log_uniform(&mut rng, world.spread);
                distances.push(Distance {
                    a: city.clone(),
                    b: id.clone(),
                    meters,
                    close: meters as f64 <= tolerance,
                });
                places.push(Place { id, bookshop });
            }
            for _ in 0..world.cross_links.min(n * (n - 1) / 2) {
                let a = rng.gen_range(0..n);
                let b = (a + rng.gen_range(1..n)) % n;
                let meters = log_uniform(&mut rng, world.spread);
                distances.push(Distance {
                    a: places[a].id.clone(),
                    b: places[b].id.clone(),
                    meters,
                    close: meters as f64 <= tolerance,
                });
            }
            if rng.gen::<f64>() < world.mislabel_rate {
                let a = rng.gen_range(0..n);
                let b = (a + rng.gen_range(1..n)) % n;
                distances.push(Distance {
                    a: places[a].id.clone(),
                    b: places[b].id.clone(),
                    meters: rng.gen_range(world.far.0..=world.far.1).round() as u64,
                    close: true,
                });
            }
            GeoFixture {
                city,
                places,
                distances,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> GeoFixture {
        GeoFixture {
            city: "york".into(),
            places: vec![
                Place {
                    id: "shop".into(),
                    bookshop: true,
                },
                Place {
                    id: "far".into(),
                    bookshop: false,
                },
            ],
            distances: vec![
                Distance {
                    a: "york".into(),
                    b: "shop".into(),
                    meters: 900,
                    close: true,
                },
                Distance {
                    a: "shop".into(),
                    b: "far".into(),
                    meters: 12_000,
                    close: true,
                },
            ],
        }
    }

    #[test]
    fn distances_pass_through() {
        let axioms = tiny().training();
        assert!(axioms.contains(&Axiom::DataAssertion {
            property: "distMeasure".into(),
            individual: "york_dist0".into(),
            value: 900.0,
        }));
        assert!(axioms.contains(&Axiom::DataAssertion {
            property: "distMeasure".into(),
            individual: "york_dist1".into(),
            value: 12_000.0,
        }));
        assert_eq!(tiny().close_bookshops(), 1);
    }

    #[test]
    fn schema_problems_name_the_path() {
        let mut f = tiny();
        f.distances[1].b = "nowhere".into();
        assert_eq!(
            f.check().unwrap_err(),
            "distances[1].b: unknown place `nowhere`"
        );
        let mut f = tiny();
        f.places[1].id = "shop".into();
        assert!(f.check().unwrap_err().starts_with("places[1].id"));
    }

    #[test]
    fn empty_directory_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            load_geo_fixtures(dir.path()),
            Err(Error::Fixture { .. })
        ));
    }

    #[test]
    fn fixtures_round_trip_through_files() {
        let dir = tempfile::tempdir().unwrap();
        let fixtures = generate_geo_fixtures(&GeoWorld::default(), 5);
        for (i, f) in fixtures.iter().enumerate() {
            let path = dir.path().join(format!("{i:02}.json"));
            fs::write(path, serde_json::to_string(f).unwrap()).unwrap();
        }
        assert_eq!(load_geo_fixtures(dir.path()).unwrap(), fixtures);
        fs::write(dir.path().join("99.json"), r#"{"city": "x"}"#).unwrap();
        let err = load_geo_fixtures(dir.path()).unwrap_err();
        assert!(err.to_string().contains("99.json"));
    }

    #[test]
    fn targets_are_mean_plus_std() {
        let t = geo_targets(&[tiny()]);
        assert_eq!(t.c, 1.0);
        assert_eq!(t.d_mean, 6450.0);
        assert_eq!(t.d_std, 5550.0);
        assert_eq!(t.d, 12_000.0);
    }
}
