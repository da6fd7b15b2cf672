use serde::{Deserialize, Serialize};
use std::path::Path;

use super::SceneError;

/// Closed integer range, serialized as `[min, max]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "[u32; 2]", into = "[u32; 2]")]
pub struct CountRange {
    pub min: u32,
    pub max: u32,
}

impl CountRange {
    pub const fn new(min: u32, max: u32) -> Self {
        CountRange { min, max }
    }

    pub const fn exactly(n: u32) -> Self {
        CountRange { min: n, max: n }
    }

    pub fn contains(&self, n: u32) -> bool {
        self.min <= n && n <= self.max
    }
}

impl From<[u32; 2]> for CountRange {
    fn from([min, max]: [u32; 2]) -> Self {
        CountRange { min, max }
    }
}

impl From<CountRange> for [u32; 2] {
    fn from(r: CountRange) -> Self {
        [r.min, r.max]
    }
}

impl std::str::FromStr for CountRange {
    type Err = String;

    /// Accepts `n` or `min,max` (also `min..max` / `min-max`).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s
            .split(|c| c == ',' || c == '-' || c == ':')
            .filter(|p| !p.is_empty())
            .collect();
        let parse = |p: &str| p.trim().parse::<u32>().map_err(|e| format!("{p:?}: {e}"));
        match parts.as_slice() {
            [n] => Ok(CountRange::exactly(parse(n)?)),
            [a, b] => Ok(CountRange::new(parse(a)?, parse(b)?)),
            _ => Err(format!("expected `n` or `min,max`, got {s:?}")),
        }
    }
}

/// Per-entity and per-interaction `[min, max]` counts for scene generation.
///
/// Interactions consume entities: a talking pair uses two static humans, a
/// laptop interaction one static human and one laptop, a walking group two
/// walkers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerationRanges {
    pub humans_static: CountRange,
    pub humans_walking: CountRange,
    pub tables: CountRange,
    pub laptops: CountRange,
    pub plants: CountRange,
    pub human_human_talking: CountRange,
    pub human_laptop_interaction: CountRange,
    pub walking_groups: CountRange,
}

impl Default for GenerationRanges {
    fn default() -> Self {
        GenerationRanges {
            humans_static: CountRange::new(1, 4),
            humans_walking: CountRange::new(0, 3),
            tables: CountRange::new(0, 2),
            laptops: CountRange::new(0, 2),
            plants: CountRange::new(0, 2),
            human_human_talking: CountRange::new(0, 1),
            human_laptop_interaction: CountRange::new(0, 1),
            walking_groups: CountRange::new(0, 1),
        }
    }
}

impl GenerationRanges {
    /// A range set that produces no entities at all.
    pub fn empty() -> Self {
        let zero = CountRange::exactly(0);
        GenerationRanges {
            humans_static: zero,
            humans_walking: zero,
            tables: zero,
            laptops: zero,
            plants: zero,
            human_human_talking: zero,
            human_laptop_interaction: zero,
            walking_groups: zero,
        }
    }

    pub fn entries(&self) -> [(&'static str, CountRange); 8] {
        [
            ("humans_static", self.humans_static),
            ("humans_walking", self.humans_walking),
            ("tables", self.tables),
            ("laptops", self.laptops),
            ("plants", self.plants),
            ("human_human_talking", self.human_human_talking),
            ("human_laptop_interaction", self.human_laptop_interaction),
            ("walking_groups", self.walking_groups),
        ]
    }

    pub fn validate(&self) -> Result<(), SceneError> {
        for (name, r) in self.entries() {
            if r.min > r.max {
                return Err(SceneError::InvalidRanges(format!(
                    "{name}: min {} exceeds max {}",
                    r.min, r.max
                )));
            }
        }
        let need_static = 2 * self.human_human_talking.min + self.human_laptop_interaction.min;
        if need_static > self.humans_static.max {
            return Err(SceneError::InvalidRanges(format!(
                "human_human_talking/human_laptop_interaction need at least {need_static} static humans, humans_static.max is {}",
                self.humans_static.max
            )));
        }
        if self.human_laptop_interaction.min > self.laptops.max {
            return Err(SceneError::InvalidRanges(format!(
                "human_laptop_interaction.min {} exceeds laptops.max {}",
                self.human_laptop_interaction.min, self.laptops.max
            )));
        }
        if 2 * self.walking_groups.min > self.humans_walking.max {
            return Err(SceneError::InvalidRanges(format!(
                "walking_groups.min {} needs {} walkers, humans_walking.max is {}",
                self.walking_groups.min,
                2 * self.walking_groups.min,
                self.humans_walking.max
            )));
        }
        Ok(())
    }

    /// Read a ranges file: TOML (`humans_static = [1, 4]`) or, for a `.json`
    /// extension, a JSON object of the same shape. Missing keys keep their
    /// defaults.
    pub fn from_file(path: &Path) -> Result<Self, SceneError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SceneError::Config(format!("{}: {e}", path.display())))?;
        let ranges: GenerationRanges = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text)
                .map_err(|e| SceneError::Config(format!("{}: {e}", path.display())))?
        } else {
            toml::from_str(&text)
                .map_err(|e| SceneError::Config(format!("{}: {e}", path.display())))?
        };
        ranges.validate()?;
        Ok(ranges)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laptop_interaction_without_laptops_is_rejected() {
        let ranges = GenerationRanges {
            laptops: CountRange::exactly(0),
            human_laptop_interaction: CountRange::exactly(1),
            ..GenerationRanges::default()
        };
        let err = ranges.validate().unwrap_err().to_string();
        assert!(err.contains("laptops.max"), "{err}");
    }

    #[test]
    fn inverted_range_names_the_key() {
        let ranges = GenerationRanges {
            tables: CountRange::new(3, 1),
            ..GenerationRanges::default()
        };
        assert!(ranges.validate().unwrap_err().to_string().contains("tables"));
    }

    #[test]
    fn toml_and_json_files() {
        let dir = tempfile::tempdir().unwrap();
        let toml_path = dir.path().join("ranges.toml");
        std::fs::write(&toml_path, "humans_walking = [1, 3]\nplants = [2, 2]\n").unwrap();
        let r = GenerationRanges::from_file(&toml_path).unwrap();
        assert_eq!(r.humans_walking, CountRange::new(1, 3));
        assert_eq!(r.plants, CountRange::exactly(2));
        assert_eq!(r.tables, GenerationRanges::default().tables);

        let json_path = dir.path().join("ranges.json");
        std::fs::write(&json_path, r#"{"tables": [1, 1]}"#).unwrap();
        assert_eq!(GenerationRanges::from_file(&json_path).unwrap().tables, CountRange::exactly(1));

        std::fs::write(&json_path, r#"{"chairs": [1, 1]}"#).unwrap();
        assert!(GenerationRanges::from_file(&json_path).is_err());
    }

    #[test]
    fn parse_flag_values() {
        assert_eq!("2".parse::<CountRange>().unwrap(), CountRange::exactly(2));
        assert_eq!("1,3".parse::<CountRange>().unwrap(), CountRange::new(1, 3));
        assert!("a,b".parse::<CountRange>().is_err());
    }
}
