//! Sequence serialization for generative training.
//!
//! Inputs are the sentence followed by every category phrase of the
//! inventory. Targets render each quad as `<category> of <aspect> is
//! <opinion> and <sentiment word>`, with `something` standing in for an
//! implicit aspect and the `<opinion> and` part dropped for an implicit
//! opinion; quads are joined by ` [SSEP] `. [`parse_target`] inverts the
//! rendering, reading sentiment and opinion from the right and the category
//! from a closed phrase inventory on the left.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Quad, Sample, Sentiment, Term};

pub const QUAD_SEPARATOR: &str = " [SSEP] ";
pub const DEFAULT_INPUT_SEPARATOR: &str = " | ";
pub const DEFAULT_IMPLICIT_ASPECT: &str = "something";

#[derive(Debug, Error)]
pub enum SerializeError {
    #[error("category inventory is empty")]
    EmptyInventory,
    #[error("no surface phrase for category {0:?}")]
    UnknownCategory(String),
    #[error("cannot render an empty quad list")]
    NoQuads,
    #[error("invalid surface maps: {0}")]
    InvalidMaps(String),
    #[error("cannot read surface map {path}: {message}")]
    MapFile { path: String, message: String },
}

/// Conventional phrase for a category label: lowercase, `#` and `_` as spaces.
pub fn default_surface(category: &str) -> String {
    category
        .to_lowercase()
        .replace(['#', '_'], " ")
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
}

/// User overrides for [`SurfaceMaps`], as read from a JSON file. Every field
/// is optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceOverrides {
    #[serde(default)]
    pub categories: BTreeMap<String, String>,
    #[serde(default)]
    pub sentiments: BTreeMap<Sentiment, String>,
    pub implicit_aspect: Option<String>,
    pub input_separator: Option<String>,
}

impl SurfaceOverrides {
    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self, SerializeError> {
        let path = path.as_ref();
        let map_err = |message: String| SerializeError::MapFile {
            path: path.display().to_string(),
            message,
        };
        let text = std::fs::read_to_string(path).map_err(|e| map_err(e.to_string()))?;
        serde_json::from_str(&text).map_err(|e| map_err(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceMaps {
    category_surface: BTreeMap<String, String>,
    phrase_to_category: BTreeMap<String, String>,
    /// Phrases sorted longest first, for prefix matching.
    phrases_by_length: Vec<String>,
    sentiment_words: [String; 3],
    implicit_aspect: String,
    input_separator: String,
}

impl SurfaceMaps {
    /// Default maps for `inventory`: conventional category phrases and the
    /// great / bad / ok sentiment words.
    pub fn for_inventory<S: AsRef<str>>(inventory: &[S]) -> Result<SurfaceMaps, SerializeError> {
        SurfaceMaps::with_overrides(inventory, &SurfaceOverrides::default())
    }

    pub fn with_overrides<S: AsRef<str>>(
        inventory: &[S],
        overrides: &SurfaceOverrides,
    ) -> Result<SurfaceMaps, SerializeError> {
        let invalid = |msg: String| Err(SerializeError::InvalidMaps(msg));
        let mut category_surface = BTreeMap::new();
        for category in inventory {
            let category = category.as_ref();
            let phrase = overrides
                .categories
                .get(category)
                .map(|p| p.split_whitespace().collect::<Vec<_>>().join(" "))
                .unwrap_or_else(|| default_surface(category));
            if phrase.is_empty() {
                return invalid(format!("category {category:?} has an empty phrase"));
            }
            if phrase.contains(QUAD_SEPARATOR.trim()) {
                return invalid(format!("phrase {phrase:?} contains the quad separator"));
            }
            category_surface.insert(category.to_string(), phrase);
        }
        let mut phrase_to_category = BTreeMap::new();
        for (category, phrase) in &category_surface {
            if let Some(other) = phrase_to_category.insert(phrase.clone(), category.clone()) {
                return invalid(format!(
                    "categories {other:?} and {category:?} share the phrase {phrase:?}"
                ));
            }
        }
        let mut phrases_by_length: Vec<String> = phrase_to_category.keys().cloned().collect();
        phrases_by_length.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));

        let defaults = ["great", "bad", "ok"];
        let sentiment_words: [String; 3] = std::array::from_fn(|i| {
            overrides
                .sentiments
                .get(&Sentiment::ALL[i])
                .cloned()
                .unwrap_or_else(|| defaults[i].to_string())
        });
        for word in &sentiment_words {
            if word.is_empty() || word.split_whitespace().count() != 1 || word != word.trim() {
                return invalid(format!("sentiment word {word:?} must be a single token"));
            }
        }
        let distinct: HashSet<&String> = sentiment_words.iter().collect();
        if distinct.len() != 3 {
            return invalid("sentiment words must be pairwise distinct".into());
        }
        let implicit_aspect = overrides
            .implicit_aspect
            .clone()
            .unwrap_or_else(|| DEFAULT_IMPLICIT_ASPECT.to_string());
        if implicit_aspect.trim().is_empty() {
            return invalid("implicit aspect token is empty".into());
        }
        Ok(SurfaceMaps {
            category_surface,
            phrase_to_category,
            phrases_by_length,
            sentiment_words,
            implicit_aspect,
            input_separator: overrides
                .input_separator
                .clone()
                .unwrap_or_else(|| DEFAULT_INPUT_SEPARATOR.to_string()),
        })
    }

    pub fn category_phrase(&self, category: &str) -> Option<&str> {
        self.category_surface.get(category).map(String::as_str)
    }

    pub fn sentiment_word(&self, sentiment: Sentiment) -> &str {
        let idx = Sentiment::ALL
            .iter()
            .position(|s| *s == sentiment)
            .expect("all sentiments listed");
        &self.sentiment_words[idx]
    }

    fn sentiment_of(&self, word: &str) -> Option<Sentiment> {
        self.sentiment_words
            .iter()
            .position(|w| w == word)
            .map(|i| Sentiment::ALL[i])
    }

    pub fn implicit_aspect(&self) -> &str {
        &self.implicit_aspect
    }

    pub fn input_separator(&self) -> &str {
        &self.input_separator
    }
}

/// Sentence, separator, then every inventory phrase in inventory order.
pub fn build_input<S: AsRef<str>>(
    sample: &Sample,
    inventory: &[S],
    maps: &SurfaceMaps,
) -> Result<String, SerializeError> {
    if inventory.is_empty() {
        return Err(SerializeError::EmptyInventory);
    }
    let phrases = inventory
        .iter()
        .map(|c| {
            maps.category_phrase(c.as_ref())
                .ok_or_else(|| SerializeError::UnknownCategory(c.as_ref().to_string()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(format!(
        "{}{}{}",
        sample.text(),
        maps.input_separator,
        phrases.join(", ")
    ))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetSequence {
    pub text: String,
    pub quad_count: usize,
}

pub fn build_target(quads: &[Quad], maps: &SurfaceMaps) -> Result<TargetSequence, SerializeError> {
    if quads.is_empty() {
        return Err(SerializeError::NoQuads);
    }
    let segments = quads
        .iter()
        .map(|quad| {
            let category = maps
                .category_phrase(&quad.category)
                .ok_or_else(|| SerializeError::UnknownCategory(quad.category.clone()))?;
            let aspect = quad.aspect.text().unwrap_or(maps.implicit_aspect.as_str());
            let sentiment = maps.sentiment_word(quad.sentiment);
            Ok(match quad.opinion.text() {
                Some(opinion) => format!("{category} of {aspect} is {opinion} and {sentiment}"),
                None => format!("{category} of {aspect} is {sentiment}"),
            })
        })
        .collect::<Result<Vec<_>, SerializeError>>()?;
    Ok(TargetSequence {
        text: segments.join(QUAD_SEPARATOR),
        quad_count: quads.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub segment: usize,
    pub text: String,
    pub reason: String,
}

/// Recovered quads (deduplicated, first occurrence kept) and one diagnostic
/// per segment that could not be parsed.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedTarget {
    pub quads: Vec<Quad>,
    pub diagnostics: Vec<Diagnostic>,
    pub segments: usize,
}

pub fn parse_target(text: &str, maps: &SurfaceMaps) -> ParsedTarget {
    let mut parsed = ParsedTarget::default();
    for (idx, segment) in text.split(QUAD_SEPARATOR).enumerate() {
        parsed.segments += 1;
        match parse_segment(segment.trim(), maps) {
            Ok(quad) => {
                if !parsed.quads.contains(&quad) {
                    parsed.quads.push(quad);
                }
            }
            Err(reason) => parsed.diagnostics.push(Diagnostic {
                segment: idx,
                text: segment.to_string(),
                reason: reason.to_string(),
            }),
        }
    }
    parsed
}

fn parse_segment(segment: &str, maps: &SurfaceMaps) -> Result<Quad, &'static str> {
    // sentiment, and with it the explicit or implicit opinion form
    let explicit = segment
        .rsplit_once(" and ")
        .and_then(|(rest, word)| maps.sentiment_of(word).map(|s| (rest, s)));
    let (head, opinion, sentiment) = match explicit {
        Some((rest, sentiment)) => {
            let (head, opinion) = rest.rsplit_once(" is ").ok_or("no ' is ' before the opinion")?;
            let opinion = Term::explicit(opinion).ok_or("empty opinion")?;
            (head, opinion, sentiment)
        }
        None => {
            let (head, word) = segment.rsplit_once(" is ").ok_or("no sentiment word found")?;
            let sentiment = maps.sentiment_of(word).ok_or("no sentiment word found")?;
            (head, Term::Implicit, sentiment)
        }
    };
    let (category, aspect) = maps
        .phrases_by_length
        .iter()
        .find_map(|phrase| {
            head.strip_prefix(phrase.as_str())
                .and_then(|rest| rest.strip_prefix(" of "))
                .map(|aspect| (phrase, aspect))
        })
        .ok_or("no known category phrase followed by ' of '")?;
    let aspect = if aspect == maps.implicit_aspect {
        Term::Implicit
    } else {
        Term::explicit(aspect).ok_or("empty aspect")?
    };
    Ok(Quad::new(
        aspect,
        opinion,
        maps.phrase_to_category[category].clone(),
        sentiment,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Provenance;

    fn t(s: &str) -> Term {
        Term::explicit(s).unwrap()
    }

    fn maps() -> SurfaceMaps {
        SurfaceMaps::for_inventory(&["food prices", "service general", "ambience general"]).unwrap()
    }

    #[test]
    fn input_appends_inventory() {
        let sample = Sample::new(
            "1",
            "This hamburger is over priced .",
            vec![Quad::new(
                t("hamburger"),
                t("over priced"),
                "food prices",
                Sentiment::Negative,
            )],
            Provenance::Raw,
        )
        .unwrap();
        let inventory = ["food prices", "service general"];
        let maps = SurfaceMaps::for_inventory(&inventory).unwrap();
        assert_eq!(
            build_input(&sample, &inventory, &maps).unwrap(),
            "This hamburger is over priced . | food prices, service general"
        );
        assert_eq!(
            build_input(&sample, &inventory[..1], &maps).unwrap(),
            "This hamburger is over priced . | food prices"
        );
        assert!(matches!(
            build_input::<&str>(&sample, &[], &maps),
            Err(SerializeError::EmptyInventory)
        ));
    }

    #[test]
    fn three_template_forms() {
        let m = maps();
        let render = |q: Quad| build_target(&[q], &m).unwrap().text;
        assert_eq!(
            render(Quad::new(
                t("hamburger"),
                t("over priced"),
                "food prices",
                Sentiment::Negative
            )),
            "food prices of hamburger is over priced and bad"
        );
        assert_eq!(
            render(Quad::new(
                Term::Implicit,
                t("good vibe"),
                "ambience general",
                Sentiment::Positive
            )),
            "ambience general of something is good vibe and great"
        );
        assert_eq!(
            render(Quad::new(
                t("hamburger"),
                Term::Implicit,
                "food prices",
                Sentiment::Negative
            )),
            "food prices of hamburger is bad"
        );
    }

    #[test]
    fn target_errors() {
        let m = maps();
        assert!(matches!(build_target(&[], &m), Err(SerializeError::NoQuads)));
        let q = Quad::new(t("x"), t("y"), "drinks quality", Sentiment::Neutral);
        assert!(matches!(
            build_target(&[q], &m),
            Err(SerializeError::UnknownCategory(_))
        ));
    }

    #[test]
    fn parses_implicit_opinion_form() {
        let parsed = parse_target("food prices of hamburger is bad", &maps());
        assert_eq!(
            parsed.quads,
            [Quad::new(
                t("hamburger"),
                Term::Implicit,
                "food prices",
                Sentiment::Negative
            )]
        );
        assert!(parsed.diagnostics.is_empty());
    }

    #[test]
    fn drops_malformed_segments() {
        let parsed = parse_target(
            "totally malformed [SSEP] food prices of hamburger is over priced and bad",
            &maps(),
        );
        assert_eq!(parsed.quads.len(), 1);
        assert_eq!(parsed.diagnostics.len(), 1);
        assert_eq!(parsed.diagnostics[0].segment, 0);
        assert_eq!(parsed.segments, 2);
    }

    #[test]
    fn tricky_terms_survive() {
        let m = maps();
        let quads = vec![
            Quad::new(
                t("glass of wine"),
                t("cheap and good"),
                "food prices",
                Sentiment::Positive,
            ),
            Quad::new(t("staff"), t("great"), "service general", Sentiment::Positive),
            Quad::new(Term::Implicit, Term::Implicit, "ambience general", Sentiment::Neutral),
            Quad::new(
                t("this place"),
                t("is what it is"),
                "ambience general",
                Sentiment::Neutral,
            ),
        ];
        let target = build_target(&quads, &m).unwrap();
        let parsed = parse_target(&target.text, &m);
        // the last opinion contains " is " and is split at the wrong point
        assert_eq!(parsed.quads[..3], quads[..3]);
        assert_eq!(parsed.quads.len(), 4);
        assert_ne!(parsed.quads[3], quads[3]);
    }

    #[test]
    fn longest_category_prefix_wins() {
        let m = SurfaceMaps::for_inventory(&["FOOD", "FOOD#PRICES", "FOOD#PRICES#OF#DRINKS"]).unwrap();
        let quads = vec![
            Quad::new(t("soup"), t("hot"), "FOOD", Sentiment::Positive),
            Quad::new(t("prices"), t("high"), "FOOD#PRICES", Sentiment::Negative),
            Quad::new(t("beer"), Term::Implicit, "FOOD#PRICES#OF#DRINKS", Sentiment::Neutral),
        ];
        let target = build_target(&quads, &m).unwrap();
        assert_eq!(target.text.matches("[SSEP]").count(), 2);
        let parsed = parse_target(&target.text, &m);
        assert_eq!(parsed.quads, quads);
        assert!(parsed.diagnostics.is_empty());
    }

    #[test]
    fn duplicate_segments_collapse() {
        let m = maps();
        let parsed = parse_target(
            "food prices of hamburger is bad [SSEP] food prices of hamburger is bad",
            &m,
        );
        assert_eq!(parsed.quads.len(), 1);
        assert!(parsed.diagnostics.is_empty());
    }

    #[test]
    fn maps_validation() {
        assert_eq!(default_surface("FOOD#STYLE_OPTIONS"), "food style options");
        assert!(matches!(
            SurfaceMaps::for_inventory(&["FOOD#PRICES", "food_prices"]),
            Err(SerializeError::InvalidMaps(_))
        ));
        let mut overrides = SurfaceOverrides::default();
        overrides.sentiments.insert(Sentiment::Neutral, "great".into());
        assert!(SurfaceMaps::with_overrides(&["a"], &overrides).is_err());
        let mut overrides = SurfaceOverrides::default();
        overrides.sentiments.insert(Sentiment::Neutral, "so so".into());
        assert!(SurfaceMaps::with_overrides(&["a"], &overrides).is_err());
        let mut overrides = SurfaceOverrides::default();
        overrides.categories.insert("a".into(), "  ".into());
        assert!(SurfaceMaps::with_overrides(&["a"], &overrides).is_err());
    }

    #[test]
    fn overrides_from_json() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("maps.json");
        std::fs::write(
            &path,
            r#"{"categories": {"LAPTOP#GENERAL": "laptop overall"}, "sentiments": {"neutral": "fine"}}"#,
        )
        .unwrap();
        let overrides = SurfaceOverrides::from_json_file(&path).unwrap();
        let m = SurfaceMaps::with_overrides(&["LAPTOP#GENERAL", "BATTERY#QUALITY"], &overrides).unwrap();
        assert_eq!(m.category_phrase("LAPTOP#GENERAL"), Some("laptop overall"));
        assert_eq!(m.category_phrase("BATTERY#QUALITY"), Some("battery quality"));
        assert_eq!(m.sentiment_word(Sentiment::Neutral), "fine");
        assert_eq!(m.sentiment_word(Sentiment::Positive), "great");
    }
}
