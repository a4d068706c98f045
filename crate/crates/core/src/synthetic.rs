//! Deterministic synthetic corpora with planted topic structure.
//!
//! Used by the test suites and to generate the bundled end-to-end fixture.
//! The vocabulary below consists of stemmer fixpoints that appear on neither
//! stopword list, so the planted supports survive preprocessing unchanged.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dtm::{build_matrix, build_vocabulary, DocTermMatrix, Vocabulary};
use crate::textprep::TokenizedDoc;

/// Thirty stem-stable words: six per planted topic.
pub const PLANTED_WORDS: [&str; 30] = [
    "fox", "wolf", "bear", "lynx", "deer", "hawk", // animals
    "gold", "iron", "zinc", "clay", "salt", "coal", // minerals
    "rain", "snow", "wind", "fog", "storm", "cloud", // weather
    "oak", "pine", "birch", "elm", "cedar", "fern", // plants
    "drum", "flute", "harp", "cello", "banjo", "viola", // instruments
];

pub const WORDS_PER_TOPIC: usize = 6;
pub const PLANTED_TOPICS: usize = 5;

#[derive(Debug, Clone, Copy)]
pub struct PlantedSpec {
    pub docs: usize,
    /// Mean tokens per document; actual lengths vary by +-20%.
    pub tokens_per_doc: usize,
    pub seed: u64,
}

impl Default for PlantedSpec {
    fn default() -> Self {
        PlantedSpec {
            docs: 200,
            tokens_per_doc: 50,
            seed: 20250811,
        }
    }
}

/// Term indices of one planted topic's support within [`PLANTED_WORDS`].
pub fn planted_support(topic: usize) -> std::ops::Range<usize> {
    let start = topic * WORDS_PER_TOPIC;
    start..start + WORDS_PER_TOPIC
}

/// Generates documents that each draw all tokens from a single planted
/// topic's six-word support (document d belongs to topic d mod 5).
pub fn planted_tokenized_docs(spec: &PlantedSpec) -> Vec<TokenizedDoc> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut docs = Vec::with_capacity(spec.docs);
    for d in 0..spec.docs {
        let topic = d % PLANTED_TOPICS;
        let support = planted_support(topic);
        let low = spec.tokens_per_doc * 4 / 5;
        let high = spec.tokens_per_doc * 6 / 5;
        let length = rng.random_range(low..=high);
        let tokens: Vec<String> = (0..length)
            .map(|_| PLANTED_WORDS[rng.random_range(support.clone())].to_string())
            .collect();
        docs.push(TokenizedDoc {
            id: format!("d{d:04}"),
            tokens,
        });
    }
    docs
}

/// Planted corpus as a ready document-term matrix plus its vocabulary.
pub fn planted_dtm(spec: &PlantedSpec) -> (DocTermMatrix, Vocabulary) {
    let docs = planted_tokenized_docs(spec);
    let vocab = build_vocabulary(&docs, 1).expect("planted corpus is never empty");
    let build = build_matrix(&docs, &vocab);
    (build.matrix, vocab)
}

/// Vocabulary indices covering one planted support, for recovery checks.
pub fn support_indices(vocab: &Vocabulary, topic: usize) -> Vec<usize> {
    planted_support(topic)
        .map(|w| {
            vocab
                .index_of(PLANTED_WORDS[w])
                .expect("planted word must be in vocabulary")
        })
        .collect()
}

const VENUES: [(&str, &str); 5] = [
    ("Journal of Field Ecology", "ENVI;AGRI"),
    ("Minerals Processing Letters", "ENGI;MATE"),
    ("Atmospheric Systems Review", "EART;COMP"),
    ("Forest Science Quarterly", "AGRI;ENVI"),
    ("Acoustics and Instruments", "PHYS;ARTS"),
];

fn csv_quote(field: &str) -> String {
    if field.contains(',') || field.contains('"') || field.contains('\n') {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

/// Renders the planted corpus as a bibliographic CSV export plus the
/// matching source-to-area mapping CSV.
///
/// Topic sizes are deliberately unequal (weights 6:5:4:3:2) and citation
/// counts scale with the topic, so the significance grid has occupied upper
/// cells. Abstracts interleave planted words with punctuation, numerals and
/// common English filler so the whole preprocessing pipeline is exercised.
/// A few extra rows carry blank abstracts (they must be filtered out) and
/// one row has a blank citation count (it must default to zero with a
/// warning).
pub fn planted_corpus_csv(spec: &PlantedSpec) -> (String, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ 0x5eed);

    let mut bib = String::from("Title,Abstract,Year,Cited by,Source title\n");
    for i in 0..spec.docs {
        let draw = rng.random_range(0..20u32);
        let topic = match draw {
            0..=5 => 0,
            6..=10 => 1,
            11..=14 => 2,
            15..=17 => 3,
            _ => 4,
        };
        let support = planted_support(topic);
        let low = spec.tokens_per_doc * 4 / 5;
        let high = spec.tokens_per_doc * 6 / 5;
        let length = rng.random_range(low..=high);
        let tokens: Vec<&str> = (0..length)
            .map(|_| PLANTED_WORDS[rng.random_range(support.clone())])
            .collect();

        let venue = VENUES[topic].0;
        let year = 2016 + rng.random_range(0..8);
        let citations: u64 = rng.random_range(0..20) + 15 * (PLANTED_TOPICS - topic) as u64;
        let title = format!("Field note {i:04} on {}", tokens[0]);
        let mut abstract_text = String::from("The survey of ");
        for (j, token) in tokens.iter().enumerate() {
            abstract_text.push_str(token);
            match j % 7 {
                0 => abstract_text.push_str(", "),
                3 => abstract_text.push_str(" and "),
                5 => abstract_text.push_str("; "),
                _ => abstract_text.push(' '),
            }
        }
        abstract_text.push_str(&format!(
            "was repeated {} times in 20{:02}.",
            i % 9 + 1,
            year % 100
        ));
        let citations_field = if i == 7 {
            String::new() // exercises the missing-citations default
        } else {
            citations.to_string()
        };
        bib.push_str(&format!(
            "{},{},{},{},{}\n",
            csv_quote(&title),
            csv_quote(&abstract_text),
            year,
            citations_field,
            csv_quote(venue)
        ));
    }
    // rows without an abstract; the filter must drop them
    for i in 0..4 {
        bib.push_str(&format!(
            "Placeholder entry {i},,2020,3,{}\n",
            csv_quote(VENUES[i % VENUES.len()].0)
        ));
    }

    let mut areas = String::from("source,area_code\n");
    for (venue, codes) in VENUES {
        for code in codes.split(';') {
            areas.push_str(&format!("{},{}\n", csv_quote(venue), code));
        }
    }
    (bib, areas)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textprep::StopwordSet;

    #[test]
    fn planted_words_survive_preprocessing() {
        let standard = StopwordSet::builtin_standard();
        let custom = StopwordSet::builtin_domain();
        for word in PLANTED_WORDS {
            let out = crate::textprep::preprocess_text(word, &standard, &custom);
            assert_eq!(
                out,
                vec![word.to_string()],
                "word {word} must survive unchanged"
            );
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = PlantedSpec::default();
        assert_eq!(planted_tokenized_docs(&spec), planted_tokenized_docs(&spec));
        let (a, _) = planted_corpus_csv(&spec);
        let (b, _) = planted_corpus_csv(&spec);
        assert_eq!(a, b);
    }

    #[test]
    fn docs_draw_only_from_their_support() {
        let spec = PlantedSpec {
            docs: 25,
            tokens_per_doc: 30,
            seed: 99,
        };
        for (d, doc) in planted_tokenized_docs(&spec).iter().enumerate() {
            let support: Vec<&str> = planted_support(d % PLANTED_TOPICS)
                .map(|w| PLANTED_WORDS[w])
                .collect();
            assert!(doc.tokens.iter().all(|t| support.contains(&t.as_str())));
        }
    }
}
