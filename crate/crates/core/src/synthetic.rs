//! Deterministic synthetic corpora.
//!
//! Articles come in short stories (a handful of reports on one incident
//! over a few days) grouped under broader themes. Stories in the same theme
//! share part of their concept set and vocabulary, so the corpus has
//! structure for propagation, topics and sentiment without any real data.

use chrono::{DateTime, Duration, Utc};
use rand::seq::{index, IndexedRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Article, Corpus};
use crate::time::parse_timestamp;

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub event_tag: String,
    pub articles: usize,
    pub stories: usize,
    pub start: DateTime<Utc>,
    pub days: i64,
    pub seed: u64,
    /// Share of articles from publishers missing in the publisher table.
    pub unknown_share: f64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            event_tag: crate::data::SYNTHETIC_EVENT.to_string(),
            articles: 500,
            stories: 60,
            start: parse_timestamp("2023-11-01").expect("valid"),
            days: 30,
            seed: 2023,
            unknown_share: 0.03,
        }
    }
}

struct Theme {
    category: &'static str,
    concepts: &'static [&'static str],
    words: &'static [&'static str],
    headlines: &'static [&'static str],
    /// Lexicon words leaning the theme's tone.
    tone: &'static [&'static str],
}

const THEMES: &[Theme] = &[
    Theme {
        category: "Hostages",
        concepts: &["Hostage", "Hamas", "Gaza Strip", "Negotiation", "Red Cross", "Kibbutz", "Family", "Release"],
        words: &[
            "hostages",
            "captives",
            "families",
            "kibbutz",
            "abducted",
            "relatives",
            "negotiators",
            "released",
            "captivity",
            "vigil",
            "names",
            "reunion",
        ],
        headlines: &[
            "families wait for word on hostages",
            "hostage release talks resume",
            "relatives hold vigil for captives",
        ],
        tone: &["hope", "fear", "relief", "loss", "safe"],
    },
    Theme {
        category: "Humanitarian crisis",
        concepts: &[
            "Humanitarian aid",
            "Rafah Border Crossing",
            "UNRWA",
            "Hospital",
            "Fuel",
            "Refugee",
            "World Health Organization",
            "Water",
        ],
        words: &[
            "aid",
            "trucks",
            "hospital",
            "fuel",
            "shortages",
            "medical",
            "shelter",
            "displaced",
            "water",
            "convoy",
            "patients",
            "supplies",
        ],
        headlines: &["aid convoy reaches crossing", "hospital runs short of fuel", "displaced families seek shelter"],
        tone: &["crisis", "help", "wounded", "death", "support"],
    },
    Theme {
        category: "Diplomacy",
        concepts: &[
            "Ceasefire",
            "Qatar",
            "Egypt",
            "Truce",
            "Diplomacy",
            "United Nations Security Council",
            "Mediation",
            "Prisoner exchange",
        ],
        words: &[
            "ceasefire",
            "truce",
            "mediators",
            "diplomats",
            "resolution",
            "talks",
            "envoy",
            "pause",
            "agreement",
            "summit",
            "council",
            "proposal",
        ],
        headlines: &[
            "mediators push for truce extension",
            "council weighs ceasefire resolution",
            "envoys meet on pause proposal",
        ],
        tone: &["peace", "agreement", "hope", "threat", "good"],
    },
    Theme {
        category: "Military operations",
        concepts: &[
            "Israel Defense Forces",
            "Airstrike",
            "Khan Yunis",
            "Tunnel",
            "Rocket",
            "Ground invasion",
            "Hezbollah",
            "Missile",
        ],
        words: &[
            "airstrikes",
            "troops",
            "tunnels",
            "rockets",
            "offensive",
            "shelling",
            "brigade",
            "raid",
            "missiles",
            "ground",
            "operation",
            "bombardment",
        ],
        headlines: &[
            "troops advance in ground offensive",
            "overnight airstrikes hit district",
            "rockets fired across border",
        ],
        tone: &["war", "kill", "attack", "bomb", "destroyed"],
    },
    Theme {
        category: "Protests",
        concepts: &[
            "Protest",
            "Demonstration",
            "Antisemitism",
            "Islamophobia",
            "University",
            "Police",
            "March",
            "Free speech",
        ],
        words: &[
            "protesters",
            "march",
            "rally",
            "students",
            "campus",
            "police",
            "banners",
            "chants",
            "crowd",
            "arrests",
            "organizers",
            "speech",
        ],
        headlines: &["thousands march in capital", "campus rally draws counter protest", "police detain protesters"],
        tone: &["condemn", "support", "violence", "peace", "terror"],
    },
    Theme {
        category: "Economy",
        concepts: &["Oil price", "Shipping", "Red Sea", "Houthis", "Stock market", "Inflation", "Tourism", "Sanctions"],
        words: &[
            "shipping",
            "markets",
            "oil",
            "prices",
            "insurers",
            "tankers",
            "investors",
            "tourism",
            "freight",
            "exports",
            "economy",
            "sanctions",
        ],
        headlines: &["shipping firms reroute vessels", "oil prices climb on supply fears", "tourism bookings collapse"],
        tone: &["crisis", "win", "fear", "good", "bad"],
    },
];

const PLACES: &[&str] = &[
    "Jabalia",
    "Shifa",
    "Nuseirat",
    "Deir al-Balah",
    "Beit Hanoun",
    "Khan Yunis",
    "Rafah",
    "Gaza City",
    "Sderot",
    "Ashkelon",
    "Be'eri",
    "Kfar Aza",
    "Nir Oz",
    "Doha",
    "Cairo",
    "Amman",
    "Beirut",
    "Tel Aviv",
    "Jerusalem",
    "Hebron",
    "Jenin",
    "Nablus",
    "Eilat",
    "Bab el-Mandeb",
    "Geneva",
    "New York",
    "London",
    "Paris",
    "Berlin",
    "Istanbul",
];

const INTENSIFIERS: &[&str] = &["very", "extremely", "deeply"];
const NEGATIONS: &[&str] = &["not", "never", "no"];

/// `(source_name, hq_country, political_alignment)`.
pub const PUBLISHERS: &[(&str, &str, &str)] = &[
    ("timesofisrael.com", "Israel", "center"),
    ("haaretz.com", "Israel", "left"),
    ("jpost.com", "Israel", "center-right"),
    ("nytimes.com", "United States", "center-left"),
    ("foxnews.com", "United States", "right"),
    ("apnews.com", "United States", "center"),
    ("bbc.co.uk", "United Kingdom", "center"),
    ("theguardian.com", "United Kingdom", "left"),
    ("dailymail.co.uk", "United Kingdom", "right"),
    ("spiegel.de", "Germany", "center-left"),
    ("lemonde.fr", "France", "center-left"),
    ("aljazeera.com", "Qatar", "state-controlled"),
    ("ahram.org.eg", "Egypt", "state-controlled"),
    ("dailysabah.com", "Turkey", "state-controlled"),
    ("presstv.ir", "Iran", "state-controlled"),
    ("rt.com", "Russia", "state-controlled"),
    ("tass.com", "Russia", "state-controlled"),
    ("cgtn.com", "China", "state-controlled"),
    ("japantimes.co.jp", "Japan", "center"),
    ("thehindu.com", "India", "center-left"),
    ("dawn.com", "Pakistan", "center"),
    ("arabnews.com", "Saudi Arabia", "state-controlled"),
    ("jordantimes.com", "Jordan", "center"),
    ("aps.dz", "Algeria", "state-controlled"),
    ("jamaica-gleaner.com", "Jamaica", "center"),
    ("news24.com", "South Africa", "center-left"),
    ("folha.uol.com.br", "Brazil", "center-left"),
    ("abc.net.au", "Australia", "center"),
    ("cbc.ca", "Canada", "center"),
    ("kyivindependent.com", "Ukraine", "center"),
];

const UNLISTED_PUBLISHERS: &[&str] = &["regional-wire.example", "citizen-blog.example"];

/// Publisher table matching [`PUBLISHERS`] as CSV.
pub fn publishers_csv() -> String {
    let mut out = String::from("source_name,hq_country,political_alignment\n");
    for (source, country, alignment) in PUBLISHERS {
        out.push_str(&format!("{source},{country},{alignment}\n"));
    }
    out
}

struct Story {
    theme: &'static Theme,
    place: &'static str,
    concepts: Vec<(&'static str, f64)>,
    start: DateTime<Utc>,
}

fn sentence(rng: &mut ChaCha8Rng, theme: &Theme, place: &str) -> String {
    let mut words: Vec<String> =
        (0..rng.random_range(5..9)).map(|_| theme.words.choose(rng).unwrap().to_string()).collect();
    if rng.random_bool(0.6) {
        let mut tone = theme.tone.choose(rng).unwrap().to_string();
        if rng.random_bool(0.2) {
            tone = format!("{} {tone}", INTENSIFIERS.choose(rng).unwrap());
        }
        if rng.random_bool(0.15) {
            tone = format!("{} {tone}", NEGATIONS.choose(rng).unwrap());
        }
        let at = rng.random_range(0..=words.len());
        words.insert(at, tone);
    }
    if rng.random_bool(0.3) {
        words.push(format!("in {place}"));
    }
    let mut s = words.join(" ");
    if let Some(first) = s.get_mut(0..1) {
        first.make_ascii_uppercase();
    }
    s.push('.');
    s
}

/// Generates the corpus described by `spec`. The same spec always yields
/// the same corpus.
pub fn generate(spec: &SyntheticSpec) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let stories: Vec<Story> = (0..spec.stories.max(1))
        .map(|i| {
            let theme = &THEMES[i % THEMES.len()];
            let place = PLACES[rng.random_range(0..PLACES.len())];
            let picks = index::sample(&mut rng, theme.concepts.len(), 4);
            let mut concepts: Vec<(&str, f64)> =
                picks.iter().map(|j| (theme.concepts[j], rng.random_range(40..=80) as f64)).collect();
            concepts.push((place, 100.0));
            let start_day = rng.random_range(0..(spec.days - 3).max(1));
            Story { theme, place, concepts, start: spec.start + Duration::days(start_day) }
        })
        .collect();

    let all_concepts: Vec<&str> = THEMES.iter().flat_map(|t| t.concepts.iter().copied()).collect();
    let articles = (0..spec.articles).map(|i| {
        let story = &stories[rng.random_range(0..stories.len())];
        let offset = Duration::seconds(rng.random_range(0..3 * 86_400));
        let mut concepts: Vec<(String, f64)> =
            story.concepts.iter().map(|(c, w)| (c.to_string(), (w * rng.random_range(0.85..1.15)).round())).collect();
        let extra = all_concepts.choose(&mut rng).unwrap();
        if !concepts.iter().any(|(c, _)| c == extra) {
            concepts.push((extra.to_string(), rng.random_range(10..=30) as f64));
        }
        let source_name = if rng.random_bool(spec.unknown_share) {
            UNLISTED_PUBLISHERS.choose(&mut rng).unwrap().to_string()
        } else {
            PUBLISHERS.choose(&mut rng).unwrap().0.to_string()
        };
        let body: Vec<String> =
            (0..rng.random_range(5..9)).map(|_| sentence(&mut rng, story.theme, story.place)).collect();
        Article {
            id: format!("syn-{i:04}"),
            title: format!("{}: {}", story.place, story.theme.headlines.choose(&mut rng).unwrap()),
            body: body.join(" "),
            source_name,
            published_at: story.start + offset,
            concepts,
            categories: vec!["Israel-Hamas War".to_string(), story.theme.category.to_string()],
        }
    });
    Corpus::new(spec.event_tag.clone(), articles.collect::<Vec<_>>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::read_corpus;
    use crate::data::{SYNTHETIC_CORPUS_JSONL, SYNTHETIC_PUBLISHERS_CSV};

    #[test]
    fn deterministic() {
        let spec = SyntheticSpec { articles: 50, ..Default::default() };
        assert_eq!(generate(&spec), generate(&spec));
    }

    #[test]
    fn bundled_files_match_generator() {
        let corpus = generate(&SyntheticSpec::default());
        let mut buf = Vec::new();
        corpus.write_jsonl(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), SYNTHETIC_CORPUS_JSONL);
        assert_eq!(publishers_csv(), SYNTHETIC_PUBLISHERS_CSV);
        let (loaded, report) =
            read_corpus(SYNTHETIC_CORPUS_JSONL.as_bytes(), crate::data::SYNTHETIC_EVENT, "bundled").unwrap();
        assert_eq!(loaded.len(), 500);
        assert_eq!(report.malformed, 0);
    }
}
