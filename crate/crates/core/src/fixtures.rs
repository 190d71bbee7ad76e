//! Desk-scale synthetic fixtures: a 100-place gazetteer and a 50-document
//! corpus with seeded retrieval, disambiguation, and granularity
//! scenarios. Used by the test suites, the benchmarks, and the bundled
//! example data under `fixtures/`.

use crate::config::EngineConfig;
use crate::corpus::CorpusStore;
use crate::gazetteer::Gazetteer;
use crate::retrieval::Engine;

/// The fixture landmark used by the end-to-end flood scenario.
pub const LANDMARK_ID: &str = "MB";
pub const LANDMARK_NAME: &str = "Marina Beach";
pub const LANDMARK_LON: f64 = 80.2825;
pub const LANDMARK_LAT: f64 = 13.05;

/// Document ids seeded as relevant for `flood near Marina Beach`.
pub const FLOOD_RELEVANT: [&str; 4] = ["flood-01", "flood-02", "flood-03", "flood-04"];

/// Documents whose Springfield mention must resolve into Illinois.
pub const SPRINGFIELD_DOCS: [&str; 5] = [
    "spring-01",
    "spring-02",
    "spring-03",
    "spring-04",
    "spring-05",
];

const SYNTH_CITIES: [&str; 20] = [
    "Arkavat", "Belundi", "Chandrem", "Dorvala", "Ellupet", "Fenwara", "Gomtila", "Harvand",
    "Injampur", "Jalvere", "Kotram", "Lumbadi", "Mandvik", "Nerkondi", "Ossepet", "Puldana",
    "Quilvar", "Ramvati", "Sundapet", "Tellichor",
];

const SYNTH_EVENTS: [&str; 10] = [
    "earthquake",
    "wildfire",
    "festival",
    "drought",
    "cyclone",
    "protest",
    "harvest",
    "blackout",
    "parade",
    "regatta",
];

/// The fixture gazetteer as TSV (header plus 100 rows).
pub fn gazetteer_tsv() -> String {
    let mut rows: Vec<String> = Vec::new();
    let mut row = |id: &str,
                   name: &str,
                   alts: &str,
                   level: &str,
                   lon: f64,
                   lat: f64,
                   polygon: &str,
                   parent: &str,
                   importance: &str| {
        rows.push(format!(
            "{id}\t{name}\t{alts}\t{level}\t{lon}\t{lat}\t{polygon}\t{parent}\t{importance}"
        ));
    };

    // Countries, regions, and the named places the scenarios rely on.
    row("IN", "India", "Bharat", "country", 78.9, 20.5, "", "", "0.9");
    row("TN", "Tamil Nadu", "", "region", 78.6, 11.1, "", "IN", "0.7");
    row("KA", "Karnataka", "", "region", 76.1, 15.0, "", "IN", "0.65");
    row(
        "CHN",
        "Chennai",
        "Madras",
        "city",
        80.27,
        13.08,
        "80.15 12.95;80.35 12.95;80.35 13.25;80.15 13.25;80.15 12.95",
        "TN",
        "0.8",
    );
    row("MB", "Marina Beach", "", "landmark", LANDMARK_LON, LANDMARK_LAT, "", "CHN", "0.6");
    row("MYL", "Mylapore", "", "neighborhood", 80.2685, 13.0339, "", "CHN", "0.55");
    row("FSG", "Fort St George", "", "landmark", 80.2875, 13.0796, "", "CHN", "0.55");
    row("DEL", "Delhi", "", "city", 77.21, 28.61, "", "IN", "0.8");
    row("BLR", "Bengaluru", "Bangalore", "city", 77.59, 12.97, "", "KA", "0.75");
    row("US", "United States", "USA", "country", -98.0, 39.5, "", "", "0.9");
    row("IL", "Illinois", "", "region", -89.0, 40.0, "", "US", "0.6");
    row("MA", "Massachusetts", "", "region", -71.8, 42.2, "", "US", "0.6");
    row("SPR-IL", "Springfield", "", "city", -89.65, 39.78, "", "IL", "0.5");
    row("SPR-MA", "Springfield", "", "city", -72.59, 42.1, "", "MA", "0.7");
    row("UK", "United Kingdom", "Britain", "country", -2.0, 54.0, "", "", "0.85");
    row("RDG", "Reading", "", "city", -0.97, 51.45, "", "UK", "0.6");

    // Extra Chennai neighborhoods and landmarks.
    row("ADY", "Adyar", "", "neighborhood", 80.2565, 13.0063, "", "CHN", "0.5");
    row("VEL", "Velachery", "", "neighborhood", 80.2185, 12.9791, "", "CHN", "0.5");
    row("BSN", "Besant Nagar", "", "neighborhood", 80.2668, 13.0002, "", "CHN", "0.5");
    row("GDY", "Guindy Park", "", "landmark", 80.2353, 13.0067, "", "CHN", "0.45");

    // Twenty synthetic cities along the coast, each with two landmarks
    // and one neighborhood.
    for (i, city) in SYNTH_CITIES.iter().enumerate() {
        let lon = 79.0 + 0.12 * i as f64;
        let lat = 12.2 + 0.07 * (i % 5) as f64;
        let parent = if i % 2 == 0 { "TN" } else { "KA" };
        let importance = 0.4 + 0.02 * (i % 10) as f64;
        let city_id = format!("SC{i:02}");
        rows.push(format!(
            "{city_id}\t{city}\t\tcity\t{lon}\t{lat}\t\t{parent}\t{importance:.2}"
        ));
        rows.push(format!(
            "SC{i:02}-F\t{city} Fort\t\tlandmark\t{}\t{}\t\t{city_id}\t0.4",
            lon + 0.012,
            lat + 0.008
        ));
        rows.push(format!(
            "SC{i:02}-M\t{city} Market\t\tlandmark\t{}\t{}\t\t{city_id}\t0.4",
            lon - 0.01,
            lat - 0.006
        ));
        rows.push(format!(
            "SC{i:02}-O\tOld {city}\t\tneighborhood\t{}\t{}\t\t{city_id}\t0.45",
            lon + 0.004,
            lat - 0.012
        ));
    }

    let mut out = String::from(
        "place_id\tprimary_name\talt_names\tlevel\tlon\tlat\tpolygon\tparent_id\timportance\n",
    );
    out.push_str(&rows.join("\n"));
    out.push('\n');
    out
}

/// The fixture corpus as (doc_id, text) pairs: exactly 50 documents.
pub fn corpus_docs() -> Vec<(String, String)> {
    let mut docs: Vec<(String, String)> = Vec::new();
    let mut doc = |id: &str, text: &str| docs.push((id.to_string(), text.to_string()));

    // Seeded relevant documents for "flood near Marina Beach".
    doc("flood-01", "Severe flood conditions were reported near Marina Beach after the storm.");
    doc("flood-02", "Flood water rose very close to Marina Beach during the night.");
    doc("flood-03", "Rescue crews pumped flood water near Marina Beach on Tuesday.");
    doc("flood-04", "A flood warning stayed in force near Marina Beach until dawn.");
    // Distractors: floods elsewhere, and a city-level flood report.
    doc("flood-05", "Minor flood damage was recorded in Delhi suburbs.");
    doc("flood-06", "A flood alert covered low areas of Chennai yesterday.");

    // Springfield disambiguation contexts; each pairs the ambiguous name
    // with an Illinois mention.
    doc("spring-01", "A parade in Springfield drew crowds from across Illinois.");
    doc("spring-02", "Springfield officials met Illinois farmers at the fairgrounds.");
    doc("spring-03", "The Illinois harvest festival returned to Springfield this spring.");
    doc("spring-04", "Springfield reopened its museum with Illinois state funding.");
    doc("spring-05", "Springfield voters and Illinois observers followed the Springfield debate.");

    // One seeded document per granularity level.
    doc("gran-01", "Cleanup crews gathered at Marina Beach before sunrise.");
    doc("gran-02", "Volunteers met at Fort St George for the cleanup drive.");
    doc("gran-03", "A heritage walk started in Mylapore near the old temple.");
    doc("gran-04", "Farm exports grew across Tamil Nadu this quarter.");
    doc("gran-05", "Monsoon clouds gathered across India by late June.");

    // Relation lexicon coverage.
    doc("lex-01", "A new venue opened to the east of Delhi last week.");
    doc("lex-02", "Grain silos stand far from Chennai along the highway.");
    doc("lex-03", "The hostel sits within walking distance of Marina Beach.");
    doc("lex-04", "Power cuts hit areas somewhat close to Mylapore.");
    doc("lex-05", "Traffic slowed north of Bengaluru near the toll gates.");

    // Capitalization screen: a lowercase homonym and a cued toponym.
    doc("read-01", "The reading was high.");
    doc("read-02", "Storm damage was reported in Reading overnight.");

    // Synthetic event reports over the generated cities.
    for i in 0..25usize {
        let city = SYNTH_CITIES[i % SYNTH_CITIES.len()];
        let event = SYNTH_EVENTS[i % SYNTH_EVENTS.len()];
        let text = match i % 5 {
            0 => format!("A {event} struck near {city} Fort overnight."),
            1 => format!("A {event} disrupted daily life in {city} this week."),
            2 => format!("Officials tracked a {event} to the south of {city}."),
            3 => format!("A {event} spread far from {city} across open fields."),
            _ => format!("Crews worked within walking distance of {city} Market after the {event}."),
        };
        doc(&format!("syn-{:02}", i + 1), &text);
    }

    // Pure noise: no spatial content.
    doc("noise-01", "Quiet markets and steady prices made for a calm week.");
    doc("noise-02", "The committee postponed its vote pending further review.");

    docs
}

/// The fixture corpus as line-delimited JSON (`{"id": ..., "text": ...}`).
pub fn corpus_jsonl() -> String {
    let mut out = String::new();
    for (id, text) in corpus_docs() {
        out.push_str(
            &serde_json::json!({ "id": id, "text": text })
                .to_string(),
        );
        out.push('\n');
    }
    out
}

/// Parsed fixture gazetteer.
pub fn gazetteer() -> Gazetteer {
    Gazetteer::from_tsv(&gazetteer_tsv()).expect("fixture gazetteer is valid")
}

/// Ingested (unsealed) fixture corpus.
pub fn corpus() -> CorpusStore {
    let mut store = CorpusStore::new();
    for (id, text) in corpus_docs() {
        store
            .ingest_document(&id, &text)
            .expect("fixture documents ingest cleanly");
    }
    store
}

/// A fully built engine over the fixtures with default configuration.
pub fn engine() -> Engine {
    Engine::build(corpus(), gazetteer(), EngineConfig::default())
        .expect("fixture engine builds")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gazetteer_has_100_places() {
        let gaz = gazetteer();
        assert_eq!(gaz.len(), 100);
        // Containment forest depth is at most 5 levels.
        for e in gaz.entries() {
            let mut depth = 1;
            let mut cur = e.parent_id.clone();
            while let Some(p) = cur {
                depth += 1;
                cur = gaz.get(&p).and_then(|e| e.parent_id.clone());
            }
            assert!(depth <= 5, "{} sits at depth {depth}", e.place_id);
        }
    }

    #[test]
    fn corpus_has_50_docs() {
        assert_eq!(corpus_docs().len(), 50);
        let store = corpus();
        assert_eq!(store.n_docs(), 50);
    }

    #[test]
    fn fixture_hierarchy_examples() {
        let gaz = gazetteer();
        assert!(gaz.contains("IN", "MB").unwrap());
        assert_eq!(gaz.lookup("Springfield").len(), 2);
        assert_eq!(
            gaz.granularity_of("MB").unwrap(),
            crate::gazetteer::GranularityLevel::Landmark
        );
        assert_eq!(
            gaz.granularity_of("IN").unwrap(),
            crate::gazetteer::GranularityLevel::Country
        );
    }

    #[test]
    fn engine_builds_with_mentions() {
        let engine = engine();
        assert!(engine.mentions.len() > 30, "only {} docs with mentions", engine.mentions.len());
        assert!(engine.mentions.contains_key("flood-01"));
        assert!(!engine.mentions.contains_key("noise-01"));
        assert!(!engine.mentions.contains_key("read-01"));
    }
}
