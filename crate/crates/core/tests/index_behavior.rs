//! Index behavior pinned against hand-derived expectations: posting
//! counts and SWF weights on a small corpus, level-2 cell coverage of a
//! buffered mention box, and candidate saturation.

use std::collections::BTreeSet;

use vaguemap_core::config::EngineConfig;
use vaguemap_core::corpus::CorpusStore;
use vaguemap_core::fixtures;
use vaguemap_core::fuzzy::surface_for_mention;
use vaguemap_core::gazetteer::GranularityLevel;
use vaguemap_core::geo::BBox;
use vaguemap_core::index::LEVEL_CELL_DEG;
use vaguemap_core::retrieval::Engine;

#[test]
fn eight_doc_corpus_postings_and_weights() {
    let mut corpus = CorpusStore::new();
    corpus.ingest_document("d1", "Heavy rain soaked Chennai on Monday.").unwrap();
    corpus.ingest_document("d2", "Markets reopened in Chennai after repairs.").unwrap();
    corpus.ingest_document("d3", "A festival began in Delhi.").unwrap();
    for i in 4..=8 {
        corpus
            .ingest_document(&format!("d{i}"), "Nothing spatial happened today.")
            .unwrap();
    }
    let engine = Engine::build(corpus, fixtures::gazetteer(), EngineConfig::default()).unwrap();

    // Chennai occurs in 2 of 8 documents, once each: SF = 1 and
    // SWF = 1 * (log2(8 / 2) + 1) = 3.
    let postings = &engine.index.level1["CHN"];
    assert_eq!(postings.len(), 2);
    for p in postings {
        assert_eq!(p.sf, 1);
        let w = engine.index.vectors[&p.doc_id].weight("CHN");
        assert!((w - 3.0).abs() < 1e-12, "weight = {w}");
    }
}

#[test]
fn near_mention_lands_in_buffered_landmark_cells() {
    let mut corpus = CorpusStore::new();
    corpus.ingest_document("only", "Flood near Marina Beach.").unwrap();
    let engine = Engine::build(corpus, fixtures::gazetteer(), EngineConfig::default()).unwrap();

    let mention = &engine.mentions["only"][0];
    assert_eq!(mention.kind.term_key(), "near@MB");
    // The 0.5-cut of the default near set reaches 5 - 0.5 * 3 = 3.5 km.
    let surface = surface_for_mention(&mention.kind, &engine.gazetteer, &engine.config.fuzzy).unwrap();
    let bbox = surface.alpha_cut_bbox(0.5, engine.config.fuzzy.reach_horizon_km).unwrap();
    assert_eq!(bbox, surface.anchor.bbox().buffer_km(3.5));

    let edge = LEVEL_CELL_DEG[GranularityLevel::Landmark.ordinal() as usize];
    let grid = &engine.index.level2[&GranularityLevel::Landmark];
    let x0 = (bbox.min_lon / edge).floor() as i64;
    let x1 = (bbox.max_lon / edge).floor() as i64;
    let y0 = (bbox.min_lat / edge).floor() as i64;
    let y1 = (bbox.max_lat / edge).floor() as i64;
    let mut covered = 0;
    for x in x0..=x1 {
        for y in y0..=y1 {
            let docs = grid
                .cells
                .get(&(x, y))
                .unwrap_or_else(|| panic!("cell ({x}, {y}) not populated"));
            assert!(docs.contains("only"));
            covered += 1;
        }
    }
    assert!(covered >= 36, "only {covered} cells covered");
}

#[test]
fn candidates_saturate_and_drain() {
    let engine = fixtures::engine();

    // A country-level region covering everything returns exactly the
    // documents that carry any spatial mention.
    let world = BBox::new(-180.0, -90.0, 180.0, 90.0);
    let all = engine
        .index
        .candidates(Some(&world), GranularityLevel::Country, &[]);
    let with_mentions: BTreeSet<String> = engine.mentions.keys().cloned().collect();
    assert_eq!(all, with_mentions);

    // Empty terms and a region outside all data yield nothing.
    let pacific = BBox::new(-150.0, -5.0, -149.0, 5.0);
    let none = engine
        .index
        .candidates(Some(&pacific), GranularityLevel::Country, &[]);
    assert!(none.is_empty(), "unexpected candidates: {none:?}");

    // Empty everything: no region, no terms.
    let nothing = engine.index.candidates(None, GranularityLevel::City, &[]);
    assert!(nothing.is_empty());
}
