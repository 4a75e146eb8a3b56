//! Writes the reference networks and lexicons as JSON files.
//!
//! cargo run -p pcir-core --example write_fixtures -- <dir>

use std::fs;
use std::path::PathBuf;

use pcir_core::fixtures;
use pcir_core::{serialize_network, Lexicon, Network};

fn main() {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "fixtures".into()));
    fs::create_dir_all(&dir).expect("create output directory");
    let hand = fixtures::terrorism_hand_built();
    let hand_lexicon = Lexicon::new(hand.evidence_links.clone()).expect("valid links");
    let files: Vec<(&str, String)> = vec![
        ("kill_shoot.json", serialize_network(&fixtures::kill_shoot().into())),
        ("terrorism_four_parents.json", serialize_network(&fixtures::terrorism_four_parents().into())),
        ("terrorism_hand_built.json", serialize_network(&Network::Directed(hand))),
        ("terrorism_hand_built.lexicon.json", hand_lexicon.to_json()),
        ("terrorism_analog.json", serialize_network(&fixtures::terrorism_analog().into())),
        ("terrorism_analog.lexicon.json", fixtures::terrorism_analog_lexicon().to_json()),
        ("recovery_benchmark.json", serialize_network(&fixtures::recovery_benchmark().into())),
    ];
    for (name, text) in files {
        fs::write(dir.join(name), text).expect("write fixture");
    }
}
