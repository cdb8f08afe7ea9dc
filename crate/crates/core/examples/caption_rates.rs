//! Emotion-word rates per 1,000 captions, with the corpus-wide frequency
//! threshold applied before counting.

use std::collections::BTreeMap;

use eat_audit::captions::{emotion_rates, CaptionCorpus, Lexicon};
use eat_audit::report::{render_rate_series, Format, RateSeries};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let phrases = [
        "a person frowning at the camera",
        "a serious man in a suit",
        "a woman smiling",
        "a crying child",
        "a happy couple laughing",
        "a person with a scowl",
        "a portrait of a person",
    ];
    let mut groups = BTreeMap::new();
    for (group, bias) in [("non-objectified", 0usize), ("objectified", 6)] {
        let captions: Vec<String> = (0..2_000)
            .map(|i| {
                let pool = if i % 3 == 0 {
                    &phrases[bias..]
                } else {
                    &phrases[..]
                };
                pool.choose(&mut rng).expect("non-empty").to_string()
            })
            .collect();
        groups.insert(group.to_string(), captions);
    }
    let corpus = CaptionCorpus::new(groups)?;

    let report = emotion_rates(&corpus, &Lexicon::builtins(), 100);
    print!(
        "{}",
        render_rate_series(RateSeries::Emotions(&report), Format::Csv)?
    );
    println!(
        "dropped below threshold: {:?}",
        report.dropped_words.keys().collect::<Vec<_>>()
    );
    Ok(())
}
