//! Expands the built-in attribute catalogs into their prompt grids.
//!
//! cargo run --example prompt_grid [catalog]

use eat_audit::stimuli::{Catalog, ExpandOptions, ResolvedCatalog};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let wanted = std::env::args().nth(1);
    for catalog in Catalog::ALL {
        if wanted.as_deref().is_some_and(|w| w != catalog.name()) {
            continue;
        }
        let resolved = ResolvedCatalog::builtin(catalog);
        let (a, b) = resolved.grids(ExpandOptions::default())?;
        println!("{catalog}: {} A prompts, {} B prompts", a.len(), b.len());
        for text in a.texts().take(5) {
            println!("  A  {text}");
        }
        for text in b.texts().take(5) {
            println!("  B  {text}");
        }
    }

    // The templates are used verbatim, so "a angry person" is expected.
    // Article normalization is opt-in.
    let (a, _) = ResolvedCatalog::builtin(Catalog::EmotionAngry).grids(ExpandOptions {
        normalize_articles: true,
    })?;
    println!("normalized: {}", a.texts().nth(1).unwrap_or_default());
    Ok(())
}
