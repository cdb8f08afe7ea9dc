//! Sexual-objectification associations for three professions, run through a
//! dataset as a real export would be. Text rows are matched to catalog prompts
//! by their source string. Larger target groups switch the permutation test to
//! seeded Monte Carlo.

use eat_audit::eat::{run_eat, GroupSpec, PermutationPlan, Selector, StdDev};
use eat_audit::embedding_io::{Dataset, EmbeddingMatrix, Entry, EntryKind, Manifest};
use eat_audit::report::{render_eat_table, EatTable, Format, ReportCell};
use eat_audit::stimuli::{Catalog, ExpandOptions, ResolvedCatalog};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const DIM: usize = 24;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let sex_axis: Vec<f64> = (0..DIM).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let work_axis: Vec<f64> = (0..DIM).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut noisy = |axis: &[f64], weight: f64| -> Vec<f64> {
        axis.iter()
            .map(|v| weight * v + rng.gen_range(-1.0..1.0))
            .collect()
    };

    let mut table = EatTable::new("model");
    for (catalog, lean) in [
        (Catalog::SexVsScience, 0.1),
        (Catalog::SexVsMedicine, 0.0),
        (Catalog::SexVsBusiness, 0.3),
    ] {
        let resolved = ResolvedCatalog::builtin(catalog);
        let (a, b) = resolved.grids(ExpandOptions::default())?;

        let mut rows = Vec::new();
        let mut entries = Vec::new();
        let mut push =
            |rows: &mut Vec<Vec<f64>>, group: &str, kind, text: Option<&str>, v: Vec<f64>| {
                entries.push(Entry {
                    id: format!("e{}", rows.len()),
                    group: group.into(),
                    row: rows.len(),
                    kind,
                    text: text.map(String::from),
                    meta: Default::default(),
                });
                rows.push(v);
            };
        // 20 + 20 images: C(40, 20) exceeds the exact threshold.
        for _ in 0..20 {
            push(
                &mut rows,
                "women",
                EntryKind::Image,
                None,
                noisy(&sex_axis, 0.1 + lean),
            );
            push(
                &mut rows,
                "men",
                EntryKind::Image,
                None,
                noisy(&work_axis, 0.1),
            );
        }
        for t in a.texts() {
            push(
                &mut rows,
                "prompts",
                EntryKind::Text,
                Some(t),
                noisy(&sex_axis, 1.0),
            );
        }
        for t in b.texts() {
            push(
                &mut rows,
                "prompts",
                EntryKind::Text,
                Some(t),
                noisy(&work_axis, 1.0),
            );
        }
        let dataset = Dataset::new(EmbeddingMatrix::from_rows(&rows)?, Manifest::new(entries)?)?;

        let spec = GroupSpec {
            x: Selector::Group("women".into()),
            y: Selector::Group("men".into()),
            a: Selector::Texts(a.texts().map(String::from).collect()),
            b: Selector::Texts(b.texts().map(String::from).collect()),
        };
        let result = run_eat(
            &dataset,
            &spec,
            &PermutationPlan::default(),
            StdDev::Population,
        )?;
        println!(
            "{catalog}: d = {:.4}, p = {:.5} via {:?}",
            result.d, result.p, result.method
        );
        let column = catalog.name().trim_start_matches("sex_vs_");
        table.insert("synthetic", column, ReportCell::new(result.d, result.p))?;
    }
    print!("\n{}", render_eat_table(&table, Format::Markdown)?);
    Ok(())
}
