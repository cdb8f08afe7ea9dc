//! An emotion association test on synthetic embeddings.
//!
//! Image vectors for two groups are drawn around two centers; the "angry"
//! prompts sit nearer the first center, so X should associate with A.

use eat_audit::eat::{evaluate, EatInput, GroupLabels, PermutationPlan};
use eat_audit::report::{Band, ReportCell};
use eat_audit::stimuli::{Catalog, ExpandOptions, ResolvedCatalog};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const DIM: usize = 32;

fn around(rng: &mut ChaCha8Rng, center: &[f64], spread: f64) -> Vec<f64> {
    center
        .iter()
        .map(|c| c + rng.gen_range(-spread..spread))
        .collect()
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(eat_audit::DEFAULT_SEED);
    let first: Vec<f64> = (0..DIM).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let second: Vec<f64> = (0..DIM).map(|_| rng.gen_range(-1.0..1.0)).collect();

    // One embedding per prompt; the prompts themselves only label the rows here.
    let (a_prompts, b_prompts) =
        ResolvedCatalog::builtin(Catalog::EmotionAngry).grids(ExpandOptions::default())?;
    let a: Vec<Vec<f64>> = a_prompts
        .texts()
        .map(|_| around(&mut rng, &first, 1.2))
        .collect();
    let b: Vec<Vec<f64>> = b_prompts
        .texts()
        .map(|_| around(&mut rng, &second, 1.2))
        .collect();

    let x: Vec<Vec<f64>> = (0..8).map(|_| around(&mut rng, &first, 1.5)).collect();
    let y: Vec<Vec<f64>> = (0..8).map(|_| around(&mut rng, &second, 1.5)).collect();

    let input = EatInput::new(x, y, a, b)?.with_labels(GroupLabels {
        x: "group X".into(),
        y: "group Y".into(),
        a: "angry".into(),
        b: "neutral person".into(),
    });
    let result = evaluate(&input, &PermutationPlan::default())?;
    let cell = ReportCell::new(result.d, result.p);
    println!(
        "d = {:.4}, p = {:.6} ({:?}, {} partitions) -> {} [{:?}]",
        result.d,
        result.p,
        result.method,
        result.n_permutations,
        cell.text(),
        Band::of(result.d)
    );
    Ok(())
}
