//! Writes an embedding matrix and its manifest, then loads them back as a
//! dataset, the same hand-off an exporter produces.

use eat_audit::embedding_io::{
    load_dataset, read_npy, write_npy_file, EmbeddingMatrix, Entry, EntryKind, Manifest,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join(format!("eat-audit-npy-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let (rows, dim) = (6, 512);

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let data: Vec<f32> = (0..rows * dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let matrix = EmbeddingMatrix::from_f32(rows, dim, &data)?;

    let entries = (0..rows)
        .map(|row| Entry {
            id: format!("item-{row}"),
            group: if row < 3 { "X" } else { "Y" }.into(),
            row,
            kind: EntryKind::Image,
            text: None,
            meta: Default::default(),
        })
        .collect();
    let manifest = Manifest::new(entries)?;

    let npy = dir.join("embeddings.npy");
    let jsonl = dir.join("manifest.jsonl");
    write_npy_file(&npy, &matrix)?;
    std::fs::write(&jsonl, manifest.to_jsonl())?;

    let back = read_npy(&npy)?;
    let exact = back
        .data()
        .iter()
        .zip(matrix.data())
        .all(|(a, b)| a.to_bits() == b.to_bits());
    println!(
        "{} bytes, {}x{} {:?}, bit-exact: {exact}",
        std::fs::metadata(&npy)?.len(),
        back.rows(),
        back.dim(),
        back.dtype()
    );

    let dataset = load_dataset(&npy, &jsonl)?;
    for tag in ["X", "Y"] {
        let ids: Vec<&str> = dataset.group(tag).iter().map(|e| e.id.as_str()).collect();
        println!("group {tag}: {ids:?}");
    }

    std::fs::remove_dir_all(&dir)?;
    Ok(())
}
