//! Builds a model-by-condition table of test results and renders it in every
//! output format.

use eat_audit::report::{render_eat_table, EatTable, Format, ReportCell};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut table = EatTable::new("model");
    let cells = [
        ("ViT-B32", "angry high", 1.09, 0.003),
        ("ViT-B32", "angry low", 0.26, 0.12),
        ("RN50", "angry high", 0.71, 0.02),
        ("RN50", "angry low", -0.06, 0.55),
    ];
    for (row, column, d, p) in cells {
        table.insert(row, column, ReportCell::new(d, p))?;
    }
    table.mark_absent("RN50x4", "angry high")?;
    table.mark_absent("RN50x4", "angry low")?;

    for format in [Format::Markdown, Format::Csv, Format::Json] {
        println!("--- {format}");
        print!("{}", render_eat_table(&table, format)?);
    }
    Ok(())
}
