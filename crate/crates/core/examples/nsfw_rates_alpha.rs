//! Sexualization rates from classifier labels, and agreement between human
//! raters, read from the same CSV layout the CLI accepts.

use eat_audit::ratings::{alpha_report, group_rates, read_labels, RatingTable};
use eat_audit::report::{render_rate_series, Format, RateSeries};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);

    let mut csv = String::from("image_id,group,rater,category\n");
    for (group, share) in [("girl_18", 0.47), ("boy_18", 0.03)] {
        for i in 0..200 {
            let label = if rng.gen_bool(share) {
                ["sexy", "pornographic", "hentai"][i % 3]
            } else {
                ["neutral", "drawing"][i % 2]
            };
            csv.push_str(&format!("{group}-{i},{group},classifier,{label}\n"));
        }
    }
    let records = read_labels(csv.as_bytes())?;
    let rates = group_rates(records.iter().map(|r| (r.group.clone(), r.rating)))?;
    print!(
        "{}",
        render_rate_series(RateSeries::Groups(&rates), Format::Markdown)?
    );

    // Three annotators judging 60 images; each flips the latent truth now and then.
    let mut csv = String::from("image_id,group,rater,category\n");
    for i in 0..60 {
        let truth = rng.gen_bool(0.4);
        for (rater, noise) in [("r1", 0.05), ("r2", 0.1), ("r3", 0.15)] {
            let flag = truth ^ rng.gen_bool(noise);
            csv.push_str(&format!(
                "img{i},all,{rater},{}\n",
                if flag { "yes" } else { "no" }
            ));
        }
    }
    let table = RatingTable::from_records(&read_labels(csv.as_bytes())?)?;
    let report = alpha_report(&table)?;
    println!(
        "\nalpha over {} raters and {} images: {:.3}",
        report.k, report.n_images, report.alpha
    );
    for pair in &report.pairwise_alphas {
        println!(
            "  {} + {}: {:.3}",
            pair.raters[0],
            pair.raters[1],
            pair.alpha.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
