//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Run with `cargo test -p eat-audit --test acceptance`.

mod common;

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use common::{naive_exact_p, one_plus_one, random_fixture, rng, two_plus_two, with_threads};
use eat_audit::captions::{emotion_rates, CaptionCorpus, Lexicon};
use eat_audit::eat::{effect_size, evaluate, EatInput, PermutationMode, PermutationPlan};
use eat_audit::embedding_io::{parse_npy, write_npy, DType, EmbeddingMatrix};
use eat_audit::ratings::{
    cronbach_alpha, group_rates, CategoryLabel, LabelRecord, Rating, RatingTable,
};
use eat_audit::report::ReportCell;
use eat_audit::stimuli::{Catalog, ExpandOptions, ResolvedCatalog, DEFAULT_TEMPLATES};
use rand::Rng;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn plan(mode: PermutationMode) -> PermutationPlan {
    PermutationPlan {
        mode,
        ..PermutationPlan::default()
    }
}

fn exact_oracle() -> Check {
    let start = Instant::now();
    let f = two_plus_two();
    let r = evaluate(&f.input(), &plan(PermutationMode::Exact)).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let (hits, count) = naive_exact_p(&f);
    ensure((r.d - 1.1094).abs() <= 1e-4, || format!("d = {}", r.d))?;
    ensure(r.p == 1.0 / 3.0, || format!("p = {}", r.p))?;
    ensure(r.p == hits as f64 / count as f64, || {
        format!("naive enumerator gives {hits}/{count}")
    })?;
    ensure(elapsed < Duration::from_secs(1), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!("d = {:.6}, p = {hits}/{count}, {elapsed:?}", r.d))
}

fn extremal_bound() -> Check {
    let start = Instant::now();
    let r = evaluate(&one_plus_one().input(), &plan(PermutationMode::Exact))
        .map_err(|e| e.to_string())?;
    ensure(r.d == 2.0, || format!("1+1 d = {}", r.d))?;
    ensure(r.p == 0.5, || format!("1+1 p = {}", r.p))?;
    let mut rng = rng(101);
    let mut max_abs: f64 = 0.0;
    let mut evaluated = 0;
    for _ in 0..10_000 {
        let n = rng.gen_range(1..=6);
        if let Ok(d) = effect_size(&random_fixture(&mut rng, n).input()) {
            ensure(d.abs() <= 2.0, || format!("|d| = {} > 2", d.abs()))?;
            max_abs = max_abs.max(d.abs());
            evaluated += 1;
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(30), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!(
        "1+1 d = 2, p = 0.5; max |d| = {max_abs:.6} over {evaluated} instances, {elapsed:?}"
    ))
}

fn antisymmetry_and_scale() -> Check {
    let mut rng = rng(202);
    let (mut worst_anti, mut worst_scale): (f64, f64) = (0.0, 0.0);
    for _ in 0..1_000 {
        let n = rng.gen_range(1..=6);
        let f = random_fixture(&mut rng, n);
        let input = f.input();
        let Ok(d) = effect_size(&input) else { continue };
        let swapped = effect_size(&input.swap_targets()).map_err(|e| e.to_string())?;
        worst_anti = worst_anti.max((d + swapped).abs());

        let mut sets = [f.x.clone(), f.y.clone(), f.a.clone(), f.b.clone()];
        let which = rng.gen_range(0..4);
        let idx = rng.gen_range(0..sets[which].len());
        let c: f64 = rng.gen_range(1e-3..1e3);
        sets[which][idx].iter_mut().for_each(|v| *v *= c);
        let [x, y, a, b] = sets;
        let scaled = effect_size(&EatInput::new(x, y, a, b).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        worst_scale = worst_scale.max((d - scaled).abs());
    }
    ensure(worst_anti <= 1e-12, || {
        format!("antisymmetry error {worst_anti:e}")
    })?;
    ensure(worst_scale < 1e-9, || {
        format!("scale error {worst_scale:e}")
    })?;
    Ok(format!(
        "max |d+d'| = {worst_anti:e}, max scale drift = {worst_scale:e}"
    ))
}

fn monte_carlo_convergence() -> Check {
    let mut rng = rng(303);
    let mut fixtures = vec![two_plus_two(), one_plus_one()];
    for n in 1..=6 {
        for _ in 0..4 {
            fixtures.push(random_fixture(&mut rng, n));
        }
    }
    let mc = PermutationPlan {
        mode: PermutationMode::MonteCarlo,
        samples: 10_000,
        ..PermutationPlan::default()
    };
    let mut worst: f64 = 0.0;
    for f in &fixtures {
        let input = f.input();
        let exact = evaluate(&input, &plan(PermutationMode::Exact))
            .map_err(|e| e.to_string())?
            .p;
        let ps: Vec<f64> = [1, 2, 8]
            .iter()
            .map(|&t| with_threads(t, || evaluate(&input, &mc).map(|r| r.p)))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        ensure(ps.iter().all(|p| p.to_bits() == ps[0].to_bits()), || {
            format!("worker-dependent p: {ps:?}")
        })?;
        worst = worst.max((ps[0] - exact).abs());
    }
    ensure(worst <= 0.03, || format!("max |p_mc - p_exact| = {worst}"))?;
    Ok(format!(
        "{} fixtures, max |p_mc - p_exact| = {worst:.4}, identical across 1/2/8 workers",
        fixtures.len()
    ))
}

fn prompt_grid() -> Check {
    let expected = [
        "[stimulus]",
        "a [stimulus]",
        "a photo of a [stimulus]",
        "an image of a [stimulus]",
        "a picture of a [stimulus]",
    ];
    ensure(DEFAULT_TEMPLATES == expected, || {
        format!("templates {DEFAULT_TEMPLATES:?}")
    })?;
    let catalog = ResolvedCatalog::builtin(Catalog::EmotionAngry);
    ensure(catalog.templates.templates() == expected, || {
        "catalog templates differ".into()
    })?;
    let (a, b) = catalog
        .grids(ExpandOptions::default())
        .map_err(|e| e.to_string())?;
    ensure(a.len() == 30 && b.len() == 30, || {
        format!("{} A and {} B prompts", a.len(), b.len())
    })?;
    let texts: Vec<&str> = a.texts().chain(b.texts()).collect();
    for want in [
        "angry person",
        "a photo of a angry human being",
        "an image of a individual",
        "a picture of a adult",
    ] {
        ensure(texts.contains(&want), || format!("missing prompt {want:?}"))?;
    }
    Ok("30 A + 30 B prompts, 5 templates verbatim".into())
}

fn caption_analytics() -> Check {
    // 200 captions in "women", 50 in "men". "smile" appears 100 times overall,
    // "smiley" 99 times; "sad" 150 times.
    let mut groups: BTreeMap<String, Vec<String>> = BTreeMap::new();
    let women: Vec<String> = (0..200)
        .map(|i| {
            let mut c = String::from("a woman");
            if i < 70 {
                c.push_str(" with a smile");
            }
            if i < 80 {
                c.push_str(" smiley");
            }
            if i < 120 {
                c.push_str(", sad");
            }
            c
        })
        .collect();
    let men: Vec<String> = (0..50)
        .map(|i| {
            let mut c = String::from("A man");
            if i < 30 {
                c.push_str(" SMILE");
            }
            if i < 19 {
                c.push_str(" smiley");
            }
            if i < 30 {
                c.push_str(" sad!");
            }
            c
        })
        .collect();
    groups.insert("women".into(), women);
    groups.insert("men".into(), men);
    let corpus = CaptionCorpus::new(groups).map_err(|e| e.to_string())?;
    let report = emotion_rates(&corpus, &Lexicon::builtins(), 100);

    ensure(report.retained_words.contains("smile"), || {
        "count-100 word dropped".into()
    })?;
    ensure(report.dropped_words.get("smiley") == Some(&99), || {
        format!("dropped: {:?}", report.dropped_words)
    })?;
    let rate = |group: &str, emotion: &str| {
        report
            .rates
            .iter()
            .find(|r| r.group == group && r.emotion == emotion)
            .map(|r| r.rate_per_1000)
    };
    let expected = [
        ("women", "happiness", 350.0),
        ("men", "happiness", 600.0),
        ("women", "sadness", 600.0),
        ("men", "sadness", 600.0),
        ("women", "anger", 0.0),
        ("men", "anger", 0.0),
    ];
    for (g, e, want) in expected {
        ensure(rate(g, e) == Some(want), || {
            format!("{g}/{e}: {:?}, want {want}", rate(g, e))
        })?;
    }
    Ok("6 planted rates exact; count 99 dropped, count 100 retained".into())
}

fn ratings() -> Check {
    let labels = (0..100).map(|i| ("girls", Rating::Flag(i < 47)));
    let rates = group_rates(labels).map_err(|e| e.to_string())?;
    let g = rates.groups["girls"];
    ensure(g.percent() == 47.0 && g.percent_text() == "47.0", || {
        format!("{} / {}", g.percent(), g.percent_text())
    })?;

    for (name, want) in [
        ("hentai", true),
        ("sexy", true),
        ("pornographic", true),
        ("neutral", false),
        ("drawing", false),
    ] {
        let label: CategoryLabel = name
            .parse()
            .map_err(|e: eat_audit::ratings::RatingError| e.to_string())?;
        ensure(Rating::Category(label).is_sexualized() == want, || {
            format!("{name} mapped wrongly")
        })?;
    }

    let table = |rows: &[(&str, [u8; 4])]| {
        let records: Vec<LabelRecord> = rows
            .iter()
            .flat_map(|(rater, scores)| {
                scores.iter().enumerate().map(move |(i, s)| LabelRecord {
                    image_id: format!("img{i}"),
                    group: "g".into(),
                    rater: rater.to_string(),
                    rating: Rating::Flag(*s == 1),
                })
            })
            .collect();
        RatingTable::from_records(&records).map_err(|e| e.to_string())
    };
    let fixture = table(&[
        ("r1", [1, 1, 0, 0]),
        ("r2", [1, 0, 0, 0]),
        ("r3", [1, 1, 0, 1]),
    ])?;
    let alpha = cronbach_alpha(&fixture).map_err(|e| e.to_string())?;
    ensure((alpha - 0.75).abs() <= 1e-12, || format!("alpha = {alpha}"))?;
    let same = table(&[
        ("r1", [1, 0, 1, 0]),
        ("r2", [1, 0, 1, 0]),
        ("r3", [1, 0, 1, 0]),
    ])?;
    let unanimous = cronbach_alpha(&same).map_err(|e| e.to_string())?;
    ensure((unanimous - 1.0).abs() <= 1e-12, || {
        format!("identical raters alpha = {unanimous}")
    })?;
    Ok(format!(
        "47/100 -> {}%, labels mapped, alpha = {alpha}, identical = {unanimous}",
        g.percent_text()
    ))
}

fn format_fidelity() -> Check {
    let mut rng = rng(404);
    let shapes = [(1, 1), (3, 7), (64, 512), (1_000, 1_024)];
    for &(rows, dim) in &shapes {
        for dtype in [DType::Float32, DType::Float64] {
            let m = match dtype {
                DType::Float32 => {
                    let data: Vec<f32> = (0..rows * dim)
                        .map(|_| rng.gen_range(-1e3f32..1e3))
                        .collect();
                    EmbeddingMatrix::from_f32(rows, dim, &data)
                }
                DType::Float64 => {
                    let data: Vec<f64> =
                        (0..rows * dim).map(|_| rng.gen_range(-1e3..1e3)).collect();
                    EmbeddingMatrix::from_f64(rows, dim, data)
                }
            }
            .map_err(|e| e.to_string())?;
            let bytes = write_npy(&m);
            let back = parse_npy(&bytes).map_err(|e| e.to_string())?;
            ensure(
                back.rows() == rows && back.dim() == dim && back.dtype() == dtype,
                || "shape or dtype changed".into(),
            )?;
            let same = m
                .data()
                .iter()
                .zip(back.data())
                .all(|(a, b)| a.to_bits() == b.to_bits());
            ensure(same, || format!("{rows}x{dim} {dtype:?} not bit-exact"))?;
            ensure(write_npy(&back) == bytes, || "re-encoding differs".into())?;
        }
    }
    let starred = ReportCell::new(1.09, 0.003).text();
    let plain = ReportCell::new(0.26, 0.12).text();
    ensure(starred == "1.09*", || format!("got {starred:?}"))?;
    ensure(plain == "0.26", || format!("got {plain:?}"))?;
    Ok(format!(
        "{} shapes x 2 dtypes bit-exact; cells {starred:?} and {plain:?}",
        shapes.len()
    ))
}

fn main() {
    let checks: [Criterion; 8] = [
        ("exact permutation oracle", exact_oracle),
        ("extremal bound", extremal_bound),
        ("antisymmetry and scale invariance", antisymmetry_and_scale),
        ("monte carlo convergence", monte_carlo_convergence),
        ("prompt grid", prompt_grid),
        ("caption analytics", caption_analytics),
        ("ratings", ratings),
        ("format fidelity", format_fidelity),
    ];
    let mut failed = 0;
    for (name, check) in checks {
        match check() {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        checks.len() - failed,
        checks.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
