// Loading a dataset from a config file and carving the seed-42 splits.

use std::io::Write;

use noisyicl::artifacts::prepare_data;
use noisyicl::{DatasetConfig, Result};

pub fn run_example() -> Result<(usize, usize)> {
    let tmp = tempfile::tempdir().expect("temporary directory");
    let dir = tmp.path();

    let csv_path = dir.join("reviews.csv");
    let mut f = std::fs::File::create(&csv_path).expect("create csv");
    writeln!(f, "review,stars").unwrap();
    for i in 0..700 {
        let (text, stars) = if i % 2 == 0 { ("loved it", "5") } else { ("hated it", "1") };
        writeln!(f, "\"{text}, visit {i}\",{stars}").unwrap();
    }
    drop(f);

    let config_path = dir.join("reviews.toml");
    std::fs::write(
        &config_path,
        r#"
name = "reviews"
path = "reviews.csv"
category = "single"
text_field = "review"
label_field = "stars"
labels = ["negative", "positive"]
label_values = ["1", "5"]
"#,
    )
    .unwrap();

    let config = DatasetConfig::from_file(&config_path)?;
    let data = prepare_data(&config)?;
    let (v, t) = (data.split.validation.len(), data.split.test.len());
    println!("{} records -> validation {v}, test {t} (seed {})", data.dataset.len(), data.split_seed);
    println!("first test record: {:?}", data.split.test.records[0]);
    println!("data digest {}", &data.digest[..16]);
    Ok((v, t))
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example().map(|_| ())
}
