// The three few-shot templates and the query-less probe prompt.

use noisyicl::prompt::{build_prompt, build_queryless_prompt, PromptOptions};
use noisyicl::{Category, Result, TaskRecord};

pub fn run_example() -> Result<Vec<String>> {
    let labels = vec!["negative".to_string(), "positive".to_string()];
    let opts = PromptOptions::default();
    let mut out = Vec::new();

    let demos = [TaskRecord::single("a gripping, funny film", 1), TaskRecord::single("two hours I will not get back", 0)];
    let refs: Vec<&TaskRecord> = demos.iter().collect();
    let single = build_prompt(&refs, &TaskRecord::single("a quiet triumph", 1), &labels, Category::Single, opts)?;
    out.push(single.text);

    let aspect_demo = TaskRecord::aspect("the pasta was superb", "food", 1);
    let aspect = build_prompt(
        &[&aspect_demo],
        &TaskRecord::aspect("we waited an hour", "service", 0),
        &labels,
        Category::Aspect,
        opts,
    )?;
    out.push(aspect.text);

    let nli = vec!["no".to_string(), "yes".to_string()];
    let pair = build_prompt(&[], &TaskRecord::pair("a man sleeps", "a person rests", 1), &nli, Category::Pair, opts)?;
    out.push(pair.text);

    let probe = build_queryless_prompt(&refs, &labels, Category::Single, opts)?;
    out.push(probe.text);

    for p in &out {
        println!("{p}\n---");
    }
    Ok(out)
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example().map(|_| ())
}
