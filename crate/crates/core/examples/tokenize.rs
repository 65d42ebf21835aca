// Byte-level BPE with the bundled GPT-2 vocabulary.
//
//     cargo run --example tokenize -- "Input: a great film, Label: positive"

use noisyicl::{BpeVocab, Result};

pub fn run_example(text: &str) -> Result<Vec<u32>> {
    let vocab = BpeVocab::gpt2()?;
    let ids = vocab.encode(text);
    println!("{} tokens, {} merges", vocab.vocab_size(), vocab.num_merges());
    println!("{text:?}");
    for &id in &ids {
        println!("  {id:>6}  {:?}", vocab.decode(&[id])?);
    }
    assert_eq!(vocab.decode(&ids)?, text);

    // The space belongs to the following word, so " positive" and
    // "positive" are different tokens.
    for label in ["positive", " positive", " negative"] {
        println!("{label:?} -> {:?}", vocab.encode(label));
    }
    Ok(ids)
}

#[allow(dead_code)]
fn main() -> Result<()> {
    let text = std::env::args().nth(1).unwrap_or_else(|| "Input: a great film, Label: positive".into());
    run_example(&text).map(|_| ())
}
