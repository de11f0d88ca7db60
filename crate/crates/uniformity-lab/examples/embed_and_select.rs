//! JSONL corpus → deterministic hashed-token embeddings → greedy max-min
//! subset.
//!
//! Writes a tiny corpus to a temp file, loads it through the JSONL reader
//! (the same path the `unilab` binary uses), embeds each record by averaging
//! seeded per-token vectors, and picks a maximally spread subset. A record's
//! text is the concatenation of its `instruction`/`input`/`output` fields;
//! records may instead carry a precomputed `vector`, and one below does.
//!
//!     cargo run --example embed_and_select

use std::io::Write;

use uniformity_lab::ingest::{embed_average, load_jsonl, Metric};
use uniformity_lab::selection::greedy_maxmin;

fn main() -> uniformity_lab::Result<()> {
    let corpus = [
        ("doc-0", "summarize the plot", "the quick brown fox jumps over the lazy dog"),
        ("doc-1", "summarize the plot", "the quick brown fox jumps over a lazy dog"),
        ("doc-2", "rewrite formally", "pack my box with five dozen liquor jugs"),
        ("doc-3", "translate to latin", "sphinx of black quartz judge my vow"),
        ("doc-4", "count the verbs", "how vexingly quick daft zebras jump"),
        ("doc-5", "rewrite as a poem", "jackdaws love my big sphinx of quartz"),
        ("doc-6", "extract the numbers", "the five boxing wizards jump quickly"),
        ("doc-7", "summarize the plot", "the quick brown fox jumps over the lazy dog again"),
    ];

    let path = std::env::temp_dir().join("unilab_example_corpus.jsonl");
    let mut file = std::fs::File::create(&path)?;
    for (id, instruction, input) in corpus {
        writeln!(
            file,
            "{}",
            serde_json::json!({ "id": id, "instruction": instruction, "input": input })
        )?;
    }
    // A record can skip the text and ship its own embedding.
    writeln!(
        file,
        "{}",
        serde_json::json!({ "id": "doc-vec", "vector": vec![0.25; 16] })
    )?;
    drop(file);

    let records = load_jsonl(&path)?;
    let ds = embed_average(&records, 16, 7)?;
    println!("embedded {} records into R^{}", ds.len(), ds.dim());

    let k = 4;
    let sel = greedy_maxmin(&ds, k, 7, Metric::Cosine)?;
    println!("\ngreedy max-min picks (cosine metric, k = {k}):");
    for (j, &i) in sel.indices.iter().enumerate() {
        let note = if j == 0 {
            "seed pick".to_string()
        } else {
            // step_min_dist[j-1] is the maximized distance-to-selected of pick j.
            format!("min distance to earlier picks {:.4}", sel.step_min_dist[j - 1])
        };
        println!("  {j}: {:8} — {note}", ds.point(i).id);
    }
    println!("\nnear-duplicates (doc-0 / doc-1 / doc-7) never appear together:");
    println!("  max-min keeps at most one representative of a tight cluster.");

    std::fs::remove_file(&path)?;
    Ok(())
}
