//! Writes a small procedural corpus: `cargo run --example synth -- <dir> [images]`.

use std::path::PathBuf;

use visdet_core::corpus::synthetic::{write_synthetic_corpus, SyntheticSpec};
use visdet_core::corpus::ClassTable;

fn main() {
    let mut args = std::env::args().skip(1);
    let root = PathBuf::from(args.next().unwrap_or_else(|| "synthetic".into()));
    let images = args.next().map_or(20, |n| n.parse().expect("image count"));
    let spec = SyntheticSpec {
        images,
        ..SyntheticSpec::default()
    };
    match write_synthetic_corpus(&root, &ClassTable::kiit_mita(), &spec) {
        Ok(manifest) => println!("{}", manifest.display()),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(1);
        }
    }
}
