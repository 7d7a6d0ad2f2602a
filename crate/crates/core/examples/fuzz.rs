//! Differential fuzzing of every semantic/epistemic pair.

use epiflow::harness::{fuzz_equivalences, generate_program, FuzzConfig, Pair};

fn main() {
    let cfg = FuzzConfig {
        seed: 42,
        count: 50,
        ..FuzzConfig::default()
    };
    let (src, policy) = generate_program(&cfg, 0, Pair::NidAkd);
    println!("sample program: {src}\nsample policy:\n{}", policy.render());
    let summary = fuzz_equivalences(&cfg);
    print!("{}", summary.render());
    assert!(summary.is_clean());
}
