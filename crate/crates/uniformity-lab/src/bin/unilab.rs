//! Thin entry point; all logic lives in `uniformity_lab::cli`.

fn main() {
    let args: Vec<String> = std::env::args().collect();
    std::process::exit(uniformity_lab::cli::dispatch(&args));
}
