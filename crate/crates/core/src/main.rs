use clap::Parser;

fn main() {
    // REALIZE_THREADS caps the worker pool; 0 or unset picks the default.
    if let Ok(v) = std::env::var("REALIZE_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            if n > 0 {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global()
                    .ok();
            }
        }
    }
    let cli = realize::cli::Cli::parse();
    std::process::exit(realize::cli::run(cli));
}
