fn main() { std::process::exit(hopftrees::cli::run()); }
