fn main() {
    std::process::exit(qgrad::cli::run(std::env::args_os()));
}
