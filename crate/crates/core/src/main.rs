fn main() {
    std::process::exit(nonlocal_multisol::cli::run(std::env::args_os()));
}
