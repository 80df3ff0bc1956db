fn main() {
    std::process::exit(gfrac::cli::run(std::env::args_os()));
}
