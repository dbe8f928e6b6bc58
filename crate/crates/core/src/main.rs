fn main() {
    std::process::exit(carnot_ld::cli::run(std::env::args_os()));
}
