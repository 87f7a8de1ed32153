fn main() {
    std::process::exit(utiv::cli::run(std::env::args_os()));
}
