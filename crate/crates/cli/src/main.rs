fn main() {
    std::process::exit(slitwave_cli::run(std::env::args_os()));
}
