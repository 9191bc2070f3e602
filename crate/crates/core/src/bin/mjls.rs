fn main() {
    std::process::exit(mjls::cli::run(std::env::args_os()));
}
