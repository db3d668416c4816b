fn main() {
    std::process::exit(ioncav::cli::run(std::env::args_os()));
}
