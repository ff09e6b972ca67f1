fn main() {
    std::process::exit(raag_comm::cli::run(std::env::args_os()));
}
