fn main() {
    std::process::exit(gnlfr::cli::run(std::env::args_os()));
}
