fn main() {
    std::process::exit(nmr_sync::cli::run(std::env::args_os()));
}
