fn main() {
    std::process::exit(uwa_channel::cli::run(std::env::args_os()));
}
