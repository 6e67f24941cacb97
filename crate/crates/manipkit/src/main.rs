fn main() {
    std::process::exit(manipkit::cli::run(std::env::args_os()));
}
