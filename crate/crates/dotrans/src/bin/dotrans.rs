fn main() {
    std::process::exit(dotrans::cli::run(std::env::args_os()));
}
