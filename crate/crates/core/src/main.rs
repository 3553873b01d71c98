fn main() {
    std::process::exit(superdir::cli::run(std::env::args_os()));
}
