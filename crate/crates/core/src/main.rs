fn main() {
    std::process::exit(qrhull::cli::run(std::env::args_os()));
}
