fn main() {
    std::process::exit(ratdyn::cli::run(std::env::args_os()));
}
