fn main() {
    std::process::exit(panel_rectify::cli::run(std::env::args_os()));
}
