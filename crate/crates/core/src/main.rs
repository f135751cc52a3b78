fn main() {
    std::process::exit(fractal_filter::cli::run(std::env::args_os()));
}
