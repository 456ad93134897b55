fn main() {
    std::process::exit(fastlight_cli::run(std::env::args_os()));
}
