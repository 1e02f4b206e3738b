fn main() {
    std::process::exit(ddkelly_cli::run(std::env::args_os()));
}
