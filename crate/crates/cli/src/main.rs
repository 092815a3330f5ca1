fn main() {
    std::process::exit(darkport_cli::run(std::env::args_os()));
}
