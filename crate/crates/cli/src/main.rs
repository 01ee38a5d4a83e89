fn main() {
    std::process::exit(mapcone_cli::run(std::env::args_os()));
}
