fn main() {
    std::process::exit(posmap_cli::run(std::env::args_os()));
}
