fn main() {
    std::process::exit(linkdyn_cli::run(std::env::args_os()));
}
