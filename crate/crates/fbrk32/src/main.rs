fn main() {
    std::process::exit(fbrk32::cli::run_cli(std::env::args_os()));
}
