fn main() {
    std::process::exit(hardyck_cli::run(std::env::args_os()));
}
