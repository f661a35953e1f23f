fn main() {
    std::process::exit(invsteer_cli::cli_main(std::env::args_os()));
}
