fn main() {
    std::process::exit(threshold_contact::cli::cli_main(std::env::args_os()));
}
