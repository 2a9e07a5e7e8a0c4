fn main() {
    std::process::exit(multimode_squeeze::cli::cli_main(std::env::args_os()));
}
