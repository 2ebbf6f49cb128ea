fn main() {
    std::process::exit(ftrlab_cli::cli_main(std::env::args_os()));
}
