fn main() {
    std::process::exit(spadlink::harness::cli::cli_entry(std::env::args_os()));
}
