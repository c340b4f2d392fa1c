fn main() {
    std::process::exit(okl_core::cli_io::commands::run(std::env::args_os()));
}
