fn main() {
    std::process::exit(snowpac::cli::main_with_args(std::env::args_os()));
}
