fn main() {
    std::process::exit(itlog_cli::main_with_args(std::env::args_os()));
}
