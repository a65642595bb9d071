fn main() {
    std::process::exit(qcmps::harness::cli::main_with_args(std::env::args_os()));
}
