fn main() {
    std::process::exit(extrinsiq::cli::main_with_args(std::env::args_os()));
}
