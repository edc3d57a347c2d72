fn main() {
    std::process::exit(pinlab::main_with_args(std::env::args_os()));
}
