fn main() {
    std::process::exit(qwlb::harness::main_with_args(std::env::args_os()));
}
