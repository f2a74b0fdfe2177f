fn main() {
    std::process::exit(qdmi_stack::cli::main_with_args(std::env::args_os()));
}
