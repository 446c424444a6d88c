fn main() {
    std::process::exit(ztedge::cli::main_with_args(std::env::args_os()));
}
