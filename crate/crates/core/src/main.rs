fn main() {
    std::process::exit(trollgraph::cli::main_with(std::env::args_os()));
}
