fn main() {
    std::process::exit(sidebands_cli::main_with(std::env::args_os()));
}
