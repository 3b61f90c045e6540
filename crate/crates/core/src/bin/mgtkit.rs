fn main() {
    std::process::exit(mgtkit::cli::main_with(std::env::args_os()));
}
