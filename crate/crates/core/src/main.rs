fn main() {
    std::process::exit(scenelang::cli::main());
}
