fn main() {
    std::process::exit(oed::cli::main());
}
