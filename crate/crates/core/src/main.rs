fn main() {
    std::process::exit(bratteli_split::cli::main());
}
