fn main() {
    std::process::exit(eat_audit::cli::main());
}
