fn main() {
    std::process::exit(netrec::cli::main_entry());
}
