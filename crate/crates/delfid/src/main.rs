fn main() {
    std::process::exit(delfid::cli::run());
}
