fn main() {
    std::process::exit(mpwtsvm::cli::run_main());
}
