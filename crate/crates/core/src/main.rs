fn main() {
    std::process::exit(barrierlens::cli::main(std::env::args_os()));
}
