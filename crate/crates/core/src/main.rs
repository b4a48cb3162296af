fn main() {
    std::process::exit(tetrislab::cli::main(std::env::args_os()));
}
