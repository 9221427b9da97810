fn main() {
    std::process::exit(negtype::cli::run(std::env::args_os()));
}
