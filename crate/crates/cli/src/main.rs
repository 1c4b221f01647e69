fn main() {
    std::process::exit(cldbs_cli::execute(std::env::args_os()));
}
