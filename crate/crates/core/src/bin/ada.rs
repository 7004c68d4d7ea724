fn main() {
    std::process::exit(ada_asqp::cli::run(std::env::args_os()));
}
