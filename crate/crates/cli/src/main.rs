fn main() {
    std::process::exit(bovirial_cli::main_with(std::env::args_os()));
}
