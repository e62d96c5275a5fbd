use std::process;

fn main() {
    process::exit(wiretap_jscc::cli::run(std::env::args_os()));
}
