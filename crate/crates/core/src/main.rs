use copcomp::cli;

fn main() {
    let (code, out) = cli::run(std::env::args_os());
    if code == cli::EXIT_INPUT {
        eprint!("{out}");
    } else {
        print!("{out}");
    }
    std::process::exit(code);
}
