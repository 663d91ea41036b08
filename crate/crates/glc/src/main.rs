use glc::cli;

fn main() {
    let argv: Vec<String> = std::env::args().collect();
    let (code, report) = cli::run(&argv);
    print!("{}", cli::render(&argv, code, &report));
    std::process::exit(code);
}
