fn main() {
    let seed = std::env::var(rmt_lab::cli::SEED_ENV).ok();
    let code = rmt_lab::cli::run(
        std::env::args_os(),
        seed.as_deref(),
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
    );
    std::process::exit(code);
}
