fn main() {
    std::process::exit(latent_geodesic::cli::run(std::env::args_os()));
}
