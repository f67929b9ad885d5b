#include <CLI11.hpp>

#include "geonav/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"geonav: geomagnetic navigation simulator and training toolkit"};
    app.require_subcommand(1);

    geonav::cli::FieldArgs field_args;
    CLI::App* field = app.add_subcommand("field", "print the seven elements and gradients at a position");
    field->add_option("--lat", field_args.lat, "latitude, degrees north")->required();
    field->add_option("--lon", field_args.lon, "longitude, degrees east")->required();
    field->add_option("--epoch", field_args.epoch, "decimal year (default 2020.0)");
    field->add_option("--coeffs", field_args.coefficients, "coefficient file path");

    geonav::cli::GridArgs grid_args;
    CLI::App* grid = app.add_subcommand("grid", "export an element grid over a region as CSV");
    grid->add_option("--lat-min", grid_args.lat_min, "south edge, degrees");
    grid->add_option("--lat-max", grid_args.lat_max, "north edge, degrees");
    grid->add_option("--lon-min", grid_args.lon_min, "west edge, degrees");
    grid->add_option("--lon-max", grid_args.lon_max, "east edge, degrees");
    grid->add_option("--resolution", grid_args.resolution, "points per axis (>= 2)");
    grid->add_option("--epoch", grid_args.epoch, "decimal year");
    grid->add_option("--coeffs", grid_args.coefficients, "coefficient file path");
    grid->add_option("--out", grid_args.out_path, "output CSV path");

    geonav::cli::TrainArgs train_args;
    CLI::App* train = app.add_subcommand("train", "train the TD3 navigator");
    train->add_option("--config", train_args.config_path, "run configuration JSON")->required();
    train->add_option("--coeffs", train_args.coefficients, "coefficient file override");
    train->add_option("--out", train_args.output_dir, "output directory override");
    train->add_option("--resume", train_args.resume_checkpoint, "checkpoint to resume from");
    train->add_option("--seed", train_args.seed, "master seed override");
    train->add_option("--episodes", train_args.episodes, "episode count override");
    train->add_option("--zeta3", train_args.zeta3, "alignment weight override (0 = plain TD3)");

    geonav::cli::BenchmarkArgs bench_args;
    CLI::App* bench = app.add_subcommand("benchmark", "run the multi-method navigation benchmark");
    bench->add_option("--config", bench_args.config_path, "run configuration JSON")->required();
    bench->add_option("--coeffs", bench_args.coefficients, "coefficient file override");
    bench->add_option("--out", bench_args.output_dir, "output directory override");
    bench->add_option("--methods", bench_args.methods, "comma-separated methods override");
    bench->add_option("--seed", bench_args.seed, "master seed override");
    bench->add_option("--threads", bench_args.threads, "worker threads (default from config)");

    geonav::cli::ReplayArgs replay_args;
    CLI::App* replay = app.add_subcommand("replay", "recompute metrics from stored traces");
    replay->add_option("--dir", replay_args.dir, "benchmark output directory")->required();
    replay->add_option("--method", replay_args.method, "single method (default: all found)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? geonav::cli::kExitOk : geonav::cli::kExitUsage;
    }

    if (field->parsed()) return geonav::cli::cmd_field(field_args);
    if (grid->parsed()) return geonav::cli::cmd_grid(grid_args);
    if (train->parsed()) return geonav::cli::cmd_train(train_args);
    if (bench->parsed()) return geonav::cli::cmd_benchmark(bench_args);
    if (replay->parsed()) return geonav::cli::cmd_replay(replay_args);
    return geonav::cli::kExitUsage;
}
