#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "geonav/cli.hpp"
#include "geonav/config.hpp"
#include "geonav/synthetic_field.hpp"

using namespace geonav;

namespace {

const char* kCoeffPath = GEONAV_DATA_DIR "/igrf13coeffs.txt";

std::filesystem::path repo_root() {
    return std::filesystem::path(GEONAV_DATA_DIR).parent_path();
}

std::filesystem::path fresh_dir(const char* name) {
    auto dir = std::filesystem::temp_directory_path() / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

// tiny linear-field run config for fast CLI-level tests
std::string desk_mini_json(const std::filesystem::path& out_dir, int episodes) {
    std::ostringstream s;
    s << R"({
      "seed": 3,
      "output_dir": ")" << out_dir.string() << R"(",
      "epoch": 2020.0,
      "region": {"lat_min": -5.6, "lat_max": -4.4, "lon_min": 164.4, "lon_max": 165.6},
      "field": {"type": "linear", "base_d_deg": 8.0, "base_i_deg": -16.0, "base_bh_nt": 35400.0,
                "d_slope_deg_per_km_x": 0.00035, "d_slope_deg_per_km_y": 0.00012,
                "i_slope_deg_per_km_x": 0.00023, "i_slope_deg_per_km_y": 0.00172,
                "bh_slope_nt_per_km_x": -0.45, "bh_slope_nt_per_km_y": 0.4},
      "env": {"l_max_m": 15000.0},
      "td3": {"hidden": [8, 8], "batch_size": 16, "warmup_steps": 40,
              "buffer_capacity": 4000, "episodes": )" << episodes << R"(,
              "checkpoint_interval": 0, "log_window": 5},
      "tasks": {"count": 4, "min_separation_m": 30000.0, "max_separation_m": 90000.0},
      "baselines": {"ga": {"population": 6, "iterations": 3},
                    "pso": {"population": 5, "iterations": 3},
                    "afsa": {"population": 4, "iterations": 2}}
    })";
    return s.str();
}

std::filesystem::path write_config(const std::filesystem::path& dir, const std::string& text) {
    auto path = dir / "config.json";
    std::ofstream(path) << text;
    return path;
}

}  // namespace

TEST_CASE("run config parses fields and applies defaults") {
    RunConfig c = RunConfig::from_json_text(R"({
        "seed": 42,
        "region": {"lat_min": -3.0, "lat_max": 2.0, "lon_min": 100.0, "lon_max": 110.0},
        "reward": {"zeta3": 0.0},
        "td3": {"hidden": [32, 32], "episodes": 123},
        "env": {"heading_pair": "D,BH"}
    })");
    CHECK(c.seed == 42);
    CHECK(c.region.lat_min_deg == -3.0);
    CHECK(c.env.reward.zeta3 == 0.0);
    CHECK(c.env.reward.zeta1 == 200.0);  // default
    CHECK(c.td3.hidden_dims == std::vector<int>{32, 32});
    CHECK(c.episodes == 123);
    CHECK(c.td3.gamma == 0.995);
    CHECK(c.env.heading_pair.first == FieldParam::kDeclination);
    CHECK(c.env.heading_pair.second == FieldParam::kHorizontalIntensity);
    CHECK(c.tasks.region.lat_min_deg == -3.0);  // region propagates
    CHECK_NOTHROW(c.validate_all());
}

TEST_CASE("validation lists every violated field") {
    RunConfig c = RunConfig::from_json_text(R"({
        "region": {"lat_min": 5.0, "lat_max": -5.0, "lon_min": 0.0, "lon_max": 10.0},
        "reward": {"zeta1": 1.0, "zeta2": 10.0},
        "td3": {"gamma": 1.5, "policy_delay": 0},
        "tasks": {"min_separation_m": -3.0},
        "field": {"type": "hexagonal"}
    })");
    try {
        c.validate_all();
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.violations().size() >= 5);
        std::string all = e.what();
        CHECK(all.find("region") != std::string::npos);
        CHECK(all.find("reward") != std::string::npos);
        CHECK(all.find("td3") != std::string::npos);
        CHECK(all.find("field.type") != std::string::npos);
    }
}

TEST_CASE("shipped configuration files are valid") {
    RunConfig paper = RunConfig::from_json_file(repo_root() / "configs/paper.json");
    CHECK_NOTHROW(paper.validate_all());
    CHECK(paper.td3.hidden_dims == std::vector<int>{512, 512, 512});
    CHECK(paper.episodes == 20000);
    CHECK(paper.tasks.min_separation_m == 300000.0);
    RunConfig desk = RunConfig::from_json_file(repo_root() / "configs/desk.json");
    CHECK_NOTHROW(desk.validate_all());
    CHECK(desk.field.type == "linear");
    // the desk region spans ~150 km per axis
    LocalFrame frame(desk.region.center());
    double height = (desk.region.lat_max_deg - desk.region.lat_min_deg) * kMetersPerDegree;
    CHECK(height == doctest::Approx(150000.0).epsilon(0.01));
}

TEST_CASE("coefficient path resolution order") {
    RunConfig c;
    c.coefficients = "config_path.txt";
    unsetenv("GEONAV_IGRF_FILE");
    CHECK(c.resolve_coefficients() == "config_path.txt");
    setenv("GEONAV_IGRF_FILE", "env_path.txt", 1);
    CHECK(c.resolve_coefficients() == "env_path.txt");
    CHECK(c.resolve_coefficients("cli_path.txt") == "cli_path.txt");
    unsetenv("GEONAV_IGRF_FILE");
}

TEST_CASE("model construction covers all field types") {
    RunConfig c;
    c.coefficients = kCoeffPath;
    c.field.type = "igrf";
    auto igrf = c.make_model();
    CHECK(dynamic_cast<const IgrfModel*>(igrf.get()) != nullptr);
    c.field.type = "dipole";
    auto dip = c.make_model();
    CHECK(dynamic_cast<const AxialDipoleModel*>(dip.get()) != nullptr);
    c.field.type = "linear";
    auto lin = c.make_model();
    auto* linear = dynamic_cast<const LinearElementField*>(lin.get());
    REQUIRE(linear != nullptr);
    // slopes configured per km arrive per meter
    CHECK(linear->slope(FieldParam::kHorizontalIntensity).gx ==
          doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("cmd_field rejects bad coordinates and prints key=value lines") {
    cli::FieldArgs bad;
    bad.lat = 91.0;
    bad.lon = 0.0;
    CHECK(cli::cmd_field(bad) == cli::kExitUsage);

    cli::FieldArgs ok;
    ok.lat = -2.0;
    ok.lon = 162.0;
    ok.epoch = 2020.0;
    ok.coefficients = kCoeffPath;
    std::ostringstream captured;
    auto* old = std::cout.rdbuf(captured.rdbuf());
    int code = cli::cmd_field(ok);
    std::cout.rdbuf(old);
    CHECK(code == cli::kExitOk);
    std::istringstream lines(captured.str());
    std::string line;
    int kv = 0;
    double d_deg = 0.0;
    while (std::getline(lines, line)) {
        auto eq = line.find('=');
        REQUIRE(eq != std::string::npos);
        ++kv;
        if (line.substr(0, eq) == "D_deg") d_deg = std::stod(line.substr(eq + 1));
    }
    CHECK(kv >= 16);
    CHECK(std::abs(d_deg - 8.019) < 0.5);
}

TEST_CASE("cmd_grid writes the documented CSV and reruns byte-identically") {
    auto dir = fresh_dir("geonav_cli_grid");
    cli::GridArgs args;
    args.lat_min = -10.0;
    args.lat_max = 0.0;
    args.lon_min = 160.0;
    args.lon_max = 170.0;
    args.resolution = 11;
    args.epoch = 2020.0;
    args.coefficients = kCoeffPath;
    args.out_path = (dir / "grid.csv").string();
    REQUIRE(cli::cmd_grid(args) == cli::kExitOk);
    std::string first = slurp(dir / "grid.csv");
    std::istringstream lines(first);
    std::string header;
    std::getline(lines, header);
    CHECK(header == "lat,lon,D_deg,I_deg,BH_nT,BF_nT");
    int rows = 0;
    std::string line;
    while (std::getline(lines, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 121);

    REQUIRE(cli::cmd_grid(args) == cli::kExitOk);
    CHECK(slurp(dir / "grid.csv") == first);

    cli::GridArgs bad = args;
    bad.resolution = 1;
    CHECK(cli::cmd_grid(bad) == cli::kExitUsage);
    std::filesystem::remove_all(dir);
}

TEST_CASE("cmd_train writes logs, checkpoints, and resumes numbering") {
    auto dir = fresh_dir("geonav_cli_train");
    auto out1 = dir / "run";
    auto cfg = write_config(dir, desk_mini_json(out1, 10));

    cli::TrainArgs args;
    args.config_path = cfg.string();
    std::ostringstream captured;
    auto* old = std::cout.rdbuf(captured.rdbuf());
    int code = cli::cmd_train(args);
    std::cout.rdbuf(old);
    REQUIRE(code == cli::kExitOk);
    std::string log = slurp(out1 / "training_log.csv");
    std::istringstream lines(log);
    std::string header;
    std::getline(lines, header);
    CHECK(header == "episode,steps,return,success,window_return,window_sr");
    int rows = 0;
    std::string line;
    std::string first_col_last;
    while (std::getline(lines, line)) {
        if (line.empty()) continue;
        ++rows;
        first_col_last = line.substr(0, line.find(','));
    }
    CHECK(rows == 10);
    CHECK(first_col_last == "10");
    CHECK(std::filesystem::exists(out1 / "checkpoint_final.bin"));

    SUBCASE("resume continues the episode numbering") {
        cli::TrainArgs resume = args;
        resume.resume_checkpoint = (out1 / "checkpoint_final.bin").string();
        resume.episodes = 5;
        std::ostringstream cap2;
        auto* o2 = std::cout.rdbuf(cap2.rdbuf());
        REQUIRE(cli::cmd_train(resume) == cli::kExitOk);
        std::cout.rdbuf(o2);
        std::string log2 = slurp(out1 / "training_log.csv");
        std::istringstream l2(log2);
        std::getline(l2, header);
        int total = 0;
        std::string last;
        while (std::getline(l2, line)) {
            if (line.empty()) continue;
            ++total;
            last = line.substr(0, line.find(','));
        }
        CHECK(total == 15);
        CHECK(last == "15");
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("cmd_train with zeta3 zero runs the plain ablation") {
    auto dir = fresh_dir("geonav_cli_plain");
    auto cfg = write_config(dir, desk_mini_json(dir / "plain", 3));
    cli::TrainArgs args;
    args.config_path = cfg.string();
    args.zeta3 = 0.0;
    std::ostringstream captured;
    auto* old = std::cout.rdbuf(captured.rdbuf());
    int code = cli::cmd_train(args);
    std::cout.rdbuf(old);
    CHECK(code == cli::kExitOk);
    CHECK(std::filesystem::exists(dir / "plain/training_log.csv"));
    std::filesystem::remove_all(dir);
}

TEST_CASE("cmd_benchmark runs the metaheuristics and cmd_replay recomputes") {
    auto dir = fresh_dir("geonav_cli_bench");
    auto out = dir / "bench";
    auto cfg = write_config(dir, desk_mini_json(out, 3));
    cli::BenchmarkArgs args;
    args.config_path = cfg.string();
    args.methods = "ga,pso,afsa";
    std::ostringstream captured;
    auto* old = std::cout.rdbuf(captured.rdbuf());
    int code = cli::cmd_benchmark(args);
    std::cout.rdbuf(old);
    REQUIRE(code == cli::kExitOk);
    std::string table = slurp(out / "comparison.csv");
    std::istringstream lines(table);
    std::string header;
    std::getline(lines, header);
    CHECK(header == "method,SR,TL_m,SPL,TNT_steps");
    int rows = 0;
    std::string line;
    while (std::getline(lines, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 3);

    cli::ReplayArgs rargs;
    rargs.dir = out.string();
    std::ostringstream cap2;
    auto* o2 = std::cout.rdbuf(cap2.rdbuf());
    CHECK(cli::cmd_replay(rargs) == cli::kExitOk);
    std::cout.rdbuf(o2);
    CHECK(std::filesystem::exists(out / "replay_metrics.csv"));

    SUBCASE("unknown method is a usage error") {
        cli::BenchmarkArgs bad = args;
        bad.methods = "ga,annealing";
        std::ostringstream cap3;
        auto* o3 = std::cout.rdbuf(cap3.rdbuf());
        CHECK(cli::cmd_benchmark(bad) == cli::kExitUsage);
        std::cout.rdbuf(o3);
    }
    std::filesystem::remove_all(dir);
}
