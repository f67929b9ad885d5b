#include "geonav/trace.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "geonav/csv.hpp"

namespace geonav {

double EpisodeTrace::path_length_m() const {
    double total = 0.0;
    for (std::size_t k = 1; k < rows.size(); ++k) {
        total += std::hypot(rows[k].x_m - rows[k - 1].x_m, rows[k].y_m - rows[k - 1].y_m);
    }
    return total;
}

LocalXY EpisodeTrace::final_position() const {
    if (rows.empty()) throw std::logic_error("empty trace");
    return LocalXY{rows.back().x_m, rows.back().y_m};
}

void EpisodeTrace::write_csv(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write trace file: " + path.string());
    out << kCsvHeader << "\n";
    for (const TraceRow& r : rows) {
        out << r.step << ',' << csv::format_double(r.lat_deg) << ','
            << csv::format_double(r.lon_deg) << ',' << csv::format_double(r.x_m) << ','
            << csv::format_double(r.y_m) << ',' << csv::format_double(r.theta_rad) << ','
            << csv::format_double(r.distance_m) << ',' << csv::format_double(r.yaw_rad) << ','
            << csv::format_double(r.objective) << ',' << csv::format_double(r.reward) << ','
            << csv::format_double(r.lambda_prime_rad) << ',' << (r.done ? 1 : 0) << ','
            << (r.success ? 1 : 0) << "\n";
    }
}

EpisodeTrace EpisodeTrace::read_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open trace file: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty trace file: " + path.string());
    EpisodeTrace trace;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto f = csv::split_line(line);
        if (f.size() != 13) {
            throw std::runtime_error("bad trace row in " + path.string() + ": " + line);
        }
        TraceRow r;
        r.step = static_cast<int>(csv::parse_double(f[0]));
        r.lat_deg = csv::parse_double(f[1]);
        r.lon_deg = csv::parse_double(f[2]);
        r.x_m = csv::parse_double(f[3]);
        r.y_m = csv::parse_double(f[4]);
        r.theta_rad = csv::parse_double(f[5]);
        r.distance_m = csv::parse_double(f[6]);
        r.yaw_rad = csv::parse_double(f[7]);
        r.objective = csv::parse_double(f[8]);
        r.reward = csv::parse_double(f[9]);
        r.lambda_prime_rad = csv::parse_double(f[10]);
        r.done = csv::parse_double(f[11]) != 0.0;
        r.success = csv::parse_double(f[12]) != 0.0;
        trace.rows.push_back(r);
    }
    return trace;
}

}  // namespace geonav
