#include "geonav/field_model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace geonav {

namespace {

constexpr double kPoleOffsetDeg = 1e-6;

bool parse_full_double(std::string_view tok, double& out) {
    const char* first = tok.data();
    const char* last = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
}

bool parse_full_int(std::string_view tok, int& out) {
    const char* first = tok.data();
    const char* last = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
}

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> toks;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
        if (i > start) toks.push_back(line.substr(start, i - start));
    }
    return toks;
}

[[noreturn]] void parse_fail(int line_no, const std::string& what) {
    throw ParseError("line " + std::to_string(line_no) + ": " + what);
}

}  // namespace

double element_value(const GeomagneticElements& e, FieldParam p) {
    switch (p) {
        case FieldParam::kDeclination: return e.d;
        case FieldParam::kInclination: return e.i;
        case FieldParam::kHorizontalIntensity: return e.b_h;
    }
    throw std::invalid_argument("unknown field parameter");
}

std::string_view field_param_name(FieldParam p) {
    switch (p) {
        case FieldParam::kDeclination: return "D";
        case FieldParam::kInclination: return "I";
        case FieldParam::kHorizontalIntensity: return "BH";
    }
    return "?";
}

double ElementsTriple::of(FieldParam p) const {
    switch (p) {
        case FieldParam::kDeclination: return d;
        case FieldParam::kInclination: return i;
        case FieldParam::kHorizontalIntensity: return b_h;
    }
    throw std::invalid_argument("unknown field parameter");
}

ElementsTriple triple_from_elements(const GeomagneticElements& e) {
    return ElementsTriple{e.d, e.i, e.b_h};
}

CoefficientSet CoefficientSet::parse(std::string_view text) {
    CoefficientSet set;
    bool have_header = false;
    std::size_t n_epochs = 0;
    int max_degree_seen = 0;

    struct Row {
        bool is_g;
        int n, m;
        std::vector<double> values;  // n_epochs main-field values + sv
        int line_no;
    };
    std::vector<Row> rows;

    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        std::string_view line = text.substr(pos, eol == std::string_view::npos
                                                     ? std::string_view::npos
                                                     : eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++line_no;

        auto toks = split_ws(line);
        if (toks.empty()) continue;
        if (toks[0].front() == '#') continue;
        if (toks[0] == "c/s") continue;  // column-label row
        if (toks[0] == "g/h") {
            // header: "g/h n m <epoch...> <sv-label>"
            if (toks.size() < 5) parse_fail(line_no, "epochs header too short");
            std::vector<double> epochs;
            for (std::size_t k = 3; k + 1 < toks.size(); ++k) {
                double e;
                if (!parse_full_double(toks[k], e))
                    parse_fail(line_no, "bad epoch token '" + std::string(toks[k]) + "'");
                epochs.push_back(e);
            }
            for (std::size_t k = 1; k < epochs.size(); ++k) {
                if (!(epochs[k] > epochs[k - 1]))
                    parse_fail(line_no, "epochs not strictly increasing");
            }
            set.epochs_ = std::move(epochs);
            n_epochs = set.epochs_.size();
            have_header = true;
            continue;
        }
        if (toks[0] == "g" || toks[0] == "h") {
            if (!have_header) throw ParseError("missing epochs header before coefficient rows");
            Row row;
            row.is_g = toks[0] == "g";
            row.line_no = line_no;
            if (toks.size() != 3 + n_epochs + 1)
                parse_fail(line_no, "expected " + std::to_string(3 + n_epochs + 1) +
                                        " tokens, got " + std::to_string(toks.size()));
            if (!parse_full_int(toks[1], row.n) || !parse_full_int(toks[2], row.m))
                parse_fail(line_no, "bad degree/order token");
            if (row.n < 1 || row.m < 0 || row.m > row.n)
                parse_fail(line_no, "degree/order out of range");
            row.values.resize(n_epochs + 1);
            for (std::size_t k = 0; k < n_epochs + 1; ++k) {
                if (!parse_full_double(toks[3 + k], row.values[k]))
                    parse_fail(line_no, "non-numeric value '" + std::string(toks[3 + k]) + "'");
            }
            max_degree_seen = std::max(max_degree_seen, row.n);
            rows.push_back(std::move(row));
            continue;
        }
        parse_fail(line_no, "unrecognized row '" + std::string(toks[0]) + "'");
    }

    if (!have_header) throw ParseError("missing epochs header");
    if (rows.empty()) throw ParseError("no coefficient rows");

    set.max_degree_ = max_degree_seen;
    const std::size_t tsize = set.table_size();
    set.g_.assign(n_epochs, std::vector<double>(tsize, 0.0));
    set.h_.assign(n_epochs, std::vector<double>(tsize, 0.0));
    set.sv_g_.assign(tsize, 0.0);
    set.sv_h_.assign(tsize, 0.0);

    std::vector<char> seen_g(tsize, 0), seen_h(tsize, 0);
    for (const Row& row : rows) {
        std::size_t idx = flat_index(row.n, row.m);
        auto& seen = row.is_g ? seen_g : seen_h;
        if (seen[idx]) parse_fail(row.line_no, "duplicate coefficient row");
        seen[idx] = 1;
        if (!row.is_g && row.m == 0) {
            for (double v : row.values) {
                if (v != 0.0) parse_fail(row.line_no, "h(n,0) must be zero");
            }
        }
        for (std::size_t e = 0; e < n_epochs; ++e) {
            (row.is_g ? set.g_ : set.h_)[e][idx] = row.values[e];
        }
        (row.is_g ? set.sv_g_ : set.sv_h_)[idx] = row.values[n_epochs];
    }

    // completeness: every (n, m) with 1 <= n <= N needs a g row and, for
    // m >= 1, an h row; h(n,0) rows are optional and default to zero.
    for (int n = 1; n <= set.max_degree_; ++n) {
        for (int m = 0; m <= n; ++m) {
            std::size_t idx = flat_index(n, m);
            if (!seen_g[idx])
                throw ParseError("missing g(" + std::to_string(n) + "," + std::to_string(m) + ") row");
            if (m >= 1 && !seen_h[idx])
                throw ParseError("missing h(" + std::to_string(n) + "," + std::to_string(m) + ") row");
        }
    }
    return set;
}

CoefficientSet CoefficientSet::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open coefficient file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

CoefficientSet::CoefficientSet(std::vector<double> epochs, int max_degree,
                               std::vector<std::vector<double>> g_tables,
                               std::vector<std::vector<double>> h_tables,
                               std::vector<double> sv_g, std::vector<double> sv_h)
    : epochs_(std::move(epochs)),
      max_degree_(max_degree),
      g_(std::move(g_tables)),
      h_(std::move(h_tables)),
      sv_g_(std::move(sv_g)),
      sv_h_(std::move(sv_h)) {
    check_invariants();
}

void CoefficientSet::check_invariants() const {
    if (epochs_.empty()) throw std::invalid_argument("coefficient set needs at least one epoch");
    for (std::size_t k = 1; k < epochs_.size(); ++k) {
        if (!(epochs_[k] > epochs_[k - 1]))
            throw std::invalid_argument("epochs must be strictly increasing");
    }
    if (max_degree_ < 1) throw std::invalid_argument("max degree must be >= 1");
    const std::size_t tsize = table_size();
    if (g_.size() != epochs_.size() || h_.size() != epochs_.size())
        throw std::invalid_argument("one coefficient table required per epoch");
    for (std::size_t e = 0; e < epochs_.size(); ++e) {
        if (g_[e].size() != tsize || h_[e].size() != tsize)
            throw std::invalid_argument("coefficient table size mismatch");
        for (int n = 1; n <= max_degree_; ++n) {
            if (h_[e][flat_index(n, 0)] != 0.0)
                throw std::invalid_argument("h(n,0) must be zero");
        }
    }
    if (sv_g_.size() != tsize || sv_h_.size() != tsize)
        throw std::invalid_argument("secular-variation table size mismatch");
}

CoefficientSet CoefficientSet::axial_dipole(double g10_nt, double epoch) {
    CoefficientSet set;
    set.epochs_ = {epoch};
    set.max_degree_ = 1;
    const std::size_t tsize = set.table_size();
    set.g_.assign(1, std::vector<double>(tsize, 0.0));
    set.h_.assign(1, std::vector<double>(tsize, 0.0));
    set.g_[0][flat_index(1, 0)] = g10_nt;
    set.sv_g_.assign(tsize, 0.0);
    set.sv_h_.assign(tsize, 0.0);
    return set;
}

double CoefficientSet::g(std::size_t epoch_index, int n, int m) const {
    return g_.at(epoch_index).at(flat_index(n, m));
}
double CoefficientSet::h(std::size_t epoch_index, int n, int m) const {
    return h_.at(epoch_index).at(flat_index(n, m));
}
double CoefficientSet::sv_g(int n, int m) const { return sv_g_.at(flat_index(n, m)); }
double CoefficientSet::sv_h(int n, int m) const { return sv_h_.at(flat_index(n, m)); }

void CoefficientSet::interpolate(double epoch, std::vector<double>& g_out,
                                 std::vector<double>& h_out) const {
    if (!(epoch >= min_epoch() && epoch <= max_epoch())) {
        throw std::out_of_range("epoch " + std::to_string(epoch) + " outside supported range [" +
                                std::to_string(min_epoch()) + ", " + std::to_string(max_epoch()) + "]");
    }
    const std::size_t tsize = table_size();
    g_out.resize(tsize);
    h_out.resize(tsize);
    if (epoch >= epochs_.back()) {
        double dt = epoch - epochs_.back();
        const auto& g_last = g_.back();
        const auto& h_last = h_.back();
        for (std::size_t k = 0; k < tsize; ++k) {
            g_out[k] = g_last[k] + dt * sv_g_[k];
            h_out[k] = h_last[k] + dt * sv_h_[k];
        }
        return;
    }
    auto it = std::upper_bound(epochs_.begin(), epochs_.end(), epoch);
    std::size_t hi = it == epochs_.begin() ? 1 : static_cast<std::size_t>(it - epochs_.begin());
    if (hi >= epochs_.size()) hi = epochs_.size() - 1;
    std::size_t lo = hi - 1;
    double t = (epoch - epochs_[lo]) / (epochs_[hi] - epochs_[lo]);
    for (std::size_t k = 0; k < tsize; ++k) {
        g_out[k] = g_[lo][k] + t * (g_[hi][k] - g_[lo][k]);
        h_out[k] = h_[lo][k] + t * (h_[hi][k] - h_[lo][k]);
    }
}

FieldVector evaluate_field(const CoefficientSet& coeffs, const GeoPosition& pos,
                           double epoch) {
    thread_local std::vector<double> g_tab, h_tab;
    coeffs.interpolate(epoch, g_tab, h_tab);

    double lat = pos.latitude_deg;
    if (90.0 - std::abs(lat) < kPoleOffsetDeg) {
        lat = std::copysign(90.0 - kPoleOffsetDeg, lat);
    }
    const double theta = (90.0 - lat) * kDegToRad;  // colatitude
    const double phi = pos.longitude_deg * kDegToRad;
    const double r = kReferenceRadiusKm + pos.altitude_km;
    const double ar = kReferenceRadiusKm / r;

    const int nmax = coeffs.max_degree();
    const double ct = std::cos(theta);
    const double st = std::sin(theta);

    // cos(m phi), sin(m phi) by recurrence
    thread_local std::vector<double> cosm, sinm;
    cosm.resize(nmax + 1);
    sinm.resize(nmax + 1);
    cosm[0] = 1.0;
    sinm[0] = 0.0;
    const double cp = std::cos(phi), sp = std::sin(phi);
    for (int m = 1; m <= nmax; ++m) {
        cosm[m] = cosm[m - 1] * cp - sinm[m - 1] * sp;
        sinm[m] = sinm[m - 1] * cp + cosm[m - 1] * sp;
    }

    // Schmidt semi-normalized associated Legendre functions and their
    // theta-derivatives, filled degree by degree:
    //   P(n,n) = sqrt((2n-1)/(2n)) * st * P(n-1,n-1)            (n >= 2)
    //   P(n,m) = ((2n-1) ct P(n-1,m) - sqrt((n-1)^2-m^2) P(n-2,m))
    //            / sqrt(n^2 - m^2)
    // seeded with P(0,0)=1, P(1,0)=ct, P(1,1)=st.
    auto idx = [](int n, int m) { return CoefficientSet::flat_index(n, m); };
    const std::size_t tsize = coeffs.table_size();
    thread_local std::vector<double> p, dp;
    p.assign(tsize, 0.0);
    dp.assign(tsize, 0.0);
    p[idx(0, 0)] = 1.0;
    dp[idx(0, 0)] = 0.0;
    p[idx(1, 0)] = ct;
    dp[idx(1, 0)] = -st;
    p[idx(1, 1)] = st;
    dp[idx(1, 1)] = ct;
    for (int n = 2; n <= nmax; ++n) {
        double dn = n;
        double diag = std::sqrt((2.0 * dn - 1.0) / (2.0 * dn));
        p[idx(n, n)] = diag * st * p[idx(n - 1, n - 1)];
        dp[idx(n, n)] = diag * (ct * p[idx(n - 1, n - 1)] + st * dp[idx(n - 1, n - 1)]);
        for (int m = 0; m < n; ++m) {
            double dm = m;
            double norm = std::sqrt(dn * dn - dm * dm);
            double sub = std::sqrt((dn - 1.0) * (dn - 1.0) - dm * dm);
            double pm2 = (m <= n - 2) ? p[idx(n - 2, m)] : 0.0;
            double dpm2 = (m <= n - 2) ? dp[idx(n - 2, m)] : 0.0;
            p[idx(n, m)] = ((2.0 * dn - 1.0) * ct * p[idx(n - 1, m)] - sub * pm2) / norm;
            dp[idx(n, m)] = ((2.0 * dn - 1.0) * (ct * dp[idx(n - 1, m)] - st * p[idx(n - 1, m)]) -
                             sub * dpm2) / norm;
        }
    }

    // B = -grad(V) with V = a * sum (a/r)^(n+1) sum (g cos + h sin) P.
    // North X = (a/r)^(n+2) * sum (g cos + h sin) dP/dtheta
    // East  Y = (a/r)^(n+2) / sin(theta) * sum m (g sin - h cos) P
    // Down  Z = -(n+1) (a/r)^(n+2) * sum (g cos + h sin) P
    double bx = 0.0, by = 0.0, bz = 0.0;
    double arn = ar * ar;  // (a/r)^(n+2) for n starting at 1
    for (int n = 1; n <= nmax; ++n) {
        arn *= ar;
        double sum_x = 0.0, sum_y = 0.0, sum_z = 0.0;
        for (int m = 0; m <= n; ++m) {
            std::size_t k = idx(n, m);
            double gc = g_tab[k], hc = h_tab[k];
            double trig = gc * cosm[m] + hc * sinm[m];
            sum_x += trig * dp[k];
            sum_z += trig * p[k];
            if (m > 0) sum_y += m * (gc * sinm[m] - hc * cosm[m]) * p[k];
        }
        bx += arn * sum_x;
        by += arn * sum_y;
        bz += -(n + 1.0) * arn * sum_z;
    }
    by /= st;
    return FieldVector{bx, by, bz};
}

GeomagneticElements elements_from_vector(const FieldVector& v) {
    if (!std::isfinite(v.bx) || !std::isfinite(v.by) || !std::isfinite(v.bz)) {
        throw FieldError("field vector has non-finite components");
    }
    GeomagneticElements e;
    e.bx = v.bx;
    e.by = v.by;
    e.bz = v.bz;
    e.b_h = std::hypot(v.bx, v.by);
    e.b_f = std::sqrt(v.bx * v.bx + v.by * v.by + v.bz * v.bz);
    if (e.b_f == 0.0) throw FieldError("degenerate (zero) field vector");
    e.d = std::atan2(v.by, v.bx);
    e.i = std::atan2(v.bz, e.b_h);
    return e;
}

GeomagneticElements IgrfModel::elements_at(const GeoPosition& pos, double epoch) const {
    return elements_from_vector(evaluate_field(coeffs_, pos, epoch));
}

const GradientVector& ElementGradients::of(FieldParam p) const {
    switch (p) {
        case FieldParam::kDeclination: return d;
        case FieldParam::kInclination: return i;
        case FieldParam::kHorizontalIntensity: return b_h;
    }
    throw std::invalid_argument("unknown field parameter");
}

namespace {

// Differences angles with wrap correction so a branch crossing in D does not
// produce a spurious huge gradient.
double element_delta(const GeomagneticElements& plus, const GeomagneticElements& minus,
                     FieldParam p) {
    if (p == FieldParam::kHorizontalIntensity) return plus.b_h - minus.b_h;
    return wrap_angle(element_value(plus, p) - element_value(minus, p));
}

struct Stencil {
    GeomagneticElements east_p, east_m, north_p, north_m;
};

Stencil evaluate_stencil(const GeomagneticModel& model, const LocalFrame& frame,
                         const GeoPosition& pos, double epoch, double step_m) {
    if (step_m <= 0.0) throw std::invalid_argument("gradient step must be positive");
    LocalXY xy = frame.to_local(pos);
    GeoPosition east_p = frame.to_geo(xy.x + step_m, xy.y);
    GeoPosition east_m = frame.to_geo(xy.x - step_m, xy.y);
    GeoPosition north_p = frame.to_geo(xy.x, xy.y + step_m);
    GeoPosition north_m = frame.to_geo(xy.x, xy.y - step_m);
    for (const GeoPosition* p : {&east_p, &east_m, &north_p, &north_m}) {
        if (std::abs(p->latitude_deg) >= 90.0 - 1e-9) {
            throw FieldError("gradient stencil crosses a pole");
        }
    }
    return Stencil{model.elements_at(east_p, epoch), model.elements_at(east_m, epoch),
                   model.elements_at(north_p, epoch), model.elements_at(north_m, epoch)};
}

}  // namespace

GradientVector gradient(const GeomagneticModel& model, const LocalFrame& frame,
                        const GeoPosition& pos, double epoch, FieldParam param,
                        double step_m) {
    Stencil s = evaluate_stencil(model, frame, pos, epoch, step_m);
    return GradientVector{element_delta(s.east_p, s.east_m, param) / (2.0 * step_m),
                          element_delta(s.north_p, s.north_m, param) / (2.0 * step_m)};
}

ElementGradients element_gradients(const GeomagneticModel& model, const LocalFrame& frame,
                                   const GeoPosition& pos, double epoch, double step_m) {
    Stencil s = evaluate_stencil(model, frame, pos, epoch, step_m);
    ElementGradients out;
    const double inv = 1.0 / (2.0 * step_m);
    out.d = {element_delta(s.east_p, s.east_m, FieldParam::kDeclination) * inv,
             element_delta(s.north_p, s.north_m, FieldParam::kDeclination) * inv};
    out.i = {element_delta(s.east_p, s.east_m, FieldParam::kInclination) * inv,
             element_delta(s.north_p, s.north_m, FieldParam::kInclination) * inv};
    out.b_h = {element_delta(s.east_p, s.east_m, FieldParam::kHorizontalIntensity) * inv,
               element_delta(s.north_p, s.north_m, FieldParam::kHorizontalIntensity) * inv};
    return out;
}

std::vector<GridSample> sample_grid(const GeomagneticModel& model, const Region& region,
                                    int lat_points, int lon_points, double epoch) {
    region.validate();
    if (lat_points < 2 || lon_points < 2) {
        throw std::invalid_argument("resolution must be >= 2 points per axis");
    }
    std::vector<GridSample> out;
    out.reserve(static_cast<std::size_t>(lat_points) * lon_points);
    for (int a = 0; a < lat_points; ++a) {
        double lat = region.lat_min_deg +
                     (region.lat_max_deg - region.lat_min_deg) * a / (lat_points - 1);
        for (int b = 0; b < lon_points; ++b) {
            double lon = region.lon_min_deg +
                         (region.lon_max_deg - region.lon_min_deg) * b / (lon_points - 1);
            GeoPosition pos = GeoPosition::make(lat, lon);
            out.push_back(GridSample{pos, model.elements_at(pos, epoch)});
        }
    }
    return out;
}

}  // namespace geonav
