#pragma once

#include <filesystem>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "geonav/geodesy.hpp"

namespace geonav {

/// Raised on malformed coefficient files; the message names the offending line.
class ParseError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Raised when a field evaluation cannot produce meaningful elements.
class FieldError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Magnetic field vector in local geographic axes, nT.
struct FieldVector {
    double bx = 0.0;  // geographic north
    double by = 0.0;  // east
    double bz = 0.0;  // vertically down
};

/// The seven-element decomposition of a field vector. Angles in radians.
struct GeomagneticElements {
    double b_f = 0.0;  // total intensity, nT
    double b_h = 0.0;  // horizontal intensity, nT
    double bx = 0.0;
    double by = 0.0;
    double bz = 0.0;
    double d = 0.0;  // declination, positive east
    double i = 0.0;  // inclination, positive down
};

/// Element selector for gradients and grid extraction.
enum class FieldParam { kDeclination, kInclination, kHorizontalIntensity };

double element_value(const GeomagneticElements& e, FieldParam p);
std::string_view field_param_name(FieldParam p);

/// Triple of the navigation elements (declination, inclination, horizontal
/// intensity); D and I in radians, B_H in nT.
struct ElementsTriple {
    double d = 0.0;
    double i = 0.0;
    double b_h = 0.0;
    double of(FieldParam p) const;
};

ElementsTriple triple_from_elements(const GeomagneticElements& e);

/// Horizontal gradient of a scalar element, per meter in frame coordinates.
struct GradientVector {
    double gx = 0.0;  // east
    double gy = 0.0;  // north
};

/// Immutable table of Schmidt semi-normalized Gauss coefficients for a set of
/// model epochs plus secular variation past the last epoch.
class CoefficientSet {
public:
    /// Parses the official coefficient text layout: '#' comment lines, a
    /// "g/h n m <epochs...> <sv>" header, then one row per coefficient.
    static CoefficientSet parse(std::string_view text);
    static CoefficientSet load(const std::filesystem::path& path);

    /// Builds a set directly from flat tables; used by tests and synthetic
    /// truncations. Tables are indexed by flat_index(n, m), one per epoch.
    CoefficientSet(std::vector<double> epochs, int max_degree,
                   std::vector<std::vector<double>> g_tables,
                   std::vector<std::vector<double>> h_tables,
                   std::vector<double> sv_g, std::vector<double> sv_h);

    /// Single-epoch set with every coefficient zero except g(1,0).
    static CoefficientSet axial_dipole(double g10_nt, double epoch = 2020.0);

    int max_degree() const { return max_degree_; }
    const std::vector<double>& epochs() const { return epochs_; }
    double min_epoch() const { return epochs_.front(); }
    /// Last model epoch plus the five-year secular-variation window.
    double max_epoch() const { return epochs_.back() + 5.0; }

    double g(std::size_t epoch_index, int n, int m) const;
    double h(std::size_t epoch_index, int n, int m) const;
    double sv_g(int n, int m) const;
    double sv_h(int n, int m) const;

    static std::size_t flat_index(int n, int m) {
        return static_cast<std::size_t>(n) * (n + 1) / 2 + m;
    }
    std::size_t table_size() const {
        return flat_index(max_degree_, max_degree_) + 1;
    }

    /// Linear interpolation between epochs; secular-variation extrapolation up
    /// to five years past the last epoch. Throws std::out_of_range otherwise.
    void interpolate(double epoch, std::vector<double>& g_out,
                     std::vector<double>& h_out) const;

private:
    CoefficientSet() = default;
    void check_invariants() const;

    std::vector<double> epochs_;
    int max_degree_ = 0;
    std::vector<std::vector<double>> g_;  // one table per epoch
    std::vector<std::vector<double>> h_;
    std::vector<double> sv_g_;
    std::vector<double> sv_h_;
};

/// Spherical-harmonic synthesis of the internal field on the reference sphere.
/// Returns north/east/down components in nT.
FieldVector evaluate_field(const CoefficientSet& coeffs, const GeoPosition& pos,
                           double epoch);

/// Computes all seven elements from a field vector. Declination uses
/// atan2(by, bx); inclination atan2(bz, b_h). Throws FieldError on a zero vector.
GeomagneticElements elements_from_vector(const FieldVector& v);

/// Anything that can report geomagnetic elements at a position. Implementations
/// are immutable after construction and safe for concurrent evaluation.
class GeomagneticModel {
public:
    virtual ~GeomagneticModel() = default;
    virtual GeomagneticElements elements_at(const GeoPosition& pos,
                                            double epoch) const = 0;
};

class IgrfModel final : public GeomagneticModel {
public:
    explicit IgrfModel(CoefficientSet coeffs) : coeffs_(std::move(coeffs)) {}
    GeomagneticElements elements_at(const GeoPosition& pos,
                                    double epoch) const override;
    const CoefficientSet& coefficients() const { return coeffs_; }

private:
    CoefficientSet coeffs_;
};

/// Central finite difference of one element over +-step_m meters east/north in
/// the given frame. Angle elements are differenced with wrap correction.
GradientVector gradient(const GeomagneticModel& model, const LocalFrame& frame,
                        const GeoPosition& pos, double epoch, FieldParam param,
                        double step_m = 1000.0);

/// Gradients of all three navigation elements from one shared stencil.
struct ElementGradients {
    GradientVector d;
    GradientVector i;
    GradientVector b_h;
    const GradientVector& of(FieldParam p) const;
};
ElementGradients element_gradients(const GeomagneticModel& model,
                                   const LocalFrame& frame, const GeoPosition& pos,
                                   double epoch, double step_m = 1000.0);

struct GridSample {
    GeoPosition pos;
    GeomagneticElements elements;
};

/// Row-major grid of element samples over a region: latitude sweeps from
/// lat_min to lat_max in the outer loop, longitude in the inner loop.
std::vector<GridSample> sample_grid(const GeomagneticModel& model,
                                    const Region& region, int lat_points,
                                    int lon_points, double epoch);

}  // namespace geonav
