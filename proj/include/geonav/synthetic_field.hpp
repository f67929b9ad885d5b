#pragma once

#include "geonav/field_model.hpp"
#include "geonav/geodesy.hpp"

namespace geonav {

/// Analytic field whose navigation elements are globally linear functions of
/// the frame coordinates: value(x, y) = base + gx * x + gy * y. The remaining
/// elements are reconstructed so the seven-element identities hold exactly.
/// Keep |i| away from pi/2 and b_h positive over the area of use.
class LinearElementField final : public GeomagneticModel {
public:
    LinearElementField(const LocalFrame& frame, ElementsTriple base,
                       GradientVector d_slope, GradientVector i_slope,
                       GradientVector bh_slope);

    GeomagneticElements elements_at(const GeoPosition& pos, double epoch) const override;

    ElementsTriple triple_at_local(double x_m, double y_m) const;
    const LocalFrame& frame() const { return frame_; }
    GradientVector slope(FieldParam p) const;

private:
    LocalFrame frame_;
    ElementsTriple base_;
    GradientVector d_slope_, i_slope_, bh_slope_;
};

/// Closed-form axial dipole (only g(1,0) nonzero), evaluated analytically:
///   bx = -g10 (a/r)^3 sin(colat), by = 0, bz = -2 g10 (a/r)^3 cos(colat).
class AxialDipoleModel final : public GeomagneticModel {
public:
    explicit AxialDipoleModel(double g10_nt) : g10_(g10_nt) {}
    GeomagneticElements elements_at(const GeoPosition& pos, double epoch) const override;
    FieldVector field_at(const GeoPosition& pos) const;

private:
    double g10_;
};

/// Expands a navigation triple into full seven elements assuming |i| < pi/2
/// and b_h > 0.
GeomagneticElements elements_from_triple(const ElementsTriple& t);

}  // namespace geonav
