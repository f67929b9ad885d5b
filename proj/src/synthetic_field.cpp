#include "geonav/synthetic_field.hpp"

#include <cmath>
#include <stdexcept>

namespace geonav {

GeomagneticElements elements_from_triple(const ElementsTriple& t) {
    if (!(t.b_h > 0.0) || std::abs(t.i) >= kPi / 2.0) {
        throw FieldError("triple outside representable range (need b_h > 0, |i| < pi/2)");
    }
    GeomagneticElements e;
    e.d = t.d;
    e.i = t.i;
    e.b_h = t.b_h;
    e.b_f = t.b_h / std::cos(t.i);
    e.bx = t.b_h * std::cos(t.d);
    e.by = t.b_h * std::sin(t.d);
    e.bz = e.b_f * std::sin(t.i);
    return e;
}

LinearElementField::LinearElementField(const LocalFrame& frame, ElementsTriple base,
                                       GradientVector d_slope, GradientVector i_slope,
                                       GradientVector bh_slope)
    : frame_(frame), base_(base), d_slope_(d_slope), i_slope_(i_slope), bh_slope_(bh_slope) {}

ElementsTriple LinearElementField::triple_at_local(double x_m, double y_m) const {
    return ElementsTriple{base_.d + d_slope_.gx * x_m + d_slope_.gy * y_m,
                          base_.i + i_slope_.gx * x_m + i_slope_.gy * y_m,
                          base_.b_h + bh_slope_.gx * x_m + bh_slope_.gy * y_m};
}

GeomagneticElements LinearElementField::elements_at(const GeoPosition& pos, double) const {
    LocalXY xy = frame_.to_local(pos);
    return elements_from_triple(triple_at_local(xy.x, xy.y));
}

GradientVector LinearElementField::slope(FieldParam p) const {
    switch (p) {
        case FieldParam::kDeclination: return d_slope_;
        case FieldParam::kInclination: return i_slope_;
        case FieldParam::kHorizontalIntensity: return bh_slope_;
    }
    throw std::invalid_argument("unknown field parameter");
}

FieldVector AxialDipoleModel::field_at(const GeoPosition& pos) const {
    double theta = (90.0 - pos.latitude_deg) * kDegToRad;
    double ar = kReferenceRadiusKm / (kReferenceRadiusKm + pos.altitude_km);
    double ar3 = ar * ar * ar;
    return FieldVector{-g10_ * ar3 * std::sin(theta), 0.0,
                       -2.0 * g10_ * ar3 * std::cos(theta)};
}

GeomagneticElements AxialDipoleModel::elements_at(const GeoPosition& pos, double) const {
    return elements_from_vector(field_at(pos));
}

}  // namespace geonav
