#include "geonav/geodesy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace geonav {

double wrap_angle(double radians) {
    double w = std::remainder(radians, 2.0 * kPi);
    if (w == -kPi) w = kPi;
    return w;
}

double angular_distance(double a_rad, double b_rad) {
    return std::abs(std::remainder(a_rad - b_rad, 2.0 * kPi));
}

double normalize_longitude(double lon_deg) {
    double w = std::remainder(lon_deg, 360.0);
    if (w == -180.0) w = 180.0;
    return w;
}

GeoPosition GeoPosition::make(double lat_deg, double lon_deg, double alt_km) {
    if (!std::isfinite(lat_deg) || !std::isfinite(lon_deg) || !std::isfinite(alt_km)) {
        throw std::invalid_argument("position components must be finite");
    }
    if (lat_deg < -90.0 || lat_deg > 90.0) {
        throw std::invalid_argument("latitude " + std::to_string(lat_deg) +
                                    " outside [-90, 90]");
    }
    return GeoPosition{lat_deg, normalize_longitude(lon_deg), alt_km};
}

void Region::validate() const {
    if (!(lat_min_deg < lat_max_deg) || !(lon_min_deg < lon_max_deg)) {
        throw std::invalid_argument("region is empty");
    }
    if (lat_min_deg < -90.0 || lat_max_deg > 90.0) {
        throw std::invalid_argument("region latitude bounds outside [-90, 90]");
    }
    if (lat_min_deg <= -89.999999 || lat_max_deg >= 89.999999) {
        throw std::invalid_argument("region touches a pole");
    }
    if (lon_min_deg < -180.0 || lon_max_deg > 360.0) {
        throw std::invalid_argument("region longitude bounds outside [-180, 360]");
    }
}

bool Region::contains(const GeoPosition& pos) const {
    if (pos.latitude_deg < lat_min_deg || pos.latitude_deg > lat_max_deg) return false;
    // Accept both (-180, 180] and [0, 360) conventions for the region bounds.
    double lon = pos.longitude_deg;
    if (lon >= lon_min_deg && lon <= lon_max_deg) return true;
    double alt = lon < 0.0 ? lon + 360.0 : lon - 360.0;
    return alt >= lon_min_deg && alt <= lon_max_deg;
}

GeoPosition Region::center() const {
    return GeoPosition::make(0.5 * (lat_min_deg + lat_max_deg),
                             0.5 * (lon_min_deg + lon_max_deg));
}

LocalFrame::LocalFrame(const GeoPosition& anchor)
    : anchor_(anchor),
      m_per_deg_lon_(kMetersPerDegree * std::cos(anchor.latitude_deg * kDegToRad)) {}

LocalXY LocalFrame::to_local(const GeoPosition& pos) const {
    double dlon = pos.longitude_deg - anchor_.longitude_deg;
    if (dlon > 180.0) dlon -= 360.0;
    if (dlon <= -180.0) dlon += 360.0;
    return LocalXY{dlon * m_per_deg_lon_,
                   (pos.latitude_deg - anchor_.latitude_deg) * kMetersPerDegree};
}

GeoPosition LocalFrame::to_geo(double x_m, double y_m) const {
    double lat = anchor_.latitude_deg + y_m / kMetersPerDegree;
    lat = std::clamp(lat, -90.0, 90.0);
    double lon = anchor_.longitude_deg + x_m / m_per_deg_lon_;
    return GeoPosition{lat, normalize_longitude(lon), anchor_.altitude_km};
}

double LocalFrame::distance_m(const GeoPosition& a, const GeoPosition& b) const {
    LocalXY pa = to_local(a);
    LocalXY pb = to_local(b);
    return std::hypot(pa.x - pb.x, pa.y - pb.y);
}

}  // namespace geonav
