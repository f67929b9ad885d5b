#pragma once

#include <numbers>

namespace geonav {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kDegToRad = kPi / 180.0;
inline constexpr double kRadToDeg = 180.0 / kPi;

/// Mean radius of the spherical Earth used throughout, km.
inline constexpr double kReferenceRadiusKm = 6371.2;

/// Meters per degree of latitude on the reference sphere (and per degree of
/// longitude at the equator).
inline constexpr double kMetersPerDegree = 111320.0;

/// Wraps an angle into (-pi, pi].
double wrap_angle(double radians);

/// Absolute angular separation of two directions, in [0, pi].
double angular_distance(double a_rad, double b_rad);

/// Maps a longitude into (-180, 180].
double normalize_longitude(double lon_deg);

struct GeoPosition {
    double latitude_deg = 0.0;   // north positive, [-90, 90]
    double longitude_deg = 0.0;  // east positive, (-180, 180]
    double altitude_km = 0.0;    // above the reference sphere

    /// Validates latitude and normalizes longitude; throws std::invalid_argument
    /// on latitude outside [-90, 90] or non-finite input.
    static GeoPosition make(double lat_deg, double lon_deg, double alt_km = 0.0);
};

/// Axis-aligned latitude/longitude rectangle.
struct Region {
    double lat_min_deg = 0.0;
    double lat_max_deg = 0.0;
    double lon_min_deg = 0.0;
    double lon_max_deg = 0.0;

    /// Throws std::invalid_argument if empty, out of bounds, or touching a pole.
    void validate() const;
    bool contains(const GeoPosition& pos) const;
    GeoPosition center() const;
};

struct LocalXY {
    double x = 0.0;  // meters east of the anchor
    double y = 0.0;  // meters north of the anchor
};

/// Equirectangular tangent plane anchored at a fixed reference position.
/// The longitude scale is frozen at the anchor latitude, so the mapping is an
/// exact affine bijection between (lat, lon) and (x, y).
class LocalFrame {
public:
    LocalFrame() = default;
    explicit LocalFrame(const GeoPosition& anchor);

    const GeoPosition& anchor() const { return anchor_; }
    double meters_per_deg_lat() const { return kMetersPerDegree; }
    double meters_per_deg_lon() const { return m_per_deg_lon_; }

    LocalXY to_local(const GeoPosition& pos) const;
    GeoPosition to_geo(double x_m, double y_m) const;
    GeoPosition to_geo(const LocalXY& xy) const { return to_geo(xy.x, xy.y); }

    /// Straight-line separation of two geographic points in frame meters.
    double distance_m(const GeoPosition& a, const GeoPosition& b) const;

private:
    GeoPosition anchor_;
    double m_per_deg_lon_ = kMetersPerDegree;
};

}  // namespace geonav
