#pragma once

#include <cmath>
#include <optional>

namespace mmblock {

struct Vec2
{
    double x = 0;
    double y = 0;

    friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend constexpr Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
    friend constexpr bool operator==(Vec2, Vec2) = default;
};

constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 v) { return std::hypot(v.x, v.y); }

struct SegmentHit
{
    double s; ///< parameter along the first segment, in [0, 1)
    double u; ///< parameter along the second segment, in [0, 1]
};

/// Intersection of segments [a0, a1) and [b0, b1]. The first segment is
/// half-open so a path split into consecutive pieces reports a crossing
/// once. Parallel and collinear segments never intersect.
inline std::optional<SegmentHit> intersect(Vec2 a0, Vec2 a1, Vec2 b0, Vec2 b1)
{
    Vec2 const da = a1 - a0;
    Vec2 const db = b1 - b0;
    double const denom = cross(da, db);
    if (denom == 0.0)
        return std::nullopt;
    Vec2 const w = b0 - a0;
    double const s = cross(w, db) / denom;
    double const u = cross(w, da) / denom;
    if (s >= 0.0 && s < 1.0 && u >= 0.0 && u <= 1.0)
        return SegmentHit{s, u};
    return std::nullopt;
}

} // namespace mmblock
