#pragma once

#include <array>

namespace spg {

/// Quadrature rules on a triangle, given in barycentric coordinates with
/// weights normalized to sum to 1 (multiply by |T| to integrate).
struct TriQuadPoint {
  std::array<double, 3> bary;
  double weight;
};

/// 3-point edge-midpoint rule, exact for polynomials of degree <= 2.
inline constexpr std::array<TriQuadPoint, 3> kEdgeMidpointRule = {{
    {{0.5, 0.5, 0.0}, 1.0 / 3.0},
    {{0.0, 0.5, 0.5}, 1.0 / 3.0},
    {{0.5, 0.0, 0.5}, 1.0 / 3.0},
}};

/// 6-point rule, exact for polynomials of degree <= 4 (Dunavant order 4).
inline constexpr std::array<TriQuadPoint, 6> kDegree4Rule = {{
    {{0.108103018168070, 0.445948490915965, 0.445948490915965}, 0.223381589678011},
    {{0.445948490915965, 0.108103018168070, 0.445948490915965}, 0.223381589678011},
    {{0.445948490915965, 0.445948490915965, 0.108103018168070}, 0.223381589678011},
    {{0.816847572980459, 0.091576213509771, 0.091576213509771}, 0.109951743655322},
    {{0.091576213509771, 0.816847572980459, 0.091576213509771}, 0.109951743655322},
    {{0.091576213509771, 0.091576213509771, 0.816847572980459}, 0.109951743655322},
}};

inline constexpr int kNumStiffPoints = 3;   // rule used for the a-weighted stiffness term
inline constexpr int kNumReactPoints = 6;   // rule used for reaction and tracking terms

}  // namespace spg
