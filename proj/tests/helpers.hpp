#pragma once

#include <vector>

#include "hpl/calculus.hpp"
#include "oracle.hpp"

namespace testing {

inline hpl::Point pt(double a, double b, double c) { return (hpl::Point(3) << a, b, c).finished(); }
inline hpl::Point pt(const oracle::Vec3& v) { return pt(v[0], v[1], v[2]); }
inline oracle::Vec3 vec(const hpl::Point& p) { return {p[0], p[1], p[2]}; }

inline std::vector<hpl::Point> points(const std::vector<oracle::Vec3>& vs) {
  std::vector<hpl::Point> out;
  for (const auto& v : vs) out.push_back(pt(v));
  return out;
}

}  // namespace testing
