#pragma once

#include "polynet/data.hpp"
#include "polynet/error.hpp"
#include "polynet/geom.hpp"

#include <doctest.h>

#include <algorithm>
#include <functional>
#include <vector>

namespace polynet::test {

// Runs `fn` and checks that it throws polynet::Error with `code`.
inline void require_error(ErrorCode code, const std::function<void()>& fn) {
  bool thrown = false;
  try {
    fn();
  } catch (const Error& e) {
    thrown = true;
    CHECK_MESSAGE(e.code() == code, e.what());
  }
  CHECK_MESSAGE(thrown, "expected error ", to_string(code));
}

// Loops equal up to a cyclic shift.
inline bool same_cycle(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t s = 0; s < a.size(); ++s) {
    bool ok = true;
    for (std::size_t i = 0; i < a.size() && ok; ++i) ok = a[(i + s) % a.size()] == b[i];
    if (ok) return true;
  }
  return false;
}

inline Polyhedron translated(Polyhedron p, const Point3& t) {
  for (auto& v : p.vertices) v += t;
  return p;
}

}  // namespace polynet::test
