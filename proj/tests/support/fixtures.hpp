#pragma once

// Return matrices of the three worked examples.

#include <optf/ingest.hpp>

namespace optf::test {

// 6 periods x 4 systems; row 6 is the simultaneous biggest loss of all systems.
inline ReturnMatrix example1() {
  Matrix t(6, 4);
  t << 2, 1, -1, 1,
       2, -0.5, 2, -1,
       -0.5, 1, -1, 2,
       1, 2, 2, -1,
       -0.5, -0.5, 2, 1,
       -1, -1, -1, -1;
  return ReturnMatrix(t);
}

// 5 periods x 2 systems with biggest losses 6/5 and 3/2.
inline ReturnMatrix example2() {
  Matrix t(5, 2);
  t << -3, 3,
       9, 12,
       6, -3,
       -6, 1.5,
       3, -7.5;
  return ReturnMatrix(t / 5.0);
}

// example2 plus a third system returning (1, 1, 1, -1, -1).
inline ReturnMatrix example3() {
  Matrix t(5, 3);
  t.leftCols(2) = example2().entries();
  t.col(2) << 1, 1, 1, -1, -1;
  return ReturnMatrix(t);
}

inline const char* example1_csv() {
  return "S1,S2,S3,S4\n"
         "2,1,-1,1\n"
         "2,-0.5,2,-1\n"
         "-0.5,1,-1,2\n"
         "1,2,2,-1\n"
         "-0.5,-0.5,2,1\n"
         "-1,-1,-1,-1\n";
}

}  // namespace optf::test
