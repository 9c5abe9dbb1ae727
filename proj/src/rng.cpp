#include "lowrank/rng.hpp"

namespace lowrank {

Mat random_orthogonal(GaussianStream& rng, Eigen::Index n) {
  const Mat G = rng.matrix(n, n);
  Eigen::HouseholderQR<Mat> qr(G);
  Mat Q = qr.householderQ();
  const Mat& R = qr.matrixQR();
  for (Eigen::Index j = 0; j < n; ++j) {
    if (R(j, j) < 0.0) Q.col(j) *= -1.0;
  }
  return Q;
}

}  // namespace lowrank
