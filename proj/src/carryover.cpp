#include "splab/carryover.hpp"

#include "splab/types.hpp"

namespace splab {

CarryoverChain carryover(const std::vector<Eigen::VectorXd>& betas, const std::vector<Eigen::MatrixXd>& Bs, int M) {
  if (M < 1 || static_cast<int>(betas.size()) < M || static_cast<int>(Bs.size()) < M - 1) {
    throw InvalidInput("carryover needs M >= 1 and M outcome / M-1 transition coefficients");
  }
  const Eigen::Index d = betas[0].size();
  for (int t = 0; t < M; ++t) {
    if (betas[t].size() != d) throw InvalidInput("inconsistent outcome coefficient dimensions");
  }
  for (int t = 1; t < M - 1; ++t) {
    if (Bs[t].rows() != d || Bs[t].cols() != d) throw InvalidInput("inconsistent transition matrix dimensions");
  }
  CarryoverChain chain;
  chain.c.assign(M, Eigen::VectorXd::Zero(d));
  // c_t^T = beta_{t+1}^T + c_{t+1}^T B_{t+1}
  for (int t = M - 2; t >= 0; --t) {
    chain.c[t] = betas[t + 1];
    if (t + 1 < M - 1) chain.c[t] += Bs[t + 1].transpose() * chain.c[t + 1];
  }
  return chain;
}

}  // namespace splab
