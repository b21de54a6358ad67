#pragma once

#include <vector>

#include <Eigen/Dense>

namespace splab {

/// Delayed-effect weights of one unit: c[t] = sum_{k>t} beta[k]^T prod_{j=t+1}^{k-1} B[j]
/// (0-based t), so the last entry is always zero.
struct CarryoverChain {
  std::vector<Eigen::VectorXd> c;
};

/// `betas[t]` are the outcome coefficients on the state and `Bs[t]` the state
/// transition matrices of intervals t = 0..M-1 (Bs[M-1] is never used). The
/// chain is accumulated right to left: c[M-1] = 0, c[t] = beta[t+1] + B[t+1]^T c[t+1].
CarryoverChain carryover(const std::vector<Eigen::VectorXd>& betas, const std::vector<Eigen::MatrixXd>& Bs, int M);

}  // namespace splab
