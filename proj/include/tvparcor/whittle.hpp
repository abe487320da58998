#pragma once

// Whittle's (multivariate Durbin–Levinson) recursion between PARCOR matrices
// and VAR coefficient matrices, applied pointwise in time.

#include <vector>

#include "tvparcor/lattice.hpp"

namespace tvparcor {

struct TvvarCoefficients {
  int order = 0;
  int k = 0;
  IndexRange range;
  std::vector<std::vector<Matrix>> forward;   // [t - range.lo][j-1] = A_{t,j}
  std::vector<std::vector<Matrix>> backward;  // [t - range.lo][j-1] = D_{t,j}; may be empty

  const std::vector<Matrix>& at(int t) const {
    return forward.at(static_cast<std::size_t>(t - range.lo));
  }
};

namespace whittle {

struct VarPair {
  std::vector<Matrix> forward;   // A_1..A_P
  std::vector<Matrix> backward;  // D_1..D_P
};

/// PARCOR matrices (Λ_1..Λ_P, Θ_1..Θ_P) at one time point to VAR coefficients.
VarPair parcor_to_var(const std::vector<Matrix>& lambda, const std::vector<Matrix>& theta);

struct ParcorPair {
  std::vector<Matrix> lambda;
  std::vector<Matrix> theta;
};

/// Inverse of parcor_to_var. Throws SingularStage when a down-step system has
/// condition number above kMaxCondition.
ParcorPair var_to_parcor(const std::vector<Matrix>& forward, const std::vector<Matrix>& backward);

inline constexpr double kMaxCondition = 1e12;

/// Applies parcor_to_var on the common range [P, T-1-P] of all stages.
TvvarCoefficients parcor_to_tvvar(const ParcorFit& fit);

/// Per-t inverse; result is [t - coeffs.range.lo] → stages.
std::vector<ParcorPair> tvvar_to_parcor(const TvvarCoefficients& coeffs);

}  // namespace whittle
}  // namespace tvparcor
