#ifndef XLQA_GRADCHECK_HPP
#define XLQA_GRADCHECK_HPP

#include <cstdint>
#include <string>

namespace xlqa::gradcheck {

// |analytic - numeric| / max(1, |analytic|, |numeric|): relative for large
// gradients, absolute for small ones.
double relative_error(double analytic, double numeric);

struct Result {
  double max_rel_error = 0.0;
  std::size_t coords_checked = 0;
  std::string worst_tensor;
};

// Builds a random (config, sentence pair, alignment) scenario with
// hidden_dim <= 16 and <= 2 layers, then compares the exact gradients of the
// alignment objective against central finite differences (step 1e-5).
// max_coords_per_tensor == 0 checks every coordinate of every tensor.
Result check_alignment_objective(std::uint64_t seed, int max_coords_per_tensor = 0);

}  // namespace xlqa::gradcheck

#endif  // XLQA_GRADCHECK_HPP
