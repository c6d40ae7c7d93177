#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "persuade/types.hpp"

namespace persuade {

// Monotone sender set-function over the receiver ground set. Three storage
// kinds:
//   table               full value map, bitmask-indexed, n <= 16 only;
//   coverage            weighted coverage of a small universe, submodular and
//                       monotone by construction;
//   concave_cardinality g(|R|) with g(0)=0, non-decreasing, concave
//                       increments; submodular and monotone by construction.
class SetFunction {
 public:
  enum class Kind { kTable, kCoverage, kConcaveCardinality };

  static SetFunction make_table(int receivers, std::vector<double> values);
  static SetFunction make_coverage(int receivers, int universe,
                                   std::vector<std::uint64_t> covers,
                                   std::vector<double> weights);
  static SetFunction make_concave_cardinality(int receivers, std::vector<double> g);

  Kind kind() const { return kind_; }
  int receiver_count() const { return receivers_; }

  // f(R). Table kind throws MalformedInstanceError on an out-of-range mask.
  double value(ReceiverSet r) const;

  // True when submodularity is guaranteed by construction, or was verified
  // exhaustively (tables with n <= 10). nullopt when unknown (large tables).
  std::optional<bool> submodular() const { return submodular_; }

  // Storage access for serialization.
  const std::vector<double>& table_values() const { return table_; }
  int coverage_universe() const { return universe_; }
  const std::vector<std::uint64_t>& coverage_sets() const { return covers_; }
  const std::vector<double>& coverage_weights() const { return weights_; }
  const std::vector<double>& cardinality_values() const { return g_; }

 private:
  SetFunction() = default;

  Kind kind_ = Kind::kTable;
  int receivers_ = 0;
  std::optional<bool> submodular_;

  std::vector<double> table_;  // size 2^n, index = receiver bitmask

  int universe_ = 0;
  std::vector<std::uint64_t> covers_;  // per receiver, bitmask over universe
  std::vector<double> weights_;        // per universe element

  std::vector<double> g_;  // size n + 1
};

// Exhaustive pairwise marginal check f(S+i) - f(S) >= f(S+i+j) - f(S+j).
// Intended for n <= 10; cost is 2^n * n^2 evaluations.
bool check_table_submodular(const std::vector<double>& values, int receivers);

}  // namespace persuade
