#include "persuade/set_function.hpp"

#include <bit>
#include <cmath>
#include <string>

namespace persuade {

SetFunction SetFunction::make_table(int receivers, std::vector<double> values) {
  if (receivers < 0 || receivers > 16) {
    throw MalformedInstanceError("table set-function requires 0 <= n <= 16");
  }
  if (values.size() != (std::size_t{1} << receivers)) {
    throw MalformedInstanceError("table set-function needs exactly 2^n values, got " +
                                 std::to_string(values.size()));
  }
  SetFunction f;
  f.kind_ = Kind::kTable;
  f.receivers_ = receivers;
  f.table_ = std::move(values);
  if (receivers <= 10) {
    f.submodular_ = check_table_submodular(f.table_, receivers);
  }
  return f;
}

SetFunction SetFunction::make_coverage(int receivers, int universe,
                                       std::vector<std::uint64_t> covers,
                                       std::vector<double> weights) {
  if (universe < 0 || universe > 64) {
    throw MalformedInstanceError("coverage universe must be in [0, 64]");
  }
  if (static_cast<int>(covers.size()) != receivers) {
    throw MalformedInstanceError("coverage needs one cover set per receiver");
  }
  if (static_cast<int>(weights.size()) != universe) {
    throw MalformedInstanceError("coverage needs one weight per universe element");
  }
  SetFunction f;
  f.kind_ = Kind::kCoverage;
  f.receivers_ = receivers;
  f.universe_ = universe;
  f.covers_ = std::move(covers);
  f.weights_ = std::move(weights);
  f.submodular_ = true;
  return f;
}

SetFunction SetFunction::make_concave_cardinality(int receivers, std::vector<double> g) {
  if (static_cast<int>(g.size()) != receivers + 1) {
    throw MalformedInstanceError("concave_cardinality needs n + 1 values");
  }
  SetFunction f;
  f.kind_ = Kind::kConcaveCardinality;
  f.receivers_ = receivers;
  f.g_ = std::move(g);
  f.submodular_ = true;
  return f;
}

double SetFunction::value(ReceiverSet r) const {
  switch (kind_) {
    case Kind::kTable: {
      if (r >= table_.size()) {
        throw MalformedInstanceError("table set-function: subset entry missing");
      }
      return table_[r];
    }
    case Kind::kCoverage: {
      std::uint64_t covered = 0;
      ReceiverSet rest = r;
      while (rest != 0) {
        int i = std::countr_zero(rest);
        covered |= covers_[i];
        rest &= rest - 1;
      }
      double total = 0.0;
      while (covered != 0) {
        int e = std::countr_zero(covered);
        total += weights_[e];
        covered &= covered - 1;
      }
      return total;
    }
    case Kind::kConcaveCardinality:
      return g_[std::popcount(r)];
  }
  return 0.0;  // unreachable
}

bool check_table_submodular(const std::vector<double>& values, int receivers) {
  const std::size_t full = std::size_t{1} << receivers;
  for (ReceiverSet s = 0; s < full; ++s) {
    for (int i = 0; i < receivers; ++i) {
      if (s & (ReceiverSet{1} << i)) continue;
      for (int j = i + 1; j < receivers; ++j) {
        if (s & (ReceiverSet{1} << j)) continue;
        const ReceiverSet si = s | (ReceiverSet{1} << i);
        const ReceiverSet sj = s | (ReceiverSet{1} << j);
        // marginal of i shrinks when j is present
        if (values[si] - values[s] < values[si | sj] - values[sj] - tol::kAffine) {
          return false;
        }
      }
    }
  }
  return true;
}

}  // namespace persuade
