// Prints the block diagnostics of the counterexample construction for a few
// prime ranges: union and sums of lambda(E_n), sum of lambda(A_n).

#include <cstdio>

#include "dslab/dsgen.hpp"

int main() {
  using namespace dslab;
  struct block {
    unsigned k;
    std::uint64_t N0, N1;
  };
  for (auto [k, N0, N1] : {block{3, 3, 8}, block{4, 3, 12}, block{5, 2, 14}, block{6, 11, 20}}) {
    for (auto variant : {ds_variant::full, ds_variant::refined}) {
      auto fam = build_family(k, N0, N1, variant);
      auto d = family_diagnostics(fam);
      std::printf("k=%u primes [%llu,%llu) %-7s N=%llu  union_E=%s  sum_E=%s  sum_A=%s  %s\n", k,
                  static_cast<unsigned long long>(N0), static_cast<unsigned long long>(N1), to_string(variant),
                  static_cast<unsigned long long>(fam.N), to_string(d.union_E).c_str(), to_string(d.sum_E).c_str(),
                  to_string(d.sum_A).c_str(), d.consistent ? "closed forms agree" : "CLOSED FORMS DISAGREE");
    }
  }
}
