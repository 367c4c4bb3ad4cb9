#include "negkb/siblings.hpp"

#include <algorithm>
#include <random>

#include "negkb/text.hpp"

namespace negkb {

std::vector<std::string> SiblingSet::names() const {
  std::vector<std::string> out;
  out.reserve(siblings.size());
  for (const auto& s : siblings) out.push_back(s.name);
  return out;
}

bool SiblingSet::contains(std::string_view name) const {
  return std::any_of(siblings.begin(), siblings.end(),
                     [&](const ScoredConcept& s) { return s.name == name; });
}

SiblingSet random_siblings(const KbIndex& kb, std::string_view target, std::size_t gamma,
                           std::uint64_t seed) {
  SiblingSet out;
  out.target = std::string(target);
  out.gamma = gamma;
  std::vector<std::string> pool;
  for (const auto& [c, _] : kb.by_concept()) {
    if (c != target) pool.push_back(c);
  }
  // mt19937_64's output sequence is fixed by the standard; distributions are
  // not, so the partial Fisher-Yates below draws indices by hand.
  std::mt19937_64 rng(fnv1a64(target, seed ^ 0x9e3779b97f4a7c15ULL));
  const auto take = std::min(gamma, pool.size());
  for (std::size_t i = 0; i < take; ++i) {
    auto j = i + static_cast<std::size_t>(rng() % (pool.size() - i));
    std::swap(pool[i], pool[j]);
    out.siblings.push_back({pool[i], 0.0});
  }
  out.scanned = take;
  return out;
}

}  // namespace negkb
