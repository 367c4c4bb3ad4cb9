#include <doctest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "negkb/error.hpp"
#include "negkb/taxonomy.hpp"
#include "support.hpp"

using namespace negkb;

namespace {

TaxonomyIndex elephant_taxonomy() {
  IngestStats stats;
  return load_taxonomy_file(testing::elephant("taxonomy.tsv"), stats);
}

std::vector<std::string> names_of(const std::vector<Hypernym>& hs) {
  std::vector<std::string> out;
  for (const auto& h : hs) out.push_back(h.name);
  return out;
}

}  // namespace

TEST_CASE("hypernyms are ordered by confidence then name") {
  auto tax = elephant_taxonomy();
  CHECK(names_of(top_hypernyms(tax, "elephant", 5)) ==
        std::vector<std::string>{"larger animal", "land animal", "mammal", "wild mammal",
                                 "herbivorous animal"});
  CHECK(tax.hypernyms_of("elephant").size() == 9);
  CHECK(top_hypernyms(tax, "nobody", 5).empty());
  CHECK_THROWS_AS(top_hypernyms(tax, "elephant", 0), std::invalid_argument);

  std::vector<TaxonEdge> tied{{"x", "b", 0.5}, {"x", "a", 0.5}, {"x", "c", 0.9}};
  TaxonomyIndex t(tied);
  CHECK(names_of(top_hypernyms(t, "x", 3)) == std::vector<std::string>{"c", "a", "b"});
}

TEST_CASE("duplicate edges keep the highest confidence; bad edges are rejected") {
  std::vector<TaxonEdge> dup{{"X", "Y ", 0.2}, {"x", "y", 0.7}};
  TaxonomyIndex t(dup);
  CHECK(t.edge_count() == 1);
  CHECK(t.hypernyms_of("x")[0].confidence == 0.7);

  std::vector<TaxonEdge> loop{{"a", "A", 0.5}};
  CHECK_THROWS_AS(TaxonomyIndex{loop}, std::invalid_argument);
  std::vector<TaxonEdge> range{{"a", "b", 1.5}};
  CHECK_THROWS_AS(TaxonomyIndex{range}, std::invalid_argument);

  std::istringstream in("a\tb\t+0.5\na\tc\tnope\nd\te\t0.1\nd\tf\t0.2\nd\tg\t0.3\n"
                        "d\th\t0.4\nd\ti\t0.4\nd\tj\t0.4\nd\tk\t0.4\nd\tl\t0.4\n");
  IngestStats stats;
  auto loaded = load_taxonomy(in, stats);
  CHECK(stats.malformed == 1);
  CHECK(loaded.contains("a", "b"));
  CHECK_FALSE(loaded.contains("a", "c"));
}

TEST_CASE("sibling predicates on the elephant taxonomy") {
  auto tax = elephant_taxonomy();
  CHECK(shares_hypernym(tax, "elephant", "tiger", 5));
  CHECK(shares_hypernym(tax, "elephant", "horse", 5));
  CHECK_FALSE(shares_hypernym(tax, "elephant", "trunk", 5));
  // robot shares "toy", which sits below elephant's top five
  CHECK_FALSE(shares_hypernym(tax, "elephant", "robot", 5));
  CHECK(shares_hypernym(tax, "elephant", "robot", 6));
  CHECK(isa_related(tax, "african elephant", "elephant"));
  CHECK(isa_related(tax, "elephant", "african elephant"));
  CHECK_FALSE(isa_related(tax, "elephant", "tiger"));
}

TEST_CASE("property: prefix, symmetry and brute-force agreement") {
  testing::Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<TaxonEdge> edges;
    const std::size_t nodes = testing::pick(rng, 2, 12);
    const std::size_t n_edges = testing::pick(rng, 0, 40);
    for (std::size_t i = 0; i < n_edges; ++i) {
      auto a = testing::pick(rng, 0, nodes - 1);
      auto b = testing::pick(rng, 0, nodes - 1);
      if (a == b) continue;
      edges.push_back({"n" + std::to_string(a), "n" + std::to_string(b),
                       static_cast<double>(testing::pick(rng, 0, 4)) / 4.0});
    }
    TaxonomyIndex tax(edges);
    for (std::size_t i = 0; i < nodes; ++i) {
      auto a = "n" + std::to_string(i);
      auto full = top_hypernyms(tax, a, 100);
      for (std::size_t k = 1; k <= 6; ++k) {
        auto top = top_hypernyms(tax, a, k);
        CHECK(std::equal(top.begin(), top.end(), full.begin()));
      }
      for (std::size_t j = 0; j < nodes; ++j) {
        auto b = "n" + std::to_string(j);
        bool oracle_isa = false;
        for (const auto& e : edges) {
          oracle_isa = oracle_isa || (e.hyponym == a && e.hypernym == b) ||
                       (e.hyponym == b && e.hypernym == a);
        }
        CHECK(isa_related(tax, a, b) == oracle_isa);
        CHECK(isa_related(tax, a, b) == isa_related(tax, b, a));
        for (std::size_t k = 1; k <= 4; ++k) {
          CHECK(shares_hypernym(tax, a, b, k) == shares_hypernym(tax, b, a, k));
        }
      }
    }
  }
}
