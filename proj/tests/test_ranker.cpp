#include <doctest.h>

#include <algorithm>
#include <set>

#include "negkb/negation_pipeline.hpp"
#include "negkb/ranker.hpp"
#include "negkb/taxonomy.hpp"
#include "support.hpp"

using namespace negkb;

namespace {

struct Fixture {
  KbIndex kb;
  TaxonomyIndex tax;
  SimilarityCache sim;
  SiblingSet sibs;
  Fixture() {
    IngestStats s1, s2;
    kb = load_kb_file(testing::elephant("kb.tsv"), std::nullopt, s1);
    tax = load_taxonomy_file(testing::elephant("taxonomy.tsv"), s2);
    sim.read_file(testing::elephant("sim_cache.jsonl"));
    sibs.target = "elephant";
    sibs.gamma = 3;
    for (const char* n : {"tiger", "lion", "horse"}) sibs.siblings.push_back({n, 0.0});
  }
  // Candidates surviving the filters on the fixture.
  std::vector<NegationCandidate> survivors() const {
    std::vector<NegationCandidate> out;
    for (auto& c : infer_candidates(kb, sibs)) {
      if (c.phrase == "can jump" || c.phrase == "can leap" || c.phrase == "has hoof") out.push_back(c);
    }
    return out;
  }
};

const NegationCandidate& find(const std::vector<NegationCandidate>& cs, std::string_view phrase) {
  auto it = std::find_if(cs.begin(), cs.end(), [&](const auto& c) { return c.phrase == phrase; });
  REQUIRE(it != cs.end());
  return *it;
}

NegationCandidate scored(std::string phrase, std::size_t strict, std::size_t relaxed, std::size_t gamma) {
  NegationCandidate c;
  c.phrase = std::move(phrase);
  c.strict = SiblingFrequency{strict, gamma};
  c.relaxed = SiblingFrequency{relaxed, gamma};
  return c;
}

}  // namespace

TEST_CASE("fixture scores, merge and provenance") {
  Fixture f;
  auto cands = f.survivors();
  score_candidates(cands, f.sibs, f.kb, f.sim, 0.7, FailMode::fail_closed);
  CHECK(find(cands, "can jump").strict == SiblingFrequency{2, 3});
  CHECK(find(cands, "can leap").strict == SiblingFrequency{1, 3});
  CHECK(find(cands, "has hoof").strict == SiblingFrequency{1, 3});
  CHECK(find(cands, "can jump").relaxed == SiblingFrequency{3, 3});
  CHECK(find(cands, "can jump").relaxed_holders == std::vector<std::string>{"tiger", "lion", "horse"});

  auto merged = merge_near_duplicates(cands, f.sim, 0.7);
  REQUIRE(merged.size() == 2);
  CHECK(merged[0].phrase == "can jump");
  CHECK(merged[0].absorbed == std::vector<std::string>{"can leap"});

  auto ranked = rank(merged, RankMode::strict, 10);
  CHECK(ranked[0].phrase == "can jump");
  CHECK(ranked[1].phrase == "has hoof");
  CHECK(rank(merged, RankMode::strict, 1).size() == 1);
  CHECK_THROWS_AS(rank(merged, RankMode::strict, 0), std::invalid_argument);

  auto prov = generate_provenance(ranked[0].relaxed_holders, f.tax, "elephant");
  REQUIRE(prov.groups.size() == 2);
  CHECK(prov.groups[0] == ProvenanceGroup{"wild mammal", {"tiger", "lion"}, 3});
  CHECK(prov.groups[1] == ProvenanceGroup{"herbivorous animal", {"horse"}, 3});
  CHECK(prov.uncovered.empty());
  CHECK_THROWS_AS(generate_provenance({}, f.tax, "elephant"), std::invalid_argument);

  std::vector<std::string> stranger{"spider"};
  auto none = generate_provenance(stranger, f.tax, "elephant");
  CHECK(none.groups.empty());
  CHECK(none.uncovered == stranger);
}

TEST_CASE("gamma stays nominal and zero gamma is undefined") {
  Fixture f;
  f.sibs.gamma = 30;
  auto cands = f.survivors();
  CHECK(score_strict(find(cands, "can jump"), f.sibs, f.kb) == SiblingFrequency{2, 30});
  f.sibs.gamma = 0;
  CHECK_THROWS_AS(score_strict(cands[0], f.sibs, f.kb), UndefinedScoreError);
}

TEST_CASE("fail-open relaxed scoring falls back to exact matches") {
  Fixture f;
  testing::BrokenSimilarity broken;
  auto cands = f.survivors();
  auto r = score_relaxed(find(cands, "can jump"), f.sibs, f.kb, broken, 0.7, FailMode::fail_open);
  CHECK(r.frequency == SiblingFrequency{2, 3});
  CHECK(r.warnings.size() == 1);  // lion: the only sibling that needed a lookup
  CHECK_THROWS_AS(score_relaxed(find(cands, "can jump"), f.sibs, f.kb, broken, 0.7, FailMode::fail_closed),
                  ProviderError);
}

TEST_CASE("rank breaks ties by the other score, then phrase") {
  std::vector<NegationCandidate> cs{scored("b", 1, 1, 3), scored("a", 1, 1, 3), scored("c", 1, 2, 3),
                                    scored("d", 2, 2, 3)};
  auto strict = rank(cs, RankMode::strict, 10);
  std::vector<std::string> order;
  for (const auto& c : strict) order.push_back(c.phrase);
  CHECK(order == std::vector<std::string>{"d", "c", "a", "b"});
  auto relaxed = rank(cs, RankMode::relaxed, 10);
  order.clear();
  for (const auto& c : relaxed) order.push_back(c.phrase);
  CHECK(order == std::vector<std::string>{"d", "c", "a", "b"});
  CHECK_THROWS_AS(rank({NegationCandidate{}}, RankMode::strict, 3), std::invalid_argument);
}

TEST_CASE("merge representative: relaxed, then strict, then phrase") {
  SimilarityCache sim;
  sim.insert("a", "b", 0.9);
  sim.insert("b", "c", 0.9);
  sim.insert("a", "c", 0.1);
  sim.insert("a", "d", 0.1);
  sim.insert("b", "d", 0.1);
  sim.insert("c", "d", 0.1);
  // a-b-c form one chain; c wins on relaxed
  auto out = merge_near_duplicates({scored("a", 2, 2, 5), scored("b", 1, 2, 5), scored("c", 1, 3, 5),
                                    scored("d", 5, 5, 5)},
                                   sim, 0.7);
  REQUIRE(out.size() == 2);
  CHECK(out[0].phrase == "c");
  CHECK(out[0].absorbed == std::vector<std::string>{"a", "b"});
  CHECK(out[1].phrase == "d");

  auto strict_tie = merge_near_duplicates({scored("a", 1, 3, 5), scored("b", 2, 3, 5)}, sim, 0.7);
  REQUIRE(strict_tie.size() == 1);
  CHECK(strict_tie[0].phrase == "b");
  auto full_tie = merge_near_duplicates({scored("b", 1, 3, 5), scored("a", 1, 3, 5)}, sim, 0.7);
  CHECK(full_tie[0].phrase == "a");
}

TEST_CASE("property: scores, merges, provenance and ranking on random inputs") {
  testing::Rng rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    auto r = testing::random_kb(rng, 14, 6, 12);
    const auto target = r.truth.begin()->first;
    auto sibs = testing::random_sibling_set(rng, r, target);
    negkb::SimilarityCache sim;
    testing::random_similarity(rng, r.phrase_pool, sim);
    const double lambda = static_cast<double>(testing::pick(rng, 6, 20)) * 0.05;

    auto cands = infer_candidates(r.kb, sibs);
    score_candidates(cands, sibs, r.kb, sim, lambda, FailMode::fail_closed);
    for (const auto& c : cands) {
      CHECK(c.strict->hits <= c.relaxed->hits);
      CHECK(c.relaxed->hits <= sibs.gamma);
      CHECK(c.strict->gamma == sibs.gamma);
      for (const auto& h : c.holders) {
        CHECK(std::find(c.relaxed_holders.begin(), c.relaxed_holders.end(), h) != c.relaxed_holders.end());
      }
    }

    auto merged = merge_near_duplicates(cands, sim, lambda);
    CHECK(merged.size() <= cands.size());
    std::multiset<std::string> in, out;
    for (const auto& c : cands) in.insert(c.phrase);
    for (const auto& c : merged) {
      out.insert(c.phrase);
      out.insert(c.absorbed.begin(), c.absorbed.end());
    }
    CHECK(in == out);
    // No two representatives are directly similar.
    for (std::size_t i = 0; i < merged.size(); ++i) {
      for (std::size_t j = i + 1; j < merged.size(); ++j) {
        CHECK(sim.similarity(merged[i].phrase, merged[j].phrase) < lambda);
      }
    }

    // Provenance over a random taxonomy.
    std::vector<TaxonEdge> edges;
    for (const auto& [c, _] : r.truth) {
      for (int e = 0; e < 3; ++e) {
        edges.push_back({c, "class " + std::to_string(testing::pick(rng, 0, 5)),
                         static_cast<double>(testing::pick(rng, 0, 4)) / 4.0});
      }
    }
    TaxonomyIndex tax(edges);
    for (const auto& c : merged) {
      if (c.relaxed_holders.empty()) continue;
      auto prov = generate_provenance(c.relaxed_holders, tax, target);
      std::multiset<std::string> covered;
      double prev = 2.0;
      for (const auto& g : prov.groups) {
        CHECK_FALSE(g.members.empty());
        CHECK(g.holder_count == c.relaxed_holders.size());
        CHECK(g.score() == static_cast<double>(g.members.size()) / static_cast<double>(c.relaxed_holders.size()));
        CHECK(g.score() <= prev);
        prev = g.score();
        for (const auto& m : g.members) {
          CHECK(tax.contains(m, g.hypernym));
          CHECK(tax.contains(target, g.hypernym));
          covered.insert(m);
        }
      }
      for (const auto& u : prov.uncovered) {
        covered.insert(u);
        for (const auto& h : tax.hypernyms_of(target)) CHECK_FALSE(tax.contains(u, h.name));
      }
      CHECK(covered == std::multiset<std::string>(c.relaxed_holders.begin(), c.relaxed_holders.end()));
      CHECK(std::set<std::string>(covered.begin(), covered.end()).size() == covered.size());
    }

    // Ranking ignores input order and uniform rescaling.
    auto mode = testing::pick(rng, 0, 1) ? RankMode::strict : RankMode::relaxed;
    auto ranked = rank(merged, mode, 1000);
    auto shuffled = merged;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    auto again = rank(shuffled, mode, 1000);
    auto rescaled = merged;
    const auto factor = testing::pick(rng, 2, 7);
    for (auto& c : rescaled) {
      c.strict = SiblingFrequency{c.strict->hits * factor, c.strict->gamma * factor};
      c.relaxed = SiblingFrequency{c.relaxed->hits * factor, c.relaxed->gamma * factor};
    }
    auto scaled = rank(rescaled, mode, 1000);
    REQUIRE(ranked.size() == again.size());
    for (std::size_t i = 0; i < ranked.size(); ++i) {
      CHECK(ranked[i].phrase == again[i].phrase);
      CHECK(ranked[i].phrase == scaled[i].phrase);
      if (i > 0) {
        const auto& a = mode == RankMode::strict ? ranked[i - 1].strict : ranked[i - 1].relaxed;
        const auto& b = mode == RankMode::strict ? ranked[i].strict : ranked[i].relaxed;
        CHECK(a->value() >= b->value());
      }
    }
  }
}
