#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "negkb/error.hpp"
#include "negkb/text.hpp"

namespace negkb {

struct ScoredConcept {
  std::string name;
  double score = 0.0;

  bool operator==(const ScoredConcept&) const = default;
};

/// Cosine of two nonzero vectors; raw vectors, no prior normalization.
template <typename DerivedA, typename DerivedB>
auto cosine(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  return a.dot(b) / (a.norm() * b.norm());
}

/// Dense concept vectors, one row per concept. Every row shares one dimension,
/// is finite, and is nonzero.
template <typename Scalar>
class EmbeddingStore {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  EmbeddingStore() = default;

  /// `names` are normalized; duplicates after normalization throw.
  EmbeddingStore(std::vector<std::string> names, Matrix vectors)
      : names_(std::move(names)), vectors_(std::move(vectors)) {
    if (static_cast<Eigen::Index>(names_.size()) != vectors_.rows()) {
      throw std::invalid_argument("embedding store: name/row count mismatch");
    }
    if (!names_.empty() && vectors_.cols() < 1) {
      throw std::invalid_argument("embedding store: dimension must be >= 1");
    }
    for (std::size_t i = 0; i < names_.size(); ++i) {
      names_[i] = normalize(names_[i]);
      if (!row_.emplace(names_[i], static_cast<Eigen::Index>(i)).second) {
        throw std::invalid_argument("embedding store: duplicate concept " + names_[i]);
      }
    }
    if (!vectors_.allFinite()) throw std::invalid_argument("embedding store: non-finite value");
    norms_ = vectors_.rowwise().norm();
    for (Eigen::Index i = 0; i < norms_.size(); ++i) {
      if (norms_(i) == Scalar(0)) {
        throw std::invalid_argument("embedding store: zero vector for " +
                                    names_[static_cast<std::size_t>(i)]);
      }
    }
  }

  std::size_t size() const { return names_.size(); }
  Eigen::Index dimension() const { return vectors_.cols(); }
  bool contains(std::string_view concept_name) const { return row_.find(concept_name) != row_.end(); }
  const std::vector<std::string>& names() const { return names_; }
  const Matrix& vectors() const { return vectors_; }

  auto vector(std::string_view concept_name) const { return vectors_.row(index_of(concept_name)); }

  double similarity(std::string_view a, std::string_view b) const {
    auto ia = index_of(a);
    auto ib = index_of(b);
    return static_cast<double>(vectors_.row(ia).dot(vectors_.row(ib)) / (norms_(ia) * norms_(ib)));
  }

  /// Cosine of `target` against every row, in row order.
  Vector cosines(std::string_view target) const {
    auto t = index_of(target);
    Vector dots = vectors_ * vectors_.row(t).transpose();
    return dots.cwiseQuotient(norms_ * norms_(t));
  }

  Eigen::Index index_of(std::string_view concept_name) const {
    auto it = row_.find(concept_name);
    if (it == row_.end()) throw UnknownConceptError(std::string(concept_name));
    return it->second;
  }

 private:
  std::vector<std::string> names_;
  Matrix vectors_;
  Vector norms_;
  std::map<std::string, Eigen::Index, std::less<>> row_;
};

using ConceptEmbeddings = EmbeddingStore<float>;

/// Every other stored concept by cosine descending, ties by name ascending.
template <typename Scalar>
std::vector<ScoredConcept> rank_by_similarity(const EmbeddingStore<Scalar>& store,
                                              std::string_view target) {
  const auto t = store.index_of(target);
  const auto sims = store.cosines(target);
  std::vector<ScoredConcept> out;
  out.reserve(store.size() - 1);
  for (Eigen::Index i = 0; i < sims.size(); ++i) {
    if (i == t) continue;
    out.push_back({store.names()[static_cast<std::size_t>(i)], static_cast<double>(sims(i))});
  }
  std::sort(out.begin(), out.end(), [](const ScoredConcept& a, const ScoredConcept& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.name < b.name;
  });
  return out;
}

/// Text embedding file: optional `<count> <dim>` header, then
/// `token v1 ... vd` per line. Underscores in tokens become spaces. A
/// concept repeated after normalization keeps its first vector.
template <typename Scalar>
EmbeddingStore<Scalar> load_embeddings(std::istream& in) {
  std::vector<std::string> names;
  std::vector<Scalar> values;
  std::map<std::string, bool, std::less<>> seen;
  Eigen::Index dim = -1;
  std::string line;
  std::size_t number = 0;
  bool first_data_line = true;
  while (std::getline(in, line)) {
    ++number;
    std::istringstream fields(line);
    std::string token;
    if (!(fields >> token)) continue;
    std::vector<Scalar> row;
    std::string cell;
    while (fields >> cell) {
      char* end = nullptr;
      double v = std::strtod(cell.c_str(), &end);
      if (end != cell.c_str() + cell.size()) {
        throw Error("embedding file line " + std::to_string(number) + ": bad number '" + cell + "'");
      }
      row.push_back(static_cast<Scalar>(v));
    }
    if (first_data_line) {
      first_data_line = false;
      bool header = row.size() == 1 &&
                    std::all_of(token.begin(), token.end(), [](char c) { return c >= '0' && c <= '9'; });
      if (header) {
        dim = static_cast<Eigen::Index>(row[0]);
        if (dim < 1) throw Error("embedding file header declares dimension < 1");
        continue;
      }
    }
    if (row.empty()) throw Error("embedding file line " + std::to_string(number) + ": no values");
    if (dim < 0) dim = static_cast<Eigen::Index>(row.size());
    if (static_cast<Eigen::Index>(row.size()) != dim) {
      throw Error("embedding file line " + std::to_string(number) + ": expected " +
                  std::to_string(dim) + " values, got " + std::to_string(row.size()));
    }
    bool nonzero = false;
    for (Scalar v : row) {
      if (!std::isfinite(static_cast<double>(v))) {
        throw Error("embedding file line " + std::to_string(number) + ": non-finite value");
      }
      nonzero = nonzero || v != Scalar(0);
    }
    if (!nonzero) throw Error("embedding file line " + std::to_string(number) + ": zero vector");
    std::replace(token.begin(), token.end(), '_', ' ');
    auto name = normalize(token);
    if (name.empty() || !seen.emplace(name, true).second) continue;
    names.push_back(std::move(name));
    values.insert(values.end(), row.begin(), row.end());
  }
  using Matrix = typename EmbeddingStore<Scalar>::Matrix;
  Matrix m = names.empty() ? Matrix(0, std::max<Eigen::Index>(dim, 1))
                           : Matrix(Eigen::Map<const Matrix>(values.data(),
                                                             static_cast<Eigen::Index>(names.size()), dim));
  return EmbeddingStore<Scalar>(std::move(names), std::move(m));
}

template <typename Scalar>
EmbeddingStore<Scalar> load_embeddings_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read embedding file " + path);
  return load_embeddings<Scalar>(in);
}

}  // namespace negkb
