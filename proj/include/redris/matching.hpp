#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "redris/rng.hpp"
#include "redris/types.hpp"

namespace redris {

/**
 * @brief Port-switching matrix of a lens surface, stored as a pairing.
 *
 * The dense form is a symmetric 0/1 matrix with zero diagonal in which every
 * row and column has at most one unit entry (exactly one when full). A full
 * matching is a fixed-point-free involution of the K ports; partial matchings
 * (ports left disconnected) arise from port reduction.
 */
class MatchingMatrix {
 public:
  static constexpr int kUnpaired = -1;

  MatchingMatrix() = default;

  /** @brief Creates an all-disconnected matching over K ports (K even, K >= 2). */
  explicit MatchingMatrix(int k) : partner_(check_size(k), kUnpaired) {}

  /** @brief Builds from a partner table; partner[i] = j pairs i with j, -1 leaves i open. */
  static MatchingMatrix from_partner_table(const std::vector<int>& partner) {
    MatchingMatrix m(static_cast<int>(partner.size()));
    for (int i = 0; i < m.size(); ++i) {
      const int j = partner[i];
      if (j == kUnpaired) continue;
      if (j < 0 || j >= m.size() || j == i || partner[j] != i)
        throw std::invalid_argument("MatchingMatrix - from_partner_table: table is not a fixed-point-free involution");
      m.partner_[i] = j;
    }
    return m;
  }

  int size() const { return static_cast<int>(partner_.size()); }

  int partner(int i) const { return partner_.at(i); }

  bool connected(int i) const { return partner_.at(i) != kUnpaired; }

  /** @brief Number of connected ports. Equals the rank of the dense matrix. */
  int connected_ports() const {
    int c = 0;
    for (int p : partner_)
      if (p != kUnpaired) ++c;
    return c;
  }

  bool is_full() const { return connected_ports() == size(); }

  /** @brief Connects two open ports. */
  void connect(int i, int j) {
    check_index(i);
    check_index(j);
    if (i == j) throw std::invalid_argument("MatchingMatrix - connect: a port cannot pair with itself");
    if (partner_[i] != kUnpaired || partner_[j] != kUnpaired)
      throw std::invalid_argument("MatchingMatrix - connect: port already paired");
    partner_[i] = j;
    partner_[j] = i;
  }

  /** @brief Disconnects the pair containing port i (no-op if open). */
  void disconnect(int i) {
    check_index(i);
    const int j = partner_[i];
    if (j == kUnpaired) return;
    partner_[i] = kUnpaired;
    partner_[j] = kUnpaired;
  }

  /** @brief Connected pairs as (i, j) with i < j, ascending in i. */
  std::vector<std::pair<int, int>> pairs() const {
    std::vector<std::pair<int, int>> out;
    out.reserve(partner_.size() / 2);
    for (int i = 0; i < size(); ++i)
      if (partner_[i] > i) out.emplace_back(i, partner_[i]);
    return out;
  }

  Matrix dense() const {
    Matrix x = Matrix::Zero(size(), size());
    for (int i = 0; i < size(); ++i)
      if (partner_[i] != kUnpaired) x(i, partner_[i]) = 1.0;
    return x;
  }

  /**
   * @brief Applies the switching matrix to the rows of a K x n matrix.
   *
   * Row i of the result is row partner(i) of the input, or zero when port i is
   * open. Equivalent to dense() * m without forming the dense matrix.
   */
  CMatrix apply_rows(const CMatrix& m) const {
    if (m.rows() != size())
      throw std::invalid_argument("MatchingMatrix - apply_rows: row count mismatch");
    CMatrix out = CMatrix::Zero(m.rows(), m.cols());
    for (int i = 0; i < size(); ++i)
      if (partner_[i] != kUnpaired) out.row(i) = m.row(partner_[i]);
    return out;
  }

  /** @brief Squared Frobenius distance between the dense forms. */
  double squared_distance(const MatchingMatrix& other) const {
    if (other.size() != size())
      throw std::invalid_argument("MatchingMatrix - squared_distance: size mismatch");
    double d = 0.0;
    for (int i = 0; i < size(); ++i)
      if (partner_[i] != other.partner_[i]) d += (partner_[i] != kUnpaired) + (other.partner_[i] != kUnpaired);
    return d;
  }

  bool operator==(const MatchingMatrix& other) const { return partner_ == other.partner_; }
  bool operator!=(const MatchingMatrix& other) const { return !(*this == other); }

 private:
  static int check_size(int k) {
    if (k < 2 || k % 2 != 0)
      throw std::invalid_argument("MatchingMatrix: port count must be even and at least 2, got " + std::to_string(k));
    return k;
  }

  void check_index(int i) const {
    if (i < 0 || i >= size()) throw std::invalid_argument("MatchingMatrix: port index out of range");
  }

  std::vector<int> partner_;
};

/**
 * @brief Draws a uniformly random full matching of K ports.
 *
 * Shuffles the port indices and pairs consecutive entries, which induces the
 * uniform distribution over the (K - 1)!! perfect matchings.
 */
inline MatchingMatrix random_matching(int k, Rng& rng) {
  std::vector<int> idx(k);
  for (int i = 0; i < k; ++i) idx[i] = i;
  rng.shuffle(idx);
  MatchingMatrix m(k);
  for (int i = 0; i + 1 < k; i += 2) m.connect(idx[i], idx[i + 1]);
  return m;
}

}  // namespace redris
