#pragma once

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

namespace csbm {

using Vertex = std::uint32_t;

// Triangular index of the unordered pair {u, v} with u < v, row-major over
// the upper triangle of an n x n incidence.
inline std::uint64_t pair_index(Vertex u, Vertex v, Vertex n) {
  if (u > v) std::swap(u, v);
  return static_cast<std::uint64_t>(u) * (2ull * n - u - 1) / 2 + (v - u - 1);
}

// Simple undirected graph on vertices 0..n-1, stored as a bit-packed upper
// triangle. Edge tests are O(1); edge iteration is a word scan.
class Graph {
 public:
  Graph() = default;

  explicit Graph(Vertex n)
      : n_(n),
        bits_((pair_count_of(n) + 63) / 64, 0),
        degree_(n, 0),
        row_offset_(n ? n : 1, 0) {
    for (Vertex u = 1; u < n_; ++u) {
      row_offset_[u] = row_offset_[u - 1] + (n_ - u);
    }
  }

  Vertex vertex_count() const { return n_; }

  std::uint64_t pair_count() const { return pair_count_of(n_); }

  std::uint64_t edge_count() const { return edge_count_; }

  Vertex degree(Vertex v) const { return degree_[v]; }

  bool edge(Vertex u, Vertex v) const {
    if (u == v) return false;
    const std::uint64_t idx = pair_index(u, v, n_);
    return (bits_[idx >> 6] >> (idx & 63)) & 1;
  }

  void set_edge(Vertex u, Vertex v, bool present) {
    if (u == v) throw std::invalid_argument("Graph: self-loops are not allowed");
    if (u >= n_ || v >= n_) throw std::invalid_argument("Graph: vertex out of range");
    const std::uint64_t idx = pair_index(u, v, n_);
    const std::uint64_t mask = 1ull << (idx & 63);
    std::uint64_t& word = bits_[idx >> 6];
    const bool had = word & mask;
    if (had == present) return;
    if (present) {
      word |= mask;
      ++edge_count_;
      ++degree_[u];
      ++degree_[v];
    } else {
      word &= ~mask;
      --edge_count_;
      --degree_[u];
      --degree_[v];
    }
  }

  // Visits every edge as f(u, v) with u < v, in triangular index order.
  template <class F>
  void for_each_edge(F&& f) const {
    for (Vertex u = 0; u + 1 < n_; ++u) {
      const std::uint64_t s = row_offset_[u];
      const std::uint64_t e = s + (n_ - 1 - u);
      for (std::uint64_t w = s >> 6, we = (e + 63) >> 6; w < we; ++w) {
        std::uint64_t word = bits_[w];
        const std::uint64_t base = w << 6;
        if (base < s) word &= ~0ull << (s - base);
        if (base + 64 > e) word &= ~0ull >> (base + 64 - e);
        while (word) {
          const int b = std::countr_zero(word);
          word &= word - 1;
          f(u, static_cast<Vertex>(u + 1 + (base + b - s)));
        }
      }
    }
  }

  std::vector<std::pair<Vertex, Vertex>> edges() const {
    std::vector<std::pair<Vertex, Vertex>> out;
    out.reserve(edge_count_);
    for_each_edge([&](Vertex u, Vertex v) { out.emplace_back(u, v); });
    return out;
  }

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.n_ == b.n_ && a.bits_ == b.bits_;
  }

 private:
  static std::uint64_t pair_count_of(Vertex n) {
    return static_cast<std::uint64_t>(n) * (n - 1) / 2;
  }

  Vertex n_ = 0;
  std::uint64_t edge_count_ = 0;
  std::vector<std::uint64_t> bits_;
  std::vector<Vertex> degree_;
  std::vector<std::uint64_t> row_offset_;
};

}  // namespace csbm
