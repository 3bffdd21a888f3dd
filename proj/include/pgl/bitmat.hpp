#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <vector>

#include "pgl/errors.hpp"

namespace pgl {

// Dense 0/1 matrix with up to 32 columns, one row per 64-bit mask.
// This is the input type of the permanent kernels.
struct SquareMask {
    int n = 0;
    std::array<std::uint64_t, 32> row{};

    static SquareMask zeros(int n) {
        require(n >= 0 && n <= 32, "SquareMask: size must be in [0, 32]");
        SquareMask m;
        m.n = n;
        return m;
    }

    static SquareMask ones(int n) {
        SquareMask m = zeros(n);
        std::uint64_t full = n == 0 ? 0 : (n == 64 ? ~0ULL : ((1ULL << n) - 1));
        for (int i = 0; i < n; ++i) m.row[static_cast<std::size_t>(i)] = full;
        return m;
    }

    static SquareMask identity(int n) {
        SquareMask m = zeros(n);
        for (int i = 0; i < n; ++i) m.row[static_cast<std::size_t>(i)] = 1ULL << i;
        return m;
    }

    static SquareMask from_rows(const std::vector<std::vector<int>>& rows) {
        auto n = static_cast<int>(rows.size());
        SquareMask m = zeros(n);
        for (int i = 0; i < n; ++i) {
            require(static_cast<int>(rows[static_cast<std::size_t>(i)].size()) == n,
                    "SquareMask: matrix must be square");
            for (int j = 0; j < n; ++j) {
                int v = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
                require(v == 0 || v == 1, "SquareMask: entries must be 0/1");
                if (v) m.set(i, j);
            }
        }
        return m;
    }

    bool get(int i, int j) const { return (row[static_cast<std::size_t>(i)] >> j) & 1ULL; }
    void set(int i, int j) { row[static_cast<std::size_t>(i)] |= 1ULL << j; }

    int row_sum(int i) const { return std::popcount(row[static_cast<std::size_t>(i)]); }

    // Column j as a bitmask over rows.
    std::uint64_t column_mask(int j) const {
        std::uint64_t c = 0;
        for (int i = 0; i < n; ++i) c |= static_cast<std::uint64_t>(get(i, j)) << i;
        return c;
    }
};

// Bit-packed rectangular 0/1 matrix; rows are contiguous 64-bit words.
// Row count and width are both `n` for the bipartite biadjacency use.
class BitMatrix {
  public:
    BitMatrix() = default;
    BitMatrix(std::uint32_t rows, std::uint32_t cols)
        : rows_(rows), cols_(cols), words_per_row_((cols + 63) / 64),
          data_(static_cast<std::size_t>(rows) * words_per_row_, 0) {}

    std::uint32_t rows() const { return rows_; }
    std::uint32_t cols() const { return cols_; }

    bool get(std::uint32_t r, std::uint32_t c) const {
        return (word(r, c >> 6) >> (c & 63)) & 1ULL;
    }
    void set(std::uint32_t r, std::uint32_t c) { word(r, c >> 6) |= 1ULL << (c & 63); }

    int row_popcount(std::uint32_t r) const {
        int s = 0;
        for (std::uint32_t w = 0; w < words_per_row_; ++w)
            s += std::popcount(word(r, w));
        return s;
    }

    int col_popcount(std::uint32_t c) const {
        int s = 0;
        for (std::uint32_t r = 0; r < rows_; ++r) s += get(r, c);
        return s;
    }

    const std::uint64_t* row_words(std::uint32_t r) const {
        return data_.data() + static_cast<std::size_t>(r) * words_per_row_;
    }
    std::uint32_t words_per_row() const { return words_per_row_; }

    bool operator==(const BitMatrix& o) const {
        return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
    }

  private:
    std::uint64_t& word(std::uint32_t r, std::uint32_t w) {
        return data_[static_cast<std::size_t>(r) * words_per_row_ + w];
    }
    const std::uint64_t& word(std::uint32_t r, std::uint32_t w) const {
        return data_[static_cast<std::size_t>(r) * words_per_row_ + w];
    }

    std::uint32_t rows_ = 0, cols_ = 0, words_per_row_ = 0;
    std::vector<std::uint64_t> data_;
};

}  // namespace pgl
