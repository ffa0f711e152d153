#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace tncn {

/// Compressed sparse row matrix over exact integer weights. Stored values are
/// nonzero and column indices within each row are strictly increasing.
struct CsrMatrix {
    int n = 0; // square: n x n
    std::vector<std::int64_t> row_ptr; // size n + 1
    std::vector<int> col;
    std::vector<std::int64_t> val;

    std::size_t nnz() const { return col.size(); }

    std::span<const int> row_cols(int i) const {
        return {col.data() + row_ptr[static_cast<std::size_t>(i)],
                col.data() + row_ptr[static_cast<std::size_t>(i) + 1]};
    }
    std::span<const std::int64_t> row_vals(int i) const {
        return {val.data() + row_ptr[static_cast<std::size_t>(i)],
                val.data() + row_ptr[static_cast<std::size_t>(i) + 1]};
    }

    /// Binary search within a row; 0 when absent.
    std::int64_t at(int i, int j) const;

    static CsrMatrix identity(int n);
};

/// Builds an n x n CSR from (row, col, weight) triplets. Duplicate positions
/// are summed; zero results dropped.
CsrMatrix csr_from_triplets(int n, std::vector<std::tuple<int, int, std::int64_t>> triplets);

/// Sparse product a * b, row-by-row with sorted-merge accumulation.
CsrMatrix spgemm(const CsrMatrix& a, const CsrMatrix& b);

/// Sparse vector as sorted (index, weight) pairs.
using SparseVec = std::vector<std::pair<int, std::int64_t>>;

/// Element-wise product of two rows.
SparseVec hadamard_rows(const CsrMatrix& a, int ra, const CsrMatrix& b, int rb);

} // namespace tncn
