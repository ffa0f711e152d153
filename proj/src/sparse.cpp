#include "tncn/sparse.hpp"

#include <algorithm>
#include <tuple>

namespace tncn {

std::int64_t CsrMatrix::at(int i, int j) const {
    auto cols = row_cols(i);
    auto it = std::lower_bound(cols.begin(), cols.end(), j);
    if (it == cols.end() || *it != j) return 0;
    return val[static_cast<std::size_t>(row_ptr[static_cast<std::size_t>(i)] + (it - cols.begin()))];
}

CsrMatrix CsrMatrix::identity(int n) {
    CsrMatrix m;
    m.n = n;
    m.row_ptr.resize(static_cast<std::size_t>(n) + 1);
    m.col.resize(static_cast<std::size_t>(n));
    m.val.assign(static_cast<std::size_t>(n), 1);
    for (int i = 0; i < n; ++i) {
        m.row_ptr[static_cast<std::size_t>(i)] = i;
        m.col[static_cast<std::size_t>(i)] = i;
    }
    m.row_ptr[static_cast<std::size_t>(n)] = n;
    return m;
}

CsrMatrix csr_from_triplets(int n, std::vector<std::tuple<int, int, std::int64_t>> triplets) {
    std::sort(triplets.begin(), triplets.end());
    CsrMatrix m;
    m.n = n;
    m.row_ptr.assign(static_cast<std::size_t>(n) + 1, 0);
    std::size_t i = 0;
    while (i < triplets.size()) {
        auto [r, c, v] = triplets[i];
        std::int64_t sum = v;
        std::size_t j = i + 1;
        while (j < triplets.size() && std::get<0>(triplets[j]) == r && std::get<1>(triplets[j]) == c) {
            sum += std::get<2>(triplets[j]);
            ++j;
        }
        if (sum != 0) {
            m.col.push_back(c);
            m.val.push_back(sum);
            m.row_ptr[static_cast<std::size_t>(r) + 1] += 1;
        }
        i = j;
    }
    for (int r = 0; r < n; ++r) {
        m.row_ptr[static_cast<std::size_t>(r) + 1] += m.row_ptr[static_cast<std::size_t>(r)];
    }
    return m;
}

CsrMatrix spgemm(const CsrMatrix& a, const CsrMatrix& b) {
    CsrMatrix out;
    out.n = a.n;
    out.row_ptr.assign(static_cast<std::size_t>(a.n) + 1, 0);
    std::vector<std::pair<int, std::int64_t>> acc;
    for (int i = 0; i < a.n; ++i) {
        acc.clear();
        auto cols = a.row_cols(i);
        auto vals = a.row_vals(i);
        for (std::size_t k = 0; k < cols.size(); ++k) {
            int mid = cols[k];
            std::int64_t w = vals[k];
            auto bcols = b.row_cols(mid);
            auto bvals = b.row_vals(mid);
            for (std::size_t l = 0; l < bcols.size(); ++l) {
                acc.emplace_back(bcols[l], w * bvals[l]);
            }
        }
        std::sort(acc.begin(), acc.end());
        std::size_t p = 0;
        while (p < acc.size()) {
            int c = acc[p].first;
            std::int64_t sum = 0;
            while (p < acc.size() && acc[p].first == c) {
                sum += acc[p].second;
                ++p;
            }
            if (sum != 0) {
                out.col.push_back(c);
                out.val.push_back(sum);
            }
        }
        out.row_ptr[static_cast<std::size_t>(i) + 1] = static_cast<std::int64_t>(out.col.size());
    }
    return out;
}

SparseVec hadamard_rows(const CsrMatrix& a, int ra, const CsrMatrix& b, int rb) {
    SparseVec out;
    auto ac = a.row_cols(ra);
    auto av = a.row_vals(ra);
    auto bc = b.row_cols(rb);
    auto bv = b.row_vals(rb);
    std::size_t i = 0, j = 0;
    while (i < ac.size() && j < bc.size()) {
        if (ac[i] < bc[j]) {
            ++i;
        } else if (ac[i] > bc[j]) {
            ++j;
        } else {
            out.emplace_back(ac[i], av[i] * bv[j]);
            ++i;
            ++j;
        }
    }
    return out;
}

} // namespace tncn
