#include "relplan/mining.hpp"

#include <bit>
#include <vector>

namespace relplan {

CountMatrix count_cooccurrence(const PreferenceMatrix& m) {
    m.validate();
    const Eigen::Index n = m.feature_count();
    const Eigen::Index k = m.user_count();

    CountMatrix counts;
    counts.user_count = k;
    counts.lambda = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>::Zero(n, 2 * n);

    // Pack each feature row into 64-bit words so the pairwise tallies
    // reduce to AND + popcount over the user axis.
    const Eigen::Index words = (k + 63) / 64;
    std::vector<std::uint64_t> packed(static_cast<std::size_t>(n * words), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
        std::uint64_t* row = packed.data() + static_cast<std::size_t>(i * words);
        for (Eigen::Index t = 0; t < k; ++t) {
            if (m.entries(i, t)) row[t >> 6] |= std::uint64_t(1) << (t & 63);
        }
    }

    std::vector<std::int64_t> row_totals(static_cast<std::size_t>(n), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
        const std::uint64_t* row = packed.data() + static_cast<std::size_t>(i * words);
        std::int64_t total = 0;
        for (Eigen::Index w = 0; w < words; ++w) total += std::popcount(row[w]);
        row_totals[static_cast<std::size_t>(i)] = total;
    }

    for (Eigen::Index i = 0; i < n; ++i) {
        const std::uint64_t* ri = packed.data() + static_cast<std::size_t>(i * words);
        for (Eigen::Index j = 0; j < n; ++j) {
            const std::uint64_t* rj = packed.data() + static_cast<std::size_t>(j * words);
            std::int64_t both = 0;
            for (Eigen::Index w = 0; w < words; ++w) both += std::popcount(ri[w] & rj[w]);
            counts.lambda(i, j) = both;
            counts.lambda(i, j + n) = row_totals[static_cast<std::size_t>(i)] - both;
        }
    }
    return counts;
}

EellsMatrix eells_matrix(const CountMatrix& counts, const std::vector<std::string>& feature_ids) {
    const Eigen::Index n = counts.feature_count();
    const std::int64_t k = counts.user_count;
    if (k < 1) {
        throw ValidationError("eells: user count must be at least 1");
    }
    if (static_cast<Eigen::Index>(feature_ids.size()) != n) {
        throw ValidationError("eells: feature id count does not match counts");
    }

    EellsMatrix out;
    out.feature_ids = feature_ids;
    out.eta.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            const std::int64_t with_j = counts.lambda(j, j);
            const std::int64_t without_j = k - with_j;
            const double pos =
                with_j > 0 ? static_cast<double>(counts.lambda(i, j)) / static_cast<double>(with_j)
                           : 0.0;
            const double neg = without_j > 0 ? static_cast<double>(counts.lambda(i, j + n)) /
                                                   static_cast<double>(without_j)
                                             : 0.0;
            out.eta(i, j) = pos - neg;
        }
    }
    return out;
}

EellsMatrix mine_eells(const PreferenceMatrix& m) {
    return eells_matrix(count_cooccurrence(m), m.feature_ids);
}

} // namespace relplan
