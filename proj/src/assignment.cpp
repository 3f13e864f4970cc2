#include "qmem/absence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace qmem {

namespace {

// Kuhn's augmenting paths: columns are matched into rows along allowed edges.
class Matcher {
public:
    Matcher(const MatrixXd& w, double theta) : w_(w), theta_(theta), row_of_(w.cols(), -1), col_of_(w.rows(), -1) {}

    bool perfect() {
        for (Index j = 0; j < w_.cols(); ++j) {
            seen_.assign(static_cast<std::size_t>(w_.rows()), false);
            if (!augment(j)) return false;
        }
        return true;
    }

    std::vector<std::pair<Index, Index>> pairs() const {
        std::vector<std::pair<Index, Index>> out;
        for (Index j = 0; j < w_.cols(); ++j) out.emplace_back(row_of_[static_cast<std::size_t>(j)], j);
        return out;
    }

private:
    bool augment(Index j) {
        for (Index k = 0; k < w_.rows(); ++k) {
            if (w_(k, j) < theta_ || seen_[static_cast<std::size_t>(k)]) continue;
            seen_[static_cast<std::size_t>(k)] = true;
            const Index other = col_of_[static_cast<std::size_t>(k)];
            if (other < 0 || augment(other)) {
                col_of_[static_cast<std::size_t>(k)] = j;
                row_of_[static_cast<std::size_t>(j)] = k;
                return true;
            }
        }
        return false;
    }

    const MatrixXd& w_;
    double theta_;
    std::vector<Index> row_of_;
    std::vector<Index> col_of_;
    std::vector<bool> seen_;
};

} // namespace

AssignmentResult delta_phi(const MatrixXd& overlaps) {
    if (overlaps.cols() < 1 || overlaps.rows() < overlaps.cols()) {
        throw std::invalid_argument("delta_phi: need at least as many eigenstates as environment labels");
    }
    if (!overlaps.allFinite() || overlaps.minCoeff() < 0) throw std::invalid_argument("delta_phi: overlaps must be finite and non-negative");
    std::vector<double> values(overlaps.data(), overlaps.data() + overlaps.size());
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());

    // values[lo] is always feasible (it is the minimum); find the largest feasible index.
    std::size_t lo = 0, hi = values.size() - 1;
    while (lo < hi) {
        const std::size_t mid = lo + (hi - lo + 1) / 2;
        if (Matcher(overlaps, values[mid]).perfect()) lo = mid;
        else hi = mid - 1;
    }
    Matcher m(overlaps, values[lo]);
    if (!m.perfect()) throw std::logic_error("delta_phi: no perfect matching at the minimum threshold");
    AssignmentResult out;
    out.assignment = m.pairs();
    out.delta_phi = std::numeric_limits<double>::infinity();
    for (const auto& [k, j] : out.assignment) out.delta_phi = std::min(out.delta_phi, overlaps(k, j));
    out.overlaps = overlaps;
    return out;
}

double delta_unconstrained(const MatrixXd& overlaps) {
    if (overlaps.size() == 0) throw std::invalid_argument("delta_unconstrained: empty overlap matrix");
    return overlaps.colwise().maxCoeff().minCoeff();
}

MemoryBound memory_bound(double delta) {
    if (!(delta >= 0.0) || !(delta <= 1.0)) throw std::invalid_argument("memory_bound: delta must lie in [0, 1]");
    return {4.0 * delta * std::sqrt(1.0 - delta * delta), delta > 1.0 / std::sqrt(2.0)};
}

} // namespace qmem
