#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qmem {

using Index = Eigen::Index;

struct Factor {
    std::string name;
    Index dim = 1;

    bool operator==(const Factor&) const = default;
};

// Ordered tensor factors of a Hilbert space. Factor 0 is the most significant
// index in the row-major (Kronecker) ordering.
class SubsystemLayout {
public:
    SubsystemLayout() = default;
    SubsystemLayout(std::initializer_list<Factor> factors);
    explicit SubsystemLayout(std::vector<Factor> factors);

    static SubsystemLayout single(std::string name, Index dim);

    Index dim() const;
    std::size_t size() const { return factors_.size(); }
    bool empty() const { return factors_.empty(); }

    const Factor& operator[](std::size_t i) const { return factors_[i]; }
    auto begin() const { return factors_.begin(); }
    auto end() const { return factors_.end(); }

    std::optional<std::size_t> find(std::string_view name) const;
    // Throws std::invalid_argument for unknown names.
    std::size_t index_of(std::string_view name) const;
    Index dim_of(std::string_view name) const;
    std::vector<Index> dims() const;
    std::vector<std::string> names() const;

    SubsystemLayout concat(const SubsystemLayout& other) const;
    // Keeps the named factors in their original order.
    SubsystemLayout restrict_to(const std::vector<std::string>& keep) const;
    std::vector<std::string> complement(const std::vector<std::string>& names) const;

    bool operator==(const SubsystemLayout&) const = default;

private:
    void check_unique() const;

    std::vector<Factor> factors_;
};

} // namespace qmem
