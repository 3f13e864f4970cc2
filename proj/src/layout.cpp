#include "qmem/layout.hpp"

#include <algorithm>
#include <stdexcept>

namespace qmem {

SubsystemLayout::SubsystemLayout(std::initializer_list<Factor> factors) : factors_(factors) {
    check_unique();
}

SubsystemLayout::SubsystemLayout(std::vector<Factor> factors) : factors_(std::move(factors)) {
    check_unique();
}

SubsystemLayout SubsystemLayout::single(std::string name, Index dim) {
    return SubsystemLayout{Factor{std::move(name), dim}};
}

void SubsystemLayout::check_unique() const {
    for (std::size_t i = 0; i < factors_.size(); ++i) {
        if (factors_[i].dim < 1) {
            throw std::invalid_argument("subsystem '" + factors_[i].name + "' has non-positive dimension");
        }
        for (std::size_t j = i + 1; j < factors_.size(); ++j) {
            if (factors_[i].name == factors_[j].name) {
                throw std::invalid_argument("duplicate subsystem name '" + factors_[i].name + "'");
            }
        }
    }
}

Index SubsystemLayout::dim() const {
    Index d = 1;
    for (const auto& f : factors_) d *= f.dim;
    return d;
}

std::optional<std::size_t> SubsystemLayout::find(std::string_view name) const {
    for (std::size_t i = 0; i < factors_.size(); ++i) {
        if (factors_[i].name == name) return i;
    }
    return std::nullopt;
}

std::size_t SubsystemLayout::index_of(std::string_view name) const {
    if (auto i = find(name)) return *i;
    throw std::invalid_argument("unknown subsystem '" + std::string(name) + "'");
}

Index SubsystemLayout::dim_of(std::string_view name) const {
    return factors_[index_of(name)].dim;
}

std::vector<Index> SubsystemLayout::dims() const {
    std::vector<Index> out;
    out.reserve(factors_.size());
    for (const auto& f : factors_) out.push_back(f.dim);
    return out;
}

std::vector<std::string> SubsystemLayout::names() const {
    std::vector<std::string> out;
    out.reserve(factors_.size());
    for (const auto& f : factors_) out.push_back(f.name);
    return out;
}

SubsystemLayout SubsystemLayout::concat(const SubsystemLayout& other) const {
    std::vector<Factor> all = factors_;
    all.insert(all.end(), other.factors_.begin(), other.factors_.end());
    return SubsystemLayout(std::move(all));
}

SubsystemLayout SubsystemLayout::restrict_to(const std::vector<std::string>& keep) const {
    for (const auto& k : keep) index_of(k);
    std::vector<Factor> kept;
    for (const auto& f : factors_) {
        if (std::find(keep.begin(), keep.end(), f.name) != keep.end()) kept.push_back(f);
    }
    return SubsystemLayout(std::move(kept));
}

std::vector<std::string> SubsystemLayout::complement(const std::vector<std::string>& names) const {
    for (const auto& n : names) index_of(n);
    std::vector<std::string> out;
    for (const auto& f : factors_) {
        if (std::find(names.begin(), names.end(), f.name) == names.end()) out.push_back(f.name);
    }
    return out;
}

} // namespace qmem
