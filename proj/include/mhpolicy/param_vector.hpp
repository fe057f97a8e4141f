#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "mhpolicy/errors.hpp"

namespace mhpolicy {

/// Flat policy parameter vector. `layout` names the architecture the values
/// belong to, e.g. "tabular:10x5" or "mlp:4-32-2"; the owning policy type
/// knows how the flat indices split into blocks.
struct ParamVector {
    std::string layout;
    std::vector<double> values;

    ParamVector() = default;
    ParamVector(std::string layout_, std::vector<double> values_)
        : layout(std::move(layout_)), values(std::move(values_)) {}

    std::size_t size() const noexcept { return values.size(); }
    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }
    std::span<const double> view() const noexcept { return values; }

    bool all_finite() const {
        for (double v : values)
            if (!std::isfinite(v)) return false;
        return true;
    }

    bool operator==(const ParamVector&) const = default;
};

namespace detail {

inline void require_same_layout(const ParamVector& a, const ParamVector& b) {
    if (a.layout != b.layout || a.size() != b.size())
        throw contract_violation("parameter vectors have different layouts");
}

} // namespace detail

inline ParamVector operator+(const ParamVector& a, const ParamVector& b) {
    detail::require_same_layout(a, b);
    ParamVector out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i];
    return out;
}

inline ParamVector operator-(const ParamVector& a, const ParamVector& b) {
    detail::require_same_layout(a, b);
    ParamVector out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b[i];
    return out;
}

inline void to_json(nlohmann::json& j, const ParamVector& p) {
    j = nlohmann::json{{"layout", p.layout}, {"values", p.values}};
}

inline void from_json(const nlohmann::json& j, ParamVector& p) {
    p.layout = j.at("layout").get<std::string>();
    p.values = j.at("values").get<std::vector<double>>();
}

} // namespace mhpolicy
