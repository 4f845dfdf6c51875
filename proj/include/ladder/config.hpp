#ifndef LADDER_CONFIG_HPP
#define LADDER_CONFIG_HPP

#include <span>
#include <vector>

#include <json.hpp>

#include "ladder/graph.hpp"

namespace ladder {

/// Heights on one copy of G, indexed by vertex.
using RungConfig = std::vector<int>;

/// Heights on the window G x {first..last}, stored rung-major.
class LadderConfig {
public:
    LadderConfig() = default;
    LadderConfig(Window w, int width, std::vector<int> heights);
    /// All rungs equal to `rung`.
    static LadderConfig uniform(Window w, const RungConfig& rung);
    static LadderConfig from_rungs(int first_rung, const std::vector<RungConfig>& rungs);

    Window window() const { return window_; }
    int width() const { return width_; }
    std::size_t size() const { return heights_.size(); }

    std::size_t index(Site s) const {
        return static_cast<std::size_t>(s.rung - window_.first) * width_ + s.vertex;
    }
    Site site(std::size_t i) const {
        return {window_.first + static_cast<int>(i / width_), static_cast<int>(i % width_)};
    }
    int& at(Site s) { return heights_[index(s)]; }
    int at(Site s) const { return heights_[index(s)]; }
    bool contains(Site s) const { return window_.contains(s.rung) && s.vertex >= 0 && s.vertex < width_; }

    std::span<const int> heights() const { return heights_; }
    std::span<int> heights() { return heights_; }
    RungConfig rung(int k) const;
    std::vector<RungConfig> rungs() const;
    void set_rung(int k, const RungConfig& r);

    /// 1 <= height <= m(x) everywhere.
    bool is_stable(const Graph& g) const;
    /// Sub-configuration on a sub-window.
    LadderConfig restricted(Window w) const;
    /// Rung order reversed within the same window (k -> first + last - k).
    LadderConfig reflected() const;

    friend bool operator==(const LadderConfig&, const LadderConfig&) = default;

private:
    Window window_;
    int width_ = 0;
    std::vector<int> heights_;
};

/// Array of per-rung height vectors.
nlohmann::json rungs_to_json(const LadderConfig& c);
/// Accepts either an array of per-rung vectors (first rung 1) or an object
/// {"first_rung": k, "rungs": [...]}.
LadderConfig config_from_json(const nlohmann::json& j, const Graph& g);

} // namespace ladder

#endif
