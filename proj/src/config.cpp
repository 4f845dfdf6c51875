#include "ladder/config.hpp"

#include "ladder/errors.hpp"

namespace ladder {

LadderConfig::LadderConfig(Window w, int width, std::vector<int> heights)
    : window_(w), width_(width), heights_(std::move(heights)) {
    if (width_ < 1 || heights_.size() != static_cast<std::size_t>(w.num_rungs()) * width_) {
        throw ValidationError("configuration size does not match window");
    }
}

LadderConfig LadderConfig::uniform(Window w, const RungConfig& rung) {
    std::vector<int> h;
    h.reserve(static_cast<std::size_t>(w.num_rungs()) * rung.size());
    for (int k = 0; k < w.num_rungs(); ++k) h.insert(h.end(), rung.begin(), rung.end());
    return LadderConfig(w, static_cast<int>(rung.size()), std::move(h));
}

LadderConfig LadderConfig::from_rungs(int first_rung, const std::vector<RungConfig>& rungs) {
    if (rungs.empty()) throw ValidationError("configuration needs at least one rung");
    std::vector<int> h;
    for (const auto& r : rungs) {
        if (r.size() != rungs.front().size()) throw ValidationError("rungs differ in width");
        h.insert(h.end(), r.begin(), r.end());
    }
    Window w(first_rung, first_rung + static_cast<int>(rungs.size()) - 1);
    return LadderConfig(w, static_cast<int>(rungs.front().size()), std::move(h));
}

RungConfig LadderConfig::rung(int k) const {
    auto begin = heights_.begin() + static_cast<std::ptrdiff_t>(index({k, 0}));
    return RungConfig(begin, begin + width_);
}

std::vector<RungConfig> LadderConfig::rungs() const {
    std::vector<RungConfig> out;
    for (int k = window_.first; k <= window_.last; ++k) out.push_back(rung(k));
    return out;
}

void LadderConfig::set_rung(int k, const RungConfig& r) {
    for (int x = 0; x < width_; ++x) at({k, x}) = r[x];
}

bool LadderConfig::is_stable(const Graph& g) const {
    for (std::size_t i = 0; i < heights_.size(); ++i) {
        int x = static_cast<int>(i % width_);
        if (heights_[i] < 1 || heights_[i] > g.max_height(x)) return false;
    }
    return true;
}

LadderConfig LadderConfig::restricted(Window w) const {
    if (w.first < window_.first || w.last > window_.last) throw ValidationError("sub-window outside window");
    std::vector<int> h(heights_.begin() + static_cast<std::ptrdiff_t>(index({w.first, 0})),
                       heights_.begin() + static_cast<std::ptrdiff_t>(index({w.last, 0}) + width_));
    return LadderConfig(w, width_, std::move(h));
}

LadderConfig LadderConfig::reflected() const {
    LadderConfig out = *this;
    for (int k = window_.first; k <= window_.last; ++k) {
        out.set_rung(window_.first + window_.last - k, rung(k));
    }
    return out;
}

nlohmann::json rungs_to_json(const LadderConfig& c) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& r : c.rungs()) out.push_back(r);
    return out;
}

LadderConfig config_from_json(const nlohmann::json& j, const Graph& g) {
    int first = 1;
    const nlohmann::json* rungs = &j;
    if (j.is_object()) {
        first = j.value("first_rung", 1);
        if (!j.contains("rungs")) throw ValidationError("configuration object needs \"rungs\"");
        rungs = &j.at("rungs");
    }
    if (!rungs->is_array()) throw ValidationError("configuration must be an array of rungs");
    std::vector<RungConfig> rs;
    for (const auto& r : *rungs) {
        if (!r.is_array() || static_cast<int>(r.size()) != g.size()) {
            throw ValidationError("each rung must list " + std::to_string(g.size()) + " heights");
        }
        rs.push_back(r.get<RungConfig>());
    }
    return LadderConfig::from_rungs(first, rs);
}

} // namespace ladder
